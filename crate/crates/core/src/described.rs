//! Finitely described functions and subsets of an index set.
//!
//! Over `ℕ` every exact description is eventually periodic: a finite prefix
//! followed by a pattern indexed by `j mod period`. Linear rules are
//! eventually affine on each residue class, which keeps pointwise
//! comparisons exact. Opaque rules are evaluable but carry no certificate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered::Ext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Index {
    /// `{0, …, size-1}`.
    Finite { size: u64 },
    Naturals,
}

impl Index {
    pub fn contains(&self, j: u64) -> bool {
        match self {
            Index::Finite { size } => j < *size,
            Index::Naturals => true,
        }
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        a.max(b)
    } else {
        a / gcd(a, b) * b
    }
}

/// An eventually periodic subset of `ℕ`: membership of `j` is `prefix[j]`
/// below the prefix length and `pattern[j mod pattern.len()]` from there on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicSet {
    pub prefix: Vec<bool>,
    pub pattern: Vec<bool>,
}

impl PeriodicSet {
    pub fn new(prefix: Vec<bool>, pattern: Vec<bool>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Rejected("empty period pattern".into()));
        }
        Ok(PeriodicSet { prefix, pattern })
    }

    pub fn all() -> Self {
        PeriodicSet { prefix: vec![], pattern: vec![true] }
    }

    pub fn none() -> Self {
        PeriodicSet { prefix: vec![], pattern: vec![false] }
    }

    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        let members: Vec<u64> = members.into_iter().collect();
        let len = members.iter().max().map_or(0, |m| m + 1) as usize;
        let mut prefix = vec![false; len];
        for m in members {
            prefix[m as usize] = true;
        }
        PeriodicSet { prefix, pattern: vec![false] }
    }

    pub fn residues(modulus: u64, residues: &[u64]) -> Self {
        let pattern = (0..modulus).map(|r| residues.iter().any(|&x| x % modulus == r)).collect();
        PeriodicSet { prefix: vec![], pattern }
    }

    pub fn contains(&self, j: u64) -> bool {
        if (j as usize) < self.prefix.len() {
            self.prefix[j as usize]
        } else {
            self.pattern[(j % self.pattern.len() as u64) as usize]
        }
    }

    pub fn start(&self) -> u64 {
        self.prefix.len() as u64
    }

    pub fn period(&self) -> u64 {
        self.pattern.len() as u64
    }

    /// Same set with the given start and a period that is a multiple of the current one.
    pub fn align(&self, start: u64, period: u64) -> Self {
        debug_assert!(period.is_multiple_of(self.period()) && start >= self.start());
        PeriodicSet {
            prefix: (0..start).map(|j| self.contains(j)).collect(),
            pattern: (0..period).map(|r| self.pattern[(r % self.period()) as usize]).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        let start = self.start().max(other.start());
        let period = lcm(self.period(), other.period());
        let (a, b) = (self.align(start, period), other.align(start, period));
        PeriodicSet {
            prefix: a.prefix.iter().zip(&b.prefix).map(|(&x, &y)| f(x, y)).collect(),
            pattern: a.pattern.iter().zip(&b.pattern).map(|(&x, &y)| f(x, y)).collect(),
        }
        .normalized()
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a && b)
    }

    pub fn complement(&self) -> Self {
        PeriodicSet {
            prefix: self.prefix.iter().map(|b| !b).collect(),
            pattern: self.pattern.iter().map(|b| !b).collect(),
        }
    }

    /// Minimal period, then minimal prefix.
    pub fn normalized(&self) -> Self {
        let p = self.period();
        let mut best = p;
        for d in 1..p {
            if p.is_multiple_of(d) && (0..p).all(|r| self.pattern[r as usize] == self.pattern[(r % d) as usize]) {
                best = d;
                break;
            }
        }
        let pattern: Vec<bool> = self.pattern[..best as usize].to_vec();
        let mut prefix = self.prefix.clone();
        while let Some(&last) = prefix.last() {
            let j = prefix.len() as u64 - 1;
            if last == pattern[(j % best) as usize] {
                prefix.pop();
            } else {
                break;
            }
        }
        PeriodicSet { prefix, pattern }
    }

    /// Finitely many members.
    pub fn is_finite(&self) -> bool {
        self.pattern.iter().all(|b| !b)
    }

    /// Finitely many non-members.
    pub fn is_cofinite(&self) -> bool {
        self.pattern.iter().all(|&b| b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        let i = self.intersection(&other.complement());
        i.is_finite() && i.prefix.iter().all(|b| !b)
    }
}

/// A total map from the index set into component values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum DescribedFunction {
    FiniteSupport { default: Ext, overrides: BTreeMap<u64, Ext> },
    EventuallyPeriodic { prefix: Vec<Ext>, pattern: Vec<Ext> },
    /// `slope·j + offset` on `on` (everywhere when absent), `0` elsewhere.
    Linear { slope: u64, offset: u64, on: Option<PeriodicSet> },
    /// A deterministic rule without certified bounds: a hash of `(seed, j)` modulo `modulus`.
    Opaque { seed: u64, modulus: u64 },
}

impl DescribedFunction {
    pub fn constant(v: Ext) -> Self {
        DescribedFunction::FiniteSupport { default: v, overrides: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        DescribedFunction::Linear { slope: 1, offset: 0, on: None }
    }

    pub fn periodic(prefix: Vec<Ext>, pattern: Vec<Ext>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Rejected("empty period pattern".into()));
        }
        Ok(DescribedFunction::EventuallyPeriodic { prefix, pattern })
    }

    pub fn eval(&self, j: u64) -> Ext {
        match self {
            DescribedFunction::FiniteSupport { default, overrides } => *overrides.get(&j).unwrap_or(default),
            DescribedFunction::EventuallyPeriodic { prefix, pattern } => {
                if (j as usize) < prefix.len() {
                    prefix[j as usize]
                } else {
                    pattern[((j - prefix.len() as u64) % pattern.len() as u64) as usize]
                }
            }
            DescribedFunction::Linear { slope, offset, on } => {
                if on.as_ref().is_none_or(|s| s.contains(j)) {
                    Ext::Fin(*offset).add(Ext::Fin(j).mul(*slope))
                } else {
                    Ext::Fin(0)
                }
            }
            DescribedFunction::Opaque { seed, modulus } => {
                let mut h = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ j.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
                h ^= h >> 31;
                h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
                h ^= h >> 29;
                Ext::Fin(h % (*modulus).max(1))
            }
        }
    }

    /// `(start, period)` beyond which values follow the class rule; `None` for opaque rules.
    pub fn shape(&self) -> Option<(u64, u64)> {
        match self {
            DescribedFunction::FiniteSupport { overrides, .. } => {
                Some((overrides.keys().next_back().map_or(0, |k| k + 1), 1))
            }
            DescribedFunction::EventuallyPeriodic { prefix, pattern } => {
                let start = prefix.len() as u64;
                let p = pattern.len() as u64;
                Some((start + (p - start % p) % p, p))
            }
            DescribedFunction::Linear { on, .. } => Some(on.as_ref().map_or((0, 1), |s| (s.start(), s.period()))),
            DescribedFunction::Opaque { .. } => None,
        }
    }

    /// `(slope, offset)` valid for every `j ≥ start` with `j ≡ rep (mod period)`, for any
    /// aligned `(start, period)` and representative `rep ≥ start`.
    pub fn class_rule(&self, rep: u64) -> Option<(u64, Ext)> {
        match self {
            DescribedFunction::Linear { slope, offset, on } => {
                if on.as_ref().is_none_or(|s| s.contains(rep)) {
                    Some((*slope, Ext::Fin(*offset)))
                } else {
                    Some((0, Ext::Fin(0)))
                }
            }
            DescribedFunction::Opaque { .. } => None,
            _ => Some((0, self.eval(rep))),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, DescribedFunction::Opaque { .. })
    }

    pub fn has_slope(&self) -> bool {
        matches!(self, DescribedFunction::Linear { slope, .. } if *slope > 0)
    }

    /// Values that can occur at classes and prefix positions; empty for rules.
    pub fn finite_range(&self) -> Vec<Ext> {
        let mut v: Vec<Ext> = match self {
            DescribedFunction::FiniteSupport { default, overrides } => {
                std::iter::once(*default).chain(overrides.values().copied()).collect()
            }
            DescribedFunction::EventuallyPeriodic { prefix, pattern } => {
                prefix.iter().chain(pattern).copied().collect()
            }
            _ => vec![],
        };
        v.sort();
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_set_normalizes_to_minimal_period() {
        let s = PeriodicSet::new(vec![true, false, true], vec![true, false, true, false]).unwrap();
        let n = s.normalized();
        assert_eq!(n.pattern, vec![true, false]);
        assert!(n.prefix.len() <= 3);
        for j in 0..40 {
            assert_eq!(s.contains(j), n.contains(j));
        }
    }

    #[test]
    fn boolean_operations_are_pointwise() {
        let odd = PeriodicSet::residues(2, &[1]);
        let small = PeriodicSet::finite([0, 1, 2, 3]);
        let u = odd.union(&small);
        let i = odd.intersection(&small);
        for j in 0..50 {
            assert_eq!(u.contains(j), odd.contains(j) || small.contains(j));
            assert_eq!(i.contains(j), odd.contains(j) && small.contains(j));
            assert_eq!(odd.complement().contains(j), !odd.contains(j));
        }
        assert!(i.is_finite());
        assert!(odd.complement().union(&odd).is_cofinite());
        assert!(i.is_subset(&odd));
        assert!(!odd.is_subset(&small));
    }

    #[test]
    fn class_rules_agree_with_evaluation() {
        let fs = [
            DescribedFunction::identity(),
            DescribedFunction::Linear { slope: 2, offset: 1, on: Some(PeriodicSet::residues(3, &[0, 2])) },
            DescribedFunction::periodic(vec![Ext::Fin(5)], vec![Ext::Fin(1), Ext::Inf]).unwrap(),
            DescribedFunction::FiniteSupport { default: Ext::Fin(0), overrides: [(4, Ext::Fin(9))].into() },
        ];
        for f in &fs {
            let (start, period) = f.shape().unwrap();
            for r in 0..period {
                let rep = start + r;
                let (a, b) = f.class_rule(rep).unwrap();
                for k in 0..6 {
                    let j = rep + k * period;
                    assert_eq!(f.eval(j), b.add(Ext::Fin(j).mul(a)), "{f:?} at {j}");
                }
            }
        }
    }

    #[test]
    fn opaque_rule_is_deterministic_and_uncertified() {
        let f = DescribedFunction::Opaque { seed: 7, modulus: 3 };
        assert_eq!(f.eval(11), f.eval(11));
        assert!(f.shape().is_none() && !f.is_exact());
    }
}
