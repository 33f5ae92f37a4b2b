//! Ultrafilter oracles and quotients of products by `c₀`, `c_U` and other ideals.
//!
//! A free ultrafilter on `ℕ` is represented by a point of the profinite
//! completion: a compatible sequence of residues `r_k mod m_k`. It decides
//! every eventually periodic set whose minimal period divides some `m_k`, and
//! nothing else.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::described::{Index, PeriodicSet};
use crate::error::{Error, Result};
use crate::products::{
    compact_from_function, eventual_support, filtered_is_compact, filtered_leq, Family, Filter, ProductElement,
};
use crate::tri::{Verdict, Witness};

/// A finitely described subset of the index set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum SubsetDescriptor {
    Explicit { members: BTreeSet<u64> },
    Cofinite { excluded: BTreeSet<u64> },
    Periodic { set: PeriodicSet },
    Complement { of: Box<SubsetDescriptor> },
    Union { left: Box<SubsetDescriptor>, right: Box<SubsetDescriptor> },
    Intersection { left: Box<SubsetDescriptor>, right: Box<SubsetDescriptor> },
}

impl SubsetDescriptor {
    pub fn explicit(members: impl IntoIterator<Item = u64>) -> Self {
        SubsetDescriptor::Explicit { members: members.into_iter().collect() }
    }

    pub fn residues(modulus: u64, residues: &[u64]) -> Self {
        SubsetDescriptor::Periodic { set: PeriodicSet::residues(modulus, residues) }
    }

    pub fn normalize(&self) -> PeriodicSet {
        match self {
            SubsetDescriptor::Explicit { members } => PeriodicSet::finite(members.iter().copied()),
            SubsetDescriptor::Cofinite { excluded } => PeriodicSet::finite(excluded.iter().copied()).complement(),
            SubsetDescriptor::Periodic { set } => set.clone(),
            SubsetDescriptor::Complement { of } => of.normalize().complement(),
            SubsetDescriptor::Union { left, right } => left.normalize().union(&right.normalize()),
            SubsetDescriptor::Intersection { left, right } => left.normalize().intersection(&right.normalize()),
        }
        .normalized()
    }

    pub fn contains(&self, j: u64) -> bool {
        self.normalize().contains(j)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleKind {
    Principal { j0: u64 },
    /// `r_k mod m_k` with `m_k | m_{k+1}` and `r_{k+1} ≡ r_k (mod m_k)`.
    ProfinitePoint { moduli: Vec<u64>, residues: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct UltrafilterOracle {
    pub index: Index,
    pub kind: OracleKind,
}

impl UltrafilterOracle {
    pub fn principal(index: Index, j0: u64) -> Result<Self> {
        if !index.contains(j0) {
            return Err(Error::Rejected(format!("point {j0} is outside the index set")));
        }
        Ok(UltrafilterOracle { index, kind: OracleKind::Principal { j0 } })
    }

    pub fn profinite(moduli: Vec<u64>, residues: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() || moduli.len() != residues.len() {
            return Err(Error::Rejected("one residue per modulus, at least one modulus".into()));
        }
        for (k, (&m, &r)) in moduli.iter().zip(&residues).enumerate() {
            if m == 0 || r >= m {
                return Err(Error::Rejected(format!("residue {r} is not below modulus {m}")));
            }
            if k > 0 {
                let (pm, pr) = (moduli[k - 1], residues[k - 1]);
                if m % pm != 0 || r % pm != pr {
                    return Err(Error::Rejected(format!("{r} mod {m} does not refine {pr} mod {pm}")));
                }
            }
        }
        Ok(UltrafilterOracle { index: Index::Naturals, kind: OracleKind::ProfinitePoint { moduli, residues } })
    }

    /// The point residue `r ≡ r_k (mod 2^k)` for `k ≤ depth`, with `r_k = residue mod 2^k`.
    pub fn dyadic(residue: u64, depth: u32) -> Result<Self> {
        let moduli: Vec<u64> = (1..=depth).map(|k| 1u64 << k).collect();
        let residues = moduli.iter().map(|m| residue % m).collect();
        Self::profinite(moduli, residues)
    }

    pub fn principal_point(&self) -> Option<u64> {
        match self.kind {
            OracleKind::Principal { j0 } => Some(j0),
            OracleKind::ProfinitePoint { .. } => None,
        }
    }

    /// Free ultrafilters here are countably incomplete: the nested sets
    /// `{ j ≥ k }` are members with empty intersection.
    pub fn countably_incomplete(&self) -> bool {
        self.principal_point().is_none()
    }

    /// The finest modulus of a profinite point: exactly the periods dividing it are decidable.
    pub fn finest_modulus(&self) -> Option<u64> {
        match &self.kind {
            OracleKind::Principal { .. } => None,
            OracleKind::ProfinitePoint { moduli, .. } => moduli.last().copied(),
        }
    }

    /// Membership of an eventually periodic set.
    pub fn contains(&self, set: &PeriodicSet) -> Result<bool> {
        match &self.kind {
            OracleKind::Principal { j0 } => Ok(set.contains(*j0)),
            OracleKind::ProfinitePoint { moduli, residues } => {
                let s = set.normalized();
                let p = s.period();
                match moduli.iter().position(|m| m % p == 0) {
                    Some(k) => Ok(s.pattern[(residues[k] % p) as usize]),
                    None => Err(Error::Undecidable(format!(
                        "period {p} divides none of the moduli {moduli:?}"
                    ))),
                }
            }
        }
    }

    pub fn check_index(&self, family: &Family) -> Result<()> {
        if family.index() != self.index {
            return Err(Error::FamilyMismatch("ultrafilter and family live on different index sets".into()));
        }
        Ok(())
    }
}

pub fn uf_contains(u: &UltrafilterOracle, d: &SubsetDescriptor) -> Result<bool> {
    u.contains(&d.normalize())
}

/// Every level of `x` has support outside `U`.
pub fn cu_membership(x: &ProductElement, u: &UltrafilterOracle) -> Result<Verdict> {
    u.check_index(x.family())?;
    let n = x.stable_point();
    if let Some(j0) = u.principal_point() {
        let c = x.family().component(j0);
        return Ok(Verdict::from_bool(x.value(n, j0) == c.zero(), || {
            Witness::at(format!("level {n} is nonzero at {j0}"), n, Some(j0))
        }));
    }
    let support = eventual_support(x)
        .ok_or_else(|| Error::Undecidable("opaque rules have no certified support".into()))?;
    Ok(Verdict::from_bool(!u.contains(&support)?, || {
        Witness::at(format!("the support of level {n} lies in the ultrafilter"), n, None)
    }))
}

/// `[x] ≤ [y]` in the ultraproduct: `∀n ∃m` with `{ j : x_n(j) ≤ y_m(j) } ∈ U`.
pub fn ultra_leq(x: &ProductElement, y: &ProductElement, u: &UltrafilterOracle, budget: u64) -> Result<Verdict> {
    u.check_index(x.family())?;
    filtered_leq(x, y, Filter::Ultra(u), budget)
}

/// Ideals of a product with an exact quotient order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ideal {
    Zero,
    C0,
    CU(UltrafilterOracle),
    Everything,
}

impl Ideal {
    pub fn filter(&self) -> Filter<'_> {
        match self {
            Ideal::Zero => Filter::All,
            Ideal::C0 => Filter::Cofinite,
            Ideal::CU(u) => Filter::Ultra(u),
            Ideal::Everything => Filter::Everything,
        }
    }
}

/// A quotient `∏_j S_j / I`; `[x] ≤ [y]` iff `∀n ∃m ∃z ∈ I: x_n ≤ y_m + z`.
#[derive(Clone, Debug)]
pub struct Quotient {
    family: Arc<Family>,
    ideal: Ideal,
}

impl Quotient {
    pub fn new(family: Arc<Family>, ideal: Ideal) -> Result<Self> {
        if let Ideal::CU(u) = &ideal {
            u.check_index(&family)?;
        }
        Ok(Quotient { family, ideal })
    }

    pub fn family(&self) -> &Arc<Family> {
        &self.family
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    pub fn leq(&self, x: &ProductElement, y: &ProductElement, budget: u64) -> Result<Verdict> {
        filtered_leq(x, y, self.ideal.filter(), budget)
    }

    pub fn equal(&self, x: &ProductElement, y: &ProductElement, budget: u64) -> Result<Verdict> {
        let a = self.leq(x, y, budget)?;
        if !a.is_true() {
            return Ok(a);
        }
        self.leq(y, x, budget)
    }

    pub fn is_compact(&self, x: &ProductElement, budget: u64) -> Result<Verdict> {
        filtered_is_compact(x, self.ideal.filter(), budget)
    }

    /// A compact preimage of a compact class: the stable level as a constant chain.
    pub fn compact_preimage(&self, x: &ProductElement, budget: u64) -> Result<Option<ProductElement>> {
        if !self.is_compact(x, budget)?.is_true() {
            return Ok(None);
        }
        // the stable level agrees with x off the growth set, which is not in the filter
        let level = x.stable_level()?;
        compact_from_function(self.family.clone(), level).map(Some)
    }

    /// Partition of the given representatives into classes; returns a class id per element.
    pub fn classify(&self, elems: &[ProductElement], budget: u64) -> Result<Vec<usize>> {
        let mut reps: Vec<usize> = Vec::new();
        let mut ids = Vec::with_capacity(elems.len());
        for (i, x) in elems.iter().enumerate() {
            let mut found = None;
            for (c, &r) in reps.iter().enumerate() {
                let v = self.equal(x, &elems[r], budget)?;
                if v.is_unknown() {
                    return Err(Error::Budget(format!("class of element {i} is undetermined")));
                }
                if v.is_true() {
                    found = Some(c);
                    break;
                }
            }
            ids.push(found.unwrap_or_else(|| {
                reps.push(i);
                reps.len() - 1
            }));
        }
        Ok(ids)
    }
}

/// The ultraproduct `∏_U S_j` as the quotient by `c_U`.
pub fn ultraproduct(family: Arc<Family>, u: UltrafilterOracle) -> Result<Quotient> {
    Quotient::new(family, Ideal::CU(u))
}

/// Compactness of `π_U(x)`, with a compact preimage when compact.
pub fn ultra_compacts(x: &ProductElement, u: &UltrafilterOracle, budget: u64) -> Result<(Verdict, Option<ProductElement>)> {
    let q = ultraproduct(x.family().clone(), u.clone())?;
    let v = q.is_compact(x, budget)?;
    let pre = if v.is_true() { q.compact_preimage(x, budget)? } else { None };
    Ok((v, pre))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::described::DescribedFunction;
    use crate::ordered::{Builtin, Ext};
    use crate::products::Component;

    fn odd_point() -> UltrafilterOracle {
        UltrafilterOracle::dyadic(1, 6).unwrap()
    }

    #[test]
    fn principal_answers_everything() {
        let u = UltrafilterOracle::principal(Index::Naturals, 3).unwrap();
        assert!(uf_contains(&u, &SubsetDescriptor::explicit([1, 3, 5])).unwrap());
    }

    #[test]
    fn profinite_point_uses_residues() {
        let u = odd_point();
        assert!(uf_contains(&u, &SubsetDescriptor::residues(2, &[1])).unwrap());
        assert!(!uf_contains(&u, &SubsetDescriptor::explicit(0..10)).unwrap());
        assert!(!uf_contains(&u, &SubsetDescriptor::residues(4, &[0, 2])).unwrap());
        assert!(matches!(
            uf_contains(&u, &SubsetDescriptor::residues(3, &[1])),
            Err(Error::Undecidable(_))
        ));
    }

    #[test]
    fn rejects_incompatible_residues() {
        assert!(UltrafilterOracle::profinite(vec![2, 4], vec![1, 2]).is_err());
        assert!(UltrafilterOracle::profinite(vec![2, 6], vec![1, 3]).is_ok());
    }

    #[test]
    fn two_point_supports_on_odds_and_evens() {
        let fam = Arc::new(Family::constant(Component::Builtin(Builtin::TwoPoint), Index::Naturals));
        let odd = DescribedFunction::periodic(vec![], vec![Ext::Fin(0), Ext::Inf]).unwrap();
        let even = DescribedFunction::periodic(vec![], vec![Ext::Inf, Ext::Fin(0)]).unwrap();
        let x = ProductElement::anchor(fam.clone(), odd).unwrap();
        let y = ProductElement::anchor(fam, even).unwrap();
        let u = odd_point();
        assert!(ultra_leq(&y, &x, &u, 10).unwrap().is_true());
        assert!(ultra_leq(&x, &y, &u, 10).unwrap().is_false());
        assert!(cu_membership(&y, &u).unwrap().is_true());
        assert!(cu_membership(&x, &u).unwrap().is_false());
    }
}
