//! Positively ordered monoids with auxiliary relations.
//!
//! A [`Structure`] is a finite carrier with an addition table, a partial
//! order and an optional auxiliary relation. Finite Cu-semigroups carry no
//! auxiliary matrix: on a finite carrier every increasing sequence is
//! eventually constant, so way-below coincides with the order. W- and
//! Q-structures store the relation explicitly because it may be strictly
//! finer. [`Builtin`] covers the countably-based semigroups `ℕ̄`, `{0,∞}`
//! and the saturating chains `{0..k}`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::Relation;

/// A value in `ℕ ∪ {∞}`; builtin carriers and product coordinates use it.
/// Serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ext {
    Fin(u64),
    Inf,
}

impl Ext {
    pub fn add(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => a.checked_add(b).map_or(Ext::Inf, Ext::Fin),
            _ => Ext::Inf,
        }
    }

    pub fn mul(self, k: u64) -> Ext {
        match self {
            Ext::Fin(a) => a.checked_mul(k).map_or(Ext::Inf, Ext::Fin),
            Ext::Inf if k == 0 => Ext::Fin(0),
            Ext::Inf => Ext::Inf,
        }
    }

    pub fn min(self, other: Ext) -> Ext {
        std::cmp::min(self, other)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Ext::Fin(a) => Some(a),
            Ext::Inf => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Ext::Fin(0)
    }
}

impl Serialize for Ext {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ext::Fin(a) => ser.serialize_u64(*a),
            Ext::Inf => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(a) => Ok(Ext::Fin(a)),
            Raw::Text(s) if s == "inf" => Ok(Ext::Inf),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(a) => write!(f, "{a}"),
            Ext::Inf => write!(f, "inf"),
        }
    }
}

/// Laws checked by the axiom checkers; a failing law names its witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Commutativity,
    Associativity,
    ZeroNeutral,
    Reflexivity,
    Antisymmetry,
    Transitivity,
    TranslationInvariance,
    ZeroMinimal,
    AuxBelowOrder,
    AuxStable,
    AuxAdditive,
    AuxZero,
    O1,
    O2,
    O3,
    O4,
    DeclaredAux,
    W1,
    W3,
    W4,
    O6,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        write!(f, "{}", s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub law: Law,
    pub elements: Vec<usize>,
}

impl Violation {
    fn new(law: Law, elements: &[usize]) -> Self {
        Violation { law, elements: elements.to_vec() }
    }

    pub fn labels(&self, s: &Structure) -> Vec<String> {
        self.elements.iter().map(|&i| s.label(i).to_string()).collect()
    }
}

/// `Ok(())` when every law holds, otherwise the first violation found.
pub type Report = std::result::Result<(), Violation>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    labels: Vec<String>,
    zero: usize,
    add: Vec<usize>,
    leq: Relation,
    aux: Option<Relation>,
}

impl Structure {
    /// Validates shape only: totality, index ranges, distinct labels.
    pub fn new(
        labels: Vec<String>,
        zero: usize,
        add: Vec<usize>,
        leq: Relation,
        aux: Option<Relation>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Malformed("empty carrier".into()));
        }
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.clone(), i).is_some() {
                return Err(Error::Malformed(format!("duplicate label {l}")));
            }
        }
        if zero >= n {
            return Err(Error::Malformed("zero index out of range".into()));
        }
        if add.len() != n * n {
            return Err(Error::Malformed(format!(
                "addition table has {} entries, expected {}",
                add.len(),
                n * n
            )));
        }
        if let Some(&bad) = add.iter().find(|&&v| v >= n) {
            return Err(Error::Malformed(format!("addition value {bad} out of range")));
        }
        if leq.len() != n || aux.as_ref().is_some_and(|a| a.len() != n) {
            return Err(Error::Malformed("relation size does not match carrier".into()));
        }
        Ok(Structure { labels, zero, add, leq, aux })
    }

    /// Builds a structure ordered algebraically: `a ≤ b` iff `a + c = b` for some `c`.
    pub fn algebraic(labels: Vec<String>, zero: usize, add: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if add.len() != n * n {
            return Err(Error::Malformed("addition table is not total".into()));
        }
        let leq = Relation::from_fn(n, |a, b| (0..n).any(|c| add[a * n + c] == b));
        Self::new(labels, zero, add, leq, None)
    }

    /// Builds a structure from a closure on indices.
    pub fn from_fn(
        labels: Vec<String>,
        zero: usize,
        add: impl Fn(usize, usize) -> usize,
        leq: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let n = labels.len();
        let table = (0..n * n).map(|k| add(k / n, k % n)).collect();
        Self::new(labels, zero, table, Relation::from_fn(n, leq), None)
    }

    pub fn with_aux(mut self, aux: Relation) -> Result<Self> {
        if aux.len() != self.len() {
            return Err(Error::Malformed("relation size does not match carrier".into()));
        }
        self.aux = Some(aux);
        Ok(self)
    }

    pub fn without_aux(mut self) -> Self {
        self.aux = None;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.len() + b]
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq.get(a, b)
    }

    pub fn leq_relation(&self) -> &Relation {
        &self.leq
    }

    pub fn declared_aux(&self) -> Option<&Relation> {
        self.aux.as_ref()
    }

    pub fn has_aux(&self) -> bool {
        self.aux.is_some()
    }

    /// The auxiliary relation; without a declared one it is the order (way-below on a finite Cu carrier).
    #[inline]
    pub fn aux(&self, a: usize, b: usize) -> bool {
        match &self.aux {
            Some(r) => r.get(a, b),
            None => self.leq.get(a, b),
        }
    }

    pub fn aux_relation(&self) -> &Relation {
        self.aux.as_ref().unwrap_or(&self.leq)
    }

    pub fn add_table(&self) -> &[usize] {
        &self.add
    }

    /// `k·a`.
    pub fn mul(&self, a: usize, k: u64) -> usize {
        let mut acc = self.zero;
        for _ in 0..k {
            acc = self.add(acc, a);
        }
        acc
    }

    /// `∞·a`, the eventual value of `k·a`; multiples increase, so they stabilise.
    pub fn mul_inf(&self, a: usize) -> usize {
        let mut acc = a;
        for _ in 0..=self.len() {
            let next = self.add(acc, a);
            if next == acc {
                return acc;
            }
            acc = next;
        }
        acc
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// Way-below computed from its definition: `x ≪ y` iff every increasing
    /// sequence whose supremum dominates `y` has a term above `x`. Such a
    /// sequence is eventually constant at its supremum `s`, so the condition
    /// reads `∀s ≥ y: x ≤ s`.
    pub fn way_below_matrix(&self) -> Relation {
        let n = self.len();
        Relation::from_fn(n, |x, y| (0..n).all(|s| !self.leq(y, s) || self.leq(x, s)))
    }

    pub fn way_below(&self, x: usize, y: usize) -> bool {
        self.elements().all(|s| !self.leq(y, s) || self.leq(x, s))
    }

    /// Restriction to a subset closed under addition containing zero.
    pub fn substructure(&self, keep: &[usize]) -> Result<(Structure, Vec<usize>)> {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let zero = *pos
            .get(&self.zero)
            .ok_or_else(|| Error::Malformed("subset misses zero".into()))?;
        let m = keep.len();
        let mut add = Vec::with_capacity(m * m);
        for &a in keep {
            for &b in keep {
                let s = self.add(a, b);
                add.push(*pos.get(&s).ok_or_else(|| {
                    Error::Malformed(format!("{} + {} leaves the subset", self.label(a), self.label(b)))
                })?);
            }
        }
        let leq = Relation::from_fn(m, |i, j| self.leq(keep[i], keep[j]));
        let aux = self.aux.as_ref().map(|r| Relation::from_fn(m, |i, j| r.get(keep[i], keep[j])));
        let labels = keep.iter().map(|&k| self.labels[k].clone()).collect();
        Ok((Structure::new(labels, zero, add, leq, aux)?, keep.to_vec()))
    }

    /// Relabelled copy with the same tables.
    pub fn relabel(&self, labels: Vec<String>) -> Result<Structure> {
        Structure::new(labels, self.zero, self.add.clone(), self.leq.clone(), self.aux.clone())
    }
}

/// JSON form: labels, zero index, row-major addition table, relations as bitset rows.
#[derive(Serialize, Deserialize)]
struct StructureJson {
    elements: Vec<String>,
    zero: usize,
    add: Vec<Vec<usize>>,
    leq: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aux: Option<Vec<String>>,
}

impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.len();
        StructureJson {
            elements: self.labels.clone(),
            zero: self.zero,
            add: self.add.chunks(n).map(<[usize]>::to_vec).collect(),
            leq: self.leq.to_bitset_rows(),
            aux: self.aux.as_ref().map(Relation::to_bitset_rows),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = StructureJson::deserialize(de)?;
        let rel = |rows: &[String]| Relation::from_bitset_rows(rows).ok_or_else(|| D::Error::custom("bad bitset rows"));
        let leq = rel(&j.leq)?;
        let aux = j.aux.as_deref().map(rel).transpose()?;
        Structure::new(j.elements, j.zero, j.add.concat(), leq, aux).map_err(D::Error::custom)
    }
}

/// Checks commutative-monoid laws and the translation-invariant partial order with zero minimal.
pub fn check_pom_axioms(s: &Structure) -> Report {
    let n = s.len();
    let z = s.zero();
    for a in 0..n {
        if s.add(z, a) != a || s.add(a, z) != a {
            return Err(Violation::new(Law::ZeroNeutral, &[a]));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if s.add(a, b) != s.add(b, a) {
                return Err(Violation::new(Law::Commutativity, &[a, b]));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            let ab = s.add(a, b);
            for c in 0..n {
                if s.add(ab, c) != s.add(a, s.add(b, c)) {
                    return Err(Violation::new(Law::Associativity, &[a, b, c]));
                }
            }
        }
    }
    for a in 0..n {
        if !s.leq(a, a) {
            return Err(Violation::new(Law::Reflexivity, &[a]));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && s.leq(a, b) && s.leq(b, a) {
                return Err(Violation::new(Law::Antisymmetry, &[a, b]));
            }
        }
    }
    for a in 0..n {
        for b in s.leq_relation().successors(a) {
            for c in s.leq_relation().successors(b) {
                if !s.leq(a, c) {
                    return Err(Violation::new(Law::Transitivity, &[a, b, c]));
                }
            }
        }
    }
    for a in 0..n {
        for b in s.leq_relation().successors(a) {
            for c in 0..n {
                if !s.leq(s.add(a, c), s.add(b, c)) {
                    return Err(Violation::new(Law::TranslationInvariance, &[a, b, c]));
                }
            }
        }
    }
    for a in 0..n {
        if !s.leq(z, a) {
            return Err(Violation::new(Law::ZeroMinimal, &[a]));
        }
    }
    Ok(())
}

/// Laws of an additive auxiliary relation, checked against the declared relation.
pub fn check_aux_laws(s: &Structure) -> Report {
    let n = s.len();
    let aux = s.aux_relation();
    for (x, y) in aux.pairs() {
        if !s.leq(x, y) {
            return Err(Violation::new(Law::AuxBelowOrder, &[x, y]));
        }
    }
    for (x, y) in aux.pairs() {
        for w in s.leq_relation().predecessors(x) {
            for z in s.leq_relation().successors(y) {
                if !aux.get(w, z) {
                    return Err(Violation::new(Law::AuxStable, &[w, x, y, z]));
                }
            }
        }
    }
    for x in 0..n {
        if !aux.get(s.zero(), x) {
            return Err(Violation::new(Law::AuxZero, &[x]));
        }
    }
    check_additive(s, aux, Law::AuxAdditive)
}

fn check_additive(s: &Structure, rel: &Relation, law: Law) -> Report {
    let pairs: Vec<(usize, usize)> = rel.pairs().collect();
    for &(x, y) in &pairs {
        for &(u, v) in &pairs {
            if !rel.get(s.add(x, u), s.add(y, v)) {
                return Err(Violation::new(law, &[x, y, u, v]));
            }
        }
    }
    Ok(())
}

/// Least upper bound by exhaustive search.
fn least_upper_bound(s: &Structure, items: &[usize]) -> Option<usize> {
    let ubs: Vec<usize> = s.elements().filter(|&u| items.iter().all(|&i| s.leq(i, u))).collect();
    ubs.iter().copied().find(|&u| ubs.iter().all(|&v| s.leq(u, v)))
}

/// O1–O4 on a finite carrier, plus agreement of a declared auxiliary relation with `≪`.
///
/// Increasing sequences are eventually constant, so O1 asks for least upper
/// bounds of increasing pairs and O4 for additivity of those bounds.
pub fn check_cu_axioms(s: &Structure) -> Report {
    check_pom_axioms(s)?;
    let n = s.len();
    let mut sup = vec![usize::MAX; n * n];
    for a in 0..n {
        for b in s.leq_relation().successors(a) {
            match least_upper_bound(s, &[a, b]) {
                Some(u) => sup[a * n + b] = u,
                None => return Err(Violation::new(Law::O1, &[a, b])),
            }
        }
    }
    let wb = s.way_below_matrix();
    for x in 0..n {
        if !wb.get(x, x) {
            return Err(Violation::new(Law::O2, &[x]));
        }
    }
    for x in 0..n {
        if !wb.get(s.zero(), x) {
            return Err(Violation::new(Law::O3, &[s.zero(), x]));
        }
    }
    check_additive(s, &wb, Law::O3)?;
    for a in 0..n {
        for b in s.leq_relation().successors(a) {
            for c in 0..n {
                for d in s.leq_relation().successors(c) {
                    let lhs = s.add(sup[a * n + b], sup[c * n + d]);
                    let (ac, bd) = (s.add(a, c), s.add(b, d));
                    if least_upper_bound(s, &[ac, bd]) != Some(lhs) {
                        return Err(Violation::new(Law::O4, &[a, b, c, d]));
                    }
                }
            }
        }
    }
    if let Some(aux) = s.declared_aux() {
        if let Some((x, y)) = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .find(|&(x, y)| aux.get(x, y) != wb.get(x, y))
        {
            return Err(Violation::new(Law::DeclaredAux, &[x, y]));
        }
    }
    Ok(())
}

/// PoM laws, an additive auxiliary relation, and O1/O4 on the finite carrier.
pub fn check_q_axioms(s: &Structure) -> Report {
    check_pom_axioms(s)?;
    check_aux_laws(s)?;
    let n = s.len();
    for a in 0..n {
        for b in s.leq_relation().successors(a) {
            if least_upper_bound(s, &[a, b]).is_none() {
                return Err(Violation::new(Law::O1, &[a, b]));
            }
        }
    }
    Ok(())
}

/// Fails with [`Error::NotTransitive`] when the relation is not transitive.
pub fn require_transitive(s: &Structure) -> Result<()> {
    let aux = s.aux_relation();
    for (a, b) in aux.pairs() {
        for c in aux.successors(b) {
            if !aux.get(a, c) {
                return Err(Error::NotTransitive(
                    s.label(a).into(),
                    s.label(b).into(),
                    s.label(c).into(),
                ));
            }
        }
    }
    Ok(())
}

/// `x^≺ = { y : y ≺ x }` as a bit row.
pub fn lower_set(s: &Structure, x: usize) -> Vec<bool> {
    s.elements().map(|y| s.aux(y, x)).collect()
}

/// A round element `c ≺ c` with `c ≺ x` and `c^≺ = x^≺`.
///
/// A `≺`-increasing sequence in a finite carrier ends in a cycle whose
/// members are mutually related and round; it is cofinal in `x^≺` exactly
/// when such a cycle member has the same lower set as `x`.
pub fn cofinal_round_below(s: &Structure, x: usize) -> Option<usize> {
    let aux = s.aux_relation();
    aux.predecessors(x)
        .find(|&c| aux.get(c, c) && aux.column_subset(x, c) && aux.column_subset(c, x))
}

/// W1, W3 and W4 for the declared auxiliary relation; the order is ignored.
pub fn check_w_axioms(s: &Structure) -> Result<Report> {
    if !s.has_aux() {
        return Err(Error::Malformed("W-structure needs an auxiliary relation".into()));
    }
    require_transitive(s)?;
    let n = s.len();
    let aux = s.aux_relation();
    for x in 0..n {
        if !aux.get(s.zero(), x) {
            return Ok(Err(Violation::new(Law::AuxZero, &[x])));
        }
    }
    for x in 0..n {
        if cofinal_round_below(s, x).is_none() {
            return Ok(Err(Violation::new(Law::W1, &[x])));
        }
    }
    if let Err(v) = check_additive(s, aux, Law::W3) {
        return Ok(Err(v));
    }
    for y in 0..n {
        for z in 0..n {
            let yz = s.add(y, z);
            for x in aux.predecessors(yz) {
                let found = aux
                    .predecessors(y)
                    .any(|y1| aux.predecessors(z).any(|z1| aux.get(x, s.add(y1, z1))));
                if !found {
                    return Ok(Err(Violation::new(Law::W4, &[x, y, z])));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// O6: `x' ≪ x ≤ y + z` gives `e ≤ x,y` and `f ≤ x,z` with `x' ≤ e + f`.
///
/// Witness `[x, y, z]` with `x' = x` implied. A failure for `x'` is also a
/// failure for `x' = x` (anything above `x` is above `x'`), and `x ≪ x` holds
/// on finite carriers, so the search runs over `x' = x` only.
pub fn check_o6(s: &Structure) -> Report {
    let n = s.len();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if !s.leq(x, s.add(y, z)) {
                    continue;
                }
                let es: Vec<usize> = (0..n).filter(|&e| s.leq(e, x) && s.leq(e, y)).collect();
                let fs: Vec<usize> = (0..n).filter(|&f| s.leq(f, x) && s.leq(f, z)).collect();
                let ok = es.iter().any(|&e| fs.iter().any(|&f| s.leq(x, s.add(e, f))));
                if !ok {
                    return Err(Violation::new(Law::O6, &[x, y, z]));
                }
            }
        }
    }
    Ok(())
}

/// Compact elements: `x ≪ x` for Cu-structures, `x ≺ x` when an auxiliary relation is declared.
pub fn compacts(s: &Structure) -> Result<(Structure, Vec<usize>)> {
    let keep: Vec<usize> = match s.declared_aux() {
        Some(aux) => s.elements().filter(|&x| aux.get(x, x)).collect(),
        None => s.elements().filter(|&x| s.way_below(x, x)).collect(),
    };
    s.substructure(&keep)
}

/// The builtin countably-based algebraic semigroups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Builtin {
    ExtNat,
    TwoPoint,
    TruncNat { k: u64 },
}

impl Builtin {
    pub fn name(&self) -> String {
        match self {
            Builtin::ExtNat => "extnat".into(),
            Builtin::TwoPoint => "twopoint".into(),
            Builtin::TruncNat { k } => format!("truncnat {k}"),
        }
    }

    pub fn contains(&self, x: Ext) -> bool {
        match (self, x) {
            (Builtin::ExtNat, _) => true,
            (Builtin::TwoPoint, v) => v == Ext::Fin(0) || v == Ext::Inf,
            (Builtin::TruncNat { k }, Ext::Fin(v)) => v <= *k,
            (Builtin::TruncNat { .. }, Ext::Inf) => false,
        }
    }

    pub fn add(&self, a: Ext, b: Ext) -> Ext {
        match self {
            Builtin::ExtNat => a.add(b),
            Builtin::TwoPoint => {
                if a == Ext::Inf || b == Ext::Inf {
                    Ext::Inf
                } else {
                    Ext::Fin(0)
                }
            }
            Builtin::TruncNat { k } => a.add(b).min(Ext::Fin(*k)),
        }
    }

    pub fn leq(&self, a: Ext, b: Ext) -> bool {
        a <= b
    }

    pub fn way_below(&self, a: Ext, b: Ext) -> bool {
        match self {
            Builtin::ExtNat => a != Ext::Inf && a <= b,
            _ => a <= b,
        }
    }

    pub fn is_compact(&self, a: Ext) -> bool {
        self.way_below(a, a)
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Builtin::ExtNat)
    }

    /// The `n`-th compact approximant: compact elements are their own
    /// approximants, `∞` in `ℕ̄` is approximated by `n`.
    pub fn approx(&self, a: Ext, n: u64) -> Ext {
        if self.is_compact(a) {
            a
        } else {
            Ext::Fin(n)
        }
    }

    /// A chain of compacts with supremum `a`.
    pub fn compact_chain(&self, a: Ext) -> ChainDescriptor {
        if self.is_compact(a) {
            ChainDescriptor { levels: vec![a], tail: Tail::ConstantCompact }
        } else {
            ChainDescriptor { levels: vec![Ext::Fin(0)], tail: Tail::Linear { slope: 1, offset: 0 } }
        }
    }

    /// Elements of a finite builtin in increasing order.
    pub fn finite_elements(&self) -> Option<Vec<Ext>> {
        match self {
            Builtin::ExtNat => None,
            Builtin::TwoPoint => Some(vec![Ext::Fin(0), Ext::Inf]),
            Builtin::TruncNat { k } => Some((0..=*k).map(Ext::Fin).collect()),
        }
    }

    /// The finite table form, labelled by `0..k` or `0, inf`.
    pub fn to_structure(&self) -> Option<Structure> {
        let elems = self.finite_elements()?;
        let labels = elems.iter().map(|e| e.to_string()).collect();
        let pos = |e: Ext| elems.iter().position(|&x| x == e).unwrap();
        Structure::from_fn(
            labels,
            0,
            |a, b| pos(self.add(elems[a], elems[b])),
            |a, b| self.leq(elems[a], elems[b]),
        )
        .ok()
    }

    /// `k·a`.
    pub fn mul(&self, a: Ext, k: u64) -> Ext {
        match self {
            Builtin::ExtNat => a.mul(k),
            _ => (0..k).fold(Ext::Fin(0), |acc, _| self.add(acc, a)),
        }
    }

    /// `∞·a`.
    pub fn mul_inf(&self, a: Ext) -> Ext {
        match self {
            Builtin::ExtNat | Builtin::TwoPoint => {
                if a.is_zero() {
                    a
                } else {
                    Ext::Inf
                }
            }
            Builtin::TruncNat { k } => {
                if a.is_zero() {
                    a
                } else {
                    Ext::Fin(*k)
                }
            }
        }
    }
}

/// The tail of an increasing chain after its explicit levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    /// The last level repeats; it must be compact.
    ConstantCompact,
    /// Level `L + n` is `slope·n + offset` for `L` explicit levels.
    Linear { slope: u64, offset: u64 },
}

/// An increasing chain in a builtin, given by finitely many levels and a tail rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDescriptor {
    pub levels: Vec<Ext>,
    pub tail: Tail,
}

impl ChainDescriptor {
    pub fn level(&self, n: u64) -> Ext {
        let l = self.levels.len() as u64;
        if n < l {
            return self.levels[n as usize];
        }
        match self.tail {
            Tail::ConstantCompact => *self.levels.last().unwrap_or(&Ext::Fin(0)),
            Tail::Linear { slope, offset } => Ext::Fin(offset).add(Ext::Fin(n - l).mul(slope)),
        }
    }

    /// Consecutive levels are way-below related; a constant tail ends at a compact.
    pub fn validate(&self, b: Builtin) -> Result<()> {
        for w in self.levels.windows(2) {
            if !b.way_below(w[0], w[1]) {
                return Err(Error::Rejected(format!("levels {} and {} are not way-below related", w[0], w[1])));
            }
        }
        match self.tail {
            Tail::ConstantCompact => {
                let last = *self.levels.last().unwrap_or(&Ext::Fin(0));
                if !b.is_compact(last) {
                    return Err(Error::Rejected(format!("constant tail at non-compact {last}")));
                }
            }
            Tail::Linear { offset, .. } => {
                if b != Builtin::ExtNat {
                    return Err(Error::Rejected("linear tails live in extnat".into()));
                }
                if let Some(&last) = self.levels.last() {
                    if !b.way_below(last, Ext::Fin(offset)) {
                        return Err(Error::Rejected("tail starts below the last level".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn supremum(&self) -> Ext {
        match self.tail {
            Tail::ConstantCompact => *self.levels.last().unwrap_or(&Ext::Fin(0)),
            Tail::Linear { slope: 0, offset } => Ext::Fin(offset),
            Tail::Linear { .. } => Ext::Inf,
        }
    }
}
