//! The γ-completion of W-semigroups, the τ-completion of Q-semigroups,
//! antisymmetrization, and exhaustive morphism enumeration.
//!
//! γ classes are canonical round downsets `D = { z : z ≺ x_k for some k }`
//! of `≺`-increasing sequences. On a finite carrier such a sequence ends in a
//! cycle of mutually related round elements, so every class is the lower
//! set `c^≺` of a round element `c`. τ classes are round elements modulo
//! mutual `≺`; a left-continuous increasing path on a finite carrier is
//! locally constant from the left, so its endpoint is round and determines
//! the class.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ordered::{
    check_cu_axioms, check_q_axioms, check_w_axioms, cofinal_round_below, Structure,
};
use crate::relation::Relation;

/// A map between finite carriers as an index table.
pub type Map = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphismKind {
    Pom,
    Q,
    W,
    Cu,
}

/// Enumeration cap on the number of raw maps `|b|^|a|`.
pub const DEFAULT_HOM_CAP: u128 = 10_000_000;

/// The structure with its way-below relation declared as auxiliary relation.
pub fn iota(s: &Structure) -> Structure {
    s.clone().without_aux().with_aux(s.way_below_matrix()).expect("same carrier")
}

pub fn compose(f: &[usize], g: &[usize]) -> Map {
    f.iter().map(|&x| g[x]).collect()
}

/// Whether `f: a → b` satisfies the morphism laws of `kind`.
pub fn is_morphism(a: &Structure, b: &Structure, f: &[usize], kind: MorphismKind) -> bool {
    if f.len() != a.len() || f.iter().any(|&v| v >= b.len()) || f[a.zero()] != b.zero() {
        return false;
    }
    for x in a.elements() {
        for y in a.elements() {
            if f[a.add(x, y)] != b.add(f[x], f[y]) {
                return false;
            }
        }
    }
    let pairs = |r: &Relation| r.pairs().collect::<Vec<_>>();
    match kind {
        MorphismKind::Pom => pairs(a.leq_relation()).iter().all(|&(x, y)| b.leq(f[x], f[y])),
        MorphismKind::Q => {
            pairs(a.leq_relation()).iter().all(|&(x, y)| b.leq(f[x], f[y]))
                && pairs(a.aux_relation()).iter().all(|&(x, y)| b.aux(f[x], f[y]))
        }
        MorphismKind::Cu => {
            let (wa, wb) = (a.way_below_matrix(), b.way_below_matrix());
            pairs(a.leq_relation()).iter().all(|&(x, y)| b.leq(f[x], f[y]))
                && pairs(&wa).iter().all(|&(x, y)| wb.get(f[x], f[y]))
        }
        MorphismKind::W => {
            pairs(a.aux_relation()).iter().all(|&(x, y)| b.aux(f[x], f[y])) && is_continuous(a, b, f)
        }
    }
}

/// `y ≺ f(x)` implies `y ≺ f(x')` for some `x' ≺ x`.
fn is_continuous(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    a.elements().all(|x| {
        b.elements()
            .filter(|&y| b.aux(y, f[x]))
            .all(|y| a.elements().any(|x1| a.aux(x1, x) && b.aux(y, f[x1])))
    })
}

/// All morphisms `a → b` of the given kind, by backtracking over partial maps.
pub fn hom_set(a: &Structure, b: &Structure, kind: MorphismKind, cap: u128) -> Result<Vec<Map>> {
    let raw = (b.len() as u128).checked_pow(a.len() as u32).unwrap_or(u128::MAX);
    if raw > cap {
        return Err(Error::Budget(format!(
            "{}^{} candidate maps exceed the cap {cap}",
            b.len(),
            a.len()
        )));
    }
    let n = a.len();
    let mut order: Vec<usize> = vec![a.zero()];
    order.extend(a.elements().filter(|&x| x != a.zero()));
    let mut f = vec![usize::MAX; n];
    let mut out = Vec::new();
    extend(a, b, kind, &order, 0, &mut f, &mut out);
    Ok(out)
}

fn extend(
    a: &Structure,
    b: &Structure,
    kind: MorphismKind,
    order: &[usize],
    depth: usize,
    f: &mut Vec<usize>,
    out: &mut Vec<Map>,
) {
    if depth == order.len() {
        if is_morphism(a, b, f, kind) {
            out.push(f.clone());
        }
        return;
    }
    let x = order[depth];
    let candidates: Vec<usize> = if x == a.zero() { vec![b.zero()] } else { b.elements().collect() };
    for v in candidates {
        f[x] = v;
        if consistent(a, b, kind, order, depth, f) {
            extend(a, b, kind, order, depth + 1, f, out);
        }
    }
    f[x] = usize::MAX;
}

/// Local laws between the newly assigned element and earlier ones.
fn consistent(a: &Structure, b: &Structure, kind: MorphismKind, order: &[usize], depth: usize, f: &[usize]) -> bool {
    let x = order[depth];
    let set = |y: usize| f[y] != usize::MAX;
    for &y in &order[..=depth] {
        let s = a.add(x, y);
        if set(s) && f[s] != b.add(f[x], f[y]) {
            return false;
        }
        for &z in &order[..=depth] {
            if a.add(y, z) == x && f[x] != b.add(f[y], f[z]) {
                return false;
            }
        }
        let ordered = !matches!(kind, MorphismKind::W);
        if ordered
            && (a.leq(x, y) && !b.leq(f[x], f[y]) || a.leq(y, x) && !b.leq(f[y], f[x])) {
                return false;
            }
        if matches!(kind, MorphismKind::W | MorphismKind::Q)
            && (a.aux(x, y) && !b.aux(f[x], f[y]) || a.aux(y, x) && !b.aux(f[y], f[x]))
        {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug)]
pub struct GammaCompletion {
    pub structure: Structure,
    /// Class downsets as membership rows over the base carrier.
    pub downsets: Vec<Vec<bool>>,
    /// The unit map `α_S`.
    pub alpha: Map,
}

/// γ(S) for a finite W-structure, with the unit `α_S(x) = [x^≺]`.
pub fn gamma_complete(s: &Structure) -> Result<GammaCompletion> {
    if let Err(v) = check_w_axioms(s)? {
        return Err(Error::Rejected(format!("W axioms fail: {} at {:?}", v.law, v.labels(s))));
    }
    let aux = s.aux_relation();
    let column = |c: usize| -> Vec<bool> { s.elements().map(|z| aux.get(z, c)).collect() };
    let mut downsets: Vec<Vec<bool>> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for c in s.elements().filter(|&c| aux.get(c, c)) {
        let d = column(c);
        if !downsets.contains(&d) {
            downsets.push(d);
            reps.push(c);
        }
    }
    let class_of = |d: &Vec<bool>| downsets.iter().position(|e| e == d);
    let m = downsets.len();
    let mut add = Vec::with_capacity(m * m);
    for &c in &reps {
        for &d in &reps {
            let sum = column(s.add(c, d));
            add.push(class_of(&sum).ok_or_else(|| Error::Internal("sum of round classes is not a class".into()))?);
        }
    }
    let leq = Relation::from_fn(m, |i, j| downsets[i].iter().zip(&downsets[j]).all(|(a, b)| !a || *b));
    let zero = class_of(&column(s.zero())).ok_or_else(|| Error::Internal("zero class missing".into()))?;
    let labels = reps.iter().map(|&c| format!("[{}]", s.label(c))).collect();
    let structure = Structure::new(labels, zero, add, leq, None)?;
    let alpha = s
        .elements()
        .map(|x| {
            let c = cofinal_round_below(s, x).ok_or_else(|| Error::Internal("W1 witness missing".into()))?;
            class_of(&column(c)).ok_or_else(|| Error::Internal("unit value missing".into()))
        })
        .collect::<Result<Map>>()?;
    Ok(GammaCompletion { structure, downsets, alpha })
}

#[derive(Clone, Debug)]
pub struct TauCompletion {
    pub structure: Structure,
    /// The endpoint map `φ_S` as the representative of each class.
    pub endpoint: Map,
}

/// τ(S) for a finite Q-structure: round elements modulo mutual `≺`, ordered by `≺`.
pub fn tau_complete(s: &Structure) -> Result<TauCompletion> {
    if let Err(v) = check_q_axioms(s) {
        return Err(Error::Rejected(format!("Q axioms fail: {} at {:?}", v.law, v.labels(s))));
    }
    let round: Vec<usize> = s.elements().filter(|&r| s.aux(r, r)).collect();
    let mut reps: Vec<usize> = Vec::new();
    for &r in &round {
        if !reps.iter().any(|&q| s.aux(q, r) && s.aux(r, q)) {
            reps.push(r);
        }
    }
    let class_of = |x: usize| reps.iter().position(|&q| s.aux(q, x) && s.aux(x, q));
    let m = reps.len();
    let mut add = Vec::with_capacity(m * m);
    for &a in &reps {
        for &b in &reps {
            add.push(class_of(s.add(a, b)).ok_or_else(|| Error::Internal("sum of round elements is not round".into()))?);
        }
    }
    let leq = Relation::from_fn(m, |i, j| s.aux(reps[i], reps[j]));
    let zero = class_of(s.zero()).ok_or_else(|| Error::Internal("zero is not round".into()))?;
    let labels = reps.iter().map(|&r| s.label(r).to_string()).collect();
    let structure = Structure::new(labels, zero, add, leq, None)?;
    Ok(TauCompletion { structure, endpoint: reps })
}

#[derive(Clone, Debug)]
pub struct Antisymmetrization {
    pub structure: Structure,
    pub quotient: Map,
}

/// The functor G: quotient by `x^≺ = y^≺`, with `x ≺₊ y` iff `x ≤ y' ≺ y` for some `y'`.
pub fn antisymmetrize(s: &Structure) -> Result<Antisymmetrization> {
    if let Err(v) = check_w_axioms(s)? {
        return Err(Error::Rejected(format!("W axioms fail: {} at {:?}", v.law, v.labels(s))));
    }
    let aux = s.aux_relation();
    let pre = |x: usize, y: usize| aux.column_subset(x, y);
    let mut reps: Vec<usize> = Vec::new();
    let mut quotient = vec![0; s.len()];
    for x in s.elements() {
        match reps.iter().position(|&r| pre(r, x) && pre(x, r)) {
            Some(i) => quotient[x] = i,
            None => {
                quotient[x] = reps.len();
                reps.push(x);
            }
        }
    }
    let m = reps.len();
    let mut add = vec![usize::MAX; m * m];
    for x in s.elements() {
        for y in s.elements() {
            let k = quotient[x] * m + quotient[y];
            let v = quotient[s.add(x, y)];
            if add[k] != usize::MAX && add[k] != v {
                return Err(Error::Rejected("addition does not respect the preorder classes".into()));
            }
            add[k] = v;
        }
    }
    let leq = Relation::from_fn(m, |i, j| pre(reps[i], reps[j]));
    let plus = Relation::from_fn(m, |i, j| {
        s.elements().any(|y1| pre(reps[i], y1) && aux.get(y1, reps[j]))
    });
    let labels = reps.iter().map(|&r| format!("[{}]", s.label(r))).collect();
    let structure = Structure::new(labels, quotient[s.zero()], add, leq, Some(plus))?;
    Ok(Antisymmetrization { structure, quotient })
}

/// Whether `f` is an isomorphism of the given kind (bijective, inverse also a morphism).
pub fn is_isomorphism(a: &Structure, b: &Structure, f: &[usize], kind: MorphismKind) -> bool {
    if a.len() != b.len() || !is_morphism(a, b, f, kind) {
        return false;
    }
    let mut inv = vec![usize::MAX; b.len()];
    for (x, &y) in f.iter().enumerate() {
        if inv[y] != usize::MAX {
            return false;
        }
        inv[y] = x;
    }
    is_morphism(b, a, &inv, kind)
}

/// Some isomorphism `a → b` of the given kind, by exhaustive search.
pub fn find_isomorphism(a: &Structure, b: &Structure, kind: MorphismKind) -> Option<Map> {
    if a.len() != b.len() {
        return None;
    }
    hom_set(a, b, kind, u128::MAX)
        .ok()?
        .into_iter()
        .find(|f| is_isomorphism(a, b, f, kind))
}

/// Cu-structures pass Cu axioms; W-structures built by `iota` pass W axioms.
pub fn is_cu(s: &Structure) -> bool {
    check_cu_axioms(s).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordered::Builtin;

    fn two() -> Structure {
        Builtin::TwoPoint.to_structure().unwrap()
    }

    #[test]
    fn endomorphisms_of_two_point() {
        let homs = hom_set(&two(), &two(), MorphismKind::Cu, DEFAULT_HOM_CAP).unwrap();
        assert_eq!(homs, vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn maps_into_zero_are_unique() {
        let zero = Builtin::TruncNat { k: 0 }.to_structure().unwrap();
        let t = Builtin::TruncNat { k: 3 }.to_structure().unwrap();
        for kind in [MorphismKind::Pom, MorphismKind::Cu, MorphismKind::Q] {
            assert_eq!(hom_set(&t, &zero, kind, DEFAULT_HOM_CAP).unwrap().len(), 1);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let t = Builtin::TruncNat { k: 9 }.to_structure().unwrap();
        assert!(matches!(hom_set(&t, &t, MorphismKind::Pom, 1000), Err(Error::Budget(_))));
    }

    #[test]
    fn gamma_of_zero_only_relation_is_trivial() {
        let s = Builtin::TruncNat { k: 3 }.to_structure().unwrap();
        let s = s.with_aux(Relation::from_fn(4, |x, _| x == 0)).unwrap();
        let g = gamma_complete(&s).unwrap();
        assert_eq!(g.structure.len(), 1);
        assert_eq!(g.alpha, vec![0; 4]);
    }

    #[test]
    fn gamma_and_tau_are_vacuous_on_cu() {
        let s = Builtin::TruncNat { k: 3 }.to_structure().unwrap();
        let g = gamma_complete(&iota(&s)).unwrap();
        assert!(is_isomorphism(&s, &g.structure, &g.alpha, MorphismKind::Cu));
        let t = tau_complete(&iota(&s)).unwrap();
        assert!(is_isomorphism(&t.structure, &s, &t.endpoint, MorphismKind::Cu));
    }

    #[test]
    fn tau_drops_non_round_elements() {
        let s = Builtin::TruncNat { k: 2 }.to_structure().unwrap();
        let aux = Relation::from_fn(3, |x, y| x == 0 || (y == 2 && x == 2) || (x == 1 && y == 2));
        let s = s.with_aux(aux).unwrap();
        let t = tau_complete(&s).unwrap();
        assert_eq!(t.structure.len(), 2);
        assert_eq!(t.endpoint, vec![0, 2]);
    }

    #[test]
    fn antisymmetrization_collapses_zero_only_relation() {
        let s = Builtin::TruncNat { k: 3 }.to_structure().unwrap();
        let s = s.with_aux(Relation::from_fn(4, |x, _| x == 0)).unwrap();
        assert_eq!(antisymmetrize(&s).unwrap().structure.len(), 1);
        let one = Builtin::TruncNat { k: 0 }.to_structure().unwrap();
        assert_eq!(antisymmetrize(&iota(&one)).unwrap().structure.len(), 1);
    }

    #[test]
    fn antisymmetrization_fixes_cu() {
        let s = Builtin::TruncNat { k: 3 }.to_structure().unwrap();
        let a = antisymmetrize(&iota(&s)).unwrap();
        assert!(is_isomorphism(&s, &a.structure.clone().without_aux(), &a.quotient, MorphismKind::Pom));
        assert_eq!(a.structure.aux_relation(), s.leq_relation());
    }
}
