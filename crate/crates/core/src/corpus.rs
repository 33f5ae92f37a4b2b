//! Small named structures used by the test suites, the acceptance run and
//! the example scripts.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::completions::iota;
use crate::described::{DescribedFunction, Index};
use crate::error::Result;
use crate::ordered::{check_cu_axioms, check_q_axioms, check_w_axioms, Builtin, Ext, Structure};
use crate::products::{cu_product_finite, tuple_function, Component, Family, ProductElement};
use crate::relation::Relation;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn table(labels: &[&str], add: impl Fn(usize, usize) -> usize) -> Structure {
    let n = labels.len();
    let t = (0..n * n).map(|k| add(k / n, k % n)).collect();
    Structure::algebraic(names(labels), 0, t).expect("well-formed table")
}

/// `{0, x, y, ∞}` with `y + y = y` and every other sum of nonzero elements `∞`.
/// Cu, but not O6: `y ≤ x + x` has no decomposition below `x` and `y`.
pub fn o6_example() -> Structure {
    table(&["0", "x", "y", "inf"], |a, b| match (a, b) {
        (0, b) => b,
        (a, 0) => a,
        (2, 2) => 2,
        _ => 3,
    })
}

/// `{0, …, k-1}` with `a + b = max(a, b)`.
pub fn max_chain(k: usize) -> Structure {
    let labels: Vec<String> = (0..k).map(|i| i.to_string()).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    table(&refs, |a, b| a.max(b))
}

/// A finite join-semilattice with bottom `0`, addition the join.
fn join_lattice(labels: &[&str], leq: &[(usize, usize)]) -> Structure {
    let n = labels.len();
    let rel = Relation::from_pairs(n, leq.iter().copied().chain((0..n).map(|i| (i, i))).chain((0..n).map(|i| (0, i))))
        .transitive_closure();
    let join = |a: usize, b: usize| {
        let ubs: Vec<usize> = (0..n).filter(|&u| rel.get(a, u) && rel.get(b, u)).collect();
        *ubs.iter().find(|&&u| ubs.iter().all(|&v| rel.get(u, v))).expect("join exists")
    };
    table(labels, join)
}

/// Generators whose pairwise sums are given; every longer sum is `∞`.
/// `sums[i][j]` indexes the listed products (`None` is `∞`).
fn nilpotent(gens: &[&str], products: &[&str], sums: &[Vec<Option<usize>>]) -> Structure {
    let mut labels = vec!["0"];
    labels.extend_from_slice(gens);
    labels.extend_from_slice(products);
    labels.push("inf");
    let g = gens.len();
    let inf = labels.len() - 1;
    table(&labels, |a, b| match (a, b) {
        (0, b) => b,
        (a, 0) => a,
        (a, b) if a <= g && b <= g => sums[a - 1][b - 1].map_or(inf, |p| 1 + g + p),
        _ => inf,
    })
}

fn builtin(b: Builtin) -> Structure {
    b.to_structure().expect("finite builtin")
}

fn product(a: &Structure, b: &Structure) -> Structure {
    cu_product_finite(&[a.clone(), b.clone()]).expect("Cu factors").0
}

/// At least twenty finite Cu-semigroups with at most six elements.
pub fn cu_corpus() -> Vec<(String, Structure)> {
    let two = builtin(Builtin::TwoPoint);
    let mut out: Vec<(String, Structure)> = vec![
        ("zero".into(), max_chain(1)),
        ("twopoint".into(), two.clone()),
    ];
    for k in 2..=5 {
        out.push((format!("truncnat{k}"), builtin(Builtin::TruncNat { k })));
    }
    for k in 3..=6 {
        out.push((format!("maxchain{k}"), max_chain(k)));
    }
    out.push(("diamond".into(), join_lattice(&["0", "a", "b", "1"], &[(1, 3), (2, 3)])));
    out.push(("m3".into(), join_lattice(&["0", "a", "b", "c", "1"], &[(1, 4), (2, 4), (3, 4)])));
    out.push(("n5".into(), join_lattice(&["0", "a", "b", "c", "1"], &[(1, 2), (2, 4), (3, 4)])));
    out.push(("twopoint^2".into(), product(&two, &two)));
    out.push(("twopoint*truncnat2".into(), product(&two, &builtin(Builtin::TruncNat { k: 2 }))));
    out.push(("maxchain3*twopoint".into(), product(&max_chain(3), &two)));
    out.push(("o6".into(), o6_example()));
    out.extend(perforated());
    out.push((
        "idem-nil5".into(),
        table(&["0", "e", "a", "b", "inf"], |x, y| match (x, y) {
            (0, y) => y,
            (x, 0) => x,
            (1, 1) => 1,
            (2, 2) => 3,
            _ => 4,
        }),
    ));
    out
}

/// Monoids with `2a = 2b` for incomparable `a, b`.
pub fn perforated() -> Vec<(String, Structure)> {
    vec![
        ("perf4".into(), nilpotent(&["a", "b"], &[], &[vec![None, None], vec![None, None]])),
        ("perf5".into(), nilpotent(&["a", "b"], &["c"], &[vec![Some(0), None], vec![None, Some(0)]])),
        ("perf6".into(), nilpotent(&["a", "b"], &["c", "d"], &[vec![Some(0), Some(1)], vec![Some(1), Some(0)]])),
    ]
}

/// Candidate auxiliary relations on a finite PoM: the order itself, `0 ≺ x`
/// only, and `x ≺ y` iff `x ≤ r ≤ y` for some `r` in a submonoid `R`.
fn aux_candidates(s: &Structure) -> Vec<Relation> {
    let n = s.len();
    let mut out = vec![s.leq_relation().clone(), Relation::from_fn(n, |x, _| x == s.zero())];
    let others: Vec<usize> = s.elements().filter(|&x| x != s.zero()).collect();
    for mask in 0u32..(1 << others.len()) {
        let mut r = vec![false; n];
        r[s.zero()] = true;
        for (i, &x) in others.iter().enumerate() {
            r[x] = mask & (1 << i) != 0;
        }
        let closed = s.elements().all(|a| s.elements().all(|b| !(r[a] && r[b]) || r[s.add(a, b)]));
        if closed {
            out.push(Relation::from_fn(n, |x, y| s.elements().any(|m| r[m] && s.leq(x, m) && s.leq(m, y))));
        }
    }
    let mut unique: Vec<Relation> = Vec::new();
    for rel in out {
        if !unique.contains(&rel) {
            unique.push(rel);
        }
    }
    unique
}

fn with_aux_variants(max_len: usize, keep: impl Fn(&Structure) -> bool) -> Vec<(String, Structure)> {
    let mut out = Vec::new();
    for (name, s) in cu_corpus().into_iter().filter(|(_, s)| s.len() <= max_len) {
        for (i, rel) in aux_candidates(&s).into_iter().enumerate() {
            let w = s.clone().with_aux(rel).expect("same carrier");
            if keep(&w) {
                out.push((format!("{name}/aux{i}"), w));
            }
        }
    }
    out
}

/// W-structures: corpus carriers with auxiliary relations passing W1, W3, W4.
pub fn w_corpus(max_len: usize) -> Vec<(String, Structure)> {
    with_aux_variants(max_len, |w| matches!(check_w_axioms(w), Ok(Ok(()))))
}

/// Q-structures: corpus carriers with additive auxiliary relations.
pub fn q_corpus(max_len: usize) -> Vec<(String, Structure)> {
    with_aux_variants(max_len, |q| check_q_axioms(q).is_ok())
}

/// Cu-structures in their W form `ι(S)`.
pub fn iota_corpus(max_len: usize) -> Vec<(String, Structure)> {
    cu_corpus().into_iter().filter(|(_, s)| s.len() <= max_len).map(|(n, s)| (n, iota(&s))).collect()
}

pub fn by_name(name: &str) -> Option<Structure> {
    cu_corpus().into_iter().find(|(n, _)| n == name).map(|(_, s)| s)
}

/// Every corpus entry is a Cu-semigroup.
pub fn verify() -> std::result::Result<(), String> {
    for (name, s) in cu_corpus() {
        check_cu_axioms(&s).map_err(|v| format!("{name}: {} at {:?}", v.law, v.labels(&s)))?;
    }
    Ok(())
}

/// Values a sampler draws for a component: the whole finite carrier, or a
/// few small values and `∞` in `ℕ̄`.
fn sample_values(c: &Component) -> Vec<Ext> {
    match c {
        Component::Builtin(Builtin::ExtNat) => vec![Ext::Fin(0), Ext::Fin(1), Ext::Fin(2), Ext::Fin(3), Ext::Fin(5), Ext::Inf],
        Component::Builtin(Builtin::TwoPoint) => vec![Ext::Fin(0), Ext::Inf],
        Component::Builtin(Builtin::TruncNat { k }) => (0..=*k).map(Ext::Fin).collect(),
        Component::Finite(s) => s.elements().map(|i| Ext::Fin(i as u64)).collect(),
    }
}

/// `n` exact-form elements of the product of `family`, reproducible from `seed`:
/// eventually periodic anchors aligned with the family's period, linear anchors
/// when every component is `ℕ̄`, and sums of two such. With a `modulus`, every
/// period divides it (when the family's period does), so a profinite oracle
/// with that finest modulus decides every support.
pub fn sample_elements(family: &Arc<Family>, n: usize, seed: u64, modulus: Option<u64>) -> Result<Vec<ProductElement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = family.shape().1;
    let lengths: Vec<u64> = match modulus {
        Some(m) if m % p == 0 => (1..=m / p).map(|r| r * p).filter(|l| m % l == 0 && *l <= 8 * p).collect(),
        _ => vec![p, 2 * p, 3 * p],
    };
    let pick = |rng: &mut ChaCha8Rng, j: u64| {
        let vals = sample_values(family.component(j));
        vals[rng.gen_range(0..vals.len())]
    };
    let one = |rng: &mut ChaCha8Rng| -> Result<ProductElement> {
        let f = match family.index() {
            Index::Finite { size } => tuple_function(&(0..size).map(|j| pick(rng, j)).collect::<Vec<_>>()),
            Index::Naturals if family.all_extnat() && rng.gen_bool(0.25) => {
                DescribedFunction::Linear { slope: rng.gen_range(1..=3), offset: rng.gen_range(0..=3), on: None }
            }
            Index::Naturals => {
                let (s, p) = family.shape();
                let start = s + p * rng.gen_range(0..=1);
                let len = lengths[rng.gen_range(0..lengths.len())];
                let prefix = (0..start).map(|j| pick(rng, j)).collect();
                let pattern = (start..start + len).map(|j| pick(rng, j)).collect();
                DescribedFunction::periodic(prefix, pattern)?
            }
        };
        ProductElement::anchor(family.clone(), f)
    };
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = one(&mut rng)?;
        out.push(if rng.gen_bool(0.2) { x.add(&one(&mut rng)?)? } else { x });
    }
    Ok(out)
}
