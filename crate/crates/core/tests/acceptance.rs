//! Acceptance run: one PASS/FAIL line per criterion, each against a pinned
//! wall-clock limit. Oracles here are brute force and independent of the
//! library's decision procedures.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cusp::colimits::{w_coequalizer, WMorphismPair};
use cusp::completions::{gamma_complete, tau_complete};
use cusp::corpus::{cu_corpus, iota_corpus, o6_example, q_corpus, sample_elements, w_corpus};
use cusp::described::{DescribedFunction, Index, PeriodicSet};
use cusp::ordered::{check_cu_axioms, check_o6, compacts, Builtin, Ext, Structure};
use cusp::products::{
    cu_product_finite, filtered_is_compact, finite_tuples, product_leq, tuple_function, Component, Family, Filter,
    ProductElement,
};
use cusp::scales::{
    comparability_check, has_cn, is_simple, mvn_semigroup, scaled_product, scaled_ultraproduct,
    ultrapower_simplicity_verdict, AlgebraModel, Comparability, ScaledComponent, ScaledCu, ScaledFamily,
};
use cusp::ultra::{ultra_leq, ultraproduct, UltrafilterOracle};

const BUDGET: u64 = 10_000;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

// ---------------------------------------------------------------------------
// Brute-force morphism oracles on finite carriers.

type Map = Vec<usize>;

fn then(f: &[usize], g: &[usize]) -> Map {
    f.iter().map(|&x| g[x]).collect()
}

fn additive(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    f[a.zero()] == b.zero() && a.elements().all(|x| a.elements().all(|y| f[a.add(x, y)] == b.add(f[x], f[y])))
}

fn monotone(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    a.elements().all(|x| a.elements().all(|y| !a.leq(x, y) || b.leq(f[x], f[y])))
}

fn aux_preserving(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    a.elements().all(|x| a.elements().all(|y| !a.aux(x, y) || b.aux(f[x], f[y])))
}

/// On finite Cu carriers `≪` is `≤`, so Cu-morphisms are the additive monotone maps.
fn is_cu_hom(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    additive(a, b, f) && monotone(a, b, f)
}

fn is_q_hom(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    additive(a, b, f) && monotone(a, b, f) && aux_preserving(a, b, f)
}

/// Additive, `≺`-preserving, and continuous: `y ≺ f(x)` gives `x' ≺ x` with `y ≺ f(x')`.
fn is_w_hom(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    additive(a, b, f)
        && aux_preserving(a, b, f)
        && a.elements().all(|x| {
            b.elements()
                .filter(|&y| b.aux(y, f[x]))
                .all(|y| a.elements().any(|x1| a.aux(x1, x) && b.aux(y, f[x1])))
        })
}

/// Every map `a → b` fixing zero, filtered by `keep`.
fn homs(a: &Structure, b: &Structure, keep: impl Fn(&Structure, &Structure, &[usize]) -> bool) -> Vec<Map> {
    let free: Vec<usize> = a.elements().filter(|&x| x != a.zero()).collect();
    let mut f = vec![b.zero(); a.len()];
    let mut digits = vec![0usize; free.len()];
    let mut out = Vec::new();
    loop {
        for (d, &x) in digits.iter().zip(&free) {
            f[x] = *d;
        }
        if keep(a, b, &f) {
            out.push(f.clone());
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                return out;
            }
            digits[k] += 1;
            if digits[k] < b.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

fn small(v: Vec<(String, Structure)>, max: usize) -> Vec<(String, Structure)> {
    v.into_iter().filter(|(_, s)| s.len() <= max).collect()
}

// ---------------------------------------------------------------------------

fn finite_product_law() -> Outcome {
    let corpus = cu_corpus();
    ensure!(corpus.len() >= 20 && corpus.iter().all(|(_, s)| s.len() <= 6), "corpus shape");
    let tests: Vec<Structure> = ["twopoint", "truncnat2", "maxchain3"]
        .iter()
        .map(|n| corpus.iter().find(|(m, _)| m == n).unwrap().1.clone())
        .collect();
    let mut cones = 0usize;
    for (na, a) in &corpus {
        for (nb, b) in &corpus {
            let (p, proj) = ok(cu_product_finite(&[a.clone(), b.clone()]))?;
            let pair = |k: usize| (proj[0][k], proj[1][k]);
            let pairs: BTreeSet<(usize, usize)> = p.elements().map(pair).collect();
            ensure!(p.len() == a.len() * b.len() && pairs.len() == p.len(), "{na} x {nb}: carrier");
            ensure!(pair(p.zero()) == (a.zero(), b.zero()), "{na} x {nb}: zero");
            for x in p.elements() {
                for y in p.elements() {
                    let ((x0, x1), (y0, y1)) = (pair(x), pair(y));
                    ensure!(pair(p.add(x, y)) == (a.add(x0, y0), b.add(x1, y1)), "{na} x {nb}: sum");
                    ensure!(p.leq(x, y) == (a.leq(x0, y0) && b.leq(x1, y1)), "{na} x {nb}: order");
                }
            }
            for t in &tests {
                let into_p = homs(t, &p, is_cu_hom);
                let cones_ab: BTreeSet<(Map, Map)> = homs(t, a, is_cu_hom)
                    .into_iter()
                    .flat_map(|f| homs(t, b, is_cu_hom).into_iter().map(move |g| (f.clone(), g)))
                    .collect();
                let induced: BTreeSet<(Map, Map)> =
                    into_p.iter().map(|h| (then(h, &proj[0]), then(h, &proj[1]))).collect();
                ensure!(
                    induced.len() == into_p.len() && induced == cones_ab,
                    "{na} x {nb}: cones from a {}-element test object",
                    t.len()
                );
                cones += cones_ab.len();
            }
        }
    }
    Ok(format!("{} pairs, {cones} cones factor uniquely", corpus.len() * corpus.len()))
}

fn adjunctions() -> Outcome {
    let cu = small(cu_corpus(), 4);
    let ws: Vec<_> = small(w_corpus(4), 4).into_iter().chain(small(iota_corpus(4), 4)).collect();
    let qs: Vec<_> = small(q_corpus(4), 4).into_iter().chain(small(iota_corpus(4), 4)).collect();
    let (mut reflections, mut coreflections) = (0, 0);
    for (ns, s) in &ws {
        let g = ok(gamma_complete(s))?;
        ensure!(is_w_hom(s, &g.structure, &g.alpha), "{ns}: unit is not a W-morphism");
        for (nt, t) in &cu {
            // Hom_Cu(γS, T) → Hom_W(S, ιT), h ↦ h ∘ α_S.
            let upstairs = homs(&g.structure, t, is_cu_hom);
            let image: BTreeSet<Map> = upstairs.iter().map(|h| then(&g.alpha, h)).collect();
            let downstairs: BTreeSet<Map> = homs(s, t, is_w_hom).into_iter().collect();
            ensure!(image.len() == upstairs.len() && image == downstairs, "γ: {ns} against {nt}");
            reflections += 1;
        }
    }
    for (ns, s) in &qs {
        let tau = ok(tau_complete(s))?;
        ensure!(is_q_hom(&tau.structure, s, &tau.endpoint), "{ns}: counit is not a Q-morphism");
        for (nt, t) in &cu {
            // Hom_Cu(T, τS) → Hom_Q(ιT, S), h ↦ φ_S ∘ h.
            let upstairs = homs(t, &tau.structure, is_cu_hom);
            let image: BTreeSet<Map> = upstairs.iter().map(|h| then(h, &tau.endpoint)).collect();
            let downstairs: BTreeSet<Map> = homs(t, s, is_q_hom).into_iter().collect();
            ensure!(image.len() == upstairs.len() && image == downstairs, "τ: {nt} against {ns}");
            coreflections += 1;
        }
    }
    ensure!(reflections >= 20 && coreflections >= 20, "too few pairs: {reflections}, {coreflections}");
    Ok(format!("{reflections} reflection and {coreflections} coreflection pairs"))
}

fn coequalizers() -> Outcome {
    let sources: Vec<_> = small(w_corpus(3), 3).into_iter().chain(small(iota_corpus(3), 3)).collect();
    let targets: Vec<_> = small(w_corpus(4), 4).into_iter().chain(small(iota_corpus(4), 4)).collect();
    let tests: Vec<_> = small(w_corpus(3), 3).into_iter().chain(small(iota_corpus(3), 3)).collect();
    let mut pairs = Vec::new();
    'outer: for (ns, s) in &sources {
        for (nt, t) in &targets {
            let hs = homs(s, t, is_w_hom);
            if let Some(psi) = hs.iter().skip(1).find(|h| **h != hs[0]) {
                pairs.push((format!("{ns} => {nt}"), ok(WMorphismPair::new(s.clone(), t.clone(), hs[0].clone(), psi.clone()))?));
                if pairs.len() == 16 {
                    break 'outer;
                }
            }
        }
    }
    ensure!(pairs.len() >= 10, "only {} parallel pairs", pairs.len());
    let mut factored = 0;
    for (name, p) in &pairs {
        let (c, eta) = ok(w_coequalizer(p))?;
        ensure!(is_w_hom(&p.target, &c, &eta), "{name}: η is not a W-morphism");
        ensure!(then(&p.phi, &eta) == then(&p.psi, &eta), "{name}: η does not coequalize");
        for (nx, x) in &tests {
            for k in homs(&p.target, x, is_w_hom) {
                if then(&p.phi, &k) != then(&p.psi, &k) {
                    continue;
                }
                let through = homs(&c, x, is_w_hom).into_iter().filter(|u| then(&eta, u) == k).count();
                ensure!(through == 1, "{name}: {through} factorizations into {nx} of {k:?}");
                factored += 1;
            }
        }
    }
    Ok(format!("{} pairs, {factored} coequalizing maps factor uniquely", pairs.len()))
}

fn compacts_of_products() -> Outcome {
    let base = small(cu_corpus(), 4);
    let mut families = 0;
    for size in 1..=3usize {
        let mut idx = vec![0usize; size];
        loop {
            let fam: Vec<Structure> = idx.iter().map(|&i| base[i].1.clone()).collect();
            let (p, proj) = ok(cu_product_finite(&fam))?;
            let (c, incl) = ok(compacts(&p))?;
            let parts: Vec<(Structure, Vec<usize>)> = fam.iter().map(compacts).collect::<Result<_, _>>().map_err(|e| format!("{e:?}"))?;
            // The explicit map c ↦ (position of π_i(c) among the compacts of S_i).
            let phi = |k: usize| -> Option<Vec<usize>> {
                (0..size).map(|i| parts[i].1.iter().position(|&e| e == proj[i][incl[k]])).collect()
            };
            let image: Vec<Vec<usize>> = c.elements().map(phi).collect::<Option<_>>().ok_or("a compact projects to a non-compact")?;
            let distinct: BTreeSet<&Vec<usize>> = image.iter().collect();
            let expected: usize = parts.iter().map(|(s, _)| s.len()).product();
            ensure!(distinct.len() == c.len() && c.len() == expected, "{idx:?}: not a bijection");
            for x in c.elements() {
                for y in c.elements() {
                    let pw_leq = (0..size).all(|i| parts[i].0.leq(image[x][i], image[y][i]));
                    ensure!(c.leq(x, y) == pw_leq, "{idx:?}: order");
                    let sum: Vec<usize> = (0..size).map(|i| parts[i].0.add(image[x][i], image[y][i])).collect();
                    ensure!(image[c.add(x, y)] == sum, "{idx:?}: sum");
                }
            }
            families += 1;
            // Multisets of corpus indices.
            let mut k = size;
            while k > 0 && idx[k - 1] == base.len() - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for i in k..size {
                idx[i] = idx[k - 1];
            }
        }
    }
    // Families with ℕ̄ factors: compact exactly when every coordinate is finite.
    let vals = [Ext::Fin(0), Ext::Fin(1), Ext::Fin(3), Ext::Inf];
    let mut mixed = 0;
    for size in 1..=3u64 {
        let fam = Arc::new(Family::constant(Component::Builtin(Builtin::ExtNat), Index::Finite { size }));
        let tuples: Vec<Vec<Ext>> = (0..vals.len().pow(size as u32))
            .map(|mut k| (0..size).map(|_| { let v = vals[k % vals.len()]; k /= vals.len(); v }).collect())
            .collect();
        for t in &tuples {
            let x = ok(ProductElement::anchor(fam.clone(), tuple_function(t)))?;
            let v = ok(filtered_is_compact(&x, Filter::All, BUDGET))?;
            ensure!(v.is_true() == t.iter().all(|e| *e != Ext::Inf), "{t:?}: compactness");
            mixed += 1;
        }
    }
    Ok(format!("{families} finite families, {mixed} tuples over ℕ̄"))
}

fn cuprod_example() -> Outcome {
    let models = ok(ScaledFamily::models(&[AlgebraModel::MatrixAlgebra(1)], Index::Naturals))?;
    let fam = models.family().clone();
    let u = ok(ProductElement::anchor(fam.clone(), DescribedFunction::constant(Ext::Fin(1))))?;
    let g = ok(ProductElement::anchor(fam, DescribedFunction::identity()))?;
    for n in 1..=50 {
        let v = ok(product_leq(&g, &u.scale(n), BUDGET))?;
        let w = v.witness.as_ref().ok_or(format!("n = {n}: no witness"))?;
        ensure!(v.is_false() && w.index == Some(n + 1), "n = {n}: {v:?}");
    }
    let p = scaled_product(models);
    ensure!(ok(p.carrier_contains(&g, BUDGET))?.is_false(), "g is in the carrier");
    ensure!(ok(p.carrier_contains(&u, BUDGET))?.is_true(), "u is outside the carrier");
    Ok("witness index n+1 for n = 1..50; g outside the carrier".into())
}

fn two_point_oracle() -> Result<UltrafilterOracle, String> {
    ok(UltrafilterOracle::profinite(vec![2, 4, 8, 16, 32], vec![1, 1, 1, 1, 1]))
}

/// A far-out index in the oracle's residue class: beyond every sampled prefix.
const FAR: u64 = 1 + 32 * 1000;

fn prod_e0() -> Outcome {
    let u = two_point_oracle()?;
    let fam = Arc::new(Family::constant(Component::Builtin(Builtin::TwoPoint), Index::Naturals));
    let xs = ok(sample_elements(&fam, 100, 11, u.finest_modulus()))?;
    let q = ok(ultraproduct(fam, u.clone()))?;
    let ids = ok(q.classify(&xs, BUDGET))?;
    let classes: BTreeSet<usize> = ids.iter().copied().collect();
    ensure!(classes.len() == 2, "{} classes", classes.len());
    // The support of an exact element of {0,∞}-tuples lies in U iff it holds on the residue class.
    let nonzero = |x: &ProductElement| !x.value(x.stable_point() + 8, FAR).is_zero();
    for (i, x) in xs.iter().enumerate() {
        for (k, y) in xs.iter().enumerate() {
            ensure!((ids[i] == ids[k]) == (nonzero(x) == nonzero(y)), "classes of {i} and {k}");
            if nonzero(x) && nonzero(y) {
                let a = ok(ultra_leq(x, y, &u, BUDGET))?;
                let b = ok(ultra_leq(y, x, &u, BUDGET))?;
                ensure!(a.is_true() && b.is_true(), "{i} and {k} are not mutually below");
            }
        }
    }
    let sizes: Vec<usize> = classes.iter().map(|c| ids.iter().filter(|&&i| i == *c).count()).collect();
    Ok(format!("100 elements, class sizes {sizes:?}"))
}

/// Order in the inductive limit of `∏_F S_j` over `F ∈ U`: some `F` in `U` dominates.
fn limit_leq(x: &[Ext], y: &[Ext], fam: &Family, members: &[Vec<u64>]) -> bool {
    members.iter().any(|f| f.iter().all(|&j| fam.component(j).leq(x[j as usize], y[j as usize])))
}

fn ultra_rule() -> Outcome {
    let base = small(cu_corpus(), 4);
    let mut checked = 0;
    for w in base.windows(3).step_by(2) {
        let fam = Family::list(w.iter().map(|(_, s)| Component::finite(s.clone())).collect::<Result<_, _>>().map_err(|e| format!("{e:?}"))?);
        let size = 3u64;
        let fam_arc = Arc::new(fam.clone());
        let tuples = ok(finite_tuples(&fam))?;
        let elems: Vec<ProductElement> =
            tuples.iter().map(|t| ProductElement::anchor(fam_arc.clone(), tuple_function(t))).collect::<Result<_, _>>().map_err(|e| format!("{e:?}"))?;
        for j0 in 0..size {
            let u = ok(UltrafilterOracle::principal(Index::Finite { size }, j0))?;
            let members: Vec<Vec<u64>> = (0u32..1 << size)
                .filter(|m| m & (1 << j0) != 0)
                .map(|m| (0..size).filter(|j| m & (1 << j) != 0).collect())
                .collect();
            for (a, x) in tuples.iter().zip(&elems) {
                for (b, y) in tuples.iter().zip(&elems) {
                    let v = ok(ultra_leq(x, y, &u, BUDGET))?;
                    ensure!(!v.is_unknown() && v.is_true() == limit_leq(a, b, &fam, &members), "{a:?} vs {b:?} at {j0}");
                    checked += 1;
                }
            }
        }
    }
    // Principal points of ℕ: {j0} is the least member of U, so the limit is ℕ̄ at j0.
    let fam = Arc::new(Family::constant(Component::Builtin(Builtin::ExtNat), Index::Naturals));
    let xs = ok(sample_elements(&fam, 40, 5, None))?;
    let sup = |x: &ProductElement, j: u64| {
        let n = x.stable_point() + 1000;
        let (a, b) = (x.value(n, j), x.value(2 * n, j));
        if a == b { a } else { Ext::Inf }
    };
    for j0 in [0u64, 3, 7] {
        let u = ok(UltrafilterOracle::principal(Index::Naturals, j0))?;
        for x in &xs {
            for y in &xs {
                let v = ok(ultra_leq(x, y, &u, BUDGET))?;
                ensure!(!v.is_unknown() && v.is_true() == (sup(x, j0) <= sup(y, j0)), "{} vs {} at {j0}", x.describe(), y.describe());
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} comparisons"))
}

fn mvn() -> Outcome {
    let models = ok(ScaledFamily::models(&[AlgebraModel::MatrixAlgebra(2)], Index::Naturals))?;
    let fam = models.family().clone();
    let anchor = |f: DescribedFunction| ProductElement::anchor(fam.clone(), f);
    let fin = Ext::Fin;
    let cases: Vec<(&str, DescribedFunction, bool)> = vec![
        ("2", DescribedFunction::constant(fin(2)), true),
        ("0", DescribedFunction::constant(fin(0)), true),
        ("7", DescribedFunction::constant(fin(7)), true),
        ("j", DescribedFunction::identity(), false),
        ("inf", DescribedFunction::constant(Ext::Inf), false),
        ("periodic 1,4", ok(DescribedFunction::periodic(vec![fin(9)], vec![fin(1), fin(4)]))?, true),
        ("periodic 0,inf", ok(DescribedFunction::periodic(vec![], vec![fin(0), Ext::Inf]))?, false),
        ("3j+1 on evens", DescribedFunction::Linear { slope: 3, offset: 1, on: Some(PeriodicSet::residues(2, &[0])) }, false),
        ("5 except 2 at 4", DescribedFunction::FiniteSupport { default: fin(5), overrides: [(4, fin(2))].into() }, true),
        ("inf at 3", DescribedFunction::FiniteSupport { default: fin(1), overrides: [(3, Ext::Inf)].into() }, false),
    ];
    let s = ok(mvn_semigroup(&models, None))?;
    for (name, f, bounded_compact) in &cases {
        let v = ok(s.contains(&ok(anchor(f.clone()))?, BUDGET))?;
        ensure!(!v.is_unknown() && v.is_true() == *bounded_compact, "product: {name} gives {:?}", v.value);
    }
    let two = ok(anchor(DescribedFunction::constant(fin(2))))?;
    ensure!(ok(s.bound(&two, 10, BUDGET))? == Some(1), "f = 2 is not below the unit");
    // Principal ultrafilter at 3: the class of x is x(3) ∈ ℕ.
    let j0 = 3;
    let p = ok(mvn_semigroup(&models, Some(ok(UltrafilterOracle::principal(Index::Naturals, j0))?)))?;
    let u = ok(UltrafilterOracle::principal(Index::Naturals, j0))?;
    let mut elems = Vec::new();
    for (name, f, _) in &cases {
        let x = ok(anchor(f.clone()))?;
        let v = ok(p.contains(&x, BUDGET))?;
        ensure!(v.is_true() == (f.eval(j0) != Ext::Inf), "principal: {name}");
        if v.is_true() {
            elems.push((f.eval(j0), x));
        }
    }
    for (a, x) in &elems {
        for (b, y) in &elems {
            ensure!(ok(ultra_leq(x, y, &u, BUDGET))?.is_true() == (a <= b), "principal order {a} vs {b}");
        }
    }
    Ok(format!("{} tuples; j rejected, 2 accepted; principal classes are x(3)", cases.len()))
}

fn finite_scaled(name: &str, s: Structure, members: Vec<bool>) -> Result<ScaledComponent, String> {
    Ok(ok(ScaledComponent::finite(s, members))?.with_model(AlgebraModel::Custom(name.into())))
}

fn simplicity() -> Outcome {
    let m = |k| AlgebraModel::MatrixAlgebra(k);
    let spi = AlgebraModel::SimplePurelyInfinite;
    let by_name = |n: &str| cu_corpus().into_iter().find(|(m, _)| m == n).unwrap().1;
    let tn3 = finite_scaled("tn3", by_name("truncnat3"), vec![true, true, false, false])?;
    let tn3_full = finite_scaled("tn3-full", by_name("truncnat3"), vec![true; 4])?;
    let two = finite_scaled("two", by_name("twopoint"), vec![true, true])?;
    let square = finite_scaled("square", by_name("twopoint^2"), vec![true; 4])?;
    let chain = finite_scaled("chain", by_name("maxchain3"), vec![true; 3])?;
    let n = Index::Naturals;
    let families: Vec<(&str, ScaledFamily)> = vec![
        ("M2", ok(ScaledFamily::models(&[m(2)], n))?),
        ("spi", ok(ScaledFamily::models(std::slice::from_ref(&spi), n))?),
        ("M1,M2", ok(ScaledFamily::models(&[m(1), m(2)], n))?),
        ("M1,spi", ok(ScaledFamily::models(&[m(1), spi.clone()], n))?),
        ("spi,M3", ok(ScaledFamily::models(&[spi.clone(), m(3)], n))?),
        ("M1,M2,M3", ok(ScaledFamily::models(&[m(1), m(2), m(3)], n))?),
        ("M1..M6", ok(ScaledFamily::models(&[m(1), m(2), m(3), m(4), m(5), m(6)], n))?),
        ("tn3", ScaledFamily::constant(tn3.clone(), n)),
        ("tn3-full", ScaledFamily::constant(tn3_full.clone(), n)),
        ("square", ScaledFamily::constant(square.clone(), n)),
        ("two,square", ok(ScaledFamily::periodic(vec![], vec![two.clone(), square.clone()]))?),
        ("square,two", ok(ScaledFamily::periodic(vec![], vec![square.clone(), two.clone()]))?),
        ("[square] tn3,chain,two", ok(ScaledFamily::periodic(vec![square.clone()], vec![tn3, chain.clone(), two]))?),
        ("chain", ScaledFamily::constant(chain, n)),
        ("[M1,spi] tn3-full,square,M2", ok(ScaledFamily::periodic(
            vec![ok(m(1).scaled())?, ok(spi.scaled())?],
            vec![tn3_full, square, ok(m(2).scaled())?],
        ))?),
    ];
    // Residue 5 modulo 6: odd, and 2 modulo 3.
    let u = ok(UltrafilterOracle::profinite(vec![2, 6, 12, 24], vec![1, 5, 5, 5]))?;
    let (mut simple, mut not_simple) = (0, 0);
    for (name, f) in &families {
        let v = ok(ultrapower_simplicity_verdict(f, &u, BUDGET))?;
        let ultra = ok(scaled_ultraproduct(f.clone(), u.clone()))?;
        let direct = ok(is_simple(&ultra, BUDGET))?;
        ensure!(!direct.is_unknown(), "{name}: is_simple undecided");
        ensure!(v.agrees && direct.is_true() == v.simple, "{name}: clause {:?} says {}, is_simple {:?}, C_n {:?}", v.clause, v.simple, direct.value, v.cn_check);
        if let Some(k) = v.n {
            ensure!(ok(has_cn(&ultra, k, BUDGET))?.is_true(), "{name}: C_{k} fails");
        }
        if v.simple { simple += 1 } else { not_simple += 1 }
    }
    ensure!(families.len() >= 12 && not_simple > 0 && simple > 0, "coverage");
    Ok(format!("{} families: {simple} simple, {not_simple} not simple", families.len()))
}

fn o6() -> Outcome {
    let s = o6_example();
    ensure!(s.len() == 4, "carrier");
    let v = check_o6(&s).err().ok_or("O6 holds")?;
    ensure!(v.labels(&s) == ["y", "x", "x"], "witness {:?}", v.labels(&s));
    ensure!(check_cu_axioms(&s).is_ok(), "Cu axioms fail");
    let scaled = ScaledCu::Component(ok(ScaledComponent::finite(s.clone(), vec![true, true, false, false]))?);
    ensure!(ok(has_cn(&scaled, 1, BUDGET))?.is_true(), "C_1 fails");
    let simple = ok(is_simple(&scaled, BUDGET))?;
    let w = simple.witness.ok_or("is_simple passes")?;
    ensure!(w.elements == ["inf", "y"], "simplicity witness {:?}", w.elements);
    let (inf, y) = (s.index_of("inf").unwrap(), s.index_of("y").unwrap());
    ensure!(!s.leq(inf, s.mul_inf(y)), "∞ ≤ ∞·y");
    Ok("O6 fails at (y, x, x); ∞ ≰ ∞·y".into())
}

/// Brute-force comparability with twice the multipliers the library uses.
fn comparable_oracle(s: &Structure, kind: Comparability) -> bool {
    let top = 2 * s.len() as u64 + 2;
    s.elements().all(|x| {
        s.elements().all(|y| {
            s.leq(x, y)
                || match kind {
                    Comparability::Unperforated => (1..=top).all(|n| !s.leq(s.mul(x, n), s.mul(y, n))),
                    Comparability::Almost => (1..=top).all(|n| !s.leq(s.mul(x, n + 1), s.mul(y, n))),
                    Comparability::Near => (top - 1..=top).any(|n| !s.leq(s.mul(x, n), s.mul(y, n))),
                }
        })
    })
}

fn comparability() -> Outcome {
    let corpus = cu_corpus();
    let kinds = [Comparability::Unperforated, Comparability::Almost, Comparability::Near];
    let mut preserved = 0;
    for (i, (na, a)) in corpus.iter().enumerate() {
        for (nb, b) in &corpus[i..] {
            let (p, _) = ok(cu_product_finite(&[a.clone(), b.clone()]))?;
            for kind in kinds {
                let pv = comparability_check(&p, kind);
                ensure!(pv.is_true() == comparable_oracle(&p, kind), "{na} x {nb}: {} disagrees with the oracle", kind.name());
                if comparability_check(a, kind).is_true() && comparability_check(b, kind).is_true() {
                    ensure!(pv.is_true(), "{na} x {nb} loses {}", kind.name());
                    preserved += 1;
                }
            }
        }
    }
    let mut perforated = Vec::new();
    for (name, s) in corpus.iter().filter(|(_, s)| (5..=6).contains(&s.len())) {
        let v = comparability_check(s, Comparability::Unperforated);
        ensure!(v.is_true() == comparable_oracle(s, Comparability::Unperforated), "{name}: oracle");
        if let Some(w) = v.witness {
            let (x, y) = (s.index_of(&w.elements[0]).unwrap(), s.index_of(&w.elements[1]).unwrap());
            let n: u64 = w.elements[2].parse().unwrap();
            ensure!(!s.leq(x, y) && s.leq(s.mul(x, n), s.mul(y, n)), "{name}: bad witness {:?}", w.elements);
            perforated.push(format!("{name} at {:?}", w.elements));
        }
    }
    ensure!(!perforated.is_empty(), "no perforated 5-6 element instance");
    Ok(format!("{preserved} preserved checks; perforated: {}", perforated.join(", ")))
}

fn total_order() -> Outcome {
    let u = ok(UltrafilterOracle::profinite(vec![2, 6, 12, 24], vec![1, 5, 5, 5]))?;
    let fam = Arc::new(Family::constant(Component::Builtin(Builtin::ExtNat), Index::Naturals));
    let xs = ok(sample_elements(&fam, 400, 17, u.finest_modulus()))?;
    let mut strict = 0;
    for pair in xs.chunks(2) {
        let a = ok(ultra_leq(&pair[0], &pair[1], &u, BUDGET))?;
        let b = ok(ultra_leq(&pair[1], &pair[0], &u, BUDGET))?;
        ensure!(!a.is_unknown() && !b.is_unknown(), "undecided: {} vs {}", pair[0].describe(), pair[1].describe());
        ensure!(a.is_true() || b.is_true(), "incomparable: {} vs {}", pair[0].describe(), pair[1].describe());
        if a.is_true() != b.is_true() {
            strict += 1;
        }
    }
    Ok(format!("200 pairs comparable, {strict} strictly"))
}

/// `≺`-increasing sequences on a finite carrier as lassos: a simple path
/// `x_1 ≺ … ≺ x_m` closed by `x_m ≺ x_i`; returned unrolled far enough that
/// every element visited infinitely often appears past the prefix.
fn lassos(s: &Structure) -> Vec<(Vec<usize>, Vec<usize>)> {
    fn grow(s: &Structure, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        let last = *path.last().unwrap();
        for (i, &x) in path.iter().enumerate() {
            if s.aux(last, x) {
                out.push((path[..i].to_vec(), path[i..].to_vec()));
            }
        }
        let next: Vec<usize> = s.elements().filter(|&y| s.aux(last, y) && !path.contains(&y)).collect();
        for y in next {
            path.push(y);
            grow(s, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for x in s.elements() {
        grow(s, &mut vec![x], &mut out);
    }
    out
}

fn unroll(l: &(Vec<usize>, Vec<usize>), len: usize) -> Vec<usize> {
    l.0.iter().chain(l.1.iter().cycle()).take(len).copied().collect()
}

fn pointwise_sum(s: &Structure, a: &(Vec<usize>, Vec<usize>), b: &(Vec<usize>, Vec<usize>)) -> (Vec<usize>, Vec<usize>) {
    let pre = a.0.len().max(b.0.len());
    let period = lcm(a.1.len(), b.1.len());
    let (ua, ub) = (unroll(a, pre + period), unroll(b, pre + period));
    let sum: Vec<usize> = ua.iter().zip(&ub).map(|(&x, &y)| s.add(x, y)).collect();
    (sum[..pre].to_vec(), sum[pre..].to_vec())
}

fn lcm(a: usize, b: usize) -> usize {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn downset(s: &Structure, l: &(Vec<usize>, Vec<usize>)) -> Vec<bool> {
    s.elements().map(|z| l.0.iter().chain(&l.1).any(|&x| s.aux(z, x))).collect()
}

fn completion_oracles() -> Outcome {
    let mut gammas = 0;
    for (name, s) in small(w_corpus(5), 5).into_iter().chain(small(iota_corpus(5), 5)) {
        let g = ok(gamma_complete(&s))?;
        let ls = lassos(&s);
        let found: BTreeSet<Vec<bool>> = ls.iter().map(|l| downset(&s, l)).collect();
        let computed: BTreeSet<Vec<bool>> = g.downsets.iter().cloned().collect();
        ensure!(found == computed && computed.len() == g.structure.len(), "{name}: γ classes");
        let class: HashMap<Vec<bool>, usize> = g.downsets.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
        for i in 0..g.downsets.len() {
            for j in 0..g.downsets.len() {
                let incl = (0..s.len()).all(|z| !g.downsets[i][z] || g.downsets[j][z]);
                ensure!(g.structure.leq(i, j) == incl, "{name}: γ order");
            }
        }
        for a in &ls {
            for b in &ls {
                let sum = downset(&s, &pointwise_sum(&s, a, b));
                let expected = g.structure.add(class[&downset(&s, a)], class[&downset(&s, b)]);
                ensure!(class.get(&sum) == Some(&expected), "{name}: γ sum");
            }
        }
        for x in s.elements() {
            let below: Vec<bool> = s.elements().map(|z| s.aux(z, x)).collect();
            ensure!(g.downsets[g.alpha[x]] == below, "{name}: α at {}", s.label(x));
        }
        gammas += 1;
    }
    let mut taus = 0;
    for (name, s) in small(q_corpus(5), 5).into_iter().chain(small(iota_corpus(5), 5)) {
        let t = ok(tau_complete(&s))?;
        let ls = lassos(&s);
        // f ≾ g iff every term of f is ≺ some term of g.
        let below = |f: &(Vec<usize>, Vec<usize>), g: &(Vec<usize>, Vec<usize>)| {
            f.0.iter().chain(&f.1).all(|&x| g.0.iter().chain(&g.1).any(|&y| s.aux(x, y)))
        };
        let constant = |r: usize| (vec![], vec![r]);
        let reps: Vec<_> = t.endpoint.iter().map(|&r| constant(r)).collect();
        for (i, a) in reps.iter().enumerate() {
            for (j, b) in reps.iter().enumerate() {
                ensure!(t.structure.leq(i, j) == below(a, b), "{name}: τ order");
                let sum = pointwise_sum(&s, a, b);
                let k = t.structure.add(i, j);
                ensure!(below(&sum, &reps[k]) && below(&reps[k], &sum), "{name}: τ sum");
            }
        }
        for l in &ls {
            let hits = reps.iter().filter(|r| below(l, r) && below(r, l)).count();
            ensure!(hits == 1, "{name}: a path matches {hits} τ classes");
        }
        taus += 1;
    }
    Ok(format!("{gammas} W-structures, {taus} Q-structures"))
}

fn scripts_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts")
}

fn cli_determinism() -> Outcome {
    let mut scripts: Vec<PathBuf> = ok(std::fs::read_dir(scripts_dir()))?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cusp"))
        .collect();
    scripts.sort();
    ensure!(!scripts.is_empty(), "no scripts");
    for s in &scripts {
        let run = || Command::new(env!("CARGO_BIN_EXE_cusp")).args(["run", "--json"]).arg(s).output();
        let (a, b) = (ok(run())?, ok(run())?);
        ensure!(a.status.success(), "{}: exit {:?}", s.display(), a.status.code());
        let golden = ok(std::fs::read(s.with_extension("json")))?;
        ensure!(a.stdout == b.stdout && a.stdout == golden, "{}: output differs", s.display());
    }
    Ok(format!("{} scripts byte-identical to their goldens", scripts.len()))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 14] = [
        ("finite product law", 10, finite_product_law),
        ("reflection and coreflection adjunctions", 60, adjunctions),
        ("coequalizer universal property", 30, coequalizers),
        ("compacts of products", 10, compacts_of_products),
        ("g against n·u in the product of ℕ̄", 1, cuprod_example),
        ("{0,∞} ultraproduct has two classes", 5, prod_e0),
        ("ultra order against the inductive limit", 30, ultra_rule),
        ("Murray-von Neumann semigroup", 1, mvn),
        ("simplicity verdicts agree", 60, simplicity),
        ("O6 counterexample", 1, o6),
        ("comparability preservation", 60, comparability),
        ("total order of the ℕ̄ ultrapower", 10, total_order),
        ("γ and τ against path enumeration", 60, completion_oracles),
        ("CLI golden determinism", 10, cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > Duration::from_secs(*limit) => Err(format!("took {took:.2?}, limit {limit} s")),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        println!("{tag} {:>2} {name} [{:.2?} / {limit} s]: {detail}", i + 1, took);
        failed += usize::from(result.is_err());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
