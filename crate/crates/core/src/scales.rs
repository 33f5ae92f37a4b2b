//! Scaled Cu-semigroups, their products and ultraproducts, and the
//! simplicity, comparability and Murray–von Neumann checkers.
//!
//! A scale on a builtin is a down-set `{v ≤ b}`; on a finite structure it is
//! an explicit down-closed subset. In a product, `x ∈ Σ` when every level
//! lies in `∏Σ_j`, and `x` is in the carrier when it lies below `∞·t` for
//! the generator tuple `t` (with `∞` allowed where `Σ_j = ℕ̄`).

use std::sync::Arc;

use serde::Serialize;

use crate::described::{DescribedFunction, Index, PeriodicSet};
use crate::error::{Error, Result};
use crate::ordered::{check_o6, Builtin, Ext, Structure};
use crate::products::{filtered_is_compact, filtered_leq, leq_with_top, tuple_function, Component, Family, Filter, ProductElement};
use crate::tri::{Tri, Verdict, Witness};
use crate::ultra::{cu_membership, UltrafilterOracle};

/// The C*-algebras whose Cuntz semigroups are modelled.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraModel {
    MatrixAlgebra(u64),
    SimplePurelyInfinite,
    Custom(String),
}

impl AlgebraModel {
    /// `M_k ↦ (ℕ̄, {0..k})`, purely infinite simple `↦ ({0,∞}, {0,∞})`.
    pub fn scaled(&self) -> Result<ScaledComponent> {
        let (b, bound) = match self {
            AlgebraModel::MatrixAlgebra(0) => return Err(Error::Rejected("M_0 is not a model".into())),
            AlgebraModel::MatrixAlgebra(k) => (Builtin::ExtNat, Ext::Fin(*k)),
            AlgebraModel::SimplePurelyInfinite => (Builtin::TwoPoint, Ext::Inf),
            AlgebraModel::Custom(name) => {
                return Err(Error::Rejected(format!("custom model {name} needs an explicit scaled semigroup")))
            }
        };
        Ok(ScaledComponent::new(Component::Builtin(b), Scale::Below(bound))?.with_model(self.clone()))
    }

    pub fn is_stably_finite(&self) -> bool {
        matches!(self, AlgebraModel::MatrixAlgebra(_))
    }

    pub fn name(&self) -> String {
        match self {
            AlgebraModel::MatrixAlgebra(k) => format!("M{k}"),
            AlgebraModel::SimplePurelyInfinite => "spi".into(),
            AlgebraModel::Custom(name) => name.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scale {
    /// `{ v ≤ b }` in a builtin.
    Below(Ext),
    /// Membership flags over a finite structure.
    Set(Vec<bool>),
}

/// A component with a scale: down-closed, closed under suprema, generating as an ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledComponent {
    component: Component,
    scale: Scale,
    model: Option<AlgebraModel>,
}

impl ScaledComponent {
    pub fn new(component: Component, scale: Scale) -> Result<Self> {
        match (&component, &scale) {
            (Component::Builtin(b), Scale::Below(bound)) => {
                if !b.contains(*bound) || bound.is_zero() {
                    return Err(Error::Rejected(format!("bound {bound} does not generate {}", b.name())));
                }
            }
            (Component::Finite(s), Scale::Set(members)) => check_finite_scale(s, members)?,
            _ => return Err(Error::Rejected("builtins take a bound, finite structures a member set".into())),
        }
        Ok(ScaledComponent { component, scale, model: None })
    }

    /// The trivial scale `Σ = S`.
    pub fn trivial(component: Component) -> Result<Self> {
        let scale = match &component {
            Component::Builtin(Builtin::ExtNat) | Component::Builtin(Builtin::TwoPoint) => Scale::Below(Ext::Inf),
            Component::Builtin(Builtin::TruncNat { k }) => Scale::Below(Ext::Fin(*k)),
            Component::Finite(s) => Scale::Set(vec![true; s.len()]),
        };
        Self::new(component, scale)
    }

    pub fn finite(s: Structure, members: Vec<bool>) -> Result<Self> {
        Self::new(Component::finite(s)?, Scale::Set(members))
    }

    pub fn with_model(mut self, model: AlgebraModel) -> Self {
        self.model = Some(model);
        self
    }

    pub fn component(&self) -> &Component {
        &self.component
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    pub fn model(&self) -> Option<&AlgebraModel> {
        self.model.as_ref()
    }

    pub fn in_scale(&self, v: Ext) -> bool {
        match &self.scale {
            Scale::Below(b) => v <= *b,
            Scale::Set(m) => v.finite().is_some_and(|i| m.get(i as usize).copied().unwrap_or(false)),
        }
    }

    /// `Σ_j = ℕ̄`: any finite level is admissible.
    fn unbounded(&self) -> bool {
        self.component.is_extnat() && self.scale == Scale::Below(Ext::Inf)
    }

    /// An element whose infinite multiple dominates the semigroup.
    fn generator(&self) -> Ext {
        match (&self.component, &self.scale) {
            (Component::Builtin(Builtin::ExtNat), Scale::Below(Ext::Inf)) => Ext::Fin(1),
            (_, Scale::Below(b)) => *b,
            (c, Scale::Set(m)) => (0..m.len())
                .filter(|&i| m[i])
                .fold(c.zero(), |acc, i| c.add(acc, Ext::Fin(i as u64))),
        }
    }

    /// Nonzero scale values; on totally ordered builtins the least and largest suffice.
    fn scale_probes(&self) -> Vec<Ext> {
        match (&self.component, &self.scale) {
            (Component::Builtin(b), Scale::Below(bound)) => dedup(
                [Ext::Fin(1), *bound].into_iter().filter(|&v| b.contains(v) && !v.is_zero() && v <= *bound).collect(),
            ),
            (c, Scale::Set(m)) => (0..m.len() as u64).map(Ext::Fin).filter(|&v| m[v.finite().unwrap() as usize] && v != c.zero()).collect(),
            _ => vec![],
        }
    }

    /// Nonzero elements enough to refute simplicity.
    fn carrier_probes(&self) -> Vec<Ext> {
        match &self.component {
            Component::Builtin(Builtin::ExtNat) => vec![Ext::Fin(1), Ext::Inf],
            Component::Builtin(Builtin::TwoPoint) => vec![Ext::Inf],
            Component::Builtin(Builtin::TruncNat { k }) => dedup(vec![Ext::Fin(1), Ext::Fin(*k)]),
            Component::Finite(s) => s.elements().filter(|&i| i != s.zero()).map(|i| Ext::Fin(i as u64)).collect(),
        }
    }

    /// The finite table and scale flags, with the map from values to indices.
    fn table(&self) -> Option<(Structure, Vec<bool>, Vec<Ext>)> {
        let s = self.component.structure()?;
        let values: Vec<Ext> = match &self.component {
            Component::Builtin(b) => b.finite_elements()?,
            Component::Finite(_) => s.elements().map(|i| Ext::Fin(i as u64)).collect(),
        };
        let flags = values.iter().map(|&v| self.in_scale(v)).collect();
        Some((s, flags, values))
    }

    /// Least `n` with `(C_n)`; searched up to the carrier size on finite carriers,
    /// where `n·y` is constant from that multiplier on.
    pub fn cn_index(&self) -> Option<u64> {
        match self.table() {
            Some((s, flags, _)) => (1..=s.len() as u64).find(|&n| finite_cn(&s, &flags, n).is_true()),
            None => match self.scale {
                Scale::Below(Ext::Fin(k)) => Some(k),
                _ => None,
            },
        }
    }

    pub fn describe(&self) -> String {
        let scale = match &self.scale {
            Scale::Below(b) => format!("<= {b}"),
            Scale::Set(m) => {
                let names: Vec<String> = (0..m.len()).filter(|&i| m[i]).map(|i| self.component.format(Ext::Fin(i as u64))).collect();
                format!("{{{}}}", names.join(","))
            }
        };
        match &self.model {
            Some(m) => format!("{} scale {scale} model {}", self.component.name(), m.name()),
            None => format!("{} scale {scale}", self.component.name()),
        }
    }
}

fn dedup(mut v: Vec<Ext>) -> Vec<Ext> {
    v.sort();
    v.dedup();
    v
}

fn check_finite_scale(s: &Structure, members: &[bool]) -> Result<()> {
    if members.len() != s.len() {
        return Err(Error::Malformed(format!("scale has {} flags for {} elements", members.len(), s.len())));
    }
    if !members[s.zero()] {
        return Err(Error::Rejected("the scale must contain 0".into()));
    }
    for x in s.elements().filter(|&x| members[x]) {
        if let Some(y) = s.elements().find(|&y| s.leq(y, x) && !members[y]) {
            return Err(Error::Rejected(format!("scale is not down-closed: {} ≤ {}", s.label(y), s.label(x))));
        }
    }
    let g = s.elements().filter(|&x| members[x]).fold(s.zero(), |acc, x| s.add(acc, x));
    let top = s.mul_inf(g);
    if let Some(x) = s.elements().find(|&x| !s.leq(x, top)) {
        return Err(Error::Rejected(format!("scale does not generate {}", s.label(x))));
    }
    Ok(())
}

/// `(C_n)` on a finite carrier: `x ≤ n·y` for scale elements with `y ≠ 0`.
/// Larger `x` are tried first so that the witness is as coarse as possible.
fn finite_cn(s: &Structure, flags: &[bool], n: u64) -> Verdict {
    for y in s.elements().filter(|&y| flags[y] && y != s.zero()) {
        let ny = s.mul(y, n);
        if let Some(x) = s.elements().rev().find(|&x| flags[x] && !s.leq(x, ny)) {
            return Verdict::no(Witness::elements(
                format!("x ≰ {n}·y"),
                vec![s.label(x).to_string(), s.label(y).to_string()],
            ));
        }
    }
    Verdict::yes()
}

/// Simplicity on a finite carrier: the top element lies below `∞·y` for every `y ≠ 0`.
fn finite_simple(s: &Structure) -> Verdict {
    let top = s.elements().fold(s.zero(), |acc, x| s.add(acc, x));
    for y in s.elements().filter(|&y| y != s.zero()) {
        if !s.leq(top, s.mul_inf(y)) {
            return Verdict::no(Witness::elements(
                "x ≰ ∞·y",
                vec![s.label(top).to_string(), s.label(y).to_string()],
            ));
        }
    }
    Verdict::yes()
}

/// A family of scaled components, laid out like [`Family`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledFamily {
    family: Arc<Family>,
    prefix: Vec<ScaledComponent>,
    pattern: Vec<ScaledComponent>,
}

impl ScaledFamily {
    pub fn constant(c: ScaledComponent, index: Index) -> Self {
        let family = Arc::new(Family::constant(c.component.clone(), index));
        match index {
            Index::Finite { size } => ScaledFamily { family, prefix: vec![c; size as usize], pattern: vec![] },
            Index::Naturals => ScaledFamily { family, prefix: vec![], pattern: vec![c] },
        }
    }

    pub fn list(components: Vec<ScaledComponent>) -> Self {
        let family = Arc::new(Family::list(components.iter().map(|c| c.component.clone()).collect()));
        ScaledFamily { family, prefix: components, pattern: vec![] }
    }

    pub fn periodic(prefix: Vec<ScaledComponent>, pattern: Vec<ScaledComponent>) -> Result<Self> {
        let family = Arc::new(Family::periodic(
            prefix.iter().map(|c| c.component.clone()).collect(),
            pattern.iter().map(|c| c.component.clone()).collect(),
        )?);
        Ok(ScaledFamily { family, prefix, pattern })
    }

    pub fn models(models: &[AlgebraModel], index: Index) -> Result<Self> {
        let comps = models.iter().map(AlgebraModel::scaled).collect::<Result<Vec<_>>>()?;
        match index {
            Index::Finite { size } if size as usize == comps.len() => Ok(Self::list(comps)),
            Index::Finite { .. } => Err(Error::Malformed("one model per index".into())),
            Index::Naturals => Self::periodic(vec![], comps),
        }
    }

    pub fn family(&self) -> &Arc<Family> {
        &self.family
    }

    pub fn at(&self, j: u64) -> &ScaledComponent {
        let l = self.prefix.len() as u64;
        if j < l {
            &self.prefix[j as usize]
        } else {
            &self.pattern[((j - l) % self.pattern.len() as u64) as usize]
        }
    }

    pub fn components(&self) -> impl Iterator<Item = &ScaledComponent> {
        self.prefix.iter().chain(&self.pattern)
    }

    pub fn describe(&self) -> String {
        let list = |v: &[ScaledComponent]| v.iter().map(ScaledComponent::describe).collect::<Vec<_>>().join("; ");
        match self.family.index() {
            Index::Finite { .. } => format!("list({})", list(&self.prefix)),
            Index::Naturals => format!("periodic([{}], [{}])", list(&self.prefix), list(&self.pattern)),
        }
    }

    /// Positions that determine every component: single indices below the
    /// start, then one representative per residue class.
    fn positions(&self) -> (Vec<u64>, Vec<u64>) {
        let (s, p) = self.family.shape();
        match self.family.index() {
            Index::Finite { size } => ((0..size).collect(), vec![]),
            Index::Naturals => ((0..s).collect(), (s..s + p).collect()),
        }
    }

    fn tabulate(&self, f: impl Fn(u64) -> Ext) -> Result<DescribedFunction> {
        let (s, p) = self.family.shape();
        match self.family.index() {
            Index::Finite { size } => Ok(tuple_function(&(0..size).map(&f).collect::<Vec<_>>())),
            Index::Naturals => DescribedFunction::periodic((0..s).map(&f).collect(), (s..s + p).map(&f).collect()),
        }
    }

    fn generator(&self) -> Result<ProductElement> {
        let t = self.tabulate(|j| self.at(j).generator())?;
        ProductElement::anchor(self.family.clone(), t)
    }

    /// The `ℕ̄` coordinates with `Σ_j = ℕ̄`.
    fn top_set(&self) -> PeriodicSet {
        let (s, p) = self.family.shape();
        match self.family.index() {
            Index::Finite { size } => PeriodicSet { prefix: (0..size).map(|j| self.at(j).unbounded()).collect(), pattern: vec![false] },
            Index::Naturals => PeriodicSet {
                prefix: (0..s).map(|j| self.at(j).unbounded()).collect(),
                pattern: (0..p).map(|r| self.at(s + (r + p - s % p) % p).unbounded()).collect(),
            },
        }
    }

    /// The element with value `v` at the position `pos` (a single index or a
    /// whole residue class) and `0` elsewhere.
    fn indicator(&self, pos: u64, v: Ext) -> Result<ProductElement> {
        let (s, p) = self.family.shape();
        let class = !self.family.is_finite() && pos >= s;
        let f = self.tabulate(|j| {
            let hit = if class { j >= s && (j - s) % p == (pos - s) % p } else { j == pos };
            if hit {
                v
            } else {
                self.at(j).component.zero()
            }
        })?;
        ProductElement::anchor(self.family.clone(), f)
    }

    fn probes(&self, carrier: bool) -> Result<Vec<ProductElement>> {
        let (points, classes) = self.positions();
        let mut out = Vec::new();
        for pos in points.into_iter().chain(classes) {
            let c = self.at(pos);
            let values = if carrier { c.carrier_probes() } else { c.scale_probes() };
            for v in values {
                out.push(self.indicator(pos, v)?);
            }
        }
        Ok(out)
    }
}

/// A scaled Cu-semigroup: a single scaled component, a scaled product, or a
/// scaled ultraproduct over a free ultrafilter.
#[derive(Clone, Debug)]
pub enum ScaledCu {
    Component(ScaledComponent),
    Product(Arc<ScaledFamily>),
    Ultra(Arc<ScaledFamily>, UltrafilterOracle),
}

/// The scaled product: `Σ = ∏Σ_j` levelwise, carrier the ideal it generates.
pub fn scaled_product(family: ScaledFamily) -> ScaledCu {
    ScaledCu::Product(Arc::new(family))
}

/// The scaled ultraproduct; a principal ultrafilter returns its component.
pub fn scaled_ultraproduct(family: ScaledFamily, u: UltrafilterOracle) -> Result<ScaledCu> {
    if family.family.index() != u.index {
        return Err(Error::FamilyMismatch("ultrafilter and family live on different index sets".into()));
    }
    Ok(match u.principal_point() {
        Some(j0) => ScaledCu::Component(family.at(j0).clone()),
        None => ScaledCu::Ultra(Arc::new(family), u),
    })
}

impl ScaledCu {
    fn parts(&self) -> Result<(&ScaledFamily, Filter<'_>)> {
        match self {
            ScaledCu::Component(_) => Err(Error::Rejected("a single component has no product elements".into())),
            ScaledCu::Product(f) => Ok((f, Filter::All)),
            ScaledCu::Ultra(f, u) => Ok((f, Filter::Ultra(u))),
        }
    }

    pub fn family(&self) -> Option<&ScaledFamily> {
        self.parts().ok().map(|p| p.0)
    }

    /// Every level of `x` lies in `∏Σ_j` on a filter set.
    pub fn scale_contains(&self, x: &ProductElement, budget: u64) -> Result<Verdict> {
        let (fam, filter) = self.parts()?;
        scale_membership(fam, x, filter, budget)
    }

    /// `x ≤ ∞·t` for the generator tuple `t`.
    pub fn carrier_contains(&self, x: &ProductElement, budget: u64) -> Result<Verdict> {
        let (fam, filter) = self.parts()?;
        let gen = fam.generator()?.times_inf()?;
        leq_with_top(x, &gen, &fam.top_set(), filter, budget)
    }

    /// `x ≤ t + … + t` with `cap` summands; `Unknown` when the cap is too small
    /// or `x` lies outside the carrier.
    pub fn generated_within(&self, x: &ProductElement, cap: u64, budget: u64) -> Result<Verdict> {
        let (fam, filter) = self.parts()?;
        let bound = fam.generator()?.scale(cap);
        let v = leq_with_top(x, &bound, &fam.top_set(), filter, budget)?;
        Ok(if v.is_true() { v } else { Verdict::unknown(cap, (x.stable_point(), cap)) })
    }

    /// Second route for principal scales: `x ≤ t` with `∞` where `Σ_j = ℕ̄`.
    /// `None` when some component scale has no largest element.
    pub fn scale_contains_by_bound(&self, x: &ProductElement, budget: u64) -> Result<Option<Verdict>> {
        let (fam, filter) = self.parts()?;
        let mut maxima = Vec::new();
        for c in fam.components() {
            let m = match &c.scale {
                Scale::Below(b) => Some(*b),
                Scale::Set(flags) => {
                    let Component::Finite(s) = &c.component else { return Ok(None) };
                    let members: Vec<usize> = s.elements().filter(|&i| flags[i]).collect();
                    members.iter().copied().find(|&m| members.iter().all(|&i| s.leq(i, m))).map(|m| Ext::Fin(m as u64))
                }
            };
            match m {
                Some(m) => maxima.push(m),
                None => return Ok(None),
            }
        }
        let t = fam.tabulate(|j| {
            let c = fam.at(j);
            match c.scale {
                Scale::Below(Ext::Inf) if c.component.is_extnat() => Ext::Fin(0),
                Scale::Below(b) => b,
                Scale::Set(_) => {
                    let s = c.component.structure().unwrap();
                    let members: Vec<usize> = s.elements().filter(|&i| c.in_scale(Ext::Fin(i as u64))).collect();
                    let m = members.iter().copied().find(|&m| members.iter().all(|&i| s.leq(i, m))).unwrap();
                    Ext::Fin(m as u64)
                }
            }
        })?;
        let bound = ProductElement::chain(fam.family.clone(), vec![t])?;
        leq_with_top(x, &bound, &fam.top_set(), filter, budget).map(Some)
    }

    /// Generated nonzero test elements: indicators of single indices and of
    /// residue classes carrying scale (or carrier) values.
    pub fn probes(&self, carrier: bool) -> Result<Vec<ProductElement>> {
        let (fam, filter) = self.parts()?;
        let mut out = Vec::new();
        for x in fam.probes(carrier)? {
            if self.is_nonzero(&x, filter)? {
                out.push(x);
            }
        }
        Ok(out)
    }

    fn is_nonzero(&self, x: &ProductElement, filter: Filter) -> Result<bool> {
        Ok(match filter {
            Filter::Ultra(u) => cu_membership(x, u)?.is_false(),
            _ => !x.terms().is_empty(),
        })
    }
}

fn scale_membership(fam: &ScaledFamily, x: &ProductElement, filter: Filter, budget: u64) -> Result<Verdict> {
    let n = x.stable_point();
    let sup_ok = |j: u64| {
        let v = x.value(n, j);
        let grows = x.value(n + 1, j) != v;
        fam.at(j).in_scale(if grows { Ext::Inf } else { v })
    };
    let fail = |j: u64| Witness::at(format!("the levels leave the scale at index {j}"), n, Some(j));
    if let Filter::Ultra(u) = filter {
        if let Some(j0) = u.principal_point() {
            return Ok(Verdict::from_bool(sup_ok(j0), || fail(j0)));
        }
    }
    let size = match fam.family.index() {
        Index::Finite { size } => Some(size),
        Index::Naturals => None,
    };
    if let Some(size) = size {
        let bad = (0..size).find(|&j| !sup_ok(j));
        return Ok(match filter {
            Filter::All => Verdict::from_bool(bad.is_none(), || fail(bad.unwrap())),
            Filter::Ultra(u) => Verdict::from_bool(u.contains(&PeriodicSet { prefix: (0..size).map(sup_ok).collect(), pattern: vec![false] })?, || {
                Witness::at("the levels leave the scale on a set in the ultrafilter", n, None)
            }),
            _ => Verdict::yes(),
        });
    }
    let Some((s, p)) = x.shape() else {
        return match filter {
            Filter::All => {
                for j in 0..budget {
                    if !sup_ok(j) {
                        return Ok(Verdict::no(fail(j)).with_spent(j + 1));
                    }
                }
                Ok(Verdict::unknown(budget, (n, budget)))
            }
            _ => Err(Error::Undecidable("opaque rules have no certified residue structure".into())),
        };
    };
    // Per class: eventual membership, and the first failing index.
    let mut pattern = vec![false; p as usize];
    let mut first_bad = (0..s).find(|&j| !sup_ok(j));
    for rep in s..s + p {
        let c = fam.at(rep);
        let (a, b) = x.class_value(n, rep).expect("exact form");
        let grows = x.class_value(n + 1, rep).expect("exact form") != (a, b);
        let (ok, bad) = if c.unbounded() {
            (true, None)
        } else if !c.component.is_extnat() {
            let ok = c.in_scale(b);
            (ok, (!ok).then_some(rep))
        } else if grows {
            (false, Some(rep))
        } else {
            let bound = match c.scale {
                Scale::Below(Ext::Fin(k)) => k,
                _ => u64::MAX,
            };
            let b = b.finite().unwrap_or(u64::MAX);
            if a == 0 {
                (b <= bound, (b > bound).then_some(rep))
            } else {
                // first j ≡ rep with a·j + b > bound
                let t = if b > bound { 0 } else { (bound - b) / a + 1 };
                let j = if t <= rep { rep } else { rep + (t - rep).div_ceil(p) * p };
                (false, Some(j))
            }
        };
        pattern[(rep % p) as usize] = ok;
        first_bad = match (first_bad, bad) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
    }
    let eventual = PeriodicSet { prefix: vec![], pattern };
    Ok(match filter {
        Filter::All => Verdict::from_bool(first_bad.is_none(), || fail(first_bad.unwrap())),
        Filter::Cofinite => Verdict::from_bool(eventual.is_cofinite(), || {
            Witness::at("the levels leave the scale on an infinite residue class", n, None)
        }),
        Filter::Ultra(u) => Verdict::from_bool(u.contains(&eventual)?, || {
            Witness::at("the levels leave the scale on a set in the ultrafilter", n, None)
        }),
        Filter::Everything => Verdict::yes(),
    })
}

/// Property `(C_n)`: `x ≤ n·y` for all scale elements `x, y` with `y ≠ 0`.
///
/// Exact on single components. On products and ultraproducts the search runs
/// over the generated scale elements, which realise every componentwise
/// counterexample; `True` means none of them refutes the property.
pub fn has_cn(s: &ScaledCu, n: u64, budget: u64) -> Result<Verdict> {
    match s {
        ScaledCu::Component(c) => Ok(component_cn(c, n)),
        ScaledCu::Product(_) | ScaledCu::Ultra(..) => {
            let (_, filter) = s.parts()?;
            let probes = s.probes(false)?;
            search_pairs(&probes, filter, budget, |y| Ok(y.scale(n)), &format!("x ≰ {n}·y"))
        }
    }
}

fn component_cn(c: &ScaledComponent, n: u64) -> Verdict {
    if let Some((s, flags, _)) = c.table() {
        return finite_cn(&s, &flags, n);
    }
    // ℕ̄ with scale {v ≤ b}: the worst pair is x = b, y = 1.
    let Scale::Below(b) = c.scale else { unreachable!("builtin scales are bounds") };
    Verdict::from_bool(b <= Ext::Fin(n), || Witness::elements(format!("x ≰ {n}·y"), vec![b.to_string(), "1".into()]))
}

fn search_pairs(
    probes: &[ProductElement],
    filter: Filter,
    budget: u64,
    bound: impl Fn(&ProductElement) -> Result<ProductElement>,
    what: &str,
) -> Result<Verdict> {
    let mut spent = 0;
    for y in probes {
        let by = bound(y)?;
        for x in probes.iter().rev() {
            spent += 1;
            let v = filtered_leq(x, &by, filter, budget)?;
            match v.value {
                Tri::True => {}
                Tri::False => {
                    return Ok(Verdict::no(Witness::elements(what, vec![x.describe(), y.describe()])).with_spent(spent))
                }
                Tri::Unknown => return Ok(Verdict::unknown(spent, v.frontier.unwrap_or((0, 0)))),
            }
        }
    }
    Ok(Verdict::yes().with_spent(spent))
}

/// Simplicity: `x ≤ ∞·y` for all `x` and all `y ≠ 0`.
pub fn is_simple(s: &ScaledCu, budget: u64) -> Result<Verdict> {
    match s {
        ScaledCu::Component(c) => Ok(match c.component.structure() {
            Some(st) => finite_simple(&st),
            None => Verdict::yes(),
        }),
        ScaledCu::Product(_) | ScaledCu::Ultra(..) => {
            let (_, filter) = s.parts()?;
            let probes = s.probes(true)?;
            search_pairs(&probes, filter, budget, |y| y.times_inf(), "x ≰ ∞·y")
        }
    }
}

/// `2n·x = n·x` for every `x`.
pub fn is_pi_n(s: &Structure, n: u64) -> Verdict {
    match s.elements().find(|&x| s.mul(x, 2 * n) != s.mul(x, n)) {
        None => Verdict::yes(),
        Some(x) => Verdict::no(Witness::elements(format!("2·{n}·x ≠ {n}·x"), vec![s.label(x).to_string()])),
    }
}

/// `ℕ̄` is pi-`n` for no `n`: `2n·1 ≠ n·1`.
pub fn builtin_is_pi_n(b: Builtin, n: u64) -> Verdict {
    match b.to_structure() {
        Some(s) => is_pi_n(&s, n),
        None => Verdict::no(Witness::elements(format!("2·{n}·x ≠ {n}·x"), vec!["1".into()])),
    }
}

/// The least `n` with pi-`n`. Multiples `k·x` increase and are constant from
/// `k = |S|` on, so `n = |S|` always works on finite carriers.
pub fn is_weakly_purely_infinite(s: &Structure) -> Option<u64> {
    (1..=s.len().max(1) as u64).find(|&n| is_pi_n(s, n).is_true())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparability {
    /// `n·x ≤ n·y ⇒ x ≤ y`.
    Unperforated,
    /// `(n+1)·x ≤ n·y ⇒ x ≤ y`.
    Almost,
    /// `n·x ≤ n·y` for all large `n` `⇒ x ≤ y`.
    Near,
}

impl Comparability {
    pub fn name(self) -> &'static str {
        match self {
            Comparability::Unperforated => "unperforated",
            Comparability::Almost => "almost",
            Comparability::Near => "near",
        }
    }
}

/// Multipliers past which `k·x` is constant on a finite carrier.
pub fn stabilization_bound(s: &Structure) -> u64 {
    s.len().max(1) as u64
}

/// Exhaustive comparability check. Multiples stabilise by `|S|`, so `n ≤ |S|`
/// covers every hypothesis and "all large `n`" is decided at `n = |S|`.
pub fn comparability_check(s: &Structure, kind: Comparability) -> Verdict {
    let bound = stabilization_bound(s);
    for x in s.elements() {
        for y in s.elements().filter(|&y| !s.leq(x, y)) {
            let hit = match kind {
                Comparability::Unperforated => (1..=bound).find(|&n| s.leq(s.mul(x, n), s.mul(y, n))),
                Comparability::Almost => (1..=bound).find(|&n| s.leq(s.mul(x, n + 1), s.mul(y, n))),
                Comparability::Near => s.leq(s.mul(x, bound), s.mul(y, bound)).then_some(bound),
            };
            if let Some(n) = hit {
                return Verdict::no(Witness::elements(
                    format!("{} fails with n = {n}", kind.name()),
                    vec![s.label(x).to_string(), s.label(y).to_string(), n.to_string()],
                ));
            }
        }
    }
    Verdict::yes()
}

/// Comparability of a scaled semigroup. Products and ultraproducts pass
/// exactly when every component does: the properties pass to products and
/// their quotients, and each component is a retract of the product.
pub fn scaled_comparability(s: &ScaledCu, kind: Comparability) -> Verdict {
    let component = |c: &ScaledComponent| match c.component.structure() {
        Some(st) => comparability_check(&st, kind),
        None => Verdict::yes(),
    };
    match s {
        ScaledCu::Component(c) => component(c),
        ScaledCu::Product(f) | ScaledCu::Ultra(f, _) => {
            for c in f.components() {
                let v = component(c);
                if let Some(w) = v.witness {
                    let mut w = w;
                    w.description = format!("component {} {}", c.component.name(), w.description);
                    return Verdict::no(w);
                }
            }
            Verdict::yes()
        }
    }
}

pub fn is_totally_ordered(s: &Structure) -> Verdict {
    for x in s.elements() {
        if let Some(y) = s.elements().find(|&y| !s.leq(x, y) && !s.leq(y, x)) {
            return Verdict::no(Witness::elements("incomparable", vec![s.label(x).to_string(), s.label(y).to_string()]));
        }
    }
    Verdict::yes()
}

/// Total order of a product (`Filter::All`) or ultraproduct. Ultraproducts of
/// totally ordered components are totally ordered; otherwise an incomparable
/// pair of generated indicator elements is sought.
pub fn totally_ordered(family: &Family, filter: Filter, budget: u64) -> Result<Verdict> {
    let total = |c: &Component| c.structure().is_none_or(|s| is_totally_ordered(&s).is_true());
    let single = family.index() == Index::Finite { size: 1 };
    if family.components().all(total) && (single || matches!(filter, Filter::Ultra(_))) {
        return Ok(Verdict::yes());
    }
    let fam = Arc::new(family.clone());
    let (s, p) = family.shape();
    let zero = |j: u64| family.component(j).zero();
    // Single indices for the product, whole residue classes for the ultraproduct.
    let (len, positions): (u64, Vec<u64>) = match (family.index(), filter) {
        (Index::Finite { size }, _) => (size, (0..size).collect()),
        (Index::Naturals, Filter::Ultra(_)) => (s, (s..s + p).collect()),
        // One extra index so period-1 families still get two disjoint supports.
        (Index::Naturals, _) => (s + p + 1, (0..s + p + 1).collect()),
    };
    let mut probes = Vec::new();
    for pos in positions {
        let values: Vec<Ext> = match family.component(pos).structure() {
            Some(st) => st.elements().map(|i| Ext::Fin(i as u64)).filter(|&v| v != zero(pos)).collect(),
            None => vec![Ext::Fin(1)],
        };
        for v in values {
            let at = |j: u64| if j == pos { v } else { zero(j) };
            let f = match family.index() {
                Index::Finite { .. } => tuple_function(&(0..len).map(at).collect::<Vec<_>>()),
                Index::Naturals => DescribedFunction::periodic((0..len).map(at).collect(), (len..len + p).map(at).collect())?,
            };
            probes.push(ProductElement::anchor(fam.clone(), f)?);
        }
    }
    for x in &probes {
        for y in &probes {
            let a = filtered_leq(x, y, filter, budget)?;
            let b = filtered_leq(y, x, filter, budget)?;
            if a.is_false() && b.is_false() {
                return Ok(Verdict::no(Witness::elements("incomparable", vec![x.describe(), y.describe()])));
            }
        }
    }
    Ok(Verdict::unknown(probes.len() as u64, (0, 0)))
}

/// The Murray–von Neumann semigroup of a product (or ultraproduct) of matrix
/// algebras: compact elements below `n·u` for some `n`, `u` the unit tuple.
#[derive(Clone, Debug)]
pub struct MvnSemigroup {
    family: Arc<Family>,
    unit: ProductElement,
    oracle: Option<UltrafilterOracle>,
}

pub fn mvn_semigroup(models: &ScaledFamily, oracle: Option<UltrafilterOracle>) -> Result<MvnSemigroup> {
    for c in models.components() {
        match c.model() {
            Some(m) if m.is_stably_finite() => {}
            Some(m) => return Err(Error::Rejected(format!("model {} is not stably finite", m.name()))),
            None => return Err(Error::Rejected("components need model tags".into())),
        }
    }
    if let Some(u) = &oracle {
        if u.index != models.family.index() {
            return Err(Error::FamilyMismatch("ultrafilter and family live on different index sets".into()));
        }
    }
    let unit = models.generator()?;
    Ok(MvnSemigroup { family: models.family.clone(), unit, oracle })
}

impl MvnSemigroup {
    pub fn family(&self) -> &Arc<Family> {
        &self.family
    }

    pub fn unit(&self) -> &ProductElement {
        &self.unit
    }

    fn filter(&self) -> Filter<'_> {
        self.oracle.as_ref().map_or(Filter::All, Filter::Ultra)
    }

    /// `x` is compact and `x ≤ ∞·u`; for compact `x` this is `x ≤ n·u` for some `n`.
    pub fn contains(&self, x: &ProductElement, budget: u64) -> Result<Verdict> {
        let c = filtered_is_compact(x, self.filter(), budget)?;
        if !c.is_true() {
            return Ok(c);
        }
        filtered_leq(x, &self.unit.times_inf()?, self.filter(), budget)
    }

    /// The least `n ≤ limit` with `x ≤ n·u`.
    pub fn bound(&self, x: &ProductElement, limit: u64, budget: u64) -> Result<Option<u64>> {
        for n in 0..=limit {
            if filtered_leq(x, &self.unit.scale(n), self.filter(), budget)?.is_true() {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }
}

/// Which clause of the simplicity characterisation decided the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// Almost every component is purely infinite simple.
    PurelyInfinite,
    /// Almost every component is `M_k` for one `k`.
    Matrix,
    /// Almost every component has `(C_n)` for one `n`.
    UniformCn,
    /// No clause holds.
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplicityVerdict {
    pub simple: bool,
    pub clause: Clause,
    /// `k` for the matrix clause, `n` for the `(C_n)` clauses.
    pub n: Option<u64>,
    /// The verdict of `has_cn` on the scaled ultraproduct with that `n`
    /// (or with the largest admissible `n` when no clause holds).
    pub cn_check: Tri,
    pub agrees: bool,
}

/// Simplicity of an ultraproduct over a countably incomplete ultrafilter,
/// read off the components on an ultrafilter set.
pub fn ultrapower_simplicity_verdict(models: &ScaledFamily, u: &UltrafilterOracle, budget: u64) -> Result<SimplicityVerdict> {
    if !u.countably_incomplete() {
        return Err(Error::Rejected("the characterisation needs a countably incomplete ultrafilter".into()));
    }
    if models.family.index() != u.index {
        return Err(Error::FamilyMismatch("ultrafilter and family live on different index sets".into()));
    }
    for c in models.components() {
        if let Some(st) = c.component.structure() {
            if let Err(v) = check_o6(&st) {
                return Err(Error::Rejected(format!("component fails {} at {:?}", v.law, v.labels(&st))));
            }
        }
    }
    let set_where = |pred: &dyn Fn(&ScaledComponent) -> bool| -> PeriodicSet {
        let (points, classes) = models.positions();
        let p = models.family.shape().1;
        let mut pattern = vec![false; p as usize];
        for &rep in &classes {
            pattern[(rep % p) as usize] = pred(models.at(rep));
        }
        let prefix = points.iter().map(|&j| pred(models.at(j))).collect::<Vec<_>>();
        PeriodicSet { prefix, pattern }
    };
    let all_models = models.components().all(|c| matches!(c.model(), Some(m) if !matches!(m, AlgebraModel::Custom(_))));
    let (simple, clause, n) = if all_models {
        if u.contains(&set_where(&|c| c.model() == Some(&AlgebraModel::SimplePurelyInfinite)))? {
            (true, Clause::PurelyInfinite, Some(1))
        } else {
            let ks: Vec<u64> = dedup_u64(models.components().filter_map(|c| match c.model() {
                Some(AlgebraModel::MatrixAlgebra(k)) => Some(*k),
                _ => None,
            }));
            let mut found = None;
            for k in ks {
                if u.contains(&set_where(&|c| c.model() == Some(&AlgebraModel::MatrixAlgebra(k))))? {
                    found = Some(k);
                    break;
                }
            }
            match found {
                Some(k) => (true, Clause::Matrix, Some(k)),
                None => (false, Clause::None, None),
            }
        }
    } else {
        let ns: Vec<u64> = dedup_u64(models.components().filter_map(ScaledComponent::cn_index));
        let mut found = None;
        for n in ns {
            if u.contains(&set_where(&|c| c.cn_index().is_some_and(|m| m <= n)))? {
                found = Some(n);
                break;
            }
        }
        match found {
            Some(n) => (true, Clause::UniformCn, Some(n)),
            None => (false, Clause::None, None),
        }
    };
    let ultra = ScaledCu::Ultra(Arc::new(models.clone()), u.clone());
    let probe_n = n.unwrap_or_else(|| max_probe_n(models));
    let cn_check = has_cn(&ultra, probe_n, budget)?.value;
    let agrees = (cn_check == Tri::True) == simple;
    Ok(SimplicityVerdict { simple, clause, n, cn_check, agrees })
}

/// A multiplier beyond every finite `(C_n)` index of the components.
fn max_probe_n(models: &ScaledFamily) -> u64 {
    models
        .components()
        .map(|c| c.cn_index().unwrap_or_else(|| c.component.structure().map_or(1, |s| s.len() as u64)))
        .max()
        .unwrap_or(1)
        .max(8)
}

fn dedup_u64(it: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut v: Vec<u64> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{o6_example, perforated};
    use crate::products::{cu_product_finite, finite_tuples};

    fn m(k: u64) -> ScaledComponent {
        AlgebraModel::MatrixAlgebra(k).scaled().unwrap()
    }

    fn constant(c: ScaledComponent) -> ScaledFamily {
        ScaledFamily::constant(c, Index::Naturals)
    }

    fn anchor(fam: &ScaledFamily, f: DescribedFunction) -> ProductElement {
        ProductElement::anchor(fam.family().clone(), f).unwrap()
    }

    #[test]
    fn unit_is_in_the_scale_and_identity_is_outside_the_carrier() {
        let fam = constant(m(1));
        let p = scaled_product(fam.clone());
        let u = anchor(&fam, DescribedFunction::constant(Ext::Fin(1)));
        assert!(p.scale_contains(&u, 100).unwrap().is_true());
        assert!(p.carrier_contains(&u, 100).unwrap().is_true());
        let g = anchor(&fam, DescribedFunction::identity());
        assert!(p.carrier_contains(&g, 100).unwrap().is_false());
        assert!(p.scale_contains(&g, 100).unwrap().is_false());
        assert!(p.generated_within(&g, 50, 100).unwrap().is_unknown());
        assert!(p.generated_within(&u.scale(3), 3, 100).unwrap().is_true());
        assert!(p.generated_within(&u.scale(3), 2, 100).unwrap().is_unknown());
    }

    #[test]
    fn scale_of_sloped_elements_fails_at_first_large_index() {
        let fam = constant(m(4));
        let p = scaled_product(fam.clone());
        let g = anchor(&fam, DescribedFunction::identity());
        let v = p.scale_contains(&g, 100).unwrap();
        assert_eq!(v.witness.unwrap().index, Some(5));
    }

    #[test]
    fn finite_family_scale_is_componentwise() {
        let a = ScaledComponent::finite(o6_example(), vec![true, true, false, false]).unwrap();
        let b = ScaledComponent::new(Component::Builtin(Builtin::TruncNat { k: 2 }), Scale::Below(Ext::Fin(1))).unwrap();
        let fam = ScaledFamily::list(vec![a.clone(), b.clone()]);
        let p = scaled_product(fam.clone());
        for t in finite_tuples(fam.family()).unwrap() {
            let x = ProductElement::chain(fam.family().clone(), vec![tuple_function(&t)]).unwrap();
            let want = a.in_scale(t[0]) && b.in_scale(t[1]);
            assert_eq!(p.scale_contains(&x, 10).unwrap().is_true(), want, "{t:?}");
            let by_bound = p.scale_contains_by_bound(&x, 10).unwrap().unwrap();
            assert_eq!(by_bound.is_true(), want, "{t:?}");
        }
    }

    #[test]
    fn ultraproduct_scale_bounded_by_twice_unit() {
        let fam = constant(m(2));
        let u = UltrafilterOracle::dyadic(1, 4).unwrap();
        let s = scaled_ultraproduct(fam.clone(), u).unwrap();
        for c in 0..6 {
            let x = anchor(&fam, DescribedFunction::constant(Ext::Fin(c)));
            assert_eq!(s.scale_contains(&x, 100).unwrap().is_true(), c <= 2, "{c}");
            assert!(s.carrier_contains(&x, 100).unwrap().is_true());
        }
        let zero = ProductElement::zero(fam.family().clone());
        assert!(s.scale_contains(&zero, 10).unwrap().is_true());
        // Large only off the ultrafilter: still in the scale.
        let odd_big = anchor(&fam, DescribedFunction::periodic(vec![], vec![Ext::Fin(2), Ext::Fin(9)]).unwrap());
        assert!(s.scale_contains(&odd_big, 100).unwrap().is_false());
        let even_big = anchor(&fam, DescribedFunction::periodic(vec![], vec![Ext::Fin(9), Ext::Fin(2)]).unwrap());
        assert!(s.scale_contains(&even_big, 100).unwrap().is_true());
    }

    #[test]
    fn principal_ultraproduct_is_the_component() {
        let fam = ScaledFamily::periodic(vec![], vec![m(1), m(3)]).unwrap();
        let u = UltrafilterOracle::principal(Index::Naturals, 5).unwrap();
        match scaled_ultraproduct(fam, u).unwrap() {
            ScaledCu::Component(c) => assert_eq!(c, m(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cn_on_components() {
        for n in 1..5 {
            for k in 1..=n {
                assert!(has_cn(&ScaledCu::Component(m(k)), n, 10).unwrap().is_true());
            }
            assert!(has_cn(&ScaledCu::Component(m(n + 1)), n, 10).unwrap().is_false());
        }
        let full = ScaledComponent::trivial(Component::Builtin(Builtin::ExtNat)).unwrap();
        let v = has_cn(&ScaledCu::Component(full), 3, 10).unwrap();
        assert_eq!(v.witness.unwrap().elements, vec!["inf".to_string(), "1".to_string()]);
        let spi = AlgebraModel::SimplePurelyInfinite.scaled().unwrap();
        assert!(has_cn(&ScaledCu::Component(spi), 1, 10).unwrap().is_true());
    }

    #[test]
    fn simplicity_on_components() {
        let spi = AlgebraModel::SimplePurelyInfinite.scaled().unwrap();
        assert!(is_simple(&ScaledCu::Component(spi), 10).unwrap().is_true());
        assert!(is_simple(&ScaledCu::Component(m(3)), 10).unwrap().is_true());
        let t2 = Builtin::TruncNat { k: 2 }.to_structure().unwrap();
        let sq = cu_product_finite(&[t2.clone(), t2]).unwrap().0;
        let c = ScaledComponent::trivial(Component::finite(sq).unwrap()).unwrap();
        let v = is_simple(&ScaledCu::Component(c), 10).unwrap();
        assert!(v.is_false());
        let o6 = ScaledComponent::finite(o6_example(), vec![true, true, false, false]).unwrap();
        let v = is_simple(&ScaledCu::Component(o6.clone()), 10).unwrap();
        assert_eq!(v.witness.unwrap().elements, vec!["inf".to_string(), "y".to_string()]);
        assert!(has_cn(&ScaledCu::Component(o6), 1, 10).unwrap().is_true());
    }

    #[test]
    fn products_of_two_nonzero_components_are_not_simple() {
        let fam = ScaledFamily::list(vec![m(1), m(1)]);
        let p = scaled_product(fam);
        assert!(is_simple(&p, 100).unwrap().is_false());
        assert!(has_cn(&p, 5, 100).unwrap().is_false());
    }

    #[test]
    fn ultrapower_cn_follows_components() {
        let u = UltrafilterOracle::dyadic(0, 3).unwrap();
        let s = scaled_ultraproduct(constant(m(3)), u.clone()).unwrap();
        assert!(has_cn(&s, 3, 100).unwrap().is_true());
        assert!(has_cn(&s, 2, 100).unwrap().is_false());
        assert!(is_simple(&s, 100).unwrap().is_true());
        let full = ScaledComponent::trivial(Component::Builtin(Builtin::ExtNat)).unwrap();
        let s = scaled_ultraproduct(constant(full), u).unwrap();
        assert!(has_cn(&s, 7, 100).unwrap().is_false());
    }

    /// `2n·x = n·x` by iterated addition.
    fn pi_n_oracle(s: &Structure, n: u64) -> bool {
        s.elements().all(|x| {
            let mut acc = s.zero();
            let mut seen = Vec::new();
            for _ in 0..2 * n {
                acc = s.add(acc, x);
                seen.push(acc);
            }
            seen[(n - 1) as usize] == seen[(2 * n - 1) as usize]
        })
    }

    #[test]
    fn pi_n_agrees_with_iterated_sums() {
        for k in 1..6 {
            let t = Builtin::TruncNat { k }.to_structure().unwrap();
            assert!(is_pi_n(&t, k).is_true());
            for n in 1..8 {
                assert_eq!(is_pi_n(&t, n).is_true(), pi_n_oracle(&t, n), "k={k} n={n}");
            }
            assert_eq!(is_weakly_purely_infinite(&t), Some(k));
        }
        assert!(is_pi_n(&Builtin::TwoPoint.to_structure().unwrap(), 1).is_true());
        assert!(builtin_is_pi_n(Builtin::ExtNat, 3).is_false());
    }

    /// Comparability by definition with multipliers up to `|S|²`.
    fn comparability_oracle(s: &Structure, kind: Comparability) -> bool {
        let big = (s.len() * s.len()) as u64;
        let mul = |x: usize, n: u64| (0..n).fold(s.zero(), |a, _| s.add(a, x));
        s.elements().all(|x| {
            s.elements().all(|y| {
                let hyp = match kind {
                    Comparability::Unperforated => (1..=big).any(|n| s.leq(mul(x, n), mul(y, n))),
                    Comparability::Almost => (1..=big).any(|n| s.leq(mul(x, n + 1), mul(y, n))),
                    Comparability::Near => (big..=2 * big).all(|n| s.leq(mul(x, n), mul(y, n))),
                };
                !hyp || s.leq(x, y)
            })
        })
    }

    #[test]
    fn comparability_matches_definition_on_corpus() {
        for (name, s) in crate::corpus::cu_corpus() {
            for kind in [Comparability::Unperforated, Comparability::Almost, Comparability::Near] {
                assert_eq!(comparability_check(&s, kind).is_true(), comparability_oracle(&s, kind), "{name} {kind:?}");
            }
        }
        for (name, s) in perforated() {
            assert!(comparability_check(&s, Comparability::Unperforated).is_false(), "{name}");
        }
    }

    #[test]
    fn total_order_checks() {
        let fam = Family::constant(Component::Builtin(Builtin::ExtNat), Index::Finite { size: 2 });
        assert!(totally_ordered(&fam, Filter::All, 10).unwrap().is_false());
        let one = Family::constant(Component::Builtin(Builtin::ExtNat), Index::Finite { size: 1 });
        assert!(totally_ordered(&one, Filter::All, 10).unwrap().is_true());
        let nat = Family::constant(Component::Builtin(Builtin::ExtNat), Index::Naturals);
        let u = UltrafilterOracle::dyadic(3, 3).unwrap();
        assert!(totally_ordered(&nat, Filter::Ultra(&u), 10).unwrap().is_true());
        assert!(totally_ordered(&nat, Filter::All, 10).unwrap().is_false());
        let diamond = Component::finite(crate::corpus::by_name("diamond").unwrap()).unwrap();
        let d = Family::constant(diamond, Index::Naturals);
        assert!(totally_ordered(&d, Filter::Ultra(&u), 10).unwrap().is_false());
    }

    #[test]
    fn murray_von_neumann_bounds() {
        let fam = constant(m(2));
        let v = mvn_semigroup(&fam, None).unwrap();
        let id = anchor(&fam, DescribedFunction::identity());
        let two = anchor(&fam, DescribedFunction::constant(Ext::Fin(2)));
        let zero = ProductElement::zero(fam.family().clone());
        assert!(v.contains(&id, 100).unwrap().is_false());
        assert!(v.contains(&two, 100).unwrap().is_true());
        assert!(v.contains(&zero, 100).unwrap().is_true());
        assert_eq!(v.bound(&two, 5, 100).unwrap(), Some(1));
        let inf = anchor(&fam, DescribedFunction::constant(Ext::Inf));
        assert!(v.contains(&inf, 100).unwrap().is_false());
        let pi = ScaledFamily::constant(AlgebraModel::SimplePurelyInfinite.scaled().unwrap(), Index::Naturals);
        assert!(mvn_semigroup(&pi, None).is_err());
    }

    #[test]
    fn simplicity_clauses() {
        let u = UltrafilterOracle::dyadic(0, 4).unwrap();
        let spi = ScaledFamily::models(&[AlgebraModel::SimplePurelyInfinite], Index::Naturals).unwrap();
        let v = ultrapower_simplicity_verdict(&spi, &u, 100).unwrap();
        assert!(v.simple && v.clause == Clause::PurelyInfinite && v.agrees);
        let m3 = ScaledFamily::models(&[AlgebraModel::MatrixAlgebra(3)], Index::Naturals).unwrap();
        let v = ultrapower_simplicity_verdict(&m3, &u, 100).unwrap();
        assert!(v.simple && v.clause == Clause::Matrix && v.n == Some(3) && v.agrees);
        let alt = ScaledFamily::models(&[AlgebraModel::MatrixAlgebra(1), AlgebraModel::MatrixAlgebra(2)], Index::Naturals)
            .unwrap();
        let v = ultrapower_simplicity_verdict(&alt, &u, 100).unwrap();
        assert!(v.simple && v.n == Some(1) && v.agrees);
        let odd = UltrafilterOracle::dyadic(1, 4).unwrap();
        assert_eq!(ultrapower_simplicity_verdict(&alt, &odd, 100).unwrap().n, Some(2));
        let p = UltrafilterOracle::principal(Index::Naturals, 0).unwrap();
        assert!(ultrapower_simplicity_verdict(&alt, &p, 100).is_err());
    }
}
