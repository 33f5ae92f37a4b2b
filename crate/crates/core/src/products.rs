//! Products of families of Cu-semigroups.
//!
//! An element of `∏_j S_j` is the class of a `≪_pw`-increasing sequence of
//! pointwise-compact levels. Levels are finite sums of terms: the compact
//! approximants of an anchor function, or an explicit chain of described
//! functions; each term carries a multiplicity, possibly `∞`.
//!
//! Order is `x ≤ y` iff every level of `x` lies below some level of `y` on a
//! set of indices belonging to a filter (all indices for the product, the
//! cofinite filter for the quotient by `c₀`, an ultrafilter for the quotient
//! by `c_U`). Exact forms make this decidable: beyond an aligned start,
//! every level is affine on each residue class modulo an aligned period, and
//! the dominating levels of `y` either stabilise or grow on whole classes.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::colimits::{componentwise, Diagram, Tuples};
use crate::completions::{tau_complete, Map};
use crate::described::{lcm, DescribedFunction, Index, PeriodicSet};
use crate::error::{Error, Result};
use crate::ordered::{check_cu_axioms, Builtin, Ext, Structure};
use crate::tri::{Verdict, Witness};
use crate::ultra::UltrafilterOracle;

/// A factor of a product: a builtin or a finite Cu-structure (values are element indices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    Builtin(Builtin),
    Finite(Arc<Structure>),
}

impl Component {
    pub fn finite(s: Structure) -> Result<Self> {
        if let Err(v) = check_cu_axioms(&s) {
            return Err(Error::Rejected(format!("component fails {} at {:?}", v.law, v.labels(&s))));
        }
        Ok(Component::Finite(Arc::new(s)))
    }

    pub fn name(&self) -> String {
        match self {
            Component::Builtin(b) => b.name(),
            Component::Finite(s) => format!("finite{{{}}}", s.labels().join(",")),
        }
    }

    pub fn is_extnat(&self) -> bool {
        matches!(self, Component::Builtin(Builtin::ExtNat))
    }

    fn idx(v: Ext) -> usize {
        match v {
            Ext::Fin(i) => i as usize,
            Ext::Inf => usize::MAX,
        }
    }

    pub fn contains(&self, v: Ext) -> bool {
        match self {
            Component::Builtin(b) => b.contains(v),
            Component::Finite(s) => Self::idx(v) < s.len(),
        }
    }

    pub fn zero(&self) -> Ext {
        match self {
            Component::Builtin(_) => Ext::Fin(0),
            Component::Finite(s) => Ext::Fin(s.zero() as u64),
        }
    }

    pub fn add(&self, a: Ext, b: Ext) -> Ext {
        match self {
            Component::Builtin(k) => k.add(a, b),
            Component::Finite(s) => Ext::Fin(s.add(Self::idx(a), Self::idx(b)) as u64),
        }
    }

    pub fn leq(&self, a: Ext, b: Ext) -> bool {
        match self {
            Component::Builtin(k) => k.leq(a, b),
            Component::Finite(s) => s.leq(Self::idx(a), Self::idx(b)),
        }
    }

    pub fn way_below(&self, a: Ext, b: Ext) -> bool {
        match self {
            Component::Builtin(k) => k.way_below(a, b),
            Component::Finite(s) => s.way_below(Self::idx(a), Self::idx(b)),
        }
    }

    pub fn is_compact(&self, a: Ext) -> bool {
        self.way_below(a, a)
    }

    pub fn approx(&self, a: Ext, n: u64) -> Ext {
        match self {
            Component::Builtin(k) => k.approx(a, n),
            Component::Finite(_) => a,
        }
    }

    pub fn mul(&self, a: Ext, k: u64) -> Ext {
        match self {
            Component::Builtin(b) => b.mul(a, k),
            Component::Finite(s) => Ext::Fin(s.mul(Self::idx(a), k) as u64),
        }
    }

    pub fn mul_inf(&self, a: Ext) -> Ext {
        match self {
            Component::Builtin(b) => b.mul_inf(a),
            Component::Finite(s) => Ext::Fin(s.mul_inf(Self::idx(a)) as u64),
        }
    }

    /// `k·a` is constant in `k` from this multiplier on, on finite carriers.
    pub fn stabilization(&self) -> u64 {
        match self {
            Component::Builtin(Builtin::ExtNat) => 0,
            Component::Builtin(Builtin::TwoPoint) => 1,
            Component::Builtin(Builtin::TruncNat { k }) => *k,
            Component::Finite(s) => s.len() as u64,
        }
    }

    pub fn format(&self, v: Ext) -> String {
        match self {
            Component::Builtin(_) => v.to_string(),
            Component::Finite(s) => s.labels().get(Self::idx(v)).cloned().unwrap_or_else(|| "?".into()),
        }
    }

    pub fn parse(&self, token: &str) -> Option<Ext> {
        let v = match self {
            Component::Builtin(_) => match token {
                "inf" | "∞" => Ext::Inf,
                t => Ext::Fin(t.parse().ok()?),
            },
            Component::Finite(s) => Ext::Fin(s.index_of(token)? as u64),
        };
        self.contains(v).then_some(v)
    }

    /// Finite carriers as a structure.
    pub fn structure(&self) -> Option<Structure> {
        match self {
            Component::Builtin(b) => b.to_structure(),
            Component::Finite(s) => Some((**s).clone()),
        }
    }
}

/// A family of components indexed by a finite set or by `ℕ` (eventually periodic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    index: Index,
    prefix: Vec<Component>,
    pattern: Vec<Component>,
}

impl Family {
    pub fn constant(c: Component, index: Index) -> Self {
        match index {
            Index::Finite { size } => Family { index, prefix: vec![c; size as usize], pattern: vec![] },
            Index::Naturals => Family { index, prefix: vec![], pattern: vec![c] },
        }
    }

    pub fn list(components: Vec<Component>) -> Self {
        Family { index: Index::Finite { size: components.len() as u64 }, prefix: components, pattern: vec![] }
    }

    /// Over `ℕ`: `prefix` first, then `pattern` repeated.
    pub fn periodic(prefix: Vec<Component>, pattern: Vec<Component>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Rejected("empty component pattern".into()));
        }
        Ok(Family { index: Index::Naturals, prefix, pattern })
    }

    pub fn index(&self) -> Index {
        self.index
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.index, Index::Finite { .. })
    }

    pub fn component(&self, j: u64) -> &Component {
        let l = self.prefix.len() as u64;
        if j < l {
            &self.prefix[j as usize]
        } else {
            &self.pattern[((j - l) % self.pattern.len() as u64) as usize]
        }
    }

    /// Start and period from which the component depends only on the residue.
    pub fn shape(&self) -> (u64, u64) {
        match self.index {
            Index::Finite { size } => (size, 1),
            Index::Naturals => {
                let p = self.pattern.len() as u64;
                let l = self.prefix.len() as u64;
                (l + (p - l % p) % p, p)
            }
        }
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.prefix.iter().chain(&self.pattern)
    }

    pub fn all_extnat(&self) -> bool {
        self.components().all(Component::is_extnat)
    }

    fn max_stabilization(&self) -> u64 {
        self.components().map(Component::stabilization).max().unwrap_or(0)
    }

    pub fn describe(&self) -> String {
        match self.index {
            Index::Finite { .. } => {
                format!("list({})", self.prefix.iter().map(Component::name).collect::<Vec<_>>().join(", "))
            }
            Index::Naturals if self.prefix.is_empty() && self.pattern.len() == 1 => {
                format!("constant({}) on N", self.pattern[0].name())
            }
            Index::Naturals => format!(
                "periodic([{}], [{}])",
                self.prefix.iter().map(Component::name).collect::<Vec<_>>().join(", "),
                self.pattern.iter().map(Component::name).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

/// Multiplicity of a term; `Growing` is `∞`, realised as multiplier `n` at level `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mult {
    Fin(u64),
    Growing,
}

impl Mult {
    fn at(self, n: u64) -> u64 {
        match self {
            Mult::Fin(k) => k,
            Mult::Growing => n,
        }
    }

    fn times(self, other: Mult) -> Mult {
        match (self, other) {
            (Mult::Fin(0), _) | (_, Mult::Fin(0)) => Mult::Fin(0),
            (Mult::Fin(a), Mult::Fin(b)) => Mult::Fin(a.saturating_mul(b)),
            _ => Mult::Growing,
        }
    }

    fn plus(self, other: Mult) -> Mult {
        match (self, other) {
            (Mult::Fin(a), Mult::Fin(b)) => Mult::Fin(a.saturating_add(b)),
            _ => Mult::Growing,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TermKind {
    /// Level `n` is the `n`-th compact approximant of the anchor.
    Anchor { anchor: DescribedFunction },
    /// Explicit pointwise-compact levels; the last one repeats.
    Chain { levels: Vec<DescribedFunction> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Term {
    pub mult: Mult,
    #[serde(flatten)]
    pub kind: TermKind,
}

impl TermKind {
    fn forms(&self) -> Vec<&DescribedFunction> {
        match self {
            TermKind::Anchor { anchor } => vec![anchor],
            TermKind::Chain { levels } => levels.iter().collect(),
        }
    }

    fn has_slope(&self) -> bool {
        self.forms().iter().any(|f| f.has_slope())
    }
}

/// The class of a chain of levels in a product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductElement {
    family: Arc<Family>,
    terms: Vec<Term>,
}

impl Serialize for ProductElement {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("ProductElement", 2)?;
        st.serialize_field("family", &self.family.describe())?;
        st.serialize_field("terms", &self.terms)?;
        st.end()
    }
}

/// Each value of `f` lies in its component (and is compact if required).
fn check_values(family: &Family, f: &DescribedFunction, compact_only: bool) -> Result<()> {
    let ok = |j: u64, v: Ext| {
        let c = family.component(j);
        c.contains(v) && (!compact_only || c.is_compact(v))
    };
    let fail = |j: u64| {
        Err(Error::Rejected(format!(
            "value {} at index {j} is not {} element of {}",
            f.eval(j),
            if compact_only { "a compact" } else { "an" },
            family.component(j).name()
        )))
    };
    match family.index() {
        Index::Finite { size } => {
            for j in 0..size {
                if !ok(j, f.eval(j)) {
                    return fail(j);
                }
            }
        }
        Index::Naturals => {
            let Some((fs, fp)) = f.shape() else {
                return if family.all_extnat() {
                    Ok(())
                } else {
                    Err(Error::Rejected("opaque rules need an extnat family".into()))
                };
            };
            let (s0, p0) = family.shape();
            let (start, period) = (s0.max(fs), lcm(p0, fp));
            for j in 0..start {
                if !ok(j, f.eval(j)) {
                    return fail(j);
                }
            }
            for rep in start..start + period {
                let (s, o) = f.class_rule(rep).expect("exact form");
                let c = family.component(rep);
                if s > 0 && !c.is_extnat() || s == 0 && !ok(rep, o) {
                    return fail(rep);
                }
            }
        }
    }
    Ok(())
}

/// `f ≤ g` at every index, for functions into component values.
pub fn pointwise_leq(family: &Family, f: &DescribedFunction, g: &DescribedFunction) -> Result<bool> {
    if f == g {
        return Ok(true);
    }
    match family.index() {
        Index::Finite { size } => Ok((0..size).all(|j| family.component(j).leq(f.eval(j), g.eval(j)))),
        Index::Naturals => {
            let (Some((fs, fp)), Some((gs, gp))) = (f.shape(), g.shape()) else {
                return Err(Error::Rejected("pointwise order of opaque rules is not certified".into()));
            };
            let (s0, p0) = family.shape();
            let (start, period) = (s0.max(fs).max(gs), lcm(lcm(p0, fp), gp));
            if !(0..start).all(|j| family.component(j).leq(f.eval(j), g.eval(j))) {
                return Ok(false);
            }
            Ok((start..start + period).all(|rep| {
                let ((a, b), (c, d)) = (f.class_rule(rep).unwrap(), g.class_rule(rep).unwrap());
                let comp = family.component(rep);
                if comp.is_extnat() {
                    a <= c && b.add(Ext::Fin(rep).mul(a)) <= d.add(Ext::Fin(rep).mul(c))
                } else {
                    comp.leq(b, d)
                }
            }))
        }
    }
}

impl ProductElement {
    pub fn zero(family: Arc<Family>) -> Self {
        ProductElement { family, terms: vec![] }
    }

    /// The element whose level `n` is the `n`-th compact approximant of `anchor`:
    /// compact anchor values are kept, `∞` in `ℕ̄` becomes `n`.
    pub fn anchor(family: Arc<Family>, anchor: DescribedFunction) -> Result<Self> {
        check_values(&family, &anchor, false)?;
        Ok(ProductElement { family, terms: vec![Term { mult: Mult::Fin(1), kind: TermKind::Anchor { anchor } }] }
            .normalized())
    }

    /// The element with the given increasing pointwise-compact levels; the last one repeats.
    pub fn chain(family: Arc<Family>, levels: Vec<DescribedFunction>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Rejected("a chain needs at least one level".into()));
        }
        for f in &levels {
            check_values(&family, f, true)?;
        }
        let mut kept: Vec<DescribedFunction> = vec![levels[0].clone()];
        for (k, f) in levels.iter().enumerate().skip(1) {
            let last = kept.last().unwrap();
            if !pointwise_leq(&family, last, f)? {
                return Err(Error::Rejected(format!("level {k} is not above level {}", k - 1)));
            }
            if !pointwise_leq(&family, f, last)? {
                kept.push(f.clone());
            }
        }
        Ok(ProductElement { family, terms: vec![Term { mult: Mult::Fin(1), kind: TermKind::Chain { levels: kept } }] }
            .normalized())
    }

    pub fn family(&self) -> &Arc<Family> {
        &self.family
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn normalized(mut self) -> Self {
        let mut merged: Vec<Term> = Vec::new();
        for t in self.terms.drain(..) {
            if t.mult == Mult::Fin(0) {
                continue;
            }
            match merged.iter_mut().find(|m| m.kind == t.kind) {
                Some(m) => m.mult = m.mult.plus(t.mult),
                None => merged.push(t),
            }
        }
        self.terms = merged;
        self
    }

    fn same_family(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.family, &other.family) || self.family == other.family {
            Ok(())
        } else {
            Err(Error::FamilyMismatch(format!("{} vs {}", self.family.describe(), other.family.describe())))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_family(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(ProductElement { family: self.family.clone(), terms }.normalized())
    }

    /// `k·x`.
    pub fn scale(&self, k: u64) -> Self {
        let terms = self.terms.iter().map(|t| Term { mult: t.mult.times(Mult::Fin(k)), kind: t.kind.clone() }).collect();
        ProductElement { family: self.family.clone(), terms }.normalized()
    }

    /// `∞·x`; terms with affine slopes are rejected.
    pub fn times_inf(&self) -> Result<Self> {
        if self.terms.iter().any(|t| t.kind.has_slope()) {
            return Err(Error::Rejected("infinite multiples of sloped rules are not supported".into()));
        }
        let terms = self.terms.iter().map(|t| Term { mult: t.mult.times(Mult::Growing), kind: t.kind.clone() }).collect();
        Ok(ProductElement { family: self.family.clone(), terms }.normalized())
    }

    pub fn is_exact(&self) -> bool {
        self.forms().all(DescribedFunction::is_exact)
    }

    fn forms(&self) -> impl Iterator<Item = &DescribedFunction> {
        self.terms.iter().flat_map(|t| t.kind.forms())
    }

    /// From this level on, only coordinates growing without bound in `ℕ̄` change.
    pub fn stable_point(&self) -> u64 {
        let chains = self
            .terms
            .iter()
            .map(|t| match &t.kind {
                TermKind::Chain { levels } => levels.len() as u64 - 1,
                TermKind::Anchor { .. } => 0,
            })
            .max()
            .unwrap_or(0);
        let growing = self.terms.iter().any(|t| t.mult == Mult::Growing);
        chains + if growing { self.family.max_stabilization() } else { 0 } + 1
    }

    fn base(&self, t: &Term, n: u64) -> impl Fn(&Component, Ext) -> Ext + '_ {
        let anchor = matches!(t.kind, TermKind::Anchor { .. });
        move |c: &Component, v: Ext| if anchor { c.approx(v, n) } else { v }
    }

    fn level_form(t: &Term, n: u64) -> &DescribedFunction {
        match &t.kind {
            TermKind::Anchor { anchor } => anchor,
            TermKind::Chain { levels } => &levels[(n as usize).min(levels.len() - 1)],
        }
    }

    /// Level `n` at index `j`.
    pub fn value(&self, n: u64, j: u64) -> Ext {
        let c = self.family.component(j);
        self.terms.iter().fold(c.zero(), |acc, t| {
            let v = self.base(t, n)(c, Self::level_form(t, n).eval(j));
            c.add(acc, c.mul(v, t.mult.at(n)))
        })
    }

    /// `(slope, offset)` of level `n` on the residue class of `rep`, for aligned classes.
    pub(crate) fn class_value(&self, n: u64, rep: u64) -> Option<(u64, Ext)> {
        let c = self.family.component(rep);
        let mut acc = (0u64, c.zero());
        for t in &self.terms {
            let (s, o) = Self::level_form(t, n).class_rule(rep)?;
            let o = if s == 0 { self.base(t, n)(c, o) } else { o };
            let k = t.mult.at(n);
            acc = if c.is_extnat() {
                (acc.0 + s.saturating_mul(k), acc.1.add(o.mul(k)))
            } else {
                (0, c.add(acc.1, c.mul(o, k)))
            };
        }
        Some(acc)
    }

    /// Start and period aligning the family and every form; `None` with opaque forms.
    pub(crate) fn shape(&self) -> Option<(u64, u64)> {
        let mut sp = self.family.shape();
        for f in self.forms() {
            let (s, p) = f.shape()?;
            sp = (sp.0.max(s), lcm(sp.1, p));
        }
        Some(sp)
    }

    /// The stable level as a function, for compact elements of the full product.
    pub fn stable_level(&self) -> Result<DescribedFunction> {
        let n = self.stable_point();
        match self.family.index() {
            Index::Finite { size } => Ok(DescribedFunction::FiniteSupport {
                default: Ext::Fin(0),
                overrides: (0..size).map(|j| (j, self.value(n, j))).collect(),
            }),
            Index::Naturals => {
                let (s, p) = self.shape().ok_or_else(|| Error::Rejected("opaque level".into()))?;
                let classes: Vec<(u64, Ext)> = (s..s + p).map(|r| self.class_value(n, r).unwrap()).collect();
                if classes.iter().all(|c| c.0 == 0) {
                    return DescribedFunction::periodic(
                        (0..s).map(|j| self.value(n, j)).collect(),
                        classes.iter().map(|c| c.1).collect(),
                    );
                }
                match (s, classes.as_slice()) {
                    (0, [(a, Ext::Fin(b))]) => Ok(DescribedFunction::Linear { slope: *a, offset: *b, on: None }),
                    _ => Err(Error::Rejected("stable level mixes slopes across classes".into())),
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|t| {
                let m = match t.mult {
                    Mult::Fin(1) => String::new(),
                    Mult::Fin(k) => format!("{k}*"),
                    Mult::Growing => "inf*".into(),
                };
                let body = match &t.kind {
                    TermKind::Anchor { anchor } => format!("anchor({})", describe_fn(anchor)),
                    TermKind::Chain { levels } => {
                        format!("chain[{}]", levels.iter().map(describe_fn).collect::<Vec<_>>().join(", "))
                    }
                };
                m + &body
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for ProductElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

pub fn describe_fn(f: &DescribedFunction) -> String {
    let vals = |v: &[Ext]| v.iter().map(Ext::to_string).collect::<Vec<_>>().join(",");
    match f {
        DescribedFunction::FiniteSupport { default, overrides } if overrides.is_empty() => format!("const {default}"),
        DescribedFunction::FiniteSupport { default, overrides } => format!(
            "default {default} at {{{}}}",
            overrides.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(",")
        ),
        DescribedFunction::EventuallyPeriodic { prefix, pattern } => {
            format!("periodic [{}] [{}]", vals(prefix), vals(pattern))
        }
        DescribedFunction::Linear { slope, offset, on } => {
            let mask = on.as_ref().map_or(String::new(), |s| format!(" on {s:?}"));
            format!("linear {slope} {offset}{mask}")
        }
        DescribedFunction::Opaque { seed, modulus } => format!("opaque {seed} {modulus}"),
    }
}

/// Sets of indices on which domination is required.
#[derive(Clone, Copy, Debug)]
pub enum Filter<'a> {
    /// Every index: the order of the product.
    All,
    /// Cofinite sets: the quotient by `c₀`.
    Cofinite,
    /// An ultrafilter: the quotient by `c_U`.
    Ultra(&'a UltrafilterOracle),
    /// Every set including `∅`: the quotient by the whole product.
    Everything,
}

/// The dominating side of a comparison: `y`, optionally raised to `∞` on a
/// set of `ℕ̄` coordinates where any finite value is admissible.
struct Upper<'a> {
    y: &'a ProductElement,
    top: Option<&'a PeriodicSet>,
    m: u64,
}

impl<'a> Upper<'a> {
    fn new(y: &'a ProductElement, top: Option<&'a PeriodicSet>) -> Self {
        Upper { y, top, m: y.stable_point() }
    }

    fn topped(&self, j: u64) -> bool {
        self.top.is_some_and(|t| t.contains(j))
    }

    /// Supremum of `y` at `j` as (value at the stable point, grows beyond it).
    fn at(&self, j: u64) -> (Ext, bool) {
        if self.topped(j) {
            return (Ext::Inf, false);
        }
        let v = self.y.value(self.m, j);
        (v, self.y.value(self.m + 1, j) != v)
    }

    fn class_at(&self, rep: u64) -> (u64, Ext, bool) {
        if self.topped(rep) {
            return (0, Ext::Inf, false);
        }
        let (a, b) = self.y.class_value(self.m, rep).expect("exact form");
        let (_, b1) = self.y.class_value(self.m + 1, rep).expect("exact form");
        (a, b, b1 != b)
    }
}

struct ClassVerdict {
    rep: u64,
    uniform: bool,
    eventual: bool,
    /// Smallest index of the class refuted outright.
    first_bad: Option<u64>,
}

struct Comparison<'a> {
    family: &'a Family,
    x: &'a ProductElement,
    upper: Upper<'a>,
    /// `(start, period)` when every form is exact.
    plan: Option<(u64, u64)>,
}

impl<'a> Comparison<'a> {
    fn new(x: &'a ProductElement, y: &'a ProductElement, top: Option<&'a PeriodicSet>) -> Result<Self> {
        x.same_family(y)?;
        let plan = match (x.shape(), y.shape()) {
            (Some(a), Some(b)) => {
                let mut p = (a.0.max(b.0), lcm(a.1, b.1));
                if let Some(t) = top {
                    p = (p.0.max(t.start()), lcm(p.1, t.period()));
                }
                Some(p)
            }
            _ => None,
        };
        Ok(Comparison { family: &x.family, x, upper: Upper::new(y, top), plan })
    }

    /// `x_n(j)` is below some level of `y` at `j`.
    fn good_at(&self, n: u64, j: u64) -> bool {
        let c = self.family.component(j);
        let xv = self.x.value(n, j);
        let (yv, grows) = self.upper.at(j);
        if c.is_extnat() {
            xv != Ext::Inf && (grows || xv <= yv)
        } else {
            c.leq(xv, yv)
        }
    }

    fn class_verdict(&self, n: u64, rep: u64, period: u64) -> ClassVerdict {
        let c = self.family.component(rep);
        let (ax, bx) = self.x.class_value(n, rep).expect("exact form");
        let (ay, by, grows) = self.upper.class_at(rep);
        let bad = |first_bad| ClassVerdict { rep, uniform: false, eventual: false, first_bad };
        if !c.is_extnat() {
            let ok = c.leq(bx, by);
            return ClassVerdict { rep, uniform: ok, eventual: ok, first_bad: (!ok).then_some(rep) };
        }
        let Ext::Fin(bx) = bx else { return bad(Some(rep)) };
        let Ext::Fin(by) = by else { return ClassVerdict { rep, uniform: true, eventual: true, first_bad: None } };
        if ax > ay {
            if grows {
                return bad(None);
            }
            // first j ≥ rep, j ≡ rep, with (ax-ay)·j > by - bx
            let t = if by < bx { 0 } else { (by - bx) / (ax - ay) + 1 };
            let j = if t <= rep { rep } else { rep + (t - rep).div_ceil(period) * period };
            return bad(Some(j));
        }
        let at_rep = |a: u64, b: u64| (a as u128) * (rep as u128) + b as u128;
        let uniform = grows || at_rep(ax, bx) <= at_rep(ay, by);
        let eventual = ax < ay || grows || bx <= by;
        ClassVerdict { rep, uniform, eventual, first_bad: (!uniform).then_some(rep) }
    }

    fn prefix_len(&self) -> u64 {
        match self.family.index() {
            Index::Finite { size } => size,
            Index::Naturals => self.plan.map_or(0, |p| p.0),
        }
    }

    fn classes(&self, n: u64) -> Vec<ClassVerdict> {
        match (self.family.index(), self.plan) {
            (Index::Naturals, Some((s, p))) => (s..s + p).map(|r| self.class_verdict(n, r, p)).collect(),
            _ => vec![],
        }
    }

    /// Level `n` is dominated on a filter set.
    fn level_ok(&self, n: u64, filter: Filter) -> Result<bool> {
        Ok(match filter {
            Filter::Everything => true,
            Filter::All => {
                (0..self.prefix_len()).all(|j| self.good_at(n, j)) && self.classes(n).iter().all(|c| c.uniform)
            }
            Filter::Cofinite => self.classes(n).iter().all(|c| c.eventual),
            Filter::Ultra(u) => match u.principal_point() {
                Some(j0) => self.good_at(n, j0),
                None => {
                    let (_, p) = self.plan.ok_or_else(|| Error::Internal("free filter without plan".into()))?;
                    u.contains(&self.good_set(n, p))?
                }
            },
        })
    }

    /// The indices dominated at level `n`, up to a finite set.
    fn good_set(&self, n: u64, period: u64) -> PeriodicSet {
        let mut pattern = vec![false; period as usize];
        for c in self.classes(n) {
            pattern[(c.rep % period) as usize] = c.eventual;
        }
        PeriodicSet { prefix: vec![], pattern }
    }

    /// Levels from this one on give the same verdict.
    fn horizon(&self, indices: impl Iterator<Item = u64>) -> u64 {
        let bound = indices.filter_map(|j| self.upper.at(j).0.finite()).max().unwrap_or(0);
        self.x.stable_point().saturating_add(bound).saturating_add(2)
    }

    fn witness(&self, n: u64, filter: Filter) -> Witness {
        match filter {
            Filter::All => {
                let prefix = (0..self.prefix_len()).find(|&j| !self.good_at(n, j));
                let classes = self.classes(n);
                let bad: Vec<&ClassVerdict> = classes.iter().filter(|c| !c.uniform).collect();
                let idx = prefix.into_iter().chain(bad.iter().filter_map(|c| c.first_bad)).min();
                match (idx, bad.first()) {
                    (Some(j), _) => Witness::at(format!("level {n} is not dominated at index {j}"), n, Some(j)),
                    (None, Some(c)) => Witness::at(
                        format!("level {n} outgrows every level on the residue class of {}", c.rep),
                        n,
                        None,
                    ),
                    (None, None) => Witness::at(format!("level {n} is not dominated"), n, None),
                }
            }
            Filter::Cofinite => {
                let classes = self.classes(n);
                let c = classes.iter().find(|c| !c.eventual);
                Witness::at(
                    format!(
                        "level {n} fails on the infinite residue class of {}",
                        c.map_or(0, |c| c.rep)
                    ),
                    n,
                    c.and_then(|c| c.first_bad),
                )
            }
            Filter::Ultra(u) => match u.principal_point() {
                Some(j0) => Witness::at(format!("level {n} is not dominated at index {j0}"), n, Some(j0)),
                None => Witness::at(format!("level {n} is dominated only on a set outside the ultrafilter"), n, None),
            },
            Filter::Everything => Witness::text("unreachable"),
        }
    }

    fn decide_exact(&self, filter: Filter) -> Result<Verdict> {
        let indices: Box<dyn Iterator<Item = u64>> = match (self.family.index(), self.plan, filter) {
            (_, _, Filter::Ultra(u)) if u.principal_point().is_some() => Box::new(u.principal_point().into_iter()),
            (Index::Finite { size }, _, _) => Box::new(0..size),
            (Index::Naturals, Some((s, p)), _) => Box::new(0..s + p),
            (Index::Naturals, None, _) => return Err(Error::Internal("exact decision without plan".into())),
        };
        let hi = self.horizon(indices);
        if self.level_ok(hi, filter)? {
            return Ok(Verdict::yes());
        }
        let (mut lo, mut hi) = (0, hi);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.level_ok(mid, filter)? {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(Verdict::no(self.witness(lo, filter)))
    }

    fn decide(&self, filter: Filter, budget: u64) -> Result<Verdict> {
        if matches!(filter, Filter::Everything) {
            return Ok(Verdict::yes());
        }
        let principal = matches!(filter, Filter::Ultra(u) if u.principal_point().is_some());
        if self.plan.is_some() || self.family.is_finite() || principal {
            return self.decide_exact(filter);
        }
        match filter {
            Filter::Ultra(_) => Err(Error::Undecidable("opaque rules have no certified residue structure".into())),
            Filter::All => {
                let mut spent = 0;
                for t in 0u64.. {
                    for n in 0..=t {
                        if spent >= budget {
                            return Ok(Verdict::unknown(spent, (n, self.upper.m)));
                        }
                        spent += 1;
                        let j = t - n;
                        if !self.good_at(n, j) {
                            let w = Witness::at(format!("level {n} is not dominated at index {j}"), n, Some(j));
                            return Ok(Verdict::no(w).with_spent(spent));
                        }
                    }
                }
                unreachable!()
            }
            _ => Ok(Verdict::unknown(0, (0, self.upper.m))),
        }
    }
}

/// `x ≤ y` in the product.
pub fn product_leq(x: &ProductElement, y: &ProductElement, budget: u64) -> Result<Verdict> {
    filtered_leq(x, y, Filter::All, budget)
}

/// `[x] ≤ [y]` in the quotient given by a filter: `∀n ∃m` with level `n` of `x`
/// below level `m` of `y` on a filter set.
pub fn filtered_leq(x: &ProductElement, y: &ProductElement, filter: Filter, budget: u64) -> Result<Verdict> {
    if x == y || x.terms.is_empty() {
        x.same_family(y)?;
        return Ok(Verdict::yes());
    }
    Comparison::new(x, y, None)?.decide(filter, budget)
}

/// `x ≤ y` where `y` is raised to `∞` on the `ℕ̄` coordinates in `top`.
pub(crate) fn leq_with_top(x: &ProductElement, y: &ProductElement, top: &PeriodicSet, filter: Filter, budget: u64) -> Result<Verdict> {
    Comparison::new(x, y, Some(top))?.decide(filter, budget)
}

/// Indices `j` with `x_n(j) ≠ 0` for the levels `n` past the stable point,
/// which contain the supports of all levels.
pub(crate) fn eventual_support(x: &ProductElement) -> Option<PeriodicSet> {
    let n = x.stable_point();
    let fam = &x.family;
    let nonzero = |j: u64| x.value(n, j) != fam.component(j).zero();
    match fam.index() {
        Index::Finite { size } => Some(PeriodicSet { prefix: (0..size).map(nonzero).collect(), pattern: vec![false] }),
        Index::Naturals => {
            let (s, p) = x.shape()?;
            let prefix = (0..s).map(nonzero).collect();
            let mut pattern = vec![false; p as usize];
            for rep in s..s + p {
                let (a, b) = x.class_value(n, rep)?;
                pattern[(rep % p) as usize] = a > 0 || b != fam.component(rep).zero();
            }
            Some(PeriodicSet { prefix, pattern }.normalized())
        }
    }
}

/// Indices at which the levels keep growing.
pub(crate) fn growth_set(x: &ProductElement) -> Option<PeriodicSet> {
    let n = x.stable_point();
    let fam = &x.family;
    let grows = |j: u64| x.value(n + 1, j) != x.value(n, j);
    match fam.index() {
        Index::Finite { size } => Some(PeriodicSet { prefix: (0..size).map(grows).collect(), pattern: vec![false] }),
        Index::Naturals => {
            let (s, p) = x.shape()?;
            let prefix = (0..s).map(grows).collect();
            let mut pattern = vec![false; p as usize];
            for rep in s..s + p {
                pattern[(rep % p) as usize] = x.class_value(n + 1, rep)? != x.class_value(n, rep)?;
            }
            Some(PeriodicSet { prefix, pattern }.normalized())
        }
    }
}

/// `x ≪ x` in the quotient given by the filter: the indices where the levels
/// stabilise form a filter set.
pub fn filtered_is_compact(x: &ProductElement, filter: Filter, budget: u64) -> Result<Verdict> {
    let n = x.stable_point();
    let grows = |j: u64| x.value(n + 1, j) != x.value(n, j);
    let witness = |j: u64| Witness::at(format!("levels keep growing at index {j}"), n, Some(j));
    if let Filter::Ultra(u) = filter {
        if let Some(j0) = u.principal_point() {
            return Ok(Verdict::from_bool(!grows(j0), || witness(j0)));
        }
    }
    let Some(g) = growth_set(x) else {
        return match filter {
            Filter::Everything => Ok(Verdict::yes()),
            Filter::Ultra(_) => Err(Error::Undecidable("opaque rules have no certified residue structure".into())),
            Filter::All => {
                for j in 0..budget {
                    if grows(j) {
                        return Ok(Verdict::no(witness(j)).with_spent(j + 1));
                    }
                }
                Ok(Verdict::unknown(budget, (n, n)))
            }
            Filter::Cofinite => Ok(Verdict::unknown(0, (n, n))),
        };
    };
    // Only consulted when the growth set is nonempty; the bound covers every residue class.
    let found = || {
        (0..g.start() + 64 * g.period())
            .find(|&j| g.contains(j) && x.family.index().contains(j))
            .map_or_else(|| Witness::text("levels keep growing"), witness)
    };
    Ok(match filter {
        Filter::All => Verdict::from_bool(g.prefix.iter().all(|b| !b) && g.is_finite(), found),
        Filter::Cofinite => Verdict::from_bool(x.family.is_finite() || g.is_finite(), || {
            let rep = (g.start()..).find(|&j| g.contains(j)).unwrap_or(0);
            witness(rep)
        }),
        Filter::Ultra(u) => Verdict::from_bool(u.contains(&g.complement())?, || {
            Witness::at("the levels grow on a set in the ultrafilter", n, None)
        }),
        Filter::Everything => Verdict::yes(),
    })
}

pub fn is_compact(x: &ProductElement, budget: u64) -> Result<Verdict> {
    filtered_is_compact(x, Filter::All, budget)
}

/// Every level has finite support.
pub fn c0_membership(x: &ProductElement) -> Verdict {
    match eventual_support(x) {
        None => Verdict::unknown(0, (x.stable_point(), 0)),
        Some(s) => {
            let n = x.stable_point();
            Verdict::from_bool(x.family.is_finite() || s.is_finite(), || {
                let j = (s.start()..).find(|&j| s.contains(j)).unwrap_or(0);
                Witness::at(format!("level {n} is nonzero on the residue class of {j}"), n, Some(j))
            })
        }
    }
}

/// The compact element of the product corresponding to a function into component compacts.
pub fn compact_from_function(family: Arc<Family>, f: DescribedFunction) -> Result<ProductElement> {
    ProductElement::chain(family, vec![f])
}

/// The finite product with componentwise structure and its projections.
pub fn cu_product_finite(family: &[Structure]) -> Result<(Structure, Vec<Map>)> {
    for s in family {
        if let Err(v) = check_cu_axioms(s) {
            return Err(Error::Rejected(format!("factor fails {} at {:?}", v.law, v.labels(s))));
        }
    }
    let (p, tuples) = componentwise(family, false)?;
    let projections = (0..family.len()).map(|i| p.elements().map(|k| tuples.coord(k, i)).collect()).collect();
    Ok((p, projections))
}

/// The Q-limit: compatible tuples with componentwise order, addition and `≪_pw`.
pub fn q_limit(d: &Diagram) -> Result<(Structure, Vec<Map>)> {
    let (full, tuples) = componentwise(&d.nodes, true)?;
    let compatible = |k: usize| {
        d.arrows.iter().all(|a| a.map[tuples.coord(k, a.source)] == tuples.coord(k, a.target))
    };
    let keep: Vec<usize> = full.elements().filter(|&k| compatible(k)).collect();
    let (s, kept) = full.substructure(&keep)?;
    let projections = (0..d.nodes.len()).map(|i| kept.iter().map(|&k| tuples.coord(k, i)).collect()).collect();
    Ok((s, projections))
}

#[derive(Clone, Debug)]
pub struct CuLimit {
    pub structure: Structure,
    pub projections: Vec<Map>,
}

/// τ of the Q-limit; projections are evaluated at class representatives.
pub fn cu_limit(d: &Diagram) -> Result<CuLimit> {
    let (q, proj) = q_limit(d)?;
    let t = tau_complete(&q)?;
    let projections = proj.iter().map(|p| t.endpoint.iter().map(|&r| p[r]).collect()).collect();
    Ok(CuLimit { structure: t.structure, projections })
}

/// Tuples of component elements for a finite family of finite components.
pub fn finite_tuples(family: &Family) -> Result<Vec<Vec<Ext>>> {
    let Index::Finite { size } = family.index() else {
        return Err(Error::Rejected("finite tuples need a finite index".into()));
    };
    let elems: Vec<Vec<Ext>> = (0..size)
        .map(|j| {
            family
                .component(j)
                .structure()
                .map(|s| s.elements().map(|i| Ext::Fin(i as u64)).collect())
                .ok_or_else(|| Error::Rejected("finite tuples need finite components".into()))
        })
        .collect::<Result<_>>()?;
    let t = Tuples::new(&elems.iter().map(Vec::len).collect::<Vec<_>>())?;
    Ok((0..t.len()).map(|k| t.decode(k).iter().enumerate().map(|(j, &i)| elems[j][i]).collect()).collect())
}

/// A tuple as a finitely supported function.
pub fn tuple_function(values: &[Ext]) -> DescribedFunction {
    DescribedFunction::FiniteSupport {
        default: Ext::Fin(0),
        overrides: values.iter().enumerate().map(|(j, &v)| (j as u64, v)).collect::<BTreeMap<_, _>>(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extnat_family() -> Arc<Family> {
        Arc::new(Family::constant(Component::Builtin(Builtin::ExtNat), Index::Naturals))
    }

    fn lin(slope: u64, offset: u64) -> DescribedFunction {
        DescribedFunction::Linear { slope, offset, on: None }
    }

    #[test]
    fn anchors_keep_compact_values() {
        let f = extnat_family();
        let g = ProductElement::anchor(f.clone(), DescribedFunction::identity()).unwrap();
        assert_eq!(g.value(0, 7), Ext::Fin(7));
        let top = ProductElement::anchor(f, DescribedFunction::constant(Ext::Inf)).unwrap();
        assert_eq!(top.value(5, 7), Ext::Fin(5));
    }

    #[test]
    fn identity_is_not_below_multiples_of_the_unit() {
        let f = extnat_family();
        let g = ProductElement::anchor(f.clone(), DescribedFunction::identity()).unwrap();
        let u = ProductElement::anchor(f, DescribedFunction::constant(Ext::Fin(1))).unwrap();
        for n in 1..=20 {
            let v = product_leq(&g, &u.scale(n), 100).unwrap();
            assert!(v.is_false());
            assert_eq!(v.witness.unwrap().index, Some(n + 1));
        }
        assert!(product_leq(&u, &g.add(&u).unwrap(), 100).unwrap().is_true());
        assert!(product_leq(&g, &u.times_inf().unwrap(), 100).unwrap().is_false());
    }

    #[test]
    fn slopes_compare_per_residue_class() {
        let f = extnat_family();
        let a = ProductElement::anchor(f.clone(), lin(2, 0)).unwrap();
        let b = ProductElement::anchor(f.clone(), lin(1, 5)).unwrap();
        let v = product_leq(&a, &b, 100).unwrap();
        assert_eq!(v.witness.unwrap().index, Some(6));
        assert!(filtered_leq(&b, &a, Filter::Cofinite, 100).unwrap().is_true());
        assert!(product_leq(&b, &a, 100).unwrap().is_false());
    }

    #[test]
    fn infinite_anchor_is_not_compact() {
        let f = extnat_family();
        let top = ProductElement::anchor(f.clone(), DescribedFunction::constant(Ext::Inf)).unwrap();
        assert!(is_compact(&top, 10).unwrap().is_false());
        let one = ProductElement::anchor(f.clone(), DescribedFunction::constant(Ext::Fin(1))).unwrap();
        assert!(is_compact(&one, 10).unwrap().is_true());
        assert!(is_compact(&ProductElement::zero(f), 10).unwrap().is_true());
    }

    #[test]
    fn finite_products_are_componentwise() {
        let two = Builtin::TwoPoint.to_structure().unwrap();
        let t2 = Builtin::TruncNat { k: 2 }.to_structure().unwrap();
        let (p, proj) = cu_product_finite(&[t2.clone(), t2]).unwrap();
        assert_eq!(p.len(), 9);
        assert_eq!(proj.len(), 2);
        let (q, _) = cu_product_finite(&[two]).unwrap();
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn opaque_comparisons_exhaust_the_budget() {
        let f = extnat_family();
        let a = ProductElement::anchor(f.clone(), DescribedFunction::Opaque { seed: 1, modulus: 5 }).unwrap();
        let b = ProductElement::anchor(f, DescribedFunction::Opaque { seed: 2, modulus: 5 }).unwrap();
        let v = product_leq(&a, &b.scale(10), 100).unwrap();
        assert!(v.is_unknown());
        assert_eq!(v.budget_spent, 100);
    }

    #[test]
    fn support_rule_for_c0() {
        let f = extnat_family();
        let fin = ProductElement::anchor(f.clone(), tuple_function(&[Ext::Fin(1), Ext::Fin(0), Ext::Inf])).unwrap();
        assert!(c0_membership(&fin).is_true());
        let one = ProductElement::anchor(f.clone(), DescribedFunction::constant(Ext::Fin(1))).unwrap();
        assert!(c0_membership(&one).is_false());
        let per = DescribedFunction::periodic(vec![], vec![Ext::Fin(0), Ext::Fin(2)]).unwrap();
        assert!(c0_membership(&ProductElement::anchor(f, per).unwrap()).is_false());
    }
}
