//! Statement-by-statement evaluation into a JSON report.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value as Json};

use super::ast::*;
use super::lexer::Span;
use super::printer;
use super::{Config, Diagnostic, SCHEMA};
use crate::colimits::{cu_colimit, w_coequalizer, Arrow, Diagram, WMorphismPair};
use crate::completions::{antisymmetrize, gamma_complete, iota, tau_complete, Map};
use crate::described::{DescribedFunction, Index, PeriodicSet};
use crate::error::Error;
use crate::ordered::{
    check_aux_laws, check_cu_axioms, check_o6, check_pom_axioms, check_q_axioms, check_w_axioms, compacts, Builtin,
    Ext, Report as LawReport, Structure,
};
use crate::products::{cu_limit, cu_product_finite, filtered_leq, Component, Family, Filter, ProductElement};
use crate::relation::Relation;
use crate::scales::{
    builtin_is_pi_n, comparability_check, has_cn, is_pi_n, is_simple, is_weakly_purely_infinite, mvn_semigroup,
    scaled_comparability, scaled_product, scaled_ultraproduct, totally_ordered, ultrapower_simplicity_verdict,
    AlgebraModel, Comparability, Scale, ScaledComponent, ScaledCu, ScaledFamily,
};
use crate::tri::{Verdict, Witness};
use crate::ultra::{Ideal, Quotient, UltrafilterOracle};

/// One reported statement: a command, an assertion or an emit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub line: u32,
    pub statement: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub result: Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub entries: Vec<Entry>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn failed_asserts(&self) -> usize {
        self.entries.iter().filter(|e| e.passed == Some(false)).count()
    }

    /// 2 on diagnostics, 1 on a failed assertion, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.diagnostics.is_empty() {
            2
        } else if self.failed_asserts() > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self, config: &Config) -> Json {
        let passed = self.entries.iter().filter(|e| e.passed == Some(true)).count();
        json!({
            "schema": SCHEMA,
            "config": config,
            "results": self.entries,
            "asserts": { "passed": passed, "failed": self.failed_asserts() },
            "diagnostics": self.diagnostics,
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json_string(&self, config: &Config) -> String {
        serde_json::to_string_pretty(&self.to_json(config)).expect("json values serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let summary = summarize(&e.result);
            match e.passed {
                Some(true) => out += &format!("{}: {} ok\n", e.line, e.statement),
                Some(false) => out += &format!("{}: {} FAILED, got {summary}\n", e.line, e.statement),
                None => out += &format!("{}: {}\n    {summary}\n", e.line, e.statement),
            }
        }
        out
    }
}

fn summarize(v: &Json) -> String {
    let Some(value) = v.get("value").and_then(Json::as_str) else {
        return v.to_string();
    };
    let mut s = value.to_string();
    if let Some(w) = v.get("witness") {
        let desc = w.get("description").and_then(Json::as_str).unwrap_or("");
        s += &format!(" ({desc}");
        if let Some(els) = w.get("elements").and_then(Json::as_array) {
            let els: Vec<String> = els.iter().map(|e| e.as_str().unwrap_or("?").to_string()).collect();
            s += &format!(" [{}]", els.join(", "));
        }
        s += ")";
    }
    if let Some(f) = v.get("frontier") {
        s += &format!(" after {} steps, frontier {f}", v["budget_spent"]);
    }
    s
}

#[derive(Clone, Debug)]
struct MapObj {
    source: String,
    target: String,
    map: Map,
}

#[derive(Clone, Debug)]
enum Obj {
    Semigroup(Component),
    Family(ScaledFamily),
    Oracle(UltrafilterOracle),
    Elem(ProductElement),
    Map(MapObj),
    Diagram { diagram: Diagram, nodes: Vec<String>, arrows: Vec<String> },
}

type EResult<T> = Result<T, Diagnostic>;

fn err(span: Span, e: Error) -> Diagnostic {
    Diagnostic::error(span, e.to_string())
}

fn fail<T>(span: Span, msg: impl Into<String>) -> EResult<T> {
    Err(Diagnostic::error(span, msg))
}

struct Env<'c> {
    objs: HashMap<String, Obj>,
    config: &'c Config,
}

pub fn evaluate(script: &Script, config: &Config) -> Report {
    let mut env = Env { objs: HashMap::new(), config };
    let mut entries = Vec::new();
    for st in &script.statements {
        match env.statement(st) {
            Ok(Some(e)) => entries.push(e),
            Ok(None) => {}
            Err(d) => return Report { entries, diagnostics: vec![d] },
        }
    }
    Report { entries, diagnostics: vec![] }
}

fn verdict(v: &Verdict) -> Json {
    serde_json::to_value(v).expect("verdicts serialize")
}

fn law_verdict(r: &LawReport, s: &Structure) -> Verdict {
    match r {
        Ok(()) => Verdict::yes(),
        Err(v) => Verdict::no(Witness::elements(v.law.to_string(), v.labels(s))),
    }
}

fn labels_of(s: &Structure, m: &[usize]) -> Vec<String> {
    m.iter().map(|&i| s.label(i).to_string()).collect()
}

fn structure_json(s: &Structure) -> Json {
    json!({ "structure": s, "size": s.len() })
}

fn with(mut base: Json, key: &str, v: impl Serialize) -> Json {
    base[key] = serde_json::to_value(v).expect("serializable");
    base
}

fn filter_of<'a>(ideal: &Option<&'a IdealSpec>, oracle: Option<&'a UltrafilterOracle>) -> Filter<'a> {
    match ideal {
        None => Filter::All,
        Some(IdealSpec::C0) => Filter::Cofinite,
        Some(IdealSpec::Ultra(_)) => Filter::Ultra(oracle.expect("resolved oracle")),
        Some(IdealSpec::Everything) => Filter::Everything,
    }
}

impl Env<'_> {
    fn get(&self, n: &Name) -> &Obj {
        // Name resolution ran before evaluation.
        &self.objs[&n.text]
    }

    fn component(&self, n: &Name) -> Component {
        match self.get(n) {
            Obj::Semigroup(c) => c.clone(),
            _ => unreachable!("resolved as a semigroup"),
        }
    }

    fn structure(&self, n: &Name) -> EResult<Structure> {
        self.component(n)
            .structure()
            .ok_or_else(|| Diagnostic::error(n.span, format!("`{}` has an infinite carrier", n.text)))
    }

    fn family(&self, n: &Name) -> &ScaledFamily {
        match self.get(n) {
            Obj::Family(f) => f,
            _ => unreachable!("resolved as a family"),
        }
    }

    fn oracle(&self, n: &Name) -> &UltrafilterOracle {
        match self.get(n) {
            Obj::Oracle(u) => u,
            _ => unreachable!("resolved as an ultrafilter"),
        }
    }

    fn map(&self, n: &Name) -> &MapObj {
        match self.get(n) {
            Obj::Map(m) => m,
            _ => unreachable!("resolved as a map"),
        }
    }

    fn define(&mut self, n: &Name, o: Obj) {
        self.objs.insert(n.text.clone(), o);
    }

    fn statement(&mut self, st: &Stmt) -> EResult<Option<Entry>> {
        let entry = |result: Json, passed: Option<bool>| Entry {
            line: st.span.line,
            statement: printer::statement(st),
            passed,
            result,
        };
        match &st.kind {
            StmtKind::Semigroup { name, def } => {
                let c = self.semigroup(def, st.span)?;
                self.define(name, Obj::Semigroup(c));
            }
            StmtKind::Family { name, def } => {
                let f = self.family_def(def, st.span)?;
                self.define(name, Obj::Family(f));
            }
            StmtKind::Ultrafilter { name, def } => {
                let u = oracle(def).map_err(|e| err(st.span, e))?;
                self.define(name, Obj::Oracle(u));
            }
            StmtKind::Elem { name, family, expr } => {
                let fam = self.family(family).family().clone();
                let x = self.elem(expr, &fam)?;
                self.define(name, Obj::Elem(x));
            }
            StmtKind::Map { name, source, target, values } => {
                let (s, t) = (self.structure(source)?, self.structure(target)?);
                if values.len() != s.len() {
                    return fail(st.span, format!("map has {} values, `{}` has {} elements", values.len(), source.text, s.len()));
                }
                let map = values
                    .iter()
                    .map(|v| t.index_of(&v.text).ok_or_else(|| Diagnostic::error(v.span, format!("`{}` is not an element of `{}`", v.text, target.text))))
                    .collect::<EResult<Map>>()?;
                self.define(name, Obj::Map(MapObj { source: source.text.clone(), target: target.text.clone(), map }));
            }
            StmtKind::Diagram { name, nodes, arrows, commute } => {
                let d = self.diagram(nodes, arrows, commute, st.span)?;
                self.define(name, d);
            }
            StmtKind::Command(c) => return Ok(Some(entry(self.command(c)?, None))),
            StmtKind::Assert { lhs, rhs } => {
                let mut actual = self.command(&lhs.command)?;
                for step in &lhs.path {
                    actual = match step {
                        PathStep::Field(f) => actual.get(f).cloned(),
                        PathStep::Index(i) => actual.get(*i as usize).cloned(),
                    }
                    .unwrap_or(Json::Null);
                }
                let want = literal(rhs);
                // A bare verdict compares by its value.
                let got = match (&actual, &want) {
                    (Json::Object(m), w) if !w.is_object() && m.contains_key("value") => m["value"].clone(),
                    _ => actual.clone(),
                };
                return Ok(Some(entry(actual, Some(got == want))));
            }
            StmtKind::Emit(n) => return Ok(Some(entry(self.emit(n), None))),
        }
        Ok(None)
    }

    fn emit(&self, n: &Name) -> Json {
        match self.get(n) {
            Obj::Semigroup(Component::Finite(s)) => structure_json(s),
            Obj::Semigroup(Component::Builtin(b)) => match b.to_structure() {
                Some(s) => with(structure_json(&s), "builtin", b.name()),
                None => json!({ "builtin": b.name() }),
            },
            Obj::Family(f) => json!({ "family": f.describe() }),
            Obj::Oracle(u) => serde_json::to_value(u).expect("oracles serialize"),
            Obj::Elem(x) => with(serde_json::to_value(x).expect("elements serialize"), "text", x.describe()),
            Obj::Map(m) => {
                let t = self.structure_by_name(&m.target);
                json!({ "source": m.source, "target": m.target, "map": labels_of(&t, &m.map) })
            }
            Obj::Diagram { nodes, arrows, .. } => json!({ "nodes": nodes, "arrows": arrows }),
        }
    }

    fn structure_by_name(&self, n: &str) -> Structure {
        match &self.objs[n] {
            Obj::Semigroup(c) => c.structure().expect("map endpoints are finite"),
            _ => unreachable!("map endpoints are semigroups"),
        }
    }

    fn semigroup(&self, def: &SemigroupDef, span: Span) -> EResult<Component> {
        Ok(match def {
            SemigroupDef::Builtin(b) => Component::Builtin(match b {
                BuiltinSpec::ExtNat => Builtin::ExtNat,
                BuiltinSpec::TwoPoint => Builtin::TwoPoint,
                BuiltinSpec::TruncNat(k) => Builtin::TruncNat { k: *k },
            }),
            SemigroupDef::Finite(b) => Component::Finite(Arc::new(finite_block(b)?)),
            SemigroupDef::Corpus(n) => Component::Finite(Arc::new(self.corpus(n)?)),
            SemigroupDef::Derived(c) => {
                let s = self.structure_command(c)?;
                Component::Finite(Arc::new(s))
            }
        })
        .map_err(|e: Diagnostic| if e.span.line == 0 { Diagnostic { span, ..e } } else { e })
    }

    fn corpus(&self, n: &Name) -> EResult<Structure> {
        if let Some(dir) = &self.config.corpus_dir {
            let path = dir.join(format!("{}.cusp", n.text));
            if path.exists() {
                let src = std::fs::read_to_string(&path)
                    .map_err(|e| Diagnostic::error(n.span, format!("cannot read {}: {e}", path.display())))?;
                let script = super::parse(&src).map_err(|ds| {
                    Diagnostic::error(n.span, format!("{}: {}", path.display(), ds[0].message))
                })?;
                let inner = Config { corpus_dir: None, ..self.config.clone() };
                let mut env = Env { objs: HashMap::new(), config: &inner };
                let mut last = None;
                for st in &script.statements {
                    env.statement(st).map_err(|d| Diagnostic::error(n.span, format!("{}: {}", path.display(), d.message)))?;
                    if let StmtKind::Semigroup { name, .. } = &st.kind {
                        last = Some(name.clone());
                    }
                }
                let Some(name) = last else {
                    return fail(n.span, format!("{} defines no semigroup", path.display()));
                };
                return env.structure(&name);
            }
        }
        crate::corpus::by_name(&n.text).ok_or_else(|| Diagnostic::error(n.span, format!("no corpus entry `{}`", n.text)))
    }

    /// Commands whose result is a finite structure.
    fn structure_command(&self, c: &Command) -> EResult<Structure> {
        let e = |x: Error| err(c.span, x);
        use CommandKind as C;
        Ok(match &c.kind {
            C::Product(v) => {
                let parts = v.iter().map(|n| self.structure(n)).collect::<EResult<Vec<_>>>()?;
                cu_product_finite(&parts).map_err(e)?.0
            }
            C::Compacts { name, modulo: None } if matches!(self.get(name), Obj::Semigroup(_)) => {
                compacts(&self.structure(name)?).map_err(e)?.0
            }
            C::Gamma(n) => gamma_complete(&self.structure(n)?).map_err(e)?.structure,
            C::Tau(n) => tau_complete(&self.structure(n)?).map_err(e)?.structure,
            C::Antisym(n) => antisymmetrize(&self.structure(n)?).map_err(e)?.structure,
            C::Iota(n) => iota(&self.structure(n)?),
            C::Colimit(d) => cu_colimit(self.diagram_obj(d)).map_err(e)?.structure,
            C::Limit(d) => cu_limit(self.diagram_obj(d)).map_err(e)?.structure,
            C::Coequalizer(f, g) => w_coequalizer(&self.pair(f, g, c.span)?).map_err(e)?.0,
            _ => return fail(c.span, "this command does not produce a semigroup"),
        })
    }

    fn diagram_obj(&self, n: &Name) -> &Diagram {
        match self.get(n) {
            Obj::Diagram { diagram, .. } => diagram,
            _ => unreachable!("resolved as a diagram"),
        }
    }

    fn pair(&self, f: &Name, g: &Name, span: Span) -> EResult<WMorphismPair> {
        let (a, b) = (self.map(f), self.map(g));
        if a.source != b.source || a.target != b.target {
            return fail(span, format!("`{}` and `{}` are not parallel", f.text, g.text));
        }
        let (s, t) = (self.structure_by_name(&a.source), self.structure_by_name(&a.target));
        WMorphismPair::new(s, t, a.map.clone(), b.map.clone()).map_err(|e| err(span, e))
    }

    fn diagram(&self, nodes: &[Name], arrows: &[Name], commute: &[(Vec<Name>, Vec<Name>)], span: Span) -> EResult<Obj> {
        let node_names: Vec<String> = nodes.iter().map(|n| n.text.clone()).collect();
        let structures = nodes.iter().map(|n| self.structure(n)).collect::<EResult<Vec<_>>>()?;
        let mut arrow_list = Vec::new();
        for a in arrows {
            let m = self.map(a);
            let pos = |s: &str| {
                node_names
                    .iter()
                    .position(|n| n == s)
                    .ok_or_else(|| Diagnostic::error(a.span, format!("`{s}` is not a node of the diagram")))
            };
            arrow_list.push(Arrow { source: pos(&m.source)?, target: pos(&m.target)?, map: m.map.clone() });
        }
        let index = |n: &Name| arrows.iter().position(|a| a.text == n.text).expect("checked by resolution");
        let relations = commute
            .iter()
            .map(|(p, q)| (p.iter().map(index).collect(), q.iter().map(index).collect()))
            .collect();
        let diagram = Diagram::new(structures, arrow_list, relations).map_err(|e| err(span, e))?;
        Ok(Obj::Diagram { diagram, nodes: node_names, arrows: arrows.iter().map(|a| a.text.clone()).collect() })
    }

    fn scaled_component(&self, c: &CompSpec) -> EResult<ScaledComponent> {
        let span_of = |n: &Name| n.span;
        match &c.base {
            CompBase::Matrix(k) => AlgebraModel::MatrixAlgebra(*k).scaled().map_err(|e| err(Span::default(), e)),
            CompBase::PurelyInfinite => AlgebraModel::SimplePurelyInfinite.scaled().map_err(|e| err(Span::default(), e)),
            CompBase::Named(n) => self.scaled(n, &c.scale).map_err(|e| Diagnostic { span: span_of(n), ..e }),
            CompBase::Custom { tag, of } => Ok(self
                .scaled(of, &c.scale)
                .map_err(|e| Diagnostic { span: span_of(of), ..e })?
                .with_model(AlgebraModel::Custom(tag.clone()))),
        }
    }

    /// A semigroup with the given scale (the whole semigroup when absent).
    fn scaled(&self, n: &Name, scale: &Option<ScaleSpec>) -> EResult<ScaledComponent> {
        let c = self.component(n);
        let r = match scale {
            None => ScaledComponent::trivial(c),
            Some(ScaleSpec::Below(v)) => {
                let b = c.parse(&value_text(v)).ok_or_else(|| {
                    Diagnostic::error(n.span, format!("`{}` is not an element of `{}`", value_text(v), n.text))
                })?;
                ScaledComponent::new(c, Scale::Below(b))
            }
            Some(ScaleSpec::Set(members)) => {
                let s = self.structure(n)?;
                let mut flags = vec![false; s.len()];
                for m in members {
                    let i = s
                        .index_of(&m.text)
                        .ok_or_else(|| Diagnostic::error(m.span, format!("`{}` is not an element of `{}`", m.text, n.text)))?;
                    flags[i] = true;
                }
                ScaledComponent::new(c, Scale::Set(flags))
            }
        };
        r.map_err(|e| err(n.span, e))
    }

    fn family_def(&self, def: &FamilyDef, span: Span) -> EResult<ScaledFamily> {
        let fix = |d: Diagnostic| if d.span.line == 0 { Diagnostic { span, ..d } } else { d };
        let comps = |v: &[CompSpec]| v.iter().map(|c| self.scaled_component(c).map_err(fix)).collect::<EResult<Vec<_>>>();
        match def {
            FamilyDef::Constant(c, idx) => {
                let index = match idx {
                    IndexSpec::Naturals => Index::Naturals,
                    IndexSpec::Finite(0) => return fail(span, "the index set must be nonempty"),
                    IndexSpec::Finite(n) => Index::Finite { size: *n },
                };
                Ok(ScaledFamily::constant(self.scaled_component(c).map_err(fix)?, index))
            }
            FamilyDef::List(v) => Ok(ScaledFamily::list(comps(v)?)),
            FamilyDef::Periodic(a, b) => ScaledFamily::periodic(comps(a)?, comps(b)?).map_err(|e| err(span, e)),
        }
    }

    /// Resolves a value token against the components at the given indices; all must agree.
    fn resolve(&self, fam: &Family, v: &Value, positions: &[u64], span: Span) -> EResult<Ext> {
        let text = value_text(v);
        let mut found: Option<Ext> = None;
        for &j in positions.iter().filter(|&&j| fam.index().contains(j)) {
            let c = fam.component(j);
            let x = c
                .parse(&text)
                .ok_or_else(|| Diagnostic::error(span, format!("`{text}` is not an element of {} (index {j})", c.name())))?;
            if found.is_some_and(|f| f != x) {
                return fail(span, format!("`{text}` names different elements in different components"));
            }
            found = Some(x);
        }
        found.ok_or_else(|| Diagnostic::error(span, format!("`{text}` is not placed at any index")))
    }

    fn function(&self, f: &FnExpr, fam: &Family, span: Span) -> EResult<DescribedFunction> {
        let (s, p) = fam.shape();
        let all: Vec<u64> = (0..s + p).collect();
        Ok(match f {
            FnExpr::Const(v) => DescribedFunction::constant(self.resolve(fam, v, &all, span)?),
            FnExpr::Except { default, overrides } => {
                let mut map = BTreeMap::new();
                for (j, v) in overrides {
                    map.insert(*j, self.resolve(fam, v, &[*j], span)?);
                }
                DescribedFunction::FiniteSupport { default: self.resolve(fam, default, &all, span)?, overrides: map }
            }
            FnExpr::Periodic { prefix, pattern } => {
                if pattern.is_empty() {
                    return fail(span, "empty period pattern");
                }
                let l = prefix.len() as u64;
                let q = pattern.len() as u64;
                let pre = prefix
                    .iter()
                    .enumerate()
                    .map(|(i, v)| self.resolve(fam, v, &[i as u64], span))
                    .collect::<EResult<Vec<_>>>()?;
                let reps = s.max(1) + p;
                let pat = pattern
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let at: Vec<u64> = (0..reps).map(|m| l + k as u64 + m * q).collect();
                        self.resolve(fam, v, &at, span)
                    })
                    .collect::<EResult<Vec<_>>>()?;
                DescribedFunction::periodic(pre, pat).map_err(|e| err(span, e))?
            }
            FnExpr::Linear { slope, offset, on } => {
                let on = match on {
                    None => None,
                    Some((m, r)) => {
                        if *m == 0 || r.iter().any(|x| x >= m) {
                            return fail(span, "residues must lie below a positive modulus");
                        }
                        Some(PeriodicSet::residues(*m, r))
                    }
                };
                DescribedFunction::Linear { slope: *slope, offset: *offset, on }
            }
            FnExpr::Opaque { seed, modulus } => DescribedFunction::Opaque { seed: *seed, modulus: *modulus },
        })
    }

    fn elem(&self, e: &ElemExpr, fam: &Arc<Family>) -> EResult<ProductElement> {
        let fail_at = |x: Error| err(e.span, x);
        let mut acc = ProductElement::zero(fam.clone());
        for (m, a) in &e.terms {
            let x = match a {
                Atom::Zero => ProductElement::zero(fam.clone()),
                Atom::Ref(n) => match self.get(n) {
                    Obj::Elem(x) => x.clone(),
                    _ => unreachable!("resolved as an element"),
                },
                Atom::Anchor(f) => ProductElement::anchor(fam.clone(), self.function(f, fam, e.span)?).map_err(fail_at)?,
                Atom::Chain(levels) => {
                    let fs = levels.iter().map(|f| self.function(f, fam, e.span)).collect::<EResult<Vec<_>>>()?;
                    ProductElement::chain(fam.clone(), fs).map_err(fail_at)?
                }
            };
            let x = match m {
                Multiplier::Fin(k) => x.scale(*k),
                Multiplier::Inf => x.times_inf().map_err(fail_at)?,
            };
            acc = acc.add(&x).map_err(fail_at)?;
        }
        Ok(acc)
    }

    /// The family of the first named element in the expressions.
    fn infer_family(&self, exprs: &[&ElemExpr], span: Span) -> EResult<Arc<Family>> {
        for e in exprs {
            for (_, a) in &e.terms {
                if let Atom::Ref(n) = a {
                    if let Obj::Elem(x) = self.get(n) {
                        return Ok(x.family().clone());
                    }
                }
            }
        }
        fail(span, "cannot infer the family: name at least one defined element")
    }

    fn ideal(&self, i: &IdealSpec) -> Ideal {
        match i {
            IdealSpec::C0 => Ideal::C0,
            IdealSpec::Ultra(u) => Ideal::CU(self.oracle(u).clone()),
            IdealSpec::Everything => Ideal::Everything,
        }
    }

    fn scaled_cu(&self, t: &Target, span: Span) -> EResult<ScaledCu> {
        match self.get(&t.name) {
            Obj::Semigroup(_) => {
                if t.modulo.is_some() {
                    return fail(span, "a semigroup has no quotients; use a family");
                }
                Ok(ScaledCu::Component(self.scaled(&t.name, &t.scale)?))
            }
            Obj::Family(f) => {
                if t.scale.is_some() {
                    return fail(span, "a family takes its scale from its components");
                }
                match &t.modulo {
                    None => Ok(scaled_product(f.clone())),
                    Some(IdealSpec::Ultra(u)) => scaled_ultraproduct(f.clone(), self.oracle(u).clone()).map_err(|e| err(span, e)),
                    Some(_) => fail(span, "only products and ultraproducts carry a scale"),
                }
            }
            _ => unreachable!("resolved as a semigroup or family"),
        }
    }

    fn command(&self, c: &Command) -> EResult<Json> {
        let span = c.span;
        let e = |x: Error| err(span, x);
        let budget = self.config.budget;
        use CommandKind as C;
        Ok(match &c.kind {
            C::Check(n) => {
                let s = self.structure(n)?;
                // without a declared `≺` the W laws are read for `ι(S)`, i.e. `≺ = ≪`
                let w_form = if s.has_aux() { s.clone() } else { iota(&s) };
                let w = match check_w_axioms(&w_form) {
                    Ok(r) => law_verdict(&r, &w_form),
                    Err(x) => Verdict::no(Witness::text(x.to_string())),
                };
                json!({
                    "size": s.len(),
                    "pom": verdict(&law_verdict(&check_pom_axioms(&s), &s)),
                    "aux": verdict(&law_verdict(&check_aux_laws(&s), &s)),
                    "cu": verdict(&law_verdict(&check_cu_axioms(&s), &s)),
                    "w": verdict(&w),
                    "q": verdict(&law_verdict(&check_q_axioms(&s), &s)),
                    "o6": verdict(&law_verdict(&check_o6(&s), &s)),
                })
            }
            C::Product(v) => {
                let parts = v.iter().map(|n| self.structure(n)).collect::<EResult<Vec<_>>>()?;
                let (s, proj) = cu_product_finite(&parts).map_err(e)?;
                let proj: Vec<Vec<String>> = proj.iter().zip(&parts).map(|(p, t)| labels_of(t, p)).collect();
                with(structure_json(&s), "projections", proj)
            }
            C::Ultraproduct { family, oracle } => {
                let f = self.family(family);
                let u = self.oracle(oracle);
                crate::ultra::ultraproduct(f.family().clone(), u.clone()).map_err(e)?;
                json!({
                    "family": f.family().describe(),
                    "oracle": u,
                    "countably_incomplete": u.countably_incomplete(),
                    "principal_point": u.principal_point(),
                })
            }
            C::Quotient { family, ideal, of } => {
                let fam = self.family(family).family().clone();
                let q = Quotient::new(fam.clone(), self.ideal(ideal)).map_err(e)?;
                match of {
                    QuotientOf::Classify(names) => {
                        let xs: Vec<ProductElement> = names
                            .iter()
                            .map(|n| match self.get(n) {
                                Obj::Elem(x) => x.clone(),
                                _ => unreachable!("resolved as an element"),
                            })
                            .collect();
                        let ids = q.classify(&xs, budget).map_err(e)?;
                        let classes = ids.iter().max().map_or(0, |m| m + 1);
                        let class_of: BTreeMap<&str, usize> = names.iter().map(|n| n.text.as_str()).zip(ids).collect();
                        json!({ "classes": classes, "class_of": class_of })
                    }
                    QuotientOf::Sample(n) => {
                        let modulus = match ideal {
                            IdealSpec::Ultra(u) => self.oracle(u).finest_modulus(),
                            _ => None,
                        };
                        let xs = crate::corpus::sample_elements(&fam, *n as usize, self.config.seed, modulus).map_err(e)?;
                        let ids = q.classify(&xs, budget).map_err(e)?;
                        let classes = ids.iter().max().map_or(0, |m| m + 1);
                        let mut sizes = vec![0usize; classes];
                        for i in ids {
                            sizes[i] += 1;
                        }
                        json!({ "sampled": n, "classes": classes, "class_sizes": sizes })
                    }
                }
            }
            C::Compacts { name, modulo } => match self.get(name) {
                Obj::Semigroup(_) => {
                    if modulo.is_some() {
                        return fail(span, "a semigroup has no quotients");
                    }
                    let s = self.structure(name)?;
                    let (k, inc) = compacts(&s).map_err(e)?;
                    with(structure_json(&k), "inclusion", labels_of(&s, &inc))
                }
                Obj::Elem(x) => {
                    let ideal = modulo.as_ref().map_or(Ideal::Zero, |i| self.ideal(i));
                    let q = Quotient::new(x.family().clone(), ideal).map_err(e)?;
                    let v = q.is_compact(x, budget).map_err(e)?;
                    let pre = q.compact_preimage(x, budget).map_err(e)?;
                    with(verdict(&v), "preimage", pre.map(|p| p.describe()))
                }
                _ => unreachable!("resolved as a semigroup or element"),
            },
            C::Leq { lhs, rhs, modulo } => {
                let fam = self.infer_family(&[lhs, rhs], span)?;
                let (x, y) = (self.elem(lhs, &fam)?, self.elem(rhs, &fam)?);
                let oracle = match modulo {
                    Some(IdealSpec::Ultra(u)) => Some(self.oracle(u)),
                    _ => None,
                };
                if let Some(u) = oracle {
                    u.check_index(&fam).map_err(e)?;
                }
                verdict(&filtered_leq(&x, &y, filter_of(&modulo.as_ref(), oracle), budget).map_err(e)?)
            }
            C::Carrier { elem, target } | C::ScaleContains { elem, target } => {
                let s = self.scaled_cu(target, span)?;
                let Some(f) = s.family() else {
                    return fail(span, "membership needs a product or a free ultraproduct");
                };
                let x = self.elem(elem, f.family())?;
                if matches!(c.kind, C::Carrier { .. }) {
                    let v = s.carrier_contains(&x, budget).map_err(e)?;
                    let g = s.generated_within(&x, self.config.summand_cap, budget).map_err(e)?;
                    with(verdict(&v), "generated_within_cap", verdict(&g))
                } else {
                    let v = s.scale_contains(&x, budget).map_err(e)?;
                    let b = s.scale_contains_by_bound(&x, budget).map_err(e)?;
                    with(verdict(&v), "by_bound", b.as_ref().map(verdict))
                }
            }
            C::Simple(t) => verdict(&is_simple(&self.scaled_cu(t, span)?, budget).map_err(e)?),
            C::Cn { n, target } => verdict(&has_cn(&self.scaled_cu(target, span)?, *n, budget).map_err(e)?),
            C::Pi { n, name } => {
                if *n == 0 {
                    return fail(span, "pi-n needs n ≥ 1");
                }
                match self.component(name) {
                    Component::Builtin(Builtin::ExtNat) => {
                        with(verdict(&builtin_is_pi_n(Builtin::ExtNat, *n)), "weakly_purely_infinite", Option::<u64>::None)
                    }
                    _ => {
                        let s = self.structure(name)?;
                        with(verdict(&is_pi_n(&s, *n)), "weakly_purely_infinite", is_weakly_purely_infinite(&s))
                    }
                }
            }
            C::Comparability { kind, target } => {
                let kind = match kind {
                    ComparabilityKind::Unperforated => Comparability::Unperforated,
                    ComparabilityKind::Almost => Comparability::Almost,
                    ComparabilityKind::Near => Comparability::Near,
                };
                match (self.get(&target.name), &target.scale) {
                    (Obj::Semigroup(Component::Finite(s)), None) => verdict(&comparability_check(s, kind)),
                    _ => verdict(&scaled_comparability(&self.scaled_cu(target, span)?, kind)),
                }
            }
            C::TotallyOrdered { target, sample } => {
                if target.scale.is_some() {
                    return fail(span, "total order does not depend on a scale");
                }
                let (fam, oracle) = match self.get(&target.name) {
                    Obj::Semigroup(c) => {
                        if target.modulo.is_some() {
                            return fail(span, "a semigroup has no quotients; use a family");
                        }
                        (Arc::new(Family::constant(c.clone(), Index::Finite { size: 1 })), None)
                    }
                    Obj::Family(f) => {
                        let u = match &target.modulo {
                            Some(IdealSpec::Ultra(u)) => Some(self.oracle(u)),
                            _ => None,
                        };
                        if let Some(u) = u {
                            u.check_index(f.family()).map_err(e)?;
                        }
                        (f.family().clone(), u)
                    }
                    _ => unreachable!("resolved as a semigroup or family"),
                };
                let filter = filter_of(&target.modulo.as_ref(), oracle);
                let v = verdict(&totally_ordered(&fam, filter, budget).map_err(e)?);
                match sample {
                    None => v,
                    Some(n) => {
                        let modulus = oracle.and_then(UltrafilterOracle::finest_modulus);
                        let xs = crate::corpus::sample_elements(&fam, 2 * *n as usize, self.config.seed, modulus).map_err(e)?;
                        let mut comparable = 0;
                        for p in xs.chunks(2) {
                            let a = filtered_leq(&p[0], &p[1], filter, budget).map_err(e)?;
                            let b = filtered_leq(&p[1], &p[0], filter, budget).map_err(e)?;
                            comparable += usize::from(a.is_true() || b.is_true());
                        }
                        with(with(v, "sampled_pairs", n), "comparable_pairs", comparable)
                    }
                }
            }
            C::Mvn { family, oracle, elem } => {
                let f = self.family(family);
                let m = mvn_semigroup(f, oracle.as_ref().map(|u| self.oracle(u).clone())).map_err(e)?;
                let x = self.elem(elem, m.family())?;
                let v = m.contains(&x, budget).map_err(e)?;
                let b = m.bound(&x, self.config.summand_cap, budget).map_err(e)?;
                with(verdict(&v), "bound", b)
            }
            C::Verdict { family, oracle } => {
                let v = ultrapower_simplicity_verdict(self.family(family), self.oracle(oracle), budget).map_err(e)?;
                serde_json::to_value(v).expect("verdicts serialize")
            }
            C::Colimit(d) => {
                let r = cu_colimit(self.diagram_obj(d)).map_err(e)?;
                let cocone: Vec<Vec<String>> = r.cocone.iter().map(|m| labels_of(&r.structure, m)).collect();
                with(structure_json(&r.structure), "cocone", cocone)
            }
            C::Limit(d) => {
                let diagram = self.diagram_obj(d);
                let r = cu_limit(diagram).map_err(e)?;
                let proj: Vec<Vec<String>> = r.projections.iter().zip(&diagram.nodes).map(|(p, s)| labels_of(s, p)).collect();
                with(structure_json(&r.structure), "projections", proj)
            }
            C::Coequalizer(f, g) => {
                let (s, eta) = w_coequalizer(&self.pair(f, g, span)?).map_err(e)?;
                with(structure_json(&s), "eta", labels_of(&s, &eta))
            }
            C::Gamma(n) => {
                let s = self.structure(n)?;
                let g = gamma_complete(&s).map_err(e)?;
                let downsets: Vec<String> = g.downsets.iter().map(|d| d.iter().map(|&b| if b { '1' } else { '0' }).collect()).collect();
                with(with(structure_json(&g.structure), "alpha", labels_of(&g.structure, &g.alpha)), "downsets", downsets)
            }
            C::Tau(n) => {
                let s = self.structure(n)?;
                let t = tau_complete(&s).map_err(e)?;
                with(structure_json(&t.structure), "endpoint", labels_of(&s, &t.endpoint))
            }
            C::Antisym(n) => {
                let a = antisymmetrize(&self.structure(n)?).map_err(e)?;
                with(structure_json(&a.structure), "quotient", labels_of(&a.structure, &a.quotient))
            }
            C::Iota(n) => structure_json(&iota(&self.structure(n)?)),
        })
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Label(n) => n.text.clone(),
    }
}

fn literal(l: &Literal) -> Json {
    match l {
        Literal::Bool(true) => json!("true"),
        Literal::Bool(false) => json!("false"),
        Literal::Unknown => json!("unknown"),
        Literal::Int(n) => json!(n),
        Literal::Inf => json!("inf"),
        Literal::Str(s) => json!(s),
        Literal::List(v) => Json::Array(v.iter().map(literal).collect()),
    }
}

fn oracle(def: &OracleDef) -> crate::error::Result<UltrafilterOracle> {
    match def {
        OracleDef::Principal { point, size: None } => UltrafilterOracle::principal(Index::Naturals, *point),
        OracleDef::Principal { point, size: Some(n) } => UltrafilterOracle::principal(Index::Finite { size: *n }, *point),
        OracleDef::Profinite { moduli, residues } => UltrafilterOracle::profinite(moduli.clone(), residues.clone()),
        OracleDef::Dyadic { residue, depth } => {
            let depth = u32::try_from(*depth).ok().filter(|d| (1..64).contains(d));
            let depth = depth.ok_or_else(|| Error::Rejected("dyadic depth must lie in 1..63".into()))?;
            UltrafilterOracle::dyadic(*residue, depth)
        }
    }
}

fn finite_block(b: &FiniteBlock) -> EResult<Structure> {
    let labels: Vec<String> = b.elements.iter().map(|n| n.text.clone()).collect();
    let n = labels.len();
    let idx = |l: &Name| {
        labels
            .iter()
            .position(|x| *x == l.text)
            .ok_or_else(|| Diagnostic::error(l.span, format!("`{}` is not listed in `elements:`", l.text)))
    };
    let zero = idx(&b.zero)?;
    let add: Vec<usize> = match &b.add {
        AddSpec::Table(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return fail(b.span, format!("addition table must be {n} rows of {n} labels"));
            }
            rows.iter().flatten().map(idx).collect::<EResult<_>>()?
        }
        AddSpec::Rules { rules, otherwise } => {
            let mut t: Vec<Option<usize>> = vec![None; n * n];
            for i in 0..n {
                t[zero * n + i] = Some(i);
                t[i * n + zero] = Some(i);
            }
            for (a, c, s) in rules {
                let (i, j, k) = (idx(a)?, idx(c)?, idx(s)?);
                for cell in [i * n + j, j * n + i] {
                    if t[cell].is_some_and(|v| v != k) {
                        return fail(a.span.to(s.span), format!("conflicting sum {} + {}", a.text, c.text));
                    }
                    t[cell] = Some(k);
                }
            }
            let other = otherwise.as_ref().map(idx).transpose()?;
            t.iter()
                .enumerate()
                .map(|(cell, v)| {
                    v.or(other).ok_or_else(|| {
                        Diagnostic::error(b.span, format!("sum {} + {} is not given", labels[cell / n], labels[cell % n]))
                    })
                })
                .collect::<EResult<_>>()?
        }
    };
    let leq = match &b.order {
        OrderSpec::Algebraic => Relation::from_fn(n, |a, c| (0..n).any(|d| add[a * n + d] == c)),
        OrderSpec::Pairs(v) => {
            let pairs = v.iter().map(|(a, c)| Ok((idx(a)?, idx(c)?))).collect::<EResult<Vec<_>>>()?;
            Relation::from_pairs(n, pairs).transitive_closure().reflexive_closure()
        }
    };
    let s = Structure::new(labels.clone(), zero, add, leq, None).map_err(|e| err(b.span, e))?;
    match &b.aux {
        None => Ok(s),
        Some(AuxSpec::WayBelow) => {
            let wb = s.way_below_matrix();
            s.with_aux(wb).map_err(|e| err(b.span, e))
        }
        Some(AuxSpec::Pairs(v)) => {
            let pairs = v.iter().map(|(a, c)| Ok((idx(a)?, idx(c)?))).collect::<EResult<Vec<_>>>()?;
            s.with_aux(Relation::from_pairs(n, pairs)).map_err(|e| err(b.span, e))
        }
    }
}
