//! Canonical text form. `parse(print(s)) == s` for every parsed script.

use std::fmt::Write;

use super::ast::*;

fn join<T>(items: &[T], sep: &str, f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(sep)
}

fn names(v: &[Name]) -> String {
    join(v, ", ", |n| n.text.clone())
}

fn ints(v: &[u64]) -> String {
    join(v, ", ", u64::to_string)
}

fn value(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Label(n) => n.text.clone(),
    }
}

fn scale(s: &ScaleSpec) -> String {
    match s {
        ScaleSpec::Below(v) => format!("<= {}", value(v)),
        ScaleSpec::Set(v) => format!("{{{}}}", names(v)),
    }
}

fn comp(c: &CompSpec) -> String {
    let base = match &c.base {
        CompBase::Named(n) => n.text.clone(),
        CompBase::Matrix(k) => format!("matrix({k})"),
        CompBase::PurelyInfinite => "spi".into(),
        CompBase::Custom { tag, of } => format!("custom({tag:?}, {})", of.text),
    };
    match &c.scale {
        Some(s) => format!("{base} scale {}", scale(s)),
        None => base,
    }
}

fn function(f: &FnExpr) -> String {
    match f {
        FnExpr::Const(v) => format!("fn {}", value(v)),
        FnExpr::Except { default, overrides } => {
            format!("fn {} except {{{}}}", value(default), join(overrides, ", ", |(j, v)| format!("{j}: {}", value(v))))
        }
        FnExpr::Periodic { prefix, pattern } => {
            format!("fn periodic([{}], [{}])", join(prefix, ", ", value), join(pattern, ", ", value))
        }
        FnExpr::Linear { slope, offset, on } => {
            let mut s = if *slope == 1 { "fn j".to_string() } else { format!("fn {slope}*j") };
            if *offset > 0 {
                write!(s, " + {offset}").unwrap();
            }
            if let Some((m, r)) = on {
                write!(s, " on residues({m}, [{}])", ints(r)).unwrap();
            }
            s
        }
        FnExpr::Opaque { seed, modulus } => format!("fn opaque({seed}, {modulus})"),
    }
}

pub fn elem(e: &ElemExpr) -> String {
    join(&e.terms, " + ", |(m, a)| {
        let body = match a {
            Atom::Zero => "0".to_string(),
            Atom::Ref(n) => n.text.clone(),
            Atom::Anchor(f) => format!("anchor({})", function(f)),
            Atom::Chain(levels) => format!("chain(levels=[{}])", join(levels, ", ", function)),
        };
        match m {
            Multiplier::Fin(1) => body,
            Multiplier::Fin(k) => format!("{k}*{body}"),
            Multiplier::Inf => format!("inf*{body}"),
        }
    })
}

fn ideal(i: &IdealSpec) -> String {
    match i {
        IdealSpec::C0 => "c0".into(),
        IdealSpec::Ultra(u) => format!("ultra {}", u.text),
        IdealSpec::Everything => "everything".into(),
    }
}

fn modulo(i: &Option<IdealSpec>) -> String {
    i.as_ref().map_or(String::new(), |i| format!(" mod {}", ideal(i)))
}

fn target(t: &Target) -> String {
    let mut s = t.name.text.clone();
    if let Some(sc) = &t.scale {
        write!(s, " scale {}", scale(sc)).unwrap();
    }
    s + &modulo(&t.modulo)
}

pub fn command(c: &Command) -> String {
    use CommandKind as C;
    match &c.kind {
        C::Check(n) => format!("check {}", n.text),
        C::Product(v) => format!("product {}", names(v)),
        C::Ultraproduct { family, oracle } => format!("ultraproduct {} by {}", family.text, oracle.text),
        C::Quotient { family, ideal: i, of } => {
            let tail = match of {
                QuotientOf::Classify(v) => format!("classify [{}]", names(v)),
                QuotientOf::Sample(n) => format!("sample {n}"),
            };
            format!("quotient {} mod {} {tail}", family.text, ideal(i))
        }
        C::Compacts { name, modulo: m } => format!("compacts {}{}", name.text, modulo(m)),
        C::Leq { lhs, rhs, modulo: m } => format!("leq {}, {}{}", elem(lhs), elem(rhs), modulo(m)),
        C::Carrier { elem: e, target: t } => format!("in-carrier {} of {}", elem(e), target(t)),
        C::ScaleContains { elem: e, target: t } => format!("in-scale {} of {}", elem(e), target(t)),
        C::Simple(t) => format!("simple {}", target(t)),
        C::Cn { n, target: t } => format!("cn {n} {}", target(t)),
        C::Pi { n, name } => format!("pi {n} {}", name.text),
        C::Comparability { kind, target: t } => {
            let k = match kind {
                ComparabilityKind::Unperforated => "unperforated",
                ComparabilityKind::Almost => "almost",
                ComparabilityKind::Near => "near",
            };
            format!("{k} {}", target(t))
        }
        C::TotallyOrdered { target: t, sample } => {
            format!("totally-ordered {}{}", target(t), sample.map_or(String::new(), |n| format!(" sample {n}")))
        }
        C::Mvn { family, oracle, elem: e } => format!(
            "mvn {} in {}{}",
            elem(e),
            family.text,
            oracle.as_ref().map_or(String::new(), |u| format!(" by {}", u.text))
        ),
        C::Verdict { family, oracle } => format!("verdict {} by {}", family.text, oracle.text),
        C::Colimit(d) => format!("colimit {}", d.text),
        C::Limit(d) => format!("limit {}", d.text),
        C::Coequalizer(f, g) => format!("coequalizer {}, {}", f.text, g.text),
        C::Gamma(n) => format!("gamma {}", n.text),
        C::Tau(n) => format!("tau {}", n.text),
        C::Antisym(n) => format!("antisym {}", n.text),
        C::Iota(n) => format!("iota {}", n.text),
    }
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Bool(b) => b.to_string(),
        Literal::Unknown => "unknown".into(),
        Literal::Int(n) => n.to_string(),
        Literal::Inf => "inf".into(),
        Literal::Str(s) => format!("{s:?}"),
        Literal::List(v) => format!("[{}]", join(v, ", ", literal)),
    }
}

fn pairs(v: &[(Name, Name)], rel: &str) -> String {
    join(v, ", ", |(a, b)| format!("{} {rel} {}", a.text, b.text))
}

fn finite(b: &FiniteBlock) -> String {
    let mut s = format!("finite {{\n    elements: {};\n    zero: {};\n", names(&b.elements), b.zero.text);
    let add = match &b.add {
        AddSpec::Table(rows) => format!("[{}]", join(rows, ", ", |r| format!("[{}]", names(r)))),
        AddSpec::Rules { rules, otherwise } => {
            let mut parts: Vec<String> = rules.iter().map(|(a, b, c)| format!("{} + {} = {}", a.text, b.text, c.text)).collect();
            if let Some(o) = otherwise {
                parts.push(format!("otherwise {}", o.text));
            }
            parts.join(", ")
        }
    };
    writeln!(s, "    add: {add};").unwrap();
    let order = match &b.order {
        OrderSpec::Algebraic => "algebraic".to_string(),
        OrderSpec::Pairs(v) => pairs(v, "<="),
    };
    writeln!(s, "    order: {order};").unwrap();
    match &b.aux {
        Some(AuxSpec::WayBelow) => s.push_str("    aux: way-below;\n"),
        Some(AuxSpec::Pairs(v)) => writeln!(s, "    aux: {};", pairs(v, "<<")).unwrap(),
        None => {}
    }
    s + "}"
}

pub fn statement(st: &Stmt) -> String {
    match &st.kind {
        StmtKind::Semigroup { name, def } => {
            let body = match def {
                SemigroupDef::Finite(b) => finite(b),
                SemigroupDef::Builtin(BuiltinSpec::ExtNat) => "builtin(extnat)".into(),
                SemigroupDef::Builtin(BuiltinSpec::TwoPoint) => "builtin(twopoint)".into(),
                SemigroupDef::Builtin(BuiltinSpec::TruncNat(k)) => format!("builtin(truncnat {k})"),
                SemigroupDef::Corpus(n) => format!("corpus({})", n.text),
                SemigroupDef::Derived(c) => command(c),
            };
            format!("semigroup {} = {body}", name.text)
        }
        StmtKind::Family { name, def } => {
            let body = match def {
                FamilyDef::Constant(c, IndexSpec::Naturals) => format!("constant({}) on N", comp(c)),
                FamilyDef::Constant(c, IndexSpec::Finite(n)) => format!("constant({}) on {n}", comp(c)),
                FamilyDef::List(v) => format!("list({})", join(v, ", ", comp)),
                FamilyDef::Periodic(a, b) => format!("periodic([{}], [{}])", join(a, ", ", comp), join(b, ", ", comp)),
            };
            format!("family {} = {body}", name.text)
        }
        StmtKind::Ultrafilter { name, def } => {
            let body = match def {
                OracleDef::Principal { point, size: None } => format!("principal({point})"),
                OracleDef::Principal { point, size: Some(n) } => format!("principal({point}) on {n}"),
                OracleDef::Profinite { moduli, residues } => {
                    format!("profinite(moduli=[{}], residues=[{}])", ints(moduli), ints(residues))
                }
                OracleDef::Dyadic { residue, depth } => format!("dyadic(residue={residue}, depth={depth})"),
            };
            format!("ultrafilter {} = {body}", name.text)
        }
        StmtKind::Elem { name, family, expr } => format!("elem {} in {} = {}", name.text, family.text, elem(expr)),
        StmtKind::Map { name, source, target, values } => {
            format!("map {} : {} -> {} = [{}]", name.text, source.text, target.text, names(values))
        }
        StmtKind::Diagram { name, nodes, arrows, commute } => {
            let mut s = format!("diagram {} {{\n    nodes: {};\n    arrows: {};\n", name.text, names(nodes), names(arrows));
            if !commute.is_empty() {
                let eqs = join(commute, ", ", |(p, q)| format!("{} = {}", join(p, " ", |n| n.text.clone()), join(q, " ", |n| n.text.clone())));
                writeln!(s, "    commute: {eqs};").unwrap();
            }
            s + "}"
        }
        StmtKind::Command(c) => command(c),
        StmtKind::Assert { lhs, rhs } => {
            let q = if lhs.path.is_empty() {
                command(&lhs.command)
            } else {
                let path: String = lhs
                    .path
                    .iter()
                    .map(|p| match p {
                        PathStep::Field(f) => format!(".{f}"),
                        PathStep::Index(i) => format!(".{i}"),
                    })
                    .collect();
                format!("({}){path}", command(&lhs.command))
            };
            format!("assert {q} == {}", literal(rhs))
        }
        StmtKind::Emit(n) => format!("emit {}", n.text),
    }
}

pub fn print(script: &Script) -> String {
    script.statements.iter().map(|s| statement(s) + "\n").collect()
}
