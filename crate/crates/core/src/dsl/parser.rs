//! Recursive-descent parser. Statements start with a keyword and need no
//! terminator; fields inside a `finite { … }` block end with `;`.

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{lex, Span, Tok, Token};
use super::Diagnostic;

type PResult<T> = Result<T, Diagnostic>;

const COMMANDS: [&str; 24] = [
    "check",
    "product",
    "ultraproduct",
    "quotient",
    "compacts",
    "leq",
    "in-carrier",
    "in-scale",
    "simple",
    "cn",
    "pi",
    "unperforated",
    "almost",
    "near",
    "totally-ordered",
    "mvn",
    "verdict",
    "colimit",
    "limit",
    "coequalizer",
    "gamma",
    "tau",
    "antisym",
    "iota",
];

/// Parses and resolves names. Syntax errors stop at the first one; name
/// errors are collected for the whole script.
pub fn parse(src: &str) -> Result<Script, Vec<Diagnostic>> {
    let tokens = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser { tokens, pos: 0 };
    let script = p.script().map_err(|d| vec![d])?;
    let errors = resolve(&script);
    if errors.is_empty() {
        Ok(script)
    } else {
        Err(errors)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    /// Span of the last consumed token.
    fn prev(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        Err(Diagnostic::error(self.span(), format!("expected {wanted}, found {}", self.peek())))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.bump();
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.is_kw(k);
        if hit {
            self.bump();
        }
        hit
    }

    fn punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(text) => Ok(Name { text, span: self.bump().span }),
            _ => self.unexpected("a name"),
        }
    }

    /// A label of a finite carrier: a name or a number.
    fn label(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(text) => Ok(Name { text, span: self.bump().span }),
            Tok::Int(n) => Ok(Name { text: n.to_string(), span: self.bump().span }),
            _ => self.unexpected("an element label"),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("an integer"),
        }
    }

    /// `item (, item)*` up to (not including) `close`.
    fn list<T>(&mut self, close: &str, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.is_punct(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.eat_punct(",") {
                return Ok(out);
            }
        }
    }

    fn bracketed<T>(&mut self, item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.punct("[")?;
        let v = self.list("]", item)?;
        self.punct("]")?;
        Ok(v)
    }

    /// Arguments of a call whose arity is fixed; a mismatch is reported at the call.
    fn args<T>(&mut self, callee: &str, arity: usize, item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let start = self.span();
        self.punct("(")?;
        let v = self.list(")", item)?;
        self.punct(")")?;
        if v.len() != arity {
            return Err(Diagnostic::error(
                start.to(self.prev()),
                format!("arity mismatch: {callee} takes {arity} argument{}, got {}", if arity == 1 { "" } else { "s" }, v.len()),
            ));
        }
        Ok(v)
    }

    fn script(&mut self) -> PResult<Script> {
        let mut statements = Vec::new();
        while *self.peek() != Tok::Eof {
            statements.push(self.statement()?);
        }
        Ok(Script { statements })
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Ident(k) => match k.as_str() {
                "semigroup" => {
                    self.bump();
                    let name = self.name()?;
                    self.punct("=")?;
                    StmtKind::Semigroup { name, def: self.semigroup_def()? }
                }
                "family" => {
                    self.bump();
                    let name = self.name()?;
                    self.punct("=")?;
                    StmtKind::Family { name, def: self.family_def()? }
                }
                "ultrafilter" => {
                    self.bump();
                    let name = self.name()?;
                    self.punct("=")?;
                    StmtKind::Ultrafilter { name, def: self.oracle_def()? }
                }
                "elem" => {
                    self.bump();
                    let name = self.name()?;
                    self.kw("in")?;
                    let family = self.name()?;
                    self.punct("=")?;
                    StmtKind::Elem { name, family, expr: self.elem_expr()? }
                }
                "map" => {
                    self.bump();
                    let name = self.name()?;
                    self.punct(":")?;
                    let source = self.name()?;
                    self.punct("->")?;
                    let target = self.name()?;
                    self.punct("=")?;
                    StmtKind::Map { name, source, target, values: self.bracketed(Self::label)? }
                }
                "diagram" => {
                    self.bump();
                    self.diagram()?
                }
                "assert" => {
                    self.bump();
                    let lhs = self.query()?;
                    self.punct("==")?;
                    StmtKind::Assert { lhs, rhs: self.literal()? }
                }
                "emit" => {
                    self.bump();
                    StmtKind::Emit(self.name()?)
                }
                k if COMMANDS.contains(&k) => StmtKind::Command(self.command()?),
                _ => return self.unexpected("a statement"),
            },
            _ => return self.unexpected("a statement"),
        };
        Ok(Stmt { kind, span: start.to(self.prev()) })
    }

    fn semigroup_def(&mut self) -> PResult<SemigroupDef> {
        if self.eat_kw("finite") {
            return Ok(SemigroupDef::Finite(self.finite_block()?));
        }
        if self.is_kw("builtin") {
            self.bump();
            let start = self.span();
            self.punct("(")?;
            let b = match self.name()?.text.as_str() {
                "extnat" => BuiltinSpec::ExtNat,
                "twopoint" => BuiltinSpec::TwoPoint,
                "truncnat" => BuiltinSpec::TruncNat(self.int()?),
                other => {
                    return Err(Diagnostic::error(
                        self.prev(),
                        format!("unknown builtin `{other}`; expected extnat, twopoint or truncnat k"),
                    ))
                }
            };
            if self.is_punct(",") {
                return Err(Diagnostic::error(start.to(self.span()), "arity mismatch: builtin takes one argument"));
            }
            self.punct(")")?;
            return Ok(SemigroupDef::Builtin(b));
        }
        if self.is_kw("corpus") {
            self.bump();
            let v = self.args("corpus", 1, Self::label)?;
            return Ok(SemigroupDef::Corpus(v.into_iter().next().unwrap()));
        }
        match self.peek() {
            Tok::Ident(k) if COMMANDS.contains(&k.as_str()) => Ok(SemigroupDef::Derived(Box::new(self.command()?))),
            _ => self.unexpected("`finite`, `builtin`, `corpus` or a structure command"),
        }
    }

    fn finite_block(&mut self) -> PResult<FiniteBlock> {
        let start = self.span();
        self.punct("{")?;
        let mut elements = None;
        let mut zero = None;
        let mut add = None;
        let mut order = None;
        let mut aux = None;
        while !self.is_punct("}") {
            let key = self.name()?;
            self.punct(":")?;
            let dup = match key.text.as_str() {
                "elements" => elements.replace(self.list(";", Self::label)?).is_some(),
                "zero" => zero.replace(self.label()?).is_some(),
                "add" => add.replace(self.add_spec()?).is_some(),
                "order" => order.replace(self.order_spec()?).is_some(),
                "aux" => aux.replace(self.aux_spec()?).is_some(),
                other => return Err(Diagnostic::error(key.span, format!("unknown field `{other}`"))),
            };
            if dup {
                return Err(Diagnostic::error(key.span, format!("field `{}` given twice", key.text)));
            }
            self.punct(";")?;
        }
        self.bump();
        let span = start.to(self.prev());
        let missing = |f: &str| Diagnostic::error(span, format!("finite block is missing `{f}:`"));
        Ok(FiniteBlock {
            elements: elements.ok_or_else(|| missing("elements"))?,
            zero: zero.ok_or_else(|| missing("zero"))?,
            add: add.ok_or_else(|| missing("add"))?,
            order: order.unwrap_or(OrderSpec::Algebraic),
            aux,
            span,
        })
    }

    fn add_spec(&mut self) -> PResult<AddSpec> {
        if self.is_punct("[") {
            return Ok(AddSpec::Table(self.bracketed(|p| p.bracketed(Self::label))?));
        }
        let mut rules = Vec::new();
        let mut otherwise = None;
        loop {
            if self.eat_kw("otherwise") {
                otherwise = Some(self.label()?);
                break;
            }
            let a = self.label()?;
            self.punct("+")?;
            let b = self.label()?;
            self.punct("=")?;
            rules.push((a, b, self.label()?));
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(AddSpec::Rules { rules, otherwise })
    }

    fn pairs(&mut self, rel: &str) -> PResult<Vec<(Name, Name)>> {
        self.list(";", |p| {
            let a = p.label()?;
            p.punct(rel)?;
            Ok((a, p.label()?))
        })
    }

    fn order_spec(&mut self) -> PResult<OrderSpec> {
        if self.eat_kw("algebraic") {
            return Ok(OrderSpec::Algebraic);
        }
        Ok(OrderSpec::Pairs(self.pairs("<=")?))
    }

    fn aux_spec(&mut self) -> PResult<AuxSpec> {
        if self.eat_kw("way-below") {
            return Ok(AuxSpec::WayBelow);
        }
        Ok(AuxSpec::Pairs(self.pairs("<<")?))
    }

    fn comp_spec(&mut self) -> PResult<CompSpec> {
        let start = self.span();
        let base = if self.is_kw("matrix") && matches!(self.peek_at(1), Tok::Punct("(")) {
            self.bump();
            CompBase::Matrix(self.args("matrix", 1, Self::int)?[0])
        } else if self.eat_kw("spi") {
            CompBase::PurelyInfinite
        } else if self.is_kw("custom") && matches!(self.peek_at(1), Tok::Punct("(")) {
            self.bump();
            self.punct("(")?;
            let tag = match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    s
                }
                _ => return self.unexpected("a model tag string"),
            };
            self.punct(",")?;
            let of = self.name()?;
            self.punct(")")?;
            CompBase::Custom { tag, of }
        } else {
            CompBase::Named(self.name()?)
        };
        let scale = if self.eat_kw("scale") { Some(self.scale_spec()?) } else { None };
        if scale.is_some() && matches!(base, CompBase::Matrix(_) | CompBase::PurelyInfinite) {
            return Err(Diagnostic::error(start.to(self.prev()), "algebra models carry their own scale"));
        }
        Ok(CompSpec { base, scale })
    }

    fn scale_spec(&mut self) -> PResult<ScaleSpec> {
        if self.eat_punct("<=") {
            return Ok(ScaleSpec::Below(self.value()?));
        }
        self.punct("{")?;
        let v = self.list("}", Self::label)?;
        self.punct("}")?;
        Ok(ScaleSpec::Set(v))
    }

    fn index_spec(&mut self) -> PResult<IndexSpec> {
        self.kw("on")?;
        match self.peek().clone() {
            Tok::Ident(s) if s == "N" => {
                self.bump();
                Ok(IndexSpec::Naturals)
            }
            Tok::Int(_) => Ok(IndexSpec::Finite(self.int()?)),
            _ => self.unexpected("`N` or an index-set size"),
        }
    }

    fn family_def(&mut self) -> PResult<FamilyDef> {
        let head = self.name()?;
        match head.text.as_str() {
            "constant" => {
                let c = self.args("constant", 1, Self::comp_spec)?.remove(0);
                Ok(FamilyDef::Constant(c, self.index_spec()?))
            }
            "list" => {
                self.punct("(")?;
                let v = self.list(")", Self::comp_spec)?;
                self.punct(")")?;
                if v.is_empty() {
                    return Err(Diagnostic::error(head.span.to(self.prev()), "a list family needs a component"));
                }
                Ok(FamilyDef::List(v))
            }
            "periodic" => {
                let mut v = self.args("periodic", 2, |p| p.bracketed(Self::comp_spec))?;
                let pattern = v.pop().unwrap();
                if pattern.is_empty() {
                    return Err(Diagnostic::error(head.span.to(self.prev()), "empty component pattern"));
                }
                Ok(FamilyDef::Periodic(v.pop().unwrap(), pattern))
            }
            other => Err(Diagnostic::error(head.span, format!("unknown family form `{other}`"))),
        }
    }

    fn keyed_ints(&mut self, key: &str) -> PResult<Vec<u64>> {
        self.kw(key)?;
        self.punct("=")?;
        self.bracketed(Self::int)
    }

    fn keyed_int(&mut self, key: &str) -> PResult<u64> {
        self.kw(key)?;
        self.punct("=")?;
        self.int()
    }

    fn oracle_def(&mut self) -> PResult<OracleDef> {
        let head = self.name()?;
        match head.text.as_str() {
            "principal" => {
                let point = self.args("principal", 1, Self::int)?[0];
                let size = if self.is_kw("on") {
                    match self.index_spec()? {
                        IndexSpec::Naturals => None,
                        IndexSpec::Finite(n) => Some(n),
                    }
                } else {
                    None
                };
                Ok(OracleDef::Principal { point, size })
            }
            "profinite" => {
                self.punct("(")?;
                let moduli = self.keyed_ints("moduli")?;
                self.punct(",")?;
                let residues = self.keyed_ints("residues")?;
                self.punct(")")?;
                Ok(OracleDef::Profinite { moduli, residues })
            }
            "dyadic" => {
                self.punct("(")?;
                let residue = self.keyed_int("residue")?;
                self.punct(",")?;
                let depth = self.keyed_int("depth")?;
                self.punct(")")?;
                Ok(OracleDef::Dyadic { residue, depth })
            }
            other => Err(Diagnostic::error(head.span, format!("unknown ultrafilter form `{other}`"))),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Value::Int(n))
            }
            Tok::Ident(_) => Ok(Value::Label(self.name()?)),
            _ => self.unexpected("a value"),
        }
    }

    fn fn_expr(&mut self) -> PResult<FnExpr> {
        self.kw("fn")?;
        if self.is_kw("periodic") && matches!(self.peek_at(1), Tok::Punct("(")) {
            self.bump();
            let mut v = self.args("periodic", 2, |p| p.bracketed(Self::value))?;
            let pattern = v.pop().unwrap();
            return Ok(FnExpr::Periodic { prefix: v.pop().unwrap(), pattern });
        }
        if self.is_kw("opaque") && matches!(self.peek_at(1), Tok::Punct("(")) {
            self.bump();
            let v = self.args("opaque", 2, Self::int)?;
            return Ok(FnExpr::Opaque { seed: v[0], modulus: v[1] });
        }
        // Linear: `[k*]j [+ c]`.
        let slope = match (self.peek().clone(), self.peek_at(1).clone(), self.peek_at(2).clone()) {
            (Tok::Ident(j), _, _) if j == "j" => {
                self.bump();
                Some(1)
            }
            (Tok::Int(k), Tok::Punct("*"), Tok::Ident(j)) if j == "j" => {
                self.pos += 3;
                Some(k)
            }
            _ => None,
        };
        if let Some(slope) = slope {
            let offset = if self.eat_punct("+") { self.int()? } else { 0 };
            let on = if self.eat_kw("on") {
                self.kw("residues")?;
                self.punct("(")?;
                let m = self.int()?;
                self.punct(",")?;
                let r = self.bracketed(Self::int)?;
                self.punct(")")?;
                Some((m, r))
            } else {
                None
            };
            return Ok(FnExpr::Linear { slope, offset, on });
        }
        let default = self.value()?;
        if self.eat_kw("except") {
            self.punct("{")?;
            let overrides = self.list("}", |p| {
                let j = p.int()?;
                p.punct(":")?;
                Ok((j, p.value()?))
            })?;
            self.punct("}")?;
            return Ok(FnExpr::Except { default, overrides });
        }
        Ok(FnExpr::Const(default))
    }

    fn atom(&mut self) -> PResult<Atom> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Atom::Zero)
            }
            Tok::Ident(k) if k == "anchor" && matches!(self.peek_at(1), Tok::Punct("(")) => {
                self.bump();
                Ok(Atom::Anchor(self.args("anchor", 1, Self::fn_expr)?.remove(0)))
            }
            Tok::Ident(k) if k == "chain" && matches!(self.peek_at(1), Tok::Punct("(")) => {
                self.bump();
                self.punct("(")?;
                self.kw("levels")?;
                self.punct("=")?;
                let levels = self.bracketed(Self::fn_expr)?;
                if levels.is_empty() {
                    return Err(Diagnostic::error(self.prev(), "a chain needs at least one level"));
                }
                if self.eat_punct(",") {
                    self.kw("tail")?;
                    self.punct("=")?;
                    self.kw("stable")?;
                }
                self.punct(")")?;
                Ok(Atom::Chain(levels))
            }
            Tok::Ident(_) => Ok(Atom::Ref(self.name()?)),
            _ => self.unexpected("an element"),
        }
    }

    fn elem_expr(&mut self) -> PResult<ElemExpr> {
        let start = self.span();
        let mut terms = Vec::new();
        loop {
            let mult = match (self.peek().clone(), self.peek_at(1).clone()) {
                (Tok::Int(k), Tok::Punct("*")) => {
                    self.pos += 2;
                    Multiplier::Fin(k)
                }
                (Tok::Ident(i), Tok::Punct("*")) if i == "inf" => {
                    self.pos += 2;
                    Multiplier::Inf
                }
                _ => Multiplier::Fin(1),
            };
            terms.push((mult, self.atom()?));
            if !self.eat_punct("+") {
                break;
            }
        }
        Ok(ElemExpr { terms, span: start.to(self.prev()) })
    }

    fn ideal(&mut self) -> PResult<IdealSpec> {
        let head = self.name()?;
        match head.text.as_str() {
            "c0" => Ok(IdealSpec::C0),
            "ultra" => Ok(IdealSpec::Ultra(self.name()?)),
            "everything" => Ok(IdealSpec::Everything),
            other => Err(Diagnostic::error(head.span, format!("unknown ideal `{other}`; expected c0, ultra U or everything"))),
        }
    }

    fn modulo(&mut self) -> PResult<Option<IdealSpec>> {
        if self.eat_kw("mod") {
            Ok(Some(self.ideal()?))
        } else {
            Ok(None)
        }
    }

    fn target(&mut self) -> PResult<Target> {
        let name = self.name()?;
        let scale = if self.eat_kw("scale") { Some(self.scale_spec()?) } else { None };
        Ok(Target { name, scale, modulo: self.modulo()? })
    }

    fn names_until_comma(&mut self) -> PResult<Vec<Name>> {
        let mut v = vec![self.name()?];
        while self.eat_punct(",") {
            v.push(self.name()?);
        }
        Ok(v)
    }

    fn command(&mut self) -> PResult<Command> {
        let start = self.span();
        let head = self.name()?;
        let kind = match head.text.as_str() {
            "check" => CommandKind::Check(self.name()?),
            "product" => CommandKind::Product(self.names_until_comma()?),
            "ultraproduct" => {
                let family = self.name()?;
                self.kw("by")?;
                CommandKind::Ultraproduct { family, oracle: self.name()? }
            }
            "quotient" => {
                let family = self.name()?;
                self.kw("mod")?;
                let ideal = self.ideal()?;
                let of = if self.eat_kw("sample") {
                    QuotientOf::Sample(self.int()?)
                } else {
                    self.kw("classify")?;
                    QuotientOf::Classify(self.bracketed(Self::name)?)
                };
                CommandKind::Quotient { family, ideal, of }
            }
            "compacts" => {
                let name = self.name()?;
                CommandKind::Compacts { name, modulo: self.modulo()? }
            }
            "leq" => {
                let lhs = self.elem_expr()?;
                self.punct(",")?;
                let rhs = self.elem_expr()?;
                CommandKind::Leq { lhs, rhs, modulo: self.modulo()? }
            }
            "in-carrier" | "in-scale" => {
                let elem = self.elem_expr()?;
                self.kw("of")?;
                let target = self.target()?;
                if head.text == "in-carrier" {
                    CommandKind::Carrier { elem, target }
                } else {
                    CommandKind::ScaleContains { elem, target }
                }
            }
            "simple" => CommandKind::Simple(self.target()?),
            "cn" => {
                let n = self.int()?;
                CommandKind::Cn { n, target: self.target()? }
            }
            "pi" => {
                let n = self.int()?;
                CommandKind::Pi { n, name: self.name()? }
            }
            "unperforated" | "almost" | "near" => {
                let kind = match head.text.as_str() {
                    "unperforated" => ComparabilityKind::Unperforated,
                    "almost" => ComparabilityKind::Almost,
                    _ => ComparabilityKind::Near,
                };
                CommandKind::Comparability { kind, target: self.target()? }
            }
            "totally-ordered" => {
                let target = self.target()?;
                let sample = if self.eat_kw("sample") { Some(self.int()?) } else { None };
                CommandKind::TotallyOrdered { target, sample }
            }
            "mvn" => {
                let elem = self.elem_expr()?;
                self.kw("in")?;
                let family = self.name()?;
                let oracle = if self.eat_kw("by") { Some(self.name()?) } else { None };
                CommandKind::Mvn { family, oracle, elem }
            }
            "verdict" => {
                let family = self.name()?;
                self.kw("by")?;
                CommandKind::Verdict { family, oracle: self.name()? }
            }
            "colimit" => CommandKind::Colimit(self.name()?),
            "limit" => CommandKind::Limit(self.name()?),
            "coequalizer" => {
                let v = self.names_until_comma()?;
                if v.len() != 2 {
                    return Err(Diagnostic::error(
                        head.span.to(self.prev()),
                        format!("arity mismatch: coequalizer takes 2 arguments, got {}", v.len()),
                    ));
                }
                CommandKind::Coequalizer(v[0].clone(), v[1].clone())
            }
            "gamma" => CommandKind::Gamma(self.name()?),
            "tau" => CommandKind::Tau(self.name()?),
            "antisym" => CommandKind::Antisym(self.name()?),
            "iota" => CommandKind::Iota(self.name()?),
            other => return Err(Diagnostic::error(head.span, format!("unknown command `{other}`"))),
        };
        Ok(Command { kind, span: start.to(self.prev()) })
    }

    fn diagram(&mut self) -> PResult<StmtKind> {
        let name = self.name()?;
        self.punct("{")?;
        let mut nodes = Vec::new();
        let mut arrows = Vec::new();
        let mut commute = Vec::new();
        while !self.is_punct("}") {
            let key = self.name()?;
            self.punct(":")?;
            match key.text.as_str() {
                "nodes" => nodes = self.list(";", Self::name)?,
                "arrows" => arrows = self.list(";", Self::name)?,
                "commute" => {
                    commute = self.list(";", |p| {
                        let mut lhs = vec![p.name()?];
                        while !p.is_punct("=") {
                            lhs.push(p.name()?);
                        }
                        p.bump();
                        let mut rhs = vec![p.name()?];
                        while matches!(p.peek(), Tok::Ident(_)) {
                            rhs.push(p.name()?);
                        }
                        Ok((lhs, rhs))
                    })?
                }
                other => return Err(Diagnostic::error(key.span, format!("unknown field `{other}`"))),
            }
            self.punct(";")?;
        }
        self.bump();
        Ok(StmtKind::Diagram { name, nodes, arrows, commute })
    }

    fn query(&mut self) -> PResult<Query> {
        if !self.eat_punct("(") {
            return Ok(Query { command: self.command()?, path: vec![] });
        }
        let command = self.command()?;
        self.punct(")")?;
        let mut path = Vec::new();
        while self.eat_punct(".") {
            match self.peek().clone() {
                Tok::Ident(f) => {
                    self.bump();
                    path.push(PathStep::Field(f));
                }
                Tok::Int(i) => {
                    self.bump();
                    path.push(PathStep::Index(i));
                }
                _ => return self.unexpected("a field name or index"),
            }
        }
        Ok(Query { command, path })
    }

    fn literal(&mut self) -> PResult<Literal> {
        let lit = match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "true" => Literal::Bool(true),
                "false" => Literal::Bool(false),
                "unknown" => Literal::Unknown,
                "inf" => Literal::Inf,
                _ => return self.unexpected("a literal"),
            },
            Tok::Int(n) => Literal::Int(n),
            Tok::Str(s) => Literal::Str(s),
            Tok::Punct("[") => return Ok(Literal::List(self.bracketed(Self::literal)?)),
            _ => return self.unexpected("a literal"),
        };
        self.bump();
        Ok(lit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Semigroup,
    Family,
    Ultrafilter,
    Elem,
    Map,
    Diagram,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Semigroup => "a semigroup",
            Kind::Family => "a family",
            Kind::Ultrafilter => "an ultrafilter",
            Kind::Elem => "an element",
            Kind::Map => "a map",
            Kind::Diagram => "a diagram",
        }
    }
}

struct Scope {
    kinds: HashMap<String, Kind>,
    errors: Vec<Diagnostic>,
}

impl Scope {
    fn expect(&mut self, n: &Name, allowed: &[Kind]) {
        match self.kinds.get(&n.text) {
            None => self.errors.push(Diagnostic::error(n.span, format!("unknown identifier `{}`", n.text))),
            Some(k) if !allowed.contains(k) => {
                let want: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
                self.errors.push(Diagnostic::error(
                    n.span,
                    format!("`{}` is {}, expected {}", n.text, k.name(), want.join(" or ")),
                ));
            }
            Some(_) => {}
        }
    }

    fn define(&mut self, n: &Name, k: Kind) {
        if self.kinds.insert(n.text.clone(), k).is_some() {
            self.errors.push(Diagnostic::error(n.span, format!("`{}` is already defined", n.text)));
        }
    }

    fn comp(&mut self, c: &CompSpec) {
        match &c.base {
            CompBase::Named(n) | CompBase::Custom { of: n, .. } => self.expect(n, &[Kind::Semigroup]),
            CompBase::Matrix(_) | CompBase::PurelyInfinite => {}
        }
    }

    fn ideal(&mut self, i: &Option<IdealSpec>) {
        if let Some(IdealSpec::Ultra(u)) = i {
            self.expect(u, &[Kind::Ultrafilter]);
        }
    }

    fn expr(&mut self, e: &ElemExpr) {
        for (_, a) in &e.terms {
            if let Atom::Ref(n) = a {
                self.expect(n, &[Kind::Elem]);
            }
        }
    }

    fn target(&mut self, t: &Target) {
        self.expect(&t.name, &[Kind::Semigroup, Kind::Family]);
        self.ideal(&t.modulo);
    }

    fn command(&mut self, c: &Command) {
        use CommandKind as C;
        match &c.kind {
            C::Check(n) | C::Gamma(n) | C::Tau(n) | C::Antisym(n) | C::Iota(n) | C::Pi { name: n, .. } => {
                self.expect(n, &[Kind::Semigroup])
            }
            C::Product(v) => v.iter().for_each(|n| self.expect(n, &[Kind::Semigroup])),
            C::Ultraproduct { family, oracle } | C::Verdict { family, oracle } => {
                self.expect(family, &[Kind::Family]);
                self.expect(oracle, &[Kind::Ultrafilter]);
            }
            C::Quotient { family, ideal, of } => {
                self.expect(family, &[Kind::Family]);
                self.ideal(&Some(ideal.clone()));
                if let QuotientOf::Classify(v) = of {
                    v.iter().for_each(|n| self.expect(n, &[Kind::Elem]));
                }
            }
            C::Compacts { name, modulo } => {
                self.expect(name, &[Kind::Semigroup, Kind::Elem]);
                self.ideal(modulo);
            }
            C::Leq { lhs, rhs, modulo } => {
                self.expr(lhs);
                self.expr(rhs);
                self.ideal(modulo);
            }
            C::Carrier { elem, target } | C::ScaleContains { elem, target } => {
                self.expr(elem);
                self.target(target);
            }
            C::Simple(t) | C::Cn { target: t, .. } | C::Comparability { target: t, .. } | C::TotallyOrdered { target: t, .. } => {
                self.target(t)
            }
            C::Mvn { family, oracle, elem } => {
                self.expr(elem);
                self.expect(family, &[Kind::Family]);
                if let Some(u) = oracle {
                    self.expect(u, &[Kind::Ultrafilter]);
                }
            }
            C::Colimit(d) | C::Limit(d) => self.expect(d, &[Kind::Diagram]),
            C::Coequalizer(f, g) => {
                self.expect(f, &[Kind::Map]);
                self.expect(g, &[Kind::Map]);
            }
        }
    }
}

fn resolve(script: &Script) -> Vec<Diagnostic> {
    let mut s = Scope { kinds: HashMap::new(), errors: Vec::new() };
    for st in &script.statements {
        match &st.kind {
            StmtKind::Semigroup { name, def } => {
                if let SemigroupDef::Derived(c) = def {
                    s.command(c);
                }
                s.define(name, Kind::Semigroup);
            }
            StmtKind::Family { name, def } => {
                match def {
                    FamilyDef::Constant(c, _) => s.comp(c),
                    FamilyDef::List(v) => v.iter().for_each(|c| s.comp(c)),
                    FamilyDef::Periodic(a, b) => a.iter().chain(b).for_each(|c| s.comp(c)),
                }
                s.define(name, Kind::Family);
            }
            StmtKind::Ultrafilter { name, .. } => s.define(name, Kind::Ultrafilter),
            StmtKind::Elem { name, family, expr } => {
                s.expect(family, &[Kind::Family]);
                s.expr(expr);
                s.define(name, Kind::Elem);
            }
            StmtKind::Map { name, source, target, .. } => {
                s.expect(source, &[Kind::Semigroup]);
                s.expect(target, &[Kind::Semigroup]);
                s.define(name, Kind::Map);
            }
            StmtKind::Diagram { name, nodes, arrows, commute } => {
                nodes.iter().for_each(|n| s.expect(n, &[Kind::Semigroup]));
                arrows.iter().for_each(|n| s.expect(n, &[Kind::Map]));
                for (p, q) in commute {
                    for n in p.iter().chain(q) {
                        if !arrows.iter().any(|a| a.text == n.text) {
                            s.errors.push(Diagnostic::error(n.span, format!("`{}` is not an arrow of `{}`", n.text, name.text)));
                        }
                    }
                }
                s.define(name, Kind::Diagram);
            }
            StmtKind::Command(c) => s.command(c),
            StmtKind::Assert { lhs, .. } => s.command(&lhs.command),
            StmtKind::Emit(n) => s.expect(
                n,
                &[Kind::Semigroup, Kind::Family, Kind::Ultrafilter, Kind::Elem, Kind::Map, Kind::Diagram],
            ),
        }
    }
    s.errors
}
