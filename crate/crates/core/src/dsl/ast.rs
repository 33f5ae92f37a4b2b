//! Syntax tree. Equality is syntactic: spans are ignored.

use super::lexer::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Script {
    pub statements: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Semigroup { name: Name, def: SemigroupDef },
    Family { name: Name, def: FamilyDef },
    Ultrafilter { name: Name, def: OracleDef },
    Elem { name: Name, family: Name, expr: ElemExpr },
    Map { name: Name, source: Name, target: Name, values: Vec<Name> },
    Diagram { name: Name, nodes: Vec<Name>, arrows: Vec<Name>, commute: Vec<(Vec<Name>, Vec<Name>)> },
    Command(Command),
    Assert { lhs: Query, rhs: Literal },
    Emit(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemigroupDef {
    Finite(FiniteBlock),
    Builtin(BuiltinSpec),
    Corpus(Name),
    /// A structure-valued command: `product`, `compacts`, `gamma`, `tau`, …
    Derived(Box<Command>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinSpec {
    ExtNat,
    TwoPoint,
    TruncNat(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteBlock {
    pub elements: Vec<Name>,
    pub zero: Name,
    pub add: AddSpec,
    pub order: OrderSpec,
    pub aux: Option<AuxSpec>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AddSpec {
    /// Row-major table of labels.
    Table(Vec<Vec<Name>>),
    /// Sums `a + b = c` (both orders); sums with zero are implied.
    Rules { rules: Vec<(Name, Name, Name)>, otherwise: Option<Name> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderSpec {
    Algebraic,
    /// Reflexive-transitive closure of the listed pairs.
    Pairs(Vec<(Name, Name)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuxSpec {
    WayBelow,
    Pairs(Vec<(Name, Name)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScaleSpec {
    Below(Value),
    Set(Vec<Name>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompBase {
    Named(Name),
    Matrix(u64),
    PurelyInfinite,
    Custom { tag: String, of: Name },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompSpec {
    pub base: CompBase,
    pub scale: Option<ScaleSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexSpec {
    Naturals,
    Finite(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyDef {
    Constant(CompSpec, IndexSpec),
    List(Vec<CompSpec>),
    Periodic(Vec<CompSpec>, Vec<CompSpec>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleDef {
    Principal { point: u64, size: Option<u64> },
    Profinite { moduli: Vec<u64>, residues: Vec<u64> },
    Dyadic { residue: u64, depth: u64 },
}

/// A component value: a number, `inf`, or a label of a finite component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(u64),
    Label(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FnExpr {
    Const(Value),
    Except { default: Value, overrides: Vec<(u64, Value)> },
    Periodic { prefix: Vec<Value>, pattern: Vec<Value> },
    /// `slope*j + offset`, optionally only on the residues `r mod m`.
    Linear { slope: u64, offset: u64, on: Option<(u64, Vec<u64>)> },
    Opaque { seed: u64, modulus: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    Fin(u64),
    Inf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Zero,
    Ref(Name),
    Anchor(FnExpr),
    Chain(Vec<FnExpr>),
}

/// `k₁*a₁ + … + kₘ*aₘ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElemExpr {
    pub terms: Vec<(Multiplier, Atom)>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealSpec {
    C0,
    Ultra(Name),
    Everything,
}

/// What a property command runs on: a semigroup (optionally scaled) or a
/// family (its product, or its ultraproduct under `mod ultra U`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Target {
    pub name: Name,
    pub scale: Option<ScaleSpec>,
    pub modulo: Option<IdealSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparabilityKind {
    Unperforated,
    Almost,
    Near,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Check(Name),
    Product(Vec<Name>),
    Ultraproduct { family: Name, oracle: Name },
    Quotient { family: Name, ideal: IdealSpec, of: QuotientOf },
    Compacts { name: Name, modulo: Option<IdealSpec> },
    Leq { lhs: ElemExpr, rhs: ElemExpr, modulo: Option<IdealSpec> },
    Carrier { elem: ElemExpr, target: Target },
    ScaleContains { elem: ElemExpr, target: Target },
    Simple(Target),
    Cn { n: u64, target: Target },
    Pi { n: u64, name: Name },
    Comparability { kind: ComparabilityKind, target: Target },
    TotallyOrdered { target: Target, sample: Option<u64> },
    Mvn { family: Name, oracle: Option<Name>, elem: ElemExpr },
    Verdict { family: Name, oracle: Name },
    Colimit(Name),
    Limit(Name),
    Coequalizer(Name, Name),
    Gamma(Name),
    Tau(Name),
    Antisym(Name),
    Iota(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotientOf {
    Classify(Vec<Name>),
    Sample(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub kind: CommandKind,
    pub span: Span,
}

/// A command result, optionally projected along a field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub command: Command,
    pub path: Vec<PathStep>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathStep {
    Field(String),
    Index(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Bool(bool),
    Unknown,
    Int(u64),
    Inf,
    Str(String),
    List(Vec<Literal>),
}
