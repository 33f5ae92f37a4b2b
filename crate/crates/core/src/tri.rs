//! Three-valued answers. Every `False` carries a witness; every `Unknown`
//! carries the spent budget and the frontier reached.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    True,
    False,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<String>,
}

impl Witness {
    pub fn text(description: impl Into<String>) -> Self {
        Witness { description: description.into(), ..Default::default() }
    }

    pub fn at(description: impl Into<String>, level: u64, index: Option<u64>) -> Self {
        Witness { description: description.into(), level: Some(level), index, elements: vec![] }
    }

    pub fn elements(description: impl Into<String>, elements: Vec<String>) -> Self {
        Witness { description: description.into(), level: None, index: None, elements }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub value: Tri,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub budget_spent: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frontier: Option<(u64, u64)>,
}

impl Verdict {
    pub fn yes() -> Self {
        Verdict { value: Tri::True, witness: None, budget_spent: 0, frontier: None }
    }

    pub fn no(w: Witness) -> Self {
        Verdict { value: Tri::False, witness: Some(w), budget_spent: 0, frontier: None }
    }

    pub fn unknown(budget_spent: u64, frontier: (u64, u64)) -> Self {
        Verdict { value: Tri::Unknown, witness: None, budget_spent, frontier: Some(frontier) }
    }

    pub fn from_bool(b: bool, w: impl FnOnce() -> Witness) -> Self {
        if b {
            Self::yes()
        } else {
            Self::no(w())
        }
    }

    pub fn with_spent(mut self, spent: u64) -> Self {
        self.budget_spent = spent;
        self
    }

    pub fn is_true(&self) -> bool {
        self.value == Tri::True
    }

    pub fn is_false(&self) -> bool {
        self.value == Tri::False
    }

    pub fn is_unknown(&self) -> bool {
        self.value == Tri::Unknown
    }
}
