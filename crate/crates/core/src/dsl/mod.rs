//! A small declarative language for defining structures, families,
//! ultrafilters and elements, and for running every operation on them.
//!
//! ```text
//! semigroup N = builtin(extnat)
//! family F = constant(N) on N
//! elem u in F = anchor(fn 1)
//! assert (leq anchor(fn j), 3*u).witness.index == 4
//! ```
//!
//! Output is deterministic: the same script and [`Config`] give byte-identical
//! JSON with sorted keys.

pub mod ast;
mod eval;
pub mod lexer;
mod parser;
mod printer;

use std::fmt::Write;
use std::path::PathBuf;

use serde::Serialize;

pub use eval::{evaluate, Entry, Report};
pub use lexer::Span;
pub use parser::parse;
pub use printer::print;

pub const SCHEMA: &str = "cusp/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    #[serde(flatten)]
    pub span: Span,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, span, message: message.into(), witness: None }
    }

    /// `file:line:col: error: message`, the source line and a caret underline.
    pub fn render(&self, file: &str, src: &str) -> String {
        let mut out = format!("{file}:{}:{}: error: {}\n", self.span.line, self.span.column, self.message);
        if let Some(text) = src.lines().nth(self.span.line.saturating_sub(1) as usize) {
            let width = src
                .get(self.span.start..self.span.end)
                .map_or(1, |s| s.lines().next().unwrap_or("").chars().count().max(1));
            let pad = " ".repeat(self.span.column.saturating_sub(1) as usize);
            writeln!(out, "  | {text}\n  | {pad}{}", "^".repeat(width)).unwrap();
        }
        if let Some(w) = &self.witness {
            writeln!(out, "  = witness: {w}").unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Config {
    /// Step budget passed to every semi-decision.
    pub budget: u64,
    /// Summand cap for `generated_within` and the search bound of `mvn`.
    pub summand_cap: u64,
    /// Seed for sampled commands.
    pub seed: u64,
    /// Directory searched by `corpus(name)` before the built-in corpus.
    #[serde(skip)]
    pub corpus_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config { budget: 10_000, summand_cap: 64, seed: 0, corpus_dir: None }
    }
}
