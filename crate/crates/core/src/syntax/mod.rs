//! First-order formulas: AST, lexing, parsing and canonical printing.
//!
//! The accepted surface syntax mixes Unicode and ASCII spellings:
//!
//! | connective | Unicode | ASCII |
//! |------------|---------|-------|
//! | universal  | `∀`     | `forall` |
//! | existential| `∃`     | `exists` |
//! | negation   | `¬`     | `~` |
//! | conjunction| `∧`     | `&` |
//! | disjunction| `∨`     | `\|` |
//! | implication| `→` `⇒` | `->` |
//! | biconditional | `↔`  | `<->` |
//! | exclusive or | `⊕`   | |
//!
//! `¬` binds tightest, then `∧`, `∨`, `→`, `↔`/`⊕`. Binary connectives are
//! right-associative and a quantifier's scope extends as far right as possible.
//! `a ⊕ b` is desugared to `¬(a ↔ b)`.

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse, MAX_DEPTH};
pub use printer::print;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Variable(String),
    Constant(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Variable(n) | Term::Constant(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(Atom::new(predicate, args))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    /// Variables occurring outside the scope of any binder for their name.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Wraps the formula in universal quantifiers over its free variables,
    /// in sorted order.
    pub fn universal_closure(self) -> Formula {
        let free = self.free_vars();
        free.into_iter()
            .rev()
            .fold(self, |body, v| Formula::forall(v, body))
    }

    /// Every atom in the formula, left to right.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(x) | Formula::ForAll(_, x) | Formula::Exists(_, x) => x.visit_atoms(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Rewrites predicate names in place.
    pub fn map_predicates(&mut self, f: &mut impl FnMut(&str, usize) -> Option<String>) {
        match self {
            Formula::Atom(a) => {
                if let Some(name) = f(&a.predicate, a.args.len()) {
                    a.predicate = name;
                }
            }
            Formula::Not(x) | Formula::ForAll(_, x) | Formula::Exists(_, x) => {
                x.map_predicates(f)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.map_predicates(f);
                b.map_predicates(f);
            }
        }
    }

    /// Constant names, sorted and deduplicated.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            for t in &a.args {
                if let Term::Constant(c) = t {
                    out.insert(c.clone());
                }
            }
        });
        out
    }

    /// `(name, arity)` pairs of every predicate used.
    pub fn predicates(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.insert((a.predicate.clone(), a.args.len()));
        });
        out
    }

    /// Replaces free occurrences of `var` with the constant `value`.
    pub fn substitute(&self, var: &str, value: &str) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom {
                predicate: a.predicate.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Variable(v) if v == var => Term::Constant(value.to_string()),
                        other => other.clone(),
                    })
                    .collect(),
            }),
            Formula::Not(x) => Formula::not(x.substitute(var, value)),
            Formula::And(a, b) => Formula::and(a.substitute(var, value), b.substitute(var, value)),
            Formula::Or(a, b) => Formula::or(a.substitute(var, value), b.substitute(var, value)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute(var, value), b.substitute(var, value))
            }
            Formula::Iff(a, b) => Formula::iff(a.substitute(var, value), b.substitute(var, value)),
            Formula::ForAll(v, _) | Formula::Exists(v, _) if v == var => self.clone(),
            Formula::ForAll(v, body) => Formula::forall(v.clone(), body.substitute(var, value)),
            Formula::Exists(v, body) => Formula::exists(v.clone(), body.substitute(var, value)),
        }
    }

    /// Alpha-renames bound variables to `v0, v1, …` in pre-order binder order.
    ///
    /// Names already occurring free in the formula are skipped so that no free
    /// variable is captured.
    pub fn normalize_variables(&self) -> Formula {
        let free = self.free_vars();
        let mut next = 0usize;
        let mut scope: Vec<(String, String)> = Vec::new();
        rename(self, &free, &mut next, &mut scope)
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(x) | Formula::ForAll(_, x) | Formula::Exists(_, x) => 1 + x.depth(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::Atom(a) => {
            for t in &a.args {
                if let Term::Variable(v) = t {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.clone());
                    }
                }
            }
        }
        Formula::Not(x) => collect_free(x, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            bound.push(v.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
    }
}

fn fresh_name(free: &BTreeSet<String>, next: &mut usize) -> String {
    loop {
        let candidate = format!("v{next}");
        *next += 1;
        if !free.contains(&candidate) {
            return candidate;
        }
    }
}

fn rename(
    f: &Formula,
    free: &BTreeSet<String>,
    next: &mut usize,
    scope: &mut Vec<(String, String)>,
) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(Atom {
            predicate: a.predicate.clone(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Variable(v) => {
                        let renamed = scope
                            .iter()
                            .rev()
                            .find(|(orig, _)| orig == v)
                            .map(|(_, new)| new.clone())
                            .unwrap_or_else(|| v.clone());
                        Term::Variable(renamed)
                    }
                    c => c.clone(),
                })
                .collect(),
        }),
        Formula::Not(x) => Formula::not(rename(x, free, next, scope)),
        Formula::And(a, b) => {
            let a = rename(a, free, next, scope);
            Formula::and(a, rename(b, free, next, scope))
        }
        Formula::Or(a, b) => {
            let a = rename(a, free, next, scope);
            Formula::or(a, rename(b, free, next, scope))
        }
        Formula::Implies(a, b) => {
            let a = rename(a, free, next, scope);
            Formula::implies(a, rename(b, free, next, scope))
        }
        Formula::Iff(a, b) => {
            let a = rename(a, free, next, scope);
            Formula::iff(a, rename(b, free, next, scope))
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            let new = fresh_name(free, next);
            scope.push((v.clone(), new.clone()));
            let body = rename(body, free, next, scope);
            scope.pop();
            if matches!(f, Formula::ForAll(..)) {
                Formula::forall(new, body)
            } else {
                Formula::exists(new, body)
            }
        }
    }
}

/// Character-offset span `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagCode {
    EmptyInput,
    UnknownSymbol,
    UnterminatedQuote,
    ComparisonSymbol,
    UnclosedParenthesis,
    ExtraClosingParenthesis,
    MissingOperand,
    DanglingOperator,
    EmptyArgumentList,
    FunctionSymbol,
    MissingVariable,
    UnexpectedToken,
    TooDeep,
    NonLowercaseVariable,
    FreeVariable,
    MisplacedParenthesis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(code: DiagCode, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}..{}: {} ({:?})",
            self.span.start, self.span.end, self.message, self.code
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseOutcome {
    Parsed {
        formula: Formula,
        warnings: Vec<Diagnostic>,
    },
    Rejected {
        errors: Vec<Diagnostic>,
    },
}

impl ParseOutcome {
    pub fn formula(&self) -> Option<&Formula> {
        match self {
            ParseOutcome::Parsed { formula, .. } => Some(formula),
            ParseOutcome::Rejected { .. } => None,
        }
    }

    pub fn into_result(self) -> Result<Formula, Vec<Diagnostic>> {
        match self {
            ParseOutcome::Parsed { formula, .. } => Ok(formula),
            ParseOutcome::Rejected { errors } => Err(errors),
        }
    }

    pub fn is_parsed(&self) -> bool {
        matches!(self, ParseOutcome::Parsed { .. })
    }
}

/// Unbound identifiers with this shape are read as free variables rather
/// than constants: one of `u`..`z`, optionally followed by digits.
pub fn looks_like_variable(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some('u'..='z') => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// Plain identifier: ASCII letters, digits and underscores.
pub fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_keyword(name: &str) -> bool {
    name == "forall" || name == "exists"
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).into_result().unwrap()
    }

    #[test]
    fn free_vars_examples() {
        let f = p("Luxury(x) → Shopping(x)");
        assert_eq!(f.free_vars(), BTreeSet::from(["x".to_string()]));
        assert!(p("∀x (p(x))").free_vars().is_empty());
        assert_eq!(
            p("∀x (p(x, y))").free_vars(),
            BTreeSet::from(["y".to_string()])
        );
    }

    #[test]
    fn normalize_single_binder() {
        assert_eq!(p("∀y (p(y))").normalize_variables(), p("∀v0 (p(v0))"));
    }

    #[test]
    fn normalize_shadowed_binder() {
        // the inner binder captures the occurrence
        let f = p("∀x ∃x (p(x))");
        let expected = Formula::forall(
            "v0",
            Formula::exists("v1", Formula::atom("p", vec![Term::Variable("v1".into())])),
        );
        assert_eq!(f.normalize_variables(), expected);
    }

    #[test]
    fn normalize_sibling_scopes() {
        let f = p("(∀x p(x)) ∧ (∀x q(x)) ∧ (∃y r(y, x))");
        let n = f.normalize_variables();
        assert_eq!(
            print(&n),
            "(∀v0 (p(v0))) ∧ ((∀v1 (q(v1))) ∧ (∃v2 (r(v2, x))))"
        );
    }

    #[test]
    fn normalize_avoids_capturing_free_names() {
        let f = p("∀x (p(x, v0))");
        let n = f.normalize_variables();
        assert_eq!(n.free_vars(), BTreeSet::from(["v0".to_string()]));
        assert_eq!(print(&n), "∀v1 (p(v1, v0))");
    }

    #[test]
    fn closure_binds_free_vars() {
        let f = p("p(x) → q(y)").universal_closure();
        assert!(f.is_closed());
        assert_eq!(print(&f), "∀x (∀y (p(x) → q(y)))");
    }

    #[test]
    fn substitute_respects_shadowing() {
        let f = p("p(x) ∧ ∀x (q(x))");
        let g = f.substitute("x", "a");
        assert_eq!(print(&g), "p(a) ∧ (∀x (q(x)))");
    }

    #[test]
    fn variable_shape() {
        assert!(looks_like_variable("x"));
        assert!(looks_like_variable("y2"));
        assert!(!looks_like_variable("a"));
        assert!(!looks_like_variable("xy"));
        assert!(!looks_like_variable("X"));
    }
}
