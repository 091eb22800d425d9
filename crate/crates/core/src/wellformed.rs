//! Syntactic well-formedness (SWF): six binary criteria scored on the raw
//! string, mostly at token level so that unparseable model output can still
//! be scored.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{lex, parse, DiagCode, Diagnostic, ParseOutcome, Span, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    VariableCharset,
    VariableDefined,
    OperatorValidity,
    Parentheses,
    ComparisonSymbols,
    SpecialCharacters,
}

impl CriterionId {
    pub const ALL: [CriterionId; 6] = [
        CriterionId::VariableCharset,
        CriterionId::VariableDefined,
        CriterionId::OperatorValidity,
        CriterionId::Parentheses,
        CriterionId::ComparisonSymbols,
        CriterionId::SpecialCharacters,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CriterionId::VariableCharset => "variable_charset",
            CriterionId::VariableDefined => "variable_defined",
            CriterionId::OperatorValidity => "operator_validity",
            CriterionId::Parentheses => "parentheses",
            CriterionId::ComparisonSymbols => "comparison_symbols",
            CriterionId::SpecialCharacters => "special_characters",
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwfCriterion {
    pub id: CriterionId,
    pub passed: bool,
    pub evidence: Option<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwfResult {
    pub criteria: Vec<SwfCriterion>,
    pub score: f64,
}

impl SwfResult {
    pub fn passed(&self) -> usize {
        self.criteria.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> impl Iterator<Item = &SwfCriterion> {
        self.criteria.iter().filter(|c| !c.passed)
    }

    pub fn criterion(&self, id: CriterionId) -> &SwfCriterion {
        self.criteria
            .iter()
            .find(|c| c.id == id)
            .expect("all six criteria are always present")
    }
}

/// Scores `input` against the six criteria. Never fails.
pub fn check_swf(input: &str) -> SwfResult {
    let tokens = lex(input);
    let outcomes: Vec<(CriterionId, Option<Diagnostic>)> = if tokens.is_empty() {
        let d = Diagnostic::new(
            DiagCode::EmptyInput,
            "empty formula",
            Span::new(0, input.chars().count()),
        );
        CriterionId::ALL
            .iter()
            .map(|&id| (id, Some(d.clone())))
            .collect()
    } else {
        let parsed = parse(input);
        let scan = Scan::new(&tokens);
        vec![
            (CriterionId::VariableCharset, variable_charset(&scan, &parsed)),
            (CriterionId::VariableDefined, variable_defined(&scan, &parsed)),
            (CriterionId::OperatorValidity, operator_validity(&tokens)),
            (CriterionId::Parentheses, parentheses(&scan)),
            (CriterionId::ComparisonSymbols, comparison_symbols(&tokens)),
            (CriterionId::SpecialCharacters, special_characters(&tokens)),
        ]
    };
    let criteria: Vec<SwfCriterion> = outcomes
        .into_iter()
        .map(|(id, evidence)| SwfCriterion {
            id,
            passed: evidence.is_none(),
            evidence,
        })
        .collect();
    let passed = criteria.iter().filter(|c| c.passed).count();
    SwfResult {
        criteria,
        score: passed as f64 / 6.0,
    }
}

/// Token stream annotated with argument-list structure.
struct Scan<'a> {
    tokens: &'a [Token],
    /// For each token, whether it sits directly inside a predicate's
    /// argument list.
    in_args: Vec<bool>,
    /// Names introduced by any quantifier in the string.
    binders: BTreeSet<String>,
}

impl<'a> Scan<'a> {
    fn new(tokens: &'a [Token]) -> Self {
        let mut in_args = vec![false; tokens.len()];
        let mut stack: Vec<bool> = Vec::new();
        let mut binders = BTreeSet::new();
        for (i, t) in tokens.iter().enumerate() {
            match &t.kind {
                TokenKind::LParen => {
                    in_args[i] = stack.last().copied().unwrap_or(false);
                    stack.push(opens_call(tokens, i));
                }
                TokenKind::RParen => {
                    stack.pop();
                    in_args[i] = stack.last().copied().unwrap_or(false);
                }
                _ => in_args[i] = stack.last().copied().unwrap_or(false),
            }
            if t.kind.is_quantifier() {
                if let Some(TokenKind::Ident(v)) = tokens.get(i + 1).map(|t| &t.kind) {
                    binders.insert(v.clone());
                }
            }
        }
        Scan {
            tokens,
            in_args,
            binders,
        }
    }

    fn argument_idents(&self) -> impl Iterator<Item = (&'a str, Span)> + '_ {
        self.tokens
            .iter()
            .zip(&self.in_args)
            .filter_map(|(t, &inside)| match &t.kind {
                TokenKind::Ident(name) if inside => Some((name.as_str(), t.span)),
                _ => None,
            })
    }
}

/// `(` right after an identifier that is not a quantifier's variable.
fn opens_call(tokens: &[Token], i: usize) -> bool {
    if i == 0 {
        return false;
    }
    let prev_is_ident = matches!(tokens[i - 1].kind, TokenKind::Ident(_));
    let prev_is_binder = i >= 2 && tokens[i - 2].kind.is_quantifier();
    prev_is_ident && !prev_is_binder
}

fn lowercase_alpha(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase())
}

fn variable_charset(scan: &Scan, parsed: &ParseOutcome) -> Option<Diagnostic> {
    for (i, t) in scan.tokens.iter().enumerate() {
        if !t.kind.is_quantifier() {
            continue;
        }
        if let Some(Token {
            kind: TokenKind::Ident(v),
            span,
        }) = scan.tokens.get(i + 1)
        {
            if !lowercase_alpha(v) {
                return Some(Diagnostic::new(
                    DiagCode::NonLowercaseVariable,
                    format!("variable '{v}' must contain only lowercase letters"),
                    *span,
                ));
            }
        }
    }
    if let Some(f) = parsed.formula() {
        for v in f.free_vars() {
            if !lowercase_alpha(&v) {
                let span = scan
                    .argument_idents()
                    .find(|(n, _)| *n == v)
                    .map(|(_, s)| s)
                    .unwrap_or(Span::new(0, 0));
                return Some(Diagnostic::new(
                    DiagCode::NonLowercaseVariable,
                    format!("variable '{v}' must contain only lowercase letters"),
                    span,
                ));
            }
        }
    }
    None
}

fn variable_defined(scan: &Scan, parsed: &ParseOutcome) -> Option<Diagnostic> {
    let undefined = |name: &str, span: Span| {
        Diagnostic::new(
            DiagCode::FreeVariable,
            format!("variable '{name}' is used without being bound by a quantifier"),
            span,
        )
    };
    match parsed.formula() {
        Some(f) => {
            let free = f.free_vars();
            let first = free.iter().next()?;
            let span = scan
                .argument_idents()
                .find(|(n, _)| n == first)
                .map(|(_, s)| s)
                .unwrap_or(Span::new(0, 0));
            Some(undefined(first, span))
        }
        None => {
            // Without a parse tree scope is unknown. Only strings that do use
            // quantifiers are judged: a single lowercase letter in argument
            // position that no quantifier introduces is then a scoping slip.
            if scan.binders.is_empty() {
                return None;
            }
            scan.argument_idents()
                .find(|(name, _)| {
                    name.len() == 1
                        && name.chars().all(|c| c.is_ascii_lowercase())
                        && !scan.binders.contains(*name)
                })
                .map(|(name, span)| undefined(name, span))
        }
    }
}

fn operator_validity(tokens: &[Token]) -> Option<Diagnostic> {
    for (i, t) in tokens.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| &tokens[j].kind);
        let next = tokens.get(i + 1).map(|t| &t.kind);
        if t.kind.is_binary() {
            if let Some(n) = next.filter(|n| n.is_binary()) {
                return Some(Diagnostic::new(
                    DiagCode::DanglingOperator,
                    format!(
                        "adjacent connectives {} {}",
                        t.kind.describe(),
                        n.describe()
                    ),
                    t.span,
                ));
            }
            if !prev.is_some_and(TokenKind::ends_operand) {
                return Some(Diagnostic::new(
                    DiagCode::MissingOperand,
                    format!("connective {} has no left operand", t.kind.describe()),
                    t.span,
                ));
            }
            if !next.is_some_and(TokenKind::starts_operand) {
                return Some(Diagnostic::new(
                    DiagCode::DanglingOperator,
                    format!("connective {} has no right operand", t.kind.describe()),
                    t.span,
                ));
            }
        } else if t.kind == TokenKind::Not {
            if !next.is_some_and(TokenKind::starts_operand) {
                return Some(Diagnostic::new(
                    DiagCode::DanglingOperator,
                    "negation has no operand",
                    t.span,
                ));
            }
        } else if t.kind.is_quantifier() {
            let var_ok = matches!(next, Some(TokenKind::Ident(_)));
            let body_ok = tokens
                .get(i + 2)
                .is_some_and(|b| b.kind.starts_operand());
            if !var_ok || !body_ok {
                return Some(Diagnostic::new(
                    DiagCode::MissingVariable,
                    format!(
                        "quantifier {} must be followed by a variable and a body",
                        t.kind.describe()
                    ),
                    t.span,
                ));
            }
        }
    }
    None
}

fn parentheses(scan: &Scan) -> Option<Diagnostic> {
    let tokens = scan.tokens;
    let mut open: Vec<usize> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        match t.kind {
            TokenKind::LParen => open.push(i),
            TokenKind::RParen if open.pop().is_none() => {
                return Some(Diagnostic::new(
                    DiagCode::ExtraClosingParenthesis,
                    "extra closing parenthesis",
                    t.span,
                ));
            }
            _ => {}
        }
    }
    if let Some(&i) = open.first() {
        return Some(Diagnostic::new(
            DiagCode::UnclosedParenthesis,
            "parenthesis is never closed",
            tokens[i].span,
        ));
    }
    // Argument lists hold terms only; a connective or bracketed formula inside
    // one means a closing parenthesis is misplaced.
    for (i, t) in tokens.iter().enumerate() {
        if !scan.in_args[i] {
            if t.kind == TokenKind::LParen
                && opens_call(tokens, i)
                && tokens.get(i + 1).map(|n| &n.kind) == Some(&TokenKind::RParen)
            {
                return Some(Diagnostic::new(
                    DiagCode::EmptyArgumentList,
                    "empty argument list",
                    Span::new(t.span.start, tokens[i + 1].span.end),
                ));
            }
            continue;
        }
        let misplaced = t.kind.is_binary()
            || t.kind.is_quantifier()
            || t.kind == TokenKind::Not
            || (t.kind == TokenKind::LParen && !opens_call(tokens, i));
        if misplaced {
            return Some(Diagnostic::new(
                DiagCode::MisplacedParenthesis,
                format!("{} inside an argument list", t.kind.describe()),
                t.span,
            ));
        }
    }
    None
}

fn comparison_symbols(tokens: &[Token]) -> Option<Diagnostic> {
    tokens.iter().find_map(|t| match &t.kind {
        TokenKind::Comparison(s) => Some(Diagnostic::new(
            DiagCode::ComparisonSymbol,
            format!("contains comparison symbol '{s}'"),
            t.span,
        )),
        _ => None,
    })
}

fn special_characters(tokens: &[Token]) -> Option<Diagnostic> {
    tokens.iter().find_map(|t| match &t.kind {
        TokenKind::Unknown(c) => Some(Diagnostic::new(
            DiagCode::UnknownSymbol,
            format!("contains invalid character '{c}'"),
            t.span,
        )),
        TokenKind::UnterminatedQuote => Some(Diagnostic::new(
            DiagCode::UnterminatedQuote,
            "contains an unmatched quote",
            Span::new(t.span.start, t.span.start + 1),
        )),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failed(input: &str) -> Vec<CriterionId> {
        check_swf(input).failed().map(|c| c.id).collect()
    }

    #[test]
    fn well_formed_passes_everything() {
        let r = check_swf("∀x (p(x) → q(x))");
        assert_eq!(r.score, 1.0);
        assert_eq!(r.passed(), 6);
    }

    #[test]
    fn table_rows_fail_exactly_their_criterion() {
        use CriterionId::*;
        assert_eq!(failed("∀x (Blake(x → Building(x)))"), vec![Parentheses]);
        assert_eq!(failed("Luxury(x) → Shopping(x)"), vec![VariableDefined]);
        assert_eq!(failed("Wake(hulk) →→ BreakBridge(hulk)"), vec![OperatorValidity]);
        assert_eq!(failed("Code(x) ∧ Mac(x))"), vec![Parentheses]);
        assert_eq!(failed("Height(x) > Weight(x)"), vec![ComparisonSymbols]);
        assert_eq!(failed("∀x (Reads(x) → Gain?(x))"), vec![SpecialCharacters]);
    }

    #[test]
    fn evidence_spans_point_into_input() {
        let input = "Code(x) ∧ Mac(x))";
        let r = check_swf(input);
        let ev = r.criterion(CriterionId::Parentheses).evidence.clone().unwrap();
        assert_eq!(ev.span, Span::new(16, 17));
        let r = check_swf("∀x (Reads(x) → Gain?(x))");
        let ev = r
            .criterion(CriterionId::SpecialCharacters)
            .evidence
            .clone()
            .unwrap();
        assert_eq!(ev.span, Span::new(19, 20));
    }

    #[test]
    fn empty_input_fails_everything() {
        let r = check_swf("");
        assert_eq!(r.score, 0.0);
        assert!(r.criteria.iter().all(|c| c.evidence.is_some()));
    }

    #[test]
    fn uppercase_binder() {
        assert_eq!(failed("∀X (p(X))"), vec![CriterionId::VariableCharset]);
        assert_eq!(failed("∀x1 (p(x1))"), vec![CriterionId::VariableCharset]);
    }

    #[test]
    fn criteria_are_independent() {
        use CriterionId::*;
        // extra paren and a comparison: two independent failures
        let f = failed("p(a) = q(a))");
        assert!(f.contains(&Parentheses));
        assert!(f.contains(&ComparisonSymbols));
        assert!(!f.contains(&SpecialCharacters));
    }

    #[test]
    fn ascii_spellings_are_not_special() {
        assert_eq!(check_swf("forall x (p(x) -> ~q(x) | r(x) & s(x) <-> t(x))").score, 1.0);
        assert_eq!(check_swf("∀x (has_cert(x, \"word\") ⊕ do_thesis(x))").score, 1.0);
    }

    #[test]
    fn operator_edge_cases() {
        assert_eq!(failed("∧ p(a)"), vec![CriterionId::OperatorValidity]);
        assert_eq!(failed("p(a) ∧"), vec![CriterionId::OperatorValidity]);
        assert_eq!(failed("¬"), vec![CriterionId::OperatorValidity]);
        assert!(failed("p(a) ∨ ¬q(a)").is_empty());
    }

    #[test]
    fn score_is_multiple_of_sixth() {
        for s in ["", "p(", "∀x p(x) > ", "?", "a →→ b ))", "∀X (Q(X) = ?"] {
            let r = check_swf(s);
            let k = r.score * 6.0;
            assert_eq!(k, k.round(), "{s}");
            assert_eq!(r.score, r.passed() as f64 / 6.0);
        }
    }
}
