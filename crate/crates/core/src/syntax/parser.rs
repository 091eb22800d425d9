use super::lexer::{lex, Token, TokenKind};
use super::{looks_like_variable, Atom, DiagCode, Diagnostic, Formula, ParseOutcome, Span, Term};

/// Maximum nesting of unary operators, parentheses and chained binary
/// connectives. Deeper input is rejected with [`DiagCode::TooDeep`].
pub const MAX_DEPTH: usize = 256;

type PResult<T> = Result<T, Diagnostic>;

/// Parses one formula. Total: every input yields either a formula or at
/// least one diagnostic.
pub fn parse(input: &str) -> ParseOutcome {
    let tokens = lex(input);
    let len = input.chars().count();
    if tokens.is_empty() {
        return ParseOutcome::Rejected {
            errors: vec![Diagnostic::new(
                DiagCode::EmptyInput,
                "empty formula",
                Span::new(0, len),
            )],
        };
    }

    let lexical: Vec<Diagnostic> = tokens
        .iter()
        .filter_map(|t| match &t.kind {
            TokenKind::Unknown(c) => Some(Diagnostic::new(
                DiagCode::UnknownSymbol,
                format!("unknown symbol '{c}'"),
                t.span,
            )),
            TokenKind::UnterminatedQuote => Some(Diagnostic::new(
                DiagCode::UnterminatedQuote,
                "quoted constant is never closed",
                t.span,
            )),
            TokenKind::Comparison(s) => Some(Diagnostic::new(
                DiagCode::ComparisonSymbol,
                format!("comparison symbol '{s}' is not part of the logic"),
                t.span,
            )),
            _ => None,
        })
        .collect();
    if !lexical.is_empty() {
        return ParseOutcome::Rejected { errors: lexical };
    }

    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        scope: Vec::new(),
        depth: 0,
        end: len,
        warnings: Vec::new(),
    };
    let result = parser.formula().and_then(|f| match parser.peek() {
        None => Ok(f),
        Some(t) if t.kind == TokenKind::RParen => Err(Diagnostic::new(
            DiagCode::ExtraClosingParenthesis,
            "extra closing parenthesis",
            t.span,
        )),
        Some(t) if t.kind.starts_operand() => Err(Diagnostic::new(
            DiagCode::UnexpectedToken,
            format!("missing connective before {}", t.kind.describe()),
            t.span,
        )),
        Some(t) => Err(Diagnostic::new(
            DiagCode::UnexpectedToken,
            format!("unexpected {}", t.kind.describe()),
            t.span,
        )),
    });
    match result {
        Ok(formula) => ParseOutcome::Parsed {
            formula,
            warnings: parser.warnings,
        },
        Err(e) => ParseOutcome::Rejected { errors: vec![e] },
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    scope: Vec<String>,
    depth: usize,
    end: usize,
    warnings: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&'a TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn end_span(&self) -> Span {
        Span::new(self.end, self.end)
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let span = self.peek().map(|t| t.span).unwrap_or(self.end_span());
            return Err(Diagnostic::new(
                DiagCode::TooDeep,
                format!("formula nests deeper than {MAX_DEPTH} levels"),
                span,
            ));
        }
        let out = f(self);
        self.depth -= 1;
        out
    }

    // iff := implies ((↔ | ⊕) iff)?
    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.implies()?;
        match self.peek_kind() {
            Some(TokenKind::Iff) => {
                self.bump();
                let rhs = self.nested(Self::formula)?;
                Ok(Formula::iff(lhs, rhs))
            }
            Some(TokenKind::Xor) => {
                self.bump();
                let rhs = self.nested(Self::formula)?;
                Ok(Formula::not(Formula::iff(lhs, rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn implies(&mut self) -> PResult<Formula> {
        let lhs = self.or()?;
        if self.peek_kind() == Some(&TokenKind::Implies) {
            self.bump();
            let rhs = self.nested(Self::implies)?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Formula> {
        let lhs = self.and()?;
        if self.peek_kind() == Some(&TokenKind::Or) {
            self.bump();
            let rhs = self.nested(Self::or)?;
            return Ok(Formula::or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Formula> {
        let lhs = self.nested(Self::unary)?;
        if self.peek_kind() == Some(&TokenKind::And) {
            self.bump();
            let rhs = self.nested(Self::and)?;
            return Ok(Formula::and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn missing_operand(&self) -> Diagnostic {
        let prev = self.pos.checked_sub(1).and_then(|i| self.tokens.get(i));
        match (prev, self.peek()) {
            (Some(p), next) if p.kind.is_binary() || p.kind == TokenKind::Not => {
                let what = match next {
                    Some(n) => format!("followed by {}", n.kind.describe()),
                    None => "at end of input".to_string(),
                };
                Diagnostic::new(
                    DiagCode::DanglingOperator,
                    format!("operator {} is missing its right operand ({what})", p.kind.describe()),
                    p.span,
                )
            }
            (_, Some(n)) if n.kind.is_binary() => Diagnostic::new(
                DiagCode::MissingOperand,
                format!("operator {} is missing its left operand", n.kind.describe()),
                n.span,
            ),
            (_, Some(n)) if n.kind == TokenKind::RParen => Diagnostic::new(
                DiagCode::MissingOperand,
                "expected a formula before ')'",
                n.span,
            ),
            (_, Some(n)) => Diagnostic::new(
                DiagCode::UnexpectedToken,
                format!("expected a formula, found {}", n.kind.describe()),
                n.span,
            ),
            (_, None) => Diagnostic::new(
                DiagCode::MissingOperand,
                "expected a formula at end of input",
                self.end_span(),
            ),
        }
    }

    fn unary(&mut self) -> PResult<Formula> {
        let Some(tok) = self.peek() else {
            return Err(self.missing_operand());
        };
        match &tok.kind {
            TokenKind::Not => {
                self.bump();
                let inner = self.nested(Self::unary)?;
                Ok(Formula::not(inner))
            }
            TokenKind::Forall | TokenKind::Exists => {
                self.bump();
                let var = match self.peek() {
                    Some(Token {
                        kind: TokenKind::Ident(name),
                        span,
                    }) => {
                        if self.scope.iter().any(|s| s == name) {
                            self.warnings.push(Diagnostic::new(
                                DiagCode::UnexpectedToken,
                                format!("binder '{name}' shadows an enclosing binder"),
                                *span,
                            ));
                        }
                        self.bump();
                        name.clone()
                    }
                    _ => {
                        return Err(Diagnostic::new(
                            DiagCode::MissingVariable,
                            "quantifier must be followed by a variable",
                            tok.span,
                        ))
                    }
                };
                self.scope.push(var.clone());
                let body = self.nested(Self::formula);
                self.scope.pop();
                let body = body?;
                Ok(if tok.kind == TokenKind::Forall {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                })
            }
            TokenKind::LParen => {
                self.bump();
                if self.peek_kind() == Some(&TokenKind::RParen) {
                    return Err(Diagnostic::new(
                        DiagCode::MissingOperand,
                        "empty parentheses",
                        Span::new(tok.span.start, self.peek().unwrap().span.end),
                    ));
                }
                let inner = self.nested(Self::formula)?;
                match self.peek_kind() {
                    Some(TokenKind::RParen) => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(self.unclosed(tok)),
                }
            }
            TokenKind::Ident(name) => {
                self.bump();
                self.atom(name.clone())
            }
            _ => Err(self.missing_operand()),
        }
    }

    fn unclosed(&self, open: &Token) -> Diagnostic {
        match self.peek() {
            Some(t) if t.kind.starts_operand() || t.kind.is_binary() || t.kind == TokenKind::Comma => {
                Diagnostic::new(
                    DiagCode::UnexpectedToken,
                    format!("expected ')' but found {}", t.kind.describe()),
                    t.span,
                )
            }
            _ => Diagnostic::new(
                DiagCode::UnclosedParenthesis,
                "parenthesis is never closed",
                open.span,
            ),
        }
    }

    fn atom(&mut self, predicate: String) -> PResult<Formula> {
        let Some(open) = self.peek().filter(|t| t.kind == TokenKind::LParen) else {
            return Ok(Formula::Atom(Atom::new(predicate, Vec::new())));
        };
        self.bump();
        if let Some(close) = self.peek().filter(|t| t.kind == TokenKind::RParen) {
            return Err(Diagnostic::new(
                DiagCode::EmptyArgumentList,
                format!("predicate '{predicate}' has an empty argument list"),
                Span::new(open.span.start, close.span.end),
            ));
        }
        let mut args = vec![self.term()?];
        loop {
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.bump();
                    args.push(self.term()?);
                }
                Some(TokenKind::RParen) => {
                    self.bump();
                    return Ok(Formula::Atom(Atom::new(predicate, args)));
                }
                Some(k) if k.is_binary() || *k == TokenKind::Not || k.is_quantifier() => {
                    let t = self.peek().unwrap();
                    return Err(Diagnostic::new(
                        DiagCode::MisplacedParenthesis,
                        format!(
                            "connective {} inside the argument list of '{predicate}'",
                            t.kind.describe()
                        ),
                        t.span,
                    ));
                }
                _ => return Err(self.unclosed(open)),
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let Some(tok) = self.peek() else {
            return Err(Diagnostic::new(
                DiagCode::MissingOperand,
                "expected an argument at end of input",
                self.end_span(),
            ));
        };
        match &tok.kind {
            TokenKind::Ident(name) => {
                self.bump();
                if self.peek_kind() == Some(&TokenKind::LParen) {
                    return Err(Diagnostic::new(
                        DiagCode::FunctionSymbol,
                        format!("function symbol '{name}' is not supported"),
                        tok.span,
                    ));
                }
                if self.scope.iter().any(|s| s == name) || looks_like_variable(name) {
                    Ok(Term::Variable(name.clone()))
                } else {
                    Ok(Term::Constant(name.clone()))
                }
            }
            TokenKind::Quoted(name) => {
                self.bump();
                Ok(Term::Constant(name.clone()))
            }
            TokenKind::Comma | TokenKind::RParen => Err(Diagnostic::new(
                DiagCode::MissingOperand,
                "missing argument",
                tok.span,
            )),
            k if k.is_binary() || *k == TokenKind::Not || k.is_quantifier() => {
                Err(Diagnostic::new(
                    DiagCode::MisplacedParenthesis,
                    format!("connective {} inside an argument list", k.describe()),
                    tok.span,
                ))
            }
            k => Err(Diagnostic::new(
                DiagCode::UnexpectedToken,
                format!("expected an argument, found {}", k.describe()),
                tok.span,
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(s: &str) -> Formula {
        match parse(s) {
            ParseOutcome::Parsed { formula, .. } => formula,
            ParseOutcome::Rejected { errors } => panic!("{s}: {errors:?}"),
        }
    }

    fn err(s: &str) -> Diagnostic {
        match parse(s) {
            ParseOutcome::Rejected { errors } => errors[0].clone(),
            ParseOutcome::Parsed { formula, .. } => panic!("{s} parsed as {formula:?}"),
        }
    }

    fn v(n: &str) -> Term {
        Term::Variable(n.into())
    }

    fn c(n: &str) -> Term {
        Term::Constant(n.into())
    }

    #[test]
    fn course_rule() {
        let f = ok("∀x (enrolled(x, cs102) → completed(x, cs101))");
        assert_eq!(
            f,
            Formula::forall(
                "x",
                Formula::implies(
                    Formula::atom("enrolled", vec![v("x"), c("cs102")]),
                    Formula::atom("completed", vec![v("x"), c("cs101")]),
                )
            )
        );
    }

    #[test]
    fn minimal_atom() {
        assert_eq!(ok("p(a)"), Formula::atom("p", vec![c("a")]));
        assert_eq!(ok("Rain"), Formula::atom("Rain", vec![]));
    }

    #[test]
    fn extra_closing_paren_points_at_last_char() {
        let input = "Code(x) ∧ Mac(x))";
        let e = err(input);
        assert_eq!(e.code, DiagCode::ExtraClosingParenthesis);
        let last = input.chars().count() - 1;
        assert_eq!(e.span, Span::new(last, last + 1));
    }

    #[test]
    fn precedence() {
        // ¬ > ∧ > ∨ > → > ↔
        let f = ok("¬a ∧ b ∨ c → d ↔ e");
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(
                    Formula::and(Formula::not(ok("a")), ok("b")),
                    ok("c"),
                ),
                ok("d"),
            ),
            ok("e"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn right_associative() {
        assert_eq!(
            ok("a → b → c"),
            Formula::implies(ok("a"), Formula::implies(ok("b"), ok("c")))
        );
        assert_eq!(ok("a ∧ b ∧ c"), Formula::and(ok("a"), Formula::and(ok("b"), ok("c"))));
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let f = ok("∀x p(x) → q(x)");
        assert!(matches!(f, Formula::ForAll(_, _)));
        assert!(f.is_closed());
        let g = ok("(∀x p(x)) → q(x)");
        assert!(matches!(g, Formula::Implies(_, _)));
    }

    #[test]
    fn binder_resolution() {
        // `a` bound by the quantifier is a variable, free `a` is a constant
        assert_eq!(
            ok("(∀a p(a)) ∧ q(a)"),
            Formula::and(
                Formula::forall("a", Formula::atom("p", vec![v("a")])),
                Formula::atom("q", vec![c("a")])
            )
        );
    }

    #[test]
    fn xor_desugars() {
        assert_eq!(ok("p ⊕ q"), Formula::not(Formula::iff(ok("p"), ok("q"))));
    }

    #[test]
    fn quoted_constants_are_stripped() {
        assert_eq!(
            ok("has_cert(x, \"word\")"),
            Formula::atom("has_cert", vec![v("x"), c("word")])
        );
        assert_eq!(ok("p(“x”)"), Formula::atom("p", vec![c("x")]));
    }

    #[test]
    fn rejections() {
        assert_eq!(err("").code, DiagCode::EmptyInput);
        assert_eq!(err("   ").code, DiagCode::EmptyInput);
        assert_eq!(err("(p(a)").code, DiagCode::UnclosedParenthesis);
        assert_eq!(err("p(a) ∧").code, DiagCode::DanglingOperator);
        assert_eq!(err("Wake(hulk) →→ BreakBridge(hulk)").code, DiagCode::DanglingOperator);
        assert_eq!(err("∧ p").code, DiagCode::MissingOperand);
        assert_eq!(err("p()").code, DiagCode::EmptyArgumentList);
        assert_eq!(err("p(f(a))").code, DiagCode::FunctionSymbol);
        assert_eq!(err("Height(x) > Weight(x)").code, DiagCode::ComparisonSymbol);
        assert_eq!(err("Gain?(x)").code, DiagCode::UnknownSymbol);
        assert_eq!(err("∀ (p(x))").code, DiagCode::MissingVariable);
        assert_eq!(err("∀x (Blake(x → Building(x)))").code, DiagCode::MisplacedParenthesis);
        assert_eq!(err("p(a) q(a)").code, DiagCode::UnexpectedToken);
        assert_eq!(err("p(a,)").code, DiagCode::MissingOperand);
    }

    #[test]
    fn deep_nesting_is_rejected_not_crashed() {
        let s = "(".repeat(10_000) + "p" + &")".repeat(10_000);
        assert_eq!(err(&s).code, DiagCode::TooDeep);
        let s = "¬".repeat(10_000) + "p";
        assert_eq!(err(&s).code, DiagCode::TooDeep);
        let s = vec!["p"; 10_000].join(" ∧ ");
        assert_eq!(err(&s).code, DiagCode::TooDeep);
    }

    #[test]
    fn shadowing_warns() {
        match parse("∀x ∃x (p(x))") {
            ParseOutcome::Parsed { warnings, .. } => assert_eq!(warnings.len(), 1),
            other => panic!("{other:?}"),
        }
    }
}
