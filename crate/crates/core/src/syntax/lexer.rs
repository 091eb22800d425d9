use super::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Forall,
    Exists,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Xor,
    LParen,
    RParen,
    Comma,
    Ident(String),
    /// Quoted constant with the quotes stripped.
    Quoted(String),
    /// `=`, `<`, `>` and their compound forms.
    Comparison(String),
    /// A quote that is never closed; spans to the end of input.
    UnterminatedQuote,
    Unknown(char),
}

impl TokenKind {
    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            TokenKind::And | TokenKind::Or | TokenKind::Implies | TokenKind::Iff | TokenKind::Xor
        )
    }

    pub fn is_quantifier(&self) -> bool {
        matches!(self, TokenKind::Forall | TokenKind::Exists)
    }

    /// Token that can end an operand.
    pub fn ends_operand(&self) -> bool {
        matches!(
            self,
            TokenKind::Ident(_) | TokenKind::Quoted(_) | TokenKind::RParen
        )
    }

    /// Token that can begin an operand.
    pub fn starts_operand(&self) -> bool {
        matches!(
            self,
            TokenKind::Ident(_)
                | TokenKind::Quoted(_)
                | TokenKind::LParen
                | TokenKind::Not
                | TokenKind::Forall
                | TokenKind::Exists
        )
    }

    pub fn describe(&self) -> String {
        match self {
            TokenKind::Forall => "'∀'".into(),
            TokenKind::Exists => "'∃'".into(),
            TokenKind::Not => "'¬'".into(),
            TokenKind::And => "'∧'".into(),
            TokenKind::Or => "'∨'".into(),
            TokenKind::Implies => "'→'".into(),
            TokenKind::Iff => "'↔'".into(),
            TokenKind::Xor => "'⊕'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Ident(s) => format!("identifier '{s}'"),
            TokenKind::Quoted(s) => format!("quoted constant \"{s}\""),
            TokenKind::Comparison(s) => format!("comparison '{s}'"),
            TokenKind::UnterminatedQuote => "unterminated quote".into(),
            TokenKind::Unknown(c) => format!("'{c}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `input` into tokens. Never fails: unrecognised characters become
/// [`TokenKind::Unknown`] tokens so that callers can report on them.
pub fn lex(input: &str) -> Vec<Token> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let peek = |k: usize| chars.get(i + k).copied();
        let (kind, len) = match c {
            '∀' => (TokenKind::Forall, 1),
            '∃' => (TokenKind::Exists, 1),
            '¬' | '~' => (TokenKind::Not, 1),
            '∧' | '&' => (TokenKind::And, 1),
            '∨' | '|' => (TokenKind::Or, 1),
            '→' | '⇒' => (TokenKind::Implies, 1),
            '↔' => (TokenKind::Iff, 1),
            '⊕' => (TokenKind::Xor, 1),
            '(' => (TokenKind::LParen, 1),
            ')' => (TokenKind::RParen, 1),
            ',' => (TokenKind::Comma, 1),
            '-' if peek(1) == Some('>') => (TokenKind::Implies, 2),
            '<' if peek(1) == Some('-') && peek(2) == Some('>') => (TokenKind::Iff, 3),
            '<' | '>' | '=' if peek(1) == Some('=') => {
                (TokenKind::Comparison(format!("{c}=")), 2)
            }
            '<' | '>' | '=' | '≠' | '≤' | '≥' => (TokenKind::Comparison(c.to_string()), 1),
            '!' if peek(1) == Some('=') => (TokenKind::Comparison("!=".into()), 2),
            '"' | '“' => {
                let close = if c == '"' { '"' } else { '”' };
                match chars[i + 1..].iter().position(|&d| d == close) {
                    Some(off) => {
                        let text: String = chars[i + 1..i + 1 + off].iter().collect();
                        (TokenKind::Quoted(text), off + 2)
                    }
                    None => (TokenKind::UnterminatedQuote, chars.len() - i),
                }
            }
            c if is_ident_char(c) => {
                let len = chars[i..].iter().take_while(|&&d| is_ident_char(d)).count();
                let word: String = chars[i..i + len].iter().collect();
                let kind = match word.as_str() {
                    "forall" => TokenKind::Forall,
                    "exists" => TokenKind::Exists,
                    _ => TokenKind::Ident(word),
                };
                (kind, len)
            }
            other => (TokenKind::Unknown(other), 1),
        };
        i += len;
        tokens.push(Token {
            kind,
            span: Span::new(start, i),
        });
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        lex(s).into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn ascii_and_unicode_agree() {
        assert_eq!(
            kinds("forall x (p(x) -> ~q(x) | r & s <-> t)"),
            kinds("∀x (p(x) → ¬q(x) ∨ r ∧ s ↔ t)")
        );
        assert_eq!(kinds("a ⇒ b"), kinds("a → b"));
    }

    #[test]
    fn comparisons_are_not_arrows() {
        assert_eq!(
            kinds("a <-> b -> c < d = e >= f"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Iff,
                TokenKind::Ident("b".into()),
                TokenKind::Implies,
                TokenKind::Ident("c".into()),
                TokenKind::Comparison("<".into()),
                TokenKind::Ident("d".into()),
                TokenKind::Comparison("=".into()),
                TokenKind::Ident("e".into()),
                TokenKind::Comparison(">=".into()),
                TokenKind::Ident("f".into()),
            ]
        );
    }

    #[test]
    fn spans_count_characters_not_bytes() {
        let toks = lex("∀x p(x)");
        assert_eq!(toks[0].span, Span::new(0, 1));
        assert_eq!(toks[1].span, Span::new(1, 2));
        assert_eq!(toks[2].span, Span::new(3, 4));
    }

    #[test]
    fn quotes() {
        assert_eq!(
            kinds("has_cert(x, \"word\")")[4],
            TokenKind::Quoted("word".into())
        );
        let toks = lex("p(\"abc");
        assert_eq!(toks[2].kind, TokenKind::UnterminatedQuote);
        assert_eq!(toks[2].span, Span::new(2, 6));
    }

    #[test]
    fn unknown_characters() {
        assert_eq!(kinds("Gain?")[1], TokenKind::Unknown('?'));
    }
}
