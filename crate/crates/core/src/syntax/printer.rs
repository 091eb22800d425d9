use super::{is_identifier, is_keyword, looks_like_variable, Atom, Formula, Term};

/// Canonical text: Unicode connectives, parenthesised binary sub-formulas,
/// quantifier bodies always in parentheses.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut Vec::new(), &mut out);
    out
}

fn write_formula(f: &Formula, scope: &mut Vec<String>, out: &mut String) {
    match f {
        Formula::Atom(a) => write_atom(a, scope, out),
        Formula::Not(x) => {
            out.push('¬');
            write_operand(x, scope, out);
        }
        Formula::And(a, b) => write_binary(a, "∧", b, scope, out),
        Formula::Or(a, b) => write_binary(a, "∨", b, scope, out),
        Formula::Implies(a, b) => write_binary(a, "→", b, scope, out),
        Formula::Iff(a, b) => write_binary(a, "↔", b, scope, out),
        Formula::ForAll(v, body) => write_quantifier('∀', v, body, scope, out),
        Formula::Exists(v, body) => write_quantifier('∃', v, body, scope, out),
    }
}

fn write_quantifier(q: char, var: &str, body: &Formula, scope: &mut Vec<String>, out: &mut String) {
    out.push(q);
    out.push_str(var);
    out.push_str(" (");
    scope.push(var.to_string());
    write_formula(body, scope, out);
    scope.pop();
    out.push(')');
}

fn write_binary(a: &Formula, op: &str, b: &Formula, scope: &mut Vec<String>, out: &mut String) {
    write_operand(a, scope, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    write_operand(b, scope, out);
}

/// Atoms and negated atoms stand bare; everything else is parenthesised.
fn write_operand(f: &Formula, scope: &mut Vec<String>, out: &mut String) {
    if is_literal_chain(f) {
        write_formula(f, scope, out);
    } else {
        out.push('(');
        write_formula(f, scope, out);
        out.push(')');
    }
}

fn is_literal_chain(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::Not(x) => is_literal_chain(x),
        _ => false,
    }
}

fn write_atom(a: &Atom, scope: &[String], out: &mut String) {
    out.push_str(&a.predicate);
    if a.args.is_empty() {
        return;
    }
    out.push('(');
    for (i, t) in a.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match t {
            Term::Variable(v) => out.push_str(v),
            Term::Constant(c) => {
                if is_identifier(c)
                    && !looks_like_variable(c)
                    && !is_keyword(c)
                    && !scope.iter().any(|s| s == c)
                {
                    out.push_str(c);
                } else {
                    out.push('"');
                    out.push_str(c);
                    out.push('"');
                }
            }
        }
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn canonical_forms() {
        assert_eq!(
            print(&Formula::atom("p", vec![Term::Constant("a".into())])),
            "p(a)"
        );
        let f = Formula::forall(
            "x",
            Formula::implies(
                Formula::atom("s", vec![Term::Variable("x".into())]),
                Formula::atom("t", vec![Term::Variable("x".into())]),
            ),
        );
        assert_eq!(print(&f), "∀x (s(x) → t(x))");
    }

    #[test]
    fn nested_binary_gets_parentheses() {
        let f = parse("a ∧ b ∨ ¬c → ∃y p(y)").into_result().unwrap();
        assert_eq!(print(&f), "((a ∧ b) ∨ ¬c) → (∃y (p(y)))");
    }

    #[test]
    fn awkward_constants_are_quoted() {
        let f = Formula::atom(
            "p",
            vec![
                Term::Constant("New York".into()),
                Term::Constant("x".into()),
                Term::Constant("forall".into()),
            ],
        );
        let s = print(&f);
        assert_eq!(s, "p(\"New York\", \"x\", \"forall\")");
        assert_eq!(parse(&s).into_result().unwrap(), f);
    }
}
