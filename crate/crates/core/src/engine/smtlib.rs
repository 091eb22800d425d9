use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::{closed_world_atoms, grounding_signature, EngineConfig, KnowledgeBase};
use crate::syntax::{Formula, Term};

const RESERVED: &[&str] = &[
    "_", "!", "as", "let", "exists", "forall", "match", "par", "true", "false", "not", "and",
    "or", "xor", "distinct", "ite", "Bool", "Entity", "BINARY", "DECIMAL", "HEXADECIMAL",
    "NUMERAL", "STRING",
];

/// Whether `name` can be written without `|...|` quoting.
fn is_simple(name: &str) -> bool {
    let extra = |c: char| "~!@$%^&*_-+=<>.?/".contains(c);
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || extra(c))
        && chars.all(|c| c.is_ascii_alphanumeric() || extra(c))
}

/// Allocates SMT-LIB symbols so constants, predicates and bound variables
/// (all `?`-prefixed) never collide. `|x|` and `x` are the same symbol, so
/// collisions are checked on the unquoted text.
struct Names {
    taken: BTreeSet<String>,
}

impl Names {
    fn new() -> Self {
        Names {
            taken: RESERVED.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn claim(&mut self, raw: &str) -> String {
        let mut inner: String = raw
            .chars()
            .map(|c| if c == '|' || c == '\\' { '_' } else { c })
            .collect();
        if inner.starts_with('?') {
            inner.insert(0, '_');
        }
        let mut key = inner.clone();
        let mut k = 1;
        while self.taken.contains(&key) {
            key = format!("{inner}!{k}");
            k += 1;
        }
        self.taken.insert(key.clone());
        if is_simple(&key) {
            key
        } else {
            format!("|{key}|")
        }
    }
}

struct Render<'a> {
    constants: &'a BTreeMap<String, String>,
    predicates: &'a BTreeMap<(String, usize), String>,
}

impl Render<'_> {
    fn formula(&self, f: &Formula, out: &mut String) {
        match f {
            Formula::Atom(a) => {
                let name = &self.predicates[&(a.predicate.clone(), a.arity())];
                if a.args.is_empty() {
                    out.push_str(name);
                    return;
                }
                out.push('(');
                out.push_str(name);
                for t in &a.args {
                    out.push(' ');
                    match t {
                        Term::Variable(v) => {
                            out.push('?');
                            out.push_str(v);
                        }
                        Term::Constant(c) => out.push_str(&self.constants[c]),
                    }
                }
                out.push(')');
            }
            Formula::Not(x) => self.op("not", &[x], out),
            Formula::And(a, b) => self.op("and", &[a, b], out),
            Formula::Or(a, b) => self.op("or", &[a, b], out),
            Formula::Implies(a, b) => self.op("=>", &[a, b], out),
            Formula::Iff(a, b) => self.op("=", &[a, b], out),
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let q = if matches!(f, Formula::ForAll(..)) {
                    "forall"
                } else {
                    "exists"
                };
                let _ = write!(out, "({q} ((?{v} Entity)) ");
                self.formula(body, out);
                out.push(')');
            }
        }
    }

    fn op(&self, name: &str, args: &[&Formula], out: &mut String) {
        out.push('(');
        out.push_str(name);
        for a in args {
            out.push(' ');
            self.formula(a, out);
        }
        out.push(')');
    }
}

/// SMT-LIB v2 script whose `check-sat` answers whether the premises and the
/// negated query have a model over the same finite domain the internal
/// engine grounds on. One s-expression per line, premises in input order.
pub fn export_smtlib(kb: &KnowledgeBase, query: &Formula, cfg: &EngineConfig) -> String {
    let query = query.clone().universal_closure();
    let sig = grounding_signature(kb, &query);
    let domain = sig.domain();

    let mut names = Names::new();
    // predicates claim first so a clashing constant gets the suffix
    let mut predicates = BTreeMap::new();
    let mut preds_by_name: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (p, a) in &sig.predicates {
        preds_by_name.entry(p).or_default().push(*a);
    }
    for (p, a) in &sig.predicates {
        let raw = if preds_by_name[p.as_str()].len() > 1 {
            format!("{p}/{a}")
        } else {
            p.clone()
        };
        predicates.insert((p.clone(), *a), names.claim(&raw));
    }
    let constants: BTreeMap<String, String> =
        domain.iter().map(|c| (c.clone(), names.claim(c))).collect();
    let r = Render {
        constants: &constants,
        predicates: &predicates,
    };

    let mut out = String::new();
    out.push_str("(declare-sort Entity 0)\n");
    for c in &domain {
        let _ = writeln!(out, "(declare-const {} Entity)", constants[c]);
    }
    let syms: Vec<&str> = domain.iter().map(|c| constants[c].as_str()).collect();
    if syms.len() >= 2 {
        let _ = writeln!(out, "(assert (distinct {}))", syms.join(" "));
    }
    let eqs: Vec<String> = syms.iter().map(|s| format!("(= ?e {s})")).collect();
    if eqs.len() == 1 {
        let _ = writeln!(out, "(assert (forall ((?e Entity)) {}))", eqs[0]);
    } else {
        let _ = writeln!(out, "(assert (forall ((?e Entity)) (or {})))", eqs.join(" "));
    }
    for ((_, a), sym) in &predicates {
        let args = vec!["Entity"; *a].join(" ");
        let _ = writeln!(out, "(declare-fun {sym} ({args}) Bool)");
    }
    if cfg.closed_world {
        for atom in closed_world_atoms(&kb.premises, &domain) {
            let sym = &predicates[&(atom.predicate.clone(), atom.args.len())];
            if atom.args.is_empty() {
                let _ = writeln!(out, "(assert (not {sym}))");
            } else {
                let args: Vec<&str> = atom.args.iter().map(|c| constants[c].as_str()).collect();
                let _ = writeln!(out, "(assert (not ({sym} {})))", args.join(" "));
            }
        }
    }
    for p in &kb.premises {
        let mut s = String::new();
        r.formula(&p.clone().universal_closure(), &mut s);
        let _ = writeln!(out, "(assert {s})");
    }
    let mut s = String::new();
    r.formula(&query, &mut s);
    let _ = writeln!(out, "(assert (not {s}))");
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::compile;

    fn script(premises: &[&str], query: &str) -> String {
        let p = compile(premises, query).unwrap();
        export_smtlib(&p.kb, &p.query, &EngineConfig::default())
    }

    #[test]
    fn layout() {
        let s = script(&["∀x (p(x) → q(x, a))"], "q(b, a)");
        let expected = "\
(declare-sort Entity 0)
(declare-const a Entity)
(declare-const b Entity)
(declare-const c0 Entity)
(assert (distinct a b c0))
(assert (forall ((?e Entity)) (or (= ?e a) (= ?e b) (= ?e c0))))
(declare-fun p (Entity) Bool)
(declare-fun q (Entity Entity) Bool)
(assert (forall ((?x Entity)) (=> (p ?x) (q ?x a))))
(assert (not (q b a)))
(check-sat)
";
        assert_eq!(s, expected);
    }

    #[test]
    fn single_constant_and_propositions() {
        let s = script(&[], "r");
        assert!(s.contains("(assert (forall ((?e Entity)) (= ?e c0)))\n"));
        assert!(s.contains("(declare-fun r () Bool)\n"));
        assert!(s.contains("(assert (not r))\n"));
        assert!(!s.contains("distinct"));
    }

    #[test]
    fn clashing_and_odd_names() {
        let s = script(&["p(p)", "q(\"1st place\")", "and(true)"], "p(a)");
        assert!(s.contains("(declare-const p!1 Entity)"));
        assert!(s.contains("(declare-const |1st place| Entity)"));
        assert!(s.contains("(declare-fun and!1 (Entity) Bool)"));
        assert!(s.contains("(declare-const true!1 Entity)"));
    }

    #[test]
    fn arity_conflicts_get_distinct_symbols() {
        let s = script(&["p(a)"], "p(a, a)");
        assert!(s.contains("(declare-fun p/1 (Entity) Bool)"));
        assert!(s.contains("(declare-fun p/2 (Entity Entity) Bool)"));
    }
}
