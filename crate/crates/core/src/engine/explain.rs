use std::fmt::Write;

use super::{KnowledgeBase, Verdict};
use crate::semantics::{holds, Interpretation};
use crate::syntax::Formula;

/// Most instances tried when looking for a falsified query instance.
const INSTANCE_LIMIT: usize = 100_000;

/// `True` when the query is entailed, `False` otherwise (refuted or merely
/// not entailed), `Error` when the inputs did not compile.
pub fn final_answer(v: &Verdict) -> &'static str {
    match v {
        Verdict::True { .. } => "True",
        Verdict::False { .. } | Verdict::Uncertain { .. } => "False",
        Verdict::CompileError { .. } => "Error",
    }
}

/// An instance of the closed query's leading universal variables that is
/// false under `i`, or the query itself when it has none and is false.
pub fn falsified_instance(query: &Formula, domain: &[String], i: &Interpretation) -> Option<Formula> {
    let mut closed = query.clone().universal_closure();
    let leading = |f: &Formula| {
        let mut vars = Vec::new();
        let mut body = f;
        while let Formula::ForAll(v, b) = body {
            vars.push(v.clone());
            body = b;
        }
        (vars, body.clone())
    };
    let (mut vars, mut body) = leading(&closed);
    let mut distinct = vars.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != vars.len() {
        closed = closed.normalize_variables();
        (vars, body) = leading(&closed);
    }
    if vars.is_empty() || domain.is_empty() {
        return (!holds(&closed, domain, i).ok()?).then_some(closed);
    }
    let mut idx = vec![0usize; vars.len()];
    for _ in 0..INSTANCE_LIMIT {
        let inst = vars
            .iter()
            .zip(&idx)
            .fold(body.clone(), |f, (v, &k)| f.substitute(v, &domain[k]));
        if !holds(&inst, domain, i).ok()? {
            return Some(inst);
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domain.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    None
}

/// Deterministic human-readable account of a verdict, ending with a
/// `Final Answer:` line.
pub fn explain(v: &Verdict, kb: &KnowledgeBase, query: &Formula) -> String {
    let mut out = String::new();
    for r in &kb.alignment_log {
        let _ = writeln!(out, "Aligned predicate {} -> {} (arity {})", r.from, r.to, r.arity);
    }
    for w in &kb.warnings {
        let _ = writeln!(out, "Warning: {w}");
    }
    let cite = |core: &[usize], out: &mut String| {
        for &i in core {
            let _ = writeln!(out, "  [{}] {}", i + 1, kb.premises[i]);
        }
    };
    match v {
        Verdict::True { core } => {
            let _ = writeln!(out, "Verdict: True");
            if core.is_empty() {
                let _ = writeln!(out, "The query {query} is entailed without citing any premise (valid, or forced by closed-world assumptions).");
            } else {
                let _ = writeln!(out, "The query {query} is entailed by:");
                cite(core, &mut out);
            }
        }
        Verdict::False { core } => {
            let _ = writeln!(out, "Verdict: False");
            if core.is_empty() {
                let _ = writeln!(out, "The negation of {query} holds without citing any premise (unsatisfiable query, or closed-world assumptions).");
            } else {
                let _ = writeln!(out, "The negation of {query} is entailed by:");
                cite(core, &mut out);
            }
        }
        Verdict::Uncertain {
            counterexample,
            domain,
        } => {
            let _ = writeln!(out, "Verdict: Uncertain (the query is not entailed)");
            let _ = writeln!(
                out,
                "Counterexample: a model of the premises in which the query fails, over {{{}}}.",
                domain.join(", ")
            );
            let named: Vec<&String> = domain
                .iter()
                .filter(|c| {
                    !kb.signature.constants.contains(*c) && !query.constants().contains(*c)
                })
                .collect();
            for c in named {
                let _ = writeln!(out, "  {c} is an entity not named in the premises or query.");
            }
            let truths: Vec<String> = counterexample.true_atoms().map(|a| a.to_string()).collect();
            if truths.is_empty() {
                let _ = writeln!(out, "  True atoms: none; every ground atom is false.");
            } else {
                let _ = writeln!(out, "  True atoms: {}", truths.join(", "));
                let _ = writeln!(out, "  Every other ground atom is false.");
            }
            if let Some(inst) = falsified_instance(query, domain, counterexample) {
                let _ = writeln!(out, "  Falsified query instance: {inst}");
            }
        }
        Verdict::CompileError { diagnostics } => {
            let _ = writeln!(out, "Verdict: CompileError");
            for d in diagnostics {
                let _ = writeln!(out, "  {}: {}", d.source, d.diagnostic);
            }
        }
    }
    let _ = writeln!(out, "Final Answer: {}", final_answer(v));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{compile, entail, EngineConfig};
    use crate::semantics::GroundAtom;

    fn run(premises: &[&str], query: &str) -> (Verdict, String) {
        let p = compile(premises, query).unwrap();
        let v = entail(&p.kb, &p.query, &EngineConfig::default()).unwrap();
        let text = explain(&v, &p.kb, &p.query);
        (v, text)
    }

    #[test]
    fn tautology_uses_no_premises() {
        let (_, text) = run(&["p(b)"], "p(a) ∨ ¬p(a)");
        assert!(text.contains("entailed without citing any premise"));
        assert!(text.ends_with("Final Answer: True\n"));
    }

    #[test]
    fn modus_ponens_cites_both() {
        let (_, text) = run(&["p(a)", "p(a) → q(a)"], "q(a)");
        assert!(text.contains("[1] p(a)"));
        assert!(text.contains("[2] p(a) → q(a)"));
    }

    #[test]
    fn counterexample_names_a_student() {
        let premise = "∀x (student(x) ∧ has_cert(x, word) ∧ has_cert(x, excel) ∧ has_cert(x, powerpoint) → do_thesis(x))";
        let (v, text) = run(&[premise], "student(x) ∧ ¬has_cert(x, excel) → do_thesis(x)");
        let Verdict::Uncertain {
            counterexample,
            domain,
        } = &v
        else {
            panic!("{v:?}")
        };
        let q = compile(&[premise], "student(x) ∧ ¬has_cert(x, excel) → do_thesis(x)").unwrap().query;
        let inst = falsified_instance(&q, domain, counterexample).unwrap();
        let c = inst.constants().into_iter().find(|c| !["excel"].contains(&c.as_str())).unwrap();
        assert!(counterexample.value(&GroundAtom::new("student", &[&c])));
        assert!(!counterexample.value(&GroundAtom::new("has_cert", &[&c, "excel"])));
        assert!(!counterexample.value(&GroundAtom::new("do_thesis", &[&c])));
        assert!(text.contains("Falsified query instance"));
        assert!(text.ends_with("Final Answer: False\n"));
    }

    #[test]
    fn shadowed_binders_in_query() {
        let p = compile(&["p(a)"], "∀x ∀x q(x)").unwrap();
        let v = entail(&p.kb, &p.query, &EngineConfig::default()).unwrap();
        let Verdict::Uncertain {
            counterexample,
            domain,
        } = &v
        else {
            panic!()
        };
        assert!(falsified_instance(&p.query, domain, counterexample).is_some());
    }
}
