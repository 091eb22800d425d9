//! Three-way entailment over a finite Herbrand domain.
//!
//! Premises and query are grounded over the knowledge base's constants, the
//! query's constants and one fresh constant standing for an unnamed entity.
//! The ground theory is Tseitin-encoded once and both satisfiability checks
//! (premises with the query negated, premises with the query) run on the
//! same solver under assumptions.

mod align;
mod explain;
mod smtlib;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::PredictedLabel;
use crate::par::Execution;
use crate::sat::{Lit, Solver};
use crate::semantics::{
    AtomTable, GroundAtom, GroundError, Grounder, Interpretation, Signature, DEFAULT_NODE_BUDGET,
};
use crate::syntax::{parse, Atom, Diagnostic, Formula, Term};

pub use align::{align_predicates, normalized_name, Rewrite};
pub use explain::{explain, final_answer, falsified_instance};
pub use smtlib::export_smtlib;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Treat unasserted ground atoms of fact predicates as false.
    pub closed_world: bool,
    pub node_budget: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            closed_world: false,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the premises are inconsistent")]
    Inconsistent,
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("template {0} must have exactly one variable argument")]
    BadTemplate(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub premises: Vec<Formula>,
    pub signature: Signature,
    pub alignment_log: Vec<Rewrite>,
    pub warnings: Vec<String>,
}

impl KnowledgeBase {
    /// A knowledge base taken as given, without predicate alignment.
    pub fn new(premises: Vec<Formula>) -> Self {
        let premises: Vec<Formula> = premises.into_iter().map(Formula::universal_closure).collect();
        let signature = Signature::from_formulas(&premises);
        let warnings = arity_warnings(&signature);
        KnowledgeBase {
            premises,
            signature,
            alignment_log: Vec::new(),
            warnings,
        }
    }
}

pub(crate) fn arity_warnings(sig: &Signature) -> Vec<String> {
    sig.arity_conflicts()
        .into_iter()
        .map(|(name, arities)| {
            let list: Vec<String> = arities.iter().map(|a| a.to_string()).collect();
            format!(
                "predicate '{name}' is used with arities {}; treated as distinct predicates",
                list.join(" and ")
            )
        })
        .collect()
}

/// A diagnostic tagged with the input it came from (`premise 3`, `query`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcedDiagnostic {
    pub source: String,
    pub diagnostic: Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Premises entail the query; `core` indexes a minimal supporting subset.
    True { core: Vec<usize> },
    /// Premises entail the negated query.
    False { core: Vec<usize> },
    /// Neither; the interpretation satisfies the premises and falsifies the
    /// query over `domain`.
    Uncertain {
        counterexample: Interpretation,
        domain: Vec<String>,
    },
    CompileError { diagnostics: Vec<SourcedDiagnostic> },
}

impl Verdict {
    pub fn label(&self) -> PredictedLabel {
        match self {
            Verdict::True { .. } => PredictedLabel::True,
            Verdict::False { .. } => PredictedLabel::False,
            Verdict::Uncertain { .. } => PredictedLabel::Uncertain,
            Verdict::CompileError { .. } => PredictedLabel::CompileError,
        }
    }
}

/// Parsed premises and query ready for [`entail`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub kb: KnowledgeBase,
    pub query: Formula,
}

/// Parses and aligns premises and query. Returns every parse diagnostic when
/// any input is rejected.
pub fn compile<S: AsRef<str>>(premises: &[S], query: &str) -> Result<Problem, Vec<SourcedDiagnostic>> {
    let mut diags = Vec::new();
    let mut parsed = Vec::with_capacity(premises.len());
    for (i, p) in premises.iter().enumerate() {
        match parse(p.as_ref()).into_result() {
            Ok(f) => parsed.push(f),
            Err(errors) => diags.extend(errors.into_iter().map(|d| SourcedDiagnostic {
                source: format!("premise {}", i + 1),
                diagnostic: d,
            })),
        }
    }
    let query = match parse(query).into_result() {
        Ok(f) => Some(f),
        Err(errors) => {
            diags.extend(errors.into_iter().map(|d| SourcedDiagnostic {
                source: "query".to_string(),
                diagnostic: d,
            }));
            None
        }
    };
    match query {
        Some(q) if diags.is_empty() => {
            let (kb, query) = align_predicates(parsed, q);
            Ok(Problem { kb, query })
        }
        _ => Err(diags),
    }
}

/// Parses, aligns and decides in one step; parse failures become
/// [`Verdict::CompileError`].
pub fn entail_text<S: AsRef<str>>(
    premises: &[S],
    query: &str,
    cfg: &EngineConfig,
) -> Result<Verdict, EngineError> {
    match compile(premises, query) {
        Ok(p) => entail(&p.kb, &p.query, cfg),
        Err(diagnostics) => Ok(Verdict::CompileError { diagnostics }),
    }
}

/// The signature used to ground `kb` together with `query`: the knowledge
/// base's constants, the query's constants and one fresh constant.
pub fn grounding_signature(kb: &KnowledgeBase, query: &Formula) -> Signature {
    let mut sig = kb.signature.clone();
    sig.extend_with(query);
    sig.fresh_constant();
    sig
}

/// Ground atoms asserted positively at the top level of a premise, looking
/// through conjunctions.
pub fn positive_facts(f: &Formula) -> Vec<Atom> {
    fn go(f: &Formula, out: &mut Vec<Atom>) {
        match f {
            Formula::Atom(a) if a.args.iter().all(|t| matches!(t, Term::Constant(_))) => {
                out.push(a.clone())
            }
            Formula::And(a, b) => {
                go(a, out);
                go(b, out);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(f, &mut out);
    out
}

/// Atoms the closed-world assumption makes false: every ground atom over
/// `domain` of a predicate that has a positive fact, except the facts.
pub fn closed_world_atoms(premises: &[Formula], domain: &[String]) -> Vec<GroundAtom> {
    let mut facts = BTreeSet::new();
    let mut preds = BTreeSet::new();
    for p in premises {
        for a in positive_facts(p) {
            preds.insert((a.predicate.clone(), a.arity()));
            facts.insert(GroundAtom {
                predicate: a.predicate.clone(),
                args: a.args.iter().map(|t| t.name().to_string()).collect(),
            });
        }
    }
    let mut out = Vec::new();
    for (pred, arity) in preds {
        if domain.is_empty() && arity > 0 {
            continue;
        }
        let mut idx = vec![0usize; arity];
        loop {
            let atom = GroundAtom {
                predicate: pred.clone(),
                args: idx.iter().map(|&i| domain[i].clone()).collect(),
            };
            if !facts.contains(&atom) {
                out.push(atom);
            }
            // odometer over domain^arity
            let mut k = arity;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < domain.len() {
                    break;
                }
                idx[k] = 0;
            }
            if arity == 0 || idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out
}

/// Grounded, encoded problem: one solver shared by both checks.
struct Encoded {
    solver: Solver,
    table: AtomTable,
    premise_roots: Vec<Lit>,
    background: Vec<Lit>,
    query_root: Lit,
    domain: Vec<String>,
}

impl Encoded {
    fn build(kb: &KnowledgeBase, query: &Formula, cfg: &EngineConfig) -> Result<Self, EngineError> {
        let query = query.clone().universal_closure();
        let mut sig = kb.signature.clone();
        sig.extend_with(&query);
        let fresh = sig.fresh_constant();
        let domain = sig.domain();
        let mut table = AtomTable::new();
        let mut grounder = Grounder::new(&sig, &mut table, cfg.node_budget);
        let mut grounds = Vec::with_capacity(kb.premises.len());
        for p in &kb.premises {
            grounds.push(grounder.ground(&p.clone().universal_closure())?);
        }
        let gq = grounder.ground(&query)?;
        let mut cw_ids = Vec::new();
        if cfg.closed_world {
            let cw = closed_world_atoms(&kb.premises, &domain);
            if grounder.used() + cw.len() > cfg.node_budget {
                return Err(GroundError::DomainTooLarge {
                    budget: cfg.node_budget,
                }
                .into());
            }
            drop(grounder);
            cw_ids = cw.into_iter().map(|a| table.intern(a)).collect();
        } else {
            drop(grounder);
        }
        // atom ids must be variables 0..n before Tseitin allocates auxiliaries
        let mut solver = Solver::new();
        solver.ensure_vars(table.len());
        // branch on named entities first, so counterexamples tend to be
        // carried by the unnamed one
        for (id, atom) in table.atoms().iter().enumerate() {
            if !atom.args.contains(&fresh) {
                solver.prefer(id, 1e-9);
            }
        }
        let premise_roots = grounds.iter().map(|g| solver.encode(g)).collect();
        let query_root = solver.encode(&gq);
        Ok(Encoded {
            solver,
            table,
            premise_roots,
            background: cw_ids.into_iter().map(Lit::neg).collect(),
            query_root,
            domain,
        })
    }

    fn check(&mut self, premises: &[usize], query: Lit) -> bool {
        let mut assume: Vec<Lit> = self.background.clone();
        assume.extend(premises.iter().map(|&i| self.premise_roots[i]));
        assume.push(query);
        self.solver.solve(&assume)
    }

    /// Greedy deletion: drop each premise in turn if the check stays unsat.
    fn core(&mut self, query: Lit) -> Vec<usize> {
        let mut core: Vec<usize> = (0..self.premise_roots.len()).collect();
        let mut i = 0;
        while i < core.len() {
            let mut trial = core.clone();
            trial.remove(i);
            if self.check(&trial, query) {
                i += 1;
            } else {
                core = trial;
            }
        }
        core
    }

    fn model(&self) -> Interpretation {
        let m = self.solver.model();
        Interpretation::from_values(&self.table, &m[..self.table.len()])
    }
}

/// Decides whether `kb` entails `query`, its negation, or neither.
pub fn entail(kb: &KnowledgeBase, query: &Formula, cfg: &EngineConfig) -> Result<Verdict, EngineError> {
    let mut enc = Encoded::build(kb, query, cfg)?;
    let all: Vec<usize> = (0..enc.premise_roots.len()).collect();
    let q = enc.query_root;
    let counter = enc.check(&all, !q);
    let counterexample = counter.then(|| enc.model());
    let support = enc.check(&all, q);
    match (counterexample, support) {
        (None, true) => Ok(Verdict::True { core: enc.core(!q) }),
        (Some(_), false) => Ok(Verdict::False { core: enc.core(q) }),
        (Some(m), true) => Ok(Verdict::Uncertain {
            counterexample: m,
            domain: enc.domain,
        }),
        (None, false) => Err(EngineError::Inconsistent),
    }
}

/// Whether `premises` together with the negated query have a model; this is
/// the check an exported SMT-LIB script asks an external solver.
pub fn counter_model_exists(
    kb: &KnowledgeBase,
    query: &Formula,
    cfg: &EngineConfig,
) -> Result<bool, EngineError> {
    let mut enc = Encoded::build(kb, query, cfg)?;
    let all: Vec<usize> = (0..enc.premise_roots.len()).collect();
    let q = enc.query_root;
    Ok(enc.check(&all, !q))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EntityAnswer {
    pub entities: Vec<String>,
    pub warnings: Vec<String>,
}

/// Constants `c` of the knowledge base for which `template[c]` is entailed.
pub fn enumerate_entities(
    kb: &KnowledgeBase,
    template: &Atom,
    cfg: &EngineConfig,
    exec: Execution,
) -> Result<EntityAnswer, EngineError> {
    let vars: BTreeSet<&str> = template
        .args
        .iter()
        .filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            Term::Constant(_) => None,
        })
        .collect();
    if vars.len() != 1 {
        return Err(EngineError::BadTemplate(
            Formula::Atom(template.clone()).to_string(),
        ));
    }
    let var = vars.into_iter().next().unwrap();
    let pattern = Formula::Atom(template.clone());
    let candidates = kb.signature.domain();
    let results = exec.map(&candidates, |c| entail(kb, &pattern.substitute(var, c), cfg));
    let mut answer = EntityAnswer::default();
    for (c, r) in candidates.into_iter().zip(results) {
        match r {
            Ok(Verdict::True { .. }) => answer.entities.push(c),
            Ok(_) => {}
            Err(e) => answer.warnings.push(format!("candidate {c} skipped: {e}")),
        }
    }
    Ok(answer)
}
