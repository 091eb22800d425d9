//! Finite-domain semantics: signatures, grounding to propositional form,
//! Boolean evaluation, brute-force model enumeration and the logical
//! equivalence (LE) score.

mod le;
mod models;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Formula, Term};

pub use le::{le_score, le_score_text, LeConfig, LeMode, LeScore};
pub use models::{enumerate_models, eval_words, ORACLE_ATOM_LIMIT};

/// Default cap on the number of nodes a grounding may produce.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("variable '{0}' is free; ground only closed formulas")]
    FreeVariable(String),
    #[error("constant '{0}' is not in the signature")]
    UnknownConstant(String),
    #[error("the domain is empty")]
    EmptyDomain,
    #[error("grounding exceeds the node budget of {budget}")]
    DomainTooLarge { budget: usize },
    #[error("{atoms} ground atoms exceed the enumeration limit of {limit}")]
    ScaleExceeded { atoms: usize, limit: usize },
}

/// Predicates are identified by name and arity: `p/1` and `p/2` are distinct
/// symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub predicates: BTreeSet<(String, usize)>,
    pub constants: BTreeSet<String>,
}

impl Signature {
    pub fn from_formulas<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut sig = Signature::default();
        for f in fs {
            sig.extend_with(f);
        }
        sig
    }

    pub fn extend_with(&mut self, f: &Formula) {
        self.predicates.extend(f.predicates());
        self.constants.extend(f.constants());
    }

    /// Predicate names used with more than one arity.
    pub fn arity_conflicts(&self) -> BTreeMap<String, Vec<usize>> {
        let mut by_name: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (name, arity) in &self.predicates {
            by_name.entry(name.clone()).or_default().push(*arity);
        }
        by_name.retain(|_, arities| arities.len() > 1);
        by_name
    }

    /// Adds `c0`, `c1`, … (skipping taken names) until the domain has at
    /// least `min` constants.
    pub fn ensure_constants(&mut self, min: usize) -> Vec<String> {
        let mut added = Vec::new();
        let mut i = 0;
        while self.constants.len() < min {
            let name = format!("c{i}");
            i += 1;
            if self.constants.insert(name.clone()) {
                added.push(name);
            }
        }
        added
    }

    /// Adds one constant not already in the domain and returns it.
    pub fn fresh_constant(&mut self) -> String {
        let mut i = 0;
        loop {
            let name = format!("c{i}");
            if self.constants.insert(name.clone()) {
                return name;
            }
            i += 1;
        }
    }

    pub fn domain(&self) -> Vec<String> {
        self.constants.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(", "))?;
        }
        Ok(())
    }
}

pub type AtomId = usize;

/// Interns ground atoms to dense ids.
#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, AtomId>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, atom: GroundAtom) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = self.atoms.len();
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        id
    }

    pub fn get(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id]
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atom ids sorted by the atoms' lexicographic order.
    pub fn sorted_ids(&self) -> Vec<AtomId> {
        let mut ids: Vec<AtomId> = (0..self.atoms.len()).collect();
        ids.sort_by(|&a, &b| self.atoms[a].cmp(&self.atoms[b]));
        ids
    }
}

/// Quantifier-free formula over interned ground atoms. `And`/`Or` are
/// n-ary and never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ground {
    Atom(AtomId),
    Not(Box<Ground>),
    And(Vec<Ground>),
    Or(Vec<Ground>),
    Implies(Box<Ground>, Box<Ground>),
    Iff(Box<Ground>, Box<Ground>),
}

impl Ground {
    pub fn size(&self) -> usize {
        match self {
            Ground::Atom(_) => 1,
            Ground::Not(x) => 1 + x.size(),
            Ground::And(xs) | Ground::Or(xs) => 1 + xs.iter().map(Ground::size).sum::<usize>(),
            Ground::Implies(a, b) | Ground::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn atom_ids(&self, out: &mut BTreeSet<AtomId>) {
        match self {
            Ground::Atom(i) => {
                out.insert(*i);
            }
            Ground::Not(x) => x.atom_ids(out),
            Ground::And(xs) | Ground::Or(xs) => xs.iter().for_each(|x| x.atom_ids(out)),
            Ground::Implies(a, b) | Ground::Iff(a, b) => {
                a.atom_ids(out);
                b.atom_ids(out);
            }
        }
    }

    /// Evaluates under a valuation indexed by atom id.
    pub fn eval(&self, values: &[bool]) -> bool {
        match self {
            Ground::Atom(i) => values[*i],
            Ground::Not(x) => !x.eval(values),
            Ground::And(xs) => xs.iter().all(|x| x.eval(values)),
            Ground::Or(xs) => xs.iter().any(|x| x.eval(values)),
            Ground::Implies(a, b) => !a.eval(values) || b.eval(values),
            Ground::Iff(a, b) => a.eval(values) == b.eval(values),
        }
    }

    pub fn display<'a>(&'a self, table: &'a AtomTable) -> GroundDisplay<'a> {
        GroundDisplay { g: self, table }
    }
}

pub struct GroundDisplay<'a> {
    g: &'a Ground,
    table: &'a AtomTable,
}

impl fmt::Display for GroundDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(g: &Ground, t: &AtomTable, top: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let nary = |xs: &[Ground], op: &str, f: &mut fmt::Formatter<'_>| -> fmt::Result {
                if xs.len() == 1 {
                    return go(&xs[0], t, top, f);
                }
                if !top {
                    f.write_str("(")?;
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " {op} ")?;
                    }
                    go(x, t, false, f)?;
                }
                if !top {
                    f.write_str(")")?;
                }
                Ok(())
            };
            match g {
                Ground::Atom(i) => write!(f, "{}", t.atom(*i)),
                Ground::Not(x) => {
                    f.write_str("¬")?;
                    go(x, t, false, f)
                }
                Ground::And(xs) => nary(xs, "∧", f),
                Ground::Or(xs) => nary(xs, "∨", f),
                Ground::Implies(a, b) => nary(&[(**a).clone(), (**b).clone()], "→", f),
                Ground::Iff(a, b) => nary(&[(**a).clone(), (**b).clone()], "↔", f),
            }
        }
        go(self.g, self.table, true, f)
    }
}

/// Truth assignment to ground atoms. Atoms not listed are false.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub truth: BTreeMap<GroundAtom, bool>,
}

impl Interpretation {
    pub fn from_values(table: &AtomTable, values: &[bool]) -> Self {
        Interpretation {
            truth: table
                .atoms()
                .iter()
                .zip(values)
                .map(|(a, &v)| (a.clone(), v))
                .collect(),
        }
    }

    pub fn value(&self, atom: &GroundAtom) -> bool {
        self.truth.get(atom).copied().unwrap_or(false)
    }

    pub fn set(&mut self, atom: GroundAtom, value: bool) {
        self.truth.insert(atom, value);
    }

    /// Valuation indexed by the table's atom ids.
    pub fn values(&self, table: &AtomTable) -> Vec<bool> {
        table.atoms().iter().map(|a| self.value(a)).collect()
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.truth.iter().filter(|(_, &v)| v).map(|(a, _)| a)
    }
}

/// Evaluates a ground formula under an interpretation.
pub fn eval(f: &Ground, i: &Interpretation, table: &AtomTable) -> bool {
    f.eval(&i.values(table))
}

/// Expands quantifiers over a finite constant domain.
pub struct Grounder<'a> {
    domain: Vec<String>,
    table: &'a mut AtomTable,
    budget: usize,
    used: usize,
}

impl<'a> Grounder<'a> {
    pub fn new(sig: &Signature, table: &'a mut AtomTable, budget: usize) -> Self {
        Grounder {
            domain: sig.domain(),
            table,
            budget,
            used: 0,
        }
    }

    /// Nodes produced so far across all calls.
    pub fn used(&self) -> usize {
        self.used
    }

    pub fn ground(&mut self, f: &Formula) -> Result<Ground, GroundError> {
        let mut env = Vec::new();
        self.go(f, &mut env)
    }

    fn tick(&mut self) -> Result<(), GroundError> {
        self.used += 1;
        if self.used > self.budget {
            return Err(GroundError::DomainTooLarge {
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn go(&mut self, f: &Formula, env: &mut Vec<(String, usize)>) -> Result<Ground, GroundError> {
        self.tick()?;
        Ok(match f {
            Formula::Atom(a) => {
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    match t {
                        Term::Variable(v) => {
                            let &(_, c) = env
                                .iter()
                                .rev()
                                .find(|(name, _)| name == v)
                                .ok_or_else(|| GroundError::FreeVariable(v.clone()))?;
                            args.push(self.domain[c].clone());
                        }
                        Term::Constant(c) => {
                            if self.domain.binary_search(c).is_err() {
                                return Err(GroundError::UnknownConstant(c.clone()));
                            }
                            args.push(c.clone());
                        }
                    }
                }
                Ground::Atom(self.table.intern(GroundAtom {
                    predicate: a.predicate.clone(),
                    args,
                }))
            }
            Formula::Not(x) => Ground::Not(Box::new(self.go(x, env)?)),
            Formula::And(a, b) => Ground::And(vec![self.go(a, env)?, self.go(b, env)?]),
            Formula::Or(a, b) => Ground::Or(vec![self.go(a, env)?, self.go(b, env)?]),
            Formula::Implies(a, b) => {
                Ground::Implies(Box::new(self.go(a, env)?), Box::new(self.go(b, env)?))
            }
            Formula::Iff(a, b) => {
                Ground::Iff(Box::new(self.go(a, env)?), Box::new(self.go(b, env)?))
            }
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                if self.domain.is_empty() {
                    return Err(GroundError::EmptyDomain);
                }
                let mut parts = Vec::with_capacity(self.domain.len());
                for c in 0..self.domain.len() {
                    env.push((v.clone(), c));
                    let part = self.go(body, env);
                    env.pop();
                    parts.push(part?);
                }
                if parts.len() == 1 {
                    parts.pop().unwrap()
                } else if matches!(f, Formula::ForAll(..)) {
                    Ground::And(parts)
                } else {
                    Ground::Or(parts)
                }
            }
        })
    }
}

/// Grounds a closed formula over `sig`'s constants, interning atoms into
/// `table`.
pub fn ground(
    f: &Formula,
    sig: &Signature,
    table: &mut AtomTable,
    budget: usize,
) -> Result<Ground, GroundError> {
    Grounder::new(sig, table, budget).ground(f)
}

/// Tarski-style evaluation of a closed formula over `domain`, without
/// grounding. Serves as the reference for [`ground`].
pub fn holds(f: &Formula, domain: &[String], i: &Interpretation) -> Result<bool, GroundError> {
    fn go(
        f: &Formula,
        domain: &[String],
        i: &Interpretation,
        env: &mut Vec<(String, String)>,
    ) -> Result<bool, GroundError> {
        Ok(match f {
            Formula::Atom(a) => {
                let mut args = Vec::new();
                for t in &a.args {
                    args.push(match t {
                        Term::Constant(c) => c.clone(),
                        Term::Variable(v) => env
                            .iter()
                            .rev()
                            .find(|(n, _)| n == v)
                            .map(|(_, c)| c.clone())
                            .ok_or_else(|| GroundError::FreeVariable(v.clone()))?,
                    });
                }
                i.value(&GroundAtom {
                    predicate: a.predicate.clone(),
                    args,
                })
            }
            Formula::Not(x) => !go(x, domain, i, env)?,
            Formula::And(a, b) => go(a, domain, i, env)? & go(b, domain, i, env)?,
            Formula::Or(a, b) => go(a, domain, i, env)? | go(b, domain, i, env)?,
            Formula::Implies(a, b) => !go(a, domain, i, env)? | go(b, domain, i, env)?,
            Formula::Iff(a, b) => go(a, domain, i, env)? == go(b, domain, i, env)?,
            Formula::ForAll(v, body) => {
                let mut all = true;
                for c in domain {
                    env.push((v.clone(), c.clone()));
                    let r = go(body, domain, i, env);
                    env.pop();
                    all &= r?;
                }
                all
            }
            Formula::Exists(v, body) => {
                let mut any = false;
                for c in domain {
                    env.push((v.clone(), c.clone()));
                    let r = go(body, domain, i, env);
                    env.pop();
                    any |= r?;
                }
                any
            }
        })
    }
    go(f, domain, i, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use proptest::prelude::*;

    fn f(s: &str) -> Formula {
        parse(s).into_result().unwrap()
    }

    fn sig(consts: &[&str]) -> Signature {
        Signature {
            predicates: BTreeSet::new(),
            constants: consts.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn forall_expands_to_conjunction() {
        let mut t = AtomTable::new();
        let g = ground(&f("∀x p(x)"), &sig(&["a", "b"]), &mut t, 100).unwrap();
        assert_eq!(g.display(&t).to_string(), "p(a) ∧ p(b)");
    }

    #[test]
    fn exists_over_singleton() {
        let mut t = AtomTable::new();
        let g = ground(&f("∃x p(x)"), &sig(&["a"]), &mut t, 100).unwrap();
        assert_eq!(g, Ground::Atom(0));
        assert_eq!(t.atom(0), &GroundAtom::new("p", &["a"]));
    }

    #[test]
    fn course_rule_has_five_conjuncts() {
        let mut t = AtomTable::new();
        let s = sig(&["Alice", "Bob", "Charlie", "cs101", "cs102"]);
        let g = ground(
            &f("∀x (enrolled(x, cs102) → completed(x, cs101))"),
            &s,
            &mut t,
            1000,
        )
        .unwrap();
        match g {
            Ground::And(parts) => {
                assert_eq!(parts.len(), 5);
                assert!(parts.iter().all(|p| matches!(p, Ground::Implies(..))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grounding_errors() {
        let mut t = AtomTable::new();
        assert_eq!(
            ground(&f("p(x)"), &sig(&["a"]), &mut t, 100),
            Err(GroundError::FreeVariable("x".into()))
        );
        assert_eq!(
            ground(&f("p(b)"), &sig(&["a"]), &mut t, 100),
            Err(GroundError::UnknownConstant("b".into()))
        );
        assert_eq!(
            ground(&f("∀x ∀y ∀z r(x, y, z)"), &sig(&["a", "b", "c", "d"]), &mut t, 50),
            Err(GroundError::DomainTooLarge { budget: 50 })
        );
    }

    #[test]
    fn eval_examples() {
        let mut t = AtomTable::new();
        let s = sig(&["a"]);
        let pa = GroundAtom::new("p", &["a"]);
        let qa = GroundAtom::new("q", &["a"]);
        let g = ground(&f("p(a)"), &s, &mut t, 10).unwrap();
        let mut i = Interpretation::default();
        i.set(pa.clone(), true);
        assert!(eval(&g, &i, &t));

        let g = ground(&f("p(a) → q(a)"), &s, &mut t, 10).unwrap();
        i.set(qa.clone(), false);
        assert!(!eval(&g, &i, &t));

        // ¬(p ↔ q) is exclusive or on all four rows
        let g = ground(&f("p(a) ⊕ q(a)"), &s, &mut t, 10).unwrap();
        for (p, q) in [(false, false), (false, true), (true, false), (true, true)] {
            let mut i = Interpretation::default();
            i.set(pa.clone(), p);
            i.set(qa.clone(), q);
            assert_eq!(eval(&g, &i, &t), p ^ q);
        }
    }

    fn arb_closed_formula() -> impl Strategy<Value = Formula> {
        let preds = [("p", 1usize), ("q", 2), ("r", 0)];
        let leaf = (0..3usize, 0..3usize, 0..3usize, any::<bool>()).prop_map(
            move |(pi, a0, a1, var)| {
                let (name, arity) = preds[pi];
                let pick = |k: usize| {
                    if var {
                        ["x", "y", "z"][k].to_string()
                    } else {
                        ["a", "b", "c"][k].to_string()
                    }
                };
                let args = [a0, a1]
                    .iter()
                    .take(arity)
                    .map(|&k| {
                        if var {
                            Term::Variable(pick(k))
                        } else {
                            Term::Constant(pick(k))
                        }
                    })
                    .collect();
                Formula::atom(name, args)
            },
        );
        let tree = leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
                (0..3usize, inner.clone()).prop_map(|(v, b)| Formula::forall(["x", "y", "z"][v], b)),
                (0..3usize, inner).prop_map(|(v, b)| Formula::exists(["x", "y", "z"][v], b)),
            ]
        });
        tree.prop_map(|f| f.universal_closure())
    }

    proptest! {
        #[test]
        fn grounding_agrees_with_direct_evaluation(
            formula in arb_closed_formula(),
            ncons in 1usize..=3,
            bits in proptest::collection::vec(any::<bool>(), 64),
        ) {
            let mut s = Signature::from_formulas([&formula]);
            let all = ["a", "b", "c"];
            for c in all.iter().take(ncons) {
                s.constants.insert(c.to_string());
            }
            let mut t = AtomTable::new();
            let g = ground(&formula, &s, &mut t, DEFAULT_NODE_BUDGET).unwrap();
            let mut interp = Interpretation::default();
            for (k, atom) in t.atoms().iter().enumerate() {
                interp.set(atom.clone(), bits[k % bits.len()] ^ (k % 3 == 0));
            }
            let direct = holds(&formula, &s.domain(), &interp).unwrap();
            prop_assert_eq!(eval(&g, &interp, &t), direct);
        }
    }
}
