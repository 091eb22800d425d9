use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::models::{eval_words, table_block};
use super::{AtomTable, Grounder, Signature, DEFAULT_NODE_BUDGET};
use crate::par::Execution;
use crate::syntax::{parse, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeConfig {
    pub seed: u64,
    /// Enumerate every row when the atom count is at most this.
    pub exhaustive_limit: usize,
    /// Number of sampled rows otherwise.
    pub samples: u64,
    pub node_budget: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for LeConfig {
    fn default() -> Self {
        LeConfig {
            seed: 42,
            exhaustive_limit: 20,
            samples: 1 << 20,
            node_budget: DEFAULT_NODE_BUDGET,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeMode {
    Exhaustive,
    Sampled,
    /// A formula failed to parse or could not be grounded; score is 0.
    Unscored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeScore {
    pub score: f64,
    pub mode: LeMode,
    pub atoms: usize,
    pub note: Option<String>,
}

impl LeScore {
    fn unscored(note: impl Into<String>) -> Self {
        LeScore {
            score: 0.0,
            mode: LeMode::Unscored,
            atoms: 0,
            note: Some(note.into()),
        }
    }
}

/// LE on raw strings: 0 (flagged) when either side does not parse.
pub fn le_score_text(gold: &str, pred: &str, cfg: &LeConfig) -> LeScore {
    match (parse(gold).into_result(), parse(pred).into_result()) {
        (Ok(g), Ok(p)) => le_score(&g, &p, cfg),
        (Err(_), _) => LeScore::unscored("gold formula does not parse"),
        (_, Err(_)) => LeScore::unscored("predicted formula does not parse"),
    }
}

/// Fraction of interpretations on which `gold` and `pred` agree.
///
/// Free variables are universally closed. The domain is the constants of
/// both formulas, or two fresh constants when there are none. Predicates
/// with equal names but different arities are distinct atoms.
pub fn le_score(gold: &Formula, pred: &Formula, cfg: &LeConfig) -> LeScore {
    let gold = gold.clone().universal_closure();
    let pred = pred.clone().universal_closure();
    let mut sig = Signature::from_formulas([&gold, &pred]);
    if sig.constants.is_empty() {
        sig.ensure_constants(2);
    }
    let mut table = AtomTable::new();
    let mut grounder = Grounder::new(&sig, &mut table, cfg.node_budget);
    let grounded = grounder
        .ground(&gold)
        .and_then(|g| grounder.ground(&pred).map(|p| (g, p)));
    let (g, p) = match grounded {
        Ok(pair) => pair,
        Err(e) => return LeScore::unscored(e.to_string()),
    };
    let k = table.len();
    let order = table.sorted_ids();

    if k <= cfg.exhaustive_limit {
        let rows = 1u64 << k;
        let blocks = rows.div_ceil(64);
        let agree = cfg.execution.sum_range(blocks, |b| {
            let (words, mask) = table_block(&order, k, b);
            (!(eval_words(&g, &words) ^ eval_words(&p, &words)) & mask).count_ones() as u64
        });
        LeScore {
            score: agree as f64 / rows as f64,
            mode: LeMode::Exhaustive,
            atoms: k,
            note: None,
        }
    } else {
        let samples = cfg.samples.max(1);
        let blocks = samples.div_ceil(64);
        let seed = cfg.seed;
        let agree = cfg.execution.sum_range(blocks, |b| {
            // one stream per block, atoms drawn in sorted order so the result
            // does not depend on which formula interned an atom first
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut words = vec![0u64; k];
            for &atom in &order {
                words[atom] = rng.next_u64();
            }
            let lanes = (samples - b * 64).min(64);
            let mask = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
            (!(eval_words(&g, &words) ^ eval_words(&p, &words)) & mask).count_ones() as u64
        });
        LeScore {
            score: agree as f64 / samples as f64,
            mode: LeMode::Sampled,
            atoms: k,
            note: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(a: &str, b: &str) -> f64 {
        le_score_text(a, b, &LeConfig::default()).score
    }

    #[test]
    fn material_implication() {
        assert_eq!(le("p(a) → q(a)", "¬p(a) ∨ q(a)"), 1.0);
    }

    #[test]
    fn identity_and_negation() {
        assert_eq!(le("p(a)", "p(a)"), 1.0);
        assert_eq!(le("p(a)", "¬p(a)"), 0.0);
    }

    #[test]
    fn unparseable_scores_zero() {
        let s = le_score_text("p(a)", "p(a", &LeConfig::default());
        assert_eq!(s.score, 0.0);
        assert_eq!(s.mode, LeMode::Unscored);
    }

    #[test]
    fn partial_agreement() {
        // p ∧ q vs p: disagree only on p=T,q=F
        assert_eq!(le("p ∧ q", "p"), 0.75);
        // different predicates share no rows except where both happen to agree
        assert_eq!(le("p(a)", "q(a)"), 0.5);
    }

    #[test]
    fn quantifiers_need_two_fresh_constants() {
        // over {c0, c1}: ∀x p(x) and ∃x p(x) differ on the two mixed rows
        let s = le_score_text("∀x p(x)", "∃x p(x)", &LeConfig::default());
        assert_eq!(s.atoms, 2);
        assert_eq!(s.score, 0.5);
    }

    #[test]
    fn free_variables_are_closed() {
        assert_eq!(le("p(x) → q(x)", "∀y (¬q(y) → ¬p(y))"), 1.0);
    }

    #[test]
    fn arity_conflict_is_distinct_atoms() {
        let s = le_score_text("p(a)", "p(a, a)", &LeConfig::default());
        assert_eq!(s.atoms, 2);
        assert_eq!(s.score, 0.5);
    }

    #[test]
    fn sampled_mode_is_deterministic_and_symmetric() {
        let names: Vec<String> = (0..24).map(|i| format!("p{i}")).collect();
        let a = names.join(" ∨ ");
        let b = names[..23].join(" ∨ ");
        let cfg = LeConfig {
            samples: 1 << 14,
            ..LeConfig::default()
        };
        let x = le_score_text(&a, &b, &cfg);
        let y = le_score_text(&b, &a, &cfg);
        let z = le_score_text(
            &a,
            &b,
            &LeConfig {
                execution: Execution::Sequential,
                ..cfg
            },
        );
        assert_eq!(x.mode, LeMode::Sampled);
        assert_eq!(x.score.to_bits(), y.score.to_bits());
        assert_eq!(x.score.to_bits(), z.score.to_bits());
        // disagree only when p0..p22 all false and p23 true: 2^-24
        assert!(x.score > 0.999);
    }
}
