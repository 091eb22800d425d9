//! Conversion and reasoning metrics: predicate-level semantic equivalence
//! (PSE), the combined conversion score, the reasoning credit and the rank
//! correlation between the two.

mod assignment;
mod embedding;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{GoldLabel, PredictedLabel};
use crate::syntax::{parse, Formula};

pub use assignment::{max_weight_matching, min_cost_assignment};
pub use embedding::{cosine, split_name, trigrams, Embedder, TrigramEmbedder};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("score lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("rank correlation needs at least two pairs, got {0}")]
    TooFew(usize),
    #[error("score lists contain a non-finite value")]
    NotFinite,
}

fn unit(name: &'static str, value: f64) -> Result<f64, MetricError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(MetricError::OutOfRange { name, value })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseMatch {
    pub gold: String,
    pub pred: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseScore {
    pub score: f64,
    pub matches: Vec<PseMatch>,
    pub note: Option<String>,
}

fn predicate_names(f: &Formula) -> Vec<String> {
    let names: BTreeSet<String> = f.predicates().into_iter().map(|(n, _)| n).collect();
    names.into_iter().collect()
}

/// Optimal one-to-one matching of predicate names by embedding cosine
/// (clamped to [0, 1]); the matched total divided by the larger set size.
/// Two empty sets score 1.
pub fn pse_score(gold: &Formula, pred: &Formula, emb: &dyn Embedder) -> PseScore {
    let g = predicate_names(gold);
    let p = predicate_names(pred);
    if g.is_empty() && p.is_empty() {
        return PseScore {
            score: 1.0,
            matches: Vec::new(),
            note: None,
        };
    }
    // compute on a canonical orientation so swapping the sides is bit-exact
    let swapped = g > p;
    let (rows, cols) = if swapped { (&p, &g) } else { (&g, &p) };
    let er: Vec<Vec<f64>> = rows.iter().map(|n| emb.embed(n)).collect();
    let ec: Vec<Vec<f64>> = cols.iter().map(|n| emb.embed(n)).collect();
    let sim: Vec<Vec<f64>> = rows
        .iter()
        .zip(&er)
        .map(|(rn, rv)| {
            cols.iter()
                .zip(&ec)
                .map(|(cn, cv)| {
                    if rn == cn {
                        1.0
                    } else {
                        cosine(rv, cv).clamp(0.0, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    let pairs = max_weight_matching(&sim);
    let mut values: Vec<f64> = pairs.iter().map(|&(r, c)| sim[r][c]).collect();
    values.sort_by(f64::total_cmp);
    let total: f64 = values.iter().sum();
    let mut matches: Vec<PseMatch> = pairs
        .iter()
        .map(|&(r, c)| {
            let (gn, pn) = if swapped {
                (&cols[c], &rows[r])
            } else {
                (&rows[r], &cols[c])
            };
            PseMatch {
                gold: gn.clone(),
                pred: pn.clone(),
                similarity: sim[r][c],
            }
        })
        .collect();
    matches.sort_by(|a, b| a.gold.cmp(&b.gold));
    PseScore {
        score: total / g.len().max(p.len()) as f64,
        matches,
        note: None,
    }
}

/// PSE on raw strings: 0 (flagged) when either side does not parse.
pub fn pse_score_text(gold: &str, pred: &str, emb: &dyn Embedder) -> PseScore {
    match (parse(gold).into_result(), parse(pred).into_result()) {
        (Ok(g), Ok(p)) => pse_score(&g, &p, emb),
        (g, _) => PseScore {
            score: 0.0,
            matches: Vec::new(),
            note: Some(
                if g.is_err() {
                    "gold formula does not parse"
                } else {
                    "predicted formula does not parse"
                }
                .to_string(),
            ),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvScoreBreakdown {
    pub swf: f64,
    pub pse: f64,
    pub le: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Harmonic mean of `swf` and `le`, 0 when both are 0.
    pub harmonic: f64,
    pub conv: f64,
}

/// `lambda1 · H(swf, le) + (1 − lambda1) · pse`.
pub fn conv_score(swf: f64, pse: f64, le: f64, lambda1: f64) -> Result<ConvScoreBreakdown, MetricError> {
    let swf = unit("swf", swf)?;
    let pse = unit("pse", pse)?;
    let le = unit("le", le)?;
    let lambda1 = unit("lambda1", lambda1)?;
    let lambda2 = 1.0 - lambda1;
    let harmonic = if swf + le == 0.0 {
        0.0
    } else if swf == le {
        swf
    } else {
        2.0 * swf * le / (swf + le)
    };
    let conv = (lambda1 * harmonic + lambda2 * pse).clamp(0.0, 1.0);
    Ok(ConvScoreBreakdown {
        swf,
        pse,
        le,
        lambda1,
        lambda2,
        harmonic,
        conv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReasonScale {
    pub max: f64,
    pub mid: f64,
    pub min: f64,
}

impl Default for ReasonScale {
    fn default() -> Self {
        ReasonScale {
            max: 1.0,
            mid: 0.5,
            min: 0.0,
        }
    }
}

/// Full credit for the gold label, none for a compile error, partial credit
/// for any other executable answer.
pub fn reason_score(predicted: PredictedLabel, gold: GoldLabel, scale: &ReasonScale) -> f64 {
    if predicted.matches(gold) {
        scale.max
    } else if predicted == PredictedLabel::CompileError {
        scale.min
    } else {
        scale.mid
    }
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Srho {
    pub value: f64,
    /// One list is constant, so the correlation is undefined and reported 0.
    pub degenerate: bool,
    pub ties: bool,
}

/// Spearman rank correlation. Without ties this is the closed form
/// `1 − 6Σd²/(n(n²−1))`; with ties it is the Pearson correlation of
/// average ranks.
pub fn srho_score(conv: &[f64], reason: &[f64]) -> Result<Srho, MetricError> {
    if conv.len() != reason.len() {
        return Err(MetricError::LengthMismatch(conv.len(), reason.len()));
    }
    let n = conv.len();
    if n < 2 {
        return Err(MetricError::TooFew(n));
    }
    if conv.iter().chain(reason).any(|x| !x.is_finite()) {
        return Err(MetricError::NotFinite);
    }
    let rc = average_ranks(conv);
    let rr = average_ranks(reason);
    let has_ties = |xs: &[f64]| {
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        s.windows(2).any(|w| w[0] == w[1])
    };
    let ties = has_ties(conv) || has_ties(reason);
    let constant = |xs: &[f64]| xs.iter().all(|x| *x == xs[0]);
    if constant(conv) || constant(reason) {
        return Ok(Srho {
            value: 0.0,
            degenerate: true,
            ties,
        });
    }
    let value = if ties {
        let nf = n as f64;
        let mc = rc.iter().sum::<f64>() / nf;
        let mr = rr.iter().sum::<f64>() / nf;
        let (mut cov, mut vc, mut vr) = (0.0, 0.0, 0.0);
        for (a, b) in rc.iter().zip(&rr) {
            cov += (a - mc) * (b - mr);
            vc += (a - mc) * (a - mc);
            vr += (b - mr) * (b - mr);
        }
        (cov / (vc * vr).sqrt()).clamp(-1.0, 1.0)
    } else {
        let d2: f64 = rc.iter().zip(&rr).map(|(a, b)| (a - b) * (a - b)).sum();
        let nf = n as f64;
        1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0))
    };
    Ok(Srho {
        value,
        degenerate: false,
        ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pse(g: &str, p: &str) -> f64 {
        pse_score_text(g, p, &TrigramEmbedder::default()).score
    }

    #[test]
    fn pse_examples() {
        assert_eq!(pse("∀x (p(x) → q(x))", "q(a) ∧ p(b)"), 1.0);
        let s = pse("Student(a)", "Students(a)");
        assert!(s > 0.8 && s < 1.0, "{s}");
        // one matched, one hallucinated predicate with no shared trigram
        assert_eq!(pse("p(a)", "p(a) ∧ zzzz(a)"), 0.5);
        assert_eq!(pse("p(a)", "p(a"), 0.0);
    }

    #[test]
    fn pse_denominator_is_larger_side() {
        let e = TrigramEmbedder::default();
        let g = parse("a1(x) ∧ b2(x) ∧ c3(x)").into_result().unwrap();
        let p = parse("a1(x)").into_result().unwrap();
        assert!((pse_score(&g, &p, &e).score - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conv_examples() {
        assert_eq!(conv_score(1.0, 1.0, 1.0, 0.5).unwrap().conv, 1.0);
        let c = conv_score(0.0, 0.7, 0.0, 0.3).unwrap();
        assert_eq!(c.harmonic, 0.0);
        assert_eq!(c.conv, (1.0 - 0.3) * 0.7);
        let c = conv_score(0.8, 0.7, 0.6, 0.5).unwrap();
        let expected = 0.5 * (2.0 * 0.8 * 0.6 / 1.4) + 0.5 * 0.7;
        assert!((c.conv - expected).abs() < 1e-15);
        assert!((c.conv - 0.6929).abs() < 1e-4);
        assert!(conv_score(1.2, 0.0, 0.0, 0.5).is_err());
        assert!(conv_score(0.5, 0.5, 0.5, -0.1).is_err());
    }

    #[test]
    fn reason_cases() {
        let s = ReasonScale::default();
        assert_eq!(reason_score(PredictedLabel::True, GoldLabel::True, &s), 1.0);
        assert_eq!(reason_score(PredictedLabel::False, GoldLabel::True, &s), 0.5);
        assert_eq!(reason_score(PredictedLabel::CompileError, GoldLabel::False, &s), 0.0);
        assert_eq!(reason_score(PredictedLabel::Uncertain, GoldLabel::Uncertain, &s), 1.0);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[0.5, 0.5, 0.4, 1.0]), [2.5, 2.5, 1.0, 4.0]);
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), [3.0, 1.0, 2.0]);
    }

    #[test]
    fn srho_examples() {
        assert_eq!(srho_score(&[0.1, 0.2, 0.3], &[0.4, 0.5, 0.6]).unwrap().value, 1.0);
        assert_eq!(srho_score(&[0.1, 0.2, 0.3], &[0.9, 0.5, 0.1]).unwrap().value, -1.0);
        // ranks (1,3,2,4) against (2.5,2.5,1,4): cov 3, variances 5 and 4.5
        let r = srho_score(&[0.2, 0.8, 0.5, 0.9], &[0.5, 0.5, 0.4, 1.0]).unwrap();
        assert!(r.ties);
        assert!((r.value - 0.4f64.sqrt()).abs() < 1e-12);
        let d = srho_score(&[0.3, 0.3], &[0.1, 0.9]).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.value, 0.0);
        assert!(srho_score(&[0.1], &[0.2]).is_err());
        assert!(srho_score(&[0.1, 0.2], &[0.2]).is_err());
    }

    proptest! {
        #[test]
        fn pse_symmetric(a in prop::collection::btree_set("[a-e]{1,4}", 0..4),
                         b in prop::collection::btree_set("[a-e]{1,4}", 0..4)) {
            let mk = |s: &BTreeSet<String>| -> Formula {
                s.iter()
                    .map(|n| Formula::atom(format!("P{n}"), vec![]))
                    .reduce(Formula::and)
                    .unwrap_or_else(|| Formula::atom("Q", vec![]))
            };
            let (g, p) = (mk(&a), mk(&b));
            let e = TrigramEmbedder::default();
            let x = pse_score(&g, &p, &e).score;
            let y = pse_score(&p, &g, &e).score;
            prop_assert_eq!(x.to_bits(), y.to_bits());
            prop_assert!((0.0..=1.0).contains(&x));
        }

        #[test]
        fn conv_bounded(s in 0.0f64..=1.0, p in 0.0f64..=1.0, l in 0.0f64..=1.0, lam in 0.0f64..=1.0) {
            let c = conv_score(s, p, l, lam).unwrap();
            prop_assert!((0.0..=1.0).contains(&c.conv));
            prop_assert_eq!(c.lambda1 + c.lambda2, 1.0);
        }

        #[test]
        fn srho_rank_invariant(xs in prop::collection::vec(-100.0f64..100.0, 2..20),
                               ys in prop::collection::vec(-100.0f64..100.0, 2..20)) {
            let n = xs.len().min(ys.len());
            let (xs, ys) = (&xs[..n], &ys[..n]);
            let base = srho_score(xs, ys).unwrap();
            let tx: Vec<f64> = xs.iter().map(|x| x * 3.0 + 7.0).collect();
            let ty: Vec<f64> = ys.iter().map(|y| y.powi(3)).collect();
            prop_assert_eq!(srho_score(&tx, &ty).unwrap().value.to_bits(), base.value.to_bits());
        }
    }
}
