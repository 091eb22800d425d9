//! Corpus evaluation: per-record conversion and reasoning scores, then
//! aggregates in record order.

use std::fmt::Write;

use crate::corpus::{EvalRecord, LineDiagnostic, RecordResult, RunConfig, RunReport};
use crate::engine::{entail_text, EngineConfig};
use crate::label::PredictedLabel;
use crate::metrics::{conv_score, pse_score_text, reason_score, Embedder, ReasonScale, TrigramEmbedder};
use crate::par::Execution;
use crate::semantics::{le_score_text, LeConfig, DEFAULT_NODE_BUDGET};
use crate::wellformed::check_swf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub lambda1: f64,
    pub closed_world: bool,
    pub seed: u64,
    pub node_budget: usize,
    pub le_exhaustive_limit: usize,
    pub le_samples: u64,
    pub reason_scale: ReasonScale,
    pub execution: Execution,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let le = LeConfig::default();
        EvalConfig {
            lambda1: 0.5,
            closed_world: false,
            seed: le.seed,
            node_budget: DEFAULT_NODE_BUDGET,
            le_exhaustive_limit: le.exhaustive_limit,
            le_samples: le.samples,
            reason_scale: ReasonScale::default(),
            execution: Execution::default(),
        }
    }
}

impl EvalConfig {
    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            closed_world: self.closed_world,
            node_budget: self.node_budget,
        }
    }

    /// LE runs sequentially inside a record; records are the parallel unit.
    pub fn le(&self) -> LeConfig {
        LeConfig {
            seed: self.seed,
            exhaustive_limit: self.le_exhaustive_limit,
            samples: self.le_samples,
            node_budget: self.node_budget,
            execution: Execution::Sequential,
        }
    }

    pub fn run_config(&self, corpus: Option<String>) -> RunConfig {
        RunConfig {
            lambda1: self.lambda1,
            closed_world: self.closed_world,
            seed: self.seed,
            node_budget: self.node_budget,
            le_exhaustive_limit: self.le_exhaustive_limit,
            le_samples: self.le_samples,
            reason_scale: self.reason_scale,
            format: Default::default(),
            corpus,
        }
    }
}

fn score_candidate(
    rec: &EvalRecord,
    index: usize,
    cfg: &EvalConfig,
    emb: &dyn Embedder,
) -> RecordResult {
    let cand = &rec.fol_query[index];
    let swf = check_swf(cand);
    let mut notes = Vec::new();
    let (pse, le, le_mode, scores) = match &rec.gold_fol_query {
        Some(gold) => {
            let p = pse_score_text(gold, cand, emb);
            let l = le_score_text(gold, cand, &cfg.le());
            notes.extend(p.note.iter().map(|n| format!("pse: {n}")));
            notes.extend(l.note.iter().map(|n| format!("le: {n}")));
            let c = conv_score(swf.score, p.score, l.score, cfg.lambda1).ok();
            (Some(p.score), Some(l.score), Some(l.mode), c)
        }
        None => (None, None, None, None),
    };
    let predicted = match entail_text(&rec.fol_premises, cand, &cfg.engine()) {
        Ok(v) => {
            if let crate::engine::Verdict::CompileError { diagnostics } = &v {
                notes.extend(
                    diagnostics
                        .iter()
                        .map(|d| format!("{}: {}", d.source, d.diagnostic)),
                );
            }
            v.label()
        }
        Err(e) => {
            notes.push(format!("engine: {e}"));
            PredictedLabel::CompileError
        }
    };
    RecordResult {
        id: rec.id.clone(),
        gold_label: rec.gold_label,
        predicted_label: predicted,
        candidate: index,
        candidates: rec.fol_query.len(),
        fol_query: cand.clone(),
        swf: swf.score,
        swf_failed: swf.failed().map(|c| c.id.as_str().to_string()).collect(),
        pse,
        le,
        le_mode,
        scores,
        reason: reason_score(predicted, rec.gold_label, &cfg.reason_scale),
        notes,
    }
}

/// Scores every candidate and keeps the best: highest reasoning credit,
/// then highest conversion score, then the earliest candidate.
pub fn evaluate_record(rec: &EvalRecord, cfg: &EvalConfig, emb: &dyn Embedder) -> RecordResult {
    let mut best: Option<RecordResult> = None;
    for i in 0..rec.fol_query.len() {
        let r = score_candidate(rec, i, cfg, emb);
        let conv = |x: &RecordResult| x.scores.map_or(-1.0, |s| s.conv);
        let better = match &best {
            None => true,
            Some(b) => r.reason > b.reason || (r.reason == b.reason && conv(&r) > conv(b)),
        };
        if better {
            best = Some(r);
        }
    }
    best.expect("records have at least one candidate")
}

pub fn evaluate(records: &[EvalRecord], cfg: &EvalConfig) -> Vec<RecordResult> {
    let emb = TrigramEmbedder::default();
    cfg.execution.map(records, |r| evaluate_record(r, cfg, &emb))
}

pub fn run(
    records: &[EvalRecord],
    skipped: Vec<LineDiagnostic>,
    cfg: &EvalConfig,
    corpus: Option<String>,
) -> RunReport {
    RunReport::new(cfg.run_config(corpus), evaluate(records, cfg), skipped)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// Summary table with conversion score, accuracy, reasoning score and SRho,
/// the component means and the confusion matrix.
pub fn summary_table(r: &RunReport) -> String {
    let mut out = String::new();
    let Some(a) = &r.aggregates else {
        let _ = writeln!(out, "no records evaluated ({} lines skipped)", r.skipped_lines.len());
        return out;
    };
    let _ = writeln!(
        out,
        "{:<10} {:>10} {:>10} {:>12} {:>10}",
        "Records", "Conv-Score", "Accuracy", "Reason-Score", "SRho-Score"
    );
    let _ = writeln!(
        out,
        "{:<10} {:>10} {:>9.2}% {:>12.4} {:>10}",
        a.records,
        opt(a.mean_conv),
        a.accuracy * 100.0,
        a.mean_reason,
        match (a.srho, a.srho_degenerate) {
            (Some(v), true) => format!("{v:.4}*"),
            (x, _) => opt(x),
        }
    );
    let _ = writeln!(
        out,
        "SWF {:.4}  PSE {}  LE {}  (scored {} of {}; lambda1 {})",
        a.mean_swf,
        opt(a.mean_pse),
        opt(a.mean_le),
        a.scored_records,
        a.records,
        r.config.lambda1
    );
    let _ = writeln!(out, "Confusion (rows predicted, columns gold):");
    let _ = write!(out, "{:<14}", "");
    for g in &r.confusion.columns {
        let _ = write!(out, "{:>10}", g.as_str());
    }
    out.push('\n');
    for (p, row) in r.confusion.rows.iter().zip(&r.confusion.counts) {
        let _ = write!(out, "{:<14}", p.as_str());
        for c in row {
            let _ = write!(out, "{c:>10}");
        }
        out.push('\n');
    }
    if a.srho_degenerate {
        let _ = writeln!(out, "* SRho undefined: one of the score columns is constant");
    }
    if !r.skipped_lines.is_empty() {
        let _ = writeln!(out, "{} corpus lines skipped", r.skipped_lines.len());
    }
    out
}
