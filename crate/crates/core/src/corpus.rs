//! Evaluation corpora (JSONL) and run reports (JSON).

use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::label::{GoldLabel, PredictedLabel};
use crate::metrics::{srho_score, ConvScoreBreakdown, ReasonScale};
use crate::semantics::LeMode;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub nl_premises: Option<Vec<String>>,
    pub fol_premises: Vec<String>,
    pub nl_query: Option<String>,
    /// One or more candidate conversions of the query; several candidates
    /// are scored best-of-k.
    #[serde(with = "one_or_many")]
    pub fol_query: Vec<String>,
    pub gold_fol_query: Option<String>,
    pub gold_label: GoldLabel,
}

mod one_or_many {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }

    pub fn serialize<S: Serializer>(v: &[String], s: S) -> Result<S::Ok, S::Error> {
        if v.len() == 1 {
            v[0].serialize(s)
        } else {
            v.serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
        Ok(match OneOrMany::deserialize(d)? {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    #[default]
    Jsonl,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error("report is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report aggregates do not match its records: {0}")]
    Inconsistent(String),
}

/// A skipped corpus line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadedCorpus {
    pub records: Vec<EvalRecord>,
    pub skipped: Vec<LineDiagnostic>,
}

/// FOLIO field names accepted in place of the native ones.
const FIELD_ALIASES: &[(&str, &str)] = &[
    ("id", "example_id"),
    ("nl_premises", "premises"),
    ("fol_premises", "premises-FOL"),
    ("nl_query", "conclusion"),
    ("fol_query", "conclusion-FOL"),
    ("gold_label", "label"),
];

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Option<&'a Value> {
    obj.get(name).filter(|v| !v.is_null()).or_else(|| {
        FIELD_ALIASES
            .iter()
            .find(|(native, _)| *native == name)
            .and_then(|(_, alias)| obj.get(*alias))
            .filter(|v| !v.is_null())
    })
}

/// A string is split into its nonblank lines; a list must hold strings.
fn text_list(v: &Value, name: &str) -> Result<Vec<String>, String> {
    match v {
        Value::String(s) => Ok(s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect()),
        Value::Array(items) => items
            .iter()
            .map(|x| {
                x.as_str()
                    .map(String::from)
                    .ok_or_else(|| format!("field '{name}' must contain only strings"))
            })
            .collect(),
        _ => Err(format!("field '{name}' must be a string or a list of strings")),
    }
}

fn parse_record(line: &str, line_no: usize) -> Result<EvalRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let Value::Object(obj) = value else {
        return Err("expected a JSON object".into());
    };
    let missing = |name: &str| format!("missing required field '{name}'");

    let id = match field(&obj, "id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err("field 'id' must be a string or number".into()),
        None => format!("line-{line_no}"),
    };
    let fol_premises = text_list(
        field(&obj, "fol_premises").ok_or_else(|| missing("fol_premises"))?,
        "fol_premises",
    )?;
    if fol_premises.is_empty() {
        return Err("field 'fol_premises' is empty".into());
    }
    let fol_query = match field(&obj, "fol_query").ok_or_else(|| missing("fol_query"))? {
        Value::String(s) => vec![s.trim().to_string()],
        v => text_list(v, "fol_query")?,
    };
    if fol_query.is_empty() {
        return Err("field 'fol_query' is empty".into());
    }
    let gold_label = match field(&obj, "gold_label").ok_or_else(|| missing("gold_label"))? {
        Value::String(s) => s.parse::<GoldLabel>().map_err(|e| format!("field 'gold_label': {e}"))?,
        Value::Bool(b) => {
            if *b {
                GoldLabel::True
            } else {
                GoldLabel::False
            }
        }
        _ => return Err("field 'gold_label' must be a string".into()),
    };
    let nl_premises = field(&obj, "nl_premises")
        .map(|v| text_list(v, "nl_premises"))
        .transpose()?;
    let opt_text = |name: &str| -> Result<Option<String>, String> {
        match field(&obj, name) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(format!("field '{name}' must be a string")),
        }
    };
    let nl_query = opt_text("nl_query")?;
    let gold_fol_query = match opt_text("gold_fol_query")? {
        Some(g) => Some(g),
        // FOLIO rows carry one conclusion FOL; it serves as both gold and
        // prediction
        None if !obj.contains_key("fol_query") && obj.contains_key("conclusion-FOL") => {
            Some(fol_query[0].clone())
        }
        None => None,
    };
    Ok(EvalRecord {
        id,
        nl_premises,
        fol_premises,
        nl_query,
        fol_query,
        gold_fol_query,
        gold_label,
    })
}

/// Records in file order; malformed lines are skipped with a diagnostic.
/// Blank lines are ignored.
pub fn parse_corpus(text: &str) -> LoadedCorpus {
    let mut out = LoadedCorpus::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(line, i + 1) {
            Ok(r) => out.records.push(r),
            Err(message) => out.skipped.push(LineDiagnostic {
                line: i + 1,
                message,
            }),
        }
    }
    out
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadedCorpus, CorpusError> {
    let CorpusFormat::Jsonl = format;
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_corpus(&text))
}

/// One JSON object per line, in the native field names.
pub fn corpus_to_jsonl(records: &[EvalRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Shuffles with the seed and cuts at `train_fraction`; each side keeps
/// file order.
pub fn split(records: &[EvalRecord], train_fraction: f64, seed: u64) -> (Vec<EvalRecord>, Vec<EvalRecord>) {
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((records.len() as f64) * train_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut train: Vec<usize> = idx[..cut].to_vec();
    let mut test: Vec<usize> = idx[cut..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (
        train.into_iter().map(|i| records[i].clone()).collect(),
        test.into_iter().map(|i| records[i].clone()).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lambda1: f64,
    pub closed_world: bool,
    pub seed: u64,
    pub node_budget: usize,
    pub le_exhaustive_limit: usize,
    pub le_samples: u64,
    pub reason_scale: ReasonScale,
    pub format: CorpusFormat,
    pub corpus: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordResult {
    pub id: String,
    pub gold_label: GoldLabel,
    pub predicted_label: PredictedLabel,
    /// Index of the scored candidate in `fol_query`.
    pub candidate: usize,
    pub candidates: usize,
    pub fol_query: String,
    pub swf: f64,
    pub swf_failed: Vec<String>,
    pub pse: Option<f64>,
    pub le: Option<f64>,
    pub le_mode: Option<LeMode>,
    pub scores: Option<ConvScoreBreakdown>,
    pub reason: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub records: usize,
    pub mean_swf: f64,
    /// Means over records that carry a gold FOL query.
    pub scored_records: usize,
    pub mean_pse: Option<f64>,
    pub mean_le: Option<f64>,
    pub mean_conv: Option<f64>,
    pub mean_reason: f64,
    pub accuracy: f64,
    /// Rank correlation of (conv, reason) over scored records.
    pub srho: Option<f64>,
    pub srho_degenerate: bool,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl Aggregates {
    /// Sequential fold in record order, so the result never depends on how
    /// records were evaluated.
    pub fn compute(records: &[RecordResult]) -> Option<Aggregates> {
        if records.is_empty() {
            return None;
        }
        let n = records.len();
        let scored: Vec<&ConvScoreBreakdown> = records.iter().filter_map(|r| r.scores.as_ref()).collect();
        let correct = records
            .iter()
            .filter(|r| r.predicted_label.matches(r.gold_label))
            .count();
        let conv: Vec<f64> = scored.iter().map(|s| s.conv).collect();
        let reason: Vec<f64> = records
            .iter()
            .filter(|r| r.scores.is_some())
            .map(|r| r.reason)
            .collect();
        let rho = srho_score(&conv, &reason).ok();
        Some(Aggregates {
            records: n,
            mean_swf: mean(records.iter().map(|r| r.swf)).unwrap_or(0.0),
            scored_records: scored.len(),
            mean_pse: mean(scored.iter().map(|s| s.pse)),
            mean_le: mean(scored.iter().map(|s| s.le)),
            mean_conv: mean(conv.iter().copied()),
            mean_reason: mean(records.iter().map(|r| r.reason)).unwrap_or(0.0),
            accuracy: correct as f64 / n as f64,
            srho: rho.map(|r| r.value),
            srho_degenerate: rho.is_some_and(|r| r.degenerate),
        })
    }
}

/// Counts with rows = predicted label (true, false, uncertain,
/// compile_error) and columns = gold label (true, false, uncertain).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub rows: Vec<PredictedLabel>,
    pub columns: Vec<GoldLabel>,
    pub counts: Vec<Vec<usize>>,
}

impl Confusion {
    pub fn compute(records: &[RecordResult]) -> Confusion {
        let mut counts = vec![vec![0; GoldLabel::ALL.len()]; PredictedLabel::ALL.len()];
        for r in records {
            let row = PredictedLabel::ALL.iter().position(|&p| p == r.predicted_label).unwrap();
            let col = GoldLabel::ALL.iter().position(|&g| g == r.gold_label).unwrap();
            counts[row][col] += 1;
        }
        Confusion {
            rows: PredictedLabel::ALL.to_vec(),
            columns: GoldLabel::ALL.to_vec(),
            counts,
        }
    }

    pub fn count(&self, predicted: PredictedLabel, gold: GoldLabel) -> usize {
        let row = self.rows.iter().position(|&p| p == predicted).unwrap();
        let col = self.columns.iter().position(|&g| g == gold).unwrap();
        self.counts[row][col]
    }

    /// Records per gold label (column sums).
    pub fn gold_totals(&self) -> Vec<usize> {
        (0..self.columns.len())
            .map(|c| self.counts.iter().map(|row| row[c]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub records: Vec<RecordResult>,
    pub aggregates: Option<Aggregates>,
    pub confusion: Confusion,
    pub skipped_lines: Vec<LineDiagnostic>,
}

impl RunReport {
    pub fn new(config: RunConfig, records: Vec<RecordResult>, skipped_lines: Vec<LineDiagnostic>) -> Self {
        RunReport {
            aggregates: Aggregates::compute(&records),
            confusion: Confusion::compute(&records),
            config,
            records,
            skipped_lines,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Parses a report and checks that its aggregates and confusion matrix
    /// are exactly what its records produce.
    pub fn from_json(text: &str) -> Result<RunReport, CorpusError> {
        let report: RunReport = serde_json::from_str(text)?;
        let aggregates = Aggregates::compute(&report.records);
        if aggregates != report.aggregates {
            return Err(CorpusError::Inconsistent(format!(
                "stored {:?}, recomputed {:?}",
                report.aggregates, aggregates
            )));
        }
        if Confusion::compute(&report.records) != report.confusion {
            return Err(CorpusError::Inconsistent("confusion matrix".into()));
        }
        Ok(report)
    }
}

pub fn write_report(r: &RunReport, path: &Path) -> Result<(), CorpusError> {
    fs::write(path, r.to_json()).map_err(|source| CorpusError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_report(path: &Path) -> Result<RunReport, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    RunReport::from_json(&text)
}
