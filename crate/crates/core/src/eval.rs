//! Retrieval scoring with component-suffix identifier matching.
//!
//! Two identifiers match when the dot-separated components of one are a
//! suffix of the other's: `sqrt` matches `Nat.sqrt`, `Real.sqrt` does not.
//! True positives are counted existentially on each side, so one predicted
//! name may cover several gold names and vice versa. Scores are
//! macro-averaged over samples.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledSample;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("no samples to score")]
    EmptyCorpus,
}

fn components(id: &str) -> Option<Vec<&str>> {
    let parts: Vec<&str> = id.split('.').collect();
    (!id.is_empty() && parts.iter().all(|p| !p.is_empty())).then_some(parts)
}

fn components_match(a: &[&str], b: &[&str]) -> bool {
    if a.len() <= b.len() {
        b.ends_with(a)
    } else {
        a.ends_with(b)
    }
}

pub fn match_identifiers(a: &str, b: &str) -> Result<bool, EvalError> {
    let ca = components(a).ok_or_else(|| EvalError::InvalidIdentifier(a.to_owned()))?;
    let cb = components(b).ok_or_else(|| EvalError::InvalidIdentifier(b.to_owned()))?;
    Ok(components_match(&ca, &cb))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RetrievalScore {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RetrievalScore { precision, recall, f1 }
    }
}

fn dedup<S: AsRef<str>>(xs: &[S]) -> Vec<&str> {
    let mut seen = HashSet::new();
    xs.iter().map(AsRef::as_ref).filter(|x| seen.insert(*x)).collect()
}

/// Precision, recall and F1 of one prediction. Invalid identifiers never
/// match anything.
///
/// Empty sets: nothing predicted for empty gold scores (1, 1, 1); nothing
/// predicted for nonempty gold scores (0, 0, 0); predictions for empty gold
/// score (0, 1, 0).
pub fn score_sample<P: AsRef<str>, G: AsRef<str>>(predicted: &[P], gold: &[G]) -> RetrievalScore {
    let predicted = dedup(predicted);
    let gold = dedup(gold);
    match (predicted.is_empty(), gold.is_empty()) {
        (true, true) => return RetrievalScore { precision: 1.0, recall: 1.0, f1: 1.0 },
        (true, false) => return RetrievalScore { precision: 0.0, recall: 0.0, f1: 0.0 },
        (false, true) => return RetrievalScore { precision: 0.0, recall: 1.0, f1: 0.0 },
        _ => {}
    }
    let pc: Vec<Option<Vec<&str>>> = predicted.iter().map(|p| components(p)).collect();
    let gc: Vec<Option<Vec<&str>>> = gold.iter().map(|g| components(g)).collect();
    let hit = |a: &Option<Vec<&str>>, b: &Option<Vec<&str>>| match (a, b) {
        (Some(a), Some(b)) => components_match(a, b),
        _ => false,
    };
    let tp_pred = pc.iter().filter(|p| gc.iter().any(|g| hit(p, g))).count();
    let tp_gold = gc.iter().filter(|g| pc.iter().any(|p| hit(p, g))).count();
    RetrievalScore::from_precision_recall(
        tp_pred as f64 / predicted.len() as f64,
        tp_gold as f64 / gold.len() as f64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScore {
    pub mean: RetrievalScore,
    /// Population standard deviation per metric.
    pub std: RetrievalScore,
    pub n: usize,
}

pub fn aggregate(scores: &[RetrievalScore]) -> Result<AggregateScore, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let n = scores.len() as f64;
    let stat = |f: fn(&RetrievalScore) -> f64| {
        let mean = scores.iter().map(f).sum::<f64>() / n;
        let var = scores.iter().map(|s| (f(s) - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    let (p, sp) = stat(|s| s.precision);
    let (r, sr) = stat(|s| s.recall);
    let (f, sf) = stat(|s| s.f1);
    Ok(AggregateScore {
        mean: RetrievalScore { precision: p, recall: r, f1: f },
        std: RetrievalScore { precision: sp, recall: sr, f1: sf },
        n: scores.len(),
    })
}

pub fn score_corpus<P: AsRef<str>, G: AsRef<str>>(pairs: &[(Vec<P>, Vec<G>)]) -> Result<AggregateScore, EvalError> {
    let scores: Vec<RetrievalScore> = pairs.iter().map(|(p, g)| score_sample(p, g)).collect();
    aggregate(&scores)
}

pub fn truncate_top_k<T: Clone>(ranked: &[T], k: usize) -> Vec<T> {
    ranked[..k.min(ranked.len())].to_vec()
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub dependencies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_sample: Vec<SampleScore>,
    pub mean: RetrievalScore,
    pub std: RetrievalScore,
    pub n: usize,
    /// Gold samples with no prediction line; scored as empty predictions.
    pub missing_predictions: usize,
}

/// Scores predictions against gold labels, joined by id in gold order.
pub fn evaluate(predictions: &[Prediction], gold: &[LabeledSample]) -> Result<EvalReport, EvalError> {
    let by_id: HashMap<&str, &Prediction> = predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let empty: Vec<String> = Vec::new();
    let mut missing = 0;
    let per_sample: Vec<SampleScore> = gold
        .iter()
        .map(|g| {
            let predicted = match by_id.get(g.id.as_str()) {
                Some(p) => &p.dependencies,
                None => {
                    missing += 1;
                    &empty
                }
            };
            let s = score_sample(predicted, &g.dependencies);
            SampleScore {
                id: g.id.clone(),
                precision: s.precision,
                recall: s.recall,
                f1: s.f1,
            }
        })
        .collect();
    let scores: Vec<RetrievalScore> = per_sample
        .iter()
        .map(|s| RetrievalScore { precision: s.precision, recall: s.recall, f1: s.f1 })
        .collect();
    let agg = aggregate(&scores)?;
    Ok(EvalReport {
        per_sample,
        mean: agg.mean,
        std: agg.std,
        n: agg.n,
        missing_predictions: missing,
    })
}
