//! Rankings, screening criteria and top-k selection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::TrueSet;
use crate::error::{Error, Result};
use crate::measures::MeasureKind;

/// Per-feature utilities from one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    method: MeasureKind,
    utilities: Vec<f64>,
}

impl ScoreTable {
    pub fn new(method: MeasureKind, utilities: Vec<f64>) -> Result<Self> {
        if let Some((j, u)) = utilities.iter().enumerate().find(|(_, u)| !(u.is_finite() && **u >= 0.0)) {
            return Err(Error::Argument(format!("{method}: utility of feature {j} is {u}")));
        }
        Ok(Self { method, utilities })
    }

    pub fn method(&self) -> MeasureKind {
        self.method
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn len(&self) -> usize {
        self.utilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utilities.is_empty()
    }
}

/// `floor(n / ln n)`.
pub fn cutoff(n: usize) -> usize {
    assert!(n >= 2, "cutoff needs n >= 2");
    let nf = n as f64;
    (nf / nf.ln()).floor() as usize
}

/// Feature indices by descending utility, ties by ascending index.
pub fn rank_features(t: &ScoreTable) -> Vec<usize> {
    let u = t.utilities();
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResult {
    pub ranking: Vec<usize>,
    pub true_features: Vec<usize>,
    /// 1-based rank of each true feature.
    pub true_ranks: Vec<usize>,
    /// Minimum model size containing every true feature.
    pub model_size: usize,
    pub cutoff: usize,
    pub success: Vec<bool>,
}

impl ScreeningResult {
    pub fn all_success(&self) -> bool {
        self.success.iter().all(|&s| s)
    }
}

/// Evaluates a table against the true set at cutoff `cutoff(n)`.
pub fn evaluate(t: &ScoreTable, true_set: &TrueSet, n: usize) -> Result<ScreeningResult> {
    evaluate_at(t, true_set, cutoff(n))
}

/// As [`evaluate`] with an explicit cutoff.
pub fn evaluate_at(t: &ScoreTable, true_set: &TrueSet, cutoff: usize) -> Result<ScreeningResult> {
    if true_set.is_empty() {
        return Err(Error::Argument("true set is empty".into()));
    }
    true_set.validate(t.len(), usize::MAX)?;
    let ranking = rank_features(t);
    let mut position = vec![0; ranking.len()];
    for (r, &j) in ranking.iter().enumerate() {
        position[j] = r + 1;
    }
    let true_features = true_set.features();
    let true_ranks: Vec<usize> = true_features.iter().map(|&j| position[j]).collect();
    let model_size = *true_ranks.iter().max().expect("nonempty");
    let success = true_ranks.iter().map(|&r| r <= cutoff).collect();
    Ok(ScreeningResult {
        ranking,
        true_features,
        true_ranks,
        model_size,
        cutoff,
        success,
    })
}

/// Success rates across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaTable {
    pub true_features: Vec<usize>,
    pub p_s: Vec<f64>,
    pub p_a: f64,
    pub replicates: usize,
}

pub fn aggregate(results: &[ScreeningResult]) -> Result<CriteriaTable> {
    let first = results
        .first()
        .ok_or_else(|| Error::Argument("no screening results to aggregate".into()))?;
    let k = first.true_features.len();
    let mut hits = vec![0usize; k];
    let mut all = 0usize;
    for r in results {
        if r.true_features != first.true_features {
            return Err(Error::Argument("screening results have different true sets".into()));
        }
        for (h, &s) in hits.iter_mut().zip(&r.success) {
            *h += s as usize;
        }
        all += r.all_success() as usize;
    }
    let m = results.len() as f64;
    Ok(CriteriaTable {
        true_features: first.true_features.clone(),
        p_s: hits.iter().map(|&h| h as f64 / m).collect(),
        p_a: all as f64 / m,
        replicates: results.len(),
    })
}

/// Labels of the `k` highest-ranked features.
pub fn top_k(t: &ScoreTable, k: usize, names: &[String]) -> Result<Vec<String>> {
    if names.len() != t.len() {
        return Err(Error::Argument(format!("{} labels for {} features", names.len(), t.len())));
    }
    Ok(rank_features(t).into_iter().take(k).map(|j| names[j].clone()).collect())
}

/// Intersection of label sets in lexicographic order.
pub fn intersect_selections(sets: &[Vec<String>]) -> Vec<String> {
    let Some((first, rest)) = sets.split_first() else {
        return Vec::new();
    };
    let mut acc: BTreeSet<&String> = first.iter().collect();
    for s in rest {
        let other: BTreeSet<&String> = s.iter().collect();
        acc = acc.intersection(&other).copied().collect();
    }
    acc.into_iter().cloned().collect()
}
