//! Classification metrics and seeded k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::{Model, TrainSettings};

/// z-value of a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Confusion counts for the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn new(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn from_predictions(predicted: &[usize], actual: &[usize], positive: usize) -> Self {
        let mut c = Self::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p == positive, a == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 4] = ["precision", "recall", "f1", "accuracy"];

    pub fn values(&self) -> [f64; 4] {
        [self.precision, self.recall, self.f1, self.accuracy]
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, F1 and accuracy. Any 0/0 evaluates to 0.
pub fn metrics(c: &ConfusionCounts) -> Result<Metrics> {
    if c.total() == 0 {
        return Err(Error::EmptyDataset);
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(Metrics { precision, recall, f1, accuracy: ratio(c.tp + c.tn, c.total()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Half-width of the 95% confidence interval.
    pub ci95: f64,
}

impl Summary {
    /// Mean and normal-approximation half-width `1.96 * sd / sqrt(len)`
    /// using the sample standard deviation.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Self { mean, ci95: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, ci95: Z_95 * var.sqrt() / n.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
    pub accuracy: Summary,
    pub per_fold: Vec<Metrics>,
    pub per_fold_counts: Vec<ConfusionCounts>,
}

impl EvalReport {
    pub fn summaries(&self) -> [(&'static str, Summary); 4] {
        [("precision", self.precision), ("recall", self.recall), ("f1", self.f1), ("accuracy", self.accuracy)]
    }

    /// `metric,mean,ci95` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,mean,ci95\n");
        for (name, s) in self.summaries() {
            out += &format!("{name},{:.4},{:.4}\n", s.mean, s.ci95);
        }
        out
    }

    /// One `metric  mean±ci` line per metric.
    pub fn to_table(&self) -> String {
        let mut out = format!("# {} folds x {} repeats, seed {}\n", self.folds, self.repeats, self.seed);
        out += &format!("{:<10} {}\n", "metric", "TM");
        for (name, s) in self.summaries() {
            out += &format!("{name:<10} {:.2}±{:.2}\n", s.mean, s.ci95);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Train on `train`, score on `test`.
pub fn holdout(
    train: &LabeledDataset,
    test: &LabeledDataset,
    settings: &TrainSettings,
    seed: u64,
) -> Result<(Metrics, ConfusionCounts)> {
    let model = Model::train(train, settings, seed, None)?;
    score(&model, test, settings.positive_class)
}

pub fn score(model: &Model, test: &LabeledDataset, positive: usize) -> Result<(Metrics, ConfusionCounts)> {
    let predicted = model.predict_rows(&test.rows)?;
    let counts = ConfusionCounts::from_predictions(&predicted, &test.labels, positive);
    Ok((metrics(&counts)?, counts))
}

/// SplitMix64 finalizer; derives independent per-fold seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded fold assignment: returns `k` disjoint test-index lists covering
/// `0..len`.
pub fn assign_folds(len: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    folds
}

/// Repeated k-fold cross-validation. A fresh binarizer and machine are fit
/// on each training split. Fold seeds derive from `seed`, so serial and
/// parallel runs give identical reports.
pub fn cross_validate(
    dataset: &LabeledDataset,
    settings: &TrainSettings,
    k: usize,
    repeats: usize,
    seed: u64,
    parallel: bool,
) -> Result<EvalReport> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if repeats < 1 {
        return Err(Error::Config("repeats must be ≥ 1".into()));
    }
    if k > dataset.len() {
        return Err(Error::Config(format!("{k} folds exceed the {} samples", dataset.len())));
    }

    let mut jobs = Vec::with_capacity(k * repeats);
    for r in 0..repeats {
        let folds = assign_folds(dataset.len(), k, derive_seed(seed, r as u64));
        for (f, test_idx) in folds.into_iter().enumerate() {
            let job = (r * k + f) as u64;
            jobs.push((job, test_idx));
        }
    }

    let run = |(job, test_idx): &(u64, Vec<usize>)| -> Result<(Metrics, ConfusionCounts)> {
        let mut in_test = vec![false; dataset.len()];
        for &i in test_idx {
            in_test[i] = true;
        }
        let train_idx: Vec<usize> = (0..dataset.len()).filter(|&i| !in_test[i]).collect();
        let train = dataset.subset(&train_idx);
        let test = dataset.subset(test_idx);
        let model =
            Model::train_with_vocabulary(&train, &dataset.rows, settings, derive_seed(seed ^ 0x5EED, *job), None)?;
        score(&model, &test, settings.positive_class)
    };

    let results: Vec<Result<(Metrics, ConfusionCounts)>> = if parallel {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            jobs.par_iter().map(run).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            jobs.iter().map(run).collect()
        }
    } else {
        jobs.iter().map(run).collect()
    };

    let mut per_fold = Vec::with_capacity(results.len());
    let mut per_fold_counts = Vec::with_capacity(results.len());
    for r in results {
        let (m, c) = r?;
        per_fold.push(m);
        per_fold_counts.push(c);
    }
    let column = |f: fn(&Metrics) -> f64| Summary::of(&per_fold.iter().map(f).collect::<Vec<_>>());
    Ok(EvalReport {
        folds: k,
        repeats,
        seed,
        precision: column(|m| m.precision),
        recall: column(|m| m.recall),
        f1: column(|m| m.f1),
        accuracy: column(|m| m.accuracy),
        per_fold,
        per_fold_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn hand_computed_confusion() {
        let m = metrics(&ConfusionCounts::new(2, 2, 5, 1)).unwrap();
        assert!(close(m.precision, 0.5));
        assert!(close(m.recall, 2.0 / 3.0));
        // 2 * 0.5 * 2/3 / (0.5 + 2/3) = 4/7
        assert!(close(m.f1, 4.0 / 7.0));
        assert!(close(m.accuracy, 0.7));
    }

    #[test]
    fn degenerate_counts() {
        let m = metrics(&ConfusionCounts::new(0, 0, 10, 0)).unwrap();
        assert_eq!(m.values(), [0.0, 0.0, 0.0, 1.0]);
        let m = metrics(&ConfusionCounts::new(5, 0, 0, 0)).unwrap();
        assert_eq!(m.values(), [1.0; 4]);
        assert!(matches!(metrics(&ConfusionCounts::default()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn counts_from_predictions() {
        let c = ConfusionCounts::from_predictions(&[1, 1, 0, 0, 1], &[1, 0, 0, 1, 1], 1);
        assert_eq!(c, ConfusionCounts::new(2, 1, 1, 1));
    }

    #[test]
    fn summary_interval() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert!(close(s.mean, 2.5));
        // sd = sqrt(5/3)
        assert!(close(s.ci95, 1.96 * (5.0f64 / 3.0).sqrt() / 2.0));
        assert_eq!(Summary::of(&[0.3, 0.3]).ci95, 0.0);
    }

    #[test]
    fn two_folds_of_one() {
        let folds = assign_folds(2, 2, 9);
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 1]);
    }

    proptest! {
        #[test]
        fn folds_partition_exactly(len in 2usize..200, k in 2usize..40, seed in any::<u64>()) {
            prop_assume!(k <= len);
            let folds = assign_folds(len, k, seed);
            let mut seen = vec![0u8; len];
            for f in &folds {
                prop_assert!(!f.is_empty());
                for &i in f { seen[i] += 1; }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }

        #[test]
        fn metrics_bounded(tp in 0usize..50, fp in 0usize..50, tn in 0usize..50, fn_ in 0usize..50) {
            let c = ConfusionCounts::new(tp, fp, tn, fn_);
            prop_assume!(c.total() > 0);
            let m = metrics(&c).unwrap();
            for v in m.values() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(m.f1 <= 2.0 * m.precision.min(m.recall) + 1e-12);
        }
    }
}
