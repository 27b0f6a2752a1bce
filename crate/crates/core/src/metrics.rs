//! Evaluation metrics for weighted-vs-unweighted comparisons: confusion
//! counts, threshold metrics (including F1 and the P4 harmonic mean of
//! sensitivity, specificity, PPV, and NPV), rank-based AUC, Brier and
//! balanced Brier scores, the ranked probability score for ordinal
//! predictions, mean and weak calibration, and adjacent-category binary
//! collapses.
//!
//! Metrics with a zero denominator or an otherwise undefined value are
//! reported as explicit `None` markers (JSON `null`), never as silent NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{logit, sigmoid};

/// Binary confusion counts at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// All eight threshold metrics derived from binary confusion counts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub accuracy: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub p4: Option<f64>,
}

/// Weak-calibration (logistic recalibration) fit. `degenerate` marks a
/// constant-predictor design where the slope is unidentifiable;
/// `separation` marks quasi-complete separation (coefficients ran away).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeakCalibration {
    pub intercept: Option<f64>,
    pub slope: Option<f64>,
    pub degenerate: bool,
    pub separation: bool,
}

/// Mean calibration: average predicted probability per class against the
/// observed class frequencies, summarized as the MSE across classes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanCalibration {
    pub mse: f64,
    pub predicted: Vec<f64>,
    pub observed: Vec<f64>,
}

/// Named metric values (Table-style keys, lower snake case) plus the
/// confusion counts and calibration fits they derive from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auc: Option<f64>,
    pub accuracy: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub brier: Option<f64>,
    pub balanced_brier: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub f1: Option<f64>,
    pub p4: Option<f64>,
    pub rps: Option<f64>,
    pub mean_calibration_mse: Option<f64>,
    pub calibration_intercept: Option<f64>,
    pub calibration_slope: Option<f64>,
    pub confusion: Option<ConfusionCounts>,
    pub multiclass_confusion: Option<Vec<Vec<usize>>>,
    /// Binary-collapse scheme for reports derived from an ordinal model,
    /// e.g. "1_vs_23".
    pub collapse: Option<String>,
    pub n: usize,
}

impl MetricsReport {
    fn empty(n: usize) -> Self {
        MetricsReport {
            auc: None,
            accuracy: None,
            balanced_accuracy: None,
            brier: None,
            balanced_brier: None,
            sensitivity: None,
            specificity: None,
            ppv: None,
            npv: None,
            f1: None,
            p4: None,
            rps: None,
            mean_calibration_mse: None,
            calibration_intercept: None,
            calibration_slope: None,
            confusion: None,
            multiclass_confusion: None,
            collapse: None,
            n,
        }
    }

    /// (key, value, lower_is_better) listing for table rendering.
    pub fn named_values(&self) -> Vec<(&'static str, Option<f64>, bool)> {
        vec![
            ("auc", self.auc, false),
            ("accuracy", self.accuracy, false),
            ("balanced_accuracy", self.balanced_accuracy, false),
            ("brier", self.brier, true),
            ("balanced_brier", self.balanced_brier, true),
            ("sensitivity", self.sensitivity, false),
            ("specificity", self.specificity, false),
            ("ppv", self.ppv, false),
            ("npv", self.npv, false),
            ("f1", self.f1, false),
            ("p4", self.p4, false),
            ("rps", self.rps, true),
            ("mean_calibration_mse", self.mean_calibration_mse, true),
            ("calibration_intercept", self.calibration_intercept, false),
            ("calibration_slope", self.calibration_slope, false),
        ]
    }
}

/// Binary confusion counts from predicted and true 0/1 labels.
pub fn confusion(pred_labels: &[u32], true_labels: &[u32]) -> Result<ConfusionCounts> {
    check_lengths(pred_labels.len(), true_labels.len())?;
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&p, &t) in pred_labels.iter().zip(true_labels) {
        match (p != 0, t != 0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// K x K confusion matrix, rows = true category, columns = predicted,
/// categories 1-based.
pub fn confusion_multiclass(
    pred_labels: &[u32],
    true_labels: &[u32],
    k: usize,
) -> Result<Vec<Vec<usize>>> {
    check_lengths(pred_labels.len(), true_labels.len())?;
    let mut m = vec![vec![0usize; k]; k];
    for (&p, &t) in pred_labels.iter().zip(true_labels) {
        let (pi, ti) = (p as usize, t as usize);
        if pi < 1 || pi > k || ti < 1 || ti > k {
            return Err(Error::InvalidData(format!(
                "label out of range 1..={k}: pred {p}, true {t}"
            )));
        }
        m[ti - 1][pi - 1] += 1;
    }
    Ok(m)
}

/// Sensitivity, specificity, PPV, NPV, accuracy, balanced accuracy, F1, and
/// P4 from confusion counts. Zero denominators yield `None`.
pub fn threshold_metrics(c: &ConfusionCounts) -> ThresholdMetrics {
    let ratio = |num: usize, den: usize| -> Option<f64> {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let ppv = ratio(c.tp, c.tp + c.fp);
    let npv = ratio(c.tn, c.tn + c.fn_);
    let accuracy = ratio(c.tp + c.tn, c.total());
    let balanced_accuracy = match (sensitivity, specificity) {
        (Some(se), Some(sp)) => Some(0.5 * (se + sp)),
        _ => None,
    };
    let f1 = harmonic_mean(&[sensitivity, ppv]);
    let p4 = harmonic_mean(&[sensitivity, specificity, ppv, npv]);
    ThresholdMetrics {
        sensitivity,
        specificity,
        ppv,
        npv,
        accuracy,
        balanced_accuracy,
        f1,
        p4,
    }
}

/// Harmonic mean of the given rates; undefined if any is missing or zero.
fn harmonic_mean(parts: &[Option<f64>]) -> Option<f64> {
    let mut sum = 0.0;
    for p in parts {
        match p {
            Some(v) if *v > 0.0 => sum += 1.0 / v,
            _ => return None,
        }
    }
    Some(parts.len() as f64 / sum)
}

/// Rank-based (Mann-Whitney) AUC with ties counted half. `None` when only
/// one class is present.
pub fn auc(scores: &[f64], true_labels: &[u32]) -> Result<Option<f64>> {
    check_lengths(scores.len(), true_labels.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidData("NaN score".into()));
    }
    let n_pos = true_labels.iter().filter(|&&t| t != 0).count();
    let n_neg = true_labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Ok(None);
    }
    // average ranks with ties shared
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("non-NaN"));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    let rank_sum_pos: f64 = ranks
        .iter()
        .zip(true_labels)
        .filter(|(_, &t)| t != 0)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(Some(u / (n_pos as f64 * n_neg as f64)))
}

/// Mean squared error between predicted probability of class 1 and the 0/1
/// outcome.
pub fn brier(probs: &[f64], true_labels: &[u32]) -> Result<f64> {
    check_lengths(probs.len(), true_labels.len())?;
    check_probs(probs)?;
    let sum: f64 = probs
        .iter()
        .zip(true_labels)
        .map(|(&p, &t)| {
            let o = f64::from(t.min(1));
            (p - o) * (p - o)
        })
        .sum();
    Ok(sum / probs.len() as f64)
}

/// Equal-weight average of the within-class Brier scores; `None` when a
/// class is absent.
pub fn balanced_brier(probs: &[f64], true_labels: &[u32]) -> Result<Option<f64>> {
    check_lengths(probs.len(), true_labels.len())?;
    check_probs(probs)?;
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (&p, &t) in probs.iter().zip(true_labels) {
        let cls = usize::from(t != 0);
        let o = cls as f64;
        sums[cls] += (p - o) * (p - o);
        counts[cls] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Ok(None);
    }
    Ok(Some(
        0.5 * (sums[0] / counts[0] as f64 + sums[1] / counts[1] as f64),
    ))
}

/// Ranked probability score: per observation, the sum over the first K-1
/// categories of squared differences between cumulative predicted mass and
/// the cumulative one-hot truth. Unnormalized by default; `normalized`
/// divides by K-1. Returns (mean, per-observation values).
pub fn rps(
    predictive: &[Vec<f64>],
    true_labels: &[u32],
    normalized: bool,
) -> Result<(f64, Vec<f64>)> {
    check_lengths(predictive.len(), true_labels.len())?;
    if predictive.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = predictive[0].len();
    if k < 2 {
        return Err(Error::InvalidData(
            "ordinal predictive needs at least 2 categories".into(),
        ));
    }
    let mut per_obs = Vec::with_capacity(predictive.len());
    for (row, &t) in predictive.iter().zip(true_labels) {
        if row.len() != k {
            return Err(Error::DimensionMismatch("ragged predictive rows".into()));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidData(format!(
                "predictive row sums to {sum}, expected 1"
            )));
        }
        let ti = t as usize;
        if ti < 1 || ti > k {
            return Err(Error::InvalidData(format!(
                "label {t} out of range 1..={k}"
            )));
        }
        let mut cum_pred = 0.0;
        let mut score = 0.0;
        for (cat, &p) in row.iter().take(k - 1).enumerate() {
            cum_pred += p;
            let cum_truth = if ti <= cat + 1 { 1.0 } else { 0.0 };
            score += (cum_pred - cum_truth) * (cum_pred - cum_truth);
        }
        if normalized {
            score /= (k - 1) as f64;
        }
        per_obs.push(score);
    }
    let mean = per_obs.iter().sum::<f64>() / per_obs.len() as f64;
    Ok((mean, per_obs))
}

/// Mean calibration for a binary model: predicted class proportions are the
/// mean predicted probability per class slot, observed are empirical
/// frequencies; MSE across the two class slots (equal to the squared gap on
/// class 1).
pub fn mean_calibration(probs: &[f64], true_labels: &[u32]) -> Result<MeanCalibration> {
    check_lengths(probs.len(), true_labels.len())?;
    check_probs(probs)?;
    let n = probs.len() as f64;
    let pred1 = probs.iter().sum::<f64>() / n;
    let obs1 = true_labels.iter().filter(|&&t| t != 0).count() as f64 / n;
    mean_calibration_from(vec![1.0 - pred1, pred1], vec![1.0 - obs1, obs1])
}

/// Mean calibration for an ordinal model from per-observation predictive
/// mass vectors.
pub fn mean_calibration_ordinal(
    predictive: &[Vec<f64>],
    true_labels: &[u32],
) -> Result<MeanCalibration> {
    check_lengths(predictive.len(), true_labels.len())?;
    if predictive.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = predictive[0].len();
    let n = predictive.len() as f64;
    let mut predicted = vec![0.0; k];
    let mut observed = vec![0.0; k];
    for (row, &t) in predictive.iter().zip(true_labels) {
        for (acc, &p) in predicted.iter_mut().zip(row) {
            *acc += p / n;
        }
        let ti = t as usize;
        if ti < 1 || ti > k {
            return Err(Error::InvalidData(format!(
                "label {t} out of range 1..={k}"
            )));
        }
        observed[ti - 1] += 1.0 / n;
    }
    mean_calibration_from(predicted, observed)
}

fn mean_calibration_from(predicted: Vec<f64>, observed: Vec<f64>) -> Result<MeanCalibration> {
    let k = predicted.len() as f64;
    let mse = predicted
        .iter()
        .zip(&observed)
        .map(|(p, o)| (p - o) * (p - o))
        .sum::<f64>()
        / k;
    Ok(MeanCalibration {
        mse,
        predicted,
        observed,
    })
}

const CALIBRATION_CLAMP: f64 = 1e-6;

/// Weak calibration: maximum-likelihood logistic regression of the outcome
/// on logit(prob) (probabilities clamped to [1e-6, 1-1e-6]), fitted by
/// Newton-Raphson. Perfect calibration gives intercept 0, slope 1.
pub fn weak_calibration(probs: &[f64], true_labels: &[u32]) -> Result<WeakCalibration> {
    check_lengths(probs.len(), true_labels.len())?;
    check_probs(probs)?;
    let n_pos = true_labels.iter().filter(|&&t| t != 0).count();
    if n_pos == 0 || n_pos == true_labels.len() {
        return Err(Error::InvalidData(
            "weak calibration needs both classes present".into(),
        ));
    }
    let x: Vec<f64> = probs
        .iter()
        .map(|&p| logit(p.clamp(CALIBRATION_CLAMP, 1.0 - CALIBRATION_CLAMP)))
        .collect();

    // Constant predictor: slope unidentifiable.
    let x0 = x[0];
    if x.iter().all(|&v| v == x0) {
        return Ok(WeakCalibration {
            intercept: None,
            slope: None,
            degenerate: true,
            separation: false,
        });
    }

    let mut intercept = 0.0;
    let mut slope = 1.0;
    let max_iter = 100;
    let mut grad_norm = f64::INFINITY;
    for _ in 0..max_iter {
        let mut g0 = 0.0;
        let mut g1 = 0.0;
        let mut h00 = 0.0;
        let mut h01 = 0.0;
        let mut h11 = 0.0;
        let mut max_resid = 0.0f64;
        for (&xi, &t) in x.iter().zip(true_labels) {
            let mu = sigmoid(intercept + slope * xi);
            let r = f64::from(t.min(1)) - mu;
            let w = mu * (1.0 - mu);
            max_resid = max_resid.max(r.abs());
            g0 += r;
            g1 += r * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        // Every residual vanishing means the fit separates the classes
        // perfectly and the likelihood is maximized at infinity.
        if max_resid < 1e-6 {
            return Ok(WeakCalibration {
                intercept: Some(intercept),
                slope: Some(slope),
                degenerate: false,
                separation: true,
            });
        }
        grad_norm = g0.abs().max(g1.abs());
        if grad_norm < 1e-10 {
            break;
        }
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-12 {
            return Ok(WeakCalibration {
                intercept: None,
                slope: None,
                degenerate: true,
                separation: false,
            });
        }
        intercept += (h11 * g0 - h01 * g1) / det;
        slope += (h00 * g1 - h01 * g0) / det;
    }
    if grad_norm >= 1e-6 {
        return Err(Error::CalibrationNonConvergence {
            iterations: max_iter,
            grad_norm,
        });
    }
    Ok(WeakCalibration {
        intercept: Some(intercept),
        slope: Some(slope),
        degenerate: false,
        separation: false,
    })
}

/// Multiclass balanced accuracy: mean of per-class recall over classes that
/// appear in the truth.
pub fn balanced_accuracy_multiclass(matrix: &[Vec<usize>]) -> Option<f64> {
    let mut recalls = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        let total: usize = row.iter().sum();
        if total > 0 {
            recalls.push(row[i] as f64 / total as f64);
        }
    }
    if recalls.is_empty() {
        None
    } else {
        Some(recalls.iter().sum::<f64>() / recalls.len() as f64)
    }
}

/// Which side of an adjacent-category split counts as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseOrientation {
    /// Categories above the split are the positive class: for {1,2} vs 3,
    /// sensitivity means detecting category 3.
    HigherPositive,
    LowerPositive,
}

/// Collapse ordinal predictive masses and truth at `split` (1 <= split < K):
/// categories <= split versus > split, predictive mass summed, then the full
/// binary report on the collapsed probabilities thresholded at 0.5.
pub fn adjacent_binary_collapse(
    predictive: &[Vec<f64>],
    true_labels: &[u32],
    split: usize,
    orientation: CollapseOrientation,
) -> Result<MetricsReport> {
    check_lengths(predictive.len(), true_labels.len())?;
    if predictive.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = predictive[0].len();
    if split < 1 || split >= k {
        return Err(Error::InvalidConfig(format!(
            "split must lie in 1..={}, got {split}",
            k - 1
        )));
    }
    let mut probs = Vec::with_capacity(predictive.len());
    let mut truth = Vec::with_capacity(true_labels.len());
    for (row, &t) in predictive.iter().zip(true_labels) {
        let above: f64 = row[split..].iter().sum();
        let (p, pos) = match orientation {
            CollapseOrientation::HigherPositive => (above, t as usize > split),
            CollapseOrientation::LowerPositive => (1.0 - above, (t as usize) <= split),
        };
        probs.push(p);
        truth.push(u32::from(pos));
    }
    let mut report = binary_report(&probs, &truth, 0.5)?;
    report.collapse = Some(collapse_name(split, k, orientation));
    Ok(report)
}

fn collapse_name(split: usize, k: usize, orientation: CollapseOrientation) -> String {
    let low: Vec<String> = (1..=split).map(|c| c.to_string()).collect();
    let high: Vec<String> = (split + 1..=k).map(|c| c.to_string()).collect();
    let fmt = |side: &[String]| -> String {
        if side.len() == 1 {
            side[0].clone()
        } else {
            side.join("")
        }
    };
    let tag = match orientation {
        CollapseOrientation::HigherPositive => "",
        CollapseOrientation::LowerPositive => "_lower_positive",
    };
    format!("{}_vs_{}{}", fmt(&low), fmt(&high), tag)
}

/// Assemble the full binary report: confusion at `threshold` (strict `>`),
/// threshold metrics, AUC on the probabilities as scores, Brier variants,
/// and both calibration levels. Weak-calibration failures degrade to absent
/// values rather than failing the whole report.
pub fn binary_report(probs: &[f64], true_labels: &[u32], threshold: f64) -> Result<MetricsReport> {
    check_lengths(probs.len(), true_labels.len())?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    check_probs(probs)?;
    let pred_labels: Vec<u32> = probs.iter().map(|&p| u32::from(p > threshold)).collect();
    let counts = confusion(&pred_labels, true_labels)?;
    let tm = threshold_metrics(&counts);
    let mut report = MetricsReport::empty(probs.len());
    report.auc = auc(probs, true_labels)?;
    report.accuracy = tm.accuracy;
    report.balanced_accuracy = tm.balanced_accuracy;
    report.sensitivity = tm.sensitivity;
    report.specificity = tm.specificity;
    report.ppv = tm.ppv;
    report.npv = tm.npv;
    report.f1 = tm.f1;
    report.p4 = tm.p4;
    report.brier = Some(brier(probs, true_labels)?);
    report.balanced_brier = balanced_brier(probs, true_labels)?;
    let mc = mean_calibration(probs, true_labels)?;
    report.mean_calibration_mse = Some(mc.mse);
    if let Ok(wc) = weak_calibration(probs, true_labels) {
        report.calibration_intercept = wc.intercept;
        report.calibration_slope = wc.slope;
    }
    report.confusion = Some(counts);
    Ok(report)
}

/// Overall ordinal report: accuracy and multiclass balanced accuracy from
/// argmax labels, mean RPS, mean calibration across the K classes, and the
/// K x K confusion matrix.
pub fn ordinal_overall_report(
    predictive: &[Vec<f64>],
    pred_labels: &[u32],
    true_labels: &[u32],
) -> Result<MetricsReport> {
    check_lengths(predictive.len(), true_labels.len())?;
    check_lengths(pred_labels.len(), true_labels.len())?;
    if predictive.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = predictive[0].len();
    let matrix = confusion_multiclass(pred_labels, true_labels, k)?;
    let correct: usize = (0..k).map(|i| matrix[i][i]).sum();
    let mut report = MetricsReport::empty(predictive.len());
    report.accuracy = Some(correct as f64 / predictive.len() as f64);
    report.balanced_accuracy = balanced_accuracy_multiclass(&matrix);
    let (mean_rps, _) = rps(predictive, true_labels, false)?;
    report.rps = Some(mean_rps);
    report.mean_calibration_mse = Some(mean_calibration_ordinal(predictive, true_labels)?.mse);
    report.multiclass_confusion = Some(matrix);
    Ok(report)
}

/// Side-by-side text rendering of two reports with a `*` marking the better
/// value per row (closeness to the ideal for the calibration intercept and
/// slope, smaller-is-better for error scores, larger otherwise).
pub fn render_comparison(
    label_a: &str,
    a: &MetricsReport,
    label_b: &str,
    b: &MetricsReport,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>14} {:>14}\n",
        "metric", label_a, label_b
    ));
    out.push_str(&"-".repeat(54));
    out.push('\n');
    for ((name, va, lower_better), (_, vb, _)) in a.named_values().into_iter().zip(b.named_values())
    {
        let better = better_side(name, va, vb, lower_better);
        let fmt = |v: Option<f64>, mark: bool| -> String {
            match v {
                Some(x) => format!("{x:.4}{}", if mark { "*" } else { " " }),
                None => "undefined ".to_string(),
            }
        };
        out.push_str(&format!(
            "{:<24} {:>14} {:>14}\n",
            name,
            fmt(va, better == Some(0)),
            fmt(vb, better == Some(1)),
        ));
    }
    out
}

fn better_side(name: &str, a: Option<f64>, b: Option<f64>, lower_better: bool) -> Option<usize> {
    let (a, b) = (a?, b?);
    let (ka, kb) = match name {
        "calibration_intercept" => (a.abs(), b.abs()),
        "calibration_slope" => ((a - 1.0).abs(), (b - 1.0).abs()),
        _ if lower_better => (a, b),
        _ => (-a, -b),
    };
    if ka < kb {
        Some(0)
    } else if kb < ka {
        Some(1)
    } else {
        None
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "{a} predictions for {b} labels"
        )));
    }
    if a == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if let Some(&bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidData(format!(
            "probability {bad} outside [0, 1]"
        )));
    }
    Ok(())
}
