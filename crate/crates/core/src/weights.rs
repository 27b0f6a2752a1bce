//! Per-observation likelihood weights from class membership: inverse class
//! proportion, rescaled so the weights sum to the number of observations.
//!
//! The two-step rule: each observation gets the inverse of its class
//! proportion, then the vector is divided by its sum and multiplied by N.
//! Keeping the sum at N preserves the total information content of the data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive per-observation weights summing to N, with the class bookkeeping
/// they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights {
    /// Unitless multipliers on log-likelihood contributions, length N.
    pub values: Vec<f64>,
    pub class_labels: Vec<i64>,
    pub class_proportions: BTreeMap<i64, f64>,
}

impl ClassWeights {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How likelihood weights are derived for a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    /// All weights 1: the ordinary unweighted analysis.
    None,
    /// Inverse empirical class proportion, normalized to sum to N.
    InverseProportion,
    /// Inverse of externally supplied class proportions (e.g. known
    /// population prevalences), still normalized to sum to N over the sample.
    ExplicitProportions(BTreeMap<i64, f64>),
}

impl WeightingMode {
    pub fn weights_for(&self, labels: &[i64]) -> Result<ClassWeights> {
        match self {
            WeightingMode::None => unit_weights(labels.len()),
            WeightingMode::InverseProportion => compute_weights(labels),
            WeightingMode::ExplicitProportions(props) => weights_from_proportions(labels, props),
        }
    }
}

/// Inverse-proportion weights from empirical class counts, normalized to sum
/// to N. Every observation of a class gets bit-identical weight.
pub fn compute_weights(labels: &[i64]) -> Result<ClassWeights> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = labels.len() as f64;
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &label in labels {
        *counts.entry(label).or_insert(0) += 1;
    }
    let proportions: BTreeMap<i64, f64> = counts.iter().map(|(&c, &k)| (c, k as f64 / n)).collect();
    let values = normalized_inverse(labels, &proportions, n)?;
    Ok(ClassWeights {
        values,
        class_labels: labels.to_vec(),
        class_proportions: proportions,
    })
}

/// Inverse-proportion weights using externally known class proportions
/// instead of empirical counts. Proportions must cover every observed label,
/// be positive, and sum to 1; normalization to sum N happens over the sample.
pub fn weights_from_proportions(
    labels: &[i64],
    proportions: &BTreeMap<i64, f64>,
) -> Result<ClassWeights> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total: f64 = proportions.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig("proportions must sum to 1".into()));
    }
    if proportions.values().any(|&p| p <= 0.0) {
        return Err(Error::InvalidConfig("proportions must be positive".into()));
    }
    for label in labels {
        if !proportions.contains_key(label) {
            return Err(Error::InvalidConfig(format!(
                "no proportion supplied for class {label}"
            )));
        }
    }
    let n = labels.len() as f64;
    let values = normalized_inverse(labels, proportions, n)?;
    Ok(ClassWeights {
        values,
        class_labels: labels.to_vec(),
        class_proportions: proportions.clone(),
    })
}

/// All weights exactly 1; sum is exactly n.
pub fn unit_weights(n: usize) -> Result<ClassWeights> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(ClassWeights {
        values: vec![1.0; n],
        class_labels: vec![0; n],
        class_proportions: BTreeMap::from([(0, 1.0)]),
    })
}

fn normalized_inverse(
    labels: &[i64],
    proportions: &BTreeMap<i64, f64>,
    n: f64,
) -> Result<Vec<f64>> {
    // Unnormalized weight per class, then one shared rescale so the vector
    // sums to N. The rescale sum runs over sorted classes (count times
    // weight), not over observations, so the result is independent of label
    // order and within-class weights come out bit-identical.
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for label in labels {
        *counts.entry(*label).or_insert(0) += 1;
    }
    let unnorm: BTreeMap<i64, f64> = proportions.iter().map(|(&c, &p)| (c, 1.0 / p)).collect();
    let sum: f64 = counts.iter().map(|(c, &k)| k as f64 * unnorm[c]).sum();
    let per_class: BTreeMap<i64, f64> = unnorm.iter().map(|(&c, &u)| (c, u * n / sum)).collect();
    Ok(labels.iter().map(|l| per_class[l]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn eight_sample_worked_example() {
        // 6 of class 0, 2 of class 1 -> {0.67 x6, 2 x2} to 2 d.p.
        let labels = [0, 0, 0, 0, 0, 0, 1, 1];
        let w = compute_weights(&labels).unwrap();
        for v in &w.values[..6] {
            assert_close((v * 100.0).round() / 100.0, 0.67, 1e-12);
        }
        for v in &w.values[6..] {
            assert_close(*v, 2.0, 1e-12);
        }
        assert_close(w.values.iter().sum::<f64>(), 8.0, 1e-9);
    }

    #[test]
    fn balanced_two_class_gives_unit_weights() {
        let w = compute_weights(&[0, 0, 1, 1]).unwrap();
        assert_eq!(w.values, vec![1.0; 4]);
    }

    #[test]
    fn three_class_dili_counts() {
        // Counts {33, 40, 23} over classes {1,2,3}, N=96. Oracle: unnormalized
        // 96/33, 96/40, 96/23; divide by their sum over observations (288)
        // and multiply by 96, i.e. per-class 32/33, 4/5, 32/23.
        let mut labels = Vec::new();
        labels.extend(std::iter::repeat_n(1, 33));
        labels.extend(std::iter::repeat_n(2, 40));
        labels.extend(std::iter::repeat_n(3, 23));
        let w = compute_weights(&labels).unwrap();
        assert_close(w.values[0], 0.969_696_969_696_969_6, 1e-12);
        assert_close(w.values[33], 0.8, 1e-12);
        assert_close(w.values[73], 1.391_304_347_826_087, 1e-12);
        assert_close(w.values.iter().sum::<f64>(), 96.0, 96.0 * 1e-9);
    }

    #[test]
    fn loo_fold_of_worked_example() {
        // Holding out one class-1 observation from the 8-sample example
        // leaves counts {6, 1}: unnormalized {7/6 x6, 7}, sum 14, rescaled
        // by 7/14 to per-class weights 7/12 and 3.5.
        let w = compute_weights(&[0, 0, 0, 0, 0, 0, 1]).unwrap();
        assert_close(w.values[0], 7.0 / 12.0, 1e-12);
        assert_close(w.values[6], 3.5, 1e-12);
        assert_close(w.values.iter().sum::<f64>(), 7.0, 1e-9);
    }

    #[test]
    fn empty_labels_error() {
        assert!(matches!(compute_weights(&[]), Err(Error::EmptyDataset)));
        assert!(matches!(unit_weights(0), Err(Error::EmptyDataset)));
    }

    #[test]
    fn unit_weights_are_exactly_one() {
        let w = unit_weights(5).unwrap();
        assert_eq!(w.values, vec![1.0; 5]);
        assert_eq!(unit_weights(1).unwrap().values, vec![1.0]);
    }

    #[test]
    fn single_class_equals_unit_weights() {
        let w = compute_weights(&[7, 7, 7]).unwrap();
        assert_eq!(w.values, unit_weights(3).unwrap().values);
    }

    #[test]
    fn label_gaps_are_two_classes() {
        let w = compute_weights(&[0, 0, 2, 2]).unwrap();
        assert_eq!(w.values, vec![1.0; 4]);
        assert_eq!(w.class_proportions.len(), 2);
    }

    #[test]
    fn explicit_proportions_override() {
        let props = BTreeMap::from([(0, 0.75), (1, 0.25)]);
        // Same composition as the paper's 8-sample example, so same weights.
        let labels = [0, 0, 0, 0, 0, 0, 1, 1];
        let w = weights_from_proportions(&labels, &props).unwrap();
        // unnormalized {1.333.. x6, 4 x2}, sum 16, rescaled by 8/16
        assert_close(w.values[0], 2.0 / 3.0, 1e-12);
        assert_close(w.values[6], 2.0, 1e-12);

        let bad = BTreeMap::from([(0, 0.5), (1, 0.6)]);
        assert!(weights_from_proportions(&labels, &bad).is_err());
        let missing = BTreeMap::from([(0, 1.0)]);
        assert!(weights_from_proportions(&labels, &missing).is_err());
    }

    #[test]
    fn weighting_mode_dispatch() {
        let labels = [0, 0, 0, 1];
        assert_eq!(
            WeightingMode::None.weights_for(&labels).unwrap().values,
            vec![1.0; 4]
        );
        let w = WeightingMode::InverseProportion
            .weights_for(&labels)
            .unwrap();
        assert_close(w.values.iter().sum::<f64>(), 4.0, 1e-9);
        assert!(w.values[3] > w.values[0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn normalization_properties(
            (n_classes, labels) in (2usize..=5).prop_flat_map(|k| {
                (Just(k), proptest::collection::vec(0..k as i64, k..10_000)
                    .prop_map(move |mut v| {
                        // guarantee every class is represented
                        for c in 0..k as i64 { v.push(c); }
                        v
                    }))
            })
        ) {
            let n = labels.len() as f64;
            let w = compute_weights(&labels).unwrap();
            prop_assert!(w.values.iter().all(|&v| v > 0.0));
            let sum: f64 = w.values.iter().sum();
            prop_assert!((sum - n).abs() <= 1e-9 * n, "sum {} vs N {}", sum, n);
            // within-class bit-for-bit equality
            let mut per_class: BTreeMap<i64, f64> = BTreeMap::new();
            for (lab, val) in labels.iter().zip(&w.values) {
                let entry = per_class.entry(*lab).or_insert(*val);
                prop_assert_eq!(entry.to_bits(), val.to_bits());
            }
            prop_assert_eq!(per_class.len(), n_classes);
            // rarer class never gets a smaller weight
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for lab in &labels { *counts.entry(*lab).or_insert(0) += 1; }
            for (a, wa) in &per_class {
                for (b, wb) in &per_class {
                    if counts[a] < counts[b] {
                        prop_assert!(wa >= wb);
                    }
                }
            }
        }

        #[test]
        fn two_class_ratio_is_inverse_proportion_ratio(
            n0 in 1usize..200,
            n1 in 1usize..200,
        ) {
            let mut labels = vec![0i64; n0];
            labels.extend(vec![1i64; n1]);
            let w = compute_weights(&labels).unwrap();
            let p = n0 as f64 / (n0 + n1) as f64;
            let ratio = w.values[0] / w.values[n0];
            prop_assert!((ratio - (1.0 - p) / p).abs() < 1e-9 * (1.0 / p));
        }

        #[test]
        fn permutation_equivariance(
            labels in proptest::collection::vec(0i64..4, 2..200),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let w = compute_weights(&labels).unwrap();
            let mut idx: Vec<usize> = (0..labels.len()).collect();
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            idx.shuffle(&mut rng);
            let permuted: Vec<i64> = idx.iter().map(|&i| labels[i]).collect();
            let wp = compute_weights(&permuted).unwrap();
            for (j, &i) in idx.iter().enumerate() {
                prop_assert_eq!(wp.values[j].to_bits(), w.values[i].to_bits());
            }
        }
    }
}
