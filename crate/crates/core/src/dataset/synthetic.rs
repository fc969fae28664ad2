use rand::Rng as _;
use rand_distr::StandardNormal;

use super::{FeatureMatrix, LabeledDataset};
use crate::error::DataError;
use crate::scalar::Scalar;
use crate::seed;

/// 0-based indices of the informative columns of [`generate_synthetic`].
pub const ACTIVE_FEATURES: [usize; 3] = [0, 1, 2];

/// Parameters of the sparse additive test problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Noise-free response `2 x1 - 3 * 2^x2 + log2(1 + x3)`.
#[inline]
pub fn synthetic_response<T: Scalar>(x1: T, x2: T, x3: T) -> T {
    let two = T::lit(2.0);
    two * x1 - T::lit(3.0) * two.powf(x2) + (T::one() + x3).log2()
}

/// Draws `n` samples with `d` i.i.d. U[0,1] features; only the first three
/// enter the response, plus N(0, noise_sd^2) noise.
pub fn generate_synthetic<T: Scalar>(spec: &SyntheticSpec) -> Result<LabeledDataset<T>, DataError> {
    if spec.d < 3 {
        return Err(DataError::TooFewFeatures(spec.d));
    }
    if spec.n == 0 {
        return Err(DataError::Empty);
    }
    if !(spec.noise_sd >= 0.0 && spec.noise_sd.is_finite()) {
        return Err(DataError::Invalid(format!("noise_sd {} must be >= 0", spec.noise_sd)));
    }
    let mut rng = seed::rng(spec.seed);
    let columns: Vec<Vec<T>> =
        (0..spec.d).map(|_| (0..spec.n).map(|_| T::lit(rng.random::<f64>())).collect()).collect();
    let targets = (0..spec.n)
        .map(|i| {
            let eps: f64 = rng.sample(StandardNormal);
            synthetic_response(columns[0][i], columns[1][i], columns[2][i]) + T::lit(spec.noise_sd * eps)
        })
        .collect();
    LabeledDataset::new(FeatureMatrix::from_columns(columns)?, targets, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule on [0, 1].
    fn simpson(f: impl Fn(f64) -> f64, intervals: usize) -> f64 {
        let h = 1.0 / intervals as f64;
        let mut acc = f(0.0) + f(1.0);
        for k in 1..intervals {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn corners() {
        assert_eq!(synthetic_response(1.0f64, 1.0, 1.0), -3.0);
        assert_eq!(synthetic_response(0.0f64, 0.0, 0.0), -3.0);
    }

    #[test]
    fn rejects_small_d() {
        let spec = SyntheticSpec { n: 10, d: 2, noise_sd: 0.0, seed: 0 };
        assert!(matches!(generate_synthetic::<f64>(&spec), Err(DataError::TooFewFeatures(2))));
    }

    #[test]
    fn sample_mean_matches_quadrature() {
        let expected =
            simpson(|x| 2.0 * x, 1000) + simpson(|x| -3.0 * 2f64.powf(x), 1000) + simpson(|x| (1.0 + x).log2(), 1000);
        let spec = SyntheticSpec { n: 100_000, d: 3, noise_sd: 1.0, seed: 42 };
        let ds = generate_synthetic::<f64>(&spec).unwrap();
        let n = ds.targets.len() as f64;
        let mean = ds.targets.iter().sum::<f64>() / n;
        let var = ds.targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean} vs {expected} (se {se})");
    }

    #[test]
    fn reproducible_and_in_unit_cube() {
        let spec = SyntheticSpec { n: 200, d: 7, noise_sd: 1.0, seed: 9 };
        let a = generate_synthetic::<f64>(&spec).unwrap();
        let b = generate_synthetic::<f64>(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.features.columns().iter().flatten().all(|&x| (0.0..=1.0).contains(&x)));
        let c = generate_synthetic::<f64>(&SyntheticSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a, c);
    }
}
