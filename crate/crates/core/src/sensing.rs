//! Random measurement ensembles, sparse test signals, and SNR arithmetic.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_rng;

/// Distribution family of the measurement-matrix entries. Both are zero mean
/// with variance `1/N`: Gaussian draws, or `+-1/sqrt(N)` equiprobable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Gaussian,
    Bernoulli,
}

/// `K x N` random sampling-waveform matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    pub entries: DMatrix<f64>,
    pub ensemble: Ensemble,
    pub seed: u64,
}

impl MeasurementMatrix {
    /// Number of rows (sampling waveforms / BMIs).
    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    /// Signal dimension.
    pub fn n(&self) -> usize {
        self.entries.ncols()
    }
}

/// Nonzero amplitude model for synthetic sparse coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    /// Nonzeros set to `+-1` with equal probability.
    PmOne,
}

/// Length-`N` coefficient vector with `S` nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients {
    pub values: DVector<f64>,
    /// Sorted indices of the nonzero entries.
    pub support: Vec<usize>,
    pub sparsity: usize,
}

/// Orthonormal `N x N` sparsity basis; rows are the basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityBasis {
    matrix: DMatrix<f64>,
}

impl SparsityBasis {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Wraps an explicit basis, checking orthonormality to 1e-10.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "basis must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let gram = matrix.transpose() * &matrix;
        let n = matrix.nrows();
        let dev = (&gram - DMatrix::<f64>::identity(n, n)).abs().max();
        if dev > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "basis is not orthonormal: max |B^T B - I| = {dev:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Discrete-time signal of dimension `N` with its cached squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: DVector<f64>,
    pub norm_sq: f64,
}

impl Signal {
    pub fn new(samples: DVector<f64>) -> Self {
        let norm_sq = samples.norm_squared();
        Self { samples, norm_sq }
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }
}

/// Draws a `K x N` matrix with i.i.d. zero-mean variance-`1/N` entries.
///
/// Deterministic for a fixed `(k, n, ensemble, seed)` tuple.
pub fn generate_measurement_matrix(
    k: usize,
    n: usize,
    ensemble: Ensemble,
    seed: u64,
) -> Result<MeasurementMatrix> {
    if k == 0 || n == 0 {
        return Err(Error::Dimension(format!(
            "matrix dimensions must be positive, got {k}x{n}"
        )));
    }
    let mut rng = derive_rng(seed, &[0x4d41_5452_4958, k as u64, n as u64]);
    let scale = 1.0 / (n as f64).sqrt();
    // Column-major fill order; part of the deterministic contract.
    let entries = match ensemble {
        Ensemble::Gaussian => DMatrix::from_fn(k, n, |_, _| {
            let z: f64 = rng.sample(StandardNormal);
            z * scale
        }),
        Ensemble::Bernoulli => DMatrix::from_fn(k, n, |_, _| {
            if rng.random_bool(0.5) {
                scale
            } else {
                -scale
            }
        }),
    };
    Ok(MeasurementMatrix {
        entries,
        ensemble,
        seed,
    })
}

/// Draws an `S`-sparse length-`N` coefficient vector: support uniform
/// without replacement, nonzeros `+-1` equiprobable.
pub fn generate_sparse_signal(
    n: usize,
    s: usize,
    amplitude: Amplitude,
    seed: u64,
) -> Result<SparseCoefficients> {
    if s > n {
        return Err(Error::Dimension(format!("sparsity S = {s} exceeds N = {n}")));
    }
    let mut rng = derive_rng(seed, &[0x5349_474e_414c, n as u64, s as u64]);
    let mut support = rand::seq::index::sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    let mut values = DVector::zeros(n);
    for &idx in &support {
        values[idx] = match amplitude {
            Amplitude::PmOne => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        };
    }
    Ok(SparseCoefficients {
        values,
        support,
        sparsity: s,
    })
}

/// Synthesizes `f` from coefficients: `f = Psi^T x` (real basis).
pub fn synthesize(basis: &SparsityBasis, x: &SparseCoefficients) -> Result<Signal> {
    if basis.n() != x.values.len() {
        return Err(Error::Dimension(format!(
            "basis dimension {} does not match coefficient length {}",
            basis.n(),
            x.values.len()
        )));
    }
    Ok(Signal::new(basis.matrix.transpose() * &x.values))
}

/// Noise variance for a target SNR: `sigma^2 = ||f||^2 / (N 10^(snr/10))`.
///
/// An infinite `snr_db` maps to exactly zero variance (noiseless sampling).
pub fn snr_to_noise_variance(f: &Signal, n: usize, snr_db: f64) -> Result<f64> {
    if f.norm_sq <= 0.0 {
        return Err(Error::UndefinedSnr);
    }
    if snr_db.is_infinite() && snr_db > 0.0 {
        return Ok(0.0);
    }
    Ok(f.norm_sq / (n as f64 * 10f64.powf(snr_db / 10.0)))
}

/// Inverse of [`snr_to_noise_variance`].
pub fn noise_variance_to_snr_db(f: &Signal, n: usize, sigma2: f64) -> Result<f64> {
    if f.norm_sq <= 0.0 {
        return Err(Error::UndefinedSnr);
    }
    if sigma2 < 0.0 {
        return Err(Error::NegativeNoiseVariance(sigma2));
    }
    Ok(10.0 * (f.norm_sq / (n as f64 * sigma2)).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bernoulli_entries_are_half_magnitude() {
        let m = generate_measurement_matrix(2, 4, Ensemble::Bernoulli, 7).unwrap();
        for &v in m.entries.iter() {
            assert!(v == 0.5 || v == -0.5, "entry {v} not in {{+0.5, -0.5}}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_measurement_matrix(16, 128, Ensemble::Gaussian, 1).unwrap();
        let b = generate_measurement_matrix(16, 128, Ensemble::Gaussian, 1).unwrap();
        assert_eq!(a.entries, b.entries);
        let c = generate_measurement_matrix(16, 128, Ensemble::Gaussian, 2).unwrap();
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn gaussian_sample_variance_matches_ensemble() {
        // Sample variance of k*n i.i.d. N(0, 1/128) draws; the CLT standard
        // error of s^2 is sigma^2 * sqrt(2/(kn - 1)).
        let m = generate_measurement_matrix(100, 128, Ensemble::Gaussian, 3).unwrap();
        let kn = (m.k() * m.n()) as f64;
        let mean = m.entries.iter().sum::<f64>() / kn;
        let var = m.entries.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (kn - 1.0);
        let target = 1.0 / 128.0;
        let se = target * (2.0 / (kn - 1.0)).sqrt();
        assert!(
            (var - target).abs() <= 3.0 * se,
            "sample variance {var:.6e} not within 3 SE ({se:.2e}) of {target:.6e}"
        );
        let mean_se = (target / kn).sqrt();
        assert!(mean.abs() <= 3.0 * mean_se);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(generate_measurement_matrix(0, 4, Ensemble::Gaussian, 1).is_err());
        assert!(generate_measurement_matrix(4, 0, Ensemble::Gaussian, 1).is_err());
    }

    #[test]
    fn sparse_signal_support_and_amplitudes() {
        let x = generate_sparse_signal(128, 3, Amplitude::PmOne, 5).unwrap();
        assert_eq!(x.support.len(), 3);
        let nnz: Vec<f64> = x.values.iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nnz.len(), 3);
        assert!(nnz.iter().all(|v| v.abs() == 1.0));
        assert_relative_eq!(x.values.norm_squared(), 3.0);
    }

    #[test]
    fn sparse_signal_edge_sparsities() {
        let zero = generate_sparse_signal(8, 0, Amplitude::PmOne, 1).unwrap();
        assert_eq!(zero.values, DVector::zeros(8));

        let full = generate_sparse_signal(8, 8, Amplitude::PmOne, 2).unwrap();
        assert!(full.values.iter().all(|v| v.abs() == 1.0));

        assert!(generate_sparse_signal(8, 9, Amplitude::PmOne, 3).is_err());
    }

    #[test]
    fn synthesize_identity_is_passthrough() {
        let x = generate_sparse_signal(16, 4, Amplitude::PmOne, 11).unwrap();
        let f = synthesize(&SparsityBasis::identity(16), &x).unwrap();
        assert_eq!(f.samples, x.values);
    }

    #[test]
    fn synthesize_preserves_norm_for_orthonormal_basis() {
        // Scaled 4x4 Hadamard basis.
        let h = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 0.5, 0.5, 0.5, //
                0.5, -0.5, 0.5, -0.5, //
                0.5, 0.5, -0.5, -0.5, //
                0.5, -0.5, -0.5, 0.5,
            ],
        );
        let basis = SparsityBasis::new(h.clone()).unwrap();
        let x = generate_sparse_signal(4, 2, Amplitude::PmOne, 9).unwrap();
        let f = synthesize(&basis, &x).unwrap();
        assert_relative_eq!(f.norm_sq, x.values.norm_squared(), max_relative = 1e-10);

        // Unit coefficient pulls out the first basis vector (first row of Psi).
        let e1 = SparseCoefficients {
            values: DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
            support: vec![0],
            sparsity: 1,
        };
        let f1 = synthesize(&basis, &e1).unwrap();
        let expected = DVector::from_fn(4, |i, _| h[(0, i)]);
        assert_relative_eq!(f1.samples, expected, max_relative = 1e-14);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(SparsityBasis::new(bad).is_err());
    }

    #[test]
    fn snr_arithmetic() {
        let f = Signal::new(DVector::from_vec(vec![1.0, 1.0, -1.0]));
        assert_relative_eq!(f.norm_sq, 3.0);

        let sigma2 = snr_to_noise_variance(&f, 128, 15.0).unwrap();
        assert_relative_eq!(sigma2, 3.0 / (128.0 * 10f64.powf(1.5)), max_relative = 1e-14);
        assert_relative_eq!(sigma2, 7.412e-4, max_relative = 1e-4);

        let at_zero_db = snr_to_noise_variance(&f, 128, 0.0).unwrap();
        assert_relative_eq!(at_zero_db, 3.0 / 128.0, max_relative = 1e-14);

        for snr in [5.0, 15.0, 25.0] {
            let s2 = snr_to_noise_variance(&f, 128, snr).unwrap();
            let back = noise_variance_to_snr_db(&f, 128, s2).unwrap();
            assert_relative_eq!(back, snr, max_relative = 1e-12);
        }

        assert_eq!(snr_to_noise_variance(&f, 128, f64::INFINITY).unwrap(), 0.0);

        let zero = Signal::new(DVector::zeros(4));
        assert!(snr_to_noise_variance(&zero, 4, 10.0).is_err());
    }
}
