//! Discrete emulation of the segmented AIC.
//!
//! The integration period is split into `M` segments, so measuring a signal
//! `f` against waveform row `phi_k` produces `M` sub-samples: blockwise
//! inner products over the `L = N/M` columns of each segment. Summing a row
//! of the `K x M` sub-sample matrix recovers the conventional sample
//! `<phi_k, f>`; summing along a column-permuted version mints an
//! additional sample, which is equivalent to appending a row assembled from
//! permuted blocks of the original matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::perm::{PermutationFamily, PermutationSet};
use crate::rng::derive_rng;
use crate::sensing::{MeasurementMatrix, Signal};

/// `K x M` matrix of per-segment integrator outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSampleMatrix {
    pub entries: DMatrix<f64>,
    /// Segment length `L = N / M`.
    pub segment_len: usize,
}

impl SubSampleMatrix {
    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn m(&self) -> usize {
        self.entries.ncols()
    }
}

/// Which permutation set and row an extended-matrix row came from.
/// `set_index == 0` marks an original row; additional rows carry the 1-based
/// index of their permutation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowProvenance {
    pub set_index: usize,
    pub row_index: usize,
}

/// `K_e x N` extended measurement matrix with per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMatrix {
    pub entries: DMatrix<f64>,
    pub provenance: Vec<RowProvenance>,
    /// For each row, the original row feeding each of its `M` blocks.
    pub block_sources: Vec<Vec<usize>>,
    pub k: usize,
    pub k_a: usize,
    pub m: usize,
}

impl ExtendedMatrix {
    pub fn k_e(&self) -> usize {
        self.k + self.k_a
    }

    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    pub fn segment_len(&self) -> usize {
        self.n() / self.m
    }

    /// Number of sub-samples (length-`L` blocks) two rows have in common.
    pub fn shared_blocks(&self, row_a: usize, row_b: usize) -> usize {
        self.block_sources[row_a]
            .iter()
            .zip(&self.block_sources[row_b])
            .filter(|(a, b)| a == b)
            .count()
    }
}

/// Noisy sample vector of length `K_e` built by sub-sample reuse.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySampleVector {
    pub values: DVector<f64>,
    pub sigma2: f64,
    pub seed: u64,
}

fn check_segmentation(n: usize, m: usize) -> Result<usize> {
    if m == 0 || n % m != 0 {
        return Err(Error::Segmentation { m, n });
    }
    Ok(n / m)
}

/// Sub-samples `f` against every row of `phi` over `M` segments:
/// `Y[k, j] = <block j of phi_k, block j of f>`.
pub fn subsample(f: &Signal, phi: &MeasurementMatrix, m: usize) -> Result<SubSampleMatrix> {
    if f.n() != phi.n() {
        return Err(Error::Dimension(format!(
            "signal length {} does not match matrix columns {}",
            f.n(),
            phi.n()
        )));
    }
    let l = check_segmentation(phi.n(), m)?;
    let entries = DMatrix::from_fn(phi.k(), m, |k, j| {
        let mut acc = 0.0;
        for c in j * l..(j + 1) * l {
            acc += phi.entries[(k, c)] * f.samples[c];
        }
        acc
    });
    Ok(SubSampleMatrix {
        entries,
        segment_len: l,
    })
}

/// Original samples: row sums of the sub-sample matrix.
pub fn aggregate_original(y: &SubSampleMatrix) -> DVector<f64> {
    DVector::from_fn(y.k(), |k, _| y.entries.row(k).sum())
}

/// Additional samples for one permutation set:
/// `y_k = sum_j Y[pi_j(k), j]`.
pub fn aggregate_permuted(y: &SubSampleMatrix, set: &PermutationSet) -> Result<DVector<f64>> {
    if set.k() != y.k() || set.m() != y.m() {
        return Err(Error::Dimension(format!(
            "permutation set shape ({}, {}) does not match sub-sample matrix ({}, {})",
            set.k(),
            set.m(),
            y.k(),
            y.m()
        )));
    }
    Ok(DVector::from_fn(y.k(), |k, _| {
        (0..y.m())
            .map(|j| y.entries[(set.column(j).apply(k), j)])
            .sum()
    }))
}

fn check_extension(
    phi: &MeasurementMatrix,
    family: &PermutationFamily,
    k_a: usize,
) -> Result<usize> {
    if family.k() != phi.k() {
        return Err(Error::Dimension(format!(
            "family K = {} does not match matrix rows {}",
            family.k(),
            phi.k()
        )));
    }
    let l = check_segmentation(phi.n(), family.m())?;
    let max = phi.k() * family.len();
    if k_a > max {
        return Err(Error::InsufficientFamily {
            requested: k_a,
            max,
        });
    }
    Ok(l)
}

/// Assembles the extended matrix: `Phi` on top, then rows of the permuted
/// matrices in family order, truncating the final set to its first rows when
/// `K_a` is not a multiple of `K`.
pub fn extend_matrix(
    phi: &MeasurementMatrix,
    family: &PermutationFamily,
    k_a: usize,
) -> Result<ExtendedMatrix> {
    let l = check_extension(phi, family, k_a)?;
    let k = phi.k();
    let n = phi.n();
    let m = family.m();
    let k_e = k + k_a;

    let mut entries = DMatrix::zeros(k_e, n);
    let mut provenance = Vec::with_capacity(k_e);
    let mut block_sources = Vec::with_capacity(k_e);

    entries.rows_mut(0, k).copy_from(&phi.entries);
    for row in 0..k {
        provenance.push(RowProvenance {
            set_index: 0,
            row_index: row,
        });
        block_sources.push(vec![row; m]);
    }

    let mut remaining = k_a;
    for (i, set) in family.sets().iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let take = remaining.min(k);
        for row in 0..take {
            let dest = k_e - remaining;
            let mut sources = Vec::with_capacity(m);
            for j in 0..m {
                let src = set.column(j).apply(row);
                sources.push(src);
                for c in j * l..(j + 1) * l {
                    entries[(dest, c)] = phi.entries[(src, c)];
                }
            }
            provenance.push(RowProvenance {
                set_index: i + 1,
                row_index: row,
            });
            block_sources.push(sources);
            remaining -= 1;
        }
    }

    Ok(ExtendedMatrix {
        entries,
        provenance,
        block_sources,
        k,
        k_a,
        m,
    })
}

/// Noisy samples by sub-sample reuse: sub-sample noise is i.i.d. Gaussian of
/// variance `sigma2 / M`, so each sample carries variance `sigma2` and two
/// samples sharing one sub-sample have covariance `sigma2 / M`.
pub fn sample_noisy(
    f: &Signal,
    phi: &MeasurementMatrix,
    family: &PermutationFamily,
    k_a: usize,
    sigma2: f64,
    seed: u64,
) -> Result<NoisySampleVector> {
    if sigma2 < 0.0 {
        return Err(Error::NegativeNoiseVariance(sigma2));
    }
    check_extension(phi, family, k_a)?;
    let mut y = subsample(f, phi, family.m())?;
    if sigma2 > 0.0 {
        let mut rng = derive_rng(seed, &[0x5355_4253_414d_504c]);
        let scale = (sigma2 / family.m() as f64).sqrt();
        for v in y.entries.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += z * scale;
        }
    }

    let k = phi.k();
    let mut values = DVector::zeros(k + k_a);
    values.rows_mut(0, k).copy_from(&aggregate_original(&y));
    let mut filled = k;
    let mut remaining = k_a;
    for set in family.sets() {
        if remaining == 0 {
            break;
        }
        let samples = aggregate_permuted(&y, set)?;
        let take = remaining.min(k);
        values.rows_mut(filled, take).copy_from(&samples.rows(0, take));
        filled += take;
        remaining -= take;
    }

    Ok(NoisySampleVector {
        values,
        sigma2,
        seed,
    })
}

/// Conventional i.i.d. noisy sampling `y = Phi f + w`, `w ~ N(0, sigma2 I)`.
/// Used for the original and enlarged schemes, which have no sub-sample
/// structure to reuse.
pub fn sample_noisy_iid(
    phi: &MeasurementMatrix,
    f: &Signal,
    sigma2: f64,
    seed: u64,
) -> Result<DVector<f64>> {
    if sigma2 < 0.0 {
        return Err(Error::NegativeNoiseVariance(sigma2));
    }
    if f.n() != phi.n() {
        return Err(Error::Dimension(format!(
            "signal length {} does not match matrix columns {}",
            f.n(),
            phi.n()
        )));
    }
    let mut y = &phi.entries * &f.samples;
    if sigma2 > 0.0 {
        let mut rng = derive_rng(seed, &[0x4949_445f_4e4f_4953_u64]);
        let scale = sigma2.sqrt();
        for v in y.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += z * scale;
        }
    }
    Ok(y)
}
