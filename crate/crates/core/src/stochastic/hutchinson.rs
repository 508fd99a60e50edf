use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::cg::cg_with;
use super::operator::LinearOperator;
use crate::error::{Error, Result};
use crate::group::BlockPartition;
use crate::matrix::{c, svd_dense, C64};
use crate::rng::substream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Rademacher,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub num_probes: usize,
    pub probe_kind: ProbeKind,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    pub lanczos_iters: usize,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            num_probes: 100,
            probe_kind: ProbeKind::Rademacher,
            cg_tol: 1e-8,
            cg_max_iters: 1000,
            lanczos_iters: 20,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_probes == 0 {
            return Err(Error::InvalidArgument("at least one probe is required".into()));
        }
        Ok(())
    }
}

/// Probe `index` of a run seeded with `seed`.
pub(crate) fn probe_vector(n: usize, kind: ProbeKind, seed: u64, index: usize) -> DVector<C64> {
    let mut rng = substream(seed, index as u64);
    DVector::from_fn(n, |_, _| match kind {
        ProbeKind::Rademacher => c(if rng.random::<bool>() { 1.0 } else { -1.0 }),
        ProbeKind::Gaussian => c(rng.sample(StandardNormal)),
    })
}

#[derive(Clone, Debug)]
pub struct DiagonalEstimate {
    pub diag: Vec<f64>,
    /// Per-coordinate standard error of the mean.
    pub stderr: Vec<f64>,
    /// CG iterations used by each probe.
    pub cg_iterations: Vec<usize>,
}

/// `diag(M) ≈ (1/p) Σ z ⊙ Mz` for a Hermitian `M` given through `apply`.
/// Probes run in parallel; each uses its own substream.
pub(crate) fn hutchinson_with(
    n: usize,
    config: &EstimatorConfig,
    apply: impl Fn(usize, &DVector<C64>) -> Result<(DVector<C64>, usize)> + Sync,
) -> Result<DiagonalEstimate> {
    config.validate()?;
    let samples: Vec<Result<(Vec<f64>, usize)>> = (0..config.num_probes)
        .into_par_iter()
        .map(|i| {
            let z = probe_vector(n, config.probe_kind, config.seed, i);
            let (mz, it) = apply(i, &z)?;
            Ok((z.iter().zip(mz.iter()).map(|(a, b)| (a.conj() * b).re).collect(), it))
        })
        .collect();
    let p = config.num_probes as f64;
    let mut sum = vec![0.0; n];
    let mut sumsq = vec![0.0; n];
    let mut cg_iterations = Vec::with_capacity(samples.len());
    for s in samples {
        let (v, it) = s?;
        cg_iterations.push(it);
        for k in 0..n {
            sum[k] += v[k];
            sumsq[k] += v[k] * v[k];
        }
    }
    let diag: Vec<f64> = sum.iter().map(|s| s / p).collect();
    let stderr = (0..n)
        .map(|k| {
            if config.num_probes < 2 {
                0.0
            } else {
                let var = ((sumsq[k] - p * diag[k] * diag[k]) / (p - 1.0)).max(0.0);
                (var / p).sqrt()
            }
        })
        .collect();
    Ok(DiagonalEstimate {
        diag,
        stderr,
        cg_iterations,
    })
}

/// Solve `(AA*) x = z` by conjugate gradients; returns `x` and the
/// iteration count.
pub(crate) fn solve_normal(
    a: &LinearOperator<'_>,
    z: &DVector<C64>,
    config: &EstimatorConfig,
    probe: usize,
) -> Result<(DVector<C64>, usize)> {
    cg_with(|v| a.matvec(&a.rmatvec(v)), z, config.cg_tol, config.cg_max_iters)
        .map(|s| (s.x, s.iterations))
        .map_err(|e| with_probe(e, probe))
}

pub(crate) fn with_probe(e: Error, probe: usize) -> Error {
    match e {
        Error::NotConverged {
            iterations,
            residual,
            ..
        } => Error::NotConverged {
            iterations,
            residual,
            probe: Some(probe),
        },
        e => e,
    }
}

/// Hutchinson estimate of `diag((AA*)⁻¹)`, one CG solve per probe.
pub fn hutchinson_diagonal_inverse(
    a: &LinearOperator<'_>,
    config: &EstimatorConfig,
) -> Result<DiagonalEstimate> {
    hutchinson_with(a.nrows(), config, |i, z| solve_normal(a, z, config, i))
}

/// Gaussian probe block `G` (`n × p`): column `j` comes from substream `j`.
fn gaussian_block(n: usize, p: usize, seed: u64, first_stream: usize) -> DMatrix<C64> {
    let cols: Vec<DVector<C64>> = (0..p)
        .map(|j| probe_vector(n, ProbeKind::Gaussian, seed, first_stream + j))
        .collect();
    DMatrix::from_columns(&cols)
}

fn has_full_row_rank(g: &DMatrix<C64>) -> bool {
    let f = svd_dense(g, None);
    f.singular_values.len() == g.nrows() && f.rank() == g.nrows()
}

/// `M_RR ≈ Z_R G_R†` with `Z = MG`, Hermitian-symmetrized.
fn block_from_probes(g: &DMatrix<C64>, z: &DMatrix<C64>, block: &Range<usize>) -> DMatrix<C64> {
    let r = block.len();
    let p = g.ncols();
    let gr = g.view((block.start, 0), (r, p)).into_owned();
    let zr = z.view((block.start, 0), (r, p)).into_owned();
    let est = zr * svd_dense(&gr, None).pseudoinverse();
    (&est + est.adjoint()) * c(0.5)
}

/// Draw `G`, resampling once if some block of rows is rank deficient.
fn draw_probe_block(
    n: usize,
    p: usize,
    seed: u64,
    blocks: &[Range<usize>],
) -> Result<DMatrix<C64>> {
    for attempt in 0..2 {
        let g = gaussian_block(n, p, seed, attempt * p);
        let ok = blocks.iter().all(|b| {
            let gr = g.view((b.start, 0), (b.len(), p)).into_owned();
            has_full_row_rank(&gr)
        });
        if ok {
            return Ok(g);
        }
    }
    Err(Error::SingularProbeBlock)
}

/// Block Hutchinson estimate of the diagonal block `M[block, block]`.
pub fn block_hutchinson(
    m: &LinearOperator<'_>,
    block: Range<usize>,
    num_probes: usize,
    seed: u64,
) -> Result<DMatrix<C64>> {
    let n = m.ncols();
    if block.is_empty() || block.end > n || m.nrows() != n {
        return Err(Error::dims("block must be a nonempty range inside a square operator"));
    }
    if block.len() > num_probes {
        return Err(Error::InvalidArgument(format!(
            "block of size {} needs at least that many probes, got {num_probes}",
            block.len()
        )));
    }
    let g = draw_probe_block(n, num_probes, seed, std::slice::from_ref(&block))?;
    let cols: Vec<DVector<C64>> = (0..num_probes)
        .into_par_iter()
        .map(|j| m.matvec(&g.column(j).into_owned()))
        .collect();
    let z = DMatrix::from_columns(&cols);
    Ok(block_from_probes(&g, &z, &block))
}

/// Estimate every diagonal block of `M` under `partition` from one shared
/// set of probes. Diagonal partitions use plain Hutchinson with the
/// configured probe kind; larger blocks use Gaussian block probes.
pub(crate) fn block_diagonal_estimate(
    n: usize,
    partition: &BlockPartition,
    config: &EstimatorConfig,
    apply: impl Fn(usize, &DVector<C64>) -> Result<(DVector<C64>, usize)> + Sync,
) -> Result<(DMatrix<C64>, Vec<usize>)> {
    config.validate()?;
    if partition.is_diagonal() {
        let est = hutchinson_with(n, config, apply)?;
        let d = DVector::from_iterator(n, est.diag.iter().map(|&v| c(v)));
        return Ok((DMatrix::from_diagonal(&d), est.cg_iterations));
    }
    let blocks: Vec<Range<usize>> = partition.blocks().map(|(o, s)| o..o + s).collect();
    let p = config.num_probes;
    if let Some(b) = blocks.iter().find(|b| b.len() > p) {
        return Err(Error::InvalidArgument(format!(
            "block of size {} needs at least that many probes, got {p}",
            b.len()
        )));
    }
    let g = draw_probe_block(n, p, config.seed, &blocks)?;
    let results: Vec<Result<(DVector<C64>, usize)>> = (0..p)
        .into_par_iter()
        .map(|j| apply(j, &g.column(j).into_owned()))
        .collect();
    let mut cols = Vec::with_capacity(p);
    let mut its = Vec::with_capacity(p);
    for r in results {
        let (v, it) = r?;
        cols.push(v);
        its.push(it);
    }
    let z = DMatrix::from_columns(&cols);
    let mut out = DMatrix::zeros(n, n);
    for b in &blocks {
        let blk = block_from_probes(&g, &z, b);
        out.view_mut((b.start, b.start), (b.len(), b.len())).copy_from(&blk);
    }
    Ok((out, its))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ComplexMatrix;
    use crate::rng::gaussian_matrix;

    fn cfg(p: usize, seed: u64) -> EstimatorConfig {
        EstimatorConfig {
            num_probes: p,
            seed,
            cg_tol: 1e-12,
            ..Default::default()
        }
    }

    #[test]
    fn identity_is_exact() {
        let i = ComplexMatrix::identity(7);
        let op = LinearOperator::from_matrix(&i);
        let est = hutchinson_diagonal_inverse(&op, &cfg(5, 1)).unwrap();
        assert!(est.diag.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(est.stderr.iter().all(|&v| v < 1e-14));
    }

    #[test]
    fn diagonal_is_exact_for_rademacher() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let op = LinearOperator::from_matrix(&d);
        let est = hutchinson_diagonal_inverse(&op, &cfg(3, 2)).unwrap();
        for (k, want) in [1.0, 0.25, 1.0 / 9.0].iter().enumerate() {
            assert!((est.diag[k] - want).abs() < 1e-10);
        }
        let total: usize = est.cg_iterations.iter().sum();
        assert_eq!(op.matvec_count(), 2 * total);
    }

    #[test]
    fn deterministic_across_runs() {
        let mut rng = substream(3, 0);
        let a = gaussian_matrix(&mut rng, 8, 12);
        let op = LinearOperator::from_dense(&a);
        let x = hutchinson_diagonal_inverse(&op, &cfg(50, 4)).unwrap();
        let y = hutchinson_diagonal_inverse(&op, &cfg(50, 4)).unwrap();
        assert_eq!(x.diag, y.diag);
    }

    #[test]
    fn block_hutchinson_identity_is_exact() {
        let i = ComplexMatrix::identity(10);
        let op = LinearOperator::from_matrix(&i);
        let b = block_hutchinson(&op, 2..6, 8, 5).unwrap();
        assert!((b - DMatrix::<C64>::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn block_of_size_one_is_self_normalized_gaussian_hutchinson() {
        let mut rng = substream(6, 0);
        let g = gaussian_matrix(&mut rng, 6, 6);
        let m = &g * g.adjoint();
        let op = LinearOperator::from_dense(&m);
        let p = 40;
        let est = block_hutchinson(&op, 3..4, p, 9).unwrap()[(0, 0)].re;
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..p {
            let z = probe_vector(6, ProbeKind::Gaussian, 9, j);
            let mz = &m * &z;
            num += z[3].re * mz[3].re;
            den += z[3].re * z[3].re;
        }
        assert!((est - num / den).abs() < 1e-10 * est.abs());
    }

    #[test]
    fn too_few_probes() {
        let i = ComplexMatrix::identity(4);
        let op = LinearOperator::from_matrix(&i);
        assert!(block_hutchinson(&op, 0..3, 2, 0).is_err());
    }
}
