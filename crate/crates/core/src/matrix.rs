//! Complex matrices, norms, the pseudoinverse and the condition numbers used
//! throughout the crate, plus the classical heuristic scalings (Jacobi,
//! Sinkhorn–Knopp equilibration, row balancing) that serve as baselines.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    /// Dense column-major storage.
    Dense(DMatrix<C64>),
    /// Canonical coordinate triplets: sorted by (row, col), no duplicates.
    Sparse(Vec<(usize, usize, C64)>),
}

/// A dense or sparse complex `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl ComplexMatrix {
    pub fn from_dense(m: DMatrix<C64>) -> Self {
        ComplexMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            storage: Storage::Dense(m),
        }
    }

    /// Real matrix from row-major data.
    pub fn from_real_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self::from_dense(DMatrix::from_fn(rows, cols, |i, j| {
            C64::new(data[i * cols + j], 0.0)
        })))
    }

    /// Real matrix from a slice of rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Self::from_dense(DMatrix::from_fn(m, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// Sparse matrix from coordinate triplets. Duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::dims(format!(
                "entry ({i}, {j}) out of bounds for a {rows}x{cols} matrix"
            )));
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut canon: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            match canon.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => canon.push((i, j, v)),
            }
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            storage: Storage::Sparse(canon),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_dense(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_dense(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(d[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.iter().filter(|v| **v != ZERO).count(),
            Storage::Sparse(t) => t.len(),
        }
    }

    /// Dense view; borrows when already dense.
    pub fn dense(&self) -> Cow<'_, DMatrix<C64>> {
        match &self.storage {
            Storage::Dense(m) => Cow::Borrowed(m),
            Storage::Sparse(t) => {
                let mut m = DMatrix::zeros(self.rows, self.cols);
                for &(i, j, v) in t {
                    m[(i, j)] += v;
                }
                Cow::Owned(m)
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.dense().into_owned()
    }

    pub fn to_sparse(&self) -> Self {
        match &self.storage {
            Storage::Sparse(_) => self.clone(),
            Storage::Dense(m) => {
                let mut t = Vec::new();
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        if m[(i, j)] != ZERO {
                            t.push((i, j, m[(i, j)]));
                        }
                    }
                }
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    storage: Storage::Sparse(t),
                }
            }
        }
    }

    /// Nonzero entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match self.to_sparse().storage {
            Storage::Sparse(t) => t,
            Storage::Dense(_) => unreachable!(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(t) => t
                .binary_search_by_key(&(i, j), |&(r, c, _)| (r, c))
                .map(|k| t[k].2)
                .unwrap_or(ZERO),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.storage {
            Storage::Dense(m) => m.iter().all(|v| *v == ZERO),
            Storage::Sparse(t) => t.iter().all(|e| e.2 == ZERO),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * c),
            Storage::Sparse(t) => Storage::Sparse(t.iter().map(|&(i, j, v)| (i, j, v * c)).collect()),
        };
        ComplexMatrix { storage, ..*self }
    }

    pub fn adjoint(&self) -> Self {
        match &self.storage {
            Storage::Dense(m) => Self::from_dense(m.adjoint()),
            Storage::Sparse(t) => {
                let mut a: Vec<_> = t.iter().map(|&(i, j, v)| (j, i, v.conj())).collect();
                a.sort_by_key(|&(i, j, _)| (i, j));
                ComplexMatrix {
                    rows: self.cols,
                    cols: self.rows,
                    storage: Storage::Sparse(a),
                }
            }
        }
    }

    pub fn matvec(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        match &self.storage {
            Storage::Dense(m) => m * v,
            Storage::Sparse(t) => {
                let mut out = DVector::zeros(self.rows);
                for &(i, j, a) in t {
                    out[i] += a * v[j];
                }
                out
            }
        }
    }

    /// `A* v`.
    pub fn adjoint_matvec(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.rows, "adjoint matvec dimension mismatch");
        match &self.storage {
            Storage::Dense(m) => m.ad_mul(v),
            Storage::Sparse(t) => {
                let mut out = DVector::zeros(self.cols);
                for &(i, j, a) in t {
                    out[j] += a.conj() * v[i];
                }
                out
            }
        }
    }

    /// Squared Euclidean norms of the rows.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.rows];
        for (i, _, v) in self.iter_nonzero() {
            r[i] += v.norm_sqr();
        }
        r
    }

    pub fn col_norms_sq(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.cols];
        for (_, j, v) in self.iter_nonzero() {
            c[j] += v.norm_sqr();
        }
        c
    }

    fn iter_nonzero(&self) -> Box<dyn Iterator<Item = (usize, usize, C64)> + '_> {
        match &self.storage {
            Storage::Dense(m) => {
                let rows = self.rows;
                Box::new(
                    m.iter()
                        .enumerate()
                        .map(move |(k, v)| (k % rows, k / rows, *v))
                        .filter(|e| e.2 != ZERO),
                )
            }
            Storage::Sparse(t) => Box::new(t.iter().copied()),
        }
    }

    /// Multiply rows by `left[i]` and columns by `right[j]` without densifying.
    pub fn scale_rows_cols(&self, left: &[C64], right: &[C64]) -> Self {
        assert_eq!(left.len(), self.rows);
        assert_eq!(right.len(), self.cols);
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(DMatrix::from_fn(self.rows, self.cols, |i, j| {
                left[i] * m[(i, j)] * right[j]
            })),
            Storage::Sparse(t) => Storage::Sparse(
                t.iter()
                    .map(|&(i, j, v)| (i, j, left[i] * v * right[j]))
                    .collect(),
            ),
        };
        ComplexMatrix { storage, ..*self }
    }
}

impl From<DMatrix<C64>> for ComplexMatrix {
    fn from(m: DMatrix<C64>) -> Self {
        Self::from_dense(m)
    }
}

/// `sqrt(Σ |a_ij|²)`.
pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    match a.storage() {
        Storage::Dense(m) => m.norm(),
        Storage::Sparse(t) => t.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt(),
    }
}

/// Thin singular value decomposition `A = U Σ V*` with nonincreasing `Σ`.
#[derive(Clone, Debug)]
pub struct SvdFactorization {
    pub left_vectors: DMatrix<C64>,
    pub singular_values: Vec<f64>,
    pub right_vectors: DMatrix<C64>,
    /// Singular values at or below this threshold count as zero.
    pub rank_tolerance: f64,
}

impl SvdFactorization {
    pub fn rank(&self) -> usize {
        self.singular_values
            .iter()
            .filter(|&&s| s > self.rank_tolerance)
            .count()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value above the rank threshold.
    pub fn sigma_min_nonzero(&self) -> f64 {
        let r = self.rank();
        if r == 0 {
            0.0
        } else {
            self.singular_values[r - 1]
        }
    }

    pub fn pseudoinverse(&self) -> DMatrix<C64> {
        let (m, n) = (self.left_vectors.nrows(), self.right_vectors.nrows());
        let r = self.rank();
        let mut out = DMatrix::zeros(n, m);
        for k in 0..r {
            let s = 1.0 / self.singular_values[k];
            let v = self.right_vectors.column(k);
            let u = self.left_vectors.column(k);
            out += (v * u.adjoint()) * C64::new(s, 0.0);
        }
        out
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            self.singular_values.len(),
            self.singular_values.iter().map(|&s| C64::new(s, 0.0)),
        ));
        &self.left_vectors * sigma * self.right_vectors.adjoint()
    }
}

/// Default relative rank threshold `max(m, n) · ε`.
pub fn default_rcond(m: usize, n: usize) -> f64 {
    m.max(n) as f64 * f64::EPSILON
}

pub fn svd_dense(a: &DMatrix<C64>, rcond: Option<f64>) -> SvdFactorization {
    let (m, n) = a.shape();
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left_vectors = DMatrix::from_fn(m, order.len(), |i, k| u[(i, order[k])]);
    let right_vectors = DMatrix::from_fn(n, order.len(), |j, k| v_t[(order[k], j)].conj());
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    SvdFactorization {
        left_vectors,
        singular_values,
        right_vectors,
        rank_tolerance: rcond.unwrap_or_else(|| default_rcond(m, n)) * sigma_max,
    }
}

pub fn svd(a: &ComplexMatrix, rcond: Option<f64>) -> Result<SvdFactorization> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    Ok(svd_dense(&a.dense(), rcond))
}

/// Moore–Penrose pseudoinverse; singular values below `rcond · σ_max` are
/// treated as zero.
pub fn pseudoinverse(a: &ComplexMatrix, rcond: Option<f64>) -> Result<ComplexMatrix> {
    Ok(ComplexMatrix::from_dense(svd(a, rcond)?.pseudoinverse()))
}

/// `κ_F(A) = ‖A‖_F ‖A†‖_F`.
pub fn condition_frobenius(a: &ComplexMatrix) -> Result<f64> {
    let f = svd(a, None)?;
    let r = f.rank();
    let inv: f64 = f.singular_values[..r].iter().map(|s| s.powi(-2)).sum();
    Ok(frobenius_norm(a) * inv.sqrt())
}

/// `κ(A) = σ_max / σ_min`, with `σ_min` the smallest nonzero singular value.
pub fn condition_euclidean(a: &ComplexMatrix) -> Result<f64> {
    let f = svd(a, None)?;
    Ok(f.sigma_max() / f.sigma_min_nonzero())
}

/// Skeel condition number `‖ |A†| |A| ‖_∞`.
pub fn condition_skeel(a: &ComplexMatrix) -> Result<f64> {
    let pinv = svd(a, None)?.pseudoinverse();
    let abs_a = a.dense().map(|v| v.norm());
    let prod = pinv.map(|v| v.norm()) * abs_a;
    Ok(prod
        .row_iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(0.0, f64::max))
}

/// Cross condition number `‖A‖_F ‖B‖_F`.
pub fn condition_cross(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    Ok(frobenius_norm(a) * frobenius_norm(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobiMode {
    /// `diag(A)⁻¹ A`
    Left,
    /// `diag(A)^{-1/2} A diag(A)^{-1/2}`
    TwoSided,
}

pub fn jacobi_precondition(a: &ComplexMatrix, mode: JacobiMode) -> Result<ComplexMatrix> {
    let (m, n) = a.shape();
    if m != n {
        return Err(Error::dims(format!("Jacobi scaling needs a square matrix, got {m}x{n}")));
    }
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = a.get(i, i);
        if v == ZERO {
            return Err(Error::ZeroDiagonalEntry(i));
        }
        d.push(v);
    }
    Ok(match mode {
        JacobiMode::Left => {
            let left: Vec<C64> = d.iter().map(|v| v.inv()).collect();
            a.scale_rows_cols(&left, &vec![ONE; n])
        }
        JacobiMode::TwoSided => {
            let s: Vec<C64> = d.iter().map(|v| v.sqrt().inv()).collect();
            a.scale_rows_cols(&s, &s)
        }
    })
}

/// Diagonal scalings `(X, Y)` so that `|X A Y⁻¹|` has constant row sums and
/// constant column sums. Normalized so that `X₁₁ = 1`.
#[derive(Clone, Debug)]
pub struct SinkhornScaling {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SinkhornScaling {
    /// `X A Y⁻¹`.
    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let left: Vec<C64> = self.x.iter().map(|&v| C64::new(v, 0.0)).collect();
        let right: Vec<C64> = self.y.iter().map(|&v| C64::new(1.0 / v, 0.0)).collect();
        a.scale_rows_cols(&left, &right)
    }
}

pub fn sinkhorn_equilibrate(
    a: &ComplexMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<SinkhornScaling> {
    let (m, n) = a.shape();
    let entries: Vec<(usize, usize, f64)> = a
        .triplets()
        .into_iter()
        .map(|(i, j, v)| (i, j, v.norm()))
        .filter(|e| e.2 > 0.0)
        .collect();
    let mut row_mass = vec![0.0; m];
    let mut col_mass = vec![0.0; n];
    for &(i, j, v) in &entries {
        row_mass[i] += v;
        col_mass[j] += v;
    }
    if let Some(i) = row_mass.iter().position(|&r| r == 0.0) {
        return Err(Error::ZeroRowOrColumn(i));
    }
    if let Some(j) = col_mass.iter().position(|&c| c == 0.0) {
        return Err(Error::ZeroRowOrColumn(j));
    }

    // rows sum to 1, columns to m/n
    let col_target = m as f64 / n as f64;
    let mut x = vec![1.0; m];
    let mut y = vec![1.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut r = vec![0.0; m];
        for &(i, j, v) in &entries {
            r[i] += x[i] * v / y[j];
        }
        for i in 0..m {
            x[i] /= r[i];
        }
        let mut c = vec![0.0; n];
        for &(i, j, v) in &entries {
            c[j] += x[i] * v / y[j];
        }
        for j in 0..n {
            y[j] *= c[j] / col_target;
        }
        let mut r = vec![0.0; m];
        for &(i, j, v) in &entries {
            r[i] += x[i] * v / y[j];
        }
        let err = r.iter().map(|ri| (ri - 1.0).abs()).fold(0.0, f64::max);
        if err <= tol {
            converged = true;
            break;
        }
    }
    let x0 = x[0];
    x.iter_mut().for_each(|v| *v /= x0);
    y.iter_mut().for_each(|v| *v /= x0);
    Ok(SinkhornScaling {
        x,
        y,
        iterations,
        converged,
    })
}

/// Left diagonal scaling that gives every row unit ℓ2 norm.
pub fn row_balance_l2(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let norms = a.row_norms_sq();
    if let Some(i) = norms.iter().position(|&r| r == 0.0) {
        return Err(Error::ZeroRowOrColumn(i));
    }
    let left: Vec<C64> = norms.iter().map(|r| C64::new(r.sqrt().recip(), 0.0)).collect();
    Ok(a.scale_rows_cols(&left, &vec![ONE; a.ncols()]))
}

/// Apply a real scalar function to the eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_function(h: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let n = h.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, C64::new(f(h[(0, 0)].re), 0.0));
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

pub(crate) fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigenvalues().iter().copied().collect()
}

/// `Re tr(A* B)`.
pub(crate) fn re_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian_matrix, random_unitary, substream};

    fn example1() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 3.0, 1.0]])
    }

    #[test]
    fn frobenius_examples() {
        assert!((frobenius_norm(&ComplexMatrix::identity(3)) - 3f64.sqrt()).abs() < 1e-15);
        assert!((frobenius_norm(&example1()) - 21f64.sqrt()).abs() < 1e-14);
        let z = ComplexMatrix::from_dense(DMatrix::zeros(2, 3));
        assert_eq!(frobenius_norm(&z), 0.0);
    }

    #[test]
    fn pseudoinverse_examples() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let p = pseudoinverse(&d, None).unwrap().to_dense();
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-15 && (p[(1, 1)].re - 0.5).abs() < 1e-15);

        let proj = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let p = pseudoinverse(&proj, None).unwrap().to_dense();
        assert!((p - proj.to_dense()).norm() < 1e-15);

        let mut rng = substream(3, 0);
        let a = complex_gaussian_matrix(&mut rng, 5, 3);
        let p = pseudoinverse(&ComplexMatrix::from_dense(a.clone()), None)
            .unwrap()
            .to_dense();
        assert!((&a * &p * &a - &a).norm() / a.norm() <= 1e-10);
        assert!((&p * &a * &p - &p).norm() / p.norm() <= 1e-10);
        let ap = &a * &p;
        assert!((ap.adjoint() - &ap).norm() <= 1e-10);
        let pa = &p * &a;
        assert!((pa.adjoint() - &pa).norm() <= 1e-10);

        let zero = ComplexMatrix::from_dense(DMatrix::zeros(2, 2));
        assert_eq!(pseudoinverse(&zero, None), Err(Error::ZeroMatrix));
    }

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let mut rng = substream(4, 0);
        let a = complex_gaussian_matrix(&mut rng, 6, 4);
        let f = svd_dense(&a, None);
        assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!((f.reconstruct() - &a).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn frobenius_condition_examples() {
        for n in 1..5 {
            let k = condition_frobenius(&ComplexMatrix::identity(n)).unwrap();
            assert!((k - n as f64).abs() < 1e-12);
        }
        let k = condition_frobenius(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0])).unwrap();
        assert!((k - 2.5).abs() < 1e-14);
        let mut rng = substream(5, 0);
        let u = random_unitary(&mut rng, 4);
        let k = condition_frobenius(&ComplexMatrix::from_dense(u)).unwrap();
        assert!((k - 4.0).abs() < 1e-10);
    }

    #[test]
    fn euclidean_condition_of_worked_example() {
        let a = example1();
        assert!((condition_euclidean(&a).unwrap() - 11.77).abs() < 0.01);
        let left = jacobi_precondition(&a, JacobiMode::Left).unwrap();
        assert!((condition_euclidean(&left).unwrap() - 15.35).abs() < 0.01);
        let two = jacobi_precondition(&a, JacobiMode::TwoSided).unwrap();
        assert!((condition_euclidean(&two).unwrap() - 12.59).abs() < 0.01);
    }

    #[test]
    fn skeel_examples() {
        let d = ComplexMatrix::from_real_diagonal(&[2.0, -7.0, 0.1]);
        assert!((condition_skeel(&d).unwrap() - 1.0).abs() < 1e-14);
        assert!((condition_skeel(&ComplexMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-14);

        let mut rng = substream(6, 0);
        let a = complex_gaussian_matrix(&mut rng, 4, 4);
        let x = [0.3, 5.0, -2.0, 1.7];
        let xa = ComplexMatrix::from_dense(a.clone())
            .scale_rows_cols(&x.map(c), &[ONE; 4]);
        let k0 = condition_skeel(&ComplexMatrix::from_dense(a)).unwrap();
        let k1 = condition_skeel(&xa).unwrap();
        assert!((k0 - k1).abs() <= 1e-10 * k0);
    }

    #[test]
    fn cross_condition_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert!((condition_cross(&i3, &i3).unwrap() - 3.0).abs() < 1e-14);
        let a = example1();
        let p = pseudoinverse(&a, None).unwrap();
        let kc = condition_cross(&a, &p).unwrap();
        assert!((kc - condition_frobenius(&a).unwrap()).abs() < 1e-12 * kc);
        let k2 = condition_cross(&a.scale(c(2.0)), &p).unwrap();
        assert!((k2 - 2.0 * kc).abs() < 1e-12 * kc);
    }

    #[test]
    fn jacobi_examples() {
        let left = jacobi_precondition(&example1(), JacobiMode::Left).unwrap();
        let expected =
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 3.0, 1.0]]);
        assert!((left.to_dense() - expected.to_dense()).norm() < 1e-15);

        let i3 = ComplexMatrix::identity(3);
        for mode in [JacobiMode::Left, JacobiMode::TwoSided] {
            assert_eq!(jacobi_precondition(&i3, mode).unwrap(), i3);
        }
        let d = ComplexMatrix::from_real_diagonal(&[4.0, 9.0]);
        let s = jacobi_precondition(&d, JacobiMode::TwoSided).unwrap();
        assert!((s.to_dense() - DMatrix::identity(2, 2)).norm() < 1e-15);

        let z = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 0.0]]);
        assert_eq!(
            jacobi_precondition(&z, JacobiMode::Left),
            Err(Error::ZeroDiagonalEntry(1))
        );
    }

    #[test]
    fn sinkhorn_examples() {
        let ds = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let s = sinkhorn_equilibrate(&ds, 100, 1e-12).unwrap();
        assert!(s.converged);
        assert!(s.x.iter().chain(&s.y).all(|v| (v - 1.0).abs() < 1e-12));

        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 3.0]]);
        let s = sinkhorn_equilibrate(&a, 1000, 1e-10).unwrap();
        assert!(s.converged);
        assert_eq!(s.x[0], 1.0);
        let b = s.apply(&a).to_dense().map(|v| v.norm());
        let rows: Vec<f64> = b.row_iter().map(|r| r.sum()).collect();
        let cols: Vec<f64> = b.column_iter().map(|c| c.sum()).collect();
        for v in rows.iter().chain(&cols) {
            assert!((v - rows[0]).abs() <= 1e-9 * rows[0]);
        }

        let zr = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 0.0]]);
        assert_eq!(sinkhorn_equilibrate(&zr, 10, 1e-8).unwrap_err(), Error::ZeroRowOrColumn(1));
    }

    #[test]
    fn row_balance_gives_unit_rows() {
        let b = row_balance_l2(&example1()).unwrap();
        assert!(b.row_norms_sq().iter().all(|r| (r - 1.0).abs() < 1e-14));
    }

    #[test]
    fn sparse_and_dense_agree() {
        let a = example1();
        let s = a.to_sparse();
        assert!(s.is_sparse());
        assert_eq!(frobenius_norm(&a), frobenius_norm(&s));
        for f in [condition_frobenius, condition_euclidean, condition_skeel] {
            let (x, y) = (f(&a).unwrap(), f(&s).unwrap());
            assert!((x - y).abs() <= 1e-12 * x);
        }
        let v = DVector::from_fn(3, |i, _| C64::new(i as f64, 1.0));
        assert!((a.matvec(&v) - s.matvec(&v)).norm() < 1e-14);
        assert!((a.adjoint_matvec(&v) - s.adjoint_matvec(&v)).norm() < 1e-14);
    }

    #[test]
    fn triplets_are_canonicalized() {
        let t = vec![(1, 1, c(1.0)), (0, 0, c(2.0)), (1, 1, c(3.0))];
        let a = ComplexMatrix::from_triplets(2, 2, t).unwrap();
        assert_eq!(a.triplets(), vec![(0, 0, c(2.0)), (1, 1, c(4.0))]);
        assert!(ComplexMatrix::from_triplets(2, 2, vec![(2, 0, ONE)]).is_err());
    }
}
