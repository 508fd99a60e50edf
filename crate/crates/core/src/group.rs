//! Block-diagonal preconditioner groups `G ≤ GL_m × GL_n`, their Hermitian
//! tangent directions, the exponential action and the weight constants that
//! enter the duality certificate.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{c, hermitian_function, re_inner, ComplexMatrix, C64, ONE, ZERO};

/// Partition of `0..dim` into contiguous blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    sizes: Vec<usize>,
}

impl BlockPartition {
    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "block sizes must be positive and nonempty".into(),
            ));
        }
        Ok(BlockPartition { sizes })
    }

    /// `dim` blocks of size one: the diagonal torus.
    pub fn diagonal(dim: usize) -> Self {
        BlockPartition {
            sizes: vec![1; dim],
        }
    }

    /// One block covering everything: the full linear group.
    pub fn full(dim: usize) -> Self {
        BlockPartition { sizes: vec![dim] }
    }

    /// Blocks of size `k`; the last block takes the remainder.
    pub fn uniform(dim: usize, k: usize) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::InvalidArgument("block size must be positive".into()));
        }
        let mut sizes = vec![k; dim / k];
        if !dim.is_multiple_of(k) {
            sizes.push(dim % k);
        }
        Ok(BlockPartition { sizes })
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.sizes.iter().all(|&s| s == 1)
    }

    /// `(offset, size)` of every block.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sizes.iter().scan(0, |off, &s| {
            let start = *off;
            *off += s;
            Some((start, s))
        })
    }

    /// Index of the block containing each coordinate.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for (b, &s) in self.sizes.iter().enumerate() {
            out.extend(std::iter::repeat_n(b, s));
        }
        out
    }

    /// True when entry `(i, j)` lies inside a diagonal block.
    pub fn same_block(&self, i: usize, j: usize) -> bool {
        let b = self.block_of();
        b[i] == b[j]
    }

    /// Copy of `m` with every entry outside the block pattern set to zero.
    pub fn mask(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for (o, s) in self.blocks() {
            out.view_mut((o, o), (s, s)).copy_from(&m.view((o, o), (s, s)));
        }
        out
    }

    /// `M v` for `M` block-diagonal under this partition, touching only the
    /// diagonal blocks.
    pub fn apply(&self, m: &DMatrix<C64>, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        for (o, s) in self.blocks() {
            if s == 1 {
                out[o] = m[(o, o)] * v[o];
            } else {
                out.rows_mut(o, s).copy_from(&(m.view((o, o), (s, s)) * v.rows(o, s)));
            }
        }
        out
    }

    /// Apply `f` to each diagonal block and reassemble.
    pub fn map_blocks(
        &self,
        m: &DMatrix<C64>,
        mut f: impl FnMut(usize, DMatrix<C64>) -> Result<DMatrix<C64>>,
    ) -> Result<DMatrix<C64>> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (b, (o, s)) in self.blocks().enumerate() {
            let blk = f(b, m.view((o, o), (s, s)).into_owned())?;
            out.view_mut((o, o), (s, s)).copy_from(&blk);
        }
        Ok(out)
    }

    fn conforms(&self, m: &DMatrix<C64>) -> bool {
        let b = self.block_of();
        m.nrows() == self.dim()
            && m.ncols() == self.dim()
            && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| b[i] == b[j] || m[(i, j)] == ZERO))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    LeftOnly,
    LeftRight,
}

/// Structure of the preconditioner group acting on `m × n` matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupScheme {
    side: Side,
    left: BlockPartition,
    right: Option<BlockPartition>,
    n: usize,
}

impl GroupScheme {
    /// Left-only scheme acting on `m × n` matrices by `A ↦ XA`.
    pub fn left_only(left: BlockPartition, n: usize) -> Self {
        GroupScheme {
            side: Side::LeftOnly,
            left,
            right: None,
            n,
        }
    }

    pub fn left_right(left: BlockPartition, right: BlockPartition) -> Self {
        let n = right.dim();
        GroupScheme {
            side: Side::LeftRight,
            left,
            right: Some(right),
            n,
        }
    }

    pub fn diagonal(side: Side, m: usize, n: usize) -> Self {
        match side {
            Side::LeftOnly => Self::left_only(BlockPartition::diagonal(m), n),
            Side::LeftRight => {
                Self::left_right(BlockPartition::diagonal(m), BlockPartition::diagonal(n))
            }
        }
    }

    pub fn block(side: Side, m: usize, n: usize, k: usize) -> Result<Self> {
        Ok(match side {
            Side::LeftOnly => Self::left_only(BlockPartition::uniform(m, k)?, n),
            Side::LeftRight => Self::left_right(
                BlockPartition::uniform(m, k)?,
                BlockPartition::uniform(n, k)?,
            ),
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn is_left_only(&self) -> bool {
        self.side == Side::LeftOnly
    }

    pub fn m(&self) -> usize {
        self.left.dim()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn left(&self) -> &BlockPartition {
        &self.left
    }

    pub fn right(&self) -> Option<&BlockPartition> {
        self.right.as_ref()
    }

    pub fn is_diagonal(&self) -> bool {
        self.left.is_diagonal() && self.right.as_ref().is_none_or(|r| r.is_diagonal())
    }

    /// Smoothness constant of the log-condition objective: 4 for left-only
    /// schemes, 8 for left-right schemes.
    pub fn smoothness(&self) -> f64 {
        match self.side {
            Side::LeftOnly => 4.0,
            Side::LeftRight => 8.0,
        }
    }

    pub fn check_matrix(&self, a: &ComplexMatrix) -> Result<()> {
        if a.nrows() != self.m() || a.ncols() != self.n {
            return Err(Error::dims(format!(
                "scheme acts on {}x{} matrices, got {}x{}",
                self.m(),
                self.n,
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(())
    }

    /// Real dimension of the Hermitian tangent space.
    pub fn lie_dim(&self) -> usize {
        let sq = |p: &BlockPartition| p.sizes().iter().map(|s| s * s).sum::<usize>();
        sq(&self.left) + self.right.as_ref().map_or(0, sq)
    }

    /// Orthonormal basis of the Hermitian tangent space: per block `E_kk`,
    /// `(E_kl + E_lk)/√2` and `i(E_kl − E_lk)/√2` for `k < l`.
    pub fn lie_basis(&self) -> Vec<LieDirection> {
        let mut out = Vec::with_capacity(self.lie_dim());
        let zero1 = DMatrix::zeros(self.m(), self.m());
        let zero2 = DMatrix::zeros(self.n, self.n);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let elementary = |p: &BlockPartition| {
            let d = p.dim();
            let mut v = Vec::new();
            for (o, s) in p.blocks() {
                for k in o..o + s {
                    let mut e = DMatrix::zeros(d, d);
                    e[(k, k)] = ONE;
                    v.push(e);
                    for l in k + 1..o + s {
                        let mut e = DMatrix::zeros(d, d);
                        e[(k, l)] = c(r);
                        e[(l, k)] = c(r);
                        v.push(e);
                        let mut e = DMatrix::zeros(d, d);
                        e[(k, l)] = C64::new(0.0, r);
                        e[(l, k)] = C64::new(0.0, -r);
                        v.push(e);
                    }
                }
            }
            v
        };
        for h1 in elementary(&self.left) {
            out.push(LieDirection {
                scheme: self.clone(),
                h1,
                h2: zero2.clone(),
            });
        }
        if let Some(right) = &self.right {
            for h2 in elementary(right) {
                out.push(LieDirection {
                    scheme: self.clone(),
                    h1: zero1.clone(),
                    h2,
                });
            }
        }
        out
    }
}

/// Hermitian block-diagonal direction `(H₁, H₂)`. `H₂ = 0` for left-only
/// schemes.
#[derive(Clone, Debug, PartialEq)]
pub struct LieDirection {
    scheme: GroupScheme,
    pub(crate) h1: DMatrix<C64>,
    pub(crate) h2: DMatrix<C64>,
}

impl LieDirection {
    pub fn zero(scheme: &GroupScheme) -> Self {
        LieDirection {
            scheme: scheme.clone(),
            h1: DMatrix::zeros(scheme.m(), scheme.m()),
            h2: DMatrix::zeros(scheme.n(), scheme.n()),
        }
    }

    /// Build from explicit matrices, checking the block pattern and the
    /// Hermitian property.
    pub fn new(scheme: &GroupScheme, h1: DMatrix<C64>, h2: Option<DMatrix<C64>>) -> Result<Self> {
        let h2 = h2.unwrap_or_else(|| DMatrix::zeros(scheme.n(), scheme.n()));
        let herm = |h: &DMatrix<C64>| (h - h.adjoint()).norm() <= 1e-12 * (1.0 + h.norm());
        if !scheme.left.conforms(&h1) || !herm(&h1) {
            return Err(Error::dims("H1 is not Hermitian block-diagonal for the scheme"));
        }
        match &scheme.right {
            Some(r) if !r.conforms(&h2) || !herm(&h2) => {
                return Err(Error::dims("H2 is not Hermitian block-diagonal for the scheme"))
            }
            None if h2.shape() != (scheme.n(), scheme.n()) || h2.iter().any(|v| *v != ZERO) => {
                return Err(Error::dims("left-only directions have H2 = 0"))
            }
            _ => {}
        }
        Ok(LieDirection {
            scheme: scheme.clone(),
            h1,
            h2,
        })
    }

    /// Gaussian random direction: every free real coordinate standard normal.
    pub fn random<R: Rng + ?Sized>(scheme: &GroupScheme, rng: &mut R) -> Self {
        let mut h1 = DMatrix::zeros(scheme.m(), scheme.m());
        let mut h2 = DMatrix::zeros(scheme.n(), scheme.n());
        let mut fill = |p: &BlockPartition, h: &mut DMatrix<C64>| {
            for (o, s) in p.blocks() {
                for k in o..o + s {
                    h[(k, k)] = c(rng.sample(StandardNormal));
                    for l in k + 1..o + s {
                        let v = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                        h[(k, l)] = v;
                        h[(l, k)] = v.conj();
                    }
                }
            }
        };
        fill(&scheme.left, &mut h1);
        if let Some(r) = &scheme.right {
            fill(r, &mut h2);
        }
        LieDirection {
            scheme: scheme.clone(),
            h1,
            h2,
        }
    }

    pub fn scheme(&self) -> &GroupScheme {
        &self.scheme
    }

    pub fn h1(&self) -> &DMatrix<C64> {
        &self.h1
    }

    pub fn h2(&self) -> &DMatrix<C64> {
        &self.h2
    }

    /// `Re tr(H₁* K₁) + Re tr(H₂* K₂)`.
    pub fn inner(&self, other: &LieDirection) -> f64 {
        re_inner(&self.h1, &other.h1) + re_inner(&self.h2, &other.h2)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        LieDirection {
            scheme: self.scheme.clone(),
            h1: &self.h1 * c(s),
            h2: &self.h2 * c(s),
        }
    }

    pub fn add(&self, other: &LieDirection) -> Self {
        LieDirection {
            scheme: self.scheme.clone(),
            h1: &self.h1 + &other.h1,
            h2: &self.h2 + &other.h2,
        }
    }

    pub fn trace(&self) -> f64 {
        self.h1.trace().re + self.h2.trace().re
    }

    /// Remove the trace of each component, keeping the direction in the
    /// Lie algebra (scalar matrices belong to every block scheme).
    pub fn traceless(&self) -> Self {
        let m = self.h1.nrows() as f64;
        let n = self.h2.nrows() as f64;
        let t1 = self.h1.trace() / c(m);
        let mut h1 = self.h1.clone();
        for i in 0..h1.nrows() {
            h1[(i, i)] -= t1;
        }
        let mut h2 = self.h2.clone();
        if !self.scheme.is_left_only() && n > 0.0 {
            let t2 = self.h2.trace() / c(n);
            for i in 0..h2.nrows() {
                h2[(i, i)] -= t2;
            }
        }
        LieDirection {
            scheme: self.scheme.clone(),
            h1,
            h2,
        }
    }
}

/// Orthogonal projection of `(M₁, M₂)` onto the Hermitian block-diagonal
/// directions of `scheme`. For left-only schemes `M₂` is ignored and may be
/// empty.
pub fn project_to_lie(
    scheme: &GroupScheme,
    m1: &DMatrix<C64>,
    m2: &DMatrix<C64>,
) -> Result<LieDirection> {
    let (m, n) = (scheme.m(), scheme.n());
    if m1.shape() != (m, m) {
        return Err(Error::dims(format!("M1 must be {m}x{m}, got {:?}", m1.shape())));
    }
    let herm = |p: &BlockPartition, x: &DMatrix<C64>| {
        let masked = p.mask(x);
        (&masked + masked.adjoint()) * c(0.5)
    };
    let h1 = herm(&scheme.left, m1);
    let h2 = match &scheme.right {
        Some(r) => {
            if m2.shape() != (n, n) {
                return Err(Error::dims(format!("M2 must be {n}x{n}, got {:?}", m2.shape())));
            }
            herm(r, m2)
        }
        None => {
            if !m2.is_empty() && m2.shape() != (n, n) {
                return Err(Error::dims(format!("M2 must be {n}x{n} or empty")));
            }
            DMatrix::zeros(n, n)
        }
    };
    Ok(LieDirection {
        scheme: scheme.clone(),
        h1,
        h2,
    })
}

/// Weight norm and weight margin lower bound: `(√2, m^{-3/2})` for left-only and `(2, (m+n)^{-3/2})` for left-right
/// schemes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightData {
    pub weight_norm: f64,
    pub weight_margin: f64,
}

impl WeightData {
    /// Constants for the joint shuffle and change-of-variables action on
    /// systems of maximal degree `degree`: `N = D+2`,
    /// `γ = (D+2)^{1−m−n}/(m+n)`.
    pub fn polynomial(m: usize, n: usize, degree: usize) -> Self {
        let d2 = (degree + 2) as f64;
        WeightData {
            weight_norm: d2,
            weight_margin: d2.powi(1 - (m + n) as i32) / (m + n) as f64,
        }
    }
}

pub fn weight_data(scheme: &GroupScheme) -> WeightData {
    match scheme.side() {
        Side::LeftOnly => WeightData {
            weight_norm: std::f64::consts::SQRT_2,
            weight_margin: (scheme.m() as f64).powf(-1.5),
        },
        Side::LeftRight => WeightData {
            weight_norm: 2.0,
            weight_margin: ((scheme.m() + scheme.n()) as f64).powf(-1.5),
        },
    }
}

/// A point `(X, Y)` of the group, stored as explicit block-diagonal
/// matrices. `Y = I` for left-only schemes.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    scheme: GroupScheme,
    x: DMatrix<C64>,
    y: DMatrix<C64>,
}

impl GroupElement {
    pub fn identity(scheme: &GroupScheme) -> Self {
        GroupElement {
            scheme: scheme.clone(),
            x: DMatrix::identity(scheme.m(), scheme.m()),
            y: DMatrix::identity(scheme.n(), scheme.n()),
        }
    }

    pub fn new(scheme: &GroupScheme, x: DMatrix<C64>, y: Option<DMatrix<C64>>) -> Result<Self> {
        let y = y.unwrap_or_else(|| DMatrix::identity(scheme.n(), scheme.n()));
        if !scheme.left.conforms(&x) {
            return Err(Error::dims("X does not conform to the left block structure"));
        }
        match &scheme.right {
            Some(r) if !r.conforms(&y) => {
                return Err(Error::dims("Y does not conform to the right block structure"))
            }
            None if y != DMatrix::identity(scheme.n(), scheme.n()) => {
                return Err(Error::dims("left-only elements have Y = I"))
            }
            _ => {}
        }
        let g = GroupElement {
            scheme: scheme.clone(),
            x,
            y,
        };
        g.x_inverse()?;
        g.y_inverse()?;
        Ok(g)
    }

    pub fn scheme(&self) -> &GroupScheme {
        &self.scheme
    }

    pub fn x(&self) -> &DMatrix<C64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<C64> {
        &self.y
    }

    pub fn x_inverse(&self) -> Result<DMatrix<C64>> {
        block_inverse(&self.scheme.left, &self.x, 0)
    }

    pub fn y_inverse(&self) -> Result<DMatrix<C64>> {
        match &self.scheme.right {
            Some(r) => block_inverse(r, &self.y, self.scheme.left.num_blocks()),
            None => Ok(DMatrix::identity(self.scheme.n(), self.scheme.n())),
        }
    }

    /// `(X'X, Y'Y)`: act by `self` first, then by `outer`.
    pub fn then(&self, outer: &GroupElement) -> Result<Self> {
        if self.scheme != outer.scheme {
            return Err(Error::dims("group elements from different schemes"));
        }
        Ok(GroupElement {
            scheme: self.scheme.clone(),
            x: &outer.x * &self.x,
            y: &outer.y * &self.y,
        })
    }

    /// `X A Y⁻¹`; sparse inputs stay sparse under diagonal schemes.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.scheme.check_matrix(a)?;
        let yinv = self.y_inverse()?;
        if a.is_sparse() && self.scheme.is_diagonal() {
            let left: Vec<C64> = (0..self.x.nrows()).map(|i| self.x[(i, i)]).collect();
            let right: Vec<C64> = (0..yinv.nrows()).map(|j| yinv[(j, j)]).collect();
            return Ok(a.scale_rows_cols(&left, &right));
        }
        let dense = a.dense();
        let out = if self.scheme.is_left_only() {
            &self.x * dense.as_ref()
        } else {
            &self.x * dense.as_ref() * yinv
        };
        Ok(ComplexMatrix::from_dense(out))
    }

    /// `Y B X⁻¹` for `B` of shape `n × m`: the contragredient action used by
    /// cross objectives.
    pub fn apply_contragredient(&self, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if b.nrows() != self.y.nrows() || b.ncols() != self.x.nrows() {
            return Err(Error::dims(format!(
                "contragredient action expects a {}x{} matrix, got {}x{}",
                self.y.nrows(),
                self.x.nrows(),
                b.nrows(),
                b.ncols()
            )));
        }
        let xinv = self.x_inverse()?;
        Ok(if self.scheme.is_left_only() {
            b * xinv
        } else {
            &self.y * b * xinv
        })
    }

    /// `(e^{step·H₁} X, e^{step·H₂} Y)`, re-polarized.
    pub fn exp_action(&self, h: &LieDirection, step: f64) -> Result<Self> {
        if h.scheme != self.scheme {
            return Err(Error::dims("direction and element belong to different schemes"));
        }
        let e1 = block_exp(&self.scheme.left, &h.h1, step)?;
        let x = e1 * &self.x;
        let y = match &self.scheme.right {
            Some(r) => block_exp(r, &h.h2, step)? * &self.y,
            None => self.y.clone(),
        };
        GroupElement {
            scheme: self.scheme.clone(),
            x,
            y,
        }
        .repolarize()
    }

    /// Replace `X` by the positive factor `(X*X)^{1/2}` of its polar
    /// decomposition `X = U (X*X)^{1/2}`, blockwise, and likewise `Y`. The
    /// objective only depends on the coset `{(UX, VY)}` with `U, V` unitary,
    /// so its value is unchanged.
    pub fn repolarize(&self) -> Result<Self> {
        let polar = |p: &BlockPartition, m: &DMatrix<C64>, base: usize| {
            p.map_blocks(m, |b, blk| {
                if blk.nrows() == 1 {
                    let v = blk[(0, 0)].norm();
                    if v == 0.0 || !v.is_finite() {
                        return Err(Error::SingularBlock { block: base + b });
                    }
                    return Ok(DMatrix::from_element(1, 1, c(v)));
                }
                let gram = blk.ad_mul(&blk);
                let ev = crate::matrix::hermitian_eigenvalues(&gram);
                let hi = ev.iter().cloned().fold(0.0, f64::max);
                let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
                if !(lo > hi * 1e-30) {
                    return Err(Error::SingularBlock { block: base + b });
                }
                Ok(hermitian_function(&gram, |l| l.max(0.0).sqrt()))
            })
        };
        let x = polar(&self.scheme.left, &self.x, 0)?;
        let y = match &self.scheme.right {
            Some(r) => polar(r, &self.y, self.scheme.left.num_blocks())?,
            None => self.y.clone(),
        };
        Ok(GroupElement {
            scheme: self.scheme.clone(),
            x,
            y,
        })
    }

    pub fn x_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_dense(self.x.clone())
    }

    pub fn y_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_dense(self.y.clone())
    }

    /// Block-diagonal matrix as a sparse matrix (what gets written to disk).
    pub fn x_sparse(&self) -> ComplexMatrix {
        self.x_matrix().to_sparse()
    }

    pub fn y_sparse(&self) -> ComplexMatrix {
        self.y_matrix().to_sparse()
    }
}

pub(crate) fn block_inverse(
    p: &BlockPartition,
    m: &DMatrix<C64>,
    block_offset: usize,
) -> Result<DMatrix<C64>> {
    p.map_blocks(m, |b, blk| {
        let singular = Error::SingularBlock {
            block: block_offset + b,
        };
        if blk.nrows() == 1 {
            let v = blk[(0, 0)];
            return if v == ZERO {
                Err(singular)
            } else {
                Ok(DMatrix::from_element(1, 1, v.inv()))
            };
        }
        let inv = blk.clone().try_inverse().ok_or(singular.clone())?;
        if inv.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(inv)
        } else {
            Err(singular)
        }
    })
}

/// Blockwise `exp(step·H)` for Hermitian block-diagonal `H`.
pub(crate) fn block_exp(p: &BlockPartition, h: &DMatrix<C64>, step: f64) -> Result<DMatrix<C64>> {
    p.map_blocks(h, |_, blk| {
        if blk.nrows() == 1 {
            Ok(DMatrix::from_element(1, 1, c((step * blk[(0, 0)].re).exp())))
        } else {
            Ok(hermitian_function(&blk, |l| (step * l).exp()))
        }
    })
}
