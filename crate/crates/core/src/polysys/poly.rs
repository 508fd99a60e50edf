use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix, C64, ZERO};

/// Exponent vector ordered graded-lexicographically: lower total degree
/// first, then lexicographically descending (`x² < xy < y²` within degree 2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! / |α|!`, the Bombieri–Weyl weight of `x^α`.
    pub fn bw_weight(&self) -> f64 {
        // reciprocal of the multinomial coefficient, built from binomials
        let mut total = 0u32;
        let mut w = 1.0;
        for &a in &self.0 {
            for k in 1..=a {
                total += 1;
                w *= k as f64 / total as f64;
            }
        }
        w
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.0
            .iter()
            .zip(x)
            .fold(c(1.0), |acc, (&a, &xk)| acc * xk.powu(a))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Every exponent vector in `nvars` variables of total degree at most
/// `degree`, in graded-lex order.
pub fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Monomial> {
    fn rec(prefix: &mut Vec<u32>, left: usize, budget: u32, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(Monomial(prefix.clone()));
            return;
        }
        for a in 0..=budget {
            prefix.push(a);
            rec(prefix, left - 1, budget - a, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(nvars), nvars, degree, &mut out);
    out.sort();
    out
}

/// Sparse polynomial in `nvars` complex variables. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// Sum the given terms. Panics if an exponent vector has the wrong
    /// length.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Self {
        let mut p = Polynomial::zero(nvars);
        for (e, v) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e), v);
        }
        p
    }

    /// Real coefficients, convenient for tests and examples.
    pub fn from_real(nvars: usize, terms: &[(&[u32], f64)]) -> Self {
        Self::from_terms(nvars, terms.iter().map(|(e, v)| (e.to_vec(), c(*v))))
    }

    /// The variable `x_k`.
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Self::from_terms(nvars, [(e, c(1.0))])
    }

    pub fn constant(nvars: usize, v: C64) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], v)])
    }

    pub(crate) fn add_term(&mut self, m: Monomial, v: C64) {
        if v == ZERO {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += v;
                if *e.get() == ZERO {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(v);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> C64 {
        self.terms.get(&Monomial(e.to_vec())).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<Monomial> {
        self.terms.keys().cloned().collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), v * s);
        }
        p
    }

    pub fn add(&self, other: &Polynomial) -> Self {
        let mut p = self.clone();
        p.add_scaled(other, c(1.0));
        p
    }

    pub(crate) fn add_scaled(&mut self, other: &Polynomial, s: C64) {
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v * s);
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        for (a, u) in &self.terms {
            for (b, v) in &other.terms {
                let e = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                p.add_term(Monomial(e), u * v);
            }
        }
        p
    }

    /// Apply `f` to every coefficient, keyed by its monomial.
    pub fn map_coeffs(&self, mut f: impl FnMut(&Monomial, C64) -> C64) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), f(m, *v));
        }
        p
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.terms.iter().map(|(m, v)| v * m.eval(x)).sum()
    }

    /// `∂/∂x_k`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        for (m, v) in &self.terms {
            let a = m.0[k];
            if a > 0 {
                let mut e = m.0.clone();
                e[k] -= 1;
                p.add_term(Monomial(e), v * c(a as f64));
            }
        }
        p
    }

    /// `x_l ∂/∂x_k`, which preserves the degree of every term.
    pub fn euler_term(&self, l: usize, k: usize) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        for (m, v) in &self.terms {
            let a = m.0[k];
            if a > 0 {
                let mut e = m.0.clone();
                e[k] -= 1;
                e[l] += 1;
                p.add_term(Monomial(e), v * c(a as f64));
            }
        }
        p
    }

    pub fn gradient_at(&self, x: &[C64]) -> Vec<C64> {
        let mut g = vec![ZERO; self.nvars];
        for (m, v) in &self.terms {
            for k in 0..self.nvars {
                let a = m.0[k];
                if a == 0 {
                    continue;
                }
                let mut term = *v * c(a as f64);
                for (j, (&b, &xj)) in m.0.iter().zip(x).enumerate() {
                    let p = if j == k { b - 1 } else { b };
                    term *= xj.powu(p);
                }
                g[k] += term;
            }
        }
        g
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if v.im == 0.0 {
                write!(f, "{}", v.re)?;
            } else {
                write!(f, "({}{:+}i)", v.re, v.im)?;
            }
            for (k, &a) in m.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => write!(f, "*x{}", k + 1)?,
                    _ => write!(f, "*x{}^{a}", k + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// Bombieri–Weyl inner product `Σ_α f_α conj(g_α) α!/|α|!`, linear in the
/// first argument. Monomials of different degree are orthogonal.
pub fn bw_inner(f: &Polynomial, g: &Polynomial) -> C64 {
    f.terms
        .iter()
        .filter_map(|(m, a)| g.terms.get(m).map(|b| a * b.conj() * c(m.bw_weight())))
        .sum()
}

/// System `f = (f₁, …, f_m)` in `n` variables with degree pattern `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSystem {
    nvars: usize,
    polys: Vec<Polynomial>,
    degrees: Vec<u32>,
}

impl PolynomialSystem {
    pub fn new(nvars: usize, polys: Vec<Polynomial>, degrees: Vec<u32>) -> Result<Self> {
        if polys.len() != degrees.len() {
            return Err(Error::dims(format!(
                "{} polynomials but {} degrees",
                polys.len(),
                degrees.len()
            )));
        }
        for (i, (p, &d)) in polys.iter().zip(&degrees).enumerate() {
            if p.nvars() != nvars {
                return Err(Error::dims(format!(
                    "polynomial {i} has {} variables, expected {nvars}",
                    p.nvars()
                )));
            }
            if let Some((m, _)) = p.terms().find(|(m, _)| m.degree() > d) {
                return Err(Error::DegreeViolation {
                    poly: i,
                    term: format!("{:?}", m.0),
                });
            }
        }
        Ok(PolynomialSystem {
            nvars,
            polys,
            degrees,
        })
    }

    /// Degree pattern taken from the actual degrees (at least 1).
    pub fn from_polys(nvars: usize, polys: Vec<Polynomial>) -> Result<Self> {
        let degrees = polys.iter().map(|p| p.degree().max(1)).collect();
        Self::new(nvars, polys, degrees)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// `D = max_i d_i`.
    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub(crate) fn with_polys(&self, polys: Vec<Polynomial>) -> Self {
        PolynomialSystem {
            nvars: self.nvars,
            polys,
            degrees: self.degrees.clone(),
        }
    }

    /// Gram matrix `G_ij = ⟨f_i, f_j⟩`.
    pub fn gram(&self) -> DMatrix<C64> {
        let m = self.len();
        DMatrix::from_fn(m, m, |i, j| bw_inner(&self.polys[i], &self.polys[j]))
    }
}

/// `‖f‖_W = sqrt(Σ ⟨f_i, f_i⟩)`.
pub fn bw_norm_system(f: &PolynomialSystem) -> f64 {
    f.polys
        .iter()
        .map(|p| bw_inner(p, p).re)
        .sum::<f64>()
        .sqrt()
}

/// Values and Jacobian of a system at a point.
#[derive(Clone, Debug)]
pub struct EvaluatedPoint {
    pub xi: Vec<C64>,
    pub values: Vec<C64>,
    pub jacobian: ComplexMatrix,
}

pub fn evaluate_system(f: &PolynomialSystem, xi: &[C64]) -> Result<EvaluatedPoint> {
    if xi.len() != f.nvars {
        return Err(Error::dims(format!(
            "point has {} coordinates, system has {} variables",
            xi.len(),
            f.nvars
        )));
    }
    let values = f.polys.iter().map(|p| p.eval(xi)).collect();
    let rows: Vec<Vec<C64>> = f.polys.iter().map(|p| p.gradient_at(xi)).collect();
    let jac = DMatrix::from_fn(f.len(), f.nvars, |i, k| rows[i][k]);
    Ok(EvaluatedPoint {
        xi: xi.to_vec(),
        values,
        jacobian: ComplexMatrix::from_dense(jac),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Frobenius,
    Operator,
}

/// `μ(f, ξ) = ‖f‖_W ‖D_ξ(f)†‖` in the chosen matrix norm.
pub fn local_condition(f: &PolynomialSystem, xi: &[C64], norm: NormKind) -> Result<f64> {
    let ev = evaluate_system(f, xi)?;
    if ev.jacobian.is_zero() {
        return Err(Error::ZeroJacobian);
    }
    let svd = crate::matrix::svd(&ev.jacobian, None)?;
    let r = svd.rank();
    let s = &svd.singular_values[..r];
    let pinv_norm = match norm {
        NormKind::Frobenius => s.iter().map(|v| v.powi(-2)).sum::<f64>().sqrt(),
        NormKind::Operator => 1.0 / s[r - 1],
    };
    Ok(bw_norm_system(f) * pinv_norm)
}
