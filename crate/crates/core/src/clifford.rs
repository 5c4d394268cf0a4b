//! Dirac matrices, radial null projectors and admissible nonlinearities.
//!
//! Conventions: Minkowski metric `η = diag(-1, 1, …, 1)` and the Clifford
//! relations `γ^μγ^ν + γ^νγ^μ = -2η_{μν} I`, `(γ^μ)* = -η_{μν}γ^ν`. Hence
//! `(γ⁰)² = I`, `(γᵃ)² = -I`, `γ⁰` is Hermitian and each `γᵃ` anti-Hermitian.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::C64;

const MAX_SIZE: usize = 4;

/// Dense complex square matrix of size at most 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix {
    size: usize,
    e: [C64; MAX_SIZE * MAX_SIZE],
}

impl Matrix {
    pub fn zeros(size: usize) -> Self {
        assert!(size <= MAX_SIZE, "matrix size {size} exceeds {MAX_SIZE}");
        Matrix { size, e: [C64::new(0.0, 0.0); MAX_SIZE * MAX_SIZE] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// perfect square no larger than 16.
    pub fn from_row_major(entries: &[C64]) -> Result<Self> {
        let size = (entries.len() as f64).sqrt().round() as usize;
        if size * size != entries.len() || size == 0 || size > MAX_SIZE {
            return Err(Error::SizeMismatch { expected: 16, actual: entries.len() });
        }
        let mut m = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                m.set(i, j, entries[i * size + j]);
            }
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.e[i * MAX_SIZE + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.e[i * MAX_SIZE + j] = v;
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut m = *self;
        for i in 0..self.size {
            for j in 0..self.size {
                m.set(i, j, self.get(i, j) * c);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                m.set(i, j, self.get(j, i).conj());
            }
        }
        m
    }

    /// `out = self · v`.
    #[inline]
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.size) {
            let mut acc = C64::new(0.0, 0.0);
            for (j, &vj) in v.iter().enumerate().take(self.size) {
                acc += self.get(i, j) * vj;
            }
            *o = acc;
        }
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.size];
        self.apply(v, &mut out);
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.size, other.size);
        let mut m: f64 = 0.0;
        for i in 0..self.size {
            for j in 0..self.size {
                m = m.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::zeros(self.size))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| i == j || self.get(i, j) == C64::new(0.0, 0.0)))
    }

    pub fn row_major(&self) -> Vec<C64> {
        (0..self.size * self.size).map(|k| self.get(k / self.size, k % self.size)).collect()
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        assert_eq!(self.size, rhs.size);
        let mut m = Matrix::zeros(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..self.size {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                m.set(i, j, acc);
            }
        }
        m
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, rhs: Matrix) -> Matrix {
        assert_eq!(self.size, rhs.size);
        let mut m = self;
        for i in 0..self.size {
            for j in 0..self.size {
                m.set(i, j, self.get(i, j) + rhs.get(i, j));
            }
        }
        m
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        self + rhs.scale(C64::new(-1.0, 0.0))
    }
}

/// Minkowski metric component `η_{μν}`.
pub fn eta(mu: usize, nu: usize) -> f64 {
    match (mu, nu) {
        (0, 0) => -1.0,
        (m, n) if m == n => 1.0,
        _ => 0.0,
    }
}

/// A representation of the Dirac matrices in `d ∈ {2, 3}` space dimensions.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub dim: usize,
    pub spinor_size: usize,
    /// `γ⁰, γ¹, …, γ^d`.
    pub gamma: Vec<Matrix>,
    /// `γ⁰γᵃ` for `a = 1..=d`, stored at index `a - 1`.
    pub alpha: Vec<Matrix>,
    /// `-½γ⁰γᵃ` for `a = 1..=d`, stored at index `a - 1`.
    pub boost_corrections: Vec<Matrix>,
    /// `((a, b), -½γᵃγᵇ)` for `1 ≤ a < b ≤ d`.
    pub rotation_corrections: Vec<((usize, usize), Matrix)>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Canonical representation: Pauli-based in 2D, Dirac representation in 3D.
pub fn build_gamma(d: usize) -> Result<CliffordRep> {
    let o = c(0.0, 0.0);
    let gamma = match d {
        2 => {
            let g0 = Matrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
            // i·σ₁ and i·σ₂
            let g1 = Matrix::from_row_major(&[o, c(0.0, 1.0), c(0.0, 1.0), o])?;
            let g2 = Matrix::from_row_major(&[o, c(1.0, 0.0), c(-1.0, 0.0), o])?;
            vec![g0, g1, g2]
        }
        3 => {
            let one = c(1.0, 0.0);
            let g0 = Matrix::diagonal(&[one, one, -one, -one]);
            let sigma = [
                [o, one, one, o],
                [o, c(0.0, -1.0), c(0.0, 1.0), o],
                [one, o, o, -one],
            ];
            let mut g = vec![g0];
            for s in sigma.iter() {
                let mut m = Matrix::zeros(4);
                for i in 0..2 {
                    for j in 0..2 {
                        m.set(i, j + 2, s[i * 2 + j]);
                        m.set(i + 2, j, -s[i * 2 + j]);
                    }
                }
                g.push(m);
            }
            g
        }
        other => return Err(Error::Dimension(other)),
    };
    Ok(CliffordRep::from_gamma(gamma))
}

impl CliffordRep {
    /// Assembles the derived matrices from a list `γ⁰ … γ^d`. No validation
    /// is performed; see [`verify_clifford`].
    pub fn from_gamma(gamma: Vec<Matrix>) -> Self {
        let dim = gamma.len() - 1;
        let spinor_size = gamma[0].size();
        let half = c(-0.5, 0.0);
        let alpha: Vec<Matrix> = (1..=dim).map(|a| gamma[0] * gamma[a]).collect();
        let boost_corrections = alpha.iter().map(|m| m.scale(half)).collect();
        let mut rotation_corrections = Vec::new();
        for a in 1..=dim {
            for b in a + 1..=dim {
                rotation_corrections.push(((a, b), (gamma[a] * gamma[b]).scale(half)));
            }
        }
        CliffordRep { dim, spinor_size, gamma, alpha, boost_corrections, rotation_corrections }
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(self.spinor_size)
    }

    /// `n_a γ⁰γᵃ` for a (not necessarily unit) spatial vector `n`.
    pub fn alpha_dot(&self, n: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.spinor_size);
        for (a, &na) in n.iter().enumerate().take(self.dim) {
            m = m + self.alpha[a].scale(c(na, 0.0));
        }
        m
    }

    /// `-½γᵃγᵇ` for `a < b`.
    pub fn rotation_correction(&self, a: usize, b: usize) -> Option<Matrix> {
        self.rotation_corrections.iter().find(|((x, y), _)| *x == a && *y == b).map(|(_, m)| *m)
    }
}

/// Worst deviations of a representation from the defining identities.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    /// `max |γ^μγ^ν + γ^νγ^μ + 2η_{μν}I|` over all pairs and entries.
    pub anticommutation: f64,
    /// `max |(γ^μ)* + η_{μν}γ^ν|` over all `μ` and entries.
    pub hermiticity: f64,
}

impl ViolationReport {
    pub fn max(&self) -> f64 {
        self.anticommutation.max(self.hermiticity)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn verify_clifford(rep: &CliffordRep) -> ViolationReport {
    let id = rep.identity();
    let mut anticommutation: f64 = 0.0;
    let mut hermiticity: f64 = 0.0;
    for (mu, gm) in rep.gamma.iter().enumerate() {
        for (nu, gn) in rep.gamma.iter().enumerate() {
            let lhs = *gm * *gn + *gn * *gm;
            let rhs = id.scale(c(-2.0 * eta(mu, nu), 0.0));
            anticommutation = anticommutation.max(lhs.max_abs_diff(&rhs));
        }
        // (γ^μ)* = -η_{μμ} γ^μ since η is diagonal
        let expected = gm.scale(c(-eta(mu, mu), 0.0));
        hermiticity = hermiticity.max(gm.adjoint().max_abs_diff(&expected));
    }
    ViolationReport { anticommutation, hermiticity }
}

/// The radial null projectors `p_± = ½(I ± n_a γ⁰γᵃ)` along a unit direction.
///
/// The null decomposition `[v]_± = v ± n_aγ⁰γᵃ v` equals `2 p_± v`.
#[derive(Clone, Debug)]
pub struct RadialProjectorPair {
    pub unit_direction: Vec<f64>,
    pub p_plus: Matrix,
    pub p_minus: Matrix,
}

impl RadialProjectorPair {
    /// `[v]_+ = v + n_aγ⁰γᵃ v`.
    pub fn bracket_plus(&self, v: &[C64]) -> Vec<C64> {
        self.p_plus.apply_vec(v).into_iter().map(|z| z * 2.0).collect()
    }

    /// `[v]_- = v - n_aγ⁰γᵃ v`.
    pub fn bracket_minus(&self, v: &[C64]) -> Vec<C64> {
        self.p_minus.apply_vec(v).into_iter().map(|z| z * 2.0).collect()
    }
}

const UNIT_TOL: f64 = 1e-12;

pub fn radial_projectors(rep: &CliffordRep, n: &[f64]) -> Result<RadialProjectorPair> {
    if n.len() != rep.dim {
        return Err(Error::SizeMismatch { expected: rep.dim, actual: n.len() });
    }
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::Normalization { norm });
    }
    let a = rep.alpha_dot(n);
    let id = rep.identity();
    Ok(RadialProjectorPair {
        unit_direction: n.to_vec(),
        p_plus: (id + a).scale(c(0.5, 0.0)),
        p_minus: (id - a).scale(c(0.5, 0.0)),
    })
}

/// Projector pair at a grid point `x`; the origin uses direction `(1, 0, …)`.
pub fn projectors_at(rep: &CliffordRep, x: &[f64]) -> RadialProjectorPair {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut n = vec![0.0; rep.dim];
    if r > 0.0 {
        for (ni, xi) in n.iter_mut().zip(x) {
            *ni = xi / r;
        }
    } else {
        n[0] = 1.0;
    }
    let a = rep.alpha_dot(&n);
    let id = rep.identity();
    RadialProjectorPair {
        unit_direction: n,
        p_plus: (id + a).scale(c(0.5, 0.0)),
        p_minus: (id - a).scale(c(0.5, 0.0)),
    }
}

/// Sesquilinear density `ψ* M φ`.
pub fn bilinear_density(psi: &[C64], phi: &[C64], m: &Matrix) -> Result<C64> {
    let s = m.size();
    for v in [psi, phi] {
        if v.len() != s {
            return Err(Error::SizeMismatch { expected: s, actual: v.len() });
        }
    }
    Ok(bilinear_unchecked(psi, phi, m))
}

#[inline]
pub(crate) fn bilinear_unchecked(psi: &[C64], phi: &[C64], m: &Matrix) -> C64 {
    let s = m.size();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..s {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..s {
            row += m.get(i, j) * phi[j];
        }
        acc += psi[i].conj() * row;
    }
    acc
}

/// The four pairings `[Ψ]_σ* γ⁰ [Φ]_τ` of the null decomposition of `Ψ*γ⁰Φ`.
#[derive(Clone, Copy, Debug)]
pub struct NullFormTerms {
    pub minus_minus: C64,
    pub minus_plus: C64,
    pub plus_minus: C64,
    pub plus_plus: C64,
}

impl NullFormTerms {
    /// `¼([Ψ]₋*γ⁰[Φ]₋ + [Ψ]₋*γ⁰[Φ]₊ + [Ψ]₊*γ⁰[Φ]₋)`, which equals `Ψ*γ⁰Φ`
    /// because the `(+, +)` pairing vanishes.
    pub fn reduced_sum(&self) -> C64 {
        (self.minus_minus + self.minus_plus + self.plus_minus) * 0.25
    }
}

pub fn null_form_terms(
    rep: &CliffordRep,
    proj: &RadialProjectorPair,
    psi: &[C64],
    phi: &[C64],
) -> Result<NullFormTerms> {
    let g0 = &rep.gamma[0];
    let (pm, pp) = (proj.bracket_minus(psi), proj.bracket_plus(psi));
    let (fm, fp) = (proj.bracket_minus(phi), proj.bracket_plus(phi));
    Ok(NullFormTerms {
        minus_minus: bilinear_density(&pm, &fm, g0)?,
        minus_plus: bilinear_density(&pm, &fp, g0)?,
        plus_minus: bilinear_density(&pp, &fm, g0)?,
        plus_plus: bilinear_density(&pp, &fp, g0)?,
    })
}

const MODEL_TOL: f64 = 1e-14;

/// The nonlinearity of the equation.
#[derive(Clone, Debug, PartialEq)]
pub enum Nonlinearity {
    /// `-iγ^μ∂_μψ = (ψ*Hψ) Fψ` with `H* = H`, `γ⁰F = F*γ⁰`.
    Cubic { h: Matrix, f: Matrix },
    /// `-iγ^μ∂_μψ = (ψ*γ⁰ψ) e` (3D only).
    Quadratic { e: Vec<C64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    pub nonlinearity: Nonlinearity,
}

impl ModelSpec {
    /// The Soler model `H = γ⁰`, `F = I`.
    pub fn soler(rep: &CliffordRep) -> Self {
        ModelSpec {
            dim: rep.dim,
            nonlinearity: Nonlinearity::Cubic { h: rep.gamma[0], f: rep.identity() },
        }
    }

    /// Linear massless Dirac equation, expressed as the cubic model with `H = 0`.
    pub fn free(rep: &CliffordRep) -> Self {
        ModelSpec {
            dim: rep.dim,
            nonlinearity: Nonlinearity::Cubic {
                h: Matrix::zeros(rep.spinor_size),
                f: rep.identity(),
            },
        }
    }

    pub fn cubic(rep: &CliffordRep, h: Matrix, f: Matrix) -> Result<Self> {
        let m = ModelSpec { dim: rep.dim, nonlinearity: Nonlinearity::Cubic { h, f } };
        m.validate(rep)?;
        Ok(m)
    }

    pub fn quadratic(rep: &CliffordRep, e: Vec<C64>) -> Result<Self> {
        let m = ModelSpec { dim: rep.dim, nonlinearity: Nonlinearity::Quadratic { e } };
        m.validate(rep)?;
        Ok(m)
    }

    pub fn validate(&self, rep: &CliffordRep) -> Result<()> {
        if self.dim != rep.dim {
            return Err(Error::Model(format!(
                "model dimension {} does not match representation dimension {}",
                self.dim, rep.dim
            )));
        }
        let s = rep.spinor_size;
        match &self.nonlinearity {
            Nonlinearity::Cubic { h, f } => {
                if h.size() != s || f.size() != s {
                    return Err(Error::SizeMismatch { expected: s, actual: h.size().min(f.size()) });
                }
                let herm = h.adjoint().max_abs_diff(h);
                if herm > MODEL_TOL {
                    return Err(Error::Model(format!("H is not Hermitian (deviation {herm:e})")));
                }
                let g0 = rep.gamma[0];
                let dev = (g0 * *f).max_abs_diff(&(f.adjoint() * g0));
                if dev > MODEL_TOL {
                    return Err(Error::Model(format!("γ⁰F ≠ F*γ⁰ (deviation {dev:e})")));
                }
            }
            Nonlinearity::Quadratic { e } => {
                if self.dim != 3 {
                    return Err(Error::Model("quadratic nonlinearity requires d = 3".into()));
                }
                if e.len() != s {
                    return Err(Error::SizeMismatch { expected: s, actual: e.len() });
                }
            }
        }
        Ok(())
    }

    pub fn is_soler(&self, rep: &CliffordRep) -> bool {
        matches!(&self.nonlinearity,
            Nonlinearity::Cubic { h, f } if *h == rep.gamma[0] && *f == rep.identity())
    }

    /// True when the nonlinearity vanishes identically.
    pub fn is_linear(&self) -> bool {
        match &self.nonlinearity {
            Nonlinearity::Cubic { h, f } => h.max_abs() == 0.0 || f.max_abs() == 0.0,
            Nonlinearity::Quadratic { e } => e.iter().all(|z| z.norm() == 0.0),
        }
    }

    /// Cubic admissible models conserve the L² norm.
    pub fn conserves_l2(&self) -> bool {
        matches!(self.nonlinearity, Nonlinearity::Cubic { .. })
    }
}
