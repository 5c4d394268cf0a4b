//! Periodic uniform grids on `[-L, L)^d` and spinor fields sampled on them.

mod fft;
pub mod snapshot;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reduce::{max_indexed, sum_indexed};
use crate::C64;

/// Uniform periodic grid with `n` points per axis on `[-L, L)^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::Dimension(dim));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Grid(format!("points per axis must be even and at least 8, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Grid(format!("half width must be positive, got {half_width}")));
        }
        Ok(Grid { dim, n, half_width })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn num_points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Per-axis indices of a flat point index (unused trailing axes are 0).
    #[inline]
    pub fn axis_indices(&self, index: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [index / n, index % n, 0],
            _ => [index / (n * n), (index / n) % n, index % n],
        }
    }

    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Position of a grid point; components beyond `dim` are zero.
    #[inline]
    pub fn point(&self, index: usize) -> [f64; 3] {
        let ix = self.axis_indices(index);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coordinate(ix[a]);
        }
        x
    }

    #[inline]
    pub fn radius(&self, index: usize) -> f64 {
        let x = self.point(index);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Angular wavenumber of FFT bin `m`: `{0, …, n/2-1, -n/2, …, -1}·π/L`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        signed * PI / self.half_width
    }

    #[inline]
    pub fn mode(&self, index: usize) -> [f64; 3] {
        let ix = self.axis_indices(index);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.wavenumber(ix[a]);
        }
        k
    }
}

/// Japanese bracket `⟨x⟩ = sqrt(1 + x²)`.
#[inline]
pub fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// A `C^s`-valued field on a grid at one time, stored point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    time: f64,
    spinor_size: usize,
    values: Vec<C64>,
}

impl SpinorField {
    pub fn new(grid: Grid, spinor_size: usize, time: f64, values: Vec<C64>) -> Result<Self> {
        let expected = grid.num_points() * spinor_size;
        if values.len() != expected {
            return Err(Error::SizeMismatch { expected, actual: values.len() });
        }
        Ok(SpinorField { grid, time, spinor_size, values })
    }

    pub fn zeros(grid: Grid, spinor_size: usize, time: f64) -> Self {
        SpinorField {
            grid,
            time,
            spinor_size,
            values: vec![C64::new(0.0, 0.0); grid.num_points() * spinor_size],
        }
    }

    /// Samples `f(x, out)` at every grid point.
    pub fn from_fn<F>(grid: Grid, spinor_size: usize, time: f64, f: F) -> Self
    where
        F: Fn(&[f64], &mut [C64]) + Sync,
    {
        let mut field = Self::zeros(grid, spinor_size, time);
        let d = grid.dim();
        field.values.par_chunks_mut(spinor_size).enumerate().for_each(|(i, out)| {
            let x = grid.point(i);
            f(&x[..d], out);
        });
        field
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    #[inline]
    pub fn spinor_size(&self) -> usize {
        self.spinor_size
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Spinor value at flat point index `i`.
    #[inline]
    pub fn at(&self, i: usize) -> &[C64] {
        &self.values[i * self.spinor_size..(i + 1) * self.spinor_size]
    }

    /// Spinor component `c` at every point, in grid order.
    pub fn component(&self, c: usize) -> Vec<C64> {
        self.values.iter().skip(c).step_by(self.spinor_size).copied().collect()
    }

    #[inline]
    pub fn abs_sq_at(&self, i: usize) -> f64 {
        self.at(i).iter().map(|z| z.norm_sqr()).sum()
    }

    /// `∫|f|² dx` as a Riemann sum.
    pub fn norm_sq(&self) -> f64 {
        sum_indexed(self.grid.num_points(), |i| self.abs_sq_at(i)) * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `max_x |f(x)|` with `|·|` the Euclidean spinor norm.
    pub fn sup_abs(&self) -> f64 {
        max_indexed(self.grid.num_points(), |i| self.abs_sq_at(i)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_compatible(&self, other: &SpinorField) -> Result<()> {
        if self.grid != other.grid || self.spinor_size != other.spinor_size {
            return Err(Error::SizeMismatch { expected: self.values.len(), actual: other.values.len() });
        }
        Ok(())
    }

    pub fn scaled(&self, c: C64) -> SpinorField {
        let mut out = self.clone();
        out.values.par_iter_mut().for_each(|z| *z *= c);
        out
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &SpinorField, c: C64) -> Result<SpinorField> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.values.par_iter_mut().zip(other.values.par_iter()).for_each(|(a, b)| *a += b * c);
        Ok(out)
    }

    pub fn sub(&self, other: &SpinorField) -> Result<SpinorField> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// Applies a constant matrix at every point.
    pub fn apply_matrix(&self, m: &crate::clifford::Matrix) -> SpinorField {
        let s = self.spinor_size;
        let mut out = self.clone();
        out.values.par_chunks_mut(s).zip(self.values.par_chunks(s)).for_each(|(o, v)| m.apply(v, o));
        out
    }

    /// Multiplies the field pointwise by the real function `w(x)`.
    pub fn multiply_by<F>(&self, w: F) -> SpinorField
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let s = self.spinor_size;
        let d = self.grid.dim();
        let grid = self.grid;
        let mut out = self.clone();
        out.values.par_chunks_mut(s).enumerate().for_each(|(i, o)| {
            let x = grid.point(i);
            let wi = w(&x[..d]);
            for z in o.iter_mut() {
                *z *= wi;
            }
        });
        out
    }

    /// `‖self - other‖ / ‖other‖` (absolute difference when `other` is zero).
    pub fn relative_difference(&self, other: &SpinorField) -> Result<f64> {
        let diff = self.sub(other)?.norm();
        let base = other.norm();
        Ok(if base > 0.0 { diff / base } else { diff })
    }

    /// Largest pointwise spinor-norm difference.
    pub fn max_difference(&self, other: &SpinorField) -> Result<f64> {
        self.check_compatible(other)?;
        let s = self.spinor_size;
        Ok(max_indexed(self.grid.num_points(), |i| {
            (0..s).map(|c| (self.values[i * s + c] - other.values[i * s + c]).norm_sqr()).sum::<f64>()
        })
        .sqrt())
    }
}

/// Fourier coefficients of a [`SpinorField`] under the unitary DFT.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    time: f64,
    spinor_size: usize,
    values: Vec<C64>,
}

impl SpectralField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spinor_size(&self) -> usize {
        self.spinor_size
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, mode: usize) -> &[C64] {
        &self.values[mode * self.spinor_size..(mode + 1) * self.spinor_size]
    }

    /// Spectral L² norm; equals the grid norm by Parseval.
    pub fn norm(&self) -> f64 {
        let s = self.spinor_size;
        let sum = sum_indexed(self.grid.num_points(), |i| {
            self.values[i * s..(i + 1) * s].iter().map(|z| z.norm_sqr()).sum()
        });
        (sum * self.grid.cell_volume()).sqrt()
    }

    /// Discrete `H^s` norm `‖⟨k⟩^s f̂‖`.
    pub fn sobolev_norm(&self, order: f64) -> f64 {
        let s = self.spinor_size;
        let grid = self.grid;
        let sum = sum_indexed(grid.num_points(), |i| {
            let k = grid.mode(i);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let w = (1.0 + k2).powf(order);
            w * self.values[i * s..(i + 1) * s].iter().map(|z| z.norm_sqr()).sum::<f64>()
        });
        (sum * grid.cell_volume()).sqrt()
    }
}

pub fn to_spectral(f: &SpinorField) -> SpectralField {
    let mut values = f.values.clone();
    let g = f.grid;
    fft::transform(&mut values, g.dim(), g.points_per_axis(), f.spinor_size, false);
    SpectralField { grid: g, time: f.time, spinor_size: f.spinor_size, values }
}

pub fn from_spectral(spec: &SpectralField) -> SpinorField {
    let mut values = spec.values.clone();
    let g = spec.grid;
    fft::transform(&mut values, g.dim(), g.points_per_axis(), spec.spinor_size, true);
    SpinorField { grid: g, time: spec.time, spinor_size: spec.spinor_size, values }
}

/// Applies `op(k, spinor)` to every Fourier mode of `f` in place.
pub fn apply_spectral_operator<F>(f: &mut SpinorField, op: F)
where
    F: Fn(&[f64; 3], &mut [C64]) + Sync,
{
    let g = f.grid;
    let s = f.spinor_size;
    fft::transform(&mut f.values, g.dim(), g.points_per_axis(), s, false);
    f.values.par_chunks_mut(s).enumerate().for_each(|(i, v)| op(&g.mode(i), v));
    fft::transform(&mut f.values, g.dim(), g.points_per_axis(), s, true);
}

/// Spectral mixed partial derivative `∂^I f` for a multi-index of length `d`.
pub fn derivative_multi(f: &SpinorField, multi_index: &[usize]) -> Result<SpinorField> {
    let d = f.grid.dim();
    if multi_index.len() != d {
        return Err(Error::SizeMismatch { expected: d, actual: multi_index.len() });
    }
    let mut out = f.clone();
    if multi_index.iter().all(|&m| m == 0) {
        return Ok(out);
    }
    let powers: Vec<i32> = multi_index.iter().map(|&m| m as i32).collect();
    apply_spectral_operator(&mut out, |k, v| {
        let mut mult = C64::new(1.0, 0.0);
        for (a, &p) in powers.iter().enumerate() {
            if p > 0 {
                mult *= C64::new(0.0, k[a]).powi(p);
            }
        }
        for z in v.iter_mut() {
            *z *= mult;
        }
    });
    Ok(out)
}

/// `∂_a f` for spatial axis `a ∈ 1..=d`.
pub fn derivative(f: &SpinorField, axis: usize) -> Result<SpinorField> {
    let d = f.grid.dim();
    if axis == 0 || axis > d {
        return Err(Error::Axis { axis, dim: d });
    }
    let mut mi = vec![0; d];
    mi[axis - 1] = 1;
    derivative_multi(f, &mi)
}

/// All first spatial derivatives `[∂_1 f, …, ∂_d f]` from one forward transform.
pub fn gradient(f: &SpinorField) -> Vec<SpinorField> {
    let g = f.grid;
    let s = f.spinor_size;
    let spec = to_spectral(f);
    (0..g.dim())
        .map(|a| {
            let mut values = spec.values.clone();
            values.par_chunks_mut(s).enumerate().for_each(|(i, v)| {
                let ik = C64::new(0.0, g.mode(i)[a]);
                for z in v.iter_mut() {
                    *z *= ik;
                }
            });
            fft::transform(&mut values, g.dim(), g.points_per_axis(), s, true);
            SpinorField { grid: g, time: f.time, spinor_size: s, values }
        })
        .collect()
}

/// `‖⟨x⟩^p ∂^I f‖_{L²}` with spectral derivatives and Riemann-sum quadrature.
pub fn weighted_norm(f: &SpinorField, weight_power: f64, multi_index: &[usize]) -> Result<f64> {
    let df = derivative_multi(f, multi_index)?;
    Ok(weighted_l2(&df, weight_power))
}

/// `‖⟨x⟩^p ∇∂^I f‖`, the norm of the full spatial gradient of `∂^I f`.
pub fn gradient_weighted_norm(f: &SpinorField, weight_power: f64, multi_index: &[usize]) -> Result<f64> {
    let d = f.grid.dim();
    let mut total = 0.0;
    for a in 0..d {
        let mut mi = multi_index.to_vec();
        if mi.len() != d {
            return Err(Error::SizeMismatch { expected: d, actual: mi.len() });
        }
        mi[a] += 1;
        total += weighted_norm(f, weight_power, &mi)?.powi(2);
    }
    Ok(total.sqrt())
}

fn weighted_l2(f: &SpinorField, p: f64) -> f64 {
    let g = f.grid;
    let sum = sum_indexed(g.num_points(), |i| {
        let w = if p == 0.0 { 1.0 } else { bracket(g.radius(i)).powf(2.0 * p) };
        w * f.abs_sq_at(i)
    });
    (sum * g.cell_volume()).sqrt()
}

/// Partitions grid points by `|r - t|` into bins of width `w` and returns
/// `(bin centre, sup |f|)` for every bin from 0 to the outermost populated one.
pub fn shell_sup(f: &SpinorField, t: f64, shell_width: f64) -> Vec<(f64, f64)> {
    shell_sup_of(f.grid(), t, shell_width, |i| f.abs_sq_at(i).sqrt())
}

pub(crate) fn shell_sup_of<F>(g: &Grid, t: f64, w: f64, value: F) -> Vec<(f64, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    assert!(w > 0.0, "shell width must be positive");
    let bin = |i: usize| ((g.radius(i) - t).abs() / w).floor() as usize;
    let max_bin = (0..g.num_points()).into_par_iter().map(bin).max().unwrap_or(0);
    let sups = (0..g.num_points())
        .into_par_iter()
        .fold(
            || vec![0.0f64; max_bin + 1],
            |mut acc, i| {
                let b = bin(i);
                acc[b] = acc[b].max(value(i));
                acc
            },
        )
        .reduce(
            || vec![0.0f64; max_bin + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    sups.into_iter().enumerate().map(|(b, s)| ((b as f64 + 0.5) * w, s)).collect()
}
