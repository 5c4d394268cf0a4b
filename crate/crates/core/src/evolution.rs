//! Time integration of `∂_tψ = -γ⁰γᵃ∂_aψ + iγ⁰·(nonlinearity)`.
//!
//! The production integrator is Strang splitting: half a pointwise nonlinear
//! flow, an exact free step in Fourier space, and another half nonlinear flow.
//! [`oracle_rk4_step`] integrates the full equation by the method of lines and
//! serves as an independent reference.

use rayon::prelude::*;

use crate::clifford::{bilinear_unchecked, CliffordRep, Matrix, ModelSpec, Nonlinearity};
use crate::error::{ConfigViolation, Error, Result};
use crate::grid::{apply_spectral_operator, Grid, SpinorField};
use crate::C64;

/// Any grid value above this magnitude aborts an evolution.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Upper bound on the pointwise RK4 substep for non-closed-form models.
pub const MAX_NONLINEAR_SUBSTEP: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub grid: Grid,
    pub dt: f64,
    pub t0: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub diagnostic_stride: usize,
}

impl SimConfig {
    pub fn num_steps(&self) -> usize {
        ((self.t_final - self.t0) / self.dt).round().max(0.0) as usize
    }

    /// Time after `step` steps, computed without accumulation.
    pub fn time_at(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    /// Checks the configuration invariants; `support_radius` is the effective
    /// radius of the initial datum used by the no-wrap rule.
    pub fn validate(&self, support_radius: f64) -> Vec<ConfigViolation> {
        let mut v = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            v.push(ConfigViolation::new("dt > 0", format!("dt = {}", self.dt)));
        }
        if !(self.t_final >= self.t0) {
            v.push(ConfigViolation::new(
                "t_final >= t0",
                format!("t0 = {}, t_final = {}", self.t0, self.t_final),
            ));
        }
        if self.dt > 0.0 && self.t_final >= self.t0 {
            let steps = (self.t_final - self.t0) / self.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                v.push(ConfigViolation::new(
                    "whole number of steps",
                    format!("(t_final - t0)/dt = {steps} is not an integer"),
                ));
            }
        }
        let horizon = (self.t_final - self.t0).max(0.0);
        let needed = support_radius + horizon + 2.0;
        if self.grid.half_width() < needed {
            v.push(ConfigViolation::new(
                "no-wrap rule",
                format!(
                    "L = {} < support radius {:.3} + horizon {} + 2 = {:.3}",
                    self.grid.half_width(),
                    support_radius,
                    horizon,
                    needed
                ),
            ));
        }
        if self.snapshot_stride == 0 || self.diagnostic_stride == 0 {
            v.push(ConfigViolation::new("strides >= 1", "snapshot and diagnostic strides must be positive"));
        } else if self.num_steps() % self.snapshot_stride != 0 {
            v.push(ConfigViolation::new(
                "snapshot stride divides step count",
                format!("{} steps, stride {}", self.num_steps(), self.snapshot_stride),
            ));
        }
        if self.model.dim != self.grid.dim() {
            v.push(ConfigViolation::new("model matches grid dimension", format!(
                "model d = {}, grid d = {}",
                self.model.dim,
                self.grid.dim()
            )));
        }
        v
    }
}

/// Time-ordered snapshots of one evolution.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub snapshots: Vec<SpinorField>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time()).collect()
    }

    pub fn last(&self) -> Option<&SpinorField> {
        self.snapshots.last()
    }
}

/// Nonzero entries of `γ⁰γᵃ` as `(axis, row, col, value)`.
fn alpha_terms(rep: &CliffordRep) -> Vec<(usize, usize, usize, C64)> {
    let mut terms = Vec::new();
    for (a, m) in rep.alpha.iter().enumerate() {
        for i in 0..rep.spinor_size {
            for j in 0..rep.spinor_size {
                let v = m.get(i, j);
                if v != C64::new(0.0, 0.0) {
                    terms.push((a, i, j, v));
                }
            }
        }
    }
    terms
}

#[inline]
fn apply_alpha_k(terms: &[(usize, usize, usize, C64)], k: &[f64; 3], v: &[C64], out: &mut [C64]) {
    out.fill(C64::new(0.0, 0.0));
    for &(a, i, j, val) in terms {
        out[i] += val * (k[a] * v[j]);
    }
}

/// In-place exact free flow `S(Δt) = exp(-iΔt k_aγ⁰γᵃ)` per Fourier mode.
pub fn free_propagate_in_place(f: &mut SpinorField, dt: f64, rep: &CliffordRep) {
    if dt == 0.0 {
        return;
    }
    let terms = alpha_terms(rep);
    let s = rep.spinor_size;
    apply_spectral_operator(f, |k, v| {
        let kabs = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        if kabs == 0.0 {
            return;
        }
        let mut w = [C64::new(0.0, 0.0); 4];
        apply_alpha_k(&terms, k, v, &mut w[..s]);
        let (sn, cs) = (kabs * dt).sin_cos();
        let sinc = sn / kabs;
        for (vi, wi) in v.iter_mut().zip(&w[..s]) {
            *vi = *vi * cs - C64::new(0.0, sinc) * wi;
        }
    });
    let t = f.time() + dt;
    f.set_time(t);
}

pub fn free_propagate(f: &SpinorField, dt: f64, rep: &CliffordRep) -> SpinorField {
    let mut out = f.clone();
    free_propagate_in_place(&mut out, dt, rep);
    out
}

/// Model data in the form used by the pointwise kernels.
#[derive(Clone, Debug)]
enum Kernel {
    Linear,
    /// Soler: the flow is `exp(iρtγ⁰)` with `ρ = ψ*γ⁰ψ` conserved; `γ⁰` is
    /// diagonal with entries `diag`.
    Soler { g0: Matrix, diag: Vec<f64> },
    /// `i(ψ*Hψ)γ⁰Fψ`.
    Cubic { h: Matrix, g: Matrix },
    /// `i(ψ*γ⁰ψ)γ⁰e`.
    Quadratic { g0: Matrix, g0e: Vec<C64>, e: Vec<C64> },
}

impl Kernel {
    fn new(model: &ModelSpec, rep: &CliffordRep) -> Self {
        if model.is_linear() {
            return Kernel::Linear;
        }
        let g0 = rep.gamma[0];
        if model.is_soler(rep) && g0.is_diagonal() {
            let diag = (0..rep.spinor_size).map(|i| g0.get(i, i).re).collect();
            return Kernel::Soler { g0, diag };
        }
        match &model.nonlinearity {
            Nonlinearity::Cubic { h, f } => Kernel::Cubic { h: *h, g: g0 * *f },
            Nonlinearity::Quadratic { e } => Kernel::Quadratic { g0, g0e: g0.apply_vec(e), e: e.clone() },
        }
    }

    /// Pointwise nonlinear part of `∂_tψ`.
    #[inline]
    fn rhs(&self, psi: &[C64], out: &mut [C64]) {
        match self {
            Kernel::Linear => out.fill(C64::new(0.0, 0.0)),
            Kernel::Soler { g0, .. } => {
                let rho = bilinear_unchecked(psi, psi, g0).re;
                g0.apply(psi, out);
                for z in out.iter_mut() {
                    *z *= C64::new(0.0, rho);
                }
            }
            Kernel::Cubic { h, g } => {
                let rho = bilinear_unchecked(psi, psi, h).re;
                g.apply(psi, out);
                for z in out.iter_mut() {
                    *z *= C64::new(0.0, rho);
                }
            }
            Kernel::Quadratic { g0, g0e, .. } => {
                let rho = bilinear_unchecked(psi, psi, g0).re;
                for (o, e) in out.iter_mut().zip(g0e) {
                    *o = e * C64::new(0.0, rho);
                }
            }
        }
    }

    /// Time derivative of the nonlinear part along `ψ_t`.
    #[inline]
    fn rhs_derivative(&self, psi: &[C64], psi_t: &[C64], out: &mut [C64]) {
        let s = psi.len();
        let mut tmp = [C64::new(0.0, 0.0); 4];
        match self {
            Kernel::Linear => out.fill(C64::new(0.0, 0.0)),
            Kernel::Soler { g0: m, .. } | Kernel::Cubic { h: m, .. } => {
                let g = match self {
                    Kernel::Cubic { g, .. } => *g,
                    _ => *m,
                };
                let rho = bilinear_unchecked(psi, psi, m).re;
                let drho = 2.0 * bilinear_unchecked(psi, psi_t, m).re;
                g.apply(psi, out);
                g.apply(psi_t, &mut tmp[..s]);
                for (o, t) in out.iter_mut().zip(&tmp[..s]) {
                    *o = C64::new(0.0, drho) * *o + C64::new(0.0, rho) * t;
                }
            }
            Kernel::Quadratic { g0, g0e, .. } => {
                let drho = 2.0 * bilinear_unchecked(psi, psi_t, g0).re;
                for (o, e) in out.iter_mut().zip(g0e) {
                    *o = e * C64::new(0.0, drho);
                }
            }
        }
    }

    fn flow_point(&self, psi: &mut [C64], dt: f64, max_substep: f64) {
        match self {
            Kernel::Linear => {}
            Kernel::Soler { g0, diag } => {
                let rho = bilinear_unchecked(psi, psi, g0).re;
                let (sn, cs) = (rho * dt).sin_cos();
                for (z, &g) in psi.iter_mut().zip(diag) {
                    let phase = if g == 1.0 {
                        C64::new(cs, sn)
                    } else if g == -1.0 {
                        C64::new(cs, -sn)
                    } else {
                        C64::from_polar(1.0, rho * dt * g)
                    };
                    *z *= phase;
                }
            }
            Kernel::Quadratic { g0, g0e, e } => {
                // ψ stays on the line ψ₀ + iσγ⁰e, where ρ = ρ₀ + bσ + cσ²; RK4 on
                // σ' = ρ(σ) is RK4 on the spinor ODE
                let mut w = C64::new(0.0, 0.0);
                let mut c = 0.0;
                for i in 0..psi.len() {
                    w += psi[i].conj() * e[i];
                    c += (g0e[i].conj() * e[i]).re;
                }
                let rho0 = bilinear_unchecked(psi, psi, g0).re;
                let b = -2.0 * w.im;
                let q = |sig: f64| rho0 + sig * (b + c * sig);
                let steps = (dt.abs() / max_substep).ceil().max(1.0) as usize;
                let h = dt / steps as f64;
                let mut sig = 0.0;
                for _ in 0..steps {
                    let k1 = q(sig);
                    let k2 = q(sig + 0.5 * h * k1);
                    let k3 = q(sig + 0.5 * h * k2);
                    let k4 = q(sig + h * k3);
                    sig += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
                }
                for (z, v) in psi.iter_mut().zip(g0e) {
                    *z += C64::new(0.0, sig) * v;
                }
            }
            _ => {
                let steps = (dt.abs() / max_substep).ceil().max(1.0) as usize;
                let h = dt / steps as f64;
                let s = psi.len();
                let mut k1 = [C64::new(0.0, 0.0); 4];
                let mut k2 = k1;
                let mut k3 = k1;
                let mut k4 = k1;
                let mut tmp = k1;
                for _ in 0..steps {
                    self.rhs(psi, &mut k1[..s]);
                    for c in 0..s {
                        tmp[c] = psi[c] + k1[c] * (h / 2.0);
                    }
                    self.rhs(&tmp[..s], &mut k2[..s]);
                    for c in 0..s {
                        tmp[c] = psi[c] + k2[c] * (h / 2.0);
                    }
                    self.rhs(&tmp[..s], &mut k3[..s]);
                    for c in 0..s {
                        tmp[c] = psi[c] + k3[c] * h;
                    }
                    self.rhs(&tmp[..s], &mut k4[..s]);
                    for c in 0..s {
                        psi[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
                    }
                }
            }
        }
    }
}

/// Pointwise nonlinear flow with an explicit RK4 substep bound (ignored by
/// the closed-form Soler flow).
pub fn nonlinear_substep_with(
    f: &SpinorField,
    dt: f64,
    model: &ModelSpec,
    rep: &CliffordRep,
    max_substep: f64,
) -> SpinorField {
    let mut out = f.clone();
    nonlinear_in_place(&mut out, dt, &Kernel::new(model, rep), max_substep);
    out
}

/// Solves the pointwise ODE `∂_tψ = iγ⁰·(nonlinearity)` for a time `dt` at
/// every grid point. Exact for the Soler model; otherwise RK4 with substeps of
/// at most `min(|dt|, 0.01)`.
pub fn nonlinear_substep(f: &SpinorField, dt: f64, model: &ModelSpec, rep: &CliffordRep) -> SpinorField {
    nonlinear_substep_with(f, dt, model, rep, MAX_NONLINEAR_SUBSTEP.min(dt.abs().max(f64::MIN_POSITIVE)))
}

fn nonlinear_in_place(f: &mut SpinorField, dt: f64, kernel: &Kernel, max_substep: f64) {
    if dt == 0.0 || matches!(kernel, Kernel::Linear) {
        return;
    }
    let s = f.spinor_size();
    f.values_mut().par_chunks_mut(s).for_each(|psi| kernel.flow_point(psi, dt, max_substep));
}

/// Reusable Strang stepper holding the prepared model.
#[derive(Clone, Debug)]
pub struct StrangStepper {
    kernel: Kernel,
    rep: CliffordRep,
    max_substep: f64,
}

impl StrangStepper {
    pub fn new(model: &ModelSpec, rep: &CliffordRep, dt: f64) -> Self {
        StrangStepper {
            kernel: Kernel::new(model, rep),
            rep: rep.clone(),
            max_substep: (dt / 2.0).min(MAX_NONLINEAR_SUBSTEP),
        }
    }

    pub fn step(&self, f: &mut SpinorField, dt: f64) {
        nonlinear_in_place(f, dt / 2.0, &self.kernel, self.max_substep);
        free_propagate_in_place(f, dt, &self.rep);
        nonlinear_in_place(f, dt / 2.0, &self.kernel, self.max_substep);
    }
}

/// `N(dt/2) ∘ S(dt) ∘ N(dt/2)`.
pub fn strang_step(f: &SpinorField, dt: f64, model: &ModelSpec, rep: &CliffordRep) -> SpinorField {
    let mut out = f.clone();
    StrangStepper::new(model, rep, dt).step(&mut out, dt);
    out
}

/// `∂_tψ` obtained by substituting the equation.
pub fn equation_rhs(f: &SpinorField, model: &ModelSpec, rep: &CliffordRep) -> SpinorField {
    let kernel = Kernel::new(model, rep);
    let mut out = dirac_spatial_part(f, rep);
    let s = f.spinor_size();
    out.values_mut().par_chunks_mut(s).zip(f.values().par_chunks(s)).for_each(|(o, psi)| {
        let mut nl = [C64::new(0.0, 0.0); 4];
        kernel.rhs(psi, &mut nl[..s]);
        for (a, b) in o.iter_mut().zip(&nl[..s]) {
            *a += b;
        }
    });
    out
}

/// `∂_t²ψ` from `ψ` and `ψ_t` by differentiating the equation once in time.
pub fn equation_second_derivative(
    f: &SpinorField,
    f_t: &SpinorField,
    model: &ModelSpec,
    rep: &CliffordRep,
) -> SpinorField {
    let kernel = Kernel::new(model, rep);
    let mut out = dirac_spatial_part(f_t, rep);
    let s = f.spinor_size();
    out.values_mut()
        .par_chunks_mut(s)
        .zip(f.values().par_chunks(s).zip(f_t.values().par_chunks(s)))
        .for_each(|(o, (psi, psi_t))| {
            let mut nl = [C64::new(0.0, 0.0); 4];
            kernel.rhs_derivative(psi, psi_t, &mut nl[..s]);
            for (a, b) in o.iter_mut().zip(&nl[..s]) {
                *a += b;
            }
        });
    out
}

/// `-γ⁰γᵃ∂_a f` via one spectral multiplier `-i k_aγ⁰γᵃ`.
pub fn dirac_spatial_part(f: &SpinorField, rep: &CliffordRep) -> SpinorField {
    let terms = alpha_terms(rep);
    let s = rep.spinor_size;
    let mut out = f.clone();
    apply_spectral_operator(&mut out, |k, v| {
        let mut w = [C64::new(0.0, 0.0); 4];
        apply_alpha_k(&terms, k, v, &mut w[..s]);
        for (vi, wi) in v.iter_mut().zip(&w[..s]) {
            *vi = C64::new(0.0, -1.0) * wi;
        }
    });
    out
}

/// One classical RK4 step of the full equation with spectral derivatives.
pub fn oracle_rk4_step(f: &SpinorField, dt: f64, model: &ModelSpec, rep: &CliffordRep) -> Result<SpinorField> {
    let rhs = |g: &SpinorField| equation_rhs(g, model, rep);
    let half = C64::new(dt / 2.0, 0.0);
    let k1 = rhs(f);
    let k2 = rhs(&f.add_scaled(&k1, half)?);
    let k3 = rhs(&f.add_scaled(&k2, half)?);
    let k4 = rhs(&f.add_scaled(&k3, C64::new(dt, 0.0))?);
    let s = f.spinor_size();
    let mut out = f.clone();
    let c = dt / 6.0;
    out.values_mut()
        .par_chunks_mut(s)
        .enumerate()
        .for_each(|(i, o)| {
            let (a, b, cc, d) = (k1.at(i), k2.at(i), k3.at(i), k4.at(i));
            for j in 0..s {
                o[j] += (a[j] + b[j] * 2.0 + cc[j] * 2.0 + d[j]) * c;
            }
        });
    out.set_time(f.time() + dt);
    let (before, after) = (f.norm(), out.norm());
    if !after.is_finite() || after > 10.0 * before.max(f64::MIN_POSITIVE) {
        return Err(Error::Unstable { before, after });
    }
    Ok(out)
}

/// Integrates with the reference RK4 from `f.time()` to `t_end` using at most
/// `max_dt` per step.
pub fn oracle_evolve(
    f: &SpinorField,
    t_end: f64,
    max_dt: f64,
    model: &ModelSpec,
    rep: &CliffordRep,
) -> Result<SpinorField> {
    let span = t_end - f.time();
    let steps = (span.abs() / max_dt).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let t_start = f.time();
    let mut cur = f.clone();
    for k in 0..steps {
        cur = oracle_rk4_step(&cur, dt, model, rep)?;
        cur.set_time(t_start + (k + 1) as f64 * dt);
    }
    Ok(cur)
}

fn check_divergence(f: &SpinorField, step: usize) -> Result<()> {
    let limit = DIVERGENCE_THRESHOLD * DIVERGENCE_THRESHOLD;
    let bad = f
        .values()
        .par_iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() > limit);
    if bad {
        return Err(Error::Divergence { step, time: f.time() });
    }
    Ok(())
}

/// Step-by-step driver for [`SimConfig`] runs; supports resuming from any
/// step with the state recorded there.
#[derive(Clone, Debug)]
pub struct Evolver {
    config: SimConfig,
    stepper: StrangStepper,
    state: SpinorField,
    step: usize,
}

impl Evolver {
    pub fn new(config: &SimConfig, rep: &CliffordRep, psi0: SpinorField) -> Result<Self> {
        Self::resume(config, rep, psi0, 0)
    }

    pub fn resume(config: &SimConfig, rep: &CliffordRep, state: SpinorField, step: usize) -> Result<Self> {
        config.model.validate(rep)?;
        if *state.grid() != config.grid {
            return Err(Error::Grid("initial field is not on the configured grid".into()));
        }
        if state.spinor_size() != rep.spinor_size {
            return Err(Error::SizeMismatch { expected: rep.spinor_size, actual: state.spinor_size() });
        }
        let mut state = state;
        state.set_time(config.time_at(step));
        Ok(Evolver {
            config: config.clone(),
            stepper: StrangStepper::new(&config.model, rep, config.dt),
            state,
            step,
        })
    }

    pub fn state(&self) -> &SpinorField {
        &self.state
    }

    pub fn current_step(&self) -> usize {
        self.step
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.config.num_steps()
    }

    pub fn advance(&mut self) -> Result<()> {
        self.stepper.step(&mut self.state, self.config.dt);
        self.step += 1;
        self.state.set_time(self.config.time_at(self.step));
        check_divergence(&self.state, self.step)
    }
}

/// Runs a configuration, calling `observer(step, field)` at every diagnostic
/// stride (including step 0) and keeping every `snapshot_stride`-th state.
pub fn evolve_observed<F>(config: &SimConfig, rep: &CliffordRep, psi0: SpinorField, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(usize, &SpinorField) -> Result<()>,
{
    let mut ev = Evolver::new(config, rep, psi0)?;
    let mut traj = Trajectory { snapshots: vec![ev.state().clone()] };
    observer(0, ev.state())?;
    while !ev.is_done() {
        ev.advance()?;
        let step = ev.current_step();
        if step % config.diagnostic_stride == 0 {
            observer(step, ev.state())?;
        }
        if step % config.snapshot_stride == 0 {
            traj.snapshots.push(ev.state().clone());
        }
    }
    Ok(traj)
}

pub fn evolve(config: &SimConfig, rep: &CliffordRep, psi0: SpinorField) -> Result<Trajectory> {
    evolve_observed(config, rep, psi0, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_gamma;
    use std::f64::consts::PI;

    fn bump(grid: Grid, s: usize, width: f64) -> SpinorField {
        SpinorField::from_fn(grid, s, 0.0, |x, out| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let g = (-r2 / (width * width)).exp();
            for (c, o) in out.iter_mut().enumerate() {
                *o = C64::new(g * (1.0 + 0.3 * c as f64), 0.2 * g * x[0]);
            }
        })
    }

    #[test]
    fn free_propagation_basics() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 64, 8.0).unwrap();
        let f = bump(g, 2, 1.5);
        assert_eq!(free_propagate(&f, 0.0, &rep).values(), f.values());
        for t in [-10.0, -0.3, 2.5, 10.0] {
            let u = free_propagate(&f, t, &rep);
            assert!((u.norm() - f.norm()).abs() <= 1e-12 * f.norm());
        }
        let a = free_propagate(&free_propagate(&f, 0.7, &rep), 1.9, &rep);
        let b = free_propagate(&f, 2.6, &rep);
        assert!(a.max_difference(&b).unwrap() <= 1e-11);
    }

    #[test]
    fn single_mode_oscillates_at_wavenumber() {
        // k = (π/L, 0): k_aγ⁰γᵃ = k γ⁰γ¹ with eigenvalues ±k.
        let rep = build_gamma(2).unwrap();
        let l = 4.0;
        let g = Grid::new(2, 16, l).unwrap();
        let k = PI / l;
        let v0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let f = SpinorField::from_fn(g, 2, 0.0, |x, out| {
            let ph = C64::from_polar(1.0, k * x[0]);
            out[0] = v0[0] * ph;
            out[1] = v0[1] * ph;
        });
        let t = 0.9;
        let u = free_propagate(&f, t, &rep);
        // exp(-itkA) v0 = cos(kt) v0 - i sin(kt) A v0, A = γ⁰γ¹
        let av = rep.alpha[0].apply_vec(&v0);
        let expect: Vec<C64> = (0..2).map(|c| v0[c] * (k * t).cos() - C64::new(0.0, (k * t).sin()) * av[c]).collect();
        let exact = SpinorField::from_fn(g, 2, t, |x, out| {
            let ph = C64::from_polar(1.0, k * x[0]);
            out[0] = expect[0] * ph;
            out[1] = expect[1] * ph;
        });
        assert!(u.max_difference(&exact).unwrap() <= 1e-13);
        // full period 2π/k returns to the start
        let back = free_propagate(&f, 2.0 * PI / k, &rep);
        assert!(back.max_difference(&f).unwrap() <= 1e-10);
    }

    #[test]
    fn soler_point_flow_is_a_phase() {
        let rep = build_gamma(2).unwrap();
        let model = ModelSpec::soler(&rep);
        let g = Grid::new(2, 8, 1.0).unwrap();
        let mut f = SpinorField::zeros(g, 2, 0.0);
        f.values_mut()[0] = C64::new(1.0, 0.0);
        let dt = 0.37;
        let out = nonlinear_substep(&f, dt, &model, &rep);
        assert!((out.values()[0] - C64::from_polar(1.0, dt)).norm() <= 1e-15);
        assert_eq!(out.values()[1], C64::new(0.0, 0.0));
        assert_eq!(nonlinear_substep(&f, 0.0, &model, &rep).values(), f.values());
    }

    #[test]
    fn soler_flow_preserves_modulus_and_density() {
        let rep = build_gamma(3).unwrap();
        let model = ModelSpec::soler(&rep);
        let g = Grid::new(3, 8, 2.0).unwrap();
        let f = bump(g, 4, 1.0).scaled(C64::new(3.0, 0.0));
        let out = nonlinear_substep(&f, 0.8, &model, &rep);
        for i in 0..g.num_points() {
            assert!((out.abs_sq_at(i) - f.abs_sq_at(i)).abs() <= 1e-14 * (1.0 + f.abs_sq_at(i)));
            let r0 = bilinear_unchecked(f.at(i), f.at(i), &rep.gamma[0]).re;
            let r1 = bilinear_unchecked(out.at(i), out.at(i), &rep.gamma[0]).re;
            assert!((r0 - r1).abs() <= 1e-13 * (1.0 + r0.abs()));
        }
    }

    #[test]
    fn quadratic_substep_matches_spinor_rk4() {
        let rep = build_gamma(3).unwrap();
        let e = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5), C64::new(-0.3, 0.0), C64::new(0.2, 0.1)];
        let model = ModelSpec::quadratic(&rep, e).unwrap();
        let kernel = Kernel::new(&model, &rep);
        let psi0 = [C64::new(0.4, -0.1), C64::new(0.2, 0.3), C64::new(-0.5, 0.0), C64::new(0.1, 0.2)];
        let (dt, h) = (0.3, 0.01);
        let mut fast = psi0;
        kernel.flow_point(&mut fast, dt, h);
        // reference: classical RK4 on the spinor ODE
        let mut psi = psi0;
        let rhs = |p: &[C64; 4]| {
            let mut out = [C64::new(0.0, 0.0); 4];
            kernel.rhs(p, &mut out);
            out
        };
        let axpy = |p: &[C64; 4], k: &[C64; 4], a: f64| {
            let mut out = *p;
            for c in 0..4 {
                out[c] += k[c] * a;
            }
            out
        };
        for _ in 0..30 {
            let k1 = rhs(&psi);
            let k2 = rhs(&axpy(&psi, &k1, h / 2.0));
            let k3 = rhs(&axpy(&psi, &k2, h / 2.0));
            let k4 = rhs(&axpy(&psi, &k3, h));
            for c in 0..4 {
                psi[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
            }
        }
        for c in 0..4 {
            assert!((fast[c] - psi[c]).norm() <= 1e-14, "component {c}");
        }
    }

    #[test]
    fn general_cubic_substep_converges_at_fourth_order() {
        let rep = build_gamma(3).unwrap();
        let h = rep.gamma[0] + Matrix::diagonal(&[C64::new(0.3, 0.0), C64::new(-0.2, 0.0), C64::new(0.1, 0.0), C64::new(0.4, 0.0)]);
        let model = ModelSpec::cubic(&rep, h, rep.identity()).unwrap();
        let g = Grid::new(3, 8, 2.0).unwrap();
        let f = bump(g, 4, 1.0).scaled(C64::new(2.0, 0.0));
        let dt = 0.5;
        let run = |hs: f64| nonlinear_substep_with(&f, dt, &model, &rep, hs);
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let e1 = a.max_difference(&b).unwrap();
        let e2 = b.max_difference(&c).unwrap();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
        // the pointwise modulus is conserved for admissible cubic models up to RK4 error
        for i in 0..g.num_points() {
            let drift = (c.abs_sq_at(i) - f.abs_sq_at(i)).abs() / f.abs_sq_at(i).max(1e-300);
            assert!(drift <= 1e-6, "relative drift {drift}");
        }
    }

    #[test]
    fn strang_reduces_to_free_flow_for_linear_models() {
        let rep = build_gamma(3).unwrap();
        let model = ModelSpec::quadratic(&rep, vec![C64::new(0.0, 0.0); 4]).unwrap();
        let g = Grid::new(3, 16, 4.0).unwrap();
        let f = bump(g, 4, 1.0);
        let a = strang_step(&f, 0.1, &model, &rep);
        let b = free_propagate(&f, 0.1, &rep);
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn strang_preserves_norm_for_cubic_models() {
        let rep = build_gamma(2).unwrap();
        let model = ModelSpec::soler(&rep);
        let g = Grid::new(2, 32, 6.0).unwrap();
        let f = bump(g, 2, 1.0).scaled(C64::new(2.0, 0.0));
        let out = strang_step(&f, 0.05, &model, &rep);
        assert!((out.norm() - f.norm()).abs() <= 1e-12 * f.norm());
    }

    #[test]
    fn oracle_matches_free_flow_to_fifth_order() {
        let rep = build_gamma(2).unwrap();
        let model = ModelSpec::free(&rep);
        let g = Grid::new(2, 32, 8.0).unwrap();
        let f = bump(g, 2, 2.0);
        let err = |dt: f64| {
            oracle_rk4_step(&f, dt, &model, &rep)
                .unwrap()
                .max_difference(&free_propagate(&f, dt, &rep))
                .unwrap()
        };
        let order = (err(0.2) / err(0.1)).log2();
        assert!((order - 5.0).abs() < 0.4, "local order {order}");
        let zero = SpinorField::zeros(g, 2, 0.0);
        let z = oracle_rk4_step(&zero, 0.1, &model, &rep).unwrap();
        assert_eq!(z.sup_abs(), 0.0);
    }

    #[test]
    fn oracle_reports_instability() {
        let rep = build_gamma(2).unwrap();
        let model = ModelSpec::free(&rep);
        let g = Grid::new(2, 64, 2.0).unwrap();
        let f = bump(g, 2, 0.05);
        // |k|·dt far outside the RK4 stability region
        assert!(matches!(oracle_rk4_step(&f, 5.0, &model, &rep), Err(Error::Unstable { .. })));
    }

    #[test]
    fn second_derivative_of_free_field_is_laplacian() {
        let rep = build_gamma(3).unwrap();
        let model = ModelSpec::free(&rep);
        let g = Grid::new(3, 16, 5.0).unwrap();
        let f = bump(g, 4, 1.2);
        let ft = equation_rhs(&f, &model, &rep);
        let ftt = equation_second_derivative(&f, &ft, &model, &rep);
        let mut lap = f.clone();
        apply_spectral_operator(&mut lap, |k, v| {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            v.iter_mut().for_each(|z| *z *= -k2);
        });
        assert!(ftt.max_difference(&lap).unwrap() <= 1e-11 * lap.sup_abs().max(1.0));
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let rep = build_gamma(2).unwrap();
        let model = ModelSpec::soler(&rep);
        let g = Grid::new(2, 32, 6.0).unwrap();
        let f = bump(g, 2, 1.0).scaled(C64::new(1.5, 0.0));
        let ft = equation_rhs(&f, &model, &rep);
        let ftt = equation_second_derivative(&f, &ft, &model, &rep);
        let h = 1e-3;
        let plus = oracle_evolve(&f, h, h / 4.0, &model, &rep).unwrap();
        let minus = oracle_evolve(&f, -h, h / 4.0, &model, &rep).unwrap();
        let fd = plus.add_scaled(&minus, C64::new(1.0, 0.0)).unwrap().add_scaled(&f, C64::new(-2.0, 0.0)).unwrap().scaled(C64::new(1.0 / (h * h), 0.0));
        assert!(fd.max_difference(&ftt).unwrap() <= 1e-4 * ftt.sup_abs());
    }

    #[test]
    fn evolve_edge_cases() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 32, 16.0).unwrap();
        let f = bump(g, 2, 1.0);
        let mut cfg = SimConfig {
            model: ModelSpec::soler(&rep),
            grid: g,
            dt: 0.1,
            t0: 0.0,
            t_final: 0.0,
            snapshot_stride: 1,
            diagnostic_stride: 1,
        };
        let traj = evolve(&cfg, &rep, f.clone()).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0].values(), f.values());

        cfg.t_final = 1.0;
        cfg.snapshot_stride = 5;
        let traj = evolve(&cfg, &rep, f.clone()).unwrap();
        let times = traj.times();
        assert_eq!(times.len(), 3);
        assert!((times[2] - 1.0).abs() < 1e-12);

        let mut huge = f.clone();
        huge.values_mut()[7] = C64::new(2e6, 0.0);
        assert!(matches!(check_divergence(&huge, 12), Err(Error::Divergence { step: 12, .. })));
        huge.values_mut()[7] = C64::new(f64::NAN, 0.0);
        assert!(matches!(check_divergence(&huge, 3), Err(Error::Divergence { step: 3, .. })));
        assert!(check_divergence(&f, 0).is_ok());
    }

    #[test]
    fn evolve_is_deterministic() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 32, 16.0).unwrap();
        let cfg = SimConfig {
            model: ModelSpec::soler(&rep),
            grid: g,
            dt: 0.05,
            t0: 0.0,
            t_final: 0.5,
            snapshot_stride: 10,
            diagnostic_stride: 1,
        };
        let f = bump(g, 2, 1.0);
        let a = evolve(&cfg, &rep, f.clone()).unwrap();
        let b = evolve(&cfg, &rep, f).unwrap();
        assert_eq!(a.last().unwrap().values(), b.last().unwrap().values());
    }

    #[test]
    fn config_validation_names_rules() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 256, 10.0).unwrap();
        let cfg = SimConfig {
            model: ModelSpec::soler(&rep),
            grid: g,
            dt: 0.01,
            t0: 0.0,
            t_final: 40.0,
            snapshot_stride: 1000,
            diagnostic_stride: 10,
        };
        let v = cfg.validate(5.0);
        assert!(v.iter().any(|x| x.rule == "no-wrap rule"));
        let mut ok = cfg.clone();
        ok.grid = Grid::new(2, 256, 64.0).unwrap();
        assert!(ok.validate(14.2).is_empty());
        let mut bad = ok.clone();
        bad.dt = -1.0;
        assert!(bad.validate(1.0).iter().any(|x| x.rule == "dt > 0"));
    }
}
