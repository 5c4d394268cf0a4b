//! Ghost-weight energy: `‖φ(t)‖² + ∫∫ |[φ]₋|² / ⟨τ - r⟩^{1+2δ} dx dτ`.

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{bracket, SpinorField};
use crate::reduce::sum_indexed;

use super::minus_part_at;

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct GhostEnergyAccumulator {
    delta: f64,
    running_integral: f64,
    last_l2: f64,
    /// `(t, increment)` per update.
    history: Vec<(f64, f64)>,
}

impl GhostEnergyAccumulator {
    /// Requires `δ ∈ (0, 1/8)`.
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.125) {
            return Err(Error::Data(format!("ghost exponent δ = {delta} outside (0, 1/8)")));
        }
        Ok(GhostEnergyAccumulator { delta, running_integral: 0.0, last_l2: 0.0, history: Vec::new() })
    }

    /// Restores a saved state.
    pub fn from_parts(delta: f64, running_integral: f64, last_l2: f64, history: Vec<(f64, f64)>) -> Result<Self> {
        let mut acc = Self::new(delta)?;
        acc.running_integral = running_integral;
        acc.last_l2 = last_l2;
        acc.history = history;
        Ok(acc)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn running_integral(&self) -> f64 {
        self.running_integral
    }

    pub fn last_l2(&self) -> f64 {
        self.last_l2
    }

    pub fn history(&self) -> &[(f64, f64)] {
        &self.history
    }

    /// `‖φ‖² + running integral`.
    pub fn energy(&self) -> f64 {
        self.last_l2 + self.running_integral
    }

    /// Adds `dt·∫|[f]₋|²/⟨t - r⟩^{1+2δ}dx` and records `‖f‖²`.
    pub fn update(&mut self, f: &SpinorField, t: f64, dt: f64, rep: &CliffordRep) -> f64 {
        assert!(dt > 0.0, "ghost update needs dt > 0");
        let inc = dt * ghost_integrand(f, t, self.delta, rep);
        self.running_integral += inc;
        self.last_l2 = f.norm_sq();
        self.history.push((t, inc));
        inc
    }

    /// Average increment per unit time over updates with `t ∈ [lo, hi]`.
    pub fn rate_over(&self, lo: f64, hi: f64) -> Option<f64> {
        let inside: Vec<&(f64, f64)> = self.history.iter().filter(|(t, _)| *t >= lo && *t <= hi).collect();
        if inside.is_empty() || hi <= lo {
            return None;
        }
        Some(inside.iter().map(|(_, inc)| inc).sum::<f64>() / (hi - lo))
    }
}

/// `∫|[f]₋|²/⟨t - r⟩^{1+2δ}dx` by Riemann sum.
pub fn ghost_integrand(f: &SpinorField, t: f64, delta: f64, rep: &CliffordRep) -> f64 {
    let g = f.grid();
    let s = f.spinor_size();
    let power = 1.0 + 2.0 * delta;
    let sum = sum_indexed(g.num_points(), |i| {
        let x = g.point(i);
        let mut m = [crate::C64::new(0.0, 0.0); 4];
        minus_part_at(rep, &x[..g.dim()], f.at(i), &mut m[..s]);
        let sq: f64 = m[..s].iter().map(|z| z.norm_sqr()).sum();
        sq / bracket(t - g.radius(i)).powf(power)
    });
    sum * g.cell_volume()
}

/// Functional form of [`GhostEnergyAccumulator::update`].
pub fn ghost_update(
    mut acc: GhostEnergyAccumulator,
    f: &SpinorField,
    t: f64,
    dt: f64,
    rep: &CliffordRep,
) -> GhostEnergyAccumulator {
    acc.update(f, t, dt, rep);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_gamma;
    use crate::diagnostics::minus_part;
    use crate::grid::Grid;
    use crate::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn delta_range() {
        assert!(GhostEnergyAccumulator::new(0.05).is_ok());
        for d in [0.0, 0.125, 0.2, -0.01] {
            assert!(GhostEnergyAccumulator::new(d).is_err());
        }
    }

    #[test]
    fn zero_field_adds_nothing() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 16, 4.0).unwrap();
        let mut acc = GhostEnergyAccumulator::new(DEFAULT_DELTA).unwrap();
        assert_eq!(acc.update(&SpinorField::zeros(g, 2, 0.0), 1.0, 0.1, &rep), 0.0);
        assert_eq!(acc.energy(), 0.0);
    }

    #[test]
    fn thin_shell_weight_is_one() {
        // f lives where r ≈ t, so ⟨t - r⟩ ≈ 1 and the increment is dt·‖[f]₋‖²
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 512, 16.0).unwrap();
        let t = 8.0;
        let f = SpinorField::from_fn(g, 2, t, |x, out| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let e = (-((r - t) / 0.02).powi(2)).exp();
            out[0] = C64::new(e, 0.0);
            out[1] = C64::new(0.0, 0.5 * e);
        });
        let dt = 0.01;
        let mut acc = GhostEnergyAccumulator::new(DEFAULT_DELTA).unwrap();
        let inc = acc.update(&f, t, dt, &rep);
        let expected = dt * minus_part(&f, &rep).norm_sq();
        assert!(((inc - expected) / expected).abs() < 1e-3, "{inc} vs {expected}");
        assert_eq!(acc.last_l2(), f.norm_sq());
    }

    #[test]
    fn accumulator_is_monotone() {
        let rep = build_gamma(3).unwrap();
        let g = Grid::new(3, 8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut acc = GhostEnergyAccumulator::new(0.1).unwrap();
        let mut last = 0.0;
        for k in 0..100 {
            let vals = (0..g.num_points() * 4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let f = SpinorField::new(g, 4, 0.0, vals.collect()).unwrap();
            acc.update(&f, k as f64 * 0.1, rng.gen_range(0.001..0.5), &rep);
            assert!(acc.running_integral() >= last);
            last = acc.running_integral();
        }
        assert_eq!(acc.history().len(), 100);
        assert!(acc.rate_over(0.0, 9.9).unwrap() > 0.0);
        assert!(acc.rate_over(20.0, 30.0).is_none());
    }
}
