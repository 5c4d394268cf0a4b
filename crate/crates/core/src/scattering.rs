//! Scattering states by free pull-back.
//!
//! `S(t₀ - t)ψ(t)` converges as `t → ∞` when the solution scatters; the
//! Cauchy differences between consecutive pull-backs measure the rate.

use crate::clifford::{CliffordRep, ModelSpec, Nonlinearity};
use crate::diagnostics::{loglog_fit, DecayFit};
use crate::error::{Error, Result};
use crate::evolution::{free_propagate, Trajectory};
use crate::grid::{to_spectral, SpinorField};

/// `S(t₀ - t)f` for `f` given at time `t`; the result is stamped `t₀`.
pub fn pullback(f: &SpinorField, t0: f64, rep: &CliffordRep) -> SpinorField {
    free_propagate(f, t0 - f.time(), rep).with_time(t0)
}

/// Differences below this are treated as zero.
pub const NEGLIGIBLE_DIFFERENCE: f64 = 1e-10;
/// Slack added to the theoretical rate exponent.
pub const RATE_SLACK: f64 = 0.1;
pub const MIN_SCATTER_SAMPLES: usize = 4;

/// Upper bound on the fitted Cauchy-difference exponent for the models with
/// a proven rate: `-1/2 + δ` (slack included, `-0.4`) for 2D Soler and
/// `-1/8 + 0.1` for 3D quadratic models.
pub fn rate_bound(model: &ModelSpec, rep: &CliffordRep) -> Option<f64> {
    match (&model.nonlinearity, model.dim) {
        (Nonlinearity::Cubic { .. }, 2) if model.is_soler(rep) => Some(-0.4),
        (Nonlinearity::Quadratic { .. }, 3) if !model.is_linear() => Some(-0.125 + RATE_SLACK),
        _ => None,
    }
}

/// `‖a - b‖` in L² and in `H^s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairDifference {
    pub t_from: f64,
    pub t_to: f64,
    pub l2: f64,
    pub sobolev: f64,
}

fn difference(a: &SpinorField, b: &SpinorField, s: f64) -> Result<(f64, f64)> {
    let diff = a.sub(b)?;
    Ok((diff.norm(), to_spectral(&diff).sobolev_norm(s)))
}

#[derive(Clone, Debug)]
pub struct ScatterRecord {
    pub t0: f64,
    pub sobolev_order: f64,
    pub pullback_times: Vec<f64>,
    pub pullbacks: Vec<SpinorField>,
    /// Consecutive differences `d_j = ‖P(t_{j+1}) - P(t_j)‖`.
    pub differences: Vec<PairDifference>,
    /// Fit of `d_j` (in `H^s`) against `t_j`; `None` when all differences are
    /// negligible.
    pub fit: Option<DecayFit>,
    pub bound: Option<f64>,
    /// `Some(exponent ≤ bound)`; `None` when no bound applies.
    pub consistent: Option<bool>,
    /// Each of the last three differences is smaller than its predecessor.
    pub scattering_trend: bool,
}

impl ScatterRecord {
    /// The last pull-back, reported as the scattering state.
    pub fn scattering_state(&self) -> &SpinorField {
        self.pullbacks.last().expect("records hold at least four pull-backs")
    }

    /// The last Cauchy difference in `H^s`, the error bar on the state.
    pub fn cauchy_tail(&self) -> f64 {
        self.differences.last().map_or(0.0, |d| d.sobolev)
    }

    /// Difference between any two pull-backs.
    pub fn pair_difference(&self, j: usize, k: usize) -> Result<PairDifference> {
        let (l2, sobolev) = difference(&self.pullbacks[k], &self.pullbacks[j], self.sobolev_order)?;
        Ok(PairDifference { t_from: self.pullback_times[j], t_to: self.pullback_times[k], l2, sobolev })
    }

    /// CSV with header `t,t_next,d_l2,d_hs` and a footer row
    /// `exponent,<value>,consistent,<flag>`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,t_next,d_l2,d_hs\n");
        for d in &self.differences {
            s += &format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", d.t_from, d.t_to, d.l2, d.sobolev);
        }
        let exponent = self.fit.map_or("nan".to_string(), |f| format!("{:.16e}", f.exponent));
        let consistent = self.consistent.map_or("n/a".to_string(), |c| c.to_string());
        s += &format!("exponent,{exponent},consistent,{consistent}\n");
        s
    }
}

/// Pull-backs of every snapshot, their consecutive differences, and the
/// fitted decay rate of the differences.
pub fn scatter_analysis(
    traj: &Trajectory,
    t0: f64,
    rep: &CliffordRep,
    sobolev_order: f64,
    bound: Option<f64>,
) -> Result<ScatterRecord> {
    if !(0.0..=2.0).contains(&sobolev_order) {
        return Err(Error::Scatter(format!("Sobolev order {sobolev_order} outside [0, 2]")));
    }
    let snaps = &traj.snapshots;
    if snaps.len() < MIN_SCATTER_SAMPLES {
        return Err(Error::Scatter(format!(
            "{} snapshots, need at least {MIN_SCATTER_SAMPLES}",
            snaps.len()
        )));
    }
    if snaps.windows(2).any(|w| !(w[1].time() > w[0].time())) {
        return Err(Error::Scatter("snapshot times are not increasing".into()));
    }
    let pullback_times: Vec<f64> = snaps.iter().map(|f| f.time()).collect();
    let pullbacks: Vec<SpinorField> = snaps.iter().map(|f| pullback(f, t0, rep)).collect();
    let mut differences = Vec::with_capacity(pullbacks.len() - 1);
    for j in 0..pullbacks.len() - 1 {
        let (l2, sobolev) = difference(&pullbacks[j + 1], &pullbacks[j], sobolev_order)?;
        differences.push(PairDifference { t_from: pullback_times[j], t_to: pullback_times[j + 1], l2, sobolev });
    }
    let negligible = differences.iter().all(|d| d.sobolev <= NEGLIGIBLE_DIFFERENCE);
    let (fit, consistent, scattering_trend) = if negligible {
        (None, bound.map(|_| true), true)
    } else {
        let pts: Vec<(f64, f64)> = differences.iter().map(|d| (d.t_from, d.sobolev)).collect();
        let window = (pts[0].0, pts[pts.len() - 1].0);
        let fit = loglog_fit(&pts, MIN_SCATTER_SAMPLES - 1, window)?;
        let tail = differences.len().min(4);
        let last = &differences[differences.len() - tail..];
        let trend = last.windows(2).all(|w| w[1].sobolev < w[0].sobolev);
        (Some(fit), bound.map(|b| fit.exponent <= b), trend)
    };
    Ok(ScatterRecord {
        t0,
        sobolev_order,
        pullback_times,
        pullbacks,
        differences,
        fit,
        bound,
        consistent,
        scattering_trend,
    })
}

/// Indices of the snapshots closest to `base·2^j`, `j = 0, 1, …`, keeping
/// those within `tolerance` of their target.
pub fn dyadic_ladder(times: &[f64], base: f64, tolerance: f64) -> Vec<usize> {
    let Some(&t_max) = times.iter().max_by(|a, b| a.total_cmp(b)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut target = base;
    while target <= t_max + tolerance && base > 0.0 {
        if let Some((i, t)) = times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        {
            if (t - target).abs() <= tolerance && out.last() != Some(&i) {
                out.push(i);
            }
        }
        target *= 2.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_gamma;
    use crate::grid::Grid;
    use crate::C64;

    fn packet(g: Grid, s: usize) -> SpinorField {
        SpinorField::from_fn(g, s, 0.0, |x, out| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            out[0] = C64::from_polar((-r2 / 2.0).exp(), x[0]);
            out[1] = C64::new(0.2 * (-r2).exp(), 0.0);
        })
    }

    fn free_traj(rep: &CliffordRep, g: Grid, times: &[f64]) -> Trajectory {
        let f0 = packet(g, rep.spinor_size);
        Trajectory { snapshots: times.iter().map(|&t| free_propagate(&f0, t, rep)).collect() }
    }

    #[test]
    fn pullback_inverts_free_flow() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 64, 16.0).unwrap();
        let f0 = packet(g, 2);
        for t in [0.0, 1.5, 7.0] {
            let back = pullback(&free_propagate(&f0, t, &rep), 0.0, &rep);
            assert!(back.max_difference(&f0).unwrap() <= 1e-10);
            assert_eq!(back.time(), 0.0);
        }
        assert_eq!(pullback(&f0, 0.0, &rep), f0);
    }

    #[test]
    fn free_trajectory_has_no_tail() {
        let rep = build_gamma(3).unwrap();
        let g = Grid::new(3, 16, 8.0).unwrap();
        let rec = scatter_analysis(&free_traj(&rep, g, &[1.0, 2.0, 4.0, 8.0]), 1.0, &rep, 1.0, Some(-0.4)).unwrap();
        assert!(rec.differences.iter().all(|d| d.sobolev <= 1e-10));
        assert!(rec.fit.is_none());
        assert_eq!(rec.consistent, Some(true));
        assert!(rec.scattering_trend);
        assert!(rec.cauchy_tail() <= 1e-10);
        assert!(rec.to_csv().ends_with("exponent,nan,consistent,true\n"));
    }

    #[test]
    fn planted_power_law() {
        // P(t_j) = f0 + c_j·h with c_{j+1} - c_j = t_j^{-1/2}
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 32, 8.0).unwrap();
        let f0 = packet(g, 2);
        let h = f0.scaled(C64::new(1.0 / f0.norm(), 0.0));
        let times = [2.0f64, 4.0, 8.0, 16.0, 32.0, 64.0];
        let mut c = 0.0;
        let mut snaps = Vec::new();
        for (j, &t) in times.iter().enumerate() {
            if j > 0 {
                c += times[j - 1].powf(-0.5);
            }
            let p = f0.add_scaled(&h, C64::new(c, 0.0)).unwrap();
            snaps.push(free_propagate(&p, t, &rep));
        }
        let rec = scatter_analysis(&Trajectory { snapshots: snaps }, 0.0, &rep, 0.0, Some(-0.4)).unwrap();
        let fit = rec.fit.unwrap();
        assert!((fit.exponent + 0.5).abs() <= 0.02, "{}", fit.exponent);
        assert_eq!(rec.consistent, Some(true));
        assert!(rec.scattering_trend);
        let pair = rec.pair_difference(0, 2).unwrap();
        let back = rec.pair_difference(2, 0).unwrap();
        assert!((pair.l2 - back.l2).abs() <= 1e-15 && pair.l2 > 0.0);
    }

    #[test]
    fn sobolev_norms_are_ordered() {
        let g = Grid::new(2, 32, 8.0).unwrap();
        let a = packet(g, 2);
        let b = a.multiply_by(|x| 1.0 + 0.1 * x[1].sin());
        let norms: Vec<f64> = (0..=2).map(|s| difference(&a, &b, s as f64).unwrap().1).collect();
        assert!(norms[0] <= norms[1] && norms[1] <= norms[2]);
        assert!((norms[0] - difference(&a, &b, 0.0).unwrap().0).abs() <= 1e-14);
    }

    #[test]
    fn growing_differences_flag_no_trend() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 32, 8.0).unwrap();
        let f0 = packet(g, 2);
        let snaps: Vec<SpinorField> = [1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&t| free_propagate(&f0.scaled(C64::new(1.0 + t * t, 0.0)), t, &rep))
            .collect();
        let rec = scatter_analysis(&Trajectory { snapshots: snaps }, 0.0, &rep, 0.0, None).unwrap();
        assert!(!rec.scattering_trend);
        assert_eq!(rec.consistent, None);
    }

    #[test]
    fn input_validation() {
        let rep = build_gamma(2).unwrap();
        let g = Grid::new(2, 16, 8.0).unwrap();
        assert!(matches!(scatter_analysis(&free_traj(&rep, g, &[1.0, 2.0, 3.0]), 0.0, &rep, 0.0, None), Err(Error::Scatter(_))));
        let t = free_traj(&rep, g, &[1.0, 2.0, 3.0, 4.0]);
        assert!(scatter_analysis(&t, 0.0, &rep, 2.5, None).is_err());
        let back = free_traj(&rep, g, &[1.0, 3.0, 2.0, 4.0]);
        assert!(scatter_analysis(&back, 0.0, &rep, 0.0, None).is_err());
    }

    #[test]
    fn rate_bounds_by_model() {
        let r2 = build_gamma(2).unwrap();
        let r3 = build_gamma(3).unwrap();
        assert_eq!(rate_bound(&ModelSpec::soler(&r2), &r2), Some(-0.4));
        let q = ModelSpec::quadratic(&r3, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!((rate_bound(&q, &r3).unwrap() + 0.025).abs() < 1e-15);
        assert_eq!(rate_bound(&ModelSpec::soler(&r3), &r3), None);
        assert_eq!(rate_bound(&ModelSpec::free(&r2), &r2), None);
    }

    #[test]
    fn dyadic_ladder_selection() {
        let times: Vec<f64> = (0..=16).map(|k| k as f64 * 5.0).collect();
        assert_eq!(dyadic_ladder(&times, 5.0, 1e-9), vec![1, 2, 4, 8, 16]);
        assert_eq!(dyadic_ladder(&times, 7.0, 1e-9), Vec::<usize>::new());
        assert!(dyadic_ladder(&[], 1.0, 0.1).is_empty());
    }
}
