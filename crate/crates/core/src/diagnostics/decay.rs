//! Weighted sup-norms and power-law fits of decaying observables.

use crate::error::{Error, Result};
use crate::grid::{bracket, SpinorField};
use crate::reduce::max_indexed;

/// `max_x |f(x)|·⟨t + r⟩^a⟨t - r⟩^b` over the grid.
pub fn weighted_sup(f: &SpinorField, t: f64, a: f64, b: f64) -> f64 {
    let g = f.grid();
    max_indexed(g.num_points(), |i| {
        let r = g.radius(i);
        f.abs_sq_at(i).sqrt() * bracket(t + r).powf(a) * bracket(t - r).powf(b)
    })
}

/// Time series of a positive observable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecaySeries {
    points: Vec<(f64, f64)>,
}

impl DecaySeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a series; times must be strictly increasing.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        let mut s = Self::new();
        for (t, v) in points {
            s.push(t, v)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if let Some(&(last, _)) = self.points.last() {
            if !(t > last) {
                return Err(Error::Fit(format!("time {t} does not follow {last}")));
            }
        }
        self.points.push((t, value));
        Ok(())
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// Slope of `log value` against `log t`.
    pub exponent: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 8;

/// Least squares on `(log t, log value)` over the points with `t` in
/// `window`. Needs at least eight positive samples there.
pub fn fit_decay(series: &DecaySeries, window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> =
        series.points.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1).collect();
    loglog_fit(&pts, MIN_FIT_POINTS, window)
}

/// Default fit window `[t_final/4, t_final]`.
pub fn default_window(t_final: f64) -> (f64, f64) {
    (t_final / 4.0, t_final)
}

pub(crate) fn loglog_fit(pts: &[(f64, f64)], min_points: usize, window: (f64, f64)) -> Result<DecayFit> {
    if pts.len() < min_points {
        return Err(Error::Fit(format!("{} points in window, need {min_points}", pts.len())));
    }
    if let Some(&(t, v)) = pts.iter().find(|&&(t, v)| !(t > 0.0 && v > 0.0)) {
        return Err(Error::Fit(format!("nonpositive sample ({t}, {v})")));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one time".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if pts.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(DecayFit { exponent: slope, intercept, stderr, window, points: pts.len() })
}
