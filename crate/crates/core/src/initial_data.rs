//! The explicit large-data family and audits of its weighted norms.
//!
//! A datum is `ψ₀ = ((ϕ_ε + εϕ)/‖ϕ_ε + εϕ‖, 0, …, 0)` with
//! `ϕ_ε(x) = ε^{d/2} ϕ(εx)`: unit L² norm, but weighted derivative norms of
//! order `ε`.

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordRep, ModelSpec};
use crate::error::{Error, Result};
use crate::evolution::equation_rhs;
use crate::grid::{gradient_weighted_norm, weighted_norm, Grid, SpinorField};
use crate::reduce::sum_indexed;
use crate::C64;

/// Radial profile `ϕ(|x|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(-|x|²)`.
    Gaussian,
    /// `exp(1 - 1/(1 - |x|²))` on the unit ball, zero outside.
    Bump,
    /// `⟨x⟩^{-rate}`.
    PolynomialDecay { rate: f64 },
}

impl Profile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Gaussian => (-r * r).exp(),
            Profile::Bump => {
                if r < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            Profile::PolynomialDecay { rate } => (1.0 + r * r).powf(-rate / 2.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataFamilyParams {
    pub profile: Profile,
    pub epsilon: f64,
    pub dim: usize,
}

pub const MAX_EPSILON: f64 = 0.5;

impl DataFamilyParams {
    pub fn gaussian(epsilon: f64, dim: usize) -> Self {
        DataFamilyParams { profile: Profile::Gaussian, epsilon, dim }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON) {
            return Err(Error::Data(format!("ε must lie in (0, {MAX_EPSILON}], got {}", self.epsilon)));
        }
        if let Profile::PolynomialDecay { rate } = self.profile {
            // ⟨x⟩^{-rate} is in L² iff rate > d/2
            if !(rate > self.dim as f64 / 2.0) {
                return Err(Error::Data(format!(
                    "polynomial decay rate {rate} is not square integrable in {} dimensions",
                    self.dim
                )));
            }
        }
        Ok(())
    }
}

/// Builds the normalized datum on `grid` at time `t = 0`.
pub fn build_large_datum(params: &DataFamilyParams, grid: &Grid, rep: &CliffordRep) -> Result<SpinorField> {
    params.validate()?;
    if params.dim != grid.dim() || rep.dim != grid.dim() {
        return Err(Error::Data(format!(
            "dimension mismatch: params d = {}, grid d = {}, representation d = {}",
            params.dim,
            grid.dim(),
            rep.dim
        )));
    }
    let eps = params.epsilon;
    let amp = eps.powf(params.dim as f64 / 2.0);
    let profile = params.profile;
    let raw = SpinorField::from_fn(*grid, rep.spinor_size, 0.0, |x, out| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        out[0] = C64::new(amp * profile.eval(eps * r) + eps * profile.eval(r), 0.0);
    });
    let norm = raw.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Data(format!("profile has norm {norm} on this grid")));
    }
    Ok(raw.scaled(C64::new(1.0 / norm, 0.0)))
}

/// Root-mean-square radius `sqrt(∫|x|²|f|² / ∫|f|²)`, used as the support
/// radius in the no-wrap rule.
pub fn effective_radius(f: &SpinorField) -> f64 {
    let g = f.grid();
    let mass = sum_indexed(g.num_points(), |i| f.abs_sq_at(i));
    if mass == 0.0 {
        return 0.0;
    }
    let moment = sum_indexed(g.num_points(), |i| g.radius(i).powi(2) * f.abs_sq_at(i));
    (moment / mass).sqrt()
}

/// All multi-indices of length `dim` with total order `order`.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(dim - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn label(prefix: &str, mi: &[usize]) -> String {
    let parts: Vec<String> = mi
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(a, &m)| if m == 1 { format!("d{}", a + 1) } else { format!("d{}^{}", a + 1, m) })
        .collect();
    if parts.is_empty() {
        prefix.to_string()
    } else {
        format!("{prefix} {}", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEntry {
    pub label: String,
    pub multi_index: Vec<usize>,
    pub value: f64,
}

pub const L2_THRESHOLD: f64 = 2.0;
pub const BOUNDED_THRESHOLD: f64 = 20.0;
pub const MAX_AUDIT_ORDER: usize = 4;

/// Weighted norms of a datum against the large-data conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct DataAudit {
    pub order: usize,
    pub l2_norm: f64,
    /// `‖⟨x⟩^{|I|}∂^Iψ₀‖` for every multi-index `|I| ≤ order`.
    pub bounded_norms: Vec<NormEntry>,
    /// `‖⟨x⟩^{|J|}∇∂^Jψ₀‖` for every multi-index `|J| ≤ order - 1`.
    pub small_norms: Vec<NormEntry>,
    pub bounded_sum: f64,
    pub small_sum: f64,
    pub small_threshold: f64,
    pub passes_l2: bool,
    pub passes_bounded: bool,
    pub passes_small: bool,
}

impl DataAudit {
    pub fn passes(&self) -> bool {
        self.passes_l2 && self.passes_bounded && self.passes_small
    }

    /// CSV block with header `label,value,threshold,pass`; individual norms
    /// leave the threshold and pass columns empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,value,threshold,pass\n");
        s += &format!("l2,{:.16e},{},{}\n", self.l2_norm, L2_THRESHOLD, self.passes_l2);
        for e in &self.bounded_norms {
            s += &format!("bounded {},{:.16e},,\n", e.label, e.value);
        }
        s += &format!("bounded_sum,{:.16e},{},{}\n", self.bounded_sum, BOUNDED_THRESHOLD, self.passes_bounded);
        for e in &self.small_norms {
            s += &format!("small {},{:.16e},,\n", e.label, e.value);
        }
        s += &format!("small_sum,{:.16e},{},{}\n", self.small_sum, self.small_threshold, self.passes_small);
        s
    }
}

pub fn audit_data_conditions(psi0: &SpinorField, order: usize, epsilon_threshold: f64) -> Result<DataAudit> {
    if order > MAX_AUDIT_ORDER {
        return Err(Error::Data(format!("audit order {order} exceeds {MAX_AUDIT_ORDER}")));
    }
    let d = psi0.grid().dim();
    let mut bounded_norms = Vec::new();
    for k in 0..=order {
        for mi in multi_indices(d, k) {
            let value = weighted_norm(psi0, k as f64, &mi)?;
            bounded_norms.push(NormEntry { label: label("psi0", &mi), multi_index: mi, value });
        }
    }
    let mut small_norms = Vec::new();
    for k in 0..order {
        for mi in multi_indices(d, k) {
            let value = gradient_weighted_norm(psi0, k as f64, &mi)?;
            small_norms.push(NormEntry { label: label("grad psi0", &mi), multi_index: mi, value });
        }
    }
    let l2_norm = psi0.norm();
    let bounded_sum: f64 = bounded_norms.iter().map(|e| e.value).sum();
    let small_sum: f64 = small_norms.iter().map(|e| e.value).sum();
    Ok(DataAudit {
        order,
        l2_norm,
        bounded_norms,
        small_norms,
        bounded_sum,
        small_sum,
        small_threshold: epsilon_threshold,
        passes_l2: l2_norm < L2_THRESHOLD,
        passes_bounded: bounded_sum < BOUNDED_THRESHOLD,
        passes_small: small_sum < epsilon_threshold,
    })
}

/// `∂_tψ(t₀)` by substituting the equation.
pub fn time_derivative_at_t0(psi0: &SpinorField, model: &ModelSpec, rep: &CliffordRep) -> SpinorField {
    equation_rhs(psi0, model, rep)
}
