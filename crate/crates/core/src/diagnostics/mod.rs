//! Observables along a solution: vector-field energies, ghost-weight
//! integrals, weighted sup-norms, decay fits and inequality audits.
//!
//! All diagnostics only read fields.

mod audits;
mod decay;
mod ghost;
mod vectorfields;

pub use audits::{derivative_bound_audit, ks_audit, DerivativeBoundAudit, KsAudit};
pub use decay::{default_window, fit_decay, weighted_sup, DecayFit, DecaySeries, MIN_FIT_POINTS};
pub use ghost::{ghost_integrand, ghost_update, GhostEnergyAccumulator, DEFAULT_DELTA};
pub use vectorfields::{
    apply_to_jet, apply_vectorfield, commutator_residual, commutator_residuals, dirac_operator, modified_family, vectorfield_energy,
    vectorfield_terms, EnergyEntry, TimeJet, VectorFieldKind, VectorFieldOp, VectorFieldTerm,
};

pub(crate) use decay::loglog_fit;

use rayon::prelude::*;

use crate::clifford::CliffordRep;
use crate::grid::{shell_sup_of, SpinorField};
use crate::reduce::max_indexed;
use crate::C64;

/// `[v]₋ = v - (x_a/r)γ⁰γᵃv` at the point `x`; the origin uses direction
/// `(1, 0, …)`.
#[inline]
pub(crate) fn minus_part_at(rep: &CliffordRep, x: &[f64], v: &[C64], out: &mut [C64]) {
    let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    out.copy_from_slice(v);
    let mut tmp = [C64::new(0.0, 0.0); 4];
    let s = v.len();
    for (a, alpha) in rep.alpha.iter().enumerate() {
        let n = if r > 0.0 { x[a] / r } else if a == 0 { 1.0 } else { 0.0 };
        if n == 0.0 {
            continue;
        }
        alpha.apply(v, &mut tmp[..s]);
        for (o, t) in out.iter_mut().zip(&tmp[..s]) {
            *o -= t * n;
        }
    }
}

/// The field `[f]₋`.
pub fn minus_part(f: &SpinorField, rep: &CliffordRep) -> SpinorField {
    let g = *f.grid();
    let s = f.spinor_size();
    let d = g.dim();
    let mut out = f.clone();
    out.values_mut().par_chunks_mut(s).enumerate().for_each(|(i, o)| {
        let x = g.point(i);
        minus_part_at(rep, &x[..d], f.at(i), o);
    });
    out
}

fn minus_abs_at(f: &SpinorField, rep: &CliffordRep, i: usize) -> f64 {
    let g = f.grid();
    let x = g.point(i);
    let mut m = [C64::new(0.0, 0.0); 4];
    let s = f.spinor_size();
    minus_part_at(rep, &x[..g.dim()], f.at(i), &mut m[..s]);
    m[..s].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `max_x |[f]₋(x)|`.
pub fn sup_minus(f: &SpinorField, rep: &CliffordRep) -> f64 {
    max_indexed(f.grid().num_points(), |i| minus_abs_at(f, rep, i))
}

/// Shell sups of `|[f]₋|` on the `|r - t|` partition used by
/// [`crate::grid::shell_sup`].
pub fn minus_part_profile(f: &SpinorField, t: f64, rep: &CliffordRep, shell_width: f64) -> Vec<(f64, f64)> {
    shell_sup_of(f.grid(), t, shell_width, |i| minus_abs_at(f, rep, i))
}

/// One `t,observable,value` series row with 17 significant digits.
pub fn csv_row(t: f64, observable: &str, value: f64) -> String {
    format!("{t:.16e},{observable},{value:.16e}\n")
}
