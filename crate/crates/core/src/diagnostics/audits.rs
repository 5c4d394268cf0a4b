//! Pointwise inequality audits: Klainerman–Sobolev and the `⟨t - r⟩|∂u|`
//! bound.

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{bracket, gradient, SpinorField};
use crate::reduce::max_indexed;

use super::vectorfields::{modified_family, vectorfield_terms, TimeJet};

/// Result of the Klainerman–Sobolev audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsAudit {
    /// `max_x |f|⟨t + r⟩^{(d-1)/2}⟨t - r⟩^{1/2}`.
    pub weighted_sup: f64,
    /// `Σ_{|I|≤2} ‖Γ̂^I f‖`.
    pub vectorfield_sum: f64,
    pub ratio: f64,
}

/// Klainerman–Sobolev ratio of a field given its order-2 jet.
pub fn ks_audit(jet: &TimeJet, rep: &CliffordRep) -> Result<KsAudit> {
    if jet.order() < 2 {
        return Err(Error::MissingTimeDerivative(format!(
            "Klainerman-Sobolev audit needs a jet of order 2, got {}",
            jet.order()
        )));
    }
    let f = jet.value();
    let t = jet.time();
    let g = f.grid();
    let a = (g.dim() as f64 - 1.0) / 2.0;
    let weighted_sup = max_indexed(g.num_points(), |i| {
        let r = g.radius(i);
        f.abs_sq_at(i).sqrt() * bracket(t + r).powf(a) * bracket(t - r).sqrt()
    });
    let family = modified_family(rep);
    let vectorfield_sum: f64 = vectorfield_terms(jet, 2, &family)?.iter().map(|t| t.field.norm()).sum();
    if vectorfield_sum == 0.0 {
        return Err(Error::ZeroDenominator("Klainerman-Sobolev audit of a zero field"));
    }
    Ok(KsAudit { weighted_sup, vectorfield_sum, ratio: weighted_sup / vectorfield_sum })
}

/// Result of the `⟨t - r⟩|∂u| ≤ C Σ_{|J|≤1}|Γ̂^J u|` audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeBoundAudit {
    /// Largest observed `C` over the audited points.
    pub max_ratio: f64,
    pub points: usize,
}

/// Pointwise audit over points with `r ≤ interior·L` where the right-hand
/// side exceeds `1e-8` of its maximum. `|∂u|` is the Euclidean norm of
/// `(∂_t u, ∇u)`.
pub fn derivative_bound_audit(jet: &TimeJet, rep: &CliffordRep, interior: f64) -> Result<DerivativeBoundAudit> {
    let ft = jet
        .level(1)
        .ok_or_else(|| Error::MissingTimeDerivative("derivative bound audit needs ∂_t u".into()))?;
    let f = jet.value();
    let t = jet.time();
    let g = *f.grid();
    let first = TimeJet::new(vec![f.clone(), ft.clone()])?;
    let terms = vectorfield_terms(&first, 1, &modified_family(rep))?;
    let grads = gradient(f);
    let abs = |h: &SpinorField, i: usize| h.abs_sq_at(i).sqrt();
    let rhs = |i: usize| terms.iter().map(|term| abs(&term.field, i)).sum::<f64>();
    let lhs = |i: usize| {
        let d2 = ft.abs_sq_at(i) + grads.iter().map(|h| h.abs_sq_at(i)).sum::<f64>();
        bracket(t - g.radius(i)) * d2.sqrt()
    };
    let rmax = interior * g.half_width();
    let floor = 1e-8 * max_indexed(g.num_points(), rhs);
    let inside = |i: usize| g.radius(i) <= rmax && rhs(i) > floor;
    let max_ratio = max_indexed(g.num_points(), |i| if inside(i) { lhs(i) / rhs(i) } else { 0.0 });
    let points = (0..g.num_points()).filter(|&i| inside(i)).count();
    Ok(DerivativeBoundAudit { max_ratio, points })
}
