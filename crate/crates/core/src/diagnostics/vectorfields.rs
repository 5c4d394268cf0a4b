//! Vector fields acting on time jets.
//!
//! A field `Γf` at time `t` involves `∂_t f`, so vector fields act on a
//! [`TimeJet`] `(f, ∂_t f, ∂_t² f, …)` and return the jet of `Γf`, one order
//! shorter when `Γ` contains `∂_t`. Spatial derivatives are spectral; time
//! derivatives come from the equation or from finite differences.

use std::fmt;

use rayon::prelude::*;

use crate::clifford::{CliffordRep, Matrix, ModelSpec};
use crate::error::{Error, Result};
use crate::evolution::{equation_rhs, equation_second_derivative};
use crate::grid::{gradient, SpinorField};
use crate::C64;

/// The unmodified vector fields and their modified counterparts.
/// Spatial indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorFieldKind {
    /// `∂_α`, `α = 0` being time.
    Translation(usize),
    /// `L_a = x_a∂_t + t∂_a`.
    Boost(usize),
    /// `Ω_ab = x_a∂_b - x_b∂_a`.
    Rotation(usize, usize),
    /// `S = t∂_t + x^a∂_a`.
    Scaling,
    /// `L̂_a = L_a - ½γ⁰γᵃ`.
    ModifiedBoost(usize),
    /// `Ω̂_ab = Ω_ab - ½γᵃγᵇ`.
    ModifiedRotation(usize, usize),
}

impl VectorFieldKind {
    pub fn involves_time(&self) -> bool {
        matches!(
            self,
            VectorFieldKind::Translation(0)
                | VectorFieldKind::Boost(_)
                | VectorFieldKind::ModifiedBoost(_)
                | VectorFieldKind::Scaling
        )
    }
}

/// A vector field together with its constant correction matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldOp {
    kind: VectorFieldKind,
    correction: Option<Matrix>,
}

impl VectorFieldOp {
    pub fn new(kind: VectorFieldKind, rep: &CliffordRep) -> Result<Self> {
        let d = rep.dim;
        let spatial = |a: usize| (1..=d).contains(&a);
        let pair = |a: usize, b: usize| spatial(a) && spatial(b) && a < b;
        let ok = match kind {
            VectorFieldKind::Translation(alpha) => alpha <= d,
            VectorFieldKind::Boost(a) | VectorFieldKind::ModifiedBoost(a) => spatial(a),
            VectorFieldKind::Rotation(a, b) | VectorFieldKind::ModifiedRotation(a, b) => pair(a, b),
            VectorFieldKind::Scaling => true,
        };
        if !ok {
            return Err(Error::Grid(format!("vector field {kind:?} out of range for d = {d}")));
        }
        let correction = match kind {
            VectorFieldKind::ModifiedBoost(a) => Some(rep.boost_corrections[a - 1]),
            VectorFieldKind::ModifiedRotation(a, b) => rep.rotation_correction(a, b),
            _ => None,
        };
        Ok(VectorFieldOp { kind, correction })
    }

    pub fn kind(&self) -> VectorFieldKind {
        self.kind
    }

    pub fn correction(&self) -> Option<&Matrix> {
        self.correction.as_ref()
    }
}

impl fmt::Display for VectorFieldOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VectorFieldKind::Translation(0) => write!(f, "dt"),
            VectorFieldKind::Translation(a) => write!(f, "d{a}"),
            VectorFieldKind::Boost(a) => write!(f, "L{a}"),
            VectorFieldKind::Rotation(a, b) => write!(f, "O{a}{b}"),
            VectorFieldKind::Scaling => write!(f, "S"),
            VectorFieldKind::ModifiedBoost(a) => write!(f, "L{a}^"),
            VectorFieldKind::ModifiedRotation(a, b) => write!(f, "O{a}{b}^"),
        }
    }
}

/// The ordered family `{S, ∂_t, ∂_1..∂_d, L̂_1..L̂_d, Ω̂_ab}`: 7 fields in 2D,
/// 11 in 3D.
pub fn modified_family(rep: &CliffordRep) -> Vec<VectorFieldOp> {
    let d = rep.dim;
    let mut kinds = vec![VectorFieldKind::Scaling];
    kinds.extend((0..=d).map(VectorFieldKind::Translation));
    kinds.extend((1..=d).map(VectorFieldKind::ModifiedBoost));
    for a in 1..=d {
        for b in a + 1..=d {
            kinds.push(VectorFieldKind::ModifiedRotation(a, b));
        }
    }
    kinds.into_iter().map(|k| VectorFieldOp::new(k, rep).expect("kinds built in range")).collect()
}

/// Time derivatives `∂_t^m f`, `m = 0..=order`, at a common time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeJet {
    derivs: Vec<SpinorField>,
}

impl TimeJet {
    pub fn new(derivs: Vec<SpinorField>) -> Result<Self> {
        let first = derivs.first().ok_or_else(|| Error::MissingTimeDerivative("empty jet".into()))?;
        for d in &derivs[1..] {
            if d.grid() != first.grid() || d.spinor_size() != first.spinor_size() {
                return Err(Error::Grid("jet levels live on different grids".into()));
            }
        }
        let t = first.time();
        Ok(TimeJet { derivs: derivs.into_iter().map(|f| f.with_time(t)).collect() })
    }

    /// `(f, ∂_t f, …)` up to `order ≤ 2` by substituting the equation.
    pub fn from_equation(f: &SpinorField, order: usize, model: &ModelSpec, rep: &CliffordRep) -> Result<Self> {
        if order > 2 {
            return Err(Error::MissingTimeDerivative(format!("equation jets stop at order 2, asked for {order}")));
        }
        let mut derivs = vec![f.clone()];
        if order >= 1 {
            derivs.push(equation_rhs(f, model, rep));
        }
        if order >= 2 {
            derivs.push(equation_second_derivative(f, &derivs[1], model, rep));
        }
        TimeJet::new(derivs)
    }

    /// Centred finite differences of three snapshots spaced by `dt`, for
    /// cross-checking equation-substituted jets.
    pub fn from_snapshots(prev: &SpinorField, cur: &SpinorField, next: &SpinorField, dt: f64) -> Result<Self> {
        let ft = next.sub(prev)?.scaled(C64::new(0.5 / dt, 0.0));
        let ftt = next.add_scaled(prev, C64::new(1.0, 0.0))?.add_scaled(cur, C64::new(-2.0, 0.0))?.scaled(C64::new(
            1.0 / (dt * dt),
            0.0,
        ));
        TimeJet::new(vec![cur.clone(), ft, ftt])
    }

    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn time(&self) -> f64 {
        self.derivs[0].time()
    }

    pub fn value(&self) -> &SpinorField {
        &self.derivs[0]
    }

    pub fn level(&self, m: usize) -> Option<&SpinorField> {
        self.derivs.get(m)
    }

    pub fn into_value(mut self) -> SpinorField {
        self.derivs.swap_remove(0)
    }
}

/// A jet with cached spatial gradients of its levels.
pub(crate) struct PreparedJet {
    jet: TimeJet,
    grads: Vec<Vec<SpinorField>>,
}

impl PreparedJet {
    /// Caches gradients of levels `0..grad_levels`.
    pub(crate) fn new(jet: TimeJet, grad_levels: usize) -> Self {
        let grads = jet.derivs.iter().take(grad_levels).map(gradient).collect();
        PreparedJet { jet, grads }
    }

    fn grad(&self, m: usize, a: usize) -> &SpinorField {
        &self.grads[m][a - 1]
    }
}

fn missing(what: impl fmt::Display, need: usize, have: usize) -> Error {
    Error::MissingTimeDerivative(format!("{what} needs time derivatives up to order {need}, jet has {have}"))
}

/// Builds a field from `value(i, x, out)` at every point.
fn pointwise<F>(like: &SpinorField, value: F) -> SpinorField
where
    F: Fn(usize, &[f64], &mut [C64]) + Sync,
{
    let g = *like.grid();
    let s = like.spinor_size();
    let d = g.dim();
    let mut out = SpinorField::zeros(g, s, like.time());
    out.values_mut().par_chunks_mut(s).enumerate().for_each(|(i, o)| {
        let x = g.point(i);
        value(i, &x[..d], o);
    });
    out
}

/// Levels `0..levels` of `Γ` applied to a prepared jet. Level `m` uses
/// `∂_t^m(L_a f) = x_a f^{(m+1)} + t∂_a f^{(m)} + m∂_a f^{(m-1)}` and
/// `∂_t^m(S f) = t f^{(m+1)} + m f^{(m)} + x^a∂_a f^{(m)}`.
pub(crate) fn apply_prepared(op: &VectorFieldOp, p: &PreparedJet, levels: usize) -> Result<TimeJet> {
    let order = p.jet.order();
    let top = if op.kind.involves_time() { order } else { order + 1 };
    if levels == 0 || levels > top {
        return Err(missing(op, (levels + op.kind.involves_time() as usize).saturating_sub(1), order));
    }
    let t = p.jet.time();
    let s = p.jet.value().spinor_size();
    let d = p.jet.value().grid().dim();
    let mut out = Vec::with_capacity(levels);
    for m in 0..levels {
        let f = &p.jet.derivs[m];
        let next = p.jet.derivs.get(m + 1);
        let mf = m as f64;
        let field = match op.kind {
            VectorFieldKind::Translation(0) => next.unwrap().clone(),
            VectorFieldKind::Translation(a) => p.grad(m, a).clone(),
            VectorFieldKind::Boost(a) | VectorFieldKind::ModifiedBoost(a) => {
                let (fn1, da) = (next.unwrap(), p.grad(m, a));
                let prev = if m > 0 { Some(p.grad(m - 1, a)) } else { None };
                pointwise(f, |i, x, o| {
                    for c in 0..s {
                        let mut v = fn1.at(i)[c] * x[a - 1] + da.at(i)[c] * t;
                        if let Some(pr) = prev {
                            v += pr.at(i)[c] * mf;
                        }
                        o[c] = v;
                    }
                })
            }
            VectorFieldKind::Rotation(a, b) | VectorFieldKind::ModifiedRotation(a, b) => {
                let (da, db) = (p.grad(m, a), p.grad(m, b));
                pointwise(f, |i, x, o| {
                    for c in 0..s {
                        o[c] = db.at(i)[c] * x[a - 1] - da.at(i)[c] * x[b - 1];
                    }
                })
            }
            VectorFieldKind::Scaling => {
                let fn1 = next.unwrap();
                let grads = &p.grads[m];
                pointwise(f, |i, x, o| {
                    for c in 0..s {
                        let mut v = fn1.at(i)[c] * t + f.at(i)[c] * mf;
                        for a in 0..d {
                            v += grads[a].at(i)[c] * x[a];
                        }
                        o[c] = v;
                    }
                })
            }
        };
        let field = match &op.correction {
            Some(c) => field.add_scaled(&f.apply_matrix(c), C64::new(1.0, 0.0))?,
            None => field,
        };
        out.push(field);
    }
    TimeJet::new(out)
}

fn grad_levels_needed(op: &VectorFieldOp, levels: usize) -> usize {
    match op.kind {
        VectorFieldKind::Translation(0) => 0,
        _ => levels,
    }
}

/// Jet of `Γf`, as long as the input allows (one order shorter for fields
/// containing `∂_t`).
pub fn apply_to_jet(op: &VectorFieldOp, jet: &TimeJet) -> Result<TimeJet> {
    let levels = if op.kind.involves_time() { jet.order() } else { jet.order() + 1 };
    if levels == 0 {
        return Err(missing(op, 1, 0));
    }
    let p = PreparedJet::new(jet.clone(), grad_levels_needed(op, levels));
    apply_prepared(op, &p, levels)
}

/// `Γf` (or `Γ̂f`) at the time of `f`; `f_t` is required for fields
/// containing `∂_t`.
pub fn apply_vectorfield(op: &VectorFieldOp, f: &SpinorField, f_t: Option<&SpinorField>) -> Result<SpinorField> {
    let mut derivs = vec![f.clone()];
    match (op.kind.involves_time(), f_t) {
        (true, Some(ft)) => derivs.push(ft.clone()),
        (true, None) => return Err(missing(op, 1, 0)),
        _ => {}
    }
    let p = PreparedJet::new(TimeJet::new(derivs)?, grad_levels_needed(op, 1));
    Ok(apply_prepared(op, &p, 1)?.into_value())
}

/// Levels `0..levels` of the massless Dirac operator `-iγ^μ∂_μ` on a jet.
pub(crate) fn dirac_prepared(p: &PreparedJet, rep: &CliffordRep, levels: usize) -> Result<TimeJet> {
    if levels == 0 || levels > p.jet.order() {
        return Err(missing("Dirac operator", levels, p.jet.order()));
    }
    let s = rep.spinor_size;
    let d = rep.dim;
    let minus_i = C64::new(0.0, -1.0);
    let mut out = Vec::with_capacity(levels);
    for m in 0..levels {
        let ft = &p.jet.derivs[m + 1];
        let grads = &p.grads[m];
        out.push(pointwise(ft, |i, _, o| {
            let mut acc = [C64::new(0.0, 0.0); 4];
            let mut tmp = [C64::new(0.0, 0.0); 4];
            rep.gamma[0].apply(ft.at(i), &mut acc[..s]);
            for a in 1..=d {
                rep.gamma[a].apply(grads[a - 1].at(i), &mut tmp[..s]);
                for c in 0..s {
                    acc[c] += tmp[c];
                }
            }
            for c in 0..s {
                o[c] = minus_i * acc[c];
            }
        }));
    }
    TimeJet::new(out)
}

/// `-iγ^μ∂_μ f` from a jet of order at least one.
pub fn dirac_operator(jet: &TimeJet, rep: &CliffordRep) -> Result<SpinorField> {
    let p = PreparedJet::new(jet.clone(), 1);
    Ok(dirac_prepared(&p, rep, 1)?.into_value())
}

/// Sup-norm of `[Γ̂, -iγ^μ∂_μ]f - c·(-iγ^μ∂_μ f)` where `c = -1` for the
/// scaling field and `0` otherwise. Needs a jet of order 2.
pub fn commutator_residual(op: &VectorFieldOp, jet: &TimeJet, rep: &CliffordRep) -> Result<f64> {
    Ok(commutator_residuals(std::slice::from_ref(op), jet, rep)?[0])
}

/// [`commutator_residual`] for several fields, sharing the transforms of
/// `f` and `-iγ^μ∂_μ f`.
pub fn commutator_residuals(ops: &[VectorFieldOp], jet: &TimeJet, rep: &CliffordRep) -> Result<Vec<f64>> {
    if jet.order() < 2 {
        return Err(missing("commutator audit", 2, jet.order()));
    }
    let base = PreparedJet::new(jet.clone(), 2);
    let df = PreparedJet::new(dirac_prepared(&base, rep, 2)?, 1);
    ops.iter()
        .map(|op| {
            // Γ̂(Df) - D(Γ̂f)
            let lhs = apply_prepared(op, &df, 1)?.into_value();
            let gf = apply_prepared(op, &base, 2)?;
            let rhs = dirac_prepared(&PreparedJet::new(gf, 1), rep, 1)?.into_value();
            let mut residual = lhs.sub(&rhs)?;
            if op.kind == VectorFieldKind::Scaling {
                residual = residual.add_scaled(df.jet.value(), C64::new(1.0, 0.0))?;
            }
            Ok(residual.sup_abs())
        })
        .collect()
}

/// `Γ̂^I f` for every unordered word `I` of length `≤ order` over `family`,
/// with `Γ̂^I = Γ̂_{i_1}Γ̂_{i_2}⋯`, `i_1 ≤ i_2 ≤ ⋯`.
#[derive(Clone, Debug)]
pub struct VectorFieldTerm {
    /// Indices into the family, nondecreasing.
    pub word: Vec<usize>,
    pub label: String,
    pub field: SpinorField,
}

pub fn vectorfield_terms(jet: &TimeJet, order: usize, family: &[VectorFieldOp]) -> Result<Vec<VectorFieldTerm>> {
    if order > 2 {
        return Err(Error::MissingTimeDerivative(format!("vector-field order {order} exceeds 2")));
    }
    let mut terms = vec![VectorFieldTerm { word: vec![], label: "1".into(), field: jet.value().clone() }];
    if order == 0 {
        return Ok(terms);
    }
    let levels = if order == 2 { 2 } else { 1 };
    let base = PreparedJet::new(jet.clone(), levels);
    let mut firsts = Vec::with_capacity(family.len());
    for op in family {
        let g = apply_prepared(op, &base, levels)?;
        terms.push(VectorFieldTerm { word: vec![firsts.len()], label: op.to_string(), field: g.value().clone() });
        firsts.push(g);
    }
    if order == 2 {
        for (j, g) in firsts.into_iter().enumerate() {
            let p = PreparedJet::new(g, 1);
            for (i, op) in family.iter().enumerate().take(j + 1) {
                let field = apply_prepared(op, &p, 1)?.into_value();
                terms.push(VectorFieldTerm { word: vec![i, j], label: format!("{} {}", op, family[j]), field });
            }
        }
    }
    Ok(terms)
}

/// Instantaneous L² parts `‖Γ̂^I f‖²` of the vector-field energies for all
/// words of length `≤ order`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyEntry {
    pub word: Vec<usize>,
    pub label: String,
    pub value: f64,
}

pub fn vectorfield_energy(jet: &TimeJet, order: usize, rep: &CliffordRep) -> Result<Vec<EnergyEntry>> {
    let family = modified_family(rep);
    Ok(vectorfield_terms(jet, order, &family)?
        .into_iter()
        .map(|t| EnergyEntry { value: t.field.norm_sq(), word: t.word, label: t.label })
        .collect())
}
