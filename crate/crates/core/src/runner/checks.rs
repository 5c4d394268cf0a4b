//! Randomized algebra suite behind `check-algebra`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{bilinear_density, build_gamma, null_form_terms, radial_projectors, verify_clifford, Matrix};
use crate::error::Result;
use crate::C64;

pub const ALGEBRA_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub dim: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn row(name: &'static str, dim: usize, max_residual: f64) -> CheckRow {
    CheckRow { name, dim, max_residual, tolerance: ALGEBRA_TOLERANCE, pass: max_residual <= ALGEBRA_TOLERANCE }
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_spinor(rng: &mut ChaCha8Rng, s: usize) -> Vec<C64> {
    (0..s).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.1 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

/// Clifford identities, hermiticity, projector identities and the null
/// decomposition of `Ψ*γ⁰Φ` on `samples` random directions and spinor pairs.
pub fn algebra_suite(dim: usize, samples: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let rep = build_gamma(dim)?;
    let s = rep.spinor_size;
    let id = rep.identity();
    let report = verify_clifford(&rep);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut proj, mut square, mut bracket, mut plus_plus, mut decomposition) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let n = random_direction(&mut rng, dim);
        let p = radial_projectors(&rep, &n)?;
        let a = rep.alpha_dot(&n);
        let zero = Matrix::zeros(s);
        proj = proj
            .max((p.p_plus * p.p_plus).max_abs_diff(&p.p_plus))
            .max((p.p_minus * p.p_minus).max_abs_diff(&p.p_minus))
            .max((p.p_plus * p.p_minus).max_abs_diff(&zero))
            .max((p.p_plus + p.p_minus).max_abs_diff(&id));
        square = square.max((a * a).max_abs_diff(&id));
        let psi = random_spinor(&mut rng, s);
        let phi = random_spinor(&mut rng, s);
        let sum: Vec<C64> = p.bracket_plus(&psi).iter().zip(p.bracket_minus(&psi)).map(|(x, y)| x + y).collect();
        let twice: Vec<C64> = psi.iter().map(|z| z * 2.0).collect();
        bracket = bracket.max(max_diff(&sum, &twice));
        let terms = null_form_terms(&rep, &p, &psi, &phi)?;
        plus_plus = plus_plus.max(terms.plus_plus.norm());
        let direct = bilinear_density(&psi, &phi, &rep.gamma[0])?;
        decomposition = decomposition.max((terms.reduced_sum() - direct).norm());
    }
    Ok(vec![
        row("anticommutation", dim, report.anticommutation),
        row("hermiticity", dim, report.hermiticity),
        row("projector identities", dim, proj),
        row("radial matrix squares to identity", dim, square),
        row("brackets sum to 2v", dim, bracket),
        row("plus-plus pairing vanishes", dim, plus_plus),
        row("null decomposition", dim, decomposition),
    ])
}

pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut s = String::from("check,dim,max_residual,tolerance,pass\n");
    for r in rows {
        s += &format!("{},{},{:.16e},{:e},{}\n", r.name, r.dim, r.max_residual, r.tolerance, r.pass);
    }
    s
}
