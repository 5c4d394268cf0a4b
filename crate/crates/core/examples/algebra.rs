//! Dirac matrices, radial null projectors and the null decomposition of
//! the bilinear `ψ*γ⁰φ`.

use std::error::Error;

use soler::clifford::{bilinear_density, build_gamma, null_form_terms, radial_projectors, verify_clifford};
use soler::runner::{algebra_suite, rows_to_csv};
use soler::C64;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for d in [2, 3] {
        let rep = build_gamma(d)?;
        let report = verify_clifford(&rep);
        println!(
            "d = {d}: spinors of size {}, anticommutation deviation {:e}, hermiticity deviation {:e}",
            rep.spinor_size, report.anticommutation, report.hermiticity
        );
    }

    let rep = build_gamma(2)?;
    let proj = radial_projectors(&rep, &[0.6, 0.8])?;
    let psi = [C64::new(1.0, 0.5), C64::new(-0.25, 2.0)];
    let phi = [C64::new(0.0, 1.0), C64::new(0.75, 0.0)];
    let terms = null_form_terms(&rep, &proj, &psi, &phi)?;
    let direct = bilinear_density(&psi, &phi, &rep.gamma[0])?;
    println!("ψ*γ⁰φ = {direct}");
    println!("  (-,-) {:.6}  (-,+) {:.6}  (+,-) {:.6}  (+,+) {:.1e}", terms.minus_minus, terms.minus_plus, terms.plus_minus, terms.plus_plus.norm());
    println!("  reduced sum {}", terms.reduced_sum());

    let mut rows = algebra_suite(2, 200, 1)?;
    rows.extend(algebra_suite(3, 200, 1)?);
    print!("{}", rows_to_csv(&rows));
    assert!(rows.iter().all(|r| r.pass));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
