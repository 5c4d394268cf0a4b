//! Modified vector fields: commutation with the Dirac operator, the
//! Klainerman–Sobolev ratio and the `⟨t - r⟩|∂u|` bound along a free wave.

use std::error::Error;

use soler::clifford::{build_gamma, ModelSpec};
use soler::diagnostics::{commutator_residuals, derivative_bound_audit, ks_audit, modified_family, TimeJet};
use soler::evolution::free_propagate;
use soler::grid::{Grid, SpinorField};
use soler::C64;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rep = build_gamma(2)?;
    let free = ModelSpec::free(&rep);
    let grid = Grid::new(2, 128, 16.0)?;
    let u0 = SpinorField::from_fn(grid, 2, 0.0, |x, out| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        out[0] = C64::new((-r2 / 2.0).exp(), 0.0);
        out[1] = C64::new(0.0, 0.5 * x[1] * (-r2 / 2.0).exp());
    });

    let family = modified_family(&rep);
    let jet = TimeJet::from_equation(&u0, 2, &free, &rep)?;
    for (op, r) in family.iter().zip(commutator_residuals(&family, &jet, &rep)?) {
        println!("[{op}, D] residual {r:.2e}");
    }

    println!("{:>5} {:>10} {:>10}", "t", "KS ratio", "C");
    for t in [0.0, 2.0, 4.0, 8.0] {
        let u = free_propagate(&u0, t, &rep);
        let jet = TimeJet::from_equation(&u, 2, &free, &rep)?;
        let ks = ks_audit(&jet, &rep)?;
        let bound = derivative_bound_audit(&jet, &rep, 0.5)?;
        println!("{t:>5} {:>10.4} {:>10.4}", ks.ratio, bound.max_ratio);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
