//! The exact free propagator: unitarity, the group law, dispersion of a
//! localized datum and pull-back to the initial time.

use std::error::Error;

use soler::clifford::build_gamma;
use soler::evolution::free_propagate;
use soler::grid::Grid;
use soler::initial_data::{build_large_datum, DataFamilyParams};
use soler::scattering::pullback;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rep = build_gamma(2)?;
    let grid = Grid::new(2, 128, 32.0)?;
    let psi0 = build_large_datum(&DataFamilyParams::gaussian(0.5, 2), &grid, &rep)?;

    println!("{:>6} {:>22} {:>12}", "t", "‖ψ‖ - 1", "sup|ψ|");
    for t in [0.0, 2.0, 4.0, 8.0, 16.0] {
        let f = free_propagate(&psi0, t, &rep);
        println!("{t:>6} {:>22.3e} {:>12.6}", f.norm() - 1.0, f.sup_abs());
    }

    let two_steps = free_propagate(&free_propagate(&psi0, 1.5, &rep), 2.5, &rep);
    let one_step = free_propagate(&psi0, 4.0, &rep);
    println!("group law residual {:.2e}", two_steps.max_difference(&one_step)?);

    let back = pullback(&one_step, 0.0, &rep);
    println!("pull-back residual {:.2e}", back.max_difference(&psi0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
