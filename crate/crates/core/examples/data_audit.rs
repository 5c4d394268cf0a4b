//! Weighted-norm audit of the large-data family: unit L² norm, bounded
//! weighted derivatives and gradient norms that shrink with ε.

use std::error::Error;

use soler::clifford::build_gamma;
use soler::grid::Grid;
use soler::initial_data::{audit_data_conditions, build_large_datum, DataFamilyParams, Profile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rep = build_gamma(2)?;
    let grid = Grid::new(2, 256, 64.0)?;
    let psi0 = build_large_datum(&DataFamilyParams::gaussian(0.25, 2), &grid, &rep)?;
    let audit = audit_data_conditions(&psi0, 2, 1.0)?;
    print!("{}", audit.to_csv());

    println!("{:>8} {:>12} {:>12}", "ε", "bounded", "small");
    for eps in [0.5, 0.25, 0.125] {
        let p = DataFamilyParams { profile: Profile::PolynomialDecay { rate: 4.0 }, epsilon: eps, dim: 2 };
        let a = audit_data_conditions(&build_large_datum(&p, &grid, &rep)?, 2, 1.0)?;
        println!("{eps:>8} {:>12.5} {:>12.5}", a.bounded_sum, a.small_sum);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
