//! Pointwise decay of a 3D Soler solution: log-log fits of `sup|ψ|` and of
//! the good component `sup|[ψ]₋|`.

use std::error::Error;

use soler::clifford::{build_gamma, ModelSpec};
use soler::diagnostics::{fit_decay, sup_minus, DecaySeries};
use soler::evolution::{evolve_observed, SimConfig};
use soler::grid::Grid;
use soler::initial_data::{build_large_datum, DataFamilyParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rep = build_gamma(3)?;
    let grid = Grid::new(3, 48, 16.0)?;
    let config = SimConfig {
        model: ModelSpec::soler(&rep),
        grid,
        dt: 0.1,
        t0: 0.0,
        t_final: 12.0,
        snapshot_stride: 120,
        diagnostic_stride: 2,
    };
    let psi0 = build_large_datum(&DataFamilyParams::gaussian(0.5, 3), &grid, &rep)?;
    let mut sup = DecaySeries::new();
    let mut minus = DecaySeries::new();
    evolve_observed(&config, &rep, psi0, |step, f| {
        if step > 0 {
            sup.push(f.time(), f.sup_abs())?;
            minus.push(f.time(), sup_minus(f, &rep))?;
        }
        Ok(())
    })?;
    let window = (4.0, 12.0);
    let a = fit_decay(&sup, window)?;
    let b = fit_decay(&minus, window)?;
    println!("sup|ψ|     ~ t^{:.3} ± {:.3} over {:?} ({} points)", a.exponent, a.stderr, a.window, a.points);
    println!("sup|[ψ]₋| ~ t^{:.3} ± {:.3}", b.exponent, b.stderr);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
