//! Subcommands. Each writes its report to `out` and returns whether every
//! check passed; the binary maps that to the exit code.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::{default_window, fit_decay, DecaySeries};
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::grid::snapshot;
use crate::initial_data::{audit_data_conditions, build_large_datum};
use crate::scattering::{dyadic_ladder, rate_bound, scatter_analysis, MIN_SCATTER_SAMPLES, NEGLIGIBLE_DIFFERENCE};

use super::checks::{algebra_suite, rows_to_csv};
use super::config::{parse_config, RunConfig};
use super::run::{self, RunManifest, RunOptions, RunStatus, CONFIG_FILE, SCATTER_FILE};

/// Samples per dimension in `check-algebra`.
pub const ALGEBRA_SAMPLES: usize = 1000;
/// Upper limit on pull-backs used when no dyadic ladder is available.
pub const MAX_SCATTER_SNAPSHOTS: usize = 32;

pub fn check_algebra(dim: Option<usize>, out: &mut dyn Write) -> Result<bool> {
    let dims = match dim {
        Some(d) => vec![d],
        None => vec![2, 3],
    };
    let mut rows = Vec::new();
    for d in dims {
        rows.extend(algebra_suite(d, ALGEBRA_SAMPLES, 2024)?);
    }
    out.write_all(rows_to_csv(&rows).as_bytes())?;
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{} (d={})", r.name, r.dim)).collect();
    if !failed.is_empty() {
        writeln!(out, "FAILED: {}", failed.join(", "))?;
    }
    Ok(failed.is_empty())
}

pub fn audit_data(config_path: &Path, out: &mut dyn Write) -> Result<bool> {
    let c = parse_config(config_path)?;
    let psi0 = build_large_datum(&c.data, &c.sim.grid, &c.rep)?;
    let audit = audit_data_conditions(&psi0, c.audit_order, c.epsilon_threshold)?;
    out.write_all(audit.to_csv().as_bytes())?;
    let failed: Vec<&str> = [("l2", audit.passes_l2), ("bounded_sum", audit.passes_bounded), ("small_sum", audit.passes_small)]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    if !failed.is_empty() {
        writeln!(out, "FAILED: {}", failed.join(", "))?;
    }
    Ok(audit.passes())
}

/// Parses either `t,value` or `t,observable,value` rows (a header line is
/// skipped) and returns the series for `observable`.
pub fn read_series(text: &str, observable: Option<&str>) -> Result<(String, DecaySeries)> {
    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cols.as_slice() {
            [t, v] => t.parse().ok().zip(v.parse().ok()).map(|(t, v)| (String::new(), t, v)),
            [t, name, v] => t.parse().ok().zip(v.parse().ok()).map(|(t, v)| (name.to_string(), t, v)),
            _ => None,
        };
        match parsed {
            Some(r) => rows.push(r),
            None if k == 0 => continue,
            None if line.trim().is_empty() => continue,
            None => return Err(Error::Fit(format!("line {}: cannot parse {line:?}", k + 1))),
        }
    }
    let mut names: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let name = match (observable, names.as_slice()) {
        (Some(o), _) => o.to_string(),
        (None, [only]) => only.to_string(),
        (None, many) => {
            return Err(Error::Fit(format!("several observables ({}); choose one", many.join(", "))));
        }
    };
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.0 == name).map(|r| (r.1, r.2)).collect();
    if pts.is_empty() {
        return Err(Error::Fit(format!("no rows for observable {name:?}")));
    }
    Ok((name, DecaySeries::from_points(pts)?))
}

pub fn fit_decay_file(
    csv: &Path,
    window: Option<(f64, f64)>,
    observable: Option<&str>,
    out: &mut dyn Write,
) -> Result<bool> {
    let (name, series) = read_series(&fs::read_to_string(csv)?, observable)?;
    let t_max = series.points().last().map_or(0.0, |p| p.0);
    let fit = fit_decay(&series, window.unwrap_or_else(|| default_window(t_max)))?;
    writeln!(out, "observable,exponent,stderr,points,t_lo,t_hi")?;
    writeln!(
        out,
        "{},{:.10},{:.3e},{},{},{}",
        if name.is_empty() { "value" } else { &name },
        fit.exponent,
        fit.stderr,
        fit.points,
        fit.window.0,
        fit.window.1
    )?;
    Ok(true)
}

/// Snapshot indices used for scattering: the longest dyadic ladder among
/// positive times (ties go to the latest base), or evenly spaced snapshots
/// when no ladder reaches the minimum length.
pub fn choose_scatter_times(times: &[f64]) -> Vec<usize> {
    let positive: Vec<usize> = (0..times.len()).filter(|&i| times[i] > 0.0).collect();
    let pt: Vec<f64> = positive.iter().map(|&i| times[i]).collect();
    let mut best: Vec<usize> = Vec::new();
    for &base in &pt {
        let ladder = dyadic_ladder(&pt, base, 1e-9 * base.max(1.0));
        if ladder.len() >= best.len() {
            best = ladder;
        }
    }
    if best.len() >= MIN_SCATTER_SAMPLES {
        return best.into_iter().map(|k| positive[k]).collect();
    }
    if positive.len() <= MAX_SCATTER_SNAPSHOTS {
        return positive;
    }
    let m = MAX_SCATTER_SNAPSHOTS;
    (0..m).map(|j| positive[j * (positive.len() - 1) / (m - 1)]).collect()
}

pub fn scatter(dir: &Path, sobolev: f64, out: &mut dyn Write) -> Result<bool> {
    let config = RunConfig::load(&dir.join(CONFIG_FILE))?.resolve()?;
    let mut manifest = RunManifest::load(dir)?;
    let snaps: Vec<String> = manifest.snapshots().into_iter().map(String::from).collect();
    let steps: Vec<usize> = snaps
        .iter()
        .map(|s| {
            s.trim_start_matches("snapshots/snap_")
                .trim_end_matches(".bin")
                .parse()
                .map_err(|_| Error::Format(format!("snapshot name {s:?}")))
        })
        .collect::<Result<_>>()?;
    let times: Vec<f64> = steps.iter().map(|&s| config.sim.time_at(s)).collect();
    let chosen = choose_scatter_times(&times);
    let mut traj = Trajectory::default();
    for &i in &chosen {
        traj.snapshots.push(snapshot::read(&dir.join(&snaps[i]))?);
    }
    let bound = rate_bound(&config.sim.model, &config.rep);
    let record = scatter_analysis(&traj, config.sim.t0, &config.rep, sobolev, bound)?;
    let csv = record.to_csv();
    fs::write(dir.join(SCATTER_FILE), &csv)?;
    if !manifest.files.iter().any(|f| f == SCATTER_FILE) {
        manifest.files.push(SCATTER_FILE.to_string());
        manifest.write(dir)?;
    }
    out.write_all(csv.as_bytes())?;
    match record.fit {
        None => writeln!(out, "Cauchy tail 0 (all differences ≤ {NEGLIGIBLE_DIFFERENCE:e})")?,
        Some(fit) => writeln!(
            out,
            "Cauchy tail {:.6e}; exponent {:.4}; bound {}; decreasing {}",
            record.cauchy_tail(),
            fit.exponent,
            bound.map_or("none".to_string(), |b| format!("{b}")),
            record.scattering_trend
        )?,
    }
    if record.consistent == Some(false) {
        writeln!(out, "FAILED: scattering rate above bound")?;
    }
    Ok(record.consistent != Some(false))
}

fn report(m: &RunManifest, out: &mut dyn Write) -> Result<bool> {
    writeln!(out, "status {}; steps {}; files {}", m.status.as_str(), m.steps_completed, m.files.len())?;
    Ok(m.status == RunStatus::Complete)
}

pub fn run_config(config_path: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<bool> {
    let config = parse_config(config_path)?;
    let m = run::run(&config, out_dir, RunOptions::default())?;
    report(&m, out)
}

pub fn resume_dir(dir: &Path, out: &mut dyn Write) -> Result<bool> {
    let m = run::resume(dir, RunOptions::default())?;
    report(&m, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_inverse_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut text = String::from("t,value\n");
        for k in 1..=100 {
            let t = k as f64;
            text += &format!("{t},{}\n", 3.0 / t);
        }
        fs::write(&path, text).unwrap();
        let mut out = Vec::new();
        assert!(fit_decay_file(&path, Some((10.0, 100.0)), None, &mut out).unwrap());
        let s = String::from_utf8(out).unwrap();
        assert!(s.contains(",-1.0000000000,"), "{s}");
    }

    #[test]
    fn series_with_several_observables() {
        let text = "t,observable,value\n1,a,1\n1,b,2\n2,a,0.5\n2,b,1\n";
        assert!(read_series(text, None).is_err());
        let (name, s) = read_series(text, Some("b")).unwrap();
        assert_eq!(name, "b");
        assert_eq!(s.points(), &[(1.0, 2.0), (2.0, 1.0)]);
        assert!(read_series("t,v\n1,x\n", None).is_err());
    }

    #[test]
    fn scatter_time_selection() {
        let times: Vec<f64> = (0..=16).map(|k| k as f64 * 5.0).collect();
        let chosen: Vec<f64> = choose_scatter_times(&times).iter().map(|&i| times[i]).collect();
        assert_eq!(chosen, vec![5.0, 10.0, 20.0, 40.0, 80.0]);
        let sparse = [0.0, 1.0, 3.0, 7.0];
        assert_eq!(choose_scatter_times(&sparse), vec![1, 2, 3]);
        let many: Vec<f64> = (0..100).map(|k| 1.0 + k as f64 * 0.37).collect();
        let c = choose_scatter_times(&many);
        assert!(c.len() >= MIN_SCATTER_SAMPLES && c.len() <= MAX_SCATTER_SNAPSHOTS);
    }

    #[test]
    fn algebra_command() {
        let mut out = Vec::new();
        assert!(check_algebra(Some(3), &mut out).unwrap());
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 8);
    }
}
