//! Run directories: evolution with streamed diagnostics, checkpoints,
//! resume and the manifest.
//!
//! Layout of a run directory:
//!
//! ```text
//! config.toml          canonical configuration
//! audit.csv            data audit of ψ₀
//! series.csv           t,observable,value
//! snapshots/snap_<step>.bin
//! checkpoint.bin       state at the last checkpoint
//! checkpoint.txt       step, ghost accumulator, series length
//! manifest.txt         key = value
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::diagnostics::{csv_row, sup_minus, weighted_sup, GhostEnergyAccumulator};
use crate::error::{Error, Result};
use crate::evolution::Evolver;
use crate::grid::{snapshot, SpinorField};
use crate::initial_data::{audit_data_conditions, build_large_datum};

use super::config::{ResolvedConfig, RunConfig};

pub const CONFIG_FILE: &str = "config.toml";
pub const AUDIT_FILE: &str = "audit.csv";
pub const SERIES_FILE: &str = "series.csv";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SNAPSHOT_DIR: &str = "snapshots";
const CHECKPOINT_STATE: &str = "checkpoint.bin";
const CHECKPOINT_META: &str = "checkpoint.txt";
const SERIES_HEADER: &str = "t,observable,value\n";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    Interrupted,
    Diverged,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Complete => "complete",
            RunStatus::Interrupted => "interrupted",
            RunStatus::Diverged => "diverged",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(RunStatus::Complete),
            "interrupted" => Ok(RunStatus::Interrupted),
            "diverged" => Ok(RunStatus::Diverged),
            other => Err(Error::Format(format!("unknown run status {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config_hash: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub status: RunStatus,
    pub steps_completed: usize,
    pub failed_step: Option<usize>,
    /// Paths relative to the run directory.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "config_hash = {}\ncreated = {}\nstatus = {}\nsteps_completed = {}\n",
            self.config_hash,
            self.created,
            self.status.as_str(),
            self.steps_completed
        );
        if let Some(step) = self.failed_step {
            s += &format!("failed_step = {step}\n");
        }
        for f in &self.files {
            s += &format!("file = {f}\n");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut hash = None;
        let mut created = None;
        let mut status = None;
        let mut steps = None;
        let mut failed_step = None;
        let mut files = Vec::new();
        let num = |v: &str| v.parse::<u64>().map_err(|e| Error::Format(format!("manifest value {v:?}: {e}")));
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Format(format!("manifest line {line:?}")))?;
            match k {
                "config_hash" => hash = Some(v.to_string()),
                "created" => created = Some(num(v)?),
                "status" => status = Some(RunStatus::parse(v)?),
                "steps_completed" => steps = Some(num(v)? as usize),
                "failed_step" => failed_step = Some(num(v)? as usize),
                "file" => files.push(v.to_string()),
                other => return Err(Error::Format(format!("unknown manifest key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::Format(format!("manifest lacks {k}"));
        Ok(RunManifest {
            config_hash: hash.ok_or_else(|| missing("config_hash"))?,
            created: created.ok_or_else(|| missing("created"))?,
            status: status.ok_or_else(|| missing("status"))?,
            steps_completed: steps.ok_or_else(|| missing("steps_completed"))?,
            failed_step,
            files,
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(dir.join(MANIFEST_FILE))?)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(MANIFEST_FILE), self.to_text().as_bytes())
    }

    /// Snapshot paths in step order.
    pub fn snapshots(&self) -> Vec<&str> {
        self.files.iter().filter(|f| f.starts_with(SNAPSHOT_DIR)).map(|f| f.as_str()).collect()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Stop (with a checkpoint) after this many steps, as if interrupted.
    pub halt_after_step: Option<usize>,
}

pub fn snapshot_name(step: usize) -> String {
    format!("{SNAPSHOT_DIR}/snap_{step:08}.bin")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Mutable state of a run between steps.
struct RunState {
    dir: PathBuf,
    config: ResolvedConfig,
    ghost: GhostEnergyAccumulator,
    last_diag_step: usize,
    series: File,
    series_len: u64,
}

impl RunState {
    fn diagnostics(&mut self, step: usize, f: &SpinorField) -> Result<()> {
        let rep = &self.config.rep;
        let t = f.time();
        let d = f.grid().dim() as f64;
        let mut rows = String::new();
        rows += &csv_row(t, "l2_norm", f.norm());
        rows += &csv_row(t, "sup_abs", f.sup_abs());
        rows += &csv_row(t, "sup_minus", sup_minus(f, rep));
        rows += &csv_row(t, "weighted_sup", weighted_sup(f, t, (d - 1.0) / 2.0, 0.5));
        if step > self.last_diag_step {
            let span = t - self.config.sim.time_at(self.last_diag_step);
            let inc = self.ghost.update(f, t, span, rep);
            rows += &csv_row(t, "ghost_increment", inc);
            rows += &csv_row(t, "ghost_integral", self.ghost.running_integral());
            rows += &csv_row(t, "ghost_energy", self.ghost.energy());
            self.last_diag_step = step;
        }
        self.series.write_all(rows.as_bytes())?;
        self.series_len += rows.len() as u64;
        Ok(())
    }

    fn checkpoint(&mut self, step: usize, f: &SpinorField) -> Result<()> {
        self.series.flush()?;
        write_atomic(&self.dir.join(CHECKPOINT_STATE), &snapshot::encode(f))?;
        let mut meta = format!(
            "step = {step}\nlast_diag_step = {}\nseries_len = {}\nrunning_integral = {:016x}\nlast_l2 = {:016x}\n",
            self.last_diag_step,
            self.series_len,
            self.ghost.running_integral().to_bits(),
            self.ghost.last_l2().to_bits()
        );
        for (t, inc) in self.ghost.history() {
            meta += &format!("history = {:016x} {:016x}\n", t.to_bits(), inc.to_bits());
        }
        write_atomic(&self.dir.join(CHECKPOINT_META), meta.as_bytes())
    }
}

struct Checkpoint {
    step: usize,
    last_diag_step: usize,
    series_len: u64,
    running_integral: f64,
    last_l2: f64,
    history: Vec<(f64, f64)>,
}

fn parse_checkpoint(text: &str) -> Result<Checkpoint> {
    let bad = |l: &str| Error::Format(format!("checkpoint line {l:?}"));
    let bits = |v: &str| u64::from_str_radix(v, 16).map(f64::from_bits).map_err(|_| bad(v));
    let int = |v: &str| v.parse::<u64>().map_err(|_| bad(v));
    let (mut step, mut last_diag, mut len, mut integral, mut l2) = (None, None, None, None, None);
    let mut history = Vec::new();
    for line in text.lines() {
        let (k, v) = line.split_once(" = ").ok_or_else(|| bad(line))?;
        match k {
            "step" => step = Some(int(v)? as usize),
            "last_diag_step" => last_diag = Some(int(v)? as usize),
            "series_len" => len = Some(int(v)?),
            "running_integral" => integral = Some(bits(v)?),
            "last_l2" => l2 = Some(bits(v)?),
            "history" => {
                let (t, inc) = v.split_once(' ').ok_or_else(|| bad(line))?;
                history.push((bits(t)?, bits(inc)?));
            }
            _ => return Err(bad(line)),
        }
    }
    let missing = || Error::Format("incomplete checkpoint".into());
    Ok(Checkpoint {
        step: step.ok_or_else(missing)?,
        last_diag_step: last_diag.ok_or_else(missing)?,
        series_len: len.ok_or_else(missing)?,
        running_integral: integral.ok_or_else(missing)?,
        last_l2: l2.ok_or_else(missing)?,
        history,
    })
}

fn snapshot_files(dir: &Path, upto: usize, stride: usize) -> Vec<String> {
    (0..=upto)
        .filter(|s| s % stride == 0)
        .map(snapshot_name)
        .filter(|name| dir.join(name).exists())
        .collect()
}

fn manifest_for(state: &RunState, created: u64, status: RunStatus, steps: usize, failed: Option<usize>) -> RunManifest {
    let mut files = vec![CONFIG_FILE.to_string(), AUDIT_FILE.to_string(), SERIES_FILE.to_string()];
    files.extend(snapshot_files(&state.dir, steps, state.config.sim.snapshot_stride));
    if state.dir.join(SCATTER_FILE).exists() {
        files.push(SCATTER_FILE.to_string());
    }
    RunManifest {
        config_hash: state.config.raw.hash(),
        created,
        status,
        steps_completed: steps,
        failed_step: failed,
        files,
    }
}

/// Drives the evolver from its current step to the end (or the halt step).
fn drive(mut state: RunState, mut ev: Evolver, created: u64, options: RunOptions) -> Result<RunManifest> {
    let sim = state.config.sim.clone();
    let last = sim.num_steps();
    while !ev.is_done() {
        if let Err(e) = ev.advance() {
            if let Error::Divergence { step, .. } = e {
                state.series.flush()?;
                manifest_for(&state, created, RunStatus::Diverged, step - 1, Some(step)).write(&state.dir)?;
            }
            return Err(e);
        }
        let step = ev.current_step();
        if step % sim.diagnostic_stride == 0 || step == last {
            state.diagnostics(step, ev.state())?;
        }
        if step % sim.snapshot_stride == 0 {
            snapshot::write(&state.dir.join(snapshot_name(step)), ev.state())?;
            state.checkpoint(step, ev.state())?;
        }
        if options.halt_after_step == Some(step) && !ev.is_done() {
            state.checkpoint(step, ev.state())?;
            let m = manifest_for(&state, created, RunStatus::Interrupted, step, None);
            m.write(&state.dir)?;
            return Ok(m);
        }
    }
    state.series.flush()?;
    let m = manifest_for(&state, created, RunStatus::Complete, last, None);
    m.write(&state.dir)?;
    Ok(m)
}

/// Builds the datum, audits it, evolves and writes the run directory.
///
/// Divergence is recorded in the manifest and returned as an error.
pub fn run(config: &ResolvedConfig, out_dir: &Path, options: RunOptions) -> Result<RunManifest> {
    fs::create_dir_all(out_dir.join(SNAPSHOT_DIR))?;
    fs::write(out_dir.join(CONFIG_FILE), config.raw.to_toml())?;
    let psi0 = build_large_datum(&config.data, &config.sim.grid, &config.rep)?.with_time(config.sim.t0);
    let audit = audit_data_conditions(&psi0, config.audit_order, config.epsilon_threshold)?;
    fs::write(out_dir.join(AUDIT_FILE), audit.to_csv())?;
    let _ = fs::remove_file(out_dir.join(SCATTER_FILE));
    let series = File::create(out_dir.join(SERIES_FILE))?;
    let mut state = RunState {
        dir: out_dir.to_path_buf(),
        config: config.clone(),
        ghost: GhostEnergyAccumulator::new(config.delta)?,
        last_diag_step: 0,
        series,
        series_len: 0,
    };
    state.series.write_all(SERIES_HEADER.as_bytes())?;
    state.series_len = SERIES_HEADER.len() as u64;
    let ev = Evolver::new(&config.sim, &config.rep, psi0)?;
    state.diagnostics(0, ev.state())?;
    snapshot::write(&out_dir.join(snapshot_name(0)), ev.state())?;
    state.checkpoint(0, ev.state())?;
    drive(state, ev, now(), options)
}

/// Continues an interrupted run from its last checkpoint. The result is
/// bit-identical to an uninterrupted run.
pub fn resume(dir: &Path, options: RunOptions) -> Result<RunManifest> {
    let config = RunConfig::load(&dir.join(CONFIG_FILE))?.resolve()?;
    let manifest = RunManifest::load(dir)?;
    if manifest.config_hash != config.raw.hash() {
        return Err(Error::Format("config.toml does not match the manifest hash".into()));
    }
    if manifest.status == RunStatus::Complete {
        return Ok(manifest);
    }
    let cp = parse_checkpoint(&fs::read_to_string(dir.join(CHECKPOINT_META))?)?;
    let field = snapshot::read(&dir.join(CHECKPOINT_STATE))?;
    let series = OpenOptions::new().write(true).open(dir.join(SERIES_FILE))?;
    series.set_len(cp.series_len)?;
    let mut series = series;
    {
        use std::io::{Seek, SeekFrom};
        series.seek(SeekFrom::Start(cp.series_len))?;
    }
    let state = RunState {
        dir: dir.to_path_buf(),
        ghost: GhostEnergyAccumulator::from_parts(config.delta, cp.running_integral, cp.last_l2, cp.history)?,
        last_diag_step: cp.last_diag_step,
        series,
        series_len: cp.series_len,
        config,
    };
    let ev = Evolver::resume(&state.config.sim, &state.config.rep, field, cp.step)?;
    drive(state, ev, manifest.created, options)
}
