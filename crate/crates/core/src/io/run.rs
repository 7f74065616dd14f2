//! End-to-end runs: evolve a configured initial field while writing
//! diagnostics and checkpoints, and re-analyze a run directory afterwards.

use std::path::{Path, PathBuf};

use crate::curl::spin_split;
use crate::diagnostics::{balance_audit, compute_record, helicity, BalanceAudit, DiagConfig, DiagRecord};
use crate::error::{Error, Result};
use crate::grid::SpectralVectorField;
use crate::io::config::RunConfig;
use crate::io::csv::emit_csv;
use crate::io::spnf::{read_field, write_field, FieldData};
use crate::solver::{evolve_spectral, Observer, SolverState};

pub const CONFIG_FILE: &str = "run.cfg";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const ANALYSIS_FILE: &str = "analysis.csv";

pub fn checkpoint_name(step: u64) -> String {
    format!("snap_{step:08}.spnf")
}

/// Computes a [`DiagRecord`] at every diagnostic step.
pub struct DiagCollector {
    pub cfg: DiagConfig,
    pub records: Vec<DiagRecord>,
}

impl DiagCollector {
    pub fn new(cfg: DiagConfig) -> Self {
        DiagCollector { cfg, records: Vec::new() }
    }
}

impl Observer for DiagCollector {
    fn on_diagnostic(&mut self, state: &SolverState) -> Result<()> {
        self.records.push(compute_record(&state.u_hat, state.t, &self.cfg)?);
        Ok(())
    }
}

/// Writes spectral SPNF snapshots into a directory.
pub struct CheckpointWriter {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Observer for CheckpointWriter {
    fn on_checkpoint(&mut self, state: &SolverState) -> Result<()> {
        let path = self.dir.join(checkpoint_name(state.step_index));
        write_field(&path, &FieldData::Spectral(state.u_hat.clone()), state.t)?;
        self.written.push(path);
        Ok(())
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub records: Vec<DiagRecord>,
    pub checkpoints: Vec<PathBuf>,
    pub final_state: SolverState,
    pub audit: BalanceAudit,
}

/// Runs the configured simulation into `cfg.output_dir()`, writing a copy of
/// the configuration, every checkpoint and `diagnostics.csv`.
pub fn run_evolve(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    super::atomic_write(&dir.join(CONFIG_FILE), cfg.render().as_bytes())?;

    let u0 = cfg.initial_field()?;
    let mut diags = DiagCollector::new(cfg.diag_config());
    let mut checkpoints = CheckpointWriter { dir: dir.clone(), written: Vec::new() };
    let result = evolve_spectral(&u0, &cfg.solver, &mut [&mut diags, &mut checkpoints]);
    // keep whatever was recorded before a failure
    if !diags.records.is_empty() {
        emit_csv(&diags.records, &dir.join(DIAGNOSTICS_FILE))?;
    }
    let final_state = result?;
    let audit = balance_audit(&diags.records, cfg.solver.nu, &cfg.gauge_lambdas)?;
    Ok(RunOutput { dir, records: diags.records, checkpoints: checkpoints.written, final_state, audit })
}

#[derive(Debug)]
pub struct AnalyzeOutput {
    pub records: Vec<DiagRecord>,
    pub audit: BalanceAudit,
}

/// Checkpoint files of a run directory in step order.
pub fn list_checkpoints(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snap_") && n.ends_with(".spnf"))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Recomputes every diagnostic and the balance audit from a run directory's
/// checkpoints, writing `analysis.csv` next to them.
pub fn analyze(dir: &Path) -> Result<AnalyzeOutput> {
    let cfg = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let diag = cfg.diag_config();
    let mut records = Vec::new();
    for path in list_checkpoints(dir)? {
        let file = read_field(&path)?;
        records.push(compute_record(&file.data.to_spectral(), file.time, &diag)?);
    }
    if records.is_empty() {
        return Err(Error::EmptySeries);
    }
    emit_csv(&records, &dir.join(ANALYSIS_FILE))?;
    let audit = balance_audit(&records, cfg.solver.nu, &cfg.gauge_lambdas)?;
    Ok(AnalyzeOutput { records, audit })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinReport {
    pub plus_energy: f64,
    pub minus_energy: f64,
    pub helicity: f64,
}

/// `‖u⁺‖²`, `‖u⁻‖²` and `ℋ` of a field.
pub fn spin_report(u: &SpectralVectorField) -> Result<SpinReport> {
    let pair = spin_split(u);
    Ok(SpinReport {
        plus_energy: pair.plus.l2_norm_sq(),
        minus_energy: pair.minus.l2_norm_sq(),
        helicity: helicity(u)?,
    })
}
