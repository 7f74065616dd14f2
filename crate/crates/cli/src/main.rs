use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spinflow::curl::spin_split;
use spinflow::diagnostics::DiagRecord;
use spinflow::forge::{BeltramiWaveSpec, Chirality, NamedField, Spectrum};
use spinflow::grid::{inverse_transform, Lattice};
use spinflow::identities::{run_suite, SuiteConfig};
use spinflow::io::config::parse_spin;
use spinflow::io::run::DIAGNOSTICS_FILE;
use spinflow::io::vtk::{dissipation_field, pressure_field, vorticity_magnitude};
use spinflow::io::{
    analyze, export_vtk, read_csv, read_field, run_evolve, spin_report, write_field, FieldData, InitialCondition,
    RunConfig,
};
use spinflow::Error;

/// Helical decomposition, Navier–Stokes evolution and balance diagnostics on the periodic box.
#[derive(Parser)]
#[command(name = "spinflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Beltrami,
    U1,
    U2,
    ThreeWave,
    Random,
    Embed2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Physical,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarArg {
    Pressure,
    Dissipation,
    Vorticity,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated field to an SPNF file.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Grid points per side.
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Integer wavevector of a Beltrami wave, e.g. `1,0,0`.
        #[arg(long, default_value = "1,0,0", allow_hyphen_values = true)]
        k: String,
        /// Spin of a Beltrami wave (`+` or `-`).
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Chirality of a random field: plus, minus or mixed.
        #[arg(long, default_value = "mixed")]
        chirality: String,
        #[arg(long, default_value_t = 1.0)]
        kmin: f64,
        #[arg(long, default_value_t = 4.0)]
        kmax: f64,
        #[arg(long, value_enum, default_value_t = LayoutArg::Spectral)]
        layout: LayoutArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a field into its spin components and report their energies.
    Decompose {
        input: PathBuf,
        /// Defaults to `<input>_plus.spnf`.
        #[arg(long)]
        plus_out: Option<PathBuf>,
        /// Defaults to `<input>_minus.spnf`.
        #[arg(long)]
        minus_out: Option<PathBuf>,
    },
    /// Run the solver from a configuration file.
    Evolve {
        config: PathBuf,
        /// Output directory (overrides the config and the environment).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute diagnostics and balance residuals from a run directory.
    Analyze { dir: PathBuf },
    /// Run the vector identity suite.
    Check {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        n: usize,
    },
    /// Export a field (and derived scalars) as legacy VTK.
    Export {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',')]
        scalars: Vec<ScalarArg>,
    },
}

/// A failure with its exit code: 1 for invalid input, 2 for internal errors.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::BlowupDetected { .. } | Error::RouteMismatch { .. } | Error::NonFinite { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn parse_k(s: &str) -> Result<[i64; 3], Failure> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| invalid(format!("--k `{s}`: {e}")))?;
    parts.try_into().map_err(|_| invalid(format!("--k `{s}` needs three integers")))
}

fn sibling(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    input.with_file_name(format!("{stem}_{suffix}.spnf"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { kind, n, k, sign, phase, amplitude, seed, chirality, kmin, kmax, layout, out } => {
            let lattice = Lattice::cubic(n)?;
            let initial = match kind {
                Kind::Beltrami => {
                    let mut spec = BeltramiWaveSpec::new(parse_k(&k)?, parse_spin(&sign).map_err(invalid)?);
                    spec.phase = phase;
                    spec.amplitude = amplitude;
                    InitialCondition::Beltrami(spec)
                }
                Kind::U1 => InitialCondition::Named(NamedField::U1),
                Kind::U2 => InitialCondition::Named(NamedField::U2),
                Kind::ThreeWave => InitialCondition::Named(NamedField::ThreeWave),
                Kind::Random => InitialCondition::Random {
                    chirality: chirality.parse::<Chirality>()?,
                    spectrum: Spectrum::band(kmin, kmax),
                },
                Kind::Embed2d => InitialCondition::Embed2d,
            };
            let u = initial.build(lattice, seed)?;
            let data = match layout {
                LayoutArg::Spectral => FieldData::Spectral(u),
                LayoutArg::Physical => FieldData::Physical(inverse_transform(&u)?),
            };
            write_field(&out, &data, 0.0)?;
            println!("wrote {}", out.display());
        }
        Command::Decompose { input, plus_out, minus_out } => {
            let file = read_field(&input)?;
            let u = file.data.to_spectral();
            // reject inconsistent spectral files before splitting
            file.data.to_physical()?;
            let pair = spin_split(&u);
            let report = spin_report(&u)?;
            let plus_out = plus_out.unwrap_or_else(|| sibling(&input, "plus"));
            let minus_out = minus_out.unwrap_or_else(|| sibling(&input, "minus"));
            write_field(&plus_out, &FieldData::Spectral(pair.plus), file.time)?;
            write_field(&minus_out, &FieldData::Spectral(pair.minus), file.time)?;
            let ratio = if report.plus_energy > 0.0 { report.minus_energy / report.plus_energy } else { f64::INFINITY };
            println!(
                "plus_energy={:.16e} minus_energy={:.16e} helicity={:.16e} minus_over_plus={:.6e}",
                report.plus_energy, report.minus_energy, report.helicity, ratio
            );
        }
        Command::Evolve { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(dir) = out {
                cfg.output = dir;
                std::env::remove_var(spinflow::io::OUT_DIR_ENV);
            }
            let result = run_evolve(&cfg)?;
            let a = &result.audit;
            println!("output       {}", result.dir.display());
            println!("records      {}", result.records.len());
            println!("checkpoints  {}", result.checkpoints.len());
            println!("t_final      {}", result.final_state.t);
            println!("energy residual          {:.3e}", a.max_energy_residual());
            println!("N+ - N- drift            {:.3e}", a.max_np_minus_nm_residual());
            println!("helicity balance         {:.3e}", a.max_helicity_balance_residual());
        }
        Command::Analyze { dir } => {
            let out = analyze(&dir)?;
            let a = &out.audit;
            println!("records                  {}", out.records.len());
            println!("energy residual          {:.3e}", a.max_energy_residual());
            println!("N+ - N- drift            {:.3e}", a.max_np_minus_nm_residual());
            println!("helicity balance         {:.3e}", a.max_helicity_balance_residual());
            println!("route gap                {:.3e}", a.route_gap());
            for g in &a.gauge {
                println!("gauge lambda={:<8} {:.3e}", g.lambda, max_abs(&g.residual));
            }
            for t in &a.theta {
                println!("theta={:<14} {:.3e}", t.theta, max_abs(&t.residual));
            }
            let csv = dir.join(DIAGNOSTICS_FILE);
            if csv.exists() {
                let logged = read_csv(&csv)?;
                let (matched, worst) = compare_logged(&logged, &out.records);
                println!("checkpoint rows matched  {matched} (max relative deviation {worst:.3e})");
            }
        }
        Command::Check { samples, seed, n } => {
            let reports = run_suite(&SuiteConfig { seed, samples, n })?;
            let mut failed = 0;
            println!("{:<64} {:>12} {:>10}  result", "identity", "residual", "tolerance");
            for r in &reports {
                println!(
                    "{:<64} {:>12.3e} {:>10.0e}  {}",
                    r.name,
                    r.relative(),
                    r.tolerance,
                    if r.pass { "pass" } else { "FAIL" }
                );
                failed += usize::from(!r.pass);
            }
            if failed > 0 {
                return Err(invalid(format!("{failed} identities failed")));
            }
        }
        Command::Export { input, out, scalars } => {
            let file = read_field(&input)?;
            let u_hat = file.data.to_spectral();
            let u = file.data.to_physical()?;
            let fields: Vec<(&str, _)> = scalars
                .iter()
                .map(|s| match s {
                    ScalarArg::Pressure => ("pressure", pressure_field(&u_hat)),
                    ScalarArg::Dissipation => ("dissipation", dissipation_field(&u_hat)),
                    ScalarArg::Vorticity => ("vorticity", vorticity_magnitude(&u_hat)),
                })
                .collect();
            let refs: Vec<(&str, &_)> = fields.iter().map(|(n, f)| (*n, f)).collect();
            export_vtk(&u, &refs, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 { 0.0 } else { (a - b).abs() / s }
}

/// Matches logged rows to recomputed ones by time; returns the count and the
/// worst relative deviation of the conserved-quantity columns.
fn compare_logged(logged: &[DiagRecord], recomputed: &[DiagRecord]) -> (usize, f64) {
    let mut matched = 0;
    let mut worst: f64 = 0.0;
    for r in recomputed {
        if let Some(l) = logged.iter().find(|l| l.t == r.t) {
            matched += 1;
            for (a, b) in [
                (l.energy, r.energy),
                (l.enstrophy, r.enstrophy),
                (l.helicity, r.helicity),
                (l.hhalf_plus, r.hhalf_plus),
                (l.hhalf_minus, r.hhalf_minus),
                (l.h3half_plus, r.h3half_plus),
                (l.h3half_minus, r.h3half_minus),
                (l.det_zero, r.det_zero),
                (l.max_u, r.max_u),
                (l.max_omega, r.max_omega),
            ] {
                worst = worst.max(rel(a, b));
            }
        }
    }
    (matched, worst)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
