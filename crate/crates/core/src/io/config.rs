//! Flat `key = value` run configuration.
//!
//! Text after `#` and blank lines are ignored. Every key may appear
//! once; unknown keys, and `init_*` keys that the chosen initial condition
//! does not use, are rejected with the offending line number.
//!
//! ```text
//! n = 32
//! nu = 0.05
//! dt = 1e-3
//! t_end = 1
//! initial = u2
//! n_list = 0, 2, 4
//! theta_list = 0, 0.5, 1, 1.3
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::curl::Spin;
use crate::diagnostics::DiagConfig;
use crate::error::{Error, Result};
use crate::forge::{
    beltrami_wave, embed_2d_spectral, named_field_spectral, random_spin_field_spectral, BeltramiWaveSpec, Chirality,
    NamedField, Spectrum, StreamFunction2D,
};
use crate::grid::{dealias, forward_transform, Lattice, SpectralVectorField};
use crate::io::spnf::read_field;
use crate::solver::SolverConfig;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "SPINFLOW_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Named(NamedField),
    Beltrami(BeltramiWaveSpec),
    Random { chirality: Chirality, spectrum: Spectrum },
    /// Planar flow from `ψ = cos x₁ cos x₂ + cos 2x₁`.
    Embed2d,
    File(PathBuf),
}

impl InitialCondition {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialCondition::Named(NamedField::U1) => "u1",
            InitialCondition::Named(NamedField::U2) => "u2",
            InitialCondition::Named(NamedField::ThreeWave) => "three_wave",
            InitialCondition::Beltrami(_) => "beltrami",
            InitialCondition::Random { .. } => "random",
            InitialCondition::Embed2d => "embed2d",
            InitialCondition::File(_) => "file",
        }
    }

    pub fn build(&self, lattice: Lattice, seed: u64) -> Result<SpectralVectorField> {
        match self {
            InitialCondition::Named(which) => named_field_spectral(lattice, *which),
            InitialCondition::Beltrami(spec) => Ok(forward_transform(&beltrami_wave(lattice, spec)?)),
            InitialCondition::Random { chirality, spectrum } => {
                Ok(random_spin_field_spectral(lattice, seed, *chirality, spectrum))
            }
            InitialCondition::Embed2d => Ok(embed_2d_spectral(&StreamFunction2D::from_fn(lattice, |x1, x2| {
                x1.cos() * x2.cos() + (2.0 * x1).cos()
            }))),
            InitialCondition::File(path) => {
                let f = read_field(path)?;
                let u = f.data.to_spectral();
                if u.lattice != lattice {
                    return Err(Error::LatticeMismatch);
                }
                Ok(u)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lattice: Lattice,
    pub solver: SolverConfig,
    pub initial: InitialCondition,
    /// Multiplies the initial field.
    pub init_scale: f64,
    /// Relative L² size of a seeded divergence-free perturbation added to the
    /// initial field (0 disables).
    pub init_perturbation: f64,
    pub n_list: Vec<u32>,
    pub theta_list: Vec<f64>,
    pub gauge_lambdas: Vec<f64>,
    pub c0: f64,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let diag = DiagConfig::default();
        RunConfig {
            lattice: Lattice::cubic(32).expect("valid lattice"),
            solver: SolverConfig::default(),
            initial: InitialCondition::Named(NamedField::U2),
            init_scale: 1.0,
            init_perturbation: 0.0,
            n_list: diag.n_list,
            theta_list: diag.theta_list,
            gauge_lambdas: vec![0.0, 1.0],
            c0: diag.c0,
            seed: 0,
            output: PathBuf::from("out"),
        }
    }
}

struct Raw {
    path: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            // `#` starts a comment anywhere on a line
            let line = line.split_once('#').map_or(line, |(before, _)| before).trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config { path: path.to_path_buf(), line: line_no, message: "expected `key = value`".into() });
            };
            let key = k.trim().to_string();
            if entries.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
                return Err(Error::Config { path: path.to_path_buf(), line: line_no, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(Raw { path: path.to_path_buf(), entries })
    }

    fn err(&self, line: usize, message: String) -> Error {
        Error::Config { path: self.path.clone(), line, message }
    }

    fn take_with<T>(&mut self, key: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => f(&v).map(Some).map_err(|e| self.err(line, format!("`{key}`: {e}"))),
        }
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.take_with(key, |v| v.parse::<T>().map_err(|e| e.to_string()))
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Config { path: self.path, line, message: format!("unknown key `{key}`") }),
        }
    }
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| s.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", s.trim()))).collect()
}

fn parse_length(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "2pi" => Ok(2.0 * PI),
        other => other.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn parse_triple<T: Copy>(v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<[T; 3], String> {
    let parts: Vec<T> = v.split(',').map(|s| f(s.trim())).collect::<std::result::Result<_, _>>()?;
    match parts.as_slice() {
        [a] => Ok([*a; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err("expected one or three values".into()),
    }
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

pub fn parse_spin(v: &str) -> std::result::Result<Spin, String> {
    match v {
        "+" | "plus" => Ok(Spin::Plus),
        "-" | "minus" => Ok(Spin::Minus),
        other => Err(format!("`{other}` is not a spin (+ or -)")),
    }
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut raw = Raw::parse(text, path)?;
        let mut cfg = RunConfig::default();

        let n = raw.take_with("n", |v| parse_triple(v, |s| s.parse::<usize>().map_err(|e| e.to_string())))?;
        let l = raw.take_with("length", |v| parse_triple(v, parse_length))?;
        if n.is_some() || l.is_some() {
            cfg.lattice = Lattice::new(n.unwrap_or(cfg.lattice.n()), l.unwrap_or(cfg.lattice.l()))?;
        }

        let s = &mut cfg.solver;
        if let Some(v) = raw.take("nu")? { s.nu = v; }
        if let Some(v) = raw.take("dt")? { s.dt = v; }
        if let Some(v) = raw.take("t_end")? { s.t_end = v; }
        if let Some(v) = raw.take_with("dealias", parse_bool)? { s.dealias = v; }
        if let Some(v) = raw.take("diag_stride")? { s.diag_stride = v; }
        if let Some(v) = raw.take("checkpoint_stride")? { s.checkpoint_stride = v; }
        if let Some(v) = raw.take("blowup_factor")? { s.blowup_factor = v; }

        if let Some(v) = raw.take_with("n_list", parse_list)? { cfg.n_list = v; }
        if let Some(v) = raw.take_with("theta_list", parse_list)? { cfg.theta_list = v; }
        if let Some(v) = raw.take_with("gauge_lambdas", parse_list)? { cfg.gauge_lambdas = v; }
        if let Some(v) = raw.take("c0")? { cfg.c0 = v; }
        if let Some(v) = raw.take("seed")? { cfg.seed = v; }
        if let Some(v) = raw.take::<String>("output")? { cfg.output = PathBuf::from(v); }
        if let Some(v) = raw.take("init_scale")? { cfg.init_scale = v; }
        if let Some(v) = raw.take("init_perturbation")? { cfg.init_perturbation = v; }

        let kind = raw.take::<String>("initial")?.unwrap_or_else(|| "u2".into());
        cfg.initial = match kind.as_str() {
            "u1" | "u2" | "three_wave" => InitialCondition::Named(kind.parse()?),
            "embed2d" => InitialCondition::Embed2d,
            "beltrami" => {
                let k = raw
                    .take_with("init_k", |v| parse_triple(v, |s| s.parse::<i64>().map_err(|e| e.to_string())))?
                    .unwrap_or([1, 0, 0]);
                let sign = raw.take_with("init_sign", parse_spin)?.unwrap_or(Spin::Plus);
                let mut spec = BeltramiWaveSpec::new(k, sign);
                if let Some(p) = raw.take("init_phase")? { spec.phase = p; }
                if let Some(a) = raw.take("init_amplitude")? { spec.amplitude = a; }
                InitialCondition::Beltrami(spec)
            }
            "random" => {
                let chirality = raw.take("init_chirality")?.unwrap_or(Chirality::Mixed);
                let mut spectrum = Spectrum::default();
                if let Some(v) = raw.take("init_kmin")? { spectrum.k_min = v; }
                if let Some(v) = raw.take("init_kmax")? { spectrum.k_max = v; }
                if let Some(v) = raw.take("init_exponent")? { spectrum.exponent = v; }
                InitialCondition::Random { chirality, spectrum }
            }
            "file" => {
                let p = raw.take::<String>("init_path")?.ok_or_else(|| Error::InvalidConfig("`initial = file` needs `init_path`".into()))?;
                InitialCondition::File(PathBuf::from(p))
            }
            other => return Err(Error::InvalidConfig(format!("unknown initial condition `{other}`"))),
        };
        raw.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.diag_config().validate()?;
        if !(self.init_scale.is_finite() && self.init_perturbation >= 0.0 && self.init_perturbation.is_finite()) {
            return Err(Error::InvalidConfig("init_scale must be finite and init_perturbation ≥ 0".into()));
        }
        Ok(())
    }

    pub fn diag_config(&self) -> DiagConfig {
        DiagConfig { nu: self.solver.nu, n_list: self.n_list.clone(), theta_list: self.theta_list.clone(), c0: self.c0 }
    }

    /// Output directory, honouring [`OUT_DIR_ENV`].
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.clone(),
        }
    }

    /// The (scaled, optionally perturbed, dealiased) initial spectral field.
    pub fn initial_field(&self) -> Result<SpectralVectorField> {
        let base = self.initial.build(self.lattice, self.seed)?.scaled(self.init_scale);
        let u = if self.init_perturbation > 0.0 {
            let noise = random_spin_field_spectral(
                self.lattice,
                self.seed.wrapping_add(0x5eed),
                Chirality::Mixed,
                &Spectrum::default(),
            );
            let factor = self.init_perturbation * (base.l2_norm_sq() / noise.l2_norm_sq()).sqrt();
            base.combine(&noise, factor)
        } else {
            base
        };
        Ok(if self.solver.dealias { dealias(&u) } else { u })
    }

    /// Canonical text form; `parse(render())` reproduces the config.
    pub fn render(&self) -> String {
        fn list<T: std::fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        }
        let mut out = String::new();
        let [n1, n2, n3] = self.lattice.n();
        let [l1, l2, l3] = self.lattice.l();
        let s = &self.solver;
        let _ = writeln!(out, "n = {n1}, {n2}, {n3}");
        let _ = writeln!(out, "length = {l1}, {l2}, {l3}");
        let _ = writeln!(out, "nu = {}", s.nu);
        let _ = writeln!(out, "dt = {}", s.dt);
        let _ = writeln!(out, "t_end = {}", s.t_end);
        let _ = writeln!(out, "dealias = {}", s.dealias);
        let _ = writeln!(out, "diag_stride = {}", s.diag_stride);
        let _ = writeln!(out, "checkpoint_stride = {}", s.checkpoint_stride);
        let _ = writeln!(out, "blowup_factor = {}", s.blowup_factor);
        let _ = writeln!(out, "initial = {}", self.initial.kind());
        match &self.initial {
            InitialCondition::Beltrami(spec) => {
                let _ = writeln!(out, "init_k = {}", list(&spec.k));
                let _ = writeln!(out, "init_sign = {}", if spec.sign == Spin::Plus { "+" } else { "-" });
                let _ = writeln!(out, "init_phase = {}", spec.phase);
                let _ = writeln!(out, "init_amplitude = {}", spec.amplitude);
            }
            InitialCondition::Random { chirality, spectrum } => {
                let c = match chirality {
                    Chirality::Plus => "plus",
                    Chirality::Minus => "minus",
                    Chirality::Mixed => "mixed",
                };
                let _ = writeln!(out, "init_chirality = {c}");
                let _ = writeln!(out, "init_kmin = {}", spectrum.k_min);
                let _ = writeln!(out, "init_kmax = {}", spectrum.k_max);
                let _ = writeln!(out, "init_exponent = {}", spectrum.exponent);
            }
            InitialCondition::File(p) => {
                let _ = writeln!(out, "init_path = {}", p.display());
            }
            InitialCondition::Named(_) | InitialCondition::Embed2d => {}
        }
        let _ = writeln!(out, "init_scale = {}", self.init_scale);
        let _ = writeln!(out, "init_perturbation = {}", self.init_perturbation);
        let _ = writeln!(out, "n_list = {}", list(&self.n_list));
        let _ = writeln!(out, "theta_list = {}", list(&self.theta_list));
        let _ = writeln!(out, "gauge_lambdas = {}", list(&self.gauge_lambdas));
        let _ = writeln!(out, "c0 = {}", self.c0);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "output = {}", self.output.display());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PathBuf {
        PathBuf::from("run.cfg")
    }

    #[test]
    fn parses_example() {
        let text = "# u2 run\nn = 16\nnu = 0.05\ndt = 1e-3\nt_end = 1\ninitial = u2\nn_list = 0, 2, 4\ntheta_list = 0, 0.5, 1, 1.3\n";
        let cfg = RunConfig::parse(text, &p()).unwrap();
        assert_eq!(cfg.lattice.n(), [16; 3]);
        assert_eq!(cfg.theta_list, vec![0.0, 0.5, 1.0, 1.3]);
        assert_eq!(cfg.initial, InitialCondition::Named(NamedField::U2));
    }

    #[test]
    fn unknown_and_misplaced_keys_are_errors() {
        let e = RunConfig::parse("n = 16\nviscosity = 1\n", &p()).unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
        let e = RunConfig::parse("initial = u1\ninit_k = 1,0,0\n", &p()).unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
        assert!(RunConfig::parse("nu = 1\nnu = 2\n", &p()).is_err());
        assert!(RunConfig::parse("nu = -1\n", &p()).is_err());
        assert!(RunConfig::parse("just text\n", &p()).is_err());
    }

    #[test]
    fn trailing_comments_are_ignored() {
        let cfg = RunConfig::parse("n = 8   # small\nnu = 0.1# viscous\n# full line\n", &p()).unwrap();
        assert_eq!(cfg.lattice.n(), [8, 8, 8]);
        assert_eq!(cfg.solver.nu, 0.1);
    }

    #[test]
    fn render_round_trips() {
        let text = "n = 16, 16, 32\nlength = 2pi, 2pi, 12.5\ninitial = beltrami\ninit_k = 1, -1, 2\ninit_sign = -\n\
                    init_amplitude = 0.5\ngauge_lambdas = \nseed = 7\noutput = somewhere\n";
        let cfg = RunConfig::parse(text, &p()).unwrap();
        let again = RunConfig::parse(&cfg.render(), &p()).unwrap();
        assert_eq!(cfg, again);
        assert!(cfg.gauge_lambdas.is_empty());
        let random = RunConfig::parse("initial = random\ninit_chirality = plus\ninit_kmax = 3\n", &p()).unwrap();
        assert_eq!(RunConfig::parse(&random.render(), &p()).unwrap(), random);
    }
}
