//! Resolved run settings: defaults, then the config file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinmix::measures::InferredVariant;
use spinmix::scans::{Backend, ScanOptions, DEFAULT_TAU_MAX};
use spinmix::wigner::{DEFAULT_BATCHES, DEFAULT_TOL, SCAN_TRAJECTORIES};
use spinmix::{ModelParams, SeedKind, SeedSpec};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SPINMIX_OUT";
pub const DEFAULT_OUT: &str = "spinmix-out";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum QChoice {
    Matched,
    Value(f64),
}

impl fmt::Display for QChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QChoice::Matched => f.write_str("matched"),
            QChoice::Value(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for QChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("matched") {
            return Ok(QChoice::Matched);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(QChoice::Value)
            .ok_or_else(|| format!("q must be 'matched' or a number, got '{s}'"))
    }
}

impl From<QChoice> for String {
    fn from(q: QChoice) -> String {
        q.to_string()
    }
}

impl TryFrom<String> for QChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub n0: f64,
    pub q: QChoice,
    pub seed: SeedKind,
    pub nbar: f64,
    pub alpha_sq: f64,
    pub tau_max: f64,
    /// `None`: the command's own default.
    pub tau_steps: Option<usize>,
    pub theta_steps: usize,
    pub trajectories: usize,
    pub rng_seed: u64,
    pub tol: f64,
    pub batches: usize,
    pub epsilon_cut: f64,
    pub backend: Option<Backend>,
    pub inferred: InferredVariant,
    pub threads: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        let scan = ScanOptions::default();
        Self {
            n0: 175.0,
            q: QChoice::Matched,
            seed: SeedKind::Vacuum,
            nbar: 1.0,
            alpha_sq: 1.0,
            tau_max: DEFAULT_TAU_MAX,
            tau_steps: None,
            theta_steps: scan.theta_steps,
            trajectories: SCAN_TRAJECTORIES,
            rng_seed: scan.rng_seed,
            tol: DEFAULT_TOL,
            batches: DEFAULT_BATCHES,
            epsilon_cut: scan.epsilon_cut,
            backend: None,
            inferred: InferredVariant::Optimal,
            threads: None,
        }
    }
}

impl Settings {
    pub fn q_over_g(&self, n0: f64) -> f64 {
        match self.q {
            QChoice::Matched => n0,
            QChoice::Value(v) => v,
        }
    }

    pub fn seed_spec(&self) -> SeedSpec<f64> {
        match self.seed {
            SeedKind::Vacuum => SeedSpec::vacuum(),
            SeedKind::Thermal => SeedSpec::thermal(self.nbar),
            SeedKind::Coherent => SeedSpec::coherent(self.alpha_sq),
        }
    }

    pub fn params(&self) -> ModelParams<f64> {
        ModelParams::new(self.n0, self.q_over_g(self.n0), self.seed_spec())
    }

    pub fn backend_or_default(&self) -> Backend {
        self.backend.unwrap_or(Backend::default_for(self.seed))
    }

    pub fn scan(&self, record: usize) -> ScanOptions {
        ScanOptions {
            trajectories: self.trajectories,
            rng_seed: self.rng_seed,
            tol: self.tol,
            batches: self.batches,
            epsilon_cut: self.epsilon_cut,
            theta_steps: self.theta_steps,
            inferred: self.inferred,
            jackknife: true,
            record,
        }
    }

    /// Flags that reproduce these settings exactly.
    pub fn to_args(&self) -> Vec<String> {
        let mut a: Vec<String> = Vec::new();
        let mut push = |k: &str, v: String| {
            a.push(format!("--{k}"));
            a.push(v);
        };
        push("n0", self.n0.to_string());
        push("q", self.q.to_string());
        push("seed", self.seed.to_string());
        push("nbar", self.nbar.to_string());
        push("alpha-sq", self.alpha_sq.to_string());
        push("tau-max", self.tau_max.to_string());
        if let Some(s) = self.tau_steps {
            push("tau-steps", s.to_string());
        }
        push("theta-steps", self.theta_steps.to_string());
        push("trajectories", self.trajectories.to_string());
        push("rng-seed", self.rng_seed.to_string());
        push("tol", self.tol.to_string());
        push("batches", self.batches.to_string());
        push("epsilon-cut", self.epsilon_cut.to_string());
        if let Some(b) = self.backend {
            push("backend", b.to_string());
        }
        push("inferred", self.inferred.to_string());
        if let Some(t) = self.threads {
            push("threads", t.to_string());
        }
        a
    }
}

/// Config file contents. TOML with flat keys; `seed.kind` style dotted keys
/// form the `seed` section. Hyphenated spellings of the flag names are
/// accepted too.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n0: Option<f64>,
    #[serde(alias = "q-over-g")]
    pub q_over_g: Option<f64>,
    pub q: Option<toml::Value>,
    pub seed: Option<SeedSection>,
    #[serde(alias = "tau-max")]
    pub tau_max: Option<f64>,
    #[serde(alias = "tau-steps")]
    pub tau_steps: Option<usize>,
    #[serde(alias = "theta-steps")]
    pub theta_steps: Option<usize>,
    pub trajectories: Option<usize>,
    #[serde(alias = "rng-seed")]
    pub rng_seed: Option<u64>,
    pub tol: Option<f64>,
    pub batches: Option<usize>,
    #[serde(alias = "epsilon-cut")]
    pub epsilon_cut: Option<f64>,
    pub backend: Option<String>,
    pub inferred: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub kind: Option<String>,
    pub nbar: Option<f64>,
    #[serde(alias = "alpha-sq")]
    pub alpha_sq: Option<f64>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Overlays the file onto `s`.
    pub fn apply(&self, s: &mut Settings) -> Result<(), CliError> {
        if let Some(v) = self.n0 {
            s.n0 = v;
        }
        match (&self.q, self.q_over_g) {
            (Some(_), Some(_)) => return Err(usage("config sets both q and q_over_g")),
            (Some(toml::Value::String(t)), None) => s.q = t.parse().map_err(usage)?,
            (Some(toml::Value::Float(v)), None) => s.q = QChoice::Value(*v),
            (Some(toml::Value::Integer(v)), None) => s.q = QChoice::Value(*v as f64),
            (Some(other), None) => {
                return Err(usage(format!("config q: unsupported value {other}")))
            }
            (None, Some(v)) => s.q = QChoice::Value(v),
            (None, None) => {}
        }
        if let Some(seed) = &self.seed {
            if let Some(k) = &seed.kind {
                s.seed = k
                    .parse()
                    .map_err(|e: spinmix::Error| usage(e.to_string()))?;
            }
            if let Some(v) = seed.nbar {
                s.nbar = v;
            }
            if let Some(v) = seed.alpha_sq {
                s.alpha_sq = v;
            }
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { s.$f = v; } )* };
        }
        take!(
            tau_max,
            theta_steps,
            trajectories,
            rng_seed,
            tol,
            batches,
            epsilon_cut
        );
        if self.tau_steps.is_some() {
            s.tau_steps = self.tau_steps;
        }
        if self.threads.is_some() {
            s.threads = self.threads;
        }
        if let Some(b) = &self.backend {
            s.backend = Some(
                b.parse()
                    .map_err(|e: spinmix::Error| usage(e.to_string()))?,
            );
        }
        if let Some(v) = &self.inferred {
            s.inferred = v
                .parse()
                .map_err(|e: spinmix::Error| usage(e.to_string()))?;
        }
        Ok(())
    }
}

/// Output directory: flag, then config file, then the environment, then
/// `./spinmix-out`.
pub fn resolve_out(flag: Option<&Path>, file: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| file.map(Path::to_path_buf))
        .or_else(|| {
            std::env::var_os(OUT_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overlays_defaults() {
        let f = FileConfig::parse(
            "n0 = 150\nq = \"matched\"\nseed.kind = \"thermal\"\nseed.nbar = 0.75\ntau-steps = 120\nbackend = \"wigner\"\n",
        )
        .unwrap();
        let mut s = Settings::default();
        f.apply(&mut s).unwrap();
        assert_eq!(s.n0, 150.0);
        assert_eq!(s.q, QChoice::Matched);
        assert_eq!(s.seed, SeedKind::Thermal);
        assert_eq!(s.nbar, 0.75);
        assert_eq!(s.tau_steps, Some(120));
        assert_eq!(s.backend, Some(Backend::Wigner));
        assert_eq!(s.params().q_over_g, 150.0);
    }

    #[test]
    fn q_forms() {
        let mut s = Settings::default();
        FileConfig::parse("q_over_g = 0.0")
            .unwrap()
            .apply(&mut s)
            .unwrap();
        assert_eq!(s.q, QChoice::Value(0.0));
        FileConfig::parse("q = 12").unwrap().apply(&mut s).unwrap();
        assert_eq!(s.q, QChoice::Value(12.0));
        assert!(FileConfig::parse("q = 1.0\nq_over_g = 2.0")
            .unwrap()
            .apply(&mut s)
            .is_err());
        assert!(FileConfig::parse("nzero = 3").is_err());
        assert!("fast".parse::<QChoice>().is_err());
    }
}
