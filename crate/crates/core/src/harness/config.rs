use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chaos::{DEFAULT_DEGREE_CAP, MAX_DIM};
use crate::error::{Error, Result};

/// Run parameters. Loaded from an optional JSON file, then overridden by
/// command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Grid dimension; the largest dimension drawn by `verify`.
    pub n: usize,
    /// Largest number of components drawn by `verify`.
    pub d: usize,
    pub refine: Vec<usize>,
    pub degree_cap: u32,
    pub seed: u64,
    /// Monte Carlo sample count.
    #[serde(rename = "N")]
    pub samples: usize,
    pub tolerance: f64,
    /// Output directory.
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 6,
            d: 3,
            refine: vec![1, 2, 4, 8],
            degree_cap: DEFAULT_DEGREE_CAP,
            seed: 20_261_019,
            samples: 200_000,
            tolerance: 1e-10,
            output: PathBuf::from("wienerlab-out"),
        }
    }
}

/// Flag values; `None` keeps the file or default value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub refine: Option<Vec<usize>>,
    pub degree_cap: Option<u32>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// File (or defaults), then flags, then validation.
    pub fn resolve(file: Option<&Path>, flags: Overrides) -> Result<Self> {
        let mut c = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        let Overrides { n, d, refine, degree_cap, seed, samples, tolerance, output } = flags;
        c.n = n.unwrap_or(c.n);
        c.d = d.unwrap_or(c.d);
        c.refine = refine.unwrap_or(c.refine);
        c.degree_cap = degree_cap.unwrap_or(c.degree_cap);
        c.seed = seed.unwrap_or(c.seed);
        c.samples = samples.unwrap_or(c.samples);
        c.tolerance = tolerance.unwrap_or(c.tolerance);
        c.output = output.unwrap_or(c.output);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n == 0 || self.n > MAX_DIM {
            return bad(format!("n must be in 1..={MAX_DIM}, got {}", self.n));
        }
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if self.refine.is_empty() || self.refine.contains(&0) {
            return bad("refine factors must be a nonempty list of positive integers".into());
        }
        if self.refine.iter().any(|&m| m.saturating_mul(self.n) > MAX_DIM) {
            return bad(format!("refined dimension n*m exceeds {MAX_DIM}"));
        }
        if self.degree_cap == 0 {
            return bad("degree_cap must be positive".into());
        }
        if self.samples < 2 {
            return bad("N must be at least 2".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        Ok(())
    }
}
