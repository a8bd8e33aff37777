//! Run configuration: a flat key=value file format with command-line
//! overrides layered on top.
//!
//! Recognized keys (same spellings as the CLI flags):
//!
//! ```text
//! input, imag, kind, weights, n_theta, solver,
//! c, tau, max_iters, tolerance, log_every, anneal_factor, anneal_floor,
//! power, scale, smoothness, smoothness_map,
//! out_labels, out_u, out_trace, out_preview, preview
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use cyclic_maxflow::solver::Annealing;
use cyclic_maxflow::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    /// Two files (real, imaginary), each a raw spatial field or an image.
    ComplexPair,
    /// One colour image.
    Rgb,
    /// One raw spatial field of angles, optional weight field.
    RawField,
}

impl FromStr for InputKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex-pair" => Ok(Self::ComplexPair),
            "rgb" => Ok(Self::Rgb),
            "raw-field" => Ok(Self::RawField),
            other => bail!("unknown input kind `{other}` (complex-pair | rgb | raw-field)"),
        }
    }
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ComplexPair => "complex-pair",
            Self::Rgb => "rgb",
            Self::RawField => "raw-field",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    Al,
    Pf,
}

impl FromStr for SolverChoice {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "al" => Ok(Self::Al),
            "pf" => Ok(Self::Pf),
            other => bail!("unknown solver `{other}` (al | pf)"),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Al => "al",
            Self::Pf => "pf",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreviewMode {
    /// Angle mapped to 8-bit grayscale; the wrap seam shows as 0 vs 255 by
    /// design, the preview is for eyeballing only.
    Gray,
    /// Angle mapped around the hue wheel (no seam).
    Hue,
}

impl FromStr for PreviewMode {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray" => Ok(Self::Gray),
            "hue" => Ok(Self::Hue),
            other => bail!("unknown preview mode `{other}` (gray | hue)"),
        }
    }
}

/// Smoothness cost: one constant for the whole cylinder or a field file
/// (spatial fields broadcast over theta).
#[derive(Clone, Debug, PartialEq)]
pub enum Smoothness {
    Constant(f64),
    MapPath(PathBuf),
}

/// Everything one reconstruction run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub imag: Option<PathBuf>,
    pub kind: InputKind,
    pub weights: Option<PathBuf>,
    pub n_theta: usize,
    pub solver: SolverChoice,
    pub solver_config: SolverConfig,
    pub power: f64,
    pub scale: f64,
    pub smoothness: Smoothness,
    pub out_labels: Option<PathBuf>,
    pub out_u: Option<PathBuf>,
    pub out_trace: Option<PathBuf>,
    pub out_preview: Option<PathBuf>,
    pub preview: PreviewMode,
}

pub const DEFAULT_N_THETA: usize = 16;
pub const DEFAULT_SMOOTHNESS: f64 = 0.5;

/// Ordered key=value map; later inserts override earlier ones.
#[derive(Clone, Debug, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "input",
    "imag",
    "kind",
    "weights",
    "n_theta",
    "solver",
    "c",
    "tau",
    "max_iters",
    "tolerance",
    "log_every",
    "anneal_factor",
    "anneal_floor",
    "power",
    "scale",
    "smoothness",
    "smoothness_map",
    "out_labels",
    "out_u",
    "out_trace",
    "out_preview",
    "preview",
];

impl ConfigMap {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut map = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            map.set(key.trim(), value.trim())?;
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            bail!("unknown config key `{key}`");
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => T::from_str(raw)
                .map(Some)
                .map_err(|e| anyhow!("config key `{key}`: {e}")),
        }
    }

    /// Resolves the map into a validated [`RunConfig`].
    pub fn into_run_config(self) -> Result<RunConfig> {
        let kind: InputKind = self.parse("kind")?.unwrap_or(InputKind::ComplexPair);
        let input: PathBuf = self
            .get("input")
            .map(PathBuf::from)
            .ok_or_else(|| anyhow!("missing `input`"))?;
        let imag = self.get("imag").map(PathBuf::from);
        if kind == InputKind::ComplexPair && imag.is_none() {
            bail!("complex-pair input needs `imag`");
        }
        let solver: SolverChoice = self.parse("solver")?.unwrap_or(SolverChoice::Al);
        let mut solver_config = match solver {
            SolverChoice::Al => SolverConfig::augmented_lagrangian(),
            SolverChoice::Pf => SolverConfig::pseudo_flow(),
        };
        if let Some(c) = self.parse::<f64>("c")? {
            solver_config.c = c;
        }
        if let Some(tau) = self.parse::<f64>("tau")? {
            solver_config.tau = tau;
        }
        if let Some(n) = self.parse::<usize>("max_iters")? {
            solver_config.max_iters = n;
        }
        if let Some(t) = self.parse::<f64>("tolerance")? {
            solver_config.tolerance = t;
        }
        if let Some(n) = self.parse::<usize>("log_every")? {
            solver_config.log_every = n;
        }
        let factor = self.parse::<f64>("anneal_factor")?;
        let floor = self.parse::<f64>("anneal_floor")?;
        solver_config.c_anneal = match (factor, floor) {
            (None, None) => None,
            (Some(factor), Some(floor)) => Some(Annealing { factor, floor }),
            _ => bail!("anneal_factor and anneal_floor must be given together"),
        };

        let smoothness = match (self.get("smoothness"), self.get("smoothness_map")) {
            (Some(_), Some(_)) => bail!("give either `smoothness` or `smoothness_map`, not both"),
            (None, Some(path)) => Smoothness::MapPath(PathBuf::from(path)),
            (Some(raw), None) => Smoothness::Constant(
                raw.parse::<f64>()
                    .map_err(|e| anyhow!("config key `smoothness`: {e}"))?,
            ),
            (None, None) => Smoothness::Constant(DEFAULT_SMOOTHNESS),
        };

        let cfg = RunConfig {
            input,
            imag,
            kind,
            weights: self.get("weights").map(PathBuf::from),
            n_theta: self.parse("n_theta")?.unwrap_or(DEFAULT_N_THETA),
            solver,
            solver_config,
            power: self.parse("power")?.unwrap_or(1.0),
            scale: self.parse("scale")?.unwrap_or(1.0),
            smoothness,
            out_labels: self.get("out_labels").map(PathBuf::from),
            out_u: self.get("out_u").map(PathBuf::from),
            out_trace: self.get("out_trace").map(PathBuf::from),
            out_preview: self.get("out_preview").map(PathBuf::from),
            preview: self.parse("preview")?.unwrap_or(PreviewMode::Gray),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 2 {
            bail!("n_theta must be at least 2, got {}", self.n_theta);
        }
        if let Smoothness::Constant(s) = self.smoothness {
            if !(s >= 0.0) || !s.is_finite() {
                bail!("smoothness must be non-negative and finite, got {s}");
            }
        }
        let mut paths: Vec<&Path> = vec![&self.input];
        paths.extend(self.imag.as_deref());
        paths.extend(self.weights.as_deref());
        if let Smoothness::MapPath(p) = &self.smoothness {
            paths.push(p);
        }
        paths.extend(self.out_labels.as_deref());
        paths.extend(self.out_u.as_deref());
        paths.extend(self.out_trace.as_deref());
        paths.extend(self.out_preview.as_deref());
        for (i, a) in paths.iter().enumerate() {
            for b in &paths[i + 1..] {
                if a == b {
                    bail!("paths must be distinct: {} appears twice", a.display());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_map() -> ConfigMap {
        let mut m = ConfigMap::default();
        m.set("input", "obs_real.cmf").unwrap();
        m.set("imag", "obs_imag.cmf").unwrap();
        m
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = base_map().into_run_config().unwrap();
        assert_eq!(cfg.kind, InputKind::ComplexPair);
        assert_eq!(cfg.n_theta, DEFAULT_N_THETA);
        assert_eq!(cfg.solver, SolverChoice::Al);
        assert_eq!(cfg.solver_config, SolverConfig::augmented_lagrangian());
        assert_eq!(cfg.smoothness, Smoothness::Constant(DEFAULT_SMOOTHNESS));
        assert_eq!(cfg.power, 1.0);
    }

    #[test]
    fn overrides_apply_and_solver_defaults_follow_choice() {
        let mut m = base_map();
        m.set("solver", "pf").unwrap();
        m.set("c", "0.05").unwrap();
        m.set("n_theta", "32").unwrap();
        m.set("smoothness", "0.8").unwrap();
        let cfg = m.into_run_config().unwrap();
        assert_eq!(cfg.solver, SolverChoice::Pf);
        assert_eq!(cfg.solver_config.c, 0.05);
        // untouched fields keep the pf defaults
        assert_eq!(
            cfg.solver_config.tolerance,
            SolverConfig::pseudo_flow().tolerance
        );
        assert_eq!(cfg.n_theta, 32);
        assert_eq!(cfg.smoothness, Smoothness::Constant(0.8));
    }

    #[test]
    fn rejects_unknown_keys_and_duplicate_paths() {
        let mut m = ConfigMap::default();
        assert!(m.set("inptu", "x").is_err());

        let mut m = base_map();
        m.set("out_labels", "same.cmf").unwrap();
        m.set("out_u", "same.cmf").unwrap();
        assert!(m
            .into_run_config()
            .unwrap_err()
            .to_string()
            .contains("distinct"));
    }

    #[test]
    fn complex_pair_requires_imag() {
        let mut m = ConfigMap::default();
        m.set("input", "a.cmf").unwrap();
        assert!(m
            .into_run_config()
            .unwrap_err()
            .to_string()
            .contains("imag"));
    }

    #[test]
    fn parses_file_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# reconstruction settings\ninput = real.cmf\nimag = imag.cmf\n\nsolver = pf\nmax_iters = 100\n",
        )
        .unwrap();
        let cfg = ConfigMap::from_file(&path)
            .unwrap()
            .into_run_config()
            .unwrap();
        assert_eq!(cfg.solver, SolverChoice::Pf);
        assert_eq!(cfg.solver_config.max_iters, 100);
        assert_eq!(cfg.input, PathBuf::from("real.cmf"));
    }

    #[test]
    fn anneal_needs_both_keys() {
        let mut m = base_map();
        m.set("anneal_factor", "0.99").unwrap();
        assert!(m.into_run_config().is_err());
        let mut m = base_map();
        m.set("anneal_factor", "0.99").unwrap();
        m.set("anneal_floor", "0.01").unwrap();
        let cfg = m.into_run_config().unwrap();
        assert_eq!(
            cfg.solver_config.c_anneal,
            Some(Annealing {
                factor: 0.99,
                floor: 0.01
            })
        );
    }
}
