//! Synthetic test-data generator: a ground-truth angle field plus a noisy
//! complex-pair observation with wrapped Gaussian angle noise.
//!
//! Everything is driven by a splitmix64 stream from the given seed, so a
//! fixed seed reproduces the files byte for byte.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use cyclic_maxflow::{CylinderGrid, SpatialScalarField};

use crate::format;

/// Deterministic 64-bit PRNG (splitmix64).
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller (one sample per call, second of each
    /// pair cached).
    pub fn next_gaussian(&mut self, spare: &mut Option<f64>) -> f64 {
        if let Some(s) = spare.take() {
            return s;
        }
        // u1 in (0, 1] keeps the log finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (TAU * u2).sin_cos();
        *spare = Some(r * sin);
        r * cos
    }
}

/// Wraps any finite angle into [-pi, pi). In-range inputs pass through
/// untouched, so wrapping never perturbs an already-valid angle.
pub fn wrap_angle(x: f64) -> f64 {
    if (-PI..PI).contains(&x) {
        return x;
    }
    let r = (x + PI).rem_euclid(TAU) - PI;
    // rounding at the boundary can land exactly on pi
    if (-PI..PI).contains(&r) {
        r
    } else {
        -PI
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// Constant phase_a on the low half of axis 0, phase_b on the rest.
    TwoPhase,
    /// One full turn across axis 0 starting at phase_a; the raw angles wrap
    /// somewhere inside the image but the cyclic step stays uniform.
    Ramp,
    /// phase_a inside a centred ball of the given relative radius, phase_b
    /// outside.
    Disk,
}

impl FromStr for Pattern {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-phase" => Ok(Self::TwoPhase),
            "ramp" => Ok(Self::Ramp),
            "disk" => Ok(Self::Disk),
            other => bail!("unknown pattern `{other}` (two-phase | ramp | disk)"),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TwoPhase => "two-phase",
            Self::Ramp => "ramp",
            Self::Disk => "disk",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SynthParams {
    pub dims: Vec<usize>,
    pub pattern: Pattern,
    pub noise_sigma: f64,
    pub seed: u64,
    pub phase_a: f64,
    pub phase_b: f64,
    /// Disk radius as a fraction of the smallest spatial extent.
    pub radius: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            dims: vec![64, 64],
            pattern: Pattern::TwoPhase,
            noise_sigma: 0.3,
            seed: 1,
            phase_a: -PI / 2.0,
            phase_b: PI / 2.0,
            radius: 0.3,
        }
    }
}

/// Ground truth and observation buffers, all per voxel.
pub struct SynthData {
    pub truth: Vec<f64>,
    pub observed: Vec<f64>,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

pub fn generate(params: &SynthParams) -> Result<SynthData> {
    if params.dims.is_empty() || params.dims.len() > 3 {
        bail!("dims must have 1 to 3 axes, got {}", params.dims.len());
    }
    if params.dims.iter().any(|&d| d == 0) {
        bail!("dims must be positive");
    }
    if !(params.noise_sigma >= 0.0) || !params.noise_sigma.is_finite() {
        bail!("noise sigma must be non-negative and finite");
    }
    let num_voxels: usize = params.dims.iter().product();
    let dims = &params.dims;
    let coord = |v: usize, axis: usize| -> usize {
        let stride: usize = dims[..axis].iter().product();
        (v / stride) % dims[axis]
    };

    let mut truth = Vec::with_capacity(num_voxels);
    for v in 0..num_voxels {
        let t = match params.pattern {
            Pattern::TwoPhase => {
                if coord(v, 0) < dims[0] / 2 {
                    params.phase_a
                } else {
                    params.phase_b
                }
            }
            Pattern::Ramp => {
                let i = coord(v, 0) as f64;
                wrap_angle(params.phase_a + (i + 0.5) * TAU / dims[0] as f64)
            }
            Pattern::Disk => {
                let min_dim = *dims.iter().min().expect("non-empty dims") as f64;
                let r = params.radius * min_dim / 2.0;
                let mut sq = 0.0;
                for (a, &d) in dims.iter().enumerate() {
                    let delta = coord(v, a) as f64 - (d as f64 - 1.0) / 2.0;
                    sq += delta * delta;
                }
                if sq.sqrt() <= r {
                    params.phase_a
                } else {
                    params.phase_b
                }
            }
        };
        let t = wrap_angle(t);
        truth.push(t);
    }

    let mut rng = SplitMix64::new(params.seed);
    let mut spare = None;
    let observed: Vec<f64> = if params.noise_sigma == 0.0 {
        truth.clone()
    } else {
        truth
            .iter()
            .map(|&t| wrap_angle(t + params.noise_sigma * rng.next_gaussian(&mut spare)))
            .collect()
    };

    let real = observed.iter().map(|&a| a.cos()).collect();
    let imag = observed.iter().map(|&a| a.sin()).collect();
    Ok(SynthData {
        truth,
        observed,
        real,
        imag,
    })
}

/// Paths produced by [`write_synth`].
pub struct SynthFiles {
    pub truth: PathBuf,
    pub real: PathBuf,
    pub imag: PathBuf,
    pub meta: PathBuf,
}

/// Writes `<prefix>_truth.cmf`, `<prefix>_real.cmf`, `<prefix>_imag.cmf`
/// and a `<prefix>.meta` key=value sidecar recording the generator inputs
/// (including the seed).
pub fn write_synth(prefix: &Path, params: &SynthParams) -> Result<SynthFiles> {
    let data = generate(params)?;
    // the field header needs some theta bin count; it is irrelevant for
    // per-voxel spatial fields, use the smallest legal one
    let grid =
        CylinderGrid::new(&params.dims, 2).map_err(|e| anyhow::anyhow!("invalid dims: {e}"))?;
    let as_field = |values: Vec<f64>| -> Result<SpatialScalarField> {
        SpatialScalarField::from_values(&grid, values).map_err(|e| anyhow::anyhow!("{e}"))
    };

    let stem = prefix.to_string_lossy();
    let files = SynthFiles {
        truth: PathBuf::from(format!("{stem}_truth.cmf")),
        real: PathBuf::from(format!("{stem}_real.cmf")),
        imag: PathBuf::from(format!("{stem}_imag.cmf")),
        meta: PathBuf::from(format!("{stem}.meta")),
    };
    format::write_spatial(&files.truth, &as_field(data.truth)?)?;
    format::write_spatial(&files.real, &as_field(data.real)?)?;
    format::write_spatial(&files.imag, &as_field(data.imag)?)?;

    let dims_text = params
        .dims
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("x");
    let meta = format!(
        "pattern={}\ndims={}\nnoise_sigma={}\nseed={}\nphase_a={}\nphase_b={}\nradius={}\n",
        params.pattern,
        dims_text,
        params.noise_sigma,
        params.seed,
        params.phase_a,
        params.phase_b,
        params.radius,
    );
    std::fs::write(&files.meta, meta)
        .with_context(|| format!("writing {}", files.meta.display()))?;
    Ok(files)
}

/// Root-mean-square cyclic distance between two angle buffers.
pub fn cyclic_rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let d = cyclic_maxflow::data_term::cyclic_distance(x, y);
        acc += d * d;
    }
    (acc / a.len() as f64).sqrt()
}
