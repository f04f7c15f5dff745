//! Benchmark functions, grid datasets and Gaussian output noise.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rng::SeededRng;
use crate::scaler::FeatureScaler;
use crate::{Error, Result};

/// Default cap on `g^d` grid points.
pub const MAX_GRID_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Griewank,
    Schwefel,
    StyblinskiTang,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::Griewank, Benchmark::Schwefel, Benchmark::StyblinskiTang];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Griewank => "griewank",
            Benchmark::Schwefel => "schwefel",
            Benchmark::StyblinskiTang => "styblinski_tang",
        }
    }

    /// Sampling interval used for the surrogate experiments.
    pub fn default_interval(self) -> (f64, f64) {
        match self {
            Benchmark::Griewank | Benchmark::StyblinskiTang => (-5.0, 5.0),
            Benchmark::Schwefel => (-50.0, 50.0),
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Benchmark::Griewank => {
                let sum: f64 = x.iter().map(|v| v * v).sum();
                let prod: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| libm::cos(v / libm::sqrt((i + 1) as f64)))
                    .product();
                1.0 + sum / 4000.0 - prod
            }
            Benchmark::Schwefel => {
                418.9829 * x.len() as f64 - x.iter().map(|v| v * libm::sin(libm::sqrt(v.abs()))).sum::<f64>()
            }
            Benchmark::StyblinskiTang => {
                0.5 * x
                    .iter()
                    .map(|v| {
                        let v2 = v * v;
                        v2 * v2 - 16.0 * v2 + 5.0 * v
                    })
                    .sum::<f64>()
            }
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "griewank" => Ok(Benchmark::Griewank),
            "schwefel" => Ok(Benchmark::Schwefel),
            "styblinskitang" | "styblinski" => Ok(Benchmark::StyblinskiTang),
            _ => Err(Error::Argument(format!(
                "unknown benchmark '{s}' (expected griewank, schwefel or styblinski_tang)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Noise factor multiplying a standard-normal draw.
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Grid {
        benchmark: Benchmark,
        lo: f64,
        hi: f64,
        grid: usize,
        dim: usize,
    },
    File {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: Source,
    pub noise: Option<NoiseSpec>,
}

impl fmt::Display for DatasetMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Grid {
                benchmark,
                lo,
                hi,
                grid,
                dim,
            } => write!(f, "{benchmark} on [{lo}, {hi}]^{dim}, grid {grid}")?,
            Source::File { path } => write!(f, "file {path}")?,
        }
        match self.noise {
            Some(n) => write!(f, ", noise delta {} seed {}", n.delta, n.seed),
            None => write!(f, ", no noise"),
        }
    }
}

/// Rows of raw inputs with raw targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// Checks shape and finiteness.
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>, meta: DatasetMeta) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Argument("dataset has no rows".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::dimension("targets", inputs.len(), targets.len()));
        }
        let d = inputs[0].len();
        for (i, row) in inputs.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Argument(format!(
                    "row {i} has {} features, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Argument(format!("row {i} has a non-finite input")));
            }
        }
        if let Some(i) = targets.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("row {i} has a non-finite target")));
        }
        Ok(Self { inputs, targets, meta })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }
}

pub fn benchmark_eval(benchmark: Benchmark, x: &[f64]) -> f64 {
    benchmark.eval(x)
}

/// `g` equally spaced points per axis (both endpoints included), Cartesian
/// product in row-major order: the first coordinate varies slowest.
pub fn grid_sample(benchmark: Benchmark, lo: f64, hi: f64, g: usize, d: usize) -> Result<Dataset> {
    grid_sample_capped(benchmark, lo, hi, g, d, MAX_GRID_POINTS)
}

pub fn grid_sample_capped(
    benchmark: Benchmark,
    lo: f64,
    hi: f64,
    g: usize,
    d: usize,
    max_points: usize,
) -> Result<Dataset> {
    if g < 2 {
        return Err(Error::Argument(format!(
            "grid needs at least 2 points per axis, got {g}"
        )));
    }
    if d == 0 {
        return Err(Error::Argument("grid dimension must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Argument(format!("invalid interval [{lo}, {hi}]")));
    }
    let n = u32::try_from(d)
        .ok()
        .and_then(|d| g.checked_pow(d))
        .filter(|&n| n <= max_points)
        .ok_or_else(|| Error::Capacity(format!("grid {g}^{d} exceeds {max_points} points")))?;

    let axis: Vec<f64> = (0..g)
        .map(|k| {
            if k == g - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (g - 1) as f64
            }
        })
        .collect();
    let mut inputs = Vec::with_capacity(n);
    let mut index = alloc::vec![0usize; d];
    for _ in 0..n {
        inputs.push(index.iter().map(|&k| axis[k]).collect::<Vec<f64>>());
        for slot in index.iter_mut().rev() {
            *slot += 1;
            if *slot < g {
                break;
            }
            *slot = 0;
        }
    }
    let targets = inputs.iter().map(|x| benchmark.eval(x)).collect();
    Dataset::new(
        inputs,
        targets,
        DatasetMeta {
            source: Source::Grid {
                benchmark,
                lo,
                hi,
                grid: g,
                dim: d,
            },
            noise: None,
        },
    )
}

/// `y -> y + delta * nu` with `nu` standard normal, drawn in row order.
pub fn add_output_noise(ds: &Dataset, spec: NoiseSpec) -> Result<Dataset> {
    if !spec.delta.is_finite() || spec.delta < 0.0 {
        return Err(Error::Argument(format!(
            "noise factor must be finite and >= 0, got {}",
            spec.delta
        )));
    }
    let mut out = ds.clone();
    out.meta.noise = Some(spec);
    if spec.delta == 0.0 {
        return Ok(out);
    }
    let mut rng = SeededRng::new(spec.seed);
    for y in out.targets.iter_mut() {
        *y += spec.delta * rng.normal();
    }
    Ok(out)
}

/// Min-max maps every input column onto `[0, 1]`.
pub fn normalize_inputs(ds: &Dataset) -> Result<(Dataset, FeatureScaler)> {
    let scaler = FeatureScaler::fit(&ds.inputs)?;
    let inputs = ds
        .inputs
        .iter()
        .map(|row| scaler.encode(row))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        Dataset {
            inputs,
            targets: ds.targets.clone(),
            meta: ds.meta.clone(),
        },
        scaler,
    ))
}
