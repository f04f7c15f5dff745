//! The noise x sample-size sweep comparing QNN and MLP surrogates.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qsurrogate_core::ann::{mlp_fit, AnnConfig};
use qsurrogate_core::bench::{add_output_noise, grid_sample, Benchmark, NoiseSpec};
use qsurrogate_core::circuit::QnnArchitecture;
use qsurrogate_core::metrics::{median, r2_score};
use qsurrogate_core::qnn::{fit, TrainConfig};
use qsurrogate_core::rng::fork_seed;

use crate::csvio::{write_file, write_table};
use crate::error::{Error, Result};
use crate::model_file::Surrogate;

pub const STREAM_NOISE: u64 = 1;
pub const STREAM_QNN: u64 = 2;
pub const STREAM_ANN: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub benchmark: Benchmark,
    pub interval: (f64, f64),
    pub dim: usize,
    /// `(grid size, noise factor)` pairs in output order.
    pub cells: Vec<(usize, f64)>,
    pub qnn_arch: QnnArchitecture,
    pub qnn_cfg: TrainConfig,
    pub ann_cfg: AnnConfig,
    pub master_seed: u64,
    pub replicates: usize,
}

impl SweepPlan {
    /// Full Cartesian product, grid size major.
    pub fn grid(grid_sizes: &[usize], noise_factors: &[f64]) -> Vec<(usize, f64)> {
        grid_sizes
            .iter()
            .flat_map(|&g| noise_factors.iter().map(move |&d| (g, d)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() || self.replicates == 0 {
            return Err(Error::Config("sweep needs at least one cell and one replicate".into()));
        }
        if self.qnn_arch.n_features != self.dim {
            return Err(Error::Config(format!(
                "QNN takes {} features but the sweep is {}-dimensional",
                self.qnn_arch.n_features, self.dim
            )));
        }
        self.qnn_arch.validate()?;
        self.qnn_cfg.validate()?;
        Ok(())
    }
}

/// Seed for replicate `rep` of cell `(g, delta)`.
pub fn job_seed(master: u64, g: usize, delta: f64, rep: usize) -> u64 {
    fork_seed(fork_seed(fork_seed(master, g as u64), delta.to_bits()), rep as u64)
}

/// One trained pair of models on one noisy dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub grid_size: usize,
    pub noise_factor: f64,
    pub replicate: usize,
    pub seed: u64,
    pub outcome: std::result::Result<RecordScores, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordScores {
    pub r2_qnn: f64,
    pub r2_ann: f64,
    pub qnn_seconds: f64,
    pub ann_seconds: f64,
}

impl RecordScores {
    pub fn delta_r2(&self) -> f64 {
        self.r2_qnn - self.r2_ann
    }
}

/// Seed-aggregated cell; R2 values are medians over successful replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub noise_factor: f64,
    pub grid_size: usize,
    pub r2_qnn: f64,
    pub r2_ann: f64,
    /// `r2_qnn - r2_ann` of the medians.
    pub delta_r2: f64,
    pub seed_count: usize,
    pub failed: bool,
    pub qnn_seconds: f64,
    pub ann_seconds: f64,
}

/// Trains both models on one noisy dataset and scores them against the
/// clean grid targets.
pub fn run_job(plan: &SweepPlan, g: usize, delta: f64, rep: usize) -> SweepRecord {
    let seed = job_seed(plan.master_seed, g, delta, rep);
    let outcome = train_pair(plan, g, delta, seed)
        .map(|(scores, _, _)| scores)
        .map_err(|e| e.to_string());
    SweepRecord {
        grid_size: g,
        noise_factor: delta,
        replicate: rep,
        seed,
        outcome,
    }
}

/// Same as [`run_job`] but also hands back the trained models.
pub fn train_pair(plan: &SweepPlan, g: usize, delta: f64, seed: u64) -> Result<(RecordScores, Surrogate, Surrogate)> {
    let (lo, hi) = plan.interval;
    let clean = grid_sample(plan.benchmark, lo, hi, g, plan.dim)?;
    let noisy = add_output_noise(
        &clean,
        NoiseSpec {
            delta,
            seed: fork_seed(seed, STREAM_NOISE),
        },
    )?;
    let qnn_cfg = TrainConfig {
        init_seed: fork_seed(seed, STREAM_QNN),
        ..plan.qnn_cfg
    };
    let ann_cfg = AnnConfig {
        seed: fork_seed(seed, STREAM_ANN),
        ..plan.ann_cfg
    };

    let t = Instant::now();
    let (qnn, _) = fit(&plan.qnn_arch, &noisy.inputs, &noisy.targets, &qnn_cfg)?;
    let qnn_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let (ann, _) = mlp_fit(&noisy.inputs, &noisy.targets, &ann_cfg)?;
    let ann_seconds = t.elapsed().as_secs_f64();

    let r2_qnn = r2_score(&clean.targets, &qnn.predict_many(&clean.inputs)?)?;
    let r2_ann = r2_score(&clean.targets, &ann.predict_many(&clean.inputs)?)?;
    Ok((
        RecordScores {
            r2_qnn,
            r2_ann,
            qnn_seconds,
            ann_seconds,
        },
        Surrogate::Qnn(qnn),
        Surrogate::Ann(ann),
    ))
}

/// Runs every `(cell, replicate)` job on a pool of `workers` threads
/// (0 = rayon default). Records come back in plan order regardless of
/// scheduling; failed jobs are kept with their error message.
pub fn run_sweep(plan: &SweepPlan, workers: usize) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    let jobs: Vec<(usize, f64, usize)> = plan
        .cells
        .iter()
        .flat_map(|&(g, d)| (0..plan.replicates).map(move |r| (g, d, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|&(g, d, r)| run_job(plan, g, d, r)).collect()))
}

/// Groups records by cell (in first-seen order) and takes medians.
pub fn aggregate(records: &[SweepRecord]) -> Vec<SweepCell> {
    let mut keys: Vec<(usize, u64)> = Vec::new();
    for r in records {
        let key = (r.grid_size, r.noise_factor.to_bits());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(g, bits)| {
            let group: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.grid_size == g && r.noise_factor.to_bits() == bits)
                .collect();
            let ok: Vec<&RecordScores> = group.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let med =
                |f: fn(&RecordScores) -> f64| median(&ok.iter().map(|s| f(s)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
            let r2_qnn = med(|s| s.r2_qnn);
            let r2_ann = med(|s| s.r2_ann);
            SweepCell {
                noise_factor: f64::from_bits(bits),
                grid_size: g,
                r2_qnn,
                r2_ann,
                delta_r2: r2_qnn - r2_ann,
                seed_count: ok.len(),
                failed: ok.len() < group.len(),
                qnn_seconds: ok.iter().fold(0.0, |t, s| t + s.qnn_seconds),
                ann_seconds: ok.iter().fold(0.0, |t, s| t + s.ann_seconds),
            }
        })
        .collect()
}

/// Median over records of the per-replicate `r2_qnn - r2_ann`.
pub fn median_delta(records: &[&SweepRecord]) -> Option<f64> {
    let deltas: Vec<f64> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .map(RecordScores::delta_r2)
        .collect();
    median(&deltas)
}

/// Columns `noise_factor,grid_size,r2_qnn,r2_ann,delta_r2,seed_count,failed`.
/// Timings are left out so identical runs give identical files.
pub fn emit_heatmap_csv(cells: &[SweepCell], path: &Path) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::Config("no sweep cells to write".into()));
    }
    let mut out = String::from("noise_factor,grid_size,r2_qnn,r2_ann,delta_r2,seed_count,failed\n");
    for c in cells {
        out.push_str(&format!(
            "{:?},{},{:?},{:?},{:?},{},{}\n",
            c.noise_factor, c.grid_size, c.r2_qnn, c.r2_ann, c.delta_r2, c.seed_count, c.failed
        ));
    }
    write_file(path, out.as_bytes())
}

/// Columns `x0,x1,...,y_true[,y_noisy],y_pred`.
pub fn emit_surface_csv(
    model: &Surrogate,
    inputs: &[Vec<f64>],
    y_true: &[f64],
    y_noisy: Option<&[f64]>,
    path: &Path,
) -> Result<()> {
    let d = model.n_inputs();
    if inputs.len() != y_true.len() || y_noisy.is_some_and(|n| n.len() != y_true.len()) {
        return Err(Error::Config("surface columns have different lengths".into()));
    }
    let pred = model.predict_many(inputs)?;
    let mut columns: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    columns.push("y_true".into());
    if y_noisy.is_some() {
        columns.push("y_noisy".into());
    }
    columns.push("y_pred".into());
    let rows = inputs.iter().enumerate().map(|(i, x)| {
        let mut row = x.clone();
        row.push(y_true[i]);
        if let Some(n) = y_noisy {
            row.push(n[i]);
        }
        row.push(pred[i]);
        row
    });
    write_table(path, &columns, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsurrogate_core::circuit::AnsatzSchedule;

    fn small_plan(cells: Vec<(usize, f64)>) -> SweepPlan {
        SweepPlan {
            benchmark: Benchmark::Griewank,
            interval: (-5.0, 5.0),
            dim: 2,
            cells,
            qnn_arch: QnnArchitecture::new(2, 1, 2, AnsatzSchedule::Alternating),
            qnn_cfg: TrainConfig {
                max_evals: 40,
                ..TrainConfig::default()
            },
            ann_cfg: AnnConfig {
                epochs: 30,
                ..AnnConfig::default()
            },
            master_seed: 5,
            replicates: 2,
        }
    }

    #[test]
    fn deterministic_and_ordered() {
        let plan = small_plan(SweepPlan::grid(&[4, 5], &[0.0, 0.3]));
        let a = run_sweep(&plan, 2).unwrap();
        let b = run_sweep(&plan, 1).unwrap();
        let strip = |rs: &[SweepRecord]| -> Vec<(usize, u64, usize, u64, f64, f64)> {
            rs.iter()
                .map(|r| {
                    let s = r.outcome.as_ref().unwrap();
                    (
                        r.grid_size,
                        r.noise_factor.to_bits(),
                        r.replicate,
                        r.seed,
                        s.r2_qnn,
                        s.r2_ann,
                    )
                })
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
        let cells = aggregate(&a);
        assert_eq!(cells.len(), 4);
        assert_eq!((cells[1].grid_size, cells[1].noise_factor), (4, 0.3));
        for c in &cells {
            assert_eq!(c.delta_r2, c.r2_qnn - c.r2_ann);
            assert_eq!(c.seed_count, 2);
            assert!(!c.failed);
        }
    }

    #[test]
    fn failing_cell_is_flagged_not_fatal() {
        let plan = small_plan(vec![(1, 0.5), (4, 0.5)]);
        let records = run_sweep(&plan, 1).unwrap();
        let cells = aggregate(&records);
        assert!(cells[0].failed && cells[0].seed_count == 0 && cells[0].r2_qnn.is_nan());
        assert!(!cells[1].failed && cells[1].seed_count == 2);
    }

    #[test]
    fn heatmap_shape_and_bytes() {
        let cells: Vec<SweepCell> = SweepPlan::grid(&[10, 20, 30, 40, 50], &[0.1, 0.2, 0.3, 0.4, 0.5])
            .into_iter()
            .map(|(g, d)| SweepCell {
                noise_factor: d,
                grid_size: g,
                r2_qnn: 0.9,
                r2_ann: 0.8,
                delta_r2: 0.9 - 0.8,
                seed_count: 5,
                failed: false,
                qnn_seconds: 1.0,
                ann_seconds: 2.0,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_heatmap_csv(&cells, &p1).unwrap();
        emit_heatmap_csv(&cells, &p2).unwrap();
        let text = std::fs::read_to_string(&p1).unwrap();
        assert_eq!(text.lines().count(), 26);
        assert_eq!(text, std::fs::read_to_string(&p2).unwrap());
        assert!(emit_heatmap_csv(&[], &p1).is_err());
    }

    #[test]
    fn seeds_differ_per_job() {
        let a = job_seed(1, 10, 0.5, 0);
        assert_ne!(a, job_seed(1, 10, 0.5, 1));
        assert_ne!(a, job_seed(1, 20, 0.5, 0));
        assert_ne!(a, job_seed(1, 10, 0.4, 0));
        assert_ne!(a, job_seed(2, 10, 0.5, 0));
    }
}
