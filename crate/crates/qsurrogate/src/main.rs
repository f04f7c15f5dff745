use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qsurrogate::config::{parse_cell, ExperimentConfig};
use qsurrogate::csvio::{load_csv_dataset, load_inputs, write_dataset_csv, write_table};
use qsurrogate::model_file::Surrogate;
use qsurrogate::profiles::ProfileRegistry;
use qsurrogate::sweep::{
    aggregate, emit_heatmap_csv, emit_surface_csv, run_sweep, SweepPlan, STREAM_ANN, STREAM_NOISE, STREAM_QNN,
};
use qsurrogate_core::ann::mlp_fit;
use qsurrogate_core::bench::{add_output_noise, grid_sample, Benchmark, Dataset, NoiseSpec};
use qsurrogate_core::circuit::AnsatzSchedule;
use qsurrogate_core::hardware::{required_two_qubit_error, survival_table};
use qsurrogate_core::metrics::r2_score;
use qsurrogate_core::qnn::{self, Readout};
use qsurrogate_core::rng::fork_seed;

/// Quantum and classical surrogate models for noisy, scarce data.
#[derive(Debug, Parser)]
#[command(name = "qsurrogate", version)]
struct Cli {
    /// TOML experiment config; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a benchmark on a grid, add output noise, write a dataset CSV.
    GenData {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        seed: SeedArgs,
        /// Output CSV [default: <output_dir>/data.csv]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a QNN or MLP surrogate and save it as JSON.
    Fit {
        /// Model family.
        #[arg(long, value_parser = ["qnn", "ann"], default_value = "qnn")]
        model: String,
        /// Train on this CSV instead of a generated benchmark grid.
        #[arg(long, value_name = "CSV")]
        data: Option<PathBuf>,
        /// Comma-separated feature column names [default: all but the target].
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        /// Target column name [default: last column].
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        grid: DataArgs,
        #[command(flatten)]
        qnn: QnnArgs,
        #[command(flatten)]
        ann: AnnArgs,
        #[command(flatten)]
        seed: SeedArgs,
        /// Model JSON [default: <output_dir>/model.json]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a surface CSV of the fit over the training inputs.
        #[arg(long, value_name = "CSV")]
        surface: Option<PathBuf>,
    },
    /// Evaluate a saved model on the rows of a CSV.
    Predict {
        /// Model JSON written by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// CSV with the model's feature columns, optionally followed by a target column.
        #[arg(long)]
        data: PathBuf,
        /// Predictions CSV [default: <output_dir>/predictions.csv]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare QNN and MLP over grid sizes and noise factors.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        /// Grid sizes [default: 10,20,30,40,50]
        #[arg(long, value_delimiter = ',')]
        grid_sizes: Option<Vec<usize>>,
        /// Noise factors [default: 0.1,0.2,0.3,0.4,0.5]
        #[arg(long, value_delimiter = ',')]
        noise_factors: Option<Vec<f64>>,
        /// Explicit GRID:NOISE cells, e.g. `--cells 10:0.5 20:0.5`; replaces the product.
        #[arg(long, num_args = 1..)]
        cells: Option<Vec<String>>,
        /// Seeds per cell [default: 5]
        #[arg(long)]
        replicates: Option<usize>,
        /// Worker threads, 0 = one per core [default: 0]
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        qnn: QnnArgs,
        #[command(flatten)]
        ann: AnnArgs,
        #[command(flatten)]
        seed: SeedArgs,
        /// Heatmap CSV [default: <output_dir>/heatmap.csv]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Survival rates of the alternating circuit on noisy hardware.
    #[command(args_conflicts_with_subcommands = true)]
    Survival {
        #[command(subcommand)]
        solve: Option<SurvivalCommand>,
        #[command(flatten)]
        table: SurvivalArgs,
    },
}

#[derive(Debug, Subcommand)]
enum SurvivalCommand {
    /// Two-qubit error rate needed to reach a target survival rate.
    Solve {
        /// Target survival probability.
        #[arg(long)]
        target: f64,
        /// Qubit count.
        #[arg(long)]
        qubits: usize,
        /// Layer count.
        #[arg(long)]
        layers: usize,
        /// Readout error as a multiple of the two-qubit error.
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
        /// Profile supplying the fixed single-qubit error and the reference two-qubit error.
        #[arg(long, default_value = "ibmq_belem")]
        profile: String,
        /// Single-qubit error [default: the profile's]
        #[arg(long)]
        e_single: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SurvivalArgs {
    /// Profile name from the bundled registry (ibmq_belem, falcon_r5_11).
    #[arg(long, default_value = "ibmq_belem")]
    profile: String,
    /// Readout error; required for profiles that do not define one.
    #[arg(long)]
    readout: Option<f64>,
    /// Qubit counts (table rows).
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    qubits: Vec<usize>,
    /// Layer counts (table columns).
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16,20")]
    layers: Vec<usize>,
    /// Also write `n_qubits,n_layers,survival` rows to this CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// griewank | schwefel | styblinski_tang [default: griewank]
    #[arg(long)]
    benchmark: Option<Benchmark>,
    /// Sampling interval [default: the benchmark's, e.g. -5 5 for griewank]
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    interval: Option<Vec<f64>>,
    /// Points per axis, endpoints included [default: 20]
    #[arg(long)]
    grid: Option<usize>,
    /// Input dimension [default: 2]
    #[arg(long)]
    dim: Option<usize>,
    /// Output noise factor delta [default: 0]
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Debug, Args)]
struct QnnArgs {
    /// Qubits per feature [default: 2]
    #[arg(long)]
    replication: Option<usize>,
    /// Circuit layers [default: 20]
    #[arg(long)]
    layers: Option<usize>,
    /// alternating | circuit11_only | circuit9_only [default: alternating]
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<AnsatzSchedule>,
    /// Encode the features only in the first layer.
    #[arg(long)]
    no_reupload: bool,
    /// Factor applied to [0, 1]-scaled features before encoding [default: 1]
    #[arg(long)]
    feature_scale: Option<f64>,
    /// COBYLA evaluation budget [default: 3000]
    #[arg(long)]
    max_evals: Option<usize>,
    /// Initial trust radius [default: 1]
    #[arg(long)]
    rhobeg: Option<f64>,
    /// Final trust radius [default: 1e-4]
    #[arg(long)]
    rhoend: Option<f64>,
    /// z_string | mean_z [default: z_string]
    #[arg(long, value_parser = parse_readout)]
    readout: Option<Readout>,
}

#[derive(Debug, Args)]
struct AnnArgs {
    /// MLP training epochs [default: 5000]
    #[arg(long)]
    epochs: Option<usize>,
    /// MLP ADAM learning rate [default: 0.01]
    #[arg(long)]
    learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
struct SeedArgs {
    /// Master seed; every random stream is forked from it [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_schedule(s: &str) -> Result<AnsatzSchedule, String> {
    match s {
        "alternating" => Ok(AnsatzSchedule::Alternating),
        "circuit11_only" | "circuit11" => Ok(AnsatzSchedule::Circuit11Only),
        "circuit9_only" | "circuit9" => Ok(AnsatzSchedule::Circuit9Only),
        _ => Err(format!("unknown schedule '{s}'")),
    }
}

fn parse_readout(s: &str) -> Result<Readout, String> {
    match s {
        "z_string" => Ok(Readout::ZString),
        "mean_z" => Ok(Readout::MeanZ),
        _ => Err(format!("unknown readout '{s}'")),
    }
}

impl DataArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let d = &mut cfg.data;
        if let Some(b) = self.benchmark {
            d.benchmark = b;
        }
        if let Some(i) = &self.interval {
            d.interval = Some((i[0], i[1]));
        }
        if let Some(g) = self.grid {
            d.grid = g;
        }
        if let Some(n) = self.dim {
            d.dim = n;
        }
        if let Some(n) = self.noise {
            d.noise = n;
        }
    }
}

impl QnnArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let q = &mut cfg.qnn;
        if let Some(v) = self.replication {
            q.replication = v;
        }
        if let Some(v) = self.layers {
            q.layers = v;
        }
        if let Some(v) = self.schedule {
            q.schedule = v;
        }
        if self.no_reupload {
            q.reupload = false;
        }
        if let Some(v) = self.feature_scale {
            q.feature_scale = v;
        }
        if let Some(v) = self.max_evals {
            q.max_evals = v;
        }
        if let Some(v) = self.rhobeg {
            q.rhobeg = v;
        }
        if let Some(v) = self.rhoend {
            q.rhoend = v;
        }
        if let Some(v) = self.readout {
            q.readout = v;
        }
    }
}

impl AnnArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.epochs {
            cfg.ann.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.ann.learning_rate = v;
        }
    }
}

impl SeedArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

fn out_path(explicit: Option<PathBuf>, cfg: &ExperimentConfig, default: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        cfg.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default)
    })
}

/// Clean grid and its noisy copy.
fn benchmark_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let d = &cfg.data;
    let (lo, hi) = d.interval();
    let clean = grid_sample(d.benchmark, lo, hi, d.grid, d.dim)?;
    let noisy = add_output_noise(
        &clean,
        NoiseSpec {
            delta: d.noise,
            seed: fork_seed(cfg.seed, STREAM_NOISE),
        },
    )?;
    Ok((clean, noisy))
}

fn cmd_gen_data(cfg: &ExperimentConfig, out: PathBuf) -> Result<()> {
    let (_, noisy) = benchmark_data(cfg)?;
    write_dataset_csv(&noisy, &out)?;
    println!(
        "wrote {} rows, d = {} ({}) to {}",
        noisy.len(),
        noisy.dim(),
        noisy.meta,
        out.display()
    );
    Ok(())
}

fn cmd_fit(
    cfg: &ExperimentConfig,
    model_kind: &str,
    data: Option<&Path>,
    out: PathBuf,
    surface: Option<PathBuf>,
) -> Result<()> {
    let (train, clean) = match data {
        Some(path) => {
            let ds = load_csv_dataset(path, cfg.data.features.as_deref(), cfg.data.target.as_deref())?;
            (ds, None)
        }
        None => {
            let (clean, noisy) = benchmark_data(cfg)?;
            (noisy, Some(clean))
        }
    };
    let start = Instant::now();
    let (model, result) = match model_kind {
        "qnn" => {
            let arch = cfg.qnn.architecture(train.dim());
            arch.validate()?;
            if !arch.meets_minimum_parameter_rule() {
                eprintln!(
                    "warning: {} trainable parameters for {} feature encodings; fewer than two per encoding",
                    arch.n_params(),
                    arch.n_encodings()
                );
            }
            let tc = cfg.qnn.train_config(fork_seed(cfg.seed, STREAM_QNN));
            let (m, r) = qnn::fit(&arch, &train.inputs, &train.targets, &tc)?;
            (Surrogate::Qnn(m), r)
        }
        _ => {
            let ac = cfg.ann.train_config(fork_seed(cfg.seed, STREAM_ANN));
            let (m, r) = mlp_fit(&train.inputs, &train.targets, &ac)?;
            (Surrogate::Ann(m), r)
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    model.save(&out)?;

    let pred = model.predict_many(&train.inputs)?;
    let r2_train = r2_score(&train.targets, &pred)?;
    let mut line = format!(
        "model={} r2_train={r2_train:.6} loss={:.6e} evaluations={} seconds={seconds:.2}",
        model.kind(),
        result.best_value,
        result.n_evaluations
    );
    if let Some(clean) = &clean {
        line.push_str(&format!(" r2_clean={:.6}", r2_score(&clean.targets, &pred)?));
    }
    println!("{line}");
    println!("saved {}", out.display());

    if let Some(path) = surface {
        let (y_true, y_noisy) = match &clean {
            Some(c) if cfg.data.noise > 0.0 => (&c.targets, Some(train.targets.as_slice())),
            Some(c) => (&c.targets, None),
            None => (&train.targets, None),
        };
        emit_surface_csv(&model, &train.inputs, y_true, y_noisy, &path)?;
        println!("surface {}", path.display());
    }
    Ok(())
}

fn cmd_predict(model_path: &Path, data: &Path, out: PathBuf) -> Result<()> {
    let model = Surrogate::load(model_path)?;
    let d = model.n_inputs();
    let (inputs, targets) = load_inputs(data, d)?;
    let pred = model.predict_many(&inputs)?;
    let scaler = match &model {
        Surrogate::Qnn(m) => m.input_scaler(),
        Surrogate::Ann(m) => m.input_scaler(),
    };
    let outside = inputs
        .iter()
        .filter(|x| {
            x.iter()
                .enumerate()
                .any(|(j, v)| *v < scaler.min[j] || *v > scaler.max[j])
        })
        .count();
    if outside > 0 {
        eprintln!("warning: {outside} rows lie outside the training domain");
    }
    let mut columns: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    if targets.is_some() {
        columns.push("y_true".into());
    }
    columns.push("y_pred".into());
    let rows = inputs.iter().enumerate().map(|(i, x)| {
        let mut row = x.clone();
        if let Some(t) = &targets {
            row.push(t[i]);
        }
        row.push(pred[i]);
        row
    });
    write_table(&out, &columns, rows)?;
    if let Some(t) = &targets {
        println!("r2={:.6}", r2_score(t, &pred)?);
    }
    println!("wrote {} predictions to {}", pred.len(), out.display());
    Ok(())
}

fn cmd_sweep(cfg: &ExperimentConfig, out: PathBuf) -> Result<bool> {
    let plan = SweepPlan {
        benchmark: cfg.data.benchmark,
        interval: cfg.data.interval(),
        dim: cfg.data.dim,
        cells: cfg.sweep_cells()?,
        qnn_arch: cfg.qnn.architecture(cfg.data.dim),
        qnn_cfg: cfg.qnn.train_config(0),
        ann_cfg: cfg.ann.train_config(0),
        master_seed: cfg.seed,
        replicates: cfg.replicates,
    };
    let records = run_sweep(&plan, cfg.sweep.workers)?;
    for r in &records {
        if let Err(e) = &r.outcome {
            eprintln!(
                "cell {}:{} replicate {} failed: {e}",
                r.grid_size, r.noise_factor, r.replicate
            );
        }
    }
    let cells = aggregate(&records);
    emit_heatmap_csv(&cells, &out)?;

    println!(
        "{:>6} {:>6} {:>10} {:>10} {:>10} {:>6} {:>9}",
        "grid", "noise", "r2_qnn", "r2_ann", "delta_r2", "seeds", "seconds"
    );
    for c in &cells {
        println!(
            "{:>6} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>6} {:>9.1}{}",
            c.grid_size,
            c.noise_factor,
            c.r2_qnn,
            c.r2_ann,
            c.delta_r2,
            c.seed_count,
            c.qnn_seconds + c.ann_seconds,
            if c.failed { "  FAILED" } else { "" }
        );
    }
    println!("wrote {}", out.display());
    Ok(cells.iter().all(|c| !c.failed))
}

fn cmd_survival(args: &SurvivalArgs) -> Result<()> {
    let profile = ProfileRegistry::builtin().resolve(&args.profile, args.readout)?;
    let table = survival_table(&profile, &args.qubits, &args.layers)?;
    println!(
        "survival rates for {} (e_single {}, e_two {}, e_readout {})",
        profile.label, profile.e_single, profile.e_two, profile.e_readout
    );
    let header: Vec<String> = args.layers.iter().map(|l| format!("{:>8}", format!("L={l}"))).collect();
    println!("{:>6} {}", "n", header.join(" "));
    for (n, row) in args.qubits.iter().zip(&table) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>8.4}")).collect();
        println!("{n:>6} {}", cells.join(" "));
    }
    if let Some(path) = &args.out {
        let rows = args.qubits.iter().zip(&table).flat_map(|(&n, row)| {
            args.layers
                .iter()
                .zip(row)
                .map(move |(&l, &s)| vec![n as f64, l as f64, s])
        });
        let columns = ["n_qubits", "n_layers", "survival"].map(String::from);
        write_table(path, &columns, rows)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_solve(
    target: f64,
    qubits: usize,
    layers: usize,
    ratio: f64,
    profile: &str,
    e_single: Option<f64>,
) -> Result<()> {
    let registry = ProfileRegistry::builtin();
    let entry = registry
        .entry(profile)
        .with_context(|| format!("unknown profile '{profile}'"))?;
    let e1 = e_single.unwrap_or(entry.e_single);
    let e2 = required_two_qubit_error(target, qubits, layers, e1, ratio)?;
    println!(
        "target survival {target} at n = {qubits}, L = {layers}, e_single = {e1}, readout/two-qubit ratio {ratio}"
    );
    println!("e_two = {e2:.6e} ({:.4}%)", 100.0 * e2);
    println!("e_readout = {:.6e} ({:.4}%)", ratio * e2, 100.0 * ratio * e2);
    println!("e_two / {profile} e_two = {:.4}", e2 / entry.e_two);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    match cli.command {
        Command::GenData { data, seed, out } => {
            data.apply(&mut cfg);
            seed.apply(&mut cfg);
            cfg.validate()?;
            cmd_gen_data(&cfg, out_path(out, &cfg, "data.csv"))?;
        }
        Command::Fit {
            model,
            data,
            features,
            target,
            grid,
            qnn,
            ann,
            seed,
            out,
            surface,
        } => {
            grid.apply(&mut cfg);
            qnn.apply(&mut cfg);
            ann.apply(&mut cfg);
            seed.apply(&mut cfg);
            if let Some(path) = data {
                cfg.data.csv = Some(path);
            }
            if features.is_some() {
                cfg.data.features = features;
            }
            if target.is_some() {
                cfg.data.target = target;
            }
            cfg.validate()?;
            let csv = cfg.data.csv.clone();
            cmd_fit(&cfg, &model, csv.as_deref(), out_path(out, &cfg, "model.json"), surface)?;
        }
        Command::Predict { model, data, out } => {
            cmd_predict(&model, &data, out_path(out, &cfg, "predictions.csv"))?;
        }
        Command::Sweep {
            data,
            grid_sizes,
            noise_factors,
            cells,
            replicates,
            workers,
            qnn,
            ann,
            seed,
            out,
        } => {
            data.apply(&mut cfg);
            qnn.apply(&mut cfg);
            ann.apply(&mut cfg);
            seed.apply(&mut cfg);
            if let Some(v) = grid_sizes {
                cfg.sweep.grid_sizes = v;
            }
            if let Some(v) = noise_factors {
                cfg.sweep.noise_factors = v;
            }
            if let Some(v) = cells {
                for c in &v {
                    parse_cell(c)?;
                }
                cfg.sweep.cells = Some(v);
            }
            if let Some(v) = replicates {
                cfg.replicates = v;
            }
            if let Some(v) = workers {
                cfg.sweep.workers = v;
            }
            if cfg.data.csv.is_some() {
                bail!("sweeps run on benchmark grids; remove data.csv from the config");
            }
            cfg.validate()?;
            return cmd_sweep(&cfg, out_path(out, &cfg, "heatmap.csv"));
        }
        Command::Survival { solve, table } => match solve {
            Some(SurvivalCommand::Solve {
                target,
                qubits,
                layers,
                ratio,
                profile,
                e_single,
            }) => cmd_solve(target, qubits, layers, ratio, &profile, e_single)?,
            None => cmd_survival(&table)?,
        },
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some sweep cells failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
