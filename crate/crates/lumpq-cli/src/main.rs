use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lumpq::generate::{generate_instance, GeneratorClass, InstanceSpec};
use lumpq::invariance::{build_invariance_matrix, self_adjoint_eigs};
use lumpq::methods::{
    baseline_froyland, baseline_iterative_clustering, baseline_p_eigenvectors, baseline_svd_with,
    detect_general, detect_general_with_shifts, detect_metastable, DetectionResult, MethodKind,
    SvdMode, DEFAULT_REPEATS, ITER_CLUSTER_MAX_ITER,
};
use lumpq::metrics::{simulated_waiting_time, waiting_time};
use lumpq::sweep::{records_to_csv, run_sweep, summarize, KPolicy, SweepConfig};
use lumpq::{io, markov, Error};

use lumpq_cli::{parse_eps_grid, parse_lambda_list, parse_methods, spectrum_svg};

#[derive(Parser)]
#[command(
    name = "lumpq",
    about = "Lumpings and metastable states of Markov chains via the invariance matrix Q(λ)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted test matrix and its truth partition
    Generate(GenerateArgs),
    /// Run one detection method on a matrix file
    Detect(DetectArgs),
    /// Sweep (ε, trials, methods) and write a benchmark CSV
    Bench(BenchArgs),
    /// Dump the spectrum of a matrix (and optionally of Q(λ))
    Spectrum(SpectrumArgs),
}

fn parse_unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator class: blockdiag, sparse, or blockstoch
    #[arg(long)]
    class: String,
    /// State count
    #[arg(long)]
    n: usize,
    /// Block count (omit to resample from {3, 4, 5})
    #[arg(long)]
    m: Option<usize>,
    /// Mixing strength / between-block density, in [0, 1]
    #[arg(long, value_parser = parse_unit_interval)]
    epsilon: f64,
    /// Within-block density (sparse class only), in [0, 1]
    #[arg(long, value_parser = parse_unit_interval)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes <out>.mtx and <out>.truth.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Matrix Market file holding the transition matrix
    matrix: PathBuf,
    /// One of: q-metastable, q-general, p-eigs, svd, froyland, iter-cluster
    #[arg(long)]
    method: String,
    /// Number of aggregates
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// λ override for q-general: re,im[;re,im...]
    #[arg(long)]
    lambda: Option<String>,
    /// Shifts per repeat for q-general (default: k)
    #[arg(long)]
    n_shifts: Option<usize>,
    /// Repeats for q-general
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    repeats: usize,
    /// Iteration cap for iter-cluster
    #[arg(long, default_value_t = ITER_CLUSTER_MAX_ITER)]
    max_iter: usize,
    /// Cluster on left singular vectors only (svd)
    #[arg(long)]
    svd_left_only: bool,
    /// Cross-check τ by simulating this many steps
    #[arg(long)]
    simulate_tau: Option<usize>,
    /// Partition CSV output (default: <matrix>.partition.csv)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    class: String,
    #[arg(long)]
    n: usize,
    /// Fixed block count (omit to resample 3..=5 per trial)
    #[arg(long)]
    m: Option<usize>,
    /// Epsilon grid: value or start:stop:step (inclusive)
    #[arg(long)]
    eps: String,
    #[arg(long, value_parser = parse_unit_interval)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Comma list of methods; `q` picks the class-appropriate Q pipeline
    #[arg(long, default_value = "q,p-eigs,svd,froyland,iter-cluster")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// truth (use planted block count) or fixed:<k>
    #[arg(long, default_value = "truth")]
    k_policy: String,
    #[arg(long)]
    out: PathBuf,
    /// Record wall-clock per row (makes the CSV non-reproducible)
    #[arg(long)]
    record_timing: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    matrix: PathBuf,
    /// CSV of re,im eigenvalue rows
    #[arg(long)]
    out: PathBuf,
    /// Also dump the ascending eigenvalues of Q(λ) to <out>.q.csv
    #[arg(long)]
    lambda: Option<String>,
    /// Optional SVG scatter
    #[arg(long)]
    svg: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    // Trials parallelize at the task level; single-threaded decompositions
    // keep repeated runs byte-identical.
    lumpq::limit_lapack_threads(1);
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Spectrum(args) => cmd_spectrum(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let class = GeneratorClass::parse(&args.class).map_err(|e| usage(e.to_string()))?;
    if class == GeneratorClass::SparseMasked {
        let delta = args
            .delta
            .ok_or_else(|| usage("sparse class requires --delta"))?;
        if delta < args.epsilon {
            return Err(usage(format!(
                "delta {delta} must be at least epsilon {}",
                args.epsilon
            )));
        }
    } else if args.delta.is_some() {
        return Err(usage("--delta only applies to the sparse class"));
    }
    let spec = InstanceSpec {
        class,
        n: args.n,
        m: args.m,
        epsilon: args.epsilon,
        delta: args.delta,
        seed: args.seed,
    };
    let instance = generate_instance(&spec).map_err(|e| match e {
        Error::InvalidConfig(msg) => usage(msg),
        other => CliError::Runtime(other),
    })?;
    let provenance = instance.config.provenance();
    let mtx = args.out.with_extension("mtx");
    let truth = args.out.with_extension("truth.csv");
    io::write_matrix_with_comments(
        &instance.matrix,
        &mtx,
        &[format!("class={} {provenance}", class.token())],
    )?;
    io::write_partition(&instance.truth, &truth)?;
    println!("class={} {provenance}", class.token());
    println!("matrix={} truth={}", mtx.display(), truth.display());
    Ok(())
}

fn run_detect_method(args: &DetectArgs, p: &markov::TransitionMatrix) -> Result<DetectionResult, CliError> {
    let method = MethodKind::parse(&args.method).map_err(|e| usage(e.to_string()))?;
    if args.lambda.is_some() && method != MethodKind::QGeneral {
        return Err(usage("--lambda only applies to q-general"));
    }
    if args.svd_left_only && method != MethodKind::Svd {
        return Err(usage("--svd-left-only only applies to svd"));
    }
    let r = match method {
        MethodKind::QMetastable => detect_metastable(p, args.k, args.seed)?,
        MethodKind::QGeneral => match &args.lambda {
            Some(s) => {
                let shifts = parse_lambda_list(s).map_err(|e| usage(e.to_string()))?;
                detect_general_with_shifts(p, args.k, &shifts, args.seed)?
            }
            None => {
                let n_shifts = args.n_shifts.unwrap_or_else(|| args.k.min(8));
                detect_general(p, args.k, n_shifts, args.repeats, args.seed)?
            }
        },
        MethodKind::PEigs => baseline_p_eigenvectors(p, args.k, args.seed)?,
        MethodKind::Svd => {
            let mode = if args.svd_left_only {
                SvdMode::LeftOnly
            } else {
                SvdMode::Both
            };
            baseline_svd_with(p, args.k, args.seed, mode)?
        }
        MethodKind::Froyland => baseline_froyland(p, args.k, args.seed)?,
        MethodKind::IterCluster => {
            baseline_iterative_clustering(p, args.k, args.seed, args.max_iter)?
        }
    };
    Ok(r)
}

fn cmd_detect(args: DetectArgs) -> Result<(), CliError> {
    let p = io::read_matrix(&args.matrix)?;
    let result = run_detect_method(&args, &p)?;
    let out = args.out.clone().unwrap_or_else(|| {
        let mut s = args.matrix.as_os_str().to_owned();
        s.push(".partition.csv");
        PathBuf::from(s)
    });
    io::write_partition(&result.partition, &out)?;
    let tau = match waiting_time(&p, &result.partition) {
        Ok(t) => t.to_string(),
        Err(Error::AbsorbingAggregate(_)) => "inf".to_string(),
        Err(e) => return Err(CliError::Runtime(e)),
    };
    println!(
        "{},{},{},{}",
        result.method.token(),
        result.partition.k(),
        result.delta,
        tau
    );
    if !result.converged {
        eprintln!("note: iteration cap reached before a fixed point; last iterate returned");
    }
    if let Some(steps) = args.simulate_tau {
        let sim = simulated_waiting_time(&p, &result.partition, steps, args.seed)?;
        println!("sim_tau,{sim}");
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let class = GeneratorClass::parse(&args.class).map_err(|e| usage(e.to_string()))?;
    let epsilon_grid = parse_eps_grid(&args.eps).map_err(|e| usage(e.to_string()))?;
    let methods = parse_methods(&args.methods, class).map_err(|e| usage(e.to_string()))?;
    if class == GeneratorClass::SparseMasked {
        let delta = args
            .delta
            .ok_or_else(|| usage("sparse class requires --delta"))?;
        if let Some(&top) = epsilon_grid.last() {
            if delta < top {
                return Err(usage(format!(
                    "delta {delta} must be at least the largest epsilon {top}"
                )));
            }
        }
    }
    let k_policy = if args.k_policy == "truth" {
        KPolicy::TruthM
    } else if let Some(k) = args.k_policy.strip_prefix("fixed:") {
        let k: usize = k
            .parse()
            .map_err(|_| usage(format!("bad k in --k-policy `{}`", args.k_policy)))?;
        KPolicy::Fixed(k)
    } else {
        return Err(usage(format!(
            "--k-policy must be `truth` or `fixed:<k>`, got `{}`",
            args.k_policy
        )));
    };
    let cfg = SweepConfig {
        class,
        n: args.n,
        m: args.m,
        epsilon_grid,
        delta: args.delta,
        trials: args.trials,
        methods,
        master_seed: args.seed,
        k_policy,
        record_timing: args.record_timing,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let records = run_sweep(&cfg)?;
    std::fs::write(&args.out, records_to_csv(&cfg, &records)).map_err(Error::from)?;
    print!("{}", summarize(&records));
    println!("wrote {} rows to {}", records.len(), args.out.display());
    Ok(())
}

fn q_csv_path(out: &Path) -> PathBuf {
    let mut s = out.to_path_buf();
    s.set_extension("q.csv");
    s
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let p = io::read_matrix(&args.matrix)?;
    let spectrum = markov::spectrum(&p)?;
    let mut csv = String::from("re,im\n");
    let pts: Vec<(f64, f64)> = spectrum
        .eigenvalues()
        .iter()
        .map(|e| (e.re, e.im))
        .collect();
    for (re, im) in &pts {
        csv.push_str(&format!("{re},{im}\n"));
    }
    std::fs::write(&args.out, csv).map_err(Error::from)?;

    let mut q_eigs: Option<Vec<f64>> = None;
    if let Some(s) = &args.lambda {
        let shifts = parse_lambda_list(s).map_err(|e| usage(e.to_string()))?;
        if shifts.len() != 1 {
            return Err(usage("spectrum takes exactly one λ"));
        }
        let q = build_invariance_matrix(&p, shifts[0]);
        let basis = self_adjoint_eigs(&q)?;
        let mut qcsv = String::from("index,mu\n");
        for (i, w) in basis.eigenvalues().iter().enumerate() {
            qcsv.push_str(&format!("{i},{w}\n"));
        }
        let qpath = q_csv_path(&args.out);
        std::fs::write(&qpath, qcsv).map_err(Error::from)?;
        println!("q eigenvalues written to {}", qpath.display());
        q_eigs = Some(basis.eigenvalues().to_vec());
    }
    if let Some(svg_path) = &args.svg {
        let svg = spectrum_svg(&pts, q_eigs.as_deref());
        std::fs::write(svg_path, svg).map_err(Error::from)?;
    }
    Ok(())
}
