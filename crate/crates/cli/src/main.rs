use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmvi_cli::config::{parse_family, read_settings, Settings};
use gmvi_cli::{generate_instance, run_experiment, CliError, ExperimentConfig, GeneratorParams, EXIT_PARTIAL_FAILURE};

#[derive(Parser)]
#[command(name = "gmvi", version, about = "Finite-sum variational inequality experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver over one or more seeds.
    Run(RunArgs),
    /// Write a random instance to disk.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Family name or instance file.
    #[arg(long)]
    problem: Option<String>,
    /// rem-lazy, rem-dense, mirror-prox or popov.
    #[arg(long)]
    solver: Option<String>,
    /// uniform, importance or problem.
    #[arg(long)]
    sampling: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Baseline step size.
    #[arg(long)]
    step: Option<String>,
    /// Comma-separated.
    #[arg(long)]
    seeds: Option<String>,
    /// Metrics every S iterations; 0 uses the solver default.
    #[arg(long)]
    stride: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[command(flatten)]
    size: SizeArgs,
    /// Generator seed for family problems.
    #[arg(long)]
    gen_seed: Option<String>,
}

#[derive(Args)]
struct SizeArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    exponent: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// two-sided or row-sided.
    #[arg(long)]
    decomposition: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: String,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long)]
    seed: Option<String>,
    /// Sidecar path; matrices are written next to it.
    #[arg(long)]
    out: PathBuf,
}

fn overlay<'a>(s: &mut Settings, pairs: impl IntoIterator<Item = (&'a str, Option<String>)>) {
    for (k, v) in pairs {
        if let Some(v) = v {
            s.insert(k.to_string(), v);
        }
    }
}

impl SizeArgs {
    fn into_pairs(self) -> [(&'static str, Option<String>); 7] {
        [
            ("n", self.n),
            ("d", self.d),
            ("density", self.density),
            ("exponent", self.exponent),
            ("beta", self.beta),
            ("mu", self.mu),
            ("decomposition", self.decomposition),
        ]
    }
}

fn run(args: RunArgs) -> Result<i32, CliError> {
    let mut s = match &args.config {
        Some(path) => read_settings(path)?,
        None => Settings::new(),
    };
    overlay(&mut s, args.size.into_pairs());
    overlay(
        &mut s,
        [
            ("problem", args.problem),
            ("solver", args.solver),
            ("sampling", args.sampling),
            ("iters", args.iters),
            ("gamma", args.gamma),
            ("step", args.step),
            ("seeds", args.seeds),
            ("stride", args.stride),
            ("out", args.out),
            ("gen-seed", args.gen_seed),
        ],
    );
    let cfg = ExperimentConfig::from_settings(&s)?;
    let summary = run_experiment(&cfg)?;
    if summary.partial_failure {
        eprintln!("partial-failure: seeds {:?} failed", summary.failed_seeds);
        return Ok(EXIT_PARTIAL_FAILURE);
    }
    Ok(0)
}

fn generate(args: GenerateArgs) -> Result<i32, CliError> {
    let family = parse_family(&args.family)?;
    let mut s = Settings::new();
    overlay(&mut s, args.size.into_pairs());
    if let Some(seed) = args.seed {
        s.insert("seed".into(), seed);
    }
    let g = GeneratorParams::from_settings(family, &s, "seed")?;
    for path in generate_instance(&g, &args.out)? {
        println!("{}", path.display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            eprintln!("error: invalid-config: {first}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
