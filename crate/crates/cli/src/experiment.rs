use std::fs;
use std::path::{Path, PathBuf};

use gmvi_core::io::{read_instance, write_instance, InstanceSpec};
use gmvi_core::problems::generate::{generate_box_simplex, generate_lad, generate_matrix_game, generate_policy_eval, GenParams};
use gmvi_core::{
    build_plan, run, run_baseline, Averaging, BaselineConfig, Error, EvalRecord, Family, Method, Mode, ProblemInstance,
    SamplingMode, SamplingPlan, SolverConfig, Trace,
};
use log::info;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, GeneratorParams, ProblemSource, Sampling, Solver};
use crate::output::{write_csv, write_summary, ConfigEcho, RunStatus, RunSummary, SeedRun};
use crate::CliError;

/// Library errors caused by the inputs rather than by the run.
fn core_err(e: Error) -> CliError {
    match e {
        Error::Io(e) => CliError::Io(e.to_string()),
        Error::InvalidArgument(_)
        | Error::Unsupported(_)
        | Error::Domain(_)
        | Error::ZeroWeight { .. }
        | Error::ComponentOutOfRange { .. }
        | Error::Parse { .. }
        | Error::NoStationaryDistribution(_)
        | Error::Singular(_) => CliError::Config(e.to_string()),
        other => CliError::Solver(other.to_string()),
    }
}

/// Errors that fail one seed without aborting the experiment.
fn is_seed_failure(e: &Error) -> bool {
    matches!(e, Error::Diverged { .. } | Error::StepSizeCertificate { .. } | Error::NonFinite(_))
}

pub fn instance_spec(g: &GeneratorParams) -> Result<InstanceSpec, CliError> {
    g.validate()?;
    let p = GenParams::new(g.n, g.d, g.exponent, g.seed).density(g.density);
    let spec = match g.family {
        Family::MatrixGame => InstanceSpec::MatrixGame(generate_matrix_game(&p, g.decomposition).map_err(core_err)?),
        Family::BoxSimplex => InstanceSpec::BoxSimplex(generate_box_simplex(&p).map_err(core_err)?),
        Family::Lad => InstanceSpec::Lad(generate_lad(&p).map_err(core_err)?),
        Family::PolicyEval => InstanceSpec::PolicyEval(
            generate_policy_eval(g.n, g.d, g.beta, g.mu, g.exponent, g.seed).map_err(core_err)?,
        ),
        Family::Custom => return Err(CliError::Config("custom instances cannot be generated".into())),
    };
    Ok(spec)
}

/// Writes a generated instance; returns the files written.
pub fn generate_instance(g: &GeneratorParams, path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = instance_spec(g)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_instance(&spec, path).map_err(core_err)
}

pub fn load_problem(source: &ProblemSource) -> Result<ProblemInstance, CliError> {
    let spec = match source {
        ProblemSource::Generated(g) => instance_spec(g)?,
        ProblemSource::File(path) => read_instance(path).map_err(core_err)?,
    };
    spec.build().map_err(core_err)
}

fn plan_for(inst: &ProblemInstance, sampling: Sampling) -> Result<SamplingPlan, CliError> {
    match sampling {
        Sampling::Problem => Ok(inst.plan.clone()),
        Sampling::Uniform => build_plan(&SamplingMode::Uniform, &inst.profile).map_err(core_err),
        Sampling::Importance => build_plan(&SamplingMode::Importance, &inst.profile).map_err(core_err),
    }
}

/// One seed of the configured solver.
pub fn run_seed(inst: &ProblemInstance, plan: &SamplingPlan, cfg: &ExperimentConfig, seed: u64) -> gmvi_core::Result<Trace> {
    let method = match cfg.solver {
        Solver::RemLazy | Solver::RemDense => {
            let mode = if cfg.solver == Solver::RemLazy { Mode::Lazy } else { Mode::Dense };
            let mut sc = SolverConfig::new(cfg.iterations, seed)
                .mode(mode)
                .stride(cfg.stride)
                .averaging(Averaging::SampledIndexSet);
            if let Some(g) = cfg.gamma {
                sc = sc.gamma(g);
            }
            return run(inst, plan, &sc);
        }
        Solver::MirrorProx => Method::MirrorProx,
        Solver::Popov => Method::Popov,
    };
    let mut bc = BaselineConfig::new(method, cfg.iterations).stride(cfg.stride);
    bc.seed = seed;
    if let Some(s) = cfg.step {
        bc = bc.step(s);
    }
    run_baseline(inst, &bc)
}

fn same_metrics(a: &EvalRecord, b: &EvalRecord) -> bool {
    a.iteration == b.iteration && a.metrics() == b.metrics()
}

fn echo(cfg: &ExperimentConfig) -> ConfigEcho {
    let (problem, gen) = match &cfg.problem {
        ProblemSource::Generated(g) => (g.family.name().to_string(), Some(g)),
        ProblemSource::File(p) => (p.display().to_string(), None),
    };
    ConfigEcho {
        problem,
        n: gen.map(|g| g.n),
        d: gen.map(|g| g.d),
        density: gen.map(|g| g.density),
        exponent: gen.map(|g| g.exponent),
        gen_seed: gen.map(|g| g.seed),
        sampling: cfg.sampling.name().into(),
        gamma: cfg.gamma,
        step: cfg.step,
        iterations: cfg.iterations,
        stride: cfg.stride,
        seeds: cfg.seeds.clone(),
    }
}

/// Runs every seed, writes `seed-<s>.csv` and `summary.json` into `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let inst = load_problem(&cfg.problem)?;
    let plan = plan_for(&inst, cfg.sampling)?;
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))?;

    let results: Vec<gmvi_core::Result<Trace>> = cfg.seeds.par_iter().map(|&s| run_seed(&inst, &plan, cfg, s)).collect();

    let mut runs = Vec::with_capacity(results.len());
    let mut first_ok: Option<(u64, Vec<EvalRecord>)> = None;
    for (&seed, result) in cfg.seeds.iter().zip(results) {
        match result {
            Ok(trace) => {
                let name = format!("seed-{seed}.csv");
                write_csv(&trace.records, &cfg.out.join(&name))?;
                let last = trace.records.last().map(|r| r.metrics()).unwrap_or_default();
                match &first_ok {
                    None => first_ok = Some((seed, trace.records.clone())),
                    Some((s0, base)) => {
                        let split = base.iter().zip(&trace.records).position(|(a, b)| !same_metrics(a, b));
                        match split {
                            Some(i) => info!("seeds {s0} and {seed} first differ at iteration {}", base[i].iteration),
                            None => info!("seeds {s0} and {seed} produced identical metrics"),
                        }
                    }
                }
                runs.push(SeedRun {
                    seed,
                    status: RunStatus::Ok,
                    reason: None,
                    csv: Some(name),
                    iterations: trace.iterations,
                    oracle_calls: trace.oracle_calls,
                    final_gap: last.gap,
                    final_sup_gap: last.sup_gap,
                    final_dist_sq: last.dist_sq,
                });
            }
            Err(e) if is_seed_failure(&e) => {
                log::warn!("seed {seed} failed: {e}");
                runs.push(SeedRun {
                    seed,
                    status: RunStatus::Diverged,
                    reason: Some(e.to_string()),
                    csv: None,
                    iterations: 0,
                    oracle_calls: 0,
                    final_gap: None,
                    final_sup_gap: None,
                    final_dist_sq: None,
                });
            }
            Err(e) => return Err(core_err(e)),
        }
    }
    let summary = RunSummary::new(cfg.solver.name(), inst.family.name(), inst.num_components(), inst.dim(), echo(cfg), runs)?;
    write_summary(&summary, &cfg.out.join("summary.json"))?;
    Ok(summary)
}
