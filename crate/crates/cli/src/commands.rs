use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use contraction_core::certify::{Check, Condition, Sampling, DEFAULT_SAMPLES, DEFAULT_T_PROBE};
use contraction_core::integrate::{
    find_equilibrium_with, integrate_rk4, verify_coppel_envelope, verify_fieldnorm_decay, verify_pairwise_decay,
    verify_partial_decay, verify_semi_decay, EquilibriumOptions, Window, DEFAULT_SLACK,
};
use contraction_core::linalg::{matrix_measure, operator_norm, DenseMatrix, NormKind, SurjectiveMap};
use contraction_core::rdpde::{
    check_rd_hypotheses, figure1_scenario, run_rd_experiment, stability_limit, RdExperimentOptions, FIGURE1_N_POINTS,
    FIGURE1_T_END,
};
use contraction_core::system::{builtin_system, CatalogSystem, LtvSystem, RateFunction, VectorFieldModel};

use crate::config::{
    finite_vector, load_config, nonnegative, positive, read_json, required, usage, CertifyConfig, CliError, CliResult,
    RdDemoConfig, SimulateConfig, VerifyConfig, VerifyKind,
};

/// Whether a completed command met its criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormFlag {
    One,
    Two,
    Inf,
}

impl NormFlag {
    fn kind(self) -> NormKind<f64> {
        match self {
            NormFlag::One => NormKind::One,
            NormFlag::Two => NormKind::Two,
            NormFlag::Inf => NormKind::Inf,
        }
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}

fn json_text<S: serde::Serialize>(value: &S) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Usage(format!("cannot serialize output: {e}")))
}

fn note(msg: &str) {
    let _ = writeln!(io::stderr(), "{msg}");
}

fn catalog(name: &str, matrix: Option<DenseMatrix<f64>>) -> CliResult<CatalogSystem<f64>> {
    Ok(builtin_system(name, matrix)?)
}

fn model(name: &str, matrix: Option<DenseMatrix<f64>>) -> CliResult<VectorFieldModel<f64>> {
    catalog(name, matrix).map(CatalogSystem::into_model)
}

fn surjective(map: Option<DenseMatrix<f64>>) -> CliResult<SurjectiveMap<f64>> {
    match map {
        Some(t) => Ok(SurjectiveMap::new(t)?),
        None => usage("this check needs a \"map\" matrix in the config"),
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// JSON file holding the matrix as an array of rows.
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value = "two", conflicts_with = "weight")]
    pub norm: NormFlag,
    /// JSON file with a symmetric positive definite weight P; selects the
    /// weighted 2-norm `‖P^{1/2}x‖`.
    #[arg(long)]
    pub weight: Option<PathBuf>,
}

pub fn measure(args: &MeasureArgs) -> CliResult<Outcome> {
    let a: DenseMatrix<f64> = read_json(&args.matrix)?;
    let norm = match &args.weight {
        Some(path) => NormKind::weighted_two(read_json(path)?)?,
        None => args.norm.kind(),
    };
    let mu = matrix_measure(&a, &norm)?;
    let mu_neg = matrix_measure(&a.scale(-1.0), &norm)?;
    let op = operator_norm(&a, &norm)?;
    let eps = 1e-12 * (1.0 + op);
    let holds = -op <= -mu_neg + eps && -mu_neg <= mu + eps && mu <= op + eps;
    let text = format!(
        "norm = {}\nmu = {mu}\nmu(-A) = {mu_neg}\nop_norm = {op}\nsandwich -op_norm <= -mu(-A) <= mu <= op_norm: {}\n",
        norm.label(),
        if holds { "holds" } else { "violated" }
    );
    write_out(None, text.as_bytes())?;
    Ok(Outcome::from_pass(holds))
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// operator_measure, integral_contractivity, integral_partial,
    /// integral_semi, semi_measure_bound, kernel_invariance or rd_hypotheses.
    #[arg(long, value_parser = parse_condition)]
    pub condition: Option<Condition>,
    #[arg(long)]
    pub system: Option<String>,
    /// Constant rate c; tabulated rates go in the config.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, value_enum)]
    pub norm: Option<NormFlag>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_probe: Option<f64>,
    /// Grid size for rd_hypotheses.
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_condition(s: &str) -> Result<Condition, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown condition {s:?}"))
}

fn constant_rate(flag: Option<f64>) -> CliResult<Option<RateFunction<f64>>> {
    flag.map(|c| RateFunction::constant(c).map_err(CliError::from)).transpose()
}

pub fn certify(args: &CertifyArgs) -> CliResult<Outcome> {
    let cfg: CertifyConfig = load_config(args.config.as_deref())?;
    let condition = required(args.condition, cfg.condition, "condition")?;
    let samples = args.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let t_probe = nonnegative(args.t_probe.or(cfg.t_probe).unwrap_or(DEFAULT_T_PROBE), "t_probe")?;
    let sampling = Sampling::new(samples, seed).with_t_probe(t_probe);
    let output = args.output.clone().or(cfg.output);

    let (text, pass) = if condition == Condition::RdHypotheses {
        if let Some(name) = args.system.as_deref().or(cfg.system.as_deref()) {
            if name != "figure1" {
                return usage(format!("rd_hypotheses only knows the scenario \"figure1\", got {name:?}"));
            }
        }
        let n_points = args.n_points.or(cfg.n_points).unwrap_or(FIGURE1_N_POINTS);
        let scenario = figure1_scenario::<f64>(n_points)?;
        let rd = check_rd_hypotheses(&scenario, &sampling)?;
        (json_text(&rd)?, rd.certificate.is_certified())
    } else {
        let name = required(args.system.clone(), cfg.system, "system")?;
        let model = model(&name, cfg.matrix)?;
        let norm = args.norm.map(NormFlag::kind).or(cfg.norm).unwrap_or(NormKind::Two);
        let rate = constant_rate(args.rate)?.or(cfg.rate);
        let needs_rate = condition != Condition::KernelInvariance;
        let rate = match (needs_rate, rate) {
            (true, None) => return usage("missing required setting \"rate\" (flag or config key)"),
            (_, r) => r,
        };
        let map = match condition {
            Condition::IntegralPartial
            | Condition::IntegralSemi
            | Condition::SemiMeasureBound
            | Condition::KernelInvariance => Some(surjective(cfg.map)?),
            _ => None,
        };
        let (model, norm) = (&model, &norm);
        let check = match (condition, rate.as_ref(), map.as_ref()) {
            (Condition::OperatorMeasure, Some(rate), _) => Check::OperatorMeasure { model, rate, norm },
            (Condition::IntegralContractivity, Some(rate), _) => Check::IntegralContractivity { model, rate, norm },
            (Condition::IntegralPartial, Some(rate), Some(map)) => Check::IntegralPartial { model, map, rate, norm },
            (Condition::IntegralSemi, Some(rate), Some(map)) => Check::IntegralSemi { model, map, rate, norm },
            (Condition::SemiMeasureBound, Some(rate), Some(map)) => Check::SemiMeasureBound { model, map, rate, norm },
            (Condition::KernelInvariance, _, Some(map)) => Check::KernelInvariance { model, map },
            _ => return usage(format!("incomplete settings for {condition:?}")),
        };
        let cert = check.run(&sampling)?;
        if !cert.is_certified() {
            if let Some(w) = &cert.witness {
                let y = w.y.as_ref().map_or_else(String::new, |y| format!(", y = {y:?}"));
                note(&format!("falsified: worst margin {} at t = {}, x = {:?}{y}", cert.worst_margin, w.t, w.x));
            }
        }
        (json_text(&cert)?, cert.is_certified())
    };
    write_out(output.as_deref(), text.as_bytes())?;
    Ok(Outcome::from_pass(pass))
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub check: Option<VerifyKind>,
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, value_enum)]
    pub norm: Option<NormFlag>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub slack: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

const DEFAULT_VERIFY_T_END: f64 = 10.0;
const DEFAULT_DT: f64 = 1e-3;

pub fn verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let cfg: VerifyConfig = load_config(args.config.as_deref())?;
    let kind = required(args.check, cfg.check, "check")?;
    let name = required(args.system.clone(), cfg.system, "system")?;
    let norm = args.norm.map(NormFlag::kind).or(cfg.norm).unwrap_or(NormKind::Two);
    let rate = constant_rate(args.rate)?.or(cfg.rate);
    let output = args.output.clone().or(cfg.output);
    let x0 = finite_vector(required(None, cfg.x0, "x0")?, "x0")?;

    if kind == VerifyKind::Equilibrium {
        let model = model(&name, cfg.matrix)?;
        let c = match rate.as_ref().map(RateFunction::as_constant) {
            Some(Some(c)) => c,
            Some(None) => return usage("equilibrium needs a constant rate"),
            None => return usage("missing required setting \"rate\" (flag or config key)"),
        };
        let tol = positive(args.tol.or(cfg.tol).unwrap_or(1e-9), "tol")?;
        let defaults = EquilibriumOptions::<f64>::default();
        let opts = EquilibriumOptions {
            tau: positive(cfg.tau.unwrap_or(defaults.tau), "tau")?,
            dt: positive(args.dt.or(cfg.dt).unwrap_or(defaults.dt), "dt")?,
            max_iters: cfg.max_iters.unwrap_or(defaults.max_iters),
        };
        let eq = find_equilibrium_with(&model, &x0, c, &norm, tol, &opts)?;
        write_out(output.as_deref(), json_text(&eq)?.as_bytes())?;
        return Ok(Outcome::Pass);
    }

    let t0 = args.t0.or(cfg.t0).unwrap_or(0.0);
    let t_end = args.t_end.or(cfg.t_end).unwrap_or(DEFAULT_VERIFY_T_END);
    let dt = positive(args.dt.or(cfg.dt).unwrap_or(DEFAULT_DT), "dt")?;
    let slack = nonnegative(args.slack.or(cfg.slack).unwrap_or(DEFAULT_SLACK), "slack")?;
    let window = Window::new(t0, t_end, dt).with_slack(slack);
    let need_rate = || match rate.as_ref() {
        Some(r) => Ok(r),
        None => usage("missing required setting \"rate\" (flag or config key)"),
    };
    let need_y0 = || finite_vector(required(None, cfg.y0.clone(), "y0")?, "y0");

    let (text, pass) = match kind {
        VerifyKind::Coppel => {
            let ltv = match catalog(&name, cfg.matrix)? {
                CatalogSystem::Ltv(l) => l,
                CatalogSystem::Field(m) => match m.as_linear() {
                    Some(a) => {
                        let a = a.clone();
                        LtvSystem::new(m.name().to_string(), m.sample_box().clone(), move |_| a.clone())
                    }
                    None => return usage(format!("coppel needs a linear system, {name:?} is not")),
                },
            };
            let r = verify_coppel_envelope(&ltv, &x0, &norm, &window)?;
            (json_text(&r)?, r.pass())
        }
        other => {
            let model = model(&name, cfg.matrix)?;
            let r = match other {
                VerifyKind::Pairwise => verify_pairwise_decay(&model, &x0, &need_y0()?, need_rate()?, &norm, &window)?,
                VerifyKind::Semi => {
                    let map = surjective(cfg.map)?;
                    verify_semi_decay(&model, &map, &x0, &need_y0()?, need_rate()?, &norm, &window)?
                }
                VerifyKind::Partial => {
                    let map = surjective(cfg.map)?;
                    verify_partial_decay(&model, &map, &x0, need_rate()?, &norm, &window)?
                }
                _ => verify_fieldnorm_decay(&model, &x0, need_rate()?, &norm, &window)?,
            };
            (json_text(&r)?, r.pass)
        }
    };
    write_out(output.as_deref(), text.as_bytes())?;
    Ok(Outcome::from_pass(pass))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<String>,
    /// Initial state as comma-separated numbers.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// CSV destination; stdout without it.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Outcome> {
    let cfg: SimulateConfig = load_config(args.config.as_deref())?;
    let name = required(args.system.clone(), cfg.system, "system")?;
    let x0 = finite_vector(required(args.x0.clone(), cfg.x0, "x0")?, "x0")?;
    let t0 = args.t0.or(cfg.t0).unwrap_or(0.0);
    let t_end = required(args.t_end, cfg.t_end, "t_end")?;
    let dt = positive(args.dt.or(cfg.dt).unwrap_or(DEFAULT_DT), "dt")?;
    let model = model(&name, cfg.matrix)?;
    let traj = integrate_rk4(&model, &x0, t0, t_end, dt)?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    write_out(args.output.clone().or(cfg.output).as_deref(), &buf)?;
    Ok(Outcome::Pass)
}

#[derive(Debug, Args)]
pub struct RdDemoArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid points on [0, 1].
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Time step; defaults to the explicit stability limit.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub slack: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn rd_demo(args: &RdDemoArgs) -> CliResult<Outcome> {
    let cfg: RdDemoConfig = load_config(args.config.as_deref())?;
    let n_points = args.n_points.or(cfg.n_points).unwrap_or(FIGURE1_N_POINTS);
    let t_end = nonnegative(args.t_end.or(cfg.t_end).unwrap_or(FIGURE1_T_END), "t_end")?;
    let out_dir = args.out_dir.clone().or(cfg.out_dir).unwrap_or_else(|| PathBuf::from("rd-demo-out"));
    let scenario = figure1_scenario::<f64>(n_points)?;
    let dt = match args.dt.or(cfg.dt) {
        Some(dt) => {
            let dt = positive(dt, "dt")?;
            let limit = stability_limit(&scenario)?;
            if dt > limit * (1.0 + 1e-9) {
                return usage(format!("dt = {dt} exceeds the explicit stability limit {limit}"));
            }
            Some(dt)
        }
        None => None,
    };
    let defaults = RdExperimentOptions::<f64>::default();
    let opts = RdExperimentOptions {
        dt,
        t_end,
        slack: nonnegative(args.slack.or(cfg.slack).unwrap_or(defaults.slack), "slack")?,
        snapshot_times: defaults.snapshot_times.iter().copied().filter(|&t| t <= t_end).collect(),
        sampling: Sampling::new(
            args.samples.or(cfg.samples).unwrap_or(defaults.sampling.samples),
            args.seed.or(cfg.seed).unwrap_or(defaults.sampling.seed),
        ),
        ..defaults
    };
    let run = run_rd_experiment(&scenario, &opts)?;

    let mut decay = Vec::new();
    run.write_decay_csv(&mut decay)?;
    let mut snapshots = Vec::new();
    run.write_snapshots_csv(&mut snapshots)?;
    let certificate = json_text(&run.hypotheses)?;
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    write_out(Some(&out_dir.join("decay.csv")), &decay)?;
    write_out(Some(&out_dir.join("snapshots.csv")), &snapshots)?;
    write_out(Some(&out_dir.join("certificate.json")), certificate.as_bytes())?;

    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
    let summary = format!(
        "verdict = {}\nc = {}\ndecay_rate = {}\ndt = {}\nsteps = {}\nmax_violation = {}\nlog_slope = {}\npass = {}\n",
        if run.hypotheses.certificate.is_certified() { "certified" } else { "falsified" },
        fmt_opt(run.hypotheses.c),
        fmt_opt(run.hypotheses.decay_rate),
        run.dt,
        run.steps,
        run.distance.max_violation,
        fmt_opt(run.log_slope),
        run.pass()
    );
    write_out(None, summary.as_bytes())?;
    Ok(Outcome::from_pass(run.pass()))
}
