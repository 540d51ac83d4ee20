use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ntcp_core::cv_ntcp::{
    dose_for_fraction, fraction_curve_features, fraction_scale, invert_fraction, ntcp_exact,
    ntcp_normal, ntcp_normal_integer_threshold, ntcp_weiss_tail, threshold_for_confidence,
};
use ntcp_core::dependent_clt::{EstimatorConfig, SampleSummary};
use ntcp_core::experiment_harness::{
    coverage_study, estimator_consistency, run_clt_experiment, write_report, ExperimentConfig,
};
use ntcp_core::lattice_fields::{
    model_mean, read_sample, sample_field, write_sample, FieldKind, FieldModel, LatticeCube,
    DEFAULT_LEVELS,
};
use ntcp_core::{CellPopulation, DoseResponseModel, Error, Result};

use crate::output::{Cell, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "ntcp", version, about = "Critical-volume NTCP and dependent-field CLT tools")]
pub struct Cli {
    /// Output format. Text and CSV print 9 significant digits; JSON keeps
    /// full precision.
    #[arg(long, value_enum, global = true, default_value = "text")]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// P(S_n >= L) for S_n ~ Bin(n, p), exact and approximate.
    Ntcp(NtcpArgs),
    /// Confidence threshold x_gamma, integer threshold and kill-fraction
    /// curve landmarks.
    Threshold(ThresholdArgs),
    /// Dose reaching a target kill fraction or FSU kill probability.
    Dose(DoseArgs),
    /// Draw a field sample and write it to a file.
    Simulate(SimulateArgs),
    /// Partial sum, variance estimate, intervals and NTCP estimates for a
    /// sample file.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo campaign from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Response {
    SingleHit,
    MultiTarget,
    Hybrid,
    Lq,
}

/// Dose-response model flags shared by `ntcp` and `dose`.
#[derive(Debug, Args)]
pub struct ResponseArgs {
    #[arg(long, value_enum, default_value = "single-hit")]
    pub response: Response,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Targets per cell for the multi-target and hybrid models.
    #[arg(long, default_value_t = 1)]
    pub targets: u32,
    /// Clonogenic cells per FSU.
    #[arg(long, default_value_t = 1)]
    pub n0: u32,
}

impl ResponseArgs {
    fn model(&self) -> Result<(DoseResponseModel, CellPopulation)> {
        let alpha = self
            .alpha
            .ok_or_else(|| Error::Parameter("--alpha is required with a dose".into()))?;
        let (beta, m) = (self.beta, self.targets);
        let model = match self.response {
            Response::SingleHit => DoseResponseModel::SingleHit { alpha },
            Response::MultiTarget => DoseResponseModel::MultiTarget { alpha, m },
            Response::Hybrid => DoseResponseModel::Hybrid { alpha, beta, m },
            Response::Lq => DoseResponseModel::LinearQuadratic { alpha, beta },
        };
        model.validate()?;
        Ok((model, CellPopulation::new(self.n0)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Normal,
    Weiss,
    All,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("prob").required(true).args(["p", "dose"])))]
pub struct NtcpArgs {
    /// Number of FSUs.
    #[arg(long)]
    pub n: u64,
    /// FSU kill probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Dose; p is then taken from the response model.
    #[arg(long)]
    pub dose: Option<f64>,
    /// Critical number of killed FSUs.
    #[arg(long = "L", alias = "threshold")]
    pub threshold: u64,
    #[arg(long, value_enum, default_value = "all")]
    pub method: MethodArg,
    #[command(flatten)]
    pub response: ResponseArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub p: f64,
    /// Confidence level gamma.
    #[arg(long)]
    pub gamma: f64,
    /// Also invert this kill fraction to the FSU kill probability.
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["kappa", "target_p"])))]
pub struct DoseArgs {
    /// Kill fraction to reach at confidence gamma.
    #[arg(long, requires_all = ["n", "gamma"])]
    pub kappa: Option<f64>,
    /// FSU kill probability to reach.
    #[arg(long)]
    pub target_p: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Absolute tolerance on p(D).
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    #[command(flatten)]
    pub response: ResponseArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Iid,
    Threshold,
    Levels,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Cube half-width.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "threshold")]
    pub kind: KindArg,
    /// Kill probability of the iid field.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub radius: u32,
    /// Noise hit probability of the window models.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 2)]
    pub k_min: u32,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Sample file written by `simulate`.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Fixed block radius; default is ceil(n^eta).
    #[arg(long, conflicts_with = "eta")]
    pub bandwidth: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Confidence levels for intervals on the mean.
    #[arg(long = "level", default_values_t = [0.95])]
    pub levels: Vec<f64>,
    /// Mean used for the NTCP estimates; defaults to the model mean in the
    /// file header.
    #[arg(long)]
    pub mean: Option<f64>,
    /// Thresholds x for P(S(U) >= x).
    #[arg(long = "x")]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Campaign {
    Clt,
    Consistency,
    Coverage,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, short)]
    pub config: PathBuf,
    /// Report CSV for the `clt` campaign; a `.meta.json` sidecar is written
    /// next to it.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "clt")]
    pub campaign: Campaign,
}

pub fn run(cli: &Cli) -> Result<String> {
    let tables = match &cli.command {
        Command::Ntcp(a) => vec![ntcp(a)?],
        Command::Threshold(a) => vec![threshold(a)?],
        Command::Dose(a) => vec![dose(a)?],
        Command::Simulate(a) => vec![simulate(a)?],
        Command::Estimate(a) => estimate(a)?,
        Command::Experiment(a) => vec![experiment(a)?],
    };
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 && cli.format == Format::Text {
            out.push('\n');
        }
        out.push_str(&t.render(cli.format));
    }
    Ok(out)
}

fn ntcp(a: &NtcpArgs) -> Result<Table> {
    let p = match (a.p, a.dose) {
        (Some(p), _) => p,
        (None, Some(d)) => {
            let (model, cells) = a.response.model()?;
            model.fsu_kill_probability(cells, d)?
        }
        (None, None) => unreachable!("clap requires one of --p, --dose"),
    };
    let (n, l) = (a.n, a.threshold);
    let mut t = Table::new(&["method", "n", "p", "L", "value", "error_bound"]);
    let all = a.method == MethodArg::All;
    if all || a.method == MethodArg::Exact {
        t.push(vec!["exact".into(), n.into(), p.into(), l.into(), ntcp_exact(n, p, l)?.into(), 0.0.into()]);
    }
    // the approximations need a nondegenerate law; `all` skips them quietly
    if all || a.method == MethodArg::Normal {
        match ntcp_normal(n, p, l as f64) {
            Ok(r) => t.push(vec!["normal".into(), n.into(), p.into(), l.into(), r.value.into(), r.error_bound.into()]),
            Err(e) if !all => return Err(e),
            Err(_) => {}
        }
    }
    if all || a.method == MethodArg::Weiss {
        match ntcp_weiss_tail(n, p, l) {
            Ok(r) => t.push(vec!["weiss".into(), n.into(), p.into(), l.into(), r.value.into(), r.error_bound.into()]),
            Err(e) if !all => return Err(e),
            Err(_) => {}
        }
    }
    Ok(t)
}

fn threshold(a: &ThresholdArgs) -> Result<Table> {
    let x = threshold_for_confidence(a.n, a.p, a.gamma)?;
    let (l, approx) = ntcp_normal_integer_threshold(a.n, a.p, a.gamma)?;
    let mut pairs: Vec<(&'static str, Cell)> = vec![
        ("x_gamma", x.into()),
        ("L_gamma", l.into()),
        ("ntcp_at_L", approx.value.into()),
        ("ntcp_at_L_bound", approx.error_bound.into()),
    ];
    if a.gamma >= 0.5 {
        let c = fraction_scale(a.n, a.gamma)?;
        let f = fraction_curve_features(c)?;
        pairs.extend([
            ("c", c.into()),
            ("p1", f.p1.into()),
            ("p_star", f.p_star.into()),
            ("kappa_star", f.kappa_star.into()),
        ]);
        if let Some(kappa) = a.kappa {
            pairs.push(("p_bar", invert_fraction(kappa, c)?.into()));
        }
    } else if a.kappa.is_some() {
        return Err(Error::Domain("kill-fraction inversion needs gamma >= 0.5".into()));
    }
    Ok(Table::record(pairs))
}

fn dose(a: &DoseArgs) -> Result<Table> {
    let (model, cells) = a.response.model()?;
    let mut pairs: Vec<(&'static str, Cell)> = Vec::new();
    let d = if let Some(kappa) = a.kappa {
        let (n, gamma) = (a.n.expect("clap requires --n"), a.gamma.expect("clap requires --gamma"));
        let p_bar = invert_fraction(kappa, fraction_scale(n, gamma)?)?;
        pairs.push(("p_bar", p_bar.into()));
        dose_for_fraction(&model, cells, kappa, n, gamma, a.tolerance)?
    } else {
        let p = a.target_p.expect("clap requires a target");
        pairs.push(("p_bar", p.into()));
        model.dose_for_kill_probability(cells, p, a.tolerance)?
    };
    pairs.push(("dose", d.into()));
    pairs.push(("p_at_dose", model.fsu_kill_probability(cells, d)?.into()));
    Ok(Table::record(pairs))
}

fn simulate(a: &SimulateArgs) -> Result<Table> {
    let kind = match a.kind {
        KindArg::Iid => FieldKind::IidBernoulli { p: a.p },
        KindArg::Threshold => FieldKind::MovingWindowThreshold {
            radius: a.radius,
            theta: a.theta,
            k_min: a.k_min,
        },
        KindArg::Levels => FieldKind::MovingWindowLevels {
            radius: a.radius,
            theta: a.theta,
            levels: a.levels,
        },
    };
    let model = FieldModel::new(a.dim, kind)?;
    let cube = LatticeCube::new(a.dim, a.n)?;
    let sample = sample_field(&model, cube, a.seed)?;
    write_sample(&a.out, &sample)?;
    let sum: f64 = sample.values.iter().sum();
    Ok(Table::record(vec![
        ("path", a.out.display().to_string().into()),
        ("d", a.dim.into()),
        ("n", a.n.into()),
        ("sites", sample.len().into()),
        ("seed", a.seed.into()),
        ("sum", sum.into()),
        ("mean", (sum / sample.len() as f64).into()),
    ]))
}

fn estimate(a: &EstimateArgs) -> Result<Vec<Table>> {
    let sample = read_sample(&a.input)?;
    let config = match (a.bandwidth, a.eta) {
        (Some(b), _) => EstimatorConfig::fixed(b),
        (None, Some(eta)) => EstimatorConfig::schedule(eta),
        (None, None) => EstimatorConfig::default(),
    };
    let summary = SampleSummary::new(&sample, &config)?;
    let size = summary.cube_size as f64;
    let mut tables = vec![Table::record(vec![
        ("n", sample.cube.n.into()),
        ("sites", summary.cube_size.into()),
        ("sum", summary.sum.into()),
        ("mean", (summary.sum / size).into()),
        ("bandwidth", summary.bandwidth.into()),
        ("chat", summary.chat.into()),
    ])];
    if !a.levels.is_empty() {
        let mut t = Table::new(&["level", "lo", "hi"]);
        for &level in &a.levels {
            let ci = summary.interval(level)?;
            t.push(vec![level.into(), ci.lo.into(), ci.hi.into()]);
        }
        tables.push(t);
    }
    if !a.thresholds.is_empty() {
        let mean = match a.mean {
            Some(m) => m,
            None => model_mean(&sample.model)?,
        };
        let mut t = Table::new(&["x", "mean", "ntcp"]);
        for &x in &a.thresholds {
            t.push(vec![x.into(), mean.into(), summary.ntcp(x, mean)?.into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn experiment(a: &ExperimentArgs) -> Result<Table> {
    let config = ExperimentConfig::load(&a.config)?;
    match a.campaign {
        Campaign::Clt => {
            let report = run_clt_experiment(&config)?;
            if let Some(out) = &a.out {
                write_report(&report, out)?;
            }
            let mut t = Table::new(&[
                "n", "cube_size", "mode", "ks", "chat_mean", "chat_sd", "sigma2", "level", "coverage",
            ]);
            for r in &report.rows {
                t.push(vec![
                    r.n.into(),
                    r.cube_size.into(),
                    r.mode.as_str().into(),
                    r.ks.into(),
                    r.chat_mean.into(),
                    r.chat_sd.into(),
                    r.sigma2.into(),
                    r.level.into(),
                    r.coverage.into(),
                ]);
            }
            Ok(t)
        }
        Campaign::Consistency => {
            let r = estimator_consistency(&config)?;
            let mut t = Table::new(&["n", "bandwidth", "chat_mean", "chat_sd", "median_abs_dev", "sigma2"]);
            for row in &r.rows {
                t.push(vec![
                    row.n.into(),
                    row.bandwidth.into(),
                    row.chat_mean.into(),
                    row.chat_sd.into(),
                    row.median_abs_dev.into(),
                    r.sigma2.into(),
                ]);
            }
            Ok(t)
        }
        Campaign::Coverage => {
            let mut t = Table::new(&["n", "level", "coverage", "replicates"]);
            for row in coverage_study(&config)? {
                t.push(vec![row.n.into(), row.level.into(), row.coverage.into(), row.replicates.into()]);
            }
            Ok(t)
        }
    }
}
