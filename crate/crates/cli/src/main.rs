mod render;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noiseless_core::adversary::{
    delta_adversarial_plan, dependent_bound_compromised, independent_bound_compromised, plan_for,
    CompromisePlan,
};
use noiseless_core::binomial::{binomial_delta_given_eps, binomial_eps_given_delta, BinomialCase};
use noiseless_core::config::{ingest_config, Config};
use noiseless_core::curves::{emit_curve, CurveParams, Figure};
use noiseless_core::dependent::{dependent_bound, DependentAggregate};
use noiseless_core::independent::{independent_bound, IndependentAggregate};
use noiseless_core::numfmt::sig12;
use noiseless_core::oracle::mc::mc_estimate_delta;
use noiseless_core::oracle::{adjacent_pmfs, AdjacencyCase, OracleConfig};
use noiseless_core::plan::{plan, CompromiseSummary, PlanInput, Target};
use noiseless_core::{
    AdversaryModel, BerryEsseenConstant, BoundConstants, DataVectorSpec, Diagnostic,
    DistributionSpec, Error, Family, PrivacyBound, SteinConstant,
};
use render::{render, Format};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "noiseless",
    version,
    about = "(ε, δ) noiseless-privacy bounds for sums of random data"
)]
struct Cli {
    /// TOML description of the data vector and adversary.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Doubled Berry–Esseen constant in the independent bound.
    #[arg(long = "be-constant", global = true, default_value = "1.12", value_parser = ["1.12", "1.1182"])]
    be_constant: String,
    /// Constant K under the square root in the dependent bound.
    #[arg(long = "stein-k", global = true, default_value = "28", value_parser = ["26", "28"])]
    stein_k: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-group central moments and the aggregates the bounds use.
    Moments(MomentsArgs),
    /// Evaluate one bound.
    Bound(BoundArgs),
    /// Choose a privacy route and, if needed, a noise level.
    Plan(PlanArgs),
    /// Compare a bound's δ with the δ measured by the oracle.
    Verify(VerifyArgs),
    /// Emit the CSV series behind a figure.
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Model {
    Binomial,
    Independent,
    Dependent,
}

#[derive(Args)]
struct MomentsArgs {
    /// CSV of raw observations; the record law is fitted from one column.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Column name, or zero-based column index.
    #[arg(long, default_value = "0")]
    column: String,
    #[arg(long)]
    no_header: bool,
    /// Number of records the fitted law stands for.
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Args, Default)]
struct AdversaryArgs {
    /// Fraction of records whose values the adversary knows.
    #[arg(long)]
    gamma: Option<f64>,
    /// Explicit compromised indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    compromised: Option<Vec<u64>>,
    /// Var of the uncompromised sum (dependent data with γ > 0).
    #[arg(long)]
    remaining_total_variance: Option<f64>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    /// Binomial model: compute δ at this ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Binomial model: compute ε at this δ.
    #[arg(long)]
    delta: Option<f64>,
    /// (Σ Var Xᵢ)/n for the independent model.
    #[arg(long)]
    mean_variance: Option<f64>,
    /// Var(Σ Xᵢ) for the dependent model.
    #[arg(long)]
    total_variance: Option<f64>,
    #[arg(long)]
    sum_abs_third: Option<f64>,
    #[arg(long)]
    sum_fourth: Option<f64>,
    #[arg(long)]
    sensitivity: Option<f64>,
    #[arg(long)]
    dependency_bound: Option<u64>,
    #[command(flatten)]
    adversary: AdversaryArgs,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    target_epsilon: Option<f64>,
    #[arg(long)]
    target_delta: Option<f64>,
    /// Make no distributional assumptions (standard DP).
    #[arg(long)]
    no_assumptions: bool,
    #[arg(long)]
    sensitivity: Option<f64>,
    #[command(flatten)]
    adversary: AdversaryArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// ε at which δ is measured; defaults to the bound's own ε.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Exact convolution oracle (default).
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Monte Carlo estimate instead of the exact oracle.
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

#[derive(Args)]
struct CurvesArgs {
    /// One of 1, 2, 3, 4, 6.
    #[arg(long)]
    figure: u32,
    #[arg(long)]
    n_min: Option<u64>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    points: Option<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Error plus the process exit code it maps to.
struct Fail {
    err: Error,
    code: u8,
}

const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_COMPUTE: u8 = 5;
const EXIT_USAGE: u8 = 64;

impl From<Error> for Fail {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::ConfigParse(_) => 2,
            Error::ConfigSchema(_) => 3,
            Error::Invariant { .. } | Error::InsufficientMoments { .. } => 4,
            _ => EXIT_COMPUTE,
        };
        Fail { err, code }
    }
}

type Outcome = Result<(String, u8), Fail>;

fn invariant(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Invariant {
        path: path.into(),
        reason: reason.into(),
    }
}

fn missing(flag: &str, why: &str) -> Error {
    invariant(flag, format!("required {why}"))
}

struct Ctx {
    config: Option<Config>,
    format: Format,
    constants: BoundConstants,
    seed: u64,
}

impl Ctx {
    fn config(&self, why: &str) -> Result<&Config, Error> {
        self.config.as_ref().ok_or_else(|| missing("--config", why))
    }
}

fn load(cli: &Cli) -> Result<Ctx, Fail> {
    let config = match &cli.config {
        Some(path) => Some(ingest_config(path).map_err(|e| {
            let mut f = Fail::from(e);
            if f.code == EXIT_COMPUTE {
                f.code = 4;
            }
            f
        })?),
        None => None,
    };
    let constants = BoundConstants {
        berry_esseen: if cli.be_constant == "1.1182" {
            BerryEsseenConstant::Tight
        } else {
            BerryEsseenConstant::Rounded
        },
        stein: if cli.stein_k == "26" {
            SteinConstant::K26
        } else {
            SteinConstant::K28
        },
    };
    Ok(Ctx {
        config,
        format: cli.format,
        constants,
        seed: cli.seed,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = load(&cli).and_then(|ctx| match &cli.command {
        Command::Moments(a) => moments(&ctx, a),
        Command::Bound(a) => bound(&ctx, a),
        Command::Plan(a) => plan_cmd(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Curves(a) => curves(a),
    });
    match result {
        Ok((out, code)) => {
            print!("{out}");
            let _ = std::io::stdout().flush();
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.err);
            ExitCode::from(f.code)
        }
    }
}

#[derive(Serialize)]
struct GroupMoments {
    group: usize,
    family: &'static str,
    count: u64,
    fitted: bool,
    mean: f64,
    variance: f64,
    abs_third: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fourth: Option<f64>,
}

#[derive(Serialize)]
struct MomentsReport {
    n: u64,
    sensitivity: f64,
    dependency_bound: u64,
    total_variance: f64,
    sum_abs_third: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sum_fourth: Option<f64>,
    groups: Vec<GroupMoments>,
    diagnostics: Vec<Diagnostic>,
}

fn read_column(args: &MomentsArgs, path: &PathBuf) -> Result<Vec<f64>, Error> {
    let bad = |reason: String| invariant(path.display().to_string(), reason);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(!args.no_header)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let col = if args.no_header {
        None
    } else {
        let headers = rdr.headers().map_err(|e| bad(e.to_string()))?;
        headers.iter().position(|h| h == args.column)
    };
    let col = match col {
        Some(c) => c,
        None => args
            .column
            .parse::<usize>()
            .map_err(|_| bad(format!("no column named `{}`", args.column)))?,
    };
    let mut data = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let cell = rec
            .get(col)
            .ok_or_else(|| bad(format!("row {row} has no column {col}")))?;
        let v = cell
            .trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("row {row}: `{cell}` is not a number")))?;
        data.push(v);
    }
    Ok(data)
}

fn moments(ctx: &Ctx, args: &MomentsArgs) -> Outcome {
    let spec = match &args.data {
        Some(path) => {
            let data = read_column(args, path)?;
            let rec = DistributionSpec::fit_empirical(&data, args.count)?;
            DataVectorSpec::builder(vec![rec]).build()?
        }
        None => ctx.config("for moments without --data")?.spec.clone(),
    };
    let groups = spec
        .records()
        .iter()
        .enumerate()
        .map(|(g, r)| {
            let m = r.moments();
            GroupMoments {
                group: g,
                family: r.family().name(),
                count: r.count(),
                fitted: r.is_fitted(),
                mean: m.mean,
                variance: m.variance,
                abs_third: m.abs_third_central,
                fourth: m.fourth_central,
            }
        })
        .collect();
    let diagnostics: Vec<Diagnostic> = spec
        .fitted_groups()
        .into_iter()
        .map(|group| Diagnostic::FittedDistribution { group })
        .collect();
    let report = MomentsReport {
        n: spec.n(),
        sensitivity: spec.sensitivity(),
        dependency_bound: spec.dependency_bound(),
        total_variance: spec.total_variance(),
        sum_abs_third: spec.sum_abs_third(),
        sum_fourth: spec.sum_fourth().ok(),
        groups,
        diagnostics,
    };
    Ok((render(&report, &report.diagnostics, ctx.format), 0))
}

#[derive(Serialize)]
struct BoundReport {
    model: Model,
    bound: PrivacyBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    compromise: Option<CompromiseSummary>,
    /// Γ chosen to maximize δ instead of ε. Supplementary.
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_adversarial: Option<PrivacyBound>,
}

fn summary(plan: &CompromisePlan) -> Option<CompromiseSummary> {
    (plan.selected_count() > 0).then(|| CompromiseSummary {
        gamma: plan.gamma(),
        selected: plan.selected_count(),
        taken_per_group: plan.taken_per_group().to_vec(),
        remaining_n: plan.remaining_n(),
        remaining_variance: plan.remaining_variance(),
    })
}

/// Adversary from the config, with command-line overrides.
fn adversary_for(ctx: &Ctx, spec: &DataVectorSpec, a: &AdversaryArgs) -> Result<(AdversaryModel, Option<f64>), Error> {
    let (gamma, compromised, rtv) = match &ctx.config {
        Some(c) => (
            c.adversary.gamma(),
            c.adversary.compromised().map(<[u64]>::to_vec),
            c.remaining_total_variance,
        ),
        None => (0.0, None, None),
    };
    let adv = AdversaryModel::new(
        spec.dependency_bound(),
        a.gamma.unwrap_or(gamma),
        a.compromised.clone().or(compromised),
    )?;
    adv.validate_for(spec.n())?;
    Ok((adv, a.remaining_total_variance.or(rtv)))
}

fn binomial_case(ctx: &Ctx, n: Option<u64>, p: Option<f64>) -> Result<BinomialCase, Error> {
    if let (Some(n), Some(p)) = (n, p) {
        return BinomialCase::new(n, p);
    }
    let spec = &ctx.config("for the binomial model without --n and --p")?.spec;
    match (spec.records(), spec.blocks().is_empty()) {
        ([rec], true) => match rec.family() {
            Family::Bernoulli { p } => BinomialCase::new(rec.count(), *p),
            _ => Err(invariant("records[0].family", "binomial model needs bernoulli records")),
        },
        _ => Err(invariant(
            "records",
            "binomial model needs exactly one independent bernoulli group",
        )),
    }
}

fn bound(ctx: &Ctx, a: &BoundArgs) -> Outcome {
    let model = match (a.model, &ctx.config) {
        (Some(m), _) => m,
        (None, Some(c)) if c.spec.dependency_bound() > 1 => Model::Dependent,
        (None, _) => Model::Independent,
    };
    if model == Model::Binomial {
        let case = binomial_case(ctx, a.n, a.p)?;
        let b = match (a.epsilon, a.delta) {
            (Some(e), None) => binomial_delta_given_eps(case, e)?,
            (None, Some(d)) => binomial_eps_given_delta(case, d)?,
            _ => return Err(missing("--epsilon|--delta", "exactly one of them for the binomial model").into()),
        };
        return finish_bound(ctx, model, b, None, None);
    }
    let Some(cfg) = &ctx.config else {
        return bound_from_aggregates(ctx, a, model);
    };
    let spec = &cfg.spec;
    let (adv, rtv) = adversary_for(ctx, spec, &a.adversary)?;
    let cp = plan_for(spec, &adv)?;
    let b = if model == Model::Independent {
        if spec.dependency_bound() != 1 {
            return Err(invariant("--model", "the independent model needs dependency_bound = 1").into());
        }
        independent_bound_compromised(spec, &cp, ctx.constants)?
    } else {
        let v = match (rtv, cp.selected_count()) {
            (Some(v), _) => v,
            (None, 0) => spec.total_variance(),
            (None, _) => {
                return Err(missing("remaining_total_variance", "for dependent data with compromised records").into())
            }
        };
        dependent_bound_compromised(spec, &cp, v, ctx.constants)?
    };
    let sup = if adv.gamma() > 0.0 {
        Some(delta_adversarial_plan(spec, adv.gamma(), ctx.constants, rtv)?.1)
    } else {
        None
    };
    finish_bound(ctx, model, b, summary(&cp), sup)
}

fn finish_bound(
    ctx: &Ctx,
    model: Model,
    bound: PrivacyBound,
    compromise: Option<CompromiseSummary>,
    delta_adversarial: Option<PrivacyBound>,
) -> Outcome {
    let report = BoundReport {
        model,
        bound,
        compromise,
        delta_adversarial,
    };
    Ok((render(&report, &report.bound.diagnostics, ctx.format), 0))
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Error> {
    v.ok_or_else(|| missing(flag, "without --config"))
}

fn bound_from_aggregates(ctx: &Ctx, a: &BoundArgs, model: Model) -> Outcome {
    let n = need(a.n, "--n")?;
    let sensitivity = need(a.sensitivity, "--sensitivity")?;
    let sum_abs_third = need(a.sum_abs_third, "--sum-abs-third")?;
    let gamma = a.adversary.gamma.unwrap_or(0.0);
    if model == Model::Dependent {
        if gamma > 0.0 || a.adversary.compromised.is_some() {
            return Err(missing("--config", "for dependent data with compromised records").into());
        }
        let agg = DependentAggregate {
            n,
            total_variance: need(a.total_variance, "--total-variance")?,
            sum_abs_third,
            sum_fourth: need(a.sum_fourth, "--sum-fourth")?,
            dependency_bound: a.dependency_bound.unwrap_or(1),
            sensitivity,
        };
        return finish_bound(ctx, model, dependent_bound(&agg, ctx.constants.stein)?, None, None);
    }
    let mean_variance = need(a.mean_variance, "--mean-variance")?;
    if gamma == 0.0 && a.adversary.compromised.is_none() {
        let agg = IndependentAggregate {
            n,
            mean_variance,
            sum_abs_third,
            sensitivity,
        };
        return finish_bound(ctx, model, independent_bound(&agg, ctx.constants.berry_esseen)?, None, None);
    }
    // Identical records carrying the aggregate moments.
    let rec = DistributionSpec::new(
        Family::Moments {
            mean: 0.0,
            variance: mean_variance,
            abs_third: sum_abs_third / n as f64,
            fourth: None,
            bounds: None,
        },
        n,
    )?;
    let spec = DataVectorSpec::independent(vec![rec], sensitivity)?;
    let adv = AdversaryModel::new(1, gamma, a.adversary.compromised.clone())?;
    let cp = plan_for(&spec, &adv)?;
    let b = independent_bound_compromised(&spec, &cp, ctx.constants)?;
    let sup = if gamma > 0.0 {
        Some(delta_adversarial_plan(&spec, gamma, ctx.constants, None)?.1)
    } else {
        None
    };
    finish_bound(ctx, model, b, summary(&cp), sup)
}

fn plan_cmd(ctx: &Ctx, a: &PlanArgs) -> Outcome {
    let target = Target {
        epsilon: a.target_epsilon,
        delta: a.target_delta,
    };
    let report = if a.no_assumptions {
        let sensitivity = match (a.sensitivity, &ctx.config) {
            (Some(s), _) => s,
            (None, Some(c)) => c.spec.sensitivity(),
            (None, None) => return Err(missing("--sensitivity", "with --no-assumptions").into()),
        };
        plan(PlanInput::NoAssumptions { sensitivity }, target, ctx.constants)?
    } else {
        let spec = &ctx.config("unless --no-assumptions is given")?.spec;
        let (adversary, rtv) = adversary_for(ctx, spec, &a.adversary)?;
        plan(
            PlanInput::Data {
                spec,
                adversary: &adversary,
                remaining_total_variance: rtv,
            },
            target,
            ctx.constants,
        )?
    };
    Ok((render(&report, &report.diagnostics, ctx.format), 0))
}

#[derive(Serialize)]
struct VerifyReport {
    mode: &'static str,
    model: Model,
    epsilon: f64,
    measured_delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci95: Option<f64>,
    claimed_delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_case: Option<AdjacencyCase>,
    verdict: &'static str,
    diagnostics: Vec<Diagnostic>,
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> Outcome {
    let cfg = ctx.config("for verify")?;
    let spec = &cfg.spec;
    if cfg.adversary.gamma() > 0.0 {
        return Err(Error::Domain(
            "verify checks the uncompromised bounds; set gamma = 0 in the config".into(),
        )
        .into());
    }
    let model = a.model.unwrap_or(if spec.dependency_bound() > 1 {
        Model::Dependent
    } else {
        Model::Independent
    });
    let claim = match model {
        Model::Binomial => {
            let e = need(a.epsilon, "--epsilon")
                .map_err(|_| missing("--epsilon", "for the binomial model"))?;
            binomial_delta_given_eps(binomial_case(ctx, None, None)?, e)?
        }
        Model::Independent => {
            if spec.dependency_bound() != 1 {
                return Err(invariant("--model", "the independent model needs dependency_bound = 1").into());
            }
            independent_bound(&IndependentAggregate::from_spec(spec), ctx.constants.berry_esseen)?
        }
        Model::Dependent => dependent_bound(&DependentAggregate::from_spec(spec)?, ctx.constants.stein)?,
    };
    let epsilon = a.epsilon.unwrap_or(claim.epsilon);
    if epsilon < claim.epsilon {
        return Err(Error::Domain(format!(
            "the bound's δ holds at ε >= {}; requested ε = {}",
            sig12(claim.epsilon),
            sig12(epsilon)
        ))
        .into());
    }
    let report = if a.mc {
        let est = mc_estimate_delta(spec, epsilon, None, a.samples, ctx.seed)?;
        let pass = est.estimate <= claim.delta + est.ci95;
        VerifyReport {
            mode: "monte-carlo-estimate",
            model,
            epsilon,
            measured_delta: est.estimate,
            ci95: Some(est.ci95),
            claimed_delta: claim.delta,
            worst_case: None,
            verdict: if pass { "PASS" } else { "FAIL" },
            diagnostics: claim.diagnostics.iter().cloned().chain(est.diagnostics).collect(),
        }
    } else {
        let got = adjacent_pmfs(spec, None, &OracleConfig::default())?.delta(epsilon);
        let pass = got.delta <= claim.delta + 1e-12;
        VerifyReport {
            mode: "exact",
            model,
            epsilon,
            measured_delta: got.delta,
            ci95: None,
            claimed_delta: claim.delta,
            worst_case: Some(got.case),
            verdict: if pass { "PASS" } else { "FAIL" },
            diagnostics: claim.diagnostics.clone(),
        }
    };
    let code = if report.verdict == "PASS" { 0 } else { EXIT_VERIFY_FAIL };
    let mut out = render(&report, &report.diagnostics, ctx.format);
    if ctx.format == Format::Text {
        out.push_str(report.verdict);
        out.push('\n');
    }
    Ok((out, code))
}

fn curves(a: &CurvesArgs) -> Outcome {
    let fig = Figure::from_id(a.figure)?;
    let mut params = CurveParams::defaults(fig);
    params.n_min = a.n_min.unwrap_or(params.n_min);
    params.n_max = a.n_max.unwrap_or(params.n_max);
    params.points = a.points.unwrap_or(params.points);
    let curve = emit_curve(fig, &params)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Fail {
        err: Error::Domain(e.to_string()),
        code: EXIT_COMPUTE,
    };
    w.write_record(&curve.header).map_err(io)?;
    for (n, vals) in &curve.rows {
        let mut row = vec![n.to_string()];
        row.extend(vals.iter().map(|&v| sig12(v)));
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| io(e.into_error().into()))?;
    let text = String::from_utf8(bytes).expect("CSV of ASCII numbers");
    match &a.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Fail {
                err: Error::Domain(format!("{}: {e}", path.display())),
                code: EXIT_COMPUTE,
            })?;
            Ok((String::new(), 0))
        }
        None => Ok((text, 0)),
    }
}
