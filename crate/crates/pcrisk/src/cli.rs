//! `pcrisk` command-line front end.
//!
//! Output is assembled in memory and written once at the end, so a failing
//! command never leaves a partial file behind. Exit codes: 0 success,
//! 2 usage or validation, 3 solver, 4 linear algebra.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pcrisk_core::generalrisk::UnderOptimum;
use pcrisk_core::polyrisk::Verdict;
use pcrisk_core::{Error as CoreError, GeneralModel, PolyModel, Regime};

use crate::density_config::parse_density;
use crate::sim::{self, SimConfig, SimError};
use crate::table::{opt9, sig9, Table};

#[derive(Debug, Parser)]
#[command(
    name = "pcrisk",
    version,
    about = "Asymptotic and simulated risk of principal component regression"
)]
struct Cli {
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Asymptotic risk over a grid of alpha = p/N.
    Curve(CurveArgs),
    /// Best p < n against p = N.
    Optimum(PolyArgs),
    /// Monte Carlo risk against the asymptotic curve.
    Simulate(SimulateArgs),
    /// KS distance of the scaled eigenvalues to their limit law.
    Spectrum(SpectrumArgs),
    /// Empirical Stieltjes transform at zero against the fixed point.
    Stieltjes(StieltjesArgs),
    /// Risk over a grid of thresholds nu for a general spectral law.
    GeneralCurve(GeneralCurveArgs),
    /// Optimal threshold and interpolation verdict for a general spectral law.
    GeneralOptimum(GeneralArgs),
}

#[derive(Debug, Args)]
struct PolyArgs {
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long = "bigN")]
    big_n: u64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    model: PolyArgs,
    /// start:stop:step
    #[arg(long, default_value = "0.01:1.0:0.01")]
    alpha_grid: String,
    #[arg(long, default_value_t = 0.01)]
    exclusion: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long = "bigN")]
    big_n: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Comma-separated component counts.
    #[arg(
        long,
        conflicts_with = "alpha_list",
        required_unless_present = "alpha_list"
    )]
    p_list: Option<String>,
    /// Comma-separated alpha values, rounded to p = alpha N.
    #[arg(long)]
    alpha_list: Option<String>,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// θ/w draws per design for the sampling oracle (0 skips it).
    #[arg(long, default_value_t = 0)]
    theta_draws: usize,
    #[arg(long, default_value_t = 0.01)]
    exclusion: f64,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long = "bigN")]
    big_n: usize,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    p: usize,
}

#[derive(Debug, Args)]
struct StieltjesArgs {
    #[arg(long = "bigN")]
    big_n: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report m and m' at z = −μ with μ = 1e-3 N^{-κ}.
    #[arg(long)]
    mu_diagnostic: bool,
}

#[derive(Debug, Args)]
struct GeneralArgs {
    /// JSON density specification.
    #[arg(long)]
    density: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long = "bigN")]
    big_n: u64,
    #[arg(long = "cN")]
    c_n: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
}

#[derive(Debug, Args)]
struct GeneralCurveArgs {
    #[command(flatten)]
    model: GeneralArgs,
    /// start:stop:step
    #[arg(long)]
    nu_grid: String,
    /// Half-width of the excluded band around alpha = beta.
    #[arg(long, default_value_t = 0.01)]
    exclusion: f64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    LinAlg(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) => 3,
            CliError::LinAlg(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_numerical() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => CliError::Usage(m),
            SimError::LinAlg(m) => CliError::LinAlg(m),
            SimError::Core(c) => c.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parse `start:stop:step` into an inclusive grid.
fn parse_grid(text: &str, flag: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || usage(format!("--{flag} expects start:stop:step, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !start.is_finite() || !stop.is_finite() || !(step > 0.0) || !step.is_finite() || stop < start
    {
        return Err(usage(format!(
            "--{flag} needs finite start <= stop and a positive step"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(usage(format!("--{flag} has more than a million points")));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> CliResult<Vec<T>> {
    let values: Result<Vec<T>, _> = text.split(',').map(|s| s.trim().parse::<T>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(usage(format!(
            "--{flag} expects a comma-separated list, got `{text}`"
        ))),
    }
}

fn poly_model(a: &PolyArgs) -> CliResult<PolyModel> {
    Ok(PolyModel::new(a.kappa, a.beta, a.big_n, a.sigma)?)
}

fn run_curve(a: &CurveArgs) -> CliResult<String> {
    let model = poly_model(&a.model)?;
    let grid = parse_grid(&a.alpha_grid, "alpha-grid")?;
    let points = model.risk_curve(&grid, a.exclusion)?;
    let mut t = Table::new(&["alpha", "regime", "risk"]);
    for pt in points {
        t.row(&[
            sig9(pt.alpha),
            pt.regime.as_str().to_string(),
            opt9(pt.risk),
        ]);
    }
    Ok(t.into_string())
}

fn verdict_text(v: Verdict, risk_at_one: f64) -> &'static str {
    match v {
        Verdict::InterpolationWins => "interpolating regime wins",
        Verdict::UnderparameterizedWins => "underparameterized regime wins",
        Verdict::NoiseFloorAtZero { min_risk } if min_risk <= risk_at_one => {
            "optimum at alpha=0 with risk sigma^2"
        }
        Verdict::NoiseFloorAtZero { .. } => "interpolating regime wins",
    }
}

fn run_optimum(a: &PolyArgs) -> CliResult<String> {
    let cmp = poly_model(a)?.compare()?;
    let mut t = Table::new(&["quantity", "value"]);
    for (k, v) in [
        ("alpha_star", cmp.alpha_star),
        ("risk_at_alpha_star", cmp.risk_at_alpha_star),
        ("s_star", cmp.at_one.s_star),
        ("m0", cmp.at_one.m0),
        ("m0_prime", cmp.at_one.m0_prime),
        ("risk_at_one", cmp.risk_at_one),
    ] {
        t.row(&[k.to_string(), sig9(v)]);
    }
    t.row(&["verdict", verdict_text(cmp.verdict, cmp.risk_at_one)]);
    Ok(t.into_string())
}

struct Emitted {
    csv: String,
    /// First per-p failure, reported after the table is written.
    deferred: Option<CliError>,
}

fn run_simulate(a: &SimulateArgs, err: &mut dyn Write) -> CliResult<Emitted> {
    let p_values: Vec<usize> = match (&a.p_list, &a.alpha_list) {
        (Some(list), _) => parse_list(list, "p-list")?,
        (None, Some(list)) => {
            let alphas: Vec<f64> = parse_list(list, "alpha-list")?;
            if alphas.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(usage("--alpha-list values must lie in [0, 1]"));
            }
            alphas
                .iter()
                .map(|x| (x * a.big_n as f64).round() as usize)
                .collect()
        }
        (None, None) => return Err(usage("one of --p-list or --alpha-list is required")),
    };
    let cfg = SimConfig {
        big_n: a.big_n,
        n: a.n,
        kappa: a.kappa,
        sigma: a.sigma,
        p_values,
        replicates: a.replicates,
        seed: a.seed,
        theta_draws: a.theta_draws,
    };
    cfg.validate()?;
    if !(a.exclusion > 0.0) {
        return Err(usage("--exclusion must be positive"));
    }
    let poly = PolyModel::new(cfg.kappa, cfg.beta(), cfg.big_n as u64, cfg.sigma)?;
    for p in cfg.threshold_ps() {
        let _ = writeln!(err, "warning: p = {p} equals n; the Gram matrix is near singular at the interpolation threshold");
    }

    let estimates = sim::mc_curve(&cfg)?;
    let lambdas = sim::make_sigma(cfg.big_n, cfg.kappa);
    let trace_sigma: f64 = lambdas.iter().sum();
    let mut header = vec![
        "p",
        "alpha",
        "mc_mean",
        "mc_stderr",
        "asymptotic",
        "rel_err",
    ];
    if cfg.theta_draws > 0 {
        header.extend(["sampled_mean", "sampled_stderr"]);
    }
    let mut t = Table::new(&header);
    let mut deferred = None;
    for (&p, est) in cfg.p_values.iter().zip(estimates) {
        let alpha = p as f64 / cfg.big_n as f64;
        let asymptotic = if p == 0 {
            Some(trace_sigma + cfg.sigma * cfg.sigma)
        } else if (alpha - cfg.beta()).abs() < a.exclusion {
            None
        } else {
            Some(poly.risk(alpha)?)
        };
        let mut row = vec![p.to_string(), sig9(alpha)];
        match est {
            Ok(e) => {
                if let Some(rank) = e.effective_rank {
                    let _ = writeln!(err, "warning: p = {p}: effective rank of X_P is {rank}");
                }
                let rel = asymptotic.map(|v| (e.mean - v).abs() / v);
                row.extend([sig9(e.mean), sig9(e.stderr), opt9(asymptotic), opt9(rel)]);
                if cfg.theta_draws > 0 {
                    row.extend([opt9(e.sampled_mean), opt9(e.sampled_stderr)]);
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: p = {p}: {e}");
                row.extend([
                    String::new(),
                    String::new(),
                    opt9(asymptotic),
                    String::new(),
                ]);
                if cfg.theta_draws > 0 {
                    row.extend([String::new(), String::new()]);
                }
                deferred.get_or_insert(e.into());
            }
        }
        t.row(&row);
    }
    Ok(Emitted {
        csv: t.into_string(),
        deferred,
    })
}

fn run_spectrum(a: &SpectrumArgs) -> CliResult<String> {
    let report = sim::empirical_spectrum(a.p, a.big_n, a.kappa)?;
    let mut t = Table::new(&["p", "ks_distance"]);
    t.row(&[report.p.to_string(), sig9(report.ks_distance)]);
    Ok(t.into_string())
}

fn run_stieltjes(a: &StieltjesArgs) -> CliResult<String> {
    let cfg = SimConfig {
        big_n: a.big_n,
        n: a.n,
        kappa: a.kappa,
        sigma: 0.0,
        p_values: vec![a.p],
        replicates: a.replicates,
        seed: a.seed,
        theta_draws: 0,
    };
    cfg.validate()?;
    if a.p <= a.n {
        return Err(usage(format!(
            "--p must exceed --n (got p = {}, n = {})",
            a.p, a.n
        )));
    }
    let poly = PolyModel::new(a.kappa, cfg.beta(), a.big_n as u64, 0.0)?;
    let fp = poly.fixed_point(a.p as f64 / a.big_n as f64)?;
    let estimates = sim::stieltjes_replicates(&cfg, a.p)?;
    let m: Vec<f64> = estimates.iter().map(|e| e.m_hat()).collect();
    let mp: Vec<f64> = estimates.iter().map(|e| e.m_prime_hat()).collect();
    let (m_mean, m_se) = sim::mean_stderr(&m);
    let (mp_mean, _) = sim::mean_stderr(&mp);
    let mut header = vec![
        "m_hat_mean",
        "m_hat_stderr",
        "m0_theory",
        "mprime_hat_mean",
        "mprime_theory",
    ];
    let mut row = vec![
        sig9(m_mean),
        sig9(m_se),
        sig9(fp.m0),
        sig9(mp_mean),
        sig9(fp.m0_prime),
    ];
    if a.mu_diagnostic {
        let mu = 1e-3 * (a.big_n as f64).powf(-a.kappa);
        let shifted: Vec<(f64, f64)> = estimates.iter().map(|e| e.at(-mu)).collect();
        let k = shifted.len() as f64;
        header.extend(["mu", "m_mu_mean", "mprime_mu_mean"]);
        row.extend([
            sig9(mu),
            sig9(shifted.iter().map(|s| s.0).sum::<f64>() / k),
            sig9(shifted.iter().map(|s| s.1).sum::<f64>() / k),
        ]);
    }
    let mut t = Table::new(&header);
    t.row(&row);
    Ok(t.into_string())
}

fn general_model(a: &GeneralArgs) -> CliResult<GeneralModel> {
    let text = std::fs::read_to_string(&a.density).map_err(|e| {
        usage(format!(
            "cannot read density spec {}: {e}",
            a.density.display()
        ))
    })?;
    let spec = parse_density(&text).map_err(|e| usage(e.to_string()))?;
    Ok(GeneralModel::new(
        spec, a.beta, a.big_n, a.c_n, a.sigma, 0.0,
    )?)
}

fn run_general_curve(a: &GeneralCurveArgs) -> CliResult<String> {
    let model = general_model(&a.model)?;
    let grid = parse_grid(&a.nu_grid, "nu-grid")?;
    if grid.iter().any(|nu| *nu < 0.0) {
        return Err(usage("--nu-grid values must be non-negative"));
    }
    if !(a.exclusion > 0.0) {
        return Err(usage("--exclusion must be positive"));
    }
    let mut t = Table::new(&["nu", "alpha", "regime", "risk"]);
    for nu in grid {
        let m = model.with_nu(nu)?;
        let alpha = m.alpha()?;
        let (regime, risk) = if (alpha - model.beta()).abs() < a.exclusion {
            (Regime::Excluded, None)
        } else if alpha < model.beta() {
            (Regime::Under, Some(m.risk_under()?))
        } else {
            (Regime::Over, Some(m.risk_over()?))
        };
        t.row(&[
            sig9(nu),
            sig9(alpha),
            regime.as_str().to_string(),
            opt9(risk),
        ]);
    }
    Ok(t.into_string())
}

fn run_general_optimum(a: &GeneralArgs) -> CliResult<String> {
    if a.sigma != 0.0 {
        return Err(usage(
            "general-optimum is defined for the noiseless model (--sigma 0)",
        ));
    }
    let model = general_model(a)?;
    let nu_b = model.nu_b()?;
    let cmp = model.compare()?;
    let mut t = Table::new(&["quantity", "value"]);
    t.row(&["nu_b".to_string(), sig9(nu_b)]);
    match cmp.best_under {
        UnderOptimum::Root { nu_star, .. } => t.row(&["nu_star".to_string(), sig9(nu_star)]),
        UnderOptimum::AtInfinity { .. } => t.row(&["nu_star", "AtInfinity"]),
    }
    t.row(&[
        "min_under_risk".to_string(),
        sig9(cmp.best_under.min_risk()),
    ]);
    t.row(&["s_star_f".to_string(), sig9(cmp.s_star_at_eta1)]);
    t.row(&["risk_at_eta1".to_string(), sig9(cmp.risk_at_eta1)]);
    t.row(&[
        "interpolation_wins".to_string(),
        cmp.interpolation_wins.to_string(),
    ]);
    Ok(t.into_string())
}

fn dispatch(cli: &Cli, err: &mut dyn Write) -> CliResult<Emitted> {
    let plain = |r: CliResult<String>| {
        r.map(|csv| Emitted {
            csv,
            deferred: None,
        })
    };
    match &cli.command {
        Command::Curve(a) => plain(run_curve(a)),
        Command::Optimum(a) => plain(run_optimum(a)),
        Command::Simulate(a) => run_simulate(a, err),
        Command::Spectrum(a) => plain(run_spectrum(a)),
        Command::Stieltjes(a) => plain(run_stieltjes(a)),
        Command::GeneralCurve(a) => plain(run_general_curve(a)),
        Command::GeneralOptimum(a) => plain(run_general_optimum(a)),
    }
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = write!(out, "{e}");
                return 0;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return 2;
        }
    };
    let result = dispatch(&cli, err).and_then(|emitted| {
        match &cli.out {
            Some(path) => std::fs::write(path, &emitted.csv)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
            None => out
                .write_all(emitted.csv.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?,
        }
        emitted.deferred.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}
