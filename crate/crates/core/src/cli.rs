//! The `genalpha` command-line front end.
//!
//! Every subcommand writes its CSV output and a `manifest.txt` of sorted
//! `key = value` lines into `--out-dir`. Exit codes: 0 on success, 2 for a
//! bad configuration, 3 for a numerical failure. Failures also print one
//! `error kind=<kind> message="<text>"` line on standard error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::integrator::{heat_problem, integrate, step_count, DiagonalProblem, LinearProblem};
use crate::numkit::CVector;
use crate::orderlab::{default_taus, measure_order, recover_c_with, table_c};
use crate::schemes::{in_stability_region, make_scheme, RhoBranch, SchemeParams, Variant};
use crate::stability::{fmt17, rho_curve, scan_region, worst_case_radius, GridSpec, TSamples};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "genalpha", version, about = "Generalized-alpha integrators and their stability analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// March u' + A u = 0 and write trajectory.csv.
    Integrate(IntegrateArgs),
    /// Scan the third-order scheme over (alpha_m, alpha_f) and write stability.csv.
    StabilityMap(StabilityArgs),
    /// Sample the four rho_inf branches and write rho_curves.csv.
    RhoCurve(RhoArgs),
    /// Measure the convergence slope and optionally recover C(p).
    OrderCheck(OrderArgs),
}

#[derive(Debug, Args, Clone)]
pub struct SchemeArgs {
    /// Order of the scheme.
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// Gamma rule: equal-gamma or remark-one.
    #[arg(long, default_value = "equal-gamma")]
    pub variant: Variant,
    #[arg(long, requires = "alpha_f", conflicts_with_all = ["rho_inf", "branch"], allow_hyphen_values = true)]
    pub alpha_m: Option<f64>,
    #[arg(long, requires = "alpha_m", allow_hyphen_values = true)]
    pub alpha_f: Option<f64>,
    /// High-frequency dissipation target in [0, 1]; the default when no alphas are given is 0.5.
    #[arg(long)]
    pub rho_inf: Option<f64>,
    /// Branch of the rho_inf parametrisation: main, alt1, alt2, alt3.
    #[arg(long)]
    pub branch: Option<RhoBranch>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Scalar lambda as RE[,IM].
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, conflicts_with = "heat_n")]
    pub lambda: Option<Complex64>,
    /// Interior nodes of the heat-equation demo; replaces --lambda.
    #[arg(long)]
    pub heat_n: Option<usize>,
    /// Diffusivity of the heat-equation demo.
    #[arg(long, default_value_t = 1.0, requires = "heat_n")]
    pub kappa: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, default_value = "equal-gamma")]
    pub variant: Variant,
    /// Cells per axis.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.5)]
    pub hi: f64,
    /// Real-axis T samples (log-spaced), in addition to T = 0 and the limits.
    #[arg(long, default_value_t = 48)]
    pub t_samples: usize,
    /// Also sample complex rays through the left half-plane.
    #[arg(long)]
    pub rays: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    /// Samples per branch, uniform on [0, 1].
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1")]
    pub lambda: Complex64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Finest step is 2^-k; the ladder runs 2^-3 down to it.
    #[arg(long, default_value_t = 8)]
    pub finest: i32,
    /// Also recover C(p) from the principal-eigenvalue functional.
    #[arg(long)]
    pub recover_c: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Parses `RE` or `RE,IM`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or("").trim();
    let im = parts.next().map(str::trim);
    if parts.next().is_some() {
        return Err(format!("expected RE[,IM], got '{s}'"));
    }
    let re: f64 = re.parse().map_err(|_| format!("bad real part in '{s}'"))?;
    let im: f64 = match im {
        Some(v) => v.parse().map_err(|_| format!("bad imaginary part in '{s}'"))?,
        None => 0.0,
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("lambda must be finite, got '{s}'"));
    }
    Ok(Complex64::new(re, im))
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            kind: "Config".into(),
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError {
            code: EXIT_CONFIG,
            kind: "Io".into(),
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::OutOfTable(_)
            | Error::VariantUnsupported(_)
            | Error::PoleAtRho { .. }
            | Error::DegenerateParams(_)
            | Error::DegenerateAlphaM => EXIT_CONFIG,
            _ => EXIT_NUMERIC,
        };
        CliError {
            code,
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Sorted `key = value` record of a resolved run.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn resolve_scheme(args: &SchemeArgs, m: &mut Manifest) -> CliResult<SchemeParams> {
    let (am, af) = match (args.alpha_m, args.alpha_f) {
        (Some(am), Some(af)) => (am, af),
        _ => {
            let rho = args.rho_inf.unwrap_or(0.5);
            let branch = args.branch.unwrap_or(RhoBranch::Main);
            m.set("rho_inf", fmt17(rho));
            m.set("branch", branch);
            crate::schemes::params_from_rho(rho, branch)?
        }
    };
    let params = make_scheme(args.p, am, af, args.variant)?;
    m.set("p", params.p);
    m.set("variant", params.variant);
    m.set("alpha_m", fmt17(params.alpha_m));
    m.set("alpha_f", fmt17(params.alpha_f));
    m.set(
        "gammas",
        params.gammas.iter().map(|g| fmt17(*g)).collect::<Vec<_>>().join(" "),
    );
    Ok(params)
}

/// Warns on stderr when the parameters are not unconditionally stable.
fn warn_if_outside(params: &SchemeParams, err: &mut dyn Write) {
    let inside = if params.p == 3 && params.variant == Variant::EqualGamma {
        in_stability_region(params.alpha_m, params.alpha_f)
    } else {
        worst_case_radius(params, &TSamples::default_real()).is_stable()
    };
    if !inside {
        let _ = writeln!(
            err,
            "warning: (alpha_m, alpha_f) = ({}, {}) lies outside the unconditional stability region; continuing",
            params.alpha_m, params.alpha_f
        );
    }
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn write_manifest(dir: &Path, m: &Manifest) -> CliResult<()> {
    write_file(dir, "manifest.txt", |w| w.write_all(m.render().as_bytes())).map(|_| ())
}

fn cmd_integrate(a: &IntegrateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut m = Manifest::default();
    m.set("command", "integrate");
    let params = resolve_scheme(&a.scheme, &mut m)?;
    let n = step_count(a.tau, a.t_end)?;
    m.set("tau", fmt17(a.tau));
    m.set("t_end", fmt17(a.t_end));
    m.set("steps", n);
    warn_if_outside(&params, err);
    prepare_dir(&a.out_dir)?;

    let (problem, u0, exact_factor): (Box<dyn LinearProblem>, CVector, Complex64) = match a.heat_n {
        Some(nodes) => {
            let heat = heat_problem(nodes, a.kappa)?;
            let h = heat.h();
            let lmin = a.kappa * (2.0 - 2.0 * (std::f64::consts::PI * h).cos()) / (h * h);
            m.set("problem", "heat");
            m.set("heat_n", nodes);
            m.set("kappa", fmt17(a.kappa));
            m.set("initial", "sin(pi x)");
            let u0 = heat.sine_mode(1);
            (Box::new(heat), u0, Complex64::new(lmin, 0.0))
        }
        None => {
            let lambda = a.lambda.unwrap_or(Complex64::new(1.0, 0.0));
            m.set("problem", "scalar");
            m.set("lambda_re", fmt17(lambda.re));
            m.set("lambda_im", fmt17(lambda.im));
            m.set("initial", "1");
            (Box::new(DiagonalProblem::scalar(lambda)), CVector(vec![Complex64::new(1.0, 0.0)]), lambda)
        }
    };
    let traj = integrate(&params, problem.as_ref(), &u0, a.tau, a.t_end)?;
    write_file(&a.out_dir, "trajectory.csv", |w| traj.write_csv(w))?;
    write_manifest(&a.out_dir, &m)?;

    let (t, u) = traj.last().expect("trajectory has the initial sample");
    let decay = (-exact_factor * t).exp();
    let error = u.iter().zip(u0.iter()).map(|(x, x0)| (x - x0 * decay).norm()).fold(0.0, f64::max);
    let _ = writeln!(out, "steps = {n}");
    let _ = writeln!(out, "t_final = {}", fmt17(t));
    let _ = writeln!(out, "final_error = {}", fmt17(error));
    Ok(())
}

fn plot_script(map: &crate::StabilityMap, lo: f64, hi: f64) -> String {
    format!(
        "# gnuplot script for stability.csv: alpha_f horizontal, alpha_m vertical\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title 'Unconditional stability region, {variant}'\n\
         set xlabel 'alpha_f'\n\
         set ylabel 'alpha_m'\n\
         set xrange [{lo}:{hi}]\n\
         set yrange [{lo}:{hi}]\n\
         set size square\n\
         set terminal pngcairo size 800,800\n\
         set output 'stability.png'\n\
         plot 'stability.csv' using 2:(strcol(4) eq 'true' ? $1 : 1/0) with points pt 5 ps 0.35 lc rgb '#9ecae1' title 'stable', \\\n\
         \x20    '+' using (0.5):($1 >= 7./12 ? $1 : 1/0) with lines lw 2 lc rgb 'black' title 'alpha_f = 1/2', \\\n\
         \x20    '+' using ($1 - 1./12):($1 >= 7./12 ? $1 : 1/0) with lines lw 2 lc rgb 'black' dt 2 title 'alpha_f = alpha_m - 1/12'\n",
        variant = map.variant,
    )
}

fn cmd_stability_map(a: &StabilityArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.grid == 0 {
        return Err(CliError::config("--grid must be at least 1"));
    }
    if a.t_samples < 2 {
        return Err(CliError::config("--t-samples must be at least 2"));
    }
    let mut m = Manifest::default();
    m.set("command", "stability-map");
    m.set("variant", a.variant);
    m.set("grid", a.grid);
    m.set("lo", fmt17(a.lo));
    m.set("hi", fmt17(a.hi));
    m.set("t_samples", a.t_samples);
    m.set("rays", a.rays);
    prepare_dir(&a.out_dir)?;
    let mut samples = TSamples::real_axis(a.t_samples, -4.0, 8.0);
    if a.rays {
        samples.add_rays(a.t_samples, -4.0, 8.0);
    }
    let grid = GridSpec::square(a.lo, a.hi, a.grid);
    let map = scan_region(a.variant, &grid, &samples)?;
    write_file(&a.out_dir, "stability.csv", |w| map.write_csv(w))?;
    write_file(&a.out_dir, "stability.plot", |w| w.write_all(plot_script(&map, a.lo, a.hi).as_bytes()))?;
    write_manifest(&a.out_dir, &m)?;
    let _ = writeln!(out, "cells = {}", map.stable.len());
    let _ = writeln!(out, "stable_cells = {}", map.stable_count());
    if a.variant == Variant::EqualGamma {
        let agree = map.agreement_with_closed_form();
        let _ = writeln!(out, "closed_form_agreement = {:.6}", agree.fraction());
    }
    Ok(())
}

fn cmd_rho_curve(a: &RhoArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut m = Manifest::default();
    m.set("command", "rho-curve");
    m.set("n", a.n);
    prepare_dir(&a.out_dir)?;
    let mut rows = Vec::new();
    for branch in RhoBranch::ALL {
        rows.extend(rho_curve(branch, a.n)?);
    }
    write_file(&a.out_dir, "rho_curves.csv", |w| {
        writeln!(w, "branch,rho,alpha_m,alpha_f,inside_region,max_eig_inf,pole")?;
        for s in &rows {
            match s.params {
                Some((am, af)) => writeln!(
                    w,
                    "{},{},{},{},{},{},false",
                    s.branch,
                    fmt17(s.rho),
                    fmt17(am),
                    fmt17(af),
                    s.inside_region,
                    s.max_eig_inf.map(fmt17).unwrap_or_default()
                )?,
                None => writeln!(w, "{},{},,,,,true", s.branch, fmt17(s.rho))?,
            }
        }
        Ok(())
    })?;
    write_manifest(&a.out_dir, &m)?;
    let poles = rows.iter().filter(|s| s.is_pole()).count();
    let _ = writeln!(out, "rows = {}", rows.len());
    let _ = writeln!(out, "pole_rows = {poles}");
    Ok(())
}

fn cmd_order_check(a: &OrderArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    if !(3..=20).contains(&a.finest) {
        return Err(CliError::config("--finest must lie in 3..=20"));
    }
    let mut m = Manifest::default();
    m.set("command", "order-check");
    let params = resolve_scheme(&a.scheme, &mut m)?;
    let taus: Vec<f64> = (3..=a.finest).map(|k| 0.5f64.powi(k)).collect();
    let taus = if taus.len() < 2 { default_taus() } else { taus };
    m.set("lambda_re", fmt17(a.lambda.re));
    m.set("lambda_im", fmt17(a.lambda.im));
    m.set("t_end", fmt17(a.t_end));
    m.set("finest", a.finest);
    m.set("recover_c", a.recover_c);
    warn_if_outside(&params, err);
    prepare_dir(&a.out_dir)?;
    let report = measure_order(&params, a.lambda, a.t_end, &taus)?;
    write_file(&a.out_dir, "convergence.csv", |w| report.write_csv(w))?;
    let _ = writeln!(out, "slope = {:.6}", report.slope);
    if a.recover_c {
        let rec = recover_c_with(params.p, 1.0, 0.75)?;
        let table = table_c(params.p)?;
        let _ = writeln!(out, "recovered_c = {}", fmt17(rec.c));
        let _ = writeln!(out, "table_c = {}", fmt17(table));
        let _ = writeln!(out, "c_abs_diff = {:.3e}", (rec.c - table).abs());
        let _ = writeln!(out, "raw_c_t_1e-2 = {}", fmt17(rec.raw_at_base()));
        let _ = writeln!(out, "raw_c_t_5e-3 = {}", fmt17(rec.raw_at_half()));
    }
    write_manifest(&a.out_dir, &m)?;
    Ok(())
}

/// Executes a parsed command.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Integrate(a) => cmd_integrate(a, out, err),
        Command::StabilityMap(a) => cmd_stability_map(a, out),
        Command::RhoCurve(a) => cmd_rho_curve(a, out),
        Command::OrderCheck(a) => cmd_order_check(a, out, err),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
                let _ = writeln!(err, "error kind=Usage message=\"{}\"", first_line(&e.to_string()));
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error kind={} message=\"{}\"", e.kind, e.message.replace('"', "'"));
            e.code
        }
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").replace('"', "'")
}

/// Entry point for the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(parse_complex("1,2").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(parse_complex("-0.5, -3").unwrap(), Complex64::new(-0.5, -3.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("inf").is_err());
    }

    #[test]
    fn manifest_sorted() {
        let mut m = Manifest::default();
        m.set("zeta", 1);
        m.set("alpha", "x");
        assert_eq!(m.render(), "alpha = x\nzeta = 1\n");
    }

    #[test]
    fn both_parametrisations_rejected() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            ["genalpha", "integrate", "--alpha-m", "1", "--alpha-f", "0.6", "--rho-inf", "0.5", "--tau", "0.1", "--t-end", "1"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_CONFIG);
        assert!(String::from_utf8(err).unwrap().contains("error kind=Usage"));
    }

    #[test]
    fn bad_rho_is_config_error() {
        let dir = std::env::temp_dir().join("genalpha-cli-unit-bad-rho");
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            ["genalpha", "integrate", "--rho-inf", "2", "--tau", "0.1", "--t-end", "1", "--out-dir", dir.to_str().unwrap()],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_CONFIG);
        assert!(String::from_utf8(err).unwrap().contains("kind=InvalidArgument"));
    }
}
