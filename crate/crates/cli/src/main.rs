//! Command-line front end: connection polynomials, propagators, potentials,
//! resolvents and the verification suites.
//!
//! Exit codes: 0 success, 1 internal error or failed check, 2 usage or
//! validation error, 3 singular time.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use xhermite::connection::build_qtable;
use xhermite::propagator::{green_function, potential, EvalError, PropagatorModel};
use xhermite::verify::{self, VerifyConfig};
use xhermite::wronskian::LevelSequence;

mod render;

#[derive(Parser)]
#[command(name = "xhermite", version, about = "Connection polynomials and propagators of rationally extended harmonic oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SigmaArg {
    /// Deleted levels, comma-separated and strictly increasing (e.g. "1,2").
    #[arg(long, value_parser = parse_sigma)]
    sigma: LevelSequence,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the connection-polynomial table Q_0 … Q_{last+1}.
    Qpoly {
        #[command(flatten)]
        sigma: SigmaArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write the rendering to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the propagator K^sigma(x, y; t).
    Propagator {
        #[command(flatten)]
        sigma: SigmaArg,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        y: f64,
        /// Real part of t.
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Imaginary part of t.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        t_im: f64,
        /// Sweep x over "start:stop:count" (CSV output).
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid_x: Option<GridSpec>,
        /// Sweep y over "start:stop:count" (CSV output).
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid_y: Option<GridSpec>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the deformed potential V^sigma(x) = x²/4 + v_num/v_den.
    Potential {
        #[command(flatten)]
        sigma: SigmaArg,
        /// Tabulate V over "start:stop:count" (gnuplot-compatible).
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Resolvent G_sigma(x, y; E): relation value and direct spectral sum.
    Green {
        #[command(flatten)]
        sigma: SigmaArg,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        e_re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        e_im: f64,
        /// Spectral truncation order.
        #[arg(long, default_value_t = 200)]
        trunc: u32,
    },
    /// Run verification suites and write a report.
    Verify {
        /// Sequences to verify (repeatable); defaults to 1,2 / 2,3 / 3,4 / 1,2,3,4.
        #[arg(long, value_parser = parse_sigma)]
        sigma: Vec<LevelSequence>,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// λ for the generating-identity checks, as "re" or "re,im".
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Option<Complex64>,
        /// Report destination (JSON array); stdout summary either way.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Truncation order override for spectral checks.
        #[arg(long)]
        trunc: Option<u32>,
        /// Finite-difference step ladder "h1,h2,h3" for the PDE-residual
        /// check (coarse to fine).
        #[arg(long, value_parser = parse_steps)]
        fd_steps: Option<[f64; 3]>,
        /// Tolerance overrides "name=value" (repeatable); names:
        /// closed-form, schrodinger, mehler, xmehler, green, eigen, gram.
        #[arg(long = "tolerance", value_parser = parse_tolerance)]
        tolerances: Vec<(String, f64)>,
    },
    /// Check the deformed bilinear generating identity for one sigma.
    Xmehler {
        #[command(flatten)]
        sigma: SigmaArg,
        /// λ as "re" or "re,im"; |λ| ≤ 0.9.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.5")]
        lambda: Complex64,
        #[arg(long, default_value_t = 80)]
        trunc: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Qtable,
    Sumrule,
    Lemma,
    Parity,
    Deltav,
    Potential,
    Propagator,
    Schrodinger,
    Mehler,
    Xmehler,
    Green,
    Eigen,
    Umbral,
}

#[derive(Clone, Copy)]
struct GridSpec {
    start: f64,
    stop: f64,
    count: usize,
}

impl GridSpec {
    fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

fn parse_sigma(s: &str) -> Result<LevelSequence, String> {
    let levels: Result<Vec<u32>, _> = s
        .split(',')
        .filter(|p| !p.is_empty())
        .map(|p| p.trim().parse::<u32>())
        .collect();
    let levels = levels.map_err(|e| format!("bad level: {e}"))?;
    LevelSequence::new(levels).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("grid spec must be start:stop:count".into());
    }
    let start: f64 = parts[0].parse().map_err(|e| format!("bad start: {e}"))?;
    let stop: f64 = parts[1].parse().map_err(|e| format!("bad stop: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("bad count: {e}"))?;
    if count == 0 {
        return Err("grid count must be positive".into());
    }
    Ok(GridSpec { start, stop, count })
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(
            re.trim().parse().map_err(|e| format!("bad real part: {e}"))?,
            0.0,
        )),
        [re, im] => Ok(Complex64::new(
            re.trim().parse().map_err(|e| format!("bad real part: {e}"))?,
            im.trim().parse().map_err(|e| format!("bad imaginary part: {e}"))?,
        )),
        _ => Err("complex value must be \"re\" or \"re,im\"".into()),
    }
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| "tolerance override must be name=value".to_string())?;
    let v: f64 = value.parse().map_err(|e| format!("bad tolerance: {e}"))?;
    Ok((name.to_string(), v))
}

fn parse_steps(s: &str) -> Result<[f64; 3], String> {
    let parts: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let parts = parts.map_err(|e| format!("bad step: {e}"))?;
    if parts.len() != 3 || parts.iter().any(|&h| h <= 0.0) {
        return Err("expected three positive steps \"h1,h2,h3\"".into());
    }
    Ok([parts[0], parts[1], parts[2]])
}

enum CliError {
    /// Validation/usage problems → exit 2.
    Usage(String),
    /// Singular time → exit 3.
    Singular(String),
    /// Internal errors and failed checks → exit 1.
    Failed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("io error: {e}"))
    }
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::SingularTime => CliError::Singular(e.to_string()),
        EvalError::NotKreinAdler | EvalError::NearPole | EvalError::TruncationTooSmall { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Failed(other.to_string()),
    }
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Singular(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Qpoly {
            sigma,
            format,
            output,
        } => {
            let table = build_qtable(&sigma.sigma);
            let text = match format {
                Format::Json => {
                    serde_json::to_string_pretty(&table)
                        .map_err(|e| CliError::Failed(e.to_string()))?
                        + "\n"
                }
                Format::Text | Format::Csv => render::qtable_text(&table),
            };
            emit(&text, &output)
        }
        Command::Propagator {
            sigma,
            x,
            y,
            t,
            t_im,
            grid_x,
            grid_y,
            output,
        } => {
            let model = PropagatorModel::build(&sigma.sigma);
            let tc = Complex64::new(t, t_im);
            match (grid_x, grid_y) {
                (None, None) => {
                    let k = model
                        .k_sigma(Complex64::new(x, 0.0), Complex64::new(y, 0.0), tc)
                        .map_err(eval_error)?;
                    emit(
                        &format!("K_re = {:.16e}\nK_im = {:.16e}\n", k.re, k.im),
                        &output,
                    )
                }
                (gx, gy) => {
                    let xs = gx.map_or_else(|| vec![x], |g| g.values());
                    let ys = gy.map_or_else(|| vec![y], |g| g.values());
                    let mut csv = String::from("x,y,t_re,t_im,K_re,K_im\n");
                    for &xv in &xs {
                        for &yv in &ys {
                            let k = model
                                .k_sigma(
                                    Complex64::new(xv, 0.0),
                                    Complex64::new(yv, 0.0),
                                    tc,
                                )
                                .map_err(eval_error)?;
                            writeln!(
                                csv,
                                "{xv:.16e},{yv:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                                tc.re, tc.im, k.re, k.im
                            )
                            .expect("string write");
                        }
                    }
                    emit(&csv, &output)
                }
            }
        }
        Command::Potential {
            sigma,
            grid,
            output,
        } => {
            let pot = potential(&sigma.sigma).map_err(eval_error)?;
            let mut text = format!(
                "V(x) = x^2/4 + ({})/({})\n",
                pot.v_num, pot.v_den
            );
            if let Some(g) = grid {
                text.push_str("# x V(x)\n");
                for xv in g.values() {
                    writeln!(text, "{xv:.16e} {:.16e}", pot.eval(xv)).expect("string write");
                }
            }
            emit(&text, &output)
        }
        Command::Green {
            sigma,
            x,
            y,
            e_re,
            e_im,
            trunc,
        } => {
            let model = PropagatorModel::build(&sigma.sigma);
            let g = green_function(&model, x, y, Complex64::new(e_re, e_im), trunc)
                .map_err(eval_error)?;
            println!("relation_re = {:.16e}", g.relation.re);
            println!("relation_im = {:.16e}", g.relation.im);
            println!("direct_re   = {:.16e}", g.direct.re);
            println!("direct_im   = {:.16e}", g.direct.im);
            println!("difference  = {:.3e}", (g.relation - g.direct).norm());
            Ok(())
        }
        Command::Verify {
            sigma,
            suite,
            lambda,
            output,
            seed,
            trunc,
            fd_steps,
            tolerances,
        } => run_verify(sigma, suite, lambda, output, seed, trunc, fd_steps, tolerances),
        Command::Xmehler {
            sigma,
            lambda,
            trunc,
        } => {
            let cfg = VerifyConfig {
                xmehler_lambdas: vec![lambda],
                xmehler_trunc: trunc,
                ..VerifyConfig::default()
            };
            let report = verify::suite_xmehler(&sigma.sigma, &cfg)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            println!(
                "x-mehler sigma={} lambda={lambda} trunc={trunc}: {} (worst residual {:.3e})",
                sigma.sigma,
                render::status_str(&report),
                report.worst_residual
            );
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Failed("x-mehler residual above tolerance".into()))
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    sigmas: Vec<LevelSequence>,
    suite: Suite,
    lambda: Option<Complex64>,
    output: Option<PathBuf>,
    seed: u64,
    trunc: Option<u32>,
    fd_steps: Option<[f64; 3]>,
    tolerances: Vec<(String, f64)>,
) -> Result<(), CliError> {
    let mut cfg = VerifyConfig {
        seed,
        ..VerifyConfig::default()
    };
    if let Some(lam) = lambda {
        cfg.mehler_lambda = lam;
        cfg.xmehler_lambdas = vec![lam];
    }
    if let Some(n) = trunc {
        cfg.mehler_truncs = [n / 3 + 1, 2 * n / 3 + 1, n];
        cfg.xmehler_trunc = n;
        cfg.green_trunc = n;
    }
    if let Some(steps) = fd_steps {
        cfg.schrodinger_steps = steps;
    }
    for (name, value) in &tolerances {
        match name.as_str() {
            "closed-form" => cfg.tolerances.closed_form_rel = *value,
            "schrodinger" => cfg.tolerances.schrodinger_final = *value,
            "mehler" => cfg.tolerances.mehler = *value,
            "xmehler" => cfg.tolerances.xmehler = *value,
            "green" => cfg.tolerances.green_agree = *value,
            "eigen" => cfg.tolerances.eigen_residual = *value,
            "gram" => cfg.tolerances.gram_dev = *value,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown tolerance name '{other}'"
                )))
            }
        }
    }
    let sigmas = if sigmas.is_empty() {
        default_sigmas()
    } else {
        sigmas
    };

    let reports = match suite {
        Suite::All => verify::run_all(&sigmas, &cfg),
        Suite::Mehler => vec![verify::suite_mehler(&cfg)
            .map_err(|e| CliError::Usage(e.to_string()))?],
        Suite::Umbral => vec![verify::suite_umbral(12)],
        _ => {
            let mut out = Vec::new();
            for s in &sigmas {
                let report = match suite {
                    Suite::Qtable => verify::suite_qtable(s, &cfg.tolerances),
                    Suite::Sumrule => verify::suite_sum_rule(s),
                    Suite::Lemma => verify::suite_lemma(s, &cfg),
                    Suite::Parity => verify::suite_parity(s),
                    Suite::Deltav => verify::suite_deltav(s),
                    Suite::Potential => verify::suite_potential(s, &cfg.tolerances),
                    Suite::Propagator => verify::suite_closed_form(s, &cfg),
                    Suite::Schrodinger => verify::suite_schrodinger(s, &cfg),
                    Suite::Xmehler => verify::suite_xmehler(s, &cfg)
                        .map_err(|e| CliError::Usage(e.to_string()))?,
                    Suite::Green => verify::suite_green(s, &cfg),
                    Suite::Eigen => verify::suite_eigen(s, &cfg),
                    Suite::All | Suite::Mehler | Suite::Umbral => unreachable!(),
                };
                out.push(report);
            }
            out
        }
    };

    for r in &reports {
        println!(
            "{:24} sigma={:?}: {} (worst residual {:.3e}, tolerance {:.1e})",
            r.check,
            r.sigma,
            render::status_str(r),
            r.worst_residual,
            r.tolerance
        );
    }
    if let Some(path) = output {
        let json =
            serde_json::to_string_pretty(&reports).map_err(|e| CliError::Failed(e.to_string()))?;
        std::fs::write(path, json + "\n")?;
    }
    if reports.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(CliError::Failed("one or more checks failed".into()))
    }
}

fn default_sigmas() -> Vec<LevelSequence> {
    [vec![1u32, 2], vec![2, 3], vec![3, 4], vec![1, 2, 3, 4]]
        .into_iter()
        .map(|l| LevelSequence::new(l).expect("valid defaults"))
        .collect()
}
