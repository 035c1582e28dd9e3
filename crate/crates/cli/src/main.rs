use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use imstep::adaptive::{integrate_adaptive, integrate_fixed, integrate_residual_bpl, ResidualConfig};
use imstep::bpl::DEFAULT_GAUSS_POINTS;
use imstep::flows::ButcherTableau;
use imstep::harness::{
    build_method, run_comparison, run_convergence_study, write_comparison_csv, write_convergence_csv, write_trace_csv,
    ComparisonMode,
};
use imstep::problems::{make_problem, parse_config, Params};
use imstep::stability::{base_magnitude, composed_magnitude, scan_region, write_stability_csv, Region};
use imstep::{AdaptiveConfig, BplFlow, Error, IntegrationTrace, ProblemSpec};

const EXIT_INTEGRATION: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "imstep", version, about = "Complex double composition experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-step runs over decreasing step sizes; writes errors and rates.
    Converge {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        composed: bool,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stability magnitudes of a tableau and its composition on a grid.
    Stability {
        #[arg(long)]
        scheme: String,
        /// xmin,xmax,ymin,ymax
        #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, default_value = "-5,1,-4,4")]
        bounds: Vec<f64>,
        #[arg(long, default_value_t = 201)]
        nx: usize,
        #[arg(long, default_value_t = 201)]
        ny: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// One run, fixed or adaptive; writes the trace.
    Integrate {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        composed: bool,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, conflicts_with = "tau")]
        adaptive: bool,
        /// Residual-controlled stepping (BPL schemes only).
        #[arg(long, conflicts_with_all = ["tau", "adaptive"])]
        residual: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        tau0: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Several schemes on the same grid.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        schemes: Vec<String>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_delimiter = ',', conflicts_with = "adaptive", required_unless_present = "adaptive")]
        taus: Vec<f64>,
        /// tol:tau0 pairs, comma separated.
        #[arg(long, value_delimiter = ',')]
        adaptive: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    problem: Option<String>,
    /// `key = value` lines; `name` selects the problem.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides a problem parameter; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

impl ProblemArgs {
    fn resolve(&self) -> Result<ProblemSpec, Error> {
        let (mut name, mut params) = (None, Params::new());
        if let Some(path) = &self.config {
            let cfg = parse_config(&std::fs::read_to_string(path)?)?;
            name = cfg.name;
            params = cfg.params;
        }
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("'{v}' is not a number")))?;
            params.insert(k.trim().to_string(), v);
        }
        let name = self
            .problem
            .clone()
            .or(name)
            .ok_or_else(|| Error::InvalidParameter("no problem given (use --problem or a config name)".into()))?;
        make_problem(&name, &params)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::UnknownScheme(_)
            | Error::UnknownProblem(_)
            | Error::InvalidParameter(_)
            | Error::InvalidOrder(_)
            | Error::Io(_)
    )
}

/// Writes the (possibly partial) trace, then reports an early stop.
fn finish_trace(mut trace: IntegrationTrace, spec: &ProblemSpec, out: &Path) -> Result<usize, Error> {
    let failure = trace.failure.take();
    spec.annotate(&mut trace)?;
    write_trace_csv(create(out)?, &trace)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(trace.records.len()),
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Converge { scheme, composed, problem, taus, out } => {
            let spec = problem.resolve()?;
            let method = build_method(&scheme, composed)?;
            let report = run_convergence_study(&method, &spec, &taus)?;
            write_convergence_csv(create(&out)?, &report)?;
            if let Some(roc) = report.roc_values.last() {
                println!("{} on {}: final ROC {roc:.3}", report.scheme, report.problem);
            }
        }
        Command::Stability { scheme, bounds, nx, ny, out } => {
            let [xmin, xmax, ymin, ymax] = bounds[..] else {
                return Err(Error::InvalidParameter("--box needs xmin,xmax,ymin,ymax".into()));
            };
            if !(xmin < xmax && ymin < ymax) {
                return Err(Error::InvalidParameter("--box bounds must be increasing".into()));
            }
            let tab = ButcherTableau::by_name(&scheme, None)?;
            let region = Region { xmin, xmax, ymin, ymax };
            let base = scan_region(base_magnitude(&tab), region, nx, ny)?;
            let comp = scan_region(composed_magnitude(&tab)?, region, nx, ny)?;
            write_stability_csv(create(&out)?, &base, &comp)?;
        }
        Command::Integrate { scheme, composed, problem, adaptive, residual, tol, tau0, tau, out } => {
            let spec = problem.resolve()?;
            let trace = if residual {
                let p: usize = scheme
                    .strip_prefix("bpl")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("--residual needs a bpl<p> scheme, got '{scheme}'")))?;
                let flow = BplFlow::new(p, DEFAULT_GAUSS_POINTS)?;
                let cfg = ResidualConfig::new(
                    tol.ok_or_else(|| Error::InvalidParameter("--residual needs --tol".into()))?,
                    tau0.unwrap_or(1e-3),
                    spec.t0,
                    spec.t_end,
                );
                integrate_residual_bpl(&flow, spec.system(), spec.t0, &spec.y0, &cfg)
            } else if adaptive {
                let method = build_method(&scheme, composed)?;
                let tol = tol.ok_or_else(|| Error::InvalidParameter("--adaptive needs --tol".into()))?;
                let cfg = AdaptiveConfig::new(tol, tau0.unwrap_or(1e-2), spec.t0, spec.t_end);
                integrate_adaptive(&method, spec.system(), spec.t0, &spec.y0, &cfg)
            } else {
                let method = build_method(&scheme, composed)?;
                let tau = tau.ok_or_else(|| Error::InvalidParameter("give --tau or --adaptive".into()))?;
                integrate_fixed(&method, spec.system(), spec.t0, &spec.y0, tau, spec.t_end)
            };
            let steps = finish_trace(trace, &spec, &out)?;
            println!("{steps} steps written to {}", out.display());
        }
        Command::Compare { schemes, problem, taus, adaptive, out } => {
            let spec = problem.resolve()?;
            let mode = if adaptive.is_empty() {
                ComparisonMode::Fixed(taus)
            } else {
                let pairs = adaptive
                    .iter()
                    .map(|s| {
                        let (a, b) = s
                            .split_once(':')
                            .ok_or_else(|| Error::InvalidParameter(format!("expected tol:tau0, got '{s}'")))?;
                        let parse = |x: &str| {
                            x.parse::<f64>()
                                .map_err(|_| Error::InvalidParameter(format!("'{x}' is not a number")))
                        };
                        Ok((parse(a)?, parse(b)?))
                    })
                    .collect::<Result<_, Error>>()?;
                ComparisonMode::Adaptive(pairs)
            };
            let names: Vec<&str> = schemes.iter().map(String::as_str).collect();
            let rows = run_comparison(&names, &spec, &mode)?;
            write_comparison_csv(create(&out)?, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_usage(&e) { EXIT_USAGE } else { EXIT_INTEGRATION })
        }
    }
}
