use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pseudoboson::calogero::{CalogeroModel, ModelOptions};
use pseudoboson::config::{OutputFormat, SuiteConfig, SuiteSelector};
use pseudoboson::dsl::{apply_ast, parse_element, parse_opdsl, EvalContext, Value};
use pseudoboson::kernel::kernel_smoke_test;
use pseudoboson::opalg::ExpMode;
use pseudoboson::report::Report;
use pseudoboson::scalar::{parse_rational, rational_to_f64, Rational};
use pseudoboson::suite::run_suite;

#[derive(Parser)]
#[command(name = "pseudoboson", version, about = "Exact verification of pseudo-boson structures")]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Markdown,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Markdown => OutputFormat::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Qho,
    Calogero,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Truncated,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print its report.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Apply an operator expression to a vector.
    Apply {
        /// Operator expression, e.g. "exp(-1/(4*omega), OL)".
        expr: String,
        /// Polynomial part of the vector, e.g. "x1^2 + x2^2".
        #[arg(long)]
        to: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Power of the prefactor P carried by the vector.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        mu: String,
        /// Gaussian exponent `gamma` in exp(gamma * X2).
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        gamma: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Check the scaling commutators of OE, OL, X2 and LAP.
    Commutators {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Partial sums of the Hermite kernel (smoke test only).
    Kernel {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        omega: String,
        /// Highest Hermite index K.
        #[arg(long, default_value_t = 20)]
        order: usize,
        /// Sample points as `x,y` pairs separated by `;`.
        #[arg(long, default_value = "0.5,-0.5;1,0.25;0.3,0.3", allow_hyphen_values = true)]
        points: String,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    /// Particle count (2 or 3).
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    #[arg(long)]
    degmax: Option<String>,
    /// Truncation degree for formal series.
    #[arg(long, allow_hyphen_values = true)]
    cutoff: Option<String>,
    #[arg(long)]
    quad_order: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Step bound for exponential series.
    #[arg(long)]
    exp_bound: Option<String>,
    /// Accept nu <= 1/2.
    #[arg(long)]
    allow_nu: bool,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

impl ParamArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = [
            ("omega", &self.omega),
            ("beta", &self.beta),
            ("nu", &self.nu),
            ("n", &self.n),
            ("nmax", &self.nmax),
            ("degmax", &self.degmax),
            ("cutoff", &self.cutoff),
            ("quad_order", &self.quad_order),
            ("seed", &self.seed),
            ("exp_bound", &self.exp_bound),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect();
        if self.allow_nu {
            out.push(("allow_nu", "true".into()));
        }
        if self.inject_fault {
            out.push(("inject_fault", "true".into()));
        }
        out
    }
}

/// Failure that maps to exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn build_config(cli: &Cli, params: &ParamArgs, suite: Option<SuiteSelector>) -> Result<SuiteConfig, UsageError> {
    let mut cfg = SuiteConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        cfg.apply_file(&text)?;
    }
    if let Some(s) = suite {
        cfg.suite = s;
    }
    for (k, v) in params.pairs() {
        cfg.set(k, &v)?;
    }
    if let Some(f) = cli.format {
        cfg.format = f.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(report: &Report, format: OutputFormat) -> ExitCode {
    let text = match format {
        OutputFormat::Json => report.to_json() + "\n",
        OutputFormat::Markdown => report.to_markdown(),
    };
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn rational(name: &str, text: &str) -> Result<Rational, UsageError> {
    parse_rational(text).map_err(|e| UsageError(format!("{name}: {e}")))
}

fn parse_points(text: &str) -> Result<Vec<(f64, f64)>, UsageError> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| UsageError(format!("point '{pair}' is not of the form x,y")))?;
            Ok((x.trim().parse::<f64>()?, y.trim().parse::<f64>()?))
        })
        .collect()
}

fn run(cli: &Cli) -> Result<ExitCode, UsageError> {
    match &cli.command {
        Command::Verify { suite, params } => {
            let sel = match suite {
                SuiteArg::Qho => SuiteSelector::Qho,
                SuiteArg::Calogero => SuiteSelector::Calogero,
                SuiteArg::All => SuiteSelector::All,
            };
            let cfg = build_config(cli, params, Some(sel))?;
            let report = run_suite(&cfg)?;
            Ok(emit(&report, cfg.format))
        }
        Command::Commutators { params } => {
            let cfg = build_config(cli, params, None)?;
            let opts = ModelOptions {
                allow_nu: cfg.allow_nu,
                corrupt_ol: cfg.inject_fault,
            };
            let model = CalogeroModel::new(cfg.n, cfg.omega.clone(), cfg.nu.clone(), opts)?;
            let mut report = Report::new("commutators", cfg.params());
            report.extend(model.commutator_suite(cfg.degmax));
            Ok(emit(&report, cfg.format))
        }
        Command::Apply {
            expr,
            to,
            mode,
            mu,
            gamma,
            params,
        } => {
            let cfg = build_config(cli, params, None)?;
            let ctx = EvalContext::new(cfg.n, cfg.omega.clone(), cfg.nu.clone())?;
            let ast = parse_opdsl(expr, cfg.n)?;
            let f = parse_element(to, &ctx, &rational("mu", mu)?, &rational("gamma", gamma)?)?;
            let mode = match mode {
                ModeArg::Exact => ExpMode::Exact { bound: cfg.exp_bound },
                ModeArg::Truncated => ExpMode::Truncated {
                    bound: cfg.exp_bound,
                    cutoff: cfg.cutoff,
                },
            };
            match apply_ast(&ast, &Value::Element(f), &ctx, mode) {
                Ok(v) => {
                    let _ = writeln!(std::io::stdout(), "{v}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Kernel { omega, order, points } => {
            let omega = rational("omega", omega)?;
            let pts = parse_points(points)?;
            let mut params = std::collections::BTreeMap::new();
            params.insert("omega".to_string(), omega.to_string());
            params.insert("order".to_string(), order.to_string());
            let mut report = Report::new("kernel", params);
            report.extend(kernel_smoke_test(rational_to_f64(&omega), *order, &pts));
            Ok(emit(&report, cli.format.map_or(OutputFormat::Json, Into::into)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
