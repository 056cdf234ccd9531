//! Command-line front end: verification suites, heat-semigroup trace-norm
//! tables, truncation-convergence studies and Young-constant estimates,
//! all emitted as deterministic JSON/CSV report files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fock_qha::error::FockError;
use fock_qha::fock::BasisTruncation;
use fock_qha::operators::{
    heat_semigroup, heat_semigroup_trace_norm, toeplitz_quadrature, FockOperator,
};
use fock_qha::quadrature::build_grid;
use fock_qha::report::{atomic_write, OutputFormat, RunConfig, SymbolSpec};
use fock_qha::spectral::{convergence_table, spectral_summary};
use fock_qha::verify::{estimate_c_pi, run_suite, write_outcome, CheckConfig, Suite};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fock-qha",
    about = "Numerical verification toolkit for Toeplitz operators and \
             quantum-harmonic-analysis convolutions on the Fock space",
    version
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run-configuration file; explicit flags take precedence over
    /// it, and it takes precedence over the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Complex dimension of the underlying space C^n.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Maximum total degree K of the basis truncation.
    #[arg(long = "deg", global = true)]
    deg: Option<usize>,

    /// Quadrature points per real axis.
    #[arg(long = "quad", global = true)]
    quad: Option<usize>,

    /// Default check tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Output directory for report files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Payload format for tables and operators.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Symbol name: one, heat, gaussian, oscillatory, radial-power, bump.
    #[arg(long, global = true)]
    symbol: Option<String>,

    /// Gaussian parameter xi as `re` or `re,im` (with --symbol gaussian).
    #[arg(long, global = true, allow_hyphen_values = true)]
    xi: Option<String>,

    /// Time parameter(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    t: Vec<f64>,

    /// Schatten exponent(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Vec<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Heat-semigroup table: closed-form and numeric trace norms over a
    /// range of times (use --t).
    PhiTable,
    /// Run a verification suite: bc, schatten, identities, frontier,
    /// compactness or c-pi.
    Verify { suite: String },
    /// Truncation-convergence study of the selected symbol's Toeplitz
    /// operator.
    Convergence {
        /// Truncation degrees, comma separated and strictly increasing.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        ks: Vec<usize>,
    },
    /// Empirical estimate of the convolution Young constant.
    CPi,
}

fn parse_symbol_spec(common: &CommonArgs) -> Result<Option<SymbolSpec>, String> {
    let Some(name) = &common.symbol else {
        return Ok(None);
    };
    let spec = match name.as_str() {
        "one" => SymbolSpec::One,
        "heat" => {
            let t = common
                .t
                .first()
                .copied()
                .ok_or("--symbol heat requires --t")?;
            SymbolSpec::Heat { t }
        }
        "gaussian" => {
            let xi = common
                .xi
                .as_deref()
                .ok_or("--symbol gaussian requires --xi")?;
            let (re, im) = parse_complex(xi)?;
            SymbolSpec::Gaussian { re, im }
        }
        "oscillatory" => SymbolSpec::Oscillatory {
            freq: 2.0 * std::f64::consts::PI,
        },
        "radial-power" => SymbolSpec::RadialPower { degree: 1 },
        "bump" => SymbolSpec::Bump,
        other => return Err(format!("unknown symbol '{other}'")),
    };
    Ok(Some(spec))
}

fn parse_complex(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [re] => Ok((
            re.trim().parse().map_err(|e| format!("bad --xi: {e}"))?,
            0.0,
        )),
        [re, im] => Ok((
            re.trim().parse().map_err(|e| format!("bad --xi: {e}"))?,
            im.trim().parse().map_err(|e| format!("bad --xi: {e}"))?,
        )),
        _ => Err("--xi expects `re` or `re,im`".into()),
    }
}

/// Precedence: explicit CLI flags > config file > built-in defaults.
fn run_config(common: &CommonArgs) -> Result<RunConfig, String> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| format!("cannot parse {}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(n) = common.n {
        config.n = n;
    }
    if let Some(deg) = common.deg {
        config.k_max = deg;
    }
    if let Some(quad) = common.quad {
        config.quad_points = quad;
    }
    if let Some(tol) = common.tol {
        config.tol = tol;
    }
    if let Some(format) = common.format {
        config.format = format.into();
    }
    if let Some(spec) = parse_symbol_spec(common)? {
        config.symbol = Some(spec);
    }
    if !common.t.is_empty() {
        config.t_grid = common.t.clone();
    }
    if !common.p.is_empty() {
        config.p_grid = common.p.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let config = match run_config(&cli.common) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match &cli.command {
        Command::PhiTable => cmd_phi_table(&cli.common, &config),
        Command::Verify { suite } => cmd_verify(suite, &cli.common, &config),
        Command::Convergence { ks } => cmd_convergence(ks, &cli.common, &config),
        Command::CPi => cmd_c_pi(&cli.common, &config),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                FockError::Unconverged(_) => ExitCode::from(EXIT_UNCONVERGED),
                FockError::InvalidArgument(_) | FockError::SemigroupParameter { .. } => {
                    ExitCode::from(EXIT_USAGE)
                }
                _ => ExitCode::from(EXIT_CHECK_FAILED),
            }
        }
    }
}

fn config_header(config: &RunConfig) -> String {
    format!(
        "# config n={} k_max={} quad_points={} tol={}\n",
        config.n, config.k_max, config.quad_points, config.tol
    )
}

/// t, closed-form trace norm, numeric trace norm at K, op norm, deficit.
fn cmd_phi_table(common: &CommonArgs, config: &RunConfig) -> Result<ExitCode, FockError> {
    let times = if common.t.is_empty() {
        vec![-0.25, -0.1, 0.0, 0.5, 1.0, 3.0]
    } else {
        common.t.clone()
    };
    for &t in &times {
        if t <= -0.5 {
            return Err(FockError::SemigroupParameter {
                t,
                reason: "at t = -1/2 the semigroup member is no longer trace-class \
                         (it remains bounded with operator norm 2^n); the table \
                         requires t > -1/2"
                    .into(),
            });
        }
    }
    let trunc = BasisTruncation::new(config.n, config.k_max)?;
    let mut csv = config_header(config);
    csv.push_str("t,trace_norm_closed,trace_norm_numeric,op_norm,deficit\n");
    let mut rows = Vec::new();
    for &t in &times {
        let op = heat_semigroup(t, &trunc)?;
        let closed = heat_semigroup_trace_norm(t, config.n);
        let summary = spectral_summary(&FockOperator::Diagonal(op), &[1.0])?;
        let numeric = summary.schatten_norm(1.0).unwrap();
        let deficit = closed - numeric;
        csv.push_str(&format!(
            "{t},{closed},{numeric},{},{deficit}\n",
            summary.op_norm
        ));
        rows.push(serde_json::json!({
            "t": t,
            "trace_norm_closed": closed,
            "trace_norm_numeric": numeric,
            "op_norm": summary.op_norm,
            "deficit": deficit,
        }));
    }
    atomic_write(&common.out.join("phi_table.csv"), csv.as_bytes())?;
    if config.format == OutputFormat::Json {
        let doc = serde_json::json!({
            "schema": fock_qha::report::REPORT_SCHEMA,
            "table": "phi-table",
            "config": config,
            "rows": rows,
        });
        atomic_write(
            &common.out.join("phi_table.json"),
            serde_json::to_string_pretty(&doc)?.as_bytes(),
        )?;
    }
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: &str, common: &CommonArgs, config: &RunConfig) -> Result<ExitCode, FockError> {
    let Some(suite) = Suite::parse(suite) else {
        eprintln!(
            "error: unknown suite '{suite}'; expected one of bc, schatten, identities, \
             frontier, compactness, c-pi"
        );
        return Ok(ExitCode::from(EXIT_USAGE));
    };
    let outcome = run_suite(suite, config)?;
    let (json_path, csv_path) = write_outcome(&common.out, &outcome, config)?;
    for report in &outcome.reports {
        let tag = if report.advisory {
            "ADVISORY"
        } else if report.passed {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "[{tag}] {}: residual {:.3e} (tolerance {:.3e})",
            report.check_id, report.residual, report.tolerance
        );
    }
    for item in &outcome.unconverged {
        println!("[UNCONVERGED] {item}");
    }
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    if !outcome.unconverged.is_empty() {
        return Ok(ExitCode::from(EXIT_UNCONVERGED));
    }
    if !outcome.all_non_advisory_passed() {
        return Ok(ExitCode::from(EXIT_CHECK_FAILED));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_convergence(
    ks: &[usize],
    common: &CommonArgs,
    config: &RunConfig,
) -> Result<ExitCode, FockError> {
    let spec = config.symbol.clone().unwrap_or(SymbolSpec::Heat { t: 1.0 });
    let quad = config.quad_points;
    let n = config.n;
    let table = convergence_table(
        |k| {
            let trunc = BasisTruncation::new(n, k)?;
            let symbol = spec.to_symbol(n)?;
            if let Some(xi) = symbol.gaussian_parameter() {
                return Ok(FockOperator::Diagonal(
                    fock_qha::operators::gaussian_toeplitz(xi, &trunc)?,
                ));
            }
            let grid = build_grid(n, quad.max(k + 8))?;
            Ok(FockOperator::Dense(toeplitz_quadrature(
                &symbol, &trunc, &grid,
            )?))
        },
        ks,
        &config.p_grid,
    )?;
    let mut csv = config_header(config);
    csv.push_str(&format!("# symbol {spec:?}\n"));
    csv.push_str(&table.to_csv_string());
    atomic_write(&common.out.join("convergence.csv"), csv.as_bytes())?;
    if config.format == OutputFormat::Json {
        let doc = serde_json::json!({
            "schema": fock_qha::report::REPORT_SCHEMA,
            "table": "convergence",
            "config": config,
            "rows": table.rows,
        });
        atomic_write(
            &common.out.join("convergence.json"),
            serde_json::to_string_pretty(&doc)?.as_bytes(),
        )?;
    }
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_c_pi(common: &CommonArgs, config: &RunConfig) -> Result<ExitCode, FockError> {
    let cfg = CheckConfig::from_run(config);
    let estimate = estimate_c_pi(&cfg, &config.p_grid)?;
    let mut csv = config_header(config);
    csv.push_str("kind,label,p,ratio\n");
    for s in &estimate.samples {
        csv.push_str(&format!("{},{},{},{}\n", s.kind, s.label, s.p, s.ratio));
    }
    atomic_write(&common.out.join("c_pi_samples.csv"), csv.as_bytes())?;
    let doc = serde_json::json!({
        "schema": fock_qha::report::REPORT_SCHEMA,
        "table": "c-pi",
        "config": config,
        "op_conv_lower_bound": estimate.op_conv_lower_bound,
        "fn_conv_norm_form_lower_bound": estimate.fn_conv_norm_form_lower_bound,
        "fn_conv_printed_form_lower_bound": estimate.fn_conv_printed_form_lower_bound,
        "samples": estimate.samples,
    });
    atomic_write(
        &common.out.join("c_pi.json"),
        serde_json::to_string_pretty(&doc)?.as_bytes(),
    )?;
    println!(
        "empirical lower bounds: operator-convolution {:.6}, \
         function-convolution (norm form) {:.6}, (printed form) {:.6}",
        estimate.op_conv_lower_bound,
        estimate.fn_conv_norm_form_lower_bound,
        estimate.fn_conv_printed_form_lower_bound
    );
    let all_passed = estimate.reports.iter().all(|r| r.passed);
    for report in &estimate.reports {
        println!(
            "[{}] {}: residual {:.3e}",
            if report.passed { "PASS" } else { "FAIL" },
            report.check_id,
            report.residual
        );
    }
    if all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_CHECK_FAILED))
    }
}
