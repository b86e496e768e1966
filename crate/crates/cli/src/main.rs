//! `qmckit`: evaluate solution families, run verification suites, and build
//! q-middle convolutions from tuple files.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a verification relation failed |
//! | 2 | point outside the domain of a formula (convergence, pole) |
//! | 3 | a series or product did not converge within the truncation budget |
//! | 4 | unknown family name |
//! | 5 | invalid configuration, parameters or command line |
//! | 6 | malformed tuple or report file |
//! | 7 | `𝒦 + ℒ` is not invariant under the convolved tuple |
//! | 8 | the scalar reduction hit a singular elimination step |
//! | 9 | I/O failure writing output |

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;

use qmckit::jackson::QParams;
use qmckit::qmc::{
    qconvolve, qmiddle_convolve, reduce_to_scalar, subspace_k, subspace_l, MatrixTuple, DEFAULT_KERNEL_TOL,
};
use qmckit::relations::{reports_to_csv, reports_to_json, RelationReport};
use qmckit::solutions::{eval_qappell_solution, eval_solution, FamilyTag, SolutionFamily};
use qmckit::suite::{all_passed, run_suite, RunConfig, Suite};
use qmckit::tuple_file::{read_tuple, write_tuple, TupleFile};
use qmckit::variant::VariantParams;
use qmckit::{QError, Truncation};

#[derive(Parser)]
#[command(
    name = "qmckit",
    version,
    about = "q-series, q-middle convolution and the degree-2 variant equation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one solution family at a point and print "re im".
    Eval(EvalArgs),
    /// Run a verification suite and write JSON and CSV reports.
    Verify(VerifyArgs),
    /// Summarize a JSON report written by `verify`.
    Report(ReportArgs),
    /// Middle-convolve a tuple file and print the kernel dimensions.
    Qmc(QmcArgs),
}

/// Complex numbers are written `re` or `re,im`.
fn parse_c64(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    match parts.as_slice() {
        [r] => Ok(C64::new(num(r)?, 0.0)),
        [r, i] => Ok(C64::new(num(r)?, num(i)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Family name, e.g. y_beta1, f35, a2_10, g_qappell.
    family: String,
    #[arg(long, value_parser = parse_c64)]
    x: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.5")]
    q: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.3")]
    lambda: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.7")]
    alpha1: C64,
    #[arg(long, value_parser = parse_c64, default_value = "1.9")]
    alpha2: C64,
    #[arg(long, value_parser = parse_c64, default_value = "2.3")]
    beta1: C64,
    #[arg(long, value_parser = parse_c64, default_value = "3.1")]
    beta2: C64,
    /// Variant-equation exponents and scales (g_qappell only).
    #[arg(long, value_parser = parse_c64, default_value = "0.3")]
    h1: C64,
    #[arg(long, value_parser = parse_c64, default_value = "-0.2")]
    h2: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.4")]
    l1: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.1")]
    l2: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.7")]
    k1: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.25")]
    k2: C64,
    #[arg(long, value_parser = parse_c64, default_value = "1.3")]
    t1: C64,
    #[arg(long, value_parser = parse_c64, default_value = "0.8")]
    t2: C64,
    /// JSON config; only its `truncation` is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of series, qmc, solutions, props, theorem41, all.
    suite: String,
    /// JSON run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    identity_samples: Option<usize>,
    #[arg(long)]
    pseudo_samples: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    q_range: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    exponent_range: Option<Vec<f64>>,
    /// Directory for `<suite>.json` and `<suite>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON report written by `verify`.
    report: PathBuf,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct QmcArgs {
    tuple_file: PathBuf,
    /// Overrides the λ stored in the file.
    #[arg(long, value_parser = parse_c64)]
    lambda: Option<C64>,
    /// Overrides the q stored in the file.
    #[arg(long, value_parser = parse_c64)]
    q: Option<C64>,
    /// Output tuple path; defaults to `<tuple_file>.mc.txt`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_KERNEL_TOL)]
    tol: f64,
}

/// A failure with its exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl From<QError> for Fail {
    fn from(e: QError) -> Self {
        let code = match &e {
            e if e.is_domain() => 2,
            QError::TruncationFailure(_) => 3,
            QError::Parse { .. } => 6,
            QError::QuotientNotInvariant(_) => 7,
            QError::EliminationSingular(_) => 8,
            _ => 5,
        };
        Fail {
            code,
            msg: e.to_string(),
        }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Fail {
    Fail {
        code: 9,
        msg: format!("{}: {e}", path.display()),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Fail> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Fail {
                code: 5,
                msg: format!("{}: {e}", p.display()),
            })?;
            Ok(RunConfig::from_json(&text)?)
        }
    }
}

fn cmd_eval(a: EvalArgs) -> Result<u8, Fail> {
    let tag: FamilyTag = a.family.parse().map_err(|_| Fail {
        code: 4,
        msg: format!(
            "unknown family {:?}; known: {}",
            a.family,
            FamilyTag::ALL.iter().map(|t| t.name()).collect::<Vec<_>>().join(", ")
        ),
    })?;
    let t: Truncation = load_config(a.config.as_deref())?.truncation;
    let v = if tag == FamilyTag::GQAppell {
        let vp = VariantParams::new(a.q, a.h1, a.h2, a.l1, a.l2, a.k1, a.k2, a.t1, a.t2)?;
        eval_qappell_solution(&vp, a.x, &t)?
    } else {
        let p = QParams::new(a.q, a.lambda, a.alpha1, a.alpha2, a.beta1, a.beta2)?;
        eval_solution(&SolutionFamily::new(tag, p)?, a.x, &t)?
    };
    println!("{:e} {:e}", v.re, v.im);
    Ok(0)
}

fn write_reports(dir: &Path, stem: &str, reports: &[RelationReport]) -> Result<(), Fail> {
    std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&json, reports_to_json(reports)).map_err(|e| io_fail(&json, e))?;
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, reports_to_csv(reports)).map_err(|e| io_fail(&csv, e))?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, Fail> {
    let suite: Suite = a.suite.parse()?;
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.samples {
        cfg.samples_per_relation = n;
    }
    if let Some(n) = a.identity_samples {
        cfg.identity_samples = n;
    }
    if let Some(n) = a.pseudo_samples {
        cfg.pseudo_samples = n;
    }
    if let Some(r) = a.q_range {
        cfg.q_range = [r[0], r[1]];
    }
    if let Some(r) = a.exponent_range {
        cfg.exponent_range = [r[0], r[1]];
    }
    if let Some(o) = a.out {
        cfg.output_dir = o;
    }
    cfg.validate()?;
    let reports = run_suite(suite, &cfg)?;
    write_reports(&cfg.output_dir, suite.name(), &reports)?;
    print!("{}", reports_to_csv(&reports));
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        Ok(0)
    } else {
        eprintln!("{failed} of {} relations failed", reports.len());
        Ok(1)
    }
}

fn cmd_report(a: ReportArgs) -> Result<u8, Fail> {
    let text = std::fs::read_to_string(&a.report).map_err(|e| Fail {
        code: 6,
        msg: format!("{}: {e}", a.report.display()),
    })?;
    let reports: Vec<RelationReport> = serde_json::from_str(&text).map_err(|e| Fail {
        code: 6,
        msg: format!("{}: {e}", a.report.display()),
    })?;
    match a.format.as_str() {
        "csv" => print!("{}", reports_to_csv(&reports)),
        "json" => println!("{}", reports_to_json(&reports)),
        other => {
            return Err(Fail {
                code: 5,
                msg: format!("unknown format {other:?}; expected csv or json"),
            })
        }
    }
    Ok(if all_passed(&reports) { 0 } else { 1 })
}

#[derive(Serialize)]
struct ScalarEquation {
    /// Coefficients in increasing degree, each `[re, im]`.
    down: Vec<[f64; 2]>,
    up: Vec<[f64; 2]>,
    mid: Vec<[f64; 2]>,
    nonhom: Vec<[f64; 2]>,
}

fn cmd_qmc(a: QmcArgs) -> Result<u8, Fail> {
    let tf = read_tuple(&a.tuple_file)?;
    let q = a.q.unwrap_or(tf.q);
    let lambda = a.lambda.unwrap_or(tf.lambda);
    let out = a.out.unwrap_or_else(|| {
        let mut s = a.tuple_file.clone().into_os_string();
        s.push(".mc.txt");
        PathBuf::from(s)
    });
    let mc = match qmiddle_convolve(&tf.tuple, lambda, q, a.tol) {
        Ok(mc) => mc,
        Err(QError::InvalidParameters(_)) => {
            // 𝒦 + ℒ is the whole space: nothing to write
            let dim_k = subspace_k(&tf.tuple, a.tol).dim();
            let dim_l = subspace_l(&qconvolve(&tf.tuple, lambda, q)?, lambda, q, a.tol)?.dim();
            println!("dim K = {dim_k}, dim L = {dim_l}, size 0");
            return Ok(0);
        }
        Err(e) => return Err(e.into()),
    };
    println!("dim K = {}, dim L = {}, size {}", mc.dim_k, mc.dim_l, mc.tuple.m);
    write_tuple(
        &out,
        &TupleFile {
            q,
            lambda,
            tuple: mc.tuple.clone(),
        },
    )?;
    println!("wrote {}", out.display());
    if is_degree2_shape(&mc.tuple) {
        let eq = reduce_to_scalar(&mc.tuple, q)?.normalized();
        let pairs = |p: &qmckit::poly::Poly| p.coeffs().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
        let se = ScalarEquation {
            down: pairs(&eq.coeff_down),
            up: pairs(&eq.coeff_up),
            mid: pairs(&eq.coeff_mid),
            nonhom: pairs(&eq.nonhom),
        };
        let mut s = out.clone().into_os_string();
        s.push(".scalar.json");
        let path = PathBuf::from(s);
        let text = serde_json::to_string_pretty(&se).expect("plain data serializes");
        std::fs::write(&path, text).map_err(|e| io_fail(&path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

/// A 2×2 quotient tuple with two finite poles reduces to one scalar second-order equation.
fn is_degree2_shape(t: &MatrixTuple) -> bool {
    t.m == 2 && t.n_poles() == 2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 5,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Report(a) => cmd_report(a),
        Cmd::Qmc(a) => cmd_qmc(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
