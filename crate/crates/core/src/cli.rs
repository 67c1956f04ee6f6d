//! Command-line front end.
//!
//! Every command prints JSON (default) or a text rendering on stdout and
//! reports failures on stderr. The exit code is the only success channel:
//!
//! | code | meaning                                  |
//! |------|------------------------------------------|
//! | 0    | success, certificates re-verified        |
//! | 1    | internal failure                         |
//! | 2    | the map is zero at the given precision   |
//! | 3    | insufficient precision                   |
//! | 64   | usage or parse error                     |
//!
//! With `--series-file`, each nonblank line is processed as its own input,
//! one output line per input, and the exit code is the largest one seen.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::ff::Prime;
use crate::series::{AnalyticMap, LaurentSeries};
use crate::stdgroup::{ball_index, demo_index_contradiction, ContradictionReport};
use crate::subgroups::{member, ExponentSet, MembershipVerdict};
use crate::units::{closure_enum, ClosureReport};
use crate::witness::{certify_multiples, certify_powers_of_two, Branch, Certificate, WitnessReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ZERO_AT_PRECISION: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "laurent-fp",
    version,
    about = "Arithmetic in F_p((X)) and non-membership certificates for support subgroups"
)]
pub struct Cli {
    /// The prime p (required)
    #[arg(long, global = true)]
    pub p: Option<u64>,

    /// Working precision N, used by `closure`
    #[arg(long, global = true, default_value_t = 64)]
    pub precision: i64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Read one series per line instead of --series
    #[arg(long, global = true)]
    pub series_file: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a power series at a point of the open unit disk
    Eval {
        #[arg(long)]
        series: Option<String>,
        #[arg(long)]
        at: String,
    },
    /// Decide membership in H ("H") or F[[X^l]] ("ell:L")
    Member {
        #[arg(long)]
        series: Option<String>,
        #[arg(long)]
        set: String,
    },
    /// Certify that a nonconstant map leaves a support subgroup
    Witness {
        #[command(subcommand)]
        kind: WitnessKind,
    },
    /// Enumerate the closure of <1 + X^l> modulo X^N (N from --precision)
    Closure {
        #[arg(long)]
        ell: u64,
    },
    /// Index of B(q^-l)^n in B(q^-k)^n
    Index {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        l: i64,
    },
    /// Worked demonstrations
    Demo {
        #[command(subcommand)]
        kind: DemoKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum WitnessKind {
    /// Target H, the series supported on powers of two
    #[command(alias = "powers-of-two")]
    Lemma31 {
        #[arg(long)]
        series: Option<String>,
    },
    /// Target F[[X^l]] with gcd(l, p) = 1
    #[command(alias = "multiples")]
    Thm14 {
        #[arg(long)]
        series: Option<String>,
        #[arg(long)]
        ell: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoKind {
    /// Index contradiction for a Lie structure on the closure of <1 + X^l>
    #[command(alias = "index-contradiction")]
    Thm12 {
        #[arg(long)]
        ell: u64,
    },
}

/// One rendered result.
struct Output {
    json: Value,
    text: String,
    code: i32,
}

impl Output {
    fn ok(value: impl Serialize, text: String) -> Self {
        Output {
            json: serde_json::to_value(value).expect("reports serialize"),
            text,
            code: EXIT_OK,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_precision() {
        return EXIT_PRECISION;
    }
    match e {
        Error::Parse { .. }
        | Error::NotPrime(_)
        | Error::NotCoprime { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidRange(_)
        | Error::NotInDisk(_)
        | Error::NegativeExponent(_)
        | Error::PrecisionRequired => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(outputs) => {
            let mut code = EXIT_OK;
            for o in outputs {
                let line = match cli.format {
                    Format::Json => o.json.to_string(),
                    Format::Text => o.text,
                };
                let _ = writeln!(out, "{line}");
                code = code.max(o.code);
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<Output>, Error> {
    let p = cli
        .p
        .ok_or_else(|| Error::InvalidArgument("--p is required".into()))
        .and_then(Prime::new)?;
    let per_series = |series: &Option<String>, f: &dyn Fn(LaurentSeries) -> Result<Output, Error>| {
        inputs(cli, series)?
            .into_iter()
            .map(|text| {
                let parsed = LaurentSeries::parse(p, &text);
                parsed.and_then(f).or_else(failure)
            })
            .collect::<Result<Vec<_>, Error>>()
    };
    match &cli.command {
        Command::Eval { series, at } => {
            let at = LaurentSeries::parse(p, at)?;
            per_series(series, &|f| {
                let value = f.eval(&at)?;
                Ok(Output::ok(json!({ "series": value }), value.to_string()))
            })
        }
        Command::Member { series, set } => {
            let set: ExponentSet = set.parse()?;
            per_series(series, &|f| {
                let verdict = member(&f, &set);
                Ok(Output::ok(verdict, render_verdict(&verdict)))
            })
        }
        Command::Witness { kind } => match kind {
            WitnessKind::Lemma31 { series } => per_series(series, &|f| {
                certificate(certify_powers_of_two(&AnalyticMap::from_series(&f)?)?)
            }),
            WitnessKind::Thm14 { series, ell } => {
                if *ell < 2 {
                    return Err(Error::InvalidArgument(format!("--ell {ell} must be at least 2")));
                }
                if num_integer::gcd(*ell, p.get()) != 1 {
                    return Err(Error::NotCoprime { ell: *ell, p: p.get() });
                }
                per_series(series, &|f| {
                    certificate(certify_multiples(&AnalyticMap::from_series(&f)?, *ell)?)
                })
            }
        },
        Command::Closure { ell } => {
            let report = closure_enum(p, *ell, cli.precision)?;
            let text = render_closure(&report);
            Ok(vec![Output::ok(report, text)])
        }
        Command::Index { n, k, l } => {
            let index = ball_index(p, *n, *k, *l)?;
            let value = match u64::try_from(&index) {
                Ok(v) => json!(v),
                Err(_) => json!(index.to_string()),
            };
            Ok(vec![Output::ok(
                json!({ "n": n, "k": k, "l": l, "index": value }),
                index.to_string(),
            )])
        }
        Command::Demo {
            kind: DemoKind::Thm12 { ell },
        } => {
            let report = demo_index_contradiction(p, *ell)?;
            let text = render_demo(&report);
            Ok(vec![Output::ok(report, text)])
        }
    }
}

/// Per-input failures become output lines in batch mode, so one bad line
/// does not hide the others.
fn failure(e: Error) -> Result<Output, Error> {
    Ok(Output {
        json: json!({ "error": e.to_string() }),
        text: format!("error: {e}"),
        code: exit_code(&e),
    })
}

fn inputs(cli: &Cli, series: &Option<String>) -> Result<Vec<String>, Error> {
    match (series, &cli.series_file) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "--series and --series-file are mutually exclusive".into(),
        )),
        (Some(s), None) => Ok(vec![s.clone()]),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read {}: {e}", path.display()))
            })?;
            Ok(text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect())
        }
        (None, None) => Err(Error::InvalidArgument(
            "one of --series or --series-file is required".into(),
        )),
    }
}

fn certificate(cert: Certificate) -> Result<Output, Error> {
    let code = if cert.is_zero_at_precision() {
        EXIT_ZERO_AT_PRECISION
    } else {
        EXIT_OK
    };
    let text = render_certificate(&cert);
    let mut out = Output::ok(&cert, text);
    out.code = code;
    Ok(out)
}

fn render_verdict(v: &MembershipVerdict) -> String {
    match v {
        MembershipVerdict::MemberExact => "member (exact)".into(),
        MembershipVerdict::MemberAtPrecision { precision } => {
            format!("member modulo X^{precision}")
        }
        MembershipVerdict::NonMember {
            witness_exponent,
            coefficient,
        } => format!("non-member: coefficient {coefficient} at X^{witness_exponent}"),
    }
}

fn render_certificate(cert: &Certificate) -> String {
    let mut s = String::new();
    let trace = &cert.normalization;
    let _ = writeln!(
        s,
        "normalized: subtracted {}, scaled z by X^{}",
        trace.subtracted_constant, trace.scale_exponent
    );
    match &cert.witness {
        WitnessReport::ZeroAtPrecision { precision } => match precision {
            Some(n) => {
                let _ = write!(s, "zero at precision: every known coefficient up to z^{n} vanishes");
            }
            None => {
                let _ = write!(s, "zero: the map is constant");
            }
        },
        WitnessReport::Substitution {
            leading,
            n,
            offending_exponent,
            evaluated,
            ..
        } => {
            let _ = writeln!(
                s,
                "leading term: a_{} = ({}) X^{}",
                leading.ell, leading.b, leading.m
            );
            let _ = writeln!(s, "g(X^{n}) = {evaluated}");
            let _ = write!(
                s,
                "exponent {offending_exponent} is not a power of two: g(X^{n}) is not in H"
            );
        }
        WitnessReport::Shift {
            ell,
            branch,
            q,
            base_point,
            tau,
            shift,
            delta,
            offending_valuation,
            ..
        } => {
            let branch = match branch {
                Branch::Derivative => "derivative",
                Branch::QthRoot => "q-th root",
            };
            let _ = writeln!(s, "{branch} branch, q = {q}, tau = {tau}");
            let moved = base_point.add(&LaurentSeries::monomial(base_point.prime(), 1, *shift));
            let _ = writeln!(s, "z0 = {base_point}, z1 = z0 + X^{shift} = {moved}");
            let _ = writeln!(s, "g(z1) - g(z0) = {delta}");
            let _ = write!(
                s,
                "valuation {offending_valuation} is not a multiple of {ell}: the difference is not in F[[X^{ell}]]"
            );
        }
    }
    if let Some(value) = &cert.original_value {
        let points: Vec<String> = cert.original_points.iter().map(|p| p.to_string()).collect();
        let _ = write!(s, "\noriginal map at [{}]: {value}", points.join(", "));
    }
    s
}

fn render_closure(r: &ClosureReport) -> String {
    let mut s = format!(
        "l = {}, N = {}, level k = {}, {} residues (supported: {}, distinct: {})",
        r.ell,
        r.precision,
        r.level,
        r.residues.len(),
        r.all_supported,
        r.all_distinct
    );
    for res in &r.residues {
        let _ = write!(s, "\n  {res}");
    }
    s
}

fn render_demo(r: &ContradictionReport) -> String {
    format!(
        "law {}: f = {} (linear term zero: {})\nC = {}, l = {}, inclusion over {} cosets: {}\n\
         ambient index {}, [W : pW] = {}\n{}\nrefuted: {}",
        r.law,
        r.pth_power,
        r.linear_term_zero,
        r.contraction_constant,
        r.radius_level,
        r.cosets_checked,
        r.inclusion_verified,
        r.ambient_index,
        r.zp_index,
        r.inequality,
        r.refuted
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["laurent-fp"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn eval_and_member() {
        let (code, out, _) = run_args(&["--p", "2", "eval", "--series", "X^1+X^2", "--at", "X^3"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), r#"{"series":"X^3 + X^6"}"#);
        let (code, out, _) = run_args(&["--p", "2", "member", "--series", "X^1+X^2+X^4", "--set", "H"]);
        assert_eq!((code, out.trim()), (0, r#"{"verdict":"member_exact"}"#));
        let (_, out, _) = run_args(&["--p", "3", "--format", "text", "member", "--series", "X^3", "--set", "ell:2"]);
        assert_eq!(out.trim(), "non-member: coefficient 1 at X^3");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["--p", "4", "eval", "--series", "1", "--at", "X^1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["eval", "--series", "1", "--at", "X^1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--p", "2", "eval", "--series", "X^", "--at", "X^1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--p", "2", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
        let (code, out, _) = run_args(&["--p", "3", "witness", "lemma31", "--series", "2 + O(X^5)"]);
        assert_eq!(code, EXIT_ZERO_AT_PRECISION);
        assert!(out.contains("zero_at_precision"));
        assert_eq!(
            run_args(&["--p", "3", "witness", "thm14", "--series", "X^1", "--ell", "3"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn witness_subcommands() {
        let (code, out, _) = run_args(&["--p", "2", "witness", "lemma31", "--series", "X^1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["witness"]["kind"], "substitution");
        assert_eq!(v["witness"]["n"], 3);
        assert_eq!(v["witness"]["evaluated"], "X^3");
        let (code, out, _) = run_args(&["--p", "2", "witness", "multiples", "--series", "X^2", "--ell", "3"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["witness"]["branch"], "qth_root");
        assert_eq!(v["witness"]["offending_valuation"], 2);
    }

    #[test]
    fn closure_index_demo() {
        let (code, out, _) = run_args(&["--p", "3", "closure", "--ell", "2", "--precision", "7"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["residues"].as_array().unwrap().len(), 9);
        let (_, out, _) = run_args(&["--p", "2", "--format", "text", "index", "--n", "2", "--k", "0", "--l", "3"]);
        assert_eq!(out.trim(), "64");
        let (code, out, _) = run_args(&["--p", "2", "demo", "thm12", "--ell", "3"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!((v["ambient_index"].as_u64(), v["zp_index"].as_u64()), (Some(4), Some(2)));
    }
}
