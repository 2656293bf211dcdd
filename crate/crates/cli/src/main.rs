//! `dyadic`: command-line access to the counting, closed-form, table and
//! period layers. Exit codes: 0 success, 1 failed check or internal error,
//! 2 usage error.

mod parse;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dyadic::counting::{
    count_level_histogram_with, count_level_naive_with, pi_truncated, x_series_with, CountConfig,
    SeriesMode,
};
use dyadic::local_ring::{hilbert_symbol, is_square, quadratic_defect, DefectResult, LocalField};
use dyadic::periods::{evaluate_period, table_row};
use dyadic::qform::{invariants, DiscKind, is_anisotropic, DiagonalForm};
use dyadic::series::{
    case_for, dimension_reduce, local_factor, local_factor_beta0, pi_geometric, x_closed,
    ClosedFormCase, Direction, Var,
};
use dyadic::verify::{self, Report};
use dyadic::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "dyadic", version, about = "Quadratic congruence counts over dyadic rings")]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FormArgs {
    /// q2, q4, q2r or zp:P.
    #[arg(long, default_value = "q2")]
    field: String,
    /// Diagonal form, e.g. "x_1^2 - 5*x_2^2"; "0" for the empty form.
    #[arg(long)]
    form: String,
    /// Hyperbolic blocks 2xy appended to the form.
    #[arg(long, default_value_t = 0)]
    planes: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension, discriminant class, Hasse invariant and closed-form case.
    Classify(FormArgs),
    /// Quadratic defect of an element.
    Defect {
        #[arg(long, default_value = "q2")]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
    },
    /// Hilbert symbol (a, b).
    Hilbert {
        #[arg(long, default_value = "q2")]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// One level X_ℓ(ρ).
    Count {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        #[arg(long)]
        level: u32,
        /// naive or histogram.
        #[arg(long, default_value = "histogram")]
        kernel: String,
    },
    /// X(β; ρ): the closed form, or counted coefficients with --oracle.
    Xseries {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        /// Truncation order.
        #[arg(long = "L", default_value_t = 6)]
        order: u32,
        /// Count every coefficient instead of expanding the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// Π(α, β) symbolically, or truncated at a numeric a = q^{-α}.
    Pi {
        #[command(flatten)]
        form: FormArgs,
        /// Rational value of a; switches to the truncated counted sum.
        #[arg(long)]
        a_value: Option<String>,
        #[arg(long = "L", default_value_t = 6)]
        order: u32,
        #[arg(long, default_value_t = 4)]
        tmax: u32,
    },
    /// Local factor Π^n(α − β − n, β)/(|2|^α Z(α)) up to a constant.
    Localfactor {
        /// Closed-form case of the anisotropic kernel (e.g. m3_i, m2_d:1).
        #[arg(long)]
        case: Option<String>,
        /// Number of hyperbolic planes.
        #[arg(long)]
        k: Option<u32>,
        /// Total dimension; alone, uses the Witt chain over ℚ₂.
        #[arg(long)]
        n: Option<u32>,
        /// Ramification index of the field.
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Specialize β = 0.
        #[arg(long)]
        beta0: bool,
    },
    /// Global period by truncated Euler product.
    Period {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        alpha: i64,
        #[arg(long, default_value_t = 97)]
        pmax: u64,
    },
    /// Verification suites; all of them when no subset is selected.
    Verify {
        #[arg(long)]
        lemmas: bool,
        #[arg(long)]
        closedforms: bool,
        #[arg(long)]
        tables: bool,
        /// Table rows, N or A..B.
        #[arg(long, default_value = "3..18")]
        n: String,
    },
    /// Time naive, histogram and stabilized counting.
    Bench {
        #[arg(long, default_value = "q2")]
        field: String,
        #[arg(long, default_value = "x_1^2 + x_2^2 + x_3^2 + x_4^2")]
        form: String,
        #[arg(long, default_value = "3", allow_hyphen_values = true)]
        rho: String,
        #[arg(long, default_value_t = 6)]
        level: u32,
    },
}

enum Failure {
    Usage(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) | Error::PrecisionExceeded(_) => Failure::Runtime(e),
            _ => Failure::Usage(e),
        }
    }
}

/// Command output: text, JSON, and whether every check passed.
struct Output {
    text: String,
    json: Value,
    ok: bool,
}

fn ok(text: String, json: Value) -> std::result::Result<Output, Failure> {
    Ok(Output { text, json, ok: true })
}

fn config() -> Result<CountConfig> {
    let mut cfg = CountConfig::default();
    let read = |name: &str| -> Result<Option<u128>> {
        match std::env::var(name) {
            Ok(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("{name}={v:?} is not an integer"))),
            Err(_) => Ok(None),
        }
    };
    if let Some(b) = read("DYADIC_ENUM_BUDGET")? {
        cfg.enum_budget = b;
    }
    if let Some(b) = read("DYADIC_HIST_BUDGET")? {
        cfg.hist_budget = b;
    }
    Ok(cfg)
}

fn load_form(a: &FormArgs) -> Result<(LocalField, DiagonalForm)> {
    let k = parse::field(&a.field)?;
    let b = parse::form(&k, &a.form)?.with_planes(a.planes);
    Ok((k, b))
}

fn rational(s: &str) -> Result<BigRational> {
    s.parse::<BigRational>().map_err(|_| Error::Parse(format!("{s:?} is not a rational p/q")))
}

fn ratio_strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(|c| c.to_string()).collect()
}

fn inv_q(k: &LocalField) -> BigRational {
    BigRational::new(1.into(), BigInt::from(k.q()))
}

/// Closed-form case of the anisotropic kernel of a form; planes are handled
/// by dimension reduction.
fn kernel_case(b: &DiagonalForm) -> Result<ClosedFormCase> {
    let kernel = DiagonalForm { planes: 0, ..b.clone() };
    if !is_anisotropic(&kernel)? {
        return Err(Error::Isotropic);
    }
    case_for(&b.field, &invariants(&kernel)?)
}

fn report_output(reports: Vec<Report>) -> Output {
    let mut text = String::new();
    let mut all = true;
    for r in &reports {
        let failed = r.failures().count();
        all &= failed == 0;
        text.push_str(&format!("{}: {} of {} passed\n", r.suite, r.checks.len() - failed, r.checks.len()));
        for c in &r.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                text.push_str(&format!("  {tag} {}\n", c.name));
            } else {
                text.push_str(&format!("  {tag} {}: {}\n", c.name, c.detail));
            }
        }
    }
    Output { text: text.trim_end().to_string(), json: json!({ "passed": all, "suites": reports }), ok: all }
}

fn run(cmd: Command) -> std::result::Result<Output, Failure> {
    match cmd {
        Command::Classify(a) => {
            let (k, b) = load_form(&a)?;
            let inv = invariants(&b)?;
            let aniso = is_anisotropic(&b)?;
            let case = if aniso { Some(case_for(&k, &inv)?.tag()) } else { None };
            let text = format!(
                "form {}\nfield {k}\nm = {}, disc = {} ({}), hmi = {}\nanisotropic: {aniso}{}",
                b.format(),
                inv.m,
                k.format(&inv.disc),
                match inv.disc_kind {
                    DiscKind::UnitSquare => "unit square".to_string(),
                    DiscKind::UnitDefect(d) => format!("unit of defect ϖ^{d}𝔬"),
                    DiscKind::NonUnit => "non-unit".to_string(),
                },
                inv.hmi,
                case.as_ref().map(|c| format!("\ncase: {c}")).unwrap_or_default()
            );
            ok(text, json!({ "form": b.format(), "invariants": inv, "anisotropic": aniso, "case": case }))
        }
        Command::Defect { field, rho } => {
            let k = parse::field(&field)?;
            let x = parse::element(&k, &rho)?;
            let d = quadratic_defect(&k, &x)?;
            let text = match d {
                DefectResult::Square => format!("{} is a square", k.format(&x)),
                DefectResult::Defect(v) => format!("defect of {} is ϖ^{v}𝔬", k.format(&x)),
            };
            ok(text, json!({ "rho": k.format(&x), "defect": d }))
        }
        Command::Hilbert { field, a, b } => {
            let k = parse::field(&field)?;
            let (x, y) = (parse::element(&k, &a)?, parse::element(&k, &b)?);
            let s = hilbert_symbol(&k, &x, &y)?;
            ok(format!("({}, {}) = {s}", k.format(&x), k.format(&y)), json!({ "a": k.format(&x), "b": k.format(&y), "symbol": s }))
        }
        Command::Count { form, rho, level, kernel } => {
            let (k, b) = load_form(&form)?;
            let r = parse::element(&k, &rho)?;
            let cfg = config()?;
            let x = match kernel.as_str() {
                "naive" => count_level_naive_with(&b, &r, level, &cfg)?,
                "histogram" => count_level_histogram_with(&b, &r, level, &cfg)?,
                other => return Err(Failure::Usage(Error::Parse(format!("unknown kernel {other:?}")))),
            };
            ok(
                format!("X_{level}({}) = {x}", k.format(&r)),
                json!({ "form": b.format(), "rho": k.format(&r), "ell": level, "kernel": kernel, "value": x.to_string() }),
            )
        }
        Command::Xseries { form, rho, order, oracle } => {
            let (k, b) = load_form(&form)?;
            let r = parse::element(&k, &rho)?;
            if oracle {
                let kernel = DiagonalForm { planes: 0, ..b.clone() };
                let mode = if is_anisotropic(&kernel)? && b.planes == 0 {
                    SeriesMode::Stabilized { verify: 1 }
                } else {
                    SeriesMode::Direct
                };
                let s = x_series_with(&b, &r, order, mode, &config()?)?;
                let text = format!("X = [{}]", ratio_strings(&s.coeffs).join(", "));
                return ok(text, serde_json::to_value(&s).expect("series serializes"));
            }
            let case = kernel_case(&b)?;
            let pg = x_closed(case, k.e())?;
            let x = match k.ord(&r) {
                None => pg.zero_value.clone().expect("closed forms carry X(β; 0)"),
                Some(v) if v % 2 == 0 && is_square(&k, &r)? => pg.at(v / 2)?,
                Some(_) => {
                    return Err(Failure::Usage(Error::Unsupported(
                        "closed forms are for ρ = 0 or a nonzero square; use --oracle".into(),
                    )))
                }
            };
            let x = if b.planes > 0 { dimension_reduce(&x, b.planes, Direction::AddPlanes)? } else { x };
            let coeffs = x.specialize(Var::Iq, &inv_q(&k))?.z_series(order as usize)?;
            let text = format!(
                "case {case}\nX(β; {}) = {x}\nseries: [{}]",
                k.format(&r),
                ratio_strings(&coeffs).join(", ")
            );
            ok(text, json!({ "case": case.tag(), "closed_form": x, "L": order, "coeffs": ratio_strings(&coeffs) }))
        }
        Command::Pi { form, a_value, order, tmax } => {
            let (k, b) = load_form(&form)?;
            if let Some(a) = a_value {
                let a = rational(&a)?;
                let s = pi_truncated(&b, &a, order, tmax)?;
                let text = format!("Π truncated at T ≤ {tmax}: [{}]", ratio_strings(&s.coeffs).join(", "));
                return ok(text, serde_json::to_value(&s).expect("series serializes"));
            }
            let case = kernel_case(&b)?;
            let mut pi = pi_geometric(&x_closed(case, k.e())?)?;
            if b.planes > 0 {
                pi = dimension_reduce(&pi, b.planes, Direction::AddPlanes)?;
            }
            ok(format!("case {case}\nΠ(α, β) = {pi}"), json!({ "case": case.tag(), "pi": pi }))
        }
        Command::Localfactor { case, k, n, e, beta0 } => {
            let (case, planes, n) = match (case, k, n) {
                (Some(c), Some(k), _) => {
                    let c = ClosedFormCase::parse(&c)?;
                    (c, k, c.m() + 2 * k as usize)
                }
                (None, None, Some(n)) => {
                    let row = table_row(n)?;
                    (row.case, row.witt.k, n as usize)
                }
                _ => {
                    return Err(Failure::Usage(Error::Parse(
                        "give --case with --k, or --n alone for the Witt chain over ℚ₂".into(),
                    )))
                }
            };
            let lf = if beta0 { local_factor_beta0(case, e, n, planes)? } else { local_factor(case, e, n, planes)? };
            let (normed, _, _) = lf.normalize_up_to_constant()?;
            ok(
                format!("case {case}, n = {n}, k = {planes}\nlocal factor (up to a multiplicative constant) = {normed}"),
                json!({ "case": case.tag(), "n": n, "k": planes, "local_factor": normed, "up_to_constant": true }),
            )
        }
        Command::Period { n, alpha, pmax } => {
            let v = evaluate_period(n, alpha, pmax)?;
            let text = format!(
                "{}\nvalue = {}\ntail bound = {}",
                v.expression, v.value, v.tail_bound
            );
            ok(text, serde_json::to_value(&v).expect("period serializes"))
        }
        Command::Verify { lemmas, closedforms, tables, n } => {
            let all = !(lemmas || closedforms || tables);
            let mut reports = Vec::new();
            if all || closedforms {
                reports.push(verify::verify_closed_forms(3, 6)?);
            }
            if all || lemmas {
                reports.push(verify::verify_counting_lemmas()?);
                reports.push(verify::verify_stabilization()?);
                reports.push(verify::verify_symbols()?);
                reports.push(verify::verify_anisotropy()?);
            }
            if all {
                reports.push(verify::verify_kernels()?);
                reports.push(verify::verify_assembly(3)?);
                reports.push(verify::verify_dimension_reduction(5)?);
            }
            if all || tables {
                reports.push(verify::verify_tables(parse::range(&n)?)?);
            }
            Ok(report_output(reports))
        }
        Command::Bench { field, form, rho, level } => {
            let k = parse::field(&field)?;
            let b = parse::form(&k, &form)?;
            let r = parse::element(&k, &rho)?;
            let mut cfg = config()?;
            cfg.enum_budget = cfg.enum_budget.max(1 << 32);
            let time = |f: &dyn Fn() -> Result<Vec<BigRational>>| -> Result<(f64, Vec<BigRational>)> {
                let t = Instant::now();
                let v = f()?;
                Ok((t.elapsed().as_secs_f64(), v))
            };
            let (t_naive, naive) = time(&|| Ok(vec![count_level_naive_with(&b, &r, level, &cfg)?]))?;
            let (t_hist, hist) = time(&|| Ok(vec![count_level_histogram_with(&b, &r, level, &cfg)?]))?;
            let (t_direct, direct) = time(&|| Ok(x_series_with(&b, &r, level, SeriesMode::Direct, &cfg)?.coeffs))?;
            let (t_stab, stab) =
                time(&|| Ok(x_series_with(&b, &r, level, SeriesMode::Stabilized { verify: 0 }, &cfg)?.coeffs))?;
            let agree = naive == hist && direct == stab && direct.last() == hist.last();
            let rows = [
                ("naive X_ℓ", t_naive),
                ("histogram X_ℓ", t_hist),
                ("direct X_0..X_ℓ", t_direct),
                ("stabilized X_0..X_ℓ", t_stab),
            ];
            let mut text = format!("form {}, ρ = {}, ℓ = {level}\n{:<22}{:>14}\n", b.format(), k.format(&r), "kernel", "seconds");
            for (name, t) in rows {
                text.push_str(&format!("{name:<22}{t:>14.6}\n"));
            }
            let speedup = t_naive / t_hist.max(1e-9);
            text.push_str(&format!("speedup naive/histogram: {speedup:.0}×\nresults agree: {agree}"));
            Ok(Output {
                text,
                json: json!({
                    "form": b.format(),
                    "level": level,
                    "value": hist[0].to_string(),
                    "seconds": { "naive": t_naive, "histogram": t_hist, "direct": t_direct, "stabilized": t_stab },
                    "speedup": speedup,
                    "agree": agree,
                }),
                ok: agree,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli.command) {
        Ok(out) => {
            let body = if json { serde_json::to_string_pretty(&out.json).expect("json output") } else { out.text };
            // A closed pipe (e.g. `| head`) is not an error of the command.
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            let (code, kind, e) = match f {
                Failure::Usage(e) => (2, "usage", e),
                Failure::Runtime(e) => (1, "runtime", e),
            };
            eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
            ExitCode::from(code)
        }
    }
}
