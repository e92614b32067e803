use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use hecke_core::characters::character_group;
use hecke_core::config::{self, Tolerances};
use hecke_core::expsums::{kloosterman, twisted_kloosterman, weil_bound};
use hecke_core::modforms::{petersson_norm, NewformData};
use hecke_core::petersson::{self, delta_geometric, delta_star, DeltaValue, PeterssonOptions};
use hecke_core::traces::{exact_trace_small, is_small_space, trace_estimate, x0_exact_11, x0_predict};
use hecke_core::verify::{self, Suite, VerifyOptions};
use hecke_core::{census, Error};

/// Traces of Hecke operators, Petersson sums and elliptic-curve census tools.
///
/// Every command prints one JSON document with a `schema` key, except
/// `census --dump`, which prints CSV. Exit status: 0 success, 1 failed
/// check or computation, 2 bad arguments.
#[derive(Parser)]
#[command(name = "hecke", version)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// JSON file with `seed`, `ell_max` and `tolerances` overrides; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Delta,
    Level11,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleOp {
    Eigenvalues,
    Norm,
}

#[derive(Subcommand)]
enum Command {
    /// Every Dirichlet character mod N with its values at 1..N.
    Characters {
        #[arg(long)]
        modulus: u64,
    },
    /// S(a, b; c), or S_chi(a, b; c) for character `char-index` mod `char-modulus`.
    Kloosterman {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        c: u64,
        #[arg(long, requires = "char_index")]
        char_modulus: Option<u64>,
        #[arg(long, requires = "char_modulus")]
        char_index: Option<u64>,
    },
    /// Geometric side of the Petersson formula, or its newform part with --star.
    Delta {
        #[arg(long)]
        kappa: u32,
        #[arg(long)]
        level: u64,
        #[arg(long, default_value_t = 0)]
        char_index: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        star: bool,
        /// Truncation of the c-sum; default max(1000 N, 32 pi sqrt(mn)).
        #[arg(long)]
        trunc: Option<u64>,
        /// Limit of the l-sums in --star mode.
        #[arg(long)]
        ell_max: Option<u64>,
    },
    /// Main term and error envelopes for tr T_m, exact where the space is shipped.
    Trace {
        #[arg(long)]
        kappa: u32,
        #[arg(long)]
        level: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 0)]
        char_index: u64,
    },
    /// Predicted |X_0(N)(F_q)| for q = p^v, exact where available.
    X0 {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        v: u32,
    },
    /// Curve census over F_q: one moment, or --dump for CSV records.
    Census {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        j: u32,
        #[arg(long, default_value_t = 1)]
        n1: u64,
        #[arg(long, default_value_t = 1)]
        n2: u64,
        #[arg(long)]
        dump: bool,
    },
    /// Moments E_q(U_i Phi_A) for i = 0..=j.
    Moments {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        j: u32,
        #[arg(long, default_value_t = 1)]
        n1: u64,
        #[arg(long, default_value_t = 1)]
        n2: u64,
    },
    /// Exact q-expansion data for the shipped forms.
    Oracle {
        #[arg(long, value_enum)]
        form: Form,
        #[arg(long, value_enum)]
        op: OracleOp,
        /// Number of eigenvalues, or the norm truncation X.
        #[arg(long)]
        limit: Option<u64>,
        /// q-expansion length for eigenvalues.
        #[arg(long)]
        precision: Option<usize>,
        /// Largest acceptable relative error bar for the norm.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run identity suites and print the report.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies every floating-point tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Every default, tolerance and cap, machine-readable.
    Defaults,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Expsums,
    Petersson,
    Modforms,
    Census,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Expsums => Suite::Expsums,
            SuiteArg::Petersson => Suite::Petersson,
            SuiteArg::Modforms => Suite::Modforms,
            SuiteArg::Census => Suite::Census,
        }
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    ell_max: Option<u64>,
    tolerances: Option<Tolerances>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Precondition(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

enum Output {
    Json(Value, bool),
    Text(String),
}

fn cplx(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn delta_json(d: &DeltaValue) -> Value {
    json!({
        "value": cplx(d.value),
        "tail_bound": d.tail_bound,
        "truncation_c": d.truncation_c,
        "ell_truncation": d.ell_truncation,
        "certified": d.certified,
    })
}

fn schema(name: &str) -> String {
    format!("hecke.{name}.v1")
}

fn with_schema(name: &str, body: Value) -> Value {
    let mut v = json!({ "schema": schema(name) });
    if let (Value::Object(out), Value::Object(b)) = (&mut v, body) {
        out.extend(b);
    }
    v
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable")
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, Failure> {
    let Some(p) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn scale(t: Tolerances, s: f64) -> Tolerances {
    Tolerances {
        character_per_term: t.character_per_term * s,
        tsum_per_term: t.tsum_per_term * s,
        petersson_slack: t.petersson_slack * s,
        local_identity: t.local_identity * s,
        eigen_weight12: t.eigen_weight12 * s,
        eigen_weight2: t.eigen_weight2 * s,
        norm_closure: t.norm_closure * s,
    }
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let cfg = load_config(&cli.config)?;
    let out = match cli.command {
        Command::Characters { modulus } => {
            let g = character_group(modulus)?;
            let chars: Vec<Value> = g
                .characters()
                .map(|chi| {
                    json!({
                        "index": chi.index(),
                        "exponents": chi.exponents(),
                        "conductor": chi.conductor(),
                        "parity": chi.parity(),
                        "primitive": chi.is_primitive(),
                        "values": (1..=modulus as i64).map(|a| cplx(chi.eval(a))).collect::<Vec<_>>(),
                    })
                })
                .collect();
            with_schema(
                "characters",
                json!({ "modulus": modulus, "generators": g.generators(), "characters": chars }),
            )
        }
        Command::Kloosterman { a, b, c, char_modulus, char_index } => {
            let (value, bound, chi_json) = match (char_modulus, char_index) {
                (Some(n), Some(i)) => {
                    let chi = character_group(n)?.character(i)?;
                    (
                        twisted_kloosterman(&chi, a, b, c)?,
                        weil_bound(Some(&chi), a, b, c),
                        json!({ "modulus": n, "index": i, "conductor": chi.conductor() }),
                    )
                }
                _ => (kloosterman(a, b, c)?, weil_bound(None, a, b, c), Value::Null),
            };
            with_schema(
                "kloosterman",
                json!({
                    "params": { "a": a, "b": b, "c": c, "character": chi_json },
                    "value_re": value.re,
                    "value_im": value.im,
                    "weil_bound": bound,
                }),
            )
        }
        Command::Delta { kappa, level, char_index, m, n, star, trunc, ell_max } => {
            let chi = character_group(level)?.character(char_index)?;
            let d = if star {
                let opts = PeterssonOptions {
                    trunc,
                    ell_max: ell_max.or(cfg.ell_max).unwrap_or(config::DEFAULT_ELL_MAX),
                    ..Default::default()
                };
                delta_star(kappa, &chi, m, n, &opts)?
            } else {
                delta_geometric(kappa, &chi, m, n, trunc)?
            };
            with_schema(
                "delta",
                json!({
                    "params": { "kappa": kappa, "level": level, "char_index": char_index, "m": m, "n": n, "star": star },
                    "result": delta_json(&d),
                }),
            )
        }
        Command::Trace { kappa, level, m, char_index } => {
            let chi = character_group(level)?.character(char_index)?;
            let est = trace_estimate(kappa, &chi, m)?;
            let exact = if chi.is_trivial() && is_small_space(kappa, level) {
                to_value(&exact_trace_small(kappa, level, m)?)
            } else {
                Value::Null
            };
            with_schema(
                "trace",
                json!({
                    "params": { "kappa": kappa, "level": level, "m": m, "char_index": char_index },
                    "estimate": to_value(&est),
                    "exact": exact,
                    "exact_available": !exact.is_null(),
                }),
            )
        }
        Command::X0 { level, p, v } => {
            let pred = x0_predict(level, p, v)?;
            let exact = x0_exact(level, p, v, pred.q)?;
            with_schema(
                "x0",
                json!({
                    "params": { "level": level, "p": p, "v": v },
                    "predictor": to_value(&pred),
                    "exact": exact,
                    "exact_available": exact.is_some(),
                }),
            )
        }
        Command::Census { q, j, n1, n2, dump } => {
            let recs = census::enumerate_curves(q)?;
            if dump {
                return Ok(Output::Text(census::to_csv(&recs)));
            }
            let r = census::moment_from(&recs, j, census::GroupShape::new(n1, n2)?)?;
            with_schema("census", json!({ "curves": recs.len(), "moment": to_value(&r) }))
        }
        Command::Moments { q, j, n1, n2 } => {
            let recs = census::enumerate_curves(q)?;
            let shape = census::GroupShape::new(n1, n2)?;
            let rows: Vec<Value> = (0..=j)
                .map(|i| census::moment_from(&recs, i, shape).map(|r| to_value(&r)))
                .collect::<Result<_, _>>()?;
            with_schema(
                "moments",
                json!({ "q": q, "shape": to_value(&shape), "bound": 10.0 / (q as f64).sqrt(), "moments": rows }),
            )
        }
        Command::Oracle { form, op, limit, precision, tolerance } => oracle(form, op, limit, precision, tolerance)?,
        Command::Verify { suite, seed, tolerance, inject_fault } => {
            if inject_fault {
                petersson::FAULT_FLIP_R.store(true, Ordering::Relaxed);
            }
            let mut opts = VerifyOptions::default();
            if let Some(t) = cfg.tolerances {
                opts.tolerances = t;
            }
            if let Some(s) = seed.or(cfg.seed) {
                opts.seed = s;
            }
            if let Some(s) = tolerance {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Failure::Usage(format!("tolerance scale must be positive, got {s}")));
                }
                opts.tolerances = scale(opts.tolerances, s);
            }
            let report = verify::run(suite.into(), &opts);
            let passed = report.passed;
            let mut v = to_value(&report);
            v["fault_injected"] = json!(inject_fault);
            return Ok(Output::Json(v, passed));
        }
        Command::Defaults => with_schema("defaults", to_value(&config::defaults())),
    };
    Ok(Output::Json(out, true))
}

/// `q + 1 - tr(T_p)` on shipped weight-2 spaces at `v = 1`, `q + 1` in genus 0.
fn x0_exact(level: u64, p: u64, v: u32, q: u64) -> Result<Option<i64>, Failure> {
    if !is_small_space(2, level) {
        return Ok(None);
    }
    let tr = exact_trace_small(2, level, p)?;
    if tr.dimension == 0 {
        return Ok(Some(q as i64 + 1));
    }
    if v != 1 {
        return Ok(None);
    }
    if level == 11 {
        return Ok(Some(x0_exact_11(p)?));
    }
    let t: i64 = tr.trace.try_into().map_err(|_| Failure::Run("trace overflow".into()))?;
    Ok(Some(q as i64 + 1 - t))
}

fn oracle(
    form: Form,
    op: OracleOp,
    limit: Option<u64>,
    precision: Option<usize>,
    tolerance: Option<f64>,
) -> Result<Value, Failure> {
    let name = match form {
        Form::Delta => "delta",
        Form::Level11 => "level11",
    };
    let load = |p: usize| match form {
        Form::Delta => NewformData::delta(p),
        Form::Level11 => NewformData::level11(p),
    };
    Ok(match op {
        OracleOp::Eigenvalues => {
            let limit = limit.unwrap_or(30);
            let p = precision.unwrap_or(config::DEFAULT_PRECISION).max(limit as usize);
            let f = load(p)?;
            let rows: Vec<Value> = (1..=limit)
                .map(|n| -> Result<Value, Error> {
                    Ok(json!({ "n": n, "a": f.a(n)?.to_string(), "lambda": f.lambda(n)? }))
                })
                .collect::<Result<_, _>>()?;
            with_schema(
                "oracle",
                json!({
                    "form": name, "op": "eigenvalues", "weight": f.weight, "level": f.level,
                    "exact": true, "precision": p, "coefficients": rows,
                }),
            )
        }
        OracleOp::Norm => {
            let x = limit.unwrap_or(verify::NORM_X);
            let f = load(2 * x as usize)?;
            let est = petersson_norm(&f, x, tolerance)?;
            with_schema(
                "oracle",
                json!({ "form": name, "op": "norm", "weight": f.weight, "level": f.level, "norm": to_value(&est) }),
            )
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let pretty = matches!(cli.format, Format::Pretty);
    match run(cli) {
        Ok(Output::Text(s)) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Ok(Output::Json(v, ok)) => {
            let s = if pretty {
                serde_json::to_string_pretty(&v)
            } else {
                serde_json::to_string(&v)
            }
            .expect("serialisable");
            println!("{s}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
