mod repro;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use oscone::boxes::{chsh_value, classify_matrix, read_box_json, BoxInput, ClassifyOptions, InputForm, QuantumVerdict};
use oscone::convex::{SolveReport, SolveStatus};
use oscone::numerics::{format_sig, GeneralMatrix, HermMatrix, MatrixJson};
use oscone::opsys::{ando_split, nc2_positivity, NC2Coeff};
use oscone::tensorlab::{s1_max_split, sqrt_bell_value, BoxMatrix};

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_UNDECIDED: u8 = 4;

#[derive(Parser)]
#[command(name = "oscone", version, about = "Operator-system cones and correlation boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a box as non-signaling, local and quantum.
    Classify {
        path: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Largest witness size tried by the max-cone search.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, env = "OSCONE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// Exit 4 when the quantum verdict is undecided.
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate a Bell functional on a box.
    Bell {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Inequality::Sqrt)]
        inequality: Inequality,
        /// Diagonal offset of the square-root inequality's left side.
        #[arg(long, default_value_t = 0, value_parser = parse_offset)]
        d: usize,
        #[arg(long)]
        json: bool,
    },
    /// Run the reproduction checks for one case.
    Repro {
        #[arg(value_enum)]
        case: repro::Case,
        #[arg(long, env = "OSCONE_SEED", default_value_t = 0)]
        seed: u64,
        /// Torus grid size for `sone`.
        #[arg(long, default_value_t = 1440)]
        grid: usize,
        /// Number of random instances for `ando` and `nc2`.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Solve a feasibility subproblem and print its report as JSON.
    Solve {
        #[arg(long, value_enum)]
        kind: Kind,
        /// JSON file: `{"t0", "t1"}` for split, `{"t"}` for ando,
        /// `{"c0", "c1", "c2"}` or `{"c": [c0, c1, c2]}` for nc2.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Exit 4 when the solver is undecided.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Inequality {
    Chsh,
    Sqrt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Split,
    Ando,
    Nc2,
}

fn parse_offset(s: &str) -> Result<usize, String> {
    match s {
        "0" => Ok(0),
        "2" => Ok(2),
        _ => Err("must be 0 or 2".into()),
    }
}

/// A failure mapped to its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Self { code: EXIT_INVALID, message: message.to_string() }
    }

    fn io(message: impl ToString) -> Self {
        Self { code: EXIT_IO, message: message.to_string() }
    }
}

macro_rules! outln {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).expect("writing to a String")
    };
}

fn s(x: f64) -> String {
    format_sig(x, 12)
}

fn read_json(path: &Path) -> Result<(String, Value), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_str(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok((text, value))
}

fn read_box(path: &Path) -> Result<BoxInput, Failure> {
    let (text, _) = read_json(path)?;
    read_box_json(&text).map_err(Failure::invalid)
}

fn print_json(out: &mut String, v: &Value) {
    outln!(out, "{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn cmd_classify(out: &mut String, path: &Path, opts: ClassifyOptions, as_json: bool, strict: bool) -> Result<u8, Failure> {
    let input = match read_box(path) {
        Ok(b) => b,
        Err(f) if f.code == EXIT_INVALID => {
            if as_json {
                print_json(out, &json!({ "summary": format!("P:no({})", f.message), "nonsignaling": false }));
            } else {
                outln!(out, "P:no({})", f.message);
            }
            return Err(f);
        }
        Err(f) => return Err(f),
    };
    let report = classify_matrix(&input.matrix, &opts);
    if as_json {
        let boxed = match input.form {
            InputForm::P => json!({ "p": input.correlation.table() }),
            InputForm::Matrix => json!({ "matrix": input.matrix }),
        };
        let mut doc = json!({
            "scale": input.scale,
            "summary": report.summary(),
            "report": report,
        });
        doc.as_object_mut().expect("object").extend(boxed.as_object().expect("object").clone());
        print_json(out, &doc);
    } else {
        outln!(out, "{}", report.summary());
        if let Some(c) = report.chsh {
            outln!(out, "chsh         {}", s(c));
        }
        if let Some(b) = &report.bell {
            outln!(out, "sqrt-bell    lhs(d=0) {}  lhs(d=2) {}  rhs {}", s(b.lhs[0]), s(b.lhs[1]), s(b.rhs));
        }
        if let Some(oscone::boxes::LocalVerdict::NonLocal { value, local_max, gap, .. }) = &report.local {
            outln!(out, "separator    value {}  local max {}  gap {}", s(*value), s(*local_max), s(*gap));
        }
        if let Some(w) = &report.witness {
            outln!(out, "witness      p = {}", w.p());
        }
    }
    let undecided = matches!(report.quantum, Some(QuantumVerdict::Undecided));
    Ok(if strict && undecided { EXIT_UNDECIDED } else { 0 })
}

fn cmd_bell(out: &mut String, path: &Path, inequality: Inequality, d: usize, as_json: bool) -> Result<u8, Failure> {
    let input = read_box(path)?;
    match inequality {
        Inequality::Chsh => {
            let v = chsh_value(&input.correlation);
            let verdict = if v > 2.0 + 1e-12 { "exceeds local bound" } else { "within local bound" };
            if as_json {
                print_json(out, &json!({ "inequality": "chsh", "value": v, "local_bound": 2.0, "verdict": verdict }));
            } else {
                outln!(out, "chsh         {}", s(v));
                outln!(out, "local bound  2");
                outln!(out, "verdict      {verdict}");
            }
        }
        Inequality::Sqrt => {
            let m = BoxMatrix::new(input.matrix).map_err(Failure::invalid)?;
            let v = sqrt_bell_value(&m).map_err(Failure::invalid)?;
            let violated = v.violated(d);
            if as_json {
                print_json(out, &json!({
                    "inequality": "sqrt",
                    "d": d,
                    "lhs": v.lhs[d / 2],
                    "rhs": v.rhs,
                    "violated": violated,
                    "value": v,
                }));
            } else {
                outln!(out, "lhs(d={d})     {}", s(v.lhs[d / 2]));
                outln!(out, "rhs          {}", s(v.rhs));
                outln!(out, "argmin       a={} c={}", v.argmin.0, v.argmin.1);
                outln!(out, "rhs(outer)   {}", s(v.rhs_outer));
                outln!(out, "S-table      a c  j k  b=0  b=2  min");
                for a in [0, 2] {
                    for c in [0, 2] {
                        for j in 1..=2 {
                            for k in 1..=2 {
                                let t = &v.table;
                                outln!(out, 
                                    "             {a} {c}  {j} {k}  {}  {}  {}",
                                    s(t.term(a, c, 0, j, k)),
                                    s(t.term(a, c, 2, j, k)),
                                    s(t.s(a, c, j, k))
                                );
                            }
                        }
                    }
                }
                outln!(out, "verdict      {}", if violated { "violated" } else { "holds" });
            }
        }
    }
    Ok(0)
}

fn cmd_repro(out: &mut String, case: repro::Case, params: &repro::Params, as_json: bool) -> u8 {
    let checks = repro::run(case, params);
    let passed = checks.iter().filter(|c| c.pass).count();
    if as_json {
        let list: Vec<Value> = checks.iter().map(repro::Check::to_json).collect();
        print_json(out, &json!({ "checks": list, "passed": passed, "total": checks.len() }));
    } else {
        for c in &checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            outln!(out, "[{tag}] {}: expected {}; actual {}", c.name, c.expected, c.actual);
        }
        outln!(out, "{passed}/{} checks passed", checks.len());
    }
    if passed == checks.len() {
        0
    } else {
        EXIT_FAILED
    }
}

fn matrix_field(obj: &Value, key: &str) -> Result<GeneralMatrix, Failure> {
    let v = obj.get(key).ok_or_else(|| Failure::invalid(format!("missing \"{key}\"")))?;
    parse_matrix(v).map_err(|e| Failure::invalid(format!("\"{key}\": {e}")))
}

/// Accepts `{"re": rows, "im": rows}` or plain real rows.
fn parse_matrix(v: &Value) -> Result<GeneralMatrix, String> {
    let j: MatrixJson = if v.is_array() {
        MatrixJson { re: serde_json::from_value(v.clone()).map_err(|e| e.to_string())?, im: None }
    } else {
        serde_json::from_value(v.clone()).map_err(|e| e.to_string())?
    };
    GeneralMatrix::try_from(&j).map_err(|e| e.to_string())
}

fn hermitian(m: GeneralMatrix, key: &str) -> Result<HermMatrix, Failure> {
    HermMatrix::new(m).map_err(|e| Failure::invalid(format!("\"{key}\": {e}")))
}

fn nc2_input(obj: &Value) -> Result<NC2Coeff, Failure> {
    if let Some(c) = obj.get("c") {
        let [c0, c1, c2]: [f64; 3] =
            serde_json::from_value(c.clone()).map_err(|e| Failure::invalid(format!("\"c\": {e}")))?;
        return Ok(NC2Coeff::scalar(c0, c1, c2));
    }
    let c: Vec<HermMatrix> = ["c0", "c1", "c2"]
        .iter()
        .map(|k| matrix_field(obj, k).and_then(|m| hermitian(m, k)))
        .collect::<Result<_, _>>()?;
    let [c0, c1, c2] = <[HermMatrix; 3]>::try_from(c).expect("three coefficients");
    NC2Coeff::new(c0, c1, c2).map_err(Failure::invalid)
}

fn cmd_solve(out: &mut String, kind: Kind, input: &Path, delta: f64, strict: bool) -> Result<u8, Failure> {
    let (_, obj) = read_json(input)?;
    if !obj.is_object() {
        return Err(Failure::invalid("expected a JSON object"));
    }
    let report: SolveReport = match kind {
        Kind::Split => {
            let t0 = hermitian(matrix_field(&obj, "t0")?, "t0")?;
            let t1 = matrix_field(&obj, "t1")?;
            s1_max_split(&t0, &t1, delta).map_err(Failure::invalid)?
        }
        Kind::Ando => ando_split(&matrix_field(&obj, "t")?).map_err(Failure::invalid)?,
        Kind::Nc2 => nc2_positivity(&nc2_input(&obj)?, delta),
    };
    outln!(out, "{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(if strict && report.status == SolveStatus::Undecided { EXIT_UNDECIDED } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = match cli.command {
        Command::Classify { path, tol, dim, restarts, seed, json, strict } => {
            cmd_classify(&mut out, &path, ClassifyOptions { tol, dim, restarts, seed }, json, strict)
        }
        Command::Bell { path, inequality, d, json } => cmd_bell(&mut out, &path, inequality, d, json),
        Command::Repro { case, seed, grid, trials, json } => {
            Ok(cmd_repro(&mut out, case, &repro::Params { seed, grid, trials }, json))
        }
        Command::Solve { kind, input, delta, strict } => cmd_solve(&mut out, kind, &input, delta, strict),
    };
    // a closed pipe is not an error worth reporting
    let _ = std::io::stdout().write_all(out.as_bytes());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("oscone: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
