//! `sll`: JSON front end for the local computations in `sll-core`.
//!
//! Every successful run prints one JSON document on stdout and exits 0.
//! Failures also print a JSON object, `{"error": {"kind", "message"}}`, and
//! exit with 2 (invalid input), 3 (I/O) or 4 (internal error).

mod check;

use std::fs;
use std::io::{self, Read, Write};
use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use sll_core::deformation::{default_degree, HodgeFrame};
use sll_core::dieudonne::{DieudonneModule, Fixture, LagrangianSearch, DEFAULT_SEARCH_BUDGET};
use sll_core::field::FiniteField;
use sll_core::json::{
    matrix_to_json, ElementJson, JsonError, ModuleJson, PlaneJson, QuadFormJson, RingJson, SeriesJson,
};
use sll_core::local_model::{chart_equation, enumerate_special_fiber, residue_field_of_order, IsotropicPlane};
use sll_core::singularity::{classify_local_ring, reduce, LocalRingClass, Reduction};
use sll_core::{TruncatedSeries, WittElement, WittRing};

/// Precision used when neither `--n` nor `SLL_PRECISION` is set.
const DEFAULT_PRECISION: usize = 3;

#[derive(Parser)]
#[command(name = "sll", version, about = "Exact local computations over truncated Witt rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arithmetic in W_n(F_q).
    Witt {
        #[command(subcommand)]
        op: WittOp,
    },
    /// Normal form of a series read from a JSON file (`-` for stdin).
    SeriesReduce {
        file: PathBuf,
        /// Truncate the input to this degree first.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Invariants of quasi-polarized Dieudonne modules.
    Dieudonne {
        #[command(subcommand)]
        op: DieudonneOp,
    },
    /// Deformation relation of a module and the type of its local ring.
    Deform {
        #[command(flatten)]
        source: ModuleSource,
        /// 1-based basis indices of `Y1, Y2`; detected when omitted.
        #[arg(long, value_parser = parse_frame)]
        frame: Option<[usize; 2]>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Special fiber of the rank-four local model.
    LocalModel {
        #[command(subcommand)]
        op: LocalModelOp,
    },
    /// Reads any emitted object back and prints it in canonical form.
    Canon {
        #[arg(value_enum)]
        kind: Kind,
        file: PathBuf,
    },
    /// Seeded randomized self-check.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum WittOp {
    Add {
        a: String,
        b: String,
        #[command(flatten)]
        ring: RingArgs,
    },
    Mul {
        a: String,
        b: String,
        #[command(flatten)]
        ring: RingArgs,
    },
    Frob {
        a: String,
        #[command(flatten)]
        ring: RingArgs,
    },
    Digits {
        a: String,
        #[command(flatten)]
        ring: RingArgs,
    },
}

#[derive(Subcommand)]
enum DieudonneOp {
    Validate {
        #[command(flatten)]
        source: ModuleSource,
    },
    Invariants {
        #[command(flatten)]
        source: ModuleSource,
    },
    Dual {
        #[command(flatten)]
        source: ModuleSource,
    },
    LagrangianSearch {
        #[command(flatten)]
        source: ModuleSource,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum LocalModelOp {
    /// Echelon bases of all `F_q`-points.
    Points {
        #[arg(long)]
        q: u64,
    },
    /// Tangent dimension at every point.
    Tangents {
        #[arg(long)]
        q: u64,
    },
    /// Equation of the chart around the singular point over `W_n(F_q)`.
    Chart {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Kind {
    Element,
    Series,
    Module,
    Quadform,
    Plane,
}

#[derive(Args)]
struct RingArgs {
    /// Residue field order.
    #[arg(long)]
    q: Option<u64>,
    /// Residue characteristic.
    #[arg(long)]
    p: Option<u64>,
    /// Residue field degree.
    #[arg(long)]
    m: Option<usize>,
    /// Witt length; defaults to `SLL_PRECISION` or 3.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct ModuleSource {
    #[arg(long, conflicts_with = "file")]
    fixture: Option<Fixture>,
    #[arg(long)]
    file: Option<PathBuf>,
    #[command(flatten)]
    ring: RingArgs,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Validation(m) => ("validation", m),
            CliError::Io(m) => ("io", m),
            CliError::Internal(m) => ("internal", m),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

fn invalid(msg: impl ToString) -> CliError {
    CliError::Validation(msg.to_string())
}

impl From<JsonError> for CliError {
    fn from(e: JsonError) -> Self {
        invalid(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn parse_frame(s: &str) -> std::result::Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err("expected two indices, e.g. 3,4".into());
    };
    let idx = |t: &str| match t.parse::<usize>() {
        Ok(i @ 1..=4) => Ok(i - 1),
        _ => Err(format!("index {t} is not in 1..=4")),
    };
    Ok([idx(a)?, idx(b)?])
}

fn precision(n: Option<usize>) -> Result<usize> {
    if let Some(n) = n {
        return Ok(n);
    }
    match std::env::var("SLL_PRECISION") {
        Ok(v) => v.trim().parse().map_err(|_| invalid(format!("SLL_PRECISION={v} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

impl RingArgs {
    fn given(&self) -> bool {
        self.q.is_some() || self.p.is_some() || self.m.is_some() || self.n.is_some()
    }

    /// `W_n(F_q)` from the flags, defaulting to `p = 3`, `m = 1`.
    fn ring(&self) -> Result<WittRing> {
        let n = precision(self.n)?;
        let field = match (self.q, self.p, self.m) {
            (Some(q), p, m) => {
                let f = FiniteField::with_order(q).map_err(invalid)?;
                if p.is_some_and(|p| p != f.p()) || m.is_some_and(|m| m != f.m()) {
                    return Err(invalid(format!("--q {q} disagrees with --p/--m")));
                }
                f
            }
            (None, p, m) => FiniteField::with_degree(p.unwrap_or(3), m.unwrap_or(1)).map_err(invalid)?,
        };
        WittRing::new(field, n).map_err(invalid)
    }
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    serde_json::from_str(&read_input(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Internal(e.to_string()))
}

/// An element written as an integer, a coefficient list, or an element
/// object.
fn parse_element(text: &str, ring: &WittRing) -> Result<WittElement> {
    let value: Value = serde_json::from_str(text).map_err(|e| invalid(format!("{text}: {e}")))?;
    match value {
        Value::Number(k) => {
            let k = k.as_i64().ok_or_else(|| invalid(format!("{k} is not a 64-bit integer")))?;
            Ok(ring.from_int(k))
        }
        Value::Array(_) => {
            let coeffs: Vec<i64> = serde_json::from_value(value).map_err(invalid)?;
            ring.element(&coeffs).map_err(invalid)
        }
        Value::Object(_) => {
            let e: ElementJson = serde_json::from_value(value).map_err(invalid)?;
            Ok(e.to_element_in(ring)?)
        }
        _ => Err(invalid(format!("cannot read an element from {text}"))),
    }
}

/// The ring named by the flags, or else by the first element object.
fn element_ring(args: &RingArgs, inputs: &[&str]) -> Result<WittRing> {
    if !args.given() {
        for text in inputs {
            if let Ok(e) = serde_json::from_str::<ElementJson>(text) {
                return Ok(e.ring_json().to_ring()?);
            }
        }
    }
    args.ring()
}

fn witt(op: WittOp) -> Result<Value> {
    let (inputs, args): (Vec<&str>, &RingArgs) = match &op {
        WittOp::Add { a, b, ring } | WittOp::Mul { a, b, ring } => (vec![a, b], ring),
        WittOp::Frob { a, ring } | WittOp::Digits { a, ring } => (vec![a], ring),
    };
    let ring = element_ring(args, &inputs)?;
    let xs = inputs.iter().map(|t| parse_element(t, &ring)).collect::<Result<Vec<_>>>()?;
    let out = match op {
        WittOp::Add { .. } => &xs[0] + &xs[1],
        WittOp::Mul { .. } => &xs[0] * &xs[1],
        WittOp::Frob { .. } => xs[0].frobenius(),
        WittOp::Digits { .. } => xs[0].clone(),
    };
    to_value(&ElementJson::from_element(&out))
}

fn class_json(class: &LocalRingClass, names: &[String]) -> Value {
    let mut v = json!({ "class": class.tag() });
    match class {
        LocalRingClass::Smooth { variable } => v["variable"] = json!(names[*variable]),
        LocalRingClass::OrdinaryDoublePoint { a_prime, valuation } => {
            v["a_prime"] = serde_json::to_value(ElementJson::from_element(a_prime)).expect("plain data");
            v["valuation"] = json!(valuation);
        }
        LocalRingClass::UnitIdeal | LocalRingClass::Undetermined => {}
    }
    v
}

fn series_json(f: &TruncatedSeries) -> Result<Value> {
    to_value(&SeriesJson::from_series(f))
}

fn series_reduce(file: &PathBuf, degree: Option<usize>) -> Result<Value> {
    let input: SeriesJson = read_json(file)?;
    let mut f = input.to_series()?;
    if let Some(d) = degree {
        if d > f.ring().degree() {
            return Err(invalid(format!("--degree {d} exceeds the input truncation {}", f.ring().degree())));
        }
        f = f.truncate(d).map_err(invalid)?;
    }
    let names = f.ring().names().to_vec();
    let class = classify_local_ring(&f);
    let mut out = json!({ "input": series_json(&f)?, "classification": class_json(&class, &names) });
    match reduce(&f).map_err(invalid)? {
        Reduction::Smooth { variable } => {
            out["kind"] = json!("Smooth");
            out["variable"] = json!(names[variable]);
        }
        Reduction::NormalForm(nf) => {
            let certified = nf.certifies(&f);
            if !certified {
                return Err(CliError::Internal("normal form failed its own certificate".into()));
            }
            out["kind"] = json!("NormalForm");
            out["a_prime"] = to_value(&ElementJson::from_element(&nf.a_prime))?;
            out["q_prime"] = to_value(&QuadFormJson::from_form(&nf.q_prime))?;
            out["phi"] = Value::Array(nf.phi.iter().map(series_json).collect::<Result<_>>()?);
            out["unit"] = series_json(&nf.unit)?;
            out["certified"] = json!(certified);
        }
    }
    Ok(out)
}

fn load_module(source: &ModuleSource) -> Result<DieudonneModule> {
    match (&source.fixture, &source.file) {
        (Some(fx), None) => Ok(DieudonneModule::fixture(*fx, &source.ring.ring()?).map_err(invalid)?),
        (None, Some(path)) => {
            if source.ring.given() {
                return Err(invalid("ring flags do not apply to --file input"));
            }
            Ok(read_json::<ModuleJson>(path)?.to_module()?)
        }
        _ => Err(invalid("give exactly one of --fixture and --file")),
    }
}

fn dieudonne(op: DieudonneOp) -> Result<Value> {
    match op {
        DieudonneOp::Validate { source } => {
            let m = load_module(&source)?;
            let mut out = to_value(&m.validate())?;
            out["module"] = to_value(&ModuleJson::from_module(&m))?;
            Ok(out)
        }
        DieudonneOp::Invariants { source } => {
            let m = load_module(&source)?;
            let kernel = m.kernel_type().map_err(invalid)?;
            Ok(json!({ "a_number": m.a_number(), "p_rank": m.p_rank(), "kernel_type": kernel }))
        }
        DieudonneOp::Dual { source } => {
            let m = load_module(&source)?;
            let b = m.dual_lattice().map_err(invalid)?;
            Ok(json!({ "ring": RingJson::from_ring(m.ring()), "basis": matrix_to_json(&b) }))
        }
        DieudonneOp::LagrangianSearch { source, budget } => {
            let m = load_module(&source)?;
            Ok(match m.lagrangian_witness_search(budget).map_err(invalid)? {
                LagrangianSearch::Found(w) => {
                    if !m.verify_witness(&w.basis) {
                        return Err(CliError::Internal("search returned an invalid witness".into()));
                    }
                    json!({ "outcome": "Found", "basis": matrix_to_json(&w.basis), "nodes": w.nodes })
                }
                LagrangianSearch::Exhausted { precision, nodes } => {
                    json!({ "outcome": "Exhausted", "precision": precision, "nodes": nodes })
                }
                LagrangianSearch::BudgetExceeded { nodes } => json!({ "outcome": "BudgetExceeded", "nodes": nodes }),
            })
        }
    }
}

fn deform(source: ModuleSource, frame: Option<[usize; 2]>, degree: Option<usize>) -> Result<Value> {
    let m = load_module(&source)?;
    let degree = degree.unwrap_or_else(|| default_degree(m.ring().p()));
    let fr = match frame {
        Some(y) => HodgeFrame::new(m, y),
        None => HodgeFrame::detect(m),
    }
    .map_err(invalid)?;
    let f = fr.deformation_equation(degree).map_err(invalid)?;
    let class = classify_local_ring(&f);
    let one_based = |ix: [usize; 2]| ix.map(|i| i + 1);
    let mut out = class_json(&class, f.ring().names());
    out["relation"] = json!(f.to_string());
    out["relation_series"] = series_json(&f)?;
    out["frame"] = json!({ "y": one_based(fr.y_indices()), "x": one_based(fr.x_indices()) });
    out["degree"] = json!(degree);
    Ok(out)
}

fn plane_json(p: &IsotropicPlane) -> Result<Value> {
    to_value(&PlaneJson::from_plane(p))
}

fn local_model(op: LocalModelOp) -> Result<Value> {
    match op {
        LocalModelOp::Points { q } => {
            let k = residue_field_of_order(q).map_err(invalid)?;
            let points = enumerate_special_fiber(&k);
            Ok(json!({
                "q": q,
                "count": points.len(),
                "points": points.iter().map(plane_json).collect::<Result<Vec<_>>>()?,
            }))
        }
        LocalModelOp::Tangents { q } => {
            let k = residue_field_of_order(q).map_err(invalid)?;
            let mut points = Vec::new();
            let mut singular = Vec::new();
            for p in enumerate_special_fiber(&k) {
                let dim = p.tangent_dimension();
                if p.is_singular() {
                    singular.push(plane_json(&p)?);
                }
                points.push(json!({ "plane": plane_json(&p)?, "tangent_dimension": dim }));
            }
            Ok(json!({ "q": q, "points": points, "singular": singular }))
        }
        LocalModelOp::Chart { q, n, degree } => {
            let ring = WittRing::with_order(q, precision(n)?).map_err(invalid)?;
            let degree = degree.unwrap_or_else(|| default_degree(ring.p()));
            let center = IsotropicPlane::radical(&ring.residue_field());
            let f = chart_equation(&ring, degree, Some(&center)).map_err(invalid)?;
            let mut out = class_json(&classify_local_ring(&f), f.ring().names());
            out["center"] = plane_json(&center)?;
            out["equation"] = json!(f.to_string());
            out["equation_series"] = series_json(&f)?;
            out["reduction_mod_p"] = json!(f.reduce_mod_p().to_string());
            Ok(out)
        }
    }
}

fn canon(kind: Kind, file: &PathBuf) -> Result<Value> {
    match kind {
        Kind::Element => to_value(&ElementJson::from_element(&read_json::<ElementJson>(file)?.to_element()?)),
        Kind::Series => series_json(&read_json::<SeriesJson>(file)?.to_series()?),
        Kind::Module => to_value(&ModuleJson::from_module(&read_json::<ModuleJson>(file)?.to_module()?)),
        Kind::Quadform => to_value(&QuadFormJson::from_form(&read_json::<QuadFormJson>(file)?.to_form()?)),
        Kind::Plane => plane_json(&read_json::<PlaneJson>(file)?.to_plane()?),
    }
}

fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Witt { op } => witt(op),
        Command::SeriesReduce { file, degree } => series_reduce(&file, degree),
        Command::Dieudonne { op } => dieudonne(op),
        Command::Deform { source, frame, degree } => deform(source, frame, degree),
        Command::LocalModel { op } => local_model(op),
        Command::Canon { kind, file } => canon(kind, &file),
        Command::Check { seed, samples } => check::run(seed, samples),
    }
}

fn emit(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("values serialize");
    // a closed pipe (e.g. `| head`) is not an error of ours
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = invalid(e.kind().to_string() + ": " + e.to_string().trim());
            emit(&err.to_json());
            return ExitCode::from(err.code());
        }
    };
    let result = panic::catch_unwind(|| run(cli))
        .unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(CliError::Internal(msg))
        });
    match result {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            emit(&e.to_json());
            ExitCode::from(e.code())
        }
    }
}
