use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use transport_core::formula::Format;
use transport_core::oracle::{build_counterexample, certify_counterexample, verify_with_cardinality, VerifyReport};
use transport_core::separation::{open_path, VertexSet};
use transport_core::sid::Classification;
use transport_core::{examples, transport, NodeSet, Query, SHedge, SelectionDiagram, TransportResult};

const TRANSPORTABLE: u8 = 0;
const INPUT_ERROR: u8 = 1;
const NOT_TRANSPORTABLE: u8 = 2;

#[derive(Parser)]
#[command(name = "transportability", version, about = "Decide and certify transportability of causal effects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a transport formula or report an s-hedge
    Transport(TransportArgs),
    /// Print the s-hedge witnessing non-transportability
    Witness(QueryArgs),
    /// Check the answer against random exact models
    Verify(VerifyArgs),
    /// Build two models that agree on all data but not on the effect
    Counterexample(CounterexampleArgs),
    /// Test d-separation in a selection diagram
    Dsep(DsepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Latex,
    Json,
}

#[derive(Args)]
struct QueryArgs {
    /// Diagram file, or the name of a bundled example such as fig1c.sd
    #[arg(long)]
    diagram: PathBuf,
    /// Treatments, comma separated
    #[arg(long = "do", value_delimiter = ',', num_args = 0..)]
    treatments: Vec<String>,
    /// Outcomes, comma separated
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    on: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct TransportArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Verify the formula on this many random model pairs
    #[arg(long)]
    verify: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest cardinality of random model variables
    #[arg(long, default_value_t = 2)]
    max_card: usize,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// AND every outcome with a private fair coin to keep all
    /// observational distributions positive
    #[arg(long)]
    positive: bool,
}

#[derive(Args)]
struct DsepArgs {
    #[arg(long)]
    diagram: PathBuf,
    /// First vertex set; `@S` stands for all selection nodes
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    a: Vec<String>,
    /// Second vertex set; `@S` stands for all selection nodes
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    b: Vec<String>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    given: Vec<String>,
    /// Remove arrows into these nodes first
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    cut_in: Vec<String>,
    /// Remove arrows out of these nodes first
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    cut_out: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { TRANSPORTABLE };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = match &cli.command {
        Command::Transport(a) => a.query.format == OutputFormat::Json,
        Command::Witness(a) => a.format == OutputFormat::Json,
        Command::Verify(a) => a.query.format == OutputFormat::Json,
        Command::Counterexample(_) => true,
        Command::Dsep(a) => a.format == OutputFormat::Json,
    };
    let result = match cli.command {
        Command::Transport(a) => cmd_transport(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::Dsep(a) => cmd_dsep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            if json {
                println!("{}", json!({ "error": message }));
            }
            ExitCode::from(INPUT_ERROR)
        }
    }
}

/// Reads a diagram file. A path that does not exist but names a bundled
/// example, with or without the `.sd` extension, loads that example.
fn load_diagram(path: &Path) -> Result<SelectionDiagram, Failure> {
    match std::fs::read_to_string(path) {
        Ok(text) => SelectionDiagram::parse(&text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        Err(io) => {
            let name = path.to_string_lossy();
            let name = name.strip_suffix(".sd").unwrap_or(&name);
            examples::diagram(name).ok_or_else(|| Failure(format!("{}: {io}", path.display())))
        }
    }
}

fn set(names: &[String]) -> NodeSet {
    names.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn load_query(a: &QueryArgs) -> Result<(SelectionDiagram, Query), Failure> {
    let d = load_diagram(&a.diagram)?;
    let q = Query::for_diagram(&d, set(&a.treatments), set(&a.on))?;
    Ok((d, q))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn render(e: &transport_core::Expr, f: OutputFormat) -> String {
    match f {
        OutputFormat::Latex => e.render(Format::Latex),
        _ => e.render(Format::Text),
    }
}

fn report_json(r: &VerifyReport) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    v["summary"] = json!(r.summary());
    v
}

fn hedge_json(h: &SHedge) -> Value {
    json!({ "transportable": false, "hedge": h.to_json() })
}

fn formula_json(e: &transport_core::Expr, c: Classification) -> Value {
    json!({
        "transportable": true,
        "classification": c,
        "formula": e.to_json(),
        "text": e.render(Format::Text),
        "latex": e.render(Format::Latex),
    })
}

fn cmd_transport(a: TransportArgs) -> Result<u8, Failure> {
    let (d, q) = load_query(&a.query)?;
    let json = a.query.format == OutputFormat::Json;
    match transport(&q, &d)? {
        TransportResult::Formula { expr, classification } => {
            let report = match a.verify {
                Some(n) => Some(verify_with_cardinality(&expr, &d, &q, n, a.seed, 2)?),
                None => None,
            };
            if json {
                let mut v = formula_json(&expr, classification);
                if let Some(r) = &report {
                    v["verify"] = report_json(r);
                }
                print_json(&v);
            } else {
                println!("{}", render(&expr, a.query.format));
                if let Some(r) = &report {
                    println!("{}", r.summary());
                    if let Some(m) = &r.first_mismatch {
                        eprintln!("mismatch in trial {} at {:?}: expected {}, got {}", m.trial, m.assignment, m.expected, m.got);
                    }
                }
            }
            Ok(TRANSPORTABLE)
        }
        TransportResult::Failure { hedge, .. } => {
            eprintln!("not transportable");
            if json {
                print_json(&hedge_json(&hedge));
            } else {
                print!("{}", hedge.render());
            }
            Ok(NOT_TRANSPORTABLE)
        }
    }
}

fn cmd_witness(a: QueryArgs) -> Result<u8, Failure> {
    let (d, q) = load_query(&a)?;
    let json = a.format == OutputFormat::Json;
    match transport(&q, &d)?.hedge() {
        Some(h) => {
            if json {
                print_json(&hedge_json(h));
            } else {
                print!("{}", h.render());
            }
            Ok(NOT_TRANSPORTABLE)
        }
        None => {
            if json {
                print_json(&json!({ "transportable": true }));
            } else {
                println!("transportable");
            }
            Ok(TRANSPORTABLE)
        }
    }
}

fn disagreement_json(d: &Option<(BTreeMap<String, usize>, String, String)>) -> Value {
    match d {
        Some((assignment, p1, p2)) => json!({ "assignment": assignment, "first": p1, "second": p2 }),
        None => Value::Null,
    }
}

/// Formulas are checked against random models; hedges are checked by
/// certifying their two-model counterexample.
fn cmd_verify(a: VerifyArgs) -> Result<u8, Failure> {
    let (d, q) = load_query(&a.query)?;
    let json = a.query.format == OutputFormat::Json;
    match transport(&q, &d)? {
        TransportResult::Formula { expr, classification } => {
            let r = verify_with_cardinality(&expr, &d, &q, a.trials, a.seed, a.max_card)?;
            if json {
                let mut v = formula_json(&expr, classification);
                v["verify"] = report_json(&r);
                print_json(&v);
            } else {
                println!("{}", expr.render(Format::Text));
                println!("{}", r.summary());
            }
            if let Some(m) = &r.first_mismatch {
                eprintln!("mismatch in trial {} (seed {}) at {:?}: expected {}, got {}", m.trial, m.seed, m.assignment, m.expected, m.got);
                return Err(Failure("formula disagrees with the ground truth".into()));
            }
            Ok(TRANSPORTABLE)
        }
        TransportResult::Failure { hedge, .. } => {
            let (m1, m2) = build_counterexample(&hedge, &d, false)?;
            let c = certify_counterexample(&m1, &m2, &q)?;
            if json {
                let mut v = hedge_json(&hedge);
                v["certificate"] = json!({ "agree": c.agree, "disagreement": disagreement_json(&c.disagreement) });
                print_json(&v);
            } else {
                print!("{}", hedge.render());
                match &c.disagreement {
                    Some((assignment, p1, p2)) if c.agree => {
                        println!("counterexample certified: models agree on all data, effects differ at {assignment:?}: {p1} vs {p2}")
                    }
                    _ => println!("counterexample not certified: {c:?}"),
                }
            }
            if !c.is_valid() {
                return Err(Failure("counterexample failed certification".into()));
            }
            Ok(NOT_TRANSPORTABLE)
        }
    }
}

fn cmd_counterexample(a: CounterexampleArgs) -> Result<u8, Failure> {
    let (d, q) = load_query(&a.query)?;
    let Some(hedge) = transport(&q, &d)?.hedge().cloned() else {
        eprintln!("transportable: no counterexample exists");
        print_json(&json!({ "transportable": true }));
        return Ok(TRANSPORTABLE);
    };
    let (m1, m2) = build_counterexample(&hedge, &d, a.positive)?;
    let c = certify_counterexample(&m1, &m2, &q)?;
    print_json(&json!({
        "transportable": false,
        "query": { "do": q.x(), "on": q.y() },
        "hedge": hedge.to_json(),
        "positive": a.positive,
        "models": [m1.to_json(), m2.to_json()],
        "agree": c.agree,
        "disagreement": disagreement_json(&c.disagreement),
    }));
    Ok(NOT_TRANSPORTABLE)
}

fn vertex_set(names: &[String]) -> VertexSet {
    let mut v = VertexSet::nodes(set(&names.iter().filter(|n| n.trim() != "@S").cloned().collect::<Vec<_>>()));
    v.selection = names.iter().any(|n| n.trim() == "@S");
    v
}

fn is_exogenous(label: &str) -> bool {
    label.starts_with("U[") || label.starts_with("S[")
}

fn render_path(d: &SelectionDiagram, path: &[String]) -> String {
    let mut out = path[0].clone();
    for w in path.windows(2) {
        let forward = is_exogenous(&w[0]) || (!is_exogenous(&w[1]) && d.has_directed(&w[0], &w[1]));
        out.push_str(if forward { " -> " } else { " <- " });
        out.push_str(&w[1]);
    }
    out
}

fn cmd_dsep(a: DsepArgs) -> Result<u8, Failure> {
    let d = load_diagram(&a.diagram)?;
    let g = d.mutilate(&set(&a.cut_in), &set(&a.cut_out))?;
    let path = open_path(&g, &vertex_set(&a.a), &vertex_set(&a.b), &set(&a.given))?;
    if a.format == OutputFormat::Json {
        print_json(&json!({ "separated": path.is_none(), "path": path }));
    } else {
        match &path {
            None => println!("separated"),
            Some(p) => {
                println!("connected");
                println!("{}", render_path(&g, p));
            }
        }
    }
    Ok(0)
}
