//! Command-line front end: graph ingestion, computation subcommands, and the
//! one-shot verification battery.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing property, 2 on
//! usage or parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use berezin::cumulants::{dgff_covariance, gradient_squared_table, squared_field_table, GridSpec};
use berezin::graph::{DirectedEdge, WeightedGraph};
use berezin::matrix::Matrix;
use berezin::scalar::{Rat, Scalar};
use berezin::superspace::{
    localization_check, polynomial_of_inner_form, supergaussian, LocalizationReport,
};
use berezin::verify::run_battery;
use berezin::Error;

#[derive(Parser)]
#[command(name = "berezin", version, about = "Grassmann-Berezin calculus and uniform spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args)]
struct CommonGraphArgs {
    /// Graph file: lines `u v w`, `#` comments, weights decimal or `p/q`
    graph: PathBuf,

    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,

    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Count spanning trees along every feasible route
    CountTrees {
        #[command(flatten)]
        common: CommonGraphArgs,
        /// Root vertex for the reduced Laplacian
        #[arg(long, default_value_t = 0)]
        root: usize,
    },
    /// Edge inclusion/exclusion probabilities by all routes
    EdgeProb {
        #[command(flatten)]
        common: CommonGraphArgs,
        /// Edges required in the tree, e.g. `0-1,2-3`
        #[arg(long, default_value = "")]
        edges: String,
        /// Edges excluded from the tree
        #[arg(long, default_value = "")]
        exclude_edges: String,
    },
    /// Dump the transfer-impedance matrix over chosen edges
    Transfer {
        #[command(flatten)]
        common: CommonGraphArgs,
        #[arg(long, default_value_t = 0)]
        root: usize,
        /// Oriented edges `u-v,...`; defaults to all edges, low-to-high
        #[arg(long, default_value = "")]
        edges: String,
    },
    /// Sample spanning trees with Wilson's algorithm
    Sample {
        #[command(flatten)]
        common: CommonGraphArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Squared-field and gradient-squared cumulant tables for the DGFF
    Cumulants {
        /// Lattice sides, e.g. `6x6`
        #[arg(long)]
        lattice: String,
        /// Boundary choice; only `all-sides` is supported
        #[arg(long, default_value = "all-sides")]
        boundary: String,
        /// Interior points `x,y;x,y`; defaults to a central row
        #[arg(long, default_value = "")]
        points: String,
        /// Largest cumulant arity in the tables
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Supergaussian and localization reports
    Susy {
        /// Single-site coefficient: the form A = [a]
        #[arg(long)]
        a: String,
        /// Degree of the random polynomial applied to (u,Au); 0 means the
        /// bare supergaussian
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run the full invariant battery
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::CountTrees { common, root } => match common.mode {
            Mode::Exact => count_trees::<Rat>(&common, root),
            Mode::Float => count_trees::<f64>(&common, root),
        },
        Command::EdgeProb { common, edges, exclude_edges } => match common.mode {
            Mode::Exact => edge_prob::<Rat>(&common, &edges, &exclude_edges),
            Mode::Float => edge_prob::<f64>(&common, &edges, &exclude_edges),
        },
        Command::Transfer { common, root, edges } => match common.mode {
            Mode::Exact => transfer::<Rat>(&common, root, &edges),
            Mode::Float => transfer::<f64>(&common, root, &edges),
        },
        Command::Sample { common, samples, seed } => match common.mode {
            Mode::Exact => sample::<Rat>(&common, samples, seed),
            Mode::Float => sample::<f64>(&common, samples, seed),
        },
        Command::Cumulants { lattice, boundary, points, max_k, format } => {
            cumulants(&lattice, &boundary, &points, max_k, format)
        }
        Command::Susy { a, degree, seed, format } => susy(&a, degree, seed, format),
        Command::Verify { seed } => Ok(verify(seed)),
    }
}

/// Loads and validates a graph file; connectivity is part of validation.
fn parse_graph<S: Scalar>(path: &PathBuf) -> Result<WeightedGraph<S>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })?;
    let graph = WeightedGraph::from_text(&text)?;
    if !graph.is_connected() {
        return Err(Error::Connectivity(format!(
            "{} describes a disconnected graph",
            path.display()
        )));
    }
    Ok(graph)
}

fn scalar_value<S: Scalar>(v: &S) -> Value {
    if S::EXACT {
        Value::String(v.to_string())
    } else {
        json!(v.to_f64())
    }
}

fn matrix_value<S: Scalar>(m: &Matrix<S>) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| Value::Array((0..m.cols()).map(|j| scalar_value(m.at(i, j))).collect()))
        .collect();
    Value::Array(rows)
}

fn emit(format: Format, value: &Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("valid json")),
        Format::Tsv => print_tsv("", value),
    }
}

fn print_tsv(prefix: &str, value: &Value) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                print_tsv(&key, v);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                print_tsv(&format!("{prefix}[{i}]"), v);
            }
        }
        other => println!("{prefix}\t{other}"),
    }
}

/// Parses `u-v,u-v` pairs into edge indices of the graph.
fn parse_edge_list<S: Scalar>(graph: &WeightedGraph<S>, text: &str) -> Result<Vec<usize>, Error> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (u, v) = item
            .split_once('-')
            .ok_or_else(|| Error::Argument(format!("bad edge `{item}`, expected `u-v`")))?;
        let u: usize = u
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad vertex in `{item}`")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad vertex in `{item}`")))?;
        let idx = graph
            .edge_index(u, v)
            .ok_or_else(|| Error::Argument(format!("({u},{v}) is not a graph edge")))?;
        out.push(idx);
    }
    Ok(out)
}

fn parse_directed_edges<S: Scalar>(
    graph: &WeightedGraph<S>,
    text: &str,
) -> Result<Vec<DirectedEdge>, Error> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (u, v) = item
            .split_once('-')
            .ok_or_else(|| Error::Argument(format!("bad edge `{item}`, expected `u-v`")))?;
        let tail: usize = u
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad vertex in `{item}`")))?;
        let head: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad vertex in `{item}`")))?;
        if graph.edge_index(tail, head).is_none() {
            return Err(Error::Argument(format!("({tail},{head}) is not a graph edge")));
        }
        out.push(DirectedEdge { tail, head });
    }
    Ok(out)
}

fn count_trees<S: Scalar>(common: &CommonGraphArgs, root: usize) -> Result<ExitCode, Error> {
    let graph: WeightedGraph<S> = parse_graph(&common.graph)?;
    let det = graph.tree_count(root)?;
    let mut report = json!({
        "vertices": graph.vertex_count(),
        "edges": graph.edges().len(),
        "root": root,
        "det": scalar_value(&det),
    });
    match graph.tree_count_berezin(root) {
        Ok(v) => report["berezin"] = scalar_value(&v),
        Err(Error::Capacity(_)) => report["berezin"] = Value::Null,
        Err(e) => return Err(e),
    }
    match graph.tree_weight_sum_enumerated() {
        Ok(v) => report["enumeration"] = scalar_value(&v),
        Err(Error::Capacity(_)) => report["enumeration"] = Value::Null,
        Err(e) => return Err(e),
    }
    emit(common.format, &report);
    Ok(ExitCode::SUCCESS)
}

fn edge_prob<S: Scalar>(
    common: &CommonGraphArgs,
    edges: &str,
    exclude_edges: &str,
) -> Result<ExitCode, Error> {
    let graph: WeightedGraph<S> = parse_graph(&common.graph)?;
    let include = parse_edge_list(&graph, edges)?;
    let exclude = parse_edge_list(&graph, exclude_edges)?;
    let determinant = graph.edge_event_probability_inclusion_exclusion(&include, &exclude)?;
    let mut report = json!({
        "edges": edges,
        "exclude_edges": exclude_edges,
        "determinant": scalar_value(&determinant),
    });
    match graph.edge_event_probability_fermionic(&include, &exclude, 0) {
        Ok(v) => report["fermionic"] = scalar_value(&v),
        Err(Error::Capacity(_)) => report["fermionic"] = Value::Null,
        Err(e) => return Err(e),
    }
    match graph.event_probability_enumerated(&include, &exclude) {
        Ok(v) => report["enumeration"] = scalar_value(&v),
        Err(Error::Capacity(_)) => report["enumeration"] = Value::Null,
        Err(e) => return Err(e),
    }
    emit(common.format, &report);
    Ok(ExitCode::SUCCESS)
}

fn transfer<S: Scalar>(
    common: &CommonGraphArgs,
    root: usize,
    edges: &str,
) -> Result<ExitCode, Error> {
    let graph: WeightedGraph<S> = parse_graph(&common.graph)?;
    let directed = if edges.is_empty() {
        (0..graph.edges().len())
            .map(|e| graph.oriented(e))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        parse_directed_edges(&graph, edges)?
    };
    let t = graph.transfer_impedance(root, &directed)?;
    let labels: Vec<String> = t
        .edges
        .iter()
        .map(|d| format!("{}->{}", d.tail, d.head))
        .collect();
    let report = json!({
        "root": root,
        "edges": labels,
        "bare": matrix_value(&t.bare),
        "weighted": matrix_value(&t.weighted),
    });
    emit(common.format, &report);
    Ok(ExitCode::SUCCESS)
}

fn sample<S: Scalar>(
    common: &CommonGraphArgs,
    samples: usize,
    seed: u64,
) -> Result<ExitCode, Error> {
    let graph: WeightedGraph<S> = parse_graph(&common.graph)?;
    let freq = graph.sample_frequencies(seed, samples)?;
    let exact: Option<(Vec<_>, S)> = match graph.enumerate_trees() {
        Ok(trees) => {
            let total = graph.tree_weight_sum_enumerated()?;
            Some((trees, total))
        }
        Err(Error::Capacity(_)) => None,
        Err(e) => return Err(e),
    };
    let mut rows = Vec::new();
    for (tree, count) in &freq {
        let mut row = json!({
            "edges": tree.edges,
            "count": count,
            "frequency": *count as f64 / samples as f64,
        });
        if let Some((_, total)) = &exact {
            let p = graph.tree_weight(tree) / total.clone();
            row["probability"] = scalar_value(&p);
        }
        rows.push(row);
    }
    let report = json!({
        "samples": samples,
        "seed": seed,
        "distinct_trees": freq.len(),
        "trees": rows,
    });
    emit(common.format, &report);
    Ok(ExitCode::SUCCESS)
}

fn parse_lattice(text: &str) -> Result<Vec<usize>, Error> {
    let sides: Result<Vec<usize>, _> = text.split('x').map(|s| s.trim().parse()).collect();
    sides.map_err(|_| Error::Argument(format!("bad lattice spec `{text}`, expected e.g. `6x6`")))
}

fn parse_points(grid: &GridSpec, text: &str) -> Result<Vec<usize>, Error> {
    let mut out = Vec::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let coords: Result<Vec<usize>, _> = item.split(',').map(|c| c.trim().parse()).collect();
        let coords =
            coords.map_err(|_| Error::Argument(format!("bad point `{item}`")))?;
        let v = grid
            .index(&coords)
            .ok_or_else(|| Error::Range(format!("point `{item}` outside the lattice")))?;
        out.push(v);
    }
    Ok(out)
}

fn cumulants(
    lattice: &str,
    boundary: &str,
    points: &str,
    max_k: usize,
    format: Format,
) -> Result<ExitCode, Error> {
    if boundary != "all-sides" {
        return Err(Error::Argument(format!(
            "unsupported boundary `{boundary}`; only `all-sides` is available"
        )));
    }
    let sides = parse_lattice(lattice)?;
    let grid = GridSpec::with_all_sides_boundary(sides)?;
    let field = dgff_covariance::<Rat>(&grid)?;
    let chosen = if points.is_empty() {
        default_points(&grid)
    } else {
        parse_points(&grid, points)?
    };
    let squared = squared_field_table(&field, &chosen, max_k)?;
    let gradient = gradient_squared_table(&field, &chosen, max_k)?;
    match format {
        Format::Json => {
            let report = json!({
                "lattice": grid.sides(),
                "squared_field": serde_json::to_value(&squared).expect("serializable"),
                "gradient_squared": serde_json::to_value(&gradient).expect("serializable"),
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("valid json"));
        }
        Format::Tsv => {
            println!("# squared field");
            print!("{}", squared.to_tsv());
            println!("# gradient squared");
            print!("{}", gradient.to_tsv());
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Up to four interior points along the central row, spaced out for
/// separation-dependence tables; gradient shifts stay inside the box.
fn default_points(grid: &GridSpec) -> Vec<usize> {
    let interior: Vec<usize> = grid
        .interior()
        .into_iter()
        .filter(|&v| (0..grid.dim()).all(|d| grid.shift(v, d).is_some()))
        .collect();
    if grid.dim() != 2 {
        return interior.into_iter().take(4).collect();
    }
    let mid = grid.sides()[1] / 2;
    let row: Vec<usize> = interior
        .iter()
        .copied()
        .filter(|&v| grid.coords(v)[1] == mid)
        .collect();
    let picked = if row.is_empty() { interior } else { row };
    picked.into_iter().take(4).collect()
}

fn susy(a_text: &str, degree: usize, seed: u64, format: Format) -> Result<ExitCode, Error> {
    let a = Rat::parse(a_text)?;
    if a <= Rat::from_i64(0) {
        return Err(Error::Argument("the coefficient a must be positive".into()));
    }
    let form = Matrix::from_fn(1, 1, |_, _| a.clone());
    let (label, report): (String, LocalizationReport<Rat>) = if degree == 0 {
        let f = supergaussian(&form)?;
        ("exp(-(u,Au))".into(), localization_check(&f)?)
    } else {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<Rat> = (0..=degree)
            .map(|_| Rat::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=4)))
            .collect();
        let f = polynomial_of_inner_form(&g, &form)?;
        (format!("g((u,Au))·exp(-(u,Au)), deg {degree}"), localization_check(&f)?)
    };
    let value = json!({
        "matrix": matrix_value(&form),
        "function": label,
        "integral": scalar_value(&report.integral),
        "body_at_zero": scalar_value(&report.body_at_zero),
        "q_closed": report.q_closed,
        "localized": report.localized,
    });
    emit(format, &value);
    Ok(ExitCode::SUCCESS)
}

fn verify(seed: u64) -> ExitCode {
    let reports = run_battery(seed);
    let mut failures = 0;
    for report in &reports {
        if report.passed {
            println!("PASS {} ({} cases)", report.name, report.cases);
        } else {
            failures += 1;
            println!("FAIL {}: {}", report.name, report.detail);
        }
    }
    println!(
        "verify: {} passed, {} failed (seed {seed})",
        reports.len() - failures,
        failures
    );
    if failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
