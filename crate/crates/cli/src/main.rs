use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use metrofan::arrangement::{self, Arrangement, ArrangementError, SignVector};
use metrofan::classes::{class_report, ClassReport};
use metrofan::krw::{build_krw, is_generic, DirectedGraph};
use metrofan::metrics::{parse_metric, Metric, MetricClass};
use metrofan::par::Execution;
use metrofan::reproduce::{reproduce, Target};
use metrofan::tightspan::{hypersimplex_type, same_tight_span_type};

const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_SCALE: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

/// Largest `n` for which `analyze` and `compare` run; beyond it the
/// arrangement and the `S_n` stabilizer scan are refused.
const MAX_ANALYZE_N: usize = arrangement::MAX_STATS_N;

#[derive(Parser)]
#[command(name = "metrofan", version, about = "Polyhedral analysis of finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full report on one metric.
    Analyze {
        file: PathBuf,
        /// Include the facet graphs of the KRW polytope.
        #[arg(long)]
        facets: bool,
        /// Write one DOT file per facet graph into this directory.
        #[arg(long, value_name = "DIR")]
        dot: Option<PathBuf>,
    },
    /// Hyperplanes of the Wasserstein arrangement on n points.
    Arrangement {
        #[arg(long)]
        n: usize,
        /// Also compute the characteristic polynomial and chamber count.
        #[arg(long)]
        count: bool,
    },
    /// Compare two metrics on the same number of points.
    Compare { first: PathBuf, second: PathBuf },
    /// Recompute a bundled table and diff it against the expected values.
    Reproduce {
        /// table1, table2, table3-strict5 or generic5
        target: String,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("metrofan: {}", f.message);
        return ExitCode::from(f.code);
    }
    let result = match cli.command {
        Command::Analyze { file, facets, dot } => cmd_analyze(&file, facets, dot.as_deref()),
        Command::Arrangement { n, count } => cmd_arrangement(n, count),
        Command::Compare { first, second } => cmd_compare(&first, &second),
        Command::Reproduce { target } => cmd_reproduce(&target),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("metrofan: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// `METROFAN_THREADS` caps the rayon pool.
fn configure_threads() -> CmdResult {
    let Ok(value) = std::env::var("METROFAN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::new(EXIT_PARSE, format!("METROFAN_THREADS={value:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::new(1, e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> CmdResult {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::new(1, e.to_string())),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(1, e.to_string()))?;
    emit(&format!("{text}\n"))
}

fn load(path: &Path) -> Result<Metric, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let m = parse_metric(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    if m.validate() == MetricClass::NotPseudometric {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("{}: NOT_PSEUDOMETRIC", path.display()),
        ));
    }
    if m.n() < 3 {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("{}: need at least 3 points, got {}", path.display(), m.n()),
        ));
    }
    if m.n() > MAX_ANALYZE_N {
        return Err(Failure::new(
            EXIT_SCALE,
            format!("{}: n = {} exceeds the supported maximum {MAX_ANALYZE_N}", path.display(), m.n()),
        ));
    }
    Ok(m)
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::new(1, e.to_string())
}

#[derive(Serialize)]
struct SignVectorId {
    hash: String,
    signs: SignVector,
}

#[derive(Serialize)]
struct AnalysisReport {
    metric: Metric,
    class: MetricClass,
    /// Only defined for strict metrics.
    generic: Option<bool>,
    /// Absent when some distance is zero.
    f_vector: Option<Vec<usize>>,
    simplicial: Option<bool>,
    sign_vector: SignVectorId,
    classes: ClassReport,
    tight_span_cells: usize,
    stabilizer_order: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    facet_graphs: Option<Vec<Vec<String>>>,
}

fn edge_labels(g: &DirectedGraph) -> Vec<String> {
    g.edges.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).collect()
}

fn cmd_analyze(path: &Path, facets: bool, dot: Option<&Path>) -> CmdResult {
    let m = load(path)?;
    let strict = m.validate() == MetricClass::Strict;
    let krw = if m.has_zero_distance() {
        None
    } else {
        Some(build_krw(&m).map_err(internal)?)
    };
    let arr = Arrangement::new(m.n());
    let sv = arr.sign_vector(&m);
    let stab = arr.stabilizer(&sv, Execution::Parallel).map_err(internal)?;
    let graphs: Vec<DirectedGraph> = krw
        .as_ref()
        .map(|k| k.facet_graphs().into_iter().collect())
        .unwrap_or_default();
    if let Some(dir) = dot {
        fs::create_dir_all(dir).map_err(|e| Failure::new(1, format!("{}: {e}", dir.display())))?;
        for (k, g) in graphs.iter().enumerate() {
            let file = dir.join(format!("facet_{:03}.dot", k + 1));
            fs::write(&file, g.to_dot(&format!("facet_{}", k + 1)))
                .map_err(|e| Failure::new(1, format!("{}: {e}", file.display())))?;
        }
    }
    let report = AnalysisReport {
        class: m.validate(),
        generic: if strict { Some(is_generic(&m).map_err(internal)?) } else { None },
        f_vector: krw.as_ref().map(|k| k.lattice.f_vector()),
        simplicial: krw.as_ref().map(|k| k.lattice.is_simplicial()),
        sign_vector: SignVectorId {
            hash: sv.hash_hex(),
            signs: sv,
        },
        classes: class_report(&m).map_err(internal)?,
        tight_span_cells: hypersimplex_type(&m).cell_count(),
        stabilizer_order: stab.order(),
        facet_graphs: facets.then(|| graphs.iter().map(edge_labels).collect()),
        metric: m,
    };
    print_json(&report)
}

#[derive(Serialize)]
struct HyperplaneRow {
    k: usize,
    /// 1-based.
    a: Vec<usize>,
    b: Vec<usize>,
    label: String,
    normal: Vec<i64>,
}

#[derive(Serialize)]
struct ChamberCount {
    /// `[power, coefficient]`, highest power first, zero terms omitted.
    characteristic_polynomial: Vec<(usize, i64)>,
    chambers: u64,
    adjacent_chamber_pairs: u64,
}

#[derive(Serialize)]
struct ArrangementReport {
    n: usize,
    hyperplane_count: usize,
    formula: u128,
    lineality_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    hyperplanes: Option<Vec<HyperplaneRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<ChamberCount>,
}

/// Hyperplanes are listed for `n <= 6`.
const MAX_LIST_N: usize = 6;

fn scale_failure(e: ArrangementError) -> Failure {
    Failure::new(EXIT_SCALE, e.to_string())
}

fn cmd_arrangement(n: usize, count: bool) -> CmdResult {
    let stats = arrangement::stats(n).map_err(scale_failure)?;
    let count = if count {
        let (poset, chi) = arrangement::poset_and_charpoly(n, Execution::Parallel).map_err(|e| {
            Failure::new(EXIT_SCALE, format!("chamber counting refused: {e}"))
        })?;
        let dim = poset.ambient_dim;
        Some(ChamberCount {
            characteristic_polynomial: chi
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(r, &c)| (dim - r, c))
                .collect(),
            chambers: poset.chamber_count(),
            adjacent_chamber_pairs: poset.adjacent_chamber_pairs(),
        })
    } else {
        None
    };
    let hyperplanes = (n <= MAX_LIST_N).then(|| {
        Arrangement::new(n)
            .hyperplanes
            .iter()
            .map(|h| HyperplaneRow {
                k: h.k,
                a: h.a.iter().map(|v| v + 1).collect(),
                b: h.b.iter().map(|v| v + 1).collect(),
                label: h.to_string(),
                normal: h.normal.clone(),
            })
            .collect()
    });
    print_json(&ArrangementReport {
        n,
        hyperplane_count: stats.hyperplanes,
        formula: stats.formula,
        lineality_dim: stats.lineality_dim,
        hyperplanes,
        count,
    })
}

#[derive(Serialize)]
struct Comparison {
    same_wasserstein_cone: bool,
    same_tight_span_type: bool,
    /// Absent when either metric has a zero distance.
    same_f_vector: Option<bool>,
}

fn cmd_compare(first: &Path, second: &Path) -> CmdResult {
    let m1 = load(first)?;
    let m2 = load(second)?;
    if m1.n() != m2.n() {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("metrics on {} and {} points cannot be compared", m1.n(), m2.n()),
        ));
    }
    let f = |m: &Metric| -> Result<Option<Vec<usize>>, Failure> {
        if m.has_zero_distance() {
            return Ok(None);
        }
        Ok(Some(build_krw(m).map_err(internal)?.lattice.f_vector()))
    };
    let (f1, f2) = (f(&m1)?, f(&m2)?);
    print_json(&Comparison {
        same_wasserstein_cone: arrangement::same_open_cone(&m1, &m2),
        same_tight_span_type: same_tight_span_type(&m1, &m2),
        same_f_vector: f1.zip(f2).map(|(a, b)| a == b),
    })
}

fn cmd_reproduce(target: &str) -> CmdResult {
    let target: Target = target.parse().map_err(|e: String| Failure::new(EXIT_PARSE, e))?;
    let r = reproduce(target, Execution::Parallel).map_err(internal)?;
    emit(&r.actual.to_csv())?;
    for note in &r.out_of_scope {
        eprintln!("out of scope: {note}");
    }
    for d in &r.diffs {
        eprintln!("mismatch: {d}");
    }
    eprintln!("{}", r.summary());
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_MISMATCH, format!("{target}: reproduction mismatch")))
    }
}
