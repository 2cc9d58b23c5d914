use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use idp_lab::decompose::Decomposer;
use idp_lab::fans2d::{self, Fans2dReport, PlaneFan};
use idp_lab::polytope::{idp_report, raw, IdpReport, IdpVerdict, LatticePolytope};
use idp_lab::sweep::{run_sweep, SweepReport};
use idp_lab::Error;
use serde::Serialize;
use serde_json::{json, Value};

mod input;

use input::{build_fan, read_grid, read_heights, read_plane_rays, read_spec, BuiltFan, Heights, Spec};

#[derive(Parser)]
#[command(name = "idp-lab", version, about = "Lattice polytopes of smooth fans and the integer decomposition property")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for sweeps and searches (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build a five-collection fan and print its rays.
    Gen {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Brute-force IDP check for a pair of heights (or two planar point sets).
    Idp {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        heights: Option<PathBuf>,
    },
    /// Write points of P + Q as sums of lattice points of P and Q.
    Decompose {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        heights: Option<PathBuf>,
        /// Comma-separated coordinates, e.g. "-2,0,7".
        #[arg(long, allow_hyphen_values = true, conflicts_with = "all", required_unless_present = "all")]
        alpha: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Run decomposer and brute force over a parameter grid.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        max_instances: Option<u64>,
    },
    /// Search smooth complete planar fans for IDP counterexamples.
    Fans2d {
        /// Number of rays, 3 to 8.
        #[arg(long, required_unless_present = "fan")]
        rays: Option<usize>,
        /// Bound on the normalized heights.
        #[arg(long, default_value_t = 2)]
        bound: i64,
        /// Search a single fan: a JSON list of rays in counter-clockwise order.
        #[arg(long, conflicts_with = "rays")]
        fan: Option<PathBuf>,
        #[arg(long)]
        max_instances: Option<u64>,
    },
}

/// An error with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConvex { .. }
            | Error::NegativeCanonicalParameter { .. }
            | Error::PointNotInSum
            | Error::OutsideSimplex { .. }
            | Error::ResourceCap { .. }
            | Error::CoordinateOverflow => 3,
            Error::ConvexityPostcheckFailed(_)
            | Error::NoLatticePoint
            | Error::InvariantBreach { .. }
            | Error::NotCovered => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

struct Output {
    json: Value,
    text: String,
    code: u8,
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize to JSON")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let workers = cli.workers.unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
        eprintln!("idp-lab: cannot start worker pool: {e}");
        return ExitCode::from(4);
    }
    let result = run(&cli.command).and_then(|out| {
        let body = match cli.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&out.json).expect("JSON values print");
                s.push('\n');
                s
            }
            Format::Text => out.text,
        };
        write_output(cli.out.as_deref(), &body)?;
        Ok(out.code)
    });
    eprintln!(
        "idp-lab: {:.3} s wall, {} workers",
        started.elapsed().as_secs_f64(),
        rayon::current_num_threads()
    );
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("idp-lab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_output(path: Option<&Path>, body: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, body)
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", p.display()))),
        None => match std::io::stdout().lock().write_all(body.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(Failure::invalid(format!("cannot write to standard output: {e}")))
            }
            _ => Ok(()),
        },
    }
}

fn run(command: &Command) -> Result<Output, Failure> {
    match command {
        Command::Gen { spec } => cmd_gen(spec),
        Command::Idp { spec, heights } => cmd_idp(spec, heights.as_deref()),
        Command::Decompose {
            spec,
            heights,
            alpha,
            all,
        } => cmd_decompose(spec, heights.as_deref(), alpha.as_deref(), *all),
        Command::Sweep { spec, max_instances } => cmd_sweep(spec, *max_instances),
        Command::Fans2d {
            rays,
            bound,
            fan,
            max_instances,
        } => cmd_fans2d(*rays, *bound, fan.as_deref(), *max_instances),
    }
}

fn cmd_gen(spec: &Path) -> Result<Output, Failure> {
    let built = match read_spec(spec)?.0 {
        Spec::Batyrev(p) => build_fan(Spec::Batyrev(p))?,
        _ => return Err(Failure::invalid("gen expects a five-collection spec {\"p\", \"b\", \"c\"}")),
    };
    let BuiltFan::Batyrev(st) = built else {
        unreachable!("a five-collection spec builds a five-collection fan")
    };
    let labels: Vec<String> = st.labels().iter().map(ToString::to_string).collect();
    let fan = st.fan();
    let json = json!({
        "params": st.params(),
        "dim": st.dim(),
        "labels": labels,
        "fan": fan.spec(),
        "num_maximal_cones": fan.maximal_cones().len(),
        "relations_verified": true,
    });
    let mut text = format!("n = {}, {} rays, {} maximal cones\n", st.dim(), labels.len(), fan.maximal_cones().len());
    for (label, ray) in labels.iter().zip(fan.rays().row_vectors()) {
        let _ = writeln!(text, "{label:>4} {ray}");
    }
    for c in fan.primitive_collections() {
        let names: Vec<&str> = c.iter().map(|&r| labels[r].as_str()).collect();
        let _ = writeln!(text, "collection {{{}}}", names.join(", "));
    }
    Ok(Output { json, text, code: 0 })
}

fn heights_for(spec_heights: Option<Heights>, path: Option<&Path>) -> Result<Heights, Failure> {
    match (path, spec_heights) {
        (Some(p), _) => read_heights(p),
        (None, Some(h)) => Ok(h),
        (None, None) => Err(Failure::invalid("no heights: pass --heights or put h, h_prime in the spec")),
    }
}

fn idp_text(report: &IdpReport) -> String {
    let mut text = String::new();
    for (name, p) in [("P", &report.p), ("Q", &report.q), ("P+Q", &report.sum)] {
        let vertices: Vec<String> = p.vertices.iter().map(ToString::to_string).collect();
        let _ = writeln!(text, "{name}: {} lattice points, vertices {}", p.num_lattice_points, vertices.join(" "));
    }
    match &report.idp {
        IdpVerdict::Pass => text.push_str("IDP: pass\n"),
        IdpVerdict::Witness(w) => {
            let _ = writeln!(text, "IDP: fails, {} witnesses", w.len());
            for x in w {
                let _ = writeln!(text, "  {x:?}");
            }
        }
    }
    text
}

fn cmd_idp(spec: &Path, heights: Option<&Path>) -> Result<Output, Failure> {
    let (spec, spec_heights) = read_spec(spec)?;
    let report = match spec {
        Spec::Points { p, q } => raw::idp_report(&p, &q)?,
        spec => {
            let built = build_fan(spec)?;
            let hs = heights_for(spec_heights, heights)?;
            let p = LatticePolytope::new(built.fan(), built.resolve(&hs.h)?)?;
            let q = LatticePolytope::new(built.fan(), built.resolve(&hs.h_prime)?)?;
            idp_report(&p, &q)?
        }
    };
    let code = if report.idp.is_pass() { 0 } else { 1 };
    Ok(Output {
        json: to_json(&report),
        text: idp_text(&report),
        code,
    })
}

fn cmd_decompose(spec: &Path, heights: Option<&Path>, alpha: Option<&str>, all: bool) -> Result<Output, Failure> {
    let (spec, spec_heights) = read_spec(spec)?;
    if !matches!(spec, Spec::Batyrev(_)) {
        return Err(Failure::from(Error::Unsupported(
            "the decomposer needs a five-collection spec {\"p\", \"b\", \"c\"}".into(),
        )));
    }
    let built = build_fan(spec)?;
    let BuiltFan::Batyrev(st) = &built else {
        unreachable!("checked above")
    };
    let hs = heights_for(spec_heights, heights)?;
    let (h, h2) = (built.resolve(&hs.h)?, built.resolve(&hs.h_prime)?);
    let dec = Decomposer::new(st, &h, &h2)?;
    let certificates = if all {
        dec.decompose_all()?
    } else {
        let alpha = input::parse_alpha(alpha.unwrap_or_default())?;
        vec![dec.decompose(&alpha)?]
    };
    // Re-check independently of the decomposer before writing anything.
    for c in &certificates {
        c.validate(st.fan(), &h, &h2)?;
    }
    let mut text = String::new();
    for c in &certificates {
        let _ = writeln!(
            text,
            "{} = {} + {}  (case {}, {})",
            c.alpha,
            c.beta,
            c.gamma,
            c.case.number(),
            c.branch
        );
    }
    let json = if all {
        json!({ "count": certificates.len(), "certificates": certificates })
    } else {
        to_json(&certificates[0])
    };
    Ok(Output { json, text, code: 0 })
}

fn sweep_text(r: &SweepReport) -> String {
    let mut text = format!(
        "{} structures, {} instances ({} not convex), {} points decomposed, {} slices verified, {} failures\n",
        r.structures,
        r.instances,
        r.not_convex,
        r.points_decomposed,
        r.fibers_verified,
        r.failures.len()
    );
    for f in &r.failures {
        let _ = writeln!(text, "  p={:?} h={} h'={}: {}", f.params.p, f.h, f.h_prime, f.detail);
    }
    text
}

fn cmd_sweep(spec: &Path, max_instances: Option<u64>) -> Result<Output, Failure> {
    let grid = read_grid(spec)?;
    let report = run_sweep(&grid, max_instances)?;
    let code = if report.passed() { 0 } else { 4 };
    Ok(Output {
        json: to_json(&report),
        text: sweep_text(&report),
        code,
    })
}

fn fans2d_text(r: &Fans2dReport) -> String {
    let mut text = format!(
        "{} fans, {} height pairs, {} counterexamples\n",
        r.fans.len(),
        r.total_pairs,
        r.total_counterexamples
    );
    for f in &r.fans {
        let _ = writeln!(
            text,
            "  a = {:?}: {} heights, {} pairs, {} counterexamples",
            f.self_intersections, f.convex_heights, f.pairs, f.counterexample_count
        );
        for c in &f.counterexamples {
            let _ = writeln!(text, "    h = {}, h' = {}, missing {:?}", c.h, c.h_prime, c.witnesses);
        }
    }
    text
}

fn cmd_fans2d(rays: Option<usize>, bound: i64, fan: Option<&Path>, max_instances: Option<u64>) -> Result<Output, Failure> {
    let report = match fan {
        Some(path) => {
            if bound < 0 {
                return Err(Failure::invalid("--bound must be nonnegative"));
            }
            let plane = PlaneFan::new(read_plane_rays(path)?)?;
            fans2d::search_fans(vec![plane], bound, max_instances)?
        }
        None => fans2d::run_fans2d(rays.unwrap_or_default(), bound, max_instances)?,
    };
    let code = if report.found_counterexample() { 1 } else { 0 };
    Ok(Output {
        json: to_json(&report),
        text: fans2d_text(&report),
        code,
    })
}
