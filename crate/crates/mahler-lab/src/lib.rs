//! Command-line front-end for the `mahler-core` workbench.
//!
//! Subcommands: `vp`, `polar`, `normalize`, `verify`, `winding`, `sweep`
//! and `verify2`. Exit codes: 0 success, 1 unknown command, 2 parse error,
//! 3 invalid body, 4 bound violated, 5 i/o error.

pub mod bodyfile;
pub mod error;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use mahler_core::bound2d::{normalize2, verify2};
use mahler_core::bound3d::{cone_inequality_check, detect_equality, verify_chain, BOUND_3D};
use mahler_core::normalize::{find_normalization, sweep, winding};
use mahler_core::quadrature::{make_grid, volume, SphereGrid};
use mahler_core::{ConvexBody3, LinearMap3};
use serde_json::json;

pub use bodyfile::{parse_body_file, parse_body_str, Body, BodyFile};
pub use error::CliError;
pub use report::{digest_hex, emit_report, Format, RunReport, Table};

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "MAHLER_LAB_THREADS";

/// Random boundary triangles tested by `verify`.
const CONE_TRIALS: usize = 1000;

#[derive(Parser, Debug)]
#[command(name = "mahler-lab", version, about = "Volume products of centrally symmetric convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Body file (JSON).
    #[arg(long)]
    body: PathBuf,
    /// Quadrature grid as `N_ALPHAxN_BETA`.
    #[arg(long, default_value = "128x256")]
    grid: String,
    /// Quadrature nodes per curve.
    #[arg(long, default_value_t = 512)]
    curve: usize,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the random cone-inequality trials of `verify`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; falls back to MAHLER_LAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print |K|, |K°| and their product.
    Vp(Common),
    /// Write the polar body file.
    Polar(Common),
    /// Find a normalizing rotation and shear.
    Normalize(Common),
    /// Evaluate the inequality chain.
    Verify(Common),
    /// Trace the winding of (G, H) as CSV.
    Winding {
        #[command(flatten)]
        common: Common,
        /// Initial number of contour samples.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Sample (F, G, H) on an n x n x n lattice of the box as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Lattice points per axis.
        #[arg(long, default_value_t = 9)]
        n: usize,
    },
    /// Run the planar pipeline on a two-dimensional body.
    Verify2(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Vp(c) | Command::Polar(c) | Command::Normalize(c) | Command::Verify(c) | Command::Verify2(c) => c,
            Command::Winding { common, .. } | Command::Sweep { common, .. } => common,
        }
    }
}

/// Parses `NxM`.
pub fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(|| CliError::Parse(format!("grid {text:?} is not NxM")))?;
    let a = a.trim().parse().map_err(|_| CliError::Parse(format!("grid {text:?} is not NxM")))?;
    let b = b.trim().parse().map_err(|_| CliError::Parse(format!("grid {text:?} is not NxM")))?;
    Ok((a, b))
}

struct Context {
    argv: Vec<String>,
    digest: String,
    grid: SphereGrid,
    curve: usize,
    seed: u64,
    out: Option<PathBuf>,
}

impl Context {
    fn report(&self, results: serde_json::Value, table: Option<Table>) -> RunReport {
        RunReport {
            command: self.argv.clone(),
            input_digest: self.digest.clone(),
            grid: [self.grid.n_alpha(), self.grid.n_beta()],
            curve: self.curve,
            version: env!("CARGO_PKG_VERSION").to_string(),
            results,
            table,
        }
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}

fn space(body: Body) -> Result<ConvexBody3, CliError> {
    match body {
        Body::Space(k) => Ok(k),
        Body::Plane(_) => Err(CliError::Parse("this command needs a three-dimensional body".into())),
    }
}

fn rows(m: &LinearMap3) -> [[f64; 3]; 3] {
    m.rows()
}

fn dispatch(cmd: &Command, body: Body, ctx: &Context) -> Result<(), CliError> {
    let grid = &ctx.grid;
    match cmd {
        Command::Vp(_) => {
            let (v, pv, bound, tol) = match &body {
                Body::Plane(p) => (p.area(), p.polar().area(), 8.0, 1e-9),
                Body::Space(k) => (volume(k, grid), volume(&k.polar(), grid), BOUND_3D, 1e-6),
            };
            let product = v * pv;
            println!("volume = {v}");
            println!("polar_volume = {pv}");
            println!("product = {product}");
            if ctx.out.is_some() {
                emit_report(&ctx.report(json!({"volume": v, "polar_volume": pv, "product": product}), None), Format::Json, ctx.out())?;
            }
            if product < bound - tol {
                return Err(CliError::BoundViolated(format!("product {product} below {bound}")));
            }
        }
        Command::Polar(_) => {
            let file = match &body {
                Body::Plane(p) => BodyFile::from_polygon(&p.polar(), Some("polar".into())),
                Body::Space(k) => BodyFile::from_body3(&k.polar()),
            };
            let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            match ctx.out() {
                Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
                None => print!("{text}"),
            }
        }
        Command::Normalize(_) => {
            let k = space(body)?;
            let n = find_normalization(&k, grid)?;
            let worst = n.residual23.iter().map(|r| r.abs()).fold(0.0, f64::max);
            let results = json!({
                "point": n.point,
                "angles": n.angles,
                "rotation": rows(&n.rotation),
                "shear": rows(&n.shear),
                "map": rows(&n.map),
                "residual23": n.residual23,
                "fgh_norm": n.fgh_norm,
                "volume": n.volume,
                "normalized_body": BodyFile::from_body3(&n.normalized_body),
            });
            emit_report(&ctx.report(results, None), Format::Json, ctx.out())?;
            if worst >= 1e-6 * n.volume {
                return Err(CliError::BoundViolated(format!("normalization residual {worst}")));
            }
        }
        Command::Verify(_) => {
            let k = space(body)?;
            let chain = verify_chain(&k, grid, ctx.curve)?;
            let class = detect_equality(&k, 1e-5);
            let cone = cone_inequality_check(&k, CONE_TRIALS, ctx.seed);
            let ok = cone.violations == 0
                && chain.pairings_ok
                && chain.membership_ok
                && chain.planar_ok
                && chain.bound_ok
                && (!chain.applicable || chain.weighted_ok);
            emit_report(&ctx.report(json!({"chain": chain, "cone_check": cone, "equality": class}), None), Format::Json, ctx.out())?;
            if !ok {
                return Err(CliError::BoundViolated("inequality chain failed".into()));
            }
        }
        Command::Winding { samples, .. } => {
            let k = space(body)?;
            let trace = winding(&k, *samples, grid)?;
            let table = Table::from_rows(&["t", "G", "H", "angle"], &trace.samples)?;
            eprintln!("winding = {}", trace.winding);
            emit_report(&ctx.report(json!({"winding": trace.winding}), Some(table)), Format::Csv, ctx.out())?;
        }
        Command::Sweep { n, .. } => {
            let k = space(body)?;
            let rows = sweep(&k, *n, grid)?;
            let table = Table::from_rows(&["s", "phi", "psi", "F", "G", "H"], &rows)?;
            emit_report(&ctx.report(json!({"n": n}), Some(table)), Format::Csv, ctx.out())?;
        }
        Command::Verify2(_) => {
            let Body::Plane(p) = body else {
                return Err(CliError::Parse("verify2 needs a two-dimensional body".into()));
            };
            let (map, q) = normalize2(&p);
            let rep = verify2(&q)?;
            println!("product = {}", rep.product);
            emit_report(&ctx.report(json!({"map": map, "report": rep}), None), Format::Json, ctx.out())?;
            if !rep.bound_holds {
                return Err(CliError::BoundViolated(format!("planar product {}", rep.product)));
            }
        }
    }
    Ok(())
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Parse(format!("{THREADS_ENV}={v:?} is not a count"))),
        Err(_) => Ok(None),
    }
}

fn execute(argv: &[String]) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    Ok(())
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Err(CliError::UnknownCommand(argv.get(1).cloned().unwrap_or_default()))
                }
                _ => Err(CliError::Parse(e.to_string())),
            };
        }
    };
    let common = cli.command.common().clone();
    let (na, nb) = parse_grid(&common.grid)?;
    let grid = make_grid(na, nb)?;
    let (body, bytes) = parse_body_file(&common.body)?;
    let ctx = Context { argv: argv[1..].to_vec(), digest: digest_hex(&bytes), grid, curve: common.curve, seed: common.seed, out: common.out };
    let start = Instant::now();
    let result = match thread_count(common.threads)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Parse(e.to_string()))?
            .install(|| dispatch(&cli.command, body, &ctx)),
        None => dispatch(&cli.command, body, &ctx),
    };
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    result
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    match execute(&argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
