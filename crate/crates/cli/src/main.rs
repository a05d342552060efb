use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use delone::classes::{flip_class_report, g_class_report};
use delone::complex::ComplexJson;
use delone::cube::cube_report;
use delone::delaunay::delaunay_window;
use delone::density::{alpha_grid, center_invariance_gap, count_certificate, main_theorem_comparison};
use delone::flips::legalize_to_delaunay;
use delone::functionals::FunctionalSpec;
use delone::generators::{distorted_cubic_window, lattice_window, make_generic, poisson_delone_window, PointSetWindow};
use delone::io::{read_points, write_points};
use delone::oracle::min_sum_triangulation;
use delone::strips::{
    choose_block_sizes, compatible_isoceles, strip_block_triangulation, strip_gi_sequence, StripConfig, Verdict,
};
use delone::TriangulationComplex;

const MANIFEST_SCHEMA: u64 = 1;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] delone::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
            CliError::Usage(_) => "usage",
            CliError::CheckFailed(_) => "check_failed",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "delone", version, about = "Triangulations of Delone-set windows and their functional densities")]
struct Cli {
    /// Output file (stdout when absent). A manifest is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a point-set window.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Delaunay complex of a point file, or legalization of a complex.
    Tri(TriArgs),
    /// Windowed density sequence of a functional.
    Density(DensityArgs),
    /// F-class flip inequality on random Radon configurations.
    Flipcheck(FlipcheckArgs),
    /// G-class inequality against enumerated triangulations.
    Gcheck(GcheckArgs),
    /// g_i / f_i sequence of the strip construction.
    Strips(StripsArgs),
    /// Tetrahedra of the distorted cubic lattice, cube by cube.
    Cube3d(Cube3dArgs),
    /// Point and cell count certificate of a window.
    Counts { pointfile: PathBuf },
    /// Delaunay versus a reverse-flipped triangulation of a planar window.
    Compare(CompareArgs),
    /// Enumerate all triangulations of a small planar set.
    Oracle {
        pointfile: PathBuf,
        #[arg(long = "F")]
        f: FunctionalSpec,
    },
    /// Re-run the command recorded in a manifest.
    Rerun { manifest: PathBuf },
}

#[derive(Subcommand, Debug)]
enum GenKind {
    Lattice {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "W")]
        w: f64,
        /// Seed of the genericity jitter.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_jitter: bool,
    },
    Cube3d {
        #[arg(long)]
        window: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Poisson {
        #[arg(long)]
        r: f64,
        #[arg(long = "R")]
        big_r: f64,
        #[arg(long = "W")]
        w: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Strips {
        #[command(flatten)]
        shape: StripShape,
        /// Number of blocks to lay out.
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        /// Explicit odd block sizes; chosen from the functional when absent.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long = "F", default_value = "F1")]
        f: FunctionalSpec,
        /// Base edges per strip on each side of the axis.
        #[arg(long)]
        extent: Option<usize>,
        /// Where to write the triangulation JSON.
        #[arg(long)]
        complex_out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct StripShape {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = std::f64::consts::PI / 6.0)]
    phi: f64,
    #[arg(long, default_value_t = 1.6)]
    c: f64,
    #[arg(long, default_value_t = std::f64::consts::PI / 5.0)]
    psi: f64,
}

#[derive(Args, Debug)]
struct TriArgs {
    pointfile: Option<PathBuf>,
    /// Require a three-dimensional point file.
    #[arg(long)]
    d3: bool,
    /// Legalize this complex with directed flips; the output holds the complex and flip log.
    #[arg(long, conflicts_with = "pointfile")]
    legalize: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    complexfile: PathBuf,
    #[arg(long = "F")]
    f: FunctionalSpec,
    #[arg(long)]
    alpha_min: f64,
    #[arg(long)]
    alpha_max: f64,
    #[arg(long, default_value_t = 1.1)]
    ratio: f64,
    /// Comma-separated center; the origin when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct FlipcheckArgs {
    #[arg(long = "F")]
    f: FunctionalSpec,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    d: usize,
}

#[derive(Args, Debug)]
struct GcheckArgs {
    #[arg(long = "F")]
    f: FunctionalSpec,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Range of set sizes, like `5..8`.
    #[arg(long, default_value = "5..8")]
    n: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    d: usize,
}

#[derive(Args, Debug)]
struct StripsArgs {
    #[arg(long = "F")]
    f: FunctionalSpec,
    #[arg(long, default_value_t = 6)]
    blocks: usize,
    #[command(flatten)]
    shape: StripShape,
    /// Target distance from the limits, as a fraction of the gap.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    gap_fraction: f64,
    /// Block sizes chosen with this functional (defaults to F1).
    #[arg(long = "size-F", default_value = "F1")]
    size_f: FunctionalSpec,
}

#[derive(Args, Debug)]
struct Cube3dArgs {
    #[arg(long)]
    window: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct CompareArgs {
    pointfile: PathBuf,
    #[arg(long = "F")]
    f: FunctionalSpec,
    #[arg(long, default_value_t = 50)]
    reverse_flips: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// What a subcommand produced: the main body, a summary for the manifest, and
/// whether its asserted checks passed.
struct Output {
    body: String,
    summary: Value,
    failure: Option<String>,
}

impl Output {
    fn json<T: serde::Serialize>(v: &T) -> Result<Self> {
        Ok(Output { body: serde_json::to_string_pretty(v)? + "\n", summary: Value::Null, failure: None })
    }

    fn check(mut self, ok: bool, what: impl Into<String>) -> Self {
        if !ok && self.failure.is_none() {
            self.failure = Some(what.into());
        }
        self
    }
}

fn open_points(path: &Path) -> Result<PointSetWindow> {
    Ok(read_points(BufReader::new(File::open(path)?))?)
}

fn open_complex(path: &Path) -> Result<TriangulationComplex> {
    let json: ComplexJson = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok(TriangulationComplex::from_json(json, false)?)
}

fn points_body(window: &PointSetWindow) -> Result<String> {
    let mut buf = vec![];
    write_points(window, &mut buf)?;
    Ok(String::from_utf8(buf).expect("decimal output is ascii"))
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",") + "\n";
    for r in rows {
        s += &r.join(",");
        s.push('\n');
    }
    s
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("expected a range like 5..8, got '{s}'"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn gen(kind: GenKind) -> Result<Output> {
    let window = match kind {
        GenKind::Lattice { d, w, seed, no_jitter } => lattice_window(d, w, (!no_jitter).then_some(seed))?,
        GenKind::Cube3d { window, seed } => make_generic(&distorted_cubic_window(window)?.0, seed)?,
        GenKind::Poisson { r, big_r, w, d, seed } => poisson_delone_window(r, big_r, w, d, seed)?,
        GenKind::Strips { shape, blocks, sizes, f, extent, complex_out } => {
            let pair = compatible_isoceles(shape.a, shape.phi, shape.c, shape.psi)?;
            let sizes = match sizes {
                Some(s) => s,
                None => choose_block_sizes(&pair, &f, blocks, 1.0 / 3.0)?,
            };
            let cfg = StripConfig { pair, blocks: sizes, extent };
            let (window, cx, _) = strip_block_triangulation(&cfg, blocks.min(cfg.blocks.len()))?;
            let mut w = BufWriter::new(File::create(complex_out)?);
            serde_json::to_writer(&mut w, &cx.to_json())?;
            w.flush()?;
            window
        }
    };
    let g = &window.generator;
    let summary = json!({
        "points": window.points.len(),
        "generator": g.name,
        "params": g.params,
        "seed": g.seed,
        "jittered": g.jitter.as_ref().map_or(0, |j| j.ids.len()),
    });
    Ok(Output { body: points_body(&window)?, summary, failure: None })
}

fn tri(args: TriArgs) -> Result<Output> {
    if let Some(path) = args.legalize {
        let cx = open_complex(&path)?;
        let (legal, log) = legalize_to_delaunay(cx)?;
        let monotone = log.iter().all(|r| r.after_max_circumradius <= r.before_max_circumradius + delone::TAU_GEO);
        let out = Output::json(&json!({ "complex": legal.to_json(), "flips": log }))?;
        return Ok(out.check(monotone, "flip increased the larger circumradius"));
    }
    let path = args.pointfile.ok_or_else(|| CliError::Usage("tri needs a point file or --legalize".into()))?;
    let window = open_points(&path)?;
    if args.d3 && window.dimension != 3 {
        return Err(CliError::Usage(format!("--d3 given but the point file has dimension {}", window.dimension)));
    }
    let cx = delaunay_window(&window)?;
    let mut out = Output::json(&cx.to_json())?;
    out.summary = json!({ "points": window.points.len(), "cells": cx.num_cells() });
    Ok(out)
}

fn density(args: DensityArgs) -> Result<Output> {
    let cx = open_complex(&args.complexfile)?;
    let grid = alpha_grid(args.alpha_min, args.alpha_max, args.ratio)?;
    let z = args.center.unwrap_or_else(|| vec![0.0; cx.dimension()]);
    let rep = center_invariance_gap(&cx, &args.f, &z, &grid)?;
    let rows = (0..grid.len()).map(|i| {
        vec![
            grid[i].to_string(),
            rep.origin.cell_counts[i].to_string(),
            rep.origin.ball_counts[i].to_string(),
            rep.origin.sums[i].to_string(),
            rep.origin.values[i].to_string(),
            rep.shifted.values[i].to_string(),
            rep.gap[i].to_string(),
        ]
    });
    let body = csv(&["alpha", "cells_vertexrule", "cells_ballrule", "sum_F", "f_value", "f_z_value", "gap"], rows);
    let summary = json!({
        "liminf_tail": rep.origin.liminf_tail,
        "liminf_tail_z": rep.shifted.liminf_tail,
        "first_quartile_gap": rep.first_quartile_max,
        "last_quartile_gap": rep.last_quartile_max,
        "gap_within_annulus_bound": rep.bound_ok,
    });
    Ok(Output { body, summary, failure: None }.check(rep.bound_ok, "gap exceeds its annulus bound"))
}

fn strips(args: StripsArgs) -> Result<Output> {
    let s = &args.shape;
    let pair = compatible_isoceles(s.a, s.phi, s.c, s.psi)?;
    let blocks = choose_block_sizes(&pair, &args.size_f, args.blocks, args.gap_fraction)?;
    let cfg = StripConfig { pair, blocks, extent: None };
    let seq = strip_gi_sequence(&cfg, &args.f, args.blocks)?;
    let rows = (0..seq.alphas.len()).map(|i| {
        vec![
            (i + 1).to_string(),
            seq.alphas[i].to_string(),
            seq.wide_counts[i].to_string(),
            seq.narrow_counts[i].to_string(),
            seq.g[i].to_string(),
            seq.f[i].to_string(),
        ]
    });
    let body = csv(&["block", "alpha", "wide_cells", "narrow_cells", "g", "f"], rows);
    let summary = json!({
        "blocks": seq.blocks,
        "verdict": seq.verdict,
        "separation": seq.separation,
        "ratios": seq.ratios,
    });
    let ok = seq.verdict != Verdict::Fail;
    Ok(Output { body, summary, failure: None }.check(ok, "g_i do not oscillate by the required gap"))
}

fn cube3d(args: Cube3dArgs) -> Result<Output> {
    let rep = cube_report(args.window, args.seed)?;
    let rows = rep.rows.iter().map(|r| {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        vec![
            r.corner[0].to_string(),
            r.corner[1].to_string(),
            r.corner[2].to_string(),
            r.tetrahedra.to_string(),
            opt(r.bottom_volume),
            r.bottom_expected.to_string(),
            opt(r.top_volume),
            r.top_expected.to_string(),
            r.min_volume.to_string(),
        ]
    });
    let body = csv(
        &["i", "j", "k", "tetrahedra", "bottom_volume", "bottom_expected", "top_volume", "top_expected", "min_volume"],
        rows,
    );
    let mut trend = vec![];
    let mut w = 4.0;
    while w < args.window {
        trend.push(json!({ "W": w, "min_volume": cube_report(w, args.seed)?.min_interior_volume }));
        w += 2.0;
    }
    trend.push(json!({ "W": args.window, "min_volume": rep.min_interior_volume }));
    let summary = json!({
        "interior_cubes": rep.interior_cubes,
        "cubes_with_seven": rep.cubes_with_seven,
        "max_flat_volume_error": rep.max_flat_volume_error,
        "min_volume_trend": trend,
    });
    let ok = rep.cubes_with_seven == rep.interior_cubes && rep.max_flat_volume_error <= 1e-9;
    Ok(Output { body, summary, failure: None }.check(ok, "cube decomposition or flat volumes differ"))
}

fn run(cmd: Cmd) -> Result<Output> {
    match cmd {
        Cmd::Gen { kind } => gen(kind),
        Cmd::Tri(a) => tri(a),
        Cmd::Density(a) => density(a),
        Cmd::Flipcheck(a) => {
            let rep = flip_class_report(&a.f, a.trials, a.seed, a.d)?;
            let pass = rep.pass();
            Ok(Output::json(&rep)?.check(pass, format!("{} flip violations", rep.violations)))
        }
        Cmd::Gcheck(a) => {
            let rep = g_class_report(&a.f, a.trials, parse_range(&a.n)?, a.seed, a.d)?;
            let pass = rep.pass();
            Ok(Output::json(&rep)?.check(pass, format!("{} subcomplex violations", rep.violations)))
        }
        Cmd::Strips(a) => strips(a),
        Cmd::Cube3d(a) => cube3d(a),
        Cmd::Counts { pointfile } => {
            let window = open_points(&pointfile)?;
            let cx = delaunay_window(&window)?;
            let cert = count_certificate(&window, &cx)?;
            let pass = cert.pass;
            Ok(Output::json(&cert)?.check(pass, "a count bound is violated"))
        }
        Cmd::Compare(a) => {
            let window = open_points(&a.pointfile)?;
            let rep = main_theorem_comparison(&window, &a.f, a.reverse_flips, a.seed, None)?;
            let pass = rep.pass;
            Ok(Output::json(&rep)?.check(pass, "Delaunay density exceeds the perturbed one beyond the boundary slack"))
        }
        Cmd::Oracle { pointfile, f } => {
            let window = open_points(&pointfile)?;
            let (_, rep) = min_sum_triangulation(&window.points, &f)?;
            Ok(Output::json(&rep)?)
        }
        Cmd::Rerun { .. } => unreachable!("rerun is resolved before dispatch"),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn execute(argv: Vec<String>) -> Result<()> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let msg = e.to_string();
            let msg: Vec<&str> = msg.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with("For more")).collect();
            return Err(CliError::Usage(msg.join(" ").trim_start_matches("error: ").to_string()));
        }
    };
    if let Cmd::Rerun { manifest } = &cli.cmd {
        let m: Value = serde_json::from_reader(BufReader::new(File::open(manifest)?))?;
        if m.get("schema").and_then(Value::as_u64) != Some(MANIFEST_SCHEMA) {
            return Err(CliError::Usage(format!("unsupported manifest schema in {}", manifest.display())));
        }
        let argv: Vec<String> = serde_json::from_value(m["argv"].clone())?;
        return execute(argv);
    }
    let out_path = cli.out.clone();
    let output = run(cli.cmd)?;
    match &out_path {
        Some(p) => {
            std::fs::write(p, &output.body)?;
            let manifest = json!({
                "schema": MANIFEST_SCHEMA,
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "argv": argv,
                "summary": output.summary,
                "pass": output.failure.is_none(),
            });
            std::fs::write(manifest_path(p), serde_json::to_string_pretty(&manifest)? + "\n")?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(output.body.as_bytes())?;
            stdout.flush()?;
        }
    }
    match output.failure {
        Some(f) => Err(CliError::CheckFailed(f)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("DELONE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string(), "kind": e.kind() }));
            ExitCode::from(1)
        }
    }
}
