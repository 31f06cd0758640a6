//! Command line front end: surface validation, holonomy reports, cover
//! construction, flow traces and equidistribution experiments.
//!
//! Exit codes: 0 on success, 1 when a validation or verification step
//! fails (the report still prints), 2 on usage errors. The environment
//! variable FLATFLOW_SEED overrides any --seed flag.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flatflow::format::fmt_float;
use flatflow::rng::uniform_point;
use flatflow::{
    develop, double, export_cover, export_surface, holonomy_group, is_really_flat, lift_state,
    orientation_double, parse_cover, parse_surface, project_trajectory, run_experiment,
    snap_unit_fraction, surface_report, trace_billiard, trace_geodesic, verify_flat_cover,
    very_flat_cover, CoverMap, EventKind, ExperimentConfig, FlatSurface, FlowState, Mode, Rng,
    Tolerances, Trajectory, Vec2,
};

#[derive(Parser)]
#[command(
    name = "flatflow",
    version,
    about = "Flat surfaces, covers and straight-line flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a surface document and print its report.
    Validate {
        /// Surface document.
        surface: PathBuf,
    },
    /// Print the holonomy group and the really-flat audit.
    Holonomy {
        /// Surface document.
        surface: PathBuf,
    },
    /// Double a bordered surface across its walls.
    Double {
        /// Bordered surface document.
        surface: PathBuf,
        /// Output surface path; the sidecar map goes next to it.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build the orientation double cover of a non-orientable surface.
    Orient {
        /// Closed non-orientable surface document.
        surface: PathBuf,
        /// Output surface path; the sidecar map goes next to it.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the full pipeline to a translation surface: double if bordered,
    /// orient if non-orientable, then kill the rotation holonomy.
    Unfold {
        /// Surface document.
        surface: PathBuf,
        /// Final surface path; intermediate stages get suffixed names.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Trace a geodesic or billiard path and write a CSV event log.
    Trace {
        /// Surface document.
        #[arg(long)]
        surface: PathBuf,
        /// Start state as POLYGON:x,y in that polygon's chart.
        #[arg(long)]
        start: String,
        #[command(flatten)]
        direction: DirectionArg,
        /// Path length to trace.
        #[arg(long)]
        length: f64,
        /// Reflect at walls instead of rejecting them.
        #[arg(long)]
        billiard: bool,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG figure of the path per polygon.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a seeded equidistribution experiment and print its report.
    Ergodicity {
        /// Surface document.
        #[arg(long)]
        surface: PathBuf,
        /// Sampling mode: directional, generic, parallel-family or billiard.
        #[arg(long)]
        mode: Mode,
        /// Number of sampled trajectories.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Trajectory length.
        #[arg(long, default_value_t = 1e4)]
        length: f64,
        /// Triangulation refinement depth.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional per-sample discrepancy series as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check lift/project commutation of a cover against its sidecar map.
    LiftCheck {
        /// Base surface document.
        base: PathBuf,
        /// Total surface document.
        cover: PathBuf,
        /// Sidecar map relating the two.
        #[arg(long)]
        map: PathBuf,
        /// Number of events to compare.
        #[arg(long, default_value_t = 1000)]
        events: usize,
        /// RNG seed for the sampled starts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DirectionArg {
    /// Direction angle in radians.
    #[arg(long)]
    angle: Option<f64>,
    /// Direction vector as x,y (normalized before tracing).
    #[arg(long)]
    dir: Option<String>,
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(msg: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        msg: msg.into(),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

fn fail_err<E: std::fmt::Display>(e: E) -> Failure {
    fail(format!("error: {e}"))
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { surface } => validate(&surface),
        Command::Holonomy { surface } => holonomy(&surface),
        Command::Double { surface, out } => {
            let base = load_surface(&surface)?;
            let cover = double(&base).map_err(fail_err)?;
            write_stage("double", &cover, &out, &out.with_extension("map"))
        }
        Command::Orient { surface, out } => {
            let base = load_surface(&surface)?;
            let cover = orientation_double(&base).map_err(fail_err)?;
            write_stage("orient", &cover, &out, &out.with_extension("map"))
        }
        Command::Unfold { surface, out } => unfold(&surface, &out),
        Command::Trace {
            surface,
            start,
            direction,
            length,
            billiard,
            out,
            svg,
        } => trace(
            &surface,
            &start,
            &direction,
            length,
            billiard,
            &out,
            svg.as_deref(),
        ),
        Command::Ergodicity {
            surface,
            mode,
            samples,
            length,
            depth,
            seed,
            out,
            csv,
        } => ergodicity(
            &surface,
            mode,
            samples,
            length,
            depth,
            seed,
            out.as_deref(),
            csv.as_deref(),
        ),
        Command::LiftCheck {
            base,
            cover,
            map,
            events,
            seed,
        } => lift_check(&base, &cover, &map, events, seed),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_surface(path: &Path) -> Result<FlatSurface, Failure> {
    parse_surface(&read_file(path)?, Tolerances::default())
        .map_err(|e| fail(format!("{}: {e}", path.display())))
}

/// FLATFLOW_SEED wins over any --seed flag.
fn resolve_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var("FLATFLOW_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| usage(format!("FLATFLOW_SEED is not a u64: {text:?}"))),
        Err(_) => Ok(flag),
    }
}

fn validate(path: &Path) -> Result<(), Failure> {
    let surface = load_surface(path)?;
    print!("{}", surface_report(&surface));
    Ok(())
}

fn holonomy(path: &Path) -> Result<(), Failure> {
    let surface = load_surface(path)?;
    let developed = develop(&surface).map_err(fail_err)?;
    let group = holonomy_group(&developed).map_err(fail_err)?;
    let flat = is_really_flat(&surface).map_err(fail_err)?;

    println!("holonomy report");
    println!("rotation-order: {}", group.rotation_order);
    println!("group-order: {}", group.order());
    let structure = if group.order() == 1 {
        "trivial".to_string()
    } else if group.orientation_preserving {
        format!("cyclic of order {}", group.order())
    } else {
        format!("dihedral of order {}", group.order())
    };
    println!("structure: {structure}");
    let elements: Vec<String> = group.elements.iter().map(|e| e.to_string()).collect();
    println!("elements: {}", elements.join(", "));

    if surface.has_boundary() {
        let classes = wall_angle_classes(&surface, &developed);
        println!("wall-angle classes: {}", classes.len());
        for (label, walls) in &classes {
            println!("  {} pi: {}", label, walls.join(" "));
        }
    }

    println!("really-flat: {}", flat.verdict);
    for f in &flat.failures {
        println!("  failure: {f}");
    }
    Ok(())
}

/// Developed wall directions mod π, grouped by their snapped fraction.
/// Irrational directions get their own class keyed by the raw ratio.
fn wall_angle_classes(
    surface: &FlatSurface,
    developed: &flatflow::Developed,
) -> BTreeMap<String, Vec<String>> {
    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for w in surface.walls() {
        let dir = developed.linear[w.polygon]
            .matrix()
            .apply_vec(surface.polygons[w.polygon].edge_vec(w.edge));
        let ratio = (dir.angle() / std::f64::consts::PI).rem_euclid(1.0);
        let snap = snap_unit_fraction(ratio, surface.tol.q_max);
        let key = if std::f64::consts::PI * snap.best_err <= surface.tol.eps_ang {
            snap.best.to_string()
        } else {
            format!("irrational {}", fmt_float(ratio))
        };
        let wall = format!("{}[{}]", surface.polygons[w.polygon].id, w.edge);
        classes.entry(key).or_default().push(wall);
    }
    classes
}

/// Writes a cover's total surface and sidecar map, prints the stage
/// summary and verification report, and fails if verification does.
fn write_stage(
    label: &str,
    cover: &CoverMap,
    surf_path: &Path,
    map_path: &Path,
) -> Result<(), Failure> {
    println!(
        "stage {label}: degree {} cover, {} -> {} polygons",
        cover.degree,
        cover.base.polygons.len(),
        cover.total.polygons.len()
    );
    let report = verify_flat_cover(cover, resolve_seed(0)?);
    print!("{report}");
    write_file(surf_path, &export_surface(&cover.total))?;
    write_file(map_path, &export_cover(cover))?;
    if !report.passed() {
        return Err(fail(format!("stage {label}: cover verification failed")));
    }
    Ok(())
}

fn unfold(surface: &Path, out: &Path) -> Result<(), Failure> {
    let mut current = load_surface(surface)?;
    let mut stages: Vec<(&str, CoverMap)> = Vec::new();
    if current.has_boundary() {
        let cover = double(&current).map_err(fail_err)?;
        current = cover.total.clone();
        stages.push(("double", cover));
    }
    if !current.is_orientable() {
        let cover = orientation_double(&current).map_err(fail_err)?;
        current = cover.total.clone();
        stages.push(("orient", cover));
    }
    let cover = very_flat_cover(&current).map_err(fail_err)?;
    stages.push(("unfold", cover));

    let last = stages.len() - 1;
    for (i, (label, cover)) in stages.iter().enumerate() {
        let (surf_path, map_path) = if i == last {
            (out.to_path_buf(), out.with_extension("map"))
        } else {
            (
                out.with_extension(format!("{label}.surf")),
                out.with_extension(format!("{label}.map")),
            )
        };
        write_stage(label, cover, &surf_path, &map_path)?;
    }
    Ok(())
}

fn parse_vec2(text: &str) -> Result<Vec2, Failure> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| usage(format!("expected x,y, got {text:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("not a number: {s:?}")))
    };
    Ok(Vec2 {
        x: parse(x)?,
        y: parse(y)?,
    })
}

/// Parses POLYGON:x,y against the surface's polygon ids.
fn parse_start(surface: &FlatSurface, text: &str) -> Result<(usize, Vec2), Failure> {
    let (id, coords) = text
        .rsplit_once(':')
        .ok_or_else(|| usage(format!("expected POLYGON:x,y, got {text:?}")))?;
    let polygon = surface
        .polygon_index(id)
        .ok_or_else(|| usage(format!("no polygon named {id:?}")))?;
    Ok((polygon, parse_vec2(coords)?))
}

fn trace(
    surface_path: &Path,
    start: &str,
    direction: &DirectionArg,
    length: f64,
    billiard: bool,
    out: &Path,
    svg: Option<&Path>,
) -> Result<(), Failure> {
    let surface = load_surface(surface_path)?;
    let (polygon, point) = parse_start(&surface, start)?;
    let dir = match (direction.angle, &direction.dir) {
        (Some(a), None) => Vec2::from_angle(a),
        (None, Some(d)) => {
            let d = parse_vec2(d)?;
            if d.norm() == 0.0 {
                return Err(usage("direction vector must be nonzero"));
            }
            d.unit()
        }
        _ => unreachable!("clap enforces exactly one of --angle/--dir"),
    };
    if !(length > 0.0 && length.is_finite()) {
        return Err(usage(format!(
            "length must be positive and finite, got {length}"
        )));
    }

    let state = FlowState::new(polygon, point, dir);
    let traj = if billiard {
        trace_billiard(&surface, state, length)
    } else {
        trace_geodesic(&surface, state, length)
    }
    .map_err(fail_err)?;

    write_file(out, &trace_csv(&surface, &traj))?;
    if let Some(svg_path) = svg {
        write_file(svg_path, &trace_svg(&surface, &traj))?;
    }
    println!(
        "traced length {} with {} events, ending in polygon {}",
        fmt_float(traj.length),
        traj.events.len(),
        surface.polygons[traj.end.polygon].id
    );
    Ok(())
}

fn trace_csv(surface: &FlatSurface, traj: &Trajectory) -> String {
    let id = |p: usize| &surface.polygons[p].id;
    let mut out = String::from("event_index,t,polygon_id,x,y,event_type,edge_or_gluing_id\n");
    let _ = writeln!(
        out,
        "0,{},{},{},{},start,",
        fmt_float(0.0),
        id(traj.start.polygon),
        fmt_float(traj.start.point.x),
        fmt_float(traj.start.point.y)
    );
    for (i, e) in traj.events.iter().enumerate() {
        let (kind, which) = match e.kind {
            EventKind::Crossing { gluing, .. } => ("crossing", gluing),
            EventKind::Reflection { edge } => ("reflection", edge),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{kind},{which}",
            i + 1,
            fmt_float(e.t),
            id(e.polygon),
            fmt_float(e.exit_point.x),
            fmt_float(e.exit_point.y)
        );
    }
    let _ = writeln!(
        out,
        "{},{},{},{},{},end,",
        traj.events.len() + 1,
        fmt_float(traj.length),
        id(traj.end.polygon),
        fmt_float(traj.end.point.x),
        fmt_float(traj.end.point.y)
    );
    out
}

/// Static figure: polygons side by side, path segments drawn per chart.
fn trace_svg(surface: &FlatSurface, traj: &Trajectory) -> String {
    const SCALE: f64 = 120.0;
    const GAP: f64 = 0.3;
    const MARGIN: f64 = 0.2;

    let boxes: Vec<(f64, f64, f64, f64)> = surface
        .polygons
        .iter()
        .map(|p| {
            let mut b = (
                f64::INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            );
            for i in 0..p.len() {
                let v = p.vertex(i);
                b = (b.0.min(v.x), b.1.min(v.y), b.2.max(v.x), b.3.max(v.y));
            }
            b
        })
        .collect();
    let mut offsets = Vec::with_capacity(boxes.len());
    let mut cursor = MARGIN;
    let mut height: f64 = 0.0;
    for b in &boxes {
        offsets.push(cursor - b.0);
        cursor += b.2 - b.0 + GAP;
        height = height.max(b.3 - b.1);
    }
    let width = (cursor - GAP + MARGIN) * SCALE;
    let total_height = (height + 2.0 * MARGIN) * SCALE;
    let map = |p: usize, q: Vec2| {
        (
            (q.x + offsets[p]) * SCALE,
            (MARGIN + boxes[p].3 - q.y) * SCALE,
        )
    };

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.2} {total_height:.2}\">\n"
    );
    for (pi, p) in surface.polygons.iter().enumerate() {
        let points: Vec<String> = (0..p.len())
            .map(|i| {
                let (x, y) = map(pi, p.vertex(i));
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            "  <polygon points=\"{}\" fill=\"#f5f2ea\" stroke=\"#555\" stroke-width=\"1\"/>",
            points.join(" ")
        );
    }
    for s in traj.segments() {
        let (x1, y1) = map(s.polygon, s.start);
        let (x2, y2) = map(s.polygon, s.start + s.dir.scale(s.len));
        let _ = writeln!(
            out,
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"#b3312c\" stroke-width=\"1.2\"/>"
        );
    }
    let (sx, sy) = map(traj.start.polygon, traj.start.point);
    let (ex, ey) = map(traj.end.polygon, traj.end.point);
    let _ = writeln!(
        out,
        "  <circle cx=\"{sx:.2}\" cy=\"{sy:.2}\" r=\"3\" fill=\"#2a6\"/>"
    );
    let _ = writeln!(
        out,
        "  <circle cx=\"{ex:.2}\" cy=\"{ey:.2}\" r=\"3\" fill=\"#26a\"/>"
    );
    out.push_str("</svg>\n");
    out
}

#[allow(clippy::too_many_arguments)]
fn ergodicity(
    surface_path: &Path,
    mode: Mode,
    samples: usize,
    length: f64,
    depth: usize,
    seed: u64,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<(), Failure> {
    let surface = load_surface(surface_path)?;
    let config = ExperimentConfig::new(mode, samples, length, depth, resolve_seed(seed)?);
    let report = run_experiment(&surface, &config).map_err(fail_err)?;
    let rendered = report.render();
    print!("{rendered}");
    if let Some(path) = out {
        write_file(path, &rendered)?;
    }
    if let Some(path) = csv {
        let mut text = String::from("sample,checkpoint,discrepancy\n");
        for (i, s) in report.samples.iter().enumerate() {
            for (k, &d) in s.discrepancy.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "{i},{},{}",
                    fmt_float(report.checkpoints[k]),
                    fmt_float(d)
                );
            }
        }
        write_file(path, &text)?;
    }
    if !report.verdict {
        return Err(fail("experiment verdict: not consistent with ergodicity"));
    }
    Ok(())
}

/// Tolerance for lift/project commutation, per event and endpoint.
const COMMUTE_TOL: f64 = 1e-6;

fn lift_check(
    base_path: &Path,
    cover_path: &Path,
    map_path: &Path,
    events: usize,
    seed: u64,
) -> Result<(), Failure> {
    let base = load_surface(base_path)?;
    let total = load_surface(cover_path)?;
    let cover = parse_cover(&read_file(map_path)?, &base, &total).map_err(fail_err)?;

    let mut rng = Rng::new(resolve_seed(seed)?).substream(0x11f7);
    let areas: Vec<f64> = base.polygons.iter().map(|p| p.area()).collect();
    let total_area: f64 = areas.iter().sum();
    let chunk = 50.0;

    let mut compared = 0usize;
    let mut trajectories = 0usize;
    let mut max_dev: f64 = 0.0;
    let mut attempts = 0usize;
    while compared < events {
        attempts += 1;
        if attempts > 64 * events.max(1) {
            return Err(fail(
                "lift-check could not sample enough regular trajectories",
            ));
        }

        let mut pick = rng.uniform() * total_area;
        let mut polygon = 0;
        for (i, a) in areas.iter().enumerate() {
            polygon = i;
            if pick < *a {
                break;
            }
            pick -= a;
        }
        let point = uniform_point(&base.polygons[polygon], &mut rng);
        let dir = Vec2::from_angle(rng.range(0.0, std::f64::consts::TAU));
        let sheet = rng.below(cover.degree);
        let up0 = match lift_state(&cover, &FlowState::new(polygon, point, dir), sheet) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let up = match trace_geodesic(&cover.total, up0, chunk) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let projected = match project_trajectory(&cover, &up) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let down = if base.has_boundary() {
            trace_billiard(&base, projected.start, chunk)
        } else {
            trace_geodesic(&base, projected.start, chunk)
        };
        let down = match down {
            Ok(t) => t,
            Err(_) => continue,
        };

        let n = projected.events.len().min(down.events.len());
        for (a, b) in projected.events.iter().zip(down.events.iter()).take(n) {
            if a.kind != b.kind || a.polygon != b.polygon || a.after.polygon != b.after.polygon {
                return Err(fail(format!(
                    "event mismatch at t={}: projected {:?} vs direct {:?}",
                    fmt_float(a.t),
                    a.kind,
                    b.kind
                )));
            }
            let dev = (a.t - b.t)
                .abs()
                .max(a.exit_point.dist(b.exit_point))
                .max(a.after.point.dist(b.after.point))
                .max(a.after.dir.dist(b.after.dir));
            max_dev = max_dev.max(dev);
        }
        if projected.events.len() == down.events.len() {
            max_dev = max_dev
                .max(projected.end.point.dist(down.end.point))
                .max(projected.end.dir.dist(down.end.dir));
        }
        compared += n;
        trajectories += 1;
        if max_dev > COMMUTE_TOL {
            println!("checked {compared} events over {trajectories} trajectories");
            println!("max deviation {}", fmt_float(max_dev));
            return Err(fail(format!(
                "lift/project commutation exceeds {}",
                fmt_float(COMMUTE_TOL)
            )));
        }
    }
    println!("checked {compared} events over {trajectories} trajectories");
    println!("max deviation {}", fmt_float(max_dev));
    println!(
        "lift/project commutation holds within {}",
        fmt_float(COMMUTE_TOL)
    );
    Ok(())
}
