//! Finite-time equidistribution statistics for the geodesic and billiard
//! flows.
//!
//! A `CellPartition` cuts every polygon into a fan of triangles and
//! subdivides each one 4-way to a requested depth. `occupancy` clips a
//! trajectory against the cells exactly, segment by segment, with no
//! sampling; `discrepancy_series` turns prefix occupancies into the
//! L1 distance D(K) between time fractions and area fractions, and
//! `birkhoff_average` compares time averages of test functions against
//! their normalized space averages.
//!
//! `run_experiment` draws seeded random samples, traces them, and renders
//! a report whose bytes depend only on the surface, the configuration and
//! the seed. Finite trajectories cannot certify ergodicity; the report
//! says "consistent with ergodicity" when the configured thresholds are
//! met and never anything stronger.

use std::fmt::Write as _;

use thiserror::Error;

use crate::flow::{trace_billiard, trace_geodesic, FlowError, FlowState, Segment, Trajectory};
use crate::format::fmt_float;
use crate::geom::Vec2;
use crate::holonomy::{develop, holonomy_group, HolonomyError};
use crate::rng::{uniform_point, Rng};
use crate::surface::FlatSurface;

use std::f64::consts::TAU;

/// Cell counts grow as 4^d; deeper partitions exhaust memory long before
/// they add statistical power.
const MAX_DEPTH: usize = 8;

/// Substream label for the shared direction of a parallel family.
const FAMILY_STREAM: u64 = 0xfa;

/// Midpoint rule step for smooth test functions along trajectories.
const SMOOTH_STEP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ErgodicityError {
    #[error("partition depth {depth} exceeds the maximum of {MAX_DEPTH}")]
    DepthTooLarge { depth: usize },
    #[error(
        "checkpoint {checkpoint} must increase and stay within the trajectory length {length}"
    )]
    CheckpointBeyondLength { checkpoint: f64, length: f64 },
    #[error("unknown test function {0:?}")]
    UnknownTestFunction(String),
    #[error("mode is incompatible with this surface: {0}")]
    ModeSurfaceMismatch(String),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// One triangular cell in a polygon chart.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub polygon: usize,
    pub vertices: [Vec2; 3],
    pub area: f64,
}

/// Fan triangulation of every polygon, each triangle subdivided 4-way
/// `depth` times. Cells are indexed fan by fan in depth-first child order,
/// so cell c at depth d+1 lies inside cell c/4 of the depth-d partition.
#[derive(Debug, Clone)]
pub struct CellPartition {
    pub depth: usize,
    pub cells: Vec<Cell>,
    pub total_area: f64,
    /// Root fan triangles, in cell order; fan f spans cells
    /// [f·4^depth, (f+1)·4^depth).
    fans: Vec<(usize, [Vec2; 3])>,
    /// Fan index range per polygon.
    fan_range: Vec<(usize, usize)>,
}

fn midpoint(a: Vec2, b: Vec2) -> Vec2 {
    (a + b).scale(0.5)
}

fn children(t: [Vec2; 3]) -> [[Vec2; 3]; 4] {
    let [a, b, c] = t;
    let (mab, mbc, mca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
    [[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]]
}

fn tri_area(t: &[Vec2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0])
}

fn tri_contains(t: &[Vec2; 3], p: Vec2, slack: f64) -> bool {
    (0..3).all(|i| (t[(i + 1) % 3] - t[i]).cross(p - t[i]) >= -slack)
}

/// Builds the depth-d partition: Σ_polygons (n−2)·4^d cells.
pub fn build_partition(
    surface: &FlatSurface,
    depth: usize,
) -> Result<CellPartition, ErgodicityError> {
    if depth > MAX_DEPTH {
        return Err(ErgodicityError::DepthTooLarge { depth });
    }
    let mut fans = Vec::new();
    let mut fan_range = Vec::with_capacity(surface.polygons.len());
    for (p, poly) in surface.polygons.iter().enumerate() {
        let start = fans.len();
        for k in 0..poly.len() - 2 {
            fans.push((p, [poly.vertex(0), poly.vertex(k + 1), poly.vertex(k + 2)]));
        }
        fan_range.push((start, fans.len()));
    }

    let mut cells = Vec::with_capacity(fans.len() << (2 * depth));
    fn emit(polygon: usize, t: [Vec2; 3], depth: usize, cells: &mut Vec<Cell>) {
        if depth == 0 {
            cells.push(Cell {
                polygon,
                vertices: t,
                area: tri_area(&t),
            });
            return;
        }
        for kid in children(t) {
            emit(polygon, kid, depth - 1, cells);
        }
    }
    for &(p, t) in &fans {
        emit(p, t, depth, &mut cells);
    }

    let total_area: f64 = cells.iter().map(|c| c.area).sum();
    Ok(CellPartition {
        depth,
        cells,
        total_area,
        fans,
        fan_range,
    })
}

impl CellPartition {
    /// Cell containing a chart point; boundary ties go to the lowest cell
    /// index. Points epsilon-outside every cell retry with slack.
    pub fn locate(&self, polygon: usize, point: Vec2) -> Option<usize> {
        for slack in [0.0, 1e-9] {
            let (lo, hi) = self.fan_range[polygon];
            for f in lo..hi {
                let (_, mut t) = self.fans[f];
                if !tri_contains(&t, point, slack) {
                    continue;
                }
                let mut index = f << (2 * self.depth);
                let mut step = 1usize << (2 * self.depth);
                for _ in 0..self.depth {
                    step >>= 2;
                    let kids = children(t);
                    let k = (0..4)
                        .find(|&k| tri_contains(&kids[k], point, slack))
                        .unwrap_or(3);
                    t = kids[k];
                    index += k * step;
                }
                return Some(index);
            }
        }
        None
    }
}

/// Maximal parameter interval of `s + t·u` inside a closed triangle,
/// intersected with [lo, hi]. Runs along an edge line count as inside;
/// the caller deduplicates the double claim.
fn clip_span(t: &[Vec2; 3], s: Vec2, u: Vec2, mut lo: f64, mut hi: f64) -> Option<(f64, f64)> {
    for i in 0..3 {
        let a = t[i];
        let e = t[(i + 1) % 3] - a;
        let c0 = e.cross(s - a);
        let c1 = e.cross(u);
        if c1.abs() <= 1e-15 {
            if c0 < -1e-12 {
                return None;
            }
        } else {
            let cut = -c0 / c1;
            if c1 > 0.0 {
                lo = lo.max(cut);
            } else {
                hi = hi.min(cut);
            }
            if lo >= hi {
                return None;
            }
        }
    }
    Some((lo, hi))
}

/// Time interval one cell claims, in global trajectory parameter.
struct Span {
    cell: usize,
    lo: f64,
    hi: f64,
}

fn descend_spans(
    t: [Vec2; 3],
    depth: usize,
    base: usize,
    s: Vec2,
    u: Vec2,
    lo: f64,
    hi: f64,
    out: &mut Vec<(usize, f64, f64)>,
) {
    let Some((lo, hi)) = clip_span(&t, s, u, lo, hi) else {
        return;
    };
    if depth == 0 {
        out.push((base, lo, hi));
        return;
    }
    let step = 1usize << (2 * (depth - 1));
    for (k, kid) in children(t).into_iter().enumerate() {
        descend_spans(kid, depth - 1, base + k * step, s, u, lo, hi, out);
    }
}

/// Exact clipped spans of every segment, deduplicated so overlapping
/// claims (a run along a shared cell edge) are counted once, first cell
/// in index order winning.
fn trajectory_spans(traj: &Trajectory, partition: &CellPartition) -> Vec<Span> {
    let mut out = Vec::new();
    let mut local: Vec<(usize, f64, f64)> = Vec::new();
    let mut t0 = 0.0;
    for seg in traj.segments() {
        if seg.len > 0.0 {
            local.clear();
            let (lo, hi) = partition.fan_range[seg.polygon];
            for f in lo..hi {
                descend_spans(
                    partition.fans[f].1,
                    partition.depth,
                    f << (2 * partition.depth),
                    seg.start,
                    seg.dir,
                    0.0,
                    seg.len,
                    &mut local,
                );
            }
            local.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            let mut frontier: f64 = 0.0;
            for &(cell, lo, hi) in &local {
                let lo = lo.max(frontier);
                if hi > lo {
                    out.push(Span {
                        cell,
                        lo: t0 + lo,
                        hi: t0 + hi,
                    });
                    frontier = hi;
                }
            }
        }
        t0 += seg.len;
    }
    out
}

/// Time the trajectory spends in each cell; sums to the trajectory length.
pub fn occupancy(traj: &Trajectory, partition: &CellPartition) -> Vec<f64> {
    let mut times = vec![0.0; partition.cells.len()];
    for sp in trajectory_spans(traj, partition) {
        times[sp.cell] += sp.hi - sp.lo;
    }
    times
}

fn check_checkpoints(checkpoints: &[f64], length: f64) -> Result<(), ErgodicityError> {
    let mut prev = 0.0;
    for &k in checkpoints {
        if k <= prev || k > length + 1e-9 {
            return Err(ErgodicityError::CheckpointBeyondLength {
                checkpoint: k,
                length,
            });
        }
        prev = k;
    }
    Ok(())
}

fn prefix_times(spans: &[Span], cells: usize, k: f64) -> Vec<f64> {
    let mut times = vec![0.0; cells];
    for sp in spans {
        if sp.lo >= k {
            break;
        }
        times[sp.cell] += sp.hi.min(k) - sp.lo;
    }
    times
}

fn discrepancy_of(times: &[f64], k: f64, partition: &CellPartition) -> f64 {
    times
        .iter()
        .zip(&partition.cells)
        .map(|(t, c)| (t / k - c.area / partition.total_area).abs())
        .sum()
}

/// D(K) = Σ_c |t_c(K)/K − a_c/A| at each checkpoint; D ∈ [0, 2].
pub fn discrepancy_series(
    traj: &Trajectory,
    partition: &CellPartition,
    checkpoints: &[f64],
) -> Result<Vec<f64>, ErgodicityError> {
    check_checkpoints(checkpoints, traj.length)?;
    let spans = trajectory_spans(traj, partition);
    Ok(checkpoints
        .iter()
        .map(|&k| {
            discrepancy_of(
                &prefix_times(&spans, partition.cells.len(), k),
                k,
                partition,
            )
        })
        .collect())
}

/// Observable along trajectories: the constant 1, the indicator of one
/// partition cell (exact line integrals), or a smooth chart function
/// (composite midpoint rule).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    One,
    CellIndicator(usize),
    /// cos(2πx) in every chart.
    CosHorizontal,
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::One => "one".to_string(),
            TestFunction::CellIndicator(c) => format!("cell:{c}"),
            TestFunction::CosHorizontal => "cos-x".to_string(),
        }
    }
}

/// Looks a test function up by name: "one", "cell:<index>", "cos-x".
pub fn test_function(name: &str) -> Result<TestFunction, ErgodicityError> {
    if name == "one" {
        return Ok(TestFunction::One);
    }
    if name == "cos-x" {
        return Ok(TestFunction::CosHorizontal);
    }
    if let Some(cell) = name.strip_prefix("cell:") {
        if let Ok(c) = cell.parse::<usize>() {
            return Ok(TestFunction::CellIndicator(c));
        }
    }
    Err(ErgodicityError::UnknownTestFunction(name.to_string()))
}

fn smooth_eval(f: TestFunction, _polygon: usize, p: Vec2) -> f64 {
    match f {
        TestFunction::CosHorizontal => (TAU * p.x).cos(),
        _ => unreachable!("only smooth functions are sampled"),
    }
}

fn smooth_segment_integral(f: TestFunction, seg: &Segment, upto: f64) -> f64 {
    if upto <= 0.0 {
        return 0.0;
    }
    let n = (upto / SMOOTH_STEP).ceil().max(1.0) as usize;
    let h = upto / n as f64;
    (0..n)
        .map(|i| {
            smooth_eval(
                f,
                seg.polygon,
                seg.start + seg.dir.scale((i as f64 + 0.5) * h),
            ) * h
        })
        .sum()
}

/// Time average (1/K)∫₀^K f at each checkpoint.
pub fn birkhoff_average(
    traj: &Trajectory,
    partition: &CellPartition,
    f: TestFunction,
    checkpoints: &[f64],
) -> Result<Vec<f64>, ErgodicityError> {
    check_checkpoints(checkpoints, traj.length)?;
    match f {
        TestFunction::One => Ok(vec![1.0; checkpoints.len()]),
        TestFunction::CellIndicator(c) => {
            if c >= partition.cells.len() {
                return Err(ErgodicityError::UnknownTestFunction(f.name()));
            }
            let spans = trajectory_spans(traj, partition);
            Ok(checkpoints
                .iter()
                .map(|&k| prefix_times(&spans, partition.cells.len(), k)[c] / k)
                .collect())
        }
        TestFunction::CosHorizontal => {
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut acc = 0.0;
            let mut t0 = 0.0;
            let mut ci = 0;
            for seg in traj.segments() {
                let t1 = t0 + seg.len;
                while ci < checkpoints.len() && checkpoints[ci] <= t1 + 1e-12 {
                    let k = checkpoints[ci];
                    out.push((acc + smooth_segment_integral(f, &seg, k - t0)) / k);
                    ci += 1;
                }
                acc += smooth_segment_integral(f, &seg, seg.len);
                t0 = t1;
            }
            for &k in &checkpoints[ci..] {
                out.push(acc / k);
            }
            Ok(out)
        }
    }
}

/// Normalized space average (1/A)∫_S f dμ. Indicators are exact; smooth
/// functions use a per-triangle edge-midpoint rule, subdividing until two
/// consecutive refinements agree to 1e−8.
pub fn space_average(
    surface: &FlatSurface,
    partition: &CellPartition,
    f: TestFunction,
) -> Result<f64, ErgodicityError> {
    match f {
        TestFunction::One => Ok(1.0),
        TestFunction::CellIndicator(c) => {
            if c >= partition.cells.len() {
                return Err(ErgodicityError::UnknownTestFunction(f.name()));
            }
            Ok(partition.cells[c].area / partition.total_area)
        }
        TestFunction::CosHorizontal => {
            fn quad(f: TestFunction, polygon: usize, t: [Vec2; 3], depth: usize) -> f64 {
                if depth == 0 {
                    let m = [
                        midpoint(t[0], t[1]),
                        midpoint(t[1], t[2]),
                        midpoint(t[2], t[0]),
                    ];
                    let s: f64 = m.iter().map(|&p| smooth_eval(f, polygon, p)).sum();
                    return tri_area(&t) * s / 3.0;
                }
                children(t)
                    .into_iter()
                    .map(|kid| quad(f, polygon, kid, depth - 1))
                    .sum()
            }
            let fans: Vec<(usize, [Vec2; 3])> = surface
                .polygons
                .iter()
                .enumerate()
                .flat_map(|(p, poly)| {
                    (0..poly.len() - 2)
                        .map(move |k| (p, [poly.vertex(0), poly.vertex(k + 1), poly.vertex(k + 2)]))
                })
                .collect();
            let mut prev = f64::INFINITY;
            for depth in 0..=10 {
                let integral: f64 = fans.iter().map(|&(p, t)| quad(f, p, t, depth)).sum();
                if (integral - prev).abs() <= 1e-8 {
                    return Ok(integral / surface.area());
                }
                prev = integral;
            }
            Ok(prev / surface.area())
        }
    }
}

/// Which flow an experiment runs and how directions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Fresh direction per sample; requires trivial holonomy so directions
    /// are globally defined.
    Directional,
    /// Fresh start and direction per sample, geodesic flow.
    Generic,
    /// One shared direction, parallel-transported to each start along the
    /// developing tree.
    ParallelFamily,
    /// Billiard flow; the only mode allowed on bordered surfaces.
    Billiard,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Directional => "directional",
            Mode::Generic => "generic",
            Mode::ParallelFamily => "parallel-family",
            Mode::Billiard => "billiard",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "directional" => Ok(Mode::Directional),
            "generic" => Ok(Mode::Generic),
            "parallel-family" => Ok(Mode::ParallelFamily),
            "billiard" => Ok(Mode::Billiard),
            other => Err(format!(
                "unknown mode {other:?}; expected directional, generic, parallel-family or billiard"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n_samples: usize,
    pub length: f64,
    pub depth: usize,
    pub seed: u64,
    /// Fixed direction for every sample; None draws one per sample
    /// (parallel-family draws one per experiment).
    pub direction: Option<Vec2>,
    /// A sample equidistributes when its final discrepancy is below this
    /// and below its first-checkpoint discrepancy.
    pub d_threshold: f64,
    /// Fraction of equidistributing samples required for the verdict.
    pub pass_fraction: f64,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, n_samples: usize, length: f64, depth: usize, seed: u64) -> Self {
        ExperimentConfig {
            mode,
            n_samples,
            length,
            depth,
            seed,
            direction: None,
            d_threshold: 0.1,
            pass_fraction: 0.9,
        }
    }

    /// Checkpoints are fixed at L/100, L/10 and L.
    pub fn checkpoints(&self) -> Vec<f64> {
        vec![self.length / 100.0, self.length / 10.0, self.length]
    }
}

#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub polygon_id: String,
    pub start: FlowState,
    pub discrepancy: Vec<f64>,
    /// Per test function, the time average at each checkpoint.
    pub means: Vec<Vec<f64>>,
    pub equidistributing: bool,
}

#[derive(Debug, Clone)]
pub struct ErgodicityReport {
    pub config: ExperimentConfig,
    pub checkpoints: Vec<f64>,
    /// (name, space average) per test function, shared by all samples.
    pub functions: Vec<(String, f64)>,
    pub samples: Vec<SampleRecord>,
    /// Singular starts that were redrawn from the next substream.
    pub resampled: usize,
    pub median_first: f64,
    pub median_final: f64,
    pub q90_final: f64,
    pub max_final: f64,
    pub passing: usize,
    pub verdict: bool,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Traces seeded random samples and aggregates their discrepancy series
/// and Birkhoff tables. Samples landing on a singular point are redrawn
/// from the next substream and counted.
pub fn run_experiment(
    surface: &FlatSurface,
    config: &ExperimentConfig,
) -> Result<ErgodicityReport, ErgodicityError> {
    if surface.has_boundary() && config.mode != Mode::Billiard {
        return Err(ErgodicityError::ModeSurfaceMismatch(
            "bordered surfaces support only billiard mode".to_string(),
        ));
    }
    let family_linear = match config.mode {
        Mode::Directional => {
            let group = holonomy_group(&develop(surface)?)?;
            if !group.is_trivial() {
                return Err(ErgodicityError::ModeSurfaceMismatch(format!(
                    "directional mode needs trivial holonomy, found a group of order {}",
                    group.order()
                )));
            }
            None
        }
        Mode::ParallelFamily => Some(develop(surface)?.linear),
        _ => None,
    };

    let partition = build_partition(surface, config.depth)?;
    let checkpoints = config.checkpoints();
    let master = Rng::new(config.seed);
    let family_dir =
        match config.mode {
            Mode::ParallelFamily => Some(config.direction.map(Vec2::unit).unwrap_or_else(|| {
                Vec2::from_angle(master.substream(FAMILY_STREAM).range(0.0, TAU))
            })),
            _ => config.direction.map(Vec2::unit),
        };

    let functions = [TestFunction::One, TestFunction::CellIndicator(0)];
    let space: Vec<(String, f64)> = functions
        .iter()
        .map(|&f| Ok((f.name(), space_average(surface, &partition, f)?)))
        .collect::<Result<_, ErgodicityError>>()?;

    let weights: Vec<f64> = surface.polygons.iter().map(|p| p.area()).collect();
    let area: f64 = weights.iter().sum();

    let mut samples = Vec::with_capacity(config.n_samples);
    let mut resampled = 0;
    for i in 0..config.n_samples {
        let mut attempt: u64 = 0;
        let traj = loop {
            let mut rng = master.substream(((i as u64) << 8) | attempt);
            let mut pick = rng.uniform() * area;
            let mut polygon = surface.polygons.len() - 1;
            for (p, w) in weights.iter().enumerate() {
                if pick < *w {
                    polygon = p;
                    break;
                }
                pick -= w;
            }
            let point = uniform_point(&surface.polygons[polygon], &mut rng);
            let dir = match (config.mode, family_dir) {
                (Mode::ParallelFamily, Some(w)) => family_linear.as_ref().expect("developed")
                    [polygon]
                    .inverse()
                    .matrix()
                    .apply_vec(w),
                (_, Some(w)) => w,
                (_, None) => Vec2::from_angle(rng.range(0.0, TAU)),
            };
            let start = FlowState::new(polygon, point, dir);
            let run = if config.mode == Mode::Billiard {
                trace_billiard(surface, start, config.length)
            } else {
                trace_geodesic(surface, start, config.length)
            };
            match run {
                Ok(t) => break t,
                Err(FlowError::SingularHit { .. }) if attempt < 32 => {
                    resampled += 1;
                    attempt += 1;
                }
                Err(e) => return Err(e.into()),
            }
        };

        let spans = trajectory_spans(&traj, &partition);
        let discrepancy: Vec<f64> = checkpoints
            .iter()
            .map(|&k| {
                discrepancy_of(
                    &prefix_times(&spans, partition.cells.len(), k),
                    k,
                    &partition,
                )
            })
            .collect();
        let means: Vec<Vec<f64>> = functions
            .iter()
            .map(|&f| match f {
                TestFunction::One => Ok(vec![1.0; checkpoints.len()]),
                TestFunction::CellIndicator(c) => Ok(checkpoints
                    .iter()
                    .map(|&k| prefix_times(&spans, partition.cells.len(), k)[c] / k)
                    .collect()),
                _ => birkhoff_average(&traj, &partition, f, &checkpoints),
            })
            .collect::<Result<_, _>>()?;
        let (d_first, d_final) = (discrepancy[0], *discrepancy.last().unwrap());
        samples.push(SampleRecord {
            polygon_id: surface.polygons[traj.start.polygon].id.clone(),
            start: traj.start,
            discrepancy,
            means,
            equidistributing: d_final < config.d_threshold && d_final < d_first,
        });
    }

    let mut firsts: Vec<f64> = samples.iter().map(|s| s.discrepancy[0]).collect();
    let mut finals: Vec<f64> = samples
        .iter()
        .map(|s| *s.discrepancy.last().unwrap())
        .collect();
    firsts.sort_by(f64::total_cmp);
    finals.sort_by(f64::total_cmp);
    let passing = samples.iter().filter(|s| s.equidistributing).count();
    let verdict = passing as f64 >= config.pass_fraction * config.n_samples as f64 - 1e-12;
    Ok(ErgodicityReport {
        config: config.clone(),
        checkpoints,
        functions: space,
        samples,
        resampled,
        median_first: quantile(&firsts, 0.5),
        median_final: quantile(&finals, 0.5),
        q90_final: quantile(&finals, 0.9),
        max_final: quantile(&finals, 1.0),
        passing,
        verdict,
    })
}

impl ErgodicityReport {
    /// Canonical report text: fixed key order, full-precision floats, byte
    /// for byte reproducible from (surface, config, seed).
    pub fn render(&self) -> String {
        let mut out = String::new();
        let series = |xs: &[f64]| {
            xs.iter()
                .map(|&x| fmt_float(x))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str("ergodicity report\n");
        let _ = writeln!(out, "mode: {}", self.config.mode.as_str());
        let _ = writeln!(out, "samples: {}", self.config.n_samples);
        let _ = writeln!(out, "length: {}", fmt_float(self.config.length));
        let _ = writeln!(out, "depth: {}", self.config.depth);
        let _ = writeln!(out, "seed: {}", self.config.seed);
        match self.config.direction {
            Some(d) => {
                let _ = writeln!(
                    out,
                    "direction: fixed ({}, {})",
                    fmt_float(d.x),
                    fmt_float(d.y)
                );
            }
            None => out.push_str("direction: free\n"),
        }
        let _ = writeln!(out, "checkpoints: {}", series(&self.checkpoints));
        let _ = writeln!(
            out,
            "thresholds: discrepancy {} at the final checkpoint, pass fraction {}",
            fmt_float(self.config.d_threshold),
            fmt_float(self.config.pass_fraction)
        );
        let _ = writeln!(out, "resampled-singular-starts: {}", self.resampled);
        for (i, s) in self.samples.iter().enumerate() {
            let _ = writeln!(
                out,
                "sample {i}: polygon {} start ({}, {}) dir ({}, {})",
                s.polygon_id,
                fmt_float(s.start.point.x),
                fmt_float(s.start.point.y),
                fmt_float(s.start.dir.x),
                fmt_float(s.start.dir.y)
            );
            let _ = writeln!(out, "  discrepancy: {}", series(&s.discrepancy));
            for ((name, space), ts) in self.functions.iter().zip(&s.means) {
                let _ = writeln!(
                    out,
                    "  mean[{name}]: {} (space {})",
                    series(ts),
                    fmt_float(*space)
                );
            }
            let flag = if s.equidistributing {
                "equidistributing".to_string()
            } else {
                let (df, dl) = (s.discrepancy[0], *s.discrepancy.last().unwrap());
                let mut parts = Vec::new();
                if dl >= self.config.d_threshold {
                    parts.push("above-threshold");
                }
                if dl >= df {
                    parts.push("non-decreasing");
                }
                parts.join(" ")
            };
            let _ = writeln!(out, "  flag: {flag}");
        }
        out.push_str("summary:\n");
        let _ = writeln!(
            out,
            "  discrepancy at first checkpoint: median {}",
            fmt_float(self.median_first)
        );
        let _ = writeln!(
            out,
            "  discrepancy at final checkpoint: median {} q90 {} max {}",
            fmt_float(self.median_final),
            fmt_float(self.q90_final),
            fmt_float(self.max_final)
        );
        let _ = writeln!(
            out,
            "  equidistributing samples: {}/{}",
            self.passing, self.config.n_samples
        );
        let verdict = if self.verdict {
            "consistent with ergodicity at these thresholds"
        } else {
            "not consistent with ergodicity at these thresholds"
        };
        let _ = writeln!(
            out,
            "verdict: {verdict} ({}/{})",
            self.passing, self.config.n_samples
        );
        out
    }
}
