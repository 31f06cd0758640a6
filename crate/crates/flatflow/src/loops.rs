//! Polygonal loops and their holonomy.
//!
//! A loop is a cyclic list of nodes, each a unit tangent vector plus the
//! geodesic length to the next node. Evaluating a loop traces every segment,
//! sums the turning angles picked up at the nodes as seen in the developed
//! plane, and composes the exact inverse transports of the crossings,
//! yielding the loop's holonomy as an exact orthogonal part alongside the
//! float total turning Θ. For an orientation-preserving loop the rotation
//! angle of the holonomy is Θ modulo 2π.
//!
//! The generators here produce loops whose expected holonomy is known by
//! construction: chart triangles (trivial), out-and-back paths (trivial,
//! Θ = 2π), and circles around interior cone points (rotation by the
//! fractional part of the cone angle over 2π, repeated for multi-wraps).

use thiserror::Error;

use crate::flow::{trace_geodesic, EventKind, FlowError, FlowState};
use crate::geom::{signed_angle, Vec2};
use crate::rng::{uniform_point, Rng};
use crate::surface::{ConePoint, FlatSurface};
use crate::turn::OrthogonalPart;

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("loop is not closed: segment {segment} ends {gap:.3e} from the next node")]
    LoopNotClosed { segment: usize, gap: f64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Node of a polygonal loop: outgoing tangent and segment length.
#[derive(Debug, Clone, Copy)]
pub struct LoopNode {
    pub state: FlowState,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct PolygonalLoop {
    pub nodes: Vec<LoopNode>,
}

/// Result of evaluating a loop.
#[derive(Debug, Clone, Copy)]
pub struct LoopHolonomy {
    /// Total turning: the sum of the signed node angles, in radians.
    pub total_turn: f64,
    /// Exact holonomy: composed inverse transports of the crossings.
    pub exact_part: OrthogonalPart,
    pub crossings: usize,
}

impl LoopHolonomy {
    /// |Θ − rotation angle| distance to the nearest multiple of 2π; None for
    /// orientation-reversing loops, where the comparison has no meaning.
    pub fn turn_residual(&self) -> Option<f64> {
        if self.exact_part.reflect {
            None
        } else {
            Some(crate::geom::dist_mod_tau(
                self.total_turn - self.exact_part.angle(),
            ))
        }
    }
}

/// Traces every segment and accumulates turning and exact holonomy.
pub fn evaluate_loop(surface: &FlatSurface, lp: &PolygonalLoop) -> Result<LoopHolonomy, LoopError> {
    assert!(!lp.nodes.is_empty(), "empty loop");
    let tol = surface.tol.eps_traj;
    let mut total_turn = 0.0;
    let mut exact = OrthogonalPart::IDENTITY;
    let mut crossings = 0;

    for (i, node) in lp.nodes.iter().enumerate() {
        let next = &lp.nodes[(i + 1) % lp.nodes.len()];
        let traj = trace_geodesic(surface, node.state, node.length)?;
        for e in &traj.events {
            let EventKind::Crossing { gluing, from_a } = e.kind else {
                unreachable!("geodesic tracing yields crossings only");
            };
            let g = &surface.gluings[gluing];
            let l = if from_a { g.part } else { g.part.inverse() };
            exact = exact.compose(l.inverse());
            crossings += 1;
        }
        if traj.end.polygon != next.state.polygon {
            return Err(LoopError::LoopNotClosed {
                segment: i,
                gap: f64::INFINITY,
            });
        }
        let gap = traj.end.point.dist(next.state.point);
        if gap > tol {
            return Err(LoopError::LoopNotClosed { segment: i, gap });
        }
        // The node angle lives in the local chart; the developed plane sees
        // it through the transports so far, which flip its sign when they
        // reverse orientation.
        let local = signed_angle(traj.end.dir, next.state.dir);
        total_turn += if exact.reflect { -local } else { local };
    }

    Ok(LoopHolonomy {
        total_turn,
        exact_part: exact,
        crossings,
    })
}

fn node(polygon: usize, point: Vec2, toward: Vec2) -> LoopNode {
    LoopNode {
        state: FlowState {
            polygon,
            point,
            dir: (toward - point).unit(),
        },
        length: toward.dist(point),
    }
}

/// Counterclockwise triangle inside one chart: no crossings, Θ = 2π.
pub fn chart_triangle(surface: &FlatSurface, rng: &mut Rng) -> PolygonalLoop {
    let pi = rng.below(surface.polygons.len());
    let poly = &surface.polygons[pi];
    loop {
        let a = uniform_point(poly, rng);
        let b = uniform_point(poly, rng);
        let c = uniform_point(poly, rng);
        let area2 = (b - a).cross(c - a);
        // Skinny triangles make the node angles numerically flaky.
        if area2.abs() < 1e-3 {
            continue;
        }
        let (b, c) = if area2 > 0.0 { (b, c) } else { (c, b) };
        return PolygonalLoop {
            nodes: vec![node(pi, a, b), node(pi, b, c), node(pi, c, a)],
        };
    }
}

/// Random geodesic followed by its own reversal: trivial holonomy, Θ = 2π.
pub fn out_and_back(surface: &FlatSurface, rng: &mut Rng) -> Option<PolygonalLoop> {
    for _ in 0..32 {
        let pi = rng.below(surface.polygons.len());
        let point = uniform_point(&surface.polygons[pi], rng);
        let dir = Vec2::from_angle(rng.range(0.0, std::f64::consts::TAU));
        let length = rng.range(0.5, 4.0);
        let start = FlowState {
            polygon: pi,
            point,
            dir,
        };
        let Ok(traj) = trace_geodesic(surface, start, length) else {
            continue;
        };
        // End exactly where the forward trace stopped, pointing back.
        return Some(PolygonalLoop {
            nodes: vec![
                LoopNode {
                    state: traj.start,
                    length,
                },
                LoopNode {
                    state: FlowState {
                        dir: -traj.end.dir,
                        ..traj.end
                    },
                    length,
                },
            ],
        });
    }
    None
}

/// Largest circle radius that keeps every chord of a lasso around this cone
/// point inside the polygons it visits.
fn lasso_radius(surface: &FlatSurface, cone: &ConePoint) -> f64 {
    let mut r = f64::INFINITY;
    for c in &cone.corners {
        let poly = &surface.polygons[c.polygon];
        let n = poly.len();
        let vtx = poly.vertex(c.vertex);
        let prev = (c.vertex + n - 1) % n;
        r = r.min(poly.edge_len(c.vertex)).min(poly.edge_len(prev));
        for e in 0..n {
            if e == c.vertex || e == prev {
                continue;
            }
            let (a, b) = poly.edge(e);
            let ab = b - a;
            let s = ((vtx - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            r = r.min(vtx.dist(a + ab.scale(s)));
        }
    }
    0.3 * r
}

/// Piecewise-geodesic circle around an interior cone point, `wraps` times
/// counterclockwise. Exact holonomy: the rotation by the fractional part of
/// the cone angle, to the `wraps`-th power.
pub fn vertex_circle(
    surface: &FlatSurface,
    cone: &ConePoint,
    wraps: usize,
) -> Option<PolygonalLoop> {
    if cone.boundary || wraps == 0 {
        return None;
    }
    let rho = lasso_radius(surface, cone);
    if rho <= 0.0 {
        return None;
    }
    let m = cone.corners.len();
    // Bisector points, one per wedge, in walk order.
    let anchors: Vec<(usize, Vec2)> = cone
        .corners
        .iter()
        .map(|c| {
            let poly = &surface.polygons[c.polygon];
            let n = poly.len();
            let vtx = poly.vertex(c.vertex);
            let out = poly.edge_vec(c.vertex).unit();
            let back = (-poly.edge_vec((c.vertex + n - 1) % n)).unit();
            let half = signed_angle(out, back) / 2.0;
            let bisector = Vec2::from_angle(out.angle() + half);
            (c.polygon, vtx + bisector.scale(rho))
        })
        .collect();

    let mut nodes = Vec::with_capacity(m * wraps);
    for i in 0..m {
        let (pi, ci) = anchors[i];
        let (_, cnext) = anchors[(i + 1) % m];
        // Develop the next anchor back into this wedge's chart across the
        // single gluing between the wedges.
        let cr = cone.crossings[i];
        let h = surface.gluing_isometry(cr.gluing, cr.from_a);
        let target = h.inverse().apply(cnext);
        nodes.push(node(pi, ci, target));
    }
    let cycle = nodes.clone();
    for _ in 1..wraps {
        nodes.extend(cycle.iter().cloned());
    }
    Some(PolygonalLoop { nodes })
}

/// Seeded mix of the loop generators; always returns `count` loops.
pub fn generate_loops(surface: &FlatSurface, count: usize, rng: &mut Rng) -> Vec<PolygonalLoop> {
    let interior: Vec<&ConePoint> = surface
        .cone_points()
        .iter()
        .filter(|c| !c.boundary)
        .collect();
    let mut out = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        let mut r = rng.substream(k);
        k += 1;
        let lp = match r.below(4) {
            0 => Some(chart_triangle(surface, &mut r)),
            1 => out_and_back(surface, &mut r),
            2 if !interior.is_empty() => {
                let c = interior[r.below(interior.len())];
                vertex_circle(surface, c, 1)
            }
            3 if !interior.is_empty() => {
                let c = interior[r.below(interior.len())];
                vertex_circle(surface, c, 2 + r.below(2))
            }
            _ => Some(chart_triangle(surface, &mut r)),
        };
        if let Some(lp) = lp {
            out.push(lp);
        }
    }
    out
}
