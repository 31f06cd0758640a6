//! Surface data model and validation.
//!
//! A surface is a finite set of convex counterclockwise polygons with some
//! edges glued in pairs by isometries whose rotational part is an exact
//! rational turn. Unglued edges are walls (mirror boundary). Validation
//! checks the combinatorics and geometry, walks every corner orbit to
//! extract exact cone angles, and closes with a Gauss-Bonnet audit.
//!
//! Gluing conventions, fixed once here and relied on everywhere else:
//! `reflect = false` glues edge a onto edge b reversed (a start ↦ b end),
//! with linear part the rotation by 2π·turn; `reflect = true` glues edge a
//! onto edge b as directed (a start ↦ b start), with linear part the
//! reflection whose matrix is [[cos 2πt, sin 2πt], [sin 2πt, −cos 2πt]].

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

use crate::geom::{dist_mod_tau, signed_angle, Isometry, Vec2};
use crate::turn::{snap_ratio, OrthogonalPart, RationalTurn};

/// Numeric thresholds shared across the engine.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative edge-length agreement required of a gluing.
    pub eps_len: f64,
    /// Angular agreement (radians) between declared and geometric turns.
    pub eps_ang: f64,
    /// Agreement between a float cone angle and its snapped exact value.
    pub eps_cone: f64,
    /// Distance from an edge endpoint below which a crossing is singular.
    pub delta_vertex: f64,
    /// Pointwise tolerance for trajectory comparisons.
    pub eps_traj: f64,
    /// Closure tolerance for polygonal loop endpoints and holonomy checks.
    pub eps_loop: f64,
    /// Gauss-Bonnet residual allowed by validation.
    pub eps_gb: f64,
    /// Largest denominator considered when snapping angles to fractions.
    pub q_max: i64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            eps_len: 1e-9,
            eps_ang: 1e-9,
            eps_cone: 1e-8,
            delta_vertex: 1e-9,
            eps_traj: 1e-6,
            eps_loop: 1e-8,
            eps_gb: 1e-9,
            q_max: 3600,
        }
    }
}

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("duplicate polygon id {id:?}")]
    DuplicatePolygonId { id: String },
    #[error("polygon {id:?} is not a strictly convex counterclockwise polygon")]
    NonConvexPolygon { id: String },
    #[error("gluing {gluing} references a missing polygon or edge")]
    DanglingEdgeRef { gluing: usize },
    #[error("edge {polygon}[{edge}] appears on more than one gluing side")]
    EdgeReused { polygon: String, edge: usize },
    #[error("gluing {gluing}: glued edges differ in length by {delta:.3e}")]
    EdgeLengthMismatch { gluing: usize, delta: f64 },
    #[error(
        "gluing {gluing}: declared turn {declared} but edge geometry gives {geometric:.12} turns"
    )]
    TurnMismatch {
        gluing: usize,
        declared: RationalTurn,
        geometric: f64,
    },
    #[error("cone angle at corner {corner} misses its exact value by {residual:.3e} rad")]
    ConeSnapFailure { corner: String, residual: f64 },
    #[error("Gauss-Bonnet residual {residual:.3e} exceeds tolerance")]
    GaussBonnetViolation { residual: f64 },
}

/// Convex counterclockwise polygon in its own chart.
#[derive(Debug, Clone)]
pub struct Polygon {
    pub id: String,
    pub vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(id: impl Into<String>, vertices: Vec<Vec2>) -> Polygon {
        Polygon {
            id: id.into(),
            vertices,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex by cyclic index.
    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.vertices.len()]
    }

    /// Directed edge e runs from vertex e to vertex e+1.
    pub fn edge(&self, e: usize) -> (Vec2, Vec2) {
        (self.vertex(e), self.vertex(e + 1))
    }

    pub fn edge_vec(&self, e: usize) -> Vec2 {
        let (a, b) = self.edge(e);
        b - a
    }

    pub fn edge_len(&self, e: usize) -> f64 {
        self.edge_vec(e).norm()
    }

    /// Interior angle at vertex v, in (0, π) for a valid polygon.
    pub fn interior_angle(&self, v: usize) -> f64 {
        let n = self.vertices.len();
        let incoming = self.edge_vec((v + n - 1) % n);
        let outgoing = self.edge_vec(v);
        PI - signed_angle(incoming, outgoing)
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            let (a, b) = self.edge(i);
            s += a.cross(b);
        }
        s / 2.0
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        let mut c = Vec2 { x: 0.0, y: 0.0 };
        for &v in &self.vertices {
            c = c + v;
        }
        c.scale(1.0 / n)
    }

    /// True when the point lies in the closed polygon, with `slack` widening
    /// each half-plane by that signed distance.
    pub fn contains(&self, p: Vec2, slack: f64) -> bool {
        let n = self.vertices.len();
        for e in 0..n {
            let (a, _) = self.edge(e);
            let ev = self.edge_vec(e);
            let len = ev.norm();
            if ev.cross(p - a) < -slack * len {
                return false;
            }
        }
        true
    }

    /// Strict convexity and counterclockwise orientation: every consecutive
    /// edge pair makes a strict left turn.
    pub fn is_convex_ccw(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let u = self.edge_vec(i);
            let w = self.edge_vec((i + 1) % n);
            if !u.is_finite() || u.cross(w) <= 0.0 {
                return false;
            }
        }
        true
    }
}

/// One side of a gluing: an edge of a polygon, both by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub polygon: usize,
    pub edge: usize,
}

/// Identification of edge a with edge b.
///
/// The gluing isometry maps chart-a coordinates to chart-b coordinates; its
/// linear part is `part`. See the module docs for the endpoint convention.
#[derive(Debug, Clone, Copy)]
pub struct Gluing {
    pub a: EdgeRef,
    pub b: EdgeRef,
    pub part: OrthogonalPart,
}

impl Gluing {
    pub fn reflect(&self) -> bool {
        self.part.reflect
    }

    pub fn turn(&self) -> RationalTurn {
        self.part.turn
    }

    /// The side opposite `from_a`.
    pub fn side(&self, is_a: bool) -> EdgeRef {
        if is_a {
            self.a
        } else {
            self.b
        }
    }
}

/// Corner of a polygon: the wedge at one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Corner {
    pub polygon: usize,
    pub vertex: usize,
}

/// One gluing crossing inside a corner walk, oriented so the walk moves from
/// the a side to the b side exactly when `from_a` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub gluing: usize,
    pub from_a: bool,
}

/// Exact angle 2π·num/den, reduced, num ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactAngle {
    pub num: i64,
    pub den: i64,
}

impl ExactAngle {
    pub fn radians(self) -> f64 {
        TAU * self.num as f64 / self.den as f64
    }

    /// Multiples of 2π (interior regular point has value 1).
    pub fn of_full_turns(self) -> (i64, i64) {
        (self.num, self.den)
    }
}

impl fmt::Display for ExactAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2pi*{}/{}", self.num, self.den)
    }
}

/// Identified vertex orbit together with its cone data.
///
/// `corners` lists the wedges in counterclockwise order around the point;
/// `crossings[i]` is the gluing crossed between `corners[i]` and
/// `corners[i+1]` (wrapping for interior orbits). For interior orbits
/// `transport` is the composite linear part of the full counterclockwise
/// walk expressed in the chart of `corners[0]`, and the fractional part of
/// the cone angle over 2π equals the turn of its inverse.
#[derive(Debug, Clone)]
pub struct ConePoint {
    pub corners: Vec<Corner>,
    pub crossings: Vec<Crossing>,
    pub boundary: bool,
    /// Float total angle: the sum of the wedge angles.
    pub angle: f64,
    /// Exact angle; always present for interior orbits, present for boundary
    /// orbits only when the angle snaps to a rational multiple of π.
    pub exact: Option<ExactAngle>,
    pub transport: Option<OrthogonalPart>,
}

impl ConePoint {
    /// A point is singular when its angle differs from 2π (interior) or π
    /// (boundary).
    pub fn is_singular(&self) -> bool {
        match self.exact {
            Some(e) => {
                if self.boundary {
                    (e.num, e.den) != (1, 2)
                } else {
                    (e.num, e.den) != (1, 1)
                }
            }
            None => true,
        }
    }

    /// Denominator of the fractional part of angle/2π (interior orbits).
    pub fn rotation_order(&self) -> Option<i64> {
        self.transport.map(|t| t.inverse().turn.order())
    }

    pub fn label(&self, polygons: &[Polygon]) -> String {
        let c = self.corners[0];
        format!("{}:{}", polygons[c.polygon].id, c.vertex)
    }
}

/// Validated surface: polygons, gluings, edge lookup, and cone data.
#[derive(Debug, Clone)]
pub struct FlatSurface {
    pub polygons: Vec<Polygon>,
    pub gluings: Vec<Gluing>,
    pub tol: Tolerances,
    edge_table: Vec<Vec<Option<(usize, bool)>>>,
    cones: Vec<ConePoint>,
}

impl FlatSurface {
    /// Validates and builds the surface. All checks run here; an Ok surface
    /// is structurally sound with exact cone data attached.
    pub fn new(
        polygons: Vec<Polygon>,
        gluings: Vec<Gluing>,
        tol: Tolerances,
    ) -> Result<FlatSurface, SurfaceError> {
        let mut seen = HashMap::new();
        for (i, p) in polygons.iter().enumerate() {
            if seen.insert(p.id.clone(), i).is_some() {
                return Err(SurfaceError::DuplicatePolygonId { id: p.id.clone() });
            }
            if !p.is_convex_ccw() {
                return Err(SurfaceError::NonConvexPolygon { id: p.id.clone() });
            }
        }

        let mut edge_table: Vec<Vec<Option<(usize, bool)>>> =
            polygons.iter().map(|p| vec![None; p.len()]).collect();
        for (gi, g) in gluings.iter().enumerate() {
            for (side, is_a) in [(g.a, true), (g.b, false)] {
                if side.polygon >= polygons.len() || side.edge >= polygons[side.polygon].len() {
                    return Err(SurfaceError::DanglingEdgeRef { gluing: gi });
                }
                let slot = &mut edge_table[side.polygon][side.edge];
                if slot.is_some() {
                    return Err(SurfaceError::EdgeReused {
                        polygon: polygons[side.polygon].id.clone(),
                        edge: side.edge,
                    });
                }
                *slot = Some((gi, is_a));
            }
        }

        for (gi, g) in gluings.iter().enumerate() {
            let pa = &polygons[g.a.polygon];
            let pb = &polygons[g.b.polygon];
            let la = pa.edge_len(g.a.edge);
            let lb = pb.edge_len(g.b.edge);
            let delta = (la - lb).abs();
            if delta > tol.eps_len * la.max(lb).max(1.0) {
                return Err(SurfaceError::EdgeLengthMismatch { gluing: gi, delta });
            }
            let da = pa.edge_vec(g.a.edge);
            let db = pb.edge_vec(g.b.edge);
            let geometric = if g.part.reflect {
                da.angle() + db.angle()
            } else {
                (-db).angle() - da.angle()
            };
            if dist_mod_tau(geometric - g.part.angle()) > tol.eps_ang {
                return Err(SurfaceError::TurnMismatch {
                    gluing: gi,
                    declared: g.part.turn,
                    geometric: (geometric / TAU).rem_euclid(1.0),
                });
            }
        }

        let cones = walk_all_corners(&polygons, &gluings, &edge_table, &tol)?;

        let surface = FlatSurface {
            polygons,
            gluings,
            tol,
            edge_table,
            cones,
        };
        let residual = surface.gauss_bonnet_residual();
        if residual > tol.eps_gb {
            return Err(SurfaceError::GaussBonnetViolation { residual });
        }
        Ok(surface)
    }

    pub fn polygon_index(&self, id: &str) -> Option<usize> {
        self.polygons.iter().position(|p| p.id == id)
    }

    /// Gluing covering this edge, with the side flag, or None for a wall.
    pub fn edge_gluing(&self, polygon: usize, edge: usize) -> Option<(usize, bool)> {
        self.edge_table[polygon][edge]
    }

    pub fn is_wall(&self, polygon: usize, edge: usize) -> bool {
        self.edge_table[polygon][edge].is_none()
    }

    pub fn walls(&self) -> Vec<EdgeRef> {
        let mut out = Vec::new();
        for (pi, p) in self.polygons.iter().enumerate() {
            for e in 0..p.len() {
                if self.is_wall(pi, e) {
                    out.push(EdgeRef {
                        polygon: pi,
                        edge: e,
                    });
                }
            }
        }
        out
    }

    pub fn has_boundary(&self) -> bool {
        self.polygons
            .iter()
            .enumerate()
            .any(|(pi, p)| (0..p.len()).any(|e| self.is_wall(pi, e)))
    }

    pub fn cone_points(&self) -> &[ConePoint] {
        &self.cones
    }

    pub fn singular_points(&self) -> Vec<&ConePoint> {
        self.cones.iter().filter(|c| c.is_singular()).collect()
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|p| p.area()).sum()
    }

    /// V − E + F with V the vertex orbits and E one per gluing or wall.
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.cones.len() as i64;
        let walls = self.walls().len() as i64;
        let e = self.gluings.len() as i64 + walls;
        let f = self.polygons.len() as i64;
        v - e + f
    }

    /// |Σ interior (2π − θ) + Σ boundary (π − θ) − 2πχ| with float angles.
    pub fn gauss_bonnet_residual(&self) -> f64 {
        let mut total = 0.0;
        for c in &self.cones {
            if c.boundary {
                total += PI - c.angle;
            } else {
                total += TAU - c.angle;
            }
        }
        (total - TAU * self.euler_characteristic() as f64).abs()
    }

    /// Two-colorability of the polygon graph with reflect gluings flipping
    /// the color: exactly when every chart can be oriented consistently.
    pub fn is_orientable(&self) -> bool {
        let n = self.polygons.len();
        let mut color: Vec<Option<bool>> = vec![None; n];
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(true);
            let mut stack = vec![start];
            while let Some(p) = stack.pop() {
                let cp = color[p].unwrap();
                for e in 0..self.polygons[p].len() {
                    if let Some((gi, is_a)) = self.edge_table[p][e] {
                        let g = &self.gluings[gi];
                        let q = g.side(!is_a).polygon;
                        let cq = if g.part.reflect { !cp } else { cp };
                        match color[q] {
                            None => {
                                color[q] = Some(cq);
                                stack.push(q);
                            }
                            Some(existing) => {
                                if existing != cq {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// Number of connected components of the polygon gluing graph.
    pub fn component_count(&self) -> usize {
        let n = self.polygons.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(p) = stack.pop() {
                for e in 0..self.polygons[p].len() {
                    if let Some((gi, is_a)) = self.edge_table[p][e] {
                        let q = self.gluings[gi].side(!is_a).polygon;
                        if !seen[q] {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        count
    }

    /// Chart map across gluing `gi`: a-chart to b-chart when `forward`,
    /// the inverse otherwise.
    pub fn gluing_isometry(&self, gi: usize, forward: bool) -> Isometry {
        let g = &self.gluings[gi];
        let (a0, a1) = self.polygons[g.a.polygon].edge(g.a.edge);
        let (b0, b1) = self.polygons[g.b.polygon].edge(g.b.edge);
        let lin = g.part.matrix();
        let target = if g.part.reflect { b0 } else { b1 };
        let iso = lin.with_translation(target - lin.apply(a0));
        debug_assert!({
            let far = if g.part.reflect { b1 } else { b0 };
            iso.apply(a1).dist(far) < 1e-6 * (1.0 + a1.norm())
        });
        if forward {
            iso
        } else {
            iso.inverse()
        }
    }

    /// Maps an edge parameter across a gluing without accumulating float
    /// error: point at fraction s along the source edge lands at the
    /// returned fraction along the target edge.
    pub fn cross_param(&self, gi: usize, from_a: bool, s: f64) -> (EdgeRef, f64) {
        let g = &self.gluings[gi];
        let far = g.side(!from_a);
        let s2 = if g.part.reflect { s } else { 1.0 - s };
        (far, s2)
    }
}

/// Walk direction through a wedge fan, in the local chart sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WalkDir {
    Ccw,
    Cw,
}

/// Outcome of one step: either a wall stops the walk or it crosses a gluing.
enum Step {
    Wall,
    Cross {
        crossing: Crossing,
        corner: Corner,
        dir: WalkDir,
        transport: OrthogonalPart,
    },
}

fn walk_step(
    polygons: &[Polygon],
    gluings: &[Gluing],
    edge_table: &[Vec<Option<(usize, bool)>>],
    corner: Corner,
    dir: WalkDir,
) -> Step {
    let n = polygons[corner.polygon].len();
    // Ccw leaves across the edge ending at this vertex, Cw across the edge
    // starting here.
    let (edge, at_end) = match dir {
        WalkDir::Ccw => ((corner.vertex + n - 1) % n, true),
        WalkDir::Cw => (corner.vertex, false),
    };
    let Some((gi, from_a)) = edge_table[corner.polygon][edge] else {
        return Step::Wall;
    };
    let g = &gluings[gi];
    let far = g.side(!from_a);
    let m = polygons[far.polygon].len();
    // Endpoint images under the gluing convention: without reflection ends
    // map to starts and vice versa; with reflection ends map to ends.
    let far_vertex = match (at_end, g.part.reflect) {
        (true, false) => far.edge,
        (true, true) => (far.edge + 1) % m,
        (false, false) => (far.edge + 1) % m,
        (false, true) => far.edge,
    };
    let next_dir = match (dir, g.part.reflect) {
        (d, false) => d,
        (WalkDir::Ccw, true) => WalkDir::Cw,
        (WalkDir::Cw, true) => WalkDir::Ccw,
    };
    let transport = if from_a { g.part } else { g.part.inverse() };
    Step::Cross {
        crossing: Crossing { gluing: gi, from_a },
        corner: Corner {
            polygon: far.polygon,
            vertex: far_vertex,
        },
        dir: next_dir,
        transport,
    }
}

fn walk_all_corners(
    polygons: &[Polygon],
    gluings: &[Gluing],
    edge_table: &[Vec<Option<(usize, bool)>>],
    tol: &Tolerances,
) -> Result<Vec<ConePoint>, SurfaceError> {
    let total: usize = polygons.iter().map(|p| p.len()).sum();
    let mut visited: Vec<Vec<bool>> = polygons.iter().map(|p| vec![false; p.len()]).collect();
    let mut cones = Vec::new();

    for pi in 0..polygons.len() {
        for vi in 0..polygons[pi].len() {
            if visited[pi][vi] {
                continue;
            }
            let seed = Corner {
                polygon: pi,
                vertex: vi,
            };
            let mut corners = vec![seed];
            let mut crossings = Vec::new();
            let mut transports = Vec::new();
            let mut state = (seed, WalkDir::Ccw);
            let mut closed = false;
            loop {
                match walk_step(polygons, gluings, edge_table, state.0, state.1) {
                    Step::Wall => break,
                    Step::Cross {
                        crossing,
                        corner,
                        dir,
                        transport,
                    } => {
                        crossings.push(crossing);
                        transports.push(transport);
                        if corner == seed {
                            assert!(
                                dir == WalkDir::Ccw,
                                "corner walk closed with flipped orientation"
                            );
                            closed = true;
                            break;
                        }
                        assert!(corners.len() <= total, "corner walk failed to terminate");
                        corners.push(corner);
                        state = (corner, dir);
                    }
                }
            }
            if !closed {
                // Boundary orbit: collect the clockwise half and stitch the
                // pieces in counterclockwise order.
                let mut back_corners = Vec::new();
                let mut back_crossings = Vec::new();
                let mut state = (seed, WalkDir::Cw);
                loop {
                    match walk_step(polygons, gluings, edge_table, state.0, state.1) {
                        Step::Wall => break,
                        Step::Cross {
                            crossing,
                            corner,
                            dir,
                            ..
                        } => {
                            back_crossings.push(Crossing {
                                gluing: crossing.gluing,
                                from_a: !crossing.from_a,
                            });
                            assert!(
                                back_corners.len() <= total,
                                "corner walk failed to terminate"
                            );
                            back_corners.push(corner);
                            state = (corner, dir);
                        }
                    }
                }
                back_corners.reverse();
                back_crossings.reverse();
                back_corners.extend(corners);
                back_crossings.extend(crossings);
                corners = back_corners;
                crossings = back_crossings;
                transports.clear();
            }

            let mut angle = 0.0;
            for c in &corners {
                visited[c.polygon][c.vertex] = true;
                angle += polygons[c.polygon].interior_angle(c.vertex);
            }

            let corner_label = format!("{}:{}", polygons[seed.polygon].id, seed.vertex);
            let (exact, transport) = if closed {
                let mut t = OrthogonalPart::IDENTITY;
                for &l in &transports {
                    t = l.compose(t);
                }
                assert!(!t.reflect, "interior corner walk has odd reflection parity");
                let frac = t.inverse().turn;
                let m = (angle / TAU - frac.value()).round() as i64;
                let num = m * frac.denominator() + frac.numerator();
                let exact = ExactAngle {
                    num,
                    den: frac.denominator(),
                };
                let residual = (angle - exact.radians()).abs();
                if num < 1 || residual > tol.eps_cone {
                    return Err(SurfaceError::ConeSnapFailure {
                        corner: corner_label,
                        residual,
                    });
                }
                (Some(exact), Some(t))
            } else {
                // Wall corner: the angle need not be π-rational; record the
                // exact value only when it snaps cleanly.
                let (p, q, err) = snap_ratio(angle / PI, tol.q_max);
                let exact = if p >= 1 && err * PI <= tol.eps_cone {
                    let g = gcd_i64(p, 2 * q);
                    Some(ExactAngle {
                        num: p / g,
                        den: 2 * q / g,
                    })
                } else {
                    None
                };
                (exact, None)
            };

            cones.push(ConePoint {
                corners,
                crossings,
                boundary: !closed,
                angle,
                exact,
                transport,
            });
        }
    }
    Ok(cones)
}

fn gcd_i64(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::v;

    fn unit_square(id: &str) -> Polygon {
        Polygon::new(id, vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)])
    }

    fn gluing(a: (usize, usize), b: (usize, usize), turn: RationalTurn, reflect: bool) -> Gluing {
        Gluing {
            a: EdgeRef {
                polygon: a.0,
                edge: a.1,
            },
            b: EdgeRef {
                polygon: b.0,
                edge: b.1,
            },
            part: if reflect {
                OrthogonalPart::reflection(turn)
            } else {
                OrthogonalPart::rotation(turn)
            },
        }
    }

    fn torus() -> FlatSurface {
        // Opposite sides identified by translations.
        let g = vec![
            gluing((0, 0), (0, 2), RationalTurn::ZERO, false),
            gluing((0, 1), (0, 3), RationalTurn::ZERO, false),
        ];
        FlatSurface::new(vec![unit_square("sq")], g, Tolerances::default()).unwrap()
    }

    #[test]
    fn torus_has_one_regular_interior_orbit() {
        let s = torus();
        assert_eq!(s.cone_points().len(), 1);
        let c = &s.cone_points()[0];
        assert!(!c.boundary);
        assert_eq!(c.corners.len(), 4);
        assert_eq!(c.exact, Some(ExactAngle { num: 1, den: 1 }));
        assert!((c.angle - TAU).abs() < 1e-12);
        assert!(!c.is_singular());
        assert_eq!(s.euler_characteristic(), 0);
        assert!(s.gauss_bonnet_residual() < 1e-12);
        assert!(s.is_orientable());
        assert!(!s.has_boundary());
        assert!((s.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_table_has_four_right_angle_wall_corners() {
        let s = FlatSurface::new(vec![unit_square("sq")], vec![], Tolerances::default()).unwrap();
        assert_eq!(s.cone_points().len(), 4);
        for c in s.cone_points() {
            assert!(c.boundary);
            assert_eq!(c.exact, Some(ExactAngle { num: 1, den: 4 }));
            assert!(c.is_singular());
        }
        assert_eq!(s.euler_characteristic(), 1);
        assert!(s.gauss_bonnet_residual() < 1e-12);
        assert!(s.has_boundary());
    }

    #[test]
    fn quarter_turn_self_gluing() {
        // Edge 3 onto edge 0 is a rotation by −π/2, turn 3/4. Vertex 0
        // becomes an interior cone point of angle π/2.
        let g = vec![gluing((0, 3), (0, 0), RationalTurn::new(3, 4), false)];
        let s = FlatSurface::new(vec![unit_square("sq")], g, Tolerances::default()).unwrap();
        assert_eq!(s.cone_points().len(), 3);
        let interior: Vec<_> = s.cone_points().iter().filter(|c| !c.boundary).collect();
        assert_eq!(interior.len(), 1);
        let c = interior[0];
        assert_eq!(
            c.corners,
            vec![Corner {
                polygon: 0,
                vertex: 0
            }]
        );
        assert_eq!(c.exact, Some(ExactAngle { num: 1, den: 4 }));
        assert_eq!(c.rotation_order(), Some(4));
        // Two-corner wall orbit of total angle π is a regular boundary point.
        let flat_wall = s
            .cone_points()
            .iter()
            .find(|c| c.boundary && c.corners.len() == 2)
            .unwrap();
        assert_eq!(flat_wall.exact, Some(ExactAngle { num: 1, den: 2 }));
        assert!(!flat_wall.is_singular());
        assert_eq!(s.euler_characteristic(), 1);
        assert!(s.gauss_bonnet_residual() < 1e-12);
    }

    #[test]
    fn pillowcase_from_two_squares() {
        // Mirror-image gluing of two identical squares along all four edges.
        let turns = [0, 1, 0, 1];
        let g: Vec<Gluing> = (0..4)
            .map(|e| gluing((0, e), (1, e), RationalTurn::new(turns[e], 2), true))
            .collect();
        let s = FlatSurface::new(
            vec![unit_square("front"), unit_square("back")],
            g,
            Tolerances::default(),
        )
        .unwrap();
        assert_eq!(s.cone_points().len(), 4);
        for c in s.cone_points() {
            assert!(!c.boundary);
            assert_eq!(c.corners.len(), 2);
            assert_eq!(c.exact, Some(ExactAngle { num: 1, den: 2 }));
            assert_eq!(c.rotation_order(), Some(2));
            assert!(c.is_singular());
        }
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.gauss_bonnet_residual() < 1e-12);
        assert!(s.is_orientable());
        assert!((s.area() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn klein_bottle_is_nonorientable() {
        let g = vec![
            gluing((0, 0), (0, 2), RationalTurn::ZERO, false),
            gluing((0, 1), (0, 3), RationalTurn::ZERO, true),
        ];
        let s = FlatSurface::new(vec![unit_square("sq")], g, Tolerances::default()).unwrap();
        assert!(!s.is_orientable());
        assert_eq!(s.euler_characteristic(), 0);
        assert_eq!(s.cone_points().len(), 1);
        assert!(!s.cone_points()[0].is_singular());
    }

    #[test]
    fn wall_angles_may_be_irrational() {
        // Right triangle with one angle of exactly 1 radian: validates, but
        // the irrational corners carry no exact angle.
        let p = Polygon::new("tri", vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0_f64.tan())]);
        let s = FlatSurface::new(vec![p], vec![], Tolerances::default()).unwrap();
        assert_eq!(s.cone_points().len(), 3);
        let with_exact: Vec<_> = s
            .cone_points()
            .iter()
            .filter(|c| c.exact.is_some())
            .collect();
        // Only the right angle snaps; 1 rad and π/2 − 1 rad do not.
        assert_eq!(with_exact.len(), 1);
        assert_eq!(with_exact[0].exact, Some(ExactAngle { num: 1, den: 4 }));
        assert!(s.gauss_bonnet_residual() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_input() {
        let e = FlatSurface::new(
            vec![unit_square("a"), unit_square("a")],
            vec![],
            Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(e, SurfaceError::DuplicatePolygonId { .. }));

        let cw = Polygon::new("cw", vec![v(0.0, 0.0), v(0.0, 1.0), v(1.0, 0.0)]);
        let e = FlatSurface::new(vec![cw], vec![], Tolerances::default()).unwrap_err();
        assert!(matches!(e, SurfaceError::NonConvexPolygon { .. }));

        let e = FlatSurface::new(
            vec![unit_square("sq")],
            vec![gluing((0, 0), (0, 4), RationalTurn::ZERO, false)],
            Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(e, SurfaceError::DanglingEdgeRef { .. }));

        let e = FlatSurface::new(
            vec![unit_square("sq")],
            vec![
                gluing((0, 0), (0, 2), RationalTurn::ZERO, false),
                gluing((0, 2), (0, 3), RationalTurn::new(3, 4), false),
            ],
            Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(e, SurfaceError::EdgeReused { .. }));

        let wide = Polygon::new(
            "wide",
            vec![v(0.0, 0.0), v(2.0, 0.0), v(2.0, 1.0), v(0.0, 1.0)],
        );
        let e = FlatSurface::new(
            vec![unit_square("sq"), wide],
            vec![gluing((0, 0), (1, 2), RationalTurn::ZERO, false)],
            Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(e, SurfaceError::EdgeLengthMismatch { .. }));

        let e = FlatSurface::new(
            vec![unit_square("sq")],
            vec![gluing((0, 0), (0, 2), RationalTurn::new(1, 4), false)],
            Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(e, SurfaceError::TurnMismatch { .. }));
    }

    #[test]
    fn gluing_isometry_maps_endpoints() {
        let s = torus();
        // Edge 0 onto edge 2 reversed: (0,0) ↦ (0,1), (1,0) ↦ (1,1).
        let iso = s.gluing_isometry(0, true);
        assert!(iso.apply(v(0.0, 0.0)).dist(v(0.0, 1.0)) < 1e-15);
        assert!(iso.apply(v(1.0, 0.0)).dist(v(1.0, 1.0)) < 1e-15);
        let back = s.gluing_isometry(0, false);
        assert!(back.apply(iso.apply(v(0.3, 0.0))).dist(v(0.3, 0.0)) < 1e-15);
        let (far, s2) = s.cross_param(0, true, 0.25);
        assert_eq!(
            far,
            EdgeRef {
                polygon: 0,
                edge: 2
            }
        );
        assert!((s2 - 0.75).abs() < 1e-15);
    }
}
