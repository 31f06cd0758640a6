//! Straight-line flow: geodesics across gluings and billiards off walls.
//!
//! A flow state is a unit tangent vector in one polygon chart. Tracing
//! advances the state edge event by edge event: each crossing re-anchors the
//! point by its edge parameter on the far side (so position error does not
//! compound through the isometry) and renormalizes the direction. Exits
//! within `delta_vertex` of a polygon vertex abort with `SingularHit`; the
//! flow is undefined through cone points.

use thiserror::Error;

use crate::geom::{reflect_dir, v, Vec2};
use crate::surface::FlatSurface;
use crate::turn::OrthogonalPart;

/// Forward progress below this length counts as no progress at all.
const STALL_STEP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("trajectory hits the singular point at corner {corner} (length {t:.9})")]
    SingularHit { corner: String, t: f64 },
    #[error("flow stalled without forward progress at length {t:.9}")]
    NumericStall { t: f64 },
    #[error("geodesic reached a wall at length {t:.9}; walls require billiard mode")]
    WallEncountered { t: f64 },
    #[error("invalid start state: {reason}")]
    InvalidStart { reason: String },
}

/// Unit tangent vector in a polygon chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub polygon: usize,
    pub point: Vec2,
    pub dir: Vec2,
}

impl FlowState {
    pub fn new(polygon: usize, point: Vec2, dir: Vec2) -> FlowState {
        FlowState {
            polygon,
            point,
            dir,
        }
    }

    pub fn approx_eq(&self, other: &FlowState, tol: f64) -> bool {
        self.polygon == other.polygon
            && self.point.dist(other.point) <= tol
            && self.dir.dist(other.dir) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Left the chart through a glued edge, moving a-side to b-side when
    /// `from_a` holds.
    Crossing { gluing: usize, from_a: bool },
    /// Bounced off a wall edge (billiard mode only).
    Reflection { edge: usize },
}

/// One edge event: the segment in `polygon` ended at `exit_point` at
/// cumulative length `t`, and the flow continued as `after`.
#[derive(Debug, Clone, Copy)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub polygon: usize,
    pub exit_point: Vec2,
    pub t: f64,
    pub after: FlowState,
}

/// Straight segment in one chart.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub polygon: usize,
    pub start: Vec2,
    pub dir: Vec2,
    pub len: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: FlowState,
    pub events: Vec<TraceEvent>,
    pub end: FlowState,
    pub length: f64,
}

impl Trajectory {
    /// The per-chart segments, in order; lengths sum to `length`.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut state = self.start;
        let mut t_prev = 0.0;
        for e in &self.events {
            out.push(Segment {
                polygon: state.polygon,
                start: state.point,
                dir: state.dir,
                len: e.t - t_prev,
            });
            state = e.after;
            t_prev = e.t;
        }
        out.push(Segment {
            polygon: state.polygon,
            start: state.point,
            dir: state.dir,
            len: self.length - t_prev,
        });
        out
    }
}

/// Composite linear part carried forward through every crossing, or None if
/// the trajectory reflected off a wall (wall lines need not have rational
/// direction, so that transport has no exact form).
pub fn parallel_transport(surface: &FlatSurface, traj: &Trajectory) -> Option<OrthogonalPart> {
    let mut acc = OrthogonalPart::IDENTITY;
    for e in &traj.events {
        match e.kind {
            EventKind::Crossing { gluing, from_a } => {
                let g = &surface.gluings[gluing];
                let l = if from_a { g.part } else { g.part.inverse() };
                acc = l.compose(acc);
            }
            EventKind::Reflection { .. } => return None,
        }
    }
    Some(acc)
}

enum Advance {
    Finished(FlowState),
    Event(TraceEvent),
}

fn corner_label(surface: &FlatSurface, polygon: usize, vertex: usize) -> String {
    let n = surface.polygons[polygon].len();
    format!("{}:{}", surface.polygons[polygon].id, vertex % n)
}

fn advance_one(
    surface: &FlatSurface,
    state: FlowState,
    t_now: f64,
    remaining: f64,
    billiard: bool,
) -> Result<Advance, FlowError> {
    let poly = &surface.polygons[state.polygon];
    let n = poly.len();
    let mut best: Option<(f64, usize)> = None;
    for e in 0..n {
        let (a, _) = poly.edge(e);
        let ev = poly.edge_vec(e);
        let normal = v(ev.y, -ev.x);
        let speed = state.dir.dot(normal);
        if speed <= 0.0 {
            continue;
        }
        let t = ((a - state.point).dot(normal) / speed).max(0.0);
        if best.map_or(true, |(bt, _)| t < bt) {
            best = Some((t, e));
        }
    }
    let Some((t_exit, edge)) = best else {
        return Err(FlowError::NumericStall { t: t_now });
    };

    if t_exit >= remaining {
        return Ok(Advance::Finished(FlowState {
            polygon: state.polygon,
            point: state.point + state.dir.scale(remaining),
            dir: state.dir,
        }));
    }
    if t_exit < STALL_STEP {
        return Err(FlowError::NumericStall { t: t_now });
    }

    let exit = state.point + state.dir.scale(t_exit);
    let (e0, e1) = poly.edge(edge);
    let tol = surface.tol;
    if exit.dist(e0) < tol.delta_vertex {
        return Err(FlowError::SingularHit {
            corner: corner_label(surface, state.polygon, edge),
            t: t_now + t_exit,
        });
    }
    if exit.dist(e1) < tol.delta_vertex {
        return Err(FlowError::SingularHit {
            corner: corner_label(surface, state.polygon, edge + 1),
            t: t_now + t_exit,
        });
    }

    let after = match surface.edge_gluing(state.polygon, edge) {
        Some((gi, from_a)) => {
            let ev = e1 - e0;
            let s = (exit - e0).dot(ev) / ev.dot(ev);
            let (far, s2) = surface.cross_param(gi, from_a, s);
            let (f0, f1) = surface.polygons[far.polygon].edge(far.edge);
            let iso = surface.gluing_isometry(gi, from_a);
            FlowState {
                polygon: far.polygon,
                point: f0 + (f1 - f0).scale(s2),
                dir: iso.apply_vec(state.dir).unit(),
            }
        }
        None => {
            if !billiard {
                return Err(FlowError::WallEncountered { t: t_now + t_exit });
            }
            let normal = v(poly.edge_vec(edge).y, -poly.edge_vec(edge).x).unit();
            FlowState {
                polygon: state.polygon,
                point: exit,
                dir: reflect_dir(state.dir, normal).unit(),
            }
        }
    };

    let kind = match surface.edge_gluing(state.polygon, edge) {
        Some((gi, from_a)) => EventKind::Crossing { gluing: gi, from_a },
        None => EventKind::Reflection { edge },
    };
    Ok(Advance::Event(TraceEvent {
        kind,
        polygon: state.polygon,
        exit_point: exit,
        t: t_now + t_exit,
        after,
    }))
}

/// Checks a start state and resolves edge cases: a point on an edge moving
/// outward is pushed through the gluing (or reflected in billiard mode), a
/// point at a vertex is a singular hit, a direction along an edge is invalid.
pub fn normalize_start(
    surface: &FlatSurface,
    state: FlowState,
    billiard: bool,
) -> Result<FlowState, FlowError> {
    if state.polygon >= surface.polygons.len() {
        return Err(FlowError::InvalidStart {
            reason: "polygon index out of range".into(),
        });
    }
    if !state.point.is_finite() || !state.dir.is_finite() || state.dir.norm() == 0.0 {
        return Err(FlowError::InvalidStart {
            reason: "point and direction must be finite and nonzero".into(),
        });
    }
    let state = FlowState {
        dir: state.dir.unit(),
        ..state
    };
    let poly = &surface.polygons[state.polygon];
    let tol = surface.tol;
    if !poly.contains(state.point, tol.delta_vertex) {
        return Err(FlowError::InvalidStart {
            reason: format!("point lies outside polygon {:?}", poly.id),
        });
    }

    let mut on_edges = Vec::new();
    for e in 0..poly.len() {
        let (a, _) = poly.edge(e);
        let ev = poly.edge_vec(e);
        let d = ev.cross(state.point - a) / ev.norm();
        if d.abs() <= tol.delta_vertex {
            on_edges.push(e);
        }
    }
    match on_edges.len() {
        0 => Ok(state),
        1 => {
            let e = on_edges[0];
            let normal = v(poly.edge_vec(e).y, -poly.edge_vec(e).x).unit();
            let out_speed = state.dir.dot(normal);
            if out_speed.abs() < 1e-12 {
                return Err(FlowError::InvalidStart {
                    reason: "direction runs along the starting edge".into(),
                });
            }
            if out_speed < 0.0 {
                return Ok(state);
            }
            let (e0, e1) = poly.edge(e);
            if state.point.dist(e0) < tol.delta_vertex || state.point.dist(e1) < tol.delta_vertex {
                return Err(FlowError::SingularHit {
                    corner: corner_label(surface, state.polygon, e),
                    t: 0.0,
                });
            }
            match surface.edge_gluing(state.polygon, e) {
                Some((gi, from_a)) => {
                    let ev = e1 - e0;
                    let s = (state.point - e0).dot(ev) / ev.dot(ev);
                    let (far, s2) = surface.cross_param(gi, from_a, s);
                    let (f0, f1) = surface.polygons[far.polygon].edge(far.edge);
                    let iso = surface.gluing_isometry(gi, from_a);
                    Ok(FlowState {
                        polygon: far.polygon,
                        point: f0 + (f1 - f0).scale(s2),
                        dir: iso.apply_vec(state.dir).unit(),
                    })
                }
                None => {
                    if billiard {
                        Ok(FlowState {
                            dir: reflect_dir(state.dir, normal).unit(),
                            ..state
                        })
                    } else {
                        Err(FlowError::WallEncountered { t: 0.0 })
                    }
                }
            }
        }
        _ => Err(FlowError::SingularHit {
            corner: corner_label(surface, state.polygon, nearest_vertex(poly, state.point)),
            t: 0.0,
        }),
    }
}

fn nearest_vertex(poly: &crate::surface::Polygon, p: Vec2) -> usize {
    (0..poly.len())
        .min_by(|&i, &j| {
            p.dist(poly.vertex(i))
                .partial_cmp(&p.dist(poly.vertex(j)))
                .unwrap()
        })
        .unwrap()
}

fn trace(
    surface: &FlatSurface,
    start: FlowState,
    length: f64,
    billiard: bool,
) -> Result<Trajectory, FlowError> {
    if !(length.is_finite() && length >= 0.0) {
        return Err(FlowError::InvalidStart {
            reason: "length must be finite and nonnegative".into(),
        });
    }
    let start = normalize_start(surface, start, billiard)?;
    let mut events = Vec::new();
    let mut state = start;
    let mut t = 0.0;
    loop {
        match advance_one(surface, state, t, length - t, billiard)? {
            Advance::Finished(end) => {
                return Ok(Trajectory {
                    start,
                    events,
                    end,
                    length,
                });
            }
            Advance::Event(ev) => {
                t = ev.t;
                state = ev.after;
                events.push(ev);
            }
        }
    }
}

/// Straight-line flow; walls are an error.
pub fn trace_geodesic(
    surface: &FlatSurface,
    start: FlowState,
    length: f64,
) -> Result<Trajectory, FlowError> {
    trace(surface, start, length, false)
}

/// Straight-line flow with specular reflection at walls.
pub fn trace_billiard(
    surface: &FlatSurface,
    start: FlowState,
    length: f64,
) -> Result<Trajectory, FlowError> {
    trace(surface, start, length, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{EdgeRef, Gluing, Polygon, Tolerances};
    use crate::turn::RationalTurn;

    fn unit_square(id: &str) -> Polygon {
        Polygon::new(id, vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)])
    }

    fn torus() -> FlatSurface {
        let g = |a: usize, b: usize| Gluing {
            a: EdgeRef {
                polygon: 0,
                edge: a,
            },
            b: EdgeRef {
                polygon: 0,
                edge: b,
            },
            part: OrthogonalPart::rotation(RationalTurn::ZERO),
        };
        FlatSurface::new(
            vec![unit_square("sq")],
            vec![g(0, 2), g(1, 3)],
            Tolerances::default(),
        )
        .unwrap()
    }

    fn table() -> FlatSurface {
        FlatSurface::new(vec![unit_square("sq")], vec![], Tolerances::default()).unwrap()
    }

    #[test]
    fn torus_slope_two_geodesic() {
        let s = torus();
        let len = 5.0_f64.sqrt() * 1.3;
        let start = FlowState::new(0, v(0.1, 0.3), v(1.0, 2.0));
        let traj = trace_geodesic(&s, start, len).unwrap();
        assert_eq!(traj.events.len(), 3);
        assert!(traj.end.point.dist(v(0.4, 0.9)) < 1e-12);
        let segs = traj.segments();
        assert_eq!(segs.len(), 4);
        let total: f64 = segs.iter().map(|sg| sg.len).sum();
        assert!((total - len).abs() < 1e-12);
        // Translations only: transport stays trivial.
        assert!(parallel_transport(&s, &traj).unwrap().is_identity());
    }

    #[test]
    fn square_billiard_reflects() {
        let s = table();
        let start = FlowState::new(0, v(0.25, 0.25), v(2.0, 1.0));
        let traj = trace_billiard(&s, start, 2.0).unwrap();
        assert!(matches!(
            traj.events[0].kind,
            EventKind::Reflection { edge: 1 }
        ));
        assert!(traj.events[0].exit_point.dist(v(1.0, 0.625)) < 1e-12);
        assert!(matches!(
            traj.events[1].kind,
            EventKind::Reflection { edge: 2 }
        ));
        assert!(traj.events[1].exit_point.dist(v(0.25, 1.0)) < 1e-12);
        assert!(parallel_transport(&s, &traj).is_none());
    }

    #[test]
    fn geodesic_refuses_walls_and_corners() {
        let s = table();
        let e = trace_geodesic(&s, FlowState::new(0, v(0.5, 0.5), v(1.0, 0.0)), 2.0).unwrap_err();
        assert!(matches!(e, FlowError::WallEncountered { .. }));

        let e = trace_billiard(&s, FlowState::new(0, v(0.5, 0.5), v(1.0, 1.0)), 2.0).unwrap_err();
        assert!(matches!(e, FlowError::SingularHit { .. }));

        let e = trace_billiard(&s, FlowState::new(0, v(1.0, 1.0), v(-1.0, -0.5)), 2.0).unwrap_err();
        assert!(matches!(e, FlowError::SingularHit { t, .. } if t == 0.0));
    }

    #[test]
    fn start_on_edge_resolves() {
        let s = torus();
        // Outward through the right edge: re-enters on the left.
        let st = normalize_start(&s, FlowState::new(0, v(1.0, 0.5), v(1.0, 0.0)), false).unwrap();
        assert!(st.point.dist(v(0.0, 0.5)) < 1e-12);
        // Inward: kept as is.
        let st = normalize_start(&s, FlowState::new(0, v(1.0, 0.5), v(-1.0, 0.1)), false).unwrap();
        assert!(st.point.dist(v(1.0, 0.5)) < 1e-12);
        // Along the edge: invalid.
        let e =
            normalize_start(&s, FlowState::new(0, v(1.0, 0.5), v(0.0, 1.0)), false).unwrap_err();
        assert!(matches!(e, FlowError::InvalidStart { .. }));
        // On a table wall in billiard mode: reflected.
        let t = table();
        let st = normalize_start(&t, FlowState::new(0, v(1.0, 0.5), v(1.0, 0.5)), true).unwrap();
        assert!(st.dir.x < 0.0);
    }

    #[test]
    fn reversing_returns_to_start() {
        let s = torus();
        let start = FlowState::new(0, v(0.17, 0.42), Vec2::from_angle(0.83));
        let out = trace_geodesic(&s, start, 7.3).unwrap();
        let back_start = FlowState {
            dir: -out.end.dir,
            ..out.end
        };
        let back = trace_geodesic(&s, back_start, 7.3).unwrap();
        assert_eq!(back.events.len(), out.events.len());
        assert!(back.end.point.dist(start.point) < 1e-9);
        assert!(back.end.dir.dist(-start.dir) < 1e-9);
    }
}
