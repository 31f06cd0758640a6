//! Branched and unbranched covers between flat surfaces.
//!
//! Three constructions are provided. `double` folds a bordered surface: two
//! copies of every polygon, glued to each other along every wall, so that
//! geodesics which would have left through a wall continue on the mirror
//! copy. `orientation_double` is the classical two-sheet cover of a
//! non-orientable surface, with the second sheet carrying reflected charts
//! so that every transition of the cover preserves orientation.
//! `very_flat_cover` takes an orientable closed surface whose rotation
//! holonomy is cyclic of order N and builds the N-sheet cover on which all
//! gluing rotations cancel; the result is a translation surface.
//!
//! Chart conventions. The mirror copies of `double` reuse the original
//! charts up to a per-polygon rotation, so the fold gluings reflect and the
//! wall directions must be rational multiples of π. The reflected sheets of
//! `orientation_double` use charts mirrored across the x axis with the
//! vertex order reversed, which keeps every polygon counterclockwise; edge
//! e of the original corresponds to edge n-1-e of the mirrored chart.
//!
//! A `CoverMap` stores the projection: one `Sheet` per total polygon with
//! the isometry back to its base chart, the deck action on sheets, the
//! branch points downstairs, and the ramification index at every total
//! cone orbit. It can lift and project flow states and whole trajectories;
//! projecting across a fold gluing turns the crossing into a billiard
//! reflection on the base.

use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::flow::{EventKind, FlowState, TraceEvent, Trajectory};
use crate::format::fmt_float;
use crate::geom::{Isometry, Vec2};
use crate::holonomy::{develop, holonomy_group, HolonomyError};
use crate::rng::{uniform_point, Rng};
use crate::surface::{Corner, EdgeRef, FlatSurface, Gluing, Polygon, SurfaceError};
use crate::turn::{snap_unit_fraction, OrthogonalPart, RationalTurn};

use std::f64::consts::{PI, TAU};

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("surface has no walls to fold along")]
    NoBoundary,
    #[error("surface is already orientable")]
    AlreadyOrientable,
    #[error("surface is not orientable")]
    NotOrientable,
    #[error("surface has walls; fold it with double first")]
    HasBoundary,
    #[error(
        "gluing angle at {polygon}[{edge}] is not a rational multiple of pi (ratio {ratio:.12})"
    )]
    WallAngleNotRational {
        polygon: String,
        edge: usize,
        ratio: f64,
    },
    #[error("sheet {sheet} out of range for a degree {degree} cover")]
    InvalidSheet { sheet: usize, degree: usize },
    #[error("state lies at a branch point; it has no single lift")]
    BranchPointLift,
    #[error("state lies at a singular point; it has no projection")]
    SingularProject,
    #[error("trajectory passes through a ramification point at length {t:.9}")]
    RamificationHit { t: f64 },
    #[error("cover document does not match the surfaces: {0}")]
    SidecarMismatch(String),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error("constructed cover failed validation: {0}")]
    Construction(#[from] SurfaceError),
}

/// Provenance of one total gluing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GluingOrigin {
    /// Lifted from a base gluing; `swapped` marks that the total a side
    /// projects onto the base b side.
    Interior { gluing: usize, swapped: bool },
    /// Fold seam along a base wall.
    Fold { polygon: usize, edge: usize },
}

/// One total polygon: which base polygon it covers, its deck label, and the
/// chart isometry down to the base, stored in decomposed form so the
/// document round-trips byte for byte.
#[derive(Debug, Clone, Copy)]
pub struct Sheet {
    pub base_polygon: usize,
    pub deck: usize,
    pub angle: f64,
    pub reflect: bool,
    pub translate: Vec2,
}

impl Sheet {
    /// Chart map from the total polygon to its base polygon.
    pub fn to_base(&self) -> Isometry {
        let lin = if self.reflect {
            Isometry::reflection(self.angle)
        } else {
            Isometry::rotation(self.angle)
        };
        lin.with_translation(self.translate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeckKind {
    /// Two sheets exchanged by an involution (doubles).
    Flip,
    /// Sheets indexed by a cyclic rotation group.
    Cyclic,
}

/// Ramification record for one total cone orbit: the total angle is `index`
/// times the base angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ramification {
    pub total_cone: usize,
    pub base_cone: usize,
    pub index: i64,
}

/// A flat covering map, bundled with both surfaces.
#[derive(Debug, Clone)]
pub struct CoverMap {
    pub base: FlatSurface,
    pub total: FlatSurface,
    pub degree: usize,
    pub deck_kind: DeckKind,
    /// One entry per total polygon.
    pub sheets: Vec<Sheet>,
    /// `deck_action[j][p]` is the image of total polygon p under deck
    /// element j; element 0 is the identity.
    pub deck_action: Vec<Vec<usize>>,
    /// Rotation of deck element j, for cyclic decks.
    pub deck_turns: Option<Vec<RationalTurn>>,
    /// Base cone orbits over which the cover branches.
    pub branch: Vec<usize>,
    /// One entry per total cone orbit.
    pub ramification: Vec<Ramification>,
    /// One entry per total gluing.
    pub origins: Vec<GluingOrigin>,
}

impl CoverMap {
    /// All total polygons lying over a base polygon.
    pub fn fiber(&self, base_polygon: usize) -> Vec<usize> {
        (0..self.sheets.len())
            .filter(|&p| self.sheets[p].base_polygon == base_polygon)
            .collect()
    }

    /// The total polygon over `base_polygon` on the given sheet.
    pub fn sheet_polygon(&self, base_polygon: usize, deck: usize) -> Option<usize> {
        self.sheets
            .iter()
            .position(|s| s.base_polygon == base_polygon && s.deck == deck)
    }

    /// Base corner under a total corner, undoing the vertex reversal of
    /// reflected sheets.
    pub fn base_corner(&self, corner: Corner) -> Corner {
        let sheet = &self.sheets[corner.polygon];
        let n = self.base.polygons[sheet.base_polygon].len();
        let vertex = if sheet.reflect {
            (n - corner.vertex) % n
        } else {
            corner.vertex
        };
        Corner {
            polygon: sheet.base_polygon,
            vertex,
        }
    }
}

/// Snaps an angle in radians to a rational turn, or reports the offending
/// edge when no fraction with denominator ≤ q_max is close enough.
fn snap_angle(
    angle: f64,
    surface: &FlatSurface,
    site: EdgeRef,
) -> Result<RationalTurn, CoverError> {
    let snap = snap_unit_fraction(angle / TAU, surface.tol.q_max);
    if TAU * snap.best_err <= surface.tol.eps_ang {
        Ok(snap.best)
    } else {
        Err(CoverError::WallAngleNotRational {
            polygon: surface.polygons[site.polygon].id.clone(),
            edge: site.edge,
            ratio: angle / PI,
        })
    }
}

/// Chart rotations for the mirror copies of `double`: polygons with walls
/// anchor their first wall direction, wall-less polygons copy a neighbour
/// so the interior adjustment vanishes.
fn mirror_rotations(base: &FlatSurface) -> Vec<f64> {
    let n = base.polygons.len();
    let mut rho: Vec<Option<f64>> = vec![None; n];
    let mut queue = Vec::new();
    for p in 0..n {
        if let Some(e) = (0..base.polygons[p].len()).find(|&e| base.is_wall(p, e)) {
            rho[p] = Some(-2.0 * base.polygons[p].edge_vec(e).angle());
            queue.push(p);
        }
    }
    while let Some(p) = queue.pop() {
        let rp = rho[p].unwrap();
        for g in &base.gluings {
            let (pa, pb) = (g.a.polygon, g.b.polygon);
            let q = if pa == p {
                pb
            } else if pb == p {
                pa
            } else {
                continue;
            };
            if rho[q].is_none() {
                rho[q] = Some(if g.part.reflect { -rp } else { rp });
                queue.push(q);
            }
        }
    }
    rho.into_iter().map(|r| r.unwrap_or(0.0)).collect()
}

/// Branch and ramification data read off the constructed total surface:
/// every total cone orbit gets the ratio of its angle to the base angle.
fn ramification_data(
    base: &FlatSurface,
    total: &FlatSurface,
    sheets: &[Sheet],
) -> (Vec<usize>, Vec<Ramification>) {
    let mut branch = Vec::new();
    let mut ramification = Vec::new();
    for (tc, cone) in total.cone_points().iter().enumerate() {
        let corner = cone.corners[0];
        let sheet = &sheets[corner.polygon];
        let n = base.polygons[sheet.base_polygon].len();
        let vertex = if sheet.reflect {
            (n - corner.vertex) % n
        } else {
            corner.vertex
        };
        let bc = cone_containing(
            base,
            Corner {
                polygon: sheet.base_polygon,
                vertex,
            },
        )
        .expect("total corner lies over a base corner");
        let theta_base = base.cone_points()[bc].angle;
        let index = (cone.angle / theta_base).round() as i64;
        ramification.push(Ramification {
            total_cone: tc,
            base_cone: bc,
            index,
        });
        if index > 1 && base.cone_points()[bc].is_singular() && !branch.contains(&bc) {
            branch.push(bc);
        }
    }
    branch.sort_unstable();
    (branch, ramification)
}

fn cone_containing(surface: &FlatSurface, corner: Corner) -> Option<usize> {
    surface
        .cone_points()
        .iter()
        .position(|c| c.corners.contains(&corner))
}

fn deck_action_from_sheets(sheets: &[Sheet], degree: usize) -> Option<Vec<Vec<usize>>> {
    let mut action = Vec::with_capacity(degree);
    for j in 0..degree {
        let mut row = Vec::with_capacity(sheets.len());
        for s in sheets {
            let target = (s.deck + j) % degree;
            let image = sheets
                .iter()
                .position(|t| t.base_polygon == s.base_polygon && t.deck == target)?;
            row.push(image);
        }
        action.push(row);
    }
    Some(action)
}

fn decompose(iso: &Isometry) -> (f64, bool, Vec2) {
    let reflect = iso.det() < 0.0;
    let angle = if reflect {
        iso.m[0][1].atan2(iso.m[0][0])
    } else {
        iso.m[1][0].atan2(iso.m[0][0])
    };
    (angle, reflect, iso.t)
}

fn sheet_from_iso(base_polygon: usize, deck: usize, to_base: &Isometry) -> Sheet {
    let (angle, reflect, translate) = decompose(to_base);
    Sheet {
        base_polygon,
        deck,
        angle,
        reflect,
        translate,
    }
}

/// Folds a bordered surface: the total carries two copies of every polygon,
/// the mirror copy rotated in its chart, glued to each other by a
/// reflection along every wall. Boundary vertices of angle β become cone
/// points of angle 2β.
pub fn double(base: &FlatSurface) -> Result<CoverMap, CoverError> {
    let walls = base.walls();
    if walls.is_empty() {
        return Err(CoverError::NoBoundary);
    }
    let n = base.polygons.len();
    let rho = mirror_rotations(base);

    let mut polygons = base.polygons.clone();
    for (p, poly) in base.polygons.iter().enumerate() {
        let pivot = poly.vertex(0);
        let lin = Isometry::rotation(rho[p]);
        let iso = lin.with_translation(pivot - lin.apply(pivot));
        let vertices = (0..poly.len()).map(|i| iso.apply(poly.vertex(i))).collect();
        polygons.push(Polygon::new(format!("{}~", poly.id), vertices));
    }

    let mut gluings = Vec::new();
    let mut origins = Vec::new();
    for (gi, g) in base.gluings.iter().enumerate() {
        gluings.push(*g);
        origins.push(GluingOrigin::Interior {
            gluing: gi,
            swapped: false,
        });
    }
    for (gi, g) in base.gluings.iter().enumerate() {
        let (pa, pb) = (g.a.polygon, g.b.polygon);
        let adjust = if g.part.reflect {
            rho[pa] + rho[pb]
        } else {
            rho[pb] - rho[pa]
        };
        let site = EdgeRef {
            polygon: n + pa,
            edge: g.a.edge,
        };
        let turn = g.part.turn.add(snap_angle(adjust, base, g.a)?);
        let part = if g.part.reflect {
            OrthogonalPart::reflection(turn)
        } else {
            OrthogonalPart::rotation(turn)
        };
        gluings.push(Gluing {
            a: site,
            b: EdgeRef {
                polygon: n + pb,
                edge: g.b.edge,
            },
            part,
        });
        origins.push(GluingOrigin::Interior {
            gluing: gi,
            swapped: false,
        });
    }
    for w in &walls {
        let phi = base.polygons[w.polygon].edge_vec(w.edge).angle();
        let turn = snap_angle(2.0 * phi + rho[w.polygon], base, *w)?;
        gluings.push(Gluing {
            a: *w,
            b: EdgeRef {
                polygon: n + w.polygon,
                edge: w.edge,
            },
            part: OrthogonalPart::reflection(turn),
        });
        origins.push(GluingOrigin::Fold {
            polygon: w.polygon,
            edge: w.edge,
        });
    }

    let total = FlatSurface::new(polygons, gluings, base.tol)?;

    let mut sheets = Vec::with_capacity(2 * n);
    for p in 0..n {
        sheets.push(sheet_from_iso(p, 0, &Isometry::IDENTITY));
    }
    for p in 0..n {
        let pivot = base.polygons[p].vertex(0);
        let lin = Isometry::rotation(-rho[p]);
        let iso = lin.with_translation(pivot - lin.apply(pivot));
        sheets.push(sheet_from_iso(p, 1, &iso));
    }

    let deck_action = deck_action_from_sheets(&sheets, 2).expect("two full sheets");
    let (branch, ramification) = ramification_data(base, &total, &sheets);
    Ok(CoverMap {
        base: base.clone(),
        total,
        degree: 2,
        deck_kind: DeckKind::Flip,
        sheets,
        deck_action,
        deck_turns: None,
        branch,
        ramification,
        origins,
    })
}

/// Mirrors a polygon across the x axis, reversing the vertex order to keep
/// it counterclockwise. Edge e corresponds to edge n-1-e of the original.
fn flipped_polygon(poly: &Polygon, id: String) -> Polygon {
    let n = poly.len();
    let vertices = (0..n)
        .map(|j| {
            let w = poly.vertex((n - j) % n);
            Vec2 { x: w.x, y: -w.y }
        })
        .collect();
    Polygon::new(id, vertices)
}

fn flip_edge(n: usize, e: usize) -> usize {
    n - 1 - e
}

/// Two-sheet orientation cover of a closed non-orientable surface. The
/// reflected sheets turn every orientation-reversing gluing into a rotation
/// between opposite sheets, so the total is orientable and the projection
/// is an unbranched local isometry.
pub fn orientation_double(base: &FlatSurface) -> Result<CoverMap, CoverError> {
    if base.has_boundary() {
        return Err(CoverError::HasBoundary);
    }
    if base.is_orientable() {
        return Err(CoverError::AlreadyOrientable);
    }
    let n = base.polygons.len();

    let mut polygons = Vec::with_capacity(2 * n);
    for poly in &base.polygons {
        polygons.push(Polygon::new(format!("{}+", poly.id), poly.vertices.clone()));
    }
    for poly in &base.polygons {
        polygons.push(flipped_polygon(poly, format!("{}-", poly.id)));
    }

    let mut gluings = Vec::new();
    let mut origins = Vec::new();
    for (gi, g) in base.gluings.iter().enumerate() {
        let (pa, pb) = (g.a.polygon, g.b.polygon);
        let (na, nb) = (base.polygons[pa].len(), base.polygons[pb].len());
        let t = g.part.turn;
        let a_minus = EdgeRef {
            polygon: n + pa,
            edge: flip_edge(na, g.a.edge),
        };
        let b_minus = EdgeRef {
            polygon: n + pb,
            edge: flip_edge(nb, g.b.edge),
        };
        // Orientation-preserving gluings stay on one sheet; reversing ones
        // cross sheets, where the chart mirror absorbs the reflection.
        let pairs = if g.part.reflect {
            [(g.a, b_minus, t.neg()), (a_minus, g.b, t)]
        } else {
            [(g.a, g.b, t), (a_minus, b_minus, t.neg())]
        };
        for (a, b, turn) in pairs {
            gluings.push(Gluing {
                a,
                b,
                part: OrthogonalPart::rotation(turn),
            });
            origins.push(GluingOrigin::Interior {
                gluing: gi,
                swapped: false,
            });
        }
    }

    let total = FlatSurface::new(polygons, gluings, base.tol)?;

    let mut sheets = Vec::with_capacity(2 * n);
    for p in 0..n {
        sheets.push(sheet_from_iso(p, 0, &Isometry::IDENTITY));
    }
    for p in 0..n {
        sheets.push(sheet_from_iso(p, 1, &Isometry::reflection(0.0)));
    }

    let deck_action = deck_action_from_sheets(&sheets, 2).expect("two full sheets");
    let (branch, ramification) = ramification_data(base, &total, &sheets);
    debug_assert!(branch.is_empty());
    Ok(CoverMap {
        base: base.clone(),
        total,
        degree: 2,
        deck_kind: DeckKind::Flip,
        sheets,
        deck_action,
        deck_turns: None,
        branch,
        ramification,
        origins,
    })
}

/// Re-charts an orientable surface so every gluing preserves orientation:
/// polygons on the odd side of the reflection 2-colouring get mirrored
/// charts. Gluing order and side order are preserved. Returns the flip
/// flags alongside the surface.
fn orient_atlas(base: &FlatSurface) -> Result<(FlatSurface, Vec<bool>), CoverError> {
    let n = base.polygons.len();
    let mut color: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(false);
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            let cp = color[p].unwrap();
            for g in &base.gluings {
                let (pa, pb) = (g.a.polygon, g.b.polygon);
                let q = if pa == p {
                    pb
                } else if pb == p {
                    pa
                } else {
                    continue;
                };
                let cq = if g.part.reflect { !cp } else { cp };
                match color[q] {
                    None => {
                        color[q] = Some(cq);
                        stack.push(q);
                    }
                    Some(existing) => assert_eq!(existing, cq, "surface must be orientable"),
                }
            }
        }
    }
    let flips: Vec<bool> = color.into_iter().map(|c| c.unwrap()).collect();

    let polygons: Vec<Polygon> = base
        .polygons
        .iter()
        .zip(&flips)
        .map(|(poly, &flip)| {
            if flip {
                flipped_polygon(poly, poly.id.clone())
            } else {
                poly.clone()
            }
        })
        .collect();

    let gluings: Vec<Gluing> = base
        .gluings
        .iter()
        .map(|g| {
            let (fa, fb) = (flips[g.a.polygon], flips[g.b.polygon]);
            let (na, nb) = (
                base.polygons[g.a.polygon].len(),
                base.polygons[g.b.polygon].len(),
            );
            let a = EdgeRef {
                polygon: g.a.polygon,
                edge: if fa {
                    flip_edge(na, g.a.edge)
                } else {
                    g.a.edge
                },
            };
            let b = EdgeRef {
                polygon: g.b.polygon,
                edge: if fb {
                    flip_edge(nb, g.b.edge)
                } else {
                    g.b.edge
                },
            };
            // Conjugating the transition by the chart mirrors: a reflection
            // between oppositely flipped sheets becomes a rotation, and a
            // rotation between two flipped sheets reverses its sign.
            let turn = match (g.part.reflect, fa, fb) {
                (false, false, false) => g.part.turn,
                (false, true, true) => g.part.turn.neg(),
                (true, false, true) => g.part.turn.neg(),
                (true, true, false) => g.part.turn,
                _ => unreachable!("colouring separates reflect gluings"),
            };
            Gluing {
                a,
                b,
                part: OrthogonalPart::rotation(turn),
            }
        })
        .collect();

    let oriented = FlatSurface::new(polygons, gluings, base.tol)?;
    Ok((oriented, flips))
}

/// N-sheet cover of an orientable closed surface on which the holonomy
/// rotations cancel: sheet h places every polygon by its developing map
/// rotated h/N of a turn, and a gluing whose developed rotation is p/q
/// connects sheet h to sheet h - pN/q. Every total gluing is a translation.
pub fn very_flat_cover(base: &FlatSurface) -> Result<CoverMap, CoverError> {
    if base.has_boundary() {
        return Err(CoverError::HasBoundary);
    }
    if !base.is_orientable() {
        return Err(CoverError::NotOrientable);
    }
    let (oriented, flips) = orient_atlas(base)?;
    let dev = develop(&oriented)?;
    let group = holonomy_group(&dev)?;
    assert!(group.orientation_preserving);
    let degree = group.rotation_order as usize;
    let n = oriented.polygons.len();

    let mut shift = vec![0usize; oriented.gluings.len()];
    for gen in &dev.generators {
        assert!(!gen.part.reflect);
        let (p, q) = (gen.part.turn.numerator(), gen.part.turn.denominator());
        assert_eq!(group.rotation_order % q, 0);
        shift[gen.gluing] = (p * (group.rotation_order / q)) as usize % degree;
    }

    let mut polygons = Vec::with_capacity(degree * n);
    let mut sheets = Vec::with_capacity(degree * n);
    for h in 0..degree {
        let theta = TAU * h as f64 / degree as f64;
        let rot = Isometry::rotation(theta);
        for (p, poly) in oriented.polygons.iter().enumerate() {
            let place = rot.compose(&dev.charts[p]);
            let anchor = place.apply(poly.vertex(0)) - poly.vertex(0);
            let vertices = (0..poly.len())
                .map(|i| place.apply(poly.vertex(i)) - anchor)
                .collect();
            polygons.push(Polygon::new(
                format!("{}@{}", base.polygons[p].id, h),
                vertices,
            ));
            let mut to_base = dev.charts[p]
                .inverse()
                .compose(&Isometry::rotation(-theta))
                .compose(&Isometry::translation(anchor));
            if flips[p] {
                to_base = Isometry::reflection(0.0).compose(&to_base);
            }
            sheets.push(sheet_from_iso(p, h, &to_base));
        }
    }

    let mut gluings = Vec::new();
    let mut origins = Vec::new();
    for h in 0..degree {
        for (gi, g) in oriented.gluings.iter().enumerate() {
            let h2 = (h + degree - shift[gi]) % degree;
            gluings.push(Gluing {
                a: EdgeRef {
                    polygon: h * n + g.a.polygon,
                    edge: g.a.edge,
                },
                b: EdgeRef {
                    polygon: h2 * n + g.b.polygon,
                    edge: g.b.edge,
                },
                part: OrthogonalPart::rotation(RationalTurn::ZERO),
            });
            origins.push(GluingOrigin::Interior {
                gluing: gi,
                swapped: false,
            });
        }
    }

    let total = FlatSurface::new(polygons, gluings, base.tol)?;
    let cover_group = holonomy_group(&develop(&total)?)?;
    assert!(
        cover_group.is_trivial(),
        "cover holonomy must be trivial, got order {}",
        cover_group.order()
    );

    let deck_action = deck_action_from_sheets(&sheets, degree).expect("full fibers");
    let deck_turns = (0..degree)
        .map(|j| RationalTurn::new(j as i64, group.rotation_order))
        .collect();
    let (branch, ramification) = ramification_data(base, &total, &sheets);
    Ok(CoverMap {
        base: base.clone(),
        total,
        degree,
        deck_kind: DeckKind::Cyclic,
        sheets,
        deck_action,
        deck_turns: Some(deck_turns),
        branch,
        ramification,
        origins,
    })
}

/// One verification check with its outcome.
#[derive(Debug, Clone)]
pub struct CoverCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of `verify_flat_cover`: every check is listed, passed or not.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<CoverCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "{} {:<17} {}", tag, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Checks the covering axioms on a `CoverMap`, constructed or parsed:
/// area multiplicativity, the Euler characteristic relation, the angle
/// relation at every ramified point, pointwise isometry of the sheet
/// projections, seam alignment across every total gluing, and that the
/// deck action is isometric and transitive on fibers.
pub fn verify_flat_cover(cover: &CoverMap, seed: u64) -> VerificationReport {
    let mut checks = Vec::new();
    let base = &cover.base;
    let total = &cover.total;

    let (ab, at) = (base.area(), total.area());
    let residual = (at - cover.degree as f64 * ab).abs();
    checks.push(CoverCheck {
        name: "area",
        passed: residual <= 1e-9 * at,
        detail: format!(
            "total {:.12} vs {} x base {:.12} (residual {:.3e})",
            at, cover.degree, ab, residual
        ),
    });

    let (xb, xt) = (base.euler_characteristic(), total.euler_characteristic());
    if base.has_boundary() {
        // Folding kills the boundary circles, which carry no Euler
        // characteristic of their own.
        checks.push(CoverCheck {
            name: "euler",
            passed: xt == 2 * xb,
            detail: format!("fold: chi {} vs 2 x {}", xt, xb),
        });
    } else {
        let defect: i64 = cover.ramification.iter().map(|r| r.index - 1).sum();
        checks.push(CoverCheck {
            name: "euler",
            passed: xt == cover.degree as i64 * xb - defect,
            detail: format!("chi {} vs {} x {} - {}", xt, cover.degree, xb, defect),
        });
    }

    let mut worst: f64 = 0.0;
    for r in &cover.ramification {
        let theta_t = total.cone_points()[r.total_cone].angle;
        let theta_b = base.cone_points()[r.base_cone].angle;
        worst = worst.max((theta_t - r.index as f64 * theta_b).abs());
    }
    checks.push(CoverCheck {
        name: "angle-relation",
        passed: worst <= total.tol.eps_cone,
        detail: format!(
            "{} cone orbits, worst |theta - m theta'| = {:.3e}",
            cover.ramification.len(),
            worst
        ),
    });

    let mut rng = Rng::new(seed).substream(0x636f766572);
    let weights: Vec<f64> = total.polygons.iter().map(|p| p.area()).collect();
    let total_area: f64 = weights.iter().sum();
    let mut iso_worst: f64 = 0.0;
    let samples = 1000;
    for _ in 0..samples {
        let mut pick = rng.uniform() * total_area;
        let mut tp = 0;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                tp = i;
                break;
            }
            pick -= w;
        }
        let p = uniform_point(&total.polygons[tp], &mut rng);
        let mut q = p;
        for _ in 0..16 {
            let step = Vec2::from_angle(rng.range(0.0, TAU)).scale(1e-3);
            if total.polygons[tp].contains(p + step, 0.0) {
                q = p + step;
                break;
            }
        }
        let iso = cover.sheets[tp].to_base();
        iso_worst = iso_worst.max((p.dist(q) - iso.apply(p).dist(iso.apply(q))).abs());
    }
    checks.push(CoverCheck {
        name: "local-isometry",
        passed: iso_worst <= 1e-9,
        detail: format!(
            "{} point pairs, worst distance distortion {:.3e}",
            samples, iso_worst
        ),
    });

    let mut seam_worst: f64 = 0.0;
    for (gi, g) in total.gluings.iter().enumerate() {
        let iso_a = cover.sheets[g.a.polygon].to_base();
        let iso_b = cover.sheets[g.b.polygon].to_base();
        let (a0, a1) = total.polygons[g.a.polygon].edge(g.a.edge);
        let across = total.gluing_isometry(gi, true);
        for &s in &[0.25, 0.5, 0.75] {
            let pa = a0 + (a1 - a0).scale(s);
            let pb = across.apply(pa);
            let (da, db) = (iso_a.apply(pa), iso_b.apply(pb));
            let err = match cover.origins[gi] {
                GluingOrigin::Fold { .. } => da.dist(db),
                GluingOrigin::Interior { gluing, swapped } => {
                    let down = base.gluing_isometry(gluing, !swapped);
                    down.apply(da).dist(db)
                }
            };
            seam_worst = seam_worst.max(err);
        }
    }
    checks.push(CoverCheck {
        name: "seam-alignment",
        passed: seam_worst <= 1e-9,
        detail: format!(
            "{} gluings, worst seam mismatch {:.3e}",
            total.gluings.len(),
            seam_worst
        ),
    });

    let mut transitive = true;
    let mut fiber_detail = String::new();
    for _ in 0..10 {
        let tp = rng.below(total.polygons.len());
        let orbit: Vec<usize> = (0..cover.degree)
            .map(|j| cover.deck_action[j][tp])
            .collect();
        let mut fiber = cover.fiber(cover.sheets[tp].base_polygon);
        let mut sorted = orbit.clone();
        sorted.sort_unstable();
        sorted.dedup();
        fiber.sort_unstable();
        if sorted != fiber {
            transitive = false;
            fiber_detail = format!("orbit of {} misses its fiber", total.polygons[tp].id);
            break;
        }
    }
    checks.push(CoverCheck {
        name: "deck-transitivity",
        passed: transitive,
        detail: if transitive {
            "deck orbits fill 10 random fibers".to_string()
        } else {
            fiber_detail
        },
    });

    let mut deck_worst: f64 = 0.0;
    for row in &cover.deck_action {
        for (tp, &image) in row.iter().enumerate() {
            let (src, dst) = (&total.polygons[tp], &total.polygons[image]);
            if src.len() != dst.len() {
                deck_worst = f64::INFINITY;
                continue;
            }
            let mirror = cover.sheets[tp].reflect != cover.sheets[image].reflect;
            for e in 0..src.len() {
                let e2 = if mirror { flip_edge(src.len(), e) } else { e };
                deck_worst = deck_worst.max((src.edge_len(e) - dst.edge_len(e2)).abs());
            }
        }
    }
    checks.push(CoverCheck {
        name: "deck-isometry",
        passed: deck_worst <= 1e-9,
        detail: format!("worst edge length deviation {:.3e}", deck_worst),
    });

    VerificationReport { checks }
}

/// Lifts a base state to the given sheet. Directions transform by the
/// inverse sheet projection.
pub fn lift_state(
    cover: &CoverMap,
    state: &FlowState,
    sheet: usize,
) -> Result<FlowState, CoverError> {
    if sheet >= cover.degree {
        return Err(CoverError::InvalidSheet {
            sheet,
            degree: cover.degree,
        });
    }
    for &bc in &cover.branch {
        for c in &cover.base.cone_points()[bc].corners {
            if c.polygon == state.polygon {
                let vtx = cover.base.polygons[c.polygon].vertex(c.vertex);
                if vtx.dist(state.point) <= cover.base.tol.delta_vertex {
                    return Err(CoverError::BranchPointLift);
                }
            }
        }
    }
    let tp = cover
        .sheet_polygon(state.polygon, sheet)
        .expect("every base polygon has a full fiber");
    let up = cover.sheets[tp].to_base().inverse();
    Ok(FlowState::new(
        tp,
        up.apply(state.point),
        up.apply_vec(state.dir),
    ))
}

/// Projects a total state down to the base.
pub fn project_state(cover: &CoverMap, state: &FlowState) -> Result<FlowState, CoverError> {
    for cone in cover.total.singular_points() {
        for c in &cone.corners {
            if c.polygon == state.polygon {
                let vtx = cover.total.polygons[c.polygon].vertex(c.vertex);
                if vtx.dist(state.point) <= cover.total.tol.delta_vertex {
                    return Err(CoverError::SingularProject);
                }
            }
        }
    }
    let sheet = &cover.sheets[state.polygon];
    let down = sheet.to_base();
    Ok(FlowState::new(
        sheet.base_polygon,
        down.apply(state.point),
        down.apply_vec(state.dir),
    ))
}

/// Projects a total trajectory event by event. Event times and lengths are
/// preserved; crossings of fold seams become billiard reflections at the
/// base wall.
pub fn project_trajectory(cover: &CoverMap, traj: &Trajectory) -> Result<Trajectory, CoverError> {
    let ram_vertices: Vec<(usize, Vec2)> = cover
        .ramification
        .iter()
        .filter(|r| r.index > 1)
        .flat_map(|r| {
            cover.total.cone_points()[r.total_cone]
                .corners
                .iter()
                .map(|c| (c.polygon, cover.total.polygons[c.polygon].vertex(c.vertex)))
                .collect::<Vec<_>>()
        })
        .collect();
    let near_ram = |polygon: usize, point: Vec2| {
        ram_vertices
            .iter()
            .any(|&(p, v)| p == polygon && v.dist(point) <= cover.total.tol.delta_vertex)
    };

    if near_ram(traj.start.polygon, traj.start.point) {
        return Err(CoverError::RamificationHit { t: 0.0 });
    }
    let start = project_state(cover, &traj.start)?;

    let mut events = Vec::with_capacity(traj.events.len());
    for e in &traj.events {
        if near_ram(e.polygon, e.exit_point) {
            return Err(CoverError::RamificationHit { t: e.t });
        }
        let kind = match e.kind {
            EventKind::Crossing { gluing, from_a } => match cover.origins[gluing] {
                GluingOrigin::Interior {
                    gluing: bg,
                    swapped,
                } => EventKind::Crossing {
                    gluing: bg,
                    from_a: from_a != swapped,
                },
                GluingOrigin::Fold { edge, .. } => EventKind::Reflection { edge },
            },
            EventKind::Reflection { edge } => {
                let sheet = &cover.sheets[e.polygon];
                let n = cover.base.polygons[sheet.base_polygon].len();
                EventKind::Reflection {
                    edge: if sheet.reflect {
                        flip_edge(n, edge)
                    } else {
                        edge
                    },
                }
            }
        };
        let sheet = &cover.sheets[e.polygon];
        events.push(TraceEvent {
            kind,
            polygon: sheet.base_polygon,
            exit_point: sheet.to_base().apply(e.exit_point),
            t: e.t,
            after: project_state(cover, &e.after)?,
        });
    }

    if near_ram(traj.end.polygon, traj.end.point) {
        return Err(CoverError::RamificationHit { t: traj.length });
    }
    let end = project_state(cover, &traj.end)?;
    Ok(Trajectory {
        start,
        events,
        end,
        length: traj.length,
    })
}

/// Serializes the cover data (without the two surfaces) as canonical JSON:
/// keys sorted, one line per record, floats in full-precision scientific
/// notation.
pub fn export_cover(cover: &CoverMap) -> String {
    let base_label = |cone: usize| cover.base.cone_points()[cone].label(&cover.base.polygons);
    let total_label = |cone: usize| cover.total.cone_points()[cone].label(&cover.total.polygons);

    let mut out = String::from("{\n");
    out.push_str("  \"branch\": [");
    let branch: Vec<String> = cover
        .branch
        .iter()
        .map(|&c| format!("\"{}\"", base_label(c)))
        .collect();
    out.push_str(&branch.join(", "));
    out.push_str("],\n");

    let kind = match cover.deck_kind {
        DeckKind::Flip => "flip",
        DeckKind::Cyclic => "cyclic",
    };
    out.push_str(&format!(
        "  \"deck\": {{\"kind\": \"{}\", \"order\": {}}},\n",
        kind, cover.degree
    ));
    out.push_str(&format!("  \"degree\": {},\n", cover.degree));

    out.push_str("  \"ramification\": [\n");
    let rams: Vec<String> = cover
        .ramification
        .iter()
        .map(|r| {
            format!(
                "    {{\"base\": \"{}\", \"index\": {}, \"total\": \"{}\"}}",
                base_label(r.base_cone),
                r.index,
                total_label(r.total_cone)
            )
        })
        .collect();
    out.push_str(&rams.join(",\n"));
    out.push_str("\n  ],\n");

    out.push_str("  \"sheets\": [\n");
    let sheets: Vec<String> = cover
        .sheets
        .iter()
        .enumerate()
        .map(|(tp, s)| {
            format!(
                "    {{\"base\": \"{}\", \"deck\": {}, \"reflect\": {}, \"rotation\": {}, \"total\": \"{}\", \"translate\": [{}, {}]}}",
                cover.base.polygons[s.base_polygon].id,
                s.deck,
                s.reflect,
                fmt_float(s.angle),
                cover.total.polygons[tp].id,
                fmt_float(s.translate.x),
                fmt_float(s.translate.y),
            )
        })
        .collect();
    out.push_str(&sheets.join(",\n"));
    out.push_str("\n  ]\n}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCover {
    branch: Vec<String>,
    deck: RawDeck,
    degree: usize,
    ramification: Vec<RawRamification>,
    sheets: Vec<RawSheet>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeck {
    kind: String,
    order: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRamification {
    base: String,
    index: i64,
    total: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSheet {
    base: String,
    deck: usize,
    reflect: bool,
    rotation: f64,
    total: String,
    translate: [f64; 2],
}

/// Finds the cone orbit containing the corner named by a "polygon:vertex"
/// label. Accepts any corner of the orbit, not only the canonical one.
fn cone_by_label(surface: &FlatSurface, label: &str) -> Result<usize, CoverError> {
    let (id, vtx) = label
        .rsplit_once(':')
        .ok_or_else(|| CoverError::SidecarMismatch(format!("bad point label {label:?}")))?;
    let polygon = surface
        .polygon_index(id)
        .ok_or_else(|| CoverError::SidecarMismatch(format!("unknown polygon {id:?}")))?;
    let vertex: usize = vtx
        .parse()
        .map_err(|_| CoverError::SidecarMismatch(format!("bad point label {label:?}")))?;
    cone_containing(surface, Corner { polygon, vertex })
        .ok_or_else(|| CoverError::SidecarMismatch(format!("no cone orbit at {label}")))
}

/// Rebuilds gluing provenance by matching total gluing sides to the base:
/// a gluing between the two sheets of one wall edge is a fold seam, and
/// anything else must project onto a base gluing, possibly side-swapped.
fn reconstruct_origins(
    base: &FlatSurface,
    total: &FlatSurface,
    sheets: &[Sheet],
) -> Result<Vec<GluingOrigin>, CoverError> {
    let project_side = |side: EdgeRef| {
        let s = &sheets[side.polygon];
        let n = base.polygons[s.base_polygon].len();
        let edge = if s.reflect {
            flip_edge(n, side.edge)
        } else {
            side.edge
        };
        (s.base_polygon, edge, s.deck)
    };
    total
        .gluings
        .iter()
        .map(|g| {
            let (pa, ea, da) = project_side(g.a);
            let (pb, eb, db) = project_side(g.b);
            if pa == pb && ea == eb && da != db && base.is_wall(pa, ea) {
                return Ok(GluingOrigin::Fold {
                    polygon: pa,
                    edge: ea,
                });
            }
            for (bi, bg) in base.gluings.iter().enumerate() {
                let fits = |x: EdgeRef, p: usize, e: usize| x.polygon == p && x.edge == e;
                if fits(bg.a, pa, ea) && fits(bg.b, pb, eb) {
                    return Ok(GluingOrigin::Interior {
                        gluing: bi,
                        swapped: false,
                    });
                }
                if fits(bg.a, pb, eb) && fits(bg.b, pa, ea) {
                    return Ok(GluingOrigin::Interior {
                        gluing: bi,
                        swapped: true,
                    });
                }
            }
            Err(CoverError::SidecarMismatch(format!(
                "total gluing at {}[{}] projects onto no base gluing",
                total.polygons[g.a.polygon].id, g.a.edge
            )))
        })
        .collect()
}

/// Parses a cover document against its two surfaces.
pub fn parse_cover(
    text: &str,
    base: &FlatSurface,
    total: &FlatSurface,
) -> Result<CoverMap, CoverError> {
    let raw: RawCover =
        serde_json::from_str(text).map_err(|e| CoverError::SidecarMismatch(e.to_string()))?;

    let deck_kind = match raw.deck.kind.as_str() {
        "flip" => DeckKind::Flip,
        "cyclic" => DeckKind::Cyclic,
        other => {
            return Err(CoverError::SidecarMismatch(format!(
                "unknown deck kind {other:?}"
            )))
        }
    };
    if raw.deck.order != raw.degree {
        return Err(CoverError::SidecarMismatch(
            "deck order differs from degree".to_string(),
        ));
    }

    let mut sheets = vec![None; total.polygons.len()];
    for rs in &raw.sheets {
        let tp = total.polygon_index(&rs.total).ok_or_else(|| {
            CoverError::SidecarMismatch(format!("unknown total polygon {:?}", rs.total))
        })?;
        let bp = base.polygon_index(&rs.base).ok_or_else(|| {
            CoverError::SidecarMismatch(format!("unknown base polygon {:?}", rs.base))
        })?;
        if sheets[tp].is_some() {
            return Err(CoverError::SidecarMismatch(format!(
                "duplicate sheet for {:?}",
                rs.total
            )));
        }
        sheets[tp] = Some(Sheet {
            base_polygon: bp,
            deck: rs.deck,
            angle: rs.rotation,
            reflect: rs.reflect,
            translate: Vec2 {
                x: rs.translate[0],
                y: rs.translate[1],
            },
        });
    }
    let sheets: Vec<Sheet> = sheets
        .into_iter()
        .enumerate()
        .map(|(tp, s)| {
            s.ok_or_else(|| {
                CoverError::SidecarMismatch(format!(
                    "no sheet entry for {:?}",
                    total.polygons[tp].id
                ))
            })
        })
        .collect::<Result<_, _>>()?;

    let branch = raw
        .branch
        .iter()
        .map(|l| cone_by_label(base, l))
        .collect::<Result<Vec<_>, _>>()?;
    let ramification = raw
        .ramification
        .iter()
        .map(|r| {
            Ok(Ramification {
                total_cone: cone_by_label(total, &r.total)?,
                base_cone: cone_by_label(base, &r.base)?,
                index: r.index,
            })
        })
        .collect::<Result<Vec<_>, CoverError>>()?;

    let deck_action = deck_action_from_sheets(&sheets, raw.degree)
        .ok_or_else(|| CoverError::SidecarMismatch("sheets do not form full fibers".to_string()))?;
    let deck_turns = match deck_kind {
        DeckKind::Flip => None,
        DeckKind::Cyclic => Some(
            (0..raw.degree)
                .map(|j| RationalTurn::new(j as i64, raw.degree as i64))
                .collect(),
        ),
    };
    let origins = reconstruct_origins(base, total, &sheets)?;

    Ok(CoverMap {
        base: base.clone(),
        total: total.clone(),
        degree: raw.degree,
        deck_kind,
        sheets,
        deck_action,
        deck_turns,
        branch,
        ramification,
        origins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{trace_billiard, trace_geodesic};
    use crate::geom::v;
    use crate::holonomy::is_really_flat;
    use crate::loops::{evaluate_loop, generate_loops, PolygonalLoop};
    use crate::surface::Tolerances;

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
        let g = vec![
            gluing((0, 0), (0, 2), RationalTurn::ZERO, false),
            gluing((0, 1), (0, 3), RationalTurn::ZERO, false),
        ];
        FlatSurface::new(vec![unit_square("sq")], g, Tolerances::default()).unwrap()
    }

    fn square_table() -> FlatSurface {
        FlatSurface::new(vec![unit_square("sq")], vec![], Tolerances::default()).unwrap()
    }

    fn triangle_table() -> FlatSurface {
        let p = Polygon::new("tri", vec![v(0.0, 0.0), v(1.0, 0.0), v(0.0, 1.0)]);
        FlatSurface::new(vec![p], vec![], Tolerances::default()).unwrap()
    }

    fn pillowcase() -> FlatSurface {
        let turns = [0, 1, 0, 1];
        let g: Vec<Gluing> = (0..4)
            .map(|e| gluing((0, e), (1, e), RationalTurn::new(turns[e], 2), true))
            .collect();
        FlatSurface::new(
            vec![unit_square("front"), unit_square("back")],
            g,
            Tolerances::default(),
        )
        .unwrap()
    }

    fn klein() -> FlatSurface {
        let g = vec![
            gluing((0, 0), (0, 2), RationalTurn::ZERO, false),
            gluing((0, 1), (0, 3), RationalTurn::ZERO, true),
        ];
        FlatSurface::new(vec![unit_square("sq")], g, Tolerances::default()).unwrap()
    }

    #[test]
    fn square_table_doubles_to_pillowcase() {
        let base = square_table();
        let cover = double(&base).unwrap();
        let total = &cover.total;
        assert_eq!(cover.degree, 2);
        assert!((total.area() - 2.0).abs() < 1e-12);
        assert_eq!(total.euler_characteristic(), 2);
        assert!(total.is_orientable());
        assert!(!total.has_boundary());
        assert_eq!(total.cone_points().len(), 4);
        for c in total.cone_points() {
            assert!((c.angle - PI).abs() < 1e-12);
            assert!(c.is_singular());
        }
        // Folds reflect, with turns twice the wall direction.
        let mut turns: Vec<RationalTurn> = total
            .gluings
            .iter()
            .map(|g| {
                assert!(g.part.reflect);
                g.part.turn
            })
            .collect();
        turns.sort_by_key(|t| (t.numerator(), t.denominator()));
        let half = RationalTurn::HALF;
        assert_eq!(
            turns,
            vec![RationalTurn::ZERO, RationalTurn::ZERO, half, half]
        );
        assert_eq!(cover.branch.len(), 4);
        assert!(cover.ramification.iter().all(|r| r.index == 2));
        assert!(verify_flat_cover(&cover, 7).passed());
        let (fb, ft) = (
            is_really_flat(&base).unwrap(),
            is_really_flat(total).unwrap(),
        );
        assert!(fb.verdict && ft.verdict);
    }

    #[test]
    fn folding_recovers_the_base_isometrically() {
        let cover = double(&triangle_table()).unwrap();
        for (tp, sheet) in cover.sheets.iter().enumerate() {
            let down = sheet.to_base();
            let bp = &cover.base.polygons[sheet.base_polygon];
            let poly = &cover.total.polygons[tp];
            for i in 0..poly.len() {
                assert!(down.apply(poly.vertex(i)).dist(bp.vertex(i)) < 1e-12);
            }
        }
    }

    #[test]
    fn triangle_double_doubles_the_corner_angles() {
        let cover = double(&triangle_table()).unwrap();
        let total = &cover.total;
        assert!((total.area() - 1.0).abs() < 1e-12);
        assert_eq!(total.euler_characteristic(), 2);
        let mut angles: Vec<f64> = total.cone_points().iter().map(|c| c.angle).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((angles[0] - PI / 2.0).abs() < 1e-12);
        assert!((angles[1] - PI / 2.0).abs() < 1e-12);
        assert!((angles[2] - PI).abs() < 1e-12);
        assert!(verify_flat_cover(&cover, 7).passed());
    }

    #[test]
    fn closed_surface_has_no_double() {
        assert!(matches!(double(&torus()), Err(CoverError::NoBoundary)));
    }

    #[test]
    fn irrational_wedge_cannot_fold() {
        let p = Polygon::new(
            "wedge",
            vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0_f64.cos(), 1.0_f64.sin())],
        );
        let s = FlatSurface::new(vec![p], vec![], Tolerances::default()).unwrap();
        assert!(matches!(
            double(&s),
            Err(CoverError::WallAngleNotRational { .. })
        ));
    }

    #[test]
    fn klein_orientation_double_is_a_flat_torus() {
        let base = klein();
        let cover = orientation_double(&base).unwrap();
        let total = &cover.total;
        assert!((total.area() - 2.0).abs() < 1e-12);
        assert_eq!(total.euler_characteristic(), 0);
        assert!(total.is_orientable());
        assert!(total.gluings.iter().all(|g| !g.part.reflect));
        let h = holonomy_group(&develop(total).unwrap()).unwrap();
        assert!(h.is_trivial());
        // Unbranched: every base cone has two preimages of the same angle.
        assert!(cover.branch.is_empty());
        assert!(cover.ramification.iter().all(|r| r.index == 1));
        for bc in 0..base.cone_points().len() {
            let count = cover
                .ramification
                .iter()
                .filter(|r| r.base_cone == bc)
                .count();
            assert_eq!(count, 2);
        }
        assert!(verify_flat_cover(&cover, 7).passed());
        let (fb, ft) = (
            is_really_flat(&base).unwrap(),
            is_really_flat(total).unwrap(),
        );
        assert_eq!(fb.verdict, ft.verdict);
    }

    #[test]
    fn orientable_surface_has_no_orientation_double() {
        assert!(matches!(
            orientation_double(&torus()),
            Err(CoverError::AlreadyOrientable)
        ));
        assert!(matches!(
            orientation_double(&square_table()),
            Err(CoverError::HasBoundary)
        ));
    }

    #[test]
    fn pillowcase_cover_is_a_translation_torus() {
        let base = pillowcase();
        let cover = very_flat_cover(&base).unwrap();
        let total = &cover.total;
        assert_eq!(cover.degree, 2);
        assert!((total.area() - 4.0).abs() < 1e-12);
        assert_eq!(total.euler_characteristic(), 0);
        assert!(total
            .gluings
            .iter()
            .all(|g| !g.part.reflect && g.part.turn.is_zero()));
        assert!(total.singular_points().is_empty());
        // Each angle-π point has a single preimage of angle 2π.
        assert_eq!(cover.branch.len(), 4);
        for bc in 0..base.cone_points().len() {
            let over: Vec<_> = cover
                .ramification
                .iter()
                .filter(|r| r.base_cone == bc)
                .collect();
            assert_eq!(over.len(), 1);
            assert_eq!(over[0].index, 2);
        }
        assert!(verify_flat_cover(&cover, 7).passed());
    }

    #[test]
    fn torus_cover_is_the_identity() {
        let base = torus();
        let cover = very_flat_cover(&base).unwrap();
        assert_eq!(cover.degree, 1);
        assert!((cover.total.area() - 1.0).abs() < 1e-12);
        let s = FlowState::new(0, v(0.3, 0.4), v(0.6, 0.8));
        let up = lift_state(&cover, &s, 0).unwrap();
        assert!(up.approx_eq(&FlowState::new(0, s.point, s.dir), 1e-12));
        let down = project_state(&cover, &up).unwrap();
        assert!(down.approx_eq(&s, 1e-12));
    }

    #[test]
    fn lifting_to_the_far_sheet_rotates_directions() {
        let cover = very_flat_cover(&pillowcase()).unwrap();
        let s = FlowState::new(0, v(0.3, 0.4), v(1.0, 0.0));
        let up = lift_state(&cover, &s, 1).unwrap();
        assert!(up.dir.dist(v(-1.0, 0.0)) < 1e-12);
        let down = project_state(&cover, &up).unwrap();
        assert!(down.approx_eq(&s, 1e-9));
    }

    #[test]
    fn triangle_double_cover_is_a_smooth_torus() {
        let folded = double(&triangle_table()).unwrap();
        let cover = very_flat_cover(&folded.total).unwrap();
        assert_eq!(cover.degree, 4);
        assert!((cover.total.area() - 4.0).abs() < 1e-12);
        assert_eq!(cover.total.euler_characteristic(), 0);
        assert!(cover.total.singular_points().is_empty());
        assert!(verify_flat_cover(&cover, 7).passed());
    }

    #[test]
    fn branch_points_have_no_lift() {
        let cover = very_flat_cover(&pillowcase()).unwrap();
        let s = FlowState::new(0, v(0.0, 0.0), v(1.0, 0.0));
        assert!(matches!(
            lift_state(&cover, &s, 0),
            Err(CoverError::BranchPointLift)
        ));
        let t = FlowState::new(0, v(0.5, 0.5), v(1.0, 0.0));
        assert!(matches!(
            lift_state(&cover, &t, 5),
            Err(CoverError::InvalidSheet { .. })
        ));
    }

    #[test]
    fn projection_commutes_with_the_flow() {
        let base = pillowcase();
        let cover = very_flat_cover(&base).unwrap();
        let s = FlowState::new(0, v(0.3, 0.4), v(1.0, 1.37).unit());
        let down = trace_geodesic(&base, s, 7.0).unwrap();
        let up = trace_geodesic(&cover.total, lift_state(&cover, &s, 0).unwrap(), 7.0).unwrap();
        let proj = project_trajectory(&cover, &up).unwrap();
        assert_eq!(proj.events.len(), down.events.len());
        for (a, b) in proj.events.iter().zip(&down.events) {
            assert_eq!(a.kind, b.kind);
            assert!((a.t - b.t).abs() < 1e-9);
            assert!(a.after.approx_eq(&b.after, 1e-6));
        }
        assert!(proj.end.approx_eq(&down.end, 1e-6));
    }

    #[test]
    fn unfolded_geodesics_project_to_billiard_paths() {
        let base = square_table();
        let cover = double(&base).unwrap();
        let s = FlowState::new(0, v(0.25, 0.25), v(2.0, 1.0).unit());
        let billiard = trace_billiard(&base, s, 3.0).unwrap();
        let up = trace_geodesic(&cover.total, lift_state(&cover, &s, 0).unwrap(), 3.0).unwrap();
        let proj = project_trajectory(&cover, &up).unwrap();
        assert_eq!(proj.events.len(), billiard.events.len());
        for (a, b) in proj.events.iter().zip(&billiard.events) {
            assert_eq!(a.kind, b.kind);
            assert!((a.t - b.t).abs() < 1e-9);
            assert!(a.after.approx_eq(&b.after, 1e-6));
        }
        assert!(proj.end.approx_eq(&billiard.end, 1e-6));
    }

    #[test]
    fn trajectories_through_ramification_points_do_not_project() {
        let cover = very_flat_cover(&pillowcase()).unwrap();
        // The preimage of a branch point is a regular vertex upstairs, so a
        // hand-built path through it projects to nothing.
        let r = &cover.ramification[0];
        let c = cover.total.cone_points()[r.total_cone].corners[0];
        let vtx = cover.total.polygons[c.polygon].vertex(c.vertex);
        let state = FlowState::new(c.polygon, vtx, v(1.0, 0.0));
        let traj = Trajectory {
            start: state,
            events: vec![],
            end: state,
            length: 0.0,
        };
        assert!(matches!(
            project_trajectory(&cover, &traj),
            Err(CoverError::RamificationHit { .. })
        ));
    }

    #[test]
    fn corrupted_covers_fail_verification() {
        let mut cover = very_flat_cover(&pillowcase()).unwrap();
        cover.sheets[1].translate = cover.sheets[1].translate + v(0.1, 0.0);
        let report = verify_flat_cover(&cover, 7);
        assert!(!report.passed());
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "seam-alignment" && !c.passed));

        // A rotated sheet chart is still an isometry; only the seam check
        // can see it.
        let mut cover = very_flat_cover(&pillowcase()).unwrap();
        cover.sheets[2].angle += 0.3;
        let report = verify_flat_cover(&cover, 7);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "local-isometry" && c.passed));
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "seam-alignment" && !c.passed));

        let mut cover = very_flat_cover(&pillowcase()).unwrap();
        cover.ramification[0].index = 1;
        let report = verify_flat_cover(&cover, 7);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "angle-relation" && !c.passed));
    }

    #[test]
    fn cover_documents_round_trip() {
        let covers = vec![
            double(&square_table()).unwrap(),
            orientation_double(&klein()).unwrap(),
            very_flat_cover(&pillowcase()).unwrap(),
        ];
        for cover in covers {
            let text = export_cover(&cover);
            let parsed = parse_cover(&text, &cover.base, &cover.total).unwrap();
            assert_eq!(parsed.degree, cover.degree);
            assert_eq!(parsed.deck_kind, cover.deck_kind);
            assert_eq!(parsed.branch, cover.branch);
            assert_eq!(parsed.ramification, cover.ramification);
            assert_eq!(parsed.origins, cover.origins);
            assert_eq!(parsed.deck_action, cover.deck_action);
            for (a, b) in parsed.sheets.iter().zip(&cover.sheets) {
                assert_eq!(a.base_polygon, b.base_polygon);
                assert_eq!(a.deck, b.deck);
                assert!(a.to_base().max_matrix_dev(&b.to_base()) < 1e-15);
                assert!(a.translate.dist(b.translate) < 1e-15);
            }
            assert_eq!(export_cover(&parsed), text);
        }
    }

    #[test]
    fn loop_holonomy_descends_along_covers() {
        let cases = vec![
            orientation_double(&klein()).unwrap(),
            very_flat_cover(&pillowcase()).unwrap(),
        ];
        for cover in cases {
            let mut rng = Rng::new(11).substream(0x6c6f6f70);
            let loops = generate_loops(&cover.total, 60, &mut rng);
            let mut evaluated = 0;
            for lp in &loops {
                let Ok(up) = evaluate_loop(&cover.total, lp) else {
                    continue;
                };
                let nodes: Result<Vec<_>, _> = lp
                    .nodes
                    .iter()
                    .map(|n| {
                        project_state(&cover, &n.state).map(|state| crate::loops::LoopNode {
                            state,
                            length: n.length,
                        })
                    })
                    .collect();
                let Ok(nodes) = nodes else { continue };
                let Ok(down) = evaluate_loop(&cover.base, &PolygonalLoop { nodes }) else {
                    continue;
                };
                evaluated += 1;
                assert!(!down.exact_part.reflect);
                // Projection conjugates the holonomy by the sheet chart, so
                // reflected sheets reverse the rotation.
                let expect = if cover.sheets[lp.nodes[0].state.polygon].reflect {
                    up.exact_part.inverse()
                } else {
                    up.exact_part
                };
                assert_eq!(down.exact_part, expect);
                if let Some(r) = down.turn_residual() {
                    assert!(r < 1e-8);
                }
            }
            assert!(evaluated >= 20, "only {evaluated} loops evaluated");
        }
    }
}
