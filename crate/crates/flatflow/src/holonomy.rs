//! Developing map and holonomy.
//!
//! Developing lays the polygon charts out in one plane along a spanning tree
//! of the gluing graph: tree gluings develop to the identity, and every
//! non-tree gluing contributes one holonomy generator. Generators carry an
//! exact orthogonal part, so the holonomy group closes over exact rational
//! turns; with the root chart fixed the resulting subgroup of O(2) does not
//! depend on the choice of spanning tree.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use thiserror::Error;

use crate::geom::Isometry;
use crate::surface::FlatSurface;
use crate::turn::{snap_unit_fraction, OrthogonalPart};

/// Hard ceiling on holonomy closure size; rational turns always generate a
/// finite group, but user input can make it astronomically large.
pub const GROUP_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("surface is disconnected ({components} components)")]
    DisconnectedSurface { components: usize },
    #[error("holonomy group exceeds {cap} elements")]
    GroupTooLarge { cap: usize },
    #[error(
        "wall angle ratio {value:.12} snaps ambiguously: both {first} and {second} lie within tolerance"
    )]
    RationalitySnapAmbiguous {
        value: f64,
        first: String,
        second: String,
    },
}

/// One holonomy generator, attached to a non-tree gluing.
#[derive(Debug, Clone, Copy)]
pub struct HolonomyGenerator {
    pub gluing: usize,
    /// Exact orthogonal part λ_b ∘ L ∘ λ_a⁻¹ of the plane mismatch.
    pub part: OrthogonalPart,
    /// Full float isometry π_b ∘ g ∘ π_a⁻¹ (includes the translation).
    pub iso: Isometry,
}

/// Developing data: one plane chart per polygon.
#[derive(Debug, Clone)]
pub struct Developed {
    pub root: usize,
    /// π_P: polygon chart to plane, float.
    pub charts: Vec<Isometry>,
    /// λ_P: exact linear part of π_P.
    pub linear: Vec<OrthogonalPart>,
    /// Gluing index used to first reach each polygon (None at the root).
    pub tree: Vec<Option<usize>>,
    pub generators: Vec<HolonomyGenerator>,
}

/// Develops from polygon 0, trying gluings in their natural order.
pub fn develop(surface: &FlatSurface) -> Result<Developed, HolonomyError> {
    let order: Vec<usize> = (0..surface.gluings.len()).collect();
    develop_with(surface, 0, &order)
}

/// Develops from `root`, preferring earlier entries of `priority` (a
/// permutation of the gluing indices) when growing the spanning tree.
pub fn develop_with(
    surface: &FlatSurface,
    root: usize,
    priority: &[usize],
) -> Result<Developed, HolonomyError> {
    let n = surface.polygons.len();
    assert!(root < n, "root polygon out of range");
    assert_eq!(
        priority.len(),
        surface.gluings.len(),
        "priority permutation"
    );

    let mut charts = vec![Isometry::IDENTITY; n];
    let mut linear = vec![OrthogonalPart::IDENTITY; n];
    let mut tree = vec![None; n];
    let mut visited = vec![false; n];
    visited[root] = true;

    // Prim-style growth keeps the tree deterministic for a given priority.
    let mut in_tree = vec![false; surface.gluings.len()];
    loop {
        let mut grew = false;
        for &gi in priority {
            let g = &surface.gluings[gi];
            let (pa, pb) = (g.a.polygon, g.b.polygon);
            let (from, to, from_a) = match (visited[pa], visited[pb]) {
                (true, false) => (pa, pb, true),
                (false, true) => (pb, pa, false),
                _ => continue,
            };
            // h maps the chart of `from` to the chart of `to`; the new chart
            // developing map cancels it exactly.
            let h = surface.gluing_isometry(gi, from_a);
            let l = if from_a { g.part } else { g.part.inverse() };
            charts[to] = charts[from].compose(&h.inverse());
            linear[to] = linear[from].compose(l.inverse());
            visited[to] = true;
            tree[to] = Some(gi);
            in_tree[gi] = true;
            grew = true;
            break;
        }
        if !grew {
            break;
        }
    }

    let components = visited.iter().filter(|&&x| !x).count();
    if components > 0 {
        return Err(HolonomyError::DisconnectedSurface {
            components: surface.component_count(),
        });
    }

    let mut generators = Vec::new();
    for gi in 0..surface.gluings.len() {
        if in_tree[gi] {
            continue;
        }
        let g = &surface.gluings[gi];
        let part = linear[g.b.polygon]
            .compose(g.part)
            .compose(linear[g.a.polygon].inverse());
        let iso = charts[g.b.polygon]
            .compose(&surface.gluing_isometry(gi, true))
            .compose(&charts[g.a.polygon].inverse());
        generators.push(HolonomyGenerator {
            gluing: gi,
            part,
            iso,
        });
    }

    Ok(Developed {
        root,
        charts,
        linear,
        tree,
        generators,
    })
}

/// Closure of the holonomy generators in O(2), all parts exact.
#[derive(Debug, Clone)]
pub struct HolonomyGroup {
    /// Every element, sorted; contains the identity.
    pub elements: Vec<OrthogonalPart>,
    /// Order of the rotation subgroup (cyclic, generated by 1/N of a turn).
    pub rotation_order: i64,
    /// True when the group contains no reflections.
    pub orientation_preserving: bool,
}

impl HolonomyGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

pub fn holonomy_group(developed: &Developed) -> Result<HolonomyGroup, HolonomyError> {
    let mut set: BTreeSet<OrthogonalPart> = BTreeSet::new();
    set.insert(OrthogonalPart::IDENTITY);
    for g in &developed.generators {
        set.insert(g.part);
        set.insert(g.part.inverse());
    }
    loop {
        let snapshot: Vec<OrthogonalPart> = set.iter().copied().collect();
        let before = set.len();
        for &x in &snapshot {
            for &y in &snapshot {
                set.insert(x.compose(y));
                if set.len() > GROUP_CAP {
                    return Err(HolonomyError::GroupTooLarge { cap: GROUP_CAP });
                }
            }
        }
        if set.len() == before {
            break;
        }
    }
    let elements: Vec<OrthogonalPart> = set.into_iter().collect();
    let mut rotation_order: i64 = 1;
    let mut rotations = 0usize;
    for e in &elements {
        if !e.reflect {
            rotations += 1;
            rotation_order = lcm(rotation_order, e.turn.denominator());
        }
    }
    assert_eq!(
        rotations as i64, rotation_order,
        "rotation subgroup must be cyclic of order N"
    );
    Ok(HolonomyGroup {
        orientation_preserving: elements.iter().all(|e| !e.reflect),
        elements,
        rotation_order,
    })
}

fn lcm(a: i64, b: i64) -> i64 {
    let mut x = a;
    let mut y = b;
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    a / x * b
}

/// Flatness audit: finite holonomy plus, for surfaces with boundary, wall
/// directions that pairwise differ by rational multiples of π even after
/// applying every holonomy element.
#[derive(Debug, Clone)]
pub struct Flatness {
    pub verdict: bool,
    pub holonomy_order: usize,
    pub rotation_order: i64,
    pub orientation_preserving: bool,
    pub boundary: bool,
    /// Human-readable reasons when the verdict is false.
    pub failures: Vec<String>,
}

pub fn is_really_flat(surface: &FlatSurface) -> Result<Flatness, HolonomyError> {
    let developed = develop(surface)?;
    let group = holonomy_group(&developed)?;
    let walls = surface.walls();
    let mut failures = Vec::new();

    if !walls.is_empty() {
        // Developed wall directions mod π, then every image under the group
        // action: rotations shift the angle, reflections negate it.
        let mut dirs: Vec<f64> = Vec::new();
        for w in &walls {
            let ev = surface.polygons[w.polygon].edge_vec(w.edge);
            let dev = developed.linear[w.polygon].matrix().apply_vec(ev);
            let phi = dev.angle();
            for e in &group.elements {
                let image = if e.reflect {
                    e.angle() - phi
                } else {
                    e.angle() + phi
                };
                dirs.push(image.rem_euclid(PI));
            }
        }
        dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dirs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let base = dirs[0];
        let tol_ratio = surface.tol.eps_ang / PI;
        for &phi in &dirs[1..] {
            let ratio = (phi - base) / PI;
            let snap = snap_unit_fraction(ratio, surface.tol.q_max);
            if snap.best_err <= tol_ratio {
                if let Some((second, second_err)) = snap.second {
                    if second_err <= tol_ratio {
                        return Err(HolonomyError::RationalitySnapAmbiguous {
                            value: ratio,
                            first: snap.best.to_string(),
                            second: second.to_string(),
                        });
                    }
                }
            } else {
                failures.push(format!(
                    "wall directions differ by {ratio:.12} of π; best fraction {} is off by {:.3e}",
                    snap.best, snap.best_err
                ));
            }
        }
    }

    Ok(Flatness {
        verdict: failures.is_empty(),
        holonomy_order: group.order(),
        rotation_order: group.rotation_order,
        orientation_preserving: group.orientation_preserving,
        boundary: !walls.is_empty(),
        failures,
    })
}
