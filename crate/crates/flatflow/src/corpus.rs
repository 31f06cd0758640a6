//! Bundled example surfaces.
//!
//! Every entry exists twice: as a programmatic builder and as the
//! canonical document it exports to, committed under `corpus/` together
//! with its expected validation report. The committed bytes pin the
//! serialization format; `cargo run --example regen_corpus` rewrites them
//! and must be a no-op until the format deliberately changes.

use crate::covers::{double, very_flat_cover};
use crate::format::parse_surface;
use crate::geom::{v, Vec2};
use crate::surface::{EdgeRef, FlatSurface, Gluing, Polygon, Tolerances};
use crate::turn::{OrthogonalPart, RationalTurn};
use crate::Error;

use std::f64::consts::TAU;

pub const NAMES: [&str; 9] = [
    "torus",
    "square-table",
    "pillowcase",
    "triangle-table",
    "triangle-double",
    "triangle-unfolded",
    "octagon",
    "klein",
    "wedge-table",
];

/// Committed canonical document for a corpus surface.
pub fn document(name: &str) -> Option<&'static str> {
    Some(match name {
        "torus" => include_str!("../corpus/torus.surf"),
        "square-table" => include_str!("../corpus/square-table.surf"),
        "pillowcase" => include_str!("../corpus/pillowcase.surf"),
        "triangle-table" => include_str!("../corpus/triangle-table.surf"),
        "triangle-double" => include_str!("../corpus/triangle-double.surf"),
        "triangle-unfolded" => include_str!("../corpus/triangle-unfolded.surf"),
        "octagon" => include_str!("../corpus/octagon.surf"),
        "klein" => include_str!("../corpus/klein.surf"),
        "wedge-table" => include_str!("../corpus/wedge-table.surf"),
        _ => return None,
    })
}

/// Committed expected validation report.
pub fn expected_report(name: &str) -> Option<&'static str> {
    Some(match name {
        "torus" => include_str!("../corpus/torus.report"),
        "square-table" => include_str!("../corpus/square-table.report"),
        "pillowcase" => include_str!("../corpus/pillowcase.report"),
        "triangle-table" => include_str!("../corpus/triangle-table.report"),
        "triangle-double" => include_str!("../corpus/triangle-double.report"),
        "triangle-unfolded" => include_str!("../corpus/triangle-unfolded.report"),
        "octagon" => include_str!("../corpus/octagon.report"),
        "klein" => include_str!("../corpus/klein.report"),
        "wedge-table" => include_str!("../corpus/wedge-table.report"),
        _ => return None,
    })
}

/// Parses the committed document.
pub fn load(name: &str) -> Result<FlatSurface, Error> {
    let doc = document(name).unwrap_or_else(|| panic!("unknown corpus surface {name:?}"));
    parse_surface(doc, Tolerances::default())
}

/// Builds the surface from scratch; exports to the committed bytes.
pub fn build(name: &str) -> Result<FlatSurface, Error> {
    Ok(match name {
        "torus" => torus()?,
        "square-table" => square_table()?,
        "pillowcase" => pillowcase()?,
        "triangle-table" => triangle_table()?,
        "triangle-double" => double(&triangle_table()?)?.total,
        "triangle-unfolded" => very_flat_cover(&double(&triangle_table()?)?.total)?.total,
        "octagon" => octagon()?,
        "klein" => klein()?,
        "wedge-table" => wedge_table()?,
        _ => panic!("unknown corpus surface {name:?}"),
    })
}

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

/// Unit square with opposite sides identified by translation.
pub fn torus() -> Result<FlatSurface, Error> {
    let g = vec![
        gluing((0, 0), (0, 2), RationalTurn::ZERO, false),
        gluing((0, 1), (0, 3), RationalTurn::ZERO, false),
    ];
    Ok(FlatSurface::new(
        vec![unit_square("sq")],
        g,
        Tolerances::default(),
    )?)
}

/// Unit square with four walls.
pub fn square_table() -> Result<FlatSurface, Error> {
    Ok(FlatSurface::new(
        vec![unit_square("sq")],
        vec![],
        Tolerances::default(),
    )?)
}

/// Two unit squares glued by reflections along all four sides; four cone
/// points of angle π.
pub fn pillowcase() -> Result<FlatSurface, Error> {
    let turns = [0, 1, 0, 1];
    let g: Vec<Gluing> = (0..4)
        .map(|e| gluing((0, e), (1, e), RationalTurn::new(turns[e], 2), true))
        .collect();
    Ok(FlatSurface::new(
        vec![unit_square("front"), unit_square("back")],
        g,
        Tolerances::default(),
    )?)
}

/// Right isoceles triangle table with angles π/2, π/4, π/4.
pub fn triangle_table() -> Result<FlatSurface, Error> {
    let p = Polygon::new("tri", vec![v(0.0, 0.0), v(1.0, 0.0), v(0.0, 1.0)]);
    Ok(FlatSurface::new(vec![p], vec![], Tolerances::default())?)
}

/// Regular octagon with opposite sides identified by translation: a genus
/// two translation surface with one cone point of angle 6π.
pub fn octagon() -> Result<FlatSurface, Error> {
    let p = Polygon::new(
        "oct",
        (0..8)
            .map(|k| Vec2::from_angle((2 * k + 1) as f64 * TAU / 16.0))
            .collect(),
    );
    let g = (0..4)
        .map(|e| gluing((0, e), (0, e + 4), RationalTurn::ZERO, false))
        .collect();
    Ok(FlatSurface::new(vec![p], g, Tolerances::default())?)
}

/// Unit square with one translation pair and one reflecting pair: a flat
/// Klein bottle.
pub fn klein() -> Result<FlatSurface, Error> {
    let g = vec![
        gluing((0, 0), (0, 2), RationalTurn::ZERO, false),
        gluing((0, 1), (0, 3), RationalTurn::ZERO, true),
    ];
    Ok(FlatSurface::new(
        vec![unit_square("sq")],
        g,
        Tolerances::default(),
    )?)
}

/// Triangular table with angles π/2, π/8 and 3π/8; every corner is a
/// rational multiple of π, so the table is really flat.
pub fn wedge_table() -> Result<FlatSurface, Error> {
    let h = (TAU / 16.0).tan();
    let p = Polygon::new("wedge", vec![v(0.0, 0.0), v(1.0, 0.0), v(0.0, h)]);
    Ok(FlatSurface::new(vec![p], vec![], Tolerances::default())?)
}
