//! Surface document I/O.
//!
//! Documents are JSON with two top-level arrays:
//!
//! ```json
//! {
//!   "gluings": [
//!     {"a": ["sq", 0], "b": ["sq", 2], "reflect": false, "turn": "0/1"}
//!   ],
//!   "polygons": [
//!     {"id": "sq", "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]}
//!   ]
//! }
//! ```
//!
//! `export_surface` writes a canonical form: keys in fixed order, gluing
//! sides ordered, gluings and polygons sorted, floats printed with 17
//! significant digits so they round-trip exactly, −0.0 normalized to 0.0.
//! Equal surfaces therefore export to identical bytes.

use serde::Deserialize;
use thiserror::Error;

use crate::geom::v;
use crate::surface::{EdgeRef, FlatSurface, Gluing, Polygon, SurfaceError, Tolerances};
use crate::turn::{OrthogonalPart, RationalTurn};
use crate::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error at line {line} column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate polygon id {id:?}")]
    DuplicatePolygonId { id: String },
    #[error("bad fraction {text:?}: expected \"p/q\" with integer p and positive integer q")]
    BadFraction { text: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    gluings: Vec<RawGluing>,
    polygons: Vec<RawPolygon>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolygon {
    id: String,
    vertices: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGluing {
    a: (String, usize),
    b: (String, usize),
    reflect: bool,
    turn: String,
}

fn parse_fraction(text: &str) -> Result<RationalTurn, FormatError> {
    let bad = || FormatError::BadFraction {
        text: text.to_string(),
    };
    let (p, q) = text.split_once('/').ok_or_else(bad)?;
    let p: i64 = p.trim().parse().map_err(|_| bad())?;
    let q: i64 = q.trim().parse().map_err(|_| bad())?;
    if q <= 0 {
        return Err(bad());
    }
    Ok(RationalTurn::new(p, q))
}

/// Parses and validates a surface document.
pub fn parse_surface(text: &str, tol: Tolerances) -> Result<FlatSurface, Error> {
    let raw: RawSurface = serde_json::from_str(text).map_err(|e| FormatError::SyntaxError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut index = std::collections::HashMap::new();
    for (i, p) in raw.polygons.iter().enumerate() {
        if index.insert(p.id.clone(), i).is_some() {
            return Err(FormatError::DuplicatePolygonId { id: p.id.clone() }.into());
        }
    }

    let polygons: Vec<Polygon> = raw
        .polygons
        .into_iter()
        .map(|p| Polygon::new(p.id, p.vertices.iter().map(|&[x, y]| v(x, y)).collect()))
        .collect();

    let mut gluings = Vec::with_capacity(raw.gluings.len());
    for (gi, g) in raw.gluings.iter().enumerate() {
        let turn = parse_fraction(&g.turn)?;
        let resolve = |(id, edge): &(String, usize)| -> Result<EdgeRef, Error> {
            let polygon = *index
                .get(id.as_str())
                .ok_or(SurfaceError::DanglingEdgeRef { gluing: gi })?;
            Ok(EdgeRef {
                polygon,
                edge: *edge,
            })
        };
        gluings.push(Gluing {
            a: resolve(&g.a)?,
            b: resolve(&g.b)?,
            part: if g.reflect {
                OrthogonalPart::reflection(turn)
            } else {
                OrthogonalPart::rotation(turn)
            },
        });
    }

    Ok(FlatSurface::new(polygons, gluings, tol)?)
}

/// 17 significant digits; round-trips through parsing exactly.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.16e}", x)
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

/// Canonical surface document.
pub fn export_surface(surface: &FlatSurface) -> String {
    let mut order: Vec<usize> = (0..surface.polygons.len()).collect();
    order.sort_by(|&i, &j| surface.polygons[i].id.cmp(&surface.polygons[j].id));

    let side_key = |e: EdgeRef| (surface.polygons[e.polygon].id.as_str(), e.edge);
    let mut gluings: Vec<(EdgeRef, EdgeRef, bool, RationalTurn)> = surface
        .gluings
        .iter()
        .map(|g| {
            // Orient each pair so the lexicographically smaller side is a;
            // swapping sides inverts the isometry.
            if side_key(g.a) <= side_key(g.b) {
                (g.a, g.b, g.part.reflect, g.part.turn)
            } else {
                (g.b, g.a, g.part.reflect, g.part.inverse().turn)
            }
        })
        .collect();
    gluings.sort_by(|x, y| side_key(x.0).cmp(&side_key(y.0)));

    let mut out = String::from("{\n  \"gluings\": [");
    for (i, (a, b, reflect, turn)) in gluings.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str(&format!(
            "    {{\"a\": [{}, {}], \"b\": [{}, {}], \"reflect\": {}, \"turn\": {}}}",
            json_str(&surface.polygons[a.polygon].id),
            a.edge,
            json_str(&surface.polygons[b.polygon].id),
            b.edge,
            reflect,
            json_str(&turn.to_string()),
        ));
    }
    out.push_str(if gluings.is_empty() {
        "],\n"
    } else {
        "\n  ],\n"
    });

    out.push_str("  \"polygons\": [");
    for (i, &pi) in order.iter().enumerate() {
        let p = &surface.polygons[pi];
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let verts: Vec<String> = p
            .vertices
            .iter()
            .map(|q| format!("[{}, {}]", fmt_float(q.x), fmt_float(q.y)))
            .collect();
        out.push_str(&format!(
            "    {{\"id\": {}, \"vertices\": [{}]}}",
            json_str(&p.id),
            verts.join(", ")
        ));
    }
    out.push_str(if order.is_empty() { "]\n" } else { "\n  ]\n" });
    out.push_str("}\n");
    out
}

/// Validation summary: fixed key order, canonical floats, byte-stable for
/// equal surfaces.
pub fn surface_report(surface: &FlatSurface) -> String {
    let mut out = String::from("surface report\n");
    out.push_str(&format!("polygons: {}\n", surface.polygons.len()));
    out.push_str(&format!("gluings: {}\n", surface.gluings.len()));
    out.push_str(&format!("boundary-walls: {}\n", surface.walls().len()));
    out.push_str(&format!("area: {}\n", fmt_float(surface.area())));
    out.push_str(&format!(
        "euler-characteristic: {}\n",
        surface.euler_characteristic()
    ));
    out.push_str(&format!("orientable: {}\n", surface.is_orientable()));
    let singular = surface.singular_points().len();
    out.push_str(&format!(
        "cone-points: {} ({} singular)\n",
        surface.cone_points().len(),
        singular
    ));
    for cone in surface.cone_points() {
        let kind = if cone.boundary {
            "boundary"
        } else {
            "interior"
        };
        let exact = match cone.exact {
            Some(e) => e.to_string(),
            None => "irrational".to_string(),
        };
        let tag = if cone.is_singular() { " singular" } else { "" };
        out.push_str(&format!(
            "  {}: {} angle {} ({} rad){}\n",
            cone.label(&surface.polygons),
            kind,
            exact,
            fmt_float(cone.angle),
            tag
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = r#"{
        "gluings": [
            {"a": ["sq", 0], "b": ["sq", 2], "reflect": false, "turn": "0/1"},
            {"a": ["sq", 1], "b": ["sq", 3], "reflect": false, "turn": "0/1"}
        ],
        "polygons": [
            {"id": "sq", "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]}
        ]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let s = parse_surface(TORUS, Tolerances::default()).unwrap();
        assert_eq!(s.polygons.len(), 1);
        assert_eq!(s.gluings.len(), 2);
        let text = export_surface(&s);
        let s2 = parse_surface(&text, Tolerances::default()).unwrap();
        assert_eq!(export_surface(&s2), text);
    }

    #[test]
    fn canonical_form_ignores_input_ordering() {
        // Same torus with gluing order reversed and one gluing written from
        // the other side (inverse turn).
        let scrambled = r#"{
            "gluings": [
                {"a": ["sq", 3], "b": ["sq", 1], "reflect": false, "turn": "0/1"},
                {"a": ["sq", 2], "b": ["sq", 0], "reflect": false, "turn": "0/1"}
            ],
            "polygons": [
                {"id": "sq", "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]}
            ]
        }"#;
        let a = parse_surface(TORUS, Tolerances::default()).unwrap();
        let b = parse_surface(scrambled, Tolerances::default()).unwrap();
        assert_eq!(export_surface(&a), export_surface(&b));
    }

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[
            0.0,
            -0.0,
            1.0,
            0.1,
            -1.0 / 3.0,
            2.0_f64.sqrt(),
            1e-300,
            3.5e17,
        ] {
            let printed = fmt_float(x);
            let back: f64 = printed.parse().unwrap();
            let want = if x == 0.0 { 0.0 } else { x };
            assert_eq!(back.to_bits(), want.to_bits(), "{printed}");
        }
    }

    #[test]
    fn reports_syntax_position() {
        let err = parse_surface("{\n  \"polygons\": [,]\n}", Tolerances::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn rejects_bad_fraction_and_duplicate_id() {
        let bad_turn = TORUS.replace("\"0/1\"", "\"0.5\"");
        let err = parse_surface(&bad_turn, Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("bad fraction"), "{err}");

        let zero_den = TORUS.replace("\"0/1\"", "\"1/0\"");
        assert!(parse_surface(&zero_den, Tolerances::default()).is_err());

        let dup = r#"{
            "gluings": [],
            "polygons": [
                {"id": "p", "vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]},
                {"id": "p", "vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]}
            ]
        }"#;
        let err = parse_surface(dup, Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("duplicate polygon id"), "{err}");
    }

    #[test]
    fn rejects_unknown_polygon_reference() {
        let missing = TORUS.replace("[\"sq\", 2]", "[\"nope\", 2]");
        let err = parse_surface(&missing, Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("missing polygon"), "{err}");
    }
}
