//! Python bindings: thin wrappers over the engine types plus dict-shaped
//! reports. Loaded as `flatflow._native` by the pure-python package.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use flatflow::format::fmt_float;
use flatflow::{
    develop, double, export_cover, export_surface, holonomy_group, is_really_flat,
    orientation_double, parse_surface, run_experiment, surface_report, trace_billiard,
    trace_geodesic, verify_flat_cover, very_flat_cover, CoverMap, DeckKind, EventKind,
    ExperimentConfig, FlatSurface, FlowState, Mode, Tolerances, Trajectory, Vec2,
};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Validated flat surface; immutable once parsed.
#[pyclass(frozen, name = "Surface", module = "flatflow")]
struct PySurface {
    inner: FlatSurface,
}

#[pymethods]
impl PySurface {
    /// Parses and validates a canonical surface document.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = parse_surface(text, Tolerances::default()).map_err(value_err)?;
        Ok(PySurface { inner })
    }

    /// Canonical document for this surface; parse(export()) round-trips.
    fn export(&self) -> String {
        export_surface(&self.inner)
    }

    fn report(&self) -> String {
        surface_report(&self.inner)
    }

    #[getter]
    fn area(&self) -> f64 {
        self.inner.area()
    }

    #[getter]
    fn euler_characteristic(&self) -> i64 {
        self.inner.euler_characteristic()
    }

    #[getter]
    fn orientable(&self) -> bool {
        self.inner.is_orientable()
    }

    #[getter]
    fn boundary(&self) -> bool {
        self.inner.has_boundary()
    }

    #[getter]
    fn polygons(&self) -> Vec<String> {
        self.inner.polygons.iter().map(|p| p.id.clone()).collect()
    }

    fn cone_points<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let out = PyList::empty(py);
        for cone in self.inner.cone_points() {
            let d = PyDict::new(py);
            d.set_item("label", cone.label(&self.inner.polygons))?;
            d.set_item("angle", cone.angle)?;
            d.set_item("exact", cone.exact.map(|e| e.to_string()))?;
            d.set_item("boundary", cone.boundary)?;
            d.set_item("singular", cone.is_singular())?;
            out.append(d)?;
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Surface(polygons={}, area={}, chi={})",
            self.inner.polygons.len(),
            fmt_float(self.inner.area()),
            self.inner.euler_characteristic()
        )
    }
}

/// Flat covering map; `base` and `total` are full surfaces.
#[pyclass(frozen, name = "Cover", module = "flatflow")]
struct PyCover {
    inner: CoverMap,
}

#[pymethods]
impl PyCover {
    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree
    }

    #[getter]
    fn deck(&self) -> String {
        match self.inner.deck_kind {
            DeckKind::Flip => "flip".to_string(),
            DeckKind::Cyclic => format!("cyclic of order {}", self.inner.degree),
        }
    }

    #[getter]
    fn base(&self) -> PySurface {
        PySurface {
            inner: self.inner.base.clone(),
        }
    }

    #[getter]
    fn total(&self) -> PySurface {
        PySurface {
            inner: self.inner.total.clone(),
        }
    }

    /// Sidecar map document relating base and total.
    fn export_map(&self) -> String {
        export_cover(&self.inner)
    }

    /// Runs the covering-axiom checks; returns (passed, report text).
    #[pyo3(signature = (seed = 0))]
    fn verify(&self, seed: u64) -> (bool, String) {
        let report = verify_flat_cover(&self.inner, seed);
        (report.passed(), report.to_string())
    }

    fn __repr__(&self) -> String {
        format!(
            "Cover(degree={}, base_polygons={}, total_polygons={})",
            self.inner.degree,
            self.inner.base.polygons.len(),
            self.inner.total.polygons.len()
        )
    }
}

/// Holonomy group and really-flat audit as a dict.
#[pyfunction]
fn holonomy<'py>(py: Python<'py>, surface: &PySurface) -> PyResult<Bound<'py, PyDict>> {
    let developed = develop(&surface.inner).map_err(value_err)?;
    let group = holonomy_group(&developed).map_err(value_err)?;
    let flat = is_really_flat(&surface.inner).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("rotation_order", group.rotation_order)?;
    d.set_item("order", group.order())?;
    d.set_item("orientation_preserving", group.orientation_preserving)?;
    let elements: Vec<String> = group.elements.iter().map(|e| e.to_string()).collect();
    d.set_item("elements", elements)?;
    d.set_item("really_flat", flat.verdict)?;
    d.set_item("failures", flat.failures.clone())?;
    Ok(d)
}

#[pyfunction(name = "double")]
fn double_py(surface: &PySurface) -> PyResult<PyCover> {
    Ok(PyCover {
        inner: double(&surface.inner).map_err(value_err)?,
    })
}

#[pyfunction]
fn orient(surface: &PySurface) -> PyResult<PyCover> {
    Ok(PyCover {
        inner: orientation_double(&surface.inner).map_err(value_err)?,
    })
}

/// Full pipeline to a translation surface: double if bordered, orient if
/// non-orientable, then kill the rotation holonomy. Returns the stages in
/// order; the last stage's total has trivial holonomy.
#[pyfunction]
fn unfold(surface: &PySurface) -> PyResult<Vec<PyCover>> {
    let mut current = surface.inner.clone();
    let mut stages = Vec::new();
    if current.has_boundary() {
        let cover = double(&current).map_err(value_err)?;
        current = cover.total.clone();
        stages.push(PyCover { inner: cover });
    }
    if !current.is_orientable() {
        let cover = orientation_double(&current).map_err(value_err)?;
        current = cover.total.clone();
        stages.push(PyCover { inner: cover });
    }
    let cover = very_flat_cover(&current).map_err(value_err)?;
    stages.push(PyCover { inner: cover });
    Ok(stages)
}

fn state_dict<'py>(
    py: Python<'py>,
    surface: &FlatSurface,
    state: &FlowState,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("polygon", surface.polygons[state.polygon].id.clone())?;
    d.set_item("point", (state.point.x, state.point.y))?;
    d.set_item("direction", (state.dir.x, state.dir.y))?;
    Ok(d)
}

fn trajectory_dict<'py>(
    py: Python<'py>,
    surface: &FlatSurface,
    traj: &Trajectory,
) -> PyResult<Bound<'py, PyDict>> {
    let events = PyList::empty(py);
    for e in &traj.events {
        let d = PyDict::new(py);
        d.set_item("t", e.t)?;
        d.set_item("polygon", surface.polygons[e.polygon].id.clone())?;
        d.set_item("exit", (e.exit_point.x, e.exit_point.y))?;
        let (kind, index) = match e.kind {
            EventKind::Crossing { gluing, .. } => ("crossing", gluing),
            EventKind::Reflection { edge } => ("reflection", edge),
        };
        d.set_item("kind", kind)?;
        d.set_item("index", index)?;
        events.append(d)?;
    }
    let d = PyDict::new(py);
    d.set_item("length", traj.length)?;
    d.set_item("start", state_dict(py, surface, &traj.start)?)?;
    d.set_item("events", events)?;
    d.set_item("end", state_dict(py, surface, &traj.end)?)?;
    Ok(d)
}

/// Traces straight-line flow from (polygon, point) along `direction`.
/// Billiard mode reflects at walls; geodesic mode rejects them.
#[pyfunction(signature = (surface, polygon, point, direction, length, billiard = false))]
fn trace<'py>(
    py: Python<'py>,
    surface: &PySurface,
    polygon: &str,
    point: (f64, f64),
    direction: (f64, f64),
    length: f64,
    billiard: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let idx = surface
        .inner
        .polygon_index(polygon)
        .ok_or_else(|| value_err(format!("no polygon named {polygon:?}")))?;
    let dir = Vec2 {
        x: direction.0,
        y: direction.1,
    };
    if dir.norm() == 0.0 {
        return Err(value_err("direction must be nonzero"));
    }
    let state = FlowState::new(
        idx,
        Vec2 {
            x: point.0,
            y: point.1,
        },
        dir.unit(),
    );
    let traj = if billiard {
        trace_billiard(&surface.inner, state, length)
    } else {
        trace_geodesic(&surface.inner, state, length)
    }
    .map_err(runtime_err)?;
    trajectory_dict(py, &surface.inner, &traj)
}

/// Runs a seeded equidistribution experiment; returns the rendered report
/// plus the headline numbers.
#[pyfunction(signature = (surface, mode, samples = 20, length = 1e4, depth = 2, seed = 0))]
fn ergodicity<'py>(
    py: Python<'py>,
    surface: &PySurface,
    mode: &str,
    samples: usize,
    length: f64,
    depth: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode: Mode = mode.parse().map_err(value_err)?;
    let config = ExperimentConfig::new(mode, samples, length, depth, seed);
    let report = run_experiment(&surface.inner, &config).map_err(runtime_err)?;
    let d = PyDict::new(py);
    d.set_item("report", report.render())?;
    d.set_item("verdict", report.verdict)?;
    d.set_item("passing", report.passing)?;
    d.set_item("samples", report.samples.len())?;
    d.set_item("median_first", report.median_first)?;
    d.set_item("median_final", report.median_final)?;
    d.set_item("q90_final", report.q90_final)?;
    d.set_item("max_final", report.max_final)?;
    d.set_item("checkpoints", report.checkpoints.clone())?;
    Ok(d)
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySurface>()?;
    m.add_class::<PyCover>()?;
    m.add_function(wrap_pyfunction!(holonomy, m)?)?;
    m.add_function(wrap_pyfunction!(double_py, m)?)?;
    m.add_function(wrap_pyfunction!(orient, m)?)?;
    m.add_function(wrap_pyfunction!(unfold, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(ergodicity, m)?)?;
    Ok(())
}
