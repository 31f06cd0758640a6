//! Flat surfaces built from convex polygons with edge gluings.
//!
//! The crate validates surface descriptions, computes cone angles and
//! holonomy exactly (rational multiples of 2π), constructs doubles,
//! orientation doubles and translation covers, traces geodesic and billiard
//! flow, and runs seeded equidistribution experiments.

pub mod corpus;
pub mod covers;
pub mod ergodicity;
pub mod flow;
pub mod format;
pub mod geom;
pub mod holonomy;
pub mod loops;
pub mod rng;
pub mod surface;
pub mod turn;

pub use covers::{
    double, export_cover, lift_state, orientation_double, parse_cover, project_state,
    project_trajectory, verify_flat_cover, very_flat_cover, CoverError, CoverMap, DeckKind,
    GluingOrigin, Ramification, Sheet, VerificationReport,
};
pub use ergodicity::{
    birkhoff_average, build_partition, discrepancy_series, occupancy, run_experiment,
    space_average, test_function, Cell, CellPartition, ErgodicityError, ErgodicityReport,
    ExperimentConfig, Mode, SampleRecord, TestFunction,
};
pub use flow::{
    normalize_start, parallel_transport, trace_billiard, trace_geodesic, EventKind, FlowError,
    FlowState, Trajectory,
};
pub use format::{export_surface, parse_surface, surface_report, FormatError};
pub use geom::{signed_angle, v, Isometry, Vec2};
pub use holonomy::{
    develop, holonomy_group, is_really_flat, Developed, Flatness, HolonomyError, HolonomyGroup,
};
pub use loops::{evaluate_loop, generate_loops, LoopError, LoopHolonomy, PolygonalLoop};
pub use rng::Rng;
pub use surface::{
    ConePoint, Corner, EdgeRef, FlatSurface, Gluing, Polygon, SurfaceError, Tolerances,
};
pub use turn::{snap_ratio, snap_unit_fraction, FractionSnap, OrthogonalPart, RationalTurn};

/// Any error the engine can produce.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Ergodicity(#[from] ErgodicityError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Loop(#[from] LoopError),
}
