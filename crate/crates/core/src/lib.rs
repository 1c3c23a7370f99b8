//! Topological data analysis under Bregman divergences.
//!
//! Build Čech, Vietoris–Rips and Delaunay radius functions over a point cloud
//! measured with a Bregman divergence, then compute persistence diagrams and
//! bottleneck distances.

pub mod circumball;
pub mod complexes;
pub mod delaunay;
pub mod divergence;
pub mod error;
pub mod io;
pub mod persistence;
pub mod simplex;

pub use circumball::{smallest_circumball, CircumballResult, SolverConfig};
pub use complexes::{
    cech_radius_function, complex_at, extract_intervals, no_interleaving_demo, rips_radius_function,
    BuildConfig, BuildStats, Entry, FiltrationKind, Interval, IntervalRole, NoInterleaving,
    RadiusFiltration, RadiusFunction,
};
pub use delaunay::{delaunay_radius_function, delaunay_triangulation, is_delaunay, DelaunayComplex};
pub use divergence::{DomainConstraint, DomainDescriptor, DualBall, Generator, GeneratorKind, PointCloud, PolarPoint};
pub use error::{Error, Result};
pub use persistence::{bottleneck_distance, compute_persistence, order_filtration, FiltrationOrder, PersistenceDiagram};
pub use simplex::Simplex;
