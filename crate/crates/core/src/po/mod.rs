//! Physical-optics scattering from faceted PEC meshes.
//!
//! Time convention is `exp(+jωt)`: the incident field varies as
//! `exp(+j k û_tx·r)` and the scattered far field carries the factor
//! `exp(+j k (û_tx + û_rx)·r)` for a scatterer at `r`.

mod phase;
pub mod raytrace;
mod solver;

use thiserror::Error;

pub use phase::{facet_phase_integral, simplex_phase_integral, SERIES_THRESHOLD_RAD};
pub use solver::{
    bistatic_rcs_sweep, far_field, illuminate, sigma_dbsm, CVector3, CurrentMap, FieldSample,
    PlaneWaveExcitation, PoSolver, Polarization, RcsSample, SolverOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("mesh has no facets")]
    EmptyMesh,
    #[error("invalid excitation: {0}")]
    InvalidExcitation(String),
    #[error("currents were computed at {currents_hz} Hz but far field requested at {requested_hz} Hz")]
    FrequencyMismatch { currents_hz: f64, requested_hz: f64 },
    #[error("currents belong to a mesh with {expected} facets, got {got}")]
    MeshMismatch { expected: usize, got: usize },
    #[error("receiver azimuth list is empty")]
    EmptySweep,
}
