//! Bound states from the two-turning-point quantization condition
//! `int p dx = pi hbar (n + 1/2)`, the matching phase-space state functions,
//! central-potential separation, and an independent finite-difference
//! reference solver.

// `!(a < b)` forms are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod potential;
pub mod quantizer;
pub mod radial;
pub mod state;

pub use classical::{
    action_integral, find_turning_points, phase_anchors, phase_map, ClassicalRegion, Edge, PhaseValue, RegionTag,
    TurningPointReport,
};
pub use error::{Error, Result};
pub use numerics::QuadratureConfig;
pub use oracle::{OracleBox, OracleConfig, OracleSpectrum};
pub use potential::{Bound, Domain, PhysicalConstants, PotentialDescriptor, PotentialKind, PotentialModel, Side};
pub use quantizer::{claim_audit, solve_level, spectrum, AuditReport, AuditRow, EnergyLevel, SolverConfig, Spectrum};
pub use radial::{radial_spectrum, AngularQuantumNumbers, RadialLevel, RadialSpectrum, SeparableState};
pub use state::{connection_check, evaluate_state, ConnectionReport, Parity, StateFunction, WavefunctionSample};
