//! Planar realization: arithmetic encoding into bands of the plane,
//! computation curves, a gradient field tracking machine steps, numerical
//! integration with height-crossing events, and the robustness harness.

mod curve;
mod encoding;
mod field;
mod harness;
mod integrate;
mod perturb;

pub use curve::{build_curve, ComputationCurve};
pub use encoding::{
    initial_point, interval_of, interval_of_phi, phi_encode, phi_of, rect_contains, u_rectangle,
    u_set_rectangles, PlanarEncoding,
};
pub use field::{build_potential, curve_gap, PlanarError, ScalarPotential, VectorField2};
pub use harness::{halting_flow_check, FlowInput, FlowParams, FlowReport, InputReport};
pub use integrate::{integrate, Crossing, IntegrateError, Trajectory};
pub use perturb::{perturb, PerturbationSpec, PerturbedField};
