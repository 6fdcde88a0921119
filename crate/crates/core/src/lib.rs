//! Lowering pipeline from Turing machines to conjugate dynamical systems.
//!
//! The stages, each with machine-checked semantic preservation:
//!
//! 1. [`machine`] — machines over {0,1} with tape-shift step semantics.
//! 2. [`gshift`] — generalized shifts conjugate to the machine step.
//! 3. [`cantor`] — square-Cantor-set points and affine block maps.
//! 4. [`dynamics`] — reachability, suspension flows and the rigid-rotation
//!    control.
//! 5. [`planar`] — a planar gradient field whose trajectories track
//!    configurations band by band.
//! 6. [`beltrami`] — exact truncated power-series extension of planar
//!    gradient data to a field parallel to its curl.

pub mod beltrami;
pub mod cantor;
pub mod dynamics;
pub mod gshift;
pub mod machine;
pub mod planar;
pub mod samples;
pub mod svg;
