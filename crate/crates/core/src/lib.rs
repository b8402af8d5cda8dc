//! Smooth loops, their tangent structure and principal loop bundles.

pub mod bundle;
pub mod complex;
pub mod error;
pub mod gauge;
pub mod harness;
pub mod linalg;
pub mod loop_core;
pub mod reconstruct;
pub mod report;
pub mod scalar;
pub mod tangent;
pub mod zoo;

pub use error::{Error, Result};
pub use loop_core::{AssociatorKind, LoopPoint, Region, SmoothLoop};
pub use report::{Case, VerificationReport};
pub use zoo::{loop_by_name, make_loop, LoopDescriptor, LoopKind, LoopSpec};
