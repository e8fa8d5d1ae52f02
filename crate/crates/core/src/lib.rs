//! Deterministic simulator for coded distributed computing in the
//! map-shuffle-reduce model.
//!
//! `K` nodes map `N` files into `Q * N` intermediate values of `T` bits,
//! exchange what they lack over an error-free broadcast bus, and reduce.
//! Three shuffle schemes are implemented and bit-counted:
//!
//! * `uncoded`: every missing value is sent as-is;
//! * `cdc`: coded multicast, each message serving a whole group of nodes;
//! * `cdc-ld`: `cdc` messages rank-compressed over GF(2), sending a basis
//!   plus per-message combination coefficients.
//!
//! [`analytics`] holds the closed-form loads the counted bits are checked
//! against.

pub mod analytics;
pub mod codec;
pub mod engine;
pub mod error;
pub mod gf2;
pub mod placement;
pub mod workloads;

pub use analytics::{Load, LoadReport};
pub use engine::{run, RunResult, Scheme, ShuffleTranscript, Verification};
pub use error::{Error, Result};
pub use gf2::{BitVec, Gf2Matrix};
pub use placement::{make_placement, JobSpec, NodeSet, Placement};
pub use workloads::{IntermediateStore, ReduceOutput, Workload};
