//! Quantum surrogate modelling core.
//!
//! Everything in this crate is allocation-only numerics (`no_std` + `alloc`):
//!
//! * [`sim`] - dense statevector simulation of the RX/RY/RZ/H/CNOT/CZ gate set,
//!   Z-string expectations and parameter-shift gradients.
//! * [`circuit`] - the layered QNN circuit (angle-encoding feature map with
//!   parallel encoding and data re-uploading, "circuit 11" / "circuit 9" ansatz blocks).
//! * [`optimize`] - COBYLA and ADAM.
//! * [`qnn`] - the quantum surrogate model and its COBYLA training loop.
//! * [`ann`] - the small classical MLP baseline trained with ADAM.
//! * [`bench`] - Griewank / Schwefel / Styblinski-Tang, grid sampling and output noise.
//! * [`metrics`] - R2 scoring.
//! * [`hardware`] - gate budgets and circuit survival rates on noisy hardware.
//!
//! Qubit 0 is the least-significant bit of a basis-state index.

#![no_std]
// `!(x > 0.0)` is deliberate: it rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read closer to the linear algebra they implement.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ann;
pub mod bench;
pub mod circuit;
mod error;
pub mod hardware;
pub mod metrics;
pub mod optimize;
pub mod qnn;
pub mod rng;
pub mod scaler;
pub mod sim;

pub use error::{Error, Result};
