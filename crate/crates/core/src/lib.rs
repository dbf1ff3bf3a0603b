//! Three-observer sequential CHSH tests with a tunable weak measurement.
//!
//! Alice and Bob share a singlet. Bob1 couples his photon to a path ancilla
//! with strength ε and reads only the ancilla, then passes the photon on to
//! Bob2, who measures it projectively. For ε between roughly 0.999 and 1.144
//! both the Alice–Bob1 and the Alice–Bob2 CHSH values exceed 2.
//!
//! - [`qcore`]: states, operators, tensor products, partial trace.
//! - [`sequential_chsh`]: the operator model, closed forms and derived quantities.
//! - [`apparatus`]: Jones-calculus model of the interferometric implementation.
//! - [`calibration`]: fitting glass-plate angle scans to estimate ε.
//! - [`montecarlo`]: Poissonian acquisition and CHSH estimators with errors.
//! - [`verify`]: the self-test suite behind `seqbell verify`.
//! - [`cli`]: the `seqbell` command line.

pub mod apparatus;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod qcore;
pub mod sequential_chsh;
pub mod verify;

pub use error::{Error, Result};
