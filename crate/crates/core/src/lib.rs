//! Lower bounds for the centered Hardy–Littlewood maximal operator on the
//! real line.
//!
//! * [`stepfn`]: exact nonnegative step functions, the test-function class.
//! * [`maximal`]: exact `M`, `M_L`, `M_u` on step functions and certified
//!   lower envelopes for the iterates `M^n`.
//! * [`gfun`]: the `g_n` family and the constants `γ_n`.
//! * [`bounds`]: closed-form constants, including `ε_p`.
//! * [`verify`]: the verification harness and the extremal-ratio search.

pub mod bounds;
pub mod error;
pub mod gfun;
pub mod maximal;
pub mod quad;
pub mod stepfn;
pub mod verify;

pub use bounds::BoundsReport;
pub use error::{Error, Result};
pub use gfun::GammaTable;
pub use maximal::{CertifiedLowerStep, Grid, MaximalKind};
pub use stepfn::{PrefixIntegral, Rational, StepFunction};
