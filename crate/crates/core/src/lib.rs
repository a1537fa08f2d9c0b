//! Left-invariant parallel spinor flows on simply connected three-dimensional
//! Lie groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: fixed-size frame tensors, structure constants, Levi-Civita
//!   connections and curvature in orthonormal frames.
//! * [`cauchy`]: parallel Cauchy pairs with validation against the algebraic
//!   system, table-row matching, group classification and the vacuum
//!   constraints.
//! * [`lapse`]: lapse profiles `β_t` and their integrals `ℬ_t`.
//! * [`exact`]: closed-form evolution of the shape operator, the coframe
//!   transform, the induced metrics, the Hamiltonian and the lifespan.
//! * [`numeric`]: an RK4 integrator for the same system, used as an
//!   independent oracle, and residual monitors.
//! * [`lorentz`]: the Lorentzian four-metric `g = −β_t² dt² + h_t`, its
//!   frame Ricci tensor and the Dirac current data.
//! * [`verify`]: invariant suites shared by the CLI and the test-suites.

pub mod cauchy;
pub mod error;
pub mod exact;
pub mod lapse;
pub mod lorentz;
pub mod numeric;
pub mod tensor;
pub mod verify;

pub use cauchy::{
    CauchyPair, ConstraintReport, GroupType, TableRow, ThetaInvariants, Tolerance,
    ValidationReport, Violation,
};
pub use error::{FlowError, Result};
pub use exact::{Boundary, ClosedFormFlow, FlowBranch, FrameTransform, Lifespan};
pub use lapse::LapseProfile;
pub use tensor::{Mat3, Sym3};
