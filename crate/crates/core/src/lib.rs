//! Affine jump processes on finite lattice state spaces.
//!
//! The crate covers the full pipeline for such processes:
//!
//! * [`model`]: exact-rational state spaces, affine functionals and jump
//!   kernels, with validation and the Markov-chain embedding;
//! * [`counters`]: normalized jump counters, the pairwise counter relations
//!   and the affine change of coordinates into counter coordinates;
//! * [`classify`]: the one- and two-dimensional classification and the
//!   canonical example constructors;
//! * [`transforms`]: polynomial Riccati systems for `E_x[e^{⟨u, X_t⟩}]`, an
//!   adaptive complex ODE solver, closed forms and a uniformization oracle;
//! * [`simulate`]: exact path simulation, the layered hybrid (jump plus
//!   drift) simulator and Monte Carlo estimators;
//! * [`io`]: the JSON model format.

pub mod classify;
pub mod counters;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rational;
pub mod simulate;
pub mod transforms;

pub use model::{AffineFunctional, AffineMap, AffineModel, JumpChannel, JumpKernel, Point, StateSpace};
pub use rational::Rational;
