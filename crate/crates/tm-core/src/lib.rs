//! Arithmetic of prime fields, multiplicative character sums and the central
//! values of Dirichlet L-functions, organised around monomial Kloosterman-like
//! sums `K_{a,b,±c}(u; q)` and the twisted cubic moments they control.
//!
//! The crate is split along the natural layers of the computation:
//!
//! - [`ffield`]: prime fields, discrete logs, characters and Gauss sums;
//! - [`dft`]: arbitrary-length DFT used for all spectral (Mellin) transforms;
//! - [`trace`]: the sums `K_{a,b,±c}`, hypergeometric sums, Hasse–Davenport
//!   and closed-form identities, bilinear/trilinear cancellation measurements;
//! - [`triples`]: the combinatorial classification of exponent triples and
//!   their character multisets;
//! - [`boxcount`]: counts of monomial congruences in dyadic boxes and lattice
//!   minima;
//! - [`special`]: Γ-factor smoothing kernels, Hurwitz-zeta central L-values
//!   and the approximate functional equation;
//! - [`moments`]: twisted cubic moments, their even/odd and M₁/M₂
//!   decompositions, Dirichlet-series main terms and convergence studies;
//! - [`suite`]: the consolidated verification grids run by the CLI and the
//!   acceptance tests.

pub mod boxcount;
pub mod dft;
pub mod ffield;
pub mod moments;
pub mod special;
pub mod suite;
pub mod trace;
pub mod triples;

pub use num_complex::Complex64;
