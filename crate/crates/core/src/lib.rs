//! Roots of real-rooted polynomials under repeated differentiation.
//!
//! The engine finds the `n - 1` critical points of a polynomial with `n`
//! simple real roots by solving `sum_i 1/(r - x_i) = 0` on each gap between
//! consecutive roots, with the Cauchy sum evaluated by a near/far split whose
//! far part is tabulated on Chebyshev nodes. Around it sit harnesses that
//! check the Hermite limit of high derivatives of random polynomials, the
//! concentration of elementary symmetric polynomials, the conservation laws
//! of differentiation, and the rank-one projection analogue.

pub mod cauchy;
pub mod error;
pub mod evolve;
pub mod poly;
pub mod projections;
pub mod report;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use poly::{HermiteKind, MonicPoly, RootSet};
