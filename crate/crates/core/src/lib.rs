//! Zeros of the two-term quasipolynomial `f(z) = exp(z) + a z^k`.
//!
//! * [`eval`]: overflow-safe evaluation of `f`, `f'`, the band coordinates
//!   `sigma_S`, and the ratio forms used by the lower bounds.
//! * [`regions`]: classification of the plane into inner disk, band and the
//!   two zero-free sides, level curves, and the sector radius.
//! * [`zeros`]: the asymptotic seeds, the two refiners, enumeration of the
//!   zero chain, spacing statistics and small zeros.
//! * [`oracle`]: argument-principle counts on rectangles and disks, and
//!   quadtree isolation. Everything else is checked against it.
//! * [`bounds`]: sampled verification of the lower bounds on `|f|` and the
//!   band cells cut by horizontal lines.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod eval;
pub mod oracle;
pub mod regions;
pub mod zeros;

pub use error::{Error, Result};
pub use eval::{Family, Quasipolynomial, Ratio, Scaled};
pub use num_complex::Complex64;
