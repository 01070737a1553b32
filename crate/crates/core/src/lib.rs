//! Photon blockade in a two-cavity optomechanical system with dispersive and
//! dissipative coupling.
//!
//! Three model tiers are provided and cross-checked: Lindblad master-equation
//! numerics ([`liouvillian`]), closed-form weak-driving results ([`analytic`])
//! and noise-free mean-field dynamics ([`semiclassical`]). [`sweep`] drives
//! all of them over parameter grids.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod fock;
pub mod liouvillian;
pub mod model;
pub mod ode;
pub mod semiclassical;
pub mod sweep;

pub use error::{Error, Result};

/// Complex double, used for every amplitude and matrix entry.
pub type C64 = num_complex::Complex64;

pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
