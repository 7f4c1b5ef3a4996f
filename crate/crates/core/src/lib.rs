//! Delzant construction and Guillemin Kähler metrics for toric symplectic
//! manifolds and orbifolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] – exact integer linear algebra (Smith normal form, kernels).
//! * [`polytope`] – labelled polytopes, vertex enumeration, Delzant tests.
//! * [`potential`] – dual/Kähler potentials and their derivatives on `Δ₀`.
//! * [`legendre`] – the Legendre map `x ↦ y = ∇G(x)` and its inverse.
//! * [`flat`] – the model space `ℂᵈ` with its torus action.
//! * [`quotient`] – level sets, the induced momentum map and the Kempf–Ness projection.
//! * [`metric`] – the toric Kähler structure `(g, ω, J)` in momentum-angle coordinates.
//! * [`sampling`] – seeded random interior points and flat points.
//! * [`checks`] – the invariant suite run by `mforge check`.

pub mod error;
mod exact;
pub mod lattice;
pub mod polytope;
pub mod potential;
pub mod legendre;
pub mod flat;
pub mod metric;
pub mod quotient;
pub mod sampling;
pub mod checks;

pub use error::{Error, InvalidPolytope, Result};
pub use exact::Rational;

/// Numerical thresholds shared by the evaluators and solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `ℓ_j(x)` must exceed this for `x` to count as interior.
    pub boundary: f64,
    /// Legendre inversion stops when `‖∇G(x) − y‖∞` drops below this.
    pub newton: f64,
    /// Kempf–Ness projection stops when the level residual drops below this.
    pub kn: f64,
    /// Matrix identities (`J² = −1`, `G·F = 1`, ...).
    pub lin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            boundary: 1e-9,
            newton: 1e-10,
            kn: 1e-10,
            lin: 1e-10,
        }
    }
}
