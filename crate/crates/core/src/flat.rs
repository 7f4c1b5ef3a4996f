//! The model space `ℝ²ᵈ ≅ ℂᵈ` with the diagonal `Tᵈ` action.

use std::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metric::hessian_metric;
use crate::potential::{quadrant_guillemin, QuadrantPotential};

/// A point `Σ σ_j ⊗ (r_j, θ_j)`, i.e. `z_j = r_j e^{iθ_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatPoint {
    r: Vec<f64>,
    theta: Vec<f64>,
}

impl FlatPoint {
    /// Angles are reduced to `[0, 2π)`.
    pub fn new(r: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if r.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                context: "angles per radius",
                expected: r.len(),
                found: theta.len(),
            });
        }
        if let Some(index) = r.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::BoundaryDomain {
                index,
                value: r[index],
            });
        }
        let theta = theta.into_iter().map(|t| t.rem_euclid(TAU)).collect();
        Ok(Self { r, theta })
    }

    pub fn from_radii(r: Vec<f64>) -> Result<Self> {
        let theta = vec![0.0; r.len()];
        Self::new(r, theta)
    }

    pub fn d(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `z_j` as `(re, im)` pairs.
    pub fn cartesian(&self) -> Vec<(f64, f64)> {
        self.r
            .iter()
            .zip(&self.theta)
            .map(|(r, t)| (r * t.cos(), r * t.sin()))
            .collect()
    }

    /// Acts by `[a] ∈ Tᵈ`: `θ_j ↦ θ_j + a_j`.
    pub fn rotated(&self, a: &[f64]) -> Self {
        let theta = self.theta.iter().zip(a).map(|(t, a)| t + a).collect();
        Self::new(self.r.clone(), theta).expect("radii unchanged")
    }

    /// Componentwise positive rescaling `r_j ↦ t_j r_j`.
    pub fn scaled(&self, t: &[f64]) -> Result<Self> {
        let r = self.r.iter().zip(t).map(|(r, t)| r * t).collect();
        Self::new(r, self.theta.clone())
    }

    /// `|z|² = Σ r_j²`
    pub fn norm_squared(&self) -> f64 {
        self.r.iter().map(|r| r * r).sum()
    }
}

/// `μ(v) = ½ (r_1², …, r_d²)`
pub fn moment_map(v: &FlatPoint) -> Vec<f64> {
    v.r.iter().map(|r| 0.5 * r * r).collect()
}

/// The flat metric in the `(μ, t)` frame: `diag(1/(2μ_j), 2μ_j)`.
pub fn flat_metric_momentum(mu: &[f64]) -> Result<DMatrix<f64>> {
    if let Some(index) = mu.iter().position(|m| !(*m > 0.0)) {
        return Err(Error::BoundaryDomain {
            index,
            value: mu[index],
        });
    }
    let d = mu.len();
    let mut g = DMatrix::zeros(2 * d, 2 * d);
    for (j, m) in mu.iter().enumerate() {
        g[(j, j)] = 1.0 / (2.0 * m);
        g[(d + j, d + j)] = 2.0 * m;
    }
    Ok(g)
}

/// The same metric assembled as `Σ G̃_jk dμ dμ + F̃_jk dt dt` from the quadrant
/// Guillemin potential.
pub fn quadrant_hessian_metric(mu: &[f64]) -> Result<DMatrix<f64>> {
    let jet = quadrant_guillemin().jet(mu)?;
    let inverse = crate::potential::pd_inverse(&jet.hessian)?;
    Ok(hessian_metric(&jet.hessian, &inverse))
}

/// Pulls [`flat_metric_momentum`] back to Cartesian coordinates
/// `(Re z_1, …, Re z_d, Im z_1, …, Im z_d)` through the analytic Jacobian of
/// `(X, Y) ↦ (μ, t)` and returns `max |pullback − I|`.
pub fn cartesian_pullback_check(v: &FlatPoint) -> Result<f64> {
    if let Some(index) = v.r.iter().position(|r| !(*r > 0.0)) {
        return Err(Error::BoundaryDomain {
            index,
            value: v.r[index],
        });
    }
    let d = v.d();
    let g = flat_metric_momentum(&moment_map(v))?;
    // rows: (μ_j, t_j); columns: (X_j, Y_j)
    let mut jac = DMatrix::zeros(2 * d, 2 * d);
    for (j, (x, y)) in v.cartesian().into_iter().enumerate() {
        let r2 = v.r[j] * v.r[j];
        jac[(j, j)] = x;
        jac[(j, d + j)] = y;
        jac[(d + j, j)] = -y / r2;
        jac[(d + j, d + j)] = x / r2;
    }
    let pulled = jac.transpose() * g * jac;
    Ok((pulled - DMatrix::<f64>::identity(2 * d, 2 * d)).amax())
}
