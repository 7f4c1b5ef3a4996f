//! Dual (symplectic) and Kähler potentials on the open polytope `Δ₀`.
//!
//! Two routes produce a [`PotentialSample`]:
//!
//! * [`guillemin_sample`] evaluates the closed forms
//!   `G = ½ Σ ℓ_j log ℓ_j`, `F = ½ Σ (λ_j log ℓ_j + ℓ_j)` and
//!   `G_rs = Σ_j u_jr u_js / (2ℓ_j)` directly;
//! * [`pullback_sample`] pulls any convex function on the positive quadrant
//!   of `ℝᵈ*` back along the affine embedding `ℓ`, using the chain rule.
//!
//! Both fix the additive constant of `F` so that
//! `F + G − ⟨x, y⟩ = −½ Σ λ_j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polytope::LabelledPolytope;
use crate::Tolerances;

/// Everything the metric code needs at one interior point.
#[derive(Clone, Debug)]
pub struct PotentialSample {
    pub x: Vec<f64>,
    pub ell: Vec<f64>,
    /// Dual potential `G(x)`.
    pub g: f64,
    /// `y = ∇G(x)`.
    pub y: Vec<f64>,
    pub hess_g: DMatrix<f64>,
    /// Kähler potential `F(x)`.
    pub f: f64,
    /// `(Hess G)⁻¹`.
    pub hess_f: DMatrix<f64>,
}

/// Value, gradient and Hessian of a function at one point.
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// A smooth convex function on the open positive quadrant of `ℝᵈ*`.
pub trait QuadrantPotential: Send + Sync {
    fn jet(&self, mu: &[f64]) -> Result<Jet>;
}

/// `G̃(μ) = ½ Σ μ_j log μ_j`, the reduced potential of the flat metric on `ℂᵈ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GuilleminQuadrant;

pub fn quadrant_guillemin() -> GuilleminQuadrant {
    GuilleminQuadrant
}

impl QuadrantPotential for GuilleminQuadrant {
    fn jet(&self, mu: &[f64]) -> Result<Jet> {
        check_positive(mu, 0.0)?;
        let value = 0.5 * mu.iter().map(|m| m * m.ln()).sum::<f64>();
        let gradient = DVector::from_iterator(mu.len(), mu.iter().map(|m| 0.5 * (m.ln() + 1.0)));
        let hessian = DMatrix::from_diagonal(&DVector::from_iterator(
            mu.len(),
            mu.iter().map(|m| 0.5 / m),
        ));
        Ok(Jet {
            value,
            gradient,
            hessian,
        })
    }
}

/// `G̃(μ) = ½ Σ μ_j²`, restricted to the quadrant.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuadraticQuadrant;

impl QuadrantPotential for QuadraticQuadrant {
    fn jet(&self, mu: &[f64]) -> Result<Jet> {
        check_positive(mu, 0.0)?;
        Ok(Jet {
            value: 0.5 * mu.iter().map(|m| m * m).sum::<f64>(),
            gradient: DVector::from_column_slice(mu),
            hessian: DMatrix::identity(mu.len(), mu.len()),
        })
    }
}

fn check_positive(values: &[f64], threshold: f64) -> Result<()> {
    match values.iter().position(|&v| !(v > threshold)) {
        Some(index) => Err(Error::BoundaryDomain {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// `ℓ_j(x) = ⟨x, u_j⟩ − λ_j`, defined on all of `ℝⁿ*`.
pub fn ell(p: &LabelledPolytope, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(p, x)?;
    Ok(p.ell(x))
}

fn check_dim(p: &LabelledPolytope, x: &[f64]) -> Result<()> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "point dimension",
            expected: p.dim(),
            found: x.len(),
        });
    }
    Ok(())
}

/// Closed-form Guillemin potentials at an interior point.
pub fn guillemin_sample(p: &LabelledPolytope, x: &[f64], tol: &Tolerances) -> Result<PotentialSample> {
    check_dim(p, x)?;
    let ell = p.ell(x);
    check_positive(&ell, tol.boundary)?;
    let n = p.dim();
    let lambda = p.lambda_f64();

    let mut g = 0.0;
    let mut f = 0.0;
    let mut y = vec![0.0; n];
    let mut hess_g = DMatrix::zeros(n, n);
    for (j, u) in p.normals_f64().iter().enumerate() {
        let (l, log_l) = (ell[j], ell[j].ln());
        g += 0.5 * l * log_l;
        f += 0.5 * (lambda[j] * log_l + l);
        let w = 0.5 / l;
        for r in 0..n {
            y[r] += 0.5 * u[r] * (log_l + 1.0);
            for s in 0..n {
                hess_g[(r, s)] += u[r] * u[s] * w;
            }
        }
    }
    let hess_f = pd_inverse(&hess_g)?;
    Ok(PotentialSample {
        x: x.to_vec(),
        ell,
        g,
        y,
        hess_g,
        f,
        hess_f,
    })
}

/// Pulls a quadrant potential back along `ℓ`: value `G̃(ℓ(x))`, gradient
/// `uᵀ ∇G̃`, Hessian `uᵀ Hess G̃ u`.
pub fn pullback_sample(
    potential: &dyn QuadrantPotential,
    p: &LabelledPolytope,
    x: &[f64],
    tol: &Tolerances,
) -> Result<PotentialSample> {
    check_dim(p, x)?;
    let ell = p.ell(x);
    check_positive(&ell, tol.boundary)?;
    let (d, n) = (p.facet_count(), p.dim());
    let jacobian = DMatrix::from_fn(d, n, |j, r| p.normals_f64()[j][r]);
    let jet = potential.jet(&ell)?;
    let y = jacobian.transpose() * &jet.gradient;
    let hess_g = jacobian.transpose() * &jet.hessian * &jacobian;
    let hess_f = pd_inverse(&hess_g)?;
    let xy: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    let f = xy - jet.value - 0.5 * p.lambda_f64().iter().sum::<f64>();
    Ok(PotentialSample {
        x: x.to_vec(),
        ell,
        g: jet.value,
        y: y.iter().copied().collect(),
        hess_g,
        f,
        hess_f,
    })
}

/// Cholesky with a scale-aware pivot floor of `1e-12 · trace`.
pub fn check_positive_definite(m: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let threshold = 1e-12 * m.trace();
    let fail = |pivot: f64| Error::NotPositiveDefinite { pivot, threshold };
    if !(threshold > 0.0) {
        return Err(fail(m.trace()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(sym).ok_or_else(|| fail(f64::NAN))?;
    let min_pivot = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|v| v * v)
        .fold(f64::INFINITY, f64::min);
    if min_pivot < threshold {
        return Err(fail(min_pivot));
    }
    Ok(chol)
}

pub(crate) fn pd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(check_positive_definite(m)?.inverse())
}
