//! The Legendre correspondence between momentum coordinates `x ∈ Δ₀` and
//! holomorphic-side coordinates `y = ∇G(x) ∈ ℝⁿ`.

use nalgebra::DVector;

use crate::error::Result;
use crate::polytope::LabelledPolytope;
use crate::potential::{check_positive_definite, guillemin_sample};
use crate::Tolerances;

pub const MAX_ITERATIONS: usize = 100;
pub const MAX_HALVINGS: usize = 40;
/// Fraction of the distance to the nearest facet a Newton step may cover.
pub const FRACTION_TO_BOUNDARY: f64 = 0.95;

#[derive(Clone, Debug)]
pub struct LegendreSolve {
    pub y_target: Vec<f64>,
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖∇G(x) − y_target‖∞`
    pub residual: f64,
    pub converged: bool,
}

/// `y = ∇G(x)` for the Guillemin potential.
pub fn forward(p: &LabelledPolytope, x: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(guillemin_sample(p, x, tol)?.y)
}

/// Solves `∇G(x) = y` by damped Newton from the vertex barycenter.
///
/// Every iterate stays strictly inside `Δ`: the step is first shortened to
/// `0.95 · α_max` (the largest step keeping all `ℓ_j` positive) and then
/// halved until `‖∇G − y‖₂` decreases. Failure to converge is reported
/// through `converged = false` with the best iterate, not as an error.
pub fn invert(p: &LabelledPolytope, y: &[f64], tol: &Tolerances) -> Result<LegendreSolve> {
    let n = p.dim();
    if y.len() != n {
        return Err(crate::Error::DimensionMismatch {
            context: "y dimension",
            expected: n,
            found: y.len(),
        });
    }
    let target = DVector::from_column_slice(y);
    let mut x = DVector::from_vec(p.barycenter());
    let mut sample = guillemin_sample(p, x.as_slice(), tol)?;
    let mut gap = DVector::from_vec(sample.y.clone()) - &target;
    let mut iterations = 0;

    while gap.amax() > tol.newton && iterations < MAX_ITERATIONS {
        iterations += 1;
        let chol = check_positive_definite(&sample.hess_g)?;
        let step = chol.solve(&(-&gap));

        let ell = p.ell(x.as_slice());
        let mut alpha_max = f64::INFINITY;
        for (u, l) in p.normals_f64().iter().zip(&ell) {
            let rate: f64 = u.iter().zip(step.iter()).map(|(a, b)| a * b).sum();
            if rate < 0.0 {
                alpha_max = alpha_max.min(-l / rate);
            }
        }
        let mut alpha = 1.0f64.min(FRACTION_TO_BOUNDARY * alpha_max);

        let merit = gap.norm();
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &x + &step * alpha;
            if let Ok(s) = guillemin_sample(p, trial.as_slice(), tol) {
                let trial_gap = DVector::from_vec(s.y.clone()) - &target;
                if trial_gap.norm() < merit {
                    accepted = Some((trial, s, trial_gap));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((next_x, next_sample, next_gap)) = accepted else {
            break;
        };
        x = next_x;
        sample = next_sample;
        gap = next_gap;
    }

    let residual = gap.amax();
    Ok(LegendreSolve {
        y_target: y.to_vec(),
        converged: residual <= tol.newton && p.interior_contains(x.as_slice(), tol.boundary),
        x: x.iter().copied().collect(),
        iterations,
        residual,
    })
}

/// `F + G − ⟨x, y⟩ + ½ Σ λ_j`, which vanishes identically.
pub fn duality_gap(p: &LabelledPolytope, x: &[f64], tol: &Tolerances) -> Result<f64> {
    Ok(raw_defect(p, x, tol)? + 0.5 * p.lambda_f64().iter().sum::<f64>())
}

/// `F + G − ⟨x, y⟩` without the constant correction.
pub fn raw_defect(p: &LabelledPolytope, x: &[f64], tol: &Tolerances) -> Result<f64> {
    let s = guillemin_sample(p, x, tol)?;
    let xy: f64 = s.x.iter().zip(&s.y).map(|(a, b)| a * b).sum();
    Ok(s.f + s.g - xy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Facet;

    fn cp1() -> LabelledPolytope {
        LabelledPolytope::new(
            1,
            vec![Facet::integral(vec![1], 0), Facet::integral(vec![-1], -1)],
            None,
        )
        .unwrap()
    }

    fn cp2() -> LabelledPolytope {
        LabelledPolytope::new(
            2,
            vec![
                Facet::integral(vec![1, 0], 0),
                Facet::integral(vec![0, 1], 0),
                Facet::integral(vec![-1, -1], -1),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn forward_examples() {
        let tol = Tolerances::default();
        assert!(forward(&cp1(), &[0.5], &tol).unwrap()[0].abs() < 1e-15);
        let y = forward(&cp1(), &[0.25], &tol).unwrap()[0];
        assert!((y - 0.5 * (0.25f64 / 0.75).ln()).abs() < 1e-15);
        let y = forward(&cp2(), &[1.0 / 3.0, 1.0 / 3.0], &tol).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn invert_examples() {
        let tol = Tolerances::default();
        let s = invert(&cp1(), &[0.0], &tol).unwrap();
        assert!(s.converged);
        assert!((s.x[0] - 0.5).abs() < 1e-12);

        let y = forward(&cp1(), &[0.9], &tol).unwrap();
        let s = invert(&cp1(), &y, &tol).unwrap();
        assert!(s.converged && (s.x[0] - 0.9).abs() < 1e-8);

        let y = forward(&cp2(), &[0.1, 0.7], &tol).unwrap();
        let s = invert(&cp2(), &y, &tol).unwrap();
        assert!(s.converged, "{s:?}");
        assert!((s.x[0] - 0.1).abs() < 1e-8 && (s.x[1] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn invert_far_targets_stay_interior() {
        let tol = Tolerances::default();
        for y in [-6.0, 6.0] {
            let s = invert(&cp1(), &[y], &tol).unwrap();
            assert!(s.converged, "{s:?}");
        }
        // the solution lies closer to the facet than tol.boundary
        let s = invert(&cp1(), &[-12.0], &tol).unwrap();
        assert!(!s.converged);
        assert!(cp1().interior_contains(&s.x, 0.0));
    }

    #[test]
    fn gap_examples() {
        let tol = Tolerances::default();
        assert!(duality_gap(&cp1(), &[0.5], &tol).unwrap().abs() < 1e-12);
        assert!((raw_defect(&cp1(), &[0.5], &tol).unwrap() - 0.5).abs() < 1e-12);
        assert!(duality_gap(&cp2(), &[1.0 / 3.0, 1.0 / 3.0], &tol).unwrap().abs() < 1e-12);
        // Hirzebruch-type quadrilateral shifted so that Σ λ_j = 0
        let shifted = LabelledPolytope::new(
            2,
            vec![
                Facet::integral(vec![1, 0], 0),
                Facet::integral(vec![0, 1], -2),
                Facet::integral(vec![0, -1], 1),
                Facet::integral(vec![-1, -2], 1),
            ],
            None,
        )
        .unwrap();
        assert_eq!(shifted.lambda_f64().iter().sum::<f64>(), 0.0);
        let d = raw_defect(&shifted, &[0.5, -1.5], &tol).unwrap();
        assert!(d.abs() < 1e-12, "{d}");
    }
}
