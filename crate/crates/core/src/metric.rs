//! Toric Kähler structure in momentum-angle coordinates `(x, t)`:
//! `g = Σ G_rs dx_r dx_s + F_rs dt_r dt_s`, `ω = Σ dx_r ∧ dt_r`.
//!
//! Matrices are written in the coframe `(dx_1, …, dx_n, dt_1, …, dt_n)`.
//! `J` acts on covectors stored as row vectors, `α ↦ α·J`, so that
//! `dt ↦ −Σ G dx` (that is, `J dt = −dy`) and `dx ↦ Σ F dt`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::polytope::{Facet, LabelledPolytope};
use crate::potential::{check_positive_definite, guillemin_sample, PotentialSample};
use crate::Tolerances;

#[derive(Clone, Debug)]
pub struct MetricSample {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub j: DMatrix<f64>,
}

/// Block-diagonal `diag(hess_g, hess_f)`.
pub fn hessian_metric(hess_g: &DMatrix<f64>, hess_f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = hess_g.nrows();
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(hess_g);
    g.view_mut((n, n), (n, n)).copy_from(hess_f);
    g
}

/// `Σ dx_r ∧ dt_r` as the matrix `[[0, I], [−I, 0]]`.
pub fn canonical_omega(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        w[(r, n + r)] = 1.0;
        w[(n + r, r)] = -1.0;
    }
    w
}

pub fn metric_at(sample: &PotentialSample) -> Result<MetricSample> {
    check_positive_definite(&sample.hess_g)?;
    check_positive_definite(&sample.hess_f)?;
    let n = sample.hess_g.nrows();
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(&sample.hess_f);
    j.view_mut((n, 0), (n, n)).copy_from(&(-&sample.hess_g));
    Ok(MetricSample {
        x: sample.x.clone(),
        g: hessian_metric(&sample.hess_g, &sample.hess_f),
        omega: canonical_omega(n),
        j,
    })
}

impl MetricSample {
    /// `α ↦ α·J` for a covector in the `(dx, dt)` coframe.
    pub fn apply_j(&self, covector: &[f64]) -> Vec<f64> {
        let row = nalgebra::RowDVector::from_row_slice(covector);
        (row * &self.j).iter().copied().collect()
    }

    /// Max-norm defects of the compatibility identities.
    pub fn compatibility(&self) -> Compatibility {
        let dim = self.g.nrows();
        let id = DMatrix::<f64>::identity(dim, dim);
        Compatibility {
            j_squared: (&self.j * &self.j + &id).amax(),
            isometry: (self.j.transpose() * &self.g * &self.j - &self.g).amax(),
            kahler_form: (&self.g * &self.j - &self.omega).amax(),
            omega_antisymmetry: (self.omega.transpose() + &self.omega).amax(),
            g_symmetry: (self.g.transpose() - &self.g).amax(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Compatibility {
    /// `‖J² + 1‖`
    pub j_squared: f64,
    /// `‖Jᵀ g J − g‖`
    pub isometry: f64,
    /// `‖g J − ω‖`
    pub kahler_form: f64,
    pub omega_antisymmetry: f64,
    pub g_symmetry: f64,
}

impl Compatibility {
    pub fn max(&self) -> f64 {
        [
            self.j_squared,
            self.isometry,
            self.kahler_form,
            self.omega_antisymmetry,
            self.g_symmetry,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// The unit interval with its standard labels.
pub fn interval() -> LabelledPolytope {
    LabelledPolytope::new(
        1,
        vec![Facet::integral(vec![1], 0), Facet::integral(vec![-1], -1)],
        Some("interval".into()),
    )
    .expect("unit interval is valid")
}

/// Compares the Guillemin metric of `[0, 1]` at `x = (1 − cos θ)/2` with the
/// round metric `½(dθ² + sin²θ dt²)`; returns the max coefficient deviation.
pub fn round_sphere_check(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::BoundaryDomain {
            index: 0,
            value: theta,
        });
    }
    // sin²(θ/2) avoids the cancellation in 1 − cos θ near the poles
    let x = (theta / 2.0).sin().powi(2);
    let sample = guillemin_sample(&interval(), &[x], &Tolerances::default())?;
    let m = metric_at(&sample)?;
    let dx_dtheta = theta.sin() / 2.0;
    let g_theta = m.g[(0, 0)] * dx_dtheta * dx_dtheta;
    let g_t = m.g[(1, 1)];
    Ok((g_theta - 0.5).abs().max((g_t - 0.5 * theta.sin().powi(2)).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cp1_center_metric() {
        let s = guillemin_sample(&interval(), &[0.5], &Tolerances::default()).unwrap();
        let m = metric_at(&s).unwrap();
        assert!((&m.g - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).amax() < 1e-15);
        assert_eq!(m.omega, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let close = |a: Vec<f64>, b: [f64; 2]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(m.apply_j(&[0.0, 1.0]), [-2.0, 0.0]));
        assert!(close(m.apply_j(&[1.0, 0.0]), [0.0, 0.5]));
        assert!(m.compatibility().max() < 1e-15);
    }

    #[test]
    fn cp2_center_metric() {
        let p = LabelledPolytope::new(
            2,
            vec![
                Facet::integral(vec![1, 0], 0),
                Facet::integral(vec![0, 1], 0),
                Facet::integral(vec![-1, -1], -1),
            ],
            None,
        )
        .unwrap();
        let s = guillemin_sample(&p, &[1.0 / 3.0, 1.0 / 3.0], &Tolerances::default()).unwrap();
        let m = metric_at(&s).unwrap();
        let hg = DMatrix::from_row_slice(2, 2, &[3.0, 1.5, 1.5, 3.0]);
        let expected = hessian_metric(&hg, &hg.clone().try_inverse().unwrap());
        assert!((&m.g - &expected).amax() < 1e-13);
        assert!((m.g.determinant() - 1.0).abs() < 1e-12);
        assert!(m.compatibility().max() < 1e-12);
    }

    #[test]
    fn round_sphere_examples() {
        assert!(round_sphere_check(PI / 2.0).unwrap() < 1e-12);
        assert!(round_sphere_check(PI / 3.0).unwrap() < 1e-12);
        assert!(round_sphere_check(0.0).is_err());
        assert!(round_sphere_check(PI).is_err());
    }

    #[test]
    fn metric_rejects_indefinite_sample() {
        let s = PotentialSample {
            x: vec![0.0],
            ell: vec![1.0],
            g: 0.0,
            y: vec![0.0],
            hess_g: DMatrix::from_element(1, 1, -1.0),
            f: 0.0,
            hess_f: DMatrix::from_element(1, 1, -1.0),
        };
        assert!(matches!(metric_at(&s), Err(Error::NotPositiveDefinite { .. })));
    }
}
