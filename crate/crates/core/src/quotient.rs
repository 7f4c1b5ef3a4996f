//! The Delzant quotient `M = μ_N⁻¹(c) / N` of `ℂᵈ` and its complex-side
//! description.
//!
//! [`DelzantData`] holds the integer data (`u`, a basis `B` of `𝔫 ∩ ℤᵈ`)
//! and the level `c_k = −Σ_j λ_j B_jk`. On the level set, [`nu`] recovers the
//! induced momentum map from `ℓ(ν(v)) = μ(v)`.
//!
//! Off the level set, [`kempf_ness_project`] finds the unique positive
//! scaling `t = exp(Bξ)` moving a stable point onto `μ_N⁻¹(c)` by minimising
//! the strictly convex
//!
//! ```text
//! Φ(ξ) = ¼ Σ_j e^{2(Bξ)_j} r_j² − ⟨c, ξ⟩,
//! ```
//!
//! whose gradient is exactly the level residual of the scaled point.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::flat::{moment_map, FlatPoint};
use crate::lattice::{kernel_basis, smith_normal_form, sublattice_index, IntMatrix};
use crate::polytope::{classify_delzant, Classification, LabelledPolytope};
use crate::potential::guillemin_sample;
use crate::Tolerances;

pub const KN_MAX_ITERATIONS: usize = 100;
pub const KN_MAX_HALVINGS: usize = 40;
/// `‖ξ‖∞` beyond which the scaling is treated as escaping to infinity.
pub const KN_MAX_XI: f64 = 50.0;
/// Relative eigenvalue floor of the Kempf–Ness Hessian.
pub const KN_SINGULAR_RATIO: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DelzantData {
    polytope: LabelledPolytope,
    classification: Classification,
    u_matrix: IntMatrix,
    kernel: IntMatrix,
    kernel_f64: DMatrix<f64>,
    level_exact: Vec<Rational>,
    level: Vec<f64>,
    sublattice_index: BigInt,
    nu_facets: Vec<usize>,
    nu_inverse: DMatrix<f64>,
}

/// Builds the quotient data for a rational or integral Delzant polytope.
pub fn build_delzant_data(p: &LabelledPolytope) -> Result<DelzantData> {
    let report = classify_delzant(p);
    if let Classification::Invalid(reason) = &report.classification {
        return Err(Error::NotDelzant(reason.clone()));
    }
    let u_matrix = p.normal_matrix();
    let kernel = kernel_basis(&u_matrix);
    let (d, m) = (kernel.rows(), kernel.cols());

    let level_exact: Vec<Rational> = (0..m)
        .map(|k| {
            -p.facets()
                .iter()
                .enumerate()
                .map(|(j, f)| &f.lambda * &kernel[(j, k)])
                .sum::<Rational>()
        })
        .collect();
    let level = level_exact.iter().map(exact::to_f64).collect();
    let index = sublattice_index(&u_matrix)
        .finite()
        .cloned()
        .ok_or_else(|| Error::NotDelzant("facet normals do not span".into()))?;

    // best-conditioned vertex system for ν
    let (best, _) = report
        .vertices
        .iter()
        .zip(&report.vertex_orders)
        .filter_map(|(v, o)| o.as_ref().map(|o| (v, o)))
        .max_by(|a, b| a.1.cmp(b.1))
        .expect("a valid polytope has vertices");
    let nu_facets = best.active.clone();
    let rows: Vec<Vec<Rational>> = nu_facets
        .iter()
        .map(|&j| p.facets()[j].normal.iter().map(|&v| exact::rat(v)).collect())
        .collect();
    let inv = exact::inverse(&rows).expect("vertex normals are independent");
    let n = p.dim();
    let nu_inverse = DMatrix::from_fn(n, n, |r, c| exact::to_f64(&inv[r][c]));
    let kernel_f64 = DMatrix::from_row_slice(d, m, &kernel.to_f64());

    Ok(DelzantData {
        polytope: p.clone(),
        classification: report.classification,
        u_matrix,
        kernel,
        kernel_f64,
        level_exact,
        level,
        sublattice_index: index,
        nu_facets,
        nu_inverse,
    })
}

impl DelzantData {
    pub fn polytope(&self) -> &LabelledPolytope {
        &self.polytope
    }

    pub fn classification(&self) -> &Classification {
        &self.classification
    }

    /// `n × d`, columns `u_j`.
    pub fn u_matrix(&self) -> &IntMatrix {
        &self.u_matrix
    }

    /// `d × (d − n)`, columns a ℤ-basis of `𝔫 ∩ ℤᵈ`.
    pub fn kernel_basis(&self) -> &IntMatrix {
        &self.kernel
    }

    pub fn kernel_f64(&self) -> &DMatrix<f64> {
        &self.kernel_f64
    }

    /// The level `c` in kernel-basis coordinates.
    pub fn level(&self) -> &[f64] {
        &self.level
    }

    pub fn level_exact(&self) -> &[Rational] {
        &self.level_exact
    }

    /// `[ℤⁿ : ⟨u_j⟩]`
    pub fn sublattice_index(&self) -> &BigInt {
        &self.sublattice_index
    }

    /// Facets whose normals are used to solve for `ν`.
    pub fn nu_facets(&self) -> &[usize] {
        &self.nu_facets
    }

    pub fn rank(&self) -> usize {
        self.kernel.cols()
    }

    /// A point over `x ∈ Δ` on the level set: `r_j = √(2 ℓ_j(x))`.
    pub fn lift(&self, x: &[f64], theta: Vec<f64>) -> Result<FlatPoint> {
        let ell = crate::potential::ell(&self.polytope, x)?;
        if let Some(index) = ell.iter().position(|l| *l < 0.0) {
            return Err(Error::BoundaryDomain {
                index,
                value: ell[index],
            });
        }
        FlatPoint::new(ell.iter().map(|l| (2.0 * l).sqrt()).collect(), theta)
    }
}

/// `Σ_j B_jk (μ_j(v) + λ_j)`; zero exactly on `μ_N⁻¹(c)`.
pub fn level_residual(data: &DelzantData, v: &FlatPoint) -> Result<Vec<f64>> {
    let d = data.polytope.facet_count();
    if v.d() != d {
        return Err(Error::DimensionMismatch {
            context: "flat point dimension",
            expected: d,
            found: v.d(),
        });
    }
    let mu = moment_map(v);
    let lambda = data.polytope.lambda_f64();
    Ok((0..data.rank())
        .map(|k| {
            (0..d)
                .map(|j| data.kernel_f64[(j, k)] * (mu[j] + lambda[j]))
                .sum()
        })
        .collect())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// The induced momentum map: the unique `x` with `ℓ(x) = μ(v)`.
pub fn nu(data: &DelzantData, v: &FlatPoint, tol: &Tolerances) -> Result<Vec<f64>> {
    let residual = inf_norm(&level_residual(data, v)?);
    if !(residual <= tol.kn) {
        return Err(Error::OffLevelSet { residual });
    }
    let mu = moment_map(v);
    let p = &data.polytope;
    let rhs = DVector::from_iterator(
        p.dim(),
        data.nu_facets.iter().map(|&j| mu[j] + p.lambda_f64()[j]),
    );
    let x: Vec<f64> = (&data.nu_inverse * rhs).iter().copied().collect();
    let ell = p.ell(&x);
    let defect = ell.iter().zip(&mu).map(|(l, m)| (l - m).abs()).fold(0.0, f64::max);
    let scale = 1.0 + inf_norm(&mu) + inf_norm(p.lambda_f64());
    if !(defect <= tol.kn * p.facet_count() as f64 * scale) {
        return Err(Error::InconsistentSystem { defect });
    }
    if let Some(index) = ell.iter().position(|l| *l < -tol.boundary) {
        return Err(Error::InconsistentSystem { defect: -ell[index] });
    }
    Ok(x)
}

/// `|N_v|` for points over the face cut out by `face`: the index of
/// `⟨u_j : j ∈ face⟩` in its saturation in ℤⁿ.
pub fn isotropy_order(data: &DelzantData, face: &[usize]) -> Result<BigInt> {
    if face.is_empty() {
        return Ok(BigInt::one());
    }
    let d = data.polytope.facet_count();
    if let Some(&j) = face.iter().find(|&&j| j >= d) {
        return Err(Error::DimensionMismatch {
            context: "facet index",
            expected: d,
            found: j,
        });
    }
    let snf = smith_normal_form(&data.u_matrix.select_columns(face));
    if snf.rank() < face.len() {
        return Err(Error::DependentNormals);
    }
    Ok(snf
        .invariant_factors()
        .into_iter()
        .filter(|f| !f.is_zero())
        .product())
}

#[derive(Clone, Debug)]
pub struct KempfNessResult {
    /// Coordinates in the kernel basis.
    pub xi: Vec<f64>,
    /// `s = Bξ`
    pub s: Vec<f64>,
    /// `t_j = e^{s_j}`
    pub t: Vec<f64>,
    pub projected: FlatPoint,
    /// `ν` of the projected point.
    pub x: Vec<f64>,
    pub hat_k: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn kn_objective(data: &DelzantData, r2: &[f64], xi: &DVector<f64>) -> f64 {
    let s = &data.kernel_f64 * xi;
    let quad: f64 = s.iter().zip(r2).map(|(s, w)| (2.0 * s).exp() * w).sum();
    0.25 * quad - xi.iter().zip(&data.level).map(|(a, c)| a * c).sum::<f64>()
}

/// `e^{2 s_j} r_j²` and `∇Φ(ξ)`.
fn kn_gradient(b: &DMatrix<f64>, c: &DVector<f64>, r2: &[f64], xi: &DVector<f64>) -> (Vec<f64>, DVector<f64>) {
    let s = b * xi;
    let weights: Vec<f64> = s.iter().zip(r2).map(|(s, w)| (2.0 * s).exp() * w).collect();
    let grad = b.transpose() * DVector::from_column_slice(&weights) * 0.5 - c;
    (weights, grad)
}

fn kn_hessian(b: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut hess = DMatrix::zeros(b.ncols(), b.ncols());
    for (j, w) in weights.iter().enumerate() {
        let row = b.row(j);
        hess += row.transpose() * row * *w;
    }
    hess
}

/// Projects `z` onto the level set along its `exp(i𝔫)` orbit, starting at `ξ = 0`.
pub fn kempf_ness_project(data: &DelzantData, z: &FlatPoint, tol: &Tolerances) -> Result<KempfNessResult> {
    kempf_ness_project_from(data, z, &vec![0.0; data.rank()], tol)
}

/// As [`kempf_ness_project`], from a chosen initial `ξ`.
pub fn kempf_ness_project_from(
    data: &DelzantData,
    z: &FlatPoint,
    start: &[f64],
    tol: &Tolerances,
) -> Result<KempfNessResult> {
    let d = data.polytope.facet_count();
    let m = data.rank();
    if z.d() != d {
        return Err(Error::DimensionMismatch {
            context: "flat point dimension",
            expected: d,
            found: z.d(),
        });
    }
    if start.len() != m {
        return Err(Error::DimensionMismatch {
            context: "initial xi",
            expected: m,
            found: start.len(),
        });
    }
    let b = &data.kernel_f64;
    let c = DVector::from_column_slice(&data.level);
    let r2: Vec<f64> = z.r().iter().map(|r| r * r).collect();
    let mut xi = DVector::from_column_slice(start);
    let mut iterations = 0;

    loop {
        let (weights, grad) = kn_gradient(b, &c, &r2, &xi);
        if grad.amax() <= tol.kn {
            break;
        }
        if iterations == KN_MAX_ITERATIONS {
            return Err(Error::MaxIterations {
                iterations,
                residual: grad.amax(),
            });
        }
        iterations += 1;

        let hess = kn_hessian(b, &weights);
        let trace = hess.trace();
        let min_eig = SymmetricEigen::new(hess.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        if !(trace > 0.0) || min_eig < KN_SINGULAR_RATIO * trace {
            return Err(Error::Unstable(format!(
                "singular Kempf-Ness Hessian (min eigenvalue {min_eig:e}, trace {trace:e})"
            )));
        }
        let step = hess
            .cholesky()
            .map(|ch| ch.solve(&(-&grad)))
            .ok_or_else(|| Error::Unstable("Kempf-Ness Hessian not positive definite".into()))?;

        let phi = kn_objective(data, &r2, &xi);
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        let mut accepted = false;
        // once the predicted decrease is below the rounding floor of Φ the
        // sufficient-decrease test is meaningless
        let magnitude = 0.25 * weights.iter().sum::<f64>() + xi.dot(&c).abs();
        if -slope <= 64.0 * f64::EPSILON * (1.0 + magnitude) {
            accepted = true;
        } else {
            for _ in 0..=KN_MAX_HALVINGS {
                let trial = &xi + &step * alpha;
                let value = kn_objective(data, &r2, &trial);
                if value.is_finite() && value <= phi + 1e-4 * alpha * slope {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if !accepted {
            return Err(Error::MaxIterations {
                iterations,
                residual: grad.amax(),
            });
        }
        xi += &step * alpha;
        if xi.amax() > KN_MAX_XI {
            return Err(Error::Unstable(format!(
                "scaling escapes to infinity (|xi| = {:e})",
                xi.amax()
            )));
        }
    }

    // one more full Newton step sits at rounding level; keep it if it helps
    let (weights, grad) = kn_gradient(b, &c, &r2, &xi);
    if let Some(step) = kn_hessian(b, &weights).cholesky().map(|ch| ch.solve(&(-&grad))) {
        let polished = &xi + step;
        if kn_gradient(b, &c, &r2, &polished).1.amax() < grad.amax() {
            xi = polished;
        }
    }

    let s: Vec<f64> = (b * &xi).iter().copied().collect();
    let t: Vec<f64> = s.iter().map(|v| v.exp()).collect();
    let projected = z.scaled(&t)?;
    let residual = inf_norm(&level_residual(data, &projected)?);
    let x = nu(data, &projected, tol)?;
    let ell = data.polytope.ell(&x);
    let lambda = data.polytope.lambda_f64();
    let hat_k = 0.5
        * ell
            .iter()
            .zip(lambda)
            .zip(&s)
            .map(|((l, lam), s)| l + lam * 2.0 * s)
            .sum::<f64>();
    Ok(KempfNessResult {
        xi: xi.iter().copied().collect(),
        s,
        t,
        projected,
        x,
        hat_k,
        residual,
        iterations,
    })
}

/// `K̂` in its two forms together with its difference from `F ∘ ν`.
#[derive(Clone, Debug)]
pub struct HatKDecomposition {
    pub projection: KempfNessResult,
    /// `½ Σ (ℓ_j(x) + λ_j log t_j²)`
    pub hat_k: f64,
    /// `¼ |t·z|² + ½ log |χ_{−c}(t)|²`
    pub bg_form: f64,
    /// `K̂ − F(x)`
    pub guillemin_diff: f64,
    /// `½ Σ λ_j (log 2 − log r_j²)`, with `r` the radii of the input point.
    pub closed_form: f64,
    /// False when some `λ_j` is not an integer; `χ_{−c}` is then only formal.
    pub integral_lambda: bool,
}

/// `log |χ_{−c}(exp(Bξ))|² = −2 ⟨c, ξ⟩`, the character of `N_ℂ` fixed by the level.
pub fn character_log_modulus(data: &DelzantData, xi: &[f64]) -> f64 {
    -2.0 * data.level.iter().zip(xi).map(|(c, x)| c * x).sum::<f64>()
}

pub fn hat_k_decomposition(data: &DelzantData, z: &FlatPoint, tol: &Tolerances) -> Result<HatKDecomposition> {
    if let Some(index) = z.r().iter().position(|r| !(*r > 0.0)) {
        return Err(Error::BoundaryDomain {
            index,
            value: z.r()[index],
        });
    }
    let projection = kempf_ness_project(data, z, tol)?;
    let sample = guillemin_sample(&data.polytope, &projection.x, tol)?;
    let bg_form =
        0.25 * projection.projected.norm_squared() + 0.5 * character_log_modulus(data, &projection.xi);
    let ln2 = std::f64::consts::LN_2;
    let closed_form = 0.5
        * data
            .polytope
            .lambda_f64()
            .iter()
            .zip(z.r())
            .map(|(lam, r)| lam * (ln2 - (r * r).ln()))
            .sum::<f64>();
    Ok(HatKDecomposition {
        hat_k: projection.hat_k,
        bg_form,
        guillemin_diff: projection.hat_k - sample.f,
        closed_form,
        integral_lambda: data.polytope.has_integral_lambda(),
        projection,
    })
}
