//! The invariant suite behind `mforge check`.
//!
//! Every invariant is evaluated over a seeded sample and reported once, with
//! the worst defect seen and the point where it occurred.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::flat::{cartesian_pullback_check, flat_metric_momentum, moment_map, quadrant_hessian_metric, FlatPoint};
use crate::lattice::{abs_determinant, kernel_basis, smith_normal_form, sublattice_index};
use crate::legendre::{duality_gap, forward, invert};
use crate::metric::{canonical_omega, interval, metric_at};
use crate::polytope::{
    classify_delzant, enumerate_vertices, recession_cone_is_trivial_fm, recession_cone_is_trivial_rays, Facet,
    LabelledPolytope,
};
use crate::potential::{guillemin_sample, pullback_sample, quadrant_guillemin};
use crate::quotient::{
    build_delzant_data, hat_k_decomposition, kempf_ness_project, kempf_ness_project_from, nu, DelzantData,
};
use crate::sampling::{self, SampleRng};
use crate::Tolerances;

#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub module: &'static str,
    pub invariant: &'static str,
    /// Where the worst defect was measured, if anywhere.
    pub point: Option<Vec<f64>>,
    pub defect: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    pub samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { seed: 0, samples: 50 }
    }
}

struct Probe {
    module: &'static str,
    invariant: &'static str,
    tolerance: f64,
    worst: f64,
    point: Option<Vec<f64>>,
    samples: usize,
    note: Option<String>,
    failed: bool,
}

impl Probe {
    fn new(module: &'static str, invariant: &'static str, tolerance: f64) -> Self {
        Self {
            module,
            invariant,
            tolerance,
            worst: 0.0,
            point: None,
            samples: 0,
            note: None,
            failed: false,
        }
    }

    fn record(&mut self, point: &[f64], defect: f64) {
        self.samples += 1;
        let d = if defect.is_nan() { f64::INFINITY } else { defect };
        if self.point.is_none() || d > self.worst {
            self.worst = d;
            self.point = Some(point.to_vec());
        }
        if !(defect <= self.tolerance) {
            self.failed = true;
        }
    }

    fn record_result(&mut self, point: &[f64], defect: Result<f64>) {
        match defect {
            Ok(d) => self.record(point, d),
            Err(e) => self.error(point, e),
        }
    }

    fn error(&mut self, point: &[f64], err: Error) {
        self.samples += 1;
        self.failed = true;
        if self.note.is_none() {
            self.note = Some(err.to_string());
            self.worst = f64::INFINITY;
            self.point = Some(point.to_vec());
        }
    }

    fn skip(mut self, reason: &str) -> CheckRecord {
        self.note = Some(format!("skipped: {reason}"));
        self.finish()
    }

    fn finish(self) -> CheckRecord {
        CheckRecord {
            module: self.module,
            invariant: self.invariant,
            point: self.point,
            defect: self.worst,
            tolerance: self.tolerance,
            samples: self.samples,
            passed: !self.failed,
            note: self.note,
        }
    }
}

fn exact_probe(module: &'static str, invariant: &'static str, holds: bool, note: Option<String>) -> CheckRecord {
    let mut probe = Probe::new(module, invariant, 0.0);
    probe.record(&[], if holds { 0.0 } else { 1.0 });
    probe.point = None;
    probe.note = note;
    probe.finish()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn diameter(p: &LabelledPolytope) -> f64 {
    let (lo, hi) = p.bounding_box();
    lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max)
}

/// Relative errors of central differences of `G` against `y` and of `y`
/// against `Hess G`, each scaled by `max(‖analytic‖∞, 1)`.
pub fn finite_difference_errors(p: &LabelledPolytope, x: &[f64], h: f64, tol: &Tolerances) -> Result<(f64, f64)> {
    let base = guillemin_sample(p, x, tol)?;
    let n = p.dim();
    let mut grad = vec![0.0; n];
    let mut hess = DMatrix::zeros(n, n);
    for r in 0..n {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[r] += h;
        minus[r] -= h;
        let sp = guillemin_sample(p, &plus, tol)?;
        let sm = guillemin_sample(p, &minus, tol)?;
        grad[r] = (sp.g - sm.g) / (2.0 * h);
        for s in 0..n {
            hess[(s, r)] = (sp.y[s] - sm.y[s]) / (2.0 * h);
        }
    }
    let grad_scale = base.y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let hess_scale = base.hess_g.amax().max(1.0);
    Ok((
        max_abs_diff(&grad, &base.y) / grad_scale,
        (hess - &base.hess_g).amax() / hess_scale,
    ))
}

/// Runs every module's invariants on `p`.
pub fn run_checks(p: &LabelledPolytope, tol: &Tolerances, config: &CheckConfig) -> Vec<CheckRecord> {
    let mut rng = sampling::rng(config.seed);
    let mut out = Vec::new();
    out.extend(lattice_checks(p));
    out.extend(polytope_checks(p));
    out.extend(potential_checks(p, tol, config, &mut rng));
    out.extend(legendre_checks(p, tol, config, &mut rng));
    out.extend(flat_checks(p, config, &mut rng));
    out.extend(quotient_checks(p, tol, config, &mut rng));
    out.extend(metric_checks(p, tol, config, &mut rng));
    out
}

fn lattice_checks(p: &LabelledPolytope) -> Vec<CheckRecord> {
    let a = p.normal_matrix();
    let snf = smith_normal_form(&a);
    let product = snf.u.mul(&a).and_then(|ua| ua.mul(&snf.v));
    let factors = snf.invariant_factors();
    let divides = factors
        .windows(2)
        .all(|w| if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() });
    let unimodular = [&snf.u, &snf.v]
        .iter()
        .all(|m| abs_determinant(m).map(|d| d.is_one()).unwrap_or(false));
    let kernel = kernel_basis(&a);
    let annihilated = a.mul(&kernel).map(|m| m.is_zero()).unwrap_or(false);

    // index of the normals at each simple vertex equals |det|
    let mut index_ok = true;
    for v in p.vertices().iter().filter(|v| v.is_simple(p.dim())) {
        let cols = a.select_columns(&v.active);
        let det = abs_determinant(&cols).ok();
        index_ok &= sublattice_index(&cols).finite().cloned() == det;
    }
    vec![
        exact_probe("lattice", "U·A·V = S", product.map(|m| m == snf.s).unwrap_or(false), None),
        exact_probe("lattice", "invariant factors divide", divides, None),
        exact_probe("lattice", "unimodular factors", unimodular, None),
        exact_probe("lattice", "kernel basis annihilated", annihilated, None),
        exact_probe("lattice", "vertex index equals |det|", index_ok, None),
    ]
}

fn orders_multiset(p: &LabelledPolytope) -> (String, Vec<Option<BigInt>>) {
    let report = classify_delzant(p);
    let mut orders = report.vertex_orders;
    orders.sort();
    (report.classification.label().to_string(), orders)
}

fn vertex_set(p: &LabelledPolytope) -> Vec<Vec<Rational>> {
    let mut v: Vec<_> = enumerate_vertices(p).into_iter().map(|v| v.point).collect();
    v.sort();
    v
}

/// `u ↦ A u` with `A = 1 + e_0 e_{n−1}ᵀ` (or `−1` when `n = 1`); `P ↦ A⁻ᵀ P`.
fn unimodular_image(p: &LabelledPolytope) -> Result<LabelledPolytope> {
    let n = p.dim();
    let facets = p
        .facets()
        .iter()
        .map(|f| {
            let mut normal = f.normal.clone();
            if n == 1 {
                normal[0] = -normal[0];
            } else {
                normal[0] += normal[n - 1];
            }
            Facet {
                normal,
                lambda: f.lambda.clone(),
                approximated: f.approximated,
            }
        })
        .collect();
    LabelledPolytope::new(n, facets, None)
}

fn polytope_checks(p: &LabelledPolytope) -> Vec<CheckRecord> {
    let n = p.dim();
    let ranks_ok = p.vertices().iter().all(|v| {
        let rows: Vec<Vec<Rational>> = v
            .active
            .iter()
            .map(|&j| p.facets()[j].normal.iter().map(|&c| exact::rat(c)).collect())
            .collect();
        exact::rank(&rows) == n
    });
    let report = classify_delzant(p);
    let integral_ok = report.classification != crate::polytope::Classification::Integral
        || report.vertex_orders.iter().all(|o| o.as_ref().is_some_and(|o| o.is_one()));

    let mut reversed: Vec<Facet> = p.facets().to_vec();
    reversed.reverse();
    let permuted = LabelledPolytope::new(n, reversed, None);
    let (perm_vertices, perm_class) = match &permuted {
        Ok(q) => (vertex_set(q) == vertex_set(p), orders_multiset(q) == orders_multiset(p)),
        Err(_) => (false, false),
    };
    let unimodular = unimodular_image(p).map(|q| orders_multiset(&q) == orders_multiset(p));

    let normals: Vec<Vec<i64>> = p.facets().iter().map(|f| f.normal.clone()).collect();
    let fm = recession_cone_is_trivial_fm(&normals, n);
    let rays = recession_cone_is_trivial_rays(&normals, n);
    // a cone-shaped variant: drop facets until unbounded, both routes must still agree
    let mut agree = fm == rays && fm;
    for k in 1..normals.len() {
        let sub = &normals[..k];
        agree &= recession_cone_is_trivial_fm(sub, n) == recession_cone_is_trivial_rays(sub, n);
    }

    vec![
        exact_probe("polytope", "active normals have rank n", ranks_ok, None),
        exact_probe("polytope", "integral orders are 1", integral_ok, None),
        exact_probe("polytope", "vertices independent of facet order", perm_vertices, None),
        exact_probe("polytope", "classification independent of facet order", perm_class, None),
        exact_probe(
            "polytope",
            "classification invariant under GL(n, Z)",
            unimodular.as_ref().map(|&b| b).unwrap_or(false),
            unimodular.err().map(|e| e.to_string()),
        ),
        exact_probe("polytope", "recession cone routes agree", agree, None),
    ]
}

fn potential_checks(
    p: &LabelledPolytope,
    tol: &Tolerances,
    config: &CheckConfig,
    rng: &mut SampleRng,
) -> Vec<CheckRecord> {
    let diam = diameter(p);
    let fd_points = sampling::interior_points(p, config.samples, 0.05 * diam, rng);
    let points = sampling::interior_points(p, config.samples, 1e-3 * diam, rng);
    let h = 1e-5 * diam;

    let mut grad = Probe::new("potential", "finite-difference gradient", 1e-6);
    let mut hess = Probe::new("potential", "finite-difference Hessian", 1e-5);
    for x in &fd_points {
        match finite_difference_errors(p, x, h, tol) {
            Ok((g, hh)) => {
                grad.record(x, g);
                hess.record(x, hh);
            }
            Err(e) => {
                grad.error(x, e.clone());
                hess.error(x, e);
            }
        }
    }

    let mut constant = Probe::new("potential", "F + G - <x,y> = -sum(lambda)/2", 1e-10);
    let mut inverse = Probe::new("potential", "HessG HessF = I", tol.lin);
    let mut pullback = Probe::new("potential", "pullback route agrees", 1e-12);
    let mut convex = Probe::new("potential", "HessG positive definite", 0.0);
    let mut translation = Probe::new("potential", "translation covariance", 1e-12);
    let shift: Vec<Rational> = (0..p.dim())
        .map(|r| Rational::new(BigInt::from(2 * r as i64 + 1), BigInt::from(3)))
        .collect();
    let shifted = p.translated(&shift);
    let half_sum = 0.5 * p.lambda_f64().iter().sum::<f64>();
    // translation is compared away from the facets, where rounding x + t does
    // not dominate Hess G
    let well_inside: Vec<bool> = points.iter().map(|x| p.ell(x).iter().all(|&l| l >= 0.05 * diam)).collect();
    for (x, &inside) in points.iter().zip(&well_inside) {
        let s = match guillemin_sample(p, x, tol) {
            Ok(s) => s,
            Err(e) => {
                for probe in [&mut constant, &mut inverse, &mut pullback, &mut convex, &mut translation] {
                    probe.error(x, e.clone());
                }
                continue;
            }
        };
        let xy: f64 = x.iter().zip(&s.y).map(|(a, b)| a * b).sum();
        constant.record(x, (s.f + s.g - xy + half_sum).abs());
        let n = p.dim();
        inverse.record(x, (&s.hess_g * &s.hess_f - DMatrix::identity(n, n)).amax());
        convex.record_result(
            x,
            crate::potential::check_positive_definite(&s.hess_g).map(|_| 0.0),
        );
        pullback.record_result(
            x,
            pullback_sample(&quadrant_guillemin(), p, x, tol).map(|q| {
                (q.g - s.g)
                    .abs()
                    .max(max_abs_diff(&q.y, &s.y))
                    .max((&q.hess_g - &s.hess_g).amax())
            }),
        );
        match &shifted {
            _ if !inside => {}
            Ok(q) => {
                let moved: Vec<f64> = x.iter().zip(&shift).map(|(a, t)| a + exact::to_f64(t)).collect();
                translation.record_result(
                    x,
                    guillemin_sample(q, &moved, tol).map(|t| {
                        max_abs_diff(&t.ell, &s.ell)
                            .max((t.g - s.g).abs())
                            .max((&t.hess_g - &s.hess_g).amax())
                    }),
                );
            }
            Err(e) => translation.error(x, e.clone()),
        }
    }
    [grad, hess, constant, inverse, pullback, convex, translation]
        .into_iter()
        .map(Probe::finish)
        .collect()
}

fn legendre_checks(
    p: &LabelledPolytope,
    tol: &Tolerances,
    config: &CheckConfig,
    rng: &mut SampleRng,
) -> Vec<CheckRecord> {
    let points = sampling::interior_points(p, config.samples, 1e-3 * diameter(p), rng);
    let mut round_trip = Probe::new("legendre", "invert(forward(x)) = x", 1e-8);
    let mut monotone = Probe::new("legendre", "forward map strictly monotone", 0.0);
    let mut gap = Probe::new("legendre", "duality gap vanishes", 1e-10);
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    for x in &points {
        gap.record_result(x, duality_gap(p, x, tol).map(f64::abs));
        let y = match forward(p, x, tol) {
            Ok(y) => y,
            Err(e) => {
                round_trip.error(x, e);
                continue;
            }
        };
        round_trip.record_result(
            x,
            invert(p, &y, tol).and_then(|s| {
                if s.converged {
                    Ok(max_abs_diff(&s.x, x))
                } else {
                    Err(Error::MaxIterations {
                        iterations: s.iterations,
                        residual: s.residual,
                    })
                }
            }),
        );
        if let Some((px, py)) = &previous {
            let inner: f64 = (0..x.len()).map(|r| (py[r] - y[r]) * (px[r] - x[r])).sum();
            monotone.record(x, if inner > 0.0 { 0.0 } else { -inner + f64::MIN_POSITIVE });
        }
        previous = Some((x.clone(), y));
    }
    [round_trip, monotone, gap].into_iter().map(Probe::finish).collect()
}

fn flat_checks(p: &LabelledPolytope, config: &CheckConfig, rng: &mut SampleRng) -> Vec<CheckRecord> {
    let d = p.facet_count();
    let mut invariance = Probe::new("flat_model", "moment map torus invariant", 0.0);
    let mut cartesian = Probe::new("flat_model", "Cartesian pullback is Euclidean", 1e-9);
    let mut assembly = Probe::new("flat_model", "quadrant Hessian assembly", 1e-12);
    for _ in 0..config.samples {
        let v = sampling::flat_point(d, 0.1, 3.0, rng);
        let angles = sampling::uniform_vector(d, -10.0, 10.0, rng);
        invariance.record(v.r(), max_abs_diff(&moment_map(&v.rotated(&angles)), &moment_map(&v)));
        cartesian.record_result(v.r(), cartesian_pullback_check(&v));
        let mu = moment_map(&v);
        assembly.record_result(
            &mu,
            flat_metric_momentum(&mu).and_then(|a| quadrant_hessian_metric(&mu).map(|b| (a - b).amax())),
        );
    }
    [invariance, cartesian, assembly].into_iter().map(Probe::finish).collect()
}

const QUOTIENT_INVARIANTS: [(&str, f64); 8] = [
    ("l(nu(v)) = mu(v) on the level set", 1e-10),
    ("projection converges", 1e-10),
    ("projection independent of start", 1e-8),
    ("nu of projection matches t^2 r^2 / 2", 1e-9),
    ("hatK invariant under N", 1e-9),
    ("hatK covariant under exp(n)", 1e-9),
    ("hatK - F(nu) closed form", 1e-9),
    ("hatK forms agree", 1e-9),
];

fn quotient_checks(
    p: &LabelledPolytope,
    tol: &Tolerances,
    config: &CheckConfig,
    rng: &mut SampleRng,
) -> Vec<CheckRecord> {
    let probes: Vec<Probe> = QUOTIENT_INVARIANTS
        .iter()
        .map(|&(name, t)| Probe::new("quotient", name, t))
        .collect();
    let data = match build_delzant_data(p) {
        Ok(d) => d,
        Err(e) => return probes.into_iter().map(|q| q.skip(&e.to_string())).collect(),
    };
    let [mut diagram, mut converge, mut unique, mut cross, mut rotation, mut scaling, mut closed, mut forms] =
        <[Probe; 8]>::try_from(probes).ok().expect("eight probes");
    let integral = data.polytope().has_integral_lambda();

    for x in sampling::interior_points(p, config.samples, 0.0, rng) {
        let theta = sampling::uniform_vector(p.facet_count(), 0.0, std::f64::consts::TAU, rng);
        diagram.record_result(
            &x,
            data.lift(&x, theta).and_then(|v| {
                let mu = moment_map(&v);
                nu(&data, &v, tol).map(|y| max_abs_diff(&p.ell(&y), &mu))
            }),
        );
    }

    for _ in 0..config.samples {
        let z = sampling::flat_point(p.facet_count(), 0.2, 3.0, rng);
        let start = sampling::uniform_vector(data.rank(), -1.0, 1.0, rng);
        let eta = sampling::uniform_vector(data.rank(), -0.5, 0.5, rng);
        let angles = sampling::uniform_vector(data.rank(), -3.0, 3.0, rng);
        let r = z.r().to_vec();
        let h = match hat_k_decomposition(&data, &z, tol) {
            Ok(h) => h,
            Err(e) => {
                for probe in [
                    &mut converge,
                    &mut unique,
                    &mut cross,
                    &mut rotation,
                    &mut scaling,
                    &mut closed,
                    &mut forms,
                ] {
                    probe.error(&r, e.clone());
                }
                continue;
            }
        };
        let proj = &h.projection;
        converge.record(
            &r,
            if proj.iterations <= 30 { proj.residual } else { f64::INFINITY },
        );
        unique.record_result(
            &r,
            kempf_ness_project_from(&data, &z, &start, tol).map(|other| max_abs_diff(&other.t, &proj.t)),
        );
        let from_t: Vec<f64> = proj.t.iter().zip(&r).map(|(t, r)| 0.5 * t * t * r * r).collect();
        cross.record(&r, max_abs_diff(&p.ell(&proj.x), &from_t));

        rotation.record_result(&r, n_action_defect(&data, &z, &angles, proj.hat_k, tol));
        scaling.record_result(&r, scaling_defect(&data, &z, &eta, proj, tol));
        closed.record(&r, (h.guillemin_diff - h.closed_form).abs());
        if integral {
            forms.record(&r, (h.hat_k - h.bg_form).abs());
        }
    }
    if !integral {
        forms.note = Some("skipped: non-integral labels".into());
    }
    [diagram, converge, unique, cross, rotation, scaling, closed, forms]
        .into_iter()
        .map(Probe::finish)
        .collect()
}

/// `|K̂(exp(Bφ)·z) − K̂(z)|` for the compact subgroup `N`.
fn n_action_defect(data: &DelzantData, z: &FlatPoint, angles: &[f64], hat_k: f64, tol: &Tolerances) -> Result<f64> {
    let rotation: Vec<f64> = (data.kernel_f64() * DVector::from_column_slice(angles)).iter().copied().collect();
    let moved = kempf_ness_project(data, &z.rotated(&rotation), tol)?;
    Ok((moved.hat_k - hat_k).abs())
}

/// For `a = exp(Bη)`: the projection is unchanged and `K̂(a·z) − K̂(z) = ⟨c, η⟩`.
fn scaling_defect(
    data: &DelzantData,
    z: &FlatPoint,
    eta: &[f64],
    base: &crate::quotient::KempfNessResult,
    tol: &Tolerances,
) -> Result<f64> {
    let factors: Vec<f64> = (data.kernel_f64() * DVector::from_column_slice(eta))
        .iter()
        .map(|s| s.exp())
        .collect();
    let moved = kempf_ness_project(data, &z.scaled(&factors)?, tol)?;
    let shift: f64 = data.level().iter().zip(eta).map(|(c, e)| c * e).sum();
    let point = max_abs_diff(moved.projected.r(), base.projected.r());
    Ok(point.max((moved.hat_k - base.hat_k - shift).abs()))
}

fn metric_checks(
    p: &LabelledPolytope,
    tol: &Tolerances,
    config: &CheckConfig,
    rng: &mut SampleRng,
) -> Vec<CheckRecord> {
    let mut compat = Probe::new("metric", "J^2 = -1, J^T g J = g, gJ = omega", tol.lin);
    let mut constant = Probe::new("metric", "omega constant", 0.0);
    let reference = canonical_omega(p.dim());
    for x in sampling::interior_points(p, config.samples, 1e-3 * diameter(p), rng) {
        match guillemin_sample(p, &x, tol).and_then(|s| metric_at(&s)) {
            Ok(m) => {
                compat.record(&x, m.compatibility().max());
                constant.record(&x, (&m.omega - &reference).amax());
            }
            Err(e) => {
                compat.error(&x, e.clone());
                constant.error(&x, e);
            }
        }
    }
    let mut interval_probe = Probe::new("metric", "interval: 2x(1-x)G'' = 1", 1e-12);
    let unit = interval();
    for k in 1..1000 {
        let x = k as f64 / 1000.0;
        interval_probe.record_result(
            &[x],
            guillemin_sample(&unit, &[x], tol).map(|s| (2.0 * x * (1.0 - x) * s.hess_g[(0, 0)] - 1.0).abs()),
        );
    }
    [compat, constant, interval_probe].into_iter().map(Probe::finish).collect()
}
