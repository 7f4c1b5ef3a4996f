//! Labelled polytopes `Δ = {x : ⟨x, u_j⟩ ≥ λ_j}` with integer normals and
//! rational offsets.
//!
//! Construction validates everything exactly: boundedness (by Fourier–Motzkin
//! on the recession cone), nonempty interior, and absence of redundant
//! facets. Vertices are found by exact rational solves over `n`-subsets of
//! facets, so active sets and simplicity never depend on a tolerance.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, InvalidPolytope, Result};
use crate::exact::{self, rat, Rational};
use crate::lattice::{abs_determinant, IntMatrix};

/// Largest denominator accepted when a float offset is turned into a rational.
pub const MAX_LAMBDA_DENOMINATOR: u64 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub lambda: Rational,
    /// Set when `lambda` was given as a float and rounded to a nearby rational.
    pub approximated: bool,
}

impl Facet {
    pub fn new(normal: Vec<i64>, lambda: Rational) -> Self {
        Self {
            normal,
            lambda,
            approximated: false,
        }
    }

    pub fn integral(normal: Vec<i64>, lambda: i64) -> Self {
        Self::new(normal, rat(lambda))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Vertex {
    pub point: Vec<Rational>,
    /// Facet indices with `ℓ_j(point) = 0`, ascending.
    pub active: Vec<usize>,
}

impl Vertex {
    pub fn point_f64(&self) -> Vec<f64> {
        self.point.iter().map(exact::to_f64).collect()
    }

    pub fn is_simple(&self, dim: usize) -> bool {
        self.active.len() == dim
    }
}

#[derive(Clone, Debug)]
pub struct LabelledPolytope {
    name: Option<String>,
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vertex>,
    normals_f64: Vec<Vec<f64>>,
    lambda_f64: Vec<f64>,
}

impl LabelledPolytope {
    /// Validates and builds a polytope.
    pub fn new(dim: usize, facets: Vec<Facet>, name: Option<String>) -> Result<Self> {
        if dim == 0 {
            return Err(InvalidPolytope::ZeroDimension.into());
        }
        for (j, f) in facets.iter().enumerate() {
            if f.normal.len() != dim {
                return Err(InvalidPolytope::DimensionMismatch {
                    facet: j,
                    expected: dim,
                    found: f.normal.len(),
                }
                .into());
            }
            if f.normal.iter().all(|&v| v == 0) {
                return Err(InvalidPolytope::ZeroNormal { facet: j }.into());
            }
        }
        let normals: Vec<Vec<i64>> = facets.iter().map(|f| f.normal.clone()).collect();
        if !recession_cone_is_trivial_fm(&normals, dim) {
            return Err(InvalidPolytope::Unbounded.into());
        }
        let vertices = vertices_of(dim, &facets);
        if vertices.is_empty() {
            return Err(InvalidPolytope::EmptyInterior.into());
        }
        let count = rat(vertices.len() as i64);
        let barycenter: Vec<Rational> = (0..dim)
            .map(|r| vertices.iter().map(|v| &v.point[r]).sum::<Rational>() / &count)
            .collect();
        if facets.iter().any(|f| !affine(f, &barycenter).is_positive()) {
            return Err(InvalidPolytope::EmptyInterior.into());
        }
        if facets.len() <= dim {
            return Err(InvalidPolytope::TooFewFacets {
                facets: facets.len(),
                dim,
            }
            .into());
        }
        let required = if dim == 1 { 1 } else { dim };
        for j in 0..facets.len() {
            let contacts = vertices.iter().filter(|v| v.active.contains(&j)).count();
            if contacts < required {
                return Err(InvalidPolytope::RedundantFacet { facet: j, contacts }.into());
            }
        }

        let normals_f64 = facets
            .iter()
            .map(|f| f.normal.iter().map(|&v| v as f64).collect())
            .collect();
        let lambda_f64 = facets.iter().map(|f| exact::to_f64(&f.lambda)).collect();
        Ok(Self {
            name,
            dim,
            facets,
            vertices,
            normals_f64,
            lambda_f64,
        })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of facets `d`.
    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertices in lexicographic order of their coordinates.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn normals_f64(&self) -> &[Vec<f64>] {
        &self.normals_f64
    }

    pub fn lambda_f64(&self) -> &[f64] {
        &self.lambda_f64
    }

    /// The `n × d` matrix whose columns are the facet normals.
    pub fn normal_matrix(&self) -> IntMatrix {
        let cols: Vec<&[i64]> = self.facets.iter().map(|f| f.normal.as_slice()).collect();
        IntMatrix::from_columns(self.dim, &cols)
    }

    pub fn approximated_facets(&self) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&j| self.facets[j].approximated)
            .collect()
    }

    /// True when every offset is an integer.
    pub fn has_integral_lambda(&self) -> bool {
        self.facets.iter().all(|f| f.lambda.is_integer())
    }

    /// `ℓ_j(x) = ⟨x, u_j⟩ − λ_j` for every facet.
    pub fn ell(&self, x: &[f64]) -> Vec<f64> {
        self.normals_f64
            .iter()
            .zip(&self.lambda_f64)
            .map(|(u, l)| dot(u, x) - l)
            .collect()
    }

    /// Exact `ℓ_j` at a rational point.
    pub fn ell_exact(&self, x: &[Rational]) -> Vec<Rational> {
        self.facets.iter().map(|f| affine(f, x)).collect()
    }

    /// True iff `ℓ_j(x) > tol_boundary` for every facet.
    pub fn interior_contains(&self, x: &[f64], tol_boundary: f64) -> bool {
        x.len() == self.dim && self.ell(x).iter().all(|&l| l > tol_boundary)
    }

    /// Vertex barycenter as floats; always interior for a valid polytope.
    pub fn barycenter(&self) -> Vec<f64> {
        let k = self.vertices.len() as f64;
        (0..self.dim)
            .map(|r| self.vertices.iter().map(|v| exact::to_f64(&v.point[r])).sum::<f64>() / k)
            .collect()
    }

    /// Axis-aligned bounding box of the vertices: `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for (r, c) in v.point_f64().into_iter().enumerate() {
                lo[r] = lo[r].min(c);
                hi[r] = hi[r].max(c);
            }
        }
        (lo, hi)
    }

    /// Copy translated by `t`: `λ_j ↦ λ_j + ⟨t, u_j⟩`.
    pub fn translated(&self, t: &[Rational]) -> Result<Self> {
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                lambda: &f.lambda + dot_exact(&f.normal, t),
                approximated: f.approximated,
            })
            .collect();
        Self::new(self.dim, facets, self.name.clone())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_exact(u: &[i64], x: &[Rational]) -> Rational {
    u.iter()
        .zip(x)
        .map(|(&a, b)| b * BigInt::from(a))
        .sum()
}

fn affine(f: &Facet, x: &[Rational]) -> Rational {
    dot_exact(&f.normal, x) - &f.lambda
}

fn rational_rows(normals: &[&[i64]]) -> Vec<Vec<Rational>> {
    normals
        .iter()
        .map(|u| u.iter().map(|&v| rat(v)).collect())
        .collect()
}

fn vertices_of(dim: usize, facets: &[Facet]) -> Vec<Vertex> {
    let mut points = BTreeSet::new();
    for subset in (0..facets.len()).combinations(dim) {
        let rows: Vec<&[i64]> = subset.iter().map(|&j| facets[j].normal.as_slice()).collect();
        let a = rational_rows(&rows);
        let b: Vec<Rational> = subset.iter().map(|&j| facets[j].lambda.clone()).collect();
        let Some(x) = exact::solve(&a, &b) else {
            continue;
        };
        if facets.iter().all(|f| !affine(f, &x).is_negative()) {
            points.insert(x);
        }
    }
    points
        .into_iter()
        .map(|point| {
            let active = (0..facets.len())
                .filter(|&j| affine(&facets[j], &point).is_zero())
                .collect();
            Vertex { point, active }
        })
        .collect()
}

/// All vertices of `Δ` with their active sets, each exactly once.
pub fn enumerate_vertices(p: &LabelledPolytope) -> Vec<Vertex> {
    vertices_of(p.dim, &p.facets)
}

/// Outcome of the Delzant test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Integral,
    Rational,
    Invalid(String),
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Integral => "Integral",
            Classification::Rational => "Rational",
            Classification::Invalid(_) => "Invalid",
        }
    }

    pub fn is_delzant(&self) -> bool {
        !matches!(self, Classification::Invalid(_))
    }
}

#[derive(Clone, Debug)]
pub struct DelzantReport {
    pub classification: Classification,
    pub vertices: Vec<Vertex>,
    /// `|det(u_{j₁}, …, u_{jₙ})|` per vertex; `None` at a non-simple vertex.
    pub vertex_orders: Vec<Option<BigInt>>,
}

/// Decides whether `P` is an integral or rational Delzant polytope.
pub fn classify_delzant(p: &LabelledPolytope) -> DelzantReport {
    let vertices = p.vertices.clone();
    let mut orders = Vec::with_capacity(vertices.len());
    let mut first_bad: Option<&Vertex> = None;
    for v in &vertices {
        if v.is_simple(p.dim) {
            let cols: Vec<&[i64]> = v.active.iter().map(|&j| p.facets[j].normal.as_slice()).collect();
            let det = abs_determinant(&IntMatrix::from_columns(p.dim, &cols))
                .expect("square by construction");
            orders.push(Some(det));
        } else {
            orders.push(None);
            first_bad.get_or_insert(v);
        }
    }
    let classification = if let Some(v) = first_bad {
        let pt: Vec<String> = v.point.iter().map(ToString::to_string).collect();
        Classification::Invalid(format!(
            "non-simple vertex ({}) with {} active facets {:?}",
            pt.join(", "),
            v.active.len(),
            v.active
        ))
    } else if orders.iter().flatten().all(One::is_one) {
        Classification::Integral
    } else {
        Classification::Rational
    };
    DelzantReport {
        classification,
        vertices,
        vertex_orders: orders,
    }
}

/// Fourier–Motzkin route: the cone `{x : ⟨x, u_j⟩ ≥ 0}` is `{0}` iff none of
/// the systems `{⟨x, u_j⟩ ≥ 0, ±x_i ≥ 1}` is feasible.
pub fn recession_cone_is_trivial_fm(normals: &[Vec<i64>], dim: usize) -> bool {
    let base: Vec<(Vec<Rational>, Rational)> = normals
        .iter()
        .map(|u| (u.iter().map(|&v| rat(v)).collect(), Rational::zero()))
        .collect();
    for i in 0..dim {
        for sign in [1, -1] {
            let mut system = base.clone();
            let mut coeffs = vec![Rational::zero(); dim];
            coeffs[i] = rat(sign);
            system.push((coeffs, Rational::one()));
            if fm_feasible(system, dim) {
                return false;
            }
        }
    }
    true
}

/// Feasibility of `{a·x ≥ b}` by eliminating one variable at a time.
fn fm_feasible(mut system: Vec<(Vec<Rational>, Rational)>, dim: usize) -> bool {
    for k in 0..dim {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut next = Vec::new();
        for ineq in system {
            if ineq.0[k].is_positive() {
                pos.push(ineq);
            } else if ineq.0[k].is_negative() {
                neg.push(ineq);
            } else {
                next.push(ineq);
            }
        }
        for (pa, pb) in &pos {
            for (na, nb) in &neg {
                let wp = -&na[k];
                let wn = pa[k].clone();
                let a: Vec<Rational> = pa.iter().zip(na).map(|(x, y)| x * &wp + y * &wn).collect();
                let b = pb * &wp + nb * &wn;
                next.push((a, b));
            }
        }
        let mut normalized = BTreeSet::new();
        for (a, b) in next {
            match a.iter().find(|v| !v.is_zero()) {
                None => {
                    if b.is_positive() {
                        return false;
                    }
                }
                Some(lead) => {
                    let scale = lead.abs();
                    let a = a.iter().map(|v| v / &scale).collect::<Vec<_>>();
                    normalized.insert((a, b / scale));
                }
            }
        }
        system = normalized.into_iter().collect();
    }
    system.iter().all(|(_, b)| !b.is_positive())
}

/// Extreme-ray route: with full-rank normals, the cone is nontrivial iff some
/// one-dimensional intersection of `n − 1` facet hyperplanes contains a
/// feasible ray.
pub fn recession_cone_is_trivial_rays(normals: &[Vec<i64>], dim: usize) -> bool {
    let all: Vec<&[i64]> = normals.iter().map(Vec::as_slice).collect();
    if exact::rank(&rational_rows(&all)) < dim {
        return false;
    }
    for subset in (0..normals.len()).combinations(dim - 1) {
        let rows: Vec<&[i64]> = subset.iter().map(|&j| normals[j].as_slice()).collect();
        let a = rational_rows(&rows);
        let null = exact::nullspace(&a, dim);
        if null.len() != 1 {
            continue;
        }
        let w = &null[0];
        for sign in [1, -1] {
            let s = rat(sign);
            let ray: Vec<Rational> = w.iter().map(|v| v * &s).collect();
            if normals.iter().all(|u| !dot_exact(u, &ray).is_negative()) {
                return false;
            }
        }
    }
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolytope {
    #[serde(default)]
    name: Option<String>,
    dim: usize,
    facets: Vec<RawFacet>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFacet {
    u: Vec<i64>,
    lambda: RawLambda,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawLambda {
    Int(i64),
    Text(String),
    Float(f64),
}

/// Parses and validates a polytope document.
pub fn parse_polytope(text: &str) -> Result<LabelledPolytope> {
    let raw: RawPolytope = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let facets = raw
        .facets
        .into_iter()
        .enumerate()
        .map(|(j, f)| {
            let (lambda, approximated) = match f.lambda {
                RawLambda::Int(v) => (rat(v), false),
                RawLambda::Text(s) => (parse_fraction(&s).ok_or_else(|| {
                    InvalidPolytope::BadLambda {
                        facet: j,
                        reason: format!("expected \"p/q\", got {s:?}"),
                    }
                })?, false),
                RawLambda::Float(v) => {
                    let r = exact::nearest_rational(v, MAX_LAMBDA_DENOMINATOR).ok_or_else(|| {
                        InvalidPolytope::BadLambda {
                            facet: j,
                            reason: format!("non-finite value {v}"),
                        }
                    })?;
                    (r, true)
                }
            };
            Ok(Facet {
                normal: f.u,
                lambda,
                approximated,
            })
        })
        .collect::<Result<Vec<_>, InvalidPolytope>>()?;
    LabelledPolytope::new(raw.dim, facets, raw.name)
}

fn parse_fraction(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim().parse::<BigInt>().ok()?, q.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if q.is_zero() {
        return None;
    }
    Some(Rational::new(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn points(p: &LabelledPolytope) -> BTreeSet<Vec<Rational>> {
        enumerate_vertices(p).into_iter().map(|v| v.point).collect()
    }

    #[test]
    fn parses_cp1() {
        let p = parse_polytope(
            r#"{"name": "cp1", "dim": 1, "facets": [{"u": [1], "lambda": 0}, {"u": [-1], "lambda": -1}]}"#,
        )
        .unwrap();
        assert_eq!(p.name(), Some("cp1"));
        assert_eq!(p.facet_count(), 2);
        let pts = points(&p);
        assert_eq!(pts, BTreeSet::from([vec![rat(0)], vec![rat(1)]]));
    }

    #[test]
    fn parses_lambda_forms() {
        let p = parse_polytope(
            r#"{"dim": 1, "facets": [{"u": [1], "lambda": "-1/2"}, {"u": [-1], "lambda": -0.25}]}"#,
        )
        .unwrap();
        assert_eq!(p.facets()[0].lambda, Rational::new((-1).into(), 2.into()));
        assert!(!p.facets()[0].approximated);
        assert_eq!(p.facets()[1].lambda, Rational::new((-1).into(), 4.into()));
        assert_eq!(p.approximated_facets(), vec![1]);
        assert!(!p.has_integral_lambda());
    }

    #[test]
    fn rejects_zero_normal() {
        let err = parse_polytope(
            r#"{"dim": 2, "facets": [{"u": [0, 0], "lambda": 0}, {"u": [1, 0], "lambda": 0}, {"u": [0, 1], "lambda": 0}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("zero normal"), "{err}");
    }

    #[test]
    fn rejects_half_line_as_unbounded() {
        let err = parse_polytope(r#"{"dim": 1, "facets": [{"u": [1], "lambda": 0}]}"#).unwrap_err();
        assert!(err.to_string().contains("unbounded"), "{err}");
    }

    #[test]
    fn rejects_dimension_mismatch_and_bad_lambda() {
        let err = parse_polytope(
            r#"{"dim": 2, "facets": [{"u": [1], "lambda": 0}]}"#,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidPolytope(InvalidPolytope::DimensionMismatch { facet: 0, .. })
        ));
        let err = parse_polytope(
            r#"{"dim": 1, "facets": [{"u": [1], "lambda": "1/0"}, {"u": [-1], "lambda": -1}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidPolytope(InvalidPolytope::BadLambda { .. })));
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_polytope("{\"dim\": 1,\n \"facets\": [}").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_polytope(
            r#"{"dim": 1, "facets": [{"u": [1], "lambda": 0}, {"u": [-1], "lambda": -1}]} trailing"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, .. }));
        let err = parse_polytope(r#"{"dim": 1, "facets": [], "extra": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
    }

    #[test]
    fn rejects_empty_and_flat_polytopes() {
        // x ≥ 1 and x ≤ 0
        let err = LabelledPolytope::new(
            1,
            vec![Facet::integral(vec![1], 1), Facet::integral(vec![-1], 0)],
            None,
        )
        .unwrap_err();
        assert_eq!(err, Error::InvalidPolytope(InvalidPolytope::EmptyInterior));
        // the single point x = 0
        let err = LabelledPolytope::new(
            1,
            vec![Facet::integral(vec![1], 0), Facet::integral(vec![-1], 0)],
            None,
        )
        .unwrap_err();
        assert_eq!(err, Error::InvalidPolytope(InvalidPolytope::EmptyInterior));
    }

    #[test]
    fn rejects_redundant_facets() {
        // x ≥ −1 never touches [0, 1]
        let err = LabelledPolytope::new(
            1,
            vec![
                Facet::integral(vec![1], 0),
                Facet::integral(vec![-1], -1),
                Facet::integral(vec![1], -1),
            ],
            None,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidPolytope(InvalidPolytope::RedundantFacet { facet: 2, .. })
        ));
        // a corner cut touching the unit square only at (1, 1)
        let err = LabelledPolytope::new(
            2,
            vec![
                Facet::integral(vec![1, 0], 0),
                Facet::integral(vec![-1, 0], -1),
                Facet::integral(vec![0, 1], 0),
                Facet::integral(vec![0, -1], -1),
                Facet::integral(vec![-1, -1], -2),
            ],
            None,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidPolytope(InvalidPolytope::RedundantFacet { facet: 4, contacts: 1 })
        ));
    }

    #[test]
    fn vertices_of_square_and_simplex() {
        let square = LabelledPolytope::new(
            2,
            vec![
                Facet::integral(vec![1, 0], 0),
                Facet::integral(vec![-1, 0], -1),
                Facet::integral(vec![0, 1], 0),
                Facet::integral(vec![0, -1], -1),
            ],
            None,
        )
        .unwrap();
        let expected: BTreeSet<_> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|p| vec![rat(p[0]), rat(p[1])])
            .collect();
        assert_eq!(points(&square), expected);
        let expected: BTreeSet<_> = [[0, 0], [1, 0], [0, 1]]
            .iter()
            .map(|p| vec![rat(p[0]), rat(p[1])])
            .collect();
        assert_eq!(points(&cp2()), expected);
        for v in cp2().vertices() {
            assert_eq!(v.active.len(), 2);
        }
    }

    #[test]
    fn classification_examples() {
        let report = classify_delzant(&cp2());
        assert_eq!(report.classification, Classification::Integral);
        assert!(report.vertex_orders.iter().all(|o| o.as_ref().is_some_and(One::is_one)));

        let wp = LabelledPolytope::new(
            1,
            vec![Facet::integral(vec![1], 0), Facet::integral(vec![-2], -2)],
            None,
        )
        .unwrap();
        let report = classify_delzant(&wp);
        assert_eq!(report.classification, Classification::Rational);
        assert_eq!(report.vertex_orders, vec![Some(BigInt::from(1)), Some(BigInt::from(2))]);
    }

    #[test]
    fn square_pyramid_apex_is_not_simple() {
        let p = LabelledPolytope::new(
            3,
            vec![
                Facet::integral(vec![0, 0, 1], 0),
                Facet::integral(vec![1, 0, -1], 0),
                Facet::integral(vec![-1, 0, -1], -2),
                Facet::integral(vec![0, 1, -1], 0),
                Facet::integral(vec![0, -1, -1], -2),
            ],
            None,
        )
        .unwrap();
        let report = classify_delzant(&p);
        match &report.classification {
            Classification::Invalid(reason) => assert!(reason.contains("non-simple"), "{reason}"),
            other => panic!("expected Invalid, got {other:?}"),
        }
        assert_eq!(report.vertices.len(), 5);
        assert_eq!(report.vertex_orders.iter().filter(|o| o.is_none()).count(), 1);
    }

    #[test]
    fn interior_queries() {
        let p = cp1();
        assert!(p.interior_contains(&[0.5], 1e-9));
        assert!(!p.interior_contains(&[0.0], 1e-9));
        assert!(!p.interior_contains(&[0.5, 0.5], 1e-9));
        assert!(cp2().interior_contains(&[1.0 / 3.0, 1.0 / 3.0], 1e-9));
        assert_eq!(p.ell(&[0.25]), vec![0.25, 0.75]);
    }

    #[test]
    fn translation_shifts_lambda() {
        let t = vec![rat(2), Rational::new(1.into(), 3.into())];
        let moved = cp2().translated(&t).unwrap();
        assert_eq!(moved.facets()[0].lambda, rat(2));
        assert_eq!(moved.facets()[2].lambda, rat(-1) - rat(2) - Rational::new(1.into(), 3.into()));
        assert_eq!(classify_delzant(&moved).classification, Classification::Integral);
    }

    #[test]
    fn recession_routes_on_small_cones() {
        let square = vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]];
        assert!(recession_cone_is_trivial_fm(&square, 2));
        assert!(recession_cone_is_trivial_rays(&square, 2));
        let strip = vec![vec![1, 0], vec![-1, 0]];
        assert!(!recession_cone_is_trivial_fm(&strip, 2));
        assert!(!recession_cone_is_trivial_rays(&strip, 2));
        let wedge = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        assert!(!recession_cone_is_trivial_fm(&wedge, 2));
        assert!(!recession_cone_is_trivial_rays(&wedge, 2));
        assert!(!recession_cone_is_trivial_fm(&[vec![1]], 1));
        assert!(!recession_cone_is_trivial_rays(&[vec![1]], 1));
        assert!(recession_cone_is_trivial_rays(&[vec![1], vec![-2]], 1));
    }
}
