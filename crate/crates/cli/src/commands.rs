use std::io::Write;

use mforge_core::checks::{run_checks, CheckConfig, CheckRecord};
use mforge_core::flat::FlatPoint;
use mforge_core::lattice::IntMatrix;
use mforge_core::legendre::invert;
use mforge_core::metric::metric_at;
use mforge_core::polytope::{classify_delzant, parse_polytope, Classification, LabelledPolytope};
use mforge_core::potential::{guillemin_sample, PotentialSample};
use mforge_core::quotient::{build_delzant_data, hat_k_decomposition, isotropy_order, kempf_ness_project};
use mforge_core::{Error, Tolerances};
use rayon::prelude::*;

use crate::output::{csv_line, real, Doc};
use crate::{Cli, Command, Failure, Format, EXIT_INVALID_INPUT, EXIT_RUNTIME};

const GRID_CHUNK: usize = 4096;
const CHECK_SAMPLES: usize = 50;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    if cli.format == Format::Csv
        && !matches!(cli.command, Command::Vertices | Command::Eval | Command::Grid | Command::Check)
    {
        return Err(Failure::usage(
            "csv output is available for vertices, eval, grid and check",
        ));
    }
    let text = std::fs::read_to_string(&cli.polytope).map_err(|e| Failure {
        code: EXIT_INVALID_INPUT,
        kind: "io",
        message: format!("{}: {e}", cli.polytope.display()),
    })?;
    let p = parse_polytope(&text)?;
    let tol = cli.tolerances();
    match cli.command {
        Command::Validate => validate(&p, out),
        Command::Vertices => vertices(&p, cli.format, out),
        Command::DelzantData => delzant_data(&p, out),
        Command::Eval => eval(&p, cli, &tol, out),
        Command::Grid => grid(&p, cli, &tol, out),
        Command::LegendreInvert => legendre_invert(&p, cli, &tol, out),
        Command::Project => project(&p, cli, &tol, out),
        Command::Check => check(&p, cli.format, &tol, out),
    }
}

fn name(p: &LabelledPolytope) -> Doc {
    p.name().map_or(Doc::Null, Doc::str)
}

fn int_matrix(m: &IntMatrix) -> Doc {
    Doc::Array(
        (0..m.rows())
            .map(|i| Doc::Array(m.row(i).iter().map(Doc::int).collect()))
            .collect(),
    )
}

fn indices(v: &[usize]) -> Doc {
    Doc::Array(v.iter().map(Doc::int).collect())
}

fn validate(p: &LabelledPolytope, out: &mut dyn Write) -> Result<(), Failure> {
    let report = classify_delzant(p);
    let orders: Vec<Doc> = report
        .vertex_orders
        .iter()
        .map(|o| o.as_ref().map_or(Doc::Null, Doc::int))
        .collect();
    let reason = match &report.classification {
        Classification::Invalid(r) => Doc::str(r.clone()),
        _ => Doc::Null,
    };
    let doc = Doc::object()
        .field("name", name(p))
        .field("dim", Doc::int(p.dim()))
        .field("facets", Doc::int(p.facet_count()))
        .field("classification", Doc::str(report.classification.label()))
        .field("reason", reason)
        .field("vertices", Doc::int(report.vertices.len()))
        .field("orders", Doc::Array(orders))
        .field("approximated_facets", indices(&p.approximated_facets()))
        .build();
    out.write_all(doc.render().as_bytes())?;
    match report.classification {
        Classification::Invalid(reason) => Err(Error::NotDelzant(reason).into()),
        _ => Ok(()),
    }
}

fn vertices(p: &LabelledPolytope, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let report = classify_delzant(p);
    if format == Format::Csv {
        let mut header: Vec<String> = (1..=p.dim()).map(|r| format!("x_{r}")).collect();
        header.extend(["exact".into(), "active".into(), "order".into()]);
        out.write_all(csv_line(&header).as_bytes())?;
        for (v, order) in report.vertices.iter().zip(&report.vertex_orders) {
            let mut row: Vec<String> = v.point_f64().into_iter().map(real).collect();
            row.push(v.point.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "));
            row.push(v.active.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" "));
            row.push(order.as_ref().map_or(String::new(), |o| o.to_string()));
            out.write_all(csv_line(&row).as_bytes())?;
        }
        return Ok(());
    }
    let list = report
        .vertices
        .iter()
        .zip(&report.vertex_orders)
        .map(|(v, order)| {
            Doc::object()
                .field("point", Doc::reals(&v.point_f64()))
                .field("exact", Doc::Array(v.point.iter().map(|c| Doc::str(c.to_string())).collect()))
                .field("active", indices(&v.active))
                .field("order", order.as_ref().map_or(Doc::Null, Doc::int))
                .build()
        })
        .collect();
    let doc = Doc::object()
        .field("name", name(p))
        .field("vertices", Doc::Array(list))
        .build();
    out.write_all(doc.render().as_bytes())?;
    Ok(())
}

fn delzant_data(p: &LabelledPolytope, out: &mut dyn Write) -> Result<(), Failure> {
    let data = build_delzant_data(p)?;
    let report = classify_delzant(p);
    let isotropy = report
        .vertices
        .iter()
        .map(|v| isotropy_order(&data, &v.active).map(Doc::int))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = Doc::object()
        .field("name", name(p))
        .field("classification", Doc::str(data.classification().label()))
        .field("u", int_matrix(data.u_matrix()))
        .field("kernel_basis", int_matrix(data.kernel_basis()))
        .field("level", Doc::reals(data.level()))
        .field(
            "level_exact",
            Doc::Array(data.level_exact().iter().map(|c| Doc::str(c.to_string())).collect()),
        )
        .field("sublattice_index", Doc::int(data.sublattice_index()))
        .field("vertex_isotropy", Doc::Array(isotropy))
        .field("nu_facets", indices(data.nu_facets()))
        .build();
    out.write_all(doc.render().as_bytes())?;
    Ok(())
}

fn require_points(cli: &Cli) -> Result<Vec<&[f64]>, Failure> {
    if cli.points.is_empty() {
        return Err(Failure::usage("eval needs at least one --point"));
    }
    Ok(cli.points.iter().map(|r| r.0.as_slice()).collect())
}

fn sample_header(n: usize, d: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|r| format!("x_{r}")).collect();
    h.extend((1..=d).map(|j| format!("ell_{j}")));
    h.push("G".into());
    h.push("F".into());
    h.extend((1..=n).map(|r| format!("y_{r}")));
    for name in ["hessG", "hessF"] {
        for r in 1..=n {
            h.extend((1..=n).map(|s| format!("{name}_{r}{s}")));
        }
    }
    h
}

fn sample_row(s: &PotentialSample) -> Vec<String> {
    let mut row: Vec<String> = s.x.iter().chain(&s.ell).map(|&v| real(v)).collect();
    row.push(real(s.g));
    row.push(real(s.f));
    row.extend(s.y.iter().map(|&v| real(v)));
    for m in [&s.hess_g, &s.hess_f] {
        row.extend(m.row_iter().flat_map(|r| r.iter().map(|&v| real(v)).collect::<Vec<_>>()));
    }
    row
}

fn sample_doc(s: &PotentialSample) -> Doc {
    Doc::object()
        .field("x", Doc::reals(&s.x))
        .field("ell", Doc::reals(&s.ell))
        .field("G", Doc::Real(s.g))
        .field("y", Doc::reals(&s.y))
        .field("hessG", Doc::matrix(&s.hess_g))
        .field("F", Doc::Real(s.f))
        .field("hessF", Doc::matrix(&s.hess_f))
        .build()
}

fn eval(p: &LabelledPolytope, cli: &Cli, tol: &Tolerances, out: &mut dyn Write) -> Result<(), Failure> {
    let points = require_points(cli)?;
    let samples = points
        .iter()
        .map(|x| guillemin_sample(p, x, tol))
        .collect::<Result<Vec<_>, _>>()?;
    if cli.format == Format::Csv {
        out.write_all(csv_line(&sample_header(p.dim(), p.facet_count())).as_bytes())?;
        for s in &samples {
            out.write_all(csv_line(&sample_row(s)).as_bytes())?;
        }
        return Ok(());
    }
    let mut docs = Vec::with_capacity(samples.len());
    for s in &samples {
        let m = metric_at(s)?;
        let compat = m.compatibility();
        let Doc::Object(mut fields) = sample_doc(s) else {
            unreachable!()
        };
        fields.push(("g".into(), Doc::matrix(&m.g)));
        fields.push(("omega".into(), Doc::matrix(&m.omega)));
        fields.push(("J".into(), Doc::matrix(&m.j)));
        fields.push((
            "compatibility".into(),
            Doc::object()
                .field("j_squared", Doc::Real(compat.j_squared))
                .field("isometry", Doc::Real(compat.isometry))
                .field("kahler_form", Doc::Real(compat.kahler_form))
                .build(),
        ));
        docs.push(Doc::Object(fields));
    }
    let doc = Doc::object()
        .field("name", name(p))
        .field("tol_boundary", Doc::Real(tol.boundary))
        .field("samples", Doc::Array(docs))
        .build();
    out.write_all(doc.render().as_bytes())?;
    Ok(())
}

/// Lattice point `index` (last axis fastest) of the `resolution`-per-axis grid.
fn grid_point(lo: &[f64], hi: &[f64], resolution: usize, mut index: usize) -> Vec<f64> {
    let n = lo.len();
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let k = index % resolution;
        index /= resolution;
        x[r] = lo[r] + (hi[r] - lo[r]) * k as f64 / (resolution - 1) as f64;
    }
    x
}

fn grid(p: &LabelledPolytope, cli: &Cli, tol: &Tolerances, out: &mut dyn Write) -> Result<(), Failure> {
    let resolution = cli.resolution as usize;
    let total = u32::try_from(p.dim())
        .ok()
        .and_then(|n| resolution.checked_pow(n))
        .ok_or_else(|| Failure::usage("grid is too large"))?;
    let (lo, hi) = p.bounding_box();
    let csv = cli.format == Format::Csv;
    if csv {
        out.write_all(csv_line(&sample_header(p.dim(), p.facet_count())).as_bytes())?;
    } else {
        out.write_all(b"[")?;
    }
    let mut first = true;
    for start in (0..total).step_by(GRID_CHUNK) {
        let end = (start + GRID_CHUNK).min(total);
        let rows: Vec<Option<mforge_core::Result<PotentialSample>>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let x = grid_point(&lo, &hi, resolution, i);
                p.interior_contains(&x, tol.boundary)
                    .then(|| guillemin_sample(p, &x, tol))
            })
            .collect();
        for row in rows.into_iter().flatten() {
            let s = row?;
            if csv {
                out.write_all(csv_line(&sample_row(&s)).as_bytes())?;
            } else {
                out.write_all(if first { b"\n  " } else { b",\n  " })?;
                let text = sample_doc(&s).render();
                out.write_all(text.trim_end().replace('\n', "\n  ").as_bytes())?;
            }
            first = false;
        }
    }
    if !csv {
        out.write_all(if first { b"]\n" } else { b"\n]\n" })?;
    }
    Ok(())
}

fn legendre_invert(p: &LabelledPolytope, cli: &Cli, tol: &Tolerances, out: &mut dyn Write) -> Result<(), Failure> {
    let y = cli
        .y
        .as_ref()
        .ok_or_else(|| Failure::usage("legendre-invert needs --y"))?;
    let s = invert(p, &y.0, tol)?;
    let doc = Doc::object()
        .field("name", name(p))
        .field("y", Doc::reals(&s.y_target))
        .field("x", Doc::reals(&s.x))
        .field("iterations", Doc::int(s.iterations))
        .field("residual", Doc::Real(s.residual))
        .field("converged", Doc::Bool(s.converged))
        .build();
    out.write_all(doc.render().as_bytes())?;
    if s.converged {
        Ok(())
    } else {
        Err(Failure::runtime(
            "max_iterations",
            format!(
                "Legendre inversion did not converge after {} iterations (residual {:e})",
                s.iterations, s.residual
            ),
        ))
    }
}

fn polar(v: &FlatPoint) -> Doc {
    Doc::object()
        .field("r", Doc::reals(v.r()))
        .field("theta", Doc::reals(v.theta()))
        .build()
}

fn project(p: &LabelledPolytope, cli: &Cli, tol: &Tolerances, out: &mut dyn Write) -> Result<(), Failure> {
    let z = cli
        .z
        .as_ref()
        .ok_or_else(|| Failure::usage("project needs --z"))?;
    let z = FlatPoint::new(z.0.iter().map(|p| p.0).collect(), z.0.iter().map(|p| p.1).collect())?;
    let data = build_delzant_data(p)?;
    if z.d() != p.facet_count() {
        return Err(Error::DimensionMismatch {
            context: "--z entries per facet",
            expected: p.facet_count(),
            found: z.d(),
        }
        .into());
    }
    let k = kempf_ness_project(&data, &z, tol)?;
    let decomposition = if z.r().iter().all(|&r| r > 0.0) {
        let h = hat_k_decomposition(&data, &z, tol)?;
        Doc::object()
            .field("bg_form", Doc::Real(h.bg_form))
            .field("guillemin_diff", Doc::Real(h.guillemin_diff))
            .field("closed_form", Doc::Real(h.closed_form))
            .field("integral_lambda", Doc::Bool(h.integral_lambda))
            .build()
    } else {
        Doc::Null
    };
    let face: Vec<usize> = k
        .projected
        .r()
        .iter()
        .enumerate()
        .filter(|(_, r)| 0.5 * *r * *r <= tol.boundary)
        .map(|(j, _)| j)
        .collect();
    let order = isotropy_order(&data, &face).map_or(Doc::Null, Doc::int);
    let doc = Doc::object()
        .field("name", name(p))
        .field("z", polar(&z))
        .field("xi", Doc::reals(&k.xi))
        .field("t", Doc::reals(&k.t))
        .field("projected", polar(&k.projected))
        .field("x", Doc::reals(&k.x))
        .field("hatK", Doc::Real(k.hat_k))
        .field("level_residual", Doc::Real(k.residual))
        .field("iterations", Doc::int(k.iterations))
        .field("face", indices(&face))
        .field("isotropy_order", order)
        .field("decomposition", decomposition)
        .build();
    out.write_all(doc.render().as_bytes())?;
    Ok(())
}

fn seed() -> Result<u64, Failure> {
    match std::env::var("MFORGE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("MFORGE_SEED must be a non-negative integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Failure::usage(format!("MFORGE_SEED: {e}"))),
    }
}

fn record_point(r: &CheckRecord) -> Doc {
    r.point.as_deref().map_or(Doc::Null, Doc::reals)
}

fn check(p: &LabelledPolytope, format: Format, tol: &Tolerances, out: &mut dyn Write) -> Result<(), Failure> {
    let seed = seed()?;
    let records = run_checks(p, tol, &CheckConfig { seed, samples: CHECK_SAMPLES });
    let failed = records.iter().filter(|r| !r.passed).count();
    if format == Format::Csv {
        let header = ["module", "invariant", "passed", "defect", "tolerance", "samples", "point", "note"];
        out.write_all(csv_line(&header.map(String::from)).as_bytes())?;
        for r in &records {
            let point = r
                .point
                .as_deref()
                .map(|x| x.iter().map(|&v| real(v)).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            let row = [
                r.module.to_string(),
                r.invariant.to_string(),
                r.passed.to_string(),
                real(r.defect),
                real(r.tolerance),
                r.samples.to_string(),
                point,
                r.note.clone().unwrap_or_default(),
            ];
            out.write_all(csv_line(&row).as_bytes())?;
        }
    } else {
        let list = records
            .iter()
            .map(|r| {
                Doc::object()
                    .field("module", Doc::str(r.module))
                    .field("invariant", Doc::str(r.invariant))
                    .field("passed", Doc::Bool(r.passed))
                    .field("defect", Doc::Real(r.defect))
                    .field("tolerance", Doc::Real(r.tolerance))
                    .field("samples", Doc::int(r.samples))
                    .field("point", record_point(r))
                    .field("note", r.note.clone().map_or(Doc::Null, Doc::Str))
                    .build()
            })
            .collect();
        let doc = Doc::object()
            .field("name", name(p))
            .field("seed", Doc::int(seed))
            .field("passed", Doc::Bool(failed == 0))
            .field("failed", Doc::int(failed))
            .field("records", Doc::Array(list))
            .build();
        out.write_all(doc.render().as_bytes())?;
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_RUNTIME,
            kind: "check_failed",
            message: format!("{failed} of {} invariants failed", records.len()),
        })
    }
}
