//! The five commands. Each builds a [`Report`] — both renderings at once —
//! and reports back whether contract failures were observed, which drives
//! the exit status. Findings never fail a run: models that break theorem
//! hypotheses are data here, not errors.

use std::sync::Arc;

use perimkit::config::Caps;
use perimkit::decomp::{decompose, saturation_report, Algorithm};
use perimkit::exact::{q_to_f64, q_to_string, Q};
use perimkit::extreme::{compare, BVBallInstance};
use perimkit::io::{format_cells, format_function, parse_cells, parse_function, realize};
use perimkit::model::audits::{
    audit_boundary_cancellation, audit_isotropy, audit_pi_constants,
};
use perimkit::model::SpaceModel;
use perimkit::set::CellSet;
use perimkit::study::carpet_study;
use perimkit::verify::run_suites;
use perimkit::{Error, Result};

use crate::report::{csv_encode, Report, TableOut};

fn caps_line(caps: &Caps) -> String {
    format!(
        "brute={} xi={} regions={} free={} patterns={} pairs={}",
        caps.brute, caps.xi, caps.regions, caps.free, caps.patterns, caps.pairs
    )
}

fn preamble(t: &mut TableOut, model: &SpaceModel, caps: &Caps, seed: u64) {
    let unbounded = (0..model.n_cells())
        .filter(|&c| model.is_unbounded(c))
        .count();
    t.kv(
        "model",
        format!("{} ({})", model.meta().label, model.kind().name()),
    );
    t.kv(
        "cells",
        format!("{} ({unbounded} unbounded)", model.n_cells()),
    );
    t.kv("atoms", format!("{}", model.n_atoms()));
    t.kv("caps", caps_line(caps));
    t.kv("seed", format!("{seed}"));
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn measure_string(set: &CellSet) -> String {
    match set.measure().as_finite() {
        Some(m) => q_to_string(m),
        None => "infinite".to_string(),
    }
}

/// Structure audits: isotropy, boundary cancellation, boundary-scale
/// constants, and — given a set — its boundary-density table.
pub fn cmd_audit(
    model_spec: &str,
    set: Option<&str>,
    caps: &Caps,
    seed: u64,
) -> Result<Report> {
    let model = realize(model_spec)?.model;
    let mut t = TableOut::new("structure audit");
    preamble(&mut t, &model, caps, seed);
    let mut checks: Vec<Vec<String>> = Vec::new();

    let iso = audit_isotropy(&model);
    t.heading("isotropy");
    if iso.is_isotropic() {
        let line = format!(
            "pass: all {} atoms weigh interior occupancies evenly",
            model.n_atoms()
        );
        t.line(&line);
        checks.push(vec!["isotropy".into(), "pass".into(), line]);
    } else {
        let rows: Vec<Vec<String>> = iso
            .violations
            .iter()
            .take(16)
            .map(|v| {
                let theta: Vec<String> = v.theta.iter().map(q_to_string).collect();
                vec![v.atom.to_string(), theta.join(", ")]
            })
            .collect();
        t.table(&["atom", "theta"], &rows);
        t.line(format!(
            "finding: uneven interior weights at {} of {} atoms",
            iso.violations.len(),
            model.n_atoms()
        ));
        for v in &iso.violations {
            let theta: Vec<String> = v.theta.iter().map(q_to_string).collect();
            checks.push(vec![
                "isotropy".into(),
                "finding".into(),
                format!("atom {} theta = [{}]", v.atom, theta.join(", ")),
            ]);
        }
    }

    let canc = audit_boundary_cancellation(&model, caps, 1000, seed);
    t.heading("boundary cancellation");
    t.kv(
        "pairs",
        format!(
            "{} {}",
            canc.pairs_checked,
            if canc.exhaustive { "exhaustive" } else { "sampled" }
        ),
    );
    if canc.passed() {
        t.line("pass: no disjoint pair keeps shared boundary mass in its union");
        checks.push(vec![
            "cancellation".into(),
            "pass".into(),
            format!("{} pairs", canc.pairs_checked),
        ]);
    } else {
        let rows: Vec<Vec<String>> = canc
            .counterexamples
            .iter()
            .take(8)
            .map(|ce| {
                vec![
                    ce.e_cells
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                    ce.f_cells
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                    ce.atoms
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                    q_to_string(&ce.mass),
                ]
            })
            .collect();
        t.table(&["E", "F", "surviving atoms", "mass"], &rows);
        t.line(format!(
            "finding: shared boundary survives the union for {} of {} disjoint pairs",
            canc.total_failures, canc.pairs_checked
        ));
        for row in &rows {
            checks.push(vec![
                "cancellation".into(),
                "finding".into(),
                format!("E={{{}}} F={{{}}} atoms={{{}}} mass={}", row[0], row[1], row[2], row[3]),
            ]);
        }
    }

    if model.has_geometry() {
        let d_max = model
            .bounded_cells()
            .filter_map(|c| model.diameter(c))
            .max()
            .cloned()
            .expect("bounded cells carry diameters");
        let radii = [
            d_max.clone(),
            &d_max * Q::from_integer(2.into()),
            &d_max * Q::from_integer(4.into()),
        ];
        let pi = audit_pi_constants(&model, &radii, 8, 24, seed)?;
        t.heading("boundary-scale constants");
        let mut rows = Vec::new();
        for (name, witness) in [
            ("doubling", &pi.doubling),
            ("poincare", &pi.poincare),
            ("isoperimetric", &pi.isoperimetric),
        ] {
            let row = match witness {
                Some(w) => vec![
                    name.to_string(),
                    format!("{:.6}", w.ratio),
                    w.center.to_string(),
                    q_to_string(&w.radius),
                ],
                None => vec![name.to_string(), "n/a".into(), "-".into(), "-".into()],
            };
            checks.push(vec![name.into(), "value".into(), row[1..].join(" ")]);
            rows.push(row);
        }
        t.table(&["constant", "ratio", "center", "radius"], &rows);
    }

    let csv = match set {
        None => csv_encode(&["check", "outcome", "detail"], &checks),
        Some(literal) => {
            let e = parse_cells(&model, literal)?;
            t.heading(&format!("boundary densities of {{{}}}", format_cells(&e)));
            t.kv("perimeter", q_to_string(&e.perimeter_exact()));
            let rows: Vec<Vec<String>> = e
                .theta_map()
                .iter()
                .map(|(atom, theta)| {
                    vec![
                        atom.to_string(),
                        q_to_string(model.h(*atom)),
                        q_to_string(theta),
                    ]
                })
                .collect();
            t.table(&["atom", "h", "theta"], &rows);
            csv_encode(&["atom_id", "h", "theta"], &rows)
        }
    };

    Ok(Report {
        command: "audit",
        table: t.finish(),
        csv,
    })
}

/// Components of a set — or, for a function literal, the slicing of the
/// function along its value scale, which is the canonical decomposition a
/// function admits.
pub fn cmd_decompose(
    model_spec: &str,
    set_literal: &str,
    algorithm: Algorithm,
    alpha: Option<f64>,
    saturate: bool,
    caps: &Caps,
    seed: u64,
) -> Result<Report> {
    let model = realize(model_spec)?.model;
    let resolved = resolve_literal(set_literal)?;
    if resolved.trim_start().starts_with('{') {
        if saturate {
            return Err(Error::InvalidArgument(
                "--saturate applies to sets, not to function literals".into(),
            ));
        }
        return slice_function(&model, &resolved, caps, seed);
    }

    let e = parse_cells(&model, &resolved)?;
    let report = decompose(&e, algorithm, alpha, caps)?;
    let mut t = TableOut::new("decomposition");
    preamble(&mut t, &model, caps, seed);
    t.kv("set", format!("{{{}}}", format_cells(&e)));
    t.kv("measure", measure_string(&e));
    t.kv("perimeter", q_to_string(&report.perimeter_total));
    t.kv(
        "algorithm",
        format!("{} (effective {})", report.requested, report.effective),
    );
    t.kv("uniqueness guaranteed", yes_no(report.uniqueness_guaranteed));

    let component_row = |i: usize, c: &CellSet, p: &Q| -> Vec<String> {
        vec![
            i.to_string(),
            format_cells(c),
            measure_string(c),
            q_to_string(p),
        ]
    };
    let mut rows: Vec<Vec<String>> = report
        .components
        .iter()
        .zip(&report.perimeters)
        .enumerate()
        .map(|(i, (c, p))| component_row(i, c, p))
        .collect();
    t.heading("components");
    t.table(&["component", "cells", "measure", "perimeter"], &rows);

    let mut csv_rows: Vec<Vec<String>> = rows
        .drain(..)
        .map(|mut r| {
            let mut row = vec!["component".to_string()];
            row.append(&mut r);
            row
        })
        .collect();

    if saturate {
        let sat = saturation_report(&e, caps)?;
        t.heading("holes");
        if sat.holes.is_empty() {
            t.line("none: the set is saturated");
        } else {
            let rows: Vec<Vec<String>> = sat
                .holes
                .iter()
                .enumerate()
                .map(|(i, h)| component_row(i, h, &h.perimeter_exact()))
                .collect();
            t.table(&["hole", "cells", "measure", "perimeter"], &rows);
            for mut r in rows {
                let mut row = vec!["hole".to_string()];
                row.append(&mut r);
                csv_rows.push(row);
            }
        }
        t.kv("saturation", format!("{{{}}}", format_cells(&sat.saturation)));
        t.kv("saturated", yes_no(sat.saturated));
        t.kv(
            "saturation perimeter",
            q_to_string(&sat.saturation.perimeter_exact()),
        );
        csv_rows.push(vec![
            "saturation".to_string(),
            "0".to_string(),
            format_cells(&sat.saturation),
            measure_string(&sat.saturation),
            q_to_string(&sat.saturation.perimeter_exact()),
        ]);
    }

    Ok(Report {
        command: "decompose",
        table: t.finish(),
        csv: csv_encode(
            &["kind", "index", "cells", "measure", "perimeter"],
            &csv_rows,
        ),
    })
}

fn resolve_literal(s: &str) -> Result<String> {
    match s.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path)?),
        None => Ok(s.to_string()),
    }
}

fn slice_function(
    model: &Arc<SpaceModel>,
    literal: &str,
    caps: &Caps,
    seed: u64,
) -> Result<Report> {
    let f = parse_function(model, literal)?;
    let sliced = f.coarea_decompose();
    let mut t = TableOut::new("value slicing");
    preamble(&mut t, model, caps, seed);
    t.kv("function", format_function(&f));
    t.kv("variation", q_to_string(&f.tv_exact()));
    t.kv("base level", q_to_string(&sliced.base));
    t.heading("slices");
    let rows: Vec<Vec<String>> = sliced
        .slices
        .iter()
        .map(|s| {
            vec![
                q_to_string(&s.t_lo),
                q_to_string(&s.t_hi),
                q_to_string(&s.perimeter),
                format_cells(&s.set),
            ]
        })
        .collect();
    t.table(&["t_lo", "t_hi", "perimeter", "superlevel cells"], &rows);
    let csv_rows: Vec<Vec<String>> = rows
        .into_iter()
        .map(|mut r| {
            r.truncate(3);
            r
        })
        .collect();
    Ok(Report {
        command: "decompose",
        table: t.finish(),
        csv: csv_encode(&["t_lo", "t_hi", "perimeter"], &csv_rows),
    })
}

/// Vertices of the unit-variation ball on a support, classified and checked
/// against the signed scaled-indicator predictions.
pub fn cmd_extreme(
    model_spec: &str,
    support: &str,
    caps: &Caps,
    seed: u64,
) -> Result<Report> {
    let model = realize(model_spec)?.model;
    let support = parse_cells(&model, support)?;
    let instance = BVBallInstance::new(&support, caps)?;
    let report = compare(&instance, caps)?;

    let mut t = TableOut::new("extreme points");
    preamble(&mut t, &model, caps, seed);
    t.kv("support", format!("{{{}}}", format_cells(&support)));
    t.kv("dimension", instance.dimension().to_string());
    t.kv(
        "complement connected",
        yes_no(report.complement_connected),
    );
    t.kv("negation symmetric", yes_no(report.negation_symmetric));
    t.kv("vertices", report.vertices.len().to_string());
    t.kv("predictions", report.predictions.len().to_string());
    t.kv("exact match", yes_no(report.exact_match));

    t.heading("vertices");
    let rows: Vec<Vec<String>> = report
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| {
            vec![
                i.to_string(),
                format_cells(&v.support),
                v.indicator_value
                    .as_ref()
                    .map(q_to_string)
                    .unwrap_or_else(|| "-".to_string()),
                v.kind.name().to_string(),
                yes_no(v.predicted),
            ]
        })
        .collect();
    t.table(&["vertex", "support", "value", "kind", "predicted"], &rows);

    t.heading("predictions");
    let pred_rows: Vec<Vec<String>> = report
        .predictions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                i.to_string(),
                format_cells(&p.prediction.set),
                if p.prediction.negative { "-" } else { "+" }.to_string(),
                yes_no(p.is_vertex),
                yes_no(p.midpoint_extreme),
            ]
        })
        .collect();
    if pred_rows.is_empty() {
        t.line("none: no subset of the support is simple");
    } else {
        t.table(
            &["prediction", "set", "sign", "vertex", "midpoint-extreme"],
            &pred_rows,
        );
    }

    if !report.mismatches.is_empty() {
        t.heading("findings");
        for m in &report.mismatches {
            t.line(format!("- {} [{}]", m.diagnosis, format_function(&m.function)));
        }
    }

    Ok(Report {
        command: "extreme",
        table: t.finish(),
        csv: csv_encode(&["vertex", "support", "value", "kind", "predicted"], &rows),
    })
}

/// Strip-density trends over the pre-fractal carpet levels.
pub fn cmd_carpet_study(caps: &Caps, seed: u64) -> Result<Report> {
    const LEVELS: usize = 4;
    let rows = carpet_study(LEVELS, caps)?;
    let mut t = TableOut::new("carpet trend study");
    let sides: Vec<String> = perimkit::study::default_carpet_sequence(LEVELS)
        .iter()
        .map(q_to_string)
        .collect();
    t.kv("levels", LEVELS.to_string());
    t.kv("hole sides", sides.join(", "));
    t.kv(
        "strip half-width",
        q_to_string(&perimkit::study::strip_half_width()),
    );
    t.kv("test set", "cells inside the left half [0,1/2] x [0,1]");
    t.kv("caps", caps_line(caps));
    t.kv("seed", format!("{seed}"));

    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let abscissa = r
                .abscissa
                .as_ref()
                .map(q_to_string)
                .unwrap_or_else(|| "full".to_string());
            vec![
                r.level.to_string(),
                abscissa,
                format!("{:.12}", q_to_f64(&r.ratio)),
                q_to_string(&r.ratio),
                r.components.to_string(),
            ]
        })
        .collect();
    t.heading("trend");
    t.table(
        &["level", "abscissa", "ratio", "exact", "components"],
        &table_rows,
    );

    let csv_rows: Vec<Vec<String>> = table_rows
        .into_iter()
        .map(|r| vec![r[0].clone(), r[1].clone(), r[2].clone(), r[4].clone()])
        .collect();
    Ok(Report {
        command: "carpet-study",
        table: t.finish(),
        csv: csv_encode(&["level", "abscissa", "ratio", "components"], &csv_rows),
    })
}

/// All invariant suites at the configured caps. Returns the report and
/// whether any suite recorded a contract failure.
pub fn cmd_verify(model_spec: &str, caps: &Caps, seed: u64) -> Result<(Report, bool)> {
    let model = realize(model_spec)?.model;
    let results = run_suites(&model, caps, seed);

    let mut t = TableOut::new("invariant suites");
    preamble(&mut t, &model, caps, seed);
    t.heading("suites");
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.suite.to_string(),
                r.checks.to_string(),
                r.findings.len().to_string(),
                r.failures.len().to_string(),
                if r.passed() { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    t.table(&["suite", "checks", "findings", "failures", "status"], &rows);

    if results.iter().any(|r| !r.findings.is_empty()) {
        t.heading("findings");
        for r in &results {
            for f in &r.findings {
                t.line(format!("{}: {f}", r.suite));
            }
        }
    }
    let failed = results.iter().any(|r| !r.passed());
    if failed {
        t.heading("failures");
        for r in &results {
            for f in &r.failures {
                t.line(format!("{}: {f}", r.suite));
            }
        }
    }

    Ok((
        Report {
            command: "verify",
            table: t.finish(),
            csv: csv_encode(
                &["suite", "checks", "findings", "failures", "status"],
                &rows,
            ),
        },
        failed,
    ))
}
