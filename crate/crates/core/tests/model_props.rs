//! Builder and audit guarantees, checked exhaustively where the model is
//! small enough to enumerate: every shipped builder emits symmetric density
//! tables, the junction audit flags exactly the uneven vertices, the
//! boundary-cancellation audit clears the 3x3 grid, and a first-principles
//! ramp construction reproduces the perimeter on every connected metric
//! graph with at most six edges.

use std::sync::Arc;

use perimkit::bits::BitMask;
use perimkit::config::Caps;
use perimkit::exact::{q, q_int};
use perimkit::model::audits::{
    audit_boundary_cancellation, audit_isotropy, oracle_ramp_relaxation,
};
use perimkit::model::builders::{
    build_grid, build_metric_graph, build_path, build_sierpinski_carpet, build_star, build_strip,
};
use perimkit::model::SpaceModel;
use perimkit::set::CellSet;

/// Every labeled connected simple graph with at most `max_edges` edges and
/// no isolated vertices, as (vertex count, edge list) pairs.
fn connected_graph_catalog(max_edges: usize) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    for v in 2..=max_edges + 1 {
        let universe: Vec<(usize, usize)> = (0..v)
            .flat_map(|a| (a + 1..v).map(move |b| (a, b)))
            .collect();
        for mask in 1u64..1 << universe.len() {
            if mask.count_ones() as usize > max_edges {
                continue;
            }
            let edges: Vec<(usize, usize)> = universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let mut reached = 1u64;
            loop {
                let before = reached;
                for &(a, b) in &edges {
                    if reached >> a & 1 == 1 || reached >> b & 1 == 1 {
                        reached |= (1 << a) | (1 << b);
                    }
                }
                if reached == before {
                    break;
                }
            }
            if reached == (1 << v) - 1 {
                out.push((v, edges));
            }
        }
    }
    out
}

fn graph_model(v: usize, edges: &[(usize, usize)], resolution: usize) -> Arc<SpaceModel> {
    let weighted: Vec<_> = edges.iter().map(|&(a, b)| (a, b, q_int(1))).collect();
    Arc::new(build_metric_graph(v, &weighted, resolution).unwrap())
}

fn assert_symmetric_tables(model: &SpaceModel, label: &str) {
    for a in 0..model.n_atoms() {
        let d = model.atom(a).degree();
        for k in 0..=d {
            assert_eq!(
                model.theta(a, k),
                model.theta(a, d - k),
                "{label}: atom {a} breaks theta(k) == theta(d - k) at k = {k}"
            );
        }
    }
}

#[test]
fn shipped_builders_emit_symmetric_density_tables() {
    for w in 1..=4 {
        for h in 1..=4 {
            for frame in [false, true] {
                let m = build_grid(w, h, frame).unwrap();
                assert_symmetric_tables(&m, &format!("grid {w}x{h} frame={frame}"));
            }
        }
    }
    for d in 2..=6 {
        for res in 1..=3 {
            let m = build_star(d, &q(3, 2), res).unwrap();
            assert_symmetric_tables(&m, &format!("star {d} res {res}"));
        }
    }
    for k in 1..=4 {
        let m = build_path(k, &q_int(2), 2).unwrap();
        assert_symmetric_tables(&m, &format!("path {k}"));
    }
    let holes = [q(1, 3), q(1, 9), q(1, 27), q(1, 81)];
    for level in 1..=3 {
        let (m, _) = build_sierpinski_carpet(&holes, level).unwrap();
        assert_symmetric_tables(&m, &format!("carpet level {level}"));
    }
    for rows in 1..=3 {
        let m = build_strip(5, rows).unwrap();
        assert_symmetric_tables(&m, &format!("strip 5x{rows}"));
    }
}

#[test]
fn cancellation_audit_clears_the_three_by_three_grid_exhaustively() {
    let model = Arc::new(build_grid(3, 3, true).unwrap());
    let report = audit_boundary_cancellation(&model, &Caps::default(), 0, 0);
    assert!(report.exhaustive, "9 bounded cells fit the exhaustive bound");
    // Unordered pairs of disjoint nonempty subsets of 9 cells.
    assert_eq!(report.pairs_checked, (19683 - 2 * 512 + 1) / 2);
    assert_eq!(report.total_failures, 0);
    assert!(report.counterexamples.is_empty());
}

#[test]
fn junction_audit_flags_exactly_the_vertices_of_degree_four_or_more() {
    let catalog = connected_graph_catalog(6);
    assert!(catalog.len() > 20_000, "catalog unexpectedly small");
    let mut graphs_with_violations = 0usize;
    for (v, edges) in &catalog {
        let model = graph_model(*v, edges, 1);
        let report = audit_isotropy(&model);
        let flagged: Vec<usize> = report.violations.iter().map(|viol| viol.atom).collect();
        let expected: Vec<usize> = (0..model.n_atoms())
            .filter(|&a| model.atom(a).degree() >= 4)
            .collect();
        assert_eq!(
            flagged, expected,
            "graph on {v} vertices, edges {edges:?}: audit disagrees with the degree rule"
        );
        if !flagged.is_empty() {
            graphs_with_violations += 1;
        }
    }
    // The rule is only interesting if the catalog exercises both outcomes.
    assert!(graphs_with_violations > 1_000);
    assert!(graphs_with_violations < catalog.len());
}

#[test]
fn ramp_relaxation_reproduces_the_perimeter_on_every_small_graph() {
    let catalog = connected_graph_catalog(6);
    let mut subsets_checked = 0u64;
    for (v, edges) in &catalog {
        // Resolution 2 adds interior atoms; affordable only on small graphs.
        let resolutions: &[usize] = if edges.len() <= 3 { &[1, 2] } else { &[1] };
        for &res in resolutions {
            let model = graph_model(*v, edges, res);
            let n = model.n_cells();
            for bits in 0u64..1 << n {
                let members = BitMask::from_indices(n, (0..n).filter(|i| bits >> i & 1 == 1));
                let ramp = oracle_ramp_relaxation(&model, &members).unwrap();
                let set = CellSet::from_mask(&model, members).unwrap();
                assert_eq!(
                    ramp,
                    set.perimeter_exact(),
                    "graph on {v} vertices, edges {edges:?}, res {res}, subset {bits:#b}"
                );
                subsets_checked += 1;
            }
        }
    }
    assert!(subsets_checked > 500_000, "sweep unexpectedly small");
}

#[test]
fn ramp_relaxation_rejects_models_without_graph_structure() {
    let model = Arc::new(build_grid(2, 2, true).unwrap());
    let members = BitMask::from_indices(model.n_cells(), [0]);
    assert!(oracle_ramp_relaxation(&model, &members).is_err());
}
