//! Decomposition guarantees beyond the end-to-end gate: certified splits
//! keep part boundaries inside the whole, components never grow new
//! boundary, indecomposable sets that overlap merge indecomposably, chains
//! grown cell by cell stay indecomposable, certified splits distribute the
//! perimeter of every subset, partitions of 13- and 14-cell sets are
//! unique, and all three strategies agree on every six-edge metric graph.

use std::sync::Arc;

use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use perimkit::config::Caps;
use perimkit::decomp::{
    decompose, enumerate_indecomposable_partitions, is_additive_split, is_indecomposable,
    Algorithm,
};
use perimkit::exact::{q_int, Q};
use perimkit::model::builders::{build_grid, build_metric_graph, build_star};
use perimkit::model::SpaceModel;
use perimkit::set::CellSet;

fn cell_subset(model: &Arc<SpaceModel>, bits: u64) -> CellSet {
    CellSet::from_cells(model, (0..model.n_cells()).filter(|c| bits >> c & 1 == 1)).unwrap()
}

/// Cell adjacency induced by the positive-weight atoms.
fn neighbors(model: &SpaceModel) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); model.n_cells()];
    for a in 0..model.n_atoms() {
        if *model.h(a) > Q::zero() {
            let incident = &model.atom(a).incident;
            for i in 0..incident.len() {
                for j in i + 1..incident.len() {
                    out[incident[i]].push(incident[j]);
                    out[incident[j]].push(incident[i]);
                }
            }
        }
    }
    out
}

#[test]
fn splits_and_components_never_grow_new_boundary() {
    let model = Arc::new(build_grid(3, 3, false).unwrap());
    let caps = Caps::default();
    for bits in 0u64..1 << 9 {
        let e = cell_subset(&model, bits);
        let boundary = e.essential_boundary();
        let report = decompose(&e, Algorithm::Fast, None, &caps).unwrap();
        let sum: Q = report.perimeters.iter().cloned().sum();
        assert_eq!(sum, e.perimeter_exact(), "set {bits:#b}");
        for part in &report.components {
            // Components carve the set without adding boundary mass...
            let grown = part.essential_boundary().difference(&boundary).unwrap();
            assert!(grown.h_mass().is_zero(), "set {bits:#b}");
            // ...and each one is one half of a certified additive split.
            let cert = is_additive_split(&e, part, None).unwrap();
            assert!(cert.is_valid(), "set {bits:#b}");
            assert_eq!(cert.shared_boundary_mass, Some(Q::zero()));
            let g_grown = cert.g.essential_boundary().difference(&boundary).unwrap();
            assert!(g_grown.h_mass().is_zero(), "set {bits:#b}");
        }
    }
}

#[test]
fn overlapping_indecomposable_sets_merge_indecomposably() {
    let caps = Caps::default();
    let models: Vec<Arc<SpaceModel>> = vec![
        Arc::new(build_grid(3, 3, false).unwrap()),
        Arc::new(build_star(3, &q_int(1), 2).unwrap()),
    ];
    for model in models {
        assert!(model.all_isotropic());
        let n = model.n_cells();
        let flags: Vec<bool> = (0u64..1 << n)
            .map(|bits| {
                let e = cell_subset(&model, bits);
                is_indecomposable(&e, None, Algorithm::Fast, &caps)
                    .unwrap()
                    .indecomposable
            })
            .collect();
        let boundaries: Vec<u64> = (0u64..1 << n)
            .map(|bits| {
                cell_subset(&model, bits)
                    .essential_boundary()
                    .atoms()
                    .fold(0u64, |m, a| m | 1 << a)
            })
            .collect();
        let mut merges = 0u64;
        for e in 0usize..1 << n {
            if !flags[e] {
                continue;
            }
            for f in 0usize..1 << n {
                if !flags[f] {
                    continue;
                }
                // Shared cells carry positive measure; shared boundary
                // atoms carry positive weight. Either one glues the union.
                if e & f != 0 || boundaries[e] & boundaries[f] != 0 {
                    assert!(
                        flags[e | f],
                        "union of {e:#b} and {f:#b} decomposed on {}",
                        model.n_cells()
                    );
                    merges += 1;
                }
            }
        }
        assert!(
            merges > 1 << n,
            "the sweep barely exercised the hypothesis ({merges} merges)"
        );
    }
}

#[test]
fn sets_grown_cell_by_cell_stay_indecomposable() {
    let model = Arc::new(build_grid(4, 4, true).unwrap());
    let caps = Caps::default();
    let adjacency = neighbors(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let mut cells = vec![rng.gen_range(0..16usize)];
        loop {
            let set = CellSet::from_cells(&model, cells.iter().copied()).unwrap();
            let report = is_indecomposable(&set, None, Algorithm::Fast, &caps).unwrap();
            assert!(report.indecomposable, "chain prefix {cells:?}");
            if cells.len() == 8 {
                break;
            }
            let mut frontier: Vec<usize> = cells
                .iter()
                .flat_map(|&c| adjacency[c].iter().copied())
                .filter(|&c| c < 16 && !cells.contains(&c))
                .collect();
            frontier.sort_unstable();
            frontier.dedup();
            cells.push(*frontier.choose(&mut rng).unwrap());
        }
    }
}

#[test]
fn certified_splits_distribute_the_perimeter_of_every_subset() {
    let model = Arc::new(build_grid(3, 3, false).unwrap());
    let caps = Caps::default();
    let mut splits_seen = 0u64;
    for bits in 0u64..1 << 9 {
        let e = cell_subset(&model, bits);
        let report = decompose(&e, Algorithm::Fast, None, &caps).unwrap();
        if report.components.len() < 2 {
            continue;
        }
        let cert = is_additive_split(&e, &report.components[0], None).unwrap();
        assert!(cert.is_valid());
        splits_seen += 1;
        // Every subset of the whole splits additively along the certified
        // parts, atom by atom — hence for every window at once.
        let mut a_bits = bits;
        loop {
            let a = cell_subset(&model, a_bits);
            let af = a.intersection(&cert.f).unwrap();
            let ag = a.intersection(&cert.g).unwrap();
            for atom in 0..model.n_atoms() {
                assert_eq!(
                    a.theta_at(atom),
                    af.theta_at(atom) + ag.theta_at(atom),
                    "set {bits:#b}, subset {a_bits:#b}, atom {atom}"
                );
            }
            assert_eq!(
                a.perimeter_exact(),
                af.perimeter_exact() + ag.perimeter_exact()
            );
            if a_bits == 0 {
                break;
            }
            a_bits = (a_bits - 1) & bits;
        }
    }
    assert!(splits_seen > 100);
}

#[test]
fn partitions_of_thirteen_and_fourteen_cell_sets_are_unique() {
    let model = Arc::new(build_grid(5, 5, true).unwrap());
    let caps = Caps::default();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let pool: Vec<usize> = (0..25).collect();
    for size in [13usize, 14] {
        for _ in 0..8 {
            let mut cells = pool.clone();
            cells.shuffle(&mut rng);
            cells.truncate(size);
            let e = CellSet::from_cells(&model, cells).unwrap();
            let partitions = enumerate_indecomposable_partitions(&e, &caps).unwrap();
            assert_eq!(partitions.len(), 1, "{:?}", e.to_indices());
            // The unique partition is the component decomposition.
            let report = decompose(&e, Algorithm::Fast, None, &caps).unwrap();
            let mut found: Vec<Vec<usize>> =
                partitions[0].iter().map(|p| p.to_indices()).collect();
            let mut expected: Vec<Vec<usize>> =
                report.components.iter().map(|p| p.to_indices()).collect();
            found.sort();
            expected.sort();
            assert_eq!(found, expected);
        }
    }
}

/// Every labeled connected simple graph with exactly six edges; the
/// smaller graphs are already swept elsewhere.
fn six_edge_graphs() -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    for v in 2..=7 {
        let universe: Vec<(usize, usize)> = (0..v)
            .flat_map(|a| (a + 1..v).map(move |b| (a, b)))
            .collect();
        if universe.len() < 6 {
            continue;
        }
        for mask in 1u64..1 << universe.len() {
            if mask.count_ones() != 6 {
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

#[test]
fn strategies_agree_on_every_six_edge_graph() {
    let caps = Caps::default();
    for (v, edges) in six_edge_graphs() {
        let weighted: Vec<_> = edges.iter().map(|&(a, b)| (a, b, q_int(1))).collect();
        let model = Arc::new(build_metric_graph(v, &weighted, 1).unwrap());
        for bits in 0u64..1 << 6 {
            let e = cell_subset(&model, bits);
            let fast = decompose(&e, Algorithm::Fast, None, &caps).unwrap();
            let brute = decompose(&e, Algorithm::Brute, None, &caps).unwrap();
            let xi = decompose(&e, Algorithm::XiAtoms, None, &caps).unwrap();
            let key = |r: &perimkit::decomp::DecompositionReport| -> Vec<Vec<usize>> {
                r.components.iter().map(|c| c.to_indices()).collect()
            };
            assert_eq!(key(&fast), key(&brute), "graph {edges:?} set {bits:#b}");
            assert_eq!(key(&fast), key(&xi), "graph {edges:?} set {bits:#b}");
            let sum: Q = fast.perimeters.iter().cloned().sum();
            assert_eq!(sum, e.perimeter_exact());
        }
    }
}

fn shared_grid() -> &'static Arc<SpaceModel> {
    static MODEL: std::sync::OnceLock<Arc<SpaceModel>> = std::sync::OnceLock::new();
    MODEL.get_or_init(|| Arc::new(build_grid(5, 5, true).unwrap()))
}

proptest! {
    #[test]
    fn components_on_the_five_by_five_never_grow_new_boundary(bits in 0u64..1 << 25) {
        let model = shared_grid();
        let caps = Caps::default();
        let e = cell_subset(model, bits);
        let boundary = e.essential_boundary();
        let report = decompose(&e, Algorithm::Fast, None, &caps).unwrap();
        let sum: Q = report.perimeters.iter().cloned().sum();
        prop_assert_eq!(&sum, &e.perimeter_exact());
        for part in &report.components {
            let grown = part.essential_boundary().difference(&boundary).unwrap();
            prop_assert!(grown.h_mass().is_zero());
            let cert = is_additive_split(&e, part, None).unwrap();
            prop_assert!(cert.is_valid());
        }
    }
}
