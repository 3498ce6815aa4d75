//! Simple sets: those pinned down by their essential boundary.
//!
//! Cut the model along the positive-weight atoms of the essential boundary
//! of `E` and look at the connected regions that remain. Each region lies
//! entirely inside or entirely outside `E`, and the sets whose essential
//! boundary hides inside that of `E` (up to weight-zero atoms) are exactly
//! the unions of regions. `E` is *simple* when those unions are only the
//! four trivial ones: empty, everything, `E`, and its complement. By
//! counting, that happens iff there is exactly one region on each side.
//!
//! One region inside also forces `E` indecomposable: the regions glue
//! through full-density atoms, and every bipartition of a glued set breaks
//! additivity at a crossed full-density atom. Symmetrically one region
//! outside forces the complement indecomposable, so a simple set and its
//! complement are both indecomposable by construction.

use num_traits::Zero;

use crate::error::Error;
use crate::set::CellSet;
use crate::Result;

/// Region structure of one set, with a nontrivial boundary-respecting
/// witness when the set is not simple.
#[derive(Debug, Clone)]
pub struct SimplicityReport {
    pub simple: bool,
    /// Connected regions of the set after cutting the essential boundary.
    pub regions_inside: usize,
    /// Connected regions of the complement after the same cut.
    pub regions_outside: usize,
    /// A set other than the trivial four whose essential boundary carries
    /// no mass outside the input's. Present exactly when not simple: a
    /// second inside region if one exists, otherwise the input plus one
    /// enclosed complement region (the saturation, for an annulus).
    pub witness: Option<CellSet>,
}

/// Decide whether `e` is determined by its essential boundary. Both `e`
/// and its complement must be nonempty for the question to make sense.
pub fn is_simple(e: &CellSet) -> Result<SimplicityReport> {
    let model = e.model();
    if e.is_empty() || e.complement().is_empty() {
        return Err(Error::InvalidArgument(
            "is_simple: the set and its complement must both carry positive measure".into(),
        ));
    }
    let boundary = e.essential_boundary();

    let n = model.n_cells();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..model.n_atoms() {
        if model.h(a).is_zero() || boundary.contains(a) {
            continue;
        }
        let incident = &model.atom(a).incident;
        let root = find(&mut parent, incident[0]);
        for &c in &incident[1..] {
            let r = find(&mut parent, c);
            parent[r] = root;
        }
    }
    let mut groups: std::collections::HashMap<usize, Vec<usize>> =
        std::collections::HashMap::new();
    for c in 0..n {
        groups.entry(find(&mut parent, c)).or_default().push(c);
    }
    let mut inside: Vec<Vec<usize>> = Vec::new();
    let mut outside: Vec<Vec<usize>> = Vec::new();
    for region in groups.into_values() {
        let in_e = e.contains(region[0]);
        // Cutting the whole essential boundary leaves no mixed region.
        debug_assert!(region.iter().all(|&c| e.contains(c) == in_e));
        if in_e {
            inside.push(region);
        } else {
            outside.push(region);
        }
    }
    inside.sort_by_key(|r| r[0]);
    outside.sort_by_key(|r| r[0]);

    let simple = inside.len() == 1 && outside.len() == 1;
    let witness = if simple {
        None
    } else if inside.len() >= 2 {
        Some(CellSet::from_cells(model, inside[0].iter().copied())?)
    } else {
        // One region inside, several outside: adjoin an enclosed one,
        // preferring regions of finite measure.
        let region = outside
            .iter()
            .find(|r| r.iter().all(|&c| !model.is_unbounded(c)))
            .unwrap_or(&outside[0]);
        Some(e.union(&CellSet::from_cells(model, region.iter().copied())?)?)
    };
    if let Some(w) = &witness {
        let extra = w.essential_boundary().difference(&boundary)?;
        debug_assert!(extra.h_mass().is_zero());
    }
    Ok(SimplicityReport {
        simple,
        regions_inside: inside.len(),
        regions_outside: outside.len(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::config::Caps;
    use crate::decomp::{is_indecomposable, Algorithm};
    use crate::exact::q_int;
    use crate::model::builders::{build_grid, build_star};

    #[test]
    fn star3_edge_pair_is_not_simple() {
        let model = Arc::new(build_star(3, &q_int(1), 1).unwrap());
        let e = CellSet::from_cells(&model, [0, 1]).unwrap();
        let report = is_simple(&e).unwrap();
        assert!(!report.simple);
        assert_eq!(report.regions_inside, 2);
        assert_eq!(report.regions_outside, 1);
        // The single edge witnesses: its boundary is the junction, which
        // already belongs to the pair's essential boundary.
        assert_eq!(report.witness.unwrap().to_indices(), vec![0]);
    }

    #[test]
    fn annulus_witness_is_its_saturation() {
        let model = Arc::new(build_grid(3, 3, true).unwrap());
        let e = CellSet::from_cells(&model, [0, 1, 2, 3, 5, 6, 7, 8]).unwrap();
        let report = is_simple(&e).unwrap();
        assert!(!report.simple);
        assert_eq!(report.regions_inside, 1);
        assert_eq!(report.regions_outside, 2);
        let block = CellSet::from_cells(&model, 0..9).unwrap();
        assert!(report.witness.unwrap().same_set(&block));
    }

    #[test]
    fn block_in_framed_grid_is_simple() {
        let model = Arc::new(build_grid(4, 4, true).unwrap());
        let e = CellSet::from_cells(&model, [5, 6, 9, 10]).unwrap();
        let report = is_simple(&e).unwrap();
        assert!(report.simple);
        assert!(report.witness.is_none());
        // Simplicity forces both sides indecomposable.
        let caps = Caps::default();
        assert!(
            is_indecomposable(&e, None, Algorithm::Fast, &caps)
                .unwrap()
                .indecomposable
        );
        assert!(
            is_indecomposable(&e.complement(), None, Algorithm::Fast, &caps)
                .unwrap()
                .indecomposable
        );
    }

    #[test]
    fn diagonal_pair_has_an_inside_witness() {
        let model = Arc::new(build_grid(3, 3, false).unwrap());
        let e = CellSet::from_cells(&model, [0, 4]).unwrap();
        let report = is_simple(&e).unwrap();
        assert!(!report.simple);
        assert_eq!(report.regions_inside, 2);
        assert_eq!(report.witness.unwrap().to_indices(), vec![0]);
    }

    #[test]
    fn trivial_inputs_are_rejected() {
        let model = Arc::new(build_grid(3, 3, false).unwrap());
        assert!(is_simple(&CellSet::empty(&model)).is_err());
        assert!(is_simple(&CellSet::full(&model)).is_err());
    }
}
