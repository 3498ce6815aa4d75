//! The family of additively split subsets, viewed as a finite sigma-algebra.
//!
//! For a set `E` and an atom window `B`, collect every `F` contained in `E`
//! with `P(E, B) = P(F, B) + P(E \ F, B)`. This family contains the empty
//! set and `E`, is closed under complement within `E` and under union, and
//! its atoms are exactly the indecomposable components of `E`. Everything
//! here is finite, so the closure claims are checked by counting: each
//! member is a union of atoms by construction, and there are `2^k` unions
//! of `k` atoms, so the family is closed iff its size hits that bound.

use std::collections::HashSet;
use std::sync::Arc;

use crate::config::Caps;
use crate::error::Error;
use crate::model::SpaceModel;
use crate::set::{AtomSet, CellSet};
use crate::Result;

use super::{canonical_sets, LocalView};

/// How far the localization recheck got within its work budget.
#[derive(Debug, Clone)]
pub struct LocalizationCheck {
    /// Members whose own split family was recomputed from scratch and
    /// compared against the restriction of the big family.
    pub checked: usize,
    /// Total number of members.
    pub total: usize,
    /// Every recheck matched.
    pub holds: bool,
    /// True when every member fit in the budget.
    pub complete: bool,
}

/// The family of additively split subsets of one set.
#[derive(Debug, Clone)]
pub struct XiReport {
    /// Every additively split subset, in ascending packed-mask order; the
    /// empty set comes first and the full set last.
    pub members: Vec<CellSet>,
    /// Atoms of the family, canonically ordered. Unions of atoms reproduce
    /// the members exactly when `closed` holds.
    pub atoms: Vec<CellSet>,
    /// Counting identity: `members.len() == 2^atoms.len()`, together with
    /// the complement sweep. This is what makes the family a sigma-algebra.
    pub closed: bool,
    /// Whether union closure was additionally checked pair by pair (done
    /// only for families small enough to square).
    pub union_checked: bool,
    pub localization: LocalizationCheck,
}

/// Enumerate the sigma-algebra of additively split subsets of `e` over
/// `window`, its atoms, and the closure and localization evidence.
pub fn xi_sigma_algebra(
    e: &CellSet,
    window: Option<&AtomSet>,
    caps: &Caps,
) -> Result<XiReport> {
    if let Some(w) = window {
        if !Arc::ptr_eq(w.model(), e.model()) {
            return Err(Error::ModelMismatch);
        }
    }
    let model = e.model();
    let cells = e.to_indices();
    let n = cells.len();
    if n > caps.xi.min(31) {
        return Err(Error::CapExceeded {
            op: "xi_sigma_algebra",
            what: "cells",
            size: n,
            cap: caps.xi.min(31),
        });
    }
    let view = LocalView::new(model, &cells, window);
    let member_masks = additive_masks(&view, n);
    let blocks = refine_blocks(n, &member_masks);
    let counting = member_masks.len() == 1usize << blocks.len();
    let full = mask_full(n);
    let member_set: HashSet<u32> = member_masks.iter().copied().collect();
    let complement_ok = member_masks.iter().all(|m| member_set.contains(&(full & !m)));

    let mut union_checked = false;
    let mut union_ok = true;
    if member_masks.len() <= 1024 {
        union_checked = true;
        'pairs: for (i, &a) in member_masks.iter().enumerate() {
            for &b in &member_masks[i..] {
                if !member_set.contains(&(a | b)) {
                    union_ok = false;
                    break 'pairs;
                }
            }
        }
    }
    let closed = counting && complement_ok && union_ok;

    // Localization: the split family of a member, computed from scratch,
    // must be the restriction of the big family to subsets of that member.
    let budget: u64 = 1 << 24;
    let mut spent: u64 = 0;
    let mut checked = 0usize;
    let mut holds = true;
    let mut complete = true;
    for &g in &member_masks {
        let cost = 1u64 << g.count_ones();
        if spent + cost > budget {
            complete = false;
            continue;
        }
        spent += cost;
        let positions: Vec<u32> = (0..n as u32).filter(|&i| g & (1 << i) != 0).collect();
        let sub_cells: Vec<usize> = positions.iter().map(|&i| cells[i as usize]).collect();
        let sub_view = LocalView::new(model, &sub_cells, window);
        let fresh: HashSet<u32> = additive_masks(&sub_view, sub_cells.len())
            .into_iter()
            .map(|sm| {
                positions
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| sm & (1 << j) != 0)
                    .fold(0u32, |acc, (_, &p)| acc | (1 << p))
            })
            .collect();
        let restricted: HashSet<u32> = member_masks
            .iter()
            .copied()
            .filter(|m| m & !g == 0)
            .collect();
        if fresh != restricted {
            holds = false;
        }
        checked += 1;
    }

    let members = member_masks
        .iter()
        .map(|&m| CellSet::from_cells(model, view.extract(m)))
        .collect::<Result<Vec<_>>>()?;
    let atoms = canonical_sets(
        model,
        blocks.iter().map(|&b| view.extract(b)).collect(),
    )?;
    Ok(XiReport {
        members,
        atoms,
        closed,
        union_checked,
        localization: LocalizationCheck {
            checked,
            total: member_masks.len(),
            holds,
            complete,
        },
    })
}

/// Atoms of the split family as cell lists, for the decomposition driver.
/// Errors when the family fails its counting identity, since atoms of a
/// non-closed family would not partition the set.
pub(crate) fn xi_atoms_masks(
    model: &Arc<SpaceModel>,
    cells: &[usize],
    window: Option<&AtomSet>,
    caps: &Caps,
) -> Result<Vec<Vec<usize>>> {
    let n = cells.len();
    if n > caps.xi.min(31) {
        return Err(Error::CapExceeded {
            op: "decompose",
            what: "cells",
            size: n,
            cap: caps.xi.min(31),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let view = LocalView::new(model, cells, window);
    let member_masks = additive_masks(&view, n);
    let blocks = refine_blocks(n, &member_masks);
    if member_masks.len() != 1usize << blocks.len() {
        return Err(Error::Unsupported {
            op: "decompose",
            reason: "the split family is not closed, so its atoms do not partition the set"
                .into(),
        });
    }
    Ok(blocks.iter().map(|&b| view.extract(b)).collect())
}

fn mask_full(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        (1u32 << n) - 1
    }
}

/// All subset masks that split additively off the full list. Always
/// contains 0 and the full mask.
fn additive_masks(view: &LocalView<'_>, n: usize) -> Vec<u32> {
    let full = mask_full(n);
    let mut members = Vec::new();
    for m in 0..=full {
        if view.split_is_additive(m) {
            members.push(m);
        }
    }
    members
}

/// Partition refinement: start from one block and split it along every
/// member until each member contains every block fully or not at all.
fn refine_blocks(n: usize, members: &[u32]) -> Vec<u32> {
    if n == 0 {
        return Vec::new();
    }
    let mut blocks = vec![mask_full(n)];
    for &m in members {
        let mut next = Vec::with_capacity(blocks.len());
        for &b in &blocks {
            let inside = b & m;
            let outside = b & !m;
            if inside != 0 && outside != 0 {
                next.push(inside);
                next.push(outside);
            } else {
                next.push(b);
            }
        }
        blocks = next;
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_int;
    use crate::model::builders::{build_grid, build_star};

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn star4_pair_has_four_members_and_two_atoms() {
        let model = Arc::new(build_star(4, &q_int(1), 1).unwrap());
        let e = CellSet::from_cells(&model, [0, 1]).unwrap();
        let report = xi_sigma_algebra(&e, None, &caps()).unwrap();
        assert_eq!(report.members.len(), 4);
        assert_eq!(report.atoms.len(), 2);
        assert!(report.closed);
        assert!(report.union_checked);
        assert!(report.localization.holds);
        assert!(report.localization.complete);
        assert_eq!(report.localization.checked, 4);
    }

    #[test]
    fn star3_pair_has_trivial_family() {
        let model = Arc::new(build_star(3, &q_int(1), 1).unwrap());
        let e = CellSet::from_cells(&model, [0, 1]).unwrap();
        let report = xi_sigma_algebra(&e, None, &caps()).unwrap();
        assert_eq!(report.members.len(), 2);
        assert_eq!(report.atoms.len(), 1);
        assert!(report.atoms[0].same_set(&e));
        assert!(report.closed);
    }

    #[test]
    fn whole_star_is_one_atom() {
        let model = Arc::new(build_star(3, &q_int(1), 1).unwrap());
        let e = CellSet::full(&model);
        let report = xi_sigma_algebra(&e, None, &caps()).unwrap();
        assert_eq!(report.members.len(), 2);
        assert_eq!(report.atoms.len(), 1);
    }

    #[test]
    fn grid_domino_plus_single_gives_two_atoms() {
        let model = Arc::new(build_grid(4, 4, false).unwrap());
        let e = CellSet::from_cells(&model, [0, 1, 10]).unwrap();
        let report = xi_sigma_algebra(&e, None, &caps()).unwrap();
        assert_eq!(report.members.len(), 4);
        assert_eq!(report.atoms.len(), 2);
        assert!(report.closed);
        assert!(report.localization.holds);
    }

    #[test]
    fn empty_window_splits_everything() {
        let model = Arc::new(build_grid(3, 3, false).unwrap());
        let e = CellSet::from_cells(&model, [0, 1, 2]).unwrap();
        let window = AtomSet::empty(&model);
        let report = xi_sigma_algebra(&e, Some(&window), &caps()).unwrap();
        assert_eq!(report.members.len(), 8);
        assert_eq!(report.atoms.len(), 3);
        assert!(report.closed);
    }

    #[test]
    fn empty_set_has_singleton_family() {
        let model = Arc::new(build_grid(3, 3, false).unwrap());
        let e = CellSet::empty(&model);
        let report = xi_sigma_algebra(&e, None, &caps()).unwrap();
        assert_eq!(report.members.len(), 1);
        assert!(report.atoms.is_empty());
        assert!(report.closed);
    }

    #[test]
    fn cap_is_enforced() {
        let model = Arc::new(build_grid(5, 5, false).unwrap());
        let e = CellSet::full(&model);
        assert!(matches!(
            xi_sigma_algebra(&e, None, &caps()),
            Err(Error::CapExceeded { .. })
        ));
    }
}
