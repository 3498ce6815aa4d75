//! Decomposition of sets into indecomposable components.
//!
//! A bipartition `(F, G)` of a set `E` is *additive* when the perimeter
//! splits without cancellation: `P(E, B) = P(F, B) + P(G, B)` over the atom
//! window `B`. Because the perimeter is a sum of independent atom
//! contributions and every theta table is subadditive, additivity is a local
//! condition: one exact equality per atom. A set admitting no additive
//! bipartition into two nonempty parts is *indecomposable*; splitting
//! repeatedly until every piece is indecomposable yields the components of
//! `E`, the measure-theoretic counterpart of connected components.
//!
//! Four strategies are provided and cross-checked against one another:
//!
//! * `fast` glues cells through atoms that are rigid at their occupancy and
//!   reads components off a union-find. It is sound exactly when every
//!   touched positive-weight atom is rigid, and falls back to `brute`
//!   otherwise. On grids every interior atom is rigid, so this is plain
//!   topological connectivity.
//! * `brute` recursively takes the first additive bipartition in a canonical
//!   mask order.
//! * `variational` recursively takes the additive bipartition maximizing
//!   `m(F)^(1/alpha) + m(G)^(1/alpha)` for a concavity exponent `alpha > 1`,
//!   favoring balanced splits.
//! * `xi-atoms` enumerates the whole family of additively split subsets,
//!   which is closed under complement and union, and returns its atoms.
//!
//! An exhaustive partition search over connected, indecomposable parts is
//! included as the uniqueness oracle for desk-scale instances.

mod liouville;
mod saturation;
mod simple;
mod xi;

pub use liouville::{check_liouville_equivalence, LiouvilleReport};
pub use saturation::{
    holes, infinite_complement_components, is_saturated, saturate, saturation_report,
    InfiniteComponentsReport, SaturationReport,
};
pub use simple::{is_simple, SimplicityReport};
pub use xi::{xi_sigma_algebra, LocalizationCheck, XiReport};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;

use crate::config::Caps;
use crate::error::Error;
use crate::exact::{q_to_f64, Q};
use crate::model::SpaceModel;
use crate::set::{AtomSet, CellSet};
use crate::Result;

/// Balancing exponent used by the variational strategy when none is given.
/// Any exponent strictly above 1 certifies the same components; 3/2 sits in
/// the middle of the useful range for two-dimensional models.
pub const DEFAULT_ALPHA: f64 = 1.5;

/// Strategy for finding the components of a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Union-find through rigid atoms, falling back to `Brute` when some
    /// touched atom admits a proper additive split of its occupancy.
    Fast,
    /// First additive bipartition in canonical mask order, recursively.
    Brute,
    /// Most balanced additive bipartition first, recursively.
    Variational,
    /// Atoms of the sigma-algebra of additively split subsets.
    XiAtoms,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fast => "fast",
            Algorithm::Brute => "brute",
            Algorithm::Variational => "variational",
            Algorithm::XiAtoms => "xi-atoms",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Algorithm::Fast),
            "brute" => Ok(Algorithm::Brute),
            "variational" => Ok(Algorithm::Variational),
            "xi-atoms" => Ok(Algorithm::XiAtoms),
            _ => Err(Error::Parse {
                what: "algorithm",
                input: s.to_string(),
            }),
        }
    }
}

/// One atom that can obstruct splitting a fixed cell list. `stubs` packs the
/// local indices of the incident cells that belong to the list, so occupancy
/// under a candidate mask is a single popcount.
pub(crate) struct LocalAtom {
    pub(crate) atom: usize,
    pub(crate) stubs: u32,
    pub(crate) occupancy: usize,
}

/// Split-checking view of a cell list with at most 32 members.
///
/// Atoms of occupancy below 2 are dropped (splitting cannot change their
/// contribution), as are atoms of zero weight (they carry no mass) and atoms
/// outside the window.
pub(crate) struct LocalView<'a> {
    pub(crate) model: &'a SpaceModel,
    pub(crate) cells: Vec<usize>,
    pub(crate) atoms: Vec<LocalAtom>,
}

impl<'a> LocalView<'a> {
    pub(crate) fn new(
        model: &'a SpaceModel,
        cells: &[usize],
        window: Option<&AtomSet>,
    ) -> LocalView<'a> {
        debug_assert!(cells.len() <= 32);
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        let mut local = vec![usize::MAX; model.n_cells()];
        for (i, &c) in cells.iter().enumerate() {
            local[c] = i;
        }
        let mut seen = vec![false; model.n_atoms()];
        let mut atoms = Vec::new();
        for &c in cells {
            for &a in model.atoms_of_cell(c) {
                if seen[a] {
                    continue;
                }
                seen[a] = true;
                if window.is_some_and(|w| !w.contains(a)) || model.h(a).is_zero() {
                    continue;
                }
                let mut stubs = 0u32;
                let mut occupancy = 0usize;
                for &inc in &model.atom(a).incident {
                    if local[inc] != usize::MAX {
                        stubs |= 1 << local[inc];
                        occupancy += 1;
                    }
                }
                if occupancy >= 2 {
                    atoms.push(LocalAtom {
                        atom: a,
                        stubs,
                        occupancy,
                    });
                }
            }
        }
        LocalView {
            model,
            cells: cells.to_vec(),
            atoms,
        }
    }

    /// Does the bipartition (`f_mask`, rest) split the whole list additively?
    pub(crate) fn split_is_additive(&self, f_mask: u32) -> bool {
        self.atoms.iter().all(|la| {
            let k_f = (f_mask & la.stubs).count_ones() as usize;
            self.model.split_additive(la.atom, la.occupancy, k_f)
        })
    }

    /// Is the sub-list `part` indecomposable? Splits of `part` are judged at
    /// each atom's occupancy within `part`, so the answer matches running the
    /// search on the sub-list directly. Memoized across a partition search.
    pub(crate) fn submask_indecomposable(&self, part: u32, memo: &mut HashMap<u32, bool>) -> bool {
        if part.count_ones() <= 1 {
            return true;
        }
        if let Some(&v) = memo.get(&part) {
            return v;
        }
        let pivot = part & part.wrapping_neg();
        let rest = part ^ pivot;
        let mut answer = true;
        // Candidate pieces are pivot plus a proper submask of the rest, so
        // each unordered bipartition is tried once.
        let mut s = (rest.wrapping_sub(1)) & rest;
        loop {
            let f = pivot | s;
            let additive = self.atoms.iter().all(|la| {
                let k_e = (part & la.stubs).count_ones() as usize;
                if k_e < 2 {
                    return true;
                }
                let k_f = (f & la.stubs).count_ones() as usize;
                self.model.split_additive(la.atom, k_e, k_f)
            });
            if additive {
                answer = false;
                break;
            }
            if s == 0 {
                break;
            }
            s = s.wrapping_sub(1) & rest;
        }
        memo.insert(part, answer);
        answer
    }

    fn extract(&self, mask: u32) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &c)| c)
            .collect()
    }
}

/// Exact certificate for one candidate bipartition.
#[derive(Debug, Clone)]
pub struct SplitCertificate {
    pub f: CellSet,
    pub g: CellSet,
    /// Atoms where additivity was required.
    pub window: AtomSet,
    /// Atoms of positive weight in the window where
    /// `theta(F) + theta(G) > theta(E)`, with the exact deficit.
    /// Empty exactly when the split is additive.
    pub violations: Vec<(usize, Q)>,
    /// On isotropic models the deficit localizes: the split is additive iff
    /// the shared essential boundary inside the window carries no mass.
    /// `None` on models with a non-isotropic atom.
    pub shared_boundary_mass: Option<Q>,
}

impl SplitCertificate {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check whether carving `f` out of `e` splits the perimeter additively
/// over `window` (every atom when `None`). `f` must be contained in `e`;
/// either part may be empty, in which case the split is trivially additive.
pub fn is_additive_split(
    e: &CellSet,
    f: &CellSet,
    window: Option<&AtomSet>,
) -> Result<SplitCertificate> {
    if !f.is_subset_of(e)? {
        return Err(Error::InvalidArgument(
            "is_additive_split: the candidate piece must be contained in the set".into(),
        ));
    }
    let model = e.model();
    let g = e.difference(f)?;
    let window = match window {
        Some(w) => {
            if !Arc::ptr_eq(w.model(), model) {
                return Err(Error::ModelMismatch);
            }
            w.clone()
        }
        None => AtomSet::full(model),
    };
    let mut violations = Vec::new();
    for a in window.atoms() {
        if model.h(a).is_zero() {
            continue;
        }
        let k_f = model.occupancy(a, f.mask());
        let k_g = model.occupancy(a, g.mask());
        let deficit = model.theta(a, k_f) + model.theta(a, k_g) - model.theta(a, k_f + k_g);
        debug_assert!(deficit >= Q::zero(), "theta subadditivity violated");
        if !deficit.is_zero() {
            violations.push((a, deficit));
        }
    }
    let shared_boundary_mass = if model.all_isotropic() {
        let shared = f
            .essential_boundary()
            .intersection(&g.essential_boundary())?
            .intersection(&window)?;
        let mass = shared.h_mass();
        debug_assert_eq!(mass.is_zero(), violations.is_empty());
        Some(mass)
    } else {
        None
    };
    Ok(SplitCertificate {
        f: f.clone(),
        g,
        window,
        violations,
        shared_boundary_mass,
    })
}

/// Outcome of an indecomposability query.
#[derive(Debug, Clone)]
pub struct IndecomposabilityReport {
    pub indecomposable: bool,
    /// A certified additive bipartition when the set is decomposable.
    pub witness: Option<SplitCertificate>,
    /// The strategy that actually produced the answer; `Fast` may have
    /// fallen back to `Brute`.
    pub effective: Algorithm,
}

/// Decide whether `e` admits an additive bipartition into two nonempty
/// parts over `window`. Only the `Fast` and `Brute` strategies answer a
/// yes/no question; the empty set and singletons are indecomposable by
/// convention. Sets of infinite measure are accepted: the complement of a
/// bounded set decomposes like any other.
pub fn is_indecomposable(
    e: &CellSet,
    window: Option<&AtomSet>,
    algorithm: Algorithm,
    caps: &Caps,
) -> Result<IndecomposabilityReport> {
    if let Some(w) = window {
        if !Arc::ptr_eq(w.model(), e.model()) {
            return Err(Error::ModelMismatch);
        }
    }
    let cells = e.to_indices();
    if cells.len() <= 1 {
        return Ok(IndecomposabilityReport {
            indecomposable: true,
            witness: None,
            effective: algorithm,
        });
    }
    let first_split = |cells: &[usize]| -> Result<Vec<Vec<usize>>> {
        Ok(
            match first_split_components(e.model(), cells, window, caps, "is_indecomposable")? {
                Some((f, g)) => vec![f, g],
                None => vec![cells.to_vec()],
            },
        )
    };
    let (parts, effective) = match algorithm {
        Algorithm::Fast => match fast_components(e.model(), &cells, window) {
            Some(parts) => (parts, Algorithm::Fast),
            None => (first_split(&cells)?, Algorithm::Brute),
        },
        Algorithm::Brute => (first_split(&cells)?, Algorithm::Brute),
        _ => {
            return Err(Error::InvalidArgument(
                "is_indecomposable: use the fast or brute strategy".into(),
            ))
        }
    };
    if parts.len() <= 1 {
        return Ok(IndecomposabilityReport {
            indecomposable: true,
            witness: None,
            effective,
        });
    }
    let f = CellSet::from_cells(e.model(), parts[0].iter().copied())?;
    let witness = is_additive_split(e, &f, window)?;
    assert!(witness.is_valid(), "witness split must certify");
    Ok(IndecomposabilityReport {
        indecomposable: false,
        witness: Some(witness),
        effective,
    })
}

/// Components of a set together with the exact perimeter ledger.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub input: CellSet,
    /// Components in canonical order: decreasing measure, ties broken by
    /// the smallest member cell id.
    pub components: Vec<CellSet>,
    /// Perimeter of each component, aligned with `components`.
    pub perimeters: Vec<Q>,
    /// Perimeter of the input; equals the sum of `perimeters` exactly.
    pub perimeter_total: Q,
    pub requested: Algorithm,
    pub effective: Algorithm,
    /// True when every positive-weight atom touched by the set is rigid at
    /// its occupancy. Every additive bipartition then respects the
    /// components, so the partition is the only one possible. When false
    /// the partition is still exact but uniqueness rests on the model's
    /// isotropy and must be certified separately.
    pub uniqueness_guaranteed: bool,
    pub alpha: f64,
}

impl DecompositionReport {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Index of the component containing `cell`, if any.
    pub fn component_containing(&self, cell: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(cell))
    }

    /// The unique component containing `f`, or `None` when `f` straddles
    /// several components or leaves the input set.
    pub fn locate(&self, f: &CellSet) -> Result<Option<usize>> {
        if !f.is_subset_of(&self.input)? {
            return Ok(None);
        }
        let mut found = None;
        for (i, comp) in self.components.iter().enumerate() {
            if !f.is_disjoint_from(comp)? {
                if found.is_some() {
                    return Ok(None);
                }
                found = Some(i);
            }
        }
        match found {
            Some(i) if f.is_subset_of(&self.components[i])? => Ok(Some(i)),
            _ => Ok(None),
        }
    }
}

/// Partition a finite-measure set into its indecomposable components.
///
/// `alpha` feeds the variational strategy and must exceed 1; other
/// strategies ignore it. The perimeters of the components always add up to
/// the perimeter of the input exactly; this is asserted.
pub fn decompose(
    e: &CellSet,
    algorithm: Algorithm,
    alpha: Option<f64>,
    caps: &Caps,
) -> Result<DecompositionReport> {
    if !e.measure().is_finite() {
        return Err(Error::InfiniteMeasure { op: "decompose" });
    }
    let alpha = alpha.unwrap_or(DEFAULT_ALPHA);
    if algorithm == Algorithm::Variational && alpha <= 1.0 {
        return Err(Error::InvalidArgument(
            "decompose: the balancing exponent must exceed 1".into(),
        ));
    }
    let model = e.model();
    let cells = e.to_indices();
    let fast = fast_components(model, &cells, None);
    let uniqueness_guaranteed = fast.is_some();
    let (parts, effective) = match algorithm {
        Algorithm::Fast => match fast {
            Some(parts) => (parts, Algorithm::Fast),
            None => (
                brute_components(model, cells, None, caps)?,
                Algorithm::Brute,
            ),
        },
        Algorithm::Brute => (
            brute_components(model, cells, None, caps)?,
            Algorithm::Brute,
        ),
        Algorithm::Variational => (
            variational_components(model, cells, None, alpha, caps)?,
            Algorithm::Variational,
        ),
        Algorithm::XiAtoms => (
            xi::xi_atoms_masks(model, &cells, None, caps)?,
            Algorithm::XiAtoms,
        ),
    };
    let components = canonical_sets(model, parts)?;
    let perimeters: Vec<Q> = components.iter().map(|c| c.perimeter_exact()).collect();
    let perimeter_total = e.perimeter_exact();
    let sum: Q = perimeters.iter().fold(Q::zero(), |acc, p| acc + p);
    assert_eq!(
        sum, perimeter_total,
        "component perimeters must add up exactly"
    );
    Ok(DecompositionReport {
        input: e.clone(),
        components,
        perimeters,
        perimeter_total,
        requested: algorithm,
        effective,
        uniqueness_guaranteed,
        alpha,
    })
}

/// Components of an arbitrary cell list, unbounded cells allowed. Takes the
/// union-find route when sound and falls back to the exhaustive search.
/// Shared by the complement-side operations (holes, saturation).
pub(crate) fn essential_components(
    model: &Arc<SpaceModel>,
    cells: &[usize],
    caps: &Caps,
) -> Result<Vec<Vec<usize>>> {
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    match fast_components(model, cells, None) {
        Some(parts) => Ok(parts),
        None => brute_components(model, cells.to_vec(), None, caps),
    }
}

/// Order parts canonically and lift them to cell sets: infinite parts
/// first, then decreasing measure, ties broken by smallest cell id.
pub(crate) fn canonical_sets(
    model: &Arc<SpaceModel>,
    parts: Vec<Vec<usize>>,
) -> Result<Vec<CellSet>> {
    let mut keyed: Vec<(Option<Q>, usize, Vec<usize>)> = parts
        .into_iter()
        .map(|p| {
            let min_id = p[0];
            let finite = p.iter().all(|&c| !model.is_unbounded(c));
            let measure = finite.then(|| {
                p.iter()
                    .fold(Q::zero(), |acc, &c| acc + &model.cell(c).measure)
            });
            (measure, min_id, p)
        })
        .collect();
    keyed.sort_by(|a, b| match (&a.0, &b.0) {
        (None, None) => a.1.cmp(&b.1),
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(ma), Some(mb)) => mb.cmp(ma).then(a.1.cmp(&b.1)),
    });
    keyed
        .into_iter()
        .map(|(_, _, p)| CellSet::from_cells(model, p))
        .collect()
}

/// Union-find components, gluing through every touched positive-weight atom
/// that is rigid at its occupancy. Returns `None` when a touched atom of
/// occupancy at least 2 is not rigid: it would admit a proper additive
/// split, so gluing through it is unsound and the caller must search.
fn fast_components(
    model: &SpaceModel,
    cells: &[usize],
    window: Option<&AtomSet>,
) -> Option<Vec<Vec<usize>>> {
    let mut local = vec![usize::MAX; model.n_cells()];
    for (i, &c) in cells.iter().enumerate() {
        local[c] = i;
    }
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut seen = vec![false; model.n_atoms()];
    let mut stubs = Vec::new();
    for &c in cells {
        for &a in model.atoms_of_cell(c) {
            if seen[a] {
                continue;
            }
            seen[a] = true;
            if window.is_some_and(|w| !w.contains(a)) || model.h(a).is_zero() {
                continue;
            }
            stubs.clear();
            stubs.extend(
                model
                    .atom(a)
                    .incident
                    .iter()
                    .filter(|&&inc| local[inc] != usize::MAX)
                    .map(|&inc| local[inc]),
            );
            if stubs.len() < 2 {
                continue;
            }
            if !model.rigid_at(a, stubs.len()) {
                return None;
            }
            let root = find(&mut parent, stubs[0]);
            for &s in &stubs[1..] {
                let r = find(&mut parent, s);
                parent[r] = root;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &c) in cells.iter().enumerate() {
        groups.entry(find(&mut parent, i)).or_default().push(c);
    }
    let mut parts: Vec<Vec<usize>> = groups.into_values().collect();
    parts.sort_by_key(|p| p[0]);
    Some(parts)
}

/// First additive bipartition of `cells` in canonical mask order, if any.
/// Masks put the lowest cell in the first part so each unordered
/// bipartition is tried exactly once.
fn first_split_components(
    model: &SpaceModel,
    cells: &[usize],
    window: Option<&AtomSet>,
    caps: &Caps,
    op: &'static str,
) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    // Masks are u32, so 31 cells is a hard roof no matter what the cap says.
    if cells.len() > caps.brute.min(31) {
        return Err(Error::CapExceeded {
            op,
            what: "cells",
            size: cells.len(),
            cap: caps.brute.min(31),
        });
    }
    let view = LocalView::new(model, cells, window);
    let full = (1u32 << cells.len()) - 1;
    let mut m = 1u32;
    while m < full {
        if view.split_is_additive(m) {
            return Ok(Some((view.extract(m), view.extract(full & !m))));
        }
        m += 2;
    }
    Ok(None)
}

fn brute_components(
    model: &SpaceModel,
    cells: Vec<usize>,
    window: Option<&AtomSet>,
    caps: &Caps,
) -> Result<Vec<Vec<usize>>> {
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    if cells.len() == 1 {
        return Ok(vec![cells]);
    }
    match first_split_components(model, &cells, window, caps, "decompose")? {
        Some((f, g)) => {
            let mut parts = brute_components(model, f, window, caps)?;
            parts.extend(brute_components(model, g, window, caps)?);
            Ok(parts)
        }
        None => Ok(vec![cells]),
    }
}

/// Like `brute_components`, but among all additive bipartitions pick the one
/// maximizing `m(F)^(1/alpha) + m(G)^(1/alpha)`. Exact additivity checks,
/// floating-point scores; ties keep the earliest mask.
fn variational_components(
    model: &SpaceModel,
    cells: Vec<usize>,
    window: Option<&AtomSet>,
    alpha: f64,
    caps: &Caps,
) -> Result<Vec<Vec<usize>>> {
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    if cells.len() == 1 {
        return Ok(vec![cells]);
    }
    if cells.len() > caps.brute.min(31) {
        return Err(Error::CapExceeded {
            op: "decompose",
            what: "cells",
            size: cells.len(),
            cap: caps.brute.min(31),
        });
    }
    let view = LocalView::new(model, &cells, window);
    let meas: Vec<f64> = cells
        .iter()
        .map(|&c| q_to_f64(&model.cell(c).measure))
        .collect();
    let total: f64 = meas.iter().sum();
    let exponent = alpha.recip();
    let full = (1u32 << cells.len()) - 1;
    let mut best: Option<(f64, u32)> = None;
    let mut m = 1u32;
    while m < full {
        if view.split_is_additive(m) {
            let mf: f64 = (0..cells.len())
                .filter(|&i| m & (1 << i) != 0)
                .map(|i| meas[i])
                .sum();
            let score = mf.powf(exponent) + (total - mf).powf(exponent);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, m));
            }
        }
        m += 2;
    }
    match best {
        Some((_, m)) => {
            let mut parts =
                variational_components(model, view.extract(m), window, alpha, caps)?;
            parts.extend(variational_components(
                model,
                view.extract(full & !m),
                window,
                alpha,
                caps,
            )?);
            Ok(parts)
        }
        None => Ok(vec![cells]),
    }
}

/// Every partition of `e` into indecomposable parts whose perimeters add up
/// exactly. Exhaustive reference search used to certify uniqueness at desk
/// scale. Parts are grown as connected subsets containing the lowest
/// remaining cell (an indecomposable part is always connected through
/// positive-weight atoms), and branches are pruned with the exact per-atom
/// bound: committed theta plus the subadditive floor of the rest can never
/// exceed the target.
pub fn enumerate_indecomposable_partitions(
    e: &CellSet,
    caps: &Caps,
) -> Result<Vec<Vec<CellSet>>> {
    let cells = e.to_indices();
    let n = cells.len();
    if n > caps.brute.min(31) {
        return Err(Error::CapExceeded {
            op: "enumerate_indecomposable_partitions",
            what: "cells",
            size: n,
            cap: caps.brute.min(31),
        });
    }
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    let model = e.model();
    let view = LocalView::new(model, &cells, None);
    // Pairwise adjacency through shared positive-weight atoms.
    let mut adj = vec![0u32; n];
    for la in &view.atoms {
        let mut bits = la.stubs;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            adj[i] |= la.stubs & !(1 << i);
        }
    }
    let connected = |mask: u32| -> bool {
        let start = mask.trailing_zeros() as usize;
        let mut reached = 1u32 << start;
        loop {
            let mut grown = reached;
            let mut bits = reached;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                grown |= adj[i] & mask;
            }
            if grown == reached {
                return reached == mask;
            }
            reached = grown;
        }
    };
    let full = (1u32 << n) - 1;
    let mut memo = HashMap::new();
    let mut committed: Vec<Q> = view.atoms.iter().map(|_| Q::zero()).collect();
    let mut parts: Vec<u32> = Vec::new();
    let mut found: Vec<Vec<u32>> = Vec::new();

    fn search(
        view: &LocalView<'_>,
        connected: &dyn Fn(u32) -> bool,
        remaining: u32,
        committed: &mut Vec<Q>,
        parts: &mut Vec<u32>,
        memo: &mut HashMap<u32, bool>,
        found: &mut Vec<Vec<u32>>,
    ) {
        if remaining == 0 {
            // The pruning bound forces committed == target at every atom
            // once nothing remains, so this partition is additive.
            found.push(parts.clone());
            return;
        }
        let pivot = remaining & remaining.wrapping_neg();
        let rest = remaining ^ pivot;
        // All subsets of `remaining` containing the pivot cell.
        let mut s = rest;
        loop {
            let part = pivot | s;
            if connected(part) && view.submask_indecomposable(part, memo) {
                let mut feasible = true;
                for (ai, la) in view.atoms.iter().enumerate() {
                    let k_part = (part & la.stubs).count_ones() as usize;
                    if k_part == 0 {
                        continue;
                    }
                    let k_left = ((remaining & !part) & la.stubs).count_ones() as usize;
                    let target = view.model.theta(la.atom, la.occupancy);
                    let floor =
                        &committed[ai] + view.model.theta(la.atom, k_part)
                            + view.model.theta(la.atom, k_left);
                    if &floor > target {
                        feasible = false;
                        break;
                    }
                }
                if feasible {
                    for (ai, la) in view.atoms.iter().enumerate() {
                        let k_part = (part & la.stubs).count_ones() as usize;
                        committed[ai] += view.model.theta(la.atom, k_part);
                    }
                    parts.push(part);
                    search(view, connected, remaining & !part, committed, parts, memo, found);
                    parts.pop();
                    for (ai, la) in view.atoms.iter().enumerate() {
                        let k_part = (part & la.stubs).count_ones() as usize;
                        committed[ai] -= view.model.theta(la.atom, k_part);
                    }
                }
            }
            if s == 0 {
                break;
            }
            s = s.wrapping_sub(1) & rest;
        }
    }

    search(
        &view,
        &connected,
        full,
        &mut committed,
        &mut parts,
        &mut memo,
        &mut found,
    );
    found
        .into_iter()
        .map(|masks| {
            canonical_sets(
                model,
                masks.into_iter().map(|m| view.extract(m)).collect(),
            )
        })
        .collect()
}
