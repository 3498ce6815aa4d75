//! Cell sets: measure, perimeter, essential boundary.
//!
//! A [`CellSet`] is an immutable subset of a model's cells. All boolean
//! operations return new sets; two sets interoperate only when they share
//! the same model instance.
//!
//! The perimeter of a set is the sum of `h * theta(occupancy)` over the
//! atoms, which is supported exactly on the atoms of mixed occupancy. That
//! support is the essential boundary, handled as an [`AtomSet`] so that the
//! usual boundary calculus (complement invariance, union and intersection
//! bounds) can be stated and tested as set algebra.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::bits::BitMask;
use crate::error::Error;
use crate::exact::{q_to_f64, Q};
use crate::model::SpaceModel;
use crate::Result;

/// Measure of a cell set; infinite as soon as the set contains an unbounded
/// cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Measure {
    Finite(Q),
    Infinite,
}

impl Measure {
    pub fn is_finite(&self) -> bool {
        matches!(self, Measure::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            Measure::Finite(q) => Some(q),
            Measure::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Measure::Finite(q) => q_to_f64(q),
            Measure::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for Measure {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp_measure(other))
    }
}

impl Measure {
    fn cmp_measure(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (Measure::Finite(a), Measure::Finite(b)) => a.cmp(b),
            (Measure::Finite(_), Measure::Infinite) => Ordering::Less,
            (Measure::Infinite, Measure::Finite(_)) => Ordering::Greater,
            (Measure::Infinite, Measure::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Finite(q) => write!(f, "{}", crate::exact::q_to_string(q)),
            Measure::Infinite => write!(f, "inf"),
        }
    }
}

/// An immutable subset of a model's cells.
#[derive(Clone)]
pub struct CellSet {
    model: Arc<SpaceModel>,
    members: BitMask,
}

impl CellSet {
    pub fn empty(model: &Arc<SpaceModel>) -> Self {
        CellSet {
            model: Arc::clone(model),
            members: BitMask::zeros(model.n_cells()),
        }
    }

    /// The whole space, unbounded cells included.
    pub fn full(model: &Arc<SpaceModel>) -> Self {
        CellSet {
            model: Arc::clone(model),
            members: BitMask::ones(model.n_cells()),
        }
    }

    pub fn from_cells(
        model: &Arc<SpaceModel>,
        cells: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let n = model.n_cells();
        let mut members = BitMask::zeros(n);
        for c in cells {
            if c >= n {
                return Err(Error::CellOutOfRange(c, n));
            }
            members.set(c, true);
        }
        Ok(CellSet {
            model: Arc::clone(model),
            members,
        })
    }

    pub fn from_mask(model: &Arc<SpaceModel>, members: BitMask) -> Result<Self> {
        if members.len() != model.n_cells() {
            return Err(Error::BadDimensions(format!(
                "mask over {} cells on a model with {}",
                members.len(),
                model.n_cells()
            )));
        }
        Ok(CellSet {
            model: Arc::clone(model),
            members,
        })
    }

    pub fn model(&self) -> &Arc<SpaceModel> {
        &self.model
    }

    pub fn mask(&self) -> &BitMask {
        &self.members
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.members.get(cell)
    }

    pub fn n_cells(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter_ones()
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.cells().collect()
    }

    fn check_mate(&self, other: &CellSet) -> Result<()> {
        if Arc::ptr_eq(&self.model, &other.model) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    fn wrap(&self, members: BitMask) -> CellSet {
        CellSet {
            model: Arc::clone(&self.model),
            members,
        }
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.check_mate(other)?;
        Ok(self.wrap(self.members.union(&other.members)))
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.check_mate(other)?;
        Ok(self.wrap(self.members.intersection(&other.members)))
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.check_mate(other)?;
        Ok(self.wrap(self.members.difference(&other.members)))
    }

    pub fn symmetric_difference(&self, other: &CellSet) -> Result<CellSet> {
        self.check_mate(other)?;
        let u = self.members.union(&other.members);
        let i = self.members.intersection(&other.members);
        Ok(self.wrap(u.difference(&i)))
    }

    pub fn complement(&self) -> CellSet {
        self.wrap(self.members.complement())
    }

    pub fn is_subset_of(&self, other: &CellSet) -> Result<bool> {
        self.check_mate(other)?;
        Ok(self.members.is_subset_of(&other.members))
    }

    pub fn is_disjoint_from(&self, other: &CellSet) -> Result<bool> {
        self.check_mate(other)?;
        Ok(self.members.is_disjoint_from(&other.members))
    }

    pub fn same_set(&self, other: &CellSet) -> bool {
        Arc::ptr_eq(&self.model, &other.model) && self.members == other.members
    }

    pub fn measure(&self) -> Measure {
        let mut total = Q::zero();
        for c in self.cells() {
            if self.model.is_unbounded(c) {
                return Measure::Infinite;
            }
            total += &self.model.cell(c).measure;
        }
        Measure::Finite(total)
    }

    pub fn measure_f64(&self) -> f64 {
        self.measure().to_f64()
    }

    /// Exact perimeter: `sum over atoms of h * theta(occupancy)`.
    pub fn perimeter_exact(&self) -> Q {
        let mut total = Q::zero();
        for a in 0..self.model.n_atoms() {
            let k = self.model.occupancy(a, &self.members);
            if k == 0 {
                continue;
            }
            let th = self.model.theta(a, k);
            if !th.is_zero() {
                total += self.model.h(a) * th;
            }
        }
        total
    }

    pub fn perimeter(&self) -> f64 {
        q_to_f64(&self.perimeter_exact())
    }

    /// Relative perimeter `P(E, B)`: the same sum restricted to the atoms of
    /// `window`.
    pub fn perimeter_in(&self, window: &AtomSet) -> Result<Q> {
        if !Arc::ptr_eq(&self.model, &window.model) {
            return Err(Error::ModelMismatch);
        }
        let mut total = Q::zero();
        for a in window.atoms.iter_ones() {
            let k = self.model.occupancy(a, &self.members);
            total += self.model.h(a) * self.model.theta(a, k);
        }
        Ok(total)
    }

    fn atoms_where(&self, pred: impl Fn(usize, usize) -> bool) -> AtomSet {
        let mut atoms = BitMask::zeros(self.model.n_atoms());
        for a in 0..self.model.n_atoms() {
            let k = self.model.occupancy(a, &self.members);
            if pred(k, self.model.atom(a).degree()) {
                atoms.set(a, true);
            }
        }
        AtomSet {
            model: Arc::clone(&self.model),
            atoms,
        }
    }

    /// Atoms of mixed occupancy: the support of the perimeter measure.
    pub fn essential_boundary(&self) -> AtomSet {
        self.atoms_where(|k, d| k > 0 && k < d)
    }

    /// Atoms fully inside the set (occupancy `d`): where the set has density
    /// one at interface scale.
    pub fn full_density_atoms(&self) -> AtomSet {
        self.atoms_where(|k, d| k == d)
    }

    /// Atoms where the set occupies exactly half the incident cells.
    pub fn half_density_atoms(&self) -> AtomSet {
        self.atoms_where(|k, d| 2 * k == d)
    }

    /// Theta density of this set at one atom (its occupancy looked up in the
    /// atom's table).
    pub fn theta_at(&self, atom: usize) -> Q {
        let k = self.model.occupancy(atom, &self.members);
        self.model.theta(atom, k).clone()
    }

    /// The boundary density profile: `(atom, theta)` for every atom of the
    /// essential boundary, ascending by atom id. Summing `h * theta` over
    /// the profile reproduces the perimeter, which is asserted.
    pub fn theta_map(&self) -> Vec<(usize, Q)> {
        let mut profile = Vec::new();
        let mut total = Q::zero();
        for a in 0..self.model.n_atoms() {
            let k = self.model.occupancy(a, &self.members);
            if k > 0 && k < self.model.atom(a).degree() {
                let th = self.model.theta(a, k).clone();
                total += self.model.h(a) * &th;
                profile.push((a, th));
            }
        }
        debug_assert_eq!(total, self.perimeter_exact());
        profile
    }

    pub fn with_cell(&self, cell: usize) -> CellSet {
        let mut members = self.members.clone();
        members.set(cell, true);
        self.wrap(members)
    }

    pub fn without_cell(&self, cell: usize) -> CellSet {
        let mut members = self.members.clone();
        members.set(cell, false);
        self.wrap(members)
    }

    /// True when the set's cells form one component of the adjacency graph
    /// restricted to the set (atoms connect all their incident cells).
    pub fn is_cell_connected(&self) -> bool {
        let mut seen = BitMask::zeros(self.model.n_cells());
        let Some(start) = self.members.first_one() else {
            return true;
        };
        let mut stack = vec![start];
        seen.set(start, true);
        while let Some(c) = stack.pop() {
            for &a in self.model.atoms_of_cell(c) {
                for &nb in &self.model.atom(a).incident {
                    if self.members.get(nb) && !seen.get(nb) {
                        seen.set(nb, true);
                        stack.push(nb);
                    }
                }
            }
        }
        seen == self.members
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CellSet{:?}", self.to_indices())
    }
}

impl PartialEq for CellSet {
    fn eq(&self, other: &Self) -> bool {
        self.same_set(other)
    }
}

impl Eq for CellSet {}

/// A subset of a model's atoms, typically an essential boundary.
#[derive(Clone)]
pub struct AtomSet {
    model: Arc<SpaceModel>,
    atoms: BitMask,
}

impl AtomSet {
    pub fn model(&self) -> &Arc<SpaceModel> {
        &self.model
    }

    pub fn empty(model: &Arc<SpaceModel>) -> Self {
        AtomSet {
            model: Arc::clone(model),
            atoms: BitMask::zeros(model.n_atoms()),
        }
    }

    /// Every atom of the model.
    pub fn full(model: &Arc<SpaceModel>) -> Self {
        AtomSet {
            model: Arc::clone(model),
            atoms: BitMask::ones(model.n_atoms()),
        }
    }

    pub fn from_atoms(
        model: &Arc<SpaceModel>,
        atoms: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let n = model.n_atoms();
        let mut mask = BitMask::zeros(n);
        for a in atoms {
            if a >= n {
                return Err(Error::CellOutOfRange(a, n));
            }
            mask.set(a, true);
        }
        Ok(AtomSet {
            model: Arc::clone(model),
            atoms: mask,
        })
    }

    pub fn mask(&self) -> &BitMask {
        &self.atoms
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.atoms.get(atom)
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.count()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.atoms.iter_ones()
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.atoms().collect()
    }

    /// Total h-weight carried by these atoms: their measure at boundary
    /// scale.
    pub fn h_mass(&self) -> Q {
        self.atoms().map(|a| self.model.h(a).clone()).sum()
    }

    fn check_mate(&self, other: &AtomSet) -> Result<()> {
        if Arc::ptr_eq(&self.model, &other.model) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    fn wrap(&self, atoms: BitMask) -> AtomSet {
        AtomSet {
            model: Arc::clone(&self.model),
            atoms,
        }
    }

    pub fn union(&self, other: &AtomSet) -> Result<AtomSet> {
        self.check_mate(other)?;
        Ok(self.wrap(self.atoms.union(&other.atoms)))
    }

    pub fn intersection(&self, other: &AtomSet) -> Result<AtomSet> {
        self.check_mate(other)?;
        Ok(self.wrap(self.atoms.intersection(&other.atoms)))
    }

    pub fn difference(&self, other: &AtomSet) -> Result<AtomSet> {
        self.check_mate(other)?;
        Ok(self.wrap(self.atoms.difference(&other.atoms)))
    }

    pub fn is_subset_of(&self, other: &AtomSet) -> Result<bool> {
        self.check_mate(other)?;
        Ok(self.atoms.is_subset_of(&other.atoms))
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AtomSet{:?}", self.to_indices())
    }
}

impl PartialEq for AtomSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.model, &other.model) && self.atoms == other.atoms
    }
}

impl Eq for AtomSet {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, q_int};
    use crate::model::builders::{build_grid, build_star};

    fn grid_3x3() -> Arc<SpaceModel> {
        Arc::new(build_grid(3, 3, true).unwrap())
    }

    #[test]
    fn unit_cell_perimeter() {
        let m = grid_3x3();
        let e = CellSet::from_cells(&m, [4]).unwrap(); // center cell
        assert_eq!(e.perimeter_exact(), q_int(4));
        assert_eq!(e.measure(), Measure::Finite(q_int(1)));
        assert_eq!(e.essential_boundary().n_atoms(), 4);
    }

    #[test]
    fn corner_cell_uses_frame_atoms() {
        let m = grid_3x3();
        let e = CellSet::from_cells(&m, [0]).unwrap();
        assert_eq!(e.perimeter_exact(), q_int(4));
        let unframed = Arc::new(build_grid(3, 3, false).unwrap());
        let e = CellSet::from_cells(&unframed, [0]).unwrap();
        assert_eq!(e.perimeter_exact(), q_int(2));
    }

    #[test]
    fn perimeter_is_complement_invariant() {
        let m = grid_3x3();
        let e = CellSet::from_cells(&m, [0, 1, 4, 7]).unwrap();
        let c = e.complement();
        assert_eq!(e.perimeter_exact(), c.perimeter_exact());
        assert_eq!(e.essential_boundary(), c.essential_boundary());
        assert_eq!(c.measure(), Measure::Infinite);
    }

    #[test]
    fn boundary_calculus() {
        let m = grid_3x3();
        let e = CellSet::from_cells(&m, [0, 1, 2]).unwrap();
        let f = CellSet::from_cells(&m, [2, 4, 5]).unwrap();
        let union_b = e.union(&f).unwrap().essential_boundary();
        let either = e
            .essential_boundary()
            .union(&f.essential_boundary())
            .unwrap();
        assert!(union_b.is_subset_of(&either).unwrap());
        let inter_b = e.intersection(&f).unwrap().essential_boundary();
        assert!(inter_b.is_subset_of(&either).unwrap());
    }

    #[test]
    fn relative_perimeter_splits_the_total() {
        let m = grid_3x3();
        let e = CellSet::from_cells(&m, [0, 3]).unwrap();
        let b = e.essential_boundary();
        assert_eq!(e.perimeter_in(&b).unwrap(), e.perimeter_exact());
        let empty = AtomSet::empty(&m);
        assert_eq!(e.perimeter_in(&empty).unwrap(), q_int(0));
    }

    #[test]
    fn model_mismatch_is_rejected() {
        let a = grid_3x3();
        let b = grid_3x3();
        let e = CellSet::from_cells(&a, [0]).unwrap();
        let f = CellSet::from_cells(&b, [0]).unwrap();
        assert!(matches!(e.union(&f), Err(Error::ModelMismatch)));
    }

    #[test]
    fn star_theta_densities() {
        let m = Arc::new(build_star(4, &q_int(1), 1).unwrap());
        let e1 = CellSet::from_cells(&m, [0]).unwrap();
        let e12 = CellSet::from_cells(&m, [0, 1]).unwrap();
        let v = 0; // only atom
        assert_eq!(e1.theta_at(v), q_int(1));
        assert_eq!(e12.theta_at(v), q_int(2));
        assert_eq!(e1.perimeter_exact(), q_int(1));
        assert_eq!(e12.perimeter_exact(), q_int(2));
    }

    #[test]
    fn half_density_on_even_degree() {
        let m = Arc::new(build_star(4, &q_int(1), 1).unwrap());
        let e12 = CellSet::from_cells(&m, [0, 1]).unwrap();
        assert_eq!(e12.half_density_atoms().n_atoms(), 1);
        let e1 = CellSet::from_cells(&m, [0]).unwrap();
        assert!(e1.half_density_atoms().is_empty());
    }

    #[test]
    fn connectivity_of_cell_sets() {
        let m = grid_3x3();
        assert!(CellSet::from_cells(&m, [0, 1]).unwrap().is_cell_connected());
        assert!(!CellSet::from_cells(&m, [0, 8]).unwrap().is_cell_connected());
        assert!(CellSet::empty(&m).is_cell_connected());
        // Opposite corners plus the frame are connected through the frame.
        assert!(CellSet::from_cells(&m, [0, 8, 9])
            .unwrap()
            .is_cell_connected());
    }

    #[test]
    fn weighted_measures() {
        let m = Arc::new(
            crate::model::builders::build_grid_weighted(2, 1, &q(1, 2), |x, _| (x + 1) as f64, false)
                .unwrap(),
        );
        let e = CellSet::full(&m);
        assert_eq!(e.measure(), Measure::Finite(q(3, 4)));
        assert_eq!(e.perimeter_exact(), q_int(0));
    }
}
