//! Space models: measured cells glued along weighted interface atoms.
//!
//! A model is the discrete carrier for all perimeter computations. Cells are
//! the measurable pieces of the space; each carries an exact rational
//! measure, or an `unbounded` flag for the infinite-volume pieces that
//! represent the ends of the space. An interface atom records a place where
//! `d >= 2` cells meet, together with a codimension-one weight `h` and a
//! table `theta(k)` for `k = 0..=d`: when a cell set `E` contains exactly
//! `k` of the atom's incident cells, the atom contributes `h * theta(k)` to
//! the perimeter of `E`. With `theta(0) = theta(d) = 0` the contribution
//! vanishes where `E` or its complement fills the whole neighborhood, so the
//! perimeter is supported on the atoms of mixed occupancy — the essential
//! boundary.
//!
//! Theta tables must be subadditive (`theta(i+j) <= theta(i) + theta(j)`).
//! That is what makes perimeter additivity of a split checkable atom by
//! atom, and it is validated at construction; models violating it are
//! rejected.

pub mod audits;
pub mod builders;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::Zero;

use crate::bits::BitMask;
use crate::error::Error;
use crate::exact::{q_to_f64, Q};
use crate::Result;

/// One measurable piece of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Exact volume; ignored (kept zero) when `unbounded` is set.
    pub measure: Q,
    /// Marks an infinite-volume end of the space. Unbounded cells may appear
    /// in sets, but any operation that asserts finiteness rejects them.
    pub unbounded: bool,
}

impl Cell {
    pub fn bounded(measure: Q) -> Self {
        Cell {
            measure,
            unbounded: false,
        }
    }

    pub fn unbounded() -> Self {
        Cell {
            measure: Q::zero(),
            unbounded: true,
        }
    }
}

/// A weighted interface where `d >= 2` cells meet.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceAtom {
    /// Incident cell ids, pairwise distinct. The order fixes the sign
    /// convention for divergence fields on degree-2 atoms.
    pub incident: Vec<usize>,
    /// Codimension-one weight (length of the interface).
    pub h: Q,
    /// `theta[k]` for occupancy `k = 0..=d`.
    pub theta: Vec<Q>,
}

impl InterfaceAtom {
    pub fn degree(&self) -> usize {
        self.incident.len()
    }
}

/// Derived per-atom lookup tables, computed once at model construction.
#[derive(Debug, Clone)]
struct AtomTables {
    /// `additive[k]` has bit `k'` set iff `theta[k'] + theta[k-k'] == theta[k]`.
    additive: Vec<u64>,
    /// `rigid[k]`: no proper additive split of occupancy `k` exists.
    rigid: Vec<bool>,
    /// Theta constant on `1..d`.
    isotropic: bool,
    /// `theta[k+1] - theta[k]` nonincreasing; equivalent to convexity of the
    /// induced total variation and required by the extreme-point module.
    concave: bool,
    /// `theta[k] == theta[d-k]`.
    symmetric: bool,
}

/// What a model was built from; used by oracles with model-specific
/// preconditions and by reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Grid,
    MetricGraph,
    Carpet,
    Strip,
    Explicit,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Grid => "grid",
            ModelKind::MetricGraph => "metric-graph",
            ModelKind::Carpet => "carpet",
            ModelKind::Strip => "strip",
            ModelKind::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelMeta {
    pub kind: ModelKind,
    /// Canonical builder string (`grid:4x4`) or `file` for explicit models.
    pub label: String,
}

/// A validated space model.
#[derive(Debug)]
pub struct SpaceModel {
    cells: Vec<Cell>,
    atoms: Vec<InterfaceAtom>,
    tables: Vec<AtomTables>,
    cell_atoms: Vec<Vec<usize>>,
    /// Per-cell diameter hints for ball construction (bounded cells only).
    diameters: Option<Vec<Q>>,
    meta: ModelMeta,
}

impl SpaceModel {
    /// Validates and indexes a model. All structural invariants are enforced
    /// here: positive measures on bounded cells, well-formed theta tables
    /// (zero ends, positive interior, subadditivity), distinct incidences,
    /// and a connected cell-adjacency graph.
    pub fn new(
        cells: Vec<Cell>,
        atoms: Vec<InterfaceAtom>,
        diameters: Option<Vec<Q>>,
        meta: ModelMeta,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyModel);
        }
        for (id, cell) in cells.iter().enumerate() {
            if !cell.unbounded && cell.measure <= Q::zero() {
                return Err(Error::BadCell {
                    id,
                    reason: "bounded cell must have positive measure".into(),
                });
            }
        }
        if let Some(diam) = &diameters {
            if diam.len() != cells.len() {
                return Err(Error::BadDimensions(
                    "geometry hint length differs from cell count".into(),
                ));
            }
            for (id, (d, cell)) in diam.iter().zip(&cells).enumerate() {
                if !cell.unbounded && *d <= Q::zero() {
                    return Err(Error::BadCell {
                        id,
                        reason: "diameter hint must be positive".into(),
                    });
                }
            }
        }
        let mut tables = Vec::with_capacity(atoms.len());
        for (id, atom) in atoms.iter().enumerate() {
            tables.push(Self::check_atom(id, atom, cells.len())?);
        }
        let mut cell_atoms = vec![Vec::new(); cells.len()];
        for (aid, atom) in atoms.iter().enumerate() {
            for &c in &atom.incident {
                cell_atoms[c].push(aid);
            }
        }
        let model = SpaceModel {
            cells,
            atoms,
            tables,
            cell_atoms,
            diameters,
            meta,
        };
        if let Some(unreached) = model.first_unreachable_cell() {
            return Err(Error::Disconnected(unreached));
        }
        Ok(model)
    }

    fn check_atom(id: usize, atom: &InterfaceAtom, n_cells: usize) -> Result<AtomTables> {
        let d = atom.degree();
        let fail = |reason: String| Error::BadAtom { id, reason };
        if d < 2 {
            return Err(fail("degree must be at least 2".into()));
        }
        if d > 63 {
            return Err(fail("degree above 63 unsupported".into()));
        }
        for &c in &atom.incident {
            if c >= n_cells {
                return Err(fail(format!("incident cell {c} out of range")));
            }
        }
        let mut seen = atom.incident.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != d {
            return Err(fail("duplicate incidence".into()));
        }
        if atom.h < Q::zero() {
            return Err(fail("negative h weight".into()));
        }
        if atom.theta.len() != d + 1 {
            return Err(fail(format!(
                "theta table has {} entries, expected {}",
                atom.theta.len(),
                d + 1
            )));
        }
        if !atom.theta[0].is_zero() || !atom.theta[d].is_zero() {
            return Err(fail("theta must vanish at occupancy 0 and d".into()));
        }
        for k in 1..d {
            if atom.theta[k] <= Q::zero() {
                return Err(fail(format!("theta({k}) must be positive")));
            }
        }
        for i in 1..=d {
            for j in 1..=(d - i) {
                if atom.theta[i + j] > &atom.theta[i] + &atom.theta[j] {
                    return Err(fail(format!(
                        "theta violates subadditivity at ({i},{j})"
                    )));
                }
            }
        }
        let mut additive = vec![0u64; d + 1];
        let mut rigid = vec![false; d + 1];
        for k in 0..=d {
            let mut mask = 0u64;
            for kp in 0..=k {
                if &atom.theta[kp] + &atom.theta[k - kp] == atom.theta[k] {
                    mask |= 1 << kp;
                }
            }
            additive[k] = mask;
            rigid[k] = mask == (1 | (1u64 << k));
        }
        let isotropic = (2..d).all(|k| atom.theta[k] == atom.theta[1]);
        let concave = (1..d).all(|k| {
            // theta(k+1) - theta(k) <= theta(k) - theta(k-1)
            &atom.theta[k + 1] + &atom.theta[k - 1] <= &atom.theta[k] + &atom.theta[k]
        });
        let symmetric = (0..=d).all(|k| atom.theta[k] == atom.theta[d - k]);
        Ok(AtomTables {
            additive,
            rigid,
            isotropic,
            concave,
            symmetric,
        })
    }

    fn first_unreachable_cell(&self) -> Option<usize> {
        let n = self.cells.len();
        if n == 0 {
            return None;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for &aid in &self.cell_atoms[c] {
                for &nb in &self.atoms[aid].incident {
                    if !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn atom(&self, id: usize) -> &InterfaceAtom {
        &self.atoms[id]
    }

    pub fn atoms_of_cell(&self, id: usize) -> &[usize] {
        &self.cell_atoms[id]
    }

    pub fn is_unbounded(&self, id: usize) -> bool {
        self.cells[id].unbounded
    }

    pub fn has_unbounded_cells(&self) -> bool {
        self.cells.iter().any(|c| c.unbounded)
    }

    pub fn bounded_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_cells()).filter(|&c| !self.cells[c].unbounded)
    }

    pub fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    pub fn kind(&self) -> ModelKind {
        self.meta.kind
    }

    /// Occupancy of `set` at an atom: how many incident cells it contains.
    pub fn occupancy(&self, atom: usize, set: &BitMask) -> usize {
        self.atoms[atom]
            .incident
            .iter()
            .filter(|&&c| set.get(c))
            .count()
    }

    pub fn theta(&self, atom: usize, k: usize) -> &Q {
        &self.atoms[atom].theta[k]
    }

    pub fn h(&self, atom: usize) -> &Q {
        &self.atoms[atom].h
    }

    pub fn h_f64(&self, atom: usize) -> f64 {
        q_to_f64(&self.atoms[atom].h)
    }

    /// `theta(k') + theta(k - k') == theta(k)` for this atom.
    pub fn split_additive(&self, atom: usize, k: usize, kp: usize) -> bool {
        debug_assert!(kp <= k);
        self.tables[atom].additive[k] >> kp & 1 == 1
    }

    /// No proper occupancy split of `k` is additive at this atom.
    pub fn rigid_at(&self, atom: usize, k: usize) -> bool {
        self.tables[atom].rigid[k]
    }

    pub fn atom_isotropic(&self, atom: usize) -> bool {
        self.tables[atom].isotropic
    }

    pub fn atom_concave(&self, atom: usize) -> bool {
        self.tables[atom].concave
    }

    pub fn atom_symmetric(&self, atom: usize) -> bool {
        self.tables[atom].symmetric
    }

    pub fn all_isotropic(&self) -> bool {
        self.tables.iter().all(|t| t.isotropic)
    }

    pub fn all_concave(&self) -> bool {
        self.tables.iter().all(|t| t.concave)
    }

    pub fn has_geometry(&self) -> bool {
        self.diameters.is_some()
    }

    pub fn diameter(&self, cell: usize) -> Option<&Q> {
        self.diameters.as_ref().map(|d| &d[cell])
    }

    /// Exact path distances from `center` to every bounded cell, hopping
    /// across atoms with step `(diam(u) + diam(v)) / 2`. Unbounded cells are
    /// impassable: balls live in the bounded part of the space.
    pub fn distances_from(&self, center: usize) -> Result<Vec<Option<Q>>> {
        let diam = self
            .diameters
            .as_ref()
            .ok_or(Error::MissingGeometry { op: "ball" })?;
        if center >= self.n_cells() {
            return Err(Error::CellOutOfRange(center, self.n_cells()));
        }
        if self.cells[center].unbounded {
            return Err(Error::InvalidArgument(
                "ball center must be a bounded cell".into(),
            ));
        }
        let mut dist: Vec<Option<Q>> = vec![None; self.n_cells()];
        let mut heap: BinaryHeap<Reverse<(Q, usize)>> = BinaryHeap::new();
        dist[center] = Some(Q::zero());
        heap.push(Reverse((Q::zero(), center)));
        while let Some(Reverse((d, c))) = heap.pop() {
            if dist[c].as_ref() != Some(&d) {
                continue;
            }
            for &aid in &self.cell_atoms[c] {
                for &nb in &self.atoms[aid].incident {
                    if nb == c || self.cells[nb].unbounded {
                        continue;
                    }
                    let hop = (&diam[c] + &diam[nb]) / Q::from_integer(2.into());
                    let nd = &d + &hop;
                    if dist[nb].as_ref().is_none_or(|cur| nd < *cur) {
                        dist[nb] = Some(nd.clone());
                        heap.push(Reverse((nd, nb)));
                    }
                }
            }
        }
        Ok(dist)
    }

    /// Metric ball of exact radius `r` around a bounded cell.
    pub fn ball(&self, center: usize, radius: &Q) -> Result<BallIndex> {
        let dist = self.distances_from(center)?;
        Ok(self.ball_from_distances(center, radius, &dist))
    }

    /// Assembles a ball from a precomputed distance table (see
    /// [`Self::distances_from`]); used by audits that sweep several radii
    /// around the same center.
    pub fn ball_from_distances(
        &self,
        center: usize,
        radius: &Q,
        dist: &[Option<Q>],
    ) -> BallIndex {
        let mut members = BitMask::zeros(self.n_cells());
        let mut measure = Q::zero();
        for c in self.bounded_cells() {
            if let Some(d) = &dist[c] {
                if d <= radius {
                    members.set(c, true);
                    measure += &self.cells[c].measure;
                }
            }
        }
        let mut crossing = BitMask::zeros(self.n_atoms());
        for (aid, atom) in self.atoms.iter().enumerate() {
            let k = self.occupancy(aid, &members);
            if k > 0 && k < atom.degree() {
                crossing.set(aid, true);
            }
        }
        BallIndex {
            center,
            radius: radius.clone(),
            members,
            measure,
            crossing,
        }
    }
}

/// A metric ball in the bounded part of a model.
#[derive(Debug, Clone)]
pub struct BallIndex {
    pub center: usize,
    pub radius: Q,
    /// Cells at path distance at most `radius` from the center.
    pub members: BitMask,
    pub measure: Q,
    /// Atoms with mixed occupancy relative to the ball.
    pub crossing: BitMask,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, q_int};

    fn tiny_pair() -> (Vec<Cell>, Vec<InterfaceAtom>) {
        let cells = vec![Cell::bounded(q_int(1)), Cell::bounded(q_int(1))];
        let atoms = vec![InterfaceAtom {
            incident: vec![0, 1],
            h: q_int(1),
            theta: vec![q_int(0), q_int(1), q_int(0)],
        }];
        (cells, atoms)
    }

    fn meta() -> ModelMeta {
        ModelMeta {
            kind: ModelKind::Explicit,
            label: "test".into(),
        }
    }

    #[test]
    fn accepts_minimal_model() {
        let (cells, atoms) = tiny_pair();
        let m = SpaceModel::new(cells, atoms, None, meta()).unwrap();
        assert_eq!(m.n_cells(), 2);
        assert!(m.all_isotropic());
        assert!(m.all_concave());
        assert!(m.atom_symmetric(0));
        // occupancy 2 is rigid under the unit edge table: 1 + 1 > 0.
        assert!(m.rigid_at(0, 2));
        assert!(m.split_additive(0, 1, 0));
        assert!(!m.split_additive(0, 2, 1));
    }

    #[test]
    fn rejects_bad_theta() {
        let (cells, mut atoms) = tiny_pair();
        atoms[0].theta[2] = q_int(1); // nonzero at full occupancy
        assert!(matches!(
            SpaceModel::new(cells, atoms, None, meta()),
            Err(Error::BadAtom { .. })
        ));

        let (cells, mut atoms) = tiny_pair();
        atoms[0].theta[1] = q_int(0); // zero in the interior
        assert!(SpaceModel::new(cells, atoms, None, meta()).is_err());
    }

    #[test]
    fn rejects_subadditivity_violation() {
        let cells = vec![
            Cell::bounded(q_int(1)),
            Cell::bounded(q_int(1)),
            Cell::bounded(q_int(1)),
        ];
        let atoms = vec![InterfaceAtom {
            incident: vec![0, 1, 2],
            h: q_int(1),
            theta: vec![q_int(0), q_int(1), q_int(3), q_int(0)],
        }];
        let err = SpaceModel::new(cells, atoms, None, meta()).unwrap_err();
        assert!(err.to_string().contains("subadditivity"));
    }

    #[test]
    fn rejects_disconnected_model() {
        let cells = vec![
            Cell::bounded(q_int(1)),
            Cell::bounded(q_int(1)),
            Cell::bounded(q_int(1)),
            Cell::bounded(q_int(1)),
        ];
        let atoms = vec![InterfaceAtom {
            incident: vec![0, 1],
            h: q_int(1),
            theta: vec![q_int(0), q_int(1), q_int(0)],
        }];
        assert!(matches!(
            SpaceModel::new(cells, atoms, None, meta()),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn rejects_duplicate_incidence() {
        let (cells, mut atoms) = tiny_pair();
        atoms[0].incident = vec![0, 0];
        assert!(SpaceModel::new(cells, atoms, None, meta()).is_err());
    }

    #[test]
    fn rejects_zero_measure_cell() {
        let (mut cells, atoms) = tiny_pair();
        cells[0].measure = q_int(0);
        assert!(SpaceModel::new(cells, atoms, None, meta()).is_err());
    }

    #[test]
    fn min_k_table_is_rigid_only_off_the_plateau() {
        // Degree 4, theta(k) = min(k, 4-k): occupancy 2 splits additively as
        // 1+1, occupancy 3 does not split.
        let cells = (0..4).map(|_| Cell::bounded(q_int(1))).collect();
        let atoms = vec![InterfaceAtom {
            incident: vec![0, 1, 2, 3],
            h: q_int(1),
            theta: vec![q_int(0), q_int(1), q_int(2), q_int(1), q_int(0)],
        }];
        let m = SpaceModel::new(cells, atoms, None, meta()).unwrap();
        assert!(!m.rigid_at(0, 2));
        assert!(m.split_additive(0, 2, 1));
        assert!(m.rigid_at(0, 3));
        assert!(!m.atom_isotropic(0));
        assert!(m.atom_concave(0));
        assert!(m.atom_symmetric(0));
    }

    #[test]
    fn ball_uses_path_distance() {
        // 3-cell path with unit diameters: unit-radius ball around the middle
        // covers everything, radius 1/2 only the center.
        let cells = vec![
            Cell::bounded(q_int(1)),
            Cell::bounded(q_int(1)),
            Cell::bounded(q_int(1)),
        ];
        let edge = |a: usize, b: usize| InterfaceAtom {
            incident: vec![a, b],
            h: q_int(1),
            theta: vec![q_int(0), q_int(1), q_int(0)],
        };
        let atoms = vec![edge(0, 1), edge(1, 2)];
        let diam = Some(vec![q_int(1), q_int(1), q_int(1)]);
        let m = SpaceModel::new(cells, atoms, diam, meta()).unwrap();
        let b = m.ball(1, &q_int(1)).unwrap();
        assert_eq!(b.members.count(), 3);
        assert_eq!(b.measure, q_int(3));
        assert!(b.crossing.is_empty());
        let b = m.ball(1, &q(1, 2)).unwrap();
        assert_eq!(b.members.iter_ones().collect::<Vec<_>>(), vec![1]);
        assert_eq!(b.crossing.count(), 2);
    }
}
