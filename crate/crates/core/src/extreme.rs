//! Extreme points of the unit variation ball over a pinned support.
//!
//! Fix a bounded cell set `K` and look at the functions that vanish outside
//! `K` with total variation at most one. When every interface profile is
//! concave, each atom's contribution is the maximum over all ways of pairing
//! its jump coefficients `theta(j) - theta(j-1)` with its incident values,
//! so the whole variation is a pointwise maximum of finitely many linear
//! functionals and the ball is a polytope. Its extreme points form a finite,
//! exactly computable set.
//!
//! The enumeration never expands that functional family. On the open cones
//! where no two values at a shared atom agree (and none hits zero), the
//! variation is linear, so the sphere contains a segment through any point
//! of such a cone — extreme points must lie on enough value-tie hyperplanes
//! to pin their direction. Intersecting every choice of dimension-minus-one
//! tie hyperplanes therefore yields a complete candidate list, and a
//! candidate is a genuine vertex exactly when the active functionals at it
//! span the full coordinate space. That span is assembled per atom: one
//! maximizing assignment plus the coefficient swaps available inside each
//! run of tied values.
//!
//! [`predict_vertices`] scales indicators of simple subsets of `K` to unit
//! variation, and [`compare`] reconciles the two lists. The inclusion
//! "simple predictions are vertices" and the inclusion "vertex supports are
//! indecomposable" are reported separately: junction spaces genuinely
//! produce extreme points whose support is indecomposable but not simple,
//! and the report records those instead of failing.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::config::Caps;
use crate::decomp::{self, Algorithm};
use crate::error::Error;
use crate::exact::{clear_denominators, int_kernel_any, int_kernel_vector, rational_rank, Q};
use crate::Result;
use crate::function::BVFunction;
use crate::model::SpaceModel;
use crate::set::CellSet;

/// One atom seen from the support: which incident slots are free
/// coordinates, and the jump coefficients its profile awards by value rank.
struct TouchedAtom {
    h: Q,
    /// `theta(j+1) - theta(j)`; nonincreasing because the profile is concave.
    coeffs: Vec<Q>,
    /// Free-coordinate index per incident slot, `None` when pinned at zero.
    slots: Vec<Option<usize>>,
}

/// The unit variation ball restricted to functions vanishing outside a
/// bounded support.
pub struct BVBallInstance {
    model: Arc<SpaceModel>,
    support: CellSet,
    free: Vec<usize>,
    touched: Vec<TouchedAtom>,
}

impl BVBallInstance {
    /// Pins the support and validates that the restricted variation is a
    /// norm: every positive-weight gluing class of the model must reach the
    /// complement, otherwise that class's indicator has variation zero.
    pub fn new(support: &CellSet, caps: &Caps) -> Result<Self> {
        let model = Arc::clone(support.model());
        for c in support.cells() {
            if model.is_unbounded(c) {
                return Err(Error::InvalidArgument(format!(
                    "bv ball: support cell {c} is unbounded; the support must be bounded"
                )));
            }
        }
        let free: Vec<usize> = support.cells().collect();
        if free.len() > caps.free {
            return Err(Error::CapExceeded {
                op: "bv_ball_instance",
                what: "free coordinates",
                size: free.len(),
                cap: caps.free,
            });
        }

        // Norm check. Variation zero forces equal values across every
        // positive-weight atom, so it vanishes on nonzero functions exactly
        // when some gluing class never leaves the support.
        let n_cells = model.n_cells();
        let mut parent: Vec<usize> = (0..n_cells).collect();
        for a in 0..model.n_atoms() {
            let atom = model.atom(a);
            if atom.h.is_zero() {
                continue;
            }
            for pair in atom.incident.windows(2) {
                union(&mut parent, pair[0], pair[1]);
            }
        }
        let mut escapes: Vec<bool> = vec![false; n_cells];
        for c in 0..n_cells {
            if !support.contains(c) {
                let r = find(&mut parent, c);
                escapes[r] = true;
            }
        }
        for c in support.cells() {
            let r = find(&mut parent, c);
            if !escapes[r] {
                let class: Vec<usize> = (0..n_cells)
                    .filter(|&x| find(&mut parent, x) == r)
                    .collect();
                return Err(Error::NotANorm(format!(
                    "cells {class:?} share no positive-weight interface with the \
                     complement of the support, so their indicator has variation zero"
                )));
            }
        }

        let mut touched = Vec::new();
        for a in 0..model.n_atoms() {
            let atom = model.atom(a);
            if atom.h.is_zero() {
                continue;
            }
            let slots: Vec<Option<usize>> = atom
                .incident
                .iter()
                .map(|c| free.binary_search(c).ok())
                .collect();
            if slots.iter().all(|s| s.is_none()) {
                continue;
            }
            if !model.atom_concave(a) {
                return Err(Error::Unsupported {
                    op: "bv_ball_instance",
                    reason: format!(
                        "atom {a} has a non-concave interface profile, so total \
                         variation is not convex and the ball is not a polytope"
                    ),
                });
            }
            let d = atom.incident.len();
            let coeffs: Vec<Q> = (1..=d)
                .map(|j| &atom.theta[j] - &atom.theta[j - 1])
                .collect();
            touched.push(TouchedAtom {
                h: atom.h.clone(),
                coeffs,
                slots,
            });
        }
        Ok(BVBallInstance {
            model,
            support: support.clone(),
            free,
            touched,
        })
    }

    pub fn model(&self) -> &Arc<SpaceModel> {
        &self.model
    }

    pub fn support(&self) -> &CellSet {
        &self.support
    }

    /// Cells carrying a free coordinate, ascending.
    pub fn free_cells(&self) -> &[usize] {
        &self.free
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    /// Whether the complement of the support is nonempty and connected
    /// through positive-weight atoms staying outside the support.
    pub fn complement_connected(&self) -> bool {
        let n_cells = self.model.n_cells();
        let outside: Vec<usize> = (0..n_cells)
            .filter(|&c| !self.support.contains(c))
            .collect();
        if outside.is_empty() {
            return false;
        }
        let mut parent: Vec<usize> = (0..n_cells).collect();
        for a in 0..self.model.n_atoms() {
            let atom = self.model.atom(a);
            if atom.h.is_zero() {
                continue;
            }
            let mut anchor: Option<usize> = None;
            for &c in &atom.incident {
                if self.support.contains(c) {
                    continue;
                }
                match anchor {
                    None => anchor = Some(c),
                    Some(b) => union(&mut parent, b, c),
                }
            }
        }
        let root = find(&mut parent, outside[0]);
        outside
            .iter()
            .all(|&c| find(&mut parent, c) == root)
    }

    /// Exact variation of a free-coordinate vector (zero off the support).
    fn tv_of(&self, x: &[Q]) -> Q {
        let zero = Q::zero();
        let mut total = Q::zero();
        for ta in &self.touched {
            let mut vals: Vec<&Q> = ta
                .slots
                .iter()
                .map(|s| s.map_or(&zero, |fi| &x[fi]))
                .collect();
            vals.sort_by(|a, b| b.cmp(a));
            let mut t = Q::zero();
            for (j, v) in vals.iter().enumerate() {
                if !ta.coeffs[j].is_zero() && !v.is_zero() {
                    t += &ta.coeffs[j] * *v;
                }
            }
            if !t.is_zero() {
                total += &ta.h * t;
            }
        }
        total
    }

    /// Spanning set for the variation's subdifferential at `x`: the ranked
    /// maximizing assignment per atom, plus one row for every coefficient
    /// swap available inside a run of tied values.
    fn active_rows(&self, x: &[Q]) -> Vec<Vec<Q>> {
        let zero = Q::zero();
        let n = self.free.len();
        let mut base = vec![Q::zero(); n];
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for ta in &self.touched {
            let d = ta.slots.len();
            let vals: Vec<&Q> = ta
                .slots
                .iter()
                .map(|s| s.map_or(&zero, |fi| &x[fi]))
                .collect();
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&p, &q| vals[q].cmp(vals[p]).then(p.cmp(&q)));
            for (j, &s) in order.iter().enumerate() {
                if let Some(fi) = ta.slots[s] {
                    if !ta.coeffs[j].is_zero() {
                        base[fi] += &ta.h * &ta.coeffs[j];
                    }
                }
            }
            let mut lo = 0;
            while lo < d {
                let mut hi = lo + 1;
                while hi < d && vals[order[hi]] == vals[order[lo]] {
                    hi += 1;
                }
                for p in lo..hi {
                    for q in p + 1..hi {
                        if ta.coeffs[p] == ta.coeffs[q] {
                            continue;
                        }
                        let mut row = vec![Q::zero(); n];
                        let mut nonzero = false;
                        if let Some(fi) = ta.slots[order[p]] {
                            row[fi] += &ta.h * (&ta.coeffs[q] - &ta.coeffs[p]);
                            nonzero = true;
                        }
                        if let Some(fi) = ta.slots[order[q]] {
                            row[fi] += &ta.h * (&ta.coeffs[p] - &ta.coeffs[q]);
                            nonzero = true;
                        }
                        if nonzero {
                            rows.push(row);
                        }
                    }
                }
                lo = hi;
            }
        }
        rows.push(base);
        rows
    }

    fn is_vertex(&self, x: &[Q]) -> bool {
        rational_rank(&self.active_rows(x)) == self.free.len()
    }

    /// Lifts free coordinates to a function on the whole model.
    fn lift(&self, x: &[Q]) -> BVFunction {
        let mut full = vec![Q::zero(); self.model.n_cells()];
        for (i, &c) in self.free.iter().enumerate() {
            full[c] = x[i].clone();
        }
        BVFunction::from_exact(&self.model, full).expect("support cells are bounded")
    }

    fn free_values(&self, f: &BVFunction) -> Result<Vec<Q>> {
        if !Arc::ptr_eq(f.model(), &self.model) {
            return Err(Error::ModelMismatch);
        }
        let vals = f.exact_values();
        for (c, v) in vals.iter().enumerate() {
            if !v.is_zero() && !self.support.contains(c) {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} carries a nonzero value outside the ball's support"
                )));
            }
        }
        Ok(self.free.iter().map(|&c| vals[c].clone()).collect())
    }

    /// Value-tie hyperplanes: two free cells agreeing at a shared atom, or a
    /// free cell agreeing with a pinned zero there. `(i, i)` encodes the
    /// zero hyperplane of free coordinate `i`.
    fn tie_hyperplanes(&self) -> Vec<(usize, usize)> {
        let mut ties: BTreeSet<(usize, usize)> = BTreeSet::new();
        for ta in &self.touched {
            let free_slots: Vec<usize> = ta.slots.iter().flatten().copied().collect();
            let has_pinned = ta.slots.iter().any(|s| s.is_none());
            for (a, &fi) in free_slots.iter().enumerate() {
                if has_pinned {
                    ties.insert((fi, fi));
                }
                for &fj in &free_slots[a + 1..] {
                    ties.insert((fi.min(fj), fi.max(fj)));
                }
            }
        }
        ties.into_iter().collect()
    }

    /// The complete vertex set of the ball, each vertex scaled to variation
    /// exactly one, in a deterministic order.
    ///
    /// Candidates come from intersecting `dimension - 1` tie hyperplanes;
    /// the subdifferential span test keeps exactly the true vertices. The
    /// number of hyperplane subsets examined is capped by `caps.patterns`.
    pub fn enumerate_vertices(&self, caps: &Caps) -> Result<Vec<BVFunction>> {
        let n = self.free.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let planes = self.tie_hyperplanes();
        let limit = caps.patterns as u128;
        let combos = binomial_capped(planes.len(), n - 1, limit);
        if combos > limit {
            return Err(Error::CapExceeded {
                op: "enumerate_vertices",
                what: "candidate active sets",
                size: combos.min(usize::MAX as u128) as usize,
                cap: caps.patterns.min(usize::MAX as u64) as usize,
            });
        }

        let row_of = |&(i, j): &(usize, usize)| -> Vec<BigInt> {
            let mut row = vec![BigInt::zero(); n];
            if i == j {
                row[i] = BigInt::one();
            } else {
                row[i] = BigInt::one();
                row[j] = -BigInt::one();
            }
            row
        };

        let mut candidates: BTreeSet<Vec<Q>> = BTreeSet::new();
        for_each_combination(planes.len(), n - 1, |idx| {
            let rows: Vec<Vec<BigInt>> = idx.iter().map(|&i| row_of(&planes[i])).collect();
            let Some(w) = int_kernel_vector(&rows, n) else {
                return;
            };
            let wq: Vec<Q> = w.iter().map(|b| Q::from_integer(b.clone())).collect();
            for flip in [false, true] {
                let dir: Vec<Q> = if flip {
                    wq.iter().map(|v| -v).collect()
                } else {
                    wq.clone()
                };
                let tv = self.tv_of(&dir);
                debug_assert!(tv > Q::zero(), "the norm check guarantees positive variation");
                let x: Vec<Q> = dir.iter().map(|v| v / &tv).collect();
                candidates.insert(x);
            }
        });

        let mut out = Vec::new();
        for x in candidates {
            if self.is_vertex(&x) {
                debug_assert!(self.tv_of(&x).is_one());
                out.push(self.lift(&x));
            }
        }
        Ok(out)
    }
}

/// Result of testing whether a ball member is an extreme point.
pub struct MidpointCheck {
    pub extreme: bool,
    /// Two distinct ball members averaging to the tested function, present
    /// exactly when it is not extreme.
    pub witness: Option<(BVFunction, BVFunction)>,
}

/// Decides whether `f` (a ball member) is extreme: not the average of two
/// distinct functions of variation at most one supported in the ball's
/// support. When it is not, a witness pair is produced by perturbing along
/// a direction the active functionals cannot see.
pub fn midpoint_extremality(instance: &BVBallInstance, f: &BVFunction) -> Result<MidpointCheck> {
    let x = instance.free_values(f)?;
    let tv = instance.tv_of(&x);
    debug_assert_eq!(tv, f.tv_exact());
    let one = Q::one();
    if tv > one {
        return Err(Error::InvalidArgument(
            "midpoint_extremality: the function lies outside the unit ball".into(),
        ));
    }
    let n = instance.dimension();
    let direction: Option<Vec<Q>> = if tv < one {
        if n == 0 {
            // The ball is the single point zero, which is extreme in itself.
            None
        } else {
            let mut e = vec![Q::zero(); n];
            e[0] = Q::one();
            Some(e)
        }
    } else {
        let rows = instance.active_rows(&x);
        let int_rows: Vec<Vec<BigInt>> = rows.iter().map(|r| clear_denominators(r)).collect();
        int_kernel_any(&int_rows, n)
            .map(|w| w.iter().map(|b| Q::from_integer(b.clone())).collect())
    };
    let Some(w) = direction else {
        return Ok(MidpointCheck {
            extreme: true,
            witness: None,
        });
    };

    // Shrink the probe until both endpoints stay inside the ball; piecewise
    // linearity guarantees a positive feasible length.
    let mut eps = Q::one();
    for _ in 0..512 {
        let plus: Vec<Q> = x.iter().zip(&w).map(|(v, d)| v + d * &eps).collect();
        let minus: Vec<Q> = x.iter().zip(&w).map(|(v, d)| v - d * &eps).collect();
        if instance.tv_of(&plus) <= one && instance.tv_of(&minus) <= one {
            return Ok(MidpointCheck {
                extreme: false,
                witness: Some((instance.lift(&plus), instance.lift(&minus))),
            });
        }
        eps /= Q::from_integer(2.into());
    }
    unreachable!("a feasible probe length exists because variation is piecewise linear");
}

/// A scaled-indicator extreme-point prediction.
pub struct Prediction {
    pub set: CellSet,
    pub negative: bool,
    pub function: BVFunction,
}

/// Signed scaled indicators of every simple subset of the support with
/// positive measure, ordered by subset then sign.
pub fn predict_vertices(instance: &BVBallInstance) -> Result<Vec<Prediction>> {
    let model = instance.model();
    let free = instance.free_cells();
    let n = free.len();
    let mut out = Vec::new();
    for mask in 1u64..1u64 << n {
        let cells = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| free[i]);
        let e = CellSet::from_cells(model, cells)?;
        let positive = e
            .measure()
            .as_finite()
            .is_some_and(|m| *m > Q::zero());
        if !positive || !decomp::is_simple(&e)?.simple {
            continue;
        }
        let p = e.perimeter_exact();
        debug_assert!(p > Q::zero(), "simple sets have positive perimeter");
        let scale = p.recip();
        let f = BVFunction::indicator(&e)?.scale(&scale);
        let neg = f.scale(&-Q::one());
        out.push(Prediction {
            set: e.clone(),
            negative: false,
            function: f,
        });
        out.push(Prediction {
            set: e,
            negative: true,
            function: neg,
        });
    }
    Ok(out)
}

/// How a vertex's support sits in the decomposition hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Simple,
    IndecomposableOnly,
    Other,
}

impl VertexKind {
    pub fn name(self) -> &'static str {
        match self {
            VertexKind::Simple => "simple",
            VertexKind::IndecomposableOnly => "indecomposable-not-simple",
            VertexKind::Other => "other",
        }
    }
}

/// One enumerated vertex with its classification.
pub struct VertexInfo {
    pub function: BVFunction,
    pub support: CellSet,
    /// The common nonzero value when the vertex is a scaled indicator.
    pub indicator_value: Option<Q>,
    pub kind: VertexKind,
    /// Whether some predicted function equals this vertex exactly.
    pub predicted: bool,
}

/// A prediction judged against the enumerated vertex set.
pub struct PredictionVerdict {
    pub prediction: Prediction,
    pub is_vertex: bool,
    pub midpoint_extreme: bool,
}

/// A one-sided disagreement between enumeration and prediction.
pub struct Mismatch {
    pub function: BVFunction,
    /// True: an enumerated vertex no prediction covers. False: a predicted
    /// function the enumeration rejected.
    pub unpredicted_vertex: bool,
    pub diagnosis: String,
}

/// Full reconciliation of the enumerated and predicted extreme points.
pub struct ExtremePointReport {
    pub vertices: Vec<VertexInfo>,
    pub predictions: Vec<PredictionVerdict>,
    pub negation_symmetric: bool,
    /// Every vertex is a signed scaled indicator.
    pub all_vertices_indicators: bool,
    /// Every vertex's support is indecomposable.
    pub all_vertices_indecomposable: bool,
    /// Every prediction appears among the vertices.
    pub predictions_are_vertices: bool,
    /// Every prediction passes the independent midpoint-extremality search.
    pub predictions_midpoint_extreme: bool,
    /// The two lists coincide exactly.
    pub exact_match: bool,
    pub complement_connected: bool,
    pub mismatches: Vec<Mismatch>,
}

/// Enumerates, predicts, classifies, and reconciles. Every enumerated
/// vertex is re-checked to carry variation exactly one.
pub fn compare(instance: &BVBallInstance, caps: &Caps) -> Result<ExtremePointReport> {
    let vertex_fns = instance.enumerate_vertices(caps)?;
    let raw_predictions = predict_vertices(instance)?;

    let vertex_keys: BTreeSet<Vec<Q>> = vertex_fns
        .iter()
        .map(|f| f.exact_values().to_vec())
        .collect();
    let prediction_keys: BTreeSet<Vec<Q>> = raw_predictions
        .iter()
        .map(|p| p.function.exact_values().to_vec())
        .collect();

    let mut vertices = Vec::new();
    let mut mismatches = Vec::new();
    for f in &vertex_fns {
        assert!(
            f.tv_exact().is_one(),
            "every enumerated vertex must sit exactly on the unit sphere"
        );
        let support = f.support();
        let indicator_value = indicator_value_of(f);
        let kind = if indicator_value.is_none() {
            VertexKind::Other
        } else if decomp::is_simple(&support)?.simple {
            VertexKind::Simple
        } else if decomp::is_indecomposable(&support, None, Algorithm::Fast, caps)?.indecomposable
        {
            VertexKind::IndecomposableOnly
        } else {
            VertexKind::Other
        };
        let predicted = prediction_keys.contains(f.exact_values());
        if !predicted {
            let diagnosis = match kind {
                VertexKind::Simple => {
                    "support is simple, yet its scaled indicator was not predicted".into()
                }
                VertexKind::IndecomposableOnly => {
                    "support is indecomposable but not simple, so no prediction covers it"
                        .into()
                }
                VertexKind::Other => {
                    if indicator_value.is_none() {
                        "vertex is not a signed scaled indicator".into()
                    } else {
                        "vertex support decomposes".to_string()
                    }
                }
            };
            mismatches.push(Mismatch {
                function: f.clone(),
                unpredicted_vertex: true,
                diagnosis,
            });
        }
        vertices.push(VertexInfo {
            function: f.clone(),
            support,
            indicator_value,
            kind,
            predicted,
        });
    }

    let negation_symmetric = vertex_fns.iter().all(|f| {
        let neg: Vec<Q> = f.exact_values().iter().map(|v| -v).collect();
        vertex_keys.contains(&neg)
    });

    let mut predictions = Vec::new();
    for p in raw_predictions {
        let is_vertex = vertex_keys.contains(p.function.exact_values());
        let midpoint_extreme = midpoint_extremality(instance, &p.function)?.extreme;
        if !is_vertex {
            mismatches.push(Mismatch {
                function: p.function.clone(),
                unpredicted_vertex: false,
                diagnosis: format!(
                    "scaled indicator of a simple set failed the vertex test \
                     (independent midpoint search says extreme: {midpoint_extreme})"
                ),
            });
        }
        predictions.push(PredictionVerdict {
            prediction: p,
            is_vertex,
            midpoint_extreme,
        });
    }

    let all_vertices_indicators = vertices.iter().all(|v| v.indicator_value.is_some());
    let all_vertices_indecomposable = vertices
        .iter()
        .all(|v| matches!(v.kind, VertexKind::Simple | VertexKind::IndecomposableOnly));
    let predictions_are_vertices = predictions.iter().all(|p| p.is_vertex);
    let predictions_midpoint_extreme = predictions.iter().all(|p| p.midpoint_extreme);
    let exact_match = predictions_are_vertices && vertices.iter().all(|v| v.predicted);

    Ok(ExtremePointReport {
        vertices,
        predictions,
        negation_symmetric,
        all_vertices_indicators,
        all_vertices_indecomposable,
        predictions_are_vertices,
        predictions_midpoint_extreme,
        exact_match,
        complement_connected: instance.complement_connected(),
        mismatches,
    })
}

/// No member of the list is the average of two distinct other members —
/// the brute-force cross-check for small vertex sets.
pub fn no_vertex_is_pair_midpoint(vertices: &[BVFunction]) -> bool {
    let keys: BTreeSet<Vec<Q>> = vertices
        .iter()
        .map(|f| f.exact_values().to_vec())
        .collect();
    let half = Q::new(1.into(), 2.into());
    let list: Vec<&Vec<Q>> = keys.iter().collect();
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            let mid: Vec<Q> = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x + y) * &half)
                .collect();
            if keys.contains(&mid) {
                return false;
            }
        }
    }
    true
}

fn indicator_value_of(f: &BVFunction) -> Option<Q> {
    let mut common: Option<&Q> = None;
    for v in f.exact_values() {
        if v.is_zero() {
            continue;
        }
        match common {
            None => common = Some(v),
            Some(c) if c == v => {}
            Some(_) => return None,
        }
    }
    common.cloned()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let ra = find(parent, a);
    let rb = find(parent, b);
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// `C(n, k)` capped: any value beyond `limit` comes back as `limit + 1`.
fn binomial_capped(n: usize, k: usize, limit: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - k + i + 1) as u128) / (i as u128 + 1);
        if acc > limit {
            return limit + 1;
        }
    }
    acc
}

fn for_each_combination(n_items: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n_items {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n_items - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
