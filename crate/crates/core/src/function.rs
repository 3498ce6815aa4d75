//! BV functions: total variation, the coarea slicing, simple approximation,
//! and the divergence duality on degree-2 models.
//!
//! Total variation is defined by the coarea formula: `tv(f)` is the integral
//! over thresholds `t` of the perimeter of the superlevel set `{f > t}`.
//! Because a function on a finite model takes finitely many values, the
//! integral collapses to an exact finite sum, evaluated atom by atom from
//! the sorted incident values. The indicator case recovers the perimeter.
//!
//! Functions carry exact rational values internally; the `f64` view exists
//! for reports. Every threshold comparison is done in rationals, so level
//! sets never misclassify a cell to rounding.

use std::fmt;
use std::sync::Arc;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::exact::{q, q_from_f64, q_int, q_to_f64, Q};
use crate::model::SpaceModel;
use crate::set::{AtomSet, CellSet, Measure};
use crate::Result;

/// A real-valued function on the cells of a model, zero on unbounded cells.
#[derive(Clone)]
pub struct BVFunction {
    model: Arc<SpaceModel>,
    values: Vec<f64>,
    exact: OnceLock<Vec<Q>>,
}

impl BVFunction {
    /// Builds from double values; the exact mirror is their exact binary
    /// expansions, so no information is lost.
    pub fn from_values(model: &Arc<SpaceModel>, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.n_cells() {
            return Err(Error::BadDimensions(format!(
                "{} values for {} cells",
                values.len(),
                model.n_cells()
            )));
        }
        for (c, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "value at cell {c} is not finite"
                )));
            }
            if model.is_unbounded(c) && *v != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} is unbounded; integrable functions vanish there"
                )));
            }
        }
        Ok(BVFunction {
            model: Arc::clone(model),
            values,
            exact: OnceLock::new(),
        })
    }

    /// Builds from exact rational values; the double view is the rounded
    /// projection and the rationals stay authoritative.
    pub fn from_exact(model: &Arc<SpaceModel>, values: Vec<Q>) -> Result<Self> {
        if values.len() != model.n_cells() {
            return Err(Error::BadDimensions(format!(
                "{} values for {} cells",
                values.len(),
                model.n_cells()
            )));
        }
        for (c, v) in values.iter().enumerate() {
            if model.is_unbounded(c) && !v.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} is unbounded; integrable functions vanish there"
                )));
            }
        }
        let doubles = values.iter().map(q_to_f64).collect();
        let lock = OnceLock::new();
        let _ = lock.set(values);
        Ok(BVFunction {
            model: Arc::clone(model),
            values: doubles,
            exact: lock,
        })
    }

    pub fn zero(model: &Arc<SpaceModel>) -> Self {
        BVFunction {
            model: Arc::clone(model),
            values: vec![0.0; model.n_cells()],
            exact: OnceLock::new(),
        }
    }

    /// Indicator of a finite-measure set.
    pub fn indicator(set: &CellSet) -> Result<Self> {
        if !set.measure().is_finite() {
            return Err(Error::InfiniteMeasure { op: "indicator" });
        }
        let model = set.model();
        let values = (0..model.n_cells())
            .map(|c| if set.contains(c) { q_int(1) } else { Q::zero() })
            .collect();
        BVFunction::from_exact(model, values)
    }

    pub fn model(&self) -> &Arc<SpaceModel> {
        &self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// The authoritative rational values.
    pub fn exact_values(&self) -> &[Q] {
        self.exact
            .get_or_init(|| self.values.iter().map(|&v| q_from_f64(v)).collect())
    }

    pub fn value_exact(&self, cell: usize) -> &Q {
        &self.exact_values()[cell]
    }

    /// Cells with nonzero value.
    pub fn support(&self) -> CellSet {
        let vals = self.exact_values();
        CellSet::from_cells(
            &self.model,
            (0..vals.len()).filter(|&c| !vals[c].is_zero()),
        )
        .expect("indices in range")
    }

    /// Strict superlevel set `{f > t}`.
    pub fn superlevel_exact(&self, t: &Q) -> CellSet {
        let vals = self.exact_values();
        CellSet::from_cells(&self.model, (0..vals.len()).filter(|&c| vals[c] > *t))
            .expect("indices in range")
    }

    pub fn superlevel(&self, t: f64) -> CellSet {
        self.superlevel_exact(&q_from_f64(t))
    }

    fn check_mate(&self, other: &BVFunction) -> Result<()> {
        if Arc::ptr_eq(&self.model, &other.model) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    pub fn add(&self, other: &BVFunction) -> Result<BVFunction> {
        self.check_mate(other)?;
        let vals = self
            .exact_values()
            .iter()
            .zip(other.exact_values())
            .map(|(a, b)| a + b)
            .collect();
        BVFunction::from_exact(&self.model, vals)
    }

    pub fn scale(&self, factor: &Q) -> BVFunction {
        let vals = self.exact_values().iter().map(|v| v * factor).collect();
        BVFunction::from_exact(&self.model, vals).expect("scaling preserves validity")
    }

    /// Pointwise `min(f, m)`; keeps unbounded cells at zero only when
    /// `m >= 0`, so negative caps are rejected on models with ends.
    pub fn clamp_above(&self, m: &Q) -> Result<BVFunction> {
        if *m < Q::zero() && self.model.has_unbounded_cells() {
            return Err(Error::InvalidArgument(
                "negative cap would lift the function off zero at the ends".into(),
            ));
        }
        let vals = self
            .exact_values()
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if self.model.is_unbounded(c) {
                    Q::zero()
                } else {
                    v.min(m).clone()
                }
            })
            .collect();
        BVFunction::from_exact(&self.model, vals)
    }

    /// Exact total variation: the coarea integral collapsed to the per-atom
    /// layer cake over sorted incident values.
    pub fn tv_exact(&self) -> Q {
        let mut total = Q::zero();
        for a in 0..self.model.n_atoms() {
            total += self.atom_tv(a);
        }
        total
    }

    pub fn tv(&self) -> f64 {
        q_to_f64(&self.tv_exact())
    }

    /// Total variation restricted to a window of atoms.
    pub fn tv_in(&self, window: &AtomSet) -> Result<Q> {
        if !Arc::ptr_eq(self.model(), window.model()) {
            return Err(Error::ModelMismatch);
        }
        let mut total = Q::zero();
        for a in window.atoms() {
            total += self.atom_tv(a);
        }
        Ok(total)
    }

    fn atom_tv(&self, atom: usize) -> Q {
        let vals = self.exact_values();
        let a = self.model.atom(atom);
        let mut incident: Vec<&Q> = a.incident.iter().map(|&c| &vals[c]).collect();
        incident.sort_by(|x, y| y.cmp(x));
        let mut sum = Q::zero();
        for j in 1..incident.len() {
            if incident[j - 1] > incident[j] {
                // Between these two values the superlevel set holds exactly
                // the j larger stubs.
                sum += self.model.theta(atom, j) * (incident[j - 1] - incident[j]);
            }
        }
        &a.h * sum
    }

    /// Slices the function along its value scale; see [`CoareaDecomposition`].
    pub fn coarea_decompose(&self) -> CoareaDecomposition {
        let vals = self.exact_values();
        let mut levels: Vec<Q> = vals.to_vec();
        levels.sort();
        levels.dedup();
        let base = levels.first().cloned().unwrap_or_else(Q::zero);
        let mut slices = Vec::new();
        for j in 1..levels.len() {
            let set = self.superlevel_exact(&levels[j - 1]);
            slices.push(CoareaSlice {
                t_lo: levels[j - 1].clone(),
                t_hi: levels[j].clone(),
                perimeter: set.perimeter_exact(),
                set,
            });
        }
        CoareaDecomposition { base, slices }
    }

    /// Replaces the function by a simple one taking values on the grid
    /// `Z / n`, following the layer-cake construction: one threshold is
    /// chosen inside each value window `((i-1)/n, i/n)` and the function is
    /// rebuilt from the chosen superlevel sets. Within each window the
    /// threshold minimizes the perimeter of the level set among the finitely
    /// many it can produce, ties to the smaller threshold.
    pub fn simple_approximation(&self, n: usize) -> Result<SimpleApproximation> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "approximation grid needs n >= 1".into(),
            ));
        }
        let vals = self.exact_values();
        let max_abs = vals
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Q::zero);
        let k: i64 = {
            let c = max_abs.ceil().to_integer();
            let c: i64 = c.try_into().map_err(|_| {
                Error::InvalidArgument("function values too large to slice".into())
            })?;
            c.max(1)
        };
        let n_q = q_int(n as i64);
        let kn = k * n as i64;

        let mut distinct: Vec<Q> = vals.to_vec();
        distinct.sort();
        distinct.dedup();

        let mut thresholds = Vec::new();
        let mut level_sets = Vec::new();
        let mut nested_bound = Q::zero();
        let mut counts = vec![0i64; vals.len()];
        for i in (-kn + 1)..=kn {
            let lo = q_int(i - 1) / &n_q;
            let hi = q_int(i) / &n_q;
            // Breakpoints strictly inside the window; between consecutive
            // ones the superlevel set is constant.
            let inside: Vec<&Q> = distinct.iter().filter(|v| **v > lo && **v < hi).collect();
            let mut candidates = Vec::with_capacity(inside.len() + 1);
            let half = q(1, 2);
            let mut prev = lo.clone();
            for v in &inside {
                candidates.push((&prev + *v) * &half);
                prev = (*v).clone();
            }
            candidates.push((&prev + &hi) * &half);

            let mut best: Option<(Q, CellSet, Q)> = None;
            for t in candidates {
                let set = self.superlevel_exact(&t);
                let p = set.perimeter_exact();
                let better = match &best {
                    Some((_, _, bp)) => p < *bp,
                    None => true,
                };
                if better {
                    best = Some((t, set, p));
                }
            }
            let (t, set, p) = best.expect("at least one candidate per window");
            for c in set.cells() {
                counts[c] += 1;
            }
            nested_bound += &p / &n_q;
            thresholds.push(t);
            level_sets.push(set);
        }

        let approx_vals: Vec<Q> = counts
            .iter()
            .map(|&c| q_int(-k) + q_int(c) / &n_q)
            .collect();
        let approx = BVFunction::from_exact(&self.model, approx_vals)?;

        let mut l1_error = Q::zero();
        for c in self.model.bounded_cells() {
            l1_error += self.model.cell(c).measure.clone()
                * (&vals[c] - approx.value_exact(c)).abs();
        }
        let support_measure = match self.support().measure() {
            Measure::Finite(m) => m,
            Measure::Infinite => unreachable!("support excludes unbounded cells"),
        };
        Ok(SimpleApproximation {
            tv_input: self.tv_exact(),
            tv_output: approx.tv_exact(),
            approx,
            thresholds,
            level_sets,
            weight: Q::new(1.into(), (n as i64).into()),
            l1_error,
            nested_bound,
            support_measure,
            n,
            k,
        })
    }

    /// Evaluates the duality with unit edge fields on a degree-2 model: the
    /// supremum of `sum f * div(b)` over fields `|b| <= 1` is attained at
    /// `b = sign of the jump` and equals the total variation. Atoms of
    /// degree 3 or more have no edge-field description, so such models are
    /// refused.
    pub fn tv_via_divergence(&self) -> Result<DivergenceDuality> {
        for a in 0..self.model.n_atoms() {
            if self.model.atom(a).degree() != 2 {
                return Err(Error::Unsupported {
                    op: "divergence-duality",
                    reason: format!("atom {a} has degree {}", self.model.atom(a).degree()),
                });
            }
        }
        let vals = self.exact_values();
        let mut field = Vec::with_capacity(self.model.n_atoms());
        let mut value = Q::zero();
        for a in 0..self.model.n_atoms() {
            let inc = &self.model.atom(a).incident;
            let jump = &vals[inc[0]] - &vals[inc[1]];
            let b = match jump.cmp(&Q::zero()) {
                std::cmp::Ordering::Greater => q_int(1),
                std::cmp::Ordering::Less => q_int(-1),
                std::cmp::Ordering::Equal => Q::zero(),
            };
            value += self.model.h(a) * self.model.theta(a, 1) * jump.abs();
            field.push(b);
        }
        Ok(DivergenceDuality { value, field })
    }
}

impl fmt::Debug for BVFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BVFunction{:?}", self.values)
    }
}

impl PartialEq for BVFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.model, &other.model) && self.exact_values() == other.exact_values()
    }
}

impl Eq for BVFunction {}

/// One constancy window of `t -> {f > t}`.
#[derive(Debug, Clone)]
pub struct CoareaSlice {
    pub t_lo: Q,
    pub t_hi: Q,
    pub set: CellSet,
    pub perimeter: Q,
}

/// The function sliced along its value scale: on `[t_lo, t_hi)` the
/// superlevel set is constant, and summing `perimeter * (t_hi - t_lo)`
/// recovers the total variation exactly. The function itself is recovered
/// as `base + sum of slice indicators weighted by window widths`.
#[derive(Debug, Clone)]
pub struct CoareaDecomposition {
    pub base: Q,
    pub slices: Vec<CoareaSlice>,
}

impl CoareaDecomposition {
    /// `sum perimeter * width`; equal to `tv_exact` of the sliced function.
    pub fn total(&self) -> Q {
        self.slices
            .iter()
            .map(|s| &s.perimeter * (&s.t_hi - &s.t_lo))
            .sum()
    }

    /// Rebuilds the function from its slices.
    pub fn reconstruct(&self, model: &Arc<SpaceModel>) -> Result<BVFunction> {
        let mut vals = vec![self.base.clone(); model.n_cells()];
        for slice in &self.slices {
            let width = &slice.t_hi - &slice.t_lo;
            for c in slice.set.cells() {
                vals[c] += &width;
            }
        }
        // Unbounded cells sit at the base level plus every negative slice;
        // that telescopes back to zero because the original vanished there.
        BVFunction::from_exact(model, vals)
    }
}

/// Result of [`BVFunction::simple_approximation`].
#[derive(Debug, Clone)]
pub struct SimpleApproximation {
    pub approx: BVFunction,
    /// Chosen thresholds, ascending with the window index.
    pub thresholds: Vec<Q>,
    /// Superlevel sets at the chosen thresholds (nested decreasing).
    pub level_sets: Vec<CellSet>,
    /// Common coefficient `1/n` of the layer-cake representation.
    pub weight: Q,
    pub l1_error: Q,
    /// `sum of |coefficient| * perimeter` over the representation; bounded
    /// by the input variation.
    pub nested_bound: Q,
    pub tv_input: Q,
    pub tv_output: Q,
    pub support_measure: Q,
    pub n: usize,
    pub k: i64,
}

impl SimpleApproximation {
    /// The guaranteed error bound `m(support) / n`.
    pub fn error_bound(&self) -> Q {
        &self.support_measure / q_int(self.n as i64)
    }
}

/// Result of [`BVFunction::tv_via_divergence`]: the duality value and the
/// optimal edge field, `field[a]` flowing from the first to the second
/// incident cell of atom `a`.
#[derive(Debug, Clone)]
pub struct DivergenceDuality {
    pub value: Q,
    pub field: Vec<Q>,
}

impl DivergenceDuality {
    /// `sum over cells of f * div(field)` for any admissible field; equals
    /// `value` for the optimal one. Exposed so tests can verify optimality
    /// against perturbed fields.
    pub fn pairing(f: &BVFunction, field: &[Q]) -> Result<Q> {
        let model = f.model();
        if field.len() != model.n_atoms() {
            return Err(Error::BadDimensions(format!(
                "{} field entries for {} atoms",
                field.len(),
                model.n_atoms()
            )));
        }
        let vals = f.exact_values();
        let mut total = Q::zero();
        for a in 0..model.n_atoms() {
            let atom = model.atom(a);
            if atom.degree() != 2 {
                return Err(Error::Unsupported {
                    op: "divergence-duality",
                    reason: format!("atom {a} has degree {}", atom.degree()),
                });
            }
            let w = model.h(a) * model.theta(a, 1);
            total += w * &field[a] * (&vals[atom.incident[0]] - &vals[atom.incident[1]]);
        }
        Ok(total)
    }
}
