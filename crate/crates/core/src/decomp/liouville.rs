//! Constancy of functions with no variation inside a set.
//!
//! Call the full-density atoms of a set its measure-theoretic interior. On
//! well-behaved models a function whose variation vanishes on the interior
//! of an indecomposable set is constant there, and conversely a decomposable
//! set carries a nonconstant function with zero interior variation (the
//! indicator of one piece of an additive split). The two notions can come
//! apart: on a three-edge star the union of two edges is indecomposable,
//! yet the indicator of a single edge has zero interior variation because
//! the junction never reaches full density. This module measures exactly
//! that gap.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Caps;
use crate::error::Error;
use crate::function::BVFunction;
use crate::set::CellSet;
use crate::Result;

use super::{canonical_sets, is_indecomposable, Algorithm};

/// Whether "indecomposable" and "interior variation forces constancy"
/// agree for one set.
#[derive(Debug, Clone)]
pub struct LiouvilleReport {
    /// Cells of the set glued through positive-weight full-density atoms.
    /// A function has zero interior variation iff it is constant on each
    /// class, so constancy on the whole set is equivalent to a single class.
    pub interior_classes: Vec<CellSet>,
    pub indecomposable: bool,
    /// One interior class iff indecomposable. Expected on models whose
    /// junctions cancel; fails on the three-edge star.
    pub equivalence_holds: bool,
    /// A function with zero interior variation that is not constant on the
    /// set; present exactly when there are at least two classes. When the
    /// set is also indecomposable this function refutes the constancy
    /// principle on this model.
    pub counterexample: Option<BVFunction>,
    /// Randomized consistency trials run against the class structure.
    pub trials: usize,
}

/// Compare indecomposability with the constancy principle on `e`, and
/// stress the equivalence with `trials` randomized functions.
pub fn check_liouville_equivalence(
    e: &CellSet,
    trials: usize,
    seed: u64,
    caps: &Caps,
) -> Result<LiouvilleReport> {
    if !e.measure().is_finite() {
        return Err(Error::InfiniteMeasure {
            op: "check_liouville_equivalence",
        });
    }
    let model = e.model();
    let cells = e.to_indices();
    let interior = e.full_density_atoms();

    // Union-find over the set's cells through positive-weight interior atoms.
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
    for a in interior.atoms() {
        if model.h(a).is_zero() {
            continue;
        }
        let incident = &model.atom(a).incident;
        debug_assert!(incident.iter().all(|&c| local[c] != usize::MAX));
        let root = find(&mut parent, local[incident[0]]);
        for &c in &incident[1..] {
            let r = find(&mut parent, local[c]);
            parent[r] = root;
        }
    }
    let mut groups: std::collections::HashMap<usize, Vec<usize>> =
        std::collections::HashMap::new();
    for (i, &c) in cells.iter().enumerate() {
        groups.entry(find(&mut parent, i)).or_default().push(c);
    }
    let class_parts: Vec<Vec<usize>> = groups.into_values().collect();
    let interior_classes = canonical_sets(model, class_parts)?;

    let indecomposable =
        is_indecomposable(e, None, Algorithm::Fast, caps)?.indecomposable;
    let equivalence_holds = (interior_classes.len() <= 1) == indecomposable;

    let counterexample = if interior_classes.len() >= 2 {
        let f = BVFunction::indicator(&interior_classes[0])?;
        debug_assert!(f.tv_in(&interior)?.is_zero());
        Some(f)
    } else {
        None
    };

    // Machinery check: zero interior variation iff constant on each class.
    // Half the trials use class-constant values, half fully random ones.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let mut values = vec![0.0f64; model.n_cells()];
        if trial % 2 == 0 {
            for class in &interior_classes {
                let v = rng.gen_range(0.0..1.0);
                for c in class.cells() {
                    values[c] = v;
                }
            }
        } else {
            for &c in &cells {
                values[c] = rng.gen_range(0.0..1.0);
            }
        }
        let f = BVFunction::from_values(model, values.clone())?;
        let zero_interior = f.tv_in(&interior)?.is_zero();
        let class_constant = interior_classes.iter().all(|class| {
            let mut members = class.cells();
            let first = members.next().map(|c| values[c]);
            members.all(|c| Some(values[c]) == first)
        });
        assert_eq!(
            zero_interior, class_constant,
            "interior variation must vanish exactly on class-constant functions"
        );
    }

    Ok(LiouvilleReport {
        interior_classes,
        indecomposable,
        equivalence_holds,
        counterexample,
        trials,
    })
}
