//! Holes and saturation: filling the finite pockets a set encloses.
//!
//! A hole of an indecomposable set is a finite-measure component of its
//! complement; the saturation fills every hole. For a decomposable set the
//! definition runs component by component, and that distinction matters:
//! a finite region pinched between two separate components is enclosed by
//! neither of them, so it is not a hole and stays unfilled. Only models
//! with at least one unbounded cell support these operations, since
//! "finite pocket" is meaningless when the whole space is bounded.

use crate::config::Caps;
use crate::error::Error;
use crate::set::CellSet;
use crate::Result;

use super::{canonical_sets, essential_components};

/// Holes and saturation of one set, with the component structure that
/// produced them.
#[derive(Debug, Clone)]
pub struct SaturationReport {
    pub input: CellSet,
    /// Indecomposable components of the input, canonical order.
    pub components: Vec<CellSet>,
    /// Holes of the components, canonical order. Holes of different
    /// components may nest: a hole of an outer ring can contain an inner
    /// component together with that component's own holes.
    pub holes: Vec<CellSet>,
    /// The input with every hole filled.
    pub saturation: CellSet,
    pub saturated: bool,
}

/// Compute components, holes, and saturation of a finite-measure set on a
/// model with unbounded cells.
pub fn saturation_report(e: &CellSet, caps: &Caps) -> Result<SaturationReport> {
    let model = e.model();
    if !model.has_unbounded_cells() {
        return Err(Error::NoUnboundedCell { op: "saturate" });
    }
    if !e.measure().is_finite() {
        return Err(Error::InfiniteMeasure { op: "saturate" });
    }
    let components = canonical_sets(
        model,
        essential_components(model, &e.to_indices(), caps)?,
    )?;
    let mut hole_parts: Vec<Vec<usize>> = Vec::new();
    let mut saturation = e.clone();
    for component in &components {
        let complement = component.complement().to_indices();
        for part in essential_components(model, &complement, caps)? {
            if part.iter().all(|&c| !model.is_unbounded(c)) {
                saturation =
                    saturation.union(&CellSet::from_cells(model, part.iter().copied())?)?;
                hole_parts.push(part);
            }
        }
    }
    let holes = canonical_sets(model, hole_parts)?;
    let saturated = saturation.same_set(e);
    Ok(SaturationReport {
        input: e.clone(),
        components,
        holes,
        saturation,
        saturated,
    })
}

/// The holes of `e`: finite-measure complement components of each of its
/// indecomposable components.
pub fn holes(e: &CellSet, caps: &Caps) -> Result<Vec<CellSet>> {
    Ok(saturation_report(e, caps)?.holes)
}

/// `e` with every hole filled.
pub fn saturate(e: &CellSet, caps: &Caps) -> Result<CellSet> {
    Ok(saturation_report(e, caps)?.saturation)
}

pub fn is_saturated(e: &CellSet, caps: &Caps) -> Result<bool> {
    Ok(saturation_report(e, caps)?.saturated)
}

/// The components of the complement, with the count of infinite ones.
#[derive(Debug, Clone)]
pub struct InfiniteComponentsReport {
    /// All components of the complement, canonical order (infinite first).
    pub components: Vec<CellSet>,
    /// How many contain an unbounded cell.
    pub infinite: usize,
    /// Exactly one infinite component. Holds for every finite set on a
    /// framed grid; fails on strip models, whose two ends a spanning set
    /// separates.
    pub unique_infinite: bool,
}

/// Component structure of the complement of a finite-measure set.
pub fn infinite_complement_components(
    e: &CellSet,
    caps: &Caps,
) -> Result<InfiniteComponentsReport> {
    let model = e.model();
    if !model.has_unbounded_cells() {
        return Err(Error::NoUnboundedCell {
            op: "infinite_complement_components",
        });
    }
    if !e.measure().is_finite() {
        return Err(Error::InfiniteMeasure {
            op: "infinite_complement_components",
        });
    }
    let complement = e.complement().to_indices();
    let components = canonical_sets(model, essential_components(model, &complement, caps)?)?;
    let infinite = components
        .iter()
        .filter(|c| !c.measure().is_finite())
        .count();
    Ok(InfiniteComponentsReport {
        components,
        infinite,
        unique_infinite: infinite == 1,
    })
}
