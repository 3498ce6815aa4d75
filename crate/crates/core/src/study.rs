//! Trend study over the pre-fractal carpet family.
//!
//! For each construction level the study reports, per diagnostic vertical
//! strip, the ratio of carpet measure to strip area — a density that decays
//! as deeper holes accumulate — together with the component count of a
//! fixed test set (the cells filling the left half of the square). The
//! ratios are exact rationals; a strictly decreasing column is finite-level
//! evidence that ever-finer boundary mass concentrates everywhere, which is
//! the mechanism that defeats countable decompositions in the limit object.
//! The limit statement itself is out of reach here: every model is a finite
//! complex, so the study stops at trends.

use std::sync::Arc;

use crate::config::Caps;
use crate::decomp::{decompose, Algorithm};
use crate::exact::{q, q_int, Q};
use crate::model::builders::build_sierpinski_carpet;
use crate::set::CellSet;
use crate::Result;

/// One strip measurement at one level.
#[derive(Debug, Clone)]
pub struct CarpetStudyRow {
    pub level: usize,
    /// Center of the diagnostic strip; `None` is the full-width row.
    pub abscissa: Option<Q>,
    /// Carpet measure of the strip divided by the strip's full area.
    pub ratio: Q,
    /// Components of the half-square test set at this level.
    pub components: usize,
}

/// The default hole sides `a_i = 3^-i / i`: a strictly fat carpet, so every
/// cell keeps positive measure while holes open at every scale.
pub fn default_carpet_sequence(levels: usize) -> Vec<Q> {
    (1..=levels as u32)
        .map(|i| q(1, 3i64.pow(i) * i as i64))
        .collect()
}

/// Half-width of the diagnostic strips: one level-4 cell width, so the
/// deepest studied level still meters whole cells.
pub fn strip_half_width() -> Q {
    q(1, 162)
}

/// Centers of the three diagnostic strips: the midpoints of the outer
/// thirds, which stay clear of first-step holes, and the line through the
/// middle of the square, which crosses them.
pub fn diagnostic_abscissas() -> Vec<Q> {
    vec![q(1, 6), q(1, 2), q(5, 6)]
}

/// Run the study for levels `1..=max_level` with the default sequence.
///
/// Per level the rows come out full-width first, then the diagnostic
/// abscissas in ascending order. The test set is the union of all cells
/// contained in the left half `[0, 1/2] x [0, 1]`.
pub fn carpet_study(max_level: usize, caps: &Caps) -> Result<Vec<CarpetStudyRow>> {
    let a = default_carpet_sequence(max_level);
    let eps = strip_half_width();
    let abscissas = diagnostic_abscissas();
    let mut rows = Vec::new();
    for level in 1..=max_level {
        let (model, geo) = build_sierpinski_carpet(&a[..level], level)?;
        let model = Arc::new(model);

        let mut test_cells = Vec::new();
        for y in 0..geo.n {
            for x in 0..geo.n {
                // The cell spans [x/n, (x+1)/n]; keep it when that stays
                // inside the left half.
                if 2 * (x + 1) <= geo.n {
                    if let Some(c) = geo.cell_at(x, y) {
                        test_cells.push(c);
                    }
                }
            }
        }
        let test = CellSet::from_cells(&model, test_cells)?;
        let components = decompose(&test, Algorithm::Fast, None, caps)?
            .components
            .len();

        rows.push(CarpetStudyRow {
            level,
            abscissa: None,
            ratio: geo.strip_measure(&Q::from_integer(0.into()), &q_int(1)),
            components,
        });
        for x in &abscissas {
            let lo = x - &eps;
            let hi = x + &eps;
            let width = &hi - &lo;
            rows.push(CarpetStudyRow {
                level,
                abscissa: Some(x.clone()),
                ratio: geo.strip_measure(&lo, &hi) / width,
                components,
            });
        }
    }
    Ok(rows)
}
