//! Shipped model builders.
//!
//! Four families cover the test corpus:
//!
//! * `grid` — a `w x h` array of square cells with shared-edge atoms, and an
//!   optional unbounded exterior ringing the array;
//! * `metric graph` — edges subdivided into segment cells, degree-2 atoms at
//!   interior junctions and a `min(k, d-k)` table at each graph vertex;
//! * `carpet` — a finite-level pre-fractal square carpet with concentric
//!   holes of prescribed side lengths;
//! * `strip` — a finite window of an infinite horizontal strip, with
//!   unbounded cells at both ends.

use num_traits::{One, Zero};

use crate::error::Error;
use crate::exact::{pow3_inv, q_from_f64, q_int, q_parse, q_to_string, Q};
use crate::model::{Cell, InterfaceAtom, ModelKind, ModelMeta, SpaceModel};
use crate::Result;

fn unit_pair_theta() -> Vec<Q> {
    vec![Q::zero(), Q::one(), Q::zero()]
}

/// Uniform unit grid, cell side 1, density 1.
pub fn build_grid(width: usize, height: usize, frame: bool) -> Result<SpaceModel> {
    build_grid_weighted(width, height, &q_int(1), |_, _| 1.0, frame)
}

/// Grid of `width x height` square cells of side `cell_side`.
///
/// `weight(x, y)` is the density of the cell in column `x`, row `y` (ids are
/// row-major, `y * width + x`). A cell's measure is `weight * side^2`; a
/// shared edge between cells of weights `w1, w2` carries
/// `h = side * (w1 + w2) / 2`. With `frame` set, a single unbounded exterior
/// cell rings the grid and every outer cell side becomes an atom of weight
/// `side * weight(cell)` against it.
pub fn build_grid_weighted(
    width: usize,
    height: usize,
    cell_side: &Q,
    weight: impl Fn(usize, usize) -> f64,
    frame: bool,
) -> Result<SpaceModel> {
    if width == 0 || height == 0 {
        return Err(Error::BadDimensions(format!(
            "grid dimensions must be positive, got {width}x{height}"
        )));
    }
    if *cell_side <= Q::zero() {
        return Err(Error::BadDimensions("cell side must be positive".into()));
    }
    let n = width * height;
    let half = Q::new(1.into(), 2.into());
    let mut weights = Vec::with_capacity(n);
    for y in 0..height {
        for x in 0..width {
            let w = weight(x, y);
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::BadCell {
                    id: y * width + x,
                    reason: format!("weight must be positive and finite, got {w}"),
                });
            }
            weights.push(q_from_f64(w));
        }
    }
    let area = cell_side * cell_side;
    let mut cells: Vec<Cell> = weights.iter().map(|w| Cell::bounded(w * &area)).collect();
    let mut atoms = Vec::new();
    let pair = |a: usize, b: usize, weights: &[Q]| InterfaceAtom {
        incident: vec![a, b],
        h: cell_side * (&weights[a] + &weights[b]) * &half,
        theta: unit_pair_theta(),
    };
    for y in 0..height {
        for x in 0..width {
            let id = y * width + x;
            if x + 1 < width {
                atoms.push(pair(id, id + 1, &weights));
            }
            if y + 1 < height {
                atoms.push(pair(id, id + width, &weights));
            }
        }
    }
    if frame {
        let exterior = n;
        cells.push(Cell::unbounded());
        let mut outer = |cell: usize| {
            atoms.push(InterfaceAtom {
                incident: vec![cell, exterior],
                h: cell_side * &weights[cell],
                theta: unit_pair_theta(),
            });
        };
        for x in 0..width {
            outer(x); // bottom row
            outer((height - 1) * width + x); // top row
        }
        for y in 0..height {
            outer(y * width); // left column
            outer(y * width + width - 1); // right column
        }
    }
    let diameters = Some(vec![cell_side.clone(); cells.len()]);
    SpaceModel::new(
        cells,
        atoms,
        diameters,
        ModelMeta {
            kind: ModelKind::Grid,
            label: grid_label(width, height, cell_side),
        },
    )
}

fn grid_label(w: usize, h: usize, side: &Q) -> String {
    if side.is_one() {
        format!("grid:{w}x{h}")
    } else {
        format!("grid:{w}x{h}:{}", q_to_string(side))
    }
}

/// Metric graph over `n_vertices`, each edge `(u, v, length)` subdivided
/// into `resolution` segment cells of equal measure.
///
/// Interior junctions between consecutive segments are degree-2 atoms of
/// unit weight. A graph vertex of degree `d >= 2` becomes one atom over the
/// adjacent end segments with `theta(k) = min(k, d - k)`; degree-1 vertices
/// contribute no atom (the space simply ends there, so no boundary can
/// concentrate at them). Both choices are pinned by the ramp-relaxation and
/// covering-ball oracles in [`crate::model::audits`].
pub fn build_metric_graph(
    n_vertices: usize,
    edges: &[(usize, usize, Q)],
    resolution: usize,
) -> Result<SpaceModel> {
    if edges.is_empty() {
        return Err(Error::BadGraph("graph has no edges".into()));
    }
    if resolution == 0 {
        return Err(Error::BadGraph("resolution must be at least 1".into()));
    }
    let mut degree = vec![0usize; n_vertices];
    for (idx, (u, v, len)) in edges.iter().enumerate() {
        if *u >= n_vertices || *v >= n_vertices {
            return Err(Error::BadGraph(format!(
                "edge {idx} has dangling endpoint ({u}, {v}) with {n_vertices} vertices"
            )));
        }
        if u == v {
            return Err(Error::BadGraph(format!("edge {idx} is a self-loop")));
        }
        if *len <= Q::zero() {
            return Err(Error::BadGraph(format!("edge {idx} has nonpositive length")));
        }
        degree[*u] += 1;
        degree[*v] += 1;
    }
    if let Some(v) = degree.iter().position(|&d| d == 0) {
        return Err(Error::BadGraph(format!("vertex {v} has degree 0")));
    }

    let res_q = q_int(resolution as i64);
    let mut cells = Vec::with_capacity(edges.len() * resolution);
    let mut diameters = Vec::with_capacity(edges.len() * resolution);
    let mut atoms = Vec::new();
    for (e, (_, _, len)) in edges.iter().enumerate() {
        let seg = len / &res_q;
        for j in 0..resolution {
            cells.push(Cell::bounded(seg.clone()));
            diameters.push(seg.clone());
            if j + 1 < resolution {
                atoms.push(InterfaceAtom {
                    incident: vec![e * resolution + j, e * resolution + j + 1],
                    h: Q::one(),
                    theta: unit_pair_theta(),
                });
            }
        }
    }
    // One atom per vertex of degree >= 2, over the segments that end there.
    let mut stubs: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    for (e, (u, v, _)) in edges.iter().enumerate() {
        stubs[*u].push(e * resolution);
        stubs[*v].push(e * resolution + resolution - 1);
    }
    for stub in stubs {
        let d = stub.len();
        if d < 2 {
            continue;
        }
        let theta = (0..=d)
            .map(|k| q_int(k.min(d - k) as i64))
            .collect();
        atoms.push(InterfaceAtom {
            incident: stub,
            h: Q::one(),
            theta,
        });
    }
    SpaceModel::new(
        cells,
        atoms,
        Some(diameters),
        ModelMeta {
            kind: ModelKind::MetricGraph,
            label: format!("graph:{}v:{}e:r{}", n_vertices, edges.len(), resolution),
        },
    )
}

/// Star with `d` edges of length `len` joined at a central vertex.
pub fn build_star(d: usize, len: &Q, resolution: usize) -> Result<SpaceModel> {
    if d < 2 {
        return Err(Error::BadGraph(
            "a star needs at least 2 edges (the center must be a junction)".into(),
        ));
    }
    let edges: Vec<(usize, usize, Q)> = (0..d).map(|i| (0, i + 1, len.clone())).collect();
    let mut model = build_metric_graph(d + 1, &edges, resolution)?;
    model.relabel(star_label(d, len, resolution));
    Ok(model)
}

fn star_label(d: usize, len: &Q, res: usize) -> String {
    let mut s = format!("star:{d}");
    if !len.is_one() || res != 1 {
        s.push(':');
        s.push_str(&q_to_string(len));
    }
    if res != 1 {
        s.push_str(&format!(":{res}"));
    }
    s
}

/// Path graph with `k` edges of length `len`.
pub fn build_path(k: usize, len: &Q, resolution: usize) -> Result<SpaceModel> {
    let edges: Vec<(usize, usize, Q)> = (0..k).map(|i| (i, i + 1, len.clone())).collect();
    build_metric_graph(k + 1, &edges, resolution)
}

/// One concentric square hole of the carpet construction.
#[derive(Debug, Clone)]
pub struct Hole {
    pub cx: Q,
    pub cy: Q,
    pub side: Q,
    /// Construction step (1-based) that produced this hole.
    pub step: usize,
}

impl Hole {
    fn x_range(&self) -> (Q, Q) {
        let half = &self.side / q_int(2);
        (&self.cx - &half, &self.cx + &half)
    }

    fn y_range(&self) -> (Q, Q) {
        let half = &self.side / q_int(2);
        (&self.cy - &half, &self.cy + &half)
    }
}

/// Construction record for a pre-fractal carpet model.
#[derive(Debug, Clone)]
pub struct CarpetGeometry {
    pub level: usize,
    /// Grid resolution per axis: 3^level.
    pub n: usize,
    pub cell_side: Q,
    pub holes: Vec<Hole>,
    /// Row-major map from grid position to surviving cell id.
    pub cell_index: Vec<Option<usize>>,
}

impl CarpetGeometry {
    pub fn cell_at(&self, x: usize, y: usize) -> Option<usize> {
        self.cell_index[y * self.n + x]
    }

    /// Exact area of `[x0, x1] x [0, 1]` minus the holes: the measure of a
    /// vertical strip in the level-`level` pre-carpet.
    pub fn strip_measure(&self, x0: &Q, x1: &Q) -> Q {
        let mut area = (x1 - x0) * Q::one();
        for hole in &self.holes {
            let (hx0, hx1) = hole.x_range();
            let w = overlap(x0, x1, &hx0, &hx1);
            if w > Q::zero() {
                area -= w * &hole.side;
            }
        }
        area
    }
}

fn overlap(a0: &Q, a1: &Q, b0: &Q, b1: &Q) -> Q {
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    if hi > lo {
        hi - lo
    } else {
        Q::zero()
    }
}

/// Level-`level` pre-fractal carpet on the unit square.
///
/// Step `i` (1-based) removes, from each surviving square of side `3^-(i-1)`,
/// a concentric open square hole of side `a[i-1]` centered on the square's
/// central ninth; the eight peripheral ninths recurse, the central ninth does
/// not. The admissible range `0 <= a_i <= 3^-i` (nonincreasing) spans the
/// degenerate endpoints: `a_i = 0` removes nothing and reproduces the plain
/// grid measure, `a_i = 3^-i` removes whole ninths and gives the classical
/// carpet. Cells are the scale-`3^-level` grid squares that retain positive
/// area; their measure is the exact area under the holes, and shared edges
/// carry the grid formula `h = side * mean(density)`.
pub fn build_sierpinski_carpet(a: &[Q], level: usize) -> Result<(SpaceModel, CarpetGeometry)> {
    if level == 0 {
        return Err(Error::BadCarpetSequence("level must be at least 1".into()));
    }
    if a.len() < level {
        return Err(Error::BadCarpetSequence(format!(
            "need {level} hole sides, got {}",
            a.len()
        )));
    }
    for i in 1..=level {
        let ai = &a[i - 1];
        if *ai < Q::zero() || *ai > pow3_inv(i as u32) {
            return Err(Error::BadCarpetSequence(format!(
                "a_{i} = {} outside [0, 3^-{i}]",
                q_to_string(ai)
            )));
        }
        if i >= 2 && a[i - 1] > a[i - 2] {
            return Err(Error::BadCarpetSequence(
                "hole sides must be nonincreasing".into(),
            ));
        }
    }

    // Combinatorial pass: surviving squares per step, recorded holes.
    let mut survivors: Vec<(usize, usize)> = vec![(0, 0)];
    let mut holes: Vec<Hole> = Vec::new();
    for step in 1..=level {
        let parent_side = pow3_inv(step as u32 - 1);
        let half = Q::new(1.into(), 2.into());
        let mut next = Vec::with_capacity(survivors.len() * 8);
        for &(x, y) in &survivors {
            if a[step - 1] > Q::zero() {
                holes.push(Hole {
                    cx: (q_int(x as i64) + &half) * &parent_side,
                    cy: (q_int(y as i64) + &half) * &parent_side,
                    side: a[step - 1].clone(),
                    step,
                });
            }
            for dy in 0..3 {
                for dx in 0..3 {
                    if dx == 1 && dy == 1 {
                        continue;
                    }
                    next.push((3 * x + dx, 3 * y + dy));
                }
            }
        }
        survivors = next;
    }

    let n = 3usize.pow(level as u32);
    let side = pow3_inv(level as u32);
    let cell_area = &side * &side;
    let mut measures: Vec<Q> = vec![cell_area.clone(); n * n];
    for hole in &holes {
        let (hx0, hx1) = hole.x_range();
        let (hy0, hy1) = hole.y_range();
        let lo_x = grid_floor(&hx0, n);
        let hi_x = grid_ceil(&hx1, n);
        let lo_y = grid_floor(&hy0, n);
        let hi_y = grid_ceil(&hy1, n);
        for gy in lo_y..hi_y {
            let y0 = q_int(gy as i64) * &side;
            let y1 = q_int(gy as i64 + 1) * &side;
            let oy = overlap(&y0, &y1, &hy0, &hy1);
            if oy <= Q::zero() {
                continue;
            }
            for gx in lo_x..hi_x {
                let x0 = q_int(gx as i64) * &side;
                let x1 = q_int(gx as i64 + 1) * &side;
                let ox = overlap(&x0, &x1, &hx0, &hx1);
                if ox > Q::zero() {
                    measures[gy * n + gx] -= ox * &oy;
                }
            }
        }
    }

    let mut cell_index: Vec<Option<usize>> = vec![None; n * n];
    let mut cells = Vec::new();
    for gy in 0..n {
        for gx in 0..n {
            let m = &measures[gy * n + gx];
            debug_assert!(*m >= Q::zero());
            if *m > Q::zero() {
                cell_index[gy * n + gx] = Some(cells.len());
                cells.push(Cell::bounded(m.clone()));
            }
        }
    }
    let mut atoms = Vec::new();
    let two_area = &cell_area + &cell_area;
    for gy in 0..n {
        for gx in 0..n {
            let Some(id) = cell_index[gy * n + gx] else {
                continue;
            };
            let mut link = |other: Option<usize>, a: usize| {
                if let Some(b) = other {
                    // h = side * (m_a/side^2 + m_b/side^2) / 2
                    let h = (&cells[a].measure + &cells[b].measure) * &side / &two_area;
                    atoms.push(InterfaceAtom {
                        incident: vec![a, b],
                        h,
                        theta: unit_pair_theta(),
                    });
                }
            };
            if gx + 1 < n {
                link(cell_index[gy * n + gx + 1], id);
            }
            if gy + 1 < n {
                link(cell_index[(gy + 1) * n + gx], id);
            }
        }
    }
    let diameters = Some(vec![side.clone(); cells.len()]);
    let model = SpaceModel::new(
        cells,
        atoms,
        diameters,
        ModelMeta {
            kind: ModelKind::Carpet,
            label: format!("carpet:{level}"),
        },
    )?;
    let geometry = CarpetGeometry {
        level,
        n,
        cell_side: side,
        holes,
        cell_index,
    };
    Ok((model, geometry))
}

fn grid_floor(x: &Q, n: usize) -> usize {
    let scaled = x * q_int(n as i64);
    let f = scaled.floor().to_integer();
    if f < 0.into() {
        0
    } else {
        let f: usize = f.try_into().unwrap_or(n);
        f.min(n)
    }
}

fn grid_ceil(x: &Q, n: usize) -> usize {
    let scaled = x * q_int(n as i64);
    let c = scaled.ceil().to_integer();
    if c < 0.into() {
        0
    } else {
        let c: usize = c.try_into().unwrap_or(n);
        c.min(n)
    }
}

/// Finite window of the horizontal strip of height 1: `columns x rows` cells
/// of side `1/rows`, with one unbounded cell sealing each end. The top and
/// bottom edges are the boundary of the space itself and carry no atoms, so
/// a set spanning the full height splits the complement into two infinite
/// parts.
pub fn build_strip(columns: usize, rows: usize) -> Result<SpaceModel> {
    if columns == 0 || rows == 0 {
        return Err(Error::BadDimensions(format!(
            "strip dimensions must be positive, got {columns}x{rows}"
        )));
    }
    let side = Q::new(1.into(), (rows as i64).into());
    let area = &side * &side;
    let n = columns * rows;
    let mut cells: Vec<Cell> = (0..n).map(|_| Cell::bounded(area.clone())).collect();
    let left = n;
    let right = n + 1;
    cells.push(Cell::unbounded());
    cells.push(Cell::unbounded());
    let mut atoms = Vec::new();
    let mut pair = |a: usize, b: usize| {
        atoms.push(InterfaceAtom {
            incident: vec![a, b],
            h: side.clone(),
            theta: unit_pair_theta(),
        });
    };
    for y in 0..rows {
        for x in 0..columns {
            let id = y * columns + x;
            if x + 1 < columns {
                pair(id, id + 1);
            }
            if y + 1 < rows {
                pair(id, id + columns);
            }
        }
    }
    for y in 0..rows {
        pair(y * columns, left);
        pair(y * columns + columns - 1, right);
    }
    let diameters = Some(vec![side.clone(); cells.len()]);
    SpaceModel::new(
        cells,
        atoms,
        diameters,
        ModelMeta {
            kind: ModelKind::Strip,
            label: format!("strip:{columns}x{rows}"),
        },
    )
}

impl SpaceModel {
    pub(crate) fn relabel(&mut self, label: String) {
        self.meta.label = label;
    }
}

/// Single-ball covering ratio at a junction of `degree` edges: the ball of
/// radius `r` centered on an edge at distance `delta <= r` from the junction
/// covers `r + delta` of its own edge and `r - delta` of each other edge, so
/// the boundary-scale measure estimate is
/// `m(B_r) / 2r = (r + delta + (degree-1)(r - delta)) / 2r`.
///
/// For any degree this is `>= 1` with infimum `1` attained as `delta -> r`,
/// which pins the unit weight carried by junction atoms: the covering scale
/// of a single point is the same on every metric graph.
pub fn covering_ratio(degree: usize, delta: &Q, r: &Q) -> Result<Q> {
    if degree < 2 {
        return Err(Error::InvalidArgument("degree must be at least 2".into()));
    }
    if *r <= Q::zero() || *delta < Q::zero() || delta > r {
        return Err(Error::InvalidArgument(
            "need 0 <= delta <= r with r > 0".into(),
        ));
    }
    let others = q_int(degree as i64 - 1) * (r - delta);
    Ok((r + delta + others) / (q_int(2) * r))
}

/// Parsed builder string; see the CLI grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum BuilderSpec {
    Grid { width: usize, height: usize, side: Q },
    Star { degree: usize, len: Q, resolution: usize },
    Carpet { level: usize, a: Vec<Q> },
    Strip { columns: usize, rows: usize },
    File { path: String },
}

/// Parses the builder mini-grammar:
/// `grid:WxH[:side]`, `star:D[:len[:res]]`, `carpet:level:a0,a1,...`,
/// `strip:LxH`, `file:PATH`.
pub fn parse_builder(s: &str) -> Result<BuilderSpec> {
    let err = || Error::Parse {
        what: "builder string",
        input: s.to_string(),
    };
    let (kind, rest) = s.split_once(':').ok_or_else(err)?;
    match kind {
        "grid" => {
            let mut parts = rest.splitn(2, ':');
            let dims = parts.next().ok_or_else(err)?;
            let (w, h) = parse_dims(dims).ok_or_else(err)?;
            let side = match parts.next() {
                Some(side) => q_parse(side)?,
                None => Q::one(),
            };
            Ok(BuilderSpec::Grid {
                width: w,
                height: h,
                side,
            })
        }
        "star" => {
            let mut parts = rest.split(':');
            let degree: usize = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
            let len = match parts.next() {
                Some(v) => q_parse(v)?,
                None => Q::one(),
            };
            let resolution = match parts.next() {
                Some(v) => v.parse().map_err(|_| err())?,
                None => 1,
            };
            if parts.next().is_some() {
                return Err(err());
            }
            Ok(BuilderSpec::Star {
                degree,
                len,
                resolution,
            })
        }
        "carpet" => {
            let (level, list) = rest.split_once(':').ok_or_else(err)?;
            let level: usize = level.parse().map_err(|_| err())?;
            let a = list
                .split(',')
                .map(q_parse)
                .collect::<Result<Vec<_>>>()?;
            Ok(BuilderSpec::Carpet { level, a })
        }
        "strip" => {
            let (c, r) = parse_dims(rest).ok_or_else(err)?;
            Ok(BuilderSpec::Strip {
                columns: c,
                rows: r,
            })
        }
        "file" => Ok(BuilderSpec::File {
            path: rest.to_string(),
        }),
        _ => Err(err()),
    }
}

fn parse_dims(s: &str) -> Option<(usize, usize)> {
    let (w, h) = s.split_once('x')?;
    Some((w.parse().ok()?, h.parse().ok()?))
}

impl BuilderSpec {
    /// Builds the model (plus carpet geometry when applicable). `File`
    /// variants are handled by [`crate::io::realize`].
    pub fn build(&self) -> Result<(SpaceModel, Option<CarpetGeometry>)> {
        match self {
            BuilderSpec::Grid {
                width,
                height,
                side,
            } => Ok((
                build_grid_weighted(*width, *height, side, |_, _| 1.0, true)?,
                None,
            )),
            BuilderSpec::Star {
                degree,
                len,
                resolution,
            } => Ok((build_star(*degree, len, *resolution)?, None)),
            BuilderSpec::Carpet { level, a } => {
                let (model, geo) = build_sierpinski_carpet(a, *level)?;
                Ok((model, Some(geo)))
            }
            BuilderSpec::Strip { columns, rows } => Ok((build_strip(*columns, *rows)?, None)),
            BuilderSpec::File { .. } => Err(Error::InvalidArgument(
                "file-backed models are realized by the io module".into(),
            )),
        }
    }
}
