//! Model files, builder realization, and the literal grammar shared with
//! the command line.
//!
//! A model file is a JSON object in one of two shapes. The builder form
//! delegates to the mini-grammar of [`parse_builder`]:
//!
//! ```json
//! { "builder": "grid:4x4" }
//! ```
//!
//! The explicit form spells out the complex; rationals are strings (`"1"`,
//! `"-3/4"`, and plain decimals like `"0.25"` are accepted on input):
//!
//! ```json
//! {
//!   "label": "two rooms",
//!   "cells": [
//!     { "id": 0, "measure": "1" },
//!     { "id": 1, "measure": "2" },
//!     { "id": 2, "unbounded": true }
//!   ],
//!   "atoms": [
//!     { "incident": [0, 1], "h": "1", "theta": ["0", "1", "0"] },
//!     { "incident": [1, 2], "h": "3", "theta": ["0", "1", "0"] }
//!   ]
//! }
//! ```
//!
//! An optional `"diameters"` array of per-cell rationals carries the
//! geometry hints used by ball construction. [`save_model`] always writes
//! the explicit form in canonical order — cells ascending by id, atoms
//! ordered by their sorted incidence lists — so `save -> load -> save`
//! reproduces the file byte for byte.
//!
//! Two small literal grammars ride along for command-line arguments: cell
//! sets are comma-separated ids (`"0,3,7"`, empty string for the empty
//! set), functions are JSON maps from cell id to value
//! (`{"0": "1/2", "3": "-2"}`). An argument starting with `@` names a file
//! holding the literal. Both print back in ascending-id order.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_traits::Zero;
use serde_json::Value;

use crate::error::Error;
use crate::exact::{q_parse, q_to_string, Q};
use crate::function::BVFunction;
use crate::model::builders::{parse_builder, BuilderSpec, CarpetGeometry};
use crate::model::{Cell, InterfaceAtom, ModelKind, ModelMeta, SpaceModel};
use crate::set::CellSet;
use crate::Result;

/// A model ready for use, with the construction record of carpet builders
/// when one exists.
#[derive(Debug)]
pub struct RealizedModel {
    pub model: Arc<SpaceModel>,
    pub geometry: Option<CarpetGeometry>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

/// Realize a builder string: `grid:WxH[:side]`, `star:D[:len[:res]]`,
/// `carpet:level:a0,a1,...`, `strip:LxH`, or `file:PATH` for a model file.
pub fn realize(spec: &str) -> Result<RealizedModel> {
    match parse_builder(spec)? {
        BuilderSpec::File { path } => load_model(Path::new(&path)),
        other => {
            let (model, geometry) = other.build()?;
            Ok(RealizedModel {
                model: Arc::new(model),
                geometry,
            })
        }
    }
}

/// Load a model file in either the builder or the explicit form.
pub fn load_model(path: &Path) -> Result<RealizedModel> {
    let text = fs::read_to_string(path)?;
    parse_model_text(&text)
}

/// Parse the contents of a model file.
pub fn parse_model_text(text: &str) -> Result<RealizedModel> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| schema(format!("model file is not valid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema("model file must hold a JSON object"))?;

    if let Some(builder) = obj.get("builder") {
        if let Some(extra) = obj.keys().find(|k| *k != "builder") {
            return Err(schema(format!(
                "unexpected key {extra:?} next to \"builder\""
            )));
        }
        let s = builder
            .as_str()
            .ok_or_else(|| schema("\"builder\" must be a string"))?;
        let spec = parse_builder(s)?;
        if matches!(spec, BuilderSpec::File { .. }) {
            return Err(schema("model files may not chain to other model files"));
        }
        let (model, geometry) = spec.build()?;
        return Ok(RealizedModel {
            model: Arc::new(model),
            geometry,
        });
    }

    for key in obj.keys() {
        if !matches!(key.as_str(), "label" | "cells" | "atoms" | "diameters") {
            return Err(schema(format!("unexpected key {key:?}")));
        }
    }
    let label = match obj.get("label") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| schema("\"label\" must be a string"))?
            .to_string(),
        None => "file".to_string(),
    };

    let cells_json = obj
        .get("cells")
        .ok_or_else(|| schema("missing \"cells\""))?
        .as_array()
        .ok_or_else(|| schema("\"cells\" must be an array"))?;
    let mut cells: Vec<Option<Cell>> = vec![None; cells_json.len()];
    for cv in cells_json {
        let c = cv
            .as_object()
            .ok_or_else(|| schema("each cell must be an object"))?;
        for key in c.keys() {
            if !matches!(key.as_str(), "id" | "measure" | "unbounded") {
                return Err(schema(format!("unexpected cell key {key:?}")));
            }
        }
        let id = c
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| schema("cell \"id\" must be a nonnegative integer"))? as usize;
        if id >= cells.len() {
            return Err(schema(format!(
                "cell id {id} out of range: ids must cover 0..{}",
                cells.len()
            )));
        }
        if cells[id].is_some() {
            return Err(schema(format!("duplicate cell id {id}")));
        }
        let unbounded = match c.get("unbounded") {
            Some(v) => v
                .as_bool()
                .ok_or_else(|| schema("\"unbounded\" must be a boolean"))?,
            None => false,
        };
        let cell = if unbounded {
            if c.contains_key("measure") {
                return Err(schema(format!(
                    "cell {id} is unbounded and cannot carry a measure"
                )));
            }
            Cell::unbounded()
        } else {
            let m = c
                .get("measure")
                .ok_or_else(|| schema(format!("cell {id} is missing \"measure\"")))?;
            Cell::bounded(rational_field(m, "measure")?)
        };
        cells[id] = Some(cell);
    }
    let cells: Vec<Cell> = cells
        .into_iter()
        .enumerate()
        .map(|(id, c)| c.ok_or_else(|| schema(format!("cell id {id} is missing"))))
        .collect::<Result<_>>()?;

    let atoms_json = obj
        .get("atoms")
        .ok_or_else(|| schema("missing \"atoms\""))?
        .as_array()
        .ok_or_else(|| schema("\"atoms\" must be an array"))?;
    let mut atoms = Vec::with_capacity(atoms_json.len());
    for av in atoms_json {
        let a = av
            .as_object()
            .ok_or_else(|| schema("each atom must be an object"))?;
        for key in a.keys() {
            if !matches!(key.as_str(), "incident" | "h" | "theta") {
                return Err(schema(format!("unexpected atom key {key:?}")));
            }
        }
        let incident = a
            .get("incident")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("atom \"incident\" must be an array"))?
            .iter()
            .map(|v| {
                v.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| schema("incident entries must be cell ids"))
            })
            .collect::<Result<Vec<_>>>()?;
        let h = rational_field(
            a.get("h").ok_or_else(|| schema("atom is missing \"h\""))?,
            "h",
        )?;
        let theta = a
            .get("theta")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("atom \"theta\" must be an array"))?
            .iter()
            .map(|v| rational_field(v, "theta"))
            .collect::<Result<Vec<_>>>()?;
        atoms.push(InterfaceAtom { incident, h, theta });
    }

    let diameters = match obj.get("diameters") {
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| schema("\"diameters\" must be an array"))?;
            if arr.len() != cells.len() {
                return Err(schema(format!(
                    "\"diameters\" has {} entries for {} cells",
                    arr.len(),
                    cells.len()
                )));
            }
            Some(
                arr.iter()
                    .map(|v| rational_field(v, "diameters"))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        None => None,
    };

    let meta = ModelMeta {
        kind: ModelKind::Explicit,
        label,
    };
    let model = SpaceModel::new(cells, atoms, diameters, meta)?;
    Ok(RealizedModel {
        model: Arc::new(model),
        geometry: None,
    })
}

fn rational_field(v: &Value, field: &str) -> Result<Q> {
    let s = v
        .as_str()
        .ok_or_else(|| schema(format!("\"{field}\" entries must be rational strings")))?;
    q_parse(s).map_err(|_| schema(format!("\"{field}\" holds an unparsable rational {s:?}")))
}

/// Serialize a model to the canonical explicit form.
pub fn model_to_string(model: &SpaceModel) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!(
        "  \"label\": {},\n",
        serde_json::to_string(&model.meta().label).expect("strings always serialize")
    ));
    out.push_str("  \"cells\": [\n");
    for id in 0..model.n_cells() {
        let cell = model.cell(id);
        let line = if cell.unbounded {
            format!("    {{ \"id\": {id}, \"unbounded\": true }}")
        } else {
            format!(
                "    {{ \"id\": {id}, \"measure\": \"{}\" }}",
                q_to_string(&cell.measure)
            )
        };
        out.push_str(&line);
        out.push_str(if id + 1 < model.n_cells() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");

    // Canonical atom order: sorted incidence list first, then the stated
    // incidence (it fixes the orientation convention), then the payload.
    let mut order: Vec<usize> = (0..model.n_atoms()).collect();
    order.sort_by(|&x, &y| {
        let (ax, ay) = (model.atom(x), model.atom(y));
        let mut sx = ax.incident.clone();
        let mut sy = ay.incident.clone();
        sx.sort_unstable();
        sy.sort_unstable();
        sx.cmp(&sy)
            .then_with(|| ax.incident.cmp(&ay.incident))
            .then_with(|| ax.h.cmp(&ay.h))
            .then_with(|| ax.theta.cmp(&ay.theta))
    });
    out.push_str("  \"atoms\": [\n");
    for (pos, &aid) in order.iter().enumerate() {
        let atom = model.atom(aid);
        let incident: Vec<String> = atom.incident.iter().map(usize::to_string).collect();
        let theta: Vec<String> = atom
            .theta
            .iter()
            .map(|t| format!("\"{}\"", q_to_string(t)))
            .collect();
        out.push_str(&format!(
            "    {{ \"incident\": [{}], \"h\": \"{}\", \"theta\": [{}] }}",
            incident.join(", "),
            q_to_string(&atom.h),
            theta.join(", ")
        ));
        out.push_str(if pos + 1 < order.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]");

    if model.has_geometry() {
        let diam: Vec<String> = (0..model.n_cells())
            .map(|c| {
                // Unbounded cells carry no meaningful diameter; store zero.
                let d = model
                    .diameter(c)
                    .map(q_to_string)
                    .unwrap_or_else(|| "0".to_string());
                format!("\"{d}\"")
            })
            .collect();
        out.push_str(&format!(",\n  \"diameters\": [{}]", diam.join(", ")));
    }
    out.push_str("\n}\n");
    out
}

/// Write the canonical explicit form to `path`.
pub fn save_model(model: &SpaceModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

fn deref_literal(s: &str) -> Result<String> {
    match s.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path)?),
        None => Ok(s.to_string()),
    }
}

/// Parse a cell-set literal: comma-separated ids, or `@file`.
pub fn parse_cells(model: &Arc<SpaceModel>, s: &str) -> Result<CellSet> {
    let text = deref_literal(s)?;
    let mut ids = Vec::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let id: usize = tok.parse().map_err(|_| Error::Parse {
            what: "cell id",
            input: tok.to_string(),
        })?;
        ids.push(id);
    }
    CellSet::from_cells(model, ids)
}

/// Canonical form of a cell-set literal: ascending ids.
pub fn format_cells(set: &CellSet) -> String {
    let ids: Vec<String> = set.cells().map(|c| c.to_string()).collect();
    ids.join(",")
}

/// Parse a function literal: a JSON map from cell id to rational value
/// (`{"0": "1/2", "3": "-2"}`), or `@file`. Unmentioned cells are zero.
pub fn parse_function(model: &Arc<SpaceModel>, s: &str) -> Result<BVFunction> {
    let text = deref_literal(s)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| schema(format!("function literal is not valid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema("function literal must be a JSON object"))?;
    let mut vals = vec![Q::zero(); model.n_cells()];
    for (key, v) in obj {
        let id: usize = key.trim().parse().map_err(|_| Error::Parse {
            what: "cell id",
            input: key.clone(),
        })?;
        if id >= model.n_cells() {
            return Err(Error::CellOutOfRange(id, model.n_cells()));
        }
        vals[id] = rational_field(v, "value")?;
    }
    BVFunction::from_exact(model, vals)
}

/// Canonical form of a function literal: ascending ids, zeros omitted.
pub fn format_function(f: &BVFunction) -> String {
    let entries: Vec<String> = f
        .exact_values()
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(id, v)| format!("\"{id}\": \"{}\"", q_to_string(v)))
        .collect();
    format!("{{{}}}", entries.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use num_traits::One;

    #[test]
    fn builder_strings_realize() {
        let grid = realize("grid:3x3").unwrap();
        assert_eq!(grid.model.n_cells(), 10);
        assert!(grid.geometry.is_none());
        let carpet = realize("carpet:1:1/3").unwrap();
        assert!(carpet.geometry.is_some());
        assert!(realize("torus:3").is_err());
    }

    #[test]
    fn save_load_save_is_byte_stable() {
        let grid = realize("grid:3x2").unwrap();
        let text = model_to_string(&grid.model);
        let loaded = parse_model_text(&text).unwrap();
        assert_eq!(loaded.model.n_cells(), grid.model.n_cells());
        assert_eq!(loaded.model.n_atoms(), grid.model.n_atoms());
        assert_eq!(model_to_string(&loaded.model), text);

        let star = realize("star:3:1:2").unwrap();
        let text = model_to_string(&star.model);
        let loaded = parse_model_text(&text).unwrap();
        assert_eq!(model_to_string(&loaded.model), text);
    }

    #[test]
    fn explicit_model_preserves_payload() {
        let grid = realize("grid:2x2").unwrap();
        let text = model_to_string(&grid.model);
        let loaded = parse_model_text(&text).unwrap().model;
        // Same perimeter for the same set, atom numbering aside.
        let e = CellSet::from_cells(&grid.model, [0usize, 1]).unwrap();
        let e2 = CellSet::from_cells(&loaded, [0usize, 1]).unwrap();
        assert_eq!(e.perimeter_exact(), e2.perimeter_exact());
        assert_eq!(loaded.meta().label, grid.model.meta().label);
    }

    #[test]
    fn builder_form_loads() {
        let got = parse_model_text("{ \"builder\": \"strip:4x2\" }").unwrap();
        assert_eq!(got.model.n_cells(), 10); // 8 columns cells + 2 ends
        assert!(parse_model_text("{ \"builder\": \"file:x.json\" }").is_err());
        assert!(parse_model_text("{ \"builder\": \"grid:2x2\", \"label\": \"no\" }").is_err());
    }

    #[test]
    fn corrupt_files_are_schema_errors() {
        for text in [
            "not json",
            "[]",
            "{}",
            "{ \"cells\": [] }",
            "{ \"cells\": [{ \"id\": 0, \"measure\": \"1\" }], \"atoms\": [], \"junk\": 1 }",
            "{ \"cells\": [{ \"id\": 1, \"measure\": \"1\" }], \"atoms\": [] }",
            "{ \"cells\": [{ \"id\": 0, \"measure\": \"x\" }], \"atoms\": [] }",
            "{ \"cells\": [{ \"id\": 0, \"measure\": 1 }], \"atoms\": [] }",
            "{ \"cells\": [{ \"id\": 0, \"unbounded\": true, \"measure\": \"1\" }], \"atoms\": [] }",
        ] {
            match parse_model_text(text) {
                Err(Error::Schema(_)) => {}
                other => panic!("expected a schema error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn file_backed_models_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let grid = realize("grid:3x3").unwrap();
        save_model(&grid.model, &path).unwrap();
        let spec = format!("file:{}", path.display());
        let loaded = realize(&spec).unwrap();
        assert_eq!(loaded.model.n_cells(), grid.model.n_cells());
        assert_eq!(
            model_to_string(&loaded.model),
            model_to_string(&grid.model)
        );
    }

    #[test]
    fn cell_literals_round_trip() {
        let grid = realize("grid:3x3").unwrap();
        let set = parse_cells(&grid.model, " 4, 0,8 ").unwrap();
        assert_eq!(set.to_indices(), vec![0, 4, 8]);
        assert_eq!(format_cells(&set), "0,4,8");
        assert!(parse_cells(&grid.model, "").unwrap().is_empty());
        assert!(parse_cells(&grid.model, "4,x").is_err());
        assert!(parse_cells(&grid.model, "99").is_err());
    }

    #[test]
    fn function_literals_round_trip() {
        let grid = realize("grid:3x3").unwrap();
        let f = parse_function(&grid.model, "{\"4\": \"1/2\", \"0\": \"-2\"}").unwrap();
        assert_eq!(*f.value_exact(0), q(-2, 1));
        assert_eq!(*f.value_exact(4), q(1, 2));
        assert_eq!(format_function(&f), "{\"0\": \"-2\", \"4\": \"1/2\"}");
        let again = parse_function(&grid.model, &format_function(&f)).unwrap();
        assert!(again.exact_values().iter().eq(f.exact_values().iter()));
        // The frame cell is unbounded; a function cannot live there.
        assert!(parse_function(&grid.model, "{\"9\": \"1\"}").is_err());
        assert!(parse_function(&grid.model, "{\"0\": 1}").is_err());
    }

    #[test]
    fn literals_read_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.txt");
        fs::write(&path, "1,2,3").unwrap();
        let grid = realize("grid:3x3").unwrap();
        let set = parse_cells(&grid.model, &format!("@{}", path.display())).unwrap();
        assert_eq!(set.n_cells(), 3);
        assert!(set.measure().as_finite().is_some());
        assert!(Q::one() < *set.measure().as_finite().unwrap());
    }
}
