//! Text serialization: the `plexdag` DAG format and legacy ASCII VTK export.

use crate::error::{Error, Result};
use crate::plex::{Orientation, Plex, PointId};
use crate::shape::CellShape;
use crate::tree::TreeEntry;
use std::fmt::Write as _;

/// Format a coordinate with 17 significant digits (lossless f64 round trip).
fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Serialize a plex (and its overlay, if any) to the `plexdag 1` text format.
pub fn write_dag(plex: &Plex) -> String {
    let mut s = String::new();
    writeln!(s, "plexdag 1").unwrap();
    writeln!(s, "dim {}", plex.dim()).unwrap();
    let counts: Vec<String> = plex
        .strata()
        .iter()
        .map(|&(a, b)| (b - a).to_string())
        .collect();
    writeln!(s, "counts {}", counts.join(" ")).unwrap();
    writeln!(s, "cones").unwrap();
    for p in 0..plex.num_points() {
        let cone = plex.cone(PointId(p)).unwrap();
        let mut line = cone.len().to_string();
        for &(q, _) in cone {
            line.push(' ');
            line.push_str(&q.0.to_string());
        }
        for &(_, o) in cone {
            line.push(' ');
            line.push_str(&o.0.to_string());
        }
        writeln!(s, "{line}").unwrap();
    }
    writeln!(s, "coordinates").unwrap();
    let (vs, ve) = plex.depth_stratum(0).unwrap();
    for v in vs..ve {
        let x = plex.vertex_coords(PointId(v)).unwrap();
        let line: Vec<String> = x.iter().map(|&c| fmt_f64(c)).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    if let Some(tree) = plex.tree() {
        let entries = tree.entries();
        if !entries.is_empty() {
            let name = plex
                .reference_tree()
                .map(|rt| rt.name().to_string())
                .unwrap_or_else(|| "custom".to_string());
            writeln!(s, "tree {} {}", name, entries.len()).unwrap();
            for e in entries {
                writeln!(s, "{} {} {}", e.point.0, e.parent.0, e.child_id.0).unwrap();
            }
        }
    }
    writeln!(s, "end").unwrap();
    s
}

struct LineParser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> LineParser<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.lines.by_ref() {
            let t = line.trim();
            if !t.is_empty() {
                return Ok((i + 1, t));
            }
        }
        Err(Error::ParseError {
            line: 0,
            msg: "unexpected end of file".into(),
        })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        msg: msg.into(),
    }
}

/// Parse the `plexdag 1` format. Returns the plex and the overlay entries
/// together with the reference-tree name; the caller decides how to resolve
/// the name and attach the tree.
pub fn read_dag(text: &str) -> Result<(Plex, Vec<TreeEntry>)> {
    let (plex, entries, _) = read_dag_named(text)?;
    Ok((plex, entries))
}

/// Like [`read_dag`] but also returning the reference-tree name from the
/// tree block (empty when the mesh is conformal).
pub fn read_dag_named(text: &str) -> Result<(Plex, Vec<TreeEntry>, String)> {
    let mut p = LineParser {
        lines: text.lines().enumerate(),
    };
    let (ln, header) = p.next()?;
    if header != "plexdag 1" {
        return Err(Error::VersionMismatch(header.to_string()));
    }
    let (ln2, dim_line) = p.next()?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| parse_err(ln2, "expected 'dim <d>'"))?;
    let (ln3, counts_line) = p.next()?;
    let counts: Vec<usize> = counts_line
        .strip_prefix("counts ")
        .ok_or_else(|| parse_err(ln3, "expected 'counts ...'"))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln3, "bad count")))
        .collect::<Result<_>>()?;
    if counts.len() != dim + 1 {
        return Err(parse_err(ln3, "counts do not match the dimension"));
    }
    let num_points: usize = counts.iter().sum();
    let (ln4, cones_hdr) = p.next()?;
    if cones_hdr != "cones" {
        return Err(parse_err(ln4, "expected 'cones'"));
    }
    let mut cones = Vec::with_capacity(num_points);
    for _ in 0..num_points {
        let (ln, line) = p.next()?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let size: usize = toks
            .first()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "bad cone size"))?;
        if toks.len() != 1 + 2 * size {
            return Err(parse_err(ln, "cone line has wrong token count"));
        }
        let mut cone = Vec::with_capacity(size);
        for k in 0..size {
            let target: usize = toks[1 + k]
                .parse()
                .map_err(|_| parse_err(ln, "bad cone index"))?;
            let orient: i32 = toks[1 + size + k]
                .parse()
                .map_err(|_| parse_err(ln, "bad orientation"))?;
            if target >= num_points {
                return Err(parse_err(ln, format!("cone index {target} out of chart")));
            }
            cone.push((PointId(target), Orientation(orient)));
        }
        cones.push(cone);
    }
    let (ln5, coords_hdr) = p.next()?;
    if coords_hdr != "coordinates" {
        return Err(parse_err(ln5, "expected 'coordinates'"));
    }
    let num_vertices = *counts.last().unwrap();
    let mut coords = Vec::with_capacity(num_vertices * dim);
    for _ in 0..num_vertices {
        let (ln, line) = p.next()?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(ln, "bad coordinate"))
            })
            .collect::<Result<_>>()?;
        if vals.len() != dim {
            return Err(parse_err(ln, "coordinate line has wrong arity"));
        }
        coords.extend(vals);
    }
    let plex = match Plex::from_dag(&counts, cones, coords) {
        Ok(p) => p,
        Err(e) => {
            return Err(parse_err(ln, format!("invalid DAG: {e}")));
        }
    };

    let mut entries = Vec::new();
    let mut name = String::new();
    let (ln6, tail) = p.next()?;
    if let Some(rest) = tail.strip_prefix("tree ") {
        let toks: Vec<&str> = rest.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(ln6, "expected 'tree <name> <count>'"));
        }
        name = toks[0].to_string();
        let n: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(ln6, "bad tree count"))?;
        for _ in 0..n {
            let (ln, line) = p.next()?;
            let vals: Vec<usize> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| parse_err(ln, "bad tree triplet"))
                })
                .collect::<Result<_>>()?;
            if vals.len() != 3 {
                return Err(parse_err(ln, "tree line must hold three indices"));
            }
            if vals[0] >= num_points || vals[1] >= num_points {
                return Err(parse_err(ln, "tree point out of chart"));
            }
            entries.push(TreeEntry {
                point: PointId(vals[0]),
                parent: PointId(vals[1]),
                child_id: PointId(vals[2]),
            });
        }
        let (ln7, end) = p.next()?;
        if end != "end" {
            return Err(parse_err(ln7, "expected 'end'"));
        }
    } else if tail != "end" {
        return Err(parse_err(ln6, "expected 'tree' or 'end'"));
    }
    Ok((plex, entries, name))
}

/// VTK cell type codes for the supported shapes.
fn vtk_type(shape: CellShape) -> Result<u8> {
    match shape {
        CellShape::Triangle => Ok(5),
        CellShape::Quadrilateral => Ok(9),
        CellShape::Tetrahedron => Ok(10),
        CellShape::Hexahedron => Ok(12),
        CellShape::Segment => Err(Error::UnsupportedShape {
            depth: 1,
            cone_size: 2,
        }),
    }
}

/// Permutation from our closure vertex order to the VTK order. VTK wants a
/// positively oriented tuple (bottom quad counter-clockwise, then top, for
/// hexahedra); our closure order differs for tets and hexes.
fn vtk_permutation(shape: CellShape) -> &'static [usize] {
    match shape {
        CellShape::Triangle => &[0, 1, 2],
        CellShape::Quadrilateral => &[0, 1, 2, 3],
        // closure order is (v1, v2, v3, v0); VTK tuple (v0, v1, v2, v3)
        CellShape::Tetrahedron => &[3, 0, 1, 2],
        // closure order is (v0, v3, v2, v1, v4, v5, v6, v7)
        CellShape::Hexahedron => &[0, 3, 2, 1, 4, 5, 6, 7],
        CellShape::Segment => &[0, 1],
    }
}

/// Legacy ASCII VTK unstructured grid, optionally carrying one nodal scalar
/// field (one value per vertex).
pub fn write_vtk(plex: &Plex, nodal_field: Option<&[f64]>) -> Result<String> {
    let dim = plex.dim();
    if !(2..=3).contains(&dim) {
        return Err(Error::BadDimension(dim));
    }
    let (vs, ve) = plex.depth_stratum(0)?;
    let nv = ve - vs;
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 2.0\n");
    s.push_str("treeplex mesh\n");
    s.push_str("ASCII\n");
    s.push_str("DATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {nv} double").unwrap();
    for v in vs..ve {
        let x = plex.vertex_coords(PointId(v))?;
        let mut full = [0.0f64; 3];
        full[..dim].copy_from_slice(x);
        writeln!(
            s,
            "{} {} {}",
            fmt_f64(full[0]),
            fmt_f64(full[1]),
            fmt_f64(full[2])
        )
        .unwrap();
    }
    let (cs, ce) = plex.height_stratum(0)?;
    let mut conn_lines = Vec::new();
    let mut types = Vec::new();
    let mut total = 0;
    for c in cs..ce {
        let shape = plex.point_shape(PointId(c))?;
        types.push(vtk_type(shape)?);
        let closure_verts = plex.closure_vertices(PointId(c))?;
        let perm = vtk_permutation(shape);
        let ids: Vec<String> = perm
            .iter()
            .map(|&k| (closure_verts[k].0 - vs).to_string())
            .collect();
        conn_lines.push(format!("{} {}", ids.len(), ids.join(" ")));
        total += 1 + ids.len();
    }
    writeln!(s, "CELLS {} {}", ce - cs, total).unwrap();
    for line in conn_lines {
        writeln!(s, "{line}").unwrap();
    }
    writeln!(s, "CELL_TYPES {}", ce - cs).unwrap();
    for t in types {
        writeln!(s, "{t}").unwrap();
    }
    if let Some(field) = nodal_field {
        if field.len() != nv {
            return Err(Error::SizeMismatch {
                expected: nv,
                found: field.len(),
            });
        }
        writeln!(s, "POINT_DATA {nv}").unwrap();
        s.push_str("SCALARS u double 1\n");
        s.push_str("LOOKUP_TABLE default\n");
        for v in field {
            writeln!(s, "{}", fmt_f64(*v)).unwrap();
        }
    }
    Ok(s)
}
