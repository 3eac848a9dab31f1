//! Interpolated-complex builder: derives faces, edges and orientations from
//! cell vertex tuples and produces a [`Plex`].
//!
//! Facet identity is by vertex set; the first cell that references a facet
//! fixes its canonical vertex order, later cells store the orientation code
//! relating the canonical order to their own traversal. Chart numbering is
//! cells, then faces (3D), then edges, then vertices, each in first-encounter
//! order; vertex ids are kept as given.

use crate::error::{Error, Result};
use crate::plex::{Orientation, Plex, PointId};
use crate::shape::CellShape;
use std::collections::HashMap;

struct CellSpec {
    vertices: Vec<usize>,
}

pub struct ComplexBuilder {
    dim: usize,
    cells: Vec<CellSpec>,
}

/// Find the orientation code that maps `canonical` onto `desired`.
fn orientation_between(canonical: &[usize], desired: &[usize]) -> Option<Orientation> {
    let m = canonical.len();
    for code in -(m as i32)..(m as i32) {
        let o = Orientation(code);
        if (0..m).all(|k| canonical[o.apply(m, k)] == desired[k]) {
            return Some(o.canonical(m));
        }
    }
    None
}

impl ComplexBuilder {
    pub fn new(dim: usize) -> ComplexBuilder {
        ComplexBuilder {
            dim,
            cells: Vec::new(),
        }
    }

    /// Add a cell by its vertex ids (counter-clockwise in 2D, positive
    /// orientation in 3D).
    pub fn add_cell(&mut self, shape: CellShape, vertices: &[usize]) {
        assert!(shape.matches_dim(self.dim), "cell shape/dimension mismatch");
        assert_eq!(vertices.len(), shape.num_vertices());
        self.cells.push(CellSpec {
            vertices: vertices.to_vec(),
        });
    }

    /// Add a polygon with an arbitrary vertex count; shape validation is
    /// deferred to `finish`.
    pub fn add_cell_unchecked(&mut self, n: usize, vertices: &[usize]) {
        assert_eq!(vertices.len(), n);
        self.cells.push(CellSpec {
            vertices: vertices.to_vec(),
        });
    }

    /// Derive all intermediate strata and build the plex. `coords` holds
    /// `dim` entries per vertex, indexed by the vertex ids used in the cells.
    pub fn finish(self, coords: Vec<f64>) -> Result<Plex> {
        let dim = self.dim;
        assert!((1..=3).contains(&dim));
        let num_vertices = coords.len() / dim;
        for c in &self.cells {
            for &v in &c.vertices {
                if v >= num_vertices {
                    return Err(Error::DanglingPoint { index: v });
                }
            }
        }
        let num_cells = self.cells.len();
        match dim {
            1 => {
                let counts = [num_cells, num_vertices];
                let mut cones: Vec<Vec<(PointId, Orientation)>> = Vec::new();
                for c in &self.cells {
                    cones.push(
                        c.vertices
                            .iter()
                            .map(|&v| (PointId(num_cells + v), Orientation(0)))
                            .collect(),
                    );
                }
                cones.extend(std::iter::repeat_n(Vec::new(), num_vertices));
                Plex::from_dag(&counts, cones, coords)
            }
            2 => {
                // edges from consecutive vertex pairs of each polygon
                let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
                let mut edge_dirs: Vec<(usize, usize)> = Vec::new();
                let mut cell_cones: Vec<Vec<(usize, Orientation)>> = Vec::new();
                for c in &self.cells {
                    let n = c.vertices.len();
                    let mut cone = Vec::with_capacity(n);
                    for k in 0..n {
                        let a = c.vertices[k];
                        let b = c.vertices[(k + 1) % n];
                        let key = (a.min(b), a.max(b));
                        let id = *edge_ids.entry(key).or_insert_with(|| {
                            edge_dirs.push((a, b));
                            edge_dirs.len() - 1
                        });
                        let o = if edge_dirs[id] == (a, b) {
                            Orientation(0)
                        } else {
                            Orientation(-2)
                        };
                        cone.push((id, o));
                    }
                    cell_cones.push(cone);
                }
                let num_edges = edge_dirs.len();
                let counts = [num_cells, num_edges, num_vertices];
                let e_off = num_cells;
                let v_off = num_cells + num_edges;
                let mut cones: Vec<Vec<(PointId, Orientation)>> = Vec::new();
                for cone in cell_cones {
                    cones.push(
                        cone.into_iter()
                            .map(|(e, o)| (PointId(e_off + e), o))
                            .collect(),
                    );
                }
                for &(a, b) in &edge_dirs {
                    cones.push(vec![
                        (PointId(v_off + a), Orientation(0)),
                        (PointId(v_off + b), Orientation(0)),
                    ]);
                }
                cones.extend(std::iter::repeat_n(Vec::new(), num_vertices));
                Plex::from_dag(&counts, cones, coords)
            }
            3 => {
                let mut face_ids: HashMap<Vec<usize>, usize> = HashMap::new();
                let mut face_tuples: Vec<Vec<usize>> = Vec::new();
                let mut cell_cones: Vec<Vec<(usize, Orientation)>> = Vec::new();
                for c in &self.cells {
                    let shape = match c.vertices.len() {
                        4 => CellShape::Tetrahedron,
                        8 => CellShape::Hexahedron,
                        n => {
                            return Err(Error::UnsupportedShape {
                                depth: 3,
                                cone_size: n,
                            })
                        }
                    };
                    let mut cone = Vec::new();
                    for local in shape.face_tuples() {
                        let desired: Vec<usize> = local.iter().map(|&i| c.vertices[i]).collect();
                        let mut key = desired.clone();
                        key.sort_unstable();
                        let id = *face_ids.entry(key).or_insert_with(|| {
                            face_tuples.push(desired.clone());
                            face_tuples.len() - 1
                        });
                        let o = orientation_between(&face_tuples[id], &desired)
                            .expect("shared face with a different vertex set");
                        cone.push((id, o));
                    }
                    cell_cones.push(cone);
                }
                // edges from each face's canonical traversal
                let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
                let mut edge_dirs: Vec<(usize, usize)> = Vec::new();
                let mut face_cones: Vec<Vec<(usize, Orientation)>> = Vec::new();
                for tuple in &face_tuples {
                    let n = tuple.len();
                    let mut cone = Vec::with_capacity(n);
                    for k in 0..n {
                        let a = tuple[k];
                        let b = tuple[(k + 1) % n];
                        let key = (a.min(b), a.max(b));
                        let id = *edge_ids.entry(key).or_insert_with(|| {
                            edge_dirs.push((a, b));
                            edge_dirs.len() - 1
                        });
                        let o = if edge_dirs[id] == (a, b) {
                            Orientation(0)
                        } else {
                            Orientation(-2)
                        };
                        cone.push((id, o));
                    }
                    face_cones.push(cone);
                }
                let num_faces = face_tuples.len();
                let num_edges = edge_dirs.len();
                let counts = [num_cells, num_faces, num_edges, num_vertices];
                let f_off = num_cells;
                let e_off = num_cells + num_faces;
                let v_off = e_off + num_edges;
                let mut cones: Vec<Vec<(PointId, Orientation)>> = Vec::new();
                for cone in cell_cones {
                    cones.push(
                        cone.into_iter()
                            .map(|(f, o)| (PointId(f_off + f), o))
                            .collect(),
                    );
                }
                for cone in face_cones {
                    cones.push(
                        cone.into_iter()
                            .map(|(e, o)| (PointId(e_off + e), o))
                            .collect(),
                    );
                }
                for &(a, b) in &edge_dirs {
                    cones.push(vec![
                        (PointId(v_off + a), Orientation(0)),
                        (PointId(v_off + b), Orientation(0)),
                    ]);
                }
                cones.extend(std::iter::repeat_n(Vec::new(), num_vertices));
                Plex::from_dag(&counts, cones, coords)
            }
            _ => Err(Error::BadDimension(dim)),
        }
    }
}
