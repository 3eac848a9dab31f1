//! Conformal box meshes on integer lattices.

use crate::builder::ComplexBuilder;
use crate::error::{Error, Result};
use crate::plex::Plex;
use crate::shape::CellShape;

/// Tensor box mesh of `cells[d]` cells per direction with unit spacing.
/// Simplex meshes split each quad into two triangles along the diagonal and
/// each cube into six tetrahedra sharing the main diagonal.
pub fn box_mesh(dim: usize, simplex: bool, cells: &[usize]) -> Result<Plex> {
    if dim == 0 || dim > 3 || cells.len() != dim || cells.contains(&0) {
        return Err(Error::BadDimension(dim));
    }
    match dim {
        1 => {
            let n = cells[0];
            let mut b = ComplexBuilder::new(1);
            for i in 0..n {
                b.add_cell(CellShape::Segment, &[i, i + 1]);
            }
            let coords: Vec<f64> = (0..=n).map(|i| i as f64).collect();
            b.finish(coords)
        }
        2 => {
            let (nx, ny) = (cells[0], cells[1]);
            let vid = |i: usize, j: usize| j * (nx + 1) + i;
            let mut b = ComplexBuilder::new(2);
            for j in 0..ny {
                for i in 0..nx {
                    let q = [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)];
                    if simplex {
                        b.add_cell(CellShape::Triangle, &[q[0], q[1], q[2]]);
                        b.add_cell(CellShape::Triangle, &[q[0], q[2], q[3]]);
                    } else {
                        b.add_cell(CellShape::Quadrilateral, &q);
                    }
                }
            }
            let mut coords = Vec::new();
            for j in 0..=ny {
                for i in 0..=nx {
                    coords.extend([i as f64, j as f64]);
                }
            }
            b.finish(coords)
        }
        3 => {
            let (nx, ny, nz) = (cells[0], cells[1], cells[2]);
            let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
            let mut b = ComplexBuilder::new(3);
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        if simplex {
                            // Kuhn triangulation: six tets around the main
                            // diagonal, consistent across neighboring cubes
                            let perms = [
                                [0usize, 1, 2],
                                [0, 2, 1],
                                [1, 0, 2],
                                [1, 2, 0],
                                [2, 0, 1],
                                [2, 1, 0],
                            ];
                            for perm in perms {
                                let mut corner = [i, j, k];
                                let mut tet = vec![vid(corner[0], corner[1], corner[2])];
                                for &axis in &perm {
                                    corner[axis] += 1;
                                    tet.push(vid(corner[0], corner[1], corner[2]));
                                }
                                if parity(&perm) < 0 {
                                    tet.swap(2, 3);
                                }
                                b.add_cell(CellShape::Tetrahedron, &tet);
                            }
                        } else {
                            b.add_cell(
                                CellShape::Hexahedron,
                                &[
                                    vid(i, j, k),
                                    vid(i + 1, j, k),
                                    vid(i + 1, j + 1, k),
                                    vid(i, j + 1, k),
                                    vid(i, j, k + 1),
                                    vid(i + 1, j, k + 1),
                                    vid(i + 1, j + 1, k + 1),
                                    vid(i, j + 1, k + 1),
                                ],
                            );
                        }
                    }
                }
            }
            let mut coords = Vec::new();
            for k in 0..=nz {
                for j in 0..=ny {
                    for i in 0..=nx {
                        coords.extend([i as f64, j as f64, k as f64]);
                    }
                }
            }
            b.finish(coords)
        }
        _ => Err(Error::BadDimension(dim)),
    }
}

fn parity(perm: &[usize]) -> i32 {
    let mut p = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                p = -p;
            }
        }
    }
    p
}
