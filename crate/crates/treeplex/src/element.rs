//! Ciarlet reference elements with nodal (Lagrange) dual bases decomposed
//! over the reference complex.
//!
//! Each node is owned by exactly one point of the reference complex and sits
//! at that point's centroid; with the supported degrees (1 and 2) no point
//! owns more than one node, which keeps dual-basis symmetry handling to edge
//! reversal and simple face cases. Shape functions are computed by inverting
//! a generalized Vandermonde matrix over a fixed monomial basis.

use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};
use crate::shape::CellShape;
use nalgebra::DMatrix;

/// A single Lagrange node: reference coordinates plus the reference-complex
/// point owning it.
#[derive(Debug, Clone)]
pub struct ElementNode {
    pub coords: Vec<f64>,
    pub owner: PointId,
    pub owner_depth: usize,
}

/// Values and gradients of all shape functions at a set of points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    /// `values[(i, j)] = psi_j(point_i)`
    pub values: DMatrix<f64>,
    /// one matrix per coordinate direction, same layout as `values`
    pub gradients: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    shape: CellShape,
    degree: usize,
    components: usize,
    nodes: Vec<ElementNode>,
    monomials: Vec<Vec<usize>>,
    /// `coeffs[(m, j)]`: psi_j = sum_m coeffs * monomial_m
    coeffs: DMatrix<f64>,
    ref_plex: Plex,
}

fn monomial_exponents(shape: CellShape, degree: usize) -> Vec<Vec<usize>> {
    let dim = shape.dim();
    let mut out = Vec::new();
    let cap = degree + 1;
    let mut stack = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for partial in &stack {
            for e in 0..cap {
                let mut p: Vec<usize> = partial.clone();
                p.push(e);
                next.push(p);
            }
        }
        stack = next;
    }
    for expo in stack {
        let total: usize = expo.iter().sum();
        let keep = if shape.is_simplex() {
            total <= degree
        } else {
            expo.iter().all(|&e| e <= degree)
        };
        if keep {
            out.push(expo);
        }
    }
    out
}

fn eval_monomial(expo: &[usize], x: &[f64]) -> f64 {
    expo.iter()
        .zip(x)
        .map(|(&e, &xi)| xi.powi(e as i32))
        .product()
}

fn eval_monomial_grad(expo: &[usize], x: &[f64], dir: usize) -> f64 {
    if expo[dir] == 0 {
        return 0.0;
    }
    let mut v = expo[dir] as f64 * x[dir].powi(expo[dir] as i32 - 1);
    for (i, (&e, &xi)) in expo.iter().zip(x).enumerate() {
        if i != dir {
            v *= xi.powi(e as i32);
        }
    }
    v
}

impl ReferenceElement {
    /// Lagrange element of the given degree (1 or 2) and field component
    /// count (1 for scalar fields, the mesh dimension for vector fields).
    pub fn new(shape: CellShape, degree: usize, components: usize) -> Result<ReferenceElement> {
        if degree == 0 || degree > 2 {
            return Err(Error::BadDimension(degree));
        }
        let ref_plex = shape.reference_cell_plex();
        let mut nodes = Vec::new();
        for (p, _) in ref_plex.closure(PointId(0))? {
            let depth = ref_plex.depth(p)?;
            if nodes_per_depth_table(shape, degree, depth) == 1 {
                nodes.push(ElementNode {
                    coords: ref_plex.point_centroid(p)?,
                    owner: p,
                    owner_depth: depth,
                });
            }
        }
        let monomials = monomial_exponents(shape, degree);
        assert_eq!(monomials.len(), nodes.len());
        let n = nodes.len();
        let mut vand = DMatrix::zeros(n, n);
        for (i, node) in nodes.iter().enumerate() {
            for (m, expo) in monomials.iter().enumerate() {
                vand[(i, m)] = eval_monomial(expo, &node.coords);
            }
        }
        let coeffs = vand
            .lu()
            .solve(&DMatrix::identity(n, n))
            .expect("Vandermonde matrix is invertible");
        Ok(ReferenceElement {
            shape,
            degree,
            components,
            nodes,
            monomials,
            coeffs,
            ref_plex,
        })
    }

    pub fn shape(&self) -> CellShape {
        self.shape
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn nodes(&self) -> &[ElementNode] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// The reference complex decomposing the closed reference cell.
    pub fn reference_complex(&self) -> &Plex {
        &self.ref_plex
    }

    /// Nodes owned by a point of the given depth (0 or 1 for the supported
    /// degrees).
    pub fn nodes_per_depth(&self, depth: usize) -> usize {
        nodes_per_depth_table(self.shape, self.degree, depth)
    }

    fn inside_reference_cell(&self, x: &[f64]) -> bool {
        let tol = 1e-12;
        if self.shape.is_simplex() {
            x.iter().all(|&c| c >= -tol) && x.iter().sum::<f64>() <= 1.0 + tol
        } else {
            x.iter().all(|&c| c.abs() <= 1.0 + tol)
        }
    }

    /// Shape-function values and gradients at reference points.
    pub fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        for x in points {
            if x.len() != self.shape.dim() || !self.inside_reference_cell(x) {
                return Err(Error::PointOutsideCell);
            }
        }
        let n = self.nodes.len();
        let np = points.len();
        let dim = self.shape.dim();
        let mut mono_vals = DMatrix::zeros(np, n);
        let mut mono_grads = vec![DMatrix::zeros(np, n); dim];
        for (i, x) in points.iter().enumerate() {
            for (m, expo) in self.monomials.iter().enumerate() {
                mono_vals[(i, m)] = eval_monomial(expo, x);
                for (d, g) in mono_grads.iter_mut().enumerate() {
                    g[(i, m)] = eval_monomial_grad(expo, x, d);
                }
            }
        }
        Ok(Tabulation {
            values: &mono_vals * &self.coeffs,
            gradients: mono_grads.iter().map(|g| g * &self.coeffs).collect(),
        })
    }

    /// Physical node locations on a cell given its vertex coordinates in
    /// closure order; these implement the pushed-forward point-evaluation
    /// functionals.
    pub fn pushforward_functionals(
        &self,
        cell_vertex_coords: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>> {
        let geom = CellGeometry::new(self.shape, cell_vertex_coords.to_vec())?;
        let mut out = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let j = geom.jacobian(&node.coords)?;
            if j.determinant() <= 0.0 {
                return Err(Error::DegenerateCell(PointId(0)));
            }
            out.push(geom.map(&node.coords)?);
        }
        Ok(out)
    }
}

fn nodes_per_depth_table(shape: CellShape, degree: usize, depth: usize) -> usize {
    match degree {
        1 => usize::from(depth == 0),
        2 => {
            if shape.is_simplex() {
                usize::from(depth <= 1)
            } else {
                1
            }
        }
        _ => 0,
    }
}

/// Affine (simplex) or multilinear (hypercube) embedding of a cell, defined
/// by its vertex coordinates in closure order.
#[derive(Debug, Clone)]
pub struct CellGeometry {
    shape: CellShape,
    coords: Vec<Vec<f64>>,
    geo: ReferenceElement,
}

impl CellGeometry {
    pub fn new(shape: CellShape, vertex_coords: Vec<Vec<f64>>) -> Result<CellGeometry> {
        if vertex_coords.len() != shape.num_vertices() {
            return Err(Error::SizeMismatch {
                expected: shape.num_vertices(),
                found: vertex_coords.len(),
            });
        }
        Ok(CellGeometry {
            shape,
            coords: vertex_coords,
            geo: ReferenceElement::new(shape, 1, 1)?,
        })
    }

    pub fn map(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let tab = self.geo.tabulate(&[xi.to_vec()])?;
        let d = self.coords[0].len();
        let mut x = vec![0.0; d];
        for (k, coord) in self.coords.iter().enumerate() {
            for i in 0..d {
                x[i] += tab.values[(0, k)] * coord[i];
            }
        }
        Ok(x)
    }

    pub fn jacobian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        let tab = self.geo.tabulate(&[xi.to_vec()])?;
        let d = self.shape.dim();
        let mut j = DMatrix::zeros(d, d);
        for (k, coord) in self.coords.iter().enumerate() {
            for a in 0..d {
                for b in 0..d {
                    j[(a, b)] += tab.gradients[b][(0, k)] * coord[a];
                }
            }
        }
        Ok(j)
    }

    /// Invert the embedding; exact solve for affine cells, Newton iteration
    /// for multilinear ones.
    pub fn inverse_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.shape.dim();
        if self.shape.is_simplex() {
            let origin = self.map(&vec![0.0; d])?;
            let j = self.jacobian(&vec![0.0; d])?;
            let rhs = nalgebra::DVector::from_iterator(d, (0..d).map(|i| x[i] - origin[i]));
            let xi = j
                .lu()
                .solve(&rhs)
                .ok_or(Error::DegenerateCell(PointId(0)))?;
            Ok(xi.iter().copied().collect())
        } else {
            let mut xi = vec![0.0; d];
            for _ in 0..60 {
                let fx = self.map(&xi)?;
                let res: Vec<f64> = (0..d).map(|i| fx[i] - x[i]).collect();
                if res.iter().map(|r| r.abs()).fold(0.0, f64::max) < 1e-14 {
                    break;
                }
                let j = self.jacobian(&xi)?;
                let delta = j
                    .lu()
                    .solve(&nalgebra::DVector::from_column_slice(&res))
                    .ok_or(Error::DegenerateCell(PointId(0)))?;
                for i in 0..d {
                    xi[i] -= delta[i];
                    xi[i] = xi[i].clamp(-1.0 - 1e-9, 1.0 + 1e-9);
                }
            }
            Ok(xi)
        }
    }
}
