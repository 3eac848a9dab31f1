//! Finite element assembly over (possibly non-conformal) plexes: closure
//! restriction, constraint-aware local/global transfer, preallocated sparse
//! matrices and the symmetric-gradient operator used for verification.

use crate::constraints::ConstraintMatrix;
use crate::element::{CellGeometry, ReferenceElement};
use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};
use crate::quadrature::cell_rule;
use crate::section::{GlobalSection, Section};
use nalgebra::DMatrix;
use std::collections::BTreeSet;

/// Relative infinity-norm tolerance for the rigid-body null-space test.
pub const NULL_SPACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertMode {
    Insert,
    Add,
}

fn check_cell(plex: &Plex, cell: PointId) -> Result<()> {
    let (cs, ce) = plex.height_stratum(0)?;
    if cell.0 < cs || cell.0 >= ce {
        return Err(Error::BadCell(cell));
    }
    Ok(())
}

/// Local dof indices of a cell's closure, in canonical closure order.
pub fn cell_closure_dofs(plex: &Plex, section: &Section, cell: PointId) -> Result<Vec<usize>> {
    check_cell(plex, cell)?;
    let mut dofs = Vec::new();
    for (p, _) in plex.closure(cell)? {
        for k in 0..section.dof(p) {
            dofs.push(section.offset(p) + k);
        }
    }
    Ok(dofs)
}

/// Restrict a local vector to a cell: values gathered over the closure in
/// canonical order. The length equals the element dual-space size.
pub fn vec_get_closure(
    plex: &Plex,
    section: &Section,
    local: &[f64],
    cell: PointId,
) -> Result<Vec<f64>> {
    if local.len() != section.size {
        return Err(Error::SizeMismatch {
            expected: section.size,
            found: local.len(),
        });
    }
    Ok(cell_closure_dofs(plex, section, cell)?
        .into_iter()
        .map(|i| local[i])
        .collect())
}

/// Inverse scatter of [`vec_get_closure`].
pub fn vec_set_closure(
    plex: &Plex,
    section: &Section,
    local: &mut [f64],
    cell: PointId,
    values: &[f64],
    mode: InsertMode,
) -> Result<()> {
    if local.len() != section.size {
        return Err(Error::SizeMismatch {
            expected: section.size,
            found: local.len(),
        });
    }
    let dofs = cell_closure_dofs(plex, section, cell)?;
    if values.len() != dofs.len() {
        return Err(Error::SizeMismatch {
            expected: dofs.len(),
            found: values.len(),
        });
    }
    for (i, v) in dofs.into_iter().zip(values) {
        match mode {
            InsertMode::Insert => local[i] = *v,
            InsertMode::Add => local[i] += *v,
        }
    }
    Ok(())
}

/// Local form of a global vector: the constraint matrix broadcasts global
/// dofs to all local dofs, filling constrained ones by interpolation.
pub fn global_to_local(constraints: &ConstraintMatrix, global: &[f64]) -> Result<Vec<f64>> {
    constraints.apply(global)
}

/// Accumulate local contributions into a global vector through the
/// transposed constraints.
pub fn local_to_global_add(
    constraints: &ConstraintMatrix,
    local: &[f64],
    global: &mut [f64],
) -> Result<()> {
    constraints.apply_transpose(local, global, true)
}

/// Square sparse matrix over global dofs with a fixed sparsity pattern.
#[derive(Debug, Clone)]
pub struct SystemMatrix {
    n: usize,
    cols: Vec<Vec<usize>>,
    vals: Vec<Vec<f64>>,
    symmetric_structure: bool,
}

impl SystemMatrix {
    pub fn with_pattern(n: usize, mut pattern: Vec<Vec<usize>>) -> SystemMatrix {
        for row in &mut pattern {
            row.sort_unstable();
            row.dedup();
        }
        let symmetric_structure = pattern.iter().enumerate().all(|(r, row)| {
            row.iter()
                .all(|&c| pattern[c].binary_search(&r).is_ok())
        });
        let vals = pattern.iter().map(|r| vec![0.0; r.len()]).collect();
        SystemMatrix {
            n,
            cols: pattern,
            vals,
            symmetric_structure,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Whether the sparsity pattern is structurally symmetric (the values
    /// need not be).
    pub fn symmetric_structure(&self) -> bool {
        self.symmetric_structure
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|r| r.len()).sum()
    }

    pub fn pattern_row(&self, r: usize) -> &[usize] {
        &self.cols[r]
    }

    pub fn add_entry(&mut self, r: usize, c: usize, v: f64) -> Result<()> {
        let row = &self.cols[r];
        match row.binary_search(&c) {
            Ok(k) => {
                self.vals[r][k] += v;
                Ok(())
            }
            Err(_) => Err(Error::SparsityViolation { row: r, col: c }),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match self.cols[r].binary_search(&c) {
            Ok(k) => self.vals[r][k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                self.cols[r]
                    .iter()
                    .zip(&self.vals[r])
                    .map(|(&c, &v)| v * x[c])
                    .sum()
            })
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.vals
            .iter()
            .map(|r| r.iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (k, &c) in self.cols[r].iter().enumerate() {
                m[(r, c)] = self.vals[r][k];
            }
        }
        m
    }
}

/// Constraint-expanded global columns touched by a cell's closure dofs.
fn cell_global_columns(
    plex: &Plex,
    section: &Section,
    constraints: &ConstraintMatrix,
    cell: PointId,
) -> Result<Vec<usize>> {
    let mut set = BTreeSet::new();
    for i in cell_closure_dofs(plex, section, cell)? {
        for &(c, _) in constraints.row(i) {
            set.insert(c);
        }
    }
    Ok(set.into_iter().collect())
}

/// Preallocate the global matrix: the sparsity couples all global dofs that
/// share a cell once constrained dofs are replaced by their anchors.
pub fn create_matrix(
    plex: &Plex,
    section: &Section,
    gsection: &GlobalSection,
    constraints: &ConstraintMatrix,
) -> Result<SystemMatrix> {
    let n = gsection.size;
    let mut pattern: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let (cs, ce) = plex.height_stratum(0)?;
    for cell in cs..ce {
        let cols = cell_global_columns(plex, section, constraints, PointId(cell))?;
        for &r in &cols {
            pattern[r].extend(cols.iter().copied());
        }
    }
    Ok(SystemMatrix::with_pattern(
        n,
        pattern
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
    ))
}

/// Insert an element matrix, transformed by the constraints, into the global
/// matrix: `A += C_cell^T A_e C_cell` where `C_cell` collects the constraint
/// rows of the cell's closure dofs.
pub fn mat_set_closure(
    plex: &Plex,
    section: &Section,
    constraints: &ConstraintMatrix,
    matrix: &mut SystemMatrix,
    cell: PointId,
    element_matrix: &DMatrix<f64>,
) -> Result<()> {
    let dofs = cell_closure_dofs(plex, section, cell)?;
    let n = dofs.len();
    if element_matrix.nrows() != n || element_matrix.ncols() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: element_matrix.nrows(),
        });
    }
    for (i, &li) in dofs.iter().enumerate() {
        for (j, &lj) in dofs.iter().enumerate() {
            let a = element_matrix[(i, j)];
            if a == 0.0 {
                continue;
            }
            for &(gi, ci) in constraints.row(li) {
                for &(gj, cj) in constraints.row(lj) {
                    matrix.add_entry(gi, gj, ci * a * cj)?;
                }
            }
        }
    }
    Ok(())
}

/// Vertex coordinates of a cell in closure order.
pub fn cell_vertex_coords(plex: &Plex, cell: PointId) -> Result<Vec<Vec<f64>>> {
    plex.closure_vertices(cell)?
        .iter()
        .map(|&v| plex.vertex_coords(v).map(|c| c.to_vec()))
        .collect()
}

/// Element stiffness matrix of the symmetric-gradient operator
/// `(u, v) -> ∫ ½(∇u + ∇uᵀ) : ½(∇v + ∇vᵀ) dx` on one cell.
pub fn symmetric_gradient_element_matrix(
    element: &ReferenceElement,
    geom: &CellGeometry,
    cell: PointId,
) -> Result<DMatrix<f64>> {
    let dim = element.shape().dim();
    let comps = element.components();
    if comps != dim {
        return Err(Error::BadField {
            expected: dim,
            found: comps,
        });
    }
    let (qp, qw) = cell_rule(element.shape(), element.degree());
    let tab = element.tabulate(&qp)?;
    let nn = element.num_nodes();
    let ndof = nn * comps;
    let mut el = DMatrix::zeros(ndof, ndof);
    for (q, w) in qw.iter().enumerate() {
        let j = geom.jacobian(&qp[q])?;
        let det = j.determinant();
        if det <= 0.0 {
            return Err(Error::DegenerateCell(cell));
        }
        let jinv_t = j
            .clone()
            .try_inverse()
            .ok_or(Error::DegenerateCell(cell))?
            .transpose();
        // physical gradients of all scalar shape functions
        let mut grads = vec![vec![0.0; dim]; nn];
        for a in 0..nn {
            for r in 0..dim {
                let mut g = 0.0;
                for s in 0..dim {
                    g += jinv_t[(r, s)] * tab.gradients[s][(q, a)];
                }
                grads[a][r] = g;
            }
        }
        let scale = w * det;
        for a in 0..nn {
            for b in 0..nn {
                let dot: f64 = (0..dim).map(|k| grads[a][k] * grads[b][k]).sum();
                for i in 0..dim {
                    for jj in 0..dim {
                        let eps =
                            0.5 * (if i == jj { dot } else { 0.0 } + grads[a][jj] * grads[b][i]);
                        el[(a * comps + i, b * comps + jj)] += scale * eps;
                    }
                }
            }
        }
    }
    Ok(el)
}

/// Assemble the symmetric-gradient operator over the whole mesh.
pub fn assemble_symmetric_gradient(
    plex: &Plex,
    element: &ReferenceElement,
    section: &Section,
    gsection: &GlobalSection,
    constraints: &ConstraintMatrix,
) -> Result<SystemMatrix> {
    let mut matrix = create_matrix(plex, section, gsection, constraints)?;
    let (cs, ce) = plex.height_stratum(0)?;
    for cell in cs..ce {
        let cell = PointId(cell);
        if plex.cone(cell)?.is_empty() {
            continue;
        }
        if plex.point_shape(cell)? != element.shape() {
            return Err(Error::ShapeMismatch);
        }
        let geom = CellGeometry::new(element.shape(), cell_vertex_coords(plex, cell)?)?;
        let el = symmetric_gradient_element_matrix(element, &geom, cell)?;
        mat_set_closure(plex, section, constraints, &mut matrix, cell, &el)?;
    }
    Ok(matrix)
}

/// Rigid-body modes (translations and infinitesimal rotations) evaluated at
/// the unconstrained global nodes: d(d+1)/2 vectors.
pub fn rigid_body_modes(
    plex: &Plex,
    element: &ReferenceElement,
    gsection: &GlobalSection,
) -> Result<Vec<Vec<f64>>> {
    let dim = plex.dim();
    let comps = element.components();
    if comps != dim {
        return Err(Error::BadField {
            expected: dim,
            found: comps,
        });
    }
    let nmodes = dim * (dim + 1) / 2;
    let mut modes = vec![vec![0.0; gsection.size]; nmodes];
    for p in 0..plex.num_points() {
        let p = PointId(p);
        if gsection.is_constrained(p) || gsection.dof[p.0] == 0 {
            continue;
        }
        let nn = gsection.dof[p.0] / comps;
        let x = plex.point_centroid(p)?;
        for s in 0..nn {
            let base = gsection.offset(p) + s * comps;
            for t in 0..dim {
                modes[t][base + t] = 1.0;
            }
            match dim {
                2 => {
                    modes[2][base] = -x[1];
                    modes[2][base + 1] = x[0];
                }
                3 => {
                    // rotations about z, x, y
                    modes[3][base] = -x[1];
                    modes[3][base + 1] = x[0];
                    modes[4][base + 1] = -x[2];
                    modes[4][base + 2] = x[1];
                    modes[5][base] = x[2];
                    modes[5][base + 2] = -x[0];
                }
                _ => {}
            }
        }
    }
    Ok(modes)
}

/// Largest relative residual `‖E·m‖∞ / (‖E‖∞ ‖m‖∞)` over the modes.
pub fn max_mode_residual(matrix: &SystemMatrix, modes: &[Vec<f64>]) -> f64 {
    let norm_e = matrix.inf_norm();
    let mut worst: f64 = 0.0;
    for m in modes {
        let r = matrix.mul_vec(m);
        let rn = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mn = m.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm_e > 0.0 && mn > 0.0 {
            worst = worst.max(rn / (norm_e * mn));
        }
    }
    worst
}

/// True when every mode satisfies `‖E·m‖∞ <= tol ‖E‖∞ ‖m‖∞`.
pub fn null_space_test(matrix: &SystemMatrix, modes: &[Vec<f64>]) -> bool {
    max_mode_residual(matrix, modes) <= NULL_SPACE_TOL
}
