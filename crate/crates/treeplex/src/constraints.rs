//! Hanging-node constraint matrices.
//!
//! The union of all element functionals on a non-conformal mesh is linearly
//! dependent; a global basis keeps only the functionals of ancestor-free
//! points. The constraint matrix maps that global basis to the full local
//! functional set: rows of unconstrained dofs are identity rows, rows of
//! constrained dofs interpolate from the dofs of their anchors.
//!
//! Entries are computed in reference space: a constrained point's childID
//! names its analog in the reference tree, the child's nodes are located in
//! the coarse reference frame there, and the coarse element basis is
//! tabulated at those locations. Multi-level chains are resolved by
//! composing constraint rows until every column is ancestor-free.

use crate::element::ReferenceElement;
use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};
use crate::reftree::ReferenceTree;
use crate::section::{GlobalSection, Section};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

/// Coefficients below this threshold are dropped from the sparse structure.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Sparse map from global (unconstrained) dofs to local dofs:
/// `local = C * global`.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl ConstraintMatrix {
    pub fn identity(n: usize) -> ConstraintMatrix {
        ConstraintMatrix {
            nrows: n,
            ncols: n,
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Build from explicit rows; the escape hatch for user-supplied
    /// constraints replacing the computed ones.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> ConstraintMatrix {
        ConstraintMatrix {
            nrows: rows.len(),
            ncols,
            rows,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// Rows that are not a plain unit entry. Constrained dofs whose node
    /// happens to coincide with an anchor node (weight exactly 1) are not
    /// listed here; use the global section's constrained marker for the full
    /// set of interpolation rows.
    pub fn nontrivial_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.len() != 1 || (r[0].1 - 1.0).abs() > DROP_TOLERANCE)
            .map(|(i, _)| i)
            .collect()
    }

    /// `local = C * global`
    pub fn apply(&self, global: &[f64]) -> Result<Vec<f64>> {
        if global.len() != self.ncols {
            return Err(Error::SizeMismatch {
                expected: self.ncols,
                found: global.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(c, w)| w * global[c]).sum())
            .collect())
    }

    /// `global += C^T * local` (or overwrite when `accumulate` is false).
    pub fn apply_transpose(
        &self,
        local: &[f64],
        global: &mut [f64],
        accumulate: bool,
    ) -> Result<()> {
        if local.len() != self.nrows || global.len() != self.ncols {
            return Err(Error::SizeMismatch {
                expected: self.nrows,
                found: local.len(),
            });
        }
        if !accumulate {
            global.fill(0.0);
        }
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                global[c] += w * local[r];
            }
        }
        Ok(())
    }

    /// Coordinate-format debug dump: one `row col value` line per entry.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                writeln!(s, "{} {} {:.16e}", r, c, w).unwrap();
            }
        }
        s
    }
}

/// A block of reference constraint coefficients for one childID: the child's
/// node functionals expanded over the dofs of the closure of its reference
/// parent.
#[derive(Debug, Clone)]
pub struct ReferenceBlock {
    pub child: PointId,
    pub parent: PointId,
    /// columns: (reference point, node index within that point), in closure
    /// order of the parent
    pub col_points: Vec<(PointId, usize)>,
    /// `weights[r][c]`: coefficient of child node `r` against column `c`
    pub weights: Vec<Vec<f64>>,
}

/// Expand each child functional of the reference tree in terms of the coarse
/// element's functionals on the closure of its parent.
pub fn reference_constraints(
    reftree: &ReferenceTree,
    element: &ReferenceElement,
) -> Result<BTreeMap<PointId, ReferenceBlock>> {
    if reftree.shape() != element.shape() {
        return Err(Error::ShapeMismatch);
    }
    let rt = reftree.plex();
    let tree = rt.tree().ok_or(Error::NoReferenceTree)?;

    // element node index per coarse-closure position
    let coarse_closure = rt.closure_points(reftree.coarse_cell())?;
    let mut node_index_at: HashMap<PointId, usize> = HashMap::new();
    let mut next = 0usize;
    for &t in &coarse_closure {
        let depth = rt.depth(t)?;
        if element.nodes_per_depth(depth) == 1 {
            node_index_at.insert(t, next);
            next += 1;
        }
    }
    if next != element.num_nodes() {
        return Err(Error::ShapeMismatch);
    }

    let mut blocks = BTreeMap::new();
    for entry in tree.entries() {
        let child = entry.point;
        let parent = entry.parent;
        let child_nodes = element.nodes_per_depth(rt.depth(child)?);
        let parent_closure = rt.closure_points(parent)?;
        let col_points: Vec<(PointId, usize)> = parent_closure
            .iter()
            .flat_map(|&t| (0..element.nodes_per_depth(rt.depth(t).unwrap())).map(move |s| (t, s)))
            .collect();
        let mut weights = Vec::new();
        for _ in 0..child_nodes {
            let x = rt.point_centroid(child)?;
            let tab = element.tabulate(&[x])?;
            let row: Vec<f64> = col_points
                .iter()
                .map(|&(t, _)| {
                    node_index_at
                        .get(&t)
                        .map(|&j| tab.values[(0, j)])
                        .unwrap_or(0.0)
                })
                .collect();
            weights.push(row);
        }
        blocks.insert(
            child,
            ReferenceBlock {
                child,
                parent,
                col_points,
                weights,
            },
        );
    }
    Ok(blocks)
}

/// One scalar constraint row: entries over (ancestor-free point, node).
type ScalarRow = Vec<(PointId, usize, f64)>;

fn merge_scalar_row(row: &mut ScalarRow) {
    row.sort_by_key(|&(p, s, _)| (p, s));
    let mut out: ScalarRow = Vec::with_capacity(row.len());
    for &(p, s, w) in row.iter() {
        if let Some(last) = out.last_mut() {
            if last.0 == p && last.1 == s {
                last.2 += w;
                continue;
            }
        }
        out.push((p, s, w));
    }
    out.retain(|&(_, _, w)| w.abs() >= DROP_TOLERANCE);
    *row = out;
}

fn resolve_scalar_rows(
    plex: &Plex,
    element: &ReferenceElement,
    blocks: &BTreeMap<PointId, ReferenceBlock>,
    memo: &mut HashMap<PointId, Vec<ScalarRow>>,
    p: PointId,
) -> Result<Vec<ScalarRow>> {
    if let Some(r) = memo.get(&p) {
        return Ok(r.clone());
    }
    let tree = plex.tree().unwrap();
    let (q, cid) = tree.parent(p).ok_or(Error::NotConstrained(p))?;
    let block = blocks.get(&cid).ok_or(Error::InconsistentChildId(p))?;
    let rt = plex.reference_tree().ok_or(Error::NoReferenceTree)?.clone();
    let mesh_closure = plex.closure_points(q)?;
    let ref_closure = rt.plex().closure_points(block.parent)?;
    if mesh_closure.len() != ref_closure.len() {
        return Err(Error::InconsistentChildId(p));
    }
    for (m, r) in mesh_closure.iter().zip(&ref_closure) {
        if plex.depth(*m)? != rt.plex().depth(*r)? {
            return Err(Error::OrientationUnsupported(p));
        }
    }
    // positional map from block columns to mesh points
    let pos_of: HashMap<PointId, usize> = ref_closure
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, i))
        .collect();
    let n_nodes = element.nodes_per_depth(plex.depth(p)?);
    if block.weights.len() != n_nodes {
        return Err(Error::InconsistentChildId(p));
    }
    let mut rows: Vec<ScalarRow> = Vec::with_capacity(n_nodes);
    for r in 0..n_nodes {
        let mut row: ScalarRow = Vec::new();
        for (c, &(t_ref, s)) in block.col_points.iter().enumerate() {
            let w = block.weights[r][c];
            if w.abs() < DROP_TOLERANCE {
                continue;
            }
            let t_mesh = mesh_closure[pos_of[&t_ref]];
            if tree.parent(t_mesh).is_some() {
                let sub = resolve_scalar_rows(plex, element, blocks, memo, t_mesh)?;
                for &(a, sa, wa) in &sub[s] {
                    row.push((a, sa, w * wa));
                }
            } else {
                row.push((t_mesh, s, w));
            }
        }
        merge_scalar_row(&mut row);
        rows.push(row);
    }
    memo.insert(p, rows.clone());
    Ok(rows)
}

/// Assemble the full constraint matrix: identity rows for unconstrained
/// dofs, reference-tree interpolation rows (with multi-level composition)
/// for constrained ones.
pub fn build_constraint_matrix(
    plex: &Plex,
    section: &Section,
    gsection: &GlobalSection,
    element: &ReferenceElement,
) -> Result<ConstraintMatrix> {
    let comps = element.components();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); section.size];

    let tree = plex.tree();
    let conformal = tree.is_none_or(|t| t.is_empty());
    if conformal {
        return Ok(ConstraintMatrix::identity(section.size));
    }
    let reftree = plex.reference_tree().ok_or(Error::NoReferenceTree)?;
    let blocks = reference_constraints(reftree, element)?;
    let mut memo: HashMap<PointId, Vec<ScalarRow>> = HashMap::new();

    for p in 0..plex.num_points() {
        let p = PointId(p);
        if section.dof(p) == 0 {
            continue;
        }
        let n_nodes = section.dof(p) / comps;
        if !gsection.is_constrained(p) {
            for s in 0..n_nodes {
                for c in 0..comps {
                    let local = section.offset(p) + s * comps + c;
                    let global = gsection.offset(p) + s * comps + c;
                    rows[local] = vec![(global, 1.0)];
                }
            }
        } else {
            let scalar = resolve_scalar_rows(plex, element, &blocks, &mut memo, p)?;
            for (s, srow) in scalar.iter().enumerate() {
                for c in 0..comps {
                    let local = section.offset(p) + s * comps + c;
                    let mut row: Vec<(usize, f64)> = srow
                        .iter()
                        .map(|&(t, st, w)| (gsection.offset(t) + st * comps + c, w))
                        .collect();
                    row.sort_by_key(|&(col, _)| col);
                    rows[local] = row;
                }
            }
        }
    }
    Ok(ConstraintMatrix::from_rows(gsection.size, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::ReferenceElement;
    use crate::samples;
    use crate::section::{GlobalSection, Section};
    use crate::shape::CellShape;

    fn fig5_setup(degree: usize) -> (Plex, Section, GlobalSection, ConstraintMatrix) {
        let plex = samples::three_triangle_nonconformal();
        let elem = ReferenceElement::new(CellShape::Triangle, degree, 1).unwrap();
        let section = Section::from_element(&plex, &elem).unwrap();
        let gsection = GlobalSection::new(&plex, &section);
        let c = build_constraint_matrix(&plex, &section, &gsection, &elem).unwrap();
        (plex, section, gsection, c)
    }

    #[test]
    fn p1_reference_block_for_midpoint_vertex() {
        let rt = samples::green_reference_tree();
        let elem = ReferenceElement::new(CellShape::Triangle, 1, 1).unwrap();
        let blocks = reference_constraints(&rt, &elem).unwrap();
        // the hanging reference vertex is point 12 with parent edge 4
        let b = &blocks[&PointId(12)];
        assert_eq!(b.parent, PointId(4));
        let nonzero: Vec<f64> = b.weights[0]
            .iter()
            .copied()
            .filter(|w| w.abs() > 1e-14)
            .collect();
        assert_eq!(nonzero.len(), 2);
        for w in nonzero {
            assert!((w - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn p2_reference_block_for_child_edge() {
        let rt = samples::green_reference_tree();
        let elem = ReferenceElement::new(CellShape::Triangle, 2, 1).unwrap();
        let blocks = reference_constraints(&rt, &elem).unwrap();
        // child edge 7 spans the half of edge 4 touching its first vertex
        let b = &blocks[&PointId(7)];
        let mut vals: Vec<f64> = b.weights[0].clone();
        vals.retain(|w| w.abs() > 1e-14);
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // quadratic Lagrange at the quarter point: -1/8, 3/8, 3/4
        assert!((vals[0] + 0.125).abs() < 1e-13);
        assert!((vals[1] - 0.375).abs() < 1e-13);
        assert!((vals[2] - 0.75).abs() < 1e-13);
    }

    #[test]
    fn q1_face_center_block_on_hex_tree() {
        let rt = crate::reftree::ReferenceTree::default_tree(3, false).unwrap();
        let elem = ReferenceElement::new(CellShape::Hexahedron, 1, 1).unwrap();
        let blocks = reference_constraints(&rt, &elem).unwrap();
        let iface = rt.face_interface().unwrap();
        let b = &blocks[&iface.center_vertex.unwrap()];
        assert_eq!(b.parent, iface.parent);
        let nonzero: Vec<f64> = b.weights[0]
            .iter()
            .copied()
            .filter(|w| w.abs() > 1e-14)
            .collect();
        assert_eq!(nonzero.len(), 4);
        for w in nonzero {
            assert!((w - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn fig5_p1_single_nontrivial_row() {
        let (plex, section, gsection, c) = fig5_setup(1);
        assert_eq!(gsection.size, 5);
        assert_eq!(c.nrows(), 6);
        let nontrivial = c.nontrivial_rows();
        assert_eq!(nontrivial.len(), 1);
        let delta_row = section.offset(PointId(14));
        assert_eq!(nontrivial[0], delta_row);
        let row = c.row(delta_row);
        assert_eq!(row.len(), 2);
        for &(col, w) in row {
            assert!((w - 0.5).abs() < 1e-14);
            // columns belong to the endpoints of the interface edge
            let endpoints = [PointId(10), PointId(12)];
            assert!(endpoints.iter().any(|&v| gsection.offset(v) == col));
        }
        // interface edge cone is (v0, v1) = points (12, 10)
        let cone = plex.cone(PointId(5)).unwrap();
        assert_eq!(cone[0].0, PointId(12));
        assert_eq!(cone[1].0, PointId(10));
    }

    #[test]
    fn fig5_conformal_part_is_identity() {
        let plex = samples::two_triangles();
        let elem = ReferenceElement::new(CellShape::Triangle, 1, 1).unwrap();
        let section = Section::from_element(&plex, &elem).unwrap();
        let gsection = GlobalSection::new(&plex, &section);
        let c = build_constraint_matrix(&plex, &section, &gsection, &elem).unwrap();
        assert_eq!(c.nontrivial_rows().len(), 0);
        assert_eq!(c.nrows(), c.ncols());
    }

    #[test]
    fn fig5_p2_rows_match_physical_oracle() {
        let (plex, section, gsection, c) = fig5_setup(2);
        // three constrained dofs: the hanging vertex and both child-edge
        // midpoints
        let constrained: Vec<PointId> = plex.tree().unwrap().constrained_points();
        let rows: Vec<&[(usize, f64)]> = constrained
            .iter()
            .map(|&p| c.row(section.offset(p)))
            .collect();
        assert_eq!(rows.len(), 3);
        // the hanging vertex node coincides with the parent edge's midpoint
        // node, so its row is a single unit entry on that dof
        let delta_row = c.row(section.offset(PointId(14)));
        assert_eq!(delta_row.len(), 1);
        assert_eq!(delta_row[0].0, gsection.offset(PointId(5)));
        assert!((delta_row[0].1 - 1.0).abs() < 1e-14);
        let elem = ReferenceElement::new(CellShape::Triangle, 2, 1).unwrap();
        oracle_check(&plex, &section, &gsection, &elem, &c);
    }

    #[test]
    fn two_level_chain_matches_physical_oracle() {
        let plex = samples::two_level_chain();
        for degree in [1usize, 2] {
            let elem = ReferenceElement::new(CellShape::Triangle, degree, 1).unwrap();
            let section = Section::from_element(&plex, &elem).unwrap();
            let gsection = GlobalSection::new(&plex, &section);
            let c = build_constraint_matrix(&plex, &section, &gsection, &elem).unwrap();
            oracle_check(&plex, &section, &gsection, &elem, &c);
        }
    }

    /// Evaluate every constrained node physically inside the coarse cell
    /// behind the interface and tabulate that cell's basis there.
    fn oracle_check(
        plex: &Plex,
        section: &Section,
        gsection: &GlobalSection,
        elem: &ReferenceElement,
        c: &ConstraintMatrix,
    ) {
        use crate::element::CellGeometry;
        let tree = plex.tree().unwrap();
        for p in tree.constrained_points() {
            if section.dof(p) == 0 {
                continue;
            }
            // walk to the top ancestor-free parent and find the cell whose
            // canonical closure contains it
            let mut top = p;
            while let Some((q, _)) = tree.parent(top) {
                top = q;
            }
            let (cs, ce) = plex.height_stratum(0).unwrap();
            let coarse_cell = (cs..ce)
                .map(PointId)
                .find(|&k| plex.closure_points(k).unwrap().contains(&top))
                .unwrap();
            let verts: Vec<Vec<f64>> = plex
                .closure_vertices(coarse_cell)
                .unwrap()
                .iter()
                .map(|&v| plex.vertex_coords(v).unwrap().to_vec())
                .collect();
            let geom = CellGeometry::new(elem.shape(), verts).unwrap();
            let x = plex.point_centroid(p).unwrap();
            let xi = geom.inverse_map(&x).unwrap();
            let tab = elem.tabulate(&[xi]).unwrap();
            // gather expected coefficients per global column
            let mut expected: std::collections::HashMap<usize, f64> =
                std::collections::HashMap::new();
            let closure = plex.closure_points(coarse_cell).unwrap();
            let mut node_j = 0;
            for &t in &closure {
                let nn = elem.nodes_per_depth(plex.depth(t).unwrap());
                for s in 0..nn {
                    let w = tab.values[(0, node_j)];
                    node_j += 1;
                    if w.abs() < 1e-13 {
                        continue;
                    }
                    assert!(!gsection.is_constrained(t));
                    expected.insert(gsection.offset(t) + s, w);
                }
            }
            let row = c.row(section.offset(p));
            for &(col, w) in row {
                let e = expected.get(&col).copied().unwrap_or(0.0);
                assert!(
                    (w - e).abs() < 1e-12,
                    "point {p}: col {col} got {w}, oracle {e}"
                );
            }
            assert_eq!(
                row.len(),
                expected.len(),
                "point {p}: sparsity differs from oracle"
            );
        }
    }

    #[test]
    fn mismatched_element_shape_rejected() {
        let rt = samples::green_reference_tree();
        let elem = ReferenceElement::new(CellShape::Quadrilateral, 1, 1).unwrap();
        assert!(matches!(
            reference_constraints(&rt, &elem),
            Err(crate::error::Error::ShapeMismatch)
        ));
    }

    #[test]
    fn lagrange_rows_sum_to_one() {
        for degree in [1usize, 2] {
            let (_, _, _, c) = fig5_setup(degree);
            for i in c.nontrivial_rows() {
                let s: f64 = c.row(i).iter().map(|&(_, w)| w).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn anchor_sparsity() {
        let (plex, section, gsection, c) = fig5_setup(2);
        let tree = plex.tree().unwrap();
        for p in tree.constrained_points() {
            let anchors = plex.anchors(p).unwrap();
            let mut allowed: Vec<usize> = Vec::new();
            for &a in anchors {
                for k in 0..section.dof(a) {
                    allowed.push(gsection.offset(a) + k);
                }
            }
            for s in 0..section.dof(p) {
                for &(col, _) in c.row(section.offset(p) + s) {
                    assert!(allowed.contains(&col), "row of {p} leaks outside anchors");
                }
            }
        }
    }

    #[test]
    fn polynomial_reproduction_through_constraints() {
        // interpolate polynomials at unconstrained nodes, push through the
        // constraint matrix, compare against direct evaluation at all nodes
        for degree in [1usize, 2] {
            let (plex, section, gsection, c) = fig5_setup(degree);
            let poly = |x: &[f64]| -> f64 {
                if degree == 1 {
                    1.0 + 2.0 * x[0] - 3.0 * x[1]
                } else {
                    1.0 + 2.0 * x[0] - 3.0 * x[1] + x[0] * x[1] - 0.5 * x[1] * x[1]
                }
            };
            let mut global = vec![0.0; gsection.size];
            let mut local_direct = vec![0.0; section.size];
            for p in 0..plex.num_points() {
                let p = PointId(p);
                if section.dof(p) == 0 {
                    continue;
                }
                let x = plex.point_centroid(p).unwrap();
                local_direct[section.offset(p)] = poly(&x);
                if !gsection.is_constrained(p) {
                    global[gsection.offset(p)] = poly(&x);
                }
            }
            let local = c.apply(&global).unwrap();
            for (a, b) in local.iter().zip(&local_direct) {
                assert!((a - b).abs() < 1e-10, "degree {degree}");
            }
        }
    }

    #[test]
    fn adjointness_of_apply_and_transpose() {
        let (_, section, gsection, c) = fig5_setup(2);
        // deterministic pseudo-random vectors
        let u: Vec<f64> = (0..gsection.size)
            .map(|i| ((i * 37 + 11) % 17) as f64 / 7.0 - 1.0)
            .collect();
        let v: Vec<f64> = (0..section.size)
            .map(|i| ((i * 53 + 5) % 13) as f64 / 5.0 - 1.0)
            .collect();
        let cu = c.apply(&u).unwrap();
        let mut ctv = vec![0.0; gsection.size];
        c.apply_transpose(&v, &mut ctv, true).unwrap();
        let lhs: f64 = cu.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(&ctv).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn coo_dump_lists_entries() {
        let (_, _, _, c) = fig5_setup(1);
        let text = c.to_coo_text();
        assert_eq!(text.lines().count(), 5 + 2); // 5 identity rows + midpoint row
    }
}
