//! Reference trees: small non-conformal meshes encoding the admissible
//! refinement patterns.
//!
//! A reference tree contains the coarse reference cell as a sub-complex plus
//! all points of its isotropic refinement, with a self-referential overlay
//! (each refined point's childID is itself). Child-to-parent maps taken from
//! the tree determine all hanging-node constraint coefficients.

use crate::builder::ComplexBuilder;
use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};
use crate::shape::CellShape;
use crate::tree::TreeEntry;
use nalgebra::{DMatrix, DVector};

/// Component-wise affine map between reference frames.
#[derive(Debug, Clone)]
pub struct AffineMap {
    /// `rows x cols` linear part; rows = parent frame dim, cols = child dim.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        let y = &self.a * x + &self.b;
        y.iter().copied().collect()
    }
}

/// Least-squares affine fit `y ≈ A x + b` through point pairs; exact for the
/// affine embeddings used by reference trees.
fn affine_fit(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> AffineMap {
    let n = xs.len();
    let dx = xs.first().map_or(0, |v| v.len());
    let dy = ys[0].len();
    if dx == 0 {
        // a vertex frame: the map is the constant target point
        return AffineMap {
            a: DMatrix::zeros(dy, 0),
            b: DVector::from_column_slice(&ys[0]),
        };
    }
    let mut design = DMatrix::zeros(n, dx + 1);
    let mut rhs = DMatrix::zeros(n, dy);
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        for j in 0..dx {
            design[(i, j)] = x[j];
        }
        design[(i, dx)] = 1.0;
        for j in 0..dy {
            rhs[(i, j)] = y[j];
        }
    }
    let gram = design.transpose() * &design;
    let w = gram
        .lu()
        .solve(&(design.transpose() * rhs))
        .expect("affine fit is well-posed");
    let a = w.rows(0, dx).transpose().into_owned();
    let b = w.row(dx).transpose().into_owned();
    AffineMap { a, b }
}

/// ChildIDs describing the refinement of one coarse edge: the half containing
/// the edge's first closure vertex, the other half, and the midpoint vertex.
#[derive(Debug, Clone, Copy)]
pub struct EdgeInterface {
    pub parent: PointId,
    pub first_half: PointId,
    pub second_half: PointId,
    pub midpoint: PointId,
}

/// ChildIDs describing the refinement of one coarse face, aligned with the
/// face's closure order: `corner_faces[k]` touches closure vertex `k`,
/// `mid_edges` connect midpoints (simplex) or the center to edge midpoints
/// (hypercube, listed per closure edge position).
#[derive(Debug, Clone)]
pub struct FaceInterface {
    pub parent: PointId,
    pub corner_faces: Vec<PointId>,
    /// hypercube: cross edge per closure-edge position; simplex: mid-edge
    /// opposite closure vertex k (connecting the midpoints of the two edges
    /// meeting at the other vertices).
    pub mid_edges: Vec<PointId>,
    /// simplex: the middle face; hypercube: none
    pub center_face: Option<PointId>,
    /// hypercube: the face-center vertex; simplex: none
    pub center_vertex: Option<PointId>,
}

/// A treed plex serving as the refinement-pattern description for meshes.
#[derive(Debug, Clone)]
pub struct ReferenceTree {
    plex: Plex,
    coarse_cell: PointId,
    shape: CellShape,
    name: String,
}

impl ReferenceTree {
    /// Isotropic default tree: segment into 2, triangle/quad into 4,
    /// tet/hex into 8.
    pub fn default_tree(dim: usize, simplex: bool) -> Result<ReferenceTree> {
        if dim == 0 || dim > 3 {
            return Err(Error::BadDimension(dim));
        }
        let shape = CellShape::from_flags(dim, simplex)?;
        let (coords, fine_cells) = subdivision(shape);
        let mut b = ComplexBuilder::new(dim);
        let coarse: Vec<usize> = (0..shape.num_vertices()).collect();
        b.add_cell(shape, &coarse);
        for cell in &fine_cells {
            b.add_cell(shape, cell);
        }
        let flat: Vec<f64> = coords.iter().flatten().copied().collect();
        let mut plex = b.finish(flat)?;

        let entries = geometric_overlay(&plex, PointId(0))?;
        plex.set_tree_self_referential(&entries)?;
        let name = format!("{}{}", if simplex { "simplex" } else { "hypercube" }, dim);
        Ok(ReferenceTree {
            plex,
            coarse_cell: PointId(0),
            shape,
            name,
        })
    }

    /// Wrap an existing treed plex; any plex with an overlay can serve as a
    /// reference tree.
    pub fn from_treed_plex(plex: Plex, coarse_cell: PointId, name: &str) -> Result<ReferenceTree> {
        if plex.tree().is_none() {
            return Err(Error::NoReferenceTree);
        }
        let shape = plex.point_shape(coarse_cell)?;
        Ok(ReferenceTree {
            plex,
            coarse_cell,
            shape,
            name: name.to_string(),
        })
    }

    pub fn plex(&self) -> &Plex {
        &self.plex
    }

    pub fn coarse_cell(&self) -> PointId {
        self.coarse_cell
    }

    pub fn shape(&self) -> CellShape {
        self.shape
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Resolve one of the built-in tree names ("simplex2", "hypercube3", ...).
    pub fn by_name(name: &str) -> Result<ReferenceTree> {
        let (simplex, dim) = if let Some(d) = name.strip_prefix("simplex") {
            (true, d.parse::<usize>().ok())
        } else if let Some(d) = name.strip_prefix("hypercube") {
            (false, d.parse::<usize>().ok())
        } else {
            (true, None)
        };
        match dim {
            Some(d) => ReferenceTree::default_tree(d, simplex),
            None => Err(Error::VersionMismatch(name.to_string())),
        }
    }

    /// Embedding of a tree point's own reference frame into the ambient
    /// (coarse-cell) coordinates, fitted through its closure vertices.
    fn embedding(&self, p: PointId) -> Result<AffineMap> {
        let verts = self.plex.closure_vertices(p)?;
        let ys: Vec<Vec<f64>> = verts
            .iter()
            .map(|&v| self.plex.vertex_coords(v).map(|c| c.to_vec()))
            .collect::<Result<_>>()?;
        let xs: Vec<Vec<f64>> = if self.plex.depth(p)? == 0 {
            vec![Vec::new()]
        } else {
            let shape = self.plex.point_shape(p)?;
            let ref_plex = shape.reference_cell_plex();
            ref_plex
                .closure_vertices(PointId(0))?
                .iter()
                .map(|&v| ref_plex.vertex_coords(v).map(|c| c.to_vec()))
                .collect::<Result<_>>()?
        };
        Ok(affine_fit(&xs, &ys))
    }

    /// The component-wise affine map from a child point's reference
    /// coordinates into its parent point's reference coordinates.
    pub fn child_to_parent_map(&self, child_id: PointId) -> Result<AffineMap> {
        let tree = self.plex.tree().ok_or(Error::NoReferenceTree)?;
        let (parent, _) = tree.parent(child_id).ok_or(Error::NotAChild(child_id))?;
        let ec = self.embedding(child_id)?;
        let ep = self.embedding(parent)?;
        // invert the parent embedding on its affine hull
        let gram = ep.a.transpose() * &ep.a;
        let pinv = gram
            .clone()
            .lu()
            .solve(&ep.a.transpose())
            .expect("parent embedding has full column rank");
        let a = &pinv * &ec.a;
        let b = &pinv * (&ec.b - &ep.b);
        Ok(AffineMap { a, b })
    }

    /// First child-bearing coarse edge and its children, aligned with the
    /// edge's closure order.
    pub fn edge_interface(&self) -> Result<EdgeInterface> {
        let tree = self.plex.tree().ok_or(Error::NoReferenceTree)?;
        let (es, ee) = self.plex.depth_stratum(1)?;
        for e in es..ee {
            let e = PointId(e);
            if !self.plex.closure_points(self.coarse_cell)?.contains(&e) {
                continue;
            }
            let kids = tree.children(e);
            if kids.is_empty() {
                continue;
            }
            let verts = self.plex.closure_vertices(e)?;
            let mut first = None;
            let mut second = None;
            let mut mid = None;
            for &k in kids {
                if self.plex.depth(k)? == 0 {
                    mid = Some(k);
                } else {
                    let kv = self.plex.closure_vertices(k)?;
                    if kv.contains(&verts[0]) {
                        first = Some(k);
                    } else {
                        second = Some(k);
                    }
                }
            }
            if let (Some(first_half), Some(second_half), Some(midpoint)) = (first, second, mid) {
                return Ok(EdgeInterface {
                    parent: e,
                    first_half,
                    second_half,
                    midpoint,
                });
            }
        }
        Err(Error::OrientationUnsupported(self.coarse_cell))
    }

    /// First child-bearing coarse face and its children (3D trees).
    pub fn face_interface(&self) -> Result<FaceInterface> {
        let tree = self.plex.tree().ok_or(Error::NoReferenceTree)?;
        if self.plex.dim() != 3 {
            return Err(Error::BadDimension(self.plex.dim()));
        }
        let cone = self.plex.cone(self.coarse_cell)?.to_vec();
        for (f, _) in cone {
            let kids = tree.children(f);
            if kids.is_empty() {
                continue;
            }
            return self.face_interface_of(f);
        }
        Err(Error::OrientationUnsupported(self.coarse_cell))
    }

    fn face_interface_of(&self, f: PointId) -> Result<FaceInterface> {
        let tree = self.plex.tree().ok_or(Error::NoReferenceTree)?;
        let kids = tree.children(f);
        let verts = self.plex.closure_vertices(f)?;
        let nv = verts.len();
        let mut corner_faces = vec![None; nv];
        let mut center_face = None;
        let mut center_vertex = None;
        let mut edge_kids = Vec::new();
        for &k in kids {
            match self.plex.depth(k)? {
                0 => center_vertex = Some(k),
                1 => edge_kids.push(k),
                2 => {
                    let kv = self.plex.closure_vertices(k)?;
                    let mut placed = false;
                    for (i, &w) in verts.iter().enumerate() {
                        if kv.contains(&w) {
                            corner_faces[i] = Some(k);
                            placed = true;
                            break;
                        }
                    }
                    if !placed {
                        center_face = Some(k);
                    }
                }
                _ => return Err(Error::OrientationUnsupported(f)),
            }
        }
        // midpoint vertex of each closure edge of the face
        let face_edges: Vec<PointId> = self
            .plex
            .closure(f)?
            .into_iter()
            .map(|(p, _)| p)
            .filter(|&p| self.plex.depth(p).unwrap() == 1)
            .collect();
        let midpoint_of = |e: PointId| -> Option<PointId> {
            tree.children(e)
                .iter()
                .copied()
                .find(|&k| self.plex.depth(k).unwrap() == 0)
        };
        let mids: Vec<Option<PointId>> = face_edges.iter().map(|&e| midpoint_of(e)).collect();
        let mut mid_edges = Vec::new();
        if let Some(cv) = center_vertex {
            // hypercube: cross edge k joins the center to midpoint of edge k
            for m in &mids {
                let m = m.ok_or(Error::OrientationUnsupported(f))?;
                let ek = edge_kids
                    .iter()
                    .copied()
                    .find(|&k| {
                        let kv = self.plex.closure_vertices(k).unwrap();
                        kv.contains(&cv) && kv.contains(&m)
                    })
                    .ok_or(Error::OrientationUnsupported(f))?;
                mid_edges.push(ek);
            }
        } else {
            // simplex: mid-edge k is the one NOT touching midpoint of edge k
            for (i, _) in mids.iter().enumerate() {
                let others: Vec<PointId> = (0..mids.len())
                    .filter(|&j| j != i)
                    .map(|j| mids[j].ok_or(Error::OrientationUnsupported(f)))
                    .collect::<Result<_>>()?;
                let ek = edge_kids
                    .iter()
                    .copied()
                    .find(|&k| {
                        let kv = self.plex.closure_vertices(k).unwrap();
                        others.iter().all(|m| kv.contains(m))
                    })
                    .ok_or(Error::OrientationUnsupported(f))?;
                mid_edges.push(ek);
            }
        }
        Ok(FaceInterface {
            parent: f,
            corner_faces: corner_faces
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or(Error::OrientationUnsupported(f))?,
            mid_edges,
            center_face,
            center_vertex,
        })
    }
}

impl ReferenceTree {
    /// Derive overlay entries for one hanging interface of a mesh: `parent`
    /// is the coarse facet or edge, `fine` the mesh points nested inside it.
    /// Roles are matched topologically against the parent's own closure
    /// order, so the result is orientation-consistent with the positional
    /// closure matching used by the constraint builder.
    pub fn match_mesh_interface(
        &self,
        plex: &Plex,
        parent: PointId,
        fine: &[PointId],
    ) -> Result<Vec<TreeEntry>> {
        let mut entries = Vec::new();
        match plex.depth(parent)? {
            1 => {
                let ei = self.edge_interface()?;
                let verts = plex.closure_vertices(parent)?;
                let mut halves = Vec::new();
                let mut mid = None;
                for &p in fine {
                    match plex.depth(p)? {
                        0 => mid = Some(p),
                        1 => halves.push(p),
                        _ => return Err(Error::OrientationUnsupported(parent)),
                    }
                }
                let mid = mid.ok_or(Error::OrientationUnsupported(parent))?;
                if halves.len() != 2 {
                    return Err(Error::OrientationUnsupported(parent));
                }
                for h in halves {
                    let hv = plex.closure_vertices(h)?;
                    let child_id = if hv.contains(&verts[0]) {
                        ei.first_half
                    } else if hv.contains(&verts[1]) {
                        ei.second_half
                    } else {
                        return Err(Error::OrientationUnsupported(parent));
                    };
                    entries.push(TreeEntry {
                        point: h,
                        parent,
                        child_id,
                    });
                }
                entries.push(TreeEntry {
                    point: mid,
                    parent,
                    child_id: ei.midpoint,
                });
            }
            2 => {
                let fi = self.face_interface()?;
                let verts = plex.closure_vertices(parent)?;
                let nv = verts.len();
                let mut faces = Vec::new();
                let mut edges = Vec::new();
                let mut center_vertex = None;
                for &p in fine {
                    match plex.depth(p)? {
                        0 => center_vertex = Some(p),
                        1 => edges.push(p),
                        2 => faces.push(p),
                        _ => return Err(Error::OrientationUnsupported(parent)),
                    }
                }
                if faces.len() != fi.corner_faces.len() + usize::from(fi.center_face.is_some()) {
                    return Err(Error::OrientationUnsupported(parent));
                }
                // corner child faces by shared corner vertex
                let mut corner_mesh: Vec<Option<PointId>> = vec![None; nv];
                let mut rest = Vec::new();
                for &f in &faces {
                    let fv = plex.closure_vertices(f)?;
                    let mut placed = false;
                    for (k, &w) in verts.iter().enumerate() {
                        if fv.contains(&w) {
                            corner_mesh[k] = Some(f);
                            placed = true;
                            break;
                        }
                    }
                    if !placed {
                        rest.push(f);
                    }
                }
                let corner_mesh: Vec<PointId> = corner_mesh
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or(Error::OrientationUnsupported(parent))?;
                for (k, &f) in corner_mesh.iter().enumerate() {
                    entries.push(TreeEntry {
                        point: f,
                        parent,
                        child_id: fi.corner_faces[k],
                    });
                }
                match (fi.center_face, rest.as_slice()) {
                    (Some(cf), [f]) => entries.push(TreeEntry {
                        point: *f,
                        parent,
                        child_id: cf,
                    }),
                    (None, []) => {}
                    _ => return Err(Error::OrientationUnsupported(parent)),
                }
                if let Some(cv_ref) = fi.center_vertex {
                    let cv = center_vertex.ok_or(Error::OrientationUnsupported(parent))?;
                    entries.push(TreeEntry {
                        point: cv,
                        parent,
                        child_id: cv_ref,
                    });
                } else if center_vertex.is_some() {
                    return Err(Error::OrientationUnsupported(parent));
                }
                // midpoint of closure edge k = the one vertex shared by the
                // corner faces at k and k+1 that is not the face center
                let mut mids = Vec::with_capacity(nv);
                for k in 0..nv {
                    let a = plex.closure_vertices(corner_mesh[k])?;
                    let b = plex.closure_vertices(corner_mesh[(k + 1) % nv])?;
                    let common: Vec<PointId> = a
                        .iter()
                        .copied()
                        .filter(|v| b.contains(v) && Some(*v) != center_vertex)
                        .collect();
                    if common.len() != 1 {
                        return Err(Error::OrientationUnsupported(parent));
                    }
                    mids.push(common[0]);
                }
                // mid edges: hypercube joins the center to midpoint k;
                // simplex joins all midpoints except k
                for (k, &eref) in fi.mid_edges.iter().enumerate() {
                    let want: Vec<PointId> = if fi.center_vertex.is_some() {
                        vec![center_vertex.unwrap(), mids[k]]
                    } else {
                        (0..nv).filter(|&j| j != k).map(|j| mids[j]).collect()
                    };
                    let e = edges
                        .iter()
                        .copied()
                        .find(|&e| {
                            let ev = plex.closure_vertices(e).unwrap();
                            want.iter().all(|w| ev.contains(w)) && ev.len() == want.len()
                        })
                        .ok_or(Error::OrientationUnsupported(parent))?;
                    entries.push(TreeEntry {
                        point: e,
                        parent,
                        child_id: eref,
                    });
                }
                if edges.len() != fi.mid_edges.len() {
                    return Err(Error::OrientationUnsupported(parent));
                }
            }
            _ => return Err(Error::OrientationUnsupported(parent)),
        }
        Ok(entries)
    }
}

/// Geometric overlay assignment: every non-coarse point is parented to the
/// minimal coarse point strictly containing its relative interior, with
/// itself as childID. Coordinates in reference trees are dyadic, so the
/// containment tests are exact.
fn geometric_overlay(plex: &Plex, coarse_cell: PointId) -> Result<Vec<TreeEntry>> {
    let coarse: Vec<PointId> = plex.closure_points(coarse_cell)?;
    let simplex = plex.point_shape(coarse_cell)?.is_simplex();
    let dim = plex.dim();
    let (vs, _) = plex.depth_stratum(0)?;
    let nv_coarse = plex.point_shape(coarse_cell)?.num_vertices();

    // barycentric coordinates w.r.t. the unit simplex, indexed per coarse
    // construction vertex (origin first)
    let bary = |x: &[f64]| -> Vec<f64> {
        let mut l = vec![1.0 - x.iter().sum::<f64>()];
        l.extend_from_slice(x);
        l
    };

    let tol = 1e-12;
    let mut entries = Vec::new();
    for p in 0..plex.num_points() {
        let p = PointId(p);
        if coarse.contains(&p) {
            continue;
        }
        let sample = plex.point_centroid(p)?;
        let pverts = plex.closure_vertices(p)?;
        let mut best: Option<(usize, PointId)> = None;
        for &q in &coarse {
            let dq = plex.depth(q)?;
            if dq == 0 {
                continue;
            }
            let inside = if simplex {
                // vertex set of q as construction indices
                let qset: Vec<usize> = plex.closure_vertices(q)?.iter().map(|v| v.0 - vs).collect();
                let strict = {
                    let l = bary(&sample);
                    (0..nv_coarse).all(|k| {
                        if qset.contains(&k) {
                            l[k] > tol
                        } else {
                            l[k].abs() < tol
                        }
                    })
                };
                strict
                    && pverts.iter().all(|&v| {
                        let l = bary(plex.vertex_coords(v).unwrap());
                        (0..nv_coarse).all(|k| {
                            if qset.contains(&k) {
                                l[k] > -tol
                            } else {
                                l[k].abs() < tol
                            }
                        })
                    })
            } else {
                // axis-aligned box of q
                let qv: Vec<&[f64]> = plex
                    .closure_vertices(q)?
                    .iter()
                    .map(|&v| plex.vertex_coords(v).unwrap())
                    .collect();
                let lo: Vec<f64> = (0..dim)
                    .map(|i| qv.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min))
                    .collect();
                let hi: Vec<f64> = (0..dim)
                    .map(|i| qv.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                let strict = (0..dim).all(|i| {
                    if hi[i] - lo[i] > tol {
                        sample[i] > lo[i] + tol && sample[i] < hi[i] - tol
                    } else {
                        (sample[i] - lo[i]).abs() < tol
                    }
                });
                strict
                    && pverts.iter().all(|&v| {
                        let x = plex.vertex_coords(v).unwrap();
                        (0..dim).all(|i| x[i] > lo[i] - tol && x[i] < hi[i] + tol)
                    })
            };
            if inside {
                match best {
                    Some((d, _)) if d <= dq => {}
                    _ => best = Some((dq, q)),
                }
            }
        }
        let (_, parent) = best.ok_or(Error::InconsistentChildId(p))?;
        entries.push(TreeEntry {
            point: p,
            parent,
            child_id: p,
        });
    }
    Ok(entries)
}

/// Fine vertex coordinates (coarse vertices first) and fine cell tuples for
/// the isotropic subdivision of each shape.
fn subdivision(shape: CellShape) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let mut coords = shape.reference_vertices();
    match shape {
        CellShape::Segment => {
            coords.push(vec![0.5]);
            (coords, vec![vec![0, 2], vec![2, 1]])
        }
        CellShape::Triangle => {
            coords.push(vec![0.5, 0.0]); // 3: m01
            coords.push(vec![0.5, 0.5]); // 4: m12
            coords.push(vec![0.0, 0.5]); // 5: m02
            (
                coords,
                vec![vec![0, 3, 5], vec![3, 1, 4], vec![5, 4, 2], vec![3, 4, 5]],
            )
        }
        CellShape::Quadrilateral => {
            coords.push(vec![0.0, -1.0]); // 4
            coords.push(vec![1.0, 0.0]); // 5
            coords.push(vec![0.0, 1.0]); // 6
            coords.push(vec![-1.0, 0.0]); // 7
            coords.push(vec![0.0, 0.0]); // 8
            (
                coords,
                vec![
                    vec![0, 4, 8, 7],
                    vec![4, 1, 5, 8],
                    vec![8, 5, 2, 6],
                    vec![7, 8, 6, 3],
                ],
            )
        }
        CellShape::Tetrahedron => {
            coords.push(vec![0.5, 0.0, 0.0]); // 4: m01
            coords.push(vec![0.0, 0.5, 0.0]); // 5: m02
            coords.push(vec![0.0, 0.0, 0.5]); // 6: m03
            coords.push(vec![0.5, 0.5, 0.0]); // 7: m12
            coords.push(vec![0.5, 0.0, 0.5]); // 8: m13
            coords.push(vec![0.0, 0.5, 0.5]); // 9: m23
                                              // corner tets plus the interior octahedron split along the
                                              // m01-m23 diagonal (the three diagonals tie on the unit simplex;
                                              // lowest index pair picked)
            let mut cells = vec![
                vec![0, 4, 5, 6],
                vec![4, 1, 7, 8],
                vec![5, 7, 2, 9],
                vec![6, 8, 9, 3],
                vec![4, 9, 5, 7],
                vec![4, 9, 7, 8],
                vec![4, 9, 8, 6],
                vec![4, 9, 6, 5],
            ];
            for cell in &mut cells {
                fix_tet_sign(cell, &coords);
            }
            (coords, cells)
        }
        CellShape::Hexahedron => {
            // all lattice points of {-1,0,1}^3 beyond the corners, in
            // lexicographic (z, y, x) order
            for z in [-1.0f64, 0.0, 1.0] {
                for y in [-1.0f64, 0.0, 1.0] {
                    for x in [-1.0f64, 0.0, 1.0] {
                        let pt = vec![x, y, z];
                        if !coords.contains(&pt) {
                            coords.push(pt);
                        }
                    }
                }
            }
            let find = |x: f64, y: f64, z: f64| -> usize {
                coords
                    .iter()
                    .position(|c| c == &vec![x, y, z])
                    .expect("lattice point exists")
            };
            let mut cells = Vec::new();
            for oz in [-1.0f64, 0.0] {
                for oy in [-1.0f64, 0.0] {
                    for ox in [-1.0f64, 0.0] {
                        let offs = [
                            (0.0, 0.0, 0.0),
                            (1.0, 0.0, 0.0),
                            (1.0, 1.0, 0.0),
                            (0.0, 1.0, 0.0),
                            (0.0, 0.0, 1.0),
                            (1.0, 0.0, 1.0),
                            (1.0, 1.0, 1.0),
                            (0.0, 1.0, 1.0),
                        ];
                        cells.push(
                            offs.iter()
                                .map(|&(dx, dy, dz)| find(ox + dx, oy + dy, oz + dz))
                                .collect(),
                        );
                    }
                }
            }
            (coords, cells)
        }
    }
}

fn fix_tet_sign(cell: &mut [usize], coords: &[Vec<f64>]) {
    let v = |i: usize| &coords[cell[i]];
    let det = {
        let a: Vec<f64> = (0..3).map(|k| v(1)[k] - v(0)[k]).collect();
        let b: Vec<f64> = (0..3).map(|k| v(2)[k] - v(0)[k]).collect();
        let c: Vec<f64> = (0..3).map(|k| v(3)[k] - v(0)[k]).collect();
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    if det < 0.0 {
        cell.swap(2, 3);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tree_counts() {
        let t1 = ReferenceTree::default_tree(1, true).unwrap();
        assert_eq!(t1.plex().strata(), &vec![(0, 3), (3, 6)]);
        let tree = t1.plex().tree().unwrap();
        // two child segments and the midpoint all parented by the coarse cell
        assert_eq!(tree.children(PointId(0)).len(), 3);

        let t2 = ReferenceTree::default_tree(2, true).unwrap();
        assert_eq!(t2.plex().strata(), &vec![(0, 5), (5, 17), (17, 23)]);

        let q2 = ReferenceTree::default_tree(2, false).unwrap();
        // coarse 1+4+4, fine 4+12+5
        assert_eq!(q2.plex().strata(), &vec![(0, 5), (5, 21), (21, 30)]);

        let t3 = ReferenceTree::default_tree(3, true).unwrap();
        let s = t3.plex().strata();
        assert_eq!(s[0], (0, 9)); // 1 + 8 cells

        let h3 = ReferenceTree::default_tree(3, false).unwrap();
        // coarse 1+6+12+8, fine 8+36+54+27 (corners shared)
        assert_eq!(
            h3.plex().strata(),
            &vec![(0, 9), (9, 51), (51, 117), (117, 144)]
        );
        assert!(matches!(
            ReferenceTree::default_tree(4, true),
            Err(Error::BadDimension(4))
        ));
    }

    #[test]
    fn triangle_tree_edge_children() {
        let t = ReferenceTree::default_tree(2, true).unwrap();
        let tree = t.plex().tree().unwrap();
        // every coarse edge has two child edges and a child vertex
        for e in 5..8 {
            let kids = tree.children(PointId(e));
            assert_eq!(kids.len(), 3);
            let vkids = kids
                .iter()
                .filter(|&&k| t.plex().depth(k).unwrap() == 0)
                .count();
            assert_eq!(vkids, 1);
        }
    }

    #[test]
    fn hex_tree_face_and_edge_children() {
        let t = ReferenceTree::default_tree(3, false).unwrap();
        let tree = t.plex().tree().unwrap();
        let cone = t.plex().cone(PointId(0)).unwrap().to_vec();
        for (f, _) in cone {
            let kids = tree.children(f);
            let faces = kids
                .iter()
                .filter(|&&k| t.plex().depth(k).unwrap() == 2)
                .count();
            let edges = kids
                .iter()
                .filter(|&&k| t.plex().depth(k).unwrap() == 1)
                .count();
            let verts = kids
                .iter()
                .filter(|&&k| t.plex().depth(k).unwrap() == 0)
                .count();
            assert_eq!((faces, edges, verts), (4, 4, 1));
        }
        // coarse edges: 2 child edges + 1 child vertex
        let closure = t.plex().closure_points(PointId(0)).unwrap();
        for p in closure {
            if t.plex().depth(p).unwrap() == 1 {
                let kids = tree.children(p);
                assert_eq!(kids.len(), 3);
            }
        }
    }

    #[test]
    fn child_maps_are_geometrically_consistent() {
        for (dim, simplex) in [(1, true), (2, true), (2, false), (3, true), (3, false)] {
            let t = ReferenceTree::default_tree(dim, simplex).unwrap();
            let tree = t.plex().tree().unwrap();
            for e in tree.entries() {
                let map = t.child_to_parent_map(e.point).unwrap();
                let pemb = t.embedding(e.parent).unwrap();
                let cemb = t.embedding(e.point).unwrap();
                // push the child's reference vertices through both routes
                let xs: Vec<Vec<f64>> = if t.plex().depth(e.point).unwrap() == 0 {
                    vec![Vec::new()]
                } else {
                    let shape = t.plex().point_shape(e.point).unwrap();
                    shape.reference_vertices()
                };
                for x in xs {
                    let ambient = cemb.apply(&x);
                    let via_parent = pemb.apply(&map.apply(&x));
                    for (a, b) in ambient.iter().zip(&via_parent) {
                        assert!((a - b).abs() < 1e-14, "dim={dim} simplex={simplex}");
                    }
                }
            }
        }
    }

    #[test]
    fn one_dimensional_bisection_map() {
        let t = ReferenceTree::default_tree(1, true).unwrap();
        let tree = t.plex().tree().unwrap();
        let kids = tree.children(PointId(0)).to_vec();
        let cells: Vec<PointId> = kids
            .iter()
            .copied()
            .filter(|&k| t.plex().depth(k).unwrap() == 1)
            .collect();
        // left child on the simplex convention [0,1]: xi -> xi/2
        let m = t.child_to_parent_map(cells[0]).unwrap();
        assert!((m.apply(&[0.0])[0] - 0.0).abs() < 1e-14);
        assert!((m.apply(&[1.0])[0] - 0.5).abs() < 1e-14);
        let m2 = t.child_to_parent_map(cells[1]).unwrap();
        assert!((m2.apply(&[0.0])[0] - 0.5).abs() < 1e-14);
        assert!((m2.apply(&[1.0])[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn children_partition_parent_measure() {
        for (dim, simplex) in [(2, true), (2, false), (3, true), (3, false)] {
            let t = ReferenceTree::default_tree(dim, simplex).unwrap();
            let tree = t.plex().tree().unwrap();
            let (cs, ce) = t.plex().height_stratum(0).unwrap();
            let mut total = 0.0;
            for c in cs + 1..ce {
                let m = t.child_to_parent_map(PointId(c)).unwrap();
                let det = m.a.clone().determinant().abs();
                total += det;
                assert!(tree.parent(PointId(c)).is_some());
            }
            assert!((total - 1.0).abs() < 1e-12, "dim={dim} simplex={simplex}");
        }
    }

    #[test]
    fn ancestor_free_points_are_not_children() {
        let t = ReferenceTree::default_tree(2, true).unwrap();
        assert!(matches!(
            t.child_to_parent_map(t.coarse_cell()),
            Err(Error::NotAChild(_))
        ));
    }

    #[test]
    fn edge_interface_roles() {
        let t = ReferenceTree::default_tree(2, false).unwrap();
        let e = t.edge_interface().unwrap();
        let verts = t.plex().closure_vertices(e.parent).unwrap();
        assert!(t
            .plex()
            .closure_vertices(e.first_half)
            .unwrap()
            .contains(&verts[0]));
        assert!(t
            .plex()
            .closure_vertices(e.second_half)
            .unwrap()
            .contains(&verts[1]));
        assert_eq!(t.plex().depth(e.midpoint).unwrap(), 0);
    }

    #[test]
    fn face_interface_roles() {
        let t = ReferenceTree::default_tree(3, false).unwrap();
        let f = t.face_interface().unwrap();
        assert_eq!(f.corner_faces.len(), 4);
        assert_eq!(f.mid_edges.len(), 4);
        assert!(f.center_vertex.is_some());
        assert!(f.center_face.is_none());

        let t = ReferenceTree::default_tree(3, true).unwrap();
        let f = t.face_interface().unwrap();
        assert_eq!(f.corner_faces.len(), 3);
        assert_eq!(f.mid_edges.len(), 3);
        assert!(f.center_vertex.is_none());
        assert!(f.center_face.is_some());
    }
}
