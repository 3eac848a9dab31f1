//! Stratified DAG (Hasse diagram) representation of a mesh.
//!
//! Every cell of every dimension is a *point* in one chart `[0, num_points)`.
//! Points are numbered contiguously per stratum, cells first and vertices
//! last. The downward incidence of a point is its *cone* (the canonical
//! decomposition of its boundary, one stratum below); the upward incidence is
//! its *support*. Transitive closures of the two maps are `closure` and
//! `star`. On a conformal mesh cone and support are exactly dual; attaching a
//! tree overlay (see [`crate::tree`]) augments supports and breaks the
//! converse direction on purpose.

use crate::error::{Error, Result};
use crate::reftree::ReferenceTree;
use crate::shape::CellShape;
use crate::tree::TreeOverlay;
use std::fmt;
use std::sync::Arc;

/// Index of a mesh point in the chart `[0, num_points)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub usize);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Orientation of a cone entry with `m` vertices, encoded as a signed code in
/// `[-m, m-1]`. Non-negative codes rotate the canonical vertex order by
/// `code`; negative codes traverse it reflected, starting at `-(code+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Orientation(pub i32);

impl Orientation {
    pub const IDENTITY: Orientation = Orientation(0);

    /// True for reflected (orientation-reversing) codes.
    pub fn is_reflection(self) -> bool {
        self.0 < 0
    }

    /// Canonical index of the `k`-th vertex under this traversal of an
    /// `m`-vertex entry.
    pub fn apply(self, m: usize, k: usize) -> usize {
        let m = m as i64;
        let k = k as i64;
        let c = self.0 as i64;
        let idx = if c >= 0 { c + k } else { (-c - 1) - k };
        idx.rem_euclid(m) as usize
    }

    /// Group composition in the dihedral group on `m` symbols:
    /// `self.compose(inner, m)` first applies `inner`, then `self`.
    pub fn compose(self, inner: Orientation, m: usize) -> Orientation {
        let m = m as i64;
        let norm = |x: i64| x.rem_euclid(m);
        let o = match (self.0 >= 0, inner.0 >= 0) {
            (true, true) => norm(self.0 as i64 + inner.0 as i64),
            (true, false) => {
                let s = -(inner.0 as i64) - 1;
                -(norm(self.0 as i64 + s)) - 1
            }
            (false, true) => {
                let s = -(self.0 as i64) - 1;
                -(norm(s - inner.0 as i64)) - 1
            }
            (false, false) => {
                let sa = -(self.0 as i64) - 1;
                let sb = -(inner.0 as i64) - 1;
                norm(sa - sb)
            }
        };
        Orientation(o as i32).canonical(m as usize)
    }

    /// Inverse element: composing with it restores the identity permutation.
    pub fn inverse(self, m: usize) -> Orientation {
        if self.0 >= 0 {
            Orientation(((-(self.0 as i64)).rem_euclid(m as i64)) as i32).canonical(m)
        } else {
            self.canonical(m)
        }
    }

    /// Unique representative per permutation. Distinct codes only collide for
    /// m <= 2, where rotation by 1 equals the reflection starting at 1.
    pub fn canonical(self, m: usize) -> Orientation {
        if m == 2 {
            match self.0 {
                1 | -2 => Orientation(-2),
                _ => Orientation(0),
            }
        } else if m < 2 {
            Orientation(0)
        } else {
            self
        }
    }
}

/// One entry of `(depth, start, end)` per stratum; `strata[h]` holds the
/// half-open chart range of height `h` (height 0 = cells, depth 0 = vertices).
pub type StrataRanges = Vec<(usize, usize)>;

/// Immutable stratified mesh. Construct with [`Plex::from_dag`] or through
/// [`crate::builder::ComplexBuilder`]; all queries take `&self` and are safe
/// for concurrent readers once construction (including any `set_tree`) ends.
#[derive(Debug, Clone)]
pub struct Plex {
    dim: usize,
    strata: StrataRanges,
    cones: Vec<Vec<(PointId, Orientation)>>,
    supports: Vec<Vec<PointId>>,
    /// Vertex coordinates, `dim` entries per depth-0 point in chart order.
    coordinates: Vec<f64>,
    pub(crate) tree: Option<TreeOverlay>,
    pub(crate) reference_tree: Option<Arc<ReferenceTree>>,
}

impl Plex {
    /// Build a plex from per-stratum point counts (cells first, vertices
    /// last), per-point cones with orientations, and vertex coordinates.
    /// Supports are derived by symmetrization.
    pub fn from_dag(
        stratum_counts: &[usize],
        cones: Vec<Vec<(PointId, Orientation)>>,
        vertex_coords: Vec<f64>,
    ) -> Result<Plex> {
        let dim = stratum_counts.len().saturating_sub(1);
        let num_points: usize = stratum_counts.iter().sum();
        if cones.len() != num_points {
            return Err(Error::SizeMismatch {
                expected: num_points,
                found: cones.len(),
            });
        }
        let mut strata = Vec::with_capacity(stratum_counts.len());
        let mut start = 0;
        for &n in stratum_counts {
            strata.push((start, start + n));
            start += n;
        }
        let num_vertices = *stratum_counts.last().unwrap_or(&0);
        if vertex_coords.len() != num_vertices * dim {
            return Err(Error::SizeMismatch {
                expected: num_vertices * dim,
                found: vertex_coords.len(),
            });
        }

        let height_of = |p: usize| strata.iter().position(|&(s, e)| p >= s && p < e);
        for (p, cone) in cones.iter().enumerate() {
            let hp = height_of(p).unwrap();
            for &(q, o) in cone {
                if q.0 >= num_points {
                    return Err(Error::DanglingPoint { index: q.0 });
                }
                let hq = height_of(q.0).unwrap();
                if hq != hp + 1 {
                    return Err(Error::DepthViolation {
                        point: PointId(p),
                        target: q,
                    });
                }
                let arity = cones[q.0].len().max(1);
                if o.0 < -(arity as i32) || o.0 >= arity as i32 {
                    return Err(Error::InvalidOrientation { code: o.0, arity });
                }
            }
        }

        // Reject shapes outside the supported set (segment, triangle, quad,
        // tet, hex) for every point of dimension >= 1.
        for (h, &(s, e)) in strata.iter().enumerate() {
            let point_dim = dim - h;
            if point_dim == 0 {
                continue;
            }
            for p in s..e {
                let cs = cones[p].len();
                if cs == 0 && point_dim >= 1 {
                    // tolerated: a point with an empty cone participates in
                    // no cell and gets no dofs beyond its own
                    continue;
                }
                if CellShape::from_cone_size(point_dim, cs).is_none() {
                    return Err(Error::UnsupportedShape {
                        depth: point_dim,
                        cone_size: cs,
                    });
                }
            }
        }

        let mut plex = Plex {
            dim,
            strata,
            cones,
            supports: vec![Vec::new(); num_points],
            coordinates: vertex_coords,
            tree: None,
            reference_tree: None,
        };
        plex.symmetrize_supports();
        Ok(plex)
    }

    pub(crate) fn symmetrize_supports(&mut self) {
        for s in &mut self.supports {
            s.clear();
        }
        for p in 0..self.num_points() {
            for k in 0..self.cones[p].len() {
                let q = self.cones[p][k].0;
                self.supports[q.0].push(PointId(p));
            }
        }
        for s in &mut self.supports {
            s.sort_unstable();
            s.dedup();
        }
    }

    pub(crate) fn supports_mut(&mut self) -> &mut Vec<Vec<PointId>> {
        &mut self.supports
    }

    pub fn num_points(&self) -> usize {
        self.cones.len()
    }

    /// Topological dimension (the number of strata minus one).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strata(&self) -> &StrataRanges {
        &self.strata
    }

    /// Chart range of the stratum at height `h` (0 = cells).
    pub fn height_stratum(&self, h: usize) -> Result<(usize, usize)> {
        self.strata.get(h).copied().ok_or(Error::BadStratum(h))
    }

    /// Chart range of the stratum at depth `k` (0 = vertices).
    pub fn depth_stratum(&self, k: usize) -> Result<(usize, usize)> {
        if k > self.dim {
            return Err(Error::BadStratum(k));
        }
        self.height_stratum(self.dim - k)
    }

    /// Depth (= topological dimension) of a point.
    pub fn depth(&self, p: PointId) -> Result<usize> {
        let h = self
            .strata
            .iter()
            .position(|&(s, e)| p.0 >= s && p.0 < e)
            .ok_or(Error::OutOfChart(p))?;
        Ok(self.dim - h)
    }

    pub(crate) fn check_point(&self, p: PointId) -> Result<()> {
        if p.0 < self.num_points() {
            Ok(())
        } else {
            Err(Error::OutOfChart(p))
        }
    }

    /// Ordered canonical boundary decomposition of `p`; empty for vertices.
    pub fn cone(&self, p: PointId) -> Result<&[(PointId, Orientation)]> {
        self.check_point(p)?;
        Ok(&self.cones[p.0])
    }

    /// Points one stratum above whose boundary intersects `p`. This includes
    /// tree-augmented entries once an overlay is attached.
    pub fn support(&self, p: PointId) -> Result<&[PointId]> {
        self.check_point(p)?;
        Ok(&self.supports[p.0])
    }

    /// Coordinates of a depth-0 point.
    pub fn vertex_coords(&self, p: PointId) -> Result<&[f64]> {
        let (vs, ve) = self.depth_stratum(0)?;
        if p.0 < vs || p.0 >= ve {
            return Err(Error::OutOfChart(p));
        }
        let i = p.0 - vs;
        Ok(&self.coordinates[i * self.dim..(i + 1) * self.dim])
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    /// Cone traversal of `q` as seen through orientation `o`: the visit order
    /// of cone entries together with each entry's effective orientation.
    fn traverse_cone(&self, q: PointId, o: Orientation) -> Vec<(PointId, Orientation)> {
        let cone = &self.cones[q.0];
        let m = cone.len();
        if m == 0 {
            return Vec::new();
        }
        let point_dim = self.depth(q).unwrap();
        match point_dim {
            1 => {
                // entries are vertices: permute directly
                (0..m)
                    .map(|k| (cone[o.apply(m, k)].0, Orientation::IDENTITY))
                    .collect()
            }
            2 => {
                // polygon: a rotation by c visits edge (c+i) with its stored
                // orientation; a reflection starting at s visits edge
                // (s-1-i) reversed
                let mut out = Vec::with_capacity(m);
                for i in 0..m {
                    let (j, flip) = if o.0 >= 0 {
                        (
                            ((o.0 as i64 + i as i64).rem_euclid(m as i64)) as usize,
                            false,
                        )
                    } else {
                        let s = (-o.0 - 1) as i64;
                        (((s - 1 - i as i64).rem_euclid(m as i64)) as usize, true)
                    };
                    let (r, stored) = cone[j];
                    let mr = self.cones[r.0].len();
                    let eff = if flip {
                        Orientation(-2).compose(stored, mr)
                    } else {
                        stored.canonical(mr)
                    };
                    out.push((r, eff));
                }
                out
            }
            _ => {
                // 3-cells are only ever traversed as closure roots with the
                // identity orientation
                debug_assert_eq!(o, Orientation::IDENTITY);
                cone.to_vec()
            }
        }
    }

    /// Transitive closure of the cone map: `{p} ∪ cone(p) ∪ cone(cone(p)) …`,
    /// breadth-first by decreasing depth, ties by first encounter, with
    /// orientations composed along the first path that reaches each point.
    pub fn closure(&self, p: PointId) -> Result<Vec<(PointId, Orientation)>> {
        self.check_point(p)?;
        let mut out = vec![(p, Orientation::IDENTITY)];
        let mut seen = vec![false; self.num_points()];
        seen[p.0] = true;
        let mut frontier = vec![(p, Orientation::IDENTITY)];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &(q, oq) in &frontier {
                for (r, eff) in self.traverse_cone(q, oq) {
                    if !seen[r.0] {
                        seen[r.0] = true;
                        out.push((r, eff));
                        next.push((r, eff));
                    }
                }
            }
            frontier = next;
        }
        Ok(out)
    }

    /// Point set of the closure, without orientations.
    pub fn closure_points(&self, p: PointId) -> Result<Vec<PointId>> {
        Ok(self.closure(p)?.into_iter().map(|(q, _)| q).collect())
    }

    /// Transitive closure of the (possibly tree-augmented) support map.
    pub fn star(&self, p: PointId) -> Result<Vec<PointId>> {
        self.check_point(p)?;
        let mut out = vec![p];
        let mut seen = vec![false; self.num_points()];
        seen[p.0] = true;
        let mut frontier = vec![p];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &q in &frontier {
                for &r in &self.supports[q.0] {
                    if !seen[r.0] {
                        seen[r.0] = true;
                        out.push(r);
                        next.push(r);
                    }
                }
            }
            frontier = next;
        }
        Ok(out)
    }

    /// Vertices of the closure of `p`, in closure order.
    pub fn closure_vertices(&self, p: PointId) -> Result<Vec<PointId>> {
        let (vs, ve) = self.depth_stratum(0)?;
        Ok(self
            .closure(p)?
            .into_iter()
            .filter(|(q, _)| q.0 >= vs && q.0 < ve)
            .map(|(q, _)| q)
            .collect())
    }

    /// Shape of a cell (or any point of dimension >= 1), inferred from its
    /// dimension and cone size.
    pub fn point_shape(&self, p: PointId) -> Result<CellShape> {
        let d = self.depth(p)?;
        CellShape::from_cone_size(d, self.cones[p.0].len()).ok_or(Error::UnsupportedShape {
            depth: d,
            cone_size: self.cones[p.0].len(),
        })
    }

    /// Centroid of a point: its own coordinates for a vertex, otherwise the
    /// mean of its closure vertices. For the supported degree <= 2 elements
    /// this is exactly the physical node location owned by the point.
    pub fn point_centroid(&self, p: PointId) -> Result<Vec<f64>> {
        let verts = self.closure_vertices(p)?;
        if verts.is_empty() {
            return Err(Error::DegenerateCell(p));
        }
        let mut c = vec![0.0; self.dim];
        for &v in &verts {
            let x = self.vertex_coords(v)?;
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi;
            }
        }
        for ci in &mut c {
            *ci /= verts.len() as f64;
        }
        Ok(c)
    }

    /// Attach the reference tree describing the non-conformal interface types
    /// admissible in this mesh. Must precede `set_tree`.
    pub fn set_reference_tree(&mut self, rt: Arc<ReferenceTree>) {
        self.reference_tree = Some(rt);
    }

    pub fn reference_tree(&self) -> Option<&Arc<ReferenceTree>> {
        self.reference_tree.as_ref()
    }

    pub fn tree(&self) -> Option<&TreeOverlay> {
        self.tree.as_ref()
    }

    /// True when no overlay is attached or the overlay is empty; cone/support
    /// duality (both directions) holds exactly in this case.
    pub fn is_conformal(&self) -> bool {
        self.tree.as_ref().is_none_or(|t| t.is_empty())
    }
}
