//! Forest-of-quadtrees (2D) and forest-of-octrees (3D) on unit roots placed
//! on an integer lattice, with 2:1 balance and conversion to a treed plex.

use crate::builder::ComplexBuilder;
use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};
use crate::reftree::ReferenceTree;
use crate::shape::CellShape;
use crate::tree::TreeEntry;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

pub const MAX_LEVEL: u32 = 29;

/// One quadrant/octant: refinement level and Morton index within its root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leaf {
    pub level: u32,
    pub morton: u128,
}

impl Leaf {
    /// Per-axis cell coordinates at this leaf's level (x-major interleave).
    pub fn coords(&self, dim: usize) -> [u64; 3] {
        let mut c = [0u64; 3];
        for bit in 0..self.level {
            for (a, ca) in c.iter_mut().enumerate().take(dim) {
                if self.morton >> (bit as usize * dim + a) & 1 == 1 {
                    *ca |= 1 << bit;
                }
            }
        }
        c
    }

    /// Linear-tree sort key: Morton index of the lower corner at the finest
    /// admissible level, shallower leaves first on ties.
    fn sort_key(&self, dim: usize) -> (u128, u32) {
        (
            self.morton << (dim as u32 * (MAX_LEVEL - self.level)),
            self.level,
        )
    }
}

#[derive(Debug, Clone)]
pub struct Forest {
    dim: usize,
    roots: Vec<[i64; 3]>,
    /// per-root leaves in linear-tree order
    leaves: Vec<Vec<Leaf>>,
}

/// Global integer bounding box of a leaf at the common scale `2^MAX_LEVEL`.
fn leaf_box(dim: usize, root: &[i64; 3], leaf: &Leaf) -> ([i64; 3], [i64; 3]) {
    let s = 1i64 << (MAX_LEVEL - leaf.level);
    let c = leaf.coords(dim);
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for a in 0..dim {
        lo[a] = root[a] * (1i64 << MAX_LEVEL) + c[a] as i64 * s;
        hi[a] = lo[a] + s;
    }
    (lo, hi)
}

/// Number of axes where two boxes touch in a point vs overlap in a segment;
/// `None` when they are disjoint or overlap in volume.
fn adjacency(dim: usize, a: (&[i64; 3], &[i64; 3]), b: (&[i64; 3], &[i64; 3])) -> Option<usize> {
    let mut touch = 0;
    for ax in 0..dim {
        let lo = a.0[ax].max(b.0[ax]);
        let hi = a.1[ax].min(b.1[ax]);
        if lo > hi {
            return None;
        }
        if lo == hi {
            touch += 1;
        }
    }
    if touch == 0 {
        None
    } else {
        Some(touch)
    }
}

impl Forest {
    /// Forest with one level-0 leaf per root.
    pub fn new(dim: usize, roots: Vec<[i64; 3]>) -> Result<Forest> {
        if !(2..=3).contains(&dim) || roots.is_empty() {
            return Err(Error::BadDimension(dim));
        }
        let leaves = vec![
            vec![Leaf {
                level: 0,
                morton: 0
            }];
            roots.len()
        ];
        Ok(Forest { dim, roots, leaves })
    }

    pub fn unit(dim: usize) -> Result<Forest> {
        Forest::new(dim, vec![[0, 0, 0]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.iter().map(|l| l.len()).sum()
    }

    pub fn leaves(&self, root: usize) -> &[Leaf] {
        &self.leaves[root]
    }

    /// Replace every flagged leaf by its 2^dim children, preserving the
    /// linear-tree order.
    pub fn refine<F>(&self, flag: F) -> Result<Forest>
    where
        F: Fn(usize, u32, u128) -> bool,
    {
        let children = 1u128 << self.dim;
        let mut out = Vec::with_capacity(self.leaves.len());
        for (r, leaves) in self.leaves.iter().enumerate() {
            let mut new = Vec::with_capacity(leaves.len());
            for leaf in leaves {
                if flag(r, leaf.level, leaf.morton) {
                    if leaf.level >= MAX_LEVEL {
                        return Err(Error::LevelOverflow);
                    }
                    for k in 0..children {
                        new.push(Leaf {
                            level: leaf.level + 1,
                            morton: leaf.morton * children + k,
                        });
                    }
                } else {
                    new.push(*leaf);
                }
            }
            new.sort_by_key(|l| l.sort_key(self.dim));
            out.push(new);
        }
        Ok(Forest {
            dim: self.dim,
            roots: self.roots.clone(),
            leaves: out,
        })
    }

    /// Refine toward the origin corner of root 0, `depth` times.
    pub fn corner_refined(dim: usize, depth: u32) -> Result<Forest> {
        let mut f = Forest::unit(dim)?;
        for _ in 0..depth {
            f = f.refine(|r, _, m| r == 0 && m == 0)?;
        }
        Ok(f)
    }

    /// Uniformly refine all leaves `depth` times.
    pub fn uniform(dim: usize, depth: u32) -> Result<Forest> {
        let mut f = Forest::unit(dim)?;
        for _ in 0..depth {
            f = f.refine(|_, _, _| true)?;
        }
        Ok(f)
    }

    fn all_boxes(&self) -> Vec<(usize, usize, [i64; 3], [i64; 3])> {
        let mut out = Vec::new();
        for (r, leaves) in self.leaves.iter().enumerate() {
            for (i, leaf) in leaves.iter().enumerate() {
                let (lo, hi) = leaf_box(self.dim, &self.roots[r], leaf);
                out.push((r, i, lo, hi));
            }
        }
        out
    }

    /// True when every pair of edge/face-adjacent leaves differs by at most
    /// one level.
    pub fn is_balanced(&self) -> bool {
        let boxes = self.all_boxes();
        for (i, a) in boxes.iter().enumerate() {
            for b in boxes.iter().skip(i + 1) {
                let la = self.leaves[a.0][a.1].level;
                let lb = self.leaves[b.0][b.1].level;
                if la.abs_diff(lb) <= 1 {
                    continue;
                }
                if let Some(touch) = adjacency(self.dim, (&a.2, &a.3), (&b.2, &b.3)) {
                    if touch < self.dim {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Minimal superset of leaves satisfying the 2:1 rule across edges and
    /// faces, found by refining violating coarse leaves to a fixed point.
    pub fn balance_2to1(&self) -> Forest {
        let mut forest = self.clone();
        loop {
            let boxes = forest.all_boxes();
            let mut to_refine: Vec<(usize, u32, u128)> = Vec::new();
            for (i, a) in boxes.iter().enumerate() {
                for b in boxes.iter().skip(i + 1) {
                    let la = forest.leaves[a.0][a.1].level;
                    let lb = forest.leaves[b.0][b.1].level;
                    if la.abs_diff(lb) <= 1 {
                        continue;
                    }
                    if let Some(touch) = adjacency(forest.dim, (&a.2, &a.3), (&b.2, &b.3)) {
                        if touch < forest.dim {
                            let (r, i) = if la < lb { (a.0, a.1) } else { (b.0, b.1) };
                            let leaf = forest.leaves[r][i];
                            to_refine.push((r, leaf.level, leaf.morton));
                        }
                    }
                }
            }
            if to_refine.is_empty() {
                return forest;
            }
            forest = forest
                .refine(|r, l, m| {
                    to_refine
                        .iter()
                        .any(|&(rr, ll, mm)| (rr, ll, mm) == (r, l, m))
                })
                .expect("balance never exceeds the level cap");
        }
    }

    /// Convert to a plex: one cell per leaf, conformal faces identified by
    /// shared corners, hanging interfaces recorded in the tree overlay with
    /// childIDs into the default hypercube reference tree.
    pub fn convert_to_plex(&self) -> Result<Plex> {
        let dim = self.dim;
        let shape = CellShape::from_flags(dim, false)?;
        let scale = 1i64 << MAX_LEVEL;

        // assign vertex ids in first-encounter order over sorted leaves
        let mut vid: BTreeMap<[i64; 3], usize> = BTreeMap::new();
        let mut vcoords: Vec<[i64; 3]> = Vec::new();
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let corner_offsets: &[[i64; 3]] = if dim == 2 {
            &[[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
        } else {
            &[
                [0, 0, 0],
                [1, 0, 0],
                [1, 1, 0],
                [0, 1, 0],
                [0, 0, 1],
                [1, 0, 1],
                [1, 1, 1],
                [0, 1, 1],
            ]
        };
        for (r, leaves) in self.leaves.iter().enumerate() {
            for leaf in leaves {
                let (lo, hi) = leaf_box(dim, &self.roots[r], leaf);
                let s = hi[0] - lo[0];
                let mut cell = Vec::with_capacity(corner_offsets.len());
                for off in corner_offsets {
                    let mut key = [0i64; 3];
                    for a in 0..dim {
                        key[a] = lo[a] + off[a] * s;
                    }
                    let next = vcoords.len();
                    let id = *vid.entry(key).or_insert_with(|| {
                        vcoords.push(key);
                        next
                    });
                    cell.push(id);
                }
                cells.push(cell);
            }
        }
        let mut b = ComplexBuilder::new(dim);
        for cell in &cells {
            b.add_cell(shape, cell);
        }
        let mut coords = Vec::with_capacity(vcoords.len() * dim);
        for c in &vcoords {
            for a in 0..dim {
                coords.push(c[a] as f64 / scale as f64);
            }
        }
        let mut plex = b.finish(coords)?;

        // integer boxes for every point below the cell stratum
        let (vs, _) = plex.depth_stratum(0)?;
        let vertex_int = |p: PointId| vcoords[p.0 - vs];
        let mut boxes: HashMap<PointId, ([i64; 3], [i64; 3])> = HashMap::new();
        for h in 1..=dim {
            let (s, e) = plex.height_stratum(h)?;
            for p in s..e {
                let p = PointId(p);
                let verts = plex.closure_vertices(p)?;
                let mut lo = [i64::MAX; 3];
                let mut hi = [i64::MIN; 3];
                for &v in &verts {
                    let c = vertex_int(v);
                    for a in 0..dim {
                        lo[a] = lo[a].min(c[a]);
                        hi[a] = hi[a].max(c[a]);
                    }
                }
                boxes.insert(p, (lo, hi));
            }
        }

        // nested-pair search: minimal strict superset per point
        let contains = |outer: &([i64; 3], [i64; 3]), inner: &([i64; 3], [i64; 3])| -> bool {
            for a in 0..dim {
                let (ol, oh) = (outer.0[a], outer.1[a]);
                let (il, ih) = (inner.0[a], inner.1[a]);
                if ol == oh {
                    if il != ol || ih != ol {
                        return false;
                    }
                } else if il == ih {
                    // inner flat where outer varies: must be strictly inside
                    if il <= ol || il >= oh {
                        return false;
                    }
                } else if il < ol || ih > oh {
                    return false;
                }
            }
            true
        };
        let extent = |b: &([i64; 3], [i64; 3])| -> i64 {
            (0..dim).map(|a| b.1[a] - b.0[a]).max().unwrap_or(0)
        };

        let mut nested: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
        let mut points: Vec<PointId> = boxes.keys().copied().collect();
        points.sort_unstable();
        for &p in &points {
            let pb = &boxes[&p];
            let mut best: Option<(usize, i64, PointId)> = None;
            for &q in &points {
                if q == p {
                    continue;
                }
                let qb = &boxes[&q];
                let dq = plex.depth(q)?;
                if contains(qb, pb) && !contains(pb, qb) {
                    let key = (dq, extent(qb), q);
                    if best.is_none_or(|(bd, be, bq)| key < (bd, be, bq)) {
                        best = Some(key);
                    }
                }
            }
            if let Some((_, ext, q)) = best {
                // 2:1 balance means a parent is exactly twice the child
                if ext != 2 * extent(pb) && !(extent(pb) == 0 && plex.depth(q)? >= 1) {
                    return Err(Error::Unbalanced);
                }
                nested.entry(q).or_default().push(p);
            }
        }

        let reftree = Arc::new(ReferenceTree::default_tree(dim, false)?);
        let mut entries: Vec<TreeEntry> = Vec::new();
        for (parent, fine) in &nested {
            let e = reftree
                .match_mesh_interface(&plex, *parent, fine)
                .map_err(|_| Error::Unbalanced)?;
            entries.extend(e);
        }
        plex.set_reference_tree(reftree);
        plex.set_tree(&entries)?;
        Ok(plex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_counts() {
        let f = Forest::unit(2).unwrap();
        let f1 = f.refine(|_, _, _| true).unwrap();
        assert_eq!(f1.num_leaves(), 4);
        let f2 = f1.refine(|_, _, m| m == 0).unwrap();
        assert_eq!(f2.num_leaves(), 7);
        let u2 = Forest::uniform(2, 2).unwrap();
        assert_eq!(u2.num_leaves(), 16);
        // strictly increasing Morton order at a uniform level
        let leaves = u2.leaves(0);
        for w in leaves.windows(2) {
            assert!(w[0].morton < w[1].morton);
        }
    }

    #[test]
    fn level_cap() {
        let mut f = Forest::unit(2).unwrap();
        for _ in 0..MAX_LEVEL {
            f = f.refine(|_, _, m| m == 0).unwrap();
        }
        assert!(matches!(
            f.refine(|_, _, m| m == 0),
            Err(Error::LevelOverflow)
        ));
    }

    #[test]
    fn leaves_cover_each_root() {
        let f = Forest::corner_refined(2, 4).unwrap().balance_2to1();
        for leaves in &f.leaves {
            let total: u128 = leaves
                .iter()
                .map(|l| 1u128 << (2 * (MAX_LEVEL - l.level)))
                .sum();
            assert_eq!(total, 1u128 << (2 * MAX_LEVEL));
        }
    }

    /// Level-3 leaves in the inner-diagonal corner child touch level-1
    /// leaves directly: a 2-level jump.
    fn unbalanced(dim: usize) -> Forest {
        let inner = (1u128 << dim) - 1;
        Forest::uniform(dim, 1)
            .unwrap()
            .refine(|_, _, m| m == 0)
            .unwrap()
            .refine(|_, l, m| l == 2 && m == inner)
            .unwrap()
    }

    #[test]
    fn corner_cascade_is_already_balanced() {
        let f = Forest::corner_refined(2, 3).unwrap();
        assert!(f.is_balanced());
        assert_eq!(f.balance_2to1().num_leaves(), f.num_leaves());
    }

    #[test]
    fn balance_is_idempotent_and_verified_by_oracle() {
        for dim in [2usize, 3] {
            let f = unbalanced(dim);
            assert!(!f.is_balanced(), "dim {dim}");
            let b = f.balance_2to1();
            assert!(b.is_balanced(), "dim {dim}");
            let again = b.balance_2to1();
            assert_eq!(again.num_leaves(), b.num_leaves());
        }
    }

    #[test]
    fn balance_across_roots() {
        let f = Forest::new(2, vec![[0, 0, 0], [1, 0, 0]]).unwrap();
        // deep refinement near the shared edge of root 0
        let f = f.refine(|r, _, _| r == 0).unwrap();
        let f = f.refine(|r, _, m| r == 0 && m == 1).unwrap();
        let f = f.refine(|r, _, m| r == 0 && m == 7).unwrap();
        let b = f.balance_2to1();
        assert!(b.is_balanced());
        assert!(b.leaves(1).len() > 1, "neighbor root must refine");
    }

    #[test]
    fn uniform_conversion_is_conformal() {
        let plex = Forest::uniform(2, 1).unwrap().convert_to_plex().unwrap();
        let (cs, ce) = plex.height_stratum(0).unwrap();
        assert_eq!(ce - cs, 4);
        assert!(plex.is_conformal());
    }

    #[test]
    fn seven_leaf_conversion_has_hanging_interfaces() {
        let f = Forest::uniform(2, 1)
            .unwrap()
            .refine(|_, _, m| m == 0)
            .unwrap();
        assert_eq!(f.num_leaves(), 7);
        let plex = f.convert_to_plex().unwrap();
        let tree = plex.tree().unwrap();
        // two hanging edges, each with 2 child edges + 1 child vertex
        assert_eq!(tree.constrained_points().len(), 6);
        let parents: std::collections::BTreeSet<PointId> =
            tree.entries().iter().map(|e| e.parent).collect();
        assert_eq!(parents.len(), 2);
        for p in parents {
            assert_eq!(tree.children(p).len(), 3);
        }
    }

    #[test]
    fn octant_conversion_matches_reference_tree_counts() {
        let f = Forest::uniform(3, 1)
            .unwrap()
            .refine(|_, _, m| m == 0)
            .unwrap();
        let plex = f.convert_to_plex().unwrap();
        let tree = plex.tree().unwrap();
        // three hanging faces (4 faces + 4 edges + 1 vertex each) and nine
        // surviving coarse edges of the refined octant (2 halves + midpoint)
        let mut face_entries = 0;
        let mut edge_entries = 0;
        for e in tree.entries() {
            match plex.depth(e.parent).unwrap() {
                2 => face_entries += 1,
                1 => edge_entries += 1,
                _ => panic!("unexpected parent depth"),
            }
        }
        assert_eq!(face_entries, 3 * 9);
        assert_eq!(edge_entries, 9 * 3);
    }

    #[test]
    fn unbalanced_forest_rejected() {
        let f = unbalanced(2);
        assert!(matches!(f.convert_to_plex(), Err(Error::Unbalanced)));
    }

    #[test]
    fn child_maps_round_trip_leaf_geometry() {
        let f = Forest::uniform(2, 1)
            .unwrap()
            .refine(|_, _, m| m == 0)
            .unwrap();
        let plex = f.convert_to_plex().unwrap();
        let rt = plex.reference_tree().unwrap().clone();
        for e in plex.tree().unwrap().entries() {
            let map = rt.child_to_parent_map(e.child_id).unwrap();
            // child centroid through the map lands on the parent's centroid
            // when the child is centered, and inside the parent in any case
            let cdim = plex.depth(e.point).unwrap();
            let xi = vec![0.5; cdim]; // centroid of the child's own frame
            let eta = map.apply(&xi);
            for v in &eta {
                assert!((-1e-12..=1.0 + 1e-12).contains(v));
            }
        }
    }
}
