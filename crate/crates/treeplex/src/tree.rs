//! Hierarchical tree overlay for non-conformal meshes.
//!
//! Overlapping points of a hierarchical mesh are nested, and the nesting is
//! recorded separately from the Hasse diagram as a parent/child tree. Each
//! child also stores a *childID*: the point of the attached reference tree to
//! which it is analogous ("d is to its parent as eRef is to its parent").
//!
//! Attaching an overlay augments the support maps so that every (n+1)-cell
//! whose boundary intersects a point appears in its support. Cones are left
//! untouched, so `q ∈ cone(p) ⇒ p ∈ supp(q)` keeps holding while the converse
//! breaks exactly on non-conformal meshes.

use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};
use std::collections::BTreeSet;

/// One overlay record: `point` is a child of `parent`, analogous to the
/// reference-tree point `child_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeEntry {
    pub point: PointId,
    pub parent: PointId,
    pub child_id: PointId,
}

/// Parent and children maps plus cached anchors, attached to a [`Plex`].
#[derive(Debug, Clone, Default)]
pub struct TreeOverlay {
    /// `parent[p] = Some((parent, child_id))` for points with ancestors.
    parent: Vec<Option<(PointId, PointId)>>,
    children: Vec<Vec<PointId>>,
    anchors: Vec<Option<Vec<PointId>>>,
}

impl TreeOverlay {
    pub fn is_empty(&self) -> bool {
        self.parent.iter().all(|p| p.is_none())
    }

    pub fn parent(&self, p: PointId) -> Option<(PointId, PointId)> {
        self.parent.get(p.0).copied().flatten()
    }

    pub fn children(&self, p: PointId) -> &[PointId] {
        self.children.get(p.0).map_or(&[], |c| c.as_slice())
    }

    /// Points that have a parent, in chart order.
    pub fn constrained_points(&self) -> Vec<PointId> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|_| PointId(i)))
            .collect()
    }

    pub fn entries(&self) -> Vec<TreeEntry> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                p.map(|(parent, child_id)| TreeEntry {
                    point: PointId(i),
                    parent,
                    child_id,
                })
            })
            .collect()
    }

    fn cached_anchors(&self, p: PointId) -> Option<&Vec<PointId>> {
        self.anchors.get(p.0).and_then(|a| a.as_ref())
    }
}

impl Plex {
    /// Attach a tree overlay. A reference tree must already be attached with
    /// [`Plex::set_reference_tree`]; every `child_id` must name a point that
    /// itself has a parent there. Supports are re-derived and augmented, and
    /// anchors are computed for all constrained points.
    pub fn set_tree(&mut self, entries: &[TreeEntry]) -> Result<()> {
        let rt = self.reference_tree.clone().ok_or(Error::NoReferenceTree)?;
        for e in entries {
            let overlay = rt.plex().tree().expect("reference tree carries an overlay");
            if overlay.parent(e.child_id).is_none() {
                return Err(Error::BadChildId(e.child_id));
            }
            // a childID names an analogous point: same topological dimension
            if rt.plex().depth(e.child_id)? != self.depth(e.point)? {
                return Err(Error::InconsistentChildId(e.point));
            }
        }
        self.install_tree(entries)
    }

    /// Attach an overlay whose childIDs reference the mesh itself. This is
    /// how reference trees are built: they serve as their own reference.
    pub fn set_tree_self_referential(&mut self, entries: &[TreeEntry]) -> Result<()> {
        let parented: BTreeSet<PointId> = entries.iter().map(|e| e.point).collect();
        for e in entries {
            if !parented.contains(&e.child_id) {
                return Err(Error::BadChildId(e.child_id));
            }
        }
        self.install_tree(entries)
    }

    /// Attach an overlay without validating childIDs against a reference
    /// tree. Meant for tooling that inspects a mesh whose (custom) reference
    /// tree is not available; constraint construction still requires a real
    /// tree to be attached.
    pub fn set_tree_unvalidated(&mut self, entries: &[TreeEntry]) -> Result<()> {
        self.install_tree(entries)
    }

    fn install_tree(&mut self, entries: &[TreeEntry]) -> Result<()> {
        let n = self.num_points();
        let mut parent: Vec<Option<(PointId, PointId)>> = vec![None; n];
        for e in entries {
            self.check_point(e.point)?;
            self.check_point(e.parent)?;
            if self.depth(e.parent)? < self.depth(e.point)? {
                // a parent must have the same or higher dimension
                return Err(Error::InconsistentChildId(e.point));
            }
            parent[e.point.0] = Some((e.parent, e.child_id));
        }
        // cycle check by walking parent chains
        for e in entries {
            let mut hops = 0;
            let mut cur = e.point;
            while let Some((q, _)) = parent[cur.0] {
                cur = q;
                hops += 1;
                if hops > n {
                    return Err(Error::CycleDetected(e.point));
                }
            }
        }
        let mut children: Vec<Vec<PointId>> = vec![Vec::new(); n];
        for e in entries {
            children[e.parent.0].push(e.point);
        }
        for c in &mut children {
            c.sort_unstable();
        }
        self.tree = Some(TreeOverlay {
            parent,
            children,
            anchors: vec![None; n],
        });

        self.symmetrize_supports();
        self.augment_supports();
        self.cache_anchors()?;
        Ok(())
    }

    /// Chain length from a point to its ancestor-free ancestor.
    fn chain_depth(&self, p: PointId) -> usize {
        let tree = self.tree.as_ref().unwrap();
        let mut d = 0;
        let mut cur = p;
        while let Some((q, _)) = tree.parent(cur) {
            d += 1;
            cur = q;
        }
        d
    }

    /// For each child `c` with parent `q`, every member of `supp(q)` one
    /// depth above `c` has a boundary intersecting `c`, so it joins
    /// `supp(c)`. Parents are processed before their own children so that
    /// multi-level chains propagate.
    fn augment_supports(&mut self) {
        let tree = self.tree.as_ref().unwrap();
        let mut constrained = tree.constrained_points();
        constrained.sort_by_key(|&p| (self.chain_depth(p), p));
        for c in constrained {
            let (q, _) = self.tree.as_ref().unwrap().parent(c).unwrap();
            let dc = self.depth(c).unwrap();
            let gains: Vec<PointId> = self
                .support(q)
                .unwrap()
                .iter()
                .copied()
                .filter(|&r| self.depth(r).unwrap() == dc + 1)
                .collect();
            let supp = &mut self.supports_mut()[c.0];
            supp.extend(gains);
            supp.sort_unstable();
            supp.dedup();
        }
    }

    fn cache_anchors(&mut self) -> Result<()> {
        let constrained = self.tree.as_ref().unwrap().constrained_points();
        for p in constrained {
            let a = self.compute_anchors_uncached(p)?;
            self.tree.as_mut().unwrap().anchors[p.0] = Some(a);
        }
        Ok(())
    }

    /// Fixed point of iterating closure∘parent from `p`: the ancestor-free
    /// points whose functionals span the functionals of `p`. Sorted by chart
    /// index.
    fn compute_anchors_uncached(&self, p: PointId) -> Result<Vec<PointId>> {
        let tree = self.tree.as_ref().ok_or(Error::NotConstrained(p))?;
        let (q, _) = tree.parent(p).ok_or(Error::NotConstrained(p))?;
        let mut set: BTreeSet<PointId> = self.closure_points(q)?.into_iter().collect();
        loop {
            let constrained: Vec<PointId> = set
                .iter()
                .copied()
                .filter(|&s| tree.parent(s).is_some())
                .collect();
            if constrained.is_empty() {
                break;
            }
            for s in constrained {
                set.remove(&s);
                let (sq, _) = tree.parent(s).unwrap();
                set.extend(self.closure_points(sq)?);
            }
        }
        Ok(set.into_iter().collect())
    }

    /// The parent and childID of `p`, or `None` for ancestor-free points.
    pub fn tree_parent(&self, p: PointId) -> Result<Option<(PointId, PointId)>> {
        self.check_point(p)?;
        Ok(self.tree.as_ref().and_then(|t| t.parent(p)))
    }

    /// Direct children of `p` (empty if none).
    pub fn tree_children(&self, p: PointId) -> Result<&[PointId]> {
        self.check_point(p)?;
        Ok(self.tree.as_ref().map_or(&[], |t| t.children(p)))
    }

    /// Anchors of a constrained point (cached at `set_tree` time).
    pub fn anchors(&self, p: PointId) -> Result<&[PointId]> {
        self.check_point(p)?;
        let tree = self.tree.as_ref().ok_or(Error::NotConstrained(p))?;
        tree.cached_anchors(p)
            .map(|a| a.as_slice())
            .ok_or(Error::NotConstrained(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn example_overlay_fig5() {
        let plex = samples::three_triangle_nonconformal();
        let (c, d, e, delta) = (PointId(5), PointId(6), PointId(7), PointId(14));
        assert_eq!(plex.tree_parent(delta).unwrap(), Some((c, PointId(12))));
        assert_eq!(plex.tree_parent(d).unwrap(), Some((c, PointId(7))));
        assert_eq!(plex.tree_parent(e).unwrap(), Some((c, PointId(8))));
        assert_eq!(plex.tree_children(c).unwrap(), &[d, e, delta]);
        assert_eq!(plex.tree_children(delta).unwrap(), &[] as &[PointId]);
        // any vertex of cell A away from the interface has no parent
        assert_eq!(plex.tree_parent(PointId(11)).unwrap(), None);
    }

    #[test]
    fn augmented_supports_and_broken_duality() {
        let plex = samples::three_triangle_nonconformal();
        let (a_cell, d) = (PointId(0), PointId(6));
        // A ∈ supp(d) because the boundary of A intersects d
        assert!(plex.support(d).unwrap().contains(&a_cell));
        // ...but d is not one of the canonical edges of A
        assert!(!plex.cone(a_cell).unwrap().iter().any(|&(q, _)| q == d));
        // one-sided duality still holds everywhere
        for p in 0..plex.num_points() {
            for &(q, _) in plex.cone(PointId(p)).unwrap() {
                assert!(plex.support(q).unwrap().contains(&PointId(p)));
            }
        }
        assert!(!plex.is_conformal());
    }

    #[test]
    fn star_covers_coarse_cell_from_hanging_vertex() {
        let plex = samples::three_triangle_nonconformal();
        let delta = PointId(14);
        let star = plex.star(delta).unwrap();
        assert!(star.contains(&PointId(0)), "star(δ) must reach cell A");
    }

    #[test]
    fn anchors_single_level() {
        let plex = samples::three_triangle_nonconformal();
        let (c, d, delta) = (PointId(5), PointId(6), PointId(14));
        // anchors(δ) = clos(c) = {c and its endpoints}
        let mut expected = plex.closure_points(c).unwrap();
        expected.sort_unstable();
        assert_eq!(plex.anchors(delta).unwrap(), expected.as_slice());
        assert_eq!(plex.anchors(d).unwrap(), expected.as_slice());
        assert!(matches!(
            plex.anchors(PointId(0)),
            Err(Error::NotConstrained(_))
        ));
    }

    #[test]
    fn anchors_two_level_matches_brute_force() {
        let plex = samples::two_level_chain();
        let tree = plex.tree().unwrap();
        for p in tree.constrained_points() {
            // brute-force fixed point over sets
            let mut set: BTreeSet<PointId> = [p].into_iter().collect();
            loop {
                let mut next = BTreeSet::new();
                let mut changed = false;
                for &s in &set {
                    if let Some((q, _)) = tree.parent(s) {
                        next.extend(plex.closure_points(q).unwrap());
                        changed = true;
                    } else {
                        next.insert(s);
                    }
                }
                set = next;
                if !changed {
                    break;
                }
            }
            let expected: Vec<PointId> = set.into_iter().collect();
            assert_eq!(plex.anchors(p).unwrap(), expected.as_slice());
            for &a in plex.anchors(p).unwrap() {
                assert!(tree.parent(a).is_none(), "anchor {a} must be ancestor-free");
            }
        }
    }

    #[test]
    fn empty_overlay_keeps_mesh_conformal() {
        let mut plex = samples::two_triangles();
        let rt = std::sync::Arc::new(crate::reftree::ReferenceTree::default_tree(2, true).unwrap());
        plex.set_reference_tree(rt);
        plex.set_tree(&[]).unwrap();
        assert!(plex.is_conformal());
        for p in 0..plex.num_points() {
            for &q in plex.support(PointId(p)).unwrap() {
                assert!(plex.cone(q).unwrap().iter().any(|&(r, _)| r == PointId(p)));
            }
        }
    }

    #[test]
    fn set_tree_requires_a_reference_tree() {
        let mut plex = samples::two_triangles();
        let err = plex
            .set_tree(&[TreeEntry {
                point: PointId(2),
                parent: PointId(3),
                child_id: PointId(0),
            }])
            .unwrap_err();
        assert!(matches!(err, Error::NoReferenceTree));
    }

    #[test]
    fn parent_cycles_rejected() {
        let mut plex = samples::two_triangles();
        let rt = std::sync::Arc::new(crate::samples::green_reference_tree());
        plex.set_reference_tree(rt);
        let err = plex
            .set_tree(&[
                TreeEntry {
                    point: PointId(2),
                    parent: PointId(3),
                    child_id: PointId(7),
                },
                TreeEntry {
                    point: PointId(3),
                    parent: PointId(2),
                    child_id: PointId(7),
                },
            ])
            .unwrap_err();
        assert!(matches!(err, Error::CycleDetected(_)));
    }

    #[test]
    fn child_id_must_have_parent_in_reference_tree() {
        let mut plex = samples::two_triangles();
        let rt = std::sync::Arc::new(crate::reftree::ReferenceTree::default_tree(2, true).unwrap());
        let root = rt.coarse_cell();
        plex.set_reference_tree(rt);
        let err = plex
            .set_tree(&[TreeEntry {
                point: PointId(2),
                parent: PointId(3),
                child_id: root,
            }])
            .unwrap_err();
        assert!(matches!(err, Error::BadChildId(_)));
    }

    #[test]
    fn hierarchy_rule_geometric() {
        // child closure vertices lie in the convex hull of the parent's
        let plex = samples::three_triangle_nonconformal();
        let tree = plex.tree().unwrap();
        for e in tree.entries() {
            let pverts: Vec<Vec<f64>> = plex
                .closure_vertices(e.parent)
                .unwrap()
                .iter()
                .map(|&v| plex.vertex_coords(v).unwrap().to_vec())
                .collect();
            for v in plex.closure_vertices(e.point).unwrap() {
                let x = plex.vertex_coords(v).unwrap();
                // parent is an edge here: check x on the segment
                assert_eq!(pverts.len(), 2);
                let (a, b) = (&pverts[0], &pverts[1]);
                let t_num: f64 = (0..2).map(|i| (x[i] - a[i]) * (b[i] - a[i])).sum();
                let t_den: f64 = (0..2).map(|i| (b[i] - a[i]) * (b[i] - a[i])).sum();
                let t = t_num / t_den;
                assert!((-1e-14..=1.0 + 1e-14).contains(&t));
                for i in 0..2 {
                    let proj = a[i] + t * (b[i] - a[i]);
                    assert!((proj - x[i]).abs() < 1e-12);
                }
            }
        }
    }
}
