//! Small sample meshes used throughout the tests and documentation.

use crate::builder::ComplexBuilder;
use crate::plex::{Plex, PointId};
use crate::reftree::ReferenceTree;
use crate::shape::CellShape;
use crate::tree::TreeEntry;
use std::sync::Arc;

/// Unit square split along the diagonal into two triangles.
pub fn two_triangles() -> Plex {
    let mut b = ComplexBuilder::new(2);
    b.add_cell(CellShape::Triangle, &[0, 1, 2]);
    b.add_cell(CellShape::Triangle, &[0, 2, 3]);
    b.finish(vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0])
        .unwrap()
}

/// A triangle reference tree holding a single green bisection: the coarse
/// cell plus two children obtained by splitting its second edge. Numbering:
/// cells 0-2, coarse edges a=3, b=4, c=5, bisector 6, halves 7 and 8,
/// coarse vertices 9-11, midpoint 12.
pub fn green_reference_tree() -> ReferenceTree {
    let mut b = ComplexBuilder::new(2);
    b.add_cell(CellShape::Triangle, &[0, 1, 2]);
    b.add_cell(CellShape::Triangle, &[3, 0, 1]);
    b.add_cell(CellShape::Triangle, &[0, 3, 2]);
    let coords = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.5, 0.5];
    let mut plex = b.finish(coords).unwrap();
    let entries = vec![
        TreeEntry {
            point: PointId(1),
            parent: PointId(0),
            child_id: PointId(1),
        },
        TreeEntry {
            point: PointId(2),
            parent: PointId(0),
            child_id: PointId(2),
        },
        TreeEntry {
            point: PointId(6),
            parent: PointId(0),
            child_id: PointId(6),
        },
        TreeEntry {
            point: PointId(7),
            parent: PointId(4),
            child_id: PointId(7),
        },
        TreeEntry {
            point: PointId(8),
            parent: PointId(4),
            child_id: PointId(8),
        },
        TreeEntry {
            point: PointId(12),
            parent: PointId(4),
            child_id: PointId(12),
        },
    ];
    plex.set_tree_self_referential(&entries).unwrap();
    ReferenceTree::from_treed_plex(plex, PointId(0), "redgreen").unwrap()
}

/// The 16-point three-triangle mesh with one non-conformal interface. The
/// interface edge is point 5 with child edges 6 and 7 and a hanging vertex
/// 14; childIDs reference [`green_reference_tree`].
pub fn three_triangle_nonconformal() -> Plex {
    let mut b = ComplexBuilder::new(2);
    // vertices: v1=0, apex=1, v0=2, u=3, hanging=4, spare=5
    b.add_cell(CellShape::Triangle, &[0, 1, 2]);
    b.add_cell(CellShape::Triangle, &[2, 4, 0]);
    b.add_cell(CellShape::Triangle, &[2, 3, 4]);
    let coords = vec![
        0.0, 2.0, // v1
        -1.0, 1.0, // apex
        0.0, 0.0, // v0
        1.0, 0.5, // u
        0.0, 1.0, // hanging vertex on the interface
        2.0, 2.0, // spare vertex referenced by no cell
    ];
    let mut plex = b.finish(coords).unwrap();
    plex.set_reference_tree(Arc::new(green_reference_tree()));
    plex.set_tree(&[
        TreeEntry {
            point: PointId(6),
            parent: PointId(5),
            child_id: PointId(7),
        },
        TreeEntry {
            point: PointId(7),
            parent: PointId(5),
            child_id: PointId(8),
        },
        TreeEntry {
            point: PointId(14),
            parent: PointId(5),
            child_id: PointId(12),
        },
    ])
    .unwrap();
    plex
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_matches_the_documented_numbering() {
        let plex = three_triangle_nonconformal();
        assert_eq!(plex.num_points(), 16);
        assert_eq!(plex.strata(), &vec![(0, 3), (3, 10), (10, 16)]);
        assert_eq!(plex.height_stratum(0).unwrap(), (0, 3));
        assert_eq!(plex.depth_stratum(0).unwrap(), (10, 16));
        // interface edge 5 with children 6, 7 and hanging vertex 14
        let tree = plex.tree().unwrap();
        assert_eq!(tree.children(PointId(5)).len(), 3);
    }

    #[test]
    fn star_of_interface_endpoint_reaches_the_fine_side() {
        // a hat function at an interface endpoint is supported on the fine
        // cells; the star must cover them through the augmented supports
        let plex = three_triangle_nonconformal();
        let endpoint = PointId(12);
        let star = plex.star(endpoint).unwrap();
        assert!(star.contains(&PointId(2)), "fine cell missing from star");
        assert!(star.contains(&PointId(0)), "coarse cell missing from star");
    }

    #[test]
    fn green_tree_halves_contract_by_one_half() {
        let rt = green_reference_tree();
        // child edge 7 covers the half of edge 4 touching its first vertex
        let m = rt.child_to_parent_map(PointId(7)).unwrap();
        assert!((m.apply(&[0.0])[0] - 0.0).abs() < 1e-14);
        assert!((m.apply(&[1.0])[0] - 0.5).abs() < 1e-14);
        assert!((m.a[(0, 0)].abs() - 0.5).abs() < 1e-14);
        let m = rt.child_to_parent_map(PointId(8)).unwrap();
        assert!((m.a[(0, 0)].abs() - 0.5).abs() < 1e-14);
    }
}

/// A chain of two hanging levels on one interface edge: the children of the
/// interface edge are themselves split, re-using the one-level childIDs of
/// [`green_reference_tree`] for each link.
pub fn two_level_chain() -> Plex {
    let mut b = ComplexBuilder::new(2);
    // vertices: v1=0, apex=1, v0=2, mid=3, quarter=4
    b.add_cell(CellShape::Triangle, &[0, 1, 2]);
    b.add_cell(CellShape::Triangle, &[2, 3, 0]);
    b.add_cell(CellShape::Triangle, &[2, 4, 3]);
    let coords = vec![
        0.0, 2.0, // v1
        -1.0, 1.0, // apex
        0.0, 0.0, // v0
        0.0, 1.0, // midpoint of the interface
        0.0, 0.5, // quarter point
    ];
    let mut plex = b.finish(coords).unwrap();
    plex.set_reference_tree(Arc::new(green_reference_tree()));
    plex.set_tree(&[
        TreeEntry {
            point: PointId(6),
            parent: PointId(5),
            child_id: PointId(7),
        },
        TreeEntry {
            point: PointId(7),
            parent: PointId(5),
            child_id: PointId(8),
        },
        TreeEntry {
            point: PointId(13),
            parent: PointId(5),
            child_id: PointId(12),
        },
        TreeEntry {
            point: PointId(8),
            parent: PointId(6),
            child_id: PointId(7),
        },
        TreeEntry {
            point: PointId(9),
            parent: PointId(6),
            child_id: PointId(8),
        },
        TreeEntry {
            point: PointId(14),
            parent: PointId(6),
            child_id: PointId(12),
        },
    ])
    .unwrap();
    plex
}
