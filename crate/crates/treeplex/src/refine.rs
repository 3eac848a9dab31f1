//! Hierarchical refinement of a single cell of a conformal mesh.
//!
//! The refined cell is replaced by its reference-tree children; coarse
//! facets and edges that remain in use by unrefined neighbors become tree
//! parents of the new points covering them.

use crate::builder::ComplexBuilder;
use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};
use crate::reftree::ReferenceTree;
use crate::tree::TreeEntry;
use std::collections::HashMap;
use std::sync::Arc;

/// Canonical input vertex tuple of a cell, recovered from closure order.
pub fn cell_vertex_tuple(plex: &Plex, cell: PointId) -> Result<Vec<PointId>> {
    let shape = plex.point_shape(cell)?;
    let ref_plex = shape.reference_cell_plex();
    let (vs, _) = ref_plex.depth_stratum(0)?;
    let sigma: Vec<usize> = ref_plex
        .closure_vertices(PointId(0))?
        .iter()
        .map(|p| p.0 - vs)
        .collect();
    let closure = plex.closure_vertices(cell)?;
    let mut tuple = vec![PointId(0); closure.len()];
    for (k, &v) in closure.iter().enumerate() {
        tuple[sigma[k]] = v;
    }
    Ok(tuple)
}

/// Key for identifying a point across meshes: sorted closure vertex ids.
fn vertex_key(plex: &Plex, p: PointId) -> Vec<usize> {
    let mut k: Vec<usize> = plex
        .closure_vertices(p)
        .unwrap()
        .iter()
        .map(|v| v.0)
        .collect();
    k.sort_unstable();
    k
}

/// Replace `cell` by the children of the reference tree, producing a new
/// mesh with the hanging interface recorded in its overlay.
pub fn refine_cell(plex: &Plex, cell: PointId, reftree: Arc<ReferenceTree>) -> Result<Plex> {
    if plex.tree().is_some_and(|t| !t.is_empty()) {
        return Err(Error::AlreadyTreed);
    }
    let (cs, ce) = plex.height_stratum(0)?;
    if cell.0 < cs || cell.0 >= ce {
        return Err(Error::BadCell(cell));
    }
    let shape = plex.point_shape(cell)?;
    if reftree.shape() != shape {
        return Err(Error::ShapeMismatch);
    }
    let dim = plex.dim();
    let rt = reftree.plex();
    let rt_tree = rt.tree().ok_or(Error::NoReferenceTree)?;

    let (vs, ve) = plex.depth_stratum(0)?;
    let num_old_vertices = ve - vs;

    // correspondence between reference-tree coarse vertices and the cell's
    // vertices, by closure position
    let cell_closure_verts = plex.closure_vertices(cell)?;
    let rt_coarse_verts = rt.closure_vertices(reftree.coarse_cell())?;
    let mut rt_vertex_to_mesh: HashMap<PointId, usize> = HashMap::new();
    for (rv, mv) in rt_coarse_verts.iter().zip(&cell_closure_verts) {
        rt_vertex_to_mesh.insert(*rv, mv.0 - vs);
    }

    // new vertices for the fine points of the tree, placed through the
    // cell's geometric embedding
    let geom = crate::element::CellGeometry::new(
        shape,
        cell_closure_verts
            .iter()
            .map(|&v| plex.vertex_coords(v).map(|c| c.to_vec()))
            .collect::<Result<_>>()?,
    )?;
    let mut coords: Vec<f64> = plex.coordinates().to_vec();
    let (rvs, rve) = rt.depth_stratum(0)?;
    let mut next_vertex = num_old_vertices;
    for rv in rvs..rve {
        let rv = PointId(rv);
        if rt_vertex_to_mesh.contains_key(&rv) {
            continue;
        }
        let x = geom.map(rt.vertex_coords(rv)?)?;
        coords.extend(&x);
        rt_vertex_to_mesh.insert(rv, next_vertex);
        next_vertex += 1;
    }

    // rebuild: all surviving cells plus the fine cells
    let mut b = ComplexBuilder::new(dim);
    for c in cs..ce {
        if c == cell.0 {
            continue;
        }
        let tuple: Vec<usize> = cell_vertex_tuple(plex, PointId(c))?
            .iter()
            .map(|v| v.0 - vs)
            .collect();
        b.add_cell(plex.point_shape(PointId(c))?, &tuple);
    }
    let (rcs, rce) = rt.height_stratum(0)?;
    for rc in rcs..rce {
        let rc = PointId(rc);
        if rc == reftree.coarse_cell() {
            continue;
        }
        let tuple: Vec<usize> = cell_vertex_tuple(rt, rc)?
            .iter()
            .map(|rv| rt_vertex_to_mesh[rv])
            .collect();
        b.add_cell(shape, &tuple);
    }
    let mut new_plex = b.finish(coords)?;

    // lookup from sorted vertex sets to new mesh points
    let mut by_key: HashMap<Vec<usize>, PointId> = HashMap::new();
    for p in 0..new_plex.num_points() {
        by_key.insert(vertex_key(&new_plex, PointId(p)), PointId(p));
    }
    // map a reference-tree point to its new-mesh analog, if present
    let (new_vs, _) = new_plex.depth_stratum(0)?;
    let analog = |rp: PointId| -> Option<PointId> {
        let verts = rt.closure_vertices(rp).ok()?;
        let mut key: Vec<usize> = verts
            .iter()
            .map(|v| rt_vertex_to_mesh[v] + new_vs)
            .collect();
        key.sort_unstable();
        by_key.get(&key).copied()
    };

    // hanging interfaces: coarse facets/edges of the refined cell that
    // survived because a neighbor still uses them
    let mut entries: Vec<TreeEntry> = Vec::new();
    for rq in rt.closure_points(reftree.coarse_cell())? {
        if rq == reftree.coarse_cell() || rt_tree.children(rq).is_empty() {
            continue;
        }
        let Some(parent) = analog(rq) else {
            continue;
        };
        let fine: Vec<PointId> = rt_tree
            .children(rq)
            .iter()
            .filter_map(|&c| analog(c))
            .collect();
        if fine.len() != rt_tree.children(rq).len() {
            return Err(Error::InconsistentChildId(parent));
        }
        entries.extend(reftree.match_mesh_interface(&new_plex, parent, &fine)?);
    }
    new_plex.set_reference_tree(reftree);
    new_plex.set_tree(&entries)?;
    Ok(new_plex)
}
