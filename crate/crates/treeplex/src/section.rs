//! Point-to-dof layouts: the local layout over all points and the global
//! layout that excludes constrained points.

use crate::element::ReferenceElement;
use crate::error::{Error, Result};
use crate::plex::{Plex, PointId};

/// Per-point dof counts and offsets over the whole chart.
#[derive(Debug, Clone)]
pub struct Section {
    pub dof: Vec<usize>,
    pub offset: Vec<usize>,
    pub size: usize,
}

impl Section {
    /// Layout induced by an element: the dof count of a point depends only on
    /// its depth (nodes per point times field components).
    pub fn from_element(plex: &Plex, element: &ReferenceElement) -> Result<Section> {
        let (cs, ce) = plex.height_stratum(0)?;
        for c in cs..ce {
            if !plex.cone(PointId(c))?.is_empty()
                && plex.point_shape(PointId(c))? != element.shape()
            {
                return Err(Error::UnsupportedShape {
                    depth: plex.dim(),
                    cone_size: plex.cone(PointId(c))?.len(),
                });
            }
        }
        let n = plex.num_points();
        let mut dof = vec![0usize; n];
        for p in 0..n {
            let depth = plex.depth(PointId(p))?;
            dof[p] = element.nodes_per_depth(depth) * element.components();
        }
        let mut offset = vec![0usize; n];
        let mut total = 0;
        for p in 0..n {
            offset[p] = total;
            total += dof[p];
        }
        Ok(Section {
            dof,
            offset,
            size: total,
        })
    }

    pub fn dof(&self, p: PointId) -> usize {
        self.dof[p.0]
    }

    pub fn offset(&self, p: PointId) -> usize {
        self.offset[p.0]
    }
}

/// Global layout: constrained points (those with a tree parent) keep their
/// local dofs but contribute nothing here; the remaining dofs are numbered
/// contiguously in chart order.
#[derive(Debug, Clone)]
pub struct GlobalSection {
    pub constrained: Vec<bool>,
    pub dof: Vec<usize>,
    pub offset: Vec<usize>,
    pub size: usize,
}

impl GlobalSection {
    pub fn new(plex: &Plex, section: &Section) -> GlobalSection {
        let n = plex.num_points();
        let mut constrained = vec![false; n];
        if let Some(tree) = plex.tree() {
            for p in tree.constrained_points() {
                constrained[p.0] = true;
            }
        }
        let mut offset = vec![0usize; n];
        let mut total = 0;
        for p in 0..n {
            offset[p] = total;
            if !constrained[p] {
                total += section.dof[p];
            }
        }
        GlobalSection {
            constrained,
            dof: section.dof.clone(),
            offset,
            size: total,
        }
    }

    pub fn is_constrained(&self, p: PointId) -> bool {
        self.constrained[p.0]
    }

    pub fn offset(&self, p: PointId) -> usize {
        self.offset[p.0]
    }
}
