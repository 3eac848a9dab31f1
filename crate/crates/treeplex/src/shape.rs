//! Supported cell shapes and their canonical reference layouts.
//!
//! Reference coordinates follow the crate-wide convention: simplices live on
//! the unit simplex `{x >= 0, sum(x) <= 1}`, hypercubes on `[-1, 1]^d`.

use crate::builder::ComplexBuilder;
use crate::error::{Error, Result};
use crate::plex::Plex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellShape {
    Segment,
    Triangle,
    Quadrilateral,
    Tetrahedron,
    Hexahedron,
}

impl CellShape {
    pub fn dim(self) -> usize {
        match self {
            CellShape::Segment => 1,
            CellShape::Triangle | CellShape::Quadrilateral => 2,
            CellShape::Tetrahedron | CellShape::Hexahedron => 3,
        }
    }

    pub fn is_simplex(self) -> bool {
        matches!(
            self,
            CellShape::Segment | CellShape::Triangle | CellShape::Tetrahedron
        )
    }

    pub fn num_vertices(self) -> usize {
        match self {
            CellShape::Segment => 2,
            CellShape::Triangle => 3,
            CellShape::Quadrilateral => 4,
            CellShape::Tetrahedron => 4,
            CellShape::Hexahedron => 8,
        }
    }

    /// Cone size of a cell of this shape (vertices in 1D, edges in 2D,
    /// faces in 3D).
    pub fn cone_size(self) -> usize {
        match self {
            CellShape::Segment => 2,
            CellShape::Triangle => 3,
            CellShape::Quadrilateral => 4,
            CellShape::Tetrahedron => 4,
            CellShape::Hexahedron => 6,
        }
    }

    /// Identify the shape of a point from its dimension and cone size.
    pub fn from_cone_size(dim: usize, cone_size: usize) -> Option<CellShape> {
        match (dim, cone_size) {
            (1, 2) => Some(CellShape::Segment),
            (2, 3) => Some(CellShape::Triangle),
            (2, 4) => Some(CellShape::Quadrilateral),
            (3, 4) => Some(CellShape::Tetrahedron),
            (3, 6) => Some(CellShape::Hexahedron),
            _ => None,
        }
    }

    pub fn from_flags(dim: usize, simplex: bool) -> Result<CellShape> {
        match (dim, simplex) {
            (1, _) => Ok(CellShape::Segment),
            (2, true) => Ok(CellShape::Triangle),
            (2, false) => Ok(CellShape::Quadrilateral),
            (3, true) => Ok(CellShape::Tetrahedron),
            (3, false) => Ok(CellShape::Hexahedron),
            (d, _) => Err(Error::BadDimension(d)),
        }
    }

    /// Reference vertex coordinates in construction order.
    pub fn reference_vertices(self) -> Vec<Vec<f64>> {
        match self {
            CellShape::Segment => vec![vec![0.0], vec![1.0]],
            CellShape::Triangle => vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            CellShape::Quadrilateral => vec![
                vec![-1.0, -1.0],
                vec![1.0, -1.0],
                vec![1.0, 1.0],
                vec![-1.0, 1.0],
            ],
            CellShape::Tetrahedron => vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            CellShape::Hexahedron => vec![
                vec![-1.0, -1.0, -1.0],
                vec![1.0, -1.0, -1.0],
                vec![1.0, 1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
                vec![-1.0, -1.0, 1.0],
                vec![1.0, -1.0, 1.0],
                vec![1.0, 1.0, 1.0],
                vec![-1.0, 1.0, 1.0],
            ],
        }
    }

    /// Faces of a 3D cell as vertex-index tuples, oriented outward.
    pub fn face_tuples(self) -> Vec<Vec<usize>> {
        match self {
            CellShape::Tetrahedron => {
                vec![vec![1, 2, 3], vec![0, 3, 2], vec![0, 1, 3], vec![0, 2, 1]]
            }
            CellShape::Hexahedron => vec![
                vec![0, 3, 2, 1], // bottom
                vec![4, 5, 6, 7], // top
                vec![0, 1, 5, 4], // front
                vec![1, 2, 6, 5], // right
                vec![2, 3, 7, 6], // back
                vec![3, 0, 4, 7], // left
            ],
            _ => Vec::new(),
        }
    }

    /// Whether this shape is valid in a mesh of the given dimension as a cell.
    pub fn matches_dim(self, dim: usize) -> bool {
        self.dim() == dim
    }

    /// The canonical reference complex: a single-cell plex over the reference
    /// vertices. Closure order of its cell defines node and geometry ordering
    /// everywhere else in the crate.
    pub fn reference_cell_plex(self) -> Plex {
        let mut b = ComplexBuilder::new(self.dim());
        let ids: Vec<usize> = (0..self.num_vertices()).collect();
        b.add_cell(self, &ids);
        let coords = self.reference_vertices().into_iter().flatten().collect();
        b.finish(coords).expect("reference complex is valid")
    }
}
