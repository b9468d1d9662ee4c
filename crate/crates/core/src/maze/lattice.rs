//! Node lattice shared by the spanning-tree generators.
//!
//! Node `(i, j)` sits on grid cell `(2i + 1, 2j + 1)`. A passage between two
//! neighbouring nodes frees the cell between them; every other cell stays a
//! wall. A `W x H` grid holds `floor((W - 1) / 2) x floor((H - 1) / 2)` nodes.

use crate::grid::{Cell, Coord, Layout};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLattice {
    pub cols: usize,
    pub rows: usize,
    /// Passages as pairs of node indices (row-major).
    pub edges: Vec<(usize, usize)>,
}

impl NodeLattice {
    pub fn for_grid(width: usize, height: usize) -> Self {
        Self {
            cols: (width - 1) / 2,
            rows: (height - 1) / 2,
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.cols * self.rows
    }

    /// Lattice neighbours in the order left, right, up, down.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> {
        let (cols, rows) = (self.cols, self.rows);
        let (i, j) = (node % cols, node / cols);
        [
            (i > 0).then(|| node - 1),
            (i + 1 < cols).then(|| node + 1),
            (j > 0).then(|| node - cols),
            (j + 1 < rows).then(|| node + cols),
        ]
        .into_iter()
        .flatten()
    }

    /// Every lattice edge once, as (lower, higher) node index.
    pub fn all_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for node in 0..self.node_count() {
            for n in self.neighbors(node) {
                if n > node {
                    out.push((node, n));
                }
            }
        }
        out
    }

    pub fn node_cell(&self, node: usize) -> Coord {
        Coord::new(2 * (node % self.cols) + 1, 2 * (node / self.cols) + 1)
    }

    /// Cell freed by a passage between two adjacent nodes.
    pub fn edge_cell(&self, a: usize, b: usize) -> Coord {
        let (ca, cb) = (self.node_cell(a), self.node_cell(b));
        Coord::new((ca.x + cb.x) / 2, (ca.y + cb.y) / 2)
    }

    pub fn render(&self, width: usize, height: usize) -> Layout {
        let mut layout = Layout::filled(width, height, Cell::Wall).expect("non-empty grid");
        for node in 0..self.node_count() {
            layout.set(self.node_cell(node), Cell::Free);
        }
        for &(a, b) in &self.edges {
            layout.set(self.edge_cell(a, b), Cell::Free);
        }
        layout
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_dimensions() {
        let l = NodeLattice::for_grid(30, 30);
        assert_eq!((l.cols, l.rows), (14, 14));
        assert_eq!(l.node_cell(0), Coord::new(1, 1));
        assert_eq!(l.node_cell(195), Coord::new(27, 27));
        let small = NodeLattice::for_grid(5, 5);
        assert_eq!(small.all_edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(small.edge_cell(0, 1), Coord::new(2, 1));
    }
}
