//! The grid domain: cell lattices, coordinates and problem instances.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default grid side length.
pub const DEFAULT_SIZE: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: usize,
    pub y: usize,
}

impl Coord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// True when `other` is one of the four orthogonal neighbours.
    pub fn is_adjacent(self, other: Coord) -> bool {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) == 1
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Free,
    Wall,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid dimensions must be non-zero, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("cell buffer has {got} cells, expected {expected}")]
    CellCount { expected: usize, got: usize },
    #[error("{0} is outside the grid")]
    OutOfBounds(Coord),
    #[error("{0} is a wall")]
    BlockedEndpoint(Coord),
    #[error("start and goal coincide at {0}")]
    StartIsGoal(Coord),
}

/// A `width` x `height` matrix of free and wall cells, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl Layout {
    pub fn filled(width: usize, height: usize, cell: Cell) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            cells: vec![cell; width * height],
        })
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<Cell>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyDimensions { width, height });
        }
        if cells.len() != width * height {
            return Err(GridError::CellCount {
                expected: width * height,
                got: cells.len(),
            });
        }
        Ok(Self { width, height, cells })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Coord) -> usize {
        c.y * self.width + c.x
    }

    pub fn coord(&self, index: usize) -> Coord {
        Coord::new(index % self.width, index / self.width)
    }

    /// Cell at `c`; out-of-bounds coordinates read as walls.
    pub fn get(&self, c: Coord) -> Cell {
        if self.contains(c) {
            self.cells[self.index(c)]
        } else {
            Cell::Wall
        }
    }

    pub fn is_free(&self, c: Coord) -> bool {
        self.get(c) == Cell::Free
    }

    pub fn set(&mut self, c: Coord, cell: Cell) {
        let i = self.index(c);
        self.cells[i] = cell;
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Coord> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Cell::Free)
            .map(|(i, _)| self.coord(i))
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    pub fn wall_count(&self) -> usize {
        self.cells.len() - self.free_count()
    }

    /// Wall cells in canonical emission order: ascending x, then ascending y.
    pub fn walls_column_major(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.width)
            .flat_map(move |x| (0..self.height).map(move |y| Coord::new(x, y)))
            .filter(|c| !self.is_free(*c))
    }

    /// Number of 4-adjacent free cell pairs.
    pub fn free_edge_count(&self) -> usize {
        let mut edges = 0;
        for c in self.free_cells() {
            if self.is_free(Coord::new(c.x + 1, c.y)) {
                edges += 1;
            }
            if self.is_free(Coord::new(c.x, c.y + 1)) {
                edges += 1;
            }
        }
        edges
    }

    /// Free cells reachable from `origin` (empty when `origin` is a wall).
    pub fn reachable_from(&self, origin: Coord) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        if !self.is_free(origin) {
            return seen;
        }
        let mut stack = vec![origin];
        seen[self.index(origin)] = true;
        while let Some(c) = stack.pop() {
            for n in crate::search::neighbors_in_layout(self, c) {
                let i = self.index(n);
                if !seen[i] {
                    seen[i] = true;
                    stack.push(n);
                }
            }
        }
        seen
    }

    /// True when every free cell can reach every other free cell.
    pub fn is_free_connected(&self) -> bool {
        match self.free_cells().next() {
            None => true,
            Some(first) => {
                let seen = self.reachable_from(first);
                seen.iter().filter(|s| **s).count() == self.free_count()
            }
        }
    }

    /// Connected with exactly `nodes - 1` edges.
    pub fn is_free_tree(&self) -> bool {
        let nodes = self.free_count();
        nodes > 0 && self.is_free_connected() && self.free_edge_count() + 1 == nodes
    }
}

/// A problem instance: a layout plus distinct free start and goal cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    layout: Layout,
    start: Coord,
    goal: Coord,
}

impl Grid {
    pub fn new(layout: Layout, start: Coord, goal: Coord) -> Result<Self, GridError> {
        for c in [start, goal] {
            if !layout.contains(c) {
                return Err(GridError::OutOfBounds(c));
            }
            if !layout.is_free(c) {
                return Err(GridError::BlockedEndpoint(c));
            }
        }
        if start == goal {
            return Err(GridError::StartIsGoal(start));
        }
        Ok(Self { layout, start, goal })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn into_layout(self) -> Layout {
        self.layout
    }

    pub fn width(&self) -> usize {
        self.layout.width
    }

    pub fn height(&self) -> usize {
        self.layout.height
    }

    pub fn start(&self) -> Coord {
        self.start
    }

    pub fn goal(&self) -> Coord {
        self.goal
    }

    pub fn is_free(&self, c: Coord) -> bool {
        self.layout.is_free(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_endpoints() {
        let mut layout = Layout::filled(5, 5, Cell::Free).unwrap();
        layout.set(Coord::new(2, 2), Cell::Wall);
        assert_eq!(
            Grid::new(layout.clone(), Coord::new(1, 1), Coord::new(1, 1)),
            Err(GridError::StartIsGoal(Coord::new(1, 1)))
        );
        assert_eq!(
            Grid::new(layout.clone(), Coord::new(2, 2), Coord::new(1, 1)),
            Err(GridError::BlockedEndpoint(Coord::new(2, 2)))
        );
        assert_eq!(
            Grid::new(layout, Coord::new(0, 0), Coord::new(5, 1)),
            Err(GridError::OutOfBounds(Coord::new(5, 1)))
        );
    }

    #[test]
    fn wall_order_is_column_major() {
        let mut layout = Layout::filled(3, 2, Cell::Free).unwrap();
        layout.set(Coord::new(2, 0), Cell::Wall);
        layout.set(Coord::new(0, 1), Cell::Wall);
        layout.set(Coord::new(0, 0), Cell::Wall);
        let walls: Vec<_> = layout.walls_column_major().collect();
        assert_eq!(walls, vec![Coord::new(0, 0), Coord::new(0, 1), Coord::new(2, 0)]);
    }

    #[test]
    fn tree_detection() {
        // a 3x1 corridor is a tree, a 2x2 block has a cycle
        let corridor = Layout::filled(3, 1, Cell::Free).unwrap();
        assert!(corridor.is_free_tree());
        let block = Layout::filled(2, 2, Cell::Free).unwrap();
        assert!(block.is_free_connected());
        assert!(!block.is_free_tree());
    }
}
