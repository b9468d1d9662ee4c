//! Tracing A*, the breadth-first oracle, and plan validation.
//!
//! The search expands nodes in ascending `(f, insertion sequence)` order, so
//! ties on `f = g + h` are broken first-in first-out. Successors are visited
//! in the fixed order left, right, up, down. Every expansion logs a `close`
//! event and every (re-)enqueue logs a `create` event; the start node is closed
//! without a preceding create.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Coord, Grid, Layout};

/// `|a.x - b.x| + |a.y - b.y|`.
pub fn manhattan(a: Coord, b: Coord) -> usize {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}

/// In-bounds free neighbours of `c`, ordered (x-1,y), (x+1,y), (x,y-1), (x,y+1).
pub fn neighbors_in_order(grid: &Grid, c: Coord) -> Vec<Coord> {
    neighbors_in_layout(grid.layout(), c).collect()
}

pub(crate) fn neighbors_in_layout(layout: &Layout, c: Coord) -> impl Iterator<Item = Coord> + '_ {
    let candidates = [
        c.x.checked_sub(1).map(|x| Coord::new(x, c.y)),
        Some(Coord::new(c.x + 1, c.y)),
        c.y.checked_sub(1).map(|y| Coord::new(c.x, y)),
        Some(Coord::new(c.x, c.y + 1)),
    ];
    candidates.into_iter().flatten().filter(move |n| layout.is_free(*n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Create,
    Close,
}

impl EventKind {
    pub fn word(self) -> &'static str {
        match self {
            EventKind::Create => "create",
            EventKind::Close => "close",
        }
    }
}

/// One logged A* operation with the node's path cost `g` and heuristic `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub pos: Coord,
    pub g: usize,
    pub h: usize,
}

impl TraceEvent {
    pub fn f(&self) -> usize {
        self.g + self.h
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} c{} c{}",
            self.kind.word(),
            self.pos.x,
            self.pos.y,
            self.g,
            self.h
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn closes(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Close)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Plan {
    pub cells: Vec<Coord>,
}

impl Plan {
    pub fn new(cells: Vec<Coord>) -> Self {
        Self { cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Number of moves, i.e. cells minus one.
    pub fn cost(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub trace: Trace,
    pub plan: Plan,
    pub difficulty: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("goal unreachable after {} trace events", trace.len())]
pub struct Unsolvable {
    /// Everything the search logged before the open list ran dry.
    pub trace: Trace,
}

/// Number of operations in a trace. Panics on an empty trace.
pub fn difficulty(trace: &Trace) -> usize {
    assert!(!trace.is_empty(), "difficulty of an empty trace");
    trace.len()
}

const NO_PARENT: usize = usize::MAX;

/// Runs A* from `grid.start()` to `grid.goal()` with the Manhattan heuristic,
/// logging every create and close.
pub fn astar_trace(grid: &Grid) -> Result<SearchResult, Unsolvable> {
    let layout = grid.layout();
    let goal = grid.goal();
    let n = layout.width() * layout.height();

    let mut best_g = vec![usize::MAX; n];
    let mut parent = vec![NO_PARENT; n];
    let mut closed = vec![false; n];
    // (f, sequence, g, cell index); sequence makes equal-f pops FIFO.
    let mut open: BinaryHeap<Reverse<(usize, u64, usize, usize)>> = BinaryHeap::new();
    let mut seq: u64 = 0;
    let mut events = Vec::new();

    let start = grid.start();
    let si = layout.index(start);
    best_g[si] = 0;
    open.push(Reverse((manhattan(start, goal), seq, 0, si)));
    seq += 1;

    while let Some(Reverse((_, _, g, i))) = open.pop() {
        if closed[i] || g != best_g[i] {
            continue;
        }
        closed[i] = true;
        let pos = layout.coord(i);
        events.push(TraceEvent {
            kind: EventKind::Close,
            pos,
            g,
            h: manhattan(pos, goal),
        });
        if pos == goal {
            let plan = reconstruct(layout, &parent, i);
            let difficulty = events.len();
            return Ok(SearchResult {
                trace: Trace { events },
                plan,
                difficulty,
            });
        }
        for next in neighbors_in_layout(layout, pos) {
            let j = layout.index(next);
            let ng = g + 1;
            if closed[j] || ng >= best_g[j] {
                continue;
            }
            best_g[j] = ng;
            parent[j] = i;
            let h = manhattan(next, goal);
            events.push(TraceEvent {
                kind: EventKind::Create,
                pos: next,
                g: ng,
                h,
            });
            open.push(Reverse((ng + h, seq, ng, j)));
            seq += 1;
        }
    }
    Err(Unsolvable {
        trace: Trace { events },
    })
}

fn reconstruct(layout: &Layout, parent: &[usize], mut i: usize) -> Plan {
    let mut cells = vec![layout.coord(i)];
    while parent[i] != NO_PARENT {
        i = parent[i];
        cells.push(layout.coord(i));
    }
    cells.reverse();
    Plan { cells }
}

/// Shortest path length in moves by breadth-first search; `None` when the
/// goal is unreachable.
pub fn bfs_shortest_len(grid: &Grid) -> Option<usize> {
    bfs_distance(grid.layout(), grid.start(), grid.goal())
}

fn bfs_distance(layout: &Layout, from: Coord, to: Coord) -> Option<usize> {
    if !layout.is_free(from) || !layout.is_free(to) {
        return None;
    }
    let mut dist = vec![usize::MAX; layout.width() * layout.height()];
    let mut queue = VecDeque::new();
    dist[layout.index(from)] = 0;
    queue.push_back(from);
    while let Some(c) = queue.pop_front() {
        let d = dist[layout.index(c)];
        if c == to {
            return Some(d);
        }
        for n in neighbors_in_layout(layout, c) {
            let j = layout.index(n);
            if dist[j] == usize::MAX {
                dist[j] = d + 1;
                queue.push_back(n);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    EmptyPlan,
    WrongStart,
    OutOfBounds { index: usize },
    WallCell { index: usize },
    NonAdjacentStep { index: usize },
    WrongTerminus,
    NoPlan,
    MalformedPlan { position: usize },
    Truncated,
    IllegalTrace { event: usize },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::EmptyPlan => write!(f, "empty plan"),
            InvalidReason::WrongStart => write!(f, "plan does not begin at the start"),
            InvalidReason::OutOfBounds { index } => write!(f, "plan cell {index} is out of bounds"),
            InvalidReason::WallCell { index } => write!(f, "plan cell {index} is a wall"),
            InvalidReason::NonAdjacentStep { index } => {
                write!(f, "plan cell {index} is not adjacent to its predecessor")
            }
            InvalidReason::WrongTerminus => write!(f, "plan does not end at the goal"),
            InvalidReason::NoPlan => write!(f, "no plan"),
            InvalidReason::MalformedPlan { position } => {
                write!(f, "malformed plan at token {position}")
            }
            InvalidReason::Truncated => write!(f, "response truncated at the context limit"),
            InvalidReason::IllegalTrace { event } => write!(f, "illegal trace event {event}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    ValidOptimal,
    Invalid(InvalidReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        !matches!(self, Verdict::Invalid(_))
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, Verdict::ValidOptimal)
    }

    /// Short label: `valid_optimal`, `valid` or `invalid`.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::ValidOptimal => "valid_optimal",
            Verdict::Invalid(_) => "invalid",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Invalid(reason) => write!(f, "invalid ({reason})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Checks a plan against a grid, reporting the first violated rule.
pub fn validate_plan(grid: &Grid, plan: &Plan) -> Verdict {
    validate_path(grid.layout(), grid.start(), grid.goal(), plan)
}

/// Like [`validate_plan`] but with loose endpoints, so the degenerate
/// `start == goal` case (which `Grid` refuses to represent) is still defined.
pub fn validate_path(layout: &Layout, start: Coord, goal: Coord, plan: &Plan) -> Verdict {
    let Some(&first) = plan.cells.first() else {
        return Verdict::Invalid(InvalidReason::EmptyPlan);
    };
    if first != start {
        return Verdict::Invalid(InvalidReason::WrongStart);
    }
    for (index, &c) in plan.cells.iter().enumerate() {
        if !layout.contains(c) {
            return Verdict::Invalid(InvalidReason::OutOfBounds { index });
        }
        if !layout.is_free(c) {
            return Verdict::Invalid(InvalidReason::WallCell { index });
        }
        if index > 0 && !plan.cells[index - 1].is_adjacent(c) {
            return Verdict::Invalid(InvalidReason::NonAdjacentStep { index });
        }
    }
    if plan.cells.last() != Some(&goal) {
        return Verdict::Invalid(InvalidReason::WrongTerminus);
    }
    match bfs_distance(layout, start, goal) {
        Some(d) if d == plan.cost() => Verdict::ValidOptimal,
        _ => Verdict::Valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Cell;

    fn open_grid(w: usize, h: usize, start: Coord, goal: Coord) -> Grid {
        Grid::new(Layout::filled(w, h, Cell::Free).unwrap(), start, goal).unwrap()
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan(Coord::new(18, 11), Coord::new(15, 12)), 4);
        assert_eq!(manhattan(Coord::new(7, 7), Coord::new(7, 7)), 0);
        assert_eq!(manhattan(Coord::new(0, 0), Coord::new(3, 4)), 7);
    }

    #[test]
    fn neighbor_order_and_filtering() {
        let g = open_grid(30, 30, Coord::new(0, 0), Coord::new(1, 0));
        assert_eq!(
            neighbors_in_order(&g, Coord::new(18, 11)),
            vec![
                Coord::new(17, 11),
                Coord::new(19, 11),
                Coord::new(18, 10),
                Coord::new(18, 12)
            ]
        );

        let mut layout = Layout::filled(5, 5, Cell::Free).unwrap();
        layout.set(Coord::new(0, 1), Cell::Wall);
        layout.set(Coord::new(1, 0), Cell::Wall);
        let g = Grid::new(layout, Coord::new(4, 4), Coord::new(3, 3)).unwrap();
        assert_eq!(
            neighbors_in_order(&g, Coord::new(1, 1)),
            vec![Coord::new(2, 1), Coord::new(1, 2)]
        );

        let mut layout = Layout::filled(3, 3, Cell::Wall).unwrap();
        layout.set(Coord::new(1, 1), Cell::Free);
        layout.set(Coord::new(0, 0), Cell::Free);
        let g = Grid::new(layout, Coord::new(1, 1), Coord::new(0, 0)).unwrap();
        assert!(neighbors_in_order(&g, Coord::new(1, 1)).is_empty());
    }

    #[test]
    fn adjacent_goal_trace() {
        let g = open_grid(5, 5, Coord::new(2, 2), Coord::new(3, 2));
        let r = astar_trace(&g).unwrap();
        let kinds: Vec<_> = r.trace.events.iter().map(|e| (e.kind, e.pos)).collect();
        assert_eq!(
            kinds,
            vec![
                (EventKind::Close, Coord::new(2, 2)),
                (EventKind::Create, Coord::new(1, 2)),
                (EventKind::Create, Coord::new(3, 2)),
                (EventKind::Create, Coord::new(2, 1)),
                (EventKind::Create, Coord::new(2, 3)),
                (EventKind::Close, Coord::new(3, 2)),
            ]
        );
        assert_eq!(r.plan.cells, vec![Coord::new(2, 2), Coord::new(3, 2)]);
        assert_eq!(bfs_shortest_len(&g), Some(1));
    }

    #[test]
    fn walled_off_goal_is_unsolvable() {
        let mut layout = Layout::filled(5, 5, Cell::Free).unwrap();
        for c in [(3, 4), (4, 3), (3, 3)] {
            layout.set(Coord::new(c.0, c.1), Cell::Wall);
        }
        let g = Grid::new(layout, Coord::new(0, 0), Coord::new(4, 4)).unwrap();
        let err = astar_trace(&g).unwrap_err();
        // every reachable free cell gets closed before giving up
        assert_eq!(err.trace.closes().count(), 25 - 4);
        assert!(bfs_shortest_len(&g).is_none());
    }

    #[test]
    fn degenerate_plan_verdicts() {
        let layout = Layout::filled(5, 5, Cell::Free).unwrap();
        let c = Coord::new(2, 2);
        let single = Plan::new(vec![c]);
        assert!(validate_path(&layout, c, c, &single).is_valid());
        let g = open_grid(5, 5, c, Coord::new(3, 3));
        assert_eq!(
            validate_plan(&g, &single),
            Verdict::Invalid(InvalidReason::WrongTerminus)
        );
        assert_eq!(
            validate_plan(&g, &Plan::default()),
            Verdict::Invalid(InvalidReason::EmptyPlan)
        );
    }

    #[test]
    fn detour_is_valid_but_not_optimal() {
        let g = open_grid(5, 5, Coord::new(1, 1), Coord::new(3, 1));
        let detour = Plan::new(vec![
            Coord::new(1, 1),
            Coord::new(1, 2),
            Coord::new(2, 2),
            Coord::new(3, 2),
            Coord::new(3, 1),
        ]);
        assert_eq!(validate_plan(&g, &detour), Verdict::Valid);
        let mut layout = Layout::filled(5, 5, Cell::Free).unwrap();
        layout.set(Coord::new(2, 2), Cell::Wall);
        let g = Grid::new(layout, Coord::new(1, 1), Coord::new(3, 1)).unwrap();
        assert_eq!(
            validate_plan(&g, &detour),
            Verdict::Invalid(InvalidReason::WallCell { index: 2 })
        );
    }
}
