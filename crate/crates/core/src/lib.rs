//! Grid pathfinding problems with linearized A* traces.
//!
//! - [`grid`] and [`search`]: the problem domain, tracing A*, a BFS oracle and
//!   plan validation.
//! - [`maze`]: six problem generators (Wilson, Kruskal, DFS backtracker,
//!   drunkard's walk, Searchformer-style rejection sampling, free space).
//! - [`codec`]: the token vocabulary and text surface form.
//! - [`dataset`]: sharded, deduplicated, reproducible dataset construction.
//! - [`analysis`]: judging model responses and correlating intermediate token
//!   counts with ground-truth trace length.

pub mod analysis;
pub mod codec;
pub mod dataset;
pub mod grid;
pub mod maze;
pub mod rng;
pub mod search;

pub use grid::{Cell, Coord, Grid, Layout};
pub use maze::{GenConfig, GeneratorKind, ProblemInstance};
pub use search::{astar_trace, bfs_shortest_len, validate_plan, Plan, Trace, Verdict};
