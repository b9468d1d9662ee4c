//! Strict replay of a trace prefix against A* legality rules.

use std::collections::HashMap;

use thiserror::Error;

use super::parse_canonical;
use crate::grid::{Coord, Grid};
use crate::search::manhattan;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("trace event {event}: {reason}")]
pub struct ReplayError {
    pub event: usize,
    pub reason: String,
}

/// Checks that `tokens` is a sequence of well-formed `create`/`close` events
/// that an A* search over `grid` could have logged: the first event closes
/// the start at cost 0, every `h` is the Manhattan distance to the goal,
/// creates are neighbours of the latest closed node one step further away,
/// and closes hit previously created cells at their best cost, at most once.
pub fn replay_trace<S: AsRef<str>>(grid: &Grid, tokens: &[S]) -> Result<(), ReplayError> {
    let fail = |event: usize, reason: String| Err(ReplayError { event, reason });
    if !tokens.len().is_multiple_of(5) {
        return fail(tokens.len() / 5, "incomplete event".into());
    }
    let mut best: HashMap<Coord, usize> = HashMap::new();
    let mut closed: HashMap<Coord, usize> = HashMap::new();
    let mut current: Option<(Coord, usize)> = None;
    for (event, chunk) in tokens.chunks(5).enumerate() {
        let word = chunk[0].as_ref();
        let num = |k: usize| parse_canonical(chunk[k].as_ref());
        let cost = |k: usize| chunk[k].as_ref().strip_prefix('c').and_then(parse_canonical);
        let (Some(x), Some(y), Some(g), Some(h)) = (num(1), num(2), cost(3), cost(4)) else {
            return fail(event, "malformed event".into());
        };
        let pos = Coord::new(x, y);
        if !grid.layout().contains(pos) || !grid.is_free(pos) {
            return fail(event, format!("{pos} is not a free cell"));
        }
        if h != manhattan(pos, grid.goal()) {
            return fail(event, format!("heuristic {h} at {pos} is not the Manhattan distance"));
        }
        match word {
            "close" => {
                if event == 0 {
                    if pos != grid.start() || g != 0 {
                        return fail(event, "trace must open by closing the start at cost 0".into());
                    }
                } else if best.get(&pos) != Some(&g) {
                    return fail(event, format!("{pos} closed without a create at cost {g}"));
                }
                if closed.insert(pos, g).is_some() {
                    return fail(event, format!("{pos} closed twice"));
                }
                current = Some((pos, g));
            }
            "create" => {
                let Some((parent, pg)) = current else {
                    return fail(event, "create before any close".into());
                };
                if !parent.is_adjacent(pos) || g != pg + 1 {
                    return fail(event, format!("{pos} at cost {g} is not a successor of {parent}"));
                }
                if closed.contains_key(&pos) {
                    return fail(event, format!("{pos} is already closed"));
                }
                if best.get(&pos).is_some_and(|b| *b <= g) {
                    return fail(event, format!("{pos} re-created without improving its cost"));
                }
                best.insert(pos, g);
            }
            other => return fail(event, format!("unexpected word `{other}`")),
        }
    }
    Ok(())
}
