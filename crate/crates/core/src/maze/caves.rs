//! Cyclic and open generators: drunkard's walk, random-wall rejection
//! sampling and free space.

use rand::seq::index;
use rand::Rng as _;

use super::{GenConfig, GenError};
use crate::grid::{Cell, Coord, Grid, Layout};
use crate::rng::Rng;
use crate::search::{astar_trace, SearchResult};

/// Number of floor cells the drunkard walk must dig.
pub fn drunkard_target(cfg: &GenConfig) -> usize {
    let total = (cfg.width * cfg.height) as f64;
    (cfg.params.floor_fraction * total).ceil() as usize
}

/// Random walk over the interior (border stays wall) carving every visited
/// cell, until the floor target is reached.
pub fn drunkard(cfg: &GenConfig, rng: &mut Rng) -> Layout {
    let (w, h) = (cfg.width, cfg.height);
    let mut layout = Layout::filled(w, h, Cell::Wall).expect("validated dimensions");
    let target = drunkard_target(cfg);
    let mut pos = Coord::new(rng.random_range(1..w - 1), rng.random_range(1..h - 1));
    layout.set(pos, Cell::Free);
    let mut floor = 1;
    while floor < target {
        let next = match rng.random_range(0..4u8) {
            0 if pos.x > 1 => Coord::new(pos.x - 1, pos.y),
            1 if pos.x < w - 2 => Coord::new(pos.x + 1, pos.y),
            2 if pos.y > 1 => Coord::new(pos.x, pos.y - 1),
            3 if pos.y < h - 2 => Coord::new(pos.x, pos.y + 1),
            _ => continue,
        };
        pos = next;
        if !layout.is_free(pos) {
            layout.set(pos, Cell::Free);
            floor += 1;
        }
    }
    layout
}

/// Outer `wall_levels` rings are walls, everything inside is free.
pub fn free_space(cfg: &GenConfig) -> Layout {
    let (w, h, levels) = (cfg.width, cfg.height, cfg.params.wall_levels);
    let mut layout = Layout::filled(w, h, Cell::Free).expect("validated dimensions");
    for y in 0..h {
        for x in 0..w {
            let ring = x.min(y).min(w - 1 - x).min(h - 1 - y);
            if ring < levels {
                layout.set(Coord::new(x, y), Cell::Wall);
            }
        }
    }
    layout
}

/// Wall count for a sampled fraction, kept inside the configured range.
fn wall_count(cfg: &GenConfig, fraction: f64) -> usize {
    let total = cfg.width * cfg.height;
    let (lo, hi) = cfg.params.wall_fraction_range;
    // the epsilon absorbs float noise in products such as 0.3 * 900
    let min = (lo * total as f64 - 1e-9).ceil() as usize;
    let max = (hi * total as f64 + 1e-9).floor() as usize;
    ((fraction * total as f64).floor() as usize).clamp(min, max.max(min))
}

/// Rejection sampler: random walls at a fraction drawn from the configured
/// range, random endpoints, then A*. Draws that are unsolvable, easier than
/// `min_difficulty`, or flagged by `is_duplicate` are resampled.
pub fn searchformer(
    cfg: &GenConfig,
    rng: &mut Rng,
    is_duplicate: &mut dyn FnMut(&Grid) -> bool,
) -> Result<(Grid, SearchResult), GenError> {
    let total = cfg.width * cfg.height;
    let (lo, hi) = cfg.params.wall_fraction_range;
    for _ in 0..cfg.params.max_attempts {
        let fraction = if lo < hi { rng.random_range(lo..=hi) } else { lo };
        let walls = wall_count(cfg, fraction);
        let mut layout = Layout::filled(cfg.width, cfg.height, Cell::Free).expect("validated dimensions");
        for i in index::sample(rng, total, walls) {
            let c = layout.coord(i);
            layout.set(c, Cell::Wall);
        }
        let free: Vec<Coord> = layout.free_cells().collect();
        if free.len() < 2 {
            continue;
        }
        let pair = index::sample(rng, free.len(), 2);
        let grid = Grid::new(layout, free[pair.index(0)], free[pair.index(1)])?;
        let Ok(result) = astar_trace(&grid) else {
            continue;
        };
        if result.difficulty < cfg.params.min_difficulty || is_duplicate(&grid) {
            continue;
        }
        return Ok((grid, result));
    }
    Err(GenError::RejectionBudgetExceeded {
        attempts: cfg.params.max_attempts,
    })
}
