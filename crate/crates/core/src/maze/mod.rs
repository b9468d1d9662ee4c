//! Problem generators.
//!
//! Acyclic kinds (Wilson, Kruskal, DFS backtracker) sample spanning trees of
//! a node lattice embedded at odd grid coordinates (see [`lattice`]). Drunkard
//! and Searchformer-style grids allow cycles; free-space grids are an empty
//! interior inside `wall_levels` rings of walls.

mod caves;
pub mod lattice;
mod spanning;
pub mod union_find;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::problem_id;
use crate::grid::{Grid, GridError, Layout};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::search::{astar_trace, Plan, Trace};

pub use caves::drunkard_target;
pub use lattice::NodeLattice;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Wilson,
    Kruskal,
    #[serde(rename = "dfs")]
    DfsBacktracker,
    Drunkard,
    #[serde(rename = "searchformer")]
    SearchformerStyle,
    #[serde(rename = "freespace")]
    FreeSpace,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 6] = [
        GeneratorKind::Wilson,
        GeneratorKind::Kruskal,
        GeneratorKind::DfsBacktracker,
        GeneratorKind::Drunkard,
        GeneratorKind::SearchformerStyle,
        GeneratorKind::FreeSpace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Wilson => "wilson",
            GeneratorKind::Kruskal => "kruskal",
            GeneratorKind::DfsBacktracker => "dfs",
            GeneratorKind::Drunkard => "drunkard",
            GeneratorKind::SearchformerStyle => "searchformer",
            GeneratorKind::FreeSpace => "freespace",
        }
    }

    /// Spanning-tree generators.
    pub fn is_acyclic(self) -> bool {
        matches!(
            self,
            GeneratorKind::Wilson | GeneratorKind::Kruskal | GeneratorKind::DfsBacktracker
        )
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| GenError::InvalidConfig(format!("unknown generator kind `{s}`")))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionBudgetExceeded { attempts: usize },
    #[error("need at least two free cells, found {free}")]
    TooFewFreeCells { free: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Kind-specific knobs. Only the ones relevant to the chosen kind are checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub floor_fraction: f64,
    pub wall_fraction_range: (f64, f64),
    pub wall_levels: usize,
    pub min_difficulty: usize,
    /// Rejection budget per Searchformer-style instance (and per endpoint redraw).
    pub max_attempts: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            floor_fraction: 0.45,
            wall_fraction_range: (0.30, 0.50),
            wall_levels: 4,
            min_difficulty: 10,
            max_attempts: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub kind: GeneratorKind,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub params: GenParams,
}

impl GenConfig {
    pub fn new(kind: GeneratorKind, width: usize, height: usize, seed: u64) -> Self {
        Self {
            kind,
            width,
            height,
            seed,
            params: GenParams::default(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::InvalidConfig(msg));
        if self.width < 5 || self.height < 5 {
            return bad(format!(
                "dimensions must be at least 5, got {}x{}",
                self.width, self.height
            ));
        }
        let p = &self.params;
        if p.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        match self.kind {
            GeneratorKind::Drunkard => {
                if !(p.floor_fraction > 0.0 && p.floor_fraction < 1.0) {
                    return bad(format!("floor_fraction must be in (0, 1), got {}", p.floor_fraction));
                }
                let interior = (self.width - 2) * (self.height - 2);
                if drunkard_target(self) > interior {
                    return bad(format!(
                        "floor_fraction {} needs more floor than the {interior} interior cells",
                        p.floor_fraction
                    ));
                }
            }
            GeneratorKind::SearchformerStyle => {
                let (lo, hi) = p.wall_fraction_range;
                if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                    return bad(format!(
                        "wall fraction range ({lo}, {hi}) must be ordered within [0, 1]"
                    ));
                }
            }
            GeneratorKind::FreeSpace => {
                let inner = |side: usize| side.saturating_sub(2 * p.wall_levels);
                if p.wall_levels == 0 || inner(self.width) < 2 || inner(self.height) < 2 {
                    return bad(format!(
                        "wall_levels {} must be >= 1 and leave a 2x2 interior",
                        p.wall_levels
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Generates the wall layout of a non-Searchformer kind from `rng`.
pub fn generate_layout(cfg: &GenConfig, rng: &mut Rng) -> Result<Layout, GenError> {
    cfg.validate()?;
    let lattice = || NodeLattice::for_grid(cfg.width, cfg.height);
    let layout = match cfg.kind {
        GeneratorKind::Wilson => spanning::wilson(lattice(), rng).render(cfg.width, cfg.height),
        GeneratorKind::Kruskal => spanning::kruskal(lattice(), rng).render(cfg.width, cfg.height),
        GeneratorKind::DfsBacktracker => spanning::dfs_backtracker(lattice(), rng).render(cfg.width, cfg.height),
        GeneratorKind::Drunkard => caves::drunkard(cfg, rng),
        GeneratorKind::FreeSpace => caves::free_space(cfg),
        GeneratorKind::SearchformerStyle => {
            return Err(GenError::InvalidConfig(
                "searchformer grids come with endpoints; use gen_searchformer".into(),
            ))
        }
    };
    Ok(layout)
}

/// Spanning tree sampled by loop-erased random walks.
pub fn gen_wilson(cfg: &GenConfig) -> Result<Layout, GenError> {
    expect_kind(cfg, GeneratorKind::Wilson)?;
    generate_layout(cfg, &mut rng_from_seed(cfg.seed))
}

pub fn gen_kruskal(cfg: &GenConfig) -> Result<Layout, GenError> {
    expect_kind(cfg, GeneratorKind::Kruskal)?;
    generate_layout(cfg, &mut rng_from_seed(cfg.seed))
}

pub fn gen_dfs_backtracker(cfg: &GenConfig) -> Result<Layout, GenError> {
    expect_kind(cfg, GeneratorKind::DfsBacktracker)?;
    generate_layout(cfg, &mut rng_from_seed(cfg.seed))
}

pub fn gen_drunkard(cfg: &GenConfig) -> Result<Layout, GenError> {
    expect_kind(cfg, GeneratorKind::Drunkard)?;
    generate_layout(cfg, &mut rng_from_seed(cfg.seed))
}

pub fn gen_freespace(cfg: &GenConfig) -> Result<Layout, GenError> {
    expect_kind(cfg, GeneratorKind::FreeSpace)?;
    generate_layout(cfg, &mut rng_from_seed(cfg.seed))
}

/// Searchformer-style grid with its own endpoints, rejecting duplicates
/// according to `is_duplicate`.
pub fn gen_searchformer(cfg: &GenConfig, is_duplicate: &mut dyn FnMut(&Grid) -> bool) -> Result<Grid, GenError> {
    expect_kind(cfg, GeneratorKind::SearchformerStyle)?;
    cfg.validate()?;
    caves::searchformer(cfg, &mut rng_from_seed(cfg.seed), is_duplicate).map(|(g, _)| g)
}

fn expect_kind(cfg: &GenConfig, kind: GeneratorKind) -> Result<(), GenError> {
    if cfg.kind == kind {
        Ok(())
    } else {
        Err(GenError::InvalidConfig(format!(
            "expected a {kind} config, got {}",
            cfg.kind
        )))
    }
}

/// Draws distinct start and goal cells uniformly from the free cells.
pub fn sample_endpoints(layout: Layout, rng: &mut Rng) -> Result<Grid, GenError> {
    let free: Vec<_> = layout.free_cells().collect();
    if free.len() < 2 {
        return Err(GenError::TooFewFreeCells { free: free.len() });
    }
    let pair = index::sample(rng, free.len(), 2);
    Ok(Grid::new(layout, free[pair.index(0)], free[pair.index(1)])?)
}

/// A generated problem with its ground-truth trace and optimal plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub kind: GeneratorKind,
    pub seed: u64,
    pub grid: Grid,
    pub trace: Trace,
    pub plan: Plan,
    pub difficulty: usize,
}

/// Generator, endpoint sampling and A* in one step. Everything is drawn from
/// a single stream seeded by `cfg.seed`.
pub fn generate_instance(cfg: &GenConfig) -> Result<ProblemInstance, GenError> {
    generate_instance_with(cfg, &mut |_| false)
}

/// [`generate_instance`] with a duplicate filter for Searchformer-style draws.
pub fn generate_instance_with(
    cfg: &GenConfig,
    is_duplicate: &mut dyn FnMut(&Grid) -> bool,
) -> Result<ProblemInstance, GenError> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let (grid, result) = if cfg.kind == GeneratorKind::SearchformerStyle {
        caves::searchformer(cfg, &mut rng, is_duplicate)?
    } else {
        let layout = generate_layout(cfg, &mut rng)?;
        let mut found = None;
        for _ in 0..cfg.params.max_attempts {
            let grid = sample_endpoints(layout.clone(), &mut rng)?;
            if let Ok(result) = astar_trace(&grid) {
                found = Some((grid, result));
                break;
            }
        }
        found.ok_or(GenError::RejectionBudgetExceeded {
            attempts: cfg.params.max_attempts,
        })?
    };
    Ok(ProblemInstance {
        kind: cfg.kind,
        seed: cfg.seed,
        grid,
        difficulty: result.difficulty,
        trace: result.trace,
        plan: result.plan,
    })
}

/// `count` Searchformer-style instances with no two sharing a problem id.
/// Instance `i` uses the stream `derive_seed(cfg.seed, i)`.
pub fn searchformer_batch(cfg: &GenConfig, count: usize) -> Result<Vec<ProblemInstance>, GenError> {
    expect_kind(cfg, GeneratorKind::SearchformerStyle)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let inst = generate_instance_with(&cfg.with_seed(derive_seed(cfg.seed, i as u64)), &mut |g| {
            seen.contains(&problem_id(g))
        })?;
        seen.insert(problem_id(&inst.grid));
        out.push(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Coord};
    use crate::search::{bfs_shortest_len, validate_plan, Verdict};

    fn cfg(kind: GeneratorKind, size: usize, seed: u64) -> GenConfig {
        GenConfig::new(kind, size, size, seed)
    }

    #[test]
    fn kind_names_round_trip() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
        }
        assert!("prim".parse::<GeneratorKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg(GeneratorKind::Wilson, 4, 0).validate().is_err());
        let mut c = cfg(GeneratorKind::Drunkard, 10, 0);
        c.params.floor_fraction = 1.0;
        assert!(c.validate().is_err());
        c.params.floor_fraction = 0.7; // 70 cells > 64 interior
        assert!(c.validate().is_err());
        let mut c = cfg(GeneratorKind::SearchformerStyle, 10, 0);
        c.params.wall_fraction_range = (0.5, 0.3);
        assert!(c.validate().is_err());
        let mut c = cfg(GeneratorKind::FreeSpace, 9, 0);
        assert!(c.validate().is_err(), "9 - 8 leaves a 1x1 interior");
        c.params.wall_levels = 0;
        assert!(c.validate().is_err());
        assert!(gen_wilson(&cfg(GeneratorKind::Kruskal, 10, 0)).is_err());
    }

    #[test]
    fn acyclic_generators_give_trees() {
        for kind in [
            GeneratorKind::Wilson,
            GeneratorKind::Kruskal,
            GeneratorKind::DfsBacktracker,
        ] {
            for seed in 0..10 {
                let layout = generate_layout(&cfg(kind, 30, seed), &mut rng_from_seed(seed)).unwrap();
                assert!(layout.is_free_tree(), "{kind} seed {seed}");
                assert!(layout.is_free(Coord::new(1, 1)));
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in GeneratorKind::ALL {
            let a = generate_instance(&cfg(kind, 15, 99)).unwrap();
            let b = generate_instance(&cfg(kind, 15, 99)).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn kruskal_seeds_differ() {
        let mut seen = HashSet::new();
        for seed in 0..200 {
            assert!(seen.insert(gen_kruskal(&cfg(GeneratorKind::Kruskal, 30, seed)).unwrap()));
        }
    }

    fn junctions(layout: &Layout) -> usize {
        layout
            .free_cells()
            .filter(|c| crate::search::neighbors_in_layout(layout, *c).count() >= 3)
            .count()
    }

    #[test]
    fn dfs_branches_less_than_wilson() {
        let mean = |kind| {
            (0..100)
                .map(|s| junctions(&generate_layout(&cfg(kind, 30, s), &mut rng_from_seed(s)).unwrap()))
                .sum::<usize>() as f64
                / 100.0
        };
        let (dfs, wilson) = (mean(GeneratorKind::DfsBacktracker), mean(GeneratorKind::Wilson));
        assert!(dfs < wilson, "dfs {dfs} vs wilson {wilson}");
    }

    #[test]
    fn drunkard_stops_at_target_and_stays_connected() {
        let mut saw_cycle = false;
        for seed in 0..100 {
            let layout = gen_drunkard(&cfg(GeneratorKind::Drunkard, 30, seed)).unwrap();
            assert_eq!(layout.free_count(), 405);
            assert!(layout.is_free_connected());
            saw_cycle |= layout.free_edge_count() + 1 > layout.free_count();
        }
        assert!(saw_cycle);
    }

    #[test]
    fn free_space_rings() {
        let layout = gen_freespace(&cfg(GeneratorKind::FreeSpace, 30, 0)).unwrap();
        for y in 0..30 {
            for x in 0..30 {
                let ring = x.min(y).min(29 - x).min(29 - y);
                assert_eq!(layout.is_free(Coord::new(x, y)), ring >= 4, "({x}, {y})");
            }
        }
        assert_eq!(layout.free_count(), 22 * 22);
        let mut small = cfg(GeneratorKind::FreeSpace, 5, 0);
        small.params.wall_levels = 1;
        assert_eq!(gen_freespace(&small).unwrap().free_count(), 9);
    }

    #[test]
    fn searchformer_constraints() {
        let c = cfg(GeneratorKind::SearchformerStyle, 30, 5);
        let batch = searchformer_batch(&c, 50).unwrap();
        let ids: HashSet<_> = batch.iter().map(|i| problem_id(&i.grid)).collect();
        assert_eq!(ids.len(), 50);
        for inst in &batch {
            let frac = inst.grid.layout().wall_count() as f64 / 900.0;
            assert!((0.30..=0.50).contains(&frac), "{frac}");
            assert!(inst.difficulty >= 10);
            assert!(bfs_shortest_len(&inst.grid).is_some());
        }
    }

    #[test]
    fn searchformer_vacuous_threshold_takes_first_solvable() {
        let mut c = cfg(GeneratorKind::SearchformerStyle, 10, 3);
        c.params.min_difficulty = 1;
        let mut calls = 0;
        gen_searchformer(&c, &mut |_| {
            calls += 1;
            false
        })
        .unwrap();
        assert_eq!(calls, 1);
    }

    #[test]
    fn searchformer_budget_exhaustion() {
        let mut c = cfg(GeneratorKind::SearchformerStyle, 5, 3);
        c.params.min_difficulty = 10_000;
        c.params.max_attempts = 20;
        assert_eq!(
            generate_instance(&c),
            Err(GenError::RejectionBudgetExceeded { attempts: 20 })
        );
    }

    #[test]
    fn endpoint_sampling() {
        let mut layout = Layout::filled(5, 5, Cell::Wall).unwrap();
        layout.set(Coord::new(1, 1), Cell::Free);
        assert_eq!(
            sample_endpoints(layout.clone(), &mut rng_from_seed(0)),
            Err(GenError::TooFewFreeCells { free: 1 })
        );
        layout.set(Coord::new(3, 2), Cell::Free);
        let g = sample_endpoints(layout, &mut rng_from_seed(0)).unwrap();
        let mut pair = [g.start(), g.goal()];
        pair.sort();
        assert_eq!(pair, [Coord::new(1, 1), Coord::new(3, 2)]);
    }

    #[test]
    fn endpoint_start_is_uniform() {
        // 9 free cells, 10,000 draws, each start count within 3 sigma of n/9
        let mut c = cfg(GeneratorKind::FreeSpace, 5, 0);
        c.params.wall_levels = 1;
        let layout = gen_freespace(&c).unwrap();
        let mut rng = rng_from_seed(11);
        let mut counts = std::collections::HashMap::new();
        let n: f64 = 10_000.0;
        for _ in 0..10_000 {
            *counts
                .entry(sample_endpoints(layout.clone(), &mut rng).unwrap().start())
                .or_insert(0.0) += 1.0;
        }
        let p = 1.0 / 9.0;
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert_eq!(counts.len(), 9);
        for (c, k) in counts {
            assert!((k - n * p).abs() < 3.0 * sigma, "{c}: {k}");
        }
    }

    #[test]
    fn generated_instances_validate() {
        for kind in GeneratorKind::ALL {
            for seed in 0..20 {
                let inst = generate_instance(&cfg(kind, 12, seed)).unwrap();
                assert_eq!(validate_plan(&inst.grid, &inst.plan), Verdict::ValidOptimal);
                assert!(inst.difficulty >= inst.plan.len());
            }
        }
    }
}
