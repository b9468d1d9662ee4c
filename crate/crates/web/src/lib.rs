//! WebAssembly bindings for the maze demo page in `www/`.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and can be called natively; the exported wrappers turn errors into JS
//! exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mazetrace::codec::{encode_plan, encode_problem, encode_trace};
use mazetrace::maze::{generate_instance, GenConfig, GeneratorKind};
use mazetrace::rng::derive_seed;
use mazetrace::search::EventKind;
use mazetrace::{astar_trace, Cell, Coord, Grid, Layout};

/// Everything the page needs to draw a grid and replay its search.
#[derive(Debug, Serialize)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    /// Row-major, `#` for walls and `.` for floor.
    pub cells: String,
    pub start: [usize; 2],
    pub goal: [usize; 2],
    pub solvable: bool,
    /// `[op, x, y, g, h]` with op 0 for create and 1 for close.
    pub events: Vec<[usize; 5]>,
    pub plan: Vec<[usize; 2]>,
    pub difficulty: usize,
    pub problem_tokens: String,
    pub trace_tokens: String,
    pub plan_tokens: String,
}

fn xy(c: Coord) -> [usize; 2] {
    [c.x, c.y]
}

/// Runs A* on `grid` and packages the result.
pub fn scene(grid: &Grid) -> Scene {
    let (trace, plan, solvable) = match astar_trace(grid) {
        Ok(r) => (r.trace, Some(r.plan), true),
        Err(u) => (u.trace, None, false),
    };
    let cells = grid
        .layout()
        .cells()
        .iter()
        .map(|c| if *c == Cell::Wall { '#' } else { '.' })
        .collect();
    Scene {
        width: grid.width(),
        height: grid.height(),
        cells,
        start: xy(grid.start()),
        goal: xy(grid.goal()),
        solvable,
        events: trace
            .events
            .iter()
            .map(|e| [(e.kind == EventKind::Close) as usize, e.pos.x, e.pos.y, e.g, e.h])
            .collect(),
        plan: plan.iter().flat_map(|p| p.cells.iter().copied().map(xy)).collect(),
        difficulty: trace.len(),
        problem_tokens: encode_problem(grid).to_string(),
        trace_tokens: encode_trace(&trace).to_string(),
        plan_tokens: plan.map(|p| encode_plan(&p).to_string()).unwrap_or_default(),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo types serialize")
}

/// Generates one instance and returns its scene.
pub fn generate_json(kind: &str, size: usize, seed: u64) -> Result<String, String> {
    let kind: GeneratorKind = kind.parse().map_err(|e| format!("{e}"))?;
    let inst = generate_instance(&GenConfig::new(kind, size, size, seed)).map_err(|e| e.to_string())?;
    Ok(to_json(&scene(&inst.grid)))
}

/// Re-solves an edited grid given as row-major `#`/`.` cells.
pub fn solve_json(
    cells: &str,
    width: usize,
    height: usize,
    start: [usize; 2],
    goal: [usize; 2],
) -> Result<String, String> {
    let cells = cells
        .chars()
        .map(|ch| match ch {
            '#' => Ok(Cell::Wall),
            '.' => Ok(Cell::Free),
            other => Err(format!("unexpected cell character `{other}`")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let layout = Layout::from_cells(width, height, cells).map_err(|e| e.to_string())?;
    let grid =
        Grid::new(layout, Coord::new(start[0], start[1]), Coord::new(goal[0], goal[1])).map_err(|e| e.to_string())?;
    Ok(to_json(&scene(&grid)))
}

#[derive(Debug, Serialize)]
struct Difficulties {
    kind: String,
    size: usize,
    difficulties: Vec<usize>,
    plan_lengths: Vec<usize>,
}

/// A* operation counts and plan lengths of `count` instances of one kind.
pub fn difficulties_json(kind: &str, size: usize, seed: u64, count: usize) -> Result<String, String> {
    let kind: GeneratorKind = kind.parse().map_err(|e| format!("{e}"))?;
    let mut out = Difficulties {
        kind: kind.name().to_string(),
        size,
        difficulties: Vec::with_capacity(count),
        plan_lengths: Vec::with_capacity(count),
    };
    for i in 0..count {
        let cfg = GenConfig::new(kind, size, size, derive_seed(seed, i as u64));
        let inst = generate_instance(&cfg).map_err(|e| e.to_string())?;
        out.difficulties.push(inst.difficulty);
        out.plan_lengths.push(inst.plan.len());
    }
    Ok(to_json(&out))
}

#[wasm_bindgen]
pub fn generate(kind: &str, size: usize, seed: u32) -> Result<String, JsError> {
    generate_json(kind, size, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(
    cells: &str,
    width: usize,
    height: usize,
    sx: usize,
    sy: usize,
    gx: usize,
    gy: usize,
) -> Result<String, JsError> {
    solve_json(cells, width, height, [sx, sy], [gx, gy]).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn difficulties(kind: &str, size: usize, seed: u32, count: usize) -> Result<String, JsError> {
    difficulties_json(kind, size, seed as u64, count).map_err(|e| JsError::new(&e))
}
