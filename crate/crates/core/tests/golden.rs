//! Reference free-space instance, checked token for token.

use mazetrace::codec::{encode_plan, encode_problem, encode_trace, parse_response, tokenize};
use mazetrace::maze::{gen_freespace, GenConfig, GeneratorKind};
use mazetrace::search::{astar_trace, bfs_shortest_len, validate_plan, EventKind, Plan, Verdict};
use mazetrace::{Coord, Grid};

const TRACE: &str = "close 18 11 c0 c4 create 17 11 c1 c3 create 19 11 c1 c5 create 18 10 c1 c5 \
create 18 12 c1 c3 close 17 11 c1 c3 create 16 11 c2 c2 create 17 10 c2 c4 \
create 17 12 c2 c2 close 18 12 c1 c3 create 19 12 c2 c4 create 18 13 c2 c4 \
close 16 11 c2 c2 create 15 11 c3 c1 create 16 10 c3 c3 create 16 12 c3 c1 \
close 17 12 c2 c2 create 17 13 c3 c3 close 15 11 c3 c1 create 14 11 c4 c2 \
create 15 10 c4 c2 create 15 12 c4 c0 close 16 12 c3 c1 create 16 13 c4 c2 \
close 15 12 c4 c0";

const PLAN: &str = "plan 18 11 plan 17 11 plan 16 11 plan 15 11 plan 15 12";

const PROBLEM_PREFIX: &str = "start 18 11 goal 15 12 wall 0 0 wall 0 1 wall 0 2 wall 0 3 wall 0 4 wall 0 5 \
wall 0 6 wall 0 7 wall 0 8 wall 0 9 wall 0 10 wall 0 11 wall 0 12 wall 0 13";

fn example_grid() -> Grid {
    let layout = gen_freespace(&GenConfig::new(GeneratorKind::FreeSpace, 30, 30, 0)).unwrap();
    Grid::new(layout, Coord::new(18, 11), Coord::new(15, 12)).unwrap()
}

#[test]
fn trace_matches_token_for_token() {
    let r = astar_trace(&example_grid()).unwrap();
    assert_eq!(encode_trace(&r.trace).to_string(), TRACE);
    assert_eq!(encode_plan(&r.plan).to_string(), PLAN);
    assert_eq!(r.difficulty, 25);
    assert_eq!(encode_trace(&r.trace).len(), 125);
    assert_eq!(encode_plan(&r.plan).len(), 15);
}

#[test]
fn problem_text_prefix() {
    let text = encode_problem(&example_grid()).to_string();
    assert!(text.starts_with(PROBLEM_PREFIX), "{}", &text[..200]);
}

#[test]
fn plan_verdicts() {
    let grid = example_grid();
    let plan = astar_trace(&grid).unwrap().plan;
    assert_eq!(validate_plan(&grid, &plan), Verdict::ValidOptimal);
    assert_eq!(bfs_shortest_len(&grid), Some(4));
    let mut broken = plan.cells.clone();
    broken.remove(2);
    assert_eq!(
        validate_plan(&grid, &Plan::new(broken)),
        Verdict::Invalid(mazetrace::search::InvalidReason::NonAdjacentStep { index: 2 })
    );
}

#[test]
fn echoed_response_parses() {
    let text = format!("{TRACE} {PLAN}");
    let parsed = parse_response(&tokenize(&text));
    assert_eq!(parsed.intermediate_token_count(), 125);
    assert_eq!(parsed.plan.unwrap().len(), 5);
}

#[test]
fn first_and_last_events() {
    let r = astar_trace(&example_grid()).unwrap();
    let first = r.trace.events[0];
    let last = *r.trace.events.last().unwrap();
    assert_eq!(
        (first.kind, first.pos, first.g, first.h),
        (EventKind::Close, Coord::new(18, 11), 0, 4)
    );
    assert_eq!(
        (last.kind, last.pos, last.g, last.h),
        (EventKind::Close, Coord::new(15, 12), 4, 0)
    );
}
