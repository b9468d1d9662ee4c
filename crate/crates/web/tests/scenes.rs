use mazetrace_web::{difficulties_json, generate_json, solve_json};
use serde_json::Value;

#[test]
fn generated_scene_is_consistent() {
    let s: Value = serde_json::from_str(&generate_json("wilson", 15, 4).unwrap()).unwrap();
    let (w, h) = (s["width"].as_u64().unwrap(), s["height"].as_u64().unwrap());
    assert_eq!(s["cells"].as_str().unwrap().len() as u64, w * h);
    assert_eq!(s["solvable"], true);
    let events = s["events"].as_array().unwrap();
    assert_eq!(events.len() as u64, s["difficulty"].as_u64().unwrap());
    assert_eq!(s["trace_tokens"].as_str().unwrap().split(' ').count(), 5 * events.len());
    let plan = s["plan"].as_array().unwrap();
    assert_eq!(plan.first(), Some(&s["start"]));
    assert_eq!(plan.last(), Some(&s["goal"]));
}

#[test]
fn edited_grid_resolves_and_matches_reference() {
    let mut cells = String::new();
    for y in 0..5 {
        for x in 0..5 {
            let border = x == 0 || y == 0 || x == 4 || y == 4;
            cells.push(if border || (x == 2 && y < 3) { '#' } else { '.' });
        }
    }
    let s: Value = serde_json::from_str(&solve_json(&cells, 5, 5, [1, 1], [3, 1]).unwrap()).unwrap();
    assert_eq!(
        s["plan_tokens"],
        "plan 1 1 plan 1 2 plan 1 3 plan 2 3 plan 3 3 plan 3 2 plan 3 1"
    );

    // walling the gap leaves no path
    let blocked: String = cells
        .char_indices()
        .map(|(i, c)| if i == 3 * 5 + 2 { '#' } else { c })
        .collect();
    let s: Value = serde_json::from_str(&solve_json(&blocked, 5, 5, [1, 1], [3, 1]).unwrap()).unwrap();
    assert_eq!(s["solvable"], false);
    assert_eq!(s["plan"].as_array().unwrap().len(), 0);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(generate_json("hexagonal", 15, 0).is_err());
    assert!(solve_json("..x", 3, 1, [0, 0], [1, 0]).is_err());
    assert!(solve_json("#..", 3, 1, [0, 0], [1, 0]).is_err());
}

#[test]
fn difficulty_samples() {
    let d: Value = serde_json::from_str(&difficulties_json("drunkard", 20, 1, 25).unwrap()).unwrap();
    let diffs = d["difficulties"].as_array().unwrap();
    assert_eq!(diffs.len(), 25);
    for (op, len) in diffs.iter().zip(d["plan_lengths"].as_array().unwrap()) {
        assert!(op.as_u64() >= len.as_u64());
    }
}
