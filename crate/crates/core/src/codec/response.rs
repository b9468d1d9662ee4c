//! Lenient parsing of arbitrary model output.

use serde::{Deserialize, Serialize};

use super::parse_canonical;
use crate::grid::Coord;
use crate::search::Plan;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Malformed {
    /// No `plan` token anywhere.
    NoPlan,
    /// The sequence ends inside a `plan x y` triple starting at `position`.
    IncompleteTriple { position: usize },
    /// Something other than `plan` where a triple should begin.
    UnexpectedToken { position: usize, token: String },
    /// A coordinate slot holding a non-coordinate token.
    BadCoordinate { position: usize, token: String },
}

impl Malformed {
    pub fn position(&self) -> Option<usize> {
        match self {
            Malformed::NoPlan => None,
            Malformed::IncompleteTriple { position }
            | Malformed::UnexpectedToken { position, .. }
            | Malformed::BadCoordinate { position, .. } => Some(*position),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedResponse {
    /// Tokens strictly before the first `plan` token (all tokens if none).
    pub trace_prefix_len: usize,
    pub total_tokens: usize,
    pub plan: Result<Plan, Malformed>,
}

impl ParsedResponse {
    pub fn intermediate_token_count(&self) -> usize {
        self.trace_prefix_len
    }
}

pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Splits a response into its reasoning prefix and plan. Tokens before the
/// first `plan` are counted but not interpreted. From there the rest must be
/// `plan x y` triples, optionally followed by `eos`/`pad` padding.
pub fn parse_response<S: AsRef<str>>(tokens: &[S]) -> ParsedResponse {
    let total_tokens = tokens.len();
    let Some(first) = tokens.iter().position(|t| t.as_ref() == "plan") else {
        return ParsedResponse {
            trace_prefix_len: total_tokens,
            total_tokens,
            plan: Err(Malformed::NoPlan),
        };
    };
    ParsedResponse {
        trace_prefix_len: first,
        total_tokens,
        plan: parse_plan_region(tokens, first),
    }
}

fn parse_plan_region<S: AsRef<str>>(tokens: &[S], first: usize) -> Result<Plan, Malformed> {
    let mut cells = Vec::new();
    let mut i = first;
    while i < tokens.len() {
        match tokens[i].as_ref() {
            "plan" => {}
            "eos" | "pad" => {
                if let Some(j) = (i..tokens.len()).find(|&j| !matches!(tokens[j].as_ref(), "eos" | "pad")) {
                    return Err(Malformed::UnexpectedToken {
                        position: j,
                        token: tokens[j].as_ref().to_string(),
                    });
                }
                break;
            }
            other => {
                return Err(Malformed::UnexpectedToken {
                    position: i,
                    token: other.to_string(),
                })
            }
        }
        if i + 2 >= tokens.len() {
            return Err(Malformed::IncompleteTriple { position: i });
        }
        let mut coord = [0usize; 2];
        for (k, slot) in coord.iter_mut().enumerate() {
            let tok = tokens[i + 1 + k].as_ref();
            *slot = parse_canonical(tok).ok_or_else(|| Malformed::BadCoordinate {
                position: i + 1 + k,
                token: tok.to_string(),
            })?;
        }
        cells.push(Coord::new(coord[0], coord[1]));
        i += 3;
    }
    Ok(Plan { cells })
}
