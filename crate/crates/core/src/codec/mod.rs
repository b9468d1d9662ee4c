//! Token vocabulary and the text surface form of problems, traces and plans.
//!
//! The surface syntax is whitespace-separated tokens:
//!
//! ```text
//! start 18 11 goal 15 12 wall 0 0 wall 0 1 ...
//! close 18 11 c0 c4 create 17 11 c1 c3 ...
//! plan 18 11 plan 17 11 ...
//! ```
//!
//! Coordinate tokens are shared between the x and y roles; costs carry a `c`
//! prefix.

mod replay;
mod response;
mod vocab;

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::{Cell, Coord, Grid, GridError, Layout};
use crate::search::{EventKind, Plan, Trace, TraceEvent};

pub use replay::{replay_trace, ReplayError};
pub use response::{parse_response, tokenize, Malformed, ParsedResponse};
pub use vocab::{build_vocab, Vocabulary, STRUCTURAL_WORDS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("unexpected token `{found}` at position {position}, expected {expected}")]
    Unexpected {
        position: usize,
        found: String,
        expected: &'static str,
    },
    #[error("sequence ends inside a record at position {0}")]
    Truncated(usize),
    #[error("token `{token}` is outside the vocabulary")]
    OutOfVocabulary { token: String },
    #[error("duplicate wall at {0}")]
    DuplicateWall(Coord),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Start,
    Goal,
    Wall,
    Create,
    Close,
    Plan,
    Bos,
    Eos,
    Pad,
    Num(usize),
    Cost(usize),
}

impl Token {
    fn word(self) -> Option<&'static str> {
        Some(match self {
            Token::Start => "start",
            Token::Goal => "goal",
            Token::Wall => "wall",
            Token::Create => "create",
            Token::Close => "close",
            Token::Plan => "plan",
            Token::Bos => "bos",
            Token::Eos => "eos",
            Token::Pad => "pad",
            Token::Num(_) | Token::Cost(_) => return None,
        })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(n) => write!(f, "{n}"),
            Token::Cost(n) => write!(f, "c{n}"),
            word => f.write_str(word.word().expect("structural token")),
        }
    }
}

/// Canonical decimal only: no sign, no leading zeros.
fn parse_canonical(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    s.parse().ok()
}

impl FromStr for Token {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tok = match s {
            "start" => Token::Start,
            "goal" => Token::Goal,
            "wall" => Token::Wall,
            "create" => Token::Create,
            "close" => Token::Close,
            "plan" => Token::Plan,
            "bos" => Token::Bos,
            "eos" => Token::Eos,
            "pad" => Token::Pad,
            _ => {
                if let Some(n) = parse_canonical(s) {
                    Token::Num(n)
                } else if let Some(n) = s.strip_prefix('c').and_then(parse_canonical) {
                    Token::Cost(n)
                } else {
                    return Err(CodecError::UnknownToken(s.to_string()));
                }
            }
        };
        Ok(tok)
    }
}

/// An ordered token stream.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq(pub Vec<Token>);

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn concat(&self, other: &TokenSeq) -> TokenSeq {
        TokenSeq(self.0.iter().chain(&other.0).copied().collect())
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for TokenSeq {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map(TokenSeq)
    }
}

/// `start x y goal x y` followed by `wall x y` for every wall, ordered by
/// ascending x then ascending y.
pub fn encode_problem(grid: &Grid) -> TokenSeq {
    let (s, g) = (grid.start(), grid.goal());
    let mut out = vec![
        Token::Start,
        Token::Num(s.x),
        Token::Num(s.y),
        Token::Goal,
        Token::Num(g.x),
        Token::Num(g.y),
    ];
    for w in grid.layout().walls_column_major() {
        out.extend([Token::Wall, Token::Num(w.x), Token::Num(w.y)]);
    }
    TokenSeq(out)
}

/// Five tokens per event: word, x, y, g, h.
pub fn encode_trace(trace: &Trace) -> TokenSeq {
    let mut out = Vec::with_capacity(trace.len() * 5);
    for e in &trace.events {
        out.extend([
            match e.kind {
                EventKind::Create => Token::Create,
                EventKind::Close => Token::Close,
            },
            Token::Num(e.pos.x),
            Token::Num(e.pos.y),
            Token::Cost(e.g),
            Token::Cost(e.h),
        ]);
    }
    TokenSeq(out)
}

/// Three tokens per cell: `plan x y`.
pub fn encode_plan(plan: &Plan) -> TokenSeq {
    TokenSeq(
        plan.cells
            .iter()
            .flat_map(|c| [Token::Plan, Token::Num(c.x), Token::Num(c.y)])
            .collect(),
    )
}

/// Stable identifier of a problem: the first 128 bits of the SHA-256 of its
/// canonical text, hex encoded. Also the dedupe key.
pub fn problem_id(grid: &Grid) -> String {
    id_of_problem_text(&encode_problem(grid).to_string())
}

pub fn id_of_problem_text(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..16])
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(seq: &'a TokenSeq) -> Self {
        Self { tokens: &seq.0, pos: 0 }
    }

    fn done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn next(&mut self) -> Result<Token, CodecError> {
        let t = *self.tokens.get(self.pos).ok_or(CodecError::Truncated(self.pos))?;
        self.pos += 1;
        Ok(t)
    }

    fn unexpected(&self, found: Token, expected: &'static str) -> CodecError {
        CodecError::Unexpected {
            position: self.pos - 1,
            found: found.to_string(),
            expected,
        }
    }

    fn word(&mut self, want: Token) -> Result<(), CodecError> {
        match self.next()? {
            t if t == want => Ok(()),
            t => Err(self.unexpected(t, want.word().unwrap_or("word"))),
        }
    }

    fn num(&mut self) -> Result<usize, CodecError> {
        match self.next()? {
            Token::Num(n) => Ok(n),
            t => Err(self.unexpected(t, "coordinate")),
        }
    }

    fn coord(&mut self) -> Result<Coord, CodecError> {
        Ok(Coord::new(self.num()?, self.num()?))
    }

    fn cost(&mut self) -> Result<usize, CodecError> {
        match self.next()? {
            Token::Cost(n) => Ok(n),
            t => Err(self.unexpected(t, "cost")),
        }
    }
}

/// Inverse of [`encode_problem`]; the dimensions are not part of the text.
pub fn decode_problem(seq: &TokenSeq, width: usize, height: usize) -> Result<Grid, CodecError> {
    let mut cur = Cursor::new(seq);
    cur.word(Token::Start)?;
    let start = cur.coord()?;
    cur.word(Token::Goal)?;
    let goal = cur.coord()?;
    let mut layout = Layout::filled(width, height, Cell::Free)?;
    while !cur.done() {
        cur.word(Token::Wall)?;
        let c = cur.coord()?;
        if !layout.contains(c) {
            return Err(GridError::OutOfBounds(c).into());
        }
        if !layout.is_free(c) {
            return Err(CodecError::DuplicateWall(c));
        }
        layout.set(c, Cell::Wall);
    }
    Ok(Grid::new(layout, start, goal)?)
}

pub fn decode_trace(seq: &TokenSeq) -> Result<Trace, CodecError> {
    let mut cur = Cursor::new(seq);
    let mut events = Vec::with_capacity(seq.len() / 5);
    while !cur.done() {
        let kind = match cur.next()? {
            Token::Create => EventKind::Create,
            Token::Close => EventKind::Close,
            t => return Err(cur.unexpected(t, "create or close")),
        };
        let pos = cur.coord()?;
        let g = cur.cost()?;
        let h = cur.cost()?;
        events.push(TraceEvent { kind, pos, g, h });
    }
    Ok(Trace { events })
}

pub fn decode_plan(seq: &TokenSeq) -> Result<Plan, CodecError> {
    let mut cur = Cursor::new(seq);
    let mut cells = Vec::with_capacity(seq.len() / 3);
    while !cur.done() {
        cur.word(Token::Plan)?;
        cells.push(cur.coord()?);
    }
    Ok(Plan { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::astar_trace;

    fn sample_grid() -> Grid {
        let mut layout = Layout::filled(6, 5, Cell::Free).unwrap();
        for (x, y) in [(0, 0), (0, 1), (3, 2), (5, 4)] {
            layout.set(Coord::new(x, y), Cell::Wall);
        }
        Grid::new(layout, Coord::new(1, 1), Coord::new(4, 3)).unwrap()
    }

    #[test]
    fn token_parsing() {
        assert_eq!("c12".parse::<Token>().unwrap(), Token::Cost(12));
        assert_eq!("0".parse::<Token>().unwrap(), Token::Num(0));
        assert!("07".parse::<Token>().is_err());
        assert!("c".parse::<Token>().is_err());
        assert!("-1".parse::<Token>().is_err());
        assert!("Plan".parse::<Token>().is_err());
    }

    #[test]
    fn problem_text_and_round_trip() {
        let g = sample_grid();
        let seq = encode_problem(&g);
        assert_eq!(
            seq.to_string(),
            "start 1 1 goal 4 3 wall 0 0 wall 0 1 wall 3 2 wall 5 4"
        );
        let parsed: TokenSeq = seq.to_string().parse().unwrap();
        assert_eq!(decode_problem(&parsed, 6, 5).unwrap(), g);
    }

    #[test]
    fn zero_walls_is_six_tokens() {
        let g = Grid::new(
            Layout::filled(5, 5, Cell::Free).unwrap(),
            Coord::new(0, 0),
            Coord::new(4, 4),
        )
        .unwrap();
        assert_eq!(encode_problem(&g).len(), 6);
    }

    #[test]
    fn trace_and_plan_round_trip() {
        let r = astar_trace(&sample_grid()).unwrap();
        let t = encode_trace(&r.trace);
        let p = encode_plan(&r.plan);
        assert_eq!(t.len(), 5 * r.difficulty);
        assert_eq!(p.len(), 3 * r.plan.len());
        assert_eq!(decode_trace(&t).unwrap(), r.trace);
        assert_eq!(decode_plan(&p).unwrap(), r.plan);
        assert!(encode_plan(&Plan::default()).is_empty());
    }

    #[test]
    fn decode_errors() {
        let seq: TokenSeq = "start 1 1 goal 4".parse().unwrap();
        assert_eq!(decode_problem(&seq, 6, 5), Err(CodecError::Truncated(5)));
        let seq: TokenSeq = "start 1 1 goal 4 3 wall 9 9".parse().unwrap();
        assert!(matches!(decode_problem(&seq, 6, 5), Err(CodecError::Grid(_))));
        let seq: TokenSeq = "close 1 1 3 c0".parse().unwrap();
        assert!(matches!(
            decode_trace(&seq),
            Err(CodecError::Unexpected { position: 3, .. })
        ));
    }
}
