use std::collections::HashMap;

use super::{CodecError, Token, TokenSeq};

pub const STRUCTURAL_WORDS: [&str; 9] = ["start", "goal", "wall", "create", "close", "plan", "bos", "eos", "pad"];

/// Fixed token inventory: structural words, coordinates `0..max(W, H)`,
/// costs `c0..=cMAX`, then optional extra special tokens `extra0..`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    coord_limit: usize,
    max_cost: usize,
}

/// Vocabulary for `width` x `height` grids with costs up to `max_cost`.
pub fn build_vocab(width: usize, height: usize, max_cost: usize) -> Vocabulary {
    Vocabulary::new(width, height, max_cost, 0)
}

impl Vocabulary {
    pub fn new(width: usize, height: usize, max_cost: usize, extra_specials: usize) -> Self {
        let coord_limit = width.max(height);
        let tokens: Vec<String> = STRUCTURAL_WORDS
            .iter()
            .map(|w| w.to_string())
            .chain((0..coord_limit).map(|n| n.to_string()))
            .chain((0..=max_cost).map(|n| format!("c{n}")))
            .chain((0..extra_specials).map(|n| format!("extra{n}")))
            .collect();
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self {
            tokens,
            ids,
            coord_limit,
            max_cost,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn max_cost(&self) -> usize {
        self.max_cost
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    fn token_id(&self, t: Token) -> Option<u32> {
        match t {
            Token::Num(n) if n >= self.coord_limit => None,
            Token::Cost(n) if n > self.max_cost => None,
            _ => self.id(&t.to_string()),
        }
    }

    /// Token ids of `seq`; fails on coordinates or costs beyond the inventory.
    pub fn encode_ids(&self, seq: &TokenSeq) -> Result<Vec<u32>, CodecError> {
        seq.tokens()
            .iter()
            .map(|t| {
                self.token_id(*t)
                    .ok_or_else(|| CodecError::OutOfVocabulary { token: t.to_string() })
            })
            .collect()
    }

    pub fn decode_ids(&self, ids: &[u32]) -> Result<TokenSeq, CodecError> {
        ids.iter()
            .map(|id| {
                let tok = self
                    .token(*id)
                    .ok_or_else(|| CodecError::UnknownToken(format!("#{id}")))?;
                tok.parse::<Token>()
            })
            .collect::<Result<_, _>>()
            .map(TokenSeq)
    }

    /// Two-column `token<TAB>id` table, one line per token in id order.
    pub fn export_table(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(t);
            out.push('\t');
            out.push_str(&i.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(build_vocab(30, 30, 900).len(), 940);
        assert_eq!(build_vocab(5, 5, 25).len(), 40);
        assert_eq!(Vocabulary::new(30, 30, 900, 4).len(), 944);
    }

    #[test]
    fn bijective_and_stable() {
        let v = build_vocab(8, 6, 48);
        assert_eq!(v, build_vocab(8, 6, 48));
        assert_eq!(v.export_table(), build_vocab(8, 6, 48).export_table());
        for id in 0..v.len() as u32 {
            assert_eq!(v.id(v.token(id).unwrap()), Some(id));
        }
        assert_eq!(v.id("start"), Some(0));
        assert_eq!(v.id("0"), Some(9));
        assert_eq!(v.id("c0"), Some(17));
    }

    #[test]
    fn out_of_vocabulary_costs() {
        let v = build_vocab(5, 5, 25);
        let ok: TokenSeq = "close 4 4 c25 c0".parse().unwrap();
        let ids = v.encode_ids(&ok).unwrap();
        assert_eq!(v.decode_ids(&ids).unwrap(), ok);
        let bad: TokenSeq = "close 4 4 c26 c0".parse().unwrap();
        assert_eq!(
            v.encode_ids(&bad),
            Err(CodecError::OutOfVocabulary { token: "c26".into() })
        );
        let bad: TokenSeq = "plan 5 0".parse().unwrap();
        assert!(v.encode_ids(&bad).is_err());
    }
}
