use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::codec::{
    decode_plan, decode_problem, decode_trace, encode_plan, encode_problem, encode_trace, id_of_problem_text, TokenSeq,
};
use crate::grid::Grid;
use crate::maze::{GeneratorKind, ProblemInstance};
use crate::search::{Plan, Trace};

/// One stored datapoint: problem, ground-truth trace and optimal plan in
/// their token surface form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub kind: GeneratorKind,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub problem: String,
    pub trace: String,
    pub plan: String,
    pub difficulty: usize,
    pub plan_len: usize,
}

impl InstanceRecord {
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        let problem = encode_problem(&inst.grid).to_string();
        Self {
            id: id_of_problem_text(&problem),
            kind: inst.kind,
            seed: inst.seed,
            width: inst.grid.width(),
            height: inst.grid.height(),
            problem,
            trace: encode_trace(&inst.trace).to_string(),
            plan: encode_plan(&inst.plan).to_string(),
            difficulty: inst.difficulty,
            plan_len: inst.plan.len(),
        }
    }

    /// Ground-truth trace length in tokens.
    pub fn trace_tokens(&self) -> usize {
        5 * self.difficulty
    }

    pub fn grid(&self) -> Result<Grid, DatasetError> {
        let seq: TokenSeq = self.problem.parse().map_err(|e| self.invalid(e))?;
        decode_problem(&seq, self.width, self.height).map_err(|e| self.invalid(e))
    }

    pub fn decoded_trace(&self) -> Result<Trace, DatasetError> {
        let seq: TokenSeq = self.trace.parse().map_err(|e| self.invalid(e))?;
        decode_trace(&seq).map_err(|e| self.invalid(e))
    }

    pub fn decoded_plan(&self) -> Result<Plan, DatasetError> {
        let seq: TokenSeq = self.plan.parse().map_err(|e| self.invalid(e))?;
        decode_plan(&seq).map_err(|e| self.invalid(e))
    }

    fn invalid(&self, e: impl std::fmt::Display) -> DatasetError {
        DatasetError::InvalidRecord {
            id: self.id.clone(),
            reason: e.to_string(),
        }
    }

    /// `id  kind  seed  problem  trace  plan`, tab separated, no newline.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.id, self.kind, self.seed, self.problem, self.trace, self.plan
        )
    }

    /// Parses a shard line; derived fields are recomputed and the id checked.
    pub fn parse_line(line: &str, width: usize, height: usize) -> Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, kind, seed, problem, trace, plan] = fields[..] else {
            return Err(format!("expected 6 tab-separated fields, found {}", fields.len()));
        };
        let kind: GeneratorKind = kind.parse().map_err(|e| format!("{e}"))?;
        let seed: u64 = seed.parse().map_err(|e| format!("bad seed: {e}"))?;
        if id_of_problem_text(problem) != id {
            return Err(format!("id {id} does not match the problem text"));
        }
        let trace_len = trace.split_whitespace().count();
        let plan_len = plan.split_whitespace().count();
        if trace_len == 0 || trace_len % 5 != 0 || plan_len % 3 != 0 {
            return Err("trace or plan token count is not a whole number of records".into());
        }
        Ok(Self {
            id: id.to_string(),
            kind,
            seed,
            width,
            height,
            problem: problem.to_string(),
            trace: trace.to_string(),
            plan: plan.to_string(),
            difficulty: trace_len / 5,
            plan_len: plan_len / 3,
        })
    }
}
