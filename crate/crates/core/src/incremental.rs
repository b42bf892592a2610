//! Incremental solving over batches of input facts.
//!
//! Each iteration solves the encoding together with the facts of the previous
//! answer set and the next batch, from scratch. Nothing is retracted: if an
//! iteration has no answer set the run stops there.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::ground::{ground, ground_timed, GroundOptions, GroundingStats};
use crate::lang::{Atom, Program};
use crate::solve::{check_stable, solve_with, timed_out, AnswerSet, SolveOptions};

/// The `index`-th set of input facts (1-based).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactBatch {
    pub index: usize,
    pub facts: Vec<Atom>,
}

/// One fact per atom, in canonical order.
pub fn facts_of(a: &AnswerSet) -> Vec<Atom> {
    a.atoms.iter().cloned().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Sat,
    Unsat,
    Timeout,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Timeout => "timeout",
        })
    }
}

/// Result of one engine call.
#[derive(Clone, Debug)]
pub struct EngineRun {
    pub status: Status,
    pub model: Option<AnswerSet>,
    /// Grounding size, when the engine exposes its grounding.
    pub stats: Option<GroundingStats>,
    pub ground_time: Duration,
    pub solve_time: Duration,
}

/// A stateless solver: every call starts from scratch.
pub trait Engine {
    fn first_model(&self, p: &Program) -> Result<EngineRun>;
}

/// Ground with [`ground`](crate::ground::ground) and take the solver's first model.
#[derive(Clone, Debug, Default)]
pub struct InternalEngine {
    pub ground: GroundOptions,
    pub deadline: Option<Instant>,
}

impl InternalEngine {
    pub fn with_deadline(deadline: Option<Instant>) -> InternalEngine {
        InternalEngine {
            ground: GroundOptions {
                deadline,
                ..GroundOptions::default()
            },
            deadline,
        }
    }
}

impl Engine for InternalEngine {
    fn first_model(&self, p: &Program) -> Result<EngineRun> {
        let timeout = |ground_time, solve_time| EngineRun {
            status: Status::Timeout,
            model: None,
            stats: None,
            ground_time,
            solve_time,
        };
        if timed_out(self.deadline) {
            return Ok(timeout(Duration::ZERO, Duration::ZERO));
        }
        let start = Instant::now();
        let (g, stats) = match ground_timed(p, &self.ground) {
            Ok(x) => x,
            Err(Error::Timeout { .. }) => return Ok(timeout(start.elapsed(), Duration::ZERO)),
            Err(e) => return Err(e),
        };
        let ground_time = stats.elapsed;
        let solve_start = Instant::now();
        let opts = SolveOptions {
            limit: Some(1),
            deadline: self.deadline,
        };
        let models = match solve_with(&g, &opts) {
            Ok(m) => m,
            Err(Error::Timeout { .. }) => {
                let mut run = timeout(ground_time, solve_start.elapsed());
                run.stats = Some(stats);
                return Ok(run);
            }
            Err(e) => return Err(e),
        };
        let solve_time = solve_start.elapsed();
        let model = models.into_iter().next();
        Ok(EngineRun {
            status: if model.is_some() { Status::Sat } else { Status::Unsat },
            model,
            stats: Some(stats),
            ground_time,
            solve_time,
        })
    }
}

#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub index: usize,
    pub input_fact_count: usize,
    pub stats: Option<GroundingStats>,
    pub ground_time: Duration,
    pub solve_time: Duration,
    pub answer_set_size: usize,
    pub status: Status,
}

/// Whether to check the final answer set against the whole program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VerifyFinal {
    On,
    Off,
    /// On when the union of all batches has at most [`AUTO_VERIFY_FACTS`] facts.
    #[default]
    Auto,
}

/// Input size up to which [`VerifyFinal::Auto`] verifies.
pub const AUTO_VERIFY_FACTS: usize = 200;

#[derive(Clone, Debug)]
pub struct IncrementalResult {
    pub model: AnswerSet,
    pub traces: Vec<IterationTrace>,
    /// Outcome of the final check, `None` when it was not run.
    pub verified: Option<bool>,
}

pub fn incremental_solve(
    encoding: &Program,
    batches: &[FactBatch],
    engine: &dyn Engine,
    verify: VerifyFinal,
) -> Result<IncrementalResult> {
    let (traces, outcome) = incremental_solve_traced(encoding, batches, engine, verify);
    outcome.map(|(model, verified)| IncrementalResult {
        model,
        traces,
        verified,
    })
}

/// Like [`incremental_solve`], but hands back the traces of every iteration
/// that ran even when the run fails.
#[allow(clippy::type_complexity)]
pub fn incremental_solve_traced(
    encoding: &Program,
    batches: &[FactBatch],
    engine: &dyn Engine,
    verify: VerifyFinal,
) -> (Vec<IterationTrace>, Result<(AnswerSet, Option<bool>)>) {
    let mut traces = Vec::with_capacity(batches.len());
    let mut delta = AnswerSet::default();
    for (i, batch) in batches.iter().enumerate() {
        let iteration = i + 1;
        let input: BTreeSet<Atom> = facts_of(&delta)
            .into_iter()
            .chain(batch.facts.iter().cloned())
            .collect();
        let program = encoding.with_facts(input.iter().cloned());
        let run = match engine.first_model(&program) {
            Ok(r) => r,
            Err(e) => return (traces, Err(e)),
        };
        traces.push(IterationTrace {
            index: iteration,
            input_fact_count: input.len(),
            stats: run.stats,
            ground_time: run.ground_time,
            solve_time: run.solve_time,
            answer_set_size: run.model.as_ref().map_or(0, AnswerSet::len),
            status: run.status,
        });
        match (run.status, run.model) {
            (Status::Sat, Some(m)) => delta = m,
            (Status::Timeout, _) => return (traces, Err(Error::EngineTimeout { iteration })),
            _ => return (traces, Err(Error::IterationUnsat { iteration })),
        }
    }
    let total: usize = batches.iter().map(|b| b.facts.len()).sum();
    let run_check = match verify {
        VerifyFinal::On => true,
        VerifyFinal::Off => false,
        VerifyFinal::Auto => total <= AUTO_VERIFY_FACTS,
    };
    let verified = if run_check {
        match verify_final(encoding, batches, &delta) {
            Ok(v) => Some(v),
            Err(e) => return (traces, Err(e)),
        }
    } else {
        None
    };
    (traces, Ok((delta, verified)))
}

/// Whether `model` is a stable model of the encoding with every batch added.
pub fn verify_final(encoding: &Program, batches: &[FactBatch], model: &AnswerSet) -> Result<bool> {
    let program = encoding.with_facts(batches.iter().flat_map(|b| b.facts.iter().cloned()));
    let g = ground(&program)?;
    Ok(check_stable(&g, &model.to_interpretation()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_atoms, parse_program};
    use crate::solve::solve;

    #[test]
    fn facts_of_is_canonical() {
        assert!(facts_of(&AnswerSet::default()).is_empty());
        let a = AnswerSet::new(parse_atoms("roomTOcabinet(1,1) cabinet(1)").unwrap());
        let facts: Vec<String> = facts_of(&a).iter().map(|f| format!("{f}.")).collect();
        assert_eq!(facts, ["cabinet(1).", "roomTOcabinet(1,1)."]);
    }

    #[test]
    fn single_batch_matches_one_shot() {
        let p = parse_program(include_str!("../fixtures/module_frame.lp")).unwrap();
        let encoding = Program::new(p.rules.clone(), vec![]);
        let batch = FactBatch {
            index: 1,
            facts: p.facts.clone(),
        };
        let res = incremental_solve(&encoding, &[batch], &InternalEngine::default(), VerifyFinal::On).unwrap();
        let one_shot = solve(&ground(&p).unwrap(), 1).unwrap();
        assert_eq!(res.model, one_shot[0]);
        assert_eq!(res.verified, Some(true));
        assert_eq!(res.traces.len(), 1);
        assert_eq!(res.traces[0].status, Status::Sat);
    }

    #[test]
    fn unsat_iteration_reported() {
        let encoding = parse_program("a(X) :- b(X), not c(X). c(X) :- b(X), not a(X). :- a(2).").unwrap();
        let batches = [
            FactBatch {
                index: 1,
                facts: parse_atoms("b(1)").unwrap(),
            },
            FactBatch {
                index: 2,
                facts: parse_atoms("b(2) d").unwrap(),
            },
            FactBatch {
                index: 3,
                facts: parse_atoms("e").unwrap(),
            },
        ];
        let res = incremental_solve(&encoding, &batches, &InternalEngine::default(), VerifyFinal::On).unwrap();
        assert_eq!(res.traces.len(), 3);
        let strict = parse_program(":- d.").unwrap();
        let err = incremental_solve(&strict, &batches, &InternalEngine::default(), VerifyFinal::Off).unwrap_err();
        assert_eq!(err, Error::IterationUnsat { iteration: 2 });
    }

    #[test]
    fn expired_deadline_is_engine_timeout() {
        let p = parse_program(include_str!("../fixtures/module_frame.lp")).unwrap();
        let engine = InternalEngine::with_deadline(Some(Instant::now()));
        let batch = FactBatch {
            index: 1,
            facts: vec![],
        };
        let err = incremental_solve(&p, &[batch], &engine, VerifyFinal::Off).unwrap_err();
        assert_eq!(err, Error::EngineTimeout { iteration: 1 });
    }
}
