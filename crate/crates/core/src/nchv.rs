//! Noncontextual value assignments.
//!
//! An assignment gives every projector a 0/1 value independent of context.
//! It is admissible when it extends the forced values, gives exactly one
//! member of every context the value 1, and never gives both members of an
//! exclusive pair the value 1. [`enumerate_assignments`] checks all `2^n`
//! assignments; [`contradiction_trace`] rebuilds the refutation by unit
//! propagation alone.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::hilbert::Bit;
use crate::prepost::{self, PrePostError};
use crate::scenario::{ForcedValue, Justification, PrePostScenario, ValueAssignment};

/// Largest projector count accepted for exhaustive enumeration.
pub const MAX_EXHAUSTIVE: usize = 24;

// Below this many projectors the enumeration stays on the calling thread.
const PARALLEL_THRESHOLD: usize = 16;
const BLOCK_BITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NchvError {
    #[error("{0} projectors exceed the exhaustive-enumeration limit of {MAX_EXHAUSTIVE}")]
    TooManyProjectors(usize),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("no contradiction exists: an admissible assignment was found")]
    NoContradiction,
    #[error("UNSAT without unit-propagation certificate")]
    NoPropagationCertificate,
    #[error(transparent)]
    PrePost(#[from] PrePostError),
}

pub type Result<T> = std::result::Result<T, NchvError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatisfiabilityReport {
    pub status: Status,
    /// Every admissible assignment, in lexicographic order of the bit string
    /// taken in projector order.
    pub witnesses: Vec<ValueAssignment>,
    pub assignments_examined: u64,
    /// Propagation refutation, when the instance is UNSAT and one exists.
    pub conflict: Option<ContradictionTrace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    SumRule,
    Exclusivity,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::SumRule => "sum rule",
            Rule::Exclusivity => "exclusivity",
        })
    }
}

/// Where a premise value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Forced(Justification),
    /// Conclusion of an earlier step (index into the trace).
    Step(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Premise {
    pub label: String,
    pub bit: Bit,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conclusion {
    Value { label: String, bit: Bit },
    Conflict { labels: Vec<String> },
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Value { label, bit } => write!(f, "{label}={bit}"),
            Conclusion::Conflict { labels } => write!(f, "CONFLICT({})", labels.join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub premises: Vec<Premise>,
    pub rule: Rule,
    pub conclusion: Conclusion,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let premises: Vec<String> = self
            .premises
            .iter()
            .map(|p| match p.origin {
                Origin::Forced(Justification::Prediction) => format!("{}={} [pred]", p.label, p.bit),
                Origin::Forced(Justification::Retrodiction) => format!("{}={} [retro]", p.label, p.bit),
                Origin::Step(i) => format!("{}={} [step {}]", p.label, p.bit, i + 1),
            })
            .collect();
        write!(f, "{} => {} ({})", premises.join(", "), self.conclusion, self.rule)
    }
}

/// Ordered derivation ending in a conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContradictionTrace {
    pub steps: Vec<Step>,
}

impl ContradictionTrace {
    /// Conclusions only, e.g. `["delta+=1", "delta-=1", "CONFLICT(delta+, delta-)"]`.
    pub fn conclusions(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.conclusion.to_string()).collect()
    }
}

/// Contexts, pairs and forced values as bitmasks; projector `i` is bit `n-1-i`
/// so numeric order of masks is lexicographic order of assignments.
struct Constraints {
    n: usize,
    contexts: Vec<u32>,
    pairs: Vec<u32>,
    forced_mask: u32,
    forced_bits: u32,
}

impl Constraints {
    fn build(s: &PrePostScenario, forced: &[ForcedValue]) -> Result<Self> {
        let n = s.projectors().len();
        if n > MAX_EXHAUSTIVE {
            return Err(NchvError::TooManyProjectors(n));
        }
        let bit = |label: &str| -> Result<u32> {
            s.position(label)
                .map(|i| 1u32 << (n - 1 - i))
                .ok_or_else(|| NchvError::UnknownLabel(label.to_string()))
        };
        let contexts = s
            .contexts()
            .iter()
            .map(|c| c.members.iter().try_fold(0u32, |m, l| Ok(m | bit(l)?)))
            .collect::<Result<_>>()?;
        let pairs = s
            .exclusive_pairs()
            .iter()
            .map(|(a, b)| Ok(bit(a)? | bit(b)?))
            .collect::<Result<_>>()?;
        let (mut forced_mask, mut forced_bits) = (0, 0);
        for f in forced {
            let b = bit(&f.label)?;
            forced_mask |= b;
            if f.bit == Bit::One {
                forced_bits |= b;
            }
        }
        Ok(Self {
            n,
            contexts,
            pairs,
            forced_mask,
            forced_bits,
        })
    }

    fn admissible(&self, mask: u32) -> bool {
        mask & self.forced_mask == self.forced_bits
            && self.contexts.iter().all(|&c| (mask & c).count_ones() == 1)
            && self.pairs.iter().all(|&p| (mask & p).count_ones() < 2)
    }

    fn scan(&self, range: std::ops::Range<u64>) -> Vec<u32> {
        range.map(|m| m as u32).filter(|&m| self.admissible(m)).collect()
    }
}

fn to_assignment(s: &PrePostScenario, mask: u32) -> ValueAssignment {
    let n = s.projectors().len();
    ValueAssignment::new(
        s.labels()
            .enumerate()
            .map(|(i, l)| (l.to_string(), Bit::from_bool(mask >> (n - 1 - i) & 1 == 1)))
            .collect(),
    )
}

/// Checks every total 0/1 assignment of the scenario's projectors against
/// the forced values, the sum rule on each context and the exclusive pairs.
pub fn enumerate_assignments(s: &PrePostScenario, forced: &[ForcedValue]) -> Result<SatisfiabilityReport> {
    let cons = Constraints::build(s, forced)?;
    let total = 1u64 << cons.n;
    let masks = if cons.n < PARALLEL_THRESHOLD {
        cons.scan(0..total)
    } else {
        let block = 1u64 << BLOCK_BITS;
        (0..total / block)
            .into_par_iter()
            .flat_map_iter(|b| cons.scan(b * block..(b + 1) * block))
            .collect()
    };
    let witnesses: Vec<ValueAssignment> = masks.into_iter().map(|m| to_assignment(s, m)).collect();
    let status = if witnesses.is_empty() {
        Status::Unsat
    } else {
        Status::Sat
    };
    let conflict = match (status, propagate(s, forced)?) {
        (Status::Unsat, Propagation::Conflict(trace)) => Some(trace),
        _ => None,
    };
    Ok(SatisfiabilityReport {
        status,
        witnesses,
        assignments_examined: total,
        conflict,
    })
}

/// Result of running unit propagation to a fixpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum Propagation {
    Conflict(ContradictionTrace),
    /// No conflict; the partial assignment reached, in projector order.
    Fixpoint(Vec<Option<Bit>>),
}

/// Unit propagation from the forced values. Each round first looks for a
/// violated context or pair, then applies the first available derivation in
/// this order: a context with all but one member 0 sets that member to 1; a
/// context with a member at 1 sets another open member to 0; an exclusive pair
/// with one member at 1 sets the other to 0.
pub fn propagate(s: &PrePostScenario, forced: &[ForcedValue]) -> Result<Propagation> {
    let idx = |label: &str| {
        s.position(label)
            .ok_or_else(|| NchvError::UnknownLabel(label.to_string()))
    };
    let contexts: Vec<Vec<usize>> = s
        .contexts()
        .iter()
        .map(|c| c.members.iter().map(|l| idx(l)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = s
        .exclusive_pairs()
        .iter()
        .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
        .collect::<Result<_>>()?;
    let labels: Vec<&str> = s.labels().collect();

    let mut values: Vec<Option<(Bit, Origin)>> = vec![None; labels.len()];
    for f in forced {
        values[idx(&f.label)?] = Some((f.bit, Origin::Forced(f.justification)));
    }
    let mut steps: Vec<Step> = Vec::new();

    let premise = |values: &[Option<(Bit, Origin)>], i: usize| {
        let (bit, origin) = values[i].expect("premise is assigned");
        Premise {
            label: labels[i].to_string(),
            bit,
            origin,
        }
    };
    let has = |values: &[Option<(Bit, Origin)>], i: usize, b: Bit| matches!(values[i], Some((v, _)) if v == b);

    loop {
        // Violations.
        let mut conflict = None;
        for ctx in &contexts {
            let ones: Vec<usize> = ctx.iter().copied().filter(|&i| has(&values, i, Bit::One)).collect();
            if ones.len() >= 2 {
                conflict = Some((ones[..2].to_vec(), Rule::SumRule));
            } else if ctx.iter().all(|&i| has(&values, i, Bit::Zero)) {
                conflict = Some((ctx.clone(), Rule::SumRule));
            }
            if conflict.is_some() {
                break;
            }
        }
        if conflict.is_none() {
            conflict = pairs
                .iter()
                .find(|&&(a, b)| has(&values, a, Bit::One) && has(&values, b, Bit::One))
                .map(|&(a, b)| (vec![a, b], Rule::Exclusivity));
        }
        if let Some((involved, rule)) = conflict {
            steps.push(Step {
                premises: involved.iter().map(|&i| premise(&values, i)).collect(),
                rule,
                conclusion: Conclusion::Conflict {
                    labels: involved.iter().map(|&i| labels[i].to_string()).collect(),
                },
            });
            return Ok(Propagation::Conflict(ContradictionTrace { steps }));
        }

        // Derivations.
        let mut derived: Option<(usize, Bit, Rule, Vec<usize>)> = None;
        for ctx in &contexts {
            let open: Vec<usize> = ctx.iter().copied().filter(|&i| values[i].is_none()).collect();
            if open.len() == 1 && ctx.iter().all(|&i| i == open[0] || has(&values, i, Bit::Zero)) {
                let zeros = ctx.iter().copied().filter(|&i| i != open[0]).collect();
                derived = Some((open[0], Bit::One, Rule::SumRule, zeros));
                break;
            }
        }
        if derived.is_none() {
            derived = contexts.iter().find_map(|ctx| {
                let one = ctx.iter().copied().find(|&i| has(&values, i, Bit::One))?;
                let open = ctx.iter().copied().find(|&i| values[i].is_none())?;
                Some((open, Bit::Zero, Rule::SumRule, vec![one]))
            });
        }
        if derived.is_none() {
            derived = pairs.iter().find_map(|&(a, b)| {
                if has(&values, a, Bit::One) && values[b].is_none() {
                    Some((b, Bit::Zero, Rule::Exclusivity, vec![a]))
                } else if has(&values, b, Bit::One) && values[a].is_none() {
                    Some((a, Bit::Zero, Rule::Exclusivity, vec![b]))
                } else {
                    None
                }
            });
        }
        match derived {
            Some((target, bit, rule, from)) => {
                steps.push(Step {
                    premises: from.iter().map(|&i| premise(&values, i)).collect(),
                    rule,
                    conclusion: Conclusion::Value {
                        label: labels[target].to_string(),
                        bit,
                    },
                });
                values[target] = Some((bit, Origin::Step(steps.len() - 1)));
            }
            None => {
                return Ok(Propagation::Fixpoint(
                    values.iter().map(|v| v.map(|(b, _)| b)).collect(),
                ));
            }
        }
    }
}

/// Derives the scenario's forced values and refutes every noncontextual
/// assignment by unit propagation.
pub fn contradiction_trace(s: &PrePostScenario, tol: f64) -> Result<ContradictionTrace> {
    let forced = prepost::forced_values(s, tol)?;
    let report = enumerate_assignments(s, &forced)?;
    if report.status == Status::Sat {
        return Err(NchvError::NoContradiction);
    }
    match propagate(s, &forced)? {
        Propagation::Conflict(trace) => Ok(trace),
        Propagation::Fixpoint(_) => Err(NchvError::NoPropagationCertificate),
    }
}
