//! Pre/post-selected scenarios: the pre and post states, a set of labeled
//! rank-1 propositions, the contexts they are measured in, and the pairs the
//! assignment engine treats as mutually exclusive.

mod file;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::hilbert::{self, Bit, HilbertError, Operator, StateVector};

pub use file::{load, load_with, save, LoadOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown field `{field}` in {path}")]
    UnknownField { path: String, field: String },
    #[error("state `{name}` has {got} amplitudes, expected {expected}")]
    WrongDimension { name: String, got: usize, expected: usize },
    #[error("state `{name}`: {source}")]
    BadState {
        name: String,
        #[source]
        source: HilbertError,
    },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("projector label must be nonempty")]
    EmptyLabel,
    #[error("context {index} has {size} members, need at least 2")]
    ContextTooSmall { index: usize, size: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// A named rank-1 projector `|v⟩⟨v|`, used as a yes/no proposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledProjector {
    label: String,
    state: StateVector,
    operator: Operator,
}

impl LabeledProjector {
    pub fn new(label: impl Into<String>, state: StateVector) -> Self {
        let operator = hilbert::projector(&state);
        Self {
            label: label.into(),
            state,
            operator,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }
}

/// Labels of projectors that are jointly measurable and resolve the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub members: Vec<String>,
}

impl Context {
    pub fn new<S: Into<String>>(members: impl IntoIterator<Item = S>) -> Self {
        Self {
            members: members.into_iter().map(Into::into).collect(),
        }
    }
}

/// How a value was inferred from the boundary states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Justification {
    /// Certain outcome given the pre state.
    Prediction,
    /// Certain outcome given the post state.
    Retrodiction,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Justification::Prediction => "prediction",
            Justification::Retrodiction => "retrodiction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ForcedValue {
    pub label: String,
    pub bit: Bit,
    pub justification: Justification,
}

impl fmt::Display for ForcedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={} ({})", self.label, self.bit, self.justification)
    }
}

/// A total 0/1 assignment, in the scenario's projector order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueAssignment {
    values: Vec<(String, Bit)>,
}

impl ValueAssignment {
    pub fn new(values: Vec<(String, Bit)>) -> Self {
        Self { values }
    }

    pub fn get(&self, label: &str) -> Option<Bit> {
        self.values.iter().find(|(l, _)| l == label).map(|(_, b)| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Bit)> {
        self.values.iter().map(|(l, b)| (l.as_str(), *b))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl fmt::Display for ValueAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (label, bit)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{label}={bit}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrePostScenario {
    dim: usize,
    pre: StateVector,
    post: StateVector,
    projectors: Vec<LabeledProjector>,
    contexts: Vec<Context>,
    exclusive_pairs: Vec<(String, String)>,
    metadata: BTreeMap<String, String>,
    index: HashMap<String, usize>,
}

impl PrePostScenario {
    /// Assembles a scenario, enforcing the structural invariants: a common
    /// dimension, unique nonempty labels and contexts of at least two
    /// members. Dangling label references are left for [`validate`] to report.
    pub fn new(
        pre: StateVector,
        post: StateVector,
        projectors: Vec<LabeledProjector>,
        contexts: Vec<Context>,
        exclusive_pairs: Vec<(String, String)>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let dim = pre.dim();
        let check_dim = |name: &str, s: &StateVector| {
            if s.dim() == dim {
                Ok(())
            } else {
                Err(ScenarioError::WrongDimension {
                    name: name.to_string(),
                    got: s.dim(),
                    expected: dim,
                })
            }
        };
        check_dim("post", &post)?;
        let mut index = HashMap::with_capacity(projectors.len());
        for (i, p) in projectors.iter().enumerate() {
            if p.label.is_empty() {
                return Err(ScenarioError::EmptyLabel);
            }
            check_dim(&p.label, &p.state)?;
            if index.insert(p.label.clone(), i).is_some() {
                return Err(ScenarioError::DuplicateLabel(p.label.clone()));
            }
        }
        for (i, c) in contexts.iter().enumerate() {
            if c.members.len() < 2 {
                return Err(ScenarioError::ContextTooSmall {
                    index: i,
                    size: c.members.len(),
                });
            }
        }
        Ok(Self {
            dim,
            pre,
            post,
            projectors,
            contexts,
            exclusive_pairs,
            metadata,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pre(&self) -> &StateVector {
        &self.pre
    }

    pub fn post(&self) -> &StateVector {
        &self.post
    }

    pub fn projectors(&self) -> &[LabeledProjector] {
        &self.projectors
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn exclusive_pairs(&self) -> &[(String, String)] {
        &self.exclusive_pairs
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn projector(&self, label: &str) -> Option<&LabeledProjector> {
        self.index.get(label).map(|&i| &self.projectors[i])
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.projectors.iter().map(|p| p.label.as_str())
    }

    /// A copy with the pre and post states exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pre: self.post.clone(),
            post: self.pre.clone(),
            ..self.clone()
        }
    }

    /// A copy with different boundary states; panics on a dimension change.
    pub fn with_states(&self, pre: StateVector, post: StateVector) -> Self {
        assert!(pre.dim() == self.dim && post.dim() == self.dim);
        Self {
            pre,
            post,
            ..self.clone()
        }
    }

    /// A copy with one context replaced.
    pub fn with_context(&self, index: usize, context: Context) -> Result<Self> {
        let mut contexts = self.contexts.clone();
        contexts[index] = context;
        Self::new(
            self.pre.clone(),
            self.post.clone(),
            self.projectors.clone(),
            contexts,
            self.exclusive_pairs.clone(),
            self.metadata.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: String,
    pub pass: bool,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: String, pass: bool, deviation: f64) {
        self.checks.push(ValidationCheck { name, pass, deviation });
    }
}

pub fn context_name(index: usize, context: &Context) -> String {
    format!("context {index} {{{}}}", context.members.join(", "))
}

/// Checks every scenario invariant at tolerance `tol`. Never fails: broken
/// references and numeric violations become failed entries.
///
/// Resolution-of-identity entries report the Frobenius norm of `ΣP − I`,
/// which is exactly 1 when a single rank-1 member is missing.
pub fn validate(s: &PrePostScenario, tol: f64) -> ValidationReport {
    let mut report = ValidationReport { checks: Vec::new() };

    let norm_dev = |v: &StateVector| (v.norm() - 1.0).abs();
    report.push("normalized pre".into(), norm_dev(&s.pre) < tol, norm_dev(&s.pre));
    report.push("normalized post".into(), norm_dev(&s.post) < tol, norm_dev(&s.post));
    for p in &s.projectors {
        let d = norm_dev(&p.state);
        report.push(format!("normalized {}", p.label), d < tol, d);
    }

    let overlap = hilbert::vdot(s.post.amps(), s.pre.amps()).norm();
    report.push("postselection possible".into(), overlap > tol, overlap);

    for (i, ctx) in s.contexts.iter().enumerate() {
        let name = context_name(i, ctx);
        let missing = ctx.members.iter().filter(|m| s.projector(m).is_none()).count();
        report.push(format!("{name} labels resolve"), missing == 0, missing as f64);
        if missing > 0 {
            continue;
        }
        let ops: Vec<Operator> = ctx
            .members
            .iter()
            .map(|m| s.projector(m).unwrap().operator.clone())
            .collect();
        let (pass, dev) = match (
            hilbert::is_resolution_of_identity(&ops, tol),
            hilbert::sum_minus_identity(&ops),
        ) {
            (Ok(pass), Ok(diff)) => (pass, diff.frobenius_norm()),
            _ => (false, f64::INFINITY),
        };
        report.push(format!("{name} resolves identity"), pass, dev);

        let total: f64 = ctx
            .members
            .iter()
            .map(|m| {
                let st = s.projector(m).unwrap().state.amps();
                hilbert::vdot(st, s.pre.amps()).norm_sqr()
            })
            .sum();
        let dev = (total - 1.0).abs();
        report.push(format!("{name} probabilities complete"), dev < tol, dev);
    }

    for (a, b) in &s.exclusive_pairs {
        let name = format!("exclusive pair ({a}, {b})");
        match (s.projector(a), s.projector(b)) {
            (Some(p), Some(q)) => {
                let dev = p
                    .operator
                    .mul(&q.operator)
                    .map(|m| m.max_abs_entry())
                    .unwrap_or(f64::INFINITY);
                report.push(name, dev < tol, dev);
            }
            (pa, pb) => {
                let missing = usize::from(pa.is_none()) + usize::from(pb.is_none());
                report.push(format!("{name} labels resolve"), false, missing as f64);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::cabello_scenario;
    use crate::hilbert::TOL_CHECK;

    #[test]
    fn cabello_passes_validation() {
        let report = validate(&cabello_scenario(), TOL_CHECK);
        assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
        assert_eq!(validate(&cabello_scenario(), TOL_CHECK), report);
    }

    #[test]
    fn orthogonal_post_fails_postselection() {
        let s = cabello_scenario();
        let post = StateVector::basis(4, 3);
        let bad = s.with_states(s.pre().clone(), post);
        let report = validate(&bad, TOL_CHECK);
        let check = report.get("postselection possible").unwrap();
        assert!(!check.pass);
        assert_eq!(check.deviation, 0.0);
        assert!(!report.passed());
    }

    #[test]
    fn dropping_a_member_breaks_resolution() {
        let s = cabello_scenario();
        let bad = s.with_context(0, Context::new(["alpha", "beta+", "gamma+"])).unwrap();
        let report = validate(&bad, TOL_CHECK);
        let check = report
            .get("context 0 {alpha, beta+, gamma+} resolves identity")
            .unwrap();
        assert!(!check.pass);
        assert!((check.deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dangling_labels_are_failures_not_errors() {
        let s = cabello_scenario();
        let bad = s.with_context(1, Context::new(["alpha", "nope"])).unwrap();
        let report = validate(&bad, TOL_CHECK);
        let check = report.get("context 1 {alpha, nope} labels resolve").unwrap();
        assert!(!check.pass);
        assert_eq!(check.deviation, 1.0);
    }

    #[test]
    fn structural_errors() {
        let s = cabello_scenario();
        let mut projectors = s.projectors().to_vec();
        projectors.push(projectors[0].clone());
        let err = PrePostScenario::new(
            s.pre().clone(),
            s.post().clone(),
            projectors,
            vec![],
            vec![],
            BTreeMap::new(),
        );
        assert_eq!(err, Err(ScenarioError::DuplicateLabel("alpha".into())));

        let err = PrePostScenario::new(
            s.pre().clone(),
            StateVector::basis(2, 0),
            vec![],
            vec![],
            vec![],
            BTreeMap::new(),
        );
        assert!(matches!(
            err,
            Err(ScenarioError::WrongDimension {
                got: 2,
                expected: 4,
                ..
            })
        ));

        assert!(matches!(
            s.with_context(0, Context::new(["alpha"])),
            Err(ScenarioError::ContextTooSmall { index: 0, size: 1 })
        ));
    }

    #[test]
    fn context_probabilities_sum_to_one() {
        let s = cabello_scenario();
        let report = validate(&s, TOL_CHECK);
        for c in report
            .checks
            .iter()
            .filter(|c| c.name.ends_with("probabilities complete"))
        {
            assert!(c.deviation < 1e-12, "{c:?}");
        }
    }
}
