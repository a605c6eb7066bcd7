//! Builders for the two-qubit scenarios: the unentangled pre/post pair with
//! its seven propositions, the real two-parameter family around it, Hardy's
//! entangled-preselection variant, and random single-qubit scenarios.
//!
//! Two-qubit states use the product basis order
//! `(A⊗B, A⊗B⊥, A⊥⊗B, A⊥⊗B⊥)`, with `A = B = (1, 0)` and `A⊥ = B⊥ = (0, 1)`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::hilbert::{self, Amplitude, HilbertError, StateVector, TOL_CHECK};
use crate::scenario::{Context, LabeledProjector, PrePostScenario};

pub const ALPHA: &str = "alpha";
pub const BETA_PLUS: &str = "beta+";
pub const BETA_MINUS: &str = "beta-";
pub const GAMMA_PLUS: &str = "gamma+";
pub const GAMMA_MINUS: &str = "gamma-";
pub const DELTA_PLUS: &str = "delta+";
pub const DELTA_MINUS: &str = "delta-";

pub const HAT_ALPHA: &str = "hat_alpha";
pub const HAT_BETA_PLUS: &str = "hat_beta+";
pub const HAT_BETA_MINUS: &str = "hat_beta-";
pub const HAT_GAMMA_PLUS: &str = "hat_gamma+";
pub const HAT_GAMMA_MINUS: &str = "hat_gamma-";
pub const HAT_DELTA_PLUS: &str = "hat_delta+";
pub const HAT_DELTA_MINUS: &str = "hat_delta-";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("parameter {name} = {value} outside the open interval ({lo}, {hi})")]
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("n_contexts must be at least 1")]
    NoContexts,
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, ConstructionError>;

fn open_interval(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(ConstructionError::Domain { name, value, lo, hi })
    }
}

fn real(coords: &[f64]) -> StateVector {
    StateVector::from_real(coords).expect("construction coefficients are normalized")
}

fn qubit(theta: f64) -> StateVector {
    real(&[theta.cos(), theta.sin()])
}

fn qubit_perp(theta: f64) -> StateVector {
    real(&[-theta.sin(), theta.cos()])
}

fn metadata(name: &str, description: &str) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("name".to_string(), name.to_string()),
        ("description".to_string(), description.to_string()),
    ])
}

fn two_context_scenario(
    pre: StateVector,
    post: StateVector,
    states: [(&str, StateVector); 7],
    meta: BTreeMap<String, String>,
) -> PrePostScenario {
    let [a, bp, bm, gp, gm, dp, dm] = states.each_ref().map(|(l, _)| *l);
    let contexts = vec![Context::new([a, bp, gp, dp]), Context::new([a, bm, gm, dm])];
    let pairs = vec![(dp.to_string(), dm.to_string())];
    let projectors = states.into_iter().map(|(l, s)| LabeledProjector::new(l, s)).collect();
    PrePostScenario::new(pre, post, projectors, contexts, pairs, meta)
        .expect("builder labels are unique and dimensions agree")
}

/// Two spin-½ particles preselected in `A⊗B` and postselected in `a⊗B`
/// with `a = (A − √8 A⊥)/3`, plus the seven propositions whose forced values
/// admit no noncontextual assignment.
pub fn cabello_scenario() -> PrePostScenario {
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let r6 = 6f64.sqrt();
    let r8 = 8f64.sqrt();
    let big_a = StateVector::basis(2, 0);
    let big_b = StateVector::basis(2, 0);
    let small_a = real(&[1.0 / 3.0, -r8 / 3.0]);

    let pre = hilbert::tensor(&big_a, &big_b);
    let post = hilbert::tensor(&small_a, &big_b);
    let k = 1.0 / (2.0 * r3);
    let states = [
        (ALPHA, real(&[0.0, 0.0, 0.0, 1.0])),
        (BETA_PLUS, real(&[0.0, 0.5, r3 / 2.0, 0.0])),
        (BETA_MINUS, real(&[0.0, 0.5, -r3 / 2.0, 0.0])),
        (GAMMA_PLUS, real(&[k * r8, -k * r3, k, 0.0])),
        (GAMMA_MINUS, real(&[k * r8, k * r3, k, 0.0])),
        (DELTA_PLUS, real(&[2.0 * k, k * r6, -k * r2, 0.0])),
        (DELTA_MINUS, real(&[-2.0 * k, k * r6, k * r2, 0.0])),
    ];
    two_context_scenario(
        pre,
        post,
        states,
        metadata(
            "cabello",
            "two spin-1/2 particles preselected in A(x)B and postselected in a(x)B",
        ),
    )
}

/// A member of the real two-parameter family generalizing
/// [`cabello_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateConstruction {
    pub scenario: PrePostScenario,
    /// Overlap ⟨a|A⟩ of the first particle's post and pre states.
    pub c: f64,
    /// Mixing coefficient of the β± states.
    pub p: f64,
    /// |⟨δ+|δ−⟩|; zero exactly when the δ pair is exclusive.
    pub delta_overlap: f64,
}

struct FamilyStates {
    post: StateVector,
    beta: [StateVector; 2],
    gamma: [StateVector; 2],
    delta: [StateVector; 2],
}

fn family_states(c: f64, p: f64) -> Result<FamilyStates> {
    open_interval("c", c, 0.0, 1.0)?;
    open_interval("p", p, 0.0, 1.0)?;
    let s = (1.0 - c * c).sqrt();
    let q = (1.0 - p * p).sqrt();
    let alpha = StateVector::basis(4, 3);
    let post = real(&[c, 0.0, -s, 0.0]);
    let beta = [real(&[0.0, p, q, 0.0]), real(&[0.0, p, -q, 0.0])];
    let gamma = [1.0, -1.0].map(|sign| {
        let raw = [s, -sign * c * q / p, c, 0.0].map(|x| Amplitude::new(x, 0.0));
        StateVector::normalized(raw.to_vec()).expect("gamma has a nonzero first coordinate")
    });
    let delta = [
        hilbert::orthocomplement_state(&[alpha.clone(), beta[0].clone(), gamma[0].clone()])?,
        hilbert::orthocomplement_state(&[alpha, beta[1].clone(), gamma[1].clone()])?,
    ];
    Ok(FamilyStates {
        post,
        beta,
        gamma,
        delta,
    })
}

/// Signed overlap ⟨δ+|δ−⟩ of the family member at `(c, p)`. Both δ states are
/// phase-canonical with a positive first coordinate, so the overlap is real
/// and changes sign where the pair becomes exclusive.
pub fn family_delta_signed_overlap(c: f64, p: f64) -> Result<f64> {
    let st = family_states(c, p)?;
    Ok(hilbert::vdot(st.delta[0].amps(), st.delta[1].amps()).re)
}

/// Builds the family member at `(c, p)` with pre `A⊗B` and post `a⊗B`,
/// `⟨a|A⟩ = c`. Every orthogonality relation except exclusivity of the δ pair
/// holds by construction; the δ overlap is recorded instead.
pub fn cabello_family(c: f64, p: f64) -> Result<CandidateConstruction> {
    let st = family_states(c, p)?;
    let delta_overlap = hilbert::vdot(st.delta[0].amps(), st.delta[1].amps()).norm();
    let [bp, bm] = st.beta;
    let [gp, gm] = st.gamma;
    let [dp, dm] = st.delta;
    let states = [
        (ALPHA, StateVector::basis(4, 3)),
        (BETA_PLUS, bp),
        (BETA_MINUS, bm),
        (GAMMA_PLUS, gp),
        (GAMMA_MINUS, gm),
        (DELTA_PLUS, dp),
        (DELTA_MINUS, dm),
    ];
    let scenario = two_context_scenario(
        StateVector::basis(4, 0),
        st.post,
        states,
        metadata("cabello-family", &format!("real family member c={c}, p={p}")),
    );
    Ok(CandidateConstruction {
        scenario,
        c,
        p,
        delta_overlap,
    })
}

fn hardy_states(theta_a: f64, theta_b: f64) -> Result<(StateVector, StateVector)> {
    open_interval("theta_a", theta_a, 0.0, FRAC_PI_2)?;
    open_interval("theta_b", theta_b, 0.0, FRAC_PI_2)?;
    let (big_a, big_a_perp) = (StateVector::basis(2, 0), StateVector::basis(2, 1));
    let (big_b, big_b_perp) = (big_a.clone(), big_a_perp.clone());
    let a = qubit(theta_a);
    let b = qubit(theta_b);
    let constraints = [
        hilbert::tensor(&big_a, &big_b),
        hilbert::tensor(&a, &big_b_perp),
        hilbert::tensor(&big_a_perp, &b),
    ];
    let pre = hilbert::orthocomplement_state(&constraints).map_err(|e| match e {
        HilbertError::Degenerate { .. } => ConstructionError::Degenerate(format!("preselection constraints: {e}")),
        other => other.into(),
    })?;
    let post = hilbert::tensor(&a, &b);
    let overlap = hilbert::vdot(post.amps(), pre.amps()).norm();
    if overlap < TOL_CHECK {
        return Err(ConstructionError::Degenerate(format!(
            "|<eta2|eta1>| = {overlap:e} makes postselection impossible"
        )));
    }
    Ok((pre, post))
}

/// |⟨η₂|η₁⟩|² for Hardy's construction at the given angles.
pub fn hardy_selection_probability(theta_a: f64, theta_b: f64) -> Result<f64> {
    let (pre, post) = hardy_states(theta_a, theta_b)?;
    Ok(hilbert::vdot(post.amps(), pre.amps()).norm_sqr())
}

/// Hardy's construction: preselect the entangled state orthogonal to
/// `A⊗B`, `a⊗B⊥` and `A⊥⊗b`, postselect `a⊗b`, with
/// `a = cos θa A + sin θa A⊥` and `b = cos θb B + sin θb B⊥`.
pub fn hardy_scenario(theta_a: f64, theta_b: f64) -> Result<PrePostScenario> {
    let (pre, post) = hardy_states(theta_a, theta_b)?;
    let (big_a, big_a_perp) = (StateVector::basis(2, 0), StateVector::basis(2, 1));
    let (big_b, big_b_perp) = (big_a.clone(), big_a_perp.clone());
    let (a, a_perp) = (qubit(theta_a), qubit_perp(theta_a));
    let (b, b_perp) = (qubit(theta_b), qubit_perp(theta_b));
    let t = hilbert::tensor;
    let states = [
        (HAT_ALPHA, t(&big_a, &big_b)),
        (HAT_BETA_PLUS, t(&a, &big_b_perp)),
        (HAT_BETA_MINUS, t(&big_a_perp, &b)),
        (HAT_GAMMA_PLUS, t(&a_perp, &big_b_perp)),
        (HAT_GAMMA_MINUS, t(&big_a_perp, &b_perp)),
        (HAT_DELTA_PLUS, t(&big_a_perp, &big_b)),
        (HAT_DELTA_MINUS, t(&big_a, &big_b_perp)),
    ];
    Ok(two_context_scenario(
        pre,
        post,
        states,
        metadata(
            "hardy",
            &format!("entangled preselection, theta_a={theta_a}, theta_b={theta_b}"),
        ),
    ))
}

fn random_qubit(rng: &mut ChaCha8Rng) -> StateVector {
    loop {
        let raw: Vec<Amplitude> = (0..2)
            .map(|_| Amplitude::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        if hilbert::norm(&raw) > 1e-6 {
            return StateVector::normalized(raw).expect("nonzero");
        }
    }
}

/// A seeded random single-qubit scenario with `n_contexts` two-outcome
/// contexts `{u_k, u_k⊥}`.
pub fn single_qubit_scenario(n_contexts: usize, seed: u64) -> Result<PrePostScenario> {
    if n_contexts == 0 {
        return Err(ConstructionError::NoContexts);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pre = random_qubit(&mut rng);
    let post = loop {
        let candidate = random_qubit(&mut rng);
        if hilbert::vdot(candidate.amps(), pre.amps()).norm() > 1e-3 {
            break candidate;
        }
    };
    let mut projectors = Vec::with_capacity(2 * n_contexts);
    let mut contexts = Vec::with_capacity(n_contexts);
    for k in 0..n_contexts {
        let u = random_qubit(&mut rng);
        let [x, y] = [u.amps()[0], u.amps()[1]];
        let u_perp = StateVector::new(vec![-y.conj(), x.conj()])?;
        let (lu, lp) = (format!("u{k}"), format!("u{k}_perp"));
        contexts.push(Context::new([lu.clone(), lp.clone()]));
        projectors.push(LabeledProjector::new(lu, u));
        projectors.push(LabeledProjector::new(lp, u_perp));
    }
    let meta = metadata(
        "single-qubit",
        &format!("random qubit scenario, {n_contexts} contexts, seed {seed}"),
    );
    Ok(PrePostScenario::new(pre, post, projectors, contexts, Vec::new(), meta).expect("generated labels are unique"))
}
