//! Selection probabilities, values forced by the boundary states, and the
//! two-outcome ABL probability used to cross-check them.

use thiserror::Error;

use crate::hilbert::{self, Bit, HilbertError};
use crate::scenario::{ForcedValue, Justification, PrePostScenario};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrePostError {
    #[error("selection inconsistency for `{label}`: prediction {predicted}, retrodiction {retrodicted}")]
    SelectionInconsistency {
        label: String,
        predicted: Bit,
        retrodicted: Bit,
    },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("postselection impossible: |<post|pre>| = {0:e}")]
    PostselectionImpossible(f64),
    #[error(
        "ABL probability undefined for `{label}`: measuring it makes postselection impossible (N1 + N0 = {total:e})"
    )]
    AblUndefined { label: String, total: f64 },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, PrePostError>;

/// |⟨post|pre⟩|².
pub fn selection_probability(s: &PrePostScenario) -> f64 {
    hilbert::vdot(s.post().amps(), s.pre().amps()).norm_sqr()
}

/// Values fixed with certainty by the pre state (prediction) or, failing
/// that, by the post state (retrodiction), ordered by label.
pub fn forced_values(s: &PrePostScenario, tol: f64) -> Result<Vec<ForcedValue>> {
    let mut out = Vec::new();
    for p in s.projectors() {
        let predicted = hilbert::certain_value(p.operator(), s.pre(), tol)?;
        let retrodicted = hilbert::certain_value(p.operator(), s.post(), tol)?;
        let forced = match (predicted, retrodicted) {
            (Some(a), Some(b)) if a != b => {
                return Err(PrePostError::SelectionInconsistency {
                    label: p.label().to_string(),
                    predicted: a,
                    retrodicted: b,
                })
            }
            (Some(bit), _) => Some((bit, Justification::Prediction)),
            (None, Some(bit)) => Some((bit, Justification::Retrodiction)),
            (None, None) => None,
        };
        if let Some((bit, justification)) = forced {
            out.push(ForcedValue {
                label: p.label().to_string(),
                bit,
                justification,
            });
        }
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

/// ABL probability that the projector `label` reads 1, against the
/// two-outcome measurement `{P, I − P}`:
/// `N₁ / (N₁ + N₀)` with `N₁ = |⟨post|P|pre⟩|²`, `N₀ = |⟨post|(I−P)|pre⟩|²`.
pub fn abl_probability(s: &PrePostScenario, label: &str, tol: f64) -> Result<f64> {
    let p = s
        .projector(label)
        .ok_or_else(|| PrePostError::UnknownLabel(label.to_string()))?;
    let overlap = hilbert::vdot(s.post().amps(), s.pre().amps());
    if overlap.norm() <= tol {
        return Err(PrePostError::PostselectionImpossible(overlap.norm()));
    }
    let image = hilbert::apply(p.operator(), s.pre())?;
    let on = hilbert::vdot(s.post().amps(), &image);
    let off = overlap - on;
    let (n1, n0) = (on.norm_sqr(), off.norm_sqr());
    if n1 + n0 < tol {
        return Err(PrePostError::AblUndefined {
            label: label.to_string(),
            total: n1 + n0,
        });
    }
    Ok(n1 / (n1 + n0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::*;
    use crate::hilbert::{StateVector, TOL_CHECK};
    use crate::scenario::{Context, LabeledProjector};
    use std::collections::BTreeMap;

    fn summary(fv: &[ForcedValue]) -> Vec<(&str, u8, Justification)> {
        fv.iter()
            .map(|f| (f.label.as_str(), f.bit.as_u8(), f.justification))
            .collect()
    }

    #[test]
    fn cabello_probability() {
        assert!((selection_probability(&cabello_scenario()) - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn pre_equals_post_gives_one() {
        let s = cabello_scenario();
        let same = s.with_states(s.pre().clone(), s.pre().clone());
        assert!((selection_probability(&same) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cabello_forced_values() {
        use Justification::*;
        let fv = forced_values(&cabello_scenario(), TOL_CHECK).unwrap();
        assert_eq!(
            summary(&fv),
            vec![
                ("alpha", 0, Prediction),
                ("beta+", 0, Prediction),
                ("beta-", 0, Prediction),
                ("gamma+", 0, Retrodiction),
                ("gamma-", 0, Retrodiction),
            ]
        );
    }

    #[test]
    fn hardy_forced_values() {
        use Justification::*;
        let fv = forced_values(&hardy_scenario(0.5, 1.0).unwrap(), TOL_CHECK).unwrap();
        assert_eq!(
            summary(&fv),
            vec![
                (HAT_ALPHA, 0, Prediction),
                (HAT_BETA_PLUS, 0, Prediction),
                (HAT_BETA_MINUS, 0, Prediction),
                (HAT_GAMMA_PLUS, 0, Retrodiction),
                (HAT_GAMMA_MINUS, 0, Retrodiction),
            ]
        );
    }

    #[test]
    fn eigenstate_preselection_forces_one_and_zero() {
        use Justification::*;
        let s = single_qubit_scenario(3, 7).unwrap();
        let u = s.projector("u1").unwrap().state().clone();
        let s = s.with_states(u, s.post().clone());
        let fv = forced_values(&s, TOL_CHECK).unwrap();
        assert_eq!(summary(&fv), vec![("u1", 1, Prediction), ("u1_perp", 0, Prediction)]);
    }

    #[test]
    fn inconsistent_selection_is_reported() {
        // pre ⊥ u but post = u: prediction 0, retrodiction 1. Only possible
        // when pre and post are orthogonal.
        let e0 = StateVector::basis(2, 0);
        let e1 = StateVector::basis(2, 1);
        let s = PrePostScenario::new(
            e1.clone(),
            e0.clone(),
            vec![LabeledProjector::new("u", e0), LabeledProjector::new("v", e1)],
            vec![Context::new(["u", "v"])],
            vec![],
            BTreeMap::new(),
        )
        .unwrap();
        assert!(matches!(
            forced_values(&s, TOL_CHECK),
            Err(PrePostError::SelectionInconsistency { .. })
        ));
        assert!(matches!(
            abl_probability(&s, "u", TOL_CHECK),
            Err(PrePostError::PostselectionImpossible(_))
        ));
    }

    #[test]
    fn cabello_abl_values() {
        let s = cabello_scenario();
        // Direct evaluation: ⟨ψ₂|δ±⟩⟨δ±|ψ₁⟩ = 1/3 = ⟨ψ₂|ψ₁⟩, so N₀ = 0.
        for l in [DELTA_PLUS, DELTA_MINUS] {
            let st = s.projector(l).unwrap().state();
            let on = hilbert::vdot(s.post().amps(), st.amps()) * hilbert::vdot(st.amps(), s.pre().amps());
            assert!((on.re - 1.0 / 3.0).abs() < 1e-15 && on.im.abs() < 1e-15);
            assert!((abl_probability(&s, l, TOL_CHECK).unwrap() - 1.0).abs() < 1e-12);
        }
        for l in [ALPHA, BETA_PLUS, BETA_MINUS, GAMMA_PLUS, GAMMA_MINUS] {
            assert!(abl_probability(&s, l, TOL_CHECK).unwrap().abs() < 1e-12, "{l}");
        }
        assert_eq!(
            abl_probability(&s, "epsilon", TOL_CHECK),
            Err(PrePostError::UnknownLabel("epsilon".into()))
        );
    }

    #[test]
    fn probability_symmetric_under_swap() {
        for s in [
            cabello_scenario(),
            hardy_scenario(0.2, 1.4).unwrap(),
            single_qubit_scenario(2, 9).unwrap(),
        ] {
            assert!((selection_probability(&s) - selection_probability(&s.swapped())).abs() < 1e-15);
        }
    }

    #[test]
    fn forced_bits_agree_with_abl() {
        let mut corpus = vec![cabello_scenario()];
        corpus.extend((1..8).map(|i| hardy_scenario(0.19 * i as f64, 1.5 - 0.17 * i as f64).unwrap()));
        corpus.extend((1..6).map(|n| single_qubit_scenario(n, n as u64).unwrap()));
        for s in &corpus {
            for f in forced_values(s, TOL_CHECK).unwrap() {
                let abl = abl_probability(s, &f.label, TOL_CHECK).unwrap();
                assert!((abl - f.bit.as_u8() as f64).abs() < 1e-9, "{}", f.label);
            }
        }
    }

    #[test]
    fn contexts_reproduce_overlap() {
        for s in [cabello_scenario(), hardy_scenario(0.8, 0.6).unwrap()] {
            let overlap = hilbert::vdot(s.post().amps(), s.pre().amps());
            for ctx in s.contexts() {
                let total: hilbert::Amplitude = ctx
                    .members
                    .iter()
                    .map(|m| {
                        let img = hilbert::apply(s.projector(m).unwrap().operator(), s.pre()).unwrap();
                        hilbert::vdot(s.post().amps(), &img)
                    })
                    .sum();
                assert!((total - overlap).norm() < 1e-12);
            }
        }
    }
}
