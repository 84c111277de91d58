//! Discrete Bayes' rule over named hypotheses, and the posterior over
//! enumerated programs given an observed output prefix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::enumeration::ProgramTable;

pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("{field}: {message}")]
    Config { field: String, message: String },
    #[error("hypothesis space document, line {line} column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("impossible evidence {evidence:?}{}: marginal probability is 0", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    ImpossibleEvidence {
        evidence: String,
        step: Option<usize>,
    },
    #[error("unknown evidence label {0:?}")]
    UnknownEvidence(String),
    #[error("no support: no halting program's output extends {0:?}")]
    NoSupport(BitString),
}

fn config(field: impl Into<String>, message: impl Into<String>) -> BayesError {
    BayesError::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// On-disk form of a [`HypothesisSpace`].
///
/// ```json
/// {
///   "hypotheses": ["fair", "biased"],
///   "prior": [0.5, 0.5],
///   "likelihood": { "heads": [0.5, 0.8], "tails": [0.5, 0.2] }
/// }
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSpaceDoc {
    pub hypotheses: Vec<String>,
    pub prior: Vec<f64>,
    /// Evidence label → per-hypothesis likelihood, in hypothesis order.
    pub likelihood: BTreeMap<String, Vec<f64>>,
}

/// Finite set of hypotheses with a prior and a likelihood table.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSpace {
    hypotheses: Vec<String>,
    prior: Vec<f64>,
    likelihood: BTreeMap<String, Vec<f64>>,
}

impl HypothesisSpace {
    pub fn new(
        hypotheses: Vec<String>,
        prior: Vec<f64>,
        likelihood: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self, BayesError> {
        if hypotheses.is_empty() {
            return Err(config("hypotheses", "at least one hypothesis is required"));
        }
        for (i, h) in hypotheses.iter().enumerate() {
            if hypotheses[..i].contains(h) {
                return Err(config(
                    format!("hypotheses[{i}]"),
                    format!("duplicate name {h:?}"),
                ));
            }
        }
        if prior.len() != hypotheses.len() {
            return Err(config(
                "prior",
                format!(
                    "{} entries for {} hypotheses",
                    prior.len(),
                    hypotheses.len()
                ),
            ));
        }
        for (i, &p) in prior.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(config(
                    format!("prior[{i}]"),
                    format!("{p} is not in [0, 1]"),
                ));
            }
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(config("prior", format!("sums to {total}, not 1")));
        }
        for (label, row) in &likelihood {
            if row.len() != hypotheses.len() {
                return Err(config(
                    format!("likelihood.{label}"),
                    format!("{} entries for {} hypotheses", row.len(), hypotheses.len()),
                ));
            }
            for (i, &l) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&l) {
                    return Err(config(
                        format!("likelihood.{label}[{i}]"),
                        format!("{l} is not in [0, 1]"),
                    ));
                }
            }
        }
        Ok(HypothesisSpace {
            hypotheses,
            prior,
            likelihood,
        })
    }

    pub fn from_doc(doc: HypothesisSpaceDoc) -> Result<Self, BayesError> {
        Self::new(doc.hypotheses, doc.prior, doc.likelihood)
    }

    pub fn from_json(text: &str) -> Result<Self, BayesError> {
        let doc: HypothesisSpaceDoc =
            serde_json::from_str(text).map_err(|e| BayesError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        Self::from_doc(doc)
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn likelihood(&self, evidence: &str) -> Result<&[f64], BayesError> {
        self.likelihood
            .get(evidence)
            .map(Vec::as_slice)
            .ok_or_else(|| BayesError::UnknownEvidence(evidence.to_owned()))
    }

    /// The same space with a different prior.
    fn with_prior(&self, prior: Vec<f64>) -> Self {
        HypothesisSpace {
            prior,
            ..self.clone()
        }
    }

    /// `P(T|E) = P(T) · P(E|T) / P(E)` for every hypothesis `T`.
    pub fn posterior(&self, evidence: &str) -> Result<PosteriorResult, BayesError> {
        let likelihood = self.likelihood(evidence)?;
        let joint: Vec<f64> = self
            .prior
            .iter()
            .zip(likelihood)
            .map(|(p, l)| p * l)
            .collect();
        let marginal: f64 = joint.iter().sum();
        if marginal <= 0.0 {
            return Err(BayesError::ImpossibleEvidence {
                evidence: evidence.to_owned(),
                step: None,
            });
        }
        let posterior: Vec<f64> = joint.iter().map(|j| j / marginal).collect();
        let manifestation = self
            .prior
            .iter()
            .zip(&posterior)
            .map(|(p, q)| p - q)
            .collect();
        Ok(PosteriorResult {
            evidence: evidence.to_owned(),
            marginal,
            posterior,
            manifestation,
        })
    }

    /// Applies each piece of evidence in turn, each posterior becoming the
    /// next prior. Evidence is assumed conditionally independent given the
    /// hypothesis.
    pub fn sequential_update<S: AsRef<str>>(
        &self,
        evidence: &[S],
    ) -> Result<Vec<PosteriorResult>, BayesError> {
        let mut space = self.clone();
        let mut out = Vec::with_capacity(evidence.len());
        for (step, e) in evidence.iter().enumerate() {
            let result = space.posterior(e.as_ref()).map_err(|err| match err {
                BayesError::ImpossibleEvidence { evidence, .. } => BayesError::ImpossibleEvidence {
                    evidence,
                    step: Some(step),
                },
                other => other,
            })?;
            space = space.with_prior(result.posterior.clone());
            out.push(result);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorResult {
    pub evidence: String,
    /// `P(E) = Σ_T P(T) · P(E|T)`.
    pub marginal: f64,
    pub posterior: Vec<f64>,
    /// `P(T) − P(T|E)`, signed.
    pub manifestation: Vec<f64>,
}

/// One program's share of the posterior given an output prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramWeight {
    pub program: BitString,
    pub output: BitString,
    /// `2^(L − |p|)`; the posterior is `numerator / denominator`.
    pub numerator: u64,
}

/// Posterior over halting programs given that the output starts with `z`,
/// with prior `2^−|p|`. Normalization is exact: every weight shares the
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramPosterior {
    pub context: BitString,
    pub programs: Vec<ProgramWeight>,
    pub denominator: u64,
}

impl ProgramPosterior {
    pub fn probability(&self, i: usize) -> f64 {
        self.programs[i].numerator as f64 / self.denominator as f64
    }

    /// Posterior mass of programs whose output continues with `bit`, as a
    /// numerator over [`ProgramPosterior::denominator`].
    pub fn next_bit_numerator(&self, bit: bool) -> u64 {
        let n = self.context.len();
        self.programs
            .iter()
            .filter(|w| w.output.get(n) == Some(bit))
            .map(|w| w.numerator)
            .sum()
    }
}

/// Bayes' rule over the programs of `table`, conditioned on the output
/// having prefix `z`.
pub fn program_posterior(
    table: &ProgramTable,
    z: &BitString,
) -> Result<ProgramPosterior, BayesError> {
    let scale = table.scale();
    let programs: Vec<ProgramWeight> = table
        .halting_programs()
        .into_iter()
        .filter(|h| h.output.starts_with(z))
        .map(|h| ProgramWeight {
            numerator: 1u64 << (scale - h.program.len() as u32),
            program: h.program,
            output: h.output,
        })
        .collect();
    let denominator: u64 = programs.iter().map(|w| w.numerator).sum();
    if denominator == 0 {
        return Err(BayesError::NoSupport(z.clone()));
    }
    Ok(ProgramPosterior {
        context: z.clone(),
        programs,
        denominator,
    })
}
