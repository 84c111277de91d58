//! Next-bit prediction with the enumerated halting masses as prior.
//!
//! `M̂(z)` is the total mass of outputs that start with `z`. Because outputs
//! are finite, `M̂(z0) + M̂(z1)` falls short of `M̂(z)` by exactly the mass of
//! the output `z` itself; that shortfall is reported as the defect.

use std::collections::HashMap;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::enumeration::{DyadicMass, ProgramTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("no support: no output of the table extends {0:?}")]
    NoSupport(BitString),
}

#[derive(Debug, Clone)]
pub struct PredictiveModel {
    table: ProgramTable,
    prefix_mass: HashMap<BitString, u64>,
}

impl PredictiveModel {
    pub fn new(table: ProgramTable) -> Self {
        let mut prefix_mass: HashMap<BitString, u64> = HashMap::new();
        for r in table.records() {
            let mut z = BitString::with_capacity(r.output.len());
            *prefix_mass.entry(z.clone()).or_default() += r.mass.numerator;
            for b in r.output.iter() {
                z.push(b);
                *prefix_mass.entry(z.clone()).or_default() += r.mass.numerator;
            }
        }
        PredictiveModel { table, prefix_mass }
    }

    pub fn table(&self) -> &ProgramTable {
        &self.table
    }

    /// Every string that is a prefix of some output, with its `M̂`.
    pub fn supported_prefixes(&self) -> impl Iterator<Item = (&BitString, DyadicMass)> {
        let scale = self.table.scale();
        self.prefix_mass
            .iter()
            .map(move |(z, &n)| (z, DyadicMass::new(n, scale)))
    }

    /// `M̂(z)`: mass of outputs having `z` as a prefix, `z` included.
    pub fn extension_mass(&self, z: &BitString) -> DyadicMass {
        DyadicMass::new(
            self.prefix_mass.get(z).copied().unwrap_or(0),
            self.table.scale(),
        )
    }

    pub fn predict(&self, z: &BitString) -> Result<Prediction, PredictError> {
        let support = self.extension_mass(z).numerator;
        if support == 0 {
            return Err(PredictError::NoSupport(z.clone()));
        }
        let zero = self.extension_mass(&z.with(false)).numerator;
        let one = self.extension_mass(&z.with(true)).numerator;
        Ok(Prediction { support, zero, one })
    }

    /// Scores `stream` bit by bit. Scoring stops at the first position whose
    /// observed bit has zero predicted probability (or whose context has no
    /// support); that position is reported unscored and is the last record.
    pub fn sequential_report(&self, stream: &BitString) -> Vec<StepRecord> {
        let mut out = Vec::with_capacity(stream.len());
        let mut context = BitString::with_capacity(stream.len());
        let mut cumulative = 0.0;
        for (pos, observed) in stream.iter().enumerate() {
            let prediction = self.predict(&context).ok();
            let p_observed = prediction.map(|p| p.probability(observed));
            let scored = p_observed.is_some_and(|p| p > 0.0);
            if scored {
                cumulative -= p_observed.unwrap_or(0.0).log2();
            }
            out.push(StepRecord {
                pos,
                observed,
                prediction,
                p_observed,
                logloss_cum: cumulative,
                scored,
            });
            if !scored {
                break;
            }
            context.push(observed);
        }
        out
    }
}

/// Next-bit probabilities after a context `z`, held as exact numerators over
/// the common scale of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Prediction {
    /// `M̂(z)`.
    pub support: u64,
    /// `M̂(z0)`.
    pub zero: u64,
    /// `M̂(z1)`.
    pub one: u64,
}

impl Prediction {
    pub fn p0(&self) -> f64 {
        self.zero as f64 / self.support as f64
    }

    pub fn p1(&self) -> f64 {
        self.one as f64 / self.support as f64
    }

    /// Probability that the sequence stops at `z`.
    pub fn defect(&self) -> f64 {
        (self.support - self.zero - self.one) as f64 / self.support as f64
    }

    pub fn defect_numerator(&self) -> u64 {
        self.support - self.zero - self.one
    }

    pub fn probability(&self, bit: bool) -> f64 {
        if bit {
            self.p1()
        } else {
            self.p0()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub pos: usize,
    pub observed: bool,
    /// `None` when the context itself has no support.
    pub prediction: Option<Prediction>,
    pub p_observed: Option<f64>,
    /// `Σ −log2 p(observed)` over scored positions so far.
    pub logloss_cum: f64,
    pub scored: bool,
}

pub const REPORT_CSV_HEADER: &str = "pos,observed,p0,p1,defect,logloss_cum,scored";

/// Writes a sequential report as CSV. Probabilities of unsupported contexts
/// are left empty.
pub fn write_report_csv<W: Write>(records: &[StepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in records {
        let (p0, p1, defect) = match r.prediction {
            Some(p) => (
                p.p0().to_string(),
                p.p1().to_string(),
                p.defect().to_string(),
            ),
            None => Default::default(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.pos, r.observed as u8, p0, p1, defect, r.logloss_cum, r.scored
        )?;
    }
    w.flush()
}
