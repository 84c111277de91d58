//! Conditional, joint and mutual information estimates, and the gaps by
//! which finite-resource estimates miss the exact identities of algorithmic
//! information theory.
//!
//! Every quantity is read off [`ProgramTable`]s that share one `(L, T)`; the
//! conditional complexity `K̂(x|y)` is the shortest program for `x` when `y`
//! is preloaded on the tape, and `m̂(x|y)` is the halting mass of `x` on that
//! same machine. Gaps are reported as-is, including negative mutual
//! information.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::enumeration::{
    enumerate, enumerate_with_workers, log2_u64, ConfigError, DyadicMass, EnumParams, ProgramTable,
};
use crate::machine::pair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InfoError {
    #[error("insufficient resources: {term} is absent at L={max_len}, T={step_budget}")]
    InsufficientResources {
        term: String,
        max_len: u32,
        step_budget: u64,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(
        "table resources L={found_len}, T={found_budget} do not match L={max_len}, T={step_budget}"
    )]
    ResourceMismatch {
        found_len: u32,
        found_budget: u64,
        max_len: u32,
        step_budget: u64,
    },
}

/// Tables for every condition needed so far, all at the same `(L, T)`.
///
/// Missing conditional tables are enumerated on first use and kept.
#[derive(Debug)]
pub struct InfoLab {
    base: EnumParams,
    workers: Option<usize>,
    tables: Mutex<HashMap<BitString, Arc<ProgramTable>>>,
}

impl InfoLab {
    pub fn new(max_len: u32, step_budget: u64) -> Result<Self, ConfigError> {
        Ok(Self::from_params(&EnumParams::unconditional(
            max_len,
            step_budget,
        )?))
    }

    /// Uses the resources of `params`; its condition is ignored.
    pub fn from_params(params: &EnumParams) -> Self {
        InfoLab {
            base: params.with_condition(BitString::new()),
            workers: None,
            tables: Mutex::new(HashMap::new()),
        }
    }

    /// Enumerate on a dedicated pool of this many threads.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn params(&self) -> &EnumParams {
        &self.base
    }

    /// Adds a prebuilt table, e.g. one read from a cache file.
    pub fn insert(&self, table: ProgramTable) -> Result<(), InfoError> {
        let p = table.params();
        if p.max_len != self.base.max_len || p.step_budget != self.base.step_budget {
            return Err(InfoError::ResourceMismatch {
                found_len: p.max_len,
                found_budget: p.step_budget,
                max_len: self.base.max_len,
                step_budget: self.base.step_budget,
            });
        }
        let cond = p.condition.clone();
        self.tables
            .lock()
            .expect("table cache poisoned")
            .insert(cond, Arc::new(table));
        Ok(())
    }

    pub fn has_table(&self, condition: &BitString) -> bool {
        self.tables
            .lock()
            .expect("table cache poisoned")
            .contains_key(condition)
    }

    /// The table for `condition`, enumerating it if needed.
    pub fn table(&self, condition: &BitString) -> Result<Arc<ProgramTable>, InfoError> {
        if let Some(t) = self
            .tables
            .lock()
            .expect("table cache poisoned")
            .get(condition)
        {
            return Ok(Arc::clone(t));
        }
        // Enumerate outside the lock; a racing duplicate is identical.
        let params = self.base.with_condition(condition.clone());
        let table = match self.workers {
            Some(w) => enumerate_with_workers(&params, w)?,
            None => enumerate(&params)?,
        };
        let table = Arc::new(table);
        self.tables
            .lock()
            .expect("table cache poisoned")
            .entry(condition.clone())
            .or_insert_with(|| Arc::clone(&table));
        Ok(table)
    }

    fn missing(&self, term: String) -> InfoError {
        InfoError::InsufficientResources {
            term,
            max_len: self.base.max_len,
            step_budget: self.base.step_budget,
        }
    }

    pub fn khat(&self, x: &BitString) -> Result<Option<u32>, InfoError> {
        Ok(self.table(&BitString::new())?.khat(x))
    }

    pub fn conditional_khat(&self, x: &BitString, y: &BitString) -> Result<Option<u32>, InfoError> {
        Ok(self.table(y)?.khat(x))
    }

    pub fn joint_khat(&self, x: &BitString, y: &BitString) -> Result<Option<u32>, InfoError> {
        self.khat(&pair(x, y))
    }

    pub fn mass(&self, x: &BitString) -> Result<DyadicMass, InfoError> {
        Ok(self.table(&BitString::new())?.mass(x))
    }

    pub fn conditional_mass(&self, x: &BitString, y: &BitString) -> Result<DyadicMass, InfoError> {
        Ok(self.table(y)?.mass(x))
    }

    fn require_khat(&self, x: &BitString) -> Result<u32, InfoError> {
        self.khat(x)?
            .ok_or_else(|| self.missing(format!("khat({})", x.to_dash_string())))
    }

    fn require_conditional(&self, x: &BitString, y: &BitString) -> Result<u32, InfoError> {
        self.conditional_khat(x, y)?.ok_or_else(|| {
            self.missing(format!(
                "khat({}|{})",
                x.to_dash_string(),
                y.to_dash_string()
            ))
        })
    }

    fn require_joint(&self, x: &BitString, y: &BitString) -> Result<u32, InfoError> {
        self.joint_khat(x, y)?.ok_or_else(|| {
            self.missing(format!(
                "khat({},{})",
                x.to_dash_string(),
                y.to_dash_string()
            ))
        })
    }

    fn require_mass(&self, x: &BitString, y: Option<&BitString>) -> Result<u64, InfoError> {
        let m = match y {
            Some(y) => self.conditional_mass(x, y)?,
            None => self.mass(x)?,
        };
        if m.is_zero() {
            let term = match y {
                Some(y) => format!("m({}|{})", x.to_dash_string(), y.to_dash_string()),
                None => format!("m({})", x.to_dash_string()),
            };
            return Err(self.missing(term));
        }
        Ok(m.numerator)
    }

    /// Information in `y` about `x`: `K̂(x) − K̂(x|y)`. May be negative.
    pub fn mutual_info(&self, x: &BitString, y: &BitString) -> Result<i64, InfoError> {
        let kx = self.require_khat(x)?;
        let kxy = self.require_conditional(x, y)?;
        Ok(i64::from(kx) - i64::from(kxy))
    }

    /// `I(y:x) − I(x:y)`, in the argument order of [`InfoLab::mutual_info`].
    pub fn symmetry_gap(&self, x: &BitString, y: &BitString) -> Result<i64, InfoError> {
        Ok(self.mutual_info(x, y)? - self.mutual_info(y, x)?)
    }

    /// `K̂(x,y) − (K̂(x) + K̂(y|x))`.
    pub fn chain_gap(&self, x: &BitString, y: &BitString) -> Result<i64, InfoError> {
        let joint = self.require_joint(x, y)?;
        let kx = self.require_khat(x)?;
        let ky_x = self.require_conditional(y, x)?;
        Ok(i64::from(joint) - i64::from(kx) - i64::from(ky_x))
    }

    /// `K̂(x) + log2 m̂(x)`; never negative since `m̂(x) ≥ 2^−K̂(x)`.
    pub fn coding_gap(&self, x: &BitString) -> Result<f64, InfoError> {
        let table = self.table(&BitString::new())?;
        let record = table
            .get(x)
            .ok_or_else(|| self.missing(format!("khat({})", x.to_dash_string())))?;
        Ok(coding_gap_of(record.min_len, record.mass))
    }

    /// `log2 m̂(x|y) − [log2 m̂(x) − log2 m̂(y) + log2 m̂(y|x)]`.
    pub fn bayes_m_gap(&self, x: &BitString, y: &BitString) -> Result<f64, InfoError> {
        // All four masses share the scale 2^L, which cancels.
        let x_given_y = self.require_mass(x, Some(y))?;
        let mx = self.require_mass(x, None)?;
        let my = self.require_mass(y, None)?;
        let y_given_x = self.require_mass(y, Some(x))?;
        Ok(log2_u64(x_given_y) - ((log2_u64(mx) - log2_u64(my)) + log2_u64(y_given_x)))
    }

    /// Everything at once, for the pair `(x, y)`.
    pub fn report(&self, x: &BitString, y: &BitString) -> Result<InfoReport, InfoError> {
        let i_y_to_x = self.mutual_info(x, y)?;
        let i_x_to_y = self.mutual_info(y, x)?;
        let chain_gap_xy = self.chain_gap(x, y)?;
        let chain_gap_yx = self.chain_gap(y, x)?;
        let coding_gap_x = self.coding_gap(x)?;
        let bayes_log_gap = self.bayes_m_gap(x, y)?;
        let mass = |m: DyadicMass| MassEntry {
            fraction: m.to_string(),
            log2: m.log2(),
        };
        Ok(InfoReport {
            params: self.base.clone(),
            x: x.clone(),
            y: y.clone(),
            khat_x: self.khat(x)?,
            khat_y: self.khat(y)?,
            khat_x_given_y: self.conditional_khat(x, y)?,
            khat_y_given_x: self.conditional_khat(y, x)?,
            khat_joint: self.joint_khat(x, y)?,
            i_y_to_x,
            i_x_to_y,
            symmetry_gap: i_y_to_x - i_x_to_y,
            chain_gap_xy,
            chain_gap_yx,
            coding_gap_x,
            bayes_log_gap,
            mass_x: mass(self.mass(x)?),
            mass_y: mass(self.mass(y)?),
            mass_x_given_y: mass(self.conditional_mass(x, y)?),
            mass_y_given_x: mass(self.conditional_mass(y, x)?),
        })
    }
}

/// `K̂ + log2 m̂` for one record.
pub fn coding_gap_of(min_len: u32, mass: DyadicMass) -> f64 {
    (f64::from(min_len) - f64::from(mass.scale)) + log2_u64(mass.numerator)
}

/// The exact form of `coding_gap ≥ 0`: `numerator ≥ 2^(L − K̂)`.
pub fn coding_gap_nonnegative(min_len: u32, mass: DyadicMass) -> bool {
    min_len <= mass.scale && mass.numerator >= 1u64 << (mass.scale - min_len)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassEntry {
    /// `numerator/2^L`.
    pub fraction: String,
    pub log2: f64,
}

/// Every estimate and gap for one pair of strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoReport {
    pub params: EnumParams,
    pub x: BitString,
    pub y: BitString,
    pub khat_x: Option<u32>,
    pub khat_y: Option<u32>,
    pub khat_x_given_y: Option<u32>,
    pub khat_y_given_x: Option<u32>,
    pub khat_joint: Option<u32>,
    pub i_y_to_x: i64,
    pub i_x_to_y: i64,
    pub symmetry_gap: i64,
    pub chain_gap_xy: i64,
    pub chain_gap_yx: i64,
    pub coding_gap_x: f64,
    pub bayes_log_gap: f64,
    pub mass_x: MassEntry,
    pub mass_y: MassEntry,
    pub mass_x_given_y: MassEntry,
    pub mass_y_given_x: MassEntry,
}

/// Summary of `coding_gap` over every output of a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodingGapSummary {
    pub outputs: usize,
    /// Outputs failing the exact check `m̂ ≥ 2^−K̂`; always 0 for tables
    /// that passed verification.
    pub violations: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Histogram over `[k, k+1)` bit buckets, `buckets[k]` for `k` in order.
    pub buckets: Vec<usize>,
}

pub fn coding_gap_summary(table: &ProgramTable) -> CodingGapSummary {
    let gaps: Vec<f64> = table
        .records()
        .map(|r| coding_gap_of(r.min_len, r.mass))
        .collect();
    let violations = table
        .records()
        .filter(|r| !coding_gap_nonnegative(r.min_len, r.mass))
        .count();
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = if gaps.is_empty() {
        0.0
    } else {
        gaps.iter().sum::<f64>() / gaps.len() as f64
    };
    let mut buckets = Vec::new();
    for g in &gaps {
        let k = g.max(0.0).floor() as usize;
        if buckets.len() <= k {
            buckets.resize(k + 1, 0);
        }
        buckets[k] += 1;
    }
    CodingGapSummary {
        outputs: gaps.len(),
        violations,
        min,
        max,
        mean,
        buckets,
    }
}

/// All bit strings of length `0..=max_len`, shortest first.
pub fn strings_up_to(max_len: usize) -> Vec<BitString> {
    (0..=max_len)
        .flat_map(|n| (0..1u64 << n).map(move |v| BitString::from_uint(v, n)))
        .collect()
}

/// Symmetry gaps over all ordered pairs of a string set at one `(L, T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrySurvey {
    pub max_len: u32,
    pub step_budget: u64,
    /// Pairs with all four estimates present.
    pub evaluated: usize,
    /// Pairs skipped because some estimate was absent.
    pub skipped: usize,
    pub max_abs_gap: i64,
    /// A pair attaining `max_abs_gap`.
    pub worst_pair: Option<(BitString, BitString)>,
}

pub fn symmetry_survey(lab: &InfoLab, strings: &[BitString]) -> Result<SymmetrySurvey, InfoError> {
    let mut survey = SymmetrySurvey {
        max_len: lab.params().max_len,
        step_budget: lab.params().step_budget,
        evaluated: 0,
        skipped: 0,
        max_abs_gap: 0,
        worst_pair: None,
    };
    for x in strings {
        for y in strings {
            match lab.symmetry_gap(x, y) {
                Ok(gap) => {
                    survey.evaluated += 1;
                    if survey.worst_pair.is_none() || gap.abs() > survey.max_abs_gap {
                        survey.max_abs_gap = gap.abs();
                        survey.worst_pair = Some((x.clone(), y.clone()));
                    }
                }
                Err(InfoError::InsufficientResources { .. }) => survey.skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(survey)
}

/// One-shot forms of the lab queries, each building the tables it needs.
pub fn conditional_khat(
    x: &BitString,
    y: &BitString,
    params: &EnumParams,
) -> Result<Option<u32>, InfoError> {
    InfoLab::from_params(params).conditional_khat(x, y)
}

pub fn mutual_info(x: &BitString, y: &BitString, params: &EnumParams) -> Result<i64, InfoError> {
    InfoLab::from_params(params).mutual_info(x, y)
}

pub fn joint_khat(
    x: &BitString,
    y: &BitString,
    params: &EnumParams,
) -> Result<Option<u32>, InfoError> {
    InfoLab::from_params(params).joint_khat(x, y)
}

pub fn symmetry_gap(x: &BitString, y: &BitString, params: &EnumParams) -> Result<i64, InfoError> {
    InfoLab::from_params(params).symmetry_gap(x, y)
}

pub fn chain_gap(x: &BitString, y: &BitString, params: &EnumParams) -> Result<i64, InfoError> {
    InfoLab::from_params(params).chain_gap(x, y)
}

pub fn coding_gap(x: &BitString, params: &EnumParams) -> Result<f64, InfoError> {
    InfoLab::from_params(params).coding_gap(x)
}

pub fn bayes_m_gap(x: &BitString, y: &BitString, params: &EnumParams) -> Result<f64, InfoError> {
    InfoLab::from_params(params).bayes_m_gap(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    fn lab6() -> InfoLab {
        InfoLab::new(6, 100).unwrap()
    }

    #[test]
    fn conditional_khat_examples() {
        let lab = lab6();
        assert_eq!(lab.conditional_khat(&bits(""), &bits("")).unwrap(), Some(3));
        assert_eq!(
            lab.conditional_khat(&bits("0"), &bits("0")).unwrap(),
            Some(6)
        );
        for x in strings_up_to(3) {
            assert_eq!(
                lab.conditional_khat(&x, &bits("")).unwrap(),
                lab.khat(&x).unwrap()
            );
        }
    }

    #[test]
    fn mutual_info_examples() {
        let lab = lab6();
        assert_eq!(lab.mutual_info(&bits(""), &bits("1")).unwrap(), 0);
        assert_eq!(lab.mutual_info(&bits("0"), &bits("")).unwrap(), 0);
        let err = lab.mutual_info(&bits("1"), &bits("")).unwrap_err();
        assert!(err.to_string().contains("khat(1)"), "{err}");
        let err = lab.mutual_info(&bits("0"), &bits("1")).unwrap_err();
        assert!(err.to_string().contains("khat(0|1)"), "{err}");
    }

    #[test]
    fn joint_khat_uses_pair_encoding() {
        let lab = lab6();
        assert_eq!(lab.joint_khat(&bits(""), &bits("")).unwrap(), Some(3));
        assert_eq!(
            lab.joint_khat(&bits(""), &bits("0")).unwrap(),
            lab.khat(&bits("0")).unwrap()
        );
    }

    #[test]
    fn chain_gap_examples() {
        let lab = lab6();
        assert_eq!(lab.chain_gap(&bits(""), &bits("")).unwrap(), -3);
        assert_eq!(lab.chain_gap(&bits(""), &bits("0")).unwrap(), -3);
    }

    #[test]
    fn coding_gap_examples() {
        let lab = lab6();
        let g = lab.coding_gap(&bits("")).unwrap();
        assert!((g - (11f64.log2() - 3.0)).abs() < 1e-12);
        assert!((g - 0.459_431_618_637_297_3).abs() < 1e-12);
        assert_eq!(lab.coding_gap(&bits("0")).unwrap(), 1.0);
        assert!(lab.coding_gap(&bits("1")).is_err());

        // A single shortest program gives exactly zero.
        let t3 = InfoLab::new(3, 100).unwrap();
        assert_eq!(t3.coding_gap(&bits("")).unwrap(), 0.0);
    }

    #[test]
    fn identities_that_hold_exactly() {
        let lab = lab6();
        assert_eq!(lab.symmetry_gap(&bits("0"), &bits("0")).unwrap(), 0);
        assert_eq!(lab.symmetry_gap(&bits("0"), &bits("")).unwrap(), 0);
        assert_eq!(lab.bayes_m_gap(&bits("0"), &bits("0")).unwrap(), 0.0);
        assert_eq!(lab.bayes_m_gap(&bits(""), &bits("")).unwrap(), 0.0);
    }

    #[test]
    fn bayes_gap_with_empty_condition_is_the_empty_output_shift() {
        // m̂(x|ε) = m̂(x), leaving log m̂(ε) − log m̂(ε|x).
        let lab = InfoLab::new(12, 100).unwrap();
        let x = bits("0");
        let expect = lab.mass(&bits("")).unwrap().log2()
            - lab.conditional_mass(&bits(""), &x).unwrap().log2();
        let got = lab.bayes_m_gap(&x, &bits("")).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn bayes_gap_names_zero_mass() {
        let err = lab6().bayes_m_gap(&bits("1"), &bits("0")).unwrap_err();
        assert!(err.to_string().contains("m(1|0)"), "{err}");
    }

    #[test]
    fn inserted_tables_must_match_resources() {
        let lab = lab6();
        let other = enumerate(&EnumParams::unconditional(9, 100).unwrap()).unwrap();
        assert!(matches!(
            lab.insert(other),
            Err(InfoError::ResourceMismatch { .. })
        ));
        let same = enumerate(&EnumParams::new(6, 100, bits("1")).unwrap()).unwrap();
        lab.insert(same).unwrap();
        assert!(lab.has_table(&bits("1")));
    }

    #[test]
    fn strings_enumeration() {
        let s = strings_up_to(2);
        let s: Vec<String> = s.iter().map(|b| b.to_string()).collect();
        assert_eq!(s, ["", "0", "1", "00", "01", "10", "11"]);
        assert_eq!(strings_up_to(3).len(), 15);
    }

    #[test]
    fn coding_gap_summary_on_small_table() {
        let t = enumerate(&EnumParams::unconditional(6, 100).unwrap()).unwrap();
        let s = coding_gap_summary(&t);
        assert_eq!(s.outputs, 2);
        assert_eq!(s.violations, 0);
        assert_eq!(s.max, 1.0);
        assert_eq!(s.buckets, vec![1, 1]);
    }
}
