//! Exhaustive exploration of every program up to a length and step bound.
//!
//! The interpreter only asks for the next instruction when it needs it, so
//! the set of runs forms a tree: each node is a machine state waiting for an
//! instruction, and its eight children are the states after feeding each
//! opcode. A depth-first walk of that tree visits every halting program of
//! length ≤ L exactly once, and the table of per-output aggregates it
//! produces is the source of every complexity and probability estimate.

mod cache;
mod dyadic;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::machine::{run, MachineState, Opcode, Pause, OPCODE_BITS};

pub use cache::{load, load_unchecked, read_table, save, write_table, TableError};
pub use dyadic::{log2_u64, DyadicMass};

pub const ISA_VERSION: u32 = 1;
pub const MAX_PROGRAM_LEN: u32 = 60;
pub const DEFAULT_MAX_LEN: u32 = 21;
pub const DEFAULT_STEP_BUDGET: u64 = 256;

/// Pairwise prefix-freeness is only scanned directly up to this length.
pub const PAIRWISE_PREFIX_CHECK_MAX_LEN: u32 = 12;

/// Instructions fed sequentially before subtrees are handed to workers.
const SPLIT_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("L={0} is not a multiple of 3")]
    LengthNotMultipleOf3(u32),
    #[error("L={0} is outside 3..=60")]
    LengthOutOfRange(u32),
    #[error("step budget T must be at least 1")]
    ZeroStepBudget,
    #[error("unsupported ISA version {0} (this build implements {ISA_VERSION})")]
    UnsupportedIsa(u32),
    #[error("worker count must be at least 1")]
    ZeroWorkers,
    #[error("could not start worker pool: {0}")]
    WorkerPool(String),
}

/// Resource bounds for one enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EnumParams {
    /// Maximum program length in bits.
    #[serde(rename = "L")]
    pub max_len: u32,
    /// Step budget per run.
    #[serde(rename = "T")]
    pub step_budget: u64,
    #[serde(rename = "cond")]
    pub condition: BitString,
    #[serde(rename = "isa")]
    pub isa_version: u32,
}

impl EnumParams {
    pub fn new(max_len: u32, step_budget: u64, condition: BitString) -> Result<Self, ConfigError> {
        let params = EnumParams {
            max_len,
            step_budget,
            condition,
            isa_version: ISA_VERSION,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn unconditional(max_len: u32, step_budget: u64) -> Result<Self, ConfigError> {
        Self::new(max_len, step_budget, BitString::new())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.max_len.is_multiple_of(3) {
            return Err(ConfigError::LengthNotMultipleOf3(self.max_len));
        }
        if !(3..=MAX_PROGRAM_LEN).contains(&self.max_len) {
            return Err(ConfigError::LengthOutOfRange(self.max_len));
        }
        if self.step_budget == 0 {
            return Err(ConfigError::ZeroStepBudget);
        }
        if self.isa_version != ISA_VERSION {
            return Err(ConfigError::UnsupportedIsa(self.isa_version));
        }
        Ok(())
    }

    /// Same resources, different condition.
    pub fn with_condition(&self, condition: BitString) -> Self {
        EnumParams {
            condition,
            ..self.clone()
        }
    }
}

impl Default for EnumParams {
    fn default() -> Self {
        EnumParams {
            max_len: DEFAULT_MAX_LEN,
            step_budget: DEFAULT_STEP_BUDGET,
            condition: BitString::new(),
            isa_version: ISA_VERSION,
        }
    }
}

/// Aggregate over all halting programs producing one output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub output: BitString,
    /// Length of a shortest program: the complexity estimate.
    pub min_len: u32,
    pub mass: DyadicMass,
    /// Lexicographically smallest among the shortest programs.
    pub witness: BitString,
    /// Number of halting programs with this output. Not part of the cache
    /// format, so `None` on tables read from disk.
    pub program_count: Option<u64>,
}

/// Per-output aggregates of one enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramTable {
    params: EnumParams,
    records: BTreeMap<BitString, OutputRecord>,
    total_mass: DyadicMass,
}

impl ProgramTable {
    /// Assembles a table from parts without checking anything; see
    /// [`ProgramTable::verify`].
    pub fn from_parts(
        params: EnumParams,
        records: BTreeMap<BitString, OutputRecord>,
        total_mass: DyadicMass,
    ) -> Self {
        ProgramTable {
            params,
            records,
            total_mass,
        }
    }

    pub fn params(&self) -> &EnumParams {
        &self.params
    }

    pub fn scale(&self) -> u32 {
        self.params.max_len
    }

    pub fn total_mass(&self) -> DyadicMass {
        self.total_mass
    }

    /// Records in output order.
    pub fn records(&self) -> impl ExactSizeIterator<Item = &OutputRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, x: &BitString) -> Option<&OutputRecord> {
        self.records.get(x)
    }

    /// Shortest program length for `x`, `None` when no program of length
    /// ≤ L produces it within the step budget.
    pub fn khat(&self, x: &BitString) -> Option<u32> {
        self.records.get(x).map(|r| r.min_len)
    }

    /// Exact halting mass of `x`; zero when absent.
    pub fn mass(&self, x: &BitString) -> DyadicMass {
        self.records
            .get(x)
            .map_or(DyadicMass::zero(self.scale()), |r| r.mass)
    }

    /// The same table with program counts dropped, as it reads back from a
    /// cache file.
    pub fn without_counts(mut self) -> Self {
        for r in self.records.values_mut() {
            r.program_count = None;
        }
        self
    }

    /// Re-enumerates every halting program with this table's parameters.
    pub fn halting_programs(&self) -> Vec<HaltingProgram> {
        halting_programs(&self.params)
    }

    /// Checks every invariant that can be checked from the table alone:
    /// Kraft, the total against the record sum, and each witness by
    /// re-execution.
    pub fn verify(&self) -> Result<(), InvariantViolation> {
        self.params.validate().map_err(InvariantViolation::Params)?;
        self.verify_kraft()?;
        self.verify_witnesses()
    }

    pub fn verify_kraft(&self) -> Result<(), InvariantViolation> {
        let scale = self.scale();
        if !self.total_mass.within_kraft() {
            return Err(InvariantViolation::Kraft {
                numerator: u128::from(self.total_mass.numerator),
                scale,
            });
        }
        let sum: u128 = self
            .records
            .values()
            .map(|r| u128::from(r.mass.numerator))
            .sum();
        if sum > 1u128 << scale {
            return Err(InvariantViolation::Kraft {
                numerator: sum,
                scale,
            });
        }
        if sum != u128::from(self.total_mass.numerator) {
            return Err(InvariantViolation::TotalMismatch {
                total: self.total_mass.numerator,
                sum,
            });
        }
        Ok(())
    }

    pub fn verify_witnesses(&self) -> Result<(), InvariantViolation> {
        let scale = self.scale();
        for (output, r) in &self.records {
            if &r.output != output {
                return Err(InvariantViolation::Witness {
                    output: output.clone(),
                    detail: format!("record keyed by {output} names output {}", r.output),
                });
            }
            if r.witness.len() != r.min_len as usize || r.min_len > scale || r.min_len == 0 {
                return Err(InvariantViolation::Witness {
                    output: output.clone(),
                    detail: format!(
                        "witness has {} bits but min_len is {}",
                        r.witness.len(),
                        r.min_len
                    ),
                });
            }
            if r.mass.numerator < 1u64 << (scale - r.min_len) {
                return Err(InvariantViolation::WitnessMass {
                    output: output.clone(),
                    numerator: r.mass.numerator,
                    min_len: r.min_len,
                });
            }
            let outcome = run(&r.witness, &self.params.condition, self.params.step_budget);
            if outcome.exact_output(r.witness.len()) != Some(output) {
                return Err(InvariantViolation::Witness {
                    output: output.clone(),
                    detail: format!("witness {} gives {outcome:?}", r.witness),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("invalid parameters: {0}")]
    Params(ConfigError),
    #[error("Kraft violation: total mass {numerator}/2^{scale} exceeds 1")]
    Kraft { numerator: u128, scale: u32 },
    #[error("total mass numerator {total} does not equal the record sum {sum}")]
    TotalMismatch { total: u64, sum: u128 },
    #[error("witness mass violation for output {output:?}: {numerator} < 2^(L-{min_len})")]
    WitnessMass {
        output: BitString,
        numerator: u64,
        min_len: u32,
    },
    #[error("witness violation for output {output:?}: {detail}")]
    Witness { output: BitString, detail: String },
    #[error("prefix-freeness violation: {shorter} is a proper prefix of {longer}")]
    PrefixFree {
        shorter: BitString,
        longer: BitString,
    },
}

/// One halting program and what it printed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HaltingProgram {
    pub program: BitString,
    pub output: BitString,
}

/// Visits the halting leaves under `state`, in 0-before-1 bit order.
fn explore<F>(mut state: MachineState, params: &EnumParams, sink: &mut F)
where
    F: FnMut(&BitString, &BitString),
{
    match state.advance(params.step_budget) {
        Pause::Halted => sink(state.consumed_code(), state.output()),
        Pause::StepLimit | Pause::Invalid(_) => {}
        Pause::NeedsBit => {
            let len = state.consumed_code().len();
            // Every instruction costs a step, so a spent budget cannot halt.
            if len + OPCODE_BITS > params.max_len as usize || state.steps() >= params.step_budget {
                return;
            }
            let (last, rest) = Opcode::ALL.split_last().expect("eight opcodes");
            for &op in rest {
                let mut child = state.clone();
                child.feed_opcode(op);
                explore(child, params, sink);
            }
            state.feed_opcode(*last);
            explore(state, params, sink);
        }
    }
}

/// Calls `sink(program, output)` for every halting program, sequentially and
/// in lexicographic program order.
pub fn for_each_halting<F>(params: &EnumParams, mut sink: F) -> Result<(), ConfigError>
where
    F: FnMut(&BitString, &BitString),
{
    params.validate()?;
    explore(MachineState::new(&params.condition), params, &mut sink);
    Ok(())
}

/// Every halting program, in lexicographic order.
///
/// Panics on invalid parameters; tables only exist for valid ones.
pub fn halting_programs(params: &EnumParams) -> Vec<HaltingProgram> {
    let mut out = Vec::new();
    for_each_halting(params, |p, o| {
        out.push(HaltingProgram {
            program: p.clone(),
            output: o.clone(),
        })
    })
    .expect("valid enumeration parameters");
    out
}

/// Finds a pair of programs where one is a proper prefix of the other.
///
/// This is the direct quadratic scan; it does not rely on sorting so that it
/// stays independent of the ordering the enumeration already produces.
pub fn find_prefix_pair(programs: &[BitString]) -> Option<(BitString, BitString)> {
    for a in programs {
        for b in programs {
            if a.is_proper_prefix_of(b) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
struct Accumulator {
    min_len: u32,
    mass: u64,
    witness: BitString,
    count: u64,
}

impl Accumulator {
    fn absorb(&mut self, other: Accumulator) {
        self.mass += other.mass;
        self.count += other.count;
        if (other.min_len, &other.witness) < (self.min_len, &self.witness) {
            self.min_len = other.min_len;
            self.witness = other.witness;
        }
    }
}

/// Partial table built by one worker.
#[derive(Debug, Default)]
struct Partial {
    by_output: HashMap<BitString, Accumulator>,
}

impl Partial {
    fn add(&mut self, program: &BitString, output: &BitString, scale: u32) {
        let len = program.len() as u32;
        let weight = 1u64 << (scale - len);
        if let Some(acc) = self.by_output.get_mut(output) {
            acc.absorb(Accumulator {
                min_len: len,
                mass: weight,
                witness: program.clone(),
                count: 1,
            });
        } else {
            self.by_output.insert(
                output.clone(),
                Accumulator {
                    min_len: len,
                    mass: weight,
                    witness: program.clone(),
                    count: 1,
                },
            );
        }
    }

    /// Associative and commutative.
    fn merge(mut self, other: Partial) -> Partial {
        let (mut big, small) = if self.by_output.len() >= other.by_output.len() {
            (std::mem::take(&mut self.by_output), other.by_output)
        } else {
            (other.by_output, std::mem::take(&mut self.by_output))
        };
        for (output, acc) in small {
            match big.get_mut(&output) {
                Some(existing) => existing.absorb(acc),
                None => {
                    big.insert(output, acc);
                }
            }
        }
        Partial { by_output: big }
    }

    fn into_table(self, params: EnumParams) -> ProgramTable {
        let scale = params.max_len;
        let mut total = 0u64;
        let records = self
            .by_output
            .into_iter()
            .map(|(output, acc)| {
                total += acc.mass;
                let record = OutputRecord {
                    output: output.clone(),
                    min_len: acc.min_len,
                    mass: DyadicMass::new(acc.mass, scale),
                    witness: acc.witness,
                    program_count: Some(acc.count),
                };
                (output, record)
            })
            .collect();
        ProgramTable {
            params,
            records,
            total_mass: DyadicMass::new(total, scale),
        }
    }
}

/// Builds the table on the current rayon pool.
pub fn enumerate(params: &EnumParams) -> Result<ProgramTable, ConfigError> {
    params.validate()?;
    let scale = params.max_len;

    // Expand the first few instructions sequentially; halting programs found
    // on the way go straight into the root partial.
    let mut root = Partial::default();
    let mut frontier = vec![MachineState::new(&params.condition)];
    for _ in 0..SPLIT_DEPTH {
        let mut next = Vec::with_capacity(frontier.len() * Opcode::ALL.len());
        for mut state in frontier {
            match state.advance(params.step_budget) {
                Pause::Halted => root.add(state.consumed_code(), state.output(), scale),
                Pause::StepLimit | Pause::Invalid(_) => {}
                Pause::NeedsBit => {
                    if state.consumed_code().len() + OPCODE_BITS > scale as usize
                        || state.steps() >= params.step_budget
                    {
                        continue;
                    }
                    for op in Opcode::ALL {
                        let mut child = state.clone();
                        child.feed_opcode(op);
                        next.push(child);
                    }
                }
            }
        }
        frontier = next;
    }

    let merged = frontier
        .into_par_iter()
        .map(|state| {
            let mut partial = Partial::default();
            explore(state, params, &mut |p: &BitString, o: &BitString| {
                partial.add(p, o, scale)
            });
            partial
        })
        .reduce(Partial::default, Partial::merge)
        .merge(root);
    Ok(merged.into_table(params.clone()))
}

/// Builds the table on a dedicated pool of `workers` threads.
pub fn enumerate_with_workers(
    params: &EnumParams,
    workers: usize,
) -> Result<ProgramTable, ConfigError> {
    if workers == 0 {
        return Err(ConfigError::ZeroWorkers);
    }
    params.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ConfigError::WorkerPool(e.to_string()))?;
    pool.install(|| enumerate(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    fn table6() -> ProgramTable {
        enumerate(&EnumParams::unconditional(6, 100).unwrap()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert_eq!(
            EnumParams::unconditional(5, 10),
            Err(ConfigError::LengthNotMultipleOf3(5))
        );
        assert_eq!(
            EnumParams::unconditional(0, 10),
            Err(ConfigError::LengthOutOfRange(0))
        );
        assert_eq!(
            EnumParams::unconditional(63, 10),
            Err(ConfigError::LengthOutOfRange(63))
        );
        assert_eq!(
            EnumParams::unconditional(6, 0),
            Err(ConfigError::ZeroStepBudget)
        );
        let mut p = EnumParams::default();
        assert_eq!((p.max_len, p.step_budget), (21, 256));
        p.isa_version = 2;
        assert_eq!(p.validate(), Err(ConfigError::UnsupportedIsa(2)));
    }

    #[test]
    fn length_three_has_only_halt() {
        let t = enumerate(&EnumParams::unconditional(3, 100).unwrap()).unwrap();
        assert_eq!(t.len(), 1);
        let r = t.get(&bits("")).unwrap();
        assert_eq!(r.min_len, 3);
        assert_eq!(r.mass, DyadicMass::new(1, 3));
        assert_eq!(r.witness, bits("000"));
        assert_eq!(t.total_mass(), DyadicMass::new(1, 3));
    }

    #[test]
    fn length_six_census() {
        let t = table6();
        assert_eq!(t.len(), 2);
        let empty = t.get(&bits("")).unwrap();
        assert_eq!((empty.min_len, empty.mass.numerator), (3, 11));
        assert_eq!(empty.program_count, Some(4));
        let zero = t.get(&bits("0")).unwrap();
        assert_eq!((zero.min_len, zero.mass.numerator), (6, 2));
        assert_eq!(zero.witness, bits("001000"));
        assert_eq!(t.total_mass(), DyadicMass::new(13, 6));

        let programs: Vec<_> = t
            .halting_programs()
            .into_iter()
            .map(|h| (h.program.to_string(), h.output.to_string()))
            .collect();
        let expect = [
            ("000", ""),
            ("001000", "0"),
            ("010000", ""),
            ("011000", ""),
            ("100000", ""),
            ("111000", "0"),
        ];
        let expect: Vec<_> = expect
            .iter()
            .map(|(p, o)| (p.to_string(), o.to_string()))
            .collect();
        assert_eq!(programs, expect);
    }

    #[test]
    fn khat_and_mass_queries() {
        let t = table6();
        assert_eq!(t.khat(&bits("")), Some(3));
        assert_eq!(t.khat(&bits("0")), Some(6));
        assert_eq!(t.khat(&bits("1")), None);
        assert_eq!(t.mass(&bits("")), DyadicMass::new(11, 6));
        assert_eq!(t.mass(&bits("1")), DyadicMass::zero(6));
        let sum: u64 = t.records().map(|r| r.mass.numerator).sum();
        assert_eq!(sum, t.total_mass().numerator);
    }

    #[test]
    fn condition_does_not_change_halt() {
        let t = enumerate(&EnumParams::new(3, 100, bits("1")).unwrap()).unwrap();
        assert_eq!(t.khat(&bits("")), Some(3));
        assert_eq!(t.get(&bits("")).unwrap().witness, bits("000"));
        assert!(t.total_mass().numerator >= 1);
    }

    #[test]
    fn verify_catches_tampering() {
        let t = table6();
        assert_eq!(t.verify(), Ok(()));

        let mut bad = t.clone();
        bad.total_mass.numerator = 65;
        assert!(matches!(
            bad.verify(),
            Err(InvariantViolation::Kraft { .. })
        ));

        let mut bad = t.clone();
        bad.records.get_mut(&bits("0")).unwrap().witness = bits("111001");
        assert!(matches!(
            bad.verify(),
            Err(InvariantViolation::Witness { .. })
        ));

        let mut bad = t;
        bad.records.get_mut(&bits("")).unwrap().mass.numerator = 10;
        assert!(matches!(
            bad.verify(),
            Err(InvariantViolation::TotalMismatch { .. })
        ));
    }

    #[test]
    fn prefix_pair_scan() {
        let programs = [bits("000"), bits("001000"), bits("010000")];
        assert_eq!(find_prefix_pair(&programs), None);
        let programs = [bits("001000"), bits("001")];
        assert_eq!(
            find_prefix_pair(&programs),
            Some((bits("001"), bits("001000")))
        );
    }

    #[test]
    fn worker_count_does_not_matter() {
        let p = EnumParams::unconditional(12, 100).unwrap();
        let one = enumerate_with_workers(&p, 1).unwrap();
        let three = enumerate_with_workers(&p, 3).unwrap();
        assert_eq!(one, three);
        assert_eq!(enumerate_with_workers(&p, 0), Err(ConfigError::ZeroWorkers));
    }
}
