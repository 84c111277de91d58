//! The reference prefix machine.
//!
//! Programs are read three bits at a time, most significant bit first, and
//! only when the interpreter actually needs the next instruction. The bits a
//! halting run has read are, by definition, the program; no halting program
//! can therefore be a proper prefix of another.
//!
//! The machine has one two-way-infinite binary work tape. A conditional
//! input `y` is laid out on it as `enc2(y)` starting at the head.

use std::fmt;

use thiserror::Error;

use crate::bits::BitString;

/// Width of one instruction in program bits.
pub const OPCODE_BITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opcode {
    /// `000`: stop; the run is valid.
    Halt,
    /// `001`: append the bit under the head to the output.
    Out,
    /// `010`
    MoveRight,
    /// `011`
    MoveLeft,
    /// `100`: invert the bit under the head.
    Flip,
    /// `101`: on a 0 cell, skip forward past the matching `LoopEnd`.
    LoopStart,
    /// `110`: on a 1 cell, jump back to the matching `LoopStart`.
    LoopEnd,
    /// `111`: output the bit under the head, then move right.
    OutRight,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::Halt,
        Opcode::Out,
        Opcode::MoveRight,
        Opcode::MoveLeft,
        Opcode::Flip,
        Opcode::LoopStart,
        Opcode::LoopEnd,
        Opcode::OutRight,
    ];

    /// Decodes the low three bits of `code`.
    pub fn decode(code: u8) -> Opcode {
        Self::ALL[(code & 0b111) as usize]
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_bits(b0: bool, b1: bool, b2: bool) -> Opcode {
        Self::decode(((b0 as u8) << 2) | ((b1 as u8) << 1) | b2 as u8)
    }

    pub fn to_bits(self) -> [bool; 3] {
        let c = self.code();
        [c & 0b100 != 0, c & 0b010 != 0, c & 0b001 != 0]
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Halt => "HALT",
            Opcode::Out => "OUT",
            Opcode::MoveRight => "MOVR",
            Opcode::MoveLeft => "MOVL",
            Opcode::Flip => "FLIP",
            Opcode::LoopStart => "LOOPSTART",
            Opcode::LoopEnd => "LOOPEND",
            Opcode::OutRight => "OUTR",
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// Assembles a program from opcodes.
pub fn assemble(ops: &[Opcode]) -> BitString {
    ops.iter().flat_map(|op| op.to_bits()).collect()
}

/// Splits a program into opcodes, ignoring an incomplete trailing group.
pub fn disassemble(program: &BitString) -> Vec<Opcode> {
    program
        .as_slice()
        .chunks_exact(OPCODE_BITS)
        .map(|c| Opcode::from_bits(c[0], c[1], c[2]))
        .collect()
}

/// Self-delimiting encoding: every data bit is followed by a continue flag 1.
/// The terminator is the all-zero tape beyond the image.
pub fn enc2(y: &BitString) -> BitString {
    let mut out = BitString::with_capacity(2 * y.len());
    for b in y.iter() {
        out.push(b);
        out.push(true);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed enc2 image: nonzero bit at offset {offset} after the terminator")]
    TrailingGarbage { offset: usize },
    #[error("malformed enc2 image: terminating pair at offset {offset} carries a data bit")]
    DataAfterEnd { offset: usize },
}

/// Inverse of [`enc2`]; trailing zeros after the image are ignored.
pub fn dec2(t: &BitString) -> Result<BitString, DecodeError> {
    let (y, used) = dec2_prefix(t)?;
    if let Some(offset) = (used..t.len()).find(|&i| t.get(i) == Some(true)) {
        return Err(DecodeError::TrailingGarbage { offset });
    }
    Ok(y)
}

/// Decodes the `enc2` image at the start of `t`, returning the decoded string
/// and the number of bits it occupied (flags included, terminator excluded).
fn dec2_prefix(t: &BitString) -> Result<(BitString, usize), DecodeError> {
    let mut y = BitString::new();
    let mut i = 0;
    loop {
        let data = t.get(i).unwrap_or(false);
        let flag = t.get(i + 1).unwrap_or(false);
        if !flag {
            if data {
                return Err(DecodeError::DataAfterEnd { offset: i });
            }
            return Ok((y, i));
        }
        y.push(data);
        i += 2;
    }
}

/// `enc2(x)` followed by `y`; uniquely decodable by [`unpair`].
pub fn pair(x: &BitString, y: &BitString) -> BitString {
    enc2(x).concat(y)
}

/// Splits a [`pair`] image back into its components.
///
/// Only images whose `x` part is terminated by an explicit `00` pair or by the
/// end of the string decode; `pair(x, y)` with nonempty `y` starting with `1`
/// is ambiguous on its own and the caller must know `|x|`.
pub fn unpair(z: &BitString, x_len: usize) -> Option<(BitString, BitString)> {
    let split = 2 * x_len;
    if z.len() < split {
        return None;
    }
    let head = z.prefix(split);
    let x = dec2(&head).ok()?;
    (x.len() == x_len).then(|| (x, z.as_slice()[split..].into()))
}

/// Binary work tape, two-way infinite, untouched cells read 0.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Tape {
    /// Cells 0, 1, 2, ...
    right: Vec<bool>,
    /// Cells -1, -2, ...
    left: Vec<bool>,
}

impl Tape {
    pub fn with_input(input: &BitString) -> Self {
        Tape {
            right: input.as_slice().to_vec(),
            left: Vec::new(),
        }
    }

    #[inline]
    fn slot(&self, pos: i64) -> Option<&bool> {
        if pos >= 0 {
            self.right.get(pos as usize)
        } else {
            self.left.get((-1 - pos) as usize)
        }
    }

    #[inline]
    pub fn read(&self, pos: i64) -> bool {
        self.slot(pos).copied().unwrap_or(false)
    }

    pub fn flip(&mut self, pos: i64) {
        let (cells, idx) = if pos >= 0 {
            (&mut self.right, pos as usize)
        } else {
            (&mut self.left, (-1 - pos) as usize)
        };
        if idx >= cells.len() {
            cells.resize(idx + 1, false);
        }
        cells[idx] = !cells[idx];
    }

    /// The cells in `[lo, hi)`.
    pub fn window(&self, lo: i64, hi: i64) -> BitString {
        (lo..hi).map(|p| self.read(p)).collect()
    }
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = -(self.left.len() as i64);
        let hi = self.right.len() as i64;
        write!(f, "Tape[{lo}..{hi}]({})", self.window(lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvalidReason {
    UnmatchedLoopEnd { at_instruction: usize },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::UnmatchedLoopEnd { at_instruction } => {
                write!(f, "unmatched LOOPEND at instruction {at_instruction}")
            }
        }
    }
}

/// Why [`MachineState::advance`] returned control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pause {
    Halted,
    /// The next instruction has not been read yet.
    NeedsBit,
    StepLimit,
    Invalid(InvalidReason),
}

/// Complete interpreter state. Cheap enough to clone at every branch point
/// of the enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineState {
    tape: Tape,
    head: i64,
    /// Program bits read so far, possibly ending in a partial instruction.
    code: BitString,
    /// Decoded instructions of `code`.
    ops: Vec<Opcode>,
    /// For each decoded `LoopEnd`, the index of its `LoopStart`.
    loop_match: Vec<Option<u32>>,
    open_loops: Vec<u32>,
    /// Instruction index; the bit offset is `3 * ip`.
    ip: usize,
    output: BitString,
    steps: u64,
    /// Nesting depth of an in-progress forward skip, 0 when executing.
    skip_depth: u32,
}

impl MachineState {
    pub fn new(condition: &BitString) -> Self {
        MachineState {
            tape: Tape::with_input(&enc2(condition)),
            head: 0,
            code: BitString::new(),
            ops: Vec::new(),
            loop_match: Vec::new(),
            open_loops: Vec::new(),
            ip: 0,
            output: BitString::new(),
            steps: 0,
            skip_depth: 0,
        }
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn consumed_code(&self) -> &BitString {
        &self.code
    }

    /// Instruction pointer as a bit offset into the consumed code.
    pub fn ip_bits(&self) -> usize {
        self.ip * OPCODE_BITS
    }

    pub fn output(&self) -> &BitString {
        &self.output
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn into_output(self) -> BitString {
        self.output
    }

    /// Appends one program bit to the consumed code.
    pub fn feed_bit(&mut self, bit: bool) {
        self.code.push(bit);
        let n = self.code.len();
        if n.is_multiple_of(OPCODE_BITS) {
            let s = self.code.as_slice();
            self.push_op(Opcode::from_bits(s[n - 3], s[n - 2], s[n - 1]));
        }
    }

    /// Appends a whole instruction. The consumed code must be at an
    /// instruction boundary.
    pub fn feed_opcode(&mut self, op: Opcode) {
        debug_assert_eq!(self.code.len() % OPCODE_BITS, 0);
        for b in op.to_bits() {
            self.code.push(b);
        }
        self.push_op(op);
    }

    fn push_op(&mut self, op: Opcode) {
        let idx = self.ops.len() as u32;
        let matched = match op {
            Opcode::LoopStart => {
                self.open_loops.push(idx);
                None
            }
            Opcode::LoopEnd => self.open_loops.pop(),
            _ => None,
        };
        self.ops.push(op);
        self.loop_match.push(matched);
    }

    /// Executes until the machine halts, fails, runs out of budget, or needs
    /// an instruction that has not been fed yet.
    pub fn advance(&mut self, step_budget: u64) -> Pause {
        loop {
            let Some(&op) = self.ops.get(self.ip) else {
                return Pause::NeedsBit;
            };
            if self.steps >= step_budget {
                return Pause::StepLimit;
            }
            self.steps += 1;

            if self.skip_depth > 0 {
                match op {
                    Opcode::LoopStart => self.skip_depth += 1,
                    Opcode::LoopEnd => self.skip_depth -= 1,
                    _ => {}
                }
                self.ip += 1;
                continue;
            }

            let cell = self.tape.read(self.head);
            match op {
                Opcode::Halt => return Pause::Halted,
                Opcode::Out => self.output.push(cell),
                Opcode::MoveRight => self.head += 1,
                Opcode::MoveLeft => self.head -= 1,
                Opcode::Flip => self.tape.flip(self.head),
                Opcode::LoopStart => {
                    if !cell {
                        self.skip_depth = 1;
                    }
                }
                Opcode::LoopEnd => match self.loop_match[self.ip] {
                    None => {
                        return Pause::Invalid(InvalidReason::UnmatchedLoopEnd {
                            at_instruction: self.ip,
                        })
                    }
                    Some(start) if cell => {
                        // Resume with the loop body; re-testing the start
                        // would see the same nonzero cell.
                        self.ip = start as usize + 1;
                        continue;
                    }
                    Some(_) => {}
                },
                Opcode::OutRight => {
                    self.output.push(cell);
                    self.head += 1;
                }
            }
            self.ip += 1;
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Halted {
        output: BitString,
        /// Program bits read; always a multiple of 3.
        consumed: usize,
        steps: u64,
    },
    /// The interpreter wanted a bit beyond the end of the supplied program.
    NeedsBit {
        state: Box<MachineState>,
    },
    StepLimit,
    Invalid {
        reason: InvalidReason,
    },
}

impl RunOutcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }

    /// The output when the run halted after reading the whole program.
    pub fn exact_output(&self, program_len: usize) -> Option<&BitString> {
        match self {
            RunOutcome::Halted {
                output, consumed, ..
            } if *consumed == program_len => Some(output),
            _ => None,
        }
    }
}

/// Runs `program` with `condition` preloaded on the tape.
///
/// Bits are pulled from `program` in order as the interpreter demands them.
/// A budget of 0 yields `StepLimit` without executing anything.
pub fn run(program: &BitString, condition: &BitString, step_budget: u64) -> RunOutcome {
    let mut state = MachineState::new(condition);
    loop {
        match state.advance(step_budget) {
            Pause::Halted => {
                let consumed = state.code.len();
                let steps = state.steps;
                return RunOutcome::Halted {
                    output: state.into_output(),
                    consumed,
                    steps,
                };
            }
            Pause::StepLimit => return RunOutcome::StepLimit,
            Pause::Invalid(reason) => return RunOutcome::Invalid { reason },
            Pause::NeedsBit => {
                let have = state.code.len();
                let need = state.ops.len() * OPCODE_BITS + OPCODE_BITS;
                for i in have..need {
                    match program.get(i) {
                        Some(b) => state.feed_bit(b),
                        None => {
                            return RunOutcome::NeedsBit {
                                state: Box::new(state),
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Copies the conditional input to the output:
/// `MOVR [ MOVL OUT MOVR MOVR MOVR ] HALT`, 27 bits.
pub fn copy_program() -> BitString {
    use Opcode::*;
    assemble(&[
        MoveRight, LoopStart, MoveLeft, Out, MoveRight, MoveRight, MoveRight, LoopEnd, Halt,
    ])
}

/// A shorter copy program using `OUTR`:
/// `MOVR [ MOVL OUTR MOVR MOVR ] HALT`, 24 bits.
pub fn short_copy_program() -> BitString {
    use Opcode::*;
    assemble(&[
        MoveRight, LoopStart, MoveLeft, OutRight, MoveRight, MoveRight, LoopEnd, Halt,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use proptest::prelude::*;

    #[test]
    fn decode_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for code in 0u8..8 {
            let op = Opcode::decode(code);
            assert_eq!(op.code(), code);
            let [a, b, c] = op.to_bits();
            assert_eq!(Opcode::from_bits(a, b, c), op);
            assert!(seen.insert(op));
        }
        assert_eq!(Opcode::decode(0b101), Opcode::LoopStart);
        assert_eq!(Opcode::decode(0b111), Opcode::OutRight);
    }

    #[test]
    fn enc2_examples() {
        assert_eq!(enc2(&bits("")), bits(""));
        assert_eq!(enc2(&bits("1")), bits("11"));
        assert_eq!(enc2(&bits("01")), bits("0111"));
    }

    #[test]
    fn dec2_examples() {
        assert_eq!(dec2(&bits("0111")).unwrap(), bits("01"));
        assert_eq!(dec2(&bits("110000")).unwrap(), bits("1"));
        assert_eq!(dec2(&bits("")).unwrap(), bits(""));
    }

    #[test]
    fn dec2_rejects_malformed_images() {
        assert_eq!(
            dec2(&bits("1110")),
            Err(DecodeError::DataAfterEnd { offset: 2 })
        );
        assert_eq!(
            dec2(&bits("110001")),
            Err(DecodeError::TrailingGarbage { offset: 5 })
        );
        assert!(dec2(&bits("1")).is_err());
    }

    #[test]
    fn pair_examples() {
        assert_eq!(pair(&bits(""), &bits("")), bits(""));
        assert_eq!(pair(&bits("0"), &bits("1")), bits("011"));
        assert_eq!(pair(&bits("1"), &bits("")), bits("11"));
        assert_eq!(unpair(&bits("011"), 1), Some((bits("0"), bits("1"))));
    }

    #[test]
    fn lone_halt() {
        assert_eq!(
            run(&bits("000"), &bits(""), 10),
            RunOutcome::Halted {
                output: bits(""),
                consumed: 3,
                steps: 1
            }
        );
    }

    #[test]
    fn flip_out_halt() {
        match run(&bits("100001000"), &bits(""), 10) {
            RunOutcome::Halted {
                output, consumed, ..
            } => {
                assert_eq!(output, bits("1"));
                assert_eq!(consumed, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_then_demand() {
        match run(&bits("001"), &bits(""), 10) {
            RunOutcome::NeedsBit { state } => {
                assert_eq!(state.output(), &bits("0"));
                assert_eq!(state.steps(), 1);
                assert_eq!(state.consumed_code(), &bits("001"));
                assert_eq!(state.ip_bits(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn demand_mid_instruction() {
        match run(&bits("0"), &bits(""), 10) {
            RunOutcome::NeedsBit { state } => {
                assert_eq!(state.consumed_code(), &bits("0"));
                assert_eq!(state.ip_bits(), 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tight_loop_hits_step_limit() {
        // FLIP; LOOPSTART falls through; LOOPEND jumps back forever.
        assert_eq!(run(&bits("100101110"), &bits(""), 8), RunOutcome::StepLimit);
    }

    #[test]
    fn unmatched_loop_end_is_invalid_on_either_cell_value() {
        assert!(matches!(
            run(&bits("110"), &bits(""), 10),
            RunOutcome::Invalid { .. }
        ));
        assert!(matches!(
            run(&bits("100110"), &bits(""), 10),
            RunOutcome::Invalid { .. }
        ));
    }

    #[test]
    fn skip_consumes_bits_and_steps() {
        // LOOPSTART on 0 skips HALT and the matching LOOPEND, then halts.
        let p = assemble(&[
            Opcode::LoopStart,
            Opcode::Out,
            Opcode::LoopEnd,
            Opcode::Halt,
        ]);
        assert_eq!(
            run(&p, &bits(""), 10),
            RunOutcome::Halted {
                output: bits(""),
                consumed: 12,
                steps: 4
            }
        );
        // Nested loops are skipped as a unit.
        let p = assemble(&[
            Opcode::LoopStart,
            Opcode::LoopStart,
            Opcode::LoopEnd,
            Opcode::Out,
            Opcode::LoopEnd,
            Opcode::OutRight,
            Opcode::Halt,
        ]);
        match run(&p, &bits(""), 100) {
            RunOutcome::Halted { output, steps, .. } => {
                assert_eq!(output, bits("0"));
                assert_eq!(steps, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
        // A skip that runs off the end of the program demands more bits.
        assert!(matches!(
            run(&bits("101000"), &bits(""), 10),
            RunOutcome::NeedsBit { .. }
        ));
    }

    #[test]
    fn step_budget_counts_halt() {
        assert_eq!(run(&bits("000"), &bits(""), 0), RunOutcome::StepLimit);
        assert!(run(&bits("000"), &bits(""), 1).is_halted());
        assert_eq!(run(&bits("001000"), &bits(""), 1), RunOutcome::StepLimit);
    }

    #[test]
    fn condition_is_preloaded_as_enc2() {
        // OUTR five times over enc2("10") = 1 1 0 1, then a blank cell.
        let p = assemble(&[Opcode::OutRight; 5]).concat(&bits("000"));
        match run(&p, &bits("10"), 100) {
            RunOutcome::Halted { output, .. } => assert_eq!(output, bits("11010")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tape_grows_left() {
        let p = assemble(&[Opcode::MoveLeft, Opcode::Flip, Opcode::Out, Opcode::Halt]);
        let mut s = MachineState::new(&bits(""));
        for op in disassemble(&p) {
            s.feed_opcode(op);
        }
        assert_eq!(s.advance(10), Pause::Halted);
        assert_eq!(s.head(), -1);
        assert!(s.tape().read(-1));
        assert!(!s.tape().read(0));
        assert_eq!(s.output(), &bits("1"));
    }

    #[test]
    fn copy_programs() {
        assert_eq!(copy_program().len(), 27);
        assert_eq!(short_copy_program().len(), 24);
        for x in ["", "0", "1", "0110", "1111111", "0000000001"] {
            let x = bits(x);
            for p in [copy_program(), short_copy_program()] {
                assert_eq!(
                    run(&p, &x, 10_000).exact_output(p.len()),
                    Some(&x),
                    "program {p} on {x}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn enc2_roundtrip(y in proptest::collection::vec(any::<bool>(), 0..=64), pad in 0usize..8) {
            let y = BitString::from_bits(y);
            let mut image = enc2(&y);
            prop_assert_eq!(image.len(), 2 * y.len());
            for _ in 0..pad {
                image.push(false);
            }
            prop_assert_eq!(dec2(&image).unwrap(), y);
        }

        #[test]
        fn run_is_deterministic(p in proptest::collection::vec(any::<bool>(), 0..40),
                                y in proptest::collection::vec(any::<bool>(), 0..6)) {
            let p = BitString::from_bits(p);
            let y = BitString::from_bits(y);
            prop_assert_eq!(run(&p, &y, 200), run(&p, &y, 200));
        }

        #[test]
        fn halting_is_prefix_sound(p in proptest::collection::vec(any::<bool>(), 0..30),
                                   s in proptest::collection::vec(any::<bool>(), 1..12),
                                   y in proptest::collection::vec(any::<bool>(), 0..4)) {
            let p = BitString::from_bits(p);
            let y = BitString::from_bits(y);
            if let RunOutcome::Halted { output, consumed, steps } = run(&p, &y, 300) {
                let p = p.prefix(consumed);
                let ext = p.concat(&BitString::from_bits(s));
                prop_assert_eq!(
                    run(&ext, &y, 300),
                    RunOutcome::Halted { output, consumed, steps }
                );
            }
        }

        #[test]
        fn budget_monotone(p in proptest::collection::vec(any::<bool>(), 0..30),
                           t in 1u64..100, extra in 0u64..200) {
            let p = BitString::from_bits(p);
            let e = BitString::new();
            let first = run(&p, &e, t);
            if first.is_halted() {
                prop_assert_eq!(run(&p, &e, t + extra), first);
            }
        }
    }
}
