//! Generalized shifts and the compiler from Turing machines to them.
//!
//! A generalized shift rewrites a finite window of a bi-infinite sequence
//! (table `G`), then shifts the whole sequence by a window-dependent amount
//! (table `F`). Machines compile to shifts over the extended alphabet
//! {0,1} U (Q x {0,1}) with the marked pair carrying the control state, and
//! from there down to pure bit sequences.

use crate::machine::{Configuration, State, Tape, TuringMachine};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GShiftError {
    #[error("sequence has no marked cell")]
    NoMark,
    #[error("sequence has {0} marked cells, expected exactly one")]
    MultipleMarks(usize),
    #[error("marked cell sits at position {0}, expected 0")]
    MarkOffHead(i64),
    #[error("symbol {0} does not fit alphabet of size {1}")]
    SymbolOutOfRange(u16, usize),
    #[error("bit word at cell {0} decodes to no alphabet symbol")]
    BadBitCode(i64),
    #[error("machine with {0} states exceeds the exhaustive-table limit ({1})")]
    MachineTooLarge(u32, u32),
}

/// Finitely-supported sequence over `0..alphabet_size` with blank 0.
///
/// Same storage and trimming discipline as [`Tape`]; a tape is exactly a
/// `SymbolSequence` with alphabet size 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSequence {
    alphabet_size: usize,
    offset: i64,
    word: Vec<u16>,
}

impl SymbolSequence {
    pub fn blank(alphabet_size: usize) -> Self {
        SymbolSequence {
            alphabet_size,
            offset: 0,
            word: Vec::new(),
        }
    }

    pub fn from_pairs(alphabet_size: usize, pairs: &[(i64, u16)]) -> Self {
        let mut s = Self::blank(alphabet_size);
        for &(pos, sym) in pairs {
            s.set(pos, sym);
        }
        s
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn get(&self, pos: i64) -> u16 {
        let idx = pos - self.offset;
        if idx < 0 || idx >= self.word.len() as i64 {
            0
        } else {
            self.word[idx as usize]
        }
    }

    pub fn set(&mut self, pos: i64, sym: u16) {
        assert!((sym as usize) < self.alphabet_size);
        if self.word.is_empty() {
            if sym != 0 {
                self.offset = pos;
                self.word.push(sym);
            }
            return;
        }
        let idx = pos - self.offset;
        if idx < 0 {
            let mut word = vec![0; (-idx) as usize];
            word.extend_from_slice(&self.word);
            self.word = word;
            self.offset = pos;
            self.word[0] = sym;
        } else {
            if idx as usize >= self.word.len() {
                self.word.resize(idx as usize + 1, 0);
            }
            self.word[idx as usize] = sym;
        }
        self.trim();
    }

    /// Shifts by `t`: the new cell n holds the old cell n+t.
    pub fn shift(&mut self, t: i64) {
        if !self.word.is_empty() {
            self.offset -= t;
        }
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        if self.word.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.word.len() as i64 - 1))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u16)> + '_ {
        self.word
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(j, &s)| (self.offset + j as i64, s))
    }

    fn trim(&mut self) {
        while self.word.first() == Some(&0) {
            self.word.remove(0);
            self.offset += 1;
        }
        while self.word.last() == Some(&0) {
            self.word.pop();
        }
        if self.word.is_empty() {
            self.offset = 0;
        }
    }
}

/// Contiguous window of sequence positions `start..start+len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: i64,
    pub len: usize,
}

impl Window {
    pub fn new(start: i64, len: usize) -> Self {
        Window { start, len }
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> {
        let start = self.start;
        (0..self.len).map(move |j| start + j as i64)
    }
}

/// A generalized shift with exhaustive tables.
///
/// `f[w]` is the shift amount and `g[w]` the rewritten window for the window
/// word with radix index `w` (least significant digit at the window start).
#[derive(Debug, Clone)]
pub struct GeneralizedShift {
    alphabet_size: usize,
    df: Window,
    dg: Window,
    f: Vec<i64>,
    g: Vec<Vec<u16>>,
}

impl GeneralizedShift {
    pub fn new(
        alphabet_size: usize,
        df: Window,
        dg: Window,
        f: Vec<i64>,
        g: Vec<Vec<u16>>,
    ) -> Self {
        assert_eq!(f.len(), alphabet_size.pow(df.len as u32));
        assert_eq!(g.len(), alphabet_size.pow(dg.len as u32));
        assert!(g.iter().all(|w| w.len() == dg.len));
        GeneralizedShift {
            alphabet_size,
            df,
            dg,
            f,
            g,
        }
    }

    /// Identity shift on the binary alphabet: constant F = 0 and G reading
    /// the empty window.
    pub fn identity() -> Self {
        GeneralizedShift::new(2, Window::new(0, 0), Window::new(0, 0), vec![0], vec![vec![]])
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn f_window(&self) -> Window {
        self.df
    }

    pub fn g_window(&self) -> Window {
        self.dg
    }

    pub fn f_table(&self) -> &[i64] {
        &self.f
    }

    pub fn g_table(&self) -> &[Vec<u16>] {
        &self.g
    }

    fn window_index(&self, s: &SymbolSequence, w: Window) -> usize {
        let mut idx = 0usize;
        for (j, pos) in w.positions().enumerate() {
            idx += (s.get(pos) as usize) * self.alphabet_size.pow(j as u32);
        }
        idx
    }

    /// Radix index of an explicit window word.
    pub fn word_index(&self, word: &[u16]) -> usize {
        word.iter()
            .enumerate()
            .map(|(j, &sym)| (sym as usize) * self.alphabet_size.pow(j as u32))
            .sum()
    }

    /// One application: rewrite `D_G` per `G`, then shift by `F`, both
    /// computed from the original sequence.
    pub fn apply(&self, s: &SymbolSequence) -> SymbolSequence {
        assert_eq!(s.alphabet_size, self.alphabet_size);
        let shift = self.f[self.window_index(s, self.df)];
        let rewrite = self.g[self.window_index(s, self.dg)].clone();
        let mut out = s.clone();
        for (j, &sym) in rewrite.iter().enumerate() {
            out.set(self.dg.start + j as i64, sym);
        }
        out.shift(shift);
        out
    }

    pub fn max_abs_shift(&self) -> i64 {
        self.f.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// The worked two-cell example: alphabet {0,1}, windows {-1,0},
/// G = {01->01, 11->00, 00->01, 10->11}, F = {01->-1, 11->-1, 00->0, 10->0}.
pub fn example_shift() -> GeneralizedShift {
    let w = Window::new(-1, 2);
    // index = s_{-1} + 2*s_0
    let g = vec![vec![0, 1], vec![1, 1], vec![0, 1], vec![0, 0]];
    let f = vec![0, 0, -1, -1];
    GeneralizedShift::new(2, w, w, f, g)
}

/// Symbol assignment for a compiled machine: bits stay 0 and 1, the pair
/// (q, a) becomes 2 + 2(q-1) + a. Decoding back is the conjugacy witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineCoding {
    state_count: u32,
    halt: State,
}

impl MachineCoding {
    pub fn alphabet_size(&self) -> usize {
        2 + 2 * self.state_count as usize
    }

    pub fn pair(&self, q: State, a: u8) -> u16 {
        debug_assert!(q >= 1 && q <= self.state_count && a <= 1);
        2 + 2 * (q as u16 - 1) + a as u16
    }

    pub fn unpair(&self, sym: u16) -> Option<(State, u8)> {
        if sym < 2 || sym >= self.alphabet_size() as u16 {
            return None;
        }
        Some((((sym - 2) / 2 + 1) as State, ((sym - 2) % 2) as u8))
    }

    pub fn is_halt_pair(&self, sym: u16) -> bool {
        matches!(self.unpair(sym), Some((q, _)) if q == self.halt)
    }

    /// Injective encoding: the marked pair (state, scanned symbol) sits at
    /// position 0, every other cell carries its tape bit.
    pub fn encode(&self, c: &Configuration) -> SymbolSequence {
        let mut s = SymbolSequence::blank(self.alphabet_size());
        for (pos, sym) in c.tape.iter() {
            if pos != 0 {
                s.set(pos, sym as u16);
            }
        }
        s.set(0, self.pair(c.state, c.tape.get(0)));
        s
    }

    /// Partial inverse of [`encode`](Self::encode).
    pub fn decode(&self, s: &SymbolSequence) -> Result<Configuration, GShiftError> {
        let marks: Vec<(i64, u16)> = s.iter().filter(|&(_, sym)| sym >= 2).collect();
        match marks.as_slice() {
            [] => Err(GShiftError::NoMark),
            [(pos, sym)] => {
                if *pos != 0 {
                    return Err(GShiftError::MarkOffHead(*pos));
                }
                let (q, a) = self
                    .unpair(*sym)
                    .ok_or(GShiftError::SymbolOutOfRange(*sym, self.alphabet_size()))?;
                let mut tape = Tape::blank();
                for (p, sym) in s.iter() {
                    if p != 0 {
                        if sym > 1 {
                            return Err(GShiftError::MultipleMarks(2));
                        }
                        tape.set(p, sym as u8);
                    }
                }
                tape.set(0, a);
                Ok(Configuration::new(q, tape))
            }
            many => Err(GShiftError::MultipleMarks(many.len())),
        }
    }
}

/// Compiles a machine to a generalized shift conjugate to its step map.
///
/// Windows are {-1,0,1}. A window whose middle cell carries a non-halt pair
/// (q,a) with delta(q,a) = (q',a',e) acts as:
///   e = +1: (x,(q,a),z) -> (x, a', (q',z)), shift +1   (z must be a bit)
///   e = -1: (x,(q,a),z) -> ((q',x), a', z), shift -1   (x must be a bit)
///   e =  0: (x,(q,a),z) -> (x, (q',a'), z), shift 0
/// Every other window (unmarked or halt-marked middle, or a marked neighbor
/// where a bit is required) maps to itself with shift 0; such windows never
/// arise from encoded configurations.
pub fn compile_tm_to_gshift(
    tm: &TuringMachine,
) -> Result<(GeneralizedShift, MachineCoding), GShiftError> {
    const MAX_STATES: u32 = 24;
    if tm.state_count() > MAX_STATES {
        return Err(GShiftError::MachineTooLarge(tm.state_count(), MAX_STATES));
    }
    let coding = MachineCoding {
        state_count: tm.state_count(),
        halt: tm.halt_state(),
    };
    let n = coding.alphabet_size();
    let window = Window::new(-1, 3);
    let mut f = vec![0i64; n * n * n];
    let mut g = Vec::with_capacity(n * n * n);
    for (idx, shift_slot) in f.iter_mut().enumerate() {
        let x = (idx % n) as u16;
        let mid = ((idx / n) % n) as u16;
        let z = ((idx / (n * n)) % n) as u16;
        let action = coding
            .unpair(mid)
            .filter(|&(q, _)| q != tm.halt_state())
            .and_then(|(q, a)| {
                let (q2, w, mv) = tm.transition(q, a).expect("delta total off halt");
                match mv {
                    1 if z < 2 => Some((vec![x, w as u16, coding.pair(q2, z as u8)], 1)),
                    -1 if x < 2 => Some((vec![coding.pair(q2, x as u8), w as u16, z], -1)),
                    0 => Some((vec![x, coding.pair(q2, w), z], 0)),
                    _ => None,
                }
            });
        match action {
            Some((word, shift)) => {
                *shift_slot = shift;
                g.push(word);
            }
            None => g.push(vec![x, mid, z]),
        }
    }
    Ok((GeneralizedShift::new(n, window, window, f, g), coding))
}

/// Fixed-width bit codes for a symbol alphabet: symbol s becomes the
/// big-endian k-bit word of s, so blank stays all-zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitCoding {
    alphabet_size: usize,
    bits_per_symbol: usize,
}

impl BitCoding {
    pub fn for_alphabet(alphabet_size: usize) -> Self {
        assert!(alphabet_size >= 2);
        let bits_per_symbol = usize::BITS as usize - (alphabet_size - 1).leading_zeros() as usize;
        BitCoding {
            alphabet_size,
            bits_per_symbol,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    fn code_bits(&self, sym: u16) -> impl Iterator<Item = u16> + '_ {
        let k = self.bits_per_symbol;
        (0..k).map(move |j| (sym >> (k - 1 - j)) & 1)
    }

    /// Cell n of the symbol sequence occupies bit positions kn..kn+k-1.
    pub fn recode(&self, s: &SymbolSequence) -> SymbolSequence {
        assert_eq!(s.alphabet_size(), self.alphabet_size);
        let mut out = SymbolSequence::blank(2);
        for (pos, sym) in s.iter() {
            for (j, bit) in self.code_bits(sym).enumerate() {
                if bit != 0 {
                    out.set(pos * self.bits_per_symbol as i64 + j as i64, bit);
                }
            }
        }
        out
    }

    /// Partial inverse; fails when the bit word at some cell is no code.
    pub fn decode(&self, bits: &SymbolSequence) -> Result<SymbolSequence, GShiftError> {
        assert_eq!(bits.alphabet_size(), 2);
        let mut out = SymbolSequence::blank(self.alphabet_size);
        let Some((lo, hi)) = bits.support() else {
            return Ok(out);
        };
        let k = self.bits_per_symbol as i64;
        let cell_lo = lo.div_euclid(k);
        let cell_hi = hi.div_euclid(k);
        for cell in cell_lo..=cell_hi {
            let mut sym: u16 = 0;
            for j in 0..k {
                sym = (sym << 1) | bits.get(cell * k + j);
            }
            if sym as usize >= self.alphabet_size {
                return Err(GShiftError::BadBitCode(cell));
            }
            if sym != 0 {
                out.set(cell, sym);
            }
        }
        Ok(out)
    }
}

/// Recodes a machine shift onto the binary alphabet.
///
/// Windows become {-k,...,2k-1} and shifts are multiplied by k, so the bit
/// shift is conjugate to the symbol shift through [`BitCoding::recode`].
/// Bit windows that decode to no symbol triple map to themselves.
pub fn recode_binary(gs: &GeneralizedShift) -> (GeneralizedShift, BitCoding) {
    assert_eq!(gs.f_window(), Window::new(-1, 3), "expected a compiled machine shift");
    assert_eq!(gs.g_window(), Window::new(-1, 3));
    assert!(gs.max_abs_shift() <= 1);
    let coding = BitCoding::for_alphabet(gs.alphabet_size());
    let k = coding.bits_per_symbol;
    let window = Window::new(-(k as i64), 3 * k);
    let words = 1usize << (3 * k);
    let mut f = vec![0i64; words];
    let mut g = Vec::with_capacity(words);
    for (idx, shift_slot) in f.iter_mut().enumerate() {
        // Bit j of the window (position -k+j) is bit idx>>j; cell c spans
        // window offsets ck..ck+k-1 holding its code big-endian.
        let bit = |offset: usize| ((idx >> offset) & 1) as u16;
        let mut symbols = [0u16; 3];
        let mut valid = true;
        for (c, sym) in symbols.iter_mut().enumerate() {
            let mut v: u16 = 0;
            for j in 0..k {
                v = (v << 1) | bit(c * k + j);
            }
            if v as usize >= gs.alphabet_size() {
                valid = false;
                break;
            }
            *sym = v;
        }
        if !valid {
            g.push((0..3 * k).map(bit).collect());
            continue;
        }
        let widx = gs.word_index(&symbols);
        *shift_slot = gs.f_table()[widx] * k as i64;
        let rewritten = &gs.g_table()[widx];
        let mut word = Vec::with_capacity(3 * k);
        for &sym in rewritten.iter() {
            word.extend(coding.code_bits(sym));
        }
        g.push(word);
    }
    (GeneralizedShift::new(2, window, window, f, g), coding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{RunStatus, StepResult};
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn seq(pairs: &[(i64, u16)]) -> SymbolSequence {
        SymbolSequence::from_pairs(2, pairs)
    }

    #[test]
    fn example_shift_on_01_window() {
        // (s_-1, s_0) = (0,1): identity rewrite, then shift by -1 moves the
        // pattern one cell to the right.
        let gs = example_shift();
        let out = gs.apply(&seq(&[(0, 1)]));
        assert_eq!(out, seq(&[(1, 1)]));
    }

    #[test]
    fn example_shift_erases_11_window() {
        let gs = example_shift();
        let out = gs.apply(&seq(&[(-1, 1), (0, 1)]));
        assert_eq!(out, seq(&[]));
    }

    #[test]
    fn identity_shift_fixes_everything() {
        let gs = GeneralizedShift::identity();
        let s = seq(&[(-4, 1), (0, 1), (7, 1)]);
        assert_eq!(gs.apply(&s), s);
    }

    fn random_configuration(rng: &mut ChaCha8Rng, states: u32, max_radius: i64) -> Configuration {
        let mut tape = Tape::blank();
        for _ in 0..rng.random_range(0..8) {
            tape.set(rng.random_range(-max_radius..=max_radius), 1);
        }
        Configuration::new(rng.random_range(1..=states), tape)
    }

    #[test]
    fn compiled_shift_is_conjugate_to_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (_, tm) in crate::samples::conjugacy_suite() {
            let (gs, coding) = compile_tm_to_gshift(&tm).unwrap();
            for _ in 0..100 {
                let mut c = random_configuration(&mut rng, tm.state_count(), 10);
                let mut s = coding.encode(&c);
                for _ in 0..200 {
                    if c.state == tm.halt_state() {
                        break;
                    }
                    let StepResult::Next(next) = tm.step(&c) else {
                        unreachable!()
                    };
                    s = gs.apply(&s);
                    assert_eq!(coding.decode(&s).unwrap(), next);
                    c = next;
                }
            }
        }
    }

    #[test]
    fn halting_configurations_are_fixed_points() {
        let tm = crate::samples::immediate_halt();
        let (gs, coding) = compile_tm_to_gshift(&tm).unwrap();
        let halted = Configuration::new(tm.halt_state(), Tape::from_pairs(&[(2, 1)]));
        let s = coding.encode(&halted);
        assert_eq!(gs.apply(&s), s);
    }

    #[test]
    fn immediate_halt_reaches_halt_mark_in_one_application() {
        let tm = crate::samples::immediate_halt();
        let (gs, coding) = compile_tm_to_gshift(&tm).unwrap();
        let s = gs.apply(&coding.encode(&tm.start_configuration(Tape::blank())));
        let decoded = coding.decode(&s).unwrap();
        assert_eq!(decoded.state, tm.halt_state());
    }

    #[test]
    fn recode_of_two_state_machine_uses_three_bits() {
        // two states moving both ways: bit-level shifts are -3, 0, +3
        let tm = crate::machine::TuringMachine::new(
            2,
            1,
            2,
            &[(1, 0, 1, 1, 1), (1, 1, 1, 0, -1)],
        )
        .unwrap();
        let (gs, _) = compile_tm_to_gshift(&tm).unwrap();
        assert_eq!(gs.alphabet_size(), 6);
        let (gs2, coding) = recode_binary(&gs);
        assert_eq!(coding.bits_per_symbol(), 3);
        let mut shifts: Vec<i64> = gs2.f_table().to_vec();
        shifts.sort_unstable();
        shifts.dedup();
        assert_eq!(shifts, vec![-3, 0, 3]);
        assert_eq!(gs2.f_window(), Window::new(-3, 9));
    }

    #[test]
    fn bit_iteration_matches_symbol_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (_, tm) in crate::samples::conjugacy_suite() {
            let (gs, coding) = compile_tm_to_gshift(&tm).unwrap();
            let (gs2, bits) = recode_binary(&gs);
            for _ in 0..20 {
                let c = random_configuration(&mut rng, tm.state_count(), 8);
                let mut sym = coding.encode(&c);
                let mut bit = bits.recode(&sym);
                for _ in 0..100 {
                    sym = gs.apply(&sym);
                    bit = gs2.apply(&bit);
                    assert_eq!(bits.decode(&bit).unwrap(), sym);
                }
            }
        }
    }

    #[test]
    fn compiled_machine_runs_match_deep_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tm = crate::samples::zigzag();
        let (gs, coding) = compile_tm_to_gshift(&tm).unwrap();
        for _ in 0..20 {
            let c = random_configuration(&mut rng, tm.state_count(), 6);
            let out = tm.run(&c, 200);
            let mut s = coding.encode(&c);
            for step in 1..=200usize {
                s = gs.apply(&s);
                let expect = match &out.status {
                    RunStatus::Halted { step: h, .. } if step >= *h => &out.trace[*h],
                    _ => &out.trace[step],
                };
                assert_eq!(&coding.decode(&s).unwrap(), expect);
            }
        }
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(
            state in 1u32..4,
            pairs in proptest::collection::vec((-12i64..12, 0u8..2), 0..10)
        ) {
            let tm = crate::samples::zigzag();
            let (_, coding) = compile_tm_to_gshift(&tm).unwrap();
            let c = Configuration::new(state, Tape::from_pairs(&pairs));
            prop_assert_eq!(coding.decode(&coding.encode(&c)).unwrap(), c);
        }

        #[test]
        fn bit_recode_roundtrip(
            pairs in proptest::collection::vec((-12i64..12, 0u16..10), 0..10)
        ) {
            let coding = BitCoding::for_alphabet(10);
            let s = SymbolSequence::from_pairs(10, &pairs);
            prop_assert_eq!(coding.decode(&coding.recode(&s)).unwrap(), s);
        }

        #[test]
        fn support_grows_at_most_max_shift(
            pairs in proptest::collection::vec((-10i64..10, 0u8..2), 0..8)
        ) {
            let tm = crate::samples::zigzag();
            let (gs, coding) = compile_tm_to_gshift(&tm).unwrap();
            let mut s = coding.encode(&Configuration::new(1, Tape::from_pairs(&pairs)));
            for _ in 0..50 {
                let before = s.support().unwrap_or((0, 0));
                let next = gs.apply(&s);
                let after = next.support().unwrap_or((0, 0));
                let growth = (before.0 - after.0).max(after.1 - before.1);
                prop_assert!(growth <= gs.max_abs_shift() + 1);
                s = next;
            }
        }
    }
}
