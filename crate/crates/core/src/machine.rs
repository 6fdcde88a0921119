//! Turing machines over the binary alphabet {0,1} with blank 0.
//!
//! The head is fixed at position 0 and a step shifts the whole tape:
//! after writing, `+1` shifts left (cell n takes the old content of n+1)
//! and `-1` shifts right. This positional convention is what makes the
//! conjugacy with generalized shifts exact.

use std::fmt;
use thiserror::Error;

/// State identifier, `1..=state_count`.
pub type State = u32;

/// Tape symbol; only 0 and 1 are valid.
pub type Symbol = u8;

/// Tape shift per step: `+1` left, `-1` right, `0` none.
pub type Move = i8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MachineError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Semantic(String),
}

/// A bi-infinite binary tape with finite support.
///
/// Stored as `(offset, word)` where `word[j]` is the symbol at position
/// `offset + j`. Canonical form trims blank (0) cells at both ends, so
/// structural equality is semantic equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Tape {
    offset: i64,
    word: Vec<Symbol>,
}

impl Tape {
    pub fn blank() -> Self {
        Tape::default()
    }

    /// Builds a tape from `(position, symbol)` pairs; later pairs win.
    pub fn from_pairs(pairs: &[(i64, Symbol)]) -> Self {
        let mut t = Tape::blank();
        for &(pos, sym) in pairs {
            t.set(pos, sym);
        }
        t
    }

    pub fn get(&self, pos: i64) -> Symbol {
        let idx = pos - self.offset;
        if idx < 0 || idx >= self.word.len() as i64 {
            0
        } else {
            self.word[idx as usize]
        }
    }

    pub fn set(&mut self, pos: i64, sym: Symbol) {
        debug_assert!(sym <= 1);
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

    /// Shifts the tape by `eps`: the new cell n holds the old cell n+eps.
    pub fn shift(&mut self, eps: i8) {
        if !self.word.is_empty() {
            self.offset -= eps as i64;
        }
    }

    /// Positions of non-blank cells, as an inclusive range.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.word.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.word.len() as i64 - 1))
        }
    }

    pub fn is_blank(&self) -> bool {
        self.word.is_empty()
    }

    /// Non-blank cells in position order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Symbol)> + '_ {
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

impl fmt::Display for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "(blank)");
        }
        write!(f, "[{}]", {
            self.iter()
                .map(|(p, s)| format!("{p}:{s}"))
                .collect::<Vec<_>>()
                .join(",")
        })
    }
}

/// A machine configuration: control state plus tape.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: State,
    pub tape: Tape,
}

impl Configuration {
    pub fn new(state: State, tape: Tape) -> Self {
        Configuration { state, tape }
    }
}

/// A deterministic Turing machine over {0,1}.
///
/// The transition table is total on `(Q \ {halt}) x {0,1}` and empty on the
/// halt state; both properties are enforced at construction.
#[derive(Debug, Clone)]
pub struct TuringMachine {
    state_count: u32,
    start: State,
    halt: State,
    // delta[(q-1)*2 + sym], None exactly for q = halt.
    delta: Vec<Option<(State, Symbol, Move)>>,
}

impl TuringMachine {
    pub fn new(
        state_count: u32,
        start: State,
        halt: State,
        transitions: &[(State, Symbol, State, Symbol, Move)],
    ) -> Result<Self, MachineError> {
        if state_count == 0 {
            return Err(MachineError::Semantic("state count must be positive".into()));
        }
        for &q in &[start, halt] {
            if q == 0 || q > state_count {
                return Err(MachineError::Semantic(format!(
                    "state {q} outside 1..={state_count}"
                )));
            }
        }
        if start == halt {
            return Err(MachineError::Semantic(
                "start and halt states must differ".into(),
            ));
        }
        let mut delta = vec![None; state_count as usize * 2];
        for &(q, sym, q2, sym2, mv) in transitions {
            if q == 0 || q > state_count || q2 == 0 || q2 > state_count {
                return Err(MachineError::Semantic(format!(
                    "transition ({q},{sym}) references a state outside 1..={state_count}"
                )));
            }
            if q == halt {
                return Err(MachineError::Semantic(format!(
                    "halt state {q} cannot have outgoing transitions"
                )));
            }
            if sym > 1 || sym2 > 1 {
                return Err(MachineError::Semantic(format!(
                    "symbol outside {{0,1}} in transition ({q},{sym})"
                )));
            }
            if !matches!(mv, -1..=1) {
                return Err(MachineError::Semantic(format!(
                    "move {mv} outside {{-1,0,1}} in transition ({q},{sym})"
                )));
            }
            let slot = &mut delta[(q as usize - 1) * 2 + sym as usize];
            if slot.is_some() {
                return Err(MachineError::Semantic(format!(
                    "duplicate transition for ({q},{sym})"
                )));
            }
            *slot = Some((q2, sym2, mv));
        }
        for q in 1..=state_count {
            if q == halt {
                continue;
            }
            for sym in 0..2u8 {
                if delta[(q as usize - 1) * 2 + sym as usize].is_none() {
                    return Err(MachineError::Semantic(format!(
                        "missing transition for ({q},{sym})"
                    )));
                }
            }
        }
        Ok(TuringMachine {
            state_count,
            start,
            halt,
            delta,
        })
    }

    pub fn state_count(&self) -> u32 {
        self.state_count
    }

    pub fn start_state(&self) -> State {
        self.start
    }

    pub fn halt_state(&self) -> State {
        self.halt
    }

    pub fn transition(&self, q: State, sym: Symbol) -> Option<(State, Symbol, Move)> {
        self.delta[(q as usize - 1) * 2 + sym as usize]
    }

    /// All transitions `(q, sym, q', sym', move)` in table order.
    pub fn transitions(&self) -> impl Iterator<Item = (State, Symbol, State, Symbol, Move)> + '_ {
        (1..=self.state_count).flat_map(move |q| {
            (0..2u8).filter_map(move |sym| {
                self.transition(q, sym)
                    .map(|(q2, s2, mv)| (q, sym, q2, s2, mv))
            })
        })
    }

    pub fn start_configuration(&self, tape: Tape) -> Configuration {
        Configuration::new(self.start, tape)
    }

    /// One step of the machine. Total: halting configurations return their tape.
    pub fn step(&self, c: &Configuration) -> StepResult {
        if c.state == self.halt {
            return StepResult::Halted(c.tape.clone());
        }
        let (q2, write, mv) = self.delta[(c.state as usize - 1) * 2 + c.tape.get(0) as usize]
            .expect("transition table is total off the halt state");
        let mut tape = c.tape.clone();
        tape.set(0, write);
        tape.shift(mv);
        StepResult::Next(Configuration::new(q2, tape))
    }

    /// Iterates `step` up to `max_steps` times, recording every configuration.
    ///
    /// `trace[k]` is the k-th iterate of `c`; iteration stops early when the
    /// halt state is reached.
    pub fn run(&self, c: &Configuration, max_steps: usize) -> RunOutcome {
        let mut trace = vec![c.clone()];
        if c.state == self.halt {
            return RunOutcome {
                status: RunStatus::Halted {
                    step: 0,
                    tape: c.tape.clone(),
                },
                trace,
            };
        }
        for k in 1..=max_steps {
            let next = match self.step(trace.last().unwrap()) {
                StepResult::Next(n) => n,
                StepResult::Halted(_) => unreachable!("halting is checked before stepping"),
            };
            let halted = next.state == self.halt;
            trace.push(next);
            if halted {
                return RunOutcome {
                    status: RunStatus::Halted {
                        step: k,
                        tape: trace.last().unwrap().tape.clone(),
                    },
                    trace,
                };
            }
        }
        RunOutcome {
            status: RunStatus::Running,
            trace,
        }
    }

    /// Whether the compiled block map of this machine has pairwise disjoint
    /// image blocks over the machine-reachable windows.
    pub fn is_reversible(&self) -> bool {
        crate::cantor::machine_reversible(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Halted(Tape),
    Next(Configuration),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Halted { step: usize, tape: Tape },
    Running,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub trace: Vec<Configuration>,
}

/// Parses the line-based machine description format.
///
/// ```text
/// states: <m>
/// start: <q0>
/// halt: <q_halt>
/// <q> <sym> -> <q'> <sym'> <move>    # move in {L, N, R}
/// ```
///
/// `#` starts a comment, blank lines are ignored. L maps to +1, N to 0 and
/// R to -1.
pub fn parse_machine(text: &str) -> Result<TuringMachine, MachineError> {
    let mut header: [Option<u32>; 3] = [None; 3];
    let mut transitions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        if let Some((key, value)) = line.split_once(':') {
            let slot = match key.trim() {
                "states" => 0,
                "start" => 1,
                "halt" => 2,
                other => {
                    return Err(MachineError::Syntax {
                        line: lineno,
                        msg: format!("unknown header '{other}'"),
                    })
                }
            };
            if header[slot].is_some() {
                return Err(MachineError::Syntax {
                    line: lineno,
                    msg: format!("duplicate '{}' header", key.trim()),
                });
            }
            header[slot] = Some(value.trim().parse::<u32>().map_err(|_| {
                MachineError::Syntax {
                    line: lineno,
                    msg: format!("'{}' is not a state number", value.trim()),
                }
            })?);
            continue;
        }
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| MachineError::Syntax {
            line: lineno,
            msg: "expected '<q> <sym> -> <q'> <sym'> <move>'".into(),
        })?;
        let lhs: Vec<&str> = lhs.split_whitespace().collect();
        let rhs: Vec<&str> = rhs.split_whitespace().collect();
        if lhs.len() != 2 || rhs.len() != 3 {
            return Err(MachineError::Syntax {
                line: lineno,
                msg: "expected '<q> <sym> -> <q'> <sym'> <move>'".into(),
            });
        }
        let parse_state = |tok: &str| {
            tok.parse::<u32>().map_err(|_| MachineError::Syntax {
                line: lineno,
                msg: format!("'{tok}' is not a state number"),
            })
        };
        let parse_sym = |tok: &str| match tok {
            "0" => Ok(0u8),
            "1" => Ok(1u8),
            _ => Err(MachineError::Syntax {
                line: lineno,
                msg: format!("'{tok}' is not a symbol (0 or 1)"),
            }),
        };
        let mv = match rhs[2] {
            "L" => 1i8,
            "N" => 0,
            "R" => -1,
            other => {
                return Err(MachineError::Syntax {
                    line: lineno,
                    msg: format!("'{other}' is not a move (L, N or R)"),
                })
            }
        };
        transitions.push((
            parse_state(lhs[0])?,
            parse_sym(lhs[1])?,
            parse_state(rhs[0])?,
            parse_sym(rhs[1])?,
            mv,
        ));
    }
    let states = header[0]
        .ok_or_else(|| MachineError::Semantic("missing 'states:' header".into()))?;
    let start = header[1].ok_or_else(|| MachineError::Semantic("missing 'start:' header".into()))?;
    let halt = header[2].ok_or_else(|| MachineError::Semantic("missing 'halt:' header".into()))?;
    TuringMachine::new(states, start, halt, &transitions)
}

/// Parses a tape given as comma-separated signed `position:bit` pairs,
/// e.g. `"0:1,-2:1"`; the empty string is the blank tape.
pub fn parse_tape_spec(spec: &str) -> Result<Tape, MachineError> {
    let mut tape = Tape::blank();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (pos, bit) = part.trim().rsplit_once(':').ok_or_else(|| {
            MachineError::Semantic(format!("bad tape cell '{part}', expected position:bit"))
        })?;
        let pos: i64 = pos
            .trim()
            .parse()
            .map_err(|_| MachineError::Semantic(format!("bad tape position '{pos}'")))?;
        let bit = match bit.trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(MachineError::Semantic(format!("bad tape bit '{other}'")))
            }
        };
        tape.set(pos, bit);
    }
    Ok(tape)
}
