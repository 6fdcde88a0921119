//! Small machines used by tests, the CLI demos and the acceptance suite.

use crate::machine::TuringMachine;

/// Both transitions go straight to the halt state without touching the tape.
pub fn immediate_halt() -> TuringMachine {
    TuringMachine::new(2, 1, 2, &[(1, 0, 2, 0, 0), (1, 1, 2, 1, 0)]).unwrap()
}

/// Identity dynamics: every configuration is a fixed point.
pub fn self_loop() -> TuringMachine {
    TuringMachine::new(2, 1, 2, &[(1, 0, 1, 0, 0), (1, 1, 1, 1, 0)]).unwrap()
}

/// Two states merge into state 3 on reading 0; not reversible.
pub fn merging() -> TuringMachine {
    TuringMachine::new(
        3,
        1,
        3,
        &[
            (1, 0, 3, 0, 0),
            (2, 0, 3, 0, 0),
            (1, 1, 1, 1, 0),
            (2, 1, 2, 1, 0),
        ],
    )
    .unwrap()
}

/// Single non-halt state, both moves left, distinct writes; reversible and
/// never halting.
pub fn reversible_writer() -> TuringMachine {
    TuringMachine::new(2, 1, 2, &[(1, 0, 1, 1, 1), (1, 1, 1, 0, 1)]).unwrap()
}

/// Toggles the scanned cell forever.
pub fn flipper() -> TuringMachine {
    TuringMachine::new(2, 1, 2, &[(1, 0, 1, 1, 0), (1, 1, 1, 0, 0)]).unwrap()
}

/// Erases the scanned cell until it reads a blank, then halts.
pub fn eraser() -> TuringMachine {
    TuringMachine::new(
        3,
        1,
        3,
        &[
            (1, 0, 3, 0, 0),
            (1, 1, 1, 0, 0),
            (2, 0, 2, 0, 0),
            (2, 1, 2, 1, 0),
        ],
    )
    .unwrap()
}

/// Bounces between states 1 and 2 while scanning a 1; fixed elsewhere.
pub fn toggler() -> TuringMachine {
    TuringMachine::new(
        3,
        1,
        3,
        &[
            (1, 0, 1, 0, 0),
            (1, 1, 2, 1, 0),
            (2, 0, 2, 0, 0),
            (2, 1, 1, 1, 0),
        ],
    )
    .unwrap()
}

/// Three working states with both shift directions; halts on some inputs.
pub fn zigzag() -> TuringMachine {
    TuringMachine::new(
        4,
        1,
        4,
        &[
            (1, 0, 2, 1, 1),
            (1, 1, 3, 0, -1),
            (2, 0, 3, 1, 0),
            (2, 1, 1, 1, 1),
            (3, 0, 4, 1, -1),
            (3, 1, 2, 0, 1),
        ],
    )
    .unwrap()
}

/// The machines exercised by the conjugacy acceptance check.
pub fn conjugacy_suite() -> Vec<(&'static str, TuringMachine)> {
    vec![
        ("immediate_halt", immediate_halt()),
        ("self_loop", self_loop()),
        ("merging", merging()),
        ("reversible_writer", reversible_writer()),
        ("zigzag", zigzag()),
    ]
}

/// Machine description source matching `immediate_halt`, for parser and CLI tests.
pub const IMMEDIATE_HALT_SRC: &str = "\
# halts in one step from every configuration
states: 2
start: 1
halt: 2
1 0 -> 2 0 N
1 1 -> 2 1 N
";
