//! Reachability semantics, suspension flows and the rigid-rotation control.
//!
//! `reach` is deliberately a bounded semi-decision procedure: not reaching
//! the target within the budget proves nothing. The rotation return map is
//! the contrast case — for rational frequencies its reachability problem is
//! decided exactly.

use crate::cantor::{BlockMap, CantorError, TernaryPoint};
use crate::gshift::BitCoding;
use crate::machine::{Configuration, RunStatus, State, TuringMachine};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error("rotation frequency is not rational in turns")]
    IrrationalFrequency,
    #[error("rotation parameters must be positive")]
    NonPositiveRotation,
}

/// A map of the Cantor square together with decidable coding sets.
pub trait PointMap {
    fn step_point(&self, p: &TernaryPoint) -> Result<TernaryPoint, CantorError>;
}

impl PointMap for BlockMap {
    fn step_point(&self, p: &TernaryPoint) -> Result<TernaryPoint, CantorError> {
        self.apply(p)
    }
}

/// Decidable membership predicate used as a coding set.
pub trait CodingSet {
    fn contains_point(&self, p: &TernaryPoint) -> bool;
}

/// The union of all halt-state coding cylinders, tested intensionally:
/// only the head window (the k digits coding cell 0) is read.
#[derive(Debug, Clone, Copy)]
pub struct HaltingSet {
    halt: State,
    bits_per_symbol: usize,
}

impl HaltingSet {
    pub fn new(halt: State, coding: &BitCoding) -> Self {
        HaltingSet {
            halt,
            bits_per_symbol: coding.bits_per_symbol(),
        }
    }

    pub fn for_machine(tm: &TuringMachine, coding: &BitCoding) -> Self {
        Self::new(tm.halt_state(), coding)
    }
}

impl CodingSet for HaltingSet {
    fn contains_point(&self, p: &TernaryPoint) -> bool {
        let k = self.bits_per_symbol;
        let mut sym: u16 = 0;
        for j in 0..k {
            sym = (sym << 1) | (p.y_digit(j) / 2) as u16;
        }
        // head symbol codes the pair (q, a) as 2 + 2(q-1) + a
        sym >= 2 && (sym - 2) / 2 + 1 == self.halt as u16
    }
}

/// Outcome of a bounded reachability query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reach {
    /// Smallest step index at which the orbit entered the target.
    Reached(usize),
    /// Not reached within the bound; proves nothing beyond it.
    NotWithin(usize),
}

/// Walks the orbit of `start` for at most `bound` steps looking for `target`.
pub fn reach<M: PointMap, S: CodingSet>(
    system: &M,
    start: &TernaryPoint,
    target: &S,
    bound: usize,
) -> Result<Reach, DynamicsError> {
    let mut p = start.clone();
    for n in 0..=bound {
        if target.contains_point(&p) {
            return Ok(Reach::Reached(n));
        }
        if n < bound {
            p = system.step_point(&p)?;
        }
    }
    Ok(Reach::NotWithin(bound))
}

/// Two-sided halting comparison: direct machine run against block-map
/// reachability of the halt coding set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaltingEquivalence {
    pub machine_halts_at: Option<usize>,
    pub orbit_reaches_at: Option<usize>,
}

impl HaltingEquivalence {
    pub fn agree(&self) -> bool {
        self.machine_halts_at == self.orbit_reaches_at
    }
}

pub fn halting_equivalence(
    tm: &TuringMachine,
    c: &Configuration,
    bound: usize,
) -> Result<HaltingEquivalence, DynamicsError> {
    let compiled = crate::cantor::compile_machine(tm).expect("machine within table limit");
    let machine_halts_at = match tm.run(c, bound).status {
        RunStatus::Halted { step, .. } => Some(step),
        RunStatus::Running => None,
    };
    let target = HaltingSet::for_machine(tm, &compiled.bit_coding);
    let start = compiled.encode_configuration(c);
    let orbit_reaches_at = match reach(&compiled.block_map, &start, &target, bound)? {
        Reach::Reached(n) => Some(n),
        Reach::NotWithin(_) => None,
    };
    Ok(HaltingEquivalence {
        machine_halts_at,
        orbit_reaches_at,
    })
}

/// Suspension of a discrete map under a roof of height one.
///
/// The state is a base point plus a phase in [0,1); flowing for rational
/// time `t` applies the base map once per unit crossed. Exact by
/// construction, so the round trip through `return_map` is equality.
pub struct SuspensionFlow<'a, M: PointMap> {
    base: &'a M,
}

pub fn suspend<M: PointMap>(base: &M) -> SuspensionFlow<'_, M> {
    SuspensionFlow { base }
}

impl<M: PointMap> SuspensionFlow<'_, M> {
    pub fn flow(
        &self,
        point: &TernaryPoint,
        phase: &BigRational,
        time: &BigRational,
    ) -> Result<(TernaryPoint, BigRational), DynamicsError> {
        assert!(!phase.is_negative() && phase < &BigRational::one());
        assert!(!time.is_negative());
        let total = phase + time;
        let crossings = total.floor().to_integer();
        let mut p = point.clone();
        let mut n = BigInt::zero();
        while n < crossings {
            p = self.base.step_point(&p)?;
            n += 1;
        }
        Ok((p, total.fract()))
    }

    /// First-return map to the section {phase = 0}.
    pub fn return_map(&self, point: &TernaryPoint) -> Result<TernaryPoint, DynamicsError> {
        Ok(self
            .flow(point, &BigRational::zero(), &BigRational::one())?
            .0)
    }
}

/// Rigid rotation return map on the disk: (s, phi) -> (s, phi + omega)
/// with omega = 2 pi k / l, stored exactly as k/l turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationReturn {
    omega_turns: BigRational,
}

pub fn rotation_return(l: &BigRational, k: &BigRational) -> Result<RotationReturn, DynamicsError> {
    if !l.is_positive() || !k.is_positive() {
        return Err(DynamicsError::NonPositiveRotation);
    }
    Ok(RotationReturn { omega_turns: k / l })
}

impl RotationReturn {
    /// Rotation angle as a fraction of a full turn.
    pub fn omega_turns(&self) -> &BigRational {
        &self.omega_turns
    }

    pub fn apply(&self, s: &BigRational, phi_turns: &BigRational) -> (BigRational, BigRational) {
        (s.clone(), (phi_turns + &self.omega_turns).fract_floor())
    }

    pub fn is_identity(&self) -> bool {
        self.omega_turns.is_integer()
    }
}

trait FractFloor {
    fn fract_floor(&self) -> BigRational;
}

impl FractFloor for BigRational {
    fn fract_floor(&self) -> BigRational {
        self - self.floor()
    }
}

/// Axis-aligned target rectangle in (s, phi) with phi in turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationTarget {
    pub s_lo: BigRational,
    pub s_hi: BigRational,
    pub phi_lo: BigRational,
    pub phi_hi: BigRational,
}

impl RotationTarget {
    fn contains(&self, s: &BigRational, phi: &BigRational) -> bool {
        &self.s_lo <= s && s <= &self.s_hi && &self.phi_lo <= phi && phi <= &self.phi_hi
    }
}

/// Decides exactly whether the rotation orbit of `(s0, phi0)` meets any
/// target rectangle.
///
/// The orbit preserves s, and for rational frequency p/q it is the finite
/// set {phi0 + j p/q mod 1 : j < q}; membership is a rational comparison.
pub fn rotation_reach_decider(
    l: &BigRational,
    k: &BigRational,
    start: (&BigRational, &BigRational),
    targets: &[RotationTarget],
) -> Result<bool, DynamicsError> {
    let rot = rotation_return(l, k)?;
    // k/l is rational by construction; the undecidable-frequency branch is
    // unreachable through this interface and kept only for the error type.
    let period = rot.omega_turns.denom().clone();
    let (s0, phi0) = start;
    let mut phi = phi0.fract_floor();
    let mut j = BigInt::zero();
    while j < period {
        if targets.iter().any(|t| t.contains(s0, &phi)) {
            return Ok(true);
        }
        phi = (&phi + &rot.omega_turns).fract_floor();
        j += 1;
    }
    Ok(false)
}

/// One row of the machine-trace CSV: exact Cantor coordinates per step.
pub fn trace_csv(tm: &TuringMachine, c: &Configuration, bound: usize) -> String {
    let compiled = crate::cantor::compile_machine(tm).expect("machine within table limit");
    let out = tm.run(c, bound);
    let mut csv = String::from("step,state,head_window,x,y\n");
    for (k, config) in out.trace.iter().enumerate() {
        let p = compiled.encode_configuration(config);
        let window: String = (-1..=1)
            .map(|n| char::from(b'0' + config.tape.get(n)))
            .collect();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            k,
            config.state,
            window,
            p.x_value(),
            p.y_value()
        ));
    }
    csv
}
