//! Computation curves: one per band, interpolating the configuration
//! encodings at integer heights.
//!
//! Segments use the quintic smoothstep, so the curve is a C^2 graph
//! x = g(y) with flat knots (g' = g'' = 0 at integer heights) and is
//! monotone between knots. After the machine halts the curve continues
//! vertically.

use super::encoding::phi_of;
use crate::machine::{Configuration, RunStatus, TuringMachine};
use num_rational::BigRational;
use num_traits::ToPrimitive;

#[derive(Debug, Clone)]
pub struct ComputationCurve {
    band: u32,
    knots_exact: Vec<BigRational>,
    knots: Vec<f64>,
    orbit: Vec<Configuration>,
    halted_at: Option<usize>,
}

/// Builds the band-i curve for `height_budget` machine steps.
pub fn build_curve(
    tm: &TuringMachine,
    input: &Configuration,
    band: u32,
    height_budget: usize,
) -> ComputationCurve {
    let out = tm.run(input, height_budget);
    let halted_at = match out.status {
        RunStatus::Halted { step, .. } => Some(step),
        RunStatus::Running => None,
    };
    let base = BigRational::from_integer((2 * band as i64).into());
    let mut orbit = out.trace;
    // freeze the orbit at the halting configuration
    while orbit.len() < height_budget + 1 {
        orbit.push(orbit.last().unwrap().clone());
    }
    let knots_exact: Vec<BigRational> = orbit.iter().map(|c| &base + phi_of(c)).collect();
    let knots = knots_exact
        .iter()
        .map(|x| x.to_f64().expect("knot fits in f64"))
        .collect();
    ComputationCurve {
        band,
        knots_exact,
        knots,
        orbit,
        halted_at,
    }
}

fn smoothstep5(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

fn smoothstep5_d1(u: f64) -> f64 {
    30.0 * u * u * (1.0 - u) * (1.0 - u)
}

fn smoothstep5_d2(u: f64) -> f64 {
    60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
}

impl ComputationCurve {
    pub fn band(&self) -> u32 {
        self.band
    }

    pub fn halted_at(&self) -> Option<usize> {
        self.halted_at
    }

    pub fn orbit(&self) -> &[Configuration] {
        &self.orbit
    }

    pub fn knots_exact(&self) -> &[BigRational] {
        &self.knots_exact
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// The configuration tracked at integer height k (frozen after halting).
    pub fn expected_configuration(&self, k: usize) -> &Configuration {
        let idx = k.min(self.orbit.len() - 1);
        &self.orbit[idx]
    }

    fn segment(&self, y: f64) -> Option<(usize, f64)> {
        let last = self.knots.len() - 1;
        if last == 0 || y <= 0.0 || y >= last as f64 {
            return None;
        }
        let seg = y.floor() as usize;
        Some((seg, y - seg as f64))
    }

    pub fn x_at(&self, y: f64) -> f64 {
        match self.segment(y) {
            None if y <= 0.0 => self.knots[0],
            None => *self.knots.last().unwrap(),
            Some((seg, u)) => {
                let a = self.knots[seg];
                a + (self.knots[seg + 1] - a) * smoothstep5(u)
            }
        }
    }

    pub fn dx_at(&self, y: f64) -> f64 {
        match self.segment(y) {
            None => 0.0,
            Some((seg, u)) => (self.knots[seg + 1] - self.knots[seg]) * smoothstep5_d1(u),
        }
    }

    pub fn d2x_at(&self, y: f64) -> f64 {
        match self.segment(y) {
            None => 0.0,
            Some((seg, u)) => (self.knots[seg + 1] - self.knots[seg]) * smoothstep5_d2(u),
        }
    }

    /// Largest |g'| over the curve.
    pub fn max_slope(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() * 1.875)
            .fold(0.0, f64::max)
    }

    /// Smallest distance from any knot to the band walls.
    pub fn wall_gap(&self) -> f64 {
        let left = 2.0 * self.band as f64;
        self.knots
            .iter()
            .map(|&x| (x - left).min(left + 1.0 - x))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Tape;

    #[test]
    fn self_loop_curve_is_vertical() {
        let tm = crate::samples::self_loop();
        let curve = build_curve(&tm, &tm.start_configuration(Tape::blank()), 0, 10);
        assert!(curve.knots().iter().all(|&x| x == 0.5));
        assert_eq!(curve.x_at(3.7), 0.5);
        assert_eq!(curve.dx_at(3.7), 0.0);
    }

    #[test]
    fn immediate_halt_curve_bends_once_then_vertical() {
        let tm = crate::samples::immediate_halt();
        let curve = build_curve(&tm, &tm.start_configuration(Tape::blank()), 1, 8);
        assert_eq!(curve.halted_at(), Some(1));
        assert_eq!(curve.knots()[0], 2.5);
        assert!(curve.knots()[1..].iter().all(|&x| x == 2.25));
    }

    #[test]
    fn knots_stay_strictly_inside_band() {
        let tm = crate::samples::toggler();
        let curve = build_curve(&tm, &tm.start_configuration(Tape::from_pairs(&[(0, 1)])), 2, 20);
        for &x in curve.knots() {
            assert!(x > 4.0 && x < 5.0);
        }
    }

    #[test]
    fn curve_interpolates_knots_with_flat_joints() {
        let tm = crate::samples::flipper();
        let curve = build_curve(&tm, &tm.start_configuration(Tape::blank()), 0, 12);
        for (k, &x) in curve.knots().iter().enumerate() {
            assert_eq!(curve.x_at(k as f64), x);
            assert_eq!(curve.dx_at(k as f64), 0.0);
            assert_eq!(curve.d2x_at(k as f64), 0.0);
        }
        // strictly between two distinct knots the curve moves
        assert_ne!(curve.x_at(0.5), curve.knots()[0]);
    }

    #[test]
    fn curve_is_monotone_between_knots() {
        let tm = crate::samples::flipper();
        let curve = build_curve(&tm, &tm.start_configuration(Tape::blank()), 0, 4);
        let (a, b) = (curve.knots()[0], curve.knots()[1]);
        let mut prev = curve.x_at(0.0);
        for i in 1..=100 {
            let x = curve.x_at(i as f64 / 100.0);
            if a < b {
                assert!(x >= prev);
            } else {
                assert!(x <= prev);
            }
            prev = x;
        }
    }
}
