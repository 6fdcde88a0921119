//! Arithmetic encoding of configurations into the unit interval and the
//! plane.
//!
//! phi(q,t) = 1/(2^q 3^r 5^s) where r reads the tape bits at positions
//! 0,1,2,... and s the bits at -1,-2,... as binary numbers. Distinct
//! configurations get distinct prime signatures, so phi is injective and
//! the derived intervals can be kept pairwise disjoint.

use crate::machine::{Configuration, State, Tape};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// Tape bits at non-negative positions read as a binary number (bit i has
/// weight 2^i).
fn positive_code(t: &Tape) -> u64 {
    let mut r = 0u64;
    for (pos, sym) in t.iter() {
        if pos >= 0 && sym == 1 {
            assert!(pos < 63, "tape reaches position {pos}; phi code overflows");
            r |= 1 << pos;
        }
    }
    r
}

/// Tape bits at negative positions: bit -i has weight 2^(i-1).
fn negative_code(t: &Tape) -> u64 {
    let mut s = 0u64;
    for (pos, sym) in t.iter() {
        if pos < 0 && sym == 1 {
            assert!(pos > -64, "tape reaches position {pos}; phi code overflows");
            s |= 1 << (-pos - 1);
        }
    }
    s
}

/// The injective configuration encoding 1/(2^q 3^r 5^s) in (0,1).
pub fn phi_encode(q: State, t: &Tape) -> BigRational {
    let r = positive_code(t);
    let s = negative_code(t);
    assert!(r <= u32::MAX as u64 && s <= u32::MAX as u64);
    let den = BigInt::from(2u8).pow(q) * BigInt::from(3u8).pow(r as u32)
        * BigInt::from(5u8).pow(s as u32);
    BigRational::new(BigInt::one(), den)
}

pub fn phi_of(c: &Configuration) -> BigRational {
    phi_encode(c.state, &c.tape)
}

/// Closed interval of width phi^2/4 centered at phi.
pub fn interval_of_phi(phi: &BigRational) -> (BigRational, BigRational) {
    let half = phi * phi / BigRational::from(BigInt::from(8));
    (phi - &half, phi + &half)
}

pub fn interval_of(q: State, t: &Tape) -> (BigRational, BigRational) {
    interval_of_phi(&phi_encode(q, t))
}

/// Open rectangle of the coding region: the interval translated to band j,
/// thickened by epsilon around height k.
pub fn u_rectangle(
    q: State,
    t: &Tape,
    j: u32,
    k: u32,
    epsilon: &BigRational,
) -> [BigRational; 4] {
    let (lo, hi) = interval_of(q, t);
    let dx = BigRational::from(BigInt::from(2 * j as i64));
    let half_eps = epsilon / BigRational::from(BigInt::from(2));
    let ky = BigRational::from(BigInt::from(k as i64));
    [lo + &dx, hi + &dx, &ky - &half_eps, &ky + &half_eps]
}

/// The truncation of the coding set to bands j <= j_max and heights
/// k <= k_max, as a list of open rectangles.
pub fn u_set_rectangles(
    q: State,
    t: &Tape,
    j_max: u32,
    k_max: u32,
    epsilon: &BigRational,
) -> Vec<[BigRational; 4]> {
    let mut rects = Vec::new();
    for j in 0..=j_max {
        for k in 0..=k_max {
            rects.push(u_rectangle(q, t, j, k, epsilon));
        }
    }
    rects
}

pub fn rect_contains(rect: &[BigRational; 4], x: &BigRational, y: &BigRational) -> bool {
    &rect[0] < x && x < &rect[1] && &rect[2] < y && y < &rect[3]
}

/// Start point of the trajectory tracking input i: (2i + phi, 0).
pub fn initial_point(i: u32, c: &Configuration) -> (BigRational, BigRational) {
    let x = BigRational::from(BigInt::from(2 * i as i64)) + phi_of(c);
    (x, BigRational::from(BigInt::from(0)))
}

/// Interval bookkeeping with a fixed thickening epsilon.
#[derive(Debug, Clone)]
pub struct PlanarEncoding {
    pub epsilon: BigRational,
}

impl Default for PlanarEncoding {
    fn default() -> Self {
        PlanarEncoding {
            epsilon: BigRational::new(BigInt::one(), BigInt::from(10)),
        }
    }
}

impl PlanarEncoding {
    pub fn new(epsilon: BigRational) -> Self {
        assert!(epsilon > BigRational::from(BigInt::from(0)));
        PlanarEncoding { epsilon }
    }

    pub fn u_rectangle(&self, q: State, t: &Tape, j: u32, k: u32) -> [BigRational; 4] {
        u_rectangle(q, t, j, k, &self.epsilon)
    }

    /// Verifies pairwise disjointness of the intervals of every listed
    /// configuration, returning an offending pair on failure.
    pub fn check_disjoint<'a, I>(&self, configs: I) -> Option<(Configuration, Configuration)>
    where
        I: IntoIterator<Item = &'a Configuration>,
    {
        let items: Vec<&Configuration> = configs.into_iter().collect();
        let intervals: Vec<(BigRational, BigRational)> = items
            .iter()
            .map(|c| interval_of(c.state, &c.tape))
            .collect();
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                let (alo, ahi) = &intervals[i];
                let (blo, bhi) = &intervals[j];
                if alo <= bhi && blo <= ahi {
                    return Some((items[i].clone(), items[j].clone()));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn phi_of_blank_tape() {
        assert_eq!(phi_encode(1, &Tape::blank()), ratio(1, 2));
    }

    #[test]
    fn phi_reads_positive_code() {
        let t = Tape::from_pairs(&[(0, 1)]);
        assert_eq!(phi_encode(2, &t), ratio(1, 12));
    }

    #[test]
    fn phi_reads_negative_code() {
        let t = Tape::from_pairs(&[(-1, 1)]);
        assert_eq!(phi_encode(1, &t), ratio(1, 10));
    }

    #[test]
    fn interval_of_one_half() {
        let (lo, hi) = interval_of(1, &Tape::blank());
        assert_eq!(lo, ratio(15, 32));
        assert_eq!(hi, ratio(17, 32));
    }

    #[test]
    fn interval_width_shrinks_with_phi() {
        let wide = interval_of(1, &Tape::blank());
        let narrow = interval_of(4, &Tape::from_pairs(&[(1, 1), (-2, 1)]));
        assert!((&wide.1 - &wide.0) > (&narrow.1 - &narrow.0));
    }

    #[test]
    fn intervals_disjoint_for_bounded_family() {
        // every configuration with q <= 4 and support inside [-3, 3]
        let enc = PlanarEncoding::default();
        let mut configs = Vec::new();
        for q in 1..=4u32 {
            for mask in 0..(1u32 << 7) {
                let mut tape = Tape::blank();
                for bit in 0..7 {
                    if mask & (1 << bit) != 0 {
                        tape.set(bit as i64 - 3, 1);
                    }
                }
                configs.push(Configuration::new(q, tape));
            }
        }
        assert_eq!(configs.len(), 512);
        assert!(enc.check_disjoint(configs.iter()).is_none());
    }

    #[test]
    fn u_rectangle_assembles_translate_and_thickening() {
        let rect = u_rectangle(1, &Tape::blank(), 0, 0, &ratio(1, 10));
        assert_eq!(
            rect,
            [ratio(15, 32), ratio(17, 32), ratio(-1, 20), ratio(1, 20)]
        );
    }

    #[test]
    fn u_set_center_points_are_members() {
        let eps = ratio(1, 10);
        let rect = u_rectangle(1, &Tape::blank(), 1, 1, &eps);
        assert!(rect_contains(&rect, &ratio(5, 2), &ratio(1, 1)));
    }

    #[test]
    fn u_sets_of_distinct_configurations_are_disjoint() {
        let eps = ratio(1, 10);
        let a = u_rectangle(1, &Tape::blank(), 2, 3, &eps);
        let b = u_rectangle(2, &Tape::blank(), 2, 3, &eps);
        // same cell, different phi: x ranges must not overlap
        assert!(a[0] >= b[1] || b[0] >= a[1]);
    }

    #[test]
    fn initial_points_match_band_layout() {
        let tm = crate::samples::self_loop();
        let c = tm.start_configuration(Tape::blank());
        assert_eq!(initial_point(0, &c).0, ratio(1, 2));
        assert_eq!(initial_point(1, &c).0, ratio(5, 2));
        assert_eq!(initial_point(3, &c).0, ratio(13, 2));
    }
}
