//! The tracking potential and its analytic gradient.
//!
//! Around each curve x = g(y) the potential is, in nearest-point
//! coordinates (y*, n),
//!
//! ```text
//! f = y + W(|n|) * ((y* - y) - (c/2) n^2)
//! ```
//!
//! where W is 1 on the inner half-tube and decays to 0 across the outer
//! half with C^9 contact. Inside the inner half-tube f reduces to
//! y*(p) - (c/2) n(p)^2, making the curve an exact integral curve with
//! normal rate dn/dt = -c n; outside the tube f = y, so the drift is
//! exactly (0,1). The gradient is the exact chain rule through the
//! projection:
//!
//! ```text
//! grad y* = (g', 1) / M,   M = s^2 - (x - g) g'',   s^2 = 1 + g'^2
//! grad n  = nu = (1, -g') / s
//! ```
//!
//! Both follow from differentiating the nearest-point condition
//! (p - gamma(y*)) . gamma'(y*) = 0.

use super::curve::ComputationCurve;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlanarError {
    #[error("tube radius {r_tube} is not below half the curve gap {gap}")]
    TubeTooWide { r_tube: f64, gap: f64 },
    #[error("two curves share band {0}")]
    DuplicateBand(u32),
    #[error("tube radius and contraction must be positive")]
    NonPositiveParameter,
}

/// Planar vector field evaluated pointwise.
pub trait VectorField2 {
    fn eval(&self, x: f64, y: f64) -> [f64; 2];
}

/// Polynomial plateau cutoff with C^p contact at both ends: s(0) = 0,
/// s(1) = 1, derivatives 1..=p vanish at the ends.
#[derive(Debug, Clone)]
struct SmoothStep {
    p: u32,
    inv_beta: f64,
    // c_k = inv_beta * C(p,k) (-1)^k / (p+k+1)
    coeffs: Vec<f64>,
}

impl SmoothStep {
    fn new(p: u32) -> Self {
        let binom = |n: u64, k: u64| -> f64 {
            let mut acc = 1f64;
            for i in 0..k {
                acc = acc * (n - i) as f64 / (i + 1) as f64;
            }
            acc
        };
        // 1/B(p+1,p+1) = (2p+1)! / (p!)^2 = C(2p+1, p) * (p+1)!
        let inv_beta = binom(2 * p as u64 + 1, p as u64) * (p as f64 + 1.0);
        let coeffs = (0..=p)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                inv_beta * sign * binom(p as u64, k as u64) / (p + k + 1) as f64
            })
            .collect();
        SmoothStep { p, inv_beta, coeffs }
    }

    /// Evaluated from the nearer end so the alternating sum stays stable.
    fn value(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        if u <= 0.5 {
            self.half_sum(u)
        } else {
            1.0 - self.half_sum(1.0 - u)
        }
    }

    fn half_sum(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc * u.powi(self.p as i32 + 1)
    }

    fn deriv(&self, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        self.inv_beta * (u * (1.0 - u)).powi(self.p as i32)
    }
}

/// Nearest-point data of a position relative to one curve.
#[derive(Debug, Clone, Copy)]
pub struct TubeFrame {
    pub curve: usize,
    /// Parameter (height) of the nearest curve point.
    pub foot: f64,
    /// Signed normal offset.
    pub normal: f64,
    /// Unit tangent at the foot, oriented upward.
    pub tangent: [f64; 2],
    /// Unit normal (tangent rotated -90 degrees).
    pub nu: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct ScalarPotential {
    curves: Vec<ComputationCurve>,
    band_of: BTreeMap<u32, usize>,
    r_tube: f64,
    contraction: f64,
    cutoff: SmoothStep,
    reject_radius: f64,
}

/// Smallest wall gap over a set of curves.
pub fn curve_gap(curves: &[ComputationCurve]) -> f64 {
    curves
        .iter()
        .map(|c| c.wall_gap())
        .fold(f64::INFINITY, f64::min)
}

/// Builds the potential; `r_tube` must stay below half the gap between
/// curves and band walls so tubes never touch each other or the walls.
pub fn build_potential(
    curves: Vec<ComputationCurve>,
    r_tube: f64,
    contraction: f64,
) -> Result<ScalarPotential, PlanarError> {
    // negated forms so NaN parameters are rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(r_tube > 0.0) || !(contraction > 0.0) {
        return Err(PlanarError::NonPositiveParameter);
    }
    let gap = curve_gap(&curves);
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(r_tube < 0.5 * gap) {
        return Err(PlanarError::TubeTooWide { r_tube, gap });
    }
    let mut band_of = BTreeMap::new();
    let mut max_slope = 0f64;
    for (i, c) in curves.iter().enumerate() {
        if band_of.insert(c.band(), i).is_some() {
            return Err(PlanarError::DuplicateBand(c.band()));
        }
        max_slope = max_slope.max(c.max_slope());
    }
    // distance to the curve is at least |x - g(y)| / sqrt(1 + L^2)
    let reject_radius = r_tube * (1.0 + max_slope * max_slope).sqrt() * 1.0001;
    Ok(ScalarPotential {
        curves,
        band_of,
        r_tube,
        contraction,
        cutoff: SmoothStep::new(9),
        reject_radius,
    })
}

impl ScalarPotential {
    pub fn r_tube(&self) -> f64 {
        self.r_tube
    }

    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    pub fn curves(&self) -> &[ComputationCurve] {
        &self.curves
    }

    pub fn curve_for_band(&self, band: u32) -> Option<&ComputationCurve> {
        self.band_of.get(&band).map(|&i| &self.curves[i])
    }

    /// Solves the nearest-point condition E(q) = (x - g(q)) g'(q) + (y - q) = 0
    /// by safeguarded Newton iteration.
    fn project(&self, curve: &ComputationCurve, x: f64, y: f64) -> f64 {
        let e = |q: f64| (x - curve.x_at(q)) * curve.dx_at(q) + (y - q);
        let m = |q: f64| {
            let g1 = curve.dx_at(q);
            1.0 + g1 * g1 - (x - curve.x_at(q)) * curve.d2x_at(q)
        };
        // bracket the root; E decreases from +span to -span across it
        let mut span = 2.0 * self.reject_radius + 1e-6;
        let (mut lo, mut hi) = (y - span, y + span);
        for _ in 0..16 {
            if e(lo) > 0.0 && e(hi) < 0.0 {
                break;
            }
            span *= 2.0;
            lo = y - span;
            hi = y + span;
        }
        debug_assert!(e(lo) > 0.0 && e(hi) < 0.0, "projection bracket failed");
        let mut q = y;
        for _ in 0..100 {
            let eq = e(q);
            if eq == 0.0 {
                break;
            }
            if eq > 0.0 {
                lo = q;
            } else {
                hi = q;
            }
            let mq = m(q);
            let step = eq / mq;
            if step.abs() < 1e-15 * (1.0 + q.abs()) {
                break;
            }
            let next = q + step;
            q = if mq > 0.0 && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 * (1.0 + q.abs()) {
                break;
            }
        }
        q
    }

    /// Frame of the nearest curve point, when the position lies within the
    /// tube of its band's curve.
    pub fn frame(&self, x: f64, y: f64) -> Option<TubeFrame> {
        if x < 0.0 {
            return None;
        }
        let band = (x / 2.0).floor();
        if x - 2.0 * band > 1.0 || band > u32::MAX as f64 {
            return None;
        }
        let idx = *self.band_of.get(&(band as u32))?;
        let curve = &self.curves[idx];
        if (x - curve.x_at(y)).abs() > self.reject_radius {
            return None;
        }
        let foot = self.project(curve, x, y);
        let g1 = curve.dx_at(foot);
        let s = (1.0 + g1 * g1).sqrt();
        let nu = [1.0 / s, -g1 / s];
        let normal = (x - curve.x_at(foot)) * nu[0] + (y - foot) * nu[1];
        if normal.abs() >= self.r_tube {
            return None;
        }
        Some(TubeFrame {
            curve: idx,
            foot,
            normal,
            tangent: [g1 / s, 1.0 / s],
            nu,
        })
    }

    /// The potential value f(x, y).
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        match self.frame(x, y) {
            None => y,
            Some(fr) => {
                let w = self.cutoff_at(fr.normal).0;
                let d = (fr.foot - y) - 0.5 * self.contraction * fr.normal * fr.normal;
                y + w * d
            }
        }
    }

    /// The analytic gradient of [`potential`](Self::potential).
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let Some(fr) = self.frame(x, y) else {
            return [0.0, 1.0];
        };
        let curve = &self.curves[fr.curve];
        let (w, dw_dn) = self.cutoff_at(fr.normal);
        let g1 = curve.dx_at(fr.foot);
        let g2 = curve.d2x_at(fr.foot);
        let m = 1.0 + g1 * g1 - (x - curve.x_at(fr.foot)) * g2;
        let grad_foot = [g1 / m, 1.0 / m];
        let c = self.contraction;
        let d = (fr.foot - y) - 0.5 * c * fr.normal * fr.normal;
        let mut out = [0.0, 1.0];
        for axis in 0..2 {
            let e_y = if axis == 1 { 1.0 } else { 0.0 };
            let grad_d = grad_foot[axis] - e_y - c * fr.normal * fr.nu[axis];
            out[axis] += dw_dn * d * fr.nu[axis] + w * grad_d;
        }
        out
    }

    /// (W, dW/dn) at signed offset n: plateau 1 on the inner half-tube,
    /// smooth decay across the outer half.
    fn cutoff_at(&self, n: f64) -> (f64, f64) {
        let r_in = 0.5 * self.r_tube;
        let width = self.r_tube - r_in;
        let a = n.abs();
        if a <= r_in {
            return (1.0, 0.0);
        }
        if a >= self.r_tube {
            return (0.0, 0.0);
        }
        let u = (self.r_tube - a) / width;
        let w = self.cutoff.value(u);
        let dw = -self.cutoff.deriv(u) / width * n.signum();
        (w, dw)
    }
}

impl VectorField2 for ScalarPotential {
    fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        self.gradient(x, y)
    }
}

impl<F: VectorField2 + ?Sized> VectorField2 for &F {
    fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        (**self).eval(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Tape;
    use crate::planar::curve::build_curve;

    fn toggler_potential() -> ScalarPotential {
        let tm = crate::samples::toggler();
        let curve = build_curve(&tm, &tm.start_configuration(Tape::from_pairs(&[(0, 1)])), 0, 12);
        build_potential(vec![curve], 0.03, 10.0).unwrap()
    }

    #[test]
    fn smoothstep_endpoints_and_monotonicity() {
        let s = SmoothStep::new(9);
        assert_eq!(s.value(0.0), 0.0);
        assert_eq!(s.value(1.0), 1.0);
        assert!((s.value(0.5) - 0.5).abs() < 1e-14);
        let mut prev = 0.0;
        for i in 1..=100 {
            let v = s.value(i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
        // derivative matches a central difference away from flat ends
        let h = 1e-5;
        for &u in &[0.2, 0.4, 0.5, 0.7] {
            let fd = (s.value(u + h) - s.value(u - h)) / (2.0 * h);
            assert!((fd - s.deriv(u)).abs() < 1e-5 * (1.0 + s.deriv(u).abs()));
        }
    }

    #[test]
    fn far_from_tube_field_is_unit_drift_exactly() {
        let pot = toggler_potential();
        for &(x, y) in &[(0.9, 3.3), (1.5, 0.2), (7.25, 1.0), (0.05, 5.5)] {
            assert_eq!(pot.gradient(x, y), [0.0, 1.0]);
            assert_eq!(pot.potential(x, y), y);
        }
    }

    #[test]
    fn on_curve_gradient_is_parallel_to_tangent() {
        let pot = toggler_potential();
        let curve = &pot.curves()[0];
        for i in 0..60 {
            let y = 0.05 + i as f64 * 0.2;
            let x = curve.x_at(y);
            let g = pot.gradient(x, y);
            let fr = pot.frame(x, y).unwrap();
            let cross = g[0] * fr.tangent[1] - g[1] * fr.tangent[0];
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            assert!((cross / norm).abs() <= 1e-8, "angular deviation at y={y}");
        }
    }

    #[test]
    fn normal_component_is_minus_c_n_in_inner_tube() {
        let pot = toggler_potential();
        let curve = &pot.curves()[0];
        for i in 0..40 {
            let t = 0.1 + i as f64 * 0.23;
            let g1 = curve.dx_at(t);
            let s = (1.0 + g1 * g1).sqrt();
            let nu = [1.0 / s, -g1 / s];
            for &n in &[-0.014, -0.006, 0.004, 0.012] {
                let x = curve.x_at(t) + n * nu[0];
                let y = t + n * nu[1];
                let fr = pot.frame(x, y).unwrap();
                assert!((fr.foot - t).abs() < 1e-10);
                assert!((fr.normal - n).abs() < 1e-10);
                let g = pot.gradient(x, y);
                let normal_comp = g[0] * fr.nu[0] + g[1] * fr.nu[1];
                assert!(
                    (normal_comp + pot.contraction() * n).abs() <= 1e-8,
                    "normal rate at t={t}, n={n}: {normal_comp}"
                );
            }
        }
    }

    #[test]
    fn potential_in_inner_tube_is_foot_minus_quadratic() {
        let pot = toggler_potential();
        let curve = &pot.curves()[0];
        let t = 2.3;
        let g1 = curve.dx_at(t);
        let s = (1.0 + g1 * g1).sqrt();
        let n = 0.01;
        let x = curve.x_at(t) + n / s;
        let y = t - n * g1 / s;
        let f = pot.potential(x, y);
        assert!((f - (t - 0.5 * pot.contraction() * n * n)).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences_spot_checks() {
        let pot = toggler_potential();
        let h = 1e-5;
        for &(x, y) in &[(0.17, 1.4), (0.165, 2.2), (0.51, 0.7), (0.2, 3.05)] {
            let g = pot.gradient(x, y);
            let fdx = (pot.potential(x + h, y) - pot.potential(x - h, y)) / (2.0 * h);
            let fdy = (pot.potential(x, y + h) - pot.potential(x, y - h)) / (2.0 * h);
            assert!((g[0] - fdx).abs() < 2e-4, "df/dx at ({x},{y}): {} vs {fdx}", g[0]);
            assert!((g[1] - fdy).abs() < 2e-4, "df/dy at ({x},{y}): {} vs {fdy}", g[1]);
        }
    }

    #[test]
    fn tube_too_wide_is_rejected() {
        let tm = crate::samples::self_loop();
        let curve = build_curve(&tm, &tm.start_configuration(Tape::blank()), 0, 5);
        // gap is 0.5, so half-gap is 0.25
        let err = build_potential(vec![curve], 0.3, 10.0).unwrap_err();
        assert!(matches!(err, PlanarError::TubeTooWide { .. }));
    }

    #[test]
    fn duplicate_bands_are_rejected() {
        let tm = crate::samples::self_loop();
        let c1 = build_curve(&tm, &tm.start_configuration(Tape::blank()), 0, 5);
        let c2 = build_curve(&tm, &tm.start_configuration(Tape::from_pairs(&[(0, 1)])), 0, 5);
        let err = build_potential(vec![c1, c2], 0.01, 10.0).unwrap_err();
        assert_eq!(err, PlanarError::DuplicateBand(0));
    }
}
