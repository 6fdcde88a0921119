//! Power-series solutions of curl u = lambda u with planar gradient data.
//!
//! Reading the three curl components as a z-evolution gives a recursion for
//! the z-power coefficients, starting from u|_{z=0} = grad F with F a
//! polynomial. Truncations are certified by exact residual identities, not
//! numerically.

use super::poly::{rational_to_f64, BivariatePoly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BeltramiError {
    #[error("datum is not a planar gradient; curl witness {0}")]
    NotAGradient(BivariatePoly),
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("truncation order must be at least 1")]
    OrderTooSmall,
}

/// Cauchy datum on the plane z = 0: a potential and the eigenvalue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauchyDatum {
    potential: BivariatePoly,
    lambda: BigRational,
}

impl CauchyDatum {
    pub fn new(potential: BivariatePoly, lambda: BigRational) -> Result<Self, BeltramiError> {
        if lambda.is_zero() {
            return Err(BeltramiError::ZeroLambda);
        }
        Ok(CauchyDatum { potential, lambda })
    }

    pub fn potential(&self) -> &BivariatePoly {
        &self.potential
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }
}

/// Checks that (v1, v2) is a planar gradient and recovers its potential.
///
/// The necessary condition is dv1/dy = dv2/dx; on failure the witness is
/// the scalar curl dv2/dx - dv1/dy. The recovered potential has zero
/// constant term.
pub fn check_compatibility(
    v1: &BivariatePoly,
    v2: &BivariatePoly,
) -> Result<BivariatePoly, BeltramiError> {
    let witness = &v2.dx() - &v1.dy();
    if !witness.is_zero() {
        return Err(BeltramiError::NotAGradient(witness));
    }
    let fx = v1.integrate_x();
    // the x-free remainder of v2 integrates to the y-only part
    let remainder = (v2 - &fx.dy()).x_free_part();
    Ok(&fx + &remainder.integrate_y())
}

/// Truncated z-power series of a vector field: component c is
/// sum_k coeff[c][k] (x,y) z^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorSeries {
    coeffs: [Vec<BivariatePoly>; 3],
    lambda: BigRational,
    order: usize,
}

impl VectorSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn coefficient(&self, component: usize, k: usize) -> &BivariatePoly {
        &self.coeffs[component][k]
    }

    /// Numeric evaluation by Horner in z.
    pub fn evaluate(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, coeffs) in self.coeffs.iter().enumerate() {
            let mut acc = 0.0;
            for poly in coeffs.iter().rev() {
                acc = acc * z + poly.eval_f64(x, y);
            }
            out[c] = acc;
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate_exact(
        &self,
        x: &BigRational,
        y: &BigRational,
        z: &BigRational,
    ) -> [BigRational; 3] {
        let mut out = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        for (c, coeffs) in self.coeffs.iter().enumerate() {
            let mut acc = BigRational::zero();
            for poly in coeffs.iter().rev() {
                acc = acc * z + poly.eval_exact(x, y);
            }
            out[c] = acc;
        }
        out
    }

    /// Plain-text dump: one line per (order, component, monomial).
    pub fn render_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# vector series: order {}, lambda {}",
            self.order, self.lambda
        );
        let _ = writeln!(out, "# k component monomial coefficient");
        for k in 0..=self.order {
            for (c, name) in ["u1", "u2", "u3"].iter().enumerate() {
                for (&(i, j), coeff) in self.coeffs[c][k].terms() {
                    let _ = writeln!(out, "{k} {name} {} {coeff}", super::poly::monomial_str(i, j));
                }
            }
        }
        out
    }
}

/// Solves the Cauchy problem by the z-power recursion up to order K.
///
/// With u3^(k) = (dx u2^(k) - dy u1^(k)) / lambda, the first two curl
/// components give
///   (k+1) u1^(k+1) = lambda u2^(k) + dx u3^(k)
///   (k+1) u2^(k+1) = dy u3^(k) - lambda u1^(k)
/// which determines the truncation uniquely from u^(0) = grad F.
pub fn extend(datum: &CauchyDatum, order: usize) -> Result<VectorSeries, BeltramiError> {
    if order < 1 {
        return Err(BeltramiError::OrderTooSmall);
    }
    let lambda = datum.lambda.clone();
    let inv_lambda = BigRational::new(
        lambda.denom().clone(),
        lambda.numer().clone(),
    );
    let mut u1 = vec![datum.potential.dx()];
    let mut u2 = vec![datum.potential.dy()];
    let mut u3: Vec<BivariatePoly> = Vec::new();
    for k in 0..=order {
        let t3 = (&u2[k].dx() - &u1[k].dy()).scale(&inv_lambda);
        if k < order {
            let inv_k1 = BigRational::new(BigInt::from(1), BigInt::from(k as i64 + 1));
            u1.push((&u2[k].scale(&lambda) + &t3.dx()).scale(&inv_k1));
            u2.push((&t3.dy() - &u1[k].scale(&lambda)).scale(&inv_k1));
        }
        u3.push(t3);
    }
    Ok(VectorSeries {
        coeffs: [u1, u2, u3],
        lambda,
        order,
    })
}

/// Exact residual certificate for a truncated series.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Residual polynomials of curl u - lambda u, per component, orders 0..K-1.
    pub curl: [Vec<BivariatePoly>; 3],
    /// Residual polynomials of div u, orders 0..K-1.
    pub divergence: Vec<BivariatePoly>,
    /// u|_{z=0} - grad F, both components.
    pub datum_mismatch: (BivariatePoly, BivariatePoly),
    /// u3 at z = 0; zero exactly when the datum is tangent.
    pub tangency: BivariatePoly,
}

impl ResidualReport {
    /// Largest order through which every curl and divergence residual
    /// vanishes, or None when even order 0 fails.
    pub fn identities_hold_through(&self) -> Option<usize> {
        let upto = self.divergence.len();
        let mut through = None;
        for k in 0..upto {
            let ok = self.curl.iter().all(|c| c[k].is_zero()) && self.divergence[k].is_zero();
            if !ok {
                break;
            }
            through = Some(k);
        }
        through
    }

    pub fn passes(&self, expected_order: usize) -> bool {
        self.identities_hold_through() == Some(expected_order)
            && self.datum_mismatch.0.is_zero()
            && self.datum_mismatch.1.is_zero()
            && self.tangency.is_zero()
    }
}

/// Computes the residuals of curl u - lambda u and div u through order K-1,
/// plus the datum mismatch at z = 0. All identities are polynomial-exact.
pub fn residual(series: &VectorSeries, datum: &CauchyDatum) -> ResidualReport {
    let k_max = series.order;
    let u1 = &series.coeffs[0];
    let u2 = &series.coeffs[1];
    let u3 = &series.coeffs[2];
    let lambda = &series.lambda;
    let mut curl: [Vec<BivariatePoly>; 3] = Default::default();
    let mut divergence = Vec::new();
    for k in 0..k_max {
        let k1 = BigRational::from(BigInt::from(k as i64 + 1));
        curl[0].push(&(&u3[k].dy() - &u2[k + 1].scale(&k1)) - &u1[k].scale(lambda));
        curl[1].push(&(&u1[k + 1].scale(&k1) - &u3[k].dx()) - &u2[k].scale(lambda));
        curl[2].push(&(&u2[k].dx() - &u1[k].dy()) - &u3[k].scale(lambda));
        divergence.push(&(&u1[k].dx() + &u2[k].dy()) + &u3[k + 1].scale(&k1));
    }
    ResidualReport {
        curl,
        divergence,
        datum_mismatch: (
            &u1[0] - &datum.potential.dx(),
            &u2[0] - &datum.potential.dy(),
        ),
        tangency: u3[0].clone(),
    }
}

/// CSV of |u| over a square grid at fixed z, for plotting and seeding
/// streamlines.
pub fn evaluation_grid_csv(series: &VectorSeries, half_width: f64, n: usize, z: f64) -> String {
    let mut out = String::from("x,y,z,u1,u2,u3,norm\n");
    for iy in 0..n {
        for ix in 0..n {
            let x = -half_width + 2.0 * half_width * ix as f64 / (n - 1) as f64;
            let y = -half_width + 2.0 * half_width * iy as f64 / (n - 1) as f64;
            let u = series.evaluate(x, y, z);
            let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            let _ = writeln!(out, "{x},{y},{z},{},{},{},{norm}", u[0], u[1], u[2]);
        }
    }
    out
}

/// |u(x,y,z) - (cos(lambda z), -sin(lambda z), 0)| for the datum F = x.
pub fn linear_datum_closed_form_error(series: &VectorSeries, z: f64) -> f64 {
    let lambda = rational_to_f64(&series.lambda);
    let u = series.evaluate(0.3, -0.7, z);
    let expect = [(lambda * z).cos(), -(lambda * z).sin(), 0.0];
    u.iter()
        .zip(expect)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::poly::parse_poly;
    use super::*;
    use num_traits::One;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn compatibility_of_constant_field() {
        let f = check_compatibility(
            &BivariatePoly::constant(BigRational::one()),
            &BivariatePoly::zero(),
        )
        .unwrap();
        assert_eq!(f, parse_poly("x").unwrap());
    }

    #[test]
    fn compatibility_rejects_rotation_field() {
        let v1 = parse_poly("y").unwrap();
        let v2 = parse_poly("-x").unwrap();
        match check_compatibility(&v1, &v2) {
            Err(BeltramiError::NotAGradient(w)) => {
                assert_eq!(w, BivariatePoly::constant(ratio(-2, 1)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compatibility_recovers_radial_potential() {
        let f = check_compatibility(&parse_poly("x").unwrap(), &parse_poly("y").unwrap()).unwrap();
        assert_eq!(f, parse_poly("1/2*x^2 + 1/2*y^2").unwrap());
    }

    #[test]
    fn extend_zero_potential_is_zero() {
        let datum = CauchyDatum::new(BivariatePoly::zero(), ratio(3, 1)).unwrap();
        let series = extend(&datum, 8).unwrap();
        for k in 0..=8 {
            for c in 0..3 {
                assert!(series.coefficient(c, k).is_zero());
            }
        }
    }

    #[test]
    fn extend_linear_potential_matches_trigonometric_coefficients() {
        // closed form (cos lz, -sin lz, 0): u1^(k) = cos coefficients,
        // u2^(k) = -sin coefficients, derived here from scratch
        let lambda = ratio(2, 1);
        let datum = CauchyDatum::new(parse_poly("x").unwrap(), lambda.clone()).unwrap();
        let series = extend(&datum, 20).unwrap();
        let mut factorial = BigRational::one();
        let mut lambda_pow = BigRational::one();
        for k in 0..=20usize {
            if k > 0 {
                factorial *= BigRational::from(BigInt::from(k as i64));
                lambda_pow *= &lambda;
            }
            let magnitude = &lambda_pow / &factorial;
            let (expect1, expect2) = match k % 4 {
                0 => (magnitude.clone(), BigRational::zero()),
                1 => (BigRational::zero(), -magnitude.clone()),
                2 => (-magnitude.clone(), BigRational::zero()),
                _ => (BigRational::zero(), magnitude.clone()),
            };
            assert_eq!(series.coefficient(0, k), &BivariatePoly::constant(expect1));
            assert_eq!(series.coefficient(1, k), &BivariatePoly::constant(expect2));
            assert!(series.coefficient(2, k).is_zero());
        }
    }

    #[test]
    fn extend_radial_potential_first_order_by_hand() {
        let datum = CauchyDatum::new(
            parse_poly("1/2*x^2 + 1/2*y^2").unwrap(),
            BigRational::one(),
        )
        .unwrap();
        let series = extend(&datum, 2).unwrap();
        assert_eq!(series.coefficient(0, 1), &parse_poly("y").unwrap());
        assert_eq!(series.coefficient(1, 1), &parse_poly("-x").unwrap());
        assert_eq!(
            series.coefficient(2, 1),
            &BivariatePoly::constant(ratio(-2, 1))
        );
        assert!(series.coefficient(2, 0).is_zero());
    }

    #[test]
    fn residuals_vanish_through_order_k_minus_one() {
        let datum = CauchyDatum::new(parse_poly("x").unwrap(), ratio(2, 1)).unwrap();
        let series = extend(&datum, 10).unwrap();
        let report = residual(&series, &datum);
        assert!(report.passes(9));
    }

    #[test]
    fn truncation_leaves_nonzero_order_k_residual() {
        let datum = CauchyDatum::new(parse_poly("x").unwrap(), ratio(2, 1)).unwrap();
        let series = extend(&datum, 6).unwrap();
        // at the truncation order itself the z-derivative term is gone, so
        // the first curl component keeps the uncancelled -lambda u1^(6)
        let order_k_residual =
            &series.coefficient(2, 6).dy() - &series.coefficient(0, 6).scale(series.lambda());
        assert!(!order_k_residual.is_zero());
    }

    #[test]
    fn evaluate_at_zero_matches_gradient_exactly() {
        let datum = CauchyDatum::new(parse_poly("x^3 - 3*x*y^2").unwrap(), ratio(-1, 2)).unwrap();
        let series = extend(&datum, 6).unwrap();
        let x = ratio(4, 7);
        let y = ratio(-2, 3);
        let u = series.evaluate_exact(&x, &y, &BigRational::zero());
        assert_eq!(u[0], datum.potential().dx().eval_exact(&x, &y));
        assert_eq!(u[1], datum.potential().dy().eval_exact(&x, &y));
        assert!(u[2].is_zero());
    }

    #[test]
    fn linear_datum_tracks_closed_form_numerically() {
        let datum = CauchyDatum::new(parse_poly("x").unwrap(), BigRational::one()).unwrap();
        let series = extend(&datum, 20).unwrap();
        let z = std::f64::consts::FRAC_PI_4;
        let u = series.evaluate(0.0, 0.0, z);
        assert!((u[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((u[1] + 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(u[2], 0.0);
    }

    #[test]
    fn degree_growth_is_bounded() {
        let datum = CauchyDatum::new(parse_poly("x^3 - 3*x*y^2").unwrap(), ratio(1, 1)).unwrap();
        let series = extend(&datum, 15).unwrap();
        let base = datum.potential().total_degree().unwrap();
        for k in 0..=15usize {
            for c in 0..3 {
                if let Some(d) = series.coefficient(c, k).total_degree() {
                    assert!(d <= base + k as u32);
                }
            }
        }
    }

    #[test]
    fn rejects_zero_lambda_and_zero_order() {
        assert_eq!(
            CauchyDatum::new(BivariatePoly::zero(), BigRational::zero()).unwrap_err(),
            BeltramiError::ZeroLambda
        );
        let datum = CauchyDatum::new(parse_poly("x").unwrap(), ratio(1, 1)).unwrap();
        assert_eq!(extend(&datum, 0).unwrap_err(), BeltramiError::OrderTooSmall);
    }
}
