//! Adaptive Dormand-Prince 5(4) integration with dense output and
//! integer-height crossing events.

use super::field::VectorField2;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
}

/// One recorded upward crossing of an integer height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub height: u32,
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Accepted integration nodes (t, x, y).
    pub points: Vec<(f64, f64, f64)>,
    pub crossings: Vec<Crossing>,
}

impl Trajectory {
    /// The recorded crossing of a given height, if any.
    pub fn crossing_at(&self, height: u32) -> Option<&Crossing> {
        self.crossings.iter().find(|c| c.height == height)
    }

    pub fn csv(&self, band: u32) -> String {
        let mut out = String::from("t,x,y,band,crossing\n");
        let mut ci = 0usize;
        for &(t, x, y) in &self.points {
            while ci < self.crossings.len() && self.crossings[ci].t <= t {
                let c = &self.crossings[ci];
                let _ = writeln!(out, "{},{},{},{band},{}", c.t, c.x, c.height as f64, c.height);
                ci += 1;
            }
            let _ = writeln!(out, "{t},{x},{y},{band},");
        }
        for c in &self.crossings[ci..] {
            let _ = writeln!(out, "{},{},{},{band},{}", c.t, c.x, c.height as f64, c.height);
        }
        out
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense-output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type V2 = [f64; 2];

fn axpy(y: V2, h: f64, terms: &[(f64, V2)]) -> V2 {
    let mut out = y;
    for &(c, v) in terms {
        out[0] += h * c * v[0];
        out[1] += h * c * v[1];
    }
    out
}

struct StepOut {
    ynew: V2,
    /// Derivative at the step end (FSAL stage).
    k7: V2,
    stages: [V2; 6],
}

fn dopri5_step(f: &impl Fn(V2) -> V2, y: V2, k1: V2, h: f64) -> StepOut {
    let k2 = f(axpy(y, h, &[(A21, k1)]));
    let k3 = f(axpy(y, h, &[(A31, k1), (A32, k2)]));
    let k4 = f(axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = f(axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
    let k6 = f(axpy(
        y,
        h,
        &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
    ));
    let ynew = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = f(ynew);
    StepOut {
        ynew,
        k7,
        stages: [k1, k2, k3, k4, k5, k6],
    }
}

/// Continuous extension of one accepted step.
struct Dense {
    r1: V2,
    r2: V2,
    r3: V2,
    r4: V2,
    r5: V2,
}

impl Dense {
    fn at(&self, theta: f64) -> V2 {
        let s1 = 1.0 - theta;
        std::array::from_fn(|i| {
            self.r1[i]
                + theta
                    * (self.r2[i] + s1 * (self.r3[i] + theta * (self.r4[i] + s1 * self.r5[i])))
        })
    }
}

/// Integrates dp/dt = field(p) from `p0` until height `k_max` is crossed or
/// `t_max` elapses, with mixed tolerance `tol` and recording every upward
/// integer-height crossing in (0, k_max].
pub fn integrate<F: VectorField2>(
    field: &F,
    p0: V2,
    t_max: f64,
    k_max: u32,
    tol: f64,
) -> Result<Trajectory, IntegrateError> {
    let f = |p: V2| field.eval(p[0], p[1]);
    let mut t = 0.0;
    let mut y = p0;
    let mut k1 = f(y);
    let mut h: f64 = 1e-4;
    const H_MAX: f64 = 0.05;
    const H_MIN: f64 = 1e-12;
    let mut points = vec![(t, y[0], y[1])];
    let mut crossings = Vec::new();
    while t < t_max && y[1] < k_max as f64 {
        h = h.min(H_MAX).min(t_max - t);
        if h < H_MIN {
            return Err(IntegrateError::StepFailure { t, h });
        }
        let out = dopri5_step(&f, y, k1, h);
        let (ynew, k7) = (out.ynew, out.k7);
        let [_, _, k3, k4, k5, k6] = out.stages;
        let mut err = 0.0f64;
        for i in 0..2 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol + tol * y[i].abs().max(ynew[i].abs());
            err += (e / scale) * (e / scale);
        }
        err = (err / 2.0).sqrt();
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        // accepted: build the continuous extension and scan for crossings
        let ydiff = [ynew[0] - y[0], ynew[1] - y[1]];
        let bspl = [h * k1[0] - ydiff[0], h * k1[1] - ydiff[1]];
        let dense = Dense {
            r1: y,
            r2: ydiff,
            r3: bspl,
            r4: [ydiff[0] - h * k7[0] - bspl[0], ydiff[1] - h * k7[1] - bspl[1]],
            r5: [
                h * (D1 * k1[0] + D3 * k3[0] + D4 * k4[0] + D5 * k5[0] + D6 * k6[0] + D7 * k7[0]),
                h * (D1 * k1[1] + D3 * k3[1] + D4 * k4[1] + D5 * k5[1] + D6 * k6[1] + D7 * k7[1]),
            ],
        };
        if ynew[1] > y[1] {
            let first = y[1].floor() as i64 + 1;
            let last = ynew[1].floor() as i64;
            for k in first..=last.min(k_max as i64) {
                if k < 1 {
                    continue;
                }
                let target = k as f64;
                // locate on the dense output, then polish with fresh
                // sub-steps so the abscissa carries step-local accuracy
                // rather than interpolant accuracy
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if dense.at(mid)[1] < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let mut theta = 0.5 * (lo + hi);
                let mut x_cross = dense.at(theta)[0];
                for _ in 0..4 {
                    let sub = dopri5_step(&f, y, k1, theta * h);
                    x_cross = sub.ynew[0];
                    let residual = sub.ynew[1] - target;
                    if residual.abs() < 1e-13 || sub.k7[1] <= 0.0 {
                        break;
                    }
                    theta = (theta - residual / (h * sub.k7[1])).clamp(0.0, 1.0);
                }
                crossings.push(Crossing {
                    height: k as u32,
                    t: t + theta * h,
                    x: x_cross,
                });
            }
        }
        t += h;
        y = ynew;
        k1 = k7;
        points.push((t, y[0], y[1]));
        h *= (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
    }
    Ok(Trajectory { points, crossings })
}
