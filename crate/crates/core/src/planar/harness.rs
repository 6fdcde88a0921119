//! End-to-end flow checks: does the trajectory through an input's start
//! point visit the coding rectangles of exactly the machine's
//! configuration sequence, and does it enter a halt rectangle if and only
//! if the machine halts within the height budget?

use super::curve::{build_curve, ComputationCurve};
use super::encoding::{initial_point, interval_of_phi, phi_of, PlanarEncoding};
use super::field::{build_potential, curve_gap, PlanarError, ScalarPotential};
use super::integrate::{integrate, IntegrateError, Trajectory};
use super::perturb::{perturb, PerturbationSpec};
use crate::machine::{Configuration, State, TuringMachine};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("coding intervals of the materialized configurations overlap")]
    IntervalsOverlap,
}

#[derive(Debug, Clone)]
pub struct FlowParams {
    pub encoding: PlanarEncoding,
    pub contraction: f64,
    /// Tube radius; `None` picks a quarter of the curve gap.
    pub r_tube: Option<f64>,
    pub tolerance: f64,
    pub jobs: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            encoding: PlanarEncoding::default(),
            contraction: 10.0,
            r_tube: None,
            tolerance: 1e-9,
            jobs: 1,
        }
    }
}

/// An input configuration assigned to a band of the plane.
#[derive(Debug, Clone)]
pub struct FlowInput {
    pub band: u32,
    pub config: Configuration,
}

/// Check outcome at one integer height.
#[derive(Debug, Clone)]
pub struct VisitCheck {
    pub height: u32,
    pub expected_state: State,
    pub expected_x: BigRational,
    pub crossing_x: Option<f64>,
    /// Crossing abscissa lies strictly inside the open coding interval.
    pub in_interval: bool,
    /// Crossing abscissa within 1e-6 of the exact encoding.
    pub within_tolerance: bool,
    pub expects_halt: bool,
}

#[derive(Debug, Clone)]
pub struct InputReport {
    pub band: u32,
    pub visits: Vec<VisitCheck>,
    pub halt_expected: bool,
    pub halt_entered: bool,
    /// First height where the visit check failed, if any.
    pub divergence_height: Option<u32>,
}

impl InputReport {
    pub fn visit_order_ok(&self) -> bool {
        self.divergence_height.is_none()
    }

    pub fn pass(&self) -> bool {
        self.visit_order_ok()
            && self.visits.iter().all(|v| v.within_tolerance)
            && self.halt_expected == self.halt_entered
    }
}

#[derive(Debug)]
pub struct FlowReport {
    pub height: u32,
    pub delta: f64,
    pub seeds: Vec<u64>,
    pub r_tube: f64,
    pub contraction: f64,
    pub baseline: Vec<InputReport>,
    pub perturbed: Vec<(u64, Vec<InputReport>)>,
    /// Smallest coding-interval half-width among all visited configurations.
    pub min_interval_halfwidth: BigRational,
    /// Admissible perturbation scale implied by the narrowest visited
    /// interval: contraction rate times that half-width.
    pub delta_star: f64,
    pub baseline_trajectories: Vec<Trajectory>,
}

impl FlowReport {
    pub fn pass(&self) -> bool {
        self.baseline.iter().all(InputReport::pass)
            && self
                .perturbed
                .iter()
                .all(|(_, reports)| reports.iter().all(InputReport::pass))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# flow report");
        let _ = writeln!(
            out,
            "# height={} delta={} seeds={:?} r_tube={} contraction={}",
            self.height, self.delta, self.seeds, self.r_tube, self.contraction
        );
        let _ = writeln!(
            out,
            "# min_interval_halfwidth={} delta_star={}",
            self.min_interval_halfwidth, self.delta_star
        );
        let render_inputs = |label: &str, reports: &[InputReport], out: &mut String| {
            for r in reports {
                let _ = writeln!(
                    out,
                    "{label} band={} visits_ok={} halt_expected={} halt_entered={} diverged_at={} => {}",
                    r.band,
                    r.visit_order_ok(),
                    r.halt_expected,
                    r.halt_entered,
                    r.divergence_height
                        .map(|h| h.to_string())
                        .unwrap_or_else(|| "-".into()),
                    if r.pass() { "PASS" } else { "FAIL" }
                );
            }
        };
        render_inputs("baseline", &self.baseline, &mut out);
        for (seed, reports) in &self.perturbed {
            render_inputs(&format!("seed={seed}"), reports, &mut out);
        }
        let _ = writeln!(out, "overall: {}", if self.pass() { "PASS" } else { "FAIL" });
        out
    }
}

fn check_trajectory(
    curve: &ComputationCurve,
    traj: &Trajectory,
    height: u32,
    halt_state: State,
    tolerance_num: &BigRational,
) -> InputReport {
    let band = curve.band();
    let mut visits = Vec::new();
    let mut divergence = None;
    let mut halt_entered = false;
    for k in 1..=height {
        let expected = curve.expected_configuration(k as usize);
        let expected_x = &curve.knots_exact()[k as usize];
        let (phi_lo, phi_hi) = interval_of_phi(&phi_of(expected));
        let base = BigRational::from_integer((2 * band as i64).into());
        let (lo, hi) = (&base + phi_lo, &base + phi_hi);
        let crossing = traj.crossing_at(k);
        let (in_interval, within_tolerance) = match crossing {
            None => (false, false),
            Some(c) => {
                let x = BigRational::from_float(c.x).expect("finite crossing abscissa");
                (
                    lo < x && x < hi,
                    (&x - expected_x).abs() <= *tolerance_num,
                )
            }
        };
        if expected.state == halt_state && in_interval {
            halt_entered = true;
        }
        if !(in_interval && within_tolerance) && divergence.is_none() {
            divergence = Some(k);
        }
        visits.push(VisitCheck {
            height: k,
            expected_state: expected.state,
            expected_x: expected_x.clone(),
            crossing_x: crossing.map(|c| c.x),
            in_interval,
            within_tolerance,
            expects_halt: expected.state == halt_state,
        });
    }
    InputReport {
        band,
        visits,
        halt_expected: curve.halted_at().map(|s| s <= height as usize).unwrap_or(false),
        halt_entered,
        divergence_height: divergence,
    }
}

#[allow(clippy::too_many_arguments)]
fn integrate_inputs(
    potential: &ScalarPotential,
    starts: &[[f64; 2]],
    t_max: f64,
    height: u32,
    tol: f64,
    delta: f64,
    seed: Option<u64>,
    jobs: usize,
) -> Result<Vec<Trajectory>, IntegrateError> {
    let run_one = |p0: &[f64; 2]| match seed {
        None => integrate(potential, *p0, t_max, height, tol),
        Some(seed) => {
            let field = perturb(potential, PerturbationSpec { delta, seed });
            integrate(&field, *p0, t_max, height, tol)
        }
    };
    if jobs <= 1 || starts.len() <= 1 {
        return starts.iter().map(run_one).collect();
    }
    let mut results: Vec<Option<Result<Trajectory, IntegrateError>>> =
        (0..starts.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (chunk_starts, chunk_results) in starts
            .chunks(starts.len().div_ceil(jobs))
            .zip(results.chunks_mut(starts.len().div_ceil(jobs)))
        {
            scope.spawn(move || {
                for (p0, slot) in chunk_starts.iter().zip(chunk_results.iter_mut()) {
                    *slot = Some(run_one(p0));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("all chunks processed"))
        .collect()
}

/// Runs the full fidelity check for one machine over a set of inputs.
///
/// For each input, the trajectory from its start point is integrated up to
/// `height` for the unperturbed field and once per seed with perturbation
/// scale `delta`; every integer-height crossing is matched exactly (in
/// rational arithmetic) against the coding interval of the configuration
/// the machine reaches at that step.
pub fn halting_flow_check(
    tm: &TuringMachine,
    inputs: &[FlowInput],
    height: u32,
    delta: f64,
    seeds: &[u64],
    params: &FlowParams,
) -> Result<FlowReport, FlowError> {
    let curves: Vec<ComputationCurve> = inputs
        .iter()
        .map(|inp| build_curve(tm, &inp.config, inp.band, height as usize))
        .collect();
    let all_configs: Vec<Configuration> = curves
        .iter()
        .flat_map(|c| c.orbit().iter().cloned())
        .collect();
    let mut unique = all_configs.clone();
    unique.sort_by_key(|c| format!("{}|{}", c.state, c.tape));
    unique.dedup();
    if params.encoding.check_disjoint(unique.iter()).is_some() {
        return Err(FlowError::IntervalsOverlap);
    }
    let min_halfwidth = unique
        .iter()
        .map(|c| {
            let phi = phi_of(c);
            let (lo, hi) = interval_of_phi(&phi);
            (hi - lo) / BigRational::from_integer(2.into())
        })
        .min()
        .expect("at least one configuration");
    let r_tube = params
        .r_tube
        .unwrap_or_else(|| 0.25 * curve_gap(&curves));
    let potential = build_potential(curves, r_tube, params.contraction)?;
    let starts: Vec<[f64; 2]> = inputs
        .iter()
        .map(|inp| {
            let (x, _) = initial_point(inp.band, &inp.config);
            [x.to_f64().expect("start abscissa fits in f64"), 0.0]
        })
        .collect();
    let t_max = 2.0 * height as f64 + 10.0;
    let tolerance_num = BigRational::new(1.into(), 1_000_000.into());
    let halt = tm.halt_state();
    let assess = |trajs: &[Trajectory]| -> Vec<InputReport> {
        trajs
            .iter()
            .zip(potential.curves())
            .map(|(traj, curve)| check_trajectory(curve, traj, height, halt, &tolerance_num))
            .collect()
    };
    let baseline_trajectories = integrate_inputs(
        &potential,
        &starts,
        t_max,
        height,
        params.tolerance,
        0.0,
        None,
        params.jobs,
    )?;
    let baseline = assess(&baseline_trajectories);
    let mut perturbed = Vec::new();
    for &seed in seeds {
        let trajs = integrate_inputs(
            &potential,
            &starts,
            t_max,
            height,
            params.tolerance,
            delta,
            Some(seed),
            params.jobs,
        )?;
        perturbed.push((seed, assess(&trajs)));
    }
    let delta_star = params.contraction * min_halfwidth.to_f64().unwrap_or(0.0);
    Ok(FlowReport {
        height,
        delta,
        seeds: seeds.to_vec(),
        r_tube,
        contraction: params.contraction,
        baseline,
        perturbed,
        min_interval_halfwidth: min_halfwidth,
        delta_star,
        baseline_trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Tape;

    fn standard_inputs(first_band: u32) -> Vec<FlowInput> {
        let tapes = [
            Tape::blank(),
            Tape::from_pairs(&[(0, 1)]),
            Tape::from_pairs(&[(-1, 1)]),
        ];
        tapes
            .iter()
            .enumerate()
            .map(|(i, t)| FlowInput {
                band: first_band + i as u32,
                config: Configuration::new(1, t.clone()),
            })
            .collect()
    }

    #[test]
    fn eraser_flow_tracks_and_halts() {
        let tm = crate::samples::eraser();
        let report = halting_flow_check(
            &tm,
            &standard_inputs(2),
            12,
            0.0,
            &[],
            &FlowParams::default(),
        )
        .unwrap();
        assert!(report.pass(), "{}", report.render());
        for r in &report.baseline {
            assert!(r.halt_expected && r.halt_entered);
        }
    }

    #[test]
    fn self_loop_flow_never_enters_halt_set() {
        let tm = crate::samples::self_loop();
        let report = halting_flow_check(
            &tm,
            &standard_inputs(2),
            10,
            0.0,
            &[],
            &FlowParams::default(),
        )
        .unwrap();
        assert!(report.pass(), "{}", report.render());
        for r in &report.baseline {
            assert!(!r.halt_expected && !r.halt_entered);
        }
    }

    #[test]
    fn small_perturbations_preserve_visit_order() {
        let tm = crate::samples::toggler();
        let inputs = vec![
            FlowInput {
                band: 2,
                config: Configuration::new(1, Tape::from_pairs(&[(0, 1)])),
            },
            FlowInput {
                band: 3,
                config: Configuration::new(1, Tape::blank()),
            },
        ];
        let report = halting_flow_check(
            &tm,
            &inputs,
            10,
            1e-3,
            &[0, 1, 2, 3, 4],
            &FlowParams::default(),
        )
        .unwrap();
        assert!(report.pass(), "{}", report.render());
    }

    #[test]
    fn huge_perturbation_reports_divergence_without_claiming_pass() {
        // stress case on band 0 where the decay profile is near 1
        let tm = crate::samples::self_loop();
        let inputs = vec![FlowInput {
            band: 0,
            config: Configuration::new(1, Tape::blank()),
        }];
        let report = halting_flow_check(&tm, &inputs, 6, 10.0, &[0], &FlowParams::default());
        match report {
            Ok(r) => {
                let (_, seeded) = &r.perturbed[0];
                assert!(
                    seeded[0].divergence_height.is_some(),
                    "expected divergence under delta=10: {}",
                    r.render()
                );
            }
            // a blown-up trajectory may also abort the integrator
            Err(FlowError::Integrate(_)) => {}
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn zero_height_budget_passes_vacuously() {
        let tm = crate::samples::flipper();
        let inputs = vec![FlowInput {
            band: 2,
            config: Configuration::new(1, Tape::blank()),
        }];
        let report =
            halting_flow_check(&tm, &inputs, 0, 0.0, &[], &FlowParams::default()).unwrap();
        assert!(report.pass());
        assert!(report.baseline[0].visits.is_empty());
    }

    #[test]
    fn parallel_jobs_produce_identical_reports() {
        let tm = crate::samples::flipper();
        let inputs = standard_inputs(1);
        let sequential = halting_flow_check(&tm, &inputs, 8, 0.0, &[], &FlowParams::default())
            .unwrap();
        let parallel = halting_flow_check(
            &tm,
            &inputs,
            8,
            0.0,
            &[],
            &FlowParams {
                jobs: 3,
                ..FlowParams::default()
            },
        )
        .unwrap();
        assert_eq!(sequential.render(), parallel.render());
        for (a, b) in sequential
            .baseline_trajectories
            .iter()
            .zip(&parallel.baseline_trajectories)
        {
            assert_eq!(a.points, b.points);
        }
    }
}
