//! Seeded perturbations with Gaussian spatial decay.

use super::field::VectorField2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Perturbation of magnitude exactly `delta * exp(-(x^2+y^2))` in a smooth
/// pseudo-random unit direction reproducible from the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PerturbedField<F> {
    base: F,
    delta: f64,
    waves: [(f64, f64, f64, f64); 6],
}

/// Builds the perturbed field `X + delta e^{-(x^2+y^2)} (cos psi, sin psi)`
/// where the angle field psi is a fixed random trigonometric sum.
pub fn perturb<F: VectorField2>(base: F, spec: PerturbationSpec) -> PerturbedField<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut waves = [(0.0, 0.0, 0.0, 0.0); 6];
    for w in &mut waves {
        *w = (
            rng.random_range(0.3..1.2),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
    }
    PerturbedField {
        base,
        delta: spec.delta,
        waves,
    }
}

impl<F> PerturbedField<F> {
    fn angle(&self, x: f64, y: f64) -> f64 {
        self.waves
            .iter()
            .map(|&(a, kx, ky, phase)| a * (kx * x + ky * y + phase).sin())
            .sum()
    }
}

impl<F: VectorField2> VectorField2 for PerturbedField<F> {
    fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        let base = self.base.eval(x, y);
        let amp = self.delta * (-(x * x + y * y)).exp();
        if amp == 0.0 {
            return base;
        }
        let psi = self.angle(x, y);
        [base[0] + amp * psi.cos(), base[1] + amp * psi.sin()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Unit;
    impl VectorField2 for Unit {
        fn eval(&self, _: f64, _: f64) -> [f64; 2] {
            [0.0, 1.0]
        }
    }

    #[test]
    fn zero_delta_is_identity() {
        let f = perturb(Unit, PerturbationSpec { delta: 0.0, seed: 1 });
        for &(x, y) in &[(0.0, 0.0), (1.5, -2.0), (30.0, 4.0)] {
            assert_eq!(f.eval(x, y), [0.0, 1.0]);
        }
    }

    #[test]
    fn magnitude_matches_decay_profile() {
        let delta = 1e-3;
        let f = perturb(Unit, PerturbationSpec { delta, seed: 7 });
        for &(x, y) in &[(0.0, 0.0), (0.5, 1.0), (2.0, 3.0)] {
            let v = f.eval(x, y);
            let d = ((v[0]).powi(2) + (v[1] - 1.0).powi(2)).sqrt();
            let expect = delta * (-(x * x + y * y)).exp();
            assert!((d - expect).abs() < 1e-15 * (1.0 + expect));
        }
    }

    #[test]
    fn same_seed_reproduces_same_field() {
        let a = perturb(Unit, PerturbationSpec { delta: 0.1, seed: 42 });
        let b = perturb(Unit, PerturbationSpec { delta: 0.1, seed: 42 });
        let c = perturb(Unit, PerturbationSpec { delta: 0.1, seed: 43 });
        assert_eq!(a.eval(0.3, 0.7), b.eval(0.3, 0.7));
        assert_ne!(a.eval(0.3, 0.7), c.eval(0.3, 0.7));
    }
}
