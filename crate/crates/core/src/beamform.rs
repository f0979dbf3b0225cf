//! Element-level non-blind adaptive beamforming on a uniform linear array.
//!
//! The array output is `y = wᴴx`, the error against the known training
//! symbol is `e = d − y`, and the weights follow the least-mean-square
//! update `w ← w + μ·x·e*`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type ArraySnapshot = Vec<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<Complex64>);

impl WeightVector {
    pub fn zeros(len: usize) -> Self {
        WeightVector(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Normalized array response toward `angle_deg`, as a matched weight.
    pub fn matched(element_count: usize, spacing_wavelengths: f64, angle_deg: f64) -> Self {
        let k = element_count as f64;
        WeightVector(
            steering_vector(element_count, spacing_wavelengths, angle_deg)
                .into_iter()
                .map(|a| a / k)
                .collect(),
        )
    }

    /// Array factor in dB (relative to unit gain) toward `angle_deg`.
    pub fn response_db(&self, spacing_wavelengths: f64, angle_deg: f64) -> f64 {
        let a = steering_vector(self.len(), spacing_wavelengths, angle_deg);
        let y: Complex64 = self.0.iter().zip(&a).map(|(w, x)| w.conj() * x).sum();
        20.0 * y.norm().log10()
    }
}

/// Plane-wave response of a ULA; element `m` has phase `2π·spacing·m·sin(angle)`.
pub fn steering_vector(element_count: usize, spacing_wavelengths: f64, angle_deg: f64) -> ArraySnapshot {
    let phase = 2.0 * std::f64::consts::PI * spacing_wavelengths * angle_deg.to_radians().sin();
    (0..element_count)
        .map(|m| Complex64::from_polar(1.0, phase * m as f64))
        .collect()
}

pub fn beamformer_output(w: &WeightVector, x: &[Complex64]) -> Result<Complex64> {
    if w.len() != x.len() {
        return Err(Error::LengthMismatch {
            weights: w.len(),
            samples: x.len(),
        });
    }
    Ok(w.0.iter().zip(x).map(|(wi, xi)| wi.conj() * xi).sum())
}

pub fn error_signal(desired: Complex64, output: Complex64) -> Complex64 {
    desired - output
}

pub fn adapt_step(w: &WeightVector, x: &[Complex64], e: Complex64, step_size: f64) -> Result<WeightVector> {
    let mut next = w.clone();
    adapt_in_place(&mut next, x, e, step_size)?;
    Ok(next)
}

fn adapt_in_place(w: &mut WeightVector, x: &[Complex64], e: Complex64, step_size: f64) -> Result<()> {
    if !(step_size > 0.0) {
        return Err(Error::invalid("step_size", format!("must be positive, got {step_size}")));
    }
    if w.len() != x.len() {
        return Err(Error::LengthMismatch {
            weights: w.len(),
            samples: x.len(),
        });
    }
    let ec = e.conj() * step_size;
    for (wi, xi) in w.0.iter_mut().zip(x) {
        *wi += xi * ec;
    }
    Ok(())
}

/// A stationary training scenario: one desired source with a known symbol
/// sequence, one interferer, and white receiver noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub element_count: usize,
    pub spacing_wavelengths: f64,
    pub desired_angle_deg: f64,
    pub interferer_angle_deg: f64,
    pub interferer_power: f64,
    pub noise_power: f64,
    /// Length of the known training block.
    pub training_len: usize,
    pub step_size: f64,
    pub steps: usize,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            element_count: 8,
            spacing_wavelengths: 0.5,
            desired_angle_deg: 20.0,
            interferer_angle_deg: -35.0,
            interferer_power: 1.0,
            noise_power: 0.01,
            training_len: 100,
            step_size: 0.005,
            steps: 2000,
            seed: 1,
        }
    }
}

/// Received snapshots and the matching training symbols.
#[derive(Debug, Clone)]
pub struct TrainingBlock {
    pub snapshots: Vec<ArraySnapshot>,
    pub training: Vec<Complex64>,
}

fn qpsk<R: Rng>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = if rng.random::<bool>() { s } else { -s };
    let im = if rng.random::<bool>() { s } else { -s };
    Complex64::new(re, im)
}

fn complex_gaussian<R: Rng>(rng: &mut R, power: f64) -> Complex64 {
    let s = (power / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.element_count == 0 {
            return Err(Error::invalid("elements", "must be at least 1"));
        }
        if !(self.spacing_wavelengths > 0.0) {
            return Err(Error::invalid("spacing", "must be positive"));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::invalid("step_size", "must be positive"));
        }
        if self.training_len == 0 {
            return Err(Error::invalid("training_len", "must be at least 1"));
        }
        if !(self.noise_power >= 0.0 && self.interferer_power >= 0.0) {
            return Err(Error::invalid("noise_power", "powers must be non-negative"));
        }
        Ok(())
    }

    /// Draws the training block: QPSK desired symbols, QPSK interferer symbols
    /// scaled to `interferer_power`, complex Gaussian noise per element.
    pub fn training_block(&self) -> TrainingBlock {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let a_d = steering_vector(self.element_count, self.spacing_wavelengths, self.desired_angle_deg);
        let a_i = steering_vector(self.element_count, self.spacing_wavelengths, self.interferer_angle_deg);
        let amp_i = self.interferer_power.sqrt();
        let mut snapshots = Vec::with_capacity(self.training_len);
        let mut training = Vec::with_capacity(self.training_len);
        for _ in 0..self.training_len {
            let s = qpsk(&mut rng);
            let v = qpsk(&mut rng) * amp_i;
            let x = a_d
                .iter()
                .zip(&a_i)
                .map(|(ad, ai)| ad * s + ai * v + complex_gaussian(&mut rng, self.noise_power))
                .collect();
            snapshots.push(x);
            training.push(s);
        }
        TrainingBlock { snapshots, training }
    }
}

#[derive(Debug, Clone)]
pub struct Convergence {
    /// A-priori squared error `|e(n)|²` at every step.
    pub squared_error: Vec<f64>,
    pub weights: WeightVector,
}

impl Convergence {
    /// Mean squared error over consecutive windows of `window` steps.
    pub fn windowed_mse(&self, window: usize) -> Vec<f64> {
        self.squared_error
            .chunks_exact(window)
            .map(|c| c.iter().sum::<f64>() / window as f64)
            .collect()
    }
}

/// Runs `scenario.steps` LMS iterations from zero weights, cycling through the
/// training block.
pub fn train(scenario: &Scenario, block: &TrainingBlock) -> Result<Convergence> {
    scenario.validate()?;
    let mut w = WeightVector::zeros(scenario.element_count);
    let mut squared_error = Vec::with_capacity(scenario.steps);
    for n in 0..scenario.steps {
        let i = n % block.snapshots.len();
        let x = &block.snapshots[i];
        let y = beamformer_output(&w, x)?;
        let e = error_signal(block.training[i], y);
        squared_error.push(e.norm_sqr());
        adapt_in_place(&mut w, x, e, scenario.step_size)?;
    }
    Ok(Convergence {
        squared_error,
        weights: w,
    })
}

/// Mean of `|d − wᴴx|²` over the block.
pub fn block_mse(w: &WeightVector, block: &TrainingBlock) -> Result<f64> {
    let mut acc = 0.0;
    for (x, d) in block.snapshots.iter().zip(&block.training) {
        acc += error_signal(*d, beamformer_output(w, x)?).norm_sqr();
    }
    Ok(acc / block.snapshots.len() as f64)
}

/// Writes `iteration,mse_db` rows, one per step, using windowed averages.
pub fn write_convergence_csv<W: std::io::Write>(conv: &Convergence, window: usize, mut out: W) -> std::io::Result<()> {
    writeln!(out, "iteration,mse_db")?;
    for (k, mse) in conv.windowed_mse(window).iter().enumerate() {
        writeln!(out, "{},{}", (k + 1) * window, 10.0 * mse.log10())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn steering_examples() {
        assert!(steering_vector(6, 0.5, 0.0).iter().all(|z| *z == c(1.0, 0.0)));
        let a = steering_vector(2, 0.5, 90.0);
        assert_eq!(a[0], c(1.0, 0.0));
        assert_abs_diff_eq!(a[1].arg().abs(), PI, epsilon = 1e-12);
        assert_eq!(steering_vector(1, 0.5, 37.0), vec![c(1.0, 0.0)]);
    }

    #[test]
    fn output_examples() {
        let x = vec![c(0.3, -1.0), c(2.0, 0.5), c(-1.0, 1.0)];
        let sel = WeightVector(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(beamformer_output(&sel, &x).unwrap(), x[1]);
        assert_eq!(beamformer_output(&WeightVector::zeros(3), &x).unwrap(), c(0.0, 0.0));
        let w = WeightVector::matched(8, 0.5, 23.0);
        let y = beamformer_output(&w, &steering_vector(8, 0.5, 23.0)).unwrap();
        assert_abs_diff_eq!(y.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y.im, 0.0, epsilon = 1e-12);
        assert!(matches!(
            beamformer_output(&WeightVector::zeros(2), &x),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn unnormalized_matched_gain() {
        let a = steering_vector(8, 0.5, -12.0);
        let s = c(0.6, -0.8);
        let x: Vec<Complex64> = a.iter().map(|ai| ai * s).collect();
        let y = beamformer_output(&WeightVector(a), &x).unwrap();
        assert_abs_diff_eq!(y.norm(), 8.0 * s.norm(), epsilon = 1e-12);
    }

    #[test]
    fn error_examples() {
        assert_eq!(error_signal(c(1.0, 2.0), c(1.0, 2.0)), c(0.0, 0.0));
        assert_abs_diff_eq!(error_signal(c(1.0, 0.0), c(0.4, 0.0)).re, 0.6, epsilon = 1e-15);
        assert_eq!(error_signal(c(0.0, 3.0), c(0.0, 1.0)), c(0.0, 2.0));
    }

    #[test]
    fn adapt_examples() {
        let w = WeightVector(vec![c(0.1, 0.2), c(-0.3, 0.0)]);
        let x = vec![c(1.0, 1.0), c(0.5, -2.0)];
        assert_eq!(adapt_step(&w, &x, c(0.0, 0.0), 0.1).unwrap(), w);
        let tiny = adapt_step(&w, &x, c(1.0, -1.0), 1e-300).unwrap();
        for (a, b) in tiny.0.iter().zip(&w.0) {
            assert!((a - b).norm() < 1e-290);
        }
        assert!(adapt_step(&w, &x, c(1.0, 0.0), 0.0).is_err());
        assert!(adapt_step(&w, &x[..1], c(1.0, 0.0), 0.1).is_err());
        // w' = w + mu x e*
        let w2 = adapt_step(&w, &x, c(0.0, 1.0), 0.5).unwrap();
        assert_abs_diff_eq!((w2.0[0] - (w.0[0] + x[0] * c(0.0, -0.5))).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lms_places_null_on_interferer() {
        let sc = Scenario {
            interferer_power: 10.0,
            ..Scenario::default()
        };
        let block = sc.training_block();
        let conv = train(&sc, &block).unwrap();
        let w = &conv.weights;
        let toward_user = w.response_db(sc.spacing_wavelengths, sc.desired_angle_deg);
        let toward_interferer = w.response_db(sc.spacing_wavelengths, sc.interferer_angle_deg);
        assert!(toward_user > toward_interferer + 20.0, "{toward_user} vs {toward_interferer}");
    }

    proptest! {
        #[test]
        fn output_linearity(
            w in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
            x in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
            a in (-2.0f64..2.0, -2.0f64..2.0),
        ) {
            let w = WeightVector(w.into_iter().map(|(r, i)| c(r, i)).collect());
            let x: Vec<Complex64> = x.into_iter().map(|(r, i)| c(r, i)).collect();
            let a = c(a.0, a.1);
            let y = beamformer_output(&w, &x).unwrap();
            let xs: Vec<Complex64> = x.iter().map(|v| v * a).collect();
            prop_assert!((beamformer_output(&w, &xs).unwrap() - a * y).norm() < 1e-12);
            let ws = WeightVector(w.0.iter().map(|v| v * a).collect());
            prop_assert!((beamformer_output(&ws, &x).unwrap() - a.conj() * y).norm() < 1e-12);
        }
    }
}
