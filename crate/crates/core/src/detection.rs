//! Synthetic signals and the detection-limit experiment.
//!
//! Noise is drawn from a ChaCha8 stream seeded with a `u64`
//! ([`rand_chacha::ChaCha8Rng::seed_from_u64`]) and mapped to a standard
//! normal with the ziggurat sampler of `rand_distr`. Both are portable, so a
//! seed yields the same samples on every platform. Samples are `sigma · z`,
//! hence changing only `sigma` rescales the sequence exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::alpha::{alpha_estimate, detection_threshold, Template, TimeSeries};
use crate::error::{Error, Result};
use crate::sum;

/// `length` i.i.d. samples from `Normal(0, sigma²)`.
pub fn gaussian_noise(length: usize, sigma: f64, seed: u64) -> Result<TimeSeries> {
    if length == 0 {
        return Err(Error::contract("noise length must be at least 1"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::contract(format!(
            "noise sigma must be positive and finite, got {sigma}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..length)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect();
    TimeSeries::new(samples)
}

/// Adds `alpha · template` to `noise`, starting at sample `offset`.
pub fn inject(
    noise: &TimeSeries,
    template: &[f64],
    alpha: f64,
    offset: usize,
) -> Result<TimeSeries> {
    let end = offset
        .checked_add(template.len())
        .filter(|&end| end <= noise.len())
        .ok_or_else(|| {
            Error::contract(format!(
                "template of length {} at offset {offset} overflows series of length {}",
                template.len(),
                noise.len()
            ))
        })?;
    if !alpha.is_finite() {
        return Err(Error::contract("injection alpha must be finite"));
    }
    let mut samples = noise.samples().to_vec();
    for (out, f) in samples[offset..end].iter_mut().zip(template) {
        *out += alpha * f;
    }
    let series = TimeSeries::new(samples)?;
    match noise.sample_rate() {
        Some(rate) => series.with_sample_rate(rate),
        None => Ok(series),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub template: Vec<f64>,
    pub alpha: f64,
    pub offset: usize,
}

/// Gaussian background, optionally with a scaled template added.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSpec {
    pub length: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub injection: Option<Injection>,
}

impl SynthesisSpec {
    pub fn synthesize(&self) -> Result<TimeSeries> {
        let noise = gaussian_noise(self.length, self.noise_sigma, self.seed)?;
        match &self.injection {
            Some(inj) => inject(&noise, &inj.template, inj.alpha, inj.offset),
            None => Ok(noise),
        }
    }
}

/// Number of surrogate classes.
pub const SURROGATE_CLASSES: u8 = 5;

/// Relative harmonic amplitudes per class; row `c - 1` is class `c`, column
/// `h - 1` the `h`-th harmonic. Each class peaks on a different harmonic so
/// their waveforms stay mutually dissimilar over a 64-sample window.
const HARMONICS: [[f64; 6]; SURROGATE_CLASSES as usize] = [
    [1.0, 0.9, 0.3, 0.1, 0.05, 0.02],
    [0.3, 0.4, 1.0, 0.5, 0.1, 0.05],
    [0.4, 1.0, 0.2, 0.1, 0.6, 0.3],
    [0.2, 0.1, 0.3, 1.0, 0.8, 0.2],
    [0.7, 0.1, 0.1, 0.2, 0.3, 1.0],
];

/// Phase of harmonic `h` in class `c` is `PHASE_STEP · c · h` radians.
const PHASE_STEP: f64 = 0.37;

/// Jitter standard deviation relative to the clean waveform's RMS.
const JITTER: f64 = 0.01;

/// Fundamental frequency of a surrogate class: `100 + 30·class_id` Hz.
pub fn surrogate_fundamental(class_id: u8) -> f64 {
    100.0 + 30.0 * f64::from(class_id)
}

/// Deterministic vowel-like waveform for `class_id` in `1..=5`.
///
/// A sum of six harmonics of [`surrogate_fundamental`] with the class's fixed
/// amplitude table and phases, plus Gaussian jitter with standard deviation
/// 1% of the clean waveform's RMS, drawn from `seed`.
pub fn periodic_surrogate(
    class_id: u8,
    length: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<TimeSeries> {
    if !(1..=SURROGATE_CLASSES).contains(&class_id) {
        return Err(Error::contract(format!(
            "surrogate class must be in 1..={SURROGATE_CLASSES}, got {class_id}"
        )));
    }
    if length == 0 {
        return Err(Error::contract("surrogate length must be at least 1"));
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::contract(format!(
            "sample rate must be positive and finite, got {sample_rate}"
        )));
    }
    let c = f64::from(class_id);
    let f0 = surrogate_fundamental(class_id);
    let table = &HARMONICS[usize::from(class_id - 1)];

    let clean: Vec<f64> = (0..length)
        .map(|i| {
            let t = i as f64 / sample_rate;
            table
                .iter()
                .enumerate()
                .map(|(idx, &amp)| {
                    let h = (idx + 1) as f64;
                    amp * (std::f64::consts::TAU * h * f0 * t + PHASE_STEP * c * h).sin()
                })
                .sum()
        })
        .collect();
    let rms = (sum::sum_sq(&clean) / length as f64).sqrt();

    let jitter = gaussian_noise(length, JITTER * rms, seed)?;
    let samples = clean
        .iter()
        .zip(jitter.samples())
        .map(|(x, n)| x + n)
        .collect();
    TimeSeries::new(samples)?.with_sample_rate(sample_rate)
}

/// A Hann-windowed three-cycle sine of `length` samples, scaled so that
/// `Σ f²/σ² = 1/delta_alpha²`.
pub fn energy_matched_template(length: usize, delta_alpha: f64, sigma: f64) -> Result<Template> {
    if length == 0 {
        return Err(Error::contract("template length must be at least 1"));
    }
    if !(delta_alpha.is_finite() && delta_alpha > 0.0) {
        return Err(Error::contract(format!(
            "delta_alpha must be positive and finite, got {delta_alpha}"
        )));
    }
    let n = length as f64;
    let shape: Vec<f64> = (0..length)
        .map(|j| {
            let x = (j as f64 + 0.5) / n;
            let window = (std::f64::consts::PI * x).sin().powi(2);
            window * (std::f64::consts::TAU * 3.0 * x).sin()
        })
        .collect();
    let shape = if shape.iter().all(|&x| x == 0.0) {
        vec![1.0; length]
    } else {
        shape
    };
    let target = (delta_alpha * delta_alpha).recip();
    let scale = (target / sum::sum_sq(&shape)).sqrt() * sigma;
    Template::with_uniform_sigma(shape.into_iter().map(|x| x * scale).collect(), sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageConfig {
    /// True intensity injected in every trial.
    pub alpha: f64,
    pub trials: usize,
    pub noise_sigma: f64,
    /// Trial `i` draws its noise from seed `seed + i`.
    pub seed: u64,
    pub data_length: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub delta_alpha: f64,
    pub threshold: f64,
    pub coverage_1sigma: f64,
    pub coverage_3sigma: f64,
    pub mean_alpha: f64,
    /// Fraction of trials with `alpha_hat ≥ 3·Δalpha`.
    pub detection_rate: f64,
    pub trials: usize,
}

/// Repeatedly injects `alpha · template` into fresh noise and re-estimates it
/// at the known offset.
pub fn alpha_recoveries(template: &Template, config: &CoverageConfig) -> Result<Vec<f64>> {
    if config.trials == 0 {
        return Err(Error::contract("at least one trial is required"));
    }
    (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let noise = gaussian_noise(
                config.data_length,
                config.noise_sigma,
                config.seed.wrapping_add(i as u64),
            )?;
            let data = inject(&noise, template.samples(), config.alpha, config.offset)?;
            Ok(alpha_estimate(template, &data, config.offset)?.alpha)
        })
        .collect()
}

/// Monte-Carlo coverage of the `±Δalpha` and `±3Δalpha` intervals.
pub fn coverage_experiment(template: &Template, config: &CoverageConfig) -> Result<CoverageReport> {
    let delta_alpha = template.delta_alpha()?;
    let threshold = detection_threshold(template)?;
    let estimates = alpha_recoveries(template, config)?;
    let n = estimates.len() as f64;
    let fraction =
        |pred: &dyn Fn(f64) -> bool| estimates.iter().filter(|&&a| pred(a)).count() as f64 / n;
    Ok(CoverageReport {
        delta_alpha,
        threshold,
        coverage_1sigma: fraction(&|a| (a - config.alpha).abs() <= delta_alpha),
        coverage_3sigma: fraction(&|a| (a - config.alpha).abs() <= 3.0 * delta_alpha),
        mean_alpha: sum::sum(estimates.iter().copied()) / n,
        detection_rate: fraction(&|a| a >= threshold),
        trials: estimates.len(),
    })
}
