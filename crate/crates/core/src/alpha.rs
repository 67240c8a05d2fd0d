//! Closed-form amplitude estimation and the normalized similarity parameter.
//!
//! For a template `f` with per-sample noise deviations `σ` and a data window
//! `m`, the intensity that maximizes the Gaussian-weighted cross-correlation is
//!
//! ```text
//! alpha(lag) = Σ m[j + lag]·f[j]/σ[j]²  /  Σ f[j]²/σ[j]²
//! Δalpha     = 1 / sqrt(Σ f[j]²/σ[j]²)
//! ```
//!
//! The template is held fixed and the data window slides, so `Δalpha` is the
//! same at every lag. Normalizing both sequences to unit Euclidean norm turns
//! the estimate into a cosine, `alpha_n`, in `[-1, 1]`.

use crate::error::{Error, Result};
use crate::sum::{self, CompensatedSum};

/// Measured data: finite samples and an optional sample rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate: Option<f64>,
}

impl TimeSeries {
    /// Rejects empty input and any NaN or infinite sample.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::contract(
                "time series must contain at least one sample",
            ));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            samples,
            sample_rate: None,
        })
    }

    pub fn with_sample_rate(mut self, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::contract(format!(
                "sample rate must be positive and finite, got {rate}"
            )));
        }
        self.sample_rate = Some(rate);
        Ok(self)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> Option<f64> {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

/// The sought function together with the noise deviation of each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    samples: Vec<f64>,
    sigmas: Vec<f64>,
}

impl Template {
    pub fn new(samples: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::contract("template must contain at least one sample"));
        }
        if samples.len() != sigmas.len() {
            return Err(Error::contract(format!(
                "template has {} samples but {} sigmas",
                samples.len(),
                sigmas.len()
            )));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(j) = sigmas.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::contract(format!(
                "sigma at index {j} must be positive and finite, got {}",
                sigmas[j]
            )));
        }
        if samples.iter().all(|&x| x == 0.0) {
            return Err(Error::DegenerateTemplate);
        }
        Ok(Self { samples, sigmas })
    }

    /// Template with the same noise deviation on every channel.
    pub fn with_uniform_sigma(samples: Vec<f64>, sigma: f64) -> Result<Self> {
        let sigmas = vec![sigma; samples.len()];
        Self::new(samples, sigmas)
    }

    /// Template with `σ = 1` on every channel; the estimate reduces to
    /// ordinary least squares.
    pub fn unit(samples: Vec<f64>) -> Result<Self> {
        Self::with_uniform_sigma(samples, 1.0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `Σ f[j]²/σ[j]²`, the denominator shared by alpha and Δalpha.
    pub fn weighted_energy(&self) -> f64 {
        sum::sum(
            self.samples
                .iter()
                .zip(&self.sigmas)
                .map(|(f, s)| (f / s) * (f / s)),
        )
    }

    /// One-sigma half-width of the confidence interval. Independent of data.
    pub fn delta_alpha(&self) -> Result<f64> {
        let energy = self.weighted_energy();
        if energy > 0.0 && energy.is_finite() {
            Ok(energy.sqrt().recip())
        } else {
            Err(Error::DegenerateTemplate)
        }
    }
}

/// Estimate of the template's intensity at one lag, `alpha ± delta_alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub delta_alpha: f64,
    pub lag: usize,
}

impl AlphaEstimate {
    /// `alpha ≥ 3·Δalpha`.
    pub fn is_detected(&self) -> bool {
        self.alpha >= 3.0 * self.delta_alpha
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.alpha - self.delta_alpha, self.alpha + self.delta_alpha)
    }
}

/// Maximum-likelihood intensity of `template` inside `data` at `lag`.
///
/// The data window `data[lag .. lag + k]` is compared with the full template.
pub fn alpha_estimate(template: &Template, data: &TimeSeries, lag: usize) -> Result<AlphaEstimate> {
    let k = template.len();
    let end = lag
        .checked_add(k)
        .filter(|&end| end <= data.len())
        .ok_or_else(|| {
            Error::contract(format!(
                "data length {} is shorter than template length {k} + lag {lag}",
                data.len()
            ))
        })?;
    let window = &data.samples()[lag..end];

    let mut numerator = CompensatedSum::new();
    let mut denominator = CompensatedSum::new();
    for ((&m, &f), &s) in window.iter().zip(template.samples()).zip(template.sigmas()) {
        let w = (s * s).recip();
        numerator.add(m * f * w);
        denominator.add(f * f * w);
    }
    let denominator = denominator.value();
    if !(denominator > 0.0 && denominator.is_finite()) {
        return Err(Error::DegenerateTemplate);
    }
    Ok(AlphaEstimate {
        alpha: numerator.value() / denominator,
        delta_alpha: denominator.sqrt().recip(),
        lag,
    })
}

/// Detection limit `3·Δalpha`: an intensity at or above it is a detection.
pub fn detection_threshold(template: &Template) -> Result<f64> {
    Ok(3.0 * template.delta_alpha()?)
}

/// Euclidean norm `ζ = sqrt(Σ x²)`. Zero for an all-zero sequence.
pub fn normalization_factor(samples: &[f64]) -> f64 {
    sum::sum_sq(samples).sqrt()
}

/// A sequence divided by its Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSequence {
    samples: Vec<f64>,
    original_norm: f64,
}

impl NormalizedSequence {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// The divisor `ζ` that was applied.
    pub fn original_norm(&self) -> f64 {
        self.original_norm
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

pub fn normalize(samples: &[f64]) -> Result<NormalizedSequence> {
    let zeta = checked_norm(samples)?;
    Ok(NormalizedSequence {
        samples: samples.iter().map(|x| x / zeta).collect(),
        original_norm: zeta,
    })
}

fn checked_norm(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::contract("cannot normalize an empty sequence"));
    }
    let zeta = normalization_factor(samples);
    if !zeta.is_finite() {
        return Err(Error::contract("sequence norm is not finite"));
    }
    if zeta == 0.0 {
        return Err(Error::DegenerateSequence);
    }
    Ok(zeta)
}

/// Normalized alpha: the cosine between a template window and a data window.
///
/// Equivalent to [`alpha_estimate`] on the two unit-norm sequences with
/// `σ = 1`, because the normalized template's energy is exactly one.
pub fn alpha_normalized(template_window: &[f64], data_window: &[f64]) -> Result<f64> {
    if template_window.len() != data_window.len() {
        return Err(Error::contract(format!(
            "template window length {} differs from data window length {}",
            template_window.len(),
            data_window.len()
        )));
    }
    let zeta_f = checked_norm(template_window)?;
    let zeta_m = checked_norm(data_window)?;
    Ok(sum::dot(template_window, data_window) / zeta_f / zeta_m)
}

/// Discrete cross-correlation `Σ_j f[j]·g[j + lag]`; indices outside either
/// sequence contribute zero.
///
/// This is the textbook definition, evaluated by a plain loop. It is kept as
/// a reference for the estimator rather than used on any hot path.
pub fn cross_correlation_oracle(f: &[f64], g: &[f64], lag: isize) -> f64 {
    let mut total = 0.0;
    for (j, &fj) in f.iter().enumerate() {
        let idx = j as isize + lag;
        if idx >= 0 && (idx as usize) < g.len() {
            total += fj * g[idx as usize];
        }
    }
    total
}
