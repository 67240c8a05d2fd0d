//! Sliding evaluation of the normalized alpha over every lag of a data series.
//!
//! A template of length `k` against data of length `l` yields `l - k` values,
//! one for each lag `0..l-k`. [`match_curve`] grows the template one sample at
//! a time and counts lags whose `|alpha_n|` reaches a threshold.
//!
//! Both entry points accumulate per-lag dot products and window energies with
//! [`CompensatedSum`] in the same term order. [`match_curve`] extends each
//! lag's sums by one term per template length instead of recomputing them,
//! which makes the whole curve `O(l · max_len)`, and its values are
//! bit-identical to what [`alpha_profile`] returns for the same prefix.

use rayon::prelude::*;

use crate::alpha::TimeSeries;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Lags per parallel work unit.
const LAG_CHUNK: usize = 1024;

/// Match threshold on `|alpha_n|`, in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub const DEFAULT: Threshold = Threshold(0.98);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::contract(format!(
                "threshold must lie in (0, 1], got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Inclusive: a value equal to the threshold counts as a match.
    #[inline]
    pub fn is_match(self, alpha_n: f64) -> bool {
        alpha_n.abs() >= self.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Normalized alpha for every lag of one template against one data series.
///
/// `None` marks a lag whose data window is entirely zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaProfile {
    values: Vec<Option<f64>>,
    template_length: usize,
    data_length: usize,
}

impl AlphaProfile {
    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn template_length(&self) -> usize {
        self.template_length
    }

    pub fn data_length(&self) -> usize {
        self.data_length
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lags whose value meets the threshold, in increasing order.
    pub fn matching_lags(&self, threshold: Threshold) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(lag, v)| v.filter(|&v| threshold.is_match(v)).map(|_| lag))
            .collect()
    }
}

#[inline]
fn cosine(dot: f64, template_sq: f64, window_sq: f64) -> Option<f64> {
    if window_sq == 0.0 {
        None
    } else {
        Some(dot / template_sq.sqrt() / window_sq.sqrt())
    }
}

fn check_finite(samples: &[f64]) -> Result<()> {
    match samples.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Normalized alpha of `template` against `data[lag .. lag + k]` for every
/// lag in `0 .. l - k`.
pub fn alpha_profile(template: &[f64], data: &TimeSeries) -> Result<AlphaProfile> {
    let k = template.len();
    let l = data.len();
    if k == 0 {
        return Err(Error::contract("template must contain at least one sample"));
    }
    if k >= l {
        return Err(Error::TemplateTooLong {
            template_len: k,
            data_len: l,
        });
    }
    check_finite(template)?;
    let template_sq = template
        .iter()
        .map(|x| x * x)
        .collect::<CompensatedSum>()
        .value();
    if template_sq == 0.0 {
        return Err(Error::DegenerateTemplate);
    }

    let samples = data.samples();
    let values = (0..l - k)
        .into_par_iter()
        .with_min_len(256)
        .map(|lag| {
            let window = &samples[lag..lag + k];
            let mut dot = CompensatedSum::new();
            let mut window_sq = CompensatedSum::new();
            for (&f, &m) in template.iter().zip(window) {
                dot.add(f * m);
                window_sq.add(m * m);
            }
            cosine(dot.value(), template_sq, window_sq.value())
        })
        .collect();

    Ok(AlphaProfile {
        values,
        template_length: k,
        data_length: l,
    })
}

/// Number of non-skipped entries with `|alpha_n| ≥ threshold`.
pub fn count_matches(profile: &AlphaProfile, threshold: Threshold) -> usize {
    profile
        .values
        .iter()
        .flatten()
        .filter(|&&v| threshold.is_match(v))
        .count()
}

/// Arithmetic progression of template lengths `min_len, min_len + step, …`
/// not exceeding `max_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthGrid {
    pub min_len: usize,
    pub max_len: usize,
    pub step: usize,
}

impl LengthGrid {
    pub fn new(min_len: usize, max_len: usize, step: usize) -> Result<Self> {
        if min_len == 0 {
            return Err(Error::contract("min_len must be at least 1"));
        }
        if min_len > max_len {
            return Err(Error::contract(format!(
                "min_len {min_len} exceeds max_len {max_len}"
            )));
        }
        if step == 0 {
            return Err(Error::contract("step must be at least 1"));
        }
        Ok(Self {
            min_len,
            max_len,
            step,
        })
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> {
        (self.min_len..=self.max_len).step_by(self.step)
    }

    pub fn len(&self) -> usize {
        (self.max_len - self.min_len) / self.step + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn contains(&self, k: usize) -> bool {
        k >= self.min_len && k <= self.max_len && (k - self.min_len).is_multiple_of(self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CurvePoint {
    pub template_length: usize,
    pub match_count: usize,
    /// The template prefix had zero norm; `match_count` is 0 by definition.
    pub skipped: bool,
}

/// Match count as a function of template length.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MatchCurve {
    pub points: Vec<CurvePoint>,
    pub threshold: f64,
    pub source_label: String,
    pub data_label: String,
}

impl MatchCurve {
    pub fn with_labels(mut self, source: impl Into<String>, data: impl Into<String>) -> Self {
        self.source_label = source.into();
        self.data_label = data.into();
        self
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().map(|p| p.template_length)
    }

    pub fn counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().map(|p| p.match_count)
    }

    /// Sum of match counts over the grid.
    pub fn total_matches(&self) -> u64 {
        self.counts().map(|c| c as u64).sum()
    }

    pub fn same_grid(&self, other: &MatchCurve) -> bool {
        self.points.len() == other.points.len() && self.lengths().eq(other.lengths())
    }
}

/// Count of matches for every prefix length of `template_source` on `grid`.
///
/// The prefix `template_source[..k]` is slid along `data` for each grid length
/// `k`, exactly as [`alpha_profile`] would, and lags are counted with
/// [`count_matches`].
pub fn match_curve(
    template_source: &[f64],
    data: &TimeSeries,
    grid: LengthGrid,
    threshold: Threshold,
) -> Result<MatchCurve> {
    let l = data.len();
    if grid.max_len > template_source.len() {
        return Err(Error::contract(format!(
            "max_len {} exceeds template source length {}",
            grid.max_len,
            template_source.len()
        )));
    }
    if grid.max_len >= l {
        return Err(Error::TemplateTooLong {
            template_len: grid.max_len,
            data_len: l,
        });
    }
    let source = &template_source[..grid.max_len];
    check_finite(source)?;

    // Prefix energies, accumulated in the same order as alpha_profile does.
    let mut prefix_sq = Vec::with_capacity(source.len());
    let mut acc = CompensatedSum::new();
    for &f in source {
        acc.add(f * f);
        prefix_sq.push(acc.value());
    }

    let samples = data.samples();
    let lag_count = l - grid.min_len;
    let chunk_starts: Vec<usize> = (0..lag_count).step_by(LAG_CHUNK).collect();

    let partial: Vec<Vec<usize>> = chunk_starts
        .par_iter()
        .map(|&start| {
            let end = (start + LAG_CHUNK).min(lag_count);
            count_chunk(source, &prefix_sq, samples, start, end, grid, threshold)
        })
        .collect();

    let mut counts = vec![0usize; grid.len()];
    for chunk in &partial {
        for (total, c) in counts.iter_mut().zip(chunk) {
            *total += c;
        }
    }

    let points = grid
        .lengths()
        .zip(counts)
        .map(|(k, match_count)| {
            let skipped = prefix_sq[k - 1] == 0.0;
            CurvePoint {
                template_length: k,
                match_count: if skipped { 0 } else { match_count },
                skipped,
            }
        })
        .collect();

    Ok(MatchCurve {
        points,
        threshold: threshold.value(),
        source_label: String::new(),
        data_label: String::new(),
    })
}

/// Grows the per-lag sums for lags `start..end` through every template length
/// up to `grid.max_len` and counts matches at grid lengths.
fn count_chunk(
    source: &[f64],
    prefix_sq: &[f64],
    samples: &[f64],
    start: usize,
    end: usize,
    grid: LengthGrid,
    threshold: Threshold,
) -> Vec<usize> {
    let l = samples.len();
    let width = end - start;
    let mut dots = vec![CompensatedSum::new(); width];
    let mut energies = vec![CompensatedSum::new(); width];
    let mut counts = Vec::with_capacity(grid.len());

    for k in 1..=grid.max_len {
        // lags valid at length k are 0..l-k
        let active = end.min(l - k).saturating_sub(start);
        if active == 0 {
            // also empty for every longer template
            break;
        }
        let f = source[k - 1];
        let incoming = &samples[start + k - 1..start + k - 1 + active];
        for ((dot, energy), &m) in dots.iter_mut().zip(energies.iter_mut()).zip(incoming) {
            dot.add(f * m);
            energy.add(m * m);
        }
        if grid.contains(k) {
            let template_sq = prefix_sq[k - 1];
            let n = if template_sq == 0.0 {
                0
            } else {
                dots[..active]
                    .iter()
                    .zip(&energies[..active])
                    .filter_map(|(d, e)| cosine(d.value(), template_sq, e.value()))
                    .filter(|&v| threshold.is_match(v))
                    .count()
            };
            counts.push(n);
        }
    }
    counts.resize(grid.len(), 0);
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn profile_has_l_minus_k_entries() {
        let data = ts(&pseudo_random(10, 1));
        let p = alpha_profile(&[1.0, 2.0, 3.0], &data).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p.template_length(), 3);
        assert_eq!(p.data_length(), 10);
    }

    #[test]
    fn periodic_data_profile() {
        let data = ts(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let p = alpha_profile(&[1.0, 2.0], &data).unwrap();
        let v: Vec<f64> = p.values().iter().map(|v| v.unwrap()).collect();
        assert_eq!(v.len(), 4);
        // misaligned window [2, 1]: (1·2 + 2·1) / (√5·√5)
        let expected = [1.0, 0.8, 1.0, 0.8];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn self_match_at_lag_zero() {
        let data = pseudo_random(50, 9);
        let p = alpha_profile(&data[..49], &ts(&data)).unwrap();
        assert!((p.values()[0].unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silent_windows_are_skipped() {
        let data = ts(&[0.0, 0.0, 0.0, 1.0, 2.0]);
        let p = alpha_profile(&[1.0, 2.0], &data).unwrap();
        assert_eq!(p.values()[0], None);
        assert_eq!(p.values()[1], None);
        assert!(p.values()[2].is_some());
    }

    #[test]
    fn profile_errors() {
        let data = ts(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            alpha_profile(&[1.0, 2.0, 3.0], &data),
            Err(Error::TemplateTooLong { .. })
        ));
        assert!(matches!(
            alpha_profile(&[0.0, 0.0], &data),
            Err(Error::DegenerateTemplate)
        ));
        assert!(matches!(alpha_profile(&[], &data), Err(Error::Contract(_))));
        assert!(matches!(
            alpha_profile(&[f64::NAN], &data),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    fn profile_from(values: Vec<Option<f64>>) -> AlphaProfile {
        let n = values.len();
        AlphaProfile {
            values,
            template_length: 1,
            data_length: n + 1,
        }
    }

    #[test]
    fn count_uses_absolute_value() {
        let p = profile_from(vec![Some(0.99), Some(-0.985), Some(0.5)]);
        assert_eq!(count_matches(&p, Threshold::DEFAULT), 2);
        assert_eq!(p.matching_lags(Threshold::DEFAULT), vec![0, 1]);
    }

    #[test]
    fn count_ignores_skipped() {
        let p = profile_from(vec![None, None, None]);
        assert_eq!(count_matches(&p, Threshold::DEFAULT), 0);
    }

    #[test]
    fn threshold_is_inclusive() {
        let t = Threshold::new(0.5).unwrap();
        assert!(t.is_match(0.5));
        assert!(t.is_match(-0.5));
        assert!(!t.is_match(0.4999));
    }

    #[test]
    fn threshold_range() {
        assert!(Threshold::new(0.0).is_err());
        assert!(Threshold::new(1.0).is_ok());
        assert!(Threshold::new(1.01).is_err());
        assert!(Threshold::new(f64::NAN).is_err());
        assert_eq!(Threshold::default().value(), 0.98);
    }

    #[test]
    fn tiled_template_counts_every_copy() {
        let template = [0.3, -1.2, 0.7, 2.0, -0.4];
        let p = 6;
        let data: Vec<f64> = template
            .iter()
            .copied()
            .cycle()
            .take(template.len() * p)
            .collect();
        let profile = alpha_profile(&template, &ts(&data)).unwrap();
        // the last copy sits at lag l - k, which is outside the l - k entries
        assert!(count_matches(&profile, Threshold::DEFAULT) >= p - 1);

        let mut padded = data.clone();
        padded.push(0.1);
        let profile = alpha_profile(&template, &ts(&padded)).unwrap();
        assert!(count_matches(&profile, Threshold::DEFAULT) >= p);
    }

    #[test]
    fn grid_validation_and_lengths() {
        let g = LengthGrid::new(1, 5, 1).unwrap();
        assert_eq!(g.lengths().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        assert_eq!(g.len(), 5);
        let g = LengthGrid::new(10, 50, 7).unwrap();
        assert_eq!(
            g.lengths().collect::<Vec<_>>(),
            vec![10, 17, 24, 31, 38, 45]
        );
        assert_eq!(g.len(), 6);
        assert!(LengthGrid::new(0, 5, 1).is_err());
        assert!(LengthGrid::new(6, 5, 1).is_err());
        assert!(LengthGrid::new(1, 5, 0).is_err());
    }

    #[test]
    fn curve_matches_profile_counts() {
        let data = ts(&pseudo_random(3000, 4));
        let source: Vec<f64> = data.samples()[100..400].to_vec();
        let grid = LengthGrid::new(1, 300, 13).unwrap();
        let thr = Threshold::new(0.6).unwrap();
        let curve = match_curve(&source, &data, grid, thr).unwrap();
        assert_eq!(curve.points.len(), grid.len());
        for point in &curve.points {
            let profile = alpha_profile(&source[..point.template_length], &data).unwrap();
            assert_eq!(
                point.match_count,
                count_matches(&profile, thr),
                "k={}",
                point.template_length
            );
        }
    }

    #[test]
    fn curve_self_prefix_always_matches() {
        let data = ts(&pseudo_random(400, 2));
        let grid = LengthGrid::new(1, 200, 1).unwrap();
        let curve = match_curve(&data.samples()[..200], &data, grid, Threshold::DEFAULT).unwrap();
        assert!(curve.points.iter().all(|p| p.match_count >= 1));
    }

    #[test]
    fn curve_zero_prefix_is_skipped() {
        let data = ts(&pseudo_random(100, 3));
        let source = [0.0, 0.0, 1.0, 2.0];
        let grid = LengthGrid::new(1, 4, 1).unwrap();
        let curve = match_curve(&source, &data, grid, Threshold::DEFAULT).unwrap();
        assert!(curve.points[0].skipped && curve.points[1].skipped);
        assert_eq!(curve.points[0].match_count, 0);
        assert!(!curve.points[2].skipped);
    }

    #[test]
    fn curve_preconditions() {
        let data = ts(&pseudo_random(10, 5));
        let grid = LengthGrid::new(1, 10, 1).unwrap();
        assert!(matches!(
            match_curve(&pseudo_random(20, 6), &data, grid, Threshold::DEFAULT),
            Err(Error::TemplateTooLong { .. })
        ));
        let grid = LengthGrid::new(1, 5, 1).unwrap();
        assert!(matches!(
            match_curve(&[1.0, 2.0], &data, grid, Threshold::DEFAULT),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn curve_spanning_several_chunks() {
        let n = 3 * LAG_CHUNK + 17;
        let data = ts(&pseudo_random(n, 8));
        let source = data.samples()[500..540].to_vec();
        let grid = LengthGrid::new(2, 40, 2).unwrap();
        let thr = Threshold::new(0.5).unwrap();
        let curve = match_curve(&source, &data, grid, thr).unwrap();
        for point in &curve.points {
            let profile = alpha_profile(&source[..point.template_length], &data).unwrap();
            assert_eq!(point.match_count, count_matches(&profile, thr));
        }
    }
}
