//! Template selection and class discrimination.
//!
//! A labeled series is cut into contiguous partitions. Each partition is a
//! candidate template source: its match curve against the whole series is
//! scored by the total number of matches over the length grid, and the
//! highest-scoring partition becomes the class template. Templates are then
//! matched against every class to find the shortest length beyond which a
//! template still finds itself but no longer finds any other class.

use rayon::prelude::*;

use crate::alpha::TimeSeries;
use crate::error::{Error, Result};
use crate::matcher::{match_curve, LengthGrid, MatchCurve, Threshold};

/// Contiguous, equal-length, non-overlapping blocks from the start of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSet {
    pub partitions: Vec<Vec<f64>>,
    pub source_label: String,
}

impl PartitionSet {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partition_len(&self) -> usize {
        self.partitions.first().map_or(0, Vec::len)
    }
}

pub fn partition(
    data: &TimeSeries,
    num_partitions: usize,
    partition_len: usize,
    source_label: impl Into<String>,
) -> Result<PartitionSet> {
    if num_partitions == 0 || partition_len == 0 {
        return Err(Error::contract(
            "number of partitions and partition length must both be at least 1",
        ));
    }
    let needed = num_partitions
        .checked_mul(partition_len)
        .filter(|&n| n <= data.len())
        .ok_or_else(|| {
            Error::contract(format!(
                "{num_partitions} partitions of {partition_len} samples need more than the {} available",
                data.len()
            ))
        })?;
    let partitions = data.samples()[..needed]
        .chunks_exact(partition_len)
        .map(<[f64]>::to_vec)
        .collect();
    Ok(PartitionSet {
        partitions,
        source_label: source_label.into(),
    })
}

/// The partition chosen as the class template.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SelectedTemplate {
    pub samples: Vec<f64>,
    pub partition_index: usize,
    pub score: u64,
    pub source_label: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PartitionScore {
    pub partition_index: usize,
    pub score: u64,
    pub curve: MatchCurve,
}

/// Match curve and score of each partition against `data`.
pub fn score_partitions(
    data: &TimeSeries,
    partitions: &PartitionSet,
    grid: LengthGrid,
    threshold: Threshold,
) -> Result<Vec<PartitionScore>> {
    if partitions.is_empty() {
        return Err(Error::contract("partition set is empty"));
    }
    if grid.max_len > partitions.partition_len() {
        return Err(Error::contract(format!(
            "max_len {} exceeds partition length {}",
            grid.max_len,
            partitions.partition_len()
        )));
    }
    partitions
        .partitions
        .par_iter()
        .enumerate()
        .map(|(i, part)| {
            let curve = match_curve(part, data, grid, threshold)?.with_labels(
                format!("{}[{i}]", partitions.source_label),
                partitions.source_label.clone(),
            );
            Ok(PartitionScore {
                partition_index: i,
                score: curve.total_matches(),
                curve,
            })
        })
        .collect()
}

/// Highest score wins; ties go to the lowest partition index.
pub fn choose_template(
    partitions: &PartitionSet,
    scores: &[PartitionScore],
) -> Result<SelectedTemplate> {
    let best = scores
        .iter()
        .reduce(|best, s| {
            if s.score > best.score
                || (s.score == best.score && s.partition_index < best.partition_index)
            {
                s
            } else {
                best
            }
        })
        .ok_or_else(|| Error::contract("no partition scores to choose from"))?;
    let samples = partitions
        .partitions
        .get(best.partition_index)
        .ok_or_else(|| Error::contract("partition index out of range"))?
        .clone();
    Ok(SelectedTemplate {
        samples,
        partition_index: best.partition_index,
        score: best.score,
        source_label: partitions.source_label.clone(),
    })
}

/// Most representative partition: the one whose match curve against `data`
/// has the largest total count.
pub fn select_template(
    data: &TimeSeries,
    partitions: &PartitionSet,
    grid: LengthGrid,
    threshold: Threshold,
) -> Result<SelectedTemplate> {
    let scores = score_partitions(data, partitions, grid, threshold)?;
    choose_template(partitions, &scores)
}

/// Smallest grid length `k*` such that at every grid length `k ≥ k*` the self
/// curve has at least one match and every cross curve has at most
/// `cross_tolerance` matches. `None` when even the last grid length fails.
pub fn minimal_discriminative_length(
    self_curve: &MatchCurve,
    cross_curves: &[MatchCurve],
    cross_tolerance: usize,
) -> Result<Option<usize>> {
    for cross in cross_curves {
        if !self_curve.same_grid(cross) {
            return Err(Error::contract(format!(
                "curve {}→{} does not share the self curve's length grid",
                cross.source_label, cross.data_label
            )));
        }
        if cross.threshold != self_curve.threshold {
            return Err(Error::contract(format!(
                "curve {}→{} uses threshold {} but the self curve uses {}",
                cross.source_label, cross.data_label, cross.threshold, self_curve.threshold
            )));
        }
    }

    let discriminates = |i: usize| {
        self_curve.points[i].match_count >= 1
            && cross_curves
                .iter()
                .all(|c| c.points[i].match_count <= cross_tolerance)
    };
    let mut found = None;
    for i in (0..self_curve.points.len()).rev() {
        if !discriminates(i) {
            break;
        }
        found = Some(self_curve.points[i].template_length);
    }
    Ok(found)
}

/// One class's series, labeled.
#[derive(Debug, Clone)]
pub struct ClassSeries {
    pub label: String,
    pub series: TimeSeries,
}

impl ClassSeries {
    pub fn new(label: impl Into<String>, series: TimeSeries) -> Self {
        Self {
            label: label.into(),
            series,
        }
    }
}

/// Parameters shared by every class in a discrimination run.
#[derive(Debug, Clone, Copy)]
pub struct DiscriminationConfig {
    pub num_partitions: usize,
    pub partition_len: usize,
    pub grid: LengthGrid,
    pub threshold: Threshold,
    pub cross_tolerance: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiscriminationReport {
    pub class_label: String,
    pub selected_partition: usize,
    pub selection_score: u64,
    pub self_curve: MatchCurve,
    pub cross_curves: Vec<MatchCurve>,
    pub minimal_length: Option<usize>,
    pub threshold: f64,
    pub cross_tolerance: usize,
}

/// Selects a template per class, matches it against its own series and every
/// other class, and reports the minimal discriminative length.
pub fn discriminate(
    classes: &[ClassSeries],
    config: &DiscriminationConfig,
) -> Result<Vec<DiscriminationReport>> {
    if classes.is_empty() {
        return Err(Error::contract("at least one class is required"));
    }
    let selected = classes
        .par_iter()
        .map(|class| {
            let parts = partition(
                &class.series,
                config.num_partitions,
                config.partition_len,
                class.label.clone(),
            )?;
            select_template(&class.series, &parts, config.grid, config.threshold)
        })
        .collect::<Result<Vec<_>>>()?;

    selected
        .par_iter()
        .enumerate()
        .map(|(i, template)| {
            let curve_against = |target: &ClassSeries| {
                match_curve(
                    &template.samples,
                    &target.series,
                    config.grid,
                    config.threshold,
                )
                .map(|c| c.with_labels(classes[i].label.clone(), target.label.clone()))
            };
            let self_curve = curve_against(&classes[i])?;
            let cross_curves = classes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, target)| curve_against(target))
                .collect::<Result<Vec<_>>>()?;
            let minimal_length =
                minimal_discriminative_length(&self_curve, &cross_curves, config.cross_tolerance)?;
            Ok(DiscriminationReport {
                class_label: classes[i].label.clone(),
                selected_partition: template.partition_index,
                selection_score: template.score,
                self_curve,
                cross_curves,
                minimal_length,
                threshold: config.threshold.value(),
                cross_tolerance: config.cross_tolerance,
            })
        })
        .collect()
}
