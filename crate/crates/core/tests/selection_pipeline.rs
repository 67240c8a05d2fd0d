use alphamatch_core::selection::score_partitions;
use alphamatch_core::{
    discriminate, gaussian_noise, match_curve, minimal_discriminative_length, partition,
    periodic_surrogate, select_template, ClassSeries, DiscriminationConfig, LengthGrid,
    PartitionSet, Threshold, TimeSeries,
};

const RATE: f64 = 11_250.0;

fn surrogate_classes(seed: u64) -> Vec<ClassSeries> {
    (1..=5u8)
        .map(|c| {
            ClassSeries::new(
                format!("class{c}"),
                periodic_surrogate(c, 5000, RATE, seed + u64::from(c)).unwrap(),
            )
        })
        .collect()
}

#[test]
fn partitions_reassemble_the_prefix() {
    let data = gaussian_noise(1234, 1.0, 9).unwrap();
    for (num, len) in [(1, 1234), (5, 200), (3, 411), (7, 1)] {
        let set = partition(&data, num, len, "n").unwrap();
        let joined: Vec<f64> = set.partitions.concat();
        assert_eq!(joined, data.samples()[..num * len]);
    }
}

#[test]
fn tiled_partition_beats_noise_partition() {
    let block: Vec<f64> = periodic_surrogate(2, 200, RATE, 1).unwrap().into_samples();
    let noise = gaussian_noise(200, 1.0, 77).unwrap().into_samples();
    let data: Vec<f64> = block.iter().copied().cycle().take(1000).collect();
    let data = TimeSeries::new(data).unwrap();
    let set = PartitionSet {
        partitions: vec![block.clone(), noise],
        source_label: "tiled".into(),
    };
    let grid = LengthGrid::new(10, 100, 1).unwrap();
    let scores = score_partitions(&data, &set, grid, Threshold::DEFAULT).unwrap();
    assert!(
        scores[0].score > scores[1].score,
        "{} vs {}",
        scores[0].score,
        scores[1].score
    );
    let sel = select_template(&data, &set, grid, Threshold::DEFAULT).unwrap();
    assert_eq!(sel.partition_index, 0);
    assert_eq!(sel.samples, block);
}

#[test]
fn every_partition_finds_itself() {
    let data = periodic_surrogate(3, 2500, RATE, 4).unwrap();
    let set = partition(&data, 5, 500, "c3").unwrap();
    let grid = LengthGrid::new(10, 200, 1).unwrap();
    for part in &set.partitions {
        let curve = match_curve(part, &data, grid, Threshold::DEFAULT).unwrap();
        assert!(curve.points.iter().all(|p| p.match_count >= 1));
    }
}

#[test]
fn unrelated_noise_does_not_match_long_templates() {
    let grid = LengthGrid::new(30, 60, 5).unwrap();
    for seed in 0..100u64 {
        let data = gaussian_noise(400, 1.0, 10_000 + seed).unwrap();
        let source = gaussian_noise(60, 1.0, 20_000 + seed).unwrap();
        let curve = match_curve(source.samples(), &data, grid, Threshold::DEFAULT).unwrap();
        assert_eq!(curve.total_matches(), 0, "seed {seed}");
    }
}

#[test]
fn surrogate_discrimination_and_suffix_property() {
    let config = DiscriminationConfig {
        num_partitions: 5,
        partition_len: 1000,
        grid: LengthGrid::new(10, 200, 1).unwrap(),
        threshold: Threshold::DEFAULT,
        cross_tolerance: 0,
    };
    let reports = discriminate(&surrogate_classes(0), &config).unwrap();
    assert_eq!(reports.len(), 5);
    for r in &reports {
        assert_eq!(r.cross_curves.len(), 4);
        let k_star = r.minimal_length.expect("discriminative length");
        assert!(k_star <= 64, "{}: {k_star}", r.class_label);
        for (i, p) in r.self_curve.points.iter().enumerate() {
            if p.template_length >= k_star {
                assert!(p.match_count >= 1);
                assert!(r.cross_curves.iter().all(|c| c.points[i].match_count == 0));
            }
        }
        let again = minimal_discriminative_length(&r.self_curve, &r.cross_curves, 0).unwrap();
        assert_eq!(again, Some(k_star));
    }
}

#[test]
fn selection_is_independent_of_thread_count() {
    let classes = surrogate_classes(5);
    let config = DiscriminationConfig {
        num_partitions: 5,
        partition_len: 1000,
        grid: LengthGrid::new(10, 80, 2).unwrap(),
        threshold: Threshold::DEFAULT,
        cross_tolerance: 0,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| discriminate(&classes, &config).unwrap())
    };
    let single = run(1);
    assert_eq!(single, run(4));
    assert_eq!(single, run(3));
}
