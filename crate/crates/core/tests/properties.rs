use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use assoc_bench::benchkit::{
    assemble, BenchmarkManifest, ImageEntry, QuestionTemplate, AssemblyConfig,
};
use assoc_bench::curation::{filter_masks, pick_relevant_mask, CurationConfig, OverlayRanking, RegenScoreRecord};
use assoc_bench::evalkit::{heatmap_csv, parse_answer, pearson};
use assoc_bench::graph::{parse_matrix, stats_of, OptionSet, SimilarityGraph};
use assoc_bench::selector::{exhaustive_select, ga_select, GaConfig, Genome};

fn graph_from(n: usize, seed: u64) -> SimilarityGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![1.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.gen();
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    SimilarityGraph::new((0..n).map(|i| format!("c{i}")).collect(), w).unwrap()
}

fn quick_ga(seed: u64) -> GaConfig {
    GaConfig {
        generations: 40,
        restarts: 2,
        ..GaConfig::default()
    }
    .with_seed(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ingest_symmetrizes_within_tolerance(n in 2usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut text = String::from("class");
        for j in 0..n {
            text.push_str(&format!(",k{j}"));
        }
        text.push('\n');
        let base: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..0.99)).collect();
        for i in 0..n {
            text.push_str(&format!("k{i}"));
            for j in 0..n {
                let v = if i == j {
                    1.0
                } else {
                    base[i.min(j) * n + i.max(j)] + if i < j { rng.gen_range(0.0..5e-7) } else { 0.0 }
                };
                text.push_str(&format!(",{v}"));
            }
            text.push('\n');
        }
        let g = parse_matrix(&text, false, "prop").unwrap();
        for i in 0..n {
            prop_assert_eq!(g.weight(i, i), 1.0);
            for j in 0..n {
                prop_assert_eq!(g.weight(i, j), g.weight(j, i));
                prop_assert!((0.0..=1.0).contains(&g.weight(i, j)));
            }
        }
        let again = parse_matrix(&g.to_csv(), false, "prop").unwrap();
        prop_assert_eq!(again.digest(), g.digest());
    }

    #[test]
    fn stats_invariant_under_relabeling(n in 3usize..12, seed in any::<u64>(), lambda in 0.0f64..5.0) {
        let g = graph_from(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let m = rng.gen_range(2..=n);
        let answer = rng.gen_range(0..n);
        let distractors: Vec<usize> = (0..n).filter(|&i| i != answer).take(m - 1).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
        // perm[old] = new label
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[perm[i] * n + perm[j]] = g.weight(i, j);
            }
        }
        let relabeled = SimilarityGraph::new((0..n).map(|i| format!("r{i}")).collect(), w).unwrap();
        let a = stats_of(&g, &OptionSet::new(answer, distractors.clone(), n).unwrap(), lambda);
        let b = stats_of(
            &relabeled,
            &OptionSet::new(perm[answer], distractors.iter().map(|&d| perm[d]).collect(), n).unwrap(),
            lambda,
        );
        prop_assert_eq!(a.s_value.to_bits(), b.s_value.to_bits());
        prop_assert_eq!(a.variance.to_bits(), b.variance.to_bits());
        prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn repair_always_exact(bits in proptest::collection::vec(any::<bool>(), 1..150), seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let ones = ((bits.len() as f64) * frac).floor() as usize;
        let mut g = Genome::from_bits(&bits);
        g.repair(ones, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(g.count_ones(), ones);
        let original_ones = bits.iter().filter(|&&b| b).count();
        // Repair only moves in one direction.
        for (i, &b) in bits.iter().enumerate() {
            if ones <= original_ones && !b {
                prop_assert!(!g.bit(i));
            }
            if ones >= original_ones && b {
                prop_assert!(g.bit(i));
            }
        }
    }

    #[test]
    fn ga_seed_determinism_and_bounds(n in 5usize..10, seed in any::<u64>(), lambda in 0.0f64..3.0) {
        let g = graph_from(n, seed);
        let m = 2 + (seed as usize % (n - 2));
        let a = ga_select(&g, 0, m, lambda, &quick_ga(seed)).unwrap();
        let b = ga_select(&g, 0, m, lambda, &quick_ga(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        let exact = exhaustive_select(&g, 0, m, lambda).unwrap();
        prop_assert!(a.stats.objective >= exact.stats.objective);
        prop_assert_eq!(a.option_set.option_count(), m);
        prop_assert!(!a.option_set.distractors().contains(&0));
    }

    #[test]
    fn curation_idempotent_and_monotone(
        scores in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 8), 0..40),
        t1 in 0.5f64..0.99,
        bump in 0.0f64..0.2,
    ) {
        let records: Vec<RegenScoreRecord> = scores
            .into_iter()
            .enumerate()
            .map(|(i, probs)| RegenScoreRecord { mask_id: format!("m{i}"), class_id: "c".into(), probs })
            .collect();
        let low = CurationConfig { retain_threshold: t1, ..CurationConfig::default() };
        let high = CurationConfig { retain_threshold: (t1 + bump).min(0.999), ..CurationConfig::default() };
        let kept = filter_masks(&records, &low).unwrap();
        let subset: Vec<RegenScoreRecord> = records.iter().filter(|r| kept.retained.contains(&r.mask_id)).cloned().collect();
        prop_assert_eq!(&filter_masks(&subset, &low).unwrap().retained, &kept.retained);
        let strict = filter_masks(&records, &high).unwrap();
        prop_assert!(strict.retained.iter().all(|id| kept.retained.contains(id)));
        prop_assert_eq!(kept.retained.len() + kept.rejected.len(), records.len());
    }

    #[test]
    fn relevant_mask_ignores_lower_appends(
        scores in proptest::collection::vec(0.0f64..1.0, 1..10),
        extra in proptest::collection::vec(0.0f64..1.0, 0..5),
    ) {
        let ids: Vec<String> = (0..scores.len()).map(|i| format!("m{i}")).collect();
        let ranking = OverlayRanking { image_id: "img".into(), candidate_mask_ids: ids.clone(), scores: scores.clone() };
        let best = pick_relevant_mask(&ranking).unwrap().to_string();
        let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut longer = ranking.clone();
        for (k, e) in extra.iter().enumerate() {
            longer.candidate_mask_ids.push(format!("x{k}"));
            longer.scores.push(e * top * 0.999);
        }
        prop_assert_eq!(pick_relevant_mask(&longer).unwrap(), best.as_str());
    }

    #[test]
    fn pearson_affine_behaviour(
        pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..50),
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Ok(r) = pearson(&x, &y) {
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let ys: Vec<f64> = y.iter().map(|v| a * v - b).collect();
            prop_assert!((pearson(&xs, &y).unwrap() - r).abs() < 1e-9);
            prop_assert!((pearson(&x, &ys).unwrap() - r).abs() < 1e-9);
            let neg: Vec<f64> = x.iter().map(|v| -a * v).collect();
            prop_assert!((pearson(&neg, &y).unwrap() + r).abs() < 1e-9);
        }
    }

    #[test]
    fn heatmap_round_trips_to_four_decimals(n in 2usize..10, seed in any::<u64>(), rescale in any::<bool>()) {
        let base = graph_from(n, seed);
        let g = if rescale {
            let raw: Vec<String> = (0..n * n).map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j { "1".to_string() } else { format!("{}", 2.0 * base.weight(i, j) - 1.0) }
            }).collect();
            let mut text = String::from("class");
            for j in 0..n {
                text.push_str(&format!(",c{j}"));
            }
            text.push('\n');
            for i in 0..n {
                text.push_str(&format!("c{i},{}\n", raw[i * n..(i + 1) * n].join(",")));
            }
            parse_matrix(&text, true, "prop").unwrap()
        } else {
            base
        };
        let subset: Vec<usize> = (0..n).collect();
        let back = parse_matrix(&heatmap_csv(&g, &subset).unwrap(), false, "heatmap").unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((back.weight(i, j) - g.weight(i, j)).abs() <= 5e-5 + 1e-12);
            }
        }
    }

    #[test]
    fn parse_answer_idempotent(raw in "[A-Za-z(). :]{0,12}", m in 2usize..=10) {
        if let Some(c) = parse_answer(&raw, m) {
            prop_assert_eq!(parse_answer(&c.to_string(), m), Some(c));
            prop_assert!(((c as u8 - b'A') as usize) < m);
        }
    }
}

fn templates() -> Vec<QuestionTemplate> {
    ["Which shape matches the {object}?", "The {object} looks like what?", "Pick the best match for the {object}."]
        .iter()
        .enumerate()
        .map(|(i, t)| QuestionTemplate::new(format!("t{i}"), *t).unwrap())
        .collect()
}

fn images(g: &SimilarityGraph, count: usize) -> Vec<ImageEntry> {
    (0..count)
        .map(|i| ImageEntry {
            image_ref: format!("img{i}.png"),
            answer_class: g.class_id(i % g.len()).to_string(),
            object: "cloud".into(),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn manifest_round_trip_is_byte_identical(seed in any::<u64>(), n in 6usize..10) {
        let g = graph_from(n, seed);
        let cfg = AssemblyConfig {
            option_counts: vec![3, 5],
            ga: GaConfig { generations: 10, restarts: 1, ..GaConfig::default() },
            ..AssemblyConfig::default()
        };
        let m = assemble(&g, &images(&g, 4), &templates(), &cfg, seed).unwrap();
        let text = m.to_json().unwrap();
        let back = BenchmarkManifest::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
        prop_assert_eq!(back, m);
    }
}

/// Equal-tailed acceptance interval for a binomial(n, p) count at level alpha.
fn binomial_interval(n: u64, p: f64, alpha: f64) -> (u64, u64) {
    let mut pmf = Vec::new();
    let mut log_c = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        pmf.push((log_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp());
    }
    let (mut lo, mut acc) = (0, 0.0);
    while acc + pmf[lo as usize] <= alpha / 2.0 {
        acc += pmf[lo as usize];
        lo += 1;
    }
    let (mut hi, mut acc) = (n, 0.0);
    while acc + pmf[hi as usize] <= alpha / 2.0 {
        acc += pmf[hi as usize];
        hi -= 1;
    }
    (lo, hi)
}

#[test]
fn answer_position_is_uniform() {
    let g = graph_from(8, 77);
    let cfg = AssemblyConfig {
        option_counts: vec![4],
        ga: GaConfig { generations: 5, restarts: 1, ..GaConfig::default() },
        ..AssemblyConfig::default()
    };
    let m = assemble(&g, &images(&g, 400), &templates(), &cfg, 31).unwrap();
    let n = m.samples.len() as u64;
    assert!(n >= 1000);
    let (lo, hi) = binomial_interval(n, 0.25, 0.01);
    for letter in ['A', 'B', 'C', 'D'] {
        let count = m.samples.iter().filter(|s| s.answer_letter == letter).count() as u64;
        assert!((lo..=hi).contains(&count), "{letter}: {count} outside {lo}..={hi}");
    }
}

#[test]
fn assembly_never_exceeds_oracle_answer_similarity() {
    for seed in 0..6 {
        let g = graph_from(8, 500 + seed);
        let cfg = AssemblyConfig {
            option_counts: vec![4],
            ..AssemblyConfig::default()
        };
        let m = assemble(&g, &images(&g, 8), &templates(), &cfg, seed).unwrap();
        for s in &m.samples {
            let answer = g.index_of(s.answer_label().unwrap()).unwrap();
            let best = exhaustive_select(&g, answer, 4, cfg.lambda).unwrap();
            let cap = best
                .option_set
                .distractors()
                .iter()
                .map(|&d| g.weight(answer, d))
                .fold(f64::NEG_INFINITY, f64::max);
            for o in &s.options {
                let idx = g.index_of(&o.label).unwrap();
                if idx != answer {
                    assert!(g.weight(answer, idx) <= cap, "sample {} option {}", s.id, o.label);
                }
            }
        }
    }
}
