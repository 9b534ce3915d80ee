//! Mock models through the evaluation harness: scorecards, random baselines,
//! set comparison and correlation.

use std::collections::BTreeMap;

use assoc_bench::benchkit::{assemble, parse_images, parse_templates, AssemblyConfig};
use assoc_bench::evalkit::{
    compare_sets, pearson, random_baseline, render_prompt, run_eval, score, scorecards_csv,
    BaselineMode, EvalOptions, OracleAdapter, Scorecard, UniformRandomAdapter, DEFAULT_BAND,
};
use assoc_bench::graph::ingest_matrix;
use assoc_bench::selector::GaConfig;
use assoc_bench::Result;

fn main() -> Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let read = |name: &str| std::fs::read_to_string(format!("{fixtures}/{name}")).expect("fixture");
    let graph = ingest_matrix(format!("{fixtures}/graph25.csv"), false)?;
    let images = parse_images(&read("images225.json"))?;
    let templates = parse_templates(&read("templates.json"))?;
    let config = AssemblyConfig {
        ga: GaConfig {
            generations: 60,
            ..GaConfig::default()
        },
        ..AssemblyConfig::default()
    };
    let manifest = assemble(&graph, &images[..45], &templates, &config, 5)?;
    println!("{}", render_prompt(&manifest.samples[0]));

    let options = EvalOptions::default();
    let oracle = score(&run_eval(&manifest, &OracleAdapter::new(&manifest), &options)?, &manifest)?;
    let random = score(&run_eval(&manifest, &UniformRandomAdapter::new(1), &options)?, &manifest)?;
    let analytic = random_baseline(&manifest, BaselineMode::Analytic, 1, 0)?;
    let sampled = random_baseline(&manifest, BaselineMode::Sampled, 200, 3)?;
    print!("{}", scorecards_csv(&[oracle.clone(), random.clone(), analytic.clone(), sampled])?);

    let mut sets = BTreeMap::new();
    sets.insert("Ori".to_string(), Scorecard::from_accuracies("demo", &[(4, 53.33), (7, 39.41), (10, 32.15)])?);
    sets.insert("Int".to_string(), random);
    print!("{}", compare_sets(&sets, &analytic, DEFAULT_BAND)?.to_csv());

    let cognition = [45.0, 38.0, 51.0, 30.0];
    let association = [27.3, 23.8, 31.6, 19.2];
    println!("pearson {:.4}", pearson(&cognition, &association)?);
    Ok(())
}
