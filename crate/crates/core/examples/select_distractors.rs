//! Distractor selection for one answer with the genetic search and the
//! exhaustive oracle.

use assoc_bench::graph::ingest_matrix;
use assoc_bench::selector::{exhaustive_select, ga_select, GaConfig};
use assoc_bench::Result;

fn main() -> Result<()> {
    let graph = ingest_matrix(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/graph25.csv"), false)?;
    let answer = graph.index_of("cat")?;
    for m in [4, 7] {
        let ga = ga_select(&graph, answer, m, 1.0, &GaConfig::default().with_seed(7))?;
        let exact = exhaustive_select(&graph, answer, m, 1.0)?;
        let names = |ds: &[usize]| ds.iter().map(|&d| graph.class_id(d)).collect::<Vec<_>>().join(", ");
        println!("m={m}");
        println!(
            "  ga     F={:.6} S={:.4} var={:.4} converged at {} [{}]",
            ga.stats.objective,
            ga.stats.s_value,
            ga.stats.variance,
            ga.converged_at,
            names(ga.option_set.distractors())
        );
        println!(
            "  oracle F={:.6} S={:.4} var={:.4} [{}]",
            exact.stats.objective,
            exact.stats.s_value,
            exact.stats.variance,
            names(exact.option_set.distractors())
        );
    }
    Ok(())
}
