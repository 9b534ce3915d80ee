//! Share of option sets that contain a labelled look-alike of the answer,
//! random choice versus the selector.

use assoc_bench::graph::ingest_matrix;
use assoc_bench::selector::{audit_ambiguity, AmbiguityLabels, AuditPlan, GaConfig};
use assoc_bench::Result;

fn main() -> Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let graph = ingest_matrix(format!("{fixtures}/graph25.csv"), false)?;
    let labels = std::fs::read_to_string(format!("{fixtures}/ambiguous25.csv")).expect("fixture");
    let ambiguous = AmbiguityLabels::from_csv(&labels, &graph)?;
    let plan = AuditPlan {
        answers: ambiguous.answers(),
        pool: (0..graph.len()).collect(),
        ambiguous,
        option_counts: vec![4, 7, 10],
        repetitions: 10,
        lambda: 1.0,
    };
    let table = audit_ambiguity(&graph, &plan, &GaConfig::default(), 11)?;
    print!("{}", table.to_csv());
    Ok(())
}
