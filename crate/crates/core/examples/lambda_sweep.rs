//! How the variance weight trades answer similarity against option spread.

use assoc_bench::graph::ingest_matrix;
use assoc_bench::selector::lambda_sweep;
use assoc_bench::Result;

fn main() -> Result<()> {
    let graph = ingest_matrix(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/graph25.csv"), false)?;
    let lambdas = [0.0, 0.5, 1.0, 2.0, 5.0];
    let mut table = lambda_sweep(&graph, graph.index_of("apple")?, 4, &lambdas)?;
    table.extend(lambda_sweep(&graph, graph.index_of("eye")?, 4, &lambdas)?);
    print!("{}", table.to_csv());
    Ok(())
}
