//! Similarity graph from a mask directory, written in the ingestion CSV format
//! and read back.

use assoc_bench::evalkit::heatmap_csv;
use assoc_bench::graph::{build_graph, parse_matrix};
use assoc_bench::mask::load_mask_dir;
use assoc_bench::Result;

fn main() -> Result<()> {
    let masks = load_mask_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/masks"))?;
    let graph = build_graph(&masks)?;
    println!("{} classes, digest {}", graph.len(), graph.digest());

    let mut pairs: Vec<(f64, usize, usize)> = (0..graph.len())
        .flat_map(|i| ((i + 1)..graph.len()).map(move |j| (i, j)))
        .map(|(i, j)| (graph.weight(i, j), i, j))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (w, i, j) in pairs.iter().take(5) {
        println!("{:>9} ~ {:<9} {w:.4}", graph.class_id(*i), graph.class_id(*j));
    }

    let csv = graph.to_csv();
    let back = parse_matrix(&csv, false, "memory")?;
    assert_eq!(back.digest(), graph.digest());

    let subset: Vec<usize> = ["apple", "cat", "rock", "eye", "leaf"]
        .iter()
        .map(|id| graph.index_of(id))
        .collect::<Result<_>>()?;
    print!("{}", heatmap_csv(&graph, &subset)?);
    Ok(())
}
