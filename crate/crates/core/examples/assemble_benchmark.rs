//! Full benchmark assembly on the 225-image fixture, validated and digested.
//!
//!     cargo run --release --example assemble_benchmark -- [out.json]

use assoc_bench::benchkit::{assemble, parse_images, parse_templates, validate, AssemblyConfig};
use assoc_bench::graph::ingest_matrix;
use assoc_bench::Result;

fn main() -> Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let read = |name: &str| std::fs::read_to_string(format!("{fixtures}/{name}")).expect("fixture");
    let graph = ingest_matrix(format!("{fixtures}/graph25.csv"), false)?;
    let images = parse_images(&read("images225.json"))?;
    let templates = parse_templates(&read("templates.json"))?;

    let manifest = assemble(&graph, &images, &templates, &AssemblyConfig::default(), 2024)?;
    for m in [4, 7, 10] {
        println!("{m}T1: {} samples", manifest.samples_for(m).count());
    }
    println!("total {} over {} classes", manifest.samples.len(), manifest.classes.len());
    println!("violations: {}", validate(&manifest).violations.len());
    println!("digest {}", manifest.digest()?);

    let first = &manifest.samples[0];
    println!("{}: {}", first.id, first.question_text);
    for o in &first.options {
        println!("  ({}) {}", o.letter, o.label);
    }
    println!("  answer {}", first.answer_letter);

    if let Some(out) = std::env::args().nth(1) {
        manifest.save(out)?;
    }
    Ok(())
}
