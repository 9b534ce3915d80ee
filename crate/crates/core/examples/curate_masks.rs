//! Representativeness filtering of sampled masks, allowlist merge and the
//! overlay pick.

use assoc_bench::curation::{
    filter_masks, merge_allowlist, parse_allowlist, pick_relevant_mask, read_rankings,
    read_records_jsonl, sample_count_mismatches, CurationConfig,
};
use assoc_bench::Result;

fn main() -> Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let records = read_records_jsonl(format!("{fixtures}/regen_scores.jsonl"))?;
    let config = CurationConfig::default();
    let report = filter_masks(&records, &config)?;
    println!(
        "{} records: {} retained, {} rejected",
        records.len(),
        report.retained.len(),
        report.rejected.len()
    );
    assert!(sample_count_mismatches(&records, &config).is_empty());

    let allow = parse_allowlist(&std::fs::read_to_string(format!("{fixtures}/allowlist.txt")).expect("fixture"));
    let kept = merge_allowlist(&report.retained, &allow);
    println!("after allowlist: {}", kept.len());
    print!("{}", report.rejections_csv().lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();

    for ranking in read_rankings(format!("{fixtures}/rankings"))? {
        println!("{} -> {}", ranking.image_id, pick_relevant_mask(&ranking)?);
    }
    Ok(())
}
