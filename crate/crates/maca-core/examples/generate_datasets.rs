//! Regenerates the bundled synthetic datasets under a target directory
//! (default `data/synthetic`). The committed files are exactly this
//! program's output; rerun it after changing the generators.

use std::fs;
use std::path::PathBuf;

use maca_core::io::synth::{coding_set, promoter_set, structure_demo_pair, structure_set};
use maca_core::io::{write_annotations, write_fasta};

const SEED: u64 = 20240501;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/synthetic".into())
        .into();
    fs::create_dir_all(&dir)?;

    for (stem, set) in [
        ("promoter", promoter_set(SEED)),
        ("coding", coding_set(SEED)),
        ("structure", structure_set(SEED)),
    ] {
        fs::write(dir.join(format!("{stem}.fasta")), write_fasta(&set.records))?;
        fs::write(
            dir.join(format!("{stem}.annot")),
            write_annotations(&set.annotations),
        )?;
        let manifest = set.manifest(stem);
        fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&manifest)? + "\n",
        )?;
        println!("wrote {stem} ({} records)", set.records.len());
    }

    let (base, base_structure, targets) = structure_demo_pair(SEED);
    fs::write(dir.join("ss_base.fasta"), write_fasta(&[base]))?;
    fs::write(
        dir.join("ss_base_structure.fasta"),
        write_fasta(&[base_structure]),
    )?;
    fs::write(dir.join("ss_targets.fasta"), write_fasta(&targets))?;
    println!("wrote structure-prediction demo pair");
    Ok(())
}
