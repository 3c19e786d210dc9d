//! Writes a synthetic seer-csv dataset drawn from a randomly perturbed bank.
//!
//! ```text
//! cargo run --example synthetic_dataset -- <out.csv> [count] [seed] [noise]
//! ```

use std::path::PathBuf;

use nfseer::bank::{default_specs, BankSettings};
use nfseer::dataset::save_seer_csv;
use nfseer::synthetic::{generate_projects, known_bank, Perturbation, ProjectDraw};

fn main() -> nfseer::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "synthetic.csv".into()));
    let count = args.next().map_or(99, |s| s.parse().expect("count"));
    let seed = args.next().map_or(7, |s| s.parse().expect("seed"));
    let noise = args.next().map_or(0.0, |s| s.parse().expect("noise"));
    let truth = known_bank(
        &default_specs(),
        Perturbation::default(),
        seed,
        &BankSettings::default(),
    )?;
    let draw = ProjectDraw {
        count,
        noise,
        ..ProjectDraw::default()
    };
    let projects = generate_projects(&truth, &draw, seed.wrapping_add(1))?;
    save_seer_csv(&projects, &out)?;
    println!("wrote {} projects to {}", projects.len(), out.display());
    Ok(())
}
