//! Enumerates the prompt grid in all three variants and prints one cell of
//! each, then writes the full fineface_v2 grid as CSV.
//!
//! cargo run --example prompt_grid [-- out.csv]

use ferforge::promptforge::{
    enumerate_grid, planned_counts, write_prompt_csv, FactorSpace, PromptTables, Variant,
};

fn main() -> ferforge::Result<()> {
    let space = FactorSpace::default();
    let tables = PromptTables::default();
    println!("grid cells: {}", space.cardinality());

    for variant in [Variant::Sd, Variant::FinefaceV1, Variant::FinefaceV2] {
        let specs = enumerate_grid(&space, &tables, variant, 42)?;
        let s = &specs[1234];
        println!("\n[{variant}] per class {:?}", planned_counts(&specs));
        println!("{}", s.prompt);
        if let Some(units) = &s.au_vector {
            println!("AUs: {}", ferforge::promptforge::format_au_vector(units));
        }
        if variant == Variant::FinefaceV2 {
            if let Some(path) = std::env::args().nth(1) {
                write_prompt_csv(&specs, &path)?;
                println!("wrote {} rows to {path}", specs.len());
            }
        }
    }
    Ok(())
}
