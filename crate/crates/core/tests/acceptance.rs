//! Runs every acceptance criterion and prints one line per criterion.

use sascomp::acceptance::{run_all, AcceptanceConfig};

fn main() {
    let results = run_all(&AcceptanceConfig::default());
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
