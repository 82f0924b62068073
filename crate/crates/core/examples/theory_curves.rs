//! Tabulate the incomplete-spectrum predictions for a few observed fractions.
//!
//!     cargo run --release --example theory_curves -- [gue|gse]

use missing_levels::theory::{p_missing, power_missing, sigma2_missing, MissingLevelParams};
use missing_levels::EnsembleClass;

fn main() -> missing_levels::Result<()> {
    let class: EnsembleClass = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "gse".into())
        .parse()?;
    let phis = [1.0, 0.95, 0.85, 0.7];

    println!("p(s), {class}");
    for i in 0..=12 {
        let s = 0.25 * i as f64;
        let row: Vec<String> = phis
            .iter()
            .map(|&phi| {
                p_missing(&MissingLevelParams::new(class, phi), s).map(|p| format!("{p:.4}"))
            })
            .collect::<Result<_, _>>()?;
        println!("{s:5.2}  {}", row.join("  "));
    }

    println!("\nΣ²(L)");
    for l in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let row: Vec<String> = phis
            .iter()
            .map(|&phi| sigma2_missing(class, phi, l).map(|v| format!("{v:.4}")))
            .collect::<Result<_, _>>()?;
        println!("{l:5.1}  {}", row.join("  "));
    }

    println!("\n<P(τ̃)>");
    for t in [0.01, 0.05, 0.1, 0.25, 0.5] {
        let row: Vec<String> = phis
            .iter()
            .map(|&phi| power_missing(class, phi, t).map(|v| format!("{v:9.3}")))
            .collect::<Result<_, _>>()?;
        println!("{t:5.2}  {}", row.join("  "));
    }
    Ok(())
}
