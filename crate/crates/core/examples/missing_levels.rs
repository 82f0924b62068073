//! Remove levels at random from a GUE ensemble and compare the measured
//! number variance and rigidity with the incomplete-spectrum curves.
//!
//!     cargo run --release --example missing_levels -- [phi]

use missing_levels::rmt::sample_ensemble;
use missing_levels::spectra::{decimate, number_variance, spectral_rigidity};
use missing_levels::theory::{delta3_missing, sigma2_missing};
use missing_levels::{EnsembleClass, RandomMatrixSpec};

fn main() -> missing_levels::Result<()> {
    let phi: f64 = std::env::args()
        .nth(1)
        .map_or(0.8, |s| s.parse().expect("phi"));
    let class = EnsembleClass::Gue;
    let ens = sample_ensemble(&RandomMatrixSpec::new(class, 400, 200, 11)?)?;
    let thinned = ens.try_map(|m, s| decimate(s, phi, 1000 + m as u64))?;
    let kept: usize = thinned.members().iter().map(|m| m.len()).sum();
    let all: usize = ens.members().iter().map(|m| m.len()).sum();
    println!(
        "kept {kept} of {all} levels ({:.4})",
        kept as f64 / all as f64
    );

    let grid: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
    let s2 = number_variance(&thinned, &grid)?;
    let d3 = spectral_rigidity(&thinned, &grid)?;
    println!("\n   L   Σ² data          theory   Δ₃ data          theory");
    for i in 0..grid.len() {
        let l = grid[i];
        println!(
            "{l:4.1}  {:.4} ± {:.4}  {:.4}   {:.4} ± {:.4}  {:.4}",
            s2.y()[i],
            s2.err()[i],
            sigma2_missing(class, phi, l)?,
            d3.y()[i],
            d3.err()[i],
            delta3_missing(class, phi, l)?
        );
    }
    Ok(())
}
