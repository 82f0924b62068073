//! Random symplectic quantum graph: solve the secular equation in one band,
//! merge Kramers doublets and unfold with the Weyl density.
//!
//!     cargo run --release --example graph_spectrum -- [seed]

use std::f64::consts::PI;

use missing_levels::qgraph::{find_eigenvalues, random_gse_graph};
use missing_levels::spectra::{spacings, unfold_constant_density, SpectralEnsemble, StatsOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> missing_levels::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(3, |s| s.parse().expect("seed"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, [plus, minus]) = random_gse_graph(&mut rng, 6.68)?;
    println!(
        "{} vertices, {} bonds, total length {:.4} m, sweep pairs {plus:?} / {minus:?}",
        g.vertices().len(),
        g.bonds().len(),
        g.total_length()
    );

    // 60 distinct levels above k = 20.
    let k_max = 20.0 + 60.0 * 2.0 * PI / g.total_length();
    let e = find_eigenvalues(&g, 20.0, k_max, true)?;
    println!(
        "{} raw roots, {} paired, {} distinct levels (Weyl {:.2}), widest doublet {:.1e} spacings",
        e.raw_roots.len(),
        e.paired,
        e.levels.len(),
        e.weyl_expected,
        e.max_pair_gap
    );
    for k in e.levels.values().iter().take(5) {
        println!("  k = {k:.10}");
    }

    let unfolded = unfold_constant_density(&e.levels, e.unfolding_length())?;
    let ens = SpectralEnsemble::new(vec![unfolded], "one band")?;
    let s = &spacings(&ens, 0, &StatsOptions::default())?[0];
    let small = s.iter().filter(|&&x| x < 0.3).count();
    println!(
        "mean spacing {:.3}, spacings below 0.3: {small} of {}",
        s.iter().sum::<f64>() / s.len() as f64,
        s.len()
    );
    Ok(())
}
