//! Sample a GSE ensemble, fit the spacing family for orders 0..=2 and
//! compare the nearest-neighbour histogram with the surmise.
//!
//!     cargo run --release --example sample_ensemble -- [dim] [count]

use missing_levels::rmt::{fit_spacing_orders, sample_ensemble};
use missing_levels::spectra::{spacing_histogram, StatsOptions};
use missing_levels::{EnsembleClass, RandomMatrixSpec};

fn main() -> missing_levels::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let dim = args.next().unwrap_or(200);
    let count = args.next().unwrap_or(100);

    let class = EnsembleClass::Gse;
    let ens = sample_ensemble(&RandomMatrixSpec::new(class, dim, count, 7)?)?;
    println!(
        "{count} members, {} unfolded levels each",
        ens.members()[0].len()
    );

    for f in fit_spacing_orders(&ens, &[0, 1, 2], 0.05, &StatsOptions::default())? {
        println!(
            "order {}: mu = {:.3}  gamma = {:.4}  chi = {:.4}",
            f.order, f.mu, f.gamma, f.chi
        );
    }

    let surmise = class.surmise();
    let h = spacing_histogram(&ens, 0, 0.25, 3.0)?;
    println!("\n    s   histogram   surmise");
    for (s, y, e) in h.density.iter() {
        println!("{s:5.3}  {y:.3} ± {e:.3}  {:.3}", surmise.pdf(s));
    }
    Ok(())
}
