//! Recover the observed fraction from the power spectrum of a thinned
//! GSE ensemble, and from its number variance.
//!
//!     cargo run --release --example fit_phi -- [phi]

use missing_levels::rmt::sample_ensemble;
use missing_levels::spectra::{decimate, number_variance, power_spectrum_estimator, StatsOptions};
use missing_levels::theory::{estimate_phi, Measure, PhiModel};
use missing_levels::{EnsembleClass, RandomMatrixSpec, Sampler};

fn main() -> missing_levels::Result<()> {
    let phi: f64 = std::env::args()
        .nth(1)
        .map_or(0.85, |s| s.parse().expect("phi"));
    let class = EnsembleClass::Gse;
    let spec = RandomMatrixSpec::new(class, 1000, 100, 5)?.with_sampler(Sampler::Tridiagonal);
    let ens = sample_ensemble(&spec)?;
    let thinned = ens
        .try_map(|m, s| decimate(s, phi, 77 + m as u64))?
        .truncated_to_min();

    let power = power_spectrum_estimator(&thinned, &StatsOptions::default())?;
    let est = estimate_phi(
        &power,
        &PhiModel::new(class, Measure::Power)?.with_x_max(0.5),
    )?;
    println!(
        "power spectrum:  phi_hat = {:.4} ± {:.4}  (true {phi})",
        est.phi, est.std_error
    );

    let grid: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
    let s2 = number_variance(&thinned, &grid)?;
    let est = estimate_phi(&s2, &PhiModel::new(class, Measure::Sigma2)?)?;
    println!(
        "number variance: phi_hat = {:.4} ± {:.4}",
        est.phi, est.std_error
    );
    Ok(())
}
