//! Random-matrix predictions for complete and incomplete spectra.
//!
//! Complete-spectrum curves are built from the two-point cluster function
//! `Y₂(r)` of the class. Incomplete spectra, where each level is observed
//! independently with probability `Φ`, follow from the complete ones by
//! the thinning relation `y₂(r) = Y₂(r/Φ)` measured in the thinned
//! sequence's own mean spacing.

mod estimate;
mod missing;

pub use estimate::{estimate_phi, Measure, PhiEstimate, PhiModel, PHI_MIN};
pub use missing::{p_missing, reference_fits, MissingLevelModel, MissingLevelParams};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rmt::SpacingFit;
use crate::special::{sinc, sinc_prime, sine_integral};

/// Symmetry class selecting every theory formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleClass {
    /// Broken time-reversal invariance (β = 2).
    Gue,
    /// Time-reversal invariance with T² = −1 (β = 4).
    Gse,
}

impl EnsembleClass {
    /// Dyson index β.
    pub fn beta(self) -> u32 {
        match self {
            EnsembleClass::Gue => 2,
            EnsembleClass::Gse => 4,
        }
    }

    /// Wigner-surmise nearest-neighbour law `P(0; s)` of the class,
    /// unit area and unit mean.
    pub fn surmise(self) -> SpacingFit {
        SpacingFit::constrained(0, f64::from(self.beta()))
    }
}

impl fmt::Display for EnsembleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleClass::Gue => "gue",
            EnsembleClass::Gse => "gse",
        })
    }
}

impl FromStr for EnsembleClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gue" => Ok(EnsembleClass::Gue),
            "gse" => Ok(EnsembleClass::Gse),
            other => Err(Error::invalid(format!(
                "unknown ensemble class '{other}' (expected gue or gse)"
            ))),
        }
    }
}

/// Two-point cluster function `Y₂(r)` for unfolded levels.
pub fn cluster_y2(class: EnsembleClass, r: f64) -> f64 {
    let r = r.abs();
    match class {
        EnsembleClass::Gue => {
            let s = sinc(PI * r);
            s * s
        }
        EnsembleClass::Gse => {
            let x = 2.0 * PI * r;
            let s = sinc(x);
            // d/dr sinc(2πr) = 2π sinc'(2πr); ∫₀ʳ sinc(2πt) dt = Si(2πr)/(2π).
            let ds = 2.0 * PI * sinc_prime(x);
            let integral = sine_integral(x) / (2.0 * PI);
            s * s - ds * integral
        }
    }
}

/// Form factor `b(τ)`, the Fourier transform of `Y₂`.
///
/// The symplectic form factor has an integrable logarithmic singularity at
/// `|τ| = 1`; evaluating exactly there returns [`Error::Singular`].
pub fn form_b(class: EnsembleClass, tau: f64) -> Result<f64> {
    let t = tau.abs();
    match class {
        EnsembleClass::Gue => Ok(if t <= 1.0 { 1.0 - t } else { 0.0 }),
        EnsembleClass::Gse => {
            if t >= 2.0 {
                Ok(0.0)
            } else if t == 1.0 {
                Err(Error::Singular(tau))
            } else {
                Ok(1.0 - 0.5 * t + 0.25 * t * (1.0 - t).abs().ln())
            }
        }
    }
}

/// Spectral form factor `K(τ) = 1 − b(τ)`.
pub fn form_k(class: EnsembleClass, tau: f64) -> Result<f64> {
    form_b(class, tau).map(|b| 1.0 - b)
}

const QUAD_TOL: f64 = 1e-12;

fn panels(upper: f64) -> usize {
    (4.0 * upper).ceil().max(1.0) as usize
}

/// Number variance of a complete spectrum,
/// `Σ²(L) = L − 2∫₀ᴸ (L − r) Y₂(r) dr`. Returns 0 for `L ≤ 0`.
pub fn sigma2_complete(class: EnsembleClass, l: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    let integral = quad::integrate_panels(
        |r| (l - r) * cluster_y2(class, r),
        0.0,
        l,
        panels(l),
        QUAD_TOL,
    );
    l - 2.0 * integral
}

/// Spectral rigidity of a complete spectrum,
/// `Δ₃(L) = L/15 − (15L⁴)⁻¹ ∫₀ᴸ (L−r)³(2L² − 9rL − 3r²) Y₂(r) dr`.
/// Returns 0 for `L ≤ 0`.
pub fn delta3_complete(class: EnsembleClass, l: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    let kernel = |r: f64| {
        let d = l - r;
        d * d * d * (2.0 * l * l - 9.0 * r * l - 3.0 * r * r) * cluster_y2(class, r)
    };
    // The kernel integral is O(L⁷); scale the tolerance with it.
    let tol = QUAD_TOL * l.powi(4).max(1e-30);
    let integral = quad::integrate_panels(kernel, 0.0, l, panels(l), tol);
    l / 15.0 - integral / (15.0 * l.powi(4))
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "observed fraction phi = {phi} outside (0, 1]"
        )))
    }
}

/// Number variance of an incomplete spectrum,
/// `σ²(L) = (1 − Φ)L + Φ² Σ²(L/Φ)`.
pub fn sigma2_missing(class: EnsembleClass, phi: f64, l: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok((1.0 - phi) * l + phi * phi * sigma2_complete(class, l / phi))
}

/// Rigidity of an incomplete spectrum,
/// `δ₃(L) = (1 − Φ)L/15 + Φ² Δ₃(L/Φ)`.
pub fn delta3_missing(class: EnsembleClass, phi: f64, l: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok((1.0 - phi) * l / 15.0 + phi * phi * delta3_complete(class, l / phi))
}

/// Ensemble-averaged power spectrum of the `δ_q` sequence of an incomplete
/// spectrum, as a function of `τ̃ = τ/N ∈ (0, 1)`.
pub fn power_missing(class: EnsembleClass, phi: f64, tau_tilde: f64) -> Result<f64> {
    check_phi(phi)?;
    if tau_tilde <= 0.0 || tau_tilde >= 1.0 {
        return Err(Error::Pole(tau_tilde));
    }
    let t = tau_tilde;
    let u = 1.0 - t;
    let k1 = form_k(class, phi * t)?;
    let k2 = form_k(class, phi * u)?;
    let sin = (PI * t).sin();
    Ok(
        phi / (4.0 * PI * PI) * ((k1 - 1.0) / (t * t) + (k2 - 1.0) / (u * u))
            + 1.0 / (4.0 * sin * sin)
            - phi * phi / 12.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gue_cluster_values() {
        assert!((cluster_y2(EnsembleClass::Gue, 0.0) - 1.0).abs() < 1e-15);
        assert!((cluster_y2(EnsembleClass::Gue, 1e-9) - 1.0).abs() < 1e-15);
        // (sin(π/2)/(π/2))² = (2/π)²
        let v = cluster_y2(EnsembleClass::Gue, 0.5);
        assert!((v - 0.405_284_734_569_351_1).abs() < 1e-15, "{v}");
        assert!(cluster_y2(EnsembleClass::Gue, 1.0).abs() < 1e-30);
    }

    #[test]
    fn gse_cluster_values() {
        assert!((cluster_y2(EnsembleClass::Gse, 0.0) - 1.0).abs() < 1e-15);
        // At r = 1 the sinc vanishes and its derivative is 1, leaving −Si(2π)/(2π).
        let expected = -sine_integral(2.0 * PI) / (2.0 * PI);
        assert!((cluster_y2(EnsembleClass::Gse, 1.0) - expected).abs() < 1e-13);
        assert!(expected < -0.2);
    }

    #[test]
    fn cluster_bounds_and_decay() {
        for class in [EnsembleClass::Gue, EnsembleClass::Gse] {
            for i in 1..=2000 {
                let r = i as f64 * 0.005;
                let y = cluster_y2(class, r);
                // R₂ = 1 − Y₂ is a density, so Y₂ ≤ 1 always.
                assert!(y <= 1.0 + 1e-15, "{class} r={r} y={y}");
                if class == EnsembleClass::Gue {
                    assert!(y >= 0.0);
                }
                assert!(y.abs() <= 1.0 + 1e-15);
            }
            // The symplectic tail decays only like cos(2πr)/(4r).
            assert!(cluster_y2(class, 50.0).abs() < 1.0 / 200.0 + 1e-4);
        }
    }

    #[test]
    fn form_factor_values() {
        assert_eq!(form_b(EnsembleClass::Gue, 0.5).unwrap(), 0.5);
        assert_eq!(form_b(EnsembleClass::Gue, -0.25).unwrap(), 0.75);
        assert_eq!(form_b(EnsembleClass::Gue, 1.5).unwrap(), 0.0);
        assert_eq!(form_b(EnsembleClass::Gse, 0.0).unwrap(), 1.0);
        let v = form_b(EnsembleClass::Gse, 0.5).unwrap();
        assert!((v - (0.75 + 0.125 * 0.5f64.ln())).abs() < 1e-15);
        assert!((v - 0.663_357).abs() < 1e-6);
        assert_eq!(form_b(EnsembleClass::Gse, 2.0).unwrap(), 0.0);
        assert_eq!(form_b(EnsembleClass::Gse, -3.0).unwrap(), 0.0);
        assert!(matches!(
            form_b(EnsembleClass::Gse, 1.0),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            form_b(EnsembleClass::Gse, -1.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn form_factor_continuity() {
        for class in [EnsembleClass::Gue, EnsembleClass::Gse] {
            for &edge in &[0.0, 2.0] {
                let lo = form_b(class, edge - 1e-9).unwrap();
                let hi = form_b(class, edge + 1e-9).unwrap();
                assert!((lo - hi).abs() < 1e-7, "{class} at {edge}");
            }
        }
        let lo = form_b(EnsembleClass::Gue, 1.0 - 1e-9).unwrap();
        let hi = form_b(EnsembleClass::Gue, 1.0 + 1e-9).unwrap();
        assert!((lo - hi).abs() < 1e-8);
    }

    #[test]
    fn small_window_limits() {
        for class in [EnsembleClass::Gue, EnsembleClass::Gse] {
            let l = 1e-3;
            assert!((sigma2_complete(class, l) - l).abs() < 2e-6);
            assert!((delta3_complete(class, l) - l / 15.0).abs() < 1e-9);
        }
        assert_eq!(sigma2_complete(EnsembleClass::Gue, 0.0), 0.0);
        assert_eq!(delta3_complete(EnsembleClass::Gse, -1.0), 0.0);
    }

    #[test]
    fn gue_number_variance_against_trapezoid_oracle() {
        // Richardson-refined trapezoid rule, independent of the Kronrod path.
        let l = 1.0;
        let f = |r: f64| (l - r) * cluster_y2(EnsembleClass::Gue, r);
        let trap = |n: usize| {
            let h = l / n as f64;
            let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
            h * (0.5 * (f(0.0) + f(l)) + inner)
        };
        let (t1, t2) = (trap(4096), trap(8192));
        let oracle = l - 2.0 * (t2 + (t2 - t1) / 3.0);
        let v = sigma2_complete(EnsembleClass::Gue, l);
        assert!((v - oracle).abs() < 1e-6, "{v} vs {oracle}");
    }

    #[test]
    fn symplectic_spectrum_is_stiffer() {
        for i in 1..=40 {
            let l = i as f64 * 0.05;
            assert!(
                sigma2_complete(EnsembleClass::Gse, l) < sigma2_complete(EnsembleClass::Gue, l)
            );
        }
    }

    #[test]
    fn missing_reduces_to_complete_at_unit_phi() {
        for class in [EnsembleClass::Gue, EnsembleClass::Gse] {
            for &l in &[0.3, 1.0, 2.5, 5.0] {
                assert_eq!(
                    sigma2_missing(class, 1.0, l).unwrap(),
                    sigma2_complete(class, l)
                );
                assert_eq!(
                    delta3_missing(class, 1.0, l).unwrap(),
                    delta3_complete(class, l)
                );
            }
        }
    }

    #[test]
    fn missing_tends_to_poisson() {
        let phi = 1e-4;
        let l = 2.0;
        let s = sigma2_missing(EnsembleClass::Gse, phi, l).unwrap();
        let d = delta3_missing(EnsembleClass::Gse, phi, l).unwrap();
        assert!((s - l).abs() < 1e-3, "{s}");
        assert!((d - l / 15.0).abs() < 1e-3, "{d}");
    }

    #[test]
    fn invalid_phi_rejected() {
        assert!(sigma2_missing(EnsembleClass::Gue, 0.0, 1.0).is_err());
        assert!(delta3_missing(EnsembleClass::Gue, 1.2, 1.0).is_err());
        assert!(power_missing(EnsembleClass::Gue, -0.1, 0.3).is_err());
    }

    #[test]
    fn power_spectrum_poles() {
        assert!(matches!(
            power_missing(EnsembleClass::Gse, 0.9, 0.0),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            power_missing(EnsembleClass::Gse, 0.9, 1.0),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn power_spectrum_symmetry() {
        for class in [EnsembleClass::Gue, EnsembleClass::Gse] {
            for &phi in &[1.0, 0.95, 0.85, 0.7, 0.4] {
                for i in 1..50 {
                    let t = i as f64 / 100.0;
                    let a = power_missing(class, phi, t).unwrap();
                    let b = power_missing(class, phi, 1.0 - t).unwrap();
                    assert!((a - b).abs() <= 1e-10, "{class} {phi} {t} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn power_spectrum_dual_path() {
        // b(τ) assembled from the series ln(1 − x) = −Σ xⁿ/n instead of ln().
        let b_series = |t: f64| {
            let mut ln = 0.0;
            let mut p = 1.0;
            for n in 1..400 {
                p *= t;
                ln -= p / n as f64;
            }
            1.0 - 0.5 * t + 0.25 * t * ln
        };
        let (phi, t) = (0.7, 0.25);
        let (u, sin) = (1.0 - t, (PI * t).sin());
        let oracle = phi / (4.0 * PI * PI)
            * (-b_series(phi * t) / (t * t) - b_series(phi * u) / (u * u))
            + 1.0 / (4.0 * sin * sin)
            - phi * phi / 12.0;
        let v = power_missing(EnsembleClass::Gse, phi, t).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn power_spectrum_one_over_f() {
        for class in [EnsembleClass::Gue, EnsembleClass::Gse] {
            let (a, b) = (1e-2f64, 1e-1f64);
            let slope = (power_missing(class, 1.0, b).unwrap().ln()
                - power_missing(class, 1.0, a).unwrap().ln())
                / (b.ln() - a.ln());
            assert!((slope + 1.0).abs() < 0.05, "{class}: slope {slope}");
        }
    }

    #[test]
    fn parse_class() {
        assert_eq!("GSE".parse::<EnsembleClass>().unwrap(), EnsembleClass::Gse);
        assert!("goe".parse::<EnsembleClass>().is_err());
        assert_eq!(EnsembleClass::Gue.to_string(), "gue");
    }
}
