//! One-parameter least-squares fit of the observed fraction `Φ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::missing::{MissingLevelModel, MissingLevelParams};
use super::{power_missing, sigma2_missing, EnsembleClass};
use crate::error::{Error, Result};
use crate::rmt::{golden_min, SpacingFit};
use crate::spectra::CurveWithErrors;

/// Lower end of the search interval for `Φ`.
pub const PHI_MIN: f64 = 0.3;
const GRID_POINTS: usize = 71;
const GOLDEN_TOL: f64 = 1e-5;
const BOUNDARY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Power spectrum on `τ̃ ∈ (0, ½]`.
    Power,
    /// Number variance on `L ∈ (0, 3]`.
    Sigma2,
    /// Nearest-neighbour spacing density.
    PSpacing,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Power => "power",
            Measure::Sigma2 => "sigma2",
            Measure::PSpacing => "pspacing",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "power" => Ok(Measure::Power),
            "sigma2" => Ok(Measure::Sigma2),
            "pspacing" => Ok(Measure::PSpacing),
            other => Err(Error::invalid(format!(
                "unknown measure '{other}' (expected power, sigma2 or pspacing)"
            ))),
        }
    }
}

/// Theory side of the fit.
#[derive(Debug, Clone)]
pub struct PhiModel {
    pub class: EnsembleClass,
    pub measure: Measure,
    /// Points with `x` above this are ignored.
    pub x_max: Option<f64>,
    spacing: Option<MissingLevelModel>,
}

impl PhiModel {
    pub fn new(class: EnsembleClass, measure: Measure) -> Result<Self> {
        Self::with_fits(class, measure, None)
    }

    /// `fits` overrides the reference higher-order spacing laws used by
    /// [`Measure::PSpacing`].
    pub fn with_fits(
        class: EnsembleClass,
        measure: Measure,
        fits: Option<Vec<SpacingFit>>,
    ) -> Result<Self> {
        let spacing = if measure == Measure::PSpacing {
            let mut params = MissingLevelParams::new(class, 1.0);
            if let Some(f) = fits {
                params = params.with_fits(f);
            }
            Some(MissingLevelModel::new(&params)?)
        } else {
            None
        };
        Ok(PhiModel {
            class,
            measure,
            x_max: None,
            spacing,
        })
    }

    pub fn with_x_max(mut self, x_max: f64) -> Self {
        self.x_max = Some(x_max);
        self
    }

    fn domain(&self) -> (f64, f64) {
        match self.measure {
            Measure::Power => (0.0, 0.5),
            Measure::Sigma2 => (0.0, 3.0),
            Measure::PSpacing => (-f64::MIN_POSITIVE, f64::INFINITY),
        }
    }

    /// Theory value at `x` for fraction `phi`.
    pub fn predict(&self, phi: f64, x: f64) -> Result<f64> {
        match self.measure {
            Measure::Power => power_missing(self.class, phi, x),
            Measure::Sigma2 => sigma2_missing(self.class, phi, x),
            Measure::PSpacing => Ok(self
                .spacing
                .as_ref()
                .expect("built for pspacing")
                .with_phi(phi)?
                .pdf(x)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub phi: f64,
    /// From the curvature of the weighted loss at the minimum.
    pub std_error: f64,
    /// The minimum lies on the edge of `[PHI_MIN, 1]`.
    pub at_boundary: bool,
}

struct Point {
    x: f64,
    y: f64,
    w: f64,
}

fn prepare(data: &CurveWithErrors, model: &PhiModel) -> Result<Vec<Point>> {
    let (lo, hi) = model.domain();
    let cut = model.x_max.unwrap_or(f64::INFINITY);
    let kept: Vec<(f64, f64, f64)> = data.iter().filter(|&(x, _, _)| x <= cut).collect();
    if kept.is_empty() {
        return Err(Error::invalid("no data points inside the fit window"));
    }
    if let Some(&(x, _, _)) = kept.iter().find(|&&(x, _, _)| !(x > lo && x <= hi)) {
        return Err(Error::invalid(format!(
            "x = {x} outside the {} domain ({lo}, {hi}]",
            model.measure
        )));
    }
    let positive: Vec<f64> = kept.iter().map(|p| p.2).filter(|&e| e > 0.0).collect();
    let floor = positive.iter().cloned().fold(f64::INFINITY, f64::min);
    let log_space = model.measure == Measure::Power;
    kept.into_iter()
        .map(|(x, y, e)| {
            // Zero errors fall back to unit weights, or to the smallest
            // positive error when only some are zero.
            let e = if positive.is_empty() {
                if log_space {
                    y.abs()
                } else {
                    1.0
                }
            } else if e > 0.0 {
                e
            } else {
                floor
            };
            if log_space {
                if !(y > 0.0) {
                    return Err(Error::invalid(format!(
                        "power spectrum value {y} at x = {x} is not positive"
                    )));
                }
                Ok(Point {
                    x,
                    y: y.ln(),
                    w: (y / e).powi(2),
                })
            } else {
                Ok(Point {
                    x,
                    y,
                    w: e.powi(-2),
                })
            }
        })
        .collect()
}

fn loss(points: &[Point], model: &PhiModel, phi: f64) -> Result<f64> {
    let log_space = model.measure == Measure::Power;
    let mut total = 0.0;
    for p in points {
        let f = model.predict(phi, p.x)?;
        let f = if log_space {
            if !(f > 0.0) {
                return Err(Error::Numeric(format!(
                    "non-positive prediction {f} at x = {}",
                    p.x
                )));
            }
            f.ln()
        } else {
            f
        };
        total += p.w * (p.y - f).powi(2);
    }
    Ok(total)
}

/// Weighted least-squares estimate of `Φ ∈ [PHI_MIN, 1]`: a grid scan
/// followed by golden-section refinement.
pub fn estimate_phi(data: &CurveWithErrors, model: &PhiModel) -> Result<PhiEstimate> {
    let points = prepare(data, model)?;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| PHI_MIN + (1.0 - PHI_MIN) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let losses = grid
        .iter()
        .map(|&p| loss(&points, model, p))
        .collect::<Result<Vec<_>>>()?;
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numeric("non-finite loss".into()));
    }
    let (best, &lmin) = losses
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let lmax = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lmax - lmin <= 1e-12 * (1.0 + lmin.abs()) {
        return Err(Error::EstimationFailure(format!(
            "loss is flat in phi over [{PHI_MIN}, 1]; the data do not constrain the observed fraction"
        )));
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(GRID_POINTS - 1)];
    // Errors inside the bracket surface as an infinite loss; the grid already
    // evaluated cleanly, so this only guards against pathological inputs.
    let f = |p: f64| loss(&points, model, p).unwrap_or(f64::INFINITY);
    let mut phi = golden_min(f, a, b, GOLDEN_TOL);
    if f(phi) > lmin {
        phi = grid[best];
    }

    let h = 1e-3;
    let (p0, p1, p2) = if phi + h > 1.0 {
        (1.0 - 2.0 * h, 1.0 - h, 1.0)
    } else if phi - h < PHI_MIN {
        (PHI_MIN, PHI_MIN + h, PHI_MIN + 2.0 * h)
    } else {
        (phi - h, phi, phi + h)
    };
    let curvature = (f(p0) - 2.0 * f(p1) + f(p2)) / (h * h);
    let std_error = if curvature > 0.0 {
        (2.0 / curvature).sqrt()
    } else {
        f64::INFINITY
    };
    let at_boundary = phi - PHI_MIN < BOUNDARY_TOL || 1.0 - phi < BOUNDARY_TOL;
    Ok(PhiEstimate {
        phi,
        std_error,
        at_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::MissingLevelParams;

    fn theory_curve(
        class: EnsembleClass,
        measure: Measure,
        phi: f64,
        grid: Vec<f64>,
    ) -> CurveWithErrors {
        let m = PhiModel::new(class, measure).unwrap();
        CurveWithErrors::from_fn(grid, |x| m.predict(phi, x)).unwrap()
    }

    #[test]
    fn recovers_phi_from_theory_curves() {
        let cases = [
            (
                Measure::Sigma2,
                (1..=30).map(|i| 0.1 * i as f64).collect::<Vec<_>>(),
            ),
            (Measure::Power, (1..=50).map(|i| 0.01 * i as f64).collect()),
            (
                Measure::PSpacing,
                (0..50).map(|i| 0.05 + 0.1 * i as f64).collect(),
            ),
        ];
        for class in [EnsembleClass::Gue, EnsembleClass::Gse] {
            for (measure, grid) in &cases {
                let data = theory_curve(class, *measure, 0.85, grid.clone());
                let est = estimate_phi(&data, &PhiModel::new(class, *measure).unwrap()).unwrap();
                assert!(
                    (est.phi - 0.85).abs() < 1e-3,
                    "{class} {measure}: {}",
                    est.phi
                );
                assert!(!est.at_boundary);
            }
        }
    }

    #[test]
    fn complete_spectrum_is_flagged_at_boundary() {
        let data = theory_curve(
            EnsembleClass::Gse,
            Measure::Sigma2,
            1.0,
            (1..=20).map(|i| 0.1 * i as f64).collect(),
        );
        let est = estimate_phi(
            &data,
            &PhiModel::new(EnsembleClass::Gse, Measure::Sigma2).unwrap(),
        )
        .unwrap();
        assert!(est.at_boundary && (est.phi - 1.0).abs() < 1e-3);
    }

    #[test]
    fn flat_loss_fails() {
        // Near L → 0 every fraction predicts σ² ≈ L.
        let data = CurveWithErrors::new(vec![1e-9], vec![1e-9], vec![1.0]).unwrap();
        let r = estimate_phi(
            &data,
            &PhiModel::new(EnsembleClass::Gue, Measure::Sigma2).unwrap(),
        );
        assert!(matches!(r, Err(Error::EstimationFailure(_))), "{r:?}");
    }

    #[test]
    fn rejects_out_of_domain_grids() {
        let data = CurveWithErrors::new(vec![0.3, 0.7], vec![1.0, 1.0], vec![0.1, 0.1]).unwrap();
        assert!(estimate_phi(
            &data,
            &PhiModel::new(EnsembleClass::Gue, Measure::Power).unwrap()
        )
        .is_err());
        let ok = estimate_phi(
            &data,
            &PhiModel::new(EnsembleClass::Gue, Measure::Power)
                .unwrap()
                .with_x_max(0.5),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn standard_error_scales_with_noise() {
        let grid: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
        let m = PhiModel::new(EnsembleClass::Gse, Measure::Sigma2).unwrap();
        let y: Vec<f64> = grid.iter().map(|&l| m.predict(0.8, l).unwrap()).collect();
        let se = |e: f64| {
            let c = CurveWithErrors::new(grid.clone(), y.clone(), vec![e; grid.len()]).unwrap();
            estimate_phi(&c, &m).unwrap().std_error
        };
        let ratio = se(0.02) / se(0.01);
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn measure_parsing() {
        assert_eq!("PSpacing".parse::<Measure>().unwrap(), Measure::PSpacing);
        assert!("p".parse::<Measure>().is_err());
        let _ = MissingLevelParams::new(EnsembleClass::Gue, 0.5);
    }
}
