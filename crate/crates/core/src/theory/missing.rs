//! Nearest-neighbour spacing law of a spectrum in which each level is
//! observed independently with probability `Φ`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::{check_phi, sigma2_complete, EnsembleClass};
use crate::error::{Error, Result};
use crate::rmt::SpacingFit;

/// Exponents of the constrained spacing family fitted to our own reference
/// ensembles (dense sampler, dim 200, 500 members, seed 20240601, central
/// half, bin 0.05), for orders 1 and 2.
const REFERENCE_MU: [(EnsembleClass, [f64; 2]); 2] = [
    (EnsembleClass::Gue, [7.3455, 14.9491]),
    (EnsembleClass::Gse, [13.6820, 27.6508]),
];

/// Constrained higher-order fits used when none are supplied.
pub fn reference_fits(class: EnsembleClass) -> Vec<SpacingFit> {
    let mu = REFERENCE_MU
        .iter()
        .find(|(c, _)| *c == class)
        .map(|(_, m)| *m)
        .expect("every class listed");
    vec![
        SpacingFit::constrained(1, mu[0]),
        SpacingFit::constrained(2, mu[1]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingLevelParams {
    pub class: EnsembleClass,
    pub phi: f64,
    /// Orders `n < k_gauss` use explicit spacing laws; the rest are Gaussian.
    pub k_gauss: usize,
    /// Last order included.
    pub m_max: usize,
    /// Laws for orders `1..k_gauss`; order 0 is the class surmise.
    pub spacing_fits: Vec<SpacingFit>,
}

impl MissingLevelParams {
    /// `K = 3`, `M = 10` and the reference fits.
    pub fn new(class: EnsembleClass, phi: f64) -> Self {
        MissingLevelParams {
            class,
            phi,
            k_gauss: 3,
            m_max: 10,
            spacing_fits: reference_fits(class),
        }
    }

    pub fn with_fits(mut self, fits: Vec<SpacingFit>) -> Self {
        self.spacing_fits = fits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_phi(self.phi)?;
        if self.k_gauss < 1 || self.k_gauss > self.m_max {
            return Err(Error::Config(format!(
                "need 1 <= K_gauss <= M_max, got K_gauss = {}, M_max = {}",
                self.k_gauss, self.m_max
            )));
        }
        for n in 1..self.k_gauss {
            if !self.spacing_fits.iter().any(|f| f.order == n) {
                return Err(Error::Config(format!("no spacing fit for order {n}")));
            }
        }
        Ok(())
    }
}

/// Evaluator for `p(s)` with the Gaussian variances cached.
#[derive(Debug, Clone)]
pub struct MissingLevelModel {
    phi: f64,
    laws: Vec<SpacingFit>,
    /// `V²(n)` for `n = K..=M`.
    variances: Vec<f64>,
}

impl MissingLevelModel {
    pub fn new(params: &MissingLevelParams) -> Result<Self> {
        params.validate()?;
        let mut laws = vec![params.class.surmise()];
        for n in 1..params.k_gauss {
            laws.push(
                *params
                    .spacing_fits
                    .iter()
                    .find(|f| f.order == n)
                    .expect("validated"),
            );
        }
        let variances = (params.k_gauss..=params.m_max)
            .map(|n| sigma2_complete(params.class, n as f64) - 1.0 / 6.0)
            .collect::<Vec<_>>();
        if let Some(v) = variances.iter().find(|&&v| !(v > 0.0)) {
            return Err(Error::Numeric(format!(
                "non-positive Gaussian variance {v}"
            )));
        }
        Ok(MissingLevelModel {
            phi: params.phi,
            laws,
            variances,
        })
    }

    /// Same laws at another `Φ`.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        check_phi(phi)?;
        Ok(MissingLevelModel {
            phi,
            ..self.clone()
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    fn weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let q = 1.0 - self.phi;
        let k = self.laws.len();
        (0..k + self.variances.len()).map(move |n| (n, if n == 0 { 1.0 } else { q.powi(n as i32) }))
    }

    pub fn pdf(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        let x = s / self.phi;
        let k = self.laws.len();
        let mut total = 0.0;
        for (n, w) in self.weights() {
            if w == 0.0 {
                continue;
            }
            total += w * if n < k {
                self.laws[n].pdf(x)
            } else {
                let v = self.variances[n - k];
                let d = x - n as f64 - 1.0;
                (-d * d / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
            };
        }
        total
    }

    /// `∫₀ˢ p`, in closed form term by term.
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let x = s / self.phi;
        let k = self.laws.len();
        let mut total = 0.0;
        for (n, w) in self.weights() {
            if w == 0.0 {
                continue;
            }
            total += w
                * self.phi
                * if n < k {
                    self.laws[n].cdf(x)
                } else {
                    let r = (2.0 * self.variances[n - k]).sqrt();
                    let c = n as f64 + 1.0;
                    0.5 * (erf((x - c) / r) - erf(-c / r))
                };
        }
        total
    }
}

/// `p(s)` for the given parameters.
pub fn p_missing(params: &MissingLevelParams, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::invalid(format!(
            "spacing must be non-negative, got {s}"
        )));
    }
    Ok(MissingLevelModel::new(params)?.pdf(s))
}
