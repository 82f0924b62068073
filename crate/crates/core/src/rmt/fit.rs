//! The spacing-model family `P̃(s) = γ s^μ exp(−χ s²)` and its fit to
//! histograms of higher-order spacing distributions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::spectra::CurveWithErrors;

/// Fitted parameters of `γ s^μ exp(−χ s²)` for spacings of order `n`
/// (`n = 0` nearest neighbours, `n = 1` next-nearest, ...).
///
/// `gamma`, `mu`, `chi` are the constrained parameters (unit area, mean
/// `n + 1`); `free` holds the unconstrained least-squares estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingFit {
    pub order: usize,
    pub gamma: f64,
    pub mu: f64,
    pub chi: f64,
    pub residual: f64,
    pub free: Option<[f64; 3]>,
}

impl SpacingFit {
    /// The member of the family with exponent `mu`, unit area and mean `order + 1`.
    pub fn constrained(order: usize, mu: f64) -> Self {
        let (gamma, chi) = project(order, mu);
        SpacingFit {
            order,
            gamma,
            mu,
            chi,
            residual: 0.0,
            free: None,
        }
    }

    pub fn pdf(&self, s: f64) -> f64 {
        model(self.gamma, self.mu, self.chi, s)
    }

    /// `∫₀ˢ P̃`, via the regularized lower incomplete gamma function.
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let a = 0.5 * (self.mu + 1.0);
        self.area() * gamma_lr(a, self.chi * s * s)
    }

    pub fn area(&self) -> f64 {
        moment(self.gamma, self.mu, self.chi, 0)
    }

    pub fn mean(&self) -> f64 {
        moment(self.gamma, self.mu, self.chi, 1) / self.area()
    }
}

fn model(gamma: f64, mu: f64, chi: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    gamma * s.powf(mu) * (-chi * s * s).exp()
}

/// `∫₀^∞ s^k γ s^μ e^{−χs²} ds = γ Γ((μ+k+1)/2) / (2 χ^{(μ+k+1)/2})`.
fn moment(gamma_: f64, mu: f64, chi: f64, k: i32) -> f64 {
    let a = 0.5 * (mu + f64::from(k) + 1.0);
    gamma_ * gamma(a) / (2.0 * chi.powf(a))
}

/// `(γ, χ)` giving unit area and mean `order + 1` for exponent `mu`.
fn project(order: usize, mu: f64) -> (f64, f64) {
    let a = 0.5 * (mu + 1.0);
    let ratio = gamma(a + 0.5) / gamma(a);
    let mean = order as f64 + 1.0;
    let chi = (ratio / mean).powi(2);
    let gamma_ = 2.0 * chi.powf(a) / gamma(a);
    (gamma_, chi)
}

const MAX_ITER: usize = 200;

struct Data<'a> {
    x: &'a [f64],
    y: &'a [f64],
    w: Vec<f64>,
}

impl Data<'_> {
    fn loss(&self, gamma_: f64, mu: f64, chi: f64) -> f64 {
        self.x
            .iter()
            .zip(self.y)
            .zip(&self.w)
            .map(|((&x, &y), &w)| {
                let r = y - model(gamma_, mu, chi, x);
                w * r * r
            })
            .sum()
    }
}

/// Fit the spacing family to a normalized histogram of order-`order` spacings.
///
/// The loss is Poisson-weighted least squares: bin variances are taken
/// proportional to the bin density. A free three-parameter
/// Levenberg–Marquardt fit in `(ln γ, μ, ln χ)` is followed by a constrained
/// refit of `μ` alone, with `(γ, χ)` fixed by unit area and mean `order + 1`.
pub fn fit_spacing_model(hist: &CurveWithErrors, order: usize) -> Result<SpacingFit> {
    let x = hist.x();
    let y = hist.y();
    if x.len() < 4 {
        return Err(Error::invalid(
            "histogram needs at least four bins to fit three parameters",
        ));
    }
    let peak = y.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::invalid("histogram is identically zero"));
    }
    let floor = 1e-3 * peak;
    let data = Data {
        x,
        y,
        w: y.iter().map(|&v| 1.0 / v.max(floor)).collect(),
    };

    // Initial guess: μ from the level-repulsion order of higher spacings,
    // χ from the histogram mean.
    let area: f64 = trapezoid(x, y);
    let mean = if area > 0.0 {
        trapezoid(x, &x.iter().zip(y).map(|(a, b)| a * b).collect::<Vec<_>>()) / area
    } else {
        order as f64 + 1.0
    };
    let mu0 = 4.0 * (order as f64 + 1.0);
    let (_, chi_unit) = project(0, mu0);
    let chi0 = chi_unit / (mean * mean).max(1e-6);
    let gamma0 = area * 2.0 * chi0.powf(0.5 * (mu0 + 1.0)) / gamma(0.5 * (mu0 + 1.0));

    let free = levenberg_marquardt(&data, [gamma0.ln(), mu0, chi0.ln()])?;
    let [g, m, c] = free;
    let free_params = [g.exp(), m, c.exp()];

    let mu = golden_min(
        |mu| {
            let (g, c) = project(order, mu);
            data.loss(g, mu, c)
        },
        (free_params[1] - 3.0).max(0.05),
        free_params[1] + 3.0,
        1e-8,
    );
    let (gamma_, chi) = project(order, mu);
    Ok(SpacingFit {
        order,
        gamma: gamma_,
        mu,
        chi,
        residual: data.loss(gamma_, mu, chi),
        free: Some(free_params),
    })
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    // Bin centres on a uniform grid: a midpoint sum.
    if x.len() < 2 {
        return 0.0;
    }
    let h = x[1] - x[0];
    y.iter().sum::<f64>() * h
}

fn levenberg_marquardt(data: &Data<'_>, start: [f64; 3]) -> Result<[f64; 3]> {
    let eval = |p: &[f64; 3]| data.loss(p[0].exp(), p[1], p[2].exp());
    let residuals = |p: &[f64; 3]| -> Vec<f64> {
        let (g, m, c) = (p[0].exp(), p[1], p[2].exp());
        data.x
            .iter()
            .zip(data.y)
            .zip(&data.w)
            .map(|((&x, &y), &w)| w.sqrt() * (y - model(g, m, c, x)))
            .collect()
    };

    let mut p = start;
    let mut cost = eval(&p);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITER {
        let r = residuals(&p);
        // Forward-difference Jacobian of the model (residual = y − model).
        let mut jac = [vec![0.0; r.len()], vec![0.0; r.len()], vec![0.0; r.len()]];
        for (k, col) in jac.iter_mut().enumerate() {
            let h = 1e-7 * p[k].abs().max(1.0);
            let mut q = p;
            q[k] += h;
            let rq = residuals(&q);
            for i in 0..r.len() {
                col[i] = -(rq[i] - r[i]) / h;
            }
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] = jac[a].iter().zip(&jac[b]).map(|(u, v)| u * v).sum();
            }
            jtr[a] = jac[a].iter().zip(&r).map(|(u, v)| u * v).sum();
        }

        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] *= 1.0 + lambda;
            }
            let Some(step) = solve3(m, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            if trial[1] <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let c = eval(&trial);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                p = trial;
                cost = c;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-12 {
                    return Ok(p);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No downhill step at any damping: a stationary point.
            return Ok(p);
        }
    }
    let (g, m, c) = (p[0].exp(), p[1], p[2].exp());
    Err(Error::FitFailure {
        iterations: MAX_ITER,
        best_gamma: g,
        best_mu: m,
        best_chi: c,
        best_residual: cost,
    })
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if !d.is_finite() || d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for row in 0..3 {
            mk[row][k] = b[row];
        }
        *o = det(&mk) / d;
    }
    Some(out)
}

pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
