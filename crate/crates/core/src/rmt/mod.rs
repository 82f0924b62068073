//! Gaussian unitary and symplectic ensembles, semicircle unfolding and the
//! spacing-model fits.

mod fit;
mod tridiag;

pub(crate) use fit::golden_min;
pub use fit::{fit_spacing_model, SpacingFit};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{spacing_histogram_with, LevelSequence, SpectralEnsemble, StatsOptions, Unit};
use crate::theory::EnsembleClass;

/// How members are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// Full complex Hermitian matrix (`2N × 2N` for GSE), dense eigensolver.
    #[default]
    Dense,
    /// Tridiagonal β-Hermite model with the same eigenvalue law; eigenvalues
    /// only, `O(N²)` per member.
    Tridiagonal,
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Dense => "dense",
            Sampler::Tridiagonal => "tridiagonal",
        })
    }
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dense" => Ok(Sampler::Dense),
            "tridiagonal" => Ok(Sampler::Tridiagonal),
            other => Err(Error::invalid(format!("unknown sampler '{other}'"))),
        }
    }
}

/// Ensemble parameters. `dim` counts distinct levels, so a GSE member is a
/// `2·dim` complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomMatrixSpec {
    pub class: EnsembleClass,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampler: Sampler,
}

/// Fraction of the unfolded spectrum kept around the centre.
pub const CENTRAL_FRACTION: f64 = 0.5;

impl RandomMatrixSpec {
    pub fn new(class: EnsembleClass, dim: usize, count: usize, seed: u64) -> Result<Self> {
        let spec = RandomMatrixSpec {
            class,
            dim,
            count,
            seed,
            sampler: Sampler::Dense,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::invalid(format!(
                "matrix dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if self.count < 1 {
            return Err(Error::invalid("ensemble needs at least one member"));
        }
        Ok(())
    }

    /// Semicircle radius of the distinct-level density.
    pub fn radius(&self) -> f64 {
        2.0 * (self.dim as f64).sqrt()
    }

    fn rng(&self, member: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(member as u64);
        rng
    }

    fn check_member(&self, member: usize) -> Result<()> {
        self.validate()?;
        if member >= self.count {
            return Err(Error::invalid(format!(
                "member {member} out of range for count {}",
                self.count
            )));
        }
        Ok(())
    }
}

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sd * z
}

fn complex_normal(rng: &mut ChaCha8Rng, sd: f64) -> Complex64 {
    Complex64::new(normal(rng, sd), normal(rng, sd))
}

/// The dense matrix for one member.
///
/// GUE: diagonal `N(0, 1)`, off-diagonal real and imaginary parts `N(0, ½)`.
/// GSE: `[[A, B], [−B̄, Ā]]` with `A` Hermitian and `B` antisymmetric;
/// quaternion components have variance `¼` off the diagonal and `½` on it.
/// Both give the semicircle on `[−2√N, 2√N]`.
pub fn sample_matrix(spec: &RandomMatrixSpec, member: usize) -> Result<DMatrix<Complex64>> {
    spec.check_member(member)?;
    let n = spec.dim;
    let mut rng = spec.rng(member);
    Ok(match spec.class {
        EnsembleClass::Gue => {
            let mut h = DMatrix::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = Complex64::new(normal(&mut rng, 1.0), 0.0);
                for j in i + 1..n {
                    let z = complex_normal(&mut rng, 0.5f64.sqrt());
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
            h
        }
        EnsembleClass::Gse => {
            let mut h = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                let d = Complex64::new(normal(&mut rng, 0.5f64.sqrt()), 0.0);
                h[(i, i)] = d;
                h[(n + i, n + i)] = d;
                for j in i + 1..n {
                    let a = complex_normal(&mut rng, 0.5);
                    let b = complex_normal(&mut rng, 0.5);
                    h[(i, j)] = a;
                    h[(j, i)] = a.conj();
                    h[(n + i, n + j)] = a.conj();
                    h[(n + j, n + i)] = a;
                    h[(i, n + j)] = b;
                    h[(j, n + i)] = -b;
                    h[(n + j, i)] = b.conj();
                    h[(n + i, j)] = -b.conj();
                }
            }
            h
        }
    })
}

/// Sorted eigenvalues of the member, one per Kramers doublet for GSE.
pub fn raw_eigenvalues(spec: &RandomMatrixSpec, member: usize) -> Result<Vec<f64>> {
    spec.check_member(member)?;
    let eigen_err = |reason: String| Error::Eigen {
        seed: spec.seed,
        member,
        reason,
    };
    let mut ev: Vec<f64> = match spec.sampler {
        Sampler::Dense => sample_matrix(spec, member)?
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect(),
        Sampler::Tridiagonal => {
            let (mut d, mut e) = beta_hermite(spec, member);
            tridiag::eigenvalues(&mut d, &mut e).map_err(eigen_err)?;
            d
        }
    };
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(eigen_err("non-finite eigenvalue".into()));
    }
    ev.sort_by(f64::total_cmp);
    if spec.class == EnsembleClass::Gse && spec.sampler == Sampler::Dense {
        ev = kramers_dedup(&ev, spec.dim).map_err(eigen_err)?;
    }
    Ok(ev)
}

/// Diagonal and off-diagonal of the β-Hermite model, scaled so the density
/// matches the dense normalization.
fn beta_hermite(spec: &RandomMatrixSpec, member: usize) -> (Vec<f64>, Vec<f64>) {
    let n = spec.dim;
    let beta = f64::from(spec.class.beta());
    let mut rng = spec.rng(member);
    let sd = (2.0 / beta).sqrt();
    let d: Vec<f64> = (0..n).map(|_| normal(&mut rng, sd)).collect();
    let mut e: Vec<f64> = (1..n)
        .map(|i| {
            let chi2 = ChiSquared::new(beta * (n - i) as f64).expect("positive degrees of freedom");
            (chi2.sample(&mut rng) / beta).sqrt()
        })
        .collect();
    e.push(0.0);
    (d, e)
}

/// Pairs adjacent sorted eigenvalues of a `2N` self-dual matrix.
fn kramers_dedup(sorted: &[f64], n: usize) -> std::result::Result<Vec<f64>, String> {
    if sorted.len() != 2 * n {
        return Err(format!(
            "expected {} eigenvalues, got {}",
            2 * n,
            sorted.len()
        ));
    }
    let mean_spacing = (sorted[2 * n - 1] - sorted[0]) / (n - 1) as f64;
    let tol = 1e-8 * mean_spacing;
    let mut out = Vec::with_capacity(n);
    for (i, pair) in sorted.chunks_exact(2).enumerate() {
        let gap = pair[1] - pair[0];
        if gap > tol {
            return Err(format!(
                "Kramers pair {i} split by {gap:.3e} (tolerance {tol:.3e})"
            ));
        }
        out.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(out)
}

/// Integrated semicircle density with `n` levels on `[−radius, radius]`.
pub fn semicircle_count(x: f64, radius: f64, n: usize) -> f64 {
    let u = (x / radius).clamp(-1.0, 1.0);
    n as f64 * (0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / std::f64::consts::PI)
}

/// Unfolds sorted distinct eigenvalues and keeps the central half.
pub fn unfold_semicircle(eigenvalues: &[f64], radius: f64) -> Vec<f64> {
    let n = eigenvalues.len();
    let lo = ((1.0 - CENTRAL_FRACTION) * 0.5 * n as f64).round() as usize;
    let hi = n - lo;
    eigenvalues[lo..hi]
        .iter()
        .map(|&x| semicircle_count(x, radius, n))
        .collect()
}

/// One unfolded member: central half of the spectrum, unit mean spacing.
pub fn sample_spectrum(spec: &RandomMatrixSpec, member: usize) -> Result<LevelSequence> {
    let ev = raw_eigenvalues(spec, member)?;
    let values = unfold_semicircle(&ev, spec.radius());
    LevelSequence::new(values, Unit::Unfolded)
        .map_err(|e| Error::Eigen {
            seed: spec.seed,
            member,
            reason: e.to_string(),
        })
        .map(|s| {
            s.with_phi(Some(1.0)).with_provenance(format!(
                "{} {} dim={} seed={} member={member}",
                spec.class, spec.sampler, spec.dim, spec.seed
            ))
        })
}

/// All `count` members, in member order regardless of thread count.
pub fn sample_ensemble(spec: &RandomMatrixSpec) -> Result<SpectralEnsemble> {
    spec.validate()?;
    let members = (0..spec.count)
        .into_par_iter()
        .map(|m| sample_spectrum(spec, m))
        .collect::<Result<Vec<_>>>()?;
    SpectralEnsemble::new(
        members,
        format!(
            "{} dim={} count={} seed={}",
            spec.class, spec.dim, spec.count, spec.seed
        ),
    )
}

/// Histogram and fit spacings of each requested order.
pub fn fit_spacing_orders(
    ens: &SpectralEnsemble,
    orders: &[usize],
    bin_width: f64,
    opts: &StatsOptions,
) -> Result<Vec<SpacingFit>> {
    orders
        .iter()
        .map(|&n| {
            let s_max = 2.5 * (n as f64 + 1.0) + 2.0;
            let h = spacing_histogram_with(ens, n, bin_width, s_max, opts)?;
            fit_spacing_model(&h.density, n)
        })
        .collect()
}
