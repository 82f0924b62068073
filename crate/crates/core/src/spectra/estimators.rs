//! Ensemble estimators for unfolded spectra.
//!
//! Spacing statistics drop the first and last `edge_trim` fraction of the
//! levels of each member; window statistics drop the same fraction of its
//! span. Error bars are member-to-member standard errors;
//! correlations between overlapping windows inside one member are not
//! modelled.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{CurveWithErrors, SpectralEnsemble, Unit};
use crate::error::{Error, Result};

/// Tunables shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsOptions {
    /// Fraction of levels discarded at each end of every member.
    pub edge_trim: f64,
    /// Distance between successive window starts, in mean spacings.
    pub stride: f64,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            edge_trim: 0.05,
            stride: 0.25,
        }
    }
}

fn trimmed(values: &[f64], frac: f64) -> &[f64] {
    let cut = (frac * values.len() as f64).floor() as usize;
    if 2 * cut >= values.len() {
        return &values[0..0];
    }
    &values[cut..values.len() - cut]
}

fn require_unfolded(ens: &SpectralEnsemble) -> Result<()> {
    if ens.unit() == Unit::Unfolded {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "estimators need unfolded levels, got {}",
            ens.unit()
        )))
    }
}

/// Mean and standard error of per-member values.
fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Spacings `ε_{i+n+1} − ε_i` of order `n` for each member, after trimming.
pub fn spacings(
    ens: &SpectralEnsemble,
    order: usize,
    opts: &StatsOptions,
) -> Result<Vec<Vec<f64>>> {
    require_unfolded(ens)?;
    ens.members()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let v = trimmed(m.values(), opts.edge_trim);
            if v.len() < order + 2 {
                return Err(Error::invalid(format!(
                    "member {i} has {} levels after trimming, too few for order-{order} spacings",
                    v.len()
                )));
            }
            Ok(v.windows(order + 2).map(|w| w[order + 1] - w[0]).collect())
        })
        .collect()
}

/// Density histogram of spacings and its binning-free cumulant.
#[derive(Debug, Clone)]
pub struct SpacingHistogram {
    /// Normalized density at bin centres.
    pub density: CurveWithErrors,
    /// `I(s)`, the fraction of pooled spacings `≤ s`, at the bin edges.
    pub cumulative: CurveWithErrors,
    /// Number of pooled spacings.
    pub count: usize,
}

pub fn spacing_histogram(
    ens: &SpectralEnsemble,
    order: usize,
    bin_width: f64,
    s_max: f64,
) -> Result<SpacingHistogram> {
    spacing_histogram_with(ens, order, bin_width, s_max, &StatsOptions::default())
}

pub fn spacing_histogram_with(
    ens: &SpectralEnsemble,
    order: usize,
    bin_width: f64,
    s_max: f64,
    opts: &StatsOptions,
) -> Result<SpacingHistogram> {
    if !(bin_width > 0.0) {
        return Err(Error::invalid(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if !(s_max > 0.0) {
        return Err(Error::invalid(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    let per_member = spacings(ens, order, opts)?;
    let bins = ((s_max / bin_width) - 1e-9).ceil().max(1.0) as usize;

    let mut pooled_counts = vec![0usize; bins];
    let mut member_density = vec![vec![0.0; ens.len()]; bins];
    for (m, sp) in per_member.iter().enumerate() {
        let mut counts = vec![0usize; bins];
        for &s in sp {
            let b = (s / bin_width).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
            }
        }
        for b in 0..bins {
            pooled_counts[b] += counts[b];
            member_density[b][m] = counts[b] as f64 / (sp.len() as f64 * bin_width);
        }
    }
    let total: usize = per_member.iter().map(Vec::len).sum();
    let total_f = total as f64;

    let centres: Vec<f64> = (0..bins).map(|b| (b as f64 + 0.5) * bin_width).collect();
    let y: Vec<f64> = pooled_counts
        .iter()
        .map(|&c| c as f64 / (total_f * bin_width))
        .collect();
    let err: Vec<f64> = (0..bins)
        .map(|b| {
            if ens.len() >= 2 {
                mean_and_se(&member_density[b]).1
            } else {
                (pooled_counts[b] as f64).sqrt() / (total_f * bin_width)
            }
        })
        .collect();

    let mut pooled: Vec<f64> = per_member.into_iter().flatten().collect();
    pooled.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (0..=bins).map(|b| b as f64 * bin_width).collect();
    let cum: Vec<f64> = edges
        .iter()
        .map(|&e| pooled.partition_point(|&s| s <= e) as f64 / total_f)
        .collect();
    let cum_err = cum
        .iter()
        .map(|&p| (p * (1.0 - p) / total_f).sqrt())
        .collect();

    Ok(SpacingHistogram {
        density: CurveWithErrors::new(centres, y, err)?,
        cumulative: CurveWithErrors::new(edges, cum, cum_err)?,
        count: total,
    })
}

/// The part of a member that window statistics sample: its span less an
/// `edge_trim` fraction at each end.
///
/// The bounds sit at fixed fractions of the span rather than on a level, so
/// no window is conditioned on having a level at its edge. Anchoring on
/// levels undercounts by about one level per member.
pub fn window_region(levels: &[f64], edge_trim: f64) -> (f64, f64) {
    match levels {
        [a, .., b] => {
            let cut = edge_trim * (b - a);
            (a + cut, b - cut)
        }
        _ => (0.0, -1.0),
    }
}

/// Level counts in the windows `[x, x + L)` inside `region`, with starts
/// `x` on the lattice `stride·ℤ`.
pub fn window_counts(levels: &[f64], region: (f64, f64), l: f64, stride: f64) -> Vec<usize> {
    window_starts(region, l, stride)
        .map(|x| levels.partition_point(|&e| e < x + l) - levels.partition_point(|&e| e < x))
        .collect()
}

fn window_starts((lo, hi): (f64, f64), l: f64, stride: f64) -> impl Iterator<Item = f64> {
    let j0 = (lo / stride).ceil();
    let n = if hi - l >= j0 * stride {
        ((hi - l) / stride - j0).floor() as usize + 1
    } else {
        0
    };
    (0..n).map(move |j| (j0 + j as f64) * stride)
}

type Windowed<'a> = (&'a [f64], (f64, f64));

fn check_grid<'a>(
    ens: &'a SpectralEnsemble,
    grid: &[f64],
    opts: &StatsOptions,
) -> Result<Vec<Windowed<'a>>> {
    require_unfolded(ens)?;
    if !(opts.stride > 0.0) {
        return Err(Error::invalid("window stride must be positive"));
    }
    if let Some(&bad) = grid.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::invalid(format!(
            "window length {bad} must be positive"
        )));
    }
    if !(0.0..0.5).contains(&opts.edge_trim) {
        return Err(Error::invalid(format!(
            "edge trim {} outside [0, 0.5)",
            opts.edge_trim
        )));
    }
    let l_max = grid.iter().cloned().fold(0.0, f64::max);
    ens.members()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let region = window_region(m.values(), opts.edge_trim);
            let span = region.1 - region.0;
            if l_max > 0.5 * span {
                return Err(Error::invalid(format!(
                    "window length {l_max} exceeds half the span {span:.3} of member {i}"
                )));
            }
            Ok((m.values(), region))
        })
        .collect()
}

pub fn number_variance(ens: &SpectralEnsemble, grid: &[f64]) -> Result<CurveWithErrors> {
    number_variance_with(ens, grid, &StatsOptions::default())
}

/// `Σ²(L)`: variance of window counts around the ensemble mean count,
/// averaged over window positions and members.
pub fn number_variance_with(
    ens: &SpectralEnsemble,
    grid: &[f64],
    opts: &StatsOptions,
) -> Result<CurveWithErrors> {
    let members = check_grid(ens, grid, opts)?;
    let mut y = Vec::with_capacity(grid.len());
    let mut err = Vec::with_capacity(grid.len());
    for &l in grid {
        let counts: Vec<Vec<usize>> = members
            .par_iter()
            .map(|&(v, r)| window_counts(v, r, l, opts.stride))
            .collect();
        let (sum, n) = counts
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), &c| (s + c as f64, n + 1));
        let mean = sum / n as f64;
        let per_member: Vec<f64> = counts
            .iter()
            .map(|c| c.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / c.len() as f64)
            .collect();
        let (v, se) = mean_and_se(&per_member);
        y.push(v);
        err.push(se);
    }
    CurveWithErrors::new(grid.to_vec(), y, err)
}

pub fn spectral_rigidity(ens: &SpectralEnsemble, grid: &[f64]) -> Result<CurveWithErrors> {
    spectral_rigidity_with(ens, grid, &StatsOptions::default())
}

/// Least-squares residual of the staircase in `[x, x + L)` against the best
/// straight line, divided by `L`.
fn window_rigidity(levels: &[f64], x: f64, l: f64) -> f64 {
    let lo = levels.partition_point(|&e| e < x);
    let hi = levels.partition_point(|&e| e < x + l);
    let inside = &levels[lo..hi];
    let (mut i0, mut i1, mut i2) = (0.0, 0.0, 0.0);
    for (k, &e) in inside.iter().enumerate() {
        let a = e - x;
        let b = inside.get(k + 1).map_or(l, |&n| n - x);
        let c = (k + 1) as f64;
        i0 += c * (b - a);
        i1 += c * 0.5 * (b * b - a * a);
        i2 += c * c * (b - a);
    }
    let j1 = i1 - 0.5 * l * i0;
    let residual = i2 - i0 * i0 / l - 12.0 * j1 * j1 / (l * l * l);
    residual.max(0.0) / l
}

/// `Δ₃(L)`: mean-square deviation of the staircase from its best-fit line.
pub fn spectral_rigidity_with(
    ens: &SpectralEnsemble,
    grid: &[f64],
    opts: &StatsOptions,
) -> Result<CurveWithErrors> {
    let members = check_grid(ens, grid, opts)?;
    let mut y = Vec::with_capacity(grid.len());
    let mut err = Vec::with_capacity(grid.len());
    for &l in grid {
        let per_member: Vec<f64> = members
            .par_iter()
            .map(|&(v, r)| {
                let (s, n) = window_starts(r, l, opts.stride).fold((0.0, 0usize), |(s, n), x| {
                    (s + window_rigidity(v, x, l), n + 1)
                });
                s / n as f64
            })
            .collect();
        let (v, se) = mean_and_se(&per_member);
        y.push(v);
        err.push(se);
    }
    CurveWithErrors::new(grid.to_vec(), y, err)
}

/// `S(τ)` for `τ = 1..⌊N/2⌋` of one sequence, with
/// `δ_q = ε_{q+1} − ε_1 − q`, `q = 0..N−1`.
pub fn power_spectrum_of(levels: &[f64]) -> Vec<f64> {
    let n = levels.len();
    if n < 2 {
        return Vec::new();
    }
    let delta: Vec<f64> = levels
        .iter()
        .enumerate()
        .map(|(q, &e)| e - levels[0] - q as f64)
        .collect();
    let nf = n as f64;
    (1..=n / 2)
        .map(|tau| {
            let w = -2.0 * PI * tau as f64 / nf;
            let (mut re, mut im) = (0.0, 0.0);
            for (q, &d) in delta.iter().enumerate() {
                let (s, c) = (w * q as f64).sin_cos();
                re += d * c;
                im += d * s;
            }
            (re * re + im * im) / nf
        })
        .collect()
}

fn own_unit_spacing(levels: &[f64]) -> Vec<f64> {
    let n = levels.len();
    if n < 2 {
        return levels.to_vec();
    }
    let mean = (levels[n - 1] - levels[0]) / (n - 1) as f64;
    levels.iter().map(|e| (e - levels[0]) / mean).collect()
}

/// Ensemble power spectrum on the grid `τ̃ = τ/N`.
///
/// Each trimmed member is first rescaled by a constant so that its own
/// mean spacing, first to last level, is exactly 1. For complete spectra
/// this changes nothing beyond `O(ln N / N)`; for thinned ones it removes
/// the random-walk drift of the member's level count, which the missing-level
/// prediction does not contain.
///
/// All members must have the same length; truncation is left to the caller.
pub fn power_spectrum_estimator(
    ens: &SpectralEnsemble,
    opts: &StatsOptions,
) -> Result<CurveWithErrors> {
    require_unfolded(ens)?;
    let n0 = ens.members()[0].len();
    if let Some((i, m)) = ens
        .members()
        .iter()
        .enumerate()
        .find(|(_, m)| m.len() != n0)
    {
        return Err(Error::invalid(format!(
            "power spectrum needs equal member lengths: member 0 has {n0} levels, member {i} has {}",
            m.len()
        )));
    }
    let spectra: Vec<Vec<f64>> = ens
        .members()
        .par_iter()
        .map(|m| power_spectrum_of(&own_unit_spacing(trimmed(m.values(), opts.edge_trim))))
        .collect();
    let n = trimmed(ens.members()[0].values(), opts.edge_trim).len();
    if n < 8 {
        return Err(Error::invalid(format!(
            "power spectrum needs at least 8 levels per member, got {n}"
        )));
    }
    let taus = n / 2;
    let mut y = Vec::with_capacity(taus);
    let mut err = Vec::with_capacity(taus);
    let mut column = vec![0.0; spectra.len()];
    for t in 0..taus {
        for (c, s) in column.iter_mut().zip(&spectra) {
            *c = s[t];
        }
        let (m, se) = mean_and_se(&column);
        y.push(m);
        err.push(se);
    }
    let x = (1..=taus).map(|t| t as f64 / n as f64).collect();
    CurveWithErrors::new(x, y, err)
}
