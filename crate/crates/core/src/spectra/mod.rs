//! Level sequences, unfolding, decimation and the data-side estimators.

mod estimators;
pub mod io;

pub use estimators::{
    number_variance, number_variance_with, power_spectrum_estimator, power_spectrum_of,
    spacing_histogram, spacing_histogram_with, spacings, spectral_rigidity, spectral_rigidity_with,
    window_counts, window_region, SpacingHistogram, StatsOptions,
};

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    /// Wavenumber `k` [1/m].
    Wavenumber,
    /// Frequency `ν` [Hz].
    Frequency,
    /// Dimensionless, unit mean spacing.
    Unfolded,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Wavenumber => "wavenumber",
            Unit::Frequency => "frequency",
            Unit::Unfolded => "unfolded",
        })
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wavenumber" => Ok(Unit::Wavenumber),
            "frequency" => Ok(Unit::Frequency),
            "unfolded" => Ok(Unit::Unfolded),
            other => Err(Error::invalid(format!("unknown unit '{other}'"))),
        }
    }
}

/// An ordered list of levels with unit and completeness metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSequence {
    values: Vec<f64>,
    unit: Unit,
    phi: Option<f64>,
    provenance: String,
}

impl LevelSequence {
    /// Values must be finite and strictly increasing.
    pub fn new(values: Vec<f64>, unit: Unit) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite level {bad}")));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "levels must be strictly increasing (index {}: {} then {})",
                i,
                values[i],
                values[i + 1]
            )));
        }
        Ok(LevelSequence {
            values,
            unit,
            phi: None,
            provenance: String::new(),
        })
    }

    pub fn with_phi(mut self, phi: Option<f64>) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    /// Observed fraction, when known.
    pub fn phi(&self) -> Option<f64> {
        self.phi
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample mean spacing over the whole sequence.
    pub fn mean_spacing(&self) -> Option<f64> {
        match self.values.as_slice() {
            [first, .., last] => Some((last - first) / (self.values.len() - 1) as f64),
            _ => None,
        }
    }

    /// Checks the unfolded-unit invariant (mean spacing within 5% of 1).
    pub fn check_unfolded(&self) -> Result<()> {
        if self.unit != Unit::Unfolded {
            return Err(Error::invalid(format!(
                "expected unfolded levels, found {}",
                self.unit
            )));
        }
        match self.mean_spacing() {
            Some(d) if (d - 1.0).abs() <= 0.05 => Ok(()),
            Some(d) => Err(Error::invalid(format!(
                "unfolded mean spacing {d:.4} deviates from 1 by more than 5%"
            ))),
            None => Err(Error::invalid("fewer than two levels")),
        }
    }

    /// The first `n` levels.
    pub fn truncated(&self, n: usize) -> LevelSequence {
        LevelSequence {
            values: self.values[..n.min(self.values.len())].to_vec(),
            ..self.clone()
        }
    }

    fn rescaled(&self, values: Vec<f64>, factor: f64, phi: f64) -> LevelSequence {
        LevelSequence {
            values: values.into_iter().map(|v| v * factor).collect(),
            unit: self.unit,
            phi: Some(self.phi.unwrap_or(1.0) * phi),
            provenance: self.provenance.clone(),
        }
    }
}

/// A non-empty collection of level sequences sharing one unit.
#[derive(Debug, Clone)]
pub struct SpectralEnsemble {
    members: Vec<LevelSequence>,
    label: String,
}

impl SpectralEnsemble {
    pub fn new(members: Vec<LevelSequence>, label: impl Into<String>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::invalid("ensemble has no members"))?;
        if let Some(m) = members.iter().find(|m| m.unit != first.unit) {
            return Err(Error::invalid(format!(
                "mixed units in ensemble: {} and {}",
                first.unit, m.unit
            )));
        }
        Ok(SpectralEnsemble {
            members,
            label: label.into(),
        })
    }

    pub fn members(&self) -> &[LevelSequence] {
        &self.members
    }

    pub fn into_members(self) -> Vec<LevelSequence> {
        self.members
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn unit(&self) -> Unit {
        self.members[0].unit
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Apply `f` to every member, keeping the label.
    pub fn try_map<F>(&self, f: F) -> Result<SpectralEnsemble>
    where
        F: Fn(usize, &LevelSequence) -> Result<LevelSequence>,
    {
        let members = self
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| f(i, m))
            .collect::<Result<Vec<_>>>()?;
        SpectralEnsemble::new(members, self.label.clone())
    }

    /// Truncate every member to the shortest member's length.
    pub fn truncated_to_min(&self) -> SpectralEnsemble {
        let n = self
            .members
            .iter()
            .map(LevelSequence::len)
            .min()
            .unwrap_or(0);
        SpectralEnsemble {
            members: self.members.iter().map(|m| m.truncated(n)).collect(),
            label: self.label.clone(),
        }
    }
}

/// A grid with values and per-point standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveWithErrors {
    x: Vec<f64>,
    y: Vec<f64>,
    err: Vec<f64>,
}

impl CurveWithErrors {
    pub fn new(x: Vec<f64>, y: Vec<f64>, err: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != err.len() {
            return Err(Error::invalid(format!(
                "curve columns differ in length ({}, {}, {})",
                x.len(),
                y.len(),
                err.len()
            )));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("curve grid must be strictly increasing"));
        }
        Ok(CurveWithErrors { x, y, err })
    }

    /// A theory curve: `f` sampled on `x`, zero errors.
    pub fn from_fn<F: Fn(f64) -> Result<f64>>(x: Vec<f64>, f: F) -> Result<Self> {
        let y = x.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
        let err = vec![0.0; x.len()];
        CurveWithErrors::new(x, y, err)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn err(&self) -> &[f64] {
        &self.err
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.err)
            .map(|((&x, &y), &e)| (x, y, e))
    }

    /// Keep the points whose `x` satisfies `keep`.
    pub fn filter<F: Fn(f64) -> bool>(&self, keep: F) -> CurveWithErrors {
        let mut out = CurveWithErrors {
            x: Vec::new(),
            y: Vec::new(),
            err: Vec::new(),
        };
        for (x, y, e) in self.iter().filter(|p| keep(p.0)) {
            out.x.push(x);
            out.y.push(y);
            out.err.push(e);
        }
        out
    }
}

/// Unfold a spectrum of constant mean density `2𝓛/c` (frequency) or
/// `𝓛/π` (wavenumber) to unit mean spacing.
pub fn unfold_constant_density(
    seq: &LevelSequence,
    total_optical_length: f64,
) -> Result<LevelSequence> {
    if !(total_optical_length > 0.0) {
        return Err(Error::invalid(format!(
            "total optical length must be positive, got {total_optical_length}"
        )));
    }
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let factor = match seq.unit {
        Unit::Frequency => 2.0 * total_optical_length / SPEED_OF_LIGHT,
        Unit::Wavenumber => total_optical_length / std::f64::consts::PI,
        Unit::Unfolded => return Err(Error::invalid("sequence is already unfolded")),
    };
    Ok(LevelSequence {
        values: seq.values.iter().map(|v| v * factor).collect(),
        unit: Unit::Unfolded,
        phi: seq.phi,
        provenance: seq.provenance.clone(),
    })
}

/// How levels are removed by [`decimate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Thinning {
    /// Each level kept independently with probability `phi`.
    #[default]
    Bernoulli,
    /// Exactly `round(phi·N)` levels kept, chosen uniformly.
    FixedCount,
}

/// Bernoulli thinning with observation probability `phi`, rescaled by `phi`
/// so the survivors keep unit mean spacing.
pub fn decimate(seq: &LevelSequence, phi: f64, seed: u64) -> Result<LevelSequence> {
    decimate_with(seq, phi, seed, Thinning::Bernoulli)
}

pub fn decimate_with(
    seq: &LevelSequence,
    phi: f64,
    seed: u64,
    mode: Thinning,
) -> Result<LevelSequence> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::invalid(format!("phi = {phi} outside (0, 1]")));
    }
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if phi == 1.0 {
        return Ok(seq.rescaled(seq.values.clone(), 1.0, 1.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kept: Vec<f64> = match mode {
        Thinning::Bernoulli => seq
            .values
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < phi)
            .collect(),
        Thinning::FixedCount => {
            let n = seq.len();
            let k = ((phi * n as f64).round() as usize).min(n);
            let mut idx = index::sample(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| seq.values[i]).collect()
        }
    };
    if kept.is_empty() {
        return Err(Error::invalid("decimation removed every level"));
    }
    Ok(seq.rescaled(kept, phi, phi))
}

/// Remove the listed indices and rescale to unit mean spacing; the
/// observed fraction becomes `1 − |indices|/N`.
pub fn decimate_systematic(seq: &LevelSequence, remove_indices: &[usize]) -> Result<LevelSequence> {
    let n = seq.len();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let mut drop = vec![false; n];
    for &i in remove_indices {
        if i >= n {
            return Err(Error::invalid(format!(
                "index {i} out of range for {n} levels"
            )));
        }
        if drop[i] {
            return Err(Error::invalid(format!("index {i} listed twice")));
        }
        drop[i] = true;
    }
    if remove_indices.len() == n {
        return Err(Error::invalid(
            "systematic removal would delete every level",
        ));
    }
    let phi = 1.0 - remove_indices.len() as f64 / n as f64;
    let kept = seq
        .values
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(&v, _)| v)
        .collect();
    Ok(seq.rescaled(kept, phi, phi))
}
