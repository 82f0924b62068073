//! Bond scattering matrix `S_B(k) = D(k) T` and the roots of
//! `ζ(k) = det[1 − S_B(k)]`.
//!
//! Roots are located with an exact counting function. Each eigenphase of the
//! unitary `S_B` increases monotonically with `k`, so the number of roots
//! below `k` is `(Θ(k) − Σ_j θ_j) / 2π` up to a constant, where
//! `Θ(k) = arg det S_B(k)` continued analytically and `θ_j ∈ [0, 2π)` are
//! the principal eigenphases. Refining on this integer isolates every root,
//! including exactly degenerate ones.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{GraphSpec, Orientation, VertexKind};
use crate::error::{Error, Result};
use crate::spectra::{LevelSequence, Unit};

/// Cayley-transform rotations tried in turn when `1 + e^{iα}S` is close to
/// singular.
const CAYLEY_ALPHAS: [f64; 4] = [0.0, 0.9, 2.1, -1.3];
const CAYLEY_MAX: f64 = 1e3;
const ROOT_RTOL: f64 = 1e-12;
const PAIR_TOL: f64 = 1e-6;

/// Directed bond `2b` runs `i → j` along bond `b`, `2b + 1` runs `j → i`.
fn incoming(port: (usize, usize)) -> usize {
    let (b, end) = port;
    if end == 1 {
        2 * b
    } else {
        2 * b + 1
    }
}

fn outgoing(port: (usize, usize)) -> usize {
    let (b, end) = port;
    if end == 1 {
        2 * b + 1
    } else {
        2 * b
    }
}

/// `k`-independent pieces of `S_B`.
struct Secular {
    t: DMatrix<Complex64>,
    lengths: Vec<f64>,
    phases: Vec<f64>,
    phase_sum: f64,
    arg_det_t: f64,
    max_length: f64,
}

impl Secular {
    fn new(g: &GraphSpec) -> Self {
        let n = 2 * g.bonds().len();
        let mut t = DMatrix::zeros(n, n);
        for v in g.vertices() {
            let ports = g.ports(v.id);
            let p = ports.len();
            for (a, &pin) in ports.iter().enumerate() {
                for (c, &pout) in ports.iter().enumerate() {
                    let sigma = match &v.kind {
                        VertexKind::Neumann => 2.0 / p as f64 - if a == c { 1.0 } else { 0.0 },
                        VertexKind::Circulator { orientation, .. } => {
                            let target = match orientation {
                                Orientation::Cyclic => (a + 1) % 3,
                                Orientation::Anticyclic => (a + 2) % 3,
                            };
                            if c == target {
                                1.0
                            } else {
                                0.0
                            }
                        }
                    };
                    t[(outgoing(pout), incoming(pin))] = Complex64::new(sigma, 0.0);
                }
            }
        }
        let mut lengths = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        for b in g.bonds() {
            lengths.extend([b.length, b.length]);
            phases.extend([b.phase_ij, b.phase_ji]);
        }
        let arg_det_t = t.clone().lu().determinant().arg();
        Secular {
            max_length: lengths.iter().cloned().fold(0.0, f64::max),
            phase_sum: phases.iter().sum(),
            t,
            lengths,
            phases,
            arg_det_t,
        }
    }

    fn matrix(&self, k: f64) -> DMatrix<Complex64> {
        let mut s = self.t.clone();
        for (r, (l, ph)) in self.lengths.iter().zip(&self.phases).enumerate() {
            let d = Complex64::from_polar(1.0, k * l + ph);
            for c in 0..s.ncols() {
                s[(r, c)] *= d;
            }
        }
        s
    }

    /// Continuous total phase `Θ(k)`.
    fn total_phase(&self, k: f64) -> f64 {
        k * self.lengths.iter().sum::<f64>() + self.phase_sum + self.arg_det_t
    }

    /// The root count (from an arbitrary fixed origin) and the eigenphase nearest `0 mod 2π`, wrapped to `(−π, π]`.
    fn probe(&self, k: f64) -> Result<(i64, f64)> {
        let theta = principal_eigenphases(&self.matrix(k))?;
        let n = ((self.total_phase(k) - theta.iter().sum::<f64>()) / TAU).round() as i64;
        let psi = theta
            .iter()
            .map(|&t| if t > PI { t - TAU } else { t })
            .min_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(PI);
        Ok((n, psi))
    }
}

/// Eigenphases in `[0, 2π)` of a unitary matrix, via the Hermitian Cayley
/// transform `i(1 − e^{iα}U)(1 + e^{iα}U)⁻¹`, whose eigenvalues are
/// `tan((θ + α)/2)`.
fn principal_eigenphases(u: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = u.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    for &alpha in &CAYLEY_ALPHAS {
        let w = Complex64::from_polar(1.0, alpha);
        let wu = u * w;
        let Some(x) = (&id + &wu).lu().solve(&(&id - &wu)) else {
            continue;
        };
        let h = x * Complex64::i();
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let lambda = h.symmetric_eigenvalues();
        if lambda
            .iter()
            .any(|l| !l.is_finite() || l.abs() > CAYLEY_MAX)
        {
            continue;
        }
        return Ok(lambda
            .iter()
            .map(|&l| (2.0 * l.atan() - alpha).rem_euclid(TAU))
            .collect());
    }
    Err(Error::Numeric(
        "no well-conditioned Cayley transform for the scattering matrix".into(),
    ))
}

/// The `2B × 2B` bond scattering matrix at wavenumber `k`.
pub fn bond_scattering_matrix(g: &GraphSpec, k: f64) -> DMatrix<Complex64> {
    Secular::new(g).matrix(k)
}

/// Eigenphases of `S_B(k)` in `[0, 2π)`, sorted.
pub fn eigenphases(g: &GraphSpec, k: f64) -> Result<Vec<f64>> {
    let mut t = principal_eigenphases(&bond_scattering_matrix(g, k))?;
    t.sort_by(f64::total_cmp);
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularEvaluation {
    pub k: f64,
    /// `det[1 − S_B(k)]`.
    pub zeta: Complex64,
    /// `‖S_B S_B† − 1‖_max`.
    pub unitarity_defect: f64,
    /// Smallest eigenphase distance to `0 (mod 2π)`.
    pub min_phase_distance: f64,
}

pub fn evaluate(g: &GraphSpec, k: f64) -> Result<SecularEvaluation> {
    let s = bond_scattering_matrix(g, k);
    let n = s.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let defect = (&s * s.adjoint() - &id)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let zeta = (&id - &s).lu().determinant();
    let min_phase_distance = principal_eigenphases(&s)?
        .into_iter()
        .map(|t| t.min(TAU - t))
        .fold(f64::INFINITY, f64::min);
    Ok(SecularEvaluation {
        k,
        zeta,
        unitarity_defect: defect,
        min_phase_distance,
    })
}

/// Raw roots in `(k_min, k_max]`, repeated by multiplicity.
#[derive(Debug, Clone)]
pub struct RootSearch {
    pub roots: Vec<f64>,
    pub k_min: f64,
    pub k_max: f64,
    pub step: f64,
    pub total_length: f64,
}

fn check_band(k_min: f64, k_max: f64) -> Result<()> {
    if !(k_min > 0.0 && k_max > k_min && k_max.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 < k_min < k_max, got ({k_min}, {k_max})"
        )));
    }
    Ok(())
}

/// Scans with step `π/(8𝓛)` and refines each counting jump down to
/// `1e-12` relative.
pub fn find_roots(g: &GraphSpec, k_min: f64, k_max: f64) -> Result<RootSearch> {
    check_band(k_min, k_max)?;
    let sec = Secular::new(g);
    let total = g.total_length();
    let step = PI / (8.0 * total);
    let n = ((k_max - k_min) / step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                k_max
            } else {
                k_min + i as f64 * step
            }
        })
        .collect();
    let probes = grid
        .par_iter()
        .map(|&k| sec.probe(k))
        .collect::<Result<Vec<_>>>()?;
    let pieces = (0..n)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (
                End {
                    k: grid[i],
                    n: probes[i].0,
                    psi: probes[i].1,
                },
                End {
                    k: grid[i + 1],
                    n: probes[i + 1].0,
                    psi: probes[i + 1].1,
                },
            );
            let jump = b.n - a.n;
            if jump < 0 {
                return Err(Error::Numeric(format!(
                    "root count decreased between k = {} and k = {}",
                    grid[i],
                    grid[i + 1]
                )));
            }
            let mut out = Vec::new();
            if jump > 0 {
                refine(&sec, a, b, &mut out)?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RootSearch {
        roots: pieces.into_iter().flatten().collect(),
        k_min,
        k_max,
        step,
        total_length: total,
    })
}

/// One end of a root bracket: position, count and crossing phase.
#[derive(Clone, Copy)]
struct End {
    k: f64,
    n: i64,
    psi: f64,
}

/// Shrinks `(a, b]` around its roots. The count decides every step; the
/// crossing phase, which is close to linear near an isolated root, only
/// proposes the split point (Illinois false position, midpoint otherwise).
fn refine(sec: &Secular, mut a: End, mut b: End, out: &mut Vec<f64>) -> Result<()> {
    let mut side = 0i8;
    let (mut wa, mut wb) = (1.0, 1.0);
    for _ in 0..200 {
        let width = b.k - a.k;
        let linear = a.psi < 0.0 && b.psi > 0.0 && width < 0.5 / sec.max_length;
        let mut m = 0.5 * (a.k + b.k);
        if linear {
            let (fa, fb) = (wa * a.psi, wb * b.psi);
            let x = a.k - fa * width / (fb - fa);
            if x > a.k && x < b.k {
                m = x;
            }
            // Converged once the slope puts the root within tolerance of m.
            let slope = (b.psi - a.psi) / width;
            let (nm, pm) = sec.probe(m)?;
            if pm.abs() / slope <= ROOT_RTOL * m && (nm == a.n || nm == b.n) {
                out.extend(std::iter::repeat_n(m, (b.n - a.n) as usize));
                return Ok(());
            }
            if !step(
                sec,
                &mut a,
                &mut b,
                End {
                    k: m,
                    n: nm,
                    psi: pm,
                },
                &mut side,
                &mut wa,
                &mut wb,
                out,
            )? {
                return Ok(());
            }
        } else {
            if width <= ROOT_RTOL * b.k {
                out.extend(std::iter::repeat_n(m, (b.n - a.n) as usize));
                return Ok(());
            }
            let (nm, pm) = sec.probe(m)?;
            if !step(
                sec,
                &mut a,
                &mut b,
                End {
                    k: m,
                    n: nm,
                    psi: pm,
                },
                &mut side,
                &mut wa,
                &mut wb,
                out,
            )? {
                return Ok(());
            }
        }
        if b.k - a.k <= ROOT_RTOL * b.k {
            out.extend(std::iter::repeat_n(0.5 * (a.k + b.k), (b.n - a.n) as usize));
            return Ok(());
        }
    }
    Err(Error::Numeric(format!(
        "root refinement in ({}, {}] did not converge",
        a.k, b.k
    )))
}

/// Moves one end of the bracket to `m`; returns `false` once the roots
/// have been handed to sub-brackets.
#[allow(clippy::too_many_arguments)]
fn step(
    sec: &Secular,
    a: &mut End,
    b: &mut End,
    mut m: End,
    side: &mut i8,
    wa: &mut f64,
    wb: &mut f64,
    out: &mut Vec<f64>,
) -> Result<bool> {
    m.n = m.n.clamp(a.n, b.n);
    if m.n > a.n && m.n < b.n {
        refine(sec, *a, m, out)?;
        refine(sec, m, *b, out)?;
        return Ok(false);
    }
    if m.n == a.n {
        *a = m;
        *wa = 1.0;
        if *side == 1 {
            *wb *= 0.5;
        }
        *side = 1;
    } else {
        *b = m;
        *wb = 1.0;
        if *side == -1 {
            *wa *= 0.5;
        }
        *side = -1;
    }
    Ok(true)
}

/// Spectrum of a graph, optionally with Kramers doublets merged.
#[derive(Debug, Clone)]
pub struct GraphEigenvalues {
    pub levels: LevelSequence,
    /// Roots before merging, with multiplicity.
    pub raw_roots: Vec<f64>,
    pub total_length: f64,
    /// `𝓛 Δk / π`, divided by two when every root was paired and merged.
    pub weyl_expected: f64,
    /// 2 when every root was merged with a partner, else 1.
    pub multiplicity: usize,
    /// Raw roots that found a partner within tolerance.
    pub paired: usize,
    /// Largest in-pair gap, in units of the raw mean spacing `π/𝓛`.
    pub max_pair_gap: f64,
    pub warning: Option<String>,
}

impl GraphEigenvalues {
    /// Length to pass to constant-density unfolding: `𝓛 / multiplicity`.
    pub fn unfolding_length(&self) -> f64 {
        self.total_length / self.multiplicity as f64
    }

    /// `#` metadata lines for the level CSV.
    pub fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            (
                "total_length",
                crate::spectra::io::fmt_f64(self.total_length),
            ),
            (
                "weyl_expected",
                format!("{}", self.weyl_expected.round() as i64),
            ),
        ]
    }
}

/// Roots of the secular equation in `(k_min, k_max]`.
///
/// With `dedup_kramers`, roots closer than `1e-6` mean spacings are merged.
/// A count more than 2 away from Weyl's estimate is reported in `warning`
/// and logged, not raised.
pub fn find_eigenvalues(
    g: &GraphSpec,
    k_min: f64,
    k_max: f64,
    dedup_kramers: bool,
) -> Result<GraphEigenvalues> {
    let search = find_roots(g, k_min, k_max)?;
    let raw = search.roots;
    let mean_spacing = PI / search.total_length;
    let tol = PAIR_TOL * mean_spacing;

    let mut merged = Vec::with_capacity(raw.len());
    let mut paired = 0;
    let mut max_gap: f64 = 0.0;
    let mut i = 0;
    while i < raw.len() {
        if i + 1 < raw.len() && raw[i + 1] - raw[i] < tol {
            paired += 2;
            max_gap = max_gap.max((raw[i + 1] - raw[i]) / mean_spacing);
            if dedup_kramers {
                merged.push(0.5 * (raw[i] + raw[i + 1]));
            } else {
                merged.extend([raw[i], raw[i + 1]]);
            }
            i += 2;
        } else {
            merged.push(raw[i]);
            i += 1;
        }
    }
    let multiplicity = if dedup_kramers && !raw.is_empty() && paired == raw.len() {
        2
    } else {
        1
    };
    let weyl = g.weyl_count(k_min, k_max) / multiplicity as f64;

    let warning = if (merged.len() as f64 - weyl).abs() > 2.0 {
        let mut gaps: Vec<(f64, f64)> = merged.windows(2).map(|w| (w[1] - w[0], w[0])).collect();
        gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
        let at: Vec<String> = gaps
            .iter()
            .take(3)
            .map(|(d, k)| format!("{k:.6} (+{d:.4})"))
            .collect();
        let msg = format!(
            "found {} levels in ({k_min}, {k_max}] where Weyl expects {weyl:.2}; widest gaps at k = {}",
            merged.len(),
            at.join(", ")
        );
        log::warn!("{msg}");
        Some(msg)
    } else {
        None
    };

    if let Some(w) = merged.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "degenerate roots at k = {}; enable Kramers deduplication for symplectic graphs",
            w[0]
        )));
    }
    let levels = LevelSequence::new(merged, Unit::Wavenumber)?.with_provenance(format!(
        "quantum graph, {} bonds, total length {} m",
        g.bonds().len(),
        search.total_length
    ));
    Ok(GraphEigenvalues {
        levels,
        raw_roots: raw,
        total_length: search.total_length,
        weyl_expected: weyl,
        multiplicity,
        paired,
        max_pair_gap: max_gap,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgraph::{circle, interval, random_gse_graph, Bond, GraphSpec, Vertex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gue_graph(seed: u64) -> GraphSpec {
        // The unitary half of the random layout, with zero phases.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, _) = random_gse_graph(&mut rng, 6.68).unwrap();
        let nv = 8;
        let vertices: Vec<Vertex> = g.vertices()[..nv].to_vec();
        let bonds: Vec<Bond> = g.bonds()[..11].to_vec();
        GraphSpec::new(vertices, bonds).unwrap()
    }

    #[test]
    fn interval_spectrum() {
        let g = interval(1.0).unwrap();
        let e = find_eigenvalues(&g, 0.1, 10.5 * PI, false).unwrap();
        assert_eq!(e.levels.len(), 10);
        for (n, k) in e.levels.values().iter().enumerate() {
            let exact = (n + 1) as f64 * PI;
            assert!((k - exact).abs() < 1e-9 * exact, "{k} vs {exact}");
            let ev = evaluate(&g, *k).unwrap();
            assert!(ev.zeta.norm() < 1e-8);
        }
        assert_eq!(e.weyl_expected.floor() as usize, 10);
        assert!(e.warning.is_none());
    }

    #[test]
    fn circle_spectrum_is_doubly_degenerate() {
        let g = circle(0.7, 1.3).unwrap();
        let e = find_eigenvalues(&g, 0.1, 10.5 * PI, true).unwrap();
        assert_eq!(e.raw_roots.len(), 20);
        assert_eq!(e.multiplicity, 2);
        for (n, k) in e.levels.values().iter().enumerate() {
            let exact = TAU * (n + 1) as f64 / 2.0;
            assert!((k - exact).abs() < 1e-9 * exact);
        }
        assert!(matches!(
            find_eigenvalues(&g, 0.1, 5.0, false),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (g, _) = random_gse_graph(&mut rng, 6.68).unwrap();
        for _ in 0..100 {
            let k = rng.random_range(0.1..300.0);
            assert!(evaluate(&g, k).unwrap().unitarity_defect < 1e-10);
        }
        assert!(evaluate(&gue_graph(1), 1.0).unwrap().unitarity_defect < 1e-10);
    }

    #[test]
    fn gse_double_is_kramers_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (g, _) = random_gse_graph(&mut rng, 6.68).unwrap();
        let e = find_eigenvalues(&g, 20.0, 40.0, true).unwrap();
        assert_eq!(e.paired, e.raw_roots.len());
        assert_eq!(e.multiplicity, 2);
        assert!(e.max_pair_gap < 1e-6);
        assert!((e.levels.len() as f64 - e.weyl_expected).abs() <= 2.0);
    }

    #[test]
    fn gue_graph_has_no_spurious_pairs() {
        let g = gue_graph(2);
        let on = find_eigenvalues(&g, 20.0, 60.0, true).unwrap();
        let off = find_eigenvalues(&g, 20.0, 60.0, false).unwrap();
        assert_eq!(on.levels, off.levels);
        assert_eq!(on.multiplicity, 1);
        assert!((on.levels.len() as f64 - g.weyl_count(20.0, 60.0)).abs() <= 2.0);
    }

    #[test]
    fn time_reversal_leaves_spectrum_unchanged() {
        let g = gue_graph(3);
        let a = find_eigenvalues(&g, 20.0, 50.0, false).unwrap();
        let b = find_eigenvalues(&g.time_reversed(), 20.0, 50.0, false).unwrap();
        assert_eq!(a.levels.len(), b.levels.len());
        for (x, y) in a.levels.values().iter().zip(b.levels.values()) {
            assert!((x - y).abs() < 1e-9 * x);
        }
    }

    #[test]
    fn rejects_bad_band() {
        let g = interval(1.0).unwrap();
        assert!(find_roots(&g, 0.0, 1.0).is_err());
        assert!(find_roots(&g, 2.0, 1.0).is_err());
    }
}
