use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::*;
use crate::qgraph::{find_eigenvalues, random_gse_graph, sweep_lengths, GraphSpec};
use crate::rmt::{fit_spacing_orders, sample_ensemble, RandomMatrixSpec, SpacingFit};
use crate::spectra::{
    decimate_systematic, decimate_with, number_variance_with, power_spectrum_estimator,
    spacing_histogram_with, spectral_rigidity_with, unfold_constant_density, SpectralEnsemble,
    StatsOptions, Thinning,
};
use crate::theory::{
    delta3_missing, estimate_phi, power_missing, reference_fits, sigma2_missing, MissingLevelModel,
    MissingLevelParams, PhiModel,
};

/// Runs a resolved command and returns a one-line summary.
pub fn execute(global: &GlobalArgs, command: &Command) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(global.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let out = global
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(command.name()));
    let seed = global.seed.unwrap_or(DEFAULT_SEED);
    pool.install(|| {
        let mut run = RunDir::create(&out)?;
        let ctx = Ctx { global, seed };
        let (summary, args) = match command {
            Command::RmtSample(a) => {
                let a = a.clone().filled();
                let s = rmt_sample(&ctx, &a, &mut run)?;
                (s, args_value(&a)?)
            }
            Command::GraphSolve(a) => {
                let mut a = a.clone();
                let s = graph_solve(&ctx, &mut a, &mut run)?;
                (s, args_value(&a)?)
            }
            Command::Decimate(a) => {
                let a = a.clone().filled();
                let s = decimate(&ctx, &a, &mut run)?;
                (s, args_value(&a)?)
            }
            Command::Stats(a) => {
                let a = a.clone().filled();
                let s = stats(&a, &mut run)?;
                (s, args_value(&a)?)
            }
            Command::TheoryCurve(a) => {
                let a = a.clone().filled();
                let s = theory_curve(&ctx, &a, &mut run)?;
                (s, args_value(&a)?)
            }
            Command::FitPhi(a) => {
                let a = a.clone();
                let s = fit_phi(&a, &mut run)?;
                (s, args_value(&a)?)
            }
            Command::Figure(a) => {
                let a = a.clone().filled()?;
                let s = figure(&ctx, &a, &mut run)?;
                (s, args_value(&a)?)
            }
        };
        let root = run.root().to_path_buf();
        run.finish(command.name(), global, threads, &args)?;
        Ok(format!("{summary} -> {}", root.display()))
    })
}

fn args_value<A: serde::Serialize>(a: &A) -> Result<toml::Value> {
    toml::Value::try_from(a).map_err(|e| Error::Config(e.to_string()))
}

struct Ctx<'a> {
    global: &'a GlobalArgs,
    seed: u64,
}

impl Ctx<'_> {
    fn phis(&self, default: &[f64]) -> Result<Vec<f64>> {
        let phis = self.global.phi.clone().unwrap_or_else(|| default.to_vec());
        if phis.is_empty() {
            return Err(Error::invalid("--phi list is empty"));
        }
        for &p in &phis {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::invalid(format!("phi = {p} outside (0, 1]")));
            }
        }
        Ok(phis)
    }
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::invalid(format!("missing required option --{flag}")))
}

fn phi_key(phi: f64) -> u64 {
    (phi * 1e6).round() as u64
}

/// Level files under `path` (a file or a directory of `*.csv`), with names.
fn load_levels(path: &Path) -> Result<Vec<(String, LevelSequence)>> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::invalid(format!(
                "no level files in {}",
                path.display()
            )));
        }
        files
    } else {
        vec![path.to_path_buf()]
    };
    files
        .iter()
        .map(|p| {
            let name = p
                .file_name()
                .map_or_else(|| "levels.csv".into(), |n| n.to_string_lossy().into_owned());
            io::read_levels(p).map(|(s, _)| (name, s))
        })
        .collect()
}

fn load_fits(path: Option<&Path>, class: EnsembleClass) -> Result<(Vec<SpacingFit>, String)> {
    match path {
        Some(p) => {
            let f = FitsFile::read(p)?;
            if f.class != class {
                return Err(Error::invalid(format!(
                    "{} holds {} fits, expected {class}",
                    p.display(),
                    f.class
                )));
            }
            Ok((f.fits, p.display().to_string()))
        }
        None => Ok((reference_fits(class), "reference".into())),
    }
}

fn grid(step: f64, max: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && max >= step) {
        return Err(Error::invalid(format!("bad grid: step {step}, max {max}")));
    }
    let n = (max / step + 1e-9).floor() as usize;
    // Snap to 12 digits so 30 × 0.1 lands on 3 exactly.
    Ok((1..=n)
        .map(|i| (i as f64 * step * 1e12).round() / 1e12)
        .collect())
}

/// Decimated copy of every member; member `m` uses its own stream.
fn decimate_ensemble(
    ens: &SpectralEnsemble,
    phi: f64,
    seed: u64,
    mode: Thinning,
) -> Result<SpectralEnsemble> {
    let members = ens
        .members()
        .par_iter()
        .enumerate()
        .map(|(m, s)| decimate_with(s, phi, derive_seed(seed, phi_key(phi), m as u64), mode))
        .collect::<Result<Vec<_>>>()?;
    SpectralEnsemble::new(members, format!("{} phi={}", ens.label(), fmt_phi(phi)))
}

fn theory_model(class: EnsembleClass, phi: f64, fits: &[SpacingFit]) -> Result<MissingLevelModel> {
    MissingLevelModel::new(&MissingLevelParams::new(class, phi).with_fits(fits.to_vec()))
}

impl RmtSampleArgs {
    fn filled(self) -> Self {
        RmtSampleArgs {
            class: Some(self.class.unwrap_or(EnsembleClass::Gse)),
            dim: Some(self.dim.unwrap_or(200)),
            count: Some(self.count.unwrap_or(300)),
            sampler: Some(self.sampler.unwrap_or_default()),
        }
    }
}

fn rmt_sample(ctx: &Ctx, a: &RmtSampleArgs, run: &mut RunDir) -> Result<String> {
    let spec = RandomMatrixSpec::new(a.class.unwrap(), a.dim.unwrap(), a.count.unwrap(), ctx.seed)?
        .with_sampler(a.sampler.unwrap());
    let ens = sample_ensemble(&spec)?;
    run.text(
        "inputs/ensemble.toml",
        &toml::to_string(&spec).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    for (i, m) in ens.members().iter().enumerate() {
        run.levels(&format!("levels/member_{i:04}.csv"), m, &[])?;
    }
    Ok(format!(
        "sampled {} {} members of {} levels",
        ens.len(),
        spec.class,
        ens.members()[0].len()
    ))
}

fn pair(v: &Option<Vec<usize>>, flag: &str) -> Result<[usize; 2]> {
    match v.as_deref() {
        Some([a, b]) => Ok([*a, *b]),
        Some(other) => Err(Error::invalid(format!(
            "--{flag} needs two bond ids, got {}",
            other.len()
        ))),
        None => Err(Error::invalid(format!(
            "--{flag} is required for a sweep of a supplied graph"
        ))),
    }
}

fn graph_solve(ctx: &Ctx, a: &mut GraphSolveArgs, run: &mut RunDir) -> Result<String> {
    let steps = *a.steps.get_or_insert(1);
    let delta_l = *a.delta_l.get_or_insert(0.84e-3);
    let k_min = *a.k_min.get_or_insert(20.0);
    let (g, sweep_pairs, generated) = match &a.graph {
        Some(p) => {
            let g = GraphSpec::read(p)?;
            let pairs = if steps > 1 {
                Some([pair(&a.plus, "plus")?, pair(&a.minus, "minus")?])
            } else {
                None
            };
            (g, pairs, false)
        }
        None => {
            let total = *a.total_length.get_or_insert(6.68);
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let (g, pairs) = random_gse_graph(&mut rng, total)?;
            a.plus = Some(pairs[0].to_vec());
            a.minus = Some(pairs[1].to_vec());
            (g, Some(pairs), true)
        }
    };
    let dedup = *a.dedup.get_or_insert(generated);
    let multiplicity = if dedup { 2.0 } else { 1.0 };
    let k_max = match a.k_max {
        Some(k) => k,
        None => {
            let levels = *a.levels.get_or_insert(178);
            k_min + levels as f64 * multiplicity * PI / g.total_length()
        }
    };
    a.k_max = Some(k_max);
    run.text("inputs/graph.json", &g.to_json())?;
    let graphs = match sweep_pairs {
        Some([plus, minus]) if steps > 1 => sweep_lengths(&g, plus, minus, delta_l, steps)?,
        _ => vec![g.clone()],
    };
    let mut counts = Vec::with_capacity(graphs.len());
    let mut worst_gap: f64 = 0.0;
    for (m, gm) in graphs.iter().enumerate() {
        let e = find_eigenvalues(gm, k_min, k_max, dedup)?;
        let mut meta = e.metadata();
        meta.push(("multiplicity", e.multiplicity.to_string()));
        meta.push(("paired", format!("{}/{}", e.paired, e.raw_roots.len())));
        run.levels(
            &format!("levels/wavenumber/sweep_{m:04}.csv"),
            &e.levels,
            &meta,
        )?;
        let unfolded = unfold_constant_density(&e.levels, e.unfolding_length())?;
        run.levels(
            &format!("levels/unfolded/sweep_{m:04}.csv"),
            &unfolded,
            &meta,
        )?;
        counts.push(e.levels.len() as i64);
        worst_gap = worst_gap.max(e.max_pair_gap);
    }
    run.meta("total_length", g.total_length());
    run.meta("weyl_expected", g.weyl_count(k_min, k_max) / multiplicity);
    run.meta("level_counts", counts.clone());
    run.meta("max_pair_gap", worst_gap);
    Ok(format!(
        "solved {} graph(s) on k in ({k_min:.4}, {k_max:.4}]: {} to {} levels",
        graphs.len(),
        counts.iter().min().unwrap_or(&0),
        counts.iter().max().unwrap_or(&0)
    ))
}

impl DecimateArgs {
    fn filled(self) -> Self {
        DecimateArgs {
            mode: Some(self.mode.unwrap_or(DecimateMode::Bernoulli)),
            ..self
        }
    }
}

/// Indices separated by whitespace or commas.
fn read_indices(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(path, format!("bad index '{t}'")))
        })
        .collect()
}

fn decimate(ctx: &Ctx, a: &DecimateArgs, run: &mut RunDir) -> Result<String> {
    let input = required(&a.input, "input")?;
    let members = load_levels(&input)?;
    let mode = a.mode.unwrap();
    if mode == DecimateMode::Systematic {
        let path = required(&a.remove_indices, "remove-indices")?;
        let idx = read_indices(&path)?;
        for (name, s) in &members {
            run.levels(
                &format!("levels/systematic/{name}"),
                &decimate_systematic(s, &idx)?,
                &[],
            )?;
        }
        return Ok(format!(
            "removed {} indices from {} members",
            idx.len(),
            members.len()
        ));
    }
    if ctx.global.phi.is_none() {
        return Err(Error::invalid("decimate needs --phi"));
    }
    let phis = ctx.phis(&[])?;
    let thinning = if mode == DecimateMode::Fixed {
        Thinning::FixedCount
    } else {
        Thinning::Bernoulli
    };
    for &phi in &phis {
        let out: Vec<LevelSequence> = members
            .par_iter()
            .enumerate()
            .map(|(m, (_, s))| {
                decimate_with(
                    s,
                    phi,
                    derive_seed(ctx.seed, phi_key(phi), m as u64),
                    thinning,
                )
            })
            .collect::<Result<_>>()?;
        for ((name, _), s) in members.iter().zip(&out) {
            run.levels(&format!("levels/phi_{}/{name}", fmt_phi(phi)), s, &[])?;
        }
    }
    Ok(format!(
        "decimated {} members at phi = {}",
        members.len(),
        meta_list(&phis)
    ))
}

impl StatsArgs {
    fn filled(self) -> Self {
        let order = self.order.unwrap_or(0);
        StatsArgs {
            measure: Some(self.measure.unwrap_or_else(|| StatMeasure::ALL.to_vec())),
            order: Some(order),
            bin_width: Some(self.bin_width.unwrap_or(0.05)),
            s_max: Some(self.s_max.unwrap_or(4.0 + 2.5 * order as f64)),
            l_max: Some(self.l_max.unwrap_or(5.0)),
            l_step: Some(self.l_step.unwrap_or(0.1)),
            edge_trim: Some(self.edge_trim.unwrap_or(0.05)),
            stride: Some(self.stride.unwrap_or(0.25)),
            truncate: Some(self.truncate.unwrap_or(true)),
            input: self.input,
        }
    }
}

fn stats(a: &StatsArgs, run: &mut RunDir) -> Result<String> {
    let input = required(&a.input, "input")?;
    let members: Vec<LevelSequence> = load_levels(&input)?.into_iter().map(|(_, s)| s).collect();
    let phi = members[0]
        .phi()
        .filter(|p| members.iter().all(|m| m.phi() == Some(*p)));
    let ens = SpectralEnsemble::new(members, input.display().to_string())?;
    let opts = StatsOptions {
        edge_trim: a.edge_trim.unwrap(),
        stride: a.stride.unwrap(),
    };
    let l_grid = grid(a.l_step.unwrap(), a.l_max.unwrap())?;
    let order = a.order.unwrap();
    let mut hist = None;
    let measures = a.measure.clone().unwrap();
    for &m in &measures {
        let curve = match m {
            StatMeasure::Pspacing | StatMeasure::Cumulative => {
                if hist.is_none() {
                    hist = Some(spacing_histogram_with(
                        &ens,
                        order,
                        a.bin_width.unwrap(),
                        a.s_max.unwrap(),
                        &opts,
                    )?);
                }
                let h = hist.as_ref().unwrap();
                if m == StatMeasure::Pspacing {
                    h.density.clone()
                } else {
                    h.cumulative.clone()
                }
            }
            StatMeasure::Sigma2 => number_variance_with(&ens, &l_grid, &opts)?,
            StatMeasure::Delta3 => spectral_rigidity_with(&ens, &l_grid, &opts)?,
            StatMeasure::Power => {
                let e = if a.truncate.unwrap() {
                    ens.truncated_to_min()
                } else {
                    ens.clone()
                };
                power_spectrum_estimator(&e, &opts)?
            }
        };
        let mut meta = vec![
            ("measure", m.name().to_string()),
            ("members", ens.len().to_string()),
            ("source", ens.label().to_string()),
        ];
        if matches!(m, StatMeasure::Pspacing | StatMeasure::Cumulative) {
            meta.push(("order", order.to_string()));
        }
        if let Some(p) = phi {
            meta.push(("phi", fmt_f64(p)));
        }
        run.curve(&format!("curves/{}.csv", m.name()), &curve, &meta)?;
    }
    Ok(format!(
        "computed {} on {} members",
        measures
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(","),
        ens.len()
    ))
}

impl TheoryArgs {
    fn filled(self) -> Self {
        TheoryArgs {
            class: Some(self.class.unwrap_or(EnsembleClass::Gse)),
            measure: Some(self.measure.unwrap_or_else(|| StatMeasure::ALL.to_vec())),
            x_max: Some(self.x_max.unwrap_or(5.0)),
            x_step: Some(self.x_step.unwrap_or(0.05)),
            fits: self.fits,
        }
    }
}

fn theory_values(
    m: StatMeasure,
    class: EnsembleClass,
    model: &MissingLevelModel,
    x: &[f64],
) -> Result<CurveWithErrors> {
    let phi = model.phi();
    CurveWithErrors::from_fn(x.to_vec(), |v| match m {
        StatMeasure::Pspacing => Ok(model.pdf(v)),
        StatMeasure::Cumulative => Ok(model.cdf(v)),
        StatMeasure::Sigma2 => sigma2_missing(class, phi, v),
        StatMeasure::Delta3 => delta3_missing(class, phi, v),
        StatMeasure::Power => power_missing(class, phi, v),
    })
}

fn theory_meta(
    class: EnsembleClass,
    phi: f64,
    m: StatMeasure,
    provenance: &str,
) -> Vec<(&'static str, String)> {
    let p = MissingLevelParams::new(class, phi);
    vec![
        ("measure", format!("{}-theory", m.name())),
        ("class", class.to_string()),
        ("phi", fmt_f64(phi)),
        ("k_gauss", p.k_gauss.to_string()),
        ("m_max", p.m_max.to_string()),
        ("fits", provenance.to_string()),
    ]
}

fn theory_curve(ctx: &Ctx, a: &TheoryArgs, run: &mut RunDir) -> Result<String> {
    let class = a.class.unwrap();
    let phis = ctx.phis(&[1.0])?;
    let (fits, provenance) = load_fits(a.fits.as_deref(), class)?;
    let main_grid = grid(a.x_step.unwrap(), a.x_max.unwrap())?;
    // τ̃ beyond ½ mirrors the lower half.
    let power_grid: Vec<f64> = (1..=100)
        .map(|i| i as f64 * 0.005)
        .filter(|&t| t <= a.x_max.unwrap())
        .collect();
    let measures = a.measure.clone().unwrap();
    for &phi in &phis {
        let model = theory_model(class, phi, &fits)?;
        for &m in &measures {
            let x = if m == StatMeasure::Power {
                &power_grid
            } else {
                &main_grid
            };
            let c = theory_values(m, class, &model, x)?;
            run.curve(
                &format!("curves/{}-theory_{}.csv", m.name(), fmt_phi(phi)),
                &c,
                &theory_meta(class, phi, m, &provenance),
            )?;
        }
    }
    Ok(format!(
        "wrote {} theory curves for {class}",
        phis.len() * measures.len()
    ))
}

fn fit_phi(a: &FitPhiArgs, run: &mut RunDir) -> Result<String> {
    let input = required(&a.input, "input")?;
    let (curve, meta) = io::read_curve(&input)?;
    let class = match a.class {
        Some(c) => c,
        None => meta
            .get("class")
            .ok_or_else(|| Error::invalid("no --class given and the input has no class line"))?
            .parse()?,
    };
    let measure = match a.measure {
        Some(m) => m,
        None => meta
            .get("measure")
            .ok_or_else(|| Error::invalid("no --measure given and the input has no measure line"))?
            .parse()?,
    };
    let fits = a
        .fits
        .as_deref()
        .map(|p| load_fits(Some(p), class))
        .transpose()?
        .map(|f| f.0);
    let mut model = PhiModel::with_fits(class, measure, fits)?;
    let x_max = a.x_max.or(match measure {
        Measure::Sigma2 => Some(3.0),
        Measure::Power => Some(0.5),
        Measure::PSpacing => None,
    });
    if let Some(x) = x_max {
        model = model.with_x_max(x);
    }
    let est = estimate_phi(&curve, &model)?;
    let mut table = toml::Table::new();
    table.insert("phi".into(), est.phi.into());
    table.insert("std_error".into(), est.std_error.into());
    table.insert("at_boundary".into(), est.at_boundary.into());
    table.insert("class".into(), class.to_string().into());
    table.insert("measure".into(), measure.to_string().into());
    table.insert("input".into(), input.display().to_string().into());
    run.text(
        "fit_phi.toml",
        &toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    run.meta("phi_hat", est.phi);
    run.meta("std_error", est.std_error);
    let edge = if est.at_boundary {
        " (at boundary)"
    } else {
        ""
    };
    Ok(format!(
        "phi_hat = {:.4} ± {:.4}{edge}",
        est.phi, est.std_error
    ))
}

impl FigureArgs {
    fn filled(self) -> Result<Self> {
        let name = required(&self.name, "name (fig3, fig4 or fig5)")?;
        let class = match name {
            Figure::Fig4 => EnsembleClass::Gue,
            Figure::Fig3 | Figure::Fig5 => EnsembleClass::Gse,
        };
        Ok(FigureArgs {
            name: Some(name),
            class: Some(self.class.unwrap_or(class)),
            dim: Some(self.dim.unwrap_or(200)),
            count: Some(self.count.unwrap_or(300)),
            sampler: Some(self.sampler.unwrap_or_default()),
            bin_width: Some(self.bin_width.unwrap_or(0.05)),
            l_max: Some(self.l_max.unwrap_or(5.0)),
        })
    }
}

fn figure(ctx: &Ctx, a: &FigureArgs, run: &mut RunDir) -> Result<String> {
    let fig = a.name.unwrap();
    let class = a.class.unwrap();
    let phis = ctx.phis(&[1.0, 0.95, 0.85, 0.7])?;
    let spec = RandomMatrixSpec::new(class, a.dim.unwrap(), a.count.unwrap(), ctx.seed)?
        .with_sampler(a.sampler.unwrap());
    let ens = sample_ensemble(&spec)?;
    let opts = StatsOptions::default();
    let bin = a.bin_width.unwrap();
    let fits = fit_spacing_orders(&ens, &[0, 1, 2], bin, &opts)?;
    run.text(
        "inputs/ensemble.toml",
        &toml::to_string(&spec).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    let higher: Vec<SpacingFit> = fits[1..].to_vec();
    run.text(
        "inputs/fits.toml",
        &FitsFile {
            class,
            fits: higher.clone(),
        }
        .to_toml()?,
    )?;
    run.meta("fit_mu", fits.iter().map(|f| f.mu).collect::<Vec<_>>());
    let l_grid = grid(0.1, a.l_max.unwrap())?;
    let name = fig.name();
    let data_meta = |measure: &str, phi: f64| {
        vec![
            ("figure", name.to_string()),
            ("measure", measure.to_string()),
            ("class", class.to_string()),
            ("phi", fmt_f64(phi)),
            ("members", spec.count.to_string()),
            ("dim", spec.dim.to_string()),
        ]
    };
    let provenance = format!("fitted on the complete ensemble ({})", ens.label());
    for &phi in &phis {
        let dec = decimate_ensemble(&ens, phi, ctx.seed, Thinning::Bernoulli)?;
        let model = theory_model(class, phi, &higher)?;
        let tag = fmt_phi(phi);
        let mut emit = |m: StatMeasure, data: CurveWithErrors| -> Result<()> {
            let theory = theory_values(m, class, &model, data.x())?;
            run.curve(
                &format!("curves/{name}_{}_{tag}.csv", m.name()),
                &data,
                &data_meta(m.name(), phi),
            )?;
            run.curve(
                &format!("curves/{name}_{}-theory_{tag}.csv", m.name()),
                &theory,
                &theory_meta(class, phi, m, &provenance),
            )
        };
        match fig {
            Figure::Fig3 | Figure::Fig4 => {
                let h = spacing_histogram_with(&dec, 0, bin, 4.0, &opts)?;
                emit(StatMeasure::Pspacing, h.density)?;
                emit(StatMeasure::Cumulative, h.cumulative)?;
                emit(
                    StatMeasure::Sigma2,
                    number_variance_with(&dec, &l_grid, &opts)?,
                )?;
                emit(
                    StatMeasure::Delta3,
                    spectral_rigidity_with(&dec, &l_grid, &opts)?,
                )?;
            }
            Figure::Fig5 => {
                emit(
                    StatMeasure::Power,
                    power_spectrum_estimator(&dec.truncated_to_min(), &opts)?,
                )?;
            }
        }
    }
    Ok(format!(
        "{name}: {class} {} x {} at phi = {}",
        spec.dim,
        spec.count,
        meta_list(&phis)
    ))
}
