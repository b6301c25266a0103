//! Experiment driver: simulate → kernel → eigenbasis → {forecast |
//! patterns | diagnostics} pipelines with CSV artifacts.
//!
//! All model fitting (kernel, basis, expansion coefficients) happens on the
//! leading training segment of the trajectory; the trailing test segment is
//! only touched for forecast initialization and truth values.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;

use crate::config::{Bandwidth, ExperimentConfig};
use crate::dynamics::{delay_embed, simulate, CovariateMap, DelayEmbedding, ModelId, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::forecast::{
    analog_forecast_detail, df_forecast_with, kaf_fit, project_dual_coeffs, Prediction,
};
use crate::generator::{approx_eigen_residual_with, compactify, eigenfunction_timeseries, generator_fd};
use crate::kernels::{
    gaussian_kernel, median_bandwidth, normalize, out_of_sample_row, pairwise_sqdist,
    KernelFamily, KernelMatrix, KernelSpec, Normalization,
};
use crate::spectral::{autocorrelation, eigenbasis, pod, shift_matrix, EigenBasis};
use crate::table::{fmt_float, ResultTable};

/// Pipeline selector (the CLI subcommand).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Eigen,
    Df,
    Kaf,
    Analog,
    Patterns,
    Autocorr,
    Pod,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Eigen => "eigen",
            Mode::Df => "df",
            Mode::Kaf => "kaf",
            Mode::Analog => "analog",
            Mode::Patterns => "patterns",
            Mode::Autocorr => "autocorr",
            Mode::Pod => "pod",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(Mode::Eigen),
            "df" => Ok(Mode::Df),
            "kaf" => Ok(Mode::Kaf),
            "analog" => Ok(Mode::Analog),
            "patterns" => Ok(Mode::Patterns),
            "autocorr" => Ok(Mode::Autocorr),
            "pod" => Ok(Mode::Pod),
            other => Err(Error::Config(format!("unknown mode '{}'", other))),
        }
    }
}

/// Number of leading samples used for training.
pub fn train_split(n: usize, test_fraction: f64) -> usize {
    let n_test = (n as f64 * test_fraction).floor() as usize;
    n - n_test
}

/// Default bandwidth rescaling of the median heuristic per mode. The
/// compactified-generator modes want a much narrower kernel: the bandwidth
/// plays the regularization role, and frequencies are recovered undamped
/// only as the kernel eigenvalues approach 1.
fn default_eps_scale(mode: Mode) -> f64 {
    match mode {
        Mode::Patterns => 0.0125,
        _ => 1.0,
    }
}

fn default_normalization(mode: Mode) -> Normalization {
    match mode {
        Mode::Kaf | Mode::Patterns => Normalization::Symmetric,
        _ => Normalization::Markov,
    }
}

/// Run a pipeline end to end, simulating the trajectory from the config.
pub fn run(mode: Mode, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dataset = simulate(&config.system, &config.covariate_map)?;
    run_with_dataset(mode, config, dataset)
}

/// Run a pipeline on an externally supplied trajectory (the simulation step
/// skipped). Used directly by tests that need to tamper with the data.
pub fn run_with_dataset(
    mode: Mode,
    config: &ExperimentConfig,
    dataset: TrajectoryDataset,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&config.output_dir).map_err(|source| Error::Io {
        path: config.output_dir.display().to_string(),
        source,
    })?;
    match mode {
        Mode::Eigen => run_eigen(config, dataset),
        Mode::Df => run_df(config, dataset),
        Mode::Kaf => run_kaf(config, dataset),
        Mode::Analog => run_analog(config, dataset),
        Mode::Patterns => run_patterns(config, dataset),
        Mode::Autocorr => run_autocorr(config, dataset),
        Mode::Pod => run_pod(config, dataset),
    }
}

/// Training-side kernel and basis shared by the spectral pipelines.
struct Prepared {
    train: TrajectoryDataset,
    n_full: usize,
    n_train: usize,
    embedding: DelayEmbedding,
    kernel: KernelMatrix,
    basis: EigenBasis,
    epsilon: f64,
    normalization: Normalization,
}

impl Prepared {
    /// Training responses aligned with the embedding rows.
    fn aligned_responses(&self) -> &[f64] {
        &self.train.responses[self.embedding.base_index_offset..]
    }
}

fn prepare(mode: Mode, config: &ExperimentConfig, dataset: &TrajectoryDataset) -> Result<Prepared> {
    if config.kernel_family != KernelFamily::Gaussian {
        return Err(Error::Config(format!(
            "{} mode requires the gaussian kernel family",
            mode.name()
        )));
    }
    let normalization = config.normalization.unwrap_or_else(|| default_normalization(mode));
    if normalization == Normalization::None {
        return Err(Error::Config(format!(
            "{} mode requires a symmetric or markov kernel normalization",
            mode.name()
        )));
    }
    match mode {
        Mode::Kaf | Mode::Patterns if normalization != Normalization::Symmetric => {
            return Err(Error::Config(format!(
                "{} mode requires kernel.normalization = symmetric",
                mode.name()
            )));
        }
        _ => {}
    }
    let n_full = dataset.len();
    let n_train = train_split(n_full, config.test_fraction);
    let train = dataset.slice(0, n_train);
    let embedding = delay_embed(&train, config.delay_q)?;
    let sqdist = pairwise_sqdist(&embedding);
    let epsilon = match config.bandwidth {
        Bandwidth::Fixed(e) => e,
        Bandwidth::Median => {
            let scale = config.epsilon_scale.unwrap_or_else(|| default_eps_scale(mode));
            median_bandwidth(&sqdist)? * scale
        }
    };
    let spec = KernelSpec {
        family: KernelFamily::Gaussian,
        bandwidth: epsilon,
        delay_q: config.delay_q,
        normalization: Normalization::None,
        alpha: config.alpha,
    };
    let raw = gaussian_kernel(&spec, sqdist, embedding.base_index_offset)?;
    let kernel = normalize(raw, normalization, config.alpha)?;
    let n_emb = embedding.len();
    let requested_l = config.basis_size;
    let l = requested_l.min(n_emb);
    if l < requested_l {
        log::warn!("basis size clamped from {} to the {} embedded samples", requested_l, l);
    }
    let basis = eigenbasis(&kernel, l)?;
    Ok(Prepared {
        train,
        n_full,
        n_train,
        embedding,
        kernel,
        basis,
        epsilon,
        normalization,

    })
}

/// Base indices (in full-trajectory coordinates) of forecast test points:
/// delay windows that lie entirely inside the test segment, with room for
/// the largest lead.
fn test_base_indices(
    n_full: usize,
    n_train: usize,
    delay_q: usize,
    max_lead: usize,
) -> Result<Vec<usize>> {
    let first = n_train + delay_q - 1;
    if n_full < max_lead + 1 {
        return Err(Error::Config("test segment shorter than the largest lead".into()));
    }
    let last = n_full - 1 - max_lead;
    if first > last {
        return Err(Error::Config(format!(
            "test segment too short for delay {} and lead {} (have {} test samples)",
            delay_q,
            max_lead,
            n_full - n_train
        )));
    }
    Ok((first..=last).collect())
}

/// Assemble the delay vector based at full-trajectory index `base`.
fn delay_vector(dataset: &TrajectoryDataset, base: usize, q: usize) -> Vec<f64> {
    let m = dataset.covariates.ncols();
    let mut x = Vec::with_capacity(m * q);
    for lag in 0..q {
        for c in 0..m {
            x.push(dataset.covariates[[base - lag, c]]);
        }
    }
    x
}

fn manifest_table(
    mode: Mode,
    config: &ExperimentConfig,
    resolved: &[(&str, String)],
) -> ResultTable {
    let mut rows: Vec<(String, String)> = vec![
        ("mode".into(), mode.name().into()),
        (
            "system.model".into(),
            match config.system.model {
                ModelId::Lorenz63 => "lorenz63".into(),
                ModelId::TorusRotation => "torus_rotation".into(),
            },
        ),
        ("system.params".into(), join_floats(&config.system.parameters)),
        ("system.dt".into(), fmt_float(config.system.dt)),
        ("system.n_samples".into(), config.system.n_samples.to_string()),
        ("system.spinup_steps".into(), config.system.spinup_steps.to_string()),
        ("system.substeps".into(), config.system.integrator_substeps.to_string()),
        ("system.initial_state".into(), join_floats(&config.system.initial_state)),
        (
            "covariate.map".into(),
            match &config.covariate_map {
                CovariateMap::Identity => "identity".into(),
                CovariateMap::CoordinateProjection(i) => format!("project:{}", i),
                CovariateMap::TorusChart { radii } => {
                    format!("torus_chart[{};{}]", fmt_float(radii[0]), fmt_float(radii[1]))
                }
            },
        ),
        ("kernel.alpha".into(), fmt_float(config.alpha)),
        ("embed.q".into(), config.delay_q.to_string()),
        ("basis.l".into(), config.basis_size.to_string()),
        ("forecast.leads".into(), join_usize(&config.leads)),
        ("forecast.test_fraction".into(), fmt_float(config.test_fraction)),
        ("forecast.k_neighbors".into(), config.k_neighbors.to_string()),
        ("autocorr.q_max".into(), config.autocorr_q_max.to_string()),
        ("patterns.n_series".into(), config.n_series.to_string()),
        ("run.seed".into(), config.seed.to_string()),
    ];
    for (k, v) in resolved {
        rows.push((format!("resolved.{}", k), v.clone()));
    }
    rows.sort();
    let mut t = ResultTable::new();
    t.push_str("key", rows.iter().map(|(k, _)| k.clone()).collect());
    t.push_str("value", rows.iter().map(|(_, v)| v.clone()).collect());
    t
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(";")
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn write_all(
    out_dir: &Path,
    tables: Vec<(&str, ResultTable)>,
) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (name, table) in tables {
        let path = out_dir.join(name);
        table.write_csv(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

fn run_eigen(config: &ExperimentConfig, dataset: TrajectoryDataset) -> Result<Vec<PathBuf>> {
    let p = prepare(Mode::Eigen, config, &dataset)?;
    let basis = &p.basis;
    let l = basis.retained();

    let mut eigenvalues = ResultTable::new();
    eigenvalues.push_int("j", (0..l as i64).collect());
    eigenvalues.push_float("lambda", basis.eigenvalues.clone());

    let mut eigenfunctions = ResultTable::new();
    let n = basis.n;
    let offset = p.embedding.base_index_offset;
    eigenfunctions.push_int("n", (0..n).map(|r| (r + offset) as i64).collect());
    eigenfunctions
        .push_float("t", (0..n).map(|r| (r + offset) as f64 * p.train.dt).collect());
    for j in 0..l {
        eigenfunctions.push_float(&format!("phi_{}", j), basis.phi.column(j).to_vec());
    }

    let manifest = manifest_table(Mode::Eigen, config, &resolved_common(&p));
    write_all(
        &config.output_dir,
        vec![
            ("eigenvalues.csv", eigenvalues),
            ("eigenfunctions.csv", eigenfunctions),
            ("manifest.csv", manifest),
        ],
    )
}

fn resolved_common(p: &Prepared) -> Vec<(&'static str, String)> {
    vec![
        ("kernel.epsilon", fmt_float(p.epsilon)),
        (
            "kernel.normalization",
            match p.normalization {
                Normalization::Markov => "markov".into(),
                Normalization::Symmetric => "symmetric".into(),
                Normalization::None => "none".into(),
            },
        ),
        ("basis.l_retained", p.basis.retained().to_string()),
        ("n_train", p.n_train.to_string()),
        ("n_test", (p.n_full - p.n_train).to_string()),
    ]
}

/// Shared artifact layout of the three forecasting pipelines.
struct ForecastRows {
    leads: Vec<usize>,
    dt: f64,
    climatology: f64,
    /// per (point, lead): prediction, truth, sigma
    points: Vec<usize>,
    predictions: Array2<f64>,
    truths: Array2<f64>,
    sigmas: Array2<f64>,
}

impl ForecastRows {
    fn tables(&self) -> (ResultTable, ResultTable) {
        let n_leads = self.leads.len();
        let n_points = self.points.len();
        let mut forecast = ResultTable::new();
        let mut rmse = Vec::with_capacity(n_leads);
        let mut mean_sigma = Vec::with_capacity(n_leads);
        for (c, _) in self.leads.iter().enumerate() {
            let mut se = 0.0;
            let mut sg = 0.0;
            for r in 0..n_points {
                let e = self.predictions[[r, c]] - self.truths[[r, c]];
                se += e * e;
                sg += self.sigmas[[r, c]];
            }
            rmse.push((se / n_points as f64).sqrt());
            mean_sigma.push(sg / n_points as f64);
        }
        forecast.push_int("lead", self.leads.iter().map(|&q| q as i64).collect());
        forecast.push_float(
            "lead_time",
            self.leads.iter().map(|&q| q as f64 * self.dt).collect(),
        );
        forecast.push_float("rmse", rmse);
        forecast.push_float("mean_sigma", mean_sigma);
        forecast.push_float("climatology", vec![self.climatology; n_leads]);

        let mut trajectories = ResultTable::new();
        let rows = n_points * n_leads;
        let mut lead_col = Vec::with_capacity(rows);
        let mut time_col = Vec::with_capacity(rows);
        let mut point_col = Vec::with_capacity(rows);
        let mut pred_col = Vec::with_capacity(rows);
        let mut truth_col = Vec::with_capacity(rows);
        let mut sigma_col = Vec::with_capacity(rows);
        for (r, &b) in self.points.iter().enumerate() {
            for (c, &q) in self.leads.iter().enumerate() {
                lead_col.push(q as i64);
                time_col.push(q as f64 * self.dt);
                point_col.push(b as i64);
                pred_col.push(self.predictions[[r, c]]);
                truth_col.push(self.truths[[r, c]]);
                sigma_col.push(self.sigmas[[r, c]]);
            }
        }
        trajectories.push_int("lead", lead_col);
        trajectories.push_float("lead_time", time_col);
        trajectories.push_int("point", point_col);
        trajectories.push_float("prediction", pred_col);
        trajectories.push_float("truth", truth_col);
        trajectories.push_float("sigma", sigma_col);
        (forecast, trajectories)
    }
}

fn climatology_std(responses: &[f64]) -> f64 {
    let n = responses.len() as f64;
    let mean = responses.iter().sum::<f64>() / n;
    (responses.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n).sqrt()
}

fn run_df(config: &ExperimentConfig, dataset: TrajectoryDataset) -> Result<Vec<PathBuf>> {
    let p = prepare(Mode::Df, config, &dataset)?;
    let leads = config.leads.clone();
    let max_lead = leads.iter().copied().max().unwrap_or(0);
    let bases = test_base_indices(p.n_full, p.n_train, config.delay_q, max_lead)?;
    let aligned = p.aligned_responses();
    let y = project_dual_coeffs(&p.basis, aligned)?;
    let y_sq: Vec<f64> = {
        let sq: Vec<f64> = aligned.iter().map(|v| v * v).collect();
        project_dual_coeffs(&p.basis, &sq)?
    };
    let shifts: Vec<_> = leads
        .iter()
        .map(|&q| shift_matrix(&p.basis, q, p.train.dt))
        .collect::<Result<_>>()?;

    let n_points = bases.len();
    let mut predictions = Array2::<f64>::zeros((n_points, leads.len()));
    let mut truths = Array2::<f64>::zeros((n_points, leads.len()));
    let mut sigmas = Array2::<f64>::zeros((n_points, leads.len()));
    for (r, &b) in bases.iter().enumerate() {
        let x = delay_vector(&dataset, b, config.delay_q);
        let row = out_of_sample_row(&p.kernel, &p.embedding, &x)?;
        let rho = project_dual_coeffs(&p.basis, &row.values)?;
        for (c, u) in shifts.iter().enumerate() {
            let value = df_forecast_with(u, &rho, &y)?;
            let m2 = df_forecast_with(u, &rho, &y_sq)?;
            predictions[[r, c]] = value;
            sigmas[[r, c]] = (m2 - value * value).max(0.0).sqrt();
            truths[[r, c]] = dataset.responses[b + leads[c]];
        }
    }
    let rows = ForecastRows {
        leads,
        dt: p.train.dt,
        climatology: climatology_std(aligned),
        points: bases,
        predictions,
        truths,
        sigmas,
    };
    let (forecast, trajectories) = rows.tables();
    let manifest = manifest_table(Mode::Df, config, &resolved_common(&p));
    write_all(
        &config.output_dir,
        vec![
            ("forecast.csv", forecast),
            ("trajectories.csv", trajectories),
            ("manifest.csv", manifest),
        ],
    )
}

fn run_kaf(config: &ExperimentConfig, dataset: TrajectoryDataset) -> Result<Vec<PathBuf>> {
    let p = prepare(Mode::Kaf, config, &dataset)?;
    let leads = config.leads.clone();
    let max_lead = leads.iter().copied().max().unwrap_or(0);
    let bases = test_base_indices(p.n_full, p.n_train, config.delay_q, max_lead)?;
    let aligned = p.aligned_responses();
    let l = p.basis.retained();
    let model = kaf_fit(&p.basis, &p.kernel, &p.embedding, aligned, max_lead, l)?;

    let n_points = bases.len();
    let mut predictions = Array2::<f64>::zeros((n_points, leads.len()));
    let mut truths = Array2::<f64>::zeros((n_points, leads.len()));
    let mut sigmas = Array2::<f64>::zeros((n_points, leads.len()));
    for (r, &b) in bases.iter().enumerate() {
        let x = delay_vector(&dataset, b, config.delay_q);
        let row = out_of_sample_row(&p.kernel, &p.embedding, &x)?;
        let numerators = if row.out_of_domain { None } else { Some(model.nystrom_numerators(&row.values)) };
        for (c, &q) in leads.iter().enumerate() {
            let pred: Prediction = match &numerators {
                Some(nu) => model.predict_from_numerators(nu, q),
                None => Prediction {
                    value: model.response_mean,
                    sigma: model.response_std,
                    out_of_domain: true,
                },
            };
            predictions[[r, c]] = pred.value;
            sigmas[[r, c]] = pred.sigma;
            truths[[r, c]] = dataset.responses[b + q];
        }
    }
    let rows = ForecastRows {
        leads,
        dt: p.train.dt,
        climatology: model.response_std,
        points: bases,
        predictions,
        truths,
        sigmas,
    };
    let (forecast, trajectories) = rows.tables();
    let manifest = manifest_table(Mode::Kaf, config, &resolved_common(&p));
    write_all(
        &config.output_dir,
        vec![
            ("forecast.csv", forecast),
            ("trajectories.csv", trajectories),
            ("manifest.csv", manifest),
        ],
    )
}

fn run_analog(config: &ExperimentConfig, dataset: TrajectoryDataset) -> Result<Vec<PathBuf>> {
    let n_full = dataset.len();
    let n_train = train_split(n_full, config.test_fraction);
    let train = dataset.slice(0, n_train);
    let leads = config.leads.clone();
    let max_lead = leads.iter().copied().max().unwrap_or(0);
    // analogs act on raw covariates; delay windows are not used here
    let bases = test_base_indices(n_full, n_train, 1, max_lead)?;

    let n_points = bases.len();
    let mut predictions = Array2::<f64>::zeros((n_points, leads.len()));
    let mut truths = Array2::<f64>::zeros((n_points, leads.len()));
    let mut sigmas = Array2::<f64>::zeros((n_points, leads.len()));
    for (r, &b) in bases.iter().enumerate() {
        let x: Vec<f64> = dataset.covariates.row(b).to_vec();
        for (c, &q) in leads.iter().enumerate() {
            let pred = analog_forecast_detail(&train, &x, q, config.k_neighbors)?;
            predictions[[r, c]] = pred.value;
            sigmas[[r, c]] = pred.spread;
            truths[[r, c]] = dataset.responses[b + q];
        }
    }
    let rows = ForecastRows {
        leads,
        dt: train.dt,
        climatology: climatology_std(&train.responses),
        points: bases,
        predictions,
        truths,
        sigmas,
    };
    let (forecast, trajectories) = rows.tables();
    let manifest = manifest_table(
        Mode::Analog,
        config,
        &[
            ("n_train", n_train.to_string()),
            ("n_test", (n_full - n_train).to_string()),
        ],
    );
    write_all(
        &config.output_dir,
        vec![
            ("forecast.csv", forecast),
            ("trajectories.csv", trajectories),
            ("manifest.csv", manifest),
        ],
    )
}

fn run_patterns(config: &ExperimentConfig, dataset: TrajectoryDataset) -> Result<Vec<PathBuf>> {
    let p = prepare(Mode::Patterns, config, &dataset)?;
    let basis = &p.basis;
    let dt = p.train.dt;
    let v_raw = generator_fd(basis, dt)?;
    let model = compactify(v_raw, &basis.eigenvalues, dt)?;

    let q_res = config.leads.iter().copied().find(|&q| q > 0).unwrap_or(1);
    let u = shift_matrix(basis, q_res, dt)?;
    let l = model.l;
    let mut residuals = Vec::with_capacity(l);
    for j in 0..l {
        let z: Vec<Complex64> = (0..l).map(|i| model.eigvec_coeffs[[i, j]]).collect();
        residuals.push(approx_eigen_residual_with(&u, &z, model.eigenfrequencies[j])?);
    }
    let mut generator = ResultTable::new();
    generator.push_int("j", (0..l as i64).collect());
    generator.push_float("alpha", model.eigenfrequencies.clone());
    generator.push_float("dirichlet", model.dirichlet_energies.clone());
    generator.push_float("residual", residuals);

    // time series of the most coherent oscillatory modes
    let ranked = model.nonzero_modes_by_energy();
    let selected: Vec<usize> = ranked.into_iter().take(config.n_series).collect();
    let mut series = ResultTable::new();
    let n = basis.n;
    let offset = p.embedding.base_index_offset;
    series.push_int("n", (0..n).map(|r| (r + offset) as i64).collect());
    series.push_float("t", (0..n).map(|r| (r + offset) as f64 * dt).collect());
    for &j in &selected {
        let z = eigenfunction_timeseries(&model, basis, j)?;
        series.push_float(&format!("re_z{}", j), z.iter().map(|c| c.re).collect());
        series.push_float(&format!("im_z{}", j), z.iter().map(|c| c.im).collect());
    }

    let mut resolved = resolved_common(&p);
    resolved.push(("patterns.residual_q", q_res.to_string()));
    let manifest = manifest_table(Mode::Patterns, config, &resolved);
    write_all(
        &config.output_dir,
        vec![
            ("generator.csv", generator),
            ("pattern_timeseries.csv", series),
            ("manifest.csv", manifest),
        ],
    )
}

fn run_autocorr(config: &ExperimentConfig, dataset: TrajectoryDataset) -> Result<Vec<PathBuf>> {
    let n_full = dataset.len();
    let n_train = train_split(n_full, config.test_fraction);
    let train = dataset.slice(0, n_train);
    // the torus diagnostic observable is the harmonic e^{iω₁}, which has
    // unit-modulus autocorrelation under quasiperiodic dynamics; for the
    // mixing system the centered first coordinate is used
    let (series, centered): (Vec<Complex64>, bool) = match train.covariate_map {
        CovariateMap::TorusChart { .. } => (
            (0..train.len())
                .map(|i| Complex64::from_polar(1.0, train.states[[i, 0]]))
                .collect(),
            config.autocorr_centered.unwrap_or(false),
        ),
        _ => match config.system.model {
            ModelId::TorusRotation => (
                (0..train.len())
                    .map(|i| Complex64::from_polar(1.0, train.states[[i, 0]]))
                    .collect(),
                config.autocorr_centered.unwrap_or(false),
            ),
            ModelId::Lorenz63 => (
                train.responses.iter().map(|&y| Complex64::new(y, 0.0)).collect(),
                config.autocorr_centered.unwrap_or(true),
            ),
        },
    };
    let c = autocorrelation(&series, config.autocorr_q_max, centered)?;
    let q_count = c.len();
    let mut running = Vec::with_capacity(q_count);
    let mut acc = 0.0;
    for (q, z) in c.iter().enumerate() {
        acc += z.norm();
        running.push(acc / (q + 1) as f64);
    }
    let mut table = ResultTable::new();
    table.push_int("q", (0..q_count as i64).collect());
    table.push_float("t", (0..q_count).map(|q| q as f64 * train.dt).collect());
    table.push_float("re", c.iter().map(|z| z.re).collect());
    table.push_float("im", c.iter().map(|z| z.im).collect());
    table.push_float("abs", c.iter().map(|z| z.norm()).collect());
    table.push_float("running_mean_abs", running);

    let manifest = manifest_table(
        Mode::Autocorr,
        config,
        &[
            ("autocorr.centered", centered.to_string()),
            ("n_train", n_train.to_string()),
        ],
    );
    write_all(
        &config.output_dir,
        vec![("correlation.csv", table), ("manifest.csv", manifest)],
    )
}

fn run_pod(config: &ExperimentConfig, dataset: TrajectoryDataset) -> Result<Vec<PathBuf>> {
    let n_full = dataset.len();
    let n_train = train_split(n_full, config.test_fraction);
    let train = dataset.slice(0, n_train);
    let m = train.covariates.ncols();
    let rank_cap = m.min(n_train);
    let l = config.basis_size.min(rank_cap);
    if l < config.basis_size {
        log::warn!("POD mode count clamped from {} to {}", config.basis_size, l);
    }
    let r = pod(&train.covariates, l)?;
    let mut table = ResultTable::new();
    table.push_int("j", (0..l as i64).collect());
    table.push_float("sigma", r.singular_values.clone());
    for c in 0..m {
        table.push_float(&format!("eof_{}", c), (0..l).map(|j| r.eofs[[c, j]]).collect());
    }
    let manifest = manifest_table(
        Mode::Pod,
        config,
        &[("basis.l_retained", l.to_string()), ("n_train", n_train.to_string())],
    );
    write_all(
        &config.output_dir,
        vec![("pod.csv", table), ("manifest.csv", manifest)],
    )
}
