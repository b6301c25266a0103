//! Plain-text experiment configuration: `section.key = value` lines, `#`
//! comments, UTF-8. Unknown keys are rejected; missing keys take the
//! documented defaults. Parse errors carry the key and line number.

use std::path::PathBuf;

use crate::dynamics::{CovariateMap, ModelId, SystemSpec};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, Normalization};

/// Gaussian bandwidth selection: automatic (median heuristic, possibly
/// rescaled by the driver's per-mode default) or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Median,
    Fixed(f64),
}

/// Fully parsed experiment configuration (the pipeline mode comes from the
/// CLI subcommand).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub covariate_map: CovariateMap,
    pub kernel_family: KernelFamily,
    pub bandwidth: Bandwidth,
    /// Multiplies the median bandwidth; `None` leaves the choice to the
    /// driver's per-mode default.
    pub epsilon_scale: Option<f64>,
    /// `None` leaves the normalization to the driver's per-mode default.
    pub normalization: Option<Normalization>,
    pub alpha: f64,
    pub delay_q: usize,
    pub basis_size: usize,
    /// Lead times in shift steps q.
    pub leads: Vec<usize>,
    pub test_fraction: f64,
    pub k_neighbors: usize,
    pub autocorr_q_max: usize,
    /// `None`: centered for mixing systems (Lorenz 63), uncentered for the
    /// torus harmonic observable.
    pub autocorr_centered: Option<bool>,
    /// How many pattern time series to export in patterns mode.
    pub n_series: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults: Lorenz 63 at Δt = 0.05 with N = 2000, Gaussian kernel at
    /// the median bandwidth, L = 100, no delays, trailing 20% test split.
    pub fn default_config() -> Self {
        ExperimentConfig {
            system: SystemSpec::lorenz63_default(),
            covariate_map: CovariateMap::Identity,
            kernel_family: KernelFamily::Gaussian,
            bandwidth: Bandwidth::Median,
            epsilon_scale: None,
            normalization: None,
            alpha: 1.0,
            delay_q: 1,
            basis_size: 100,
            leads: (0..=10).map(|k| k * 20).collect(),
            test_fraction: 0.2,
            k_neighbors: 15,
            autocorr_q_max: 400,
            autocorr_centered: None,
            n_series: 4,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn bad_value(key: &str, line_no: usize, detail: &str) -> Error {
    Error::Config(format!("invalid value for {} at line {}: {}", key, line_no, detail))
}

fn parse_f64(key: &str, line_no: usize, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| bad_value(key, line_no, &format!("expected a number, got '{}'", v.trim())))
}

fn parse_usize(key: &str, line_no: usize, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| bad_value(key, line_no, &format!("expected a count, got '{}'", v.trim())))
}

fn parse_bool(key: &str, line_no: usize, v: &str) -> Result<bool> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(bad_value(key, line_no, &format!("expected true or false, got '{}'", other))),
    }
}

fn parse_f64_list(key: &str, line_no: usize, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|tok| parse_f64(key, line_no, tok)).collect()
}

fn parse_usize_list(key: &str, line_no: usize, v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|tok| parse_usize(key, line_no, tok)).collect()
}

/// Parse a configuration from text. See the crate README for the grammar
/// and the full key list.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    // the model choice switches the system defaults, so resolve it first
    let mut model = ModelId::Lorenz63;
    for line in text.lines() {
        let line = strip_comment(line).trim();
        if let Some((key, value)) = line.split_once('=') {
            if key.trim() == "system.model" {
                model = match value.trim() {
                    "lorenz63" => ModelId::Lorenz63,
                    "torus_rotation" => ModelId::TorusRotation,
                    other => {
                        return Err(Error::Config(format!(
                            "invalid value for system.model: '{}' (expected lorenz63 or torus_rotation)",
                            other
                        )))
                    }
                };
            }
        }
    }
    let mut cfg = ExperimentConfig::default_config();
    if model == ModelId::TorusRotation {
        cfg.system = SystemSpec::torus_default();
        cfg.covariate_map = CovariateMap::torus_chart();
    }
    let mut chart_radii: Option<[f64; 2]> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("expected 'section.key = value' at line {}: '{}'", line_no, line))
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(bad_value(key, line_no, "empty value"));
        }
        match key {
            "system.model" => {} // handled in the first pass
            "system.params" => cfg.system.parameters = parse_f64_list(key, line_no, value)?,
            "system.dt" => cfg.system.dt = parse_f64(key, line_no, value)?,
            "system.n_samples" => cfg.system.n_samples = parse_usize(key, line_no, value)?,
            "system.spinup_steps" => cfg.system.spinup_steps = parse_usize(key, line_no, value)?,
            "system.initial_state" => {
                cfg.system.initial_state = parse_f64_list(key, line_no, value)?
            }
            "system.substeps" => {
                cfg.system.integrator_substeps = parse_usize(key, line_no, value)?
            }
            "covariate.map" => {
                cfg.covariate_map = if value == "identity" {
                    CovariateMap::Identity
                } else if value == "torus_chart" {
                    CovariateMap::torus_chart()
                } else if let Some(idx) = value.strip_prefix("project:") {
                    CovariateMap::CoordinateProjection(parse_usize(key, line_no, idx)?)
                } else {
                    return Err(bad_value(
                        key,
                        line_no,
                        "expected identity, project:<index>, or torus_chart",
                    ));
                };
            }
            "covariate.radii" => {
                let r = parse_f64_list(key, line_no, value)?;
                if r.len() != 2 {
                    return Err(bad_value(key, line_no, "expected exactly two radii"));
                }
                chart_radii = Some([r[0], r[1]]);
            }
            "kernel.family" => {
                cfg.kernel_family = match value {
                    "gaussian" => KernelFamily::Gaussian,
                    "covariance" => KernelFamily::Covariance,
                    other => {
                        return Err(bad_value(
                            key,
                            line_no,
                            &format!("expected gaussian or covariance, got '{}'", other),
                        ))
                    }
                };
            }
            "kernel.epsilon" => {
                cfg.bandwidth = if value == "median" {
                    Bandwidth::Median
                } else {
                    let eps = parse_f64(key, line_no, value)?;
                    if !(eps > 0.0) {
                        return Err(bad_value(key, line_no, "bandwidth must be positive"));
                    }
                    Bandwidth::Fixed(eps)
                };
            }
            "kernel.epsilon_scale" => {
                let s = parse_f64(key, line_no, value)?;
                if !(s > 0.0) {
                    return Err(bad_value(key, line_no, "scale must be positive"));
                }
                cfg.epsilon_scale = Some(s);
            }
            "kernel.normalization" => {
                cfg.normalization = Some(match value {
                    "none" => Normalization::None,
                    "symmetric" => Normalization::Symmetric,
                    "markov" => Normalization::Markov,
                    other => {
                        return Err(bad_value(
                            key,
                            line_no,
                            &format!("expected none, symmetric, or markov, got '{}'", other),
                        ))
                    }
                });
            }
            "kernel.alpha" => cfg.alpha = parse_f64(key, line_no, value)?,
            "embed.q" => {
                cfg.delay_q = parse_usize(key, line_no, value)?;
                if cfg.delay_q == 0 {
                    return Err(bad_value(key, line_no, "delay count must be at least 1"));
                }
            }
            "basis.l" => {
                cfg.basis_size = parse_usize(key, line_no, value)?;
                if cfg.basis_size == 0 {
                    return Err(bad_value(key, line_no, "basis size must be at least 1"));
                }
            }
            "forecast.leads" => {
                cfg.leads = parse_usize_list(key, line_no, value)?;
                if cfg.leads.is_empty() {
                    return Err(bad_value(key, line_no, "need at least one lead"));
                }
            }
            "forecast.test_fraction" => {
                let f = parse_f64(key, line_no, value)?;
                if !(0.0..=0.5).contains(&f) {
                    return Err(bad_value(key, line_no, "test fraction must lie in [0, 0.5]"));
                }
                cfg.test_fraction = f;
            }
            "forecast.k_neighbors" => {
                cfg.k_neighbors = parse_usize(key, line_no, value)?;
                if cfg.k_neighbors == 0 {
                    return Err(bad_value(key, line_no, "k_neighbors must be at least 1"));
                }
            }
            "autocorr.q_max" => cfg.autocorr_q_max = parse_usize(key, line_no, value)?,
            "autocorr.centered" => {
                cfg.autocorr_centered = Some(parse_bool(key, line_no, value)?)
            }
            "patterns.n_series" => {
                cfg.n_series = parse_usize(key, line_no, value)?;
                if cfg.n_series == 0 {
                    return Err(bad_value(key, line_no, "need at least one series"));
                }
            }
            "output.dir" => cfg.output_dir = PathBuf::from(value),
            "run.seed" => {
                cfg.seed = value.parse::<u64>().map_err(|_| {
                    bad_value(key, line_no, &format!("expected an integer seed, got '{}'", value))
                })?;
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key '{}' at line {}",
                    other, line_no
                )))
            }
        }
    }
    if let Some(radii) = chart_radii {
        match &mut cfg.covariate_map {
            CovariateMap::TorusChart { radii: r } => *r = radii,
            _ => {
                return Err(Error::Config(
                    "covariate.radii is only meaningful with covariate.map = torus_chart".into(),
                ))
            }
        }
    }
    cfg.system.validate()?;
    if let CovariateMap::CoordinateProjection(i) = cfg.covariate_map {
        if i >= cfg.system.model.state_dim() {
            return Err(Error::Config(format!(
                "projection index {} out of range for {:?}",
                i, cfg.system.model
            )));
        }
    }
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn parse_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg.system.model, ModelId::Lorenz63);
        assert_eq!(cfg.system.dt, 0.05);
        assert_eq!(cfg.system.n_samples, 2000);
        assert_eq!(cfg.basis_size, 100);
        assert_eq!(cfg.kernel_family, KernelFamily::Gaussian);
        assert_eq!(cfg.bandwidth, Bandwidth::Median);
        assert!(cfg.normalization.is_none());
    }

    #[test]
    fn torus_model_switches_defaults() {
        let cfg = parse_config_str("system.model = torus_rotation\n").unwrap();
        assert_eq!(cfg.system.model, ModelId::TorusRotation);
        assert_eq!(cfg.system.parameters, vec![1.0, std::f64::consts::SQRT_2]);
        assert_eq!(cfg.covariate_map, CovariateMap::torus_chart());
        // the model line may come after other keys
        let cfg = parse_config_str("system.dt = 0.01\nsystem.model = torus_rotation\n").unwrap();
        assert_eq!(cfg.system.model, ModelId::TorusRotation);
        assert_eq!(cfg.system.dt, 0.01);
    }

    #[test]
    fn rejects_bad_values_with_line_numbers() {
        let err = parse_config_str("kernel.epsilon = -1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kernel.epsilon"), "{}", msg);
        assert!(msg.contains("line 1"), "{}", msg);

        let err = parse_config_str("\n\nbasis.l = zero\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{}", err);

        let err = parse_config_str("no.such.key = 1\n").unwrap_err();
        assert!(err.to_string().contains("unknown configuration key"), "{}", err);

        let err = parse_config_str("just some words\n").unwrap_err();
        assert!(err.to_string().contains("section.key = value"), "{}", err);
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = parse_config_str(
            "# full line comment\n  basis.l = 12  # trailing comment\n\nembed.q=3\n",
        )
        .unwrap();
        assert_eq!(cfg.basis_size, 12);
        assert_eq!(cfg.delay_q, 3);
    }

    #[test]
    fn lists_and_radii() {
        let cfg = parse_config_str(
            "system.model = torus_rotation\nforecast.leads = 0, 5, 10\ncovariate.radii = 1.0, 1.2\n",
        )
        .unwrap();
        assert_eq!(cfg.leads, vec![0, 5, 10]);
        assert_eq!(cfg.covariate_map, CovariateMap::TorusChart { radii: [1.0, 1.2] });
        // radii without a torus chart is an error
        assert!(parse_config_str("covariate.radii = 1.0, 1.2\n").is_err());
    }

    #[test]
    fn cross_field_validation() {
        // wrong parameter count for the model
        assert!(parse_config_str("system.params = 1.0, 2.0\n").is_err());
        // projection index out of range
        assert!(parse_config_str("covariate.map = project:5\n").is_err());
        assert!(parse_config_str("forecast.test_fraction = 0.7\n").is_err());
    }
}
