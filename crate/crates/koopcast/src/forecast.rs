//! Prediction engines: diffusion forecasting of expectations, kernel analog
//! forecasting of conditional expectations with conditional-moment
//! uncertainty, and the nearest-neighbor analog baseline.

use ndarray::Array2;

use crate::dynamics::{DelayEmbedding, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::kernels::{out_of_sample_row, KernelMatrix, Normalization};
use crate::spectral::{shift_matrix, EigenBasis, KoopmanMatrix, RANK_FLOOR};

/// Fitted kernel analog forecasting model.
///
/// `coeffs[q][j]` holds c_j(q) = ⟨φ_j, y shifted by q⟩ with the unbiased
/// 1/(N−q) scaling; `coeffs_sq` the same for y², from which the estimator
/// of the conditional second moment (and hence σ) is assembled.
#[derive(Debug)]
pub struct KafModel<'a> {
    pub basis: &'a EigenBasis,
    pub kernel: &'a KernelMatrix,
    pub embedding: &'a DelayEmbedding,
    pub l: usize,
    pub q_max: usize,
    pub coeffs: Array2<f64>,
    pub coeffs_sq: Array2<f64>,
    pub response_mean: f64,
    pub response_std: f64,
}

/// A point forecast with its conditional-moment uncertainty estimate.
#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    pub value: f64,
    pub sigma: f64,
    /// Set when the query fell outside the kernel's domain and the
    /// climatological fallback was returned.
    pub out_of_domain: bool,
}

/// Aligned forecast diagnostics over a ladder of lead times.
#[derive(Debug, Clone, Default)]
pub struct ForecastSeries {
    pub lead_times: Vec<f64>,
    pub predictions: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub truth: Option<Vec<f64>>,
    pub rmse: Option<Vec<f64>>,
}

/// Expansion coefficients ⟨φ′_j, f⟩_{μ_N} of a sampled function in the dual
/// basis (the coefficients of its projection onto span{φ_j}).
pub fn project_dual_coeffs(basis: &EigenBasis, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != basis.n {
        return Err(Error::Config(format!(
            "series length {} does not match sample count {}",
            f.len(),
            basis.n
        )));
    }
    let n = basis.n;
    let l = basis.retained();
    let mut out = vec![0.0; l];
    for (j, out_j) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for t in 0..n {
            s += basis.phi_dual[[t, j]] * f[t];
        }
        *out_j = s / n as f64;
    }
    Ok(out)
}

/// Diffusion forecast: the expectation of the L-projected observable
/// evolved q steps, under the density with dual coefficients `rho`:
/// ρ⃗ᵀ · U(q) · Y⃗.
pub fn df_forecast(
    basis: &EigenBasis,
    rho: &[f64],
    response_coeffs: &[f64],
    q: usize,
    dt: f64,
) -> Result<f64> {
    let u = shift_matrix(basis, q, dt)?;
    df_forecast_with(&u, rho, response_coeffs)
}

/// Diffusion forecast against a precomputed shift matrix.
pub fn df_forecast_with(u: &KoopmanMatrix, rho: &[f64], response_coeffs: &[f64]) -> Result<f64> {
    let l = u.entries.nrows();
    if rho.len() != l || response_coeffs.len() != l {
        return Err(Error::Config(format!(
            "coefficient lengths ({}, {}) do not match the {}x{} shift matrix",
            rho.len(),
            response_coeffs.len(),
            l,
            l
        )));
    }
    let mut total = 0.0;
    for i in 0..l {
        let mut row = 0.0;
        for j in 0..l {
            row += u.entries[[i, j]] * response_coeffs[j];
        }
        total += rho[i] * row;
    }
    Ok(total)
}

/// Fit a KAF model on a symmetric-normalized basis.
///
/// `responses` must be aligned with the embedding rows (length N′ = basis.n,
/// starting at the embedding's base offset).
pub fn kaf_fit<'a>(
    basis: &'a EigenBasis,
    kernel: &'a KernelMatrix,
    embedding: &'a DelayEmbedding,
    responses: &[f64],
    q_max: usize,
    l: usize,
) -> Result<KafModel<'a>> {
    if basis.normalization != Normalization::Symmetric {
        return Err(Error::Config(
            "kernel analog forecasting requires a symmetric-normalized basis".into(),
        ));
    }
    let n = basis.n;
    if responses.len() != n {
        return Err(Error::Config(format!(
            "responses length {} does not match basis sample count {}",
            responses.len(),
            n
        )));
    }
    if q_max >= n {
        return Err(Error::Config(format!(
            "maximum lead q_max = {} must be smaller than N = {}",
            q_max, n
        )));
    }
    if l == 0 || l > basis.retained() {
        return Err(Error::Config(format!(
            "retained mode count L = {} must lie in 1..={}",
            l,
            basis.retained()
        )));
    }
    let lambda0 = basis.eigenvalues[0];
    if basis.eigenvalues[l - 1] <= RANK_FLOOR * lambda0 {
        return Err(Error::RankDeficient(
            "requested KAF modes fall under the rank floor; reduce L".into(),
        ));
    }
    let mut coeffs = Array2::<f64>::zeros((q_max + 1, l));
    let mut coeffs_sq = Array2::<f64>::zeros((q_max + 1, l));
    for q in 0..=q_max {
        let count = n - q;
        let scale = 1.0 / count as f64;
        for j in 0..l {
            let mut c = 0.0;
            let mut c2 = 0.0;
            for t in 0..count {
                let phi = basis.phi[[t, j]];
                let y = responses[t + q];
                c += phi * y;
                c2 += phi * y * y;
            }
            coeffs[[q, j]] = c * scale;
            coeffs_sq[[q, j]] = c2 * scale;
        }
    }
    let mean = responses.iter().sum::<f64>() / n as f64;
    let var = responses.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n as f64;
    Ok(KafModel {
        basis,
        kernel,
        embedding,
        l,
        q_max,
        coeffs,
        coeffs_sq,
        response_mean: mean,
        response_std: var.sqrt(),
    })
}

impl<'a> KafModel<'a> {
    /// Forecast the response at lead q steps from a new covariate (or delay)
    /// vector, with the conditional standard deviation estimate
    /// σ² = max(0, E(Y²|x) − E(Y|x)²).
    ///
    /// Out-of-domain queries degrade to climatology with the flag set.
    pub fn predict(&self, x_new: &[f64], q: usize) -> Result<Prediction> {
        if q > self.q_max {
            return Err(Error::Config(format!(
                "lead q = {} exceeds fitted q_max = {}",
                q, self.q_max
            )));
        }
        let row = out_of_sample_row(self.kernel, self.embedding, x_new)?;
        if row.out_of_domain {
            return Ok(Prediction {
                value: self.response_mean,
                sigma: self.response_std,
                out_of_domain: true,
            });
        }
        let nu = self.nystrom_numerators(&row.values);
        Ok(self.predict_from_numerators(&nu, q))
    }

    /// The un-normalized Nyström numerators ν_j(x) = (1/N) Σ_n row_n φ_j(ω_n),
    /// reusable across leads for a fixed query point.
    pub fn nystrom_numerators(&self, row: &[f64]) -> Vec<f64> {
        let n = self.basis.n;
        let mut nu = vec![0.0; self.l];
        for (j, nu_j) in nu.iter_mut().enumerate() {
            let mut s = 0.0;
            for t in 0..n {
                s += row[t] * self.basis.phi[[t, j]];
            }
            *nu_j = s / n as f64;
        }
        nu
    }

    /// Assemble the two conditional moments from precomputed numerators.
    pub fn predict_from_numerators(&self, nu: &[f64], q: usize) -> Prediction {
        let mut value = 0.0;
        let mut m2 = 0.0;
        for j in 0..self.l {
            let w = nu[j] / self.basis.eigenvalues[j];
            value += self.coeffs[[q, j]] * w;
            m2 += self.coeffs_sq[[q, j]] * w;
        }
        let sigma = (m2 - value * value).max(0.0).sqrt();
        Prediction { value, sigma, out_of_domain: false }
    }
}

/// A k-nearest-neighbor analog forecast with its ensemble spread.
#[derive(Debug, Clone, Copy)]
pub struct AnalogPrediction {
    pub value: f64,
    pub spread: f64,
}

/// Lorenz-style analog forecast: average the response q steps after the k
/// training covariates nearest to the query. k = 1 is the classical single
/// analog; k = N−q degrades to climatology.
pub fn analog_forecast(
    dataset: &TrajectoryDataset,
    x_new: &[f64],
    q: usize,
    k_neighbors: usize,
) -> Result<f64> {
    analog_forecast_detail(dataset, x_new, q, k_neighbors).map(|p| p.value)
}

/// Analog forecast that also reports the spread of the analog ensemble.
pub fn analog_forecast_detail(
    dataset: &TrajectoryDataset,
    x_new: &[f64],
    q: usize,
    k_neighbors: usize,
) -> Result<AnalogPrediction> {
    let n = dataset.len();
    let m = dataset.covariates.ncols();
    if x_new.len() != m {
        return Err(Error::Config(format!(
            "query vector has length {} but covariates have {} columns",
            x_new.len(),
            m
        )));
    }
    if q >= n {
        return Err(Error::Config(format!("lead q = {} must be smaller than N = {}", q, n)));
    }
    let admissible = n - q;
    if k_neighbors == 0 {
        return Err(Error::Config("k_neighbors must be at least 1".into()));
    }
    if k_neighbors > admissible {
        return Err(Error::Config(format!(
            "k_neighbors = {} exceeds the {} admissible analogs at lead {}",
            k_neighbors, admissible, q
        )));
    }
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(admissible);
    for i in 0..admissible {
        let row = dataset.covariates.row(i);
        let mut s = 0.0;
        for (a, b) in x_new.iter().zip(row.iter()) {
            let d = a - b;
            s += d * d;
        }
        dist.push((s, i));
    }
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut mean = 0.0;
    for &(_, i) in dist.iter().take(k_neighbors) {
        mean += dataset.responses[i + q];
    }
    mean /= k_neighbors as f64;
    let mut var = 0.0;
    for &(_, i) in dist.iter().take(k_neighbors) {
        let d = dataset.responses[i + q] - mean;
        var += d * d;
    }
    var /= k_neighbors as f64;
    Ok(AnalogPrediction { value: mean, spread: var.sqrt() })
}

/// Per-lead RMSE of an arbitrary forecaster over a test set, along with the
/// mean reported uncertainty.
///
/// `truths` has one row per test point and one column per lead.
pub fn rmse_curve<F>(
    mut predict: F,
    test_points: &Array2<f64>,
    truths: &Array2<f64>,
    leads: &[usize],
    dt: f64,
) -> Result<ForecastSeries>
where
    F: FnMut(&[f64], usize) -> Result<Prediction>,
{
    let n_test = test_points.nrows();
    if n_test == 0 {
        return Err(Error::Config("empty test set".into()));
    }
    if truths.nrows() != n_test || truths.ncols() != leads.len() {
        return Err(Error::Config(format!(
            "truth table {}x{} does not match {} test points and {} leads",
            truths.nrows(),
            truths.ncols(),
            n_test,
            leads.len()
        )));
    }
    let mut lead_times = Vec::with_capacity(leads.len());
    let mut rmse = Vec::with_capacity(leads.len());
    let mut mean_sigma = Vec::with_capacity(leads.len());
    let mut mean_pred = Vec::with_capacity(leads.len());
    for (col, &q) in leads.iter().enumerate() {
        let mut sq_err = 0.0;
        let mut sig = 0.0;
        let mut pred_sum = 0.0;
        for r in 0..n_test {
            let x: Vec<f64> = test_points.row(r).to_vec();
            let p = predict(&x, q)?;
            let e = p.value - truths[[r, col]];
            sq_err += e * e;
            sig += p.sigma;
            pred_sum += p.value;
        }
        lead_times.push(q as f64 * dt);
        rmse.push((sq_err / n_test as f64).sqrt());
        mean_sigma.push(sig / n_test as f64);
        mean_pred.push(pred_sum / n_test as f64);
    }
    Ok(ForecastSeries {
        lead_times,
        predictions: mean_pred,
        sigma: Some(mean_sigma),
        truth: None,
        rmse: Some(rmse),
    })
}
