//! Kernel matrices on (possibly delay-embedded) covariates: the radial
//! Gaussian and covariance kernels, the two-stage density/detailed-balance
//! normalizations (symmetric and Markov), bandwidth selection, and
//! out-of-sample kernel rows for new covariate values.

use ndarray::Array2;

use crate::dynamics::DelayEmbedding;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    None,
    Symmetric,
    Markov,
}

/// Kernel construction parameters.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Gaussian bandwidth ε in squared-distance units (unused for covariance).
    pub bandwidth: f64,
    /// Delay count Q of the embedding the kernel acts on.
    pub delay_q: usize,
    pub normalization: Normalization,
    /// Density-correction exponent α of the first normalization stage.
    pub alpha: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64, delay_q: usize, normalization: Normalization) -> Self {
        KernelSpec {
            family: KernelFamily::Gaussian,
            bandwidth,
            delay_q,
            normalization,
            alpha: 1.0,
        }
    }

    pub fn covariance(delay_q: usize) -> Self {
        KernelSpec {
            family: KernelFamily::Covariance,
            bandwidth: 0.0,
            delay_q,
            normalization: Normalization::None,
            alpha: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family == KernelFamily::Gaussian && !(self.bandwidth > 0.0) {
            return Err(Error::Config(format!(
                "gaussian bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if self.family == KernelFamily::Covariance && self.normalization != Normalization::None {
            return Err(Error::Config(
                "covariance kernels do not support normalization".into(),
            ));
        }
        if self.delay_q == 0 {
            return Err(Error::Config("delay count Q must be at least 1".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Config("density exponent must be finite".into()));
        }
        Ok(())
    }
}

/// An N×N kernel matrix together with its normalization data.
///
/// `degree_q` holds the first-stage row sums of the raw kernel and
/// `degree_d` the second-stage degrees (the function d of the detailed
/// balance relation d_i·K_ij = d_j·K_ji); both are empty for unnormalized
/// kernels.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub values: Array2<f64>,
    pub normalization: Normalization,
    pub degree_q: Vec<f64>,
    pub degree_d: Vec<f64>,
    pub spec: KernelSpec,
    /// Index offset inherited from the delay embedding (= Q−1).
    pub base_offset: usize,
}

impl KernelMatrix {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }
}

/// Pairwise squared distances between embedding rows, divided by the delay
/// count Q so the result is the per-lag average of snapshot distances.
pub fn pairwise_sqdist(embedding: &DelayEmbedding) -> Array2<f64> {
    let n = embedding.len();
    let q = embedding.q as f64;
    let rows = &embedding.rows;
    let mut out = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let ri = rows.row(i);
        for j in (i + 1)..n {
            let rj = rows.row(j);
            let mut s = 0.0;
            for (a, b) in ri.iter().zip(rj.iter()) {
                let d = a - b;
                s += d * d;
            }
            let v = s / q;
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Evaluate an unnormalized kernel matrix per the spec's family, building
/// the pairwise distances internally for the Gaussian case.
pub fn kernel_eval(spec: &KernelSpec, embedding: &DelayEmbedding) -> Result<KernelMatrix> {
    match spec.family {
        KernelFamily::Gaussian => {
            let sq = pairwise_sqdist(embedding);
            gaussian_kernel(spec, sq, embedding.base_index_offset)
        }
        KernelFamily::Covariance => covariance_kernel(spec, embedding),
    }
}

/// Gaussian kernel exp(−d²/ε) from a precomputed squared-distance matrix
/// (consumed in place).
pub fn gaussian_kernel(
    spec: &KernelSpec,
    sqdist: Array2<f64>,
    base_offset: usize,
) -> Result<KernelMatrix> {
    spec.validate()?;
    if spec.family != KernelFamily::Gaussian {
        return Err(Error::Config("gaussian_kernel called with a non-gaussian spec".into()));
    }
    let eps = spec.bandwidth;
    let mut values = sqdist;
    values.mapv_inplace(|d| (-d / eps).exp());
    Ok(KernelMatrix {
        values,
        normalization: Normalization::None,
        degree_q: Vec::new(),
        degree_d: Vec::new(),
        spec: KernelSpec { normalization: Normalization::None, ..spec.clone() },
        base_offset,
    })
}

/// Covariance kernel ⟨x, x′⟩ on embedding rows.
pub fn covariance_kernel(spec: &KernelSpec, embedding: &DelayEmbedding) -> Result<KernelMatrix> {
    spec.validate()?;
    if spec.family != KernelFamily::Covariance {
        return Err(Error::Config("covariance_kernel called with a non-covariance spec".into()));
    }
    let n = embedding.len();
    let rows = &embedding.rows;
    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let ri = rows.row(i);
        for j in i..n {
            let rj = rows.row(j);
            let mut s = 0.0;
            for (a, b) in ri.iter().zip(rj.iter()) {
                s += a * b;
            }
            values[[i, j]] = s;
            values[[j, i]] = s;
        }
    }
    Ok(KernelMatrix {
        values,
        normalization: Normalization::None,
        degree_q: Vec::new(),
        degree_d: Vec::new(),
        spec: spec.clone(),
        base_offset: embedding.base_index_offset,
    })
}

/// Two-stage normalization of a raw symmetric kernel with strictly positive
/// entries:
///
///   q_i = Σ_j K_ij,  K⁽¹⁾_ij = K_ij / (q_i^α q_j^α),  d_i = Σ_j K⁽¹⁾_ij,
///
/// then either the Markov (row-stochastic) form P_ij = K⁽¹⁾_ij / d_i, which
/// satisfies detailed balance with degree function d, or the symmetric form
/// S_ij = K⁽¹⁾_ij / (d_i d_j)^{1/2}, which shares its eigenvalues with P.
pub fn normalize(raw: KernelMatrix, mode: Normalization, alpha: f64) -> Result<KernelMatrix> {
    if mode == Normalization::None {
        return Err(Error::Config("normalize requires symmetric or markov mode".into()));
    }
    if raw.normalization != Normalization::None {
        return Err(Error::Config("kernel is already normalized".into()));
    }
    if raw.spec.family != KernelFamily::Gaussian {
        return Err(Error::Config(
            "normalization requires a strictly positive kernel (gaussian)".into(),
        ));
    }
    let n = raw.len();
    let mut values = raw.values;

    let degree_q: Vec<f64> = (0..n).map(|i| values.row(i).sum()).collect();
    if degree_q.iter().any(|&q| q == 0.0 || !q.is_finite()) {
        return Err(Error::DegenerateKernel(
            "a first-stage kernel degree vanished; the bandwidth is too narrow".into(),
        ));
    }
    let qa: Vec<f64> = degree_q.iter().map(|&q| q.powf(alpha)).collect();
    for i in 0..n {
        for j in 0..n {
            values[[i, j]] /= qa[i] * qa[j];
        }
    }
    let degree_d: Vec<f64> = (0..n).map(|i| values.row(i).sum()).collect();
    if degree_d.iter().any(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::DegenerateKernel(
            "a second-stage kernel degree vanished; the bandwidth is too narrow".into(),
        ));
    }
    match mode {
        Normalization::Markov => {
            for i in 0..n {
                for j in 0..n {
                    values[[i, j]] /= degree_d[i];
                }
            }
        }
        Normalization::Symmetric => {
            let sd: Vec<f64> = degree_d.iter().map(|&d| d.sqrt()).collect();
            for i in 0..n {
                for j in 0..n {
                    values[[i, j]] /= sd[i] * sd[j];
                }
            }
        }
        Normalization::None => unreachable!(),
    }
    Ok(KernelMatrix {
        values,
        normalization: mode,
        degree_q,
        degree_d,
        spec: KernelSpec { normalization: mode, alpha, ..raw.spec },
        base_offset: raw.base_offset,
    })
}

/// Median of the strictly positive pairwise squared distances: the default
/// Gaussian bandwidth.
pub fn median_bandwidth(sqdist: &Array2<f64>) -> Result<f64> {
    let n = sqdist.nrows();
    if n < 2 {
        return Err(Error::DegenerateData("need at least 2 points for a bandwidth".into()));
    }
    let mut positive = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sqdist[[i, j]];
            if d > 0.0 {
                positive.push(d);
            }
        }
    }
    if positive.is_empty() {
        return Err(Error::DegenerateData("all pairwise distances are zero".into()));
    }
    positive.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = positive.len() / 2;
    let median = if positive.len() % 2 == 1 {
        positive[mid]
    } else {
        0.5 * (positive[mid - 1] + positive[mid])
    };
    Ok(median)
}

/// A kernel row evaluated at an out-of-sample point.
#[derive(Debug, Clone)]
pub struct OosRow {
    pub values: Vec<f64>,
    /// Set when every raw kernel weight underflowed and the uniform
    /// fallback row was substituted.
    pub out_of_domain: bool,
}

const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Kernel row at a new covariate (or delay) vector, normalized consistently
/// with the training kernel.
///
/// For a Markov kernel the row is scaled into a probability density with
/// respect to the sampling measure, (1/N) Σ_n row_n = 1. For a symmetric
/// kernel the row is conjugated by the stored degrees so that the Nyström
/// average (1/N) Σ_n row_n φ_j(ω_n) equals λ_j φ_j at training points.
/// If every raw weight underflows the row degenerates to the uniform
/// density (all ones) and the flag is set.
pub fn out_of_sample_row(
    kernel: &KernelMatrix,
    embedding: &DelayEmbedding,
    x_new: &[f64],
) -> Result<OosRow> {
    let n = kernel.len();
    if embedding.len() != n {
        return Err(Error::Config(format!(
            "embedding has {} rows but kernel is {}x{}",
            embedding.len(),
            n,
            n
        )));
    }
    if x_new.len() != embedding.width() {
        return Err(Error::Config(format!(
            "query vector has length {} but the embedding width is {}",
            x_new.len(),
            embedding.width()
        )));
    }
    if kernel.spec.family != KernelFamily::Gaussian {
        return Err(Error::Config("out-of-sample rows require a gaussian kernel".into()));
    }
    if kernel.normalization == Normalization::None {
        return Err(Error::Config(
            "out-of-sample rows require a normalized (symmetric or markov) kernel".into(),
        ));
    }
    let eps = kernel.spec.bandwidth;
    let q = embedding.q as f64;
    let alpha = kernel.spec.alpha;

    let mut raw = vec![0.0f64; n];
    let mut max_raw = 0.0f64;
    for (i, r) in raw.iter_mut().enumerate() {
        let row = embedding.rows.row(i);
        let mut s = 0.0;
        for (a, b) in x_new.iter().zip(row.iter()) {
            let d = a - b;
            s += d * d;
        }
        *r = (-(s / q) / eps).exp();
        max_raw = max_raw.max(*r);
    }
    if max_raw < UNDERFLOW_FLOOR {
        log::warn!("query point is out of the kernel's domain; using the uniform density row");
        return Ok(OosRow { values: vec![1.0; n], out_of_domain: true });
    }

    let q_x: f64 = raw.iter().sum();
    let qa_x = q_x.powf(alpha);
    for (r, &qn) in raw.iter_mut().zip(&kernel.degree_q) {
        *r /= qa_x * qn.powf(alpha);
    }
    let d_x: f64 = raw.iter().sum();
    if d_x == 0.0 || !d_x.is_finite() {
        log::warn!("query point is out of the kernel's domain; using the uniform density row");
        return Ok(OosRow { values: vec![1.0; n], out_of_domain: true });
    }
    let nf = n as f64;
    match kernel.normalization {
        Normalization::Markov => {
            for r in raw.iter_mut() {
                *r = nf * (*r / d_x);
            }
        }
        Normalization::Symmetric => {
            let sd_x = d_x.sqrt();
            for (r, &dn) in raw.iter_mut().zip(&kernel.degree_d) {
                *r = nf * (*r / (sd_x * dn.sqrt()));
            }
        }
        Normalization::None => unreachable!(),
    }
    Ok(OosRow { values: raw, out_of_domain: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DelayEmbedding;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn embedding_from(rows: Array2<f64>, q: usize) -> DelayEmbedding {
        DelayEmbedding { q, rows, base_index_offset: q - 1 }
    }

    fn random_cloud(n: usize, m: usize, seed: u64) -> Array2<f64> {
        // deterministic LCG cloud; plenty for kernel tests
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut a = Array2::<f64>::zeros((n, m));
        for i in 0..n {
            for j in 0..m {
                a[[i, j]] = next();
            }
        }
        a
    }

    #[test]
    fn sqdist_q1_is_plain_euclidean() {
        let rows = array![[0.0, 0.0], [3.0, 4.0]];
        let emb = embedding_from(rows, 1);
        let d = pairwise_sqdist(&emb);
        assert_eq!(d[[0, 0]], 0.0);
        assert_eq!(d[[1, 1]], 0.0);
        assert_abs_diff_eq!(d[[0, 1]], 25.0, epsilon = 1e-14);
        assert_eq!(d[[0, 1]], d[[1, 0]]);
    }

    #[test]
    fn sqdist_matches_triple_loop_oracle() {
        // 5 delay-embedded points with Q = 3, m = 2 against a direct
        // evaluation of the per-lag average of snapshot distances
        let m = 2;
        let q = 3;
        let rows = random_cloud(5, m * q, 7);
        let emb = embedding_from(rows.clone(), q);
        let d = pairwise_sqdist(&emb);
        for i in 0..5 {
            for j in 0..5 {
                let mut s = 0.0;
                for lag in 0..q {
                    for c in 0..m {
                        let a = rows[[i, lag * m + c]];
                        let b = rows[[j, lag * m + c]];
                        s += (a - b) * (a - b);
                    }
                }
                let expect = s / q as f64;
                assert_abs_diff_eq!(d[[i, j]], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_entries() {
        let spec = KernelSpec::gaussian(2.0, 1, Normalization::None);
        let sq = array![[0.0, 2.0], [2.0, 0.0]];
        let k = gaussian_kernel(&spec, sq, 0).unwrap();
        assert_abs_diff_eq!(k.values[[0, 0]], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.values[[0, 1]], (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn covariance_orthogonal_rows() {
        let rows = array![[1.0, 0.0], [0.0, 2.0]];
        let emb = embedding_from(rows, 1);
        let spec = KernelSpec::covariance(1);
        let k = covariance_kernel(&spec, &emb).unwrap();
        assert_eq!(k.values[[0, 1]], 0.0);
        assert_eq!(k.values[[0, 0]], 1.0);
        assert_eq!(k.values[[1, 1]], 4.0);
    }

    #[test]
    fn normalize_uniform_kernel() {
        let spec = KernelSpec::gaussian(1.0, 1, Normalization::None);
        let raw = KernelMatrix {
            values: array![[1.0, 1.0], [1.0, 1.0]],
            normalization: Normalization::None,
            degree_q: vec![],
            degree_d: vec![],
            spec,
            base_offset: 0,
        };
        let p = normalize(raw, Normalization::Markov, 1.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(p.values[[i, j]], 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn normalize_two_stage_hand_oracle() {
        // K = [[1, 0.5], [0.5, 1]], α = 1:
        // q = (1.5, 1.5); K1 = K / (q_i q_j) = [[4/9, 2/9], [2/9, 4/9]];
        // d = (2/3, 2/3); P = [[2/3, 1/3], [1/3, 2/3]]
        let make_raw = || KernelMatrix {
            values: array![[1.0, 0.5], [0.5, 1.0]],
            normalization: Normalization::None,
            degree_q: vec![],
            degree_d: vec![],
            spec: KernelSpec::gaussian(1.0, 1, Normalization::None),
            base_offset: 0,
        };
        let p = normalize(make_raw(), Normalization::Markov, 1.0).unwrap();
        assert_abs_diff_eq!(p.values[[0, 0]], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.values[[0, 1]], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.values.row(0).sum(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.values.row(1).sum(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.degree_d[0], 2.0 / 3.0, epsilon = 1e-14);

        // symmetric variant: S = D^{1/2} P D^{-1/2}; for constant d the two
        // coincide, and the eigenvalues are {1, 1/3} in both cases
        let s = normalize(make_raw(), Normalization::Symmetric, 1.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(s.values[[i, j]], p.values[[i, j]], epsilon = 1e-14);
            }
        }
        let tr = s.values[[0, 0]] + s.values[[1, 1]];
        let det = s.values[[0, 0]] * s.values[[1, 1]] - s.values[[0, 1]] * s.values[[1, 0]];
        let disc = (tr * tr / 4.0 - det).sqrt();
        let (l0, l1) = (tr / 2.0 + disc, tr / 2.0 - disc);
        assert_abs_diff_eq!(l0, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l1, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn median_bandwidth_basics() {
        let sq = array![
            [0.0, 1.0, 4.0],
            [1.0, 0.0, 9.0],
            [4.0, 9.0, 0.0]
        ];
        assert_abs_diff_eq!(median_bandwidth(&sq).unwrap(), 4.0, epsilon = 1e-15);
        // zeros excluded: duplicate point contributes zero distances
        let sq = array![
            [0.0, 0.0, 4.0],
            [0.0, 0.0, 4.0],
            [4.0, 4.0, 0.0]
        ];
        assert_abs_diff_eq!(median_bandwidth(&sq).unwrap(), 4.0, epsilon = 1e-15);
        let z = Array2::<f64>::zeros((3, 3));
        assert!(median_bandwidth(&z).is_err());
    }

    #[test]
    fn median_bandwidth_splits_weights_in_half() {
        let rows = random_cloud(60, 3, 3);
        let emb = embedding_from(rows, 1);
        let sq = pairwise_sqdist(&emb);
        let eps = median_bandwidth(&sq).unwrap();
        let mut above = 0usize;
        let mut total = 0usize;
        for i in 0..60 {
            for j in (i + 1)..60 {
                total += 1;
                if (-sq[[i, j]] / eps).exp() > (-1.0f64).exp() {
                    above += 1;
                }
            }
        }
        let frac = above as f64 / total as f64;
        assert!((frac - 0.5).abs() < 0.05, "fraction above e^-1: {}", frac);
    }

    #[test]
    fn oos_row_at_training_point_matches_markov_row() {
        let rows = random_cloud(12, 2, 11);
        let emb = embedding_from(rows, 1);
        let spec = KernelSpec::gaussian(0.8, 1, Normalization::None);
        let raw = kernel_eval(&spec, &emb).unwrap();
        let p = normalize(raw, Normalization::Markov, 1.0).unwrap();
        let k = 4usize;
        let x: Vec<f64> = emb.rows.row(k).to_vec();
        let row = out_of_sample_row(&p, &emb, &x).unwrap();
        assert!(!row.out_of_domain);
        let n = 12.0;
        for j in 0..12 {
            let expect = n * p.values[[k, j]];
            assert_abs_diff_eq!(row.values[j], expect, epsilon = 1e-12 * expect.abs().max(1.0));
        }
        // density normalization: (1/N) Σ row = 1
        let mean = row.values.iter().sum::<f64>() / n;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn oos_row_duplicate_recompute_oracle() {
        // appending the training point as a duplicate and renormalizing from
        // scratch reproduces the out-of-sample row direction up to O(1/N)
        let n = 40usize;
        let rows = random_cloud(n, 2, 23);
        let emb = embedding_from(rows.clone(), 1);
        let spec = KernelSpec::gaussian(0.8, 1, Normalization::None);
        let p = normalize(kernel_eval(&spec, &emb).unwrap(), Normalization::Markov, 1.0).unwrap();
        let k = 7usize;
        let row = out_of_sample_row(&p, &emb, &rows.row(k).to_vec()).unwrap();

        let mut ext = Array2::<f64>::zeros((n + 1, 2));
        for i in 0..n {
            ext.row_mut(i).assign(&rows.row(i));
        }
        ext.row_mut(n).assign(&rows.row(k));
        let emb_ext = embedding_from(ext, 1);
        let p_ext =
            normalize(kernel_eval(&spec, &emb_ext).unwrap(), Normalization::Markov, 1.0).unwrap();
        // compare normalized row directions over the original n entries
        let a: Vec<f64> = (0..n).map(|j| p_ext.values[[n, j]]).collect();
        let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm_b: f64 = row.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        for j in 0..n {
            let da = a[j] / norm_a;
            let db = row.values[j] / norm_b;
            assert_abs_diff_eq!(da, db, epsilon = 5.0 / n as f64);
        }
    }

    #[test]
    fn oos_row_far_point_falls_back_to_uniform() {
        let rows = random_cloud(8, 2, 5);
        let emb = embedding_from(rows, 1);
        let spec = KernelSpec::gaussian(0.01, 1, Normalization::None);
        let p = normalize(kernel_eval(&spec, &emb).unwrap(), Normalization::Markov, 1.0).unwrap();
        let row = out_of_sample_row(&p, &emb, &[1e6, 1e6]).unwrap();
        assert!(row.out_of_domain);
        assert!(row.values.iter().all(|&v| v == 1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn markov_rows_sum_to_one_and_balance(seed in 0u64..1000) {
            let n = 20;
            let rows = random_cloud(n, 3, seed);
            let emb = embedding_from(rows, 1);
            let spec = KernelSpec::gaussian(1.5, 1, Normalization::None);
            let p = normalize(kernel_eval(&spec, &emb).unwrap(), Normalization::Markov, 1.0).unwrap();
            let d_max = p.degree_d.iter().cloned().fold(0.0f64, f64::max);
            for i in 0..n {
                let sum: f64 = p.values.row(i).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12);
                for j in 0..n {
                    prop_assert!(p.values[[i, j]] >= 0.0);
                    let balance = p.degree_d[i] * p.values[[i, j]] - p.degree_d[j] * p.values[[j, i]];
                    prop_assert!(balance.abs() <= 1e-12 * d_max);
                }
            }
        }

        #[test]
        fn gaussian_kernel_translation_invariant(seed in 0u64..1000, shift in -5.0..5.0f64) {
            let n = 15;
            let rows = random_cloud(n, 2, seed);
            let shifted = &rows + shift;
            let spec = KernelSpec::gaussian(1.0, 1, Normalization::None);
            let k1 = kernel_eval(&spec, &embedding_from(rows, 1)).unwrap();
            let k2 = kernel_eval(&spec, &embedding_from(shifted, 1)).unwrap();
            for (a, b) in k1.values.iter().zip(k2.values.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
