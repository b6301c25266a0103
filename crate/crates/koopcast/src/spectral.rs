//! The data-driven eigenbasis of kernel integral operators, Nyström
//! out-of-sample extension, shift-operator (Koopman) matrices, the POD
//! baseline, and autocorrelation diagnostics.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{out_of_sample_row, KernelMatrix, Normalization};
use crate::linalg::sym_eigh_top;

/// Relative eigenvalue floor below which modes are treated as numerically
/// rank deficient (they cannot be divided by in Nyström-type formulas).
pub const RANK_FLOOR: f64 = 1e-14;

/// Eigenpairs of a normalized kernel matrix viewed as an operator on
/// L²(μ_N), with the dual (biorthogonal) sample values.
///
/// Columns of `phi` are unit-norm in L²(μ_N), i.e. (1/N) Σ_n φ_j(ω_n)² = 1,
/// and ⟨φ′_i, φ_j⟩_{μ_N} = δ_ij. For a symmetric-normalized kernel the two
/// families coincide.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    /// Descending eigenvalues of the retained modes.
    pub eigenvalues: Vec<f64>,
    /// N×L sample values φ_j(ω_n).
    pub phi: Array2<f64>,
    /// N×L dual sample values φ′_j(ω_n).
    pub phi_dual: Array2<f64>,
    pub normalization: Normalization,
    pub n: usize,
}

impl EigenBasis {
    pub fn retained(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Empirical inner product ⟨f, g⟩_{μ_N} = (1/N) Σ_n f_n g_n.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let mut s = 0.0;
        for (a, b) in f.iter().zip(g.iter()) {
            s += a * b;
        }
        s / self.n as f64
    }
}

/// Matrix elements of the q-step shift operator in the eigenbasis: the
/// empirical Koopman approximation at lead time q·Δt.
#[derive(Debug, Clone)]
pub struct KoopmanMatrix {
    pub q: usize,
    pub dt: f64,
    pub entries: Array2<f64>,
}

/// POD of a data matrix: singular values, EOFs, and principal components.
#[derive(Debug, Clone)]
pub struct PodResult {
    pub singular_values: Vec<f64>,
    /// m×L, column j is the EOF u_j.
    pub eofs: Array2<f64>,
    /// N×L, entry (n, j) is ψ_j(ω_n) = ⟨u_j, y_n⟩.
    pub pcs: Array2<f64>,
}

/// Diagonalize a normalized kernel matrix and keep the top `l` eigenpairs.
///
/// For a Markov kernel P the solve runs on the symmetric conjugate
/// S = D^{1/2} P D^{−1/2} (D the stationary weights), and the biorthogonal
/// pair is recovered as φ_j = D^{−1/2} v_j, φ′_j = D^{1/2} v_j up to the
/// L²(μ_N) scaling. If fewer than `l` eigenvalues clear the rank floor the
/// basis is truncated with a warning.
pub fn eigenbasis(kernel: &KernelMatrix, l: usize) -> Result<EigenBasis> {
    let n = kernel.len();
    if l == 0 {
        return Err(Error::Config("basis size L must be at least 1".into()));
    }
    if l > n {
        return Err(Error::Config(format!(
            "basis size L = {} exceeds sample count N = {}",
            l, n
        )));
    }
    let s = match kernel.normalization {
        Normalization::Symmetric => kernel.values.clone(),
        Normalization::Markov => {
            let sd: Vec<f64> = kernel.degree_d.iter().map(|d| d.sqrt()).collect();
            let mut s = kernel.values.clone();
            for i in 0..n {
                for j in 0..n {
                    s[[i, j]] *= sd[i] / sd[j];
                }
            }
            // the conjugation is exactly symmetric in exact arithmetic;
            // enforce it so the symmetric eigensolver sees clean input
            for i in 0..n {
                for j in 0..i {
                    let v = 0.5 * (s[[i, j]] + s[[j, i]]);
                    s[[i, j]] = v;
                    s[[j, i]] = v;
                }
            }
            s
        }
        Normalization::None => {
            return Err(Error::Config(
                "eigenbasis requires a symmetric- or markov-normalized kernel".into(),
            ))
        }
    };
    let (mut values, vectors) = sym_eigh_top(s, l)?;
    let lambda0 = values.first().copied().unwrap_or(0.0);
    if lambda0 <= 0.0 {
        return Err(Error::RankDeficient("leading kernel eigenvalue is not positive".into()));
    }
    let usable = values.iter().take_while(|&&v| v > RANK_FLOOR * lambda0).count();
    if usable < l {
        log::warn!(
            "kernel spectrum supports only {} of {} requested modes; truncating",
            usable,
            l
        );
        values.truncate(usable);
    }
    let l = values.len();
    let nf = n as f64;
    let mut phi = Array2::<f64>::zeros((n, l));
    let mut phi_dual = Array2::<f64>::zeros((n, l));
    match kernel.normalization {
        Normalization::Symmetric => {
            let scale = nf.sqrt();
            for j in 0..l {
                for i in 0..n {
                    let v = scale * vectors[[i, j]];
                    phi[[i, j]] = v;
                    phi_dual[[i, j]] = v;
                }
            }
        }
        Normalization::Markov => {
            let total: f64 = kernel.degree_d.iter().sum();
            let pi: Vec<f64> = kernel.degree_d.iter().map(|d| d / total).collect();
            let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
            for j in 0..l {
                let mut s2 = 0.0;
                for i in 0..n {
                    let w = vectors[[i, j]] / sqrt_pi[i];
                    s2 += w * w;
                }
                let s = (s2 / nf).sqrt();
                for i in 0..n {
                    phi[[i, j]] = vectors[[i, j]] / sqrt_pi[i] / s;
                    phi_dual[[i, j]] = nf * s * sqrt_pi[i] * vectors[[i, j]];
                }
            }
        }
        Normalization::None => unreachable!(),
    }
    Ok(EigenBasis {
        eigenvalues: values,
        phi,
        phi_dual,
        normalization: kernel.normalization,
        n,
    })
}

/// Nyström extension of the retained eigenfunctions to a new covariate (or
/// delay) vector: component j is (1/λ_j)·(1/N) Σ_n row(x)_n φ_j(ω_n), with
/// the out-of-sample row normalized consistently with the training kernel.
/// At a training point this reproduces the stored φ_j values. Modes under
/// the rank floor are returned as zero.
pub fn nystrom(
    basis: &EigenBasis,
    kernel: &KernelMatrix,
    embedding: &crate::dynamics::DelayEmbedding,
    x_new: &[f64],
) -> Result<Vec<f64>> {
    if basis.normalization != kernel.normalization {
        return Err(Error::Config(
            "basis and kernel normalizations disagree in nystrom extension".into(),
        ));
    }
    let row = out_of_sample_row(kernel, embedding, x_new)?;
    Ok(nystrom_from_row(basis, &row.values))
}

/// The Nyström average against a precomputed out-of-sample row.
pub fn nystrom_from_row(basis: &EigenBasis, row: &[f64]) -> Vec<f64> {
    let n = basis.n;
    let nf = n as f64;
    let lambda0 = basis.eigenvalues[0];
    let mut out = vec![0.0; basis.retained()];
    let mut skipped = false;
    for (j, out_j) in out.iter_mut().enumerate() {
        let lambda = basis.eigenvalues[j];
        if lambda <= RANK_FLOOR * lambda0 {
            skipped = true;
            continue;
        }
        let mut s = 0.0;
        for i in 0..n {
            s += row[i] * basis.phi[[i, j]];
        }
        *out_j = s / nf / lambda;
    }
    if skipped {
        log::warn!("nystrom extension skipped modes under the rank floor");
    }
    out
}

/// Matrix elements of the q-step shift operator,
/// U_ij(q) = (1/(N−q)) Σ_{n=0}^{N−1−q} φ′_i(ω_n) φ_j(ω_{n+q}).
///
/// The 1/(N−q) scaling removes the lead-dependent amplitude bias of the
/// truncated time average; at q = 0 biorthogonality makes this the identity.
pub fn shift_matrix(basis: &EigenBasis, q: usize, dt: f64) -> Result<KoopmanMatrix> {
    let n = basis.n;
    let l = basis.retained();
    if q >= n {
        return Err(Error::Config(format!(
            "shift steps q = {} must be smaller than N = {}",
            q, n
        )));
    }
    let mut entries = Array2::<f64>::zeros((l, l));
    for t in 0..(n - q) {
        let dual = basis.phi_dual.row(t);
        let fwd = basis.phi.row(t + q);
        for i in 0..l {
            let w = dual[i];
            for j in 0..l {
                entries[[i, j]] += w * fwd[j];
            }
        }
    }
    let scale = 1.0 / (n - q) as f64;
    entries.mapv_inplace(|x| x * scale);
    Ok(KoopmanMatrix { q, dt, entries })
}

/// Top-L POD of a data matrix whose rows are the samples y_n.
pub fn pod(data: &Array2<f64>, l: usize) -> Result<PodResult> {
    use ndarray_linalg::{svddc::SVDDC, JobSvd};
    let (n, m) = data.dim();
    let rank_cap = n.min(m);
    if l == 0 || l > rank_cap {
        return Err(Error::Config(format!(
            "POD mode count L = {} must lie in 1..={}",
            l, rank_cap
        )));
    }
    let (_, s, vt) = data
        .svddc(JobSvd::Some)
        .map_err(|e| Error::Numerical(format!("svd failed: {}", e)))?;
    let vt = vt.ok_or_else(|| Error::Numerical("svd returned no right singular vectors".into()))?;
    let mut eofs = Array2::<f64>::zeros((m, l));
    let mut singular_values = Vec::with_capacity(l);
    for j in 0..l {
        singular_values.push(s[j]);
        // deterministic sign: first significant EOF component positive
        let row = vt.row(j);
        let max_abs = row.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let flip = row
            .iter()
            .find(|x| x.abs() > 1e-8 * max_abs)
            .map(|&x| x < 0.0)
            .unwrap_or(false);
        for c in 0..m {
            eofs[[c, j]] = if flip { -vt[[j, c]] } else { vt[[j, c]] };
        }
    }
    let mut pcs = Array2::<f64>::zeros((n, l));
    for r in 0..n {
        for j in 0..l {
            let mut s = 0.0;
            for c in 0..m {
                s += eofs[[c, j]] * data[[r, c]];
            }
            pcs[[r, j]] = s;
        }
    }
    Ok(PodResult { singular_values, eofs, pcs })
}

/// Normalized empirical autocorrelation C(q) = ⟨f, U^q f⟩ / ⟨f, f⟩ with the
/// unbiased 1/(N−q) scaling, optionally after centering the series.
pub fn autocorrelation(
    series: &[Complex64],
    q_max: usize,
    centered: bool,
) -> Result<Vec<Complex64>> {
    let n = series.len();
    if q_max >= n {
        return Err(Error::Config(format!(
            "autocorrelation lag {} must be smaller than N = {}",
            q_max, n
        )));
    }
    let mut f: Vec<Complex64> = series.to_vec();
    if centered {
        let mean = f.iter().sum::<Complex64>() / n as f64;
        for z in &mut f {
            *z -= mean;
        }
    }
    let mut c = Vec::with_capacity(q_max + 1);
    for q in 0..=q_max {
        let mut s = Complex64::new(0.0, 0.0);
        for t in 0..(n - q) {
            s += f[t].conj() * f[t + q];
        }
        c.push(s / (n - q) as f64);
    }
    let c0 = c[0];
    if c0.norm() == 0.0 {
        return Err(Error::DegenerateData(
            "series has zero variance; autocorrelation is undefined".into(),
        ));
    }
    for z in &mut c {
        *z /= c0;
    }
    Ok(c)
}
