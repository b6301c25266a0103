//! Coherent pattern extraction: the skew-symmetric finite-difference
//! generator in the kernel eigenbasis, its compactified (smoothed) variant,
//! Dirichlet-energy ranking of eigenvectors, and approximate-eigenfunction
//! residuals.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::skew_eigen;
use crate::spectral::{shift_matrix, EigenBasis, KoopmanMatrix};

/// Compactified generator in the top-L eigenbasis together with its
/// spectral data. Eigenfrequencies come in exact ± pairs (plus zeros) and
/// are sorted by |α̃| ascending, the +α̃ member first.
#[derive(Debug, Clone)]
pub struct GeneratorModel {
    /// Finite-difference generator V = (U(1) − U(1)ᵀ)/(2Δt); exactly
    /// skew-symmetric by construction.
    pub v_raw: Array2<f64>,
    /// Ṽ = Λ^{1/2} V Λ^{1/2}; exactly skew-symmetric.
    pub v_compact: Array2<f64>,
    /// Eigenfrequencies α̃_j (radians per unit time): eigenvalues of Ṽ are iα̃_j.
    pub eigenfrequencies: Vec<f64>,
    /// L×L, column j holds the unit-norm eigenvector coefficients w_j.
    pub eigvec_coeffs: Array2<Complex64>,
    /// Dirichlet (roughness) energy of each eigenvector.
    pub dirichlet_energies: Vec<f64>,
    pub dt: f64,
    pub l: usize,
}

impl GeneratorModel {
    /// Indices of nonzero-frequency modes ordered by increasing Dirichlet
    /// energy (most coherent first).
    pub fn nonzero_modes_by_energy(&self) -> Vec<usize> {
        let mut idx: Vec<usize> =
            (0..self.l).filter(|&j| self.eigenfrequencies[j] != 0.0).collect();
        idx.sort_by(|&a, &b| {
            self.dirichlet_energies[a]
                .partial_cmp(&self.dirichlet_energies[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Second-order finite-difference approximation of the generator from the
/// 1-step shift matrix: (U(1) − U(1)ᵀ)/(2Δt). Skew-symmetry is exact by
/// antisymmetrized construction.
pub fn generator_fd(basis: &EigenBasis, dt: f64) -> Result<Array2<f64>> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {}", dt)));
    }
    let a = shift_matrix(basis, 1, dt)?.entries;
    let l = a.nrows();
    let mut v = Array2::<f64>::zeros((l, l));
    for i in 0..l {
        for j in (i + 1)..l {
            let w = (a[[i, j]] - a[[j, i]]) / (2.0 * dt);
            v[[i, j]] = w;
            v[[j, i]] = -w;
        }
    }
    Ok(v)
}

/// Smooth the generator into the compact operator Ṽ = Λ^{1/2} V Λ^{1/2} and
/// eigendecompose it. The kernel eigenvalues λ play the role of the
/// regularization: smaller bandwidths push λ → 1 and Ṽ → V.
pub fn compactify(v_raw: Array2<f64>, eigenvalues: &[f64], dt: f64) -> Result<GeneratorModel> {
    let l = v_raw.nrows();
    if v_raw.ncols() != l {
        return Err(Error::Domain("generator matrix must be square".into()));
    }
    if eigenvalues.len() < l {
        return Err(Error::RankDeficient(format!(
            "{} eigenvalues supplied for an L = {} generator",
            eigenvalues.len(),
            l
        )));
    }
    let lambda = &eigenvalues[..l];
    if lambda.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::RankDeficient(
            "compactification requires strictly positive kernel eigenvalues; reduce L".into(),
        ));
    }
    let sq: Vec<f64> = lambda.iter().map(|x| x.sqrt()).collect();
    let mut v_compact = Array2::<f64>::zeros((l, l));
    for i in 0..l {
        for j in (i + 1)..l {
            let w = sq[i] * v_raw[[i, j]] * sq[j];
            v_compact[[i, j]] = w;
            v_compact[[j, i]] = -w;
        }
    }
    let modes = skew_eigen(&v_compact)?;
    let mut eigenfrequencies = Vec::with_capacity(l);
    let mut eigvec_coeffs = Array2::<Complex64>::zeros((l, l));
    let mut dirichlet_energies = Vec::with_capacity(l);
    for (k, mode) in modes.iter().enumerate() {
        eigenfrequencies.push(mode.frequency);
        for i in 0..l {
            eigvec_coeffs[[i, k]] = mode.vector[i];
        }
        dirichlet_energies.push(dirichlet(&mode.vector, lambda)?);
    }
    Ok(GeneratorModel {
        v_raw,
        v_compact,
        eigenfrequencies,
        eigvec_coeffs,
        dirichlet_energies,
        dt,
        l,
    })
}

/// Dirichlet energy of a coefficient vector in the eigenbasis:
/// D = (Σ_j |c_j|²/λ_j) / (Σ_j |c_j|²). Small values mean smooth
/// (coherent) observables; the minimum over unit vectors is 1/λ₀.
pub fn dirichlet(coeffs: &[Complex64], eigenvalues: &[f64]) -> Result<f64> {
    if coeffs.len() > eigenvalues.len() {
        return Err(Error::Domain("more coefficients than eigenvalues".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (c, &lambda) in coeffs.iter().zip(eigenvalues) {
        if !(lambda > 0.0) {
            return Err(Error::Domain("dirichlet energy needs positive eigenvalues".into()));
        }
        let a = c.norm_sqr();
        num += a / lambda;
        den += a;
    }
    if den == 0.0 {
        return Err(Error::Domain("dirichlet energy of the zero vector is undefined".into()));
    }
    Ok(num / den)
}

/// Residual of the approximate-eigenfunction relation at lead q:
/// ε = ‖U(q)·z − e^{iαqΔt}·z‖ / ‖z‖ in coefficient (= L²(μ_N)) norm.
pub fn approx_eigen_residual(
    basis: &EigenBasis,
    z: &[Complex64],
    alpha: f64,
    q: usize,
    dt: f64,
) -> Result<f64> {
    let u = shift_matrix(basis, q, dt)?;
    approx_eigen_residual_with(&u, z, alpha)
}

/// Same residual against a precomputed shift matrix.
pub fn approx_eigen_residual_with(
    u: &KoopmanMatrix,
    z: &[Complex64],
    alpha: f64,
) -> Result<f64> {
    let l = u.entries.nrows();
    if z.len() != l {
        return Err(Error::Domain(format!(
            "coefficient vector has length {} but the shift matrix is {}x{}",
            z.len(),
            l,
            l
        )));
    }
    let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("residual of the zero vector is undefined".into()));
    }
    let phase = Complex64::from_polar(1.0, alpha * u.q as f64 * u.dt);
    let mut resid = 0.0;
    for i in 0..l {
        let mut uz = Complex64::new(0.0, 0.0);
        for j in 0..l {
            uz += u.entries[[i, j]] * z[j];
        }
        resid += (uz - phase * z[i]).norm_sqr();
    }
    Ok(resid.sqrt() / norm)
}

/// Sample values of generator eigenvector j along the trajectory:
/// z_n = Σ_l w_{j,l} φ_l(ω_n), scaled to unit L²(μ_N) norm.
pub fn eigenfunction_timeseries(
    model: &GeneratorModel,
    basis: &EigenBasis,
    j: usize,
) -> Result<Vec<Complex64>> {
    if j >= model.l {
        return Err(Error::Config(format!(
            "mode index {} out of range for L = {}",
            j, model.l
        )));
    }
    if basis.retained() < model.l {
        return Err(Error::Config("basis is smaller than the generator model".into()));
    }
    let n = basis.n;
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for (t, zt) in z.iter_mut().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for l in 0..model.l {
            s += model.eigvec_coeffs[[l, j]] * basis.phi[[t, l]];
        }
        *zt = s;
    }
    let norm = (z.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    if norm > 0.0 {
        for c in &mut z {
            *c /= norm;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{delay_embed, simulate, CovariateMap, SystemSpec};
    use crate::kernels::{kernel_eval, normalize, KernelSpec, Normalization};
    use crate::spectral::{autocorrelation, eigenbasis};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    // dt = 0.5 so that a few hundred samples cover the torus quasirandomly
    // instead of tracing a thin winding band
    fn torus_symmetric_basis(
        n: usize,
        l: usize,
        eps: f64,
    ) -> (EigenBasis, f64) {
        let spec = SystemSpec { n_samples: n, dt: 0.5, ..SystemSpec::torus_default() };
        let data = simulate(&spec, &CovariateMap::torus_chart()).unwrap();
        let emb = delay_embed(&data, 1).unwrap();
        let kspec = KernelSpec::gaussian(eps, 1, Normalization::None);
        let raw = kernel_eval(&kspec, &emb).unwrap();
        let kernel = normalize(raw, Normalization::Symmetric, 1.0).unwrap();
        (eigenbasis(&kernel, l).unwrap(), spec.dt)
    }

    #[test]
    fn generator_is_exactly_skew() {
        let (basis, dt) = torus_symmetric_basis(200, 7, 0.4);
        let v = generator_fd(&basis, dt).unwrap();
        for i in 0..7 {
            assert_eq!(v[[i, i]], 0.0);
            for j in 0..7 {
                assert_eq!(v[[i, j]], -v[[j, i]]);
            }
        }
    }

    #[test]
    fn generator_annihilates_constants() {
        // markov basis has the exact constant as its leading mode; the
        // generator column for it only carries boundary truncation effects
        let spec = SystemSpec { n_samples: 400, dt: 0.5, ..SystemSpec::torus_default() };
        let data = simulate(&spec, &CovariateMap::torus_chart()).unwrap();
        let emb = delay_embed(&data, 1).unwrap();
        let kspec = KernelSpec::gaussian(0.4, 1, Normalization::None);
        let kernel = normalize(kernel_eval(&kspec, &emb).unwrap(), Normalization::Markov, 1.0).unwrap();
        let basis = eigenbasis(&kernel, 6).unwrap();
        let v = generator_fd(&basis, spec.dt).unwrap();
        let mut norm = 0.0;
        for i in 0..6 {
            norm += v[[i, 0]] * v[[i, 0]];
        }
        let norm = norm.sqrt();
        let bound = 10.0 * (6.0f64).sqrt() / (400.0 * spec.dt);
        assert!(norm < bound, "‖V e0‖ = {} exceeds {}", norm, bound);
    }

    #[test]
    fn compactify_two_by_two_analytic() {
        let a = 0.9;
        let v = array![[0.0, a], [-a, 0.0]];
        let lambda = [0.8, 0.4];
        let model = compactify(v, &lambda, 0.05).unwrap();
        let expect = a * (lambda[0] * lambda[1]).sqrt();
        assert_abs_diff_eq!(model.eigenfrequencies[0], expect, epsilon = 1e-12);
        assert_abs_diff_eq!(model.eigenfrequencies[1], -expect, epsilon = 1e-12);
        // w = (1, ±i)/√2 gives D = (1/2)(1/λ0 + 1/λ1)
        let d_expect = 0.5 * (1.0 / lambda[0] + 1.0 / lambda[1]);
        assert_abs_diff_eq!(model.dirichlet_energies[0], d_expect, epsilon = 1e-12);
        // exact skew-symmetry of the compactified operator
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(model.v_compact[[i, j]], -model.v_compact[[j, i]]);
            }
        }
    }

    #[test]
    fn compactify_rejects_nonpositive_eigenvalues() {
        let v = array![[0.0, 1.0], [-1.0, 0.0]];
        assert!(compactify(v, &[1.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn dirichlet_formulas() {
        let e0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert_abs_diff_eq!(dirichlet(&e0, &[1.0, 0.5]).unwrap(), 1.0, epsilon = 1e-15);
        let e1 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert_abs_diff_eq!(dirichlet(&e1, &[1.0, 0.5]).unwrap(), 2.0, epsilon = 1e-15);
        let s = 1.0 / 2.0f64.sqrt();
        let c = [Complex64::new(s, 0.0), Complex64::new(s, 0.0)];
        assert_abs_diff_eq!(dirichlet(&c, &[1.0, 0.5]).unwrap(), 1.5, epsilon = 1e-14);
        let zero = [Complex64::new(0.0, 0.0)];
        assert!(dirichlet(&zero, &[1.0]).is_err());
    }

    #[test]
    fn residual_of_constant_mode_is_small() {
        let spec = SystemSpec { n_samples: 400, dt: 0.5, ..SystemSpec::torus_default() };
        let data = simulate(&spec, &CovariateMap::torus_chart()).unwrap();
        let emb = delay_embed(&data, 1).unwrap();
        let kspec = KernelSpec::gaussian(0.4, 1, Normalization::None);
        let kernel = normalize(kernel_eval(&kspec, &emb).unwrap(), Normalization::Markov, 1.0).unwrap();
        let basis = eigenbasis(&kernel, 6).unwrap();
        let mut e0 = vec![Complex64::new(0.0, 0.0); 6];
        e0[0] = Complex64::new(1.0, 0.0);
        let q = 3;
        let eps = approx_eigen_residual(&basis, &e0, 0.0, q, spec.dt).unwrap();
        assert!(eps < 0.1, "constant-mode residual {} too large", eps);
    }

    #[test]
    fn torus_mode_series_are_coherent() {
        let (basis, dt) = torus_symmetric_basis(400, 5, 0.4);
        let v = generator_fd(&basis, dt).unwrap();
        let model = compactify(v, &basis.eigenvalues, dt).unwrap();
        // zero-frequency mode tracks the constant: nearly constant series
        let z0 = eigenfunction_timeseries(&model, &basis, 0).unwrap();
        assert_eq!(model.eigenfrequencies[0], 0.0);
        let mean = z0.iter().sum::<Complex64>() / z0.len() as f64;
        let var = z0.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / z0.len() as f64;
        assert!(var.sqrt() < 0.2, "zero mode deviates from constant: std {}", var.sqrt());
        // the lowest nonzero-|α̃| mode evolves nearly harmonically
        let j = model.nonzero_modes_by_energy()[0];
        let z = eigenfunction_timeseries(&model, &basis, j).unwrap();
        let c = autocorrelation(&z, 50, false).unwrap();
        for (q, val) in c.iter().enumerate() {
            assert!(
                val.norm() > 0.9,
                "|C({})| = {} below 0.9 for coherent torus mode",
                q,
                val.norm()
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn dirichlet_minimized_by_smoothest_mode(
            re in proptest::collection::vec(-1.0..1.0f64, 4),
            im in proptest::collection::vec(-1.0..1.0f64, 4),
        ) {
            let lambda = [1.0, 0.7, 0.3, 0.1];
            let c: Vec<Complex64> = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
            prop_assume!(c.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-12);
            let d = dirichlet(&c, &lambda).unwrap();
            prop_assert!(d >= 1.0 / lambda[0] - 1e-10);
        }
    }
}
