use koopcast::dynamics::*;
use koopcast::kernels::*;
use ndarray_linalg::{Eigh, UPLO};
use std::time::Instant;

fn main() {
    let spec = SystemSpec { n_samples: 2000, dt: 0.5, ..SystemSpec::torus_default() };
    let data = simulate(&spec, &CovariateMap::torus_chart()).unwrap();
    let emb = delay_embed(&data, 1).unwrap();
    let kspec = KernelSpec::gaussian(0.2, 1, Normalization::None);
    let raw = kernel_eval(&kspec, &emb).unwrap();
    let kernel = normalize(raw, Normalization::Symmetric, 1.0).unwrap();
    let n = 2000;
    let s = kernel.values.clone();
    let t0 = Instant::now();
    let (w, v) = s.eigh(UPLO::Lower).unwrap();
    println!("dsyev n=2000 took {:?}", t0.elapsed());
    println!("top eigenvalues: {:?}", &w.as_slice().unwrap()[n-4..]);
    // residuals + orthogonality for several columns
    let mut worst: f64 = 0.0;
    let cols = [n-1, n-2, n-10, n-100, n/2, 0];
    for &k in &cols {
        let mut resid: f64 = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += kernel.values[[i, j]] * v[[j, k]];
            }
            resid += (acc - w[k] * v[[i, k]]).powi(2);
        }
        worst = worst.max(resid.sqrt());
    }
    println!("worst residual over sample columns: {:.3e}", worst);
    let mut max_ortho: f64 = 0.0;
    for &k in &cols {
        for &m in &cols {
            let mut dot = 0.0;
            for i in 0..n {
                dot += v[[i, k]] * v[[i, m]];
            }
            let target = if k == m { 1.0 } else { 0.0 };
            max_ortho = max_ortho.max((dot - target).abs());
        }
    }
    println!("orthogonality deviation: {:.3e}", max_ortho);
}
