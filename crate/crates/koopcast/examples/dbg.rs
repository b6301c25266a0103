use koopcast::dynamics::*;
use koopcast::kernels::*;
use ndarray::Array2;

fn dsyevd_raw(n: usize, mut buf: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut w = vec![0.0f64; n];
    let nn = n as i32;
    let mut info = 0i32;
    unsafe {
        let (mut wq, mut iwq) = (0.0f64, 0i32);
        lapack_sys::dsyevd_(
            &(b'V' as std::ffi::c_char), &(b'L' as std::ffi::c_char), &nn,
            buf.as_mut_ptr(), &nn, w.as_mut_ptr(),
            &mut wq, &(-1i32), &mut iwq, &(-1i32), &mut info,
        );
        let lwork = wq as i32;
        let liwork = iwq;
        let mut work = vec![0.0f64; lwork as usize];
        let mut iwork = vec![0i32; liwork as usize];
        lapack_sys::dsyevd_(
            &(b'V' as std::ffi::c_char), &(b'L' as std::ffi::c_char), &nn,
            buf.as_mut_ptr(), &nn, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
        assert_eq!(info, 0);
    }
    (w, buf)
}

fn main() {
    let spec = SystemSpec { n_samples: 400, dt: 0.5, ..SystemSpec::torus_default() };
    let data = simulate(&spec, &CovariateMap::torus_chart()).unwrap();
    let emb = delay_embed(&data, 1).unwrap();
    let kspec = KernelSpec::gaussian(0.4, 1, Normalization::None);
    let raw = kernel_eval(&kspec, &emb).unwrap();
    let kernel = normalize(raw, Normalization::Markov, 1.0).unwrap();
    let n = 400;
    let sdd: Vec<f64> = kernel.degree_d.iter().map(|d| d.sqrt()).collect();
    let norm_sd: f64 = sdd.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut s = kernel.values.clone();
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] *= sdd[i] / sdd[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    let s_copy = s.clone();
    let (w, buf) = dsyevd_raw(n, s.into_raw_vec());
    // which column has max overlap with the true top eigenvector √d?
    let mut best = (0usize, 0.0f64);
    for k in 0..n {
        let col = &buf[k * n..(k + 1) * n];
        let dot: f64 = col.iter().zip(&sdd).map(|(a, b)| a * b / norm_sd).sum();
        if dot.abs() > best.1 {
            best = (k, dot.abs());
        }
    }
    println!("best-overlap column: {} overlap {:.6} (expect col {})", best.0, best.1, n - 1);
    // global quality: residual of EVERY column
    let mut nbad = 0;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let col = &buf[k * n..(k + 1) * n];
        let mut resid: f64 = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += s_copy[[i, j]] * col[j];
            }
            resid += (acc - w[k] * col[i]).powi(2);
        }
        let r = resid.sqrt();
        worst = worst.max(r);
        if r > 1e-8 { nbad += 1; }
    }
    println!("bad columns: {} / {}, worst residual {:.3e}", nbad, n, worst);
    // orthogonality of returned vector set
    let mut max_ortho_dev: f64 = 0.0;
    for k in [0usize, 1, n/2, n-2, n-1] {
        for m in [0usize, 1, n/2, n-2, n-1] {
            let ca = &buf[k * n..(k + 1) * n];
            let cb = &buf[m * n..(m + 1) * n];
            let dot: f64 = ca.iter().zip(cb).map(|(a, b)| a * b).sum();
            let target = if k == m { 1.0 } else { 0.0 };
            max_ortho_dev = max_ortho_dev.max((dot - target).abs());
        }
    }
    println!("orthogonality spot-check deviation: {:.3e}", max_ortho_dev);
    let _ = Array2::<f64>::zeros((1, 1));
}
