//! Thin wrappers over the system LAPACK for the dense eigenproblems used
//! throughout the crate, plus the skew-symmetric eigensolver that backs the
//! compactified generator.
//!
//! Conventions enforced here so that downstream output is deterministic:
//! eigenvalues are returned in descending order, each eigenvector has its
//! first significant component made positive (real case) or its
//! largest-magnitude component made real positive (complex case), and ties
//! (|λ_i − λ_j| < 1e−12) are ordered by the index of the dominant component.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix via `dsyevd`, keeping the
/// top `l` eigenpairs by eigenvalue.
///
/// Consumes the input (LAPACK overwrites it). Returns eigenvalues in
/// descending order and an n×l matrix whose columns are the matching
/// orthonormal eigenvectors.
pub fn sym_eigh_top(a: Array2<f64>, l: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Domain(format!(
            "symmetric eigensolver needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if l > n {
        return Err(Error::Domain(format!(
            "requested {} eigenpairs from a {}x{} matrix",
            l, n, n
        )));
    }
    // The buffer is interpreted column-major by LAPACK; for a symmetric
    // matrix the transposed reading is the same matrix.
    let mut buf = a.into_raw_vec();
    let mut w = vec![0.0f64; n];
    let nn = n as i32;
    let mut info = 0i32;
    unsafe {
        // workspace query
        let (mut wq, mut iwq) = (0.0f64, 0i32);
        let (lwork_q, liwork_q) = (-1i32, -1i32);
        lapack_sys::dsyevd_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &nn,
            buf.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            &mut wq,
            &lwork_q,
            &mut iwq,
            &liwork_q,
            &mut info,
        );
        if info != 0 {
            return Err(Error::Lapack { routine: "dsyevd (workspace)", info });
        }
        let lwork = wq as i32;
        let liwork = iwq;
        let mut work = vec![0.0f64; lwork as usize];
        let mut iwork = vec![0i32; liwork as usize];
        lapack_sys::dsyevd_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &nn,
            buf.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    // Ascending from LAPACK; eigenvector k is contiguous at buf[k*n..(k+1)*n].
    // Take the top l in descending order.
    let mut values = Vec::with_capacity(l);
    let mut vectors = Array2::<f64>::zeros((n, l));
    for j in 0..l {
        let src = n - 1 - j;
        values.push(w[src]);
        let col = &buf[src * n..(src + 1) * n];
        let mut column = vectors.column_mut(j);
        for i in 0..n {
            column[i] = col[i];
        }
    }
    order_ties_and_fix_signs(&mut values, &mut vectors);
    Ok((values, vectors))
}

/// Deterministic ordering inside eigenvalue ties and a fixed sign convention.
fn order_ties_and_fix_signs(values: &mut [f64], vectors: &mut Array2<f64>) {
    let l = values.len();
    // Reorder within runs of equal eigenvalues by the index of the dominant
    // component of each vector.
    let mut start = 0;
    while start < l {
        let mut end = start + 1;
        while end < l && (values[end - 1] - values[end]).abs() < 1e-12 {
            end += 1;
        }
        if end - start > 1 {
            let mut order: Vec<usize> = (start..end).collect();
            order.sort_by_key(|&j| dominant_index(vectors, j));
            let snapshot: Vec<(f64, Vec<f64>)> = order
                .iter()
                .map(|&j| (values[j], vectors.column(j).to_vec()))
                .collect();
            for (offset, (val, col)) in snapshot.into_iter().enumerate() {
                values[start + offset] = val;
                let mut column = vectors.column_mut(start + offset);
                for (i, x) in col.into_iter().enumerate() {
                    column[i] = x;
                }
            }
        }
        start = end;
    }
    for j in 0..l {
        let col = vectors.column(j);
        let max_abs = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max_abs == 0.0 {
            continue;
        }
        let lead = col.iter().find(|x| x.abs() > 1e-8 * max_abs);
        if let Some(&x) = lead {
            if x < 0.0 {
                vectors.column_mut(j).mapv_inplace(|v| -v);
            }
        }
    }
}

fn dominant_index(vectors: &Array2<f64>, j: usize) -> usize {
    let col = vectors.column(j);
    let mut best = 0usize;
    let mut best_abs = -1.0f64;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    best
}

/// Eigendecomposition of a complex Hermitian matrix via `zheev`.
///
/// `h` is given column-major. Returns eigenvalues ascending with eigenvector
/// k contiguous at `vectors[k*n..(k+1)*n]`.
fn zheev_colmajor(mut h: Vec<Complex64>, n: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut w = vec![0.0f64; n];
    let nn = n as i32;
    let mut info = 0i32;
    let mut rwork = vec![0.0f64; (3 * n).max(1)];
    unsafe {
        let mut wq = Complex64::new(0.0, 0.0);
        let lwork_q = -1i32;
        lapack_sys::zheev_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &nn,
            h.as_mut_ptr() as *mut _,
            &nn,
            w.as_mut_ptr(),
            &mut wq as *mut Complex64 as *mut _,
            &lwork_q,
            rwork.as_mut_ptr(),
            &mut info,
        );
        if info != 0 {
            return Err(Error::Lapack { routine: "zheev (workspace)", info });
        }
        let lwork = wq.re as i32;
        let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
        lapack_sys::zheev_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &nn,
            h.as_mut_ptr() as *mut _,
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheev", info });
    }
    Ok((w, h))
}

/// One eigenmode of a real skew-symmetric matrix: `matrix · vector = iα · vector`.
#[derive(Debug, Clone)]
pub struct SkewMode {
    /// Eigenfrequency α (the eigenvalue is iα).
    pub frequency: f64,
    /// Unit-norm complex eigenvector.
    pub vector: Vec<Complex64>,
}

/// Full eigendecomposition of a real skew-symmetric matrix.
///
/// Solves the Hermitian problem for i·V and reassembles modes so that
/// nonzero frequencies come in exact ± pairs with exactly conjugate
/// eigenvectors. Frequencies below 1e−12 of the largest are snapped to zero.
/// Modes are ordered by |α| ascending (zeros first), the +α member before
/// the −α member of each pair; the phase of each vector is fixed by making
/// its largest-magnitude component real positive.
pub fn skew_eigen(v: &Array2<f64>) -> Result<Vec<SkewMode>> {
    let n = v.nrows();
    if v.ncols() != n {
        return Err(Error::Domain(format!(
            "skew eigensolver needs a square matrix, got {}x{}",
            n,
            v.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // H = i·V, Hermitian when V is skew-symmetric. Column-major fill.
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            h[i + j * n] = Complex64::new(0.0, v[[i, j]]);
        }
    }
    let (beta, vecs) = zheev_colmajor(h, n)?;
    // H u = β u  ⇔  V u = i(−β) u. β is ascending, and the spectrum is
    // symmetric about zero: pair index k with index n−1−k.
    let n_pairs = n / 2;
    let alpha_max = beta
        .iter()
        .fold(0.0f64, |m, b| m.max(b.abs()));
    let snap = 1e-12 * alpha_max;

    struct Group {
        alpha: f64,
        vector: Vec<Complex64>,
        order: usize,
        paired: bool,
    }
    let mut groups = Vec::with_capacity(n_pairs + n % 2);
    if n % 2 == 1 {
        // the unpaired middle eigenvalue of the symmetric spectrum is zero
        let mid = n_pairs;
        groups.push(Group {
            alpha: 0.0,
            vector: vecs[mid * n..(mid + 1) * n].to_vec(),
            order: mid,
            paired: false,
        });
    }
    for k in 0..n_pairs {
        // β_k < 0 side carries α = −β_k ≥ 0; use the midpoint of the ± pair
        // so the estimate is symmetric in the two LAPACK solutions.
        let alpha = 0.5 * (beta[n - 1 - k] - beta[k]);
        let alpha = if alpha <= snap { 0.0 } else { alpha };
        groups.push(Group {
            alpha,
            vector: vecs[k * n..(k + 1) * n].to_vec(),
            order: k,
            paired: true,
        });
    }
    groups.sort_by(|a, b| {
        a.alpha
            .partial_cmp(&b.alpha)
            .unwrap()
            .then(a.order.cmp(&b.order))
    });

    let mut modes = Vec::with_capacity(n);
    for g in groups {
        let w = fix_phase(normalize(g.vector));
        if g.paired {
            let conj: Vec<Complex64> = w.iter().map(|z| z.conj()).collect();
            let conj = fix_phase(conj);
            let minus = if g.alpha == 0.0 { 0.0 } else { -g.alpha };
            modes.push(SkewMode { frequency: g.alpha, vector: w });
            modes.push(SkewMode { frequency: minus, vector: conj });
        } else {
            modes.push(SkewMode { frequency: 0.0, vector: w });
        }
    }
    debug_assert_eq!(modes.len(), n);
    Ok(modes)
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in &mut v {
            *z /= norm;
        }
    }
    v
}

/// Rotate the global phase so the largest-magnitude component is real positive.
fn fix_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let mut best = 0usize;
    let mut best_norm = -1.0f64;
    for (i, z) in v.iter().enumerate() {
        if z.norm_sqr() > best_norm {
            best_norm = z.norm_sqr();
            best = i;
        }
    }
    let pivot = v[best];
    let mag = pivot.norm();
    if mag > 0.0 {
        let rot = pivot.conj() / mag;
        for z in &mut v {
            *z *= rot;
        }
        // kill the residual imaginary dust on the pivot itself
        v[best] = Complex64::new(v[best].re, 0.0);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn sym_eigh_small_analytic() {
        // [[2,1],[1,2]] has eigenvalues 3, 1 with vectors (1,1)/√2, (1,−1)/√2
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (w, v) = sym_eigh_top(a, 2).unwrap();
        assert_abs_diff_eq!(w[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12);
        let s = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(v[[0, 0]], s, epsilon = 1e-12);
        assert_abs_diff_eq!(v[[1, 0]], s, epsilon = 1e-12);
        // sign convention: first significant component positive
        assert!(v[[0, 1]] > 0.0);
        assert_abs_diff_eq!(v[[0, 1]], s, epsilon = 1e-12);
        assert_abs_diff_eq!(v[[1, 1]], -s, epsilon = 1e-12);
    }

    #[test]
    fn sym_eigh_residual_random() {
        let n = 60;
        let mut a = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 37 + j * 101 + 13) % 211) as f64 / 211.0 - 0.5;
                a[[i, j]] = x;
                a[[j, i]] = x;
            }
        }
        let (w, v) = sym_eigh_top(a.clone(), n).unwrap();
        for j in 0..n {
            let col = v.column(j);
            let av = a.dot(&col);
            for i in 0..n {
                assert_abs_diff_eq!(av[i], w[j] * col[i], epsilon = 1e-10);
            }
        }
        for j in 1..n {
            assert!(w[j - 1] >= w[j]);
        }
    }

    #[test]
    fn skew_eigen_two_by_two() {
        // [[0, a], [−a, 0]] has eigenvalues ±ia
        let a = 0.7;
        let v = array![[0.0, a], [-a, 0.0]];
        let modes = skew_eigen(&v).unwrap();
        assert_eq!(modes.len(), 2);
        assert_abs_diff_eq!(modes[0].frequency, a, epsilon = 1e-14);
        assert_abs_diff_eq!(modes[1].frequency, -a, epsilon = 1e-14);
        assert_eq!(modes[0].frequency, -modes[1].frequency);
        // conjugate pair
        for (x, y) in modes[0].vector.iter().zip(&modes[1].vector) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, -y.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn skew_eigen_residuals_and_pairing() {
        let n = 7;
        let mut v = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..i {
                let x = ((i * 31 + j * 17 + 5) % 97) as f64 / 97.0 - 0.5;
                v[[i, j]] = x;
                v[[j, i]] = -x;
            }
        }
        let modes = skew_eigen(&v).unwrap();
        assert_eq!(modes.len(), n);
        // odd dimension: exactly one zero frequency
        let zeros = modes.iter().filter(|m| m.frequency == 0.0).count();
        assert_eq!(zeros, 1);
        // V w = iα w
        for m in &modes {
            let mut resid = 0.0f64;
            for i in 0..n {
                let mut vi = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    vi += v[[i, j]] * m.vector[j];
                }
                let target = Complex64::new(0.0, m.frequency) * m.vector[i];
                resid += (vi - target).norm_sqr();
            }
            assert!(resid.sqrt() < 1e-10, "residual {}", resid.sqrt());
        }
        // exact ± pairing
        let mut pos: Vec<f64> = modes.iter().filter(|m| m.frequency > 0.0).map(|m| m.frequency).collect();
        let mut neg: Vec<f64> = modes.iter().filter(|m| m.frequency < 0.0).map(|m| -m.frequency).collect();
        pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        neg.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pos, neg);
        // ordering by |α| ascending with + first (skip the unpaired zero mode)
        for pair in modes[1..].chunks(2) {
            assert_eq!(pair[0].frequency, -pair[1].frequency);
            assert!(pair[0].frequency >= 0.0);
        }
        for w in modes.windows(2).skip(1) {
            assert!(w[0].frequency.abs() <= w[1].frequency.abs() + 1e-15);
        }
    }
}
