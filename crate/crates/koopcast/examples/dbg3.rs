// direct dgemm test against naive multiplication
#[link(name = "blas")]
extern "C" {
    fn dgemm_(
        transa: *const std::ffi::c_char, transb: *const std::ffi::c_char,
        m: *const i32, n: *const i32, k: *const i32,
        alpha: *const f64, a: *const f64, lda: *const i32,
        b: *const f64, ldb: *const i32,
        beta: *const f64, c: *mut f64, ldc: *const i32,
    );
}

fn test_case(m: usize, n: usize, k: usize, ta: u8, tb: u8) -> f64 {
    // column-major data
    let a_rows = if ta == b'N' { m } else { k };
    let a_cols = if ta == b'N' { k } else { m };
    let b_rows = if tb == b'N' { k } else { n };
    let b_cols = if tb == b'N' { n } else { k };
    let mut a = vec![0.0f64; a_rows * a_cols];
    let mut b = vec![0.0f64; b_rows * b_cols];
    for (i, x) in a.iter_mut().enumerate() { *x = ((i * 37 + 11) % 101) as f64 / 101.0 - 0.5; }
    for (i, x) in b.iter_mut().enumerate() { *x = ((i * 53 + 7) % 97) as f64 / 97.0 - 0.5; }
    let mut c = vec![0.0f64; m * n];
    let (alpha, beta) = (1.0f64, 0.0f64);
    unsafe {
        dgemm_(
            &(ta as std::ffi::c_char), &(tb as std::ffi::c_char),
            &(m as i32), &(n as i32), &(k as i32),
            &alpha, a.as_ptr(), &(a_rows as i32),
            b.as_ptr(), &(b_rows as i32),
            &beta, c.as_mut_ptr(), &(m as i32),
        );
    }
    let at = |i: usize, l: usize| -> f64 {
        if ta == b'N' { a[i + l * a_rows] } else { a[l + i * a_rows] }
    };
    let bt = |l: usize, j: usize| -> f64 {
        if tb == b'N' { b[l + j * b_rows] } else { b[j + l * b_rows] }
    };
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for l in 0..k {
                acc += at(i, l) * bt(l, j);
            }
            worst = worst.max((acc - c[i + j * m]).abs());
        }
    }
    worst
}

fn main() {
    for (m, n, k) in [(64usize, 64usize, 64usize), (400, 32, 400), (400, 400, 32), (32, 400, 400), (127, 93, 211)] {
        for ta in [b'N', b'T'] {
            for tb in [b'N', b'T'] {
                let err = test_case(m, n, k, ta, tb);
                if err > 1e-10 {
                    println!("dgemm {}{} m={} n={} k={}: WRONG, max err {:.3e}", ta as char, tb as char, m, n, k, err);
                } 
            }
        }
    }
    println!("dgemm sweep done");
}
