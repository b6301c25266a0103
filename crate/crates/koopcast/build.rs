// Link against the system LAPACK/BLAS (on Debian-style systems these are
// provided by the openblas-pthread alternative).
fn main() {
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=blas");
}
