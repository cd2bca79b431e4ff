fn main() {
    // LAPACK/BLAS symbols come from the system OpenBLAS build.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
