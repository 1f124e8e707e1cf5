//! Thin wrappers over LAPACK for Hermitian eigenproblems and determinants.
//!
//! Matrices are row-major `ndarray`s. LAPACK reads the buffer column-major,
//! i.e. it sees the transpose, which for a Hermitian matrix is the complex
//! conjugate: eigenvalues agree and eigenvectors come back conjugated.

use lapack::c64;
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub fn hermiticity_defect(h: &Array2<C64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[[i, j]] - h[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(h: &Array2<C64>) -> f64 {
    h.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

fn square(h: &Array2<C64>) -> Result<usize> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}", h.nrows(), h.ncols())));
    }
    Ok(h.nrows())
}

fn buffer(h: &Array2<C64>) -> Vec<c64> {
    h.iter().copied().collect()
}

fn check_hermitian(h: &Array2<C64>) -> Result<()> {
    let d = hermiticity_defect(h);
    if d > 1e-10 * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian(d));
    }
    Ok(())
}

/// Eigenvalues only, ascending. Uses the two-stage reduction, which is
/// several times faster on large matrices; the result is cross-checked
/// against the trace identities and recomputed with the one-stage driver
/// if they disagree.
pub fn eigvalsh(h: &Array2<C64>) -> Result<Vec<f64>> {
    let n = square(h)?;
    check_hermitian(h)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut w = eigvals_driver(h, true)?;
    if !trace_consistent(h, &w) {
        w = eigvals_driver(h, false)?;
        if !trace_consistent(h, &w) {
            return Err(Error::Invariant("eigenvalues fail trace identities".into()));
        }
    }
    Ok(w)
}

fn trace_consistent(h: &Array2<C64>, w: &[f64]) -> bool {
    let n = h.nrows();
    let tr: f64 = (0..n).map(|k| h[[k, k]].re).sum();
    let fro: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    let s1: f64 = w.iter().sum();
    let s2: f64 = w.iter().map(|x| x * x).sum();
    let scale = fro.max(1e-300);
    (s1 - tr).abs() <= 1e-8 * (scale.sqrt() * (n as f64).sqrt()).max(1e-12) && (s2 - fro).abs() <= 1e-8 * scale
}

fn eigvals_driver(h: &Array2<C64>, two_stage: bool) -> Result<Vec<f64>> {
    let n = h.nrows() as i32;
    let mut a = buffer(h);
    let mut w = vec![0.0; n as usize];
    let mut info = 0;
    let mut work = vec![c64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0; 1];
    let mut iwork = vec![0i32; 1];
    let call = |a: &mut [c64], w: &mut [f64], work: &mut [c64], lw, rwork: &mut [f64], lrw, iwork: &mut [i32], liw, info: &mut i32| unsafe {
        if two_stage {
            lapack::zheevd_2stage(b'N', b'L', n, a, n, w, work, lw, rwork, lrw, iwork, liw, info);
        } else {
            lapack::zheevd(b'N', b'L', n, a, n, w, work, lw, rwork, lrw, iwork, liw, info);
        }
    };
    call(&mut a, &mut w, &mut work, -1, &mut rwork, -1, &mut iwork, -1, &mut info);
    if info != 0 {
        return Err(Error::Solver { routine: "zheevd", info });
    }
    let lw = work[0].re as i32;
    let lrw = rwork[0] as i32;
    let liw = iwork[0];
    let mut work = vec![c64::new(0.0, 0.0); lw.max(1) as usize];
    let mut rwork = vec![0.0; lrw.max(1) as usize];
    let mut iwork = vec![0i32; liw.max(1) as usize];
    call(&mut a, &mut w, &mut work, lw, &mut rwork, lrw, &mut iwork, liw, &mut info);
    if info != 0 {
        return Err(Error::Solver { routine: "zheevd", info });
    }
    Ok(w)
}

/// Eigenvalues (ascending) and eigenvectors as the columns of the returned matrix.
pub fn eigh(h: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = square(h)?;
    check_hermitian(h)?;
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let ni = n as i32;
    let mut a = buffer(h);
    let mut w = vec![0.0; n];
    let mut info = 0;
    let mut work = vec![c64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0; 1];
    let mut iwork = vec![0i32; 1];
    unsafe {
        lapack::zheevd(b'V', b'L', ni, &mut a, ni, &mut w, &mut work, -1, &mut rwork, -1, &mut iwork, -1, &mut info);
    }
    if info != 0 {
        return Err(Error::Solver { routine: "zheevd", info });
    }
    let lw = work[0].re as i32;
    let lrw = rwork[0] as i32;
    let liw = iwork[0];
    let mut work = vec![c64::new(0.0, 0.0); lw.max(1) as usize];
    let mut rwork = vec![0.0; lrw.max(1) as usize];
    let mut iwork = vec![0i32; liw.max(1) as usize];
    unsafe {
        lapack::zheevd(b'V', b'L', ni, &mut a, ni, &mut w, &mut work, lw, &mut rwork, lrw, &mut iwork, liw, &mut info);
    }
    if info != 0 {
        return Err(Error::Solver { routine: "zheevd", info });
    }
    let v = Array2::from_shape_fn((n, n), |(i, k)| a[i + k * n].conj());
    Ok((w, v))
}

/// Determinant via LU factorisation.
pub fn det(m: &Array2<C64>) -> Result<C64> {
    let n = square(m)?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let ni = n as i32;
    let mut a = buffer(m);
    let mut ipiv = vec![0i32; n];
    let mut info = 0;
    unsafe {
        lapack::zgetrf(ni, ni, &mut a, ni, &mut ipiv, &mut info);
    }
    if info < 0 {
        return Err(Error::Solver { routine: "zgetrf", info });
    }
    if info > 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut d = C64::new(1.0, 0.0);
    for k in 0..n {
        d *= a[k + k * n];
        if ipiv[k] != k as i32 + 1 {
            d = -d;
        }
    }
    Ok(d)
}

/// `A†`.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}
