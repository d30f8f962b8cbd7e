//! Dense-matrix reference computations used to cross-check the polynomial paths.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::lattice::HamiltonianSpec;

/// Eigenvalues from the complex Schur form. The unshifted QR iteration can stall on highly
/// symmetric inputs (the 3-site free chain is one), so on failure the matrix is conjugated by a
/// fixed Householder reflection and retried.
pub fn dense_eigenvalues(h: &DMatrix<C64>) -> Vec<C64> {
    let n = h.nrows();
    for attempt in 0..8 {
        let m = if attempt == 0 { h.clone() } else { householder_conjugate(h, attempt) };
        if let Some(s) = m.try_schur(f64::EPSILON, 2000 * n.max(1)) {
            let (_, t) = s.unpack();
            return (0..n).map(|k| t[(k, k)]).collect();
        }
    }
    let (_, t) = householder_conjugate(h, 9).schur().unpack();
    (0..n).map(|k| t[(k, k)]).collect()
}

fn householder_conjugate(h: &DMatrix<C64>, seed: usize) -> DMatrix<C64> {
    let n = h.nrows();
    let v = nalgebra::DVector::from_fn(n, |j, _| {
        C64::from_polar(1.0 + 0.37 * j as f64, 0.7 * ((j + 1) * seed) as f64)
    });
    let q = DMatrix::<C64>::identity(n, n) - (&v * v.adjoint()) * C64::new(2.0 / v.norm_squared(), 0.0);
    &q * h * q.adjoint()
}

pub fn spec_eigenvalues(spec: &HamiltonianSpec) -> Vec<C64> {
    dense_eigenvalues(&spec.dense())
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Dimension of the numerical kernel: singular values below `tol * sigma_max`.
pub fn nullity(m: &DMatrix<C64>, tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x <= tol * top.max(f64::MIN_POSITIVE)).count()
}

/// dim ker(H - lambda I).
pub fn geometric_multiplicity(h: &DMatrix<C64>, lambda: C64, tol: f64) -> usize {
    let n = h.nrows();
    nullity(&(h - DMatrix::<C64>::identity(n, n) * lambda), tol)
}

/// Max-entry norm.
pub fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schur_eigenvalues_of_rotation() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let mut ev = dense_eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - C64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn stalling_input_recovered() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let h = DMatrix::from_row_slice(3, 3, &[zero, one, zero, one, zero, one, zero, one, zero]);
        let mut ev: Vec<f64> = dense_eigenvalues(&h).iter().map(|e| e.re).collect();
        ev.sort_by(f64::total_cmp);
        let r = 2f64.sqrt();
        assert!((ev[0] + r).abs() < 1e-13 && ev[1].abs() < 1e-13 && (ev[2] - r).abs() < 1e-13);
    }

    #[test]
    fn jordan_block_nullity() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let j = DMatrix::from_row_slice(2, 2, &[zero, one, zero, zero]);
        assert_eq!(geometric_multiplicity(&j, zero, 1e-12), 1);
        assert_eq!(geometric_multiplicity(&DMatrix::zeros(2, 2), zero, 1e-12), 2);
    }
}
