//! Intertwining operators for even chains with nearest-neighbour defects at (m, m+1),
//! their square roots, the similar Hermitian chain, the C operator and metric transport.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{pt_constraints_hold, HamiltonianSpec};
use crate::oracle::{max_norm, singular_values};

const EDGE_TOL: f64 = 1e-12;

/// M(Z) = [[I, (conj Z / t_m) P], [(Z / t_m) P, I]] with P the m x m reversal.
#[derive(Debug, Clone, PartialEq)]
pub struct IntertwinerFamily {
    pub m: usize,
    pub t_m: f64,
    pub z: C64,
    pub matrix: DMatrix<C64>,
}

impl IntertwinerFamily {
    pub fn n(&self) -> usize {
        2 * self.m
    }

    /// ||M H - H^dagger M|| / (||M|| ||H||)
    pub fn intertwining_residual(&self, h: &DMatrix<C64>) -> f64 {
        let m = &self.matrix;
        (m * h - h.adjoint() * m).norm() / (m.norm() * h.norm())
    }

    /// Eigenvalues of M are 1 ± |Z|/t_m; this is the smaller one computed densely.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.z.norm() < self.t_m.abs()
    }
}

/// Half-size m, bond t_m and defect strength gamma of an even open PT chain whose
/// only complex potentials sit on sites m and m+1.
pub fn nn_defect_params(spec: &HamiltonianSpec) -> Result<(usize, f64, f64)> {
    if spec.n % 2 != 0 {
        return Err(Error::Constraint(format!("need even n, got {}", spec.n)));
    }
    if !spec.is_open() {
        return Err(Error::Constraint("need an open chain".into()));
    }
    if !pt_constraints_hold(spec) {
        return Err(Error::Constraint("spec is not PT-symmetric".into()));
    }
    let m = spec.n / 2;
    let scale = 1.0 + spec.scale();
    for (k, z) in spec.z.iter().enumerate() {
        if k + 1 != m && k != m && z.im.abs() > EDGE_TOL * scale {
            return Err(Error::Constraint(format!(
                "complex potential on site {} (defects must sit at {m}, {})",
                k + 1,
                m + 1
            )));
        }
    }
    let t_m = spec.t[m - 1];
    if t_m == 0.0 {
        return Err(Error::InvalidParameter("zero bond between the defects".into()));
    }
    Ok((m, t_m, spec.z[m - 1].im))
}

fn block_antidiag(m: usize, diag: C64, upper: C64, lower: C64) -> DMatrix<C64> {
    let n = 2 * m;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag
        } else if i + j + 1 == n {
            if i < m {
                upper
            } else {
                lower
            }
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Family member with Z = re_z + i gamma.
pub fn intertwiner_nn(spec: &HamiltonianSpec, re_z: f64) -> Result<IntertwinerFamily> {
    let (m, t_m, gamma) = nn_defect_params(spec)?;
    let z = C64::new(re_z, gamma);
    Ok(IntertwinerFamily {
        m,
        t_m,
        z,
        matrix: block_antidiag(m, C64::new(1.0, 0.0), z.conj() / t_m, z / t_m),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSqrt {
    pub omega: DMatrix<C64>,
    pub inverse: DMatrix<C64>,
}

/// Positive square root of M in closed form, with its inverse from Z -> -Z.
pub fn omega_sqrt(fam: &IntertwinerFamily) -> Result<OmegaSqrt> {
    let t = fam.t_m;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("need t_m > 0, got {t}")));
    }
    let r = fam.z.norm() / t;
    if r >= 1.0 - EDGE_TOL {
        return Err(Error::Constraint(format!("|Z|/t_m = {r} is not below 1")));
    }
    let alpha = (1.0 + r).sqrt() + (1.0 - r).sqrt();
    let half = C64::new(alpha / 2.0, 0.0);
    let up = fam.z.conj() / (alpha * t);
    let lo = fam.z / (alpha * t);
    let omega = block_antidiag(fam.m, half, up, lo);
    let s = (1.0 - r * r).sqrt();
    let inverse = block_antidiag(fam.m, half / s, -up / s, -lo / s);
    Ok(OmegaSqrt { omega, inverse })
}

/// Hermitian tridiagonal chain: real diagonal, complex upper bonds, conjugate lower bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianChain {
    pub diagonal: Vec<f64>,
    pub bonds: Vec<C64>,
}

impl HermitianChain {
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.diagonal.len();
        let mut h = DMatrix::<C64>::zeros(n, n);
        for (k, d) in self.diagonal.iter().enumerate() {
            h[(k, k)] = C64::new(*d, 0.0);
        }
        for (k, b) in self.bonds.iter().enumerate() {
            h[(k, k + 1)] = *b;
            h[(k + 1, k)] = b.conj();
        }
        h
    }

    /// Diagonal unitary D with D^dagger self D = target, for a Hermitian tridiagonal `target`
    /// with the same diagonal and bond moduli. None when the moduli disagree.
    pub fn gauge_to(&self, target: &DMatrix<C64>, tol: f64) -> Option<Vec<C64>> {
        let n = self.diagonal.len();
        let mut d = vec![C64::new(1.0, 0.0); n];
        for (k, b) in self.bonds.iter().enumerate() {
            let want = target[(k, k + 1)];
            if (want.norm() - b.norm()).abs() > tol * (1.0 + b.norm()) {
                return None;
            }
            // (D^dagger h D)_{k,k+1} = conj(d_k) b d_{k+1}
            d[k + 1] = if b.norm() == 0.0 { C64::new(1.0, 0.0) } else { d[k] * (want / b) / (want / b).norm() };
        }
        Some(d)
    }
}

/// Hermitian chain unitarily equivalent to Omega H Omega^-1 (they differ by a diagonal phase
/// gauge on the defect bond, see [`HermitianChain::gauge_to`]), in closed form: diagonal Re z_i, bonds sign(t_i) sqrt|t_i t_{n-i}|
/// away from the defects, and (Re Z/|Z|) t_m + i (Im Z/|Z|) sqrt(t_m^2 - |Z|^2) between them.
pub fn equivalent_hermitian(spec: &HamiltonianSpec, fam: &IntertwinerFamily) -> Result<HermitianChain> {
    let (m, t_m, _) = nn_defect_params(spec)?;
    if m != fam.m || t_m != fam.t_m {
        return Err(Error::Constraint("family does not belong to this chain".into()));
    }
    omega_sqrt(fam)?;
    let n = spec.n;
    let zabs = fam.z.norm();
    let bonds = (0..n - 1)
        .map(|k| {
            if k + 1 == m {
                if zabs == 0.0 {
                    C64::new(t_m, 0.0)
                } else {
                    C64::new(
                        fam.z.re / zabs * t_m,
                        fam.z.im / zabs * (t_m * t_m - zabs * zabs).sqrt(),
                    )
                }
            } else {
                let t = spec.t[k];
                C64::new(t.signum() * (t * spec.t[n - 2 - k]).abs().sqrt(), 0.0)
            }
        })
        .collect();
    Ok(HermitianChain {
        diagonal: spec.z.iter().map(|z| z.re).collect(),
        bonds,
    })
}

/// C = (1/sqrt(t_m^2 - gamma^2)) [[i gamma I, t_m P], [t_m P, -i gamma I]], i.e. t_m P_n M(i gamma)
/// normalized. Involution commuting with H and with PT; undefined at and beyond gamma = t_m.
pub fn c_operator(spec: &HamiltonianSpec) -> Result<DMatrix<C64>> {
    let (m, t_m, gamma) = nn_defect_params(spec)?;
    if gamma.abs() >= t_m.abs() * (1.0 - EDGE_TOL) {
        return Err(Error::Constraint(format!("gamma = {gamma} not below t_m = {t_m}")));
    }
    let s = (t_m * t_m - gamma * gamma).sqrt();
    let n = 2 * m;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(0.0, if i < m { gamma } else { -gamma }) / s
        } else if i + j + 1 == n {
            C64::new(t_m / s, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// H' = S^-1 H S and M' = S^dagger M S.
pub fn metric_transport(
    h: &DMatrix<C64>,
    m: &DMatrix<C64>,
    s: &DMatrix<C64>,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let sv = singular_values(s);
    let (big, small) = (sv[0], sv[sv.len() - 1]);
    if small <= 1e-13 * big {
        return Err(Error::Singular(format!("transport matrix has condition {:e}", big / small)));
    }
    let inv = s.clone().try_inverse().ok_or_else(|| Error::Singular("transport matrix".into()))?;
    Ok((&inv * h * s, s.adjoint() * m * s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReduction {
    /// m x m Hermitian matrix of H on ker M
    pub matrix: DMatrix<C64>,
    /// n x m orthonormal kernel basis, columns (i/sqrt 2) e_j + (1/sqrt 2) e_{n+1-j}
    pub basis: DMatrix<C64>,
}

/// H restricted to ker M(i t_m) at the threshold gamma = t_m.
pub fn kernel_reduced_hamiltonian(spec: &HamiltonianSpec) -> Result<KernelReduction> {
    let (m, t_m, gamma) = nn_defect_params(spec)?;
    if (gamma - t_m).abs() > EDGE_TOL * t_m.abs().max(1.0) {
        return Err(Error::Constraint(format!("gamma = {gamma} differs from t_m = {t_m}")));
    }
    let n = 2 * m;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let basis = DMatrix::from_fn(n, m, |i, j| {
        if i == j {
            C64::new(0.0, gamma / t_m * r)
        } else if i + j + 1 == n {
            C64::new(r, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let matrix = basis.adjoint() * spec.dense() * &basis;
    Ok(KernelReduction { matrix, basis })
}

/// Dimension of the solution set of M H = H^dagger M over Hermitian M = I + antidiagonal.
/// Errors when the system has no solution.
pub fn intertwiner_ansatz_dimension(spec: &HamiltonianSpec) -> Result<usize> {
    let n = spec.n;
    if n % 2 != 0 {
        return Err(Error::Constraint(format!("need even n, got {n}")));
    }
    let m = n / 2;
    let h = spec.dense();
    let hd = h.adjoint();
    // unknowns: Re a_k, Im a_k for k < m; a_{n-1-k} = conj(a_k)
    let apply = |x: &[f64]| -> DMatrix<C64> {
        let mut a = DMatrix::<C64>::zeros(n, n);
        for k in 0..m {
            let v = C64::new(x[2 * k], x[2 * k + 1]);
            a[(k, n - 1 - k)] = v;
            a[(n - 1 - k, k)] = v.conj();
        }
        &a * &h - &hd * &a
    };
    let rows = 2 * n * n;
    let mut l = DMatrix::<f64>::zeros(rows, 2 * m);
    for col in 0..2 * m {
        let mut x = vec![0.0; 2 * m];
        x[col] = 1.0;
        let img = apply(&x);
        for (idx, v) in img.iter().enumerate() {
            l[(2 * idx, col)] = v.re;
            l[(2 * idx + 1, col)] = v.im;
        }
    }
    let rhs_c = &hd - &h;
    let rhs = nalgebra::DVector::from_iterator(rows, rhs_c.iter().flat_map(|v| [v.re, v.im]));
    let svd = l.clone().svd(true, true);
    let top = svd.singular_values.max();
    let tol = 1e-10 * top.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let x = svd
        .solve(&rhs, tol)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let resid = (&l * &x - &rhs).norm();
    if resid > 1e-9 * (1.0 + rhs.norm()) * (1.0 + max_norm(&h)) {
        return Err(Error::Constraint(format!("no identity-plus-antidiagonal intertwiner (residual {resid:e})")));
    }
    Ok(2 * m - rank)
}
