//! Characteristic polynomials: closed forms for uniform and SSH chains,
//! a generic continuant, and a Faddeev-LeVerrier oracle.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::chebyshev::{cheb_t_poly, cheb_u_sequence, cheb_u_poly};
use crate::error::{Error, Result};
use crate::lattice::{HamiltonianSpec, SshChain};
use crate::poly::ComplexPolynomial;

pub const ORACLE_MAX_N: usize = 64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// det(2x I - H/t) for a uniform chain with defects at m and n+1-m, as a polynomial in x.
/// `zp_m`, `zp_mbar` are the defect potentials divided by t.
pub fn charpoly_uniform_defects(n: usize, m: usize, zp_m: C64, zp_mbar: C64) -> Result<ComplexPolynomial> {
    if m == 0 || 2 * m > n {
        return Err(Error::IndexOutOfRange(format!("m = {m} outside 1..={}", n / 2)));
    }
    let (n, m) = (n as i64, m as i64);
    let un = cheb_u_poly(n);
    let unm = cheb_u_poly(n - m);
    let um1 = cheb_u_poly(m - 1);
    let un2m = cheb_u_poly(n - 2 * m);
    let cross = &(&unm * &um1) * (zp_m + zp_mbar);
    let quad = &(&(&un2m * &um1) * &um1) * (zp_m * zp_mbar);
    Ok(&(&un - &cross) + &quad)
}

/// det(lambda I - H) for an SSH chain with end potentials and corners, assembled from the
/// even/odd Chebyshev closed forms in Q = (lambda^2 - t1^2 - t2^2)/(2 t1 t2).
pub fn charpoly_ssh(
    n: usize,
    t1: f64,
    t2: f64,
    z1: C64,
    zn: C64,
    t_left: C64,
    t_right: C64,
) -> Result<ComplexPolynomial> {
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::InvalidParameter(format!("need t1, t2 > 0, got {t1}, {t2}")));
    }
    if n < 2 {
        return Err(Error::Dimension(format!("need n >= 2, got {n}")));
    }
    let k = (n / 2) as i64;
    let q = ComplexPolynomial::from_real(&[
        -(t1 * t1 + t2 * t2) / (2.0 * t1 * t2),
        0.0,
        1.0 / (2.0 * t1 * t2),
    ]);
    let u = cheb_u_sequence(k, &q);
    let uk = |j: i64| &u[(j + 2) as usize];
    let cc = z1 * zn - t_left * t_right;
    let corners = t_left + t_right;
    let lam = ComplexPolynomial::x();
    let body = if n % 2 == 0 {
        let mid = ComplexPolynomial::linear((c(t2 * t2) + cc) / (t1 * t2), -(z1 + zn) / (t1 * t2));
        let mut p = uk(k).clone();
        p = &p + &(uk(k - 2) * (cc / (t2 * t2)));
        p = &p + &(&mid * uk(k - 1));
        &p - &ComplexPolynomial::constant(corners / t2)
    } else {
        let lead = &lam - &ComplexPolynomial::constant(z1 + zn);
        let mid = ComplexPolynomial::linear(
            -(z1 * t1 * t1 + zn * t2 * t2) / (t1 * t2),
            cc / (t1 * t2),
        );
        let mut p = &lead * uk(k);
        p = &p - &ComplexPolynomial::constant(corners);
        &p + &(&mid * uk(k - 1))
    };
    Ok(body.scale(c((t1 * t2).powi(k as i32))))
}

/// The even-n alternative form built from T_k(Q) and Q U_{k-1}(Q); same polynomial as [`charpoly_ssh`].
pub fn charpoly_ssh_alt(chain: &SshChain) -> Result<ComplexPolynomial> {
    let SshChain { n, t1, t2, z1, zn, t_left, t_right } = *chain;
    if n % 2 != 0 || n < 2 {
        return Err(Error::Dimension(format!("alternative form needs even n, got {n}")));
    }
    let k = (n / 2) as i64;
    let q = ComplexPolynomial::from_real(&[
        -(t1 * t1 + t2 * t2) / (2.0 * t1 * t2),
        0.0,
        1.0 / (2.0 * t1 * t2),
    ]);
    let cc = z1 * zn - t_left * t_right;
    let tk = cheb_t_poly(k).compose(&q);
    let ukm1 = cheb_u_sequence(k - 1, &q).pop().unwrap_or_default();
    let mut p = tk.scale(c(1.0) - cc / (t2 * t2));
    p = &p - &ComplexPolynomial::constant((t_left + t_right) / t2);
    p = &p + &(&(&q * &ukm1) * (c(1.0) + cc / (t2 * t2)));
    let mid = ComplexPolynomial::linear((c(t2 * t2) + cc) / (t1 * t2), -(z1 + zn) / (t1 * t2));
    p = &p + &(&mid * &ukm1);
    Ok(p.scale(c((t1 * t2).powi(k as i32))))
}

/// det(lambda I - H) by the three-term continuant plus corner terms:
/// p_{1..n} - tL tR p_{2..n-1} - (tL + tR) prod t.
pub fn charpoly_continuant(spec: &HamiltonianSpec) -> ComplexPolynomial {
    let n = spec.n;
    let block = |lo: usize, hi: usize| -> ComplexPolynomial {
        // sites lo..hi inclusive, 0-based
        let mut prev = ComplexPolynomial::constant(c(1.0));
        if lo > hi {
            return prev;
        }
        let mut cur = ComplexPolynomial::linear(-spec.z[lo], c(1.0));
        for k in lo + 1..=hi {
            let lin = ComplexPolynomial::linear(-spec.z[k], c(1.0));
            let t = spec.t[k - 1];
            let next = &(&lin * &cur) - &(&prev * (t * t));
            prev = cur;
            cur = next;
        }
        cur
    };
    let full = block(0, n - 1);
    let inner = if n >= 2 { block(1, n - 2) } else { ComplexPolynomial::constant(c(1.0)) };
    let prod: f64 = spec.t.iter().product();
    let mut p = &full - &(&inner * (spec.t_left * spec.t_right));
    p = &p - &ComplexPolynomial::constant((spec.t_left + spec.t_right) * prod);
    p
}

/// det(lambda I - H) and its first two lambda-derivatives at a point, by the continuant
/// recurrence. Much better conditioned than evaluating the expanded coefficients.
pub fn charpoly_eval(spec: &HamiltonianSpec, lambda: C64) -> [C64; 3] {
    let n = spec.n;
    let block = |lo: usize, hi: usize| -> [C64; 3] {
        let one = [c(1.0), c(0.0), c(0.0)];
        if lo > hi {
            return one;
        }
        let mut prev = one;
        let mut cur = [lambda - spec.z[lo], c(1.0), c(0.0)];
        for k in lo + 1..=hi {
            let a = lambda - spec.z[k];
            let t2 = spec.t[k - 1] * spec.t[k - 1];
            let next = [
                a * cur[0] - prev[0] * t2,
                cur[0] + a * cur[1] - prev[1] * t2,
                cur[1] * 2.0 + a * cur[2] - prev[2] * t2,
            ];
            prev = cur;
            cur = next;
        }
        cur
    };
    let full = block(0, n - 1);
    let inner = if n >= 2 { block(1, n - 2) } else { [c(1.0), c(0.0), c(0.0)] };
    let prod: f64 = spec.t.iter().product();
    let tt = spec.t_left * spec.t_right;
    [
        full[0] - inner[0] * tt - (spec.t_left + spec.t_right) * prod,
        full[1] - inner[1] * tt,
        full[2] - inner[2] * tt,
    ]
}

/// det(lambda I - H), the fast path used by the spectral code.
pub fn charpoly(spec: &HamiltonianSpec) -> ComplexPolynomial {
    charpoly_continuant(spec)
}

/// Characteristic polynomial of an arbitrary square matrix by the Faddeev-LeVerrier recursion.
pub fn faddeev_leverrier(a: &DMatrix<C64>) -> Result<ComplexPolynomial> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, a.ncols())));
    }
    if n > ORACLE_MAX_N {
        return Err(Error::SizeCap { n, cap: ORACLE_MAX_N });
    }
    let mut coeffs = vec![c(0.0); n + 1];
    coeffs[n] = c(1.0);
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 1..=n {
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] += coeffs[n + 1 - k];
        }
        m = next;
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    Ok(ComplexPolynomial::new(coeffs))
}

/// Independent oracle: Faddeev-LeVerrier on the dense matrix, n <= 64.
pub fn charpoly_oracle(spec: &HamiltonianSpec) -> Result<ComplexPolynomial> {
    if spec.n > ORACLE_MAX_N {
        return Err(Error::SizeCap { n: spec.n, cap: ORACLE_MAX_N });
    }
    faddeev_leverrier(&spec.dense())
}

/// det(lambda I - A) by LU, for cross-checks.
pub fn det_shifted(a: &DMatrix<C64>, lambda: C64) -> C64 {
    let n = a.nrows();
    let m = DMatrix::<C64>::identity(n, n) * lambda - a;
    m.lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::cheb_u;
    use crate::lattice::DefectConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel_diff(p: &ComplexPolynomial, q: &ComplexPolynomial) -> f64 {
        let n = p.coeffs().len().max(q.coeffs().len());
        let scale = p.max_abs_coeff().max(q.max_abs_coeff());
        (0..n).map(|k| (p.coeff(k) - q.coeff(k)).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn uniform_no_defect_is_u() {
        let p = charpoly_uniform_defects(7, 2, cx(0.0, 0.0), cx(0.0, 0.0)).unwrap();
        assert_eq!(p, cheb_u_poly(7));
        assert!(charpoly_uniform_defects(4, 3, cx(0.0, 0.0), cx(0.0, 0.0)).is_err());
    }

    #[test]
    fn two_site_quadratic() {
        let (d, g) = (0.4, 0.9);
        let z = cx(d, g);
        let p = charpoly_uniform_defects(2, 1, z, z.conj()).unwrap();
        // roots x = lambda/2 with lambda^2 - 2 d lambda + d^2 + g^2 - 1 = 0
        let spec = HamiltonianSpec::uniform(2, 1.0).unwrap().with_defect(DefectConfig::new(1, d, g)).unwrap();
        let oracle = charpoly_oracle(&spec).unwrap();
        let lam = ComplexPolynomial::from_real(&[0.0, 0.5]);
        assert!(rel_diff(&p.compose(&lam), &oracle) < 1e-14);
        assert!((oracle.coeff(0) - cx(d * d + g * g - 1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn fig2_point_has_zero_and_double_roots() {
        let z = cx(0.0, 3f64.sqrt() - 1.0);
        let p = charpoly_uniform_defects(5, 2, z, z.conj()).unwrap();
        assert!(p.coeff(0).norm() < 1e-14);
        // p = 2x (16x^4 + (4g^2 - 16) x^2 + 3); the quartic in x^2 has zero discriminant
        let g2 = z.im * z.im;
        let b = 4.0 * g2 - 16.0;
        assert!((b * b - 4.0 * 16.0 * 3.0).abs() < 1e-12);
        assert!((p.coeff(5) - cx(32.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn uniform_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=10 {
            for m in 1..=n / 2 {
                let t: f64 = rng.gen_range(0.5..2.0);
                let z = cx(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.5));
                let spec = HamiltonianSpec::uniform(n, t)
                    .unwrap()
                    .with_defect(DefectConfig::new(m, z.re, z.im))
                    .unwrap();
                let p = charpoly_uniform_defects(n, m, z / t, z.conj() / t).unwrap();
                // det(lambda - H) = t^n P(lambda / 2t)
                let scaled = p.compose(&ComplexPolynomial::from_real(&[0.0, 0.5 / t])).scale(cx(t.powi(n as i32), 0.0));
                assert!(rel_diff(&scaled, &charpoly_oracle(&spec).unwrap()) < 1e-10, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn ssh_hermitian_uniform() {
        let n = 7;
        let p = charpoly_ssh(n, 1.0, 1.0, cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)).unwrap();
        for k in 1..=n {
            let lam = 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!(p.eval(cx(lam, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ssh_exact_case_roots() {
        let p = charpoly_ssh(4, 2.0, 1.0, cx(0.0, 1.0), cx(0.0, -1.0), cx(0.0, 0.0), cx(0.0, 0.0)).unwrap();
        for lam in [5f64.sqrt(), -(5f64.sqrt()), 3f64.sqrt(), -(3f64.sqrt())] {
            assert!(p.eval(cx(lam, 0.0)).norm() < 1e-12, "{lam}");
        }
    }

    fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> SshChain {
        let z = |rng: &mut ChaCha8Rng| cx(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        SshChain {
            n,
            t1: rng.gen_range(0.3..2.0),
            t2: rng.gen_range(0.3..2.0),
            z1: z(rng),
            zn: z(rng),
            t_left: z(rng),
            t_right: z(rng),
        }
    }

    #[test]
    fn ssh_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..=9);
            let ch = random_chain(&mut rng, n);
            let p = charpoly_ssh(n, ch.t1, ch.t2, ch.z1, ch.zn, ch.t_left, ch.t_right).unwrap();
            let o = charpoly_oracle(&ch.to_spec().unwrap()).unwrap();
            assert!(rel_diff(&p, &o) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn alt_form_matches_table_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = 2 * rng.gen_range(1..=6);
            let ch = random_chain(&mut rng, n);
            let p = charpoly_ssh(n, ch.t1, ch.t2, ch.z1, ch.zn, ch.t_left, ch.t_right).unwrap();
            let q = charpoly_ssh_alt(&ch).unwrap();
            for _ in 0..5 {
                let x = cx(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let (a, b) = (p.eval(x), q.eval(x));
                assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn continuant_matches_oracle_and_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let n = rng.gen_range(2..=12);
            let t: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let z: Vec<C64> = (0..n).map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let spec = HamiltonianSpec::new(t, z, cx(rng.gen_range(-1.0..1.0), 0.3), cx(0.2, rng.gen_range(-1.0..1.0))).unwrap();
            let p = charpoly_continuant(&spec);
            let o = charpoly_oracle(&spec).unwrap();
            assert!(rel_diff(&p, &o) < 1e-10, "n={n}");
            let x = cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let d = det_shifted(&spec.dense(), x);
            assert!((o.eval(x) - d).norm() <= 1e-9 * d.norm().max(1.0));
        }
    }

    #[test]
    fn pointwise_evaluation_matches_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let n = rng.gen_range(2..=12);
            let t: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let z: Vec<C64> = (0..n).map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let spec = HamiltonianSpec::new(t, z, cx(rng.gen_range(-1.0..1.0), 0.3), cx(0.2, rng.gen_range(-1.0..1.0))).unwrap();
            let p = charpoly_continuant(&spec);
            let x = cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let v = charpoly_eval(&spec, x);
            for k in 0..3 {
                let e = p.nth_derivative(k).eval(x);
                assert!((v[k] - e).norm() <= 1e-10 * e.norm().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn oracle_trivial_and_cap() {
        let spec = HamiltonianSpec::open(vec![1.0], vec![cx(0.0, 0.0); 2]).unwrap();
        assert_eq!(charpoly_oracle(&spec).unwrap(), ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0]));
        let big = HamiltonianSpec::uniform(65, 1.0).unwrap();
        assert!(matches!(charpoly_oracle(&big), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn pt_specs_have_real_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            // odd SSH chains are PT-symmetric only for t1 = t2
            let n = 2 * rng.gen_range(2..=5);
            let z = cx(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0));
            let tl = cx(0.0, rng.gen_range(-1.0..1.0));
            let p = charpoly_ssh(n, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), z, z.conj(), tl, tl.conj()).unwrap();
            assert!(p.max_imag() <= 1e-12 * p.max_abs_coeff());
            let m = rng.gen_range(1..=n / 2);
            let q = charpoly_uniform_defects(n, m, z, z.conj()).unwrap();
            assert!(q.max_imag() <= 1e-12 * q.max_abs_coeff());
        }
    }

    #[test]
    fn chebyshev_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let x = cx(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            for n in 0..=20i64 {
                let lhs = cheb_u(n + 1, x);
                let rhs = x * cheb_u(n, x) + crate::chebyshev::cheb_t(n + 1, x);
                assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
            }
            for m in 0..=10i64 {
                let lhs = cheb_u(2 * m, x);
                let rhs = cheb_u(m, x).powi(2) - cheb_u(m - 1, x).powi(2);
                assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
            }
        }
    }
}
