//! Chebyshev polynomials of the first and second kind.
//!
//! Second kind is extended to negative degree by U_{-n-2} = -U_n, so U_{-1} = 0 and U_{-2} = -1.

use num_complex::Complex64 as C64;

use crate::poly::ComplexPolynomial;

/// U_n(x) by forward recurrence.
pub fn cheb_u(n: i64, x: C64) -> C64 {
    if n < 0 {
        return if n == -1 { C64::new(0.0, 0.0) } else { -cheb_u(-n - 2, x) };
    }
    let mut prev = C64::new(1.0, 0.0);
    let mut cur = 2.0 * x;
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// T_n(x) by forward recurrence, n >= 0; T_{-n} = T_n otherwise.
pub fn cheb_t(n: i64, x: C64) -> C64 {
    let n = n.abs();
    let mut prev = C64::new(1.0, 0.0);
    let mut cur = x;
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Values U_{-2}, U_{-1}, ..., U_n of the second-kind recurrence evaluated on an arbitrary
/// polynomial argument q. Index j of the returned vector holds U_{j-2}(q).
pub fn cheb_u_sequence(n: i64, q: &ComplexPolynomial) -> Vec<ComplexPolynomial> {
    let mut seq = vec![
        ComplexPolynomial::constant(C64::new(-1.0, 0.0)),
        ComplexPolynomial::zero(),
    ];
    let two_q = q * 2.0;
    for j in 0..=n.max(-1) {
        let k = (j + 2) as usize;
        let next = &(&two_q * &seq[k - 1]) - &seq[k - 2];
        seq.push(next);
    }
    seq
}

/// U_n(q(x)) as a polynomial in x.
pub fn cheb_u_of(n: i64, q: &ComplexPolynomial) -> ComplexPolynomial {
    if n < -2 {
        return -&cheb_u_of(-n - 2, q);
    }
    cheb_u_sequence(n, q).swap_remove((n + 2) as usize)
}

/// Coefficients of U_n.
pub fn cheb_u_poly(n: i64) -> ComplexPolynomial {
    cheb_u_of(n, &ComplexPolynomial::x())
}

/// Coefficients of T_n.
pub fn cheb_t_poly(n: i64) -> ComplexPolynomial {
    let n = n.abs();
    let x = ComplexPolynomial::x();
    let mut prev = ComplexPolynomial::constant(C64::new(1.0, 0.0));
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    let two_x = &x * 2.0;
    for _ in 1..n {
        let next = &(&two_x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn small_values() {
        assert_eq!(cheb_u(0, c(0.7, 0.0)), c(1.0, 0.0));
        assert!((cheb_u(1, c(0.3, 0.0)) - c(0.6, 0.0)).norm() < 1e-15);
        assert!((cheb_u(3, c(0.5, 0.0)) - c(-1.0, 0.0)).norm() < 1e-14);
        assert_eq!(cheb_u(-1, c(0.4, 0.2)), c(0.0, 0.0));
        assert_eq!(cheb_u(-2, c(0.4, 0.2)), c(-1.0, 0.0));
        assert!((cheb_t(2, c(0.0, 0.0)) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((cheb_t(4, c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn recurrence_matches_coefficients() {
        let x = c(1.0, 0.1);
        let p = cheb_u_poly(5);
        let v = cheb_u(5, x);
        assert!((p.eval(x) - v).norm() < 1e-12 * v.norm());
        for n in 0..=30 {
            let p = cheb_u_poly(n);
            for &x in &[c(0.3, 0.0), c(-1.7, 0.4), c(2.0, -1.0), c(0.0, 1.9)] {
                let v = cheb_u(n, x);
                let w = p.eval(x);
                assert!((v - w).norm() <= 1e-10 * v.norm().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn negative_degree_polys() {
        assert!(cheb_u_poly(-1).is_zero());
        assert_eq!(cheb_u_poly(-2), ComplexPolynomial::from_real(&[-1.0]));
        assert_eq!(cheb_u_poly(-4), -&cheb_u_poly(2));
        let x = c(0.37, -0.2);
        assert!((cheb_u(-5, x) + cheb_u(3, x)).norm() < 1e-14);
    }

    #[test]
    fn t_coefficients() {
        assert_eq!(cheb_t_poly(3), ComplexPolynomial::from_real(&[0.0, -3.0, 0.0, 4.0]));
        let x = c(-0.4, 0.9);
        assert!((cheb_t_poly(9).eval(x) - cheb_t(9, x)).norm() < 1e-12 * cheb_t(9, x).norm());
    }

    #[test]
    fn real_zeros_of_u() {
        for n in 1..10i64 {
            for k in 1..=n {
                let x = (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
                assert!(cheb_u(n, c(x, 0.0)).norm() < 1e-12);
            }
        }
    }
}
