//! Aberth-Ehrlich simultaneous root finding and root clustering.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::poly::ComplexPolynomial;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

pub const DEFAULT_ROOT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// All roots of `p` with multiplicity. Exact zero roots are deflated first; the rest start on a
/// circle of radius 1 + max|c_k / c_deg| with golden-angle phases. A root is frozen once its update
/// drops below `tol (1 + |z|)` or its value is at the rounding level of Horner evaluation.
pub fn roots_aberth(p: &ComplexPolynomial, tol: f64, max_iter: usize) -> Result<Vec<C64>> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::InvalidParameter("need degree >= 1".into()));
    }
    let zeros = p.coeffs().iter().take_while(|c| **c == C64::new(0.0, 0.0)).count();
    let mut out = vec![C64::new(0.0, 0.0); zeros];
    let q = ComplexPolynomial::new(p.coeffs()[zeros..].to_vec()).monic();
    let deg = q.degree();
    if deg == 0 {
        return Ok(out);
    }
    if deg == 1 {
        out.push(-q.coeff(0));
        return Ok(out);
    }
    let radius = 1.0 + (0..deg).map(|k| q.coeff(k).norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(radius, 0.5 + GOLDEN_ANGLE * k as f64))
        .collect();
    let mut done = vec![false; deg];
    let eps = f64::EPSILON;
    let mut max_update = f64::INFINITY;
    for _ in 0..max_iter {
        max_update = 0.0;
        for i in 0..deg {
            if done[i] {
                continue;
            }
            let (v, dv) = q.eval_with_derivative(z[i]);
            if v.norm() <= 8.0 * eps * q.abs_eval(z[i].norm()) {
                done[i] = true;
                continue;
            }
            let ratio = v / dv;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let d = z[i] - z[j];
                    if d != C64::new(0.0, 0.0) {
                        s += 1.0 / d;
                    }
                }
            }
            let mut w = ratio / (1.0 - ratio * s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                w = ratio;
            }
            if !(w.re.is_finite() && w.im.is_finite()) {
                // derivative vanished at an exact multiple point; nudge off it
                w = C64::new(tol.max(1e-12) * (1.0 + z[i].norm()), 0.0);
            }
            z[i] -= w;
            let rel = w.norm() / (1.0 + z[i].norm());
            max_update = max_update.max(rel);
            if rel < tol {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            out.extend(z);
            return Ok(out);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        max_update,
        roots: z,
    })
}

/// Roots with default tolerance.
pub fn roots(p: &ComplexPolynomial) -> Result<Vec<C64>> {
    roots_aberth(p, DEFAULT_ROOT_TOL, DEFAULT_MAX_ITER)
}

/// A group of numerically coincident roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCluster {
    pub center: C64,
    pub members: Vec<C64>,
}

impl RootCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Single-linkage clustering: roots within `tol (1 + |lambda|)` of each other merge.
/// Clusters are sorted by real part, then imaginary part.
pub fn cluster_roots(roots: &[C64], tol: f64) -> Vec<RootCluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0 + roots[i].norm().max(roots[j].norm());
            if (roots[i] - roots[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, g)) => g.push(roots[i]),
            None => groups.push((r, vec![roots[i]])),
        }
    }
    let mut out: Vec<RootCluster> = groups
        .into_iter()
        .map(|(_, members)| {
            let center = members.iter().sum::<C64>() / members.len() as f64;
            RootCluster { center, members }
        })
        .collect();
    out.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
    });
    out
}

/// Greedy multiset matching; returns the largest distance between paired elements.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re).then(a[i].im.total_cmp(&a[j].im)));
    for i in order {
        let mut best = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (a[i] - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("same length");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::cheb_u_poly;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn quadratic() {
        let r = roots(&ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        assert!(multiset_distance(&r, &[c(1.0, 0.0), c(-1.0, 0.0)]) < 1e-14);
    }

    #[test]
    fn chebyshev_zeros() {
        let r = roots(&cheb_u_poly(5)).unwrap();
        let expect: Vec<C64> = (1..=5)
            .map(|k| c((k as f64 * std::f64::consts::PI / 6.0).cos(), 0.0))
            .collect();
        assert!(multiset_distance(&r, &expect) < 1e-13);
    }

    #[test]
    fn zero_roots_deflated() {
        let p = ComplexPolynomial::from_real(&[0.0, 0.0, -4.0, 0.0, 1.0]);
        let r = roots(&p).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(multiset_distance(&r, &[c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(-2.0, 0.0)]) < 1e-14);
    }

    #[test]
    fn planted_roots_recovered() {
        let planted = [c(0.3, 1.0), c(-2.0, 0.5), c(1.0, -1.0), c(0.0, 0.0), c(4.0, 0.0), c(-0.7, -0.2)];
        let r = roots(&ComplexPolynomial::from_roots(&planted)).unwrap();
        assert!(multiset_distance(&r, &planted) < 1e-11);
    }

    #[test]
    fn multiple_root_clusters() {
        let planted = [c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-0.5, 0.2)];
        let r = roots(&ComplexPolynomial::from_roots(&planted)).unwrap();
        let cl = cluster_roots(&r, 1e-3);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[1].multiplicity(), 3);
        assert!((cl[1].center - c(1.0, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(roots(&ComplexPolynomial::from_real(&[3.0])).is_err());
    }

    #[test]
    fn no_convergence_is_reported() {
        let p = ComplexPolynomial::from_roots(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(5.0, 1.0)]);
        match roots_aberth(&p, 1e-300, 1) {
            Err(Error::NoConvergence { roots, .. }) => assert_eq!(roots.len(), 4),
            other => panic!("expected diagnostic, got {other:?}"),
        }
    }
}
