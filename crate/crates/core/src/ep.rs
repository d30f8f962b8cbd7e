//! Exceptional points: resultants, the end-defect indicator, contour tracing in (delta, gamma),
//! cusp (EP3) census, Puiseux exponent fits, large-detuning thresholds and the SSH EP surface.
//!
//! For the uniform chain with end defects all quantities are in units of t: x = lambda / 2t,
//! z' = z1 / t = r e^{i theta}, and P(x) = U_n(x) - 2 Re z' U_{n-1}(x) + |z'|^2 U_{n-2}(x).

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::charpoly::{charpoly, charpoly_ssh, charpoly_uniform_defects};
use crate::chebyshev::cheb_u_poly;
use crate::error::{Error, Result};
use crate::lattice::{HamiltonianSpec, SshChain};
use crate::poly::ComplexPolynomial;
use crate::roots::roots;
use crate::spectra::null_basis;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

// ---------------------------------------------------------------------------------------------
// resultants

/// Phase and natural log of |det| by Gaussian elimination with partial pivoting.
fn log_det(mut a: DMatrix<C64>) -> (C64, f64) {
    let n = a.nrows();
    let mut phase = c(1.0);
    let mut log_abs = 0.0;
    for k in 0..n {
        let (piv, big) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if big == 0.0 {
            return (c(0.0), f64::NEG_INFINITY);
        }
        if piv != k {
            a.swap_rows(piv, k);
            phase = -phase;
        }
        let p = a[(k, k)];
        phase *= p / p.norm();
        log_abs += p.norm().ln();
        for i in k + 1..n {
            let f = a[(i, k)] / p;
            if f != c(0.0) {
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
    }
    (phase, log_abs)
}

fn sylvester(f: &ComplexPolynomial, g: &ComplexPolynomial) -> DMatrix<C64> {
    let (df, dg) = (f.degree(), g.degree());
    let size = df + dg;
    let mut s = DMatrix::<C64>::zeros(size, size);
    for row in 0..dg {
        for k in 0..=df {
            s[(row, row + k)] = f.coeff(df - k);
        }
    }
    for row in 0..df {
        for k in 0..=dg {
            s[(dg + row, row + k)] = g.coeff(dg - k);
        }
    }
    s
}

/// Res(p, q) as (phase, ln|Res|), normalized so that Res = prod q(x_i) over the roots of p.
pub fn resultant_log(p: &ComplexPolynomial, q: &ComplexPolynomial) -> Result<(C64, f64)> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::InvalidParameter("zero polynomial in resultant".into()));
    }
    if p.degree() == 0 {
        return Err(Error::InvalidParameter("first argument of resultant needs degree >= 1".into()));
    }
    let f = p.monic();
    if q.degree() == 0 {
        let v = q.coeff(0).powu(f.degree() as u32);
        return Ok((v / v.norm(), v.norm().ln()));
    }
    Ok(log_det(sylvester(&f, q)))
}

/// Res(p, q) = prod q(x_i) over the roots x_i of p (Sylvester determinant with p made monic).
pub fn resultant(p: &ComplexPolynomial, q: &ComplexPolynomial) -> Result<C64> {
    let (phase, l) = resultant_log(p, q)?;
    Ok(phase * l.exp())
}

/// prod_{i<j} (x_i - x_j)^2 of the monic normalization of p, as (phase, ln|.|).
pub fn discriminant_log(p: &ComplexPolynomial) -> Result<(C64, f64)> {
    let d = p.degree();
    if d < 1 {
        return Err(Error::InvalidParameter("discriminant needs degree >= 1".into()));
    }
    if d == 1 {
        return Ok((c(1.0), 0.0));
    }
    let f = p.monic();
    let (phase, l) = resultant_log(&f, &f.derivative())?;
    let s = if (d * (d - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok((phase * s, l))
}

pub fn discriminant(p: &ComplexPolynomial) -> Result<C64> {
    let (phase, l) = discriminant_log(p)?;
    Ok(phase * l.exp())
}

/// p1^2 p2^2 - 4 p0 p2^3 - 4 p1^3 p3 + 18 p0 p1 p2 p3 - 27 p0^2 p3^2
pub fn cubic_discriminant(p0: C64, p1: C64, p2: C64, p3: C64) -> C64 {
    p1 * p1 * p2 * p2 - 4.0 * p0 * p2 * p2 * p2 - 4.0 * p1 * p1 * p1 * p3 + 18.0 * p0 * p1 * p2 * p3
        - 27.0 * p0 * p0 * p3 * p3
}

// ---------------------------------------------------------------------------------------------
// uniform chain with end defects

/// P(x) for the n-site uniform chain with z1' and zn' = conj(z1').
pub fn critical_charpoly(n: usize, z1p: C64) -> Result<ComplexPolynomial> {
    if n < 2 {
        return Err(Error::Dimension(format!("need n >= 2, got {n}")));
    }
    charpoly_uniform_defects(n, 1, z1p, z1p.conj())
}

/// Chebyshev pieces of P so that parameter derivatives are cheap.
#[derive(Debug, Clone)]
pub struct CriticalChain {
    pub n: usize,
    un: ComplexPolynomial,
    un1: ComplexPolynomial,
    un2: ComplexPolynomial,
}

impl CriticalChain {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("need n >= 2, got {n}")));
        }
        let n_ = n as i64;
        Ok(CriticalChain {
            n,
            un: cheb_u_poly(n_),
            un1: cheb_u_poly(n_ - 1),
            un2: cheb_u_poly(n_ - 2),
        })
    }

    pub fn poly(&self, delta: f64, gamma: f64) -> ComplexPolynomial {
        &(&self.un - &(&self.un1 * (2.0 * delta))) + &(&self.un2 * (delta * delta + gamma * gamma))
    }

    pub fn d_delta(&self, delta: f64) -> ComplexPolynomial {
        &(&self.un1 * -2.0) + &(&self.un2 * (2.0 * delta))
    }

    pub fn d_gamma(&self, gamma: f64) -> ComplexPolynomial {
        &self.un2 * (2.0 * gamma)
    }
}

fn deriv_at(p: &ComplexPolynomial, k: usize, x: f64) -> f64 {
    p.nth_derivative(k).eval(c(x)).re
}

/// Coefficients (a2, a1, a0) of the quadratic B(x) with p = |z'|^2 and s = 2 Re z'.
fn b_quadratic(n: usize, z1p: C64) -> (f64, f64, f64) {
    let nf = n as f64;
    let p = z1p.norm_sqr();
    let s = 2.0 * z1p.re;
    let a2 = 4.0 * nf * p / (1.0 - p);
    let a1 = -s - 2.0 * nf * s * (1.0 + p) / (1.0 - p);
    let a0 = 2.0 * p + (nf + 1.0) * (1.0 - p) + nf * s * s / (1.0 - p);
    (a2, a1, a0)
}

/// (-1)^floor((n+1)/2) 2^{n(n-2)} / n^n, as (sign, ln|.|)
fn indicator_constant(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let sign = if ((n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    (sign, nf * (nf - 2.0) * 2f64.ln() - nf * nf.ln())
}

/// P(b+) P(b-) with b± the roots of B(x). Real for PT defects; zero at EP crossings, with
/// spurious zeros where |z'| = 1 or P(±1) = 0. When B degenerates (z' ~ 0) the value is
/// replaced by P(1) P(-1) Res(P, P') from the dense Sylvester matrix.
pub fn ep_indicator(n: usize, z1p: C64) -> Result<f64> {
    let p = z1p.norm_sqr();
    if (1.0 - p).abs() < 1e-12 {
        return Err(Error::Constraint("z1' zn' = 1 is the exactly solvable case".into()));
    }
    let poly = critical_charpoly(n, z1p)?;
    let (a2, a1, a0) = b_quadratic(n, z1p);
    if a2.abs() < 1e-12 * (a1.abs() + a0.abs()) {
        let (ph, l) = resultant_log(&poly, &poly.derivative())?;
        let ends = (poly.eval(c(1.0)) * poly.eval(c(-1.0))).re;
        return Ok(ends * (ph * l.exp()).re);
    }
    let disc = C64::new(a1 * a1 - 4.0 * a2 * a0, 0.0).sqrt();
    let bp = (-a1 + disc) / (2.0 * a2);
    let bm = (-a1 - disc) / (2.0 * a2);
    Ok((poly.eval(bp) * poly.eval(bm)).re)
}

/// Sign and ln-magnitude of a real quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    fn from_value(v: f64) -> Self {
        SignedLog {
            sign: if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 },
            ln_abs: v.abs().ln(),
        }
    }

    pub fn value(&self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }
}

/// Discriminant prod_{i<j}(x_i - x_j)^2 of the monic P, whose sign is (-1)^(number of complex
/// pairs). Computed from the indicator through
/// indicator * p^n / ((1-p) P(1) P(-1)) = c_n prod_{i != j}(x_i - x_j), and from the dense
/// Sylvester matrix near p = 1, p = 0 and P(±1) = 0 where that identity loses accuracy.
pub fn ep_sign_proxy(n: usize, z1p: C64) -> Result<SignedLog> {
    let poly = critical_charpoly(n, z1p)?;
    let p = z1p.norm_sqr();
    let (p1, m1) = (poly.eval(c(1.0)).re, poly.eval(c(-1.0)).re);
    let end_scale = (n as f64 + 1.0) * (1.0 + z1p.norm()).powi(2);
    let dense = (1.0 - p).abs() < 1e-6
        || p < 1e-6
        || p1.abs() < 1e-6 * end_scale
        || m1.abs() < 1e-6 * end_scale;
    if dense {
        let (ph, l) = discriminant_log(&poly)?;
        return Ok(SignedLog {
            sign: if ph.re > 0.0 { 1 } else if ph.re < 0.0 { -1 } else { 0 },
            ln_abs: l,
        });
    }
    let raw = ep_indicator(n, z1p)?;
    let (cs, cl) = indicator_constant(n);
    let pair_sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let sign = raw.signum() / ((1.0 - p) * p1 * m1).signum() * cs * pair_sign;
    let ln_abs = raw.abs().ln() + n as f64 * p.ln() - ((1.0 - p) * p1 * m1).abs().ln() - cl;
    Ok(SignedLog::from_value(sign).with_ln(ln_abs))
}

impl SignedLog {
    fn with_ln(mut self, ln_abs: f64) -> Self {
        self.ln_abs = ln_abs;
        self
    }
}

/// Number of complex-conjugate pairs among the roots of p (|Im| above tol (1 + |root|)).
pub fn complex_pair_count(p: &ComplexPolynomial, tol: f64) -> Result<usize> {
    let r = roots(p)?;
    Ok(r.iter().filter(|z| z.im > tol * (1.0 + z.norm())).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpKind {
    Regular,
    Cusp,
    Crunode,
    Acnode,
    BoundaryCase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EPPoint {
    pub theta: f64,
    pub r: f64,
    pub delta: f64,
    pub gamma: f64,
    /// lambda / t
    pub eigenvalue: C64,
    pub order: usize,
    pub kind: EpKind,
    /// sign-change count of the indicator along the ray (1 for a one-to-one contour)
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EPContour {
    pub n: usize,
    pub points: Vec<EPPoint>,
    pub cusps: Vec<EPPoint>,
    pub skipped: Vec<f64>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayCrossing {
    pub r: f64,
    pub crossings: usize,
}

pub const RAY_SAMPLES: usize = 400;
const RAY_R_MIN: f64 = 1e-3;

fn fold_theta(theta: f64) -> f64 {
    let mut th = theta.rem_euclid(2.0 * PI);
    if th > PI {
        th -= 2.0 * PI;
    }
    let th = th.abs();
    if th > PI / 2.0 {
        PI - th
    } else {
        th
    }
}

/// First indicator sign change on the ray z' = r e^{i theta}, bisected to `tol (1 + r)` and
/// polished by Newton on P = P' = 0 in (x, r).
pub fn ray_crossing(n: usize, theta: f64, tol: f64) -> Result<RayCrossing> {
    if n < 3 {
        return Err(Error::Dimension(format!("need n >= 3, got {n}")));
    }
    let s = theta.sin().abs();
    if s < 1e-14 {
        return Err(Error::NoSignChange(format!("theta = {theta} lies on the real axis")));
    }
    let r_max = 2.0 * (1.0 / s).powf(1.0 / (n as f64 - 1.0)) + 3.0;
    let dir = C64::from_polar(1.0, theta);
    let sign_at = |r: f64| -> Result<i8> { Ok(ep_sign_proxy(n, dir * r)?.sign) };
    let rs: Vec<f64> = (0..RAY_SAMPLES)
        .map(|k| RAY_R_MIN + (r_max - RAY_R_MIN) * k as f64 / (RAY_SAMPLES - 1) as f64)
        .collect();
    let signs: Vec<i8> = rs.iter().map(|&r| sign_at(r)).collect::<Result<_>>()?;
    let mut first = None;
    let mut crossings = 0;
    let mut last = signs[0];
    for k in 1..rs.len() {
        if signs[k] != 0 && last != 0 && signs[k] != last {
            crossings += 1;
            if first.is_none() {
                first = Some(k);
            }
        }
        if signs[k] != 0 {
            last = signs[k];
        }
    }
    let k = first.ok_or_else(|| Error::NoSignChange(format!("no indicator sign change for theta = {theta}")))?;
    let (mut lo, mut hi) = (rs[k - 1], rs[k]);
    let s_lo = sign_at(lo)?;
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sign_at(mid)? == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    Ok(RayCrossing {
        r: newton_ray(n, theta, r).unwrap_or(r),
        crossings,
    })
}

fn newton_ray(n: usize, theta: f64, r0: f64) -> Option<f64> {
    let cc = CriticalChain::new(n).ok()?;
    let (x0, _) = degenerate_root(&critical_charpoly(n, C64::from_polar(r0, theta)).ok()?)?;
    if x0.im.abs() > 1e-6 {
        return None;
    }
    let (mut x, mut r) = (x0.re, r0);
    let (cos, sin) = (theta.cos(), theta.sin());
    for _ in 0..30 {
        let p = cc.poly(r * cos, r * sin);
        let dr = &(&cc.d_delta(r * cos) * cos) + &(&cc.d_gamma(r * sin) * sin);
        let f = Vector2::new(deriv_at(&p, 0, x), deriv_at(&p, 1, x));
        let j = Matrix2::new(deriv_at(&p, 1, x), deriv_at(&dr, 0, x), deriv_at(&p, 2, x), deriv_at(&dr, 1, x));
        let step = j.lu().solve(&f)?;
        if !(step[0].is_finite() && step[1].is_finite()) {
            return None;
        }
        x -= step[0];
        r -= step[1];
        if step.norm() < 1e-15 * (1.0 + r.abs()) {
            break;
        }
    }
    ((r - r0).abs() < 1e-7 * (1.0 + r0)).then_some(r)
}

/// Closest pair of roots: (midpoint, gap).
fn degenerate_root(p: &ComplexPolynomial) -> Option<(C64, f64)> {
    let r = roots(p).ok()?;
    let mut best: Option<(C64, f64)> = None;
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let d = (r[i] - r[j]).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some(((r[i] + r[j]) * 0.5, d));
            }
        }
    }
    best
}

/// Degenerate root of P at an EP, polished by Newton on P' when real.
fn ep_root(p: &ComplexPolynomial) -> Option<C64> {
    let (mut x, _) = degenerate_root(p)?;
    if x.im.abs() < 1e-6 {
        let mut xr = x.re;
        for _ in 0..8 {
            let d2 = deriv_at(p, 2, xr);
            if d2 == 0.0 {
                break;
            }
            let step = deriv_at(p, 1, xr) / d2;
            if !step.is_finite() || step.abs() > 1e-3 {
                break;
            }
            xr -= step;
        }
        x = c(xr);
    }
    Some(x)
}

/// Roots of p within `window (1 + |x0|)` of x0; ambiguous if the 10x window holds more.
pub fn cluster_size(p: &ComplexPolynomial, x0: C64, window: f64) -> Result<usize> {
    let r = roots(p)?;
    let w = window * (1.0 + x0.norm());
    let inner = r.iter().filter(|z| (**z - x0).norm() <= w).count();
    let outer = r.iter().filter(|z| (**z - x0).norm() <= 10.0 * w).count();
    if inner != outer {
        return Err(Error::AmbiguousCluster {
            center: x0,
            window: w,
            inner,
            outer,
        });
    }
    Ok(inner)
}

pub const EP_ORDER_WINDOW: f64 = 1e-3;

fn contour_point(n: usize, theta: f64, r: f64, crossings: usize) -> Result<EPPoint> {
    let z = C64::from_polar(r, theta);
    let p = critical_charpoly(n, z)?;
    let x0 = ep_root(&p).ok_or_else(|| Error::NoSignChange("no roots".into()))?;
    let order = cluster_size(&p, x0, EP_ORDER_WINDOW).unwrap_or(2);
    let boundary = [1.0, -1.0].iter().any(|&s| (x0 - c(s)).norm() < 1e-6);
    let kind = if boundary {
        EpKind::BoundaryCase
    } else if order >= 3 {
        EpKind::Cusp
    } else {
        EpKind::Regular
    };
    Ok(EPPoint {
        theta,
        r,
        delta: z.re,
        gamma: z.im,
        eigenvalue: x0 * 2.0,
        order,
        kind,
        crossings,
    })
}

/// EP contour of the n-site uniform chain with end defects: one radial crossing per theta.
/// Rays are solved on the folded angle in [0, pi/2] and mapped back by the symmetries
/// r(theta) = r(pi - theta) = r(-theta).
pub fn ep_contour(n: usize, theta_grid: &[f64], tol: f64) -> Result<EPContour> {
    if n < 3 {
        return Err(Error::Dimension(format!("need n >= 3, got {n}")));
    }
    let mut folded: Vec<f64> = theta_grid.iter().map(|&t| fold_theta(t)).collect();
    folded.sort_by(f64::total_cmp);
    folded.dedup();
    let solved: Vec<(f64, Result<RayCrossing>)> = folded
        .par_iter()
        .map(|&th| (th, ray_crossing(n, th, tol)))
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    let mut diagnostics = Vec::new();
    let mut order: Vec<f64> = theta_grid.to_vec();
    order.sort_by(f64::total_cmp);
    for th in order {
        let f = fold_theta(th);
        let (_, res) = solved.iter().find(|(t, _)| *t == f).expect("folded angle solved");
        match res {
            Ok(rc) => {
                if rc.crossings > 1 {
                    diagnostics.push(format!("theta = {th}: {} sign changes on the ray", rc.crossings));
                }
                points.push(contour_point(n, th, rc.r, rc.crossings)?);
            }
            Err(e) => {
                skipped.push(th);
                diagnostics.push(format!("theta = {th}: {e}"));
            }
        }
    }
    let cusps = points.iter().filter(|p| p.order >= 3).cloned().collect();
    Ok(EPContour {
        n,
        points,
        cusps,
        skipped,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------------------------
// Puiseux fits

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// along z' itself
    Radial,
    /// along the gradient of P(x0) in (delta, gamma)
    Normal,
    /// perpendicular to the gradient
    Tangent,
    /// unit vector (d_delta, d_gamma)
    Custom(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PuiseuxFit {
    /// free log-log slope
    pub exponent: f64,
    /// coefficient of h^{1/2}
    pub tau: f64,
    /// rms log residual of the square-root model
    pub residual: f64,
    /// k with exponent ~ 1/k for k in {1, 2, 3}, or None
    pub order: Option<u32>,
    /// number of roots coalescing at the base point
    pub cluster: usize,
}

/// 9 points logarithmically spaced in [1e-7, 1e-3].
pub fn default_h_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-7.0 + 0.5 * k as f64)).collect()
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Unit direction in the (delta, gamma) plane.
pub fn direction_vector(n: usize, delta: f64, gamma: f64, x0: f64, dir: Direction) -> Result<(f64, f64)> {
    let unit = |a: f64, b: f64| {
        let h = a.hypot(b);
        if h == 0.0 {
            Err(Error::InvalidParameter("zero direction".into()))
        } else {
            Ok((a / h, b / h))
        }
    };
    match dir {
        Direction::Radial => unit(delta, gamma),
        Direction::Custom(a, b) => unit(a, b),
        Direction::Normal | Direction::Tangent => {
            let cc = CriticalChain::new(n)?;
            let gd = deriv_at(&cc.d_delta(delta), 0, x0);
            let gg = deriv_at(&cc.d_gamma(gamma), 0, x0);
            if matches!(dir, Direction::Normal) {
                unit(gd, gg)
            } else {
                unit(-gg, gd)
            }
        }
    }
}

/// Fit |delta lambda| ~ h^{1/k} at an EP (delta, gamma) with degenerate root x0, perturbing
/// along `dir`. |delta lambda| is the distance from lambda0 to the k-th nearest eigenvalue,
/// k the cluster size at the base point.
pub fn puiseux_fit(n: usize, delta: f64, gamma: f64, x0: C64, dir: Direction, h_grid: &[f64]) -> Result<PuiseuxFit> {
    if h_grid.len() < 2 {
        return Err(Error::InvalidParameter("need at least two step sizes".into()));
    }
    let base = critical_charpoly(n, C64::new(delta, gamma))?;
    let cluster = cluster_size(&base, x0, EP_ORDER_WINDOW).unwrap_or(2).max(2);
    let (ud, ug) = direction_vector(n, delta, gamma, x0.re, dir)?;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &h in h_grid {
        let p = critical_charpoly(n, C64::new(delta + h * ud, gamma + h * ug))?;
        let mut d: Vec<f64> = roots(&p)?.iter().map(|z| 2.0 * (z - x0).norm()).collect();
        d.sort_by(f64::total_cmp);
        lx.push(h.ln());
        ly.push(d[cluster - 1].max(f64::MIN_POSITIVE).ln());
    }
    let (exponent, _) = linear_fit(&lx, &ly);
    let log_tau = ly.iter().zip(&lx).map(|(y, x)| y - 0.5 * x).sum::<f64>() / lx.len() as f64;
    let residual =
        (ly.iter().zip(&lx).map(|(y, x)| (y - 0.5 * x - log_tau).powi(2)).sum::<f64>() / lx.len() as f64).sqrt();
    let order = [1u32, 2, 3]
        .into_iter()
        .find(|&k| (exponent - 1.0 / k as f64).abs() <= 0.05);
    Ok(PuiseuxFit {
        exponent,
        tau: log_tau.exp(),
        residual,
        order,
        cluster,
    })
}

/// Puiseux fit at the contour point of angle theta.
pub fn puiseux_tau(n: usize, theta: f64, h_grid: &[f64], dir: Direction) -> Result<PuiseuxFit> {
    let rc = ray_crossing(n, theta, 1e-14)?;
    let pt = contour_point(n, theta, rc.r, rc.crossings)?;
    puiseux_fit(n, pt.delta, pt.gamma, pt.eigenvalue / 2.0, dir, h_grid)
}

// ---------------------------------------------------------------------------------------------
// cusps

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cusp {
    pub theta: f64,
    pub r: f64,
    pub delta: f64,
    pub gamma: f64,
    /// lambda / t
    pub eigenvalue: f64,
    /// max |(P, P', P'')| after refinement
    pub residual: f64,
    /// branch exponent fitted along the normal of the P(x0) = 0 curve
    pub exponent: f64,
    pub cluster: usize,
}

/// Newton on P = P' = P'' = 0 in (x, delta, gamma), with `polys(delta, gamma)` returning P
/// and its delta and gamma derivatives. Returns (x, delta, gamma, max residual / scale).
fn newton_ep3(
    polys: impl Fn(f64, f64) -> (ComplexPolynomial, ComplexPolynomial, ComplexPolynomial),
    x: f64,
    delta: f64,
    gamma: f64,
    scale: f64,
) -> Result<(f64, f64, f64, f64)> {
    let mut v = Vector3::new(x, delta, gamma);
    let eval = |v: &Vector3<f64>| {
        let (p, pd, pg) = polys(v[1], v[2]);
        let f = Vector3::new(deriv_at(&p, 0, v[0]), deriv_at(&p, 1, v[0]), deriv_at(&p, 2, v[0]));
        let j = Matrix3::from_fn(|i, k| match k {
            0 => deriv_at(&p, i + 1, v[0]),
            1 => deriv_at(&pd, i, v[0]),
            _ => deriv_at(&pg, i, v[0]),
        });
        (f, j)
    };
    for _ in 0..60 {
        let (f, j) = eval(&v);
        let step = j
            .lu()
            .solve(&f)
            .ok_or_else(|| Error::Singular("EP3 Jacobian".into()))?;
        v -= step;
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Singular("EP3 Newton diverged".into()));
        }
        if step.norm() < 1e-15 * (1.0 + v.norm()) {
            break;
        }
    }
    let (f, _) = eval(&v);
    Ok((v[0], v[1], v[2], f.amax() / scale))
}

/// Newton on P = P' = P'' = 0 in (x, delta, gamma) for the uniform chain.
pub fn refine_ep3(n: usize, x: f64, delta: f64, gamma: f64) -> Result<(f64, f64, f64, f64)> {
    let cc = CriticalChain::new(n)?;
    newton_ep3(
        |d, g| (cc.poly(d, g), cc.d_delta(d), cc.d_gamma(g)),
        x,
        delta,
        gamma,
        2f64.powi(n as i32),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspCensus {
    pub n: usize,
    pub cusps: Vec<Cusp>,
    /// P''(x0) along the contour, (theta, value), for diagnostics
    pub curvature: Vec<(f64, f64)>,
}

/// Cusps of the upper-half-plane contour: sign changes of P''(x0) on the grid
/// theta_j = (j + 1/2) pi / steps, each refined to an EP3 and fitted along the normal.
pub fn cusp_census(n: usize, steps: usize) -> Result<CuspCensus> {
    if n < 3 {
        return Err(Error::Dimension(format!("need n >= 3, got {n}")));
    }
    let steps = steps.max(4);
    let thetas: Vec<f64> = (0..steps).map(|j| (j as f64 + 0.5) * PI / steps as f64).collect();
    let samples: Vec<Option<(f64, f64, f64)>> = thetas
        .par_iter()
        .map(|&th| {
            let rc = ray_crossing(n, th, 1e-13).ok()?;
            let p = critical_charpoly(n, C64::from_polar(rc.r, th)).ok()?;
            let x0 = ep_root(&p)?;
            Some((rc.r, x0.re, deriv_at(&p, 2, x0.re)))
        })
        .collect();
    let curvature: Vec<(f64, f64)> = thetas
        .iter()
        .zip(&samples)
        .filter_map(|(th, s)| s.map(|(_, _, d2)| (*th, d2)))
        .collect();
    let mut cusps: Vec<Cusp> = Vec::new();
    for k in 0..steps - 1 {
        let (Some(a), Some(b)) = (samples[k], samples[k + 1]) else { continue };
        if a.2.signum() == b.2.signum() {
            continue;
        }
        let th = 0.5 * (thetas[k] + thetas[k + 1]);
        let r0 = 0.5 * (a.0 + b.0);
        let Ok((x, d, g, res)) = refine_ep3(n, 0.5 * (a.1 + b.1), r0 * th.cos(), r0 * th.sin()) else {
            continue;
        };
        let theta = g.atan2(d);
        let r = d.hypot(g);
        // must land between the bracketing rays
        if res > 1e-8 || !(theta >= thetas[k] - 1e-9 && theta <= thetas[k + 1] + 1e-9) {
            continue;
        }
        if cusps.iter().any(|cu| (cu.theta - theta).abs() < 1e-9) {
            continue;
        }
        let fit = puiseux_fit(n, d, g, c(x), Direction::Normal, &default_h_grid())?;
        cusps.push(Cusp {
            theta,
            r,
            delta: d,
            gamma: g,
            eigenvalue: 2.0 * x,
            residual: res,
            exponent: fit.exponent,
            cluster: fit.cluster,
        });
    }
    Ok(CuspCensus { n, cusps, curvature })
}

/// Taylor data at an EP: p_i = P^{(i)}(x0)/i! for i = 0..3 and the gradients of p0, p1, p2
/// with respect to (delta, gamma).
pub fn cubic_coefficients(n: usize, delta: f64, gamma: f64, x0: f64) -> Result<([f64; 4], [[f64; 2]; 3])> {
    let cc = CriticalChain::new(n)?;
    let p = cc.poly(delta, gamma);
    let pd = cc.d_delta(delta);
    let pg = cc.d_gamma(gamma);
    let fact = [1.0, 1.0, 2.0, 6.0];
    let mut coeffs = [0.0; 4];
    for i in 0..4 {
        coeffs[i] = deriv_at(&p, i, x0) / fact[i];
    }
    let mut grads = [[0.0; 2]; 3];
    for i in 0..3 {
        grads[i] = [deriv_at(&pd, i, x0) / fact[i], deriv_at(&pg, i, x0) / fact[i]];
    }
    Ok((coeffs, grads))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchOrder {
    Third,
    Half,
    One,
}

impl BranchOrder {
    pub fn exponent(self) -> f64 {
        match self {
            BranchOrder::Third => 1.0 / 3.0,
            BranchOrder::Half => 0.5,
            BranchOrder::One => 1.0,
        }
    }
}

/// Leading Puiseux exponent along u at an EP3 from the gradients of p0, p1, p2.
pub fn branch_order(gradients: &[Vec<C64>; 3], u: &[C64], tol: f64) -> Result<BranchOrder> {
    let dot = |g: &Vec<C64>| -> Result<(C64, f64)> {
        if g.len() != u.len() {
            return Err(Error::Dimension(format!("gradient has {} entries, direction {}", g.len(), u.len())));
        }
        let v: C64 = g.iter().zip(u).map(|(a, b)| a * b).sum();
        let scale = g.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() * u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Ok((v, scale))
    };
    for (k, ord) in [BranchOrder::Third, BranchOrder::Half, BranchOrder::One].into_iter().enumerate() {
        let (v, s) = dot(&gradients[k])?;
        if v.norm() > tol * s.max(f64::MIN_POSITIVE) {
            return Ok(ord);
        }
    }
    Err(Error::Constraint("direction is degenerate for all three gradients".into()))
}

// ---------------------------------------------------------------------------------------------
// large detuning

/// gamma_EP ~ t^{n-1} / delta^{n-2} for delta >> t (t = 1); t for n = 2.
pub fn asymptotic_threshold(n: usize, delta: f64) -> f64 {
    if n <= 2 {
        1.0
    } else {
        delta.abs().powi(-(n as i32 - 2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub gamma: f64,
    pub eigenvalue: f64,
}

/// Exact EP threshold of the uniform chain with end defects delta ± i gamma, from the Schur
/// complement onto the two end sites. With G = (mu - K)^{-1}, K the interior block shifted
/// by -delta, a = t^2 G_11 and b = t^2 G_1L, the end-site eigenproblem is (mu - a)^2 = b^2 - gamma^2;
/// the EP is the fold where d/dmu [(mu - a)^2 - b^2] = 0 and gamma^2 = b^2 - (mu - a)^2.
/// Accurate where the closed-form indicator cannot resolve gamma^2 against delta^2.
pub fn feshbach_threshold(n: usize, delta: f64, t: f64) -> Result<Threshold> {
    if n < 2 {
        return Err(Error::Dimension(format!("need n >= 2, got {n}")));
    }
    if n == 2 {
        return Ok(Threshold { gamma: t.abs(), eigenvalue: delta });
    }
    let m = n - 2;
    let k = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            -delta
        } else if i + 1 == j || j + 1 == i {
            t
        } else {
            0.0
        }
    });
    let t2 = t * t;
    let ab = |mu: f64| -> Option<(f64, f64, f64, f64)> {
        let shifted = DMatrix::<f64>::identity(m, m) * mu - &k;
        let g = shifted.lu().try_inverse()?;
        let g2 = &g * &g;
        Some((t2 * g[(0, 0)], t2 * g[(0, m - 1)], -t2 * g2[(0, 0)], -t2 * g2[(0, m - 1)]))
    };
    let h = |mu: f64| -> Option<f64> {
        let (a, b, da, db) = ab(mu)?;
        Some((mu - a) * (1.0 - da) - b * db)
    };
    let singular = || Error::Singular("interior resolvent".into());
    let mut mu = 0.0;
    for _ in 0..60 {
        mu = ab(mu).ok_or_else(singular)?.0;
    }
    let (mut m0, mut m1) = (mu, mu * (1.0 + 1e-6) + 1e-12);
    for _ in 0..80 {
        let (h0, h1) = (h(m0).ok_or_else(singular)?, h(m1).ok_or_else(singular)?);
        if h1 == h0 {
            break;
        }
        let m2 = m1 - h1 * (m1 - m0) / (h1 - h0);
        m0 = m1;
        m1 = m2;
        if (m1 - m0).abs() <= 1e-16 * (1.0 + m1.abs()) {
            break;
        }
    }
    let (a, b, _, _) = ab(m1).ok_or_else(singular)?;
    let g2 = b * b - (m1 - a).powi(2);
    if g2 < 0.0 {
        return Err(Error::NoConvergence {
            iterations: 80,
            max_update: (m1 - m0).abs(),
            roots: vec![c(m1)],
        });
    }
    Ok(Threshold { gamma: g2.sqrt(), eigenvalue: m1 + delta })
}

// ---------------------------------------------------------------------------------------------
// EP order of a general chain

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpOrder {
    pub multiplicity: usize,
    pub center: C64,
    pub window: f64,
    pub geometric: usize,
    /// false for Hermitian specs, where a degeneracy keeps independent eigenvectors
    pub is_ep: bool,
}

/// Algebraic multiplicity of the root cluster at lambda0 within `window (1 + |lambda0|)`.
pub fn ep_order(spec: &HamiltonianSpec, lambda0: C64, window: f64) -> Result<EpOrder> {
    spec.validate()?;
    let p = charpoly(spec);
    let r = roots(&p)?;
    let w = window * (1.0 + lambda0.norm());
    let inner: Vec<C64> = r.iter().copied().filter(|z| (z - lambda0).norm() <= w).collect();
    let outer = r.iter().filter(|z| (**z - lambda0).norm() <= 10.0 * w).count();
    if inner.len() != outer {
        return Err(Error::AmbiguousCluster {
            center: lambda0,
            window: w,
            inner: inner.len(),
            outer,
        });
    }
    if inner.is_empty() {
        return Ok(EpOrder { multiplicity: 0, center: lambda0, window: w, geometric: 0, is_ep: false });
    }
    let center = inner.iter().sum::<C64>() / inner.len() as f64;
    let geometric = null_basis(spec, center).len().min(inner.len());
    let is_ep = !spec.is_hermitian() && inner.len() >= 2 && geometric < inner.len();
    Ok(EpOrder {
        multiplicity: inner.len(),
        center,
        window: w,
        geometric,
        is_ep,
    })
}

// ---------------------------------------------------------------------------------------------
// SSH surface (t2 = 1)

pub const SSH_REAL_TOL: f64 = 1e-7;

fn ssh_poly(n: usize, t1: f64, delta: f64, gamma: f64) -> Result<ComplexPolynomial> {
    let z = C64::new(delta, gamma);
    charpoly_ssh(n, t1, 1.0, z, z.conj(), c(0.0), c(0.0))
}

/// P = A + z1 B + zn C + z1 zn D: the determinant is affine in each end potential.
struct SshPieces {
    a: ComplexPolynomial,
    b: ComplexPolynomial,
    c: ComplexPolynomial,
    d: ComplexPolynomial,
}

impl SshPieces {
    fn new(n: usize, t1: f64) -> Result<Self> {
        let at = |z1: f64, zn: f64| charpoly_ssh(n, t1, 1.0, c(z1), c(zn), c(0.0), c(0.0));
        let a = at(0.0, 0.0)?;
        let b = &at(1.0, 0.0)? - &a;
        let cc = &at(0.0, 1.0)? - &a;
        let d = &(&(&at(1.0, 1.0)? - &a) - &b) - &cc;
        Ok(SshPieces { a, b, c: cc, d })
    }

    /// P, dP/d delta, dP/d gamma at z1 = delta + i gamma = conj(zn).
    fn polys(&self, delta: f64, gamma: f64) -> (ComplexPolynomial, ComplexPolynomial, ComplexPolynomial) {
        let i = C64::new(0.0, 1.0);
        let scale = |p: &ComplexPolynomial, s: C64| ComplexPolynomial::new(p.coeffs().iter().map(|x| x * s).collect());
        let p = &(&(&self.a + &scale(&self.b, C64::new(delta, gamma))) + &scale(&self.c, C64::new(delta, -gamma)))
            + &(&self.d * (delta * delta + gamma * gamma));
        let pd = &(&self.b + &self.c) + &(&self.d * (2.0 * delta));
        let pg = &(&scale(&self.b, i) - &scale(&self.c, i)) + &(&self.d * (2.0 * gamma));
        (p, pd, pg)
    }
}

fn ssh_broken(n: usize, t1: f64, delta: f64, gamma: f64) -> Result<bool> {
    Ok(complex_pair_count(&ssh_poly(n, t1, delta, gamma)?, SSH_REAL_TOL)? > 0)
}

/// First onset of `broken` on a logarithmic grid in (s_min, s_max], bisected geometrically.
/// Some(0) when already broken at s_min, None when never broken.
fn first_break(broken: impl Fn(f64) -> Result<bool>, s_min: f64, s_max: f64) -> Result<Option<f64>> {
    if broken(s_min)? {
        return Ok(Some(0.0));
    }
    let steps = 240;
    let ratio = (s_max / s_min).ln();
    let mut prev = s_min;
    for k in 1..=steps {
        let s = s_min * (ratio * k as f64 / steps as f64).exp();
        if broken(s)? {
            let (mut lo, mut hi) = (prev, s);
            for _ in 0..100 {
                if hi - lo <= 1e-14 * hi {
                    break;
                }
                let mid = (lo * hi).sqrt();
                if broken(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some((lo * hi).sqrt()));
        }
        prev = s;
    }
    Ok(None)
}

const SSH_S_MIN: f64 = 1e-10;

fn ssh_ep_at(n: usize, t1: f64, delta: f64, gamma: f64) -> Result<C64> {
    let p = ssh_poly(n, t1, delta, gamma)?;
    Ok(ep_root(&p).unwrap_or(c(delta)))
}

/// Smallest gamma at which a complex pair appears, for the SSH chain with end defects
/// delta ± i gamma and t2 = 1; None when the spectrum stays real up to `gamma_max`.
/// Returns the threshold and the coalescing eigenvalue.
pub fn ssh_gamma_ep(n: usize, t1: f64, delta: f64, gamma_max: f64) -> Result<Option<(f64, C64)>> {
    match first_break(|g| ssh_broken(n, t1, delta, g), SSH_S_MIN, gamma_max)? {
        Some(g) => Ok(Some((g, ssh_ep_at(n, t1, delta, g.max(SSH_S_MIN))?))),
        None => Ok(None),
    }
}

/// First EP on the ray delta + i gamma = r e^{i theta}: (r, eigenvalue).
pub fn ssh_ray_ep(n: usize, t1: f64, theta: f64, r_max: f64) -> Result<Option<(f64, C64)>> {
    let (cos, sin) = (theta.cos(), theta.sin());
    match first_break(|r| ssh_broken(n, t1, r * cos, r * sin), SSH_S_MIN, r_max)? {
        Some(r) => {
            let r = r.max(SSH_S_MIN);
            Ok(Some((r, ssh_ep_at(n, t1, r * cos, r * sin)?)))
        }
        None => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceSample {
    pub t1_over_t2: f64,
    pub delta: f64,
    /// None: no EP below the scan limit
    pub gamma: Option<f64>,
    pub eigenvalue: Option<C64>,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgePoint {
    pub t1_over_t2: f64,
    pub delta: f64,
    pub gamma: f64,
    pub eigenvalue: C64,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ep4Point {
    pub t1_over_t2: f64,
    pub gamma: f64,
    /// exponent fitted along gamma at delta = 0
    pub exponent: f64,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SshSurface {
    pub n: usize,
    pub samples: Vec<SurfaceSample>,
    pub ridges: Vec<RidgePoint>,
    pub ep4: Vec<Ep4Point>,
}

fn gamma_max(t1: f64, delta: f64) -> f64 {
    10.0 * (t1 + 1.0 + delta.abs())
}

fn surface_sample(n: usize, t1: f64, delta: f64) -> Result<SurfaceSample> {
    let found = ssh_gamma_ep(n, t1, delta, gamma_max(t1, delta))?;
    let (gamma, eigenvalue, order) = match found {
        Some((g, l)) if g > 0.0 => {
            let p = ssh_poly(n, t1, delta, g)?;
            (Some(g), Some(l), cluster_size(&p, l, EP_ORDER_WINDOW).unwrap_or(2))
        }
        Some((_, l)) => (Some(0.0), Some(l), 2),
        None => (None, None, 0),
    };
    Ok(SurfaceSample { t1_over_t2: t1, delta, gamma, eigenvalue, order })
}

fn curvature_at(n: usize, t1: f64, delta: f64, gamma: f64, lambda: C64) -> Result<f64> {
    Ok(ssh_poly(n, t1, delta, gamma)?.nth_derivative(2).eval(lambda).re)
}

/// Angular resolution of the ridge search.
pub const RIDGE_THETA_STEPS: usize = 180;

/// EP surface of the SSH chain with end defects on a (t1/t2, delta/t2) grid, t2 = 1.
/// Samples hold the smallest breaking gamma at each node. The surface is not single-valued
/// over delta, so ridges (EP3 curves) are traced along rays in the (delta, gamma) plane:
/// sign changes of P''(lambda0) with a continuous lambda0, bisected in the ray angle and
/// checked by the cluster size. EP4 points at delta = 0 come from
/// [`ssh_ep4_zero_detuning`] over the ratio range of the grid.
pub fn ep_surface_ssh(n: usize, ratios: &[f64], deltas: &[f64]) -> Result<SshSurface> {
    if n % 2 != 0 || n < 4 {
        return Err(Error::Constraint(format!("need even n >= 4, got {n}")));
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(f64::total_cmp);
    let nodes: Vec<(f64, f64)> = ratios.iter().flat_map(|&r| deltas.iter().map(move |&d| (r, d))).collect();
    let samples: Vec<SurfaceSample> = nodes
        .par_iter()
        .map(|&(r, d)| surface_sample(n, r, d))
        .collect::<Result<_>>()?;
    let mut ridges = Vec::new();
    for &t1 in ratios {
        ridges.extend(ssh_ridges(n, t1, RIDGE_THETA_STEPS)?);
    }
    let ep4 = if ratios.is_empty() {
        Vec::new()
    } else {
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ssh_ep4_zero_detuning(n, lo, hi)?
    };
    Ok(SshSurface { n, samples, ridges, ep4 })
}

/// EP3 points on the first-EP contour of one t1/t2 slice.
pub fn ssh_ridges(n: usize, t1: f64, steps: usize) -> Result<Vec<RidgePoint>> {
    let steps = steps.max(4);
    let pieces = SshPieces::new(n, t1)?;
    let r_max = gamma_max(t1, 0.0);
    let thetas: Vec<f64> = (0..steps).map(|j| (j as f64 + 0.5) * PI / steps as f64).collect();
    let ray = |th: f64| -> Result<Option<(f64, C64, f64)>> {
        Ok(match ssh_ray_ep(n, t1, th, r_max)? {
            Some((r, l)) if r > SSH_S_MIN => {
                let (d, g) = (r * th.cos(), r * th.sin());
                Some((r, l, curvature_at(n, t1, d, g, l)?))
            }
            _ => None,
        })
    };
    let rays: Vec<Option<(f64, C64, f64)>> = thetas.par_iter().map(|&th| ray(th)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..steps - 1 {
        let (Some(a), Some(b)) = (rays[k], rays[k + 1]) else { continue };
        if a.2.signum() == b.2.signum() {
            continue;
        }
        let (mut lo, mut hi) = (thetas[k], thetas[k + 1]);
        let (mut ra, mut rb) = (a, b);
        let mut ok = true;
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            let Some(m) = ray(mid)? else {
                ok = false;
                break;
            };
            if m.2.signum() == ra.2.signum() {
                lo = mid;
                ra = m;
            } else {
                hi = mid;
                rb = m;
            }
        }
        if !ok {
            continue;
        }
        // the cusp tip can sit just beyond the first crossing, past a small self-intersection
        let th = 0.5 * (lo + hi);
        let r = 0.5 * (ra.0 + rb.0);
        let lambda = (ra.1 + rb.1) * 0.5;
        let Ok((x, delta, gamma, res)) =
            newton_ep3(|d, g| pieces.polys(d, g), lambda.re, r * th.cos(), r * th.sin(), 2f64.powi(n as i32))
        else {
            continue;
        };
        let moved = (x - lambda.re).abs() + (delta - r * th.cos()).hypot(gamma - r * th.sin());
        if res > 1e-8 || moved > 0.05 * (1.0 + r) || gamma <= 0.0 {
            continue;
        }
        if out.iter().any(|p: &RidgePoint| (p.delta - delta).hypot(p.gamma - gamma) < 1e-9) {
            continue;
        }
        let p = ssh_poly(n, t1, delta, gamma)?;
        let order = cluster_size(&p, c(x), EP_ORDER_WINDOW).unwrap_or(2);
        out.push(RidgePoint { t1_over_t2: t1, delta, gamma, eigenvalue: c(x), order });
    }
    Ok(out)
}

/// gamma > 0 with P(0) = 0 at delta = 0 (a zero-energy EP), scanning up to gamma_max.
fn zero_mode_gamma(n: usize, t1: f64) -> Result<Option<f64>> {
    let f = |g: f64| -> Result<f64> { Ok(ssh_poly(n, t1, 0.0, g)?.coeff(0).re) };
    let gmax = gamma_max(t1, 0.0);
    let steps = 400;
    let mut prev = (1e-9, f(1e-9)?);
    for k in 1..=steps {
        let g = 1e-9 + gmax * k as f64 / steps as f64;
        let v = f(g)?;
        if v.signum() != prev.1.signum() {
            let (mut lo, mut hi, s) = (prev.0, g, prev.1.signum());
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(mid)?.signum() == s {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = (g, v);
    }
    Ok(None)
}

/// EP4 points of the SSH chain at delta = 0: the zero-energy EP of an even chain has P even in
/// lambda, so P(0) = P''(0) = 0 makes the root fourfold. Located by bisection in t1 on
/// P''(0) along the P(0) = 0 curve, then confirmed by an exponent fit along gamma.
pub fn ssh_ep4_zero_detuning(n: usize, t1_lo: f64, t1_hi: f64) -> Result<Vec<Ep4Point>> {
    if n % 2 != 0 || n < 4 {
        return Err(Error::Constraint(format!("need even n >= 4, got {n}")));
    }
    let curv = |t1: f64| -> Result<Option<(f64, f64)>> {
        Ok(match zero_mode_gamma(n, t1)? {
            Some(g) => Some((g, ssh_poly(n, t1, 0.0, g)?.coeff(2).re)),
            None => None,
        })
    };
    let steps = 200;
    let grid: Vec<f64> = (0..=steps).map(|k| t1_lo + (t1_hi - t1_lo) * k as f64 / steps as f64).collect();
    let vals: Vec<Option<(f64, f64)>> = grid.iter().map(|&t| curv(t)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..steps {
        let (Some(a), Some(b)) = (vals[k], vals[k + 1]) else { continue };
        if a.1.signum() == b.1.signum() {
            continue;
        }
        let (mut lo, mut hi, s) = (grid[k], grid[k + 1], a.1.signum());
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            match curv(mid)? {
                Some((_, v)) if v.signum() == s => lo = mid,
                Some(_) => hi = mid,
                None => break,
            }
        }
        let t1 = 0.5 * (lo + hi);
        let Some((gamma, _)) = curv(t1)? else { continue };
        let base = ssh_poly(n, t1, 0.0, gamma)?;
        let cluster = cluster_size(&base, c(0.0), 1e-2).unwrap_or(0);
        let hs = default_h_grid();
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        let k4 = cluster.max(2);
        for &h in &hs {
            let mut d: Vec<f64> = roots(&ssh_poly(n, t1, 0.0, gamma + h)?)?.iter().map(|z| z.norm()).collect();
            d.sort_by(f64::total_cmp);
            lx.push(h.ln());
            ly.push(d[k4 - 1].max(f64::MIN_POSITIVE).ln());
        }
        let (exponent, _) = linear_fit(&lx, &ly);
        out.push(Ep4Point { t1_over_t2: t1, gamma, exponent, cluster });
    }
    Ok(out)
}

/// SSH chain helper: spec with end defects delta ± i gamma and t2 = 1.
pub fn ssh_end_defect_spec(n: usize, t1: f64, delta: f64, gamma: f64) -> Result<HamiltonianSpec> {
    SshChain::with_end_defects(n, t1, 1.0, delta, gamma).to_spec()
}
