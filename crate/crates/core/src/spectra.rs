//! Eigenvalues, eigenvectors, multiplicities and PT-phase classification.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::charpoly::{charpoly, charpoly_eval};
use crate::chebyshev::cheb_u;
use crate::error::{Error, Result};
use crate::lattice::{HamiltonianSpec, SshChain};
use crate::roots::{cluster_roots, roots_aberth};

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    pub tol_root: f64,
    pub max_iter: usize,
    /// roots within tol_cluster (1 + |lambda|) merge
    pub tol_cluster: f64,
    /// real iff |Im lambda| <= tol_real (1 + |lambda|)
    pub tol_real: f64,
    /// eigenvector residual bound relative to ||H|| ||psi||
    pub tol_residual: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            tol_root: 1e-14,
            max_iter: 1000,
            tol_cluster: 1e-6,
            tol_real: 1e-8,
            tol_residual: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Unbroken,
    Broken,
    MaximallyBroken,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub center: C64,
    pub algebraic: usize,
    pub geometric: usize,
    pub members: Vec<C64>,
}

impl Cluster {
    pub fn is_defective(&self) -> bool {
        self.algebraic > self.geometric
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<C64>,
    pub clusters: Vec<Cluster>,
    pub phase: Phase,
    pub real_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenvector {
    pub eigenvalue: C64,
    pub components: Vec<C64>,
    /// ||H psi - lambda psi|| / (||H|| ||psi||)
    pub residual: f64,
    pub defective: bool,
}

pub fn is_real(lambda: C64, tol_real: f64) -> bool {
    lambda.im.abs() <= tol_real * (1.0 + lambda.norm())
}

/// Eigenvalues from the characteristic polynomial, clustered and classified.
pub fn spectrum(spec: &HamiltonianSpec, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    spec.validate()?;
    let p = charpoly(spec);
    let raw = roots_aberth(&p, opts.tol_root, opts.max_iter)?;
    let ev = refine_roots(spec, &raw, opts.tol_cluster);
    let mut clusters = Vec::new();
    for rc in cluster_roots(&ev, opts.tol_cluster) {
        let basis = null_basis(spec, rc.center);
        clusters.push(Cluster {
            center: rc.center,
            algebraic: rc.members.len(),
            geometric: basis.len().min(rc.members.len()),
            members: rc.members,
        });
    }
    let real_count: usize = clusters
        .iter()
        .filter(|c| is_real(c.center, opts.tol_real))
        .map(|c| c.algebraic)
        .sum();
    let phase = if real_count == spec.n {
        Phase::Unbroken
    } else if real_count == 0 {
        Phase::MaximallyBroken
    } else {
        Phase::Broken
    };
    let mut eigenvalues = ev;
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(SpectrumReport {
        eigenvalues,
        clusters,
        phase,
        real_count,
    })
}

/// Polish Aberth roots against the continuant. Close pairs are resolved through the critical
/// point c between them: the pair is c ± sqrt(-2 f(c) / f''(c)), a double root (returned twice)
/// when that split is below `tol_cluster`. Larger clusters are left as found.
fn refine_roots(spec: &HamiltonianSpec, raw: &[C64], tol_cluster: f64) -> Vec<C64> {
    let pre = cluster_roots(raw, tol_cluster);
    let centers: Vec<C64> = pre.iter().map(|c| c.center).collect();
    let nearest = |i: usize| -> (usize, f64) {
        centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, z)| (j, (z - centers[i]).norm()))
            .fold((i, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    };
    let mut out = Vec::with_capacity(raw.len());
    let mut done = vec![false; pre.len()];
    for i in 0..pre.len() {
        if done[i] {
            continue;
        }
        done[i] = true;
        let (j, gap) = nearest(i);
        let size = pre[i].members.len();
        let x = centers[i];
        let pair = size == 1
            && j != i
            && !done[j]
            && pre[j].members.len() == 1
            && nearest(j).0 == i
            && gap <= 1e-3 * (1.0 + x.norm());
        if pair {
            done[j] = true;
            let mid = (x + centers[j]) * 0.5;
            let c = polish(spec, mid, 1, gap);
            let v = charpoly_eval(spec, c);
            let split = if v[2] == C64::new(0.0, 0.0) { C64::new(f64::INFINITY, 0.0) } else { (-v[0] * 2.0 / v[2]).sqrt() };
            if split.norm() <= tol_cluster * (1.0 + c.norm()) {
                out.extend([c, c]);
            } else if split.norm() < gap {
                let half = 0.5 * split.norm();
                out.push(polish(spec, c + split, 0, half));
                out.push(polish(spec, c - split, 0, half));
            } else {
                out.push(polish(spec, x, 0, 0.5 * gap));
                out.push(polish(spec, centers[j], 0, 0.5 * gap));
            }
            continue;
        }
        match size {
            1 => out.push(polish(spec, x, 0, 0.5 * gap)),
            2 => {
                let c = polish(spec, x, 1, 0.5 * gap);
                out.extend([c, c]);
            }
            _ => out.extend(pre[i].members.iter().copied()),
        }
    }
    out
}

/// Newton on the k-th derivative of det(lambda - H), evaluated by the continuant rather than
/// from expanded coefficients: k = 0 refines a simple root, k = 1 the centre of a double root.
/// Steps must reduce the residual, and the result stays within `max_move` of the start.
fn polish(spec: &HamiltonianSpec, start: C64, k: usize, max_move: f64) -> C64 {
    let mut x = start;
    let mut best = charpoly_eval(spec, x)[k].norm();
    for _ in 0..8 {
        let v = charpoly_eval(spec, x);
        if v[k + 1] == C64::new(0.0, 0.0) {
            break;
        }
        let step = v[k] / v[k + 1];
        let cand = x - step;
        let r = charpoly_eval(spec, cand)[k].norm();
        if !(r < best) || (cand - start).norm() > max_move {
            break;
        }
        x = cand;
        best = r;
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Spectrum plus one eigenvector per independent direction of each cluster.
pub fn eigensystem(
    spec: &HamiltonianSpec,
    opts: &SpectrumOptions,
) -> Result<(SpectrumReport, Vec<Eigenvector>)> {
    let report = spectrum(spec, opts)?;
    let h = spec.dense();
    let hnorm = h.norm().max(f64::MIN_POSITIVE);
    let mut vectors = Vec::new();
    for cl in &report.clusters {
        let defective = cl.is_defective();
        for v in null_basis(spec, cl.center).into_iter().take(cl.geometric) {
            let mut v = v;
            let mut res = residual(&h, cl.center, &v, hnorm);
            if res > opts.tol_residual {
                if let Some(w) = inverse_polish(&h, cl.center, &v) {
                    let r = residual(&h, cl.center, &w, hnorm);
                    if r < res {
                        v = w;
                        res = r;
                    }
                }
            }
            if res > opts.tol_residual && !defective {
                return Err(Error::IllConditioned {
                    eigenvalue: cl.center,
                    residual: res,
                });
            }
            vectors.push(Eigenvector {
                eigenvalue: cl.center,
                components: normalize(v),
                residual: res,
                defective,
            });
        }
    }
    Ok((report, vectors))
}

fn residual(h: &DMatrix<C64>, lambda: C64, v: &[C64], hnorm: f64) -> f64 {
    let x = DVector::from_column_slice(v);
    (h * &x - &x * lambda).norm() / (hnorm * x.norm())
}

fn inverse_polish(h: &DMatrix<C64>, lambda: C64, v: &[C64]) -> Option<Vec<C64>> {
    let n = h.nrows();
    let shift = lambda + C64::new(1e-10 * (1.0 + lambda.norm()), 0.0);
    let lu = (h - DMatrix::<C64>::identity(n, n) * shift).lu();
    let mut x = DVector::from_column_slice(v);
    for _ in 0..3 {
        x = lu.solve(&x)?;
        let nx = x.norm();
        if !nx.is_finite() || nx == 0.0 {
            return None;
        }
        x /= C64::new(nx, 0.0);
    }
    Some(x.iter().copied().collect())
}

/// Unit norm, first non-negligible component real and positive.
pub fn normalize(mut v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v;
    }
    let big = v.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    let first = v
        .iter()
        .find(|x| x.norm() > 1e-10 * big)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = first.conj() / first.norm();
    for x in v.iter_mut() {
        *x = *x * phase / norm;
    }
    v
}

/// Kernel of H - lambda built from two solutions of the interior rows, seeded with
/// (psi1, psi2) = (1, 0) and (0, 1), then closed with the first and last rows.
/// Returns one vector, or two when both boundary rows vanish identically (corner chains).
pub fn null_basis(spec: &HamiltonianSpec, lambda: C64) -> Vec<Vec<C64>> {
    let n = spec.n;
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut v = vec![C64::new(0.0, 0.0); n];
    u[0] = C64::new(1.0, 0.0);
    v[1] = C64::new(1.0, 0.0);
    for i in 1..n - 1 {
        let a = lambda - spec.z[i];
        u[i + 1] = (a * u[i] - spec.t[i - 1] * u[i - 1]) / spec.t[i];
        v[i + 1] = (a * v[i] - spec.t[i - 1] * v[i - 1]) / spec.t[i];
        if i % 32 == 0 {
            let s = [u[i], u[i + 1], v[i], v[i + 1]]
                .iter()
                .fold(0.0f64, |a, x| a.max(x.norm()));
            if s > 1.0 {
                for k in 0..=i + 1 {
                    u[k] /= s;
                    v[k] /= s;
                }
            }
        }
    }
    let first = |w: &[C64]| (spec.z[0] - lambda) * w[0] + spec.t[0] * w[1] + spec.t_left * w[n - 1];
    let last = |w: &[C64]| spec.t_right * w[0] + spec.t[n - 2] * w[n - 2] + (spec.z[n - 1] - lambda) * w[n - 1];
    let g = [[first(&u), first(&v)], [last(&u), last(&v)]];
    let unorm = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let scale = (spec.scale() + lambda.norm()).max(f64::MIN_POSITIVE) * unorm.max(vnorm);
    let r0 = g[0][0].norm().hypot(g[0][1].norm());
    let r1 = g[1][0].norm().hypot(g[1][1].norm());
    if r0.max(r1) <= 1e-6 * scale {
        // Gram-Schmidt on (u, v)
        let uu: Vec<C64> = u.iter().map(|x| x / unorm).collect();
        let proj: C64 = uu.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        let w: Vec<C64> = v.iter().zip(&uu).map(|(b, a)| b - proj * a).collect();
        return vec![uu, w];
    }
    let row = if r0 >= r1 { g[0] } else { g[1] };
    let (a, b) = (row[1], -row[0]);
    vec![u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect()]
}

/// Eigenvector for an eigenvalue, normalized; geometric multiplicity 1 assumed.
pub fn eigenvector(spec: &HamiltonianSpec, lambda: C64) -> Vec<C64> {
    normalize(null_basis(spec, lambda).swap_remove(0))
}

pub type Mat2 = [[C64; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// A^k = (det A)^{k/2} [ -U_{k-2}(y) I + U_{k-1}(y) A / sqrt(det A) ], y = tr A / (2 sqrt(det A)).
/// Principal square root; returned alongside the power. Negative k gives inverse powers.
pub fn mat2_power_cheb(a: &Mat2, k: i64) -> Result<(Mat2, C64)> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.norm()));
    if det.norm() <= 1e-300_f64.max(1e-14 * scale * scale) {
        return Err(Error::Singular(format!("2x2 determinant {det}")));
    }
    let s = det.sqrt();
    let y = (a[0][0] + a[1][1]) / (2.0 * s);
    let sk = s.powi(k as i32);
    let c0 = -cheb_u(k - 2, y);
    let c1 = cheb_u(k - 1, y) / s;
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { c0 } else { C64::new(0.0, 0.0) };
            out[i][j] = sk * (id + c1 * a[i][j]);
        }
    }
    Ok((out, s))
}

/// Transfer matrix of the SSH recurrence with zero interior potential:
/// (psi_{2j+2}, psi_{2j+1}) = A (psi_{2j}, psi_{2j-1}).
pub fn ssh_transfer(lambda: C64, t1: f64, t2: f64) -> Mat2 {
    [
        [(lambda * lambda - t2 * t2) / (t1 * t2), -lambda / t2],
        [lambda / t2, C64::new(-t1 / t2, 0.0)],
    ]
}

/// Uniform nearest-neighbour defect values with closed-form spectra.
pub fn closed_form_defect(row: u8, t: f64) -> Result<C64> {
    let z = match row {
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 1.0),
        3 => C64::new(1.0, 1.0),
        4 => C64::from_polar(1.0, PI / 3.0),
        5 => C64::from_polar(1.0, 2.0 * PI / 3.0),
        _ => return Err(Error::InvalidParameter(format!("no closed-form row {row}"))),
    };
    Ok(z * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCase {
    /// Uniform chain of n = 2m sites, defects at (m, m+1) with z_m from [`closed_form_defect`].
    Uniform { row: u8, m: usize, t: f64 },
    /// Even SSH chain with t_L = -t_R and t2^2 = z1 zn - tL tR.
    SshExact(SshChain),
}

/// Exact eigenvalue multiset.
pub fn closed_form_spectrum(case: ClosedFormCase) -> Result<Vec<C64>> {
    match case {
        ClosedFormCase::Uniform { row, m, t } => {
            if m == 0 || !(t > 0.0) {
                return Err(Error::Constraint(format!("need m >= 1 and t > 0, got m = {m}, t = {t}")));
            }
            let mf = m as f64;
            let fam_a = (1..=m).map(|j| 2.0 * t * (j as f64 * PI / (mf + 1.0)).cos());
            let fam_b = (1..=m).map(|j| 2.0 * t * (2.0 * j as f64 * PI / (2.0 * mf + 1.0)).cos());
            let fam_c = (1..=m).map(|j| 2.0 * t * ((2 * j - 1) as f64 * PI / (2.0 * mf + 1.0)).cos());
            let twice = |f: Vec<f64>| f.iter().chain(f.iter()).map(|&x| C64::new(x, 0.0)).collect();
            let vals: Vec<C64> = match row {
                1 => twice(fam_a.collect()),
                2 => twice(fam_b.collect()),
                3 => twice(fam_c.collect()),
                4 => fam_a.chain(fam_c).map(|x| C64::new(x, 0.0)).collect(),
                5 => fam_a.chain(fam_b).map(|x| C64::new(x, 0.0)).collect(),
                _ => return Err(Error::InvalidParameter(format!("no closed-form row {row}"))),
            };
            Ok(vals)
        }
        ClosedFormCase::SshExact(ch) => {
            if ch.n % 2 != 0 || ch.n < 2 {
                return Err(Error::Constraint(format!("need even n, got {}", ch.n)));
            }
            let scale = 1.0 + ch.t1.abs().max(ch.t2.abs()).powi(2) + ch.z1.norm() * ch.zn.norm();
            if (ch.t_left + ch.t_right).norm() > 1e-12 * (1.0 + ch.t_left.norm()) {
                return Err(Error::Constraint("need t_L = -t_R".into()));
            }
            let cc = ch.z1 * ch.zn - ch.t_left * ch.t_right;
            if (cc - ch.t2 * ch.t2).norm() > 1e-10 * scale {
                return Err(Error::Constraint(format!("t2^2 = {} but z1 zn - tL tR = {cc}", ch.t2 * ch.t2)));
            }
            let k = ch.n / 2;
            let mut vals = Vec::with_capacity(ch.n);
            for j in 1..k {
                let mu = mu(j, ch.n, ch.t1, ch.t2);
                vals.push(C64::new(mu, 0.0));
                vals.push(C64::new(-mu, 0.0));
            }
            let half = (ch.z1 + ch.zn) / 2.0;
            let root = (C64::new(ch.t1 * ch.t1 - ch.t2 * ch.t2, 0.0) + half * half).sqrt();
            vals.push(half + root);
            vals.push(half - root);
            Ok(vals)
        }
    }
}

/// |t1 + t2 exp(2 pi i j / n)|
pub fn mu(j: usize, n: usize, t1: f64, t2: f64) -> f64 {
    (C64::new(t1, 0.0) + C64::from_polar(t2, 2.0 * PI * j as f64 / n as f64)).norm()
}

/// Eigenvalues 2t cos(pi k / g) shared by every defect strength, with
/// g = gcd(2m, n+1) at zero detuning and gcd(m, n+1) otherwise.
pub fn protected_eigenvalues(n: usize, m: usize, detuned: bool, t: f64) -> Vec<f64> {
    let g = if detuned { gcd(m, n + 1) } else { gcd(2 * m, n + 1) };
    (1..g).map(|k| 2.0 * t * (PI * k as f64 / g as f64).cos()).collect()
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Bulk,
    Edge,
}

/// Q = (lambda^2 - t1^2 - t2^2) / (2 t1 t2)
pub fn ssh_q(lambda: C64, t1: f64, t2: f64) -> C64 {
    (lambda * lambda - t1 * t1 - t2 * t2) / (2.0 * t1 * t2)
}

/// Edge iff |Q(lambda)| > 1.
pub fn classify_state(lambda: C64, t1: f64, t2: f64) -> StateKind {
    if ssh_q(lambda, t1, t2).norm() > 1.0 + 1e-12 {
        StateKind::Edge
    } else {
        StateKind::Bulk
    }
}

/// sum |psi|^4 / (sum |psi|^2)^2
pub fn inverse_participation_ratio(psi: &[C64]) -> f64 {
    let n2: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    psi.iter().map(|x| x.norm_sqr().powi(2)).sum::<f64>() / (n2 * n2)
}
