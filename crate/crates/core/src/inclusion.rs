//! Real-interval eigenvalue brackets and Cassini-oval containment for SSH chains with end defects.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::charpoly::charpoly_ssh;
use crate::error::{Error, Result};
use crate::lattice::SshChain;
use crate::roots::roots;

pub use crate::spectra::mu;

/// { w : |w - w1| |w - w2| <= b }
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CassiniOval {
    pub w1: C64,
    pub w2: C64,
    pub b: f64,
}

impl CassiniOval {
    pub fn contains(&self, w: C64) -> bool {
        (w - self.w1).norm() * (w - self.w2).norm() <= self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum IntervalSource {
    /// (mu_{j+1}, mu_j) or its mirror (-mu_j, -mu_{j+1})
    Inner { j: usize, negative: bool },
    /// I(s1, s2) with s1, s2 = ±1
    Outer { s1: i8, s2: i8 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCertificate {
    pub lo: f64,
    pub hi: f64,
    /// Number of eigenvalues in (lo, hi); odd by the sign change, exact when `exact` is set.
    pub guaranteed_count: usize,
    pub exact: bool,
    pub sign_lo: i8,
    pub sign_hi: i8,
    pub sources: Vec<IntervalSource>,
}

/// Ascending real coefficients of det(lambda - H), requiring negligible imaginary parts.
fn real_charpoly(chain: &SshChain) -> Result<Vec<f64>> {
    let p = charpoly_ssh(chain.n, chain.t1, chain.t2, chain.z1, chain.zn, chain.t_left, chain.t_right)?;
    let scale = p.max_abs_coeff();
    if p.max_imag() > 1e-10 * scale {
        return Err(Error::Constraint("characteristic polynomial is not real".into()));
    }
    Ok(p.coeffs().iter().map(|c| c.re).collect())
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Sign variations of (1+y)^d p((lo + hi y)/(1+y)); bounds the root count in (lo, hi) from above
/// with equal parity, and is exact when 0 or 1.
fn descartes_bound(c: &[f64], lo: f64, hi: f64) -> usize {
    let d = c.len() - 1;
    let mut q = vec![0.0; d + 1];
    // powers of (lo + hi y) and (1 + y)
    let mut num = vec![vec![1.0]];
    let mut den = vec![vec![1.0]];
    for k in 1..=d {
        num.push(poly_mul(&num[k - 1], &[lo, hi]));
        den.push(poly_mul(&den[k - 1], &[1.0, 1.0]));
    }
    for (i, ci) in c.iter().enumerate() {
        for (k, v) in poly_mul(&num[i], &den[d - i]).iter().enumerate() {
            q[k] += ci * v;
        }
    }
    let top = q.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut last = 0.0;
    let mut changes = 0;
    for v in q {
        if v.abs() <= 1e-13 * top {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            changes += 1;
        }
        last = v.signum();
    }
    changes
}

/// Exact number of real roots in (lo, hi) by Descartes bisection; None if undecided.
pub fn count_real_roots(c: &[f64], lo: f64, hi: f64) -> Option<usize> {
    fn go(c: &[f64], lo: f64, hi: f64, depth: usize) -> Option<usize> {
        match descartes_bound(c, lo, hi) {
            0 => Some(0),
            1 => Some(1),
            _ if depth == 0 => None,
            _ => {
                let w = hi - lo;
                // keep the split point off a root
                let mid = [0.5, 0.4871, 0.5129, 0.4613]
                    .iter()
                    .map(|f| lo + f * w)
                    .find(|&m| horner(c, m).abs() > 0.0)?;
                let (a, b) = (go(c, lo, mid, depth - 1)?, go(c, mid, hi, depth - 1)?);
                Some(a + b)
            }
        }
    }
    if c.len() < 2 || !(lo < hi) {
        return Some(0);
    }
    go(c, lo, hi, 48)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Interval I(s1, s2) from the endpoint-sign table.
fn outer_interval(s1: i8, s2: i8, chain: &SshChain) -> (f64, f64) {
    let (n, t1, t2) = (chain.n, chain.t1, chain.t2);
    let k = n / 2;
    let m = |j| mu(j, n, t1, t2);
    match (s1, s2) {
        (1, 1) => (m(1), m(0)),
        (-1, 1) => (-m(0), -m(1)),
        (1, _) if t1 > t2 => (-m(k - 1), -m(k)),
        (1, _) => (m(k), m(k - 1)),
        (_, _) if t1 > t2 => (m(k), m(k - 1)),
        (_, _) => (-m(k - 1), -m(k)),
    }
}

/// Left-hand side of the outer-interval inequality for (±1, ±2).
pub fn outer_inequality(chain: &SshChain, s1: i8, s2: i8) -> f64 {
    let k = (chain.n / 2) as f64;
    let (t1, t2) = (chain.t1, chain.t2);
    let (delta, gamma) = (chain.z1.re, chain.z1.im);
    let tt = (chain.t_left * chain.t_right).re;
    let num = (delta - s1 as f64 * t2).powi(2) + gamma * gamma - tt;
    let den = t2 * t2 - delta * delta - gamma * gamma + tt;
    1.0 + k * (1.0 + s2 as f64 * t2 / t1) * num / den
}

/// Certified real-eigenvalue intervals for an even SSH chain with t_left = -t_right.
pub fn bracket_real_eigenvalues(chain: &SshChain) -> Result<Vec<IntervalCertificate>> {
    let n = chain.n;
    if n % 2 != 0 || n < 4 {
        return Err(Error::Constraint(format!("need even n >= 4, got {n}")));
    }
    let corner_scale = 1.0 + chain.t_left.norm() + chain.t_right.norm();
    if (chain.t_left + chain.t_right).norm() > 1e-12 * corner_scale {
        return Err(Error::Constraint("need t_left = -t_right".into()));
    }
    let excl = chain.z1 * chain.zn - chain.t_left * chain.t_right;
    let t2sq = chain.t2 * chain.t2;
    if (excl - t2sq).norm() <= 1e-12 * (1.0 + t2sq) {
        return Err(Error::Constraint(
            "t2^2 = z1 zn - tL tR: spectrum is known in closed form".into(),
        ));
    }
    let c = real_charpoly(chain)?;
    let k = n / 2;
    let mut candidates: Vec<(f64, f64, IntervalSource)> = Vec::new();
    for j in 1..k {
        let (a, b) = (mu(j + 1, n, chain.t1, chain.t2), mu(j, n, chain.t1, chain.t2));
        candidates.push((a, b, IntervalSource::Inner { j, negative: false }));
        candidates.push((-b, -a, IntervalSource::Inner { j, negative: true }));
    }
    for s1 in [1i8, -1] {
        for s2 in [1i8, -1] {
            if outer_inequality(chain, s1, s2) >= 0.0 {
                let (lo, hi) = outer_interval(s1, s2, chain);
                candidates.push((lo, hi, IntervalSource::Outer { s1, s2 }));
            }
        }
    }
    let mut out: Vec<IntervalCertificate> = Vec::new();
    for (lo, hi, src) in candidates {
        if !(lo < hi) {
            continue;
        }
        if let Some(cert) = out.iter_mut().find(|c| c.lo == lo && c.hi == hi) {
            cert.sources.push(src);
            continue;
        }
        let (sl, sh) = (sign(horner(&c, lo)), sign(horner(&c, hi)));
        if sl == 0 || sh == 0 || sl == sh {
            continue;
        }
        let (guaranteed_count, exact) = match count_real_roots(&c, lo, hi) {
            Some(cnt) if cnt % 2 == 1 => (cnt, true),
            _ => (1, false),
        };
        out.push(IntervalCertificate {
            lo,
            hi,
            guaranteed_count,
            exact,
            sign_lo: sl,
            sign_hi: sh,
            sources: vec![src],
        });
    }
    out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub pixels: usize,
    /// bounding box [re_min, re_max, im_min, im_max]
    pub bbox: [f64; 4],
    /// indices of ovals whose foci fall in this component
    pub foci_of: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CassiniUnion {
    pub ovals: Vec<CassiniOval>,
    pub components: Vec<Component>,
    /// grid window [re_min, re_max, im_min, im_max] and resolution
    pub window: [f64; 4],
    pub resolution: usize,
    #[serde(skip)]
    labels: Vec<Option<usize>>,
}

impl CassiniUnion {
    pub fn contains(&self, w: C64) -> bool {
        self.ovals.iter().any(|o| o.contains(w))
    }

    fn pixel(&self, w: C64) -> Option<(usize, usize)> {
        let [x0, x1, y0, y1] = self.window;
        let r = self.resolution;
        let fx = (w.re - x0) / (x1 - x0) * (r - 1) as f64;
        let fy = (w.im - y0) / (y1 - y0) * (r - 1) as f64;
        if !(0.0..=(r - 1) as f64).contains(&fx) || !(0.0..=(r - 1) as f64).contains(&fy) {
            return None;
        }
        Some((fy.round() as usize, fx.round() as usize))
    }

    /// Component index of the grid point nearest to w (None outside the sampled union).
    pub fn component_of(&self, w: C64) -> Option<usize> {
        let (i, j) = self.pixel(w)?;
        self.labels[i * self.resolution + j]
    }
}

pub const CASSINI_RESOLUTION: usize = 400;

/// Brauer ovals of an SSH end-defect chain with actual row radii: interior rows t1 + t2,
/// end rows t1 + |t_left| and t_{n-1} + |t_right|. These are the four stated ovals for even n.
pub fn cassini_ovals(chain: &SshChain) -> Result<Vec<CassiniOval>> {
    let n = chain.n;
    if n < 2 {
        return Err(Error::Dimension(format!("need n >= 2, got {n}")));
    }
    let last_bond = if n % 2 == 0 { chain.t1 } else { chain.t2 };
    if n == 2 {
        let r1 = chain.t1 + chain.t_left.norm();
        let r2 = chain.t1 + chain.t_right.norm();
        return Ok(vec![CassiniOval { w1: chain.z1, w2: chain.zn, b: r1 * r2 }]);
    }
    let inner = chain.t1 + chain.t2;
    let r1 = chain.t1 + chain.t_left.norm();
    let rn = last_bond + chain.t_right.norm();
    let zero = C64::new(0.0, 0.0);
    Ok(vec![
        CassiniOval { w1: zero, w2: zero, b: inner * inner },
        CassiniOval { w1: zero, w2: chain.zn, b: inner * rn },
        CassiniOval { w1: chain.z1, w2: zero, b: inner * r1 },
        CassiniOval { w1: chain.z1, w2: chain.zn, b: r1 * rn },
    ])
}

fn find(p: &mut [usize], i: usize) -> usize {
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

/// Ovals plus connected components of their union on a 400 x 400 grid (8-connected).
pub fn cassini_union(chain: &SshChain) -> Result<CassiniUnion> {
    cassini_union_with(chain, CASSINI_RESOLUTION)
}

pub fn cassini_union_with(chain: &SshChain, resolution: usize) -> Result<CassiniUnion> {
    let ovals = cassini_ovals(chain)?;
    let r = resolution.max(2);
    // every point of an oval lies within sqrt(b) of one of its foci
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for o in &ovals {
        let s = o.b.sqrt();
        for w in [o.w1, o.w2] {
            x0 = x0.min(w.re - s);
            x1 = x1.max(w.re + s);
            y0 = y0.min(w.im - s);
            y1 = y1.max(w.im + s);
        }
    }
    let pad = 1e-9 * (1.0 + (x1 - x0).max(y1 - y0));
    let window = [x0 - pad, x1 + pad, y0 - pad, y1 + pad];
    let at = |i: usize, j: usize| {
        C64::new(
            window[0] + (window[1] - window[0]) * j as f64 / (r - 1) as f64,
            window[2] + (window[3] - window[2]) * i as f64 / (r - 1) as f64,
        )
    };
    let inside: Vec<bool> = (0..r)
        .into_par_iter()
        .flat_map_iter(|i| (0..r).map(move |j| (i, j)).collect::<Vec<_>>())
        .map(|(i, j)| ovals.iter().any(|o| o.contains(at(i, j))))
        .collect();
    let mut parent: Vec<usize> = (0..r * r).collect();
    for i in 0..r {
        for j in 0..r {
            let a = i * r + j;
            if !inside[a] {
                continue;
            }
            let nbrs = [(0isize, 1isize), (1, -1), (1, 0), (1, 1)];
            for (di, dj) in nbrs {
                let (ii, jj) = (i as isize + di, j as isize + dj);
                if ii < 0 || jj < 0 || ii >= r as isize || jj >= r as isize {
                    continue;
                }
                let b = ii as usize * r + jj as usize;
                if inside[b] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut roots_seen: Vec<usize> = Vec::new();
    let mut labels = vec![None; r * r];
    let mut components: Vec<Component> = Vec::new();
    for i in 0..r {
        for j in 0..r {
            let a = i * r + j;
            if !inside[a] {
                continue;
            }
            let root = find(&mut parent, a);
            let idx = match roots_seen.iter().position(|&x| x == root) {
                Some(p) => p,
                None => {
                    roots_seen.push(root);
                    components.push(Component {
                        pixels: 0,
                        bbox: [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
                        foci_of: Vec::new(),
                    });
                    roots_seen.len() - 1
                }
            };
            labels[a] = Some(idx);
            let w = at(i, j);
            let c = &mut components[idx];
            c.pixels += 1;
            c.bbox = [c.bbox[0].min(w.re), c.bbox[1].max(w.re), c.bbox[2].min(w.im), c.bbox[3].max(w.im)];
        }
    }
    let mut union = CassiniUnion {
        ovals,
        components,
        window,
        resolution: r,
        labels,
    };
    for (k, o) in union.ovals.clone().iter().enumerate() {
        if let Some(c) = union.component_of(o.w1) {
            if !union.components[c].foci_of.contains(&k) {
                union.components[c].foci_of.push(k);
            }
        }
    }
    Ok(union)
}

/// Sufficient condition for at least two nonreal eigenvalues: the ovals around z1 and zn
/// separate from the rest. The undefined radius in the second inequality is read as t1.
/// False is inconclusive.
pub fn broken_phase_certificate(chain: &SshChain) -> bool {
    let (t1, t2) = (chain.t1, chain.t2);
    let a = chain.z1.norm();
    let gamma = chain.z1.im;
    let (tl, tr) = (chain.t_left.norm(), chain.t_right.norm());
    let first = (a * a - (t1 + t2).powi(2)) * gamma > a * (t1 + tl) * (t1 + tr);
    let disc = a * a - 4.0 * t1 * t1 - 4.0 * tl.min(tr).powi(2);
    first && disc >= 0.0 && 2.0 * (t1 + t2) < a + disc.sqrt()
}

/// Number of real roots of det(lambda - H) in (lo, hi) from the root finder, for cross-checks.
pub fn real_roots_in(chain: &SshChain, lo: f64, hi: f64, tol_real: f64) -> Result<usize> {
    let p = charpoly_ssh(chain.n, chain.t1, chain.t2, chain.z1, chain.zn, chain.t_left, chain.t_right)?;
    Ok(roots(&p)?
        .iter()
        .filter(|z| z.im.abs() <= tol_real * (1.0 + z.norm()) && z.re > lo && z.re < hi)
        .count())
}
