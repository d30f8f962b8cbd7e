//! Transpose-symmetric tridiagonal Hamiltonians with corner couplings.
//!
//! Site indices in the public API are 1-based.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PT_TOL: f64 = 1e-12;

/// Tridiagonal matrix with real bonds `t`, onsite potentials `z`,
/// and corners `t_left` at (1,n) and `t_right` at (n,1).
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub t: Vec<f64>,
    pub z: Vec<C64>,
    pub t_left: C64,
    pub t_right: C64,
}

impl HamiltonianSpec {
    pub fn new(t: Vec<f64>, z: Vec<C64>, t_left: C64, t_right: C64) -> Result<Self> {
        let spec = HamiltonianSpec {
            n: z.len(),
            t,
            z,
            t_left,
            t_right,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn open(t: Vec<f64>, z: Vec<C64>) -> Result<Self> {
        Self::new(t, z, C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Uniform open chain with zero potentials.
    pub fn uniform(n: usize, t: f64) -> Result<Self> {
        Self::open(vec![t; n.saturating_sub(1)], vec![C64::new(0.0, 0.0); n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Dimension(format!("need n >= 2, got {}", self.n)));
        }
        if self.z.len() != self.n {
            return Err(Error::Dimension(format!(
                "z has {} entries for n = {}",
                self.z.len(),
                self.n
            )));
        }
        if self.t.len() + 1 != self.n {
            return Err(Error::Dimension(format!(
                "t has {} entries for n = {}",
                self.t.len(),
                self.n
            )));
        }
        let finite = self.t.iter().all(|x| x.is_finite())
            && self.z.iter().all(|x| x.re.is_finite() && x.im.is_finite())
            && self.t_left.re.is_finite()
            && self.t_left.im.is_finite()
            && self.t_right.re.is_finite()
            && self.t_right.im.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("non-finite entry".into()));
        }
        Ok(())
    }

    /// Replace the potentials at sites m and n+1-m by delta ± i gamma.
    pub fn with_defect(mut self, defect: DefectConfig) -> Result<Self> {
        defect.check(self.n)?;
        let m = defect.m;
        self.z[m - 1] = C64::new(defect.delta, defect.gamma);
        self.z[self.n - m] = C64::new(defect.delta, -defect.gamma);
        Ok(self)
    }

    pub fn with_corners(mut self, t_left: C64, t_right: C64) -> Self {
        self.t_left = t_left;
        self.t_right = t_right;
        self
    }

    pub fn is_open(&self) -> bool {
        self.t_left == C64::new(0.0, 0.0) && self.t_right == C64::new(0.0, 0.0)
    }

    pub fn has_nonzero_bonds(&self) -> bool {
        self.t.iter().all(|&x| x != 0.0)
    }

    /// tL = conj(tR), the corner condition implied by PT symmetry.
    pub fn has_pt_corners(&self) -> bool {
        (self.t_left - self.t_right.conj()).norm() <= PT_TOL * (1.0 + self.t_left.norm())
    }

    /// tL = -tR, the corner condition of the interval bracketing theorem.
    pub fn has_antisymmetric_corners(&self) -> bool {
        (self.t_left + self.t_right).norm() <= PT_TOL * (1.0 + self.t_left.norm())
    }

    pub fn is_hermitian(&self) -> bool {
        let h = self.dense();
        let scale = 1.0 + max_abs(&h);
        (&h - h.adjoint()).iter().all(|x| x.norm() <= PT_TOL * scale)
    }

    /// Dense matrix. For n = 2 the corners coincide with the bond entries and are added to them.
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.n;
        let mut h = DMatrix::<C64>::zeros(n, n);
        for (k, z) in self.z.iter().enumerate() {
            h[(k, k)] = *z;
        }
        for (k, &t) in self.t.iter().enumerate() {
            h[(k, k + 1)] += C64::new(t, 0.0);
            h[(k + 1, k)] += C64::new(t, 0.0);
        }
        h[(0, n - 1)] += self.t_left;
        h[(n - 1, 0)] += self.t_right;
        h
    }

    /// Max-entry based scale used for relative tolerances.
    pub fn scale(&self) -> f64 {
        let t = self.t.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let z = self.z.iter().fold(0.0f64, |a, x| a.max(x.norm()));
        t.max(z).max(self.t_left.norm()).max(self.t_right.norm())
    }

    /// Frobenius norm of the dense matrix.
    pub fn norm(&self) -> f64 {
        self.dense().norm()
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

/// Gain-loss defect pair: z_m = delta + i gamma, z_{n+1-m} = delta - i gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectConfig {
    pub m: usize,
    pub delta: f64,
    pub gamma: f64,
}

impl DefectConfig {
    pub fn new(m: usize, delta: f64, gamma: f64) -> Self {
        DefectConfig { m, delta, gamma }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.m == 0 || self.m > n / 2 {
            return Err(Error::IndexOutOfRange(format!(
                "defect site m = {} outside 1..={}",
                self.m,
                n / 2
            )));
        }
        if self.gamma < 0.0 || !self.gamma.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite delta and gamma >= 0, got delta = {}, gamma = {}",
                self.delta, self.gamma
            )));
        }
        Ok(())
    }
}

/// Site reflection k -> n+1-k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parity {
    pub n: usize,
}

impl Parity {
    pub fn new(n: usize) -> Self {
        Parity { n }
    }

    pub fn mirror(&self, k: usize) -> usize {
        self.n + 1 - k
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        v.iter().rev().copied().collect()
    }

    /// Combined parity and complex conjugation.
    pub fn apply_pt(&self, v: &[C64]) -> Vec<C64> {
        v.iter().rev().map(|x| x.conj()).collect()
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i + j + 1 == n {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Centrohermitian test H[p,q] = conj(H[mirror p, mirror q]) on the dense matrix.
pub fn check_pt_symmetry(spec: &HamiltonianSpec) -> bool {
    let h = spec.dense();
    let n = spec.n;
    let tol = PT_TOL * (1.0 + max_abs(&h));
    for p in 0..n {
        for q in 0..n {
            if (h[(p, q)] - h[(n - 1 - p, n - 1 - q)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// The same condition stated on the fields: mirrored bonds, conjugate mirrored potentials, tL = conj(tR).
pub fn pt_constraints_hold(spec: &HamiltonianSpec) -> bool {
    let n = spec.n;
    let scale = 1.0 + spec.scale();
    let bonds = (0..n - 1).all(|k| (spec.t[k] - spec.t[n - 2 - k]).abs() <= PT_TOL * scale);
    let pots = (0..n).all(|k| (spec.z[k] - spec.z[n - 1 - k].conj()).norm() <= PT_TOL * scale);
    bonds && pots && spec.has_pt_corners()
}

/// Map a general open tridiagonal (sub-diagonal `t_lower`, super-diagonal `t_upper`)
/// to a transpose-symmetric one. Returns the spec and the diagonal of S with S^-1 H S = spec.
pub fn transpose_symmetrize(
    t_lower: &[f64],
    t_upper: &[f64],
    z: &[C64],
) -> Result<(HamiltonianSpec, Vec<f64>)> {
    if t_lower.len() != t_upper.len() || t_lower.len() + 1 != z.len() {
        return Err(Error::Dimension(format!(
            "{} lower, {} upper bonds for {} sites",
            t_lower.len(),
            t_upper.len(),
            z.len()
        )));
    }
    let mut t = Vec::with_capacity(t_lower.len());
    let mut s = vec![1.0];
    for (k, (&lo, &up)) in t_lower.iter().zip(t_upper).enumerate() {
        let prod = lo * up;
        if prod == 0.0 {
            return Err(Error::InvalidParameter(format!("zero product on bond {}", k + 1)));
        }
        if prod < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "negative product on bond {} needs an imaginary bond",
                k + 1
            )));
        }
        let tk = prod.sqrt();
        t.push(tk);
        let last = s[k];
        s.push(last * tk / up);
    }
    Ok((HamiltonianSpec::open(t, z.to_vec())?, s))
}

/// Alternating bonds: bond i (1-based) is t1 for odd i, t2 for even i.
pub fn ssh_bonds(n: usize, t1: f64, t2: f64) -> Vec<f64> {
    (1..n).map(|i| if i % 2 == 1 { t1 } else { t2 }).collect()
}

/// SSH chain with end potentials and corner couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshChain {
    pub n: usize,
    pub t1: f64,
    pub t2: f64,
    pub z1: C64,
    pub zn: C64,
    pub t_left: C64,
    pub t_right: C64,
}

impl SshChain {
    pub fn open(n: usize, t1: f64, t2: f64, z1: C64, zn: C64) -> Self {
        SshChain {
            n,
            t1,
            t2,
            z1,
            zn,
            t_left: C64::new(0.0, 0.0),
            t_right: C64::new(0.0, 0.0),
        }
    }

    /// PT end defects z1 = delta + i gamma, zn = conj(z1).
    pub fn with_end_defects(n: usize, t1: f64, t2: f64, delta: f64, gamma: f64) -> Self {
        let z = C64::new(delta, gamma);
        Self::open(n, t1, t2, z, z.conj())
    }

    pub fn with_corners(mut self, t_left: C64, t_right: C64) -> Self {
        self.t_left = t_left;
        self.t_right = t_right;
        self
    }

    pub fn to_spec(&self) -> Result<HamiltonianSpec> {
        let mut z = vec![C64::new(0.0, 0.0); self.n];
        z[0] = self.z1;
        z[self.n - 1] = self.zn;
        HamiltonianSpec::new(ssh_bonds(self.n, self.t1, self.t2), z, self.t_left, self.t_right)
    }

    /// Recognize an SSH end-defect chain: alternating bonds and zero interior potentials.
    pub fn from_spec(spec: &HamiltonianSpec) -> Option<Self> {
        let n = spec.n;
        let t1 = spec.t[0];
        let t2 = if n > 2 { spec.t[1] } else { t1 };
        if spec.t != ssh_bonds(n, t1, t2) {
            return None;
        }
        if spec.z[1..n - 1].iter().any(|z| *z != C64::new(0.0, 0.0)) {
            return None;
        }
        Some(SshChain {
            n,
            t1,
            t2,
            z1: spec.z[0],
            zn: spec.z[n - 1],
            t_left: spec.t_left,
            t_right: spec.t_right,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct FullSpecJson {
    n: usize,
    t: Vec<f64>,
    z: Vec<[f64; 2]>,
    #[serde(rename = "tL", default)]
    t_left: [f64; 2],
    #[serde(rename = "tR", default)]
    t_right: [f64; 2],
}

#[derive(Deserialize)]
struct ShortSpecJson {
    n: usize,
    t1: f64,
    t2: Option<f64>,
    defect: Option<DefectConfig>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpecJson {
    Full(FullSpecJson),
    Short(ShortSpecJson),
}

/// Parse either the full form `{"n","t","z","tL","tR"}` or the shorthand `{"n","t1","t2","defect"}`.
pub fn spec_from_json(text: &str) -> Result<HamiltonianSpec> {
    let parsed: SpecJson = serde_json::from_str(text)?;
    match parsed {
        SpecJson::Full(f) => {
            let spec = HamiltonianSpec {
                n: f.n,
                t: f.t,
                z: f.z.iter().map(|p| C64::new(p[0], p[1])).collect(),
                t_left: C64::new(f.t_left[0], f.t_left[1]),
                t_right: C64::new(f.t_right[0], f.t_right[1]),
            };
            spec.validate()?;
            Ok(spec)
        }
        SpecJson::Short(s) => {
            if s.n < 2 {
                return Err(Error::Dimension(format!("need n >= 2, got {}", s.n)));
            }
            let t2 = s.t2.unwrap_or(s.t1);
            let spec = HamiltonianSpec::open(
                ssh_bonds(s.n, s.t1, t2),
                vec![C64::new(0.0, 0.0); s.n],
            )?;
            match s.defect {
                Some(d) => spec.with_defect(d),
                None => Ok(spec),
            }
        }
    }
}

pub fn spec_to_json(spec: &HamiltonianSpec) -> String {
    let f = FullSpecJson {
        n: spec.n,
        t: spec.t.clone(),
        z: spec.z.iter().map(|z| [z.re, z.im]).collect(),
        t_left: [spec.t_left.re, spec.t_left.im],
        t_right: [spec.t_right.re, spec.t_right.im],
    };
    serde_json::to_string(&f).expect("plain data serializes")
}
