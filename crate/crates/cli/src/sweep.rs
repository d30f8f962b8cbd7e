use std::str::FromStr;

/// Inclusive range `a:b:steps` with `steps` points, or a single value `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + h * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let sweep = match parts.as_slice() {
            [a] => Sweep {
                lo: num(a)?,
                hi: num(a)?,
                steps: 1,
            },
            [a, b, k] => Sweep {
                lo: num(a)?,
                hi: num(b)?,
                steps: k.trim().parse().map_err(|e| format!("{k:?}: {e}"))?,
            },
            _ => return Err(format!("expected a:b:steps, got {s:?}")),
        };
        if sweep.steps == 0 {
            return Err("steps must be positive".into());
        }
        if !sweep.lo.is_finite() || !sweep.hi.is_finite() {
            return Err(format!("non-finite bound in {s:?}"));
        }
        if sweep.steps == 1 && sweep.lo != sweep.hi {
            return Err(format!("one step cannot span {} to {}", sweep.lo, sweep.hi));
        }
        Ok(sweep)
    }
}
