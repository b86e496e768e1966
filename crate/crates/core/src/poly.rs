//! Dense univariate polynomials with complex coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::C64;

/// Coefficients in ascending order: `c[0] + c[1] x + c[2] x^2 + …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<C64>);

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: C64) -> Self {
        Poly(vec![c])
    }

    /// `c0 + c1 x`.
    pub fn linear(c0: C64, c1: C64) -> Self {
        Poly(vec![c0, c1])
    }

    /// `∏ (x - r)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Poly::constant(C64::new(1.0, 0.0)), |acc, &r| {
            acc * Poly::linear(-r, C64::new(1.0, 0.0))
        })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.0
    }

    /// Coefficient of `x^k` (zero past the end).
    pub fn coeff(&self, k: usize) -> C64 {
        self.0.get(k).copied().unwrap_or_default()
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.norm() == 0.0)
    }

    /// Drops leading coefficients with `|c| <= rel * max|c|`.
    pub fn trimmed(&self, rel: f64) -> Self {
        let cut = rel * self.max_abs_coeff();
        let mut c = self.0.clone();
        while let Some(last) = c.last() {
            if last.norm() <= cut {
                c.pop();
            } else {
                break;
            }
        }
        Poly(c)
    }

    /// Degree after exact trimming; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| c.norm() != 0.0)
    }

    pub fn leading(&self) -> C64 {
        self.degree().map(|d| self.0[d]).unwrap_or_default()
    }

    pub fn scale(&self, s: C64) -> Self {
        Poly(self.0.iter().map(|&c| c * s).collect())
    }

    /// The polynomial `x ↦ p(s·x)`.
    pub fn substitute_scaled(&self, s: C64) -> Self {
        let mut pow = C64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.0.len());
        for &c in &self.0 {
            out.push(c * pow);
            pow *= s;
        }
        Poly(out)
    }

    /// Synthetic division by `x - r`: returns quotient and remainder.
    pub fn div_linear(&self, r: C64) -> (Poly, C64) {
        let n = match self.degree() {
            None => return (Poly::zero(), C64::new(0.0, 0.0)),
            Some(0) => return (Poly::zero(), self.0[0]),
            Some(n) => n,
        };
        let mut q = vec![C64::new(0.0, 0.0); n];
        let mut acc = self.0[n];
        for k in (0..n).rev() {
            q[k] = acc;
            acc = self.0[k] + acc * r;
        }
        (Poly(q), acc)
    }

    /// Quotient by `x - r` for a known root, dividing from whichever end keeps
    /// the recurrence contracting (`|r| ≤ 1` from the top, otherwise from the bottom).
    pub fn deflate(&self, r: C64) -> Poly {
        let n = match self.degree() {
            None | Some(0) => return Poly::zero(),
            Some(n) => n,
        };
        if r.norm() <= 1.0 {
            return self.div_linear(r).0;
        }
        let mut q = vec![C64::new(0.0, 0.0); n];
        // c_0 = -r q_0, c_k = q_{k-1} - r q_k
        q[0] = -self.0[0] / r;
        for k in 1..n {
            q[k] = (q[k - 1] - self.0[k]) / r;
        }
        Poly(q)
    }

    /// All complex roots (with multiplicity) by Aberth iteration, polished by Newton steps.
    pub fn roots(&self) -> Vec<C64> {
        let p = self.trimmed(0.0);
        let n = match p.degree() {
            None | Some(0) => return Vec::new(),
            Some(n) => n,
        };
        let lead = p.0[n];
        let monic: Vec<C64> = p.0.iter().map(|&c| c / lead).collect();
        let mp = Poly(monic);
        if n == 1 {
            return vec![-mp.0[0]];
        }
        let dp = mp.derivative();
        // Cauchy bound for the initial circle
        let radius = 1.0 + mp.0[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut z: Vec<C64> = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
                C64::from_polar(0.5 * radius, th)
            })
            .collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let pv = mp.eval(z[i]);
                if pv.norm() == 0.0 {
                    continue;
                }
                let ratio = pv / dp.eval(z[i]);
                let s: C64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| C64::new(1.0, 0.0) / (z[i] - z[j]))
                    .sum();
                let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
                if w.is_finite() {
                    z[i] -= w;
                    moved = moved.max(w.norm() / z[i].norm().max(1e-300));
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        for r in z.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = mp.eval(*r) / d;
                if !step.is_finite() {
                    break;
                }
                *r -= step;
            }
        }
        z
    }

    pub fn derivative(&self) -> Self {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * (k as f64))
                .collect(),
        )
    }

    /// Divides by the leading coefficient (after trimming with `rel`).
    pub fn monic(&self, rel: f64) -> Self {
        let t = self.trimmed(rel);
        let lead = t.leading();
        if lead.norm() == 0.0 {
            return t;
        }
        t.scale(C64::new(1.0, 0.0) / lead)
    }

    /// Largest coefficient gap to `other`, relative to the larger coefficient magnitude.
    pub fn max_rel_diff(&self, other: &Poly) -> f64 {
        let n = self.0.len().max(other.0.len());
        let scale = self.max_abs_coeff().max(other.max_abs_coeff()).max(1e-300);
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|&c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
