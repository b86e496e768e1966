//! Jackson integrals over the lattice `ξ q^ℤ`, the kernels `P_λ`, `P̃_λ`, the
//! weights `y`, `ỹ`, and the bilateral formal solution `ŷ₁`.

use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::qseries::{check_q, cpow, qpoch_ratio};
use crate::truncation::{BilateralTruncation, TailCounter, Truncation};
use crate::C64;

/// Parameters `(q, λ, α₁, α₂, β₁, β₂)` of the first-order weight equation.
///
/// `mu_prime` is derived as `Log(β₁β₂/(α₁α₂)) / Log q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub q: C64,
    pub lambda: C64,
    pub alpha1: C64,
    pub alpha2: C64,
    pub beta1: C64,
    pub beta2: C64,
    pub mu_prime: C64,
}

impl QParams {
    pub fn new(q: C64, lambda: C64, alpha1: C64, alpha2: C64, beta1: C64, beta2: C64) -> Result<Self> {
        check_q(q)?;
        for (name, v) in [
            ("alpha1", alpha1),
            ("alpha2", alpha2),
            ("beta1", beta1),
            ("beta2", beta2),
        ] {
            if v.norm() == 0.0 || !v.is_finite() {
                return Err(QError::InvalidParameters(format!("{name} must be nonzero and finite")));
            }
        }
        if !lambda.is_finite() {
            return Err(QError::InvalidParameters("lambda must be finite".into()));
        }
        if (alpha1 - alpha2).norm() <= 1e-14 * alpha1.norm().max(alpha2.norm()) {
            return Err(QError::InvalidParameters(
                "alpha1 = alpha2 makes B1, B2 singular".into(),
            ));
        }
        if (beta1 - beta2).norm() <= 1e-14 * beta1.norm().max(beta2.norm()) {
            return Err(QError::InvalidParameters("beta1 = beta2 is degenerate".into()));
        }
        let mu_prime = (beta1 * beta2 / (alpha1 * alpha2)).ln() / q.ln();
        Ok(Self {
            q,
            lambda,
            alpha1,
            alpha2,
            beta1,
            beta2,
            mu_prime,
        })
    }

    /// Real-valued convenience constructor.
    pub fn real(q: f64, lambda: f64, a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        Self::new(q.into(), lambda.into(), a1.into(), a2.into(), b1.into(), b2.into())
    }

    /// `q^λ` on the principal branch.
    pub fn q_lambda(&self) -> C64 {
        cpow(self.q, self.lambda).expect("q is nonzero")
    }

    /// `q^e` on the principal branch.
    pub fn qpow(&self, e: C64) -> C64 {
        cpow(self.q, e).expect("q is nonzero")
    }

    /// The series argument `q^λ α₁α₂/(β₁β₂)`.
    pub fn z_arg(&self) -> C64 {
        self.q_lambda() * self.alpha1 * self.alpha2 / (self.beta1 * self.beta2)
    }

    /// Same parameters with `β₁ ↔ β₂`.
    pub fn swapped(&self) -> Self {
        Self {
            beta1: self.beta2,
            beta2: self.beta1,
            ..*self
        }
    }

    /// `|q^{μ′} α₁α₂/(β₁β₂) - 1|`.
    pub fn constraint_residual(&self) -> f64 {
        (self.qpow(self.mu_prime) * self.alpha1 * self.alpha2 / (self.beta1 * self.beta2) - 1.0).norm()
    }

    /// `(B_∞, B₁, B₂)` with poles `b₁ = 1/α₁`, `b₂ = 1/α₂`.
    pub fn b_coeffs(&self) -> (C64, C64, C64) {
        let (a1, a2, b1, b2) = (self.alpha1, self.alpha2, self.beta1, self.beta2);
        let b_inf = b1 * b2 / (a1 * a2);
        let bb1 = (a1 - b1) * (a1 - b2) / (a1 * (a1 - a2));
        let bb2 = (a2 - b1) * (a2 - b2) / (a2 * (a2 - a1));
        (b_inf, bb1, bb2)
    }

    /// `B(s) = B_∞ + B₁/(1 - α₁ s) + B₂/(1 - α₂ s)`.
    pub fn b_of(&self, s: C64) -> C64 {
        let (bi, b1, b2) = self.b_coeffs();
        bi + b1 / (1.0 - self.alpha1 * s) + b2 / (1.0 - self.alpha2 * s)
    }
}

/// `P_λ(x, s) = (q^{λ+1} s/x; q)_∞ / (q s/x; q)_∞`.
pub fn p_lambda(x: C64, s: C64, p: &QParams, t: &Truncation) -> Result<C64> {
    if x.norm() == 0.0 {
        return Err(QError::ZeroBase);
    }
    let u = s / x;
    qpoch_ratio(&[p.q * p.q_lambda() * u], &[p.q * u], p.q, t)
}

/// `P̃_λ(x, s) = (x/s)^λ (x/s; q)_∞ / (q^{-λ} x/s; q)_∞`.
pub fn p_tilde_lambda(x: C64, s: C64, p: &QParams, t: &Truncation) -> Result<C64> {
    if s.norm() == 0.0 || x.norm() == 0.0 {
        return Err(QError::ZeroBase);
    }
    let u = x / s;
    let ratio = qpoch_ratio(&[u], &[u / p.q_lambda()], p.q, t)?;
    if ratio.norm() == 0.0 {
        return Ok(ratio);
    }
    Ok(cpow(u, p.lambda)? * ratio)
}

/// `y(s) = (α₁s, α₂s; q)_∞ / (β₁s, β₂s; q)_∞`.
pub fn weight_y(s: C64, p: &QParams, t: &Truncation) -> Result<C64> {
    qpoch_ratio(&[p.alpha1 * s, p.alpha2 * s], &[p.beta1 * s, p.beta2 * s], p.q, t)
}

/// `ỹ(s) = s^{μ′} (q/(β₁s), q/(β₂s); q)_∞ / (q/(α₁s), q/(α₂s); q)_∞`.
pub fn weight_y_tilde(s: C64, p: &QParams, t: &Truncation) -> Result<C64> {
    if s.norm() == 0.0 {
        return Err(QError::ZeroBase);
    }
    let q = p.q;
    let ratio = qpoch_ratio(
        &[q / (p.beta1 * s), q / (p.beta2 * s)],
        &[q / (p.alpha1 * s), q / (p.alpha2 * s)],
        q,
        t,
    )?;
    if ratio.norm() == 0.0 {
        return Ok(ratio);
    }
    Ok(cpow(s, p.mu_prime)? * ratio)
}

/// `y(s)/(s - b_i)` with `b₀ = 0`, `b₁ = 1/α₁`, `b₂ = 1/α₂`, in a form that
/// stays finite at `s = b_i`.
pub fn weight_over_pole(s: C64, i: usize, p: &QParams, t: &Truncation) -> Result<C64> {
    let q = p.q;
    let (a1, a2, b1, b2) = (p.alpha1, p.alpha2, p.beta1, p.beta2);
    match i {
        0 => {
            if s.norm() == 0.0 {
                return Err(QError::PoleInDenominator("y(s)/s at s = 0".into()));
            }
            Ok(weight_y(s, p, t)? / s)
        }
        1 => Ok(-a1 * qpoch_ratio(&[q * a1 * s, a2 * s], &[b1 * s, b2 * s], q, t)?),
        2 => Ok(-a2 * qpoch_ratio(&[a1 * s, q * a2 * s], &[b1 * s, b2 * s], q, t)?),
        _ => Err(QError::InvalidParameters(format!("pole index {i} out of range"))),
    }
}

/// Jackson integral `∫_0^{ξ∞} f(s) d_q s = (1-q) Σ_{n∈ℤ} q^n ξ f(q^n ξ)`.
///
/// Each direction is extended until `tail_window` consecutive terms fall below
/// `rel_tol` relative to the running sum.
pub fn jackson_integral<F>(f: F, xi: C64, q: C64, bt: &BilateralTruncation) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    check_q(q)?;
    if xi.norm() == 0.0 {
        return Err(QError::ZeroArgument("Jackson integral needs xi != 0".into()));
    }
    let tol = bt.base.rel_tol;
    let mut sum = C64::new(0.0, 0.0);

    let mut tail = TailCounter::new(bt.base.tail_window);
    let mut s = xi;
    let mut done = false;
    for _ in 0..bt.max_pos {
        let term = s * f(s)?;
        sum += term;
        if !sum.is_finite() {
            return Err(QError::TruncationFailure("Jackson sum overflowed (n -> +inf)".into()));
        }
        if tail.push(term.norm() <= tol * sum.norm()) {
            done = true;
            break;
        }
        s *= q;
    }
    if !done {
        return Err(QError::TruncationFailure(format!(
            "Jackson sum does not decay as n -> +inf within {} terms",
            bt.max_pos
        )));
    }

    let mut tail = TailCounter::new(bt.base.tail_window);
    let mut s = xi / q;
    done = false;
    for _ in 0..bt.max_neg {
        let term = s * f(s)?;
        sum += term;
        if !sum.is_finite() {
            return Err(QError::TruncationFailure("Jackson sum overflowed (n -> -inf)".into()));
        }
        if tail.push(term.norm() <= tol * sum.norm()) {
            done = true;
            break;
        }
        s /= q;
    }
    if !done {
        return Err(QError::TruncationFailure(format!(
            "Jackson sum does not decay as n -> -inf within {} terms",
            bt.max_neg
        )));
    }
    Ok((1.0 - q) * sum)
}

/// The bilateral sum
/// `ŷ₁(x) = (q-1) α₁ Σ_n q^n ξ (q^{λ+n+1}ξ/x, q^{n+1}ξα₁, q^nξα₂; q)_∞ / (q^{n+1}ξ/x, q^nξβ₁, q^nξβ₂; q)_∞`.
///
/// A [`QError::TruncationFailure`] means the sum is only formal at this `(x, ξ)`.
pub fn yhat1_bilateral(x: C64, xi: C64, p: &QParams, bt: &BilateralTruncation) -> Result<C64> {
    if x.norm() == 0.0 {
        return Err(QError::ZeroArgument("yhat1 needs x != 0".into()));
    }
    let t = bt.base;
    let f = |s: C64| -> Result<C64> {
        let pl = p_lambda(x, s, p, &t)?;
        if pl.norm() == 0.0 {
            return Ok(pl);
        }
        Ok(pl * weight_over_pole(s, 1, p, &t)?)
    };
    jackson_integral(f, xi, p.q, bt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;

    fn params() -> QParams {
        QParams::real(0.5, 0.3, 0.7, 1.9, 2.3, 3.1).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(QParams::real(1.2, 0.3, 0.7, 1.9, 2.3, 3.1).is_err());
        assert!(QParams::real(0.5, 0.3, 0.0, 1.9, 2.3, 3.1).is_err());
        assert!(QParams::real(0.5, 0.3, 0.7, 0.7, 2.3, 3.1).is_err());
        assert!(QParams::real(0.5, 0.3, 0.7, 1.9, 2.3, 2.3).is_err());
        assert!(params().constraint_residual() < 1e-12);
    }

    #[test]
    fn kernel_trivial_values() {
        let t = Truncation::default();
        let p = params();
        let x = re(1.7);
        assert_eq!(p_lambda(x, re(0.0), &p, &t).unwrap(), re(1.0));
        let p0 = QParams { lambda: re(0.0), ..p };
        assert!(close(p_lambda(x, re(0.4), &p0, &t).unwrap(), re(1.0), 1e-15));
        assert!(close(p_tilde_lambda(x, re(0.4), &p0, &t).unwrap(), re(1.0), 1e-15));
        assert_eq!(p_tilde_lambda(x, x, &p, &t).unwrap(), re(0.0));
    }

    #[test]
    fn kernel_functional_equation() {
        let t = Truncation::default();
        let p = params();
        let ql = p.q_lambda();
        for (x, s) in [(re(1.3), re(0.45)), (C64::new(0.8, 0.3), C64::new(0.2, -0.1))] {
            let lhs = p_lambda(p.q * x, s, &p, &t).unwrap() * (x - s);
            let rhs = (x - ql * s) * p_lambda(x, s, &p, &t).unwrap();
            assert!(close(lhs, rhs, 1e-12));
            let lhs = p_tilde_lambda(p.q * x, s, &p, &t).unwrap() * (x - s);
            let rhs = (x - ql * s) * p_tilde_lambda(x, s, &p, &t).unwrap();
            assert!(close(lhs, rhs, 1e-12));
        }
    }

    #[test]
    fn weights_solve_first_order_equation() {
        let t = Truncation::default();
        let p = params();
        assert_eq!(weight_y(re(0.0), &p, &t).unwrap(), re(1.0));
        assert_eq!(weight_y(1.0 / p.alpha1, &p, &t).unwrap(), re(0.0));
        assert_eq!(weight_y_tilde(p.q / p.beta1, &p, &t).unwrap(), re(0.0));
        for s in [re(0.21), re(1.37), C64::new(0.4, 0.6)] {
            let b = p.b_of(s);
            let y0 = weight_y(s, &p, &t).unwrap();
            assert!(close(weight_y(p.q * s, &p, &t).unwrap(), b * y0, 1e-12));
            let w0 = weight_y_tilde(s, &p, &t).unwrap();
            assert!(close(weight_y_tilde(p.q * s, &p, &t).unwrap(), b * w0, 1e-12));
        }
        let s = re(0.77);
        let r0 = weight_y_tilde(s, &p, &t).unwrap() / weight_y(s, &p, &t).unwrap();
        let r1 = weight_y_tilde(p.q * s, &p, &t).unwrap() / weight_y(p.q * s, &p, &t).unwrap();
        assert!(close(r0, r1, 1e-12));
    }

    #[test]
    fn cancelled_pole_forms_agree_off_the_pole() {
        let t = Truncation::default();
        let p = params();
        let s = re(0.33);
        let y = weight_y(s, &p, &t).unwrap();
        assert!(close(weight_over_pole(s, 0, &p, &t).unwrap(), y / s, 1e-13));
        assert!(close(
            weight_over_pole(s, 1, &p, &t).unwrap(),
            y / (s - 1.0 / p.alpha1),
            1e-13
        ));
        assert!(close(
            weight_over_pole(s, 2, &p, &t).unwrap(),
            y / (s - 1.0 / p.alpha2),
            1e-13
        ));
    }

    #[test]
    fn jackson_trivial_integrands() {
        let bt = BilateralTruncation::default();
        let q = re(0.5);
        let xi = re(1.3);
        assert_eq!(jackson_integral(|_| Ok(re(0.0)), xi, q, &bt).unwrap(), re(0.0));
        // indicator of the single lattice point q^2 ξ
        let target = xi * q * q;
        let v = jackson_integral(
            |s| Ok(if (s - target).norm() < 1e-12 { s } else { re(0.0) }),
            xi,
            q,
            &bt,
        )
        .unwrap();
        assert!(close(v, (1.0 - q) * target * target, 1e-14));
    }

    #[test]
    fn jackson_rescaling_and_linearity() {
        let bt = BilateralTruncation::default();
        let q = re(0.6);
        let f = |s: C64| Ok((-(s * s)).exp());
        let g = |s: C64| Ok(s / (1.0 + s * s * s * s));
        let xi = re(0.9);
        let a = jackson_integral(f, xi, q, &bt).unwrap();
        let b = jackson_integral(f, q * xi, q, &bt).unwrap();
        assert!(close(a, b, 1e-13));
        let fg = jackson_integral(|s| Ok(f(s)? + 2.0 * g(s)?), xi, q, &bt).unwrap();
        let sep = a + 2.0 * jackson_integral(g, xi, q, &bt).unwrap();
        assert!(close(fg, sep, 1e-13));
        // f ≡ 1 diverges as n -> -inf
        assert!(matches!(
            jackson_integral(|_| Ok(re(1.0)), xi, q, &bt),
            Err(QError::TruncationFailure(_))
        ));
    }
}
