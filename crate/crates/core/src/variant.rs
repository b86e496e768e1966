//! The variant q-hypergeometric equation of degree 2, its specialization for
//! `ŷ₁`, the nonhomogeneous version, and the parameter maps between the
//! three normal forms in use.

use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::jackson::QParams;
use crate::poly::Poly;
use crate::qseries::{check_q, cpow};
use crate::C64;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Parameters `(q; h₁, h₂, l₁, l₂, k₁, k₂; t₁, t₂)` with derived `p` and `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantParams {
    pub q: C64,
    pub h1: C64,
    pub h2: C64,
    pub l1: C64,
    pub l2: C64,
    pub k1: C64,
    pub k2: C64,
    pub t1: C64,
    pub t2: C64,
    /// `q^{(h₁+h₂+l₁+l₂+k₁+k₂)/2}`
    pub p: C64,
    /// `-p{(q^{-h₂}+q^{-l₂})t₁ + (q^{-h₁}+q^{-l₁})t₂}`
    pub e: C64,
}

impl VariantParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(q: C64, h1: C64, h2: C64, l1: C64, l2: C64, k1: C64, k2: C64, t1: C64, t2: C64) -> Result<Self> {
        check_q(q)?;
        for (name, v) in [("t1", t1), ("t2", t2)] {
            if v.norm() == 0.0 || !v.is_finite() {
                return Err(QError::InvalidParameters(format!("{name} must be nonzero and finite")));
            }
        }
        if ![h1, h2, l1, l2, k1, k2].iter().all(|v| v.is_finite()) {
            return Err(QError::InvalidParameters("exponents must be finite".into()));
        }
        let qp = |e: C64| cpow(q, e).expect("q is nonzero");
        let p = qp((h1 + h2 + l1 + l2 + k1 + k2) / 2.0);
        let e = -p * ((qp(-h2) + qp(-l2)) * t1 + (qp(-h1) + qp(-l1)) * t2);
        Ok(Self {
            q,
            h1,
            h2,
            l1,
            l2,
            k1,
            k2,
            t1,
            t2,
            p,
            e,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn real(q: f64, h1: f64, h2: f64, l1: f64, l2: f64, k1: f64, k2: f64, t1: f64, t2: f64) -> Result<Self> {
        let c = |v: f64| C64::new(v, 0.0);
        Self::new(c(q), c(h1), c(h2), c(l1), c(l2), c(k1), c(k2), c(t1), c(t2))
    }

    pub fn qpow(&self, e: C64) -> C64 {
        cpow(self.q, e).expect("q is nonzero")
    }

    /// `λ₀ = (h₁+h₂-l₁-l₂-k₁-k₂+1)/2`.
    pub fn lambda0(&self) -> C64 {
        (self.h1 + self.h2 - self.l1 - self.l2 - self.k1 - self.k2 + 1.0) / 2.0
    }

    /// Same parameters with the index pairs `(h₁,l₁,t₁) ↔ (h₂,l₂,t₂)` exchanged.
    pub fn swapped_indices(&self) -> Self {
        Self::new(
            self.q, self.h2, self.h1, self.l2, self.l1, self.k1, self.k2, self.t2, self.t1,
        )
        .expect("already validated")
    }
}

/// `down(x)·g(x/q) + up(x)·g(qx) + mid(x)·g(x) = nonhom(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarQDiffEq {
    pub coeff_down: Poly,
    pub coeff_up: Poly,
    pub coeff_mid: Poly,
    pub nonhom: Poly,
}

/// Left-hand side minus right-hand side at a point, with the largest term magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub lhs: C64,
    pub scale: f64,
}

impl Residual {
    /// `|lhs| / (1 + scale)`.
    pub fn normalized(&self) -> f64 {
        self.lhs.norm() / (1.0 + self.scale)
    }

    /// `|lhs| / scale`, falling back to `|lhs|` when every term vanishes.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.lhs.norm() / self.scale
        } else {
            self.lhs.norm()
        }
    }
}

impl ScalarQDiffEq {
    /// The variant equation in `g`.
    pub fn variant(vp: &VariantParams) -> Self {
        let q = vp.q;
        let (t1, t2) = (vp.t1, vp.t2);
        let half = C64::new(0.5, 0.0);
        let coeff_down = Poly::from_roots(&[vp.qpow(vp.h1 + half) * t1, vp.qpow(vp.h2 + half) * t2]);
        let coeff_up =
            Poly::from_roots(&[vp.qpow(vp.l1 - half) * t1, vp.qpow(vp.l2 - half) * t2]).scale(vp.qpow(vp.k1 + vp.k2));
        let c2 = vp.qpow(vp.k1) + vp.qpow(vp.k2);
        let c0 = vp.p * (q.sqrt() + 1.0 / q.sqrt()) * t1 * t2;
        let coeff_mid = Poly::new(vec![-c0, -vp.e, -c2]);
        Self {
            coeff_down,
            coeff_up,
            coeff_mid,
            nonhom: Poly::zero(),
        }
    }

    /// The equation for `ŷ₁`; with `nonhomogeneous` the right-hand side is
    /// `q(1-q)(1-q^λ)(α₁/(β₁β₂))·x`.
    pub fn special(p: &QParams, nonhomogeneous: bool) -> Self {
        let q = p.q;
        let ql = p.q_lambda();
        let (a1, a2, b1, b2) = (p.alpha1, p.alpha2, p.beta1, p.beta2);
        let r = a1 * a2 / (b1 * b2);
        let coeff_down = Poly::from_roots(&[q * ql / b1, q * ql / b2]);
        let coeff_up = Poly::from_roots(&[1.0 / a1, q / a2]).scale(r);
        let c1 = q * (1.0 / b1 + 1.0 / b2) + ql * (q * a1 + a2) / (b1 * b2);
        let c0 = q * ql * (1.0 + q) / (b1 * b2);
        let coeff_mid = Poly::new(vec![-c0, c1, -(r + 1.0)]);
        let nonhom = if nonhomogeneous {
            Poly::new(vec![C64::new(0.0, 0.0), q * (1.0 - q) * (1.0 - ql) * a1 / (b1 * b2)])
        } else {
            Poly::zero()
        };
        Self {
            coeff_down,
            coeff_up,
            coeff_mid,
            nonhom,
        }
    }

    /// The normal form `ℰ₂ f = 0` in the `(A, B, a_i, b_i, α)` parametrization.
    pub fn fn_e2(fp: &FNParams) -> Self {
        let (a, b) = (fp.a, fp.b);
        let qa = fp.q_alpha();
        let coeff_down = Poly::from_roots(&[fp.a1 / b, fp.a2 / b]);
        let coeff_up = Poly::from_roots(&[fp.b1 / a, fp.b2 / a]).scale(qa * a / b);
        let c2 = a / b + qa;
        let c1 = (fp.a1 + fp.a2) / b + qa * (fp.b1 + fp.b2) / b;
        let c0 = fp.a1 * fp.a2 * (1.0 + fp.q) / (fp.q * b * b);
        let coeff_mid = Poly::new(vec![-c0, c1, -c2]);
        Self {
            coeff_down,
            coeff_up,
            coeff_mid,
            nonhom: Poly::zero(),
        }
    }

    /// The homogeneous equation satisfied by `x^e·g(x)` when `g` solves `self`.
    pub fn gauge(&self, q: C64, e: C64) -> Result<Self> {
        let qe = cpow(q, e)?;
        Ok(Self {
            coeff_down: self.coeff_down.scale(qe),
            coeff_up: self.coeff_up.scale(one() / qe),
            coeff_mid: self.coeff_mid.clone(),
            nonhom: Poly::zero(),
        })
    }

    /// Rescaled so the `g(x/q)` coefficient is monic.
    pub fn normalized(&self) -> Self {
        let lead = self.coeff_down.leading();
        if lead.norm() == 0.0 {
            return self.clone();
        }
        let s = one() / lead;
        Self {
            coeff_down: self.coeff_down.scale(s),
            coeff_up: self.coeff_up.scale(s),
            coeff_mid: self.coeff_mid.scale(s),
            nonhom: self.nonhom.scale(s),
        }
    }

    /// Largest relative coefficient gap after normalizing both equations.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        let (a, b) = (self.normalized(), other.normalized());
        let scale = [&a.coeff_down, &a.coeff_up, &a.coeff_mid, &a.nonhom]
            .iter()
            .chain([&b.coeff_down, &b.coeff_up, &b.coeff_mid, &b.nonhom].iter())
            .map(|p| p.max_abs_coeff())
            .fold(0.0, f64::max)
            .max(1e-300);
        let pairs = [
            (&a.coeff_down, &b.coeff_down),
            (&a.coeff_up, &b.coeff_up),
            (&a.coeff_mid, &b.coeff_mid),
            (&a.nonhom, &b.nonhom),
        ];
        pairs
            .iter()
            .map(|(x, y)| {
                let n = x.coeffs().len().max(y.coeffs().len());
                (0..n).map(|k| (x.coeff(k) - y.coeff(k)).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
            / scale
    }

    pub fn is_trivial(&self) -> bool {
        self.coeff_down.is_zero() && self.coeff_up.is_zero() && self.coeff_mid.is_zero()
    }

    /// Evaluates `down·g(x/q) + up·g(qx) + mid·g(x) - nonhom` at `x`.
    pub fn apply<G>(&self, g: G, x: C64, q: C64) -> Result<Residual>
    where
        G: Fn(C64) -> Result<C64>,
    {
        let t_down = self.coeff_down.eval(x) * g(x / q)?;
        let t_up = self.coeff_up.eval(x) * g(q * x)?;
        let t_mid = self.coeff_mid.eval(x) * g(x)?;
        let t_rhs = self.nonhom.eval(x);
        let scale = [t_down, t_up, t_mid, t_rhs]
            .iter()
            .map(|t| t.norm())
            .fold(0.0, f64::max);
        Ok(Residual {
            lhs: t_down + t_up + t_mid - t_rhs,
            scale,
        })
    }
}

/// Residual of the variant equation for `g` at `x`.
pub fn residual_variant<G>(g: G, x: C64, vp: &VariantParams) -> Result<Residual>
where
    G: Fn(C64) -> Result<C64>,
{
    ScalarQDiffEq::variant(vp).apply(g, x, vp.q)
}

/// Residual of the `ŷ₁` equation (optionally with its inhomogeneous term) at `x`.
pub fn residual_special<G>(yhat: G, x: C64, p: &QParams, nonhomogeneous: bool) -> Result<Residual>
where
    G: Fn(C64) -> Result<C64>,
{
    ScalarQDiffEq::special(p, nonhomogeneous).apply(yhat, x, p.q)
}

/// Residual of `ℰ₂ f = 0` at `x`.
pub fn residual_e2<G>(f: G, x: C64, fp: &FNParams) -> Result<Residual>
where
    G: Fn(C64) -> Result<C64>,
{
    ScalarQDiffEq::fn_e2(fp).apply(f, x, fp.q)
}

/// The `(α, β, λ)` parameters under which `g(x) = x^{-k₂} ŷ₁(x)` solves the variant equation.
///
/// `λ = (h₁+h₂-l₁-l₂-k₁+k₂+1)/2`, `α₁ = q^{-l₁+1/2}/t₁`, `α₂ = q^{-l₂+3/2}/t₂`,
/// `β_i = q^{λ-h_i+1/2}/t_i`, and `μ′ = k₂ - k₁` exactly.
pub fn qparams_from_variant(vp: &VariantParams) -> Result<QParams> {
    let half = C64::new(0.5, 0.0);
    let lambda = (vp.h1 + vp.h2 - vp.l1 - vp.l2 - vp.k1 + vp.k2 + 1.0) / 2.0;
    let a1 = vp.qpow(half - vp.l1) / vp.t1;
    let a2 = vp.qpow(C64::new(1.5, 0.0) - vp.l2) / vp.t2;
    let b1 = vp.qpow(lambda - vp.h1 + half) / vp.t1;
    let b2 = vp.qpow(lambda - vp.h2 + half) / vp.t2;
    let mut p = QParams::new(vp.q, lambda, a1, a2, b1, b2)?;
    p.mu_prime = vp.k2 - vp.k1;
    Ok(p)
}

/// Parameters `(A, B, a₁, a₂, b₁, b₂, α)` of the normal form `ℰ₂`, together with `q` and `λ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FNParams {
    pub q: C64,
    pub a: C64,
    pub b: C64,
    pub a1: C64,
    pub a2: C64,
    pub b1: C64,
    pub b2: C64,
    pub alpha_exp: C64,
    pub lambda0: C64,
}

impl FNParams {
    pub fn q_alpha(&self) -> C64 {
        cpow(self.q, self.alpha_exp).expect("q is nonzero")
    }

    /// `|A a₁a₂ - q^{α+1} B b₁b₂|` relative to the larger side.
    pub fn invariant_residual(&self) -> f64 {
        let lhs = self.a * self.a1 * self.a2;
        let rhs = self.q_alpha() * self.q * self.b * self.b1 * self.b2;
        (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300)
    }

    pub fn swap_a(&self) -> Self {
        Self {
            a1: self.a2,
            a2: self.a1,
            ..*self
        }
    }

    pub fn swap_b(&self) -> Self {
        Self {
            b1: self.b2,
            b2: self.b1,
            ..*self
        }
    }
}

/// Normal-form parameters for `f(x) = x^{-λ} ŷ₁(x)`, with the gauge `B = 1`.
///
/// `A = q^λ`, `a_i = q^{λ+1}/β_i`, `b₁ = A/α₁`, `b₂ = Aq/α₂`, `α = λ - μ′`, `λ₀ = λ`.
pub fn fnparams_from_qparams(p: &QParams) -> FNParams {
    let q = p.q;
    let a = p.q_lambda();
    FNParams {
        q,
        a,
        b: one(),
        a1: q * a / p.beta1,
        a2: q * a / p.beta2,
        b1: a / p.alpha1,
        b2: a * q / p.alpha2,
        alpha_exp: p.lambda - p.mu_prime,
        lambda0: p.lambda,
    }
}

/// Normal-form parameters for `f(x) = x^{-λ₀} g(x)`, with the gauge `B = 1`.
///
/// `A = q^{k₂+λ₀}`, `a_i = q^{h_i+1/2} t_i`, `b_i = A q^{l_i-1/2} t_i`, `α = λ₀ + k₁`.
pub fn fnparams_from_variant(vp: &VariantParams) -> FNParams {
    let half = C64::new(0.5, 0.0);
    let lambda0 = vp.lambda0();
    let a = vp.qpow(vp.k2 + lambda0);
    FNParams {
        q: vp.q,
        a,
        b: one(),
        a1: vp.qpow(vp.h1 + half) * vp.t1,
        a2: vp.qpow(vp.h2 + half) * vp.t2,
        b1: a * vp.qpow(vp.l1 - half) * vp.t1,
        b2: a * vp.qpow(vp.l2 - half) * vp.t2,
        alpha_exp: lambda0 + vp.k1,
        lambda0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;
    use proptest::prelude::*;

    fn vp() -> VariantParams {
        VariantParams::real(0.5, 0.3, -0.2, 0.4, 0.1, 0.7, 0.25, 1.3, 0.8).unwrap()
    }

    fn qp() -> QParams {
        QParams::real(0.5, 0.3, 0.7, 1.9, 2.3, 3.1).unwrap()
    }

    // A function with no special relation to any equation.
    fn probe(x: C64) -> Result<C64> {
        Ok((x * 0.37).sin() + x * x * C64::new(0.2, 0.1) + 1.0 / (x + 3.0))
    }

    #[test]
    fn derived_variant_quantities() {
        let v = vp();
        let q = 0.5f64;
        let p = q.powf((0.3 - 0.2 + 0.4 + 0.1 + 0.7 + 0.25) / 2.0);
        let e = -p * ((q.powf(0.2) + q.powf(-0.1)) * 1.3 + (q.powf(-0.3) + q.powf(-0.4)) * 0.8);
        assert!((v.p - re(p)).norm() < 1e-14);
        assert!((v.e - re(e)).norm() < 1e-13);
        assert!(VariantParams::real(0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn zero_function_has_zero_residual() {
        let zero = |_x: C64| Ok(C64::new(0.0, 0.0));
        assert_eq!(residual_variant(zero, re(0.9), &vp()).unwrap().lhs, re(0.0));
        let fp = fnparams_from_qparams(&qp());
        assert_eq!(residual_e2(zero, re(0.9), &fp).unwrap().lhs, re(0.0));
        assert_eq!(residual_special(zero, re(0.9), &qp(), false).unwrap().lhs, re(0.0));
    }

    #[test]
    fn special_equation_is_variant_after_gauge() {
        // g = x^{-k₂} ŷ₁ maps the ŷ₁ equation onto the variant equation, for any ŷ₁
        let v = vp();
        let p = qparams_from_variant(&v).unwrap();
        let gauged = ScalarQDiffEq::special(&p, false).gauge(v.q, -v.k2).unwrap();
        assert!(gauged.max_rel_diff(&ScalarQDiffEq::variant(&v)) < 1e-13);
        let lam = (v.h1 + v.h2 - v.l1 - v.l2 - v.k1 + v.k2 + 1.0) / 2.0;
        assert!((p.q_lambda() - v.qpow(lam)).norm() < 1e-15);
        assert!(p.constraint_residual() < 1e-12);
    }

    #[test]
    fn e2_forms_match_by_gauge() {
        let p = qp();
        let fp = fnparams_from_qparams(&p);
        assert!(fp.invariant_residual() < 1e-12);
        let from_yhat = ScalarQDiffEq::special(&p, false).gauge(p.q, -p.lambda).unwrap();
        assert!(from_yhat.max_rel_diff(&ScalarQDiffEq::fn_e2(&fp)) < 1e-13);

        let v = vp();
        let fv = fnparams_from_variant(&v);
        assert!(fv.invariant_residual() < 1e-12);
        let lam0 = (v.h1 + v.h2 - v.l1 - v.l2 - v.k1 - v.k2 + 1.0) / 2.0;
        assert!((fv.lambda0 - lam0).norm() < 1e-15);
        let from_g = ScalarQDiffEq::variant(&v).gauge(v.q, -fv.lambda0).unwrap();
        assert!(from_g.max_rel_diff(&ScalarQDiffEq::fn_e2(&fv)) < 1e-13);
    }

    #[test]
    fn lambda_zero_fn_params() {
        let p = QParams {
            lambda: re(0.0),
            ..qp()
        };
        let fp = fnparams_from_qparams(&p);
        assert!((fp.a - fp.b).norm() < 1e-15);
        let want = p.alpha1 * p.alpha2 / (p.beta1 * p.beta2);
        assert!((fp.q_alpha() - want).norm() < 1e-14);
    }

    #[test]
    fn e2_symmetry_is_exact_in_coefficients() {
        let fp = fnparams_from_qparams(&qp());
        let base = ScalarQDiffEq::fn_e2(&fp);
        for other in [fp.swap_a(), fp.swap_b()] {
            let eq = ScalarQDiffEq::fn_e2(&other);
            assert!(eq.max_rel_diff(&base) < 1e-15);
            let x = re(0.77);
            let r0 = residual_e2(probe, x, &fp).unwrap().lhs;
            let r1 = residual_e2(probe, x, &other).unwrap().lhs;
            assert!((r0 - r1).norm() <= 1e-12 * (1.0 + r0.norm()));
        }
    }

    #[test]
    fn nonhomogeneous_term_is_linear_in_x() {
        let p = qp();
        let x = re(1.7);
        let h = residual_special(probe, x, &p, false).unwrap().lhs;
        let n = residual_special(probe, x, &p, true).unwrap().lhs;
        let term = p.q * (1.0 - p.q) * (1.0 - p.q_lambda()) * p.alpha1 / (p.beta1 * p.beta2) * x;
        assert!((h - n - term).norm() < 1e-14);
    }

    #[test]
    fn degenerate_alpha_is_rejected() {
        // α₁ = α₂ when q^{-l₁+1/2}/t₁ = q^{-l₂+3/2}/t₂
        let v = VariantParams::real(0.5, 0.3, -0.2, 0.4, 1.4, 0.7, 0.25, 1.0, 1.0).unwrap();
        assert!(matches!(qparams_from_variant(&v), Err(QError::InvalidParameters(_))));
    }

    proptest! {
        #[test]
        fn residuals_are_linear(c in -2.0f64..2.0, x in 0.2f64..5.0) {
            let g2 = |x: C64| Ok(x.ln() * 0.3 + 2.0);
            let sum = |x: C64| Ok(probe(x)? + g2(x)? * c);
            let v = vp();
            let xs = re(x);
            let r = residual_variant(sum, xs, &v).unwrap().lhs;
            let r1 = residual_variant(probe, xs, &v).unwrap().lhs;
            let r2 = residual_variant(g2, xs, &v).unwrap().lhs;
            let s = residual_variant(sum, xs, &v).unwrap().scale;
            prop_assert!((r - r1 - r2 * c).norm() <= 1e-12 * (1.0 + s));
        }

        #[test]
        fn gauge_relation_holds_pointwise(x in 0.3f64..4.0) {
            // residual of x^{-k₂}ŷ in the variant equation is q^{k₂}x^{-k₂} times that of ŷ
            let v = vp();
            let p = qparams_from_variant(&v).unwrap();
            let xs = re(x);
            let g = |s: C64| Ok(cpow(s, -v.k2)? * probe(s)?);
            let rv = residual_variant(g, xs, &v).unwrap();
            let rs = residual_special(probe, xs, &p, false).unwrap();
            let want = v.qpow(v.k2) * cpow(xs, -v.k2).unwrap() * rs.lhs;
            prop_assert!((rv.lhs - want).norm() <= 1e-12 * (1.0 + rv.scale));
        }
    }
}
