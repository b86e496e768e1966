//! Closed-form solution families of the `ŷ₁` equation and of the variant
//! equation, each with its convergence-domain predicate.
//!
//! A family is stored as data: a scalar prefactor, a ratio of infinite
//! Pochhammer products, and one `₃φ₂` whose argument is tagged symbolically.
//! [`in_domain`] inspects exactly that data, so the condition it enforces is
//! the one attached to the formula rather than a re-derived one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::jackson::QParams;
use crate::qseries::{
    cpow, lattice_distance, qappell_phi1_detailed, qpoch_ratio, qpoch_ratio_guarded, rphi_detailed, rphi_guarded,
    PhiSpec, SeriesValue,
};
use crate::truncation::Truncation;
use crate::variant::{qparams_from_variant, VariantParams};
use crate::C64;

/// Denominator factors `1 - u q^j` smaller than this are treated as poles.
pub const POLE_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyTag {
    YAlpha1,
    YAlpha2,
    YLambda,
    YBeta1,
    YBeta2,
    YX,
    A1_1,
    A1_5,
    A1_9,
    A2_2,
    A2_6,
    A2_10,
    F32,
    F33,
    F34,
    F35,
    F36,
    F37,
    F32Check,
    F33Check,
    F34Check,
    F35Check,
    F36Check,
    F37Check,
    GQAppell,
}

/// Which equation a family is known to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    /// The homogeneous `ŷ₁` equation.
    Homogeneous,
    /// The `ŷ₁` equation with its inhomogeneous term.
    Nonhomogeneous,
    /// Not classified; only the linear relations it enters are asserted.
    Unclassified,
    /// The variant equation.
    Variant,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 25] = [
        FamilyTag::YAlpha1,
        FamilyTag::YAlpha2,
        FamilyTag::YLambda,
        FamilyTag::YBeta1,
        FamilyTag::YBeta2,
        FamilyTag::YX,
        FamilyTag::A1_1,
        FamilyTag::A1_5,
        FamilyTag::A1_9,
        FamilyTag::A2_2,
        FamilyTag::A2_6,
        FamilyTag::A2_10,
        FamilyTag::F32,
        FamilyTag::F33,
        FamilyTag::F34,
        FamilyTag::F35,
        FamilyTag::F36,
        FamilyTag::F37,
        FamilyTag::F32Check,
        FamilyTag::F33Check,
        FamilyTag::F34Check,
        FamilyTag::F35Check,
        FamilyTag::F36Check,
        FamilyTag::F37Check,
        FamilyTag::GQAppell,
    ];

    /// Stable CLI name.
    pub fn name(self) -> &'static str {
        use FamilyTag::*;
        match self {
            YAlpha1 => "y_alpha1",
            YAlpha2 => "y_alpha2",
            YLambda => "y_lambda",
            YBeta1 => "y_beta1",
            YBeta2 => "y_beta2",
            YX => "y_x",
            A1_1 => "a1_1",
            A1_5 => "a1_5",
            A1_9 => "a1_9",
            A2_2 => "a2_2",
            A2_6 => "a2_6",
            A2_10 => "a2_10",
            F32 => "f32",
            F33 => "f33",
            F34 => "f34",
            F35 => "f35",
            F36 => "f36",
            F37 => "f37",
            F32Check => "f32_check",
            F33Check => "f33_check",
            F34Check => "f34_check",
            F35Check => "f35_check",
            F36Check => "f36_check",
            F37Check => "f37_check",
            GQAppell => "g_qappell",
        }
    }

    pub fn kind(self) -> Kind {
        use FamilyTag::*;
        match self {
            YAlpha1 | YAlpha2 | YLambda => Kind::Nonhomogeneous,
            F34 | F36 | F37 | F34Check | F36Check | F37Check => Kind::Unclassified,
            GQAppell => Kind::Variant,
            _ => Kind::Homogeneous,
        }
    }

    /// For a `*_check` tag, the tag whose formula it evaluates at `β₁ ↔ β₂`.
    pub fn unswapped(self) -> Option<FamilyTag> {
        use FamilyTag::*;
        Some(match self {
            F32Check => F32,
            F33Check => F33,
            F34Check => F34,
            F35Check => F35,
            F36Check => F36,
            F37Check => F37,
            _ => return None,
        })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| QError::InvalidParameters(format!("unknown family {s:?}")))
    }
}

/// The argument of a family's `₃φ₂`, relative to the parameters the formula
/// is evaluated with (for `*_check` families these are the swapped ones).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesArg {
    Q,
    /// `q^λ α₁α₂/(β₁β₂)`
    ZArg,
    /// `q/(α₁x)`
    QOverAlpha1X,
    /// `β₁/α₁`
    Beta1OverAlpha1,
    /// `q^{-λ}β₁x`
    QmLambdaBeta1X,
    /// `q^{-λ}β₂x`
    QmLambdaBeta2X,
    /// `q^{1-λ}`; for real `q` the condition `|q^{1-λ}| < 1` is `Re λ < 1`
    Q1mLambda,
    /// `α₂/β₁`
    Alpha2OverBeta1,
}

impl SeriesArg {
    pub fn eval(self, p: &QParams, x: C64) -> C64 {
        let q = p.q;
        match self {
            SeriesArg::Q => q,
            SeriesArg::ZArg => p.z_arg(),
            SeriesArg::QOverAlpha1X => q / (p.alpha1 * x),
            SeriesArg::Beta1OverAlpha1 => p.beta1 / p.alpha1,
            SeriesArg::QmLambdaBeta1X => p.beta1 * x / p.q_lambda(),
            SeriesArg::QmLambdaBeta2X => p.beta2 * x / p.q_lambda(),
            SeriesArg::Q1mLambda => q / p.q_lambda(),
            SeriesArg::Alpha2OverBeta1 => p.alpha2 / p.beta1,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            SeriesArg::Q => "|q| < 1",
            SeriesArg::ZArg => "|q^lambda alpha1 alpha2/(beta1 beta2)| < 1",
            SeriesArg::QOverAlpha1X => "|q/(alpha1 x)| < 1",
            SeriesArg::Beta1OverAlpha1 => "|beta1/alpha1| < 1",
            SeriesArg::QmLambdaBeta1X => "|q^-lambda beta1 x| < 1",
            SeriesArg::QmLambdaBeta2X => "|q^-lambda beta2 x| < 1",
            SeriesArg::Q1mLambda => "|q^(1-lambda)| < 1 (Re lambda < 1 for real q)",
            SeriesArg::Alpha2OverBeta1 => "|alpha2/beta1| < 1",
        }
    }
}

/// `scale · (num; q)_∞/(den; q)_∞ · ₃φ₂(upper; lower; q, arg)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub scale: C64,
    pub num: Vec<C64>,
    pub den: Vec<C64>,
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub arg: SeriesArg,
    pub arg_value: C64,
}

impl ClosedForm {
    /// First violated condition, if any.
    pub fn violation(&self, q: C64) -> Option<QError> {
        if self.arg_value.norm() >= 1.0 {
            return Some(QError::OutOfConvergenceDomain(format!(
                "{} violated (modulus {:.6})",
                self.arg.describe(),
                self.arg_value.norm()
            )));
        }
        for (what, list) in [("prefactor", &self.den), ("series", &self.lower)] {
            for &d in list.iter() {
                if lattice_distance(d, q) < POLE_GUARD {
                    return Some(QError::PoleInDenominator(format!(
                        "{what} denominator parameter {d} lies on the lattice q^-n"
                    )));
                }
            }
        }
        None
    }

    /// Smallest lattice distance of any denominator parameter.
    pub fn pole_margin(&self, q: C64) -> f64 {
        self.den
            .iter()
            .chain(&self.lower)
            .map(|&d| lattice_distance(d, q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, q: C64, t: &Truncation) -> Result<C64> {
        if let Some(e) = self.violation(q) {
            return Err(e);
        }
        let ratio = qpoch_ratio_guarded(&self.num, &self.den, q, t, POLE_GUARD)?;
        if ratio.norm() == 0.0 || self.scale.norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let spec = PhiSpec::new(self.upper.clone(), self.lower.clone(), q, self.arg_value);
        Ok(self.scale * ratio * rphi_guarded(&spec, t, POLE_GUARD)?)
    }

    /// Cancellation factor `Σ|term| / |Σ term|` of the series part. The
    /// prefactor is a product and does not lose relative accuracy.
    pub fn condition(&self, q: C64, t: &Truncation) -> Result<f64> {
        if let Some(e) = self.violation(q) {
            return Err(e);
        }
        let spec = PhiSpec::new(self.upper.clone(), self.lower.clone(), q, self.arg_value);
        Ok(rphi_detailed(&spec, t, POLE_GUARD)?.condition())
    }
}

/// A solution family bound to its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub tag: FamilyTag,
    pub params: QParams,
    /// Present exactly for [`FamilyTag::GQAppell`].
    pub variant: Option<VariantParams>,
}

impl SolutionFamily {
    pub fn new(tag: FamilyTag, params: QParams) -> Result<Self> {
        if tag == FamilyTag::GQAppell {
            return Err(QError::InvalidParameters(
                "g_qappell is parametrized by VariantParams; use SolutionFamily::qappell".into(),
            ));
        }
        Ok(Self {
            tag,
            params,
            variant: None,
        })
    }

    pub fn qappell(vp: VariantParams) -> Result<Self> {
        Ok(Self {
            tag: FamilyTag::GQAppell,
            params: qparams_from_variant(&vp)?,
            variant: Some(vp),
        })
    }
}

fn pw(base: C64, e: C64) -> Result<C64> {
    cpow(base, e)
}

/// The closed form of a `QParams` family at `x`. `GQAppell` has no such form.
pub fn closed_form(tag: FamilyTag, p: &QParams, x: C64) -> Result<ClosedForm> {
    use FamilyTag::*;
    if x.norm() == 0.0 {
        return Err(QError::ZeroArgument("solutions are evaluated at x != 0".into()));
    }
    if let Some(base) = tag.unswapped() {
        return closed_form(base, &p.swapped(), x);
    }
    let q = p.q;
    let one = C64::new(1.0, 0.0);
    let l = p.lambda;
    let ql = p.q_lambda();
    let (a1, a2, b1, b2, mu) = (p.alpha1, p.alpha2, p.beta1, p.beta2, p.mu_prime);
    let r = a1 * a2 / (b1 * b2);
    let q2 = q * q;
    // (1-q) β_i^{λ-μ′} x^λ, the prefactor shared by the β-type forms
    let pre_b = |b: C64| -> Result<C64> { Ok((one - q) * pw(b, l - mu)? * pw(x, l)?) };

    let (scale, num, den, upper, lower, arg) = match tag {
        YAlpha1 => (
            q - one,
            vec![q * ql / (a1 * x), q, a2 / a1],
            vec![q / (a1 * x), b1 / a1, b2 / a1],
            vec![q / (a1 * x), b1 / a1, b2 / a1],
            vec![q * ql / (a1 * x), a2 / a1],
            SeriesArg::Q,
        ),
        YAlpha2 => (
            (q - one) * q * a1 / a2,
            vec![q2 * ql / (a2 * x), q2 * a1 / a2, q],
            vec![q2 / (a2 * x), q * b1 / a2, q * b2 / a2],
            vec![q2 / (a2 * x), q * b1 / a2, q * b2 / a2],
            vec![q2 * ql / (a2 * x), q2 * a1 / a2],
            SeriesArg::Q,
        ),
        YLambda => (
            (q - one) * a1 * x / ql,
            vec![q, q * a1 * x / ql, a2 * x / ql],
            vec![q / ql, b1 * x / ql, b2 * x / ql],
            vec![q / ql, b1 * x / ql, b2 * x / ql],
            vec![q * a1 * x / ql, a2 * x / ql],
            SeriesArg::Q,
        ),
        YBeta1 => (
            pre_b(b1)?,
            vec![b1 * x, q, q * b1 / b2],
            vec![b1 * x / ql, b1 / a1, q * b1 / a2],
            vec![b1 * x / ql, b1 / a1, q * b1 / a2],
            vec![b1 * x, q * b1 / b2],
            SeriesArg::ZArg,
        ),
        YBeta2 => return closed_form(YBeta1, &p.swapped(), x),
        YX => (
            (one - q) * pw(q, l - mu)? * pw(x, mu)?,
            vec![q2 / (b1 * x), q2 / (b2 * x), q],
            vec![q / (a1 * x), q2 / (a2 * x), q / ql],
            vec![q / ql, q / (a1 * x), q2 / (a2 * x)],
            vec![q2 / (b1 * x), q2 / (b2 * x)],
            SeriesArg::ZArg,
        ),
        A1_1 => (
            pre_b(b1)?,
            vec![b1 * x, q, q * a1 / b2, a2 / b2, q2 * ql / (a2 * x), q / (b1 * x)],
            vec![b1 * x / ql, b1 / a1, q * b1 / a2, q2 / (a2 * x), q * ql / (b1 * x), r],
            vec![q * b1 / a2, ql, q * b2 / a2],
            vec![q2 * ql / (a2 * x), q / r],
            SeriesArg::QOverAlpha1X,
        ),
        A1_5 => (
            pre_b(b1)?,
            vec![b1 * x, q, q * ql / (b2 * x), a2 / b2, q2 * a1 / a2, q / (b1 * x)],
            vec![
                b1 * x / ql,
                b1 / a1,
                q * b1 / a2,
                q2 / (a2 * x),
                q * a1 / b1,
                ql * a2 / (b1 * b2 * x),
            ],
            vec![q * b1 / a2, a1 * x, q * b2 / a2],
            vec![q2 * a1 / a2, q * b1 * b2 * x / (ql * a2)],
            SeriesArg::Q1mLambda,
        ),
        A1_9 => (
            pre_b(b1)?,
            vec![b1 * x, q, q * ql / (b2 * x), q * a1 / b2, a2 / a1, q / (b1 * x)],
            vec![
                b1 * x / ql,
                b1 / a1,
                q * b1 / a2,
                q / (a1 * x),
                a2 / b1,
                q * ql * a1 / (b1 * b2 * x),
            ],
            vec![b1 / a1, a2 * x / q, b2 / a1],
            vec![a2 / a1, b1 * b2 * x / (ql * a1)],
            SeriesArg::Q1mLambda,
        ),
        A2_2 => (
            pre_b(b2)?,
            vec![q, q * b2 / b1, a1 * x, a2 * x / q, q2 * ql / (a2 * x), b1 / b2],
            vec![
                b2 * x / ql,
                b2 / a1,
                q * b2 / a2,
                q * b1 / a2,
                q * ql / (b2 * x),
                a1 * a2 * x / (q * b2),
            ],
            vec![q * b2 / a2, q * ql / (b1 * x), q2 / (a2 * x)],
            vec![q2 * ql / (a2 * x), q2 * b2 / (a1 * a2 * x)],
            SeriesArg::Beta1OverAlpha1,
        ),
        A2_6 => (
            pre_b(b2)?,
            vec![q, q * b2 / b1, ql, a2 * x / q, q2 * a1 / a2, b1 / b2],
            vec![
                b2 * x / ql,
                b2 / a1,
                q * b2 / a2,
                q * b1 / a2,
                q * a1 / b2,
                ql * a2 / (q * b2),
            ],
            vec![q * b2 / a2, q * a1 / b1, q2 / (a2 * x)],
            vec![q2 * a1 / a2, q2 * b2 / (ql * a2)],
            SeriesArg::QmLambdaBeta1X,
        ),
        A2_10 => (
            pre_b(b2)?,
            vec![q, q * b2 / b1, ql, a1 * x, a2 / a1, b1 / b2],
            vec![b2 * x / ql, b2 / a1, q * b2 / a2, b1 / a1, a2 / b2, ql * a1 / b2],
            vec![b2 / a1, a2 / b1, q / (a1 * x)],
            vec![a2 / a1, q * b2 / (ql * a1)],
            SeriesArg::QmLambdaBeta1X,
        ),
        F32 => (
            pw(x, l)?,
            vec![],
            vec![],
            vec![ql * r, ql, q * ql / (b1 * x)],
            vec![q * ql * a1 / b1, ql * a2 / b1],
            SeriesArg::QmLambdaBeta2X,
        ),
        F33 => (
            pw(x, l)?,
            vec![b2 * x],
            vec![b2 * x / ql],
            vec![q * b2 / a2, ql, a1 * x],
            vec![q * ql * a1 / b1, b2 * x],
            SeriesArg::Alpha2OverBeta1,
        ),
        F34 => (
            pw(x, l)?,
            vec![b2 * x],
            vec![b2 * x / ql],
            vec![b2 / a1, q * b2 / a2, ql],
            vec![q / r, b2 * x],
            SeriesArg::Q,
        ),
        F35 => (
            pw(x, l)?,
            vec![a2 * x / q],
            vec![b1 * b2 * x / (q * ql * a1)],
            vec![ql * r, q * a1 / b1, q * a1 / b2],
            vec![q2 * ql * a1 / (b1 * b2 * x), q * r],
            SeriesArg::QOverAlpha1X,
        ),
        F36 => (
            pw(x, l)?,
            vec![a1 * x, a2 * x / q],
            vec![b2 * x / q, b1 * x / ql],
            vec![q / ql, a2 / b2, q / (a1 * x)],
            vec![q * b1 / (ql * a1), q2 / (b2 * x)],
            SeriesArg::Q,
        ),
        F37 => (
            pw(x, l)?,
            vec![],
            vec![],
            vec![ql * r, ql, a1 * x],
            vec![q * ql * a1 / b1, q * ql * a1 / b2],
            SeriesArg::Q,
        ),
        F32Check | F33Check | F34Check | F35Check | F36Check | F37Check => unreachable!("handled above"),
        GQAppell => {
            return Err(QError::InvalidParameters(
                "g_qappell is a double series, not a 3phi2 form".into(),
            ))
        }
    };
    Ok(ClosedForm {
        scale,
        num,
        den,
        upper,
        lower,
        arg,
        arg_value: arg.eval(p, x),
    })
}

fn qappell_args(vp: &VariantParams, x: C64) -> (C64, C64) {
    let half = C64::new(0.5, 0.0);
    (vp.qpow(vp.l1 + half) * vp.t1 / x, vp.qpow(vp.l2 + half) * vp.t2 / x)
}

/// First violated domain condition of `fam` at `x`, if any.
pub fn domain_violation(fam: &SolutionFamily, x: C64) -> Option<QError> {
    if x.norm() == 0.0 || !x.is_finite() {
        return Some(QError::ZeroArgument("x must be nonzero and finite".into()));
    }
    match fam.tag {
        FamilyTag::GQAppell => {
            let vp = fam.variant.as_ref()?;
            let (y, z) = qappell_args(vp, x);
            if y.norm() >= 1.0 || z.norm() >= 1.0 {
                return Some(QError::OutOfConvergenceDomain(format!(
                    "|q^(l1+1/2) t1/x| < 1 and |q^(l2+1/2) t2/x| < 1 violated (moduli {:.6}, {:.6})",
                    y.norm(),
                    z.norm()
                )));
            }
            let c = vp.qpow(vp.k1 - vp.k2 + 1.0);
            if lattice_distance(c, vp.q) < POLE_GUARD {
                return Some(QError::PoleInDenominator(format!("c = {c} lies on the lattice q^-n")));
            }
            None
        }
        tag => match closed_form(tag, &fam.params, x) {
            Ok(cf) => cf.violation(fam.params.q),
            Err(e) => Some(e),
        },
    }
}

/// True iff the family's convergence condition and the pole guard hold at `x`.
pub fn in_domain(fam: &SolutionFamily, x: C64) -> bool {
    domain_violation(fam, x).is_none()
}

/// [`in_domain`] at `x/q`, `x` and `qx`, the points a residual needs.
pub fn in_domain_lattice(fam: &SolutionFamily, x: C64) -> bool {
    let q = fam.params.q;
    [x / q, x, q * x].iter().all(|&y| in_domain(fam, y))
}

pub fn eval_solution(fam: &SolutionFamily, x: C64, t: &Truncation) -> Result<C64> {
    match fam.tag {
        FamilyTag::GQAppell => {
            let vp = fam
                .variant
                .as_ref()
                .ok_or_else(|| QError::InvalidParameters("g_qappell needs VariantParams".into()))?;
            eval_qappell_solution(vp, x, t)
        }
        tag => closed_form(tag, &fam.params, x)?.eval(fam.params.q, t),
    }
}

/// `g(x) = x^{-k₁} Φ⁽¹⁾(q^{λ̃+k₁}; q^{λ̃+k₁-h₂+l₂}, q^{λ̃+k₁-h₁+l₁}; q^{k₁-k₂+1}; q; q^{l₁+1/2}t₁/x, q^{l₂+1/2}t₂/x)`
/// with `λ̃ = λ - k₂`.
pub fn eval_qappell_solution(vp: &VariantParams, x: C64, t: &Truncation) -> Result<C64> {
    let phi = qappell_part(vp, x, t)?;
    Ok(cpow(x, -vp.k1)? * phi.value)
}

/// Cancellation factor of the series behind `fam` at `x`. Relative accuracy
/// of [`eval_solution`] is roughly `ε` times this.
pub fn solution_condition(fam: &SolutionFamily, x: C64, t: &Truncation) -> Result<f64> {
    match fam.tag {
        FamilyTag::GQAppell => {
            let vp = fam
                .variant
                .as_ref()
                .ok_or_else(|| QError::InvalidParameters("g_qappell needs VariantParams".into()))?;
            Ok(qappell_part(vp, x, t)?.condition())
        }
        tag => closed_form(tag, &fam.params, x)?.condition(fam.params.q, t),
    }
}

fn qappell_part(vp: &VariantParams, x: C64, t: &Truncation) -> Result<SeriesValue> {
    if x.norm() == 0.0 {
        return Err(QError::ZeroArgument("g_qappell needs x != 0".into()));
    }
    let lambda = (vp.h1 + vp.h2 - vp.l1 - vp.l2 - vp.k1 + vp.k2 + 1.0) / 2.0;
    let s = lambda - vp.k2 + vp.k1;
    let (y, z) = qappell_args(vp, x);
    qappell_phi1_detailed(
        vp.qpow(s),
        vp.qpow(s - vp.h2 + vp.l2),
        vp.qpow(s - vp.h1 + vp.l1),
        vp.qpow(vp.k1 - vp.k2 + 1.0),
        vp.q,
        y,
        z,
        t,
    )
}

/// The constant `C` with `x^{-k₂} y_x(x) = C·g(x)`:
/// `C = (1-q) q^{λ-μ′} (q, qα₁α₂/(β₁β₂); q)_∞ / (q^{1-λ}, q^λα₁α₂/(β₁β₂); q)_∞`.
pub fn qappell_constant(p: &QParams, t: &Truncation) -> Result<C64> {
    let q = p.q;
    let r = p.alpha1 * p.alpha2 / (p.beta1 * p.beta2);
    let ratio = qpoch_ratio(&[q, q * r], &[q / p.q_lambda(), p.q_lambda() * r], q, t)?;
    Ok((1.0 - q) * p.qpow(p.lambda - p.mu_prime) * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jackson::yhat1_bilateral;
    use crate::re;
    use crate::truncation::BilateralTruncation;
    use crate::variant::{residual_special, residual_variant};
    use proptest::prelude::*;

    fn params() -> QParams {
        QParams::real(0.5, 0.3, 0.7, 1.9, 2.3, 3.1).unwrap()
    }

    /// β₁ < α₁ so that the `β₁/α₁` series converges.
    fn params_small_beta() -> QParams {
        QParams::real(0.45, 0.4, 1.6, 2.2, 0.9, 2.7).unwrap()
    }

    fn vparams() -> VariantParams {
        VariantParams::real(0.5, 0.3, -0.2, 0.4, 0.1, 0.7, 0.25, 1.3, 0.8).unwrap()
    }

    fn eval(tag: FamilyTag, p: &QParams, x: C64) -> Result<C64> {
        eval_solution(&SolutionFamily::new(tag, *p).unwrap(), x, &Truncation::default())
    }

    fn residual(tag: FamilyTag, p: &QParams, x: C64, nonhom: bool) -> f64 {
        let fam = SolutionFamily::new(tag, *p).unwrap();
        assert!(in_domain_lattice(&fam, x), "{tag} out of domain at {x}");
        residual_special(|y| eval(tag, p, y), x, p, nonhom)
            .unwrap()
            .normalized()
    }

    #[test]
    fn names_round_trip() {
        for tag in FamilyTag::ALL {
            assert_eq!(tag.name().parse::<FamilyTag>().unwrap(), tag);
        }
        assert!("y_gamma".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn homogeneous_families_solve_the_equation() {
        let cases: [(FamilyTag, QParams, &[f64]); 15] = [
            (FamilyTag::YBeta1, params(), &[0.8, 3.0, 0.21]),
            (FamilyTag::YBeta2, params(), &[0.8, 3.0, 0.21]),
            (FamilyTag::YX, params(), &[1.7, 3.0, 5.5]),
            (FamilyTag::A1_1, params(), &[2.0, 3.3]),
            (FamilyTag::A1_5, params(), &[0.6, 1.4]),
            (FamilyTag::A1_9, params(), &[0.6, 1.4]),
            (FamilyTag::A2_2, params_small_beta(), &[1.3, 2.9]),
            (FamilyTag::A2_6, params(), &[0.1, 0.15]),
            (FamilyTag::A2_10, params(), &[0.1, 0.15]),
            (FamilyTag::F32, params(), &[0.08, 0.1]),
            (FamilyTag::F33, params(), &[0.2, 1.1]),
            (FamilyTag::F35, params(), &[2.5, 4.0]),
            (FamilyTag::F32Check, params(), &[0.1, 0.15]),
            (FamilyTag::F35Check, params(), &[2.5, 4.0]),
            (FamilyTag::F33Check, params(), &[0.2, 0.9]),
        ];
        for (tag, p, xs) in cases {
            assert_eq!(tag.kind(), Kind::Homogeneous);
            for &x in xs {
                let r = residual(tag, &p, re(x), false);
                assert!(r < 1e-8, "{tag} at x = {x}: residual {r:e}");
            }
        }
    }

    #[test]
    fn alpha_lambda_families_solve_the_inhomogeneous_equation() {
        let p = params();
        for x in [0.8, 2.4, 5.0] {
            for tag in [FamilyTag::YAlpha1, FamilyTag::YAlpha2, FamilyTag::YLambda] {
                assert!(residual(tag, &p, re(x), true) < 1e-8, "{tag} at {x}");
                // and not the homogeneous one
                assert!(residual(tag, &p, re(x), false) > 1e-6, "{tag} at {x}");
            }
            let diff = |a: FamilyTag, b: FamilyTag| {
                residual_special(|y| Ok(eval(a, &p, y)? - eval(b, &p, y)?), re(x), &p, false)
                    .unwrap()
                    .normalized()
            };
            assert!(diff(FamilyTag::YAlpha1, FamilyTag::YAlpha2) < 1e-8);
            assert!(diff(FamilyTag::YAlpha1, FamilyTag::YLambda) < 1e-8);
            assert!(diff(FamilyTag::YAlpha2, FamilyTag::YLambda) < 1e-8);
        }
    }

    #[test]
    fn alpha_lambda_families_are_jackson_integrals() {
        let p = params();
        let bt = BilateralTruncation::default();
        for x in [re(0.77), re(3.3), C64::new(1.2, 0.4)] {
            for (tag, xi) in [
                (FamilyTag::YAlpha1, 1.0 / p.alpha1),
                (FamilyTag::YAlpha2, 1.0 / p.alpha2),
                (FamilyTag::YLambda, x / p.q_lambda()),
            ] {
                let a = eval(tag, &p, x).unwrap();
                let b = yhat1_bilateral(x, xi, &p, &bt).unwrap();
                assert!((a - b).norm() <= 1e-10 * a.norm(), "{tag} at {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn domain_predicates() {
        let p = params();
        let fam = |tag| SolutionFamily::new(tag, p).unwrap();
        assert!(in_domain(&fam(FamilyTag::YAlpha1), re(0.9)));
        // |z| = 1.2
        let z = p.z_arg().norm();
        let big = QParams::real(0.5, 0.3, 0.7 * 1.2 / z, 1.9, 2.3, 3.1).unwrap();
        assert!((big.z_arg().norm() - 1.2).abs() < 1e-12);
        let yx = SolutionFamily::new(FamilyTag::YX, big).unwrap();
        assert!(!in_domain(&yx, re(3.0)));
        assert!(matches!(
            eval_solution(&yx, re(3.0), &Truncation::default()),
            Err(QError::OutOfConvergenceDomain(_))
        ));
        // |q/(α₁x)| < 1 iff x > q/α₁
        let edge = (p.q / p.alpha1).re;
        assert!(in_domain(&fam(FamilyTag::A1_1), re(edge * 1.01)));
        assert!(!in_domain(&fam(FamilyTag::A1_1), re(edge * 0.99)));
        // |q^{-λ}β₁x| < 1 iff x < q^λ/β₁
        let edge = (p.q_lambda() / p.beta1).re;
        assert!(in_domain(&fam(FamilyTag::A2_6), re(edge * 0.99)));
        assert!(!in_domain(&fam(FamilyTag::A2_6), re(edge * 1.01)));
        // Re λ < 1
        let p_big = QParams { lambda: re(1.2), ..p };
        assert!(!in_domain(
            &SolutionFamily::new(FamilyTag::A1_5, p_big).unwrap(),
            re(1.0)
        ));
        assert!(in_domain(&fam(FamilyTag::A1_5), re(1.0)));
        // β₁/α₁ > 1 at the default parameters
        assert!(!in_domain(&fam(FamilyTag::A2_2), re(1.0)));
        // pole: x = q^λ/β₁ · q^{-2} puts q^{-λ}β₁x... on the lattice in y_beta1's prefactor
        let x_pole = p.q_lambda() / (p.beta1 * p.q * p.q);
        match domain_violation(&fam(FamilyTag::YBeta1), x_pole) {
            Some(QError::PoleInDenominator(_)) => {}
            other => panic!("{other:?}"),
        }
        assert!(SolutionFamily::new(FamilyTag::GQAppell, p).is_err());
    }

    #[test]
    fn swapped_families_are_structural() {
        let p = params();
        for (chk, base) in [
            (FamilyTag::F32Check, FamilyTag::F32),
            (FamilyTag::F34Check, FamilyTag::F34),
            (FamilyTag::F36Check, FamilyTag::F36),
            (FamilyTag::F37Check, FamilyTag::F37),
        ] {
            let x = re(0.12);
            let a = eval(chk, &p, x);
            let b = eval(base, &p.swapped(), x);
            assert_eq!(a, b);
        }
        assert_eq!(
            eval(FamilyTag::YBeta2, &p, re(0.8)),
            eval(FamilyTag::YBeta1, &p.swapped(), re(0.8))
        );
    }

    #[test]
    fn qappell_solution_solves_the_variant_equation() {
        let vp = vparams();
        let fam = SolutionFamily::qappell(vp).unwrap();
        let t = Truncation::default();
        for x in [3.0, 5.0, 9.0] {
            let x = re(x);
            assert!(in_domain_lattice(&fam, x));
            let r = residual_variant(|y| eval_solution(&fam, y, &t), x, &vp)
                .unwrap()
                .normalized();
            assert!(r < 1e-8, "residual {r:e} at {x}");
        }
        assert!(!in_domain(&fam, re(0.3)));
    }

    #[test]
    fn qappell_solution_is_a_multiple_of_y_x() {
        let vp = vparams();
        let p = qparams_from_variant(&vp).unwrap();
        let t = Truncation::default();
        let c = qappell_constant(&p, &t).unwrap();
        for x in [3.0, 4.0, 5.0] {
            let x = re(x);
            let yx = eval(FamilyTag::YX, &p, x).unwrap();
            let g = eval_qappell_solution(&vp, x, &t).unwrap();
            let lhs = cpow(x, -vp.k2).unwrap() * yx;
            assert!((lhs - c * g).norm() <= 1e-10 * lhs.norm(), "{lhs} vs {}", c * g);
        }
    }

    #[test]
    fn qappell_far_field_is_the_leading_power() {
        let vp = vparams();
        let t = Truncation::default();
        let x = re(1e13);
        let g = eval_qappell_solution(&vp, x, &t).unwrap();
        let lead = cpow(x, -vp.k1).unwrap();
        assert!((g / lead - 1.0).norm() < 1e-11);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn beta_and_x_families_are_homogeneous(
            q in 0.25f64..0.75, lam in -0.6f64..0.8,
            la in proptest::collection::vec(-0.5f64..0.5, 4), lx in -0.3f64..0.6,
        ) {
            let v: Vec<f64> = la.iter().map(|e| 10f64.powf(*e)).collect();
            let p = QParams::real(q, lam, v[0], v[1], v[2], v[3]).unwrap();
            prop_assume!(p.z_arg().norm() < 0.9);
            let x = re(10f64.powf(lx));
            for tag in [FamilyTag::YBeta1, FamilyTag::YBeta2, FamilyTag::YX] {
                let fam = SolutionFamily::new(tag, p).unwrap();
                if !in_domain_lattice(&fam, x) {
                    continue;
                }
                // keep clear of prefactor near-poles
                if let Ok(r) = residual_special(|y| eval(tag, &p, y), x, &p, false) {
                    prop_assert!(r.normalized() < 1e-8, "{} residual {:e}", tag, r.normalized());
                }
            }
        }
    }
}
