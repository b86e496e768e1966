//! Numerical verification of the identities among the solution families:
//! transformation formulas for `₃φ₂` and `Φ⁽¹⁾`, the relations expressing the
//! normal-form functions `f₃₂…f₃₇` to `y_{β₁}`, `y_{β₂}`, `y_x`, the nine linear
//! relations with pseudo-constant coefficients, and pseudo-constancy itself.
//!
//! Every check is a [`RelationSpec`]: a residual function of one sample point
//! plus an admissibility predicate that the sampler uses to stay away from
//! poles and convergence boundaries. Running a spec over samples yields a
//! [`RelationReport`].
//!
//! Coefficients are stored as data ([`CoeffForm`]) the same way the families
//! are, so the admissibility margin is read off the formula.
//!
//! A few coefficients have a commonly quoted variant with a flipped sign or
//! extra factors under which the relations fail. The evaluators here implement
//! the forms that make the relations hold; the uncorrected variants are
//! available through [`coeff_form_as_printed`] and appear as `INFO` rows.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::jackson::QParams;
use crate::qseries::{
    cpow, lattice_distance, qappell_phi1_detailed, qpoch_ratio, qpoch_ratio_guarded, rphi_detailed, rphi_guarded,
    theta_q, PhiSpec, SeriesValue,
};
use crate::solutions::{
    closed_form, eval_qappell_solution, eval_solution, qappell_constant, solution_condition, FamilyTag, SolutionFamily,
    POLE_GUARD,
};
use crate::truncation::Truncation;
use crate::variant::{
    fnparams_from_qparams, fnparams_from_variant, qparams_from_variant, residual_e2, residual_special,
    residual_variant, VariantParams,
};
use crate::C64;

/// Tolerance for relations among solutions and for equation residuals.
pub const RELATION_TOL: f64 = 1e-8;
/// Tolerance for transformation formulas and exact coefficient identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance for `f(qx) = f(x)`.
pub const PSEUDO_TOL: f64 = 1e-10;
/// Samples closer than this to a pole (`|1 - u q^n|`) are not admissible.
pub const SAMPLE_POLE_MARGIN: f64 = 1e-3;
/// Series arguments with modulus above `1 - SAMPLE_ARG_MARGIN` are not admissible.
pub const SAMPLE_ARG_MARGIN: f64 = 0.05;
/// Samples where a series loses more than this factor to cancellation
/// (`Σ|term| / |Σ term|`) are not admissible: about four digits of the sixteen.
pub const SAMPLE_CONDITION_LIMIT: f64 = 1e4;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Distance of `v` from the zero set `q^ℤ` of `ϑ_q`.
pub fn theta_distance(v: C64, q: C64) -> f64 {
    if v.norm() == 0.0 {
        return 0.0;
    }
    lattice_distance(v, q).min(lattice_distance(q / v, q))
}

// ---------------------------------------------------------------------------
// coefficients

/// Named coefficients of the relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coeff {
    /// `J_{m,n}`, `m ∈ 1..=6`, `n ∈ {1, 3}`, plus `J_{1,2}`.
    J(u8, u8),
    /// `K_{m,n}`: `J_{m,n}` with `β₁ ↔ β₂`, `m ∈ {1, 3, 5}`.
    K(u8, u8),
    S1,
    S2,
    S3,
    S4,
    S5,
    A11,
    A12,
    K63,
    C1,
    C2,
    C3,
}

impl Coeff {
    /// The twelve catalogued `J` coefficients.
    pub fn catalogued_j() -> Vec<Coeff> {
        (1..=6u8).flat_map(|m| [Coeff::J(m, 1), Coeff::J(m, 3)]).collect()
    }

    /// The six `K` coefficients.
    pub fn catalogued_k() -> Vec<Coeff> {
        [1u8, 3, 5]
            .iter()
            .flat_map(|&m| [Coeff::K(m, 1), Coeff::K(m, 3)])
            .collect()
    }

    pub fn name(self) -> String {
        match self {
            Coeff::J(m, n) => format!("J{m}{n}"),
            Coeff::K(m, n) => format!("K{m}{n}"),
            other => format!("{other:?}"),
        }
    }

    /// False for the coefficients whose formula contains no `x`.
    pub fn x_dependent(self) -> bool {
        match self {
            Coeff::S1 | Coeff::S3 | Coeff::S4 | Coeff::A11 | Coeff::A12 | Coeff::K63 => false,
            Coeff::J(m, 3) | Coeff::K(m, 3) => m % 2 == 1,
            Coeff::J(4, 1) | Coeff::K(4, 1) => true,
            _ => true,
        }
    }
}

/// `scale · ∏ϑ(θ_num)/∏ϑ(θ_den) · (poch_num)_∞/(poch_den)_∞ · [₃φ₂]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoeffForm {
    pub scale: C64,
    pub theta_num: Vec<C64>,
    pub theta_den: Vec<C64>,
    pub poch_num: Vec<C64>,
    pub poch_den: Vec<C64>,
    /// `(upper, lower, argument)` of an optional `₃φ₂` factor.
    pub series: Option<(Vec<C64>, Vec<C64>, C64)>,
}

impl CoeffForm {
    fn new(scale: C64) -> Self {
        Self {
            scale,
            ..Default::default()
        }
    }

    fn theta(mut self, num: &[C64], den: &[C64]) -> Self {
        self.theta_num.extend_from_slice(num);
        self.theta_den.extend_from_slice(den);
        self
    }

    fn poch(mut self, num: &[C64], den: &[C64]) -> Self {
        self.poch_num.extend_from_slice(num);
        self.poch_den.extend_from_slice(den);
        self
    }

    fn phi(mut self, upper: &[C64], lower: &[C64], z: C64) -> Self {
        self.series = Some((upper.to_vec(), lower.to_vec(), z));
        self
    }

    /// Smallest distance of any denominator factor from vanishing.
    pub fn pole_margin(&self, q: C64) -> f64 {
        let mut m = f64::INFINITY;
        for &v in &self.theta_den {
            m = m.min(theta_distance(v, q));
        }
        for &v in &self.poch_den {
            m = m.min(lattice_distance(v, q));
        }
        if let Some((_, lower, _)) = &self.series {
            for &v in lower {
                m = m.min(lattice_distance(v, q));
            }
        }
        m
    }

    /// Modulus of the series argument, 0 without a series.
    pub fn arg_modulus(&self) -> f64 {
        self.series.as_ref().map_or(0.0, |s| s.2.norm())
    }

    pub fn eval(&self, q: C64, t: &Truncation) -> Result<C64> {
        for &v in &self.theta_den {
            if theta_distance(v, q) < POLE_GUARD {
                return Err(QError::PoleInDenominator(format!(
                    "theta({v}) vanishes in a denominator"
                )));
            }
        }
        let mut val = self.scale * qpoch_ratio_guarded(&self.poch_num, &self.poch_den, q, t, POLE_GUARD)?;
        for &v in &self.theta_num {
            val *= theta_q(v, q, t)?;
        }
        for &v in &self.theta_den {
            val /= theta_q(v, q, t)?;
        }
        if let Some((upper, lower, z)) = &self.series {
            let spec = PhiSpec::new(upper.clone(), lower.clone(), q, *z);
            val *= rphi_guarded(&spec, t, POLE_GUARD)?;
        }
        Ok(val)
    }

    /// Cancellation factor of the series part; 1 without a series.
    pub fn condition(&self, q: C64, t: &Truncation) -> Result<f64> {
        match &self.series {
            Some((upper, lower, z)) => {
                let spec = PhiSpec::new(upper.clone(), lower.clone(), q, *z);
                Ok(rphi_detailed(&spec, t, POLE_GUARD)?.condition())
            }
            None => Ok(1.0),
        }
    }
}

fn pw(base: C64, e: C64) -> Result<C64> {
    cpow(base, e)
}

/// The coefficient with the corrections applied.
pub fn coeff_form(c: Coeff, p: &QParams, x: C64) -> Result<CoeffForm> {
    coeff_form_impl(c, p, x, false)
}

/// The uncorrected variant of the coefficient. Differs from [`coeff_form`] for
/// `S3`, `S4`, `S5` (leading sign), `C2` (two extra denominator products),
/// `J33` (`α₁` in place of `α₂` in one theta argument) and hence `K33`.
pub fn coeff_form_as_printed(c: Coeff, p: &QParams, x: C64) -> Result<CoeffForm> {
    coeff_form_impl(c, p, x, true)
}

pub fn eval_coeff(c: Coeff, p: &QParams, x: C64, t: &Truncation) -> Result<C64> {
    coeff_form(c, p, x)?.eval(p.q, t)
}

pub fn eval_coeff_as_printed(c: Coeff, p: &QParams, x: C64, t: &Truncation) -> Result<C64> {
    coeff_form_as_printed(c, p, x)?.eval(p.q, t)
}

fn coeff_form_impl(c: Coeff, p: &QParams, x: C64, printed: bool) -> Result<CoeffForm> {
    if x.norm() == 0.0 {
        return Err(QError::ZeroArgument("coefficients are evaluated at x != 0".into()));
    }
    let q = p.q;
    let l = p.lambda;
    let ql = p.q_lambda();
    let (a1, a2, b1, b2) = (p.alpha1, p.alpha2, p.beta1, p.beta2);
    let e = l - p.mu_prime;
    let r = a1 * a2 / (b1 * b2);
    let sign = if printed { -one() } else { one() };
    Ok(match c {
        Coeff::K(m, n) => return coeff_form_impl(Coeff::J(m, n), &p.swapped(), x, printed),
        Coeff::J(m, n) => {
            let g = pw(b1, e)?;
            let xl = pw(x, l)?;
            let xe = pw(x, e)?;
            let qe = pw(q, -e)?;
            let b12 = g * pw(b2, -e)?;
            let c12 = a2 / (q * a1);
            match (m, n) {
                (1, 1) => CoeffForm::new(-g * xl).theta(&[b1 * x, a2 / b2, b2 / a1], &[b1 * x / ql, r, a2 / a1]),
                (1, 2) => CoeffForm::new(-c12 * g * xl).theta(&[b1 * x, a2 / b2, b2 / a1], &[b1 * x / ql, r, c12]),
                (1, 3) => CoeffForm::new(-qe * g * xe)
                    .theta(&[b1 * x, ql, a1 * a2 * x / (q * b2)], &[b1 * x / ql, b1 * x / q, r]),
                (2, 1) => CoeffForm::new(-g * xl).theta(
                    &[a1 * x, a2 * x / q, b2 / b1],
                    &[b1 * x / ql, a1 * a2 * x / (q * b1), a2 / a1],
                ),
                (2, 3) => CoeffForm::new(-b12).theta(
                    &[b2 / b1, a1 * a2 * x / (q * b2), b2 * x / ql],
                    &[b1 * x / ql, b1 / b2, a1 * a2 * x / (q * b1)],
                ),
                (3, 1) => CoeffForm::new(-c12 * g * xl).theta(
                    &[b1 * x, a2 / b2, b2 * x / ql],
                    &[b1 / a1, q * b1 * b2 * x / (ql * a2), a2 * x / (q * ql)],
                ),
                (3, 3) => {
                    let slot = if printed { a1 } else { a2 };
                    CoeffForm::new(-g * qe * xe).theta(
                        &[b1 * x, a1 * x, ql * slot / (q * b2)],
                        &[b1 / a1, b1 * x / q, q * b1 * b2 * x / (ql * a2)],
                    )
                }
                (4, 1) => CoeffForm::new(-c12 * g * xl).theta(
                    &[ql, a2 * x / q, b2 / b1],
                    &[b1 / a1, ql * a2 / (q * b1), a2 * x / (q * ql)],
                ),
                (4, 3) => CoeffForm::new(-b12).theta(
                    &[b2 / b1, ql * a2 / (q * b2), b2 / a1],
                    &[b1 / a1, b1 / b2, ql * a2 / (q * b1)],
                ),
                (5, 1) => CoeffForm::new(-g * xl).theta(
                    &[b1 * x, b2 * x / ql, b2 / a1],
                    &[a2 / b1, b1 * b2 * x / (ql * a1), a1 * x / ql],
                ),
                (5, 3) => CoeffForm::new(-qe * g * xe).theta(
                    &[b1 * x, a2 * x / q, ql * a1 / b2],
                    &[b1 * x / q, a2 / b1, b1 * b2 * x / (ql * a1)],
                ),
                (6, 1) => CoeffForm::new(-g * xl).theta(&[ql, a1 * x, b2 / b1], &[a2 / b1, ql * a1 / b1, a1 * x / ql]),
                (6, 3) => {
                    CoeffForm::new(-b12).theta(&[b2 / b1, a2 / b2, ql * a1 / b2], &[b1 / b2, a2 / b1, ql * a1 / b1])
                }
                _ => return Err(QError::InvalidParameters(format!("no coefficient J{m}{n}"))),
            }
        }
        Coeff::S1 => CoeffForm::new(pw(b2, -e)? / (one() - q))
            .poch(&[ql * r, b2 / a1, q * b2 / a2], &[q * ql * a1 / b1, ql * a2 / b1, q]),
        Coeff::S2 => CoeffForm::new(pw(q, -e)? / (one() - q) * pw(x, e)?)
            .poch(&[ql * r, q / ql], &[q * r, q])
            .theta(&[a2 * x / q], &[b1 * b2 * x / (q * ql * a1)]),
        Coeff::A11 => CoeffForm::new(one()).poch(
            &[b1 / a1, a2 / b2, b2 / (ql * a1)],
            &[ql * a2 / b2, b2 / a1, b1 / (ql * a1)],
        ),
        Coeff::A12 => CoeffForm::new(-pw(b2, -e)? / (one() - q)).poch(
            &[b2 / (ql * a1), ql * r, q * b2 / a2, b1 / a1, a2 / b2],
            &[ql * a2 / b2, a2 / b1, b1 / (ql * a1), q * ql * a1 / b1, q],
        ),
        Coeff::K63 => return coeff_form_impl(Coeff::K(6, 3), p, x, printed),
        Coeff::S3 => CoeffForm::new(sign).poch(&[ql * r, q * a1 / b1], &[q * ql * a1 / b1, r]),
        Coeff::S4 => CoeffForm::new(sign).poch(&[b2 / a1, a2 / b1], &[ql * a2 / b1, b2 / (ql * a1)]),
        Coeff::S5 => CoeffForm::new(sign)
            .poch(&[ql * r, q * a1 / b1], &[q * r, ql * a1 / b1])
            .theta(&[b1 * x / ql, b2 * x / q], &[b1 * b2 * x / (q * ql * a1), a1 * x]),
        Coeff::C1 => CoeffForm::new(pw(x, l)?)
            .poch(
                &[b2 / a1, q * b2 / a2, ql, a1 * a2 * x / b1],
                &[q * ql * a1 / b1, one() / r, a2 / b1, b2 * x / ql],
            )
            .phi(&[ql * r, q * a1 / b1, a2 / b1], &[a1 * a2 * x / b1, q * r], q),
        Coeff::C2 => {
            let mut den = vec![q * ql * a1 / b1, ql * a2 / b1, ql * a1 / b2, b2 * x / ql];
            if printed {
                den.extend_from_slice(&[b2 / a1, a2 / b1]);
            }
            CoeffForm::new(pw(x, l)?)
                .poch(&[a1 * x, ql * r, ql, q * b2 / b1], &den)
                .phi(&[b2 / a1, a2 / b1, b2 * x / ql], &[q * b2 / b1, q * b2 / (ql * a1)], q)
        }
        Coeff::C3 => CoeffForm::new(pw(x, l)?)
            .poch(
                &[a2 * x / q, q / ql, a2 / b2],
                &[b1 * b2 * x / (q * ql * a1), q * r, b1 / (ql * a1)],
            )
            .phi(
                &[q * ql / (b1 * x), ql * r, q * a1 / b1],
                &[q * q * ql * a1 / (b1 * b2 * x), q * ql * a1 / b1],
                q,
            ),
    })
}

/// `|f(qx) - f(x)| ≤ tol·(|f(x)| + ε)`.
pub fn check_pseudo_constant<F>(f: F, x: C64, q: C64, tol: f64) -> Result<bool>
where
    F: Fn(C64) -> Result<C64>,
{
    Ok(pseudo_defect(f, x, q)? <= tol)
}

/// `|f(qx) - f(x)| / (|f(x)| + ε)`.
pub fn pseudo_defect<F>(f: F, x: C64, q: C64) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    let a = f(x)?;
    let b = f(q * x)?;
    Ok((b - a).norm() / (a.norm() + f64::MIN_POSITIVE))
}

// ---------------------------------------------------------------------------
// transformation formulas

/// A computed quantity with the scale of its rounding error: `|prefactor| · Σ|term|`
/// for a product times a series, summed over the pieces of a sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub value: C64,
    pub scale: f64,
}

impl Scaled {
    /// `pre · s`; the product itself adds no cancellation.
    pub fn series(pre: C64, s: SeriesValue) -> Self {
        Self {
            value: pre * s.value,
            scale: pre.norm() * s.abs_sum,
        }
    }

    /// A value computed without cancellation, such as a product.
    pub fn exact(value: C64) -> Self {
        Self {
            value,
            scale: value.norm(),
        }
    }

    /// `scale / |value|`, at least 1.
    pub fn condition(&self) -> f64 {
        if self.value.norm() == 0.0 {
            if self.scale == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.scale / self.value.norm()).max(1.0)
        }
    }
}

impl std::ops::Add for Scaled {
    type Output = Scaled;
    fn add(self, o: Scaled) -> Scaled {
        Scaled {
            value: self.value + o.value,
            scale: self.scale + o.scale,
        }
    }
}

impl std::ops::Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled {
            value: -self.value,
            scale: self.scale,
        }
    }
}

fn phi3(pre: C64, upper: [C64; 3], lower: [C64; 2], q: C64, z: C64, t: &Truncation) -> Result<Scaled> {
    let s = rphi_detailed(&PhiSpec::new(upper.to_vec(), lower.to_vec(), q, z), t, 0.0)?;
    Ok(Scaled::series(pre, s))
}

fn gap(lhs: C64, rhs: C64) -> f64 {
    let s = lhs.norm() + rhs.norm();
    if s == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / s
    }
}

/// Both sides of an identity with their rounding scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: Scaled,
    pub rhs: Scaled,
}

impl Sides {
    /// `|L - R| / (|L| + |R|)`.
    pub fn gap(&self) -> f64 {
        gap(self.lhs.value, self.rhs.value)
    }

    /// `|L - R| / max(|L|, |R|)`.
    pub fn rel(&self) -> f64 {
        let s = self.lhs.value.norm().max(self.rhs.value.norm());
        if s == 0.0 {
            0.0
        } else {
            (self.lhs.value - self.rhs.value).norm() / s
        }
    }

    /// Worst cancellation factor of either side. The computed gap is
    /// trustworthy to about `ε` times this.
    pub fn condition(&self) -> f64 {
        self.lhs.condition().max(self.rhs.condition())
    }
}

/// `₃φ₂(a,b,c; d,e; q, de/(abc)) = (b, de/(ab), de/(bc))/(d, e, de/(abc)) · ₃φ₂(d/b, e/b, de/(abc); de/(ab), de/(bc); q, b)`.
pub fn gr_iii10_sides(a: C64, b: C64, c: C64, d: C64, e: C64, q: C64, t: &Truncation) -> Result<Sides> {
    let z = d * e / (a * b * c);
    let lhs = phi3(one(), [a, b, c], [d, e], q, z, t)?;
    let pre = qpoch_ratio(&[b, d * e / (a * b), d * e / (b * c)], &[d, e, z], q, t)?;
    let rhs = phi3(pre, [d / b, e / b, z], [d * e / (a * b), d * e / (b * c)], q, b, t)?;
    Ok(Sides { lhs, rhs })
}

pub fn gr_iii10_check(a: C64, b: C64, c: C64, d: C64, e: C64, q: C64, t: &Truncation) -> Result<f64> {
    Ok(gr_iii10_sides(a, b, c, d, e, q, t)?.gap())
}

/// The two-term expansion of `₃φ₂(a,b,c; d,e; q, de/(abc))` in series with
/// arguments `bq/d` and `de/(abc)`.
pub fn gr_333_sides(a: C64, b: C64, c: C64, d: C64, e: C64, q: C64, t: &Truncation) -> Result<Sides> {
    let z = d * e / (a * b * c);
    let lhs = phi3(one(), [a, b, c], [d, e], q, z, t)?;
    let p1 = qpoch_ratio(
        &[e / b, e / c, c * q / a, q / d],
        &[e, c * q / d, q / a, e / (b * c)],
        q,
        t,
    )?;
    let r1 = phi3(p1, [c, d / a, c * q / e], [c * q / a, b * c * q / e], q, b * q / d, t)?;
    let p2 = qpoch_ratio(
        &[
            q / d,
            e * q / d,
            b,
            c,
            d / a,
            d * e / (b * c * q),
            b * c * q * q / (d * e),
        ],
        &[d / q, e, b * q / d, c * q / d, q / a, e / (b * c), b * c * q / e],
        q,
        t,
    )?;
    let r2 = phi3(p2, [a * q / d, b * q / d, c * q / d], [q * q / d, e * q / d], q, z, t)?;
    Ok(Sides { lhs, rhs: r1 + -r2 })
}

pub fn gr_333_check(a: C64, b: C64, c: C64, d: C64, e: C64, q: C64, t: &Truncation) -> Result<f64> {
    Ok(gr_333_sides(a, b, c, d, e, q, t)?.gap())
}

/// The two-term expansion of `₃φ₂(a,b,c; d,e; q, de/(abc))` in series at argument `q`.
pub fn gr_331_sides(a: C64, b: C64, c: C64, d: C64, e: C64, q: C64, t: &Truncation) -> Result<Sides> {
    let z = d * e / (a * b * c);
    let lhs = phi3(one(), [a, b, c], [d, e], q, z, t)?;
    let p1 = qpoch_ratio(&[e / b, e / c], &[e, e / (b * c)], q, t)?;
    let r1 = phi3(p1, [d / a, b, c], [d, b * c * q / e], q, q, t)?;
    let p2 = qpoch_ratio(&[d / a, b, c, d * e / (b * c)], &[d, e, b * c / e, z], q, t)?;
    let r2 = phi3(p2, [e / b, e / c, z], [d * e / (b * c), e * q / (b * c)], q, q, t)?;
    Ok(Sides { lhs, rhs: r1 + r2 })
}

pub fn gr_331_check(a: C64, b: C64, c: C64, d: C64, e: C64, q: C64, t: &Truncation) -> Result<f64> {
    Ok(gr_331_sides(a, b, c, d, e, q, t)?.gap())
}

/// `Φ⁽¹⁾(a; b, b'; c; q; y, z) = (a, yb, zb')/(c, y, z) · ₃φ₂(c/a, y, z; yb, zb'; q, a)`.
#[allow(clippy::too_many_arguments)]
pub fn andrews_sides(a: C64, b: C64, bp: C64, c: C64, q: C64, y: C64, z: C64, t: &Truncation) -> Result<Sides> {
    let lhs = Scaled::series(one(), qappell_phi1_detailed(a, b, bp, c, q, y, z, t)?);
    let pre = qpoch_ratio(&[a, y * b, z * bp], &[c, y, z], q, t)?;
    let rhs = phi3(pre, [c / a, y, z], [y * b, z * bp], q, a, t)?;
    Ok(Sides { lhs, rhs })
}

#[allow(clippy::too_many_arguments)]
pub fn andrews_check(a: C64, b: C64, bp: C64, c: C64, q: C64, y: C64, z: C64, t: &Truncation) -> Result<f64> {
    Ok(andrews_sides(a, b, bp, c, q, y, z, t)?.gap())
}

// ---------------------------------------------------------------------------
// reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    /// Measured and reported, not asserted.
    #[serde(rename = "INFO")]
    Info,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub point: serde_json::Value,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation_id: String,
    /// Samples actually evaluated.
    pub samples: usize,
    pub max_rel_residual: f64,
    pub failures: Vec<Failure>,
    /// Samples skipped because a participating function is outside its domain.
    pub excluded: usize,
    /// Candidate points the sampler discarded before evaluation.
    #[serde(default)]
    pub rejected: usize,
    pub tolerance: f64,
    pub status: Status,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// A point at which a relation is evaluated.
pub trait SamplePoint: Sync {
    fn describe(&self) -> serde_json::Value;
}

/// `(QParams, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub params: QParams,
    pub x: C64,
}

/// `(VariantParams, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantSample {
    pub params: VariantParams,
    pub x: C64,
}

impl SamplePoint for Sample {
    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

impl SamplePoint for VariantSample {
    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

type EvalFn<P> = Arc<dyn Fn(&P, &Truncation) -> Result<f64> + Send + Sync>;
type AdmitFn<P> = Arc<dyn Fn(&P, &Truncation) -> bool + Send + Sync>;

/// One checkable relation: a residual function and where it may be sampled.
#[derive(Clone)]
pub struct RelationSpec<P> {
    pub id: String,
    pub tolerance: f64,
    /// Reported but not asserted.
    pub info: bool,
    pub eval: EvalFn<P>,
    pub admissible: AdmitFn<P>,
}

impl<P: SamplePoint> RelationSpec<P> {
    pub fn new<E, A>(id: impl Into<String>, tolerance: f64, eval: E, admissible: A) -> Self
    where
        E: Fn(&P, &Truncation) -> Result<f64> + Send + Sync + 'static,
        A: Fn(&P, &Truncation) -> bool + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            tolerance,
            info: false,
            eval: Arc::new(eval),
            admissible: Arc::new(admissible),
        }
    }

    pub fn informational(mut self) -> Self {
        self.info = true;
        self
    }

    /// Narrows the admissible points by a further condition.
    pub fn restricted<A>(mut self, extra: A) -> Self
    where
        A: Fn(&P, &Truncation) -> bool + Send + Sync + 'static,
        P: 'static,
    {
        let base = self.admissible;
        self.admissible = Arc::new(move |p: &P, t: &Truncation| base(p, t) && extra(p, t));
        self
    }

    pub fn run(&self, samples: &[P], t: &Truncation) -> RelationReport {
        let outcomes: Vec<Result<f64>> = samples.par_iter().map(|s| (self.eval)(s, t)).collect();
        let mut report = RelationReport {
            relation_id: self.id.clone(),
            samples: 0,
            max_rel_residual: 0.0,
            failures: Vec::new(),
            excluded: 0,
            rejected: 0,
            tolerance: self.tolerance,
            status: Status::Pass,
        };
        for (s, out) in samples.iter().zip(outcomes) {
            match out {
                Ok(r) if r.is_nan() => {
                    report.samples += 1;
                    report.max_rel_residual = f64::INFINITY;
                    report.failures.push(Failure {
                        point: s.describe(),
                        reason: "residual is NaN".into(),
                    });
                }
                Ok(r) => {
                    report.samples += 1;
                    report.max_rel_residual = report.max_rel_residual.max(r);
                    if r > self.tolerance {
                        report.failures.push(Failure {
                            point: s.describe(),
                            reason: format!("residual {r:.3e} exceeds {:.0e}", self.tolerance),
                        });
                    }
                }
                Err(e) if e.is_domain() => report.excluded += 1,
                Err(e) => {
                    report.samples += 1;
                    report.failures.push(Failure {
                        point: s.describe(),
                        reason: e.to_string(),
                    });
                }
            }
        }
        report.status = if self.info {
            Status::Info
        } else if report.failures.is_empty() && report.samples > 0 {
            Status::Pass
        } else {
            if report.samples == 0 {
                report.failures.push(Failure {
                    point: serde_json::Value::Null,
                    reason: "no admissible samples".into(),
                });
            }
            Status::Fail
        };
        report
    }
}

/// One row per report, header `relation_id,samples,max_rel_residual,status`.
pub fn reports_to_csv(reports: &[RelationReport]) -> String {
    let mut out = String::from("relation_id,samples,max_rel_residual,status\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{:.6e},{}",
            r.relation_id,
            r.samples,
            r.max_rel_residual,
            r.status.as_str()
        );
    }
    out
}

pub fn reports_to_json(reports: &[RelationReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// `|Σ terms| / max |term|`.
pub fn rel_terms(terms: &[C64]) -> f64 {
    let sum: C64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        sum.norm() / scale
    }
}

// ---------------------------------------------------------------------------
// relation catalogue over (QParams, x)

/// Which lattice points around `x` a relation touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Points {
    /// `x` only.
    At,
    /// `x` and `qx`.
    WithShift,
    /// `x/q`, `x`, `qx`.
    Lattice,
}

impl Points {
    fn of(self, x: C64, q: C64) -> Vec<C64> {
        match self {
            Points::At => vec![x],
            Points::WithShift => vec![x, q * x],
            Points::Lattice => vec![x / q, x, q * x],
        }
    }
}

/// True iff every listed family and coefficient is comfortably inside its
/// domain at the listed points.
pub fn robustly_admissible(
    p: &QParams,
    x: C64,
    families: &[FamilyTag],
    coeffs: &[Coeff],
    points: Points,
    t: &Truncation,
) -> bool {
    let q = p.q;
    for y in points.of(x, q) {
        for &tag in families {
            let Ok(cf) = closed_form(tag, p, y) else { return false };
            if cf.arg_value.norm() > 1.0 - SAMPLE_ARG_MARGIN || cf.pole_margin(q) < SAMPLE_POLE_MARGIN {
                return false;
            }
            if !cf.condition(q, t).is_ok_and(|c| c <= SAMPLE_CONDITION_LIMIT) {
                return false;
            }
        }
        for &c in coeffs {
            let Ok(cf) = coeff_form(c, p, y) else { return false };
            if cf.arg_modulus() > 1.0 - SAMPLE_ARG_MARGIN || cf.pole_margin(q) < SAMPLE_POLE_MARGIN {
                return false;
            }
            if !cf.condition(q, t).is_ok_and(|c| c <= SAMPLE_CONDITION_LIMIT) {
                return false;
            }
            if c == Coeff::C2 || c == Coeff::S3 || c == Coeff::S4 {
                // the uncorrected forms have extra denominators
                let Ok(pf) = coeff_form_as_printed(c, p, y) else {
                    return false;
                };
                if pf.pole_margin(q) < SAMPLE_POLE_MARGIN {
                    return false;
                }
            }
        }
    }
    true
}

fn fam(tag: FamilyTag, p: &QParams, x: C64, t: &Truncation) -> Result<C64> {
    eval_solution(
        &SolutionFamily {
            tag,
            params: *p,
            variant: None,
        },
        x,
        t,
    )
}

fn co(c: Coeff, p: &QParams, x: C64, t: &Truncation) -> Result<C64> {
    eval_coeff(c, p, x, t)
}

fn co_printed(c: Coeff, p: &QParams, x: C64, t: &Truncation) -> Result<C64> {
    eval_coeff_as_printed(c, p, x, t)
}

fn q_spec<E>(
    id: impl Into<String>,
    tol: f64,
    families: &[FamilyTag],
    coeffs: &[Coeff],
    points: Points,
    eval: E,
) -> RelationSpec<Sample>
where
    E: Fn(&QParams, C64, &Truncation) -> Result<f64> + Send + Sync + 'static,
{
    let families = families.to_vec();
    let coeffs = coeffs.to_vec();
    RelationSpec::new(
        id,
        tol,
        move |s: &Sample, t| eval(&s.params, s.x, t),
        move |s: &Sample, t| robustly_admissible(&s.params, s.x, &families, &coeffs, points, t),
    )
}

/// Residual of the homogeneous (or nonhomogeneous) `ŷ₁` equation for one family.
pub fn family_residual_spec(tag: FamilyTag, nonhomogeneous: bool) -> RelationSpec<Sample> {
    let id = format!("{}_{}", if nonhomogeneous { "nonhom" } else { "residual" }, tag.name());
    q_spec(id, RELATION_TOL, &[tag], &[], Points::Lattice, move |p, x, t| {
        Ok(residual_special(|y| fam(tag, p, y, t), x, p, nonhomogeneous)?.normalized())
    })
}

/// Homogeneous residual of the difference of two families.
pub fn difference_residual_spec(a: FamilyTag, b: FamilyTag) -> RelationSpec<Sample> {
    let id = format!("diff_{}_{}", a.name(), b.name());
    q_spec(id, RELATION_TOL, &[a, b], &[], Points::Lattice, move |p, x, t| {
        Ok(residual_special(|y| Ok(fam(a, p, y, t)? - fam(b, p, y, t)?), x, p, false)?.normalized())
    })
}

/// `f(qx) = f(x)` for one coefficient.
pub fn pseudo_spec(c: Coeff) -> RelationSpec<Sample> {
    q_spec(
        format!("pseudo_{}", c.name()),
        PSEUDO_TOL,
        &[],
        &[c],
        Points::WithShift,
        move |p, x, t| pseudo_defect(|y| co(c, p, y, t), x, p.q),
    )
}

use FamilyTag::*;

/// `f₃₂ = S₁y_{β₂}`, `f̌₃₂ = Š₁y_{β₁}`, `f₃₅ = S₂(x)y_x`, and pseudo-constancy of `S₂`.
pub fn prop32_specs() -> Vec<RelationSpec<Sample>> {
    vec![
        q_spec(
            "prop32_f32",
            RELATION_TOL,
            &[F32, YBeta2],
            &[Coeff::S1],
            Points::At,
            |p, x, t| {
                Ok(rel_terms(&[
                    fam(F32, p, x, t)?,
                    -co(Coeff::S1, p, x, t)? * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop32_f32_check",
            RELATION_TOL,
            &[F32Check, YBeta1],
            &[],
            Points::At,
            |p, x, t| {
                let s1c = co(Coeff::S1, &p.swapped(), x, t)?;
                Ok(rel_terms(&[fam(F32Check, p, x, t)?, -s1c * fam(YBeta1, p, x, t)?]))
            },
        ),
        q_spec(
            "prop32_f35",
            RELATION_TOL,
            &[F35, YX],
            &[Coeff::S2],
            Points::At,
            |p, x, t| {
                Ok(rel_terms(&[
                    fam(F35, p, x, t)?,
                    -co(Coeff::S2, p, x, t)? * fam(YX, p, x, t)?,
                ]))
            },
        ),
        pseudo_spec(Coeff::S2),
    ]
}

/// `(Š₁ + A₁₂K₆₃)/A₁₁` and `A₁₂/A₁₁`.
fn prop33_xy(p: &QParams, x: C64, t: &Truncation) -> Result<(C64, C64)> {
    let s1c = co(Coeff::S1, &p.swapped(), x, t)?;
    let a11 = co(Coeff::A11, p, x, t)?;
    let a12 = co(Coeff::A12, p, x, t)?;
    let k63 = co(Coeff::K63, p, x, t)?;
    Ok(((s1c + a12 * k63) / a11, a12 / a11))
}

/// The relation expressing `f₃₃` through `y_{β₁}`, `y_{β₂}` (with the sign of
/// the `y_{β₂}` term as it must be), its two intermediate steps, and the
/// vanishing of the `y_{β₁}` coefficient.
pub fn prop33_specs() -> Vec<RelationSpec<Sample>> {
    let k = [Coeff::A11, Coeff::A12, Coeff::K63, Coeff::S1];
    vec![
        q_spec(
            "prop33_f33",
            RELATION_TOL,
            &[F33, YBeta1, YBeta2],
            &k,
            Points::At,
            |p, x, t| {
                let (xc, yc) = prop33_xy(p, x, t)?;
                Ok(rel_terms(&[
                    fam(F33, p, x, t)?,
                    -xc * fam(YBeta1, p, x, t)?,
                    yc * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop33_fc32_f33",
            RELATION_TOL,
            &[F32Check, F33, A2_10],
            &k,
            Points::At,
            |p, x, t| {
                Ok(rel_terms(&[
                    fam(F32Check, p, x, t)?,
                    -co(Coeff::A11, p, x, t)? * fam(F33, p, x, t)?,
                    -co(Coeff::A12, p, x, t)? * fam(A2_10, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop33_yb2_y2_10",
            RELATION_TOL,
            &[YBeta2, YBeta1, A2_10],
            &[Coeff::K63],
            Points::At,
            |p, x, t| {
                Ok(rel_terms(&[
                    fam(YBeta2, p, x, t)?,
                    -fam(A2_10, p, x, t)?,
                    -co(Coeff::K63, p, x, t)? * fam(YBeta1, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop33_yb1_coefficient_vanishes",
            IDENTITY_TOL,
            &[],
            &k,
            Points::At,
            |p, x, t| {
                let s1c = co(Coeff::S1, &p.swapped(), x, t)?;
                let prod = co(Coeff::A12, p, x, t)? * co(Coeff::K63, p, x, t)?;
                Ok(rel_terms(&[s1c, prod]))
            },
        ),
    ]
}

/// The three relations for `f₃₄`, `f₃₇`, `f₃₆`, their three building blocks,
/// and pseudo-constancy of `S₅`.
pub fn prop34_specs() -> Vec<RelationSpec<Sample>> {
    let k33 = [Coeff::A11, Coeff::A12, Coeff::K63, Coeff::S1, Coeff::S3, Coeff::C1];
    vec![
        q_spec(
            "prop34_f33_block",
            RELATION_TOL,
            &[F33, F34],
            &[Coeff::S3, Coeff::C1],
            Points::At,
            |p, x, t| {
                Ok(rel_terms(&[
                    fam(F33, p, x, t)?,
                    -co(Coeff::S3, p, x, t)? * fam(F34, p, x, t)?,
                    -co(Coeff::C1, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop34_f32_block",
            RELATION_TOL,
            &[F32, F37],
            &[Coeff::S4, Coeff::C2],
            Points::At,
            |p, x, t| {
                Ok(rel_terms(&[
                    fam(F32, p, x, t)?,
                    -co(Coeff::S4, p, x, t)? * fam(F37, p, x, t)?,
                    -co(Coeff::C2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop34_f35_block",
            RELATION_TOL,
            &[F35, F36],
            &[Coeff::S5, Coeff::C3],
            Points::At,
            |p, x, t| {
                Ok(rel_terms(&[
                    fam(F35, p, x, t)?,
                    -co(Coeff::C3, p, x, t)?,
                    -co(Coeff::S5, p, x, t)? * fam(F36, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop34_f34",
            RELATION_TOL,
            &[F34, YBeta1, YBeta2],
            &k33,
            Points::At,
            |p, x, t| {
                let (xc, yc) = prop33_xy(p, x, t)?;
                let s3 = co(Coeff::S3, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F34, p, x, t)?,
                    co(Coeff::C1, p, x, t)? / s3,
                    -xc / s3 * fam(YBeta1, p, x, t)?,
                    yc / s3 * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop34_f37",
            RELATION_TOL,
            &[F37, YBeta2],
            &[Coeff::S1, Coeff::S4, Coeff::C2],
            Points::At,
            |p, x, t| {
                let s4 = co(Coeff::S4, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F37, p, x, t)?,
                    co(Coeff::C2, p, x, t)? / s4,
                    -co(Coeff::S1, p, x, t)? / s4 * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "prop34_f36",
            RELATION_TOL,
            &[F36, YX],
            &[Coeff::S2, Coeff::S5, Coeff::C3],
            Points::At,
            |p, x, t| {
                let s5 = co(Coeff::S5, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F36, p, x, t)?,
                    co(Coeff::C3, p, x, t)? / s5,
                    -co(Coeff::S2, p, x, t)? / s5 * fam(YX, p, x, t)?,
                ]))
            },
        ),
        pseudo_spec(Coeff::S5),
    ]
}

/// The uncorrected forms, which do not hold, and the residuals of `f₃₄`, `f₃₆`,
/// `f₃₇` in both versions of the equation. Reported, never asserted.
pub fn printed_info_specs() -> Vec<RelationSpec<Sample>> {
    let k33 = [Coeff::A11, Coeff::A12, Coeff::K63, Coeff::S1, Coeff::S3, Coeff::C1];
    let mut v = vec![
        q_spec(
            "printed_prop33_f33",
            RELATION_TOL,
            &[F33, YBeta1, YBeta2],
            &k33,
            Points::At,
            |p, x, t| {
                let (xc, yc) = prop33_xy(p, x, t)?;
                Ok(rel_terms(&[
                    fam(F33, p, x, t)?,
                    -xc * fam(YBeta1, p, x, t)?,
                    -yc * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "printed_prop34_f33_block",
            RELATION_TOL,
            &[F33, F34],
            &k33,
            Points::At,
            |p, x, t| {
                let s3 = co_printed(Coeff::S3, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F33, p, x, t)?,
                    -s3 * fam(F34, p, x, t)?,
                    -co(Coeff::C1, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "printed_prop34_f32_block",
            RELATION_TOL,
            &[F32, F37],
            &[Coeff::S4, Coeff::C2],
            Points::At,
            |p, x, t| {
                let s4 = co_printed(Coeff::S4, p, x, t)?;
                let c2 = co_printed(Coeff::C2, p, x, t)?;
                Ok(rel_terms(&[fam(F32, p, x, t)?, -s4 * fam(F37, p, x, t)?, -c2]))
            },
        ),
        q_spec(
            "printed_prop34_f35_block",
            RELATION_TOL,
            &[F35, F36],
            &[Coeff::S5, Coeff::C3],
            Points::At,
            |p, x, t| {
                let s5 = co_printed(Coeff::S5, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F35, p, x, t)?,
                    -co(Coeff::C3, p, x, t)?,
                    -s5 * fam(F36, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "printed_prop34_f34",
            RELATION_TOL,
            &[F34, YBeta1, YBeta2],
            &k33,
            Points::At,
            |p, x, t| {
                let (xc, yc) = prop33_xy(p, x, t)?;
                let s3 = co_printed(Coeff::S3, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F34, p, x, t)?,
                    -co(Coeff::C1, p, x, t)? / s3,
                    -xc / s3 * fam(YBeta1, p, x, t)?,
                    yc / s3 * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "printed_prop34_f37",
            RELATION_TOL,
            &[F37, YBeta2],
            &[Coeff::S1, Coeff::S4, Coeff::C2],
            Points::At,
            |p, x, t| {
                let s4 = co_printed(Coeff::S4, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F37, p, x, t)?,
                    -co_printed(Coeff::C2, p, x, t)? / s4,
                    -co(Coeff::S1, p, x, t)? / s4 * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "printed_prop34_f36",
            RELATION_TOL,
            &[F36, YX],
            &[Coeff::S2, Coeff::S5, Coeff::C3],
            Points::At,
            |p, x, t| {
                let s5 = co_printed(Coeff::S5, p, x, t)?;
                Ok(rel_terms(&[
                    fam(F36, p, x, t)?,
                    -co(Coeff::C3, p, x, t)? / s5,
                    -co(Coeff::S2, p, x, t)? / s5 * fam(YX, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "printed_thm41_J3",
            RELATION_TOL,
            &[YBeta1, YAlpha2, YLambda, YX],
            &[Coeff::J(3, 1), Coeff::J(3, 3)],
            Points::At,
            |p, x, t| {
                thm41_terms(
                    p,
                    x,
                    t,
                    YBeta1,
                    Coeff::J(3, 1),
                    (YAlpha2, YLambda),
                    Coeff::J(3, 3),
                    YX,
                    true,
                )
            },
        ),
        q_spec(
            "printed_thm41_K3",
            RELATION_TOL,
            &[YBeta2, YAlpha2, YLambda, YX],
            &[Coeff::K(3, 1), Coeff::K(3, 3)],
            Points::At,
            |p, x, t| {
                thm41_terms(
                    p,
                    x,
                    t,
                    YBeta2,
                    Coeff::K(3, 1),
                    (YAlpha2, YLambda),
                    Coeff::K(3, 3),
                    YX,
                    true,
                )
            },
        ),
    ];
    for tag in [F34, F36, F37] {
        for nonhom in [false, true] {
            v.push(family_residual_spec(tag, nonhom));
        }
    }
    v.into_iter().map(|s| s.informational()).collect()
}

#[allow(clippy::too_many_arguments)]
fn thm41_terms(
    p: &QParams,
    x: C64,
    t: &Truncation,
    lhs: FamilyTag,
    c1: Coeff,
    pair: (FamilyTag, FamilyTag),
    c3: Coeff,
    third: FamilyTag,
    printed: bool,
) -> Result<f64> {
    let ev = |c| {
        if printed {
            co_printed(c, p, x, t)
        } else {
            co(c, p, x, t)
        }
    };
    let k1 = ev(c1)?;
    let k3 = ev(c3)?;
    Ok(rel_terms(&[
        fam(lhs, p, x, t)?,
        -k1 * fam(pair.0, p, x, t)?,
        k1 * fam(pair.1, p, x, t)?,
        -k3 * fam(third, p, x, t)?,
    ]))
}

/// `(id, lhs, first coefficient, difference pair, second coefficient, third family)`.
pub type ConnectionRow = (&'static str, FamilyTag, Coeff, (FamilyTag, FamilyTag), Coeff, FamilyTag);

pub fn theorem41_table() -> Vec<ConnectionRow> {
    use Coeff::{J, K};
    vec![
        ("thm41_J1", YBeta1, J(1, 1), (YAlpha1, YAlpha2), J(1, 3), YX),
        ("thm41_J2", YBeta1, J(2, 1), (YAlpha1, YAlpha2), J(2, 3), YBeta2),
        ("thm41_J3", YBeta1, J(3, 1), (YAlpha2, YLambda), J(3, 3), YX),
        ("thm41_J4", YBeta1, J(4, 1), (YAlpha2, YLambda), J(4, 3), YBeta2),
        ("thm41_J5", YBeta1, J(5, 1), (YAlpha1, YLambda), J(5, 3), YX),
        ("thm41_J6", YBeta1, J(6, 1), (YAlpha1, YLambda), J(6, 3), YBeta2),
        ("thm41_K1", YBeta2, K(1, 1), (YAlpha1, YAlpha2), K(1, 3), YX),
        ("thm41_K3", YBeta2, K(3, 1), (YAlpha2, YLambda), K(3, 3), YX),
        ("thm41_K5", YBeta2, K(5, 1), (YAlpha1, YLambda), K(5, 3), YX),
    ]
}

/// The nine relations with pseudo-constant coefficients.
pub fn theorem41_specs() -> Vec<RelationSpec<Sample>> {
    theorem41_table()
        .into_iter()
        .map(|(id, lhs, c1, pair, c3, third)| {
            q_spec(
                id,
                RELATION_TOL,
                &[lhs, pair.0, pair.1, third],
                &[c1, c3],
                Points::At,
                move |p, x, t| thm41_terms(p, x, t, lhs, c1, pair, c3, third, false),
            )
        })
        .collect()
}

/// Pseudo-constancy of every `J`, `K` (and `J₁,₂`), and `J₁,₁ + J₁,₂ = 0`.
pub fn theorem41_coefficient_specs() -> Vec<RelationSpec<Sample>> {
    let mut v = Vec::new();
    let mut pc: Vec<Coeff> = Coeff::catalogued_j();
    pc.insert(1, Coeff::J(1, 2));
    pc.extend(Coeff::catalogued_k());
    for c in pc {
        v.push(pseudo_spec(c));
    }
    v.push(q_spec(
        "j11_plus_j12",
        IDENTITY_TOL,
        &[],
        &[Coeff::J(1, 1), Coeff::J(1, 2)],
        Points::At,
        |p, x, t| {
            let j11 = co(Coeff::J(1, 1), p, x, t)?;
            let j12 = co(Coeff::J(1, 2), p, x, t)?;
            Ok((j11 + j12).norm() / j11.norm())
        },
    ));
    v
}

fn cor42_coeffs(p: &QParams, x: C64, t: &Truncation) -> Result<(C64, C64)> {
    let j11 = co(Coeff::J(1, 1), p, x, t)?;
    let j13 = co(Coeff::J(1, 3), p, x, t)?;
    let j21 = co(Coeff::J(2, 1), p, x, t)?;
    let j23 = co(Coeff::J(2, 3), p, x, t)?;
    Ok(((j21 - j11) / (j13 * j21), j11 * j23 / (j13 * j21)))
}

/// `(|J₂,₁| + |J₁,₁|) / |J₂,₁ - J₁,₁|` at `x` and `qx`: the two coefficients
/// agree to several digits over much of parameter space.
fn beta1_coeff_condition(p: &QParams, x: C64, t: &Truncation) -> Result<f64> {
    let mut worst = 1.0f64;
    for y in [x, p.q * x] {
        let j11 = co(Coeff::J(1, 1), p, y, t)?;
        let j21 = co(Coeff::J(2, 1), p, y, t)?;
        worst = worst.max((j11.norm() + j21.norm()) / (j21 - j11).norm());
    }
    Ok(worst)
}

/// `y_x` through `y_{β₁}`, `y_{β₂}`, and pseudo-constancy of both coefficients.
pub fn corollary42_specs() -> Vec<RelationSpec<Sample>> {
    let k = [Coeff::J(1, 1), Coeff::J(1, 3), Coeff::J(2, 1), Coeff::J(2, 3)];
    vec![
        q_spec(
            "cor42",
            RELATION_TOL,
            &[YX, YBeta1, YBeta2],
            &k,
            Points::At,
            |p, x, t| {
                let (ca, cb) = cor42_coeffs(p, x, t)?;
                Ok(rel_terms(&[
                    fam(YX, p, x, t)?,
                    -ca * fam(YBeta1, p, x, t)?,
                    -cb * fam(YBeta2, p, x, t)?,
                ]))
            },
        ),
        q_spec(
            "cor42_pseudo_beta1_coeff",
            PSEUDO_TOL,
            &[],
            &k,
            Points::WithShift,
            |p, x, t| pseudo_defect(|y| Ok(cor42_coeffs(p, y, t)?.0), x, p.q),
        )
        .restricted(|s: &Sample, t: &Truncation| {
            beta1_coeff_condition(&s.params, s.x, t).is_ok_and(|c| c <= SAMPLE_CONDITION_LIMIT)
        }),
        q_spec(
            "cor42_pseudo_beta2_coeff",
            PSEUDO_TOL,
            &[],
            &k,
            Points::WithShift,
            |p, x, t| pseudo_defect(|y| Ok(cor42_coeffs(p, y, t)?.1), x, p.q),
        ),
    ]
}

/// `J₁,₃y_x` and the six extra families solve the homogeneous equation; the
/// first step of the derivation splits `y_{β₁}` as `y₁⁽¹⁾ + J₁,₃y_x` with
/// `y₁⁽¹⁾ = J₁,₁y_{α₁} + J₁,₂y_{α₂}`.
pub fn remark41_specs() -> Vec<RelationSpec<Sample>> {
    let mut v = vec![q_spec(
        "remark41_j13_y_x",
        RELATION_TOL,
        &[YX],
        &[Coeff::J(1, 3)],
        Points::Lattice,
        |p, x, t| {
            Ok(residual_special(|y| Ok(co(Coeff::J(1, 3), p, y, t)? * fam(YX, p, y, t)?), x, p, false)?.normalized())
        },
    )];
    for tag in [A1_1, A1_5, A1_9, A2_2, A2_6, A2_10] {
        let mut s = family_residual_spec(tag, false);
        s.id = format!("remark41_{}", tag.name());
        v.push(s);
    }
    v.push(q_spec(
        "remark41_split_y_beta1",
        RELATION_TOL,
        &[YBeta1, A1_1, YX],
        &[Coeff::J(1, 3)],
        Points::At,
        |p, x, t| {
            Ok(rel_terms(&[
                fam(YBeta1, p, x, t)?,
                -fam(A1_1, p, x, t)?,
                -co(Coeff::J(1, 3), p, x, t)? * fam(YX, p, x, t)?,
            ]))
        },
    ));
    v.push(q_spec(
        "remark41_a1_1_alpha_split",
        RELATION_TOL,
        &[A1_1, YAlpha1, YAlpha2],
        &[Coeff::J(1, 1), Coeff::J(1, 2)],
        Points::At,
        |p, x, t| {
            Ok(rel_terms(&[
                fam(A1_1, p, x, t)?,
                -co(Coeff::J(1, 1), p, x, t)? * fam(YAlpha1, p, x, t)?,
                -co(Coeff::J(1, 2), p, x, t)? * fam(YAlpha2, p, x, t)?,
            ]))
        },
    ));
    v
}

pub fn verify_prop32(samples: &[Sample], t: &Truncation) -> Vec<RelationReport> {
    prop32_specs().iter().map(|s| s.run(samples, t)).collect()
}

pub fn verify_prop33(samples: &[Sample], t: &Truncation) -> Vec<RelationReport> {
    prop33_specs().iter().map(|s| s.run(samples, t)).collect()
}

pub fn verify_prop34(samples: &[Sample], t: &Truncation) -> Vec<RelationReport> {
    prop34_specs().iter().map(|s| s.run(samples, t)).collect()
}

pub fn verify_theorem41(samples: &[Sample], t: &Truncation) -> Vec<RelationReport> {
    theorem41_specs()
        .iter()
        .chain(&theorem41_coefficient_specs())
        .map(|s| s.run(samples, t))
        .collect()
}

pub fn verify_corollary42(samples: &[Sample], t: &Truncation) -> Vec<RelationReport> {
    corollary42_specs().iter().map(|s| s.run(samples, t)).collect()
}

pub fn verify_remark41(samples: &[Sample], t: &Truncation) -> Vec<RelationReport> {
    remark41_specs().iter().map(|s| s.run(samples, t)).collect()
}

// ---------------------------------------------------------------------------
// relations over (VariantParams, x)

fn qappell_admissible(vp: &VariantParams, x: C64, t: &Truncation) -> bool {
    let half = C64::new(0.5, 0.0);
    let lim = 1.0 - SAMPLE_ARG_MARGIN;
    let q = vp.q;
    if lattice_distance(vp.qpow(vp.k1 - vp.k2 + 1.0), q) < SAMPLE_POLE_MARGIN {
        return false;
    }
    let Ok(fam) = SolutionFamily::qappell(*vp) else {
        return false;
    };
    [x / q, x, q * x].iter().all(|&y| {
        (vp.qpow(vp.l1 + half) * vp.t1 / y).norm() <= lim
            && (vp.qpow(vp.l2 + half) * vp.t2 / y).norm() <= lim
            && solution_condition(&fam, y, t).is_ok_and(|c| c <= SAMPLE_CONDITION_LIMIT)
    })
}

fn v_spec<E>(
    id: impl Into<String>,
    tol: f64,
    families: &[FamilyTag],
    qappell: bool,
    eval: E,
) -> RelationSpec<VariantSample>
where
    E: Fn(&VariantParams, C64, &Truncation) -> Result<f64> + Send + Sync + 'static,
{
    let families = families.to_vec();
    RelationSpec::new(
        id,
        tol,
        move |s: &VariantSample, t| eval(&s.params, s.x, t),
        move |s: &VariantSample, t| {
            if qappell && !qappell_admissible(&s.params, s.x, t) {
                return false;
            }
            match qparams_from_variant(&s.params) {
                Ok(p) => robustly_admissible(&p, s.x, &families, &[], Points::Lattice, t),
                Err(_) => false,
            }
        },
    )
}

/// `x^{-k₂} y_x(x) / g(x)` equals the closed-form constant.
pub fn prop31_specs() -> Vec<RelationSpec<VariantSample>> {
    vec![v_spec("prop31", RELATION_TOL, &[YX], true, |vp, x, t| {
        let p = qparams_from_variant(vp)?;
        let c = qappell_constant(&p, t)?;
        let lhs = cpow(x, -vp.k2)? * fam(YX, &p, x, t)?;
        let g = eval_qappell_solution(vp, x, t)?;
        Ok(rel_terms(&[lhs, -c * g]))
    })]
}

pub fn verify_prop31(samples: &[VariantSample], t: &Truncation) -> Vec<RelationReport> {
    prop31_specs().iter().map(|s| s.run(samples, t)).collect()
}

/// The q-Appell solution solves the variant equation.
pub fn qappell_residual_spec() -> RelationSpec<VariantSample> {
    v_spec("residual_g_qappell", RELATION_TOL, &[], true, |vp, x, t| {
        Ok(residual_variant(|y| eval_qappell_solution(vp, y, t), x, vp)?.normalized())
    })
}

/// Parameter maps: `x^{-k₂}ŷ` solves the variant equation under the
/// `(α, β, λ)` correspondence; `x^{-λ}ŷ` and `x^{-λ₀}g` solve the normal form;
/// both normal-form parameter sets satisfy `A a₁a₂ = q^{α+1} B b₁b₂`.
pub fn parameter_map_specs() -> (Vec<RelationSpec<VariantSample>>, Vec<RelationSpec<Sample>>) {
    let mut v = Vec::new();
    for tag in [YBeta1, YBeta2, YX] {
        v.push(v_spec(
            format!("map_variant_{}", tag.name()),
            RELATION_TOL,
            &[tag],
            false,
            move |vp, x, t| {
                let p = qparams_from_variant(vp)?;
                Ok(residual_variant(|y| Ok(cpow(y, -vp.k2)? * fam(tag, &p, y, t)?), x, vp)?.normalized())
            },
        ));
    }
    v.push(v_spec(
        "map_normal_form_g_qappell",
        RELATION_TOL,
        &[],
        true,
        |vp, x, t| {
            let fp = fnparams_from_variant(vp);
            Ok(residual_e2(|y| Ok(cpow(y, -fp.lambda0)? * eval_qappell_solution(vp, y, t)?), x, &fp)?.normalized())
        },
    ));
    v.push(v_spec("fn_constraint_variant", 1e-12, &[], false, |vp, _x, _t| {
        Ok(fnparams_from_variant(vp).invariant_residual())
    }));
    let mut q = Vec::new();
    for tag in [YBeta1, YBeta2, YX] {
        q.push(q_spec(
            format!("map_normal_form_{}", tag.name()),
            RELATION_TOL,
            &[tag],
            &[],
            Points::Lattice,
            move |p, x, t| {
                let fp = fnparams_from_qparams(p);
                Ok(residual_e2(|y| Ok(cpow(y, -p.lambda)? * fam(tag, p, y, t)?), x, &fp)?.normalized())
            },
        ));
    }
    q.push(q_spec(
        "fn_constraint_qparams",
        1e-12,
        &[],
        &[],
        Points::At,
        |p, _x, _t| Ok(fnparams_from_qparams(p).invariant_residual()),
    ));
    (v, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;

    fn t() -> Truncation {
        Truncation::default()
    }

    fn params() -> QParams {
        QParams::real(0.5, 0.3, 0.7, 1.9, 2.3, 3.1).unwrap()
    }

    fn other_params() -> QParams {
        QParams::real(0.35, 0.61, 1.3, 0.45, 1.7, 2.2).unwrap()
    }

    fn samples(p: QParams, xs: &[f64]) -> Vec<Sample> {
        xs.iter().map(|&x| Sample { params: p, x: re(x) }).collect()
    }

    fn assert_all_pass(reports: &[RelationReport]) {
        for r in reports {
            assert_eq!(r.status, Status::Pass, "{r:#?}");
            assert!(r.samples > 0);
        }
    }

    #[test]
    fn transformation_formulas_at_fixed_points() {
        let q = re(0.5);
        let (a, b, c, d, e) = (re(0.8), re(0.6), re(0.7), re(0.45), re(0.35));
        assert!(gr_iii10_check(a, b, c, d, e, q, &t()).unwrap() < 1e-12);
        assert!(gr_333_check(a, b, c, d, e, q, &t()).unwrap() < 1e-12);
        assert!(gr_331_check(a, b, c, d, e, q, &t()).unwrap() < 1e-12);
        let z = |re, im| C64::new(re, im);
        let (a3, b3, c3, d3, e3) = (z(0.7, 0.3), z(0.5, 0.2), z(0.8, -0.1), z(0.35, 0.1), z(0.4, -0.05));
        let q3 = z(0.4, 0.2);
        for f in [gr_iii10_check, gr_333_check, gr_331_check] {
            assert!(f(a3, b3, c3, d3, e3, q3, &t()).unwrap() < 1e-12);
        }
        // |b| > 1 makes the right side of the first formula divergent
        assert!(gr_iii10_check(a, re(1.5), c, d, e, q, &t()).is_err());
    }

    #[test]
    fn andrews_formula() {
        let q = re(0.45);
        let (a, b, bp, c) = (re(0.3), re(0.8), C64::new(0.2, 0.5), re(0.6));
        let (y, z) = (re(0.4), C64::new(-0.3, 0.2));
        assert!(andrews_check(a, b, bp, c, q, y, z, &t()).unwrap() < 1e-12);
        assert!(andrews_check(a, b, bp, c, q, y, re(0.0), &t()).unwrap() < 1e-13);
    }

    #[test]
    fn pseudo_constancy_checker() {
        let q = re(0.5);
        assert!(check_pseudo_constant(|_| Ok(re(3.0)), re(1.3), q, 1e-15).unwrap());
        assert!(!check_pseudo_constant(Ok, re(1.3), q, 1e-3).unwrap());
        let p = params();
        let s1 = |x| eval_coeff(Coeff::S1, &p, x, &t());
        assert_eq!(s1(re(0.3)).unwrap(), s1(re(7.0)).unwrap());
        assert!(check_pseudo_constant(|x| eval_coeff(Coeff::S2, &p, x, &t()), re(1.7), p.q, 1e-10).unwrap());
    }

    #[test]
    fn k_coefficients_are_swapped_j() {
        let p = params();
        let x = re(0.77);
        // K₁,₁ typed out with β₁ ↔ β₂
        let (q, a1, a2, b1, b2) = (p.q, p.alpha1, p.alpha2, p.beta1, p.beta2);
        let th = |v| theta_q(v, q, &t()).unwrap();
        let e = p.lambda - p.mu_prime;
        let hand = -cpow(b2, e).unwrap() * cpow(x, p.lambda).unwrap() * th(b2 * x) * th(a2 / b1) * th(b1 / a1)
            / (th(b2 * x / p.q_lambda()) * th(a1 * a2 / (b1 * b2)) * th(a2 / a1));
        let k11 = eval_coeff(Coeff::K(1, 1), &p, x, &t()).unwrap();
        assert!((hand - k11).norm() < 1e-13 * k11.norm());
        // K₆,₃ of the f₃₃ relation is the swapped J₆,₃
        assert_eq!(
            eval_coeff(Coeff::K63, &p, x, &t()),
            eval_coeff(Coeff::K(6, 3), &p, x, &t())
        );
    }

    #[test]
    fn theorem_relations_at_fixed_points() {
        for p in [params(), other_params()] {
            assert_all_pass(&verify_theorem41(&samples(p, &[0.77, 1.9]), &t()));
            assert_all_pass(&verify_corollary42(&samples(p, &[0.77, 1.9]), &t()));
        }
    }

    #[test]
    fn printed_j33_fails() {
        let reports: Vec<_> = printed_info_specs()
            .iter()
            .filter(|s| s.id.starts_with("printed_thm41"))
            .map(|s| s.run(&samples(params(), &[0.77, 1.9]), &t()))
            .collect();
        for r in reports {
            assert_eq!(r.status, Status::Info);
            assert!(r.max_rel_residual > 1e-3, "{r:?}");
        }
    }

    #[test]
    fn propositions_at_fixed_points() {
        let p = params();
        // f35 lives at larger x
        for s in prop32_specs() {
            let xs: &[f64] = if s.id.contains("f35") || s.id.contains("S2") {
                &[1.5, 2.5]
            } else {
                &[0.2, 0.25]
            };
            assert_eq!(s.run(&samples(p, xs), &t()).status, Status::Pass, "{}", s.id);
        }
        assert_all_pass(&verify_prop33(&samples(p, &[0.2, 0.15]), &t()));
        let (small, large): (Vec<_>, Vec<_>) = prop34_specs()
            .into_iter()
            .partition(|s| !(s.id.contains("f35") || s.id.contains("f36") || s.id.contains("S5")));
        for s in small {
            assert_eq!(s.run(&samples(p, &[0.2, 0.15]), &t()).status, Status::Pass, "{}", s.id);
        }
        for s in large {
            assert_eq!(s.run(&samples(p, &[1.5, 2.5]), &t()).status, Status::Pass, "{}", s.id);
        }
    }

    #[test]
    fn printed_proposition_forms_fail() {
        let p = params();
        for s in printed_info_specs().iter().filter(|s| s.id.starts_with("printed_prop")) {
            let xs: &[f64] = if s.id.contains("f35") || s.id.contains("f36") {
                &[1.5, 2.5]
            } else {
                &[0.2, 0.15]
            };
            let r = s.run(&samples(p, xs), &t());
            assert!(r.samples > 0 && r.max_rel_residual > 1e-3, "{r:?}");
        }
    }

    #[test]
    fn remark_relations_at_fixed_points() {
        let p = params();
        let specs = remark41_specs();
        let run = |id: &str, p: QParams, xs: &[f64]| {
            let s = specs.iter().find(|s| s.id == id).unwrap();
            let r = s.run(&samples(p, xs), &t());
            assert_eq!(r.status, Status::Pass, "{r:#?}");
        };
        run("remark41_j13_y_x", p, &[1.3, 2.7]);
        run("remark41_split_y_beta1", p, &[1.3, 2.7]);
        run("remark41_a1_1_alpha_split", p, &[1.3, 2.7]);
        run("remark41_a1_1", p, &[2.0, 3.3]);
        run("remark41_a2_6", p, &[0.1, 0.15]);
        run(
            "remark41_a2_2",
            QParams::real(0.45, 0.4, 1.6, 2.2, 0.9, 2.7).unwrap(),
            &[1.3, 2.9],
        );
    }

    #[test]
    fn variant_relations_at_fixed_points() {
        let vp = VariantParams::real(0.5, 0.3, -0.2, 0.4, 0.1, 0.7, 0.25, 1.3, 0.8).unwrap();
        let vs: Vec<_> = [3.0, 5.0]
            .iter()
            .map(|&x| VariantSample { params: vp, x: re(x) })
            .collect();
        for r in verify_prop31(&vs, &t()) {
            assert_eq!(r.status, Status::Pass, "{r:#?}");
        }
        assert_eq!(qappell_residual_spec().run(&vs, &t()).status, Status::Pass);
        let (v, q) = parameter_map_specs();
        for s in v {
            assert_eq!(s.run(&vs, &t()).status, Status::Pass, "{}", s.id);
        }
        for s in q {
            assert_eq!(
                s.run(&samples(params(), &[0.8, 3.0]), &t()).status,
                Status::Pass,
                "{}",
                s.id
            );
        }
    }

    #[test]
    fn reports_serialize() {
        let r = verify_prop32(&samples(params(), &[0.2]), &t());
        let csv = reports_to_csv(&r);
        assert!(csv.starts_with("relation_id,samples,max_rel_residual,status\n"));
        assert_eq!(csv.lines().count(), r.len() + 1);
        let back: Vec<RelationReport> = serde_json::from_str(&reports_to_json(&r)).unwrap();
        assert_eq!(back.len(), r.len());
        // no samples at all is a failure, not a pass
        let empty = prop32_specs()[0].run(&[], &t());
        assert_eq!(empty.status, Status::Fail);
    }

    #[test]
    fn admissibility_rejects_near_poles() {
        let p = params();
        // x next to the zero of ϑ(q^{-λ}β₁x) in J₁,₁'s denominator
        let x = p.q_lambda() / p.beta1 * (1.0 + 1e-5);
        assert!(!robustly_admissible(&p, x, &[], &[Coeff::J(1, 1)], Points::At, &t()));
        assert!(robustly_admissible(
            &p,
            re(0.77),
            &[YBeta1],
            &[Coeff::J(1, 1)],
            Points::At,
            &t()
        ));
    }
}
