//! q-Pochhammer symbols, basic hypergeometric series, theta functions and the
//! q-Appell double series `Φ⁽¹⁾`.
//!
//! Everything here is a pure function of its inputs. Infinite objects are
//! truncated according to a [`Truncation`] policy; a factor `1 - a·q^j` that
//! vanishes to within a few ulps is treated as an exact zero so that products
//! such as `(q^{-n}; q)_∞` come out as `0` instead of rounding noise.

use crate::error::{QError, Result};
use crate::truncation::{TailCounter, Truncation};
use crate::C64;

/// Factors `1 - u` with `|1 - u| <= ZERO_SNAP * max(1, |u|)` are exact zeros.
pub const ZERO_SNAP: f64 = 64.0 * f64::EPSILON;

/// Checks `0 < |q| < 1`.
pub fn check_q(q: C64) -> Result<()> {
    let m = q.norm();
    if !(m > 0.0 && m < 1.0) {
        return Err(QError::ModulusOfQOutOfRange(m));
    }
    Ok(())
}

#[inline]
fn factor(u: C64) -> (C64, bool) {
    let f = C64::new(1.0, 0.0) - u;
    let zero = f.norm() <= ZERO_SNAP * u.norm().max(1.0);
    (f, zero)
}

/// Finite q-Pochhammer symbol `(a; q)_n = ∏_{j<n} (1 - a q^j)`.
pub fn qpoch_finite(a: C64, q: C64, n: usize) -> C64 {
    let mut prod = C64::new(1.0, 0.0);
    let mut u = a;
    for _ in 0..n {
        let (f, zero) = factor(u);
        if zero {
            return C64::new(0.0, 0.0);
        }
        prod *= f;
        u *= q;
    }
    prod
}

/// Infinite q-Pochhammer symbol `(a; q)_∞`.
pub fn qpoch_infinite(a: C64, q: C64, t: &Truncation) -> Result<C64> {
    qpoch_ratio(&[a], &[], q, t)
}

/// Order of a Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PochOrder {
    Finite(usize),
    Infinite,
}

/// Multi-parameter symbol `(a_1, …, a_N; q)_n`.
pub fn qpoch_multi(params: &[C64], q: C64, order: PochOrder, t: &Truncation) -> Result<C64> {
    if params.is_empty() {
        return Err(QError::InvalidParameters(
            "qpoch_multi needs at least one parameter".into(),
        ));
    }
    match order {
        PochOrder::Finite(n) => Ok(params.iter().map(|&a| qpoch_finite(a, q, n)).product()),
        PochOrder::Infinite => qpoch_ratio(params, &[], q, t),
    }
}

/// Ratio `(num_1, …; q)_∞ / (den_1, …; q)_∞` evaluated factor by factor.
///
/// Pairing the factors keeps lattice-shifted arguments of large modulus from
/// overflowing. A vanishing denominator factor is a [`QError::PoleInDenominator`].
pub fn qpoch_ratio(num: &[C64], den: &[C64], q: C64, t: &Truncation) -> Result<C64> {
    qpoch_ratio_guarded(num, den, q, t, 0.0)
}

/// Like [`qpoch_ratio`], but also rejects denominator factors with modulus below `guard`.
pub fn qpoch_ratio_guarded(num: &[C64], den: &[C64], q: C64, t: &Truncation, guard: f64) -> Result<C64> {
    check_q(q)?;
    let small = t.rel_tol * (1.0 - q.norm());
    let mut un: Vec<C64> = num.to_vec();
    let mut ud: Vec<C64> = den.to_vec();
    let mut prod = C64::new(1.0, 0.0);
    let mut vanished = false;
    let mut tail = TailCounter::new(t.tail_window);
    for j in 0..t.max_terms {
        let mut all_small = true;
        for u in un.iter_mut() {
            let (f, zero) = factor(*u);
            if zero {
                vanished = true;
            } else if !vanished {
                prod *= f;
            }
            all_small &= u.norm() < small;
            *u *= q;
        }
        for u in ud.iter_mut() {
            let (f, zero) = factor(*u);
            if zero || f.norm() < guard {
                return Err(QError::PoleInDenominator(format!(
                    "factor 1 - {:?}·q^{} = {:.3e} in denominator",
                    *u / q.powu(j as u32).max_nonzero(),
                    j,
                    f.norm()
                )));
            }
            if !vanished {
                prod /= f;
            }
            all_small &= u.norm() < small;
            *u *= q;
        }
        if tail.push(all_small) {
            return Ok(if vanished { C64::new(0.0, 0.0) } else { prod });
        }
        if !vanished && !prod.is_finite() {
            return Err(QError::TruncationFailure("Pochhammer product overflowed".into()));
        }
    }
    Err(QError::TruncationFailure(format!(
        "Pochhammer product did not settle within {} factors",
        t.max_terms
    )))
}

trait NonZero {
    fn max_nonzero(self) -> C64;
}

impl NonZero for C64 {
    fn max_nonzero(self) -> C64 {
        if self.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            self
        }
    }
}

/// Smallest `n >= 0` (up to `limit`) with `1 - a q^n` vanishing, if any.
pub fn lattice_index(a: C64, q: C64, limit: usize) -> Option<usize> {
    let mut u = a;
    for n in 0..limit {
        if factor(u).1 {
            return Some(n);
        }
        if u.norm() < 0.25 {
            return None;
        }
        u *= q;
    }
    None
}

/// Minimum of `|1 - b q^j|` over `j >= 0`: the distance of `b` from the lattice `{q^{-n}}`.
pub fn lattice_distance(b: C64, q: C64) -> f64 {
    let mut u = b;
    let mut best = f64::INFINITY;
    for _ in 0..100_000 {
        best = best.min((C64::new(1.0, 0.0) - u).norm());
        if u.norm() < 0.25 || u.norm() * q.norm() < 1e-300 {
            break;
        }
        u *= q;
    }
    best
}

/// Parameters of `rφ_{r-1}(a_1, …, a_r; b_1, …, b_{r-1}; q, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSpec {
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub q: C64,
    pub z: C64,
}

impl PhiSpec {
    pub fn new(upper: Vec<C64>, lower: Vec<C64>, q: C64, z: C64) -> Self {
        Self { upper, lower, q, z }
    }
}

/// Basic hypergeometric series `rφ_{r-1}`.
pub fn rphi(spec: &PhiSpec, t: &Truncation) -> Result<C64> {
    rphi_guarded(spec, t, 0.0)
}

/// [`rphi`] that also rejects lower-parameter factors of modulus below `guard`.
pub fn rphi_guarded(spec: &PhiSpec, t: &Truncation, guard: f64) -> Result<C64> {
    rphi_detailed(spec, t, guard).map(|s| s.value)
}

/// A series value together with `Σ |term|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: C64,
    pub abs_sum: f64,
}

impl SeriesValue {
    /// `Σ|term| / |Σ term|`. Rounding leaves about `ε · condition` relative
    /// accuracy; infinite when the sum is exactly zero.
    pub fn condition(&self) -> f64 {
        if self.value.norm() == 0.0 {
            if self.abs_sum == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.abs_sum / self.value.norm()).max(1.0)
        }
    }
}

/// [`rphi_guarded`] that also accumulates `Σ |term|`.
pub fn rphi_detailed(spec: &PhiSpec, t: &Truncation, guard: f64) -> Result<SeriesValue> {
    let PhiSpec { upper, lower, q, z } = spec;
    let (q, z) = (*q, *z);
    check_q(q)?;
    if upper.len() != lower.len() + 1 {
        return Err(QError::InvalidParameters(format!(
            "rφ(r-1) needs r upper and r-1 lower parameters (got {} and {})",
            upper.len(),
            lower.len()
        )));
    }
    let terminating = upper.iter().filter_map(|&a| lattice_index(a, q, t.max_terms)).min();
    if terminating.is_none() && z.norm() >= 1.0 {
        return Err(QError::DivergentSeries(format!(
            "non-terminating series with |z| = {} >= 1",
            z.norm()
        )));
    }
    let done = |value: C64, abs_sum: f64| Ok(SeriesValue { value, abs_sum });
    if z.norm() == 0.0 {
        return done(C64::new(1.0, 0.0), 1.0);
    }
    let small = t.rel_tol * (1.0 - z.norm()).clamp(1e-3, 1.0);
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut abs_sum = 1.0;
    let mut qn = C64::new(1.0, 0.0);
    let mut tail = TailCounter::new(t.tail_window);
    for n in 0..t.max_terms {
        if terminating == Some(n) {
            return done(sum, abs_sum);
        }
        let mut ratio = z / (C64::new(1.0, 0.0) - qn * q);
        for &a in upper {
            ratio *= C64::new(1.0, 0.0) - a * qn;
        }
        for &b in lower {
            let (f, zero) = factor(b * qn);
            if zero || f.norm() < guard {
                return Err(QError::PoleInDenominator(format!(
                    "lower parameter {b} hits the lattice q^-{n}"
                )));
            }
            ratio /= f;
        }
        term *= ratio;
        sum += term;
        abs_sum += term.norm();
        qn *= q;
        if !sum.is_finite() {
            return Err(QError::TruncationFailure("rφ partial sum overflowed".into()));
        }
        if terminating.is_none() && tail.push(term.norm() <= small * sum.norm()) {
            return done(sum, abs_sum);
        }
    }
    Err(QError::TruncationFailure(format!(
        "rφ did not converge within {} terms",
        t.max_terms
    )))
}

/// Jacobi theta function `ϑ_q(x) = (x, q/x, q; q)_∞`.
pub fn theta_q(x: C64, q: C64, t: &Truncation) -> Result<C64> {
    if x.norm() == 0.0 {
        return Err(QError::ZeroArgument("ϑ_q(0) is undefined".into()));
    }
    qpoch_ratio(&[x, q / x, q], &[], q, t)
}

/// q-Appell series
/// `Φ⁽¹⁾(a; b, b'; c; q; y, z) = Σ_{m,n} (a)_{m+n}(b)_m(b')_n / ((c)_{m+n}(q)_m(q)_n) y^m z^n`,
/// summed along anti-diagonals `m + n = d`.
#[allow(clippy::too_many_arguments)]
pub fn qappell_phi1(a: C64, b: C64, bp: C64, c: C64, q: C64, y: C64, z: C64, t: &Truncation) -> Result<C64> {
    qappell_phi1_detailed(a, b, bp, c, q, y, z, t).map(|s| s.value)
}

/// [`qappell_phi1`] that also accumulates `Σ |term|` over both indices.
#[allow(clippy::too_many_arguments)]
pub fn qappell_phi1_detailed(
    a: C64,
    b: C64,
    bp: C64,
    c: C64,
    q: C64,
    y: C64,
    z: C64,
    t: &Truncation,
) -> Result<SeriesValue> {
    check_q(q)?;
    let rho = y.norm().max(z.norm());
    if rho >= 1.0 {
        return Err(QError::DivergentSeries(format!(
            "q-Appell series needs |y|, |z| < 1 (got {}, {})",
            y.norm(),
            z.norm()
        )));
    }
    let one = C64::new(1.0, 0.0);
    let small = t.rel_tol * (1.0 - rho).clamp(1e-3, 1.0);
    // u[m] = (b)_m y^m / (q)_m, v[n] = (b')_n z^n / (q)_n
    let mut u = vec![one];
    let mut v = vec![one];
    let mut outer = one; // (a)_d / (c)_d
    let mut sum = one;
    let mut abs_sum = 1.0;
    let mut qd = one;
    let mut tail = TailCounter::new(t.tail_window);
    for d in 1..t.max_terms {
        let (cf, zero) = factor(c * qd);
        if zero {
            return Err(QError::PoleInDenominator(format!(
                "c = {c} hits the lattice q^-{}",
                d - 1
            )));
        }
        outer *= (one - a * qd) / cf;
        let um = u[d - 1] * (one - b * qd) * y / (one - qd * q);
        let vn = v[d - 1] * (one - bp * qd) * z / (one - qd * q);
        u.push(um);
        v.push(vn);
        qd *= q;
        let diag: C64 = (0..=d).map(|m| u[m] * v[d - m]).sum();
        let term = outer * diag;
        sum += term;
        abs_sum += outer.norm() * (0..=d).map(|m| (u[m] * v[d - m]).norm()).sum::<f64>();
        if !sum.is_finite() {
            return Err(QError::TruncationFailure("q-Appell partial sum overflowed".into()));
        }
        if tail.push(term.norm() <= small * sum.norm()) {
            return Ok(SeriesValue { value: sum, abs_sum });
        }
    }
    Err(QError::TruncationFailure(format!(
        "q-Appell series did not converge within {} diagonals",
        t.max_terms
    )))
}

/// Principal-branch power `x^e = exp(e · Log x)`.
pub fn cpow(x: C64, e: C64) -> Result<C64> {
    if x.norm() == 0.0 {
        return Err(QError::ZeroBase);
    }
    if e == C64::new(0.0, 0.0) {
        return Ok(C64::new(1.0, 0.0));
    }
    if e == C64::new(1.0, 0.0) {
        return Ok(x);
    }
    Ok((e * x.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;
    use std::f64::consts::PI;

    fn tr() -> Truncation {
        Truncation::default()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn finite_pochhammer_values() {
        assert_eq!(qpoch_finite(re(0.7), re(0.5), 0), re(1.0));
        assert_eq!(qpoch_finite(re(1.0), re(0.5), 3), re(0.0));
        assert!(close(qpoch_finite(re(0.5), re(0.5), 2), re(0.375), 1e-15));
    }

    #[test]
    fn infinite_pochhammer_values() {
        let t = tr();
        assert_eq!(qpoch_infinite(re(0.0), re(0.5), &t).unwrap(), re(1.0));
        assert_eq!(qpoch_infinite(re(2.0), re(0.5), &t).unwrap(), re(0.0));
        // (0.5; 0.5)_∞ from a plain loop of 200 factors
        let mut oracle = 1.0f64;
        for j in 0..200 {
            oracle *= 1.0 - 0.5f64.powi(j + 1);
        }
        let v = qpoch_infinite(re(0.5), re(0.5), &t).unwrap();
        assert!(close(v, re(oracle), 1e-14));
        let w = qpoch_infinite(re(0.5), re(0.5), &t).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn q_modulus_errors() {
        let t = tr();
        assert!(matches!(
            qpoch_infinite(re(0.3), re(1.0), &t),
            Err(QError::ModulusOfQOutOfRange(_))
        ));
        assert!(matches!(
            qpoch_infinite(re(0.3), re(0.0), &t),
            Err(QError::ModulusOfQOutOfRange(_))
        ));
        let tight = Truncation::new(1e-14, 5, 5).unwrap();
        assert!(matches!(
            qpoch_infinite(re(0.3), re(0.9), &tight),
            Err(QError::TruncationFailure(_))
        ));
    }

    #[test]
    fn multi_pochhammer() {
        let t = tr();
        let q = re(0.5);
        assert_eq!(
            qpoch_multi(&[re(0.0), re(0.0)], q, PochOrder::Infinite, &t).unwrap(),
            re(1.0)
        );
        assert_eq!(
            qpoch_multi(&[re(0.3)], q, PochOrder::Finite(4), &t).unwrap(),
            qpoch_finite(re(0.3), q, 4)
        );
        let v = qpoch_multi(&[re(0.3), re(0.6)], q, PochOrder::Finite(2), &t).unwrap();
        let direct = (1.0 - 0.3) * (1.0 - 0.15) * (1.0 - 0.6) * (1.0 - 0.3);
        assert!(close(v, re(direct), 1e-15));
        assert!(qpoch_multi(&[], q, PochOrder::Infinite, &t).is_err());
    }

    #[test]
    fn rphi_trivial_cases() {
        let t = tr();
        let q = re(0.5);
        let s = PhiSpec::new(vec![re(0.3), re(0.2)], vec![re(0.7)], q, re(0.0));
        assert_eq!(rphi(&s, &t).unwrap(), re(1.0));
        let s = PhiSpec::new(vec![re(1.0), re(0.2)], vec![re(0.7)], q, re(0.9));
        assert_eq!(rphi(&s, &t).unwrap(), re(1.0));
    }

    #[test]
    fn q_binomial_theorem() {
        let t = tr();
        let (a, q, z) = (re(0.3), re(0.5), re(0.4));
        let lhs = rphi(&PhiSpec::new(vec![a], vec![], q, z), &t).unwrap();
        let rhs = qpoch_ratio(&[a * z], &[z], q, &t).unwrap();
        assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn rphi_errors() {
        let t = tr();
        let q = re(0.5);
        let s = PhiSpec::new(vec![re(0.3), re(0.2)], vec![re(0.7)], q, re(1.2));
        assert!(matches!(rphi(&s, &t), Err(QError::DivergentSeries(_))));
        let s = PhiSpec::new(vec![re(0.3), re(0.2)], vec![re(4.0)], q, re(0.5));
        assert!(matches!(rphi(&s, &t), Err(QError::PoleInDenominator(_))));
        let s = PhiSpec::new(vec![re(0.3)], vec![re(4.0)], q, re(0.5));
        assert!(matches!(rphi(&s, &t), Err(QError::InvalidParameters(_))));
        // terminating with |z| > 1 is fine
        let s = PhiSpec::new(vec![re(4.0), re(0.2)], vec![re(0.7)], q, re(3.0));
        assert!(rphi(&s, &t).is_ok());
    }

    #[test]
    fn theta_zeros_symmetry_and_quasi_periodicity() {
        let t = tr();
        let q = re(0.5);
        for m in 0..4 {
            assert_eq!(theta_q(q.powi(-m), q, &t).unwrap(), re(0.0));
        }
        let x = C64::new(0.3, 0.1);
        let a = theta_q(x, q, &t).unwrap();
        assert!(close(a, theta_q(q / x, q, &t).unwrap(), 1e-14));
        let b = theta_q(q * x, q, &t).unwrap();
        assert!(close(b, -a / x, 1e-12));
        assert!(matches!(theta_q(re(0.0), q, &t), Err(QError::ZeroArgument(_))));
    }

    #[test]
    fn qappell_reduces_to_2phi1() {
        let t = tr();
        let q = re(0.4);
        let (a, b, c, y) = (re(0.3), re(-0.6), re(0.45), re(0.7));
        assert_eq!(qappell_phi1(a, b, b, c, q, re(0.0), re(0.0), &t).unwrap(), re(1.0));
        let v = qappell_phi1(a, b, re(0.2), c, q, y, re(0.0), &t).unwrap();
        let w = rphi(&PhiSpec::new(vec![a, b], vec![c], q, y), &t).unwrap();
        assert!(close(v, w, 1e-13));
        assert!(matches!(
            qappell_phi1(a, b, b, c, q, re(1.0), re(0.1), &t),
            Err(QError::DivergentSeries(_))
        ));
        assert!(matches!(
            qappell_phi1(a, b, b, re(1.0 / 0.16), q, re(0.2), re(0.1), &t),
            Err(QError::PoleInDenominator(_))
        ));
    }

    #[test]
    fn complex_power() {
        let x = C64::new(0.2, -1.3);
        assert_eq!(cpow(x, re(0.0)).unwrap(), re(1.0));
        assert_eq!(cpow(x, re(1.0)).unwrap(), x);
        let w = C64::from_polar(1.0, PI / 4.0);
        assert!(close(cpow(w, re(2.0)).unwrap(), C64::from_polar(1.0, PI / 2.0), 1e-15));
        assert_eq!(cpow(re(0.0), re(0.5)), Err(QError::ZeroBase));
    }

    #[test]
    fn lattice_helpers() {
        let q = re(0.5);
        assert_eq!(lattice_index(re(8.0), q, 100), Some(3));
        assert_eq!(lattice_index(re(0.3), q, 100), None);
        assert!(lattice_distance(re(8.0), q) < 1e-14);
        assert!((lattice_distance(re(3.0), q) - 0.25).abs() < 1e-15);
    }
}
