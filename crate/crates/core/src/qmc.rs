//! q-convolution and q-middle convolution on tuples
//! `(B_∞; B₁, …, B_N)` with poles `b₁, …, b_N`, plus the elimination of a
//! 2×2 system to a scalar three-term equation.

use nalgebra::{DMatrix, DVector};

use crate::error::{QError, Result};
use crate::jackson::{jackson_integral, weight_over_pole, weight_y, QParams};
use crate::poly::Poly;
use crate::qseries::{check_q, cpow, qpoch_ratio};
use crate::truncation::{BilateralTruncation, Truncation};
use crate::variant::ScalarQDiffEq;
use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative threshold for numerical kernels.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;

/// `(B_∞; B₁, …, B_N)` with poles `b₁, …, b_N` and derived `B₀ = I - B_∞ - Σ B_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    pub m: usize,
    pub b_inf: CMatrix,
    pub blocks: Vec<CMatrix>,
    pub poles: Vec<C64>,
    pub b0: CMatrix,
}

impl MatrixTuple {
    pub fn new(b_inf: CMatrix, blocks: Vec<CMatrix>, poles: Vec<C64>) -> Result<Self> {
        let m = b_inf.nrows();
        if m == 0 || b_inf.ncols() != m {
            return Err(QError::InvalidParameters(
                "B_inf must be a nonempty square matrix".into(),
            ));
        }
        if blocks.is_empty() || blocks.len() != poles.len() {
            return Err(QError::InvalidParameters(format!(
                "need N >= 1 blocks and as many poles (got {} and {})",
                blocks.len(),
                poles.len()
            )));
        }
        if blocks.iter().any(|b| b.nrows() != m || b.ncols() != m) {
            return Err(QError::InvalidParameters("every block must be m x m".into()));
        }
        for (i, &b) in poles.iter().enumerate() {
            if b.norm() == 0.0 || !b.is_finite() {
                return Err(QError::InvalidParameters(format!("pole b{} must be nonzero", i + 1)));
            }
            for &c in &poles[..i] {
                if (b - c).norm() <= 1e-14 * b.norm().max(c.norm()) {
                    return Err(QError::InvalidParameters("poles must be pairwise distinct".into()));
                }
            }
        }
        let all_finite = b_inf
            .iter()
            .chain(blocks.iter().flat_map(|b| b.iter()))
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(QError::InvalidParameters("matrix entries must be finite".into()));
        }
        let mut b0 = CMatrix::identity(m, m) - &b_inf;
        for b in &blocks {
            b0 -= b;
        }
        Ok(Self {
            m,
            b_inf,
            blocks,
            poles,
            b0,
        })
    }

    pub fn n_poles(&self) -> usize {
        self.blocks.len()
    }

    /// The tuple of the first-order equation `y(qx) = B(x) y(x)` solved by
    /// `y(x) = (α₁x, α₂x; q)_∞ / (β₁x, β₂x; q)_∞`.
    pub fn degree2(p: &QParams) -> Self {
        let (bi, b1, b2) = p.b_coeffs();
        let one = |v: C64| CMatrix::from_element(1, 1, v);
        Self::new(one(bi), vec![one(b1), one(b2)], vec![1.0 / p.alpha1, 1.0 / p.alpha2])
            .expect("alpha1 != alpha2 is checked by QParams")
    }

    /// `B(x) = B_∞ + Σ B_i / (1 - x/b_i)`.
    pub fn eval(&self, x: C64) -> CMatrix {
        let mut out = self.b_inf.clone();
        for (b, &pole) in self.blocks.iter().zip(&self.poles) {
            out += b * (C64::new(1.0, 0.0) / (1.0 - x / pole));
        }
        out
    }

    /// Every matrix of the tuple, `B_∞` first.
    pub fn matrices(&self) -> impl Iterator<Item = &CMatrix> {
        std::iter::once(&self.b_inf).chain(self.blocks.iter())
    }
}

/// Orthonormal basis of a subspace of `ℂ^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub dim_ambient: usize,
    pub vectors: Vec<CVector>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Basis vectors as columns of an `n × dim` matrix.
    pub fn as_matrix(&self) -> CMatrix {
        if self.vectors.is_empty() {
            return CMatrix::zeros(self.dim_ambient, 0);
        }
        CMatrix::from_columns(&self.vectors)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let q = self.as_matrix();
        let g = q.adjoint() * &q;
        let n = g.nrows();
        (g - CMatrix::identity(n, n))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Orthonormal basis of the numerical kernel of `m`: right singular vectors
/// whose singular value is below `tol · σ_max` (or `tol` if `m = 0`).
pub fn nullspace(m: &CMatrix, tol: f64) -> SubspaceBasis {
    nullspace_scaled(m, tol, 0.0)
}

/// As [`nullspace`] with threshold `tol · max(σ_max, scale)`, so a block that is
/// rounding noise relative to the surrounding tuple counts as zero.
pub fn nullspace_scaled(m: &CMatrix, tol: f64, scale: f64) -> SubspaceBasis {
    let n = m.ncols();
    if n == 0 {
        return SubspaceBasis {
            dim_ambient: 0,
            vectors: Vec::new(),
        };
    }
    let rows = m.nrows().max(n);
    let mut sq = CMatrix::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let reference = smax.max(scale);
    let cut = tol * if reference > 0.0 { reference } else { 1.0 };
    let mut vectors = Vec::new();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv < cut || reference == 0.0 {
            vectors.push(v_t.row(k).adjoint().into_owned());
        }
    }
    SubspaceBasis {
        dim_ambient: n,
        vectors,
    }
}

/// Orthonormal basis of the column space of `cols` (singular values above `tol · σ_max`).
fn column_space(cols: &[CVector], n: usize, tol: f64) -> SubspaceBasis {
    if cols.is_empty() {
        return SubspaceBasis {
            dim_ambient: n,
            vectors: Vec::new(),
        };
    }
    let a = CMatrix::from_columns(cols);
    let svd = a.svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let vectors = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > tol * smax)
        .map(|(k, _)| u.column(k).into_owned())
        .collect();
    SubspaceBasis {
        dim_ambient: n,
        vectors,
    }
}

/// q-convolution `c_λ`: returns `(F_∞; F₁, …, F_N)` of size `(N+1)m`, poles unchanged.
///
/// Block row `i` of `F_i` is `(B₀, …, B_i - (1-q^λ)I, …, B_N)`; all other rows vanish.
/// `F_∞ = I - F̂` where every block row of `F̂` is `(B₀, …, B_N)`.
pub fn qconvolve(t: &MatrixTuple, lambda: C64, q: C64) -> Result<MatrixTuple> {
    check_q(q)?;
    let m = t.m;
    let n = t.n_poles();
    let size = (n + 1) * m;
    let shift = 1.0 - cpow(q, lambda)?;
    let row_blocks: Vec<&CMatrix> = std::iter::once(&t.b0).chain(t.blocks.iter()).collect();
    let mut fhat = CMatrix::zeros(size, size);
    for r in 0..=n {
        for (c, b) in row_blocks.iter().enumerate() {
            fhat.view_mut((r * m, c * m), (m, m)).copy_from(b);
        }
    }
    let f_inf = CMatrix::identity(size, size) - &fhat;
    let mut fs = Vec::with_capacity(n);
    for i in 1..=n {
        let mut f = CMatrix::zeros(size, size);
        for (c, b) in row_blocks.iter().enumerate() {
            let mut blk = (*b).clone();
            if c == i {
                blk -= CMatrix::identity(m, m) * shift;
            }
            f.view_mut((i * m, c * m), (m, m)).copy_from(&blk);
        }
        fs.push(f);
    }
    MatrixTuple::new(f_inf, fs, t.poles.clone())
}

/// `𝒦 = ker B₀ ⊕ ker B₁ ⊕ … ⊕ ker B_N` inside `ℂ^{(N+1)m}`.
pub fn subspace_k(t: &MatrixTuple, tol: f64) -> SubspaceBasis {
    let m = t.m;
    let n = t.n_poles();
    let size = (n + 1) * m;
    let scale = t
        .matrices()
        .chain(std::iter::once(&t.b0))
        .map(|b| b.norm())
        .fold(0.0, f64::max);
    let mut vectors = Vec::new();
    for (j, b) in std::iter::once(&t.b0).chain(t.blocks.iter()).enumerate() {
        for v in nullspace_scaled(b, tol, scale).vectors {
            let mut e = CVector::zeros(size);
            e.rows_mut(j * m, m).copy_from(&v);
            vectors.push(e);
        }
    }
    SubspaceBasis {
        dim_ambient: size,
        vectors,
    }
}

/// `ℒ = ker(F̂ - (1-q^λ) I)` with `F̂ = I - F_∞` of a convolved tuple.
pub fn subspace_l(f: &MatrixTuple, lambda: C64, q: C64, tol: f64) -> Result<SubspaceBasis> {
    let size = f.m;
    let shift = 1.0 - cpow(q, lambda)?;
    let fhat = CMatrix::identity(size, size) - &f.b_inf;
    let scale = fhat.norm() + shift.norm();
    let target = fhat - CMatrix::identity(size, size) * shift;
    Ok(nullspace_scaled(&target, tol, scale))
}

/// Result of [`qmiddle_convolve`].
#[derive(Debug, Clone)]
pub struct MiddleConvolution {
    /// The quotient tuple `(F̄_∞; F̄₁, …, F̄_N)`.
    pub tuple: MatrixTuple,
    pub dim_k: usize,
    pub dim_l: usize,
    /// Orthonormal basis of the complement of `𝒦 + ℒ`, as columns.
    pub complement: CMatrix,
    /// Largest invariance defect `‖(I-P) F_k P‖` observed.
    pub invariance_defect: f64,
}

/// q-middle convolution `mc_λ`: the action of `c_λ` on `ℂ^{(N+1)m} / (𝒦 + ℒ)`,
/// represented on the orthogonal complement of `𝒦 + ℒ`.
///
/// The complement basis is canonical: Gram–Schmidt applied to the projected
/// standard basis vectors in order. Fails with [`QError::QuotientNotInvariant`]
/// when `‖(I-P) F_k P‖ > tol · (1 + ‖F_k‖)` for some `k`.
pub fn qmiddle_convolve(t: &MatrixTuple, lambda: C64, q: C64, tol: f64) -> Result<MiddleConvolution> {
    let f = qconvolve(t, lambda, q)?;
    let k = subspace_k(t, tol);
    let l = subspace_l(&f, lambda, q, tol)?;
    let size = f.m;
    let mut span = k.vectors.clone();
    span.extend(l.vectors.iter().cloned());
    let kl = column_space(&span, size, tol);
    let w = kl.as_matrix();
    let proj = &w * w.adjoint();
    let comp_proj = CMatrix::identity(size, size) - &proj;

    let mut defect: f64 = 0.0;
    for fk in f.matrices() {
        let d = (&comp_proj * fk * &proj).norm();
        let bound = tol * (1.0 + fk.norm());
        defect = defect.max(d);
        if d > bound {
            return Err(QError::QuotientNotInvariant(d));
        }
    }

    let target = size - kl.dim();
    let mut basis: Vec<CVector> = Vec::with_capacity(target);
    for e in 0..size {
        if basis.len() == target {
            break;
        }
        let mut v = comp_proj.column(e).into_owned();
        for b in &basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let nv = v.norm();
        if nv > 1e-6 {
            basis.push(v / C64::new(nv, 0.0));
        }
    }
    let qm = if basis.is_empty() {
        CMatrix::zeros(size, 0)
    } else {
        CMatrix::from_columns(&basis)
    };
    if target == 0 {
        return Err(QError::InvalidParameters("middle convolution is the zero space".into()));
    }
    let qh = qm.adjoint();
    let compress = |x: &CMatrix| &qh * x * &qm;
    let tuple = MatrixTuple::new(
        compress(&f.b_inf),
        f.blocks.iter().map(compress).collect(),
        f.poles.clone(),
    )?;
    Ok(MiddleConvolution {
        tuple,
        dim_k: k.dim(),
        dim_l: l.dim(),
        complement: qm,
        invariance_defect: defect,
    })
}

/// A vector solution `Y(s)` of `Y(qs) = B(s) Y(s)` used as integrand source.
pub trait TupleSolution: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, s: C64) -> Result<CVector>;
    /// `Y(s)/(s - b)` for the pole with index `i` (`i = 0` is `b₀ = 0`).
    /// Implementations may override this to stay finite where `Y` vanishes at `b`.
    fn eval_over_pole(&self, s: C64, _i: usize, b: C64) -> Result<CVector> {
        let d = s - b;
        if d.norm() == 0.0 {
            return Err(QError::PoleInDenominator(format!("integrand pole at s = {b}")));
        }
        Ok(self.eval(s)? / d)
    }
}

/// The scalar weight `y(s) = (α₁s, α₂s; q)_∞/(β₁s, β₂s; q)_∞` as a tuple solution.
#[derive(Debug, Clone, Copy)]
pub struct WeightSolution {
    pub params: QParams,
    pub trunc: Truncation,
}

impl TupleSolution for WeightSolution {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, s: C64) -> Result<CVector> {
        Ok(CVector::from_element(1, weight_y(s, &self.params, &self.trunc)?))
    }
    fn eval_over_pole(&self, s: C64, i: usize, _b: C64) -> Result<CVector> {
        Ok(CVector::from_element(
            1,
            weight_over_pole(s, i, &self.params, &self.trunc)?,
        ))
    }
}

/// `y(s) = s^μ (α₁s, α₂s; q)_∞/(β₁s, β₂s; q)_∞`, a solution of the tuple
/// `q^μ·(B_∞; B₁, B₂)` returned by [`PowerWeightSolution::tuple`].
///
/// For `Re μ > 0` and `|q^λ / B_∞| < 1` every transform component converges on a generic lattice.
#[derive(Debug, Clone, Copy)]
pub struct PowerWeightSolution {
    pub params: QParams,
    pub mu: C64,
    pub trunc: Truncation,
}

impl PowerWeightSolution {
    pub fn tuple(&self) -> MatrixTuple {
        let t = MatrixTuple::degree2(&self.params);
        let s = self.params.qpow(self.mu);
        MatrixTuple::new(t.b_inf * s, t.blocks.iter().map(|b| b * s).collect(), t.poles)
            .expect("scaling keeps the tuple valid")
    }
}

impl TupleSolution for PowerWeightSolution {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, s: C64) -> Result<CVector> {
        let v = cpow(s, self.mu)? * weight_y(s, &self.params, &self.trunc)?;
        Ok(CVector::from_element(1, v))
    }
}

/// Outcome of [`verify_integral_transform`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransformCheck {
    pub max_residual: f64,
    /// Components of `Ŷ` whose Jackson sums diverged at some sample.
    pub divergent_components: Vec<usize>,
    /// Rows of `Ŷ(qx) = F(x) Ŷ(x)` that could be checked.
    pub checked_rows: Vec<usize>,
}

/// `Ŷ(x)` with components `Ŷ_i(x) = ∫_0^{ξ∞} P_λ(x,s) Y(s)/(s - b_i) d_q s`, `b₀ = 0`.
/// Divergent components are returned as `None`.
pub fn transform_components<S: TupleSolution>(
    t: &MatrixTuple,
    lambda: C64,
    q: C64,
    sol: &S,
    x: C64,
    xi: C64,
    bt: &BilateralTruncation,
) -> Result<Vec<Option<C64>>> {
    let m = t.m;
    let ql = cpow(q, lambda)?;
    let tr = bt.base;
    let poles: Vec<C64> = std::iter::once(C64::new(0.0, 0.0))
        .chain(t.poles.iter().copied())
        .collect();
    let mut out = Vec::with_capacity(poles.len() * m);
    for (i, &b) in poles.iter().enumerate() {
        for j in 0..m {
            let f = |s: C64| -> Result<C64> {
                let u = s / x;
                let pl = qpoch_ratio(&[q * ql * u], &[q * u], q, &tr)?;
                if pl.norm() == 0.0 {
                    return Ok(pl);
                }
                Ok(pl * sol.eval_over_pole(s, i, b)?[j])
            };
            match jackson_integral(f, xi, q, bt) {
                Ok(v) => out.push(Some(v)),
                Err(QError::TruncationFailure(_)) => out.push(None),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// Checks that the Jackson-integral transform of a solution of `E_B` solves `E_F`
/// with `F = c_λ(B)`: returns the largest `‖Ŷ(qx) - F(x)Ŷ(x)‖ / ‖Ŷ(x)‖` over the samples.
///
/// Components whose sums diverge are dropped; only rows of `F` that do not touch
/// them are checked. When `‖Ŷ(x)‖ = 0` the absolute residual is reported.
#[allow(clippy::too_many_arguments)]
pub fn verify_integral_transform<S: TupleSolution>(
    t: &MatrixTuple,
    lambda: C64,
    q: C64,
    sol: &S,
    sample_x: &[C64],
    xi: C64,
    bt: &BilateralTruncation,
) -> Result<TransformCheck> {
    let f = qconvolve(t, lambda, q)?;
    let size = f.m;
    let mut values = Vec::with_capacity(sample_x.len());
    let mut divergent = vec![false; size];
    for &x in sample_x {
        let y0 = transform_components(t, lambda, q, sol, x, xi, bt)?;
        let y1 = transform_components(t, lambda, q, sol, q * x, xi, bt)?;
        for c in 0..size {
            divergent[c] |= y0[c].is_none() || y1[c].is_none();
        }
        values.push((x, y0, y1));
    }
    let scale = f.matrices().map(|m| m.norm()).fold(0.0, f64::max).max(1.0);
    let rows: Vec<usize> = (0..size)
        .filter(|&r| (0..size).all(|c| !divergent[c] || f.matrices().all(|m| m[(r, c)].norm() <= 1e-14 * scale)))
        .collect();
    if rows.is_empty() {
        return Err(QError::TruncationFailure(
            "every row involves a divergent component".into(),
        ));
    }
    let mut max_res: f64 = 0.0;
    for (x, y0, y1) in values {
        let fx = f.eval(x);
        let v0 = CVector::from_iterator(size, y0.iter().map(|v| v.unwrap_or_default()));
        let v1 = CVector::from_iterator(size, y1.iter().map(|v| v.unwrap_or_default()));
        let diff = &v1 - &fx * &v0;
        let num: f64 = rows.iter().map(|&r| diff[r].norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = rows.iter().map(|&r| v0[r].norm_sqr()).sum::<f64>().sqrt();
        max_res = max_res.max(if den > 0.0 { num / den } else { num });
    }
    Ok(TransformCheck {
        max_residual: max_res,
        divergent_components: (0..size).filter(|&c| divergent[c]).collect(),
        checked_rows: rows,
    })
}

/// Loose screen for candidate common roots, before polishing.
const COMMON_ROOT_SCREEN: f64 = 1e-6;
/// Acceptance after polishing.
const COMMON_ROOT_TOL: f64 = 1e-10;

/// `|p(r)|` against the coefficient scale of `p` at `|r|`.
fn rel_value(p: &Poly, r: C64) -> f64 {
    let d = p.coeffs().len().saturating_sub(1) as i32;
    let scale = p.max_abs_coeff() * r.norm().max(1.0).powi(d);
    if scale == 0.0 {
        0.0
    } else {
        p.eval(r).norm() / scale
    }
}

/// Newton steps on whichever polynomial has the best-conditioned root near `r`.
fn polish_common_root(ps: &[Poly], live: &[usize], mut r: C64) -> C64 {
    let cond = |i: usize, r: C64| ps[i].derivative().eval(r).norm() / ps[i].max_abs_coeff();
    let Some(best) = live.iter().copied().max_by(|&a, &b| cond(a, r).total_cmp(&cond(b, r))) else {
        return r;
    };
    let d = ps[best].derivative();
    for _ in 0..4 {
        let dv = d.eval(r);
        if dv.norm() == 0.0 {
            break;
        }
        let step = ps[best].eval(r) / dv;
        if !step.is_finite() {
            break;
        }
        r -= step;
    }
    r
}

/// Divides out every root shared by all nonzero polynomials in `ps`.
///
/// `hints` are tried first and used unpolished; they should hold the exactly known
/// singular points, since clustered roots of the products are poorly conditioned.
fn cancel_common_roots(ps: &mut [Poly], hints: &[C64]) -> Vec<C64> {
    for p in ps.iter_mut() {
        *p = p.trimmed(1e-13);
    }
    let mut removed = Vec::new();
    loop {
        let live: Vec<usize> = (0..ps.len()).filter(|&i| !ps[i].is_zero()).collect();
        if live.iter().any(|&i| ps[i].degree().unwrap_or(0) == 0) || live.is_empty() {
            return removed;
        }
        let mut found = hints
            .iter()
            .copied()
            .find(|&r| live.iter().all(|&i| rel_value(&ps[i], r) <= COMMON_ROOT_TOL));
        'search: for &src in &live {
            if found.is_some() {
                break;
            }
            for r in ps[src].roots() {
                if !live.iter().all(|&i| rel_value(&ps[i], r) <= COMMON_ROOT_SCREEN) {
                    continue;
                }
                let r = polish_common_root(ps, &live, r);
                if live.iter().all(|&i| rel_value(&ps[i], r) <= COMMON_ROOT_TOL) {
                    found = Some(r);
                    break 'search;
                }
            }
        }
        let Some(r) = found else { return removed };
        for &i in &live {
            ps[i] = ps[i].deflate(r);
        }
        removed.push(r);
    }
}

/// Coefficients of the polynomial of degree `< n` taking the values `f(x_j)` at
/// `x_j = R·e^{i(2πj/n + φ)}`, by the discrete Fourier transform.
fn interpolate_on_circle<F: Fn(C64) -> C64>(f: F, n: usize, radius: f64) -> Poly {
    let phase = 0.3;
    let pts: Vec<C64> = (0..n)
        .map(|j| C64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / n as f64 + phase))
        .collect();
    let vals: Vec<C64> = pts.iter().map(|&x| f(x)).collect();
    let coeffs = (0..n)
        .map(|k| {
            let s: C64 = pts.iter().zip(&vals).map(|(&x, &v)| v / x.powi(k as i32)).sum();
            s / n as f64
        })
        .collect();
    Poly::new(coeffs)
}

/// Eliminates the second component of a 2×2 system `Y(qx) = F̄(x) Y(x)` to get a
/// three-term equation for the first component.
///
/// With `D(x) = ∏(1 - x/b_i)` and `A(x) = D(x) F̄(x)`:
/// `D(x)D(x/q)A₁₂(x/q) y(qx) + A₁₂(x) det A(x/q) y(x/q) - D(x/q)[A₁₁(x)A₁₂(x/q) + A₁₂(x)A₂₂(x/q)] y(x) = 0`.
/// Common polynomial factors are cancelled and the `y(x/q)` coefficient is made monic.
pub fn reduce_to_scalar(f_bar: &MatrixTuple, q: C64) -> Result<ScalarQDiffEq> {
    check_q(q)?;
    if f_bar.m != 2 {
        return Err(QError::InvalidParameters(format!(
            "scalar reduction needs a 2x2 system (got {}x{})",
            f_bar.m, f_bar.m
        )));
    }
    let one = C64::new(1.0, 0.0);
    let factors: Vec<Poly> = f_bar.poles.iter().map(|&b| Poly::linear(one, -one / b)).collect();
    let d = factors.iter().fold(Poly::constant(one), |acc, f| &acc * f);
    let entry = |r: usize, c: usize| -> Poly {
        let mut acc = d.scale(f_bar.b_inf[(r, c)]);
        for (i, blk) in f_bar.blocks.iter().enumerate() {
            let others = factors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(Poly::constant(one), |p, (_, f)| &p * f);
            acc = &acc + &others.scale(blk[(r, c)]);
        }
        acc
    };
    let (a11, a12, a21, a22) = (entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1));
    if a12.trimmed(1e-13).is_zero() || a12.max_abs_coeff() <= 1e-14 * (1.0 + a11.max_abs_coeff()) {
        return Err(QError::EliminationSingular(
            "the (1,2) entry vanishes identically; the first component decouples".into(),
        ));
    }
    let down = |p: &Poly| p.substitute_scaled(one / q);
    let (a11d, a12d, a21d, a22d, dd) = (down(&a11), down(&a12), down(&a21), down(&a22), down(&d));
    let det_d = &(&a11d * &a22d) - &(&a12d * &a21d);
    let c_up = &(&d * &dd) * &a12d;
    let c_down = &a12 * &det_d;
    let c_mid = -&(&dd * &(&(&a11 * &a12d) + &(&a12 * &a22d)));
    let mut ps = [c_down, c_up, c_mid];
    let mut hints = vec![C64::new(0.0, 0.0)];
    hints.extend(f_bar.poles.iter().flat_map(|&b| [b, q * b]));
    let removed = cancel_common_roots(&mut ps, &hints);

    // Re-derive the reduced coefficients from pointwise products: forming them
    // in coefficient space loses digits when the entries are large.
    let degs: Vec<usize> = ps.iter().map(|p| p.degree().unwrap_or(0)).collect();
    let n = degs.iter().max().copied().unwrap_or(0) + 1;
    let lead = ps[0].leading();
    let radius = match degs[0] {
        d if d > 0 && lead.norm() > 0.0 => (ps[0].coeff(0).norm() / lead.norm()).powf(1.0 / d as f64),
        _ => 1.0,
    };
    let radius = if radius.is_finite() && radius > 0.0 {
        radius
    } else {
        1.0
    };
    let poles = f_bar.poles.clone();
    let eval_a = |x: C64| -> CMatrix {
        let fac: Vec<C64> = poles.iter().map(|&b| one - x / b).collect();
        let dx: C64 = fac.iter().product();
        let mut a = &f_bar.b_inf * dx;
        for (i, blk) in f_bar.blocks.iter().enumerate() {
            let others: C64 = fac
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| *v)
                .product();
            a += blk * others;
        }
        a
    };
    let d_of = |x: C64| -> C64 { poles.iter().map(|&b| one - x / b).product() };
    let g_of = |x: C64| -> C64 { removed.iter().map(|&r| x - r).product() };
    let values = |x: C64| -> [C64; 3] {
        let (a, ad) = (eval_a(x), eval_a(x / q));
        let det_d = ad[(0, 0)] * ad[(1, 1)] - ad[(0, 1)] * ad[(1, 0)];
        let g = g_of(x);
        [
            a[(0, 1)] * det_d / g,
            d_of(x) * d_of(x / q) * ad[(0, 1)] / g,
            -d_of(x / q) * (a[(0, 0)] * ad[(0, 1)] + a[(0, 1)] * ad[(1, 1)]) / g,
        ]
    };
    for (k, p) in ps.iter_mut().enumerate() {
        if p.is_zero() {
            continue;
        }
        let fine = interpolate_on_circle(|x| values(x)[k], n, radius);
        *p = Poly::new(fine.coeffs()[..=degs[k]].to_vec());
    }
    let lead = ps[0].leading();
    if lead.norm() == 0.0 {
        return Err(QError::EliminationSingular("y(x/q) coefficient vanishes".into()));
    }
    let inv = one / lead;
    let [c_down, c_up, c_mid] = ps;
    Ok(ScalarQDiffEq {
        coeff_down: c_down.scale(inv),
        coeff_up: c_up.scale(inv),
        coeff_mid: c_mid.scale(inv),
        nonhom: Poly::zero(),
    })
}
