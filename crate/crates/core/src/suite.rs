//! Verification suites: which relations run together, how they are sampled,
//! and the run configuration.
//!
//! | suite       | contents |
//! |-------------|----------|
//! | `series`    | q-series primitives, q-binomial theorem, transformation formulas |
//! | `qmc`       | middle-convolution dimensions, scalar reduction, Jackson integrals at special `ξ` |
//! | `solutions` | equation residuals of every family, parameter maps, the six expansion families at infinity |
//! | `props`     | relations among `f₃₂…f₃₇`, the two-family corollary, pseudo-constancy of all coefficients, uncorrected forms |
//! | `theorem41` | the nine linear relations |
//!
//! Reports are sorted by relation id before they are returned, so output is
//! independent of scheduling.

use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::jackson::{yhat1_bilateral, QParams};
use crate::qmc::{qmiddle_convolve, reduce_to_scalar, MatrixTuple, DEFAULT_KERNEL_TOL};
use crate::qseries::{qpoch_finite, qpoch_infinite, qpoch_ratio, rphi_detailed, theta_q, PhiSpec};
use crate::relations::{
    andrews_sides, corollary42_specs, difference_residual_spec, family_residual_spec, gr_331_sides, gr_333_sides,
    gr_iii10_sides, parameter_map_specs, printed_info_specs, prop31_specs, prop32_specs, prop33_specs, prop34_specs,
    qappell_residual_spec, remark41_specs, robustly_admissible, theorem41_coefficient_specs, theorem41_specs, Failure,
    Points, RelationReport, RelationSpec, Sample, SamplePoint, Scaled, Sides, Status, VariantSample, IDENTITY_TOL,
    RELATION_TOL, SAMPLE_CONDITION_LIMIT,
};
use crate::sampling::{inside_unit, off_lattice, reduction_well_conditioned, Sampler, SamplerConfig, SeriesPoint};
use crate::solutions::{eval_solution, FamilyTag, Kind, SolutionFamily};
use crate::truncation::{BilateralTruncation, Truncation};
use crate::variant::ScalarQDiffEq;
use crate::C64;

/// Tolerance for the q-series primitives.
pub const PRIMITIVE_TOL: f64 = 1e-12;
/// Tolerance for the scalar-reduction coefficient comparison.
pub const REDUCTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Series,
    Qmc,
    Solutions,
    Props,
    Theorem41,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["series", "qmc", "solutions", "props", "theorem41", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Series => "series",
            Suite::Qmc => "qmc",
            Suite::Solutions => "solutions",
            Suite::Props => "props",
            Suite::Theorem41 => "theorem41",
            Suite::All => "all",
        }
    }

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Series,
                Suite::Qmc,
                Suite::Solutions,
                Suite::Props,
                Suite::Theorem41,
            ],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Suite::Series),
            "qmc" => Ok(Suite::Qmc),
            "solutions" => Ok(Suite::Solutions),
            "props" => Ok(Suite::Props),
            "theorem41" => Ok(Suite::Theorem41),
            "all" => Ok(Suite::All),
            other => Err(QError::Config(format!(
                "unknown suite {other:?}; expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

/// Everything a verification run depends on. Serialized as JSON; every field
/// has a default so partial files are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub q_range: [f64; 2],
    pub exponent_range: [f64; 2],
    /// Samples for relations, residuals and pseudo-constancy rows.
    pub samples_per_relation: usize,
    /// Samples for q-series primitives and transformation formulas.
    pub identity_samples: usize,
    /// Samples for `f(qx) = f(x)` rows.
    pub pseudo_samples: usize,
    pub truncation: Truncation,
    pub bilateral: BilateralTruncation,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            q_range: [0.2, 0.8],
            exponent_range: [-0.9, 0.9],
            samples_per_relation: 20,
            identity_samples: 100,
            pseudo_samples: 50,
            truncation: Truncation::default(),
            bilateral: BilateralTruncation::default(),
            output_dir: PathBuf::from("reports"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let [q0, q1] = self.q_range;
        if !(q0 > 0.0 && q0 <= q1 && q1 < 1.0) {
            return Err(QError::Config(format!(
                "q_range must satisfy 0 < lo <= hi < 1, got [{q0}, {q1}]"
            )));
        }
        let [e0, e1] = self.exponent_range;
        if !(e0.is_finite() && e1.is_finite() && e0 <= e1) {
            return Err(QError::Config(format!(
                "exponent_range must be a finite interval, got [{e0}, {e1}]"
            )));
        }
        if self.samples_per_relation == 0 || self.identity_samples == 0 || self.pseudo_samples == 0 {
            return Err(QError::Config(
                "samples_per_relation, identity_samples and pseudo_samples must be at least 1".into(),
            ));
        }
        self.truncation.validate().map_err(|e| QError::Config(e.to_string()))?;
        self.bilateral.validate().map_err(|e| QError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| QError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(SamplerConfig {
            seed: self.seed,
            q_range: self.q_range,
            exponent_range: self.exponent_range,
            ..SamplerConfig::default()
        })
    }
}

/// Worker count from `QMCKIT_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("QMCKIT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

// ---------------------------------------------------------------------------
// jobs

/// A relation together with its sampler and sample count.
trait Job: Send + Sync {
    fn id(&self) -> &str;
    fn execute(&self, sampler: &Sampler, t: &Truncation) -> RelationReport;
}

struct SpecJob<P> {
    spec: RelationSpec<P>,
    n: usize,
    gen: fn(&Sampler, &mut rand_chacha::ChaCha8Rng) -> Option<P>,
}

impl<P: SamplePoint + Send> Job for SpecJob<P> {
    fn id(&self) -> &str {
        &self.spec.id
    }

    fn execute(&self, sampler: &Sampler, t: &Truncation) -> RelationReport {
        let draw = sampler.draw(&self.spec, self.n, t, self.gen);
        let mut report = self.spec.run(&draw.samples, t);
        report.rejected = draw.rejected;
        if draw.samples.len() < self.n && !self.spec.info {
            report.failures.push(Failure {
                point: serde_json::Value::Null,
                reason: format!("only {} of {} admissible samples found", draw.samples.len(), self.n),
            });
            report.status = Status::Fail;
        }
        report
    }
}

fn q_job(spec: RelationSpec<Sample>, n: usize) -> Box<dyn Job> {
    Box::new(SpecJob {
        spec,
        n,
        gen: |s, r| s.gen_sample(r),
    })
}

fn v_job(spec: RelationSpec<VariantSample>, n: usize) -> Box<dyn Job> {
    Box::new(SpecJob {
        spec,
        n,
        gen: |s, r| s.gen_variant_sample(r),
    })
}

fn s_job(spec: RelationSpec<SeriesPoint>, n: usize) -> Box<dyn Job> {
    Box::new(SpecJob {
        spec,
        n,
        gen: |s, r| s.gen_series_point(r),
    })
}

/// Maps a sampled modulus in `[0.1, 2]` into the disc `|z| ≤ 0.9`.
fn into_disc(z: C64) -> C64 {
    z / z.norm() * 0.9 * (z.norm() / 2.0).min(1.0)
}

// ---------------------------------------------------------------------------
// series suite

type SidesFn = fn(&SeriesPoint, &Truncation) -> Result<Sides>;
type PointFilter = fn(&SeriesPoint) -> bool;

/// Largest condition number at which rounding alone stays a hundredfold below `tol`.
fn condition_limit(tol: f64) -> f64 {
    (tol / (100.0 * f64::EPSILON)).min(SAMPLE_CONDITION_LIMIT)
}

/// An identity asserted at points where neither side cancels by more than
/// [`condition_limit`] allows, plus an `INFO` twin over all admissible points.
fn identity_specs(
    id: &str,
    tol: f64,
    sides: SidesFn,
    admissible: PointFilter,
    max_norm: bool,
) -> [RelationSpec<SeriesPoint>; 2] {
    let eval = move |p: &SeriesPoint, t: &Truncation| {
        let s = sides(p, t)?;
        Ok(if max_norm { s.rel() } else { s.gap() })
    };
    let conditioned = RelationSpec::new(id, tol, eval, move |p: &SeriesPoint, t: &Truncation| {
        admissible(p) && sides(p, t).is_ok_and(|s| s.condition() <= condition_limit(tol))
    });
    let all = RelationSpec::new(
        format!("{id}_unfiltered"),
        tol,
        eval,
        move |p: &SeriesPoint, _t: &Truncation| admissible(p),
    )
    .informational();
    [conditioned, all]
}

fn phi(upper: Vec<C64>, lower: Vec<C64>, q: C64, z: C64, t: &Truncation) -> Result<Scaled> {
    Ok(Scaled::series(
        C64::new(1.0, 0.0),
        rphi_detailed(&PhiSpec::new(upper, lower, q, z), t, 0.0)?,
    ))
}

/// `₃φ₂` with both parameter lists permuted.
fn permutation_sides(p: &SeriesPoint, t: &Truncation) -> Result<Sides> {
    let [a1, a2, a3, b1, b2, z, ..] = p.a;
    let z = into_disc(z);
    Ok(Sides {
        lhs: phi(vec![a1, a2, a3], vec![b1, b2], p.q, z, t)?,
        rhs: phi(vec![a3, a1, a2], vec![b2, b1], p.q, z, t)?,
    })
}

/// `₁φ₀(a; -; q, z) = (az; q)_∞ / (z; q)_∞`.
fn binomial_sides(p: &SeriesPoint, t: &Truncation) -> Result<Sides> {
    let (a, z) = (p.a[0], into_disc(p.a[1]));
    Ok(Sides {
        lhs: phi(vec![a], vec![], p.q, z, t)?,
        rhs: Scaled::exact(qpoch_ratio(&[a * z], &[z], p.q, t)?),
    })
}

/// Terminating `₃φ₂(q^{-n}, a₂, a₃; b₁, b₂; q, z)` against its terms summed by hand.
fn terminating_sides(p: &SeriesPoint, t: &Truncation) -> Result<Sides> {
    let q = p.q;
    let top = C64::new(1.0, 0.0) / q.powu(p.n as u32);
    let (a2, a3, b1, b2, z) = (p.a[1], p.a[2], p.a[3], p.a[4], p.a[5]);
    let terms: Vec<C64> = (0..=p.n)
        .map(|k| {
            qpoch_finite(top, q, k) * qpoch_finite(a2, q, k) * qpoch_finite(a3, q, k)
                / (qpoch_finite(b1, q, k) * qpoch_finite(b2, q, k) * qpoch_finite(q, q, k))
                * z.powu(k as u32)
        })
        .collect();
    Ok(Sides {
        lhs: phi(vec![top, a2, a3], vec![b1, b2], q, z, t)?,
        rhs: Scaled {
            value: terms.iter().sum(),
            scale: terms.iter().map(|t| t.norm()).sum(),
        },
    })
}

fn five(p: &SeriesPoint) -> (C64, C64, C64, C64, C64) {
    (p.a[0], p.a[1], p.a[2], p.a[3], p.a[4])
}

fn lower_off_lattice(p: &SeriesPoint) -> bool {
    off_lattice(&[p.a[3], p.a[4]], p.q)
}

/// `(a,b,c,d,e)` and the quantities the three `₃φ₂` formulas divide by.
fn gr_admissible(p: &SeriesPoint, which: u8) -> bool {
    let [a, b, c, d, e, ..] = p.a;
    let q = p.q;
    let z = d * e / (a * b * c);
    match which {
        0 => inside_unit(z) && inside_unit(b) && off_lattice(&[d, e, z, d * e / (a * b), d * e / (b * c)], q),
        1 => {
            inside_unit(z)
                && off_lattice(
                    &[
                        d,
                        e,
                        e / (b * c),
                        b * c * q / e,
                        b * c / e,
                        z,
                        d * e / (b * c),
                        e * q / (b * c),
                    ],
                    q,
                )
        }
        _ => {
            inside_unit(z)
                && inside_unit(b * q / d)
                && off_lattice(
                    &[
                        d,
                        e,
                        c * q / d,
                        q / a,
                        e / (b * c),
                        c * q / a,
                        b * c * q / e,
                        d / q,
                        b * q / d,
                        q * q / d,
                        e * q / d,
                    ],
                    q,
                )
        }
    }
}

fn series_jobs(cfg: &RunConfig) -> Vec<Box<dyn Job>> {
    let n = cfg.identity_samples;
    let mut specs = vec![
        RelationSpec::new(
            "qpoch_functional_eq",
            PRIMITIVE_TOL,
            |p: &SeriesPoint, t: &Truncation| {
                let a = p.a[0];
                Ok(Sides {
                    lhs: Scaled::exact(qpoch_infinite(a, p.q, t)?),
                    rhs: Scaled::exact((1.0 - a) * qpoch_infinite(a * p.q, p.q, t)?),
                }
                .rel())
            },
            |_: &SeriesPoint, _: &Truncation| true,
        ),
        RelationSpec::new(
            "theta_quasi_periodicity",
            PRIMITIVE_TOL,
            |p: &SeriesPoint, t: &Truncation| {
                let x = p.a[0];
                Ok(Sides {
                    lhs: Scaled::exact(theta_q(p.q * x, p.q, t)?),
                    rhs: Scaled::exact(-theta_q(x, p.q, t)? / x),
                }
                .rel())
            },
            |_: &SeriesPoint, _: &Truncation| true,
        ),
    ];
    let identities: [(&str, f64, SidesFn, PointFilter, bool); 7] = [
        (
            "rphi_permutation",
            PRIMITIVE_TOL,
            permutation_sides,
            lower_off_lattice,
            true,
        ),
        (
            "rphi_terminating",
            PRIMITIVE_TOL,
            terminating_sides,
            lower_off_lattice,
            true,
        ),
        ("q_binomial", PRIMITIVE_TOL, binomial_sides, |_| true, true),
        (
            "gr_iii10",
            IDENTITY_TOL,
            |p, t| {
                let (a, b, c, d, e) = five(p);
                gr_iii10_sides(a, b, c, d, e, p.q, t)
            },
            |p| gr_admissible(p, 0),
            false,
        ),
        (
            "gr_331",
            IDENTITY_TOL,
            |p, t| {
                let (a, b, c, d, e) = five(p);
                gr_331_sides(a, b, c, d, e, p.q, t)
            },
            |p| gr_admissible(p, 1),
            false,
        ),
        (
            "gr_333",
            IDENTITY_TOL,
            |p, t| {
                let (a, b, c, d, e) = five(p);
                gr_333_sides(a, b, c, d, e, p.q, t)
            },
            |p| gr_admissible(p, 2),
            false,
        ),
        (
            "andrews",
            IDENTITY_TOL,
            |p, t| andrews_sides(p.a[0], p.a[1], p.a[2], p.a[3], p.q, p.a[4], p.a[5], t),
            |p| {
                let [a, b, bp, c, y, z, _] = p.a;
                inside_unit(a) && inside_unit(y) && inside_unit(z) && off_lattice(&[c, y, z, y * b, z * bp], p.q)
            },
            false,
        ),
    ];
    for (id, tol, sides, admissible, max_norm) in identities {
        specs.extend(identity_specs(id, tol, sides, admissible, max_norm));
    }
    specs.into_iter().map(|s| s_job(s, n)).collect()
}

// ---------------------------------------------------------------------------
// qmc suite

fn qmc_jobs(cfg: &RunConfig) -> Vec<Box<dyn Job>> {
    let n = cfg.samples_per_relation;
    let conditioned = |s: &Sample, _t: &Truncation| reduction_well_conditioned(&s.params);
    let mut v = vec![
        q_job(
            RelationSpec::new(
                "qmc_dims",
                0.0,
                |s: &Sample, _t| {
                    let p = &s.params;
                    let mc = qmiddle_convolve(&MatrixTuple::degree2(p), p.lambda, p.q, DEFAULT_KERNEL_TOL)?;
                    Ok((mc.dim_k.abs_diff(1) + mc.dim_l + mc.tuple.m.abs_diff(2)) as f64)
                },
                conditioned,
            ),
            n,
        ),
        q_job(
            RelationSpec::new(
                "qmc_reduction",
                REDUCTION_TOL,
                |s: &Sample, _t| {
                    let p = &s.params;
                    let mc = qmiddle_convolve(&MatrixTuple::degree2(p), p.lambda, p.q, DEFAULT_KERNEL_TOL)?;
                    Ok(reduce_to_scalar(&mc.tuple, p.q)?.max_rel_diff(&ScalarQDiffEq::special(p, false)))
                },
                conditioned,
            ),
            n,
        ),
    ];
    let bt = BilateralTruncation {
        base: cfg.truncation,
        ..cfg.bilateral
    };
    for tag in [FamilyTag::YAlpha1, FamilyTag::YAlpha2, FamilyTag::YLambda] {
        let id = format!("bilateral_{}", tag.name());
        let xi_of = move |p: &QParams, x: C64| match tag {
            FamilyTag::YAlpha1 => 1.0 / p.alpha1,
            FamilyTag::YAlpha2 => 1.0 / p.alpha2,
            _ => x / p.q_lambda(),
        };
        let spec = RelationSpec::new(
            id,
            RELATION_TOL,
            move |s: &Sample, t| {
                let closed = eval_solution(
                    &SolutionFamily {
                        tag,
                        params: s.params,
                        variant: None,
                    },
                    s.x,
                    t,
                )?;
                let sum = yhat1_bilateral(s.x, xi_of(&s.params, s.x), &s.params, &bt)?;
                Ok((closed - sum).norm() / closed.norm())
            },
            move |s: &Sample, t| robustly_admissible(&s.params, s.x, &[tag], &[], Points::At, t),
        );
        v.push(q_job(spec, n));
    }
    v
}

// ---------------------------------------------------------------------------
// solutions, props, theorem41

const EXPANSION_FAMILIES: [FamilyTag; 6] = [
    FamilyTag::A1_1,
    FamilyTag::A1_5,
    FamilyTag::A1_9,
    FamilyTag::A2_2,
    FamilyTag::A2_6,
    FamilyTag::A2_10,
];

fn solutions_jobs(cfg: &RunConfig) -> Vec<Box<dyn Job>> {
    let n = cfg.samples_per_relation;
    let mut v: Vec<Box<dyn Job>> = Vec::new();
    for tag in FamilyTag::ALL {
        match tag.kind() {
            Kind::Homogeneous if !EXPANSION_FAMILIES.contains(&tag) => {
                v.push(q_job(family_residual_spec(tag, false), n))
            }
            Kind::Nonhomogeneous => v.push(q_job(family_residual_spec(tag, true), n)),
            _ => {}
        }
    }
    use FamilyTag::{YAlpha1, YAlpha2, YLambda};
    for (a, b) in [(YAlpha1, YAlpha2), (YAlpha1, YLambda), (YAlpha2, YLambda)] {
        v.push(q_job(difference_residual_spec(a, b), n));
    }
    v.push(v_job(qappell_residual_spec(), n));
    let (vmaps, qmaps) = parameter_map_specs();
    v.extend(vmaps.into_iter().map(|s| v_job(s, n)));
    v.extend(qmaps.into_iter().map(|s| q_job(s, n)));
    v.extend(remark41_specs().into_iter().map(|s| q_job(s, n)));
    v
}

fn props_jobs(cfg: &RunConfig) -> Vec<Box<dyn Job>> {
    let n = cfg.samples_per_relation;
    let mut v: Vec<Box<dyn Job>> = prop31_specs().into_iter().map(|s| v_job(s, n)).collect();
    for s in prop32_specs()
        .into_iter()
        .chain(prop33_specs())
        .chain(prop34_specs())
        .chain(corollary42_specs())
        .chain(theorem41_coefficient_specs())
        .chain(printed_info_specs())
    {
        let k = if s.id.contains("pseudo") { cfg.pseudo_samples } else { n };
        v.push(q_job(s, k));
    }
    v
}

fn theorem41_jobs(cfg: &RunConfig) -> Vec<Box<dyn Job>> {
    theorem41_specs()
        .into_iter()
        .map(|s| q_job(s, cfg.samples_per_relation))
        .collect()
}

fn jobs(suite: Suite, cfg: &RunConfig) -> Vec<Box<dyn Job>> {
    suite
        .parts()
        .into_iter()
        .flat_map(|s| match s {
            Suite::Series => series_jobs(cfg),
            Suite::Qmc => qmc_jobs(cfg),
            Suite::Solutions => solutions_jobs(cfg),
            Suite::Props => props_jobs(cfg),
            Suite::Theorem41 => theorem41_jobs(cfg),
            Suite::All => unreachable!("expanded by parts"),
        })
        .collect()
}

/// Relation ids a suite produces, sorted.
pub fn relation_ids(suite: Suite, cfg: &RunConfig) -> Vec<String> {
    let mut ids: Vec<String> = jobs(suite, cfg).iter().map(|j| j.id().to_string()).collect();
    ids.sort();
    ids
}

/// Runs a suite and returns its reports sorted by relation id.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Vec<RelationReport>> {
    cfg.validate()?;
    let sampler = cfg.sampler();
    let jobs = jobs(suite, cfg);
    let t = cfg.truncation;
    let work = || jobs.par_iter().map(|j| j.execute(&sampler, &t)).collect::<Vec<_>>();
    let mut reports = match thread_cap() {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| QError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    reports.sort_by(|a, b| a.relation_id.cmp(&b.relation_id));
    Ok(reports)
}

/// True iff no report failed.
pub fn all_passed(reports: &[RelationReport]) -> bool {
    reports.iter().all(RelationReport::passed)
}
