//! One line per acceptance criterion, each at its own tolerance and sample count.
//!
//! Rows are taken from the default `all` run (seed 7) and grouped by id. A
//! criterion passes when every row it owns is present, has status PASS, saw at
//! least the required number of samples and stays under the stated tolerance.

use std::path::Path;
use std::process::Command;

use qmckit::relations::{RelationReport, Status};
use qmckit::suite::{run_suite, RunConfig, Suite};

struct Criterion {
    name: &'static str,
    tol: f64,
    min_samples: usize,
    owns: fn(&str) -> bool,
    /// Rows that must exist, so a missing relation cannot pass vacuously.
    required: &'static [&'static str],
}

const EXPANSION_FAMILIES: [&str; 6] = ["a1_1", "a1_5", "a1_9", "a2_2", "a2_6", "a2_10"];

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            name: "1 q-series primitives",
            tol: 1e-12,
            min_samples: 100,
            owns: |id| {
                matches!(
                    id,
                    "qpoch_functional_eq" | "rphi_permutation" | "rphi_terminating" | "theta_quasi_periodicity"
                )
            },
            required: &[
                "qpoch_functional_eq",
                "rphi_permutation",
                "rphi_terminating",
                "theta_quasi_periodicity",
            ],
        },
        Criterion {
            name: "2 q-binomial cross-check",
            tol: 1e-12,
            min_samples: 100,
            owns: |id| id == "q_binomial",
            required: &["q_binomial"],
        },
        Criterion {
            name: "3 middle convolution of the degree-2 tuple",
            tol: 1e-12,
            min_samples: 20,
            owns: |id| id.starts_with("qmc_"),
            required: &["qmc_dims", "qmc_reduction"],
        },
        Criterion {
            name: "4 bilateral integral at special lattice scales",
            tol: 1e-8,
            min_samples: 20,
            owns: |id| id.starts_with("bilateral_"),
            required: &["bilateral_y_alpha1", "bilateral_y_alpha2", "bilateral_y_lambda"],
        },
        Criterion {
            name: "5 solution residuals",
            tol: 1e-8,
            min_samples: 20,
            owns: |id| {
                matches!(
                    id,
                    "residual_y_beta1" | "residual_y_beta2" | "residual_y_x" | "residual_g_qappell"
                ) || id.starts_with("nonhom_y_")
                    || id.starts_with("diff_")
                    || EXPANSION_FAMILIES.iter().any(|a| id == format!("remark41_{a}"))
            },
            required: &[
                "residual_y_beta1",
                "residual_y_beta2",
                "residual_y_x",
                "residual_g_qappell",
                "remark41_a1_1",
                "remark41_a1_5",
                "remark41_a1_9",
                "remark41_a2_2",
                "remark41_a2_6",
                "remark41_a2_10",
                "nonhom_y_alpha1",
                "nonhom_y_alpha2",
                "nonhom_y_lambda",
                "diff_y_alpha1_y_alpha2",
                "diff_y_alpha1_y_lambda",
                "diff_y_alpha2_y_lambda",
            ],
        },
        Criterion {
            name: "6a parameter maps",
            tol: 1e-8,
            min_samples: 20,
            owns: |id| id.starts_with("map_"),
            required: &[
                "map_variant_y_beta1",
                "map_variant_y_beta2",
                "map_variant_y_x",
                "map_normal_form_y_beta1",
                "map_normal_form_y_beta2",
                "map_normal_form_y_x",
                "map_normal_form_g_qappell",
            ],
        },
        Criterion {
            name: "6b parameter constraint",
            tol: 1e-12,
            min_samples: 20,
            owns: |id| id.starts_with("fn_constraint_"),
            required: &["fn_constraint_variant", "fn_constraint_qparams"],
        },
        Criterion {
            name: "7 transformation formulas",
            tol: 1e-10,
            min_samples: 100,
            owns: |id| matches!(id, "gr_iii10" | "gr_331" | "gr_333" | "andrews"),
            required: &["gr_iii10", "gr_331", "gr_333", "andrews"],
        },
        Criterion {
            name: "8a solution relations",
            tol: 1e-8,
            min_samples: 20,
            owns: |id| {
                ["prop31", "prop32_", "prop33_", "prop34_"]
                    .iter()
                    .any(|p| id.starts_with(p))
                    || matches!(
                        id,
                        "remark41_j13_y_x" | "remark41_split_y_beta1" | "remark41_a1_1_alpha_split"
                    )
            },
            required: &[
                "prop31",
                "prop32_f32",
                "prop32_f32_check",
                "prop32_f35",
                "prop33_f33",
                "prop33_fc32_f33",
                "prop33_yb2_y2_10",
                "prop33_yb1_coefficient_vanishes",
                "prop34_f32_block",
                "prop34_f33_block",
                "prop34_f35_block",
                "prop34_f34",
                "prop34_f36",
                "prop34_f37",
            ],
        },
        Criterion {
            name: "8b pseudo-constant coefficients",
            tol: 1e-10,
            min_samples: 20,
            owns: |id| matches!(id, "pseudo_S2" | "pseudo_S5"),
            required: &["pseudo_S2", "pseudo_S5"],
        },
        Criterion {
            name: "9a connection relations",
            tol: 1e-8,
            min_samples: 20,
            owns: |id| id.starts_with("thm41_") || id == "cor42",
            required: &[
                "thm41_J1", "thm41_J2", "thm41_J3", "thm41_J4", "thm41_J5", "thm41_J6", "thm41_K1", "thm41_K3",
                "thm41_K5", "cor42",
            ],
        },
        Criterion {
            name: "9b connection coefficients are pseudo-constant",
            tol: 1e-10,
            min_samples: 20,
            owns: |id| {
                id.starts_with("pseudo_J")
                    || id.starts_with("pseudo_K")
                    || id.starts_with("cor42_pseudo_")
                    || id == "j11_plus_j12"
            },
            required: &[
                "pseudo_J11",
                "pseudo_J12",
                "pseudo_J13",
                "pseudo_J21",
                "pseudo_J23",
                "pseudo_J31",
                "pseudo_J33",
                "pseudo_J41",
                "pseudo_J43",
                "pseudo_J51",
                "pseudo_J53",
                "pseudo_J61",
                "pseudo_J63",
                "pseudo_K11",
                "pseudo_K13",
                "pseudo_K31",
                "pseudo_K33",
                "pseudo_K51",
                "pseudo_K53",
                "j11_plus_j12",
            ],
        },
    ]
}

fn judge(c: &Criterion, reports: &[RelationReport]) -> (bool, String) {
    let rows: Vec<&RelationReport> = reports.iter().filter(|r| (c.owns)(&r.relation_id)).collect();
    let mut problems = Vec::new();
    for id in c.required {
        if !rows.iter().any(|r| r.relation_id == *id) {
            problems.push(format!("{id} missing"));
        }
    }
    let mut worst = 0.0f64;
    for r in &rows {
        worst = worst.max(r.max_rel_residual);
        if r.status != Status::Pass {
            problems.push(format!("{} status {:?}", r.relation_id, r.status));
        }
        if r.samples < c.min_samples {
            problems.push(format!("{} only {} samples", r.relation_id, r.samples));
        }
        if r.max_rel_residual.is_nan() || r.max_rel_residual > c.tol {
            problems.push(format!("{} residual {:.3e}", r.relation_id, r.max_rel_residual));
        }
    }
    let detail = format!("{} rows, max residual {:.3e}, tol {:.0e}", rows.len(), worst, c.tol);
    if problems.is_empty() {
        (true, detail)
    } else {
        (false, format!("{detail}; {}", problems.join(", ")))
    }
}

fn verify_csv(out: &Path) -> Vec<u8> {
    let o = Command::new(env!("CARGO_BIN_EXE_qmckit"))
        .args(["verify", "all", "--seed", "7", "--out"])
        .arg(out)
        .output()
        .expect("binary runs");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    std::fs::read(out.join("all.csv")).expect("csv written")
}

fn determinism_and_dims() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let a = verify_csv(&dir.path().join("a"));
    let b = verify_csv(&dir.path().join("b"));
    let tuple = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/degree2_tuple.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_qmckit"))
        .arg("qmc")
        .arg(&tuple)
        .arg("--out")
        .arg(dir.path().join("mc.txt"))
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&o.stdout);
    let dims = o.status.success() && text.contains("dim K = 1, dim L = 0, size 2");
    let same = !a.is_empty() && a == b;
    (
        same && dims,
        format!(
            "csv identical: {same} ({} bytes), qmc prints dim K = 1, dim L = 0: {dims}",
            a.len()
        ),
    )
}

#[test]
fn acceptance() {
    let reports = run_suite(Suite::All, &RunConfig::default()).expect("suite runs");
    let mut all = true;
    for c in criteria() {
        let (ok, detail) = judge(&c, &reports);
        all &= ok;
        println!("criterion {}: {} ({detail})", c.name, if ok { "PASS" } else { "FAIL" });
    }
    let (ok, detail) = determinism_and_dims();
    all &= ok;
    println!(
        "criterion 10 CLI determinism: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(all, "some acceptance criteria failed");
}
