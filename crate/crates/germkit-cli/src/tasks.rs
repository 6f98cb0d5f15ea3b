//! Task orchestration: run the requested pipelines, collect artifacts in
//! memory, funnel all file writes through one writer, and emit the manifest
//! last. Task errors are recorded per task and never abort siblings.

use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use germkit_core::export;
use germkit_core::*;
use serde_json::json;

use crate::config::{ExperimentConfig, Task};
use crate::manifest::{
    evaluate_cmp, sha256_hex, FileRecord, Flag, RunManifest, TaskRecord, MANIFEST_FILE,
};
use crate::svg;

pub struct Artifact {
    pub path: String,
    pub bytes: Vec<u8>,
}

pub struct RunOutput {
    pub manifest: RunManifest,
    pub artifacts: Vec<Artifact>,
}

struct TaskOutput {
    summary: serde_json::Value,
    flags: Vec<Flag>,
    artifacts: Vec<Artifact>,
}

/// Execute every pipeline requested by the config, entirely in memory.
pub fn execute(config: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    config.validate()?;
    let budget = config.budget;
    let report = classify_fixed_point(&config.map, &budget)?;

    let tasks: Vec<Task> = match config.task {
        Task::All => {
            let mut list = vec![Task::Classify, Task::Omega];
            match report.class {
                FixedPointClass::Attracting | FixedPointClass::Repelling => {
                    list.push(Task::Koenig);
                }
                FixedPointClass::Superattracting => list.push(Task::Boettcher),
                FixedPointClass::Neutral => {}
            }
            match report.class {
                FixedPointClass::Attracting | FixedPointClass::Superattracting => {
                    list.push(Task::Motion);
                }
                _ => {}
            }
            list
        }
        Task::Verify => {
            anyhow::bail!("the verify task checks an existing run directory; use `germkit verify DIR`")
        }
        t => vec![t],
    };

    let mut records = Vec::new();
    let mut artifacts = Vec::new();
    for task in tasks {
        let name = task_name(task);
        let start = Instant::now();
        let outcome = run_task(task, config);
        let wall_ms = start.elapsed().as_millis() as u64;
        match outcome {
            Ok(out) => {
                records.push(TaskRecord {
                    name: name.to_string(),
                    wall_ms,
                    summary: out.summary,
                    flags: out.flags,
                    error: None,
                });
                artifacts.extend(out.artifacts);
            }
            Err(e) => records.push(TaskRecord {
                name: name.to_string(),
                wall_ms,
                summary: serde_json::Value::Null,
                flags: Vec::new(),
                error: Some(e.to_string()),
            }),
        }
    }

    let files = artifacts
        .iter()
        .map(|a| FileRecord {
            path: a.path.clone(),
            sha256: sha256_hex(&a.bytes),
        })
        .collect();
    Ok(RunOutput {
        manifest: RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: format!("sha256:{}", sha256_hex(&config.canonical_bytes())),
            tasks: records,
            files,
        },
        artifacts,
    })
}

fn task_name(task: Task) -> &'static str {
    match task {
        Task::Classify => "classify",
        Task::Koenig => "koenig",
        Task::Boettcher => "boettcher",
        Task::Omega => "omega",
        Task::Motion => "motion",
        Task::Verify => "verify",
        Task::All => "all",
    }
}

fn run_task(task: Task, config: &ExperimentConfig) -> Result<TaskOutput> {
    match task {
        Task::Classify => task_classify(config),
        Task::Koenig => task_koenig(config),
        Task::Boettcher => task_boettcher(config),
        Task::Omega => task_omega(config),
        Task::Motion => task_motion(config),
        Task::Verify | Task::All => unreachable!("expanded by execute"),
    }
}

fn class_consistent(report: &FixedPointReport) -> bool {
    let lam = report.multiplier.norm();
    match report.class {
        FixedPointClass::Attracting => lam > 0.0 && lam < 1.0,
        FixedPointClass::Repelling => lam > 1.0,
        FixedPointClass::Superattracting => {
            lam == 0.0 && report.local_degree.is_some_and(|n| n >= 2)
        }
        FixedPointClass::Neutral => (lam - 1.0).abs() <= 1e-9,
    }
}

fn task_classify(config: &ExperimentConfig) -> Result<TaskOutput> {
    let report = classify_fixed_point(&config.map, &config.budget)?;
    let mut summary = export::classify_summary_json(&report);
    if report.class == FixedPointClass::Attracting {
        let control = control_condition(
            &config.map,
            config.delta,
            config.control.n_max,
            config.control.samples,
        )?;
        summary["control"] = export::control_summary_json(&control);
    }
    let flags = vec![Flag::boolean(
        "class_consistent_with_multiplier",
        class_consistent(&report),
    )];
    Ok(TaskOutput {
        artifacts: vec![Artifact {
            path: "classify.json".into(),
            bytes: pretty_json(&summary),
        }],
        summary,
        flags,
    })
}

/// Outer-decade grid for cross-run uniqueness checks: ratio deviations
/// amplify psi-errors by 1/|z|, so the comparison avoids the tiny rings.
fn comparison_grid(config: &ExperimentConfig) -> Result<PolarGrid> {
    PolarGrid::log_spaced(
        config.grid.r_max / 10.0,
        config.grid.r_max,
        8,
        config.grid.angles.max(16),
    )
}

fn task_koenig(config: &ExperimentConfig) -> Result<TaskOutput> {
    let report = classify_fixed_point(&config.map, &config.budget)?;
    let grid = config.grid.build()?;
    let run = |g: &PolarGrid, budget: &EvalBudget| -> Result<CoordinateGrid> {
        match report.class {
            FixedPointClass::Attracting => koenigs_forward(&config.map, g, budget),
            FixedPointClass::Repelling => koenigs_backward(&config.map, g, budget),
            other => Err(GermError::WrongClass {
                expected: FixedPointClass::Attracting,
                found: other,
            }),
        }
    };
    let cg = run(&grid, &config.budget)?;

    // Uniqueness across two runs at different depths on the outer decade.
    let cmp_grid = comparison_grid(config)?;
    let a = run(&cmp_grid, &config.budget)?;
    let loose = EvalBudget {
        tolerance: (config.budget.tolerance * 100.0).min(1e-6),
        ..config.budget
    };
    let b = run(&cmp_grid, &loose)?;
    let (ratio_mean, ratio_dev) = uniqueness_check(&a, &b)?;

    let mut summary = export::coordinate_summary_json(&cg);
    summary["uniqueness"] = json!({
        "ratio_mean": germkit_core::cxserde::to_json(ratio_mean),
        "ratio_dev": ratio_dev,
    });

    let flags = vec![
        Flag::le(
            "max_residual_le_10_tolerance",
            cg.max_residual,
            10.0 * config.budget.tolerance,
        ),
        Flag::le("normalization_error_le_1e-6", cg.normalization_error, 1e-6),
        Flag::lt("uniqueness_dev_lt_1e-8", ratio_dev, 1e-8),
    ];

    let mut artifacts = vec![
        Artifact {
            path: "koenig_grid.csv".into(),
            bytes: export::coordinate_csv(&cg).into_bytes(),
        },
        Artifact {
            path: "koenig_summary.json".into(),
            bytes: pretty_json(&summary),
        },
    ];
    if config.emit_svg {
        let values: Vec<Option<f64>> = cg.residual.iter().map(|&r| Some(r)).collect();
        artifacts.push(Artifact {
            path: "koenig_residual_heatmap.svg".into(),
            bytes: svg::polar_heatmap("conjugacy residual", &cg.grid, &values, true).into_bytes(),
        });
    }
    Ok(TaskOutput {
        summary,
        flags,
        artifacts,
    })
}

fn task_boettcher(config: &ExperimentConfig) -> Result<TaskOutput> {
    let grid = config.grid.build()?;
    let res = boettcher_coordinate(&config.map, &grid, &config.budget)?;

    let cmp_grid = comparison_grid(config)?;
    let a = boettcher_coordinate(&config.map, &cmp_grid, &config.budget)?;
    let loose = EvalBudget {
        tolerance: (config.budget.tolerance * 100.0).min(1e-6),
        ..config.budget
    };
    let b = boettcher_coordinate(&config.map, &cmp_grid, &loose)?;
    let (root_index, dev) = boettcher_uniqueness(&a.psi, &b.psi, res.n)?;

    let mut summary = export::boettcher_summary_json(&res);
    summary["uniqueness"] = json!({ "root_index": root_index, "dev": dev });

    let flags = vec![
        Flag::le(
            "max_residual_le_10_tolerance",
            res.psi.max_residual,
            10.0 * config.budget.tolerance,
        ),
        Flag::le("normalization_error_le_1e-6", res.psi.normalization_error, 1e-6),
        Flag::lt("uniqueness_dev_lt_1e-7", dev, 1e-7),
    ];

    let mut artifacts = vec![
        Artifact {
            path: "boettcher_grid.csv".into(),
            bytes: export::coordinate_csv(&res.psi).into_bytes(),
        },
        Artifact {
            path: "boettcher_summary.json".into(),
            bytes: pretty_json(&summary),
        },
    ];
    if config.emit_svg {
        let values: Vec<Option<f64>> = res.psi.residual.iter().map(|&r| Some(r)).collect();
        artifacts.push(Artifact {
            path: "boettcher_residual_heatmap.svg".into(),
            bytes: svg::polar_heatmap("conjugacy residual", &res.psi.grid, &values, true)
                .into_bytes(),
        });
    }
    Ok(TaskOutput {
        summary,
        flags,
        artifacts,
    })
}

fn task_omega(config: &ExperimentConfig) -> Result<TaskOutput> {
    let grid = config.grid.build()?;
    let field = beltrami_field(&config.map, &grid, grid.default_fd_step())?;
    let curve = omega_curve(&field)?;

    let monotone = curve.omega.windows(2).all(|w| w[0] <= w[1]);
    let mut flags = vec![Flag::boolean("omega_nondecreasing", monotone)];

    let mut summary = json!({
        "modulus": export::modulus_summary_json(&curve),
        "beltrami": export::beltrami_summary_json(&field),
    });
    if let MapSpec::Perturbed { alpha, .. } = &config.map {
        match holder_mu_bound_check(&config.map, &grid) {
            Ok((c_prime, alpha_fit)) => {
                summary["holder_fit"] = json!({
                    "declared_alpha": alpha,
                    "alpha_fit": alpha_fit,
                    "c_prime": c_prime,
                });
                flags.push(Flag::le(
                    "holder_alpha_within_0.1",
                    (alpha_fit - alpha).abs(),
                    0.1,
                ));
            }
            Err(e) => {
                summary["holder_fit"] = json!({ "error": e.to_string() });
            }
        }
    }

    let mut artifacts = vec![
        Artifact {
            path: "beltrami.csv".into(),
            bytes: export::beltrami_csv(&field).into_bytes(),
        },
        Artifact {
            path: "omega_curve.csv".into(),
            bytes: export::modulus_csv(&curve).into_bytes(),
        },
        Artifact {
            path: "omega_summary.json".into(),
            bytes: pretty_json(&summary),
        },
    ];
    if config.emit_svg {
        let omega_pts: Vec<(f64, f64)> = curve
            .thresholds
            .iter()
            .zip(&curve.omega)
            .map(|(&t, &w)| (t, w))
            .collect();
        let integrand_pts: Vec<(f64, f64)> = curve
            .thresholds
            .iter()
            .zip(&curve.omega)
            .map(|(&t, &w)| (t, w / t))
            .collect();
        let chart = svg::line_chart(
            "omega(t) and integrand omega(t)/t",
            "t",
            "value",
            true,
            false,
            &[
                svg::Series {
                    name: "omega(t)",
                    color: "#1f77b4",
                    points: omega_pts,
                },
                svg::Series {
                    name: "omega(t)/t",
                    color: "#d62728",
                    points: integrand_pts,
                },
            ],
        );
        artifacts.push(Artifact {
            path: "omega_curve.svg".into(),
            bytes: chart.into_bytes(),
        });
        let values: Vec<Option<f64>> = field.mu.iter().map(|m| m.map(|v| v.norm())).collect();
        artifacts.push(Artifact {
            path: "mu_heatmap.svg".into(),
            bytes: svg::polar_heatmap("|mu| on the sampling grid", &field.grid, &values, false)
                .into_bytes(),
        });
    }
    Ok(TaskOutput {
        summary,
        flags,
        artifacts,
    })
}

fn task_motion(config: &ExperimentConfig) -> Result<TaskOutput> {
    let report = classify_fixed_point(&config.map, &config.budget)?;
    let cs = config.motion.c_samples();
    let ms = match report.class {
        FixedPointClass::Attracting => build_motion_koenig(
            &config.map,
            config.motion.r,
            config.delta,
            config.motion.samples,
            &cs,
            &config.budget,
        )?,
        FixedPointClass::Superattracting => build_motion_boettcher(
            &config.map,
            config.motion.r,
            config.motion.samples,
            &cs,
            &config.budget,
        )?,
        other => {
            return Err(GermError::WrongClass {
                expected: FixedPointClass::Attracting,
                found: other,
            })
        }
    };
    let axioms = check_motion_axioms(&ms)?;
    let ext = extend_motion_radial(&ms, config.motion.extension_rings)?;

    let max_k = ext.measured_k.iter().copied().fold(0.0, f64::max);
    let flags = vec![
        Flag::boolean("identity_at_zero_exact", axioms.identity_exact),
        Flag::boolean("injective_per_c", axioms.injective),
        Flag::boolean("circle_images_separated", axioms.separation_ok),
        Flag::lt("cr_residual_lt_1e-6", axioms.cr_max_residual, 1e-6),
        Flag::lt("measured_k_lt_1", max_k, 1.0),
    ];

    let axioms_json = export::motion_axioms_json(&ms, &axioms);
    let ext_json = export::extended_motion_summary_json(&ext);
    let summary = json!({
        "axioms": axioms_json,
        "extension": ext_json,
    });

    let mut artifacts = vec![
        Artifact {
            path: "motion_samples.csv".into(),
            bytes: export::motion_csv(&ms).into_bytes(),
        },
        Artifact {
            path: "motion_extension.csv".into(),
            bytes: export::extended_motion_csv(&ext).into_bytes(),
        },
        Artifact {
            path: "motion_axioms.json".into(),
            bytes: pretty_json(&axioms_json),
        },
        Artifact {
            path: "extension_summary.json".into(),
            bytes: pretty_json(&ext_json),
        },
    ];
    if config.emit_svg {
        // One point per |c| ring: the worst measured k on it.
        let mut per_radius: Vec<(f64, f64, f64)> = Vec::new();
        for (i, c) in ms.c_samples.iter().enumerate() {
            let rho = c.norm();
            match per_radius.iter_mut().find(|p| (p.0 - rho).abs() < 1e-12) {
                Some(p) => p.1 = p.1.max(ext.measured_k[i]),
                None => per_radius.push((rho, ext.measured_k[i], ext.bound[i])),
            }
        }
        per_radius.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let chart = svg::line_chart(
            "measured dilatation vs |c|",
            "|c|",
            "k",
            false,
            false,
            &[
                svg::Series {
                    name: "measured k",
                    color: "#1f77b4",
                    points: per_radius.iter().map(|p| (p.0, p.1)).collect(),
                },
                svg::Series {
                    name: "(1+|c|)/(1-|c|) bound on K",
                    color: "#7f7f7f",
                    points: per_radius.iter().map(|p| (p.0, p.2)).collect(),
                },
            ],
        );
        artifacts.push(Artifact {
            path: "measured_k.svg".into(),
            bytes: chart.into_bytes(),
        });
    }
    Ok(TaskOutput {
        summary,
        flags,
        artifacts,
    })
}

fn pretty_json(v: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).unwrap();
    bytes.push(b'\n');
    bytes
}

/// Run and write: artifacts through a single writer, manifest last.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> anyhow::Result<RunManifest> {
    let out = execute(config)?;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    for artifact in &out.artifacts {
        std::fs::write(dir.join(&artifact.path), &artifact.bytes)
            .with_context(|| format!("writing {}", artifact.path))?;
    }
    let manifest_bytes = pretty_json(&serde_json::to_value(&out.manifest)?);
    std::fs::write(dir.join(MANIFEST_FILE), manifest_bytes)?;
    Ok(out.manifest)
}

#[derive(Debug)]
pub struct VerifyReport {
    pub ok: bool,
    pub problems: Vec<String>,
}

/// Recompute checksums and re-assert every recorded flag.
pub fn verify_bundle(dir: &Path) -> anyhow::Result<VerifyReport> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;

    let mut problems = Vec::new();
    for file in &manifest.files {
        match std::fs::read(dir.join(&file.path)) {
            Ok(bytes) => {
                let actual = sha256_hex(&bytes);
                if actual != file.sha256 {
                    problems.push(format!("checksum mismatch: {}", file.path));
                }
            }
            Err(_) => problems.push(format!("missing file: {}", file.path)),
        }
    }
    for task in &manifest.tasks {
        if let Some(err) = &task.error {
            problems.push(format!("task {} recorded an error: {err}", task.name));
        }
        for flag in &task.flags {
            let recomputed = evaluate_cmp(flag.value, flag.threshold, &flag.cmp);
            if recomputed != flag.pass {
                problems.push(format!(
                    "task {}: flag {} is inconsistent with its recorded values",
                    task.name, flag.name
                ));
            }
            if !flag.pass {
                problems.push(format!("task {}: flag {} failed", task.name, flag.name));
            }
        }
    }
    Ok(VerifyReport {
        ok: problems.is_empty(),
        problems,
    })
}
