use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use hodge_rsm::covering::{check_weight_relative, WeightField};
use hodge_rsm::dec::Cochain;
use hodge_rsm::hodge::{
    czi_study, dual_poisson_solve, poisson_solve, projection_route_agreement, strong_decomposition,
    weak_decomposition, CziSettings, WeakSettings,
};
use hodge_rsm::local::{extract_patch, neumann_series_solve};
use hodge_rsm::rsm::{commutator_bound_check, compact_support_check, raising_steps, RsmConfig};
use hodge_rsm::spectral::{gap_solve, harmonic_embedding_check};
use hodge_rsm::{HodgeError, SimplicialManifold, Workspace};

use crate::config::{MeshSource, RunConfig};
use crate::report::{write_atomic, RunReport};

const RESIDUAL_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-10;
const UNIQUENESS_TOL: f64 = 1e-9;

pub fn manifold_summary(label: &str, m: &SimplicialManifold) -> Value {
    json!({
        "source": label,
        "dimension": m.dim(),
        "counts": m.counts(),
        "euler_characteristic": m.euler_characteristic(),
        "total_volume": m.total_volume(),
        "mean_edge_length": m.mean_edge_length(),
    })
}

pub fn covering_summary(ws: &Workspace) -> Value {
    let cov = ws.covering();
    let rf = ws.radius();
    json!({
        "epsilon": cov.epsilon,
        "divisor": cov.divisor,
        "ball_count": cov.len(),
        "t_meas": cov.overlap,
        "overlap_bound": cov.overlap_bound,
        "radius_min": rf.min(),
        "radius_max": rf.max(),
        "bounded_radius": ws.bounded_radius(),
    })
}

fn load_workspace(cfg: &RunConfig, report: &mut RunReport) -> Result<Workspace> {
    let mesh = report.time("mesh", || cfg.mesh.load())?;
    report.manifold = Some(manifold_summary(&cfg.mesh.label(), &mesh));
    let ws = report.time("covering", || Workspace::new(mesh, cfg.workspace_options()))?;
    report.covering = Some(covering_summary(&ws));
    for &p in &cfg.degrees {
        if p > ws.dim() {
            return Err(HodgeError::Domain(format!("degree {p} exceeds dimension {}", ws.dim())).into());
        }
    }
    Ok(ws)
}

fn relative_weight(ws: &Workspace, spec: &crate::config::WeightSpec) -> Result<WeightField> {
    let mut w = spec.build(ws.mesh(), ws.radius())?;
    check_weight_relative(ws.mesh(), &mut w, ws.covering());
    Ok(w)
}

/// RSM exponent: r itself up to 2, the dual exponent above.
fn rsm_config(cfg: &RunConfig, w: &WeightField) -> RsmConfig {
    let r = if cfg.r > 2.0 { cfg.r / (cfg.r - 1.0) } else { cfg.r };
    let mut c = RsmConfig::new(r).with_target(cfg.s);
    c.steps = cfg.steps;
    c.weight = Some(w.values.clone());
    c
}

fn degree_rng(cfg: &RunConfig, p: usize, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((p as u64) << 32) ^ salt)
}

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub fn cmd_generate(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let name = match &cfg.mesh {
        MeshSource::Generator { kind, resolution, .. } => format!("{kind}_{resolution}.off"),
        MeshSource::Path { .. } => bail!("generate needs a generator mesh source"),
    };
    let m = cfg.mesh.load()?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.join(name));
    write_atomic(&path, hodge_rsm::mesh::write_off(&m).as_bytes())?;
    Ok(path)
}

pub fn cmd_cover(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("cover", cfg);
    let ws = load_workspace(cfg, &mut report)?;
    let cov = ws.covering();
    println!("T_meas = {}, bound = {:.1}", cov.overlap, cov.overlap_bound);
    report.check_le("overlap", cov.overlap as f64, cov.overlap_bound);
    report.check_le("core_ball_overlaps", cov.disjointness_violations(ws.mesh()).len() as f64, 0.0);
    let defect = ws.partition().sum_defect(ws.mesh().num_vertices());
    report.check_le("partition_sum_defect", defect, 1e-12);
    let mut doc = cov.to_json();
    doc["radius"] = json!(ws.radius().radius);
    write_atomic(&cfg.output.join("covering.json"), serde_json::to_string_pretty(&doc)?.as_bytes())?;
    Ok(report)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("solve", cfg);
    let ws = load_workspace(cfg, &mut report)?;
    if !(cfg.r < 2.0) {
        report.note(format!("Poisson solves need r < 2 (got {}); nothing solved", cfg.r));
        return Ok(report);
    }
    let w = relative_weight(&ws, &cfg.weight)?;
    let alpha = relative_weight(&ws, &cfg.alpha)?;
    let rc = rsm_config(cfg, &w);
    let dec = ws.dec();
    for &p in &cfg.degrees {
        let spec = report.time(&format!("spectrum_p{p}"), || ws.spectrum(p))?;
        let mut rng = degree_rng(cfg, p, 1);
        let mut entries = Vec::new();
        for i in 0..cfg.forms {
            let mut omega = Cochain::random(ws.mesh(), p, &mut rng);
            spec.deflate(dec, &mut omega.values);
            let sol = report.time(&format!("poisson_p{p}_{i}"), || poisson_solve(&ws, &omega, &rc, &alpha))?;
            report.check_le(format!("p{p}.form{i}.poisson_residual"), sol.residual, RESIDUAL_TOL);
            let gap = gap_solve(dec, spec, &omega)?;
            report.check_true(format!("p{p}.form{i}.gap_bound"), gap.bound_holds);
            let dual = report.time(&format!("dual_p{p}_{i}"), || dual_poisson_solve(&ws, &omega, &rc))?;
            report.check_le(format!("p{p}.form{i}.dual_residual"), dual.residual, RESIDUAL_TOL);
            if i == 0 {
                write_atomic(&cfg.output.join(format!("ladder_p{p}.csv")), sol.trace.ladder_csv().as_bytes())?;
            }
            entries.push(json!({
                "residual": sol.residual,
                "sobolev_norm": sol.sobolev_norm,
                "integrability_exponent": sol.integrability_exponent,
                "lt_norm": sol.lt_norm,
                "weight_integrability": sol.weight_integrability,
                "gap_residual": gap.residual,
                "dual_residual": dual.residual,
                "dual_exponent": dual.dual_exponent,
                "dual_weighted_norm": dual.weighted_norm,
                "dual_sobolev_norm": dual.sobolev_norm,
                "trace": sol.trace,
            }));
        }
        report.sections.insert(format!("solve_p{p}"), json!({ "spectrum": spec, "forms": entries }));
    }
    Ok(report)
}

pub fn cmd_decompose(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("decompose", cfg);
    let ws = load_workspace(cfg, &mut report)?;
    let w = relative_weight(&ws, &cfg.weight)?;
    let alpha = relative_weight(&ws, &cfg.alpha)?;
    let rc = RsmConfig { r: cfg.r, ..rsm_config(cfg, &w) };
    let dec = ws.dec();
    for &p in &cfg.degrees {
        let spec = report.time(&format!("spectrum_p{p}"), || ws.spectrum(p))?;
        report.check_true(
            format!("p{p}.harmonic_dimension"),
            !spec.near_kernel_cluster && spec.harmonic_dim == spec.ranks.harmonic,
        );
        let ranks = &spec.ranks;
        report.check_true(format!("p{p}.rank_identity"), spec.harmonic_dim + ranks.exact + ranks.coexact == ranks.total);
        let mut section = json!({ "spectrum": spec });
        let mut rng = degree_rng(cfg, p, 2);
        let mut forms = Vec::new();
        let mut csv = String::from("form,harmonic_exact,harmonic_coexact,exact_coexact\n");
        for i in 0..cfg.forms {
            let omega = Cochain::random(ws.mesh(), p, &mut rng);
            let d = match report.time(&format!("decompose_p{p}_{i}"), || strong_decomposition(&ws, &omega, &rc, cfg.mode)) {
                Err(HodgeError::NotApplicable(why)) => {
                    report.note(format!("p{p}: strong decomposition skipped: {why}"));
                    break;
                }
                other => other?,
            };
            report.check_le(format!("p{p}.form{i}.reconstruction"), d.residual, RESIDUAL_TOL);
            report.check_le(format!("p{p}.form{i}.orthogonality"), d.orthogonality.max(), RESIDUAL_TOL);
            let t = d.orthogonality;
            csv.push_str(&format!("{i},{:e},{:e},{:e}\n", t.harmonic_exact, t.harmonic_coexact, t.exact_coexact));
            let norms = d.norms(dec);
            forms.push(json!({
                "mode": d.mode,
                "input_norm": d.input_norm,
                "harmonic_norm": norms[0],
                "exact_norm": norms[1],
                "coexact_norm": norms[2],
                "residual": d.residual,
                "orthogonality": d.orthogonality,
            }));
            if i == 0 && cfg.r <= 2.0 {
                let agree = projection_route_agreement(&ws, &omega, &rc)?;
                report.check_le(format!("p{p}.route_agreement"), agree.relative_difference, RESIDUAL_TOL);
                section["route_agreement"] = json!(agree);
            }
        }
        write_atomic(&cfg.output.join(format!("orthogonality_p{p}.csv")), csv.as_bytes())?;
        section["forms"] = json!(forms);

        // ω = Δψ carries no harmonic part
        let psi = Cochain::random(ws.mesh(), p, &mut rng);
        let lap = Cochain { degree: p, values: dec.laplacian(p, &psi.values) };
        if let Ok(d) = strong_decomposition(&ws, &lap, &rc, cfg.mode) {
            let rel = relative(dec.norm(p, &d.harmonic.values), dec.norm(p, &lap.values));
            report.check_le(format!("p{p}.laplacian_form_harmonic_part"), rel, UNIQUENESS_TOL);
            section["laplacian_form_harmonic_part"] = json!(rel);
        }
        if let Some(h) = spec.harmonic_basis().into_iter().next() {
            if let Ok(d) = strong_decomposition(&ws, &h, &rc, cfg.mode) {
                let err = dec.norm(p, &d.harmonic.minus(&h).values);
                report.check_le(format!("p{p}.uniqueness"), err, UNIQUENESS_TOL);
                section["uniqueness_error"] = json!(err);
            }
        }
        if cfg.weak {
            let omega = Cochain::random(ws.mesh(), p, &mut rng);
            match weak_decomposition(&ws, &omega, &rc, &alpha, cfg.mode, &WeakSettings::default()) {
                Ok(wd) => {
                    report.check_true(format!("p{p}.weak_monotone"), wd.strictly_decreasing);
                    report.check_le(format!("p{p}.weak_reconstruction"), wd.finest.residual, RESIDUAL_TOL);
                    section["weak"] = json!({ "levels": wd.levels, "strictly_decreasing": wd.strictly_decreasing, "mode": wd.finest.mode });
                }
                Err(HodgeError::NotApplicable(why)) => report.note(format!("p{p}: weak decomposition skipped: {why}")),
                Err(e) => return Err(e.into()),
            }
        }
        report.sections.insert(format!("decompose_p{p}"), section);
    }
    Ok(report)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("verify", cfg);
    let ws = load_workspace(cfg, &mut report)?;
    let w = relative_weight(&ws, &cfg.weight)?;
    let rc = rsm_config(cfg, &w);
    let dec = ws.dec();
    let m = ws.mesh();
    let cov = ws.covering();
    let part = ws.partition();
    let nv = m.num_vertices();
    for &p in &cfg.degrees {
        let mut section = json!({});
        let mut rng = degree_rng(cfg, p, 3);
        let omega = Cochain::random(m, p, &mut rng);
        let out = report.time(&format!("raising_steps_p{p}"), || raising_steps(&ws, &omega, &rc))?;
        report.check_le(format!("p{p}.rsm_identity"), out.trace.identity_residual, IDENTITY_TOL);
        let worst = out
            .trace
            .step_diagnostics
            .iter()
            .flat_map(|d| d.ledger.iter())
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min);
        report.push_margin(format!("p{p}.ledger"), out.trace.ledger_holds, worst);
        write_atomic(&cfg.output.join(format!("ladder_p{p}.csv")), out.trace.ladder_csv().as_bytes())?;
        section["rsm"] = json!(out.trace);

        // a form supported on one simplex stays within the covering layers
        let mut local = Cochain::zeros(m, p);
        local.values[0] = 1.0;
        let lo = raising_steps(&ws, &local, &rc)?;
        let support = compact_support_check(m, cov, &local, &lo.v, &lo.tilde, lo.trace.steps);
        report.check_true(format!("p{p}.compact_support"), support.holds);
        section["support"] = json!(support);

        let balls: Vec<usize> = (0..cov.len()).step_by((cov.len() / 8).max(1)).collect();
        let mut violations = 0;
        for &j in &balls {
            let chi = part.column_dense(j, nv);
            violations += commutator_bound_check(dec, &chi, part.c_chi, &omega).violations;
        }
        report.check_le(format!("p{p}.commutator_bound"), violations as f64, 0.0);

        let mut studies = Vec::new();
        let modes: &[bool] = if ws.bounded_radius() { &[false, true] } else { &[false] };
        for &classical in modes {
            let settings = CziSettings {
                r: cfg.r,
                samples: cfg.czi_samples,
                held_out: cfg.czi_samples,
                seed: cfg.seed ^ ((p as u64 + 1) * 0x51),
                classical,
                ..Default::default()
            };
            let tag = if classical { "classical" } else { "twisted" };
            let czi = report.time(&format!("czi_{tag}_p{p}"), || czi_study(&ws, p, &w, &settings))?;
            report.push_margin(format!("p{p}.czi_{tag}_held_out"), czi.held_out_holds, czi.held_out_margin);
            write_atomic(&cfg.output.join(format!("czi_{tag}_p{p}.csv")), czi.fit.to_csv().as_bytes())?;
            studies.push(czi);
        }
        section["czi"] = json!(studies);

        let spec = ws.spectrum(p)?;
        let mut ratios = Vec::new();
        for s in [2.0, 4.0, 16.0] {
            let e = harmonic_embedding_check(dec, spec, s, 8, &mut rng)?;
            if s == 2.0 && spec.harmonic_dim > 0 {
                report.check_le(format!("p{p}.embedding_s2"), (e.c_s - 1.0).abs(), 1e-12);
            }
            report.check_true(format!("p{p}.embedding_s{s}_finite"), e.c_s.is_finite());
            ratios.push(e);
        }
        section["embedding"] = json!(ratios);

        if cfg.neumann_series {
            let mut rows = Vec::new();
            for &j in balls.iter().take(4) {
                let patch = extract_patch(m, cov, j)?;
                if !patch.has_boundary() {
                    continue;
                }
                let res = neumann_series_solve(dec, &patch, &omega, cfg.r.min(2.0), 200, 1e-10)?;
                report.check_true(format!("p{p}.neumann_ball{j}"), res.converged);
                rows.push(json!({ "ball": j, "contraction": res.contraction, "iterations": res.iterations, "residual": res.residual }));
            }
            section["neumann"] = json!(rows);
        }
        report.sections.insert(format!("verify_p{p}"), section);
    }
    Ok(report)
}

/// Pass/fail summary of the reports in the output directory.
pub fn cmd_report(cfg: &RunConfig) -> Result<i32> {
    let mut code = 0;
    let mut found = false;
    let mut entries: Vec<_> = std::fs::read_dir(&cfg.output)
        .with_context(|| format!("reading {}", cfg.output.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with("_report.json")))
        .collect();
    entries.sort();
    for path in entries {
        found = true;
        let text = std::fs::read_to_string(&path)?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let checks = v["checks"].as_array().cloned().unwrap_or_default();
        let failed: Vec<_> = checks.iter().filter(|c| c["passed"] != Value::Bool(true)).collect();
        println!("{}: {} checks, {} failed", path.display(), checks.len(), failed.len());
        for c in failed {
            println!("  FAIL {} (value {}, threshold {})", c["name"], c["value"], c["threshold"]);
            code = 1;
        }
    }
    if !found {
        bail!("no reports in {}", cfg.output.display());
    }
    Ok(code)
}
