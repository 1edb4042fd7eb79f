//! End-to-end acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hodge_rsm::covering::{check_radius_lipschitz, overlap_bound, WeightField};
use hodge_rsm::dec::{Cochain, Dec};
use hodge_rsm::hodge::{
    czi_study, dual_poisson_solve, poisson_solve, projection_route_agreement, strong_decomposition,
    weak_decomposition, CziSettings, DecompositionMode, WeakSettings,
};
use hodge_rsm::rsm::{raising_steps, RsmConfig};
use hodge_rsm::spectral::{gap_solve, harmonic_embedding_check};
use hodge_rsm::{generate_test_manifold, ManifoldKind, Workspace, WorkspaceOptions};
use hodge_rsm_cli::{cmd_decompose, without_timestamp, RunConfig};

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn workspace(kind: ManifoldKind, n: usize, distortion: f64) -> Workspace {
    let m = generate_test_manifold(kind, n, distortion).expect("generator");
    Workspace::new(m, WorkspaceOptions::default()).expect("workspace")
}

fn within(limit: f64, start: Instant) -> (bool, Duration) {
    let t = start.elapsed();
    (t.as_secs_f64() < limit, t)
}

fn random_forms(ws: &Workspace, p: usize, count: usize, seed: u64) -> Vec<Cochain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Cochain::random(ws.mesh(), p, &mut rng)).collect()
}

fn projected(ws: &Workspace, p: usize, count: usize, seed: u64) -> Vec<Cochain> {
    let spec = ws.spectrum(p).expect("spectrum");
    random_forms(ws, p, count, seed)
        .into_iter()
        .map(|mut x| {
            spec.deflate(ws.dec(), &mut x.values);
            x
        })
        .collect()
}

/// Kernel dimension of M^{-1/2} S M^{-1/2} by a dense symmetric eigensolve.
fn dense_kernel_dim(dec: &Dec, p: usize, rel_tol: f64) -> usize {
    let n = dec.count(p);
    let mass = dec.mass(p);
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in dec.stiffness(p).triplets() {
        a[(i, j)] += v / (mass[i] * mass[j]).sqrt();
    }
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a).eigenvalues;
    let top = eig.iter().copied().fold(0.0, f64::max);
    eig.iter().filter(|&&v| v < rel_tol * top).count()
}

/// Rank of the dense coboundary d_p by singular values.
fn dense_rank(dec: &Dec, p: usize) -> usize {
    let d = dec.coboundary(p);
    let mut a = DMatrix::<f64>::zeros(d.nrows(), d.ncols());
    for (i, j, v) in d.triplets() {
        a[(i, j)] = v;
    }
    a.rank(1e-9)
}

fn cochain_identities() -> Outcome {
    let start = Instant::now();
    let mut worst_adj: f64 = 0.0;
    let mut worst_rq = f64::INFINITY;
    let mut dd = 0;
    for kind in [ManifoldKind::FlatTorus, ManifoldKind::Sphere] {
        let m = generate_test_manifold(kind, 16, 0.0).unwrap();
        dd = dd.max(m.boundary_composition_defect());
        let dec = Dec::from_mesh(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in 0..=m.dim() {
            if p < m.dim() {
                let pairs: Vec<_> = (0..10)
                    .map(|_| (Cochain::random(&m, p, &mut rng).values, Cochain::random(&m, p + 1, &mut rng).values))
                    .collect();
                worst_adj = worst_adj.max(dec.adjointness_defect(p, &pairs));
            }
            for _ in 0..10 {
                let x = Cochain::random(&m, p, &mut rng);
                let rq = dec.inner(p, &x.values, &dec.laplacian(p, &x.values)) / dec.inner(p, &x.values, &x.values);
                worst_rq = worst_rq.min(rq);
            }
        }
    }
    let (fast, t) = within(1.0, start);
    ok(
        dd == 0 && worst_adj <= 1e-12 && worst_rq >= -1e-12 && fast,
        format!("|d∘d| = {dd}, adjointness {worst_adj:.1e}, min Rayleigh {worst_rq:.2e}, {t:.2?}"),
    )
}

fn covering_soundness() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, n, d) in [(ManifoldKind::FlatTorus, 16, 0.0), (ManifoldKind::FlatTorus, 32, 0.0), (ManifoldKind::BumpyTorus, 16, 0.3)] {
        let ws = workspace(kind, n, d);
        let cov = ws.covering();
        let nv = ws.mesh().num_vertices();
        let covered = cov.membership.iter().all(|&c| c > 0);
        let disjoint = cov.disjointness_violations(ws.mesh()).is_empty();
        let defect = ws.partition().sum_defect(nv);
        let lipschitz = check_radius_lipschitz(ws.mesh(), ws.radius()).is_empty();
        let bound = overlap_bound(0.1, ws.dim());
        let good = covered && disjoint && (cov.overlap as f64) <= bound && defect <= 1e-12 && lipschitz;
        pass &= good;
        parts.push(format!("{kind}({n}) T={} defect {defect:.1e}", cov.overlap));
    }
    let (fast, t) = within(10.0, start);
    ok(pass && fast, format!("{}, {t:.2?}", parts.join("; ")))
}

fn harmonic_dimensions() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, expected) in [(ManifoldKind::FlatTorus, [1, 2]), (ManifoldKind::Sphere, [1, 0])] {
        let ws = workspace(kind, 16, 0.0);
        for p in [0, 1] {
            let spec = ws.spectrum(p).unwrap();
            let oracle = dense_kernel_dim(ws.dec(), p, 1e-8);
            pass &= spec.harmonic_dim == expected[p] && oracle == expected[p] && !spec.near_kernel_cluster;
            parts.push(format!("{kind} p{p}: {} (oracle {oracle})", spec.harmonic_dim));
        }
    }
    let (fast, t) = within(30.0, start);
    ok(pass && fast, format!("{}, {t:.2?}", parts.join(", ")))
}

fn rsm_identity_and_linearity(ws: &Workspace) -> Outcome {
    let start = Instant::now();
    let cfg = RsmConfig::new(1.5).with_target(2.0);
    let dec = ws.dec();
    let mut worst_id: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    let mut ledger = true;
    for p in [0, 1] {
        let forms = random_forms(ws, p, 20, 40 + p as u64);
        let outs: Vec<_> = forms.iter().map(|w| raising_steps(ws, w, &cfg).unwrap()).collect();
        for o in &outs {
            worst_id = worst_id.max(o.trace.identity_residual);
            ledger &= o.trace.ledger_holds;
        }
        for i in (0..20).step_by(2) {
            let (a, b) = (1.3, -0.7);
            let mix = forms[i].scaled(a).plus(&forms[i + 1].scaled(b));
            let out = raising_steps(ws, &mix, &cfg).unwrap();
            let expect = outs[i].v.scaled(a).plus(&outs[i + 1].v.scaled(b));
            let rel = dec.norm(p, &out.v.minus(&expect).values) / dec.norm(p, &expect.values);
            worst_lin = worst_lin.max(rel);
        }
    }
    let (fast, t) = within(60.0, start);
    ok(
        worst_id <= 1e-10 && worst_lin <= 1e-9 && ledger && fast,
        format!("identity {worst_id:.1e}, superposition {worst_lin:.1e}, ledger holds: {ledger}, {t:.2?}"),
    )
}

fn route_agreement(ws: &Workspace) -> Outcome {
    let cfg = RsmConfig::new(1.5);
    let mut worst: f64 = 0.0;
    for p in [0, 1] {
        for w in random_forms(ws, p, 20, 40 + p as u64) {
            worst = worst.max(projection_route_agreement(ws, &w, &cfg).unwrap().relative_difference);
        }
    }
    ok(worst <= 1e-8, format!("max relative difference {worst:.1e}"))
}

fn poisson_solves(ws: &Workspace) -> Outcome {
    let cfg = RsmConfig::new(1.5);
    let alpha = WeightField::constant(ws.mesh().num_vertices());
    let (mut primal, mut dual): (f64, f64) = (0.0, 0.0);
    let mut bound = true;
    for p in [0, 1] {
        for w in projected(ws, p, 5, 60 + p as u64) {
            primal = primal.max(poisson_solve(ws, &w, &cfg, &alpha).unwrap().residual);
            dual = dual.max(dual_poisson_solve(ws, &w, &cfg).unwrap().residual);
        }
        let spec = ws.spectrum(p).unwrap();
        for g in projected(ws, p, 100, 70 + p as u64) {
            bound &= gap_solve(ws.dec(), spec, &g).unwrap().bound_holds;
        }
    }
    ok(primal <= 1e-8 && dual <= 1e-8 && bound, format!("primal {primal:.1e}, dual {dual:.1e}, gap bound kept: {bound}"))
}

fn strong_decompositions(ws: &Workspace) -> Outcome {
    let cfg = RsmConfig::new(1.5);
    let dec = ws.dec();
    let (mut residual, mut ortho, mut unique): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut ranks = true;
    for p in [0, 1] {
        for mode in [DecompositionMode::Laplacian, DecompositionMode::DDstar] {
            for w in random_forms(ws, p, 5, 80 + p as u64) {
                let d = strong_decomposition(ws, &w, &cfg, mode).unwrap();
                residual = residual.max(d.residual);
                ortho = ortho.max(d.orthogonality.max());
            }
        }
        let spec = ws.spectrum(p).unwrap();
        for h in spec.harmonic_basis() {
            let d = strong_decomposition(ws, &h, &cfg, DecompositionMode::DDstar).unwrap();
            unique = unique.max(dec.norm(p, &d.harmonic.minus(&h).values));
        }
        let exact = if p == 0 { 0 } else { dense_rank(dec, p - 1) };
        let coexact = dense_rank(dec, p);
        ranks &= spec.harmonic_dim + exact + coexact == dec.count(p);
    }
    ok(
        residual <= 1e-8 && ortho <= 1e-8 && unique <= 1e-9 && ranks,
        format!("residual {residual:.1e}, orthogonality {ortho:.1e}, uniqueness {unique:.1e}, rank identity: {ranks}"),
    )
}

fn weak_decompositions(ws: &Workspace) -> Outcome {
    let cfg = RsmConfig::new(1.5);
    let alpha = WeightField::constant(ws.mesh().num_vertices());
    let mut pass = true;
    let mut runs = 0;
    for p in [0, 1] {
        for w in random_forms(ws, p, 5, 90 + p as u64) {
            let wd = weak_decomposition(ws, &w, &cfg, &alpha, DecompositionMode::Laplacian, &WeakSettings::default()).unwrap();
            pass &= wd.strictly_decreasing;
            runs += 1;
        }
    }
    ok(pass, format!("{runs} runs, strictly decreasing: {pass}"))
}

fn weighted_czi(coarse: &Workspace, fine: &Workspace) -> Outcome {
    let settings = CziSettings::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [0, 1] {
        let fits: Vec<_> = [coarse, fine]
            .iter()
            .map(|ws| czi_study(ws, p, &WeightField::constant(ws.mesh().num_vertices()), &settings).unwrap())
            .collect();
        let held = fits.iter().map(|f| f.held_out_margin).fold(f64::INFINITY, f64::min);
        let drift = |a: f64, b: f64| (a - b).abs() / a.max(b);
        let change = drift(fits[0].fit.c1, fits[1].fit.c1).max(drift(fits[0].fit.c2, fits[1].fit.c2));
        if change > 0.25 && change <= 0.5 {
            eprintln!("warning: CZI constants for p{p} moved {:.0}% between resolutions", 100.0 * change);
        }
        pass &= held >= 0.0 && change <= 0.5;
        parts.push(format!(
            "p{p}: C = ({:.3}, {:.3}) → ({:.3}, {:.3}), change {:.0}%, held-out margin {held:.1e}",
            fits[0].fit.c1,
            fits[0].fit.c2,
            fits[1].fit.c1,
            fits[1].fit.c2,
            100.0 * change
        ));
    }
    ok(pass, parts.join("; "))
}

fn harmonic_embedding(coarse: &Workspace, fine: &Workspace) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [2.0, 4.0, 16.0] {
        let c: Vec<f64> = [coarse, fine]
            .iter()
            .map(|ws| {
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                harmonic_embedding_check(ws.dec(), ws.spectrum(1).unwrap(), s, 32, &mut rng).unwrap().c_s
            })
            .collect();
        let stable = (c[1] - c[0]).abs() <= 0.1 * c[0];
        let exact = s != 2.0 || c.iter().all(|x| (x - 1.0).abs() <= 1e-12);
        pass &= c.iter().all(|x| x.is_finite()) && stable && exact;
        parts.push(format!("s={s}: {:.4} → {:.4}", c[0], c[1]));
    }
    ok(pass, parts.join(", "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { output: dir.path().to_path_buf(), seed: 11, forms: 2, ..Default::default() };
    let run = || {
        let path = cmd_decompose(&cfg).unwrap().write(&cfg.output).unwrap();
        without_timestamp(&std::fs::read_to_string(path).unwrap()).unwrap()
    };
    let (a, b) = (run(), run());
    ok(a == b, if a == b { "identical reports" } else { "reports differ" })
}

fn main() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).try_init();
    let torus16 = workspace(ManifoldKind::FlatTorus, 16, 0.0);
    let torus32 = workspace(ManifoldKind::FlatTorus, 32, 0.0);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("cochain identities", Box::new(cochain_identities)),
        ("covering soundness", Box::new(covering_soundness)),
        ("harmonic dimensions", Box::new(harmonic_dimensions)),
        ("raising steps identity and linearity", Box::new(|| rsm_identity_and_linearity(&torus16))),
        ("projection route agreement", Box::new(|| route_agreement(&torus16))),
        ("Poisson solves", Box::new(|| poisson_solves(&torus16))),
        ("strong decomposition", Box::new(|| strong_decompositions(&torus16))),
        ("weak decomposition", Box::new(|| weak_decompositions(&torus16))),
        ("weighted Calderón–Zygmund inequality", Box::new(|| weighted_czi(&torus16, &torus32))),
        ("harmonic embedding", Box::new(|| harmonic_embedding(&torus16, &torus32))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, out.detail);
        failed += usize::from(!out.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
