use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hodge_rsm::dec::Cochain;
use hodge_rsm::hodge::{strong_decomposition, DecompositionMode};
use hodge_rsm::rsm::{raising_steps, RsmConfig};
use hodge_rsm::spectral::{gap_solve, harmonic_projection};
use hodge_rsm::{generate_test_manifold, ManifoldKind, Workspace, WorkspaceOptions};

fn torus() -> &'static Workspace {
    static WS: OnceLock<Workspace> = OnceLock::new();
    WS.get_or_init(|| {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        Workspace::new(m, WorkspaceOptions::default()).unwrap()
    })
}

fn form(ws: &Workspace, p: usize, seed: u64) -> Cochain {
    Cochain::random(ws.mesh(), p, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn rel(ws: &Workspace, p: usize, a: &Cochain, b: &Cochain) -> f64 {
    let dec = ws.dec();
    dec.norm(p, &a.minus(b).values) / dec.norm(p, &b.values).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coboundary_squares_to_zero(p in 0usize..1, seed in any::<u64>()) {
        let ws = torus();
        let x = form(ws, p, seed);
        let ddx = ws.dec().d(p + 1, &ws.dec().d(p, &x.values));
        prop_assert!(ddx.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn laplacian_is_nonnegative(p in 0usize..3, seed in any::<u64>()) {
        let ws = torus();
        let dec = ws.dec();
        let x = form(ws, p, seed);
        prop_assert!(dec.inner(p, &x.values, &dec.laplacian(p, &x.values)) >= -1e-12 * dec.inner(p, &x.values, &x.values));
    }

    #[test]
    fn harmonic_projection_is_idempotent_and_kills_laplacians(p in 0usize..3, seed in any::<u64>()) {
        let ws = torus();
        let dec = ws.dec();
        let spec = ws.spectrum(p).unwrap();
        let x = form(ws, p, seed);
        let h = harmonic_projection(dec, spec, &x).unwrap();
        let hh = harmonic_projection(dec, spec, &h).unwrap();
        prop_assert!(dec.norm(p, &hh.minus(&h).values) <= 1e-10 * dec.norm(p, &x.values));
        let lap = Cochain { degree: p, values: dec.laplacian(p, &x.values) };
        let hl = harmonic_projection(dec, spec, &lap).unwrap();
        prop_assert!(dec.norm(p, &hl.values) <= 1e-10 * dec.norm(p, &lap.values));
    }

    #[test]
    fn gap_solve_inverts_the_laplacian_off_harmonics(p in 0usize..3, seed in any::<u64>()) {
        let ws = torus();
        let dec = ws.dec();
        let spec = ws.spectrum(p).unwrap();
        let mut g = form(ws, p, seed);
        spec.deflate(dec, &mut g.values);
        let sol = gap_solve(dec, spec, &g).unwrap();
        prop_assert!(sol.residual <= 1e-9);
        prop_assert!(sol.bound_holds);
        let hf = harmonic_projection(dec, spec, &sol.f).unwrap();
        prop_assert!(dec.norm(p, &hf.values) <= 1e-9 * dec.norm(p, &sol.f.values).max(1e-300));
    }

    #[test]
    fn raising_steps_is_linear(p in 0usize..2, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let ws = torus();
        let cfg = RsmConfig::new(1.5);
        let (x, y) = (form(ws, p, seed), form(ws, p, seed.wrapping_add(1)));
        let vx = raising_steps(ws, &x, &cfg).unwrap().v;
        let vy = raising_steps(ws, &y, &cfg).unwrap().v;
        let mix = raising_steps(ws, &x.scaled(a).plus(&y.scaled(b)), &cfg).unwrap().v;
        let expect = vx.scaled(a).plus(&vy.scaled(b));
        prop_assert!(rel(ws, p, &mix, &expect) <= 1e-9 || ws.dec().norm(p, &expect.values) < 1e-12);
    }

    #[test]
    fn strong_decomposition_reconstructs(p in 0usize..3, seed in any::<u64>(), dd in any::<bool>()) {
        let ws = torus();
        let mode = if dd { DecompositionMode::DDstar } else { DecompositionMode::Laplacian };
        let x = form(ws, p, seed);
        let d = strong_decomposition(ws, &x, &RsmConfig::new(1.5), mode).unwrap();
        let sum = d.harmonic.plus(&d.exact).plus(&d.coexact);
        prop_assert!(rel(ws, p, &sum, &x) <= 1e-8);
        prop_assert!(d.orthogonality.max() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn partition_of_unity_sums_to_one(eps in 0.05f64..0.5, n in 6usize..12) {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, n, 0.0).unwrap();
        let nv = m.num_vertices();
        let ws = Workspace::new(m, WorkspaceOptions { epsilon: eps, ..Default::default() }).unwrap();
        prop_assert!(ws.partition().sum_defect(nv) <= 1e-12);
        prop_assert!(ws.covering().membership.iter().all(|&c| c > 0));
        prop_assert!(ws.covering().disjointness_violations(ws.mesh()).is_empty());
    }
}
