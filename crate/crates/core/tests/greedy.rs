use greedy_recovery::experiments::peaks;
use greedy_recovery::{
    greedy_select, lagrange_coefficients, lebesgue_constant, power_function_direct, recover, DenseSystem,
    SobolevKernelSpec, StopReason, StopRule,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)]).collect()
}

fn m3() -> SobolevKernelSpec {
    SobolevKernelSpec::new(3.0, 2, 1.0).unwrap()
}

/// Per step, the candidate minimizing the dense P² of (chosen so far + it).
fn brute_force_greedy(z: &[f64; 2], cands: &[[f64; 2]], spec: &SobolevKernelSpec, k: usize) -> (Vec<usize>, f64) {
    let mut chosen: Vec<usize> = Vec::new();
    let mut p2 = 1.0;
    for _ in 0..k {
        let mut best = (usize::MAX, f64::INFINITY);
        for c in (0..cands.len()).filter(|c| !chosen.contains(c)) {
            let mut sites: Vec<[f64; 2]> = chosen.iter().map(|&i| cands[i]).collect();
            sites.push(cands[c]);
            let v = power_function_direct(&sites, spec, z).unwrap();
            if v < best.1 {
                best = (c, v);
            }
        }
        chosen.push(best.0);
        p2 = best.1;
    }
    (chosen, p2)
}

#[test]
fn twenty_candidates_match_dense_oracle_and_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..10 {
        let cands = random_points(&mut rng, 20);
        let z = random_points(&mut rng, 1)[0];
        let sel = greedy_select(&z, &cands, &m3(), &StopRule::fixed(6).unwrap()).unwrap();
        assert_eq!(sel.len(), 6);
        let sites: Vec<[f64; 2]> = sel.site_indices().iter().map(|&i| cands[i]).collect();
        let direct = power_function_direct(&sites, &m3(), &z).unwrap();
        assert!(((sel.p2() - direct) / direct).abs() <= 1e-9);
        let (brute, brute_p2) = brute_force_greedy(&z, &cands, &m3(), 6);
        assert_eq!(sel.site_indices(), brute.as_slice());
        assert!(((brute_p2 - sel.p2()) / sel.p2()).abs() <= 1e-9);
    }
}

#[test]
fn lagrange_weights_equal_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let cands = random_points(&mut rng, 25);
        let z = random_points(&mut rng, 1)[0];
        let sel = greedy_select(&z, &cands, &m3(), &StopRule::fixed(6).unwrap()).unwrap();
        let sites: Vec<[f64; 2]> = sel.site_indices().iter().map(|&i| cands[i]).collect();
        let dense = DenseSystem::new(&sites, &m3()).unwrap().weights(&z).unwrap();
        let l = lagrange_coefficients(&sel).unwrap();
        for (a, b) in l.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
        let lc = lebesgue_constant(&l);
        assert!(lc >= l.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
}

#[test]
fn single_site_weight() {
    let spec = m3();
    let z = [0.1, 0.3];
    let x = [0.4, -0.2];
    let sel = greedy_select(&z, &[x], &spec, &StopRule::fixed(1).unwrap()).unwrap();
    let l = lagrange_coefficients(&sel).unwrap();
    assert!((l[0] - spec.eval(&z, &x).unwrap()).abs() < 1e-15);
}

#[test]
fn weights_are_unit_vector_at_a_selected_site() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cands = random_points(&mut rng, 15);
    let sel = greedy_select(&[0.0, 0.0], &cands, &m3(), &StopRule::fixed(6).unwrap()).unwrap();
    // rerun at the third selected site: it must win immediately
    let target = cands[sel.site_indices()[2]];
    let at_site = greedy_select(&target, &cands, &m3(), &StopRule::fixed(6).unwrap()).unwrap();
    assert_eq!(at_site.site_indices()[0], sel.site_indices()[2]);
    assert_eq!(at_site.p2(), 0.0);
    let l = lagrange_coefficients(&at_site).unwrap();
    assert_eq!(l, vec![1.0]);
    assert_eq!(lebesgue_constant(&l), 1.0);
}

#[test]
fn kernel_translates_are_reproduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = m3();
    let cands = random_points(&mut rng, 30);
    let z = [0.05, -0.1];
    let sel = greedy_select(&z, &cands, &spec, &StopRule::fixed(6).unwrap()).unwrap();
    let l = lagrange_coefficients(&sel).unwrap();
    for &i in sel.site_indices() {
        let f: Vec<f64> = sel.site_indices().iter().map(|&k| spec.eval(&cands[k], &cands[i]).unwrap()).collect();
        let v = recover(&l, &f).unwrap();
        assert!((v - spec.eval(&z, &cands[i]).unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn peaks_recovery_matches_dense_interpolant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cands = random_points(&mut rng, 30);
    let z = [0.2, 0.1];
    let sel = greedy_select(&z, &cands, &m3(), &StopRule::fixed(6).unwrap()).unwrap();
    let sites: Vec<[f64; 2]> = sel.site_indices().iter().map(|&i| cands[i]).collect();
    let f: Vec<f64> = sites.iter().map(|p| peaks(p[0], p[1])).collect();
    let local = recover(&lagrange_coefficients(&sel).unwrap(), &f).unwrap();
    let dense = DenseSystem::new(&sites, &m3()).unwrap().interpolate(&f, &z).unwrap();
    assert!((local - dense).abs() <= 1e-8);
}

#[test]
fn work_grows_like_k_squared_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, k) in [(30, 6), (60, 6), (60, 12), (120, 12)] {
        let cands = random_points(&mut rng, n);
        let sel = greedy_select(&[0.0, 0.0], &cands, &m3(), &StopRule::fixed(k).unwrap()).unwrap();
        assert_eq!(sel.len(), k);
        let ops = sel.ops();
        // n per step for the Newton column, plus 2n + 1 for the start vectors
        assert_eq!(ops.kernel_evals, (2 * n + 1 + k * n) as u64);
        // Σ_j (j n + 2n) = n k (k − 1) / 2 + 2nk
        assert_eq!(ops.multiply_adds, (n * k * (k - 1) / 2 + 2 * n * k) as u64);
    }
}

#[test]
fn prefix_equals_shorter_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let cands = random_points(&mut rng, 25);
    let z = [0.3, 0.3];
    let long = greedy_select(&z, &cands, &m3(), &StopRule::fixed(8).unwrap()).unwrap();
    let short = greedy_select(&z, &cands, &m3(), &StopRule::fixed(4).unwrap()).unwrap();
    let pre = long.prefix(4);
    assert_eq!(pre.site_indices(), short.site_indices());
    assert_eq!(pre.p2_trace(), short.p2_trace());
    assert_eq!(lagrange_coefficients(&pre).unwrap(), lagrange_coefficients(&short).unwrap());
}

#[test]
fn near_duplicates_are_skipped() {
    let spec = SobolevKernelSpec::new(3.0, 2, 1.0).unwrap();
    let cands = [[0.1, 0.0], [0.1 + 1e-12, 0.0], [0.1, 1e-12], [-0.2, 0.3], [0.0, -0.25]];
    let sel = greedy_select(&[0.0, 0.0], &cands, &spec, &StopRule::fixed(5).unwrap()).unwrap();
    let from_cluster = sel.site_indices().iter().filter(|&&i| i < 3).count();
    assert_eq!(from_cluster, 1);
    assert!(matches!(sel.stop_reason(), StopReason::Exhausted | StopReason::NoProgress));
    assert!(lagrange_coefficients(&sel).unwrap().iter().all(|v| v.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_invariance(
        seed in 0u64..1000,
        shift in prop::array::uniform2(-3.0f64..3.0),
        m in prop::sample::select(vec![1.5, 3.0]),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SobolevKernelSpec::new(m, 2, 1.0).unwrap();
        let cands = random_points(&mut rng, 20);
        let z = random_points(&mut rng, 1)[0];
        let moved: Vec<[f64; 2]> = cands.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect();
        let zm = [z[0] + shift[0], z[1] + shift[1]];
        let rule = StopRule::fixed(6).unwrap();
        let a = greedy_select(&z, &cands, &spec, &rule).unwrap();
        let b = greedy_select(&zm, &moved, &spec, &rule).unwrap();
        prop_assert_eq!(a.site_indices(), b.site_indices());
        for (x, y) in a.p2_trace().iter().zip(b.p2_trace()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn trace_and_selection_invariants(seed in 0u64..1000, n in 1usize..30, k in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cands = random_points(&mut rng, n);
        let z = random_points(&mut rng, 1)[0];
        let sel = greedy_select(&z, &cands, &m3(), &StopRule::fixed(k).unwrap()).unwrap();
        let t = sel.p2_trace();
        prop_assert_eq!(t[0], 1.0);
        prop_assert!(t.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(sel.len() + 1, t.len());
        prop_assert_eq!(sel.newton_at_z().len(), sel.len());
        prop_assert!((0..sel.len()).all(|i| sel.newton(i, i) > 0.0));
        let mut idx = sel.site_indices().to_vec();
        idx.sort_unstable();
        idx.dedup();
        prop_assert_eq!(idx.len(), sel.len());
    }
}
