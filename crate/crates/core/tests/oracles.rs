//! Brute-force oracles and invariants for the operators, conditions and
//! estimators. Oracles here loop over cells directly instead of going through
//! the library's summation paths.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mfrac_core::grid::{weak_lq_norm, CubeFamily, ExponentConfig, GridFunction};
use mfrac_core::operators::{mfi, mfm, strong_mfm, OperatorKind, OperatorSpec, Quadrature};
use mfrac_core::verify::{
    ainfty_domination_check, carleson_check, estimate, holder_sequence_check, run_suite, CarlesonCoefficients,
    NormProblem, Scenario, SuiteId, TestFunctionFamily, TrialContext, Verdict, VerifyOptions,
};
use mfrac_core::weights::{ap_constant, WeightSystem};

fn grid_fn(dimension: usize, level: u32, vals: Vec<f64>) -> GridFunction {
    GridFunction::new(dimension, level, vals).unwrap()
}

fn log_uniform(seed: u64, dimension: usize, level: u32, range: f64) -> GridFunction {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let count = (1usize << level).pow(dimension as u32);
    grid_fn(dimension, level, (0..count).map(|_| range.powf(r.gen::<f64>())).collect())
}

fn positive_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..100.0, len)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `sup_{[a,b) ∋ x} |Q|^{α} Π avg f_i` over all grid intervals, cell by cell.
fn brute_mfm_1d(fs: &[Vec<f64>], alpha: f64) -> Vec<f64> {
    let n = fs[0].len();
    let h = 1.0 / n as f64;
    let mut out = vec![0.0f64; n];
    for a in 0..n {
        for b in a + 1..=n {
            let len = (b - a) as f64 * h;
            let mut v = len.powf(alpha);
            for f in fs {
                v *= f[a..b].iter().sum::<f64>() * h / len;
            }
            for o in &mut out[a..b] {
                *o = o.max(v);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mfm_matches_enumeration(f1 in positive_vec(16), f2 in positive_vec(16), alpha in 0.0f64..1.9) {
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, alpha).unwrap();
        let fam = CubeFamily::grid_aligned(1, 4).unwrap();
        let got = mfm(&[grid_fn(1, 4, f1.clone()), grid_fn(1, 4, f2.clone())], &cfg, &fam).unwrap();
        let want = brute_mfm_1d(&[f1, f2], alpha);
        for (g, w) in got.values().iter().zip(&want) {
            prop_assert!(close(*g, *w, 1e-12), "{g} vs {w}");
        }
    }

    #[test]
    fn strong_mfm_matches_enumeration(f in positive_vec(16), a0 in 0.0f64..0.9, a1 in 0.0f64..0.9) {
        let cfg = ExponentConfig::strong(1, 1, 2, vec![2.0], 4.0, vec![a0, a1]).unwrap();
        let fam = CubeFamily::grid_aligned(1, 2).unwrap();
        let got = strong_mfm(&[grid_fn(2, 2, f.clone())], &cfg, &fam).unwrap();
        let side = 4;
        let h = 0.25;
        let mut want = vec![0.0f64; 16];
        for (x0, x1) in (0..side).flat_map(|i| (0..side).map(move |j| (i, j))) {
            for a in 0..side { for b in a + 1..=side { for c in 0..side { for d in c + 1..=side {
                if !(a <= x0 && x0 < b && c <= x1 && x1 < d) { continue; }
                let mut sum = 0.0;
                for i in a..b { for j in c..d { sum += f[i * side + j]; } }
                let (l0, l1) = ((b - a) as f64 * h, (d - c) as f64 * h);
                let v = l0.powf(a0) * l1.powf(a1) * sum * h * h / (l0 * l1);
                let cell = x0 * side + x1;
                want[cell] = want[cell].max(v);
            }}}}
        }
        for (g, w) in got.values().iter().zip(&want) {
            prop_assert!(close(*g, *w, 1e-12), "{g} vs {w}");
        }
    }

    #[test]
    fn dyadic_family_gives_smaller_values(f1 in positive_vec(32), f2 in positive_vec(32), alpha in 0.0f64..1.5, p in 1.1f64..5.0) {
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, alpha).unwrap();
        let fs = [grid_fn(1, 5, f1.clone()), grid_fn(1, 5, f2)];
        let dy = CubeFamily::dyadic(1, 5).unwrap();
        let ga = CubeFamily::grid_aligned(1, 5).unwrap();
        let small = mfm(&fs, &cfg, &dy).unwrap();
        let large = mfm(&fs, &cfg, &ga).unwrap();
        for (s, l) in small.values().iter().zip(large.values()) {
            // Both are exact sups; the sums behind them may round differently.
            prop_assert!(*s <= *l * (1.0 + 1e-12), "{s} > {l}");
        }
        let w = &fs[0];
        prop_assert!(ap_constant(w, p, &dy).unwrap().value() <= ap_constant(w, p, &ga).unwrap().value() * (1.0 + 1e-12));
    }

    #[test]
    fn operators_are_homogeneous(f1 in positive_vec(16), f2 in positive_vec(16), lambda in 0.01f64..100.0) {
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.5).unwrap();
        let fam = CubeFamily::grid_aligned(1, 4).unwrap();
        let quad = Quadrature { depth: 2, ..Quadrature::default() };
        let a = grid_fn(1, 4, f1);
        let b = grid_fn(1, 4, f2);
        let scaled = a.scale(lambda).unwrap();
        let m0 = mfm(&[a.clone(), b.clone()], &cfg, &fam).unwrap();
        let m1 = mfm(&[scaled.clone(), b.clone()], &cfg, &fam).unwrap();
        let i0 = mfi(&[a.clone(), b.clone()], &cfg, &quad).unwrap();
        let i1 = mfi(&[scaled, b], &cfg, &quad).unwrap();
        for (x, y) in m0.values().iter().zip(m1.values()).chain(i0.values().iter().zip(i1.values())) {
            prop_assert!(close(lambda * x, *y, 1e-12));
        }
        let ap = ap_constant(&a, 3.0, &fam).unwrap().value();
        let ap_scaled = ap_constant(&a.scale(lambda).unwrap(), 3.0, &fam).unwrap().value();
        prop_assert!(close(ap, ap_scaled, 1e-12));
    }

    #[test]
    fn weak_norm_matches_level_sets(g in prop::collection::vec(-5.0f64..5.0, 16), q in 0.5f64..4.0) {
        let f = grid_fn(1, 4, g.clone());
        let mut want: f64 = 0.0;
        for t in &g {
            let t = t.abs();
            if t == 0.0 { continue; }
            let mass = g.iter().filter(|v| v.abs() >= t).count() as f64 / 16.0;
            want = want.max(t * mass.powf(1.0 / q));
        }
        prop_assert!(close(weak_lq_norm(&f, q).unwrap(), want, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn holder_inequality_holds(
        a in prop::collection::vec(0.0f64..10.0, 8),
        b in prop::collection::vec(0.0f64..10.0, 8),
        p1 in 1.0f64..6.0,
        p2 in 1.0f64..6.0,
    ) {
        let check = holder_sequence_check(&[a, b], &[p1, p2]).unwrap();
        prop_assert!(check.holds, "{} > {}", check.lhs, check.rhs);
    }

    #[test]
    fn carleson_sum_bounded_by_levels(g in prop::collection::vec(0.0f64..50.0, 32), r in 1.1f64..2.5) {
        // With ρ ≡ 1 and c_Q = |Q|^{q/r}, each level contributes at most ‖g‖_r^q.
        let q = r + 1.0;
        let rho = GridFunction::constant(1, 5, 1.0).unwrap();
        let out = carleson_check(&rho, r, q, &CarlesonCoefficients::VolumePower { exponent: q / r }, &[grid_fn(1, 5, g)]).unwrap();
        prop_assert!(out.c_hat.is_finite());
        prop_assert!(out.c_hat <= 6.0 * out.c1 * (1.0 + 1e-12), "{} vs {}", out.c_hat, out.c1);
    }
}

#[test]
fn carleson_quotient_matches_direct_sum() {
    let level = 4;
    let rho = log_uniform(1, 1, level, 10.0);
    let g = log_uniform(2, 1, level, 100.0);
    let (r, q) = (2.0, 3.0);
    let coeffs: Vec<f64> = (0..31).map(|i| 1.0 + (i % 5) as f64).collect();
    let out = carleson_check(&rho, r, q, &CarlesonCoefficients::Explicit { values: coeffs.clone() }, &[g.clone()]).unwrap();
    // Dyadic cubes in enumeration order: levels 0..=L, left to right.
    let mut sum = 0.0;
    let mut idx = 0;
    for l in 0..=level {
        let width = 1usize << (level - l);
        for j in 0..(1usize << l) {
            let avg = g.values()[j * width..(j + 1) * width].iter().sum::<f64>() / width as f64;
            sum += coeffs[idx] * avg.powf(q);
            idx += 1;
        }
    }
    let norm: f64 = g.values().iter().zip(rho.values()).map(|(x, w)| x.powf(r) * w).sum::<f64>() / 16.0;
    assert!(close(out.c_hat, sum / norm.powf(q / r), 1e-12));
}

#[test]
fn domination_quotient_matches_direct_integrals() {
    let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 3.0, 0.5).unwrap();
    let fam = CubeFamily::grid_aligned(1, 4).unwrap();
    let quad = Quadrature::default();
    let v = log_uniform(3, 1, 4, 20.0);
    let trials: Vec<Vec<GridFunction>> = (0..5)
        .map(|s| vec![log_uniform(10 + s, 1, 4, 50.0), log_uniform(20 + s, 1, 4, 50.0)])
        .collect();
    let out = ainfty_domination_check(&trials, &v, &cfg, &fam, &quad, 1e3).unwrap();
    let mut best: f64 = 0.0;
    for fs in &trials {
        let i = mfi(fs, &cfg, &quad).unwrap();
        let m = mfm(fs, &cfg, &fam).unwrap();
        let num: f64 = i.values().iter().zip(v.values()).map(|(x, w)| x.powf(3.0) * w).sum();
        let den: f64 = m.values().iter().zip(v.values()).map(|(x, w)| x.powf(3.0) * w).sum();
        best = best.max(num / den);
    }
    assert!(close(out.ratio, best, 1e-10));
    assert_eq!(out.evaluated, 5);
}

#[test]
fn estimate_grows_with_more_trials() {
    let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.5).unwrap();
    let fam = CubeFamily::grid_aligned(1, 5).unwrap();
    let op = OperatorSpec::new(OperatorKind::Mfm, cfg, fam).unwrap();
    let u = log_uniform(4, 1, 5, 10.0);
    let w = vec![Some(log_uniform(5, 1, 5, 10.0)), Some(log_uniform(6, 1, 5, 10.0))];
    let problem = NormProblem::new(op, 2.0, false, Some(u), w.clone(), vec![2.0, 2.0]).unwrap();
    let ctx = TrialContext { n: 1, k: 1, level: 5, arity: 2, p: vec![2.0, 2.0], rhs: w, extremal: vec![] };
    let trials = TestFunctionFamily::standard(11).generate(&ctx).unwrap();
    let mut last = 0.0;
    for k in (1..=trials.len()).step_by(7) {
        let est = estimate(&problem, &trials[..k]).unwrap();
        assert!(est.value >= last);
        last = est.value;
    }
}

#[test]
fn necessity_ratio_above_floor_on_random_weights() {
    let opts = VerifyOptions::default();
    let level = 4;
    for seed in 0..8u64 {
        let scen = Scenario {
            name: format!("random-{seed}"),
            exponents: ExponentConfig::new(1, 2, vec![3.0, 3.0], 3.0, 0.6).unwrap(),
            family: CubeFamily::default_for(1, level).unwrap(),
            weights: WeightSystem::new(
                log_uniform(100 + seed, 1, level, 20.0),
                vec![log_uniform(200 + seed, 1, level, 20.0), log_uniform(300 + seed, 1, level, 20.0)],
            )
            .unwrap(),
            quadrature: Quadrature::default(),
        };
        let res = run_suite(SuiteId::TwoWeightMaximalReverseDoubling, &scen, &TestFunctionFamily::standard(seed), &opts).unwrap();
        assert_ne!(res.verdict, Verdict::HypothesesUnmet);
        let kappa = res.constants.kappa.unwrap();
        assert!(kappa >= opts.kappa_floor(2), "seed {seed}: kappa {kappa}");
    }
}
