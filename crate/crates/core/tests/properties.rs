use proptest::prelude::*;

use subaffine::fixtures;
use subaffine::geometry::{attractor_sample, box_count, BoxCountOptions, GridAnchor};
use subaffine::linalg::{
    log_alpha_bounds, log_phi_raw, matrix_spectrum, singular_spectrum, word_product, Matrix,
};
use subaffine::measures::{energy_finite, entropy_finite, equilibrium_gap, lyapunov, Measure};
use subaffine::pressure::DepthPressure;
use subaffine::symbolic::{Letter, SubshiftSpec, Word};
use subaffine::MatrixSystem;

/// Invertible 2×2 matrix with operator norm `norm`.
fn contraction(entries: [f64; 4], norm: f64) -> Option<Matrix> {
    let m = Matrix::new(2, entries.to_vec()).ok()?;
    let spec = matrix_spectrum(&m).ok()?;
    let (top, low) = (spec.log_alphas()[0], spec.log_alphas()[1]);
    if top - low > 7.0 {
        return None;
    }
    Some(m.scale(norm / top.exp()))
}

fn matrices(count: usize) -> impl Strategy<Value = Vec<Matrix>> {
    prop::collection::vec((prop::array::uniform4(-1.0..1.0f64), 0.1..0.9f64), count)
        .prop_filter_map("ill-conditioned draw", |draws| {
            draws
                .into_iter()
                .map(|(e, n)| contraction(e, n))
                .collect::<Option<Vec<_>>>()
        })
}

fn word(alphabet: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(0..alphabet, 1..=max_len)
}

fn log_phi(w: &[Letter], t: f64, ms: &[Matrix]) -> f64 {
    log_phi_raw(
        t,
        singular_spectrum(&word_product(w, ms).unwrap())
            .unwrap()
            .log_alphas(),
    )
}

fn sft() -> impl Strategy<Value = SubshiftSpec> {
    (2usize..=3)
        .prop_flat_map(|k| {
            (
                Just(k),
                prop::collection::vec(prop::collection::vec(0..k, 2..=3), 1..=3),
            )
        })
        .prop_filter_map("empty subshift", |(k, words)| {
            let spec = SubshiftSpec::new(k, words.into_iter().map(Word::new).collect()).ok()?;
            spec.compile().ok().map(|_| spec)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn submultiplicative(ms in matrices(3), i in word(3, 16), j in word(3, 16), t in 0.0..3.0f64) {
        let ij: Vec<Letter> = i.iter().chain(&j).copied().collect();
        prop_assert!(log_phi(&ij, t, &ms) <= log_phi(&i, t, &ms) + log_phi(&j, t, &ms) + 1e-9);
    }

    #[test]
    fn sandwich(ms in matrices(2), w in word(2, 24), t in 0.0..2.5f64, delta in 0.0..2.0f64) {
        let (lo, hi) = log_alpha_bounds(&ms).unwrap();
        let n = w.len() as f64;
        let (base, raised) = (log_phi(&w, t, &ms), log_phi(&w, t + delta, &ms));
        prop_assert!(base + delta * n * lo <= raised + 1e-9);
        prop_assert!(raised <= base + delta * n * hi + 1e-9);
    }

    #[test]
    fn log_phi_continuous_at_integers(ms in matrices(2), w in word(2, 10)) {
        let s = singular_spectrum(&word_product(&w, &ms).unwrap()).unwrap();
        let a = s.log_alphas();
        for (l, exact) in [(1usize, a[0]), (2, a[0] + a[1])] {
            let t = l as f64;
            prop_assert!((log_phi_raw(t, a) - exact).abs() < 1e-12);
            prop_assert!((log_phi_raw(t - 1e-9, a) - exact).abs() < 1e-7);
            prop_assert!((log_phi_raw(t + 1e-9, a) - exact).abs() < 1e-7);
        }
    }

    #[test]
    fn factor_property(spec in sft()) {
        let automaton = spec.compile().unwrap();
        let sets: Vec<std::collections::BTreeSet<Vec<Letter>>> =
            (0..=10).map(|n| automaton.words(n).map(Word::into_letters).collect()).collect();
        for n in 1..=10 {
            prop_assert!(!sets[n].is_empty());
        }
        for n in 1..10 {
            for m in 1..=10 - n {
                for w in &sets[n + m] {
                    prop_assert!(sets[n].contains(&w[..n]));
                    prop_assert!(sets[m].contains(&w[n..]));
                }
            }
        }
    }

    #[test]
    fn full_shift_counts(k in 1usize..=5, n in 0usize..=12) {
        let a = SubshiftSpec::full_shift(k).unwrap().compile().unwrap();
        prop_assert_eq!(a.count(n), (k as u128).pow(n as u32));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pressure_upper_bounds_decrease_along_doubling(ms in matrices(2), t in 0.0..2.5f64) {
        let sys = MatrixSystem::full_shift(ms).unwrap();
        let p: Vec<f64> = [4, 8, 16].iter().map(|&n| DepthPressure::enumerated(&sys, n).unwrap().pressure(t)).collect();
        prop_assert!(p[1] <= p[0] + 1e-12 && p[2] <= p[1] + 1e-12, "{:?}", p);
    }

    #[test]
    fn lipschitz_band_and_convexity(ms in matrices(2), n in 1usize..=10) {
        let (lo, hi) = log_alpha_bounds(&ms).unwrap();
        let sys = MatrixSystem::full_shift(ms).unwrap();
        let p = DepthPressure::enumerated(&sys, n).unwrap();
        for k in 0..40 {
            let t = k as f64 * 0.06;
            let delta = 0.05;
            let step = p.pressure(t + delta) - p.pressure(t);
            prop_assert!(step <= delta * hi + 1e-12 && step >= delta * lo - 1e-12);
        }
        for (a, b) in [(0.0, 1.0), (1.0, 2.0)] {
            let h = (b - a) / 50.0;
            for k in 1..49 {
                let t = a + k as f64 * h;
                let second = p.pressure(t + h) - 2.0 * p.pressure(t) + p.pressure(t - h);
                prop_assert!(second >= -1e-9, "second difference {} at {}", second, t);
            }
        }
    }

    #[test]
    fn measure_inequalities(
        ms in matrices(2),
        p in 0.02..0.98f64,
        stay in prop::array::uniform2(0.05..0.95f64),
        t in 0.0..2.0f64,
        n in 1usize..=10,
    ) {
        let (lo, hi) = log_alpha_bounds(&ms).unwrap();
        let sys = MatrixSystem::full_shift(ms.clone()).unwrap();
        let bernoulli = Measure::bernoulli(vec![p, 1.0 - p]).unwrap();
        let markov = Measure::markov(
            vec![vec![stay[0], 1.0 - stay[0]], vec![1.0 - stay[1], stay[1]]],
            None,
        ).unwrap();
        for m in [&bernoulli, &markov] {
            prop_assert!(equilibrium_gap(m, t, n, &sys).unwrap().value >= -1e-12);
            let h = entropy_finite(m, n, &sys).unwrap().value;
            prop_assert!(h >= -1e-12 && h <= 2f64.ln() + 1e-12);
            let e = energy_finite(m, t, n, &sys).unwrap().value;
            prop_assert!(e >= t * lo - 1e-12 && e <= t * hi + 1e-12);
            let ly = lyapunov(m, n, &sys).unwrap();
            prop_assert!(ly[0] >= ly[1] - 1e-12);
            prop_assert!(ly[0] <= hi + 1e-12 && ly[1] >= lo - 1e-12);
            let mean_det: f64 = sys
                .automaton()
                .words(n)
                .map(|w| m.cylinder_prob(w.letters()).unwrap() * word_product(w.letters(), &ms).unwrap().log_abs_det())
                .sum::<f64>() / n as f64;
            prop_assert!((ly[0] + ly[1] - mean_det).abs() < 1e-10);
        }
    }
}

#[test]
fn box_count_slope_is_stable_under_rigid_motion() {
    for ifs in [
        fixtures::not_unique().unwrap(),
        fixtures::no_semiconformal().unwrap(),
    ] {
        let cloud = attractor_sample(16, &ifs).unwrap();
        let origin = box_count(&cloud, &BoxCountOptions::default()).unwrap();
        assert!(origin.counts.windows(2).all(|c| c[0] <= c[1]));
        let options = BoxCountOptions {
            scales: Some(origin.scales.clone()),
            window: Some(origin.window),
            anchor: GridAnchor::Shifted(8),
        };
        let base = box_count(&cloud, &options).unwrap().slope;
        for angle in [0.3f64, 1.1, 2.5] {
            let (c, s) = (angle.cos(), angle.sin());
            let q = Matrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
            let moved = cloud.transformed(&q, &[0.37, -0.21]).unwrap();
            let slope = box_count(&moved, &options).unwrap().slope;
            assert!((slope - base).abs() < 0.02, "{} vs {}", slope, base);
        }
    }
}
