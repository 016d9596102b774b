//! Property tests for the invariants the library relies on.

use npmarket::integration::{follmer_integral_on, integrate_simple, partition_nodes};
use npmarket::lab::small_ball_sweep_from;
use npmarket::metrics::{skorokhod_distance_ub, uniform_distance};
use npmarket::models::{ClassSampler, JumpDiffusionProcessParams, JumpLaw};
use npmarket::portfolio::{check_self_financing, value_simple, Holding, Portfolio, SimplePortfolio};
use npmarket::stopping::StoppingSequence;
use npmarket::{Grid, Trajectory};
use proptest::prelude::*;

fn sampler(sigma: f64, lambda: f64) -> ClassSampler {
    ClassSampler::JumpDiffusion(JumpDiffusionProcessParams::compensated(100.0, sigma, lambda, JumpLaw::Uniform { lo: -0.2, hi: 0.2 }).unwrap())
}

fn path(level: u32, seed: u64, sigma: f64, lambda: f64) -> Trajectory {
    sampler(sigma, lambda).sample(Grid::new(1.0, level).unwrap(), seed).unwrap()
}

fn holding() -> impl Strategy<Value = Holding> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(Holding::constant),
        (-2.0..2.0f64, -0.02..0.02f64).prop_map(|(a, b)| format!("affine({a}, {b})").parse().unwrap()),
        (1.0..50.0f64).prop_map(|c| format!("recip({c})").parse().unwrap()),
    ]
}

fn sequence() -> impl Strategy<Value = StoppingSequence> {
    prop_oneof![
        (1usize..9).prop_map(|n| StoppingSequence::Grid { n }),
        prop::collection::vec(0.5..8.0f64, 1..4).prop_map(|steps| {
            let mut k = 100.0;
            StoppingSequence::Ladder {
                levels: steps
                    .into_iter()
                    .map(|s| {
                        k += s;
                        k
                    })
                    .collect(),
            }
        }),
        Just(StoppingSequence::Jumps),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// Changing the future after `t_k` never changes the value path up to `t_k`.
    #[test]
    fn value_is_predictable(
        seq in sequence(),
        holdings in prop::collection::vec(holding(), 1..5),
        seeds in (0u64..1 << 40, 0u64..1 << 40),
        cut in 0usize..=256,
    ) {
        let p = SimplePortfolio::new(seq, holdings, 1.0).unwrap();
        let x = path(8, seeds.0, 0.25, 4.0);
        let y = x.splice_after(cut, &path(8, seeds.1, 0.25, 4.0)).unwrap();
        let (vx, vy) = (value_simple(&p, &x).unwrap(), value_simple(&p, &y).unwrap());
        prop_assert_eq!(&vx.value[..=cut], &vy.value[..=cut]);
        prop_assert_eq!(&vx.holdings[..=cut], &vy.holdings[..=cut]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accounting_identity_and_exact_value(
        seq in sequence(),
        holdings in prop::collection::vec(holding(), 1..5),
        v0 in -50.0..50.0f64,
        seed in any::<u64>(),
        level in 3u32..10,
    ) {
        let p = SimplePortfolio::new(seq, holdings, v0).unwrap();
        let x = path(level, seed, 0.3, 5.0);
        let r = check_self_financing(&Portfolio::Simple(p.clone()), &x, level).unwrap();
        prop_assert!(r.accounting_residual <= 1e-12, "{r:?}");
        prop_assert!(r.residual <= 1e-12, "{r:?}");
        let v = value_simple(&p, &x).unwrap();
        let y = p.induced_integrand(&x).unwrap();
        for k in [0, x.steps() / 3, x.steps()] {
            let direct = v0 + integrate_simple(&y, &x, x.time(k)).unwrap();
            prop_assert_eq!(v.value[k], direct);
        }
    }

    #[test]
    fn follmer_sums_add_over_partition_nodes(
        seed in any::<u64>(),
        level in 2u32..8,
        a in 0usize..512,
        mid in 0usize..512,
        b in 0usize..512,
    ) {
        let x = path(9, seed, 0.3, 3.0);
        let mut ends = [a, mid, b];
        ends.sort_unstable();
        let [a, _, b] = ends;
        let nodes = partition_nodes(&x, a, b, level).unwrap();
        let m = nodes[nodes.len() / 2];
        let phi = |t: f64, v: f64| (v / 100.0).ln() + t;
        let whole = follmer_integral_on(phi, &x, a, b, level).unwrap();
        let split = follmer_integral_on(phi, &x, a, m, level).unwrap() + follmer_integral_on(phi, &x, m, b, level).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * (1.0 + whole.abs()), "{whole} vs {split}");
    }

    #[test]
    fn stopping_indices_are_monotone_and_end_at_the_horizon(seq in sequence(), seed in any::<u64>()) {
        let x = path(8, seed, 0.3, 6.0);
        let idx = seq.indices(&x);
        prop_assert_eq!(idx[0], 0);
        prop_assert_eq!(*idx.last().unwrap(), x.steps());
        prop_assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(seq.count(&x), idx.len() - 1);
    }

    #[test]
    fn skorokhod_never_exceeds_uniform(seeds in (any::<u64>(), any::<u64>())) {
        let x = path(6, seeds.0, 0.2, 0.0);
        let y = path(6, seeds.1, 0.2, 0.0);
        let s = skorokhod_distance_ub(&x, &y, 64).unwrap().distance;
        prop_assert!(s <= uniform_distance(&x, &y).unwrap() + 1e-12);
        prop_assert!(skorokhod_distance_ub(&x, &x, 64).unwrap().distance == 0.0);
    }

    #[test]
    fn small_ball_frequencies_grow_with_radius(
        distances in prop::collection::vec(0.0..10.0f64, 1..200),
        mut eps in prop::collection::vec(0.01..12.0f64, 1..8),
    ) {
        eps.sort_by(f64::total_cmp);
        let sweep = small_ball_sweep_from(&distances, &eps).unwrap();
        for w in sweep.windows(2) {
            prop_assert!(w[0].hits <= w[1].hits);
            prop_assert!(w[0].frequency <= w[1].frequency);
        }
        for e in &sweep {
            prop_assert!(e.ci.0 <= e.frequency && e.frequency <= e.ci.1);
        }
    }
}
