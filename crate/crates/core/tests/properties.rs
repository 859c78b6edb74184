use flicker_bell::engine::{run_experiment, run_experiment_partitioned, RunConfig, Source, TallyTable};
use flicker_bell::model::{Color, InstructionSet, SwitchPosition};
use flicker_bell::observer::{perceive_joint, PerceivedPair};
use flicker_bell::oracle::{coincidence_table_sum, exact_distribution, mixture_pairwise_same};
use flicker_bell::physics::{csl_collapse_time, qm_same_color_probability, ParticleKind};
use flicker_bell::rng::TrialStream;
use flicker_bell::stats::{mermin_sum, Statistic};
use flicker_bell::{CollapseMode, LampBehavior, ObserverParams, Rational, RationalProb};
use proptest::prelude::*;

fn prob() -> impl Strategy<Value = RationalProb> {
    (1i128..=64).prop_flat_map(|d| (0..=d).prop_map(move |n| RationalProb::new(n, d).unwrap()))
}

fn iset() -> impl Strategy<Value = InstructionSet> {
    (0usize..6).prop_map(|i| InstructionSet::all()[i])
}

fn source() -> impl Strategy<Value = Source> {
    prop_oneof![Just(Source::RandomPermutations), iset().prop_map(Source::FixedSet)]
}

fn behavior() -> impl Strategy<Value = LampBehavior> {
    (0usize..3).prop_map(|i| LampBehavior::ALL[i])
}

fn tally_from(cells: &[(usize, usize, usize, usize, u64)]) -> TallyTable {
    let mut t = TallyTable::new();
    for &(l, r, lc, rc, n) in cells {
        let pair = PerceivedPair::new(Color::ALL[lc], Color::ALL[rc]);
        t.add(SwitchPosition::ALL[l], SwitchPosition::ALL[r], pair, n);
    }
    t
}

fn cells() -> impl Strategy<Value = Vec<(usize, usize, usize, usize, u64)>> {
    prop::collection::vec((0usize..3, 0usize..3, 0usize..2, 0usize..2, 0u64..1000), 0..20)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn observer_sum_is_twice_the_bias(p in prob()) {
        let t = exact_distribution(ObserverParams::new(p), CollapseMode::ObserverMediated, Source::RandomPermutations);
        let rep = mermin_sum(&t).unwrap();
        prop_assert_eq!(rep.mermin_sum, Statistic::Exact(p.value() * Rational::from_integer(2)));
        prop_assert_eq!(rep.violated, p.value() < Rational::new(1, 2));
    }

    #[test]
    fn objective_early_sits_on_the_bound(p in prob()) {
        let t = exact_distribution(ObserverParams::new(p), CollapseMode::ObjectiveEarly, Source::RandomPermutations);
        let rep = mermin_sum(&t).unwrap();
        prop_assert_eq!(rep.mermin_sum, Statistic::Exact(Rational::from_integer(1)));
        prop_assert!(!rep.violated);
        prop_assert_eq!(t.same_setting_average(), Rational::new(5, 6));
    }

    #[test]
    fn tables_normalized_and_marginals_neutral(p in prob(), src in source(), early in any::<bool>()) {
        let mode = if early { CollapseMode::ObjectiveEarly } else { CollapseMode::ObserverMediated };
        let t = exact_distribution(ObserverParams::new(p), mode, src);
        prop_assert!(t.is_normalized());
        if src == Source::RandomPermutations {
            prop_assert_eq!(t.marginal_red(0), Rational::new(1, 2));
            prop_assert_eq!(t.marginal_red(1), Rational::new(1, 2));
        }
    }

    #[test]
    fn sf_delay_never_matters(p in prob(), src in source(), delay in 0.0f64..1e9) {
        let params = ObserverParams::new(p);
        prop_assert_eq!(
            exact_distribution(params, CollapseMode::SfDelayed { delay_s: delay }, src),
            exact_distribution(params, CollapseMode::ObserverMediated, src)
        );
    }

    #[test]
    fn table_sum_for_base_set(p in prob()) {
        // Three same-setting ones plus four solid/flicker rows at p.
        let base = flicker_bell::base_instruction_set();
        let want = Rational::from_integer(3) + p.value() * Rational::from_integer(4);
        prop_assert_eq!(coincidence_table_sum(ObserverParams::new(p), base), want);
    }

    #[test]
    fn bias_is_neutral_when_anchor_is_fair(p in prob()) {
        let half = Rational::new(1, 2);
        prop_assert_eq!(p.value() * half + p.complement().value() * half, half);
    }

    #[test]
    fn mixtures_respect_local_bound(w in prop::array::uniform8(0i128..50)) {
        let w = w.map(Rational::from_integer);
        if let Some(v) = mixture_pairwise_same(&w) {
            prop_assert!(v >= Rational::from_integer(1));
        }
    }

    #[test]
    fn tally_merge_is_commutative_and_associative(a in cells(), b in cells(), c in cells()) {
        let (a, b, c) = (tally_from(&a), tally_from(&b), tally_from(&c));
        prop_assert_eq!(a.clone().merge(&b), b.clone().merge(&a));
        prop_assert_eq!(a.clone().merge(&b).merge(&c), a.clone().merge(&b.clone().merge(&c)));
        let merged = a.clone().merge(&b);
        prop_assert_eq!(merged.total(), merged.iter().map(|(_, n)| n).sum::<u64>());
    }

    #[test]
    fn joint_perception_is_mirror_symmetric(l in behavior(), r in behavior(), seed in any::<u64>(), early in any::<bool>()) {
        // Exact same draws in mirrored order: swapping inputs swaps outputs
        // whenever at most one draw is made.
        let mode = if early { CollapseMode::ObjectiveEarly } else { CollapseMode::ObserverMediated };
        let single_draw = !(early && l == LampBehavior::Flicker && r == LampBehavior::Flicker);
        let mut a = TrialStream::new(seed, 0);
        let mut b = TrialStream::new(seed, 0);
        let fwd = perceive_joint(l, r, &mut a, ObserverParams::default(), mode);
        let rev = perceive_joint(r, l, &mut b, ObserverParams::default(), mode);
        if single_draw {
            prop_assert_eq!((fwd.left, fwd.right), (rev.right, rev.left));
        }
        if let Some(c) = l.solid_color() { prop_assert_eq!(fwd.left, c); }
        if let Some(c) = r.solid_color() { prop_assert_eq!(fwd.right, c); }
    }

    #[test]
    fn qm_symmetry_and_periodicity(a in -720.0f64..720.0, b in -720.0f64..720.0) {
        for (kind, period) in [(ParticleKind::Photon, 180.0), (ParticleKind::SpinHalf, 360.0)] {
            let p = qm_same_color_probability(kind, a, b);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&p));
            prop_assert!((p - qm_same_color_probability(kind, b, a)).abs() < 1e-12);
            prop_assert!((p - qm_same_color_probability(kind, a + period, b + period)).abs() < 1e-9);
        }
    }

    #[test]
    fn collapse_time_decreases(n in 1.0f64..1e14, m in 1e-5f64..10.0) {
        let t = |n, m| csl_collapse_time(n, m).unwrap().collapse_time;
        prop_assert!(t(n * 1.5, m) < t(n, m));
        prop_assert!(t(n, m * 1.5) < t(n, m));
        prop_assert!((t(2.0 * n, m) * 4.0 - t(n, m)).abs() <= 1e-12 * t(n, m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn any_partition_reproduces_the_run(seed in any::<u64>(), n in 1u64..5000, workers in 1usize..9) {
        let cfg = RunConfig::new(n, seed);
        prop_assert_eq!(run_experiment_partitioned(&cfg, workers).unwrap(), run_experiment(&cfg).unwrap());
    }
}
