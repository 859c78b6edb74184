//! Exact probabilities by enumeration.
//!
//! Nothing here samples. The distribution for each setting pair is obtained
//! by walking every instruction set the source can emit and every perception
//! branch, multiplying exact rational weights. The perception branches are
//! written out independently of the sampler in [`crate::observer`], so the
//! Monte Carlo engine can be checked against this module.

use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::engine::Source;
use crate::model::{Color, InstructionSet, LampBehavior, SwitchPosition};
use crate::observer::{CollapseMode, ObserverParams};
use crate::Rational;

/// For each ordered setting pair, the probabilities of the four perceived
/// colour pairs `RR, RG, GR, GG`, conditional on that setting pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbabilityTable {
    entries: [[[Rational; 4]; 3]; 3],
}

fn color_slot(l: Color, r: Color) -> usize {
    l.index() * 2 + r.index()
}

impl ProbabilityTable {
    fn zeroed() -> Self {
        Self {
            entries: [[[Rational::zero(); 4]; 3]; 3],
        }
    }

    pub fn get(&self, l: SwitchPosition, r: SwitchPosition, lc: Color, rc: Color) -> Rational {
        self.entries[l.index()][r.index()][color_slot(lc, rc)]
    }

    /// `[RR, RG, GR, GG]` at `(l, r)`.
    pub fn pair(&self, l: SwitchPosition, r: SwitchPosition) -> [Rational; 4] {
        self.entries[l.index()][r.index()]
    }

    /// Probability that both wings are seen in the same colour at `(l, r)`.
    pub fn coincidence(&self, l: SwitchPosition, r: SwitchPosition) -> Rational {
        let p = self.pair(l, r);
        p[0] + p[3]
    }

    /// Probability that one wing is seen red, averaged over the nine setting
    /// pairs with equal weight. `wing` 0 is left, 1 is right.
    pub fn marginal_red(&self, wing: usize) -> Rational {
        let mut acc = Rational::zero();
        for l in SwitchPosition::ALL {
            for r in SwitchPosition::ALL {
                let p = self.pair(l, r);
                acc += if wing == 0 { p[0] + p[1] } else { p[0] + p[2] };
            }
        }
        acc / Rational::from_integer(9)
    }

    /// Same-setting coincidence averaged over the three positions.
    pub fn same_setting_average(&self) -> Rational {
        SwitchPosition::ALL
            .into_iter()
            .map(|s| self.coincidence(s, s))
            .sum::<Rational>()
            / Rational::from_integer(3)
    }

    /// Checks that every setting pair's four entries sum to exactly 1.
    pub fn is_normalized(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|cell| cell.iter().copied().sum::<Rational>() == Rational::one())
    }

    /// One line per setting pair: `l r: RR=.. RG=.. GR=.. GG=..`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in SwitchPosition::ALL {
            for r in SwitchPosition::ALL {
                let p = self.pair(l, r);
                let _ = writeln!(out, "{l} {r}: RR={} RG={} GR={} GG={}", p[0], p[1], p[2], p[3]);
            }
        }
        out
    }
}

/// Perception branches `(left, right, probability)` for one pair of lamp
/// behaviours.
fn joint_branches(
    left: LampBehavior,
    right: LampBehavior,
    params: ObserverParams,
    mode: CollapseMode,
) -> Vec<(Color, Color, Rational)> {
    let half = Rational::new(1, 2);
    let p = params.p_same_bias.value();
    let single = |b: LampBehavior| -> Vec<(Color, Rational)> {
        match b {
            LampBehavior::SolidRed => vec![(Color::Red, Rational::one())],
            LampBehavior::SolidGreen => vec![(Color::Green, Rational::one())],
            LampBehavior::Flicker => vec![(Color::Red, half), (Color::Green, half)],
        }
    };
    let independent = || {
        let mut v = Vec::new();
        for (lc, lp) in single(left) {
            for (rc, rp) in single(right) {
                v.push((lc, rc, lp * rp));
            }
        }
        v
    };
    match mode {
        CollapseMode::ObjectiveEarly => independent(),
        CollapseMode::ObserverMediated | CollapseMode::SfDelayed { .. } => match (left, right) {
            (LampBehavior::Flicker, LampBehavior::Flicker) => {
                vec![(Color::Red, Color::Red, half), (Color::Green, Color::Green, half)]
            }
            (LampBehavior::Flicker, solid) => {
                let a = solid.solid_color().expect("solid");
                vec![(a, a, p), (a.opposite(), a, Rational::one() - p)]
            }
            (solid, LampBehavior::Flicker) => {
                let a = solid.solid_color().expect("solid");
                vec![(a, a, p), (a, a.opposite(), Rational::one() - p)]
            }
            _ => independent(),
        },
    }
}

/// Exact perceived-colour distribution for every setting pair.
pub fn exact_distribution(params: ObserverParams, mode: CollapseMode, source: Source) -> ProbabilityTable {
    let sets: Vec<(InstructionSet, Rational)> = match source {
        Source::FixedSet(iset) => vec![(iset, Rational::one())],
        Source::RandomPermutations => InstructionSet::all()
            .into_iter()
            .map(|s| (s, Rational::new(1, 6)))
            .collect(),
    };
    let mut table = ProbabilityTable::zeroed();
    for l in SwitchPosition::ALL {
        for r in SwitchPosition::ALL {
            let cell = &mut table.entries[l.index()][r.index()];
            for &(iset, w) in &sets {
                for (lc, rc, p) in joint_branches(iset.resolve(l), iset.resolve(r), params, mode) {
                    cell[color_slot(lc, rc)] += w * p;
                }
            }
        }
    }
    table
}

/// Sum of the nine same-colour probabilities for a fixed instruction set
/// under observer-mediated collapse.
pub fn coincidence_table_sum(params: ObserverParams, iset: InstructionSet) -> Rational {
    let t = exact_distribution(params, CollapseMode::ObserverMediated, Source::FixedSet(iset));
    SwitchPosition::ALL
        .into_iter()
        .flat_map(|l| SwitchPosition::ALL.into_iter().map(move |r| (l, r)))
        .map(|(l, r)| t.coincidence(l, r))
        .sum()
}

/// The three distinct unordered setting pairs, in reporting order.
pub const DISTINCT_PAIRS: [(SwitchPosition, SwitchPosition); 3] = [
    (SwitchPosition::One, SwitchPosition::Two),
    (SwitchPosition::Two, SwitchPosition::Three),
    (SwitchPosition::One, SwitchPosition::Three),
];

/// A local deterministic strategy: a colour per switch position, shared by
/// both wings.
///
/// Perfect agreement at equal settings forces both wings to answer with the
/// same deterministic function of the setting, so these eight assignments
/// span every local model consistent with that constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalStrategy(pub [Color; 3]);

impl LocalStrategy {
    pub fn all() -> [LocalStrategy; 8] {
        std::array::from_fn(|bits| {
            LocalStrategy(std::array::from_fn(|pos| {
                if bits >> (2 - pos) & 1 == 0 {
                    Color::Red
                } else {
                    Color::Green
                }
            }))
        })
    }

    pub fn color(self, pos: SwitchPosition) -> Color {
        self.0[pos.index()]
    }

    /// Number of distinct unordered setting pairs answered in the same colour.
    pub fn pairwise_same(self) -> u32 {
        DISTINCT_PAIRS
            .iter()
            .filter(|(a, b)| self.color(*a) == self.color(*b))
            .count() as u32
    }

    /// The (deterministic) probability table this strategy produces.
    pub fn distribution(self) -> ProbabilityTable {
        let mut table = ProbabilityTable::zeroed();
        for l in SwitchPosition::ALL {
            for r in SwitchPosition::ALL {
                table.entries[l.index()][r.index()][color_slot(self.color(l), self.color(r))] = Rational::one();
            }
        }
        table
    }
}

/// Minimum over the eight local strategies of the pairwise-same sum.
pub fn local_strategy_bound() -> Rational {
    let min = LocalStrategy::all()
        .iter()
        .map(|s| s.pairwise_same())
        .min()
        .expect("eight strategies");
    Rational::from_integer(min as i128)
}

/// Pairwise-same sum of a probability mixture of the eight strategies.
/// `weights` are non-negative and need not be normalized.
pub fn mixture_pairwise_same(weights: &[Rational; 8]) -> Option<Rational> {
    let total: Rational = weights.iter().copied().sum();
    if total <= Rational::zero() || weights.iter().any(|w| *w < Rational::zero()) {
        return None;
    }
    let sum: Rational = LocalStrategy::all()
        .iter()
        .zip(weights)
        .map(|(s, w)| *w * Rational::from_integer(s.pairwise_same() as i128))
        .sum();
    Some(sum / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::base_instruction_set;
    use crate::RationalProb;
    use SwitchPosition::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn params(n: i128, d: i128) -> ObserverParams {
        ObserverParams::new(RationalProb::new(n, d).unwrap())
    }

    #[test]
    fn base_table_rows() {
        let t = exact_distribution(params(3, 8), CollapseMode::ObserverMediated, Source::FixedSet(base_instruction_set()));
        let expected = [
            [r(1, 1), r(0, 1), r(3, 8)],
            [r(0, 1), r(1, 1), r(3, 8)],
            [r(3, 8), r(3, 8), r(1, 1)],
        ];
        for l in SwitchPosition::ALL {
            for rr in SwitchPosition::ALL {
                assert_eq!(t.coincidence(l, rr), expected[l.index()][rr.index()], "{l}{rr}");
            }
        }
        assert!(t.is_normalized());
        // R on the left, flicker on the right: RR 3/8, RG 5/8.
        assert_eq!(t.pair(One, Three), [r(3, 8), r(5, 8), r(0, 1), r(0, 1)]);
        assert_eq!(t.pair(Three, Three), [r(1, 2), r(0, 1), r(0, 1), r(1, 2)]);
    }

    #[test]
    fn table_sums() {
        let base = base_instruction_set();
        assert_eq!(coincidence_table_sum(params(3, 8), base), r(9, 2));
        assert_eq!(coincidence_table_sum(params(1, 2), base), r(5, 1));
        assert_eq!(coincidence_table_sum(params(0, 1), base), r(3, 1));
    }

    #[test]
    fn averaged_source_distinct_pairs_quarter() {
        let t = exact_distribution(params(3, 8), CollapseMode::ObserverMediated, Source::RandomPermutations);
        for l in SwitchPosition::ALL {
            for rr in SwitchPosition::ALL {
                let expect = if l == rr { r(1, 1) } else { r(1, 4) };
                assert_eq!(t.coincidence(l, rr), expect);
            }
        }
        assert_eq!(t.marginal_red(0), r(1, 2));
        assert_eq!(t.marginal_red(1), r(1, 2));
    }

    #[test]
    fn objective_early_loses_flicker_correlation() {
        let base = base_instruction_set();
        let t = exact_distribution(params(3, 8), CollapseMode::ObjectiveEarly, Source::FixedSet(base));
        assert_eq!(t.coincidence(Three, Three), r(1, 2));
        assert_eq!(t.coincidence(One, Three), r(1, 2));
        let avg = exact_distribution(params(3, 8), CollapseMode::ObjectiveEarly, Source::RandomPermutations);
        assert_eq!(avg.same_setting_average(), r(5, 6));
    }

    #[test]
    fn sf_delayed_equals_observer() {
        for p in [params(0, 1), params(3, 8), params(1, 1)] {
            for source in [Source::RandomPermutations, Source::FixedSet(base_instruction_set())] {
                let obs = exact_distribution(p, CollapseMode::ObserverMediated, source);
                for d in [0.0, 1.0, 1e6] {
                    assert_eq!(exact_distribution(p, CollapseMode::SfDelayed { delay_s: d }, source), obs);
                }
            }
        }
    }

    #[test]
    fn left_right_symmetry() {
        // Swapping the wings' behaviours mirrors the distribution.
        for mode in [CollapseMode::ObserverMediated, CollapseMode::ObjectiveEarly] {
            for a in LampBehavior::ALL {
                for b in LampBehavior::ALL {
                    let mut fwd: Vec<_> = joint_branches(a, b, params(3, 8), mode)
                        .into_iter()
                        .map(|(l, r, p)| (r, l, p))
                        .collect();
                    let mut rev = joint_branches(b, a, params(3, 8), mode);
                    fwd.sort();
                    rev.sort();
                    assert_eq!(fwd, rev);
                }
            }
        }
    }

    #[test]
    fn strategies() {
        use Color::*;
        assert_eq!(LocalStrategy([Red, Red, Red]).pairwise_same(), 3);
        assert_eq!(LocalStrategy([Red, Red, Green]).pairwise_same(), 1);
        let all = LocalStrategy::all();
        assert_eq!(all.iter().collect::<std::collections::HashSet<_>>().len(), 8);
        assert_eq!(local_strategy_bound(), r(1, 1));
        for s in all {
            let t = s.distribution();
            assert!(t.is_normalized());
            for p in SwitchPosition::ALL {
                assert_eq!(t.coincidence(p, p), r(1, 1));
            }
        }
        assert!(mixture_pairwise_same(&[Rational::zero(); 8]).is_none());
    }
}
