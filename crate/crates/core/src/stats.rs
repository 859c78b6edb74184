//! Coincidence rates, wing marginals and the same-colour sum over distinct
//! setting pairs, from either Monte Carlo tallies or exact tables.

use std::fmt;

use num_traits::One;

use crate::engine::{Source, TallyTable};
use crate::format::fmt_f;
use crate::model::{Color, SwitchPosition};
use crate::observer::{CollapseMode, ObserverParams};
use crate::oracle::{exact_distribution, ProbabilityTable, DISTINCT_PAIRS};
use crate::prob::ratio_to_f64;
use crate::{Error, Rational, RationalProb, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Multiplier on the standard error used for the violation verdict; the
/// verdict is the upper edge of the 95% interval against the bound.
pub const SIGNIFICANCE_K: f64 = Z_95;

/// A binomial rate with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn new(successes: u64, trials: u64) -> Option<Self> {
        if trials == 0 || successes > trials {
            return None;
        }
        let rate = successes as f64 / trials as f64;
        let (lo, hi) = wilson_interval(successes, trials, Z_95);
        Some(Self {
            trials,
            successes,
            rate,
            ci_low: lo.min(rate),
            ci_high: hi.max(rate),
        })
    }

    /// Binomial standard error `sqrt(r(1-r)/n)`.
    pub fn std_err(&self) -> f64 {
        (self.rate * (1.0 - self.rate) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval, clamped to `[0, 1]`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceStats {
    /// Same-colour rate per ordered setting pair; `None` where no trial ran.
    pub per_pair: [[Option<RateEstimate>; 3]; 3],
    pub overall: RateEstimate,
    /// Red frequency on the left (0) and right (1) wing.
    pub marginal_red: [RateEstimate; 2],
    pub n: u64,
}

impl CoincidenceStats {
    pub fn pair(&self, l: SwitchPosition, r: SwitchPosition) -> Option<&RateEstimate> {
        self.per_pair[l.index()][r.index()].as_ref()
    }
}

pub fn coincidence_rates(tally: &TallyTable) -> Result<CoincidenceStats> {
    if tally.is_empty() {
        return Err(Error::EmptyTally);
    }
    let mut per_pair = [[None; 3]; 3];
    let mut same_total = 0;
    let mut red = [0u64; 2];
    for l in SwitchPosition::ALL {
        for r in SwitchPosition::ALL {
            let same = tally.pair_same(l, r);
            same_total += same;
            per_pair[l.index()][r.index()] = RateEstimate::new(same, tally.pair_total(l, r));
            for c in Color::ALL {
                red[0] += tally.count(l, r, Color::Red, c);
                red[1] += tally.count(l, r, c, Color::Red);
            }
        }
    }
    let n = tally.total();
    let est = |k| RateEstimate::new(k, n).expect("non-empty tally");
    Ok(CoincidenceStats {
        per_pair,
        overall: est(same_total),
        marginal_red: [est(red[0]), est(red[1])],
        n,
    })
}

/// A statistic that is either exact or a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Exact(Rational),
    Estimate(f64),
}

impl Statistic {
    pub fn to_f64(self) -> f64 {
        match self {
            Self::Exact(r) => ratio_to_f64(r),
            Self::Estimate(x) => x,
        }
    }

    pub fn exact(self) -> Option<Rational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Estimate(_) => None,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(r) => write!(f, "{r}"),
            Self::Estimate(x) => f.write_str(&fmt_f(*x)),
        }
    }
}

/// Same-colour probabilities summed over the unordered pairs `{1,2}`,
/// `{2,3}`, `{1,3}` and compared with the local bound 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub mermin_sum: Statistic,
    /// In [`DISTINCT_PAIRS`] order.
    pub per_pair_same: [Statistic; 3],
    /// Standard error of the sum; zero for exact sources.
    pub uncertainty: f64,
    pub significance_k: f64,
    pub local_bound: Rational,
    /// `mermin_sum + significance_k * uncertainty < local_bound`.
    pub violated: bool,
}

impl InequalityReport {
    fn build(mermin_sum: Statistic, per_pair_same: [Statistic; 3], uncertainty: f64) -> Self {
        let local_bound = Rational::one();
        let violated = match mermin_sum {
            Statistic::Exact(s) => s < local_bound,
            Statistic::Estimate(s) => s + SIGNIFICANCE_K * uncertainty < ratio_to_f64(local_bound),
        };
        Self {
            mermin_sum,
            per_pair_same,
            uncertainty,
            significance_k: SIGNIFICANCE_K,
            local_bound,
            violated,
        }
    }

    /// Upper edge of the sum's interval.
    pub fn upper_edge(&self) -> f64 {
        self.mermin_sum.to_f64() + self.significance_k * self.uncertainty
    }
}

/// Anything the inequality statistic can be computed from.
pub trait MerminSource {
    fn mermin_sum(&self) -> Result<InequalityReport>;
}

impl MerminSource for ProbabilityTable {
    /// Symmetrizes each unordered pair by averaging both orders.
    fn mermin_sum(&self) -> Result<InequalityReport> {
        let half = Rational::new(1, 2);
        let per = DISTINCT_PAIRS.map(|(a, b)| (self.coincidence(a, b) + self.coincidence(b, a)) * half);
        let sum = per.iter().copied().sum();
        Ok(InequalityReport::build(
            Statistic::Exact(sum),
            per.map(Statistic::Exact),
            0.0,
        ))
    }
}

impl MerminSource for CoincidenceStats {
    /// Pools both orders of each unordered pair.
    fn mermin_sum(&self) -> Result<InequalityReport> {
        let mut per = [Statistic::Estimate(0.0); 3];
        let mut var = 0.0;
        for (slot, (a, b)) in per.iter_mut().zip(DISTINCT_PAIRS) {
            let (mut same, mut n) = (0, 0);
            for est in [self.pair(a, b), self.pair(b, a)].into_iter().flatten() {
                same += est.successes;
                n += est.trials;
            }
            let est = RateEstimate::new(same, n).ok_or(Error::MissingPairData(a.number(), b.number()))?;
            var += est.std_err().powi(2);
            *slot = Statistic::Estimate(est.rate);
        }
        let sum = per.iter().map(|s| s.to_f64()).sum();
        Ok(InequalityReport::build(Statistic::Estimate(sum), per, var.sqrt()))
    }
}

pub fn mermin_sum<S: MerminSource + ?Sized>(source: &S) -> Result<InequalityReport> {
    source.mermin_sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub p_same_bias: RationalProb,
    pub mermin_sum: Rational,
    pub violated: bool,
}

/// Exact sum under random permutations for each bias value.
pub fn sweep_bias(p_grid: &[RationalProb], mode: CollapseMode) -> Vec<SweepPoint> {
    p_grid
        .iter()
        .map(|&p| {
            let table = exact_distribution(ObserverParams::new(p), mode, Source::RandomPermutations);
            let report = table.mermin_sum().expect("exact tables cover every pair");
            let sum = report.mermin_sum.exact().expect("exact");
            SweepPoint {
                p_same_bias: p,
                mermin_sum: sum,
                violated: report.violated,
            }
        })
        .collect()
}

/// Exact red probability on each wing with uniformly chosen settings.
pub fn exact_marginals(table: &ProbabilityTable) -> [Rational; 2] {
    [table.marginal_red(0), table.marginal_red(1)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_experiment, RunConfig, SettingPolicy};
    use crate::model::base_instruction_set;
    use crate::observer::PerceivedPair;
    use crate::oracle::LocalStrategy;
    use SwitchPosition::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn wilson_properties() {
        let (lo, hi) = wilson_interval(0, 4, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 1.0);
        let (lo, hi) = wilson_interval(4, 4, Z_95);
        assert!(lo > 0.0 && lo < 1.0);
        assert_eq!(hi, 1.0);
        // Reference value for 50/100: (0.4038, 0.5962).
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!((lo - 0.403_831_4).abs() < 1e-6 && (hi - 0.596_168_6).abs() < 1e-6);
    }

    #[test]
    fn rates_from_tallies() {
        let mut t = TallyTable::new();
        t.add(One, Two, PerceivedPair::new(Color::Red, Color::Green), 4);
        let s = coincidence_rates(&t).unwrap();
        let p = s.pair(One, Two).unwrap();
        assert_eq!(p.rate, 0.0);
        assert!(p.ci_low <= p.rate && p.rate <= p.ci_high);
        assert!(s.pair(One, One).is_none());
        assert_eq!(s.marginal_red[0].rate, 1.0);
        assert_eq!(s.marginal_red[1].rate, 0.0);
        assert_eq!(coincidence_rates(&TallyTable::new()), Err(Error::EmptyTally));
        assert_eq!(s.mermin_sum(), Err(Error::MissingPairData(2, 3)));

        let cfg = RunConfig {
            policy: SettingPolicy::Fixed(One, One),
            source: Source::FixedSet(base_instruction_set()),
            ..RunConfig::new(1000, 1)
        };
        let s = coincidence_rates(&run_experiment(&cfg).unwrap()).unwrap();
        assert_eq!(s.pair(One, One).unwrap().rate, 1.0);
    }

    #[test]
    fn exact_sums() {
        let paper = exact_distribution(ObserverParams::default(), CollapseMode::ObserverMediated, Source::RandomPermutations);
        let rep = paper.mermin_sum().unwrap();
        assert_eq!(rep.mermin_sum, Statistic::Exact(r(3, 4)));
        assert_eq!(rep.per_pair_same, [Statistic::Exact(r(1, 4)); 3]);
        assert_eq!(rep.local_bound, r(1, 1));
        assert!(rep.violated);

        let half = exact_distribution(ObserverParams::new(RationalProb::HALF), CollapseMode::ObserverMediated, Source::RandomPermutations);
        let rep = half.mermin_sum().unwrap();
        assert_eq!(rep.mermin_sum, Statistic::Exact(r(1, 1)));
        assert!(!rep.violated);

        let min_local = LocalStrategy::all()
            .iter()
            .map(|s| s.distribution().mermin_sum().unwrap())
            .map(|rep| {
                assert!(!rep.violated);
                rep.mermin_sum.exact().unwrap()
            })
            .min()
            .unwrap();
        assert_eq!(min_local, r(1, 1));
    }

    #[test]
    fn sweep_values() {
        let grid: Vec<RationalProb> = ["3/8", "0", "1/2"].iter().map(|s| s.parse().unwrap()).collect();
        let obs = sweep_bias(&grid, CollapseMode::ObserverMediated);
        assert_eq!(obs[0].mermin_sum, r(3, 4));
        assert_eq!(obs[1].mermin_sum, r(0, 1));
        assert_eq!(obs[2].mermin_sum, r(1, 1));
        assert!(obs[0].violated && obs[1].violated && !obs[2].violated);
        let early = sweep_bias(&grid, CollapseMode::ObjectiveEarly);
        assert!(early.iter().all(|p| p.mermin_sum == r(1, 1) && !p.violated));
    }

    #[test]
    fn exact_marginals_are_half() {
        for mode in [CollapseMode::ObserverMediated, CollapseMode::ObjectiveEarly] {
            let t = exact_distribution(ObserverParams::default(), mode, Source::RandomPermutations);
            assert_eq!(exact_marginals(&t), [r(1, 2), r(1, 2)]);
        }
    }
}
