//! How the observer turns lamp behaviours into perceived colours.
//!
//! Watching one wing, flicker looks red or green with equal odds. Watching
//! both wings at once, two flickering lamps always look alike, and a
//! flickering lamp next to a solid one is seen as the solid colour only with
//! probability `p_same_bias` (3/8 by default). Whether the joint rules get a
//! chance to act depends on when the flicker is fixed, see [`CollapseMode`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::format::fmt_f;
use crate::model::{Color, LampBehavior};
use crate::rng::{bernoulli, fair_coin};
use crate::{Error, RationalProb, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObserverParams {
    /// Probability that a flickering wing is seen in the same colour as the
    /// solid lamp on the other wing.
    pub p_same_bias: RationalProb,
}

impl ObserverParams {
    pub fn new(p_same_bias: RationalProb) -> Self {
        Self { p_same_bias }
    }
}

impl Default for ObserverParams {
    fn default() -> Self {
        Self {
            p_same_bias: RationalProb::new(3, 8).expect("3/8"),
        }
    }
}

/// When the flicker is fixed into a colour.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CollapseMode {
    /// Fixed only when the observer compares both wings.
    #[default]
    ObserverMediated,
    /// Fixed independently at each wing before any comparison; the joint
    /// rules never apply.
    ObjectiveEarly,
    /// Both results are shipped to a remote collapse site that applies the
    /// joint rules `delay_s` seconds later. Statistically identical to
    /// [`CollapseMode::ObserverMediated`]; the delay only shifts timestamps.
    SfDelayed { delay_s: f64 },
}

impl CollapseMode {
    pub fn sf_delayed(delay_s: f64) -> Result<Self> {
        if delay_s.is_finite() && delay_s >= 0.0 {
            Ok(Self::SfDelayed { delay_s })
        } else {
            Err(Error::InvalidCollapseMode(format!("sf-delayed:{delay_s}")))
        }
    }

    /// Whether the cross-wing rules act on the perception.
    pub fn joint_rules_apply(self) -> bool {
        !matches!(self, Self::ObjectiveEarly)
    }

    /// Seconds between measurement and collapse, 0 unless delayed.
    pub fn delay(self) -> f64 {
        match self {
            Self::SfDelayed { delay_s } => delay_s,
            _ => 0.0,
        }
    }
}

impl fmt::Display for CollapseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ObserverMediated => f.write_str("observer"),
            Self::ObjectiveEarly => f.write_str("objective-early"),
            Self::SfDelayed { delay_s } => write!(f, "sf-delayed:{}", fmt_f(*delay_s)),
        }
    }
}

impl FromStr for CollapseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCollapseMode(s.to_string());
        match s.trim() {
            "observer" => Ok(Self::ObserverMediated),
            "objective-early" => Ok(Self::ObjectiveEarly),
            other => {
                let secs = other.strip_prefix("sf-delayed:").ok_or_else(bad)?;
                let delay: f64 = secs.trim().parse().map_err(|_| bad())?;
                Self::sf_delayed(delay).map_err(|_| bad())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PerceivedPair {
    pub left: Color,
    pub right: Color,
}

impl PerceivedPair {
    pub fn new(left: Color, right: Color) -> Self {
        Self { left, right }
    }

    pub fn is_coincidence(self) -> bool {
        self.left == self.right
    }
}

/// One wing watched alone. Flicker costs one fair-coin draw; solid lamps
/// draw nothing.
pub fn perceive_single<R: Rng + ?Sized>(behavior: LampBehavior, rng: &mut R) -> Color {
    match behavior.solid_color() {
        Some(c) => c,
        None => coin_color(rng),
    }
}

/// Both wings watched together.
///
/// Draw order: under [`CollapseMode::ObjectiveEarly`] the left flicker is
/// fixed before the right one. Otherwise at most one draw is made: a fair
/// coin for flicker/flicker, or a `p_same_bias` Bernoulli for solid/flicker.
pub fn perceive_joint<R: Rng + ?Sized>(
    left: LampBehavior,
    right: LampBehavior,
    rng: &mut R,
    params: ObserverParams,
    mode: CollapseMode,
) -> PerceivedPair {
    if !mode.joint_rules_apply() {
        let l = perceive_single(left, rng);
        let r = perceive_single(right, rng);
        return PerceivedPair::new(l, r);
    }
    match (left.solid_color(), right.solid_color()) {
        (Some(l), Some(r)) => PerceivedPair::new(l, r),
        (None, None) => {
            let c = coin_color(rng);
            PerceivedPair::new(c, c)
        }
        (Some(anchor), None) => PerceivedPair::new(anchor, biased(anchor, rng, params)),
        (None, Some(anchor)) => PerceivedPair::new(biased(anchor, rng, params), anchor),
    }
}

fn coin_color<R: Rng + ?Sized>(rng: &mut R) -> Color {
    if fair_coin(rng) {
        Color::Red
    } else {
        Color::Green
    }
}

fn biased<R: Rng + ?Sized>(anchor: Color, rng: &mut R, params: ObserverParams) -> Color {
    if bernoulli(rng, params.p_same_bias) {
        anchor
    } else {
        anchor.opposite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::TrialStream;
    use Color::*;
    use LampBehavior::*;

    fn freq(
        left: LampBehavior,
        right: LampBehavior,
        mode: CollapseMode,
        params: ObserverParams,
        n: u64,
    ) -> [[u64; 2]; 2] {
        let mut rng = TrialStream::new(31337, 0);
        let mut c = [[0u64; 2]; 2];
        for _ in 0..n {
            let p = perceive_joint(left, right, &mut rng, params, mode);
            c[p.left.index()][p.right.index()] += 1;
        }
        c
    }

    fn within(count: u64, n: u64, p: f64) -> bool {
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - n as f64 * p).abs() <= 5.0 * sd + 1e-9
    }

    #[test]
    fn solid_lamps_are_deterministic() {
        let mut rng = TrialStream::new(0, 0);
        assert_eq!(perceive_single(SolidRed, &mut rng), Red);
        assert_eq!(perceive_single(SolidGreen, &mut rng), Green);
        for mode in [
            CollapseMode::ObserverMediated,
            CollapseMode::ObjectiveEarly,
            CollapseMode::SfDelayed { delay_s: 3.0 },
        ] {
            for _ in 0..100 {
                let p = perceive_joint(SolidRed, SolidGreen, &mut rng, Default::default(), mode);
                assert_eq!(p, PerceivedPair::new(Red, Green));
            }
        }
    }

    #[test]
    fn single_flicker_is_fair() {
        let n = 1_000_000;
        let mut rng = TrialStream::new(5, 5);
        let reds = (0..n).filter(|_| perceive_single(Flicker, &mut rng) == Red).count() as u64;
        assert!(within(reds, n, 0.5), "{reds}");
    }

    #[test]
    fn solid_flicker_bias_three_eighths() {
        let n = 400_000;
        let c = freq(SolidRed, Flicker, CollapseMode::ObserverMediated, Default::default(), n);
        assert_eq!(c[Green.index()], [0, 0]);
        assert!(within(c[0][0], n, 3.0 / 8.0));
        assert!(within(c[0][1], n, 5.0 / 8.0));

        // Mirror image.
        let c = freq(Flicker, SolidGreen, CollapseMode::ObserverMediated, Default::default(), n);
        assert_eq!(c[0][0] + c[1][0], 0);
        assert!(within(c[1][1], n, 3.0 / 8.0));
        assert!(within(c[0][1], n, 5.0 / 8.0));
    }

    #[test]
    fn double_flicker_always_agrees_unless_objective() {
        let n = 200_000;
        for mode in [CollapseMode::ObserverMediated, CollapseMode::SfDelayed { delay_s: 1e6 }] {
            let c = freq(Flicker, Flicker, mode, Default::default(), n);
            assert_eq!(c[0][1] + c[1][0], 0);
            assert!(within(c[0][0], n, 0.5));
        }
        let c = freq(Flicker, Flicker, CollapseMode::ObjectiveEarly, Default::default(), n);
        for row in c {
            for x in row {
                assert!(within(x, n, 0.25), "{c:?}");
            }
        }
    }

    #[test]
    fn objective_early_ignores_bias() {
        let n = 200_000;
        let params = ObserverParams::new(RationalProb::ZERO);
        let c = freq(SolidRed, Flicker, CollapseMode::ObjectiveEarly, params, n);
        assert!(within(c[0][0], n, 0.5));
        assert!(within(c[0][1], n, 0.5));
    }

    #[test]
    fn extreme_bias_is_exact() {
        let n = 10_000;
        let c = freq(SolidGreen, Flicker, CollapseMode::ObserverMediated, ObserverParams::new(RationalProb::ZERO), n);
        assert_eq!(c[1][0], n);
        let c = freq(Flicker, SolidGreen, CollapseMode::ObserverMediated, ObserverParams::new(RationalProb::ONE), n);
        assert_eq!(c[1][1], n);
    }

    #[test]
    fn sf_delayed_draws_match_observer_mediated() {
        // Same stream, same draws: the delay never touches the statistics.
        for (l, r) in [(Flicker, Flicker), (SolidRed, Flicker), (Flicker, SolidGreen)] {
            let mut a = TrialStream::new(77, 1);
            let mut b = TrialStream::new(77, 1);
            for _ in 0..1000 {
                let x = perceive_joint(l, r, &mut a, Default::default(), CollapseMode::ObserverMediated);
                let y = perceive_joint(l, r, &mut b, Default::default(), CollapseMode::SfDelayed { delay_s: 10.0 });
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn mode_tokens() {
        assert_eq!("observer".parse::<CollapseMode>().unwrap(), CollapseMode::ObserverMediated);
        assert_eq!("objective-early".parse::<CollapseMode>().unwrap(), CollapseMode::ObjectiveEarly);
        assert_eq!(
            "sf-delayed:2.5".parse::<CollapseMode>().unwrap(),
            CollapseMode::SfDelayed { delay_s: 2.5 }
        );
        assert_eq!(CollapseMode::SfDelayed { delay_s: 1e6 }.to_string(), "sf-delayed:1000000");
        for bad in ["", "sf-delayed:", "sf-delayed:-1", "sf-delayed:nan", "observers"] {
            assert!(bad.parse::<CollapseMode>().is_err(), "{bad}");
        }
    }
}
