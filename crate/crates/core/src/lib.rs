//! Two-wing instruction-set Bell experiment watched through a biased joint
//! observer.
//!
//! A local source hands both particles the same permutation of
//! `{red, green, flicker}` over the three switch positions. The observer
//! resolves flicker into a single colour, and when comparing both wings at
//! once is biased against matching a solid colour on the other side. The
//! resulting statistics fall below the local bound on the same-colour sum
//! over distinct setting pairs, unless collapse happens independently at each
//! wing before the comparison.
//!
//! The crate provides a reproducible Monte Carlo engine ([`engine`]), an
//! exact rational oracle ([`oracle`]), inequality statistics ([`stats`]),
//! quantum and collapse-time reference values ([`physics`]) and the CLI
//! plumbing ([`config`], [`report`]).

pub mod config;
pub mod engine;
mod error;
pub mod format;
pub mod model;
pub mod observer;
pub mod oracle;
pub mod physics;
pub mod prob;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use model::{base_instruction_set, Color, InstructionSet, LampBehavior, SwitchPosition};
pub use observer::{CollapseMode, ObserverParams, PerceivedPair};
pub use prob::{Rational, RationalProb};
