//! Switch positions, lamp behaviours and the instruction sets carried by the
//! particles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::{Error, Result};

/// One of the three positions of a measuring device's switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SwitchPosition {
    One,
    Two,
    Three,
}

impl SwitchPosition {
    pub const ALL: [SwitchPosition; 3] = [Self::One, Self::Two, Self::Three];

    /// Zero-based index, `One -> 0`.
    pub fn index(self) -> usize {
        self as usize
    }

    /// The printed switch number, `1..=3`.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or(Error::InvalidSwitchPosition(index as i64 + 1))
    }

    pub fn from_number(n: i64) -> Result<Self> {
        match n {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            other => Err(Error::InvalidSwitchPosition(other)),
        }
    }
}

impl fmt::Display for SwitchPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for SwitchPosition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "3" => Ok(Self::Three),
            other => Err(Error::InvalidSwitchPosition(other.parse().unwrap_or(-1))),
        }
    }
}

/// A perceived lamp colour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Green,
}

impl Color {
    pub const ALL: [Color; 2] = [Self::Red, Self::Green];

    pub fn opposite(self) -> Self {
        match self {
            Self::Red => Self::Green,
            Self::Green => Self::Red,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Self::Red => 'R',
            Self::Green => 'G',
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// What the lamp does for a given switch position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LampBehavior {
    SolidRed,
    SolidGreen,
    /// Flickers red and green; the observer cannot resolve it.
    Flicker,
}

impl LampBehavior {
    pub const ALL: [LampBehavior; 3] = [Self::SolidRed, Self::SolidGreen, Self::Flicker];

    /// The colour of a solid lamp, `None` for flicker.
    pub fn solid_color(self) -> Option<Color> {
        match self {
            Self::SolidRed => Some(Color::Red),
            Self::SolidGreen => Some(Color::Green),
            Self::Flicker => None,
        }
    }

    pub fn token(self) -> char {
        match self {
            Self::SolidRed => 'R',
            Self::SolidGreen => 'G',
            Self::Flicker => 'F',
        }
    }

    pub fn from_token(c: char) -> Option<Self> {
        match c {
            'R' => Some(Self::SolidRed),
            'G' => Some(Self::SolidGreen),
            'F' => Some(Self::Flicker),
            _ => None,
        }
    }
}

/// The hidden variable both particles carry: a bijection from switch
/// positions to lamp behaviours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstructionSet([LampBehavior; 3]);

/// The six bijections in a fixed order. Sampling indexes into this table, so
/// the order is part of the reproducibility contract.
const PERMUTATIONS: [InstructionSet; 6] = {
    use LampBehavior::*;
    [
        InstructionSet([SolidRed, SolidGreen, Flicker]),
        InstructionSet([SolidRed, Flicker, SolidGreen]),
        InstructionSet([SolidGreen, SolidRed, Flicker]),
        InstructionSet([SolidGreen, Flicker, SolidRed]),
        InstructionSet([Flicker, SolidRed, SolidGreen]),
        InstructionSet([Flicker, SolidGreen, SolidRed]),
    ]
};

impl InstructionSet {
    /// Builds a set from the behaviours at positions 1, 2, 3. Fails unless
    /// each behaviour appears exactly once.
    pub fn new(behaviors: [LampBehavior; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for b in behaviors {
            seen[b as usize] = true;
        }
        if seen.iter().all(|&s| s) {
            Ok(Self(behaviors))
        } else {
            let token: String = behaviors.iter().map(|b| b.token()).collect();
            Err(Error::InvalidInstructionSet(token))
        }
    }

    /// All six instruction sets the source can emit.
    pub fn all() -> [InstructionSet; 6] {
        PERMUTATIONS
    }

    pub fn behaviors(self) -> [LampBehavior; 3] {
        self.0
    }

    /// Behaviour shown at switch position `pos`.
    pub fn resolve(self, pos: SwitchPosition) -> LampBehavior {
        self.0[pos.index()]
    }

    /// Three-letter token over `{R, G, F}` in position order, e.g. `RGF`.
    pub fn token(self) -> String {
        self.0.iter().map(|b| b.token()).collect()
    }
}

impl fmt::Display for InstructionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl FromStr for InstructionSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInstructionSet(s.to_string());
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 3 {
            return Err(bad());
        }
        let mut behaviors = [LampBehavior::Flicker; 3];
        for (slot, c) in behaviors.iter_mut().zip(chars) {
            *slot = LampBehavior::from_token(c.to_ascii_uppercase()).ok_or_else(bad)?;
        }
        InstructionSet::new(behaviors).map_err(|_| bad())
    }
}

/// Red at 1, green at 2, flicker at 3.
pub fn base_instruction_set() -> InstructionSet {
    PERMUTATIONS[0]
}

/// Draws one of the six permutations uniformly. Consumes exactly one
/// `gen_range(0..6)` draw.
pub fn sample_instruction_set<R: Rng + ?Sized>(rng: &mut R) -> InstructionSet {
    PERMUTATIONS[rng.gen_range(0..PERMUTATIONS.len())]
}

/// Pure lookup of the behaviour at `pos`.
pub fn resolve_behavior(iset: InstructionSet, pos: SwitchPosition) -> LampBehavior {
    iset.resolve(pos)
}
