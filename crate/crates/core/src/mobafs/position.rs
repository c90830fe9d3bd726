//! Bit-packed positions over the free features and the three movement rules.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::preprocess::{ReducedModel, WORD_BITS};

/// `W` words; bit `j` of word `w` is free feature `32·w + j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    pub words: Vec<u32>,
}

/// Mask of the valid bits of the last word when `num_free` bits are used.
pub fn last_word_mask(num_free: usize) -> u32 {
    match num_free % WORD_BITS {
        0 => u32::MAX,
        r => (1u32 << r) - 1,
    }
}

impl Position {
    pub fn random<R: Rng + ?Sized>(num_free: usize, rng: &mut R) -> Self {
        let mut p = Position {
            words: (0..num_free.div_ceil(WORD_BITS)).map(|_| rng.random()).collect(),
        };
        p.mask(num_free);
        p
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Clears the surplus high bits of the last word.
    pub fn mask(&mut self, num_free: usize) {
        if let Some(last) = self.words.last_mut() {
            *last &= last_word_mask(num_free);
        }
    }

    pub fn is_legal(&self, num_free: usize) -> bool {
        self.words.len() == num_free.div_ceil(WORD_BITS)
            && self
                .words
                .last()
                .is_none_or(|&w| w & !last_word_mask(num_free) == 0)
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    /// The configuration this position selects, with constants applied.
    pub fn decode(&self, model: &ReducedModel) -> Configuration {
        let mut config = model.base_configuration();
        for (i, &f) in model.free_features.iter().enumerate() {
            if self.bit(i) {
                config.set(f, true);
            }
        }
        config
    }

    pub fn encode(config: &Configuration, model: &ReducedModel) -> Self {
        let mut words = vec![0u32; model.dimension()];
        for (i, &f) in model.free_features.iter().enumerate() {
            if config.get(f) {
                words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Position { words }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveSemantics {
    /// Arithmetic on whole words read as unsigned integers.
    #[default]
    WordArith,
    /// Each bit copies the target's bit with probability `min(1, w·r)`.
    BitwiseProb,
}

impl std::str::FromStr for MoveSemantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word-arith" => Ok(MoveSemantics::WordArith),
            "bitwise-prob" => Ok(MoveSemantics::BitwiseProb),
            _ => Err(format!("expected word-arith or bitwise-prob, got `{s}`")),
        }
    }
}

impl std::fmt::Display for MoveSemantics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MoveSemantics::WordArith => "word-arith",
            MoveSemantics::BitwiseProb => "bitwise-prob",
        })
    }
}

/// `current + step·(target − current)`, rounded and clamped to `u32`.
pub fn step_word(current: u32, target: u32, step: f64) -> u32 {
    let cur = current as f64;
    let v = cur + step * (target as f64 - cur);
    v.round().clamp(0.0, u32::MAX as f64) as u32
}

fn copy_bits<R: Rng + ?Sized>(current: u32, target: u32, p: f64, rng: &mut R) -> u32 {
    let mut out = current;
    for j in 0..WORD_BITS {
        if rng.random_bool(p) {
            let bit = 1u32 << j;
            out = (out & !bit) | (target & bit);
        }
    }
    out
}

/// Moves `bee` toward `target` with weight `weight` and a fresh uniform
/// `r ∈ [0, 1)` per word.
pub fn move_toward<R: Rng + ?Sized>(
    bee: &Position,
    target: &Position,
    weight: f64,
    semantics: MoveSemantics,
    num_free: usize,
    rng: &mut R,
) -> Position {
    debug_assert_eq!(bee.len(), target.len());
    let words = bee
        .words
        .iter()
        .zip(&target.words)
        .map(|(&b, &t)| {
            let r: f64 = rng.random();
            move_word(b, t, weight * r, semantics, rng)
        })
        .collect();
    let mut p = Position { words };
    p.mask(num_free);
    p
}

/// One word of [`move_toward`] with the random factor already drawn.
pub fn move_word<R: Rng + ?Sized>(
    current: u32,
    target: u32,
    step: f64,
    semantics: MoveSemantics,
    rng: &mut R,
) -> u32 {
    match semantics {
        MoveSemantics::WordArith => step_word(current, target, step),
        MoveSemantics::BitwiseProb => copy_bits(current, target, step.clamp(0.0, 1.0), rng),
    }
}

/// Experienced forager: steer toward the archive leader.
pub fn move_forager<R: Rng + ?Sized>(
    bee: &Position,
    leader: &Position,
    w_leader: f64,
    semantics: MoveSemantics,
    num_free: usize,
    rng: &mut R,
) -> Position {
    move_toward(bee, leader, w_leader, semantics, num_free, rng)
}

/// Onlooker: steer toward an elite forager.
pub fn move_onlooker<R: Rng + ?Sized>(
    bee: &Position,
    elite: &Position,
    w_elite: f64,
    semantics: MoveSemantics,
    num_free: usize,
    rng: &mut R,
) -> Position {
    move_toward(bee, elite, w_elite, semantics, num_free, rng)
}

/// Scout: a uniform draw per word between the two bounds.
pub fn move_scout<R: Rng + ?Sized>(b1: &Position, b2: &Position, num_free: usize, rng: &mut R) -> Position {
    let words = b1
        .words
        .iter()
        .zip(&b2.words)
        .map(|(&x, &y)| rng.random_range(x.min(y)..=x.max(y)))
        .collect();
    let mut p = Position { words };
    p.mask(num_free);
    p
}
