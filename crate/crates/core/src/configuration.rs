use std::fmt;

use crate::model_io::{var, Clause};

/// A product: one selected/deselected bit per feature `1..=F`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    len: usize,
    words: Vec<u64>,
}

impl Configuration {
    /// All features deselected.
    pub fn empty(num_features: usize) -> Self {
        Configuration {
            len: num_features,
            words: vec![0; num_features.div_ceil(64)],
        }
    }

    pub fn from_selected(num_features: usize, selected: impl IntoIterator<Item = u32>) -> Self {
        let mut c = Self::empty(num_features);
        for f in selected {
            c.set(f, true);
        }
        c
    }

    pub fn num_features(&self) -> usize {
        self.len
    }

    /// Whether `feature` (1-based) is selected.
    #[inline]
    pub fn get(&self, feature: u32) -> bool {
        let i = feature as usize - 1;
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, feature: u32, value: bool) {
        let i = feature as usize - 1;
        debug_assert!(i < self.len);
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    #[inline]
    pub fn literal_true(&self, lit: i32) -> bool {
        self.get(var(lit)) == (lit > 0)
    }

    pub fn satisfies(&self, clause: &Clause) -> bool {
        clause.iter().any(|&l| self.literal_true(l))
    }

    pub fn count_selected(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn selected(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=self.len as u32).filter(|&f| self.get(f))
    }

    /// `'1'`/`'0'` per feature, feature 1 first.
    pub fn to_bitstring(&self) -> String {
        (1..=self.len as u32)
            .map(|f| if self.get(f) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        let mut c = Self::empty(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '1' => c.set(i as u32 + 1, true),
                '0' => {}
                _ => return None,
            }
        }
        Some(c)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({})", self.to_bitstring())
    }
}
