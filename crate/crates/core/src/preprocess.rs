//! Constant-feature detection by propagation to a fixpoint, and the reduced
//! model the optimizer searches over.
//!
//! A feature is constant when the mandatory set and the clauses force its
//! value: whenever every literal of a clause but one is false, the remaining
//! literal must hold. Clauses that a constant already satisfies are declined
//! (dropped for good); the rest lose their constant-falsified literals.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::model_io::{var, Clause, FeatureModel, Literal};

/// Bits per position word.
pub const WORD_BITS: usize = 32;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstantSets {
    /// Features forced true.
    pub one: BTreeSet<u32>,
    /// Features forced false.
    pub zero: BTreeSet<u32>,
}

impl ConstantSets {
    pub fn len(&self) -> usize {
        self.one.len() + self.zero.len()
    }

    pub fn is_empty(&self) -> bool {
        self.one.is_empty() && self.zero.is_empty()
    }

    pub fn value(&self, feature: u32) -> Option<bool> {
        if self.one.contains(&feature) {
            Some(true)
        } else if self.zero.contains(&feature) {
            Some(false)
        } else {
            None
        }
    }

    fn from_values(values: &[Option<bool>]) -> Self {
        let mut sets = ConstantSets::default();
        for (i, v) in values.iter().enumerate() {
            match v {
                Some(true) => sets.one.insert(i as u32 + 1),
                Some(false) => sets.zero.insert(i as u32 + 1),
                None => false,
            };
        }
        sets
    }

    fn values(&self, num_features: usize) -> Vec<Option<bool>> {
        let mut values = vec![None; num_features];
        for &f in &self.one {
            values[f as usize - 1] = Some(true);
        }
        for &f in &self.zero {
            values[f as usize - 1] = Some(false);
        }
        values
    }
}

#[inline]
fn lit_slot(lit: Literal) -> usize {
    2 * (var(lit) as usize - 1) + usize::from(lit < 0)
}

struct Propagator {
    clauses: Vec<Vec<Literal>>,
    occurrences: Vec<Vec<u32>>,
    unresolved: Vec<u32>,
    satisfied: Vec<bool>,
    values: Vec<Option<bool>>,
    queue: Vec<Literal>,
}

impl Propagator {
    fn new(model: &FeatureModel) -> Self {
        let n = model.num_features;
        let mut clauses = Vec::with_capacity(model.clauses.len());
        let mut occurrences = vec![Vec::new(); 2 * n];
        for clause in &model.clauses {
            let mut lits = clause.clone();
            lits.sort_unstable();
            lits.dedup();
            let tautology = lits.iter().any(|&l| l > 0 && lits.binary_search(&-l).is_ok());
            if tautology {
                continue;
            }
            let id = clauses.len() as u32;
            for &l in &lits {
                occurrences[lit_slot(l)].push(id);
            }
            clauses.push(lits);
        }
        let unresolved = clauses.iter().map(|c| c.len() as u32).collect();
        let satisfied = vec![false; clauses.len()];
        Propagator {
            clauses,
            occurrences,
            unresolved,
            satisfied,
            values: vec![None; n],
            queue: Vec::new(),
        }
    }

    fn assert(&mut self, lit: Literal) -> Result<()> {
        let v = var(lit);
        let want = lit > 0;
        match self.values[v as usize - 1] {
            Some(have) if have == want => Ok(()),
            Some(_) => Err(Error::Unsatisfiable { feature: v }),
            None => {
                self.values[v as usize - 1] = Some(want);
                self.queue.push(lit);
                Ok(())
            }
        }
    }

    fn run(&mut self) -> Result<()> {
        let mut head = 0;
        while head < self.queue.len() {
            let lit = self.queue[head];
            head += 1;
            for &c in &self.occurrences[lit_slot(lit)] {
                self.satisfied[c as usize] = true;
            }
            let falsified = std::mem::take(&mut self.occurrences[lit_slot(-lit)]);
            for &c in &falsified {
                let c = c as usize;
                self.unresolved[c] -= 1;
                if self.satisfied[c] {
                    continue;
                }
                match self.unresolved[c] {
                    0 => return Err(Error::Unsatisfiable { feature: var(lit) }),
                    1 => {
                        let open = self.clauses[c]
                            .iter()
                            .copied()
                            .find(|&l| self.values[var(l) as usize - 1].is_none());
                        // An already assigned but unprocessed literal resolves
                        // the clause when its turn comes.
                        if let Some(l) = open {
                            self.assert(l)?;
                        }
                    }
                    _ => {}
                }
            }
            self.occurrences[lit_slot(-lit)] = falsified;
        }
        Ok(())
    }
}

/// Computes the constant features of `model`: mandatory features are asserted
/// true, unit clauses fire, and propagation runs until nothing changes.
///
/// Fails with [`Error::Unsatisfiable`] if some feature is forced both ways.
pub fn determine_constants(model: &FeatureModel) -> Result<ConstantSets> {
    let mut prop = Propagator::new(model);
    for &f in &model.mandatory {
        prop.assert(f as Literal)?;
    }
    for c in 0..prop.clauses.len() {
        if prop.clauses[c].len() == 1 {
            let l = prop.clauses[c][0];
            prop.assert(l)?;
        }
    }
    prop.run()?;
    Ok(ConstantSets::from_values(&prop.values))
}

/// A feature model with its constants removed from the search.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub base: FeatureModel,
    pub constants: ConstantSets,
    /// Unassigned features in ascending order; position bit `i` maps to `free_features[i]`.
    pub free_features: Vec<u32>,
    /// Clauses satisfied by the constants.
    pub declined: usize,
    /// Remaining clauses with constant-falsified literals removed.
    pub active_clauses: Vec<Clause>,
    values: Vec<Option<bool>>,
}

/// Drops the clauses `constants` satisfy and strips the literals it falsifies.
pub fn reduce(model: &FeatureModel, constants: &ConstantSets) -> ReducedModel {
    let values = constants.values(model.num_features);
    let truth = |l: Literal| values[var(l) as usize - 1].map(|v| v == (l > 0));

    let mut declined = 0;
    let mut active_clauses = Vec::new();
    for clause in &model.clauses {
        if clause.iter().any(|&l| truth(l) == Some(true)) {
            declined += 1;
            continue;
        }
        let rest: Clause = clause.iter().copied().filter(|&l| truth(l).is_none()).collect();
        debug_assert!(!rest.is_empty(), "constants falsify a clause");
        active_clauses.push(rest);
    }
    let free_features = (1..=model.num_features as u32)
        .filter(|&f| values[f as usize - 1].is_none())
        .collect();

    ReducedModel {
        base: model.clone(),
        constants: constants.clone(),
        free_features,
        declined,
        active_clauses,
        values,
    }
}

/// [`determine_constants`] followed by [`reduce`].
pub fn preprocess(model: &FeatureModel) -> Result<ReducedModel> {
    let constants = determine_constants(model)?;
    Ok(reduce(model, &constants))
}

impl ReducedModel {
    pub fn num_features(&self) -> usize {
        self.base.num_features
    }

    pub fn num_free(&self) -> usize {
        self.free_features.len()
    }

    /// Number of 32-bit words needed to encode the free features.
    pub fn dimension(&self) -> usize {
        reduced_dimension(self)
    }

    pub fn constant_value(&self, feature: u32) -> Option<bool> {
        self.values[feature as usize - 1]
    }

    /// Configuration with every constant applied and every free feature deselected.
    pub fn base_configuration(&self) -> Configuration {
        Configuration::from_selected(self.num_features(), self.constants.one.iter().copied())
    }

    /// Overwrites the constant features of `config` with their forced values.
    pub fn force_constants(&self, config: &mut Configuration) {
        for &f in &self.constants.one {
            config.set(f, true);
        }
        for &f in &self.constants.zero {
            config.set(f, false);
        }
    }

    /// The active clauses over the free features renumbered `1..=k`.
    pub fn compact_model(&self) -> FeatureModel {
        let mut renumber = vec![0i32; self.num_features() + 1];
        for (i, &f) in self.free_features.iter().enumerate() {
            renumber[f as usize] = i as i32 + 1;
        }
        let clauses = self
            .active_clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&l| renumber[var(l) as usize] * l.signum())
                    .collect()
            })
            .collect();
        FeatureModel {
            name: self.base.name.clone(),
            num_features: self.num_free(),
            clauses,
            mandatory: BTreeSet::new(),
        }
    }

    /// `(F − M − t) / 32` taken literally, with `t = |one| + |zero|`; reported
    /// for comparison only since mandatory features are already part of `one`.
    pub fn nominal_dimension(&self) -> f64 {
        let f = self.num_features() as f64;
        let m = self.base.mandatory.len() as f64;
        let t = self.constants.len() as f64;
        (f - m - t) / WORD_BITS as f64
    }

    pub fn report(&self) -> PreprocessReport {
        PreprocessReport {
            features: self.num_features(),
            constraints: self.base.num_clauses(),
            mandatory: self.base.mandatory.len(),
            constants_one: self.constants.one.len(),
            constants_zero: self.constants.zero.len(),
            declined: self.declined,
            free_count: self.num_free(),
            words: self.dimension(),
        }
    }
}

/// `ceil(free / 32)`; zero for a fully determined model.
pub fn reduced_dimension(model: &ReducedModel) -> usize {
    model.num_free().div_ceil(WORD_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreprocessReport {
    #[serde(rename = "F")]
    pub features: usize,
    #[serde(rename = "C")]
    pub constraints: usize,
    pub mandatory: usize,
    pub constants_one: usize,
    pub constants_zero: usize,
    pub declined: usize,
    pub free_count: usize,
    #[serde(rename = "W")]
    pub words: usize,
}
