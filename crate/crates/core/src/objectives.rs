//! The five minimized objectives of a product.

use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::model_io::{AttributeTable, Clause, FeatureModel};

pub const NUM_OBJECTIVES: usize = 5;

pub const OBJECTIVE_NAMES: [&str; NUM_OBJECTIVES] =
    ["correctness", "richness", "used_before", "defects", "cost"];

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Violated clauses.
    pub correctness: u32,
    /// Deselected features.
    pub richness: u32,
    /// Selected features never used before.
    pub used_before: u32,
    /// Sum of known defects over selected features.
    pub defects: u32,
    /// Sum of costs over selected features.
    pub cost: f64,
}

impl ObjectiveVector {
    pub fn to_array(&self) -> [f64; NUM_OBJECTIVES] {
        [
            self.correctness as f64,
            self.richness as f64,
            self.used_before as f64,
            self.defects as f64,
            self.cost,
        ]
    }

    /// Pareto dominance under minimization.
    pub fn dominates(&self, other: &Self) -> bool {
        dominates(&self.to_array(), &other.to_array())
    }
}

// Equality is bitwise on the cost so that it agrees with `Hash`.
impl PartialEq for ObjectiveVector {
    fn eq(&self, other: &Self) -> bool {
        self.correctness == other.correctness
            && self.richness == other.richness
            && self.used_before == other.used_before
            && self.defects == other.defects
            && self.cost.to_bits() == other.cost.to_bits()
    }
}

impl Eq for ObjectiveVector {}

impl Hash for ObjectiveVector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.correctness.hash(state);
        self.richness.hash(state);
        self.used_before.hash(state);
        self.defects.hash(state);
        self.cost.to_bits().hash(state);
    }
}

/// `a` dominates `b`: no worse anywhere, strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Evaluates `config` (total over all features) against the original clauses.
pub fn evaluate(config: &Configuration, model: &FeatureModel, attrs: &AttributeTable) -> ObjectiveVector {
    evaluate_with(config, &model.clauses, attrs)
}

pub fn evaluate_with(config: &Configuration, clauses: &[Clause], attrs: &AttributeTable) -> ObjectiveVector {
    let correctness = clauses.iter().filter(|c| !config.satisfies(c)).count() as u32;
    let mut out = ObjectiveVector {
        correctness,
        richness: (config.num_features() - config.count_selected()) as u32,
        ..Default::default()
    };
    for f in config.selected() {
        let a = attrs.get(f);
        if !a.used_before {
            out.used_before += 1;
        }
        out.defects += a.defects;
        out.cost += a.cost;
    }
    out
}
