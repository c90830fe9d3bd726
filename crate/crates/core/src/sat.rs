//! A small DPLL solver with two watched literals per clause, and the repair
//! loop that turns an arbitrary configuration into a valid product.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::model_io::{var, Clause, Literal};
use crate::preprocess::ReducedModel;

#[inline]
fn slot(lit: Literal) -> usize {
    2 * (var(lit) as usize - 1) + usize::from(lit < 0)
}

#[derive(Debug, Clone, Copy)]
struct Level {
    trail_start: usize,
    decision: Literal,
    flipped: bool,
    cursor: usize,
}

/// Chronological-backtracking DPLL over a fixed clause set.
///
/// Decisions follow ascending variable order with a fixed polarity, so a solve
/// is a deterministic function of the clauses and the assumptions. Variables
/// that occur in no clause take the default polarity unless assumed.
#[derive(Debug, Clone)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
    units: Vec<Literal>,
    has_empty: bool,
    watches: Vec<Vec<u32>>,
    /// 0 unassigned, 1 true, -1 false; indexed by `var - 1`.
    assign: Vec<i8>,
    trail: Vec<Literal>,
    qhead: usize,
    levels: Vec<Level>,
    order: Vec<u32>,
    polarity: bool,
}

impl Solver {
    pub fn new(num_vars: usize, clauses: &[Clause]) -> Self {
        let mut stored = Vec::new();
        let mut units = Vec::new();
        let mut has_empty = false;
        let mut occurs = vec![false; num_vars];
        for clause in clauses {
            let mut lits = clause.clone();
            lits.sort_unstable_by_key(|&l| (var(l), l));
            lits.dedup();
            if lits.windows(2).any(|w| w[0] == -w[1]) {
                continue;
            }
            for &l in &lits {
                occurs[var(l) as usize - 1] = true;
            }
            match lits.len() {
                0 => has_empty = true,
                1 => units.push(lits[0]),
                _ => stored.push(lits),
            }
        }
        let mut watches = vec![Vec::new(); 2 * num_vars];
        for (i, c) in stored.iter().enumerate() {
            watches[slot(c[0])].push(i as u32);
            watches[slot(c[1])].push(i as u32);
        }
        let order = (1..=num_vars as u32)
            .filter(|&v| occurs[v as usize - 1])
            .collect();
        Solver {
            num_vars,
            clauses: stored,
            units,
            has_empty,
            watches,
            assign: vec![0; num_vars],
            trail: Vec::new(),
            qhead: 0,
            levels: Vec::new(),
            order,
            polarity: false,
        }
    }

    /// Sets the value tried first at each decision (default `false`).
    pub fn with_polarity(mut self, polarity: bool) -> Self {
        self.polarity = polarity;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    #[inline]
    fn value(&self, lit: Literal) -> i8 {
        let v = self.assign[var(lit) as usize - 1];
        if lit > 0 {
            v
        } else {
            -v
        }
    }

    /// Returns false on a conflict with the current assignment.
    fn enqueue(&mut self, lit: Literal) -> bool {
        match self.value(lit) {
            1 => true,
            -1 => false,
            _ => {
                self.assign[var(lit) as usize - 1] = if lit > 0 { 1 } else { -1 };
                self.trail.push(lit);
                true
            }
        }
    }

    /// Unit propagation; false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let falsified = -self.trail[self.qhead];
            self.qhead += 1;
            let mut watching = std::mem::take(&mut self.watches[slot(falsified)]);
            let mut i = 0;
            let mut conflict = false;
            while i < watching.len() {
                let ci = watching[i] as usize;
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                let other_value = {
                    let v = self.assign[var(other) as usize - 1];
                    if other > 0 {
                        v
                    } else {
                        -v
                    }
                };
                if other_value == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.assign[var(l) as usize - 1];
                    let lv = if l > 0 { v } else { -v };
                    if lv != -1 {
                        clause.swap(1, k);
                        self.watches[slot(l)].push(ci as u32);
                        watching.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if other_value == -1 || !self.enqueue(other) {
                    conflict = true;
                    break;
                }
                i += 1;
            }
            self.watches[slot(falsified)] = watching;
            if conflict {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        for &lit in &self.trail[len..] {
            self.assign[var(lit) as usize - 1] = 0;
        }
        self.trail.truncate(len);
        self.qhead = len;
    }

    /// Flips the deepest unflipped decision; false when none is left.
    fn backtrack(&mut self) -> bool {
        while let Some(level) = self.levels.last_mut() {
            let level = *level;
            self.undo_to(level.trail_start);
            if level.flipped {
                self.levels.pop();
                continue;
            }
            let top = self.levels.last_mut().expect("level present");
            top.flipped = true;
            let ok = self.enqueue(-level.decision);
            debug_assert!(ok);
            return true;
        }
        false
    }

    /// Finds a total assignment satisfying every clause and every assumption
    /// literal, or `None` if there is none.
    pub fn solve(&mut self, assumptions: &[Literal]) -> Option<Configuration> {
        self.undo_to(0);
        self.levels.clear();
        if self.has_empty {
            return None;
        }
        for i in 0..self.units.len() {
            if !self.enqueue(self.units[i]) {
                return None;
            }
        }
        for &lit in assumptions {
            if !self.enqueue(lit) {
                return None;
            }
        }
        if !self.propagate() {
            return None;
        }

        let mut cursor = 0;
        loop {
            while cursor < self.order.len() && self.assign[self.order[cursor] as usize - 1] != 0 {
                cursor += 1;
            }
            if cursor == self.order.len() {
                break;
            }
            let v = self.order[cursor] as Literal;
            let decision = if self.polarity { v } else { -v };
            self.levels.push(Level {
                trail_start: self.trail.len(),
                decision,
                flipped: false,
                cursor,
            });
            self.enqueue(decision);
            while !self.propagate() {
                if !self.backtrack() {
                    return None;
                }
                cursor = self.levels.last().expect("backtrack leaves a level").cursor;
            }
        }

        let mut model = Configuration::empty(self.num_vars);
        for v in 1..=self.num_vars as u32 {
            let value = match self.assign[v as usize - 1] {
                0 => self.polarity,
                a => a > 0,
            };
            model.set(v, value);
        }
        Some(model)
    }
}

/// Number of clauses with no true literal under `config`.
pub fn count_violations(config: &Configuration, clauses: &[Clause]) -> usize {
    clauses.iter().filter(|c| !config.satisfies(c)).count()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepairMode {
    /// Repeat until the configuration satisfies every clause.
    #[default]
    Full,
    /// Give up after this many solver calls.
    Bounded(u32),
    Off,
}


impl std::str::FromStr for RepairMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(RepairMode::Full),
            "off" => Ok(RepairMode::Off),
            _ => s
                .strip_prefix("bounded:")
                .and_then(|k| k.parse().ok())
                .map(RepairMode::Bounded)
                .ok_or_else(|| format!("expected full, off or bounded:<k>, got `{s}`")),
        }
    }
}

impl std::fmt::Display for RepairMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RepairMode::Full => f.write_str("full"),
            RepairMode::Bounded(k) => write!(f, "bounded:{k}"),
            RepairMode::Off => f.write_str("off"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub config: Configuration,
    /// Violated active clauses remaining in `config`.
    pub violations: usize,
    pub solver_calls: u32,
    /// Size of the indeterminate set at each solver call.
    pub indeterminate_sizes: Vec<usize>,
}

/// Repairs `config` against the active clauses of `model`.
///
/// Constants are forced first. While clauses are violated, a random subset of
/// the features occurring in violated clauses (10% of them, at least one) is
/// released and the solver completes it with every other free feature held
/// fixed. An unsatisfiable attempt doubles the released set, first drawing on
/// the remaining violated-clause features and then on the other free features.
pub fn repair<R: Rng + ?Sized>(
    mut config: Configuration,
    model: &ReducedModel,
    solver: &mut Solver,
    rng: &mut R,
    mode: RepairMode,
) -> Result<RepairOutcome> {
    model.force_constants(&mut config);
    let violations = count_violations(&config, &model.active_clauses);
    let mut outcome = RepairOutcome {
        config,
        violations,
        solver_calls: 0,
        indeterminate_sizes: Vec::new(),
    };
    if mode == RepairMode::Off || violations == 0 {
        return Ok(outcome);
    }
    let budget = match mode {
        RepairMode::Bounded(k) => Some(k),
        _ => None,
    };

    // Release order: violated-clause features first, the other free features after.
    let mut released_order: Vec<u32> = {
        let mut seen = vec![false; model.num_features() + 1];
        let mut vars = Vec::new();
        for clause in &model.active_clauses {
            if outcome.config.satisfies(clause) {
                continue;
            }
            for &l in clause {
                let v = var(l);
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    vars.push(v);
                }
            }
        }
        vars.sort_unstable();
        vars
    };
    let in_violated = released_order.len();
    released_order.shuffle(rng);
    let mut others_added = false;

    let mut size = in_violated.div_ceil(10).max(1);
    loop {
        if budget.is_some_and(|k| outcome.solver_calls >= k) {
            return Ok(outcome);
        }
        if size > released_order.len() && !others_added {
            let mut released = vec![false; model.num_features() + 1];
            for &v in &released_order {
                released[v as usize] = true;
            }
            let mut rest: Vec<u32> = model
                .free_features
                .iter()
                .copied()
                .filter(|&f| !released[f as usize])
                .collect();
            rest.shuffle(rng);
            released_order.extend(rest);
            others_added = true;
        }
        let size_now = size.min(released_order.len());
        let indeterminate = &released_order[..size_now];

        let mut held = vec![true; model.num_features() + 1];
        for &v in indeterminate {
            held[v as usize] = false;
        }
        let assumptions: Vec<Literal> = model
            .free_features
            .iter()
            .filter(|&&f| held[f as usize])
            .map(|&f| if outcome.config.get(f) { f as Literal } else { -(f as Literal) })
            .collect();

        outcome.solver_calls += 1;
        outcome.indeterminate_sizes.push(size_now);
        if let Some(model_values) = solver.solve(&assumptions) {
            for &v in indeterminate {
                outcome.config.set(v, model_values.get(v));
            }
            outcome.violations = 0;
            debug_assert_eq!(count_violations(&outcome.config, &model.active_clauses), 0);
            return Ok(outcome);
        }
        if size_now == released_order.len() && others_added {
            // Every free feature was released and the clauses still fail.
            return match budget {
                Some(_) => Ok(outcome),
                None => Err(Error::NoSolution),
            };
        }
        size = (size_now * 2).max(size_now + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_io::FeatureModel;
    use crate::preprocess::preprocess;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_models(n: usize) -> impl Iterator<Item = Configuration> {
        (0u32..1 << n).map(move |mask| {
            Configuration::from_selected(n, (1..=n as u32).filter(|&v| mask >> (v - 1) & 1 == 1))
        })
    }

    #[test]
    fn empty_clause_set_defaults_to_false() {
        let mut s = Solver::new(3, &[]);
        let m = s.solve(&[]).unwrap();
        assert_eq!(m.count_selected(), 0);
        let mut s = Solver::new(3, &[]).with_polarity(true);
        assert_eq!(s.solve(&[]).unwrap().count_selected(), 3);
    }

    #[test]
    fn assumption_forces_other_literal() {
        let mut s = Solver::new(2, &[vec![1, 2]]);
        let m = s.solve(&[-1]).unwrap();
        assert!(!m.get(1) && m.get(2));
    }

    #[test]
    fn contradictory_units_unsat() {
        let mut s = Solver::new(1, &[vec![1], vec![-1]]);
        assert!(s.solve(&[]).is_none());
        let mut s = Solver::new(2, &[vec![1, 2]]);
        assert!(s.solve(&[-1, -2]).is_none());
        assert!(s.solve(&[1, -1]).is_none());
        // solver is reusable after an unsat call
        assert!(s.solve(&[]).is_some());
    }

    #[test]
    fn needs_backtracking() {
        // all-false first decisions fail; pigeonhole-ish small instance
        let clauses = vec![
            vec![1, 2, 3],
            vec![-1, -2],
            vec![-1, -3],
            vec![-2, -3],
            vec![2, 3],
            vec![-3, 4],
            vec![-4, -2],
        ];
        let mut s = Solver::new(4, &clauses);
        let m = s.solve(&[]).unwrap();
        assert_eq!(count_violations(&m, &clauses), 0);
    }

    #[test]
    fn decision_procedure_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..300 {
            let n = rng.random_range(1..=8);
            let m = rng.random_range(0..=3 * n);
            let clauses: Vec<Clause> = (0..m)
                .map(|_| {
                    let len = rng.random_range(1..=3);
                    (0..len)
                        .map(|_| {
                            let v = rng.random_range(1..=n as i32);
                            if rng.random_bool(0.5) { v } else { -v }
                        })
                        .collect()
                })
                .collect();
            let sat = all_models(n).any(|c| count_violations(&c, &clauses) == 0);
            let mut s = Solver::new(n, &clauses);
            let got = s.solve(&[]);
            assert_eq!(got.is_some(), sat, "round {round}: {clauses:?}");
            if let Some(model) = got {
                assert_eq!(count_violations(&model, &clauses), 0);
            }
        }
    }

    #[test]
    fn count_violations_cases() {
        let clauses = vec![vec![1, 2]];
        assert_eq!(count_violations(&Configuration::empty(2), &clauses), 1);
        assert_eq!(count_violations(&Configuration::from_selected(2, [2]), &clauses), 0);
    }

    #[test]
    fn repair_mode_parsing() {
        assert_eq!("full".parse::<RepairMode>(), Ok(RepairMode::Full));
        assert_eq!("off".parse::<RepairMode>(), Ok(RepairMode::Off));
        assert_eq!("bounded:7".parse::<RepairMode>(), Ok(RepairMode::Bounded(7)));
        assert!("bounded:x".parse::<RepairMode>().is_err());
        assert_eq!(RepairMode::Bounded(3).to_string(), "bounded:3");
    }

    #[test]
    fn valid_config_untouched() {
        let model = FeatureModel::new("t", 3, vec![vec![1, 2], vec![-1, 3]]).unwrap();
        let r = preprocess(&model).unwrap();
        let mut solver = Solver::new(3, &r.active_clauses);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = Configuration::from_selected(3, [2]);
        let out = repair(cfg.clone(), &r, &mut solver, &mut rng, RepairMode::Full).unwrap();
        assert_eq!(out.config, cfg);
        assert_eq!(out.solver_calls, 0);
    }

    #[test]
    fn off_mode_keeps_violations() {
        let model = FeatureModel::new("t", 2, vec![vec![1, 2]]).unwrap();
        let r = preprocess(&model).unwrap();
        let mut solver = Solver::new(2, &r.active_clauses);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = repair(Configuration::empty(2), &r, &mut solver, &mut rng, RepairMode::Off).unwrap();
        assert_eq!(out.violations, 1);
        assert_eq!(out.config, Configuration::empty(2));
    }

    #[test]
    fn single_clause_repair_flips_exactly_one() {
        // Enumerated outcomes on [1,2] from (0,0): release one of {1,2}, the
        // solver must set it true while the other stays false.
        let model = FeatureModel::new("t", 2, vec![vec![1, 2]]).unwrap();
        let r = preprocess(&model).unwrap();
        let mut solver = Solver::new(2, &r.active_clauses);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out =
                repair(Configuration::empty(2), &r, &mut solver, &mut rng, RepairMode::Full).unwrap();
            assert_eq!(out.solver_calls, 1);
            assert_eq!(out.config.count_selected(), 1);
            seen.insert(out.config.to_bitstring());
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec!["01", "10"]);
    }

    #[test]
    fn widening_when_first_release_is_unsat() {
        // (1 or 2) with 1 forced false by (-1 or -3) and 3 held true: releasing
        // only 1 cannot help, so the set must grow.
        let model = FeatureModel::new("t", 3, vec![vec![1, 2], vec![-1, -3]]).unwrap();
        let r = preprocess(&model).unwrap();
        let mut solver = Solver::new(3, &r.active_clauses);
        for seed in 0..32 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = Configuration::from_selected(3, [3]);
            let out = repair(start, &r, &mut solver, &mut rng, RepairMode::Full).unwrap();
            assert_eq!(count_violations(&out.config, &model.clauses), 0);
            assert!(out.indeterminate_sizes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn bounded_gives_up() {
        let model = FeatureModel::new("t", 3, vec![vec![1, 2], vec![-1, -3], vec![-2, -3]]).unwrap();
        let r = preprocess(&model).unwrap();
        let mut solver = Solver::new(3, &r.active_clauses);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let start = Configuration::from_selected(3, [3]);
        // One call can release only a single violated-clause feature, which is never enough.
        let out = repair(start.clone(), &r, &mut solver, &mut rng, RepairMode::Bounded(1)).unwrap();
        assert_eq!(out.solver_calls, 1);
        assert_eq!(out.config, start);
        assert_eq!(out.violations, 1);
    }

    #[test]
    fn full_mode_on_unsat_clauses_errors() {
        let model = FeatureModel::new("t", 2, vec![vec![1, 2], vec![-1, 2], vec![1, -2], vec![-1, -2]])
            .unwrap();
        let r = preprocess(&model).unwrap();
        let mut solver = Solver::new(2, &r.active_clauses);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let res = repair(Configuration::empty(2), &r, &mut solver, &mut rng, RepairMode::Full);
        assert!(matches!(res, Err(Error::NoSolution)));
    }
}
