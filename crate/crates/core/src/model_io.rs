//! Feature models in DIMACS CNF, per-feature attributes, and a generator for
//! synthetic satisfiable models.
//!
//! Features are numbered `1..=F` as in DIMACS. A positive literal selects the
//! feature, a negative one deselects it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Literal = i32;
pub type Clause = Vec<Literal>;

/// Feature index of a literal.
#[inline]
pub fn var(lit: Literal) -> u32 {
    lit.unsigned_abs()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    pub name: String,
    pub num_features: usize,
    pub clauses: Vec<Clause>,
    /// Features declared mandatory by a sidecar list; empty when none was given.
    pub mandatory: BTreeSet<u32>,
}

impl FeatureModel {
    pub fn new(name: impl Into<String>, num_features: usize, clauses: Vec<Clause>) -> Result<Self> {
        let model = FeatureModel {
            name: name.into(),
            num_features,
            clauses,
            mandatory: BTreeSet::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn with_mandatory(mut self, mandatory: BTreeSet<u32>) -> Result<Self> {
        if let Some(&bad) = mandatory
            .iter()
            .find(|&&f| f == 0 || f as usize > self.num_features)
        {
            return Err(Error::MandatoryList {
                line: 0,
                msg: format!("feature {bad} outside 1..={}", self.num_features),
            });
        }
        self.mandatory = mandatory;
        Ok(self)
    }

    /// Checks the structural invariants: no empty clause, every literal in range.
    pub fn validate(&self) -> Result<()> {
        for (i, clause) in self.clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::EmptyClause { line: i + 1 });
            }
            for &lit in clause {
                if lit == 0 || var(lit) as usize > self.num_features {
                    return Err(Error::LiteralOutOfRange {
                        line: i + 1,
                        literal: lit as i64,
                        num_features: self.num_features,
                    });
                }
            }
        }
        for &f in &self.mandatory {
            if f == 0 || f as usize > self.num_features {
                return Err(Error::MandatoryList {
                    line: 0,
                    msg: format!("feature {f} outside 1..={}", self.num_features),
                });
            }
        }
        Ok(())
    }
}

/// Parses DIMACS CNF text.
///
/// Comment lines start with `c`; a line starting with `%` ends the clause
/// section (SATLIB convention). Clauses may span lines. A header clause count
/// that disagrees with the actual count is logged and the actual count kept.
pub fn parse_dimacs(text: &str) -> Result<FeatureModel> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Clause = Vec::new();
    let mut current_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::MalformedHeader {
                    line: line_no,
                    msg: "duplicate header".into(),
                });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((num_features, _)) = header else {
            return Err(Error::MissingHeader);
        };
        for token in line.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| Error::InvalidLiteral {
                line: line_no,
                token: token.to_string(),
            })?;
            if current.is_empty() {
                current_line = line_no;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::EmptyClause { line: line_no });
                }
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if lit.unsigned_abs() as usize > num_features {
                return Err(Error::LiteralOutOfRange {
                    line: line_no,
                    literal: lit,
                    num_features,
                });
            }
            current.push(lit as Literal);
        }
    }

    let (num_features, declared) = header.ok_or(Error::MissingHeader)?;
    if !current.is_empty() {
        log::warn!("clause starting on line {current_line} lacks a terminating 0; accepted");
        clauses.push(current);
    }
    if declared != clauses.len() {
        log::warn!(
            "header declares {declared} clauses but {} were read; using the actual count",
            clauses.len()
        );
    }
    Ok(FeatureModel {
        name: String::new(),
        num_features,
        clauses,
        mandatory: BTreeSet::new(),
    })
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let malformed = |msg: &str| Error::MalformedHeader {
        line: line_no,
        msg: msg.to_string(),
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(malformed("expected `p cnf <vars> <clauses>`"));
    }
    let vars = fields[2]
        .parse()
        .map_err(|_| malformed("variable count is not a non-negative integer"))?;
    let clauses = fields[3]
        .parse()
        .map_err(|_| malformed("clause count is not a non-negative integer"))?;
    Ok((vars, clauses))
}

pub fn to_dimacs(model: &FeatureModel) -> String {
    let mut out = String::new();
    if !model.name.is_empty() {
        let _ = writeln!(out, "c {}", model.name);
    }
    let _ = writeln!(out, "p cnf {} {}", model.num_features, model.clauses.len());
    for clause in &model.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

/// Parses a mandatory-feature list: one feature index per line. Blank lines and
/// lines starting with `#` or `c` are ignored.
pub fn parse_mandatory(text: &str, num_features: usize) -> Result<BTreeSet<u32>> {
    let mut out = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('c') {
            continue;
        }
        let f: u32 = line.parse().map_err(|_| Error::MandatoryList {
            line: idx + 1,
            msg: format!("`{line}` is not a feature index"),
        })?;
        if f == 0 || f as usize > num_features {
            return Err(Error::MandatoryList {
                line: idx + 1,
                msg: format!("feature {f} outside 1..={num_features}"),
            });
        }
        out.insert(f);
    }
    Ok(out)
}

pub const COST_RANGE: RangeInclusive<f64> = 5.0..=15.0;
pub const MAX_DEFECTS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureAttributes {
    pub cost: f64,
    pub used_before: bool,
    pub defects: u32,
}

/// Attributes for features `1..=F`, stored at index `feature - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    rows: Vec<FeatureAttributes>,
}

impl AttributeTable {
    pub fn new(rows: Vec<FeatureAttributes>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            check_row(i as u32 + 1, row)?;
        }
        Ok(AttributeTable { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Attributes of `feature` (1-based).
    pub fn get(&self, feature: u32) -> &FeatureAttributes {
        &self.rows[feature as usize - 1]
    }

    pub fn rows(&self) -> &[FeatureAttributes] {
        &self.rows
    }
}

fn check_row(feature: u32, row: &FeatureAttributes) -> Result<()> {
    if !COST_RANGE.contains(&row.cost) {
        return Err(Error::Attributes(format!(
            "feature {feature}: cost {} outside [5.0, 15.0]",
            row.cost
        )));
    }
    if row.defects > MAX_DEFECTS {
        return Err(Error::Attributes(format!(
            "feature {feature}: defects {} above {MAX_DEFECTS}",
            row.defects
        )));
    }
    if !row.used_before && row.defects != 0 {
        return Err(Error::Attributes(format!(
            "feature {feature}: {} defects on a feature never used before",
            row.defects
        )));
    }
    Ok(())
}

/// ChaCha8 stream dedicated to attribute generation.
pub const ATTRIBUTE_STREAM: u64 = 0xA77;

/// Draws random attributes for every feature of `model`.
///
/// The generator is `ChaCha8Rng::seed_from_u64(seed)` on stream
/// [`ATTRIBUTE_STREAM`]; features are visited in order `1..=F` and each draws,
/// in sequence, a cost in `[5.0, 15.0]`, a fair `used_before` coin and a
/// defect count in `0..=10`. Defects are then zeroed for unused features.
pub fn augment_attributes(model: &FeatureModel, seed: u64) -> AttributeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ATTRIBUTE_STREAM);
    let rows = (0..model.num_features)
        .map(|_| {
            let cost = rng.random_range(COST_RANGE);
            let used_before = rng.random_bool(0.5);
            let defects = rng.random_range(0..=MAX_DEFECTS);
            FeatureAttributes {
                cost,
                used_before,
                defects: if used_before { defects } else { 0 },
            }
        })
        .collect();
    AttributeTable { rows }
}

#[derive(Debug, Serialize, Deserialize)]
struct AttributeRecord {
    feature: u32,
    cost: f64,
    used_before: bool,
    defects: u32,
}

/// Reads the `feature,cost,used_before,defects` CSV. Every feature in
/// `1..=num_features` must appear exactly once, in any order.
pub fn load_attributes(text: &str, num_features: usize) -> Result<AttributeTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Option<FeatureAttributes>> = vec![None; num_features];
    let mut count = 0;
    for record in reader.deserialize() {
        let rec: AttributeRecord = record?;
        count += 1;
        if rec.feature == 0 || rec.feature as usize > num_features {
            return Err(Error::Attributes(format!(
                "feature {} outside 1..={num_features}",
                rec.feature
            )));
        }
        let row = FeatureAttributes {
            cost: rec.cost,
            used_before: rec.used_before,
            defects: rec.defects,
        };
        check_row(rec.feature, &row)?;
        let slot = &mut rows[rec.feature as usize - 1];
        if slot.is_some() {
            return Err(Error::Attributes(format!("feature {} listed twice", rec.feature)));
        }
        *slot = Some(row);
    }
    if count != num_features {
        return Err(Error::Attributes(format!(
            "{count} rows for a model with {num_features} features"
        )));
    }
    Ok(AttributeTable {
        rows: rows.into_iter().map(|r| r.expect("all rows present")).collect(),
    })
}

pub fn save_attributes(table: &AttributeTable) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for (i, row) in table.rows.iter().enumerate() {
        writer.serialize(AttributeRecord {
            feature: i as u32 + 1,
            cost: row.cost,
            used_before: row.used_before,
            defects: row.defects,
        })?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Generates a random CNF model that is satisfiable by construction.
///
/// A hidden assignment is drawn first; every clause gets distinct variables
/// with random signs, and if none of its literals agrees with the hidden
/// assignment one of them is flipped so that it does.
pub fn generate_synthetic_model(
    num_features: usize,
    num_clauses: usize,
    clause_len: RangeInclusive<usize>,
    seed: u64,
) -> FeatureModel {
    assert!(num_features >= 1, "a model needs at least one feature");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<bool> = (0..num_features).map(|_| rng.random_bool(0.5)).collect();
    let lo = (*clause_len.start()).clamp(1, num_features);
    let hi = (*clause_len.end()).clamp(lo, num_features);

    let clauses = (0..num_clauses)
        .map(|_| {
            let len = rng.random_range(lo..=hi);
            let mut clause: Clause = index::sample(&mut rng, num_features, len)
                .into_iter()
                .map(|v| {
                    let lit = v as Literal + 1;
                    if rng.random_bool(0.5) {
                        lit
                    } else {
                        -lit
                    }
                })
                .collect();
            let satisfied = clause
                .iter()
                .any(|&l| hidden[var(l) as usize - 1] == (l > 0));
            if !satisfied {
                let k = rng.random_range(0..clause.len());
                clause[k] = -clause[k];
            }
            clause
        })
        .collect();

    FeatureModel {
        name: format!("synthetic-{num_features}-{num_clauses}-{seed}"),
        num_features,
        clauses,
        mandatory: BTreeSet::new(),
    }
}
