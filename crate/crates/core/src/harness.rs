//! Experiment orchestration, the exhaustive Pareto oracle and result files.
//!
//! Front files are CSV with header
//! `correctness,richness,used_before,defects,cost,features` where `features`
//! is a `0`/`1` string over features `1..=F`. Reports are JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::metrics::{self, build_reference_front, Front, Indicators, NormalizationBounds};
use crate::mobafs::{self, RunParams};
use crate::model_io::{self, AttributeTable, FeatureModel};
use crate::objectives::{evaluate, ObjectiveVector};
use crate::preprocess::{preprocess, ReducedModel};

pub const FRONT_HEADER: [&str; 6] = ["correctness", "richness", "used_before", "defects", "cost", "features"];

/// Largest free-feature count the oracle will enumerate.
pub const ORACLE_BOUND: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub objectives: ObjectiveVector,
    pub config: Option<Configuration>,
}

impl From<&mobafs::ArchiveEntry> for FrontRow {
    fn from(e: &mobafs::ArchiveEntry) -> Self {
        FrontRow {
            objectives: e.objectives,
            config: Some(e.config.clone()),
        }
    }
}

/// Rows sorted lexicographically by objective vector.
pub fn sorted_rows(mut rows: Vec<FrontRow>) -> Vec<FrontRow> {
    rows.sort_by(|a, b| {
        let (x, y) = (a.objectives.to_array(), b.objectives.to_array());
        x.iter()
            .zip(&y)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                let bits = |r: &FrontRow| r.config.as_ref().map(Configuration::to_bitstring);
                bits(a).cmp(&bits(b))
            })
    });
    rows
}

pub fn write_front_csv(rows: &[FrontRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FRONT_HEADER)?;
    for row in rows {
        let o = &row.objectives;
        w.write_record([
            o.correctness.to_string(),
            o.richness.to_string(),
            o.used_before.to_string(),
            o.defects.to_string(),
            o.cost.to_string(),
            row.config.as_ref().map(Configuration::to_bitstring).unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads a front file; the `features` column is optional.
pub fn read_front_csv(text: &str) -> Result<Vec<FrontRow>> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::FrontFormat(format!("row {}: {what}", i + 1));
        if record.len() < 5 {
            return Err(bad("expected at least 5 columns"));
        }
        let int = |k: usize| -> Result<u32> {
            record[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && *v >= 0.0)
                .map(|v| v as u32)
                .ok_or_else(|| bad(&format!("column {} is not a count", FRONT_HEADER[k])))
        };
        let objectives = ObjectiveVector {
            correctness: int(0)?,
            richness: int(1)?,
            used_before: int(2)?,
            defects: int(3)?,
            cost: record[4].parse().map_err(|_| bad("cost is not a number"))?,
        };
        let config = match record.get(5) {
            Some(bits) if !bits.is_empty() => {
                Some(Configuration::from_bitstring(bits).ok_or_else(|| bad("features is not a bitstring"))?)
            }
            _ => None,
        };
        rows.push(FrontRow { objectives, config });
    }
    Ok(rows)
}

pub fn rows_to_front(rows: &[FrontRow]) -> Front {
    Front::new(rows.iter().map(|r| r.objectives.to_array().to_vec()).collect())
}

/// Exact Pareto front of all valid products, by enumerating the free features.
///
/// A model whose constants already contradict yields an empty front.
pub fn brute_force_pareto(model: &FeatureModel, attrs: &AttributeTable) -> Result<Vec<FrontRow>> {
    let reduced = match preprocess(model) {
        Ok(r) => r,
        Err(Error::Unsatisfiable { .. }) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    brute_force_reduced(&reduced, attrs)
}

pub fn brute_force_reduced(reduced: &ReducedModel, attrs: &AttributeTable) -> Result<Vec<FrontRow>> {
    let free = reduced.num_free();
    if free > ORACLE_BOUND {
        return Err(Error::EnumerationBound {
            free,
            bound: ORACLE_BOUND,
        });
    }
    let model = &reduced.base;
    let mut front: Vec<FrontRow> = Vec::new();
    for mask in 0u64..(1u64 << free) {
        let mut config = reduced.base_configuration();
        for (i, &f) in reduced.free_features.iter().enumerate() {
            if mask >> i & 1 == 1 {
                config.set(f, true);
            }
        }
        if !model.clauses.iter().all(|c| config.satisfies(c)) {
            continue;
        }
        let o = evaluate(&config, model, attrs);
        if front
            .iter()
            .any(|r| r.objectives == o || r.objectives.dominates(&o))
        {
            continue;
        }
        front.retain(|r| !o.dominates(&r.objectives));
        front.push(FrontRow {
            objectives: o,
            config: Some(config),
        });
    }
    Ok(sorted_rows(front))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AttributeSource {
    File(PathBuf),
    Seed(u64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model_path: PathBuf,
    pub mandatory_path: Option<PathBuf>,
    pub attributes: AttributeSource,
    pub params: RunParams,
    pub repetitions: usize,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub wall_seconds: f64,
    pub iterations: u64,
    pub front_file: Option<String>,
    /// Initialization alone used up the time budget.
    pub init_exceeded_budget: bool,
    pub indicators: Indicators,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanIndicators {
    pub hv: f64,
    pub epsilon: f64,
    pub igd: f64,
    pub pfs: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub features: usize,
    pub constraints: usize,
    pub repetitions: usize,
    pub params: RunParams,
    pub reference_size: usize,
    pub bounds: Option<NormalizationBounds>,
    pub runs: Vec<RunRecord>,
    pub mean: MeanIndicators,
}

impl RunReport {
    fn samples(&self, pick: impl Fn(&Indicators) -> f64) -> Vec<f64> {
        self.runs.iter().map(|r| pick(&r.indicators)).collect()
    }
}

/// Result of one experiment: the report plus each run's front rows.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: RunReport,
    pub fronts: Vec<Vec<FrontRow>>,
}

/// Runs `repetitions` seeds `params.seed + k`, scores every front against the
/// union reference front, and writes fronts and `report.json` when `out_dir`
/// is given.
pub fn run_repetitions(
    model: &FeatureModel,
    attrs: &AttributeTable,
    params: &RunParams,
    repetitions: usize,
    out_dir: Option<&Path>,
) -> Result<ExperimentOutcome> {
    if repetitions == 0 {
        return Err(Error::InvalidParams("repetitions must be at least 1".into()));
    }
    let reduced = preprocess(model)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }

    let mut fronts = Vec::with_capacity(repetitions);
    let mut runs = Vec::with_capacity(repetitions);
    for k in 0..repetitions {
        let run_params = RunParams {
            seed: params.seed.wrapping_add(k as u64),
            ..params.clone()
        };
        let result = mobafs::run(&run_params, &reduced, attrs)?;
        let rows = sorted_rows(result.front.iter().map(FrontRow::from).collect());
        let front_file = match out_dir {
            Some(dir) => {
                let name = format!("front_{k:03}.csv");
                fs::write(dir.join(&name), write_front_csv(&rows)?)?;
                Some(name)
            }
            None => None,
        };
        let init_exceeded_budget = run_params
            .budget_seconds
            .is_some_and(|b| result.init_elapsed.as_secs_f64() >= b);
        runs.push(RunRecord {
            seed: run_params.seed,
            wall_seconds: result.elapsed.as_secs_f64(),
            iterations: result.iterations,
            front_file,
            init_exceeded_budget,
            indicators: Indicators {
                hv: 0.0,
                epsilon: 0.0,
                igd: 0.0,
                pfs: rows.len(),
                spread: 0.0,
            },
        });
        fronts.push(rows);
    }

    let point_sets: Vec<Front> = fronts.iter().map(|rows| rows_to_front(rows)).collect();
    let (reference, bounds) = build_reference_front(&point_sets);
    if let Some(b) = &bounds {
        for (run, front) in runs.iter_mut().zip(&point_sets) {
            run.indicators = metrics::indicators(front, &reference, b);
        }
    }
    let mean = mean_indicators(&runs);
    let report = RunReport {
        model: model.name.clone(),
        features: model.num_features,
        constraints: model.num_clauses(),
        repetitions,
        params: params.clone(),
        reference_size: reference.len(),
        bounds,
        runs,
        mean,
    };
    if let Some(dir) = out_dir {
        let reference_rows: Vec<FrontRow> = reference
            .points
            .iter()
            .map(|p| FrontRow {
                objectives: ObjectiveVector {
                    correctness: p[0] as u32,
                    richness: p[1] as u32,
                    used_before: p[2] as u32,
                    defects: p[3] as u32,
                    cost: p[4],
                },
                config: None,
            })
            .collect();
        fs::write(dir.join("reference.csv"), write_front_csv(&sorted_rows(reference_rows))?)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    }
    Ok(ExperimentOutcome { report, fronts })
}

fn mean_indicators(runs: &[RunRecord]) -> MeanIndicators {
    let n = runs.len().max(1) as f64;
    let sum = |f: &dyn Fn(&Indicators) -> f64| runs.iter().map(|r| f(&r.indicators)).sum::<f64>() / n;
    MeanIndicators {
        hv: sum(&|i| i.hv),
        epsilon: sum(&|i| i.epsilon),
        igd: sum(&|i| i.igd),
        pfs: sum(&|i| i.pfs as f64),
        spread: sum(&|i| i.spread),
    }
}

/// Loads the inputs named by `spec` and runs it.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport> {
    let model = load_model(&spec.model_path, spec.mandatory_path.as_deref())?;
    let attrs = match &spec.attributes {
        AttributeSource::File(p) => model_io::load_attributes(&fs::read_to_string(p)?, model.num_features)?,
        AttributeSource::Seed(s) => model_io::augment_attributes(&model, *s),
    };
    Ok(run_repetitions(&model, &attrs, &spec.params, spec.repetitions, Some(&spec.output_dir))?.report)
}

/// Reads a DIMACS model plus an optional mandatory list; the model is named
/// after the file stem.
pub fn load_model(path: &Path, mandatory: Option<&Path>) -> Result<FeatureModel> {
    let mut model = model_io::parse_dimacs(&fs::read_to_string(path)?)?;
    model.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if let Some(m) = mandatory {
        let set = model_io::parse_mandatory(&fs::read_to_string(m)?, model.num_features)?;
        model = model.with_mandatory(set)?;
    }
    Ok(model)
}

/// Â₁₂ of the first report over the second, per indicator over the per-run samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A12Table {
    pub hv: f64,
    pub epsilon: f64,
    pub igd: f64,
    pub pfs: f64,
    pub spread: f64,
}

pub fn compare(a: &RunReport, b: &RunReport) -> A12Table {
    let pair = |f: fn(&Indicators) -> f64| metrics::a12(&a.samples(f), &b.samples(f));
    A12Table {
        hv: pair(|i| i.hv),
        epsilon: pair(|i| i.epsilon),
        igd: pair(|i| i.igd),
        pfs: pair(|i| i.pfs as f64),
        spread: pair(|i| i.spread),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_io::FeatureAttributes;

    fn attrs(cost: &[f64]) -> AttributeTable {
        AttributeTable::new(
            cost.iter()
                .map(|&cost| FeatureAttributes {
                    cost,
                    used_before: true,
                    defects: 0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn oracle_two_free_features() {
        // Products {}, {1}, {2}, {1,2}: richness 2/1/1/0, cost 0/5/7/12.
        // {2} is dominated by {1}; the rest trade richness for cost.
        let model = FeatureModel::new("t", 2, vec![]).unwrap();
        let rows = brute_force_pareto(&model, &attrs(&[5.0, 7.0])).unwrap();
        let bits: Vec<String> = rows.iter().map(|r| r.config.as_ref().unwrap().to_bitstring()).collect();
        assert_eq!(bits, vec!["11", "10", "00"]);
    }

    #[test]
    fn oracle_unsat_is_empty() {
        let m = FeatureModel::new("t", 1, vec![vec![1], vec![-1]]).unwrap();
        assert!(brute_force_pareto(&m, &attrs(&[5.0])).unwrap().is_empty());
        let m = FeatureModel::new("t", 2, vec![vec![1, 2], vec![-1, 2], vec![1, -2], vec![-1, -2]]).unwrap();
        assert!(brute_force_pareto(&m, &attrs(&[5.0, 6.0])).unwrap().is_empty());
    }

    #[test]
    fn oracle_bound() {
        let m = FeatureModel::new("t", 25, vec![]).unwrap();
        let a = attrs(&[5.0; 25]);
        assert!(matches!(brute_force_pareto(&m, &a), Err(Error::EnumerationBound { free: 25, .. })));
    }

    #[test]
    fn front_csv_round_trip() {
        let rows = vec![
            FrontRow {
                objectives: ObjectiveVector {
                    correctness: 0,
                    richness: 3,
                    used_before: 1,
                    defects: 4,
                    cost: 12.345678901234567,
                },
                config: Some(Configuration::from_selected(5, [1, 4])),
            },
            FrontRow {
                objectives: ObjectiveVector::default(),
                config: None,
            },
        ];
        let text = write_front_csv(&rows).unwrap();
        assert!(text.starts_with("correctness,richness,used_before,defects,cost,features\n"));
        assert_eq!(read_front_csv(&text).unwrap(), rows);
    }

    #[test]
    fn front_csv_without_features_column() {
        let rows = read_front_csv("correctness,richness,used_before,defects,cost\n0,1,2,3,4.5\n").unwrap();
        assert_eq!(rows[0].objectives.cost, 4.5);
        assert!(rows[0].config.is_none());
        assert!(read_front_csv("a,b,c,d,e\n0,1,x,3,4\n").is_err());
    }

    #[test]
    fn compare_hand_samples() {
        let mk = |hv: &[f64]| RunReport {
            model: String::new(),
            features: 0,
            constraints: 0,
            repetitions: hv.len(),
            params: RunParams::default(),
            reference_size: 0,
            bounds: None,
            runs: hv
                .iter()
                .map(|&hv| RunRecord {
                    seed: 0,
                    wall_seconds: 0.0,
                    iterations: 0,
                    front_file: None,
                    init_exceeded_budget: false,
                    indicators: Indicators {
                        hv,
                        epsilon: hv,
                        igd: 0.0,
                        pfs: 1,
                        spread: 0.0,
                    },
                })
                .collect(),
            mean: MeanIndicators {
                hv: 0.0,
                epsilon: 0.0,
                igd: 0.0,
                pfs: 0.0,
                spread: 0.0,
            },
        };
        let a = mk(&[3.0, 3.0, 3.0]);
        let b = mk(&[1.0, 2.0, 3.0]);
        let t = compare(&a, &b);
        assert!((t.hv - 7.5 / 9.0).abs() < 1e-12);
        assert_eq!(t.igd, 0.5);
        let self_cmp = compare(&b, &b);
        assert_eq!([self_cmp.hv, self_cmp.epsilon, self_cmp.igd, self_cmp.pfs, self_cmp.spread], [0.5; 5]);
        let single = compare(&mk(&[2.0]), &mk(&[1.0]));
        assert_eq!(single.hv, 1.0);
    }
}
