use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use splbee::harness::{self, read_front_csv, rows_to_front, write_front_csv, RunReport};
use splbee::metrics::{self, NormalizationBounds};
use splbee::mobafs::{MoveSemantics, RunParams};
use splbee::model_io::{self, AttributeTable, FeatureModel};
use splbee::sat::RepairMode;

#[derive(Parser)]
#[command(name = "splbee", version, about = "Multi-objective bee swarm search over software product line feature models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a model and write fronts plus report.json to --out.
    Run(RunArgs),
    /// Print constant propagation statistics as JSON.
    Preprocess(ModelArgs),
    /// Score a front against a reference front.
    Metrics {
        #[arg(long)]
        front: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Enumerate the exact Pareto front of a small model.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        attrs: AttrArgs,
        /// Write the front here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a satisfiable synthetic model in DIMACS format.
    Gen {
        #[arg(long)]
        features: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        min_len: usize,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        /// Write the DIMACS text here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write seeded attributes for the model to this CSV path.
        #[arg(long)]
        attrs_out: Option<PathBuf>,
    },
    /// Â₁₂ effect sizes of report A over report B per indicator.
    Compare {
        a: PathBuf,
        b: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: PathBuf,
    /// File listing mandatory feature ids.
    #[arg(long)]
    mandatory: Option<PathBuf>,
}

#[derive(Args)]
struct AttrArgs {
    /// Attribute CSV (feature,cost,used_before,defects).
    #[arg(long, conflicts_with = "attr_seed")]
    attrs: Option<PathBuf>,
    /// Generate attributes from this seed instead.
    #[arg(long)]
    attr_seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    attrs: AttrArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3000)]
    pop: usize,
    #[arg(long, default_value_t = 0.02)]
    scouts: f64,
    #[arg(long, default_value_t = 2.5)]
    wl: f64,
    #[arg(long, default_value_t = 2.12)]
    we: f64,
    #[arg(long, default_value_t = 5000)]
    arch_size: usize,
    #[arg(long, default_value_t = 10)]
    sp: u32,
    #[arg(long)]
    max_iter: Option<u64>,
    /// Wall-clock budget; defaults to 1800 s when --max-iter is not given.
    #[arg(long)]
    budget_seconds: Option<f64>,
    /// full, off, or bounded:K
    #[arg(long, default_value = "full")]
    repair: RepairMode,
    /// word-arith or bitwise-prob
    #[arg(long = "move", default_value = "word-arith")]
    move_semantics: MoveSemantics,
    #[arg(long, env = "SPLBEE_WORKERS")]
    workers: Option<usize>,
    /// Independent repetitions with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn params(&self) -> RunParams {
        let budget_seconds = match (self.max_iter, self.budget_seconds) {
            (None, None) => RunParams::default().budget_seconds,
            (_, b) => b,
        };
        RunParams {
            population: self.pop,
            scout_fraction: self.scouts,
            w_leader: self.wl,
            w_elite: self.we,
            arch_size: self.arch_size,
            sections: self.sp,
            max_iter: self.max_iter,
            budget_seconds,
            seed: self.seed,
            move_semantics: self.move_semantics,
            repair_mode: self.repair,
            workers: self.workers,
        }
    }
}

fn load_model(args: &ModelArgs) -> Result<FeatureModel> {
    harness::load_model(&args.model, args.mandatory.as_deref())
        .with_context(|| format!("loading model {}", args.model.display()))
}

fn load_attrs(args: &AttrArgs, model: &FeatureModel) -> Result<AttributeTable> {
    match (&args.attrs, args.attr_seed) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(model_io::load_attributes(&text, model.num_features)?)
        }
        (None, Some(seed)) => Ok(model_io::augment_attributes(model, seed)),
        (None, None) => bail!("one of --attrs or --attr-seed is required"),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let model = load_model(&args.model)?;
            let attrs = load_attrs(&args.attrs, &model)?;
            let params = args.params();
            let outcome = harness::run_repetitions(&model, &attrs, &params, args.reps, Some(&args.out))?;
            let r = &outcome.report;
            for run in &r.runs {
                if run.init_exceeded_budget {
                    eprintln!("warning: seed {} spent its whole budget on initialization", run.seed);
                }
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "model": r.model,
                    "repetitions": r.repetitions,
                    "reference_size": r.reference_size,
                    "mean": r.mean,
                    "output_dir": args.out,
                }))?
            );
        }
        Command::Preprocess(args) => {
            let model = load_model(&args)?;
            let reduced = splbee::preprocess(&model)?;
            println!("{}", serde_json::to_string_pretty(&reduced.report())?);
        }
        Command::Metrics { front, reference } => {
            let read = |p: &Path| -> Result<_> {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(rows_to_front(&read_front_csv(&text)?))
            };
            let front = read(&front)?;
            let reference = read(&reference)?;
            let Some(bounds) = NormalizationBounds::from_points(front.points.iter().chain(&reference.points)) else {
                bail!("both fronts are empty");
            };
            let ind = metrics::indicators(&front, &reference, &bounds);
            println!("{}", serde_json::to_string_pretty(&json!({ "indicators": ind, "bounds": bounds }))?);
        }
        Command::Oracle { model, attrs, out } => {
            let model = load_model(&model)?;
            let attrs = load_attrs(&attrs, &model)?;
            let rows = harness::brute_force_pareto(&model, &attrs)?;
            write_or_print(out.as_deref(), &write_front_csv(&rows)?)?;
        }
        Command::Gen {
            features,
            clauses,
            seed,
            min_len,
            max_len,
            out,
            attrs_out,
        } => {
            if features == 0 {
                bail!("--features must be at least 1");
            }
            if min_len == 0 || min_len > max_len {
                bail!("need 1 <= --min-len <= --max-len");
            }
            let mut model = model_io::generate_synthetic_model(features, clauses, min_len..=max_len, seed);
            model.name = format!("synthetic-f{features}-c{clauses}-s{seed}");
            write_or_print(out.as_deref(), &model_io::to_dimacs(&model))?;
            if let Some(p) = attrs_out {
                let table = model_io::augment_attributes(&model, seed);
                fs::write(&p, model_io::save_attributes(&table)?).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Compare { a, b } => {
            let table = harness::compare(&read_report(&a)?, &read_report(&b)?);
            println!("{}", serde_json::to_string_pretty(&table)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
