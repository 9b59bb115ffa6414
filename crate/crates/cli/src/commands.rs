use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crowdfuse::data::{ingest_csv, write_csv};
use crowdfuse::fusion::{
    confidence_fusion, experience_fusion, majority_vote, overall_fusion, time_fusion,
};
use crowdfuse::metrics::{
    breakdown, build_report, emit_breakdown, emit_report, BreakdownDimension, CorrelationBreakdown,
    FusionReport, TimeBins,
};
use crowdfuse::sim::{
    read_raw_csv, run_plans, synthesize_population, write_raw_csv, ModelSpecFile, RawRecord,
};
use crowdfuse::{Dataset, DecisionVector, Execution, FusionMethod, FusionOutcome, FusionScales};
use serde::Deserialize;

use crate::error::CliError;
use crate::staging::Staging;
use crate::{AnalyzeArgs, FuseArgs, PlanArgs, ReportArgs, ScaleArgs, SimulateArgs};

/// Keys of the run config that `analyze` understands; the rest describe the
/// synthetic population and only make sense for `simulate`.
const ANALYZE_KEYS: [&str; 6] = ["seed", "ks", "n_groups", "methods", "max_confidence", "max_experience"];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FuseInput {
    d: Option<Vec<i64>>,
    c: Option<Vec<u8>>,
    e: Option<Vec<u8>>,
    t: Option<Vec<u32>>,
    max_confidence: Option<u8>,
    max_experience: Option<u8>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn need<'a, T>(v: Option<&'a [T]>, method: FusionMethod, flag: &str) -> Result<&'a [T], CliError> {
    v.ok_or_else(|| CliError::invalid(format!("{method} needs --{flag}")))
}

fn parse_methods(names: &[String]) -> Result<Vec<FusionMethod>, CliError> {
    names.iter().map(|m| m.parse().map_err(CliError::Invalid)).collect()
}

pub fn fuse(a: FuseArgs) -> Result<(), CliError> {
    let file: FuseInput = match &a.input {
        Some(p) => toml::from_str(&read_text(p)?)
            .map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?,
        None => FuseInput::default(),
    };
    let d = a.d.or(file.d).ok_or_else(|| CliError::invalid("no decisions given (--d)"))?;
    let c = a.c.or(file.c);
    let e = a.e.or(file.e);
    let t = a.t.or(file.t);
    let scales = FusionScales::new(
        a.scales.max_confidence.or(file.max_confidence).unwrap_or(5),
        a.scales.max_experience.or(file.max_experience).unwrap_or(5),
    )?;
    let d = DecisionVector::from_bits(&d)?;

    let methods = match &a.methods {
        Some(names) => parse_methods(names)?,
        None => FusionMethod::ALL
            .into_iter()
            .filter(|m| match m {
                FusionMethod::MV => true,
                FusionMethod::CF => c.is_some(),
                FusionMethod::EF => e.is_some(),
                FusionMethod::TF => t.is_some(),
                FusionMethod::OF => c.is_some() && e.is_some() && t.is_some(),
            })
            .collect(),
    };

    // evaluate everything first so that a failure prints no partial result
    let outcomes = methods
        .iter()
        .map(|&m| -> Result<FusionOutcome, CliError> {
            Ok(match m {
                FusionMethod::MV => majority_vote(&d),
                FusionMethod::CF => confidence_fusion(&d, need(c.as_deref(), m, "c")?, &scales)?,
                FusionMethod::EF => experience_fusion(&d, need(e.as_deref(), m, "e")?, &scales)?,
                FusionMethod::TF => time_fusion(&d, need(t.as_deref(), m, "t")?)?,
                FusionMethod::OF => overall_fusion(
                    &d,
                    need(c.as_deref(), m, "c")?,
                    need(e.as_deref(), m, "e")?,
                    need(t.as_deref(), m, "t")?,
                    &scales,
                )?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    for o in outcomes {
        println!("{} decision={} margin={}", o.method, o.decision.bit(), o.margin);
    }
    Ok(())
}

/// Folds command-line overrides into the config file; flags win.
fn apply_overrides(file: &mut ModelSpecFile, plan: &PlanArgs, scales: &ScaleArgs) {
    if plan.seed.is_some() {
        file.seed = plan.seed;
    }
    if plan.ks.is_some() {
        file.ks = plan.ks.clone();
    }
    if plan.n_groups.is_some() {
        file.n_groups = plan.n_groups;
    }
    if plan.methods.is_some() {
        file.methods = plan.methods.clone();
    }
    if scales.max_confidence.is_some() {
        file.max_confidence = scales.max_confidence;
    }
    if scales.max_experience.is_some() {
        file.max_experience = scales.max_experience;
    }
}

fn require_seed(file: &ModelSpecFile) -> Result<u64, CliError> {
    file.seed
        .ok_or_else(|| CliError::invalid("a seed is required: pass --seed or set `seed` in the config file"))
}

fn execution(plan: &PlanArgs) -> Execution {
    if plan.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// Runs `f` on a pool of `plan.threads` workers, or the global pool for 0.
fn in_pool<T: Send>(plan: &PlanArgs, f: impl FnOnce(Execution) -> T + Send) -> Result<T, CliError> {
    let exec = execution(plan);
    if plan.threads == 0 {
        return Ok(f(exec));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads)
        .build()
        .map_err(|e| CliError::invalid(format!("cannot start {} threads: {e}", plan.threads)))?;
    Ok(pool.install(|| f(exec)))
}

fn breakdowns(
    dataset: &Dataset,
    dims: &[BreakdownDimension],
    bins: &TimeBins,
) -> Result<Vec<CorrelationBreakdown>, CliError> {
    dims.iter()
        .map(|&d| breakdown(dataset, d, bins).map_err(CliError::from))
        .collect()
}

fn write_raw(records: &[RawRecord], path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    write_raw_csv(records, BufWriter::new(file)).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Everything a run writes, staged and committed in one go.
struct Outputs<'a> {
    dataset: Option<&'a Dataset>,
    raw: Option<&'a [RawRecord]>,
    report: &'a FusionReport,
    breakdowns: &'a [CorrelationBreakdown],
    config: Option<&'a ModelSpecFile>,
}

impl Outputs<'_> {
    fn write(&self, out: &Path) -> Result<Vec<PathBuf>, CliError> {
        let stage = Staging::new(out)?;
        let dir = stage.path();
        if let Some(ds) = self.dataset {
            write_csv(ds, dir.join("profiles.csv"), dir.join("trials.csv"))?;
        }
        if let Some(raw) = self.raw {
            write_raw(raw, &dir.join("raw.csv"))?;
        }
        emit_report(self.report, dir)?;
        for b in self.breakdowns {
            emit_breakdown(b, dir)?;
        }
        if let Some(cfg) = self.config {
            let text = toml::to_string(cfg).map_err(|e| CliError::invalid(e.to_string()))?;
            fs::write(dir.join("run.toml"), text)?;
        }
        stage.commit()
    }
}

fn summarize(seed: Option<u64>, written: &[PathBuf], out: &Path) {
    if let Some(seed) = seed {
        println!("seed: {seed}");
    }
    println!("wrote {} files to {}", written.len(), out.display());
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut file = match &a.spec {
        Some(p) => ModelSpecFile::load(p)?,
        None => ModelSpecFile::default(),
    };
    if a.n_examiners.is_some() {
        file.n_examiners = a.n_examiners;
    }
    apply_overrides(&mut file, &a.plan, &a.scales);
    let seed = require_seed(&file)?;
    let population = file.population_spec(seed)?;
    let plans = file.plans(seed)?;
    let methods = file.methods()?;
    let bins = TimeBins::new(a.plan.time_bins.clone())?;

    let (dataset, raw) = in_pool(&a.plan, |exec| -> Result<_, CliError> {
        let dataset = synthesize_population(&population, exec)?;
        let raw = run_plans(&dataset, &plans, &methods, exec)?;
        Ok((dataset, raw))
    })??;
    let report = build_report(&raw, Some(&dataset.trial_catalog()))?;
    let breakdowns = breakdowns(&dataset, &BreakdownDimension::ALL, &bins)?;

    let written = Outputs {
        dataset: Some(&dataset),
        raw: Some(&raw),
        report: &report,
        breakdowns: &breakdowns,
        config: Some(&file),
    }
    .write(&a.plan.out)?;
    summarize(Some(seed), &written, &a.plan.out);
    Ok(())
}

fn load_analyze_config(path: &Path) -> Result<ModelSpecFile, CliError> {
    let text = read_text(path)?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    if let Some(key) = table.keys().find(|k| !ANALYZE_KEYS.contains(&k.as_str())) {
        return Err(CliError::invalid(format!(
            "{}: key `{key}` is not used by analyze (allowed: {})",
            path.display(),
            ANALYZE_KEYS.join(", ")
        )));
    }
    Ok(ModelSpecFile::parse(&text)?)
}

pub fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let mut file = match &a.config {
        Some(p) => load_analyze_config(p)?,
        None => ModelSpecFile::default(),
    };
    apply_overrides(&mut file, &a.plan, &a.scales);
    let seed = require_seed(&file)?;
    let scales = file.scales()?;
    let plans = file.plans(seed)?;
    let methods = file.methods()?;
    let bins = TimeBins::new(a.plan.time_bins.clone())?;

    let dataset = ingest_csv(&a.profiles, &a.trials, scales)?;
    let raw = in_pool(&a.plan, |exec| run_plans(&dataset, &plans, &methods, exec))??;
    let report = build_report(&raw, Some(&dataset.trial_catalog()))?;
    let breakdowns = breakdowns(&dataset, &BreakdownDimension::ALL, &bins)?;

    let written = Outputs {
        dataset: None,
        raw: Some(&raw),
        report: &report,
        breakdowns: &breakdowns,
        config: Some(&file),
    }
    .write(&a.plan.out)?;
    summarize(Some(seed), &written, &a.plan.out);
    Ok(())
}

pub fn report(a: ReportArgs) -> Result<(), CliError> {
    let dims = a
        .dims
        .iter()
        .map(|d| d.parse::<BreakdownDimension>().map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let bins = TimeBins::new(a.time_bins.clone())?;
    let scales = FusionScales::new(
        a.scales.max_confidence.unwrap_or(5),
        a.scales.max_experience.unwrap_or(5),
    )?;
    let dataset = match (&a.profiles, &a.trials) {
        (Some(p), Some(t)) => Some(ingest_csv(p, t, scales)?),
        _ if !dims.is_empty() => {
            return Err(CliError::invalid("breakdowns need the dataset: pass --profiles and --trials"))
        }
        _ => None,
    };
    let raw_file = File::open(&a.raw)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", a.raw.display())))?;
    let raw = read_raw_csv(raw_file)?;
    let catalog = dataset.as_ref().map(Dataset::trial_catalog);
    let report = build_report(&raw, catalog.as_deref())?;
    let breakdowns = match &dataset {
        Some(ds) => breakdowns(ds, &dims, &bins)?,
        None => Vec::new(),
    };

    let written = Outputs {
        dataset: None,
        raw: None,
        report: &report,
        breakdowns: &breakdowns,
        config: None,
    }
    .write(&a.out)?;
    summarize(None, &written, &a.out);
    Ok(())
}
