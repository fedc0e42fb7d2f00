//! The computation subcommands: partition tables, correlation tables, the
//! species-form dump, and cache maintenance.

use std::path::Path;

use loggas_core::{
    correlation_canonical, correlation_grand, CoefficientCache, InsertionSet,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{fmt_f64, log_value, print_summary, Table};
use crate::{CacheAction, CacheArgs, Failure, RunArgs};

/// Loads the cache file when a path is given and the file exists; otherwise
/// starts empty.
pub fn load_cache(path: Option<&Path>) -> Result<CoefficientCache, Failure> {
    match path {
        Some(p) if p.exists() => Ok(CoefficientCache::load(p)?),
        _ => Ok(CoefficientCache::new()),
    }
}

/// Persists the cache when a path was given.
pub fn save_cache(cache: &CoefficientCache, path: Option<&Path>) -> Result<(), Failure> {
    if let Some(p) = path {
        cache.save(p)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PartitionRow {
    population: Vec<u32>,
    partition: f64,
    log_partition: Option<f64>,
    probability: f64,
}

#[derive(Serialize)]
struct PartitionSummary {
    command: &'static str,
    b: f64,
    charges: Vec<u32>,
    total_charge: u32,
    family: String,
    fugacities: Vec<f64>,
    grand_partition: f64,
    log_grand_partition: Option<f64>,
    rows: Vec<PartitionRow>,
}

/// One row per admissible population: the partition value, its natural log,
/// and the fugacity-weighted share of the grand total.
pub fn partition(args: &RunArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(&args.config)?;
    let spec = cfg.ensemble()?;
    let scheme = cfg.scheme();
    let z = cfg.fugacities()?;
    let cache = load_cache(args.cache.as_deref())?;
    let omegas = spec.build_omegas(&cache, &scheme)?;
    let grand = spec.partition_grand(&omegas)?;
    let total = grand.evaluate(&z)?;
    if total == 0.0 || !total.is_finite() {
        return Err(Failure::Config(format!(
            "grand partition function is {total} at fugacities {z:?}; population weights are undefined"
        )));
    }

    let mut columns: Vec<String> = (1..=spec.species_count()).map(|j| format!("M{j}")).collect();
    columns.extend(["Z", "log_Z", "probability"].map(str::to_string));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&column_refs);
    let mut rows = Vec::new();
    for m in spec.admissible_populations() {
        let value = grand.coefficient(&m);
        let weight: f64 = m
            .iter()
            .zip(&z)
            .map(|(&mj, &zj)| zj.powi(mj as i32))
            .product::<f64>()
            * value;
        let probability = weight / total;
        let mut fields: Vec<String> = m.iter().map(|mj| mj.to_string()).collect();
        fields.push(fmt_f64(value));
        fields.push(log_value(value).map(fmt_f64).unwrap_or_default());
        fields.push(fmt_f64(probability));
        table.row(fields);
        rows.push(PartitionRow {
            population: m,
            partition: value,
            log_partition: log_value(value),
            probability,
        });
    }
    table.write(args.out.as_deref())?;
    save_cache(&cache, args.cache.as_deref())?;
    print_summary(
        &PartitionSummary {
            command: "partition",
            b: spec.b(),
            charges: spec.charges().to_vec(),
            total_charge: spec.total_charge(),
            family: cfg.family.clone(),
            fugacities: z,
            grand_partition: total,
            log_grand_partition: log_value(total),
            rows,
        },
        args.out.is_none(),
    );
    Ok(())
}

#[derive(Serialize)]
struct CorrelateRow {
    points: Vec<f64>,
    value: f64,
}

#[derive(Serialize)]
struct CorrelateSummary {
    command: &'static str,
    mode: &'static str,
    pattern: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    populations: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fugacities: Option<Vec<f64>>,
    rows: Vec<CorrelateRow>,
}

/// One row per insertion tuple: the pattern, the coordinates, and the
/// correlation value, at a fixed population or mixed by the fugacities.
pub fn correlate(args: &RunArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(&args.config)?;
    let cc = cfg
        .correlate
        .as_ref()
        .ok_or_else(|| Failure::Config("config has no [correlate] section".into()))?;
    let spec = cfg.ensemble()?;
    let tuples = cc.tuples(spec.species_count())?;
    let scheme = cfg.scheme();
    let cache = load_cache(args.cache.as_deref())?;
    let omegas = spec.build_omegas(&cache, &scheme)?;
    let total: u32 = cc.pattern.iter().sum();

    let mut columns: Vec<String> = (1..=spec.species_count()).map(|j| format!("m{j}")).collect();
    columns.extend((1..=total).map(|i| format!("x{i}")));
    columns.push("R".to_string());
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&column_refs);

    let fugacities = cfg.fugacities()?;
    let mut rows = Vec::new();
    for tuple in &tuples {
        let insertions = InsertionSet::new(cc.split(tuple))?;
        let value = match &cc.populations {
            Some(m) => correlation_canonical(&spec, &omegas, &insertions, m)?,
            None => correlation_grand(&spec, &omegas, &insertions, &fugacities)?,
        };
        let mut fields: Vec<String> = cc.pattern.iter().map(|m| m.to_string()).collect();
        fields.extend(tuple.iter().map(|&x| fmt_f64(x)));
        fields.push(fmt_f64(value));
        table.row(fields);
        rows.push(CorrelateRow {
            points: tuple.clone(),
            value,
        });
    }
    table.write(args.out.as_deref())?;
    save_cache(&cache, args.cache.as_deref())?;
    let canonical = cc.populations.is_some();
    print_summary(
        &CorrelateSummary {
            command: "correlate",
            mode: if canonical { "canonical" } else { "grand" },
            pattern: cc.pattern.clone(),
            populations: cc.populations.clone(),
            fugacities: (!canonical).then_some(fugacities),
            rows,
        },
        args.out.is_none(),
    );
    Ok(())
}

#[derive(Serialize)]
struct OmegaSpecies {
    species: usize,
    charge: u32,
    ell: u32,
    parity: &'static str,
    term_count: usize,
}

#[derive(Serialize)]
struct OmegaSummary {
    command: &'static str,
    k: u32,
    species: Vec<OmegaSpecies>,
}

/// Every coefficient of every species form, labeled by the increasing index
/// tuple of its basis word.
pub fn omega_dump(args: &RunArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(&args.config)?;
    let spec = cfg.ensemble()?;
    let scheme = cfg.scheme();
    let cache = load_cache(args.cache.as_deref())?;
    let omegas = spec.build_omegas(&cache, &scheme)?;

    let mut table = Table::new(&["species", "charge", "ell", "indices", "coefficient"]);
    let mut species = Vec::new();
    for (j, om) in omegas.iter().enumerate() {
        for (word, coeff) in om.form().terms() {
            let indices = word
                .generators()
                .iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>()
                .join(",");
            table.row([
                (j + 1).to_string(),
                spec.charges()[j].to_string(),
                om.ell().to_string(),
                format!("({indices})"),
                fmt_f64(*coeff),
            ]);
        }
        species.push(OmegaSpecies {
            species: j + 1,
            charge: spec.charges()[j],
            ell: om.ell(),
            parity: if om.is_even() { "even" } else { "odd" },
            term_count: om.form().term_count(),
        });
    }
    table.write(args.out.as_deref())?;
    save_cache(&cache, args.cache.as_deref())?;
    print_summary(
        &OmegaSummary {
            command: "omega-dump",
            k: spec.k_dim(),
            species,
        },
        args.out.is_none(),
    );
    Ok(())
}

#[derive(Serialize)]
struct CacheInspectSummary {
    command: &'static str,
    path: String,
    entries: usize,
}

#[derive(Serialize)]
struct CacheClearSummary {
    command: &'static str,
    path: String,
    removed: Option<usize>,
}

/// Cache maintenance: list entries sorted by key, or rewrite the file empty.
pub fn cache(args: &CacheArgs) -> Result<(), Failure> {
    match &args.action {
        CacheAction::Inspect { cache, out } => {
            if !cache.exists() {
                return Err(Failure::Config(format!(
                    "cache file {} does not exist",
                    cache.display()
                )));
            }
            let store = CoefficientCache::load(cache)?;
            let mut table = Table::new(&["key", "value", "error"]);
            for key in store.sorted_keys() {
                let (value, error) = store.get(&key).expect("key listed but missing");
                table.row([key, fmt_f64(value), fmt_f64(error)]);
            }
            table.write(out.as_deref())?;
            print_summary(
                &CacheInspectSummary {
                    command: "cache-inspect",
                    path: cache.display().to_string(),
                    entries: store.len(),
                },
                out.is_none(),
            );
            Ok(())
        }
        CacheAction::Clear { cache } => {
            let removed = if cache.exists() {
                CoefficientCache::load(cache).ok().map(|c| c.len())
            } else {
                Some(0)
            };
            CoefficientCache::new().save(cache)?;
            print_summary(
                &CacheClearSummary {
                    command: "cache-clear",
                    path: cache.display().to_string(),
                    removed,
                },
                false,
            );
            Ok(())
        }
    }
}
