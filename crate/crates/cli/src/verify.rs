//! The verification suite: the generating-function engine against the
//! direct-integration oracle, the internal pairing and wedge cross-routes,
//! invariance under changing the polynomial family, probability
//! normalization, and (when a cache file is supplied) exact agreement
//! between cached and freshly computed coefficients.
//!
//! The report has one row per check with the engine value, the reference
//! value, the tolerance, and PASS/FAIL/SKIP; the process exits nonzero when
//! any row fails.

use std::path::Path;

use loggas_core::{
    correlation_grand, correlation_grand_wedge, direct_correlation, direct_partition,
    CoefficientCache, EnsembleSpec, Error, InsertionSet, OracleConfig, OracleMethod,
    QuadratureScheme,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{fmt_f64, print_summary, Table};
use crate::{Failure, RunArgs};

/// Agreement demanded between the engine and the quadrature oracle,
/// relative to the oracle value (the oracle's own error bound widens this
/// when it is larger).
const ORACLE_REL_TOL: f64 = 1e-4;
/// Two routes through the same cached one-dimensional integrals must agree
/// to summation rounding.
const SHARED_DATA_TOL: f64 = 1e-12;
/// Changing the complete polynomial family changes every intermediate
/// quantity but not the result; quadrature error enters twice.
const FAMILY_REL_TOL: f64 = 1e-8;
/// Probabilities of the admissible populations are exact ratios of computed
/// quantities, so their sum is 1 up to bare rounding.
const NORMALIZATION_TOL: f64 = 1e-10;
/// Pointwise correlation values against the pinned-coordinate oracle.
const CORRELATION_REL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

struct Check {
    name: String,
    engine: Option<f64>,
    reference: Option<f64>,
    /// Oracle standard error; reported in Monte Carlo mode.
    stderr: Option<f64>,
    tolerance: Option<f64>,
    status: Status,
    note: String,
}

impl Check {
    fn compare(
        name: String,
        engine: f64,
        reference: f64,
        tolerance: f64,
        stderr: Option<f64>,
    ) -> Self {
        let ok = (engine - reference).abs() <= tolerance;
        Check {
            name,
            engine: Some(engine),
            reference: Some(reference),
            stderr,
            tolerance: Some(tolerance),
            status: if ok { Status::Pass } else { Status::Fail },
            note: String::new(),
        }
    }

    fn skip(name: String, note: String) -> Self {
        Check {
            name,
            engine: None,
            reference: None,
            stderr: None,
            tolerance: None,
            status: Status::Skip,
            note,
        }
    }
}

fn pop_label(m: &[u32]) -> String {
    m.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Everything the engine computes for one cache state, with stable labels
/// so a cached run can be replayed against a fresh one value by value.
struct EnginePass {
    labeled: Vec<(String, f64)>,
    coefficients: Vec<(Vec<u32>, f64)>,
    total: f64,
    pairing: Vec<(Vec<u32>, Option<f64>, String)>,
    alt_total: Option<f64>,
    prob_sum: f64,
    correlation: Option<(f64, f64)>,
}

fn engine_pass(
    cfg: &RunConfig,
    spec: &EnsembleSpec,
    scheme: &QuadratureScheme,
    z: &[f64],
    insert_species: usize,
    cache: &CoefficientCache,
) -> Result<EnginePass, Failure> {
    let omegas = spec.build_omegas(cache, scheme)?;
    let grand = spec.partition_grand(&omegas)?;
    let total = grand.evaluate(z)?;

    let mut labeled = Vec::new();
    let mut coefficients = Vec::new();
    for m in spec.admissible_populations() {
        let v = grand.coefficient(&m);
        labeled.push((format!("Z[{}]", pop_label(&m)), v));
        coefficients.push((m, v));
    }
    labeled.push(("Z(z)".to_string(), total));

    let mut pairing = Vec::new();
    for (m, _) in &coefficients {
        match spec.partition_canonical_laplace(&omegas, m) {
            Ok(v) => {
                labeled.push((format!("pairing[{}]", pop_label(m)), v));
                pairing.push((m.clone(), Some(v), String::new()));
            }
            Err(Error::Unsupported(msg)) | Err(Error::CapExceeded(msg)) => {
                pairing.push((m.clone(), None, msg));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let alt_total = match cfg.alternate_family() {
        Some(family) => {
            let alt = EnsembleSpec::new(
                spec.b(),
                spec.charges().to_vec(),
                spec.total_charge(),
                family,
                spec.potential().clone(),
            )?;
            let alt_omegas = alt.build_omegas(cache, scheme)?;
            let v = alt.grand_partition_at(&alt_omegas, z)?;
            labeled.push(("Z(z) alternate family".to_string(), v));
            Some(v)
        }
        None => None,
    };

    let probs = spec.population_probabilities(&omegas, z)?;
    let prob_sum: f64 = probs.iter().map(|(_, p)| p).sum();
    labeled.push(("probability sum".to_string(), prob_sum));

    let correlation = if (0..spec.species_count()).all(|j| spec.ell(j) % 2 == 0) {
        let mut lists = vec![Vec::new(); spec.species_count()];
        lists[insert_species] = vec![0.0];
        let insertions = InsertionSet::new(lists)?;
        let extraction = correlation_grand(spec, &omegas, &insertions, z)?;
        let wedge = correlation_grand_wedge(spec, &omegas, &insertions, z)?;
        labeled.push(("R(0)".to_string(), extraction));
        labeled.push(("R(0) wedge".to_string(), wedge));
        Some((extraction, wedge))
    } else {
        None
    };

    Ok(EnginePass {
        labeled,
        coefficients,
        total,
        pairing,
        alt_total,
        prob_sum,
        correlation,
    })
}

/// Fugacity-weighted mixture of pinned-coordinate oracle correlations over
/// the admissible populations; equals the grand correlation by definition.
fn correlation_oracle_check(
    spec: &EnsembleSpec,
    z: &[f64],
    oracle: &OracleConfig,
    scheme: &QuadratureScheme,
    insert_species: usize,
    engine: f64,
    mc: bool,
) -> Result<Check, Failure> {
    let name = "correlation-oracle".to_string();
    let mut lists = vec![Vec::new(); spec.species_count()];
    lists[insert_species] = vec![0.0];
    let insertions = InsertionSet::new(lists)?;

    let mut num = 0.0;
    let mut den = 0.0;
    let mut num_err = 0.0;
    let mut den_err = 0.0;
    for m in spec.admissible_populations() {
        let zm: f64 = m
            .iter()
            .zip(z)
            .map(|(&mj, &zj)| zj.powi(mj as i32))
            .product();
        let zpart = match direct_partition(spec, &m, oracle, scheme) {
            Ok(est) => est,
            Err(Error::CapExceeded(msg)) | Err(Error::Unsupported(msg)) => {
                return Ok(Check::skip(name, msg))
            }
            Err(e) => return Err(e.into()),
        };
        den += zm * zpart.value;
        den_err += zm.abs() * zpart.error;
        if m[insert_species] >= 1 {
            let r = match direct_correlation(spec, &insertions, &m, oracle, scheme) {
                Ok(est) => est,
                Err(Error::CapExceeded(msg)) | Err(Error::Unsupported(msg)) => {
                    return Ok(Check::skip(name, msg))
                }
                Err(e) => return Err(e.into()),
            };
            num += zm * zpart.value * r.value;
            num_err += zm.abs() * (zpart.error * r.value.abs() + zpart.value.abs() * r.error);
        }
    }
    if den == 0.0 || !den.is_finite() {
        return Ok(Check::skip(
            name,
            format!("oracle grand partition is {den} at these fugacities"),
        ));
    }
    let value = num / den;
    let propagated = num_err / den.abs() + value.abs() * den_err / den.abs();
    let floor = CORRELATION_REL_TOL * value.abs().max(1.0);
    let (tolerance, stderr) = if mc {
        ((4.0 * propagated).max(floor), Some(propagated))
    } else {
        (propagated.max(floor), None)
    };
    Ok(Check::compare(name, engine, value, tolerance, stderr))
}

/// Replays the engine on the stored cache and demands bit-identical results,
/// then names every cache entry that disagrees with its recomputation.
fn cache_consistency(
    cfg: &RunConfig,
    spec: &EnsembleSpec,
    scheme: &QuadratureScheme,
    z: &[f64],
    insert_species: usize,
    cold: &EnginePass,
    cold_cache: &CoefficientCache,
    path: &Path,
) -> Result<Vec<Check>, Failure> {
    if !path.exists() {
        return Ok(vec![Check::skip(
            "cache-consistency".to_string(),
            format!("cache file {} does not exist", path.display()),
        )]);
    }
    let warm_cache = match CoefficientCache::load(path) {
        Ok(c) => c,
        Err(e) => {
            return Ok(vec![Check {
                name: "cache-consistency".to_string(),
                engine: None,
                reference: None,
                stderr: None,
                tolerance: None,
                status: Status::Fail,
                note: e.to_string(),
            }])
        }
    };
    let warm = engine_pass(cfg, spec, scheme, z, insert_species, &warm_cache)?;

    let mut checks = Vec::new();
    let mut mismatches = 0usize;
    for ((label, cold_v), (_, warm_v)) in cold.labeled.iter().zip(&warm.labeled) {
        if cold_v.to_bits() != warm_v.to_bits() {
            mismatches += 1;
            checks.push(Check {
                name: format!("cache-replay[{label}]"),
                engine: Some(*warm_v),
                reference: Some(*cold_v),
                stderr: None,
                tolerance: Some(0.0),
                status: Status::Fail,
                note: "cached run differs from fresh run".to_string(),
            });
        }
    }
    let mut compared = 0usize;
    for key in warm_cache.sorted_keys() {
        if let (Some((wv, we)), Some((cv, ce))) = (warm_cache.get(&key), cold_cache.get(&key)) {
            compared += 1;
            if wv.to_bits() != cv.to_bits() || we.to_bits() != ce.to_bits() {
                mismatches += 1;
                checks.push(Check {
                    name: format!("cache-entry[{key}]"),
                    engine: Some(wv),
                    reference: Some(cv),
                    stderr: None,
                    tolerance: Some(0.0),
                    status: Status::Fail,
                    note: "stored coefficient differs from recomputation".to_string(),
                });
            }
        }
    }
    checks.push(Check {
        name: "cache-consistency".to_string(),
        engine: None,
        reference: None,
        stderr: None,
        tolerance: None,
        status: if mismatches == 0 {
            Status::Pass
        } else {
            Status::Fail
        },
        note: format!(
            "{} engine values replayed, {compared} cache entries compared",
            cold.labeled.len()
        ),
    });
    Ok(checks)
}

#[derive(Serialize)]
struct VerifySummary {
    command: &'static str,
    method: &'static str,
    paranoid: bool,
    seed: u64,
    passed: usize,
    failed: usize,
    skipped: usize,
    overall: &'static str,
    failures: Vec<String>,
}

pub fn run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(&args.config)?;
    let spec = cfg.ensemble()?;
    let scheme = cfg.scheme();
    let z = cfg.fugacities()?;
    let oracle = cfg.oracle_config(args.mc, args.paranoid, args.seed);
    let mc = matches!(oracle.method, OracleMethod::MonteCarlo);

    // Insert at a species that actually occurs in some admissible
    // population, so the correlation checks exercise a nonzero value.
    let admissible = spec.admissible_populations();
    let insert_species = (0..spec.species_count())
        .find(|&j| admissible.iter().any(|m| m[j] >= 1))
        .unwrap_or(0);

    let cold_cache = CoefficientCache::new();
    let cold = engine_pass(&cfg, &spec, &scheme, &z, insert_species, &cold_cache)?;

    let mut checks: Vec<Check> = Vec::new();

    for (m, engine) in &cold.coefficients {
        let name = format!("partition[{}] vs oracle", pop_label(m));
        match direct_partition(&spec, m, &oracle, &scheme) {
            Ok(est) => {
                let (tolerance, stderr) = if mc {
                    (4.0 * est.error, Some(est.error))
                } else {
                    ((ORACLE_REL_TOL * est.value.abs()).max(est.error), None)
                };
                checks.push(Check::compare(name, *engine, est.value, tolerance, stderr));
            }
            Err(Error::CapExceeded(msg)) | Err(Error::Unsupported(msg)) => {
                checks.push(Check::skip(name, msg));
            }
            Err(e) => return Err(e.into()),
        }
    }

    for ((m, engine), (_, value, note)) in cold.coefficients.iter().zip(&cold.pairing) {
        let name = format!("pairing[{}] vs coefficient", pop_label(m));
        match value {
            Some(v) => checks.push(Check::compare(
                name,
                *v,
                *engine,
                SHARED_DATA_TOL * engine.abs().max(1.0),
                None,
            )),
            None => checks.push(Check::skip(name, note.clone())),
        }
    }

    if let Some(alt) = cold.alt_total {
        checks.push(Check::compare(
            "family-invariance".to_string(),
            alt,
            cold.total,
            FAMILY_REL_TOL * cold.total.abs().max(1.0),
            None,
        ));
    }

    checks.push(Check::compare(
        "population-normalization".to_string(),
        cold.prob_sum,
        1.0,
        NORMALIZATION_TOL,
        None,
    ));

    match &cold.correlation {
        Some((extraction, wedge)) => {
            checks.push(Check::compare(
                "correlation-wedge".to_string(),
                *wedge,
                *extraction,
                SHARED_DATA_TOL * extraction.abs().max(1.0),
                None,
            ));
            checks.push(correlation_oracle_check(
                &spec,
                &z,
                &oracle,
                &scheme,
                insert_species,
                *extraction,
                mc,
            )?);
        }
        None => {
            let note = "correlations require every species block length to be even".to_string();
            checks.push(Check::skip("correlation-wedge".to_string(), note.clone()));
            checks.push(Check::skip("correlation-oracle".to_string(), note));
        }
    }

    if let Some(path) = &args.cache {
        checks.extend(cache_consistency(
            &cfg,
            &spec,
            &scheme,
            &z,
            insert_species,
            &cold,
            &cold_cache,
            path,
        )?);
    }

    let mut columns = vec!["check", "engine", "reference"];
    if mc {
        columns.extend(["stderr", "band4"]);
    }
    columns.extend(["tolerance", "status", "note"]);
    let mut table = Table::new(&columns);
    for c in &checks {
        let mut fields = vec![
            c.name.clone(),
            c.engine.map(fmt_f64).unwrap_or_default(),
            c.reference.map(fmt_f64).unwrap_or_default(),
        ];
        if mc {
            fields.push(c.stderr.map(fmt_f64).unwrap_or_default());
            fields.push(c.stderr.map(|s| fmt_f64(4.0 * s)).unwrap_or_default());
        }
        fields.push(c.tolerance.map(fmt_f64).unwrap_or_default());
        fields.push(c.status.as_str().to_string());
        fields.push(c.note.clone());
        table.row(fields);
    }
    table.write(args.out.as_deref())?;

    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let skipped = checks.iter().filter(|c| c.status == Status::Skip).count();
    let failures: Vec<String> = checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| c.name.clone())
        .collect();
    print_summary(
        &VerifySummary {
            command: "verify",
            method: if mc { "monte-carlo" } else { "quadrature" },
            paranoid: oracle.paranoid,
            seed: oracle.seed,
            passed,
            failed,
            skipped,
            overall: if failed == 0 { "PASS" } else { "FAIL" },
            failures,
        },
        args.out.is_none(),
    );

    if failed > 0 {
        return Err(Failure::Verification(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    Ok(())
}
