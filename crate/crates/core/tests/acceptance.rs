//! The acceptance gate: ten end-to-end criteria, each printing one
//! PASS/FAIL line. Tolerances are pinned as named constants next to the
//! justification for their size; runtime budgets are asserted where the
//! criterion carries one.

use std::time::{Duration, Instant};

use loggas_core::exterior::{hyperpfaffian, sgn_map_tuple};
use loggas_core::poly::{confluent_vandermonde, vandermonde_product};
use loggas_core::{
    correlation_grand, correlation_grand_wedge, direct_correlation, direct_partition,
    AntisymmetricMatrix, BasisWord, CoefficientCache, CompleteFamily, EnsembleSpec, Form,
    IncreasingMap, InsertionSet, OddConvention, OracleConfig, OracleMethod, Potential,
    QuadratureScheme,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const PI: f64 = std::f64::consts::PI;

// ───────────────────────── pinned tolerances ─────────────────────────

/// Two-particle partition value against the closed form 2√π. The engine
/// value is a single 1-D integral pair; 1e-6 is far above its quadrature
/// tolerance and far below any plausible sign or factor error.
const TWO_PARTICLE_TOL: f64 = 1e-6;
/// Charge-2 partition value against the exact Gaussian-moment reference
/// 3π/16.
const CHARGE2_REF_TOL: f64 = 1e-8;
/// Two parameterizations of the byte-for-byte identical integrand must
/// agree to summation rounding.
const SAME_INTEGRAND_TOL: f64 = 1e-12;
/// Engine vs multi-dimensional oracle quadrature, relative; widened by the
/// oracle's own error estimate when that is larger.
const ORACLE_REL_TOL: f64 = 1e-4;
/// Swapping the complete polynomial family changes every intermediate term
/// but not the result; quadrature error enters each family once.
const FAMILY_REL_TOL: f64 = 1e-8;
/// Two algebraic routes through the same cached 1-D integrals.
const ROUTE_TOL: f64 = 1e-12;
/// exp(w) ∧ exp(-w) = 1: pure ring arithmetic, rounding only.
const EXP_INVERSE_TOL: f64 = 1e-12;
/// Pfaffian squared vs determinant on random 8×8 antisymmetric matrices.
const PF_DET_TOL: f64 = 1e-9;
/// Top-grade coefficient of exp of a 2-form vs the recursive Pfaffian on
/// random 6×6 matrices.
const HYPERPF_TOL: f64 = 1e-10;
/// Confluent Vandermonde determinant vs the interaction product, relative.
const VANDERMONDE_REL_TOL: f64 = 1e-9;
/// Trapezoid integral of the one-point density against the exact count;
/// the grid is fine enough that truncation, not the rule, dominates.
const DENSITY_NORM_TOL: f64 = 1e-4;
/// Pointwise density against the pinned-coordinate oracle.
const DENSITY_POINT_TOL: f64 = 1e-6;
/// Sum of population probabilities against one.
const PROBABILITY_TOL: f64 = 1e-10;

// ───────────────────────── reporting helper ─────────────────────────

struct Criterion {
    number: u32,
    name: &'static str,
    start: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn new(number: u32, name: &'static str) -> Self {
        Criterion {
            number,
            name,
            start: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn check_close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        if !((got - want).abs() <= tol) {
            self.failures.push(format!(
                "{what}: got {got}, want {want} (diff {}, tol {tol})",
                (got - want).abs()
            ));
        }
    }

    /// Prints the one-line verdict and fails the test on any recorded
    /// failure or a blown runtime budget.
    fn finish(mut self, budget: Option<Duration>) {
        let elapsed = self.start.elapsed();
        if let Some(limit) = budget {
            if elapsed > limit {
                self.failures.push(format!(
                    "runtime {:.1} s exceeds the {:.0} s budget",
                    elapsed.as_secs_f64(),
                    limit.as_secs_f64()
                ));
            }
        }
        let verdict = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {:02} {} ... {verdict} ({:.2} s)",
            self.number,
            self.name,
            elapsed.as_secs_f64()
        );
        assert!(
            self.failures.is_empty(),
            "criterion {:02} {}:\n  {}",
            self.number,
            self.name,
            self.failures.join("\n  ")
        );
    }
}

// ───────────────────────── shared fixtures ─────────────────────────

fn gaussian_unit() -> Potential {
    Potential::gaussian(1.0).unwrap()
}

fn two_particle_spec(family: CompleteFamily) -> EnsembleSpec {
    EnsembleSpec::new(1.0, vec![1], 2, family, gaussian_unit()).unwrap()
}

/// Charge-2 spec whose one-body weight is e^{-2x²}.
fn charge2_spec(family: CompleteFamily) -> EnsembleSpec {
    let sigma = 0.5f64.sqrt();
    EnsembleSpec::new(1.0, vec![2], 4, family, Potential::gaussian(sigma).unwrap()).unwrap()
}

/// The same weight e^{-2x²} reached through b = 2 instead of charge 2.
fn beta4_spec(family: CompleteFamily) -> EnsembleSpec {
    EnsembleSpec::new(2.0, vec![1], 2, family, gaussian_unit()).unwrap()
}

fn two_species_spec(family: CompleteFamily) -> EnsembleSpec {
    EnsembleSpec::new(1.0, vec![1, 2], 4, family, gaussian_unit()).unwrap()
}

fn coefficients(spec: &EnsembleSpec) -> Vec<(Vec<u32>, f64)> {
    let cache = CoefficientCache::new();
    let scheme = QuadratureScheme::default();
    let omegas = spec.build_omegas(&cache, &scheme).unwrap();
    let grand = spec.partition_grand(&omegas).unwrap();
    spec.admissible_populations()
        .into_iter()
        .map(|m| {
            let z = grand.coefficient(&m);
            (m, z)
        })
        .collect()
}

// ───────────────────────── criteria ─────────────────────────

#[test]
fn criterion_01_two_particle_identity() {
    let mut c = Criterion::new(1, "two-particle identity");
    let spec = two_particle_spec(CompleteFamily::monomial());
    let cache = CoefficientCache::new();
    let scheme = QuadratureScheme::default();
    let omegas = spec.build_omegas(&cache, &scheme).unwrap();
    let grand = spec.partition_grand(&omegas).unwrap();
    let engine = grand.coefficient(&[2]);
    let reference = 2.0 * PI.sqrt();
    c.check_close("coefficient of z^2", engine, reference, TWO_PARTICLE_TOL);

    let oracle = direct_partition(&spec, &[2], &OracleConfig::default(), &scheme).unwrap();
    // The reported bound measures quadrature truncation only; the final
    // values of both routes carry a few ulps of accumulated rounding on
    // top, so the comparison gets a machine-epsilon floor.
    let rounding_floor = 4.0 * f64::EPSILON * oracle.value.abs();
    c.check_close(
        "engine vs 2-D sector quadrature",
        engine,
        oracle.value,
        oracle.error + rounding_floor,
    );
    c.finish(Some(Duration::from_secs(1)));
}

#[test]
fn criterion_02_charge2_identity() {
    let mut c = Criterion::new(2, "charge-2 identity, two parameterizations");
    let a = coefficients(&charge2_spec(CompleteFamily::monomial()));
    let b = coefficients(&beta4_spec(CompleteFamily::monomial()));
    assert_eq!(a.len(), 1);
    assert_eq!(b.len(), 1);
    let za = a[0].1;
    let zb = b[0].1;
    c.check_close("charge-2 value vs 3π/16", za, 3.0 * PI / 16.0, CHARGE2_REF_TOL);
    c.check_close("b=2 value vs 3π/16", zb, 3.0 * PI / 16.0, CHARGE2_REF_TOL);
    c.check_close("identical integrand", za, zb, SAME_INTEGRAND_TOL);
    c.finish(Some(Duration::from_secs(5)));
}

#[test]
fn criterion_03_two_species_generating_function() {
    let mut c = Criterion::new(3, "two-species generating function vs oracle");
    let spec = two_species_spec(CompleteFamily::monomial());
    let cache = CoefficientCache::new();
    let scheme = QuadratureScheme::default();
    let omegas = spec.build_omegas(&cache, &scheme).unwrap();
    let grand = spec.partition_grand(&omegas).unwrap();

    let mut degrees = grand.multidegrees(2);
    degrees.sort();
    c.check(
        "multidegrees are exactly {(0,2),(2,1),(4,0)}",
        degrees == vec![vec![0, 2], vec![2, 1], vec![4, 0]],
    );

    // Quadrature oracle, budget 5 minutes.
    let quad_start = Instant::now();
    let quad_cfg = OracleConfig::default();
    for m in [[4u32, 0], [2, 1], [0, 2]] {
        let engine = grand.coefficient(&m);
        let oracle = direct_partition(&spec, &m, &quad_cfg, &scheme).unwrap();
        let tol = (ORACLE_REL_TOL * oracle.value.abs()).max(oracle.error);
        c.check_close(
            &format!("Z[{},{}] vs quadrature oracle", m[0], m[1]),
            engine,
            oracle.value,
            tol,
        );
    }
    c.check(
        "quadrature oracle within 5 minutes",
        quad_start.elapsed() < Duration::from_secs(300),
    );

    // Monte Carlo oracle at 4 standard errors, budget 1 minute.
    let mc_start = Instant::now();
    let mc_cfg = OracleConfig {
        method: OracleMethod::MonteCarlo,
        mc_samples: 400_000,
        seed: 1,
        paranoid: false,
    };
    for m in [[4u32, 0], [2, 1], [0, 2]] {
        let engine = grand.coefficient(&m);
        let oracle = direct_partition(&spec, &m, &mc_cfg, &scheme).unwrap();
        c.check_close(
            &format!("Z[{},{}] vs Monte Carlo oracle (4σ)", m[0], m[1]),
            engine,
            oracle.value,
            4.0 * oracle.error,
        );
    }
    c.check(
        "Monte Carlo oracle within 1 minute",
        mc_start.elapsed() < Duration::from_secs(60),
    );
    c.finish(None);
}

#[test]
fn criterion_04_family_invariance() {
    let mut c = Criterion::new(4, "family invariance");
    let pairs: [(Vec<(Vec<u32>, f64)>, Vec<(Vec<u32>, f64)>); 4] = [
        (
            coefficients(&two_particle_spec(CompleteFamily::monomial())),
            coefficients(&two_particle_spec(CompleteFamily::hermite_monic())),
        ),
        (
            coefficients(&charge2_spec(CompleteFamily::monomial())),
            coefficients(&charge2_spec(CompleteFamily::hermite_monic())),
        ),
        (
            coefficients(&beta4_spec(CompleteFamily::monomial())),
            coefficients(&beta4_spec(CompleteFamily::hermite_monic())),
        ),
        (
            coefficients(&two_species_spec(CompleteFamily::monomial())),
            coefficients(&two_species_spec(CompleteFamily::hermite_monic())),
        ),
    ];
    for (monomial, hermite) in &pairs {
        for ((m, zm), (mh, zh)) in monomial.iter().zip(hermite) {
            assert_eq!(m, mh);
            c.check_close(
                &format!("Z[{m:?}] monomial vs hermite-monic"),
                *zh,
                *zm,
                FAMILY_REL_TOL * zm.abs(),
            );
        }
    }
    c.finish(None);
}

#[test]
fn criterion_05_route_equivalence() {
    let mut c = Criterion::new(5, "pairing expansion vs generating function");
    let specs = [
        two_particle_spec(CompleteFamily::monomial()),
        charge2_spec(CompleteFamily::monomial()),
        beta4_spec(CompleteFamily::monomial()),
        two_species_spec(CompleteFamily::monomial()),
    ];
    let cache = CoefficientCache::new();
    let scheme = QuadratureScheme::default();
    for spec in &specs {
        let omegas = spec.build_omegas(&cache, &scheme).unwrap();
        let grand = spec.partition_grand(&omegas).unwrap();
        for m in spec.admissible_populations() {
            match spec.partition_canonical_laplace(&omegas, &m) {
                Ok(pairing) => {
                    let engine = grand.coefficient(&m);
                    c.check_close(
                        &format!("pairing vs coefficient at {m:?}"),
                        pairing,
                        engine,
                        ROUTE_TOL * engine.abs().max(1.0),
                    );
                }
                Err(loggas_core::Error::Unsupported(_)) => {
                    // The pairing route is defined for at most two
                    // particles of the odd-block species; the boundary
                    // itself is part of the contract.
                    let odd_count: u32 = m
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| spec.ell(*j) % 2 == 1)
                        .map(|(_, &mj)| mj)
                        .sum();
                    c.check(
                        &format!("unsupported only beyond two odd-block particles at {m:?}"),
                        odd_count > 2,
                    );
                }
                Err(e) => c.check(&format!("pairing at {m:?}: {e}"), false),
            }
        }
    }
    c.finish(None);
}

#[test]
fn criterion_06_exterior_algebra_suite() {
    let mut c = Criterion::new(6, "exterior algebra suite");
    let mut rng = StdRng::seed_from_u64(0x9e3779b9);

    // Graded anticommutativity and associativity with exact small-integer
    // coefficients.
    for _ in 0..60 {
        let k = rng.gen_range(2..=8u32);
        let p = rng.gen_range(1..=k.saturating_sub(1)).min(3);
        let q = rng.gen_range(1..=(k - p).max(1)).min(3);
        let a = random_homogeneous(&mut rng, k, p);
        let b = random_homogeneous(&mut rng, k, q);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let signed = if (p * q) % 2 == 0 { ba.clone() } else { ba.neg() };
        c.check(
            "graded anticommutativity",
            forms_equal(&ab, &signed, 0.0),
        );

        let r = rng.gen_range(1..=2u32).min(k);
        let g = random_homogeneous(&mut rng, k, r);
        let left = ab.wedge(&g).unwrap();
        let right = a.wedge(&b.wedge(&g).unwrap()).unwrap();
        c.check("associativity", forms_equal(&left, &right, 0.0));
    }

    // Signature identity: the wedge of disjoint increasing tuples is the
    // interleaving sign times the volume word, for 200 random partitions.
    for _ in 0..200 {
        let k = rng.gen_range(2..=8u32);
        let mut values: Vec<u32> = (1..=k).collect();
        shuffle(&mut rng, &mut values);
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut rest = values.as_slice();
        while !rest.is_empty() {
            let take = rng.gen_range(1..=rest.len());
            let mut block = rest[..take].to_vec();
            block.sort_unstable();
            blocks.push(block);
            rest = &rest[take..];
        }
        let maps: Vec<IncreasingMap> = blocks
            .iter()
            .map(|b| IncreasingMap::new(b.clone()).unwrap())
            .collect();
        let refs: Vec<&IncreasingMap> = maps.iter().collect();
        let sign = sgn_map_tuple(&refs, k).unwrap();

        let concatenated: Vec<u32> = blocks.concat();
        let expected = inversion_sign(&concatenated);
        c.check("interleaving sign vs inversion count", sign == expected);

        let mut wedge = Form::constant(k, 1.0).unwrap();
        for m in &maps {
            let mut factor = Form::zero(k).unwrap();
            factor.add_term(BasisWord::from_map(m), 1.0).unwrap();
            wedge = wedge.wedge(&factor).unwrap();
        }
        let vol = wedge.coefficient(BasisWord::volume(k));
        c.check("interleaving sign vs wedge product", vol == expected as f64);
    }
    // Overlapping tuples annihilate.
    {
        let t = IncreasingMap::new(vec![1, 3]).unwrap();
        let u = IncreasingMap::new(vec![2, 3]).unwrap();
        c.check(
            "overlapping tuples give sign 0",
            sgn_map_tuple(&[&t, &u], 4).unwrap() == 0,
        );
    }

    // exp(w) ∧ exp(-w) = 1 for random mixed-grade forms.
    for _ in 0..40 {
        let k = rng.gen_range(2..=6u32);
        let w = random_mixed(&mut rng, k);
        let product = w.exp().unwrap().wedge(&w.neg().exp().unwrap()).unwrap();
        c.check(
            "exp inverse",
            forms_equal(&product, &Form::constant(k, 1.0).unwrap(), EXP_INVERSE_TOL),
        );
    }

    // Pfaffian² = determinant on random 8×8.
    for _ in 0..20 {
        let m = random_antisymmetric(&mut rng, 8);
        let pf = m.pfaffian().unwrap();
        let det = m.to_dense().determinant();
        c.check_close("Pf² = det", pf * pf, det, PF_DET_TOL * det.abs().max(1.0));
    }

    // Top-grade coefficient of exp of a 2-form reduces to the Pfaffian on
    // random 6×6.
    for _ in 0..20 {
        let m = random_antisymmetric(&mut rng, 6);
        let w = m.to_two_form().unwrap();
        let h = hyperpfaffian(&w, 2).unwrap();
        let pf = m.pfaffian().unwrap();
        c.check_close("hyperpfaffian = Pf", h, pf, HYPERPF_TOL * pf.abs().max(1.0));
    }
    c.finish(Some(Duration::from_secs(10)));
}

#[test]
fn criterion_07_confluent_vandermonde_identity() {
    let mut c = Criterion::new(7, "confluent Vandermonde identity");
    let mut rng = StdRng::seed_from_u64(0x5deece66d);
    let mut tested = 0;
    while tested < 100 {
        // Block lengths stay at b·q ≤ 4: larger derivative blocks make the
        // determinant ill-conditioned enough that LU rounding, not the
        // identity under test, would dominate the comparison.
        let b = rng.gen_range(1..=2u32);
        let max_charge = if b == 1 { 3 } else { 2 };
        let species = rng.gen_range(1..=max_charge as usize);
        let mut charges: Vec<u32> = Vec::new();
        while charges.len() < species {
            let q = rng.gen_range(1..=max_charge);
            if !charges.contains(&q) {
                charges.push(q);
            }
        }
        // Particle counts keeping the matrix side at most 8.
        let mut counts = vec![0u32; species];
        let mut k = 0u32;
        for _ in 0..8 {
            let j = rng.gen_range(0..species);
            let l = b * charges[j];
            if k + l <= 8 {
                counts[j] += 1;
                k += l;
            }
        }
        if k == 0 {
            continue;
        }
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut all: Vec<f64> = Vec::new();
        let mut ok = true;
        for &n in &counts {
            let mut xs = Vec::new();
            for _ in 0..n {
                let mut x = rng.gen_range(-2.0..2.0);
                let mut tries = 0;
                while all.iter().any(|&y: &f64| (x - y).abs() < 0.3) {
                    x = rng.gen_range(-2.0..2.0);
                    tries += 1;
                    if tries > 50 {
                        ok = false;
                        break;
                    }
                }
                all.push(x);
                xs.push(x);
            }
            points.push(xs);
        }
        if !ok {
            continue;
        }
        // High interaction powers make the determinant cancel most of its
        // digits when points crowd together; keep sets where it retains
        // enough of them for a meaningful relative comparison.
        let product = vandermonde_product(b, &charges, &points);
        if product.abs() < 1e-4 {
            continue;
        }
        let family = if tested % 2 == 0 {
            CompleteFamily::monomial()
        } else {
            CompleteFamily::hermite_monic()
        };
        let det = confluent_vandermonde(&family, b, &charges, &points)
            .unwrap()
            .determinant();
        c.check_close(
            &format!("det vs product (b={b}, q={charges:?}, counts={counts:?})"),
            det,
            product,
            VANDERMONDE_REL_TOL * product.abs(),
        );
        tested += 1;
    }
    c.finish(None);
}

#[test]
fn criterion_08_correlation_normalization() {
    let mut c = Criterion::new(8, "correlation normalization and pointwise values");
    let spec = charge2_spec(CompleteFamily::monomial());
    let cache = CoefficientCache::new();
    let scheme = QuadratureScheme::default();
    let omegas = spec.build_omegas(&cache, &scheme).unwrap();
    let z = [1.0];

    let density = |x: f64| {
        let insertions = InsertionSet::new(vec![vec![x]]).unwrap();
        correlation_grand(&spec, &omegas, &insertions, &z).unwrap()
    };

    // Trapezoid over a fine grid; the density decays like the squared
    // weight, so the truncation at |x| = 4 is far below the tolerance.
    let (lo, hi, n) = (-4.0, 4.0, 160usize);
    let h = (hi - lo) / n as f64;
    let mut integral = 0.5 * (density(lo) + density(hi));
    for i in 1..n {
        integral += density(lo + h * i as f64);
    }
    integral *= h;
    c.check_close("∫R = particle count", integral, 2.0, DENSITY_NORM_TOL);

    for x in [0.0, 1.0, -1.0] {
        let insertions = InsertionSet::new(vec![vec![x]]).unwrap();
        let engine = correlation_grand(&spec, &omegas, &insertions, &z).unwrap();
        let wedge = correlation_grand_wedge(&spec, &omegas, &insertions, &z).unwrap();
        let oracle = direct_correlation(
            &spec,
            &insertions,
            &[2],
            &OracleConfig::default(),
            &scheme,
        )
        .unwrap();
        c.check_close(
            &format!("R({x}) vs pinned oracle"),
            engine,
            oracle.value,
            DENSITY_POINT_TOL,
        );
        c.check_close(
            &format!("R({x}) extraction vs wedge"),
            wedge,
            engine,
            ROUTE_TOL * engine.abs().max(1.0),
        );
    }
    c.finish(None);
}

#[test]
fn criterion_09_population_law() {
    let mut c = Criterion::new(9, "population probabilities sum to one");
    let spec = two_species_spec(CompleteFamily::monomial());
    let cache = CoefficientCache::new();
    let scheme = QuadratureScheme::default();
    let omegas = spec.build_omegas(&cache, &scheme).unwrap();
    for z in [[1.0, 1.0], [2.0, 0.5]] {
        let probs = spec.population_probabilities(&omegas, &z).unwrap();
        let sum: f64 = probs.iter().map(|(_, p)| p).sum();
        c.check_close(&format!("sum at z = {z:?}"), sum, 1.0, PROBABILITY_TOL);
    }
    c.finish(None);
}

#[test]
fn criterion_10_odd_species_convention() {
    let mut c = Criterion::new(10, "odd-species fugacity convention");
    let spec = two_species_spec(CompleteFamily::monomial());
    let cache = CoefficientCache::new();
    let scheme = QuadratureScheme::default();
    let omegas = spec.build_omegas(&cache, &scheme).unwrap();

    // Squared convention: multidegrees count particles and the
    // coefficients are the oracle-verified partition values.
    let squared = spec
        .partition_grand_with_convention(&omegas, OddConvention::Squared)
        .unwrap();
    let mut degrees = squared.multidegrees(2);
    degrees.sort();
    c.check(
        "squared convention places (4,0), (2,1), (0,2)",
        degrees == vec![vec![0, 2], vec![2, 1], vec![4, 0]],
    );
    for (m, reference) in [
        ([4u32, 0], 2.0 * PI),
        ([2, 1], 6.0 * PI),
        ([0, 2], 1.5 * PI),
    ] {
        let v = squared.coefficient(&m);
        c.check_close(
            &format!("squared coefficient at {m:?}"),
            v,
            reference,
            FAMILY_REL_TOL * reference,
        );
    }

    // Literal convention: the odd species' exponent counts wedge factors
    // (particle pairs), so the four-particle coefficient lands at z-degree
    // two.
    let literal = spec
        .partition_grand_with_convention(&omegas, OddConvention::Literal)
        .unwrap();
    let mut literal_degrees = literal.multidegrees(2);
    literal_degrees.sort();
    c.check(
        "literal convention misplaces multidegrees",
        literal_degrees == vec![vec![0, 2], vec![1, 1], vec![2, 0]],
    );
    c.check_close(
        "the (4,0) value sits at (2,0) under the literal convention",
        literal.coefficient(&[2, 0]),
        squared.coefficient(&[4, 0]),
        ROUTE_TOL * squared.coefficient(&[4, 0]).abs(),
    );
    c.check(
        "no (4,0) coefficient under the literal convention",
        literal.coefficient(&[4, 0]) == 0.0,
    );
    c.finish(None);
}

// ───────────────────────── random-structure helpers ─────────────────────────

fn shuffle(rng: &mut StdRng, values: &mut [u32]) {
    for i in (1..values.len()).rev() {
        let j = rng.gen_range(0..=i);
        values.swap(i, j);
    }
}

fn inversion_sign(seq: &[u32]) -> i32 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Random grade-`g` form with small integer coefficients (exact in f64).
fn random_homogeneous(rng: &mut StdRng, k: u32, g: u32) -> Form<f64> {
    let mut form = Form::zero(k).unwrap();
    let tuples = IncreasingMap::all(g as usize, k);
    for t in tuples {
        if rng.gen_bool(0.5) {
            let coeff = rng.gen_range(-3i32..=3) as f64;
            if coeff != 0.0 {
                form.add_term(BasisWord::from_map(&t), coeff).unwrap();
            }
        }
    }
    form
}

/// Random form mixing the even grades 2, 4, … (the domain of `exp`) with
/// float coefficients; never empty.
fn random_mixed(rng: &mut StdRng, k: u32) -> Form<f64> {
    let mut form = Form::zero(k).unwrap();
    for g in (2..=k).step_by(2) {
        for t in IncreasingMap::all(g as usize, k) {
            if rng.gen_bool(0.3) {
                form.add_term(BasisWord::from_map(&t), rng.gen_range(-1.0..1.0))
                    .unwrap();
            }
        }
    }
    if form.term_count() == 0 {
        let t = IncreasingMap::new(vec![1, 2]).unwrap();
        form.add_term(BasisWord::from_map(&t), 0.5).unwrap();
    }
    form
}

fn random_antisymmetric(rng: &mut StdRng, n: usize) -> AntisymmetricMatrix {
    let mut m = AntisymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    m
}

fn forms_equal(a: &Form<f64>, b: &Form<f64>, tol: f64) -> bool {
    let diff = a.add(&b.neg()).unwrap();
    let within = diff.terms().all(|(_, c)| c.abs() <= tol);
    within
}
