//! Brute-force reference values: partition and correlation functions
//! computed straight from their defining multi-particle integrals, with no
//! exterior algebra involved. Deliberately independent of the engine so the
//! two routes can check each other; feasible only at low particle counts.

use statrs::function::factorial::factorial;
use statrs::function::gamma::gamma;

use crate::correlations::InsertionSet;
use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::quadrature::{
    fixed_grid_simpson, integrate_monte_carlo, integrate_multidim, resolve_radius, Estimate,
    MultiDimProblem, QuadratureScheme, WeightedMeasure,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// Nested product quadrature with ordering sectors across the kinks.
    Quadrature,
    /// Seeded importance sampling from the one-body weights.
    MonteCarlo,
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub method: OracleMethod,
    /// Re-run quadratures of at most two coordinates on an unrelated fixed
    /// Simpson grid and fail on disagreement beyond [`PARANOID_REL_TOL`].
    pub paranoid: bool,
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            method: OracleMethod::Quadrature,
            paranoid: false,
            mc_samples: 200_000,
            seed: 1,
        }
    }
}

/// Agreement demanded between the Gauss machinery and the paranoid Simpson
/// cross-check; Simpson across an interaction kink converges only at second
/// order, so this is intentionally loose.
pub const PARANOID_REL_TOL: f64 = 5e-3;

/// Flat species-major coordinate layout for a particle count per species.
fn layout(spec: &EnsembleSpec, counts: &[u32]) -> (Vec<usize>, Vec<WeightedMeasure>) {
    let mut species_of = Vec::new();
    let mut measures = Vec::new();
    for (j, &m) in counts.iter().enumerate() {
        for _ in 0..m {
            species_of.push(j);
            measures.push(spec.measure(j));
        }
    }
    (species_of, measures)
}

/// Pair interaction exponent between coordinates of species `j` and `k`:
/// `beta q_j q_k = (b q_j)(b q_k)`, always an integer here.
fn pair_exponent(spec: &EnsembleSpec, j: usize, k: usize) -> i32 {
    spec.ell(j) as i32 * spec.ell(k) as i32
}

/// The unnormalized statistical weight of a full configuration, coordinates
/// listed per species: one-body weights times all pair interactions.
pub fn boltzmann_factor(spec: &EnsembleSpec, coords: &[Vec<f64>]) -> Result<f64> {
    if coords.len() != spec.species_count() {
        return Err(Error::InvalidArgument(format!(
            "coordinates for {} species, ensemble has {}",
            coords.len(),
            spec.species_count()
        )));
    }
    let counts: Vec<u32> = coords.iter().map(|c| c.len() as u32).collect();
    let (species_of, measures) = layout(spec, &counts);
    let flat: Vec<f64> = coords.iter().flatten().copied().collect();
    let mut v = 1.0;
    for (i, m) in measures.iter().enumerate() {
        v *= m.weight(flat[i]);
    }
    for a in 0..flat.len() {
        for b in a + 1..flat.len() {
            v *= (flat[a] - flat[b])
                .abs()
                .powi(pair_exponent(spec, species_of[a], species_of[b]));
        }
    }
    Ok(v)
}

/// Independent fixed-grid Simpson evaluation for one or two coordinates,
/// compared against the Gauss result.
fn paranoid_check(
    integrand: &(dyn Fn(&[f64]) -> f64 + Sync),
    measures: &[WeightedMeasure],
    scheme: &QuadratureScheme,
    degree: u32,
    reference: f64,
) -> Result<()> {
    let value = match measures.len() {
        0 => integrand(&[]),
        1 => {
            let r = resolve_radius(&measures[0], scheme, degree)?;
            fixed_grid_simpson(&|x| integrand(&[x]), -r, r, 2000)
        }
        2 => {
            let r0 = resolve_radius(&measures[0], scheme, degree)?;
            let r1 = resolve_radius(&measures[1], scheme, degree)?;
            fixed_grid_simpson(
                &|x| fixed_grid_simpson(&|y| integrand(&[x, y]), -r1, r1, 400),
                -r0,
                r0,
                400,
            )
        }
        _ => return Ok(()),
    };
    let target = PARANOID_REL_TOL * reference.abs().max(1e-12);
    if (value - reference).abs() > target {
        return Err(Error::QuadratureNonConvergence {
            estimate: reference,
            error_bound: (value - reference).abs(),
            target,
        });
    }
    Ok(())
}

/// Canonical partition function `Z_M` by direct integration of the
/// configuration weight over all particles, divided by `prod_j M_j!`.
pub fn direct_partition(
    spec: &EnsembleSpec,
    populations: &[u32],
    config: &OracleConfig,
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    spec.check_population(populations)?;
    let (species_of, measures) = layout(spec, populations);
    let d = species_of.len();
    let symmetry: f64 = populations.iter().map(|&m| factorial(m as u64)).product();

    let interactions = {
        let species_of = species_of.clone();
        let spec = spec.clone();
        move |x: &[f64]| -> f64 {
            let mut p = 1.0;
            for a in 0..x.len() {
                for b in a + 1..x.len() {
                    p *= (x[a] - x[b])
                        .abs()
                        .powi(pair_exponent(&spec, species_of[a], species_of[b]));
                }
            }
            p
        }
    };
    let degree = degree_hint(spec, &species_of, &[]);

    let est = match config.method {
        OracleMethod::Quadrature => {
            let weights = measures.clone();
            let integrand = move |x: &[f64]| {
                let mut v = interactions(x);
                for (i, m) in weights.iter().enumerate() {
                    v *= m.weight(x[i]);
                }
                v
            };
            let mut kinks = Vec::new();
            for a in 0..d {
                for b in a + 1..d {
                    if pair_exponent(spec, species_of[a], species_of[b]) % 2 != 0 {
                        kinks.push((a, b));
                    }
                }
            }
            let groups = species_blocks(&species_of);
            let breakpoints = vec![Vec::new(); d];
            let est = integrate_multidim(
                &MultiDimProblem {
                    integrand: &integrand,
                    measures: &measures,
                    kink_pairs: &kinks,
                    symmetric_groups: &groups,
                    breakpoints: &breakpoints,
                    degree_hint: degree,
                },
                scheme,
            )?;
            if config.paranoid {
                paranoid_check(&integrand, &measures, scheme, degree, est.value)?;
            }
            est
        }
        OracleMethod::MonteCarlo => integrate_monte_carlo(
            &interactions,
            &measures,
            config.mc_samples,
            config.seed,
            scheme,
        )?,
    };
    Ok(Estimate {
        value: est.value / symmetry,
        error: est.error / symmetry,
    })
}

/// Correlation function by direct integration: insertion coordinates are
/// pinned, the remaining particles are integrated out, and the result is
/// normalized by `Z_M prod_j (M_j - m_j)!`.
pub fn direct_correlation(
    spec: &EnsembleSpec,
    insertions: &InsertionSet,
    populations: &[u32],
    config: &OracleConfig,
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    spec.check_population(populations)?;
    let lists = insertions.species_lists();
    if lists.len() != spec.species_count() {
        return Err(Error::InvalidArgument(format!(
            "insertion lists for {} species, ensemble has {}",
            lists.len(),
            spec.species_count()
        )));
    }
    let counts = insertions.counts();
    for (j, (&m, &inserted)) in populations.iter().zip(&counts).enumerate() {
        if inserted > m {
            return Err(Error::InvalidArgument(format!(
                "species {j} has {m} particles but {inserted} insertion points"
            )));
        }
    }
    // fixed coordinates, species-major
    let mut fixed_species = Vec::new();
    let mut fixed_x = Vec::new();
    for (j, pts) in lists.iter().enumerate() {
        for &x in pts {
            fixed_species.push(j);
            fixed_x.push(x);
        }
    }
    // free coordinates: what remains of each species
    let free_counts: Vec<u32> = populations
        .iter()
        .zip(&counts)
        .map(|(&m, &i)| m - i)
        .collect();
    let (free_species, measures) = layout(spec, &free_counts);
    let d = free_species.len();
    let remaining_symmetry: f64 = free_counts.iter().map(|&m| factorial(m as u64)).product();

    // weight of the pinned block: its one-body weights and internal pairs
    let mut pinned = 1.0;
    for (i, &x) in fixed_x.iter().enumerate() {
        pinned *= spec.measure(fixed_species[i]).weight(x);
    }
    for a in 0..fixed_x.len() {
        for b in a + 1..fixed_x.len() {
            pinned *= (fixed_x[a] - fixed_x[b])
                .abs()
                .powi(pair_exponent(spec, fixed_species[a], fixed_species[b]));
        }
    }

    let z = direct_partition(spec, populations, config, scheme)?;
    if z.value == 0.0 || !z.value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "direct partition function is {} for population {populations:?}",
            z.value
        )));
    }

    if d == 0 {
        let value = pinned / (z.value * remaining_symmetry);
        return Ok(Estimate {
            value,
            error: (value * z.error / z.value).abs(),
        });
    }

    // free-free and free-fixed interactions, excluding the pinned constant
    let interactions = {
        let free_species = free_species.clone();
        let fixed_species = fixed_species.clone();
        let fixed_x = fixed_x.clone();
        let spec = spec.clone();
        move |x: &[f64]| -> f64 {
            let mut p = 1.0;
            for a in 0..x.len() {
                for b in a + 1..x.len() {
                    p *= (x[a] - x[b])
                        .abs()
                        .powi(pair_exponent(&spec, free_species[a], free_species[b]));
                }
                for (f, &xi) in fixed_x.iter().enumerate() {
                    p *= (x[a] - xi)
                        .abs()
                        .powi(pair_exponent(&spec, free_species[a], fixed_species[f]));
                }
            }
            p
        }
    };
    let degree = degree_hint(spec, &free_species, &fixed_species);

    let integral = match config.method {
        OracleMethod::Quadrature => {
            let weights = measures.clone();
            let integrand = move |x: &[f64]| {
                let mut v = interactions(x);
                for (i, m) in weights.iter().enumerate() {
                    v *= m.weight(x[i]);
                }
                v
            };
            let mut kinks = Vec::new();
            for a in 0..d {
                for b in a + 1..d {
                    if pair_exponent(spec, free_species[a], free_species[b]) % 2 != 0 {
                        kinks.push((a, b));
                    }
                }
            }
            let groups = species_blocks(&free_species);
            // every pinned point is a potential kink against every free
            // coordinate; harmless extra panel splits when the power is even
            let breakpoints = vec![fixed_x.clone(); d];
            let est = integrate_multidim(
                &MultiDimProblem {
                    integrand: &integrand,
                    measures: &measures,
                    kink_pairs: &kinks,
                    symmetric_groups: &groups,
                    breakpoints: &breakpoints,
                    degree_hint: degree,
                },
                scheme,
            )?;
            if config.paranoid {
                paranoid_check(&integrand, &measures, scheme, degree, est.value)?;
            }
            est
        }
        OracleMethod::MonteCarlo => integrate_monte_carlo(
            &interactions,
            &measures,
            config.mc_samples,
            config.seed,
            scheme,
        )?,
    };

    let scale = pinned / (z.value * remaining_symmetry);
    let value = integral.value * scale;
    let mut error = (integral.error * scale).abs();
    if value != 0.0 {
        error += (value * z.error / z.value).abs();
    }
    Ok(Estimate { value, error })
}

/// Largest per-coordinate interaction degree, used to size truncation radii.
fn degree_hint(spec: &EnsembleSpec, free_species: &[usize], fixed_species: &[usize]) -> u32 {
    let mut best = 0i32;
    for (a, &ja) in free_species.iter().enumerate() {
        let mut total = 0i32;
        for (b, &jb) in free_species.iter().enumerate() {
            if a != b {
                total += pair_exponent(spec, ja, jb);
            }
        }
        for &jf in fixed_species {
            total += pair_exponent(spec, ja, jf);
        }
        best = best.max(total);
    }
    best.max(1) as u32
}

/// Indices grouped by species, keeping only groups of at least two
/// coordinates (singletons carry no permutation symmetry).
fn species_blocks(species_of: &[usize]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, &j) in species_of.iter().enumerate() {
        match blocks.iter_mut().find(|b| species_of[b[0]] == j) {
            Some(b) => b.push(i),
            None => blocks.push(vec![i]),
        }
    }
    blocks.retain(|b| b.len() > 1);
    blocks
}

/// Closed form for the n-coordinate integral
/// `∫ prod_i e^{-x_i^2/2} prod_{i<j} |x_i - x_j|^{2c} dx
///  = (2 pi)^{n/2} prod_{j=1}^{n} Gamma(1 + j c) / Gamma(1 + c)`.
pub fn mehta_reference(n: u32, c: f64) -> f64 {
    let mut prod = (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0);
    for j in 1..=n {
        prod *= gamma(1.0 + j as f64 * c) / gamma(1.0 + c);
    }
    prod
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::CompleteFamily;
    use crate::quadrature::Potential;
    use approx::assert_relative_eq;

    const SQRT_PI: f64 = 1.7724538509055159;

    fn spec(b: f64, charges: Vec<u32>, n: u32) -> EnsembleSpec {
        EnsembleSpec::new(
            b,
            charges,
            n,
            CompleteFamily::monomial(),
            Potential::gaussian(1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn mehta_reference_known_values() {
        assert_relative_eq!(mehta_reference(2, 0.5), 4.0 * SQRT_PI, max_relative = 1e-12);
        assert_relative_eq!(
            mehta_reference(4, 0.5),
            48.0 * std::f64::consts::PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn boltzmann_factor_by_hand() {
        let s = spec(1.0, vec![1, 2], 4);
        // one charge-1 particle at 1, one charge-2 particle at -1
        // weights: e^{-1/2} and e^{-2*1/2}; interaction |1-(-1)|^{1*2}
        let v = boltzmann_factor(&s, &[vec![1.0], vec![-1.0]]).unwrap();
        let expected = (-0.5f64).exp() * (-1.0f64).exp() * 2.0f64.powi(2);
        assert_relative_eq!(v, expected, max_relative = 1e-14);
    }

    #[test]
    fn direct_partition_two_unit_charges() {
        // (1/2!) ∬ e^{-(x^2+y^2)/2} |x-y| = 2 sqrt(pi)
        let s = spec(1.0, vec![1], 2);
        let est = direct_partition(
            &s,
            &[2],
            &OracleConfig::default(),
            &QuadratureScheme::default(),
        )
        .unwrap();
        assert_relative_eq!(est.value, 2.0 * SQRT_PI, max_relative = 1e-9);
        assert_relative_eq!(
            est.value,
            mehta_reference(2, 0.5) / 2.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn direct_partition_single_charge_two() {
        // ∫ e^{-x^2} = sqrt(pi)
        let s = spec(1.0, vec![2], 2);
        let est = direct_partition(
            &s,
            &[1],
            &OracleConfig::default(),
            &QuadratureScheme::default(),
        )
        .unwrap();
        assert_relative_eq!(est.value, SQRT_PI, max_relative = 1e-10);
    }

    #[test]
    fn paranoid_agrees_on_kinked_integrand() {
        let s = spec(1.0, vec![1], 2);
        let cfg = OracleConfig {
            paranoid: true,
            ..OracleConfig::default()
        };
        let est = direct_partition(&s, &[2], &cfg, &QuadratureScheme::default()).unwrap();
        assert_relative_eq!(est.value, 2.0 * SQRT_PI, max_relative = 1e-9);
    }

    #[test]
    fn monte_carlo_within_four_sigma() {
        let s = spec(1.0, vec![1], 2);
        let cfg = OracleConfig {
            method: OracleMethod::MonteCarlo,
            mc_samples: 400_000,
            seed: 11,
            ..OracleConfig::default()
        };
        let est = direct_partition(&s, &[2], &cfg, &QuadratureScheme::default()).unwrap();
        let exact = 2.0 * SQRT_PI;
        assert!(
            (est.value - exact).abs() < 4.0 * est.error,
            "MC {} +/- {} vs exact {exact}",
            est.value,
            est.error
        );
    }

    #[test]
    fn pinned_correlation_no_free_coordinates() {
        // one charge-2 particle pinned at xi: R(xi) = e^{-xi^2}/sqrt(pi)
        let s = spec(1.0, vec![2], 2);
        let set = InsertionSet::new(vec![vec![0.4]]).unwrap();
        let est = direct_correlation(
            &s,
            &set,
            &[1],
            &OracleConfig::default(),
            &QuadratureScheme::default(),
        )
        .unwrap();
        assert_relative_eq!(
            est.value,
            (-0.4f64 * 0.4).exp() / SQRT_PI,
            max_relative = 1e-9
        );
    }

    #[test]
    fn pinned_correlation_with_free_coordinate() {
        // two unit charges, one pinned at 0:
        // R(0) = ∫ e^{-(x^2)/2} |x| dx * e^{0} / (Z_2 * 1!) = 2 / (2 sqrt(pi))
        let s = spec(1.0, vec![1], 2);
        let set = InsertionSet::new(vec![vec![0.0]]).unwrap();
        let est = direct_correlation(
            &s,
            &set,
            &[2],
            &OracleConfig::default(),
            &QuadratureScheme::default(),
        )
        .unwrap();
        assert_relative_eq!(est.value, 1.0 / SQRT_PI, max_relative = 1e-8);
    }
}
