//! Ensemble definition and the partition-function engines built on it.
//!
//! An [`EnsembleSpec`] pins down a one-dimensional gas of `J` species with
//! distinct positive integer charges `q_j`, inverse temperature `beta = b^2`,
//! a confining potential, and a total charge `N`. Admissible population
//! vectors `M` satisfy `sum_j M_j q_j = N`. The derived quantities
//!
//! * `K = b N` — the exterior-algebra dimension, required even,
//! * `L_j = b q_j` — the block length of species `j`, at most one odd,
//!
//! must both be integers. Each species contributes one inhomogeneous form
//! `omega_j` (built from weighted Wronskian integrals); the grand partition
//! function is the full Berezin integral of `exp(sum_j zeta_j omega_j)`, a
//! polynomial in the fugacities whose coefficients are the canonical
//! partition functions. An independent pairing expansion
//! ([`EnsembleSpec::partition_canonical_laplace`]) recombines the very same
//! cached one- and two-tuple integrals and must agree to rounding error.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;

use crate::cache::CoefficientCache;
use crate::error::{Error, Result};
use crate::exterior::{sgn_map_tuple, AntisymmetricMatrix, BasisWord, Form, MAX_DIM};
use crate::fugacity::{FugacityPolynomial, TruncationRule};
use crate::increasing::IncreasingMap;
use crate::poly::{wronskian_evaluator, CompleteFamily};
use crate::quadrature::{
    integrate_sgn_kernel, integrate_weighted, Potential, QuadratureScheme, WeightedMeasure,
};
use crate::scalar::ScalarRing;

/// Relative slack when checking that `b * N` and `b * q_j` are integers.
const INTEGRALITY_TOL: f64 = 1e-9;

/// Hard ceiling on single-tuple coefficients per species form.
const MAX_OMEGA_TUPLES: u128 = 100_000;

/// Hard ceiling on ordered tuple pairs for an odd-length species form.
const MAX_OMEGA_PAIRS: u128 = 200_000;

/// Hard ceiling on the number of tuple assignments the pairing expansion
/// will enumerate.
pub const DEFAULT_TUPLE_CAP: u128 = 5_000_000;

fn round_to_integer(x: f64, what: &str) -> Result<u32> {
    let r = x.round();
    if (x - r).abs() > INTEGRALITY_TOL * r.abs().max(1.0) || r < 0.0 {
        return Err(Error::InvalidEnsemble(format!(
            "{what} = {x} must be a nonnegative integer"
        )));
    }
    Ok(r as u32)
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// A fully validated ensemble: coupling, charges, total charge, reference
/// polynomial family, and confining potential.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    b: f64,
    charges: Vec<u32>,
    total_charge: u32,
    k_dim: u32,
    ells: Vec<u32>,
    family: CompleteFamily,
    potential: Potential,
}

impl EnsembleSpec {
    pub fn new(
        b: f64,
        charges: Vec<u32>,
        total_charge: u32,
        family: CompleteFamily,
        potential: Potential,
    ) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidEnsemble(format!(
                "coupling b must be positive and finite, got {b}"
            )));
        }
        if charges.is_empty() {
            return Err(Error::InvalidEnsemble("at least one species required".into()));
        }
        if charges.iter().any(|&q| q == 0) {
            return Err(Error::InvalidEnsemble("charges must be positive".into()));
        }
        if !charges.iter().all_unique() {
            return Err(Error::InvalidEnsemble(format!(
                "charges must be distinct, got {charges:?}"
            )));
        }
        if total_charge == 0 {
            return Err(Error::InvalidEnsemble("total charge must be positive".into()));
        }
        let k_dim = round_to_integer(b * total_charge as f64, "b * N")?;
        if k_dim % 2 != 0 {
            return Err(Error::InvalidEnsemble(format!(
                "b * N = {k_dim} must be even"
            )));
        }
        if k_dim < 2 {
            return Err(Error::InvalidEnsemble(format!(
                "b * N = {k_dim} must be at least 2"
            )));
        }
        if k_dim as usize > MAX_DIM as usize {
            return Err(Error::InvalidEnsemble(format!(
                "b * N = {k_dim} exceeds the supported exterior dimension {MAX_DIM}"
            )));
        }
        let mut ells = Vec::with_capacity(charges.len());
        for &q in &charges {
            let l = round_to_integer(b * q as f64, &format!("b * q for charge {q}"))?;
            if l == 0 {
                return Err(Error::InvalidEnsemble(format!(
                    "b * q = 0 for charge {q}: block length must be at least 1"
                )));
            }
            ells.push(l);
        }
        let odd_count = ells.iter().filter(|&&l| l % 2 == 1).count();
        if odd_count > 1 {
            return Err(Error::InvalidEnsemble(format!(
                "at most one species may have odd block length; block lengths {ells:?}"
            )));
        }
        let spec = Self {
            b,
            charges,
            total_charge,
            k_dim,
            ells,
            family,
            potential,
        };
        if spec.admissible_populations().is_empty() {
            return Err(Error::InvalidEnsemble(format!(
                "no population vector reaches total charge {} with charges {:?}",
                spec.total_charge, spec.charges
            )));
        }
        Ok(spec)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Inverse temperature `beta = b^2`.
    pub fn beta(&self) -> f64 {
        self.b * self.b
    }

    pub fn charges(&self) -> &[u32] {
        &self.charges
    }

    pub fn total_charge(&self) -> u32 {
        self.total_charge
    }

    pub fn family(&self) -> &CompleteFamily {
        &self.family
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn species_count(&self) -> usize {
        self.charges.len()
    }

    /// Exterior-algebra dimension `K = b N`.
    pub fn k_dim(&self) -> u32 {
        self.k_dim
    }

    /// Block length `L_j = b q_j` of species `j` (0-based).
    pub fn ell(&self, j: usize) -> u32 {
        self.ells[j]
    }

    /// One-particle weighted measure of species `j`: weight
    /// `exp(-beta q_j U(x))` against Lebesgue measure.
    pub fn measure(&self, j: usize) -> WeightedMeasure {
        WeightedMeasure::new(self.potential.clone(), self.beta() * self.charges[j] as f64)
    }

    /// Every population vector `M >= 0` with `sum_j M_j q_j = N`, in
    /// lexicographic order.
    pub fn admissible_populations(&self) -> Vec<Vec<u32>> {
        fn rec(charges: &[u32], remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if charges.is_empty() {
                if remaining == 0 {
                    out.push(prefix.clone());
                }
                return;
            }
            let q = charges[0];
            for m in 0..=remaining / q {
                prefix.push(m);
                rec(&charges[1..], remaining - m * q, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&self.charges, self.total_charge, &mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn check_population(&self, populations: &[u32]) -> Result<()> {
        if populations.len() != self.species_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} population entries, got {}",
                self.species_count(),
                populations.len()
            )));
        }
        let reached: u64 = populations
            .iter()
            .zip(&self.charges)
            .map(|(&m, &q)| m as u64 * q as u64)
            .sum();
        if reached != self.total_charge as u64 {
            return Err(Error::Inadmissible(format!(
                "population {:?} carries total charge {reached}, ensemble requires {}",
                populations, self.total_charge
            )));
        }
        Ok(())
    }

    fn check_omegas(&self, omegas: &[OmegaForm]) -> Result<()> {
        if omegas.len() != self.species_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} species forms, got {}",
                self.species_count(),
                omegas.len()
            )));
        }
        for (j, om) in omegas.iter().enumerate() {
            if om.species != j || om.ell != self.ells[j] || om.form.dim() != self.k_dim {
                return Err(Error::InvalidArgument(format!(
                    "species form at position {j} does not match the ensemble"
                )));
            }
        }
        Ok(())
    }

    /// Builds the species form `omega_j`.
    ///
    /// Even `L_j`: `omega_j = sum_t c_t eps_t` over increasing tuples `t` of
    /// length `L_j`, with `c_t = ∫ w_j(x) Wr_t(x) dx`.
    ///
    /// Odd `L_j`: `omega_j = sum_{(t,u) disjoint, ordered} s(t,u) eps_t ∧ eps_u`
    /// with the antisymmetrized pair integral
    /// `s(t,u) = (1/2) ∬ w_j(x) w_j(y) Wr_t(x) Wr_u(y) sgn(y-x)`; the same
    /// values are kept as a matrix `a[t][u] = s(t,u) - s(u,t)` for the
    /// pairing expansion.
    ///
    /// All quadratures go through `cache`, keyed by family, potential,
    /// exponent, dimension, tuple, and scheme, so repeated builds and the
    /// pairing expansion reuse identical floating-point values.
    pub fn build_omega(
        &self,
        j: usize,
        cache: &CoefficientCache,
        scheme: &QuadratureScheme,
    ) -> Result<OmegaForm> {
        if j >= self.species_count() {
            return Err(Error::InvalidArgument(format!(
                "species index {j} out of range for {} species",
                self.species_count()
            )));
        }
        let l = self.ells[j];
        let k = self.k_dim;
        let measure = self.measure(j);
        let prefix = format!(
            "fam={}|pot={}|e={:.9e}|K={}|sch={}",
            self.family.name(),
            self.potential.cache_tag(),
            measure.exponent,
            k,
            scheme.cache_tag()
        );
        // warm the family cache so parallel workers mostly take read locks
        for n in 1..=k {
            self.family.member(n as usize)?;
        }
        let tuples = IncreasingMap::all(l as usize, k);
        let index: HashMap<u64, usize> =
            tuples.iter().enumerate().map(|(i, t)| (t.bits(), i)).collect();
        let mut form = Form::zero(k)?;

        if l % 2 == 0 {
            if tuples.len() as u128 > MAX_OMEGA_TUPLES {
                return Err(Error::CapExceeded(format!(
                    "{} tuples of length {l} in dimension {k} exceed the limit {MAX_OMEGA_TUPLES}",
                    tuples.len()
                )));
            }
            let evals = tuples
                .iter()
                .map(|t| wronskian_evaluator(&self.family, t))
                .collect::<Result<Vec<_>>>()?;
            let coefficients: Vec<f64> = tuples
                .par_iter()
                .zip(evals.par_iter())
                .map(|(t, ev)| {
                    let key = format!("w1|{prefix}|t={t}");
                    cache
                        .get_or_compute(&key, || {
                            let est =
                                integrate_weighted(&|x| ev.eval(x), &measure, scheme)?;
                            Ok((est.value, est.error))
                        })
                        .map(|(value, _)| value)
                })
                .collect::<Result<Vec<_>>>()?;
            for (t, &c) in tuples.iter().zip(&coefficients) {
                form.add_term(BasisWord(t.bits()), c)?;
            }
            return Ok(OmegaForm {
                species: j,
                ell: l,
                tuples,
                index,
                form,
                matrix: None,
            });
        }

        // odd block length: ordered disjoint tuple pairs
        let single = binomial_u128(k as u128, l as u128);
        let pair_count = single * binomial_u128((k - l.min(k)) as u128, l as u128);
        if pair_count > MAX_OMEGA_PAIRS {
            return Err(Error::CapExceeded(format!(
                "{pair_count} ordered tuple pairs of length {l} in dimension {k} exceed the limit {MAX_OMEGA_PAIRS}"
            )));
        }
        let evals = tuples
            .iter()
            .map(|t| wronskian_evaluator(&self.family, t))
            .collect::<Result<Vec<_>>>()?;
        let mut pairs = Vec::new();
        for a in 0..tuples.len() {
            for b in 0..tuples.len() {
                if a != b && tuples[a].bits() & tuples[b].bits() == 0 {
                    pairs.push((a, b));
                }
            }
        }
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let key = format!("w2|{prefix}|t={}|u={}", tuples[a], tuples[b]);
                cache
                    .get_or_compute(&key, || {
                        let est = integrate_sgn_kernel(
                            &|x| evals[a].eval(x),
                            &|y| evals[b].eval(y),
                            &measure,
                            scheme,
                        )?;
                        Ok((est.value, est.error))
                    })
                    .map(|(value, _)| value)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut lookup: HashMap<(usize, usize), f64> = HashMap::with_capacity(pairs.len());
        for (&(a, b), &s) in pairs.iter().zip(&values) {
            lookup.insert((a, b), s);
        }
        let mut matrix = AntisymmetricMatrix::zeros(tuples.len());
        for (&(a, b), &s) in pairs.iter().zip(&values) {
            let sgn = sgn_map_tuple(&[&tuples[a], &tuples[b]], k)?;
            debug_assert_ne!(sgn, 0);
            form.add_term(
                BasisWord(tuples[a].bits() | tuples[b].bits()),
                s * sgn as f64,
            )?;
            if a < b {
                matrix.set(a, b, s - lookup[&(b, a)]);
            }
        }
        Ok(OmegaForm {
            species: j,
            ell: l,
            tuples,
            index,
            form,
            matrix: Some(matrix),
        })
    }

    /// Builds all species forms in order.
    pub fn build_omegas(
        &self,
        cache: &CoefficientCache,
        scheme: &QuadratureScheme,
    ) -> Result<Vec<OmegaForm>> {
        (0..self.species_count())
            .map(|j| self.build_omega(j, cache, scheme))
            .collect()
    }

    /// Grand partition function as a polynomial in the fugacities, with the
    /// default convention for odd-block species (see
    /// [`OddConvention::Squared`]).
    pub fn partition_grand(&self, omegas: &[OmegaForm]) -> Result<FugacityPolynomial> {
        self.partition_grand_with_convention(omegas, OddConvention::Squared)
    }

    /// Grand partition function: the full Berezin integral of
    /// `exp(sum_j zeta_j omega_j)`, expanded with multidegrees truncated to
    /// total charge at most `N`. Under [`OddConvention::Squared`] the result
    /// collects exactly the multidegrees `M` with `sum_j M_j q_j = N`, and the
    /// coefficient of `z^M` is the canonical partition function `Z_M`
    /// (symmetry factors `1/M_j!` included).
    pub fn partition_grand_with_convention(
        &self,
        omegas: &[OmegaForm],
        convention: OddConvention,
    ) -> Result<FugacityPolynomial> {
        self.check_omegas(omegas)?;
        let k = self.k_dim;
        let rule = Arc::new(TruncationRule::new(
            self.charges.clone(),
            self.total_charge,
        )?);
        let mut total: Form<FugacityPolynomial> = Form::zero(k)?;
        for (j, om) in omegas.iter().enumerate() {
            let var = FugacityPolynomial::var((j + 1) as u32)?;
            let zeta = match (om.is_even(), convention) {
                (true, _) | (false, OddConvention::Literal) => var,
                (false, OddConvention::Squared) => var.mul(&var),
            }
            .with_rule(Arc::clone(&rule));
            let lifted = om.form.map_coefficients(|&c| zeta.scale(c));
            total = total.add(&lifted)?;
        }
        let expanded = total.exp_pruned(k)?;
        let grand = expanded.berezin_full();
        if matches!(convention, OddConvention::Squared) {
            debug_assert!(
                grand.multidegrees(self.species_count()).iter().all(|m| {
                    m.iter()
                        .zip(&self.charges)
                        .map(|(&d, &q)| d as u64 * q as u64)
                        .sum::<u64>()
                        == self.total_charge as u64
                }),
                "grand polynomial must be concentrated on total charge N"
            );
        }
        Ok(grand)
    }

    /// Canonical partition function `Z_M` read off the grand polynomial.
    pub fn partition_canonical(&self, omegas: &[OmegaForm], populations: &[u32]) -> Result<f64> {
        self.check_population(populations)?;
        let grand = self.partition_grand(omegas)?;
        Ok(grand.coefficient(populations))
    }

    /// Canonical partition function by the independent pairing expansion:
    /// a sum over assignments of disjoint increasing tuples to particles,
    /// each assignment weighted by its interleaving sign, single-tuple
    /// coefficients for even-block species, and antisymmetrized pair-matrix
    /// entries for the odd-block species; divided by `prod_j M_j!`.
    ///
    /// Supports at most two particles of the odd-block species. Every factor
    /// is read from the same [`OmegaForm`] data as the Berezin route, so the
    /// two results agree to summation rounding.
    pub fn partition_canonical_laplace(
        &self,
        omegas: &[OmegaForm],
        populations: &[u32],
    ) -> Result<f64> {
        self.check_omegas(omegas)?;
        self.check_population(populations)?;
        let k = self.k_dim;
        // odd-block species first so its two slots are adjacent
        let mut order: Vec<usize> = (0..self.species_count()).collect();
        order.sort_by_key(|&j| (self.ells[j] % 2 == 0, j));
        let mut slots: Vec<usize> = Vec::new();
        for &j in &order {
            let m = populations[j];
            if self.ells[j] % 2 == 1 && m > 2 {
                return Err(Error::Unsupported(format!(
                    "pairing expansion handles at most 2 particles of the odd-block species, requested {m}"
                )));
            }
            for _ in 0..m {
                slots.push(j);
            }
        }
        let mut assignments: u128 = 1;
        let mut remaining = k as u128;
        for &j in &slots {
            let l = self.ells[j] as u128;
            assignments = assignments.saturating_mul(binomial_u128(remaining, l));
            remaining -= l.min(remaining);
        }
        if assignments > DEFAULT_TUPLE_CAP {
            return Err(Error::CapExceeded(format!(
                "{assignments} tuple assignments exceed the limit {DEFAULT_TUPLE_CAP}"
            )));
        }
        let mut chosen: Vec<IncreasingMap> = Vec::with_capacity(slots.len());
        let total = self.laplace_rec(&slots, 0, &mut chosen, omegas)?;
        let mut symmetry = 1.0;
        for &m in populations {
            symmetry *= statrs::function::factorial::factorial(m as u64);
        }
        Ok(total / symmetry)
    }

    fn laplace_rec(
        &self,
        slots: &[usize],
        used: u64,
        chosen: &mut Vec<IncreasingMap>,
        omegas: &[OmegaForm],
    ) -> Result<f64> {
        let k = self.k_dim;
        if chosen.len() == slots.len() {
            if used.count_ones() != k {
                return Ok(0.0);
            }
            let refs: Vec<&IncreasingMap> = chosen.iter().collect();
            let sgn = sgn_map_tuple(&refs, k)?;
            let mut term = sgn as f64;
            let mut i = 0;
            while i < slots.len() {
                let om = &omegas[slots[i]];
                if om.is_even() {
                    term *= om.form.coefficient(BasisWord(chosen[i].bits()));
                    i += 1;
                } else {
                    let a = om.index[&chosen[i].bits()];
                    let b = om.index[&chosen[i + 1].bits()];
                    term *= om.matrix.as_ref().expect("odd species keeps a matrix").get(a, b);
                    i += 2;
                }
            }
            return Ok(term);
        }
        let l = self.ells[slots[chosen.len()]] as usize;
        let free: Vec<u32> = (1..=k).filter(|&v| used & (1u64 << (v - 1)) == 0).collect();
        let mut sum = 0.0;
        for combo in free.into_iter().combinations(l) {
            let t = IncreasingMap::new(combo)?;
            let bits = t.bits();
            chosen.push(t);
            sum += self.laplace_rec(slots, used | bits, chosen, omegas)?;
            chosen.pop();
        }
        Ok(sum)
    }

    /// Grand partition function evaluated at fixed fugacities.
    pub fn grand_partition_at(&self, omegas: &[OmegaForm], fugacities: &[f64]) -> Result<f64> {
        if fugacities.len() != self.species_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} fugacities, got {}",
                self.species_count(),
                fugacities.len()
            )));
        }
        self.partition_grand(omegas)?.evaluate(fugacities)
    }

    /// Probability of each admissible population vector at the given
    /// fugacities: `P(M) = Z_M prod_j z_j^{M_j} / Z(z)`.
    pub fn population_probabilities(
        &self,
        omegas: &[OmegaForm],
        fugacities: &[f64],
    ) -> Result<Vec<(Vec<u32>, f64)>> {
        if fugacities.len() != self.species_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} fugacities, got {}",
                self.species_count(),
                fugacities.len()
            )));
        }
        let grand = self.partition_grand(omegas)?;
        let denom = grand.evaluate(fugacities)?;
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grand partition function is {denom} at fugacities {fugacities:?}"
            )));
        }
        let mut out = Vec::new();
        for m in self.admissible_populations() {
            let mut weight = grand.coefficient(&m);
            for (&mj, &z) in m.iter().zip(fugacities) {
                weight *= z.powi(mj as i32);
            }
            out.push((m, weight / denom));
        }
        Ok(out)
    }
}

/// How the fugacity of an odd-block species enters the exponential. Each
/// wedge factor of an odd-block form accounts for a *pair* of particles, so
/// the faithful bookkeeping attaches the squared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddConvention {
    /// `zeta_j = z_j^2`: the coefficient of `z^M` is `Z_M` for every species.
    Squared,
    /// `zeta_j = z_j`: kept for comparison; multidegrees of odd-block species
    /// come out halved, so coefficients sit at the wrong powers.
    Literal,
}

/// The species form `omega_j` together with the tuple bookkeeping the
/// pairing expansion needs.
#[derive(Debug, Clone)]
pub struct OmegaForm {
    species: usize,
    ell: u32,
    tuples: Vec<IncreasingMap>,
    index: HashMap<u64, usize>,
    form: Form<f64>,
    matrix: Option<AntisymmetricMatrix>,
}

impl OmegaForm {
    pub fn species(&self) -> usize {
        self.species
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn is_even(&self) -> bool {
        self.ell % 2 == 0
    }

    /// Increasing tuples of length `L_j`, in lexicographic order; rows and
    /// columns of [`Self::matrix`] use this order.
    pub fn tuples(&self) -> &[IncreasingMap] {
        &self.tuples
    }

    pub fn tuple_index(&self, t: &IncreasingMap) -> Option<usize> {
        self.index.get(&t.bits()).copied()
    }

    pub fn form(&self) -> &Form<f64> {
        &self.form
    }

    /// Antisymmetrized pair matrix `a[t][u] = s(t,u) - s(u,t)` for an
    /// odd-block species (`None` for even block lengths). Entries for
    /// overlapping tuples are zero.
    pub fn matrix(&self) -> Option<&AntisymmetricMatrix> {
        self.matrix.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQRT_PI: f64 = 1.7724538509055159;

    fn gaussian(sigma: f64) -> Potential {
        Potential::gaussian(sigma).unwrap()
    }

    fn monomial_spec(b: f64, charges: Vec<u32>, n: u32, sigma: f64) -> EnsembleSpec {
        EnsembleSpec::new(b, charges, n, CompleteFamily::monomial(), gaussian(sigma)).unwrap()
    }

    #[test]
    fn validation_rejects_bad_ensembles() {
        let fam = CompleteFamily::monomial;
        let pot = || gaussian(1.0);
        // odd K
        assert!(matches!(
            EnsembleSpec::new(1.0, vec![1], 3, fam(), pot()),
            Err(Error::InvalidEnsemble(_))
        ));
        // two odd block lengths
        assert!(matches!(
            EnsembleSpec::new(1.0, vec![1, 3], 4, fam(), pot()),
            Err(Error::InvalidEnsemble(_))
        ));
        // dimension too large
        assert!(matches!(
            EnsembleSpec::new(1.0, vec![1], 64, fam(), pot()),
            Err(Error::InvalidEnsemble(_))
        ));
        // duplicate charges
        assert!(matches!(
            EnsembleSpec::new(1.0, vec![2, 2], 4, fam(), pot()),
            Err(Error::InvalidEnsemble(_))
        ));
        // unreachable total charge (4 does not divide 6)
        assert!(matches!(
            EnsembleSpec::new(1.0, vec![4], 6, fam(), pot()),
            Err(Error::InvalidEnsemble(_))
        ));
        // fractional block length
        assert!(matches!(
            EnsembleSpec::new(0.5, vec![1], 4, fam(), pot()),
            Err(Error::InvalidEnsemble(_))
        ));
        // fractional coupling with even products is fine
        assert!(EnsembleSpec::new(0.5, vec![2], 4, fam(), pot()).is_ok());
    }

    #[test]
    fn admissible_populations_enumerated() {
        let spec = monomial_spec(1.0, vec![1, 2], 4, 1.0);
        assert_eq!(
            spec.admissible_populations(),
            vec![vec![0, 2], vec![2, 1], vec![4, 0]]
        );
    }

    #[test]
    fn even_species_form_is_single_tuple_integral() {
        // one charge-2 particle, weight e^{-x^2}: the only tuple (1,2) has
        // Wronskian 1, so omega = sqrt(pi) eps_12 and Z = sqrt(pi).
        let spec = monomial_spec(1.0, vec![2], 2, 1.0);
        let cache = CoefficientCache::new();
        let scheme = QuadratureScheme::default();
        let om = spec.build_omega(0, &cache, &scheme).unwrap();
        assert!(om.is_even());
        let coeff = om.form().coefficient(BasisWord(0b11));
        assert_relative_eq!(coeff, SQRT_PI, max_relative = 1e-10);
        let z = spec.partition_canonical(&[om], &[1]).unwrap();
        assert_relative_eq!(z, SQRT_PI, max_relative = 1e-10);
    }

    #[test]
    fn pair_matrix_matches_known_values() {
        // four charge-1 particles at b = 1 with weight e^{-x^2/2}: the
        // antisymmetrized pair matrix over singleton tuples has closed-form
        // entries.
        let spec = monomial_spec(1.0, vec![1], 4, 1.0);
        let cache = CoefficientCache::new();
        let scheme = QuadratureScheme::default();
        let om = spec.build_omega(0, &cache, &scheme).unwrap();
        assert!(!om.is_even());
        let m = om.matrix().unwrap();
        assert_eq!(m.n(), 4);
        assert_relative_eq!(m.get(0, 1), 2.0 * SQRT_PI, max_relative = 1e-9);
        assert_relative_eq!(m.get(0, 3), 5.0 * SQRT_PI, max_relative = 1e-9);
        assert_relative_eq!(m.get(1, 2), -SQRT_PI, max_relative = 1e-9);
        assert_relative_eq!(m.get(2, 3), 3.5 * SQRT_PI, max_relative = 1e-9);
    }

    #[test]
    fn two_particle_grand_and_pairing_agree() {
        let spec = monomial_spec(1.0, vec![1], 2, 1.0);
        let cache = CoefficientCache::new();
        let scheme = QuadratureScheme::default();
        let omegas = spec.build_omegas(&cache, &scheme).unwrap();
        let grand = spec.partition_grand(&omegas).unwrap();
        let z2 = grand.coefficient(&[2]);
        assert_relative_eq!(z2, 2.0 * SQRT_PI, max_relative = 1e-9);
        let lap = spec.partition_canonical_laplace(&omegas, &[2]).unwrap();
        assert_relative_eq!(lap, z2, max_relative = 1e-12);
    }

    #[test]
    fn mixed_species_multidegrees_and_values() {
        // charges (1, 2) at b = 1, N = 4, weight exponents e^{-x^2/2} and
        // e^{-x^2}. Exact values: Z_(4,0) = 2 pi, Z_(2,1) = 6 pi,
        // Z_(0,2) = 3 pi / 2.
        let spec = monomial_spec(1.0, vec![1, 2], 4, 1.0);
        let cache = CoefficientCache::new();
        let scheme = QuadratureScheme::default();
        let omegas = spec.build_omegas(&cache, &scheme).unwrap();
        let grand = spec.partition_grand(&omegas).unwrap();
        let mut degs = grand.multidegrees(2);
        degs.sort();
        assert_eq!(degs, vec![vec![0, 2], vec![2, 1], vec![4, 0]]);
        let pi = std::f64::consts::PI;
        assert_relative_eq!(grand.coefficient(&[4, 0]), 2.0 * pi, max_relative = 1e-8);
        assert_relative_eq!(grand.coefficient(&[2, 1]), 6.0 * pi, max_relative = 1e-8);
        assert_relative_eq!(grand.coefficient(&[0, 2]), 1.5 * pi, max_relative = 1e-8);
        // pairing expansion agrees wherever it applies
        for m in [vec![2, 1], vec![0, 2]] {
            let lap = spec.partition_canonical_laplace(&omegas, &m).unwrap();
            assert_relative_eq!(lap, grand.coefficient(&m), max_relative = 1e-12);
        }
        // four odd-block particles exceed the pairing support
        assert!(matches!(
            spec.partition_canonical_laplace(&omegas, &[4, 0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn population_probabilities_sum_to_one() {
        let spec = monomial_spec(1.0, vec![1, 2], 4, 1.0);
        let cache = CoefficientCache::new();
        let scheme = QuadratureScheme::default();
        let omegas = spec.build_omegas(&cache, &scheme).unwrap();
        for z in [vec![1.0, 1.0], vec![2.0, 0.5]] {
            let probs = spec.population_probabilities(&omegas, &z).unwrap();
            let total: f64 = probs.iter().map(|(_, p)| p).sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-10);
            assert!(probs.iter().all(|(_, p)| *p >= 0.0));
        }
    }

    #[test]
    fn literal_convention_misplaces_multidegrees() {
        let spec = monomial_spec(1.0, vec![1], 2, 1.0);
        let cache = CoefficientCache::new();
        let scheme = QuadratureScheme::default();
        let omegas = spec.build_omegas(&cache, &scheme).unwrap();
        let squared = spec.partition_grand(&omegas).unwrap();
        let literal = spec
            .partition_grand_with_convention(&omegas, OddConvention::Literal)
            .unwrap();
        assert_relative_eq!(
            literal.coefficient(&[1]),
            squared.coefficient(&[2]),
            max_relative = 1e-14
        );
        assert_eq!(literal.coefficient(&[2]), 0.0);
        assert_eq!(squared.coefficient(&[1]), 0.0);
    }
}
