//! Correlation functions via marker extraction.
//!
//! Insertion points enter the species forms as nilpotent markers: the tuple
//! coefficient `c_t` becomes `c_t + sum_i marker_i w_j(xi_i) Wr_t(xi_i)`.
//! Expanding the same Berezin integral that yields the partition function
//! then produces, alongside each fugacity multidegree, a polynomial in the
//! markers; the term carrying *every* marker once is the correlation
//! numerator. Concretely,
//!
//! * canonical: `R_M(xi) = P(M, all markers) / P(M, no markers)`, the
//!   denominator being the canonical partition function `Z_M`;
//! * grand: the same ratio with each marker slice summed against the
//!   fugacities first.
//!
//! A third, structurally different route wedges the one-point insertion
//! forms directly against `exp(sum_j z_j omega_j)`; it must agree with the
//! slice route to rounding error and is kept as a cross-check.
//!
//! All routes require every species block length `L_j` to be even; a species
//! with odd block length has no single-particle form to insert.

use std::sync::Arc;

use crate::ensemble::{EnsembleSpec, OmegaForm};
use crate::error::{Error, Result};
use crate::exterior::{BasisWord, Form};
use crate::fugacity::TruncationRule;
use crate::insertion::{FugacityInsertionPolynomial, MAX_INSERTIONS};
use crate::poly::{wronskian_evaluator, WronskianEval};
use crate::scalar::ScalarRing;

/// Points at which particle densities are probed, listed per species.
/// Insertion labels are species-major: species 0's points come first,
/// numbered from 1.
#[derive(Debug, Clone)]
pub struct InsertionSet {
    points: Vec<Vec<f64>>,
}

impl InsertionSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let total: usize = points.iter().map(|p| p.len()).sum();
        if total == 0 {
            return Err(Error::InvalidArgument(
                "at least one insertion point required".into(),
            ));
        }
        if total > MAX_INSERTIONS as usize {
            return Err(Error::InvalidArgument(format!(
                "{total} insertion points exceed the limit {MAX_INSERTIONS}"
            )));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "insertion points must be finite".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn species_points(&self, j: usize) -> &[f64] {
        &self.points[j]
    }

    pub fn species_lists(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Number of insertions per species.
    pub fn counts(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.len() as u32).collect()
    }

    pub fn total(&self) -> usize {
        self.points.iter().map(|p| p.len()).sum()
    }

    /// First label (1-based) used by species `j`.
    fn first_label(&self, j: usize) -> u32 {
        1 + self.points[..j].iter().map(|p| p.len() as u32).sum::<u32>()
    }

    /// Marker mask with every insertion present.
    pub fn full_mask(&self) -> u64 {
        ((1u128 << self.total()) - 1) as u64
    }
}

fn check_setup(
    spec: &EnsembleSpec,
    omegas: &[OmegaForm],
    insertions: &InsertionSet,
) -> Result<()> {
    if insertions.points.len() != spec.species_count() {
        return Err(Error::InvalidArgument(format!(
            "insertion lists for {} species, ensemble has {}",
            insertions.points.len(),
            spec.species_count()
        )));
    }
    if omegas.len() != spec.species_count() {
        return Err(Error::InvalidArgument(format!(
            "expected {} species forms, got {}",
            spec.species_count(),
            omegas.len()
        )));
    }
    for j in 0..spec.species_count() {
        if spec.ell(j) % 2 != 0 {
            return Err(Error::Unsupported(format!(
                "correlation functions require even block lengths; species {j} has L = {}",
                spec.ell(j)
            )));
        }
    }
    Ok(())
}

/// Per-species, per-tuple Wronskian evaluators aligned with `om.tuples()`.
fn tuple_evaluators(spec: &EnsembleSpec, omegas: &[OmegaForm]) -> Result<Vec<Vec<WronskianEval>>> {
    omegas
        .iter()
        .map(|om| {
            om.tuples()
                .iter()
                .map(|t| wronskian_evaluator(spec.family(), t))
                .collect()
        })
        .collect()
}

/// The joint expansion: full Berezin integral of `exp(sum_j z_j omega~_j)`
/// where each tuple coefficient of `omega_j` is augmented with the marker
/// terms of that species' insertion points.
fn joint_grand(
    spec: &EnsembleSpec,
    omegas: &[OmegaForm],
    insertions: &InsertionSet,
) -> Result<FugacityInsertionPolynomial> {
    let k = spec.k_dim();
    let rule = Arc::new(TruncationRule::new(
        spec.charges().to_vec(),
        spec.total_charge(),
    )?);
    let evals = tuple_evaluators(spec, omegas)?;
    let mut total: Form<FugacityInsertionPolynomial> = Form::zero(k)?;
    for (j, om) in omegas.iter().enumerate() {
        let var = FugacityInsertionPolynomial::var((j + 1) as u32)?.with_rule(Arc::clone(&rule));
        let measure = spec.measure(j);
        let first = insertions.first_label(j);
        for (ti, t) in om.tuples().iter().enumerate() {
            let base = om.form().coefficient(BasisWord(t.bits()));
            let mut coeff = FugacityInsertionPolynomial::constant(base);
            for (i, &xi) in insertions.species_points(j).iter().enumerate() {
                let a = measure.weight(xi) * evals[j][ti].eval(xi);
                let marker = FugacityInsertionPolynomial::marker(first + i as u32)?;
                coeff = coeff.add(&marker.scale(a));
            }
            let lifted = var.mul(&coeff);
            total.add_term(BasisWord(t.bits()), lifted)?;
        }
    }
    Ok(total.exp_pruned(k)?.berezin_full())
}

/// Correlation function of a fixed population vector `M`:
/// the density of finding one particle of species `j` at each of its
/// insertion points, normalized so that integrating over one point of
/// species `j` yields `M_j - (already inserted)` times the lower
/// correlation.
pub fn correlation_canonical(
    spec: &EnsembleSpec,
    omegas: &[OmegaForm],
    insertions: &InsertionSet,
    populations: &[u32],
) -> Result<f64> {
    check_setup(spec, omegas, insertions)?;
    if populations.len() != spec.species_count() {
        return Err(Error::InvalidArgument(format!(
            "expected {} population entries, got {}",
            spec.species_count(),
            populations.len()
        )));
    }
    let reached: u64 = populations
        .iter()
        .zip(spec.charges())
        .map(|(&m, &q)| m as u64 * q as u64)
        .sum();
    if reached != spec.total_charge() as u64 {
        return Err(Error::Inadmissible(format!(
            "population {:?} carries total charge {reached}, ensemble requires {}",
            populations,
            spec.total_charge()
        )));
    }
    for (j, (&m, &inserted)) in populations.iter().zip(&insertions.counts()).enumerate() {
        if inserted > m {
            return Err(Error::InvalidArgument(format!(
                "species {j} has {m} particles but {inserted} insertion points"
            )));
        }
    }
    let joint = joint_grand(spec, omegas, insertions)?;
    let denom = joint.coefficient(populations, 0);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "partition function for population {populations:?} is {denom}"
        )));
    }
    Ok(joint.coefficient(populations, insertions.full_mask()) / denom)
}

/// Grand-canonical correlation function at the given fugacities: the
/// population-resolved numerators and denominators are summed against
/// `z^M` before taking the ratio.
pub fn correlation_grand(
    spec: &EnsembleSpec,
    omegas: &[OmegaForm],
    insertions: &InsertionSet,
    fugacities: &[f64],
) -> Result<f64> {
    check_setup(spec, omegas, insertions)?;
    let joint = joint_grand(spec, omegas, insertions)?;
    let denom = joint.fugacity_slice(0).evaluate(fugacities)?;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grand partition function is {denom} at fugacities {fugacities:?}"
        )));
    }
    let numer = joint
        .fugacity_slice(insertions.full_mask())
        .evaluate(fugacities)?;
    Ok(numer / denom)
}

/// Grand-canonical correlation by the wedge route: each insertion
/// contributes the numeric one-particle form
/// `z_j sum_t w_j(xi) Wr_t(xi) eps_t`, wedged against
/// `exp(sum_j z_j omega_j)`; the full Berezin integral of the product over
/// the one of the bare exponential is the same ratio as
/// [`correlation_grand`] and must match it to rounding error.
pub fn correlation_grand_wedge(
    spec: &EnsembleSpec,
    omegas: &[OmegaForm],
    insertions: &InsertionSet,
    fugacities: &[f64],
) -> Result<f64> {
    check_setup(spec, omegas, insertions)?;
    if fugacities.len() != spec.species_count() {
        return Err(Error::InvalidArgument(format!(
            "expected {} fugacities, got {}",
            spec.species_count(),
            fugacities.len()
        )));
    }
    let k = spec.k_dim();
    let evals = tuple_evaluators(spec, omegas)?;
    let mut exponent: Form<f64> = Form::zero(k)?;
    for (j, om) in omegas.iter().enumerate() {
        exponent = exponent.add(&om.form().scale_real(fugacities[j]))?;
    }
    let bare = exponent.exp_pruned(k)?;
    let denom = bare.berezin_full();
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grand partition function is {denom} at fugacities {fugacities:?}"
        )));
    }
    let mut product = bare;
    for (j, om) in omegas.iter().enumerate() {
        let measure = spec.measure(j);
        for &xi in insertions.species_points(j) {
            let mut one_point: Form<f64> = Form::zero(k)?;
            for (ti, t) in om.tuples().iter().enumerate() {
                one_point.add_term(
                    BasisWord(t.bits()),
                    fugacities[j] * measure.weight(xi) * evals[j][ti].eval(xi),
                )?;
            }
            product = product.wedge(&one_point)?;
        }
    }
    Ok(product.berezin_full() / denom)
}
