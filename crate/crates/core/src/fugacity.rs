//! Sparse polynomials in the per-species expansion variables, usable as
//! coefficients of exterior forms.
//!
//! Multidegree keys are stored with trailing zeros trimmed, so the constant
//! term always has the empty key and polynomials over different species
//! counts compose without padding. A polynomial may carry a truncation rule
//! that discards multidegrees whose weighted total exceeds a cap; products
//! apply it eagerly, which keeps series expansions from growing past the
//! terms that can ever matter.

use crate::error::{Error, Result};
use crate::scalar::ScalarRing;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Discards any multidegree `m` with `Σ m_j * weight_j > cap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationRule {
    pub weights: Vec<u32>,
    pub cap: u32,
}

impl TruncationRule {
    pub fn new(weights: Vec<u32>, cap: u32) -> Result<Self> {
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArgument(
                "truncation weights must be positive".into(),
            ));
        }
        Ok(Self { weights, cap })
    }

    /// Whether a (trimmed) multidegree survives truncation. Degrees beyond
    /// the weight list are weighted 1.
    pub fn keeps(&self, degrees: &[u32]) -> bool {
        let mut total: u64 = 0;
        for (j, &d) in degrees.iter().enumerate() {
            let w = self.weights.get(j).copied().unwrap_or(1);
            total += u64::from(d) * u64::from(w);
            if total > u64::from(self.cap) {
                return false;
            }
        }
        true
    }
}

fn trim(mut degrees: Vec<u32>) -> Vec<u32> {
    while degrees.last() == Some(&0) {
        degrees.pop();
    }
    degrees
}

/// Sparse real polynomial in countably many expansion variables, indexed
/// from 1. Never stores zero coefficients.
#[derive(Debug, Clone)]
pub struct FugacityPolynomial {
    terms: BTreeMap<Vec<u32>, f64>,
    rule: Option<Arc<TruncationRule>>,
}

impl PartialEq for FugacityPolynomial {
    /// Equality looks at terms only; the truncation rule is evaluation
    /// context, not value.
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl FugacityPolynomial {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
            rule: None,
        }
    }

    pub fn constant(value: f64) -> Self {
        let mut terms = BTreeMap::new();
        if value != 0.0 {
            terms.insert(Vec::new(), value);
        }
        Self { terms, rule: None }
    }

    /// The variable for species `j` (1-based).
    pub fn var(j: u32) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidArgument(
                "species variables are numbered from 1".into(),
            ));
        }
        let mut degrees = vec![0; j as usize];
        degrees[j as usize - 1] = 1;
        Ok(Self::monomial(&degrees, 1.0))
    }

    pub fn monomial(degrees: &[u32], coefficient: f64) -> Self {
        let mut terms = BTreeMap::new();
        if coefficient != 0.0 {
            terms.insert(trim(degrees.to_vec()), coefficient);
        }
        Self { terms, rule: None }
    }

    pub fn with_rule(mut self, rule: Arc<TruncationRule>) -> Self {
        self.terms.retain(|k, _| rule.keeps(k));
        self.rule = Some(rule);
        self
    }

    pub fn rule(&self) -> Option<&Arc<TruncationRule>> {
        self.rule.as_ref()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Coefficient of the given multidegree (0.0 if absent).
    pub fn coefficient(&self, degrees: &[u32]) -> f64 {
        self.terms.get(&trim(degrees.to_vec())).copied().unwrap_or(0.0)
    }

    /// All multidegrees present, padded to `width` entries.
    pub fn multidegrees(&self, width: usize) -> Vec<Vec<u32>> {
        self.terms
            .keys()
            .map(|k| {
                let mut m = k.clone();
                m.resize(m.len().max(width), 0);
                m
            })
            .collect()
    }

    /// Evaluates at the given variable values.
    pub fn evaluate(&self, values: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (degrees, &c) in &self.terms {
            if degrees.len() > values.len() {
                return Err(Error::InvalidArgument(format!(
                    "polynomial uses variable {} but only {} values were given",
                    degrees.len(),
                    values.len()
                )));
            }
            let mut term = c;
            for (j, &d) in degrees.iter().enumerate() {
                term *= values[j].powi(d as i32);
            }
            total += term;
        }
        Ok(total)
    }

    fn merged_rule(&self, other: &Self) -> Option<Arc<TruncationRule>> {
        match (&self.rule, &other.rule) {
            (Some(r), _) => Some(Arc::clone(r)),
            (_, Some(r)) => Some(Arc::clone(r)),
            (None, None) => None,
        }
    }

    fn insert_term(terms: &mut BTreeMap<Vec<u32>, f64>, key: Vec<u32>, value: f64) {
        if value == 0.0 {
            return;
        }
        match terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = *e.get() + value;
                if sum == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }
}

impl ScalarRing for FugacityPolynomial {
    fn zero() -> Self {
        FugacityPolynomial::zero()
    }

    fn one() -> Self {
        FugacityPolynomial::constant(1.0)
    }

    fn add(&self, other: &Self) -> Self {
        let rule = self.merged_rule(other);
        let mut terms = self.terms.clone();
        for (k, &v) in &other.terms {
            Self::insert_term(&mut terms, k.clone(), v);
        }
        if let Some(r) = &rule {
            terms.retain(|k, _| r.keeps(k));
        }
        Self { terms, rule }
    }

    fn mul(&self, other: &Self) -> Self {
        let rule = self.merged_rule(other);
        let mut terms = BTreeMap::new();
        for (ka, &va) in &self.terms {
            for (kb, &vb) in &other.terms {
                let mut key = ka.clone();
                key.resize(key.len().max(kb.len()), 0);
                for (j, &d) in kb.iter().enumerate() {
                    key[j] += d;
                }
                if let Some(r) = &rule {
                    if !r.keeps(&key) {
                        continue;
                    }
                }
                Self::insert_term(&mut terms, key, va * vb);
            }
        }
        Self { terms, rule }
    }

    fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, &v)| (k.clone(), -v)).collect(),
            rule: self.rule.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self {
                terms: BTreeMap::new(),
                rule: self.rule.clone(),
            };
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, &v)| (k.clone(), factor * v))
                .collect(),
            rule: self.rule.clone(),
        }
    }
}
