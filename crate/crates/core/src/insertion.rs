//! Multilinear bookkeeping polynomials for point insertions.
//!
//! Each insertion gets a marker variable; a correlation value is read off as
//! the coefficient of the product of all markers. Squares of a marker can
//! never contribute to that coefficient, so products drop any term where the
//! same marker appears on both sides — the ring is multilinear by
//! construction, which keeps exterior-algebra expansions small.

use crate::error::{Error, Result};
use crate::fugacity::{FugacityPolynomial, TruncationRule};
use crate::scalar::ScalarRing;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Maximum number of simultaneous insertion markers.
pub const MAX_INSERTIONS: u32 = 64;

fn mask_for(label: u32) -> Result<u64> {
    if label == 0 || label > MAX_INSERTIONS {
        return Err(Error::InvalidArgument(format!(
            "insertion labels run from 1 to {MAX_INSERTIONS}, got {label}"
        )));
    }
    Ok(1u64 << (label - 1))
}

/// Multilinear real polynomial in insertion markers. The key's bit `i-1`
/// records that marker `i` is present. Never stores zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertionPolynomial {
    terms: BTreeMap<u64, f64>,
}

impl InsertionPolynomial {
    pub fn constant(value: f64) -> Self {
        let mut terms = BTreeMap::new();
        if value != 0.0 {
            terms.insert(0, value);
        }
        Self { terms }
    }

    /// The marker variable for insertion `label` (1-based).
    pub fn marker(label: u32) -> Result<Self> {
        let mut terms = BTreeMap::new();
        terms.insert(mask_for(label)?, 1.0);
        Ok(Self { terms })
    }

    pub fn coefficient(&self, mask: u64) -> f64 {
        self.terms.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn insert_term(terms: &mut BTreeMap<u64, f64>, key: u64, value: f64) {
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

impl ScalarRing for InsertionPolynomial {
    fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    fn one() -> Self {
        Self::constant(1.0)
    }

    fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (&k, &v) in &other.terms {
            Self::insert_term(&mut terms, k, v);
        }
        Self { terms }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (&ka, &va) in &self.terms {
            for (&kb, &vb) in &other.terms {
                if ka & kb != 0 {
                    continue; // a marker squared cannot reach the readout
                }
                Self::insert_term(&mut terms, ka | kb, va * vb);
            }
        }
        Self { terms }
    }

    fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, &v)| (k, -v)).collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return ScalarRing::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&k, &v)| (k, factor * v))
                .collect(),
        }
    }
}

/// Joint polynomial in expansion variables and insertion markers: the scalar
/// ring for grand-ensemble correlation readouts. Expansion multidegrees obey
/// an optional truncation rule exactly as in [`FugacityPolynomial`]; marker
/// masks are multilinear exactly as in [`InsertionPolynomial`].
#[derive(Debug, Clone)]
pub struct FugacityInsertionPolynomial {
    terms: BTreeMap<(Vec<u32>, u64), f64>,
    rule: Option<Arc<TruncationRule>>,
}

impl PartialEq for FugacityInsertionPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

fn trim(mut degrees: Vec<u32>) -> Vec<u32> {
    while degrees.last() == Some(&0) {
        degrees.pop();
    }
    degrees
}

impl FugacityInsertionPolynomial {
    pub fn constant(value: f64) -> Self {
        let mut terms = BTreeMap::new();
        if value != 0.0 {
            terms.insert((Vec::new(), 0), value);
        }
        Self { terms, rule: None }
    }

    /// Embeds a pure expansion polynomial (no markers).
    pub fn from_fugacity(p: &FugacityPolynomial) -> Self {
        let terms = p
            .terms()
            .map(|(k, v)| ((k.to_vec(), 0u64), v))
            .collect();
        Self {
            terms,
            rule: p.rule().cloned(),
        }
    }

    /// The marker variable for insertion `label` (1-based), no expansion part.
    pub fn marker(label: u32) -> Result<Self> {
        let mut terms = BTreeMap::new();
        terms.insert((Vec::new(), mask_for(label)?), 1.0);
        Ok(Self { terms, rule: None })
    }

    /// The expansion variable for species `j` (1-based).
    pub fn var(j: u32) -> Result<Self> {
        Ok(Self::from_fugacity(&FugacityPolynomial::var(j)?))
    }

    pub fn with_rule(mut self, rule: Arc<TruncationRule>) -> Self {
        self.terms.retain(|(k, _), _| rule.keeps(k));
        self.rule = Some(rule);
        self
    }

    pub fn coefficient(&self, degrees: &[u32], mask: u64) -> f64 {
        self.terms
            .get(&(trim(degrees.to_vec()), mask))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Restricts to terms with exactly the given marker mask, returning the
    /// expansion polynomial multiplying it.
    pub fn fugacity_slice(&self, mask: u64) -> FugacityPolynomial {
        let mut out = FugacityPolynomial::zero();
        for ((k, m), &v) in &self.terms {
            if *m == mask {
                out = out.add(&FugacityPolynomial::monomial(k, v));
            }
        }
        if let Some(r) = &self.rule {
            out = out.with_rule(Arc::clone(r));
        }
        out
    }

    fn merged_rule(&self, other: &Self) -> Option<Arc<TruncationRule>> {
        match (&self.rule, &other.rule) {
            (Some(r), _) => Some(Arc::clone(r)),
            (_, Some(r)) => Some(Arc::clone(r)),
            (None, None) => None,
        }
    }

    fn insert_term(terms: &mut BTreeMap<(Vec<u32>, u64), f64>, key: (Vec<u32>, u64), value: f64) {
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

impl ScalarRing for FugacityInsertionPolynomial {
    fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
            rule: None,
        }
    }

    fn one() -> Self {
        Self::constant(1.0)
    }

    fn add(&self, other: &Self) -> Self {
        let rule = self.merged_rule(other);
        let mut terms = self.terms.clone();
        for (k, &v) in &other.terms {
            Self::insert_term(&mut terms, k.clone(), v);
        }
        if let Some(r) = &rule {
            terms.retain(|(k, _), _| r.keeps(k));
        }
        Self { terms, rule }
    }

    fn mul(&self, other: &Self) -> Self {
        let rule = self.merged_rule(other);
        let mut terms = BTreeMap::new();
        for ((ka, ma), &va) in &self.terms {
            for ((kb, mb), &vb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
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
                Self::insert_term(&mut terms, (key, ma | mb), va * vb);
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
