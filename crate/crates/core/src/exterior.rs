//! Sparse exterior algebra on up to 63 generators.
//!
//! Basis words are bitmasks: bit i-1 set means generator `e_i` is present,
//! always in increasing order, so every word is stored canonically and signs
//! live entirely in the operations. Forms are sparse maps from basis words to
//! coefficients in a pluggable commutative ring; the zero coefficient is never
//! stored.
//!
//! The Grassmann integral over the full volume word is what turns a form
//! exponential into a partition function, so `berezin_full`, `exp` and the
//! (hyper)Pfaffian helpers are the heart of the engine.

use crate::error::{Error, Result};
use crate::increasing::IncreasingMap;
use crate::scalar::ScalarRing;
use std::collections::BTreeMap;

/// Maximum number of generators; words must fit in a u64.
pub const MAX_DIM: u32 = 63;

/// A canonical basis word: bit i-1 set means `e_i` participates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisWord(pub u64);

impl BasisWord {
    pub const EMPTY: BasisWord = BasisWord(0);

    /// Word containing all generators `e_1..e_dim`.
    pub fn volume(dim: u32) -> Self {
        debug_assert!(dim <= MAX_DIM);
        if dim == 0 {
            BasisWord(0)
        } else {
            BasisWord(u64::MAX >> (64 - dim))
        }
    }

    pub fn from_map(t: &IncreasingMap) -> Self {
        BasisWord(t.bits())
    }

    /// Builds a word from 1-based generator indices, which must be strictly
    /// increasing.
    pub fn from_generators(generators: &[u32]) -> Result<Self> {
        Ok(Self::from_map(&IncreasingMap::new(generators.to_vec())?))
    }

    pub fn grade(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, k: u32) -> bool {
        k >= 1 && k <= MAX_DIM && self.0 & (1u64 << (k - 1)) != 0
    }

    /// 1-based generator indices in increasing order.
    pub fn generators(self) -> Vec<u32> {
        IncreasingMap::from_bits(self.0).values().to_vec()
    }

    pub fn fits(self, dim: u32) -> bool {
        if dim >= 64 {
            return true;
        }
        self.0 >> dim == 0
    }
}

/// Sign of the reordering that merges two disjoint sorted words: the parity
/// of pairs (i in a, j in b) with i > j.
pub(crate) fn merge_sign(a: u64, b: u64) -> i32 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros(); // 0-based position of a generator of b
        inversions += (a >> j >> 1).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A sparse form with coefficients in `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form<S: ScalarRing> {
    dim: u32,
    terms: BTreeMap<BasisWord, S>,
}

impl<S: ScalarRing> Form<S> {
    fn check_dim(dim: u32) -> Result<()> {
        if dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "form dimension {dim} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        Ok(())
    }

    pub fn zero(dim: u32) -> Result<Self> {
        Self::check_dim(dim)?;
        Ok(Self {
            dim,
            terms: BTreeMap::new(),
        })
    }

    /// The grade-0 form with the given coefficient.
    pub fn constant(dim: u32, value: S) -> Result<Self> {
        let mut f = Self::zero(dim)?;
        if !value.is_zero() {
            f.terms.insert(BasisWord::EMPTY, value);
        }
        Ok(f)
    }

    /// Builds a form from (word, coefficient) pairs, accumulating duplicates
    /// and dropping zeros.
    pub fn from_terms(dim: u32, pairs: impl IntoIterator<Item = (BasisWord, S)>) -> Result<Self> {
        let mut f = Self::zero(dim)?;
        for (word, coeff) in pairs {
            f.add_term(word, coeff)?;
        }
        Ok(f)
    }

    /// Adds `coeff * word` in place.
    pub fn add_term(&mut self, word: BasisWord, coeff: S) -> Result<()> {
        if !word.fits(self.dim) {
            return Err(Error::InvalidArgument(format!(
                "basis word {:#b} does not fit in dimension {}",
                word.0, self.dim
            )));
        }
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisWord, &S)> {
        self.terms.iter()
    }

    /// Coefficient of a word; the ring zero when absent.
    pub fn coefficient(&self, word: BasisWord) -> S {
        self.terms.get(&word).cloned().unwrap_or_else(S::zero)
    }

    /// Smallest grade present; `None` for the zero form.
    pub fn min_grade(&self) -> Option<u32> {
        self.terms.keys().map(|w| w.grade()).min()
    }

    /// `Some(g)` when every term has grade g (the zero form is not
    /// homogeneous of any grade).
    pub fn homogeneous_grade(&self) -> Option<u32> {
        let mut grades = self.terms.keys().map(|w| w.grade());
        let first = grades.next()?;
        grades.all(|g| g == first).then_some(first)
    }

    /// The part of the form with the given grade.
    pub fn component(&self, grade: u32) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.grade() == grade)
                .map(|(w, c)| (*w, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidArgument(format!(
                "cannot add forms of dimensions {} and {}",
                self.dim, rhs.dim
            )));
        }
        let mut out = self.clone();
        for (word, coeff) in &rhs.terms {
            out.add_term(*word, coeff.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(w, c)| (*w, c.neg())).collect(),
        }
    }

    /// Multiplies every coefficient by a ring element.
    pub fn scale(&self, s: &S) -> Self {
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let prod = c.mul(s);
            if !prod.is_zero() {
                terms.insert(*w, prod);
            }
        }
        Self {
            dim: self.dim,
            terms,
        }
    }

    /// Multiplies every coefficient by a real number.
    pub fn scale_real(&self, factor: f64) -> Self {
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let prod = c.scale(factor);
            if !prod.is_zero() {
                terms.insert(*w, prod);
            }
        }
        Self {
            dim: self.dim,
            terms,
        }
    }

    /// Rebuilds the form over another ring by mapping each coefficient.
    pub fn map_coefficients<T: ScalarRing>(&self, f: impl Fn(&S) -> T) -> Form<T> {
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let mapped = f(c);
            if !mapped.is_zero() {
                terms.insert(*w, mapped);
            }
        }
        Form {
            dim: self.dim,
            terms,
        }
    }

    /// Graded product. Words sharing a generator annihilate; surviving pairs
    /// pick up the merge sign of interleaving the two sorted words.
    pub fn wedge(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidArgument(format!(
                "cannot wedge forms of dimensions {} and {}",
                self.dim, rhs.dim
            )));
        }
        self.wedge_pruned(rhs, u32::MAX)
    }

    /// Wedge that drops any product term whose grade exceeds `max_grade`.
    fn wedge_pruned(&self, rhs: &Self, max_grade: u32) -> Result<Self> {
        let mut out = Self::zero(self.dim)?;
        for (wa, ca) in &self.terms {
            for (wb, cb) in &rhs.terms {
                if wa.0 & wb.0 != 0 {
                    continue;
                }
                let word = BasisWord(wa.0 | wb.0);
                if word.grade() > max_grade {
                    continue;
                }
                let coeff = ca.mul(cb);
                if coeff.is_zero() {
                    continue;
                }
                let signed = if merge_sign(wa.0, wb.0) >= 0 {
                    coeff
                } else {
                    coeff.neg()
                };
                out.add_term(word, signed)?;
            }
        }
        Ok(out)
    }

    /// Left interior derivative with respect to generator `e_k` (1-based).
    /// A word containing `e_k` at sorted position α contributes its
    /// complement with sign (-1)^(α-1); words without `e_k` are dropped.
    pub fn berezin_partial(&self, k: u32) -> Result<Self> {
        if k == 0 || k > self.dim {
            return Err(Error::InvalidArgument(format!(
                "generator index {k} out of range 1..={}",
                self.dim
            )));
        }
        let bit = 1u64 << (k - 1);
        let mut out = Self::zero(self.dim)?;
        for (word, coeff) in &self.terms {
            if word.0 & bit == 0 {
                continue;
            }
            let below = (word.0 & (bit - 1)).count_ones();
            let signed = if below % 2 == 0 {
                coeff.clone()
            } else {
                coeff.neg()
            };
            out.add_term(BasisWord(word.0 & !bit), signed)?;
        }
        Ok(out)
    }

    /// Integral against the full volume word: the coefficient of
    /// `e_1 ∧ ... ∧ e_K`, or the ring zero when absent. Equals the chain of
    /// `berezin_partial` over `e_1, ..., e_K` applied in that order.
    pub fn berezin_full(&self) -> S {
        self.coefficient(BasisWord::volume(self.dim))
    }

    /// Exponential `sum_m w^∧m / m!`. Requires every term to have even grade
    /// at least 2, which makes the series finite and the factors commute.
    pub fn exp(&self) -> Result<Self> {
        self.exp_pruned(u32::MAX)
    }

    /// Exponential that keeps only terms of grade `<= max_grade`; with
    /// `max_grade = dim` this computes exactly what `berezin_full` can see.
    pub fn exp_pruned(&self, max_grade: u32) -> Result<Self> {
        for word in self.terms.keys() {
            let g = word.grade();
            if g == 0 || g % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "exponential requires even grades >= 2; found a term of grade {g}"
                )));
            }
        }
        let cap = max_grade.min(self.dim);
        let mut result = Form::constant(self.dim, S::one())?;
        let mut power = Form::constant(self.dim, S::one())?;
        let mut m = 1u32;
        loop {
            power = power.wedge_pruned(self, cap)?.scale_real(1.0 / f64::from(m));
            if power.is_zero() {
                break;
            }
            result = result.add(&power)?;
            m += 1;
            if m > self.dim {
                break;
            }
        }
        Ok(result)
    }
}

/// Sign of an increasing map inside dimension `dim`: the signature of the
/// permutation obtained by concatenating the map's range with its complement.
pub fn sgn_increasing(t: &IncreasingMap, dim: u32) -> Result<i32> {
    if t.max_value() > dim {
        return Err(Error::InvalidArgument(format!(
            "map {t} does not fit in dimension {dim}"
        )));
    }
    let complement = t.complement(dim)?;
    let concat: Vec<u32> = t
        .values()
        .iter()
        .chain(complement.values())
        .copied()
        .collect();
    Ok(permutation_sign(&concat))
}

/// Sign of a tuple of increasing maps: zero when any two ranges overlap,
/// otherwise the signature of the concatenation of all ranges in order.
pub fn sgn_map_tuple(ts: &[&IncreasingMap], dim: u32) -> Result<i32> {
    let mut seen = 0u64;
    let mut concat = Vec::new();
    for t in ts {
        if t.max_value() > dim {
            return Err(Error::InvalidArgument(format!(
                "map {t} does not fit in dimension {dim}"
            )));
        }
        let bits = t.bits();
        if seen & bits != 0 {
            return Ok(0);
        }
        seen |= bits;
        concat.extend_from_slice(t.values());
    }
    Ok(permutation_sign(&concat))
}

/// Inversion parity of a sequence of distinct values.
fn permutation_sign(values: &[u32]) -> i32 {
    let mut inversions = 0usize;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] > values[j] {
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

/// Dense antisymmetric matrix storing only the strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix {
    n: usize,
    upper: Vec<f64>, // row-major strict upper triangle
}

impl AntisymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * (n.saturating_sub(1)) / 2],
        }
    }

    fn upper_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        // offset of row i = i*n - i*(i+1)/2 - i entries before column i+1
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry (i, j), 0-based, with antisymmetry applied.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[self.upper_index(i, j)],
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => -self.upper[self.upper_index(j, i)],
        }
    }

    /// Sets entry (i, j) with i < j (and (j, i) implicitly).
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < j && j < self.n, "set requires i < j < n");
        let idx = self.upper_index(i, j);
        self.upper[idx] = value;
    }

    /// Reads a homogeneous 2-form as a matrix: entry (i, j) is the
    /// coefficient of `e_{i+1} ∧ e_{j+1}`.
    pub fn from_two_form(form: &Form<f64>) -> Result<Self> {
        if !form.is_zero() && form.homogeneous_grade() != Some(2) {
            return Err(Error::InvalidArgument(
                "matrix form of a 2-form requires a homogeneous grade-2 form".into(),
            ));
        }
        let n = form.dim() as usize;
        let mut a = Self::zeros(n);
        for (word, coeff) in form.terms() {
            let gens = word.generators();
            a.set(gens[0] as usize - 1, gens[1] as usize - 1, *coeff);
        }
        Ok(a)
    }

    /// The 2-form whose matrix this is.
    pub fn to_two_form(&self) -> Result<Form<f64>> {
        let mut form = Form::zero(self.n as u32)?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    let word = BasisWord((1u64 << i) | (1u64 << j));
                    form.add_term(word, v)?;
                }
            }
        }
        Ok(form)
    }

    /// Dense square matrix, for determinant cross-checks.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Pfaffian by recursive expansion along the first remaining row.
    pub fn pfaffian(&self) -> Result<f64> {
        if self.n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "pfaffian requires even order, got {}",
                self.n
            )));
        }
        let active: Vec<usize> = (0..self.n).collect();
        Ok(self.pfaffian_rec(&active))
    }

    fn pfaffian_rec(&self, active: &[usize]) -> f64 {
        if active.is_empty() {
            return 1.0;
        }
        let i0 = active[0];
        let mut total = 0.0;
        for (pos, &j) in active[1..].iter().enumerate() {
            let entry = self.get(i0, j);
            if entry == 0.0 {
                continue;
            }
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let rest: Vec<usize> = active[1..]
                .iter()
                .copied()
                .filter(|&r| r != j)
                .collect();
            total += sign * entry * self.pfaffian_rec(&rest);
        }
        total
    }
}

/// Pfaffian of a homogeneous form of grade `k` dividing the dimension `K`:
/// the volume coefficient of `w^∧(K/k) / (K/k)!`. For `k = 2` this is the
/// matrix Pfaffian.
pub fn hyperpfaffian(w: &Form<f64>, k: u32) -> Result<f64> {
    if k == 0 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "hyperpfaffian grade must be even and positive, got {k}"
        )));
    }
    if w.dim() % k != 0 {
        return Err(Error::InvalidArgument(format!(
            "grade {k} does not divide dimension {}",
            w.dim()
        )));
    }
    if !w.is_zero() && w.homogeneous_grade() != Some(k) {
        return Err(Error::InvalidArgument(format!(
            "hyperpfaffian requires a homogeneous form of grade {k}"
        )));
    }
    Ok(w.exp_pruned(w.dim())?.berezin_full())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn f(dim: u32, pairs: &[(&[u32], f64)]) -> Form<f64> {
        Form::from_terms(
            dim,
            pairs
                .iter()
                .map(|(gens, c)| (BasisWord::from_generators(gens).unwrap(), *c)),
        )
        .unwrap()
    }

    #[test]
    fn wedge_basic_sign() {
        // e1 ∧ e2 = -(e2 ∧ e1), e ∧ e = 0
        let e1 = f(3, &[(&[1], 1.0)]);
        let e2 = f(3, &[(&[2], 1.0)]);
        let a = e1.wedge(&e2).unwrap();
        let b = e2.wedge(&e1).unwrap();
        assert_eq!(a.coefficient(BasisWord::from_generators(&[1, 2]).unwrap()), 1.0);
        assert_eq!(b.coefficient(BasisWord::from_generators(&[1, 2]).unwrap()), -1.0);
        assert!(e1.wedge(&e1).unwrap().is_zero());
    }

    #[test]
    fn wedge_spec_case() {
        // (2 e1 + 3 e23) ∧ e2 = 2 e12 with the e23 part annihilated
        let lhs = f(3, &[(&[1], 2.0), (&[2, 3], 3.0)]);
        let rhs = f(3, &[(&[2], 1.0)]);
        let prod = lhs.wedge(&rhs).unwrap();
        assert_eq!(prod.term_count(), 1);
        assert_eq!(
            prod.coefficient(BasisWord::from_generators(&[1, 2]).unwrap()),
            2.0
        );
    }

    #[test]
    fn wedge_dim_mismatch_rejected() {
        let a = f(3, &[(&[1], 1.0)]);
        let b = f(4, &[(&[1], 1.0)]);
        assert!(a.wedge(&b).is_err());
    }

    #[test]
    fn graded_anticommutativity() {
        // a ∧ b = (-1)^(|a||b|) b ∧ a on homogeneous forms
        let a = f(5, &[(&[1, 3], 2.0), (&[2, 5], -1.0)]); // grade 2
        let b = f(5, &[(&[4], 3.0), (&[2], 1.0)]); // grade 1
        assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        let c = f(5, &[(&[5], 2.0)]); // grade 1
        assert_eq!(b.wedge(&c).unwrap(), c.wedge(&b).unwrap().neg());
    }

    #[test]
    fn berezin_partial_signs() {
        // d/de2 (e1 ∧ e2 ∧ e3): e2 sits at position 2, sign (-1)^(2-1) = -1
        let w = f(3, &[(&[1, 2, 3], 1.0)]);
        let d = w.berezin_partial(2).unwrap();
        assert_eq!(
            d.coefficient(BasisWord::from_generators(&[1, 3]).unwrap()),
            -1.0
        );
        // absent generator kills the term
        assert!(f(3, &[(&[1, 3], 1.0)]).berezin_partial(2).unwrap().is_zero());
        assert!(w.berezin_partial(0).is_err());
        assert!(w.berezin_partial(4).is_err());
    }

    #[test]
    fn berezin_full_matches_iterated_partials() {
        let w = f(4, &[(&[1, 2, 3, 4], 2.5), (&[1, 2], 7.0), (&[], 3.0)]);
        let mut it = w.clone();
        for k in 1..=4 {
            it = it.berezin_partial(k).unwrap();
        }
        assert_eq!(w.berezin_full(), 2.5);
        assert_eq!(it.coefficient(BasisWord::EMPTY), 2.5);
        // volume word in dimension 0: coefficient of the empty word
        let unit = Form::constant(0, 4.0).unwrap();
        assert_eq!(unit.berezin_full(), 4.0);
    }

    #[test]
    fn volume_signature() {
        // e_{σ(1)} ∧ ... ∧ e_{σ(K)} integrates to sgn σ
        let sigma = [3u32, 1, 4, 2]; // inversions: (3,1),(3,2),(4,2) -> odd
        let mut w = Form::constant(4, 1.0).unwrap();
        for &s in &sigma {
            w = w.wedge(&f(4, &[(&[s], 1.0)])).unwrap();
        }
        assert_eq!(w.berezin_full(), -1.0);
    }

    #[test]
    fn component_and_grades() {
        let w = f(4, &[(&[1, 2], 1.0), (&[3], 2.0), (&[], 5.0)]);
        assert_eq!(w.component(2).term_count(), 1);
        assert_eq!(w.component(1).term_count(), 1);
        assert_eq!(w.component(0).term_count(), 1);
        assert_eq!(w.min_grade(), Some(0));
        assert_eq!(w.homogeneous_grade(), None);
        assert_eq!(f(4, &[(&[1, 2], 1.0)]).homogeneous_grade(), Some(2));
    }

    #[test]
    fn exp_two_form_pair() {
        // exp(a e12 + b e34) has volume coefficient a*b
        let w = f(4, &[(&[1, 2], 2.0), (&[3, 4], 3.0)]);
        let e = w.exp().unwrap();
        assert_eq!(e.coefficient(BasisWord::EMPTY), 1.0);
        assert_eq!(e.berezin_full(), 6.0);
    }

    #[test]
    fn exp_rejects_bad_grades() {
        assert!(f(3, &[(&[1], 1.0)]).exp().is_err());
        assert!(f(3, &[(&[], 1.0)]).exp().is_err());
        assert!(f(4, &[(&[1, 2], 1.0)]).exp().is_ok());
    }

    #[test]
    fn exp_inverse() {
        let w = f(6, &[(&[1, 2], 0.7), (&[3, 4], -1.3), (&[2, 5], 0.4), (&[1, 4, 5, 6], 0.9)]);
        let prod = w.exp().unwrap().wedge(&w.neg().exp().unwrap()).unwrap();
        assert_relative_eq!(prod.coefficient(BasisWord::EMPTY), 1.0, max_relative = 1e-14);
        for (word, coeff) in prod.terms() {
            if *word != BasisWord::EMPTY {
                assert!(coeff.abs() < 1e-12, "residual term {word:?} = {coeff}");
            }
        }
    }

    #[test]
    fn exp_pruned_agrees_on_volume() {
        let w = f(6, &[(&[1, 2], 0.5), (&[3, 4], 2.0), (&[5, 6], -1.0), (&[1, 4], 0.25)]);
        assert_eq!(
            w.exp().unwrap().berezin_full(),
            w.exp_pruned(6).unwrap().berezin_full()
        );
    }

    #[test]
    fn sgn_increasing_cases() {
        let t = IncreasingMap::new(vec![1, 3]).unwrap();
        assert_eq!(sgn_increasing(&t, 4).unwrap(), -1); // (1,3,2,4) has one inversion
        let u = IncreasingMap::new(vec![2, 4]).unwrap();
        assert_eq!(sgn_increasing(&u, 4).unwrap(), -1); // (2,4,1,3) has three
        let full = IncreasingMap::new(vec![1, 2, 3]).unwrap();
        assert_eq!(sgn_increasing(&full, 3).unwrap(), 1);
        assert!(sgn_increasing(&u, 3).is_err());
    }

    #[test]
    fn sgn_increasing_matches_wedge_with_complement() {
        for dim in 1..=6u32 {
            for len in 0..=dim as usize {
                for t in IncreasingMap::all(len, dim) {
                    let c = t.complement(dim).unwrap();
                    let w = Form::<f64>::from_terms(dim, [(BasisWord::from_map(&t), 1.0)])
                        .unwrap()
                        .wedge(&Form::from_terms(dim, [(BasisWord::from_map(&c), 1.0)]).unwrap())
                        .unwrap();
                    assert_eq!(
                        w.berezin_full(),
                        f64::from(sgn_increasing(&t, dim).unwrap()),
                        "t = {t}, dim = {dim}"
                    );
                }
            }
        }
    }

    #[test]
    fn sgn_map_tuple_cases() {
        let a = IncreasingMap::new(vec![1, 2]).unwrap();
        let b = IncreasingMap::new(vec![3, 4]).unwrap();
        let c = IncreasingMap::new(vec![2, 3]).unwrap();
        assert_eq!(sgn_map_tuple(&[&a, &b], 4).unwrap(), 1); // standard order
        assert_eq!(sgn_map_tuple(&[&b, &a], 4).unwrap(), 1); // even block swap
        assert_eq!(sgn_map_tuple(&[&a, &c], 4).unwrap(), 0); // overlap
        let s = IncreasingMap::new(vec![2]).unwrap();
        let t = IncreasingMap::new(vec![1]).unwrap();
        assert_eq!(sgn_map_tuple(&[&s, &t], 2).unwrap(), -1);
    }

    #[test]
    fn pfaffian_small_cases() {
        let mut a = AntisymmetricMatrix::zeros(2);
        a.set(0, 1, 3.0);
        assert_eq!(a.pfaffian().unwrap(), 3.0);

        // pf = a12 a34 - a13 a24 + a14 a23 = 1*1 - 2*1 + 0*0 = -1
        let mut b = AntisymmetricMatrix::zeros(4);
        b.set(0, 1, 1.0);
        b.set(0, 2, 2.0);
        b.set(1, 3, 1.0);
        b.set(2, 3, 1.0);
        assert_eq!(b.pfaffian().unwrap(), -1.0);

        assert!(AntisymmetricMatrix::zeros(3).pfaffian().is_err());
        // a zero row forces pf = 0
        let mut z = AntisymmetricMatrix::zeros(4);
        z.set(0, 1, 5.0);
        assert_eq!(z.pfaffian().unwrap(), 0.0);
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let mut a = AntisymmetricMatrix::zeros(6);
        let vals = [0.5, -1.0, 2.0, 0.3, -0.7, 1.1, 0.9, -2.2, 0.4, 1.7, -0.6, 0.8, 1.3, -0.2, 2.5];
        let mut it = vals.iter();
        for i in 0..6 {
            for j in i + 1..6 {
                a.set(i, j, *it.next().unwrap());
            }
        }
        let pf = a.pfaffian().unwrap();
        let det = a.to_dense().determinant();
        assert_relative_eq!(pf * pf, det, max_relative = 1e-12);
    }

    #[test]
    fn hyperpfaffian_of_two_form_is_pfaffian() {
        let mut a = AntisymmetricMatrix::zeros(6);
        let vals = [1.0, 0.2, -0.5, 0.7, 1.5, -1.1, 0.3, 2.0, -0.4, 0.6, 0.9, -1.3, 0.1, 0.8, -2.0];
        let mut it = vals.iter();
        for i in 0..6 {
            for j in i + 1..6 {
                a.set(i, j, *it.next().unwrap());
            }
        }
        let form = a.to_two_form().unwrap();
        assert_relative_eq!(
            hyperpfaffian(&form, 2).unwrap(),
            a.pfaffian().unwrap(),
            max_relative = 1e-12
        );
        assert_eq!(AntisymmetricMatrix::from_two_form(&form).unwrap(), a);
    }

    #[test]
    fn hyperpfaffian_rejects_bad_input() {
        let w = f(6, &[(&[1, 2], 1.0), (&[3], 1.0)]);
        assert!(hyperpfaffian(&w, 2).is_err()); // inhomogeneous
        let w4 = f(6, &[(&[1, 2, 3, 4], 1.0)]);
        assert!(hyperpfaffian(&w4, 4).is_err()); // 4 does not divide 6
    }

    #[test]
    fn hyperpfaffian_grade_four() {
        // w = a e1234 + b e3456 + c e1256 on K=8 pairs only with disjoint words:
        // PF = coefficient of vol in w^2/2; e1234∧e5678 etc.
        let w = f(
            8,
            &[
                (&[1, 2, 3, 4], 2.0),
                (&[5, 6, 7, 8], 3.0),
                (&[1, 2, 5, 6], 4.0),
                (&[3, 4, 7, 8], 5.0),
            ],
        );
        // merge signs of complementary grade-4 words are +1 (even block moves)
        assert_relative_eq!(hyperpfaffian(&w, 4).unwrap(), 2.0 * 3.0 + 4.0 * 5.0, max_relative = 1e-14);
    }
}
