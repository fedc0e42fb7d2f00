//! Dense real polynomials, complete monic families, Wronskians with
//! normalized derivatives, and the confluent Vandermonde matrix.
//!
//! The derivative that appears everywhere is `D^l = (1/l!) d^l/dx^l`; with it
//! the minors of the confluent Vandermonde matrix are exactly the Wronskians
//! of the selected family members, no factorial bookkeeping required.

use crate::error::{Error, Result};
use crate::increasing::IncreasingMap;
use nalgebra::DMatrix;
use std::sync::RwLock;

/// Largest tuple length for which Wronskians are expanded symbolically; the
/// L! cofactor expansion is exact and cheap up to here, larger tuples fall
/// back to a numeric LU determinant per evaluation point.
pub const SYMBOLIC_WRONSKIAN_MAX_LEN: usize = 4;

/// Dense polynomial; `coeffs[i]` multiplies `x^i`, no trailing zeros stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `x^degree`.
    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-1.0))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|&c| c * factor).collect())
    }

    /// Scale the variable: p(x) -> p(a x).
    pub fn compose_scale(&self, a: f64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut pow = 1.0;
        for &c in &self.coeffs {
            coeffs.push(c * pow);
            pow *= a;
        }
        Self::from_coeffs(coeffs)
    }

    /// Normalized derivative `(1/l!) d^l/dx^l`: sends `c_m x^m` to
    /// `binom(m, l) c_m x^(m-l)`. Orders beyond the degree give zero.
    pub fn modified_derivative(&self, l: usize) -> Self {
        let Some(deg) = self.degree() else {
            return Self::zero();
        };
        if l > deg {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; deg - l + 1];
        for (m, &c) in self.coeffs.iter().enumerate().skip(l) {
            coeffs[m - l] = binomial(m, l) * c;
        }
        Self::from_coeffs(coeffs)
    }
}

/// Exact binomial coefficient as f64 (desk-scale arguments).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

#[derive(Debug, Clone, PartialEq)]
enum FamilyKind {
    Monomial,
    HermiteMonic,
    Custom(Vec<Polynomial>),
}

/// A complete monic family: member n (1-based) is monic of degree n-1.
///
/// Generated members are memoized behind a read-mostly lock, so families can
/// be shared across threads while coefficients are computed in parallel.
#[derive(Debug)]
pub struct CompleteFamily {
    kind: FamilyKind,
    cache: RwLock<Vec<Polynomial>>,
}

impl Clone for CompleteFamily {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            cache: RwLock::new(self.cache.read().unwrap().clone()),
        }
    }
}

impl PartialEq for CompleteFamily {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl CompleteFamily {
    /// `p_n(x) = x^(n-1)`.
    pub fn monomial() -> Self {
        Self {
            kind: FamilyKind::Monomial,
            cache: RwLock::new(Vec::new()),
        }
    }

    /// Monic orthogonal polynomials for the weight `e^{-x^2}`, via the
    /// three-term recurrence `h_{m+1} = x h_m - (m/2) h_{m-1}`.
    pub fn hermite_monic() -> Self {
        Self {
            kind: FamilyKind::HermiteMonic,
            cache: RwLock::new(Vec::new()),
        }
    }

    /// An explicit list; member n must be monic of degree n-1.
    pub fn custom(members: Vec<Polynomial>) -> Result<Self> {
        for (i, p) in members.iter().enumerate() {
            if p.degree() != Some(i) || p.coeffs().last() != Some(&1.0) {
                return Err(Error::InvalidArgument(format!(
                    "custom family member {} must be monic of degree {}",
                    i + 1,
                    i
                )));
            }
        }
        Ok(Self {
            kind: FamilyKind::Custom(members),
            cache: RwLock::new(Vec::new()),
        })
    }

    /// Stable name used in cache keys and dumps.
    pub fn name(&self) -> String {
        match &self.kind {
            FamilyKind::Monomial => "monomial".into(),
            FamilyKind::HermiteMonic => "hermite-monic".into(),
            FamilyKind::Custom(members) => {
                // fold the coefficients into the name so distinct custom
                // families never share cache entries
                let mut hasher = sha2::Sha256::new();
                use sha2::Digest;
                for p in members {
                    for c in p.coeffs() {
                        hasher.update(c.to_le_bits_bytes());
                    }
                    hasher.update([0xff]);
                }
                let digest = hasher.finalize();
                format!("custom-{:02x}{:02x}{:02x}{:02x}", digest[0], digest[1], digest[2], digest[3])
            }
        }
    }

    /// Member `n` (1-based), monic of degree n-1.
    pub fn member(&self, n: usize) -> Result<Polynomial> {
        if n == 0 {
            return Err(Error::InvalidArgument("family members are 1-based".into()));
        }
        if let FamilyKind::Custom(members) = &self.kind {
            return members.get(n - 1).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "custom family has {} members, requested {n}",
                    members.len()
                ))
            });
        }
        {
            let cache = self.cache.read().unwrap();
            if let Some(p) = cache.get(n - 1) {
                return Ok(p.clone());
            }
        }
        let mut cache = self.cache.write().unwrap();
        while cache.len() < n {
            let next = match &self.kind {
                FamilyKind::Monomial => Polynomial::monomial(cache.len()),
                FamilyKind::HermiteMonic => match cache.len() {
                    0 => Polynomial::constant(1.0),
                    1 => Polynomial::monomial(1),
                    m => {
                        let x = Polynomial::monomial(1);
                        x.mul(&cache[m - 1])
                            .sub(&cache[m - 2].scale((m - 1) as f64 / 2.0))
                    }
                },
                FamilyKind::Custom(_) => unreachable!(),
            };
            cache.push(next);
        }
        Ok(cache[n - 1].clone())
    }
}

trait F64Bits {
    fn to_le_bits_bytes(&self) -> [u8; 8];
}

impl F64Bits for f64 {
    fn to_le_bits_bytes(&self) -> [u8; 8] {
        self.to_bits().to_le_bytes()
    }
}

/// Determinant of a small polynomial matrix by cofactor expansion along the
/// first column.
fn poly_det(rows: &[Vec<Polynomial>]) -> Polynomial {
    let n = rows.len();
    if n == 0 {
        return Polynomial::constant(1.0);
    }
    if n == 1 {
        return rows[0][0].clone();
    }
    let mut det = Polynomial::zero();
    for i in 0..n {
        if rows[i][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = rows
            .iter()
            .enumerate()
            .filter(|(r, _)| *r != i)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        let term = rows[i][0].mul(&poly_det(&minor));
        det = if i % 2 == 0 {
            det.add(&term)
        } else {
            det.sub(&term)
        };
    }
    det
}

/// Wronskian of the family members selected by `t`, with normalized
/// derivatives: `det [ D^(l-1) p_{t(k)} ]_{k,l=1..L}`, as an exact polynomial.
///
/// Available for `L <= SYMBOLIC_WRONSKIAN_MAX_LEN`; longer tuples should be
/// evaluated pointwise with [`wronskian`].
pub fn wronskian_polynomial(family: &CompleteFamily, t: &IncreasingMap) -> Result<Option<Polynomial>> {
    let l = t.len();
    if l > SYMBOLIC_WRONSKIAN_MAX_LEN {
        return Ok(None);
    }
    if l == 0 {
        return Ok(Some(Polynomial::constant(1.0)));
    }
    let mut rows = Vec::with_capacity(l);
    for &n in t.values() {
        let p = family.member(n as usize)?;
        rows.push((0..l).map(|d| p.modified_derivative(d)).collect::<Vec<_>>());
    }
    Ok(Some(poly_det(&rows)))
}

/// Wronskian value at a point; symbolic expansion for short tuples, numeric
/// LU determinant otherwise.
pub fn wronskian(family: &CompleteFamily, t: &IncreasingMap, x: f64) -> Result<f64> {
    if let Some(p) = wronskian_polynomial(family, t)? {
        return Ok(p.eval(x));
    }
    let l = t.len();
    let mut m = DMatrix::zeros(l, l);
    for (k, &n) in t.values().iter().enumerate() {
        let p = family.member(n as usize)?;
        for d in 0..l {
            m[(k, d)] = p.modified_derivative(d).eval(x);
        }
    }
    Ok(m.determinant())
}

/// A prepared Wronskian that can be evaluated pointwise without further
/// fallible lookups, for use inside integrand closures.
#[derive(Debug, Clone)]
pub enum WronskianEval {
    /// Fully expanded polynomial (short tuples).
    Symbolic(Polynomial),
    /// Derivative matrix entries, evaluated and fed through an LU determinant
    /// at each call (long tuples, where expansion would blow up).
    Numeric { derivatives: Vec<Vec<Polynomial>> },
}

impl WronskianEval {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WronskianEval::Symbolic(p) => p.eval(x),
            WronskianEval::Numeric { derivatives } => {
                let l = derivatives.len();
                let mut m = DMatrix::zeros(l, l);
                for (k, row) in derivatives.iter().enumerate() {
                    for (d, p) in row.iter().enumerate() {
                        m[(k, d)] = p.eval(x);
                    }
                }
                m.determinant()
            }
        }
    }
}

/// Prepare a Wronskian evaluator for the family members selected by `t`.
/// All fallible work (member lookup) happens here; the returned value
/// evaluates infallibly.
pub fn wronskian_evaluator(family: &CompleteFamily, t: &IncreasingMap) -> Result<WronskianEval> {
    if let Some(p) = wronskian_polynomial(family, t)? {
        return Ok(WronskianEval::Symbolic(p));
    }
    let l = t.len();
    let mut derivatives = Vec::with_capacity(l);
    for &n in t.values() {
        let p = family.member(n as usize)?;
        derivatives.push((0..l).map(|d| p.modified_derivative(d)).collect::<Vec<_>>());
    }
    Ok(WronskianEval::Numeric { derivatives })
}

/// Confluent Vandermonde matrix for per-species point lists.
///
/// Row n (n = 1..K) belongs to family member `p_n`; the columns come in
/// species-major, particle-major blocks, the block of particle m of species j
/// holding `D^(l-1) p_n(x^j_m)` for `l = 1..L_j` with `L_j = b*q_j`. The
/// matrix is square with `K = sum_j M_j L_j`.
pub fn confluent_vandermonde(
    family: &CompleteFamily,
    b: u32,
    charges: &[u32],
    points: &[Vec<f64>],
) -> Result<DMatrix<f64>> {
    if charges.len() != points.len() {
        return Err(Error::InvalidArgument(format!(
            "{} charges but {} species point lists",
            charges.len(),
            points.len()
        )));
    }
    if b == 0 || charges.iter().any(|&q| q == 0) {
        return Err(Error::InvalidArgument(
            "b and all charges must be positive".into(),
        ));
    }
    let k: usize = charges
        .iter()
        .zip(points)
        .map(|(&q, xs)| (b * q) as usize * xs.len())
        .sum();
    if k == 0 {
        return Err(Error::InvalidArgument("no particles: empty matrix".into()));
    }
    let mut matrix = DMatrix::zeros(k, k);
    // cache the derivative polynomials of each family member once
    let max_l = charges.iter().map(|&q| (b * q) as usize).max().unwrap_or(0);
    let mut derivs: Vec<Vec<Polynomial>> = Vec::with_capacity(k);
    for n in 1..=k {
        let p = family.member(n)?;
        derivs.push((0..max_l).map(|d| p.modified_derivative(d)).collect());
    }
    let mut col = 0;
    for (j, xs) in points.iter().enumerate() {
        let l = (b * charges[j]) as usize;
        for &x in xs {
            for d in 0..l {
                for (row, dp) in derivs.iter().enumerate() {
                    matrix[(row, col)] = dp[d].eval(x);
                }
                col += 1;
            }
        }
    }
    debug_assert_eq!(col, k);
    Ok(matrix)
}

/// The closed product form the confluent Vandermonde determinant factors
/// into: same-species differences to the power `L_j^2`, cross-species
/// differences to `L_j L_k` (later species index minus earlier, later
/// particle minus earlier within a species).
pub fn vandermonde_product(b: u32, charges: &[u32], points: &[Vec<f64>]) -> f64 {
    let mut prod = 1.0;
    for (j, xs) in points.iter().enumerate() {
        let lj = (b * charges[j]) as i32;
        for n in 1..xs.len() {
            for m in 0..n {
                prod *= (xs[n] - xs[m]).powi(lj * lj);
            }
        }
    }
    for j in 0..points.len() {
        for k in j + 1..points.len() {
            let e = (b * charges[j]) as i32 * (b * charges[k]) as i32;
            for &xj in &points[j] {
                for &xk in &points[k] {
                    prod *= (xk - xj).powi(e);
                }
            }
        }
    }
    prod
}
