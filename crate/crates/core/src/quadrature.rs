//! Weighted one-dimensional quadrature, the antisymmetrized sign-kernel
//! double integral, and small-dimension product quadrature with sector
//! decomposition, plus a seeded Monte Carlo fallback.
//!
//! Everything here is deterministic for a given scheme (and seed, for Monte
//! Carlo): adaptive refinement always splits the current worst panel, node
//! tables are fixed, and Monte Carlo shards combine in index order, so
//! repeated runs reproduce results bit for bit.

use crate::error::{Error, Result};
use rand::distributions::Distribution;
use rand::SeedableRng;
use rayon::prelude::*;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Mutex, OnceLock};

/// Confining one-body potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `U(x) = x^2 / (2 sigma^2)`.
    Gaussian { sigma: f64 },
    /// Piecewise-linear interpolation through sorted `(x, U(x))` knots,
    /// extrapolated with the boundary slopes.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl Potential {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gaussian scale must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self::Gaussian { sigma })
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated potential needs at least two knots".into(),
            ));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(
                "tabulated potential knots must have strictly increasing x".into(),
            ));
        }
        if knots.iter().any(|(x, u)| !x.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument(
                "tabulated potential knots must be finite".into(),
            ));
        }
        Ok(Self::Tabulated { knots })
    }

    /// Stable rendering for cache keys: two potentials with the same tag
    /// compute the same weights.
    pub fn cache_tag(&self) -> String {
        match self {
            Self::Gaussian { sigma } => format!("g{sigma:.9e}"),
            Self::Tabulated { knots } => {
                use sha2::{Digest, Sha256};
                let mut hasher = Sha256::new();
                for (x, u) in knots {
                    hasher.update(x.to_le_bytes());
                    hasher.update(u.to_le_bytes());
                }
                let digest = hasher.finalize();
                let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
                format!("t{hex}")
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { sigma } => x * x / (2.0 * sigma * sigma),
            Self::Tabulated { knots } => {
                let first = knots.first().unwrap();
                let last = knots.last().unwrap();
                if x <= first.0 {
                    let next = &knots[1];
                    let slope = (next.1 - first.1) / (next.0 - first.0);
                    return first.1 + slope * (x - first.0);
                }
                if x >= last.0 {
                    let prev = &knots[knots.len() - 2];
                    let slope = (last.1 - prev.1) / (last.0 - prev.0);
                    return last.1 + slope * (x - last.0);
                }
                let i = knots.partition_point(|(kx, _)| *kx <= x) - 1;
                let (x0, u0) = knots[i];
                let (x1, u1) = knots[i + 1];
                u0 + (u1 - u0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// A weight `e^{-exponent * U(x)}` together with optional point masses.
/// A point mass `(location, mass)` contributes `mass * f(location)` to the
/// integral as-is; callers fold any weight factor into the mass.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    pub potential: Potential,
    pub exponent: f64,
    pub atoms: Vec<(f64, f64)>,
}

impl WeightedMeasure {
    pub fn new(potential: Potential, exponent: f64) -> Self {
        Self {
            potential,
            exponent,
            atoms: Vec::new(),
        }
    }

    pub fn with_atoms(mut self, atoms: Vec<(f64, f64)>) -> Self {
        self.atoms = atoms;
        self
    }

    pub fn weight(&self, x: f64) -> f64 {
        (-self.exponent * self.potential.value(x)).exp()
    }

    /// Natural length scale of the weight (standard deviation for a gaussian
    /// potential), used to size composite-quadrature panels.
    fn length_scale(&self, radius: f64) -> f64 {
        match &self.potential {
            Potential::Gaussian { sigma } => sigma / self.exponent.sqrt(),
            Potential::Tabulated { .. } => radius / 12.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadMethod {
    /// Worst-panel-first adaptive Gauss-Kronrod refinement.
    Adaptive,
    /// A fixed number of uniform Gauss-Kronrod panels, no refinement.
    FixedPanels(u32),
}

/// Controls for the deterministic quadrature engines.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    pub method: QuadMethod,
    /// Half-width of the truncated integration interval; `None` selects it
    /// from the weight's decay and the polynomial degree in play.
    pub radius: Option<f64>,
    pub rel_tol: f64,
    /// Maximum bisection depth per panel before giving up.
    pub max_subdivisions: u32,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            method: QuadMethod::Adaptive,
            radius: None,
            rel_tol: 1e-11,
            max_subdivisions: 50,
        }
    }
}

impl QuadratureScheme {
    /// Stable rendering for cache keys.
    pub fn cache_tag(&self) -> String {
        let method = match self.method {
            QuadMethod::Adaptive => "adaptive".to_string(),
            QuadMethod::FixedPanels(n) => format!("fixed{n}"),
        };
        let radius = match self.radius {
            Some(r) => format!("{r:.6e}"),
            None => "auto".to_string(),
        };
        format!(
            "{method};r={radius};tol={:.3e};sub={}",
            self.rel_tol, self.max_subdivisions
        )
    }
}

/// A value with an error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Picks a truncation half-width so the weight times `(1+R)^degree` falls
/// below 1e-16: past that point integrands of at most that polynomial degree
/// are numerically dead.
pub fn auto_radius(measure: &WeightedMeasure, degree: u32) -> Result<f64> {
    let tail = |r: f64| measure.weight(r).max(measure.weight(-r)) * (1.0 + r).powi(degree as i32);
    let mut r = 1.0;
    while tail(r) > 1e-16 {
        r *= 2.0;
        if r > 1e6 {
            return Err(Error::InvalidArgument(
                "weight decays too slowly: no usable truncation radius below 1e6 \
                 (is the potential confining?)"
                    .into(),
            ));
        }
    }
    // narrow down to the decay threshold, then keep a 1.5x margin
    let mut lo = r / 2.0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + r);
        if tail(mid) > 1e-16 {
            lo = mid;
        } else {
            r = mid;
        }
    }
    Ok((1.5 * r).max(2.0))
}

// 21-point Gauss-Kronrod pair (10-point Gauss embedded), standard abscissae
// and weights for [-1, 1].
const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One Gauss-Kronrod 21(10) panel: returns (value, error estimate).
fn gk21(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * WGK21[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK21[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK21[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG10[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// A leaf panel of the adaptive pass.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    splits_left: u32,
}

impl Panel {
    fn fresh(f: &dyn Fn(f64) -> f64, a: f64, b: f64, splits_left: u32) -> Self {
        let (value, error) = gk21(f, a, b);
        Self {
            a,
            b,
            value,
            error,
            splits_left,
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // max-heap on error, ties broken by position for determinism
        self.error
            .total_cmp(&other.error)
            .then(self.a.total_cmp(&other.a))
    }
}

const MAX_PANELS: usize = 4096;

/// Panels the adaptive pass starts from. A single whole-interval panel is a
/// trap: an integrand antisymmetric about the midpoint evaluates to exactly
/// zero with an exactly zero error estimate, so refinement would stop
/// immediately while sub-interval values are far off.
const INITIAL_PANELS: u32 = 16;

/// Worst-panel-first adaptive refinement on [a, b]. The target is relative
/// to the accumulated absolute panel mass, so integrals that cancel to zero
/// still converge. Returns the leaf panels ordered left to right.
fn adaptive_panels(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<Vec<Panel>> {
    let mut heap = BinaryHeap::new();
    let mut total_error = 0.0;
    let mut total_abs = 0.0;
    let h = (b - a) / f64::from(INITIAL_PANELS);
    for i in 0..INITIAL_PANELS {
        let lo = a + h * f64::from(i);
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + h };
        let p = Panel::fresh(f, lo, hi, max_depth);
        total_error += p.error;
        total_abs += p.value.abs();
        heap.push(p);
    }
    loop {
        let scale = total_abs.max(1e-300);
        if total_error <= rel_tol * scale {
            break;
        }
        let worst = heap.peek().copied().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if worst.splits_left == 0 || mid <= worst.a || mid >= worst.b || heap.len() >= MAX_PANELS {
            let value: f64 = heap.iter().map(|p| p.value).sum();
            return Err(Error::QuadratureNonConvergence {
                estimate: value,
                error_bound: total_error,
                target: rel_tol * scale,
            });
        }
        heap.pop();
        total_error -= worst.error;
        total_abs -= worst.value.abs();
        for half in [
            Panel::fresh(f, worst.a, mid, worst.splits_left - 1),
            Panel::fresh(f, mid, worst.b, worst.splits_left - 1),
        ] {
            total_error += half.error;
            total_abs += half.value.abs();
            heap.push(half);
        }
    }
    let mut leaves: Vec<Panel> = heap.into_vec();
    leaves.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(leaves)
}

/// Plain definite integral of `f` on [a, b] under the scheme.
pub fn integrate_interval(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    if !(a < b) {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let panels = panels_for(f, a, b, scheme)?;
    Ok(Estimate {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error).sum(),
    })
}

fn panels_for(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    scheme: &QuadratureScheme,
) -> Result<Vec<Panel>> {
    match scheme.method {
        QuadMethod::Adaptive => adaptive_panels(f, a, b, scheme.rel_tol, scheme.max_subdivisions),
        QuadMethod::FixedPanels(n) => {
            let n = n.max(1);
            let h = (b - a) / f64::from(n);
            Ok((0..n)
                .map(|i| {
                    let lo = a + h * f64::from(i);
                    let hi = if i + 1 == n { b } else { lo + h };
                    Panel::fresh(f, lo, hi, 0)
                })
                .collect())
        }
    }
}

/// Resolves the scheme radius for a measure, preferring an explicit setting.
pub fn resolve_radius(
    measure: &WeightedMeasure,
    scheme: &QuadratureScheme,
    degree: u32,
) -> Result<f64> {
    match scheme.radius {
        Some(r) if r > 0.0 => Ok(r),
        Some(r) => Err(Error::InvalidArgument(format!(
            "truncation radius must be positive, got {r}"
        ))),
        None => auto_radius(measure, degree),
    }
}

/// Polynomial-degree hint used when a caller does not know the degree of the
/// integrand; covers everything this engine produces.
pub const DEFAULT_DEGREE_HINT: u32 = 64;

/// `∫ f dμ` for the weighted measure: the continuous part is integrated on
/// the truncated interval, point masses are added exactly.
pub fn integrate_weighted(
    f: &dyn Fn(f64) -> f64,
    measure: &WeightedMeasure,
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    let radius = resolve_radius(measure, scheme, DEFAULT_DEGREE_HINT)?;
    let integrand = |x: f64| measure.weight(x) * f(x);
    let mut est = integrate_interval(&integrand, -radius, radius, scheme)?;
    for &(location, mass) in &measure.atoms {
        est.value += mass * f(location);
    }
    Ok(est)
}

/// The antisymmetrized pair integral
/// `(1/2) ∬ w(x) w(y) f(x) g(y) sgn(y - x) dx dy`
/// computed through the cumulative integral `F(y) = ∫_{-R}^y w f`:
/// the double integral collapses to `(1/2) ∫ w(y) g(y) (2 F(y) - F(R)) dy`.
/// Point masses on the measure are not supported here (the engine never
/// needs them for pair coefficients).
pub fn integrate_sgn_kernel(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    measure: &WeightedMeasure,
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    if !measure.atoms.is_empty() {
        return Err(Error::Unsupported(
            "sign-kernel pair integral over a measure with point masses".into(),
        ));
    }
    let radius = resolve_radius(measure, scheme, DEFAULT_DEGREE_HINT)?;
    let inner = |x: f64| measure.weight(x) * f(x);
    // tighter tolerance inside: the cumulative table feeds another pass
    let inner_scheme = QuadratureScheme {
        rel_tol: scheme.rel_tol * 0.25,
        ..scheme.clone()
    };
    let panels = panels_for(&inner, -radius, radius, &inner_scheme)?;
    let mut prefix = Vec::with_capacity(panels.len() + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for p in &panels {
        acc += p.value;
        prefix.push(acc);
    }
    let total = acc;
    let inner_error: f64 = panels.iter().map(|p| p.error).sum();
    let cumulative = |y: f64| -> f64 {
        if y <= -radius {
            return 0.0;
        }
        if y >= radius {
            return total;
        }
        let idx = panels.partition_point(|p| p.b <= y).min(panels.len() - 1);
        let (partial, _) = gk21(&inner, panels[idx].a, y);
        prefix[idx] + partial
    };
    let outer = |y: f64| measure.weight(y) * g(y) * (2.0 * cumulative(y) - total);
    let est = integrate_interval(&outer, -radius, radius, scheme)?;
    Ok(Estimate {
        value: 0.5 * est.value,
        error: 0.5 * est.error + inner_error,
    })
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes for the nested product rule
// ---------------------------------------------------------------------------

fn gl_nodes(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    *map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(compute_gl_nodes(n))))
}

/// Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// recurrence-evaluated polynomial.
fn compute_gl_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // the guess for index i is the (i+1)-th largest root; store ascending
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
        if n % 2 == 1 && i == n / 2 {
            nodes[i] = 0.0;
        }
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

// ---------------------------------------------------------------------------
// Product quadrature with sector decomposition
// ---------------------------------------------------------------------------

/// A multi-dimensional integrand with the structure hints the integrator
/// needs: which coordinate pairs carry an absolute-value kink, which
/// coordinate groups are exchange-symmetric, and fixed breakpoints where a
/// coordinate's integrand loses smoothness.
pub struct MultiDimProblem<'a> {
    pub integrand: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    /// One weighted measure per coordinate; used for radius and panel-size
    /// selection (and, in the Monte Carlo path, as the proposal). The
    /// integrand itself must already include the weights.
    pub measures: &'a [WeightedMeasure],
    /// Pairs (i, j) across which `|x_i - x_j|` appears to an odd power.
    pub kink_pairs: &'a [(usize, usize)],
    /// Coordinate groups the integrand is symmetric under permuting.
    pub symmetric_groups: &'a [Vec<usize>],
    /// Per-coordinate fixed breakpoints (kinks against fixed locations).
    pub breakpoints: &'a [Vec<f64>],
    /// Upper bound on the polynomial degree multiplying the weights; sizes
    /// the truncation radius.
    pub degree_hint: u32,
}

/// Hard cap on product-quadrature dimension.
pub const MAX_QUADRATURE_DIMS: usize = 4;
/// Hard cap on Monte Carlo dimension.
pub const MAX_MONTE_CARLO_DIMS: usize = 8;

/// Gauss order (main, cross-check) and panel width in units of the weight's
/// length scale, chosen by dimension to balance accuracy against the node
/// count exploding with dimension.
fn gl_plan(d: usize) -> (usize, usize, f64) {
    match d {
        0 | 1 => (16, 13, 1.0),
        2 => (14, 11, 1.0),
        3 => (12, 10, 1.5),
        _ => (10, 8, 2.0),
    }
}

/// Product quadrature of `p` over the truncated box, decomposed into
/// ordering sectors across the declared kinks; each coordinate uses
/// composite Gauss-Legendre panels sized to the weight's length scale.
/// The error is estimated by repeating with a lower Gauss order.
pub fn integrate_multidim(p: &MultiDimProblem<'_>, scheme: &QuadratureScheme) -> Result<Estimate> {
    let d = p.measures.len();
    if d == 0 {
        return Ok(Estimate {
            value: (p.integrand)(&[]),
            error: 0.0,
        });
    }
    if d > MAX_QUADRATURE_DIMS {
        return Err(Error::CapExceeded(format!(
            "product quadrature supports at most {MAX_QUADRATURE_DIMS} dimensions, got {d}"
        )));
    }
    if p.breakpoints.len() != d {
        return Err(Error::InvalidArgument(
            "breakpoints must be given per coordinate".into(),
        ));
    }
    let (order_main, order_check, width_factor) = gl_plan(d);

    // per-coordinate radius plus a composite grid sized to the weight scale
    let mut radii = Vec::with_capacity(d);
    let mut grids: Vec<Vec<f64>> = Vec::with_capacity(d);
    for (i, m) in p.measures.iter().enumerate() {
        let radius = resolve_radius(m, scheme, p.degree_hint)?;
        let step = width_factor * m.length_scale(radius);
        let mut cuts: Vec<f64> = p.breakpoints[i].clone();
        let mut k = 1.0;
        while k * step < radius {
            cuts.push(k * step);
            cuts.push(-k * step);
            k += 1.0;
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        radii.push(radius);
        grids.push(cuts);
    }

    let sectors = build_sectors(d, p.kink_pairs, p.symmetric_groups)?;
    let mut value = 0.0;
    let mut check = 0.0;
    for sector in &sectors {
        value += sector.multiplicity
            * nested_gl(p.integrand, &radii, &sector.chain_of, &grids, order_main);
        check += sector.multiplicity
            * nested_gl(p.integrand, &radii, &sector.chain_of, &grids, order_check);
    }
    Ok(Estimate {
        value,
        error: (value - check).abs(),
    })
}

/// One ordering sector: for each coordinate, the coordinate (if any) that
/// must exceed it (its successor in an ascending chain).
struct Sector {
    /// `chain_of[i] = Some(j)` means `x_i < x_j` in this sector, with `x_j`
    /// integrated at an outer level.
    chain_of: Vec<Option<usize>>,
    multiplicity: f64,
}

/// Builds the ordering sectors induced by the kink graph. A connected
/// component fully inside one symmetric group contributes a single ascending
/// chain with multiplicity |component|!; other components enumerate all
/// orderings.
fn build_sectors(
    d: usize,
    kink_pairs: &[(usize, usize)],
    symmetric_groups: &[Vec<usize>],
) -> Result<Vec<Sector>> {
    for &(i, j) in kink_pairs {
        if i >= d || j >= d || i == j {
            return Err(Error::InvalidArgument(format!(
                "kink pair ({i}, {j}) out of range for dimension {d}"
            )));
        }
    }
    // union-find over kink pairs
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut parent: Vec<usize> = (0..d).collect();
    for &(i, j) in kink_pairs {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
        }
    }
    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..d {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }
    let mut comps: Vec<Vec<usize>> = components.into_values().filter(|c| c.len() > 1).collect();
    comps.sort();

    // per component: list of (ascending chain, multiplicity)
    let mut per_component: Vec<Vec<(Vec<usize>, f64)>> = Vec::new();
    for comp in &comps {
        let symmetric = symmetric_groups
            .iter()
            .any(|g| comp.iter().all(|c| g.contains(c)));
        if symmetric {
            let mult: f64 = (1..=comp.len()).map(|k| k as f64).product();
            per_component.push(vec![(comp.clone(), mult)]);
        } else {
            use itertools::Itertools;
            per_component.push(
                comp.iter()
                    .copied()
                    .permutations(comp.len())
                    .map(|p| (p, 1.0))
                    .collect(),
            );
        }
    }

    // cartesian product of the per-component choices
    let mut sectors = vec![Sector {
        chain_of: vec![None; d],
        multiplicity: 1.0,
    }];
    for choices in &per_component {
        let mut next = Vec::with_capacity(sectors.len() * choices.len());
        for s in &sectors {
            for (chain, mult) in choices {
                let mut chain_of = s.chain_of.clone();
                for w in chain.windows(2) {
                    chain_of[w[0]] = Some(w[1]);
                }
                next.push(Sector {
                    chain_of,
                    multiplicity: s.multiplicity * mult,
                });
            }
        }
        sectors = next;
    }
    Ok(sectors)
}

/// Nested composite Gauss-Legendre over `{ x_i < x_{chain_of[i]} }`
/// intersected with the truncated box, splitting each coordinate's range at
/// its grid cuts.
fn nested_gl(
    integrand: &(dyn Fn(&[f64]) -> f64 + Sync),
    radii: &[f64],
    chain_of: &[Option<usize>],
    grids: &[Vec<f64>],
    order: usize,
) -> f64 {
    let d = radii.len();
    // integrate successors before their predecessors: the upper bound of a
    // chained coordinate must already be fixed when we reach it
    let mut levels = Vec::with_capacity(d);
    let mut placed = vec![false; d];
    while levels.len() < d {
        let before = levels.len();
        for i in 0..d {
            if placed[i] {
                continue;
            }
            match chain_of[i] {
                Some(j) if !placed[j] => continue,
                _ => {
                    levels.push(i);
                    placed[i] = true;
                }
            }
        }
        assert!(levels.len() > before, "cyclic ordering constraints");
    }
    let (nodes, weights) = gl_nodes(order);
    let mut point = vec![0.0; d];
    nested_gl_rec(
        integrand, radii, chain_of, grids, &levels, 0, &mut point, nodes, weights,
    )
}

#[allow(clippy::too_many_arguments)]
fn nested_gl_rec(
    integrand: &(dyn Fn(&[f64]) -> f64 + Sync),
    radii: &[f64],
    chain_of: &[Option<usize>],
    grids: &[Vec<f64>],
    levels: &[usize],
    depth: usize,
    point: &mut Vec<f64>,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    if depth == levels.len() {
        return integrand(point);
    }
    let coord = levels[depth];
    let lo = -radii[coord];
    let hi = match chain_of[coord] {
        Some(j) => point[j],
        None => radii[coord],
    };
    if !(lo < hi) {
        return 0.0;
    }
    let mut total = 0.0;
    let mut a = lo;
    let mut segments: Vec<(f64, f64)> = Vec::new();
    for &cut in &grids[coord] {
        if cut <= a {
            continue;
        }
        if cut >= hi {
            break;
        }
        segments.push((a, cut));
        a = cut;
    }
    segments.push((a, hi));
    for (sa, sb) in segments {
        let center = 0.5 * (sa + sb);
        let half = 0.5 * (sb - sa);
        for (i, &t) in nodes.iter().enumerate() {
            point[coord] = center + half * t;
            total += weights[i]
                * half
                * nested_gl_rec(
                    integrand,
                    radii,
                    chain_of,
                    grids,
                    levels,
                    depth + 1,
                    point,
                    nodes,
                    weights,
                );
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Monte Carlo fallback
// ---------------------------------------------------------------------------

/// Seeded importance-sampling estimate of `∫ rest(x) ∏_i w_i(x_i) dx`.
///
/// Coordinates are drawn independently from each weight (exactly, for
/// gaussian potentials; through an inverse-CDF table otherwise); the
/// returned error is one standard error of the mean. Work is sharded:
/// shard s uses a stream seeded by `seed + s` and shard sums combine in
/// index order, so results are reproducible regardless of thread count.
pub fn integrate_monte_carlo(
    rest: &(dyn Fn(&[f64]) -> f64 + Sync),
    measures: &[WeightedMeasure],
    samples: u64,
    seed: u64,
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    let d = measures.len();
    if d == 0 {
        return Ok(Estimate {
            value: rest(&[]),
            error: 0.0,
        });
    }
    if d > MAX_MONTE_CARLO_DIMS {
        return Err(Error::CapExceeded(format!(
            "Monte Carlo supports at most {MAX_MONTE_CARLO_DIMS} dimensions, got {d}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut samplers = Vec::with_capacity(d);
    let mut norm = 1.0;
    for m in measures {
        if !m.atoms.is_empty() {
            return Err(Error::Unsupported(
                "Monte Carlo over measures with point masses".into(),
            ));
        }
        let s = CoordinateSampler::build(m, scheme)?;
        norm *= s.normalization;
        samplers.push(s);
    }

    const SHARD: u64 = 8192;
    let shard_count = samples.div_ceil(SHARD);
    let shard_stats: Vec<(f64, f64)> = (0..shard_count)
        .into_par_iter()
        .map(|s| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(s));
            let n = SHARD.min(samples - s * SHARD);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut x = vec![0.0; d];
            for _ in 0..n {
                for (i, sampler) in samplers.iter().enumerate() {
                    x[i] = sampler.draw(&mut rng);
                }
                let v = rest(&x);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let total: f64 = shard_stats.iter().map(|(s, _)| s).sum();
    let total_sq: f64 = shard_stats.iter().map(|(_, s)| s).sum();
    let n = samples as f64;
    let mean = total / n;
    let variance = (total_sq / n - mean * mean).max(0.0);
    let stderr = (variance / n).sqrt();
    Ok(Estimate {
        value: norm * mean,
        error: norm * stderr,
    })
}

/// Draws from the normalized density proportional to a measure's weight.
struct CoordinateSampler {
    normalization: f64,
    kind: SamplerKind,
}

enum SamplerKind {
    Gaussian { sd: f64 },
    Table { xs: Vec<f64>, cdf: Vec<f64> },
}

impl CoordinateSampler {
    fn build(measure: &WeightedMeasure, scheme: &QuadratureScheme) -> Result<Self> {
        match measure.potential {
            Potential::Gaussian { sigma } => {
                // e^{-exponent x^2 / (2 sigma^2)} is a normal density with
                // sd = sigma / sqrt(exponent), up to normalization
                let sd = sigma / measure.exponent.sqrt();
                Ok(Self {
                    normalization: (2.0 * std::f64::consts::PI).sqrt() * sd,
                    kind: SamplerKind::Gaussian { sd },
                })
            }
            Potential::Tabulated { .. } => {
                let radius = resolve_radius(measure, scheme, 0)?;
                const CELLS: usize = 4096;
                let h = 2.0 * radius / CELLS as f64;
                let mut xs = Vec::with_capacity(CELLS + 1);
                let mut cdf = Vec::with_capacity(CELLS + 1);
                let mut acc = 0.0;
                xs.push(-radius);
                cdf.push(0.0);
                for i in 0..CELLS {
                    let a = -radius + h * i as f64;
                    let (v, _) = gk21(&|x| measure.weight(x), a, a + h);
                    acc += v;
                    xs.push(a + h);
                    cdf.push(acc);
                }
                if !(acc > 0.0) {
                    return Err(Error::InvalidArgument(
                        "weight integrates to zero: cannot sample".into(),
                    ));
                }
                Ok(Self {
                    normalization: acc,
                    kind: SamplerKind::Table { xs, cdf },
                })
            }
        }
    }

    fn draw(&self, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
        match &self.kind {
            SamplerKind::Gaussian { sd } => {
                let normal = rand_distr::Normal::new(0.0, *sd).unwrap();
                normal.sample(rng)
            }
            SamplerKind::Table { xs, cdf } => {
                let total = *cdf.last().unwrap();
                let u: f64 = rand::Rng::gen::<f64>(rng) * total;
                let idx = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[idx - 1], cdf[idx]);
                let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                xs[idx - 1] + frac * (xs[idx] - xs[idx - 1])
            }
        }
    }
}

/// Composite-Simpson fixed-grid integral, an intentionally independent
/// primitive used to cross-check the Gauss machinery in paranoid runs.
pub fn fixed_grid_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cells: u32) -> f64 {
    let n = 2 * cells.max(1);
    let h = (b - a) / f64::from(n);
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * f64::from(i);
        sum += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}
