//! Ambient metric spaces.
//!
//! Three concrete spaces share one value type: Euclidean vectors, non-empty
//! finite point sets under the Hausdorff distance, and finite-support
//! probability measures under the Lévy–Prokhorov distance. Each space also
//! has a truncated variant `min(1, d)` used by the order-1 analyses.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

/// Tolerance realizing strict comparisons on floats. Open-ball membership
/// `ρ(x, y) < r` is tested as `ρ(x, y) < r - STRICT_TOL` so that values
/// within noise of the boundary count as outside the ball.
pub const STRICT_TOL: f64 = 1e-12;

/// Tolerance under which two points are considered the same point.
pub const DEDUP_TOL: f64 = 1e-12;

/// Combined-support cap for the Lévy–Prokhorov bisection.
pub const DEFAULT_LP_SUPPORT_CAP: usize = 16;

/// Open-ball membership under the strict-comparison convention.
#[inline]
pub fn in_open_ball(dist: f64, r: f64) -> bool {
    dist < r - STRICT_TOL
}

/// A point of ℝ^m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorPoint {
    coords: Vec<f64>,
}

impl VectorPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return input_err("vector point needs dimension >= 1");
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return input_err("vector point coordinates must be finite");
        }
        Ok(VectorPoint { coords })
    }

    /// 1-dimensional point.
    pub fn scalar(x: f64) -> Self {
        VectorPoint::new(vec![x]).expect("finite scalar")
    }

    pub fn origin(dim: usize) -> Self {
        VectorPoint { coords: vec![0.0; dim] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub(crate) fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.partial_cmp(b).expect("finite coords") {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }

    pub(crate) fn same_point(&self, other: &Self) -> bool {
        self.dim() == other.dim() && euclidean(self, other) <= DEDUP_TOL
    }
}

pub fn euclidean(x: &VectorPoint, y: &VectorPoint) -> f64 {
    debug_assert_eq!(x.dim(), y.dim());
    x.coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// A non-empty finite point set, deduplicated and kept in lexicographic
/// order so that downstream tie-breaking is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSet {
    points: Vec<VectorPoint>,
}

impl FiniteSet {
    pub fn new(mut points: Vec<VectorPoint>) -> Result<Self> {
        if points.is_empty() {
            return input_err("finite set must be non-empty");
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return input_err("finite set points must share one dimension");
        }
        points.sort_by(|a, b| a.lex_cmp(b));
        points.dedup_by(|a, b| a.same_point(b));
        Ok(FiniteSet { points })
    }

    pub fn points(&self) -> &[VectorPoint] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest norm over the members.
    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// A finite-support probability measure: strictly positive weights summing
/// to 1, support points pairwise distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure {
    support: Vec<VectorPoint>,
    weights: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(support: Vec<VectorPoint>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return input_err("measure support must be non-empty");
        }
        if support.len() != weights.len() {
            return input_err("measure support and weights must have equal length");
        }
        let dim = support[0].dim();
        if support.iter().any(|p| p.dim() != dim) {
            return input_err("measure support points must share one dimension");
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return input_err("measure weights must be strictly positive");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return input_err(format!("measure weights must sum to 1, got {total}"));
        }
        for i in 0..support.len() {
            for j in (i + 1)..support.len() {
                if support[i].same_point(&support[j]) {
                    return input_err("measure support points must be pairwise distinct");
                }
            }
        }
        Ok(FiniteMeasure { support, weights })
    }

    /// Dirac measure at `x`.
    pub fn dirac(x: VectorPoint) -> Self {
        FiniteMeasure { support: vec![x], weights: vec![1.0] }
    }

    /// Builds a measure merging support points that coincide within
    /// [`DEDUP_TOL`], summing their weights.
    pub fn merging(support: Vec<VectorPoint>, weights: Vec<f64>) -> Result<Self> {
        let mut merged: Vec<(VectorPoint, f64)> = Vec::new();
        for (p, w) in support.into_iter().zip(weights) {
            match merged.iter_mut().find(|(q, _)| q.same_point(&p)) {
                Some((_, acc)) => *acc += w,
                None => merged.push((p, w)),
            }
        }
        let (support, weights) = merged.into_iter().unzip();
        FiniteMeasure::new(support, weights)
    }

    pub fn support(&self) -> &[VectorPoint] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }
}

/// Which of the three spaces a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Vector,
    Set,
    Measure,
}

impl Role {
    pub fn base_metric(self) -> BaseMetric {
        match self {
            Role::Vector => BaseMetric::Euclidean,
            Role::Set => BaseMetric::Hausdorff,
            Role::Measure => BaseMetric::LevyProkhorov,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Vector => "vector",
            Role::Set => "set",
            Role::Measure => "measure",
        }
    }
}

/// A point of the ambient space in one of its three roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Vector(VectorPoint),
    Set(FiniteSet),
    Measure(FiniteMeasure),
}

impl MetricValue {
    pub fn role(&self) -> Role {
        match self {
            MetricValue::Vector(_) => Role::Vector,
            MetricValue::Set(_) => Role::Set,
            MetricValue::Measure(_) => Role::Measure,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricValue::Vector(p) => p.dim(),
            MetricValue::Set(s) => s.dim(),
            MetricValue::Measure(m) => m.dim(),
        }
    }
}

impl From<VectorPoint> for MetricValue {
    fn from(p: VectorPoint) -> Self {
        MetricValue::Vector(p)
    }
}

impl From<FiniteSet> for MetricValue {
    fn from(s: FiniteSet) -> Self {
        MetricValue::Set(s)
    }
}

impl From<FiniteMeasure> for MetricValue {
    fn from(m: FiniteMeasure) -> Self {
        MetricValue::Measure(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMetric {
    Euclidean,
    Hausdorff,
    LevyProkhorov,
}

impl BaseMetric {
    pub fn role(self) -> Role {
        match self {
            BaseMetric::Euclidean => Role::Vector,
            BaseMetric::Hausdorff => Role::Set,
            BaseMetric::LevyProkhorov => Role::Measure,
        }
    }
}

/// Metric selector: a base metric, optionally truncated by `t ↦ min(1, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricKind {
    pub base: BaseMetric,
    pub truncated: bool,
}

impl MetricKind {
    pub fn base(base: BaseMetric) -> Self {
        MetricKind { base, truncated: false }
    }

    pub fn truncated(base: BaseMetric) -> Self {
        MetricKind { base, truncated: true }
    }

    /// Base metric of the role, untruncated.
    pub fn for_role(role: Role) -> Self {
        MetricKind::base(role.base_metric())
    }

    /// Truncated metric of the role.
    pub fn truncated_for_role(role: Role) -> Self {
        MetricKind::truncated(role.base_metric())
    }

    pub fn name(&self) -> String {
        let base = match self.base {
            BaseMetric::Euclidean => "euclidean",
            BaseMetric::Hausdorff => "hausdorff",
            BaseMetric::LevyProkhorov => "levy_prokhorov",
        };
        if self.truncated {
            format!("truncated_{base}")
        } else {
            base.to_string()
        }
    }
}

/// Distance between two values of matching role under the selected metric.
pub fn dist(kind: MetricKind, x: &MetricValue, y: &MetricValue) -> Result<f64> {
    if x.role() != y.role() {
        return input_err(format!(
            "role mismatch: {} vs {}",
            x.role().name(),
            y.role().name()
        ));
    }
    if x.role() != kind.base.role() {
        return input_err(format!(
            "metric {} does not apply to {} values",
            kind.name(),
            x.role().name()
        ));
    }
    if x.dim() != y.dim() {
        return input_err(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    let base = match (x, y) {
        (MetricValue::Vector(a), MetricValue::Vector(b)) => euclidean(a, b),
        (MetricValue::Set(a), MetricValue::Set(b)) => hausdorff(a, b)?,
        (MetricValue::Measure(a), MetricValue::Measure(b)) => levy_prokhorov(a, b)?,
        _ => unreachable!("roles already matched"),
    };
    Ok(if kind.truncated { base.min(1.0) } else { base })
}

/// Hausdorff distance: the larger of the two directed max–min distances.
pub fn hausdorff(a: &FiniteSet, b: &FiniteSet) -> Result<f64> {
    if a.dim() != b.dim() {
        return input_err("hausdorff: dimension mismatch");
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

fn directed_hausdorff(a: &FiniteSet, b: &FiniteSet) -> f64 {
    a.points
        .iter()
        .map(|p| {
            b.points
                .iter()
                .map(|q| euclidean(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Lévy–Prokhorov distance with the default combined-support cap.
pub fn levy_prokhorov(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<f64> {
    levy_prokhorov_with_cap(mu, nu, DEFAULT_LP_SUPPORT_CAP)
}

/// Lévy–Prokhorov distance, bisected on ε to absolute tolerance 1e-12.
///
/// The infimum of ε > 0 such that `μ[A] ≤ ν[A^ε] + ε` and
/// `ν[A] ≤ μ[A^ε] + ε` for every subset A of the combined support, with
/// `A^ε` the open ε-neighborhood. For finite-support measures checking
/// subsets of the combined support is equivalent to checking all Borel
/// sets.
pub fn levy_prokhorov_with_cap(
    mu: &FiniteMeasure,
    nu: &FiniteMeasure,
    cap: usize,
) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return input_err("levy_prokhorov: dimension mismatch");
    }
    if mu == nu {
        return Ok(0.0);
    }
    let joint = JointSupport::build(mu, nu, cap)?;

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    // ok(1) always holds: both sides are probability measures.
    for _ in 0..60 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if joint.enlargement_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi)).clamp(0.0, 1.0))
}

/// Combined support of a pair of measures with precomputed pairwise
/// distances and subset masses, shared by the bisection and by the
/// exhaustive reference computation.
pub(crate) struct JointSupport {
    pub n: usize,
    pub dist: Vec<Vec<f64>>,
    pub mu_w: Vec<f64>,
    pub nu_w: Vec<f64>,
    pub mu_mass: Vec<f64>,
    pub nu_mass: Vec<f64>,
}

impl JointSupport {
    pub fn build(mu: &FiniteMeasure, nu: &FiniteMeasure, cap: usize) -> Result<Self> {
        let mut points: Vec<VectorPoint> = Vec::new();
        let mut mu_w: Vec<f64> = Vec::new();
        let mut nu_w: Vec<f64> = Vec::new();
        let mut place = |p: &VectorPoint| -> usize {
            if let Some(i) = points.iter().position(|q| q.same_point(p)) {
                i
            } else {
                points.push(p.clone());
                points.len() - 1
            }
        };
        for (p, w) in mu.support.iter().zip(&mu.weights) {
            let i = place(p);
            if i == mu_w.len() {
                mu_w.push(0.0);
                nu_w.push(0.0);
            }
            mu_w[i] += w;
        }
        for (p, w) in nu.support.iter().zip(&nu.weights) {
            let i = place(p);
            if i == mu_w.len() {
                mu_w.push(0.0);
                nu_w.push(0.0);
            }
            nu_w[i] += w;
        }
        let n = points.len();
        if n > cap {
            return Err(Error::Capacity(format!(
                "combined support {n} exceeds cap {cap}"
            )));
        }
        let dist: Vec<Vec<f64>> = points
            .iter()
            .map(|p| points.iter().map(|q| euclidean(p, q)).collect())
            .collect();
        // Subset masses by lowest-bit recursion.
        let full = 1usize << n;
        let mut mu_mass = vec![0.0f64; full];
        let mut nu_mass = vec![0.0f64; full];
        for a in 1..full {
            let low = a.trailing_zeros() as usize;
            mu_mass[a] = mu_mass[a & (a - 1)] + mu_w[low];
            nu_mass[a] = nu_mass[a & (a - 1)] + nu_w[low];
        }
        Ok(JointSupport { n, dist, mu_w, nu_w, mu_mass, nu_mass })
    }

    /// Whether both enlargement inequalities hold at level ε for every
    /// subset of the combined support.
    fn enlargement_ok(&self, eps: f64) -> bool {
        let n = self.n;
        // neighbor[j] = bitmask of support points whose open ε-ball contains j
        let mut neighbor = vec![0usize; n];
        for j in 0..n {
            let mut mask = 0usize;
            for i in 0..n {
                if in_open_ball(self.dist[i][j], eps) {
                    mask |= 1 << i;
                }
            }
            neighbor[j] = mask;
        }
        for a in 1..(1usize << n) {
            let mut mu_enl = 0.0;
            let mut nu_enl = 0.0;
            for j in 0..n {
                if a & neighbor[j] != 0 {
                    mu_enl += self.mu_w[j];
                    nu_enl += self.nu_w[j];
                }
            }
            if self.mu_mass[a] > nu_enl + eps || self.nu_mass[a] > mu_enl + eps {
                return false;
            }
        }
        true
    }
}

/// Smallest radius r such that the open ball around `x` captures more than
/// `delta` of the measure's mass for every radius past r. Mass exactly at
/// distance r is excluded (open-ball convention).
pub fn r_delta(x: &VectorPoint, mu: &FiniteMeasure, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return input_err(format!("delta must lie in (0,1), got {delta}"));
    }
    if x.dim() != mu.dim() {
        return input_err("r_delta: dimension mismatch");
    }
    let mut by_dist: Vec<(f64, f64)> = mu
        .support
        .iter()
        .zip(&mu.weights)
        .map(|(p, w)| (euclidean(x, p), *w))
        .collect();
    by_dist.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));

    // Accumulate mass over groups of (numerically) equal distances: all
    // points at distance <= d enter the ball together once r passes d.
    let mut cum = 0.0;
    let mut i = 0;
    while i < by_dist.len() {
        let d = by_dist[i].0;
        let mut j = i;
        while j < by_dist.len() && by_dist[j].0 - d <= DEDUP_TOL {
            cum += by_dist[j].1;
            j += 1;
        }
        if cum > delta {
            return Ok(d);
        }
        i = j;
    }
    // Unreachable: total mass 1 > delta.
    Ok(by_dist.last().map(|(d, _)| *d).unwrap_or(0.0))
}
