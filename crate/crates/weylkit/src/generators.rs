//! Deterministic test-input construction: quasi-periodic vector signals,
//! dense-module scalar signals, set-valued and measure-valued paths, and
//! the bounded-test-function panel check for measure-valued almost
//! periodicity.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{input_err, Result};
use crate::metric::{euclidean, FiniteMeasure, FiniteSet, MetricValue, Role, VectorPoint};
use crate::path::SampledPath;
use crate::period::{scan_periods, ScanParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub frequency: f64,
    pub amplitude: Vec<f64>,
    pub phase: f64,
}

/// Finite frequency content of a quasi-periodic signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpec {
    pub terms: Vec<Term>,
    pub seed: u64,
}

impl FrequencySpec {
    pub fn new(terms: Vec<Term>, seed: u64) -> Result<Self> {
        if terms.is_empty() {
            return input_err("frequency spec needs at least one term");
        }
        let dim = terms[0].amplitude.len();
        if dim == 0 || terms.iter().any(|t| t.amplitude.len() != dim) {
            return input_err("term amplitudes must share one dimension >= 1");
        }
        if terms
            .iter()
            .any(|t| !t.frequency.is_finite() || !t.phase.is_finite())
        {
            return input_err("frequencies and phases must be finite");
        }
        for i in 0..terms.len() {
            for j in (i + 1)..terms.len() {
                if terms[i].frequency == terms[j].frequency {
                    return input_err("frequencies must be distinct");
                }
            }
        }
        Ok(FrequencySpec { terms, seed })
    }

    /// Scalar spec from (frequency, amplitude, phase) triples.
    pub fn scalar(terms: &[(f64, f64, f64)], seed: u64) -> Result<Self> {
        FrequencySpec::new(
            terms
                .iter()
                .map(|(f, a, p)| Term { frequency: *f, amplitude: vec![*a], phase: *p })
                .collect(),
            seed,
        )
    }

    /// Spec with phases drawn uniformly from [0, 2π) by the seed.
    pub fn seeded_phases(pairs: &[(f64, Vec<f64>)], seed: u64) -> Result<Self> {
        let mut rng = StdRng::seed_from_u64(seed);
        FrequencySpec::new(
            pairs
                .iter()
                .map(|(f, a)| Term {
                    frequency: *f,
                    amplitude: a.clone(),
                    phase: rng.gen_range(0.0..2.0 * PI),
                })
                .collect(),
            seed,
        )
    }

    pub fn dim(&self) -> usize {
        self.terms[0].amplitude.len()
    }

    /// Σ_k a_k sin(2π λ_k t + φ_k).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for term in &self.terms {
            let s = (2.0 * PI * term.frequency * t + term.phase).sin();
            for (o, a) in out.iter_mut().zip(&term.amplitude) {
                *o += a * s;
            }
        }
        out
    }

    /// Σ_k |a_k|: a sup bound for each output coordinate.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude.iter().map(|a| a.abs()).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub h: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.t0 + i as f64 * self.h)
    }
}

/// f(t) = Σ_k a_k sin(2π λ_k t + φ_k), sampled.
pub fn quasi_periodic_signal(spec: &FrequencySpec, grid: &GridSpec) -> Result<SampledPath> {
    let values = grid
        .times()
        .map(|t| VectorPoint::new(spec.eval(t)).map(MetricValue::Vector))
        .collect::<Result<Vec<_>>>()?;
    SampledPath::new(grid.t0, grid.h, values)
}

/// First `count` rationals of (0, 1] in Stern–Brocot order: 1, then a
/// breadth-first walk of the left subtree (1/2, 1/3, 2/3, 1/4, 2/5, ...).
pub fn stern_brocot_rationals(count: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push((1, 1));
    // queue of (node, lo bound, hi bound); children are mediants
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(((1u64, 2u64), (0u64, 1u64), (1u64, 1u64)));
    while out.len() < count {
        let ((p, q), (pl, ql), (pr, qr)) = queue.pop_front().expect("infinite tree");
        out.push((p, q));
        queue.push_back((((pl + p), (ql + q)), (pl, ql), (p, q)));
        queue.push_back((((p + pr), (q + qr)), (p, q), (pr, qr)));
    }
    out
}

/// The fixed dense frequency enumeration: each Stern–Brocot rational q
/// interleaved with q·(1+√2). The module generated by any K ≥ 2 prefix
/// already contains 1 and √2.
pub fn dense_module_frequencies(k: usize) -> Vec<f64> {
    let rationals = stern_brocot_rationals(k / 2 + 1);
    let mut freqs = Vec::with_capacity(k);
    let silver = 1.0 + 2f64.sqrt();
    'outer: for (p, q) in rationals {
        let r = p as f64 / q as f64;
        for f in [r, r * silver] {
            freqs.push(f);
            if freqs.len() == k {
                break 'outer;
            }
        }
    }
    freqs
}

/// h(t) = Σ_{k=1..K} 2^{−k} sin(2π λ_k t) with λ_k the fixed dense
/// enumeration; scalar, bounded by 1 − 2^{−K}.
pub fn dense_module_signal(k: usize, grid: &GridSpec) -> Result<SampledPath> {
    if k == 0 {
        return input_err("dense module signal needs K >= 1");
    }
    let terms: Vec<Term> = dense_module_frequencies(k)
        .into_iter()
        .enumerate()
        .map(|(i, f)| Term {
            frequency: f,
            amplitude: vec![0.5f64.powi(i as i32 + 1)],
            phase: 0.0,
        })
        .collect();
    quasi_periodic_signal(&FrequencySpec::new(terms, 0)?, grid)
}

/// F(t) = c(t)·S0 + u(t) with u from `translate` and c(t) = 1 +
/// 0.5·(scale signal normalized to [−1, 1] by its amplitude sum), so
/// c ∈ [0.5, 1.5]. Without a scale spec, c ≡ 1.
pub fn set_valued_path(
    s0: &FiniteSet,
    translate: &FrequencySpec,
    scale: Option<&FrequencySpec>,
    grid: &GridSpec,
) -> Result<SampledPath> {
    if translate.dim() != s0.dim() {
        return input_err("translate signal dimension must match the base set");
    }
    if let Some(sc) = scale {
        if sc.dim() != 1 {
            return input_err("scale signal must be scalar");
        }
    }
    let norm = scale.map(|sc| sc.amplitude_sum()).unwrap_or(0.0);
    let values = grid
        .times()
        .map(|t| {
            let u = translate.eval(t);
            let c = match scale {
                Some(sc) if norm > 0.0 => 1.0 + 0.5 * sc.eval(t)[0] / norm,
                _ => 1.0,
            };
            let points = s0
                .points()
                .iter()
                .map(|p| {
                    VectorPoint::new(
                        p.coords()
                            .iter()
                            .zip(&u)
                            .map(|(x, du)| c * x + du)
                            .collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MetricValue::Set(FiniteSet::new(points)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SampledPath::new(grid.t0, grid.h, values)
}

/// Weight floor of measure-valued paths.
pub const WEIGHT_FLOOR: f64 = 0.01;

/// μ[·;t] = Σ_k w_k(t) δ_{x_k(t)}: softmax-normalized almost periodic
/// weights with floor 0.01, quasi-periodic locations. Support points
/// that collide within the dedup tolerance are merged.
pub fn measure_valued_path(
    components: &[(FrequencySpec, FrequencySpec)],
    grid: &GridSpec,
) -> Result<SampledPath> {
    if components.is_empty() {
        return input_err("measure path needs at least one component");
    }
    let k = components.len();
    if WEIGHT_FLOOR * k as f64 >= 1.0 {
        return input_err("too many components for the weight floor");
    }
    let dim = components[0].1.dim();
    if components.iter().any(|(w, x)| w.dim() != 1 || x.dim() != dim) {
        return input_err("weights must be scalar and locations share one dimension");
    }
    let free = 1.0 - WEIGHT_FLOOR * k as f64;
    let values = grid
        .times()
        .map(|t| {
            let raw: Vec<f64> = components.iter().map(|(w, _)| w.eval(t)[0]).collect();
            let peak = raw.iter().cloned().fold(f64::MIN, f64::max);
            let exp: Vec<f64> = raw.iter().map(|v| (v - peak).exp()).collect();
            let total: f64 = exp.iter().sum();
            let weights: Vec<f64> = exp
                .iter()
                .map(|e| WEIGHT_FLOOR + free * e / total)
                .collect();
            let support = components
                .iter()
                .map(|(_, x)| VectorPoint::new(x.eval(t)))
                .collect::<Result<Vec<_>>>()?;
            Ok(MetricValue::Measure(FiniteMeasure::merging(
                support, weights,
            )?))
        })
        .collect::<Result<Vec<_>>>()?;
    SampledPath::new(grid.t0, grid.h, values)
}

/// Scan outcome for one bounded test function of the panel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CbFunctionResult {
    pub center: Vec<f64>,
    pub detected: usize,
    pub inclusion_length: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CbPanelReport {
    pub epsilon: f64,
    pub l: f64,
    /// Shared Gaussian width and the resulting Lipschitz constant.
    pub width: f64,
    pub lipschitz: f64,
    pub per_function: Vec<CbFunctionResult>,
    /// Max inclusion length over the panel; absent when any function's
    /// scan fails relative density.
    pub worst_inclusion_length: Option<f64>,
}

/// Necessary-condition probe for measure-valued almost periodicity: a
/// deterministic panel of Gaussian bumps ℱ_j centered by greedy k-center
/// over the pooled supports; each scalar path t ↦ Σ w_i(t) ℱ_j(x_i(t))
/// is scanned for ε-almost periods and the worst inclusion length is
/// reported.
pub fn cb_panel_check(
    mu: &SampledPath,
    panel: usize,
    epsilon: f64,
    l: f64,
    tau_step: f64,
    t_max: f64,
) -> Result<CbPanelReport> {
    if mu.role() != Role::Measure {
        return input_err("cb_panel_check needs a measure-role path");
    }
    if panel == 0 {
        return input_err("panel size must be at least 1");
    }
    // Pool supports from a strided subsample, then k-center the pool.
    let stride = (mu.len() / 512).max(1);
    let mut pool: Vec<VectorPoint> = Vec::new();
    for i in (0..mu.len()).step_by(stride) {
        let MetricValue::Measure(m) = mu.value(i) else { unreachable!() };
        pool.extend(m.support().iter().cloned());
    }
    let mut diameter = 0.0f64;
    for i in 0..pool.len() {
        for j in (i + 1)..pool.len() {
            diameter = diameter.max(euclidean(&pool[i], &pool[j]));
        }
    }
    let centers = k_center(&pool, panel);
    let width = if diameter > 0.0 { diameter / panel as f64 } else { 1.0 };
    let lipschitz = (2.0 / std::f64::consts::E).sqrt() / width;

    let params = ScanParams {
        kind: crate::metric::MetricKind::base(crate::metric::BaseMetric::Euclidean),
        p: 1.0,
        l,
        tau_step,
        t_max,
    };
    let mut per_function = Vec::with_capacity(centers.len());
    let mut worst: Option<f64> = Some(0.0);
    for c in &centers {
        let values = mu
            .values()
            .iter()
            .map(|v| {
                let MetricValue::Measure(m) = v else { unreachable!() };
                let y: f64 = m
                    .support()
                    .iter()
                    .zip(m.weights())
                    .map(|(x, w)| {
                        let d = euclidean(x, c);
                        w * (-d * d / (width * width)).exp()
                    })
                    .sum();
                MetricValue::Vector(VectorPoint::scalar(y))
            })
            .collect();
        let path = SampledPath::new(mu.t0(), mu.h(), values)?;
        let aps = scan_periods(&path, params, epsilon)?;
        let incl = aps.inclusion_length();
        worst = match (worst, incl) {
            (Some(w), Some(i)) => Some(w.max(i)),
            _ => None,
        };
        per_function.push(CbFunctionResult {
            center: c.coords().to_vec(),
            detected: aps.len(),
            inclusion_length: incl,
        });
    }
    Ok(CbPanelReport {
        epsilon,
        l,
        width,
        lipschitz,
        per_function,
        worst_inclusion_length: worst,
    })
}

/// Greedy farthest-first centers over a point pool (2-approximation of
/// the k-center radius). Ties break to the earliest pool index.
fn k_center(pool: &[VectorPoint], k: usize) -> Vec<VectorPoint> {
    if pool.is_empty() {
        return Vec::new();
    }
    let mut centers = vec![pool[0].clone()];
    let mut min_dist: Vec<f64> = pool.iter().map(|p| euclidean(p, &pool[0])).collect();
    while centers.len() < k {
        let mut far = 0usize;
        for i in 1..pool.len() {
            if min_dist[i] > min_dist[far] {
                far = i;
            }
        }
        if min_dist[far] == 0.0 {
            break;
        }
        let c = pool[far].clone();
        for i in 0..pool.len() {
            let d = euclidean(&pool[i], &c);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
        }
        centers.push(c);
    }
    centers
}
