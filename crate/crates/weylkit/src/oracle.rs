//! Slow, obviously-correct reference implementations used to cross-check
//! the optimized paths, plus seeded random input generators for those
//! checks.

use rand::Rng;

use crate::error::{input_err, Result};
use crate::metric::{
    dist, euclidean, FiniteMeasure, FiniteSet, MetricKind, VectorPoint,
};
use crate::path::{overlap_pair, shift, window_mean_p, SampledPath};
use crate::period::ScanParams;

/// Exhaustive Lévy–Prokhorov distance: walks every subset of the joint
/// support and every enlargement breakpoint. Exponential in the support
/// size, capped at 10 points.
pub fn lp_exhaustive(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<f64> {
    fn absorb(
        source: &FiniteMeasure,
        first: bool,
        points: &mut Vec<VectorPoint>,
        mu_w: &mut Vec<f64>,
        nu_w: &mut Vec<f64>,
    ) {
        for (p, w) in source.support().iter().zip(source.weights()) {
            let i = match points.iter().position(|q| q.same_point(p)) {
                Some(i) => i,
                None => {
                    points.push(p.clone());
                    mu_w.push(0.0);
                    nu_w.push(0.0);
                    points.len() - 1
                }
            };
            if first {
                mu_w[i] += w;
            } else {
                nu_w[i] += w;
            }
        }
    }
    let mut points: Vec<VectorPoint> = Vec::new();
    let mut mu_w: Vec<f64> = Vec::new();
    let mut nu_w: Vec<f64> = Vec::new();
    absorb(mu, true, &mut points, &mut mu_w, &mut nu_w);
    absorb(nu, false, &mut points, &mut mu_w, &mut nu_w);
    let n = points.len();
    if n > 10 {
        return input_err("lp_exhaustive supports at most 10 joint support points");
    }
    let d: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| euclidean(&points[i], &points[j])).collect())
        .collect();

    let mut worst = 0.0f64;
    for mask in 1u32..(1 << n) {
        let mut mu_a = 0.0;
        let mut nu_a = 0.0;
        let mut reach = vec![f64::INFINITY; n];
        for i in 0..n {
            if mask & (1 << i) != 0 {
                mu_a += mu_w[i];
                nu_a += nu_w[i];
                for j in 0..n {
                    reach[j] = reach[j].min(d[i][j]);
                }
            }
        }
        let mut thresholds: Vec<f64> = reach.clone();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        // On ε ∈ (t_k, t_{k+1}] the open enlargement is {reach ≤ t_k};
        // the first interval admitting ε = max(t_k, mass gap) is optimal.
        for (k, t) in thresholds.iter().enumerate() {
            let mut mu_b = 0.0;
            let mut nu_b = 0.0;
            for j in 0..n {
                if reach[j] <= *t {
                    mu_b += mu_w[j];
                    nu_b += nu_w[j];
                }
            }
            let gap = (mu_a - nu_b).max(nu_a - mu_b).max(0.0);
            let candidate = gap.max(*t);
            let upper = thresholds.get(k + 1).copied().unwrap_or(f64::INFINITY);
            if candidate <= upper {
                worst = worst.max(candidate);
                break;
            }
        }
    }
    Ok(worst)
}

/// Recursive adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// Direct double-loop sliding-window supremum, no prefix sums.
pub fn window_mean_naive(
    f: &SampledPath,
    g: &SampledPath,
    kind: MetricKind,
    p: f64,
    l: f64,
) -> Result<f64> {
    if !f.same_grid(g) {
        return input_err("paths must share one grid");
    }
    let w = (l / f.h()).round() as usize;
    if w < 1 || w > f.len() {
        return input_err("window does not fit the path");
    }
    let rho: Vec<f64> = (0..f.len())
        .map(|i| dist(kind, f.value(i), g.value(i)))
        .collect::<Result<Vec<_>>>()?;
    let mut sup = 0.0f64;
    for start in 0..=(f.len() - w) {
        let mut acc = 0.0;
        for r in &rho[start..start + w] {
            acc += r.powf(p);
        }
        sup = sup.max(acc / w as f64);
    }
    Ok(sup.powf(1.0 / p))
}

/// A τ scan assembled from the public shift/overlap/window primitives,
/// one full computation per τ with no mirroring.
pub struct NaiveScan {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub skipped: Vec<f64>,
}

pub fn scan_naive(f: &SampledPath, params: ScanParams) -> Result<NaiveScan> {
    let k_max = (params.t_max / params.tau_step + 1e-9).floor() as i64;
    let w = (params.l / f.h()).round() as usize;
    let mut taus = Vec::new();
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for k in -k_max..=k_max {
        let tau = k as f64 * params.tau_step;
        if k == 0 {
            taus.push(0.0);
            values.push(0.0);
            continue;
        }
        let shifted = shift(f, tau)?;
        let (a, b) = overlap_pair(f, &shifted.path)?;
        if a.len() < w {
            skipped.push(tau);
            continue;
        }
        let stat = window_mean_p(&a, &b, params.kind, params.p, params.l)?;
        taus.push(tau);
        values.push(stat.value);
    }
    Ok(NaiveScan { taus, values, skipped })
}

/// r_δ by bisection on the cumulative mass function instead of the
/// sorted-distance walk.
pub fn r_delta_bisect(x: &VectorPoint, mu: &FiniteMeasure, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return input_err("delta must lie in (0, 1)");
    }
    let dists: Vec<f64> = mu.support().iter().map(|p| euclidean(x, p)).collect();
    let mass_within = |r: f64| -> f64 {
        dists
            .iter()
            .zip(mu.weights())
            .filter(|(d, _)| **d <= r)
            .map(|(_, w)| w)
            .sum()
    };
    let mut lo = -1.0;
    let mut hi = dists.iter().cloned().fold(0.0, f64::max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mass_within(mid) > delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(0.0))
}

pub fn random_vector(rng: &mut impl Rng, dim: usize, scale: f64) -> VectorPoint {
    VectorPoint::new((0..dim).map(|_| rng.gen_range(-scale..scale)).collect())
        .expect("finite coords")
}

pub fn random_set(rng: &mut impl Rng, dim: usize, max_points: usize, scale: f64) -> FiniteSet {
    let count = rng.gen_range(1..=max_points);
    FiniteSet::new((0..count).map(|_| random_vector(rng, dim, scale)).collect())
        .expect("valid points")
}

/// Random measure with weights bounded away from zero before
/// normalization.
pub fn random_measure(
    rng: &mut impl Rng,
    dim: usize,
    max_support: usize,
    scale: f64,
) -> FiniteMeasure {
    let count = rng.gen_range(1..=max_support);
    let support: Vec<VectorPoint> = (0..count).map(|_| random_vector(rng, dim, scale)).collect();
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    FiniteMeasure::merging(support, weights).expect("valid measure")
}
