//! Single-valued selections out of set-valued and measure-valued paths,
//! and the verification harness that checks a selection inherits the
//! almost periods of its inputs.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{input_err, Result};
use crate::metric::{euclidean, r_delta, BaseMetric, MetricKind, MetricValue, Role, VectorPoint};
use crate::path::SampledPath;
use crate::period::{containment_check, intersect, scan_values, ScanParams, TauScan};

/// Slack tolerance on bound comparisons, applied on the favorable side.
const BOUND_TOL: f64 = 1e-12;

/// Monotone piecewise-linear slack envelope through (0, 0). Constant
/// beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackFunction {
    breakpoints: Vec<(f64, f64)>,
}

impl SlackFunction {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.first() != Some(&(0.0, 0.0)) {
            return input_err("slack function must start at (0, 0)");
        }
        for w in breakpoints.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return input_err("slack breakpoints must strictly increase in both coordinates");
            }
        }
        if breakpoints.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return input_err("slack breakpoints must be finite");
        }
        Ok(SlackFunction { breakpoints })
    }

    /// η(d) = d up to `reach`.
    pub fn identity(reach: f64) -> Self {
        SlackFunction { breakpoints: vec![(0.0, 0.0), (reach.max(1.0), reach.max(1.0))] }
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn eval(&self, d: f64) -> f64 {
        let d = d.max(0.0);
        let last = *self.breakpoints.last().expect("nonempty");
        if d >= last.0 {
            return last.1;
        }
        for w in self.breakpoints.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if d <= x1 {
                return y0 + (y1 - y0) * (d - x0) / (x1 - x0);
            }
        }
        last.1
    }

    /// Truncates the envelope where it first reaches `cap`; constant cap
    /// beyond. `identity(r).capped(d)` is the capped identity used by the
    /// dense-module verification.
    pub fn capped(&self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) || !cap.is_finite() {
            return input_err("cap must be positive and finite");
        }
        let mut points = vec![(0.0, 0.0)];
        for w in self.breakpoints.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y1 < cap {
                points.push((x1, y1));
            } else {
                let x = x0 + (x1 - x0) * (cap - y0) / (y1 - y0);
                points.push((x, cap));
                break;
            }
        }
        SlackFunction::new(points)
    }
}

/// Outcome of checking one pointwise bound over a whole grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub violations: usize,
    /// Min over the grid of (right side − left side); positive means the
    /// bound held everywhere with room.
    pub worst_margin: f64,
}

/// A selected single-valued path plus its pointwise guarantees.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub f: SampledPath,
    pub membership_ok: bool,
    pub bound: BoundReport,
    /// Grid cells where no candidate survived the radius filter and the
    /// global nearest point was used instead.
    pub fallbacks: usize,
    pub params: serde_json::Value,
}

fn check_pair(g: &SampledPath, other: &SampledPath, role: Role, what: &str) -> Result<()> {
    if g.role() != Role::Vector || other.role() != role {
        return input_err(what);
    }
    if g.dim() != other.dim() {
        return input_err("paths must share one dimension");
    }
    if !g.same_grid(other) {
        return input_err("paths must share one grid");
    }
    Ok(())
}

/// f(t) = the point of F(t) nearest to g(t), ties to the
/// lexicographically smallest point. Checks ρ(g(t), f(t)) ≤
/// ρ(g(t), F(t)) + η(ρ(g(t), F(t))) non-strictly; with exact nearest
/// points the left side equals ρ(g(t), F(t)) and the margin is η.
pub fn nearest_point_selection(
    g: &SampledPath,
    sets: &SampledPath,
    eta: &SlackFunction,
) -> Result<SelectionResult> {
    check_pair(g, sets, Role::Set, "nearest_point_selection needs a vector path and a set path")?;
    let mut values = Vec::with_capacity(g.len());
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    let mut membership_ok = true;
    for i in 0..g.len() {
        let MetricValue::Vector(x) = g.value(i) else { unreachable!() };
        let MetricValue::Set(set) = sets.value(i) else { unreachable!() };
        // Points are lex-sorted, so the first strict minimum is also the
        // lex-smallest point attaining it.
        let mut best = &set.points()[0];
        let mut best_d = euclidean(x, best);
        for p in &set.points()[1..] {
            let d = euclidean(x, p);
            if d < best_d {
                best = p;
                best_d = d;
            }
        }
        let rhs = best_d + eta.eval(best_d);
        if best_d > rhs + BOUND_TOL {
            violations += 1;
        }
        worst = worst.min(rhs - best_d);
        membership_ok &= set.points().iter().any(|p| p.same_point(best));
        values.push(MetricValue::Vector(best.clone()));
    }
    Ok(SelectionResult {
        f: SampledPath::new(g.t0(), g.h(), values)?,
        membership_ok,
        bound: BoundReport { violations, worst_margin: worst },
        fallbacks: 0,
        params: json!({ "mode": "nearest", "eta": eta.breakpoints }),
    })
}

/// f(t) = the support point of μ(t) nearest to g(t) among those within
/// the enlarged quantile radius r_δ(g(t), μ(t)) + δ, ties to the
/// lexicographically smallest. Checks ρ(g(t), f(t)) < r_δ + δ strictly.
pub fn measure_selection(
    g: &SampledPath,
    measures: &SampledPath,
    delta: f64,
) -> Result<SelectionResult> {
    check_pair(g, measures, Role::Measure, "measure_selection needs a vector path and a measure path")?;
    if !(delta > 0.0 && delta < 1.0) {
        return input_err("delta must lie in (0, 1)");
    }
    let mut values = Vec::with_capacity(g.len());
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    let mut membership_ok = true;
    let mut fallbacks = 0usize;
    for i in 0..g.len() {
        let MetricValue::Vector(x) = g.value(i) else { unreachable!() };
        let MetricValue::Measure(mu) = measures.value(i) else { unreachable!() };
        let r = r_delta(x, mu, delta)?;
        let radius = r + delta;
        let mut best: Option<(&VectorPoint, f64)> = None;
        for p in mu.support() {
            let d = euclidean(x, p);
            if d < radius {
                let replace = match best {
                    None => true,
                    Some((bp, bd)) => d < bd || (d == bd && p.lex_cmp(bp).is_lt()),
                };
                if replace {
                    best = Some((p, d));
                }
            }
        }
        let (chosen, d) = match best {
            Some(b) => b,
            None => {
                // r_δ is itself a support distance, so this only fires on
                // degenerate tolerance interactions.
                fallbacks += 1;
                let mut b = &mu.support()[0];
                let mut bd = euclidean(x, b);
                for p in &mu.support()[1..] {
                    let pd = euclidean(x, p);
                    if pd < bd || (pd == bd && p.lex_cmp(b).is_lt()) {
                        b = p;
                        bd = pd;
                    }
                }
                (b, bd)
            }
        };
        if d >= radius - BOUND_TOL {
            violations += 1;
        }
        worst = worst.min(radius - d);
        membership_ok &= mu.support().iter().any(|p| p.same_point(chosen));
        values.push(MetricValue::Vector(chosen.clone()));
    }
    Ok(SelectionResult {
        f: SampledPath::new(g.t0(), g.h(), values)?,
        membership_ok,
        bound: BoundReport { violations, worst_margin: worst },
        fallbacks,
        params: json!({ "mode": "measure", "delta": delta }),
    })
}

/// Scan geometry shared by the verification harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub l: f64,
    pub tau_step: f64,
    pub t_max: f64,
    /// Also scan the selection at 2·t_max to probe inclusion-length
    /// stability.
    pub double_range: bool,
}

/// ε together with the calibrated ε′ at which the selection's almost
/// periods absorb the inputs' common ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainmentPoint {
    pub eps: f64,
    pub eps_prime: Option<f64>,
    /// Worst selection-scan value over the common almost periods.
    pub margin: Option<f64>,
}

/// Inclusion length of the selection's ε′-almost periods at the scan
/// range and at twice the range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionRecord {
    pub eps: f64,
    pub eps_prime: Option<f64>,
    pub at_range: Option<f64>,
    pub at_doubled_range: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WpEvidence {
    pub p: f64,
    pub eps: f64,
    pub detected: usize,
    pub inclusion_length: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: String,
    pub membership_ok: bool,
    pub bound: BoundReport,
    pub fallbacks: usize,
    pub containment_curve: Vec<ContainmentPoint>,
    pub inclusion_lengths: Vec<InclusionRecord>,
    pub wp_evidence: Vec<WpEvidence>,
    /// Membership and bound hold and every ε calibrated to a finite ε′.
    pub passed: bool,
}

/// The candidate ε′ levels tried in order: small multiples of ε, then
/// the truncated-metric ceiling.
pub fn calibration_ladder(epsilon: f64) -> Vec<f64> {
    let mut out: Vec<f64> = [1.0, 2.0, 3.0, 5.0, 8.0]
        .iter()
        .map(|m| m * epsilon)
        .filter(|v| *v < 1.0)
        .collect();
    out.push(1.0);
    out
}

fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return input_err("need at least one epsilon");
    }
    if epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return input_err("epsilons must be positive and finite");
    }
    Ok(())
}

struct ScanBundle {
    now: TauScan,
    doubled: Option<TauScan>,
}

fn scan_both(f: &SampledPath, params: ScanParams, double: bool) -> Result<ScanBundle> {
    let now = scan_values(f, params)?;
    let doubled = if double {
        Some(scan_values(f, ScanParams { t_max: 2.0 * params.t_max, ..params })?)
    } else {
        None
    };
    Ok(ScanBundle { now, doubled })
}

/// Per ε: intersect the constituents' almost periods into the common set
/// T, calibrate the smallest ε′ whose selection scan contains T, and
/// record the selection's inclusion lengths at ε′ plus its W_p evidence
/// at p ∈ {1, 2}.
fn verify_core(
    constituents: &[&TauScan],
    f1: &ScanBundle,
    f2: &TauScan,
    epsilons: &[f64],
) -> Result<(Vec<ContainmentPoint>, Vec<InclusionRecord>, Vec<WpEvidence>)> {
    let mut curve = Vec::new();
    let mut inclusion = Vec::new();
    let mut wp = Vec::new();
    for &eps in epsilons {
        let parts = constituents
            .iter()
            .map(|s| s.threshold(eps))
            .collect::<Result<Vec<_>>>()?;
        let common = intersect(&parts)?;
        let mut eps_prime = None;
        let mut margin = None;
        for cand in calibration_ladder(eps) {
            let outer = f1.now.threshold(cand)?;
            let report = containment_check(&outer, &common)?;
            if report.contained {
                eps_prime = Some(cand);
                margin = report.margin;
                break;
            }
        }
        curve.push(ContainmentPoint { eps, eps_prime, margin });

        let (mut at_range, mut at_doubled_range) = (None, None);
        if let Some(ep) = eps_prime {
            at_range = f1.now.threshold(ep)?.inclusion_length();
            if let Some(far) = &f1.doubled {
                at_doubled_range = far.threshold(ep)?.inclusion_length();
            }
        }
        inclusion.push(InclusionRecord { eps, eps_prime, at_range, at_doubled_range });

        for (p, scan) in [(1.0, &f1.now), (2.0, f2)] {
            let aps = scan.threshold(eps)?;
            wp.push(WpEvidence {
                p,
                eps,
                detected: aps.len(),
                inclusion_length: aps.inclusion_length(),
            });
        }
    }
    Ok((curve, inclusion, wp))
}

fn finish_report(
    mode: &str,
    selection: &SelectionResult,
    parts: (Vec<ContainmentPoint>, Vec<InclusionRecord>, Vec<WpEvidence>),
) -> VerifyReport {
    let (containment_curve, inclusion_lengths, wp_evidence) = parts;
    let passed = selection.membership_ok
        && selection.bound.violations == 0
        && containment_curve.iter().all(|c| c.eps_prime.is_some());
    VerifyReport {
        mode: mode.to_string(),
        membership_ok: selection.membership_ok,
        bound: selection.bound.clone(),
        fallbacks: selection.fallbacks,
        containment_curve,
        inclusion_lengths,
        wp_evidence,
        passed,
    }
}

/// Runs the nearest-point selection and verifies it: every τ that is a
/// common ε-almost period of g and F (truncated metrics, p = 1) must be
/// an ε′-almost period of the selection for some calibrated ε′.
pub fn verify_set_selection(
    g: &SampledPath,
    sets: &SampledPath,
    eta: &SlackFunction,
    epsilons: &[f64],
    params: &VerifyParams,
) -> Result<(SelectionResult, VerifyReport)> {
    check_epsilons(epsilons)?;
    let selection = nearest_point_selection(g, sets, eta)?;
    let base = ScanParams {
        kind: MetricKind::truncated(BaseMetric::Euclidean),
        p: 1.0,
        l: params.l,
        tau_step: params.tau_step,
        t_max: params.t_max,
    };
    let sg = scan_values(g, base)?;
    let sf = scan_values(
        sets,
        ScanParams { kind: MetricKind::truncated(BaseMetric::Hausdorff), ..base },
    )?;
    let f1 = scan_both(&selection.f, base, params.double_range)?;
    let f2 = scan_values(&selection.f, ScanParams { p: 2.0, ..base })?;
    let parts = verify_core(&[&sg, &sf], &f1, &f2, epsilons)?;
    let report = finish_report("set", &selection, parts);
    Ok((selection, report))
}

/// Dense-module variant: the selection is built with the slack envelope
/// capped at δ, the pointwise bound ρ(g(t), f(t)) < ρ(g(t), F(t)) + δ is
/// checked strictly, and the scalar path h joins the intersection, so
/// the selection must absorb T(ε) ∩ 𝒫(ε; h).
pub fn verify_dense_selection(
    g: &SampledPath,
    sets: &SampledPath,
    h: &SampledPath,
    delta: f64,
    epsilons: &[f64],
    params: &VerifyParams,
) -> Result<(SelectionResult, VerifyReport)> {
    check_epsilons(epsilons)?;
    if !(delta > 0.0 && delta < 1.0) {
        return input_err("delta must lie in (0, 1)");
    }
    if h.role() != Role::Vector || h.dim() != 1 {
        return input_err("h must be a scalar vector-role path");
    }
    let eta = SlackFunction::identity(1.0).capped(delta)?;
    let mut selection = nearest_point_selection(g, sets, &eta)?;
    // The bound specific to this mode is strict with slack δ; the nearest
    // distance equals ρ(g(t), F(t)), so it holds with margin exactly δ.
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for i in 0..g.len() {
        let MetricValue::Vector(x) = g.value(i) else { unreachable!() };
        let MetricValue::Set(set) = sets.value(i) else { unreachable!() };
        let MetricValue::Vector(chosen) = selection.f.value(i) else { unreachable!() };
        let lhs = euclidean(x, chosen);
        let dist_to_set = set
            .points()
            .iter()
            .map(|p| euclidean(x, p))
            .fold(f64::INFINITY, f64::min);
        let rhs = dist_to_set + delta;
        if lhs >= rhs - BOUND_TOL {
            violations += 1;
        }
        worst = worst.min(rhs - lhs);
    }
    selection.bound = BoundReport { violations, worst_margin: worst };
    selection.params = json!({ "mode": "dense", "delta": delta, "eta": eta.breakpoints() });

    let base = ScanParams {
        kind: MetricKind::truncated(BaseMetric::Euclidean),
        p: 1.0,
        l: params.l,
        tau_step: params.tau_step,
        t_max: params.t_max,
    };
    let sg = scan_values(g, base)?;
    let sf = scan_values(
        sets,
        ScanParams { kind: MetricKind::truncated(BaseMetric::Hausdorff), ..base },
    )?;
    let sh = scan_values(h, base)?;
    let f1 = scan_both(&selection.f, base, params.double_range)?;
    let f2 = scan_values(&selection.f, ScanParams { p: 2.0, ..base })?;
    let parts = verify_core(&[&sg, &sf, &sh], &f1, &f2, epsilons)?;
    let report = finish_report("dense", &selection, parts);
    Ok((selection, report))
}
