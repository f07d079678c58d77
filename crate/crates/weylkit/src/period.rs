//! ε-almost-period detection on the τ grid: scans, relative-density
//! witnesses, joint intersections, and containment checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::metric::MetricKind;
use crate::path::{root_p, window_sup_pair, SampledPath, GRID_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    pub kind: MetricKind,
    pub p: f64,
    /// Window length for D(p,l) at each τ.
    pub l: f64,
    /// τ grid step; must be a whole number of cells.
    pub tau_step: f64,
    /// Scan range [−t_max, t_max]; at most half the window length.
    pub t_max: f64,
}

/// Per-τ metric values over the scan grid. One scan serves every ε
/// threshold, calibration ladder, and margin query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauScan {
    pub params: ScanParams,
    pub l_eff: f64,
    pub rounding: f64,
    taus: Vec<f64>,
    values: Vec<f64>,
    skipped: Vec<f64>,
}

/// Scan-grid index of τ.
fn tau_key(tau: f64, tau_step: f64) -> i64 {
    (tau / tau_step).round() as i64
}

/// Evaluates D(p,l)(f, f(·+τ)) on the overlap for every grid τ in
/// [−t_max, t_max]. The distance sequence of −τ is the mirror image of
/// +τ's, so each magnitude is computed once and shared by both signs.
/// τ values whose overlap is shorter than the window are skipped and
/// recorded.
pub fn scan_values(f: &SampledPath, params: ScanParams) -> Result<TauScan> {
    let h = f.h();
    let n = f.len();
    if !(params.tau_step.is_finite() && params.tau_step > 0.0) {
        return input_err("tau_step must be positive");
    }
    let s = (params.tau_step / h).round();
    if s < 1.0 || (params.tau_step - s * h).abs() > GRID_TOL * h {
        return input_err("tau_step must be a whole number of grid cells");
    }
    let s = s as usize;
    if !(params.t_max.is_finite() && params.t_max > 0.0) {
        return input_err("t_max must be positive");
    }
    if params.t_max > f.window_length() / 2.0 + GRID_TOL * h {
        return input_err("t_max must not exceed half the window length");
    }
    if !(params.p.is_finite() && params.p >= 1.0) {
        return input_err("exponent p must be finite and >= 1");
    }
    let w = (params.l / h).round();
    if !(params.l.is_finite() && params.l > 0.0) || w < 1.0 {
        return input_err("window length l must be positive");
    }
    let w = w as usize;
    if w > n {
        return input_err("window length l exceeds the domain");
    }
    let l_eff = w as f64 * h;
    let k_max = (params.t_max / params.tau_step + GRID_TOL).floor() as usize;

    let values = f.values();
    let per_k: Vec<(f64, Option<f64>)> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let cells = k * s;
            let tau = (cells as f64) * h;
            if n - cells < w {
                return Ok((tau, None));
            }
            let overlap = n - cells;
            let (mean, _) =
                window_sup_pair(&values[..overlap], &values[cells..], params.kind, params.p, w)?;
            Ok((tau, Some(root_p(mean, params.p))))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut taus = Vec::with_capacity(2 * k_max + 1);
    let mut vals = Vec::with_capacity(2 * k_max + 1);
    let mut skipped = Vec::new();
    for (tau, v) in per_k.iter().rev() {
        if *tau == 0.0 {
            continue;
        }
        match v {
            Some(v) => {
                taus.push(-tau);
                vals.push(*v);
            }
            None => skipped.push(-tau),
        }
    }
    for (tau, v) in &per_k {
        match v {
            Some(v) => {
                taus.push(*tau);
                vals.push(*v);
            }
            None => skipped.push(*tau),
        }
    }
    skipped.sort_by(|a, b| a.partial_cmp(b).expect("finite taus"));
    Ok(TauScan {
        params,
        l_eff,
        rounding: (params.l - l_eff).abs(),
        taus,
        values: vals,
        skipped,
    })
}

impl TauScan {
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn skipped(&self) -> &[f64] {
        &self.skipped
    }

    pub fn value_at(&self, tau: f64) -> Option<f64> {
        let key = tau_key(tau, self.params.tau_step);
        self.taus
            .iter()
            .position(|t| tau_key(*t, self.params.tau_step) == key)
            .map(|i| self.values[i])
    }

    /// Applies the ε threshold: an almost-period set containing the
    /// scanned τ with value < ε, carrying the full scan for margin
    /// queries.
    pub fn threshold(&self, epsilon: f64) -> Result<AlmostPeriodSet> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return input_err("epsilon must be positive");
        }
        let mut taus = Vec::new();
        let mut values = Vec::new();
        for (t, v) in self.taus.iter().zip(&self.values) {
            if *v < epsilon {
                taus.push(*t);
                values.push(*v);
            }
        }
        let inclusion_length = max_gap(&taus);
        Ok(AlmostPeriodSet {
            epsilon: vec![epsilon],
            kind: vec![self.params.kind],
            p: vec![self.params.p],
            l: vec![self.l_eff],
            tau_step: self.params.tau_step,
            t_max: self.params.t_max,
            taus,
            values,
            inclusion_length,
            skipped: self.skipped.clone(),
            scan: Some(ScanArrays { taus: self.taus.clone(), values: self.values.clone() }),
        })
    }
}

/// One-shot scan + threshold.
pub fn scan_periods(f: &SampledPath, params: ScanParams, epsilon: f64) -> Result<AlmostPeriodSet> {
    scan_values(f, params)?.threshold(epsilon)
}

/// Max gap between consecutive detected τ: the empirical inclusion
/// length witnessing relative density. Absent below 3 detections.
fn max_gap(taus: &[f64]) -> Option<f64> {
    if taus.len() < 3 {
        return None;
    }
    let mut gap = 0.0f64;
    for w in taus.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    Some(gap)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScanArrays {
    taus: Vec<f64>,
    values: Vec<f64>,
}

/// Detected ε-almost periods of one scan, or the intersection of
/// several. The parameter vectors hold one entry per constituent scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlmostPeriodSet {
    pub epsilon: Vec<f64>,
    pub kind: Vec<MetricKind>,
    pub p: Vec<f64>,
    pub l: Vec<f64>,
    pub tau_step: f64,
    pub t_max: f64,
    /// Detected τ, ascending.
    pub taus: Vec<f64>,
    /// Metric value at each detected τ (max over constituents for an
    /// intersection).
    pub values: Vec<f64>,
    pub inclusion_length: Option<f64>,
    /// τ skipped for short overlap.
    pub skipped: Vec<f64>,
    #[serde(skip)]
    scan: Option<ScanArrays>,
}

impl AlmostPeriodSet {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn contains(&self, tau: f64) -> bool {
        let key = tau_key(tau, self.tau_step);
        self.taus.iter().any(|t| tau_key(*t, self.tau_step) == key)
    }

    pub fn inclusion_length(&self) -> Option<f64> {
        self.inclusion_length
    }

    /// Metric value at a scanned τ, whether detected or not. Needs the
    /// full scan, which deserialized sets no longer carry.
    pub fn value_at(&self, tau: f64) -> Option<f64> {
        let key = tau_key(tau, self.tau_step);
        if let Some(scan) = &self.scan {
            return scan
                .taus
                .iter()
                .position(|t| tau_key(*t, self.tau_step) == key)
                .map(|i| scan.values[i]);
        }
        self.taus
            .iter()
            .position(|t| tau_key(*t, self.tau_step) == key)
            .map(|i| self.values[i])
    }

    fn same_grid(&self, other: &AlmostPeriodSet) -> bool {
        (self.tau_step - other.tau_step).abs() <= 1e-12
            && (self.t_max - other.t_max).abs() <= 1e-12
    }
}

/// Intersection of almost-period sets on one τ grid: detected τ common
/// to all, each valued at the worst constituent. Parameter vectors are
/// concatenated.
pub fn intersect(sets: &[AlmostPeriodSet]) -> Result<AlmostPeriodSet> {
    let Some(first) = sets.first() else {
        return input_err("intersect needs at least one set");
    };
    if sets.iter().any(|s| !first.same_grid(s)) {
        return input_err("intersect needs identical tau grids and scan ranges");
    }
    let mut taus = Vec::new();
    let mut values = Vec::new();
    'taus: for (i, tau) in first.taus.iter().enumerate() {
        let mut worst = first.values[i];
        for other in &sets[1..] {
            let key = tau_key(*tau, first.tau_step);
            match other
                .taus
                .iter()
                .position(|t| tau_key(*t, first.tau_step) == key)
            {
                Some(j) => worst = worst.max(other.values[j]),
                None => continue 'taus,
            }
        }
        taus.push(*tau);
        values.push(worst);
    }
    let scan = combine_scans(sets);
    let mut skipped: Vec<f64> = sets.iter().flat_map(|s| s.skipped.iter().copied()).collect();
    skipped.sort_by(|a, b| a.partial_cmp(b).expect("finite taus"));
    skipped.dedup_by(|a, b| tau_key(*a, first.tau_step) == tau_key(*b, first.tau_step));
    Ok(AlmostPeriodSet {
        epsilon: sets.iter().flat_map(|s| s.epsilon.iter().copied()).collect(),
        kind: sets.iter().flat_map(|s| s.kind.iter().copied()).collect(),
        p: sets.iter().flat_map(|s| s.p.iter().copied()).collect(),
        l: sets.iter().flat_map(|s| s.l.iter().copied()).collect(),
        tau_step: first.tau_step,
        t_max: first.t_max,
        inclusion_length: max_gap(&taus),
        taus,
        values,
        skipped,
        scan,
    })
}

/// Pointwise-max merge of the constituents' full scans, where all are
/// available on the same τ set.
fn combine_scans(sets: &[AlmostPeriodSet]) -> Option<ScanArrays> {
    let first = sets.first()?.scan.as_ref()?;
    let step = sets[0].tau_step;
    let mut taus = Vec::new();
    let mut values = Vec::new();
    'taus: for (i, tau) in first.taus.iter().enumerate() {
        let mut worst = first.values[i];
        for other in &sets[1..] {
            let scan = other.scan.as_ref()?;
            let key = tau_key(*tau, step);
            match scan.taus.iter().position(|t| tau_key(*t, step) == key) {
                Some(j) => worst = worst.max(scan.values[j]),
                None => continue 'taus,
            }
        }
        taus.push(*tau);
        values.push(worst);
    }
    Some(ScanArrays { taus, values })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainmentReport {
    /// Whether every detected τ of `inner` is detected in `outer`.
    pub contained: bool,
    pub violating_taus: Vec<f64>,
    /// Max of outer's metric value over inner's τ: the distance of the
    /// containment from failing. Absent when outer lacks scan values at
    /// some inner τ.
    pub margin: Option<f64>,
}

/// Checks inner.taus ⊆ outer.taus on a shared τ grid.
pub fn containment_check(
    outer: &AlmostPeriodSet,
    inner: &AlmostPeriodSet,
) -> Result<ContainmentReport> {
    if !outer.same_grid(inner) {
        return input_err("containment_check needs identical tau grids");
    }
    let mut violating = Vec::new();
    let mut margin = Some(0.0f64);
    for tau in &inner.taus {
        if !outer.contains(*tau) {
            violating.push(*tau);
        }
        match (margin, outer.value_at(*tau)) {
            (Some(m), Some(v)) => margin = Some(m.max(v)),
            _ => margin = None,
        }
    }
    Ok(ContainmentReport {
        contained: violating.is_empty(),
        violating_taus: violating,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{BaseMetric, MetricValue, VectorPoint};
    use std::f64::consts::PI;

    const TRUNC: MetricKind = MetricKind { base: BaseMetric::Euclidean, truncated: true };

    fn scalar_path(t0: f64, h: f64, n: usize, f: impl Fn(f64) -> f64) -> SampledPath {
        SampledPath::new(
            t0,
            h,
            (0..n)
                .map(|i| MetricValue::Vector(VectorPoint::scalar(f(t0 + i as f64 * h))))
                .collect(),
        )
        .unwrap()
    }

    fn sine_scan(tau_step: f64, t_max: f64) -> TauScan {
        let f = scalar_path(0.0, 0.01, 6400, |t| (2.0 * PI * t).sin());
        scan_values(
            &f,
            ScanParams { kind: TRUNC, p: 1.0, l: 8.0, tau_step, t_max },
        )
        .unwrap()
    }

    #[test]
    fn sine_scan_detects_exactly_the_integers() {
        let aps = sine_scan(0.25, 16.0).threshold(0.05).unwrap();
        for tau in &aps.taus {
            assert!((tau - tau.round()).abs() <= 1e-9, "non-integer tau {tau}");
        }
        for k in -16i64..=16 {
            assert!(aps.contains(k as f64), "integer {k} missing");
        }
        assert_eq!(aps.len(), 33);
        let incl = aps.inclusion_length().unwrap();
        assert!((incl - 1.0).abs() <= 0.25, "inclusion length {incl}");
    }

    #[test]
    fn zero_always_detected_and_symmetric() {
        let scan = sine_scan(0.25, 16.0);
        let aps = scan.threshold(0.05).unwrap();
        assert!(aps.contains(0.0));
        for (t, v) in scan.taus().iter().zip(scan.values()) {
            assert_eq!(scan.value_at(-t).unwrap(), *v);
        }
    }

    #[test]
    fn epsilon_above_truncated_diameter_detects_everything() {
        let scan = sine_scan(0.25, 16.0);
        let aps = scan.threshold(1.1).unwrap();
        assert_eq!(aps.len(), scan.taus().len());
        let incl = aps.inclusion_length().unwrap();
        assert!((incl - 0.25).abs() <= 1e-9, "full grid gap {incl}");
    }

    #[test]
    fn monotone_in_epsilon() {
        let scan = sine_scan(0.25, 16.0);
        let small = scan.threshold(0.05).unwrap();
        let large = scan.threshold(0.1).unwrap();
        for tau in &small.taus {
            assert!(large.contains(*tau));
        }
    }

    #[test]
    fn scan_rejects_bad_params() {
        let f = scalar_path(0.0, 0.01, 1000, |t| t.sin());
        let base = ScanParams { kind: TRUNC, p: 1.0, l: 2.0, tau_step: 0.25, t_max: 4.0 };
        assert!(scan_values(&f, base).is_ok());
        // t_max beyond half the window
        assert!(scan_values(&f, ScanParams { t_max: 6.0, ..base }).is_err());
        // tau_step off the grid
        assert!(scan_values(&f, ScanParams { tau_step: 0.0151, ..base }).is_err());
        // l longer than the domain
        assert!(scan_values(&f, ScanParams { l: 20.0, ..base }).is_err());
    }

    #[test]
    fn short_overlap_taus_are_skipped_not_errors() {
        let f = scalar_path(0.0, 0.01, 1000, |t| (2.0 * PI * t).sin());
        // l = 8 leaves room only for |τ| ≤ 2 of the scanned |τ| ≤ 5
        let scan = scan_values(
            &f,
            ScanParams { kind: TRUNC, p: 1.0, l: 8.0, tau_step: 1.0, t_max: 5.0 },
        )
        .unwrap();
        assert_eq!(scan.skipped(), &[-5.0, -4.0, -3.0, 3.0, 4.0, 5.0]);
        assert_eq!(scan.taus().len(), 5);
    }

    #[test]
    fn intersect_identity_and_idempotence() {
        let scan = sine_scan(0.25, 16.0);
        let s = scan.threshold(0.05).unwrap();
        let full = scan.threshold(1.1).unwrap();
        let with_full = intersect(&[s.clone(), full]).unwrap();
        assert_eq!(with_full.taus, s.taus);
        let with_self = intersect(&[s.clone(), s.clone()]).unwrap();
        assert_eq!(with_self.taus, s.taus);
        assert_eq!(with_self.values, s.values);
        assert_eq!(with_self.epsilon, vec![0.05, 0.05]);
    }

    #[test]
    fn intersect_sine_with_half_frequency_gives_even_integers() {
        let f1 = scalar_path(0.0, 0.01, 6400, |t| (2.0 * PI * t).sin());
        let f2 = scalar_path(0.0, 0.01, 6400, |t| (PI * t).sin());
        let params = ScanParams { kind: TRUNC, p: 1.0, l: 8.0, tau_step: 0.5, t_max: 16.0 };
        let s1 = scan_periods(&f1, params, 0.1).unwrap();
        let s2 = scan_periods(&f2, params, 0.1).unwrap();
        let joint = intersect(&[s1, s2]).unwrap();
        for tau in &joint.taus {
            let k = tau.round() as i64;
            assert!((tau - k as f64).abs() <= 1e-9 && k % 2 == 0, "tau {tau}");
        }
        assert_eq!(joint.len(), 17);
        let incl = joint.inclusion_length().unwrap();
        assert!((incl - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn intersect_rejects_mismatched_grids() {
        let a = sine_scan(0.25, 16.0).threshold(0.05).unwrap();
        let b = sine_scan(0.5, 16.0).threshold(0.05).unwrap();
        assert!(intersect(&[a, b]).is_err());
    }

    #[test]
    fn containment_self_and_monotone() {
        let scan = sine_scan(0.25, 16.0);
        let inner = scan.threshold(0.05).unwrap();
        let outer = scan.threshold(0.1).unwrap();
        let self_report = containment_check(&inner, &inner).unwrap();
        assert!(self_report.contained);
        assert!(self_report.margin.unwrap() < 0.05);
        let report = containment_check(&outer, &inner).unwrap();
        assert!(report.contained);
        assert!(report.violating_taus.is_empty());
    }

    #[test]
    fn containment_detects_violations() {
        let scan = sine_scan(0.25, 16.0);
        let inner = scan.threshold(1.1).unwrap();
        let outer = scan.threshold(0.05).unwrap();
        let report = containment_check(&outer, &inner).unwrap();
        assert!(!report.contained);
        assert!(!report.violating_taus.is_empty());
        // margin comes from outer's full scan, available here
        assert!(report.margin.unwrap() > 0.05);
    }

    #[test]
    fn serialized_sets_drop_the_full_scan() {
        let aps = sine_scan(0.25, 16.0).threshold(0.05).unwrap();
        let json = serde_json::to_string(&aps).unwrap();
        let back: AlmostPeriodSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back.taus, aps.taus);
        assert_eq!(back.inclusion_length(), aps.inclusion_length());
        // detected τ still answer value_at; undetected no longer do
        assert!(back.value_at(1.0).is_some());
        assert!(back.value_at(0.25).is_none());
        assert!(aps.value_at(0.25).is_some());
    }
}
