//! Uniform-grid sampled paths, shift alignment, and the windowed p-mean
//! primitives behind every Weyl-type quantity.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::metric::{dist, euclidean, MetricKind, MetricValue, Role, VectorPoint};

/// Relative grid-alignment tolerance, in units of the step h.
pub const GRID_TOL: f64 = 1e-9;

/// A function sampled on the uniform grid t_i = t0 + i·h, i = 0..n.
/// Values are homogeneous in role and dimension; n ≥ 2. The window
/// length is L = n·h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    t0: f64,
    h: f64,
    values: Vec<MetricValue>,
}

impl SampledPath {
    pub fn new(t0: f64, h: f64, values: Vec<MetricValue>) -> Result<Self> {
        if !t0.is_finite() || !h.is_finite() || h <= 0.0 {
            return input_err("grid needs finite t0 and positive h");
        }
        if values.len() < 2 {
            return input_err("path needs at least 2 samples");
        }
        let role = values[0].role();
        let dim = values[0].dim();
        if values.iter().any(|v| v.role() != role || v.dim() != dim) {
            return input_err("path values must share one role and dimension");
        }
        Ok(SampledPath { t0, h, values })
    }

    pub fn constant(t0: f64, h: f64, n: usize, value: MetricValue) -> Result<Self> {
        SampledPath::new(t0, h, vec![value; n])
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total window length L = n·h.
    pub fn window_length(&self) -> f64 {
        self.values.len() as f64 * self.h
    }

    pub fn role(&self) -> Role {
        self.values[0].role()
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn values(&self) -> &[MetricValue] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &MetricValue {
        &self.values[i]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    /// Zero vector path on the same grid (role must be vector).
    pub fn zero_like(&self) -> Result<SampledPath> {
        if self.role() != Role::Vector {
            return input_err("zero path only defined for vector role");
        }
        let zero = MetricValue::Vector(VectorPoint::origin(self.dim()));
        SampledPath::new(self.t0, self.h, vec![zero; self.len()])
    }

    /// Sub-path of `count` samples starting at sample `start`.
    pub fn restrict(&self, start: usize, count: usize) -> Result<SampledPath> {
        if start + count > self.values.len() {
            return input_err("restriction exceeds path length");
        }
        SampledPath::new(
            self.time(start),
            self.h,
            self.values[start..start + count].to_vec(),
        )
    }

    /// Same step, same start (within [`GRID_TOL`]·h), same length.
    pub fn same_grid(&self, other: &SampledPath) -> bool {
        self.values.len() == other.values.len()
            && (self.h - other.h).abs() <= GRID_TOL * self.h
            && (self.t0 - other.t0).abs() <= GRID_TOL * self.h
    }

    /// Largest per-sample distance ratio ρ(f(t_{i+1}), f(t_i))/h, an
    /// empirical Lipschitz bound used to size discretization slack.
    pub fn per_sample_lipschitz(&self, kind: MetricKind) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in self.values.windows(2) {
            worst = worst.max(dist(kind, &w[0], &w[1])?);
        }
        Ok(worst / self.h)
    }
}

/// Boolean flag per grid cell, on its own copy of the grid parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMask {
    t0: f64,
    h: f64,
    flags: Vec<bool>,
}

impl GridMask {
    pub fn new(t0: f64, h: f64, flags: Vec<bool>) -> Result<Self> {
        if !t0.is_finite() || !h.is_finite() || h <= 0.0 {
            return input_err("mask grid needs finite t0 and positive h");
        }
        if flags.len() < 2 {
            return input_err("mask needs at least 2 cells");
        }
        Ok(GridMask { t0, h, flags })
    }

    pub fn filled(t0: f64, h: f64, n: usize, flag: bool) -> Result<Self> {
        GridMask::new(t0, h, vec![flag; n])
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn set(&mut self, i: usize, flag: bool) {
        self.flags[i] = flag;
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    pub fn matches_grid(&self, path: &SampledPath) -> bool {
        self.flags.len() == path.len()
            && (self.h - path.h()).abs() <= GRID_TOL * self.h
            && (self.t0 - path.t0()).abs() <= GRID_TOL * self.h
    }
}

/// Result of realizing f(·+τ) on the grid.
#[derive(Debug, Clone)]
pub struct ShiftOutcome {
    pub path: SampledPath,
    /// Whole cells shifted: τ rounded to k·h.
    pub cells: i64,
    /// |τ − k·h| ≤ h/2.
    pub rounding_error: f64,
}

/// Grid realization of f(·+τ): τ is rounded to the nearest k·h and the
/// overlap restriction of f advanced by k cells is returned. For k ≥ 0
/// the result keeps t0; for k < 0 it starts at t0 + |k|·h.
pub fn shift(f: &SampledPath, tau: f64) -> Result<ShiftOutcome> {
    if !tau.is_finite() {
        return input_err("shift needs finite tau");
    }
    if tau.abs() >= f.window_length() {
        return input_err(format!(
            "|tau| = {} is not below the window length {}",
            tau.abs(),
            f.window_length()
        ));
    }
    let kf = (tau / f.h).round();
    let k = kf as i64;
    let rounding_error = (tau - kf * f.h).abs();
    let n = f.len() as i64;
    let overlap = n - k.abs();
    if overlap < 2 {
        return input_err("shift overlap shorter than 2 samples");
    }
    let path = if k >= 0 {
        SampledPath::new(
            f.t0,
            f.h,
            f.values[k as usize..].to_vec(),
        )?
    } else {
        SampledPath::new(
            f.t0 + (-k) as f64 * f.h,
            f.h,
            f.values[..overlap as usize].to_vec(),
        )?
    };
    Ok(ShiftOutcome { path, cells: k, rounding_error })
}

/// Restricts two paths on compatible grids (equal step, starts offset by
/// a whole number of cells) to their common time range.
pub fn overlap_pair(f: &SampledPath, g: &SampledPath) -> Result<(SampledPath, SampledPath)> {
    let (fs, fe, gs, ge) = overlap_indices(f, g)?;
    Ok((f.restrict(fs, fe - fs)?, g.restrict(gs, ge - gs)?))
}

fn overlap_indices(f: &SampledPath, g: &SampledPath) -> Result<(usize, usize, usize, usize)> {
    if (f.h - g.h).abs() > GRID_TOL * f.h {
        return input_err("grid step mismatch");
    }
    let off = (g.t0 - f.t0) / f.h;
    let k = off.round();
    if (off - k).abs() > GRID_TOL {
        return input_err("grid starts not offset by a whole number of cells");
    }
    let k = k as i64;
    // Common range in f's indices: [max(0,k), min(n_f, k + n_g)).
    let lo = 0i64.max(k);
    let hi = (f.len() as i64).min(k + g.len() as i64);
    if hi - lo < 2 {
        return input_err("paths overlap in fewer than 2 samples");
    }
    Ok((lo as usize, hi as usize, (lo - k) as usize, (hi - k) as usize))
}

/// One windowed-supremum evaluation with its discretization terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    pub value: f64,
    /// The realized window length w·h.
    pub l_eff: f64,
    /// |l − l_eff|.
    pub rounding: f64,
    /// Number of full windows inspected.
    pub windows: usize,
    /// l_eff / L: the fraction of the domain a single window hides.
    pub edge_loss: f64,
}

fn window_cells(l: f64, h: f64, n: usize) -> Result<usize> {
    if !(l.is_finite() && l > 0.0) {
        return input_err("window length l must be positive");
    }
    let w = (l / h).round();
    if w < 1.0 {
        return input_err("window length l rounds below one cell");
    }
    let w = w as usize;
    if w > n {
        return input_err(format!(
            "window of {w} cells exceeds the {n}-sample domain"
        ));
    }
    Ok(w)
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return input_err("exponent p must be finite and >= 1");
    }
    Ok(())
}

#[inline]
fn pow_p(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

#[inline]
pub(crate) fn root_p(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v
    } else if p == 2.0 {
        v.sqrt()
    } else {
        v.powf(1.0 / p)
    }
}

/// Sup over window starts of the mean of ρ^p over w consecutive aligned
/// samples. Shared by the public windowed metrics and the τ-scans.
pub(crate) fn window_sup_pair(
    fv: &[MetricValue],
    gv: &[MetricValue],
    kind: MetricKind,
    p: f64,
    w: usize,
) -> Result<(f64, usize)> {
    debug_assert_eq!(fv.len(), gv.len());
    let n = fv.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    let mut acc = 0.0f64;
    for i in 0..n {
        acc += pow_p(dist(kind, &fv[i], &gv[i])?, p);
        prefix.push(acc);
    }
    let windows = n - w + 1;
    let mut sup = 0.0f64;
    for j in 0..windows {
        sup = sup.max(prefix[j + w] - prefix[j]);
    }
    Ok((sup / w as f64, windows))
}

/// Windowed p-mean distance between two paths on identical grids:
/// sup over full windows of ((1/l)·Σ ρ^p(f(t_i), g(t_i))·h)^(1/p),
/// rectangle rule, prefix sums.
pub fn window_mean_p(
    f: &SampledPath,
    g: &SampledPath,
    kind: MetricKind,
    p: f64,
    l: f64,
) -> Result<WindowStat> {
    if !f.same_grid(g) {
        return input_err("window_mean_p needs identical grids");
    }
    check_p(p)?;
    let w = window_cells(l, f.h, f.len())?;
    let (mean, windows) = window_sup_pair(&f.values, &g.values, kind, p, w)?;
    let l_eff = w as f64 * f.h;
    Ok(WindowStat {
        value: root_p(mean, p),
        l_eff,
        rounding: (l - l_eff).abs(),
        windows,
        edge_loss: l_eff / f.window_length(),
    })
}

/// Same sliding computation with the integrand ρ^p(f(t), x0) zeroed
/// outside the mask, and no p-th root: the windowed mean of ρ^p mass
/// over the masked set.
pub fn masked_window_mean(
    f: &SampledPath,
    x0: &VectorPoint,
    mask: &GridMask,
    p: f64,
    l: f64,
) -> Result<WindowStat> {
    if f.role() != Role::Vector {
        return input_err("masked_window_mean needs a vector-role path");
    }
    if f.dim() != x0.dim() {
        return input_err("masked_window_mean: dimension mismatch");
    }
    if !mask.matches_grid(f) {
        return input_err("mask grid does not match the path");
    }
    check_p(p)?;
    let w = window_cells(l, f.h, f.len())?;
    let n = f.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    let mut acc = 0.0f64;
    for i in 0..n {
        if mask.flags[i] {
            let MetricValue::Vector(v) = &f.values[i] else {
                unreachable!("vector role checked")
            };
            acc += pow_p(euclidean(v, x0), p);
        }
        prefix.push(acc);
    }
    let windows = n - w + 1;
    let mut sup = 0.0f64;
    for j in 0..windows {
        sup = sup.max(prefix[j + w] - prefix[j]);
    }
    let l_eff = w as f64 * f.h;
    Ok(WindowStat {
        value: sup / w as f64,
        l_eff,
        rounding: (l - l_eff).abs(),
        windows,
        edge_loss: l_eff / f.window_length(),
    })
}
