//! Global Weyl-type quantities: the windowed metric D(p,l), its
//! large-l ladder limit, upper Banach density of a grid mask, the M*_p
//! mass diagnostic, and the compact-witness diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::metric::{dist, MetricKind, MetricValue, Role, VectorPoint};
use crate::path::{masked_window_mean, window_mean_p, GridMask, SampledPath, WindowStat};

/// Default geometric l-ladder {L/64, L/32, L/16, L/8, L/4}.
pub fn default_ladder(total_length: f64) -> Vec<f64> {
    [64.0, 32.0, 16.0, 8.0, 4.0]
        .iter()
        .map(|d| total_length / d)
        .collect()
}

/// Validates an ascending ladder against a grid of n cells of step h and
/// returns the window width in cells per rung. The top rung must leave
/// at least 4 independent windows.
fn ladder_cells(ladder: &[f64], h: f64, n: usize) -> Result<Vec<usize>> {
    if ladder.is_empty() {
        return input_err("ladder must be non-empty");
    }
    let mut cells = Vec::with_capacity(ladder.len());
    let mut prev = 0.0;
    for &l in ladder {
        if !(l.is_finite() && l > prev) {
            return input_err("ladder must be strictly ascending and positive");
        }
        prev = l;
        let w = (l / h).round();
        if w < 1.0 {
            return input_err("ladder rung rounds below one cell");
        }
        cells.push(w as usize);
    }
    let top = *cells.last().expect("non-empty");
    if 4 * top > n {
        return input_err(format!(
            "top ladder rung of {top} cells exceeds a quarter of the {n}-cell window"
        ));
    }
    Ok(cells)
}

/// D(p,l): the windowed p-mean distance. The public named metric;
/// delegates to the sliding-window primitive.
pub fn d_pl(
    f: &SampledPath,
    g: &SampledPath,
    kind: MetricKind,
    p: f64,
    l: f64,
) -> Result<WindowStat> {
    window_mean_p(f, g, kind, p, l)
}

/// Ladder approximation of the semimetric D(p) = lim over l of D(p,l).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DpLimit {
    /// Value at the largest rung.
    pub estimate: f64,
    /// (realized l, value) per rung.
    pub per_l: Vec<(f64, f64)>,
    /// max − min over the last three rungs.
    pub spread: f64,
    /// False when spread exceeds 10% of the estimate.
    pub converged: bool,
    /// Full stats of the top rung.
    pub top: WindowStat,
}

pub fn d_p_limit(
    f: &SampledPath,
    g: &SampledPath,
    kind: MetricKind,
    p: f64,
    ladder: &[f64],
) -> Result<DpLimit> {
    if !f.same_grid(g) {
        return input_err("d_p_limit needs identical grids");
    }
    ladder_cells(ladder, f.h(), f.len())?;
    let mut per_l = Vec::with_capacity(ladder.len());
    let mut top = None;
    for &l in ladder {
        let stat = window_mean_p(f, g, kind, p, l)?;
        per_l.push((stat.l_eff, stat.value));
        top = Some(stat);
    }
    let estimate = per_l.last().expect("non-empty ladder").1;
    let tail = &per_l[per_l.len().saturating_sub(3)..];
    let hi = tail.iter().map(|(_, v)| *v).fold(f64::MIN, f64::max);
    let lo = tail.iter().map(|(_, v)| *v).fold(f64::MAX, f64::min);
    let spread = hi - lo;
    Ok(DpLimit {
        estimate,
        per_l,
        spread,
        converged: spread <= 0.1 * estimate,
        top: top.expect("non-empty ladder"),
    })
}

/// Upper Banach density estimate of a mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaW {
    /// Value at the largest rung.
    pub value: f64,
    /// (realized l, sup window density) per rung.
    pub per_l: Vec<(f64, f64)>,
}

/// κ_W: for each ladder l, the sup over full windows of the fraction of
/// masked cells; the largest-l value is the density estimate.
pub fn kappa_w(mask: &GridMask, ladder: &[f64]) -> Result<KappaW> {
    let n = mask.len();
    let cells = ladder_cells(ladder, mask.h(), n)?;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0u64);
    let mut acc = 0u64;
    for &flag in mask.flags() {
        acc += u64::from(flag);
        prefix.push(acc);
    }
    let mut per_l = Vec::with_capacity(cells.len());
    for (&l, &w) in ladder.iter().zip(&cells) {
        let _ = l;
        let mut sup = 0u64;
        for j in 0..=(n - w) {
            sup = sup.max(prefix[j + w] - prefix[j]);
        }
        per_l.push((w as f64 * mask.h(), sup as f64 / w as f64));
    }
    Ok(KappaW {
        value: per_l.last().expect("non-empty ladder").1,
        per_l,
    })
}

/// Outcome of the adversarial M*_p mass probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MstarRecord {
    /// Masked windowed mean of ρ^p at the top rung under the worst mask.
    pub worst_value: f64,
    /// The adversarial mask (upper Banach density ≤ delta at every rung).
    pub mask: GridMask,
    pub selected_cells: usize,
    /// Largest pointwise distance ρ(f(t), x0) on the grid.
    pub rho_max: f64,
    /// Per-rung cap on masked cells per window.
    pub caps: Vec<(f64, usize)>,
    /// Stats of the final masked mean.
    pub stat: WindowStat,
}

/// Builds an adversarial mask of upper Banach density ≤ delta by greedy
/// mass selection (largest ρ^p(f(t), x0)·h first), with the per-window
/// cell cap enforced at every ladder rung, and evaluates the masked
/// windowed mean at the largest rung: an empirical lower bound for the
/// M*_p supremum at level delta.
pub fn mstar_diagnostic(
    f: &SampledPath,
    x0: &VectorPoint,
    p: f64,
    delta: f64,
    ladder: &[f64],
) -> Result<MstarRecord> {
    if f.role() != Role::Vector {
        return input_err("mstar_diagnostic needs a vector-role path");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return input_err(format!("delta must lie in (0,1), got {delta}"));
    }
    let n = f.len();
    let cells = ladder_cells(ladder, f.h(), n)?;
    let kind = MetricKind::base(crate::metric::BaseMetric::Euclidean);
    let x0v = MetricValue::Vector(x0.clone());
    let mut mass = Vec::with_capacity(n);
    let mut rho_max = 0.0f64;
    for v in f.values() {
        let d = dist(kind, v, &x0v)?;
        rho_max = rho_max.max(d);
        mass.push(if p == 1.0 { d } else { d.powf(p) });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        mass[b]
            .partial_cmp(&mass[a])
            .expect("finite masses")
            .then(a.cmp(&b))
    });
    let caps: Vec<usize> = cells
        .iter()
        .map(|&w| (delta * w as f64 + 1e-9).floor() as usize)
        .collect();
    // counts[r][j]: selected cells inside the rung-r window starting at j.
    let mut counts: Vec<Vec<u32>> = cells.iter().map(|&w| vec![0u32; n - w + 1]).collect();
    let mut flags = vec![false; n];
    let mut selected = 0usize;
    'cells: for &i in &order {
        if mass[i] == 0.0 {
            break;
        }
        for (r, &w) in cells.iter().enumerate() {
            let lo = (i + 1).saturating_sub(w);
            let hi = i.min(n - w);
            for j in lo..=hi {
                if counts[r][j] as usize >= caps[r] {
                    continue 'cells;
                }
            }
        }
        for (r, &w) in cells.iter().enumerate() {
            let lo = (i + 1).saturating_sub(w);
            let hi = i.min(n - w);
            for j in lo..=hi {
                counts[r][j] += 1;
            }
        }
        flags[i] = true;
        selected += 1;
    }
    let mask = GridMask::new(f.t0(), f.h(), flags)?;
    let stat = masked_window_mean(f, x0, &mask, p, *ladder.last().expect("non-empty"))?;
    Ok(MstarRecord {
        worst_value: stat.value,
        mask,
        selected_cells: selected,
        rho_max,
        caps: ladder.iter().copied().zip(caps).collect(),
        stat,
    })
}

/// Outcome of the compact-witness probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactnessRecord {
    /// Greedy centers achieving far-set density < delta, absent when the
    /// size cap was hit first.
    pub witness: Option<Vec<MetricValue>>,
    /// κ_W of {t : ρ(f(t), witness) ≥ epsilon} for the final center set.
    pub density_of_far_set: f64,
    pub rounds: usize,
    /// κ_W per-l trace of the final far set.
    pub per_l: Vec<(f64, f64)>,
}

pub const DEFAULT_WITNESS_CAP: usize = 64;

/// Greedy farthest-first center selection from the sampled values until
/// the far set {t : ρ(f(t), centers) ≥ epsilon} has upper Banach density
/// below delta, or the size cap is hit. Distances use the untruncated
/// base metric of the path's role.
pub fn compactness_diagnostic(
    f: &SampledPath,
    epsilon: f64,
    delta: f64,
    ladder: &[f64],
    cap: usize,
) -> Result<CompactnessRecord> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return input_err("epsilon must be positive");
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return input_err(format!("delta must lie in (0,1], got {delta}"));
    }
    if cap == 0 {
        return input_err("witness cap must be at least 1");
    }
    let kind = MetricKind::for_role(f.role());
    let n = f.len();
    let mut centers: Vec<MetricValue> = vec![f.value(0).clone()];
    let mut min_dist: Vec<f64> = f
        .values()
        .iter()
        .map(|v| dist(kind, v, f.value(0)))
        .collect::<Result<Vec<_>>>()?;
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        let flags: Vec<bool> = min_dist.iter().map(|&d| d >= epsilon).collect();
        let mask = GridMask::new(f.t0(), f.h(), flags)?;
        let kappa = kappa_w(&mask, ladder)?;
        if kappa.value < delta {
            return Ok(CompactnessRecord {
                witness: Some(centers),
                density_of_far_set: kappa.value,
                rounds,
                per_l: kappa.per_l,
            });
        }
        if centers.len() >= cap {
            return Ok(CompactnessRecord {
                witness: None,
                density_of_far_set: kappa.value,
                rounds,
                per_l: kappa.per_l,
            });
        }
        let mut far = 0usize;
        for i in 1..n {
            if min_dist[i] > min_dist[far] {
                far = i;
            }
        }
        let new_center = f.value(far).clone();
        for i in 0..n {
            let d = dist(kind, f.value(i), &new_center)?;
            if d < min_dist[i] {
                min_dist[i] = d;
            }
        }
        centers.push(new_center);
    }
}
