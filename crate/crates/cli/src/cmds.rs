//! Subcommand bodies: argument structs and the work behind each verb.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use weylkit::io::{read_mask_file, read_path_file, write_mask_file, write_path_file};
use weylkit::oracle::{
    adaptive_simpson, lp_exhaustive, r_delta_bisect, random_measure, random_set, random_vector,
    window_mean_naive,
};
use weylkit::{
    compactness_diagnostic, d_p_limit, d_pl, default_ladder, intersect, kappa_w, levy_prokhorov,
    measure_selection, mstar_diagnostic, nearest_point_selection, quasi_periodic_signal, r_delta,
    report_compactness, report_d_p_limit, report_d_pl, report_kappa_w, report_mstar, scan_periods,
    scan_values, verify_dense_selection, verify_set_selection, window_mean_p, BaseMetric, Error, FrequencySpec,
    GridSpec, MetricKind, MetricValue, Result, Role, SampledPath, ScanParams, SlackFunction,
    VectorPoint, VerifyParams, DEFAULT_WITNESS_CAP,
};

use crate::config::{self, input_err};
use crate::output::emit;

fn need<T>(opt: Option<T>, what: &str) -> Result<T> {
    match opt {
        Some(v) => Ok(v),
        None => input_err(format!("missing {what}")),
    }
}

fn kind_for(path: &SampledPath, truncated: bool) -> MetricKind {
    if truncated {
        MetricKind::truncated_for_role(path.role())
    } else {
        MetricKind::for_role(path.role())
    }
}

fn total_length(path: &SampledPath) -> f64 {
    path.len() as f64 * path.h()
}

pub fn gen(spec_file: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(spec_file)?;
    let spec: config::GenSpec = serde_json::from_str(&text)?;
    match config::generate(&spec)? {
        config::Generated::Path(path) => {
            write_path_file(&path, out)?;
            emit(
                json!({
                    "schema": 1,
                    "written": out.display().to_string(),
                    "format": "path",
                    "role": path.role().name(),
                    "dim": path.dim(),
                    "n": path.len(),
                    "h": path.h(),
                    "t0": path.t0(),
                }),
                None,
            )
        }
        config::Generated::Mask(mask) => {
            write_mask_file(&mask, out)?;
            emit(
                json!({
                    "schema": 1,
                    "written": out.display().to_string(),
                    "format": "mask",
                    "n": mask.len(),
                    "h": mask.h(),
                    "t0": mask.t0(),
                }),
                None,
            )
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
pub enum MetricChoice {
    #[value(name = "d_pl")]
    DPl,
    #[value(name = "d_p_limit")]
    DPLimit,
    #[value(name = "kappa_w")]
    KappaW,
    #[value(name = "mstar")]
    Mstar,
    #[value(name = "compactness")]
    Compactness,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub metric: MetricChoice,
    /// Path CSV; every metric except kappa_w reads it.
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Second path CSV, or the literal `zero` for the origin path.
    #[arg(long)]
    pub b: Option<String>,
    /// Mask CSV (kappa_w).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Window length (d_pl).
    #[arg(long)]
    pub l: Option<f64>,
    /// Ascending window ladder; defaults to total/64 .. total/4.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<f64>>,
    /// Density budget (mstar, compactness).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Ball radius (compactness).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Center coordinates (mstar); the origin when absent.
    #[arg(long, value_delimiter = ',')]
    pub x0: Option<Vec<f64>>,
    /// Truncate the base metric at 1.
    #[arg(long)]
    pub truncated: bool,
    /// Witness size cap (compactness).
    #[arg(long, default_value_t = DEFAULT_WITNESS_CAP)]
    pub cap: usize,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_a(args: &AnalyzeArgs) -> Result<SampledPath> {
    read_path_file(need(args.a.as_ref(), "--a")?)
}

fn second_path(a: &SampledPath, b: &str) -> Result<SampledPath> {
    if b == "zero" {
        if a.role() != Role::Vector {
            return input_err("--b zero pairs only with a vector-role --a");
        }
        let origin = MetricValue::Vector(VectorPoint::new(vec![0.0; a.dim()])?);
        SampledPath::constant(a.t0(), a.h(), a.len(), origin)
    } else {
        read_path_file(b)
    }
}

fn ladder_or_default(opt: &Option<Vec<f64>>, total: f64) -> Vec<f64> {
    opt.clone().unwrap_or_else(|| default_ladder(total))
}

pub fn analyze(args: AnalyzeArgs) -> Result<()> {
    let report = match args.metric {
        MetricChoice::DPl => {
            let a = load_a(&args)?;
            let b = second_path(&a, need(args.b.as_deref(), "--b")?)?;
            let l = need(args.l, "--l")?;
            let kind = kind_for(&a, args.truncated);
            let stat = d_pl(&a, &b, kind, args.p, l)?;
            report_d_pl(
                &stat,
                json!({"kind": kind.name(), "p": args.p, "l": l, "h": a.h(), "n": a.len()}),
            )
        }
        MetricChoice::DPLimit => {
            let a = load_a(&args)?;
            let b = second_path(&a, need(args.b.as_deref(), "--b")?)?;
            let ladder = ladder_or_default(&args.ladder, total_length(&a));
            let kind = kind_for(&a, args.truncated);
            let limit = d_p_limit(&a, &b, kind, args.p, &ladder)?;
            report_d_p_limit(
                &limit,
                json!({"kind": kind.name(), "p": args.p, "ladder": ladder, "h": a.h(), "n": a.len()}),
            )
        }
        MetricChoice::KappaW => {
            let mask = read_mask_file(need(args.mask.as_ref(), "--mask")?)?;
            let total = mask.len() as f64 * mask.h();
            let ladder = ladder_or_default(&args.ladder, total);
            let stat = kappa_w(&mask, &ladder)?;
            report_kappa_w(
                &stat,
                json!({"ladder": ladder, "h": mask.h(), "n": mask.len()}),
            )
        }
        MetricChoice::Mstar => {
            let a = load_a(&args)?;
            let delta = need(args.delta, "--delta")?;
            let x0 = match &args.x0 {
                Some(coords) => VectorPoint::new(coords.clone())?,
                None => VectorPoint::new(vec![0.0; a.dim()])?,
            };
            let ladder = ladder_or_default(&args.ladder, total_length(&a));
            let record = mstar_diagnostic(&a, &x0, args.p, delta, &ladder)?;
            report_mstar(
                &record,
                json!({"p": args.p, "delta": delta, "ladder": ladder, "h": a.h(), "n": a.len()}),
            )
        }
        MetricChoice::Compactness => {
            let a = load_a(&args)?;
            let epsilon = need(args.epsilon, "--epsilon")?;
            let delta = need(args.delta, "--delta")?;
            let ladder = ladder_or_default(&args.ladder, total_length(&a));
            let record = compactness_diagnostic(&a, epsilon, delta, &ladder, args.cap)?;
            report_compactness(
                &record,
                json!({
                    "epsilon": epsilon, "delta": delta, "cap": args.cap,
                    "ladder": ladder, "h": a.h(), "n": a.len(),
                }),
            )
        }
    };
    emit(serde_json::to_value(report)?, args.out.as_deref())
}

#[derive(Args)]
pub struct PeriodsArgs {
    /// Input path CSVs; two or more are also intersected.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub eps: f64,
    /// Window length for the scan metric.
    #[arg(long)]
    pub l: f64,
    #[arg(long, default_value_t = 0.25)]
    pub tau_step: f64,
    /// Scan range; defaults to a quarter of the shortest input.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long)]
    pub truncated: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn periods(args: PeriodsArgs) -> Result<()> {
    let paths = args
        .inputs
        .iter()
        .map(read_path_file)
        .collect::<Result<Vec<_>>>()?;
    let shortest = paths
        .iter()
        .map(total_length)
        .fold(f64::INFINITY, f64::min);
    let t_max = args
        .t_max
        .unwrap_or_else(|| ((shortest / 4.0) / args.tau_step).floor() * args.tau_step);
    let mut sets = Vec::new();
    let mut per_input = Vec::new();
    for (file, path) in args.inputs.iter().zip(&paths) {
        let params = ScanParams {
            kind: kind_for(path, args.truncated),
            p: args.p,
            l: args.l,
            tau_step: args.tau_step,
            t_max,
        };
        let set = scan_periods(path, params, args.eps)?;
        per_input.push(json!({
            "file": file.display().to_string(),
            "detected": set.len(),
            "inclusion_length": set.inclusion_length(),
            "taus": set.taus,
        }));
        sets.push(set);
    }
    let intersection = if sets.len() > 1 {
        let common = intersect(&sets)?;
        json!({
            "detected": common.len(),
            "inclusion_length": common.inclusion_length(),
            "taus": common.taus,
        })
    } else {
        Value::Null
    };
    emit(
        json!({
            "schema": 1,
            "eps": args.eps,
            "params": {
                "p": args.p, "l": args.l, "tau_step": args.tau_step,
                "t_max": t_max, "truncated": args.truncated,
            },
            "inputs": per_input,
            "intersection": intersection,
        }),
        args.out.as_deref(),
    )
}

#[derive(Copy, Clone, ValueEnum)]
pub enum SelectMode {
    Nearest,
    Measure,
}

#[derive(Args)]
pub struct SelectArgs {
    #[arg(long, value_enum)]
    pub mode: SelectMode,
    /// Vector-role path to track.
    #[arg(long)]
    pub g: PathBuf,
    /// Multivalued path: set role for nearest, measure role for measure.
    #[arg(long)]
    pub f: PathBuf,
    /// Slack breakpoints after the implicit 0:0, as "d:y,d:y" (nearest);
    /// identity slack when absent.
    #[arg(long)]
    pub eta: Option<String>,
    /// Quantile level in (0, 1) (measure).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output CSV for the selected path.
    #[arg(long)]
    pub out: PathBuf,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_eta(text: Option<&str>) -> Result<SlackFunction> {
    let Some(text) = text else {
        return Ok(SlackFunction::identity(1e6));
    };
    let mut points = vec![(0.0, 0.0)];
    for part in text.split(',') {
        let Some((d, y)) = part.split_once(':') else {
            return input_err(format!("eta breakpoint {part:?} is not of the form d:y"));
        };
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("bad eta number {v:?}: {e}")))
        };
        points.push((parse(d)?, parse(y)?));
    }
    SlackFunction::new(points)
}

pub fn select(args: SelectArgs) -> Result<()> {
    let g = read_path_file(&args.g)?;
    let multi = read_path_file(&args.f)?;
    let (selection, mode) = match args.mode {
        SelectMode::Nearest => {
            let eta = parse_eta(args.eta.as_deref())?;
            (nearest_point_selection(&g, &multi, &eta)?, "nearest")
        }
        SelectMode::Measure => {
            let delta = need(args.delta, "--delta")?;
            (measure_selection(&g, &multi, delta)?, "measure")
        }
    };
    write_path_file(&selection.f, &args.out)?;
    emit(
        json!({
            "schema": 1,
            "mode": mode,
            "membership_ok": selection.membership_ok,
            "bound": selection.bound,
            "fallbacks": selection.fallbacks,
            "params": selection.params,
            "selection": args.out.display().to_string(),
            "grid": {"t0": g.t0(), "h": g.h(), "n": g.len()},
        }),
        args.report.as_deref(),
    )
}

#[derive(Copy, Clone, ValueEnum)]
pub enum VerifyMode {
    Set,
    Dense,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub mode: VerifyMode,
    /// Vector-role path to track.
    #[arg(long)]
    pub g: PathBuf,
    /// Set-role path supplying the branches.
    #[arg(long)]
    pub f: PathBuf,
    /// Scalar path whose almost periods gate the common set (dense).
    #[arg(long)]
    pub h: Option<PathBuf>,
    /// Slack cap in (0, 1) (dense).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Slack breakpoints for the nearest selection (set), as in select.
    #[arg(long)]
    pub eta: Option<String>,
    /// Comma-separated epsilon ladder.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Window length for the scans.
    #[arg(long)]
    pub l: f64,
    #[arg(long, default_value_t = 0.25)]
    pub tau_step: f64,
    #[arg(long)]
    pub t_max: f64,
    /// Also scan the selection at twice the range.
    #[arg(long)]
    pub double_range: bool,
    /// Output CSV for the selected path.
    #[arg(long)]
    pub out_selection: Option<PathBuf>,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn verify(args: VerifyArgs) -> Result<bool> {
    let g = read_path_file(&args.g)?;
    let sets = read_path_file(&args.f)?;
    let params = VerifyParams {
        l: args.l,
        tau_step: args.tau_step,
        t_max: args.t_max,
        double_range: args.double_range,
    };
    let (selection, report) = match args.mode {
        VerifyMode::Set => {
            let eta = parse_eta(args.eta.as_deref())?;
            verify_set_selection(&g, &sets, &eta, &args.eps, &params)?
        }
        VerifyMode::Dense => {
            let h = read_path_file(need(args.h.as_ref(), "--h")?)?;
            let delta = need(args.delta, "--delta")?;
            verify_dense_selection(&g, &sets, &h, delta, &args.eps, &params)?
        }
    };
    if let Some(out) = &args.out_selection {
        write_path_file(&selection.f, out)?;
    }
    let passed = report.passed;
    let mut value = serde_json::to_value(&report)?;
    if let Value::Object(map) = &mut value {
        map.insert("schema".into(), 1.into());
        map.insert(
            "params".into(),
            json!({
                "l": args.l, "tau_step": args.tau_step, "t_max": args.t_max,
                "double_range": args.double_range, "eps": args.eps,
                "h": g.h(), "n": g.len(), "delta": args.delta,
            }),
        );
        map.insert("selection_params".into(), selection.params.clone());
    }
    emit(value, args.out.as_deref())?;
    Ok(passed)
}

#[derive(Copy, Clone, ValueEnum)]
pub enum OracleCheck {
    Lp,
    Quadrature,
    Window,
    Scan,
    Rdelta,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub check: OracleCheck,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Max joint support across a measure pair (lp).
    #[arg(long, default_value_t = 8)]
    pub max_support: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn oracle(args: OracleArgs) -> Result<bool> {
    let mut rng = StdRng::seed_from_u64(args.seed);
    let mut gaps = Vec::with_capacity(args.trials);
    let (name, tol) = match args.check {
        OracleCheck::Lp => {
            let each = (args.max_support / 2).max(1);
            for _ in 0..args.trials {
                let mu = random_measure(&mut rng, 2, each, 3.0);
                let nu = random_measure(&mut rng, 2, each, 3.0);
                gaps.push((levy_prokhorov(&mu, &nu)? - lp_exhaustive(&mu, &nu)?).abs());
            }
            ("lp", 1e-9)
        }
        OracleCheck::Quadrature => {
            let grid = GridSpec {
                t0: 0.0,
                h: 1e-3,
                n: 4000,
            };
            let zero = SampledPath::constant(
                grid.t0,
                grid.h,
                grid.n,
                MetricValue::Vector(VectorPoint::new(vec![0.0])?),
            )?;
            for _ in 0..args.trials {
                let amp = rng.gen_range(0.5..2.0);
                let freq = rng.gen_range(1..=3) as f64;
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let spec = FrequencySpec::scalar(&[(freq, amp, phase)], 0)?;
                let f = quasi_periodic_signal(&spec, &grid)?;
                let windowed =
                    d_pl(&f, &zero, MetricKind::base(BaseMetric::Euclidean), 1.0, 1.0)?.value;
                let integrand =
                    |t: f64| (amp * (std::f64::consts::TAU * freq * t + phase).sin()).abs();
                // Splitting at an irrational point keeps the initial Simpson
                // nodes off the integrand's symmetry lattice.
                let cut = std::f64::consts::FRAC_1_SQRT_2;
                let exact = adaptive_simpson(&integrand, 0.0, cut, 1e-11)
                    + adaptive_simpson(&integrand, cut, 1.0, 1e-11);
                gaps.push((windowed - exact).abs());
            }
            ("quadrature", 2e-3)
        }
        OracleCheck::Window => {
            for i in 0..args.trials {
                let n = rng.gen_range(32..=96);
                let h = 0.0625;
                let dim = rng.gen_range(1..=3);
                let sample = |rng: &mut StdRng| match i % 3 {
                    0 => MetricValue::Vector(random_vector(rng, dim, 2.0)),
                    1 => MetricValue::Set(random_set(rng, dim, 4, 2.0)),
                    _ => MetricValue::Measure(random_measure(rng, dim, 3, 2.0)),
                };
                let f = SampledPath::new(0.0, h, (0..n).map(|_| sample(&mut rng)).collect())?;
                let g = SampledPath::new(0.0, h, (0..n).map(|_| sample(&mut rng)).collect())?;
                let p = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
                let l = rng.gen_range(4..=n / 2) as f64 * h;
                let kind = if i % 2 == 0 {
                    kind_for(&f, false)
                } else {
                    kind_for(&f, true)
                };
                let fast = window_mean_p(&f, &g, kind, p, l)?.value;
                let slow = window_mean_naive(&f, &g, kind, p, l)?;
                gaps.push((fast - slow).abs() / fast.abs().max(1.0));
            }
            ("window", 1e-9)
        }
        OracleCheck::Scan => {
            let grid = GridSpec {
                t0: 0.0,
                h: 0.05,
                n: 160,
            };
            let params_for = |kind| ScanParams {
                kind,
                p: 1.0,
                l: 1.0,
                tau_step: 0.25,
                t_max: 2.0,
            };
            for i in 0..args.trials {
                let terms = [
                    (rng.gen_range(0.3..3.0), rng.gen_range(0.2..1.5), rng.gen_range(0.0..6.28)),
                    (rng.gen_range(0.3..3.0), rng.gen_range(0.2..1.5), rng.gen_range(0.0..6.28)),
                ];
                let f = quasi_periodic_signal(&FrequencySpec::scalar(&terms, 0)?, &grid)?;
                let kind = if i % 2 == 0 {
                    MetricKind::base(BaseMetric::Euclidean)
                } else {
                    MetricKind::truncated(BaseMetric::Euclidean)
                };
                let params = params_for(kind);
                let scan = scan_values(&f, params)?;
                for (tau, value) in scan.taus().iter().zip(scan.values()) {
                    let cells = (tau.abs() / grid.h).round() as usize;
                    let overlap = grid.n - cells;
                    let lead = SampledPath::new(0.0, grid.h, f.values()[..overlap].to_vec())?;
                    let lag = SampledPath::new(0.0, grid.h, f.values()[cells..].to_vec())?;
                    let naive = window_mean_naive(&lead, &lag, kind, params.p, params.l)?;
                    gaps.push((value - naive).abs());
                }
            }
            ("scan", 1e-9)
        }
        OracleCheck::Rdelta => {
            for _ in 0..args.trials {
                let x = random_vector(&mut rng, 2, 3.0);
                let mu = random_measure(&mut rng, 2, 6, 3.0);
                let delta = rng.gen_range(0.05..0.95);
                gaps.push((r_delta(&x, &mu, delta)? - r_delta_bisect(&x, &mu, delta)?).abs());
            }
            ("rdelta", 1e-9)
        }
    };
    let worst = gaps.iter().fold(0.0f64, |acc, g| acc.max(*g));
    let failures = gaps.iter().filter(|g| **g > tol).count();
    let passed = failures == 0;
    emit(
        json!({
            "schema": 1,
            "check": name,
            "trials": args.trials,
            "seed": args.seed,
            "tolerance": tol,
            "worst_gap": worst,
            "failures": failures,
            "passed": passed,
        }),
        args.out.as_deref(),
    )?;
    Ok(passed)
}
