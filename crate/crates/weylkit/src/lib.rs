//! Weyl-type metrics, almost-period scans, and almost-periodic selections
//! for sampled paths valued in Euclidean space, finite point sets, and
//! finite-support probability measures.

pub mod error;
pub mod generators;
pub mod io;
pub mod metric;
pub mod oracle;
pub mod path;
pub mod period;
pub mod report;
pub mod selection;
pub mod weyl;

pub use error::{Error, Result};
pub use generators::{
    cb_panel_check, dense_module_frequencies, dense_module_signal, measure_valued_path,
    quasi_periodic_signal, set_valued_path, stern_brocot_rationals, CbFunctionResult,
    CbPanelReport, FrequencySpec, GridSpec, Term, WEIGHT_FLOOR,
};
pub use path::{
    masked_window_mean, overlap_pair, shift, window_mean_p, GridMask, SampledPath, ShiftOutcome,
    WindowStat, GRID_TOL,
};
pub use period::{
    containment_check, intersect, scan_periods, scan_values, AlmostPeriodSet, ContainmentReport,
    ScanParams, TauScan,
};
pub use report::{
    report_compactness, report_d_p_limit, report_d_pl, report_kappa_w, report_mstar,
    AnalysisReport, REPORT_SCHEMA,
};
pub use selection::{
    calibration_ladder, measure_selection, nearest_point_selection,
    verify_dense_selection, verify_set_selection, BoundReport, ContainmentPoint,
    InclusionRecord, SelectionResult, SlackFunction, VerifyParams, VerifyReport, WpEvidence,
};
pub use weyl::{
    compactness_diagnostic, d_p_limit, d_pl, default_ladder, kappa_w, mstar_diagnostic,
    CompactnessRecord, DpLimit, KappaW, MstarRecord, DEFAULT_WITNESS_CAP,
};
pub use metric::{
    dist, euclidean, hausdorff, in_open_ball, levy_prokhorov, levy_prokhorov_with_cap, r_delta,
    BaseMetric, FiniteMeasure, FiniteSet, MetricKind, MetricValue, Role, VectorPoint,
    DEDUP_TOL, DEFAULT_LP_SUPPORT_CAP, STRICT_TOL,
};
