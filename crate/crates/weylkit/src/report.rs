//! Versioned JSON report envelope shared by every analysis front end.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::path::WindowStat;
use crate::weyl::{CompactnessRecord, DpLimit, KappaW, MstarRecord};

pub const REPORT_SCHEMA: u32 = 1;

/// One analysis outcome: the headline value, the l-ladder trace behind
/// it, and the discretization honesty terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub metric: String,
    /// Inputs as given by the caller.
    pub params: Value,
    pub value: f64,
    /// (realized l, value) per ladder rung; single entry for fixed-l
    /// metrics.
    pub per_l: Vec<(f64, f64)>,
    /// |l − realized l| at the reported rung.
    pub rounding: f64,
    /// Fraction of the domain one window hides.
    pub edge_loss: f64,
    /// Metric-specific extras.
    pub details: Value,
}

impl AnalysisReport {
    fn new(metric: &str, params: Value, value: f64) -> Self {
        AnalysisReport {
            schema: REPORT_SCHEMA,
            metric: metric.to_string(),
            params,
            value,
            per_l: Vec::new(),
            rounding: 0.0,
            edge_loss: 0.0,
            details: json!({}),
        }
    }
}

pub fn report_d_pl(stat: &WindowStat, params: Value) -> AnalysisReport {
    AnalysisReport {
        per_l: vec![(stat.l_eff, stat.value)],
        rounding: stat.rounding,
        edge_loss: stat.edge_loss,
        details: json!({ "windows": stat.windows }),
        ..AnalysisReport::new("d_pl", params, stat.value)
    }
}

pub fn report_d_p_limit(limit: &DpLimit, params: Value) -> AnalysisReport {
    AnalysisReport {
        per_l: limit.per_l.clone(),
        rounding: limit.top.rounding,
        edge_loss: limit.top.edge_loss,
        details: json!({ "spread": limit.spread, "converged": limit.converged }),
        ..AnalysisReport::new("d_p", params, limit.estimate)
    }
}

pub fn report_kappa_w(kappa: &KappaW, params: Value) -> AnalysisReport {
    AnalysisReport {
        per_l: kappa.per_l.clone(),
        ..AnalysisReport::new("kappa_w", params, kappa.value)
    }
}

pub fn report_mstar(record: &MstarRecord, params: Value) -> AnalysisReport {
    AnalysisReport {
        per_l: record.caps.iter().map(|(l, c)| (*l, *c as f64)).collect(),
        rounding: record.stat.rounding,
        edge_loss: record.stat.edge_loss,
        details: json!({
            "selected_cells": record.selected_cells,
            "rho_max": record.rho_max,
        }),
        ..AnalysisReport::new("mstar", params, record.worst_value)
    }
}

pub fn report_compactness(record: &CompactnessRecord, params: Value) -> AnalysisReport {
    AnalysisReport {
        per_l: record.per_l.clone(),
        details: json!({
            "witness_size": record.witness.as_ref().map(|w| w.len()),
            "rounds": record.rounds,
        }),
        ..AnalysisReport::new("compactness", params, record.density_of_far_set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_pl_report_carries_window_stats() {
        let stat = WindowStat {
            value: 0.5,
            l_eff: 2.5,
            rounding: 0.003,
            windows: 10,
            edge_loss: 0.25,
        };
        let report = report_d_pl(&stat, json!({ "p": 1.0, "l": 2.503 }));
        assert_eq!(report.schema, REPORT_SCHEMA);
        assert_eq!(report.metric, "d_pl");
        assert_eq!(report.value, 0.5);
        assert_eq!(report.per_l, vec![(2.5, 0.5)]);
        assert_eq!(report.rounding, 0.003);
        assert_eq!(report.edge_loss, 0.25);
        assert_eq!(report.details["windows"], 10);
    }

    #[test]
    fn reports_round_trip_as_json() {
        let kappa = KappaW { value: 0.25, per_l: vec![(4.0, 0.3), (16.0, 0.25)] };
        let report = report_kappa_w(&kappa, json!({ "ladder": [4.0, 16.0] }));
        let text = serde_json::to_string(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.metric, "kappa_w");
        assert_eq!(back.value, 0.25);
        assert_eq!(back.per_l, kappa.per_l);
        assert_eq!(back.params["ladder"][1], 16.0);
    }
}
