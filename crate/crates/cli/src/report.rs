//! Machine-readable run reports and threshold evaluation.

use serde::{Deserialize, Serialize};

/// One pass/fail gate evaluated against a scenario threshold.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ThresholdCheck {
    pub name: String,
    /// Measured value (for boolean gates: 1.0 = satisfied, 0.0 = violated).
    pub value: f64,
    /// Configured limit.
    pub limit: f64,
    /// `"<="`, `">="`, or `"bool"`.
    pub op: String,
    pub pass: bool,
}

impl ThresholdCheck {
    pub fn le(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            op: "<=".to_string(),
            pass: value <= limit,
        }
    }

    pub fn ge(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            op: ">=".to_string(),
            pass: value >= limit,
        }
    }

    pub fn boolean(name: &str, satisfied: bool) -> Self {
        Self {
            name: name.to_string(),
            value: if satisfied { 1.0 } else { 0.0 },
            limit: 1.0,
            op: "bool".to_string(),
            pass: satisfied,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseMetrics {
    pub period: f64,
    pub theta0: f64,
    pub d_min: f64,
    /// Lag over the window `[T, 2T]`.
    pub lag_first_window: f64,
    /// Lag over the final period window.
    pub lag_last_window: f64,
    pub lag_per_period: Vec<f64>,
    pub prop_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StaticMetrics {
    pub v0: f64,
    pub hitting_time: Option<f64>,
    pub capture_time: Option<f64>,
    pub post_hit_sup_err: Option<f64>,
    pub v_final: f64,
    pub certificate_valid: bool,
    /// Sampled disturbance bound (present also for invalid certificates).
    pub m_bound: Option<f64>,
    /// `μ_I = max(M_I + bᵢ)`; negative iff the certificate is valid.
    pub mu: Option<f64>,
    /// `−V(e(0))/μ_I` for this run's start (valid certificates only).
    pub t_hit_bound: Option<f64>,
    /// Per-component switch rate before the component's first surface
    /// contact (switches/s).
    pub pre_contact_rates: Vec<f64>,
    /// Per-component switch rate from the first contact to the end.
    pub post_contact_rates: Vec<f64>,
    pub switch_counts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DynamicMetrics {
    pub epsilon: f64,
    pub tail_error: f64,
    pub sup_tracking_error: f64,
    pub sup_reduced_mismatch: f64,
    pub sup_u_mismatch_tail: f64,
    pub u_total_variation: Vec<f64>,
    /// Post-transient chattering flips per control component (dwell-based).
    pub chatter_flips: Vec<usize>,
    /// Plain zero crossings of each control component (slow crossings of a
    /// smooth periodic control are expected and are not chattering).
    pub u_zero_crossings: Vec<usize>,
}

/// Per-run report written as `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SyncReport {
    pub kind: String,
    pub scenario: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseMetrics>,
    #[serde(rename = "static", skip_serializing_if = "Option::is_none")]
    pub static_: Option<StaticMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamic: Option<DynamicMetrics>,
    pub thresholds: Vec<ThresholdCheck>,
    pub pass: bool,
}

impl SyncReport {
    /// Flat `(name, value)` view of the scalar metrics, used by sweep rows.
    pub fn scalar_metrics(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        if let Some(p) = &self.phase {
            out.push(("period".into(), p.period));
            out.push(("theta0".into(), p.theta0));
            out.push(("d_min".into(), p.d_min));
            out.push(("lag_first_window".into(), p.lag_first_window));
            out.push(("lag_last_window".into(), p.lag_last_window));
            out.push(("prop_residual".into(), p.prop_residual));
        }
        if let Some(s) = &self.static_ {
            out.push(("v0".into(), s.v0));
            out.push(("hitting_time".into(), s.hitting_time.unwrap_or(f64::NAN)));
            out.push(("capture_time".into(), s.capture_time.unwrap_or(f64::NAN)));
            out.push((
                "post_hit_sup_err".into(),
                s.post_hit_sup_err.unwrap_or(f64::NAN),
            ));
            out.push(("v_final".into(), s.v_final));
            out.push((
                "certificate_valid".into(),
                if s.certificate_valid { 1.0 } else { 0.0 },
            ));
            out.push(("m_bound".into(), s.m_bound.unwrap_or(f64::NAN)));
            out.push(("mu".into(), s.mu.unwrap_or(f64::NAN)));
            out.push(("t_hit_bound".into(), s.t_hit_bound.unwrap_or(f64::NAN)));
        }
        if let Some(d) = &self.dynamic {
            out.push(("epsilon".into(), d.epsilon));
            out.push(("tail_error".into(), d.tail_error));
            out.push(("sup_tracking_error".into(), d.sup_tracking_error));
            out.push(("sup_reduced_mismatch".into(), d.sup_reduced_mismatch));
            out.push(("sup_u_mismatch_tail".into(), d.sup_u_mismatch_tail));
            out.push((
                "chatter_flips_max".into(),
                d.chatter_flips.iter().copied().max().unwrap_or(0) as f64,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_roundtrips_losslessly() {
        let report = SyncReport {
            kind: "dynamic".into(),
            scenario: "x".into(),
            seed: 42,
            phase: None,
            static_: None,
            dynamic: Some(DynamicMetrics {
                epsilon: 0.001,
                tail_error: 0.014285714285714285,
                sup_tracking_error: 2.0,
                sup_reduced_mismatch: 0.1 + 0.2,
                sup_u_mismatch_tail: 1.0 / 3.0,
                u_total_variation: vec![32.8, 2.5, 37.0],
                chatter_flips: vec![0, 0, 0],
                u_zero_crossings: vec![3, 3, 3],
            }),
            thresholds: vec![ThresholdCheck::le("tail_error", 0.0142, 0.05)],
            pass: true,
        };
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: SyncReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
        // Round-trip through text twice produces identical bytes.
        let json2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, json2);
    }
}
