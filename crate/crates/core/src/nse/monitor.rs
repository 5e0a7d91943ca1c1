//! Threshold monitor on the trace-norm proxy.
//!
//! A discrete run cannot observe a maximal existence time; it can only report
//! that the proxy crossed a configured level. Verdicts say exactly that.

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::dyadic::DyadicFamily;
use crate::error::{Result, TllError};
use crate::tll::{trace_norm, TraceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Completed,
    ThresholdExceeded,
    StepRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxySample {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub halted: bool,
    pub t_halt: Option<f64>,
    pub threshold: f64,
    pub trace_norm_history: Vec<ProxySample>,
    pub verdict: Verdict,
}

impl BlowupReport {
    pub fn new(threshold: f64) -> Self {
        BlowupReport {
            halted: false,
            t_halt: None,
            threshold,
            trace_norm_history: Vec::new(),
            verdict: Verdict::Completed,
        }
    }

    /// Appends a sample; returns true when it crosses the threshold, in which
    /// case the report is marked halted at `t`.
    pub fn record(&mut self, t: f64, value: f64) -> bool {
        if let Some(last) = self.trace_norm_history.last() {
            debug_assert!(t > last.t, "history times must increase");
        }
        self.trace_norm_history.push(ProxySample { t, value });
        if value > self.threshold {
            self.halted = true;
            self.t_halt = Some(t);
            self.verdict = Verdict::ThresholdExceeded;
            true
        } else {
            false
        }
    }

    pub fn reject_step(&mut self, t: f64) {
        self.halted = true;
        self.t_halt = Some(t);
        self.verdict = Verdict::StepRejected;
    }

    /// True when the recorded proxy values strictly decrease.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.trace_norm_history.windows(2).all(|w| w[1].value < w[0].value)
    }
}

/// Re-evaluates the trace proxy at every stored sample and halts at the first
/// one above `threshold`.
pub fn blowup_monitor(
    trajectory: &Trajectory,
    trace: &TraceParams,
    threshold: f64,
    family: &DyadicFamily,
) -> Result<BlowupReport> {
    if trajectory.samples.is_empty() {
        return Err(TllError::param("blow-up monitor needs a nonempty trajectory"));
    }
    let mut report = BlowupReport::new(threshold);
    for sample in &trajectory.samples {
        let value = trace_norm(&sample.state, trace, family)?;
        if report.record(sample.t, value) {
            break;
        }
    }
    Ok(report)
}
