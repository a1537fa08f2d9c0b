//! Lapse profiles `β_t` and the integrated time `ℬ_t = ∫₀ᵗ β_τ dτ`.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawLapse")]
pub enum LapseProfile {
    Constant { value: f64 },
    /// Piecewise-linear `β` through the samples; defined only on the table.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawLapse {
    Constant { value: f64 },
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<RawLapse> for LapseProfile {
    type Error = FlowError;

    fn try_from(raw: RawLapse) -> Result<Self> {
        match raw {
            RawLapse::Constant { value } => LapseProfile::constant(value),
            RawLapse::Tabulated { times, values } => LapseProfile::tabulated(times, values),
        }
    }
}

impl Default for LapseProfile {
    fn default() -> Self {
        LapseProfile::Constant { value: 1.0 }
    }
}

impl LapseProfile {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(FlowError::InvalidLapse(format!(
                "lapse must be finite and positive, got {value}"
            )));
        }
        Ok(LapseProfile::Constant { value })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(FlowError::InvalidLapse(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(FlowError::InvalidLapse(
                "a lapse table needs at least two samples".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(FlowError::InvalidLapse("non-finite table time".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FlowError::InvalidLapse(
                "table times must be strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(FlowError::InvalidLapse(format!(
                "lapse values must be finite and positive, got {v}"
            )));
        }
        if !(times[0] <= 0.0 && 0.0 <= times[times.len() - 1]) {
            return Err(FlowError::InvalidLapse(
                "the lapse table must contain t = 0".into(),
            ));
        }
        Ok(LapseProfile::Tabulated { times, values })
    }

    /// Interval on which the profile is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            LapseProfile::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            LapseProfile::Tabulated { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    /// Table nodes, where `β` has kinks.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            LapseProfile::Constant { .. } => &[],
            LapseProfile::Tabulated { times, .. } => times,
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if t.is_nan() || t < lo || t > hi {
            return Err(FlowError::OutOfDomain { t, lo, hi });
        }
        Ok(())
    }

    /// Index `i` of the cell `[times[i], times[i+1]]` holding `t`.
    fn cell(times: &[f64], t: f64) -> usize {
        let i = times.partition_point(|x| *x <= t);
        i.saturating_sub(1).min(times.len() - 2)
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self {
            LapseProfile::Constant { value } => *value,
            LapseProfile::Tabulated { times, values } => {
                let i = Self::cell(times, t);
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        })
    }

    /// Integral from the first table time to `t`, exact for the linear interpolant.
    fn integral_from_start(times: &[f64], values: &[f64], t: f64) -> f64 {
        let i = Self::cell(times, t);
        let mut acc = 0.0;
        for k in 0..i {
            acc += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
        }
        let h = t - times[i];
        let slope = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
        acc + h * (values[i] + 0.5 * slope * h)
    }

    /// Signed `ℬ_t = ∫₀ᵗ β_τ dτ`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self {
            LapseProfile::Constant { value } => value * t,
            LapseProfile::Tabulated { times, values } => {
                Self::integral_from_start(times, values, t)
                    - Self::integral_from_start(times, values, 0.0)
            }
        })
    }

    /// Time `t` with `ℬ_t = target`, by bisection on the increasing map
    /// `t ↦ ℬ_t`. `None` if the target is not reached inside the domain.
    pub fn time_for_integral(&self, target: f64) -> Option<f64> {
        if !target.is_finite() {
            return None;
        }
        let (lo_dom, hi_dom) = self.domain();
        let b = |t: f64| self.integral(t).expect("bracket stays inside the domain");
        let (mut lo, mut hi) = if target >= 0.0 {
            (0.0, hi_dom.min(1.0))
        } else {
            (lo_dom.max(-1.0), 0.0)
        };
        // widen the bracket over unbounded domains
        while target > b(hi) {
            if hi == hi_dom {
                return None;
            }
            lo = hi;
            hi = (2.0 * hi).min(hi_dom);
        }
        while target < b(lo) {
            if lo == lo_dom {
                return None;
            }
            hi = lo;
            lo = (2.0 * lo).max(lo_dom);
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if b(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(if (b(lo) - target).abs() <= (b(hi) - target).abs() {
            lo
        } else {
            hi
        })
    }
}
