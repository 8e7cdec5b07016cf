//! Ground truth versus an intentionally imperfect built-in detector.
//!
//! The built-in detector stands in for a simulator's own collision callback.
//! It only looks at every `sample_period`-th frame and ignores contacts that
//! are too shallow or too slow, which gives three knobs for injecting false
//! negatives: coarse sampling makes fast contacts tunnel through, while the
//! depth and speed floors swallow grazes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectModel {
    /// Inspect only frames whose index is a multiple of this.
    pub sample_period: usize,
    /// Minimum penetration depth (m) for a sampled contact to register.
    pub min_penetration: f64,
    /// Minimum closing speed (m/s) for a sampled contact to register.
    pub min_impact_speed: f64,
}

impl Default for DefectModel {
    fn default() -> Self {
        Self {
            sample_period: 5,
            min_penetration: 0.05,
            min_impact_speed: 0.5,
        }
    }
}

impl DefectModel {
    /// Sees every overlapping frame.
    pub const fn perfect() -> Self {
        Self {
            sample_period: 1,
            min_penetration: 0.0,
            min_impact_speed: 0.0,
        }
    }

    /// Coarse sampling only: misses grow with contact speed.
    pub const fn tunneling() -> Self {
        Self {
            sample_period: 10,
            min_penetration: 0.0,
            min_impact_speed: 0.0,
        }
    }

    /// Depth and speed floors only: misses concentrate on shallow, glancing contacts.
    pub const fn graze() -> Self {
        Self {
            sample_period: 1,
            min_penetration: 0.1,
            min_impact_speed: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_period < 1 {
            return Err(Error::Config("defect.sample_period must be >= 1".into()));
        }
        if !(self.min_penetration >= 0.0 && self.min_penetration.is_finite()) {
            return Err(Error::Config("defect.min_penetration must be >= 0".into()));
        }
        if !(self.min_impact_speed >= 0.0 && self.min_impact_speed.is_finite()) {
            return Err(Error::Config("defect.min_impact_speed must be >= 0".into()));
        }
        Ok(())
    }
}

/// First frame with geometric contact.
pub fn ground_truth(trace: &Trace) -> Option<usize> {
    trace.frames.iter().position(|f| f.gt_overlap)
}

/// The built-in detector's verdict. Only frames with actual contact are
/// candidates, so it can under-report but never invent a collision.
pub fn builtin_cd(trace: &Trace, defect: &DefectModel) -> bool {
    let k = defect.sample_period.max(1);
    trace.frames.iter().enumerate().any(|(i, f)| {
        i % k == 0
            && f.gt_overlap
            && f.penetration >= defect.min_penetration
            && f.closing_speed >= defect.min_impact_speed
    })
}
