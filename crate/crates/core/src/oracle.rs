//! Ignored-collision checker: combines the bounding-box ground truth with the
//! built-in detector's verdict into one of four scenario types.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detector::{builtin_cd, ground_truth, DefectModel};
use crate::error::{Error, Result};
use crate::geometry::iou;
use crate::simulator::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioType {
    /// Ignored collision: contact happened, the detector stayed silent.
    IC,
    /// Detected collision.
    DC,
    /// No contact, no report.
    NC,
    /// Report without contact.
    FP,
}

impl ScenarioType {
    pub const ALL: [ScenarioType; 4] = [
        ScenarioType::IC,
        ScenarioType::DC,
        ScenarioType::NC,
        ScenarioType::FP,
    ];

    pub fn from_conditions(overlap: bool, detected: bool) -> Self {
        match (overlap, detected) {
            (true, false) => ScenarioType::IC,
            (false, false) => ScenarioType::NC,
            (true, true) => ScenarioType::DC,
            (false, true) => ScenarioType::FP,
        }
    }

    pub fn is_collision(self) -> bool {
        matches!(self, ScenarioType::IC | ScenarioType::DC)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioType::IC => "IC",
            ScenarioType::DC => "DC",
            ScenarioType::NC => "NC",
            ScenarioType::FP => "FP",
        }
    }
}

impl fmt::Display for ScenarioType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// IoU threshold. Zero means "any positive overlap".
    pub t_bbox: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { t_bbox: 0.0 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.t_bbox) {
            return Err(Error::Config(format!(
                "oracle.t_bbox {} outside range [0, 1)",
                self.t_bbox
            )));
        }
        Ok(())
    }
}

/// Largest per-frame IoU in the trace.
pub fn max_iou(trace: &Trace) -> f64 {
    trace
        .frames
        .iter()
        .filter(|f| f.gt_overlap)
        .map(|f| iou(&f.ev_box, &f.npc_box))
        .fold(0.0, f64::max)
}

fn overlap_condition(trace: &Trace, t_bbox: f64) -> bool {
    if t_bbox <= 0.0 {
        ground_truth(trace).is_some()
    } else {
        max_iou(trace) >= t_bbox
    }
}

pub fn check_ic(trace: &Trace, defect: &DefectModel, cfg: &OracleConfig) -> ScenarioType {
    let cond1 = overlap_condition(trace, cfg.t_bbox);
    let cond2 = builtin_cd(trace, defect);
    ScenarioType::from_conditions(cond1, cond2)
}

/// Precision and recall of the IC verdict at one threshold. Either is absent
/// when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub threshold: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// Scores `check_ic` against ICS labels at each IoU threshold.
pub fn recall_sweep(
    labeled: &[(Trace, bool)],
    thresholds: &[f64],
    defect: &DefectModel,
) -> Result<Vec<ThresholdPoint>> {
    if labeled.is_empty() {
        return Err(Error::EmptyInput("labeled traces"));
    }
    if thresholds.is_empty() {
        return Err(Error::EmptyInput("thresholds"));
    }
    for &t in thresholds {
        OracleConfig { t_bbox: t }.validate()?;
    }
    // the per-trace quantities do not depend on the threshold
    let scored: Vec<(bool, bool, f64, bool)> = labeled
        .iter()
        .map(|(trace, label)| {
            (
                ground_truth(trace).is_some(),
                builtin_cd(trace, defect),
                max_iou(trace),
                *label,
            )
        })
        .collect();
    let points = thresholds
        .iter()
        .map(|&threshold| {
            let (mut tp, mut fp, mut fneg) = (0, 0, 0);
            for &(contact, detected, best_iou, label) in &scored {
                let cond1 = if threshold <= 0.0 { contact } else { best_iou >= threshold };
                let predicted = ScenarioType::from_conditions(cond1, detected) == ScenarioType::IC;
                match (predicted, label) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fneg += 1,
                    (false, false) => {}
                }
            }
            let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
            ThresholdPoint {
                threshold,
                true_positives: tp,
                false_positives: fp,
                false_negatives: fneg,
                precision: ratio(tp, tp + fp),
                recall: ratio(tp, tp + fneg),
            }
        })
        .collect();
    Ok(points)
}

/// ICS label for a trace: real contact that `defect` fails to report.
pub fn ics_label(trace: &Trace, defect: &DefectModel) -> bool {
    ground_truth(trace).is_some() && !builtin_cd(trace, defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{make_seed, ControlParameters, ScenarioKind};
    use crate::simulator::{simulate, SimConfig};

    #[test]
    fn truth_table() {
        assert_eq!(ScenarioType::from_conditions(true, false), ScenarioType::IC);
        assert_eq!(ScenarioType::from_conditions(false, false), ScenarioType::NC);
        assert_eq!(ScenarioType::from_conditions(true, true), ScenarioType::DC);
        assert_eq!(ScenarioType::from_conditions(false, true), ScenarioType::FP);
    }

    #[test]
    fn seed_traces_classify() {
        let cfg = SimConfig::default();
        let (spec, params) = make_seed(ScenarioKind::FLV);
        let trace = simulate(&spec, &params, &cfg).unwrap();
        let oc = OracleConfig::default();
        assert_eq!(check_ic(&trace, &DefectModel::perfect(), &oc), ScenarioType::DC);
        let miss = ControlParameters::from_angle(7.0, 20.0, 1.0);
        let trace = simulate(&spec, &miss, &cfg).unwrap();
        assert_eq!(check_ic(&trace, &DefectModel::default(), &oc), ScenarioType::NC);
    }

    #[test]
    fn sweep_rejects_empty_input() {
        assert!(recall_sweep(&[], &[0.0], &DefectModel::default()).is_err());
        let (spec, params) = make_seed(ScenarioKind::PSF);
        let trace = simulate(&spec, &params, &SimConfig::default()).unwrap();
        assert!(recall_sweep(&[(trace.clone(), false)], &[], &DefectModel::default()).is_err());
        assert!(recall_sweep(&[(trace, false)], &[1.5], &DefectModel::default()).is_err());
    }

    #[test]
    fn all_nc_input_has_no_recall() {
        let (spec, _) = make_seed(ScenarioKind::FLV);
        let miss = ControlParameters::from_angle(7.0, 20.0, 1.0);
        let trace = simulate(&spec, &miss, &SimConfig::default()).unwrap();
        let points = recall_sweep(&[(trace, false)], &[0.0, 0.1], &DefectModel::default()).unwrap();
        assert!(points.iter().all(|p| p.recall.is_none() && p.precision.is_none()));
    }

    #[test]
    fn threshold_validation() {
        assert!(OracleConfig { t_bbox: 0.0 }.validate().is_ok());
        assert!(OracleConfig { t_bbox: 1.0 }.validate().is_err());
        assert!(OracleConfig { t_bbox: -0.1 }.validate().is_err());
    }
}
