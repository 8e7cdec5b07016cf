//! Step-size sweeps and the labeled trace set for the IoU-threshold ablation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kind_seed, CampaignConfig, Evaluator};
use crate::detector::DefectModel;
use crate::error::{Error, Result};
use crate::oracle::{ics_label, ScenarioType};
use crate::scenario::{
    make_seed_with, ControlParameters, ScenarioKind, SceneDefaults, DISTANCE_MAX, DISTANCE_MIN,
    SPEED_MAX,
};
use crate::simulator::{simulate, SimConfig, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Distance,
    Speed,
    /// Scalar angle `a`, outward from 0 in both directions.
    Angle,
    /// `theta_long` from 1 down toward 0 with `theta_lat` held.
    AngleLong,
    /// `theta_lat` outward from 0 with `theta_long` held.
    AngleLat,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(SweepAxis::Distance),
            "speed" => Ok(SweepAxis::Speed),
            "angle" => Ok(SweepAxis::Angle),
            "angle_long" | "angle-long" => Ok(SweepAxis::AngleLong),
            "angle_lat" | "angle-lat" => Ok(SweepAxis::AngleLat),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSweepPoint {
    pub step: f64,
    pub mean_ics: f64,
    /// ICS count of each trial.
    pub counts: Vec<usize>,
}

/// Values visited by one single-axis sweep: `start + n·step` inside
/// `[lo, hi]`, for `n = 0, 1, 2, ...` and, if `both_ways`, also negative `n`.
fn lattice(start: f64, step: f64, lo: f64, hi: f64, both_ways: bool) -> Vec<f64> {
    let mut out = Vec::new();
    let mut n = 0i64;
    loop {
        let v = start + n as f64 * step;
        if v > hi + 1e-9 {
            break;
        }
        out.push(v.min(hi));
        n += 1;
    }
    if both_ways {
        let mut n = 1i64;
        loop {
            let v = start - n as f64 * step;
            if v < lo - 1e-9 {
                break;
            }
            out.push(v.max(lo));
            n += 1;
        }
    }
    out
}

fn sweep_points(axis: SweepAxis, step: f64, base: &ControlParameters, speed_start: f64) -> Vec<ControlParameters> {
    let (d, v) = (base.d, base.v_hat);
    match axis {
        SweepAxis::Distance => lattice(DISTANCE_MIN, step, DISTANCE_MIN, DISTANCE_MAX, false)
            .into_iter()
            .map(|x| ControlParameters { d: x, ..*base })
            .collect(),
        SweepAxis::Speed => lattice(speed_start, step, speed_start, SPEED_MAX, false)
            .into_iter()
            .map(|x| ControlParameters { v_hat: x, ..*base })
            .collect(),
        SweepAxis::Angle => lattice(0.0, step, -1.0, 1.0, true)
            .into_iter()
            .map(|a| ControlParameters::from_angle(d, v, a))
            .collect(),
        SweepAxis::AngleLat => lattice(0.0, step, -1.0, 1.0, true)
            .into_iter()
            .map(|lat| ControlParameters::from_direction(d, v, base.theta_long, lat))
            .collect(),
        SweepAxis::AngleLong => lattice(0.0, step, 0.0, 1.0, false)
            .into_iter()
            .map(|n| 1.0 - n)
            .filter(|long| *long > 1e-9)
            .map(|long| ControlParameters::from_direction(d, v, long, base.theta_lat))
            .collect(),
    }
}

/// For each step value, sweeps `axis` across its range with the other
/// parameters drawn at random per trial and counts the ICSs, averaged over
/// trials. Trial `t` draws the same parameters for every step value and for
/// any trial count.
pub fn step_size_sweep(
    kind: ScenarioKind,
    axis: SweepAxis,
    steps: &[f64],
    trials: usize,
    config: &CampaignConfig,
) -> Result<Vec<StepSweepPoint>> {
    if steps.is_empty() {
        return Err(Error::EmptyInput("step values"));
    }
    if let Some(bad) = steps.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::Config(format!("step value {bad} must be positive")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let (spec, _) = config.seed_for(kind);
    let plan = config.plan_for(kind);
    let eval = Evaluator {
        spec: &spec,
        defect: &config.defect,
        oracle: &config.oracle,
        sim: &config.sim,
    };
    let per_trial: Vec<Vec<usize>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(kind_seed(kind, config.rng_seed) ^ (t as u64).wrapping_mul(0xA24B_AED4_963E_E407));
            let d = rng.random_range(DISTANCE_MIN..=DISTANCE_MAX);
            let v = rng.random_range(plan.speed_start..=SPEED_MAX);
            let a = rng.random_range(-1.0..=1.0);
            let long = rng.random_range(0.05..=1.0);
            let lat = rng.random_range(-1.0..=1.0);
            let base = match axis {
                SweepAxis::AngleLat | SweepAxis::AngleLong => {
                    ControlParameters::from_direction(d, v, long, lat)
                }
                _ => ControlParameters::from_angle(d, v, a),
            };
            steps
                .iter()
                .map(|&s| {
                    let mut ics = 0;
                    for p in sweep_points(axis, s, &base, plan.speed_start) {
                        if eval.run(&p)?.verdict == ScenarioType::IC {
                            ics += 1;
                        }
                    }
                    Ok(ics)
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<_>>()?;
    Ok(steps
        .iter()
        .enumerate()
        .map(|(i, &step)| {
            let counts: Vec<usize> = per_trial.iter().map(|c| c[i]).collect();
            StepSweepPoint {
                step,
                mean_ics: counts.iter().sum::<usize>() as f64 / trials as f64,
                counts,
            }
        })
        .collect())
}

/// Labeled traces for the threshold ablation: for FLB (d = 3, v̂ = 2),
/// LC (d = 5, v̂ = 30) and PSF (d = 2, v̂ = 4), `theta_long` is held at 0.02
/// while `theta_lat` runs from 0 to 1 toward the struck object in steps of
/// 0.02. Labels are ICS under `defect`.
pub fn ablation_set(
    defect: &DefectModel,
    sim: &SimConfig,
    scene: &SceneDefaults,
) -> Result<Vec<(Trace, bool)>> {
    // LC's NPC is on the right, so its sweep turns the other way
    let setups = [
        (ScenarioKind::FLB, 3.0, 2.0, 1.0),
        (ScenarioKind::LC, 5.0, 30.0, -1.0),
        (ScenarioKind::PSF, 2.0, 4.0, 1.0),
    ];
    let mut out = Vec::new();
    for (kind, d, v, side) in setups {
        let (spec, _) = make_seed_with(kind, scene);
        for i in 0..=50 {
            let lat = side * i as f64 * 0.02;
            let p = ControlParameters::from_direction(d, v, 0.02, lat);
            let trace = simulate(&spec, &p, sim)?;
            let label = ics_label(&trace, defect);
            out.push((trace, label));
        }
    }
    Ok(out)
}
