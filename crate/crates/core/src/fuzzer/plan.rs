//! Search plans and single-step parameter mutation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ControlParameters, ScenarioKind, DISTANCE_MAX, DISTANCE_MIN, SPEED_MAX};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Step the scalar offset `a` by `angle_step_lat`.
    Scalar,
    /// Step `theta_lat` until it saturates, then shrink `theta_long`.
    PerAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepAxis {
    Distance,
    Speed,
    AnglePlus,
    AngleMinus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchPlan {
    pub distance_start: f64,
    pub distance_step: f64,
    pub speed_start: f64,
    pub speed_step: f64,
    pub angle_step_long: f64,
    pub angle_step_lat: f64,
    pub angle_mode: AngleMode,
    /// Consecutive NC verdicts that end an angle branch.
    pub k_nc: usize,
    /// Skip the rest of a distance row once its first execution shows the
    /// behavior switch did not precede contact (speed and angle cannot matter).
    pub skip_insensitive: bool,
}

impl SearchPlan {
    /// Default plan for a scenario kind. FLV borrows the LC steps and PCF the
    /// PSF steps, matching the struck-object type.
    pub fn for_kind(kind: ScenarioKind) -> Self {
        let (long, lat, dist, speed) = match kind {
            ScenarioKind::FLB => (0.04, 0.03, 1.0, 1.0),
            ScenarioKind::LC | ScenarioKind::FLV => (0.05, 0.04, 1.0, 1.0),
            ScenarioKind::PSF | ScenarioKind::PCF => (0.03, 0.03, 1.0, 1.0),
            ScenarioKind::InC => (0.05, 0.02, 4.0, 1.0),
        };
        Self {
            distance_start: DISTANCE_MIN,
            distance_step: dist,
            speed_start: 2.0,
            speed_step: speed,
            angle_step_long: long,
            angle_step_lat: lat,
            angle_mode: AngleMode::Scalar,
            k_nc: 3,
            skip_insensitive: true,
        }
    }

    pub fn distance_schedule(&self) -> Vec<f64> {
        ladder(self.distance_start, self.distance_step, DISTANCE_MAX)
    }

    pub fn speed_schedule(&self) -> Vec<f64> {
        ladder(self.speed_start, self.speed_step, SPEED_MAX)
    }

    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, v: f64, lo: f64, hi: f64, text: &str| {
            if v.is_finite() && v >= lo - EPS && v <= hi + EPS {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} {v} outside range {text}")))
            }
        };
        range("distance_start", self.distance_start, DISTANCE_MIN, DISTANCE_MAX, "2..7")?;
        range("speed_start", self.speed_start, f64::MIN_POSITIVE, SPEED_MAX, "(0, 50]")?;
        let steps = [
            ("distance_step", self.distance_step),
            ("speed_step", self.speed_step),
            ("angle_step_long", self.angle_step_long),
            ("angle_step_lat", self.angle_step_lat),
        ];
        for (name, s) in steps {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {s}")));
            }
        }
        if self.k_nc < 1 {
            return Err(Error::Config("k_nc must be >= 1".into()));
        }
        Ok(())
    }
}

fn ladder(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let v = tidy(start + i as f64 * step);
        if v > stop + EPS {
            break;
        }
        out.push(v.min(stop));
        i += 1;
    }
    out
}

/// Rounds away accumulated binary noise so logged values stay readable.
fn tidy(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn exhausted(what: &str, v: f64, range: &str) -> Error {
    Error::SweepExhausted(format!("{what} {v} past range {range}"))
}

/// Moves one parameter by one plan step.
pub fn mutate_step(
    params: &ControlParameters,
    axis: StepAxis,
    plan: &SearchPlan,
) -> Result<ControlParameters> {
    let p = *params;
    match axis {
        StepAxis::Distance => {
            let d = tidy(p.d + plan.distance_step);
            if d > DISTANCE_MAX + EPS {
                return Err(exhausted("distance", d, "2..7"));
            }
            Ok(ControlParameters { d: d.min(DISTANCE_MAX), ..p })
        }
        StepAxis::Speed => {
            let v = tidy(p.v_hat + plan.speed_step);
            if v > SPEED_MAX + EPS {
                return Err(exhausted("speed", v, "(0, 50]"));
            }
            Ok(ControlParameters { v_hat: v.min(SPEED_MAX), ..p })
        }
        StepAxis::AnglePlus | StepAxis::AngleMinus => {
            let sign = if axis == StepAxis::AnglePlus { 1.0 } else { -1.0 };
            match plan.angle_mode {
                AngleMode::Scalar => {
                    let a = tidy(p.a + sign * plan.angle_step_lat);
                    if a.abs() > 1.0 + EPS {
                        return Err(exhausted("angle", a, "-1..1"));
                    }
                    Ok(ControlParameters::from_angle(p.d, p.v_hat, a.clamp(-1.0, 1.0)))
                }
                AngleMode::PerAxis => {
                    let lat = tidy(p.theta_lat + sign * plan.angle_step_lat);
                    if lat.abs() <= 1.0 + EPS {
                        return Ok(ControlParameters::from_direction(
                            p.d,
                            p.v_hat,
                            p.theta_long,
                            lat.clamp(-1.0, 1.0),
                        ));
                    }
                    let long = tidy(p.theta_long - plan.angle_step_long);
                    if long <= EPS {
                        return Err(exhausted("theta_long", long, "(0, 1]"));
                    }
                    Ok(ControlParameters::from_direction(p.d, p.v_hat, long, p.theta_lat))
                }
            }
        }
    }
}

/// Every point reachable from `start` by repeated steps along `axis`,
/// including `start` itself.
pub fn branch_points(
    start: &ControlParameters,
    axis: StepAxis,
    plan: &SearchPlan,
) -> Vec<ControlParameters> {
    let mut out = vec![*start];
    let mut cur = *start;
    while let Ok(next) = mutate_step(&cur, axis, plan) {
        out.push(next);
        cur = next;
    }
    out
}
