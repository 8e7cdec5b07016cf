//! The six seed collision scenarios and the mutated control parameters.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, Point2};
use crate::simulator::{simulate, SimConfig};

pub const DISTANCE_MIN: f64 = 2.0;
pub const DISTANCE_MAX: f64 = 7.0;
pub const SPEED_MAX: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Follow leading bicycle.
    FLB,
    /// Follow leading vehicle.
    FLV,
    /// Lane change into a vehicle in the adjacent lane.
    LC,
    /// Broadside at an intersection.
    InC,
    /// Pedestrian standing in front.
    PSF,
    /// Pedestrian crossing in front.
    PCF,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::FLB,
        ScenarioKind::FLV,
        ScenarioKind::LC,
        ScenarioKind::InC,
        ScenarioKind::PSF,
        ScenarioKind::PCF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::FLB => "FLB",
            ScenarioKind::FLV => "FLV",
            ScenarioKind::LC => "LC",
            ScenarioKind::InC => "InC",
            ScenarioKind::PSF => "PSF",
            ScenarioKind::PCF => "PCF",
        }
    }

    pub fn index(self) -> usize {
        ScenarioKind::ALL.iter().position(|k| *k == self).unwrap()
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Ev,
    Npc,
}

/// How an actor moves when it is not being steered by the trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Behavior {
    /// Constant speed along the actor's initial heading.
    Cruise { speed: f64 },
    /// Constant speed along `direction` (radians, world frame).
    Crossing { speed: f64, direction: f64 },
    Static,
}

impl Behavior {
    pub fn velocity(&self, heading: f64) -> Point2 {
        match *self {
            Behavior::Cruise { speed } => Point2::new(heading.cos(), heading.sin()) * speed,
            Behavior::Crossing { speed, direction } => {
                Point2::new(direction.cos(), direction.sin()) * speed
            }
            Behavior::Static => Point2::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActorSpec {
    pub role: Role,
    pub half_length: f64,
    pub half_width: f64,
    pub position: Point2,
    pub yaw: f64,
    pub behavior: Behavior,
}

impl ActorSpec {
    pub fn initial_box(&self) -> OrientedBox {
        OrientedBox::new(self.position, self.half_length, self.half_width, self.yaw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub ev: ActorSpec,
    pub npc: ActorSpec,
    pub lane_width: f64,
    pub initial_gap: f64,
}

/// The mutated triple: trigger distance, post-trigger speed and heading offset.
///
/// `a` is the canonical heading offset in `[-1, 1]` (±1 = ±90°). The direction
/// pair `(theta_long, theta_lat)` is kept alongside it because the per-axis
/// search mode steps the two components separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParameters {
    pub d: f64,
    pub v_hat: f64,
    pub theta_long: f64,
    pub theta_lat: f64,
    pub a: f64,
}

impl ControlParameters {
    /// Parameters from a scalar heading offset.
    pub fn from_angle(d: f64, v_hat: f64, a: f64) -> Self {
        let phi = a * FRAC_PI_2;
        Self {
            d,
            v_hat,
            theta_long: phi.cos().max(f64::MIN_POSITIVE),
            theta_lat: phi.sin(),
            a,
        }
    }

    /// Parameters from a direction pair; `a` is derived.
    pub fn from_direction(d: f64, v_hat: f64, theta_long: f64, theta_lat: f64) -> Self {
        Self {
            d,
            v_hat,
            theta_long,
            theta_lat,
            a: theta_lat.atan2(theta_long) / FRAC_PI_2,
        }
    }

    /// Heading offset in radians applied at the trigger.
    pub fn heading_offset(&self) -> f64 {
        self.a * FRAC_PI_2
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.d, self.v_hat, self.theta_long, self.theta_lat, self.a];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Param("non-finite control parameter".into()));
        }
        if !(DISTANCE_MIN..=DISTANCE_MAX).contains(&self.d) {
            return Err(Error::Param(format!(
                "collision distance {} outside range 2..7",
                self.d
            )));
        }
        if !(self.v_hat > 0.0 && self.v_hat <= SPEED_MAX) {
            return Err(Error::Param(format!(
                "collision speed {} outside range (0, 50]",
                self.v_hat
            )));
        }
        if self.theta_long <= 0.0 {
            return Err(Error::Param(format!(
                "theta_long {} must be positive",
                self.theta_long
            )));
        }
        if self.a.abs() > 1.0 + 1e-12 {
            return Err(Error::Param(format!("angle {} outside range -1..1", self.a)));
        }
        Ok(())
    }
}

/// Footprint dimensions (full length and width, meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

/// Tunable scene layout shared by all seed constructors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneDefaults {
    pub car: Footprint,
    pub bicycle: Footprint,
    pub pedestrian: Footprint,
    pub lane_width: f64,
    pub initial_gap: f64,
    pub ev_speed: f64,
    pub lead_vehicle_speed: f64,
    pub bicycle_speed: f64,
    pub crossing_vehicle_speed: f64,
    pub pedestrian_speed: f64,
    /// Lateral offset of the standing pedestrian from the EV lane center.
    pub pedestrian_offset: f64,
}

impl Default for SceneDefaults {
    fn default() -> Self {
        Self {
            car: Footprint { length: 4.6, width: 1.9 },
            bicycle: Footprint { length: 1.8, width: 0.6 },
            pedestrian: Footprint { length: 0.5, width: 0.5 },
            lane_width: 3.5,
            initial_gap: 30.0,
            ev_speed: 20.0,
            lead_vehicle_speed: 10.0,
            bicycle_speed: 5.0,
            crossing_vehicle_speed: 10.0,
            pedestrian_speed: 1.4,
            pedestrian_offset: 0.5,
        }
    }
}

impl SceneDefaults {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("car", self.car),
            ("bicycle", self.bicycle),
            ("pedestrian", self.pedestrian),
        ] {
            if !(f.length > 0.0 && f.width > 0.0 && f.length.is_finite() && f.width.is_finite()) {
                return Err(Error::Config(format!("{name} footprint must be positive")));
            }
        }
        if self.initial_gap <= DISTANCE_MAX {
            return Err(Error::Config(format!(
                "initial_gap {} must exceed the maximum trigger distance 7",
                self.initial_gap
            )));
        }
        let speeds = [
            ("ev_speed", self.ev_speed),
            ("lead_vehicle_speed", self.lead_vehicle_speed),
            ("bicycle_speed", self.bicycle_speed),
            ("crossing_vehicle_speed", self.crossing_vehicle_speed),
            ("pedestrian_speed", self.pedestrian_speed),
        ];
        for (name, v) in speeds {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a non-negative number")));
            }
        }
        if !(self.lane_width > 0.0) || !self.pedestrian_offset.is_finite() {
            return Err(Error::Config("invalid lane layout".into()));
        }
        Ok(())
    }
}

fn actor(role: Role, fp: Footprint, position: Point2, yaw: f64, behavior: Behavior) -> ActorSpec {
    ActorSpec {
        role,
        half_length: fp.length / 2.0,
        half_width: fp.width / 2.0,
        position,
        yaw,
        behavior,
    }
}

/// Seed scenario and determined-collision parameters for `kind` with the
/// default layout.
pub fn make_seed(kind: ScenarioKind) -> (ScenarioSpec, ControlParameters) {
    make_seed_with(kind, &SceneDefaults::default())
}

pub fn make_seed_with(
    kind: ScenarioKind,
    scene: &SceneDefaults,
) -> (ScenarioSpec, ControlParameters) {
    let gap = scene.initial_gap;
    let ev = actor(
        Role::Ev,
        scene.car,
        Point2::default(),
        0.0,
        Behavior::Cruise { speed: scene.ev_speed },
    );
    // EV reaches the conflict point at x = gap after this long
    let arrival = gap / scene.ev_speed.max(f64::MIN_POSITIVE);
    let (npc, params) = match kind {
        ScenarioKind::FLV => (
            actor(
                Role::Npc,
                scene.car,
                Point2::new(gap, 0.0),
                0.0,
                Behavior::Cruise { speed: scene.lead_vehicle_speed },
            ),
            ControlParameters::from_angle(2.0, 20.0, 0.0),
        ),
        ScenarioKind::FLB => (
            actor(
                Role::Npc,
                scene.bicycle,
                Point2::new(gap, 0.0),
                0.0,
                Behavior::Cruise { speed: scene.bicycle_speed },
            ),
            ControlParameters::from_angle(2.0, 20.0, 0.0),
        ),
        ScenarioKind::LC => (
            // NPC one lane to the right; the EV must cut across to reach it
            actor(
                Role::Npc,
                scene.car,
                Point2::new(gap, -scene.lane_width),
                0.0,
                Behavior::Cruise { speed: scene.lead_vehicle_speed },
            ),
            ControlParameters::from_angle(7.0, 20.0, -0.3),
        ),
        ScenarioKind::InC => {
            // crossing car timed to reach the conflict point with the EV
            let run_in = scene.crossing_vehicle_speed * arrival;
            (
                actor(
                    Role::Npc,
                    scene.car,
                    Point2::new(gap, -run_in),
                    FRAC_PI_2,
                    Behavior::Cruise { speed: scene.crossing_vehicle_speed },
                ),
                ControlParameters::from_angle(2.0, 20.0, 0.0),
            )
        }
        ScenarioKind::PSF => (
            actor(
                Role::Npc,
                scene.pedestrian,
                Point2::new(gap, scene.pedestrian_offset),
                0.0,
                Behavior::Static,
            ),
            ControlParameters::from_angle(2.0, 20.0, 0.0),
        ),
        ScenarioKind::PCF => {
            let run_in = scene.pedestrian_speed * arrival;
            (
                actor(
                    Role::Npc,
                    scene.pedestrian,
                    Point2::new(gap, -run_in),
                    FRAC_PI_2,
                    Behavior::Crossing {
                        speed: scene.pedestrian_speed,
                        direction: FRAC_PI_2,
                    },
                ),
                ControlParameters::from_angle(2.0, 20.0, 0.0),
            )
        }
    };
    let spec = ScenarioSpec {
        kind,
        ev,
        npc,
        lane_width: scene.lane_width,
        initial_gap: gap,
    };
    (spec, params)
}

/// Whether `(spec, params)` produces ground-truth contact within the horizon.
pub fn validate_seed(spec: &ScenarioSpec, params: &ControlParameters) -> bool {
    validate_seed_with(spec, params, &SimConfig::default())
}

pub fn validate_seed_with(spec: &ScenarioSpec, params: &ControlParameters, cfg: &SimConfig) -> bool {
    if params.validate().is_err() {
        return false;
    }
    matches!(simulate(spec, params, cfg), Ok(trace) if trace.first_contact.is_some())
}
