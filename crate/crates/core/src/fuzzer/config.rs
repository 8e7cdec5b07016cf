//! Campaign configuration: the JSON document consumed by the runner.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detector::DefectModel;
use crate::error::{Error, Result};
use crate::fuzzer::plan::{AngleMode, SearchPlan};
use crate::oracle::OracleConfig;
use crate::scenario::{make_seed_with, ControlParameters, ScenarioKind, ScenarioSpec, SceneDefaults};
use crate::simulator::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutatorKind {
    /// Step-wise search outward from a determined collision.
    Guided,
    /// Uniform sampling of the parameter box.
    Random,
    /// Guided stepping started from a non-collision point at the angle bound.
    NcStart,
}

/// Partial plan; unset fields keep the kind's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanOverride {
    pub distance_start: Option<f64>,
    pub distance_step: Option<f64>,
    pub speed_start: Option<f64>,
    pub speed_step: Option<f64>,
    pub angle_step_long: Option<f64>,
    pub angle_step_lat: Option<f64>,
    pub angle_mode: Option<AngleMode>,
    pub k_nc: Option<usize>,
    pub skip_insensitive: Option<bool>,
}

impl PlanOverride {
    fn apply(&self, mut plan: SearchPlan) -> SearchPlan {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { plan.$f = v; } )* };
        }
        set!(
            distance_start,
            distance_step,
            speed_start,
            speed_step,
            angle_step_long,
            angle_step_lat,
            angle_mode,
            k_nc,
            skip_insensitive
        );
        plan
    }
}

/// Seed control parameters for one kind. Give either `a` or the
/// `theta_long`/`theta_lat` pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedOverride {
    pub d: Option<f64>,
    pub v_hat: Option<f64>,
    pub a: Option<f64>,
    pub theta_long: Option<f64>,
    pub theta_lat: Option<f64>,
}

impl SeedOverride {
    fn apply(&self, p: ControlParameters) -> ControlParameters {
        let d = self.d.unwrap_or(p.d);
        let v = self.v_hat.unwrap_or(p.v_hat);
        match (self.a, self.theta_long, self.theta_lat) {
            (Some(a), _, _) => ControlParameters::from_angle(d, v, a),
            (None, None, None) => ControlParameters { d, v_hat: v, ..p },
            (None, long, lat) => ControlParameters::from_direction(
                d,
                v,
                long.unwrap_or(p.theta_long),
                lat.unwrap_or(p.theta_lat),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub kinds: Vec<ScenarioKind>,
    pub mutator: MutatorKind,
    /// Maximum number of executions across all kinds.
    pub budget: usize,
    /// Only consulted by the random and NC-start mutators.
    pub rng_seed: u64,
    pub defect: DefectModel,
    pub oracle: OracleConfig,
    pub sim: SimConfig,
    pub scene: SceneDefaults,
    pub plans: BTreeMap<ScenarioKind, PlanOverride>,
    pub seeds: BTreeMap<ScenarioKind, SeedOverride>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            kinds: ScenarioKind::ALL.to_vec(),
            mutator: MutatorKind::Guided,
            budget: 20_000,
            rng_seed: 0,
            defect: DefectModel::default(),
            oracle: OracleConfig::default(),
            sim: SimConfig::default(),
            scene: SceneDefaults::default(),
            plans: BTreeMap::new(),
            seeds: BTreeMap::new(),
        }
    }
}

impl CampaignConfig {
    /// Parses and validates a config document. Parse errors carry the
    /// line/column; validation errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{e}")))?;
        if cfg.budget < 1 {
            return Err(Error::Config("budget must be >= 1".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn plan_for(&self, kind: ScenarioKind) -> SearchPlan {
        let base = SearchPlan::for_kind(kind);
        match self.plans.get(&kind) {
            Some(o) => o.apply(base),
            None => base,
        }
    }

    pub fn seed_for(&self, kind: ScenarioKind) -> (ScenarioSpec, ControlParameters) {
        let (spec, params) = make_seed_with(kind, &self.scene);
        match self.seeds.get(&kind) {
            Some(o) => (spec, o.apply(params)),
            None => (spec, params),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() {
            return Err(Error::Config("kinds must not be empty".into()));
        }
        self.defect.validate()?;
        self.oracle.validate()?;
        self.sim.validate()?;
        self.scene
            .validate()
            .map_err(|e| Error::Config(format!("scene: {e}")))?;
        for kind in &self.kinds {
            self.plan_for(*kind)
                .validate()
                .map_err(|e| Error::Config(format!("plans.{kind}: {}", strip(e))))?;
            let (_, params) = self.seed_for(*kind);
            params
                .validate()
                .map_err(|e| Error::Config(format!("seeds.{kind}: {}", strip(e))))?;
        }
        Ok(())
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(s) | Error::Param(s) => s,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        let cfg = CampaignConfig::from_json("{}").unwrap();
        assert_eq!(cfg, CampaignConfig::default());
    }

    #[test]
    fn out_of_range_seed_distance_is_named() {
        let err = CampaignConfig::from_json(r#"{"seeds": {"FLV": {"d": 9}}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("seeds.FLV") && msg.contains("2..7"), "{msg}");
        let err = CampaignConfig::from_json(r#"{"plans": {"PSF": {"distance_start": 9}}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("2..7"));
    }

    #[test]
    fn unknown_fields_report_position() {
        let err = CampaignConfig::from_json("{\n  \"budgte\": 5\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("budgte") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn zero_budget_rejected_in_files() {
        assert!(CampaignConfig::from_json(r#"{"budget": 0}"#).is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = CampaignConfig::from_json(
            r#"{"plans": {"FLB": {"k_nc": 1, "angle_mode": "per_axis"}},
                "seeds": {"LC": {"theta_long": 1.0, "theta_lat": -0.5}}}"#,
        )
        .unwrap();
        let plan = cfg.plan_for(ScenarioKind::FLB);
        assert_eq!(plan.k_nc, 1);
        assert_eq!(plan.angle_mode, AngleMode::PerAxis);
        assert_eq!(plan.angle_step_long, 0.04);
        let (_, seed) = cfg.seed_for(ScenarioKind::LC);
        assert!(seed.a < 0.0 && seed.theta_lat == -0.5);
        let round_trip = CampaignConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(round_trip, cfg);
    }
}
