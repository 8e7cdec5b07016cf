//! Fixed-step kinematic simulation of one scenario execution.
//!
//! The EV cruises at its seed speed until the center distance to the NPC
//! drops to `d`, then switches instantly to speed `v_hat` and heading
//! `original + a·90°`. There are no impulses: after contact the two boxes keep
//! moving through each other, and `settle_frames` more frames are recorded so
//! a sampling detector has a window in which to see (or miss) the contact.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{center_distance, overlaps, penetration_depth, OrientedBox, Point2};
use crate::scenario::{ControlParameters, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Physics step, seconds.
    pub dt: f64,
    /// Maximum simulated time, seconds.
    pub horizon: f64,
    /// Frames recorded after first contact.
    pub settle_frames: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            horizon: 15.0,
            settle_frames: 20,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("sim.dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 10.0 * self.dt) || !self.horizon.is_finite() {
            return Err(Error::Config(format!(
                "sim.horizon {} must be at least 10 steps",
                self.horizon
            )));
        }
        Ok(())
    }

    pub fn max_frames(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub ev_box: OrientedBox,
    pub npc_box: OrientedBox,
    pub gt_overlap: bool,
    pub penetration: f64,
    /// Rate at which the center distance is shrinking; zero when separating.
    pub closing_speed: f64,
    pub triggered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub frames: Vec<Frame>,
    pub first_contact: Option<usize>,
    pub trigger_frame: Option<usize>,
}

impl Trace {
    pub fn first_contact_time(&self) -> Option<f64> {
        self.first_contact.map(|i| self.frames[i].t)
    }

    /// Simulated duration covered by the trace.
    pub fn duration(&self) -> f64 {
        self.frames.last().map_or(0.0, |f| f.t)
    }

    /// Writes one JSON object per frame.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for frame in &self.frames {
            serde_json::to_writer(&mut out, frame)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Speed at which the two centers approach each other, floored at zero.
pub fn closing_speed(ev: Point2, npc: Point2, ev_vel: Point2, npc_vel: Point2) -> f64 {
    let rel = npc - ev;
    let dist = rel.norm();
    if dist == 0.0 {
        return 0.0;
    }
    let approach = -(rel.dot(npc_vel - ev_vel)) / dist;
    approach.max(0.0)
}

/// Runs one execution.
///
/// Stops at `first_contact + settle_frames` or at the horizon, whichever is
/// earlier.
pub fn simulate(spec: &ScenarioSpec, params: &ControlParameters, cfg: &SimConfig) -> Result<Trace> {
    cfg.validate()?;
    params.validate()?;

    let ev_shape = spec.ev.initial_box();
    let npc_shape = spec.npc.initial_box();

    let mut ev_pos = spec.ev.position;
    let mut ev_yaw = spec.ev.yaw;
    let mut ev_vel = spec.ev.behavior.velocity(ev_yaw);
    let mut npc_pos = spec.npc.position;
    let npc_yaw = spec.npc.yaw;
    let npc_vel = spec.npc.behavior.velocity(npc_yaw);

    let max_frames = cfg.max_frames();
    let mut frames = Vec::with_capacity(max_frames.min(4096) + 1);
    let mut trigger_frame = None;
    let mut first_contact: Option<usize> = None;

    for i in 0..=max_frames {
        let t = i as f64 * cfg.dt;
        if !(ev_pos.is_finite() && npc_pos.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let npc_box = npc_shape.with_pose(npc_pos, npc_yaw);
        if trigger_frame.is_none() {
            let probe = ev_shape.with_pose(ev_pos, ev_yaw);
            if center_distance(&probe, &npc_box) <= params.d {
                trigger_frame = Some(i);
                ev_yaw = spec.ev.yaw + params.heading_offset();
                ev_vel = Point2::new(ev_yaw.cos(), ev_yaw.sin()) * params.v_hat;
            }
        }
        let ev_box = ev_shape.with_pose(ev_pos, ev_yaw);
        let gt_overlap = overlaps(&ev_box, &npc_box);
        frames.push(Frame {
            t,
            ev_box,
            npc_box,
            gt_overlap,
            penetration: penetration_depth(&ev_box, &npc_box),
            closing_speed: closing_speed(ev_pos, npc_pos, ev_vel, npc_vel),
            triggered: trigger_frame.is_some(),
        });
        if gt_overlap && first_contact.is_none() {
            first_contact = Some(i);
        }
        if let Some(fc) = first_contact {
            if i >= fc + cfg.settle_frames {
                break;
            }
        }
        ev_pos = ev_pos + ev_vel * cfg.dt;
        npc_pos = npc_pos + npc_vel * cfg.dt;
    }

    Ok(Trace {
        frames,
        first_contact,
        trigger_frame,
    })
}
