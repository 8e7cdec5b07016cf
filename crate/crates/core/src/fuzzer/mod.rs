//! Fuzzing campaigns over collision distance, speed and angle.
//!
//! A guided round starts from a determined collision and, for every
//! (distance, speed) cell, walks the angle outward from the seed angle: first
//! the `+` branch, then the `-` branch. A branch ends after `k_nc`
//! consecutive NC verdicts or at the range bound. Rounds do not stop on an
//! ICS. The two baselines sample the box uniformly (`Random`) or walk the
//! same branches in reverse, from the angle bound back toward the seed
//! (`NcStart`).

mod config;
mod plan;
mod sweep;

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{CampaignConfig, MutatorKind, PlanOverride, SeedOverride};
pub use plan::{branch_points, mutate_step, AngleMode, SearchPlan, StepAxis};
pub use sweep::{ablation_set, step_size_sweep, StepSweepPoint, SweepAxis};

use crate::detector::DefectModel;
use crate::error::{Error, Result};
use crate::oracle::{check_ic, OracleConfig, ScenarioType};
use crate::report::{bucket, BucketLabels, BucketScheme};
use crate::scenario::{validate_seed_with, ControlParameters, ScenarioKind, ScenarioSpec};
use crate::simulator::{simulate, SimConfig, Trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    /// Position in the campaign log.
    pub ordinal: usize,
    pub kind: ScenarioKind,
    /// Position among this kind's executions.
    pub kind_ordinal: usize,
    pub params: ControlParameters,
    pub verdict: ScenarioType,
    pub first_contact_s: Option<f64>,
    /// Campaign clock for this kind after this execution: the simulated
    /// seconds of every execution so far, so it is reproducible.
    pub elapsed_s: f64,
    pub buckets: BucketLabels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindTotals {
    pub kind: ScenarioKind,
    pub executions: usize,
    pub totals: BTreeMap<ScenarioType, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// SHA-256 of the config file bytes; filled in by the runner that read it.
    pub config_digest: String,
    pub mutator: MutatorKind,
    pub budget: usize,
    pub executions: usize,
    pub totals: BTreeMap<ScenarioType, usize>,
    pub per_kind: Vec<KindTotals>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub records: Vec<OutcomeRecord>,
    pub manifest: Manifest,
}

impl CampaignResult {
    /// One JSON object per record, in ordinal order.
    pub fn write_log<W: Write>(&self, out: W) -> Result<()> {
        write_log(&self.records, out)
    }
}

pub fn write_log<W: Write>(records: &[OutcomeRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_log(text: &str) -> Result<Vec<OutcomeRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Fixed evaluation settings shared by every execution of a campaign.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    pub spec: &'a ScenarioSpec,
    pub defect: &'a DefectModel,
    pub oracle: &'a OracleConfig,
    pub sim: &'a SimConfig,
}

/// One simulated and classified execution.
#[derive(Debug, Clone)]
pub struct Execution {
    pub params: ControlParameters,
    pub verdict: ScenarioType,
    pub trace: Trace,
}

impl Execution {
    /// Contact came before the behavior switch (or the switch never came),
    /// so the collision is not produced by the control parameters.
    pub fn insensitive(&self) -> bool {
        match (self.trace.trigger_frame, self.trace.first_contact) {
            (None, _) => true,
            (Some(t), Some(c)) => t > c,
            (Some(_), None) => false,
        }
    }
}

impl Evaluator<'_> {
    pub fn run(&self, params: &ControlParameters) -> Result<Execution> {
        let trace = simulate(self.spec, params, self.sim)?;
        let verdict = check_ic(&trace, self.defect, self.oracle);
        Ok(Execution {
            params: *params,
            verdict,
            trace,
        })
    }
}

/// Accumulates records for one kind and enforces its execution budget.
struct Recorder {
    kind: ScenarioKind,
    budget: usize,
    clock: f64,
    scheme: BucketScheme,
    records: Vec<OutcomeRecord>,
}

impl Recorder {
    fn new(kind: ScenarioKind, budget: usize) -> Self {
        Self {
            kind,
            budget,
            clock: 0.0,
            scheme: BucketScheme::default(),
            records: Vec::new(),
        }
    }

    fn exhausted(&self) -> bool {
        self.records.len() >= self.budget
    }

    fn push(&mut self, exec: &Execution) {
        self.clock += exec.trace.duration();
        self.records.push(OutcomeRecord {
            ordinal: 0,
            kind: self.kind,
            kind_ordinal: self.records.len(),
            params: exec.params,
            verdict: exec.verdict,
            first_contact_s: exec.trace.first_contact_time(),
            elapsed_s: self.clock,
            buckets: bucket(&exec.params, &self.scheme),
        });
    }

    /// Runs and records one execution; `None` once the budget is spent.
    fn step(&mut self, eval: &Evaluator, params: &ControlParameters) -> Result<Option<Execution>> {
        if self.exhausted() {
            return Ok(None);
        }
        let exec = eval.run(params)?;
        self.push(&exec);
        Ok(Some(exec))
    }
}

enum BranchEnd {
    Done,
    SkipRow,
    OutOfBudget,
}

/// Executes `points` in order until `k_nc` consecutive NCs. When
/// `probe_row` is set, the first execution decides whether the rest of the
/// distance row can be skipped. When `nc_start` is set, the branch is
/// abandoned unless its first point is a non-collision.
fn run_branch(
    points: &[ControlParameters],
    plan: &SearchPlan,
    probe_row: bool,
    nc_start: bool,
    eval: &Evaluator,
    rec: &mut Recorder,
) -> Result<BranchEnd> {
    let mut consecutive_nc = 0;
    for (i, p) in points.iter().enumerate() {
        let Some(exec) = rec.step(eval, p)? else {
            return Ok(BranchEnd::OutOfBudget);
        };
        if i == 0 && probe_row && plan.skip_insensitive && exec.insensitive() {
            return Ok(BranchEnd::SkipRow);
        }
        if i == 0 && nc_start && exec.verdict != ScenarioType::NC {
            break;
        }
        if exec.verdict == ScenarioType::NC {
            consecutive_nc += 1;
            if consecutive_nc >= plan.k_nc {
                break;
            }
        } else {
            consecutive_nc = 0;
        }
    }
    Ok(BranchEnd::Done)
}

fn cell(seed: &ControlParameters, d: f64, v: f64) -> ControlParameters {
    ControlParameters { d, v_hat: v, ..*seed }
}

fn guided_round(
    seed: &ControlParameters,
    plan: &SearchPlan,
    eval: &Evaluator,
    rec: &mut Recorder,
) -> Result<()> {
    for d in plan.distance_schedule() {
        'speeds: for v in plan.speed_schedule() {
            let start = cell(seed, d, v);
            let plus = branch_points(&start, StepAxis::AnglePlus, plan);
            match run_branch(&plus, plan, true, false, eval, rec)? {
                BranchEnd::OutOfBudget => return Ok(()),
                BranchEnd::SkipRow => break 'speeds,
                BranchEnd::Done => {}
            }
            let minus = branch_points(&start, StepAxis::AngleMinus, plan);
            if let BranchEnd::OutOfBudget = run_branch(&minus[1..], plan, false, false, eval, rec)? {
                return Ok(());
            }
        }
    }
    Ok(())
}

fn nc_start_round(
    seed: &ControlParameters,
    plan: &SearchPlan,
    eval: &Evaluator,
    rec: &mut Recorder,
) -> Result<()> {
    for d in plan.distance_schedule() {
        'speeds: for v in plan.speed_schedule() {
            let start = cell(seed, d, v);
            let mut plus = branch_points(&start, StepAxis::AnglePlus, plan);
            plus.reverse();
            match run_branch(&plus, plan, true, true, eval, rec)? {
                BranchEnd::OutOfBudget => return Ok(()),
                BranchEnd::SkipRow => break 'speeds,
                BranchEnd::Done => {}
            }
            let mut minus = branch_points(&start, StepAxis::AngleMinus, plan);
            minus.reverse();
            // the seed angle itself was covered by the + branch
            minus.pop();
            if let BranchEnd::OutOfBudget = run_branch(&minus, plan, false, true, eval, rec)? {
                return Ok(());
            }
        }
    }
    Ok(())
}

fn kind_seed(kind: ScenarioKind, rng_seed: u64) -> u64 {
    // splitmix-style spread so neighbouring kinds get unrelated streams
    let mut z = rng_seed ^ (kind.index() as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw from the plan's parameter box.
pub fn sample_params<R: Rng>(rng: &mut R, plan: &SearchPlan) -> ControlParameters {
    let d = rng.random_range(plan.distance_start..=crate::scenario::DISTANCE_MAX);
    let v = rng.random_range(plan.speed_start..=crate::scenario::SPEED_MAX);
    let a = rng.random_range(-1.0..=1.0);
    ControlParameters::from_angle(d, v, a)
}

fn random_round(
    kind: ScenarioKind,
    plan: &SearchPlan,
    rng_seed: u64,
    eval: &Evaluator,
    rec: &mut Recorder,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(kind_seed(kind, rng_seed));
    let draws: Vec<ControlParameters> = (0..rec.budget).map(|_| sample_params(&mut rng, plan)).collect();
    let execs: Vec<Execution> = draws
        .par_iter()
        .map(|p| eval.run(p))
        .collect::<Result<_>>()?;
    for exec in &execs {
        rec.push(exec);
    }
    Ok(())
}

/// One guided round from a seed, bounded by `config.budget`.
pub fn run_round(
    seed: (&ScenarioSpec, ControlParameters),
    config: &CampaignConfig,
) -> Result<Vec<OutcomeRecord>> {
    let (spec, params) = seed;
    if !validate_seed_with(spec, &params, &config.sim) {
        return Err(Error::InvalidSeed(format!(
            "{} seed does not produce a collision",
            spec.kind
        )));
    }
    let plan = config.plan_for(spec.kind);
    plan.validate()?;
    let eval = Evaluator {
        spec,
        defect: &config.defect,
        oracle: &config.oracle,
        sim: &config.sim,
    };
    let mut rec = Recorder::new(spec.kind, config.budget);
    guided_round(&params, &plan, &eval, &mut rec)?;
    let mut records = rec.records;
    for (i, r) in records.iter_mut().enumerate() {
        r.ordinal = i;
    }
    Ok(records)
}

/// Runs every configured kind under the configured mutator.
///
/// The budget is shared out in kind order: each kind may use the remaining
/// budget divided by the number of kinds still to run, so budget a kind
/// leaves unused passes to the ones after it.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let mut records: Vec<OutcomeRecord> = Vec::new();
    let mut per_kind = Vec::new();
    let n = config.kinds.len();
    for (i, &kind) in config.kinds.iter().enumerate() {
        let remaining = config.budget - records.len();
        let share = remaining / (n - i) + usize::from(remaining % (n - i) > 0);
        let share = share.min(remaining);
        let (spec, seed) = config.seed_for(kind);
        let plan = config.plan_for(kind);
        let eval = Evaluator {
            spec: &spec,
            defect: &config.defect,
            oracle: &config.oracle,
            sim: &config.sim,
        };
        let mut rec = Recorder::new(kind, share);
        if share > 0 {
            match config.mutator {
                MutatorKind::Guided => {
                    if !validate_seed_with(&spec, &seed, &config.sim) {
                        return Err(Error::InvalidSeed(format!(
                            "{kind} seed does not produce a collision"
                        )));
                    }
                    guided_round(&seed, &plan, &eval, &mut rec)?
                }
                MutatorKind::NcStart => nc_start_round(&seed, &plan, &eval, &mut rec)?,
                MutatorKind::Random => random_round(kind, &plan, config.rng_seed, &eval, &mut rec)?,
            }
        }
        let mut totals = BTreeMap::new();
        for r in &rec.records {
            *totals.entry(r.verdict).or_insert(0) += 1;
        }
        per_kind.push(KindTotals {
            kind,
            executions: rec.records.len(),
            totals,
        });
        let base = records.len();
        records.extend(rec.records.into_iter().enumerate().map(|(j, mut r)| {
            r.ordinal = base + j;
            r
        }));
    }
    let mut totals = BTreeMap::new();
    for t in ScenarioType::ALL {
        totals.insert(t, 0);
    }
    for r in &records {
        *totals.entry(r.verdict).or_insert(0) += 1;
    }
    let manifest = Manifest {
        config_digest: String::new(),
        mutator: config.mutator,
        budget: config.budget,
        executions: records.len(),
        totals,
        per_kind,
    };
    Ok(CampaignResult { records, manifest })
}

/// Re-simulates a logged record under `config`.
pub fn replay(record: &OutcomeRecord, config: &CampaignConfig) -> Result<Execution> {
    let (spec, _) = config.seed_for(record.kind);
    let eval = Evaluator {
        spec: &spec,
        defect: &config.defect,
        oracle: &config.oracle,
        sim: &config.sim,
    };
    eval.run(&record.params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::make_seed;

    fn small(kind: ScenarioKind, mutator: MutatorKind, budget: usize) -> CampaignConfig {
        CampaignConfig {
            kinds: vec![kind],
            mutator,
            budget,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn zero_budget_gives_empty_log() {
        let res = run_campaign(&small(ScenarioKind::FLV, MutatorKind::Guided, 0)).unwrap();
        assert!(res.records.is_empty());
        assert_eq!(res.manifest.executions, 0);
        assert_eq!(res.manifest.totals.values().sum::<usize>(), 0);
    }

    #[test]
    fn budget_is_exact() {
        for m in [MutatorKind::Guided, MutatorKind::Random, MutatorKind::NcStart] {
            let cfg = CampaignConfig {
                budget: 50,
                mutator: m,
                ..CampaignConfig::default()
            };
            let res = run_campaign(&cfg).unwrap();
            assert_eq!(res.records.len(), 50, "{m:?}");
            for (i, r) in res.records.iter().enumerate() {
                assert_eq!(r.ordinal, i);
            }
        }
    }

    #[test]
    fn invalid_seed_rejected() {
        let (spec, _) = make_seed(ScenarioKind::FLV);
        let bad = ControlParameters::from_angle(7.0, 20.0, 1.0);
        let cfg = CampaignConfig::default();
        assert!(matches!(
            run_round((&spec, bad), &cfg),
            Err(Error::InvalidSeed(_))
        ));
    }

    #[test]
    fn insensitive_rows_collapse_to_one_execution() {
        let cfg = small(ScenarioKind::FLV, MutatorKind::Guided, 100_000);
        let (spec, seed) = make_seed(ScenarioKind::FLV);
        let records = run_round((&spec, seed), &cfg).unwrap();
        // d = 2, 3, 4 sit inside the bumper-to-bumper distance
        for d in [2.0, 3.0, 4.0] {
            assert_eq!(records.iter().filter(|r| r.params.d == d).count(), 1);
        }
    }

    #[test]
    fn random_mode_depends_on_rng_seed() {
        let a = run_campaign(&small(ScenarioKind::PSF, MutatorKind::Random, 20)).unwrap();
        let mut cfg = small(ScenarioKind::PSF, MutatorKind::Random, 20);
        cfg.rng_seed = 7;
        let b = run_campaign(&cfg).unwrap();
        assert_ne!(a.records[0].params, b.records[0].params);
        let again = run_campaign(&small(ScenarioKind::PSF, MutatorKind::Random, 20)).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn log_round_trips() {
        let res = run_campaign(&small(ScenarioKind::PCF, MutatorKind::Guided, 30)).unwrap();
        let mut buf = Vec::new();
        res.write_log(&mut buf).unwrap();
        let back = read_log(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, res.records);
    }
}
