//! Success-rate tables over parameter buckets, ICS categories and exports.
//!
//! SR for a bucket is ICS / (ICS + DC): the share of real collisions the
//! built-in detector missed. Buckets without any collision have no SR.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzer::OutcomeRecord;
use crate::oracle::ScenarioType;
use crate::scenario::{ControlParameters, ScenarioKind};

/// Half-width of the "straight" angle class.
pub const ANGLE_ZERO_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketScheme {
    /// Inclusive upper bounds and labels; a value goes to the first bucket
    /// whose bound it does not exceed.
    pub distance: Vec<(f64, String)>,
    pub speed: Vec<(f64, String)>,
    /// Angle bucket centers; a value goes to the nearest, ties to the lower.
    pub angle_centers: Vec<f64>,
}

impl Default for BucketScheme {
    fn default() -> Self {
        let labeled = |bounds: &[(f64, &str)]| {
            bounds.iter().map(|(b, l)| (*b, l.to_string())).collect::<Vec<_>>()
        };
        Self {
            distance: labeled(&[(3.0, "2-3"), (5.0, "4-5"), (7.0, "6-7")]),
            speed: labeled(&[
                (10.0, "0-10"),
                (20.0, "10-20"),
                (30.0, "20-30"),
                (40.0, "30-40"),
                (50.0, "40-50"),
            ]),
            angle_centers: (-4..=4).map(|i| i as f64 * 0.25).collect(),
        }
    }
}

fn upper_bound_label(bounds: &[(f64, String)], value: f64) -> String {
    bounds
        .iter()
        .find(|(b, _)| value <= *b + 1e-9)
        .or(bounds.last())
        .map(|(_, l)| l.clone())
        .unwrap_or_default()
}

impl BucketScheme {
    pub fn distance_label(&self, d: f64) -> String {
        upper_bound_label(&self.distance, d)
    }

    pub fn speed_label(&self, v: f64) -> String {
        upper_bound_label(&self.speed, v)
    }

    pub fn angle_center(&self, a: f64) -> f64 {
        let mut best = self.angle_centers[0];
        for &c in &self.angle_centers[1..] {
            // strict comparison keeps ties on the lower center
            if (a - c).abs() < (a - best).abs() - 1e-12 {
                best = c;
            }
        }
        best
    }

    pub fn angle_labels(&self) -> Vec<String> {
        self.angle_centers.iter().map(|c| format_angle(*c)).collect()
    }
}

pub fn format_angle(c: f64) -> String {
    format!("{c}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistanceClass {
    L,
    M,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeedClass {
    L,
    M,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AngleClass {
    N,
    #[serde(rename = "0")]
    Zero,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CategoryLabel {
    pub distance: DistanceClass,
    pub speed: SpeedClass,
    pub angle: AngleClass,
}

impl CategoryLabel {
    pub fn of(params: &ControlParameters) -> Self {
        let distance = if params.d <= 3.0 + 1e-9 {
            DistanceClass::L
        } else if params.d <= 5.0 + 1e-9 {
            DistanceClass::M
        } else {
            DistanceClass::F
        };
        let speed = if params.v_hat <= 20.0 + 1e-9 {
            SpeedClass::L
        } else if params.v_hat <= 40.0 + 1e-9 {
            SpeedClass::M
        } else {
            SpeedClass::H
        };
        let angle = if params.a < -ANGLE_ZERO_BAND {
            AngleClass::N
        } else if params.a > ANGLE_ZERO_BAND {
            AngleClass::P
        } else {
            AngleClass::Zero
        };
        Self { distance, speed, angle }
    }

    pub fn code(&self) -> String {
        let a = match self.angle {
            AngleClass::N => "N",
            AngleClass::Zero => "0",
            AngleClass::P => "P",
        };
        format!("{:?}{:?}{}", self.distance, self.speed, a)
    }
}

/// Per-axis labels attached to every outcome record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketLabels {
    pub distance: String,
    pub speed: String,
    pub angle: f64,
    pub category: CategoryLabel,
}

pub fn bucket(params: &ControlParameters, scheme: &BucketScheme) -> BucketLabels {
    BucketLabels {
        distance: scheme.distance_label(params.d),
        speed: scheme.speed_label(params.v_hat),
        angle: scheme.angle_center(params.a),
        category: CategoryLabel::of(params),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Distance,
    Speed,
    Angle,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Distance, Axis::Speed, Axis::Angle];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Distance => "distance",
            Axis::Speed => "speed",
            Axis::Angle => "angle",
        }
    }

    fn labels(self, scheme: &BucketScheme) -> Vec<String> {
        match self {
            Axis::Distance => scheme.distance.iter().map(|(_, l)| l.clone()).collect(),
            Axis::Speed => scheme.speed.iter().map(|(_, l)| l.clone()).collect(),
            Axis::Angle => scheme.angle_labels(),
        }
    }

    fn label_of(self, labels: &BucketLabels) -> String {
        match self {
            Axis::Distance => labels.distance.clone(),
            Axis::Speed => labels.speed.clone(),
            Axis::Angle => format_angle(labels.angle),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub executions: usize,
    pub ics: usize,
    pub dc: usize,
    pub nc: usize,
    pub fp: usize,
}

impl BucketStats {
    fn add(&mut self, verdict: ScenarioType) {
        self.executions += 1;
        match verdict {
            ScenarioType::IC => self.ics += 1,
            ScenarioType::DC => self.dc += 1,
            ScenarioType::NC => self.nc += 1,
            ScenarioType::FP => self.fp += 1,
        }
    }

    pub fn collisions(&self) -> usize {
        self.ics + self.dc
    }

    /// ICS share of collisions, as a fraction.
    pub fn sr(&self) -> Option<f64> {
        let den = self.collisions();
        (den > 0).then(|| self.ics as f64 / den as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisTable {
    pub axis: Axis,
    pub buckets: Vec<(String, BucketStats)>,
}

impl AxisTable {
    pub fn get(&self, label: &str) -> Option<&BucketStats> {
        self.buckets.iter().find(|(l, _)| l == label).map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub rows: Axis,
    pub cols: Axis,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<BucketStats>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub kind: ScenarioKind,
    pub executions: usize,
    pub ics: usize,
    pub collisions: usize,
    /// ICS count over executions.
    pub proportion: f64,
    /// Campaign clock (s) at the first ICS of this kind.
    pub time_to_first_ics: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SRReport {
    pub axes: Vec<AxisTable>,
    pub cross: Vec<CrossMatrix>,
    pub summary: Vec<KindSummary>,
    pub total_executions: usize,
}

impl SRReport {
    pub fn axis(&self, axis: Axis) -> Option<&AxisTable> {
        self.axes.iter().find(|t| t.axis == axis)
    }
}

pub fn success_rates(records: &[OutcomeRecord], scheme: &BucketScheme) -> Result<SRReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("outcome records"));
    }
    let axes = Axis::ALL
        .iter()
        .map(|&axis| {
            let mut buckets: Vec<(String, BucketStats)> = axis
                .labels(scheme)
                .into_iter()
                .map(|l| (l, BucketStats::default()))
                .collect();
            for r in records {
                let label = axis.label_of(&r.buckets);
                if let Some((_, s)) = buckets.iter_mut().find(|(l, _)| *l == label) {
                    s.add(r.verdict);
                }
            }
            AxisTable { axis, buckets }
        })
        .collect();

    let pairs = [
        (Axis::Distance, Axis::Speed),
        (Axis::Speed, Axis::Angle),
        (Axis::Distance, Axis::Angle),
    ];
    let cross = pairs
        .iter()
        .map(|&(rows, cols)| {
            let row_labels = rows.labels(scheme);
            let col_labels = cols.labels(scheme);
            let mut cells = vec![vec![BucketStats::default(); col_labels.len()]; row_labels.len()];
            for r in records {
                let ri = row_labels.iter().position(|l| *l == rows.label_of(&r.buckets));
                let ci = col_labels.iter().position(|l| *l == cols.label_of(&r.buckets));
                if let (Some(ri), Some(ci)) = (ri, ci) {
                    cells[ri][ci].add(r.verdict);
                }
            }
            CrossMatrix {
                rows,
                cols,
                row_labels,
                col_labels,
                cells,
            }
        })
        .collect();

    let mut per_kind: BTreeMap<ScenarioKind, KindSummary> = BTreeMap::new();
    for r in records {
        let s = per_kind.entry(r.kind).or_insert(KindSummary {
            kind: r.kind,
            executions: 0,
            ics: 0,
            collisions: 0,
            proportion: 0.0,
            time_to_first_ics: None,
        });
        s.executions += 1;
        if r.verdict.is_collision() {
            s.collisions += 1;
        }
        if r.verdict == ScenarioType::IC {
            s.ics += 1;
            if s.time_to_first_ics.is_none() {
                s.time_to_first_ics = Some(r.elapsed_s);
            }
        }
    }
    let summary = per_kind
        .into_values()
        .map(|mut s| {
            s.proportion = s.ics as f64 / s.executions as f64;
            s
        })
        .collect();

    Ok(SRReport {
        axes,
        cross,
        summary,
        total_executions: records.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub kind: ScenarioKind,
    pub category: CategoryLabel,
    pub count: usize,
    /// Campaign clock (s) at the first ICS of this category.
    pub first_elapsed_s: f64,
    pub mean_elapsed_s: f64,
}

/// Distinct (kind, distance, speed, angle) classes among the ICSs.
pub fn categorize_ics(records: &[OutcomeRecord]) -> Vec<CategoryRow> {
    let mut rows: BTreeMap<(ScenarioKind, CategoryLabel), (usize, f64, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.verdict == ScenarioType::IC) {
        let e = rows
            .entry((r.kind, r.buckets.category))
            .or_insert((0, r.elapsed_s, 0.0));
        e.0 += 1;
        e.1 = e.1.min(r.elapsed_s);
        e.2 += r.elapsed_s;
    }
    rows.into_iter()
        .map(|((kind, category), (count, first, total))| CategoryRow {
            kind,
            category,
            count,
            first_elapsed_s: first,
            mean_elapsed_s: total / count as f64,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Svg,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

pub const CSV_HEADER: &str = "axis,bucket,executions,collisions,ics,sr_percent";

/// Renders the report. Buckets with no executions are left out; an undefined
/// SR is an empty field.
pub fn export(report: &SRReport, format: ExportFormat) -> String {
    match format {
        ExportFormat::Csv => export_csv(report),
        ExportFormat::Svg => export_svg(report),
    }
}

fn export_csv(report: &SRReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for table in &report.axes {
        for (label, s) in table.buckets.iter().filter(|(_, s)| s.executions > 0) {
            let sr = s.sr().map(|v| format!("{:.2}", v * 100.0)).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                table.axis.as_str(),
                label,
                s.executions,
                s.collisions(),
                s.ics,
                sr
            );
        }
    }
    out
}

fn export_svg(report: &SRReport) -> String {
    const PANEL_W: f64 = 320.0;
    const PANEL_H: f64 = 200.0;
    const MARGIN: f64 = 30.0;
    let width = MARGIN + report.axes.len().max(1) as f64 * (PANEL_W + MARGIN);
    let height = PANEL_H + 3.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    for (p, table) in report.axes.iter().enumerate() {
        let x0 = MARGIN + p as f64 * (PANEL_W + MARGIN);
        let y0 = MARGIN;
        let _ = writeln!(
            out,
            r#"<text x="{x0}" y="{}">SR by {} (%)</text>"#,
            y0 - 8.0,
            table.axis.as_str()
        );
        let _ = writeln!(
            out,
            r##"<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#888"/>"##
        );
        let n = table.buckets.len().max(1) as f64;
        let bar_w = PANEL_W / n;
        for (i, (label, s)) in table.buckets.iter().enumerate() {
            let bx = x0 + i as f64 * bar_w;
            if let Some(sr) = s.sr() {
                let h = sr * PANEL_H;
                let _ = writeln!(
                    out,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4878a8"/>"##,
                    bx + 2.0,
                    y0 + PANEL_H - h,
                    (bar_w - 4.0).max(1.0),
                    h
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bx + bar_w / 2.0,
                y0 + PANEL_H + 14.0,
                label
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
