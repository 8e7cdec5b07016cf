//! Python bindings: boxes and geometry, single executions, campaigns,
//! replay and success-rate reports. Configs and records cross the boundary
//! as JSON text so the Python side can use plain dicts.

use icsfuzz::detector::DefectModel;
use icsfuzz::error::Error;
use icsfuzz::fuzzer::{self, CampaignConfig, CampaignResult, Evaluator};
use icsfuzz::geometry::{self, OrientedBox, Point2};
use icsfuzz::oracle::{self, OracleConfig};
use icsfuzz::report::{self, BucketScheme, ExportFormat};
use icsfuzz::scenario::{ControlParameters, ScenarioKind};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        Error::NonFinite { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Oriented rectangle on the ground plane.
#[pyclass(name = "Box", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyBox(OrientedBox);

#[pymethods]
impl PyBox {
    #[new]
    fn new(x: f64, y: f64, half_length: f64, half_width: f64, yaw: f64) -> Self {
        PyBox(OrientedBox::new(Point2::new(x, y), half_length, half_width, yaw))
    }

    fn area(&self) -> f64 {
        self.0.area()
    }

    fn corners(&self) -> Vec<(f64, f64)> {
        geometry::corners(&self.0).iter().map(|p| (p.x, p.y)).collect()
    }

    fn overlaps(&self, other: &PyBox) -> bool {
        geometry::overlaps(&self.0, &other.0)
    }

    fn intersection_area(&self, other: &PyBox) -> f64 {
        geometry::intersection_area(&self.0, &other.0)
    }

    fn iou(&self, other: &PyBox) -> f64 {
        geometry::iou(&self.0, &other.0)
    }

    fn penetration_depth(&self, other: &PyBox) -> f64 {
        geometry::penetration_depth(&self.0, &other.0)
    }

    fn __repr__(&self) -> String {
        let b = &self.0;
        format!(
            "Box(x={}, y={}, half_length={}, half_width={}, yaw={})",
            b.center.x, b.center.y, b.half_length, b.half_width, b.yaw
        )
    }
}

/// Trigger distance, post-trigger speed and heading offset.
#[pyclass(name = "ControlParameters", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(ControlParameters);

#[pymethods]
impl PyParams {
    #[new]
    fn new(d: f64, v_hat: f64, a: f64) -> PyResult<Self> {
        let p = ControlParameters::from_angle(d, v_hat, a);
        p.validate().map_err(py_err)?;
        Ok(PyParams(p))
    }

    #[staticmethod]
    fn from_direction(d: f64, v_hat: f64, theta_long: f64, theta_lat: f64) -> PyResult<Self> {
        let p = ControlParameters::from_direction(d, v_hat, theta_long, theta_lat);
        p.validate().map_err(py_err)?;
        Ok(PyParams(p))
    }

    #[getter]
    fn d(&self) -> f64 {
        self.0.d
    }
    #[getter]
    fn v_hat(&self) -> f64 {
        self.0.v_hat
    }
    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }
    #[getter]
    fn theta_long(&self) -> f64 {
        self.0.theta_long
    }
    #[getter]
    fn theta_lat(&self) -> f64 {
        self.0.theta_lat
    }

    fn __repr__(&self) -> String {
        format!("ControlParameters(d={}, v_hat={}, a={})", self.0.d, self.0.v_hat, self.0.a)
    }
}

/// Built-in detector defects: sample period and depth/speed floors.
#[pyclass(name = "DefectModel", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyDefect(DefectModel);

#[pymethods]
impl PyDefect {
    #[new]
    #[pyo3(signature = (sample_period=5, min_penetration=0.05, min_impact_speed=0.5))]
    fn new(sample_period: usize, min_penetration: f64, min_impact_speed: f64) -> PyResult<Self> {
        let d = DefectModel {
            sample_period,
            min_penetration,
            min_impact_speed,
        };
        d.validate().map_err(py_err)?;
        Ok(PyDefect(d))
    }

    #[staticmethod]
    fn perfect() -> Self {
        PyDefect(DefectModel::perfect())
    }
    #[staticmethod]
    fn tunneling() -> Self {
        PyDefect(DefectModel::tunneling())
    }
    #[staticmethod]
    fn graze() -> Self {
        PyDefect(DefectModel::graze())
    }

    #[getter]
    fn sample_period(&self) -> usize {
        self.0.sample_period
    }
    #[getter]
    fn min_penetration(&self) -> f64 {
        self.0.min_penetration
    }
    #[getter]
    fn min_impact_speed(&self) -> f64 {
        self.0.min_impact_speed
    }
}

/// One simulated execution and its verdict.
#[pyclass(name = "Execution", frozen)]
struct PyExecution {
    #[pyo3(get)]
    verdict: String,
    #[pyo3(get)]
    first_contact_s: Option<f64>,
    #[pyo3(get)]
    trigger_s: Option<f64>,
    #[pyo3(get)]
    frames: usize,
    #[pyo3(get)]
    max_iou: f64,
}

impl From<fuzzer::Execution> for PyExecution {
    fn from(e: fuzzer::Execution) -> Self {
        PyExecution {
            verdict: e.verdict.as_str().to_string(),
            first_contact_s: e.trace.first_contact_time(),
            trigger_s: e.trace.trigger_frame.map(|i| e.trace.frames[i].t),
            frames: e.trace.frames.len(),
            max_iou: oracle::max_iou(&e.trace),
        }
    }
}

#[pymethods]
impl PyExecution {
    fn __repr__(&self) -> String {
        format!("Execution(verdict={}, first_contact_s={:?})", self.verdict, self.first_contact_s)
    }
}

/// A finished campaign: the ordered log and its manifest.
#[pyclass(name = "Campaign", frozen)]
struct PyCampaign(CampaignResult);

#[pymethods]
impl PyCampaign {
    fn __len__(&self) -> usize {
        self.0.records.len()
    }

    /// JSON-lines log, byte-identical to the CLI's log.jsonl.
    fn log(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_log(&mut buf).map_err(py_err)?;
        Ok(String::from_utf8(buf).expect("log is UTF-8"))
    }

    fn manifest_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0.manifest).map_err(json_err)
    }

    /// Verdict counts keyed by "IC", "DC", "NC" and "FP".
    fn totals(&self) -> Vec<(String, usize)> {
        self.0
            .manifest
            .totals
            .iter()
            .map(|(k, v)| (k.as_str().to_string(), *v))
            .collect()
    }

    /// Success-rate report rendered as "csv" or "svg".
    #[pyo3(signature = (format="csv"))]
    fn report(&self, format: &str) -> PyResult<String> {
        render(&self.0.records, format)
    }
}

fn render(records: &[fuzzer::OutcomeRecord], format: &str) -> PyResult<String> {
    let format: ExportFormat = format.parse().map_err(py_err)?;
    let r = report::success_rates(records, &BucketScheme::default()).map_err(py_err)?;
    Ok(report::export(&r, format))
}

fn config_from(json: Option<&str>) -> PyResult<CampaignConfig> {
    match json {
        Some(text) => CampaignConfig::from_json(text).map_err(py_err),
        None => Ok(CampaignConfig::default()),
    }
}

/// Simulates one execution of a scenario kind and classifies it.
#[pyfunction]
#[pyo3(signature = (kind, params, defect=None, t_bbox=0.0))]
fn execute(kind: &str, params: &PyParams, defect: Option<&PyDefect>, t_bbox: f64) -> PyResult<PyExecution> {
    let kind: ScenarioKind = kind.parse().map_err(py_err)?;
    let cfg = CampaignConfig::default();
    let (spec, _) = cfg.seed_for(kind);
    let defect = defect.map_or_else(DefectModel::default, |d| d.0);
    let oracle = OracleConfig { t_bbox };
    oracle.validate().map_err(py_err)?;
    let eval = Evaluator {
        spec: &spec,
        defect: &defect,
        oracle: &oracle,
        sim: &cfg.sim,
    };
    Ok(eval.run(&params.0).map_err(py_err)?.into())
}

/// Runs a campaign from a JSON config (defaults when omitted).
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn run_campaign(py: Python<'_>, config_json: Option<&str>) -> PyResult<PyCampaign> {
    let cfg = config_from(config_json)?;
    let result = py.detach(|| fuzzer::run_campaign(&cfg)).map_err(py_err)?;
    Ok(PyCampaign(result))
}

/// Re-executes one JSON log line under a config.
#[pyfunction]
#[pyo3(signature = (record_json, config_json=None))]
fn replay(record_json: &str, config_json: Option<&str>) -> PyResult<PyExecution> {
    let record: fuzzer::OutcomeRecord = serde_json::from_str(record_json).map_err(json_err)?;
    let cfg = config_from(config_json)?;
    Ok(fuzzer::replay(&record, &cfg).map_err(py_err)?.into())
}

/// Success-rate report of a JSON-lines log.
#[pyfunction]
#[pyo3(signature = (log, format="csv"))]
fn report_from_log(log: &str, format: &str) -> PyResult<String> {
    let records = fuzzer::read_log(log).map_err(py_err)?;
    render(&records, format)
}

#[pymodule]
fn pyicsfuzz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBox>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyDefect>()?;
    m.add_class::<PyExecution>()?;
    m.add_class::<PyCampaign>()?;
    m.add_function(wrap_pyfunction!(execute, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(report_from_log, m)?)?;
    m.add("SCENARIO_KINDS", ScenarioKind::ALL.map(|k| k.as_str()).to_vec())?;
    Ok(())
}
