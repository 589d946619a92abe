use std::cell::RefCell;

use super::dataset::{bundled, Record, ReferenceDataset};
use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use crate::config::ToolkitConfig;
use crate::error::{Error, Result};
use crate::locomotion::{simulate, summarize, target_scenario, FinRole, DEFAULT_STEADY_FRACTION, TARGET_DURATION};
use crate::modal::build_reduced_model;
use crate::par::Exec;
use crate::thrust::predict_thrust;

/// Relative error reported when a prediction is not finite, e.g. an
/// infinite turning radius against a finite target.
pub const NON_FINITE_ERROR: f64 = 1e3;

/// How per-record relative errors combine into the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aggregation {
    /// Σ e²
    SumSquares,
    /// Σ (e / tolerance)^power, power even. Large powers approach a
    /// minimax fit of the tolerance-normalized errors.
    TolerancePower { power: i32 },
}

impl Aggregation {
    pub fn aggregate(&self, records: &[RecordError]) -> f64 {
        match *self {
            Aggregation::SumSquares => records.iter().map(|r| r.relative_error.powi(2)).sum(),
            Aggregation::TolerancePower { power } => records
                .iter()
                .map(|r| (r.relative_error / r.tolerance).abs().powi(power))
                .sum(),
        }
    }
}

/// A free parameter: dotted config key and box bounds in the key's units.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub key: String,
    pub lower: f64,
    pub upper: f64,
    /// Starting value; the base configuration's value when absent.
    pub start: Option<f64>,
}

impl ParamSpec {
    pub fn new(key: &str, lower: f64, upper: f64) -> Self {
        Self {
            key: key.into(),
            lower,
            upper,
            start: None,
        }
    }

    pub fn starting_at(mut self, start: f64) -> Self {
        self.start = Some(start);
        self
    }

    /// Log transform when bounds span more than two decades.
    pub fn is_log(&self) -> bool {
        self.lower > 0.0 && self.upper / self.lower > 100.0
    }

    fn unit_to_param(&self, s: f64) -> f64 {
        if self.is_log() {
            (self.lower.ln() + (self.upper.ln() - self.lower.ln()) * s).exp()
        } else {
            self.lower + (self.upper - self.lower) * s
        }
    }

    fn param_to_unit(&self, p: f64) -> f64 {
        let s = if self.is_log() {
            (p.ln() - self.lower.ln()) / (self.upper.ln() - self.lower.ln())
        } else {
            (p - self.lower) / (self.upper - self.lower)
        };
        s.clamp(0.0, 1.0)
    }

    /// Unbounded search coordinate to parameter value.
    pub fn from_search(&self, z: f64) -> f64 {
        self.unit_to_param(0.5 * (1.0 + z.sin()))
    }

    pub fn to_search(&self, p: f64) -> f64 {
        (2.0 * self.param_to_unit(p) - 1.0).asin()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub nelder_mead: NelderMeadOptions,
    /// Extra simplex rebuilds around the incumbent.
    pub restarts: usize,
    pub aggregation: Aggregation,
    /// Integration step for locomotion records, s.
    pub locomotion_dt: f64,
    pub locomotion_duration: f64,
    pub exec: Exec,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            nelder_mead: NelderMeadOptions {
                initial_step: None,
                ..NelderMeadOptions::default()
            },
            restarts: 2,
            aggregation: Aggregation::SumSquares,
            locomotion_dt: 5e-3,
            locomotion_duration: TARGET_DURATION,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordError {
    pub dataset: String,
    pub index: usize,
    pub label: String,
    pub predicted: f64,
    pub target: f64,
    pub unit: String,
    pub tolerance: f64,
    pub relative_error: f64,
}

impl RecordError {
    pub fn within_tolerance(&self) -> bool {
        self.relative_error.abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// (key, value) in key units.
    pub params: Vec<(String, f64)>,
    pub objective: f64,
    pub records: Vec<RecordError>,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

impl FitResult {
    pub fn apply(&self, config: &mut ToolkitConfig) -> Result<()> {
        for (k, v) in &self.params {
            config.set(k, *v)?;
        }
        Ok(())
    }

    pub fn max_abs_error(&self) -> f64 {
        self.records.iter().map(|r| r.relative_error.abs()).fold(0.0, f64::max)
    }

    /// Parameter table and per-record error table as TOML.
    pub fn to_toml_string(&self) -> String {
        use toml::{Table, Value};
        let mut root = Table::new();
        root.insert("objective".into(), Value::Float(self.objective));
        root.insert("converged".into(), Value::Boolean(self.converged));
        root.insert("iterations".into(), Value::Integer(self.iterations as i64));
        root.insert("evaluations".into(), Value::Integer(self.evaluations as i64));
        let params = self
            .params
            .iter()
            .map(|(k, v)| {
                let mut t = Table::new();
                t.insert("key".into(), Value::String(k.clone()));
                t.insert("value".into(), Value::Float(*v));
                Value::Table(t)
            })
            .collect();
        root.insert("params".into(), Value::Array(params));
        let records = self
            .records
            .iter()
            .map(|r| {
                let mut t = Table::new();
                t.insert("dataset".into(), Value::String(r.dataset.clone()));
                t.insert("index".into(), Value::Integer(r.index as i64));
                t.insert("label".into(), Value::String(r.label.clone()));
                t.insert("predicted".into(), Value::Float(r.predicted));
                t.insert("target".into(), Value::Float(r.target));
                t.insert("unit".into(), Value::String(r.unit.clone()));
                t.insert("tolerance".into(), Value::Float(r.tolerance));
                t.insert("relative_error".into(), Value::Float(r.relative_error));
                Value::Table(t)
            })
            .collect();
        root.insert("records".into(), Value::Array(records));
        toml::to_string(&root).expect("fit result serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocomotionMetric {
    SteadySpeed,
    YawRate,
    TurningRadius,
}

/// A record bound to a model computation.
#[derive(Debug, Clone, PartialEq)]
enum Resolved {
    MotorFrequency { voltage: f64 },
    FirstModeFrequency { length: f64, height: f64, width: f64 },
    Locomotion { scenario: &'static str, metric: LocomotionMetric },
    ThrustOrdering { voltage: f64, better: f64, worse: f64, margin: f64 },
    ThrustBalance { voltage: f64, fin_length: f64, role: FinRole },
    OptimalFinLength { voltage: f64, band: (f64, f64), search: (f64, f64) },
}

struct Bound<'a> {
    dataset: &'a str,
    index: usize,
    record: &'a Record,
    what: Resolved,
}

fn resolve<'a>(dataset: &'a str, index: usize, record: &'a Record, config: &ToolkitConfig) -> Result<Bound<'a>> {
    let ctx = || format!("{dataset}.records[{index}] ({})", record.quantity);
    let num = |k: &str| -> Result<f64> {
        let v = record
            .inputs
            .get(k)
            .ok_or_else(|| Error::Config(format!("{}: missing input `{k}`", ctx())))?;
        v.as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .ok_or_else(|| Error::Config(format!("{}: input `{k}` must be a number", ctx())))
    };
    let text = |k: &str| -> Result<&str> {
        record
            .inputs
            .get(k)
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config(format!("{}: missing text input `{k}`", ctx())))
    };
    let voltage = |k: &str| -> Result<f64> {
        let v = num(k)?;
        let (lo, hi) = config.motor.voltage_range;
        if !(lo..=hi).contains(&v) {
            return Err(Error::Config(format!("{}: voltage {v} V outside motor range [{lo}, {hi}] V", ctx())));
        }
        Ok(v)
    };
    let what = match record.quantity.as_str() {
        "motor_frequency" => Resolved::MotorFrequency { voltage: voltage("voltage_v")? },
        "first_mode_frequency" => Resolved::FirstModeFrequency {
            length: num("rod_length_mm")? * 1e-3,
            height: num("rod_height_mm")? * 1e-3,
            width: num("rod_width_mm")? * 1e-3,
        },
        "locomotion" => {
            let name = text("scenario")?;
            let scenario = crate::locomotion::TARGET_SCENARIOS
                .iter()
                .map(|(n, _)| *n)
                .find(|n| *n == name)
                .ok_or_else(|| Error::Config(format!("{}: unknown scenario `{name}`", ctx())))?;
            let metric = match text("metric")? {
                "steady_speed" => LocomotionMetric::SteadySpeed,
                "yaw_rate" => LocomotionMetric::YawRate,
                "turning_radius" => LocomotionMetric::TurningRadius,
                other => return Err(Error::Config(format!("{}: unknown metric `{other}`", ctx()))),
            };
            Resolved::Locomotion { scenario, metric }
        }
        "thrust_ordering" => {
            if record.target != 0.0 {
                return Err(Error::Config(format!("{}: ordering records must have target 0", ctx())));
            }
            Resolved::ThrustOrdering {
                voltage: voltage("voltage_v")?,
                better: num("better_fin_length_mm")? * 1e-3,
                worse: num("worse_fin_length_mm")? * 1e-3,
                margin: num("margin")?,
            }
        }
        "thrust_balance" => {
            let name = text("fin")?;
            let role = FinRole::ALL
                .into_iter()
                .find(|r| r.name() == name)
                .ok_or_else(|| Error::Config(format!("{}: unknown fin `{name}`", ctx())))?;
            Resolved::ThrustBalance {
                voltage: voltage("voltage_v")?,
                fin_length: num("fin_length_mm")? * 1e-3,
                role,
            }
        }
        "optimal_fin_length" => {
            let band = (num("lower_mm")?, num("upper_mm")?);
            let search = (num("search_lower_mm")? * 1e-3, num("search_upper_mm")? * 1e-3);
            if !(band.0 <= record.target && record.target <= band.1) {
                return Err(Error::Config(format!("{}: target must lie inside [lower_mm, upper_mm]", ctx())));
            }
            Resolved::OptimalFinLength {
                voltage: voltage("voltage_v")?,
                band,
                search,
            }
        }
        other => return Err(Error::Config(format!("{}: unknown quantity `{other}`", ctx()))),
    };
    if record.target == 0.0 && !matches!(what, Resolved::ThrustOrdering { .. }) {
        return Err(Error::Config(format!("{}: relative error needs a non-zero target", ctx())));
    }
    Ok(Bound {
        dataset,
        index,
        record,
        what,
    })
}

fn thrust_with_length(config: &ToolkitConfig, voltage: f64, fin_length: f64) -> Result<f64> {
    let mut fin = config.fin.clone();
    fin.fin_length = fin_length;
    predict_thrust(
        voltage,
        &config.rigid,
        &fin,
        &config.fluid,
        &config.motor,
        &config.modal,
        &config.streaming,
    )
}

fn evaluate_bound(bound: &[Bound<'_>], config: &ToolkitConfig, opts: &FitOptions) -> Result<Vec<RecordError>> {
    // Each reference run is simulated once, however many records read it.
    let mut scenarios: Vec<&'static str> = bound
        .iter()
        .filter_map(|b| match b.what {
            Resolved::Locomotion { scenario, .. } => Some(scenario),
            _ => None,
        })
        .collect();
    scenarios.sort_unstable();
    scenarios.dedup();
    let summaries = opts.exec.map(&scenarios, |name| {
        let sc = target_scenario(name, opts.locomotion_duration, opts.locomotion_dt).expect("resolved name");
        simulate(&sc, &config.body).and_then(|t| summarize(&t.states, DEFAULT_STEADY_FRACTION))
    });
    let summaries: Vec<_> = summaries.into_iter().collect::<Result<_>>()?;

    bound
        .iter()
        .map(|b| {
            let target = b.record.target;
            let (predicted, relative_error) = match b.what {
                Resolved::ThrustOrdering {
                    voltage,
                    better,
                    worse,
                    margin,
                } => {
                    let good = thrust_with_length(config, voltage, better)?;
                    let bad = thrust_with_length(config, voltage, worse)?;
                    let hinge = if good > 0.0 {
                        ((1.0 + margin) * bad - good).max(0.0) / good
                    } else {
                        NON_FINITE_ERROR
                    };
                    (hinge, hinge)
                }
                Resolved::OptimalFinLength { voltage, band, search } => {
                    // Zero anywhere inside the band, growing with distance outside it.
                    let best = crate::optimizer::optimize_fin_length(search, voltage, config, Exec::Sequential)?;
                    let mm = best.length * 1e3;
                    let outside = (band.0 - mm).max(mm - band.1).max(0.0);
                    (mm, outside / target)
                }
                ref other => {
                    let p = match *other {
                        Resolved::MotorFrequency { voltage } => config.motor.drive_frequency(voltage)?,
                        Resolved::FirstModeFrequency { length, height, width } => {
                            let mut rigid = config.rigid.clone();
                            rigid.rod_length = length;
                            rigid.rod_height = height;
                            rigid.rod_width = width;
                            build_reduced_model(&rigid, &config.fin, &config.fluid, &config.modal)?
                                .natural_frequencies()
                                .f1
                        }
                        Resolved::Locomotion { scenario, metric } => {
                            let s = &summaries[scenarios.binary_search(&scenario).expect("collected")];
                            match metric {
                                LocomotionMetric::SteadySpeed => s.steady_speed,
                                LocomotionMetric::YawRate => s.steady_yaw_rate,
                                LocomotionMetric::TurningRadius => s.turning_radius,
                            }
                        }
                        Resolved::ThrustBalance {
                            voltage,
                            fin_length,
                            role,
                        } => thrust_with_length(config, voltage, fin_length)? / config.body.fin(role).thrust_magnitude,
                        Resolved::ThrustOrdering { .. } | Resolved::OptimalFinLength { .. } => unreachable!(),
                    };
                    let e = (p - target) / target.abs();
                    (p, if e.is_finite() { e } else { NON_FINITE_ERROR })
                }
            };
            Ok(RecordError {
                dataset: b.dataset.to_string(),
                index: b.index,
                label: record_label(b.record),
                predicted,
                target,
                unit: b.record.unit.clone(),
                tolerance: b.record.tolerance,
                relative_error,
            })
        })
        .collect()
}

fn record_label(r: &Record) -> String {
    let mut parts = vec![r.quantity.clone()];
    for (k, v) in &r.inputs {
        match v {
            toml::Value::String(s) => parts.push(format!("{k}={s}")),
            other => parts.push(format!("{k}={other}")),
        }
    }
    parts.join(" ")
}

fn bind<'a>(datasets: &'a [ReferenceDataset], config: &ToolkitConfig) -> Result<Vec<Bound<'a>>> {
    let mut out = Vec::new();
    for ds in datasets {
        ds.validate()?;
        for (i, r) in ds.records.iter().enumerate() {
            out.push(resolve(&ds.name, i, r, config)?);
        }
    }
    Ok(out)
}

/// Per-record errors of `config` against `datasets`.
pub fn evaluate_records(
    datasets: &[ReferenceDataset],
    config: &ToolkitConfig,
    opts: &FitOptions,
) -> Result<Vec<RecordError>> {
    let bound = bind(datasets, config)?;
    evaluate_bound(&bound, config, opts)
}

/// Fit `params` so the model bundle matches `datasets`.
///
/// Every record is bound to a model computation before the first
/// objective evaluation, so a bad dataset fails fast.
pub fn fit_model_coefficients(
    datasets: &[ReferenceDataset],
    params: &[ParamSpec],
    base: &ToolkitConfig,
    opts: &FitOptions,
) -> Result<FitResult> {
    base.validate()?;
    for p in params {
        if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
            return Err(Error::Config(format!(
                "parameter `{}` needs finite bounds with lower < upper, got [{}, {}]",
                p.key, p.lower, p.upper
            )));
        }
        base.get(&p.key)?;
    }
    let bound = bind(datasets, base)?;

    let config_at = |z: &[f64]| -> Result<ToolkitConfig> {
        let mut cfg = base.clone();
        for (p, zi) in params.iter().zip(z) {
            cfg.set(&p.key, p.from_search(*zi))?;
        }
        Ok(cfg)
    };
    let evaluate = |z: &[f64]| -> Result<(f64, Vec<RecordError>)> {
        let cfg = config_at(z)?;
        cfg.validate()?;
        let errors = evaluate_bound(&bound, &cfg, opts)?;
        Ok((opts.aggregation.aggregate(&errors), errors))
    };

    let z0: Vec<f64> = params
        .iter()
        .map(|p| {
            let start = match p.start {
                Some(s) => s,
                None => base.get(&p.key)?,
            };
            Ok(p.to_search(start.clamp(p.lower, p.upper)))
        })
        .collect::<Result<_>>()?;

    if params.is_empty() {
        let (objective, records) = evaluate(&[])?;
        return Ok(FitResult {
            params: Vec::new(),
            objective,
            records,
            converged: true,
            iterations: 0,
            evaluations: 1,
        });
    }

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |z: &[f64]| match evaluate(z) {
        Ok((f, _)) => f,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let mut nm_opts = opts.nelder_mead.clone();
    if nm_opts.initial_step.is_none() {
        nm_opts.initial_step = Some(vec![0.3; params.len()]);
    }

    let mut x = z0;
    let (mut iterations, mut evaluations, mut converged) = (0, 0, false);
    let mut best = f64::INFINITY;
    for round in 0..=opts.restarts {
        let run = nelder_mead(objective, &x, &nm_opts).map_err(|e| failure.borrow_mut().take().unwrap_or(e))?;
        iterations += run.iterations;
        evaluations += run.evaluations;
        converged = run.converged;
        let improved = best - run.f;
        x = run.x;
        best = run.f;
        if round > 0 && improved <= nm_opts.f_tol {
            break;
        }
    }

    let (objective, records) = evaluate(&x)?;
    evaluations += 1;
    Ok(FitResult {
        params: params.iter().zip(&x).map(|(p, z)| (p.key.clone(), p.from_search(*z))).collect(),
        objective,
        records,
        converged,
        iterations,
        evaluations,
    })
}

/// One step of the default calibration pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: &'static str,
    pub datasets: Vec<&'static str>,
    pub params: Vec<ParamSpec>,
    pub aggregation: Aggregation,
}

/// Stages run in order, each starting from the previous stage's result.
///
/// Locomotion starts from a point found by a coarser exploratory search;
/// from the generic body priors the simplex stalls in a worse basin.
pub fn default_stages() -> Vec<Stage> {
    vec![
        Stage {
            name: "motor",
            datasets: vec!["voltage_frequency"],
            params: vec![],
            aggregation: Aggregation::SumSquares,
        },
        Stage {
            name: "resonance",
            datasets: vec!["resonance_target"],
            params: vec![ParamSpec::new("rigid.joint_stiffness_per_area_pa_per_m", 1e6, 1e10)],
            aggregation: Aggregation::SumSquares,
        },
        Stage {
            name: "fin",
            datasets: vec!["thrust_ordering", "design_band"],
            params: vec![
                ParamSpec::new("modal.added_mass_coefficient", 0.05, 3.0),
                ParamSpec::new("modal.fin_damping_ratio", 0.02, 0.3),
                ParamSpec::new("modal.fin_root_extension_mm", 0.0, 3.0),
            ],
            aggregation: Aggregation::SumSquares,
        },
        Stage {
            name: "locomotion",
            datasets: vec!["locomotion_targets"],
            params: vec![
                ParamSpec::new("body.fins.caudal.thrust_mn", 0.1, 50.0).starting_at(10.9),
                ParamSpec::new("body.fins.left_pectoral.thrust_mn", 0.1, 50.0).starting_at(8.8),
                ParamSpec::new("body.fins.right_pectoral.thrust_mn", 0.1, 50.0).starting_at(8.8),
                ParamSpec::new("body.drag_area_surge_m2", 3e-4, 5e-3).starting_at(4e-3),
                ParamSpec::new("body.drag_area_sway_m2", 3e-4, 5e-2).starting_at(3.9e-2),
                ParamSpec::new("body.yaw_drag_n_m_s2", 1e-8, 1e-3).starting_at(9e-7),
                ParamSpec::new("body.yaw_damping_speed_n_s2", 1e-8, 1.0).starting_at(3.2e-3),
                ParamSpec::new("body.pectoral.x_mm", -42.5, 0.0).starting_at(-1.0),
                ParamSpec::new("body.pectoral.y_mm", 8.5, 25.5).starting_at(18.6),
            ],
            aggregation: Aggregation::TolerancePower { power: 8 },
        },
        Stage {
            name: "thrust_level",
            datasets: vec!["thrust_level"],
            params: vec![ParamSpec::new("streaming.thrust_coefficient", 1e-3, 1e15)],
            aggregation: Aggregation::SumSquares,
        },
    ]
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub name: &'static str,
    pub result: FitResult,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub stages: Vec<StageReport>,
    pub config: ToolkitConfig,
}

impl Calibration {
    /// Keys fitted by any stage, in stage order.
    pub fn fitted_keys(&self) -> Vec<&str> {
        self.stages
            .iter()
            .flat_map(|s| s.result.params.iter().map(|(k, _)| k.as_str()))
            .collect()
    }

    /// Versioned parameters file holding every fitted value.
    pub fn params_file(&self) -> Result<String> {
        let table = self.config.params_table(&self.fitted_keys())?;
        let mut out = String::from("# Fitted by `vibrafin calibrate` against the bundled reference datasets.\n");
        out.push_str(&toml::to_string(&table).expect("params serialize"));
        Ok(out)
    }
}

/// Run `stages` on bundled datasets, threading the configuration through.
pub fn calibrate(base: &ToolkitConfig, stages: &[Stage], opts: &FitOptions) -> Result<Calibration> {
    let mut config = base.clone();
    let mut reports = Vec::with_capacity(stages.len());
    for stage in stages {
        let datasets = stage.datasets.iter().map(|n| bundled(n)).collect::<Result<Vec<_>>>()?;
        let stage_opts = FitOptions {
            aggregation: stage.aggregation,
            ..opts.clone()
        };
        let result = fit_model_coefficients(&datasets, &stage.params, &config, &stage_opts)?;
        result.apply(&mut config)?;
        for (k, _) in &result.params {
            config.uncalibrated.remove(k.as_str());
        }
        reports.push(StageReport {
            name: stage.name,
            result,
        });
    }
    Ok(Calibration {
        stages: reports,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_round_trip_and_bounds() {
        for spec in [ParamSpec::new("a", 1e-6, 1.0), ParamSpec::new("b", -3.0, 2.0)] {
            for p in [spec.lower, spec.upper, 0.5 * (spec.lower + spec.upper)] {
                let back = spec.from_search(spec.to_search(p));
                assert!((back - p).abs() <= 1e-12 * p.abs().max(1.0), "{p} {back}");
            }
            for z in [-10.0, -1.0, 0.3, 7.0] {
                let p = spec.from_search(z);
                assert!(p >= spec.lower && p <= spec.upper);
            }
        }
        assert!(ParamSpec::new("a", 1e-6, 1.0).is_log());
        assert!(!ParamSpec::new("a", 1.0, 50.0).is_log());
    }

    #[test]
    fn aggregation_formulas() {
        let rec = |e: f64, tol: f64| RecordError {
            dataset: "d".into(),
            index: 0,
            label: String::new(),
            predicted: 0.0,
            target: 1.0,
            unit: String::new(),
            tolerance: tol,
            relative_error: e,
        };
        let rs = [rec(0.1, 0.2), rec(-0.3, 0.15)];
        assert!((Aggregation::SumSquares.aggregate(&rs) - 0.1).abs() < 1e-15);
        let tp = Aggregation::TolerancePower { power: 4 }.aggregate(&rs);
        assert!((tp - (0.5f64.powi(4) + 2f64.powi(4))).abs() < 1e-12);
    }

    #[test]
    fn empty_param_spec_evaluates_once() {
        let ds = [bundled("voltage_frequency").unwrap()];
        let r = fit_model_coefficients(&ds, &[], &ToolkitConfig::default(), &FitOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.evaluations, 1);
        assert!(r.objective < 1e-20);
    }

    #[test]
    fn unresolvable_record_fails_before_fitting() {
        let mut ds = bundled("voltage_frequency").unwrap();
        ds.records[1].inputs.insert("voltage_v".into(), toml::Value::Float(9.0));
        let params = [ParamSpec::new("rigid.joint_stiffness_per_area_pa_per_m", 1e6, 1e10)];
        let err = fit_model_coefficients(&[ds], &params, &ToolkitConfig::default(), &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("records[1]")), "{err}");

        let mut ds = bundled("locomotion_targets").unwrap();
        ds.records[0].inputs.insert("scenario".into(), toml::Value::String("backflip".into()));
        assert!(matches!(
            evaluate_records(&[ds], &ToolkitConfig::default(), &FitOptions::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_bounds_rejected() {
        let ds = [bundled("resonance_target").unwrap()];
        let params = [ParamSpec::new("rigid.joint_stiffness_per_area_pa_per_m", 1e9, 1e6)];
        assert!(fit_model_coefficients(&ds, &params, &ToolkitConfig::default(), &FitOptions::default()).is_err());
    }

    #[test]
    fn resonance_stage_hits_target() {
        let ds = [bundled("resonance_target").unwrap()];
        let params = [ParamSpec::new("rigid.joint_stiffness_per_area_pa_per_m", 1e6, 1e10)];
        let r = fit_model_coefficients(&ds, &params, &ToolkitConfig::default(), &FitOptions::default()).unwrap();
        assert!(r.records[0].relative_error.abs() < 1e-5, "{:?}", r.records);
        assert!(r.converged);
    }
}
