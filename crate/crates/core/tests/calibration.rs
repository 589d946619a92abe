//! Synthetic recovery: generate targets from known parameters, start the
//! fit elsewhere, and require the known values back.

use vibrafin::calibration::{
    bundled, evaluate_records, fit_model_coefficients, FitOptions, ParamSpec, Record, ReferenceDataset,
};
use vibrafin::locomotion::{simulate, FinRole, summarize, target_scenario, DEFAULT_STEADY_FRACTION};
use vibrafin::modal::build_reduced_model;
use vibrafin::ToolkitConfig;

fn record(quantity: &str, inputs: &str, target: f64, unit: &str) -> Record {
    Record {
        quantity: quantity.into(),
        inputs: inputs.parse().unwrap(),
        target,
        unit: unit.into(),
        tolerance: 0.01,
        source: "synthetic".into(),
    }
}

fn dataset(records: Vec<Record>) -> ReferenceDataset {
    let d = ReferenceDataset {
        name: "synthetic".into(),
        citation: "generated from known parameters".into(),
        records,
    };
    d.validate().unwrap();
    d
}

#[test]
fn recovers_joint_stiffness_from_first_mode_frequencies() {
    let truth = 3.3e8;
    let mut config = ToolkitConfig::default();
    config.rigid.joint_stiffness_per_area = truth;
    let records = [6.0, 8.0, 10.0, 12.0, 14.0]
        .iter()
        .map(|l| {
            let mut r = config.rigid.clone();
            r.rod_length = l * 1e-3;
            let f1 = build_reduced_model(&r, &config.fin, &config.fluid, &config.modal)
                .unwrap()
                .natural_frequencies()
                .f1;
            record(
                "first_mode_frequency",
                &format!("rod_length_mm = {l}\nrod_height_mm = 7.5\nrod_width_mm = 3.0"),
                f1,
                "Hz",
            )
        })
        .collect();
    let start = ToolkitConfig::default();
    let spec = ParamSpec::new("rigid.joint_stiffness_per_area_pa_per_m", 1e6, 1e10).starting_at(2e7);
    let fit = fit_model_coefficients(&[dataset(records)], &[spec], &start, &FitOptions::default()).unwrap();
    let got = fit.params[0].1;
    assert!(((got - truth) / truth).abs() < 0.01, "{got} vs {truth}");
    assert!(fit.max_abs_error() < 1e-6);
}

#[test]
fn recovers_surge_drag_from_steady_speed() {
    let truth = 3.1e-3;
    let mut config = ToolkitConfig::calibrated();
    config.body.drag_area_surge = truth;
    let opts = FitOptions {
        locomotion_duration: 12.0,
        ..FitOptions::default()
    };
    let sc = target_scenario("caudal_only", opts.locomotion_duration, opts.locomotion_dt).unwrap();
    let speed = summarize(&simulate(&sc, &config.body).unwrap().states, DEFAULT_STEADY_FRACTION)
        .unwrap()
        .steady_speed;
    let records = vec![record(
        "locomotion",
        "scenario = \"caudal_only\"\nmetric = \"steady_speed\"",
        speed,
        "m/s",
    )];
    let spec = ParamSpec::new("body.drag_area_surge_m2", 3e-4, 5e-3).starting_at(1e-3);
    let fit = fit_model_coefficients(&[dataset(records)], &[spec], &ToolkitConfig::calibrated(), &opts).unwrap();
    let got = fit.params[0].1;
    assert!(((got - truth) / truth).abs() < 0.01, "{got} vs {truth}");
}

#[test]
fn thrust_level_matches_caudal_fin_after_fit() {
    let mut config = ToolkitConfig::calibrated();
    config.streaming.thrust = 1.0;
    let ds = bundled("thrust_level").unwrap();
    let spec = ParamSpec::new("streaming.thrust_coefficient", 1e-3, 1e15);
    let fit = fit_model_coefficients(std::slice::from_ref(&ds), &[spec], &config, &FitOptions::default()).unwrap();
    fit.apply(&mut config).unwrap();
    let r = &ds.records[0];
    let lf = r.inputs["fin_length_mm"].as_float().unwrap() * 1e-3;
    let v = r.inputs["voltage_v"].as_float().unwrap();
    config.fin.fin_length = lf;
    let thrust = config.assembly().predict_thrust(v).unwrap();
    let caudal = config.body.fin(FinRole::Caudal).thrust_magnitude;
    assert!(((thrust - caudal) / caudal).abs() < 0.01, "{thrust} vs {caudal}");
}

#[test]
fn shipped_parameters_meet_bundled_tolerances() {
    let config = ToolkitConfig::calibrated();
    let names = ["voltage_frequency", "resonance_target", "thrust_ordering", "design_band", "thrust_level"];
    let datasets: Vec<_> = names.iter().map(|n| bundled(n).unwrap()).collect();
    let errs = evaluate_records(&datasets, &config, &FitOptions::default()).unwrap();
    for e in &errs {
        assert!(e.within_tolerance(), "{} {}: {} vs {}", e.dataset, e.label, e.predicted, e.target);
    }
}
