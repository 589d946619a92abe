//! `vibrafin` command-line front end. [`run`] returns the process exit code
//! so the binary stays a one-liner and tests can drive it in-process.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use vibrafin::calibration::{calibrate, default_stages, FitOptions};
use vibrafin::io::fmt_f64;
use vibrafin::locomotion::{
    builtin, simulate, summarize, target_scenario, write_trajectory_csv, Scenario, DEFAULT_STEADY_FRACTION,
    TARGET_DURATION,
};
use vibrafin::modal::{build_reduced_model, modal_sweep, Axis, SweepGrid};
use vibrafin::optimizer::{design_report, optimize_fin_length, optimize_rod_length, write_reports_csv};
use vibrafin::thrust::{thrust_sweep, write_thrust_csv};
use vibrafin::{Error, Exec, ToolkitConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vibrafin", version, about = "Vibration-motor fin propulsion toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Toolkit configuration file (TOML, unit-suffixed keys).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Calibrated parameters file applied on top of the configuration.
    #[arg(long, global = true, value_name = "PATH")]
    params: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Natural frequencies and first-mode axis of the configured geometry.
    Modal,
    /// Modal frequencies over a one-dimensional grid (always CSV).
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepArg,
        /// Start value; lengths accept m, mm or um suffixes (bare numbers are mm).
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long)]
        steps: usize,
    },
    /// Predicted thrust against drive voltage.
    Thrust {
        /// V
        #[arg(long)]
        from: Option<f64>,
        /// V
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Fit model coefficients to the bundled reference datasets and write a parameters file.
    Calibrate {
        /// Run only these stages (comma separated).
        #[arg(long, value_delimiter = ',')]
        stages: Vec<String>,
        /// Per-record fit report (TOML); defaults to `<out>.fit.toml`.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Rod length for resonance, or fin length for peak thrust.
    Optimize {
        #[arg(value_enum)]
        target: OptimizeTarget,
        /// Lower search bound (length, bare numbers are mm).
        #[arg(long)]
        from: Option<String>,
        /// Upper search bound.
        #[arg(long)]
        to: Option<String>,
        /// Resonance target for `rod`, Hz; defaults to the drive frequency at rated voltage.
        #[arg(long)]
        target_hz: Option<f64>,
        /// Drive voltage for `fin`, V; defaults to the rated voltage.
        #[arg(long)]
        voltage: Option<f64>,
    },
    /// Run a scenario and write its trajectory CSV; prints the steady-state summary.
    Simulate {
        /// Scenario file, or the name of a built-in or target scenario.
        #[arg(long)]
        scenario: String,
        /// Where to write the summary (TOML); stdout when omitted.
        #[arg(long, value_name = "PATH")]
        summary: Option<PathBuf>,
    },
    /// Design report for the configured geometry.
    Report,
    /// Start the WebSocket simulation server.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Built-in scenario loaded at start.
        #[arg(long, default_value = "open_water")]
        scenario: String,
        /// Append the command log to this file.
        #[arg(long, value_name = "PATH")]
        replay: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepArg {
    RodLength,
    AspectRatio,
    FinLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptimizeTarget {
    Rod,
    Fin,
}

/// Parse, run and report. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    vibrafin::par::init_threads_from_env();
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(err) if !err.is_validation() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

fn load_config(g: &Global) -> anyhow::Result<ToolkitConfig> {
    let mut config = match &g.config {
        Some(p) => ToolkitConfig::load(p)?,
        None => ToolkitConfig::default(),
    };
    if let Some(p) = &g.params {
        config.apply_params_file(p)?;
    }
    config.validate()?;
    Ok(config)
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Length with optional unit suffix, in metres. Bare numbers are mm.
pub fn parse_length(text: &str) -> anyhow::Result<f64> {
    let t = text.trim();
    let (num, scale) = if let Some(n) = t.strip_suffix("mm") {
        (n, 1e-3)
    } else if let Some(n) = t.strip_suffix("um").or_else(|| t.strip_suffix("µm")) {
        (n, 1e-6)
    } else if let Some(n) = t.strip_suffix('m') {
        (n, 1.0)
    } else {
        (t, 1e-3)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::validation("length", format!("cannot parse `{text}`")))?;
    Ok(v * scale)
}

/// `steps` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![a],
        n => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::X => "x",
        Axis::Y => "y",
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Modal => {
            let config = load_config(g)?;
            let model = build_reduced_model(&config.rigid, &config.fin, &config.fluid, &config.modal)?;
            let nf = model.natural_frequencies();
            let (a1, a2) = model.assembly_frequencies();
            let rows = [
                ("f1_hz", fmt_f64(nf.f1)),
                ("f2_hz", fmt_f64(nf.f2)),
                ("first_mode_axis", axis_name(nf.axis1).to_string()),
                ("second_mode_axis", axis_name(nf.axis2).to_string()),
                ("mode_gap_ratio", fmt_f64(nf.gap_ratio())),
                ("fin_f1_hz", fmt_f64(model.fin_frequency())),
                ("assembly_f1_hz", fmt_f64(a1)),
                ("assembly_f2_hz", fmt_f64(a2)),
            ];
            let mut out = output(g.out.as_deref())?;
            match g.format {
                Format::Text => {
                    for (k, v) in rows {
                        if k.ends_with("axis") {
                            writeln!(out, "{k} = \"{v}\"")?;
                        } else {
                            writeln!(out, "{k} = {v}")?;
                        }
                    }
                }
                Format::Csv => {
                    writeln!(out, "{}", rows.iter().map(|r| r.0).collect::<Vec<_>>().join(","))?;
                    writeln!(out, "{}", rows.iter().map(|r| r.1.as_str()).collect::<Vec<_>>().join(","))?;
                }
            }
            out.flush()?;
        }
        Command::Sweep { axis, from, to, steps } => {
            let config = load_config(g)?;
            if *steps == 0 {
                return Err(Error::validation("steps", "must be at least 1").into());
            }
            let parse = |s: &str| -> anyhow::Result<f64> {
                match axis {
                    SweepArg::AspectRatio => s
                        .trim()
                        .parse()
                        .map_err(|_| Error::validation("aspect_ratio", format!("cannot parse `{s}`")).into()),
                    _ => parse_length(s),
                }
            };
            let values = linspace(parse(from)?, parse(to)?, *steps);
            let mut grid = SweepGrid::default();
            match axis {
                SweepArg::RodLength => grid.rod_length = Some(values),
                SweepArg::AspectRatio => grid.aspect_ratio = Some(values),
                SweepArg::FinLength => grid.fin_length = Some(values),
            }
            let table = modal_sweep(&grid, &config.rigid, &config.fin, &config.fluid, &config.modal)?;
            table.write_csv(output(g.out.as_deref())?)?;
        }
        Command::Thrust { from, to, steps } => {
            let config = load_config(g)?;
            let (lo, hi) = config.motor.voltage_range;
            let voltages = linspace(from.unwrap_or(lo), to.unwrap_or(hi), *steps);
            let rows = thrust_sweep(&config.assembly(), &voltages)?;
            let mut out = output(g.out.as_deref())?;
            match g.format {
                Format::Csv => write_thrust_csv(&rows, out)?,
                Format::Text => {
                    writeln!(out, "{:>8} {:>10} {:>12} {:>12} {:>12}", "V", "f (Hz)", "A_x3 (um)", "U (mm/s)", "F (mN)")?;
                    for (v, p) in voltages.iter().zip(&rows) {
                        writeln!(
                            out,
                            "{:>8.3} {:>10.3} {:>12.4} {:>12.4} {:>12.5}",
                            v,
                            p.frequency,
                            p.amplitudes.a_x3 * 1e6,
                            p.streaming_velocity * 1e3,
                            p.thrust * 1e3
                        )?;
                    }
                    out.flush()?;
                }
            }
        }
        Command::Calibrate { stages, report } => {
            let base = load_config(g)?;
            let mut selected = default_stages();
            if !stages.is_empty() {
                for s in stages {
                    if !selected.iter().any(|st| st.name == s) {
                        let names: Vec<_> = selected.iter().map(|s| s.name).collect();
                        return Err(Error::validation("stages", format!("unknown stage `{s}`; known: {}", names.join(", "))).into());
                    }
                }
                selected.retain(|st| stages.iter().any(|s| s == st.name));
            }
            let cal = calibrate(&base, &selected, &FitOptions::default())?;
            let out_path = g.out.clone().unwrap_or_else(|| PathBuf::from("calibrated.params"));
            let report_path = report.clone().unwrap_or_else(|| {
                let mut p = out_path.clone().into_os_string();
                p.push(".fit.toml");
                PathBuf::from(p)
            });
            vibrafin::io::write_string(&out_path, &cal.params_file()?)?;
            let mut fit_report = toml::Table::new();
            for s in &cal.stages {
                let table: toml::Table = s.result.to_toml_string().parse().context("re-reading fit report")?;
                fit_report.insert(s.name.to_string(), toml::Value::Table(table));
                println!(
                    "{:<13} objective {:.4e}  max |rel err| {:.4}  iterations {:>5}  converged {}",
                    s.name,
                    s.result.objective,
                    s.result.max_abs_error(),
                    s.result.iterations,
                    s.result.converged
                );
            }
            let fit_report = toml::to_string(&fit_report).context("writing fit report")?;
            vibrafin::io::write_string(&report_path, &fit_report)?;
            println!("wrote {} and {}", out_path.display(), report_path.display());
        }
        Command::Optimize { target, from, to, target_hz, voltage } => {
            let config = load_config(g)?;
            let bound = |s: &Option<String>, default: f64| s.as_deref().map(parse_length).unwrap_or(Ok(default));
            let mut out = output(g.out.as_deref())?;
            match target {
                OptimizeTarget::Rod => {
                    let bounds = (bound(from, 6e-3)?, bound(to, 14e-3)?);
                    let target = match target_hz {
                        Some(f) => *f,
                        None => config.motor.drive_frequency(config.motor.rated_voltage)?,
                    };
                    let r = optimize_rod_length(bounds, &config, target)?;
                    let method = format!("{:?}", r.method).to_lowercase();
                    match g.format {
                        Format::Text => {
                            writeln!(out, "rod_length_m = {}", fmt_f64(r.length))?;
                            writeln!(out, "f1_hz = {}", fmt_f64(r.f1))?;
                            writeln!(out, "target_hz = {}", fmt_f64(target))?;
                            writeln!(out, "mismatch = {}", fmt_f64(r.mismatch))?;
                            writeln!(out, "method = \"{method}\"")?;
                            writeln!(out, "at_boundary = {}", r.at_boundary)?;
                        }
                        Format::Csv => {
                            writeln!(out, "rod_length_m,f1_hz,target_hz,mismatch,method,at_boundary")?;
                            writeln!(
                                out,
                                "{},{},{},{},{method},{}",
                                fmt_f64(r.length),
                                fmt_f64(r.f1),
                                fmt_f64(target),
                                fmt_f64(r.mismatch),
                                r.at_boundary
                            )?;
                        }
                    }
                }
                OptimizeTarget::Fin => {
                    let bounds = (bound(from, 6e-3)?, bound(to, 18e-3)?);
                    let v = voltage.unwrap_or(config.motor.rated_voltage);
                    let r = optimize_fin_length(bounds, v, &config, Exec::default())?;
                    match g.format {
                        Format::Text => {
                            writeln!(out, "fin_length_m = {}", fmt_f64(r.length))?;
                            writeln!(out, "thrust_n = {}", fmt_f64(r.thrust))?;
                            writeln!(out, "voltage_v = {}", fmt_f64(v))?;
                        }
                        Format::Csv => {
                            // The scan itself, ready to plot.
                            writeln!(out, "fin_length_m,thrust_n")?;
                            for (l, f) in &r.grid {
                                writeln!(out, "{},{}", fmt_f64(*l), fmt_f64(*f))?;
                            }
                        }
                    }
                }
            }
            out.flush()?;
        }
        Command::Simulate { scenario, summary } => {
            let config = load_config(g)?;
            let sc = load_scenario(scenario)?;
            let traj = simulate(&sc, &config.body)?;
            match &g.out {
                Some(p) => write_trajectory_csv(&traj.states, BufWriter::new(File::create(p)?))?,
                None if summary.is_some() => write_trajectory_csv(&traj.states, io::stdout().lock())?,
                None => {}
            }
            let mut text = format!("scenario = \"{}\"\ncollisions = {}\n", sc.name, traj.events.len());
            match summarize(&traj.states, DEFAULT_STEADY_FRACTION) {
                Ok(s) => text.push_str(&s.to_toml_string(config.body.body_length)),
                Err(e) if e.is_validation() => text.push_str(&format!("# no steady-state summary: {e}\n")),
                Err(e) => return Err(e.into()),
            }
            match summary {
                Some(p) => vibrafin::io::write_string(p, &text)?,
                None if g.out.is_some() => print!("{text}"),
                // No trajectory file requested: the summary is the output.
                None => print!("{text}"),
            }
        }
        Command::Report => {
            let config = load_config(g)?;
            let r = design_report(&config)?;
            match g.format {
                Format::Text => {
                    let mut out = output(g.out.as_deref())?;
                    out.write_all(r.to_text().as_bytes())?;
                    out.flush()?;
                }
                Format::Csv => write_reports_csv(&[r], output(g.out.as_deref())?)?,
            }
        }
        Command::Serve { port, host, scenario, replay } => {
            let config = load_config(g)?;
            let server_config = vibrafin_server::ServerConfig {
                body: config.body.clone(),
                scenario: scenario.clone(),
                replay_path: replay.clone(),
            };
            let handle = vibrafin_server::serve((host.as_str(), *port), server_config)
                .with_context(|| format!("starting server on {host}:{port}"))
                .map_err(|e| anyhow::Error::new(Error::Config(format!("{e:#}"))))?;
            eprintln!("listening on ws://{}", handle.local_addr());
            handle.wait();
        }
    }
    Ok(())
}

/// Scenario from a file path, or from a built-in or target scenario name.
fn load_scenario(arg: &str) -> anyhow::Result<Scenario> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(Scenario::load(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    if let Some(s) = target_scenario(stem, TARGET_DURATION, 1e-3) {
        return Ok(s);
    }
    if let Some(mut s) = builtin(stem) {
        s.duration = TARGET_DURATION;
        return Ok(s);
    }
    Err(Error::validation("scenario", format!("`{arg}` is neither a file nor a known scenario name")).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_with_units() {
        assert!((parse_length("6mm").unwrap() - 6e-3).abs() < 1e-15);
        assert!((parse_length("6").unwrap() - 6e-3).abs() < 1e-15);
        assert!((parse_length("0.01m").unwrap() - 0.01).abs() < 1e-15);
        assert!((parse_length("300um").unwrap() - 3e-4).abs() < 1e-15);
        assert!(parse_length("six").is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(6e-3, 14e-3, 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 6e-3);
        assert_eq!(v[4], 14e-3);
        assert!((v[2] - 10e-3).abs() < 1e-15);
    }

    #[test]
    fn numerical_failures_exit_two() {
        let e = anyhow::Error::new(Error::Singular { axis: "x" });
        assert_eq!(exit_code(&e), EXIT_NUMERICAL);
        let e = anyhow::Error::new(Error::validation("rod_width", "must be > 0"));
        assert_eq!(exit_code(&e), EXIT_INVALID);
        let e = anyhow::Error::new(Error::NonFinite { component: "u", t: 1.0 }).context("simulating");
        assert_eq!(exit_code(&e), EXIT_NUMERICAL);
    }
}
