use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lookahead_core::envelope::{analyze_envelope, polar_map, ratio_range, ratio_sweep, SweepBase};
use lookahead_core::export;
use lookahead_core::scenario::{self, EnvelopeConfig, Scenario};
use lookahead_core::{run_simulation, stability_diagnostics, GuidanceError, LookaheadProfile, PerformanceReport};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lookahead",
    version,
    about = "Look-ahead guidance simulation and envelope analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Configuration file (sectioned key = value text)
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    file: Option<PathBuf>,
    /// Use a shipped configuration instead of a file
    #[arg(long, value_parser = scenario::PRESET_NAMES)]
    preset: Option<String>,
    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Fly a scenario and write trajectories and performance metrics
    Simulate(Source),
    /// Classify a (d, eta) grid for the constant and variable laws
    Envelope(Source),
    /// Envelope gains over a range of L_max / L_min ratios
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Ratio range as start:end:step
        #[arg(long, default_value = "1:5:0.25")]
        ratios: String,
    },
}

/// Input problems map to exit code 2, everything else to 3.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let input = error.chain().any(|e| {
            e.downcast_ref::<GuidanceError>()
                .is_some_and(GuidanceError::is_input_error)
        });
        let code = if input { EXIT_INPUT } else { EXIT_NUMERIC };
        Failure { code, error }
    }
}

impl From<GuidanceError> for Failure {
    fn from(error: GuidanceError) -> Self {
        anyhow::Error::new(error).into()
    }
}

fn input_error(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error,
    }
}

fn read_source(src: &Source) -> Result<(String, String), Failure> {
    match (&src.preset, &src.file) {
        (Some(name), _) => {
            let text = scenario::preset_text(name).expect("preset names are validated by clap");
            Ok((text.to_string(), format!("preset {name}")))
        }
        (None, Some(path)) => fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map(|t| (t, path.display().to_string()))
            .map_err(input_error),
        (None, None) => unreachable!("clap requires a file or a preset"),
    }
}

fn load_scenario(src: &Source) -> Result<Scenario, Failure> {
    let (text, origin) = read_source(src)?;
    scenario::parse_scenario(&text)
        .with_context(|| format!("parsing scenario from {origin}"))
        .map_err(input_error)
}

fn load_envelope(src: &Source) -> Result<EnvelopeConfig, Failure> {
    let (text, origin) = read_source(src)?;
    scenario::parse_envelope_config(&text)
        .with_context(|| format!("parsing envelope configuration from {origin}"))
        .map_err(input_error)
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn prepare(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn profile_labels(profiles: &[LookaheadProfile]) -> Vec<String> {
    let kind = |p: &LookaheadProfile| match p {
        LookaheadProfile::Constant { .. } => "constant",
        LookaheadProfile::Variable { .. } => "variable",
    };
    let distinct = profiles.len() < 2 || kind(&profiles[0]) != kind(&profiles[1]);
    profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if distinct {
                kind(p).to_string()
            } else {
                format!("{}{}", kind(p), i + 1)
            }
        })
        .collect()
}

fn simulate(src: &Source) -> Result<(), Failure> {
    let sc = load_scenario(src)?;
    prepare(&src.out)?;
    let profiles = sc.profiles();
    let labels = profile_labels(&profiles);
    let mut summary = String::from("profile,t_s,J,Mp,T_far_measured,T_far_bound,settle_eps\n");
    let mut efforts = Vec::new();
    for (label, profile) in labels.iter().zip(&profiles) {
        let traj = run_simulation(&sc.path, profile, &sc.limits, &sc.init, &sc.sim)
            .with_context(|| format!("simulating the {label} profile"))?;
        let eps = sc.sim.settle_band(traj.first().d);
        let perf = PerformanceReport::evaluate(&traj, eps);
        let stab = stability_diagnostics(&traj);
        write(
            &src.out,
            &format!("trajectory_{label}.csv"),
            &export::trajectory_csv(&traj),
        )?;
        write(
            &src.out,
            &format!("performance_{label}.csv"),
            &export::performance_csv(&perf),
        )?;
        write(
            &src.out,
            &format!("performance_{label}.txt"),
            &export::performance_kv(&perf),
        )?;
        let diag = format!(
            "initially_infeasible={}\nclamped_steps={}\ns1_exits={}\nlongest_reentry_steps={}\nmax_lyapunov_increase={}\nlyapunov_initial={}\nmin_saturated_eta_rate={}\neta_rate_floor={}\ndecomposition_residual={}\nterminal_d={}\nterminal_eta={}\n",
            traj.diagnostics.initially_infeasible,
            traj.diagnostics.clamped_steps,
            stab.s1_exits,
            stab.longest_reentry,
            export::g9(stab.max_lyapunov_increase),
            export::g9(stab.lyapunov_initial),
            stab.min_saturated_eta_rate.map(export::g9).unwrap_or_default(),
            export::g9(stab.eta_rate_floor),
            export::g9(stab.decomposition_residual),
            export::g9(stab.terminal_d),
            export::g9(stab.terminal_eta),
        );
        write(&src.out, &format!("diagnostics_{label}.txt"), &diag)?;
        summary.push_str(&format!(
            "{label},{},{}\n",
            export::performance_row(&perf),
            export::g9(eps)
        ));
        if traj.diagnostics.initially_infeasible {
            eprintln!("warning: {label}: initial state is outside the feasibility set");
        }
        if !perf.settled() {
            eprintln!("warning: {label}: never entered the {} m band", export::g9(eps));
        }
        efforts.push((label.clone(), perf));
    }
    write(&src.out, "summary.csv", &summary)?;
    for (label, perf) in &efforts {
        println!(
            "{label}: t_s={} J={} Mp={}",
            perf.settling_time.map(export::g9).unwrap_or_else(|| "-".into()),
            export::g9(perf.control_effort),
            export::g9(perf.peak_overshoot)
        );
    }
    Ok(())
}

fn envelope(src: &Source) -> Result<(), Failure> {
    let cfg = load_envelope(src)?;
    prepare(&src.out)?;
    let report = analyze_envelope(&cfg.grid, &cfg.limits, &cfg.constant, &cfg.variable)?;
    write(&src.out, "regions.csv", &export::region_csv(&report))?;
    write(&src.out, "boundary.csv", &export::boundary_csv(&report))?;
    write(&src.out, "summary.csv", &export::summary_csv(&report))?;
    if cfg.grid.d_min >= 0.0 {
        let constant = polar_map(&cfg.grid, &cfg.limits, &cfg.constant)?;
        let variable = polar_map(&cfg.grid, &cfg.limits, &cfg.variable)?;
        write(&src.out, "polar.csv", &export::polar_csv(&constant, &variable))?;
    } else {
        eprintln!("warning: skipping the polar map, the grid has negative cross-track errors");
    }
    println!(
        "A_const={}% A_var={}% G_abs={} pp G_rel={}%",
        export::g9(100.0 * report.a_const),
        export::g9(100.0 * report.a_var),
        export::g9(report.gain.absolute),
        export::g9(report.gain.relative)
    );
    Ok(())
}

fn parse_ratios(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, step] = parts[..] else {
        bail!("--ratios expects start:end:step, got `{spec}`");
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("bad number `{s}` in --ratios"))
    };
    Ok(ratio_range(num(start)?, num(end)?, num(step)?)?)
}

fn sweep(src: &Source, ratios: &str) -> Result<(), Failure> {
    let cfg = load_envelope(src)?;
    let ratios = parse_ratios(ratios).map_err(input_error)?;
    prepare(&src.out)?;
    let base = SweepBase {
        grid: cfg.grid,
        limits: cfg.limits,
        l_min: cfg.variable.l_min(),
        d_c: match cfg.variable {
            LookaheadProfile::Variable { d_c, .. } => d_c,
            LookaheadProfile::Constant { .. } => {
                return Err(input_error(anyhow::anyhow!(
                    "[profile2] must be a variable profile for a sweep"
                )))
            }
        },
    };
    let rows = ratio_sweep(&ratios, &base)?;
    write(&src.out, "sweep.csv", &export::sweep_csv(&rows))?;
    for r in &rows {
        println!(
            "ratio {}: G_abs={} pp G_rel={}%",
            export::g9(r.ratio),
            export::g9(r.gain.absolute),
            export::g9(r.gain.relative)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(src) => simulate(src),
        Command::Envelope(src) => envelope(src),
        Command::Sweep { source, ratios } => sweep(source, ratios),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
