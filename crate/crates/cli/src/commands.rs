use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;

use kickdmp::dmp::{imitate as learn, DmpError, LearnedPrimitive, MultiDmp, StartState, Trajectory};
use kickdmp::kick::{
    run_kick, sweep as run_sweep, write_com_csv, write_foot_csv, write_zmp_csv, GridSpec, SimLog, SweepReport,
};
use kickdmp::motor::nelder_mead::NelderMead;
use kickdmp::motor::{fit_params, read_step_responses, FitBounds, FitOptions, MotorParams};
use kickdmp::par::Execution;
use serde::Serialize;

use crate::config::{Config, Resolved};
use crate::{CliError, Common};

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> =
        s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 3 values, got {}", v.len()))
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// Loads and resolves the configuration; `Ok(None)` means the resolved
/// config was echoed and the command should stop.
fn setup(common: &Common) -> Result<Option<Resolved>, CliError> {
    let config = Config::load_or_default(common.config.as_deref())?;
    let base = common.config.as_deref().and_then(Path::parent);
    let resolved = config.resolve(base)?;
    if common.echo_config {
        println!("{}", resolved.echo());
        return Ok(None);
    }
    Ok(Some(resolved))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(input)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn fit_motor(
    common: &Common,
    path: &Path,
    out: &Path,
    skip: usize,
    init: Option<[f64; 3]>,
    max_iter: usize,
) -> Result<(), CliError> {
    let Some(cfg) = setup(common)? else { return Ok(()) };
    let file = fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let responses = read_step_responses(BufReader::new(file), skip)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let init = match init {
        Some([t, d, v]) => MotorParams::new(t, d, v).map_err(input)?,
        None => cfg.config.motor.params()?,
    };
    let opts = FitOptions {
        bounds: FitBounds::default(),
        optimizer: NelderMead { max_iter, ..Default::default() },
        execution: Execution::Sequential,
    };
    let report = fit_params(&responses, init, &opts).map_err(input)?;
    write_json(out, &report)?;
    if !report.converged {
        return Err(CliError::NotConverged(format!("best J = {:e} after {} iterations", report.j, report.iterations)));
    }
    Ok(())
}

#[derive(Serialize)]
struct ImitationReport<'a> {
    #[serde(flatten)]
    primitive: &'a LearnedPrimitive,
    /// Per-axis reconstruction RMSE.
    rmse: Vec<f64>,
    /// Largest RMSE relative to the axis range.
    relative_rmse: f64,
}

/// RMSE of each axis of `rollout` against `demo`, absolute and relative to
/// the demonstrated range (absolute for axes that do not move).
pub fn reconstruction_error(demo: &Trajectory, rollout: &Trajectory) -> (Vec<f64>, f64) {
    let mut worst = 0.0f64;
    let rmse: Vec<f64> = demo
        .channels
        .iter()
        .zip(&rollout.channels)
        .map(|(a, b)| {
            let n = a.len().min(b.len());
            let e = (a.pos[..n].iter().zip(&b.pos[..n]).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n as f64).sqrt();
            let range = a.range();
            worst = worst.max(if range > 1e-12 { e / range } else { e });
            e
        })
        .collect();
    (rmse, worst)
}

pub fn imitate(common: &Common, path: &Path, out: &Path) -> Result<(), CliError> {
    let config = Config::load_or_default(common.config.as_deref())?;
    if common.echo_config {
        let base = common.config.as_deref().and_then(Path::parent);
        println!("{}", config.resolve(base)?.echo());
        return Ok(());
    }
    let file = fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let demo =
        Trajectory::read_csv(BufReader::new(file)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let d = &config.dmp;
    let primitive = learn(
        &demo,
        d.n_bases.unwrap_or(kickdmp::kick::NOMINAL_BASES),
        d.alpha_z.unwrap_or(25.0),
        d.s_end.unwrap_or(kickdmp::dmp::DEFAULT_PHASE_END),
    )
    .map_err(input)?;
    let rollout = primitive.build().and_then(|m| m.rollout(demo.dt)).map_err(input)?;
    let (rmse, relative_rmse) = reconstruction_error(&demo, &rollout);
    write_json(out, &ImitationReport { primitive: &primitive, rmse, relative_rmse })?;
    if !(relative_rmse < d.rmse_threshold) {
        return Err(CliError::NotConverged(format!(
            "relative RMSE {relative_rmse:.3e} exceeds the threshold {}",
            d.rmse_threshold
        )));
    }
    Ok(())
}

pub struct RolloutOverrides {
    pub goal: Option<Vec<f64>>,
    pub goal_velocity: Option<Vec<f64>>,
    pub tau: Option<f64>,
    pub set_at: Option<f64>,
    pub force_a: Option<f64>,
}

fn retarget(sys: &mut MultiDmp, goal: &[f64], goal_dot: &[f64], force_a: Option<f64>) -> Result<(), DmpError> {
    for (i, dim) in sys.dims_mut().iter_mut().enumerate() {
        dim.set_goal(goal[i])?;
        if goal_dot[i] != dim.goal_dot() {
            match force_a {
                Some(a) => dim.set_goal_velocity_with_scale(goal_dot[i], a)?,
                None => dim.set_goal_velocity(goal_dot[i])?,
            }
        }
    }
    Ok(())
}

/// The configured primitive: learned weights stretched to the configured
/// duration, then moved to the configured start, goal and goal velocity.
pub fn build_primitive(cfg: &Resolved) -> Result<MultiDmp, DmpError> {
    let p = &cfg.primitive;
    let d = &cfg.config.dmp;
    let start = d.start.as_deref().unwrap_or_default();
    let dims = p
        .dims
        .iter()
        .enumerate()
        .map(|(i, dim)| {
            let s = if start[i] == dim.start.y { dim.start } else { StartState { y: start[i], ..dim.start } };
            kickdmp::dmp::DmpSystem::new(p.params(), p.forcing(i)?, s, dim.goal, dim.goal_dot)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut sys = MultiDmp::new(dims)?;
    let tau = cfg.tau();
    if tau != sys.tau() {
        sys = sys.with_tau(tau)?;
    }
    retarget(&mut sys, d.goal.as_deref().unwrap_or_default(), d.goal_velocity.as_deref().unwrap_or_default(), None)?;
    Ok(sys)
}

pub fn rollout(common: &Common, out: Option<&Path>, o: RolloutOverrides) -> Result<(), CliError> {
    let Some(cfg) = setup(common)? else { return Ok(()) };
    let dims = cfg.primitive.dims.len();
    for (name, v) in [("--goal", &o.goal), ("--goal-velocity", &o.goal_velocity)] {
        if v.as_ref().is_some_and(|v| v.len() != dims) {
            return Err(CliError::Input(format!("{name} needs {dims} values")));
        }
    }
    let d = &cfg.config.dmp;
    let dmp_err = |e: DmpError| match e {
        DmpError::DegenerateBaseline { .. } => CliError::Input(format!("{e}; pass --force-A")),
        e => CliError::Input(e.to_string()),
    };

    let mut sys = build_primitive(&cfg).map_err(dmp_err)?;
    if let Some(tau) = o.tau {
        if !(tau > 0.0) {
            return Err(CliError::Input(format!("--tau must be positive, got {tau}")));
        }
        if tau != sys.tau() {
            sys = sys.with_tau(tau).map_err(dmp_err)?;
        }
    }
    let tau = sys.tau();

    let goal = o.goal.clone().unwrap_or_else(|| sys.dims().iter().map(|x| x.goal()).collect());
    let goal_dot = o.goal_velocity.clone().unwrap_or_else(|| sys.dims().iter().map(|x| x.goal_dot()).collect());
    let traj = match o.set_at {
        None => {
            retarget(&mut sys, &goal, &goal_dot, o.force_a).map_err(dmp_err)?;
            sys.rollout(d.dt)
        }
        Some(t) => {
            if !(t >= 0.0 && t < tau) {
                return Err(CliError::Input(format!("--set-at must lie in [0, tau), got {t}")));
            }
            let at = (t / d.dt).round() as usize;
            sys.rollout_with(d.dt, |k, s| if k == at { retarget(s, &goal, &goal_dot, o.force_a) } else { Ok(()) })
        }
    }
    .map_err(dmp_err)?;

    match out {
        Some(path) => traj.write_csv(std::io::BufWriter::new(create(path)?))?,
        None => std::io::stdout().lock().write_all(traj.to_csv_string().as_bytes())?,
    }
    Ok(())
}

fn write_log(dir: &Path, log: &SimLog) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    write_foot_csv(std::io::BufWriter::new(create(&dir.join("foot.csv"))?), log)?;
    write_com_csv(std::io::BufWriter::new(create(&dir.join("com.csv"))?), log)?;
    write_zmp_csv(std::io::BufWriter::new(create(&dir.join("zmp.csv"))?), log)?;
    write_json(&dir.join("summary.json"), &log.summary)
}

pub fn kick(common: &Common, out_dir: &Path) -> Result<(), CliError> {
    let Some(cfg) = setup(common)? else { return Ok(()) };
    let scenario = cfg.scenario()?;
    let rig = cfg.rig()?;
    let log = run_kick(&scenario, &rig).map_err(input)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::Input(format!("{}: {e}", out_dir.display())))?;
    fs::write(out_dir.join("config.json"), cfg.echo() + "\n")?;
    write_log(out_dir, &log)?;
    log.check_stable().map_err(|e| CliError::Unstable(e.to_string()))
}

fn dir_name(index: usize, label: &str) -> String {
    let clean: String = label
        .chars()
        .map(|c| match c {
            '=' => '-',
            ',' => '_',
            c if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' => c,
            _ => '_',
        })
        .collect();
    format!("{index:03}_{clean}")
}

pub fn sweep(common: &Common, grid: &str, out_dir: &Path, sequential: bool) -> Result<(), CliError> {
    let Some(cfg) = setup(common)? else { return Ok(()) };
    let grid = GridSpec::parse(grid).map_err(input)?;
    let scenarios = grid.expand(&cfg.scenario()?);
    let rig = cfg.rig()?;
    let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
    let outcomes = run_sweep(&scenarios, &rig, exec).map_err(input)?;

    fs::create_dir_all(out_dir).map_err(|e| CliError::Input(format!("{}: {e}", out_dir.display())))?;
    fs::write(out_dir.join("config.json"), cfg.echo() + "\n")?;
    for (i, o) in outcomes.iter().enumerate() {
        if let Ok(log) = &o.log {
            write_log(&out_dir.join(dir_name(i, &o.label)), log)?;
        }
    }
    let report = SweepReport::from_outcomes(&outcomes);
    write_json(&out_dir.join("report.json"), &report)?;

    if let Some(e) = report.scenarios.iter().find(|e| e.error.is_some()) {
        return Err(CliError::Input(format!("{}: {}", e.label, e.error.as_deref().unwrap_or_default())));
    }
    if !report.all_stable {
        let n = report.scenarios.iter().filter(|e| e.summary.is_some_and(|s| !s.stable)).count();
        return Err(CliError::Unstable(format!("{n} scenario(s) left the support polygon")));
    }
    Ok(())
}

pub fn design_preview(common: &Common, out: Option<&Path>) -> Result<(), CliError> {
    let Some(cfg) = setup(common)? else { return Ok(()) };
    let dump = cfg.config.balance.controller()?.gain_dump();
    match out {
        Some(path) => write_json(path, &dump),
        None => {
            println!("{}", serde_json::to_string_pretty(&dump).map_err(input)?);
            Ok(())
        }
    }
}
