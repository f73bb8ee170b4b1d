//! `simulate`: integrate a configured body and write the trajectory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use log::info;
use serde::Serialize;

use quatham::dynamics::{integrate, Drifts, Sample};
use quatham::{Error, Trajectory};

use crate::config::{Run, RunConfig};
use crate::CliError;

pub const CSV_HEADER: &str = "t,x1,x2,x3,p1,p2,p3,q0,q1,q2,q3,M1,M2,M3,H,qnorm,pi1,pi2,pi3";

#[derive(Debug, Serialize)]
pub struct FinalState {
    pub t: f64,
    pub x: [f64; 3],
    pub p: [f64; 3],
    pub q: [f64; 4],
    #[serde(rename = "M")]
    pub m: [f64; 3],
}

#[derive(Debug, Serialize)]
pub struct MaxDrifts {
    /// Relative to `|H0|`.
    pub energy: f64,
    /// `| |q| - 1 |`.
    pub qnorm: f64,
    /// Relative to `|M0|`.
    pub mom_norm: f64,
    /// Largest component deviation, relative to `|π0|`.
    pub pi_spatial: f64,
    /// Absolute deviation of each spatial momentum component.
    pub pi_components: [f64; 3],
}

impl From<Drifts> for MaxDrifts {
    fn from(d: Drifts) -> Self {
        MaxDrifts {
            energy: d.energy,
            qnorm: d.quat_norm,
            mom_norm: d.mom_norm,
            pi_spatial: d.pi_spatial,
            pi_components: d.pi_components,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub potential: String,
    pub steps: usize,
    pub samples: usize,
    pub wall_time_s: f64,
    pub final_state: FinalState,
    pub max_drift: MaxDrifts,
}

fn write_row<W: Write>(w: &mut W, s: &Sample) -> std::io::Result<()> {
    let st = &s.state;
    let m = &s.monitor;
    let values = [
        s.t, st.x[0], st.x[1], st.x[2], st.p[0], st.p[1], st.p[2], st.q.q0, st.q.qv[0],
        st.q.qv[1], st.q.qv[2], st.mom[0], st.mom[1], st.mom[2], m.energy, m.quat_norm,
        m.pi_spatial[0], m.pi_spatial[1], m.pi_spatial[2],
    ];
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v:.16e}")?;
    }
    w.write_all(b"\n")
}

pub fn write_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{CSV_HEADER}").map_err(io)?;
    for s in &traj.samples {
        write_row(&mut w, s).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn summarize(run: &Run, traj: &Trajectory, wall_time_s: f64) -> RunSummary {
    let last = traj.last().expect("trajectory holds the initial sample");
    let st = &last.state;
    RunSummary {
        potential: run.params.potential.name().to_string(),
        steps: last.step,
        samples: traj.len(),
        wall_time_s,
        final_state: FinalState {
            t: last.t,
            x: st.x.0,
            p: st.p.0,
            q: st.q.to_array(),
            m: st.mom.0,
        },
        max_drift: traj.drifts().into(),
    }
}

pub fn run_config(run: &Run) -> Result<(Trajectory, RunSummary), CliError> {
    let start = Instant::now();
    let traj = integrate(&run.state0, &run.params, &run.integrator).map_err(|e| match e {
        Error::NonFinite { step } => CliError::Numerical(step),
        other => CliError::Geometry(other.to_string()),
    })?;
    let wall = start.elapsed().as_secs_f64();
    let summary = summarize(run, &traj, wall);
    Ok((traj, summary))
}

pub fn cmd_simulate(config_path: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let run = config.resolve(base)?;
    info!(
        "integrating {} steps at h = {} with {:?}",
        run.integrator.n_steps, run.integrator.h, run.integrator.renorm
    );
    let (traj, summary) = run_config(&run)?;
    write_csv(&run.csv, &traj)?;
    info!("wrote {} samples to {}", traj.len(), run.csv.display());
    if let Some(path) = &run.summary {
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        info!("wrote summary to {}", path.display());
    }
    let d = &summary.max_drift;
    println!(
        "steps {}  max drift: H {:.3e}  |q| {:.3e}  |M| {:.3e}  pi {:.3e}",
        summary.steps, d.energy, d.qnorm, d.mom_norm, d.pi_spatial
    );
    Ok(())
}
