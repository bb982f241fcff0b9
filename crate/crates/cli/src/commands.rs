use gully_core::analysis::probe_scenario;
use gully_core::check::Check;
use gully_core::model::Scenario;
use gully_core::reduction::convergence_study;
use gully_core::solver::{run_full, run_reduced, RunDiagnostics, GRONWALL_SLACK};
use gully_core::suite::{asymptotics_suite, geometry_suite, gronwall_suite, kernel_suite, reflection_suite};
use gully_core::Result;
use serde::Serialize;

use crate::output::RunReport;
use crate::Command;

#[derive(Debug, Serialize)]
struct SnapshotEntry {
    time: f64,
    file: String,
    picard_converged: bool,
}

#[derive(Debug, Serialize)]
struct Trajectory {
    epsilon: Option<f64>,
    threshold: f64,
    snapshots: Vec<SnapshotEntry>,
    diagnostics: RunDiagnostics,
}

fn run_checks(diagnostics: &RunDiagnostics) -> [Check; 2] {
    [
        Check::at_most("growth ratio", diagnostics.gronwall_max_ratio, 1.0 + GRONWALL_SLACK),
        Check::at_most("picard warnings", diagnostics.picard_warnings as f64, 0.0),
    ]
}

fn simulate(scenario: &Scenario, index: usize, report: &mut RunReport) -> Result<()> {
    scenario.epsilon(index)?;
    let run = run_full(scenario, index)?;
    let shift = scenario.boundary.threshold;
    let mut snapshots = Vec::with_capacity(run.snapshots.len());
    for (k, snap) in run.snapshots.iter().enumerate() {
        let grid = &snap.grid;
        let file = format!("field_{k:05}.csv");
        let rows = snap.values.iter().enumerate().map(|(n, v)| {
            let (i, j) = grid.split(n);
            vec![grid.sigmas()[i], grid.offsets()[j], v + shift]
        });
        report.write_csv(&file, "sigma,s,u", rows)?;
        snapshots.push(SnapshotEntry {
            time: snap.time,
            file,
            picard_converged: !snap.warning(),
        });
    }
    report.extend(run_checks(&run.diagnostics));
    report.write_json(
        "trajectory.json",
        &Trajectory {
            epsilon: Some(run.epsilon),
            threshold: shift,
            snapshots,
            diagnostics: run.diagnostics,
        },
    )
}

fn reduce(scenario: &Scenario, report: &mut RunReport) -> Result<()> {
    let run = run_reduced(scenario)?;
    let shift = scenario.boundary.threshold;
    let mut snapshots = Vec::with_capacity(run.snapshots.len());
    for (k, snap) in run.snapshots.iter().enumerate() {
        let file = format!("axis_{k:05}.csv");
        let rows = snap
            .grid
            .sigmas()
            .iter()
            .zip(&snap.values)
            .map(|(sigma, v)| vec![*sigma, v + shift]);
        report.write_csv(&file, "sigma,u", rows)?;
        snapshots.push(SnapshotEntry {
            time: snap.time,
            file,
            picard_converged: snap.picard.as_ref().is_none_or(|p| p.converged),
        });
    }
    report.extend(run_checks(&run.diagnostics));
    report.write_json(
        "trajectory.json",
        &Trajectory {
            epsilon: None,
            threshold: shift,
            snapshots,
            diagnostics: run.diagnostics,
        },
    )
}

fn converge(scenario: &Scenario, report: &mut RunReport) -> Result<()> {
    let study = convergence_study(scenario)?;
    for row in &study.rows {
        report.extend([
            Check::holds(format!("eps {}: run completed", row.epsilon), row.error.is_none()),
            Check::at_most(format!("eps {}: transverse gap ratio", row.epsilon), row.gap_max_ratio, 1.0),
        ]);
    }
    report.extend([Check::holds("sup error decreasing or width-independent", study.pass)]);
    report.write_json("convergence.json", &study)
}

pub fn dispatch(command: Command, scenario: &Scenario, index: usize, report: &mut RunReport) -> Result<()> {
    match command {
        Command::Simulate => simulate(scenario, index, report),
        Command::Reduce => reduce(scenario, report),
        Command::Converge => converge(scenario, report),
        Command::VerifyGeometry => {
            let suite = geometry_suite(scenario)?;
            report.extend(suite.checks.clone());
            report.write_json("geometry.json", &suite)
        }
        Command::VerifyKernel => {
            let suite = kernel_suite(scenario)?;
            report.extend(suite.checks.clone());
            report.write_json("kernel.json", &suite)
        }
        Command::VerifyReflection => {
            let suite = reflection_suite(scenario, index)?;
            report.extend(suite.checks.clone());
            report.write_json("reflection.json", &suite)
        }
        Command::VerifyGronwall => {
            let suite = gronwall_suite(scenario)?;
            report.extend(suite.checks.clone());
            report.write_json("gronwall.json", &suite)
        }
        Command::Norms => {
            let probe = probe_scenario(scenario)?;
            report.extend([Check::at_most("max/min ratio across widths", probe.max_min_ratio, probe.ratio_limit)]);
            report.write_json("norms.json", &probe)
        }
        Command::Asymptotics => {
            let suite = asymptotics_suite(scenario)?;
            report.extend(suite.checks.clone());
            report.write_json("asymptotics.json", &suite)
        }
    }
}
