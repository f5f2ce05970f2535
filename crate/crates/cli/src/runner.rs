//! Executes one configuration: integrate, diagnose, write files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use hamgap_core::diagnostics::{energy_balance_with, BalanceTolerances};
use hamgap_core::dynamics::{integrate, pure_dissipative_check};
use hamgap_core::likelihood::Builtin;
use hamgap_core::phase_space::Oscillator;
use hamgap_core::{ExtReal, Hamiltonian};

use crate::config::{apply_override, ConfigError, RunConfig};
use crate::output::{fmt_f64, write_balance, write_trajectory};
use crate::scenarios::{self, ScenarioName};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Off,
}

impl Verdict {
    fn of(enabled: bool, ok: bool) -> Self {
        match (enabled, ok) {
            (false, _) => Verdict::Off,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Off => "off",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub passed: bool,
    /// Canonical configuration followed by `#`-prefixed results.
    pub summary: String,
    pub trajectory_csv: PathBuf,
    pub balance_csv: PathBuf,
    pub summary_file: PathBuf,
}

fn in_stick_band(h: &Oscillator, mu: f64, q: &[f64], p: &[f64]) -> bool {
    let force = h.force_gradient(q);
    p.iter().all(|x| *x == 0.0) && force.iter().all(|f| f.abs() <= mu + 1e-12)
}

/// Runs a configuration and writes `<stem>_trajectory.csv`,
/// `<stem>_balance.csv` and `<stem>_summary.txt` into the output directory.
/// Solver failures and I/O failures are errors; failed checks are not.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let scenario = scenarios::build(config)?;
    let h = scenarios::hamiltonian(config);
    let traj = integrate(&scenario)?;
    let m = &scenario.model;

    let tolerances = BalanceTolerances {
        balance: config.solver.balance_tol,
        inequality: config.solver.inequality_tol,
        ..BalanceTolerances::default()
    };
    let balance = energy_balance_with(m, &h, &traj, tolerances)?;
    let max_residual = traj
        .steps()
        .iter()
        .map(|s| s.residual)
        .fold(ExtReal::ZERO, ExtReal::max);
    let pure = pure_dissipative_check(&h, &traj, config.solver.residual_tol)?;

    let out = &config.output;
    let balance_verdict = Verdict::of(
        out.check_balance,
        balance.balance_ok && balance.nonnegative_ok && balance.monotone_ok,
    );
    let inequality_verdict = Verdict::of(out.check_inequality, balance.inequality_ok);
    let residual_verdict = Verdict::of(
        out.check_residual,
        max_residual <= ExtReal::Finite(config.solver.residual_tol),
    );
    let pure_verdict = Verdict::of(out.check_pure_dissipative, pure.passed);
    let passed = [
        &balance_verdict,
        &inequality_verdict,
        &residual_verdict,
        &pure_verdict,
    ]
    .iter()
    .all(|v| **v != Verdict::Fail);

    let z = traj.final_state();
    let mut lines = vec![
        format!("model = {}", m.name()),
        format!("steps = {}", traj.steps().len()),
        format!("final_time = {}", fmt_f64(traj.final_time())),
        format!("final_q = {:?}", z.q()),
        format!("final_p = {:?}", z.p()),
        format!(
            "initial_energy = {}",
            fmt_f64(h.value(traj.initial_state(), config.time.t0))
        ),
        format!("final_energy = {}", fmt_f64(h.value(z, traj.final_time()))),
        format!(
            "total_dissipation = {}",
            fmt_f64(balance.total_dissipation())
        ),
        format!("total_info_gap = {}", fmt_f64(balance.total_info_gap())),
        format!(
            "max_balance_residual = {}",
            fmt_f64(balance.max_balance_residual)
        ),
        format!("worst_inequality = {}", fmt_f64(balance.worst_inequality)),
        format!(
            "min_dissipation_term = {}",
            fmt_f64(balance.min_dissipation_term)
        ),
        format!("max_step_residual = {}", fmt_f64(max_residual.to_f64())),
        format!("worst_pure_dissipative = {}", fmt_f64(pure.worst)),
    ];
    if matches!(m.builtin(), Some(Builtin::Friction { .. })) {
        let inside = in_stick_band(&h, config.scenario.mu, z.q(), z.p());
        lines.push(format!(
            "final_state = {}",
            if inside {
                "inside stick band"
            } else {
                "outside stick band"
            }
        ));
    }
    if config.scenario.name == ScenarioName::PureDissipativeCheck {
        let reversed = traj.reversed(m, &h)?;
        let back = pure_dissipative_check(&h, &reversed, config.solver.residual_tol)?;
        lines.push(format!(
            "reversed_worst_pure_dissipative = {}",
            fmt_f64(back.worst)
        ));
        lines.push(format!(
            "reversed_run = {}",
            if back.passed {
                "passes"
            } else {
                "fails (expected for dissipative models)"
            }
        ));
    }
    lines.push(format!("check_balance = {}", balance_verdict.label()));
    lines.push(format!("check_inequality = {}", inequality_verdict.label()));
    lines.push(format!("check_residual = {}", residual_verdict.label()));
    lines.push(format!("check_pure_dissipative = {}", pure_verdict.label()));
    lines.push(format!(
        "verdict = {}",
        if passed { "PASS" } else { "FAIL" }
    ));

    let mut summary = config.to_canonical();
    summary.push('\n');
    for line in lines {
        summary.push_str("# ");
        summary.push_str(&line);
        summary.push('\n');
    }

    fs::create_dir_all(&out.dir).with_context(|| format!("creating {}", out.dir.display()))?;
    let stem = config.stem();
    let trajectory_csv = out.dir.join(format!("{stem}_trajectory.csv"));
    let balance_csv = out.dir.join(format!("{stem}_balance.csv"));
    let summary_file = out.dir.join(format!("{stem}_summary.txt"));
    let create = |path: &PathBuf| {
        File::create(path)
            .map(BufWriter::new)
            .with_context(|| format!("creating {}", path.display()))
    };
    write_trajectory(create(&trajectory_csv)?, &h, &traj)
        .with_context(|| format!("writing {}", trajectory_csv.display()))?;
    write_balance(create(&balance_csv)?, &balance)
        .with_context(|| format!("writing {}", balance_csv.display()))?;
    fs::write(&summary_file, &summary)
        .with_context(|| format!("writing {}", summary_file.display()))?;

    Ok(RunOutcome {
        passed,
        summary,
        trajectory_csv,
        balance_csv,
        summary_file,
    })
}

/// One configuration per value of `key`, each writing under its own stem.
pub fn sweep_configs(
    base: &toml::Table,
    key: &str,
    values: &[String],
) -> std::result::Result<Vec<RunConfig>, ConfigError> {
    let base_config: RunConfig =
        base.clone()
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Semantic {
                key: "config".into(),
                message: e.message().trim().to_string(),
            })?;
    let field = key.rsplit('.').next().unwrap_or(key);
    values
        .iter()
        .enumerate()
        .map(|(i, value)| {
            let mut table = base.clone();
            apply_override(&mut table, &format!("{key}={value}"))?;
            let mut config: RunConfig =
                table
                    .try_into()
                    .map_err(|e: toml::de::Error| ConfigError::Semantic {
                        key: key.into(),
                        message: e.message().trim().to_string(),
                    })?;
            let tag: String = value
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect();
            config.output.stem = Some(format!("{}_{field}_{i}_{tag}", base_config.stem()));
            config.validate()?;
            Ok(config)
        })
        .collect()
}

/// Runs configurations on separate threads. Results keep the input order.
pub fn run_parallel(configs: &[RunConfig]) -> Vec<Result<RunOutcome>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || run(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(anyhow::anyhow!("worker panicked")))
            })
            .collect()
    })
}
