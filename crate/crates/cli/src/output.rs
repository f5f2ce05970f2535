//! CSV emission. Numbers use the shortest representation that parses back
//! to the same `f64`.

use std::io::Write;

use hamgap_core::diagnostics::BalanceReport;
use hamgap_core::dynamics::Trajectory;
use hamgap_core::Hamiltonian;

pub const BALANCE_COLUMNS: [&str; 6] = [
    "t",
    "H",
    "diss_cum",
    "balance_residual",
    "ineq_lhs",
    "info_gap_cum",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// `t, q1..qn, p1..pn, H`.
pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("q{i}")));
    cols.extend((1..=n).map(|i| format!("p{i}")));
    cols.push("H".to_string());
    cols
}

pub fn write_trajectory<W: Write>(
    out: W,
    h: &dyn Hamiltonian,
    traj: &Trajectory,
) -> csv::Result<()> {
    let n = traj.initial_state().dim();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(n))?;
    for (t, z) in traj.times().iter().zip(traj.states()) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(z.coords().map(fmt_f64));
        row.push(fmt_f64(h.value(z, *t)));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_balance<W: Write>(out: W, report: &BalanceReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BALANCE_COLUMNS)?;
    for k in 0..report.rows() {
        w.write_record([
            fmt_f64(report.times[k]),
            fmt_f64(report.energy[k]),
            fmt_f64(report.diss_cum[k]),
            fmt_f64(report.balance_residual[k]),
            fmt_f64(report.ineq_lhs[k]),
            fmt_f64(report.info_gap_cum[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}
