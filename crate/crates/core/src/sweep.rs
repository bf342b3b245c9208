//! Timing sweeps over instance families, reported as CSV rows.

use std::fmt::Write as _;

use crate::error::Result;
use crate::filter::PFilter;
use crate::instances::{gen_grid, gen_nxm, ExitSpec};
use crate::minimize::{minimize, MinimizeOptions};
use crate::solver::SatSolver;

pub const CSV_HEADER: &str =
    "instance,states_in,states_out,zipper_count,t_zipper,t_encode,t_solve,certified";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub instance: String,
    pub states_in: usize,
    pub states_out: usize,
    pub zipper_count: usize,
    pub t_zipper: f64,
    pub t_encode: f64,
    pub t_solve: f64,
    pub certified: bool,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{}",
            self.instance,
            self.states_in,
            self.states_out,
            self.zipper_count,
            self.t_zipper,
            self.t_encode,
            self.t_solve,
            self.certified
        )
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv());
    }
    out
}

pub fn run_one(
    name: &str,
    f: &PFilter,
    solver: &dyn SatSolver,
    opts: &MinimizeOptions,
) -> Result<SweepRow> {
    let r = minimize(f, solver, opts)?;
    Ok(SweepRow {
        instance: name.to_string(),
        states_in: r.input_size(),
        states_out: r.minimal_size,
        zipper_count: r.zipper_count,
        t_zipper: r.timings.zipper.as_secs_f64(),
        t_encode: r.timings.encode.as_secs_f64(),
        t_solve: r.timings.solve.as_secs_f64(),
        certified: r.certified,
    })
}

/// `nxm-<n>x<m>` for every pair in `sizes`.
pub fn nxm_sweep(
    sizes: &[(usize, usize)],
    solver: &dyn SatSolver,
    opts: &MinimizeOptions,
) -> Result<Vec<SweepRow>> {
    sizes
        .iter()
        .map(|&(n, m)| run_one(&format!("nxm-{n}x{m}"), &gen_nxm(n, m), solver, opts))
        .collect()
}

/// `grid-<n>` with the default exits for every `n` in `sizes`.
pub fn grid_sweep(
    sizes: &[usize],
    solver: &dyn SatSolver,
    opts: &MinimizeOptions,
) -> Result<Vec<SweepRow>> {
    sizes
        .iter()
        .map(|&n| {
            run_one(
                &format!("grid-{n}"),
                &gen_grid(n, &ExitSpec::default_for(n)),
                solver,
                opts,
            )
        })
        .collect()
}
