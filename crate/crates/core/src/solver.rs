//! SAT back ends: the embedded CDCL solver, the small DPLL fallback, and
//! external solvers speaking the SAT-competition output format.

use std::io::Read as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::time::{Duration, Instant};

use batsat::{lbool, BasicCallbacks, BasicSolver, Lit, SolverInterface, SolverOpts, Var};

use crate::dpll;
use crate::encode::CnfInstance;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    /// `model[var]`, index 0 unused.
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

pub trait SatSolver {
    fn solve(&self, cnf: &CnfInstance, timeout: Option<Duration>) -> Result<SatOutcome>;

    fn name(&self) -> String;
}

/// Which solver to run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum SolverKind {
    #[default]
    Builtin,
    Dpll,
    Exec(PathBuf),
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "builtin" => Ok(SolverKind::Builtin),
            "dpll" => Ok(SolverKind::Dpll),
            _ => match s.strip_prefix("exec:") {
                Some(path) if !path.is_empty() => Ok(SolverKind::Exec(PathBuf::from(path))),
                _ => Err(Error::Parse(format!(
                    "unknown solver `{s}` (expected builtin, dpll or exec:<path>)"
                ))),
            },
        }
    }
}

impl SolverKind {
    pub fn instantiate(&self) -> Box<dyn SatSolver + Send + Sync> {
        match self {
            SolverKind::Builtin => Box::new(CdclSolver),
            SolverKind::Dpll => Box::new(DpllSolver),
            SolverKind::Exec(path) => Box::new(ExternalSolver { path: path.clone() }),
        }
    }
}

/// Embedded CDCL solver.
#[derive(Clone, Copy, Debug, Default)]
pub struct CdclSolver;

impl SatSolver for CdclSolver {
    fn solve(&self, cnf: &CnfInstance, timeout: Option<Duration>) -> Result<SatOutcome> {
        let mut cb = BasicCallbacks::new();
        if let Some(t) = timeout {
            let deadline = Instant::now() + t;
            cb.set_stop(move || Instant::now() >= deadline);
        }
        let mut solver = BasicSolver::new(SolverOpts::default(), cb);
        let vars: Vec<Var> = (0..cnf.num_vars)
            .map(|_| solver.new_var_default())
            .collect();
        let lit = |l: i32| Lit::new(vars[l.unsigned_abs() as usize - 1], l > 0);
        for c in &cnf.clauses {
            let mut clause: Vec<Lit> = c.iter().map(|&l| lit(l)).collect();
            if !solver.add_clause_reuse(&mut clause) {
                return Ok(SatOutcome::Unsat);
            }
        }
        let res = solver.solve_limited(&[]);
        if res == lbool::TRUE {
            let mut model = vec![false; cnf.num_vars + 1];
            for (i, &v) in vars.iter().enumerate() {
                model[i + 1] = solver.value_var(v) == lbool::TRUE;
            }
            Ok(SatOutcome::Sat(model))
        } else if res == lbool::FALSE {
            Ok(SatOutcome::Unsat)
        } else {
            Ok(SatOutcome::Timeout)
        }
    }

    fn name(&self) -> String {
        "builtin".into()
    }
}

/// Plain DPLL, limited to [`dpll::MAX_VARS`] variables.
#[derive(Clone, Copy, Debug, Default)]
pub struct DpllSolver;

impl SatSolver for DpllSolver {
    fn solve(&self, cnf: &CnfInstance, timeout: Option<Duration>) -> Result<SatOutcome> {
        if cnf.num_vars > dpll::MAX_VARS {
            return Err(Error::Solver(format!(
                "dpll accepts at most {} variables, instance has {}",
                dpll::MAX_VARS,
                cnf.num_vars
            )));
        }
        let deadline = timeout.map(|t| Instant::now() + t);
        Ok(match dpll::solve(cnf.num_vars, &cnf.clauses, deadline) {
            dpll::DpllResult::Sat(m) => SatOutcome::Sat(m),
            dpll::DpllResult::Unsat => SatOutcome::Unsat,
            dpll::DpllResult::Interrupted => SatOutcome::Timeout,
        })
    }

    fn name(&self) -> String {
        "dpll".into()
    }
}

/// External executable invoked as `<path> <file.cnf>`.
#[derive(Clone, Debug)]
pub struct ExternalSolver {
    pub path: PathBuf,
}

impl SatSolver for ExternalSolver {
    fn solve(&self, cnf: &CnfInstance, timeout: Option<Duration>) -> Result<SatOutcome> {
        let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
        std::io::Write::write_all(&mut file, cnf.to_dimacs().as_bytes())?;
        let mut child = Command::new(&self.path)
            .arg(file.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Solver(format!("cannot start {}: {e}", self.path.display())))?;
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut text = String::new();
            stdout.read_to_string(&mut text).map(|_| text)
        });
        let deadline = timeout.map(|t| Instant::now() + t);
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SatOutcome::Timeout);
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        let text = reader
            .join()
            .map_err(|_| Error::Solver("solver output reader panicked".into()))??;
        parse_competition_output(&text, cnf.num_vars)
    }

    fn name(&self) -> String {
        format!("exec:{}", self.path.display())
    }
}

/// Parses `s ...` status and `v ...` value lines. Variables not mentioned
/// default to false.
pub fn parse_competition_output(text: &str, num_vars: usize) -> Result<SatOutcome> {
    let mut status = None;
    let mut model = vec![false; num_vars + 1];
    for line in text.lines() {
        let line = line.trim();
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(s.trim().to_string());
        } else if let Some(vals) = line.strip_prefix("v ").or_else(|| line.strip_prefix("v\t")) {
            for tok in vals.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| Error::Solver(format!("bad value token `{tok}`")))?;
                let var = lit.unsigned_abs() as usize;
                if var > 0 && var <= num_vars {
                    model[var] = lit > 0;
                }
            }
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => Ok(SatOutcome::Sat(model)),
        Some("UNSATISFIABLE") => Ok(SatOutcome::Unsat),
        Some("UNKNOWN") | Some("TIMEOUT") => Ok(SatOutcome::Timeout),
        Some(other) => Err(Error::Solver(format!("unrecognized status `{other}`"))),
        None => Err(Error::Solver("solver printed no status line".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{ClauseCounts, VarRole};

    fn cnf(num_vars: usize, clauses: Vec<Vec<i32>>) -> CnfInstance {
        CnfInstance {
            num_vars,
            clauses,
            roles: (0..num_vars).map(|v| VarRole::R { v, i: 0 }).collect(),
            k: 1,
            num_states: num_vars,
            counts: ClauseCounts::default(),
        }
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(
            SolverKind::from_str("exec:/bin/x").unwrap(),
            SolverKind::Exec(PathBuf::from("/bin/x"))
        );
        assert_eq!(
            SolverKind::from_str("builtin").unwrap(),
            SolverKind::Builtin
        );
        assert!(SolverKind::from_str("exec:").is_err());
        assert!(SolverKind::from_str("minisat").is_err());
    }

    #[test]
    fn competition_output() {
        let out = "c hello\ns SATISFIABLE\nv 1 -2\nv 3 0\n";
        assert_eq!(
            parse_competition_output(out, 3).unwrap(),
            SatOutcome::Sat(vec![false, true, false, true])
        );
        assert_eq!(
            parse_competition_output("s UNSATISFIABLE\n", 3).unwrap(),
            SatOutcome::Unsat
        );
        assert!(parse_competition_output("nothing", 3).is_err());
    }

    #[test]
    fn builtin_and_dpll_agree() {
        let sat = cnf(2, vec![vec![1, 2], vec![-1]]);
        let unsat = cnf(1, vec![vec![1], vec![-1]]);
        for s in [SolverKind::Builtin, SolverKind::Dpll] {
            let s = s.instantiate();
            assert_eq!(
                s.solve(&sat, None).unwrap(),
                SatOutcome::Sat(vec![false, false, true])
            );
            assert_eq!(s.solve(&unsat, None).unwrap(), SatOutcome::Unsat);
        }
    }

    #[cfg(unix)]
    #[test]
    fn external_script() {
        use std::os::unix::fs::PermissionsExt;
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("fake.sh");
        std::fs::write(
            &script,
            "#!/bin/sh\necho 's SATISFIABLE'\necho 'v -1 2 0'\n",
        )
        .unwrap();
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        let s = ExternalSolver { path: script };
        assert_eq!(
            s.solve(&cnf(2, vec![vec![2]]), Some(Duration::from_secs(10)))
                .unwrap(),
            SatOutcome::Sat(vec![false, false, true])
        );
    }
}
