//! A small complete DPLL solver with unit propagation, for modest instances.

use std::time::Instant;

/// Maximum number of variables accepted.
pub const MAX_VARS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DpllResult {
    /// `model[var]`, index 0 unused.
    Sat(Vec<bool>),
    Unsat,
    Interrupted,
}

struct State<'a> {
    clauses: &'a [Vec<i32>],
    // 0 unassigned, 1 true, -1 false
    value: Vec<i8>,
    trail: Vec<usize>,
    occurs: Vec<Vec<usize>>,
    deadline: Option<Instant>,
    steps: u64,
}

fn lit_value(value: &[i8], lit: i32) -> i8 {
    let v = value[lit.unsigned_abs() as usize];
    if lit > 0 {
        v
    } else {
        -v
    }
}

impl State<'_> {
    fn assign(&mut self, lit: i32) {
        let var = lit.unsigned_abs() as usize;
        self.value[var] = if lit > 0 { 1 } else { -1 };
        self.trail.push(var);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let var = self.trail.pop().expect("trail longer than len");
            self.value[var] = 0;
        }
    }

    /// Unit propagation from trail position `from`; false on conflict.
    fn propagate(&mut self, mut from: usize) -> bool {
        while from < self.trail.len() {
            let var = self.trail[from];
            from += 1;
            for idx in 0..self.occurs[var].len() {
                let c = self.occurs[var][idx];
                let mut unassigned = None;
                let mut open = 0;
                let mut sat = false;
                for &lit in &self.clauses[c] {
                    match lit_value(&self.value, lit) {
                        1 => {
                            sat = true;
                            break;
                        }
                        0 => {
                            open += 1;
                            unassigned = Some(lit);
                        }
                        _ => {}
                    }
                }
                if sat {
                    continue;
                }
                match (open, unassigned) {
                    (0, _) => return false,
                    (1, Some(lit)) => self.assign(lit),
                    _ => {}
                }
            }
        }
        true
    }

    /// Branching literal from the shortest open clause, or `None` when all
    /// clauses are satisfied.
    fn choose(&self) -> Option<i32> {
        let mut best: Option<(usize, i32)> = None;
        for c in self.clauses {
            let mut open = 0;
            let mut pick = 0;
            let mut sat = false;
            for &lit in c {
                match lit_value(&self.value, lit) {
                    1 => {
                        sat = true;
                        break;
                    }
                    0 => {
                        open += 1;
                        if pick == 0 {
                            pick = lit;
                        }
                    }
                    _ => {}
                }
            }
            if !sat && open > 0 && best.is_none_or(|(n, _)| open < n) {
                best = Some((open, pick));
            }
        }
        best.map(|(_, lit)| lit)
    }

    fn search(&mut self) -> Option<bool> {
        self.steps += 1;
        if self.steps.is_multiple_of(256) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return None;
                }
            }
        }
        let Some(lit) = self.choose() else {
            return Some(true);
        };
        for branch in [lit, -lit] {
            let mark = self.trail.len();
            self.assign(branch);
            if self.propagate(mark) {
                match self.search() {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            self.undo_to(mark);
        }
        Some(false)
    }
}

/// Solves `clauses` over variables `1..=num_vars`.
pub fn solve(num_vars: usize, clauses: &[Vec<i32>], deadline: Option<Instant>) -> DpllResult {
    let mut occurs = vec![Vec::new(); num_vars + 1];
    for (i, c) in clauses.iter().enumerate() {
        if c.is_empty() {
            return DpllResult::Unsat;
        }
        for &lit in c {
            occurs[lit.unsigned_abs() as usize].push(i);
        }
    }
    let mut st = State {
        clauses,
        value: vec![0; num_vars + 1],
        trail: Vec::new(),
        occurs,
        deadline,
        steps: 0,
    };
    for c in clauses {
        if c.len() == 1 {
            match lit_value(&st.value, c[0]) {
                0 => st.assign(c[0]),
                -1 => return DpllResult::Unsat,
                _ => {}
            }
        }
    }
    if !st.propagate(0) {
        return DpllResult::Unsat;
    }
    match st.search() {
        Some(true) => DpllResult::Sat(st.value.iter().map(|&v| v > 0).collect()),
        Some(false) => DpllResult::Unsat,
        None => DpllResult::Interrupted,
    }
}
