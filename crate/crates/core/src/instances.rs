//! Built-in example filters and parametric instance families.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::compat::{class_quotient, compatibility_complex};
use crate::cover::induced_cover;
use crate::error::{Error, Result};
use crate::filter::{PFilter, PFilterBuilder};
use crate::minimize::{minimize, minimize_with_choice, MinimizeOptions};
use crate::oracle::{brute_force_minimize, DEFAULT_ORACLE_LIMIT};
use crate::solver::SatSolver;
use crate::zipper::{generate_zippers, zippers_to_text};

/// A checkable claim about an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    /// Size of the smallest deterministic output-simulating filter.
    MinimalSize(usize),
    /// Exact zipper listing, one constraint per line.
    Zippers(Vec<String>),
    /// Minimal size after restricting each listed state to one label.
    ChoiceMinimum {
        choice: Vec<(String, String)>,
        size: usize,
    },
    /// The minimal filter's induced cover puts some state in two parts.
    SplitState,
    /// Merging connected components of the compatibility graph yields a
    /// non-deterministic filter.
    QuotientNondeterministic,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::MinimalSize(n) => write!(f, "minimal size {n}"),
            Expectation::Zippers(z) => write!(f, "zipper set {{{}}}", z.join("; ")),
            Expectation::ChoiceMinimum { choice, size } => {
                let c: Vec<String> = choice.iter().map(|(s, l)| format!("{s}={l}")).collect();
                write!(f, "minimal size {size} when {}", c.join(", "))
            }
            Expectation::SplitState => write!(f, "minimal cover splits a state"),
            Expectation::QuotientNondeterministic => {
                write!(f, "component quotient is non-deterministic")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub name: String,
    pub description: String,
    pub parameters: Vec<(String, String)>,
    pub expected: Vec<Expectation>,
}

pub const BUILTIN_NAMES: &[&str] = &["counterexample-nd", "split-choice", "drone"];

pub fn builtin(name: &str) -> Result<(PFilter, InstanceSpec)> {
    match name {
        "counterexample-nd" => Ok(counterexample_nd()),
        "split-choice" => Ok(split_choice()),
        "drone" => Ok(drone()),
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}

fn choice(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(s, l)| (s.to_string(), l.to_string()))
        .collect()
}

/// Eight states where compatibility is not transitive and the smallest
/// simulator must split `w6` across two merged groups.
fn counterexample_nd() -> (PFilter, InstanceSpec) {
    let colors = [
        ("w0", "Z"),
        ("w1", "P"),
        ("w2", "P"),
        ("w3", "Q"),
        ("w4", "Q"),
        ("w5", "R"),
        ("w6", "R"),
        ("w7", "R"),
    ];
    let mut b = PFilterBuilder::new();
    for (s, c) in colors {
        b.add_state(s, [c]);
    }
    b.add_initial("w0");
    for (from, to, y) in [
        ("w0", "w1", "a"),
        ("w0", "w2", "b"),
        ("w0", "w3", "c"),
        ("w0", "w4", "d"),
        ("w1", "w5", "a"),
        ("w2", "w6", "a"),
        ("w3", "w6", "b"),
        ("w4", "w7", "b"),
        ("w5", "w1", "c"),
        ("w7", "w3", "c"),
    ] {
        b.add_transition(from, to, y);
    }
    let f = b.build().expect("builtin is valid");
    let spec = InstanceSpec {
        name: "counterexample-nd".into(),
        description: "non-transitive compatibility; the minimum needs overlapping merges".into(),
        parameters: Vec::new(),
        expected: vec![
            Expectation::Zippers(vec![
                "U{w1,w2} -a-> W{w5,w6}".into(),
                "U{w3,w4} -b-> W{w6,w7}".into(),
            ]),
            Expectation::MinimalSize(5),
            Expectation::SplitState,
            Expectation::QuotientNondeterministic,
        ],
    };
    (f, spec)
}

/// Observation names used by [`gen_nxm`]: one entry symbol per row plus the
/// two alternating chain symbols.
fn nxm_obs(row: usize) -> String {
    format!("o{}", row + 1)
}

fn nxm_label(row: usize) -> String {
    format!("color{}", row + 1)
}

/// `n` rows of `m` chained same-colored states behind a start state, all
/// rows ending in two terminal states that may output any of the `n` colors.
pub fn gen_nxm(n: usize, m: usize) -> PFilter {
    gen_nxm_named(
        n,
        m,
        |row, j| format!("r{}s{}", row + 1, j + 1),
        "w0",
        ["t1", "t2"],
    )
}

fn gen_nxm_named(
    n: usize,
    m: usize,
    cell: impl Fn(usize, usize) -> String,
    start: &str,
    terminals: [&str; 2],
) -> PFilter {
    assert!(n >= 1 && m >= 1, "n and m must be positive");
    let chain = |j: usize| if j.is_multiple_of(2) { "d" } else { "c" };
    let mut b = PFilterBuilder::new();
    b.add_state(start, ["start"]);
    for row in 0..n {
        for j in 0..m {
            b.add_state(&cell(row, j), [nxm_label(row)]);
        }
    }
    let all: Vec<String> = (0..n).map(nxm_label).collect();
    for t in terminals {
        b.add_state(t, all.clone());
    }
    b.add_initial(start);
    for row in 0..n {
        b.add_transition(start, &cell(row, 0), &nxm_obs(row));
        for j in 0..m - 1 {
            b.add_transition(&cell(row, j), &cell(row, j + 1), chain(j));
        }
        b.add_transition(&cell(row, m - 1), terminals[0], chain(m - 1));
    }
    for t in terminals {
        b.add_transition(t, terminals[0], "c");
        b.add_transition(t, terminals[1], "d");
    }
    b.build().expect("generated filter is valid")
}

/// Two rows of three; the terminals `w4`, `w5` may output either color.
fn split_choice() -> (PFilter, InstanceSpec) {
    let f = gen_nxm_named(
        2,
        3,
        |row, j| format!("{}{}", ["a", "b"][row], j + 1),
        "w0",
        ["w4", "w5"],
    );
    let spec = InstanceSpec {
        name: "split-choice".into(),
        description: "multi-output terminals; committing to one output per state costs states"
            .into(),
        parameters: vec![("n".into(), "2".into()), ("m".into(), "3".into())],
        expected: vec![
            Expectation::MinimalSize(3),
            Expectation::ChoiceMinimum {
                choice: choice(&[("w4", "color1"), ("w5", "color1")]),
                size: 4,
            },
            Expectation::ChoiceMinimum {
                choice: choice(&[("w4", "color1"), ("w5", "color2")]),
                size: 7,
            },
        ],
    };
    (f, spec)
}

/// A drone moving between eight regions of a house, observing whether the
/// light level rises (`+`), falls (`-`) or stays (`=`). It must know whether
/// it may fly, drive, or either.
fn drone() -> (PFilter, InstanceSpec) {
    let mut b = PFilterBuilder::new();
    for (s, outs) in [
        ("F", &["fly"][..]),
        ("Y", &["fly"][..]),
        ("G", &["fly"][..]),
        ("L", &["fly", "drive"][..]),
        ("K", &["fly", "drive"][..]),
        ("B", &["drive"][..]),
        ("P", &["fly"][..]),
        ("R", &["fly"][..]),
    ] {
        b.add_state(s, outs.iter().copied());
    }
    b.add_initial("F");
    for (from, y, to) in [
        ("B", "+", "L"),
        ("B", "=", "R"),
        ("F", "-", "L"),
        ("G", "-", "R"),
        ("G", "=", "Y"),
        ("K", "-", "P"),
        ("K", "=", "L"),
        ("L", "+", "F"),
        ("L", "-", "B"),
        ("L", "=", "K"),
        ("P", "+", "K"),
        ("R", "+", "G"),
        ("R", "=", "B"),
        ("Y", "=", "G"),
    ] {
        b.add_transition(from, to, y);
    }
    let f = b.build().expect("builtin is valid");
    let spec = InstanceSpec {
        name: "drone".into(),
        description: "region tracking for a drone that flies or drives".into(),
        parameters: Vec::new(),
        expected: vec![
            Expectation::MinimalSize(3),
            Expectation::ChoiceMinimum {
                choice: choice(&[("L", "fly"), ("K", "fly")]),
                size: 4,
            },
        ],
    };
    (f, spec)
}

/// Exit cells of a grid world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExitSpec {
    pub outer: Vec<(usize, usize)>,
    pub inner: Vec<(usize, usize)>,
}

impl ExitSpec {
    /// Outer exits at the far end of the first row and the start of the
    /// second; inner exits at `(1, 2)` and the centre. The second-row pair
    /// is two columns apart, so both can lie in one belief state and that
    /// state carries both outputs.
    pub fn default_for(n: usize) -> Self {
        let last = n.saturating_sub(1);
        let h = n / 2;
        let mut inner = vec![(1.min(last), 2.min(last)), (h, h)];
        inner.dedup();
        ExitSpec {
            outer: vec![(0, last), (1.min(last), 0)],
            inner,
        }
    }
}

/// A robot walks the `n x n` grid from the corner `(0, 0)`, one step to a
/// 4-neighbour at a time, observing only the row it enters. States are the
/// reachable sets of possible cells; each outputs the exit kinds present
/// among its cells, or `none`.
pub fn gen_grid(n: usize, exits: &ExitSpec) -> PFilter {
    assert!(n >= 1, "grid needs at least one cell");
    let kind = |cell: (usize, usize)| {
        if exits.outer.contains(&cell) {
            Some("outer")
        } else if exits.inner.contains(&cell) {
            Some("inner")
        } else {
            None
        }
    };
    let neighbors = |(r, c): (usize, usize)| {
        let mut out = Vec::new();
        if r > 0 {
            out.push((r - 1, c));
        }
        if r + 1 < n {
            out.push((r + 1, c));
        }
        if c > 0 {
            out.push((r, c - 1));
        }
        if c + 1 < n {
            out.push((r, c + 1));
        }
        out
    };
    let name = |set: &BTreeSet<(usize, usize)>| {
        set.iter()
            .map(|(r, c)| format!("r{r}c{c}"))
            .collect::<Vec<_>>()
            .join("+")
    };
    let start = BTreeSet::from([(0, 0)]);
    let mut ids: HashMap<BTreeSet<(usize, usize)>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut order = vec![start];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for row in 0..n {
            let next: BTreeSet<(usize, usize)> = order[i]
                .iter()
                .flat_map(|&cell| neighbors(cell))
                .filter(|&(r, _)| r == row)
                .collect();
            if next.is_empty() {
                continue;
            }
            let j = *ids.entry(next.clone()).or_insert_with(|| {
                order.push(next);
                queue.push_back(order.len() - 1);
                order.len() - 1
            });
            edges.push((i, j, row));
        }
    }
    let mut b = PFilterBuilder::new();
    for set in &order {
        let kinds: BTreeSet<&str> = set.iter().filter_map(|&c| kind(c)).collect();
        if kinds.is_empty() {
            b.add_state(&name(set), ["none"]);
        } else {
            b.add_state(&name(set), kinds);
        }
    }
    b.add_initial(&name(&order[0]));
    for row in 0..n {
        b.add_observation(&row.to_string());
    }
    for (i, j, row) in edges {
        b.add_transition(&name(&order[i]), &name(&order[j]), &row.to_string());
    }
    b.build().expect("generated filter is valid")
}

/// Outcome of checking one expectation.
#[derive(Clone, Debug)]
pub struct CheckedExpectation {
    pub expectation: Expectation,
    pub holds: bool,
    pub observed: String,
}

/// Checks every expectation of `spec` against `f`. Sizes are checked with
/// both the SAT pipeline and the brute-force oracle.
pub fn check_expectations(
    f: &PFilter,
    spec: &InstanceSpec,
    solver: &dyn SatSolver,
) -> Result<Vec<CheckedExpectation>> {
    let opts = MinimizeOptions::default();
    let mut out = Vec::new();
    for e in &spec.expected {
        let (holds, observed) = match e {
            Expectation::MinimalSize(n) => {
                let sat = minimize(f, solver, &opts)?.minimal_size;
                let oracle = brute_force_minimize(f, DEFAULT_ORACLE_LIMIT)?.minimal_size;
                (
                    sat == *n && oracle == *n,
                    format!("sat {sat}, oracle {oracle}"),
                )
            }
            Expectation::Zippers(lines) => {
                let k = compatibility_complex(f)?;
                let text = zippers_to_text(f, &generate_zippers(f, &k)?);
                let got: Vec<String> = text.lines().map(str::to_string).collect();
                (&got == lines, got.join("; "))
            }
            Expectation::ChoiceMinimum { choice, size } => {
                let map: BTreeMap<String, String> = choice.iter().cloned().collect();
                let r = minimize_with_choice(f, &map, solver, &opts)?;
                let restricted = f.with_outputs(
                    &map.iter()
                        .map(|(s, l)| (s.clone(), BTreeSet::from([l.clone()])))
                        .collect(),
                )?;
                let oracle = brute_force_minimize(&restricted, DEFAULT_ORACLE_LIMIT)?.minimal_size;
                (
                    r.minimal_size == *size && oracle == *size,
                    format!("sat {}, oracle {oracle}", r.minimal_size),
                )
            }
            Expectation::SplitState => {
                let r = minimize(f, solver, &opts)?;
                let cover = induced_cover(&r.input, &r.minimal_filter)?;
                (
                    cover.has_overlap(),
                    format!("induced cover {:?}", cover.to_names(&r.input)),
                )
            }
            Expectation::QuotientNondeterministic => {
                let (q, _) = class_quotient(f)?;
                let w = q.nondeterminism_witness();
                (w.is_some(), w.unwrap_or_else(|| "deterministic".into()))
            }
        };
        out.push(CheckedExpectation {
            expectation: e.clone(),
            holds,
            observed,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::deterministic_isomorphism;

    #[test]
    fn nxm_state_count() {
        for (n, m) in [(1, 1), (2, 3), (3, 2), (4, 4)] {
            assert_eq!(gen_nxm(n, m).num_states(), n * m + 3);
        }
    }

    #[test]
    fn split_choice_is_two_by_three() {
        let (f, _) = builtin("split-choice").unwrap();
        assert!(deterministic_isomorphism(&f, &gen_nxm(2, 3)).is_some());
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(builtin("nope"), Err(Error::UnknownInstance(_))));
    }

    #[test]
    fn two_by_two_grid_by_hand() {
        // From r0c0 the robot enters r1c0 (row 1) or r0c1 (row 0). From
        // r0c1 it enters r0c0 or r1c1; from r1c0 it enters r0c0 or r1c1.
        let f = gen_grid(2, &ExitSpec::default_for(2));
        let mut names: Vec<&str> = f.state_names().iter().map(String::as_str).collect();
        names.sort();
        assert_eq!(names, ["r0c0", "r0c1", "r1c0", "r1c1"]);
        let r0 = f.obs_id("0").unwrap();
        let r1 = f.obs_id("1").unwrap();
        assert_eq!(
            f.output_names_of(&[r0]).unwrap(),
            BTreeSet::from(["outer".to_string()])
        );
        assert_eq!(
            f.output_names_of(&[r1, r1]).unwrap(),
            BTreeSet::from(["inner".to_string()])
        );
        assert!(f.is_deterministic());
    }

    #[test]
    fn grid_has_multi_output_states() {
        let f = gen_grid(6, &ExitSpec::default_for(6));
        assert!(f.is_deterministic());
        assert!(!f.is_single_output());
    }
}
