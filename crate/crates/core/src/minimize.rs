//! The minimization pipeline: complex, zipper constraints, CNF encoding, SAT
//! search over `k`, decoding and induction of the minimal filter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::compat::{
    compatibility_complex_with, ComplexMode, SimplicialComplex, DEFAULT_FACE_LIMIT,
};
use crate::cover::{induce_filter, part_level_violation, Cover};
use crate::encode::{
    decode_checked, encode_with_forbidden, enumerate_all_nonfaces,
    enumerate_minimal_nonfaces_with_limit, incompatible_anchor_set, EncodeOptions, Encoding,
};
use crate::error::{Error, Result};
use crate::filter::{output_simulates, PFilter, PFilterBuilder, StateSet};
use crate::solver::{SatOutcome, SatSolver};
use crate::zipper::{
    generate_irredundant_zippers, generate_zippers_with_limit, successor_set, ZipperConstraint,
    DEFAULT_ZIPPER_LIMIT,
};

/// Which problem variant to solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Single-output path when every state has one label, else multi-output.
    #[default]
    Auto,
    /// Cliques of the pairwise compatibility graph; single-output input only.
    So,
    /// Faces of the group-compatibility complex.
    Mo,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Mode::Auto),
            "so" => Ok(Mode::So),
            "mo" => Ok(Mode::Mo),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub mode: Mode,
    pub encode: EncodeOptions,
    pub binary_search: bool,
    /// Per solver call.
    pub timeout: Option<Duration>,
    pub face_limit: usize,
    pub zipper_limit: usize,
    /// Seed the search with a greedily built cover.
    pub warm_start: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            mode: Mode::Auto,
            encode: EncodeOptions::default(),
            binary_search: false,
            timeout: None,
            face_limit: DEFAULT_FACE_LIMIT,
            zipper_limit: DEFAULT_ZIPPER_LIMIT,
            warm_start: true,
        }
    }
}

/// Result of one probe of the search over `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeOutcome {
    /// Satisfiable; the decoded cover has this many parts.
    Sat(usize),
    Unsat,
    Timeout,
    /// A valid cover of this size was already known without solving.
    Witness(usize),
    /// Impossible: that many pairwise-incompatible states exist.
    BelowLowerBound(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KProbe {
    pub k: usize,
    pub outcome: ProbeOutcome,
    pub seconds: f64,
}

impl fmt::Display for KProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            ProbeOutcome::Sat(n) => {
                write!(f, "k={}: SAT (cover of {n}) {:.3}s", self.k, self.seconds)
            }
            ProbeOutcome::Unsat => write!(f, "k={}: UNSAT {:.3}s", self.k, self.seconds),
            ProbeOutcome::Timeout => write!(f, "k={}: TIMEOUT {:.3}s", self.k, self.seconds),
            ProbeOutcome::Witness(n) => write!(f, "k={}: known cover of {n}", self.k),
            ProbeOutcome::BelowLowerBound(l) => {
                write!(
                    f,
                    "k={}: impossible ({l} pairwise-incompatible states)",
                    self.k
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub zipper: Duration,
    pub encode: Duration,
    pub solve: Duration,
}

#[derive(Clone, Debug)]
pub struct MinimizeReport {
    /// The deterministic filter that was minimized (after optional
    /// determinization and pruning).
    pub input: PFilter,
    pub determinized: bool,
    pub single_output_path: bool,
    pub minimal_filter: PFilter,
    pub minimal_size: usize,
    pub cover: Cover,
    pub probes: Vec<KProbe>,
    pub certified: bool,
    pub timings: Timings,
    /// Constraints handed to the encoder.
    pub zipper_count: usize,
    pub face_count: usize,
    pub lower_bound: usize,
}

impl MinimizeReport {
    pub fn input_size(&self) -> usize {
        self.input.num_states()
    }
}

impl fmt::Display for MinimizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {} -> {}", self.input_size(), self.minimal_size)?;
        writeln!(f, "certified minimal: {}", self.certified)?;
        writeln!(
            f,
            "path: {}",
            if self.single_output_path {
                "single-output"
            } else {
                "multi-output"
            }
        )?;
        writeln!(f, "maximal faces: {}", self.face_count)?;
        writeln!(f, "zipper constraints: {}", self.zipper_count)?;
        for p in &self.probes {
            writeln!(f, "{p}")?;
        }
        writeln!(
            f,
            "time: zipper {:.3}s, encode {:.3}s, solve {:.3}s",
            self.timings.zipper.as_secs_f64(),
            self.timings.encode.as_secs_f64(),
            self.timings.solve.as_secs_f64()
        )
    }
}

/// Determinizes (with a warning) and prunes unreachable states.
pub fn prepare_input(f: &PFilter) -> (PFilter, bool) {
    if f.is_deterministic() {
        (f.prune_unreachable().0, false)
    } else {
        log::warn!("input filter is not deterministic; determinizing first");
        (f.determinize().prune_unreachable().0, true)
    }
}

/// Everything computed before the search over `k`.
pub struct Prepared {
    pub filter: PFilter,
    pub determinized: bool,
    pub single_output_path: bool,
    pub complex: SimplicialComplex,
    pub zippers: Vec<ZipperConstraint>,
    pub zipper_time: Duration,
}

pub fn prepare(f: &PFilter, opts: &MinimizeOptions) -> Result<Prepared> {
    let (filter, determinized) = prepare_input(f);
    let single = match opts.mode {
        Mode::Auto => filter.is_single_output(),
        Mode::So if !filter.is_single_output() => return Err(Error::NotSingleOutput),
        Mode::So => true,
        Mode::Mo => false,
    };
    let start = Instant::now();
    let mode = if single {
        ComplexMode::Pairwise
    } else {
        ComplexMode::Group
    };
    let complex = compatibility_complex_with(&filter, mode, opts.face_limit)?;
    // The all-non-faces encoding keeps every constraint so its variable
    // count matches the closed form; the compact one drops implied ones.
    let zippers = match opts.encode.encoding {
        Encoding::PaperExact => generate_zippers_with_limit(&filter, &complex, opts.zipper_limit)?,
        Encoding::MinimalNonface => {
            generate_irredundant_zippers(&filter, &complex, opts.zipper_limit)?
        }
    };
    Ok(Prepared {
        filter,
        determinized,
        single_output_path: single,
        complex,
        zippers,
        zipper_time: start.elapsed(),
    })
}

/// Exact minimization: the smallest deterministic filter that output
/// simulates `f`.
pub fn minimize(
    f: &PFilter,
    solver: &dyn SatSolver,
    opts: &MinimizeOptions,
) -> Result<MinimizeReport> {
    let prep = prepare(f, opts)?;
    minimize_prepared(prep, solver, opts)
}

pub fn minimize_prepared(
    prep: Prepared,
    solver: &dyn SatSolver,
    opts: &MinimizeOptions,
) -> Result<MinimizeReport> {
    let Prepared {
        filter,
        determinized,
        single_output_path,
        complex,
        zippers,
        zipper_time,
    } = prep;
    let t = filter.num_states();
    let mut timings = Timings {
        zipper: zipper_time,
        ..Timings::default()
    };
    let mut probes = Vec::new();

    let enc_start = Instant::now();
    let forbidden = match opts.encode.encoding {
        Encoding::PaperExact => enumerate_all_nonfaces(&complex, opts.encode.exact_cap)?,
        Encoding::MinimalNonface => {
            enumerate_minimal_nonfaces_with_limit(&complex, opts.encode.nonface_limit)?
        }
    };
    timings.encode += enc_start.elapsed();

    let lower_bound = incompatible_anchor_set(&complex).len().max(1);
    let mut best = Cover::singletons(t);
    probes.push(KProbe {
        k: t,
        outcome: ProbeOutcome::Witness(t),
        seconds: 0.0,
    });
    if opts.warm_start && best.len() > lower_bound {
        let greedy = greedy_cover(&filter, &complex);
        if greedy.len() < best.len() {
            probes.push(KProbe {
                k: greedy.len(),
                outcome: ProbeOutcome::Witness(greedy.len()),
                seconds: 0.0,
            });
            best = greedy;
        }
    }

    let probe = |k: usize, probes: &mut Vec<KProbe>, timings: &mut Timings| -> Result<Step> {
        let e = Instant::now();
        let cnf = encode_with_forbidden(
            &complex,
            &zippers,
            k,
            &forbidden,
            opts.encode.symmetry_breaking,
        );
        timings.encode += e.elapsed();
        let s = Instant::now();
        let outcome = solver.solve(&cnf, opts.timeout)?;
        let secs = s.elapsed();
        timings.solve += secs;
        let (recorded, step) = match outcome {
            SatOutcome::Sat(model) => {
                let cover = decode_checked(&model, &cnf, &complex, &zippers)?;
                (ProbeOutcome::Sat(cover.len()), Step::Found(cover))
            }
            SatOutcome::Unsat => (ProbeOutcome::Unsat, Step::Impossible),
            SatOutcome::Timeout => (ProbeOutcome::Timeout, Step::GaveUp),
        };
        probes.push(KProbe {
            k,
            outcome: recorded,
            seconds: secs.as_secs_f64(),
        });
        Ok(step)
    };

    // `best` is a known valid cover; every k <= floor is known impossible.
    let mut floor = lower_bound - 1;
    let mut timed_out = false;
    while best.len() > floor + 1 {
        let k = if opts.binary_search {
            floor + (best.len() - floor) / 2
        } else {
            best.len() - 1
        };
        match probe(k, &mut probes, &mut timings)? {
            Step::Found(cover) => best = cover,
            Step::Impossible => floor = k,
            Step::GaveUp => {
                timed_out = true;
                break;
            }
        }
    }
    let certified = !timed_out;
    if certified && best.len() > 1 && floor + 1 == best.len() && floor + 1 == lower_bound {
        let last_solved = probes
            .iter()
            .any(|p| p.k == floor && p.outcome == ProbeOutcome::Unsat);
        if !last_solved {
            probes.push(KProbe {
                k: floor,
                outcome: ProbeOutcome::BelowLowerBound(lower_bound),
                seconds: 0.0,
            });
        }
    }

    let minimal = induce_filter(&filter, &complex, &best)?;
    check_postcondition(&filter, &minimal)?;
    Ok(MinimizeReport {
        minimal_size: minimal.num_states(),
        minimal_filter: minimal,
        input: filter,
        determinized,
        single_output_path,
        cover: best,
        probes,
        certified,
        timings,
        zipper_count: zippers.len(),
        face_count: complex.maximal_faces().len(),
        lower_bound,
    })
}

enum Step {
    Found(Cover),
    Impossible,
    GaveUp,
}

/// The emitted filter must be deterministic and output simulate the input.
pub fn check_postcondition(input: &PFilter, output: &PFilter) -> Result<()> {
    if let Some(w) = output.nondeterminism_witness() {
        return Err(Error::Postcondition(format!(
            "result is not deterministic: {w}"
        )));
    }
    if let Some(cx) = output_simulates(output, input).counterexample {
        return Err(Error::Postcondition(format!(
            "result does not output simulate: {cx}"
        )));
    }
    Ok(())
}

/// Merges maximal faces into the identity cover one at a time, closing under
/// successor sets, and keeps each merge that shrinks the cover.
pub fn greedy_cover(f: &PFilter, complex: &SimplicialComplex) -> Cover {
    let mut faces: Vec<&StateSet> = complex
        .maximal_faces()
        .iter()
        .filter(|s| s.len() >= 2)
        .collect();
    faces.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut current: Vec<StateSet> = Cover::singletons(f.num_states()).parts().to_vec();
    for face in faces {
        if current.iter().any(|p| face.is_subset(p)) {
            continue;
        }
        let mut parts = current.clone();
        parts.push(face.clone());
        close_under_successors(f, &mut parts);
        let reduced = drop_subsumed(parts);
        if reduced.len() < current.len() {
            current = reduced;
        }
    }
    let cover = Cover::new(current);
    debug_assert!(part_level_violation(f, &cover).is_none());
    cover
}

fn close_under_successors(f: &PFilter, parts: &mut Vec<StateSet>) {
    let mut i = 0;
    while i < parts.len() {
        if parts[i].len() >= 2 {
            for y in 0..f.alphabet().len() {
                let w = successor_set(f, &parts[i], y);
                // successors of a face form a reachable config, hence a face
                if w.len() >= 2 && !parts.iter().any(|q| w.is_subset(q)) {
                    parts.push(w);
                }
            }
        }
        i += 1;
    }
}

fn drop_subsumed(parts: Vec<StateSet>) -> Vec<StateSet> {
    let unique: BTreeSet<StateSet> = parts.into_iter().collect();
    let all: Vec<StateSet> = unique.into_iter().collect();
    all.iter()
        .filter(|p| !all.iter().any(|q| q != *p && p.is_subset(q)))
        .cloned()
        .collect()
}

/// Smallest result over all single-output restrictions of a multi-output
/// filter, each minimized on its own.
#[derive(Clone, Debug)]
pub struct ChoiceReport {
    pub best: MinimizeReport,
    pub best_choice: BTreeMap<String, String>,
    pub choices: usize,
    /// Minimal size for each enumerated choice, in enumeration order.
    pub sizes: Vec<usize>,
}

/// Upper bound on the number of choices enumerated.
pub const MAX_CHOICES: usize = 1 << 16;

pub fn minimize_so_by_choice_enumeration(
    f: &PFilter,
    solver: &dyn SatSolver,
    opts: &MinimizeOptions,
) -> Result<ChoiceReport> {
    let (filter, _) = prepare_input(f);
    let options: Vec<Vec<String>> = filter
        .states()
        .map(|v| filter.output_names(v).into_iter().collect())
        .collect();
    let total = options
        .iter()
        .try_fold(1usize, |acc, o| acc.checked_mul(o.len()))
        .filter(|&n| n <= MAX_CHOICES)
        .ok_or(Error::TooManyChoices(MAX_CHOICES))?;
    let so_opts = MinimizeOptions {
        mode: Mode::So,
        ..opts.clone()
    };
    let mut best: Option<(MinimizeReport, BTreeMap<String, String>)> = None;
    let mut sizes = Vec::with_capacity(total);
    let mut idx = vec![0usize; options.len()];
    loop {
        let choice: BTreeMap<String, String> = filter
            .states()
            .map(|v| (filter.state_name(v).to_string(), options[v][idx[v]].clone()))
            .collect();
        let report = minimize_with_choice(&filter, &choice, solver, &so_opts)?;
        sizes.push(report.minimal_size);
        if best
            .as_ref()
            .is_none_or(|(b, _)| report.minimal_size < b.minimal_size)
        {
            best = Some((report, choice));
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let (best, best_choice) = best.expect("at least one choice");
                return Ok(ChoiceReport {
                    best,
                    best_choice,
                    choices: total,
                    sizes,
                });
            }
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Minimizes the single-output restriction given by `choice` (state name to
/// the one label it keeps; unlisted states keep their outputs).
pub fn minimize_with_choice(
    f: &PFilter,
    choice: &BTreeMap<String, String>,
    solver: &dyn SatSolver,
    opts: &MinimizeOptions,
) -> Result<MinimizeReport> {
    let outputs: BTreeMap<String, BTreeSet<String>> = choice
        .iter()
        .map(|(s, l)| (s.clone(), BTreeSet::from([l.clone()])))
        .collect();
    for (s, l) in choice {
        let v = f.state_id(s)?;
        if !f.output_names(v).contains(l) {
            return Err(Error::Parse(format!("state `{s}` cannot output `{l}`")));
        }
    }
    let restricted = f.with_outputs(&outputs)?;
    let report = minimize(&restricted, solver, opts)?;
    // A simulator of the restriction also simulates the original.
    check_postcondition(f, &report.minimal_filter)?;
    Ok(report)
}

/// Greedy step-wise merging baseline.
///
/// States conflict when their outputs differ or some common observation
/// leads to conflicting states. The conflict graph is colored greedily and
/// each color class becomes one state. Compatibility is not transitive, so a
/// class can have successors in several classes: the result may be
/// non-deterministic and may fail to output simulate `f`. Check it with
/// [`verify_solution`](crate::oracle::verify_solution).
pub fn baseline_stepwise_heuristic(f: &PFilter) -> Result<PFilter> {
    f.require_deterministic()?;
    let n = f.num_states();
    let mut conflict = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            conflict[a][b] = f.outputs(a) != f.outputs(b);
        }
    }
    propagate_upstream(f, &mut conflict);
    let color = greedy_coloring(&conflict);
    let classes: Vec<StateSet> = {
        let mut by_color: BTreeMap<usize, StateSet> = BTreeMap::new();
        for v in 0..n {
            by_color.entry(color[v]).or_default().insert(v);
        }
        by_color.into_values().collect()
    };
    let names: Vec<String> = classes.iter().map(|c| f.set_name(c)).collect();
    let mut b = PFilterBuilder::new();
    for (c, name) in classes.iter().zip(&names) {
        let first = *c.iter().next().expect("classes are nonempty");
        b.add_state(name, f.output_names(first));
    }
    for &v in f.initial() {
        b.add_initial(&names[color_class(&classes, v)]);
    }
    for y in f.alphabet() {
        b.add_observation(y);
    }
    for (&(v, w), ys) in f.edges() {
        for &y in ys {
            b.add_transition(
                &names[color_class(&classes, v)],
                &names[color_class(&classes, w)],
                f.obs_name(y),
            );
        }
    }
    b.build()
}

fn color_class(classes: &[StateSet], v: usize) -> usize {
    classes
        .iter()
        .position(|c| c.contains(&v))
        .expect("every state is colored")
}

fn propagate_upstream(f: &PFilter, conflict: &mut [Vec<bool>]) {
    let n = f.num_states();
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in a + 1..n {
                if conflict[a][b] {
                    continue;
                }
                let bad = (0..f.alphabet().len()).any(|y| match (f.next(a, y), f.next(b, y)) {
                    (Some(x), Some(z)) => conflict[x][z],
                    _ => false,
                });
                if bad {
                    conflict[a][b] = true;
                    conflict[b][a] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

fn greedy_coloring(conflict: &[Vec<bool>]) -> Vec<usize> {
    let n = conflict.len();
    let mut color = vec![usize::MAX; n];
    for v in 0..n {
        let used: BTreeSet<usize> = (0..v)
            .filter(|&u| conflict[v][u])
            .map(|u| color[u])
            .collect();
        color[v] = (0..).find(|c| !used.contains(c)).expect("unbounded range");
    }
    color
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::CdclSolver;

    fn distinct() -> PFilter {
        PFilter::builder()
            .state("a", ["1"])
            .state("b", ["2"])
            .state("c", ["3"])
            .initial("a")
            .transition("a", "b", "x")
            .transition("b", "c", "x")
            .build()
            .unwrap()
    }

    #[test]
    fn all_distinct_outputs_stay_put() {
        let f = distinct();
        let r = minimize(&f, &CdclSolver, &MinimizeOptions::default()).unwrap();
        assert_eq!(r.minimal_size, 3);
        assert!(r.certified);
        assert!(crate::filter::deterministic_isomorphism(&f, &r.minimal_filter).is_some());
    }

    #[test]
    fn chain_of_equal_outputs_collapses() {
        let f = PFilter::builder()
            .state("a", ["o"])
            .state("b", ["o"])
            .state("c", ["o"])
            .initial("a")
            .transition("a", "b", "x")
            .transition("b", "c", "x")
            .build()
            .unwrap();
        for binary_search in [false, true] {
            let opts = MinimizeOptions {
                binary_search,
                warm_start: false,
                ..MinimizeOptions::default()
            };
            let r = minimize(&f, &CdclSolver, &opts).unwrap();
            assert_eq!(r.minimal_size, 1);
            assert!(r.certified);
        }
    }

    #[test]
    fn nondeterministic_input_is_determinized() {
        let f = PFilter::builder()
            .state("s", ["o"])
            .state("p", ["x"])
            .state("q", ["x"])
            .initial("s")
            .transition("s", "p", "a")
            .transition("s", "q", "a")
            .build()
            .unwrap();
        let r = minimize(&f, &CdclSolver, &MinimizeOptions::default()).unwrap();
        assert!(r.determinized);
        assert_eq!(r.minimal_size, 2);
        assert!(output_simulates(&r.minimal_filter, &f).holds());
    }

    #[test]
    fn so_mode_rejects_multi_output() {
        let f = PFilter::builder()
            .state("a", ["x", "y"])
            .initial("a")
            .build()
            .unwrap();
        let opts = MinimizeOptions {
            mode: Mode::So,
            ..MinimizeOptions::default()
        };
        assert!(matches!(
            minimize(&f, &CdclSolver, &opts),
            Err(Error::NotSingleOutput)
        ));
    }

    #[test]
    fn baseline_on_conflict_free_filter_merges_everything() {
        let f = PFilter::builder()
            .state("a", ["o"])
            .state("b", ["o"])
            .initial("a")
            .transition("a", "b", "x")
            .transition("b", "a", "x")
            .build()
            .unwrap();
        let g = baseline_stepwise_heuristic(&f).unwrap();
        assert_eq!(g.num_states(), 1);
        assert!(output_simulates(&g, &f).holds());
    }

    #[test]
    fn choice_enumeration_on_single_output_matches_minimize() {
        let f = distinct();
        let c = minimize_so_by_choice_enumeration(&f, &CdclSolver, &MinimizeOptions::default())
            .unwrap();
        assert_eq!(c.choices, 1);
        assert_eq!(c.best.minimal_size, 3);
    }
}
