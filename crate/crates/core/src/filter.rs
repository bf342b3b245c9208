//! Procrustean filters (p-filters) and their trace semantics.
//!
//! A filter is a labeled transition system over observation symbols whose
//! states carry nonempty sets of output labels. States, observations and
//! labels are interned: operations work on dense indices, while the string
//! names are kept for I/O and for comparing two filters with each other.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Dense index of a state inside one filter.
pub type StateId = usize;
/// Dense index of an observation symbol inside one filter.
pub type ObsId = usize;
/// Dense index of an output label inside one filter.
pub type LabelId = usize;
/// An ordered set of states.
pub type StateSet = BTreeSet<StateId>;

/// A set of filter states reached jointly by one observation string.
///
/// The empty config means the string crashed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config(Vec<StateId>);

impl Config {
    pub fn new(members: impl IntoIterator<Item = StateId>) -> Self {
        let mut v: Vec<StateId> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Config(v)
    }

    pub fn empty() -> Self {
        Config(Vec::new())
    }

    pub fn singleton(v: StateId) -> Self {
        Config(vec![v])
    }

    pub fn members(&self) -> &[StateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: StateId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn to_set(&self) -> StateSet {
        self.0.iter().copied().collect()
    }
}

impl FromIterator<StateId> for Config {
    fn from_iter<I: IntoIterator<Item = StateId>>(iter: I) -> Self {
        Config::new(iter)
    }
}

/// Incrementally assembles a [`PFilter`] from names.
#[derive(Clone, Debug, Default)]
pub struct PFilterBuilder {
    states: Vec<(String, BTreeSet<String>)>,
    initial: Vec<String>,
    alphabet: BTreeSet<String>,
    transitions: Vec<(String, String, String)>,
}

impl PFilterBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a state with its output labels.
    pub fn state<I, S>(mut self, name: &str, outputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.add_state(name, outputs);
        self
    }

    pub fn add_state<I, S>(&mut self, name: &str, outputs: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states.push((
            name.to_string(),
            outputs.into_iter().map(Into::into).collect(),
        ));
    }

    pub fn initial(mut self, name: &str) -> Self {
        self.add_initial(name);
        self
    }

    pub fn add_initial(&mut self, name: &str) {
        self.initial.push(name.to_string());
    }

    /// Adds an observation to the alphabet even if no transition carries it.
    pub fn observation(mut self, obs: &str) -> Self {
        self.alphabet.insert(obs.to_string());
        self
    }

    pub fn add_observation(&mut self, obs: &str) {
        self.alphabet.insert(obs.to_string());
    }

    pub fn transition(mut self, from: &str, to: &str, obs: &str) -> Self {
        self.add_transition(from, to, obs);
        self
    }

    pub fn add_transition(&mut self, from: &str, to: &str, obs: &str) {
        self.alphabet.insert(obs.to_string());
        self.transitions
            .push((from.to_string(), to.to_string(), obs.to_string()));
    }

    pub fn build(self) -> Result<PFilter> {
        let mut index = HashMap::new();
        let mut names = Vec::with_capacity(self.states.len());
        for (name, _) in &self.states {
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::DuplicateState(name.clone()));
            }
            names.push(name.clone());
        }
        let labels: Vec<String> = self
            .states
            .iter()
            .flat_map(|(_, outs)| outs.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let label_index: HashMap<&str, LabelId> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut outputs = Vec::with_capacity(names.len());
        for (name, outs) in &self.states {
            if outs.is_empty() {
                return Err(Error::EmptyOutputs(name.clone()));
            }
            outputs.push(outs.iter().map(|l| label_index[l.as_str()]).collect());
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::UnknownState(n.to_string()))
        };
        let mut initial = StateSet::new();
        for n in &self.initial {
            initial.insert(lookup(n)?);
        }
        if initial.is_empty() {
            return Err(Error::NoInitialState);
        }
        let alphabet: Vec<String> = self.alphabet.into_iter().collect();
        let obs_index: HashMap<String, ObsId> = alphabet
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clone(), i))
            .collect();
        let mut edges: BTreeMap<(StateId, StateId), BTreeSet<ObsId>> = BTreeMap::new();
        for (from, to, obs) in &self.transitions {
            let key = (lookup(from)?, lookup(to)?);
            edges.entry(key).or_default().insert(obs_index[obs]);
        }
        Ok(PFilter::from_parts(
            names, initial, alphabet, labels, outputs, edges,
        ))
    }
}

/// A procrustean filter: states, initial states, observation alphabet,
/// edge-labeled transition relation and per-state output sets.
#[derive(Clone, Debug)]
pub struct PFilter {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    initial: StateSet,
    alphabet: Vec<String>,
    obs_index: HashMap<String, ObsId>,
    labels: Vec<String>,
    outputs: Vec<BTreeSet<LabelId>>,
    edges: BTreeMap<(StateId, StateId), BTreeSet<ObsId>>,
    // succ[v][y] = sorted targets of v under y
    succ: Vec<Vec<Vec<StateId>>>,
}

impl PFilter {
    fn from_parts(
        names: Vec<String>,
        initial: StateSet,
        alphabet: Vec<String>,
        labels: Vec<String>,
        outputs: Vec<BTreeSet<LabelId>>,
        edges: BTreeMap<(StateId, StateId), BTreeSet<ObsId>>,
    ) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let obs_index = alphabet
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clone(), i))
            .collect();
        let mut succ = vec![vec![Vec::new(); alphabet.len()]; names.len()];
        for (&(v, w), ys) in &edges {
            for &y in ys {
                succ[v][y].push(w);
            }
        }
        for row in &mut succ {
            for targets in row.iter_mut() {
                targets.sort_unstable();
            }
        }
        PFilter {
            names,
            index,
            initial,
            alphabet,
            obs_index,
            labels,
            outputs,
            edges,
            succ,
        }
    }

    pub fn builder() -> PFilterBuilder {
        PFilterBuilder::new()
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn state_name(&self, v: StateId) -> &str {
        &self.names[v]
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn obs_name(&self, y: ObsId) -> &str {
        &self.alphabet[y]
    }

    pub fn obs_id(&self, name: &str) -> Result<ObsId> {
        self.obs_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownObservation(name.to_string()))
    }

    /// Translates a string of observation names into indices.
    pub fn parse_word<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<ObsId>> {
        word.iter().map(|y| self.obs_id(y.as_ref())).collect()
    }

    pub fn word_names(&self, word: &[ObsId]) -> Vec<String> {
        word.iter().map(|&y| self.alphabet[y].clone()).collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_name(&self, l: LabelId) -> &str {
        &self.labels[l]
    }

    pub fn outputs(&self, v: StateId) -> &BTreeSet<LabelId> {
        &self.outputs[v]
    }

    pub fn output_names(&self, v: StateId) -> BTreeSet<String> {
        self.outputs[v]
            .iter()
            .map(|&l| self.labels[l].clone())
            .collect()
    }

    /// The edge-labeled transition relation: `(from, to) -> observations`.
    pub fn edges(&self) -> &BTreeMap<(StateId, StateId), BTreeSet<ObsId>> {
        &self.edges
    }

    /// All `y`-successors of `v`, sorted.
    pub fn successors(&self, v: StateId, y: ObsId) -> &[StateId] {
        &self.succ[v][y]
    }

    /// Deterministic view: the first `y`-successor of `v`, if any.
    pub fn next(&self, v: StateId, y: ObsId) -> Option<StateId> {
        self.succ[v][y].first().copied()
    }

    pub fn is_single_output(&self) -> bool {
        self.outputs.iter().all(|o| o.len() == 1)
    }

    fn check_state(&self, v: StateId) -> Result<()> {
        if v < self.num_states() {
            Ok(())
        } else {
            Err(Error::StateOutOfRange(v))
        }
    }

    fn check_word(&self, s: &[ObsId]) -> Result<()> {
        match s.iter().find(|&&y| y >= self.alphabet.len()) {
            Some(&y) => Err(Error::ObservationOutOfRange(y)),
            None => Ok(()),
        }
    }

    /// One BFS step: all `y`-successors of the members of `c`.
    pub fn step(&self, c: &Config, y: ObsId) -> Config {
        let mut out = Vec::new();
        for &v in c.members() {
            out.extend_from_slice(&self.succ[v][y]);
        }
        Config::new(out)
    }

    fn trace(&self, start: Config, s: &[ObsId]) -> Config {
        let mut c = start;
        for &y in s {
            if c.is_empty() {
                break;
            }
            c = self.step(&c, y);
        }
        c
    }

    /// States reached by `s` from `v`; empty iff `s` crashes from `v`.
    pub fn reached_from(&self, v: StateId, s: &[ObsId]) -> Result<Config> {
        self.check_state(v)?;
        self.check_word(s)?;
        Ok(self.trace(Config::singleton(v), s))
    }

    /// States reached by `s` from any initial state.
    pub fn reached(&self, s: &[ObsId]) -> Result<Config> {
        self.check_word(s)?;
        Ok(self.trace(Config::new(self.initial.iter().copied()), s))
    }

    /// Union of the outputs of the members of `c`.
    pub fn config_outputs(&self, c: &Config) -> BTreeSet<LabelId> {
        c.members()
            .iter()
            .flat_map(|&v| self.outputs[v].iter().copied())
            .collect()
    }

    /// Filter output for `s`; empty iff `s` is not in the language.
    pub fn outputs_of(&self, s: &[ObsId]) -> Result<BTreeSet<LabelId>> {
        Ok(self.config_outputs(&self.reached(s)?))
    }

    /// Same as [`outputs_of`](Self::outputs_of) but by label name.
    pub fn output_names_of(&self, s: &[ObsId]) -> Result<BTreeSet<String>> {
        Ok(self
            .outputs_of(s)?
            .into_iter()
            .map(|l| self.labels[l].clone())
            .collect())
    }

    pub fn in_language(&self, s: &[ObsId]) -> Result<bool> {
        Ok(!self.reached(s)?.is_empty())
    }

    /// Single initial state and no state with two distinct successors under
    /// one observation.
    pub fn is_deterministic(&self) -> bool {
        self.nondeterminism_witness().is_none()
    }

    /// A human-readable reason why the filter is not deterministic.
    pub fn nondeterminism_witness(&self) -> Option<String> {
        if self.initial.len() != 1 {
            return Some(format!("{} initial states", self.initial.len()));
        }
        for v in self.states() {
            for (y, targets) in self.succ[v].iter().enumerate() {
                if targets.len() > 1 {
                    return Some(format!(
                        "state `{}` has {} successors under `{}`",
                        self.names[v],
                        targets.len(),
                        self.alphabet[y]
                    ));
                }
            }
        }
        None
    }

    pub(crate) fn require_deterministic(&self) -> Result<()> {
        match self.nondeterminism_witness() {
            None => Ok(()),
            Some(w) => Err(Error::NotDeterministic(w)),
        }
    }

    /// States reachable from the initial states.
    pub fn reachable_states(&self) -> StateSet {
        let mut seen: StateSet = self.initial.clone();
        let mut queue: VecDeque<StateId> = self.initial.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for targets in &self.succ[v] {
                for &w in targets {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen
    }

    /// Restricts the filter to `keep`, preserving the relative state order.
    pub fn restrict(&self, keep: &StateSet) -> PFilter {
        let mut b = PFilterBuilder::new();
        for &v in keep {
            b.add_state(&self.names[v], self.output_names(v));
        }
        for &v in self.initial.intersection(keep) {
            b.add_initial(&self.names[v]);
        }
        for y in &self.alphabet {
            b.add_observation(y);
        }
        for (&(v, w), ys) in &self.edges {
            if keep.contains(&v) && keep.contains(&w) {
                for &y in ys {
                    b.add_transition(&self.names[v], &self.names[w], &self.alphabet[y]);
                }
            }
        }
        b.build().expect("restriction of a valid filter is valid")
    }

    /// Drops unreachable states; returns the pruned filter and the names of
    /// the removed states.
    pub fn prune_unreachable(&self) -> (PFilter, Vec<String>) {
        let keep = self.reachable_states();
        if keep.len() == self.num_states() {
            return (self.clone(), Vec::new());
        }
        let removed = self
            .states()
            .filter(|v| !keep.contains(v))
            .map(|v| self.names[v].clone())
            .collect();
        (self.restrict(&keep), removed)
    }

    /// Copy of the filter with the outputs replaced by `outputs`, keyed by
    /// state name. States absent from the map keep their outputs.
    pub fn with_outputs(&self, outputs: &BTreeMap<String, BTreeSet<String>>) -> Result<PFilter> {
        let mut b = self.to_builder_without_states();
        for v in self.states() {
            let outs = outputs
                .get(&self.names[v])
                .cloned()
                .unwrap_or_else(|| self.output_names(v));
            b.add_state(&self.names[v], outs);
        }
        b.build()
    }

    fn to_builder_without_states(&self) -> PFilterBuilder {
        let mut b = PFilterBuilder::new();
        for &v in &self.initial {
            b.add_initial(&self.names[v]);
        }
        for y in &self.alphabet {
            b.add_observation(y);
        }
        for (&(v, w), ys) in &self.edges {
            for &y in ys {
                b.add_transition(&self.names[v], &self.names[w], &self.alphabet[y]);
            }
        }
        b
    }

    /// Returns a builder pre-populated with this filter.
    pub fn to_builder(&self) -> PFilterBuilder {
        let mut b = self.to_builder_without_states();
        let mut states = Vec::new();
        for v in self.states() {
            states.push((self.names[v].clone(), self.output_names(v)));
        }
        b.states = states;
        b
    }

    /// Powerset construction. Each reachable set of states becomes one state
    /// named by its sorted member names joined with `+`, outputting the union
    /// of the member outputs.
    pub fn determinize(&self) -> PFilter {
        let start = Config::new(self.initial.iter().copied());
        let mut ids: HashMap<Config, usize> = HashMap::new();
        let mut order = vec![start.clone()];
        ids.insert(start, 0);
        let mut trans: Vec<(usize, usize, ObsId)> = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let c = order[i].clone();
            for y in 0..self.alphabet.len() {
                let next = self.step(&c, y);
                if next.is_empty() {
                    continue;
                }
                let j = match ids.get(&next) {
                    Some(&j) => j,
                    None => {
                        ids.insert(next.clone(), order.len());
                        order.push(next);
                        order.len() - 1
                    }
                };
                trans.push((i, j, y));
            }
            i += 1;
        }
        let names: Vec<String> = order.iter().map(|c| self.set_name(c.members())).collect();
        let mut b = PFilterBuilder::new();
        for (c, name) in order.iter().zip(&names) {
            let outs: BTreeSet<String> = self
                .config_outputs(c)
                .into_iter()
                .map(|l| self.labels[l].clone())
                .collect();
            b.add_state(name, outs);
        }
        b.add_initial(&names[0]);
        for y in &self.alphabet {
            b.add_observation(y);
        }
        for (i, j, y) in trans {
            b.add_transition(&names[i], &names[j], &self.alphabet[y]);
        }
        b.build()
            .expect("powerset construction yields a valid filter")
    }

    /// Canonical name for a set of states: sorted member names joined by `+`.
    pub fn set_name<'a>(&self, members: impl IntoIterator<Item = &'a StateId>) -> String {
        let mut parts: Vec<&str> = members
            .into_iter()
            .map(|&v| self.names[v].as_str())
            .collect();
        parts.sort_unstable();
        parts.join("+")
    }
}

impl fmt::Display for PFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "p-filter: {} states, {} observations, {} labels",
            self.num_states(),
            self.alphabet.len(),
            self.labels.len()
        )?;
        for v in self.states() {
            let init = if self.initial.contains(&v) { "*" } else { " " };
            let outs: Vec<String> = self.output_names(v).into_iter().collect();
            write!(f, "{init}{} [{}]", self.names[v], outs.join(","))?;
            for (y, ts) in self.succ[v].iter().enumerate() {
                for &w in ts {
                    write!(f, " {}->{}", self.alphabet[y], self.names[w])?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Which condition an output-simulation counterexample violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The candidate produces no output (it crashed).
    EmptyOutput,
    /// The candidate produces labels the reference does not.
    NotSubset { extra: BTreeSet<String> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub word: Vec<String>,
    pub violation: Violation,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = if self.word.is_empty() {
            "ε".to_string()
        } else {
            self.word.join(" ")
        };
        match &self.violation {
            Violation::EmptyOutput => write!(f, "string `{w}`: candidate crashes"),
            Violation::NotSubset { extra } => {
                let e: Vec<&str> = extra.iter().map(String::as_str).collect();
                write!(
                    f,
                    "string `{w}`: candidate outputs {{{}}} not allowed",
                    e.join(",")
                )
            }
        }
    }
}

/// Outcome of an output-simulation check, with a shortest witness on failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationVerdict {
    pub counterexample: Option<Counterexample>,
}

impl SimulationVerdict {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks whether `candidate` output simulates `reference`: for every string
/// in the reference language the candidate yields a nonempty subset of the
/// reference outputs.
///
/// Joint BFS over pairs of configs; the witness is a shortest violating string.
pub fn output_simulates(candidate: &PFilter, reference: &PFilter) -> SimulationVerdict {
    // observation of the reference -> observation of the candidate
    let obs_map: Vec<Option<ObsId>> = reference
        .alphabet
        .iter()
        .map(|y| candidate.obs_index.get(y).copied())
        .collect();
    // label of the candidate -> label of the reference
    let label_map: Vec<Option<LabelId>> = candidate
        .labels
        .iter()
        .map(|l| reference.labels.iter().position(|r| r == l))
        .collect();

    type Node = (Config, Config);
    let start: Node = (
        Config::new(reference.initial.iter().copied()),
        Config::new(candidate.initial.iter().copied()),
    );
    let mut parent: HashMap<Node, Option<(Node, ObsId)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        let (rc, cc) = &node;
        let violation = check_pair(reference, candidate, rc, cc, &label_map);
        if let Some(violation) = violation {
            let mut word = Vec::new();
            let mut cur = node.clone();
            while let Some(Some((prev, y))) = parent.get(&cur) {
                word.push(reference.alphabet[*y].clone());
                cur = prev.clone();
            }
            word.reverse();
            return SimulationVerdict {
                counterexample: Some(Counterexample { word, violation }),
            };
        }
        for y in 0..reference.alphabet.len() {
            let rn = reference.step(rc, y);
            if rn.is_empty() {
                continue;
            }
            let cn = match obs_map[y] {
                Some(cy) => candidate.step(cc, cy),
                None => Config::empty(),
            };
            let next = (rn, cn);
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((node.clone(), y)));
                queue.push_back(next);
            }
        }
    }
    SimulationVerdict {
        counterexample: None,
    }
}

fn check_pair(
    reference: &PFilter,
    candidate: &PFilter,
    rc: &Config,
    cc: &Config,
    label_map: &[Option<LabelId>],
) -> Option<Violation> {
    let cand = candidate.config_outputs(cc);
    if cand.is_empty() {
        return Some(Violation::EmptyOutput);
    }
    let allowed = reference.config_outputs(rc);
    let extra: BTreeSet<String> = cand
        .into_iter()
        .filter(|&l| !matches!(label_map[l], Some(r) if allowed.contains(&r)))
        .map(|l| candidate.labels[l].clone())
        .collect();
    if extra.is_empty() {
        None
    } else {
        Some(Violation::NotSubset { extra })
    }
}

/// Isomorphism check for deterministic filters: a bijection of states that
/// maps the initial state, transitions (by observation name) and outputs (by
/// label name) onto each other.
///
/// Returns the mapping `a-state -> b-state` if one exists.
pub fn deterministic_isomorphism(a: &PFilter, b: &PFilter) -> Option<Vec<StateId>> {
    if !a.is_deterministic() || !b.is_deterministic() || a.num_states() != b.num_states() {
        return None;
    }
    if a.alphabet != b.alphabet || a.labels != b.labels {
        return None;
    }
    let ia = *a.initial.iter().next()?;
    let ib = *b.initial.iter().next()?;
    let mut map = vec![None; a.num_states()];
    let mut used = vec![false; b.num_states()];
    map[ia] = Some(ib);
    used[ib] = true;
    let mut queue = VecDeque::from([ia]);
    while let Some(v) = queue.pop_front() {
        let w = map[v]?;
        if a.outputs[v] != b.outputs[w] {
            return None;
        }
        for y in 0..a.alphabet.len() {
            match (a.next(v, y), b.next(w, y)) {
                (None, None) => {}
                (Some(v2), Some(w2)) => match map[v2] {
                    Some(m) if m == w2 => {}
                    Some(_) => return None,
                    None => {
                        if used[w2] {
                            return None;
                        }
                        map[v2] = Some(w2);
                        used[w2] = true;
                        queue.push_back(v2);
                    }
                },
                _ => return None,
            }
        }
    }
    map.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> PFilter {
        PFilter::builder()
            .state("a", ["x"])
            .state("b", ["x"])
            .state("c", ["y"])
            .initial("a")
            .transition("a", "b", "0")
            .transition("b", "c", "1")
            .build()
            .unwrap()
    }

    #[test]
    fn empty_word_reaches_origin() {
        let f = chain();
        assert_eq!(f.reached_from(1, &[]).unwrap(), Config::singleton(1));
        assert_eq!(f.reached(&[]).unwrap(), Config::singleton(0));
        assert!(f.in_language(&[]).unwrap());
    }

    #[test]
    fn crashed_prefix_stays_crashed() {
        let f = chain();
        let one = f.obs_id("1").unwrap();
        let zero = f.obs_id("0").unwrap();
        assert!(!f.in_language(&[one]).unwrap());
        assert!(!f.in_language(&[one, zero]).unwrap());
        assert!(f.outputs_of(&[one]).unwrap().is_empty());
    }

    #[test]
    fn validation_errors() {
        let f = chain();
        assert!(matches!(
            f.reached_from(7, &[]),
            Err(Error::StateOutOfRange(7))
        ));
        assert!(matches!(
            f.reached(&[9]),
            Err(Error::ObservationOutOfRange(9))
        ));
        assert!(matches!(
            f.parse_word(&["z"]),
            Err(Error::UnknownObservation(_))
        ));
        let dup = PFilter::builder()
            .state("a", ["x"])
            .state("a", ["y"])
            .initial("a")
            .build();
        assert!(matches!(dup, Err(Error::DuplicateState(_))));
        let empty = PFilter::builder()
            .state("a", Vec::<String>::new())
            .initial("a")
            .build();
        assert!(matches!(empty, Err(Error::EmptyOutputs(_))));
        let no_init = PFilter::builder().state("a", ["x"]).build();
        assert!(matches!(no_init, Err(Error::NoInitialState)));
        let bad_edge = PFilter::builder()
            .state("a", ["x"])
            .initial("a")
            .transition("a", "q", "0")
            .build();
        assert!(matches!(bad_edge, Err(Error::UnknownState(_))));
    }

    #[test]
    fn determinism() {
        assert!(chain().is_deterministic());
        let nd = PFilter::builder()
            .state("w1", ["x"])
            .state("w5", ["x"])
            .state("w6", ["x"])
            .initial("w1")
            .transition("w1", "w5", "a")
            .transition("w1", "w6", "a")
            .build()
            .unwrap();
        assert!(!nd.is_deterministic());
    }

    #[test]
    fn determinize_merges_successors() {
        let nd = PFilter::builder()
            .state("s", ["o"])
            .state("p", ["x"])
            .state("q", ["y"])
            .initial("s")
            .transition("s", "p", "a")
            .transition("s", "q", "a")
            .build()
            .unwrap();
        let d = nd.determinize();
        assert!(d.is_deterministic());
        assert_eq!(d.num_states(), 2);
        let merged = d.state_id("p+q").unwrap();
        let names: Vec<String> = d.output_names(merged).into_iter().collect();
        assert_eq!(names, ["x", "y"]);
    }

    #[test]
    fn determinize_of_deterministic_is_isomorphic() {
        let f = chain();
        assert!(deterministic_isomorphism(&f, &f.determinize()).is_some());
    }

    #[test]
    fn simulation_is_reflexive_and_reports_witness() {
        let f = chain();
        assert!(output_simulates(&f, &f).holds());
        let g = f
            .with_outputs(&BTreeMap::from([(
                "c".to_string(),
                BTreeSet::from(["x".to_string()]),
            )]))
            .unwrap();
        let v = output_simulates(&g, &f);
        let cx = v.counterexample.unwrap();
        assert_eq!(cx.word, ["0", "1"]);
        assert!(matches!(cx.violation, Violation::NotSubset { .. }));
    }

    #[test]
    fn prune_reports_removed_states() {
        let f = PFilter::builder()
            .state("a", ["x"])
            .state("orphan", ["x"])
            .initial("a")
            .build()
            .unwrap();
        let (p, removed) = f.prune_unreachable();
        assert_eq!(p.num_states(), 1);
        assert_eq!(removed, ["orphan"]);
    }
}
