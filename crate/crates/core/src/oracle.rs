//! Independent ground truth for small filters: brute-force minimal covers,
//! exhaustive path and string enumeration, solution verification, and a
//! seeded random filter generator.
//!
//! Nothing here calls into the compatibility, zipper or encoding modules, so
//! results can be compared against the SAT pipeline.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::filter::{
    output_simulates, Counterexample, ObsId, PFilter, PFilterBuilder, StateId, StateSet,
};

/// Default largest filter the brute-force search accepts.
pub const DEFAULT_ORACLE_LIMIT: usize = 10;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub minimal_size: usize,
    pub witness_cover: Cover,
    /// Search nodes visited.
    pub explored: u64,
}

type Mask = u32;

fn mask_of(set: impl IntoIterator<Item = StateId>) -> Mask {
    set.into_iter().fold(0, |m, v| m | 1 << v)
}

fn set_of(mask: Mask) -> StateSet {
    (0..Mask::BITS as usize)
        .filter(|&v| mask >> v & 1 == 1)
        .collect()
}

/// Group compatibility by breadth-first search over tuples of optional
/// states, one slot per member.
fn tuple_group_compatible(f: &PFilter, members: &[StateId]) -> bool {
    let start: Vec<Option<StateId>> = members.iter().map(|&v| Some(v)).collect();
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(tuple) = queue.pop_front() {
        let present: Vec<StateId> = tuple.iter().flatten().copied().collect();
        if present.is_empty() {
            continue;
        }
        let mut common = f.output_names(present[0]);
        for &v in &present[1..] {
            let o = f.output_names(v);
            common.retain(|l| o.contains(l));
        }
        if common.is_empty() {
            return false;
        }
        for y in 0..f.alphabet().len() {
            let next: Vec<Option<StateId>> = tuple
                .iter()
                .map(|s| s.and_then(|v| f.successors(v, y).first().copied()))
                .collect();
            if next.iter().any(Option::is_some) && seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    true
}

/// All group-compatible sets (faces), by checking every subset.
pub fn all_faces(f: &PFilter) -> Result<Vec<StateSet>> {
    f.require_deterministic()?;
    let n = f.num_states();
    if n > 16 {
        return Err(Error::OracleTooLarge {
            states: n,
            limit: 16,
        });
    }
    Ok(face_masks(f).into_iter().map(set_of).collect())
}

fn face_masks(f: &PFilter) -> Vec<Mask> {
    let n = f.num_states();
    let mut faces = Vec::new();
    for mask in 1..(1 as Mask) << n {
        let members: Vec<StateId> = set_of(mask).into_iter().collect();
        // every proper subset must already be a face
        let hereditary = members.len() == 1
            || members
                .iter()
                .all(|&v| faces.binary_search(&(mask & !(1 << v))).is_ok());
        if hereditary && tuple_group_compatible(f, &members) {
            faces.push(mask);
        }
    }
    faces.sort_unstable();
    faces
}

struct Search<'a> {
    n: usize,
    full: Mask,
    faces: &'a [Mask],
    containing: Vec<Vec<Mask>>,
    // succ[v][y] as a mask (0 if none)
    succ: Vec<Vec<Mask>>,
    // vertices sharing a face with v
    friends: Vec<Mask>,
    ny: usize,
    explored: u64,
    seen: HashSet<Vec<Mask>>,
}

impl Search<'_> {
    fn successors(&self, part: Mask, y: ObsId) -> Mask {
        (0..self.n)
            .filter(|&v| part >> v & 1 == 1)
            .fold(0, |m, v| m | self.succ[v][y])
    }

    /// Pairwise face-incompatible uncovered vertices need separate parts.
    fn lower_bound(&self, uncovered: Mask) -> usize {
        let mut chosen: Mask = 0;
        let mut count = 0;
        for v in 0..self.n {
            if uncovered >> v & 1 == 1 && self.friends[v] & chosen == 0 {
                chosen |= 1 << v;
                count += 1;
            }
        }
        count
    }

    fn violation(&self, parts: &[Mask]) -> Option<Mask> {
        for &p in parts {
            if p.count_ones() < 2 {
                continue;
            }
            for y in 0..self.ny {
                let w = self.successors(p, y);
                if w.count_ones() >= 2 && !parts.iter().any(|&q| w & q == w) {
                    return Some(w);
                }
            }
        }
        None
    }

    fn dfs(&mut self, parts: &mut Vec<Mask>, k: usize) -> bool {
        self.explored += 1;
        let mut key = parts.clone();
        key.sort_unstable();
        if !self.seen.insert(key) {
            return false;
        }
        let covered = parts.iter().fold(0, |m, &p| m | p);
        let uncovered = self.full & !covered;
        if parts.len() + self.lower_bound(uncovered) > k {
            return false;
        }
        let options: Vec<Mask> = if uncovered != 0 {
            let v = uncovered.trailing_zeros() as usize;
            self.containing[v].clone()
        } else {
            match self.violation(parts) {
                None => return true,
                Some(w) => self.faces.iter().copied().filter(|&f| f & w == w).collect(),
            }
        };
        if parts.len() == k {
            return false;
        }
        for face in options {
            if parts.contains(&face) {
                continue;
            }
            parts.push(face);
            if self.dfs(parts, k) {
                return true;
            }
            parts.pop();
        }
        false
    }
}

/// Smallest cover by faces satisfying the part-level determinism condition,
/// by iterative deepening over the number of parts.
pub fn brute_force_minimize(f: &PFilter, size_limit: usize) -> Result<OracleResult> {
    f.require_deterministic()?;
    let n = f.num_states();
    if n > size_limit || n > 16 {
        return Err(Error::OracleTooLarge {
            states: n,
            limit: size_limit.min(16),
        });
    }
    let faces = face_masks(f);
    let mut containing = vec![Vec::new(); n];
    let mut friends = vec![0 as Mask; n];
    for &face in &faces {
        for v in 0..n {
            if face >> v & 1 == 1 {
                containing[v].push(face);
                friends[v] |= face;
            }
        }
    }
    for list in &mut containing {
        list.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    }
    let ny = f.alphabet().len();
    let succ = (0..n)
        .map(|v| {
            (0..ny)
                .map(|y| mask_of(f.successors(v, y).iter().copied()))
                .collect()
        })
        .collect();
    let mut search = Search {
        n,
        full: if n == 0 {
            0
        } else {
            Mask::MAX >> (Mask::BITS as usize - n)
        },
        faces: &faces,
        containing,
        succ,
        friends,
        ny,
        explored: 0,
        seen: HashSet::new(),
    };
    for k in 1..=n {
        search.seen.clear();
        let mut parts = Vec::new();
        if search.dfs(&mut parts, k) {
            return Ok(OracleResult {
                minimal_size: k,
                witness_cover: Cover::new(parts.into_iter().map(set_of)),
                explored: search.explored,
            });
        }
    }
    unreachable!("the identity cover always works")
}

/// The universal acceptance gate for a proposed minimal filter.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub deterministic: bool,
    pub simulating: bool,
    pub size: usize,
    pub nondeterminism: Option<String>,
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    pub fn passes(&self) -> bool {
        self.deterministic && self.simulating
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "deterministic: {}", self.deterministic)?;
        if let Some(w) = &self.nondeterminism {
            writeln!(f, "  {w}")?;
        }
        writeln!(f, "output simulating: {}", self.simulating)?;
        if let Some(cx) = &self.counterexample {
            writeln!(f, "  {cx}")?;
        }
        writeln!(f, "states: {}", self.size)
    }
}

pub fn verify_solution(reference: &PFilter, candidate: &PFilter) -> Verdict {
    let nondeterminism = candidate.nondeterminism_witness();
    let counterexample = output_simulates(candidate, reference).counterexample;
    Verdict {
        deterministic: nondeterminism.is_none(),
        simulating: counterexample.is_none(),
        size: candidate.num_states(),
        nondeterminism,
        counterexample,
    }
}

/// States at the end of every path from `v` labeled `s`, by enumerating
/// state sequences one step at a time.
pub fn path_reached(f: &PFilter, v: StateId, s: &[ObsId]) -> StateSet {
    let mut paths: Vec<Vec<StateId>> = vec![vec![v]];
    for &y in s {
        let mut next = Vec::new();
        for p in &paths {
            let last = *p.last().expect("paths are nonempty");
            for w in f.states() {
                if f.edges().get(&(last, w)).is_some_and(|ys| ys.contains(&y)) {
                    let mut q = p.clone();
                    q.push(w);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    paths.iter().map(|p| *p.last().expect("nonempty")).collect()
}

/// Filter output for `s` by path enumeration from every initial state.
pub fn path_outputs(f: &PFilter, s: &[ObsId]) -> BTreeSet<String> {
    f.initial()
        .iter()
        .flat_map(|&v| path_reached(f, v, s))
        .flat_map(|w| f.output_names(w))
        .collect()
}

/// Every string over `num_obs` symbols with length at most `depth`.
pub fn all_strings(num_obs: usize, depth: usize) -> Vec<Vec<ObsId>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &layer {
            for y in 0..num_obs {
                let mut t: Vec<ObsId> = s.clone();
                t.push(y);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Output simulation checked on every string up to `depth`, translating
/// observations and labels by name.
pub fn simulates_up_to(candidate: &PFilter, reference: &PFilter, depth: usize) -> bool {
    all_strings(reference.alphabet().len(), depth)
        .iter()
        .all(|s| {
            let want = path_outputs(reference, s);
            if want.is_empty() {
                return true;
            }
            let names = reference.word_names(s);
            let Ok(cs) = candidate.parse_word(&names) else {
                return false;
            };
            let got = path_outputs(candidate, &cs);
            !got.is_empty() && got.is_subset(&want)
        })
}

/// Parameters for [`random_filter`].
#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub states: usize,
    pub observations: usize,
    pub labels: usize,
    /// Chance that a state gets a second label.
    pub multi_output: f64,
    /// Only edges to later states (plus the spanning tree).
    pub acyclic: bool,
    /// Chance of each extra `(state, observation)` edge.
    pub edge_density: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            states: 6,
            observations: 2,
            labels: 2,
            multi_output: 0.0,
            acyclic: false,
            edge_density: 0.5,
        }
    }
}

/// A deterministic filter with every state reachable from `q0`: a random
/// spanning tree first, then extra edges on free `(state, observation)` slots.
pub fn random_filter(spec: &RandomSpec, seed: u64) -> PFilter {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.states.max(1);
    let ny = spec.observations.max(1);
    let nl = spec.labels.max(1);
    let name = |v: usize| format!("q{v}");
    let mut slot: Vec<Vec<Option<usize>>> = vec![vec![None; ny]; n];
    for v in 1..n {
        // attach to an earlier state with a free slot
        let mut parents: Vec<usize> = (0..v)
            .filter(|&u| slot[u].iter().any(Option::is_none))
            .collect();
        parents.shuffle(&mut rng);
        let u = parents[0];
        let free: Vec<usize> = (0..ny).filter(|&y| slot[u][y].is_none()).collect();
        let y = free[rng.gen_range(0..free.len())];
        slot[u][y] = Some(v);
    }
    for v in 0..n {
        for y in 0..ny {
            if slot[v][y].is_none() && rng.gen_bool(spec.edge_density) {
                let w = if spec.acyclic {
                    if v + 1 >= n {
                        continue;
                    }
                    rng.gen_range(v + 1..n)
                } else {
                    rng.gen_range(0..n)
                };
                slot[v][y] = Some(w);
            }
        }
    }
    let mut b = PFilterBuilder::new();
    for v in 0..n {
        let mut outs = vec![format!("c{}", rng.gen_range(0..nl))];
        if spec.multi_output > 0.0 && nl > 1 && rng.gen_bool(spec.multi_output) {
            outs.push(format!("c{}", rng.gen_range(0..nl)));
        }
        b.add_state(&name(v), outs);
    }
    b.add_initial(&name(0));
    for y in 0..ny {
        b.add_observation(&format!("y{y}"));
    }
    for v in 0..n {
        for y in 0..ny {
            if let Some(w) = slot[v][y] {
                b.add_transition(&name(v), &name(w), &format!("y{y}"));
            }
        }
    }
    b.build().expect("generated filter is valid")
}

/// A possibly non-deterministic random filter (several initial states and
/// parallel successors allowed), for semantic cross-checks.
pub fn random_nondeterministic(states: usize, observations: usize, seed: u64) -> PFilter {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = states.max(1);
    let mut b = PFilterBuilder::new();
    for v in 0..n {
        let mut outs = vec![format!("c{}", rng.gen_range(0..3))];
        if rng.gen_bool(0.3) {
            outs.push(format!("c{}", rng.gen_range(0..3)));
        }
        b.add_state(&format!("q{v}"), outs);
    }
    b.add_initial("q0");
    if n > 1 && rng.gen_bool(0.3) {
        b.add_initial(&format!("q{}", rng.gen_range(1..n)));
    }
    for y in 0..observations {
        b.add_observation(&format!("y{y}"));
    }
    for v in 0..n {
        for w in 0..n {
            for y in 0..observations {
                if rng.gen_bool(0.25) {
                    b.add_transition(&format!("q{v}"), &format!("q{w}"), &format!("y{y}"));
                }
            }
        }
    }
    b.build().expect("generated filter is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_outputs_need_every_state() {
        let f = PFilter::builder()
            .state("a", ["1"])
            .state("b", ["2"])
            .state("c", ["3"])
            .initial("a")
            .transition("a", "b", "x")
            .transition("b", "c", "x")
            .build()
            .unwrap();
        let r = brute_force_minimize(&f, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(r.minimal_size, 3);
        assert_eq!(r.witness_cover, Cover::singletons(3));
    }

    #[test]
    fn oracle_refuses_large_filters() {
        let f = random_filter(
            &RandomSpec {
                states: 12,
                ..RandomSpec::default()
            },
            1,
        );
        assert!(matches!(
            brute_force_minimize(&f, DEFAULT_ORACLE_LIMIT),
            Err(Error::OracleTooLarge { states: 12, .. })
        ));
    }

    #[test]
    fn generator_is_reproducible_and_reachable() {
        let spec = RandomSpec {
            states: 8,
            observations: 3,
            labels: 3,
            multi_output: 0.5,
            ..RandomSpec::default()
        };
        let a = random_filter(&spec, 42);
        let b = random_filter(&spec, 42);
        assert_eq!(
            crate::format::filter_to_json(&a),
            crate::format::filter_to_json(&b)
        );
        assert!(a.is_deterministic());
        assert_eq!(a.reachable_states().len(), 8);
    }

    #[test]
    fn acyclic_option_has_no_cycles() {
        let spec = RandomSpec {
            states: 7,
            acyclic: true,
            edge_density: 0.9,
            ..RandomSpec::default()
        };
        for seed in 0..20 {
            let f = random_filter(&spec, seed);
            assert!(f.edges().keys().all(|&(v, w)| v < w));
        }
    }

    #[test]
    fn strings_up_to_depth() {
        assert_eq!(all_strings(2, 2).len(), 1 + 2 + 4);
        assert_eq!(all_strings(3, 0), vec![Vec::<ObsId>::new()]);
    }

    #[test]
    fn self_verification_passes() {
        let f = random_filter(&RandomSpec::default(), 7);
        let v = verify_solution(&f, &f);
        assert!(v.passes());
        assert_eq!(v.size, f.num_states());
    }
}
