//! Covers of the state set, filters induced by covers, and covers induced by
//! pairs of filters.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::compat::SimplicialComplex;
use crate::error::{Error, Result};
use crate::filter::{PFilter, PFilterBuilder, StateId, StateSet};
use crate::zipper::successor_set;

/// A collection of nonempty state sets, stored sorted and without repeats.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cover {
    parts: Vec<StateSet>,
}

impl Cover {
    pub fn new(parts: impl IntoIterator<Item = StateSet>) -> Self {
        let set: BTreeSet<StateSet> = parts.into_iter().filter(|p| !p.is_empty()).collect();
        Cover {
            parts: set.into_iter().collect(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Cover::new((0..n).map(|v| StateSet::from([v])))
    }

    pub fn parts(&self) -> &[StateSet] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn covered(&self) -> StateSet {
        self.parts.iter().flatten().copied().collect()
    }

    /// True when some state lies in two parts.
    pub fn has_overlap(&self) -> bool {
        let total: usize = self.parts.iter().map(StateSet::len).sum();
        total != self.covered().len()
    }

    /// A part with two or more states exists.
    pub fn has_merge(&self) -> bool {
        self.parts.iter().any(|p| p.len() >= 2)
    }

    /// Index of the lexicographically least part (by member names) that
    /// contains `set`.
    pub fn least_part_containing(&self, f: &PFilter, set: &StateSet) -> Option<usize> {
        self.parts
            .iter()
            .enumerate()
            .filter(|(_, p)| set.is_subset(p))
            .min_by_key(|(_, p)| f.set_name(*p))
            .map(|(i, _)| i)
    }

    pub fn to_names(&self, f: &PFilter) -> Vec<Vec<String>> {
        crate::compat::named_sets(f, &self.parts)
    }
}

impl fmt::Display for Cover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .parts
            .iter()
            .map(|p| {
                let m: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                format!("{{{}}}", m.join(","))
            })
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Every part is a face and the parts cover all vertices.
pub fn is_valid_cover(complex: &SimplicialComplex, cover: &Cover) -> bool {
    cover_problem(complex, cover).is_none()
}

fn cover_problem(complex: &SimplicialComplex, cover: &Cover) -> Option<String> {
    if let Some(p) = cover.parts().iter().find(|p| !complex.is_face(p)) {
        return Some(format!("part {p:?} is not a face"));
    }
    let covered = cover.covered();
    (0..complex.num_vertices())
        .find(|v| !covered.contains(v))
        .map(|v| format!("state {v} is not covered"))
}

/// First part-level determinism failure: a part `P` with `|P| >= 2` whose
/// `y`-successors lie in no single part. Equivalent to violating a zipper
/// constraint whose `U` is `P` itself.
pub fn part_level_violation(f: &PFilter, cover: &Cover) -> Option<(usize, usize, StateSet)> {
    for (i, p) in cover.parts().iter().enumerate() {
        if p.len() < 2 {
            continue;
        }
        for y in 0..f.alphabet().len() {
            let w = successor_set(f, p, y);
            if w.len() >= 2 && !cover.parts().iter().any(|q| w.is_subset(q)) {
                return Some((i, y, w));
            }
        }
    }
    None
}

/// Builds the filter induced by a cover: one state per part, outputs
/// intersected, one outgoing edge per observation leading to the least part
/// that contains all successors.
///
/// Parts are named by their sorted member names joined with `+`. When several
/// parts contain an initial state the least-named one is initial.
pub fn induce_filter(f: &PFilter, complex: &SimplicialComplex, cover: &Cover) -> Result<PFilter> {
    f.require_deterministic()?;
    if let Some(problem) = cover_problem(complex, cover) {
        return Err(Error::InvalidCover(problem));
    }
    if let Some((i, y, w)) = part_level_violation(f, cover) {
        return Err(Error::ZipperViolation(format!(
            "U{{{}}} -{}-> W{{{}}}",
            f.set_name(&cover.parts()[i]).replace('+', ","),
            f.obs_name(y),
            f.set_name(&w).replace('+', ",")
        )));
    }
    let names: Vec<String> = cover.parts().iter().map(|p| f.set_name(p)).collect();
    let mut b = PFilterBuilder::new();
    for (p, name) in cover.parts().iter().zip(&names) {
        let mut members = p.iter();
        let first = *members.next().expect("parts are nonempty");
        let mut common = f.output_names(first);
        for &v in members {
            let o = f.output_names(v);
            common.retain(|l| o.contains(l));
        }
        if common.is_empty() {
            return Err(Error::InvalidCover(format!(
                "part {name} has no common output"
            )));
        }
        b.add_state(name, common);
    }
    let init = *f
        .initial()
        .iter()
        .next()
        .expect("deterministic filter has an initial state");
    let start = cover
        .least_part_containing(f, &StateSet::from([init]))
        .expect("valid cover covers the initial state");
    b.add_initial(&names[start]);
    for y in f.alphabet() {
        b.add_observation(y);
    }
    for (i, p) in cover.parts().iter().enumerate() {
        for y in 0..f.alphabet().len() {
            let w = successor_set(f, p, y);
            if w.is_empty() {
                continue;
            }
            let j = cover
                .least_part_containing(f, &w)
                .expect("part-level check guarantees a target");
            b.add_transition(&names[i], &names[j], f.obs_name(y));
        }
    }
    b.build()
}

/// The many-to-many correspondence between `f` and a deterministic
/// simulator `g`: for each state `g` reaches, the states `f` reaches by the
/// same strings. States of `g` with no counterpart are dropped.
pub fn induced_cover(f: &PFilter, g: &PFilter) -> Result<Cover> {
    f.require_deterministic()?;
    g.require_deterministic()?;
    let obs_map: Vec<Option<usize>> = f.alphabet().iter().map(|y| g.obs_id(y).ok()).collect();
    let start = (
        *f.initial().iter().next().expect("initial state"),
        *g.initial().iter().next().expect("initial state"),
    );
    let mut seen: HashSet<(StateId, StateId)> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut parts: BTreeMap<StateId, StateSet> = BTreeMap::new();
    while let Some((v, w)) = queue.pop_front() {
        parts.entry(w).or_default().insert(v);
        for (y, gy) in obs_map.iter().enumerate() {
            let Some(gy) = *gy else { continue };
            if let (Some(v2), Some(w2)) = (f.next(v, y), g.next(w, gy)) {
                if seen.insert((v2, w2)) {
                    queue.push_back((v2, w2));
                }
            }
        }
    }
    Ok(Cover::new(parts.into_values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::compatibility_complex;
    use crate::filter::{deterministic_isomorphism, output_simulates};

    fn pair() -> PFilter {
        PFilter::builder()
            .state("r", ["o"])
            .state("a", ["p"])
            .state("b", ["p"])
            .state("c", ["q"])
            .state("d", ["q"])
            .initial("r")
            .transition("r", "a", "1")
            .transition("r", "b", "2")
            .transition("a", "c", "x")
            .transition("b", "d", "x")
            .build()
            .unwrap()
    }

    #[test]
    fn singleton_cover_reproduces_filter() {
        let f = pair();
        let k = compatibility_complex(&f).unwrap();
        let cover = Cover::singletons(f.num_states());
        assert!(is_valid_cover(&k, &cover));
        let g = induce_filter(&f, &k, &cover).unwrap();
        assert!(deterministic_isomorphism(&f, &g).is_some());
        assert_eq!(induced_cover(&f, &f).unwrap(), cover);
    }

    #[test]
    fn invalid_covers_are_refused() {
        let f = pair();
        let k = compatibility_complex(&f).unwrap();
        let missing = Cover::new([StateSet::from([0]), StateSet::from([1, 2])]);
        assert!(!is_valid_cover(&k, &missing));
        assert!(matches!(
            induce_filter(&f, &k, &missing),
            Err(Error::InvalidCover(_))
        ));
        let zipper = Cover::new([
            StateSet::from([0]),
            StateSet::from([1, 2]),
            StateSet::from([3]),
            StateSet::from([4]),
        ]);
        assert!(is_valid_cover(&k, &zipper));
        assert!(matches!(
            induce_filter(&f, &k, &zipper),
            Err(Error::ZipperViolation(_))
        ));
    }

    #[test]
    fn merged_cover_induces_smaller_simulator() {
        let f = pair();
        let k = compatibility_complex(&f).unwrap();
        let cover = Cover::new([
            StateSet::from([0]),
            StateSet::from([1, 2]),
            StateSet::from([3, 4]),
        ]);
        let g = induce_filter(&f, &k, &cover).unwrap();
        assert_eq!(g.num_states(), cover.len());
        assert!(g.is_deterministic());
        assert!(output_simulates(&g, &f).holds());
        assert_eq!(induced_cover(&f, &g).unwrap(), cover);
    }

    #[test]
    fn overlap_and_merge_flags() {
        let c = Cover::new([StateSet::from([0, 1]), StateSet::from([1, 2])]);
        assert!(c.has_overlap());
        assert!(c.has_merge());
        assert!(!Cover::singletons(3).has_overlap());
    }
}
