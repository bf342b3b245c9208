//! Pairwise compatibility, group compatibility and the compatibility complex.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::filter::{Config, PFilter, PFilterBuilder, StateId, StateSet};

/// Default cap on the number of maximal faces.
pub const DEFAULT_FACE_LIMIT: usize = 1_000_000;

const FLAG_CHECK_LIMIT: usize = 200_000;

/// Two states are compatible when every common extension reaches states with
/// equal output sets. Breadth-first search over pairs of states.
pub fn pairwise_compatible(f: &PFilter, v: StateId, w: StateId) -> Result<bool> {
    f.require_deterministic()?;
    f.reached_from(v, &[])?;
    f.reached_from(w, &[])?;
    let mut seen = HashSet::from([(v, w)]);
    let mut queue = VecDeque::from([(v, w)]);
    while let Some((a, b)) = queue.pop_front() {
        if f.outputs(a) != f.outputs(b) {
            return Ok(false);
        }
        for y in 0..f.alphabet().len() {
            if let (Some(a2), Some(b2)) = (f.next(a, y), f.next(b, y)) {
                if seen.insert((a2, b2)) {
                    queue.push_back((a2, b2));
                }
            }
        }
    }
    Ok(true)
}

/// A set of states shares a common output label along every joint
/// extension. Breadth-first search over configs; crashed members drop out.
pub fn group_compatible(f: &PFilter, set: &StateSet) -> Result<bool> {
    f.require_deterministic()?;
    if set.is_empty() {
        return Err(Error::EmptyStateSet);
    }
    if let Some(&v) = set.iter().find(|&&v| v >= f.num_states()) {
        return Err(Error::StateOutOfRange(v));
    }
    Ok(GroupChecker::new(f).check(&Config::new(set.iter().copied())))
}

/// Memoizing group-compatibility checker.
///
/// Every config visited by a successful search is itself compatible, and the
/// start of a failed search is not; both facts are cached.
pub struct GroupChecker<'a> {
    f: &'a PFilter,
    good: HashSet<Config>,
    bad: HashSet<Config>,
}

impl<'a> GroupChecker<'a> {
    /// `f` must be deterministic.
    pub fn new(f: &'a PFilter) -> Self {
        GroupChecker {
            f,
            good: HashSet::new(),
            bad: HashSet::new(),
        }
    }

    fn common_output(&self, c: &Config) -> bool {
        let mut members = c.members().iter();
        let Some(&first) = members.next() else {
            return true;
        };
        let mut common: BTreeSet<_> = self.f.outputs(first).clone();
        for &v in members {
            common.retain(|l| self.f.outputs(v).contains(l));
            if common.is_empty() {
                return false;
            }
        }
        true
    }

    pub fn check(&mut self, start: &Config) -> bool {
        if start.len() <= 1 || self.good.contains(start) {
            return true;
        }
        if self.bad.contains(start) {
            return false;
        }
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(c) = queue.pop_front() {
            if self.bad.contains(&c) || !self.common_output(&c) {
                self.bad.insert(start.clone());
                self.bad.insert(c);
                return false;
            }
            for y in 0..self.f.alphabet().len() {
                let next = self.f.step(&c, y);
                if next.len() <= 1 || self.good.contains(&next) {
                    continue;
                }
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        self.good.extend(seen);
        true
    }

    pub fn check_set(&mut self, set: &[StateId]) -> bool {
        self.check(&Config::new(set.iter().copied()))
    }
}

/// Undirected graph over the states of a filter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityGraph {
    num_vertices: usize,
    edges: BTreeSet<(StateId, StateId)>,
    adj: Vec<FixedBitSet>,
}

impl CompatibilityGraph {
    pub fn from_edges(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (StateId, StateId)>,
    ) -> Self {
        let mut adj = vec![FixedBitSet::with_capacity(num_vertices); num_vertices];
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                continue;
            }
            let (a, b) = (a.min(b), a.max(b));
            adj[a].insert(b);
            adj[b].insert(a);
            set.insert((a, b));
        }
        CompatibilityGraph {
            num_vertices,
            edges: set,
            adj,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Edges as ordered pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.edges
    }

    pub fn adjacent(&self, a: StateId, b: StateId) -> bool {
        self.adj[a].contains(b)
    }

    pub fn neighbors(&self, v: StateId) -> &FixedBitSet {
        &self.adj[v]
    }

    /// Maximal cliques, Bron–Kerbosch with Tomita pivoting.
    pub fn maximal_cliques(&self, limit: usize) -> Result<Vec<StateSet>> {
        let mut out = Vec::new();
        let mut p = FixedBitSet::with_capacity(self.num_vertices);
        p.insert_range(..);
        let x = FixedBitSet::with_capacity(self.num_vertices);
        let mut r = Vec::new();
        self.bk_pivot(&mut r, p, x, &mut out, limit)?;
        out.sort();
        Ok(out)
    }

    fn bk_pivot(
        &self,
        r: &mut Vec<StateId>,
        mut p: FixedBitSet,
        mut x: FixedBitSet,
        out: &mut Vec<StateSet>,
        limit: usize,
    ) -> Result<()> {
        if p.is_clear() && x.is_clear() {
            if out.len() >= limit {
                return Err(Error::FaceLimit(limit));
            }
            out.push(r.iter().copied().collect());
            return Ok(());
        }
        let pivot = p
            .ones()
            .chain(x.ones())
            .max_by_key(|&u| self.adj[u].intersection_count(&p))
            .expect("p or x is nonempty");
        let mut cands = p.clone();
        cands.difference_with(&self.adj[pivot]);
        for v in cands.ones() {
            let mut p2 = p.clone();
            p2.intersect_with(&self.adj[v]);
            let mut x2 = x.clone();
            x2.intersect_with(&self.adj[v]);
            r.push(v);
            self.bk_pivot(r, p2, x2, out, limit)?;
            r.pop();
            p.remove(v);
            x.insert(v);
        }
        Ok(())
    }

    /// A largest set of pairwise non-adjacent vertices, by branch and bound
    /// with a greedy coloring bound on the complement graph. After
    /// `node_limit` search nodes the best set found so far is returned; it is
    /// independent either way, and maximum when the flag is true.
    pub fn maximum_independent_set(&self, node_limit: u64) -> (Vec<StateId>, bool) {
        let n = self.num_vertices;
        let mut comp = vec![FixedBitSet::with_capacity(n); n];
        for v in 0..n {
            comp[v].insert_range(..);
            comp[v].difference_with(&self.adj[v]);
            comp[v].remove(v);
        }
        let mut search = MaxClique {
            adj: &comp,
            best: Vec::new(),
            nodes: 0,
            limit: node_limit,
        };
        let mut all = FixedBitSet::with_capacity(n);
        all.insert_range(..);
        let mut r = Vec::new();
        let complete = search.expand(&mut r, all);
        let mut best = search.best;
        best.sort_unstable();
        (best, complete)
    }

    /// Connected components, each sorted, ordered by least member.
    pub fn components(&self) -> Vec<StateSet> {
        let mut comp = vec![usize::MAX; self.num_vertices];
        let mut out = Vec::new();
        for s in 0..self.num_vertices {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = StateSet::new();
            let mut stack = vec![s];
            comp[s] = id;
            while let Some(v) = stack.pop() {
                members.insert(v);
                for w in self.adj[v].ones() {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            out.push(members);
        }
        out
    }
}

struct MaxClique<'a> {
    adj: &'a [FixedBitSet],
    best: Vec<StateId>,
    nodes: u64,
    limit: u64,
}

impl MaxClique<'_> {
    /// Greedy coloring of `p`; returns vertices with their color bound, in
    /// nondecreasing bound order.
    fn color_order(&self, p: &FixedBitSet) -> Vec<(StateId, usize)> {
        let mut uncolored = p.clone();
        let mut out = Vec::with_capacity(p.count_ones(..));
        let mut color = 0;
        while !uncolored.is_clear() {
            color += 1;
            let mut avail = uncolored.clone();
            while let Some(v) = avail.minimum() {
                out.push((v, color));
                uncolored.remove(v);
                avail.remove(v);
                avail.difference_with(&self.adj[v]);
            }
        }
        out
    }

    /// False when the node limit cut the search short.
    fn expand(&mut self, r: &mut Vec<StateId>, mut p: FixedBitSet) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        if p.is_clear() {
            if r.len() > self.best.len() {
                self.best = r.clone();
            }
            return true;
        }
        let order = self.color_order(&p);
        for &(v, bound) in order.iter().rev() {
            if r.len() + bound <= self.best.len() {
                return true;
            }
            let mut p2 = p.clone();
            p2.intersect_with(&self.adj[v]);
            r.push(v);
            let done = self.expand(r, p2);
            r.pop();
            if !done {
                return false;
            }
            p.remove(v);
        }
        true
    }
}

/// Pairs related by `compatible` after propagating base conflicts backwards
/// along shared observations until a fixpoint. For a deterministic filter
/// this equals the pairwise breadth-first search with the same base test.
fn pair_fixpoint(f: &PFilter, conflict: impl Fn(StateId, StateId) -> bool) -> CompatibilityGraph {
    let n = f.num_states();
    let ny = f.alphabet().len();
    let mut pred: Vec<Vec<Vec<StateId>>> = vec![vec![Vec::new(); ny]; n];
    for v in f.states() {
        for y in 0..ny {
            for &w in f.successors(v, y) {
                pred[w][y].push(v);
            }
        }
    }
    let mut bad = vec![false; n * n];
    let mut queue = VecDeque::new();
    for a in 0..n {
        for b in a + 1..n {
            if conflict(a, b) {
                bad[a * n + b] = true;
                queue.push_back((a, b));
            }
        }
    }
    while let Some((a, b)) = queue.pop_front() {
        for y in 0..ny {
            for &pa in &pred[a][y] {
                for &pb in &pred[b][y] {
                    let (x, z) = (pa.min(pb), pa.max(pb));
                    if x != z && !bad[x * n + z] {
                        bad[x * n + z] = true;
                        queue.push_back((x, z));
                    }
                }
            }
        }
    }
    let edges = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !bad[a * n + b]);
    CompatibilityGraph::from_edges(n, edges.collect::<Vec<_>>())
}

/// Graph of pairwise-compatible states (equal outputs on all common
/// extensions).
pub fn compatibility_graph(f: &PFilter) -> Result<CompatibilityGraph> {
    f.require_deterministic()?;
    Ok(pair_fixpoint(f, |a, b| f.outputs(a) != f.outputs(b)))
}

/// Graph of group-compatible pairs: the 1-skeleton of the compatibility
/// complex. Coincides with [`compatibility_graph`] on single-output filters.
pub fn group_pair_graph(f: &PFilter) -> Result<CompatibilityGraph> {
    f.require_deterministic()?;
    Ok(pair_fixpoint(f, |a, b| {
        f.outputs(a).is_disjoint(f.outputs(b))
    }))
}

/// Downward-closed family of state sets, stored by its maximal faces.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    num_vertices: usize,
    faces: Vec<StateSet>,
    bits: Vec<FixedBitSet>,
    // faces containing each vertex
    incidence: Vec<Vec<usize>>,
    flag: bool,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.num_vertices == other.num_vertices && self.faces == other.faces
    }
}

impl Eq for SimplicialComplex {}

impl SimplicialComplex {
    /// Builds a complex from generating sets; non-maximal generators are
    /// discarded.
    pub fn from_generators(
        num_vertices: usize,
        generators: impl IntoIterator<Item = StateSet>,
    ) -> Self {
        let mut gens: Vec<StateSet> = generators
            .into_iter()
            .filter(|g| !g.is_empty())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        gens.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let mut kept: Vec<StateSet> = Vec::new();
        for g in gens {
            if !kept.iter().any(|k| g.is_subset(k)) {
                kept.push(g);
            }
        }
        for v in 0..num_vertices {
            if !kept.iter().any(|k| k.contains(&v)) {
                kept.push(StateSet::from([v]));
            }
        }
        kept.sort();
        let bits: Vec<FixedBitSet> = kept
            .iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(num_vertices);
                b.extend(s.iter().copied());
                b
            })
            .collect();
        let mut incidence = vec![Vec::new(); num_vertices];
        for (i, s) in kept.iter().enumerate() {
            for &v in s {
                incidence[v].push(i);
            }
        }
        let mut complex = SimplicialComplex {
            num_vertices,
            faces: kept,
            bits,
            incidence,
            flag: false,
        };
        complex.flag = match complex.one_skeleton().maximal_cliques(FLAG_CHECK_LIMIT) {
            Ok(cliques) => cliques.iter().all(|c| complex.is_face(c)),
            Err(_) => false,
        };
        complex
    }

    /// Every clique of the 1-skeleton is a face, so the minimal non-faces are
    /// exactly the non-edges. Conservatively false when the check is too big.
    pub fn is_flag(&self) -> bool {
        self.flag
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn maximal_faces(&self) -> &[StateSet] {
        &self.faces
    }

    pub fn is_face(&self, set: &StateSet) -> bool {
        match set.iter().next() {
            None => true,
            Some(&v) if v < self.num_vertices => self.incidence[v]
                .iter()
                .any(|&i| set.iter().all(|&w| self.bits[i].contains(w))),
            Some(_) => false,
        }
    }

    pub fn is_face_slice(&self, set: &[StateId]) -> bool {
        match set.first() {
            None => true,
            Some(&v) if v < self.num_vertices => self.incidence[v].iter().any(|&i| {
                set.iter()
                    .all(|&w| w < self.num_vertices && self.bits[i].contains(w))
            }),
            Some(_) => false,
        }
    }

    /// Largest maximal face size.
    pub fn dimension_bound(&self) -> usize {
        self.faces.iter().map(StateSet::len).max().unwrap_or(0)
    }

    /// Visits every face (not only maximal ones) with at least `min_len`
    /// members exactly once, members in increasing order.
    pub fn for_each_face<F>(&self, min_len: usize, visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[StateId]) -> ControlFlow<()>,
    {
        self.for_each_face_where(min_len, |_, _| true, visit)
    }

    /// Like [`for_each_face`](Self::for_each_face), restricted to faces
    /// built by extensions `allow(prefix, v)` accepts. `allow` should be
    /// hereditary: a rejected extension is never retried with a longer prefix.
    pub fn for_each_face_where<A, F>(
        &self,
        min_len: usize,
        mut allow: A,
        mut visit: F,
    ) -> ControlFlow<()>
    where
        A: FnMut(&[StateId], StateId) -> bool,
        F: FnMut(&[StateId]) -> ControlFlow<()>,
    {
        let mut r = Vec::new();
        for v in 0..self.num_vertices {
            if !allow(&r, v) {
                continue;
            }
            r.push(v);
            let containing = self.incidence[v].clone();
            self.face_dfs(&mut r, &containing, min_len, &mut allow, &mut visit)?;
            r.pop();
        }
        ControlFlow::Continue(())
    }

    fn face_dfs<A, F>(
        &self,
        r: &mut Vec<StateId>,
        containing: &[usize],
        min_len: usize,
        allow: &mut A,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        A: FnMut(&[StateId], StateId) -> bool,
        F: FnMut(&[StateId]) -> ControlFlow<()>,
    {
        if r.len() >= min_len {
            visit(r)?;
        }
        let last = *r.last().expect("nonempty prefix");
        let mut cands = FixedBitSet::with_capacity(self.num_vertices);
        for &i in containing {
            cands.union_with(&self.bits[i]);
        }
        for c in cands.ones().filter(|&c| c > last) {
            if !allow(r, c) {
                continue;
            }
            let sub: Vec<usize> = containing
                .iter()
                .copied()
                .filter(|&i| self.bits[i].contains(c))
                .collect();
            r.push(c);
            self.face_dfs(r, &sub, min_len, allow, visit)?;
            r.pop();
        }
        ControlFlow::Continue(())
    }

    /// Number of faces with at least `min_len` members.
    pub fn count_faces(&self, min_len: usize) -> usize {
        let mut n = 0;
        let _ = self.for_each_face(min_len, |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }

    pub fn one_skeleton(&self) -> CompatibilityGraph {
        let mut edges = Vec::new();
        for s in &self.faces {
            let m: Vec<_> = s.iter().copied().collect();
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    edges.push((m[i], m[j]));
                }
            }
        }
        CompatibilityGraph::from_edges(self.num_vertices, edges)
    }
}

/// How the complex is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexMode {
    /// Group compatibility over the group-compatible pair graph.
    Group,
    /// Maximal cliques of the pairwise compatibility graph (single-output
    /// filters only).
    Pairwise,
}

/// All maximal group-compatible state sets.
pub fn compatibility_complex(f: &PFilter) -> Result<SimplicialComplex> {
    compatibility_complex_with(f, ComplexMode::Group, DEFAULT_FACE_LIMIT)
}

pub fn compatibility_complex_with(
    f: &PFilter,
    mode: ComplexMode,
    face_limit: usize,
) -> Result<SimplicialComplex> {
    f.require_deterministic()?;
    let n = f.num_states();
    let faces = match mode {
        ComplexMode::Pairwise => {
            if !f.is_single_output() {
                return Err(Error::NotSingleOutput);
            }
            compatibility_graph(f)?.maximal_cliques(face_limit)?
        }
        ComplexMode::Group => {
            let graph = group_pair_graph(f)?;
            let mut checker = GroupChecker::new(f);
            let mut out = Vec::new();
            let mut r = Vec::new();
            let mut p = FixedBitSet::with_capacity(n);
            p.insert_range(..);
            let x = FixedBitSet::with_capacity(n);
            hereditary_bk(&graph, &mut checker, &mut r, p, x, &mut out, face_limit)?;
            out
        }
    };
    Ok(SimplicialComplex::from_generators(n, faces))
}

/// Bron–Kerbosch without pivoting over a hereditary family: a vertex stays a
/// candidate only while adding it to the current set keeps a face.
fn hereditary_bk(
    graph: &CompatibilityGraph,
    checker: &mut GroupChecker<'_>,
    r: &mut Vec<StateId>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    out: &mut Vec<StateSet>,
    limit: usize,
) -> Result<()> {
    if p.is_clear() && x.is_clear() {
        if out.len() >= limit {
            return Err(Error::FaceLimit(limit));
        }
        out.push(r.iter().copied().collect());
        return Ok(());
    }
    let cands: Vec<StateId> = p.ones().collect();
    for v in cands {
        r.push(v);
        let mut filter = |set: &FixedBitSet| {
            let mut kept = set.clone();
            kept.intersect_with(graph.neighbors(v));
            let members: Vec<StateId> = kept.ones().collect();
            for u in members {
                let mut probe = r.clone();
                probe.push(u);
                if !checker.check_set(&probe) {
                    kept.remove(u);
                }
            }
            kept
        };
        let p2 = filter(&p);
        let x2 = filter(&x);
        hereditary_bk(graph, checker, r, p2, x2, out, limit)?;
        r.pop();
        p.remove(v);
        x.insert(v);
    }
    Ok(())
}

/// Quotient by connected components of the group-compatible pair graph.
///
/// Each component becomes one state carrying every member transition, so the
/// result may be non-deterministic. Its output is the intersection of member
/// outputs, or their union when the intersection is empty.
pub fn class_quotient(f: &PFilter) -> Result<(PFilter, Vec<StateSet>)> {
    let classes = group_pair_graph(f)?.components();
    let mut class_of = vec![0; f.num_states()];
    for (i, c) in classes.iter().enumerate() {
        for &v in c {
            class_of[v] = i;
        }
    }
    let names: Vec<String> = classes.iter().map(|c| f.set_name(c)).collect();
    let mut b = PFilterBuilder::new();
    for (c, name) in classes.iter().zip(&names) {
        let mut common: Option<BTreeSet<String>> = None;
        let mut union = BTreeSet::new();
        for &v in c {
            let o = f.output_names(v);
            union.extend(o.iter().cloned());
            common = Some(match common {
                None => o,
                Some(prev) => prev.intersection(&o).cloned().collect(),
            });
        }
        let common = common.unwrap_or_default();
        b.add_state(name, if common.is_empty() { union } else { common });
    }
    for &v in f.initial() {
        b.add_initial(&names[class_of[v]]);
    }
    for y in f.alphabet() {
        b.add_observation(y);
    }
    for (&(v, w), ys) in f.edges() {
        for &y in ys {
            b.add_transition(&names[class_of[v]], &names[class_of[w]], f.obs_name(y));
        }
    }
    Ok((b.build()?, classes))
}

/// Maps each state set to the sorted member names, for readable assertions.
pub fn named_sets(f: &PFilter, sets: &[StateSet]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = sets
        .iter()
        .map(|s| {
            let mut v: Vec<String> = s.iter().map(|&x| f.state_name(x).to_string()).collect();
            v.sort();
            v
        })
        .collect();
    out.sort();
    out
}
