//! CNF encoding of "a cover with at most `k` parts satisfying all zipper
//! constraints exists", and decoding of models back into covers.

use std::fmt::Write as _;
use std::ops::ControlFlow;

use crate::compat::SimplicialComplex;
use crate::cover::{is_valid_cover, Cover};
use crate::error::{Error, Result};
use crate::filter::{PFilter, StateId, StateSet};
use crate::zipper::{cover_satisfies, ZipperConstraint};

/// Largest state count for which the all-non-faces encoding is allowed.
pub const DEFAULT_EXACT_CAP: usize = 16;
/// Default cap on the number of minimal non-faces.
pub const DEFAULT_NONFACE_LIMIT: usize = 5_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Encoding {
    /// Forbid every non-face in every part.
    PaperExact,
    /// Forbid only inclusion-minimal non-faces; equisatisfiable because the
    /// complex is downward closed.
    #[default]
    MinimalNonface,
}

impl std::str::FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-exact" => Ok(Encoding::PaperExact),
            "minimal-nonface" => Ok(Encoding::MinimalNonface),
            other => Err(Error::Parse(format!("unknown encoding `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EncodeOptions {
    pub encoding: Encoding,
    pub symmetry_breaking: bool,
    pub exact_cap: usize,
    pub nonface_limit: usize,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            encoding: Encoding::MinimalNonface,
            symmetry_breaking: false,
            exact_cap: DEFAULT_EXACT_CAP,
            nonface_limit: DEFAULT_NONFACE_LIMIT,
        }
    }
}

/// Meaning of a variable. Part and auxiliary indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    /// State `v` belongs to part `i`.
    R { v: StateId, i: usize },
    /// Auxiliary literal `l` of constraint `c` for part `i`.
    Z { c: usize, i: usize, l: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClauseCounts {
    pub at_least_one: usize,
    pub forbidden: usize,
    pub zipper: usize,
    pub symmetry: usize,
}

impl ClauseCounts {
    pub fn total(&self) -> usize {
        self.at_least_one + self.forbidden + self.zipper + self.symmetry
    }
}

#[derive(Clone, Debug)]
pub struct CnfInstance {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
    /// `roles[var - 1]` describes variable `var`.
    pub roles: Vec<VarRole>,
    pub k: usize,
    pub num_states: usize,
    pub counts: ClauseCounts,
}

impl CnfInstance {
    /// Variable for "state `v` is in part `i`".
    pub fn r_var(&self, v: StateId, i: usize) -> i32 {
        r_var(self.k, v, i)
    }

    pub fn role(&self, var: i32) -> Option<VarRole> {
        let idx = usize::try_from(var.checked_abs()?).ok()?.checked_sub(1)?;
        self.roles.get(idx).copied()
    }

    pub fn num_r_vars(&self) -> usize {
        self.num_states * self.k
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for lit in c {
                let _ = write!(out, "{lit} ");
            }
            out.push_str("0\n");
        }
        out
    }

    /// Sidecar listing: `R <state> <part> <var>` and `Z <constraint> <part>
    /// <aux> <var>`, all indices one-based.
    pub fn var_map(&self, f: &PFilter) -> String {
        let mut out = String::new();
        for (idx, role) in self.roles.iter().enumerate() {
            let var = idx + 1;
            let _ = match *role {
                VarRole::R { v, i } => writeln!(out, "R {} {} {var}", f.state_name(v), i + 1),
                VarRole::Z { c, i, l } => writeln!(out, "Z {} {} {} {var}", c + 1, i + 1, l + 1),
            };
        }
        out
    }
}

fn r_var(k: usize, v: StateId, i: usize) -> i32 {
    i32::try_from(v * k + i + 1).expect("variable index fits in i32")
}

/// All inclusion-minimal non-faces.
pub fn enumerate_minimal_nonfaces(complex: &SimplicialComplex) -> Result<Vec<StateSet>> {
    enumerate_minimal_nonfaces_with_limit(complex, DEFAULT_NONFACE_LIMIT)
}

pub fn enumerate_minimal_nonfaces_with_limit(
    complex: &SimplicialComplex,
    limit: usize,
) -> Result<Vec<StateSet>> {
    let n = complex.num_vertices();
    let skeleton = complex.one_skeleton();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !skeleton.adjacent(a, b) {
                if out.len() >= limit {
                    return Err(Error::NonFaceLimit(limit));
                }
                out.push(StateSet::from([a, b]));
            }
        }
    }
    if complex.is_flag() {
        return Ok(out);
    }
    // A larger minimal non-face S is a face R = S - max(S) extended by a
    // vertex adjacent to all of R, with every other facet of S a face.
    let mut overflow = false;
    let _ = complex.for_each_face(2, |r| {
        let last = *r.last().expect("nonempty face");
        for v in last + 1..n {
            if !r.iter().all(|&u| skeleton.adjacent(u, v)) {
                continue;
            }
            let mut s = r.to_vec();
            s.push(v);
            if complex.is_face_slice(&s) {
                continue;
            }
            let minimal = (0..r.len()).all(|drop| {
                let facet: Vec<StateId> = s
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != drop)
                    .map(|(_, &x)| x)
                    .collect();
                complex.is_face_slice(&facet)
            });
            if minimal {
                if out.len() >= limit {
                    overflow = true;
                    return ControlFlow::Break(());
                }
                out.push(s.into_iter().collect());
            }
        }
        ControlFlow::Continue(())
    });
    if overflow {
        return Err(Error::NonFaceLimit(limit));
    }
    out.sort();
    Ok(out)
}

/// Every non-face, by scanning all subsets. Exponential; guarded by the cap.
pub fn enumerate_all_nonfaces(complex: &SimplicialComplex, cap: usize) -> Result<Vec<StateSet>> {
    let n = complex.num_vertices();
    if n > cap || n >= usize::BITS as usize - 1 {
        return Err(Error::ExactEncodingTooLarge { states: n, cap });
    }
    let mut out = Vec::new();
    for mask in 1usize..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let s: Vec<StateId> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if !complex.is_face_slice(&s) {
            out.push(s.into_iter().collect());
        }
    }
    Ok(out)
}

/// Search-node budget for the exact independent set behind
/// [`incompatible_anchor_set`].
pub const ANCHOR_NODE_LIMIT: u64 = 200_000;

/// Pairwise non-adjacent vertices of the 1-skeleton, as many as the search
/// budget finds. No two of them can share a part.
pub fn incompatible_anchor_set(complex: &SimplicialComplex) -> Vec<StateId> {
    complex
        .one_skeleton()
        .maximum_independent_set(ANCHOR_NODE_LIMIT)
        .0
}

/// Encodes "a cover with at most `k` parts exists that satisfies every
/// zipper constraint". Variables `R(v,i)` come first, numbered `v*k + i + 1`,
/// followed by `k*(k+m)` auxiliaries per constraint.
pub fn encode_k_cover(
    complex: &SimplicialComplex,
    zippers: &[ZipperConstraint],
    k: usize,
    opts: &EncodeOptions,
) -> Result<CnfInstance> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let forbidden = match opts.encoding {
        Encoding::PaperExact => enumerate_all_nonfaces(complex, opts.exact_cap)?,
        Encoding::MinimalNonface => {
            enumerate_minimal_nonfaces_with_limit(complex, opts.nonface_limit)?
        }
    };
    Ok(encode_with_forbidden(
        complex,
        zippers,
        k,
        &forbidden,
        opts.symmetry_breaking,
    ))
}

/// Like [`encode_k_cover`] with a precomputed forbidden-set list, so a
/// search over `k` enumerates non-faces once.
pub fn encode_with_forbidden(
    complex: &SimplicialComplex,
    zippers: &[ZipperConstraint],
    k: usize,
    forbidden: &[StateSet],
    symmetry_breaking: bool,
) -> CnfInstance {
    assert!(k >= 1, "k must be positive");
    let t = complex.num_vertices();
    let mut roles = Vec::with_capacity(t * k);
    for v in 0..t {
        for i in 0..k {
            roles.push(VarRole::R { v, i });
        }
    }
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut counts = ClauseCounts::default();

    for v in 0..t {
        clauses.push((0..k).map(|i| r_var(k, v, i)).collect());
    }
    counts.at_least_one = t;

    for s in forbidden {
        for i in 0..k {
            clauses.push(s.iter().map(|&u| -r_var(k, u, i)).collect());
        }
    }
    counts.forbidden = forbidden.len() * k;

    // If part i contains all of U then some part j contains all of W:
    //   z_1 .. z_{k+m}; z_j -> R(w,j) for w in W; z_{k+q} -> not R(u_q, i).
    let before = clauses.len();
    for (c, z) in zippers.iter().enumerate() {
        let m = z.u_set.len();
        let u: Vec<StateId> = z.u_set.iter().copied().collect();
        for i in 0..k {
            let base = roles.len();
            for l in 0..k + m {
                roles.push(VarRole::Z { c, i, l });
            }
            let zv = |l: usize| i32::try_from(base + l + 1).expect("variable index fits in i32");
            clauses.push((0..k + m).map(zv).collect());
            for j in 0..k {
                for &w in &z.w_set {
                    clauses.push(vec![-zv(j), r_var(k, w, j)]);
                }
            }
            for (q, &uq) in u.iter().enumerate() {
                clauses.push(vec![-zv(k + q), -r_var(k, uq, i)]);
            }
        }
    }
    counts.zipper = clauses.len() - before;

    if symmetry_breaking {
        let anchors = incompatible_anchor_set(complex);
        for (j, &v) in anchors.iter().take(k).enumerate() {
            clauses.push(vec![r_var(k, v, j)]);
            counts.symmetry += 1;
        }
    }

    for c in &mut clauses {
        c.sort_by_key(|l| (l.unsigned_abs(), *l < 0));
    }
    CnfInstance {
        num_vars: roles.len(),
        clauses,
        roles,
        k,
        num_states: t,
        counts,
    }
}

/// Reads the parts off a model (`model[var]`, index 0 unused); empty parts
/// are dropped.
pub fn decode_cover(model: &[bool], cnf: &CnfInstance) -> Cover {
    let value = |var: i32| model.get(var as usize).copied().unwrap_or(false);
    Cover::new((0..cnf.k).map(|i| {
        (0..cnf.num_states)
            .filter(|&v| value(cnf.r_var(v, i)))
            .collect::<StateSet>()
    }))
}

/// Decodes and re-validates a model; the solver is never trusted.
pub fn decode_checked(
    model: &[bool],
    cnf: &CnfInstance,
    complex: &SimplicialComplex,
    zippers: &[ZipperConstraint],
) -> Result<Cover> {
    let cover = decode_cover(model, cnf);
    if !is_valid_cover(complex, &cover) {
        return Err(Error::Solver(format!(
            "model decodes to an invalid cover {cover}"
        )));
    }
    if let Some(z) = cover_satisfies(&cover, zippers) {
        return Err(Error::Solver(format!(
            "model decodes to a cover violating {:?}",
            z
        )));
    }
    Ok(cover)
}

/// Number of variables `t*k + sum_c k*(k + |U_c|)`.
pub fn expected_num_vars(t: usize, k: usize, zippers: &[ZipperConstraint]) -> usize {
    t * k
        + zippers
            .iter()
            .map(|z| k * (k + z.u_set.len()))
            .sum::<usize>()
}
