//! Zipper constraints: if a part contains `U`, some part must contain the
//! `y`-successors `W` of `U`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;

use crate::compat::SimplicialComplex;
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::filter::{ObsId, PFilter, StateId, StateSet};

/// Default cap on the number of generated constraints.
pub const DEFAULT_ZIPPER_LIMIT: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZipperConstraint {
    pub u_set: StateSet,
    pub w_set: StateSet,
    pub obs: ObsId,
}

impl ZipperConstraint {
    /// Renders as `U{a,b} -y-> W{c,d}` with state and observation names.
    pub fn display<'a>(&'a self, f: &'a PFilter) -> impl fmt::Display + 'a {
        ZipperDisplay { z: self, f }
    }
}

struct ZipperDisplay<'a> {
    z: &'a ZipperConstraint,
    f: &'a PFilter,
}

fn names(f: &PFilter, set: &StateSet) -> String {
    let mut n: Vec<&str> = set.iter().map(|&v| f.state_name(v)).collect();
    n.sort_unstable();
    n.join(",")
}

impl fmt::Display for ZipperDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            out,
            "U{{{}}} -{}-> W{{{}}}",
            names(self.f, &self.z.u_set),
            self.f.obs_name(self.z.obs),
            names(self.f, &self.z.w_set)
        )
    }
}

/// All `y`-successors of the members of `set`.
pub fn successor_set(f: &PFilter, set: &StateSet, y: ObsId) -> StateSet {
    set.iter()
        .flat_map(|&v| f.successors(v, y).iter().copied())
        .collect()
}

fn successors_of_slice(f: &PFilter, set: &[StateId], y: ObsId) -> StateSet {
    set.iter()
        .flat_map(|&v| f.successors(v, y).iter().copied())
        .collect()
}

/// Every `(U, W)_y` with `U` a face of size at least 2 and `|W| >= 2`.
/// Constraints with smaller `W` are satisfied by every cover and omitted.
pub fn generate_zippers(f: &PFilter, complex: &SimplicialComplex) -> Result<Vec<ZipperConstraint>> {
    generate_zippers_with_limit(f, complex, DEFAULT_ZIPPER_LIMIT)
}

pub fn generate_zippers_with_limit(
    f: &PFilter,
    complex: &SimplicialComplex,
    limit: usize,
) -> Result<Vec<ZipperConstraint>> {
    f.require_deterministic()?;
    let mut out = Vec::new();
    let mut overflow = false;
    let _ = complex.for_each_face(2, |u| {
        for y in 0..f.alphabet().len() {
            let w = successors_of_slice(f, u, y);
            if w.len() >= 2 {
                if out.len() >= limit {
                    overflow = true;
                    return ControlFlow::Break(());
                }
                out.push(ZipperConstraint {
                    u_set: u.iter().copied().collect(),
                    w_set: w,
                    obs: y,
                });
            }
        }
        ControlFlow::Continue(())
    });
    if overflow {
        return Err(Error::ZipperLimit(limit));
    }
    out.sort();
    Ok(out)
}

/// The constraints of [`generate_zippers`] not implied by another one.
///
/// `(U, W)_y` follows from `(U', W)_y` for any `U'` inside `U` with the same
/// successors, since a part holding `U` holds `U'`. So only sets whose
/// members all have distinct `y`-successors are kept. A cover satisfies these
/// exactly when it satisfies the full set.
pub fn generate_irredundant_zippers(
    f: &PFilter,
    complex: &SimplicialComplex,
    limit: usize,
) -> Result<Vec<ZipperConstraint>> {
    f.require_deterministic()?;
    let mut out = Vec::new();
    let mut overflow = false;
    for y in 0..f.alphabet().len() {
        let allow = |prefix: &[StateId], v: StateId| match f.next(v, y) {
            Some(w) => prefix.iter().all(|&u| f.next(u, y) != Some(w)),
            None => false,
        };
        let flow = complex.for_each_face_where(2, allow, |u| {
            if out.len() >= limit {
                overflow = true;
                return ControlFlow::Break(());
            }
            out.push(ZipperConstraint {
                u_set: u.iter().copied().collect(),
                w_set: successors_of_slice(f, u, y),
                obs: y,
            });
            ControlFlow::Continue(())
        });
        if flow.is_break() {
            break;
        }
    }
    if overflow {
        return Err(Error::ZipperLimit(limit));
    }
    out.sort();
    Ok(out)
}

/// Returns the first constraint the cover violates, if any.
pub fn cover_satisfies<'a>(
    cover: &Cover,
    zippers: &'a [ZipperConstraint],
) -> Option<&'a ZipperConstraint> {
    zippers.iter().find(|z| {
        let triggered = cover.parts().iter().any(|p| z.u_set.is_subset(p));
        triggered && !cover.parts().iter().any(|p| z.w_set.is_subset(p))
    })
}

/// One constraint per line in canonical order.
pub fn zippers_to_text(f: &PFilter, zippers: &[ZipperConstraint]) -> String {
    let mut lines: BTreeSet<String> = BTreeSet::new();
    for z in zippers {
        lines.insert(z.display(f).to_string());
    }
    lines.into_iter().map(|l| l + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::compatibility_complex;

    fn fan() -> PFilter {
        // a and b share an output and both move on `x`, to states that
        // themselves share an output.
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
    fn successor_set_without_edges_is_empty() {
        let f = fan();
        let x = f.obs_id("x").unwrap();
        assert!(successor_set(&f, &StateSet::from([3, 4]), x).is_empty());
        assert_eq!(
            successor_set(&f, &StateSet::from([1, 2]), x),
            StateSet::from([3, 4])
        );
    }

    #[test]
    fn fan_has_one_constraint() {
        let f = fan();
        let k = compatibility_complex(&f).unwrap();
        let z = generate_zippers(&f, &k).unwrap();
        assert_eq!(zippers_to_text(&f, &z), "U{a,b} -x-> W{c,d}\n");
    }

    #[test]
    fn satisfaction() {
        let f = fan();
        let k = compatibility_complex(&f).unwrap();
        let z = generate_zippers(&f, &k).unwrap();
        assert!(cover_satisfies(&Cover::singletons(5), &[]).is_none());
        assert!(cover_satisfies(&Cover::singletons(5), &z).is_none());
        let merged = Cover::new([
            StateSet::from([0]),
            StateSet::from([1, 2]),
            StateSet::from([3]),
            StateSet::from([4]),
        ]);
        assert_eq!(cover_satisfies(&merged, &z), Some(&z[0]));
        let fixed = Cover::new([
            StateSet::from([0]),
            StateSet::from([1, 2]),
            StateSet::from([3, 4]),
        ]);
        assert!(cover_satisfies(&fixed, &z).is_none());
    }

    #[test]
    fn limit_is_reported() {
        let f = fan();
        let k = compatibility_complex(&f).unwrap();
        assert!(matches!(
            generate_zippers_with_limit(&f, &k, 0),
            Err(Error::ZipperLimit(0))
        ));
    }

    #[test]
    fn irredundant_keeps_only_injective_sets() {
        // a, b, c pairwise compatible; a and b share their x-successor.
        let f = PFilter::builder()
            .state("a", ["p"])
            .state("b", ["p"])
            .state("c", ["p"])
            .state("d", ["q"])
            .state("e", ["q"])
            .initial("a")
            .transition("a", "b", "1")
            .transition("a", "c", "2")
            .transition("a", "d", "x")
            .transition("b", "d", "x")
            .transition("c", "e", "x")
            .build()
            .unwrap();
        let k = compatibility_complex(&f).unwrap();
        let full = generate_zippers(&f, &k).unwrap();
        let kept = generate_irredundant_zippers(&f, &k, DEFAULT_ZIPPER_LIMIT).unwrap();
        assert_eq!(
            zippers_to_text(&f, &full),
            "U{a,b,c} -x-> W{d,e}\nU{a,c} -x-> W{d,e}\nU{b,c} -x-> W{d,e}\n"
        );
        assert_eq!(
            zippers_to_text(&f, &kept),
            "U{a,c} -x-> W{d,e}\nU{b,c} -x-> W{d,e}\n"
        );
    }

    proptest::proptest! {
        #[test]
        fn irredundant_set_accepts_the_same_covers(
            seed in 0u64..10_000,
            states in 2usize..8,
            picks in proptest::collection::vec(0usize..1000, 1..5),
        ) {
            let spec = crate::oracle::RandomSpec {
                states,
                multi_output: 0.4,
                ..Default::default()
            };
            let f = crate::oracle::random_filter(&spec, seed);
            let k = compatibility_complex(&f).unwrap();
            let full = generate_zippers(&f, &k).unwrap();
            let kept = generate_irredundant_zippers(&f, &k, DEFAULT_ZIPPER_LIMIT).unwrap();
            proptest::prop_assert!(kept.iter().all(|z| full.contains(z)));
            let faces = crate::oracle::all_faces(&f).unwrap();
            let cover = Cover::new(picks.iter().map(|&i| faces[i % faces.len()].clone()));
            proptest::prop_assert_eq!(
                cover_satisfies(&cover, &full).is_none(),
                cover_satisfies(&cover, &kept).is_none()
            );
        }
    }
}
