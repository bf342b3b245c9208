//! Fixed instances shared by the benchmarks.

use filtermin_core::instances::{self, gen_grid, gen_nxm, ExitSpec};
use filtermin_core::PFilter;

/// Named instances, smallest first.
pub fn fixtures() -> Vec<(String, PFilter)> {
    let mut out = vec![
        (
            "counterexample-nd".to_string(),
            instances::builtin("counterexample-nd").unwrap().0,
        ),
        ("drone".to_string(), instances::builtin("drone").unwrap().0),
    ];
    for (n, m) in [(3, 3), (6, 6)] {
        out.push((format!("nxm-{n}x{m}"), gen_nxm(n, m)));
    }
    for n in [6, 8] {
        out.push((format!("grid-{n}"), gen_grid(n, &ExitSpec::default_for(n))));
    }
    out
}
