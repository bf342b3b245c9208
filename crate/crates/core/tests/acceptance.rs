//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use filtermin_core::encode::{encode_k_cover, EncodeOptions, Encoding};
use filtermin_core::instances::{self, check_expectations, gen_grid, gen_nxm, ExitSpec};
use filtermin_core::minimize::ProbeOutcome;
use filtermin_core::oracle::{
    brute_force_minimize, random_filter, random_nondeterministic, verify_solution, RandomSpec,
};
use filtermin_core::sweep::{rows_to_csv, run_one};
use filtermin_core::{
    baseline_stepwise_heuristic, compatibility_complex, generate_zippers, minimize, CdclSolver,
    MinimizeOptions, PFilter, SatOutcome, SatSolver, ZipperConstraint,
};

const SCALE_BUDGET: Duration = Duration::from_secs(120);

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn so_instances() -> Vec<PFilter> {
    (0..100u64)
        .map(|seed| {
            let spec = RandomSpec {
                states: 3 + (seed % 6) as usize,
                observations: 2 + (seed % 2) as usize,
                labels: 2 + (seed % 3 == 0) as usize,
                multi_output: 0.0,
                acyclic: seed % 4 == 0,
                edge_density: 0.6,
            };
            random_filter(&spec, seed)
        })
        .collect()
}

fn mo_instances() -> Vec<PFilter> {
    (0..100u64)
        .map(|seed| {
            let spec = RandomSpec {
                states: 3 + (seed % 5) as usize,
                observations: 2 + (seed % 2) as usize,
                labels: 3,
                multi_output: 0.5,
                acyclic: seed % 4 == 1,
                edge_density: 0.6,
            };
            random_filter(&spec, 1_000 + seed)
        })
        .collect()
}

fn fuzz_instances() -> Vec<PFilter> {
    (0..1000u64)
        .map(|seed| {
            if seed % 2 == 0 {
                random_nondeterministic(2 + (seed % 5) as usize, 2, 50_000 + seed)
            } else {
                let spec = RandomSpec {
                    states: 2 + (seed % 9) as usize,
                    observations: 1 + (seed % 3) as usize,
                    labels: 2 + (seed % 2) as usize,
                    multi_output: if seed % 3 == 0 { 0.0 } else { 0.4 },
                    acyclic: seed % 5 == 0,
                    edge_density: 0.3 + 0.1 * (seed % 5) as f64,
                };
                random_filter(&spec, 50_000 + seed)
            }
        })
        .collect()
}

fn sat_at(f: &PFilter, zippers: &[ZipperConstraint], k: usize, encoding: Encoding) -> bool {
    let complex = compatibility_complex(f).unwrap();
    let opts = EncodeOptions {
        encoding,
        ..EncodeOptions::default()
    };
    let cnf = encode_k_cover(&complex, zippers, k, &opts).unwrap();
    match CdclSolver.solve(&cnf, None).unwrap() {
        SatOutcome::Sat(_) => true,
        SatOutcome::Unsat => false,
        SatOutcome::Timeout => panic!("no timeout was set"),
    }
}

fn criterion_1_2_7(fuzz: &[PFilter]) -> [Line; 3] {
    let start = Instant::now();
    let opts = MinimizeOptions::default();
    let mut mismatches = Vec::new();
    let mut unsound = Vec::new();
    let mut runs = 0;
    let mut baseline_worse = Vec::new();
    let mut strict = 0;
    let mut compared = 0;
    let mut baseline_invalid = 0;
    let mut by_unsat = 0;
    let mut invalid_smaller = Vec::new();
    for (family, list) in [("so", so_instances()), ("mo", mo_instances())] {
        for (i, f) in list.iter().enumerate() {
            let r = minimize(f, &CdclSolver, &opts).unwrap();
            let oracle = brute_force_minimize(f, 10).unwrap().minimal_size;
            if r.minimal_size != oracle || !r.certified {
                mismatches.push(format!(
                    "{family}#{i}: sat {} oracle {oracle}",
                    r.minimal_size
                ));
            }
            // The encoding alone, without the search's lower-bound shortcut.
            let complex = compatibility_complex(f).unwrap();
            let zippers = generate_zippers(f, &complex).unwrap();
            let at = |k| sat_at(f, &zippers, k, Encoding::MinimalNonface);
            if !at(oracle) || (oracle > 1 && at(oracle - 1)) {
                mismatches.push(format!("{family}#{i}: encoding disagrees at k={oracle}"));
            }
            runs += 1;
            if r.probes.iter().any(|p| p.outcome == ProbeOutcome::Unsat) {
                by_unsat += 1;
            }
            if !verify_solution(f, &r.minimal_filter).passes() {
                unsound.push(format!("{family}#{i}"));
            }
            // An invalid baseline output is not a competing solution, so
            // sizes are compared only where the baseline verifies.
            let base = baseline_stepwise_heuristic(f).unwrap();
            if !verify_solution(f, &base).passes() {
                baseline_invalid += 1;
                if base.num_states() < r.minimal_size {
                    invalid_smaller.push(format!("{family}#{i}"));
                }
                continue;
            }
            compared += 1;
            if base.num_states() < r.minimal_size {
                baseline_worse.push(format!("{family}#{i}"));
            }
            if r.minimal_size < base.num_states() {
                strict += 1;
            }
        }
    }
    let c1_time = start.elapsed();
    let fuzz_start = Instant::now();
    for (i, f) in fuzz.iter().enumerate() {
        let r = minimize(f, &CdclSolver, &opts).unwrap();
        runs += 1;
        if !verify_solution(f, &r.minimal_filter).passes() {
            unsound.push(format!("fuzz#{i}"));
        }
    }
    [
        Line {
            id: 1,
            name: "oracle equivalence",
            pass: mismatches.is_empty() && c1_time < Duration::from_secs(600),
            detail: format!(
                "200 instances ({by_unsat} certified by an UNSAT call, the rest by the \
                 lower bound; CNF also checked SAT at the minimum and UNSAT below), {} mismatches {:?}, {:.1}s",
                mismatches.len(),
                mismatches,
                c1_time.as_secs_f64()
            ),
        },
        Line {
            id: 2,
            name: "soundness",
            pass: unsound.is_empty(),
            detail: format!(
                "{runs} runs, {} failures {:?}, fuzz {:.1}s",
                unsound.len(),
                unsound,
                fuzz_start.elapsed().as_secs_f64()
            ),
        },
        Line {
            id: 7,
            name: "baseline dominance",
            pass: baseline_worse.is_empty() && strict > 0,
            detail: format!(
                "{compared} valid baseline outputs, exact strictly smaller on {strict}, \
                 violations {baseline_worse:?}; {baseline_invalid} baseline outputs fail \
                 verification (smaller than the exact minimum but invalid: {invalid_smaller:?})"
            ),
        },
    ]
}

fn criterion_3() -> Line {
    let mut failed = Vec::new();
    let mut total = 0;
    for name in instances::BUILTIN_NAMES {
        let (f, spec) = instances::builtin(name).unwrap();
        for c in check_expectations(&f, &spec, &CdclSolver).unwrap() {
            total += 1;
            if !c.holds {
                failed.push(format!(
                    "{name}: {} (observed {})",
                    c.expectation, c.observed
                ));
            }
        }
    }
    Line {
        id: 3,
        name: "regressions",
        pass: failed.is_empty() && total > 0,
        detail: format!("{total} expectations, failures {failed:?}"),
    }
}

fn encoding_instances() -> Vec<(String, PFilter)> {
    let mut out: Vec<(String, PFilter)> = instances::BUILTIN_NAMES
        .iter()
        .map(|n| (n.to_string(), instances::builtin(n).unwrap().0))
        .collect();
    out.push(("nxm-2x3".into(), gen_nxm(2, 3)));
    out.push(("nxm-3x3".into(), gen_nxm(3, 3)));
    for (i, f) in so_instances().into_iter().take(10).enumerate() {
        out.push((format!("so#{i}"), f));
    }
    for (i, f) in mo_instances().into_iter().take(10).enumerate() {
        out.push((format!("mo#{i}"), f));
    }
    out
}

fn criterion_4_5() -> [Line; 2] {
    let start = Instant::now();
    let mut count_checks = 0;
    let mut count_errors = Vec::new();
    let mut disagreements = Vec::new();
    let mut monotonicity = Vec::new();
    let mut instances = 0;
    for (name, f) in encoding_instances() {
        let complex = compatibility_complex(&f).unwrap();
        let zippers = generate_zippers(&f, &complex).unwrap();
        let t = f.num_states();
        instances += 1;
        let mut exact_seen = Vec::new();
        let mut minimal_seen = Vec::new();
        for k in 1..=t {
            let opts = EncodeOptions {
                encoding: Encoding::PaperExact,
                ..EncodeOptions::default()
            };
            let cnf = encode_k_cover(&complex, &zippers, k, &opts).unwrap();
            let want = t * k
                + zippers
                    .iter()
                    .map(|z| k * (k + z.u_set.len()))
                    .sum::<usize>();
            count_checks += 1;
            if cnf.num_vars != want {
                count_errors.push(format!("{name} k={k}: {} vs {want}", cnf.num_vars));
            }
            let a = sat_at(&f, &zippers, k, Encoding::PaperExact);
            let b = sat_at(&f, &zippers, k, Encoding::MinimalNonface);
            if a != b {
                disagreements.push(format!("{name} k={k}"));
            }
            exact_seen.push(a);
            minimal_seen.push(b);
        }
        for seen in [&exact_seen, &minimal_seen] {
            let inverted = seen.windows(2).any(|w| w[0] && !w[1]);
            if inverted || !seen.last().copied().unwrap_or(false) {
                monotonicity.push(name.clone());
            }
        }
    }
    [
        Line {
            id: 4,
            name: "encoding counts",
            pass: count_errors.is_empty() && disagreements.is_empty() && instances >= 20,
            detail: format!(
                "{instances} instances, {count_checks} counts checked, count errors {count_errors:?}, \
                 mode disagreements {disagreements:?}, {:.1}s",
                start.elapsed().as_secs_f64()
            ),
        },
        Line {
            id: 5,
            name: "monotonicity and ceiling",
            pass: monotonicity.is_empty(),
            detail: format!("{instances} instances, violations {monotonicity:?}"),
        },
    ]
}

fn criterion_6() -> Line {
    let opts = MinimizeOptions::default();
    let mut rows = Vec::new();
    let mut slow = Vec::new();
    let mut grid_zippers = Vec::new();
    let mut uncertified = Vec::new();
    let nxm = [(2, 3), (3, 3), (4, 4), (5, 5), (6, 6)];
    let jobs = nxm
        .iter()
        .map(|&(n, m)| (format!("nxm-{n}x{m}"), gen_nxm(n, m), false))
        .chain([4, 6, 8, 10].into_iter().map(|n| {
            (
                format!("grid-{n}"),
                gen_grid(n, &ExitSpec::default_for(n)),
                true,
            )
        }));
    for (name, f, is_grid) in jobs {
        let start = Instant::now();
        let row = run_one(&name, &f, &CdclSolver, &opts).unwrap();
        if start.elapsed() > SCALE_BUDGET {
            slow.push(format!("{name} {:.1}s", start.elapsed().as_secs_f64()));
        }
        if is_grid && row.zipper_count != 0 {
            grid_zippers.push(format!("{name}: {}", row.zipper_count));
        }
        if !row.certified {
            uncertified.push(name.clone());
        }
        rows.push(row);
    }
    print!("{}", rows_to_csv(&rows));
    Line {
        id: 6,
        name: "scalability",
        pass: slow.is_empty() && grid_zippers.is_empty(),
        detail: format!(
            "{} runs, over budget {slow:?}, grid zippers {grid_zippers:?}, uncertified {uncertified:?}",
            rows.len()
        ),
    }
}

fn main() {
    // `cargo test` passes harness flags; a name filter that excludes this
    // target's name skips it.
    let args: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let fuzz = fuzz_instances();
    let mut lines = Vec::new();
    lines.extend(criterion_1_2_7(&fuzz));
    lines.push(criterion_3());
    lines.extend(criterion_4_5());
    lines.push(criterion_6());
    lines.sort_by_key(|l| l.id);
    let mut failed = 0;
    for l in &lines {
        let status = if l.pass { "PASS" } else { "FAIL" };
        println!("criterion {} ({}): {status}: {}", l.id, l.name, l.detail);
        failed += usize::from(!l.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
