mod cli;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::Parser;
use cli::{
    BenchArgs, Cli, Command, EncodeArgs, GenArgs, InputArgs, MinimizeArgs, OracleArgs, SolveArgs,
    VerifyArgs,
};
use filtermin_core::format::{
    filter_from_json, filter_to_dot, filter_to_json, graph_to_dot, load_filter,
};
use filtermin_core::instances::{self, gen_grid, gen_nxm, ExitSpec};
use filtermin_core::minimize::{prepare, prepare_input};
use filtermin_core::oracle::{random_filter, RandomSpec};
use filtermin_core::sweep::{grid_sweep, nxm_sweep, rows_to_csv};
use filtermin_core::zipper::zippers_to_text;
use filtermin_core::{
    brute_force_minimize, compatibility_graph, encode_k_cover, generate_zippers, minimize,
    verify_solution, MinimizeOptions, PFilter, SatSolver, SolverKind,
};

const EXIT_FAILS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNCERTIFIED: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Minimize(args) => cmd_minimize(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Zippers(args) => cmd_zippers(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn read_input(args: &InputArgs) -> Result<PFilter> {
    match args.input.as_deref() {
        Some(p) if p != Path::new("-") => {
            load_filter(p).with_context(|| format!("reading {}", p.display()))
        }
        _ => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .context("reading stdin")?;
            filter_from_json(&text).context("parsing filter from stdin")
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout"),
    }
}

fn solver_kind(s: &str) -> Result<SolverKind> {
    match s.parse::<SolverKind>() {
        Ok(kind) => Ok(kind),
        // A bare path names an executable solver.
        Err(_) if Path::new(s).is_file() => Ok(SolverKind::Exec(PathBuf::from(s))),
        Err(e) => Err(e.into()),
    }
}

fn options(args: &SolveArgs) -> Result<(MinimizeOptions, Box<dyn SatSolver + Send + Sync>)> {
    let mut opts = MinimizeOptions {
        mode: args.mode.parse()?,
        ..MinimizeOptions::default()
    };
    opts.encode.encoding = args.encoding.parse()?;
    opts.encode.symmetry_breaking = args.symmetry_breaking;
    if let Some(t) = args.timeout {
        if !(t.is_finite() && t > 0.0) {
            bail!("--timeout must be a positive number of seconds");
        }
        opts.timeout = Some(Duration::from_secs_f64(t));
    }
    Ok((opts, solver_kind(&args.solver)?.instantiate()))
}

fn cmd_minimize(args: MinimizeArgs) -> Result<u8> {
    let f = read_input(&args.input)?;
    let (mut opts, solver) = options(&args.solve)?;
    opts.binary_search = args.binary_search;
    if let Some(p) = &args.graph_dot {
        let (prepared, _) = prepare_input(&f);
        let g = compatibility_graph(&prepared)?;
        fs::write(p, graph_to_dot(&prepared, g.edges()))?;
    }
    let report = minimize(&f, solver.as_ref(), &opts)?;
    print!("{report}");
    if let Some(p) = &args.out {
        fs::write(p, filter_to_json(&report.minimal_filter))?;
    }
    if let Some(p) = &args.dot {
        fs::write(p, filter_to_dot(&report.minimal_filter))?;
    }
    Ok(if report.certified {
        0
    } else {
        EXIT_UNCERTIFIED
    })
}

fn cmd_encode(args: EncodeArgs) -> Result<u8> {
    let f = read_input(&args.input)?;
    let (opts, _) = options(&args.solve)?;
    let prepared = prepare(&f, &opts)?;
    let cnf = encode_k_cover(&prepared.complex, &prepared.zippers, args.k, &opts.encode)?;
    write_out(args.out.as_deref(), &cnf.to_dimacs())?;
    let map = args.map.or_else(|| {
        args.out.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".map");
            PathBuf::from(s)
        })
    });
    let listing = cnf.var_map(&prepared.filter);
    match map {
        Some(p) => fs::write(&p, listing).with_context(|| format!("writing {}", p.display()))?,
        None => eprint!("{listing}"),
    }
    eprintln!(
        "k={} vars={} clauses={} (at-least-one {}, forbidden {}, zipper {}, symmetry {})",
        cnf.k,
        cnf.num_vars,
        cnf.clauses.len(),
        cnf.counts.at_least_one,
        cnf.counts.forbidden,
        cnf.counts.zipper,
        cnf.counts.symmetry
    );
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let reference = load_filter(&args.reference)
        .with_context(|| format!("reading {}", args.reference.display()))?;
    let candidate = load_filter(&args.candidate)
        .with_context(|| format!("reading {}", args.candidate.display()))?;
    let verdict = verify_solution(&reference, &candidate);
    print!("{verdict}");
    Ok(if verdict.passes() { 0 } else { EXIT_FAILS })
}

fn cmd_zippers(args: InputArgs) -> Result<u8> {
    let f = read_input(&args)?;
    let prepared = prepare(&f, &MinimizeOptions::default())?;
    let zippers = generate_zippers(&prepared.filter, &prepared.complex)?;
    print!("{}", zippers_to_text(&prepared.filter, &zippers));
    println!("count: {}", zippers.len());
    Ok(0)
}

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let f = read_input(&args.input)?;
    let (f, _) = prepare_input(&f);
    let r = brute_force_minimize(&f, args.max_states)?;
    println!("minimal size: {}", r.minimal_size);
    for part in r.witness_cover.to_names(&f) {
        println!("{{{}}}", part.join(","));
    }
    println!("explored: {}", r.explored);
    Ok(0)
}

fn generate(args: &GenArgs) -> Result<PFilter> {
    if let Some(name) = args.family.strip_prefix("builtin:") {
        return Ok(instances::builtin(name)?.0);
    }
    Ok(match args.family.as_str() {
        "nxm" => gen_nxm(args.n, args.m),
        "grid" => gen_grid(args.n, &ExitSpec::default_for(args.n)),
        "random" => {
            let spec = RandomSpec {
                states: args.states,
                ..RandomSpec::default()
            };
            random_filter(&spec, args.seed)
        }
        other => bail!("unknown family `{other}` (expected nxm, grid, random or builtin:<name>)"),
    })
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    let f = generate(&args)?;
    write_out(args.out.as_deref(), &(filter_to_json(&f) + "\n"))?;
    if let Some(p) = &args.dot {
        fs::write(p, filter_to_dot(&f))?;
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    if !matches!(args.family.as_str(), "nxm" | "grid" | "all") {
        bail!(
            "unknown bench family `{}` (expected nxm, grid or all)",
            args.family
        );
    }
    let (opts, solver) = options(&args.solve)?;
    let mut rows = Vec::new();
    if matches!(args.family.as_str(), "nxm" | "all") {
        let n = args.n.unwrap_or(6);
        let sizes: Vec<(usize, usize)> = (2..=n)
            .flat_map(|a| (2..=args.m).map(move |b| (a, b)))
            .collect();
        rows.extend(nxm_sweep(&sizes, solver.as_ref(), &opts)?);
    }
    if matches!(args.family.as_str(), "grid" | "all") {
        let n = args.n.unwrap_or(10);
        let sizes: Vec<usize> = (6..=n).step_by(2).collect();
        rows.extend(grid_sweep(&sizes, solver.as_ref(), &opts)?);
    }
    write_out(args.out.as_deref(), &rows_to_csv(&rows))?;
    Ok(if rows.iter().all(|r| r.certified) {
        0
    } else {
        EXIT_UNCERTIFIED
    })
}
