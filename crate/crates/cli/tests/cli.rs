use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn filtermin(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_filtermin"))
        .args(args)
        .env_remove("FILTERMIN_SOLVER")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(args: &[&str]) -> String {
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    let o = filtermin(&all, None);
    assert!(o.status.success());
    stdout(&o)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn nxm_pipe_minimizes_to_three() {
    let f = gen(&["--family", "nxm", "--n", "2", "--m", "3"]);
    let o = filtermin(&["minimize"], Some(&f));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("states: 9 -> 3"), "{text}");
    assert!(text.contains("certified minimal: true"));
    assert!(text.contains("time: zipper"));
}

#[test]
fn minimize_output_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    let out = dir.path().join("min.json");
    let dot = dir.path().join("min.dot");
    fs::write(&input, gen(&["--family", "builtin:counterexample-nd"])).unwrap();
    let o = filtermin(
        &[
            "minimize",
            "-i",
            path_str(&input),
            "--out",
            path_str(&out),
            "--dot",
            path_str(&dot),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("states: 8 -> 5"));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let ok = filtermin(
        &[
            "verify",
            "--reference",
            path_str(&input),
            "--candidate",
            path_str(&out),
        ],
        None,
    );
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let same = filtermin(
        &[
            "verify",
            "--reference",
            path_str(&input),
            "--candidate",
            path_str(&input),
        ],
        None,
    );
    assert_eq!(same.status.code(), Some(0));
    let reversed = filtermin(
        &[
            "verify",
            "--reference",
            path_str(&out),
            "--candidate",
            path_str(&input),
        ],
        None,
    );
    assert_eq!(reversed.status.code(), Some(1));
}

#[test]
fn zippers_listing() {
    let f = gen(&["--family", "builtin:counterexample-nd"]);
    let o = filtermin(&["zippers"], Some(&f));
    assert_eq!(
        stdout(&o),
        "U{w1,w2} -a-> W{w5,w6}\nU{w3,w4} -b-> W{w6,w7}\ncount: 2\n"
    );
}

#[test]
fn encode_writes_dimacs_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("f.cnf");
    let f = gen(&["--family", "builtin:drone"]);
    let o = filtermin(
        &[
            "encode",
            "--k",
            "2",
            "--encoding",
            "paper-exact",
            "--out",
            path_str(&cnf),
        ],
        Some(&f),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&cnf).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(header[..2], ["p", "cnf"]);
    let map = fs::read_to_string(dir.path().join("f.cnf.map")).unwrap();
    assert!(map.starts_with("R F 1 1\nR F 2 2\n"));
    let vars: usize = header[2].parse().unwrap();
    assert_eq!(map.lines().count(), vars);
}

#[test]
fn oracle_on_drone() {
    let f = gen(&["--family", "builtin:drone"]);
    let o = filtermin(&["oracle"], Some(&f));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("minimal size: 3\n"));
}

#[test]
fn bench_csv() {
    let o = filtermin(&["bench", "--family", "nxm", "--n", "2", "--m", "3"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance,states_in,states_out,zipper_count,t_zipper,t_encode,t_solve,certified")
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        filtermin(&["minimize", "-i", "/nonexistent.json"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        filtermin(&["gen", "--family", "nope"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        filtermin(&["minimize"], Some("{not json")).status.code(),
        Some(2)
    );
    assert_eq!(filtermin(&["frobnicate"], None).status.code(), Some(2));
    let f = gen(&["--family", "builtin:drone"]);
    assert_eq!(
        filtermin(&["minimize", "--solver", "nope"], Some(&f))
            .status
            .code(),
        Some(2)
    );
}

#[cfg(unix)]
#[test]
fn solver_timeout_exits_three() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("slow.sh");
    fs::write(&script, "#!/bin/sh\nsleep 30\n").unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let f = gen(&["--family", "random", "--states", "12", "--seed", "5"]);
    let solver = format!("exec:{}", path_str(&script));
    let o = filtermin(
        &["minimize", "--solver", &solver, "--timeout", "0.5"],
        Some(&f),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("certified minimal: false"));
    assert!(text.contains("TIMEOUT"));
}
