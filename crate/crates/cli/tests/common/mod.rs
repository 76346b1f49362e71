#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn input(name: &str) -> String {
    golden_dir().join("inputs").join(format!("{name}.json")).display().to_string()
}

/// Runs the binary with `FRAMECAST_TOL_IDENTITY` cleared unless given in `env`.
pub fn run_with(args: &[&str], stdin: &[u8], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_framecast"));
    cmd.args(args)
        .env_remove("FRAMECAST_TOL_IDENTITY")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("spawn framecast");
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn run(args: &[&str]) -> Run {
    run_with(args, b"", &[])
}

pub fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("output is JSON")
}

/// A golden report: arguments (`@name` expands to an input file, `%tmp`
/// to a scratch directory) and the expected exit code.
pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const GOLDEN: &[GoldenCase] = &[
    GoldenCase { name: "analyze_onb", args: &["analyze", "@onb"], exit: 0 },
    GoldenCase { name: "analyze_e1e1e2", args: &["analyze", "@e1e1e2"], exit: 0 },
    GoldenCase { name: "analyze_collinear", args: &["analyze", "@collinear"], exit: 3 },
    GoldenCase {
        name: "iterate_steps",
        args: &["iterate", "--op", "@diag_half_third", "--vec", "@ones2", "--steps", "3"],
        exit: 0,
    },
    GoldenCase {
        name: "iterate_infinite",
        args: &["iterate", "--op", "@diag_half_third", "--vec", "@ones2", "--infinite"],
        exit: 0,
    },
    GoldenCase { name: "recover_swap", args: &["recover", "@swap_orbit"], exit: 0 },
    GoldenCase { name: "recover_inconsistent", args: &["recover", "@inconsistent"], exit: 0 },
    GoldenCase {
        name: "represent_check_frame",
        args: &["represent-check", "--op", "@diag_half_third", "--vec", "@ones2"],
        exit: 0,
    },
    GoldenCase {
        name: "represent_check_singular",
        args: &["represent-check", "--op", "@diag_half_third", "--vec", "@e1"],
        exit: 0,
    },
    GoldenCase {
        name: "diagonalize_hermitian",
        args: &["diagonalize", "--op", "@hermitian3", "--vec", "@ones3"],
        exit: 0,
    },
    GoldenCase { name: "perturb_sandwich", args: &["perturb", "@onb", "@stretched"], exit: 0 },
    GoldenCase {
        name: "perturb_sampled",
        args: &["perturb", "@onb", "@scaled_onb", "--l1", "0.5", "--l2", "0.5", "--trials", "500", "--seed", "3"],
        exit: 0,
    },
    GoldenCase { name: "conjecture_diagonal", args: &["conjecture", "--op", "@diag_half_third"], exit: 0 },
    GoldenCase { name: "conjecture_jordan", args: &["conjecture", "--op", "@jordan_half"], exit: 0 },
    GoldenCase {
        name: "conjecture_unimodular",
        args: &["conjecture", "--op", "@diag_one_half", "--trials", "16", "--seed", "9"],
        exit: 0,
    },
    GoldenCase { name: "generate_harmonic_op", args: &["generate", "harmonic", "2", "4"], exit: 0 },
    GoldenCase {
        name: "generate_harmonic_vec",
        args: &["generate", "harmonic", "2", "4", "--out", "%tmp/op.json", "--vec-out", "-"],
        exit: 0,
    },
    GoldenCase {
        name: "generate_contraction",
        args: &["generate", "contraction", "3", "0.5", "--seed", "7"],
        exit: 0,
    },
    GoldenCase { name: "generate_jordan", args: &["generate", "jordan", "0.5", "2"], exit: 0 },
];

pub fn expand(args: &[&str], tmp: &Path) -> Vec<String> {
    args.iter()
        .map(|a| {
            if let Some(name) = a.strip_prefix('@') {
                input(name)
            } else {
                a.replace("%tmp", &tmp.display().to_string())
            }
        })
        .collect()
}

pub fn run_golden(case: &GoldenCase, tmp: &Path) -> Run {
    let args = expand(case.args, tmp);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digests_path() -> PathBuf {
    golden_dir().join("digests.txt")
}

/// `name exit sha256` per line.
pub fn read_digests() -> Vec<(String, i32, String)> {
    std::fs::read_to_string(digests_path())
        .unwrap_or_default()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            (parts[0].to_string(), parts[1].parse().unwrap(), parts[2].to_string())
        })
        .collect()
}
