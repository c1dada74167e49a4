//! Release acceptance checks for the `acn` binary: criterion 06 (the
//! designed rates reach the output byte-for-byte) and criterion 15
//! (deterministic reruns, worker-count independence), plus the documented
//! exit codes. The remaining numbered criteria live in the core crate.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn pass(number: u32, name: &str, detail: &str) {
    println!("acceptance {number:02} ({name}): PASS [{detail}]");
}

fn acn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_acn"))
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = acn();
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    cmd.output().expect("the binary should spawn")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).expect("config should be writable");
    path
}

const FIVE_ISOTROPIC: &str = r#"
seed = 1

[array]
wavelength = 0.125

[[array.elements]]
position = [0.0, 0.0]
kind = "isotropic"

[[array.elements]]
position = [0.0625, 0.0]
kind = "isotropic"

[[array.elements]]
position = [0.125, 0.0]
kind = "isotropic"

[[array.elements]]
position = [0.1875, 0.0]
kind = "isotropic"

[[array.elements]]
position = [0.25, 0.0]
kind = "isotropic"

[budget]
snr_db = 10.0
packets = 5
period_s = 0.1
"#;

const TWIN_PATTERNS: &str = r#"
seed = 9

[array]
wavelength = 0.125

[[array.elements]]
position = [0.0, 0.0]
kind = "cardioid"
pointing_deg = 23.0
depth = 0.35

[[array.elements]]
position = [0.0625, 0.0]
kind = "dipole-cosine"
pointing_deg = 63.0

[budget]
snr_db = 10.0
packets = 5
period_s = 0.1

[pep]
kind = "exponential"
a = 1.0
b = 0.2

[montecarlo]
trials = 20000
scenario2_samples = 25000
paths = 64
"#;

const INFEASIBLE: &str = r#"
[array]
wavelength = 0.125

[[array.elements]]
position = [0.0, 0.0]
kind = "isotropic"

[[array.elements]]
position = [0.0625, 0.0]
kind = "isotropic"

[[array.elements]]
position = [0.125, 0.0]
kind = "isotropic"

[budget]
snr_db = 10.0
packets = 2
period_s = 0.1
"#;

const OFF_DESIGN_SCHEDULE: &str = r#"
[array]
wavelength = 0.125

[[array.elements]]
position = [0.0, 0.0]
kind = "isotropic"

[[array.elements]]
position = [0.0625, 0.0]
kind = "isotropic"

[budget]
snr_db = 10.0
packets = 5
period_s = 0.1

[schedule]
kind = "explicit"
rates_deg_per_s = [0.0, 3600.0]
"#;

/// Data rows of a report: everything after the `#` comments and the header.
fn data_rows(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn c06_design_emits_the_exact_rate_multiples() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "five.toml", FIVE_ISOTROPIC);
    let out = dir.path().join("design.csv");

    let output = run(
        &[
            "design",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(output.status.success(), "design should succeed");

    let text = fs::read_to_string(&out).unwrap();
    assert!(
        text.contains("# all pair differences in X*: true"),
        "the designed schedule should certify pairwise membership"
    );
    assert!(
        text.contains("# alpha_1 stays optimal for period multiples: [1, 2, 3, 4, 6, 7, 8, 9]"),
        "the period-multiple note should drop the multiples of 5"
    );

    let rows = data_rows(&text);
    assert_eq!(rows.len(), 5, "one row per antenna");
    let k: usize = 5;
    let t = 0.1;
    let base = TAU / (k as f64 * t);
    for (l, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], l.to_string());
        let rate: f64 = fields[1].parse().unwrap();
        let expected = l as f64 * base;
        assert_eq!(
            rate.to_bits(),
            expected.to_bits(),
            "row {l} should carry the exact rate {expected}"
        );
        let member: bool = fields[3].parse().unwrap();
        assert_eq!(member, l > 0, "only the nonzero rates sit in X*");
    }
    pass(
        6,
        "design emits the exact rate multiples",
        &format!("5 rows bit-equal to l * {base}"),
    );
}

#[test]
fn c15_reruns_are_byte_identical_and_worker_independent() {
    let dir = TempDir::new().unwrap();
    let twin = write_config(dir.path(), "twin.toml", TWIN_PATTERNS);
    let twin = twin.to_str().unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec!["design", "--config", twin],
        vec!["sweep-aoa", "--config", twin, "--grid", "48"],
        vec!["sweep-alpha", "--config", twin, "--grid", "33"],
        vec!["compare", "--config", twin],
        vec!["montecarlo", "--config", twin],
        vec!["verify-theory", "--config", twin],
    ];

    for (index, command) in commands.iter().enumerate() {
        let runs = [("a", "1"), ("b", "1"), ("c", "4")];
        let mut outputs = Vec::new();
        for (tag, threads) in runs {
            let out = dir.path().join(format!("{index}_{tag}.out"));
            let mut args = command.clone();
            args.push("--out");
            args.push(out.to_str().unwrap());
            let result = run(&args, Some(threads));
            assert!(
                result.status.success(),
                "{} should succeed: {}",
                command[0],
                String::from_utf8_lossy(&result.stderr)
            );
            outputs.push(fs::read(&out).unwrap());
        }
        assert_eq!(
            outputs[0], outputs[1],
            "{} should be byte-identical on rerun",
            command[0]
        );
        assert_eq!(
            outputs[0], outputs[2],
            "{} should not depend on the worker count",
            command[0]
        );
        if command[0] == "montecarlo" {
            let text = String::from_utf8(outputs[0].clone()).unwrap();
            assert!(text.contains("\"check\":\"burst\""));
            assert!(text.contains("\"check\":\"scenario2\""));
        }
    }
    pass(
        15,
        "reruns are byte-identical and worker independent",
        &format!(
            "{} commands, 1 vs 4 rayon workers, all outputs matched",
            commands.len()
        ),
    );
}

#[test]
fn usage_errors_exit_with_code_one() {
    let dir = TempDir::new().unwrap();

    let missing = run(&["design"], None);
    assert_eq!(missing.status.code(), Some(1), "a config is required");

    let absent = dir.path().join("absent.toml");
    let absent = run(&["design", "--config", absent.to_str().unwrap()], None);
    assert_eq!(absent.status.code(), Some(1), "missing file is a usage error");

    let broken = write_config(dir.path(), "broken.toml", "not = [toml");
    let broken = run(&["design", "--config", broken.to_str().unwrap()], None);
    assert_eq!(broken.status.code(), Some(1), "unparseable config");

    let unknown = write_config(
        dir.path(),
        "unknown.toml",
        &format!("{FIVE_ISOTROPIC}\n[typo_section]\nx = 1\n"),
    );
    let unknown = run(&["design", "--config", unknown.to_str().unwrap()], None);
    assert_eq!(unknown.status.code(), Some(1), "unknown keys are rejected");

    let twin = write_config(dir.path(), "twin.toml", TWIN_PATTERNS);
    let zero = run(
        &["sweep-aoa", "--config", twin.to_str().unwrap(), "--grid", "0"],
        None,
    );
    assert_eq!(zero.status.code(), Some(1), "an empty grid is a usage error");

    let short = write_config(
        dir.path(),
        "short.toml",
        &TWIN_PATTERNS.replace(
            "[montecarlo]",
            "[schedule]\nkind = \"explicit\"\nrates_deg_per_s = [0.0]\n\n[montecarlo]",
        ),
    );
    let short = run(&["compare", "--config", short.to_str().unwrap()], None);
    assert_eq!(
        short.status.code(),
        Some(1),
        "a rate list shorter than the array is a usage error"
    );
}

#[test]
fn infeasible_designs_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "infeasible.toml", INFEASIBLE);
    let config = config.to_str().unwrap();

    for subcommand in ["design", "verify-theory", "compare"] {
        let output = run(&[subcommand, "--config", config], None);
        assert_eq!(
            output.status.code(),
            Some(2),
            "{subcommand} should report infeasibility for 3 antennas over 2 packets"
        );
    }
}

#[test]
fn failed_verification_exits_with_code_three() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "off_design.toml", OFF_DESIGN_SCHEDULE);

    let output = run(&["verify-theory", "--config", config.to_str().unwrap()], None);
    assert_eq!(output.status.code(), Some(3), "x = pi sits outside X*");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(
        stdout.contains("verify schedule-pairwise-membership: FAIL"),
        "the failing check should be named: {stdout}"
    );
}

#[test]
fn help_and_version_exit_cleanly() {
    let help = run(&["--help"], None);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8(help.stdout).unwrap();
    for name in [
        "design",
        "sweep-aoa",
        "sweep-alpha",
        "compare",
        "montecarlo",
        "verify-theory",
    ] {
        assert!(text.contains(name), "help should list {name}");
    }

    let version = run(&["--version"], None);
    assert_eq!(version.status.code(), Some(0));
}
