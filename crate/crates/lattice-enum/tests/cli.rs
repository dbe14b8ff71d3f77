use std::collections::BTreeSet;
use std::process::Command;

use lattice_enum::LevelledLattice;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lattice-enum"))
}

#[test]
fn rejects_out_of_range_and_garbage() {
    for args in [
        &["--max-n", "1"][..],
        &["--max-n", "25"],
        &["--max-n", "6", "--mode", "bogus"],
        &[],
    ] {
        let out = bin().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn prints_count_table() {
    let out = bin().args(["--max-n", "6", "--mode", "all"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "# mode=all max_n=6\n1\t1\n2\t1\n3\t1\n4\t2\n5\t5\n6\t15\n"
    );
    let out = bin().args(["--max-n", "6", "--mode", "vi"]).output().unwrap();
    let body = String::from_utf8(out.stdout).unwrap();
    assert!(body.ends_with("5\t2\n6\t7\n"), "{body}");
}

#[test]
fn count_table_is_thread_independent() {
    let mut tables = Vec::new();
    for threads in ["1", "2", "8"] {
        let out = bin()
            .args(["--max-n", "9", "--threads", threads, "--seed-size", "5"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        tables.push(out.stdout);
    }
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[0], tables[2]);
}

#[test]
fn emitted_lattices_reparse() {
    let dir = std::env::temp_dir().join(format!("lattice-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let emit = dir.join("lattices.txt");
    let counts = dir.join("counts.tsv");
    let out = bin()
        .args(["--max-n", "7", "--mode", "graded"])
        .arg("--emit")
        .arg(&emit)
        .arg("--counts-out")
        .arg(&counts)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());

    let table = std::fs::read_to_string(&counts).unwrap();
    let mut expected = 0u64;
    for line in table.lines().skip(2) {
        expected += line.split('\t').nth(1).unwrap().parse::<u64>().unwrap();
    }
    let body = std::fs::read_to_string(&emit).unwrap();
    let mut seen = BTreeSet::new();
    for line in body.lines() {
        let l = LevelledLattice::deserialize(line).unwrap();
        l.validate().unwrap();
        assert!(seen.insert(line.to_string()), "duplicate line {line}");
    }
    assert_eq!(seen.len() as u64, expected);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn write_failure_exits_one() {
    let out = bin()
        .args(["--max-n", "4", "--counts-out", "/nonexistent-dir/x.tsv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
