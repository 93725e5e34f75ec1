use std::io::Write;
use std::process::{Command, Output, Stdio};

fn invcount(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_invcount"))
        .args(args)
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

fn report(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn counts_values_from_stdin() {
    let out = invcount(
        &["count", "--alg", "mergesort", "--input", "-"],
        Some("3\n1\n2\n"),
    );
    let r = report(&out);
    assert_eq!(r["count"], 2);
    assert_eq!(r["instance"]["n"], 3);
    assert_eq!(r["instance"]["source"], "-");
}

#[test]
fn counts_values_from_file() {
    let path = std::env::temp_dir().join(format!("invcount-{}.txt", std::process::id()));
    std::fs::write(&path, "5\n4\n3\n2\n1\n").unwrap();
    let out = invcount(
        &[
            "count",
            "--alg",
            "adaptive",
            "--input",
            path.to_str().unwrap(),
            "--verify",
        ],
        None,
    );
    std::fs::remove_file(&path).unwrap();
    let r = report(&out);
    assert_eq!(r["count"], 10);
    assert_eq!(r["verified"], true);
}

#[test]
fn generated_instances_round_trip() {
    let gen = invcount(
        &[
            "generate",
            "--n",
            "200",
            "--shape",
            "target-inversions",
            "--k",
            "777",
            "--seed",
            "3",
        ],
        None,
    );
    assert!(gen.status.success());
    let text = String::from_utf8(gen.stdout).unwrap();
    assert_eq!(text.lines().count(), 200);
    let r = report(&invcount(
        &["count", "--alg", "brute", "--input", "-"],
        Some(&text),
    ));
    assert_eq!(r["count"], 777);
}

#[test]
fn exit_codes() {
    assert_eq!(
        invcount(&["count", "--alg", "bogus"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        invcount(
            &[
                "count",
                "--n",
                "5",
                "--shape",
                "target-inversions",
                "--k",
                "11"
            ],
            None
        )
        .status
        .code(),
        Some(2)
    );
    let bad = invcount(&["count", "--input", "-"], Some("1\n2\nx7\n"));
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 3"));
}

#[test]
fn timing_is_opt_in() {
    let plain = report(&invcount(&["estimate", "--n", "100"], None));
    assert!(plain.get("wall_ns").is_none());
    let timed = report(&invcount(&["estimate", "--n", "100", "--timing"], None));
    assert!(timed["wall_ns"].is_u64());
}

#[test]
fn bench_csv_is_nondecreasing_in_kstar() {
    let out = invcount(
        &[
            "bench",
            "--alg",
            "adaptive",
            "--n",
            "32768",
            "--mem",
            "1024",
            "--block",
            "32",
            "--kstar",
            "0,32768,33554432",
            "--seeds",
            "5",
        ],
        None,
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (kcol, rcol) = (col("kstar"), col("io_reads"));
    let mut means: Vec<(u64, f64, u32)> = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let k: u64 = f[kcol].parse().unwrap();
        let reads: f64 = f[rcol].parse().unwrap();
        match means.last_mut() {
            Some((last, sum, cnt)) if *last == k => {
                *sum += reads;
                *cnt += 1;
            }
            _ => means.push((k, reads, 1)),
        }
    }
    assert_eq!(means.len(), 3);
    let avg: Vec<f64> = means.iter().map(|(_, s, c)| s / *c as f64).collect();
    assert!(avg.windows(2).all(|w| w[0] <= w[1]), "{avg:?}");
}
