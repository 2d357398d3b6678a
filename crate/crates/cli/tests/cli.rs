use std::process::{Command, Output};

fn kloo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kloo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV rows without the header, each split into fields.
fn rows(o: &Output) -> Vec<Vec<String>> {
    let text = stdout(o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,q,p,r,method,value,closed,match,elapsed_ms"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn without_timing(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn eval_examples() {
    let o = kloo(&["eval", "0", "0", "35"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("24\t"));
    assert!(stdout(&kloo(&["eval", "1", "1", "2"])).starts_with("1\t"));
    let v: f64 = stdout(&kloo(&["eval", "1", "1", "5"]))
        .split('\t')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let direct: f64 = [(1u64, 1u64), (2, 3), (3, 2), (4, 4)]
        .iter()
        .map(|&(x, xi)| (2.0 * std::f64::consts::PI * ((x + xi) % 5) as f64 / 5.0).cos())
        .sum();
    assert!((v - direct).abs() < 1e-12);
    let o = kloo(&["eval", "-1", "3", "7", "--format", "json"]);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["q"], 7);
}

#[test]
fn moment_examples() {
    let r = rows(&kloo(&["moment", "4", "25", "--method", "closed"]));
    assert_eq!(r[0][5], "37500");
    assert_eq!(r[0][4], "closed-form");
    let r = rows(&kloo(&["moment", "1", "360"]));
    assert_eq!(r[0][5], "0");
    let r = rows(&kloo(&["moment", "5", "9", "--method", "exact"]));
    assert_eq!(r[0][5], "-3645");
    assert_eq!(r[0][7], "true");
    let r = rows(&kloo(&["moment", "6", "13", "--method", "direct"]));
    assert_eq!((r[0][4].as_str(), r[0][7].as_str()), ("direct-float", "true"));
    let o = kloo(&["moment", "7", "11", "--method", "closed"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("outside validity"));
}

#[test]
fn exit_codes() {
    assert_eq!(kloo(&["moment", "6", "32041"]).status.code(), Some(3));
    assert_eq!(kloo(&["moment", "3", "1"]).status.code(), Some(2));
    assert_eq!(kloo(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(kloo(&["eval"]).status.code(), Some(2));
}

#[test]
fn verify_examples() {
    let o = kloo(&["verify", "salie", "--pmax", "200"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r.len(), 3 * 44);
    assert!(r.iter().all(|row| row[7] == "true"));

    let o = kloo(&["verify", "primepower", "--n", "4", "--p", "2", "--rmax", "8"]);
    assert!(o.status.success());
    let r = rows(&o);
    let rs: Vec<u32> = r.iter().map(|row| row[3].parse().unwrap()).collect();
    assert_eq!(rs, [5, 6, 7, 8]);
    for row in &r {
        let r: u32 = row[3].parse().unwrap();
        assert_eq!(row[5], (3u64 << (3 * r)).to_string());
    }

    assert!(kloo(&["verify", "congruence", "--pmax", "100", "--nmax", "12"])
        .status
        .success());
}

#[test]
fn json_reports() {
    let o = kloo(&["verify", "hformula", "--format", "json", "--jobs", "2"]);
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|v| v["match"] == true && v["value"].is_string()));
}

#[test]
fn reports_are_deterministic() {
    let a = kloo(&["verify", "segers", "--jobs", "3"]);
    let b = kloo(&["verify", "segers", "--jobs", "1"]);
    assert!(a.status.success());
    assert_eq!(without_timing(&stdout(&a)), without_timing(&stdout(&b)));
}

#[test]
fn mismatch_exits_one() {
    // the small T-value identities are for odd p; at p = 2, 1 + T_4 = 0 rather than -4
    let o = kloo(&["verify", "tbound", "--p", "2", "--nmax", "6"]);
    assert_eq!(o.status.code(), Some(1));
    let bad: Vec<_> = rows(&o).into_iter().filter(|r| r[7] == "false").collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(
        (bad[0][0].as_str(), bad[0][4].as_str(), bad[0][5].as_str()),
        ("4", "t-identity", "0")
    );
    assert!(kloo(&["verify", "tbound", "--p", "3", "--nmax", "6"]).status.success());
}

#[test]
fn negation_search_lists_pairs_once() {
    let o = kloo(&["negation-search", "2", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let pairs: Vec<(u64, u64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<_> = l.split(',').collect();
            assert_eq!(f[2], "numerically-zero");
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert!(!pairs.is_empty());
    assert!(pairs.iter().all(|(a, b)| a < b));
}
