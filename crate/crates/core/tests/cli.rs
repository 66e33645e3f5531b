use std::process::{Command, Output};

fn confstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confstab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Table cells in row order, dropping the header row and the label column.
fn cells(text: &str, sep: char) -> Vec<u64> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with("|-"))
        .flat_map(|l| {
            l.trim_matches('|')
                .split(sep)
                .skip(1)
                .map(|c| c.trim().parse::<u64>().unwrap())
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["dim-table", "--p", "3", "--max-deg", "8", "--max-par", "16"][..],
        &["verify-range", "--p", "3", "--m", "1", "--k-max", "20", "--threads", "3"],
        &["bracket-check", "--p", "3", "--class", "z1"],
        &["words-verify", "--n", "4", "--m", "2", "--max-par", "32"],
    ] {
        let a = confstab(args);
        let b = confstab(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn formats_carry_the_same_numbers() {
    let grid = ["--p", "5", "--max-deg", "10", "--max-par", "20"];
    let run = |cmd: &str, format: &str| {
        let o = confstab(&[&[cmd, "--format", format][..], &grid].concat());
        assert!(o.status.success());
        stdout(&o)
    };
    for cmd in ["dim-table", "poincare"] {
        let csv = run(cmd, "csv");
        let md = run(cmd, "md");
        let json: serde_json::Value = serde_json::from_str(&run(cmd, "json")).unwrap();
        let json_cells: Vec<u64> = json["dims"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|row| row.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()))
            .collect();
        assert_eq!(cells(&csv, ','), json_cells, "{cmd}");
        assert_eq!(cells(&md, '|'), json_cells, "{cmd}");
        assert_eq!(json_cells.len(), 11 * 21);
    }
}

#[test]
fn dimension_grid_matches_known_values() {
    let o = confstab(&["dim-table", "--format", "csv", "--p", "2", "--max-deg", "10", "--max-par", "20"]);
    let text = stdout(&o);
    let rows: Vec<Vec<u64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.len() == 21));
    // H_*(B_4; F_2) is one-dimensional in degrees 0 to 3.
    assert_eq!((0..=10).map(|i| rows[i][4]).collect::<Vec<_>>(), [1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
    assert_eq!(rows[1][20], 1);
    assert_eq!(rows[0][0], 1);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("confstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cone.json");
    let o = confstab(&["cone-dim", "--p", "3", "--m", "1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.is_object());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(confstab(&["optimality", "--p", "2", "--m", "1", "--k-max", "8"]).status.code(), Some(0));
    assert_eq!(confstab(&["verify-range", "--p", "2", "--slack", "1"]).status.code(), Some(2));
    assert_eq!(confstab(&["words-verify", "--n", "3", "--m", "1", "--strict"]).status.code(), Some(2));
    assert_eq!(confstab(&["bracket-check", "--p", "3", "--class", "e^2"]).status.code(), Some(2));
    assert_eq!(confstab(&["verify-range", "--p", "4"]).status.code(), Some(1));
    assert_eq!(confstab(&["bogus"]).status.code(), Some(1));
    assert_eq!(confstab(&["--help"]).status.code(), Some(0));
}

#[test]
fn bracket_trace_is_jsonl() {
    let o = confstab(&["bracket-check", "--n", "3", "--p", "2", "--class", "w2"]);
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["kind"], "initial");
    assert_eq!(lines.last().unwrap()["verdict"], "vanishes");
}
