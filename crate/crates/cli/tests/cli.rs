use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toda-kdv"))
}

fn quick_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/quick.toml")
}

fn run_quick(out: &Path, threads: Option<&str>) -> Output {
    let mut c = bin();
    c.args(["run", "--config"]).arg(quick_config()).arg("--out").arg(out);
    if let Some(t) = threads {
        c.env("RAYON_NUM_THREADS", t);
    }
    c.output().unwrap()
}

fn golden(action: &str, dir: &Path, from: &Path) -> Output {
    bin().args(["golden", action, "--dir"]).arg(dir).arg("--from").arg(from).output().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn quick_run_passes_and_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run_quick(&out, None);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(out.join("summary.json").is_file());
    assert!(out.join("spectra_p0.csv").is_file());
}

#[test]
fn golden_round_trip_and_located_diff() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let gold = tmp.path().join("golden");
    assert_eq!(run_quick(&out, None).status.code(), Some(0));
    let o = golden("update", &gold, &out);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let o = golden("check", &gold, &out);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));

    // nudge one value in the second row by a relative 1e-6
    let file = gold.join("spectra_p0.csv");
    let contents = fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = contents.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(str::to_string).collect();
    let last = fields.len() - 1;
    let x: f64 = fields[last].parse().unwrap();
    fields[last] = format!("{:.9e}", x * (1.0 + 1e-6) + 1e-6);
    lines[1] = fields.join(",");
    fs::write(&file, lines.join("\n") + "\n").unwrap();

    let o = golden("check", &gold, &out);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    let t = text(&o);
    assert!(t.contains(&format!("spectra_p0.csv:2:{}", last + 1)), "{t}");
}

#[test]
fn thread_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let (one, four) = (tmp.path().join("one"), tmp.path().join("four"));
    assert_eq!(run_quick(&one, Some("1")).status.code(), Some(0));
    assert_eq!(run_quick(&four, Some("4")).status.code(), Some(0));
    let mut names: Vec<_> = fs::read_dir(&one).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 3);
    for n in names {
        assert_eq!(fs::read(one.join(&n)).unwrap(), fs::read(four.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn invalid_config_exits_with_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "N_list = [16, 8]\neta = 0.25\n[[profiles]]\n").unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("error"));
}

#[test]
fn missing_golden_dir_says_how_to_create_it() {
    let tmp = tempfile::tempdir().unwrap();
    let o = golden("check", &tmp.path().join("nowhere"), tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("toda-kdv golden update --dir"), "{}", text(&o));
}
