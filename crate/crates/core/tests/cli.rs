use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn irig(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irig"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const P2: &str = "[problem]\nkind = \"selection\"\n\n[run]\niterations = 3000\nx0 = [2.0, -2.0]\nrecord = \"log\"\nrecord_start = 10\noutput = \"p2.csv\"\n";

#[test]
fn solve_is_reproducible_and_rate_fit_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p2.toml"), P2).unwrap();
    let o = irig(dir.path(), &["solve", "-c", "p2.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("k=3000 "));
    let first = fs::read(dir.path().join("p2.csv")).unwrap();
    let o = irig(dir.path(), &["solve", "-c", "p2.toml", "--out", "again.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first, fs::read(dir.path().join("again.csv")).unwrap());

    let o = irig(dir.path(), &["rate-fit", "p2.csv", "--burn-in", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let slope: f64 = stdout(&o).split_whitespace().next().unwrap().trim_start_matches("slope=").parse().unwrap();
    assert!(slope < -0.3, "{slope}");

    let o = irig(dir.path(), &["solve", "-c", "p2.toml", "-n", "5", "--out", "-"]);
    assert!(stdout(&o).starts_with("k,f_bar,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.toml"), "[problem]\nkind = \"selection\"\ntypo = 1\n").unwrap();
    fs::write(d.join("invalid.toml"), "[problem]\nkind = \"selection\"\n[schedule]\ngamma0 = 10.0\n").unwrap();
    fs::write(
        d.join("infeasible.toml"),
        "[problem]\nkind = \"constrained\"\nnormals = [[-1.0, 0.0]]\noffsets = [-3.0]\n",
    )
    .unwrap();
    fs::write(d.join("missing.toml"), "[problem]\nkind = \"svmlight\"\npath = \"nope.svm\"\n").unwrap();

    assert_eq!(irig(d, &["--help"]).status.code(), Some(0));
    assert_eq!(irig(d, &["solve"]).status.code(), Some(1));
    assert_eq!(irig(d, &["solve", "-c", "bad.toml"]).status.code(), Some(1));
    assert_eq!(irig(d, &["solve", "-c", "invalid.toml"]).status.code(), Some(2));
    assert_eq!(irig(d, &["validate", "-c", "invalid.toml"]).status.code(), Some(2));
    assert_eq!(irig(d, &["solve", "-c", "infeasible.toml"]).status.code(), Some(2));
    assert_eq!(irig(d, &["solve", "-c", "missing.toml"]).status.code(), Some(3));
    assert_eq!(irig(d, &["rate-fit", "nothing.csv"]).status.code(), Some(3));

    let o = irig(d, &["validate", "--m", "2", "--mu-h", "1", "--a", "0.7", "--b", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("violation 3"));
}

#[test]
fn gen_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("cls.toml"),
        "[problem]\nkind = \"classification\"\ndim = 30\nsamples = 40\nnnz = 5\ncomponents = 4\n[run]\nseed = 3\n",
    )
    .unwrap();
    assert_eq!(irig(d, &["gen", "-c", "cls.toml", "-o", "cls.svm"]).status.code(), Some(0));
    let text = fs::read_to_string(d.join("cls.svm")).unwrap();
    assert_eq!(text.lines().count(), 40);
    fs::write(
        d.join("svm.toml"),
        "[problem]\nkind = \"svmlight\"\npath = \"cls.svm\"\ndim = 30\ncomponents = 4\n[run]\niterations = 20\n",
    )
    .unwrap();
    assert_eq!(irig(d, &["solve", "-c", "svm.toml"]).status.code(), Some(0));

    fs::write(d.join("con.toml"), "[problem]\nkind = \"constrained\"\n").unwrap();
    assert_eq!(irig(d, &["gen", "-c", "con.toml", "-o", "expanded.toml"]).status.code(), Some(0));
    let expanded = fs::read_to_string(d.join("expanded.toml")).unwrap();
    assert!(expanded.starts_with("# x_h_star = [1, 0]"), "{expanded}");
    assert!(expanded.contains("normals"));
    assert_eq!(irig(d, &["reference", "-c", "expanded.toml", "-l", "0.5", "--iters", "20000"]).status.code(), Some(0));
}

#[test]
fn bench_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("b.toml"),
        "[problem]\nkind = \"selection\"\n[run]\niterations = 50\nrecord_stride = 10\n[bench]\nr = [0.5]\noutput_dir = \"out\"\n",
    )
    .unwrap();
    let o = irig(d, &["bench", "-c", "b.toml", "--threads", "2"]);
    // (10, 1) and (1, 10) break the step-product condition on this problem
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("cells=9 ok=3 rejected=6 failed=0"));
    let summary = fs::read_to_string(d.join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 10);
}
