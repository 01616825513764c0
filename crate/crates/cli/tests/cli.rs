use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const FRM: &str = "\
data = namedInstanceAdd
data.param.1 = SlidingSlicer(<w>)
query = namedInstanceAdd
query.param.1 = DisjointSlicer(<w>)
go = algorithmStart
go.param.1 = VariableQueryAlgorithm
go.param.2 = SequenceFloatL2
go.param.3 = MemorySequenceStorage()
go.param.4 = index
go.param.5 = data
go.param.6 = query
go.param.7 = <w>
go.param.8 = DFTTransformer(2)
";

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Self {
        Env { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subseq")).args(args.iter().map(|a| a.as_ref())).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn walk(seed: u64, len: usize) -> Vec<f64> {
    // small LCG so the data does not depend on a particular RNG crate
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut x = 0.0;
    (0..len)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            x += ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            x
        })
        .collect()
}

fn dataset(lens: &[usize]) -> String {
    lens.iter()
        .enumerate()
        .map(|(i, &n)| {
            let v: Vec<String> = walk(i as u64 + 1, n).iter().map(|x| format!("{x:.6}")).collect();
            format!("s{i} {}\n", v.join(","))
        })
        .collect()
}

fn config(env: &Env, index: &str) -> PathBuf {
    env.file("frm.conf", &FRM.replace("go.param.4 = index", &format!("go.param.4 = {index}")))
}

#[test]
fn ingest_reports_sequence_and_window_counts() {
    let env = Env::new();
    let conf = config(&env, "LinearScanIndex()");
    let data = env.file("d.txt", &dataset(&[30, 45, 12]));
    let out = stdout(&run(&[&"ingest", &"--config", &conf, &"--bind", &"w=6", &"--data", &data]));
    assert!(out.contains("sequences: 3\n"), "{out}");
    assert!(out.contains(&format!("windows: {}\n", (30 - 6 + 1) + (45 - 6 + 1) + (12 - 6 + 1))), "{out}");
    assert!(out.contains("strategy: FRM"));
}

#[test]
fn verbatim_query_at_eps_zero_has_one_match() {
    let env = Env::new();
    let conf = config(&env, "PivotTableIndex()");
    let data = env.file("d.txt", &dataset(&[50, 60, 70]));
    let out = stdout(&run(&[
        &"query-range", &"--config", &conf, &"--bind", &"w=5", &"--data", &data, &"--query", &"s1:7:20", &"--eps", &"0",
    ]));
    assert_eq!(
        out,
        "{\"eps\":0.0000000000000000e0,\"exact\":true,\"matches\":[{\"distance\":0.0000000000000000e0,\
         \"pid\":\"s1\",\"start\":7}],\"query\":{\"id\":\"s1\",\"len\":20,\"offset\":7}}\n"
    );
}

#[test]
fn snapshot_answers_match_fresh_build() {
    let env = Env::new();
    let conf = config(&env, "mIndex");
    let data = env.file("d.txt", &dataset(&[80, 90, 100, 110]));
    let snap = env.path("snap");
    stdout(&run(&[&"ingest", &"--config", &conf, &"--bind", &"w=8", &"--data", &data, &"--snapshot", &snap]));
    for f in ["pipeline.conf", "index.smfx", "storage.smfs"] {
        assert!(snap.join(f).exists(), "{f}");
    }
    let q: [&dyn AsRef<std::ffi::OsStr>; 6] = [&"--query", &"s2:3:33", &"--k", &"5", &"--mult", &"3"];
    let from_snap = stdout(&run(&[&[&"query-knn" as &dyn AsRef<_>, &"--snapshot", &snap][..], &q[..]].concat()));
    let fresh = stdout(&run(
        &[&[&"query-knn" as &dyn AsRef<_>, &"--config", &conf, &"--bind", &"w=8", &"--data", &data][..], &q[..]].concat(),
    ));
    assert_eq!(from_snap, fresh);
    assert!(from_snap.contains("\"k\":5") && from_snap.contains("\"mult\":3"));
}

#[test]
fn query_file_gives_one_document_per_line() {
    let env = Env::new();
    let conf = config(&env, "LinearScanIndex()");
    let data = env.file("d.txt", &dataset(&[40, 40]));
    let queries = env.file("q.txt", "a 0 0 0 0 0 0\nb 1,1,1,1,1,1,1,1\n");
    let out = stdout(&run(&[
        &"query-range", &"--config", &conf, &"--bind", &"w=3", &"--data", &data, &"--query-file", &queries, &"--eps", &"1",
    ]));
    assert!(out.starts_with("[{"), "{out}");
    assert_eq!(out.matches("\"query\":{").count(), 2);
    assert!(out.contains("\"id\":\"a\",\"len\":6,\"offset\":0"));
}

#[test]
fn bench_frm_and_dual_match_agree() {
    let env = Env::new();
    let frm = config(&env, "PivotTableIndex()");
    let dual = env.file(
        "dual.conf",
        &std::fs::read_to_string(&frm)
            .unwrap()
            .replace("go.param.5 = data", "go.param.5 = query")
            .replace("go.param.6 = query", "go.param.6 = data"),
    );
    let data_text = dataset(&[120, 150, 90, 200]);
    let data = env.file("d.txt", &data_text);
    let queries: String = data_text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let vals: Vec<&str> = l.split_whitespace().nth(1).unwrap().split(',').skip(5 + i).take(20 + 7 * i).collect();
            format!("q{i} {}\n", vals.join(","))
        })
        .collect();
    let qf = env.file("q.txt", &queries);
    let out = stdout(&run(&[
        &"bench", &"--config", &frm, &"--config", &dual, &"--bind", &"w=6", &"--data", &data, &"--queries", &qf, &"--eps", &"2.5",
    ]));
    let summary: Vec<&str> = out.lines().skip(1).take(2).collect();
    assert!(summary[0].contains("FRM") && summary[1].contains("DualMatch"), "{out}");
    for row in &summary {
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cols[cols.len() - 2], "true", "{out}");
        assert_eq!(cols[cols.len() - 1], "1.0000", "{out}");
    }
    let per_query: Vec<&str> = out.lines().skip_while(|l| !l.starts_with("query")).skip(1).collect();
    assert_eq!(per_query.len(), 4);
    for line in per_query {
        let cols: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cols[1], cols[2], "{out}");
        assert_ne!(cols[1], "0");
    }
}

#[test]
fn export_writes_query_and_matches() {
    let env = Env::new();
    let conf = config(&env, "LinearScanIndex()");
    let data = env.file("d.txt", &dataset(&[30, 30]));
    let csv = env.path("out.csv");
    stdout(&run(&[
        &"export", &"--config", &conf, &"--bind", &"w=4", &"--data", &data, &"--query", &"s0:2:8", &"--k", &"3", &"--mult", &"50",
        &"--out", &csv,
    ]));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("t,query,s0@2,"), "{}", lines[0]);
    assert_eq!(lines[0].split(',').count(), 5);
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[1], row[2]);
}

#[test]
fn labeled_datasets_get_line_ids() {
    let env = Env::new();
    let conf = config(&env, "LinearScanIndex()");
    let data = env.file("d.txt", "1,0,1,2,3,4,5\n\n2,5,4,3,2,1,0\n");
    let out = stdout(&run(&[
        &"query-range", &"--config", &conf, &"--bind", &"w=2", &"--data", &data, &"--labeled", &"--query", &"line-3:0:4",
        &"--eps", &"0",
    ]));
    assert!(out.contains("\"pid\":\"line-3\""), "{out}");
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let env = Env::new();
    let conf = config(&env, "LinearScanIndex()");
    let data = env.file("d.txt", &dataset(&[40]));
    let base = |extra: &[&dyn AsRef<std::ffi::OsStr>]| {
        let mut a: Vec<&dyn AsRef<std::ffi::OsStr>> = vec![&"query-range", &"--bind", &"w=4"];
        a.extend_from_slice(extra);
        run(&a)
    };
    // usage
    assert_eq!(code(&base(&[&"--config", &conf, &"--data", &data, &"--query", &"s0:0:8"])), 2);
    assert_eq!(code(&base(&[&"--config", &conf, &"--data", &data, &"--query", &"s0:0", &"--eps", &"1"])), 2);
    assert_eq!(code(&base(&[&"--config", &conf, &"--query", &"s0:0:8", &"--eps", &"1"])), 2);
    assert_eq!(code(&base(&[&"--config", &conf, &"--data", &data, &"--query", &"s0:0:8", &"--eps", &"-1"])), 2);
    assert_eq!(code(&run(&[&"frobnicate"])), 2);
    // data and config
    let bad_data = env.file("bad.txt", "a 1 2 x\n");
    assert_eq!(code(&base(&[&"--config", &conf, &"--data", &bad_data, &"--query", &"a:0:2", &"--eps", &"1"])), 3);
    let bad_conf = env.file("bad.conf", &FRM.replace("DFTTransformer", "NoSuchTransformer"));
    assert_eq!(code(&base(&[&"--config", &bad_conf, &"--data", &data, &"--query", &"s0:0:8", &"--eps", &"1"])), 3);
    assert_eq!(code(&base(&[&"--config", &conf, &"--data", &data, &"--query", &"zz:0:8", &"--eps", &"1"])), 3);
    assert_eq!(code(&base(&[&"--config", &conf, &"--data", &data, &"--query", &"s0:35:8", &"--eps", &"1"])), 3);
    assert_eq!(code(&run(&[&"query-range", &"--snapshot", &env.path("missing"), &"--query", &"s0:0:8", &"--eps", &"1"])), 3);
    // runtime: query shorter than the window width
    let o = base(&[&"--config", &conf, &"--data", &data, &"--query", &"s0:0:2", &"--eps", &"1"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("subseq:"));
}

#[test]
fn shipped_configs_instantiate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let env = Env::new();
    let data = env.file("d.txt", &dataset(&[64, 64]));
    for entry in std::fs::read_dir(root).unwrap() {
        let conf = entry.unwrap().path();
        let out = stdout(&run(&[&"ingest", &"--config", &conf, &"--bind", &"w=8", &"--data", &data]));
        assert!(out.contains("sequences: 2"), "{}: {out}", conf.display());
    }
}
