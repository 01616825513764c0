//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::HashSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use subseq_core::config::{instantiate, parse_config, render_config, Bindings, Module, ModuleRegistry, Value};
use subseq_core::distance::{dtw, erp, lb_keogh, lb_paa};
use subseq_core::pipeline::{assemble, PipelineConfig, Skeleton};
use subseq_core::storage::{AlignmentRequest, FileStorage, MemoryStorage};
use subseq_core::transform::{dft_values, paa_values};
use subseq_core::{
    Band, IndexSpec, IndexedWindow, SeqRef, Sequence, SequenceStorage, Strategy, TransformSpec,
};
use support::{l2, random_walk, TOL};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---- shared workload for criteria 1 and 2 ----

const EPS_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const W: usize = 16;

struct Workload {
    data: Vec<(String, Vec<f64>)>,
    queries: Vec<Vec<f64>>,
}

fn workload() -> Workload {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let data: Vec<(String, Vec<f64>)> = (0..200)
        .map(|i| {
            let len = rng.gen_range(64..=256);
            (format!("walk-{i:03}"), random_walk(&mut rng, len))
        })
        .collect();
    let queries = (0..20)
        .map(|_| {
            let len = rng.gen_range(16..=128);
            let sources: Vec<&Vec<f64>> = data.iter().map(|(_, s)| s).filter(|s| s.len() >= len).collect();
            let s = sources[rng.gen_range(0..sources.len())];
            let off = rng.gen_range(0..=s.len() - len);
            s[off..off + len].iter().map(|x| x + rng.gen_range(-0.05..0.05)).collect()
        })
        .collect();
    Workload { data, queries }
}

fn skeleton(w: &Workload, dual: bool) -> Skeleton {
    let t = TransformSpec::dft(8).unwrap();
    let config = if dual {
        PipelineConfig::dual_match(W, t, IndexSpec::linear())
    } else {
        PipelineConfig::frm(W, t, IndexSpec::linear())
    };
    let mut sk = assemble(config.unwrap()).unwrap();
    let seqs: Vec<Sequence> = w.data.iter().map(|(id, v)| Sequence::scalar(id.clone(), v.clone())).collect();
    let report = sk.ingest(&seqs);
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    sk
}

fn no_false_dismissal() -> Outcome {
    let w = workload();
    let sk = skeleton(&w, false);
    let (mut matches, mut bad, mut inexact) = (0, Vec::new(), 0);
    for (qi, q) in w.queries.iter().enumerate() {
        let qs = Sequence::scalar(format!("q{qi}"), q.clone());
        for eps in EPS_GRID {
            let answer = sk.range_search(&qs, eps).unwrap();
            inexact += usize::from(!answer.exact);
            let oracle = support::scan_range(&w.data, q, eps);
            let want: HashSet<(String, usize)> = oracle.iter().map(|(p, s, _)| (p.clone(), *s)).collect();
            let got: HashSet<(String, usize)> = answer.matches.iter().map(|m| (m.pid.clone(), m.start)).collect();
            let distances_ok = answer.matches.iter().all(|m| {
                oracle.iter().any(|(p, s, d)| *p == m.pid && *s == m.start && (d - m.distance).abs() <= TOL)
            });
            if got != want || !distances_ok || answer.matches.len() != got.len() {
                bad.push(format!("q{qi}@{eps}: got {} want {}", got.len(), want.len()));
            }
            matches += oracle.len();
        }
    }
    check(
        bad.is_empty() && inexact == 0 && matches > 0,
        format!(
            "{} queries x {} eps, {matches} oracle matches, {} mismatching answers {:?}, {inexact} flagged inexact",
            w.queries.len(),
            EPS_GRID.len(),
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn skeleton_equivalence() -> Outcome {
    let w = workload();
    let (frm, dual) = (skeleton(&w, false), skeleton(&w, true));
    assert_eq!((frm.strategy(), dual.strategy()), (Strategy::Frm, Strategy::DualMatch));
    let (mut eligible, mut compared, mut bad) = (0, 0, 0);
    for (qi, q) in w.queries.iter().enumerate() {
        if q.len() < 2 * W - 1 {
            continue;
        }
        eligible += 1;
        let qs = Sequence::scalar(format!("q{qi}"), q.clone());
        for eps in EPS_GRID {
            let (a, b) = (frm.range_search(&qs, eps).unwrap(), dual.range_search(&qs, eps).unwrap());
            let same = a.matches.len() == b.matches.len()
                && a.matches.iter().zip(&b.matches).all(|(x, y)| {
                    x.pid == y.pid && x.start == y.start && (x.distance - y.distance).abs() <= TOL
                });
            bad += usize::from(!same);
            compared += a.matches.len();
        }
    }
    check(
        bad == 0 && eligible > 0,
        format!("{eligible} queries of length >= {} x {} eps, {compared} matches, {bad} differing answers", 2 * W - 1, EPS_GRID.len()),
    )
}

fn lower_bound_chain() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let (mut violations, mut checks) = (0, 0);
    for _ in 0..1000 {
        let (q, c) = (random_walk(&mut rng, 128), random_walk(&mut rng, 128));
        let (q, c) = (SeqRef::scalar(&q), SeqRef::scalar(&c));
        for band in [5, 10, 20] {
            let d = dtw(q, c, Band::Width(band)).unwrap();
            let keogh = lb_keogh(q, c, Band::Width(band)).unwrap();
            violations += usize::from(keogh > d + TOL);
            for segments in [8, 16, 32] {
                let paa = lb_paa(q, c, Band::Width(band), segments).unwrap();
                violations += usize::from(paa > keogh + TOL);
                checks += 1;
            }
        }
    }
    check(violations == 0, format!("1000 pairs x bands {{5,10,20}} x PAA segments {{8,16,32}} ({checks} chains), {violations} violations"))
}

fn transform_contraction() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let n = 32;
    let (mut violations, mut worst_full) = (0, 0.0f64);
    for _ in 0..1000 {
        let (x, y) = (random_walk(&mut rng, n), random_walk(&mut rng, n));
        let raw = l2(&x, &y);
        for k in [4, 8, 16] {
            violations += usize::from(l2(&dft_values(&x, k).unwrap(), &dft_values(&y, k).unwrap()) > raw + TOL);
        }
        let full = l2(&dft_values(&x, n).unwrap(), &dft_values(&y, n).unwrap());
        worst_full = worst_full.max((full - raw).abs() / (1.0 + raw));
        for m in [4, 8, 16] {
            let scaled = (n as f64 / m as f64).sqrt() * l2(&paa_values(&x, m).unwrap(), &paa_values(&y, m).unwrap());
            violations += usize::from(scaled > raw + TOL);
        }
    }
    check(
        violations == 0 && worst_full <= TOL,
        format!("1000 pairs, {violations} bound violations, full-DFT max relative error {worst_full:.2e}"),
    )
}

fn dp_oracles() -> Outcome {
    let mut pairs = 0;
    let mut bad = Vec::new();
    let short = support::all_sequences(&[0.0, 1.0, 2.0], 4);
    for a in &short {
        for b in &short {
            bad.extend(support::check_elastic_pair(a, b));
            pairs += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let draw = |rng: &mut StdRng| -> Vec<f64> {
        let len = rng.gen_range(5..=8);
        (0..len).map(|_| f64::from(rng.gen_range(0..3u8))).collect()
    };
    for _ in 0..10_000 {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        bad.extend(support::check_elastic_pair(&a, &b));
        pairs += 1;
    }
    check(
        bad.is_empty(),
        format!("{pairs} pairs (exhaustive up to length 4, 10000 random of length 5-8), {} mismatches {:?}", bad.len(), bad.first()),
    )
}

fn erp_triangle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut violations = 0;
    for _ in 0..10_000 {
        let s: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let len = rng.gen_range(1..=32);
                random_walk(&mut rng, len)
            })
            .collect();
        let d = |i: usize, j: usize| erp(SeqRef::scalar(&s[i]), SeqRef::scalar(&s[j]), &[0.0]).unwrap();
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            violations += usize::from(d(a, c) > d(a, b) + d(b, c) + TOL);
        }
    }
    check(violations == 0, format!("10000 triples (3 orientations each), {violations} violations"))
}

fn index_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let dim = 8;
    let mut vectors: Vec<Vec<f64>> = (0..500).map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    // exact duplicates under other keys force distance ties
    for i in 450..500 {
        vectors[i] = vectors[i - 450].clone();
    }
    let mut linear = IndexSpec::linear().create();
    let mut pivot = IndexSpec::pivot_table().create();
    for (i, v) in vectors.iter().enumerate() {
        let item = IndexedWindow::new(v.clone(), format!("p{:02}", i % 37), i);
        linear.insert(item.clone()).unwrap();
        pivot.insert(item).unwrap();
    }
    linear.build();
    pivot.build();
    let queries: Vec<Vec<f64>> = (0..50)
        .map(|i| if i < 10 { vectors[i * 7].clone() } else { (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect() })
        .collect();
    let key = |ns: Vec<subseq_core::index::Neighbor<'_>>| -> Vec<(String, usize, u64)> {
        ns.into_iter().map(|n| (n.item.pid.clone(), n.item.offset, n.distance.to_bits())).collect()
    };
    let (mut bad, mut results) = (0, 0);
    linear.reset_counters();
    pivot.reset_counters();
    for q in &queries {
        for r in [0.3, 0.6, 0.9] {
            let (a, b) = (key(linear.range_query(q, r).unwrap()), key(pivot.range_query(q, r).unwrap()));
            results += a.len();
            bad += usize::from(a != b);
        }
        for k in [1, 2, 7, 25] {
            bad += usize::from(key(linear.knn_query(q, k).unwrap()) != key(pivot.knn_query(q, k).unwrap()));
        }
    }
    check(
        bad == 0,
        format!(
            "500 vectors x 50 queries, 3 radii + 4 k values, {results} range results, {bad} differing answers; distance evaluations linear {} / pivot {}",
            linear.distance_computations(),
            pivot.distance_computations()
        ),
    )
}

const REFERENCE_WRAPPED: &str = "\
slidingSlicer = namedInstanceAdd
slidingSlicer.param.1 = smf.modules.slicer.SlidingSlicer(<w>)

disjointSlicer = namedInstanceAdd
disjointSlicer.param.1 = smf.modules.slicer.DisjointSlicer(<w>)

index = namedInstanceAdd
index.param.1 = smf.modules.index
                           .ApproximateAlgorithmDistanceIndex(mIndex)

seqStorage = namedInstanceAdd
seqStorage.param.1 = smf.modules.seqstorage.MemorySequenceStorage()

startSearchAlg = algorithmStart
startSearchAlg.param.1 = smf.algorithms.VariableQueryAlgorithm
startSearchAlg.param.2 = smf.sequence.impl.SequenceFloatL2
startSearchAlg.param.3 = seqStorage
startSearchAlg.param.4 = index
startSearchAlg.param.5 = slidingSlicer
startSearchAlg.param.6 = disjointSlicer
startSearchAlg.param.7 = <w>
";

/// Appends lines that start with `.` to the previous line.
fn join_wrapped(text: &str) -> String {
    let mut out: Vec<String> = Vec::new();
    for line in text.lines() {
        match out.last_mut() {
            Some(prev) if line.trim_start().starts_with('.') => prev.push_str(line.trim()),
            _ => out.push(line.to_owned()),
        }
    }
    out.join("\n")
}

fn config_fidelity() -> Outcome {
    let actions = parse_config(&join_wrapped(REFERENCE_WRAPPED)).map_err(|e| e.to_string())?;
    let mut registry = ModuleRegistry::default();
    registry.add_instance("mIndex", Module::Index(IndexSpec::linear()));
    let bindings = Bindings::from([("w".to_owned(), Value::Int(16))]);
    let mut h = instantiate(&actions, &registry, &bindings).map_err(|e| e.to_string())?;

    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let seqs: Vec<Sequence> = (0..10).map(|i| Sequence::scalar(format!("s{i}"), random_walk(&mut rng, 100))).collect();
    let report = h.ingest(&seqs);
    let q = seqs[4].subsequence(20, 59).unwrap();
    let answer = h.range_search(&q, 1e-9).map_err(|e| e.to_string())?;
    let found = answer.matches.iter().any(|m| m.pid == "s4" && m.start == 20 && m.distance == 0.0);

    let text = render_config(&actions);
    let reparsed = parse_config(&text).map_err(|e| e.to_string())?;
    let round_trip = reparsed == actions && render_config(&reparsed) == text;
    check(
        actions.len() == 5
            && h.strategy() == Strategy::Frm
            && h.width() == 16
            && report.windows == 10 * (100 - 16 + 1)
            && found
            && answer.exact
            && round_trip,
        format!(
            "{} actions, {} skeleton w={}, {} windows indexed, verbatim query found: {found}, round trip identity: {round_trip}",
            actions.len(),
            h.strategy(),
            h.width(),
            report.windows
        ),
    )
}

fn storage_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    let dir = tempfile::tempdir().unwrap();
    let kind = subseq_core::ComponentKind::Scalar;
    let mut backends: Vec<(&str, Box<dyn SequenceStorage>)> = vec![
        ("memory", Box::new(MemoryStorage::new())),
        ("file", Box::new(FileStorage::create(dir.path().join("s.smfs"), kind).unwrap())),
    ];
    let seqs: Vec<Sequence> = (0..30)
        .map(|i| {
            let len = rng.gen_range(10..100);
            Sequence::scalar(format!("id{i}"), random_walk(&mut rng, len))
        })
        .collect();
    for (_, b) in &mut backends {
        for s in &seqs {
            b.store(s).unwrap();
        }
    }
    let batches: Vec<Vec<AlignmentRequest>> = (0..100)
        .map(|_| {
            (0..rng.gen_range(1..=40))
                .map(|_| {
                    let s = &seqs[rng.gen_range(0..seqs.len())];
                    let len = rng.gen_range(1..=s.len());
                    // about one request in ten runs past the end
                    let start = if rng.gen_bool(0.1) { s.len() - len + 1 } else { rng.gen_range(0..=s.len() - len) };
                    AlignmentRequest::new(s.id(), start, len)
                })
                .collect()
        })
        .collect();
    let (mut bad, mut requests) = (0, 0);
    for (_, b) in &backends {
        for batch in &batches {
            let grouped = b.grouped_fetch(batch);
            let pids: HashSet<&str> = batch.iter().map(|r| r.pid.as_str()).collect();
            bad += usize::from(grouped.visits != pids.len() || grouped.slices.len() != batch.len());
            for (r, got) in batch.iter().zip(&grouped.slices) {
                requests += 1;
                let want = b.fetch_slice(&r.pid, r.start, r.start + r.len - 1);
                bad += usize::from(match (got, &want) {
                    (Ok(g), Ok(w)) => g != w,
                    (Err(_), Err(_)) => false,
                    _ => true,
                });
            }
        }
    }
    check(bad == 0, format!("memory + file backends, 100 batches, {requests} requests, {bad} discrepancies"))
}

fn subseq(args: &[&str], threads: usize) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_subseq"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .expect("run subseq")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/frm.conf");
    let mut rng = StdRng::seed_from_u64(0x5eed_0010);
    let mut data = String::new();
    for i in 0..40 {
        let len = rng.gen_range(60..200);
        let v = random_walk(&mut rng, len);
        data.push_str(&format!("s{i} {}\n", v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(",")));
    }
    let data_path = dir.path().join("data.txt");
    std::fs::write(&data_path, &data).unwrap();
    let snap = dir.path().join("snap");
    let p = |x: &Path| x.to_str().unwrap().to_owned();
    let ingest = subseq(
        &["ingest", "--config", &p(&root), "--bind", "w=8", "--data", &p(&data_path), "--snapshot", &p(&snap)],
        2,
    );
    if !ingest.status.success() {
        return Err(format!("ingest failed: {}", String::from_utf8_lossy(&ingest.stderr)));
    }
    let query = ["query-range", "--snapshot", &p(&snap), "--query", "s7:10:40", "--eps", "6.5"];
    let runs: Vec<Vec<u8>> = [1, 2, 4, 8, 1, 3].iter().map(|&t| subseq(&query, t).stdout).collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let doc = String::from_utf8_lossy(&runs[0]);
    let matches = doc.matches("\"pid\"").count();
    check(
        identical && matches > 1 && doc.contains("\"exact\":true"),
        format!("{} runs with 1-8 worker threads, {} bytes, {matches} matches, byte-identical: {identical}", runs.len(), runs[0].len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("no false dismissal (FRM, DFT k=8, w=16) vs alignment scan", no_false_dismissal),
        ("DualMatch answers equal FRM answers", skeleton_equivalence),
        ("lb_paa <= lb_keogh <= dtw", lower_bound_chain),
        ("DFT / PAA contraction", transform_contraction),
        ("dtw / erp / edr / lcss match DP oracles", dp_oracles),
        ("ERP triangle inequality", erp_triangle),
        ("pivot table equals linear scan", index_equivalence),
        ("reference configuration fidelity", config_fidelity),
        ("grouped_fetch equals per-request fetch", storage_equivalence),
        ("query-range output is deterministic", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  [{:>2}] {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  [{:>2}] {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
