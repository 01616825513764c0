//! Test oracles: top-down memoized recursions written straight from the
//! distance definitions, plus random data generators.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;

pub const TOL: f64 = 1e-9;

pub fn random_walk(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut x = rng.gen_range(-5.0..5.0);
    (0..len)
        .map(|_| {
            x += rng.gen_range(-1.0..1.0);
            x
        })
        .collect()
}

/// Plain Euclidean distance of equal-length slices.
pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Every `(pid, start, distance)` with L2 distance at most `eps`, by scanning
/// all alignments of `q`.
pub fn scan_range(data: &[(String, Vec<f64>)], q: &[f64], eps: f64) -> Vec<(String, usize, f64)> {
    let mut out = Vec::new();
    for (id, s) in data {
        if s.len() < q.len() {
            continue;
        }
        for start in 0..=s.len() - q.len() {
            let d = l2(q, &s[start..start + q.len()]);
            if d <= eps {
                out.push((id.clone(), start, d));
            }
        }
    }
    out
}

/// DTW over squared differences, cells with `|i - j| > band` forbidden.
pub fn dtw(a: &[f64], b: &[f64], band: Option<usize>) -> f64 {
    fn rec(i: usize, j: usize, a: &[f64], b: &[f64], band: Option<usize>, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if band.is_some_and(|w| i.abs_diff(j) > w) {
            return f64::INFINITY;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let cost = (a[i] - b[j]) * (a[i] - b[j]);
        let v = if i == 0 && j == 0 {
            cost
        } else {
            let mut best = f64::INFINITY;
            if i > 0 {
                best = best.min(rec(i - 1, j, a, b, band, memo));
            }
            if j > 0 {
                best = best.min(rec(i, j - 1, a, b, band, memo));
            }
            if i > 0 && j > 0 {
                best = best.min(rec(i - 1, j - 1, a, b, band, memo));
            }
            cost + best
        };
        memo.insert((i, j), v);
        v
    }
    rec(a.len() - 1, b.len() - 1, a, b, band, &mut HashMap::new())
}

/// ERP with absolute differences and gap value `g`; `i`, `j` are prefix lengths.
pub fn erp(a: &[f64], b: &[f64], g: f64) -> f64 {
    fn rec(i: usize, j: usize, a: &[f64], b: &[f64], g: f64, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = match (i, j) {
            (0, 0) => 0.0,
            (i, 0) => rec(i - 1, 0, a, b, g, memo) + (a[i - 1] - g).abs(),
            (0, j) => rec(0, j - 1, a, b, g, memo) + (b[j - 1] - g).abs(),
            (i, j) => {
                let m = rec(i - 1, j - 1, a, b, g, memo) + (a[i - 1] - b[j - 1]).abs();
                let x = rec(i - 1, j, a, b, g, memo) + (a[i - 1] - g).abs();
                let y = rec(i, j - 1, a, b, g, memo) + (b[j - 1] - g).abs();
                m.min(x).min(y)
            }
        };
        memo.insert((i, j), v);
        v
    }
    rec(a.len(), b.len(), a, b, g, &mut HashMap::new())
}

/// EDR: unit cost edits, substitution free when the values are within `eps`.
pub fn edr(a: &[f64], b: &[f64], eps: f64) -> u64 {
    fn rec(i: usize, j: usize, a: &[f64], b: &[f64], eps: f64, memo: &mut HashMap<(usize, usize), u64>) -> u64 {
        if i == 0 {
            return j as u64;
        }
        if j == 0 {
            return i as u64;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let sub = u64::from((a[i - 1] - b[j - 1]).abs() > eps);
        let v = (rec(i - 1, j - 1, a, b, eps, memo) + sub)
            .min(rec(i - 1, j, a, b, eps, memo) + 1)
            .min(rec(i, j - 1, a, b, eps, memo) + 1);
        memo.insert((i, j), v);
        v
    }
    rec(a.len(), b.len(), a, b, eps, &mut HashMap::new())
}

/// LCSS length: elements match within `eps` when their positions differ by
/// at most `delta`.
pub fn lcss_len(a: &[f64], b: &[f64], eps: f64, delta: usize) -> usize {
    fn rec(i: usize, j: usize, a: &[f64], b: &[f64], eps: f64, delta: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == 0 || j == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if (a[i - 1] - b[j - 1]).abs() <= eps && i.abs_diff(j) <= delta {
            1 + rec(i - 1, j - 1, a, b, eps, delta, memo)
        } else {
            rec(i - 1, j, a, b, eps, delta, memo).max(rec(i, j - 1, a, b, eps, delta, memo))
        };
        memo.insert((i, j), v);
        v
    }
    rec(a.len(), b.len(), a, b, eps, delta, &mut HashMap::new())
}

pub fn lcss(a: &[f64], b: &[f64], eps: f64, delta: usize) -> f64 {
    1.0 - lcss_len(a, b, eps, delta) as f64 / a.len().min(b.len()) as f64
}

/// All sequences over `alphabet` with lengths `1..=max_len`.
pub fn all_sequences(alphabet: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|p: &Vec<f64>| {
                alphabet.iter().map(move |&c| {
                    let mut v = p.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// One way a library distance disagrees with its oracle.
#[derive(Debug)]
pub struct Mismatch {
    pub what: String,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub got: f64,
    pub want: f64,
}

/// Checks dtw (unbounded and band 1), erp (gaps 0 and 1), edr (eps 0.5 and
/// 1) and lcss (eps 1, delta 1 and unbounded) on one pair.
pub fn check_elastic_pair(a: &[f64], b: &[f64]) -> Vec<Mismatch> {
    use subseq_core::distance;
    use subseq_core::{Band, SeqRef};

    let (sa, sb) = (SeqRef::scalar(a), SeqRef::scalar(b));
    let mut bad = Vec::new();
    let mut check = |what: String, got: f64, want: f64, exact: bool| {
        let ok = if exact { got == want } else { (got - want).abs() <= TOL * (1.0 + want.abs()) };
        if !ok {
            bad.push(Mismatch { what, a: a.to_vec(), b: b.to_vec(), got, want });
        }
    };
    check("dtw".into(), distance::dtw(sa, sb, Band::Unbounded).unwrap(), dtw(a, b, None), false);
    if a.len().abs_diff(b.len()) <= 1 {
        check("dtw band 1".into(), distance::dtw(sa, sb, Band::Width(1)).unwrap(), dtw(a, b, Some(1)), false);
    }
    for g in [0.0, 1.0] {
        check(format!("erp gap {g}"), distance::erp(sa, sb, &[g]).unwrap(), erp(a, b, g), false);
    }
    for eps in [0.5, 1.0] {
        check(format!("edr eps {eps}"), distance::edr(sa, sb, eps).unwrap(), edr(a, b, eps) as f64, true);
    }
    for delta in [1, usize::MAX / 2] {
        let got = distance::lcss_length(sa, sb, 1.0, delta).unwrap();
        check(format!("lcss length delta {delta}"), got as f64, lcss_len(a, b, 1.0, delta) as f64, true);
        check(format!("lcss delta {delta}"), distance::lcss(sa, sb, 1.0, delta).unwrap(), lcss(a, b, 1.0, delta), true);
    }
    bad
}
