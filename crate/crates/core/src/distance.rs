//! Sequence distances: lock-step, elastic, threshold-based and DTW lower bounds.
//!
//! All of them are written against [`SeqRef`] and use only the component
//! distance of its [`ComponentKind`], so they work for scalar and vector
//! sequences alike (the envelope bounds excepted, which need scalars).
//!
//! DTW, LB_Keogh and LB_PAA accumulate *squared* component distances and
//! return the raw sum. ERP sums plain component distances. EDR returns an
//! integral edit count and LCSS the normalized distance `1 - l / min(n, m)`.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::sequence::{lp_norm, SeqRef};
use crate::transform::paa_values;

/// Sakoe-Chiba half-width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Band {
    Unbounded,
    Width(usize),
}

impl Band {
    fn finite(self) -> Result<usize> {
        match self {
            Band::Width(b) => Ok(b),
            Band::Unbounded => Err(Error::UnboundedBand),
        }
    }
}

impl From<usize> for Band {
    fn from(b: usize) -> Self {
        Band::Width(b)
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::Unbounded => f.write_str("unbounded"),
            Band::Width(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistanceSpec {
    Lp { p: f64 },
    Dtw { band: Band },
    LbKeogh { band: usize },
    LbPaa { band: usize, segments: usize },
    /// `gap` is the reference component, one value per component dimension.
    Erp { gap: Vec<f64> },
    Edr { eps: f64 },
    Lcss { eps: f64, delta: usize },
}

impl fmt::Display for DistanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceSpec::Lp { p } => write!(f, "L{p}"),
            DistanceSpec::Dtw { band } => write!(f, "dtw(band={band})"),
            DistanceSpec::LbKeogh { band } => write!(f, "lb_keogh(band={band})"),
            DistanceSpec::LbPaa { band, segments } => write!(f, "lb_paa(band={band}, m={segments})"),
            DistanceSpec::Erp { gap } => write!(f, "erp(g={gap:?})"),
            DistanceSpec::Edr { eps } => write!(f, "edr(eps={eps})"),
            DistanceSpec::Lcss { eps, delta } => write!(f, "lcss(eps={eps}, delta={delta})"),
        }
    }
}

impl DistanceSpec {
    pub const L2: DistanceSpec = DistanceSpec::Lp { p: 2.0 };

    /// Validates the parameter ranges.
    pub fn checked(self) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match &self {
            DistanceSpec::Lp { p } if p.is_nan() || *p < 1.0 => return bad(format!("Lp order must be >= 1, got {p}")),
            DistanceSpec::Edr { eps } | DistanceSpec::Lcss { eps, .. } if eps.is_nan() || *eps < 0.0 => {
                return bad(format!("match threshold must be >= 0, got {eps}"))
            }
            DistanceSpec::LbPaa { segments: 0, .. } => return bad("PAA segment count must be >= 1".into()),
            DistanceSpec::Erp { gap } if gap.is_empty() => return bad("ERP gap component is empty".into()),
            _ => {}
        }
        Ok(self)
    }

    pub fn is_l2(&self) -> bool {
        matches!(self, DistanceSpec::Lp { p } if *p == 2.0)
    }

    /// Whether the distance satisfies the metric axioms (needed for
    /// triangle-inequality pruning).
    pub fn is_metric(&self) -> bool {
        matches!(self, DistanceSpec::Lp { .. } | DistanceSpec::Erp { .. })
    }

    /// Whether values are sums of squared component distances.
    pub fn is_squared(&self) -> bool {
        matches!(self, DistanceSpec::Dtw { .. } | DistanceSpec::LbKeogh { .. } | DistanceSpec::LbPaa { .. })
    }

    pub fn evaluate(&self, a: SeqRef<'_>, b: SeqRef<'_>) -> Result<f64> {
        match self {
            DistanceSpec::Lp { p } => lp_distance(a, b, *p),
            DistanceSpec::Dtw { band } => dtw(a, b, *band),
            DistanceSpec::LbKeogh { band } => lb_keogh(a, b, Band::Width(*band)),
            DistanceSpec::LbPaa { band, segments } => lb_paa(a, b, Band::Width(*band), *segments),
            DistanceSpec::Erp { gap } => erp(a, b, gap),
            DistanceSpec::Edr { eps } => edr(a, b, *eps),
            DistanceSpec::Lcss { eps, delta } => lcss(a, b, *eps, *delta),
        }
    }
}

fn same_kind(a: SeqRef<'_>, b: SeqRef<'_>) -> Result<()> {
    if a.kind() != b.kind() {
        return Err(Error::ArityMismatch { expected: a.kind().to_string(), found: b.kind().to_string() });
    }
    Ok(())
}

fn same_len(a: SeqRef<'_>, b: SeqRef<'_>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

pub fn lp_distance(s: SeqRef<'_>, t: SeqRef<'_>, p: f64) -> Result<f64> {
    same_kind(s, t)?;
    same_len(s, t)?;
    let kind = s.kind();
    Ok(lp_norm((0..s.len()).map(|i| kind.distance_unchecked(s.get(i), t.get(i))), p))
}

/// Band-constrained DTW over squared component distances (no root taken).
pub fn dtw(s: SeqRef<'_>, t: SeqRef<'_>, band: Band) -> Result<f64> {
    same_kind(s, t)?;
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptySequence);
    }
    // rows over the longer sequence, columns over the shorter one
    let (rows, cols) = if s.len() >= t.len() { (s, t) } else { (t, s) };
    let (n, m) = (rows.len(), cols.len());
    let b = match band {
        Band::Unbounded => n,
        Band::Width(b) if n - m > b => return Err(Error::BandInfeasible { band: b, left: s.len(), right: t.len() }),
        Band::Width(b) => b.min(n),
    };
    let kind = s.kind();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    // column range written into each buffer, so stale cells can be reset
    let mut prev_range = (0, 0);
    let mut cur_range = (0, 0);
    for i in 0..n {
        for c in &mut cur[cur_range.0..cur_range.1] {
            *c = f64::INFINITY;
        }
        let lo = i.saturating_sub(b);
        let hi = (i + b + 1).min(m);
        for j in lo..hi {
            let d = kind.distance_unchecked(rows.get(i), cols.get(j));
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let mut best = f64::INFINITY;
                if i > 0 {
                    best = best.min(prev[j]);
                    if j > 0 {
                        best = best.min(prev[j - 1]);
                    }
                }
                if j > 0 {
                    best = best.min(cur[j - 1]);
                }
                best
            };
            cur[j] = d * d + best;
        }
        cur_range = (lo.min(hi), hi);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut prev_range, &mut cur_range);
    }
    Ok(prev[m - 1])
}

/// Upper and lower envelope of `q`: running max / min over `|i - j| <= band`.
pub fn envelope(q: &[f64], band: usize) -> (Vec<f64>, Vec<f64>) {
    (running_extreme(q, band, |a, b| a >= b), running_extreme(q, band, |a, b| a <= b))
}

// monotone deque over the window [i - band, i + band]; `keep(a, b)` is true
// when a dominates b
fn running_extreme(q: &[f64], band: usize, keep: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    let n = q.len();
    let mut out = Vec::with_capacity(n);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        while next < n && next <= i + band {
            while dq.back().is_some_and(|&k| keep(q[next], q[k])) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&k| k + band < i) {
            dq.pop_front();
        }
        out.push(q[dq[0]]);
    }
    out
}

#[inline]
fn envelope_violation(x: f64, upper: f64, lower: f64) -> f64 {
    if x > upper {
        (x - upper) * (x - upper)
    } else if x < lower {
        (lower - x) * (lower - x)
    } else {
        0.0
    }
}

/// LB_Keogh with the envelope built on `q`.
pub fn lb_keogh(q: SeqRef<'_>, s: SeqRef<'_>, band: Band) -> Result<f64> {
    let band = band.finite()?;
    let (q, s) = (q.scalars()?, s.scalars()?);
    if q.len() != s.len() {
        return Err(Error::LengthMismatch { left: q.len(), right: s.len() });
    }
    let (upper, lower) = envelope(q, band);
    Ok(s.iter().zip(upper.iter().zip(&lower)).map(|(&x, (&u, &l))| envelope_violation(x, u, l)).sum())
}

/// LB_PAA: LB_Keogh on segment means of the envelope and of `s`, scaled by
/// the segment length.
pub fn lb_paa(q: SeqRef<'_>, s: SeqRef<'_>, band: Band, segments: usize) -> Result<f64> {
    let band = band.finite()?;
    let (q, s) = (q.scalars()?, s.scalars()?);
    if q.len() != s.len() {
        return Err(Error::LengthMismatch { left: q.len(), right: s.len() });
    }
    let (upper, lower) = envelope(q, band);
    let (upper, lower, s_hat) = (paa_values(&upper, segments)?, paa_values(&lower, segments)?, paa_values(s, segments)?);
    let seg_len = (q.len() / segments) as f64;
    Ok(seg_len
        * s_hat.iter().zip(upper.iter().zip(&lower)).map(|(&x, (&u, &l))| envelope_violation(x, u, l)).sum::<f64>())
}

/// Edit distance with real penalty against gap component `gap`.
pub fn erp(s: SeqRef<'_>, t: SeqRef<'_>, gap: &[f64]) -> Result<f64> {
    same_kind(s, t)?;
    let kind = s.kind();
    kind.distance(gap, gap)?;
    let m = t.len();
    let t_gap: Vec<f64> = (0..m).map(|j| kind.distance_unchecked(t.get(j), gap)).collect();
    let mut prev = Vec::with_capacity(m + 1);
    prev.push(0.0);
    for j in 0..m {
        prev.push(prev[j] + t_gap[j]);
    }
    let mut cur = vec![0.0; m + 1];
    for i in 0..s.len() {
        let si = s.get(i);
        let s_gap = kind.distance_unchecked(si, gap);
        cur[0] = prev[0] + s_gap;
        for j in 1..=m {
            let matched = prev[j - 1] + kind.distance_unchecked(si, t.get(j - 1));
            cur[j] = matched.min(prev[j] + s_gap).min(cur[j - 1] + t_gap[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// Edit distance on real sequences: substitutions are free within `eps`.
pub fn edr(s: SeqRef<'_>, t: SeqRef<'_>, eps: f64) -> Result<f64> {
    same_kind(s, t)?;
    let kind = s.kind();
    let m = t.len();
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0usize; m + 1];
    for i in 0..s.len() {
        let si = s.get(i);
        cur[0] = i + 1;
        for j in 1..=m {
            let sub = usize::from(kind.distance_unchecked(si, t.get(j - 1)) > eps);
            cur[j] = (prev[j - 1] + sub).min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m] as f64)
}

/// Length of the longest common subsequence under threshold `eps` and warp
/// window `delta`.
pub fn lcss_length(s: SeqRef<'_>, t: SeqRef<'_>, eps: f64, delta: usize) -> Result<usize> {
    same_kind(s, t)?;
    let kind = s.kind();
    let m = t.len();
    let mut prev = vec![0usize; m + 1];
    let mut cur = vec![0usize; m + 1];
    for i in 0..s.len() {
        let si = s.get(i);
        for j in 1..=m {
            cur[j] = if (i).abs_diff(j - 1) <= delta && kind.distance_unchecked(si, t.get(j - 1)) <= eps {
                prev[j - 1] + 1
            } else {
                prev[j].max(cur[j - 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// `1 - l / min(s.len, t.len)` with `l` the LCSS length.
pub fn lcss(s: SeqRef<'_>, t: SeqRef<'_>, eps: f64, delta: usize) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptySequence);
    }
    let l = lcss_length(s, t, eps, delta)?;
    Ok(1.0 - l as f64 / s.len().min(t.len()) as f64)
}
