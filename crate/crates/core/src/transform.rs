//! Data transformers: dimensionality reduction of windows.
//!
//! Every transformer here lower-bounds Euclidean distance. For the DFT this
//! follows from the orthonormal scaling (Parseval); for PAA the segment means
//! have to be scaled by `sqrt(n / m)`, which [`TransformSpec::index_vector`]
//! applies so that plain L2 on index vectors never exceeds raw L2.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::sequence::{ComponentKind, Sequence};

const DIRECT_DFT_MAX: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformSpec {
    Identity,
    /// Keep the first `coefficients` orthonormal DFT coefficients (2 reals each).
    Dft { coefficients: usize },
    /// Segment means over `segments` equal-length segments.
    Paa { segments: usize },
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformSpec::Identity => f.write_str("identity"),
            TransformSpec::Dft { coefficients } => write!(f, "dft(k={coefficients})"),
            TransformSpec::Paa { segments } => write!(f, "paa(m={segments})"),
        }
    }
}

impl TransformSpec {
    pub fn dft(coefficients: usize) -> Result<Self> {
        if coefficients == 0 {
            return Err(Error::InvalidParameter("DFT coefficient count must be at least 1".into()));
        }
        Ok(TransformSpec::Dft { coefficients })
    }

    pub fn paa(segments: usize) -> Result<Self> {
        if segments == 0 {
            return Err(Error::InvalidParameter("PAA segment count must be at least 1".into()));
        }
        Ok(TransformSpec::Paa { segments })
    }

    /// Checks that windows of `width` components of `kind` can be transformed.
    pub fn validate(&self, width: usize, kind: ComponentKind) -> Result<()> {
        match *self {
            TransformSpec::Identity => Ok(()),
            _ if !kind.is_scalar() => Err(Error::NonScalar),
            TransformSpec::Dft { coefficients } if coefficients > width => {
                Err(Error::CoefficientRange { k: coefficients, len: width })
            }
            TransformSpec::Paa { segments } if !width.is_multiple_of(segments) => {
                Err(Error::NotDivisible { len: width, segments })
            }
            _ => Ok(()),
        }
    }

    /// Length of the index vector produced for a window of `width` components.
    pub fn output_dim(&self, width: usize, kind: ComponentKind) -> usize {
        match *self {
            TransformSpec::Identity => width * kind.dim(),
            TransformSpec::Dft { coefficients } => 2 * coefficients,
            TransformSpec::Paa { segments } => segments,
        }
    }

    /// Transforms a window, keeping its id, pid and offset.
    pub fn apply(&self, s: &Sequence) -> Result<Sequence> {
        let values = match *self {
            TransformSpec::Identity => return Ok(s.clone()),
            TransformSpec::Dft { coefficients } => dft_values(s.view().scalars()?, coefficients)?,
            TransformSpec::Paa { segments } => paa_values(s.view().scalars()?, segments)?,
        };
        Sequence::with_provenance(s.id(), s.pid().map(str::to_owned), s.offset(), ComponentKind::Scalar, values)
    }

    /// Vector stored in (or probed against) a window index. Plain L2 between
    /// two such vectors lower-bounds L2 between the raw windows.
    pub fn index_vector(&self, window: &[f64], kind: ComponentKind) -> Result<Vec<f64>> {
        match *self {
            TransformSpec::Identity => Ok(window.to_vec()),
            _ if !kind.is_scalar() => Err(Error::NonScalar),
            TransformSpec::Dft { coefficients } => dft_values(window, coefficients),
            TransformSpec::Paa { segments } => {
                let scale = ((window.len() / segments) as f64).sqrt();
                let mut v = paa_values(window, segments)?;
                v.iter_mut().for_each(|x| *x *= scale);
                Ok(v)
            }
        }
    }
}

pub fn dft_transform(s: &Sequence, coefficients: usize) -> Result<Sequence> {
    TransformSpec::dft(coefficients)?.apply(s)
}

pub fn paa_transform(s: &Sequence, segments: usize) -> Result<Sequence> {
    TransformSpec::paa(segments)?.apply(s)
}

/// `[Re X0, Im X0, ..., Re X(k-1), Im X(k-1)]` of the orthonormal DFT.
pub fn dft_values(x: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::CoefficientRange { k, len: n });
    }
    let coeffs = if n > DIRECT_DFT_MAX && n.is_power_of_two() {
        let mut all = fft(x);
        all.truncate(k);
        all
    } else {
        direct_dft(x, k)
    };
    Ok(coeffs.into_iter().flat_map(|(re, im)| [re, im]).collect())
}

/// All `n` orthonormal DFT coefficients as `(re, im)` pairs.
pub fn dft_spectrum(x: &[f64]) -> Vec<(f64, f64)> {
    if x.len() > DIRECT_DFT_MAX && x.len().is_power_of_two() {
        fft(x)
    } else {
        direct_dft(x, x.len())
    }
}

fn direct_dft(x: &[f64], k: usize) -> Vec<(f64, f64)> {
    let n = x.len();
    let norm = 1.0 / (n as f64).sqrt();
    (0..k)
        .map(|f| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                // reduce f*t mod n first so the angle stays small and exact
                let angle = -2.0 * PI * ((f * t) % n) as f64 / n as f64;
                re += v * angle.cos();
                im += v * angle.sin();
            }
            (re * norm, im * norm)
        })
        .collect()
}

/// Iterative radix-2 FFT; `x.len()` must be a power of two.
fn fft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    let mut a = vec![(0.0, 0.0); n];
    for (i, &v) in x.iter().enumerate() {
        let j = if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) };
        a[j] = (v, 0.0);
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for j in 0..half {
                let angle = -2.0 * PI * j as f64 / len as f64;
                let (wr, wi) = (angle.cos(), angle.sin());
                let (ur, ui) = a[start + j];
                let (vr, vi) = a[start + j + half];
                let (tr, ti) = (vr * wr - vi * wi, vr * wi + vi * wr);
                a[start + j] = (ur + tr, ui + ti);
                a[start + j + half] = (ur - tr, ui - ti);
            }
        }
        len <<= 1;
    }
    let norm = 1.0 / (n as f64).sqrt();
    a.into_iter().map(|(re, im)| (re * norm, im * norm)).collect()
}

pub fn paa_values(x: &[f64], segments: usize) -> Result<Vec<f64>> {
    if segments == 0 || !x.len().is_multiple_of(segments) {
        return Err(Error::NotDivisible { len: x.len(), segments });
    }
    let seg = x.len() / segments;
    Ok(x.chunks_exact(seg).map(|c| c.iter().sum::<f64>() / seg as f64).collect())
}
