//! Rotary position embedding driven by three-axis positional indices.
//!
//! Channel pair `k` of a head vector is rotated by `p_axis(k) * base^(-2k/head_dim)`.
//! The first `n_s` pairs read the sequence axis, the next `n_r` the row
//! axis and the last `n_c` the column axis. Frequencies follow the global
//! pair index, so with `n_r = n_c = 0` this is ordinary 1D rotary.

use thiserror::Error;

use crate::index::{Axis, IndexAssignment, PositionIndex3};

pub const DEFAULT_BASE: f64 = 10_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotaryError {
    #[error("head_dim must be even and positive, got {0}")]
    OddHeadDim(usize),
    #[error("channel split {split:?} does not sum to head_dim/2 = {half}")]
    BadSplit {
        split: (usize, usize, usize),
        half: usize,
    },
    #[error("rotary base must be finite and > 1, got {0}")]
    BadBase(f64),
    #[error("vector has length {got}, head_dim is {expected}")]
    ConfigMismatch { expected: usize, got: usize },
    #[error("{what}: expected {expected} items, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotaryConfig {
    head_dim: usize,
    split: (usize, usize, usize),
    base: f64,
    // per-pair (axis, inverse frequency)
    pairs: Vec<(Axis, f64)>,
}

impl RotaryConfig {
    pub fn new(
        head_dim: usize,
        split: (usize, usize, usize),
        base: f64,
    ) -> Result<Self, RotaryError> {
        if head_dim == 0 || !head_dim.is_multiple_of(2) {
            return Err(RotaryError::OddHeadDim(head_dim));
        }
        let half = head_dim / 2;
        if split.0 + split.1 + split.2 != half {
            return Err(RotaryError::BadSplit { split, half });
        }
        if !(base.is_finite() && base > 1.0) {
            return Err(RotaryError::BadBase(base));
        }
        let pairs = (0..half)
            .map(|k| {
                let axis = if k < split.0 {
                    Axis::Seq
                } else if k < split.0 + split.1 {
                    Axis::Row
                } else {
                    Axis::Col
                };
                (axis, base.powf(-2.0 * k as f64 / head_dim as f64))
            })
            .collect();
        Ok(Self {
            head_dim,
            split,
            base,
            pairs,
        })
    }

    /// `ceil(half / 2)` pairs for the sequence axis, the rest shared between
    /// rows and columns (rows take the odd one out).
    pub fn default_split(head_dim: usize) -> (usize, usize, usize) {
        let half = head_dim / 2;
        let n_s = half.div_ceil(2);
        let rest = half - n_s;
        let n_r = rest.div_ceil(2);
        (n_s, n_r, rest - n_r)
    }

    pub fn with_head_dim(head_dim: usize) -> Result<Self, RotaryError> {
        Self::new(head_dim, Self::default_split(head_dim), DEFAULT_BASE)
    }

    pub fn head_dim(&self) -> usize {
        self.head_dim
    }

    pub fn split(&self) -> (usize, usize, usize) {
        self.split
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Rotation angle of channel pair `k` at position `p`.
    pub fn angle(&self, k: usize, p: &PositionIndex3) -> f64 {
        let (axis, inv_freq) = self.pairs[k];
        p.axis(axis) * inv_freq
    }

    pub fn pair_axis(&self, k: usize) -> Axis {
        self.pairs[k].0
    }
}

impl Default for RotaryConfig {
    fn default() -> Self {
        Self::with_head_dim(64).expect("64 is a valid head dimension")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadVector(pub Vec<f64>);

impl HeadVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &HeadVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl From<Vec<f64>> for HeadVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

fn check_len(v: &HeadVector, cfg: &RotaryConfig) -> Result<(), RotaryError> {
    if v.len() != cfg.head_dim {
        return Err(RotaryError::ConfigMismatch {
            expected: cfg.head_dim,
            got: v.len(),
        });
    }
    Ok(())
}

/// Rotates each channel pair `(2k, 2k+1)` by its position-dependent angle.
pub fn rotate(
    v: &HeadVector,
    p: &PositionIndex3,
    cfg: &RotaryConfig,
) -> Result<HeadVector, RotaryError> {
    check_len(v, cfg)?;
    let mut out = v.0.clone();
    for (k, pair) in out.chunks_exact_mut(2).enumerate() {
        let (sin, cos) = cfg.angle(k, p).sin_cos();
        let (x0, x1) = (pair[0], pair[1]);
        pair[0] = x0 * cos - x1 * sin;
        pair[1] = x0 * sin + x1 * cos;
    }
    Ok(HeadVector(out))
}

/// Scaled dot product of the rotated query and key.
pub fn attention_logit(
    q: &HeadVector,
    k: &HeadVector,
    pq: &PositionIndex3,
    pk: &PositionIndex3,
    cfg: &RotaryConfig,
) -> Result<f64, RotaryError> {
    let rq = rotate(q, pq, cfg)?;
    let rk = rotate(k, pk, cfg)?;
    Ok(rq.dot(&rk) / (cfg.head_dim as f64).sqrt())
}

/// Square matrix of raw attention logits, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &ScoreMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &ScoreMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Pairwise logits between every query and every key at the positions of
/// `assignment`. No softmax or masking is applied.
pub fn score_matrix(
    qs: &[HeadVector],
    ks: &[HeadVector],
    assignment: &IndexAssignment,
    cfg: &RotaryConfig,
) -> Result<ScoreMatrix, RotaryError> {
    let n = assignment.len();
    if qs.len() != n {
        return Err(RotaryError::LengthMismatch {
            what: "queries",
            expected: n,
            got: qs.len(),
        });
    }
    if ks.len() != n {
        return Err(RotaryError::LengthMismatch {
            what: "keys",
            expected: n,
            got: ks.len(),
        });
    }
    let rotated = |vs: &[HeadVector]| -> Result<Vec<HeadVector>, RotaryError> {
        vs.iter()
            .zip(&assignment.entries)
            .map(|(v, e)| rotate(v, &e.index, cfg))
            .collect()
    };
    let rq = rotated(qs)?;
    let rk = rotated(ks)?;
    let scale = (cfg.head_dim as f64).sqrt();
    let mut values = Vec::with_capacity(n * n);
    for q in &rq {
        values.extend(rk.iter().map(|k| q.dot(k) / scale));
    }
    Ok(ScoreMatrix { n, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn default_split_allocation() {
        assert_eq!(RotaryConfig::default_split(64), (16, 8, 8));
        assert_eq!(RotaryConfig::default_split(2), (1, 0, 0));
        assert_eq!(RotaryConfig::default_split(6), (2, 1, 0));
        assert_eq!(RotaryConfig::default_split(12), (3, 2, 1));
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            RotaryConfig::new(3, (1, 0, 0), 10.0),
            Err(RotaryError::OddHeadDim(3))
        );
        assert!(matches!(
            RotaryConfig::new(4, (1, 0, 0), 10.0),
            Err(RotaryError::BadSplit { .. })
        ));
        assert!(matches!(
            RotaryConfig::new(4, (2, 0, 0), 1.0),
            Err(RotaryError::BadBase(_))
        ));
    }

    #[test]
    fn zero_position_is_identity() {
        let cfg = RotaryConfig::with_head_dim(8).unwrap();
        let v = HeadVector::new(vec![1.0, -2.0, 3.0, 0.5, 0.0, 7.0, -1.0, 2.0]);
        assert_eq!(rotate(&v, &PositionIndex3::ZERO, &cfg).unwrap(), v);
    }

    #[test]
    fn quarter_turn() {
        let cfg = RotaryConfig::new(2, (1, 0, 0), DEFAULT_BASE).unwrap();
        let out = rotate(
            &HeadVector::new(vec![1.0, 0.0]),
            &PositionIndex3::new(FRAC_PI_2, 0.0, 0.0),
            &cfg,
        )
        .unwrap();
        assert!(out.0[0].abs() < 1e-15);
        assert!((out.0[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_pair_logit_is_cosine() {
        let cfg = RotaryConfig::new(2, (1, 0, 0), DEFAULT_BASE).unwrap();
        let u = HeadVector::new(vec![1.0, 0.0]);
        for s in [0.0, 0.3, 1.0, 2.5, -4.0] {
            let l = attention_logit(
                &u,
                &u,
                &PositionIndex3::ZERO,
                &PositionIndex3::new(s, 0.0, 0.0),
                &cfg,
            )
            .unwrap();
            assert!((l - s.cos() / 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn length_errors() {
        let cfg = RotaryConfig::with_head_dim(4).unwrap();
        let short = HeadVector::new(vec![1.0, 2.0]);
        assert_eq!(
            rotate(&short, &PositionIndex3::ZERO, &cfg),
            Err(RotaryError::ConfigMismatch {
                expected: 4,
                got: 2
            })
        );
    }

    #[test]
    fn pair_axes_follow_split() {
        let cfg = RotaryConfig::new(12, (3, 2, 1), DEFAULT_BASE).unwrap();
        let axes: Vec<Axis> = (0..6).map(|k| cfg.pair_axis(k)).collect();
        assert_eq!(
            axes,
            vec![
                Axis::Seq,
                Axis::Seq,
                Axis::Seq,
                Axis::Row,
                Axis::Row,
                Axis::Col
            ]
        );
    }
}
