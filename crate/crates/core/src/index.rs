//! Positional index derivation strategies.
//!
//! Every strategy maps a [`MultimodalSequence`] to one [`PositionIndex3`]
//! per token. One-dimensional strategies fill only the sequence axis `s`;
//! two-dimensional strategies fill `(s, r)` and leave `c = 0`, so a single
//! rotary applicator can consume the output of any strategy.
//!
//! | strategy | text token at `i` | visual patch `(row, col)` |
//! |----------|-------------------|---------------------------|
//! | No-PE    | `(0, 0, 0)`       | `(0, 0, 0)`               |
//! | 1D       | `(i, 0, 0)`       | `(i, 0, 0)`               |
//! | 2D       | `(i, i, 0)`       | `(row, col, 0) + idx(t_prev)` |
//! | MIPE     | `(i, i, 0)`       | `(row, col, 0)`           |
//! | V2PE     | running counter, step 1 | running counter, fractional step |
//! | MSPE     | `(i', 0, 0)`      | `(i'_j, row, col)`        |
//! | OMEGA    | `(i', 0, 0)`      | `(i'_j, g*row, g*col)`    |
//!
//! `i'` is the position in the placeholder-substituted sequence and `i'_j`
//! the position of image `j`'s placeholder there. Under MSPE and OMEGA the
//! placeholder index `(i'_j, 0, 0)` coincides with the index of patch
//! `(0, 0)`; this collision is inherent to the formulation and is kept.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaess::GaessConfig;
use crate::seq::{apply_phi, ImageId, Modality, MultimodalSequence};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("visual step must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("visual step must not exceed 1, got {0}")]
    StepTooLarge(f64),
    #[error("gamma {gamma} outside [{min}, {max}]")]
    GammaOutOfBounds { gamma: f64, min: f64, max: f64 },
}

/// Real-valued positional index on the sequence, row and column axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PositionIndex3 {
    pub s: f64,
    pub r: f64,
    pub c: f64,
}

impl PositionIndex3 {
    pub const ZERO: Self = Self {
        s: 0.0,
        r: 0.0,
        c: 0.0,
    };

    pub const fn new(s: f64, r: f64, c: f64) -> Self {
        Self { s, r, c }
    }

    pub fn axis(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Seq => self.s,
            Axis::Row => self.r,
            Axis::Col => self.c,
        }
    }
}

impl std::ops::Add for PositionIndex3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.s + o.s, self.r + o.r, self.c + o.c)
    }
}

impl std::ops::Sub for PositionIndex3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.s - o.s, self.r - o.r, self.c - o.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Seq,
    Row,
    Col,
}

/// Strategy tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "nope")]
    NoPe,
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "mipe")]
    Mipe,
    #[serde(rename = "v2pe")]
    V2pe,
    #[serde(rename = "mspe")]
    Mspe,
    #[serde(rename = "omega")]
    Omega,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::NoPe,
        Strategy::OneD,
        Strategy::TwoD,
        Strategy::Mipe,
        Strategy::V2pe,
        Strategy::Mspe,
        Strategy::Omega,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::NoPe => "nope",
            Strategy::OneD => "1d",
            Strategy::TwoD => "2d",
            Strategy::Mipe => "mipe",
            Strategy::V2pe => "v2pe",
            Strategy::Mspe => "mspe",
            Strategy::Omega => "omega",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy `{s}` (expected one of nope, 1d, 2d, mipe, v2pe, mspe, omega)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexEntry {
    pub seq_pos: usize,
    pub modality: Modality,
    pub index: PositionIndex3,
}

/// Index of an image's placeholder in the substituted sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaceholderIndex {
    pub image_id: ImageId,
    pub index: PositionIndex3,
}

/// Per-token output of a derivation strategy, in `seq_pos` order.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexAssignment {
    pub entries: Vec<IndexEntry>,
    /// `None` when the assignment was loaded from a file that does not
    /// record where it came from.
    pub strategy: Option<Strategy>,
    /// Set iff the strategy is OMEGA.
    pub gamma_used: Option<f64>,
    /// Placeholder indices per image (MSPE and OMEGA only).
    pub placeholders: Vec<PlaceholderIndex>,
}

impl IndexAssignment {
    fn from_fn(
        seq: &MultimodalSequence,
        strategy: Strategy,
        mut f: impl FnMut(usize, &crate::seq::Token) -> PositionIndex3,
    ) -> Self {
        let entries = seq
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, t)| IndexEntry {
                seq_pos: t.seq_pos,
                modality: t.modality,
                index: f(i, t),
            })
            .collect();
        Self {
            entries,
            strategy: Some(strategy),
            gamma_used: None,
            placeholders: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = PositionIndex3> + '_ {
        self.entries.iter().map(|e| e.index)
    }

    /// Adds `delta` to every index.
    pub fn shifted(&self, delta: PositionIndex3) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.index = e.index + delta;
        }
        for p in &mut out.placeholders {
            p.index = p.index + delta;
        }
        out
    }
}

/// Fractional visual step for V2PE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2peConfig {
    visual_step: f64,
}

impl Default for V2peConfig {
    fn default() -> Self {
        Self {
            visual_step: 1.0 / 16.0,
        }
    }
}

impl V2peConfig {
    pub fn new(visual_step: f64) -> Result<Self, IndexError> {
        if !(visual_step.is_finite() && visual_step > 0.0) {
            return Err(IndexError::NonPositiveStep(visual_step));
        }
        if visual_step > 1.0 {
            return Err(IndexError::StepTooLarge(visual_step));
        }
        Ok(Self { visual_step })
    }

    pub fn visual_step(&self) -> f64 {
        self.visual_step
    }
}

/// A strategy together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexStrategy {
    NoPe,
    OneD,
    TwoD,
    Mipe,
    V2pe(V2peConfig),
    Mspe,
    Omega { gamma: f64, bounds: GaessConfig },
}

impl IndexStrategy {
    pub fn tag(&self) -> Strategy {
        match self {
            IndexStrategy::NoPe => Strategy::NoPe,
            IndexStrategy::OneD => Strategy::OneD,
            IndexStrategy::TwoD => Strategy::TwoD,
            IndexStrategy::Mipe => Strategy::Mipe,
            IndexStrategy::V2pe(_) => Strategy::V2pe,
            IndexStrategy::Mspe => Strategy::Mspe,
            IndexStrategy::Omega { .. } => Strategy::Omega,
        }
    }
}

pub fn derive(
    seq: &MultimodalSequence,
    strategy: &IndexStrategy,
) -> Result<IndexAssignment, IndexError> {
    Ok(match *strategy {
        IndexStrategy::NoPe => derive_no_pe(seq),
        IndexStrategy::OneD => derive_1d(seq),
        IndexStrategy::TwoD => derive_2d(seq),
        IndexStrategy::Mipe => derive_mipe(seq),
        IndexStrategy::V2pe(cfg) => derive_v2pe(seq, &cfg),
        IndexStrategy::Mspe => derive_mspe(seq),
        IndexStrategy::Omega { gamma, bounds } => derive_omega(seq, gamma, &bounds)?,
    })
}

pub fn derive_no_pe(seq: &MultimodalSequence) -> IndexAssignment {
    IndexAssignment::from_fn(seq, Strategy::NoPe, |_, _| PositionIndex3::ZERO)
}

/// Every token gets its raw sequence position on the `s` axis.
pub fn derive_1d(seq: &MultimodalSequence) -> IndexAssignment {
    IndexAssignment::from_fn(seq, Strategy::OneD, |i, _| {
        PositionIndex3::new(i as f64, 0.0, 0.0)
    })
}

/// Text at `i` gets `(i, i)`; a patch gets its grid coordinates offset by
/// the index of the closest preceding text token, or by `(0, 0)` when no
/// text precedes it.
pub fn derive_2d(seq: &MultimodalSequence) -> IndexAssignment {
    let mut prev = PositionIndex3::ZERO;
    IndexAssignment::from_fn(seq, Strategy::TwoD, |i, t| match t.grid_ref {
        None => {
            let i = i as f64;
            prev = PositionIndex3::new(i, i, 0.0);
            prev
        }
        Some(g) => PositionIndex3::new(g.row as f64, g.col as f64, 0.0) + prev,
    })
}

/// Like 2D, but patches use bare grid coordinates with no text offset.
pub fn derive_mipe(seq: &MultimodalSequence) -> IndexAssignment {
    IndexAssignment::from_fn(seq, Strategy::Mipe, |i, t| match t.grid_ref {
        None => PositionIndex3::new(i as f64, i as f64, 0.0),
        Some(g) => PositionIndex3::new(g.row as f64, g.col as f64, 0.0),
    })
}

/// Shared running counter: text advances it by 1, visual tokens by the
/// configured fractional step.
pub fn derive_v2pe(seq: &MultimodalSequence, cfg: &V2peConfig) -> IndexAssignment {
    let mut p = 0.0;
    IndexAssignment::from_fn(seq, Strategy::V2pe, |_, t| {
        let idx = PositionIndex3::new(p, 0.0, 0.0);
        p += if t.grid_ref.is_some() {
            cfg.visual_step
        } else {
            1.0
        };
        idx
    })
}

fn modality_specific(seq: &MultimodalSequence, strategy: Strategy, step: f64) -> IndexAssignment {
    let sub = apply_phi(seq);
    let placeholders: Vec<PlaceholderIndex> = sub
        .map
        .entries
        .iter()
        .map(|e| PlaceholderIndex {
            image_id: e.image_id,
            index: PositionIndex3::new(e.placeholder_pos as f64, 0.0, 0.0),
        })
        .collect();

    // Text tokens take consecutive slots of the substituted sequence,
    // skipping the slots occupied by placeholders.
    let mut text_slots = sub
        .tokens
        .iter()
        .filter(|t| t.modality == Modality::Text)
        .map(|t| t.seq_pos);
    let mut out = IndexAssignment::from_fn(seq, strategy, |_, t| match t.grid_ref {
        None => PositionIndex3::new(
            text_slots.next().expect("one slot per text token") as f64,
            0.0,
            0.0,
        ),
        Some(g) => {
            let anchor = placeholders
                .iter()
                .find(|p| p.image_id == g.image_id)
                .expect("every image has a placeholder")
                .index;
            PositionIndex3::new(0.0, step * g.row as f64, step * g.col as f64) + anchor
        }
    });
    out.placeholders = placeholders;
    out
}

/// Text and placeholders share the `s` axis; patches sit on the `r`/`c`
/// axes anchored at their image's placeholder.
pub fn derive_mspe(seq: &MultimodalSequence) -> IndexAssignment {
    modality_specific(seq, Strategy::Mspe, 1.0)
}

/// MSPE with visual row/column indices scaled by `gamma`, which must lie
/// within `bounds`.
pub fn derive_omega(
    seq: &MultimodalSequence,
    gamma: f64,
    bounds: &GaessConfig,
) -> Result<IndexAssignment, IndexError> {
    if !(gamma.is_finite() && bounds.contains(gamma)) {
        return Err(IndexError::GammaOutOfBounds {
            gamma,
            min: bounds.gamma_min(),
            max: bounds.gamma_max(),
        });
    }
    let mut out = modality_specific(seq, Strategy::Omega, gamma);
    out.gamma_used = Some(gamma);
    Ok(out)
}
