//! Index-space perturbations and the divergence sweep built on them.
//!
//! Two operators disturb an [`IndexAssignment`] without touching token
//! content or order:
//!
//! * [`insert_visual_gaps`] opens gaps in the sequence axis of a text-only
//!   assignment, as if blocks of visual tokens had been interleaved.
//! * [`shuffle_visual_indices`] permutes the indices of a random subset of
//!   visual tokens, scrambling their spatial layout.
//!
//! All randomness comes from [`ChaCha8Rng`] (the ChaCha stream cipher with
//! 8 rounds, as published by the `rand_chacha` crate) seeded through
//! `SeedableRng::seed_from_u64`, so a given seed reproduces bit-for-bit.

use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::index::{derive, IndexAssignment, IndexError, IndexStrategy};
use crate::rotary::{score_matrix, HeadVector, RotaryConfig, RotaryError};
use crate::seq::{Modality, MultimodalSequence};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbError {
    #[error("gap insertion needs a text-only assignment; token {0} is not text")]
    NotTextOnly(usize),
    #[error("{n_gaps} gaps requested but only {slots} insertion slots exist")]
    TooManyGaps { n_gaps: usize, slots: usize },
    #[error("gap size must be positive")]
    ZeroGapSize,
    #[error("gap slot {slot} out of range for {len} tokens")]
    SlotOutOfRange { slot: usize, len: usize },
    #[error("shuffle proportion must lie in [0, 1], got {0}")]
    InvalidProportion(f64),
    #[error("sweep needs at least one trial")]
    NoTrials,
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Rotary(#[from] RotaryError),
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapSpec {
    pub n_gaps: usize,
    /// Width of each gap; typically the number of visual tokens per image.
    pub gap_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuffleSpec {
    pub proportion: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbSpec {
    VisualGaps(GapSpec),
    Shuffle(ShuffleSpec),
}

pub fn perturb(
    assignment: &IndexAssignment,
    spec: &PerturbSpec,
) -> Result<IndexAssignment, PerturbError> {
    match spec {
        PerturbSpec::VisualGaps(g) => insert_visual_gaps(assignment, g),
        PerturbSpec::Shuffle(s) => shuffle_visual_indices(assignment, s),
    }
}

/// Opens gaps at the given slots. Slot `k` sits immediately before token
/// `k`; a gap there shifts token `k` and everything after it by
/// `gap_size`. Repeated slots stack.
pub fn insert_gaps_at(
    assignment: &IndexAssignment,
    slots: &[usize],
    gap_size: usize,
) -> Result<IndexAssignment, PerturbError> {
    let n = assignment.len();
    if let Some(e) = assignment
        .entries
        .iter()
        .find(|e| e.modality != Modality::Text)
    {
        return Err(PerturbError::NotTextOnly(e.seq_pos));
    }
    if let Some(&slot) = slots.iter().find(|&&s| s >= n) {
        return Err(PerturbError::SlotOutOfRange { slot, len: n });
    }
    let mut per_slot = vec![0usize; n];
    for &s in slots {
        per_slot[s] += 1;
    }
    let mut out = assignment.clone();
    let mut gaps_so_far = 0;
    for (e, opened) in out.entries.iter_mut().zip(per_slot) {
        gaps_so_far += opened;
        e.index.s += (gaps_so_far * gap_size) as f64;
    }
    Ok(out)
}

/// Inserts `n_gaps` gaps of `gap_size` at distinct slots drawn uniformly
/// without replacement. With `n` tokens there are `n` slots (one before
/// each token), so the largest `s` grows by exactly `n_gaps * gap_size`.
pub fn insert_visual_gaps(
    assignment: &IndexAssignment,
    spec: &GapSpec,
) -> Result<IndexAssignment, PerturbError> {
    if spec.gap_size == 0 {
        return Err(PerturbError::ZeroGapSize);
    }
    let n = assignment.len();
    if let Some(e) = assignment
        .entries
        .iter()
        .find(|e| e.modality != Modality::Text)
    {
        return Err(PerturbError::NotTextOnly(e.seq_pos));
    }
    if spec.n_gaps > n {
        return Err(PerturbError::TooManyGaps {
            n_gaps: spec.n_gaps,
            slots: n,
        });
    }
    let mut rng = rng_from_seed(spec.seed);
    let slots = index::sample(&mut rng, n, spec.n_gaps).into_vec();
    insert_gaps_at(assignment, &slots, spec.gap_size)
}

/// Number of visual tokens a shuffle touches: `proportion * n_visual`
/// rounded half up.
pub fn shuffle_count(proportion: f64, n_visual: usize) -> usize {
    ((proportion * n_visual as f64) + 0.5).floor() as usize
}

/// Picks `round(proportion * n_visual)` visual tokens uniformly and permutes
/// their indices among themselves. Other entries are left untouched.
pub fn shuffle_visual_indices(
    assignment: &IndexAssignment,
    spec: &ShuffleSpec,
) -> Result<IndexAssignment, PerturbError> {
    if !(0.0..=1.0).contains(&spec.proportion) {
        return Err(PerturbError::InvalidProportion(spec.proportion));
    }
    let visual: Vec<usize> = assignment
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.modality == Modality::Visual)
        .map(|(i, _)| i)
        .collect();
    let count = shuffle_count(spec.proportion, visual.len()).min(visual.len());
    let mut rng = rng_from_seed(spec.seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, visual.len(), count)
        .into_iter()
        .map(|i| visual[i])
        .collect();
    chosen.sort_unstable();
    let mut values: Vec<_> = chosen
        .iter()
        .map(|&i| assignment.entries[i].index)
        .collect();
    values.shuffle(&mut rng);

    let mut out = assignment.clone();
    for (&i, v) in chosen.iter().zip(values) {
        out.entries[i].index = v;
    }
    Ok(out)
}

/// Perturbation levels swept by [`run_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    /// Number of gaps per level, each `gap_size` wide.
    Gaps { levels: Vec<usize>, gap_size: usize },
    /// Proportion of shuffled visual tokens per level.
    Shuffle { proportions: Vec<f64> },
}

impl SweepGrid {
    fn level_values(&self) -> Vec<f64> {
        match self {
            SweepGrid::Gaps { levels, .. } => levels.iter().map(|&l| l as f64).collect(),
            SweepGrid::Shuffle { proportions } => proportions.clone(),
        }
    }

    fn spec_at(&self, level: usize, seed: u64) -> PerturbSpec {
        match self {
            SweepGrid::Gaps { levels, gap_size } => PerturbSpec::VisualGaps(GapSpec {
                n_gaps: levels[level],
                gap_size: *gap_size,
                seed,
            }),
            SweepGrid::Shuffle { proportions } => PerturbSpec::Shuffle(ShuffleSpec {
                proportion: proportions[level],
                seed,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: SweepGrid,
    pub trials: usize,
    pub seed: u64,
    pub rotary: RotaryConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub level: f64,
    pub trial: usize,
    /// `||S_perturbed - S_clean||_F / ||S_clean||_F`.
    pub divergence: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> HeadVector {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return HeadVector(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Random unit query and key vectors for one trial. Trial `t` draws from
/// ChaCha stream `t` of `seed`, so every level sees the same vectors.
pub fn trial_vectors(
    seed: u64,
    trial: usize,
    n: usize,
    dim: usize,
) -> (Vec<HeadVector>, Vec<HeadVector>) {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(trial as u64);
    let qs = (0..n).map(|_| random_unit(&mut rng, dim)).collect();
    let ks = (0..n).map(|_| random_unit(&mut rng, dim)).collect();
    (qs, ks)
}

fn perturb_seed(seed: u64, level: usize, trial: usize) -> u64 {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(((level as u64 + 1) << 32) | trial as u64);
    rng.next_u64()
}

/// For every level and trial, compares the score matrix of the clean
/// assignment with that of its perturbed copy. Rows come out sorted by
/// `(level index, trial)`.
pub fn run_sweep(
    seq: &MultimodalSequence,
    strategy: &IndexStrategy,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>, PerturbError> {
    if cfg.trials == 0 {
        return Err(PerturbError::NoTrials);
    }
    let clean = derive(seq, strategy)?;
    let levels = cfg.grid.level_values();
    let mut rows = Vec::with_capacity(levels.len() * cfg.trials);
    for trial in 0..cfg.trials {
        let (qs, ks) = trial_vectors(cfg.seed, trial, clean.len(), cfg.rotary.head_dim());
        let reference = score_matrix(&qs, &ks, &clean, &cfg.rotary)?;
        let reference_norm = reference.frobenius_norm();
        for (li, &level) in levels.iter().enumerate() {
            let spec = cfg.grid.spec_at(li, perturb_seed(cfg.seed, li, trial));
            let perturbed = perturb(&clean, &spec)?;
            let scores = score_matrix(&qs, &ks, &perturbed, &cfg.rotary)?;
            let diff = reference.distance(&scores);
            let divergence = if diff == 0.0 {
                0.0
            } else if reference_norm == 0.0 {
                f64::INFINITY
            } else {
                diff / reference_norm
            };
            rows.push((
                li,
                SweepRow {
                    level,
                    trial,
                    divergence,
                },
            ));
        }
    }
    rows.sort_by_key(|(li, r)| (*li, r.trial));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}
