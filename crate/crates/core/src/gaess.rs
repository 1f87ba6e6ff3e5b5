//! Histogram-based embedding entropy and the visual step scaling factor.
//!
//! Each embedding dimension is histogrammed into `K` uniform bins spanning
//! the observed `[min, max]` of that dimension. The entropy of a matrix is
//! the mean of the per-dimension Shannon entropies, in bits. Comparing the
//! entropy of visual and textual embeddings yields the density ratio
//! `sqrt(h_vis / h_txt)`, which is clamped into `[gamma_min, gamma_max]` to
//! give the step size applied to visual row/column indices.

use thiserror::Error;

pub const DEFAULT_BINS: usize = 256;
pub const DEFAULT_GAMMA_MIN: f64 = 0.25;
pub const DEFAULT_GAMMA_MAX: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaessError {
    #[error("embedding matrix must have N >= 1 and d >= 1, got {n}x{d}")]
    EmptyMatrix { n: usize, d: usize },
    #[error("embedding matrix has {got} values, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite embedding value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("text entropy is zero")]
    ZeroTextEntropy,
    #[error("entropy must be finite and nonnegative, got {0}")]
    InvalidEntropy(f64),
    #[error("histogram needs at least one bin")]
    ZeroBins,
    #[error("invalid gamma bounds [{min}, {max}]")]
    InvalidBounds { min: f64, max: f64 },
}

/// Histogram resolution and clamp bounds for the scaling factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaessConfig {
    bins: usize,
    gamma_min: f64,
    gamma_max: f64,
}

impl Default for GaessConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            gamma_min: DEFAULT_GAMMA_MIN,
            gamma_max: DEFAULT_GAMMA_MAX,
        }
    }
}

impl GaessConfig {
    pub fn new(bins: usize, gamma_min: f64, gamma_max: f64) -> Result<Self, GaessError> {
        if bins == 0 {
            return Err(GaessError::ZeroBins);
        }
        if !(gamma_min.is_finite()
            && gamma_max.is_finite()
            && gamma_min > 0.0
            && gamma_max >= gamma_min)
        {
            return Err(GaessError::InvalidBounds {
                min: gamma_min,
                max: gamma_max,
            });
        }
        Ok(Self {
            bins,
            gamma_min,
            gamma_max,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    pub fn contains(&self, gamma: f64) -> bool {
        gamma >= self.gamma_min && gamma <= self.gamma_max
    }

    pub fn clamp(&self, gamma: f64) -> f64 {
        gamma.clamp(self.gamma_min, self.gamma_max)
    }
}

/// Dense `N x d` matrix of finite embedding values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl EmbeddingMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, GaessError> {
        if rows == 0 || cols == 0 {
            return Err(GaessError::EmptyMatrix { n: rows, d: cols });
        }
        if values.len() != rows * cols {
            return Err(GaessError::ShapeMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GaessError::NonFiniteInput {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self { values, rows, cols })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GaessError> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(GaessError::ShapeMismatch {
                    expected: n * d,
                    got: values.len() + r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(n, d, values)
    }

    /// Token count `N`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Embedding dimension `d`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(j).step_by(self.cols).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    /// Mean entropy in bits per dimension.
    pub h_bits: f64,
    pub per_dim: Vec<f64>,
}

/// Bin of `x` among `bins` uniform bins over `[min, min + range]`.
/// Interior boundaries are half-open; `x == max` lands in the last bin.
fn bin_of(x: f64, min: f64, range: f64, bins: usize) -> usize {
    let k = ((x - min) / range * bins as f64).floor();
    if k < 0.0 {
        0
    } else {
        (k as usize).min(bins - 1)
    }
}

/// Shannon entropy (bits) of the `bins`-bin histogram of `column`.
///
/// A constant column has zero entropy. An empty column also returns zero.
pub fn dimension_entropy(column: &[f64], bins: usize) -> f64 {
    if column.is_empty() || bins == 0 {
        return 0.0;
    }
    let (min, max) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let range = max - min;
    if range.is_nan() || range <= 0.0 {
        return 0.0;
    }
    let mut counts = vec![0usize; bins];
    for &x in column {
        counts[bin_of(x, min, range, bins)] += 1;
    }
    let n = column.len() as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // A single occupied bin sums to -0.0.
    h.max(0.0)
}

/// Per-dimension histogram entropy of `z` and its mean.
pub fn embedding_entropy(z: &EmbeddingMatrix, bins: usize) -> Result<EntropyReport, GaessError> {
    if bins == 0 {
        return Err(GaessError::ZeroBins);
    }
    let mut column = Vec::with_capacity(z.rows());
    let per_dim: Vec<f64> = (0..z.cols())
        .map(|j| {
            column.clear();
            column.extend(z.column(j));
            dimension_entropy(&column, bins)
        })
        .collect();
    let h_bits = per_dim.iter().sum::<f64>() / per_dim.len() as f64;
    Ok(EntropyReport { h_bits, per_dim })
}

fn check_entropy(h: f64) -> Result<(), GaessError> {
    if h.is_finite() && h >= 0.0 {
        Ok(())
    } else {
        Err(GaessError::InvalidEntropy(h))
    }
}

/// Information density ratio `sqrt(h_vis / h_txt)`.
pub fn density_ratio(h_vis: f64, h_txt: f64) -> Result<f64, GaessError> {
    check_entropy(h_vis)?;
    check_entropy(h_txt)?;
    if h_txt == 0.0 {
        return Err(GaessError::ZeroTextEntropy);
    }
    Ok((h_vis / h_txt).sqrt())
}

/// Visual step scaling factor: the density ratio clamped into the
/// configured bounds.
///
/// Zero text entropy yields `gamma_max` when the visual entropy is positive
/// and `clamp(1)` when both are zero. Invalid (negative or non-finite)
/// entropies are treated as zero.
pub fn compute_gamma(h_vis: f64, h_txt: f64, cfg: &GaessConfig) -> f64 {
    let sanitize = |h: f64| if h.is_finite() && h > 0.0 { h } else { 0.0 };
    let (h_vis, h_txt) = (sanitize(h_vis), sanitize(h_txt));
    match density_ratio(h_vis, h_txt) {
        Ok(rho) => cfg.clamp(rho),
        Err(_) if h_vis > 0.0 => cfg.gamma_max,
        Err(_) => cfg.clamp(1.0),
    }
}

/// Entropy of both modalities and the resulting scaling factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    pub text: EntropyReport,
    pub vision: EntropyReport,
    pub gamma: f64,
}

pub fn estimate_gamma(
    text: &EmbeddingMatrix,
    vision: &EmbeddingMatrix,
    cfg: &GaessConfig,
) -> Result<GammaEstimate, GaessError> {
    let text = embedding_entropy(text, cfg.bins)?;
    let vision = embedding_entropy(vision, cfg.bins)?;
    let gamma = compute_gamma(vision.h_bits, text.h_bits, cfg);
    Ok(GammaEstimate {
        text,
        vision,
        gamma,
    })
}
