//! Multimodal token sequences, image grids and placeholder substitution.
//!
//! A [`MultimodalSequence`] is an ordered list of text and visual tokens.
//! Each image enters the sequence as `rows * cols` visual tokens in
//! row-major order. [`apply_phi`] collapses every image into a single
//! placeholder token and returns a [`PlaceholderMap`] that remembers which
//! visual tokens each placeholder stands for.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    #[error("image grid must have at least one row and one column, got {rows}x{cols}")]
    ZeroDimGrid { rows: usize, cols: usize },
    #[error("sequence has no tokens")]
    EmptySequence,
    #[error("invalid sequence: {0}")]
    Invalid(String),
}

/// Modality tag carried by every token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Visual,
    Placeholder,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Visual => "visual",
            Modality::Placeholder => "placeholder",
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Modality::Text),
            "visual" => Ok(Modality::Visual),
            "placeholder" => Ok(Modality::Placeholder),
            other => Err(format!("unknown modality `{other}`")),
        }
    }
}

/// Identifier of an image instance. Images are numbered in order of
/// appearance, starting at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImageId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageGrid {
    pub image_id: ImageId,
    pub rows: usize,
    pub cols: usize,
}

impl ImageGrid {
    pub fn new(image_id: ImageId, rows: usize, cols: usize) -> Result<Self, SeqError> {
        if rows == 0 || cols == 0 {
            return Err(SeqError::ZeroDimGrid { rows, cols });
        }
        Ok(Self {
            image_id,
            rows,
            cols,
        })
    }

    pub fn patch_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Row-major patch index `row * cols + col`.
    pub fn patch_index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Inverse of [`ImageGrid::patch_index`].
    pub fn patch_coords(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }
}

/// Location of a visual token inside its image grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRef {
    pub image_id: ImageId,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub seq_pos: usize,
    pub modality: Modality,
    /// Present iff `modality == Visual`.
    pub grid_ref: Option<GridRef>,
}

impl Token {
    pub fn text(seq_pos: usize) -> Self {
        Self {
            seq_pos,
            modality: Modality::Text,
            grid_ref: None,
        }
    }

    pub fn visual(seq_pos: usize, grid_ref: GridRef) -> Self {
        Self {
            seq_pos,
            modality: Modality::Visual,
            grid_ref: Some(grid_ref),
        }
    }

    pub fn placeholder(seq_pos: usize) -> Self {
        Self {
            seq_pos,
            modality: Modality::Placeholder,
            grid_ref: None,
        }
    }
}

/// One entry of a sequence description file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeqItem {
    /// `count` consecutive text tokens.
    Text {
        count: usize,
    },
    Image {
        rows: usize,
        cols: usize,
    },
}

/// Ordered list of items describing a sequence, as read from JSON:
/// `{"items":[{"kind":"text","count":2},{"kind":"image","rows":2,"cols":2}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub items: Vec<SeqItem>,
}

impl SequenceSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(mut self, count: usize) -> Self {
        self.items.push(SeqItem::Text { count });
        self
    }

    pub fn image(mut self, rows: usize, cols: usize) -> Self {
        self.items.push(SeqItem::Image { rows, cols });
        self
    }
}

/// A validated multimodal token sequence. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultimodalSequence {
    tokens: Vec<Token>,
    grids: Vec<ImageGrid>,
}

impl MultimodalSequence {
    /// Builds a sequence from raw parts, checking every structural invariant:
    /// dense `seq_pos`, grid refs in bounds, and each image's patches
    /// contiguous and row-major.
    pub fn from_parts(tokens: Vec<Token>, grids: Vec<ImageGrid>) -> Result<Self, SeqError> {
        if tokens.is_empty() {
            return Err(SeqError::EmptySequence);
        }
        for (i, g) in grids.iter().enumerate() {
            if g.rows == 0 || g.cols == 0 {
                return Err(SeqError::ZeroDimGrid {
                    rows: g.rows,
                    cols: g.cols,
                });
            }
            if grids[..i].iter().any(|o| o.image_id == g.image_id) {
                return Err(SeqError::Invalid(format!(
                    "duplicate image id {}",
                    g.image_id.0
                )));
            }
        }
        let grid_of = |id: ImageId| grids.iter().find(|g| g.image_id == id);

        let mut seen = vec![false; grids.len()];
        let mut i = 0;
        while i < tokens.len() {
            let t = &tokens[i];
            if t.seq_pos != i {
                return Err(SeqError::Invalid(format!(
                    "token {i} has seq_pos {}",
                    t.seq_pos
                )));
            }
            match (t.modality, t.grid_ref) {
                (Modality::Text, None) => i += 1,
                (Modality::Visual, Some(gr)) => {
                    let grid = grid_of(gr.image_id).ok_or_else(|| {
                        SeqError::Invalid(format!(
                            "token {i} references unknown image {}",
                            gr.image_id.0
                        ))
                    })?;
                    let slot = grids
                        .iter()
                        .position(|g| g.image_id == gr.image_id)
                        .unwrap();
                    if seen[slot] {
                        return Err(SeqError::Invalid(format!(
                            "patches of image {} are not contiguous",
                            gr.image_id.0
                        )));
                    }
                    seen[slot] = true;
                    let n = grid.patch_count();
                    if i + n > tokens.len() {
                        return Err(SeqError::Invalid(format!(
                            "image {} is truncated",
                            gr.image_id.0
                        )));
                    }
                    for l in 0..n {
                        let tok = &tokens[i + l];
                        let (row, col) = grid.patch_coords(l);
                        let expected = GridRef {
                            image_id: gr.image_id,
                            row,
                            col,
                        };
                        if tok.seq_pos != i + l
                            || tok.modality != Modality::Visual
                            || tok.grid_ref != Some(expected)
                        {
                            return Err(SeqError::Invalid(format!(
                                "token {} breaks row-major order of image {}",
                                i + l,
                                gr.image_id.0
                            )));
                        }
                    }
                    i += n;
                }
                (Modality::Placeholder, _) => {
                    return Err(SeqError::Invalid(format!("token {i} is a placeholder")));
                }
                (m, _) => {
                    return Err(SeqError::Invalid(format!(
                        "token {i}: grid ref inconsistent with {m}"
                    )));
                }
            }
        }
        if let Some(slot) = seen.iter().position(|s| !s) {
            return Err(SeqError::Invalid(format!(
                "image {} has no tokens",
                grids[slot].image_id.0
            )));
        }
        Ok(Self { tokens, grids })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn grids(&self) -> &[ImageGrid] {
        &self.grids
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn grid(&self, id: ImageId) -> Option<&ImageGrid> {
        self.grids.iter().find(|g| g.image_id == id)
    }

    pub fn text_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| t.modality == Modality::Text)
            .count()
    }

    pub fn visual_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| t.modality == Modality::Visual)
            .count()
    }
}

/// Expands a [`SequenceSpec`] into tokens. Images get ids `0, 1, ...` in
/// order of appearance and contribute their patches in row-major order.
pub fn build_sequence(spec: &SequenceSpec) -> Result<MultimodalSequence, SeqError> {
    let mut tokens = Vec::new();
    let mut grids = Vec::new();
    for item in &spec.items {
        match *item {
            SeqItem::Text { count } => {
                for _ in 0..count {
                    tokens.push(Token::text(tokens.len()));
                }
            }
            SeqItem::Image { rows, cols } => {
                let grid = ImageGrid::new(ImageId(grids.len()), rows, cols)?;
                for row in 0..rows {
                    for col in 0..cols {
                        let gr = GridRef {
                            image_id: grid.image_id,
                            row,
                            col,
                        };
                        tokens.push(Token::visual(tokens.len(), gr));
                    }
                }
                grids.push(grid);
            }
        }
    }
    if tokens.is_empty() {
        return Err(SeqError::EmptySequence);
    }
    Ok(MultimodalSequence { tokens, grids })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceholderEntry {
    /// Position of the placeholder inside the substituted sequence.
    pub placeholder_pos: usize,
    pub image_id: ImageId,
    /// Original `seq_pos` values of the visual tokens, row-major.
    pub visual_positions: Vec<usize>,
}

/// Mapping from each placeholder to the visual tokens it replaced. Entries
/// are ordered by placeholder position and partition the visual tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlaceholderMap {
    pub entries: Vec<PlaceholderEntry>,
}

impl PlaceholderMap {
    pub fn entry_for_image(&self, id: ImageId) -> Option<&PlaceholderEntry> {
        self.entries.iter().find(|e| e.image_id == id)
    }

    /// Reverses the substitution: every placeholder in `substituted` is
    /// replaced by its image's visual tokens, and `seq_pos` is renumbered.
    pub fn expand(
        &self,
        substituted: &[Token],
        grids: &[ImageGrid],
    ) -> Result<Vec<Token>, SeqError> {
        let mut out = Vec::new();
        for tok in substituted {
            match tok.modality {
                Modality::Text => out.push(Token::text(out.len())),
                Modality::Placeholder => {
                    let entry = self
                        .entries
                        .iter()
                        .find(|e| e.placeholder_pos == tok.seq_pos)
                        .ok_or_else(|| {
                            SeqError::Invalid(format!("no mapping for placeholder {}", tok.seq_pos))
                        })?;
                    let grid = grids
                        .iter()
                        .find(|g| g.image_id == entry.image_id)
                        .ok_or_else(|| {
                            SeqError::Invalid(format!("unknown image {}", entry.image_id.0))
                        })?;
                    for l in 0..grid.patch_count() {
                        let (row, col) = grid.patch_coords(l);
                        let gr = GridRef {
                            image_id: grid.image_id,
                            row,
                            col,
                        };
                        out.push(Token::visual(out.len(), gr));
                    }
                }
                Modality::Visual => {
                    return Err(SeqError::Invalid(
                        "substituted sequence contains a visual token".into(),
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Result of placeholder substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    /// Text and placeholder tokens; `seq_pos` is the position in this list.
    pub tokens: Vec<Token>,
    pub map: PlaceholderMap,
}

/// Replaces each image's run of visual tokens with one placeholder token.
/// Text tokens keep their relative order.
pub fn apply_phi(seq: &MultimodalSequence) -> Substitution {
    let mut tokens = Vec::with_capacity(seq.text_count() + seq.grids.len());
    let mut map = PlaceholderMap::default();
    let mut current: Option<ImageId> = None;
    for tok in &seq.tokens {
        match tok.grid_ref {
            None => {
                current = None;
                tokens.push(Token::text(tokens.len()));
            }
            Some(gr) => {
                if current != Some(gr.image_id) {
                    current = Some(gr.image_id);
                    map.entries.push(PlaceholderEntry {
                        placeholder_pos: tokens.len(),
                        image_id: gr.image_id,
                        visual_positions: Vec::new(),
                    });
                    tokens.push(Token::placeholder(tokens.len()));
                }
                // invariant: the last entry belongs to `current`
                map.entries
                    .last_mut()
                    .unwrap()
                    .visual_positions
                    .push(tok.seq_pos);
            }
        }
    }
    Substitution { tokens, map }
}
