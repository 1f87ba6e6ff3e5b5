//! File formats: sequence descriptions, embedding matrices, index tables
//! and sweep tables.
//!
//! Embedding matrices are read either from the `EMB1` binary layout
//!
//! ```text
//! b"EMB1" | N: u32 LE | d: u32 LE | N*d f32 LE values, row-major
//! ```
//!
//! or from headerless CSV with `d` values per line. Index tables are CSV
//! with header `seq_pos,modality,s,r,c` and reals printed with nine
//! significant digits; OMEGA tables end with a `# gamma=<value>` line.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaess::{EmbeddingMatrix, GaessError};
use crate::index::{IndexAssignment, IndexEntry, PlaceholderIndex, PositionIndex3, Strategy};
use crate::perturb::SweepRow;
use crate::seq::{ImageId, Modality, SequenceSpec};

pub const EMB1_MAGIC: &[u8; 4] = b"EMB1";
pub const INDEX_CSV_HEADER: &str = "seq_pos,modality,s,r,c";
pub const SWEEP_CSV_HEADER: &str = "level,trial,divergence";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad magic: expected EMB1")]
    BadMagic,
    #[error("truncated payload: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("matrix dimensions {n}x{d} overflow")]
    Overflow { n: u64, d: u64 },
    #[error(transparent)]
    Matrix(#[from] GaessError),
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected header `{expected}`, found `{found}`")]
    Header {
        expected: &'static str,
        found: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_to_string(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), FormatError> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Rounds to nine significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x + 0.0;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Shortest decimal string of `x` rounded to nine significant digits.
pub fn format_real(x: f64) -> String {
    format!("{}", round_sig9(x))
}

pub fn parse_sequence_spec(text: &str) -> Result<SequenceSpec, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_sequence_spec(path: &Path) -> Result<SequenceSpec, FormatError> {
    parse_sequence_spec(&read_to_string(path)?)
}

pub fn encode_emb1(z: &EmbeddingMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * z.values().len());
    out.extend_from_slice(EMB1_MAGIC);
    out.extend_from_slice(&(z.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(z.cols() as u32).to_le_bytes());
    for &v in z.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_emb1(bytes: &[u8]) -> Result<EmbeddingMatrix, FormatError> {
    if bytes.len() < 4 || &bytes[..4] != EMB1_MAGIC {
        return Err(FormatError::BadMagic);
    }
    if bytes.len() < 12 {
        return Err(FormatError::Truncated {
            expected: 12,
            got: bytes.len(),
        });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let (n, d) = (word(4) as u64, word(8) as u64);
    let payload = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(4))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or(FormatError::Overflow { n, d })?;
    let body = &bytes[12..];
    if body.len() < payload {
        return Err(FormatError::Truncated {
            expected: 12 + payload,
            got: bytes.len(),
        });
    }
    if body.len() > payload {
        return Err(FormatError::TrailingBytes(body.len() - payload));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(EmbeddingMatrix::new(n as usize, d as usize, values)?)
}

pub fn parse_embedding_csv(text: &str) -> Result<EmbeddingMatrix, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut d = None;
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FormatError::Csv {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let width = *d.get_or_insert(record.len());
        if record.len() != width {
            return Err(FormatError::Csv {
                line: i + 1,
                msg: format!("expected {width} values, got {}", record.len()),
            });
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| FormatError::Csv {
                line: i + 1,
                msg: format!("not a number: `{field}`"),
            })?;
            values.push(v);
        }
        n += 1;
    }
    Ok(EmbeddingMatrix::new(n, d.unwrap_or(0), values)?)
}

pub fn write_embedding_csv(z: &EmbeddingMatrix) -> String {
    let mut out = String::new();
    for i in 0..z.rows() {
        let row: Vec<String> = z.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Reads an embedding matrix, choosing the binary layout when the file
/// starts with `EMB1` or has an `.emb` extension and CSV otherwise.
pub fn read_embedding_file(path: &Path) -> Result<EmbeddingMatrix, FormatError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let emb_ext = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("emb"));
    if bytes.starts_with(EMB1_MAGIC) || emb_ext {
        return decode_emb1(&bytes);
    }
    let text = String::from_utf8(bytes).map_err(|_| FormatError::BadMagic)?;
    parse_embedding_csv(&text)
}

pub fn write_index_csv(a: &IndexAssignment) -> String {
    let mut out = String::from(INDEX_CSV_HEADER);
    out.push('\n');
    for e in &a.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.seq_pos,
            e.modality,
            format_real(e.index.s),
            format_real(e.index.r),
            format_real(e.index.c)
        );
    }
    if let Some(g) = a.gamma_used {
        let _ = writeln!(out, "# gamma={}", format_real(g));
    }
    out
}

fn parse_real(field: &str, line: usize) -> Result<f64, FormatError> {
    let v: f64 = field.trim().parse().map_err(|_| FormatError::Csv {
        line,
        msg: format!("not a number: `{field}`"),
    })?;
    if !v.is_finite() {
        return Err(FormatError::Csv {
            line,
            msg: format!("non-finite value `{field}`"),
        });
    }
    Ok(v)
}

/// Parses an index table. A `# gamma=` line marks the table as OMEGA
/// output; otherwise the strategy is unknown.
pub fn parse_index_csv(text: &str) -> Result<IndexAssignment, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != INDEX_CSV_HEADER {
        return Err(FormatError::Header {
            expected: INDEX_CSV_HEADER,
            found: header.to_string(),
        });
    }
    let mut entries = Vec::new();
    let mut gamma = None;
    for (i, line) in lines {
        let line_no = i + 1;
        if let Some(comment) = line.trim().strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("gamma=") {
                gamma = Some(parse_real(v, line_no)?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(FormatError::Csv {
                line: line_no,
                msg: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let seq_pos: usize = fields[0].trim().parse().map_err(|_| FormatError::Csv {
            line: line_no,
            msg: format!("bad seq_pos `{}`", fields[0]),
        })?;
        let modality: Modality = fields[1]
            .trim()
            .parse()
            .map_err(|msg| FormatError::Csv { line: line_no, msg })?;
        let index = PositionIndex3::new(
            parse_real(fields[2], line_no)?,
            parse_real(fields[3], line_no)?,
            parse_real(fields[4], line_no)?,
        );
        entries.push(IndexEntry {
            seq_pos,
            modality,
            index,
        });
    }
    Ok(IndexAssignment {
        entries,
        strategy: gamma.map(|_| Strategy::Omega),
        gamma_used: gamma,
        placeholders: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub seq_pos: usize,
    pub modality: Modality,
    pub s: f64,
    pub r: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceholderRecord {
    pub image_id: usize,
    pub s: f64,
    pub r: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMetadata {
    pub strategy: Option<Strategy>,
    pub gamma: Option<f64>,
    /// Echo of the effective configuration.
    #[serde(default)]
    pub config: serde_json::Value,
}

/// JSON form of an index table: CSV columns plus strategy and config metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDocument {
    pub metadata: IndexMetadata,
    pub entries: Vec<IndexRecord>,
    #[serde(default)]
    pub placeholders: Vec<PlaceholderRecord>,
}

impl IndexDocument {
    pub fn from_assignment(a: &IndexAssignment, config: serde_json::Value) -> Self {
        Self {
            metadata: IndexMetadata {
                strategy: a.strategy,
                gamma: a.gamma_used.map(round_sig9),
                config,
            },
            entries: a
                .entries
                .iter()
                .map(|e| IndexRecord {
                    seq_pos: e.seq_pos,
                    modality: e.modality,
                    s: round_sig9(e.index.s),
                    r: round_sig9(e.index.r),
                    c: round_sig9(e.index.c),
                })
                .collect(),
            placeholders: a
                .placeholders
                .iter()
                .map(|p| PlaceholderRecord {
                    image_id: p.image_id.0,
                    s: round_sig9(p.index.s),
                    r: round_sig9(p.index.r),
                    c: round_sig9(p.index.c),
                })
                .collect(),
        }
    }

    pub fn into_assignment(self) -> IndexAssignment {
        IndexAssignment {
            entries: self
                .entries
                .into_iter()
                .map(|r| IndexEntry {
                    seq_pos: r.seq_pos,
                    modality: r.modality,
                    index: PositionIndex3::new(r.s, r.r, r.c),
                })
                .collect(),
            strategy: self.metadata.strategy,
            gamma_used: self.metadata.gamma,
            placeholders: self
                .placeholders
                .into_iter()
                .map(|p| PlaceholderIndex {
                    image_id: ImageId(p.image_id),
                    index: PositionIndex3::new(p.s, p.r, p.c),
                })
                .collect(),
        }
    }
}

pub fn write_index_json(a: &IndexAssignment, config: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&IndexDocument::from_assignment(a, config))
        .expect("serializable");
    s.push('\n');
    s
}

pub fn parse_index_json(text: &str) -> Result<IndexAssignment, FormatError> {
    let doc: IndexDocument = serde_json::from_str(text)?;
    Ok(doc.into_assignment())
}

/// Parses either index format, picking JSON when the text starts with `{`.
pub fn parse_index(text: &str) -> Result<IndexAssignment, FormatError> {
    if text.trim_start().starts_with('{') {
        parse_index_json(text)
    } else {
        parse_index_csv(text)
    }
}

/// Copy of `a` with every real rounded as the text formats round it.
pub fn rounded(a: &IndexAssignment) -> IndexAssignment {
    let r =
        |p: PositionIndex3| PositionIndex3::new(round_sig9(p.s), round_sig9(p.r), round_sig9(p.c));
    let mut out = a.clone();
    for e in &mut out.entries {
        e.index = r(e.index);
    }
    for p in &mut out.placeholders {
        p.index = r(p.index);
    }
    out.gamma_used = out.gamma_used.map(round_sig9);
    out
}

pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_real(r.level),
            r.trial,
            format_real(r.divergence)
        );
    }
    out
}
