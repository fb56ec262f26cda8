//! Minimal FASTA reading and writing.

use crate::error::{Error, Result};

/// Column width for written sequence lines.
const WRAP: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    /// First whitespace-delimited token of the header.
    pub id: String,
    /// Remainder of the header line, possibly empty.
    pub description: String,
    /// Concatenated sequence with all whitespace removed, uppercased.
    pub sequence: String,
}

/// Parses FASTA text: records start at `>` headers, sequence lines are
/// joined with whitespace stripped and uppercased. Input order is kept.
pub fn parse_fasta(text: &str) -> Result<Vec<FastaRecord>> {
    let mut records: Vec<FastaRecord> = Vec::new();
    let mut open: Option<(usize, FastaRecord)> = None;

    let close = |records: &mut Vec<FastaRecord>, open: Option<(usize, FastaRecord)>| {
        if let Some((header_line, record)) = open {
            if record.sequence.is_empty() {
                return Err(Error::Format {
                    line: header_line,
                    msg: format!("record {:?} has no sequence data", record.id),
                });
            }
            records.push(record);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            close(&mut records, open.take())?;
            let mut parts = header.splitn(2, char::is_whitespace);
            let id = parts.next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(Error::Format {
                    line: line_no,
                    msg: "header has no record id".into(),
                });
            }
            let description = parts.next().unwrap_or("").trim().to_string();
            open = Some((
                line_no,
                FastaRecord {
                    id,
                    description,
                    sequence: String::new(),
                },
            ));
        } else if line.trim().is_empty() {
            continue;
        } else if let Some((_, record)) = open.as_mut() {
            record.sequence.extend(
                line.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| c.to_ascii_uppercase()),
            );
        } else {
            return Err(Error::Format {
                line: line_no,
                msg: "sequence data before the first header".into(),
            });
        }
    }
    close(&mut records, open)?;
    Ok(records)
}

/// Writes records with 60-column sequence wrapping. `parse_fasta` on the
/// output reproduces the input records.
pub fn write_fasta(records: &[FastaRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push('>');
        out.push_str(&record.id);
        if !record.description.is_empty() {
            out.push(' ');
            out.push_str(&record.description);
        }
        out.push('\n');
        let bytes = record.sequence.as_bytes();
        for chunk in bytes.chunks(WRAP) {
            out.push_str(std::str::from_utf8(chunk).expect("sequence is ASCII"));
            out.push('\n');
        }
    }
    out
}
