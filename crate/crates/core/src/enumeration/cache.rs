//! Line-oriented text cache for [`ProgramTable`]s.
//!
//! ```text
//! AITLAB-TABLE 1
//! isa=1 L=<int> T=<int> cond=<bits or ->
//! <output or -> <min_len> <mass numerator> <witness>     (sorted by output)
//! TOTAL <total numerator>
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{DyadicMass, EnumParams, InvariantViolation, OutputRecord, ProgramTable, ISA_VERSION};
use crate::bits::BitString;

const MAGIC: &str = "AITLAB-TABLE";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unsupported table format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("table was built for ISA version {found}, this build implements {ISA_VERSION}")]
    IsaMismatch { found: u32 },
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

fn format_err(line: usize, message: impl Into<String>) -> TableError {
    TableError::Format {
        line,
        message: message.into(),
    }
}

/// Writes the canonical text form of `table`.
pub fn write_table<W: Write>(table: &ProgramTable, mut w: W) -> io::Result<()> {
    let p = table.params();
    writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(
        w,
        "isa={} L={} T={} cond={}",
        p.isa_version,
        p.max_len,
        p.step_budget,
        p.condition.to_dash_string()
    )?;
    for r in table.records() {
        writeln!(
            w,
            "{} {} {} {}",
            r.output.to_dash_string(),
            r.min_len,
            r.mass.numerator,
            r.witness
        )?;
    }
    writeln!(w, "TOTAL {}", table.total_mass().numerator)?;
    w.flush()
}

pub fn save(table: &ProgramTable, path: impl AsRef<Path>) -> io::Result<()> {
    let file = fs::File::create(path)?;
    write_table(table, BufWriter::new(file))
}

fn parse_num<T: std::str::FromStr>(line: usize, field: &str, value: &str) -> Result<T, TableError> {
    value
        .parse()
        .map_err(|_| format_err(line, format!("{field}: cannot parse {value:?}")))
}

fn parse_bits(line: usize, field: &str, value: &str) -> Result<BitString, TableError> {
    BitString::parse_dash(value).map_err(|e| format_err(line, format!("{field}: {e}")))
}

fn parse_params(line: usize, text: &str) -> Result<EnumParams, TableError> {
    let mut isa = None;
    let mut max_len = None;
    let mut budget = None;
    let mut cond = None;
    for field in text.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format_err(line, format!("expected key=value, got {field:?}")))?;
        match key {
            "isa" => isa = Some(parse_num::<u32>(line, key, value)?),
            "L" => max_len = Some(parse_num::<u32>(line, key, value)?),
            "T" => budget = Some(parse_num::<u64>(line, key, value)?),
            "cond" => cond = Some(parse_bits(line, key, value)?),
            _ => return Err(format_err(line, format!("unknown parameter {key:?}"))),
        }
    }
    let missing = |k: &str| format_err(line, format!("missing parameter {k}"));
    let isa = isa.ok_or_else(|| missing("isa"))?;
    if isa != ISA_VERSION {
        return Err(TableError::IsaMismatch { found: isa });
    }
    let params = EnumParams {
        max_len: max_len.ok_or_else(|| missing("L"))?,
        step_budget: budget.ok_or_else(|| missing("T"))?,
        condition: cond.ok_or_else(|| missing("cond"))?,
        isa_version: isa,
    };
    params
        .validate()
        .map_err(|e| format_err(line, e.to_string()))?;
    Ok(params)
}

/// Parses a table without checking its invariants.
pub fn read_table<R: Read>(r: R) -> Result<ProgramTable, TableError> {
    let mut lines = BufReader::new(r)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String), TableError> {
        match lines.next() {
            Some((n, l)) => Ok((n, l?)),
            None => Err(format_err(
                0,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    };

    let (n, header) = next("header")?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| format_err(n, format!("expected `{MAGIC} <version>`")))?;
    let version: u32 = parse_num(n, "version", version)?;
    if version != FORMAT_VERSION {
        return Err(TableError::Version(version));
    }

    let (n, param_line) = next("parameter line")?;
    let params = parse_params(n, &param_line)?;
    let scale = params.max_len;

    let mut records = BTreeMap::new();
    let mut last: Option<BitString> = None;
    loop {
        let (n, line) = next("record or TOTAL line")?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if let ["TOTAL", total] = fields.as_slice() {
            let total: u64 = parse_num(n, "TOTAL", total)?;
            if let Ok((extra, _)) = next("") {
                return Err(format_err(extra, "content after TOTAL line"));
            }
            return Ok(ProgramTable::from_parts(
                params,
                records,
                DyadicMass::new(total, scale),
            ));
        }
        let [output, min_len, numerator, witness] = fields.as_slice() else {
            return Err(format_err(
                n,
                "expected `<output> <min_len> <mass_numerator> <witness>`",
            ));
        };
        let output = parse_bits(n, "output", output)?;
        if last.as_ref().is_some_and(|prev| prev >= &output) {
            return Err(format_err(n, "records are not strictly sorted by output"));
        }
        let record = OutputRecord {
            output: output.clone(),
            min_len: parse_num(n, "min_len", min_len)?,
            mass: DyadicMass::new(parse_num(n, "mass", numerator)?, scale),
            witness: parse_bits(n, "witness", witness)?,
            program_count: None,
        };
        last = Some(output.clone());
        records.insert(output, record);
    }
}

/// Reads a table and verifies Kraft, the TOTAL checksum and every witness.
pub fn load(path: impl AsRef<Path>) -> Result<ProgramTable, TableError> {
    let table = load_unchecked(path)?;
    table.verify()?;
    Ok(table)
}

pub fn load_unchecked(path: impl AsRef<Path>) -> Result<ProgramTable, TableError> {
    read_table(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate;

    fn table6_text() -> String {
        let t = enumerate(&EnumParams::unconditional(6, 100).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn parse_and_verify(text: &str) -> Result<ProgramTable, TableError> {
        let t = read_table(text.as_bytes())?;
        t.verify()?;
        Ok(t)
    }

    #[test]
    fn canonical_text() {
        assert_eq!(
            table6_text(),
            "AITLAB-TABLE 1\nisa=1 L=6 T=100 cond=-\n- 3 11 000\n0 6 2 001000\nTOTAL 13\n"
        );
    }

    #[test]
    fn roundtrip_through_file() {
        let t =
            enumerate(&EnumParams::new(9, 50, BitString::parse("01").unwrap()).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tbl");
        save(&t, &path).unwrap();
        assert_eq!(load(&path).unwrap(), t.without_counts());
    }

    #[test]
    fn kraft_violation_is_named() {
        let text = table6_text().replace("TOTAL 13", "TOTAL 65");
        let err = parse_and_verify(&text).unwrap_err();
        assert!(matches!(
            err,
            TableError::Invariant(InvariantViolation::Kraft { .. })
        ));
        assert!(err.to_string().contains("Kraft"));

        let text = table6_text().replace("- 3 11 000", "- 3 99 000");
        assert!(matches!(
            parse_and_verify(&text),
            Err(TableError::Invariant(InvariantViolation::Kraft { .. }))
        ));
    }

    #[test]
    fn bad_witness_is_named() {
        let text = table6_text().replace("0 6 2 001000", "0 6 2 010000");
        let err = parse_and_verify(&text).unwrap_err();
        assert!(matches!(
            err,
            TableError::Invariant(InvariantViolation::Witness { .. })
        ));
        assert!(err.to_string().contains("witness"));
    }

    #[test]
    fn checksum_mismatch() {
        let text = table6_text().replace("TOTAL 13", "TOTAL 12");
        assert!(matches!(
            parse_and_verify(&text),
            Err(TableError::Invariant(
                InvariantViolation::TotalMismatch { .. }
            ))
        ));
    }

    #[test]
    fn header_and_format_errors() {
        let text = table6_text().replace("isa=1", "isa=2");
        assert!(matches!(
            read_table(text.as_bytes()),
            Err(TableError::IsaMismatch { found: 2 })
        ));
        let text = table6_text().replace("AITLAB-TABLE 1", "AITLAB-TABLE 7");
        assert!(matches!(
            read_table(text.as_bytes()),
            Err(TableError::Version(7))
        ));
        let text = table6_text().replace("L=6", "L=5");
        assert!(matches!(
            read_table(text.as_bytes()),
            Err(TableError::Format { line: 2, .. })
        ));
        let text = table6_text().replace("0 6 2 001000\n", "");
        let text = text.replace("- 3 11 000\n", "0 6 2 001000\n- 3 11 000\n");
        assert!(matches!(
            read_table(text.as_bytes()),
            Err(TableError::Format { line: 4, .. })
        ));
        let text = table6_text().replace("TOTAL 13\n", "");
        assert!(read_table(text.as_bytes()).is_err());
    }
}
