//! Minimal FASTA reading and writing (single-line or wrapped sequences).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub seq: Vec<u8>,
}

pub fn parse(text: &str) -> Result<Vec<Record>> {
    let mut records: Vec<Record> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            records.push(Record { id, seq: Vec::new() });
        } else {
            let rec = records
                .last_mut()
                .ok_or_else(|| Error::Fasta(format!("line {}: sequence before first header", n + 1)))?;
            rec.seq.extend(line.bytes().filter(|b| !b.is_ascii_whitespace()).map(|b| b.to_ascii_uppercase()));
        }
    }
    Ok(records)
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    parse(&fs::read_to_string(path)?)
}

pub fn write_to<W: Write>(mut w: W, records: impl IntoIterator<Item = (String, Vec<u8>)>) -> Result<()> {
    for (id, seq) in records {
        writeln!(w, ">{id}")?;
        w.write_all(&seq)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write(path: impl AsRef<Path>, records: impl IntoIterator<Item = (String, Vec<u8>)>) -> Result<()> {
    write_to(BufWriter::new(fs::File::create(path)?), records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_wrapped() {
        let recs = parse(">a desc\nACG\nTT\n\n>b\nacgt\n").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0], Record { id: "a".into(), seq: b"ACGTT".to_vec() });
        assert_eq!(recs[1].seq, b"ACGT");
        assert!(parse("ACGT\n").is_err());
    }

    #[test]
    fn write_then_parse() {
        let mut buf = Vec::new();
        write_to(&mut buf, vec![("0_1".to_string(), b"ATCG".to_vec())]).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), ">0_1\nATCG\n");
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap()[0].id, "0_1");
    }
}
