//! `ALTPROB1` binary layout, version 1, little-endian:
//!
//! ```text
//! header : magic "ALTPROB1" (8 bytes) | u32 version=1 | u32 L | u32 d
//!          | u16 model_id_len | model_id (UTF-8) | u64 record_count
//! record : u16 id_len | sentence_id (UTF-8) | u32 T | u32 span_start | u32 span_end
//!          | T bytes content_mask (0/1) | L*T*d f32 (layer, token, dim)
//! ```
//!
//! A JSON sidecar `<store>.meta.json` repeats the header.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{SentenceEmbeddings, StoreError, StoreHeader};

pub const MAGIC: [u8; 8] = *b"ALTPROB1";
pub const VERSION: u32 = 1;

/// Bytes before the first record.
pub fn header_len(model_id: &str) -> u64 {
    8 + 4 + 4 + 4 + 2 + model_id.len() as u64 + 8
}

/// Bytes taken by one record.
pub fn record_len(id: &str, layers: usize, tokens: usize, dim: usize) -> u64 {
    2 + id.len() as u64 + 4 + 4 + 4 + tokens as u64 + 4 * (layers * tokens * dim) as u64
}

pub fn sidecar_path(store: &Path) -> PathBuf {
    let mut s = store.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    format: &'static str,
    version: u32,
    model_id: &'a str,
    num_layers: usize,
    hidden_dim: usize,
    record_count: u64,
    endianness: &'static str,
    scalar: &'static str,
}

/// Streaming writer. The record count is patched into the header on
/// [`StoreWriter::finish`].
pub struct StoreWriter {
    out: BufWriter<File>,
    path: PathBuf,
    header: StoreHeader,
    count: u64,
    count_offset: u64,
}

impl StoreWriter {
    pub fn create(path: impl AsRef<Path>, header: StoreHeader) -> Result<StoreWriter, StoreError> {
        header.validate()?;
        let path = path.as_ref().to_path_buf();
        let mut out = BufWriter::new(File::create(&path)?);
        out.write_all(&MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(header.num_layers as u32).to_le_bytes())?;
        out.write_all(&(header.hidden_dim as u32).to_le_bytes())?;
        out.write_all(&(header.model_id.len() as u16).to_le_bytes())?;
        out.write_all(header.model_id.as_bytes())?;
        let count_offset = header_len(&header.model_id) - 8;
        out.write_all(&0u64.to_le_bytes())?;
        Ok(StoreWriter { out, path, header, count: 0, count_offset })
    }

    pub fn push(&mut self, record: &SentenceEmbeddings) -> Result<(), StoreError> {
        record.validate(&self.header)?;
        let w = &mut self.out;
        w.write_all(&(record.sentence_id.len() as u16).to_le_bytes())?;
        w.write_all(record.sentence_id.as_bytes())?;
        w.write_all(&(record.token_count as u32).to_le_bytes())?;
        w.write_all(&(record.verb_span.0 as u32).to_le_bytes())?;
        w.write_all(&(record.verb_span.1 as u32).to_le_bytes())?;
        let mask: Vec<u8> = record.content_mask.iter().map(|m| u8::from(*m)).collect();
        w.write_all(&mask)?;
        let mut buf = Vec::with_capacity(record.data.len() * 4);
        for x in &record.data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
        self.count += 1;
        Ok(())
    }

    /// Patch the record count, flush, and write the sidecar. Returns the
    /// number of records written.
    pub fn finish(self) -> Result<u64, StoreError> {
        let StoreWriter { out, path, header, count, count_offset } = self;
        let mut file = out.into_inner().map_err(|e| e.into_error())?;
        file.seek(SeekFrom::Start(count_offset))?;
        file.write_all(&count.to_le_bytes())?;
        file.sync_all()?;
        let meta = Sidecar {
            format: "ALTPROB1",
            version: VERSION,
            model_id: &header.model_id,
            num_layers: header.num_layers,
            hidden_dim: header.hidden_dim,
            record_count: count,
            endianness: "little",
            scalar: "f32",
        };
        let mut json = serde_json::to_string_pretty(&meta)?;
        json.push('\n');
        std::fs::write(sidecar_path(&path), json)?;
        Ok(count)
    }
}

/// Write `records` to `path` (plus sidecar).
pub fn write_store<'a>(
    header: &StoreHeader,
    records: impl IntoIterator<Item = &'a SentenceEmbeddings>,
    path: impl AsRef<Path>,
) -> Result<(), StoreError> {
    let mut w = StoreWriter::create(path, header.clone())?;
    for r in records {
        w.push(r)?;
    }
    w.finish()?;
    Ok(())
}

/// Streaming reader over the records of a store.
pub struct StoreReader<R> {
    input: R,
    header: StoreHeader,
    record_count: u64,
    next: u64,
    failed: bool,
}

/// Open a store file: header plus a record iterator.
pub fn read_store(
    path: impl AsRef<Path>,
) -> Result<(StoreHeader, StoreReader<BufReader<File>>), StoreError> {
    let reader = StoreReader::new(BufReader::new(File::open(path)?))?;
    Ok((reader.header().clone(), reader))
}

fn read_array<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

impl<R: Read> StoreReader<R> {
    pub fn new(mut input: R) -> Result<StoreReader<R>, StoreError> {
        let magic: [u8; 8] = read_array(&mut input).map_err(|_| StoreError::BadMagic([0; 8]))?;
        if magic != MAGIC {
            return Err(StoreError::BadMagic(magic));
        }
        let version = u32::from_le_bytes(read_array(&mut input)?);
        if version != VERSION {
            return Err(StoreError::UnsupportedVersion(version));
        }
        let num_layers = u32::from_le_bytes(read_array(&mut input)?) as usize;
        let hidden_dim = u32::from_le_bytes(read_array(&mut input)?) as usize;
        let id_len = u16::from_le_bytes(read_array(&mut input)?) as usize;
        let mut id = vec![0u8; id_len];
        input.read_exact(&mut id)?;
        let model_id = String::from_utf8(id)
            .map_err(|_| StoreError::DimMismatch("model id is not UTF-8".into()))?;
        let record_count = u64::from_le_bytes(read_array(&mut input)?);
        let header = StoreHeader { model_id, num_layers, hidden_dim };
        header.validate()?;
        Ok(StoreReader { input, header, record_count, next: 0, failed: false })
    }

    pub fn header(&self) -> &StoreHeader {
        &self.header
    }

    pub fn record_count(&self) -> u64 {
        self.record_count
    }

    fn read_record(&mut self) -> Result<SentenceEmbeddings, StoreError> {
        let index = self.next;
        let truncated = |e: io::Error| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                StoreError::TruncatedRecord { index }
            } else {
                StoreError::Io(e)
            }
        };
        let r = &mut self.input;
        let id_len = u16::from_le_bytes(read_array(r).map_err(truncated)?) as usize;
        let mut id = vec![0u8; id_len];
        r.read_exact(&mut id).map_err(truncated)?;
        let sentence_id = String::from_utf8(id)
            .map_err(|_| StoreError::DimMismatch(format!("record {index}: id is not UTF-8")))?;
        let token_count = u32::from_le_bytes(read_array(r).map_err(truncated)?) as usize;
        let start = u32::from_le_bytes(read_array(r).map_err(truncated)?) as usize;
        let end = u32::from_le_bytes(read_array(r).map_err(truncated)?) as usize;
        let mut mask = vec![0u8; token_count];
        r.read_exact(&mut mask).map_err(truncated)?;
        if mask.iter().any(|m| *m > 1) {
            return Err(StoreError::DimMismatch(format!("{sentence_id}: mask byte not 0/1")));
        }
        let (l, d) = (self.header.num_layers, self.header.hidden_dim);
        let mut raw = vec![0u8; 4 * l * token_count * d];
        r.read_exact(&mut raw).map_err(truncated)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let record = SentenceEmbeddings {
            sentence_id,
            num_layers: l,
            hidden_dim: d,
            token_count,
            verb_span: (start, end),
            content_mask: mask.into_iter().map(|m| m == 1).collect(),
            data,
        };
        record.validate(&self.header)?;
        Ok(record)
    }
}

impl<R: Read> Iterator for StoreReader<R> {
    type Item = Result<SentenceEmbeddings, StoreError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if self.next == self.record_count {
            // the declared count is authoritative; anything after it is corruption
            let mut probe = [0u8; 1];
            return match self.input.read(&mut probe) {
                Ok(0) => None,
                Ok(_) => {
                    self.failed = true;
                    Some(Err(StoreError::TrailingData { records: self.record_count }))
                }
                Err(e) => {
                    self.failed = true;
                    Some(Err(e.into()))
                }
            };
        }
        let item = self.read_record();
        self.next += 1;
        if item.is_err() {
            self.failed = true;
        }
        Some(item)
    }
}
