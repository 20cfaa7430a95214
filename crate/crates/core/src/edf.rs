//! EDF1: a columnar event-log file format with selective column loading.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! header
//!   magic              4 bytes  "EDF1"
//!   version            u16      1
//!   row_count          u64
//!   column_count       u32
//!   directory          column_count entries:
//!     name_len         u16
//!     name             name_len bytes of UTF-8
//!     type_code        u8       0=str 1=int 2=float 3=timestamp 4=object
//!     compression_code u8       0=none 1=deflate
//!     offset           u64      absolute file position of the block
//!     compressed_len   u64      stored block length
//!     uncompressed_len u64      block length before compression
//!   case_ordinal       u32
//!   activity_ordinal   u32
//! column blocks, in directory order, back to back
//! ```
//!
//! A block (before compression) is a presence bitmap of `ceil(rows / 8)`
//! bytes, bit `b` of byte `k` set when row `8k + b` has a value, followed
//! by the present values in row order: int and timestamp as 8-byte
//! two's-complement, float as 8-byte IEEE-754, str as a u32 byte length
//! plus UTF-8 bytes, object as a one-byte type code plus that encoding.
//! Compressed blocks are raw deflate streams. The dataframe index is not
//! stored; files read back with index `0..row_count`.

use std::collections::HashSet;
use std::io::{self, Cursor, Read, Seek, SeekFrom, Write};
use std::sync::Arc;

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use ordered_float::NotNan;

use crate::column::Column;
use crate::dataframe::Dataframe;
use crate::error::{Error, Result};
use crate::eventlog::{ingest_csv, CsvOptions};
use crate::value::{timestamp_in_range, AttrValue, ColumnType};

pub const MAGIC: [u8; 4] = *b"EDF1";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compression {
    None,
    Deflate,
}

impl Compression {
    pub fn code(self) -> u8 {
        match self {
            Compression::None => 0,
            Compression::Deflate => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Compression::None),
            1 => Some(Compression::Deflate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdfColumnMeta {
    pub name: String,
    pub column_type: ColumnType,
    pub compression: Compression,
    pub offset: u64,
    pub compressed_length: u64,
    pub uncompressed_length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdfHeader {
    pub version: u16,
    pub row_count: u64,
    pub directory: Vec<EdfColumnMeta>,
    pub case_column_ordinal: u32,
    pub activity_column_ordinal: u32,
}

impl EdfHeader {
    /// Encoded size of the header in bytes.
    pub fn encoded_len(&self) -> u64 {
        header_len(self.directory.iter().map(|m| m.name.len()))
    }

    pub fn column(&self, name: &str) -> Option<&EdfColumnMeta> {
        self.directory.iter().find(|m| m.name == name)
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&self.row_count.to_le_bytes());
        out.extend_from_slice(&(self.directory.len() as u32).to_le_bytes());
        for m in &self.directory {
            out.extend_from_slice(&(m.name.len() as u16).to_le_bytes());
            out.extend_from_slice(m.name.as_bytes());
            out.push(m.column_type.code());
            out.push(m.compression.code());
            out.extend_from_slice(&m.offset.to_le_bytes());
            out.extend_from_slice(&m.compressed_length.to_le_bytes());
            out.extend_from_slice(&m.uncompressed_length.to_le_bytes());
        }
        out.extend_from_slice(&self.case_column_ordinal.to_le_bytes());
        out.extend_from_slice(&self.activity_column_ordinal.to_le_bytes());
    }
}

const FIXED_HEADER_BYTES: u64 = 4 + 2 + 8 + 4 + 4 + 4;
const DIRECTORY_ENTRY_BYTES: u64 = 2 + 1 + 1 + 8 + 8 + 8;

fn header_len(name_lens: impl Iterator<Item = usize>) -> u64 {
    FIXED_HEADER_BYTES + name_lens.map(|n| DIRECTORY_ENTRY_BYTES + n as u64).sum::<u64>()
}

/// Serializes `df` into `sink`; returns the number of bytes written.
pub fn write_edf<W: Write>(df: &Dataframe, compression: Compression, mut sink: W) -> Result<u64> {
    let mut blocks = Vec::with_capacity(df.column_count());
    for (name, col) in df.columns() {
        if name.len() > u16::MAX as usize {
            return Err(Error::CorruptDirectory(format!("column name longer than {} bytes", u16::MAX)));
        }
        let raw = encode_column(col);
        let stored = match compression {
            Compression::None => raw.clone(),
            Compression::Deflate => deflate(&raw)?,
        };
        blocks.push((name, col.kind(), raw.len() as u64, stored));
    }

    let names: Vec<&str> = df.column_names().collect();
    let ordinal = |n: &str| names.iter().position(|&m| m == n).expect("designated column present") as u32;
    let mut offset = header_len(names.iter().map(|n| n.len()));
    let mut directory = Vec::with_capacity(blocks.len());
    for (name, kind, raw_len, stored) in &blocks {
        directory.push(EdfColumnMeta {
            name: name.to_string(),
            column_type: *kind,
            compression,
            offset,
            compressed_length: stored.len() as u64,
            uncompressed_length: *raw_len,
        });
        offset += stored.len() as u64;
    }
    let header = EdfHeader {
        version: VERSION,
        row_count: df.row_count() as u64,
        directory,
        case_column_ordinal: ordinal(df.case_column()),
        activity_column_ordinal: ordinal(df.activity_column()),
    };

    let mut head = Vec::with_capacity(header.encoded_len() as usize);
    header.encode(&mut head);
    sink.write_all(&head)?;
    for (_, _, _, stored) in &blocks {
        sink.write_all(stored)?;
    }
    sink.flush()?;
    Ok(offset)
}

pub fn to_edf_bytes(df: &Dataframe, compression: Compression) -> Vec<u8> {
    let mut out = Vec::new();
    write_edf(df, compression, &mut out).expect("writing to a Vec cannot fail");
    out
}

fn deflate(raw: &[u8]) -> io::Result<Vec<u8>> {
    let mut enc = DeflateEncoder::new(Vec::with_capacity(raw.len() / 4 + 16), flate2::Compression::default());
    enc.write_all(raw)?;
    enc.finish()
}

fn encode_column(col: &Column) -> Vec<u8> {
    let rows = col.len();
    let mut out = vec![0u8; rows.div_ceil(8)];
    for pos in 0..rows {
        if !col.is_missing_at(pos) {
            out[pos / 8] |= 1 << (pos % 8);
        }
    }
    match col {
        Column::Int(v) | Column::Timestamp(v) => {
            out.reserve(8 * v.len());
            for x in v.iter().flatten() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        Column::Float(v) => {
            for x in v.iter().flatten() {
                out.extend_from_slice(&x.into_inner().to_le_bytes());
            }
        }
        Column::Str(v) => {
            for s in v.iter().flatten() {
                put_str(&mut out, s);
            }
        }
        Column::Object(v) => {
            for x in v {
                match x {
                    AttrValue::Missing => {}
                    AttrValue::Str(s) => {
                        out.push(ColumnType::Str.code());
                        put_str(&mut out, s);
                    }
                    AttrValue::Int(i) => {
                        out.push(ColumnType::Int.code());
                        out.extend_from_slice(&i.to_le_bytes());
                    }
                    AttrValue::Float(f) => {
                        out.push(ColumnType::Float.code());
                        out.extend_from_slice(&f.into_inner().to_le_bytes());
                    }
                    AttrValue::Timestamp(t) => {
                        out.push(ColumnType::Timestamp.code());
                        out.extend_from_slice(&t.to_le_bytes());
                    }
                }
            }
        }
    }
    out
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

/// Reader over an EDF1 source. The header is parsed on open; column blocks
/// are only read when requested.
#[derive(Debug)]
pub struct EdfReader<R> {
    source: R,
    header: EdfHeader,
    bytes_decompressed: u64,
}

impl<R: Read + Seek> EdfReader<R> {
    pub fn open(mut source: R) -> Result<Self> {
        let file_len = source.seek(SeekFrom::End(0))?;
        source.seek(SeekFrom::Start(0))?;
        let header = parse_header(&mut source)?;
        validate_header(&header, file_len)?;
        Ok(EdfReader {
            source,
            header,
            bytes_decompressed: 0,
        })
    }

    pub fn header(&self) -> &EdfHeader {
        &self.header
    }

    /// Stored bytes fed through block decoding so far.
    pub fn bytes_decompressed(&self) -> u64 {
        self.bytes_decompressed
    }

    /// Decodes the requested columns (all when `None`). The case and activity
    /// columns are always included; columns keep their file order.
    pub fn read(&mut self, columns: Option<&[&str]>) -> Result<Dataframe> {
        let h = &self.header;
        let case = h.directory[h.case_column_ordinal as usize].name.clone();
        let activity = h.directory[h.activity_column_ordinal as usize].name.clone();
        let wanted: Option<HashSet<&str>> = match columns {
            None => None,
            Some(names) => {
                for n in names {
                    if h.column(n).is_none() {
                        return Err(Error::UnknownAttribute(n.to_string()));
                    }
                }
                Some(names.iter().copied().chain([case.as_str(), activity.as_str()]).collect())
            }
        };
        let chosen: Vec<EdfColumnMeta> = h
            .directory
            .iter()
            .filter(|m| wanted.as_ref().is_none_or(|w| w.contains(m.name.as_str())))
            .cloned()
            .collect();

        let rows = usize::try_from(h.row_count)
            .map_err(|_| Error::CorruptDirectory("row count exceeds address space".into()))?;
        let mut decoded = Vec::with_capacity(chosen.len());
        for meta in chosen {
            self.source.seek(SeekFrom::Start(meta.offset))?;
            let mut stored = vec![0u8; meta.compressed_length as usize];
            self.source.read_exact(&mut stored).map_err(short_read)?;
            self.bytes_decompressed += meta.compressed_length;
            let raw = match meta.compression {
                Compression::None => stored,
                Compression::Deflate => {
                    let mut raw = Vec::with_capacity(meta.uncompressed_length as usize);
                    DeflateDecoder::new(stored.as_slice())
                        .read_to_end(&mut raw)
                        .map_err(|e| corrupt(&meta.name, e.to_string()))?;
                    raw
                }
            };
            if raw.len() as u64 != meta.uncompressed_length {
                return Err(corrupt(
                    &meta.name,
                    format!("block is {} bytes, directory says {}", raw.len(), meta.uncompressed_length),
                ));
            }
            let col = decode_column(&raw, meta.column_type, rows, &meta.name)?;
            decoded.push((meta.name, col));
        }
        Dataframe::from_columns((0..rows as i64).collect(), decoded, &case, &activity)
    }
}

/// Reads an EDF1 source, decoding only the requested columns.
pub fn read_edf<R: Read + Seek>(source: R, columns: Option<&[&str]>) -> Result<Dataframe> {
    EdfReader::open(source)?.read(columns)
}

pub fn read_edf_bytes(bytes: &[u8], columns: Option<&[&str]>) -> Result<Dataframe> {
    read_edf(Cursor::new(bytes), columns)
}

/// Ingests CSV and serializes it as EDF1.
pub fn csv_to_edf<R: Read>(source: R, opts: &CsvOptions, compression: Compression) -> Result<Vec<u8>> {
    let df = ingest_csv(source, opts)?;
    Ok(to_edf_bytes(&df, compression))
}

fn corrupt(column: &str, detail: impl Into<String>) -> Error {
    Error::CorruptBlock {
        column: column.to_string(),
        detail: detail.into(),
    }
}

fn short_read(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::CorruptDirectory("file truncated".into())
    } else {
        Error::Io(e)
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(short_read)?;
    Ok(buf)
}

fn parse_header<R: Read>(r: &mut R) -> Result<EdfHeader> {
    let mut magic = [0u8; 4];
    match r.read_exact(&mut magic) {
        Ok(()) if magic == MAGIC => {}
        Ok(()) => return Err(Error::BadMagic),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Err(Error::BadMagic),
        Err(e) => return Err(e.into()),
    }
    let version = u16::from_le_bytes(read_array(r)?);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let row_count = u64::from_le_bytes(read_array(r)?);
    let column_count = u32::from_le_bytes(read_array(r)?);
    let mut directory = Vec::new();
    for _ in 0..column_count {
        let name_len = u16::from_le_bytes(read_array(r)?) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name).map_err(short_read)?;
        let name = String::from_utf8(name)
            .map_err(|_| Error::CorruptDirectory("column name is not UTF-8".into()))?;
        let [type_code] = read_array(r)?;
        let column_type = ColumnType::from_code(type_code)
            .ok_or_else(|| Error::CorruptDirectory(format!("unknown type code {type_code} for `{name}`")))?;
        let [comp_code] = read_array(r)?;
        let compression = Compression::from_code(comp_code).ok_or_else(|| {
            Error::CorruptDirectory(format!("unknown compression code {comp_code} for `{name}`"))
        })?;
        directory.push(EdfColumnMeta {
            name,
            column_type,
            compression,
            offset: u64::from_le_bytes(read_array(r)?),
            compressed_length: u64::from_le_bytes(read_array(r)?),
            uncompressed_length: u64::from_le_bytes(read_array(r)?),
        });
    }
    Ok(EdfHeader {
        version,
        row_count,
        directory,
        case_column_ordinal: u32::from_le_bytes(read_array(r)?),
        activity_column_ordinal: u32::from_le_bytes(read_array(r)?),
    })
}

fn validate_header(h: &EdfHeader, file_len: u64) -> Result<()> {
    let count = h.directory.len() as u32;
    if h.case_column_ordinal >= count || h.activity_column_ordinal >= count {
        return Err(Error::CorruptDirectory("designated column ordinal out of range".into()));
    }
    let mut names = HashSet::new();
    for m in &h.directory {
        if !names.insert(m.name.as_str()) {
            return Err(Error::CorruptDirectory(format!("duplicate column `{}`", m.name)));
        }
    }
    let header_end = h.encoded_len();
    let mut regions: Vec<(u64, u64, &str)> = Vec::with_capacity(h.directory.len());
    for m in &h.directory {
        let end = m
            .offset
            .checked_add(m.compressed_length)
            .filter(|&end| m.offset >= header_end && end <= file_len)
            .ok_or_else(|| {
                Error::CorruptDirectory(format!("block of `{}` lies outside the data region", m.name))
            })?;
        regions.push((m.offset, end, &m.name));
    }
    regions.sort_unstable();
    for pair in regions.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(Error::CorruptDirectory(format!(
                "blocks of `{}` and `{}` overlap",
                pair[0].2, pair[1].2
            )));
        }
    }
    Ok(())
}

struct BlockCursor<'a> {
    buf: &'a [u8],
    pos: usize,
    column: &'a str,
}

impl BlockCursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt(self.column, "block ends early"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn timestamp(&mut self) -> Result<i64> {
        let ms = self.i64()?;
        if timestamp_in_range(ms) {
            Ok(ms)
        } else {
            Err(corrupt(self.column, format!("timestamp {ms} out of range")))
        }
    }

    fn f64(&mut self) -> Result<NotNan<f64>> {
        let f = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        NotNan::new(f).map_err(|_| corrupt(self.column, "NaN float"))
    }

    fn str(&mut self) -> Result<Arc<str>> {
        let len = u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize;
        let column = self.column;
        let bytes = self.take(len)?;
        std::str::from_utf8(bytes)
            .map(Arc::from)
            .map_err(|_| corrupt(column, "string is not UTF-8"))
    }
}

fn decode_column(raw: &[u8], kind: ColumnType, rows: usize, name: &str) -> Result<Column> {
    let bitmap_len = rows.div_ceil(8);
    if raw.len() < bitmap_len {
        return Err(corrupt(name, "presence bitmap truncated"));
    }
    let (bitmap, _) = raw.split_at(bitmap_len);
    let present = |pos: usize| bitmap[pos / 8] & (1 << (pos % 8)) != 0;
    let mut cur = BlockCursor {
        buf: raw,
        pos: bitmap_len,
        column: name,
    };

    fn slots<T>(
        rows: usize,
        present: impl Fn(usize) -> bool,
        mut next: impl FnMut() -> Result<T>,
    ) -> Result<Vec<Option<T>>> {
        (0..rows)
            .map(|p| if present(p) { next().map(Some) } else { Ok(None) })
            .collect()
    }

    let col = match kind {
        ColumnType::Int => Column::Int(slots(rows, present, || cur.i64())?),
        ColumnType::Timestamp => Column::Timestamp(slots(rows, present, || cur.timestamp())?),
        ColumnType::Float => Column::Float(slots(rows, present, || cur.f64())?),
        ColumnType::Str => Column::Str(slots(rows, present, || cur.str())?),
        ColumnType::Object => Column::Object(
            slots(rows, present, || {
                let tag = cur.u8()?;
                match ColumnType::from_code(tag) {
                    Some(ColumnType::Str) => cur.str().map(AttrValue::Str),
                    Some(ColumnType::Int) => cur.i64().map(AttrValue::Int),
                    Some(ColumnType::Float) => cur.f64().map(AttrValue::Float),
                    Some(ColumnType::Timestamp) => cur.timestamp().map(AttrValue::Timestamp),
                    _ => Err(corrupt(name, format!("bad object tag {tag}"))),
                }
            })?
            .into_iter()
            .map(|v| v.unwrap_or(AttrValue::Missing))
            .collect(),
        ),
    };
    if cur.pos != raw.len() {
        return Err(corrupt(name, "trailing bytes after the last value"));
    }
    Ok(col)
}
