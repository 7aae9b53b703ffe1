//! HTF, a minimal binary tensor container.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size      field
//! 0       4         magic "HOTB"
//! 4       1         version, currently 1
//! 5       1         dtype: 0 = u8, 1 = f32
//! 6       1         rank, 1..=4
//! 7       1         reserved, must be 0
//! 8       4 * rank  dims, u32 each
//! ...     prod(dims) * dtype size   payload, row-major, last dim fastest
//! ```
//!
//! Files are parsed strictly: any deviation is rejected with a positional
//! diagnostic, and round-trips are bitwise exact for every payload
//! (including f32 NaN bit patterns).

use std::fs;
use std::path::Path;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"HOTB";
pub const VERSION: u8 = 1;
pub const MAX_RANK: usize = 4;

#[derive(Debug, Error)]
pub enum TensorIoError {
    #[error("bad magic {found:02X?}, expected {MAGIC:02X?} (\"HOTB\")")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported version {found}, expected {VERSION}")]
    BadVersion { found: u8 },
    #[error("unknown dtype code {found}")]
    BadDtype { found: u8 },
    #[error("rank {found} outside 1..={MAX_RANK}")]
    BadRank { found: u8 },
    #[error("reserved header byte is {found}, expected 0")]
    BadReserved { found: u8 },
    #[error("dimension product overflows for dims {dims:?}")]
    DimOverflow { dims: Vec<u32> },
    #[error("truncated header: need {expected} bytes, found {actual}")]
    TruncatedHeader { expected: usize, actual: usize },
    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("{extra} trailing bytes after the payload")]
    TrailingBytes { extra: usize },
    #[error("data length {actual} does not match dims product {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    U8,
    F32,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::U8 => 0,
            Dtype::F32 => 1,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::F32 => 4,
        }
    }

    fn from_code(code: u8) -> Result<Self, TensorIoError> {
        match code {
            0 => Ok(Dtype::U8),
            1 => Ok(Dtype::F32),
            found => Err(TensorIoError::BadDtype { found }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::U8(v) => v.len(),
            TensorData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A dense tensor with explicit dims and one of the two supported dtypes.
#[derive(Debug, Clone, PartialEq)]
pub struct HtfTensor {
    dims: Vec<u32>,
    data: TensorData,
}

fn element_count(dims: &[u32]) -> Result<usize, TensorIoError> {
    if dims.is_empty() || dims.len() > MAX_RANK {
        return Err(TensorIoError::BadRank { found: dims.len() as u8 });
    }
    let mut product: u128 = 1;
    for &d in dims {
        product *= d as u128;
    }
    if product > usize::MAX as u128 / 4 {
        return Err(TensorIoError::DimOverflow { dims: dims.to_vec() });
    }
    Ok(product as usize)
}

impl HtfTensor {
    pub fn from_u8(dims: Vec<u32>, data: Vec<u8>) -> Result<Self, TensorIoError> {
        let expected = element_count(&dims)?;
        if data.len() != expected {
            return Err(TensorIoError::LengthMismatch { expected, actual: data.len() });
        }
        Ok(Self { dims, data: TensorData::U8(data) })
    }

    pub fn from_f32(dims: Vec<u32>, data: Vec<f32>) -> Result<Self, TensorIoError> {
        let expected = element_count(&dims)?;
        if data.len() != expected {
            return Err(TensorIoError::LengthMismatch { expected, actual: data.len() });
        }
        Ok(Self { dims, data: TensorData::F32(data) })
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn dtype(&self) -> Dtype {
        match self.data {
            TensorData::U8(_) => Dtype::U8,
            TensorData::F32(_) => Dtype::F32,
        }
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn into_data(self) -> TensorData {
        self.data
    }

    /// Serialized byte image, header plus payload.
    pub fn to_bytes(&self) -> Vec<u8> {
        let dtype = self.dtype();
        let mut out =
            Vec::with_capacity(8 + 4 * self.dims.len() + self.data.len() * dtype.size());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(dtype.code());
        out.push(self.dims.len() as u8);
        out.push(0);
        for &d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        match &self.data {
            TensorData::U8(v) => out.extend_from_slice(v),
            TensorData::F32(v) => {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TensorIoError> {
        if bytes.len() < 8 {
            return Err(TensorIoError::TruncatedHeader { expected: 8, actual: bytes.len() });
        }
        let mut found = [0u8; 4];
        found.copy_from_slice(&bytes[0..4]);
        if found != MAGIC {
            return Err(TensorIoError::BadMagic { found });
        }
        if bytes[4] != VERSION {
            return Err(TensorIoError::BadVersion { found: bytes[4] });
        }
        let dtype = Dtype::from_code(bytes[5])?;
        let rank = bytes[6] as usize;
        if rank == 0 || rank > MAX_RANK {
            return Err(TensorIoError::BadRank { found: bytes[6] });
        }
        if bytes[7] != 0 {
            return Err(TensorIoError::BadReserved { found: bytes[7] });
        }
        let header_len = 8 + 4 * rank;
        if bytes.len() < header_len {
            return Err(TensorIoError::TruncatedHeader {
                expected: header_len,
                actual: bytes.len(),
            });
        }
        let mut dims = Vec::with_capacity(rank);
        for i in 0..rank {
            let off = 8 + 4 * i;
            dims.push(u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()));
        }
        let count = element_count(&dims)?;
        let payload_len = count * dtype.size();
        let expected = header_len + payload_len;
        if bytes.len() < expected {
            return Err(TensorIoError::TruncatedPayload {
                expected: payload_len,
                actual: bytes.len() - header_len,
            });
        }
        if bytes.len() > expected {
            return Err(TensorIoError::TrailingBytes { extra: bytes.len() - expected });
        }
        let payload = &bytes[header_len..];
        let data = match dtype {
            Dtype::U8 => TensorData::U8(payload.to_vec()),
            Dtype::F32 => {
                let mut v = Vec::with_capacity(count);
                for chunk in payload.chunks_exact(4) {
                    v.push(f32::from_le_bytes(chunk.try_into().unwrap()));
                }
                TensorData::F32(v)
            }
        };
        Ok(Self { dims, data })
    }
}

pub fn write_htf(tensor: &HtfTensor, path: &Path) -> Result<(), TensorIoError> {
    fs::write(path, tensor.to_bytes())?;
    Ok(())
}

pub fn read_htf(path: &Path) -> Result<HtfTensor, TensorIoError> {
    HtfTensor::from_bytes(&fs::read(path)?)
}
