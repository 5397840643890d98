//! Bit-exact checkpoint serialization.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! magic            8 bytes  "AFFECKPT"
//! version          u32      currently 1
//! modality count   u32
//!   per modality:  dim u32
//! fused_dim        u32
//! rnn_layers       u32
//! bidirectional    u8       0 or 1
//! head_hidden      u32
//! seed             u64
//!   per modality:  name len u32, name bytes (UTF-8),
//!                  mean f64 * dim, std f64 * dim
//! param count      u64
//! params           f64 * count, in the model's arena order
//! ```
//!
//! Decoding rejects wrong magic, unknown versions, any truncation or
//! trailing bytes, and parameter counts that disagree with the config.

use super::{Model, ModelConfig, NnError};
use crate::seqdata::{ModalityStats, NormStats};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"AFFECKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointError {
    BadMagic,
    UnsupportedVersion { found: u32 },
    CorruptPayload { detail: String },
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::BadMagic => write!(f, "not a checkpoint file (bad magic)"),
            CheckpointError::UnsupportedVersion { found } => {
                write!(
                    f,
                    "unsupported checkpoint version {found} (this build reads {CHECKPOINT_VERSION})"
                )
            }
            CheckpointError::CorruptPayload { detail } => {
                write!(f, "corrupt checkpoint payload: {detail}")
            }
        }
    }
}

impl core::error::Error for CheckpointError {}

impl From<NnError> for CheckpointError {
    fn from(e: NnError) -> Self {
        CheckpointError::CorruptPayload {
            detail: alloc::string::ToString::to_string(&e),
        }
    }
}

/// Serializes a model and its normalization statistics.
///
/// The stats must describe the same modality layout the model was built
/// for; that invariant is established by the training pipeline.
pub fn encode_checkpoint(model: &Model, stats: &NormStats) -> Vec<u8> {
    let cfg = model.config();
    debug_assert_eq!(stats.modalities().len(), cfg.input_dims.len());
    let mut out = Vec::new();
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    push_u32(&mut out, CHECKPOINT_VERSION);
    push_u32(&mut out, cfg.input_dims.len() as u32);
    for dim in &cfg.input_dims {
        push_u32(&mut out, *dim as u32);
    }
    push_u32(&mut out, cfg.fused_dim as u32);
    push_u32(&mut out, cfg.rnn_layers as u32);
    out.push(cfg.bidirectional as u8);
    push_u32(&mut out, cfg.head_hidden as u32);
    out.extend_from_slice(&cfg.seed.to_le_bytes());
    for m in stats.modalities() {
        push_u32(&mut out, m.name.len() as u32);
        out.extend_from_slice(m.name.as_bytes());
        for v in &m.mean {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &m.std {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.extend_from_slice(&(model.params().len() as u64).to_le_bytes());
    for p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

/// Parses checkpoint bytes back into a model and its stats.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Model, NormStats), CheckpointError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(8)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion { found: version });
    }
    let n_modalities = r.u32()? as usize;
    let mut input_dims = Vec::with_capacity(n_modalities);
    for _ in 0..n_modalities {
        input_dims.push(r.u32()? as usize);
    }
    let fused_dim = r.u32()? as usize;
    let rnn_layers = r.u32()? as usize;
    let bidirectional = match r.take(1)?[0] {
        0 => false,
        1 => true,
        b => {
            return Err(CheckpointError::CorruptPayload {
                detail: format!("bad bidirectional flag {b}"),
            })
        }
    };
    let head_hidden = r.u32()? as usize;
    let seed = r.u64()?;

    let mut modalities = Vec::with_capacity(n_modalities);
    for (i, dim) in input_dims.iter().enumerate() {
        let name_len = r.u32()? as usize;
        let name = core::str::from_utf8(r.take(name_len)?)
            .map_err(|_| CheckpointError::CorruptPayload {
                detail: format!("modality {i} name is not UTF-8"),
            })?
            .into();
        let mut mean = Vec::with_capacity(*dim);
        for _ in 0..*dim {
            mean.push(r.f64()?);
        }
        let mut std = Vec::with_capacity(*dim);
        for _ in 0..*dim {
            std.push(r.f64()?);
        }
        modalities.push(ModalityStats { name, mean, std });
    }

    let param_count = r.u64()? as usize;
    // Length check before allocating anything sized by the file.
    if bytes.len() - r.pos != param_count * 8 {
        return Err(CheckpointError::CorruptPayload {
            detail: format!(
                "parameter block: header says {param_count} values, file has {} bytes",
                bytes.len() - r.pos
            ),
        });
    }
    let mut params = Vec::with_capacity(param_count);
    for _ in 0..param_count {
        params.push(r.f64()?);
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::CorruptPayload {
            detail: format!("{} trailing bytes", bytes.len() - r.pos),
        });
    }

    let config = ModelConfig {
        input_dims,
        fused_dim,
        rnn_layers,
        bidirectional,
        head_hidden,
        seed,
    };
    let model = Model::from_flat_params(config, params)?;
    Ok((model, NormStats::from_parts(modalities)))
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::CorruptPayload {
                detail: format!(
                    "truncated: wanted {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.buf.len()
                ),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
