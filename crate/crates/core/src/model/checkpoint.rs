//! Little-endian binary checkpoints.
//!
//! ```text
//! magic "TRANSBOX" | u32 version | u64 n, N_C, N_R, N_I
//! names: (u32 byte length, UTF-8) for concepts, then roles, then individuals
//! f64 × n(2N_C + 2N_R + N_I) in the model's flat layout
//! metadata: u64 epoch | f64 loss | u64 seed | (u32 length, UTF-8) config digest
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use indexmap::IndexSet;
use thiserror::Error;

use super::{parameter_count, EmbeddingModel};

const MAGIC: &[u8; 8] = b"TRANSBOX";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingMetadata {
    pub epoch: u64,
    pub loss: f64,
    pub seed: u64,
    pub config_digest: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: EmbeddingModel,
    pub metadata: TrainingMetadata,
}

fn put_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn get<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn get_u32(r: &mut impl Read) -> io::Result<u32> {
    get::<4>(r).map(u32::from_le_bytes)
}

fn get_u64(r: &mut impl Read) -> io::Result<u64> {
    get::<8>(r).map(u64::from_le_bytes)
}

fn get_str(r: &mut impl Read) -> Result<String, CheckpointError> {
    let len = get_u32(r)? as usize;
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(CheckpointError::Corrupt("truncated string".into()));
    }
    String::from_utf8(buf).map_err(|e| CheckpointError::Corrupt(e.to_string()))
}

fn get_count(r: &mut impl Read) -> Result<usize, CheckpointError> {
    usize::try_from(get_u64(r)?).map_err(|e| CheckpointError::Corrupt(e.to_string()))
}

pub fn write_checkpoint(w: &mut impl Write, ckpt: &Checkpoint) -> io::Result<()> {
    let m = &ckpt.model;
    w.write_all(MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    for v in [m.dim(), m.concepts().len(), m.roles().len(), m.individuals().len()] {
        put_u64(w, v as u64)?;
    }
    for names in [m.concepts(), m.roles(), m.individuals()] {
        for name in names {
            put_str(w, name)?;
        }
    }
    for p in m.params() {
        w.write_all(&p.to_le_bytes())?;
    }
    let md = &ckpt.metadata;
    put_u64(w, md.epoch)?;
    w.write_all(&md.loss.to_le_bytes())?;
    put_u64(w, md.seed)?;
    put_str(w, &md.config_digest)
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<Checkpoint, CheckpointError> {
    if &get::<8>(r)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = get_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version(version));
    }
    let dim = get_count(r)?;
    let (nc, nr, ni) = (get_count(r)?, get_count(r)?, get_count(r)?);
    if dim == 0 {
        return Err(CheckpointError::Corrupt("dimension 0".into()));
    }
    let mut tables: [IndexSet<String>; 3] = Default::default();
    for (table, count) in tables.iter_mut().zip([nc, nr, ni]) {
        for _ in 0..count {
            if !table.insert(get_str(r)?) {
                return Err(CheckpointError::Corrupt("duplicate name".into()));
            }
        }
    }
    let total = parameter_count(dim, nc, nr, ni);
    let mut params = Vec::with_capacity(total);
    for _ in 0..total {
        params.push(f64::from_le_bytes(get::<8>(r)?));
    }
    let metadata = TrainingMetadata {
        epoch: get_u64(r)?,
        loss: f64::from_le_bytes(get::<8>(r)?),
        seed: get_u64(r)?,
        config_digest: get_str(r)?,
    };
    let [concepts, roles, individuals] = tables;
    Ok(Checkpoint {
        model: EmbeddingModel::from_parts(dim, concepts, roles, individuals, params),
        metadata,
    })
}

pub fn save_checkpoint(path: impl AsRef<Path>, ckpt: &Checkpoint) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(&mut w, ckpt)?;
    w.flush()
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint, CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    read_checkpoint(&mut r)
}
