//! Checkpoint serialization: a JSON metadata file plus a binary file of
//! 64-bit little-endian floats in layer order (weights row-major, then bias,
//! per layer).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::mlp::{MlpParams, MlpSpec};
use crate::real::Real;

/// Metadata written next to a single-network binary checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpCheckpointMeta {
    pub spec: MlpSpec,
    pub seed: u64,
}

/// Append the parameters of one network to a binary writer.
pub fn write_params<T: Real, W: Write>(out: &mut W, params: &MlpParams<T>) -> Result<()> {
    for (w, b) in params.weights.iter().zip(&params.biases) {
        for &v in w.data() {
            out.write_all(&v.f64().to_le_bytes())?;
        }
        for &v in b {
            out.write_all(&v.f64().to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read the parameters of one network from a binary reader.
pub fn read_params<T: Real, R: Read>(input: &mut R, spec: &MlpSpec) -> Result<MlpParams<T>> {
    let mut flat = Vec::with_capacity(spec.flat_len());
    let mut buf = [0u8; 8];
    for _ in 0..spec.flat_len() {
        input.read_exact(&mut buf)?;
        flat.push(T::of(f64::from_le_bytes(buf)));
    }
    MlpParams::from_flat(spec, &flat)
}

/// Write `<base>.json` + `<base>.bin` for a single network.
pub fn save_mlp<T: Real>(
    base: &Path,
    meta: &MlpCheckpointMeta,
    params: &MlpParams<T>,
) -> Result<()> {
    let json = serde_json::to_string_pretty(meta)?;
    std::fs::write(base.with_extension("json"), json)?;
    let mut bin = Vec::with_capacity(meta.spec.flat_len() * 8);
    write_params(&mut bin, params)?;
    std::fs::write(base.with_extension("bin"), bin)?;
    Ok(())
}

/// Load a single network written by [`save_mlp`].
pub fn load_mlp<T: Real>(base: &Path) -> Result<(MlpCheckpointMeta, MlpParams<T>)> {
    let json_path = base.with_extension("json");
    let meta: MlpCheckpointMeta = serde_json::from_str(
        &std::fs::read_to_string(&json_path)
            .map_err(|_| Error::MissingArtifact(json_path.display().to_string()))?,
    )?;
    let bin_path = base.with_extension("bin");
    let bytes = std::fs::read(&bin_path)
        .map_err(|_| Error::MissingArtifact(bin_path.display().to_string()))?;
    if bytes.len() != meta.spec.flat_len() * 8 {
        return Err(Error::Format {
            path: bin_path.display().to_string(),
            detail: format!(
                "expected {} bytes, found {}",
                meta.spec.flat_len() * 8,
                bytes.len()
            ),
        });
    }
    let params = read_params(&mut bytes.as_slice(), &meta.spec)?;
    Ok((meta, params))
}
