//! BSAR1 container: magic, length-prefixed JSON header, little-endian
//! complex float64 payload, trailing CRC-32.
//!
//! Layout:
//!
//! ```text
//! "BSAR1" | u32 LE header length | header JSON | payload (Re, Im f64 LE)... | u32 LE CRC-32
//! ```
//!
//! The CRC covers every byte between the magic and the checksum itself.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Serialize};
use thiserror::Error;

pub const MAGIC: &[u8; 5] = b"BSAR1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("I/O error: {0}")]
    Io(std::io::Error),
    #[error("not a BSAR container (bad magic)")]
    BadMagic,
    #[error("unsupported BSAR format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: String },
    #[error("file truncated: {0}")]
    Truncated(String),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("expected a {expected} container, found {found}")]
    WrongKind { expected: String, found: String },
}

impl From<std::io::Error> for ContainerError {
    fn from(e: std::io::Error) -> Self {
        ContainerError::Io(e)
    }
}

/// Fields every header carries.
#[derive(Debug, Clone, serde::Deserialize)]
struct Envelope {
    format_version: u32,
    kind: String,
    payload_len: usize,
}

pub fn encode<H: Serialize>(kind: &str, header: &H, payload: &[Complex64]) -> Result<Vec<u8>, ContainerError> {
    let mut value = serde_json::to_value(header).map_err(|e| ContainerError::Header(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| ContainerError::Header("header must serialise to a JSON object".into()))?;
    obj.insert("format_version".into(), FORMAT_VERSION.into());
    obj.insert("kind".into(), kind.into());
    obj.insert("payload_len".into(), payload.len().into());
    let json = serde_json::to_vec(&value).map_err(|e| ContainerError::Header(e.to_string()))?;
    let mut out = Vec::with_capacity(MAGIC.len() + 8 + json.len() + payload.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for c in payload {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    let crc = crc32fast::hash(&out[MAGIC.len()..]);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

pub fn write_file<H: Serialize>(path: &Path, kind: &str, header: &H, payload: &[Complex64]) -> Result<(), ContainerError> {
    let bytes = encode(kind, header, payload)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("partial");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn check_magic(m: &[u8]) -> Result<(), ContainerError> {
    if m.len() < MAGIC.len() {
        return Err(ContainerError::Truncated("missing magic".into()));
    }
    if &m[..4] != b"BSAR" {
        return Err(ContainerError::BadMagic);
    }
    if m[4] != MAGIC[4] {
        return Err(ContainerError::VersionMismatch {
            found: String::from_utf8_lossy(&m[4..5]).into_owned(),
        });
    }
    Ok(())
}

fn parse_header<H: DeserializeOwned>(kind: &str, json: &[u8]) -> Result<(H, Envelope), ContainerError> {
    let env: Envelope = serde_json::from_slice(json).map_err(|e| ContainerError::Header(e.to_string()))?;
    if env.format_version != FORMAT_VERSION {
        return Err(ContainerError::VersionMismatch {
            found: env.format_version.to_string(),
        });
    }
    if env.kind != kind {
        return Err(ContainerError::WrongKind {
            expected: kind.into(),
            found: env.kind,
        });
    }
    let h = serde_json::from_slice(json).map_err(|e| ContainerError::Header(e.to_string()))?;
    Ok((h, env))
}

pub fn decode<H: DeserializeOwned>(kind: &str, bytes: &[u8]) -> Result<(H, Vec<Complex64>), ContainerError> {
    check_magic(bytes)?;
    let rest = &bytes[MAGIC.len()..];
    if rest.len() < 4 {
        return Err(ContainerError::Truncated("missing header length".into()));
    }
    let hlen = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
    if rest.len() < 4 + hlen + 4 {
        return Err(ContainerError::Truncated(format!(
            "header of {hlen} bytes does not fit in {} remaining bytes",
            rest.len()
        )));
    }
    let (body, crc_bytes) = rest.split_at(rest.len() - 4);
    let json = &body[4..4 + hlen];
    // Length check first so a short file reports truncation, not a bad CRC.
    let env: Option<Envelope> = serde_json::from_slice(json).ok();
    let data = &body[4 + hlen..];
    if let Some(env) = &env {
        let expect = env.payload_len * 16;
        if data.len() < expect {
            return Err(ContainerError::Truncated(format!(
                "payload has {} bytes, header declares {expect}",
                data.len()
            )));
        }
    }
    let stored = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(ContainerError::Checksum { stored, computed });
    }
    let (header, env) = parse_header::<H>(kind, json)?;
    if data.len() != env.payload_len * 16 {
        return Err(ContainerError::Header(format!(
            "payload has {} bytes, header declares {}",
            data.len(),
            env.payload_len * 16
        )));
    }
    let payload = data
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Ok((header, payload))
}

pub fn read_file<H: DeserializeOwned>(path: &Path, kind: &str) -> Result<(H, Vec<Complex64>), ContainerError> {
    decode(kind, &std::fs::read(path)?)
}

/// Reads only the magic and header; the payload is not touched.
pub fn read_header<H: DeserializeOwned>(path: &Path, kind: &str) -> Result<H, ContainerError> {
    let mut f = std::fs::File::open(path)?;
    let mut head = [0u8; 9];
    f.read_exact(&mut head)
        .map_err(|_| ContainerError::Truncated("file shorter than the fixed preamble".into()))?;
    check_magic(&head)?;
    let hlen = u32::from_le_bytes(head[5..9].try_into().expect("4 bytes")) as usize;
    let mut json = vec![0u8; hlen];
    f.read_exact(&mut json)
        .map_err(|_| ContainerError::Truncated("header cut short".into()))?;
    Ok(parse_header::<H>(kind, &json)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct H {
        name: String,
    }

    fn sample() -> (H, Vec<Complex64>) {
        (
            H { name: "x".into() },
            vec![Complex64::new(1.5, -0.0), Complex64::new(f64::MIN_POSITIVE, 3e300)],
        )
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let (h, p) = sample();
        let bytes = encode("run", &h, &p).unwrap();
        assert_eq!(&bytes[..5], b"BSAR1");
        let (h2, p2): (H, _) = decode("run", &bytes).unwrap();
        assert_eq!(h2, h);
        for (a, b) in p.iter().zip(&p2) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn corruption_and_truncation_detected() {
        let (h, p) = sample();
        let bytes = encode("run", &h, &p).unwrap();
        let mut bad = bytes.clone();
        let n = bad.len();
        bad[n - 10] ^= 0x40;
        assert!(matches!(decode::<H>("run", &bad), Err(ContainerError::Checksum { .. })));
        assert!(matches!(decode::<H>("run", &bytes[..n - 12]), Err(ContainerError::Truncated(_))));
        let mut v2 = bytes.clone();
        v2[4] = b'2';
        assert!(matches!(decode::<H>("run", &v2), Err(ContainerError::VersionMismatch { .. })));
        assert!(matches!(decode::<H>("image", &bytes), Err(ContainerError::WrongKind { .. })));
        assert!(matches!(decode::<H>("run", b"PNG\x00\x00\x00\x00\x00\x00\x00"), Err(ContainerError::BadMagic)));
    }
}
