//! Model checkpoint format.
//!
//! ```text
//! AEMODEL v1 n=<n> k=<k> layers=<count>\n
//! dense <in> <out> <activation>\n          (one line per layer)
//! <f64 LE weights, row-major (out × in)><f64 LE biases (out)>   (per layer)
//! ```
//!
//! Layers are stored transmitter first, then receiver. Activation names are
//! `relu`, `elu`, `tanh`, `linear`, `softmax`. The file ends exactly after
//! the last bias; trailing bytes are rejected.

use std::path::Path;

use super::model::AeModel;
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Network, Tensor};

pub const CHECKPOINT_MAGIC: &str = "AEMODEL";
const VERSION: &str = "v1";

pub fn write_checkpoint(model: &AeModel) -> Vec<u8> {
    let layers: Vec<&DenseLayer> = model
        .transmitter()
        .layers()
        .iter()
        .chain(model.receiver().layers())
        .collect();
    let mut out = format!(
        "{CHECKPOINT_MAGIC} {VERSION} n={} k={} layers={}\n",
        model.n(),
        model.k(),
        layers.len()
    );
    for l in &layers {
        out.push_str(&format!("dense {} {} {}\n", l.in_dim(), l.out_dim(), l.activation()));
    }
    let mut bytes = out.into_bytes();
    for l in &layers {
        for v in l.weights().values().iter().chain(l.bias().values()) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

pub fn save_checkpoint(model: &AeModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<AeModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn line(&mut self) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| self.err("unterminated header line"))?;
        let line = std::str::from_utf8(&rest[..end]).map_err(|_| self.err("header is not UTF-8"))?;
        self.pos += end + 1;
        Ok(line)
    }

    fn f64(&mut self) -> Result<f64> {
        let chunk = self
            .bytes
            .get(self.pos..self.pos + 8)
            .ok_or_else(|| self.err("truncated parameter data"))?;
        self.pos += 8;
        Ok(f64::from_le_bytes(chunk.try_into().expect("8 bytes")))
    }
}

fn field(cur: &Cursor<'_>, token: Option<&str>, key: &str) -> Result<usize> {
    let token = token.ok_or_else(|| cur.err(format!("missing `{key}=`")))?;
    token
        .strip_prefix(key)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| cur.err(format!("expected `{key}=<integer>`, found `{token}`")))
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<AeModel> {
    let mut cur = Cursor { bytes, pos: 0 };
    let header = cur.line()?;
    let mut tokens = header.split_ascii_whitespace();
    if tokens.next() != Some(CHECKPOINT_MAGIC) {
        return Err(Error::Parse {
            offset: 0,
            message: format!("missing `{CHECKPOINT_MAGIC}` magic"),
        });
    }
    match tokens.next() {
        Some(VERSION) => {}
        Some(other) => {
            return Err(Error::Version {
                found: other.to_string(),
                expected: VERSION.to_string(),
            })
        }
        None => return Err(cur.err("missing version")),
    }
    let n = field(&cur, tokens.next(), "n")?;
    let k = field(&cur, tokens.next(), "k")?;
    let count = field(&cur, tokens.next(), "layers")?;
    if count != 4 {
        return Err(cur.err(format!("expected 4 layers, found {count}")));
    }

    let mut shapes = Vec::with_capacity(count);
    for _ in 0..count {
        let line_start = cur.pos;
        let line = cur.line()?;
        let parts: Vec<&str> = line.split_ascii_whitespace().collect();
        let parsed = match parts.as_slice() {
            ["dense", i, o, act] => match (i.parse::<usize>(), o.parse::<usize>(), act.parse::<Activation>()) {
                (Ok(i), Ok(o), Ok(a)) if i > 0 && o > 0 => Some((i, o, a)),
                _ => None,
            },
            _ => None,
        };
        shapes.push(parsed.ok_or(Error::Parse {
            offset: line_start,
            message: format!("bad layer line `{line}`"),
        })?);
    }

    let mut layers = Vec::with_capacity(count);
    for &(inp, out, act) in &shapes {
        let w = (0..inp * out).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
        let b = (0..out).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
        layers.push(DenseLayer::from_parts(
            Tensor::from_vec(out, inp, w)?,
            Tensor::from_vec(out, 1, b)?,
            act,
        )?);
    }
    if cur.pos != bytes.len() {
        return Err(cur.err(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    let rx = layers.split_off(2);
    AeModel::from_parts(n, k, Network::new(layers)?, Network::new(rx)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;

    fn model() -> AeModel {
        AeModel::new(4, 4, &mut SimRng::from_seed(12)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let back = read_checkpoint(&write_checkpoint(&m)).unwrap();
        assert_eq!(write_checkpoint(&back), write_checkpoint(&m));
        assert_eq!(back.encode_message(7).unwrap(), m.encode_message(7).unwrap());
    }

    #[test]
    fn header_layout() {
        let bytes = write_checkpoint(&model());
        let text = String::from_utf8_lossy(&bytes[..120]);
        assert!(text.starts_with(
            "AEMODEL v1 n=4 k=4 layers=4\ndense 16 16 elu\ndense 16 8 linear\ndense 8 16 relu\ndense 16 16 softmax\n"
        ));
        let header_len = text.find("softmax\n").unwrap() + "softmax\n".len();
        let params = 16 * 16 + 16 + 16 * 8 + 8 + 8 * 16 + 16 + 16 * 16 + 16;
        assert_eq!(bytes.len(), header_len + 8 * params);
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let bytes = write_checkpoint(&model());
        let err = read_checkpoint(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = write_checkpoint(&model());
        bytes[9] = b'2';
        assert!(matches!(read_checkpoint(&bytes), Err(Error::Version { .. })));
    }

    #[test]
    fn bad_layer_line_reports_offset() {
        let bytes = write_checkpoint(&model());
        let pos = bytes.windows(6).position(|w| w == b"linear").unwrap();
        let mut patched = bytes[..pos].to_vec();
        patched.extend_from_slice(b"swish!");
        patched.extend_from_slice(&bytes[pos + 6..]);
        match read_checkpoint(&patched) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, "AEMODEL v1 n=4 k=4 layers=4\ndense 16 16 elu\n".len()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = write_checkpoint(&model());
        bytes.push(0);
        assert!(read_checkpoint(&bytes).is_err());
    }
}
