//! Binary model container.
//!
//! Layout (all integers little-endian `u32`, strings length-prefixed UTF-8):
//!
//! ```text
//! "TUDP" version
//! config-text                      `key = value` lines
//! list-count { name item-count { item } }
//! tensor-count { name rank { dim } { f32 } }
//! ```

use std::io::{Read, Write};

use super::params::ParameterStore;
use super::tensor::Tensor;
use super::NeuralError;

pub const MAGIC: &[u8; 4] = b"TUDP";
pub const FORMAT_VERSION: u32 = 1;

/// Everything stored in a model file.
#[derive(Clone, Debug, Default)]
pub struct ModelFile {
    /// Ordered `key = value` configuration entries.
    pub config: Vec<(String, String)>,
    /// Named string tables such as vocabularies and label sets.
    pub lists: Vec<(String, Vec<String>)>,
    pub params: ParameterStore,
}

impl ModelFile {
    pub fn config_value(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn list(&self, name: &str) -> Option<&[String]> {
        self.lists.iter().find(|(n, _)| n == name).map(|(_, l)| l.as_slice())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), NeuralError> {
        out.write_all(MAGIC)?;
        write_u32(&mut out, FORMAT_VERSION)?;

        let mut config = String::new();
        for (key, value) in &self.config {
            if key.contains(['=', '\n']) || value.contains('\n') {
                return Err(NeuralError::Format(format!("unencodable config entry {key:?}")));
            }
            config.push_str(&format!("{key} = {value}\n"));
        }
        write_str(&mut out, &config)?;

        write_len(&mut out, self.lists.len())?;
        for (name, items) in &self.lists {
            write_str(&mut out, name)?;
            write_len(&mut out, items.len())?;
            for item in items {
                write_str(&mut out, item)?;
            }
        }

        write_len(&mut out, self.params.len())?;
        for id in self.params.ids() {
            let value = self.params.value(id);
            write_str(&mut out, self.params.name(id))?;
            write_len(&mut out, value.rank())?;
            for &dim in value.shape() {
                write_len(&mut out, dim)?;
            }
            let mut bytes = Vec::with_capacity(value.len() * 4);
            for &x in value.data() {
                bytes.extend_from_slice(&(x as f32).to_le_bytes());
            }
            out.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self, NeuralError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(NeuralError::Format(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut input)?;
        if version != FORMAT_VERSION {
            return Err(NeuralError::UnsupportedVersion(version));
        }

        let mut config = Vec::new();
        for line in read_str(&mut input)?.lines() {
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| NeuralError::Format(format!("bad config line {line:?}")))?;
            config.push((key.to_owned(), value.to_owned()));
        }

        let list_count = read_u32(&mut input)?;
        let mut lists = Vec::new();
        for _ in 0..list_count {
            let name = read_str(&mut input)?;
            let count = read_u32(&mut input)?;
            let items = (0..count).map(|_| read_str(&mut input)).collect::<Result<_, _>>()?;
            lists.push((name, items));
        }

        let tensor_count = read_u32(&mut input)?;
        let mut params = ParameterStore::default();
        for _ in 0..tensor_count {
            let name = read_str(&mut input)?;
            let rank = read_u32(&mut input)? as usize;
            if rank == 0 || rank > 8 {
                return Err(NeuralError::Format(format!("tensor {name:?} has rank {rank}")));
            }
            let shape = (0..rank)
                .map(|_| read_u32(&mut input).map(|d| d as usize))
                .collect::<Result<Vec<_>, _>>()?;
            let len: usize = shape.iter().product();
            let mut bytes = vec![0u8; len * 4];
            input.read_exact(&mut bytes)?;
            let data = bytes
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect();
            params.add(&name, Tensor::new(shape, data)?)?;
        }

        Ok(ModelFile {
            config,
            lists,
            params,
        })
    }
}

fn write_u32<W: Write>(out: &mut W, value: u32) -> Result<(), NeuralError> {
    out.write_all(&value.to_le_bytes())?;
    Ok(())
}

fn write_len<W: Write>(out: &mut W, len: usize) -> Result<(), NeuralError> {
    let value = u32::try_from(len).map_err(|_| NeuralError::Format(format!("length {len} too large")))?;
    write_u32(out, value)
}

fn write_str<W: Write>(out: &mut W, s: &str) -> Result<(), NeuralError> {
    write_len(out, s.len())?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, NeuralError> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_str<R: Read>(input: &mut R) -> Result<String, NeuralError> {
    let len = read_u32(input)? as usize;
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| NeuralError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> ModelFile {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = ParameterStore::default();
        params.add_glorot("enc/word", 6, 4, &mut rng).unwrap();
        params.add_normal("head/b", &[1, 3], 1.0, &mut rng).unwrap();
        ModelFile {
            config: vec![("kind".into(), "graph-biaffine".into()), ("word_dim".into(), "4".into())],
            lists: vec![("vocab".into(), vec!["<unk>".into(), "<root>".into(), "ข้าว".into()])],
            params,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = sample();
        let mut bytes = Vec::new();
        model.write(&mut bytes).unwrap();
        let back = ModelFile::read(bytes.as_slice()).unwrap();
        assert_eq!(back.config, model.config);
        assert_eq!(back.lists, model.lists);
        for id in model.params.ids() {
            let (a, b) = (model.params.value(id), back.params.value(id));
            assert_eq!(a.shape(), b.shape());
            let bits = |t: &Tensor| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let mut bytes = Vec::new();
        sample().write(&mut bytes).unwrap();
        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(matches!(ModelFile::read(wrong_magic.as_slice()), Err(NeuralError::Format(_))));
        let mut wrong_version = bytes;
        wrong_version[4] = 9;
        assert_eq!(
            ModelFile::read(wrong_version.as_slice()).unwrap_err(),
            NeuralError::UnsupportedVersion(9)
        );
    }

    #[test]
    fn truncated_file_is_an_error() {
        let mut bytes = Vec::new();
        sample().write(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(ModelFile::read(bytes.as_slice()), Err(NeuralError::Io(_))));
    }
}
