//! Canonical binary encoding.
//!
//! Every value has exactly one encoding, so hashes of encodings are stable
//! identifiers. Layout rules:
//!
//! * integers are fixed-width little-endian (`u8`, `u32`, `u64`);
//! * digests, public keys and signatures are written raw at their fixed width;
//! * variable-length byte strings and sequences carry a `u32` length prefix;
//! * enums start with a one-byte tag.

use thiserror::Error;

use crate::digest::Digest;

/// Decoding failures.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown tag {tag} for {what}")]
    BadTag { what: &'static str, tag: u8 },
    #[error("{0} trailing bytes after value")]
    TrailingBytes(usize),
    #[error("invalid value: {0}")]
    Invalid(&'static str),
}

/// Append-only byte writer.
#[derive(Default, Debug, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Encoder { buf: Vec::with_capacity(n) }
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_bytes(&mut self, bytes: &[u8]) {
        self.put_len(bytes.len());
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_len(&mut self, n: usize) {
        self.put_u32(u32::try_from(n).expect("sequence longer than u32::MAX"));
    }

    pub fn put_digest(&mut self, d: &Digest) {
        self.buf.extend_from_slice(&d.0);
    }

    pub fn put_digests(&mut self, ds: &[Digest]) {
        self.put_len(ds.len());
        for d in ds {
            self.put_digest(d);
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

/// Cursor over an encoded byte slice.
#[derive(Debug)]
pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::UnexpectedEnd)?;
        if end > self.buf.len() {
            return Err(CodecError::UnexpectedEnd);
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        Ok(self.take(N)?.try_into().expect("exact width"))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let n = self.len()?;
        self.take(n)
    }

    /// Reads a length prefix, rejecting values that cannot fit in the input.
    pub fn len(&mut self) -> Result<usize, CodecError> {
        let n = self.u32()? as usize;
        if n > self.remaining() {
            return Err(CodecError::UnexpectedEnd);
        }
        Ok(n)
    }

    pub fn digest(&mut self) -> Result<Digest, CodecError> {
        Ok(Digest(self.array::<32>()?))
    }

    pub fn digests(&mut self) -> Result<Vec<Digest>, CodecError> {
        let n = self.len()?;
        (0..n).map(|_| self.digest()).collect()
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    /// Fails if any input is left unread.
    pub fn finish(self) -> Result<(), CodecError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(CodecError::TrailingBytes(n)),
        }
    }
}

/// Types with a canonical encoding.
pub trait Encode {
    fn encode_to(&self, e: &mut Encoder);

    fn encode(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.encode_to(&mut e);
        e.finish()
    }
}

/// Types decodable from their canonical encoding.
pub trait Decode: Sized {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, CodecError>;

    /// Decodes a complete buffer, rejecting trailing bytes.
    fn decode(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut d = Decoder::new(bytes);
        let v = Self::decode_from(&mut d)?;
        d.finish()?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_are_little_endian() {
        let mut e = Encoder::new();
        e.put_u32(1);
        e.put_u64(2);
        assert_eq!(e.finish(), vec![1, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn length_prefix_cannot_exceed_input() {
        let mut e = Encoder::new();
        e.put_u32(1000);
        e.put_raw(&[1, 2, 3]);
        let bytes = e.finish();
        assert_eq!(Decoder::new(&bytes).bytes(), Err(CodecError::UnexpectedEnd));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut d = Decoder::new(&[1, 2]);
        d.u8().unwrap();
        assert_eq!(d.finish(), Err(CodecError::TrailingBytes(1)));
    }
}
