//! Keys and signatures.
//!
//! Two schemes share one interface. `Ed25519` uses real signatures. `Mock`
//! derives a signature by XOR-ing the public key into the message digest,
//! which keeps large simulations cheap while still binding a witness to both
//! the key and the message.

use serde::{Deserialize, Serialize};

use crate::codec::{CodecError, Decode, Decoder, Encode, Encoder};
use crate::digest::Digest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureScheme {
    Ed25519,
    Mock,
}

impl SignatureScheme {
    fn tag(self) -> u8 {
        match self {
            SignatureScheme::Ed25519 => 0,
            SignatureScheme::Mock => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self, CodecError> {
        match tag {
            0 => Ok(SignatureScheme::Ed25519),
            1 => Ok(SignatureScheme::Mock),
            tag => Err(CodecError::BadTag { what: "signature scheme", tag }),
        }
    }
}

/// A verification key tagged with its scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PublicKey {
    pub scheme: SignatureScheme,
    #[serde(with = "hex_array")]
    pub bytes: [u8; 32],
}

/// A 64-byte signature.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature(#[serde(with = "hex_array")] pub [u8; 64]);

impl std::fmt::Debug for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Signature({}..)", hex::encode(&self.0[..6]))
    }
}

/// A signing key.
#[derive(Clone)]
pub struct Keypair {
    public: PublicKey,
    inner: Signer,
}

#[derive(Clone)]
enum Signer {
    Ed25519(Box<ed25519_dalek::SigningKey>),
    Mock,
}

impl Keypair {
    /// Deterministically derives a key pair from a 32-byte seed.
    pub fn from_seed(scheme: SignatureScheme, seed: [u8; 32]) -> Self {
        match scheme {
            SignatureScheme::Ed25519 => {
                let sk = ed25519_dalek::SigningKey::from_bytes(&seed);
                let public = PublicKey { scheme, bytes: sk.verifying_key().to_bytes() };
                Keypair { public, inner: Signer::Ed25519(Box::new(sk)) }
            }
            SignatureScheme::Mock => {
                let bytes = Digest::hash_parts(&[b"mock-key", &seed]).0;
                Keypair { public: PublicKey { scheme, bytes }, inner: Signer::Mock }
            }
        }
    }

    pub fn public(&self) -> PublicKey {
        self.public
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        match &self.inner {
            Signer::Ed25519(sk) => {
                use ed25519_dalek::Signer as _;
                Signature(sk.sign(msg).to_bytes())
            }
            Signer::Mock => mock_signature(&self.public, msg),
        }
    }
}

impl std::fmt::Debug for Keypair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Keypair").field("public", &self.public).finish_non_exhaustive()
    }
}

fn mock_signature(pk: &PublicKey, msg: &[u8]) -> Signature {
    let digest = if msg.len() == 32 { msg.try_into().expect("32 bytes") } else { Digest::hash(msg).0 };
    let mut sig = [0u8; 64];
    for i in 0..32 {
        sig[i] = digest[i] ^ pk.bytes[i];
    }
    sig[32..36].copy_from_slice(b"mock");
    Signature(sig)
}

impl PublicKey {
    pub fn verify(&self, msg: &[u8], sig: &Signature) -> bool {
        match self.scheme {
            SignatureScheme::Ed25519 => {
                let Ok(vk) = ed25519_dalek::VerifyingKey::from_bytes(&self.bytes) else {
                    return false;
                };
                vk.verify_strict(msg, &ed25519_dalek::Signature::from_bytes(&sig.0)).is_ok()
            }
            SignatureScheme::Mock => mock_signature(self, msg) == *sig,
        }
    }
}

impl Encode for PublicKey {
    fn encode_to(&self, e: &mut Encoder) {
        e.put_u8(self.scheme.tag());
        e.put_raw(&self.bytes);
    }
}

impl Decode for PublicKey {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let scheme = SignatureScheme::from_tag(d.u8()?)?;
        Ok(PublicKey { scheme, bytes: d.array()? })
    }
}

impl Encode for Signature {
    fn encode_to(&self, e: &mut Encoder) {
        e.put_raw(&self.0);
    }
}

impl Decode for Signature {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Signature(d.array()?))
    }
}

mod hex_array {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(v: &[u8; N], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[u8; N], D::Error> {
        let s = String::deserialize(d)?;
        let mut out = [0u8; N];
        hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
        Ok(out)
    }
}
