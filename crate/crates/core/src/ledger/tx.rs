use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::{Keypair, PublicKey, Signature};
use crate::digest::Digest;

/// Bytes a transaction occupies on the wire in the delay model.
pub const TX_WIRE_BYTES: usize = 168;

/// Reference to one output of an earlier transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutPoint {
    pub tx: Digest,
    pub index: u32,
}

impl OutPoint {
    pub fn new(tx: Digest, index: u32) -> Self {
        OutPoint { tx, index }
    }
}

/// A coin: a value locked to an owner key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TxOutput {
    pub value: u64,
    pub owner: PublicKey,
}

/// Key and signature authorising one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub pubkey: PublicKey,
    pub signature: Signature,
}

/// Structural problems detectable without a UTXO set.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TxFormatError {
    #[error("transaction has no inputs")]
    NoInputs,
    #[error("transaction has no outputs")]
    NoOutputs,
    #[error("{witnesses} witnesses for {inputs} inputs")]
    WitnessCount { inputs: usize, witnesses: usize },
    #[error("bad signature on input {0}")]
    BadSignature(usize),
}

/// An immutable UTXO transaction. Cloning is cheap.
///
/// The identifier hashes inputs and outputs only; witnesses sign that
/// identifier.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TxWire", into = "TxWire")]
pub struct Transaction(Arc<TxInner>);

#[derive(PartialEq, Eq)]
struct TxInner {
    id: Digest,
    inputs: Vec<OutPoint>,
    outputs: Vec<TxOutput>,
    witnesses: Vec<Witness>,
}

#[derive(Clone, Serialize, Deserialize)]
struct TxWire {
    inputs: Vec<OutPoint>,
    outputs: Vec<TxOutput>,
    witnesses: Vec<Witness>,
}

impl From<TxWire> for Transaction {
    fn from(w: TxWire) -> Self {
        Transaction::from_parts(w.inputs, w.outputs, w.witnesses)
    }
}

impl From<Transaction> for TxWire {
    fn from(t: Transaction) -> Self {
        TxWire { inputs: t.0.inputs.clone(), outputs: t.0.outputs.clone(), witnesses: t.0.witnesses.clone() }
    }
}

impl std::fmt::Debug for Transaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transaction")
            .field("id", &self.0.id)
            .field("inputs", &self.0.inputs)
            .field("outputs", &self.0.outputs.len())
            .finish()
    }
}

/// Identifier of a transaction with the given inputs and outputs.
pub fn transaction_id(inputs: &[OutPoint], outputs: &[TxOutput]) -> Digest {
    let mut e = Encoder::with_capacity(8 + inputs.len() * 36 + outputs.len() * 41);
    encode_body(&mut e, inputs, outputs);
    Digest::hash(&e.finish())
}

fn encode_body(e: &mut Encoder, inputs: &[OutPoint], outputs: &[TxOutput]) {
    e.put_len(inputs.len());
    for i in inputs {
        e.put_digest(&i.tx);
        e.put_u32(i.index);
    }
    e.put_len(outputs.len());
    for o in outputs {
        e.put_u64(o.value);
        o.owner.encode_to(e);
    }
}

impl Transaction {
    /// Assembles a transaction from parts; witnesses are not checked here.
    pub fn from_parts(inputs: Vec<OutPoint>, outputs: Vec<TxOutput>, witnesses: Vec<Witness>) -> Self {
        let id = transaction_id(&inputs, &outputs);
        Transaction(Arc::new(TxInner { id, inputs, outputs, witnesses }))
    }

    /// Builds and signs a transaction; `signers[i]` authorises `inputs[i]`.
    pub fn signed(inputs: Vec<OutPoint>, outputs: Vec<TxOutput>, signers: &[&Keypair]) -> Self {
        assert_eq!(inputs.len(), signers.len(), "one signer per input");
        let id = transaction_id(&inputs, &outputs);
        let witnesses = signers
            .iter()
            .map(|k| Witness { pubkey: k.public(), signature: k.sign(&id.0) })
            .collect();
        Transaction(Arc::new(TxInner { id, inputs, outputs, witnesses }))
    }

    pub fn id(&self) -> Digest {
        self.0.id
    }

    pub fn inputs(&self) -> &[OutPoint] {
        &self.0.inputs
    }

    pub fn outputs(&self) -> &[TxOutput] {
        &self.0.outputs
    }

    pub fn witnesses(&self) -> &[Witness] {
        &self.0.witnesses
    }

    /// The outpoints this transaction creates.
    pub fn created(&self) -> impl Iterator<Item = OutPoint> + '_ {
        (0..self.0.outputs.len() as u32).map(move |i| OutPoint::new(self.0.id, i))
    }

    pub fn output_total(&self) -> Option<u64> {
        self.0.outputs.iter().try_fold(0u64, |acc, o| acc.checked_add(o.value))
    }

    /// Checks structure and that every witness signature verifies under its
    /// own key. Key ownership is checked later, against the UTXO set.
    pub fn check_well_formed(&self) -> Result<(), TxFormatError> {
        let t = &self.0;
        if t.inputs.is_empty() {
            return Err(TxFormatError::NoInputs);
        }
        if t.outputs.is_empty() {
            return Err(TxFormatError::NoOutputs);
        }
        if t.witnesses.len() != t.inputs.len() {
            return Err(TxFormatError::WitnessCount { inputs: t.inputs.len(), witnesses: t.witnesses.len() });
        }
        for (i, w) in t.witnesses.iter().enumerate() {
            if !w.pubkey.verify(&t.id.0, &w.signature) {
                return Err(TxFormatError::BadSignature(i));
            }
        }
        Ok(())
    }
}

impl Encode for Transaction {
    fn encode_to(&self, e: &mut Encoder) {
        encode_body(e, &self.0.inputs, &self.0.outputs);
        e.put_len(self.0.witnesses.len());
        for w in &self.0.witnesses {
            w.pubkey.encode_to(e);
            w.signature.encode_to(e);
        }
    }
}

impl Decode for Transaction {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let n = d.len()?;
        let inputs = (0..n)
            .map(|_| Ok(OutPoint::new(d.digest()?, d.u32()?)))
            .collect::<Result<Vec<_>, CodecError>>()?;
        let n = d.len()?;
        let outputs = (0..n)
            .map(|_| Ok(TxOutput { value: d.u64()?, owner: PublicKey::decode_from(d)? }))
            .collect::<Result<Vec<_>, CodecError>>()?;
        let n = d.len()?;
        let witnesses = (0..n)
            .map(|_| Ok(Witness { pubkey: PublicKey::decode_from(d)?, signature: Signature::decode_from(d)? }))
            .collect::<Result<Vec<_>, CodecError>>()?;
        Ok(Transaction::from_parts(inputs, outputs, witnesses))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::SignatureScheme;

    fn sample() -> (Keypair, Transaction) {
        let k = Keypair::from_seed(SignatureScheme::Ed25519, [3u8; 32]);
        let tx = Transaction::signed(
            vec![OutPoint::new(Digest::hash(b"funding"), 0)],
            vec![TxOutput { value: 5, owner: k.public() }],
            &[&k],
        );
        (k, tx)
    }

    #[test]
    fn signed_transaction_is_well_formed() {
        let (_, tx) = sample();
        assert_eq!(tx.check_well_formed(), Ok(()));
    }

    #[test]
    fn id_ignores_witnesses() {
        let (_, tx) = sample();
        let stripped = Transaction::from_parts(tx.inputs().to_vec(), tx.outputs().to_vec(), vec![]);
        assert_eq!(stripped.id(), tx.id());
        assert!(matches!(stripped.check_well_formed(), Err(TxFormatError::WitnessCount { .. })));
    }

    #[test]
    fn encoding_and_json_round_trip() {
        let (_, tx) = sample();
        assert_eq!(Transaction::decode(&tx.encode()).unwrap(), tx);
        let json = serde_json::to_string(&tx).unwrap();
        assert_eq!(serde_json::from_str::<Transaction>(&json).unwrap(), tx);
    }

    #[test]
    fn tampered_output_breaks_signature() {
        let (k, tx) = sample();
        let forged = Transaction::from_parts(
            tx.inputs().to_vec(),
            vec![TxOutput { value: 6, owner: k.public() }],
            tx.witnesses().to_vec(),
        );
        assert_eq!(forged.check_well_formed(), Err(TxFormatError::BadSignature(0)));
    }
}
