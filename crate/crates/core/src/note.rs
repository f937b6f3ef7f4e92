//! zethAddresses and zethNotes: key derivation, note commitments, serial
//! numbers and the fixed 168-byte plaintext layout used for encryption.

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{
    commit_inner, commit_outer, enc_keygen, expand_seed, prf_addr, prf_sn, DecryptionKey, Digest256, EncryptionKey,
    SpendingKey,
};
use crate::encoding::hex_array;

/// Leading 32 bytes of every serialized note.
pub const NOTE_FORMAT_TAG: [u8; 32] = *b"zeth.note.v1\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0";
/// `tag(32) || a_pk(32) || v(8, big-endian) || rho(32) || r(32) || s(32)`.
pub const NOTE_BYTES: usize = 168;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NoteError {
    #[error("malformed note: {0}")]
    MalformedNote(String),
    #[error("spending key does not own this note")]
    NotOwner,
}

/// Public half of a zethAddress, as published in the address registry.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct AddressPublic {
    pub a_pk: Digest256,
    pub k_pk: EncryptionKey,
}

/// Compact text form: `hex(a_pk) || hex(k_pk)`, 128 hex characters.
impl std::fmt::Display for AddressPublic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.a_pk, self.k_pk)
    }
}

impl std::str::FromStr for AddressPublic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.len() != 128 || !s.is_ascii() {
            return Err(format!("expected 128 hex characters, got {}", s.len()));
        }
        let (a, k) = s.split_at(64);
        Ok(Self { a_pk: a.parse()?, k_pk: k.parse()? })
    }
}

/// A full zethAddress `(addr_pk, addr_sk)`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ZethAddress {
    pub a_sk: SpendingKey,
    pub k_sk: DecryptionKey,
    pub a_pk: Digest256,
    pub k_pk: EncryptionKey,
}

impl ZethAddress {
    pub fn from_secrets(a_sk: SpendingKey, k_sk: DecryptionKey) -> Self {
        Self { a_pk: prf_addr(&a_sk, 0), k_pk: k_sk.public_key(), a_sk, k_sk }
    }

    pub fn public(&self) -> AddressPublic {
        AddressPublic { a_pk: self.a_pk, k_pk: self.k_pk }
    }

    /// Both public parts recompute from the secrets.
    pub fn is_consistent(&self) -> bool {
        self.a_pk == prf_addr(&self.a_sk, 0) && self.k_pk == self.k_sk.public_key()
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        gen_address(&rng.gen())
    }
}

/// Expands one seed into both address secrets.
pub fn gen_address(seed: &[u8; 32]) -> ZethAddress {
    let a_sk = SpendingKey(expand_seed(seed, 0));
    let k_sk = enc_keygen(&expand_seed(seed, 1)).k_sk;
    ZethAddress::from_secrets(a_sk, k_sk)
}

/// The opening `(a_pk, v, rho, r, s)` of a note commitment.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct ZethNote {
    pub a_pk: Digest256,
    pub value: u64,
    #[serde(with = "hex_array")]
    pub rho: [u8; 32],
    #[serde(with = "hex_array")]
    pub r: [u8; 32],
    #[serde(with = "hex_array")]
    pub s: [u8; 32],
}

impl ZethNote {
    /// Fresh note for `a_pk` with random `rho`, `r`, `s`.
    pub fn random<R: RngCore + CryptoRng>(a_pk: Digest256, value: u64, rng: &mut R) -> Self {
        Self { a_pk, value, rho: rng.gen(), r: rng.gen(), s: rng.gen() }
    }

    /// `Com_s(v || Com_r(a_pk || rho))`.
    pub fn commitment(&self) -> Digest256 {
        commit_outer(&self.s, self.value, &commit_inner(&self.r, &self.a_pk, &self.rho))
    }

    /// Serial number, available only to the owner of `a_pk`.
    pub fn serial_number(&self, a_sk: &SpendingKey) -> Result<Digest256, NoteError> {
        if prf_addr(a_sk, 0) != self.a_pk {
            return Err(NoteError::NotOwner);
        }
        Ok(prf_sn(a_sk, &self.rho))
    }

    pub fn to_bytes(&self) -> [u8; NOTE_BYTES] {
        let mut out = [0u8; NOTE_BYTES];
        out[..32].copy_from_slice(&NOTE_FORMAT_TAG);
        out[32..64].copy_from_slice(&self.a_pk.0);
        out[64..72].copy_from_slice(&self.value.to_be_bytes());
        out[72..104].copy_from_slice(&self.rho);
        out[104..136].copy_from_slice(&self.r);
        out[136..168].copy_from_slice(&self.s);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NoteError> {
        if bytes.len() != NOTE_BYTES {
            return Err(NoteError::MalformedNote(format!("expected {NOTE_BYTES} bytes, got {}", bytes.len())));
        }
        if bytes[..32] != NOTE_FORMAT_TAG {
            return Err(NoteError::MalformedNote("bad format tag".into()));
        }
        let arr = |range: std::ops::Range<usize>| -> [u8; 32] { bytes[range].try_into().unwrap() };
        Ok(Self {
            a_pk: Digest256(arr(32..64)),
            value: u64::from_be_bytes(bytes[64..72].try_into().unwrap()),
            rho: arr(72..104),
            r: arr(104..136),
            s: arr(136..168),
        })
    }
}

pub fn commitment(note: &ZethNote) -> Digest256 {
    note.commitment()
}

pub fn serial_number(note: &ZethNote, a_sk: &SpendingKey) -> Result<Digest256, NoteError> {
    note.serial_number(a_sk)
}

pub fn serialize_note(note: &ZethNote) -> Vec<u8> {
    note.to_bytes().to_vec()
}

pub fn deserialize_note(bytes: &[u8]) -> Result<ZethNote, NoteError> {
    ZethNote::from_bytes(bytes)
}
