//! Key-private hybrid encryption of note plaintexts.
//!
//! X25519 Diffie-Hellman against a fresh ephemeral key, a tagged sha256 KDF
//! over `(shared, ephemeral_pk, k_pk)`, then ChaCha20-Poly1305. The ciphertext
//! carries only the ephemeral key, never the recipient key.

use chacha20poly1305::{aead::AeadInPlace, ChaCha20Poly1305, Key, KeyInit, Nonce, Tag};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use x25519_dalek::{PublicKey, StaticSecret};

use super::{hash_parts, TAG_KDF};
use crate::encoding::{hex_display, hex_newtype, secret_debug};

/// Poly1305 tag length.
pub const TAG_LEN: usize = 16;
/// Bytes a ciphertext adds on top of its plaintext.
pub const CIPHERTEXT_OVERHEAD: usize = 32 + TAG_LEN;

hex_newtype! {
    /// Public encryption key `k_pk` (an X25519 u-coordinate).
    pub struct EncryptionKey;
}
hex_display!(EncryptionKey);

hex_newtype! {
    /// Decryption key `k_sk`.
    pub struct DecryptionKey;
}
secret_debug!(DecryptionKey);

impl DecryptionKey {
    pub fn public_key(&self) -> EncryptionKey {
        EncryptionKey(PublicKey::from(&StaticSecret::from(self.0)).to_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncKeyPair {
    pub k_sk: DecryptionKey,
    pub k_pk: EncryptionKey,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DecryptError {
    /// Wrong recipient or tampered ciphertext; the two are not distinguished.
    #[error("ciphertext authentication failed")]
    AuthFailure,
}

/// `ephemeral_pk || body || tag`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NoteCiphertext {
    pub ephemeral_pk: [u8; 32],
    pub body: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

impl std::fmt::Debug for NoteCiphertext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NoteCiphertext({})", hex::encode(self.to_bytes()))
    }
}

impl NoteCiphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.body.len() + CIPHERTEXT_OVERHEAD);
        out.extend_from_slice(&self.ephemeral_pk);
        out.extend_from_slice(&self.body);
        out.extend_from_slice(&self.tag);
        out
    }

    /// Splits a wire ciphertext; `None` if it is shorter than the fixed overhead.
    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < CIPHERTEXT_OVERHEAD {
            return None;
        }
        let (ephemeral_pk, rest) = bytes.split_at(32);
        let (body, tag) = rest.split_at(rest.len() - TAG_LEN);
        Some(Self { ephemeral_pk: ephemeral_pk.try_into().ok()?, body: body.to_vec(), tag: tag.try_into().ok()? })
    }

    pub fn len(&self) -> usize {
        self.body.len() + CIPHERTEXT_OVERHEAD
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Serialize for NoteCiphertext {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for NoteCiphertext {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let s = String::deserialize(d)?;
        let bytes = hex::decode(s).map_err(D::Error::custom)?;
        Self::from_bytes(&bytes).ok_or_else(|| D::Error::custom("ciphertext too short"))
    }
}

/// Deterministic key generation: `k_sk = seed`, `k_pk = k_sk * basepoint`.
pub fn enc_keygen(seed: &[u8; 32]) -> EncKeyPair {
    let k_sk = DecryptionKey(*seed);
    let k_pk = k_sk.public_key();
    EncKeyPair { k_sk, k_pk }
}

fn derive_key(shared: &[u8; 32], ephemeral_pk: &[u8; 32], k_pk: &EncryptionKey) -> Key {
    let okm = hash_parts([&[TAG_KDF][..], shared, ephemeral_pk, &k_pk.0]);
    *Key::from_slice(&okm.0)
}

/// Encrypts `plaintext` to `k_pk`. `randomness` seeds the ephemeral key and
/// must be fresh for every call.
pub fn enc(k_pk: &EncryptionKey, plaintext: &[u8], randomness: &[u8; 32]) -> NoteCiphertext {
    let ephemeral = StaticSecret::from(*randomness);
    let ephemeral_pk = PublicKey::from(&ephemeral).to_bytes();
    let shared = ephemeral.diffie_hellman(&PublicKey::from(k_pk.0));
    let key = derive_key(shared.as_bytes(), &ephemeral_pk, k_pk);
    let mut body = plaintext.to_vec();
    // The key is unique per ephemeral secret, so a fixed nonce is never reused under one key.
    let tag = ChaCha20Poly1305::new(&key)
        .encrypt_in_place_detached(&Nonce::default(), &[], &mut body)
        .expect("plaintext within ChaCha20 length limit");
    NoteCiphertext { ephemeral_pk, body, tag: tag.into() }
}

pub fn dec(k_sk: &DecryptionKey, c: &NoteCiphertext) -> Result<Vec<u8>, DecryptError> {
    let secret = StaticSecret::from(k_sk.0);
    let shared = secret.diffie_hellman(&PublicKey::from(c.ephemeral_pk));
    if !shared.was_contributory() {
        return Err(DecryptError::AuthFailure);
    }
    let key = derive_key(shared.as_bytes(), &c.ephemeral_pk, &k_sk.public_key());
    let mut body = c.body.clone();
    ChaCha20Poly1305::new(&key)
        .decrypt_in_place_detached(&Nonce::default(), &[], &mut body, Tag::from_slice(&c.tag))
        .map_err(|_| DecryptError::AuthFailure)?;
    Ok(body)
}

/// The encryption scheme used for note broadcast. Wallets and the security
/// games take it as a parameter so a deliberately broken scheme can be
/// swapped in to check that the games notice.
pub trait NoteEncryption: Send + Sync {
    fn name(&self) -> &'static str;
    fn keygen(&self, seed: &[u8; 32]) -> EncKeyPair {
        enc_keygen(seed)
    }
    fn encrypt(&self, k_pk: &EncryptionKey, plaintext: &[u8], randomness: &[u8; 32]) -> NoteCiphertext;
    fn decrypt(&self, k_sk: &DecryptionKey, c: &NoteCiphertext) -> Result<Vec<u8>, DecryptError>;
}

/// The production scheme: [`enc`] / [`dec`].
#[derive(Clone, Copy, Debug, Default)]
pub struct HybridEncryption;

impl NoteEncryption for HybridEncryption {
    fn name(&self) -> &'static str {
        "hybrid-x25519-chacha20poly1305"
    }

    fn encrypt(&self, k_pk: &EncryptionKey, plaintext: &[u8], randomness: &[u8; 32]) -> NoteCiphertext {
        enc(k_pk, plaintext, randomness)
    }

    fn decrypt(&self, k_sk: &DecryptionKey, c: &NoteCiphertext) -> Result<Vec<u8>, DecryptError> {
        dec(k_sk, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn keygen_is_deterministic() {
        let a = enc_keygen(&[5; 32]);
        assert_eq!(a, enc_keygen(&[5; 32]));
        assert_eq!(a.k_pk, a.k_sk.public_key());
        assert_ne!(a.k_pk, enc_keygen(&[6; 32]).k_pk);
    }

    #[test]
    fn wrong_key_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let alice = enc_keygen(&rng.gen());
        let bob = enc_keygen(&rng.gen());
        let c = enc(&alice.k_pk, b"note", &rng.gen());
        assert_eq!(dec(&bob.k_sk, &c), Err(DecryptError::AuthFailure));
        assert_eq!(dec(&alice.k_sk, &c).unwrap(), b"note");
    }

    #[test]
    fn every_single_byte_flip_is_detected() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let kp = enc_keygen(&rng.gen());
        let c = enc(&kp.k_pk, &[7u8; 168], &rng.gen());
        let wire = c.to_bytes();
        for i in 0..wire.len() {
            let mut bad = wire.clone();
            bad[i] ^= 0x01;
            let bad = NoteCiphertext::from_bytes(&bad).unwrap();
            assert_eq!(dec(&kp.k_sk, &bad), Err(DecryptError::AuthFailure), "byte {i}");
        }
    }

    #[test]
    fn ciphertext_carries_no_recipient_key() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let kp = enc_keygen(&rng.gen());
        let c = enc(&kp.k_pk, &[0u8; 168], &rng.gen());
        let wire = c.to_bytes();
        assert!(!wire.windows(32).any(|w| w == kp.k_pk.0));
        assert_eq!(wire.len(), 168 + CIPHERTEXT_OVERHEAD);
    }

    #[test]
    fn short_wire_rejected() {
        assert!(NoteCiphertext::from_bytes(&[0u8; CIPHERTEXT_OVERHEAD - 1]).is_none());
        assert!(NoteCiphertext::from_bytes(&[0u8; CIPHERTEXT_OVERHEAD]).is_some());
    }

    proptest! {
        #[test]
        fn round_trip(seed in any::<[u8; 32]>(), r in any::<[u8; 32]>(), m in prop::collection::vec(any::<u8>(), 0..256)) {
            let kp = enc_keygen(&seed);
            let c = enc(&kp.k_pk, &m, &r);
            prop_assert_eq!(dec(&kp.k_sk, &c).unwrap(), m);
            let parsed = NoteCiphertext::from_bytes(&c.to_bytes()).unwrap();
            prop_assert_eq!(parsed, c);
        }
    }
}
