//! Deliberately broken encryption schemes. They decrypt correctly but leak
//! what the games are designed to detect; never use them outside tests.

use crate::crypto::{dec, enc, DecryptError, DecryptionKey, EncryptionKey, NoteCiphertext, NoteEncryption};

/// Prefixes the recipient's `k_pk` to the body: breaks key privacy.
#[derive(Clone, Copy, Debug, Default)]
pub struct LeakyRecipientEncryption;

impl NoteEncryption for LeakyRecipientEncryption {
    fn name(&self) -> &'static str {
        "sabotaged-leaky-recipient"
    }

    fn encrypt(&self, k_pk: &EncryptionKey, plaintext: &[u8], randomness: &[u8; 32]) -> NoteCiphertext {
        let mut c = enc(k_pk, plaintext, randomness);
        let mut body = k_pk.0.to_vec();
        body.extend_from_slice(&c.body);
        c.body = body;
        c
    }

    fn decrypt(&self, k_sk: &DecryptionKey, c: &NoteCiphertext) -> Result<Vec<u8>, DecryptError> {
        if c.body.len() < 32 || c.body[..32] != k_sk.public_key().0 {
            return Err(DecryptError::AuthFailure);
        }
        let mut inner = c.clone();
        inner.body.drain(..32);
        dec(k_sk, &inner)
    }
}

/// Appends the plaintext in the clear: breaks message indistinguishability.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlaintextLeakEncryption;

impl NoteEncryption for PlaintextLeakEncryption {
    fn name(&self) -> &'static str {
        "sabotaged-plaintext-leak"
    }

    fn encrypt(&self, k_pk: &EncryptionKey, plaintext: &[u8], randomness: &[u8; 32]) -> NoteCiphertext {
        let mut c = enc(k_pk, plaintext, randomness);
        c.body.extend_from_slice(plaintext);
        c
    }

    fn decrypt(&self, k_sk: &DecryptionKey, c: &NoteCiphertext) -> Result<Vec<u8>, DecryptError> {
        if !c.body.len().is_multiple_of(2) {
            return Err(DecryptError::AuthFailure);
        }
        let mut inner = c.clone();
        inner.body.truncate(c.body.len() / 2);
        dec(k_sk, &inner)
    }
}
