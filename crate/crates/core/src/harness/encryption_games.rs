//! Ciphertext indistinguishability (IND-CCA2) and key privacy (IK-CCA).
//! The decryption oracle answers every query except the challenge itself.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::{trial_rng, GameReport};
use crate::crypto::{DecryptionKey, EncKeyPair, EncryptionKey, NoteCiphertext, NoteEncryption};
use crate::note::NOTE_BYTES;

/// Decryption oracle for one or more challenger keys.
pub struct DecOracle<'a> {
    scheme: &'a dyn NoteEncryption,
    keys: Vec<DecryptionKey>,
    challenge: Option<NoteCiphertext>,
    queries: u64,
}

impl<'a> DecOracle<'a> {
    fn new(scheme: &'a dyn NoteEncryption, keys: Vec<DecryptionKey>) -> Self {
        Self { scheme, keys, challenge: None, queries: 0 }
    }

    /// `None` on authentication failure, on an unknown key index and on the challenge.
    pub fn decrypt(&mut self, key: usize, c: &NoteCiphertext) -> Option<Vec<u8>> {
        self.queries += 1;
        if self.challenge.as_ref() == Some(c) {
            return None;
        }
        self.scheme.decrypt(self.keys.get(key)?, c).ok()
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

pub trait IndCcaAdversary: Sync {
    fn name(&self) -> &'static str;
    /// Two equal-length messages.
    fn choose(&self, k_pk: &EncryptionKey, oracle: &mut DecOracle, rng: &mut ChaCha20Rng) -> [Vec<u8>; 2];
    /// Guess of which message the challenge encrypts.
    fn guess(
        &self,
        k_pk: &EncryptionKey,
        messages: &[Vec<u8>; 2],
        challenge: &NoteCiphertext,
        oracle: &mut DecOracle,
        rng: &mut ChaCha20Rng,
    ) -> usize;
}

pub trait IkCcaAdversary: Sync {
    fn name(&self) -> &'static str;
    fn choose(&self, keys: &[EncryptionKey; 2], oracle: &mut DecOracle, rng: &mut ChaCha20Rng) -> Vec<u8>;
    /// Guess of which key the challenge is encrypted to.
    fn guess(
        &self,
        keys: &[EncryptionKey; 2],
        message: &[u8],
        challenge: &NoteCiphertext,
        oracle: &mut DecOracle,
        rng: &mut ChaCha20Rng,
    ) -> usize;
}

pub fn run_indcca2(scheme: &dyn NoteEncryption, adversary: &dyn IndCcaAdversary, trials: u64, seed: u64) -> GameReport {
    let wins = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, "ind-cca2", t);
            let keys: EncKeyPair = scheme.keygen(&rng.gen());
            let mut oracle = DecOracle::new(scheme, vec![keys.k_sk]);
            let messages = adversary.choose(&keys.k_pk, &mut oracle, &mut rng);
            assert_eq!(messages[0].len(), messages[1].len(), "messages must have equal length");
            let b = rng.gen_range(0..2usize);
            let challenge = scheme.encrypt(&keys.k_pk, &messages[b], &rng.gen());
            oracle.challenge = Some(challenge.clone());
            adversary.guess(&keys.k_pk, &messages, &challenge, &mut oracle, &mut rng) == b
        })
        .count() as u64;
    GameReport::new("ind-cca2", adversary.name(), scheme.name(), trials, wins)
}

pub fn run_ikcca(scheme: &dyn NoteEncryption, adversary: &dyn IkCcaAdversary, trials: u64, seed: u64) -> GameReport {
    let wins = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, "ik-cca", t);
            let k0 = scheme.keygen(&rng.gen());
            let k1 = scheme.keygen(&rng.gen());
            let pks = [k0.k_pk, k1.k_pk];
            let mut oracle = DecOracle::new(scheme, vec![k0.k_sk, k1.k_sk]);
            let message = adversary.choose(&pks, &mut oracle, &mut rng);
            let b = rng.gen_range(0..2usize);
            let challenge = scheme.encrypt(&pks[b], &message, &rng.gen());
            oracle.challenge = Some(challenge.clone());
            adversary.guess(&pks, &message, &challenge, &mut oracle, &mut rng) == b
        })
        .count() as u64;
    GameReport::new("ik-cca", adversary.name(), scheme.name(), trials, wins)
}

/// Guesses uniformly at random.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomInd;

impl IndCcaAdversary for RandomInd {
    fn name(&self) -> &'static str {
        "random-guess"
    }

    fn choose(&self, _: &EncryptionKey, _: &mut DecOracle, rng: &mut ChaCha20Rng) -> [Vec<u8>; 2] {
        let mut m0 = vec![0u8; NOTE_BYTES];
        let mut m1 = vec![0u8; NOTE_BYTES];
        rng.fill(&mut m0[..]);
        rng.fill(&mut m1[..]);
        [m0, m1]
    }

    fn guess(
        &self,
        _: &EncryptionKey,
        _: &[Vec<u8>; 2],
        _: &NoteCiphertext,
        _: &mut DecOracle,
        rng: &mut ChaCha20Rng,
    ) -> usize {
        rng.gen_range(0..2)
    }
}

/// Picks all-zero versus all-one messages, tries a mauled challenge on the
/// oracle, searches the ciphertext for either message and finally falls back
/// to the bit balance of the body.
#[derive(Clone, Copy, Debug, Default)]
pub struct ByteInspectionInd;

impl IndCcaAdversary for ByteInspectionInd {
    fn name(&self) -> &'static str {
        "byte-inspection"
    }

    fn choose(&self, _: &EncryptionKey, _: &mut DecOracle, _: &mut ChaCha20Rng) -> [Vec<u8>; 2] {
        [vec![0x00; NOTE_BYTES], vec![0xff; NOTE_BYTES]]
    }

    fn guess(
        &self,
        _: &EncryptionKey,
        m: &[Vec<u8>; 2],
        c: &NoteCiphertext,
        oracle: &mut DecOracle,
        _: &mut ChaCha20Rng,
    ) -> usize {
        let mut mauled = c.clone();
        if let Some(last) = mauled.body.last_mut() {
            *last ^= 1;
        }
        if let Some(p) = oracle.decrypt(0, &mauled) {
            return usize::from(majority_ones(&p));
        }
        let bytes = c.to_bytes();
        for (i, msg) in m.iter().enumerate() {
            if contains(&bytes, msg) {
                return i;
            }
        }
        usize::from(majority_ones(&c.body))
    }
}

/// Guesses uniformly at random.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomIk;

impl IkCcaAdversary for RandomIk {
    fn name(&self) -> &'static str {
        "random-guess"
    }

    fn choose(&self, _: &[EncryptionKey; 2], _: &mut DecOracle, rng: &mut ChaCha20Rng) -> Vec<u8> {
        let mut m = vec![0u8; NOTE_BYTES];
        rng.fill(&mut m[..]);
        m
    }

    fn guess(
        &self,
        _: &[EncryptionKey; 2],
        _: &[u8],
        _: &NoteCiphertext,
        _: &mut DecOracle,
        rng: &mut ChaCha20Rng,
    ) -> usize {
        rng.gen_range(0..2)
    }
}

/// Searches the ciphertext for either public key, then asks both oracles to
/// open a mauled challenge, then guesses from a byte parity.
#[derive(Clone, Copy, Debug, Default)]
pub struct ByteInspectionIk;

impl IkCcaAdversary for ByteInspectionIk {
    fn name(&self) -> &'static str {
        "byte-inspection"
    }

    fn choose(&self, _: &[EncryptionKey; 2], _: &mut DecOracle, rng: &mut ChaCha20Rng) -> Vec<u8> {
        let mut m = vec![0u8; NOTE_BYTES];
        rng.fill(&mut m[..]);
        m
    }

    fn guess(
        &self,
        keys: &[EncryptionKey; 2],
        _: &[u8],
        c: &NoteCiphertext,
        oracle: &mut DecOracle,
        _: &mut ChaCha20Rng,
    ) -> usize {
        let bytes = c.to_bytes();
        for (i, k) in keys.iter().enumerate() {
            if contains(&bytes, &k.0) {
                return i;
            }
        }
        let mut mauled = c.clone();
        mauled.tag[0] ^= 1;
        for i in 0..2 {
            if oracle.decrypt(i, &mauled).is_some() {
                return i;
            }
        }
        usize::from(c.ephemeral_pk[0] & 1)
    }
}

fn majority_ones(bytes: &[u8]) -> bool {
    let ones: u32 = bytes.iter().map(|b| b.count_ones()).sum();
    ones as usize * 2 > bytes.len() * 8
}

pub(super) fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}
