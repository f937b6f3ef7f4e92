//! Hash, PRF and commitment primitives, all instantiated with sha256 and
//! separated by a one-byte role tag at the start of every preimage.

mod encryption;

pub use encryption::{
    dec, enc, enc_keygen, DecryptError, DecryptionKey, EncKeyPair, EncryptionKey, HybridEncryption, NoteCiphertext,
    NoteEncryption, CIPHERTEXT_OVERHEAD, TAG_LEN,
};

use sha2::{Digest, Sha256};

use crate::encoding::{hex_display, hex_newtype, secret_debug};

/// Role tag of `prf_addr`.
pub const TAG_ADDR: u8 = 0x00;
/// Role tag of `prf_sn`.
pub const TAG_SN: u8 = 0x01;
/// Role tag of the inner commitment `k = Com_r(a_pk || rho)`.
pub const TAG_COM_K: u8 = 0x02;
/// Role tag of the outer commitment `cm = Com_s(v || k)`.
pub const TAG_COM_CM: u8 = 0x03;
/// Role tag of seed expansion into address secrets.
pub const TAG_SEED: u8 = 0x04;
/// Role tag of the hybrid-encryption key derivation.
pub const TAG_KDF: u8 = 0x05;
/// Role tag of the mock proof binding.
pub const TAG_PROOF: u8 = 0x06;
/// Role tag of CRS secret derivation.
pub const TAG_SETUP: u8 = 0x07;

hex_newtype! {
    /// A sha256 output.
    pub struct Digest256;
}
hex_display!(Digest256);

hex_newtype! {
    /// Spending secret `a_sk`.
    pub struct SpendingKey;
}
secret_debug!(SpendingKey);

/// The spending half of a zethAddress.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpendKeyPair {
    pub a_sk: SpendingKey,
    pub a_pk: Digest256,
}

impl SpendKeyPair {
    pub fn from_secret(a_sk: SpendingKey) -> Self {
        let a_pk = prf_addr(&a_sk, 0);
        Self { a_sk, a_pk }
    }
}

/// Incremental sha256 over a sequence of byte slices.
pub fn hash_parts<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> Digest256 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    Digest256(hasher.finalize().into())
}

pub fn hash(data: &[u8]) -> Digest256 {
    Digest256(Sha256::digest(data).into())
}

/// `PRF^addr_{a_sk}(index)`; `a_pk` is the evaluation at index 0.
pub fn prf_addr(a_sk: &SpendingKey, index: u8) -> Digest256 {
    hash_parts([&[TAG_ADDR][..], &a_sk.0, &[index]])
}

/// `PRF^sn_{a_sk}(rho)`. Every bit of `rho` enters the preimage, so notes whose
/// `rho` differ anywhere get distinct serial numbers.
pub fn prf_sn(a_sk: &SpendingKey, rho: &[u8; 32]) -> Digest256 {
    hash_parts([&[TAG_SN][..], &a_sk.0, rho])
}

/// `k = Com_r(a_pk || rho)`.
pub fn commit_inner(r: &[u8; 32], a_pk: &Digest256, rho: &[u8; 32]) -> Digest256 {
    hash_parts([&[TAG_COM_K][..], r, &a_pk.0, rho])
}

/// `cm = Com_s(v || k)` with `v` as 8 big-endian bytes.
pub fn commit_outer(s: &[u8; 32], v: u64, k: &Digest256) -> Digest256 {
    hash_parts([&[TAG_COM_CM][..], s, &v.to_be_bytes(), &k.0])
}

/// Expands one seed into independent secrets; `index` selects the output.
pub fn expand_seed(seed: &[u8; 32], index: u8) -> [u8; 32] {
    hash_parts([&[TAG_SEED][..], seed, &[index]]).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn hx(s: &str) -> Digest256 {
        s.parse().unwrap()
    }

    const ZERO: [u8; 32] = [0u8; 32];

    #[test]
    fn sha256_vectors() {
        assert_eq!(hash(b""), hx("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"));
        assert_eq!(hash(b"abc"), hx("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"));
    }

    #[test]
    fn tagged_preimage_vectors() {
        assert_eq!(
            prf_addr(&SpendingKey(ZERO), 0),
            hx("eb142b0cae0baa72a767ebc0823d1be94e14c5bfc52d8e417fc4302fceb6240c")
        );
        assert_eq!(
            prf_sn(&SpendingKey(ZERO), &ZERO),
            hx("ae0798d0ecaed2b778eddebf18f071a561c53658c05e76cedecc27cafbdbc577")
        );
        assert_eq!(
            commit_inner(&ZERO, &Digest256(ZERO), &ZERO),
            hx("a11c15e514a104107d7291e448b9513d748d33f2d52b6979b0e06aba6429458a")
        );
        assert_eq!(
            commit_outer(&ZERO, 0, &Digest256(ZERO)),
            hx("3934bb3dde2c26ce70b62521917b420e954d10d3d8e963d6cc45b49936886273")
        );
    }

    #[test]
    fn serial_numbers_use_every_bit_of_rho() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let a_sk = SpendingKey(rng.gen());
        let rho: [u8; 32] = rng.gen();
        let mut seen = std::collections::HashSet::new();
        for low_bits in 0..4u8 {
            let mut variant = rho;
            variant[31] = (variant[31] & !0b11) | low_bits;
            assert!(seen.insert(prf_sn(&a_sk, &variant)));
        }
        for bit in 0..256 {
            let mut variant = rho;
            variant[bit / 8] ^= 1 << (bit % 8);
            assert_ne!(prf_sn(&a_sk, &variant), prf_sn(&a_sk, &rho));
        }
    }

    #[test]
    fn distinct_keys_give_distinct_addresses() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..256 {
            assert!(seen.insert(prf_addr(&SpendingKey(rng.gen()), 0)));
        }
    }

    #[test]
    fn commitments_hide_and_bind() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let a_pk = Digest256(rng.gen());
        let rho: [u8; 32] = rng.gen();
        let r1: [u8; 32] = rng.gen();
        let r2: [u8; 32] = rng.gen();
        assert_ne!(commit_inner(&r1, &a_pk, &rho), commit_inner(&r2, &a_pk, &rho));
        let k = commit_inner(&r1, &a_pk, &rho);
        assert_eq!(k, commit_inner(&r1, &a_pk, &rho));
        let s: [u8; 32] = rng.gen();
        assert_ne!(commit_outer(&s, 1, &k), commit_outer(&s, 2, &k));
    }

    #[test]
    fn role_tags_separate_identical_payloads() {
        // Same 65-byte body under prf_sn and commit_inner-shaped input must differ.
        let a = hash_parts([&[TAG_SN][..], &ZERO, &ZERO]);
        let b = hash_parts([&[TAG_COM_K][..], &ZERO, &ZERO]);
        assert_ne!(a, b);
        let tags = [TAG_ADDR, TAG_SN, TAG_COM_K, TAG_COM_CM, TAG_SEED, TAG_KDF, TAG_PROOF, TAG_SETUP];
        let unique: std::collections::HashSet<_> = tags.iter().collect();
        assert_eq!(unique.len(), tags.len());
    }

    #[test]
    fn digest_hex_round_trip() {
        let d = hash(b"abc");
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, format!("\"{}\"", d.to_hex()));
        assert_eq!(serde_json::from_str::<Digest256>(&json).unwrap(), d);
        assert!("abcd".parse::<Digest256>().is_err());
    }

    #[test]
    fn secret_debug_is_redacted() {
        let k = SpendingKey([0xab; 32]);
        assert!(!format!("{k:?}").contains("ab"));
    }
}
