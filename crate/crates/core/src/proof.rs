//! Proof system interface (setup, prove, verify, simulate) backed by a
//! desk-scale mock.
//!
//! The mock is designated-verifier: a proof is a keyed hash of the instance
//! and the bound ciphertexts under a secret shared by the proving key, the
//! verification key and the trapdoor. Soundness comes from the prover
//! refusing witnesses that fail [`check_relation`]; anyone holding the
//! verification key could forge. A deployment needs a publicly verifiable,
//! simulation-extractable SNARK behind these same four functions.

use serde::{Deserialize, Serialize};
use subtle::ConstantTimeEq;
use thiserror::Error;

use crate::crypto::{hash, hash_parts, Digest256, TAG_PROOF, TAG_SETUP};
use crate::encoding::hex_array;
use crate::joinsplit::{check_relation, CircuitConfig, Instance, JoinsplitError, RelationReport, Witness};

/// Wire size of a proof: 32-byte tag plus one flag byte.
pub const PROOF_BYTES: usize = 33;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProveError {
    #[error("witness does not satisfy the relation: {0}")]
    InvalidWitness(RelationReport),
    #[error(transparent)]
    Shape(#[from] JoinsplitError),
    #[error("proving key was generated for a different circuit")]
    FingerprintMismatch,
}

/// Pins `(N, M, depth)`.
pub fn circuit_fingerprint(config: &CircuitConfig) -> Digest256 {
    hash_parts([
        &b"zeth.circuit.v1"[..],
        &(config.n_inputs as u64).to_be_bytes(),
        &(config.n_outputs as u64).to_be_bytes(),
        &(config.depth as u64).to_be_bytes(),
    ])
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ProvingKey {
    pub config: CircuitConfig,
    pub fingerprint: Digest256,
    #[serde(with = "hex_array")]
    binding_secret: [u8; 32],
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct VerificationKey {
    pub config: CircuitConfig,
    pub fingerprint: Digest256,
    #[serde(with = "hex_array")]
    binding_secret: [u8; 32],
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Trapdoor {
    pub fingerprint: Digest256,
    #[serde(with = "hex_array")]
    simulation_secret: [u8; 32],
}

/// `(crs_P, crs_V, td)` from one setup run.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Crs {
    pub proving_key: ProvingKey,
    pub verification_key: VerificationKey,
    pub trapdoor: Trapdoor,
}

/// Deterministic in `randomness`.
pub fn setup(config: &CircuitConfig, randomness: &[u8; 32]) -> Crs {
    let fingerprint = circuit_fingerprint(config);
    let secret = hash_parts([&[TAG_SETUP][..], randomness, &fingerprint.0]).0;
    Crs {
        proving_key: ProvingKey { config: *config, fingerprint, binding_secret: secret },
        verification_key: VerificationKey { config: *config, fingerprint, binding_secret: secret },
        trapdoor: Trapdoor { fingerprint, simulation_secret: secret },
    }
}

/// Constant-size argument. Equality ignores the simulation flag.
#[derive(Clone, Copy, Debug, Eq)]
pub struct Proof {
    pub binding_tag: Digest256,
    pub simulated: bool,
}

impl PartialEq for Proof {
    fn eq(&self, other: &Self) -> bool {
        self.binding_tag == other.binding_tag
    }
}

impl std::hash::Hash for Proof {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.binding_tag.hash(state)
    }
}

impl Proof {
    pub fn to_bytes(&self) -> [u8; PROOF_BYTES] {
        let mut out = [0u8; PROOF_BYTES];
        out[..32].copy_from_slice(&self.binding_tag.0);
        out[32] = self.simulated as u8;
        out
    }

    /// The flag byte must be 0 or 1.
    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != PROOF_BYTES || bytes[32] > 1 {
            return None;
        }
        Some(Self { binding_tag: Digest256(bytes[..32].try_into().ok()?), simulated: bytes[32] == 1 })
    }
}

impl Serialize for Proof {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for Proof {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let s = String::deserialize(d)?;
        let bytes = hex::decode(s).map_err(D::Error::custom)?;
        Proof::from_bytes(&bytes).ok_or_else(|| D::Error::custom("malformed proof"))
    }
}

fn binding_tag(secret: &[u8; 32], x: &Instance, aux_binding: &[u8]) -> Digest256 {
    hash_parts([&[TAG_PROOF][..], secret, &x.encode(), &hash(aux_binding).0])
}

fn shape_matches(config: &CircuitConfig, x: &Instance) -> bool {
    x.sn_old.len() == config.n_inputs && x.cm_new.len() == config.n_outputs
}

/// Proves `(x, w)` for the circuit the caller believes it is using.
/// `aux_binding` (the concatenated note ciphertexts) is bound into the proof.
pub fn prove(
    pk: &ProvingKey,
    circuit: &CircuitConfig,
    x: &Instance,
    aux_binding: &[u8],
    w: &Witness,
) -> Result<Proof, ProveError> {
    if circuit_fingerprint(circuit) != pk.fingerprint {
        return Err(ProveError::FingerprintMismatch);
    }
    let report = check_relation(&pk.config, x, w)?;
    if !report.is_satisfied() {
        return Err(ProveError::InvalidWitness(report));
    }
    Ok(Proof { binding_tag: binding_tag(&pk.binding_secret, x, aux_binding), simulated: false })
}

pub fn verify(vk: &VerificationKey, x: &Instance, aux_binding: &[u8], proof: &Proof) -> bool {
    if !shape_matches(&vk.config, x) {
        return false;
    }
    let expected = binding_tag(&vk.binding_secret, x, aux_binding);
    expected.0.ct_eq(&proof.binding_tag.0).into()
}

/// Witness-free accepting proof; requires the trapdoor.
pub fn simulate(td: &Trapdoor, x: &Instance, aux_binding: &[u8]) -> Proof {
    Proof { binding_tag: binding_tag(&td.simulation_secret, x, aux_binding), simulated: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joinsplit::{build_instance, SpendInput};
    use crate::merkle::{MerklePath, MerkleTree};
    use crate::note::{ZethAddress, ZethNote};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn config() -> CircuitConfig {
        CircuitConfig::new(2, 2, 4).unwrap()
    }

    fn deposit(rng: &mut ChaCha20Rng, value: u64) -> (Instance, Witness) {
        let alice = ZethAddress::random(rng);
        let dummy = |rng: &mut ChaCha20Rng| SpendInput {
            note: ZethNote::random(alice.a_pk, 0, rng),
            a_sk: alice.a_sk,
            address: 0,
            path: MerklePath::dummy(4),
        };
        let inputs = vec![dummy(rng), dummy(rng)];
        let outputs = vec![ZethNote::random(alice.a_pk, value, rng), ZethNote::random(alice.a_pk, 0, rng)];
        build_instance(&config(), inputs, outputs, value, 0, MerkleTree::new(4).unwrap().root()).unwrap()
    }

    #[test]
    fn completeness_and_determinism() {
        let mut rng = ChaCha20Rng::seed_from_u64(20);
        let crs = setup(&config(), &[1; 32]);
        assert_eq!(crs, setup(&config(), &[1; 32]));
        let (x, w) = deposit(&mut rng, 7);
        let proof = prove(&crs.proving_key, &config(), &x, b"cts", &w).unwrap();
        assert!(verify(&crs.verification_key, &x, b"cts", &proof));
        assert_eq!(proof.to_bytes().len(), PROOF_BYTES);
    }

    #[test]
    fn cross_crs_rejects() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let crs1 = setup(&config(), &[1; 32]);
        let crs2 = setup(&config(), &[2; 32]);
        let (x, w) = deposit(&mut rng, 3);
        let proof = prove(&crs2.proving_key, &config(), &x, b"", &w).unwrap();
        assert!(!verify(&crs1.verification_key, &x, b"", &proof));
    }

    #[test]
    fn prover_refuses_invalid_witness_and_wrong_circuit() {
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let crs = setup(&config(), &[1; 32]);
        let (mut x, w) = deposit(&mut rng, 3);
        x.v_in = 4;
        assert!(matches!(prove(&crs.proving_key, &config(), &x, b"", &w), Err(ProveError::InvalidWitness(_))));
        let other = CircuitConfig::new(2, 2, 5).unwrap();
        assert_eq!(prove(&crs.proving_key, &other, &x, b"", &w), Err(ProveError::FingerprintMismatch));
    }

    #[test]
    fn ciphertexts_are_bound() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let crs = setup(&config(), &[1; 32]);
        let (x, w) = deposit(&mut rng, 3);
        let p1 = prove(&crs.proving_key, &config(), &x, b"ciphertexts-1", &w).unwrap();
        let p2 = prove(&crs.proving_key, &config(), &x, b"ciphertexts-2", &w).unwrap();
        assert_ne!(p1, p2);
        assert!(!verify(&crs.verification_key, &x, b"ciphertexts-2", &p1));
    }

    #[test]
    fn single_bit_mutation_sweep() {
        let mut rng = ChaCha20Rng::seed_from_u64(24);
        let crs = setup(&config(), &[1; 32]);
        let (x, w) = deposit(&mut rng, 3);
        let aux = vec![0x5au8; 40];
        let proof = prove(&crs.proving_key, &config(), &x, &aux, &w).unwrap();
        let vk = &crs.verification_key;

        for bit in 0..256 {
            let mut p = proof;
            p.binding_tag.0[bit / 8] ^= 1 << (bit % 8);
            assert!(!verify(vk, &x, &aux, &p));
        }
        // Bits 1..8 of the flag byte yield an unparseable proof.
        for bit in 1..8 {
            let mut bytes = proof.to_bytes();
            bytes[32] ^= 1 << bit;
            assert!(Proof::from_bytes(&bytes).is_none());
        }
        for bit in 0..aux.len() * 8 {
            let mut a = aux.clone();
            a[bit / 8] ^= 1 << (bit % 8);
            assert!(!verify(vk, &x, &a, &proof));
        }
        let encoded = x.encode();
        for bit in 64..encoded.len() * 8 {
            let mut y = x.clone();
            let byte = bit / 8 - 8;
            let mask = 1u8 << (bit % 8);
            // Walk the encoded layout: rt, sn*, cm*, v_in, v_out.
            let n_sn = y.sn_old.len();
            let digests = 1 + n_sn + y.cm_new.len();
            if byte < 32 * digests {
                let (slot, off) = (byte / 32, byte % 32);
                let d = match slot {
                    0 => &mut y.rt,
                    s if s <= n_sn => &mut y.sn_old[s - 1],
                    s => &mut y.cm_new[s - 1 - n_sn],
                };
                d.0[off] ^= mask;
            } else if byte < 32 * digests + 8 {
                y.v_in ^= (mask as u64) << (8 * (7 - (byte - 32 * digests)));
            } else {
                y.v_out ^= (mask as u64) << (8 * (7 - (byte - 32 * digests - 8)));
            }
            assert_ne!(y, x);
            assert!(!verify(vk, &y, &aux, &proof), "bit {bit}");
        }
    }

    #[test]
    fn simulation_matches_honest_tag() {
        let mut rng = ChaCha20Rng::seed_from_u64(25);
        let crs = setup(&config(), &[1; 32]);
        let (x, w) = deposit(&mut rng, 3);
        let honest = prove(&crs.proving_key, &config(), &x, b"c", &w).unwrap();
        let simulated = simulate(&crs.trapdoor, &x, b"c");
        assert!(simulated.simulated);
        assert!(verify(&crs.verification_key, &x, b"c", &simulated));
        assert_eq!(honest.binding_tag, simulated.binding_tag);
    }

    #[test]
    fn proof_serde() {
        let p = Proof { binding_tag: hash(b"p"), simulated: true };
        let json = serde_json::to_string(&p).unwrap();
        let back: Proof = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_bytes(), p.to_bytes());
    }
}
