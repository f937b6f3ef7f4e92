//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use zeth_core::joinsplit::{build_instance, SpendInput};
use zeth_core::mixer::aux_binding;
use zeth_core::proof::{prove, setup};
use zeth_core::{
    CircuitConfig, Crs, Deployment, GasSchedule, HybridEncryption, Instance, MerklePath, MerkleTree, MixTransaction,
    NoteEncryption, Witness, ZethAddress, ZethNote,
};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A tree of the given depth holding `leaves` random commitments.
pub fn filled_tree(depth: usize, leaves: usize, rng: &mut ChaCha20Rng) -> MerkleTree {
    let mut tree = MerkleTree::new(depth).expect("depth in range");
    for _ in 0..leaves {
        tree.append(zeth_core::Digest256(rng.gen())).expect("capacity");
    }
    tree
}

/// A satisfied instance spending one real note and one dummy.
pub struct JoinsplitFixture {
    pub config: CircuitConfig,
    pub crs: Crs,
    pub owner: ZethAddress,
    pub x: Instance,
    pub w: Witness,
    pub aux: Vec<u8>,
}

pub fn joinsplit_fixture(depth: usize, rng: &mut ChaCha20Rng) -> JoinsplitFixture {
    let config = CircuitConfig::new(2, 2, depth).expect("valid shape");
    let crs = setup(&config, &rng.gen());
    let owner = ZethAddress::random(rng);
    let note = ZethNote::random(owner.a_pk, 10, rng);
    let mut tree = filled_tree(depth, 31, rng);
    let address = tree.append(note.commitment()).expect("capacity");
    let inputs = vec![
        SpendInput { note, a_sk: owner.a_sk, address, path: tree.path(address).expect("leaf exists") },
        SpendInput {
            note: ZethNote::random(owner.a_pk, 0, rng),
            a_sk: owner.a_sk,
            address: 0,
            path: MerklePath::dummy(depth),
        },
    ];
    let outputs = vec![ZethNote::random(owner.a_pk, 6, rng), ZethNote::random(owner.a_pk, 4, rng)];
    let (x, w) = build_instance(&config, inputs, outputs, 0, 0, tree.root()).expect("shape matches");
    let aux = aux_binding(&[]);
    JoinsplitFixture { config, crs, owner, x, w, aux }
}

/// A deployment and a proved deposit ready to submit from `sender`.
pub fn deposit_fixture(depth: usize, rng: &mut ChaCha20Rng) -> (Deployment, Crs, MixTransaction) {
    let config = CircuitConfig::new(2, 2, depth).expect("valid shape");
    let crs = setup(&config, &rng.gen());
    let d = Deployment::new(crs.verification_key.clone(), GasSchedule::default()).expect("depth in range");
    let owner = ZethAddress::random(rng);
    let inputs = (0..2)
        .map(|_| SpendInput {
            note: ZethNote::random(owner.a_pk, 0, rng),
            a_sk: owner.a_sk,
            address: 0,
            path: MerklePath::dummy(depth),
        })
        .collect();
    let outputs = vec![ZethNote::random(owner.a_pk, 7, rng), ZethNote::random(owner.a_pk, 0, rng)];
    let cts: Vec<_> =
        outputs.iter().map(|n| HybridEncryption.encrypt(&owner.k_pk, &n.to_bytes(), &rng.gen())).collect();
    let rt = d.mixer().current_root();
    let (x, w) = build_instance(&config, inputs, outputs, 7, 0, rt).expect("shape matches");
    let proof = prove(&crs.proving_key, &config, &x, &aux_binding(&cts), &w).expect("relation holds");
    let tx = MixTransaction { rt, sn_old: x.sn_old, cm_new: x.cm_new, proof, v_in: 7, v_out: 0, ciphertexts: cts };
    (d, crs, tx)
}
