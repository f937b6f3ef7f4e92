//! The joinsplit relation: instance and witness shapes and the full
//! constraint check a valid Mix proof attests to.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{prf_addr, prf_sn, Digest256, SpendingKey};
use crate::merkle::{verify_path, MerklePath, MAX_DEPTH};
use crate::note::ZethNote;

pub const DEFAULT_INPUTS: usize = 2;
pub const DEFAULT_OUTPUTS: usize = 2;
pub const DEFAULT_TREE_DEPTH: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JoinsplitError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input {index} is not owned by the supplied spending key")]
    NotOwner { index: usize },
}

/// Number of spent notes `N`, created notes `M`, and tree depth.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub depth: usize,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self { n_inputs: DEFAULT_INPUTS, n_outputs: DEFAULT_OUTPUTS, depth: DEFAULT_TREE_DEPTH }
    }
}

impl CircuitConfig {
    pub fn new(n_inputs: usize, n_outputs: usize, depth: usize) -> Result<Self, JoinsplitError> {
        let config = Self { n_inputs, n_outputs, depth };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), JoinsplitError> {
        if self.n_inputs == 0 || self.n_outputs == 0 {
            return Err(JoinsplitError::ShapeMismatch("joinsplit needs at least one input and one output".into()));
        }
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return Err(JoinsplitError::ShapeMismatch(format!("tree depth {} out of range", self.depth)));
        }
        Ok(())
    }
}

/// Primary input `x`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub rt: Digest256,
    pub sn_old: Vec<Digest256>,
    pub cm_new: Vec<Digest256>,
    pub v_in: u64,
    pub v_out: u64,
}

impl Instance {
    /// Canonical byte encoding: `N(u32) || M(u32) || rt || sn* || cm* || v_in || v_out`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 32 * (1 + self.sn_old.len() + self.cm_new.len()) + 16);
        out.extend_from_slice(&(self.sn_old.len() as u32).to_be_bytes());
        out.extend_from_slice(&(self.cm_new.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.rt.0);
        for d in self.sn_old.iter().chain(&self.cm_new) {
            out.extend_from_slice(&d.0);
        }
        out.extend_from_slice(&self.v_in.to_be_bytes());
        out.extend_from_slice(&self.v_out.to_be_bytes());
        out
    }
}

/// Auxiliary data for one spent note.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct InputWitness {
    /// `cmAddr`: leaf address the note is claimed to occupy.
    pub address: u64,
    /// `cm_old`: the leaf the path authenticates.
    pub commitment: Digest256,
    pub note: ZethNote,
    pub path: MerklePath,
    pub a_sk: SpendingKey,
}

/// Auxiliary input `w`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub inputs: Vec<InputWitness>,
    pub outputs: Vec<ZethNote>,
}

/// One violated constraint.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Violation {
    /// (a) `cm_new_j` is not the commitment of output note `j`.
    OutputCommitment { index: usize },
    /// (b) `cm_old_i` is not the commitment of input note `i`.
    InputCommitment { index: usize },
    /// (c) `a_pk_old_i != PRF^addr(a_sk_old_i, 0)`.
    SpendAuthority { index: usize },
    /// (d) `sn_old_i != PRF^sn(a_sk_old_i, rho_old_i)`.
    SerialNumber { index: usize },
    /// (e) positive-valued input without a valid path to `rt`.
    Membership { index: usize },
    /// (f) `v_in + sum(v_old) != sum(v_new) + v_out`.
    Balance,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct RelationReport {
    pub violations: Vec<Violation>,
}

impl RelationReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for RelationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("satisfied");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| format!("{v:?}")).collect();
        f.write_str(&parts.join(", "))
    }
}

fn check_shape(config: &CircuitConfig, x: &Instance, w: &Witness) -> Result<(), JoinsplitError> {
    let (n, m) = (config.n_inputs, config.n_outputs);
    let mismatch = |what: &str, got: usize, want: usize| {
        Err(JoinsplitError::ShapeMismatch(format!("{what}: got {got}, expected {want}")))
    };
    if x.sn_old.len() != n {
        return mismatch("serial numbers", x.sn_old.len(), n);
    }
    if x.cm_new.len() != m {
        return mismatch("new commitments", x.cm_new.len(), m);
    }
    if w.inputs.len() != n {
        return mismatch("witness inputs", w.inputs.len(), n);
    }
    if w.outputs.len() != m {
        return mismatch("witness outputs", w.outputs.len(), m);
    }
    for input in &w.inputs {
        if input.path.siblings.len() != config.depth || input.path.directions.len() != config.depth {
            return mismatch("merkle path length", input.path.siblings.len(), config.depth);
        }
    }
    Ok(())
}

/// Evaluates every clause and reports all that fail.
pub fn check_relation(config: &CircuitConfig, x: &Instance, w: &Witness) -> Result<RelationReport, JoinsplitError> {
    check_shape(config, x, w)?;
    let mut violations = Vec::new();

    for (j, (cm, note)) in x.cm_new.iter().zip(&w.outputs).enumerate() {
        if note.commitment() != *cm {
            violations.push(Violation::OutputCommitment { index: j });
        }
    }

    for (i, (sn, input)) in x.sn_old.iter().zip(&w.inputs).enumerate() {
        if input.note.commitment() != input.commitment {
            violations.push(Violation::InputCommitment { index: i });
        }
        if prf_addr(&input.a_sk, 0) != input.note.a_pk {
            violations.push(Violation::SpendAuthority { index: i });
        }
        if prf_sn(&input.a_sk, &input.note.rho) != *sn {
            violations.push(Violation::SerialNumber { index: i });
        }
        // e = 1 iff the path authenticates cm_old at cmAddr under rt; v * (1 - e) = 0.
        let e = input.path.leaf_address == input.address && verify_path(&input.commitment, &input.path, &x.rt);
        if input.note.value > 0 && !e {
            violations.push(Violation::Membership { index: i });
        }
    }

    let lhs = u128::from(x.v_in) + w.inputs.iter().map(|i| u128::from(i.note.value)).sum::<u128>();
    let rhs = u128::from(x.v_out) + w.outputs.iter().map(|n| u128::from(n.value)).sum::<u128>();
    if lhs != rhs {
        violations.push(Violation::Balance);
    }

    Ok(RelationReport { violations })
}

/// A note to spend together with the data proving it is in the tree.
#[derive(Clone, Debug)]
pub struct SpendInput {
    pub note: ZethNote,
    pub a_sk: SpendingKey,
    pub address: u64,
    pub path: MerklePath,
}

/// Assembles `(x, w)` from wallet data. Consistency of values and paths is
/// not checked here; `check_relation` reports any mismatch.
pub fn build_instance(
    config: &CircuitConfig,
    inputs: Vec<SpendInput>,
    outputs: Vec<ZethNote>,
    v_in: u64,
    v_out: u64,
    rt: Digest256,
) -> Result<(Instance, Witness), JoinsplitError> {
    if inputs.len() != config.n_inputs || outputs.len() != config.n_outputs {
        return Err(JoinsplitError::ShapeMismatch(format!(
            "got {} inputs and {} outputs, circuit takes {} and {}",
            inputs.len(),
            outputs.len(),
            config.n_inputs,
            config.n_outputs
        )));
    }
    let mut sn_old = Vec::with_capacity(inputs.len());
    let mut witness_inputs = Vec::with_capacity(inputs.len());
    for (index, input) in inputs.into_iter().enumerate() {
        let sn = input.note.serial_number(&input.a_sk).map_err(|_| JoinsplitError::NotOwner { index })?;
        sn_old.push(sn);
        witness_inputs.push(InputWitness {
            address: input.address,
            commitment: input.note.commitment(),
            note: input.note,
            path: input.path,
            a_sk: input.a_sk,
        });
    }
    let cm_new = outputs.iter().map(ZethNote::commitment).collect();
    Ok((Instance { rt, sn_old, cm_new, v_in, v_out }, Witness { inputs: witness_inputs, outputs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merkle::MerkleTree;
    use crate::note::ZethAddress;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const DEPTH: usize = 4;

    fn cfg() -> CircuitConfig {
        CircuitConfig::new(2, 2, DEPTH).unwrap()
    }

    fn dummy(owner: &ZethAddress, rng: &mut ChaCha20Rng) -> SpendInput {
        SpendInput {
            note: ZethNote::random(owner.a_pk, 0, rng),
            a_sk: owner.a_sk,
            address: 0,
            path: MerklePath::dummy(DEPTH),
        }
    }

    #[test]
    fn deposit_with_dummy_inputs() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let alice = ZethAddress::random(&mut rng);
        let inputs = vec![dummy(&alice, &mut rng), dummy(&alice, &mut rng)];
        let outputs = vec![ZethNote::random(alice.a_pk, 5, &mut rng), ZethNote::random(alice.a_pk, 2, &mut rng)];
        let rt = MerkleTree::new(DEPTH).unwrap().root();
        let (x, w) = build_instance(&cfg(), inputs, outputs, 7, 0, rt).unwrap();
        assert!(check_relation(&cfg(), &x, &w).unwrap().is_satisfied());
    }

    #[test]
    fn balance_violation() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let alice = ZethAddress::random(&mut rng);
        let inputs = vec![dummy(&alice, &mut rng), dummy(&alice, &mut rng)];
        let outputs = vec![ZethNote::random(alice.a_pk, 1, &mut rng), ZethNote::random(alice.a_pk, 2, &mut rng)];
        let rt = MerkleTree::new(DEPTH).unwrap().root();
        let (x, w) = build_instance(&cfg(), inputs, outputs, 1, 0, rt).unwrap();
        let report = check_relation(&cfg(), &x, &w).unwrap();
        assert_eq!(report.violations, vec![Violation::Balance]);
    }

    fn transfer_fixture(rng: &mut ChaCha20Rng) -> (Instance, Witness) {
        let alice = ZethAddress::random(rng);
        let bob = ZethAddress::random(rng);
        let mut tree = MerkleTree::new(DEPTH).unwrap();
        tree.append(ZethNote::random(bob.a_pk, 1, rng).commitment()).unwrap();
        let owned = ZethNote::random(alice.a_pk, 9, rng);
        let address = tree.append(owned.commitment()).unwrap();
        let inputs = vec![
            SpendInput { note: owned, a_sk: alice.a_sk, address, path: tree.path(address).unwrap() },
            dummy(&alice, rng),
        ];
        let outputs = vec![ZethNote::random(bob.a_pk, 9, rng), ZethNote::random(alice.a_pk, 0, rng)];
        build_instance(&cfg(), inputs, outputs, 0, 0, tree.root()).unwrap()
    }

    #[test]
    fn full_transfer_passes() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let (x, w) = transfer_fixture(&mut rng);
        assert!(check_relation(&cfg(), &x, &w).unwrap().is_satisfied());
    }

    #[test]
    fn corrupted_path_of_valued_note_fails_membership() {
        let mut rng = ChaCha20Rng::seed_from_u64(14);
        let (x, mut w) = transfer_fixture(&mut rng);
        w.inputs[0].path.siblings[2].0[0] ^= 1;
        let report = check_relation(&cfg(), &x, &w).unwrap();
        assert_eq!(report.violations, vec![Violation::Membership { index: 0 }]);
    }

    #[test]
    fn dummy_path_mutation_is_exempt() {
        let mut rng = ChaCha20Rng::seed_from_u64(15);
        let (x, mut w) = transfer_fixture(&mut rng);
        w.inputs[1].path.siblings[0].0[0] ^= 1;
        w.inputs[1].address = 3;
        assert!(check_relation(&cfg(), &x, &w).unwrap().is_satisfied());
    }

    #[test]
    fn balance_is_exact_near_u64_max() {
        let mut rng = ChaCha20Rng::seed_from_u64(16);
        let alice = ZethAddress::random(&mut rng);
        let mut tree = MerkleTree::new(DEPTH).unwrap();
        let a = ZethNote::random(alice.a_pk, 1, &mut rng);
        let b = ZethNote::random(alice.a_pk, 1, &mut rng);
        let ia = tree.append(a.commitment()).unwrap();
        let ib = tree.append(b.commitment()).unwrap();
        let inputs = vec![
            SpendInput { note: a, a_sk: alice.a_sk, address: ia, path: tree.path(ia).unwrap() },
            SpendInput { note: b, a_sk: alice.a_sk, address: ib, path: tree.path(ib).unwrap() },
        ];
        // 2^64 - 1 + 2 wraps to 1 in u64; the outputs sum to 1.
        let outputs = vec![ZethNote::random(alice.a_pk, 1, &mut rng), ZethNote::random(alice.a_pk, 0, &mut rng)];
        let (x, w) = build_instance(&cfg(), inputs, outputs, u64::MAX, 0, tree.root()).unwrap();
        assert_eq!(check_relation(&cfg(), &x, &w).unwrap().violations, vec![Violation::Balance]);
    }

    #[test]
    fn shape_and_ownership_errors() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let alice = ZethAddress::random(&mut rng);
        let mallory = ZethAddress::random(&mut rng);
        let rt = MerkleTree::new(DEPTH).unwrap().root();
        let outputs = vec![ZethNote::random(alice.a_pk, 0, &mut rng), ZethNote::random(alice.a_pk, 0, &mut rng)];
        let mut stolen = dummy(&alice, &mut rng);
        stolen.a_sk = mallory.a_sk;
        let err = build_instance(&cfg(), vec![dummy(&alice, &mut rng), stolen], outputs.clone(), 0, 0, rt);
        assert_eq!(err.unwrap_err(), JoinsplitError::NotOwner { index: 1 });
        let err = build_instance(&cfg(), vec![dummy(&alice, &mut rng)], outputs, 0, 0, rt);
        assert!(matches!(err, Err(JoinsplitError::ShapeMismatch(_))));

        let (mut x, w) = transfer_fixture(&mut rng);
        x.sn_old.pop();
        assert!(matches!(check_relation(&cfg(), &x, &w), Err(JoinsplitError::ShapeMismatch(_))));
        assert!(CircuitConfig::new(0, 2, 4).is_err());
        assert!(CircuitConfig::new(2, 2, 0).is_err());
    }

    #[test]
    fn instance_encoding_is_injective_on_counts() {
        let x = Instance {
            rt: Digest256::default(),
            sn_old: vec![],
            cm_new: vec![Digest256::default()],
            v_in: 0,
            v_out: 0,
        };
        let y = Instance {
            rt: Digest256::default(),
            sn_old: vec![Digest256::default()],
            cm_new: vec![],
            v_in: 0,
            v_out: 0,
        };
        assert_ne!(x.encode(), y.encode());
    }
}
