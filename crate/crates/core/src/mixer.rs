//! The mixer contract and the address registry it is deployed alongside.
//!
//! `Mixer::mix` runs its checks in a fixed order: root history, serial
//! numbers, proof, attached value, leaf insertion, payout, root update,
//! broadcasts. Any abort is rolled back by the ledger, including serials
//! inserted before the failing check.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::Digest256;
use crate::crypto::NoteCiphertext;
use crate::gas::{verifier_gas, GasSchedule, DEFAULT_INSTANCE_ELEMENTS};
use crate::joinsplit::{CircuitConfig, Instance};
use crate::ledger::{CallContext, Contract, ExecError};
use crate::merkle::{MerkleError, MerkleTree};
use crate::note::AddressPublic;
use crate::proof::{verify, Proof, VerificationKey};

/// Arguments of a Mix call.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MixTransaction {
    pub rt: Digest256,
    pub sn_old: Vec<Digest256>,
    pub cm_new: Vec<Digest256>,
    pub proof: Proof,
    pub v_in: u64,
    pub v_out: u64,
    pub ciphertexts: Vec<NoteCiphertext>,
}

impl MixTransaction {
    pub fn instance(&self) -> Instance {
        Instance {
            rt: self.rt,
            sn_old: self.sn_old.clone(),
            cm_new: self.cm_new.clone(),
            v_in: self.v_in,
            v_out: self.v_out,
        }
    }

    pub fn aux_binding(&self) -> Vec<u8> {
        aux_binding(&self.ciphertexts)
    }
}

/// Bytes the proof binds beyond the instance: all ciphertexts, concatenated.
pub fn aux_binding(ciphertexts: &[NoteCiphertext]) -> Vec<u8> {
    let mut out = Vec::new();
    for c in ciphertexts {
        out.extend_from_slice(&(c.len() as u32).to_be_bytes());
        out.extend_from_slice(&c.to_bytes());
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum MixerError {
    #[error("malformed call: {reason}")]
    Shape { reason: String },
    #[error("root {root} was never produced by this mixer")]
    UnknownRoot { root: Digest256 },
    #[error("serial number {serial} already spent")]
    DoubleSpend { serial: Digest256 },
    #[error("proof rejected")]
    InvalidProof,
    #[error("v_in is {declared} but {attached} Wei were attached")]
    ValueMismatch { declared: u64, attached: u128 },
    #[error("commitment tree is full")]
    TreeFull,
    #[error("payout of {requested} exceeds contract balance {available}")]
    InsufficientContractBalance { requested: u128, available: u128 },
}

/// Public logs of the mixer and registry.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum ZethEvent {
    CiphertextBroadcast { index: u32, hex: NoteCiphertext },
    CommitmentAppended { leaf_address: u64, hex: Digest256 },
    MerkleRoot { hex: Digest256 },
    AddressRegistered { name: String, address: AddressPublic },
}

/// Mixer storage.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Mixer {
    config: CircuitConfig,
    tree: MerkleTree,
    /// Insertion ordered; the last entry is always the current root.
    root_history: IndexSet<Digest256>,
    spent_serials: BTreeSet<Digest256>,
    vk: VerificationKey,
    gas: GasSchedule,
    instance_elements: u64,
    stale_root_accepts: u64,
}

impl Mixer {
    pub fn new(vk: VerificationKey, gas: GasSchedule) -> Result<Self, MerkleError> {
        let config = vk.config;
        let tree = MerkleTree::new(config.depth)?;
        let mut root_history = IndexSet::new();
        root_history.insert(tree.root());
        Ok(Self {
            config,
            tree,
            root_history,
            spent_serials: BTreeSet::new(),
            vk,
            gas,
            instance_elements: DEFAULT_INSTANCE_ELEMENTS,
            stale_root_accepts: 0,
        })
    }

    /// Overrides the number of public inputs the verifier is charged for.
    pub fn with_instance_elements(mut self, n: u64) -> Self {
        self.instance_elements = n;
        self
    }

    pub fn config(&self) -> &CircuitConfig {
        &self.config
    }

    pub fn gas_schedule(&self) -> &GasSchedule {
        &self.gas
    }

    pub fn instance_elements(&self) -> u64 {
        self.instance_elements
    }

    pub fn tree(&self) -> &MerkleTree {
        &self.tree
    }

    pub fn current_root(&self) -> Digest256 {
        *self.root_history.last().expect("history holds the initial root")
    }

    pub fn roots(&self) -> Vec<Digest256> {
        self.root_history.iter().copied().collect()
    }

    pub fn knows_root(&self, rt: &Digest256) -> bool {
        self.root_history.contains(rt)
    }

    pub fn is_spent(&self, sn: &Digest256) -> bool {
        self.spent_serials.contains(sn)
    }

    pub fn spent_serials(&self) -> &BTreeSet<Digest256> {
        &self.spent_serials
    }

    /// Accepted calls whose root was not the current one at the time.
    pub fn stale_root_accepts(&self) -> u64 {
        self.stale_root_accepts
    }

    pub fn mix(&mut self, tx: &MixTransaction, ctx: &mut CallContext<ZethEvent>) -> Result<(), ExecError<MixerError>> {
        let fail = |e| Err(ExecError::Contract(e));
        let n = self.config.n_inputs;
        let m = self.config.n_outputs;
        if tx.sn_old.len() != n || tx.cm_new.len() != m || tx.ciphertexts.len() != m {
            return fail(MixerError::Shape {
                reason: format!(
                    "expected {n} serials, {m} commitments, {m} ciphertexts; got {}, {}, {}",
                    tx.sn_old.len(),
                    tx.cm_new.len(),
                    tx.ciphertexts.len()
                ),
            });
        }
        let write = self.gas.storage_write_gas;
        ctx.charge(write)?;

        if !self.root_history.contains(&tx.rt) {
            return fail(MixerError::UnknownRoot { root: tx.rt });
        }
        for sn in &tx.sn_old {
            if !self.spent_serials.insert(*sn) {
                return fail(MixerError::DoubleSpend { serial: *sn });
            }
            ctx.charge(write)?;
        }

        ctx.charge(verifier_gas(self.instance_elements, &self.gas).total)?;
        if !verify(&self.vk, &tx.instance(), &tx.aux_binding(), &tx.proof) {
            return fail(MixerError::InvalidProof);
        }

        if u128::from(tx.v_in) != ctx.value() {
            return fail(MixerError::ValueMismatch { declared: tx.v_in, attached: ctx.value() });
        }

        let stale = tx.rt != self.current_root();
        let mut leaf_addresses = Vec::with_capacity(m);
        for cm in &tx.cm_new {
            match self.tree.append(*cm) {
                Ok(addr) => leaf_addresses.push(addr),
                Err(_) => return fail(MixerError::TreeFull),
            }
            ctx.charge(write)?;
        }

        if tx.v_out > 0 {
            let to = ctx.sender();
            if let Err(e) = ctx.send_value(to, u128::from(tx.v_out)) {
                return fail(MixerError::InsufficientContractBalance {
                    requested: e.requested,
                    available: e.available,
                });
            }
        }

        let root = self.tree.root();
        self.root_history.insert(root);
        ctx.charge(write)?;
        if stale {
            self.stale_root_accepts += 1;
        }

        for (index, c) in tx.ciphertexts.iter().enumerate() {
            ctx.emit(ZethEvent::CiphertextBroadcast { index: index as u32, hex: c.clone() });
        }
        for (cm, leaf_address) in tx.cm_new.iter().zip(leaf_addresses) {
            ctx.emit(ZethEvent::CommitmentAppended { leaf_address, hex: *cm });
        }
        ctx.emit(ZethEvent::MerkleRoot { hex: root });
        Ok(())
    }
}

impl Contract for Mixer {
    type Call = MixTransaction;
    type Event = ZethEvent;
    type Error = MixerError;

    fn execute(
        &mut self,
        call: &MixTransaction,
        ctx: &mut CallContext<ZethEvent>,
    ) -> Result<(), ExecError<MixerError>> {
        self.mix(call, ctx)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum RegistryError {
    #[error("name {name} is already registered")]
    NameTaken { name: String },
    #[error("the registry does not accept value")]
    NotPayable,
}

/// Public list of named zethAddresses.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Registry {
    entries: BTreeMap<String, AddressPublic>,
}

impl Registry {
    pub fn lookup(&self, name: &str) -> Option<&AddressPublic> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &AddressPublic)> {
        self.entries.iter()
    }

    pub fn register(
        &mut self,
        name: &str,
        address: AddressPublic,
        ctx: &mut CallContext<ZethEvent>,
        write_gas: u64,
    ) -> Result<(), ExecError<RegistryError>> {
        if ctx.value() != 0 {
            return Err(ExecError::Contract(RegistryError::NotPayable));
        }
        if self.entries.contains_key(name) {
            return Err(ExecError::Contract(RegistryError::NameTaken { name: name.to_owned() }));
        }
        ctx.charge(write_gas)?;
        self.entries.insert(name.to_owned(), address);
        ctx.emit(ZethEvent::AddressRegistered { name: name.to_owned(), address });
        Ok(())
    }
}

/// The contracts of a ZETH deployment, hosted on one ledger.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "contract", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ZethContract {
    Mixer(Mixer),
    Registry(Registry),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ZethCall {
    Mix(MixTransaction),
    Register { name: String, address: AddressPublic },
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZethError {
    #[error(transparent)]
    Mixer(MixerError),
    #[error(transparent)]
    Registry(RegistryError),
    #[error("method not offered by this contract")]
    NoSuchMethod,
}

impl ZethContract {
    pub fn as_mixer(&self) -> Option<&Mixer> {
        match self {
            ZethContract::Mixer(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_registry(&self) -> Option<&Registry> {
        match self {
            ZethContract::Registry(r) => Some(r),
            _ => None,
        }
    }
}

/// Storage-write cost charged for a registry entry.
const REGISTRY_WRITE_GAS: u64 = 20_000;

impl Contract for ZethContract {
    type Call = ZethCall;
    type Event = ZethEvent;
    type Error = ZethError;

    fn execute(&mut self, call: &ZethCall, ctx: &mut CallContext<ZethEvent>) -> Result<(), ExecError<ZethError>> {
        fn lift<E>(r: Result<(), ExecError<E>>, f: fn(E) -> ZethError) -> Result<(), ExecError<ZethError>> {
            r.map_err(|e| match e {
                ExecError::OutOfGas => ExecError::OutOfGas,
                ExecError::Contract(e) => ExecError::Contract(f(e)),
            })
        }
        match (self, call) {
            (ZethContract::Mixer(m), ZethCall::Mix(tx)) => lift(m.mix(tx, ctx), ZethError::Mixer),
            (ZethContract::Registry(r), ZethCall::Register { name, address }) => {
                lift(r.register(name, *address, ctx, REGISTRY_WRITE_GAS), ZethError::Registry)
            }
            _ => Err(ExecError::Contract(ZethError::NoSuchMethod)),
        }
    }
}
