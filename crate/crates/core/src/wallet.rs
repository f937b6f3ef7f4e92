//! User-side payment construction and note scanning.

use std::collections::{BTreeMap, BTreeSet};

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{Digest256, NoteEncryption};
use crate::joinsplit::{build_instance, JoinsplitError, SpendInput};
use crate::ledger::{Address, EventRecord};
use crate::merkle::{MerklePath, MerkleTree};
use crate::mixer::{aux_binding, MixTransaction, Mixer, ZethEvent};
use crate::note::{AddressPublic, ZethAddress, ZethNote};
use crate::proof::{prove, ProveError, ProvingKey};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoteStatus {
    Unspent,
    /// Input of a submitted call whose outcome is not yet settled.
    Pending,
    Spent,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OwnedNote {
    pub note: ZethNote,
    pub commitment: Digest256,
    pub leaf_address: u64,
    /// Index into the wallet's address list.
    pub owner: usize,
    pub status: NoteStatus,
}

#[derive(Debug, Error)]
pub enum WalletError {
    #[error("insufficient notes: need {needed}, can cover {available}")]
    InsufficientNotes { needed: u64, available: u64 },
    #[error("{requested} outputs requested, the circuit has {max}")]
    TooManyRecipients { requested: usize, max: usize },
    #[error("unbalanced request: {0}")]
    UnbalancedRequest(String),
    #[error("root {0} is not in the mixer's history")]
    UnknownRoot(Digest256),
    #[error("note {0} is not an unspent note of this wallet")]
    UnknownNote(Digest256),
    #[error(transparent)]
    Shape(#[from] JoinsplitError),
    #[error(transparent)]
    Prove(#[from] ProveError),
}

/// Which root the membership proofs are built against.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum RootChoice {
    #[default]
    Current,
    /// Any earlier root still in the mixer's history.
    Historical(Digest256),
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PaymentOptions {
    pub root: RootChoice,
    /// Spend exactly these notes instead of the automatic selection.
    pub inputs: Option<Vec<Digest256>>,
}

/// A proved Mix call ready for submission.
#[derive(Clone, Debug)]
pub struct PreparedPayment {
    pub tx: MixTransaction,
    /// Wei to attach; equals `tx.v_in`.
    pub value: u128,
    /// Commitments of the notes being spent.
    pub spends: Vec<Digest256>,
    pub outputs: Vec<ZethNote>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PaymentVerdict {
    pub expected: u64,
    pub received: u64,
    pub accepted: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Wallet {
    /// `addresses[0]` receives change and padding notes.
    addresses: Vec<ZethAddress>,
    notes: Vec<OwnedNote>,
    cursor: u64,
    account: Address,
    /// Commitments accepted by the most recent receive pass.
    last_received: Vec<Digest256>,
}

impl Wallet {
    pub fn new(address: ZethAddress, account: Address) -> Self {
        Self { addresses: vec![address], notes: Vec::new(), cursor: 0, account, last_received: Vec::new() }
    }

    pub fn add_address(&mut self, address: ZethAddress) -> usize {
        self.addresses.push(address);
        self.addresses.len() - 1
    }

    pub fn address(&self) -> &ZethAddress {
        &self.addresses[0]
    }

    pub fn addresses(&self) -> &[ZethAddress] {
        &self.addresses
    }

    pub fn public(&self) -> AddressPublic {
        self.addresses[0].public()
    }

    pub fn account(&self) -> Address {
        self.account
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn notes(&self) -> &[OwnedNote] {
        &self.notes
    }

    pub fn unspent(&self) -> impl Iterator<Item = &OwnedNote> {
        self.notes.iter().filter(|n| n.status == NoteStatus::Unspent)
    }

    pub fn balance(&self) -> u64 {
        self.unspent().map(|n| n.note.value).sum()
    }

    /// Spends unspent notes to pay `recipients` plus `v_out` out of the pool,
    /// topped up by `v_in` Wei from the caller's account. Selected inputs are
    /// marked pending until [`Wallet::settle`].
    #[allow(clippy::too_many_arguments)]
    pub fn make_payment<R: RngCore + CryptoRng>(
        &mut self,
        mixer: &Mixer,
        pk: &ProvingKey,
        scheme: &dyn NoteEncryption,
        recipients: &[(AddressPublic, u64)],
        v_in: u64,
        v_out: u64,
        options: &PaymentOptions,
        rng: &mut R,
    ) -> Result<PreparedPayment, WalletError> {
        let config = *mixer.config();
        if recipients.len() > config.n_outputs {
            return Err(WalletError::TooManyRecipients { requested: recipients.len(), max: config.n_outputs });
        }
        let paid = recipients
            .iter()
            .try_fold(u64::from(0u8), |acc, (_, v)| acc.checked_add(*v))
            .and_then(|s| s.checked_add(v_out))
            .ok_or_else(|| WalletError::UnbalancedRequest("output total exceeds 64 bits".into()))?;
        if v_in > paid {
            return Err(WalletError::UnbalancedRequest(format!("v_in {v_in} exceeds recipients plus v_out ({paid})")));
        }
        let need = paid - v_in;

        let (rt, tree) = match options.root {
            RootChoice::Current => (mixer.current_root(), mixer.tree().clone()),
            RootChoice::Historical(rt) => (rt, tree_at_root(mixer, &rt).ok_or(WalletError::UnknownRoot(rt))?),
        };

        let selected = match &options.inputs {
            Some(chosen) => self.explicit_inputs(chosen, &tree, config.n_inputs)?,
            None => self.select(need, &tree, config.n_inputs)?,
        };
        let total_in: u64 = selected.iter().map(|&i| self.notes[i].note.value).sum();
        if total_in < need {
            return Err(WalletError::InsufficientNotes { needed: need, available: total_in });
        }
        let change = total_in - need;
        let slots = recipients.len() + usize::from(change > 0);
        if slots > config.n_outputs {
            return Err(WalletError::TooManyRecipients { requested: slots, max: config.n_outputs });
        }

        let me = self.addresses[0].clone();
        let mut inputs = Vec::with_capacity(config.n_inputs);
        for &i in &selected {
            let owned = &self.notes[i];
            inputs.push(SpendInput {
                note: owned.note.clone(),
                a_sk: self.addresses[owned.owner].a_sk,
                address: owned.leaf_address,
                path: tree.path(owned.leaf_address).expect("selected notes lie in the chosen tree"),
            });
        }
        while inputs.len() < config.n_inputs {
            inputs.push(SpendInput {
                note: ZethNote::random(me.a_pk, 0, rng),
                a_sk: me.a_sk,
                address: 0,
                path: MerklePath::dummy(config.depth),
            });
        }

        let mut targets: Vec<(AddressPublic, u64)> = recipients.to_vec();
        if change > 0 {
            targets.push((me.public(), change));
        }
        while targets.len() < config.n_outputs {
            targets.push((me.public(), 0));
        }
        let outputs: Vec<ZethNote> = targets.iter().map(|(to, v)| ZethNote::random(to.a_pk, *v, rng)).collect();
        let ciphertexts: Vec<_> = outputs
            .iter()
            .zip(&targets)
            .map(|(note, (to, _))| scheme.encrypt(&to.k_pk, &note.to_bytes(), &rng.gen()))
            .collect();

        let (x, w) = build_instance(&config, inputs, outputs.clone(), v_in, v_out, rt)?;
        let aux = aux_binding(&ciphertexts);
        let proof = prove(pk, &config, &x, &aux, &w)?;

        let spends = selected.iter().map(|&i| self.notes[i].commitment).collect();
        for &i in &selected {
            self.notes[i].status = NoteStatus::Pending;
        }
        Ok(PreparedPayment {
            tx: MixTransaction { rt, sn_old: x.sn_old, cm_new: x.cm_new, proof, v_in, v_out, ciphertexts },
            value: u128::from(v_in),
            spends,
            outputs,
        })
    }

    /// Pays `parts` back to this wallet; any remainder of the selected notes
    /// returns as change.
    pub fn self_split<R: RngCore + CryptoRng>(
        &mut self,
        mixer: &Mixer,
        pk: &ProvingKey,
        scheme: &dyn NoteEncryption,
        parts: &[u64],
        rng: &mut R,
    ) -> Result<PreparedPayment, WalletError> {
        let me = self.public();
        let recipients: Vec<_> = parts.iter().map(|&v| (me, v)).collect();
        self.make_payment(mixer, pk, scheme, &recipients, 0, 0, &PaymentOptions::default(), rng)
    }

    /// Records the outcome of a submitted payment.
    pub fn settle(&mut self, payment: &PreparedPayment, accepted: bool) {
        let status = if accepted { NoteStatus::Spent } else { NoteStatus::Unspent };
        for n in &mut self.notes {
            if n.status == NoteStatus::Pending && payment.spends.contains(&n.commitment) {
                n.status = status;
            }
        }
    }

    /// Scans events from the cursor, keeping every decryptable note whose
    /// commitment was appended by the same call and whose serial number is
    /// unspent. Returns the newly accepted notes in event order.
    pub fn receive(
        &mut self,
        events: &[EventRecord<ZethEvent>],
        mixer: &Mixer,
        scheme: &dyn NoteEncryption,
    ) -> Vec<ZethNote> {
        let fresh: Vec<_> = events.iter().filter(|e| e.index >= self.cursor).collect();
        let mut by_tx: BTreeMap<u64, (Vec<_>, BTreeMap<Digest256, u64>)> = BTreeMap::new();
        for e in &fresh {
            let entry = by_tx.entry(e.tx_index).or_default();
            match &e.event {
                ZethEvent::CiphertextBroadcast { hex, .. } => entry.0.push(hex),
                ZethEvent::CommitmentAppended { leaf_address, hex } => {
                    entry.1.insert(*hex, *leaf_address);
                }
                _ => {}
            }
        }

        let known: BTreeSet<Digest256> = self.notes.iter().map(|n| n.commitment).collect();
        let mut accepted = Vec::new();
        for (ciphertexts, appended) in by_tx.values() {
            for c in ciphertexts {
                let Some((owner, note)) = self.try_open(c, scheme) else { continue };
                let cm = note.commitment();
                let Some(&leaf_address) = appended.get(&cm) else { continue };
                let sn = note.serial_number(&self.addresses[owner].a_sk).expect("try_open checked ownership");
                if mixer.is_spent(&sn) || known.contains(&cm) || accepted.iter().any(|n: &OwnedNote| n.commitment == cm)
                {
                    continue;
                }
                accepted.push(OwnedNote { note, commitment: cm, leaf_address, owner, status: NoteStatus::Unspent });
            }
        }

        if let Some(last) = fresh.last() {
            self.cursor = last.index + 1;
        }
        self.last_received = accepted.iter().map(|n| n.commitment).collect();
        let notes = accepted.iter().map(|n| n.note.clone()).collect();
        self.notes.extend(accepted);
        notes
    }

    /// Whether the last receive pass delivered exactly `expected`.
    pub fn expect_payment(&self, expected: u64) -> PaymentVerdict {
        let received =
            self.notes.iter().filter(|n| self.last_received.contains(&n.commitment)).map(|n| n.note.value).sum();
        PaymentVerdict { expected, received, accepted: received == expected }
    }

    fn try_open(&self, c: &crate::crypto::NoteCiphertext, scheme: &dyn NoteEncryption) -> Option<(usize, ZethNote)> {
        self.addresses.iter().enumerate().find_map(|(i, addr)| {
            let bytes = scheme.decrypt(&addr.k_sk, c).ok()?;
            let note = ZethNote::from_bytes(&bytes).ok()?;
            (note.a_pk == addr.a_pk).then_some((i, note))
        })
    }

    /// Largest first, ties broken by commitment hex; zero-valued notes are never picked.
    fn select(&self, need: u64, tree: &MerkleTree, max: usize) -> Result<Vec<usize>, WalletError> {
        if need == 0 {
            return Ok(Vec::new());
        }
        let mut candidates: Vec<usize> = (0..self.notes.len())
            .filter(|&i| {
                let n = &self.notes[i];
                n.status == NoteStatus::Unspent && n.note.value > 0 && n.leaf_address < tree.len()
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            let (a, b) = (&self.notes[a], &self.notes[b]);
            b.note.value.cmp(&a.note.value).then_with(|| a.commitment.to_hex().cmp(&b.commitment.to_hex()))
        });
        let mut picked = Vec::new();
        let mut sum = 0u64;
        for i in candidates.into_iter().take(max) {
            picked.push(i);
            sum = sum.saturating_add(self.notes[i].note.value);
            if sum >= need {
                return Ok(picked);
            }
        }
        Err(WalletError::InsufficientNotes { needed: need, available: sum })
    }

    fn explicit_inputs(&self, chosen: &[Digest256], tree: &MerkleTree, max: usize) -> Result<Vec<usize>, WalletError> {
        if chosen.len() > max {
            return Err(WalletError::UnbalancedRequest(format!(
                "{} inputs chosen, the circuit takes {max}",
                chosen.len()
            )));
        }
        let mut out: Vec<usize> = Vec::with_capacity(chosen.len());
        for cm in chosen {
            let i = self
                .notes
                .iter()
                .position(|n| n.commitment == *cm && n.status == NoteStatus::Unspent && n.leaf_address < tree.len())
                .ok_or(WalletError::UnknownNote(*cm))?;
            if out.contains(&i) {
                return Err(WalletError::UnknownNote(*cm));
            }
            out.push(i);
        }
        Ok(out)
    }
}

/// Rebuilds the tree as it was when `rt` was the current root.
pub fn tree_at_root(mixer: &Mixer, rt: &Digest256) -> Option<MerkleTree> {
    if !mixer.knows_root(rt) {
        return None;
    }
    let mut tree = MerkleTree::new(mixer.config().depth).ok()?;
    if tree.root() == *rt {
        return Some(tree);
    }
    for leaf in mixer.tree().leaves() {
        tree.append(*leaf).ok()?;
        if tree.root() == *rt {
            return Some(tree);
        }
    }
    None
}
