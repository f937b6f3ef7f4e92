//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use zeth_core::crypto::HybridEncryption;
use zeth_core::deployment::ZethReceipt;
use zeth_core::joinsplit::{build_instance, SpendInput};
use zeth_core::mixer::aux_binding;
use zeth_core::proof::{prove, setup};
use zeth_core::wallet::PreparedPayment;
use zeth_core::{
    Address, AddressPublic, CircuitConfig, Crs, Deployment, GasSchedule, MerklePath, MixTransaction, NoteEncryption,
    PaymentOptions, SpendingKey, Wallet, WalletError, ZethAddress, ZethNote,
};

pub struct World {
    pub d: Deployment,
    pub crs: Crs,
    pub cfg: CircuitConfig,
    pub rng: ChaCha20Rng,
    pub wallets: Vec<Wallet>,
}

impl World {
    pub fn new(depth: usize, wallets: usize, seed: u64) -> Self {
        let cfg = CircuitConfig::new(2, 2, depth).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let crs = setup(&cfg, &rng.gen());
        let mut d = Deployment::new(crs.verification_key.clone(), GasSchedule::default()).unwrap();
        let wallets = (0..wallets)
            .map(|i| {
                let account = Address::from_label(&format!("wallet-{i}"));
                d.ledger.fund(account, 1 << 80).unwrap();
                Wallet::new(ZethAddress::random(&mut rng), account)
            })
            .collect();
        Self { d, crs, cfg, rng, wallets }
    }

    pub fn public(&self, i: usize) -> AddressPublic {
        self.wallets[i].public()
    }

    pub fn prepare(
        &mut self,
        who: usize,
        to: &[(AddressPublic, u64)],
        v_in: u64,
        v_out: u64,
        opts: &PaymentOptions,
    ) -> Result<PreparedPayment, WalletError> {
        self.wallets[who].make_payment(
            self.d.mixer(),
            &self.crs.proving_key,
            &HybridEncryption,
            to,
            v_in,
            v_out,
            opts,
            &mut self.rng,
        )
    }

    pub fn submit(&mut self, who: usize, p: &PreparedPayment) -> ZethReceipt {
        let account = self.wallets[who].account();
        let receipt = self.d.submit_mix(account, p.tx.clone(), p.value).unwrap();
        self.wallets[who].settle(p, receipt.status.is_success());
        receipt
    }

    /// Builds and submits a payment; `Ok(true)` if the mixer accepted it.
    pub fn pay(&mut self, who: usize, to: &[(AddressPublic, u64)], v_in: u64, v_out: u64) -> Result<bool, WalletError> {
        let p = self.prepare(who, to, v_in, v_out, &PaymentOptions::default())?;
        Ok(self.submit(who, &p).status.is_success())
    }

    pub fn receive_all(&mut self) -> Vec<Vec<ZethNote>> {
        let events = self.d.ledger.events();
        let mixer = self.d.mixer();
        self.wallets.iter_mut().map(|w| w.receive(events, mixer, &HybridEncryption)).collect()
    }

    pub fn wallet_total(&self) -> u128 {
        self.wallets.iter().map(|w| u128::from(w.balance())).sum()
    }

    pub fn mixer_balance(&self) -> u128 {
        self.d.ledger.balance(&self.d.mixer)
    }

    /// Proves a call directly from notes, bypassing the wallet's bookkeeping.
    /// `inputs` are `(note, a_sk, leaf address)`; missing inputs become dummies.
    pub fn craft(
        &mut self,
        owner: &ZethAddress,
        inputs: &[(ZethNote, SpendingKey, u64)],
        outputs: Vec<ZethNote>,
        ciphertexts: Option<Vec<zeth_core::NoteCiphertext>>,
        v_in: u64,
        v_out: u64,
    ) -> MixTransaction {
        let tree = self.d.mixer().tree().clone();
        let mut spends: Vec<SpendInput> = inputs
            .iter()
            .map(|(note, a_sk, addr)| SpendInput {
                note: note.clone(),
                a_sk: *a_sk,
                address: *addr,
                path: tree.path(*addr).unwrap(),
            })
            .collect();
        while spends.len() < self.cfg.n_inputs {
            spends.push(SpendInput {
                note: ZethNote::random(owner.a_pk, 0, &mut self.rng),
                a_sk: owner.a_sk,
                address: 0,
                path: MerklePath::dummy(self.cfg.depth),
            });
        }
        let cts = ciphertexts.unwrap_or_else(|| {
            outputs.iter().map(|n| HybridEncryption.encrypt(&owner.k_pk, &n.to_bytes(), &self.rng.gen())).collect()
        });
        let rt = tree.root();
        let (x, w) = build_instance(&self.cfg, spends, outputs, v_in, v_out, rt).unwrap();
        let proof = prove(&self.crs.proving_key, &self.cfg, &x, &aux_binding(&cts), &w).unwrap();
        MixTransaction { rt, sn_old: x.sn_old, cm_new: x.cm_new, proof, v_in, v_out, ciphertexts: cts }
    }
}
