//! Balance: the adversary must not end up with more value than it put in.
//! It wins iff `v_unspent + v_publicOut + v_exp > v_publicIn + v_inc`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::crypto::{HybridEncryption, NoteEncryption};
use crate::deployment::Deployment;
use crate::gas::GasSchedule;
use crate::joinsplit::{build_instance, CircuitConfig, SpendInput};
use crate::ledger::Address;
use crate::merkle::MerklePath;
use crate::mixer::{aux_binding, MixTransaction};
use crate::note::{AddressPublic, ZethAddress, ZethNote};
use crate::proof::{prove, setup, Crs, Proof};
use crate::wallet::{PaymentOptions, Wallet, WalletError};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct BalanceTally {
    /// Value of the adversary's notes that are still spendable.
    pub v_unspent: u128,
    /// Wei the adversary deposited through `v_in`.
    pub v_public_in: u128,
    /// Wei the adversary withdrew through `v_out`.
    pub v_public_out: u128,
    /// Value of notes honest parties paid to the adversary.
    pub v_inc: u128,
    /// Value of notes honest parties received from the adversary.
    pub v_exp: u128,
}

impl BalanceTally {
    pub fn adversary_wins(&self) -> bool {
        self.v_unspent + self.v_public_out + self.v_exp > self.v_public_in + self.v_inc
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BalanceScenario {
    HonestDepositWithdraw,
    TransferReceiving,
    ForgedProof,
    DoubleSpend,
}

impl BalanceScenario {
    pub const ALL: [BalanceScenario; 4] = [
        BalanceScenario::HonestDepositWithdraw,
        BalanceScenario::TransferReceiving,
        BalanceScenario::ForgedProof,
        BalanceScenario::DoubleSpend,
    ];
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BalanceOutcome {
    pub scenario: BalanceScenario,
    pub tally: BalanceTally,
    pub won: bool,
    /// Cheating attempts refused by the wallet, the prover or the mixer.
    pub rejected_attempts: u64,
}

struct Arena {
    d: Deployment,
    crs: Crs,
    rng: ChaCha20Rng,
    adversary: Wallet,
    honest: Wallet,
    tally: BalanceTally,
    rejected: u64,
}

impl Arena {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let crs = setup(&CircuitConfig::new(2, 2, 8).expect("valid shape"), &rng.gen());
        let mut d = Deployment::new(crs.verification_key.clone(), GasSchedule::default()).expect("valid depth");
        let adv_account = Address::from_label("adversary");
        let honest_account = Address::from_label("honest");
        d.ledger.fund(adv_account, 1 << 60).expect("fresh ledger");
        d.ledger.fund(honest_account, 1 << 60).expect("fresh ledger");
        let adversary = Wallet::new(ZethAddress::random(&mut rng), adv_account);
        let honest = Wallet::new(ZethAddress::random(&mut rng), honest_account);
        Self { d, crs, rng, adversary, honest, tally: BalanceTally::default(), rejected: 0 }
    }

    fn adv_pays(&mut self, to: &[(AddressPublic, u64)], v_in: u64, v_out: u64) -> Result<MixTransaction, WalletError> {
        let p = self.adversary.make_payment(
            self.d.mixer(),
            &self.crs.proving_key,
            &HybridEncryption,
            to,
            v_in,
            v_out,
            &PaymentOptions::default(),
            &mut self.rng,
        )?;
        let ok = self.submit_adv(&p.tx);
        self.adversary.settle(&p, ok);
        Ok(p.tx)
    }

    /// Submits from the adversary's account and updates the public tallies.
    fn submit_adv(&mut self, tx: &MixTransaction) -> bool {
        let sender = self.adversary.account();
        let ok = self.d.submit_mix(sender, tx.clone(), u128::from(tx.v_in)).expect("funded").status.is_success();
        if ok {
            self.tally.v_public_in += u128::from(tx.v_in);
            self.tally.v_public_out += u128::from(tx.v_out);
            let got = self.honest.receive(self.d.ledger.events(), self.d.mixer(), &HybridEncryption);
            self.tally.v_exp += got.iter().map(|n| u128::from(n.value)).sum::<u128>();
        } else {
            self.rejected += 1;
        }
        self.adversary.receive(self.d.ledger.events(), self.d.mixer(), &HybridEncryption);
        ok
    }

    fn honest_pays(&mut self, to: &[(AddressPublic, u64)], v_in: u64) {
        let p = self
            .honest
            .make_payment(
                self.d.mixer(),
                &self.crs.proving_key,
                &HybridEncryption,
                to,
                v_in,
                0,
                &PaymentOptions::default(),
                &mut self.rng,
            )
            .expect("honest payment builds");
        let ok = self.d.submit_mix(self.honest.account(), p.tx.clone(), p.value).expect("funded").status.is_success();
        self.honest.settle(&p, ok);
        self.honest.receive(self.d.ledger.events(), self.d.mixer(), &HybridEncryption);
        let got = self.adversary.receive(self.d.ledger.events(), self.d.mixer(), &HybridEncryption);
        self.tally.v_inc += got.iter().map(|n| u128::from(n.value)).sum::<u128>();
    }

    /// Proves a spend of `note` with the adversary's key; `None` if the prover refuses.
    fn forge(&mut self, note: ZethNote, address: u64, v_out: u64) -> Option<MixTransaction> {
        let config = *self.d.mixer().config();
        let me = self.adversary.address().clone();
        let path = self.d.mixer().tree().path(address).unwrap_or_else(|_| MerklePath::dummy(config.depth));
        let mut inputs = vec![SpendInput { note, a_sk: me.a_sk, address, path }];
        inputs.push(SpendInput {
            note: ZethNote::random(me.a_pk, 0, &mut self.rng),
            a_sk: me.a_sk,
            address: 0,
            path: MerklePath::dummy(config.depth),
        });
        let outputs = vec![ZethNote::random(me.a_pk, 0, &mut self.rng), ZethNote::random(me.a_pk, 0, &mut self.rng)];
        let cts: Vec<_> =
            outputs.iter().map(|n| HybridEncryption.encrypt(&me.k_pk, &n.to_bytes(), &self.rng.gen())).collect();
        let rt = self.d.mixer().current_root();
        let (x, w) = build_instance(&config, inputs, outputs, 0, v_out, rt).ok()?;
        let proof = prove(&self.crs.proving_key, &config, &x, &aux_binding(&cts), &w).ok()?;
        Some(MixTransaction { rt, sn_old: x.sn_old, cm_new: x.cm_new, proof, v_in: 0, v_out, ciphertexts: cts })
    }

    fn finish(mut self, scenario: BalanceScenario) -> BalanceOutcome {
        let me = self.adversary.address().clone();
        let mixer = self.d.mixer();
        self.tally.v_unspent = self
            .adversary
            .notes()
            .iter()
            .filter(|n| {
                let sn = n.note.serial_number(&self.adversary.addresses()[n.owner].a_sk);
                mixer.tree().leaf(n.leaf_address) == Some(n.commitment) && sn.is_ok_and(|sn| !mixer.is_spent(&sn))
            })
            .map(|n| u128::from(n.note.value))
            .sum();
        debug_assert!(self.adversary.notes().iter().all(|n| n.note.a_pk == me.a_pk));
        BalanceOutcome {
            scenario,
            tally: self.tally,
            won: self.tally.adversary_wins(),
            rejected_attempts: self.rejected,
        }
    }
}

pub fn run_balance(scenario: BalanceScenario, seed: u64) -> BalanceOutcome {
    let mut a = Arena::new(seed);
    let me = a.adversary.public();
    match scenario {
        BalanceScenario::HonestDepositWithdraw => {
            a.adv_pays(&[(me, 10)], 10, 0).expect("deposit");
            a.adv_pays(&[], 0, 10).expect("withdrawal");
        }
        BalanceScenario::TransferReceiving => {
            let honest = a.honest.public();
            a.honest_pays(&[(honest, 6)], 6);
            a.honest_pays(&[(me, 4)], 0);
            a.adv_pays(&[(honest, 1)], 0, 0).expect("payment");
            a.adv_pays(&[], 0, 3).expect("withdrawal");
        }
        BalanceScenario::ForgedProof => {
            a.adv_pays(&[(me, 5)], 5, 0).expect("deposit");
            if a.adv_pays(&[], 0, 50).is_err() {
                a.rejected += 1;
            }
            let fake = ZethNote::random(me.a_pk, 50, &mut a.rng);
            match a.forge(fake, 0, 50) {
                None => a.rejected += 1,
                Some(tx) => {
                    a.submit_adv(&tx);
                }
            }
            let owned = a.adversary.unspent().find(|n| n.note.value == 5).cloned().expect("deposited note");
            if let Some(mut tx) = a.forge(owned.note, owned.leaf_address, 5) {
                tx.v_out = 50;
                a.submit_adv(&tx);
                tx.proof = Proof::from_bytes(&[0u8; crate::proof::PROOF_BYTES]).expect("well formed");
                a.submit_adv(&tx);
            }
        }
        BalanceScenario::DoubleSpend => {
            a.adv_pays(&[(me, 5)], 5, 0).expect("deposit");
            let owned = a.adversary.unspent().find(|n| n.note.value == 5).cloned().expect("deposited note");
            let withdraw = a.adv_pays(&[], 0, 5).expect("withdrawal");
            a.submit_adv(&withdraw);
            if let Some(tx) = a.forge(owned.note, owned.leaf_address, 5) {
                a.submit_adv(&tx);
            }
        }
    }
    a.finish(scenario)
}
