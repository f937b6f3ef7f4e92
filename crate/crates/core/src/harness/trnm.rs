//! Transaction non-malleability. The adversary sees an honest call before it
//! is included and tries to get a different call sharing one of its serial
//! numbers accepted from the same pre-state.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial_rng;
use crate::crypto::{HybridEncryption, NoteEncryption};
use crate::deployment::Deployment;
use crate::gas::GasSchedule;
use crate::joinsplit::CircuitConfig;
use crate::ledger::Address;
use crate::mixer::MixTransaction;
use crate::note::{AddressPublic, ZethAddress, ZethNote};
use crate::proof::setup;
use crate::wallet::{PaymentOptions, Wallet};

pub trait TrnmAdversary: Sync {
    fn name(&self) -> &'static str;
    /// Builds `tx*` from the observed call. `own` is the adversary's address.
    fn maul(&self, observed: &MixTransaction, own: &AddressPublic, rng: &mut ChaCha20Rng) -> MixTransaction;
}

/// Swaps the two note ciphertexts.
#[derive(Clone, Copy, Debug, Default)]
pub struct CiphertextSwap;

impl TrnmAdversary for CiphertextSwap {
    fn name(&self) -> &'static str {
        "ciphertext-swap"
    }

    fn maul(&self, observed: &MixTransaction, _: &AddressPublic, _: &mut ChaCha20Rng) -> MixTransaction {
        let mut tx = observed.clone();
        let last = tx.ciphertexts.len() - 1;
        tx.ciphertexts.swap(0, last);
        tx
    }
}

/// Replaces the first ciphertext with a note of the same value addressed to itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct CiphertextReplace;

impl TrnmAdversary for CiphertextReplace {
    fn name(&self) -> &'static str {
        "ciphertext-replace"
    }

    fn maul(&self, observed: &MixTransaction, own: &AddressPublic, rng: &mut ChaCha20Rng) -> MixTransaction {
        let mut tx = observed.clone();
        let note = ZethNote::random(own.a_pk, 4, rng);
        tx.cm_new[0] = note.commitment();
        tx.ciphertexts[0] = HybridEncryption.encrypt(&own.k_pk, &note.to_bytes(), &rng.gen());
        tx
    }
}

/// Keeps the proof but raises `v_out`, so that the sender of `tx*` collects more.
#[derive(Clone, Copy, Debug, Default)]
pub struct VOutRedirect;

impl TrnmAdversary for VOutRedirect {
    fn name(&self) -> &'static str {
        "v-out-redirect"
    }

    fn maul(&self, observed: &MixTransaction, _: &AddressPublic, rng: &mut ChaCha20Rng) -> MixTransaction {
        let mut tx = observed.clone();
        tx.v_out += rng.gen_range(1..=4);
        tx
    }
}

/// Resubmits the observed call unchanged; by definition never a win.
#[derive(Clone, Copy, Debug, Default)]
pub struct HonestReplay;

impl TrnmAdversary for HonestReplay {
    fn name(&self) -> &'static str {
        "honest-replay"
    }

    fn maul(&self, observed: &MixTransaction, _: &AddressPublic, _: &mut ChaCha20Rng) -> MixTransaction {
        observed.clone()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TrnmReport {
    pub game: String,
    pub adversary: String,
    pub attempts: u64,
    pub wins: u64,
    /// `tx*` accepted from the pre-state, whether or not it counts as a win.
    pub mauled_accepted: u64,
    /// Sanity check: the honest call itself is accepted from the pre-state.
    pub honest_accepted: u64,
}

pub fn run_trnm(adversary: &dyn TrnmAdversary, trials: u64, seed: u64) -> TrnmReport {
    let config = CircuitConfig::new(2, 2, 8).expect("valid shape");
    let outcomes: Vec<(bool, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, "tr-nm", t);
            let crs = setup(&config, &rng.gen());
            let mut d = Deployment::new(crs.verification_key.clone(), GasSchedule::default()).expect("valid depth");
            let honest = Address::from_label("honest");
            let attacker = Address::from_label("attacker");
            d.ledger.fund(honest, 1 << 60).expect("fresh ledger");
            d.ledger.fund(attacker, 1 << 60).expect("fresh ledger");
            let mut alice = Wallet::new(ZethAddress::random(&mut rng), honest);
            let bob = ZethAddress::random(&mut rng).public();
            let own = ZethAddress::random(&mut rng).public();

            let me = alice.public();
            let opts = PaymentOptions::default();
            let deposit = alice
                .make_payment(d.mixer(), &crs.proving_key, &HybridEncryption, &[(me, 10)], 10, 0, &opts, &mut rng)
                .expect("deposit builds");
            let ok = d.submit_mix(honest, deposit.tx.clone(), deposit.value).expect("funded").status.is_success();
            alice.settle(&deposit, ok);
            alice.receive(d.ledger.events(), d.mixer(), &HybridEncryption);
            let payment = alice
                .make_payment(d.mixer(), &crs.proving_key, &HybridEncryption, &[(bob, 4)], 0, 2, &opts, &mut rng)
                .expect("payment builds");
            let observed = payment.tx;

            let honest_ok = d.clone().submit_mix(honest, observed.clone(), 0).expect("funded").status.is_success();
            let mauled = adversary.maul(&observed, &own, &mut rng);
            let shares_serial = mauled.sn_old.iter().any(|sn| observed.sn_old.contains(sn));
            let accepted =
                d.submit_mix(attacker, mauled.clone(), u128::from(mauled.v_in)).expect("funded").status.is_success();
            (shares_serial && mauled != observed && accepted, accepted, honest_ok)
        })
        .collect();
    TrnmReport {
        game: "tr-nm".into(),
        adversary: adversary.name().into(),
        attempts: trials,
        wins: outcomes.iter().filter(|o| o.0).count() as u64,
        mauled_accepted: outcomes.iter().filter(|o| o.1).count() as u64,
        honest_accepted: outcomes.iter().filter(|o| o.2).count() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mauling_never_wins() {
        for adv in [&CiphertextSwap as &dyn TrnmAdversary, &CiphertextReplace, &VOutRedirect] {
            let r = run_trnm(adv, 40, 9);
            assert_eq!((r.wins, r.mauled_accepted, r.honest_accepted), (0, 0, 40), "{r:?}");
        }
    }

    #[test]
    fn identical_resubmission_is_accepted_but_not_a_win() {
        let r = run_trnm(&HonestReplay, 10, 9);
        assert_eq!(r.wins, 0);
        assert_eq!(r.mauled_accepted, 10);
    }
}
