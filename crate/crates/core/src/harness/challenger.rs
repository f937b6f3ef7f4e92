//! The challenger's side of the query interface: it owns the address set
//! `ADDR`, the note set `NOTE` and one mixer deployment, and answers
//! `CreateAddress`, `Mix`, `Receive` and `Insert`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::crypto::{Digest256, NoteEncryption};
use crate::deployment::Deployment;
use crate::gas::GasSchedule;
use crate::ledger::{Address, LedgerError, TxStatus};
use crate::merkle::MerkleError;
use crate::mixer::{MixTransaction, ZethError};
use crate::note::{AddressPublic, ZethAddress, ZethNote};
use crate::proof::{Crs, ProvingKey};
use crate::wallet::{PaymentOptions, PreparedPayment, Wallet, WalletError};

/// Wei given to the challenger's calling account.
const RELAYER_FUNDS: u128 = 1 << 100;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Query {
    CreateAddress,
    /// Payment from `ADDR[sender]` to `ADDR[i]` for each `(i, value)`.
    Mix {
        sender: usize,
        recipients: Vec<(usize, u64)>,
        v_in: u64,
        v_out: u64,
    },
    Receive {
        address: usize,
    },
    /// A raw call built by the adversary, followed by a receive pass for every address.
    Insert {
        tx: MixTransaction,
        value: u128,
    },
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Query::CreateAddress => "create_address",
            Query::Mix { .. } => "mix",
            Query::Receive { .. } => "receive",
            Query::Insert { .. } => "insert",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Response {
    Address(AddressPublic),
    Mixed {
        tx: MixTransaction,
    },
    /// Commitments of the accepted notes, in event order.
    Received {
        commitments: Vec<Digest256>,
    },
    /// Per address, the commitments the follow-up receive pass accepted.
    Inserted {
        received: Vec<Vec<Digest256>>,
    },
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("no address with index {0}")]
    UnknownAddress(usize),
    #[error(transparent)]
    Wallet(#[from] WalletError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("mixer aborted: {0}")]
    Aborted(ZethError),
    #[error("queries are not publicly consistent: {0}")]
    InconsistentPair(String),
}

pub struct Challenger<'a> {
    deployment: Deployment,
    pk: ProvingKey,
    scheme: &'a dyn NoteEncryption,
    wallets: Vec<Wallet>,
    notes: Vec<ZethNote>,
    /// Every call is sent from this one account so callers reveal nothing.
    relayer: Address,
    rng: ChaCha20Rng,
}

impl<'a> Challenger<'a> {
    pub fn new(
        crs: &Crs,
        gas: GasSchedule,
        scheme: &'a dyn NoteEncryption,
        seed: [u8; 32],
    ) -> Result<Self, MerkleError> {
        let mut deployment = Deployment::new(crs.verification_key.clone(), gas)?;
        let relayer = Address::from_label("challenger");
        deployment.ledger.fund(relayer, RELAYER_FUNDS).expect("fresh ledger");
        Ok(Self {
            deployment,
            pk: crs.proving_key.clone(),
            scheme,
            wallets: Vec::new(),
            notes: Vec::new(),
            relayer,
            rng: ChaCha20Rng::from_seed(seed),
        })
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    /// `ADDR`.
    pub fn addresses(&self) -> Vec<AddressPublic> {
        self.wallets.iter().map(Wallet::public).collect()
    }

    /// `NOTE`.
    pub fn notes(&self) -> &[ZethNote] {
        &self.notes
    }

    pub fn wallet(&self, index: usize) -> Option<&Wallet> {
        self.wallets.get(index)
    }

    pub fn relayer(&self) -> Address {
        self.relayer
    }

    pub fn add_address(&mut self, address: ZethAddress) -> AddressPublic {
        let public = address.public();
        self.wallets.push(Wallet::new(address, self.relayer));
        public
    }

    pub fn query(&mut self, q: &Query) -> Result<Response, QueryError> {
        match q {
            Query::CreateAddress => {
                let address = ZethAddress::random(&mut self.rng);
                Ok(Response::Address(self.add_address(address)))
            }
            Query::Mix { sender, recipients, v_in, v_out } => {
                let p = self.prepare_mix(*sender, recipients, *v_in, *v_out)?;
                self.submit_prepared(*sender, p)
            }
            Query::Receive { address } => {
                let commitments = self.receive(*address)?;
                Ok(Response::Received { commitments })
            }
            Query::Insert { tx, value } => self.insert(tx, *value),
        }
    }

    pub(super) fn prepare_mix(
        &mut self,
        sender: usize,
        recipients: &[(usize, u64)],
        v_in: u64,
        v_out: u64,
    ) -> Result<PreparedPayment, QueryError> {
        let to = recipients
            .iter()
            .map(|&(i, v)| Ok((self.wallets.get(i).ok_or(QueryError::UnknownAddress(i))?.public(), v)))
            .collect::<Result<Vec<_>, QueryError>>()?;
        let mixer = self.deployment.mixer();
        let wallet = self.wallets.get_mut(sender).ok_or(QueryError::UnknownAddress(sender))?;
        Ok(wallet.make_payment(
            mixer,
            &self.pk,
            self.scheme,
            &to,
            v_in,
            v_out,
            &PaymentOptions::default(),
            &mut self.rng,
        )?)
    }

    pub(super) fn cancel(&mut self, sender: usize, p: &PreparedPayment) {
        if let Some(w) = self.wallets.get_mut(sender) {
            w.settle(p, false);
        }
    }

    pub(super) fn submit_prepared(&mut self, sender: usize, p: PreparedPayment) -> Result<Response, QueryError> {
        let receipt = self.deployment.submit_mix(self.relayer, p.tx.clone(), p.value)?;
        let ok = receipt.status.is_success();
        self.wallets[sender].settle(&p, ok);
        match receipt.status {
            TxStatus::Success => {
                self.notes.extend(p.outputs);
                Ok(Response::Mixed { tx: p.tx })
            }
            TxStatus::Reverted(e) => Err(QueryError::Aborted(e)),
            TxStatus::OutOfGas => Err(QueryError::Aborted(ZethError::NoSuchMethod)),
        }
    }

    fn receive(&mut self, address: usize) -> Result<Vec<Digest256>, QueryError> {
        let wallet = self.wallets.get_mut(address).ok_or(QueryError::UnknownAddress(address))?;
        let got = wallet.receive(self.deployment.ledger.events(), self.deployment.mixer(), self.scheme);
        Ok(got.iter().map(ZethNote::commitment).collect())
    }

    /// Whether `tx` would be accepted right now; state is untouched.
    pub(super) fn dry_run_insert(&self, tx: &MixTransaction, value: u128) -> Result<bool, LedgerError> {
        let mut scratch = self.deployment.clone();
        Ok(scratch.submit_mix(self.relayer, tx.clone(), value)?.status.is_success())
    }

    fn insert(&mut self, tx: &MixTransaction, value: u128) -> Result<Response, QueryError> {
        let receipt = self.deployment.submit_mix(self.relayer, tx.clone(), value)?;
        if let TxStatus::Reverted(e) = receipt.status {
            return Err(QueryError::Aborted(e));
        }
        let mut received = Vec::with_capacity(self.wallets.len());
        for i in 0..self.wallets.len() {
            received.push(self.receive(i)?);
        }
        Ok(Response::Inserted { received })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::HybridEncryption;
    use crate::joinsplit::CircuitConfig;
    use crate::mixer::MixerError;
    use crate::proof::setup;

    #[test]
    fn query_semantics() {
        let crs = setup(&CircuitConfig::new(2, 2, 6).unwrap(), &[0; 32]);
        let mut c = Challenger::new(&crs, GasSchedule::default(), &HybridEncryption, [1; 32]).unwrap();
        assert!(matches!(c.query(&Query::CreateAddress).unwrap(), Response::Address(_)));
        c.query(&Query::CreateAddress).unwrap();
        assert_eq!(c.addresses().len(), 2);

        let Response::Mixed { tx } =
            c.query(&Query::Mix { sender: 0, recipients: vec![(0, 6)], v_in: 6, v_out: 0 }).unwrap()
        else {
            panic!()
        };
        assert_eq!(c.notes().len(), 2);
        let Response::Received { commitments } = c.query(&Query::Receive { address: 0 }).unwrap() else { panic!() };
        assert_eq!(commitments, tx.cm_new);

        c.query(&Query::Mix { sender: 0, recipients: vec![(1, 6)], v_in: 0, v_out: 0 }).unwrap();
        assert_eq!(c.notes().len(), 4);
        assert!(matches!(
            c.query(&Query::Insert { tx: tx.clone(), value: 6 }),
            Err(QueryError::Aborted(ZethError::Mixer(MixerError::DoubleSpend { .. })))
        ));
        assert!(!c.dry_run_insert(&tx, 6).unwrap());
        let Response::Received { commitments } = c.query(&Query::Receive { address: 1 }).unwrap() else { panic!() };
        assert_eq!(commitments.len(), 1);
        assert!(matches!(c.query(&Query::Receive { address: 7 }), Err(QueryError::UnknownAddress(7))));
        assert_eq!(c.wallet(1).unwrap().balance(), 6);
    }
}
