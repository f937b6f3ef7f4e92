//! A ledger with one mixer and one address registry deployed on it.

use serde::{Deserialize, Serialize};

use crate::gas::{mix_call_gas, GasSchedule};
use crate::ledger::{Address, Ledger, LedgerError, Payload, Receipt, TxEnvelope};
use crate::merkle::MerkleError;
use crate::mixer::{MixTransaction, Mixer, Registry, ZethCall, ZethContract, ZethError, ZethEvent};
use crate::note::AddressPublic;
use crate::proof::VerificationKey;

/// Gas price used by every transaction the helpers build.
pub const GAS_PRICE: u64 = 1;

pub type ZethReceipt = Receipt<ZethEvent, ZethError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Deployment {
    pub ledger: Ledger<ZethContract>,
    pub mixer: Address,
    pub registry: Address,
}

impl Deployment {
    pub fn new(vk: VerificationKey, gas: GasSchedule) -> Result<Self, MerkleError> {
        Ok(Self::with_mixer(Mixer::new(vk, gas)?))
    }

    /// Deploys `mixer` as given; the ledger's intrinsic gas follows its schedule.
    pub fn with_mixer(mixer: Mixer) -> Self {
        let mut ledger = Ledger::with_intrinsic_gas(mixer.gas_schedule().intrinsic_tx_gas);
        let mixer = ledger.deploy(ZethContract::Mixer(mixer));
        let registry = ledger.deploy(ZethContract::Registry(Registry::default()));
        Self { ledger, mixer, registry }
    }

    pub fn mixer(&self) -> &Mixer {
        self.ledger.contract(&self.mixer).and_then(ZethContract::as_mixer).expect("mixer address holds the mixer")
    }

    pub fn registry(&self) -> &Registry {
        self.ledger
            .contract(&self.registry)
            .and_then(ZethContract::as_registry)
            .expect("registry address holds the registry")
    }

    /// Gas limit that exactly covers a successful Mix call.
    pub fn mix_gas_limit(&self) -> u64 {
        let m = self.mixer();
        mix_call_gas(m.config(), m.gas_schedule(), m.instance_elements())
    }

    pub fn submit_mix(&mut self, sender: Address, tx: MixTransaction, value: u128) -> Result<ZethReceipt, LedgerError> {
        let gas_limit = self.mix_gas_limit();
        self.ledger.submit(TxEnvelope {
            sender,
            value,
            gas_limit,
            gas_price: GAS_PRICE,
            payload: Payload::Call { contract: self.mixer, call: ZethCall::Mix(tx) },
        })
    }

    pub fn register(
        &mut self,
        sender: Address,
        name: &str,
        address: AddressPublic,
    ) -> Result<ZethReceipt, LedgerError> {
        self.ledger.submit(TxEnvelope {
            sender,
            value: 0,
            gas_limit: self.ledger.intrinsic_gas() + 100_000,
            gas_price: GAS_PRICE,
            payload: Payload::Call {
                contract: self.registry,
                call: ZethCall::Register { name: name.to_owned(), address },
            },
        })
    }
}
