//! A minimal account-model ledger: balances, nonces, intrinsic gas, atomic
//! contract calls and an append-only event log.
//!
//! Every submission is its own block. A contract call runs against a clone
//! of the contract state and is committed only on success; on abort the
//! attached value goes back to the sender and only the gas consumed so far
//! is charged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::hash_parts;

/// Minimum gas of any transaction.
pub const INTRINSIC_GAS: u64 = 21_000;

/// 20-byte account identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    /// Deterministic address for a human-readable label.
    pub fn from_label(label: &str) -> Self {
        Self::from_digest_prefix(&hash_parts([&b"zeth.account"[..], label.as_bytes()]).0)
    }

    fn from_digest_prefix(d: &[u8; 32]) -> Self {
        let mut a = [0u8; 20];
        a.copy_from_slice(&d[..20]);
        Self(a)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl std::fmt::Display for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl std::fmt::Debug for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Address({})", self.to_hex())
    }
}

impl std::str::FromStr for Address {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::encoding::decode_array(s).map(Self)
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Account {
    pub balance: u128,
    pub nonce: u64,
}

/// Gas ran out inside a contract call.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("out of gas")]
pub struct OutOfGas;

/// A contract tried to send more than it holds.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("contract balance {available} is below {requested}")]
pub struct InsufficientContractBalance {
    pub requested: u128,
    pub available: u128,
}

/// Outcome of a failed contract call.
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecError<E> {
    #[error("out of gas")]
    OutOfGas,
    #[error("{0}")]
    Contract(E),
}

impl<E> From<OutOfGas> for ExecError<E> {
    fn from(_: OutOfGas) -> Self {
        ExecError::OutOfGas
    }
}

/// A contract state machine hosted by the ledger.
pub trait Contract: Clone {
    type Call: Clone;
    type Event: Clone;
    type Error: Clone + std::fmt::Debug + std::fmt::Display;

    fn execute(&mut self, call: &Self::Call, ctx: &mut CallContext<Self::Event>) -> Result<(), ExecError<Self::Error>>;
}

/// Execution environment of one contract call. Effects are buffered here and
/// applied by the ledger only if the call succeeds.
pub struct CallContext<E> {
    sender: Address,
    value: u128,
    contract: Address,
    balance: u128,
    gas_available: u64,
    gas_used: u64,
    transfers: Vec<(Address, u128)>,
    events: Vec<E>,
}

impl<E> CallContext<E> {
    fn new(sender: Address, value: u128, contract: Address, balance: u128, gas_available: u64) -> Self {
        Self { sender, value, contract, balance, gas_available, gas_used: 0, transfers: Vec::new(), events: Vec::new() }
    }

    pub fn sender(&self) -> Address {
        self.sender
    }

    /// Wei attached to the call.
    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn contract(&self) -> Address {
        self.contract
    }

    /// Contract balance, including the attached value.
    pub fn balance(&self) -> u128 {
        self.balance
    }

    pub fn gas_used(&self) -> u64 {
        self.gas_used
    }

    pub fn charge(&mut self, gas: u64) -> Result<(), OutOfGas> {
        let used = self.gas_used.saturating_add(gas);
        if used > self.gas_available {
            self.gas_used = self.gas_available;
            return Err(OutOfGas);
        }
        self.gas_used = used;
        Ok(())
    }

    pub fn send_value(&mut self, to: Address, amount: u128) -> Result<(), InsufficientContractBalance> {
        if amount > self.balance {
            return Err(InsufficientContractBalance { requested: amount, available: self.balance });
        }
        self.balance -= amount;
        self.transfers.push((to, amount));
        Ok(())
    }

    pub fn emit(&mut self, event: E) {
        self.events.push(event);
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload<Call> {
    Transfer { to: Address },
    Call { contract: Address, call: Call },
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TxEnvelope<Call> {
    pub sender: Address,
    pub value: u128,
    pub gas_limit: u64,
    pub gas_price: u64,
    pub payload: Payload<Call>,
}

impl<Call> TxEnvelope<Call> {
    pub fn max_cost(&self) -> Option<u128> {
        u128::from(self.gas_limit).checked_mul(u128::from(self.gas_price))?.checked_add(self.value)
    }
}

/// One entry of the public event log.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EventRecord<E> {
    pub index: u64,
    pub block: u64,
    pub tx_index: u64,
    pub contract: Address,
    #[serde(flatten)]
    pub event: E,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "status", content = "error", rename_all = "snake_case")]
pub enum TxStatus<E> {
    Success,
    Reverted(E),
    OutOfGas,
}

impl<E> TxStatus<E> {
    pub fn is_success(&self) -> bool {
        matches!(self, TxStatus::Success)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Receipt<Ev, Err> {
    pub tx_index: u64,
    pub block: u64,
    /// Always public: the caller of every transaction is visible on chain.
    pub sender: Address,
    pub status: TxStatus<Err>,
    pub gas_used: u64,
    pub fee: u128,
    pub events: Vec<EventRecord<Ev>>,
}

/// Public record of an executed transaction.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TxRecord<Call> {
    pub tx_index: u64,
    pub block: u64,
    pub envelope: TxEnvelope<Call>,
    pub success: bool,
    pub gas_used: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("gas limit {limit} below intrinsic cost {required}")]
    IntrinsicGas { limit: u64, required: u64 },
    #[error("insufficient funds: need {needed}, have {available}")]
    InsufficientFunds { needed: u128, available: u128 },
    #[error("no contract at {0}")]
    UnknownContract(Address),
    #[error("{0} is a contract; plain transfers only go to accounts")]
    TransferToContract(Address),
    #[error("balance overflow")]
    Overflow,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ContractAccount<C> {
    pub state: C,
    pub balance: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(
    serialize = "C: Serialize, C::Call: Serialize, C::Event: Serialize",
    deserialize = "C: Deserialize<'de>, C::Call: Deserialize<'de>, C::Event: Deserialize<'de>"
))]
pub struct Ledger<C: Contract> {
    accounts: BTreeMap<Address, Account>,
    contracts: BTreeMap<Address, ContractAccount<C>>,
    miner_fees: u128,
    minted: u128,
    height: u64,
    deployments: u64,
    intrinsic_gas: u64,
    events: Vec<EventRecord<C::Event>>,
    transactions: Vec<TxRecord<C::Call>>,
}

impl<C: Contract> Default for Ledger<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Contract> Ledger<C> {
    pub fn new() -> Self {
        Self::with_intrinsic_gas(INTRINSIC_GAS)
    }

    pub fn with_intrinsic_gas(intrinsic_gas: u64) -> Self {
        Self {
            accounts: BTreeMap::new(),
            contracts: BTreeMap::new(),
            miner_fees: 0,
            minted: 0,
            height: 0,
            deployments: 0,
            intrinsic_gas,
            events: Vec::new(),
            transactions: Vec::new(),
        }
    }

    pub fn intrinsic_gas(&self) -> u64 {
        self.intrinsic_gas
    }

    /// Genesis allocation; the only way Wei enters the system.
    pub fn fund(&mut self, address: Address, amount: u128) -> Result<(), LedgerError> {
        if self.contracts.contains_key(&address) {
            return Err(LedgerError::TransferToContract(address));
        }
        let acct = self.accounts.entry(address).or_default();
        acct.balance = acct.balance.checked_add(amount).ok_or(LedgerError::Overflow)?;
        self.minted = self.minted.checked_add(amount).ok_or(LedgerError::Overflow)?;
        Ok(())
    }

    /// Registers a contract with isolated storage and zero balance.
    pub fn deploy(&mut self, state: C) -> Address {
        let address = loop {
            let d = hash_parts([&b"zeth.contract"[..], &self.deployments.to_be_bytes()]);
            self.deployments += 1;
            let candidate = Address::from_digest_prefix(&d.0);
            if !self.accounts.contains_key(&candidate) && !self.contracts.contains_key(&candidate) {
                break candidate;
            }
        };
        self.contracts.insert(address, ContractAccount { state, balance: 0 });
        address
    }

    pub fn account(&self, address: &Address) -> Account {
        self.accounts.get(address).copied().unwrap_or_default()
    }

    pub fn balance(&self, address: &Address) -> u128 {
        match self.contracts.get(address) {
            Some(c) => c.balance,
            None => self.account(address).balance,
        }
    }

    pub fn contract(&self, address: &Address) -> Option<&C> {
        self.contracts.get(address).map(|c| &c.state)
    }

    pub fn contract_account(&self, address: &Address) -> Option<&ContractAccount<C>> {
        self.contracts.get(address)
    }

    pub fn contracts(&self) -> impl Iterator<Item = (&Address, &ContractAccount<C>)> {
        self.contracts.iter()
    }

    pub fn accounts(&self) -> impl Iterator<Item = (&Address, &Account)> {
        self.accounts.iter()
    }

    pub fn miner_fees(&self) -> u128 {
        self.miner_fees
    }

    pub fn minted(&self) -> u128 {
        self.minted
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    /// Accounts + contracts + collected fees; equals [`Ledger::minted`] at all times.
    pub fn total_wei(&self) -> u128 {
        self.accounts.values().map(|a| a.balance).sum::<u128>()
            + self.contracts.values().map(|c| c.balance).sum::<u128>()
            + self.miner_fees
    }

    pub fn events(&self) -> &[EventRecord<C::Event>] {
        &self.events
    }

    /// All events with `index >= from_index`, in order.
    pub fn read_events(&self, from_index: u64) -> &[EventRecord<C::Event>] {
        let start = (from_index as usize).min(self.events.len());
        &self.events[start..]
    }

    pub fn transactions(&self) -> &[TxRecord<C::Call>] {
        &self.transactions
    }

    pub fn submit(&mut self, tx: TxEnvelope<C::Call>) -> Result<Receipt<C::Event, C::Error>, LedgerError> {
        if tx.gas_limit < self.intrinsic_gas {
            return Err(LedgerError::IntrinsicGas { limit: tx.gas_limit, required: self.intrinsic_gas });
        }
        match &tx.payload {
            Payload::Call { contract, .. } if !self.contracts.contains_key(contract) => {
                return Err(LedgerError::UnknownContract(*contract));
            }
            Payload::Transfer { to } if self.contracts.contains_key(to) => {
                return Err(LedgerError::TransferToContract(*to));
            }
            _ => {}
        }
        let max_cost = tx.max_cost().ok_or(LedgerError::Overflow)?;
        let available = self.account(&tx.sender).balance;
        if available < max_cost {
            return Err(LedgerError::InsufficientFunds { needed: max_cost, available });
        }

        let sender = self.accounts.entry(tx.sender).or_default();
        sender.balance -= max_cost;
        sender.nonce += 1;
        self.height += 1;
        let block = self.height;
        let tx_index = self.transactions.len() as u64;

        let mut gas_used = self.intrinsic_gas;
        let mut refund_value = false;
        let mut emitted = Vec::new();
        let status = match &tx.payload {
            Payload::Transfer { to } => {
                let acct = self.accounts.entry(*to).or_default();
                acct.balance += tx.value;
                TxStatus::Success
            }
            Payload::Call { contract, call } => {
                let slot = self.contracts.get(contract).expect("checked above");
                let mut state = slot.state.clone();
                let mut ctx = CallContext::new(
                    tx.sender,
                    tx.value,
                    *contract,
                    slot.balance + tx.value,
                    tx.gas_limit - self.intrinsic_gas,
                );
                let outcome = state.execute(call, &mut ctx);
                gas_used += ctx.gas_used;
                match outcome {
                    Ok(()) => {
                        let slot = self.contracts.get_mut(contract).expect("checked above");
                        slot.state = state;
                        slot.balance = ctx.balance;
                        for (to, amount) in ctx.transfers {
                            self.accounts.entry(to).or_default().balance += amount;
                        }
                        emitted = ctx.events;
                        TxStatus::Success
                    }
                    Err(ExecError::OutOfGas) => {
                        gas_used = tx.gas_limit;
                        refund_value = true;
                        TxStatus::OutOfGas
                    }
                    Err(ExecError::Contract(e)) => {
                        refund_value = true;
                        TxStatus::Reverted(e)
                    }
                }
            }
        };

        let fee = u128::from(gas_used) * u128::from(tx.gas_price);
        let refund = max_cost - tx.value - fee + if refund_value { tx.value } else { 0 };
        self.accounts.entry(tx.sender).or_default().balance += refund;
        self.miner_fees += fee;

        let contract = match &tx.payload {
            Payload::Call { contract, .. } => *contract,
            Payload::Transfer { to } => *to,
        };
        let start = self.events.len() as u64;
        let records: Vec<_> = emitted
            .into_iter()
            .enumerate()
            .map(|(i, event)| EventRecord { index: start + i as u64, block, tx_index, contract, event })
            .collect();
        self.events.extend(records.iter().cloned());
        self.transactions.push(TxRecord {
            tx_index,
            block,
            envelope: tx.clone(),
            success: status.is_success(),
            gas_used,
        });

        Ok(Receipt { tx_index, block, sender: tx.sender, status, gas_used, fee, events: records })
    }
}
