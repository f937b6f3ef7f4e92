//! Measurable proxies for the anonymity best practices: anonymity-set size,
//! caller diversity and stale-root use.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::deployment::Deployment;
use crate::ledger::Payload;

/// Below this many commitments the tree is considered almost empty.
pub const SPARSE_TREE_LEAVES: u64 = 128;
/// Below this many distinct calling accounts the caller leak is considered severe.
pub const FEW_CALLERS: usize = 10;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub tree_leaves: u64,
    pub tree_capacity: u64,
    pub fill_ratio: f64,
    pub roots: usize,
    pub mix_calls: u64,
    pub accepted_mix_calls: u64,
    pub distinct_callers: usize,
    pub registry_size: usize,
    pub spent_serials: usize,
    pub stale_root_accepts: u64,
    pub warnings: Vec<String>,
}

pub fn anonymity_diagnostics(d: &Deployment) -> DiagnosticsReport {
    let mixer = d.mixer();
    let tree = mixer.tree();
    let mut callers = BTreeSet::new();
    let (mut mix_calls, mut accepted) = (0u64, 0u64);
    for tx in d.ledger.transactions() {
        if let Payload::Call { contract, .. } = &tx.envelope.payload {
            if *contract == d.mixer {
                mix_calls += 1;
                accepted += u64::from(tx.success);
                callers.insert(tx.envelope.sender);
            }
        }
    }

    let mut warnings = Vec::new();
    if tree.len() < SPARSE_TREE_LEAVES {
        warnings.push(format!(
            "commitment tree holds {} leaves (fewer than {SPARSE_TREE_LEAVES}); the anonymity set is small",
            tree.len()
        ));
    }
    if mix_calls > 0 && callers.len() < FEW_CALLERS {
        warnings.push(format!("only {} distinct accounts have called the mixer", callers.len()));
    }
    if mixer.stale_root_accepts() > 0 {
        warnings.push(format!("{} accepted calls used a root other than the current one", mixer.stale_root_accepts()));
    }

    DiagnosticsReport {
        tree_leaves: tree.len(),
        tree_capacity: tree.capacity(),
        fill_ratio: tree.len() as f64 / tree.capacity() as f64,
        roots: mixer.roots().len(),
        mix_calls,
        accepted_mix_calls: accepted,
        distinct_callers: callers.len(),
        registry_size: d.registry().len(),
        spent_serials: mixer.spent_serials().len(),
        stale_root_accepts: mixer.stale_root_accepts(),
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::HybridEncryption;
    use crate::gas::GasSchedule;
    use crate::joinsplit::CircuitConfig;
    use crate::ledger::Address;
    use crate::note::ZethAddress;
    use crate::proof::setup;
    use crate::wallet::{PaymentOptions, Wallet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn fresh_deployment_warns() {
        let crs = setup(&CircuitConfig::default(), &[0; 32]);
        let d = Deployment::new(crs.verification_key, GasSchedule::default()).unwrap();
        let r = anonymity_diagnostics(&d);
        assert_eq!((r.tree_leaves, r.fill_ratio, r.mix_calls, r.distinct_callers), (0, 0.0, 0, 0));
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn counts_callers_across_a_workload() {
        let cfg = CircuitConfig::new(2, 2, 8).unwrap();
        let crs = setup(&cfg, &[0; 32]);
        let mut d = Deployment::new(crs.verification_key.clone(), GasSchedule::default()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut wallets: Vec<Wallet> = (0..10)
            .map(|i| {
                let account = Address::from_label(&format!("caller-{i}"));
                d.ledger.fund(account, 1 << 40).unwrap();
                Wallet::new(ZethAddress::random(&mut rng), account)
            })
            .collect();
        for k in 0..100 {
            let w = &mut wallets[k % 10];
            let me = w.public();
            let p = w
                .make_payment(
                    d.mixer(),
                    &crs.proving_key,
                    &HybridEncryption,
                    &[(me, 1)],
                    1,
                    0,
                    &PaymentOptions::default(),
                    &mut rng,
                )
                .unwrap();
            assert!(d.submit_mix(w.account(), p.tx.clone(), p.value).unwrap().status.is_success());
            w.settle(&p, true);
        }
        let r = anonymity_diagnostics(&d);
        assert_eq!(r.distinct_callers, 10);
        assert_eq!((r.mix_calls, r.accepted_mix_calls), (100, 100));
        assert_eq!(r.tree_leaves, 200);
        assert_eq!(r.roots, 101);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }
}
