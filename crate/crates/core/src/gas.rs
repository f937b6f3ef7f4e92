//! Gas cost of on-chain proof verification and of a whole Mix call.
//!
//! Verification follows the four steps of the pairing-based verifier: the
//! instance linear combination, three knowledge-commitment checks, the
//! same-coefficients check and the QAP divisibility check. Group operations
//! in the target group are folded into the per-point pairing cost.

use serde::{Deserialize, Serialize};

use crate::joinsplit::CircuitConfig;

/// Instance field elements for (N, M) = (2, 2) under the default packing.
pub const DEFAULT_INSTANCE_ELEMENTS: u64 = 9;

/// Per-operation gas costs. Defaults are the Byzantium precompile prices.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GasSchedule {
    pub ecadd_gas: u64,
    pub ecmul_gas: u64,
    pub pairing_base_gas: u64,
    pub pairing_per_point_gas: u64,
    pub intrinsic_tx_gas: u64,
    pub storage_write_gas: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self::BYZANTIUM
    }
}

impl GasSchedule {
    pub const BYZANTIUM: Self = Self {
        ecadd_gas: 500,
        ecmul_gas: 40_000,
        pairing_base_gas: 100_000,
        pairing_per_point_gas: 80_000,
        intrinsic_tx_gas: 21_000,
        storage_write_gas: 20_000,
    };

    /// Precompile repricing of EIP-1108; non-curve costs unchanged.
    pub const ISTANBUL: Self = Self {
        ecadd_gas: 150,
        ecmul_gas: 6_000,
        pairing_base_gas: 45_000,
        pairing_per_point_gas: 34_000,
        intrinsic_tx_gas: 21_000,
        storage_write_gas: 20_000,
    };

    pub const ZERO: Self = Self {
        ecadd_gas: 0,
        ecmul_gas: 0,
        pairing_base_gas: 0,
        pairing_per_point_gas: 0,
        intrinsic_tx_gas: 0,
        storage_write_gas: 0,
    };
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct VerifierCostBreakdown {
    pub linear_combination: u64,
    pub knowledge_commitments: u64,
    pub coefficient_check: u64,
    pub qap_divisibility: u64,
    pub total: u64,
}

/// Verification cost for an instance of `n` field elements.
pub fn verifier_gas(n: u64, sched: &GasSchedule) -> VerifierCostBreakdown {
    let add = sched.ecadd_gas;
    let mul = sched.ecmul_gas;
    let base = sched.pairing_base_gas;
    let point = sched.pairing_per_point_gas;

    let linear_combination = n * (mul + add) + add;
    let knowledge_commitments = 3 * (base + 2 * point);
    let coefficient_check = base + 3 * point + 2 * add;
    let qap_divisibility = base + 3 * point + add;
    VerifierCostBreakdown {
        linear_combination,
        knowledge_commitments,
        coefficient_check,
        qap_divisibility,
        total: linear_combination + knowledge_commitments + coefficient_check + qap_divisibility,
    }
}

/// Storage writes charged per Mix: N serials, M leaves, the new root and one
/// fixed per-call slot.
pub fn mix_storage_writes(config: &CircuitConfig) -> u64 {
    (config.n_inputs + config.n_outputs + 2) as u64
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MixGasEstimate {
    pub intrinsic: u64,
    pub verification: VerifierCostBreakdown,
    pub storage_writes: u64,
    pub storage: u64,
    pub total: u64,
}

impl MixGasEstimate {
    /// Fraction of the total spent on proof verification.
    pub fn verification_share(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.verification.total as f64 / self.total as f64
    }
}

/// Full breakdown of a Mix call. Only the verification part follows from the
/// verifier's structure; intrinsic and storage terms are estimates.
pub fn mix_call_estimate(config: &CircuitConfig, sched: &GasSchedule, n: u64) -> MixGasEstimate {
    let verification = verifier_gas(n, sched);
    let storage_writes = mix_storage_writes(config);
    let storage = storage_writes * sched.storage_write_gas;
    MixGasEstimate {
        intrinsic: sched.intrinsic_tx_gas,
        verification,
        storage_writes,
        storage,
        total: sched.intrinsic_tx_gas + verification.total + storage,
    }
}

pub fn mix_call_gas(config: &CircuitConfig, sched: &GasSchedule, n: u64) -> u64 {
    mix_call_estimate(config, sched, n).total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones() -> GasSchedule {
        GasSchedule {
            ecadd_gas: 1,
            ecmul_gas: 1,
            pairing_base_gas: 1,
            pairing_per_point_gas: 1,
            intrinsic_tx_gas: 1,
            storage_write_gas: 1,
        }
    }

    #[test]
    fn unit_schedule() {
        let b = verifier_gas(0, &ones());
        assert_eq!(
            (b.linear_combination, b.knowledge_commitments, b.coefficient_check, b.qap_divisibility),
            (1, 9, 6, 5)
        );
        assert_eq!(b.total, 21);
    }

    #[test]
    fn byzantium_default_packing() {
        // Hand expansion with n = 9:
        //   9 * (40000 + 500) + 500         =   365_000
        //   3 * (100000 + 2 * 80000)        =   780_000
        //   100000 + 3 * 80000 + 2 * 500    =   341_000
        //   100000 + 3 * 80000 + 500        =   340_500
        let b = verifier_gas(DEFAULT_INSTANCE_ELEMENTS, &GasSchedule::BYZANTIUM);
        assert_eq!(b.linear_combination, 365_000);
        assert_eq!(b.knowledge_commitments, 780_000);
        assert_eq!(b.coefficient_check, 341_000);
        assert_eq!(b.qap_divisibility, 340_500);
        assert_eq!(b.total, 1_826_500);
        assert!(b.total < 2_000_000);
    }

    #[test]
    fn each_instance_element_costs_one_mul_and_add() {
        let s = GasSchedule::BYZANTIUM;
        for n in 0..32 {
            assert_eq!(verifier_gas(n + 1, &s).total - verifier_gas(n, &s).total, s.ecmul_gas + s.ecadd_gas);
        }
        // Largest packing that stays under two million.
        assert!(verifier_gas(13, &s).total < 2_000_000);
        assert!(verifier_gas(14, &s).total >= 2_000_000);
    }

    #[test]
    fn mix_call_totals() {
        let config = CircuitConfig::default();
        let e = mix_call_estimate(&config, &GasSchedule::BYZANTIUM, 9);
        assert_eq!(e.storage_writes, 6);
        assert_eq!(e.total, 21_000 + 1_826_500 + 120_000);
        assert!(e.verification_share() >= 0.70);
        assert_eq!(mix_call_gas(&config, &GasSchedule::ZERO, 9), 0);
        assert!(mix_call_gas(&config, &GasSchedule::ISTANBUL, 9) < e.total);
    }

    #[test]
    fn partial_schedule_json_uses_defaults() {
        let s: GasSchedule = serde_json::from_str(r#"{"ecmul_gas": 6000}"#).unwrap();
        assert_eq!(s.ecmul_gas, 6000);
        assert_eq!(s.ecadd_gas, 500);
    }
}
