//! Exact execution of plans on small systems, with brute-force oracles.

mod audit;
mod channel;
mod distribution;
mod execute;
mod exhaust;
mod oracle;

pub use audit::{work_balance_audit, AuditLedger};
pub use channel::{distillation_permutation, formation_channel, Channel, Permutation};
pub use distribution::{StringDistribution, MAX_DIST_LEN};
pub use execute::{
    distillation_input, execute_plan_classical, execute_plan_quantum, formation_input, ClassicalExecution, PlanRef,
    QuantumReport, MAX_QUANTUM_QUBITS,
};
pub use exhaust::{exhaust_analysis, ExhaustReport, MAX_BLOCK};
pub use oracle::{oracle_max_m, ENUMERATION_LIMIT, ORACLE_LIMIT};
