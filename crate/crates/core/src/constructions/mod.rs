// SPDX-License-Identifier: MIT
//! Block constructions and the finite checks that accompany them.

pub mod esys;
pub mod ledger;
pub mod mechanism;
pub mod prob;

pub use esys::{e_enumerate_blocks, e_sample_block, tau_chebyshev_bound, EEnumeration, ELevel, EParams};
pub use ledger::{cycling_ledger, rothstein_ledger, shifting_ledger, theorem_schedule, BoundLedger, Theorem};
pub use mechanism::{cycling_run, shifting_run, MechanismKind, MechanismParams, MechanismRun, Stage, StageRole};
pub use prob::{conditioning_check, epsilon_independence, DistributionTable, JointTable};
