//! Concrete bit-commitment protocols and their dedicated security
//! evaluators: the Bell-state commitment, the tunable anonymous-state
//! commitment, the notarized shredder commitment and the decoherence
//! monster commitment.

mod anon;
mod bell;
mod monster;
mod shredder;

pub use anon::anonymous_state_protocol;
pub use bell::bell_protocol;
pub use monster::{
    monster_build, GeneralAttackReport, MonsterAttack, MonsterInstance, PassiveCheatReport,
};
pub use shredder::{shredder_eval, ShredderInstance, ShredderReport};

use crate::hybrid::HybridState;
use crate::protocol::{CommunicationTree, Strategy, StrategyRegister, Verifier};

/// A complete protocol instance ready for the no-go pipeline.
pub struct ProtocolInstance {
    pub name: String,
    pub tree: CommunicationTree,
    pub a0: Strategy,
    pub a1: Strategy,
    pub bobs: Vec<Strategy>,
    pub rho0: HybridState,
    pub verifier: Verifier,
}

impl ProtocolInstance {
    pub fn register(&self) -> crate::error::Result<StrategyRegister> {
        StrategyRegister::new(&self.tree, self.bobs.clone())
    }
}

#[cfg(test)]
mod tests;
