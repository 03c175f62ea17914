//! Communication-tree protocol engine: strategies, execution, purification,
//! Bob's strategy register, concealment measurement and the constructive
//! cheat synthesis.

mod defs;
mod nogo;
mod purify;
mod register;
mod run;
mod strategy;
mod tree;

pub use defs::{MatrixDef, ProtocolDef, SCHEMA_VERSION};
pub use nogo::{
    cheat_strategy, concealment, concealment_lower_at_depth, evaluate_cheat, synthesize_cheat,
    CheatPlan, ConcealmentReport, SecurityReport, StrategyRow, Verifier,
};
pub use purify::{purify, Factor, PurifiedStrategy};
pub use register::{commit_isometries, register_channel, StrategyRegister};
pub use run::{run, run_register, RunOutput, Until, BRANCH_CAP};
pub use strategy::{validate, validate_strategy, LabDims, MsgAction, NodeAction, Strategy};
pub use tree::{
    CommunicationTree, DimensionSchedule, MessageSpec, Node, Owner, Phase, TreeBuilder,
};
