//! Concrete generative models and the Monte-Carlo return oracle.

pub mod inventory;
pub mod mc;
pub mod random;

pub use inventory::{inventory_mdp, inventory_sample, InventoryParams};
pub use mc::{mc_qh_return, McConfig, McEstimate, PolicySequence};
pub use random::{random_mdp, RandomMdpSpec};
