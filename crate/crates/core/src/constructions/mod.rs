//! Generators for the standard separating instances, game augmentation,
//! special provider rules, and seeded random instances.

mod augment;
mod instances;
pub mod random;
mod rules;

pub use augment::{augment, AugmentedGameSpec};
pub use instances::{
    make_public_adding_users, make_public_adding_users_base, make_public_example,
    make_strict_separation, public_adding_users_base_cert, public_adding_users_spec,
    public_example_weak_cert, strict_separation_weak_cert,
};
pub use rules::{
    best_shared_rule, make_full_revelation_rule, make_identity_elicitation_rule,
    make_no_disclosure_rule,
};
