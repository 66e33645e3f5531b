//! Browder bracket calculus: expressions in the homology operations, named
//! rewrite rules, and replayable certificates that a class brackets
//! trivially with the point class.

mod expr;
mod identities;
mod parse;
mod rules;
mod strategy;

pub use expr::{ad, beta, br, bxi, gen, q, sc, sym, xi, zeta, Ambient, ClassName, Expr};
pub use identities::{lie_normal_form, verify_sign_identities, IdentityReport};
pub use parse::parse_expr;
pub use rules::{apply_rule, jacobi_signs, normalize, Rule};
pub use strategy::{check_point_bracket, class_expr, ProofTrace, Step, Verdict};
