//! Restricted isometry and orthogonality constants, the recovery
//! conditions built on them, and their Gaussian high-probability bounds.

mod bounds;
mod conditions;
mod constants;
mod table;

pub use bounds::{
    entropy, g_bound, max_sparsity_fraction, rho_cs, rho_cs2, rho_cs2_frac, rho_cs_frac, rho_curve,
    rho_modcs, rho_modcs_frac, BoundRule, CURVE_CHURN,
};
pub use conditions::{
    a_coeff, a_value, check_all_modcs, check_corollary1, check_cs_conditions, check_prop1,
    check_theorem1, k_coeff, k_value, Clause, Combinator, ConditionReport, SupportSizes,
    UsedConstant, Verdict,
};
pub(crate) use constants::binomial;
pub use constants::{
    delta_cost, delta_exact, delta_sampled, theta_cost, theta_exact, theta_sampled,
    ENUMERATION_BUDGET,
};
pub use table::{
    matrix_hash, Constant, ConstantMode, DeltaEntry, RequiredConstants, RipTable, ThetaEntry,
};
