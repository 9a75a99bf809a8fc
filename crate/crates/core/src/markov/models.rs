//! Ready-made chains for an unprotected module, a module with a corrector,
//! and a triplicated module behind an ideal voter.

use super::MarkovModel;
use crate::raf::FtSystemRates;
use crate::scalar::Real;

/// Unprotected module: `S0 --lambda_d--> S1`, S1 faulty.
pub fn original_system<T: Real>(lambda_d: T) -> MarkovModel<T> {
    MarkovModel::builder()
        .healthy(["S0"])
        .faulty(["S1"])
        .transition("S0", "S1", lambda_d)
        .initial("S0")
        .build()
        .expect("original system chain is well formed for positive rate")
}

/// Module with a corrector.
///
/// * `S0 --lambda_d1--> S1`: fault the corrector handles; S1 stays
///   operational and returns to S0 at `mu_d`.
/// * `S0 --lambda_d2--> S2`: fault the corrector cannot handle (faulty).
/// * `S0 --lambda_c--> SC-F`: the corrector itself fails (faulty).
///
/// Zero rates drop the corresponding edge. Exact MTBF is
/// `(1 + lambda_d1 / mu_d) / (lambda_d2 + lambda_c)`; see
/// [`FtSystemRates::mtbf_exact`] and [`FtSystemRates::mtbf_instant_repair`].
pub fn fault_tolerant_system<T: Real>(rates: &FtSystemRates<T>) -> MarkovModel<T> {
    let mut builder = MarkovModel::builder().healthy(["S0", "S1"]).faulty(["S2", "SC-F"]).initial("S0");
    let edges = [
        ("S0", "S1", rates.lambda_d1),
        ("S1", "S0", rates.mu_d),
        ("S0", "S2", rates.lambda_d2),
        ("S0", "SC-F", rates.lambda_c),
    ];
    for (from, to, rate) in edges {
        if rate > T::zero() {
            builder = builder.transition(from, to, rate);
        }
    }
    builder.build().expect("fault-tolerant chain is well formed for non-negative rates")
}

/// Three replicas of rate `lambda`, operational while two agree.
///
/// `S0 --3l--> S1 --2l--> S2 --l--> S3`; S2 and S3 are faulty, giving
/// MTBF `5 / (6 lambda)`.
pub fn tmr_system<T: Real>(lambda: T) -> MarkovModel<T> {
    MarkovModel::builder()
        .healthy(["S0", "S1"])
        .faulty(["S2", "S3"])
        .transition("S0", "S1", T::lit(3.0) * lambda)
        .transition("S1", "S2", T::lit(2.0) * lambda)
        .transition("S2", "S3", lambda)
        .initial("S0")
        .build()
        .expect("tmr chain is well formed for positive rate")
}
