//! Closed-form network model used to cross-check the simulator.
//!
//! A block of `B` bytes crossing `h` hops of bandwidth `C` and propagation
//! delay `D` takes `Δ = h·B/C + h·D`. Longest-chain security needs
//! `fΔ < (1 − 2β)/β`, and the fraction of bandwidth such a chain can use is
//! `fB/C < fΔ/h`.

use super::SimError;

/// Network delay `Δ` for one block.
pub fn delay_model(hops: f64, block_bytes: f64, bandwidth: f64, link_delay: f64) -> f64 {
    hops * block_bytes / bandwidth + hops * link_delay
}

/// Largest `fΔ` compatible with an adversary of power `beta`.
pub fn security_constraint(beta: f64) -> Result<f64, SimError> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(SimError::Parameter { name: "beta", value: beta });
    }
    Ok((1.0 - 2.0 * beta) / beta)
}

/// Upper bound on bandwidth utilization `fB/C` given `fΔ` and hop count.
pub fn utilization_bound(f_delta: f64, hops: f64) -> Result<f64, SimError> {
    if !(f_delta >= 0.0 && hops > 0.0) {
        return Err(SimError::Parameter { name: "hops", value: hops });
    }
    Ok(f_delta / hops)
}

/// Approximate forking rate of one chain with mining rate `f` and delay `Δ`.
pub fn forking_rate_approx(f_delta: f64) -> f64 {
    f_delta / (1.0 + f_delta)
}
