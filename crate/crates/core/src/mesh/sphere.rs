//! Spherical means of powers of the projection onto the `y` factor.

use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::params::ParamSet;

/// Mean of `|Pi sigma|^t` over the unit sphere of `R^d`, `Pi` the projection onto `R^k`.
pub fn sphere_average_projection(d: u32, k: u32, t: f64) -> Result<f64> {
    if k < 1 || d <= k {
        return Err(Error::InvalidParams(format!("need d > k >= 1, got d = {d}, k = {k}")));
    }
    let kf = k as f64;
    if !(t > -kf) {
        return Err(Error::Divergent { t, k });
    }
    let m = (d - k) as f64 / 2.0;
    Ok((ln_beta((t + kf) / 2.0, m) - ln_beta(kf / 2.0, m)).exp())
}

/// Hoelder ratio `avg(|Pi sigma|^a) / avg(|Pi sigma|^{a p*/p})^{p/p*}`.
pub fn g_a_factor(ps: &ParamSet) -> Result<f64> {
    if ps.p >= ps.df() {
        return Err(Error::OutOfRange(format!("need p < d, got p = {}, d = {}", ps.p, ps.d)));
    }
    if ps.a == 0.0 {
        return Ok(1.0);
    }
    let r = ps.p_star() / ps.p;
    let num = sphere_average_projection(ps.d, ps.k, ps.a)?;
    let den = sphere_average_projection(ps.d, ps.k, ps.a * r)?;
    Ok(num / den.powf(1.0 / r))
}
