//! Radial profiles `u(|z|)` on a one-dimensional geometric grid.
//!
//! The discretization mirrors the two-dimensional one: piecewise linear data,
//! a virtual node at the origin carrying the first value, two-point rules
//! built from exact moments of the power of the radius, and an optional
//! smooth multiplier sampled at the rule points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::sphere_area;
use crate::quad::{gl16, integrate, two_point_from_moments};

/// Geometric nodes `rho_min = x_0 < ... < x_{n-1} = rho_max`.
pub fn log_nodes(n: usize, rho_min: f64, rho_max: f64) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(Error::BadResolution(n));
    }
    if !(rho_min > 0.0 && rho_max > rho_min && rho_max.is_finite()) {
        return Err(Error::OutOfRange(format!("need 0 < rho_min < rho_max, got {rho_min}, {rho_max}")));
    }
    let l = (rho_max / rho_min).ln();
    Ok((0..n).map(|i| rho_min * (l * i as f64 / (n - 1) as f64).exp()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub d: u32,
    pub rho: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(d: u32, rho: Vec<f64>) -> Self {
        let n = rho.len();
        RadialProfile { d, rho, values: vec![0.0; n] }
    }

    pub fn fill(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.values = self.rho.iter().map(|&r| f(r)).collect();
        self
    }

    /// Largest radius carrying a nonzero value.
    pub fn support_radius(&self) -> f64 {
        let last = self.values.iter().rposition(|v| *v != 0.0);
        match last {
            Some(i) if i + 1 < self.rho.len() => self.rho[i + 1],
            Some(_) => *self.rho.last().unwrap(),
            None => 0.0,
        }
    }

    /// Every other node, keeping the last.
    pub fn coarsened(&self) -> RadialProfile {
        let n = self.rho.len();
        let mut idx: Vec<usize> = (0..n).step_by(2).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        RadialProfile {
            d: self.d,
            rho: idx.iter().map(|&i| self.rho[i]).collect(),
            values: idx.iter().map(|&i| self.values[i]).collect(),
        }
    }
}

/// Quadrature of one radial measure `rho^e A(rho) d rho` on a fixed node set.
#[derive(Clone, Debug)]
pub struct RadialTable {
    /// Per cell of the augmented grid, weights of the left and right node.
    pub(crate) mass: Vec<[f64; 2]>,
    /// Per cell, `int rho^e A / h^p`, multiplied into `|u_R - u_L|^p`.
    pub(crate) stiff: Vec<f64>,
}

impl RadialTable {
    pub fn build(rho: &[f64], e: f64, p: f64, a: impl Fn(f64) -> f64) -> Result<RadialTable> {
        if e <= -1.0 {
            return Err(Error::DivergentWeight { axis: "radius", exponent: e });
        }
        let mut mass = Vec::with_capacity(rho.len());
        let mut stiff = Vec::with_capacity(rho.len());
        let mut lo = 0.0;
        for &hi in rho {
            let h = hi - lo;
            let mu: [f64; 4] = if lo == 0.0 {
                std::array::from_fn(|j| h.powf(e + 1.0) / (e + j as f64 + 1.0))
            } else {
                std::array::from_fn(|j| integrate(gl16(), lo, hi, |x| x.powf(e) * ((x - lo) / h).powi(j as i32)))
            };
            let (t, w) = two_point_from_moments(mu);
            let mut m = [0.0; 2];
            let mut tot = 0.0;
            for n in 0..2 {
                let wa = w[n] * a(lo + t[n] * h);
                m[0] += wa * (1.0 - t[n]);
                m[1] += wa * t[n];
                tot += wa;
            }
            mass.push(m);
            stiff.push(tot / h.powf(p));
            lo = hi;
        }
        Ok(RadialTable { mass, stiff })
    }

    /// Left and right original node of augmented cell `c`.
    #[inline]
    fn ends(c: usize) -> (usize, usize) {
        (c.saturating_sub(1), c)
    }

    pub fn integrate_power(&self, u: &[f64], f: f64) -> f64 {
        let mut s = 0.0;
        for (c, m) in self.mass.iter().enumerate() {
            let (l, r) = Self::ends(c);
            s += m[0] * u[l].abs().powf(f) + m[1] * u[r].abs().powf(f);
        }
        s
    }

    pub fn integrate_power_grad(&self, u: &[f64], f: f64, grad: &mut [f64]) -> f64 {
        let mut s = 0.0;
        for (c, m) in self.mass.iter().enumerate() {
            let (l, r) = Self::ends(c);
            for (node, w) in [(l, m[0]), (r, m[1])] {
                let a = u[node].abs();
                if a > 0.0 {
                    let pw = a.powf(f - 1.0);
                    s += w * pw * a;
                    grad[node] += w * f * pw * u[node].signum();
                }
            }
        }
        s
    }

    pub fn gradient_power(&self, u: &[f64], p: f64) -> f64 {
        self.stiff.iter().enumerate().skip(1).map(|(c, k)| k * (u[c] - u[c - 1]).abs().powf(p)).sum()
    }

    pub fn gradient_power_grad(&self, u: &[f64], p: f64, grad: &mut [f64]) -> f64 {
        let mut s = 0.0;
        for (c, k) in self.stiff.iter().enumerate().skip(1) {
            let g = u[c] - u[c - 1];
            let a = g.abs();
            if a > 0.0 {
                let pw = a.powf(p - 1.0);
                s += k * pw * a;
                let dg = k * p * pw * g.signum();
                grad[c] += dg;
                grad[c - 1] -= dg;
            }
        }
        s
    }

    /// Lagged stiffness `k |du|^{p-2}` per edge, floored relative to the largest.
    pub(crate) fn lagged(&self, u: &[f64], p: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.stiff.iter().enumerate().map(|(c, k)| {
            if c == 0 || p == 2.0 {
                *k
            } else {
                k * (u[c] - u[c - 1]).abs().powf(p - 2.0)
            }
        }).collect();
        if p != 2.0 {
            let scale = self.stiff.iter().zip(&out).map(|(k, o)| o / k).fold(0.0, f64::max);
            for (o, k) in out.iter_mut().zip(&self.stiff) {
                *o = o.max(1e-6 * scale * k);
            }
        }
        out
    }
}

/// Quotient `int rho^{d-1+c_num} |u'|^p / (int rho^{d-1+c_den} |u|^q)^{p/q}`
/// times the matching powers of the sphere area.
#[derive(Clone, Debug)]
pub struct RadialQuotient {
    pub p: f64,
    pub q: f64,
    pub(crate) num: RadialTable,
    pub(crate) den: RadialTable,
    pub(crate) area: f64,
}

impl RadialQuotient {
    pub fn new(d: u32, p: f64, q: f64, c_num: f64, c_den: f64, rho: &[f64]) -> Result<Self> {
        Self::with_multipliers(d, p, q, c_num, c_den, rho, |_| 1.0, |_| 1.0)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_multipliers(
        d: u32,
        p: f64,
        q: f64,
        c_num: f64,
        c_den: f64,
        rho: &[f64],
        a_num: impl Fn(f64) -> f64,
        a_den: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let e = d as f64 - 1.0;
        Ok(RadialQuotient {
            p,
            q,
            num: RadialTable::build(rho, e + c_num, p, a_num)?,
            den: RadialTable::build(rho, e + c_den, p, a_den)?,
            area: sphere_area(d),
        })
    }

    pub fn numerator(&self, u: &[f64]) -> f64 {
        self.area * self.num.gradient_power(u, self.p)
    }

    pub fn den_integral(&self, u: &[f64]) -> f64 {
        self.area * self.den.integrate_power(u, self.q)
    }

    pub fn quotient(&self, u: &[f64]) -> f64 {
        self.numerator(u) / self.den_integral(u).powf(self.p / self.q)
    }
}
