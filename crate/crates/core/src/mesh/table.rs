//! Per-cell quadrature coefficients for singular power weights.
//!
//! Each cell of the augmented grid carries four coefficients `c[corner]` with
//! `int_cell w f ~ sum c[corner] f(corner)` for bilinear `f`. In each coordinate
//! the geometric factor times the axis power is integrated by a two-point rule
//! built from its exact moments, so bilinear data against pure powers is
//! integrated exactly. The `|z|` factor is sampled at the resulting 2x2 points;
//! on the origin cell, where it is singular, the whole weight is integrated in
//! polar coordinates (the profile is constant there).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::params::sphere_area;
use crate::quad::{gauss_legendre, gl16, gl32, integrate, two_point_from_moments};

use super::ProfileGrid;

/// Corner offsets `(alpha, beta)` in the order used by the coefficient arrays.
pub const CORNERS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Factor depending on both coordinates.
#[derive(Clone, Debug)]
pub enum ZFactor {
    /// `|z|^c`.
    Power(f64),
    /// Average over `x'` in a sphere of radius `r` in `R^m` of
    /// `(|x' + h e|^2 + s^2)^{c/2}`: the power `|z|^c` seen by a profile
    /// translated by `h` along the singular set.
    Translated { c: f64, h: f64, m: u32, rule: Vec<(f64, f64)> },
}

impl ZFactor {
    pub fn translated(c: f64, h: f64, m: u32) -> Self {
        let rule = if m == 1 {
            vec![(1.0, 0.5), (-1.0, 0.5)]
        } else {
            let (x, w) = gauss_legendre(48);
            let e = m as f64 - 2.0;
            let raw: Vec<(f64, f64)> = x
                .iter()
                .zip(&w)
                .map(|(&t, &wt)| {
                    let th = FRAC_PI_2 * (t + 1.0);
                    (th.cos(), wt * th.sin().powf(e))
                })
                .collect();
            let tot: f64 = raw.iter().map(|x| x.1).sum();
            raw.into_iter().map(|(c, w)| (c, w / tot)).collect()
        };
        ZFactor::Translated { c, h, m, rule }
    }

    pub fn eval(&self, r: f64, s: f64) -> f64 {
        match self {
            ZFactor::Power(c) => {
                if *c == 0.0 {
                    1.0
                } else {
                    (r * r + s * s).powf(0.5 * c)
                }
            }
            ZFactor::Translated { c, h, rule, .. } => {
                let base = r * r + h * h + s * s;
                rule.iter().map(|(cs, w)| w * (base + 2.0 * h * r * cs).powf(0.5 * c)).sum()
            }
        }
    }
}

/// Two-point rule of one cell along one axis: local nodes in `[0, 1]`,
/// absolute weights, and the first two moments.
#[derive(Clone, Copy, Debug)]
struct AxisRule {
    t: [f64; 2],
    w: [f64; 2],
}

fn axis_rules(aug: &[f64], e: f64) -> Vec<AxisRule> {
    aug.windows(2)
        .map(|c| {
            let (lo, hi) = (c[0], c[1]);
            let h = hi - lo;
            let mu: [f64; 4] = if lo == 0.0 {
                std::array::from_fn(|j| h.powf(e + 1.0) / (e + j as f64 + 1.0))
            } else {
                std::array::from_fn(|j| integrate(gl16(), lo, hi, |x| x.powf(e) * ((x - lo) / h).powi(j as i32)))
            };
            let (t, w) = two_point_from_moments(mu);
            AxisRule { t, w }
        })
        .collect()
}

/// `int_0^hr int_0^hs r^B s^A |z|^c ds dr` in polar coordinates.
fn origin_integral(hr: f64, hs: f64, bexp: f64, aexp: f64, c: f64) -> Result<f64> {
    let e = aexp + bexp + c + 2.0;
    if e <= 0.0 {
        return Err(Error::DivergentWeight { axis: "origin", exponent: e - 1.0 });
    }
    let td = hs.atan2(hr);
    // theta in [0, td]: the ray leaves through r = hr; theta = td v^{1/(A+1)}
    // the integrand is smooth in th^2, which is a fractional power of v: grade toward 0
    let f1 = |v: f64| {
        let th = td * v.powf(1.0 / (aexp + 1.0));
        let sinc = if th == 0.0 { 1.0 } else { th.sin() / th };
        sinc.powf(aexp) * th.cos().powf(bexp - e)
    };
    let cuts = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0];
    let part1 = cuts.windows(2).map(|w| integrate(gl32(), w[0], w[1], f1)).sum::<f64>() * td.powf(aexp + 1.0)
        / (aexp + 1.0)
        * hr.powf(e)
        / e;
    // theta in [td, pi/2]: the ray leaves through s = hs
    let part2 = integrate(gl32(), td, FRAC_PI_2, |th| th.cos().powf(bexp) * th.sin().powf(aexp - e)) * hs.powf(e) / e;
    Ok(part1 + part2)
}

/// Quadrature coefficients for one weight on one grid.
#[derive(Clone, Debug)]
pub struct CellTable {
    pub(crate) nr: usize,
    pub(crate) ns: usize,
    /// Cell widths of the augmented grid.
    pub(crate) hr: Vec<f64>,
    pub(crate) hs: Vec<f64>,
    pub(crate) coef: Vec<[f64; 4]>,
}

/// Original node index of an augmented index.
#[inline]
pub(crate) fn orig(i: usize) -> usize {
    i.saturating_sub(1)
}

fn augment(x: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(x.iter().copied()).collect()
}

impl CellTable {
    /// Coefficients for the measure `s^{y_exp} Z(r, s) r^{d-k-1} s^{k-1} dr ds`
    /// times `|S^{d-k-1}| |S^{k-1}|`.
    pub fn build(g: &ProfileGrid, d: u32, k: u32, y_exp: f64, z: ZFactor) -> Result<CellTable> {
        let er = (d - k - 1) as f64;
        let es = k as f64 - 1.0 + y_exp;
        if es <= -1.0 {
            return Err(Error::DivergentWeight { axis: "s", exponent: es });
        }
        let (ra, sa) = (augment(&g.r), augment(&g.s));
        let (rr, sr) = (axis_rules(&ra, er), axis_rules(&sa, es));
        let (nr, ns) = (g.r.len(), g.s.len());
        let area = sphere_area(d - k) * sphere_area(k);
        let hr: Vec<f64> = ra.windows(2).map(|c| c[1] - c[0]).collect();
        let hs: Vec<f64> = sa.windows(2).map(|c| c[1] - c[0]).collect();
        let mut coef = vec![[0.0; 4]; nr * ns];
        let zpow = match z {
            ZFactor::Power(c) => Some(c),
            _ => None,
        };
        for ci in 0..nr {
            for cj in 0..ns {
                let (a, b) = (rr[ci], sr[cj]);
                let cell = &mut coef[ci * ns + cj];
                if ci == 0 && cj == 0 && zpow.is_some_and(|c| c != 0.0) {
                    let tot = origin_integral(hr[0], hs[0], er, es, zpow.unwrap())? * area;
                    *cell = [0.25 * tot; 4];
                    continue;
                }
                for m in 0..2 {
                    let r = ra[ci] + a.t[m] * hr[ci];
                    for n in 0..2 {
                        let s = sa[cj] + b.t[n] * hs[cj];
                        let w = a.w[m] * b.w[n] * z.eval(r, s) * area;
                        let (pr, ps) = ([1.0 - a.t[m], a.t[m]], [1.0 - b.t[n], b.t[n]]);
                        for (c, &(al, be)) in CORNERS.iter().enumerate() {
                            cell[c] += w * pr[al] * ps[be];
                        }
                    }
                }
            }
        }
        Ok(CellTable { nr, ns, hr, hs, coef })
    }

    /// Original node indices of the four corners of cell `(ci, cj)`.
    #[inline]
    pub(crate) fn corner_nodes(&self, ci: usize, cj: usize) -> [usize; 4] {
        std::array::from_fn(|c| {
            let (al, be) = CORNERS[c];
            orig(ci + al) * self.ns + orig(cj + be)
        })
    }

    /// `sum c |u|^f` over all cells.
    pub fn integrate_power(&self, values: &[f64], ns: usize, f: f64) -> f64 {
        debug_assert_eq!(ns, self.ns);
        let mut total = 0.0;
        for ci in 0..self.nr {
            for cj in 0..self.ns {
                let nodes = self.corner_nodes(ci, cj);
                let c = &self.coef[ci * self.ns + cj];
                for k in 0..4 {
                    total += c[k] * pow_abs(values[nodes[k]], f);
                }
            }
        }
        total
    }

    /// Value of `sum c |u|^f` and its gradient (accumulated into `grad`).
    pub fn integrate_power_grad(&self, values: &[f64], f: f64, grad: &mut [f64]) -> f64 {
        let mut total = 0.0;
        for ci in 0..self.nr {
            for cj in 0..self.ns {
                let nodes = self.corner_nodes(ci, cj);
                let c = &self.coef[ci * self.ns + cj];
                for k in 0..4 {
                    let u = values[nodes[k]];
                    let a = u.abs();
                    if a > 0.0 {
                        let pw = a.powf(f - 1.0);
                        total += c[k] * pw * a;
                        grad[nodes[k]] += c[k] * f * pw * u.signum();
                    }
                }
            }
        }
        total
    }

    /// Corner gradients of cell `(ci, cj)`: `(g_r, g_s)` per corner.
    #[inline]
    pub(crate) fn corner_gradients(&self, values: &[f64], ci: usize, cj: usize) -> [(f64, f64); 4] {
        let n = self.corner_nodes(ci, cj);
        let (hr, hs) = (self.hr[ci], self.hs[cj]);
        let gr0 = (values[n[1]] - values[n[0]]) / hr;
        let gr1 = (values[n[3]] - values[n[2]]) / hr;
        let gs0 = (values[n[2]] - values[n[0]]) / hs;
        let gs1 = (values[n[3]] - values[n[1]]) / hs;
        [(gr0, gs0), (gr0, gs1), (gr1, gs0), (gr1, gs1)]
    }

    /// `sum c ((g_r^2 + g_s^2 + delta^2)^{p/2} - delta^p)`.
    pub fn gradient_power(&self, g: &ProfileGrid, values: &[f64], p: f64, delta: f64) -> f64 {
        debug_assert_eq!(g.s.len(), self.ns);
        let dp = delta.powf(p);
        let mut total = 0.0;
        for ci in 0..self.nr {
            for cj in 0..self.ns {
                let c = &self.coef[ci * self.ns + cj];
                let gr = self.corner_gradients(values, ci, cj);
                for k in 0..4 {
                    let (a, b) = gr[k];
                    total += c[k] * (energy_density(a * a + b * b, p, delta) - dp);
                }
            }
        }
        total
    }

    /// Value of [`CellTable::gradient_power`] and its gradient with respect to
    /// the nodal values (accumulated into `grad`).
    pub fn gradient_power_grad(&self, values: &[f64], p: f64, delta: f64, grad: &mut [f64]) -> f64 {
        let dp = delta.powf(p);
        let mut total = 0.0;
        for ci in 0..self.nr {
            for cj in 0..self.ns {
                let c = &self.coef[ci * self.ns + cj];
                let n = self.corner_nodes(ci, cj);
                let (hr, hs) = (self.hr[ci], self.hs[cj]);
                let gr = self.corner_gradients(values, ci, cj);
                // d/d(g_r) and d/d(g_s) summed per edge
                let mut dr = [0.0; 2];
                let mut ds = [0.0; 2];
                for k in 0..4 {
                    let (a, b) = gr[k];
                    let t = a * a + b * b;
                    total += c[k] * (energy_density(t, p, delta) - dp);
                    let slope = c[k] * energy_slope(t, p, delta);
                    let (al, be) = CORNERS[k];
                    dr[be] += slope * a;
                    ds[al] += slope * b;
                }
                // g_r on edge be joins corners (0,be) and (1,be)
                grad[n[1]] += dr[0] / hr;
                grad[n[0]] -= dr[0] / hr;
                grad[n[3]] += dr[1] / hr;
                grad[n[2]] -= dr[1] / hr;
                grad[n[2]] += ds[0] / hs;
                grad[n[0]] -= ds[0] / hs;
                grad[n[3]] += ds[1] / hs;
                grad[n[1]] -= ds[1] / hs;
            }
        }
        total
    }
}

#[inline]
fn pow_abs(u: f64, f: f64) -> f64 {
    let a = u.abs();
    if a == 0.0 {
        0.0
    } else if f == 2.0 {
        a * a
    } else {
        a.powf(f)
    }
}

/// `(t + delta^2)^{p/2}` with `t = |g|^2`.
#[inline]
pub(crate) fn energy_density(t: f64, p: f64, delta: f64) -> f64 {
    if p == 2.0 {
        t + delta * delta
    } else {
        (t + delta * delta).powf(0.5 * p)
    }
}

/// Derivative of the density with respect to each gradient component divided by
/// that component: `p (t + delta^2)^{(p-2)/2}`.
#[inline]
pub(crate) fn energy_slope(t: f64, p: f64, delta: f64) -> f64 {
    if p == 2.0 {
        2.0
    } else {
        let base = t + delta * delta;
        if base == 0.0 {
            0.0
        } else {
            p * base.powf(0.5 * p - 1.0)
        }
    }
}
