//! Exponent tuples, their derived quantities and the admissibility tests.
//!
//! Points of `R^d` are written `z = (x, y)` with `x` in `R^{d-k}` and `y` in
//! `R^k`; the weights are powers of `|y|` and `|z|`.

mod verdict;

pub use verdict::{classify, Attainability, Regime, Verdict};

use serde::{Deserialize, Deserializer, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance used when an exponent is compared with a critical value.
pub const EXPONENT_TOL: f64 = 1e-12;

pub(crate) fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= EXPONENT_TOL * (1.0 + x.abs().max(y.abs()))
}

/// The exponent tuple `(d, k, p, q, a, b, gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamSet {
    pub d: u32,
    pub k: u32,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl ParamSet {
    /// Builds and validates a tuple.
    pub fn new(d: u32, k: u32, p: f64, q: f64, a: f64, b: f64, gamma: f64) -> Result<Self> {
        let ps = ParamSet { d, k, p, q, a, b, gamma };
        ps.validate()?;
        Ok(ps)
    }

    /// Checks `d > k >= 1`, `p > 1`, `q > p` and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.d <= self.k {
            return Err(Error::InvalidParams(format!(
                "need d > k >= 1, got d = {}, k = {}",
                self.d, self.k
            )));
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("a", self.a), ("b", self.b), ("gamma", self.gamma)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.p <= 1.0 {
            return Err(Error::InvalidParams(format!("need p > 1, got {}", self.p)));
        }
        if self.q <= self.p {
            return Err(Error::InvalidParams(format!("need q > p, got q = {}, p = {}", self.q, self.p)));
        }
        Ok(())
    }

    pub fn df(&self) -> f64 {
        self.d as f64
    }

    pub fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `H_t = (d - p + t) / p`.
    pub fn h_of(&self, t: f64) -> f64 {
        (self.df() - self.p + t) / self.p
    }

    /// Exponent of `|y|` in the denominator weight.
    pub fn theta(&self) -> f64 {
        -self.df() + (self.df() - self.p + self.a - self.b + self.gamma) * self.q / self.p
    }

    /// Sobolev exponent, `+inf` when `p >= d`.
    pub fn p_star(&self) -> f64 {
        p_star(self.df(), self.p)
    }

    /// Critical exponent for the effective dimension `d + max(a, 0)`.
    pub fn p_star_eff(&self) -> f64 {
        p_star(self.df() + self.a.max(0.0), self.p)
    }

    /// Sharp Hardy constant `H_{a-b}^p`.
    pub fn hardy_constant(&self) -> f64 {
        self.h_of(self.a - self.b).powf(self.p)
    }

    pub fn is_critical(&self) -> bool {
        self.p < self.df() && near(self.q, self.p_star())
    }

    pub fn is_supercritical(&self) -> bool {
        self.p < self.df() && !self.is_critical() && self.q > self.p_star()
    }

    pub fn is_bottom(&self) -> bool {
        near(self.gamma, self.b)
    }

    /// The same tuple with `b = gamma = 0`.
    pub fn cylindrical(&self) -> ParamSet {
        ParamSet { b: 0.0, gamma: 0.0, ..*self }
    }

    /// The same tuple with `gamma` locked to `b`.
    pub fn bottom(&self, b: f64) -> ParamSet {
        ParamSet { b, gamma: b, ..*self }
    }

    /// Exponent of `|y|` in the purely cylindrical denominator, `-d + q H_a`.
    pub fn cylindrical_theta(&self) -> f64 {
        -self.df() + self.q * self.h_of(self.a)
    }

    /// Exponent gamma that makes the denominator scale like the effective dimension,
    /// `gamma = b + ((d + a) p - q (d - p + a)) / q`.
    pub fn effective_gamma(&self) -> f64 {
        self.b + ((self.df() + self.a) * self.p - self.q * (self.df() - self.p + self.a)) / self.q
    }
}

pub fn p_star(d: f64, p: f64) -> f64 {
    if p < d {
        d * p / (d - p)
    } else {
        f64::INFINITY
    }
}

/// Symbolic or numeric value of `q` as accepted by configuration files.
#[derive(Clone, Debug, PartialEq)]
pub enum QSpec {
    Value(f64),
    PStar,
    PStarEff,
}

impl QSpec {
    pub fn parse(s: &str) -> Result<QSpec> {
        match s.trim() {
            "pstar" => Ok(QSpec::PStar),
            "pstar_eff" => Ok(QSpec::PStarEff),
            t => t
                .parse::<f64>()
                .map(QSpec::Value)
                .map_err(|_| Error::Parse(format!("q: expected a number, \"pstar\" or \"pstar_eff\", got {t:?}"))),
        }
    }

    /// Resolves the symbolic forms against `(d, p, a)`.
    pub fn resolve(&self, d: u32, p: f64, a: f64) -> Result<f64> {
        let q = match self {
            QSpec::Value(v) => *v,
            QSpec::PStar => p_star(d as f64, p),
            QSpec::PStarEff => p_star(d as f64 + a.max(0.0), p),
        };
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::InvalidParams(format!("critical exponent is infinite for d = {d}, p = {p}")))
        }
    }
}

impl<'de> Deserialize<'de> for QSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(QSpec::Value(v)),
            Raw::Text(s) => QSpec::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

impl<'de> Deserialize<'de> for ParamSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            d: u32,
            k: u32,
            p: f64,
            q: QSpec,
            a: f64,
            b: f64,
            gamma: f64,
        }
        let raw = Raw::deserialize(de)?;
        let q = raw.q.resolve(raw.d, raw.p, raw.a).map_err(serde::de::Error::custom)?;
        Ok(ParamSet { d: raw.d, k: raw.k, p: raw.p, q, a: raw.a, b: raw.b, gamma: raw.gamma })
    }
}

/// True iff `k + a > 0`, `b < d - p + a` and `q H_{a-b+gamma} > d - k`.
pub fn admissible_base(ps: &ParamSet) -> bool {
    ps.kf() + ps.a > 0.0
        && ps.b < ps.df() - ps.p + ps.a
        && ps.q * ps.h_of(ps.a - ps.b + ps.gamma) > ps.df() - ps.kf()
}

/// Names the first failing base condition, if any.
pub fn base_violation(ps: &ParamSet) -> Option<&'static str> {
    if ps.kf() + ps.a <= 0.0 {
        Some("k + a > 0")
    } else if ps.b >= ps.df() - ps.p + ps.a {
        Some("b < d - p + a")
    } else if ps.q * ps.h_of(ps.a - ps.b + ps.gamma) <= ps.df() - ps.kf() {
        Some("q H_{a-b+gamma} > d - k")
    } else {
        None
    }
}

/// Whether the optimal constant is positive: `(d - p) q <= d p` and `gamma >= b`.
pub fn positivity(ps: &ParamSet) -> Result<bool> {
    if let Some(cond) = base_violation(ps) {
        return Err(Error::InadmissibleBase(cond.to_string()));
    }
    let a1 = (ps.df() - ps.p) * ps.q <= ps.df() * ps.p || ps.is_critical();
    let a2 = ps.gamma >= ps.b || ps.is_bottom();
    Ok(a1 && a2)
}

/// Purely cylindrical admissibility: `k + a > 0`, `q H_a > d - k`, `(d - p) q <= d p`.
pub fn assu_cyl(ps: &ParamSet) -> bool {
    ps.kf() + ps.a > 0.0
        && ps.q * ps.h_of(ps.a) > ps.df() - ps.kf()
        && ((ps.df() - ps.p) * ps.q <= ps.df() * ps.p || ps.is_critical())
}

/// Parameters of the weighted Sobolev inequality attached to the fractional
/// Laplacian `(-Delta)^s` on `R^n`.
pub fn caffarelli_silvestre_params(n: u32, s: f64) -> Result<ParamSet> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("need n >= 2, got {n}")));
    }
    if !(0.5..1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("need 1/2 <= s < 1, got {s}")));
    }
    let nf = n as f64;
    let p = 2.0;
    let q = 2.0 * (nf + 1.0) / (nf - 1.0);
    let a = 1.0 - 2.0 * s;
    let gamma = -2.0 * a / ((nf - 1.0) * (q / p));
    ParamSet::new(n + 1, 1, p, q, a, 0.0, gamma)
}

/// Area of the unit sphere `S^{m-1}` in `R^m`; `|S^0| = 2`.
pub fn sphere_area(m: u32) -> f64 {
    let h = m as f64 / 2.0;
    2.0 * PI.powf(h) / ln_gamma(h).exp()
}

/// Closed-form Sobolev constant for `D^{1,p}(R^d)`, `p < d`.
pub fn sobolev_constant(d: u32, p: f64) -> Result<f64> {
    let df = d as f64;
    if !(p > 1.0 && p < df) {
        return Err(Error::OutOfRange(format!("need 1 < p < d, got p = {p}, d = {d}")));
    }
    let ratio = ln_gamma(df / p) + ln_gamma(1.0 + df - df / p) - ln_gamma(1.0 + df / 2.0) - ln_gamma(df);
    Ok(PI.powf(p / 2.0) * df * ((df - p) / (p - 1.0)).powf(p - 1.0) * (ratio * p / df).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(d: u32, k: u32, p: f64, q: f64, a: f64, b: f64, g: f64) -> ParamSet {
        ParamSet::new(d, k, p, q, a, b, g).unwrap()
    }

    #[test]
    fn admissible_base_examples() {
        assert!(admissible_base(&ps(3, 1, 2.0, 4.0, 1.0, 0.0, 0.0)));
        assert!(!admissible_base(&ps(3, 1, 2.0, 4.0, -1.0, 0.0, 0.0)));
        assert!(admissible_base(&ps(4, 2, 2.0, 4.0, 0.0, 1.0, 1.0)));
    }

    #[test]
    fn positivity_examples() {
        assert!(positivity(&ps(3, 1, 2.0, 6.0, 0.0, 0.0, 0.0)).unwrap());
        assert!(!positivity(&ps(3, 1, 2.0, 4.0, 1.0, 0.5, 0.0)).unwrap());
        assert!(positivity(&ps(2, 1, 2.0, 10.0, 3.0, 0.0, 0.0)).unwrap());
        assert!(matches!(positivity(&ps(3, 1, 2.0, 4.0, -1.0, 0.0, 0.0)), Err(Error::InadmissibleBase(_))));
    }

    #[test]
    fn invariants_rejected() {
        assert!(ParamSet::new(3, 3, 2.0, 4.0, 0.0, 0.0, 0.0).is_err());
        assert!(ParamSet::new(3, 0, 2.0, 4.0, 0.0, 0.0, 0.0).is_err());
        assert!(ParamSet::new(3, 1, 1.0, 4.0, 0.0, 0.0, 0.0).is_err());
        assert!(ParamSet::new(3, 1, 2.0, 2.0, 0.0, 0.0, 0.0).is_err());
        assert!(ParamSet::new(3, 1, 2.0, f64::NAN, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn caffarelli_silvestre_examples() {
        let p = caffarelli_silvestre_params(2, 0.5).unwrap();
        assert_eq!((p.d, p.k, p.p, p.q, p.a, p.b, p.gamma), (3, 1, 2.0, 6.0, 0.0, 0.0, 0.0));
        let p = caffarelli_silvestre_params(3, 0.75).unwrap();
        assert_eq!((p.d, p.k, p.p, p.q), (4, 1, 2.0, 4.0));
        assert!((p.a + 0.5).abs() < 1e-15);
        assert!((p.gamma - 0.25).abs() < 1e-15);
        assert!(matches!(caffarelli_silvestre_params(2, 0.3), Err(Error::OutOfRange(_))));
        assert!(matches!(caffarelli_silvestre_params(2, 1.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn caffarelli_silvestre_denominator_weight() {
        // |y|^{1-2s} |z|^{2(1-2s)/(n-1)}
        for (n, s) in [(2, 0.6), (3, 0.75), (5, 0.9)] {
            let p = caffarelli_silvestre_params(n, s).unwrap();
            assert!((p.theta() - (1.0 - 2.0 * s)).abs() < 1e-12);
            let z_exp = -p.gamma * p.q / p.p;
            assert!((z_exp - 2.0 * (1.0 - 2.0 * s) / (n as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn derived_quantities() {
        let p = ps(4, 2, 2.0, 3.0, 0.5, 0.25, 1.0);
        assert_eq!(p.h_of(0.0), 1.0);
        assert!((p.theta() - (-4.0 + (4.0 - 2.0 + 0.5 - 0.25 + 1.0) * 1.5)).abs() < 1e-15);
        assert_eq!(p.p_star(), 4.0);
        assert!((p.p_star_eff() - 4.5 * 2.0 / 2.5).abs() < 1e-15);
        let n = ps(4, 2, 2.0, 3.0, -0.5, 0.0, 0.0);
        assert_eq!(n.p_star_eff(), n.p_star());
        assert_eq!(ps(2, 1, 2.0, 4.0, 0.0, 0.0, 0.0).p_star(), f64::INFINITY);
        assert!((p.hardy_constant() - 1.125f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn effective_dimension_theta() {
        for a in [0.1, 0.5, 1.0, 2.5] {
            for b in [-0.5, 0.0, 0.3] {
                let base = ps(4, 2, 2.0, 3.0, a, b, b);
                let q = base.p_star_eff();
                let g = ParamSet { q, ..base }.effective_gamma();
                let p = ParamSet { q, gamma: g, ..base };
                assert!((g - b).abs() < 1e-12);
                assert!((p.theta() - a).abs() < 1e-12, "a = {a}, b = {b}");
            }
        }
    }

    #[test]
    fn pstar_json() {
        let p: ParamSet =
            serde_json::from_str(r#"{"d":4,"k":2,"p":2,"q":"pstar","a":1,"b":-0.5,"gamma":-0.5}"#).unwrap();
        assert_eq!(p.q, 4.0);
        let back: ParamSet = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let e: ParamSet =
            serde_json::from_str(r#"{"d":3,"k":1,"p":2,"q":"pstar_eff","a":1,"b":0,"gamma":0}"#).unwrap();
        assert_eq!(e.q, 8.0 / 2.0);
        assert!(serde_json::from_str::<ParamSet>(r#"{"d":2,"k":1,"p":2,"q":"pstar","a":0,"b":0,"gamma":0}"#).is_err());
    }

    #[test]
    fn sobolev_values() {
        assert!((sobolev_constant(3, 2.0).unwrap() - 5.477904089531332).abs() < 1e-12);
        assert!((sobolev_constant(4, 2.0).unwrap() - 10.260398641294913).abs() < 1e-11);
        assert!((sobolev_constant(5, 3.0).unwrap() - 7.19354458958458).abs() < 1e-11);
        assert!(sobolev_constant(2, 2.0).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }
}
