//! Rayleigh quotients, the Hardy quotient, the `T_b` transform and related
//! identities, evaluated on discrete profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{CellTable, ProfileGrid, ZFactor};
use crate::params::{admissible_base, assu_cyl, base_violation, near, ParamSet};

/// Denominators below this are treated as zero.
pub const ZERO_DENOMINATOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuotientKind {
    HardySobolev,
    Hardy,
    Mazya,
    BottomJb,
}

/// One quotient evaluation. `denominator` is already raised to its outer power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub kind: QuotientKind,
    pub quotient: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub quad_error: f64,
    pub params: ParamSet,
}

/// Weights of a quotient
/// `(int w_1 |grad u|^p + c int w_2 |u|^2) / (int w_3 |u|^f)^e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientShape {
    pub p: f64,
    pub num: (f64, f64),
    pub extra: Option<(f64, f64, f64)>,
    pub den: (f64, f64),
    pub den_power: f64,
    pub outer: f64,
}

impl QuotientShape {
    pub fn new(kind: QuotientKind, ps: &ParamSet) -> Self {
        let (p, q, a, b, g) = (ps.p, ps.q, ps.a, ps.b, ps.gamma);
        match kind {
            QuotientKind::HardySobolev => QuotientShape {
                p,
                num: (a, -b),
                extra: None,
                den: (ps.theta(), -g * q / p),
                den_power: q,
                outer: p / q,
            },
            QuotientKind::Hardy => QuotientShape {
                p,
                num: (a, -b),
                extra: None,
                den: (a, -b - p),
                den_power: p,
                outer: 1.0,
            },
            QuotientKind::Mazya => QuotientShape {
                p,
                num: (a, 0.0),
                extra: None,
                den: (ps.cylindrical_theta(), 0.0),
                den_power: q,
                outer: p / q,
            },
            QuotientKind::BottomJb => QuotientShape {
                p,
                num: (a, 0.0),
                extra: Some((jb_coefficient(ps), a, -2.0)),
                den: (ps.cylindrical_theta(), 0.0),
                den_power: q,
                outer: p / q,
            },
        }
    }
}

/// `(b/2)(b/2 - 2 H_a)`.
pub fn jb_coefficient(ps: &ParamSet) -> f64 {
    0.5 * ps.b * (0.5 * ps.b - 2.0 * ps.h_of(ps.a))
}

/// A quotient bound to a grid: precomputed quadrature tables, value and gradient.
#[derive(Clone, Debug)]
pub struct DiscreteQuotient {
    pub shape: QuotientShape,
    pub(crate) num: CellTable,
    pub(crate) extra: Option<(f64, CellTable)>,
    pub(crate) den: CellTable,
    pub ns: usize,
    /// Regularization of `|grad u|` in the numerator.
    pub delta: f64,
}

/// Parts of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parts {
    pub numerator: f64,
    /// Denominator integral before the outer power.
    pub den_integral: f64,
    pub quotient: f64,
}

impl DiscreteQuotient {
    pub fn new(shape: QuotientShape, g: &ProfileGrid, d: u32, k: u32) -> Result<Self> {
        let num = CellTable::build(g, d, k, shape.num.0, ZFactor::Power(shape.num.1))?;
        let extra = match shape.extra {
            Some((c, y, z)) => Some((c, CellTable::build(g, d, k, y, ZFactor::Power(z))?)),
            None => None,
        };
        let den = CellTable::build(g, d, k, shape.den.0, ZFactor::Power(shape.den.1))?;
        Ok(DiscreteQuotient { shape, num, extra, den, ns: g.ns(), delta: 0.0 })
    }

    /// Same shape with the `|z|` factors replaced by their averages seen from a
    /// translation by `h` along the singular set.
    pub fn translated(shape: QuotientShape, g: &ProfileGrid, d: u32, k: u32, h: f64) -> Result<Self> {
        let m = d - k;
        let num = CellTable::build(g, d, k, shape.num.0, ZFactor::translated(shape.num.1, h, m))?;
        let extra = match shape.extra {
            Some((c, y, z)) => Some((c, CellTable::build(g, d, k, y, ZFactor::translated(z, h, m))?)),
            None => None,
        };
        let den = CellTable::build(g, d, k, shape.den.0, ZFactor::translated(shape.den.1, h, m))?;
        Ok(DiscreteQuotient { shape, num, extra, den, ns: g.ns(), delta: 0.0 })
    }

    pub fn numerator(&self, g: &ProfileGrid, values: &[f64]) -> f64 {
        let mut n = self.num.gradient_power(g, values, self.shape.p, self.delta);
        if let Some((c, t)) = &self.extra {
            n += c * t.integrate_power(values, self.ns, 2.0);
        }
        n
    }

    pub fn den_integral(&self, values: &[f64]) -> f64 {
        self.den.integrate_power(values, self.ns, self.shape.den_power)
    }

    pub fn eval(&self, g: &ProfileGrid, values: &[f64]) -> Parts {
        let n = self.numerator(g, values);
        let di = self.den_integral(values);
        Parts { numerator: n, den_integral: di, quotient: n / di.powf(self.shape.outer) }
    }

    /// Numerator and its gradient (written into `grad`, which is cleared).
    pub fn numerator_grad(&self, values: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|x| *x = 0.0);
        let mut n = self.num.gradient_power_grad(values, self.shape.p, self.delta, grad);
        if let Some((c, t)) = &self.extra {
            let mut tmp = vec![0.0; grad.len()];
            n += c * t.integrate_power_grad(values, 2.0, &mut tmp);
            grad.iter_mut().zip(&tmp).for_each(|(g, t)| *g += c * t);
        }
        n
    }

    /// Denominator integral and its gradient (written into `grad`).
    pub fn den_grad(&self, values: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|x| *x = 0.0);
        self.den.integrate_power_grad(values, self.shape.den_power, grad)
    }

    /// Quotient and its gradient with respect to the nodal values.
    pub fn eval_grad(&self, values: &[f64], grad: &mut [f64]) -> Parts {
        let mut gd = vec![0.0; values.len()];
        let n = self.numerator_grad(values, grad);
        let di = self.den_grad(values, &mut gd);
        let e = self.shape.outer;
        let dpow = di.powf(e);
        let r = n / dpow;
        let f = e * r / di;
        grad.iter_mut().zip(&gd).for_each(|(g, d)| *g = *g / dpow - f * d);
        Parts { numerator: n, den_integral: di, quotient: r }
    }
}

fn check_grid(ps: &ParamSet, g: &ProfileGrid) -> Result<()> {
    ps.validate()?;
    if g.d != 0 && (g.d != ps.d || g.k != ps.k) {
        return Err(Error::InvalidParams(format!(
            "grid built for d = {}, k = {} but parameters have d = {}, k = {}",
            g.d, g.k, ps.d, ps.k
        )));
    }
    Ok(())
}

fn evaluate(kind: QuotientKind, ps: &ParamSet, g: &ProfileGrid) -> Result<QuotientReport> {
    check_grid(ps, g)?;
    let shape = QuotientShape::new(kind, ps);
    let run = |g: &ProfileGrid| -> Result<Parts> {
        Ok(DiscreteQuotient::new(shape, g, ps.d, ps.k)?.eval(g, &g.values))
    };
    let fine = run(g)?;
    if !(fine.den_integral.abs() >= ZERO_DENOMINATOR) {
        return Err(Error::ZeroDenominator);
    }
    let quad_error = match run(&g.coarsened()) {
        Ok(c) if c.den_integral.abs() >= ZERO_DENOMINATOR && c.quotient.is_finite() => {
            (fine.quotient - c.quotient).abs() / 3.0
        }
        _ => fine.quotient.abs(),
    };
    Ok(QuotientReport {
        kind,
        quotient: fine.quotient,
        numerator: fine.numerator,
        denominator: fine.den_integral.powf(shape.outer),
        quad_error,
        params: *ps,
    })
}

/// Hardy-Sobolev quotient with numerator weight `|y|^a |z|^{-b}` and
/// denominator weight `|y|^Theta |z|^{-gamma q/p}`.
pub fn rayleigh_hs(ps: &ParamSet, g: &ProfileGrid) -> Result<QuotientReport> {
    if let Some(c) = base_violation(ps) {
        return Err(Error::InadmissibleBase(c.to_string()));
    }
    evaluate(QuotientKind::HardySobolev, ps, g)
}

/// `int |y|^a |z|^{-b} |grad u|^p / int |y|^a |z|^{-b-p} |u|^p`.
pub fn hardy_quotient(ps: &ParamSet, g: &ProfileGrid) -> Result<QuotientReport> {
    if !(ps.kf() + ps.a > 0.0 && ps.b < ps.df() - ps.p + ps.a) {
        return Err(Error::InadmissibleBase("k + a > 0 and b < d - p + a".into()));
    }
    evaluate(QuotientKind::Hardy, ps, g)
}

/// Purely cylindrical quotient (`b = gamma = 0`).
pub fn mazya_quotient(ps: &ParamSet, g: &ProfileGrid) -> Result<QuotientReport> {
    if !assu_cyl(ps) {
        return Err(Error::InadmissibleBase("k + a > 0, q H_a > d - k, (d - p) q <= d p".into()));
    }
    evaluate(QuotientKind::Mazya, ps, g)
}

fn check_hilbert(ps: &ParamSet) -> Result<()> {
    if !near(ps.p, 2.0) {
        return Err(Error::WrongP(ps.p));
    }
    if ps.b >= 2.0 * ps.h_of(ps.a) {
        return Err(Error::OutOfRange(format!("need b < 2H_a = {}, got b = {}", 2.0 * ps.h_of(ps.a), ps.b)));
    }
    if !assu_cyl(ps) {
        return Err(Error::InadmissibleBase("k + a > 0, q H_a > d - k, (d - 2) q <= 2 d".into()));
    }
    Ok(())
}

/// The transformed bottom-case quotient
/// `(int |y|^a |grad v|^2 + c_b int |y|^a |z|^{-2} v^2) / (int |y|^{-d+qH_a} |v|^q)^{2/q}`.
pub fn bottom_jb(ps: &ParamSet, g: &ProfileGrid) -> Result<QuotientReport> {
    check_hilbert(ps)?;
    evaluate(QuotientKind::BottomJb, ps, g)
}

/// `v = |z|^{-b/2} u` on the same nodes.
pub fn transform_tb(ps: &ParamSet, g: &ProfileGrid) -> ProfileGrid {
    let e = -0.25 * ps.b;
    let mut out = g.clone();
    let ns = g.ns();
    for (i, &r) in g.r.iter().enumerate() {
        for (j, &s) in g.s.iter().enumerate() {
            out.values[i * ns + j] = (r * r + s * s).powf(e) * g.values[i * ns + j];
        }
    }
    out
}

/// Relative residual of the integration-by-parts identity behind `T_b`.
pub fn verify_tb_identity(ps: &ParamSet, g: &ProfileGrid) -> Result<f64> {
    check_grid(ps, g)?;
    if !near(ps.p, 2.0) {
        return Err(Error::WrongP(ps.p));
    }
    let (d, k) = (ps.d, ps.k);
    let lhs = CellTable::build(g, d, k, ps.a, ZFactor::Power(-ps.b))?.gradient_power(g, &g.values, 2.0, 0.0);
    let v = transform_tb(ps, g);
    let grad = CellTable::build(g, d, k, ps.a, ZFactor::Power(0.0))?.gradient_power(&v, &v.values, 2.0, 0.0);
    let c = jb_coefficient(ps);
    let rhs = if c == 0.0 {
        grad
    } else {
        grad + c * CellTable::build(g, d, k, ps.a, ZFactor::Power(-2.0))?.integrate_power(&v.values, g.ns(), 2.0)
    };
    if lhs == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((lhs - rhs).abs() / lhs.abs())
}

/// Slack of the triangle-inequality chain
/// `(int |y|^a|z|^{-b}|grad v|^p)^{1/p} + (|b|/p)(int |y|^a|z|^{-b-p}|v|^p)^{1/p}
///  - M^{1/p} (int |y|^{-d+qH_a}|z|^{-bq/p}|v|^q)^{1/q}`.
pub fn mazya_chain_bound(ps: &ParamSet, g: &ProfileGrid, mazya_estimate: f64) -> Result<f64> {
    check_grid(ps, g)?;
    if !assu_cyl(ps) {
        return Err(Error::InadmissibleBase("k + a > 0, q H_a > d - k, (d - p) q <= d p".into()));
    }
    if ps.b >= ps.p * ps.h_of(ps.a) {
        return Err(Error::OutOfRange(format!("need b < pH_a, got b = {}", ps.b)));
    }
    let (d, k, p, q, b) = (ps.d, ps.k, ps.p, ps.q, ps.b);
    let grad = CellTable::build(g, d, k, ps.a, ZFactor::Power(-b))?.gradient_power(g, &g.values, p, 0.0);
    let hardy = CellTable::build(g, d, k, ps.a, ZFactor::Power(-b - p))?.integrate_power(&g.values, g.ns(), p);
    let den = CellTable::build(g, d, k, ps.cylindrical_theta(), ZFactor::Power(-b * q / p))?
        .integrate_power(&g.values, g.ns(), q);
    if den < ZERO_DENOMINATOR {
        return Err(Error::ZeroDenominator);
    }
    Ok(grad.powf(1.0 / p) + b.abs() / p * hardy.powf(1.0 / p) - mazya_estimate.powf(1.0 / p) * den.powf(1.0 / q))
}

/// Whether the tuple admits the bottom quotient `S_{a,b,b}` at all.
pub fn bottom_admissible(ps: &ParamSet) -> bool {
    admissible_base(&ps.bottom(ps.b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, Grading};
    use crate::params::sobolev_constant;

    fn bump(r: f64, s: f64) -> f64 {
        let t = (r - 1.5).powi(2) + (s - 1.5).powi(2);
        if t < 1.0 { (-1.0 / (1.0 - t)).exp() } else { 0.0 }
    }

    fn ps(d: u32, k: u32, p: f64, q: f64, a: f64, b: f64, g: f64) -> ParamSet {
        ParamSet::new(d, k, p, q, a, b, g).unwrap()
    }

    #[test]
    fn talenti_profile_gives_sobolev_constant() {
        let p = ps(3, 1, 2.0, 6.0, 0.0, 0.0, 0.0);
        let lam = 0.05;
        let g = build_grid(160, 160, 20.0, Grading::LogGraded)
            .unwrap()
            .fill(|r, s| (1.0 + (r * r + s * s) / (lam * lam)).powf(-0.5) - (1.0 + 800.0 / (lam * lam)).powf(-0.5));
        let rep = rayleigh_hs(&p, &g).unwrap();
        let s = sobolev_constant(3, 2.0).unwrap();
        assert!((rep.quotient - s).abs() < 0.02 * s, "{} vs {s}", rep.quotient);
        assert!(rep.quotient >= 0.0);
        let m = mazya_quotient(&p, &g).unwrap();
        assert!((m.quotient - rep.quotient).abs() < 1e-12 * s);
    }

    #[test]
    fn quotient_is_numerator_over_denominator() {
        let p = ps(4, 2, 2.0, 3.0, 0.5, 0.25, 0.75);
        let g = build_grid(32, 32, 3.0, Grading::Uniform).unwrap().fill(bump);
        let r = rayleigh_hs(&p, &g).unwrap();
        assert!((r.quotient - r.numerator / r.denominator).abs() < 1e-12 * r.quotient);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["kind", "quotient", "numerator", "denominator", "quad_error", "params"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn zero_profile_is_rejected() {
        let p = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.5);
        let g = build_grid(16, 16, 3.0, Grading::Uniform).unwrap();
        assert!(matches!(rayleigh_hs(&p, &g), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn sliding_along_singular_set_with_gamma_below_b() {
        // support touching the singular set, moved outward in r: quotient decays like c^{-1/6}
        let p = ps(4, 2, 2.0, 3.0, 0.0, 0.5, 0.0);
        let mut prev = f64::INFINITY;
        for c in [2.0, 8.0, 32.0] {
            let g = build_grid(12 * (c as usize + 2), 12 * (c as usize + 2), c + 2.0, Grading::Uniform).unwrap().fill(|r, s| {
                let t = (r - c).powi(2) + s * s;
                if t < 1.0 { (1.0 - t).powi(3) } else { 0.0 }
            });
            let q = rayleigh_hs(&p, &g).unwrap().quotient;
            assert!(q < prev, "c = {c}: {q} vs {prev}");
            prev = q;
        }
        assert!(prev < 0.85 * rayleigh_hs(&p, &build_grid(48, 48, 4.0, Grading::Uniform).unwrap().fill(|r, s| {
            let t = (r - 2.0).powi(2) + s * s;
            if t < 1.0 { (1.0 - t).powi(3) } else { 0.0 }
        })).unwrap().quotient);
    }

    #[test]
    fn hardy_lower_bounds() {
        let g = build_grid(64, 64, 3.0, Grading::Uniform).unwrap().fill(bump);
        let q = hardy_quotient(&ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0), &g).unwrap();
        assert!(q.quotient >= 1.0 - 10.0 * q.quad_error);
        let radial = build_grid(64, 64, 3.0, Grading::Uniform).unwrap().fill(|r, s| {
            let t = (r * r + s * s).sqrt();
            if (0.5..2.5).contains(&t) { (-1.0 / (1.0 - (t - 1.5).powi(2))).exp() } else { 0.0 }
        });
        let q = hardy_quotient(&ps(3, 1, 2.0, 3.0, 0.0, 0.0, 0.0), &radial).unwrap();
        assert!(q.quotient >= 0.25);
    }

    #[test]
    fn jb_examples() {
        let g = build_grid(48, 48, 3.0, Grading::Uniform).unwrap().fill(bump);
        let base = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
        let j0 = bottom_jb(&base, &g).unwrap().quotient;
        assert_eq!(j0, mazya_quotient(&base, &g).unwrap().quotient);
        let mut prev = j0;
        for b in [0.25, 0.5, 1.0, 1.5, 1.9] {
            let j = bottom_jb(&base.bottom(b), &g).unwrap().quotient;
            assert!(j < prev);
            prev = j;
        }
        assert!(bottom_jb(&base.bottom(-0.5), &g).unwrap().quotient > j0);
        assert!(matches!(bottom_jb(&ps(4, 2, 3.0, 4.0, 0.0, 0.0, 0.0), &g), Err(Error::WrongP(_))));
    }

    #[test]
    fn transform_examples() {
        let g = build_grid(16, 16, 3.0, Grading::LogGraded).unwrap().fill(|r, s| 1.0 + r + s * s);
        let base = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
        assert_eq!(transform_tb(&base, &g).values, g.values);
        let v = transform_tb(&base.bottom(0.7), &g);
        let back = transform_tb(&base.bottom(-0.7), &v);
        for (x, y) in back.values.iter().zip(&g.values) {
            assert!((x - y).abs() <= 1e-14 * y.abs());
        }
        let c = build_grid(16, 16, 3.0, Grading::Uniform).unwrap().fill(|_, _| 2.0);
        let v = transform_tb(&ParamSet { b: 2.0, gamma: 2.0, ..base }, &c);
        for (i, &r) in c.r.iter().enumerate() {
            for (j, &s) in c.s.iter().enumerate() {
                let expect = 2.0 / (r * r + s * s).sqrt();
                assert!((v.get(i, j) - expect).abs() < 1e-14 * expect);
            }
        }
    }

    #[test]
    fn tb_identity_exact_at_zero_and_small_otherwise() {
        let g = build_grid(64, 64, 3.0, Grading::Uniform).unwrap().fill(bump);
        let base = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
        assert_eq!(verify_tb_identity(&base, &g).unwrap(), 0.0);
        for b in [1.0, -1.0] {
            let r = verify_tb_identity(&base.bottom(b), &g).unwrap();
            assert!(r < 1e-2, "b = {b}: {r}");
        }
    }

    #[test]
    fn chain_bound_at_zero_b_is_mazya_inequality() {
        let p = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
        let g = build_grid(48, 48, 3.0, Grading::Uniform).unwrap().fill(bump);
        let m = mazya_quotient(&p, &g).unwrap().quotient;
        // with M equal to this profile's own quotient the slack is zero
        assert!(mazya_chain_bound(&p, &g, m).unwrap().abs() < 1e-10);
        assert!(mazya_chain_bound(&p, &g, 0.5 * m).unwrap() > 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = ps(4, 2, 3.0, 5.0, 0.5, 0.3, 0.6);
        let g = build_grid(12, 10, 3.0, Grading::LogGraded).unwrap().fill(|r, s| (-(r * r + 0.5 * s * s)).exp());
        let dq = DiscreteQuotient::new(QuotientShape::new(QuotientKind::HardySobolev, &p), &g, 4, 2).unwrap();
        let mut grad = vec![0.0; g.values.len()];
        let parts = dq.eval_grad(&g.values, &mut grad);
        assert!((parts.quotient - dq.eval(&g, &g.values).quotient).abs() < 1e-13 * parts.quotient);
        let eps = 1e-6;
        for idx in [0, 5, 37, 60, 99] {
            let mut up = g.values.clone();
            let mut dn = g.values.clone();
            up[idx] += eps;
            dn[idx] -= eps;
            let fd = (dq.eval(&g, &up).quotient - dq.eval(&g, &dn).quotient) / (2.0 * eps);
            assert!((fd - grad[idx]).abs() < 1e-6 * (1.0 + grad[idx].abs()), "{idx}: {fd} vs {}", grad[idx]);
        }
    }
}
