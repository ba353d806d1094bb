//! Explicit competitor families: translation along the singular set,
//! concentration at a point off it, dilation, truncated power profiles and the
//! radial closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{hardy_quotient, rayleigh_hs, DiscreteQuotient, QuotientKind, QuotientReport, QuotientShape, ZERO_DENOMINATOR};
use crate::mesh::{build_grid_with_ratio, g_a_factor, Grading, ProfileGrid};
use crate::params::{base_violation, sobolev_constant, ParamSet};
use crate::quad::gauss_legendre;
use crate::radial::{RadialProfile, RadialQuotient};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    TranslateAlongSigma0,
    ConcentrateAtPoint,
    Dilate,
    RadialPower,
    HoriuchiRadial,
    TalentiBubble,
}

/// What a family is built from.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseProfile {
    Grid(ProfileGrid),
    Radial(RadialProfile),
    /// No profile needed (closed forms, analytic families).
    Analytic,
}

/// One member of a family: kind, base, parameter (`h`, `t` or `epsilon`) and
/// the unit vector the family moves toward or concentrates at.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub base: BaseProfile,
    pub parameter: f64,
    /// `(x_0, y_0)` in `R^{d-k} x R^k`.
    pub center: Vec<f64>,
}

impl FamilySpec {
    /// The default center for a kind: `(e_1, 0)` on the singular set, `(0, e_1)` off it.
    pub fn default_center(kind: FamilyKind, d: u32, k: u32) -> Vec<f64> {
        let mut c = vec![0.0; d as usize];
        match kind {
            FamilyKind::ConcentrateAtPoint => c[(d - k) as usize] = 1.0,
            _ => c[0] = 1.0,
        }
        c
    }

    pub fn validate(&self, ps: &ParamSet) -> Result<()> {
        if !(self.parameter > 0.0 && self.parameter.is_finite()) {
            return Err(Error::OutOfRange(format!("family parameter must be positive, got {}", self.parameter)));
        }
        if self.center.len() != ps.d as usize {
            return Err(Error::InvalidParams(format!("center must have {} coordinates", ps.d)));
        }
        let norm = self.center.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("center must have unit norm, got {norm}")));
        }
        let m = (ps.d - ps.k) as usize;
        let (x, y) = self.center.split_at(m);
        match self.kind {
            FamilyKind::TranslateAlongSigma0 if y.iter().any(|v| *v != 0.0) => {
                Err(Error::OutOfRange("translation center must lie on the singular set y = 0".into()))
            }
            FamilyKind::ConcentrateAtPoint if x.iter().any(|v| *v != 0.0) => {
                Err(Error::OutOfRange("concentration center must have x = 0".into()))
            }
            _ => Ok(()),
        }
    }

    /// Quotient of this family member. Closed forms are reported with
    /// numerator equal to the value and unit denominator.
    pub fn evaluate(&self, ps: &ParamSet) -> Result<QuotientReport> {
        self.validate(ps)?;
        let wrong_base = || Error::InvalidParams(format!("{:?} needs a different base profile", self.kind));
        match (self.kind, &self.base) {
            (FamilyKind::TranslateAlongSigma0, BaseProfile::Grid(g)) => translate_family_quotient(ps, g, self.parameter),
            (FamilyKind::ConcentrateAtPoint, BaseProfile::Radial(r)) => {
                Ok(concentrate_family_quotient(ps, r, self.parameter)?.report)
            }
            (FamilyKind::Dilate, BaseProfile::Grid(g)) => {
                let t = self.parameter;
                rayleigh_hs(ps, &g.dilated(t, t.powf(ps.h_of(ps.a - ps.b))))
            }
            (FamilyKind::RadialPower, _) => hardy_quotient(ps, &radial_power_profile(ps, self.parameter, (1e-4, 1e4))?),
            (FamilyKind::HoriuchiRadial, _) => {
                let v = horiuchi_radial_bound(ps)?;
                Ok(QuotientReport {
                    kind: QuotientKind::HardySobolev,
                    quotient: v,
                    numerator: v,
                    denominator: 1.0,
                    quad_error: 0.0,
                    params: *ps,
                })
            }
            (FamilyKind::TalentiBubble, BaseProfile::Grid(g)) => rayleigh_hs(ps, &talenti_grid(ps, g, self.parameter)?),
            _ => Err(wrong_base()),
        }
    }
}

/// Family sweep rows `kind,h,quotient,quad_error`.
pub fn write_family_csv<W: std::io::Write>(out: W, kind: FamilyKind, rows: &[(f64, QuotientReport)]) -> Result<()> {
    crate::io::write_rows(
        out,
        &["kind", "h", "quotient", "quad_error"],
        rows.iter().map(|(h, r)| {
            vec![format!("{kind:?}"), crate::io::fmt17(*h), crate::io::fmt17(r.quotient), crate::io::fmt17(r.quad_error)]
        }),
    )
}

fn talenti_value(d: f64, p: f64, t: f64) -> f64 {
    (1.0 + t.powf(p / (p - 1.0))).powf(-(d - p) / p)
}

/// The extremal `(1 + (rho/lambda)^{p/(p-1)})^{-(d-p)/p}` minus its value at
/// the last node.
pub fn talenti_radial(d: u32, p: f64, lambda: f64, rho: &[f64]) -> Result<RadialProfile> {
    let df = d as f64;
    if !(p > 1.0 && p < df) || !(lambda > 0.0) {
        return Err(Error::OutOfRange(format!("need 1 < p < d and lambda > 0, got p = {p}, d = {d}")));
    }
    let cut = talenti_value(df, p, rho.last().unwrap() / lambda);
    Ok(RadialProfile::new(d, rho.to_vec()).fill(|r| (talenti_value(df, p, r / lambda) - cut).max(0.0)))
}

/// The same extremal on a cylindrical grid, cut at `R_max`.
pub fn talenti_grid(ps: &ParamSet, g: &ProfileGrid, lambda: f64) -> Result<ProfileGrid> {
    let (d, p) = (ps.df(), ps.p);
    if !(p > 1.0 && p < d) || !(lambda > 0.0) {
        return Err(Error::OutOfRange(format!("need 1 < p < d and lambda > 0, got p = {p}, d = {d}")));
    }
    let cut = talenti_value(d, p, g.r_max / lambda);
    Ok(g.clone().with_dims(ps.d, ps.k).fill(|r, s| (talenti_value(d, p, r.hypot(s) / lambda) - cut).max(0.0)))
}

/// `(1 - |z|^2/R^2)^3` inside the ball of radius `R`.
pub fn bump_grid(g: &ProfileGrid, radius: f64) -> ProfileGrid {
    g.clone().fill(|r, s| {
        let t = (r * r + s * s) / (radius * radius);
        if t < 1.0 { (1.0 - t).powi(3) } else { 0.0 }
    })
}

/// Quotient of `u_h(z) = u(z - h z_0)` with `z_0 = (x_0, 0)`, `|x_0| = 1`.
///
/// The translate is no longer a function of `(|x|, |y|)`; because the base is,
/// each `|z|` power is replaced by its exact average over the sphere
/// `|x'| = r` as seen from `h x_0`.
pub fn translate_family_quotient(ps: &ParamSet, base: &ProfileGrid, h: f64) -> Result<QuotientReport> {
    ps.validate()?;
    if let Some(c) = base_violation(ps) {
        return Err(Error::InadmissibleBase(c.to_string()));
    }
    let support = base.support_radius();
    if support == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    if !(h > 2.0 * support) {
        return Err(Error::SupportOverlap { support, h });
    }
    let shape = QuotientShape::new(QuotientKind::HardySobolev, ps);
    let run = |g: &ProfileGrid| DiscreteQuotient::translated(shape, g, ps.d, ps.k, h).map(|q| q.eval(g, &g.values));
    let fine = run(base)?;
    if !(fine.den_integral > ZERO_DENOMINATOR) {
        return Err(Error::ZeroDenominator);
    }
    let quad_error = match run(&base.coarsened()) {
        Ok(c) if c.quotient.is_finite() && c.den_integral > ZERO_DENOMINATOR => (fine.quotient - c.quotient).abs() / 3.0,
        _ => fine.quotient.abs(),
    };
    Ok(QuotientReport {
        kind: QuotientKind::HardySobolev,
        quotient: fine.quotient,
        numerator: fine.numerator,
        denominator: fine.den_integral.powf(shape.outer),
        quad_error,
        params: *ps,
    })
}

/// Quotient report plus the size of the angular-model uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    #[serde(flatten)]
    pub report: QuotientReport,
    pub model_error: f64,
}

/// Averages of `|y|^alpha |z|^beta` over the sphere of radius `t` around
/// `z_0 = (0, y_0)`, `|y_0| = 1`.
struct SphereAverager {
    /// `(cos theta, sin^2 theta tau, weight)`.
    nodes: Vec<(f64, f64, f64)>,
}

impl SphereAverager {
    fn new(d: u32, k: u32, n_theta: usize, n_phi: usize) -> Self {
        let (xt, wt) = gauss_legendre(n_theta);
        let (xp, wp) = gauss_legendre(n_phi);
        let (df, kf) = (d as f64, k as f64);
        let mut nodes = Vec::new();
        for (x, w) in xt.iter().zip(&wt) {
            let th = 0.5 * std::f64::consts::PI * (x + 1.0);
            let wth = w * th.sin().powf(df - 2.0);
            if k == 1 {
                nodes.push((th.cos(), 0.0, wth));
                continue;
            }
            // tau = |omega_y|^2 = sin^2 phi has density sin^{k-2} phi cos^{d-k-1} phi
            for (y, v) in xp.iter().zip(&wp) {
                let ph = 0.25 * std::f64::consts::PI * (y + 1.0);
                let wph = v * ph.sin().powf(kf - 2.0) * ph.cos().powf(df - kf - 1.0);
                nodes.push((th.cos(), th.sin().powi(2) * ph.sin().powi(2), wth * wph));
            }
        }
        let tot: f64 = nodes.iter().map(|n| n.2).sum();
        nodes.iter_mut().for_each(|n| n.2 /= tot);
        SphereAverager { nodes }
    }

    fn average(&self, t: f64, alpha: f64, beta: f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(c, st, w)| {
                let y2 = (1.0 + t * c).powi(2) + t * t * st;
                let z2 = 1.0 + 2.0 * t * c + t * t;
                w * y2.powf(0.5 * alpha) * z2.powf(0.5 * beta)
            })
            .sum()
    }
}

/// Quotient of `u_h(z) = u((z - z_0) h)` with `z_0 = (0, y_0)`, `|y_0| = 1`,
/// `q = p^*`. The base is radial about `z_0`; the weights are averaged exactly
/// over each sphere `|z - z_0| = rho/h`.
pub fn concentrate_family_quotient(ps: &ParamSet, base: &RadialProfile, h: f64) -> Result<ConcentrationReport> {
    ps.validate()?;
    if !(ps.p < ps.df()) || !ps.is_critical() {
        return Err(Error::OutOfRange(format!("concentration needs p < d and q = p*, got p = {}, q = {}", ps.p, ps.q)));
    }
    if !(h >= 4.0) {
        return Err(Error::OutOfRange(format!("need h >= 4, got {h}")));
    }
    if base.d != ps.d {
        return Err(Error::InvalidParams(format!("base profile built for d = {}", base.d)));
    }
    let support = base.support_radius();
    if support == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    if !(2.0 * support < h) {
        return Err(Error::SupportOverlap { support, h });
    }
    let shape = QuotientShape::new(QuotientKind::HardySobolev, ps);
    let eval = |prof: &RadialProfile, avg: &SphereAverager| -> Result<(f64, f64, f64)> {
        let rq = RadialQuotient::with_multipliers(
            ps.d,
            ps.p,
            ps.q,
            0.0,
            0.0,
            &prof.rho,
            |r| avg.average(r / h, shape.num.0, shape.num.1),
            |r| avg.average(r / h, shape.den.0, shape.den.1),
        )?;
        let n = rq.numerator(&prof.values);
        let di = rq.den_integral(&prof.values);
        Ok((n, di, n / di.powf(ps.p / ps.q)))
    };
    let fine_avg = SphereAverager::new(ps.d, ps.k, 64, 32);
    let (n, di, q) = eval(base, &fine_avg)?;
    if !(di > ZERO_DENOMINATOR) {
        return Err(Error::ZeroDenominator);
    }
    let quad_error = (q - eval(&base.coarsened(), &fine_avg)?.2).abs() / 3.0;
    let model_error = (q - eval(base, &SphereAverager::new(ps.d, ps.k, 32, 16))?.2).abs();
    Ok(ConcentrationReport {
        report: QuotientReport {
            kind: QuotientKind::HardySobolev,
            quotient: q,
            numerator: n,
            denominator: di.powf(ps.p / ps.q),
            quad_error,
            params: *ps,
        },
        model_error,
    })
}

/// `G_a [(d - p + a - b)/(d - p)]^{p - p/d} S`: the best constant over radial
/// profiles, an upper bound for `S_{a,b,b}(p^*)`.
pub fn horiuchi_radial_bound(ps: &ParamSet) -> Result<f64> {
    let (d, p) = (ps.df(), ps.p);
    if !(p < d) {
        return Err(Error::OutOfRange(format!("need p < d, got p = {p}, d = {d}")));
    }
    if !(ps.a > -ps.kf()) {
        return Err(Error::OutOfRange(format!("need a > -k, got a = {}", ps.a)));
    }
    if !(ps.b < d - p + ps.a) {
        return Err(Error::OutOfRange(format!("need b < d - p + a, got b = {}", ps.b)));
    }
    let g = g_a_factor(&ParamSet { q: crate::params::p_star(d, p), ..*ps })?;
    let bracket = (d - p + ps.a - ps.b) / (d - p);
    Ok(g * bracket.powf(p - p / d) * sobolev_constant(ps.d, p)?)
}

/// Nodes per axis of the grid carrying a power profile.
pub const POWER_PROFILE_NODES: usize = 256;

const LN10: f64 = std::f64::consts::LN_10;

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// `|z|^{-H + epsilon}` with a flat core below `r_in` and a C^1 cubic taper
/// to zero over the decade below `r_out`. The log-slope rises from 0 to
/// `-H + epsilon` over the decade above `r_in` along the same cubic.
pub fn power_profile_value(hh: f64, eps: f64, r_in: f64, r_out: f64, rho: f64) -> f64 {
    let e = -hh + eps;
    let t = rho.ln();
    let (t0, t2) = (r_in.ln(), r_out.ln() - LN10);
    let x = (t - t0) / LN10;
    let w = if x <= 0.0 {
        0.0
    } else if x < 1.0 {
        e * LN10 * (x * x * x - 0.5 * x * x * x * x)
    } else {
        e * (0.5 * LN10 + t - t0 - LN10)
    };
    w.exp() * (1.0 - smoothstep((t - t2) / LN10))
}

/// Grid carrying the truncated power profile for the Hardy quotient. The grid
/// is graded so that its first node sits a decade below `r_in`.
pub fn radial_power_profile(ps: &ParamSet, epsilon: f64, cutoff_radii: (f64, f64)) -> Result<ProfileGrid> {
    let (r_in, r_out) = cutoff_radii;
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange(format!("need epsilon > 0, got {epsilon}")));
    }
    if !(r_in > 0.0 && r_out.is_finite() && r_out >= 100.0 * r_in) {
        return Err(Error::BadRadii(r_in, r_out));
    }
    let n = POWER_PROFILE_NODES;
    let h1 = 0.1 * r_in;
    let first = |ratio: f64| r_out * (ratio - 1.0) / (ratio.powi(n as i32) - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
    if first(hi) > h1 {
        return Err(Error::BadRadii(r_in, r_out));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if first(mid) > h1 { lo = mid } else { hi = mid }
    }
    let hh = ps.h_of(ps.a - ps.b);
    let g = build_grid_with_ratio(n, n, r_out, Grading::LogGraded, hi)?.with_dims(ps.d, ps.k);
    Ok(g.fill(|r, s| power_profile_value(hh, epsilon, r_in, r_out, r.hypot(s))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid;
    use crate::radial::log_nodes;

    fn ps(d: u32, k: u32, p: f64, q: f64, a: f64, b: f64, g: f64) -> ParamSet {
        ParamSet::new(d, k, p, q, a, b, g).unwrap()
    }

    #[test]
    fn horiuchi_examples() {
        let s3 = sobolev_constant(3, 2.0).unwrap();
        assert!((horiuchi_radial_bound(&ps(3, 1, 2.0, 6.0, 0.0, 0.0, 0.0)).unwrap() - s3).abs() < 1e-12 * s3);
        let v = horiuchi_radial_bound(&ps(3, 1, 2.0, 6.0, 0.0, 0.5, 0.5)).unwrap();
        assert!((v / s3 - 0.5f64.powf(4.0 / 3.0)).abs() < 1e-12);
        assert!((0.5f64.powf(4.0 / 3.0) - 0.39685).abs() < 1e-5);
        let v = horiuchi_radial_bound(&ps(3, 1, 2.0, 6.0, 2.0, 2.0, 2.0)).unwrap();
        assert!((v / s3 - 0.637644).abs() < 1e-6);
        assert!(horiuchi_radial_bound(&ps(3, 1, 3.0, 6.0, 0.0, 0.0, 0.0)).is_err());
        assert!(horiuchi_radial_bound(&ps(3, 1, 2.0, 6.0, 0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn family_centers_are_checked() {
        let p = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
        let g = bump_grid(&build_grid(32, 32, 2.0, Grading::Uniform).unwrap().with_dims(4, 2), 1.0);
        let mut f = FamilySpec {
            kind: FamilyKind::TranslateAlongSigma0,
            base: BaseProfile::Grid(g),
            parameter: 10.0,
            center: FamilySpec::default_center(FamilyKind::TranslateAlongSigma0, 4, 2),
        };
        assert!(f.evaluate(&p).is_ok());
        f.center = vec![0.0, 0.0, 1.0, 0.0];
        assert!(f.validate(&p).is_err());
        f.center = vec![2.0, 0.0, 0.0, 0.0];
        assert!(f.validate(&p).is_err());
        f.center = vec![1.0, 0.0, 0.0, 0.0];
        f.parameter = -1.0;
        assert!(f.validate(&p).is_err());
        assert_eq!(FamilySpec::default_center(FamilyKind::ConcentrateAtPoint, 4, 2), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn translation_needs_room() {
        let p = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
        let g = bump_grid(&build_grid(32, 32, 2.0, Grading::Uniform).unwrap().with_dims(4, 2), 1.0);
        assert!(matches!(translate_family_quotient(&p, &g, 1.5), Err(Error::SupportOverlap { .. })));
    }

    #[test]
    fn translation_without_z_weights_is_exact() {
        // with b = gamma = 0 the weights ignore x, so translating in x changes nothing
        let p = ps(4, 2, 2.0, 3.0, 0.5, 0.0, 0.0);
        let g = bump_grid(&build_grid(48, 48, 1.2, Grading::Uniform).unwrap().with_dims(4, 2), 1.0);
        let m = crate::functionals::mazya_quotient(&p, &g).unwrap().quotient;
        for h in [10.0, 1e3] {
            let t = translate_family_quotient(&p, &g, h).unwrap().quotient;
            assert!((t - m).abs() < 1e-12 * m, "{t} vs {m}");
        }
    }

    #[test]
    fn concentration_is_h_independent_without_weights() {
        let p = ps(3, 1, 2.0, 6.0, 0.0, 0.0, 0.0);
        let rho = log_nodes(800, 1e-4, 1.5).unwrap();
        let base = talenti_radial(3, 2.0, 0.1, &rho).unwrap();
        let v: Vec<f64> = [4.0, 8.0, 32.0].iter().map(|&h| concentrate_family_quotient(&p, &base, h).unwrap().report.quotient).collect();
        for x in &v {
            assert!((x - v[0]).abs() < 1e-12 * v[0]);
        }
        assert!(matches!(concentrate_family_quotient(&p, &base, 2.0), Err(Error::OutOfRange(_))));
        let p4 = ps(3, 1, 2.0, 4.0, 0.0, 0.0, 0.0);
        assert!(concentrate_family_quotient(&p4, &base, 8.0).is_err());
    }

    #[test]
    fn power_profile_shape() {
        let (hh, eps) = (1.0, 0.1);
        let v = |r| power_profile_value(hh, eps, 1e-3, 1e3, r);
        assert!((v(1e-4) - 1.0).abs() < 1e-15);
        assert_eq!(v(1e3), 0.0);
        // pure power in the middle: ratio over a decade is 10^{-H + eps}
        assert!((v(1.0) / v(0.1) - 10f64.powf(-hh + eps)).abs() < 1e-12);
        // C^1: one-sided difference quotients agree at the junctions
        for r in [1e-3, 1e-2, 1e2] {
            let e = 1e-7 * r;
            let left = (v(r) - v(r - e)) / e;
            let right = (v(r + e) - v(r)) / e;
            assert!((left - right).abs() <= 1e-4 * left.abs().max(right.abs()).max(1e-12), "{r}");
        }
        let p = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
        assert!(matches!(radial_power_profile(&p, 0.1, (1.0, 10.0)), Err(Error::BadRadii(..))));
        assert!(radial_power_profile(&p, 0.0, (1e-3, 1e3)).is_err());
        let g = radial_power_profile(&p, 0.1, (1e-3, 1e3)).unwrap();
        assert!(g.r[0] <= 1e-4 * (1.0 + 1e-9));
    }

    #[test]
    fn dilation_family_is_constant() {
        let p = ps(4, 2, 2.0, 3.0, 0.5, 0.25, 0.75);
        let g = bump_grid(&build_grid(32, 32, 2.0, Grading::LogGraded).unwrap().with_dims(4, 2), 1.5);
        let q0 = rayleigh_hs(&p, &g).unwrap().quotient;
        for t in [0.1, 3.0, 40.0] {
            let f = FamilySpec { kind: FamilyKind::Dilate, base: BaseProfile::Grid(g.clone()), parameter: t, center: vec![1.0, 0.0, 0.0, 0.0] };
            let q = f.evaluate(&p).unwrap().quotient;
            assert!((q - q0).abs() < 1e-10 * q0);
        }
    }
}
