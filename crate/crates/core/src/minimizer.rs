//! Preconditioned descent of discrete Rayleigh quotients.
//!
//! The search direction is `-(1/p) A^{-1} grad R`, where `A` is the (lagged)
//! weighted stiffness matrix of the numerator on the free nodes. For `p = 2`
//! a unit step is one step of nonlinear inverse iteration; a backtracking
//! line search makes every accepted step decrease the quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{concentrate_family_quotient, talenti_radial, translate_family_quotient};
use crate::functionals::{DiscreteQuotient, Parts, QuotientKind, QuotientShape, ZERO_DENOMINATOR};
use crate::mesh::{build_grid, Grading, ProfileGrid, CORNERS};
use crate::params::{assu_cyl, positivity, ParamSet};
use crate::radial::{log_nodes, RadialProfile, RadialQuotient};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum StepRule {
    #[default]
    FixedWithBacktracking,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub nr: usize,
    pub ns: usize,
    pub r_max: f64,
    pub grading: Grading,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { nr: 128, ns: 128, r_max: 20.0, grading: Grading::LogGraded }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once the quotient drops by less than this (relative) over 50 iterations.
    pub tol_rel: f64,
    pub step_rule: StepRule,
    pub renormalize_every: usize,
    pub seed: u64,
    pub mesh: MeshConfig,
    /// `delta / max|grad u|` in the regularized energy for `p != 2`.
    pub delta_rel: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            tol_rel: 1e-7,
            step_rule: StepRule::FixedWithBacktracking,
            renormalize_every: 10,
            seed: 0,
            mesh: MeshConfig::default(),
            delta_rel: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 100 {
            return Err(Error::OutOfRange(format!("max_iters must be >= 100, got {}", self.max_iters)));
        }
        if !(self.tol_rel > 0.0) {
            return Err(Error::OutOfRange(format!("tol_rel must be positive, got {}", self.tol_rel)));
        }
        if self.renormalize_every == 0 {
            return Err(Error::OutOfRange("renormalize_every must be positive".into()));
        }
        for n in [self.mesh.nr, self.mesh.ns] {
            if !(8..=4096).contains(&n) {
                return Err(Error::BadResolution(n));
            }
        }
        if !(self.delta_rel >= 0.0) {
            return Err(Error::OutOfRange("delta_rel must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn grid(&self, d: u32, k: u32) -> Result<ProfileGrid> {
        Ok(build_grid(self.mesh.nr, self.mesh.ns, self.mesh.r_max, self.mesh.grading)?.with_dims(d, k))
    }
}

/// Initial profile.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Grid(ProfileGrid),
    GaussianBump,
    TalentiLike,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcentrationFlag {
    None,
    TowardAxis,
    TowardOrigin,
    TowardInfinity,
}

/// Which computation produced the reported estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateSource {
    SymmetricDescent,
    RadialDescent,
    /// Bubble concentrating at a point off the singular set.
    OffAxisConcentration,
    /// Cylindrical near-minimizer translated far along the singular set.
    TranslationAlongSingularSet,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub constant_estimate: f64,
    pub profile: ProfileGrid,
    pub iterations: usize,
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    pub concentration_flag: ConcentrationFlag,
    /// Final value of the descent itself, before competitors are compared.
    pub descent_estimate: f64,
    pub source: EstimateSource,
    /// `sqrt(g . A^{-1} g) / R` at the last iterate.
    pub stationarity: f64,
    /// The one-dimensional profile for radial runs.
    pub radial_profile: Option<RadialProfile>,
}

impl MinimizeResult {
    /// Trace as CSV rows `iter,quotient`.
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        crate::io::write_rows(
            out,
            &["iter", "quotient"],
            self.trace.iter().map(|(i, q)| vec![i.to_string(), crate::io::fmt17(*q)]),
        )
    }
}

/// Symmetric positive definite band matrix with a Cholesky factorization in place.
#[derive(Clone, Debug)]
pub(crate) struct Banded {
    n: usize,
    bw: usize,
    /// `a[i * (bw + 1) + k] = A(i, i - k)`.
    a: Vec<f64>,
}

impl Banded {
    pub(crate) fn new(n: usize, bw: usize) -> Self {
        Banded { n, bw, a: vec![0.0; n * (bw + 1)] }
    }

    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.bw);
        self.a[i * (self.bw + 1) + (i - j)] += v;
    }

    pub(crate) fn factor(&mut self) -> Result<()> {
        let w = self.bw + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            for j in j0..=i {
                let m0 = j0.max(j.saturating_sub(self.bw));
                let mut s = self.a[i * w + (i - j)];
                for m in m0..j {
                    s -= self.a[i * w + (i - m)] * self.a[j * w + (j - m)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::OutOfRange("preconditioner is not positive definite".into()));
                    }
                    self.a[i * w] = s.sqrt();
                } else {
                    self.a[i * w + (i - j)] = s / self.a[j * w];
                }
            }
        }
        Ok(())
    }

    pub(crate) fn solve(&self, b: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut s = b[i];
            for m in i.saturating_sub(self.bw)..i {
                s -= self.a[i * w + (i - m)] * b[m];
            }
            b[i] = s / self.a[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for m in i + 1..(i + w).min(self.n) {
                s -= self.a[m * w + (m - i)] * b[m];
            }
            b[i] = s / self.a[i * w];
        }
    }
}

/// A quotient over nodal vectors with some entries pinned to zero.
trait Landscape {
    fn p(&self) -> f64;
    fn q(&self) -> f64;
    fn free(&self) -> &[Option<usize>];
    fn eval(&self, u: &[f64]) -> Parts;
    fn eval_grad(&self, u: &[f64], grad: &mut [f64]) -> Parts;
    fn refresh(&mut self, u: &[f64]) -> Result<()>;
    /// Applies `A^{-1}` to the free part of `rhs` (a full-length vector).
    fn solve(&self, rhs: &mut [f64]);
}

struct Outcome {
    u: Vec<f64>,
    value: f64,
    iterations: usize,
    trace: Vec<(usize, f64)>,
    converged: bool,
    stationarity: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;
const MAX_FAILURES: usize = 50;
const WINDOW: usize = 50;

fn normalize<L: Landscape>(l: &L, u: &mut [f64]) -> Result<()> {
    let di = l.eval(u).den_integral;
    if !(di > ZERO_DENOMINATOR) || !di.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    let f = di.powf(-1.0 / l.q());
    u.iter_mut().for_each(|x| *x *= f);
    Ok(())
}

fn descend<L: Landscape>(l: &mut L, mut u: Vec<f64>, cfg: &SolverConfig, critical: bool) -> Result<Outcome> {
    let n = u.len();
    let p = l.p();
    for (x, f) in u.iter_mut().zip(l.free()) {
        *x = if f.is_some() { x.max(0.0) } else { 0.0 };
    }
    normalize(l, &mut u)?;
    l.refresh(&u)?;
    let lagged = p != 2.0;
    let mut grad = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut parts = l.eval_grad(&u, &mut grad);
    let mut trace = vec![(0, parts.quotient)];
    let (mut converged, mut failures, mut iterations) = (false, 0, 0);
    let mut stationarity = f64::NAN;
    for it in 1..=cfg.max_iters {
        iterations = it;
        if lagged && it % 5 == 0 {
            l.refresh(&u)?;
            parts = l.eval_grad(&u, &mut grad);
        }
        for ((d, g), f) in dir.iter_mut().zip(&grad).zip(l.free()) {
            *d = if f.is_some() { *g } else { 0.0 };
        }
        l.solve(&mut dir);
        let gag: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        stationarity = gag.max(0.0).sqrt() / parts.quotient;
        dir.iter_mut().for_each(|d| *d *= -1.0 / p);
        let slope = -gag / p;
        if !(slope < -1e-14 * parts.quotient) {
            converged = !critical;
            break;
        }
        let mut tau = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for i in 0..n {
                trial[i] = if l.free()[i].is_some() { (u[i] + tau * dir[i]).max(0.0) } else { 0.0 };
            }
            let pt = l.eval(&trial);
            if pt.den_integral > ZERO_DENOMINATOR && pt.quotient <= parts.quotient + ARMIJO * tau * slope {
                accepted = Some(pt);
                break;
            }
            tau *= 0.5;
        }
        match accepted {
            Some(_) => {
                failures = 0;
                std::mem::swap(&mut u, &mut trial);
                if it % cfg.renormalize_every == 0 {
                    normalize(l, &mut u)?;
                }
                let prev = parts.quotient;
                parts = l.eval_grad(&u, &mut grad);
                // guard the trace against reassociation noise after renormalization
                let v = parts.quotient.min(prev);
                trace.push((it, v));
            }
            None => {
                if slope.abs() < 1e-9 * parts.quotient {
                    converged = !critical;
                    break;
                }
                failures += 1;
                if failures >= MAX_FAILURES {
                    return Err(Error::Diverged(failures));
                }
                l.refresh(&u)?;
                parts = l.eval_grad(&u, &mut grad);
                continue;
            }
        }
        if it % WINDOW == 0 && trace.len() > WINDOW {
            let old = trace[trace.len() - 1 - WINDOW].1;
            let now = trace.last().unwrap().1;
            if old - now < cfg.tol_rel * now {
                converged = !critical;
                break;
            }
        }
    }
    normalize(l, &mut u)?;
    let value = trace.last().unwrap().1;
    Ok(Outcome { u, value, iterations, trace, converged, stationarity })
}

/// The two-dimensional problem on a grid with Dirichlet data on the outer rim.
struct GridLandscape<'a> {
    g: &'a ProfileGrid,
    dq: DiscreteQuotient,
    free: Vec<Option<usize>>,
    nfree: usize,
    bw: usize,
    chol: Option<Banded>,
    delta_rel: f64,
    delta: Option<f64>,
}

impl<'a> GridLandscape<'a> {
    fn new(g: &'a ProfileGrid, dq: DiscreteQuotient, delta_rel: f64) -> Self {
        let (nr, ns) = (g.nr(), g.ns());
        let mut free = vec![None; nr * ns];
        let mut c = 0;
        for i in 0..nr - 1 {
            for j in 0..ns - 1 {
                free[i * ns + j] = Some(c);
                c += 1;
            }
        }
        GridLandscape { g, dq, free, nfree: c, bw: ns - 1, chol: None, delta_rel, delta: None }
    }

    fn max_gradient(&self, u: &[f64]) -> f64 {
        let t = &self.dq.num;
        let mut m: f64 = 0.0;
        for ci in 0..t.nr {
            for cj in 0..t.ns {
                for (a, b) in t.corner_gradients(u, ci, cj) {
                    m = m.max(a.hypot(b));
                }
            }
        }
        m
    }
}

impl Landscape for GridLandscape<'_> {
    fn p(&self) -> f64 {
        self.dq.shape.p
    }

    fn q(&self) -> f64 {
        self.dq.shape.den_power
    }

    fn free(&self) -> &[Option<usize>] {
        &self.free
    }

    fn eval(&self, u: &[f64]) -> Parts {
        self.dq.eval(self.g, u)
    }

    fn eval_grad(&self, u: &[f64], grad: &mut [f64]) -> Parts {
        self.dq.eval_grad(u, grad)
    }

    fn refresh(&mut self, u: &[f64]) -> Result<()> {
        let p = self.dq.shape.p;
        let gmax = if p == 2.0 { 0.0 } else { self.max_gradient(u) };
        // delta is fixed at the first refresh so the energy stays one function
        if self.delta.is_none() {
            self.dq.delta = self.delta_rel * gmax;
            self.delta = Some(self.dq.delta);
        }
        // lagged diffusion coefficient |g|^{p-2}, clamped to six decades
        let floor = 1e-12 * gmax * gmax;
        let lag = |a: f64, b: f64| -> f64 {
            if p == 2.0 {
                1.0
            } else {
                (a * a + b * b).max(floor).max(f64::MIN_POSITIVE).powf(0.5 * p - 1.0)
            }
        };
        let t = &self.dq.num;
        let mut m = Banded::new(self.nfree, self.bw);
        for ci in 0..t.nr {
            for cj in 0..t.ns {
                let c = &t.coef[ci * t.ns + cj];
                let n = t.corner_nodes(ci, cj);
                let gr = t.corner_gradients(u, ci, cj);
                let w: [f64; 4] = std::array::from_fn(|k| c[k] * lag(gr[k].0, gr[k].1));
                let (hr2, hs2) = (t.hr[ci] * t.hr[ci], t.hs[cj] * t.hs[cj]);
                // corners are ordered (0,0), (1,0), (0,1), (1,1)
                let edges = [
                    (n[0], n[1], (w[0] + w[1]) / hr2),
                    (n[2], n[3], (w[2] + w[3]) / hr2),
                    (n[0], n[2], (w[0] + w[2]) / hs2),
                    (n[1], n[3], (w[1] + w[3]) / hs2),
                ];
                debug_assert_eq!(CORNERS[1], (1, 0));
                for (a, b, kappa) in edges {
                    if a == b || kappa == 0.0 {
                        continue;
                    }
                    match (self.free[a], self.free[b]) {
                        (Some(x), Some(y)) => {
                            m.add(x, x, kappa);
                            m.add(y, y, kappa);
                            m.add(x, y, -kappa);
                        }
                        (Some(x), None) | (None, Some(x)) => m.add(x, x, kappa),
                        (None, None) => {}
                    }
                }
            }
        }
        m.factor()?;
        self.chol = Some(m);
        Ok(())
    }

    fn solve(&self, rhs: &mut [f64]) {
        let m = self.chol.as_ref().expect("preconditioner not built");
        let mut x = vec![0.0; self.nfree];
        for (v, f) in rhs.iter().zip(&self.free) {
            if let Some(i) = f {
                x[*i] = *v;
            }
        }
        m.solve(&mut x);
        for (v, f) in rhs.iter_mut().zip(&self.free) {
            *v = f.map_or(0.0, |i| x[i]);
        }
    }
}

/// Radial problem; the last node is pinned.
struct RadialLandscape {
    rq: RadialQuotient,
    free: Vec<Option<usize>>,
    chol: Option<Banded>,
}

impl RadialLandscape {
    fn new(rq: RadialQuotient, n: usize) -> Self {
        let free = (0..n).map(|i| (i + 1 < n).then_some(i)).collect();
        RadialLandscape { rq, free, chol: None }
    }
}

impl Landscape for RadialLandscape {
    fn p(&self) -> f64 {
        self.rq.p
    }

    fn q(&self) -> f64 {
        self.rq.q
    }

    fn free(&self) -> &[Option<usize>] {
        &self.free
    }

    fn eval(&self, u: &[f64]) -> Parts {
        let n = self.rq.numerator(u);
        let di = self.rq.den_integral(u);
        Parts { numerator: n, den_integral: di, quotient: n / di.powf(self.rq.p / self.rq.q) }
    }

    fn eval_grad(&self, u: &[f64], grad: &mut [f64]) -> Parts {
        let (p, q, area) = (self.rq.p, self.rq.q, self.rq.area);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut gd = vec![0.0; u.len()];
        let n = area * self.rq.num.gradient_power_grad(u, p, grad);
        let di = area * self.rq.den.integrate_power_grad(u, q, &mut gd);
        let dpow = di.powf(p / q);
        let r = n / dpow;
        let f = p / q * r / di;
        grad.iter_mut().zip(&gd).for_each(|(g, d)| *g = area * (*g / dpow - f * d));
        Parts { numerator: n, den_integral: di, quotient: r }
    }

    fn refresh(&mut self, u: &[f64]) -> Result<()> {
        let k = self.rq.num.lagged(u, self.rq.p);
        let n = u.len() - 1;
        let mut m = Banded::new(n, 1);
        for (c, kc) in k.iter().enumerate().skip(1) {
            let (a, b) = (c - 1, c);
            if b < n {
                m.add(a, a, *kc);
                m.add(b, b, *kc);
                m.add(a, b, -kc);
            } else {
                m.add(a, a, *kc);
            }
        }
        m.factor()?;
        self.chol = Some(m);
        Ok(())
    }

    fn solve(&self, rhs: &mut [f64]) {
        let m = self.chol.as_ref().expect("preconditioner not built");
        let n = rhs.len() - 1;
        m.solve(&mut rhs[..n]);
        rhs[n] = 0.0;
    }
}

/// Initial profile on `g` (values only).
pub fn initial_profile(init: &Init, g: &ProfileGrid, ps: &ParamSet, seed: u64) -> Result<Vec<f64>> {
    let scale = g.r_max / 20.0;
    let bump = |r: f64, s: f64| {
        let (c, w) = (0.5 * scale, 0.5 * scale);
        (-((r - c).powi(2) + (s - c).powi(2)) / (w * w)).exp()
    };
    Ok(match init {
        Init::Grid(h) => {
            if h.r != g.r || h.s != g.s {
                return Err(Error::InvalidParams("initial profile lives on a different grid".into()));
            }
            h.values.clone()
        }
        Init::GaussianBump => g.clone().fill(bump).values,
        Init::TalentiLike => {
            let lam = 0.05 * scale;
            let (d, p) = (ps.df(), ps.p);
            g.clone()
                .fill(|r, s| {
                    let t = r.hypot(s) / lam;
                    if p < d {
                        (1.0 + t.powf(p / (p - 1.0))).powf(-(d - p) / p)
                    } else {
                        (-t).exp()
                    }
                })
                .values
        }
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            g.clone().fill(bump).values.into_iter().map(|v| v * (0.5 + rng.random::<f64>())).collect()
        }
    })
}

/// Share of the denominator mass in the innermost, outermost and axis cells.
fn concentration(dq: &DiscreteQuotient, u: &[f64]) -> ConcentrationFlag {
    let t = &dq.den;
    let f = dq.shape.den_power;
    let (nr, ns) = (t.nr, t.ns);
    let (mut tot, mut inner, mut outer, mut axis) = (0.0, 0.0, 0.0, 0.0);
    let (ir, is) = ((nr as f64 * 0.1).ceil() as usize, (ns as f64 * 0.1).ceil() as usize);
    for ci in 0..nr {
        for cj in 0..ns {
            let n = t.corner_nodes(ci, cj);
            let c = &t.coef[ci * ns + cj];
            let m: f64 = (0..4).map(|k| c[k] * u[n[k]].abs().powf(f)).sum();
            tot += m;
            if ci < ir && cj < is {
                inner += m;
            }
            if ci + ir >= nr || cj + is >= ns {
                outer += m;
            }
            if cj < is {
                axis += m;
            }
        }
    }
    if tot <= 0.0 {
        ConcentrationFlag::None
    } else if inner >= 0.9 * tot {
        ConcentrationFlag::TowardOrigin
    } else if outer >= 0.9 * tot {
        ConcentrationFlag::TowardInfinity
    } else if axis >= 0.9 * tot {
        ConcentrationFlag::TowardAxis
    } else {
        ConcentrationFlag::None
    }
}

fn check_positive(ps: &ParamSet) -> Result<()> {
    if !positivity(ps)? {
        return Err(Error::NotPositive(format!(
            "gamma = {} < b = {} or q = {} above the critical exponent",
            ps.gamma, ps.b, ps.q
        )));
    }
    Ok(())
}

/// Plain descent over the symmetric class, no competitors.
pub fn descend_symmetric(ps: &ParamSet, cfg: &SolverConfig, init: &Init) -> Result<MinimizeResult> {
    cfg.validate()?;
    check_positive(ps)?;
    let g = cfg.grid(ps.d, ps.k)?;
    let shape = QuotientShape::new(QuotientKind::HardySobolev, ps);
    let dq = DiscreteQuotient::new(shape, &g, ps.d, ps.k)?;
    let u0 = initial_profile(init, &g, ps, cfg.seed)?;
    let mut l = GridLandscape::new(&g, dq, cfg.delta_rel);
    let out = descend(&mut l, u0, cfg, ps.is_critical())?;
    let flag = concentration(&l.dq, &out.u);
    Ok(MinimizeResult {
        constant_estimate: out.value,
        profile: g.with_values(out.u),
        iterations: out.iterations,
        trace: out.trace,
        converged: out.converged,
        concentration_flag: flag,
        descent_estimate: out.value,
        source: EstimateSource::SymmetricDescent,
        stationarity: out.stationarity,
        radial_profile: None,
    })
}

/// Scale of the off-axis bubble relative to its distance from the singular set.
const CONCENTRATION_H: f64 = 1e6;
/// Translation distance in units of the profile's support radius.
const TRANSLATION_FACTOR: f64 = 1e3;

/// Quotient of a Talenti bubble concentrating at a point off the singular set.
pub fn off_axis_competitor(ps: &ParamSet) -> Result<f64> {
    let rho = log_nodes(2000, 1e-6, 1e4)?;
    let base = talenti_radial(ps.d, ps.p, 1.0, &rho)?;
    Ok(concentrate_family_quotient(ps, &base, CONCENTRATION_H)?.report.quotient)
}

/// Quotient of a cylindrical profile translated far along the singular set.
pub fn translation_competitor(ps: &ParamSet, cylindrical: &ProfileGrid) -> Result<f64> {
    let h = TRANSLATION_FACTOR * cylindrical.support_radius().max(1.0);
    Ok(translate_family_quotient(ps, cylindrical, h)?.quotient)
}

fn adopt(res: &mut MinimizeResult, value: f64, source: EstimateSource) {
    if value < res.constant_estimate {
        res.constant_estimate = value;
        res.source = source;
        res.concentration_flag = ConcentrationFlag::TowardInfinity;
        res.trace.push((res.iterations, value));
    }
}

/// Estimates `S_{a,b,gamma}(q)`: symmetric-class descent, then the explicit
/// competitors that leave the class (a bubble off the singular set in the
/// critical case, a translated cylindrical profile in the bottom case). The
/// smallest value wins; every value is an upper bound of the true constant.
pub fn minimize_quotient(ps: &ParamSet, cfg: &SolverConfig, init: &Init) -> Result<MinimizeResult> {
    minimize_quotient_with(ps, cfg, init, None)
}

/// As [`minimize_quotient`], reusing a cylindrical estimate for the bottom competitor.
pub fn minimize_quotient_with(
    ps: &ParamSet,
    cfg: &SolverConfig,
    init: &Init,
    cylindrical: Option<&MinimizeResult>,
) -> Result<MinimizeResult> {
    let mut res = descend_symmetric(ps, cfg, init)?;
    if ps.is_critical() {
        adopt(&mut res, off_axis_competitor(ps)?, EstimateSource::OffAxisConcentration);
    }
    if ps.is_bottom() && ps.b != 0.0 && assu_cyl(&ps.cylindrical()) {
        let own;
        let cyl = match cylindrical {
            Some(c) => c,
            None => {
                own = descend_symmetric(&ps.cylindrical(), cfg, init)?;
                &own
            }
        };
        adopt(&mut res, translation_competitor(ps, &cyl.profile)?, EstimateSource::TranslationAlongSingularSet);
    }
    Ok(res)
}

/// Estimates the Maz'ya constant `M_a(q)` (`b = gamma = 0`).
pub fn estimate_mazya(ps_cyl: &ParamSet, cfg: &SolverConfig) -> Result<MinimizeResult> {
    estimate_mazya_from(ps_cyl, cfg, &Init::GaussianBump)
}

pub fn estimate_mazya_from(ps_cyl: &ParamSet, cfg: &SolverConfig, init: &Init) -> Result<MinimizeResult> {
    let ps = ps_cyl.cylindrical();
    if !assu_cyl(&ps) {
        return Err(Error::InadmissibleBase("k + a > 0, q H_a > d - k, (d - p) q <= d p".into()));
    }
    minimize_quotient(&ps, cfg, init)
}

/// Nodes of the radial solver.
pub const RADIAL_NODES: usize = 2000;

/// Minimizes the spherical quotient with weights `|z|^{a-b}` and
/// `|z|^{(a-b) p^*/p}` over radial profiles, `q = p^*`.
pub fn minimize_radial(ps: &ParamSet, cfg: &SolverConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    let (d, p, c) = (ps.df(), ps.p, ps.a - ps.b);
    if !(p < d) {
        return Err(Error::OutOfRange(format!("need p < d, got p = {p}, d = {d}")));
    }
    if !(d - p + c > 0.0) {
        return Err(Error::OutOfRange(format!("need a - b > -(d - p), got a - b = {c}")));
    }
    let q = crate::params::p_star(d, p);
    let rho = log_nodes(RADIAL_NODES, 1e-6, 1e6)?;
    let rq = RadialQuotient::new(ps.d, p, q, c, c * q / p, &rho)?;
    let n = rho.len();
    let base = talenti_radial(ps.d, p, 1.0, &rho)?;
    let mut l = RadialLandscape::new(rq, n);
    let out = descend(&mut l, base.values, cfg, true)?;
    let prof = RadialProfile { d: ps.d, rho: rho.clone(), values: out.u };
    let g = cfg.grid(ps.d, ps.k.min(ps.d - 1).max(1))?;
    let interp = g.clone().fill(|r, s| radial_interp(&prof, r.hypot(s)));
    Ok(MinimizeResult {
        constant_estimate: out.value,
        profile: interp,
        iterations: out.iterations,
        trace: out.trace,
        converged: out.converged,
        concentration_flag: ConcentrationFlag::None,
        descent_estimate: out.value,
        source: EstimateSource::RadialDescent,
        stationarity: out.stationarity,
        radial_profile: Some(prof),
    })
}

/// Piecewise linear in `rho`, constant inside the first node, zero outside the last.
pub fn radial_interp(prof: &RadialProfile, x: f64) -> f64 {
    let rho = &prof.rho;
    if x <= rho[0] {
        return prof.values[0];
    }
    if x >= *rho.last().unwrap() {
        return 0.0;
    }
    let i = rho.partition_point(|&r| r <= x);
    let (a, b) = (rho[i - 1], rho[i]);
    let t = (x - a) / (b - a);
    prof.values[i - 1] * (1.0 - t) + prof.values[i] * t
}

/// Numerator gradient of the descent, exposed for consistency probes.
pub fn numerator_gradient(ps: &ParamSet, g: &ProfileGrid, delta: f64) -> Result<(f64, Vec<f64>)> {
    let shape = QuotientShape::new(QuotientKind::HardySobolev, ps);
    let mut dq = DiscreteQuotient::new(shape, g, ps.d, ps.k)?;
    dq.delta = delta;
    let mut grad = vec![0.0; g.values.len()];
    let n = dq.numerator_grad(&g.values, &mut grad);
    Ok((n, grad))
}

/// Numerator value with the same regularization.
pub fn numerator_value(ps: &ParamSet, g: &ProfileGrid, delta: f64) -> Result<f64> {
    let shape = QuotientShape::new(QuotientKind::HardySobolev, ps);
    let mut dq = DiscreteQuotient::new(shape, g, ps.d, ps.k)?;
    dq.delta = delta;
    Ok(dq.numerator(g, &g.values))
}
