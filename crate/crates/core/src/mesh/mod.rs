//! Symmetry-reduced grids in `(r, s) = (|x|, |y|)` and weighted quadrature.
//!
//! Nodes live in `(0, R_max]`. For integration each axis is augmented with a
//! virtual node at 0 carrying the value of the first node, so the strips along
//! the axes have zero normal derivative.

mod sphere;
mod table;

pub use sphere::{g_a_factor, sphere_average_projection};
pub use table::{CellTable, ZFactor, CORNERS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default geometric ratio between consecutive spacings of a graded axis.
pub const DEFAULT_RATIO: f64 = 1.08;

/// Smallest number of nodes per axis.
pub const MIN_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grading {
    Uniform,
    LogGraded,
}

/// Nodal profile `u(r_i, s_j)` on a tensor grid; `values[i * ns + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileGrid {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub d: u32,
    pub k: u32,
    pub grading: Grading,
    pub r_max: f64,
}

/// Power weight `s^{y_exp} |z|^{z_exp}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub y_exp: f64,
    pub z_exp: f64,
}

impl WeightSpec {
    pub fn new(y_exp: f64, z_exp: f64) -> Self {
        WeightSpec { y_exp, z_exp }
    }

    pub fn eval(&self, r: f64, s: f64) -> f64 {
        s.powf(self.y_exp) * (r * r + s * s).powf(0.5 * self.z_exp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub cell_error_estimate: f64,
}

fn axis_nodes(n: usize, r_max: f64, grading: Grading, ratio: f64) -> Vec<f64> {
    match grading {
        Grading::Uniform => (1..=n).map(|i| r_max * i as f64 / n as f64).collect(),
        Grading::LogGraded => {
            let h1 = r_max * (ratio - 1.0) / (ratio.powi(n as i32) - 1.0);
            let mut out = Vec::with_capacity(n);
            let (mut x, mut h) = (0.0, h1);
            for _ in 0..n {
                x += h;
                out.push(x);
                h *= ratio;
            }
            out[n - 1] = r_max;
            out
        }
    }
}

/// Builds an empty-valued grid with the default grading ratio.
pub fn build_grid(nr: usize, ns: usize, r_max: f64, grading: Grading) -> Result<ProfileGrid> {
    build_grid_with_ratio(nr, ns, r_max, grading, DEFAULT_RATIO)
}

pub fn build_grid_with_ratio(nr: usize, ns: usize, r_max: f64, grading: Grading, ratio: f64) -> Result<ProfileGrid> {
    for n in [nr, ns] {
        if n < MIN_NODES {
            return Err(Error::BadResolution(n));
        }
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::OutOfRange(format!("R_max must be positive, got {r_max}")));
    }
    if !(ratio > 1.0 && ratio <= 2.0) {
        return Err(Error::OutOfRange(format!("grading ratio must lie in (1, 2], got {ratio}")));
    }
    Ok(ProfileGrid {
        r: axis_nodes(nr, r_max, grading, ratio),
        s: axis_nodes(ns, r_max, grading, ratio),
        values: vec![0.0; nr * ns],
        d: 0,
        k: 0,
        grading,
        r_max,
    })
}

impl ProfileGrid {
    pub fn nr(&self) -> usize {
        self.r.len()
    }

    pub fn ns(&self) -> usize {
        self.s.len()
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.s.len() + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn with_dims(mut self, d: u32, k: u32) -> Self {
        self.d = d;
        self.k = k;
        self
    }

    /// Sets every value from a function of `(r, s)`.
    pub fn fill(mut self, f: impl Fn(f64, f64) -> f64) -> Self {
        let ns = self.s.len();
        for (i, &r) in self.r.iter().enumerate() {
            for (j, &s) in self.s.iter().enumerate() {
                self.values[i * ns + j] = f(r, s);
            }
        }
        self
    }

    /// Same nodes, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        ProfileGrid { values, ..self.clone() }
    }

    /// The profile `amp * u(t z)` represented exactly: nodes divided by `t`.
    pub fn dilated(&self, t: f64, amp: f64) -> Self {
        ProfileGrid {
            r: self.r.iter().map(|x| x / t).collect(),
            s: self.s.iter().map(|x| x / t).collect(),
            values: self.values.iter().map(|v| v * amp).collect(),
            r_max: self.r_max / t,
            ..self.clone()
        }
    }

    /// Largest `|z|` of a cell touching a node with nonzero value.
    pub fn support_radius(&self) -> f64 {
        let ns = self.s.len();
        let mut rad: f64 = 0.0;
        for i in 0..self.r.len() {
            for j in 0..ns {
                if self.values[i * ns + j] != 0.0 {
                    let r = self.r[(i + 1).min(self.r.len() - 1)];
                    let s = self.s[(j + 1).min(ns - 1)];
                    rad = rad.max(r.hypot(s));
                }
            }
        }
        rad
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn dims(&self) -> Result<(u32, u32)> {
        if self.k < 1 || self.d <= self.k {
            return Err(Error::InvalidParams(format!(
                "grid dimensions not set or invalid: d = {}, k = {}",
                self.d, self.k
            )));
        }
        Ok((self.d, self.k))
    }

    /// Every other node per axis, always keeping the outermost one.
    pub fn coarsened(&self) -> ProfileGrid {
        let keep = |n: usize| -> Vec<usize> { (0..n).filter(|i| (n - 1 - i) % 2 == 0).collect() };
        let (ki, kj) = (keep(self.nr()), keep(self.ns()));
        let mut values = Vec::with_capacity(ki.len() * kj.len());
        for &i in &ki {
            for &j in &kj {
                values.push(self.get(i, j));
            }
        }
        ProfileGrid {
            r: ki.iter().map(|&i| self.r[i]).collect(),
            s: kj.iter().map(|&j| self.s[j]).collect(),
            values,
            ..self.clone()
        }
    }
}

fn estimate(fine: f64, coarse: Result<f64>) -> QuadratureResult {
    let err = coarse.map(|c| (fine - c).abs() / 3.0).unwrap_or(0.0);
    QuadratureResult { value: fine, cell_error_estimate: if err.is_finite() { err } else { 0.0 } }
}

/// `int w |u|^f_power dz` over the truncated domain, including sphere areas.
pub fn integrate_weighted(g: &ProfileGrid, w: WeightSpec, f_power: f64) -> Result<QuadratureResult> {
    let eval = |g: &ProfileGrid| -> Result<f64> {
        let (d, k) = g.dims()?;
        let t = CellTable::build(g, d, k, w.y_exp, ZFactor::Power(w.z_exp))?;
        Ok(t.integrate_power(&g.values, g.ns(), f_power))
    };
    let fine = eval(g)?;
    Ok(estimate(fine, eval(&g.coarsened())))
}

/// `int w |grad u|^p dz` over the truncated domain, including sphere areas.
pub fn gradient_norm_integral(g: &ProfileGrid, w: WeightSpec, p: f64) -> Result<QuadratureResult> {
    if p <= 1.0 {
        return Err(Error::InvalidParams(format!("need p > 1, got {p}")));
    }
    let eval = |g: &ProfileGrid| -> Result<f64> {
        let (d, k) = g.dims()?;
        let t = CellTable::build(g, d, k, w.y_exp, ZFactor::Power(w.z_exp))?;
        Ok(t.gradient_power(g, &g.values, p, 0.0))
    };
    let fine = eval(g)?;
    Ok(estimate(fine, eval(&g.coarsened())))
}

/// Writes `r,s,u` rows with 17 significant digits.
pub fn write_grid_csv<W: std::io::Write>(g: &ProfileGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "s", "u"])?;
    for (i, &r) in g.r.iter().enumerate() {
        for (j, &s) in g.s.iter().enumerate() {
            w.write_record([crate::io::fmt17(r), crate::io::fmt17(s), crate::io::fmt17(g.get(i, j))])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid written by [`write_grid_csv`]; rows must be ordered by `r` then `s`.
pub fn read_grid_csv<R: std::io::Read>(input: R, grading: Grading) -> Result<ProfileGrid> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["r", "s", "u"] {
        return Err(Error::Parse(format!("expected header r,s,u, got {:?}", header)));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {:?}: {e}", rec.position())))
        };
        rows.push((num(0)?, num(1)?, num(2)?));
    }
    let mut r: Vec<f64> = Vec::new();
    let mut s: Vec<f64> = Vec::new();
    for &(ri, sj, _) in &rows {
        if r.last() != Some(&ri) {
            r.push(ri);
        }
        if r.len() == 1 {
            s.push(sj);
        }
    }
    if r.len() * s.len() != rows.len() || r.len() < MIN_NODES || s.len() < MIN_NODES {
        return Err(Error::Parse("rows do not form a tensor grid of at least 8 x 8 nodes".into()));
    }
    for (n, &(ri, sj, _)) in rows.iter().enumerate() {
        if ri != r[n / s.len()] || sj != s[n % s.len()] {
            return Err(Error::Parse(format!("row {} breaks the tensor ordering", n + 2)));
        }
    }
    if r.windows(2).any(|w| w[1] <= w[0]) || s.windows(2).any(|w| w[1] <= w[0]) || r[0] <= 0.0 || s[0] <= 0.0 {
        return Err(Error::Parse("nodes must be positive and strictly increasing".into()));
    }
    let r_max = r[r.len() - 1].max(s[s.len() - 1]);
    Ok(ProfileGrid { r, s, values: rows.iter().map(|x| x.2).collect(), d: 0, k: 0, grading, r_max })
}
