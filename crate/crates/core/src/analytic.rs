//! Reference eigenpairs: separable modes on the unit square and the
//! extrapolated first eigenvalue of the L-shaped domain.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::{ElementBasis, Family, Field, RefTable};
use crate::mesh::{Domain, Point};

/// First eigenvalue of `-Δu + u = λu` on the L-shaped domain, obtained by
/// extrapolation; not exact to all digits.
pub const L_SHAPE_LAMBDA1: f64 = 10.6397238440219;

/// Smooth function with a known gradient.
pub trait Analytic {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> [f64; 2];
}

/// `sin(mπx) sin(nπy)` on the unit square, eigenvalue `1 + (m² + n²)π²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquareMode {
    pub m: u32,
    pub n: u32,
}

impl SquareMode {
    pub fn eigenvalue(self) -> f64 {
        1.0 + f64::from(self.m * self.m + self.n * self.n) * PI * PI
    }
}

impl Analytic for SquareMode {
    fn value(&self, x: Point) -> f64 {
        let (a, b) = (f64::from(self.m) * PI, f64::from(self.n) * PI);
        (a * x[0]).sin() * (b * x[1]).sin()
    }

    fn gradient(&self, x: Point) -> [f64; 2] {
        let (a, b) = (f64::from(self.m) * PI, f64::from(self.n) * PI);
        [
            a * (a * x[0]).cos() * (b * x[1]).sin(),
            b * (a * x[0]).sin() * (b * x[1]).cos(),
        ]
    }
}

/// Square modes ordered by eigenvalue (ties by `m`), enough to cover index `count`.
pub fn square_modes(count: usize) -> Vec<SquareMode> {
    let kmax = (count as u32 + 2).max(3);
    let mut modes: Vec<SquareMode> = (1..=kmax)
        .flat_map(|m| (1..=kmax).map(move |n| SquareMode { m, n }))
        .collect();
    modes.sort_by_key(|s| (s.m * s.m + s.n * s.n, s.m));
    modes.truncate(count);
    modes
}

/// Analytic eigenvalue with 1-based index `i` on the unit square.
pub fn square_eigenvalue(i: usize) -> f64 {
    square_modes(i)[i - 1].eigenvalue()
}

/// Basis of the eigenspace containing the `i`-th square eigenvalue (1-based).
pub fn square_eigenspace(i: usize) -> Vec<SquareMode> {
    let target = square_modes(i)[i - 1];
    let key = target.m * target.m + target.n * target.n;
    square_modes(i + 8)
        .into_iter()
        .filter(|s| s.m * s.m + s.n * s.n == key)
        .collect()
}

/// Reference value of eigenvalue `i` (1-based) and whether it is exact.
pub fn reference_eigenvalue(domain: Domain, i: usize) -> Option<(f64, bool)> {
    match domain {
        Domain::UnitSquare => Some((square_eigenvalue(i), true)),
        Domain::LShape if i == 1 => Some((L_SHAPE_LAMBDA1, false)),
        Domain::LShape => None,
    }
}

/// Exact eigenfunction matched to a discrete one.
#[derive(Debug, Clone)]
pub struct Aligned {
    /// coefficients of the analytic basis functions
    pub coefficients: Vec<f64>,
    /// `b(u, u)` of the aligned function
    pub b_norm_sq: f64,
    /// `‖u − u_h‖_a`
    pub error_a: f64,
    /// `‖u − u_h‖_b`
    pub error_b: f64,
}

/// Quadrature degree for integrals involving analytic functions.
const ALIGN_DEGREE: usize = 10;

/// Projects `u_h` `b`-orthogonally onto the span of `basis`, so that
/// `b(v, u − u_h) = 0` for every basis function `v`, and measures the error.
pub fn align_to_eigenspace<F: Analytic>(basis: &[F], u_h: &Field) -> Result<Aligned> {
    if basis.is_empty() {
        return Err(Error::Unsupported(
            "no analytic eigenfunctions for this domain".into(),
        ));
    }
    let s = u_h.space();
    if s.family() != Family::Lagrange {
        return Err(Error::Argument("alignment needs a Lagrange field".into()));
    }
    let k = basis.len();
    let mesh = s.mesh();
    let table = RefTable::new(s, ALIGN_DEGREE.max(2 * s.degree() + 6));
    let mut eb = ElementBasis::new(&table);
    let mut c = vec![0.0; s.local_dim()];

    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    let mut vals = vec![0.0; k];
    for t in 0..mesh.n_triangles() {
        eb.update(&table, s, t);
        u_h.local_coefficients(t, &mut c);
        let geo = eb.geo.expect("geometry set by update");
        for q in 0..eb.n_q {
            let x = geo.map(table.rule.points[q]);
            let uh = eb.scalar(&c, q);
            for (v, f) in vals.iter_mut().zip(basis) {
                *v = f.value(x);
            }
            for i in 0..k {
                rhs[i] += eb.jxw[q] * vals[i] * uh;
                for j in 0..k {
                    gram[(i, j)] += eb.jxw[q] * vals[i] * vals[j];
                }
            }
        }
    }
    let coef = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("analytic basis is linearly dependent".into()))?
        .solve(&rhs);
    let b_norm_sq = (coef.transpose() * &gram * &coef)[(0, 0)];

    let (mut ea, mut eb2) = (0.0, 0.0);
    for t in 0..mesh.n_triangles() {
        eb.update(&table, s, t);
        u_h.local_coefficients(t, &mut c);
        let geo = eb.geo.expect("geometry set by update");
        for q in 0..eb.n_q {
            let x = geo.map(table.rule.points[q]);
            let mut u = 0.0;
            let mut g = [0.0; 2];
            for (ci, f) in coef.iter().zip(basis) {
                u += ci * f.value(x);
                let gf = f.gradient(x);
                g[0] += ci * gf[0];
                g[1] += ci * gf[1];
            }
            let gh = eb.gradient(&c, q);
            let du = u - eb.scalar(&c, q);
            let (dx, dy) = (g[0] - gh[0], g[1] - gh[1]);
            eb2 += eb.jxw[q] * du * du;
            ea += eb.jxw[q] * (dx * dx + dy * dy + du * du);
        }
    }
    Ok(Aligned {
        coefficients: coef.iter().copied().collect(),
        b_norm_sq,
        error_a: ea.sqrt(),
        error_b: eb2.sqrt(),
    })
}
