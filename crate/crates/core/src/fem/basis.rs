//! Reference-element shape functions and the affine element map.
//!
//! The reference triangle has vertices `(0,0)`, `(1,0)`, `(0,1)`; barycentric
//! coordinates are `(1-ξ-η, ξ, η)`.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::mesh::{Mesh, Point};
use crate::quadrature::{line_rule, shifted_legendre, triangle_rule};

const GRAD_BARY: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
const REF_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Affine map from the reference triangle onto a mesh triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: Point,
    /// Columns are `p1 - p0` and `p2 - p0`.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// `J^{-T}`, maps reference gradients to physical gradients.
    pub inv_t: [[f64; 2]; 2],
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let [p0, p1, p2] = mesh.triangle_points(t);
        let (a, b) = (p1[0] - p0[0], p2[0] - p0[0]);
        let (c, d) = (p1[1] - p0[1], p2[1] - p0[1]);
        let det = a * d - b * c;
        ElementGeometry {
            origin: p0,
            jac: [[a, b], [c, d]],
            det,
            inv_t: [[d / det, -c / det], [-b / det, a / det]],
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det.abs()
    }

    pub fn map(&self, bary: [f64; 3]) -> Point {
        let (xi, eta) = (bary[1], bary[2]);
        [
            self.origin[0] + self.jac[0][0] * xi + self.jac[0][1] * eta,
            self.origin[1] + self.jac[1][0] * xi + self.jac[1][1] * eta,
        ]
    }

    /// Barycentric coordinates of a physical point.
    pub fn inverse_map(&self, x: Point) -> [f64; 3] {
        let dx = [x[0] - self.origin[0], x[1] - self.origin[1]];
        // J^{-1} = (J^{-T})^T
        let xi = self.inv_t[0][0] * dx[0] + self.inv_t[1][0] * dx[1];
        let eta = self.inv_t[0][1] * dx[0] + self.inv_t[1][1] * dx[1];
        [1.0 - xi - eta, xi, eta]
    }

    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }

    /// Contravariant Piola transform `J v / det J`.
    #[inline]
    pub fn piola(&self, v: [f64; 2]) -> [f64; 2] {
        [
            (self.jac[0][0] * v[0] + self.jac[0][1] * v[1]) / self.det,
            (self.jac[1][0] * v[0] + self.jac[1][1] * v[1]) / self.det,
        ]
    }

    /// `J^{-1} v`
    pub fn inverse_jac(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * v[0] + self.inv_t[1][0] * v[1],
            self.inv_t[0][1] * v[0] + self.inv_t[1][1] * v[1],
        ]
    }
}

/// Values and reference gradients of the P1/P2 Lagrange basis.
/// Local order: vertices, then edges (edge `j` opposite vertex `j`).
pub fn lagrange_ref(degree: usize, bary: [f64; 3], vals: &mut [f64], grads: &mut [[f64; 2]]) {
    match degree {
        1 => {
            for i in 0..3 {
                vals[i] = bary[i];
                grads[i] = GRAD_BARY[i];
            }
        }
        2 => {
            for i in 0..3 {
                let l = bary[i];
                vals[i] = l * (2.0 * l - 1.0);
                let s = 4.0 * l - 1.0;
                grads[i] = [s * GRAD_BARY[i][0], s * GRAD_BARY[i][1]];
            }
            for j in 0..3 {
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                vals[3 + j] = 4.0 * bary[a] * bary[b];
                grads[3 + j] = [
                    4.0 * (bary[a] * GRAD_BARY[b][0] + bary[b] * GRAD_BARY[a][0]),
                    4.0 * (bary[a] * GRAD_BARY[b][1] + bary[b] * GRAD_BARY[a][1]),
                ];
            }
        }
        _ => unreachable!("unsupported Lagrange degree {degree}"),
    }
}

/// Crouzeix–Raviart basis: function `j` is 1 at the midpoint of edge `j`.
pub fn crouzeix_raviart_ref(bary: [f64; 3], vals: &mut [f64], grads: &mut [[f64; 2]]) {
    for j in 0..3 {
        vals[j] = 1.0 - 2.0 * bary[j];
        grads[j] = [-2.0 * GRAD_BARY[j][0], -2.0 * GRAD_BARY[j][1]];
    }
}

/// Physical Laplacian of each P2 basis function (constant per element).
pub fn lagrange_laplacian(degree: usize, geo: &ElementGeometry) -> Vec<f64> {
    match degree {
        1 => vec![0.0; 3],
        2 => {
            let g: Vec<[f64; 2]> = GRAD_BARY.iter().map(|&gr| geo.grad(gr)).collect();
            let d = |a: usize, b: usize| g[a][0] * g[b][0] + g[a][1] * g[b][1];
            let mut out = vec![0.0; 6];
            for i in 0..3 {
                out[i] = 4.0 * d(i, i);
            }
            for j in 0..3 {
                out[3 + j] = 8.0 * d((j + 1) % 3, (j + 2) % 3);
            }
            out
        }
        _ => unreachable!(),
    }
}

/// Monomials `ξ^a η^b` with `a + b <= max_degree`.
#[derive(Debug, Clone)]
struct MonomialSet {
    exps: Vec<(i32, i32)>,
}

impl MonomialSet {
    fn new(max_degree: i32) -> Self {
        let mut exps = Vec::new();
        for d in 0..=max_degree {
            for b in 0..=d {
                exps.push((d - b, b));
            }
        }
        MonomialSet { exps }
    }

    fn index(&self, a: i32, b: i32) -> usize {
        self.exps
            .iter()
            .position(|&e| e == (a, b))
            .expect("monomial in set")
    }

    fn eval(&self, x: f64, y: f64, out: &mut [f64]) {
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = x.powi(a) * y.powi(b);
        }
    }
}

/// Raviart–Thomas `RT_p = (P_p)² + x P_p` on the reference triangle.
///
/// Degrees of freedom, in local order: for each edge `j`, the moments
/// `∫ (v·n) L_k(t) ds`, `k = 0..=p`, with `n` the outward normal and `t`
/// running from local vertex `j+1` to `j+2`; then the interior moments
/// `∫ v·q` for `q` in a monomial basis of `(P_{p-1})²`.
#[derive(Debug, Clone)]
pub struct RtReference {
    pub degree: usize,
    pub dim: usize,
    monomials: MonomialSet,
    /// per basis function, monomial coefficients of the two components
    coef: Vec<[Vec<f64>; 2]>,
    /// per basis function, monomial coefficients of the divergence
    div_coef: Vec<Vec<f64>>,
}

impl RtReference {
    pub fn get(degree: usize) -> &'static RtReference {
        static CACHE: [OnceLock<RtReference>; 3] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        assert!(degree <= 2, "RT degree {degree} not supported");
        CACHE[degree].get_or_init(|| RtReference::build(degree))
    }

    pub fn n_edge_dofs(&self) -> usize {
        self.degree + 1
    }

    pub fn n_interior_dofs(&self) -> usize {
        self.degree * (self.degree + 1)
    }

    fn build(p: usize) -> Self {
        let pi = p as i32;
        let monomials = MonomialSet::new(pi + 1);
        let nm = monomials.exps.len();
        let mut span: Vec<[Vec<f64>; 2]> = Vec::new();
        for d in 0..=pi {
            for b in 0..=d {
                let k = monomials.index(d - b, b);
                for comp in 0..2 {
                    let mut v = [vec![0.0; nm], vec![0.0; nm]];
                    v[comp][k] = 1.0;
                    span.push(v);
                }
            }
        }
        for b in 0..=pi {
            let a = pi - b;
            let mut v = [vec![0.0; nm], vec![0.0; nm]];
            v[0][monomials.index(a + 1, b)] = 1.0;
            v[1][monomials.index(a, b + 1)] = 1.0;
            span.push(v);
        }
        let dim = span.len();
        debug_assert_eq!(dim, (p + 1) * (p + 3));

        let eval_vec = |f: &[Vec<f64>; 2], x: f64, y: f64| -> [f64; 2] {
            let mut m = vec![0.0; nm];
            monomials.eval(x, y, &mut m);
            [
                f[0].iter().zip(&m).map(|(c, v)| c * v).sum(),
                f[1].iter().zip(&m).map(|(c, v)| c * v).sum(),
            ]
        };

        let mut dofs = DMatrix::<f64>::zeros(dim, dim);
        let mut row = 0;
        let lr = line_rule(2 * p + 2);
        for j in 0..3 {
            let a = REF_VERTICES[(j + 1) % 3];
            let b = REF_VERTICES[(j + 2) % 3];
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let tau = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let normal = [tau[1], -tau[0]];
            for k in 0..=p {
                for (c, f) in span.iter().enumerate() {
                    let mut s = 0.0;
                    for (&t, &w) in lr.points.iter().zip(&lr.weights) {
                        let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                        let v = eval_vec(f, x[0], x[1]);
                        s += w
                            * len
                            * (v[0] * normal[0] + v[1] * normal[1])
                            * shifted_legendre(k, t);
                    }
                    dofs[(row, c)] = s;
                }
                row += 1;
            }
        }
        if p >= 1 {
            let tr = triangle_rule(2 * p + 1);
            let inner = MonomialSet::new(pi - 1);
            for &(ea, eb) in &inner.exps {
                for comp in 0..2 {
                    for (c, f) in span.iter().enumerate() {
                        let mut s = 0.0;
                        for (bary, &w) in tr.points.iter().zip(&tr.weights) {
                            let (x, y) = (bary[1], bary[2]);
                            let v = eval_vec(f, x, y);
                            s += 0.5 * w * v[comp] * x.powi(ea) * y.powi(eb);
                        }
                        dofs[(row, c)] = s;
                    }
                    row += 1;
                }
            }
        }
        assert_eq!(row, dim);
        let inv = dofs
            .try_inverse()
            .expect("RT degrees of freedom are unisolvent");

        let mut coef = Vec::with_capacity(dim);
        let mut div_coef = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut c = [vec![0.0; nm], vec![0.0; nm]];
            for (j, f) in span.iter().enumerate() {
                let w = inv[(j, i)];
                if w != 0.0 {
                    for comp in 0..2 {
                        for k in 0..nm {
                            c[comp][k] += w * f[comp][k];
                        }
                    }
                }
            }
            let mut dc = vec![0.0; nm];
            for (k, &(a, b)) in monomials.exps.iter().enumerate() {
                if a > 0 {
                    dc[monomials.index(a - 1, b)] += a as f64 * c[0][k];
                }
                if b > 0 {
                    dc[monomials.index(a, b - 1)] += b as f64 * c[1][k];
                }
            }
            coef.push(c);
            div_coef.push(dc);
        }
        RtReference {
            degree: p,
            dim,
            monomials,
            coef,
            div_coef,
        }
    }

    /// Reference values and divergences of all basis functions at `bary`.
    pub fn eval(&self, bary: [f64; 3], vals: &mut [[f64; 2]], divs: &mut [f64]) {
        let mut m = [0.0; 16];
        let nm = self.monomials.exps.len();
        self.monomials.eval(bary[1], bary[2], &mut m[..nm]);
        for i in 0..self.dim {
            let c = &self.coef[i];
            let mut v = [0.0; 2];
            let mut d = 0.0;
            for k in 0..nm {
                v[0] += c[0][k] * m[k];
                v[1] += c[1][k] * m[k];
                d += self.div_coef[i][k] * m[k];
            }
            vals[i] = v;
            divs[i] = d;
        }
    }

    /// Reference-element test functions of the interior moments.
    pub(crate) fn interior_test(&self, bary: [f64; 3]) -> Vec<[f64; 2]> {
        let p = self.degree as i32;
        let mut out = Vec::new();
        if p == 0 {
            return out;
        }
        let inner = MonomialSet::new(p - 1);
        let mut m = vec![0.0; inner.exps.len()];
        inner.eval(bary[1], bary[2], &mut m);
        for &v in &m {
            out.push([v, 0.0]);
            out.push([0.0, v]);
        }
        out
    }
}
