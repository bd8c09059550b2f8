use std::sync::Arc;

use super::basis::{crouzeix_raviart_ref, lagrange_ref, ElementGeometry, RtReference};
use super::{DofSpace, Family};
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::{line_rule, shifted_legendre, triangle_rule};

/// Coefficient vector over all DOFs of a space.
#[derive(Debug, Clone)]
pub struct Field {
    space: Arc<DofSpace>,
    coefficients: Vec<f64>,
}

/// Pointwise value of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Scalar(f64),
    Vector([f64; 2]),
}

impl FieldValue {
    pub fn scalar(self) -> Option<f64> {
        match self {
            FieldValue::Scalar(v) => Some(v),
            FieldValue::Vector(_) => None,
        }
    }

    pub fn vector(self) -> Option<[f64; 2]> {
        match self {
            FieldValue::Vector(v) => Some(v),
            FieldValue::Scalar(_) => None,
        }
    }
}

impl Field {
    pub fn zeros(space: Arc<DofSpace>) -> Self {
        let n = space.n_dofs();
        Field {
            space,
            coefficients: vec![0.0; n],
        }
    }

    /// Wraps a full coefficient vector; constrained entries must be zero.
    pub fn new(space: Arc<DofSpace>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.n_dofs() {
            return Err(Error::Argument(format!(
                "coefficient vector has length {}, space has {} DOFs",
                coefficients.len(),
                space.n_dofs()
            )));
        }
        if let Some(i) =
            (0..space.n_dofs()).find(|&i| space.is_dirichlet(i) && coefficients[i] != 0.0)
        {
            return Err(Error::Argument(format!(
                "constrained DOF {i} has a nonzero coefficient"
            )));
        }
        Ok(Field {
            space,
            coefficients,
        })
    }

    /// Expands a vector over the free DOFs, filling constrained ones with zero.
    pub fn from_free(space: Arc<DofSpace>, free: &[f64]) -> Result<Self> {
        if free.len() != space.n_free() {
            return Err(Error::Argument(format!(
                "free vector has length {}, space has {} free DOFs",
                free.len(),
                space.n_free()
            )));
        }
        let mut c = vec![0.0; space.n_dofs()];
        for (&d, &v) in space.free_dofs().iter().zip(free) {
            c[d] = v;
        }
        Ok(Field {
            space,
            coefficients: c,
        })
    }

    pub fn space(&self) -> &Arc<DofSpace> {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn free_coefficients(&self) -> Vec<f64> {
        self.space
            .free_dofs()
            .iter()
            .map(|&d| self.coefficients[d])
            .collect()
    }

    pub fn local_coefficients(&self, t: usize, out: &mut [f64]) {
        for (o, &d) in out.iter_mut().zip(self.space.element_dofs(t)) {
            *o = self.coefficients[d];
        }
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, alpha: f64, other: &Field) -> Result<Field> {
        if !Arc::ptr_eq(&self.space, &other.space) && self.space.n_dofs() != other.space.n_dofs() {
            return Err(Error::Argument("fields belong to different spaces".into()));
        }
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(Field {
            space: self.space.clone(),
            coefficients,
        })
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        Field {
            space: self.space.clone(),
            coefficients: self.coefficients.iter().map(|c| alpha * c).collect(),
        }
    }

    /// Nodal interpolant of `f` in a Lagrange or Crouzeix–Raviart space.
    /// Constrained DOFs are set to zero regardless of `f`.
    pub fn interpolate(space: Arc<DofSpace>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let mesh = space.mesh().clone();
        let nodes: Vec<Point> = match (space.family(), space.degree()) {
            (Family::Lagrange, 1) => mesh.vertices().to_vec(),
            (Family::Lagrange, _) => mesh
                .vertices()
                .iter()
                .copied()
                .chain((0..mesh.n_edges()).map(|e| mesh.edge_midpoint(e)))
                .collect(),
            (Family::CrouzeixRaviart, _) => {
                (0..mesh.n_edges()).map(|e| mesh.edge_midpoint(e)).collect()
            }
            (Family::RaviartThomas, _) => {
                return Err(Error::Argument(
                    "use interpolate_flux for Raviart-Thomas spaces".into(),
                ))
            }
        };
        let coefficients = nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| if space.is_dirichlet(i) { 0.0 } else { f(x) })
            .collect();
        Ok(Field {
            space,
            coefficients,
        })
    }

    /// Canonical Raviart–Thomas interpolant of a vector field (moments
    /// evaluated with high-order quadrature).
    pub fn interpolate_flux(space: Arc<DofSpace>, f: impl Fn(Point) -> [f64; 2]) -> Result<Self> {
        if space.family() != Family::RaviartThomas {
            return Err(Error::Argument(
                "interpolate_flux needs a Raviart-Thomas space".into(),
            ));
        }
        let p = space.degree();
        let rt = RtReference::get(p);
        let mesh = space.mesh().clone();
        let lr = line_rule(2 * p + 12);
        let tr = triangle_rule(2 * p + 12);
        let mut c = vec![0.0; space.n_dofs()];
        let mut local = vec![0.0; space.local_dim()];
        for t in 0..mesh.n_triangles() {
            let pts = mesh.triangle_points(t);
            let geo = ElementGeometry::new(&mesh, t);
            let mut row = 0;
            for j in 0..3 {
                let (a, b) = (pts[(j + 1) % 3], pts[(j + 2) % 3]);
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                for k in 0..=p {
                    let mut s = 0.0;
                    for (&s_t, &w) in lr.points.iter().zip(&lr.weights) {
                        let x = [a[0] + s_t * (b[0] - a[0]), a[1] + s_t * (b[1] - a[1])];
                        let v = f(x);
                        s += w * len * (v[0] * n[0] + v[1] * n[1]) * shifted_legendre(k, s_t);
                    }
                    local[row] = s;
                    row += 1;
                }
            }
            if p > 0 {
                let n_int = rt.n_interior_dofs();
                local[row..].fill(0.0);
                for (bary, &w) in tr.points.iter().zip(&tr.weights) {
                    let v = geo.inverse_jac(f(geo.map(*bary)));
                    let tests = rt.interior_test(*bary);
                    for m in 0..n_int {
                        local[row + m] +=
                            w * geo.area() * (v[0] * tests[m][0] + v[1] * tests[m][1]);
                    }
                }
            }
            let signs = space.local_signs(t);
            for (i, &d) in space.element_dofs(t).iter().enumerate() {
                c[d] = signs[i] * local[i];
            }
        }
        Ok(Field {
            space,
            coefficients: c,
        })
    }
}

fn check_point(f: &Field, t: usize) -> Result<()> {
    let nt = f.space.mesh().n_triangles();
    if t >= nt {
        return Err(Error::Argument(format!(
            "triangle index {t} out of range ({nt} triangles)"
        )));
    }
    Ok(())
}

fn scalar_ref(space: &DofSpace, bary: [f64; 3], vals: &mut [f64], grads: &mut [[f64; 2]]) {
    match space.family() {
        Family::Lagrange => lagrange_ref(space.degree(), bary, vals, grads),
        Family::CrouzeixRaviart => crouzeix_raviart_ref(bary, vals, grads),
        Family::RaviartThomas => unreachable!(),
    }
}

/// Value of `f` at the point with barycentric coordinates `bary` in triangle `t`.
pub fn eval_field(f: &Field, t: usize, bary: [f64; 3]) -> Result<FieldValue> {
    check_point(f, t)?;
    let space = &f.space;
    let n = space.local_dim();
    let mut c = vec![0.0; n];
    f.local_coefficients(t, &mut c);
    if space.family().is_scalar() {
        let mut vals = vec![0.0; n];
        let mut grads = vec![[0.0; 2]; n];
        scalar_ref(space, bary, &mut vals, &mut grads);
        Ok(FieldValue::Scalar(
            c.iter().zip(&vals).map(|(a, b)| a * b).sum(),
        ))
    } else {
        let (v, _) = rt_eval(f, t, bary, &c);
        Ok(FieldValue::Vector(v))
    }
}

fn rt_eval(f: &Field, t: usize, bary: [f64; 3], c: &[f64]) -> ([f64; 2], f64) {
    let space = &f.space;
    let n = space.local_dim();
    let rt = RtReference::get(space.degree());
    let mut vals = vec![[0.0; 2]; n];
    let mut divs = vec![0.0; n];
    rt.eval(bary, &mut vals, &mut divs);
    let geo = ElementGeometry::new(space.mesh(), t);
    let signs = space.local_signs(t);
    let mut vr = [0.0; 2];
    let mut d = 0.0;
    for i in 0..n {
        let s = signs[i] * c[i];
        vr[0] += s * vals[i][0];
        vr[1] += s * vals[i][1];
        d += s * divs[i];
    }
    (geo.piola(vr), d / geo.det)
}

/// Gradient of a Lagrange or Crouzeix–Raviart field (element-wise for the latter).
pub fn eval_grad(f: &Field, t: usize, bary: [f64; 3]) -> Result<[f64; 2]> {
    check_point(f, t)?;
    let space = &f.space;
    if !space.family().is_scalar() {
        return Err(Error::Argument("gradient of a Raviart-Thomas field".into()));
    }
    let n = space.local_dim();
    let mut c = vec![0.0; n];
    f.local_coefficients(t, &mut c);
    let mut vals = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; n];
    scalar_ref(space, bary, &mut vals, &mut grads);
    let mut g = [0.0; 2];
    for i in 0..n {
        g[0] += c[i] * grads[i][0];
        g[1] += c[i] * grads[i][1];
    }
    Ok(ElementGeometry::new(space.mesh(), t).grad(g))
}

/// Divergence of a Raviart–Thomas field.
pub fn eval_div(f: &Field, t: usize, bary: [f64; 3]) -> Result<f64> {
    check_point(f, t)?;
    if f.space.family() != Family::RaviartThomas {
        return Err(Error::Argument("divergence of a scalar field".into()));
    }
    let mut c = vec![0.0; f.space.local_dim()];
    f.local_coefficients(t, &mut c);
    Ok(rt_eval(f, t, bary, &c).1)
}
