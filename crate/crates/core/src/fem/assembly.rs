use nalgebra::DMatrix;

use super::basis::{crouzeix_raviart_ref, lagrange_ref, ElementGeometry, RtReference};
use super::{DofSpace, Family, Field};
use crate::error::{Error, Result};
use crate::quadrature::{triangle_rule, QuadratureRule};
use crate::sparse::SparseMatrix;

/// Reference basis values of one space at the points of one rule.
pub(crate) struct RefTable {
    pub family: Family,
    pub n_loc: usize,
    pub rule: &'static QuadratureRule,
    sval: Vec<f64>,
    sgrad: Vec<[f64; 2]>,
    vval: Vec<[f64; 2]>,
    vdiv: Vec<f64>,
}

impl RefTable {
    pub fn new(space: &DofSpace, degree: usize) -> Self {
        let rule = triangle_rule(degree);
        let family = space.family();
        let n_loc = space.local_dim();
        let n_q = rule.len();
        let mut t = RefTable {
            family,
            n_loc,
            rule,
            sval: Vec::new(),
            sgrad: Vec::new(),
            vval: Vec::new(),
            vdiv: Vec::new(),
        };
        match family {
            Family::Lagrange | Family::CrouzeixRaviart => {
                t.sval = vec![0.0; n_q * n_loc];
                t.sgrad = vec![[0.0; 2]; n_q * n_loc];
                for (q, &bary) in rule.points.iter().enumerate() {
                    let r = q * n_loc..(q + 1) * n_loc;
                    if family == Family::Lagrange {
                        lagrange_ref(
                            space.degree(),
                            bary,
                            &mut t.sval[r.clone()],
                            &mut t.sgrad[r],
                        );
                    } else {
                        crouzeix_raviart_ref(bary, &mut t.sval[r.clone()], &mut t.sgrad[r]);
                    }
                }
            }
            Family::RaviartThomas => {
                let rt = RtReference::get(space.degree());
                t.vval = vec![[0.0; 2]; n_q * n_loc];
                t.vdiv = vec![0.0; n_q * n_loc];
                for (q, &bary) in rule.points.iter().enumerate() {
                    let r = q * n_loc..(q + 1) * n_loc;
                    rt.eval(bary, &mut t.vval[r.clone()], &mut t.vdiv[r]);
                }
            }
        }
        t
    }

    pub fn n_q(&self) -> usize {
        self.rule.len()
    }
}

/// Physical basis values on one element, indexed `q * n_loc + i`.
pub(crate) struct ElementBasis {
    pub n_loc: usize,
    pub n_q: usize,
    /// quadrature weight times element area
    pub jxw: Vec<f64>,
    pub val: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub vval: Vec<[f64; 2]>,
    pub div: Vec<f64>,
    pub geo: Option<ElementGeometry>,
}

impl ElementBasis {
    pub fn new(table: &RefTable) -> Self {
        let n = table.n_q() * table.n_loc;
        let scalar = table.family.is_scalar();
        ElementBasis {
            n_loc: table.n_loc,
            n_q: table.n_q(),
            jxw: vec![0.0; table.n_q()],
            val: if scalar {
                table.sval.clone()
            } else {
                Vec::new()
            },
            grad: if scalar {
                vec![[0.0; 2]; n]
            } else {
                Vec::new()
            },
            vval: if scalar {
                Vec::new()
            } else {
                vec![[0.0; 2]; n]
            },
            div: if scalar { Vec::new() } else { vec![0.0; n] },
            geo: None,
        }
    }

    pub fn update(&mut self, table: &RefTable, space: &DofSpace, t: usize) {
        let geo = ElementGeometry::new(space.mesh(), t);
        let area = geo.area();
        for (j, w) in self.jxw.iter_mut().zip(&table.rule.weights) {
            *j = w * area;
        }
        if table.family.is_scalar() {
            for (g, &r) in self.grad.iter_mut().zip(&table.sgrad) {
                *g = geo.grad(r);
            }
        } else {
            let signs = space.local_signs(t);
            let n = self.n_loc;
            for q in 0..self.n_q {
                for i in 0..n {
                    let k = q * n + i;
                    let v = geo.piola(table.vval[k]);
                    self.vval[k] = [signs[i] * v[0], signs[i] * v[1]];
                    self.div[k] = signs[i] * table.vdiv[k] / geo.det;
                }
            }
        }
        self.geo = Some(geo);
    }

    #[inline]
    pub fn scalar(&self, c: &[f64], q: usize) -> f64 {
        let r = q * self.n_loc;
        (0..self.n_loc).map(|i| c[i] * self.val[r + i]).sum()
    }

    #[inline]
    pub fn gradient(&self, c: &[f64], q: usize) -> [f64; 2] {
        let r = q * self.n_loc;
        let mut g = [0.0; 2];
        for i in 0..self.n_loc {
            g[0] += c[i] * self.grad[r + i][0];
            g[1] += c[i] * self.grad[r + i][1];
        }
        g
    }

    #[inline]
    pub fn vector(&self, c: &[f64], q: usize) -> [f64; 2] {
        let r = q * self.n_loc;
        let mut v = [0.0; 2];
        for i in 0..self.n_loc {
            v[0] += c[i] * self.vval[r + i][0];
            v[1] += c[i] * self.vval[r + i][1];
        }
        v
    }

    #[inline]
    pub fn divergence(&self, c: &[f64], q: usize) -> f64 {
        let r = q * self.n_loc;
        (0..self.n_loc).map(|i| c[i] * self.div[r + i]).sum()
    }
}

/// Compressed-row pattern of the element-coupling graph restricted to the
/// DOFs that `map` sends to a row index. `map` must be increasing.
fn pattern(space: &DofSpace, n_rows: usize, map: impl Fn(usize) -> Option<usize>) -> SparseMatrix {
    let nd = space.n_dofs();
    let nt = space.mesh().n_triangles();
    let mut start = vec![0usize; nd + 1];
    for t in 0..nt {
        for &d in space.element_dofs(t) {
            start[d + 1] += 1;
        }
    }
    for i in 0..nd {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut elems = vec![0usize; start[nd]];
    for t in 0..nt {
        for &d in space.element_dofs(t) {
            elems[fill[d]] = t;
            fill[d] += 1;
        }
    }
    drop(fill);

    let mut row_ptr = Vec::with_capacity(n_rows + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    let mut scratch = Vec::new();
    for d in 0..nd {
        if map(d).is_none() {
            continue;
        }
        scratch.clear();
        for &t in &elems[start[d]..start[d + 1]] {
            scratch.extend(space.element_dofs(t).iter().filter_map(|&j| map(j)));
        }
        scratch.sort_unstable();
        scratch.dedup();
        col_idx.extend_from_slice(&scratch);
        row_ptr.push(col_idx.len());
    }
    assert_eq!(row_ptr.len(), n_rows + 1);
    SparseMatrix::with_pattern(n_rows, row_ptr, col_idx, true)
}

fn require_scalar(space: &DofSpace) -> Result<()> {
    if space.family().is_scalar() {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "expected a Lagrange or Crouzeix-Raviart space, got {}",
            space.family()
        )))
    }
}

fn require_rt(space: &DofSpace) -> Result<()> {
    if space.family() == Family::RaviartThomas {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "expected a Raviart-Thomas space, got {}",
            space.family()
        )))
    }
}

fn primal_degree(space: &DofSpace) -> usize {
    2 * space.degree()
}

/// Gradient part and mass part of the element matrices of triangle `t`.
pub fn local_primal_matrices(space: &DofSpace, t: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    require_scalar(space)?;
    if t >= space.mesh().n_triangles() {
        return Err(Error::Argument(format!("triangle index {t} out of range")));
    }
    let table = RefTable::new(space, primal_degree(space));
    let mut eb = ElementBasis::new(&table);
    eb.update(&table, space, t);
    let n = eb.n_loc;
    let mut k = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for q in 0..eb.n_q {
        let w = eb.jxw[q];
        for i in 0..n {
            let (gi, vi) = (eb.grad[q * n + i], eb.val[q * n + i]);
            for j in 0..n {
                let (gj, vj) = (eb.grad[q * n + j], eb.val[q * n + j]);
                k[(i, j)] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
                m[(i, j)] += w * vi * vj;
            }
        }
    }
    Ok((k, m))
}

fn assemble_scalar(space: &DofSpace, constrained: bool) -> (SparseMatrix, SparseMatrix) {
    let map = |d: usize| {
        if constrained {
            space.free_index(d)
        } else {
            Some(d)
        }
    };
    let n = if constrained {
        space.n_free()
    } else {
        space.n_dofs()
    };
    let mut a = pattern(space, n, map);
    let mut b = a.clone();
    let table = RefTable::new(space, primal_degree(space));
    let mut eb = ElementBasis::new(&table);
    let nl = eb.n_loc;
    let mut ka = vec![0.0; nl * nl];
    let mut kb = vec![0.0; nl * nl];
    for t in 0..space.mesh().n_triangles() {
        eb.update(&table, space, t);
        ka.fill(0.0);
        kb.fill(0.0);
        for q in 0..eb.n_q {
            let w = eb.jxw[q];
            for i in 0..nl {
                let (gi, vi) = (eb.grad[q * nl + i], eb.val[q * nl + i]);
                for j in 0..nl {
                    let (gj, vj) = (eb.grad[q * nl + j], eb.val[q * nl + j]);
                    let mass = w * vi * vj;
                    ka[i * nl + j] += w * (gi[0] * gj[0] + gi[1] * gj[1]) + mass;
                    kb[i * nl + j] += mass;
                }
            }
        }
        let dofs = space.element_dofs(t);
        for i in 0..nl {
            let Some(r) = map(dofs[i]) else { continue };
            for j in 0..nl {
                let Some(c) = map(dofs[j]) else { continue };
                a.add_at(r, c, ka[i * nl + j]);
                b.add_at(r, c, kb[i * nl + j]);
            }
        }
    }
    (a, b)
}

/// Matrices of `a(u,v) = ∫ ∇u·∇v + uv` and `b(u,v) = ∫ uv` on the free DOFs.
///
/// For Crouzeix–Raviart spaces the gradient is taken element by element.
pub fn assemble_primal(space: &DofSpace) -> Result<(SparseMatrix, SparseMatrix)> {
    require_scalar(space)?;
    Ok(assemble_scalar(space, true))
}

/// Same forms as [`assemble_primal`] over all DOFs, boundary ones included.
pub fn assemble_primal_unconstrained(space: &DofSpace) -> Result<(SparseMatrix, SparseMatrix)> {
    require_scalar(space)?;
    Ok(assemble_scalar(space, false))
}

/// Gram matrix of `a*(y,z) = ∫ div y div z + y·z` on a Raviart–Thomas space.
pub fn assemble_dual_matrix(space: &DofSpace) -> Result<SparseMatrix> {
    require_rt(space)?;
    let mut a = pattern(space, space.n_dofs(), Some);
    let table = RefTable::new(space, 2 * space.degree() + 2);
    let mut eb = ElementBasis::new(&table);
    let nl = eb.n_loc;
    let mut ke = vec![0.0; nl * nl];
    for t in 0..space.mesh().n_triangles() {
        eb.update(&table, space, t);
        ke.fill(0.0);
        for q in 0..eb.n_q {
            let w = eb.jxw[q];
            for i in 0..nl {
                let (vi, di) = (eb.vval[q * nl + i], eb.div[q * nl + i]);
                for j in i..nl {
                    let (vj, dj) = (eb.vval[q * nl + j], eb.div[q * nl + j]);
                    ke[i * nl + j] += w * (di * dj + vi[0] * vj[0] + vi[1] * vj[1]);
                }
            }
        }
        let dofs = space.element_dofs(t);
        for i in 0..nl {
            for j in i..nl {
                let v = ke[i * nl + j];
                a.add_at(dofs[i], dofs[j], v);
                if i != j {
                    a.add_at(dofs[j], dofs[i], v);
                }
            }
        }
    }
    Ok(a)
}

/// Load vector `F*(z) = -∫ λ̂ û div z` for every RT basis function `z`.
pub fn assemble_dual_rhs(space: &DofSpace, lambda_hat: f64, u_hat: &Field) -> Result<Vec<f64>> {
    require_rt(space)?;
    let us = u_hat.space();
    if us.family() != Family::Lagrange {
        return Err(Error::Argument(
            "dual right-hand side needs a Lagrange field".into(),
        ));
    }
    if !space.same_mesh(us) {
        return Err(Error::Argument(
            "dual space and primal field live on different meshes".into(),
        ));
    }
    let degree = us.degree() + space.degree() + 1;
    let rt_table = RefTable::new(space, degree);
    let u_table = RefTable::new(us, degree);
    let mut rb = ElementBasis::new(&rt_table);
    let mut ub = ElementBasis::new(&u_table);
    let mut rhs = vec![0.0; space.n_dofs()];
    let mut uc = vec![0.0; us.local_dim()];
    let nl = rb.n_loc;
    for t in 0..space.mesh().n_triangles() {
        rb.update(&rt_table, space, t);
        ub.update(&u_table, us, t);
        u_hat.local_coefficients(t, &mut uc);
        let dofs = space.element_dofs(t);
        for q in 0..rb.n_q {
            let s = -lambda_hat * ub.scalar(&uc, q) * rb.jxw[q];
            for i in 0..nl {
                rhs[dofs[i]] += s * rb.div[q * nl + i];
            }
        }
    }
    Ok(rhs)
}

/// `∫ v div y + ∫ y·∇v`, which vanishes for `v` with zero boundary values.
pub fn divergence_pairing_check(y: &Field, v: &Field) -> Result<f64> {
    let (ys, vs) = (y.space(), v.space());
    require_rt(ys)?;
    if vs.family() != Family::Lagrange {
        return Err(Error::Argument(
            "pairing check needs a Lagrange field".into(),
        ));
    }
    if !ys.same_mesh(vs) {
        return Err(Error::Argument("fields live on different meshes".into()));
    }
    let degree = ys.degree() + vs.degree() + 1;
    let yt = RefTable::new(ys, degree);
    let vt = RefTable::new(vs, degree);
    let mut yb = ElementBasis::new(&yt);
    let mut vb = ElementBasis::new(&vt);
    let mut yc = vec![0.0; ys.local_dim()];
    let mut vc = vec![0.0; vs.local_dim()];
    let mut total = 0.0;
    for t in 0..ys.mesh().n_triangles() {
        yb.update(&yt, ys, t);
        vb.update(&vt, vs, t);
        y.local_coefficients(t, &mut yc);
        v.local_coefficients(t, &mut vc);
        for q in 0..yb.n_q {
            let yv = yb.vector(&yc, q);
            let g = vb.gradient(&vc, q);
            total += yb.jxw[q]
                * (vb.scalar(&vc, q) * yb.divergence(&yc, q) + yv[0] * g[0] + yv[1] * g[1]);
        }
    }
    Ok(total)
}
