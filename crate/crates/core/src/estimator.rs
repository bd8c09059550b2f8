//! Complementarity error estimator, its dual flux problem, and the residual
//! indicators used for adaptive refinement.
//!
//! For an approximate eigenpair `(λ̂, û)` and a flux `y ∈ H(div)`,
//! `η² = ‖λ̂û − û + div y‖² + ‖y − ∇û‖²`. The flux minimising `η` solves
//! `a*(y, z) = −∫ λ̂ û div z` for all `z`, with `a*(y,z) = ∫ div y div z + y·z`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::basis::{lagrange_laplacian, lagrange_ref, ElementGeometry};
use crate::fem::{
    assemble_dual_matrix, assemble_dual_rhs, DofSpace, ElementBasis, Family, Field, RefTable,
};
use crate::mesh::Mesh;
use crate::quadrature::line_rule;
use crate::solvers::SpdFactor;
use crate::sparse::SparseMatrix;

/// Value of the estimator with its two parts.
///
/// Per-element vectors hold squared contributions, so they sum to the
/// squares of the global parts.
#[derive(Debug, Clone)]
pub struct EtaBreakdown {
    pub total: f64,
    pub div_part: f64,
    pub flux_part: f64,
    pub div_elements: Vec<f64>,
    pub flux_elements: Vec<f64>,
}

impl EtaBreakdown {
    pub fn total_sq(&self) -> f64 {
        self.div_part * self.div_part + self.flux_part * self.flux_part
    }
}

fn check_pair(u_hat: &Field, y: &Field) -> Result<()> {
    if u_hat.space().family() != Family::Lagrange {
        return Err(Error::Argument(
            "estimator needs a Lagrange eigenfunction approximation".into(),
        ));
    }
    if y.space().family() != Family::RaviartThomas {
        return Err(Error::Argument(
            "estimator needs a Raviart-Thomas flux".into(),
        ));
    }
    if !u_hat.space().same_mesh(y.space()) {
        return Err(Error::Argument(
            "eigenfunction and flux live on different meshes".into(),
        ));
    }
    Ok(())
}

/// Evaluates `η(λ̂, û, y)` with quadrature exact for its polynomial integrands.
pub fn eta(lambda_hat: f64, u_hat: &Field, y: &Field) -> Result<EtaBreakdown> {
    check_pair(u_hat, y)?;
    let (us, ys) = (u_hat.space(), y.space());
    let degree = (2 * us.degree()).max(2 * ys.degree() + 2);
    let ut = RefTable::new(us, degree);
    let yt = RefTable::new(ys, degree);
    let mut ub = ElementBasis::new(&ut);
    let mut yb = ElementBasis::new(&yt);
    let mut uc = vec![0.0; us.local_dim()];
    let mut yc = vec![0.0; ys.local_dim()];
    let nt = us.mesh().n_triangles();
    let mut div_elements = vec![0.0; nt];
    let mut flux_elements = vec![0.0; nt];
    for t in 0..nt {
        ub.update(&ut, us, t);
        yb.update(&yt, ys, t);
        u_hat.local_coefficients(t, &mut uc);
        y.local_coefficients(t, &mut yc);
        let (mut d2, mut f2) = (0.0, 0.0);
        for q in 0..ub.n_q {
            let u = ub.scalar(&uc, q);
            let g = ub.gradient(&uc, q);
            let yv = yb.vector(&yc, q);
            let r = (lambda_hat - 1.0) * u + yb.divergence(&yc, q);
            let (fx, fy) = (yv[0] - g[0], yv[1] - g[1]);
            d2 += ub.jxw[q] * r * r;
            f2 += ub.jxw[q] * (fx * fx + fy * fy);
        }
        div_elements[t] = d2;
        flux_elements[t] = f2;
    }
    let div_part = div_elements.iter().sum::<f64>().sqrt();
    let flux_part = flux_elements.iter().sum::<f64>().sqrt();
    Ok(EtaBreakdown {
        total: div_part.hypot(flux_part),
        div_part,
        flux_part,
        div_elements,
        flux_elements,
    })
}

/// `|||z|||_*² = ‖div z‖² + ‖z‖²` by direct quadrature.
pub fn dual_norm_sq(z: &Field) -> Result<f64> {
    let s = z.space();
    if s.family() != Family::RaviartThomas {
        return Err(Error::Argument(
            "dual norm of a non Raviart-Thomas field".into(),
        ));
    }
    let table = RefTable::new(s, 2 * s.degree() + 2);
    let mut eb = ElementBasis::new(&table);
    let mut c = vec![0.0; s.local_dim()];
    let mut total = 0.0;
    for t in 0..s.mesh().n_triangles() {
        eb.update(&table, s, t);
        z.local_coefficients(t, &mut c);
        for q in 0..eb.n_q {
            let v = eb.vector(&c, q);
            let d = eb.divergence(&c, q);
            total += eb.jxw[q] * (d * d + v[0] * v[0] + v[1] * v[1]);
        }
    }
    Ok(total)
}

/// Factorised dual problem on one Raviart–Thomas space, reusable for
/// several eigenpairs.
#[derive(Debug)]
pub struct DualSolver {
    space: Arc<DofSpace>,
    matrix: SparseMatrix,
    factor: SpdFactor,
}

impl DualSolver {
    pub fn new(space: Arc<DofSpace>) -> Result<Self> {
        let matrix = assemble_dual_matrix(&space)?;
        let factor = SpdFactor::new(&matrix)?;
        Ok(DualSolver {
            space,
            matrix,
            factor,
        })
    }

    pub fn space(&self) -> &Arc<DofSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// The flux minimising `η(λ̂, û, ·)` over the space; `tol` bounds the
    /// normwise backward error of the linear solve.
    pub fn solve(&self, lambda_hat: f64, u_hat: &Field, tol: f64) -> Result<Field> {
        let rhs = assemble_dual_rhs(&self.space, lambda_hat, u_hat)?;
        let y = self.factor.solve_backward_stable(&self.matrix, &rhs, tol)?;
        Field::new(self.space.clone(), y)
    }
}

/// One-shot version of [`DualSolver::solve`].
pub fn solve_dual(
    lambda_hat: f64,
    u_hat: &Field,
    rt_space: Arc<DofSpace>,
    tol: f64,
) -> Result<Field> {
    DualSolver::new(rt_space)?.solve(lambda_hat, u_hat, tol)
}

/// `η²(y) − η²(y*) − |||y* − y|||_*²`, zero when `y*` is the discrete minimiser.
pub fn pythagoras_gap(lambda_hat: f64, u_hat: &Field, y_star: &Field, y: &Field) -> Result<f64> {
    let same = Arc::ptr_eq(y_star.space(), y.space())
        || (y_star.space().degree() == y.space().degree() && y_star.space().same_mesh(y.space()));
    if !same {
        return Err(Error::Argument("fluxes belong to different spaces".into()));
    }
    let e_y = eta(lambda_hat, u_hat, y)?.total_sq();
    let e_star = eta(lambda_hat, u_hat, y_star)?.total_sq();
    let diff = y_star.add_scaled(-1.0, y)?;
    Ok(e_y - e_star - dual_norm_sq(&diff)?)
}

/// `a(ψ,ψ) / b(ψ,ψ)` from the assembled pencil on the free DOFs.
pub fn rayleigh_quotient(psi: &Field, a: &SparseMatrix, b: &SparseMatrix) -> Result<f64> {
    let x = psi.free_coefficients();
    if x.len() != a.dim() || x.len() != b.dim() {
        return Err(Error::Argument(format!(
            "field has {} free DOFs, matrices are {}x{} and {}x{}",
            x.len(),
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let den = b.quadratic_form(&x);
    if den <= 0.0 || x.iter().all(|&v| v == 0.0) {
        return Err(Error::Argument(
            "Rayleigh quotient of the zero field".into(),
        ));
    }
    Ok(a.quadratic_form(&x) / den)
}

fn local_gradient(degree: usize, geo: &ElementGeometry, c: &[f64], bary: [f64; 3]) -> [f64; 2] {
    let n = c.len();
    let mut vals = [0.0; 6];
    let mut grads = [[0.0; 2]; 6];
    lagrange_ref(degree, bary, &mut vals[..n], &mut grads[..n]);
    let mut g = [0.0; 2];
    for i in 0..n {
        g[0] += c[i] * grads[i][0];
        g[1] += c[i] * grads[i][1];
    }
    geo.grad(g)
}

/// `∫_E ([∇u]·ν)²` on interior edge `e`, given the local coefficients on
/// both adjacent triangles.
fn edge_jump_sq(
    mesh: &Mesh,
    geos: &[ElementGeometry],
    k: usize,
    e: usize,
    c0: &[f64],
    c1: &[f64],
) -> f64 {
    let (t0, t1) = match mesh.edge_triangles(e) {
        (t0, Some(t1)) => (t0, t1),
        _ => return 0.0,
    };
    let [a, b] = mesh.edges()[e];
    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
    let n = mesh.edge_normal(e);
    let len = mesh.edge_length(e);
    let lr = line_rule(2 * k);
    let mut j2 = 0.0;
    for (&st, &w) in lr.points.iter().zip(&lr.weights) {
        let x = [pa[0] + st * (pb[0] - pa[0]), pa[1] + st * (pb[1] - pa[1])];
        let g0 = local_gradient(k, &geos[t0], c0, geos[t0].inverse_map(x));
        let g1 = local_gradient(k, &geos[t1], c1, geos[t1].inverse_map(x));
        let jump = (g0[0] - g1[0]) * n[0] + (g0[1] - g1[1]) * n[1];
        j2 += w * len * jump * jump;
    }
    j2
}

/// Residual indicators `η_K` (not squared) for a Lagrange eigenpair:
/// `η_K² = h_K² ‖λu + Δu − u‖²_K + Σ_E h_E ‖[∇u]·ν‖²_E` over interior edges of `K`.
pub fn residual_indicators(lambda_h: f64, u_h: &Field) -> Result<Vec<f64>> {
    let s = u_h.space();
    if s.family() != Family::Lagrange {
        return Err(Error::Argument(
            "residual indicators need a Lagrange field".into(),
        ));
    }
    let mesh = s.mesh();
    let k = s.degree();
    let nt = mesh.n_triangles();
    let table = RefTable::new(s, 2 * k);
    let mut eb = ElementBasis::new(&table);
    let mut c = vec![0.0; s.local_dim()];
    let mut ind = vec![0.0; nt];
    let geos: Vec<ElementGeometry> = (0..nt).map(|t| ElementGeometry::new(mesh, t)).collect();
    for t in 0..nt {
        eb.update(&table, s, t);
        u_h.local_coefficients(t, &mut c);
        let lap: f64 = lagrange_laplacian(k, &geos[t])
            .iter()
            .zip(&c)
            .map(|(l, ci)| l * ci)
            .sum();
        let mut r2 = 0.0;
        for q in 0..eb.n_q {
            let r = (lambda_h - 1.0) * eb.scalar(&c, q) + lap;
            r2 += eb.jxw[q] * r * r;
        }
        let h = mesh.diameter(t);
        ind[t] = h * h * r2;
    }
    let mut c1 = vec![0.0; s.local_dim()];
    for e in 0..mesh.n_edges() {
        let (t0, Some(t1)) = mesh.edge_triangles(e) else {
            continue;
        };
        u_h.local_coefficients(t0, &mut c);
        u_h.local_coefficients(t1, &mut c1);
        let j2 = edge_jump_sq(mesh, &geos, k, e, &c, &c1);
        let len = mesh.edge_length(e);
        ind[t0] += len * j2;
        ind[t1] += len * j2;
    }
    Ok(ind.into_iter().map(f64::sqrt).collect())
}

/// Global residual estimator from per-element indicators.
pub fn eta_ad(indicators: &[f64]) -> f64 {
    indicators.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_primal, make_space};
    use crate::mesh::{builtin_domain, refine_uniform, Mesh};
    use crate::solvers::eig_smallest;

    fn square(levels: usize) -> Arc<Mesh> {
        let mut m = builtin_domain("unit_square").unwrap();
        for _ in 0..levels {
            m = refine_uniform(&m);
        }
        Arc::new(m)
    }

    #[test]
    fn zero_fields_give_zero() {
        let mesh = square(2);
        let p1 = make_space(mesh.clone(), Family::Lagrange, 1).unwrap();
        let rt = make_space(mesh, Family::RaviartThomas, 1).unwrap();
        let e = eta(3.0, &Field::zeros(p1), &Field::zeros(rt)).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn unit_lambda_zero_flux_is_gradient_norm() {
        let mesh = square(2);
        let p2 = make_space(mesh.clone(), Family::Lagrange, 2).unwrap();
        let rt = make_space(mesh, Family::RaviartThomas, 0).unwrap();
        let (a, b) = assemble_primal(&p2).unwrap();
        let u = Field::interpolate(p2, |x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])).unwrap();
        let e = eta(1.0, &u, &Field::zeros(rt)).unwrap();
        let uf = u.free_coefficients();
        let grad_sq = a.quadratic_form(&uf) - b.quadratic_form(&uf);
        assert_eq!(e.div_part, 0.0);
        assert!((e.total * e.total - grad_sq).abs() < 1e-14);
        let sum: f64 = e.flux_elements.iter().sum();
        assert!((sum.sqrt() - e.flux_part).abs() < 1e-15);
    }

    #[test]
    fn dual_solution_vanishes_for_zero_data() {
        let mesh = square(1);
        let p1 = make_space(mesh.clone(), Family::Lagrange, 1).unwrap();
        let rt = make_space(mesh, Family::RaviartThomas, 1).unwrap();
        let u = Field::interpolate(p1, |x| x[0] + x[1]).unwrap();
        let y = solve_dual(0.0, &u, rt.clone(), 1e-12).unwrap();
        assert!(y.coefficients().iter().all(|&c| c == 0.0));
        let y = solve_dual(2.0, &Field::zeros(u.space().clone()), rt, 1e-12).unwrap();
        assert!(y.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn rayleigh_quotient_of_eigenvector() {
        let mesh = square(3);
        let p1 = make_space(mesh, Family::Lagrange, 1).unwrap();
        let (a, b) = assemble_primal(&p1).unwrap();
        let pairs = eig_smallest(&a, &b, 1, 1e-11).unwrap();
        let u = Field::from_free(p1, &pairs[0].vector).unwrap();
        let rq = rayleigh_quotient(&u, &a, &b).unwrap();
        assert!((rq - pairs[0].value).abs() < 1e-12 * rq);
        assert!(rayleigh_quotient(&Field::zeros(u.space().clone()), &a, &b).is_err());
    }

    #[test]
    fn p1_indicator_interior_term() {
        // on one triangle there are no interior edges; Δu = 0 for P1
        let mesh = square(2);
        let p1 = make_space(mesh.clone(), Family::Lagrange, 1).unwrap();
        let u = Field::interpolate(p1.clone(), |x| (x[0] * 3.0).sin() * x[1]).unwrap();
        let lambda = 4.0;
        let ind = residual_indicators(lambda, &u).unwrap();
        let table = RefTable::new(&p1, 2);
        let mut eb = ElementBasis::new(&table);
        let mut c = vec![0.0; 3];
        // interior part alone, via the same formula
        let t = 0;
        eb.update(&table, &p1, t);
        u.local_coefficients(t, &mut c);
        let r2: f64 = (0..eb.n_q)
            .map(|q| eb.jxw[q] * ((lambda - 1.0) * eb.scalar(&c, q)).powi(2))
            .sum();
        let h = mesh.diameter(t);
        assert!(ind[t] * ind[t] >= h * h * r2 - 1e-15);
    }

    #[test]
    fn affine_function_has_no_jumps() {
        // two triangles forming a parallelogram
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.5, 1.0], [0.5, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let geos: Vec<_> = (0..2).map(|t| ElementGeometry::new(&mesh, t)).collect();
        let e = (0..mesh.n_edges())
            .find(|&e| !mesh.is_boundary_edge(e))
            .unwrap();
        let f = |v: usize| {
            let x = mesh.vertices()[v];
            2.0 * x[0] - x[1] + 0.5
        };
        let loc = |t: usize| mesh.triangles()[t].map(f).to_vec();
        let (t0, t1) = (mesh.edge_triangles(e).0, mesh.edge_triangles(e).1.unwrap());
        assert!(edge_jump_sq(&mesh, &geos, 1, e, &loc(t0), &loc(t1)) < 1e-28);
        // a hat function at vertex 1 does jump across the diagonal
        let hat = |t: usize| {
            mesh.triangles()[t]
                .map(|v| if v == 1 { 1.0 } else { 0.0 })
                .to_vec()
        };
        assert!(edge_jump_sq(&mesh, &geos, 1, e, &hat(t0), &hat(t1)) > 0.1);
    }

    #[test]
    fn p1_interior_residual_is_shifted_eigenvalue_times_u() {
        // with Δu = 0 elementwise, R_K = (λ − 1) u; compare against an
        // indicator computed with no interior edges (single triangle)
        let mesh =
            Arc::new(Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap());
        let p1 = make_space(mesh.clone(), Family::Lagrange, 1).unwrap();
        let u = Field::zeros(p1);
        let ind = residual_indicators(5.0, &u).unwrap();
        assert_eq!(ind, vec![0.0]);
    }
}
