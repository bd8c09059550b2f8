//! Finite element spaces on a [`Mesh`] and assembly of the bilinear forms.
//!
//! Supported pairs: Lagrange `P1`/`P2` (homogeneous Dirichlet data),
//! Crouzeix–Raviart (degree 1, boundary edge DOFs constrained) and
//! Raviart–Thomas `RT0`–`RT2` (unconstrained).
//!
//! Global numbering: vertex DOFs in vertex order, then edge DOFs in edge
//! order, then per-triangle interior DOFs. An RT edge moment of order `k` on
//! edge `e` has index `e·(p+1) + k`; its test function is the shifted Legendre
//! polynomial `L_k` in the parameter running from the lower to the higher
//! vertex index, paired with the global edge normal.

mod assembly;
pub mod basis;
mod field;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub use assembly::{
    assemble_dual_matrix, assemble_dual_rhs, assemble_primal, assemble_primal_unconstrained,
    divergence_pairing_check, local_primal_matrices,
};
pub(crate) use assembly::{ElementBasis, RefTable};
pub use field::{eval_div, eval_field, eval_grad, Field, FieldValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Lagrange,
    CrouzeixRaviart,
    RaviartThomas,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lagrange => "lagrange",
            Family::CrouzeixRaviart => "crouzeix_raviart",
            Family::RaviartThomas => "raviart_thomas",
        }
    }

    pub fn is_scalar(self) -> bool {
        self != Family::RaviartThomas
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lagrange" | "p" => Ok(Family::Lagrange),
            "crouzeix_raviart" | "cr" => Ok(Family::CrouzeixRaviart),
            "raviart_thomas" | "rt" => Ok(Family::RaviartThomas),
            other => Err(Error::Config(format!("unknown element family '{other}'"))),
        }
    }
}

/// Global degree-of-freedom layout of a finite element space.
#[derive(Debug)]
pub struct DofSpace {
    family: Family,
    degree: usize,
    mesh: Arc<Mesh>,
    n_dofs: usize,
    local_dim: usize,
    element_dofs: Vec<usize>,
    dirichlet: Vec<bool>,
    free_index: Vec<usize>,
    free_dofs: Vec<usize>,
    edge_signs: Vec<[i8; 3]>,
    /// Per-triangle, per-local-DOF orientation factors (RT only).
    local_signs: Vec<f64>,
}

const CONSTRAINED: usize = usize::MAX;

/// Builds the space of the given family and degree on `mesh`.
pub fn make_space(mesh: Arc<Mesh>, family: Family, degree: usize) -> Result<Arc<DofSpace>> {
    let supported = match family {
        Family::Lagrange => matches!(degree, 1 | 2),
        Family::CrouzeixRaviart => degree == 1,
        Family::RaviartThomas => degree <= 2,
    };
    if !supported {
        return Err(Error::Config(format!(
            "unsupported element: {family} of degree {degree}"
        )));
    }
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let nt = mesh.n_triangles();

    let edge_signs: Vec<[i8; 3]> = (0..nt)
        .map(|t| [0, 1, 2].map(|j| if mesh.edge_sign(t, j) > 0.0 { 1 } else { -1 }))
        .collect();

    let (n_dofs, local_dim) = match (family, degree) {
        (Family::Lagrange, 1) => (nv, 3),
        (Family::Lagrange, _) => (nv + ne, 6),
        (Family::CrouzeixRaviart, _) => (ne, 3),
        (Family::RaviartThomas, p) => {
            let interior = p * (p + 1);
            (ne * (p + 1) + nt * interior, 3 * (p + 1) + interior)
        }
    };

    let mut element_dofs = Vec::with_capacity(nt * local_dim);
    let mut local_signs = Vec::new();
    for t in 0..nt {
        let tri = mesh.triangles()[t];
        let edges = mesh.triangle_edges(t);
        match family {
            Family::Lagrange => {
                element_dofs.extend_from_slice(&tri);
                if degree == 2 {
                    element_dofs.extend(edges.iter().map(|&e| nv + e));
                }
            }
            Family::CrouzeixRaviart => element_dofs.extend_from_slice(&edges),
            Family::RaviartThomas => {
                let p = degree;
                for j in 0..3 {
                    let agree = tri[(j + 1) % 3] < tri[(j + 2) % 3];
                    let s = f64::from(edge_signs[t][j]);
                    for k in 0..=p {
                        element_dofs.push(edges[j] * (p + 1) + k);
                        let parity = if agree || k % 2 == 0 { 1.0 } else { -1.0 };
                        local_signs.push(s * parity);
                    }
                }
                let interior = p * (p + 1);
                for m in 0..interior {
                    element_dofs.push(ne * (p + 1) + t * interior + m);
                    local_signs.push(1.0);
                }
            }
        }
    }

    let mut dirichlet = vec![false; n_dofs];
    match family {
        Family::Lagrange => {
            for (v, d) in dirichlet.iter_mut().take(nv).enumerate() {
                *d = mesh.is_boundary_vertex(v);
            }
            if degree == 2 {
                for e in 0..ne {
                    dirichlet[nv + e] = mesh.is_boundary_edge(e);
                }
            }
        }
        Family::CrouzeixRaviart => {
            for (e, d) in dirichlet.iter_mut().enumerate() {
                *d = mesh.is_boundary_edge(e);
            }
        }
        Family::RaviartThomas => {}
    }
    let mut free_index = vec![CONSTRAINED; n_dofs];
    let mut free_dofs = Vec::new();
    for i in 0..n_dofs {
        if !dirichlet[i] {
            free_index[i] = free_dofs.len();
            free_dofs.push(i);
        }
    }

    Ok(Arc::new(DofSpace {
        family,
        degree,
        mesh,
        n_dofs,
        local_dim,
        element_dofs,
        dirichlet,
        free_index,
        free_dofs,
        edge_signs,
        local_signs,
    }))
}

impl DofSpace {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Number of basis functions supported on one triangle.
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.element_dofs[t * self.local_dim..(t + 1) * self.local_dim]
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|&i| self.dirichlet[i]).collect()
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    /// Position of `dof` among the free DOFs, if it is not constrained.
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        match self.free_index[dof] {
            CONSTRAINED => None,
            i => Some(i),
        }
    }

    /// `+1` where the global edge normal is the outward normal of triangle `t`.
    pub fn edge_signs(&self, t: usize) -> [i8; 3] {
        self.edge_signs[t]
    }

    /// Orientation factor of each local basis function (all `1` for scalar families).
    pub fn local_signs(&self, t: usize) -> &[f64] {
        if self.local_signs.is_empty() {
            &ONES[..self.local_dim]
        } else {
            &self.local_signs[t * self.local_dim..(t + 1) * self.local_dim]
        }
    }

    pub(crate) fn same_mesh(&self, other: &DofSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }
}

const ONES: [f64; 15] = [1.0; 15];
