//! Sparse solvers against dense reference computations on small problems.

mod common;

use std::sync::Arc;

use eigenbound::bounds::cr_lambda_lowers;
use eigenbound::fem::{assemble_dual_matrix, assemble_primal, make_space, Family};
use eigenbound::mesh::{parse_mesh, refine_uniform, Domain, Mesh};
use eigenbound::solvers::{eig_smallest, solve_spd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_meshes() -> Vec<(&'static str, Arc<Mesh>)> {
    let sq = Domain::UnitSquare.mesh();
    let fixture = parse_mesh(
        include_str!("../fixtures/square_delaunay_initial.mesh"),
        std::path::Path::new("fixture"),
    )
    .unwrap();
    vec![
        ("square/1", Arc::new(refine_uniform(&sq))),
        (
            "square/3",
            Arc::new(refine_uniform(&refine_uniform(&refine_uniform(&sq)))),
        ),
        ("delaunay", Arc::new(fixture)),
        ("lshape/1", Arc::new(refine_uniform(&Domain::LShape.mesh()))),
    ]
}

#[test]
fn eigenpairs_match_dense_oracle() {
    for (name, mesh) in small_meshes() {
        for (family, k) in [
            (Family::Lagrange, 1),
            (Family::Lagrange, 2),
            (Family::CrouzeixRaviart, 1),
        ] {
            let space = make_space(mesh.clone(), family, k).unwrap();
            let n = space.n_free();
            if !(4..=200).contains(&n) {
                continue;
            }
            let (a, b) = assemble_primal(&space).unwrap();
            let (vals, vecs) = common::dense_generalized_eigen(&a, &b);
            let m = 3.min(n - 1);
            let pairs = eig_smallest(&a, &b, m, 1e-12).unwrap();
            for (j, p) in pairs.iter().enumerate() {
                let rel = (p.value - vals[j]).abs() / vals[j];
                assert!(
                    rel <= 1e-10,
                    "{name} {family} k={k} j={j}: {} vs {}",
                    p.value,
                    vals[j]
                );
                // vectors agree up to sign when the eigenvalue is simple
                let simple = (j == 0 || vals[j] - vals[j - 1] > 1e-6 * vals[j])
                    && vals[j + 1] - vals[j] > 1e-6 * vals[j];
                if simple {
                    let d: Vec<f64> = vecs.column(j).iter().copied().collect();
                    let s = if d.iter().zip(&p.vector).map(|(x, y)| x * y).sum::<f64>() < 0.0 {
                        -1.0
                    } else {
                        1.0
                    };
                    let d: Vec<f64> = d.iter().map(|x| s * x).collect();
                    assert!(
                        common::rel_diff(&p.vector, &d) <= 1e-8,
                        "{name} {family} k={k} j={j} vector"
                    );
                }
            }
        }
    }
}

#[test]
fn spd_solves_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (name, mesh) in small_meshes() {
        let mut systems = Vec::new();
        for k in [1, 2] {
            systems.push(
                assemble_primal(&make_space(mesh.clone(), Family::Lagrange, k).unwrap())
                    .unwrap()
                    .0,
            );
        }
        for p in 0..=2 {
            systems.push(
                assemble_dual_matrix(&make_space(mesh.clone(), Family::RaviartThomas, p).unwrap())
                    .unwrap(),
            );
        }
        for a in systems
            .into_iter()
            .filter(|a| a.dim() > 0 && a.dim() <= 200)
        {
            let rhs: Vec<f64> = (0..a.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = solve_spd(&a, &rhs, 1e-12).unwrap();
            let xd = common::dense_solve(&a, &rhs);
            assert!(common::rel_diff(&x, &xd) <= 1e-10, "{name} n={}", a.dim());
        }
    }
}

#[test]
fn cr_lower_bound_is_below_the_exact_second_eigenvalue() {
    let lambda2 = 1.0 + 5.0 * std::f64::consts::PI.powi(2);
    let mut mesh = Domain::UnitSquare.mesh();
    for _ in 0..5 {
        mesh = refine_uniform(&mesh);
        let m = Arc::new(mesh.clone());
        if let Ok(l) = cr_lambda_lowers(&m, 2, 1e-10) {
            assert!(
                l[1] <= lambda2,
                "{} triangles: {} > {lambda2}",
                mesh.n_triangles(),
                l[1]
            );
            assert!(l[0] <= l[1]);
        }
    }
}
