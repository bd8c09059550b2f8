use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use crate::analytic::{align_to_eigenspace, square_eigenspace, square_eigenvalue, L_SHAPE_LAMBDA1};
use crate::bounds::{cr_lambda_lowers, BoundsReport, Provenance};
use crate::error::{Error, Result};
use crate::estimator::{eta, residual_indicators, DualSolver};
use crate::fem::{assemble_primal, make_space, DofSpace, Family, Field};
use crate::mesh::{mark_dorfler, refine_adaptive, refine_uniform, save_mesh, Domain, Mesh};
use crate::solvers::{eig_smallest, EigenPair};

use super::config::{ExperimentConfig, Refinement};
use super::svg::{mesh_svg, LogLogPlot};
use super::table::{write_csv, Row};

/// Everything computed on one refinement step, handed to the step callback.
pub struct StepContext<'a> {
    pub step: usize,
    pub mesh: &'a Arc<Mesh>,
    pub space: &'a Arc<DofSpace>,
    pub pairs: &'a [EigenPair],
    /// rows of this step only
    pub rows: &'a [Row],
    pub lambda_next_lower: Option<f64>,
    pub provenance: Provenance,
}

/// Result of a run: all rows plus warnings collected on the way.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
    pub final_mesh: Option<Arc<Mesh>>,
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub csv: PathBuf,
    pub svgs: Vec<PathBuf>,
    pub outcome: RunOutcome,
}

fn stage<T>(name: impl FnOnce() -> String, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name()))
}

/// Runs the refinement loop and returns the table rows; `on_step` sees
/// each step as soon as it is finished.
pub fn run_steps(
    config: &ExperimentConfig,
    mut on_step: impl FnMut(&StepContext<'_>) -> Result<()>,
) -> Result<RunOutcome> {
    config.validate()?;
    let mut out = RunOutcome::default();
    let mut mesh = Arc::new(stage(|| "initial mesh".into(), config.initial_mesh())?);
    let m = config.num_eigenpairs;
    let (n_steps, adaptive) = match config.refinement {
        Refinement::Uniform { levels } => (levels, None),
        Refinement::Adaptive {
            theta,
            max_dofs,
            loops,
        } => (loops, Some((theta, max_dofs))),
    };

    for step in 0..n_steps {
        let started = Instant::now();
        let tag = |what: &str| format!("step {step} ({} triangles): {what}", mesh.n_triangles());
        let space = stage(
            || tag("primal space"),
            make_space(mesh.clone(), Family::Lagrange, config.fe_degree),
        )?;
        if let Some((_, max_dofs)) = adaptive {
            if space.n_free() > max_dofs {
                break;
            }
        }
        if space.n_free() < m {
            out.warnings.push(format!(
                "step {step} skipped: {} free DOFs for {m} eigenpairs",
                space.n_free()
            ));
        } else {
            let (pairs, rows, lower, provenance) =
                solve_step(config, step, &mesh, &space, started, &tag)?;
            on_step(&StepContext {
                step,
                mesh: &mesh,
                space: &space,
                pairs: &pairs,
                rows: &rows,
                lambda_next_lower: lower,
                provenance,
            })?;
            out.rows.extend(rows);
            if let Some((theta, _)) = adaptive {
                let u1 = Field::from_free(space.clone(), &pairs[0].vector)?;
                let ind = stage(
                    || tag("error indicators"),
                    residual_indicators(pairs[0].value, &u1),
                )?;
                let marked = stage(|| tag("marking"), mark_dorfler(&ind, theta))?;
                if step + 1 < n_steps {
                    mesh = Arc::new(refine_adaptive(&mesh, &marked));
                }
                continue;
            }
        }
        if step + 1 < n_steps {
            // adaptive runs also land here while the mesh is too coarse to mark
            mesh = Arc::new(refine_uniform(&mesh));
        }
    }
    out.final_mesh = Some(mesh);
    if out.rows.is_empty() {
        out.warnings.push("the run produced no rows".into());
    }
    Ok(out)
}

type StepResult = (Vec<EigenPair>, Vec<Row>, Option<f64>, Provenance);

fn solve_step(
    config: &ExperimentConfig,
    step: usize,
    mesh: &Arc<Mesh>,
    space: &Arc<DofSpace>,
    started: Instant,
    tag: &dyn Fn(&str) -> String,
) -> Result<StepResult> {
    let m = config.num_eigenpairs;
    let gm = config.guaranteed_m;
    let (a, b) = stage(|| tag("primal assembly"), assemble_primal(space))?;
    let pairs = stage(
        || tag("primal eigenproblem"),
        eig_smallest(&a, &b, m, config.eig_tol),
    )?;

    let (lower, provenance) = match config.lambda_next_lower {
        Some(l) => (Some(l), Provenance::UserSupplied),
        None if gm > 0 => {
            // too few CR DOFs on very coarse meshes: the bound is simply unavailable
            let l = cr_lambda_lowers(mesh, gm + 1, config.eig_tol)
                .ok()
                .and_then(|v| v.last().copied());
            (l, Provenance::CrComputed)
        }
        None => (None, Provenance::CrComputed),
    };
    // guaranteed bounds need λ_{m,h} < λ_{m+1}^L for the whole cluster
    let separated = match lower {
        Some(l) if gm > 0 => pairs[gm - 1].value < l,
        _ => false,
    };

    let fields: Vec<Field> = pairs
        .iter()
        .map(|p| Field::from_free(space.clone(), &p.vector))
        .collect::<Result<_>>()?;
    let references: Vec<(Option<f64>, Option<f64>)> = fields
        .iter()
        .zip(&pairs)
        .enumerate()
        .map(|(k, (f, p))| reference_errors(config.domain, k + 1, p.value, f))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage(tag("reference errors")))?;

    let mut rows = Vec::with_capacity(m * config.rt_degrees.len());
    let mut per_degree = Vec::new();
    for &p in &config.rt_degrees {
        let rt = stage(
            || tag("flux space"),
            make_space(mesh.clone(), Family::RaviartThomas, p),
        )?;
        let dual = stage(
            || tag(&format!("RT{p} dual factorization")),
            DualSolver::new(rt),
        )?;
        let mut etas = Vec::with_capacity(m);
        for (pair, f) in pairs.iter().zip(&fields) {
            let y = stage(
                || tag(&format!("RT{p} dual solve")),
                dual.solve(pair.value, f, config.lin_tol),
            )?;
            etas.push(stage(|| tag("estimator"), eta(pair.value, f, &y))?.total);
        }
        per_degree.push((p, etas));
    }
    let wall = started.elapsed().as_secs_f64();

    for (k, pair) in pairs.iter().enumerate() {
        let i = k + 1;
        for (p, etas) in &per_degree {
            let guaranteed = separated && i <= gm;
            let report = BoundsReport::new(
                i,
                pair.value,
                etas[k],
                lower.unwrap_or(f64::NAN),
                provenance,
                config.kappa,
                guaranteed,
            )?;
            rows.push(Row {
                step,
                n_elements: mesh.n_triangles(),
                n_dofs: space.n_free(),
                i,
                lambda_h: pair.value,
                rt_degree: *p,
                eta: report.eta,
                eta_sq: report.eta_sq,
                lambda2_lower: lower,
                alpha: report.alpha,
                // the eigenfunction bound is stated for a simple first eigenvalue
                fun_error_upper: if i == 1 { report.fun_error_upper } else { None },
                lambda_lower_guaranteed: report.lambda_lower_guaranteed,
                lambda_lower_asymptotic: report.lambda_lower_asymptotic,
                ref_error_a: references[k].0,
                ref_lambda_gap: references[k].1,
                solver_residual: pair.residual,
                wall_time_s: wall,
            });
        }
    }
    Ok((pairs, rows, lower, provenance))
}

/// `(‖u_i − u_{i,h}‖_a, λ_{i,h} − λ_i)` where a reference is known.
fn reference_errors(
    domain: Option<Domain>,
    i: usize,
    lambda_h: f64,
    u_h: &Field,
) -> Result<(Option<f64>, Option<f64>)> {
    match domain {
        Some(Domain::UnitSquare) => {
            let aligned = align_to_eigenspace(&square_eigenspace(i), u_h)?;
            Ok((Some(aligned.error_a), Some(lambda_h - square_eigenvalue(i))))
        }
        Some(Domain::LShape) if i == 1 => Ok((None, Some(lambda_h - L_SHAPE_LAMBDA1))),
        _ => Ok((None, None)),
    }
}

/// Runs an experiment and writes `results.csv`, the resolved `config.txt`,
/// reference notes and optional SVG plots into `output_dir/name`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifacts> {
    run_experiment_with(config, |_| Ok(()))
}

/// [`run_experiment`] with a per-step callback, e.g. for progress output.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    on_step: impl FnMut(&StepContext<'_>) -> Result<()>,
) -> Result<RunArtifacts> {
    config.validate()?;
    if config.name.is_empty() || config.name.contains(['/', '\\']) || config.name == ".." {
        return Err(Error::Config(format!(
            "run name '{}' is not a valid directory name",
            config.name
        )));
    }
    let dir = config.output_dir.join(&config.name);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let write = |name: &str, text: &str| -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };
    write("config.txt", &config.to_text())?;

    let outcome = run_steps(config, on_step)?;
    let csv = dir.join("results.csv");
    stage(|| "writing results".into(), write_csv(&outcome.rows, &csv))?;

    let mut notes = String::new();
    match config.domain {
        Some(Domain::UnitSquare) => notes.push_str("reference: exact eigenpairs of the unit square\n"),
        Some(Domain::LShape) => notes.push_str(&format!(
            "reference: lambda_1 = {L_SHAPE_LAMBDA1:?} (extrapolated, not exact); ref_lambda_gap only for i = 1\n"
        )),
        None => notes.push_str("reference: none (user mesh)\n"),
    }
    notes.push_str(&format!(
        "lambda2_lower: {}\n",
        match config.lambda_next_lower {
            Some(_) => Provenance::UserSupplied,
            None => Provenance::CrComputed,
        }
    ));
    write("reference.txt", &notes)?;

    let mut svgs = Vec::new();
    if config.emit_svg && !outcome.rows.is_empty() {
        for (name, plot) in plots(&outcome.rows, config) {
            if !plot.is_empty() {
                svgs.push(write(&name, &plot.render())?);
            }
        }
        if let Some(mesh) = &outcome.final_mesh {
            svgs.push(write("final_mesh.svg", &mesh_svg(mesh))?);
            let path = dir.join("final_mesh.mesh");
            save_mesh(mesh, &path)?;
        }
    }
    Ok(RunArtifacts {
        dir,
        csv,
        svgs,
        outcome,
    })
}

fn series(
    rows: &[Row],
    keep: impl Fn(&Row) -> bool,
    y: impl Fn(&Row) -> Option<f64>,
) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| keep(r))
        .filter_map(|r| y(r).map(|v| (r.n_dofs as f64, v)))
        .collect()
}

/// Log-log plots of error-like quantities against the number of DOFs.
fn plots(rows: &[Row], config: &ExperimentConfig) -> Vec<(String, LogLogPlot)> {
    let m = config.num_eigenpairs;
    let first_p = config.rt_degrees[0];
    let mut ev = LogLogPlot::new("Eigenvalue errors and estimators", "degrees of freedom", "");
    for i in 1..=m {
        ev.add(
            format!("lambda_{i},h - lambda_{i}"),
            series(
                rows,
                |r| r.i == i && r.rt_degree == first_p,
                |r| r.ref_lambda_gap,
            ),
            false,
        );
        for &p in &config.rt_degrees {
            ev.add(
                format!("eta^2 (i={i}, RT{p})"),
                series(rows, |r| r.i == i && r.rt_degree == p, |r| Some(r.eta_sq)),
                true,
            );
        }
    }

    let mut fe = LogLogPlot::new("First eigenfunction error", "degrees of freedom", "");
    fe.add(
        "||u_1 - u_1,h||_a",
        series(
            rows,
            |r| r.i == 1 && r.rt_degree == first_p,
            |r| r.ref_error_a,
        ),
        false,
    );
    for &p in &config.rt_degrees {
        fe.add(
            format!("eta (RT{p})"),
            series(rows, |r| r.i == 1 && r.rt_degree == p, |r| Some(r.eta)),
            true,
        );
        fe.add(
            format!("upper bound (RT{p})"),
            series(
                rows,
                |r| r.i == 1 && r.rt_degree == p,
                |r| r.fun_error_upper,
            ),
            true,
        );
    }

    // distance of the lower bounds below λ_h (and below λ_1 when known)
    let mut lb = LogLogPlot::new(
        "Lower bounds of the first eigenvalue",
        "degrees of freedom",
        "",
    );
    let exact = |r: &Row| r.ref_lambda_gap.map(|g| r.lambda_h - g);
    lb.add(
        "lambda_1,h - lambda_1",
        series(
            rows,
            |r| r.i == 1 && r.rt_degree == first_p,
            |r| r.ref_lambda_gap,
        ),
        false,
    );
    for &p in &config.rt_degrees {
        let keep = |r: &Row| r.i == 1 && r.rt_degree == p;
        let below = |r: &Row, l: Option<f64>| l.map(|l| exact(r).unwrap_or(r.lambda_h) - l);
        lb.add(
            format!("guaranteed (RT{p})"),
            series(rows, keep, |r| below(r, r.lambda_lower_guaranteed)),
            true,
        );
        lb.add(
            format!("asymptotic (RT{p})"),
            series(rows, keep, |r| below(r, Some(r.lambda_lower_asymptotic))),
            true,
        );
    }
    if rows.iter().all(|r| r.ref_lambda_gap.is_none()) {
        lb.y_label = "lambda_1,h - lower bound".into();
    } else {
        lb.y_label = "lambda_1 - lower bound".into();
    }
    vec![
        ("eigenvalue_errors.svg".into(), ev),
        ("function_errors.svg".into(), fe),
        ("lower_bounds.svg".into(), lb),
    ]
}
