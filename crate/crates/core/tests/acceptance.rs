//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use majorant_core::assembly::default_majorant_degree;
use majorant_core::spaces::ElementMap;
use majorant_core::*;
use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DOF_TIME_LIMIT: Duration = Duration::from_secs(1);
const GUARANTEE_TIME_LIMIT: Duration = Duration::from_secs(600);
const GUARANTEE_SLACK: f64 = 1e-6;
const TABLE1_P2_1: f64 = 6.648;
const TABLE1_P2_1_TOL: f64 = 0.25;
const TABLE1_P2_2: f64 = 1.186;
const TABLE1_P2_2_TOL: f64 = 0.15;
const TABLE1_P2_3_RANGE: (f64, f64) = (1.0, 1.05);
const TABLE1_MAX_ITERATIONS: usize = 6;
const TABLE1_N40_P2_1: f64 = 6.64;
const TABLE2_DROP: f64 = 10.0;
const TABLE2_P2_3_MAX: f64 = 3.0;
const TABLE2_OVERESTIMATION: f64 = 50.0;
const REDUCTION_TOL: f64 = 1e-10;
const CSB_SAMPLES: usize = 100_000;
const CSB_UPPER: f64 = 1.0 + 1e-12;
const CSB_EQUALITY: f64 = 1.0 - 1e-9;
const BETA_RESIDUAL_TOL: f64 = 1e-6;
/// The stopping test watches the majorant, which is quadratic in the weight
/// near the optimum; the weight settles to roughly `sqrt(eps)`.
const OPTIMALITY_EPS: f64 = 1e-12;
const PERTURBATIONS: usize = 1000;
const RECONSTRUCTION_SAMPLES: usize = 100;
const RECONSTRUCTION_TOL: f64 = 1e-10;
const ANTISYMMETRY_TOL: f64 = 1e-8;

const A_EXAMPLE: [[f64; 2]; 2] = [[2.0, 1.0], [0.0, 3.0]];

type Key = (usize, usize, (u32, u32));
type Matrix = BTreeMap<Key, Vec<CaseOutcome>>;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn run(id: usize, name: &str, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = catch_unwind(AssertUnwindSafe(body))
        .unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
    println!(
        "criterion {id}: {} {name} ({}) [{:.2?}]",
        if verdict.pass { "PASS" } else { "FAIL" },
        verdict.detail,
        start.elapsed()
    );
    verdict.pass
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn dof_counts() -> Verdict {
    let start = Instant::now();
    let mesh = Arc::new(build_rect_mesh(Rect::unit_square(), 20, 20, Diagonal::Right).unwrap());
    let n1: Vec<usize> = [1, 2].map(|p| ScalarSpace::new(mesh.clone(), p).unwrap().dof_count()).to_vec();
    let n2: Vec<usize> = [1, 2, 3]
        .map(|p2| FluxSpace::from_label(mesh.clone(), p2).unwrap().dof_count())
        .to_vec();
    let elapsed = start.elapsed();
    let pass = n1 == [441, 1681] && n2 == [1240, 4080, 8520] && elapsed < DOF_TIME_LIMIT;
    Verdict::new(pass, format!("N1 {n1:?}, N2 {n2:?}, {elapsed:.2?}"))
}

fn guarantee(matrix: &mut Matrix) -> Verdict {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    for n in [10, 20, 40] {
        for p1 in [1, 2] {
            for k in [(1, 1), (2, 3)] {
                let cfg = CaseConfig { n, p1, k1: k.0, k2: k.1, a: A_EXAMPLE, ..CaseConfig::default() };
                let rows = match run_cases(&cfg, &[1, 2, 3]) {
                    Ok(rows) => rows,
                    Err(e) => {
                        failures.push(format!("n={n} p1={p1} k={k:?}: {e}"));
                        continue;
                    }
                };
                for row in &rows {
                    let ratio = row.result.maj_sq / row.err_sq;
                    worst = worst.min(ratio);
                    if row.result.maj_sq < row.err_sq * (1.0 - GUARANTEE_SLACK) {
                        failures.push(format!("n={n} p1={p1} p2={} k={k:?}: ratio {ratio:.6}", row.p2));
                    }
                }
                matrix.insert((n, p1, k), rows);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < GUARANTEE_TIME_LIMIT;
    Verdict::new(
        pass,
        format!("36 runs, min maj_sq/err_sq {worst:.6}, {elapsed:.1?}, failures {failures:?}"),
    )
}

fn table1(matrix: &Matrix) -> Verdict {
    let (Some(rows20), Some(rows40)) = (matrix.get(&(20, 1, (1, 1))), matrix.get(&(40, 1, (1, 1)))) else {
        return Verdict::new(false, "guarantee matrix incomplete");
    };
    let ieff: Vec<f64> = rows20.iter().map(|r| r.ieff).collect();
    let iters: Vec<usize> = rows20.iter().map(|r| r.result.iterations).collect();
    let ieff40 = rows40[0].ieff;
    let checks = [
        ("p2=1", within(ieff[0], TABLE1_P2_1, TABLE1_P2_1_TOL)),
        ("p2=2", within(ieff[1], TABLE1_P2_2, TABLE1_P2_2_TOL)),
        ("p2=3", (TABLE1_P2_3_RANGE.0..=TABLE1_P2_3_RANGE.1).contains(&ieff[2])),
        ("k", iters.iter().all(|&k| k <= TABLE1_MAX_ITERATIONS)),
        ("n=40 p2=1", within(ieff40, TABLE1_N40_P2_1, TABLE1_P2_1_TOL)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let unsquared: Vec<String> = ieff.iter().map(|v| format!("{:.4}", v.sqrt())).collect();
    Verdict::new(
        failed.is_empty(),
        format!(
            "Ieff {:?}, n=40 p2=1 {ieff40:.4}, k {iters:?}, maj/err {unsquared:?}, failed {failed:?}",
            ieff.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn table2(matrix: &Matrix) -> Verdict {
    let Some(rows) = matrix.get(&(20, 2, (2, 3))) else {
        return Verdict::new(false, "guarantee matrix incomplete");
    };
    let ieff: Vec<f64> = rows.iter().map(|r| r.ieff).collect();
    let pass = ieff[0] >= TABLE2_DROP * ieff[1]
        && ieff[2] < TABLE2_P2_3_MAX
        && ieff[0] > TABLE2_OVERESTIMATION * ieff[2];
    Verdict::new(pass, format!("Ieff {:.4} -> {:.4} -> {:.4}", ieff[0], ieff[1], ieff[2]))
}

/// `C_F^2 (div p, div q) + beta' (A^-1 p, q)` and `-C_F^2 (f, div q) + beta' (grad v, q)`
/// assembled directly from the flux basis.
fn remark_system(
    flux: &FluxSpace,
    scalar: &ScalarSpace,
    v: &[f64],
    problem: &ProblemSpec,
    a_inv: Matrix2<f64>,
    beta: f64,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mesh = flux.mesh();
    let n = flux.dof_count();
    let c_f2 = problem.friedrichs().powi(2);
    let rule = rule_for_degree(default_majorant_degree(scalar.order(), flux.order())).unwrap();
    let mut k = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for t in 0..mesh.num_triangles() {
        let map = ElementMap::new(mesh, t);
        let (vals, divs) = flux.eval_basis(t, &rule.points).unwrap();
        let dofs = flux.local_dofs(t);
        let nl = dofs.len();
        for (q, (&xhat, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let w = w * map.det.abs();
            let x = map.to_physical(xhat);
            let (_, gv) = scalar.evaluate(v, t, xhat);
            let f = (problem.rhs)(x);
            for i in 0..nl {
                let (gi, _) = dofs[i];
                let pi = Vector2::from(vals[q * nl + i]);
                rhs[gi] += w * (-c_f2 * f * divs[q * nl + i] + beta * Vector2::from(gv).dot(&pi));
                for j in 0..nl {
                    let (gj, _) = dofs[j];
                    let pj = Vector2::from(vals[q * nl + j]);
                    k[gi][gj] += w * (c_f2 * divs[q * nl + i] * divs[q * nl + j] + beta * (a_inv * pj).dot(&pi));
                }
            }
        }
    }
    (k, rhs)
}

fn symmetric_reduction() -> Verdict {
    let a = Matrix2::new(2.0, 0.0, 0.0, 3.0);
    let b_exact = compute_b(&a).unwrap() == Matrix2::identity() * 0.5;
    let a_inv = Matrix2::new(0.5, 0.0, 0.0, 1.0 / 3.0);
    let problem = sine_problem(1, 2, [[2.0, 0.0], [0.0, 3.0]]).unwrap();
    let lambda = problem.lambda_low();
    let mesh = Arc::new(build_rect_mesh(Rect::unit_square(), 3, 3, Diagonal::Right).unwrap());
    let scalar = ScalarSpace::new(mesh.clone(), 1).unwrap();
    let v = scalar.interpolate(|p| (p[0] * (1.0 - p[0]) + 0.3) * p[1]);
    let mut worst: f64 = 0.0;
    for r in 0..=2 {
        let flux = Arc::new(FluxSpace::new(mesh.clone(), r).unwrap());
        let system = assemble_majorant(flux.clone(), &scalar, &v, &problem, None).unwrap();
        for beta in [1.0, 0.05, 1e-3] {
            let ours = system.flux_matrix(beta).unwrap().to_dense();
            let ours_rhs = system.flux_rhs(beta);
            let (k, rhs) = remark_system(&flux, &scalar, &v, &problem, a_inv, lambda * beta);
            let scale = k.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            let rscale = rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for i in 0..k.len() {
                worst = worst.max((lambda * ours_rhs[i] - rhs[i]).abs() / rscale);
                for j in 0..k.len() {
                    worst = worst.max((lambda * ours[i][j] - k[i][j]).abs() / scale);
                }
            }
        }
    }
    Verdict::new(
        b_exact && worst <= REDUCTION_TOL,
        format!("B = I/2 exactly: {b_exact}, max relative entry difference {worst:.2e}"),
    )
}

fn csb_fuzz() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c5b);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..CSB_SAMPLES {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let (s, c) = theta.sin_cos();
        let q = Matrix2::new(c, -s, s, c);
        let l = Matrix2::from_diagonal(&Vector2::new(
            10f64.powf(rng.gen_range(-3.0..2.0)),
            10f64.powf(rng.gen_range(-3.0..2.0)),
        ));
        let w = rng.gen_range(-10.0..10.0);
        let a = q * l * q.transpose() + Matrix2::new(0.0, w, -w, 0.0);
        let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        worst = worst.max(csb_inequality_check(&a, y, p).unwrap());
    }
    let mut equality = f64::INFINITY;
    for _ in 0..1000 {
        let y: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let s: f64 = rng.gen_range(0.01..100.0);
        equality = equality.min(csb_inequality_check(&Matrix2::identity(), y, [s * y[0], s * y[1]]).unwrap());
    }
    Verdict::new(
        worst <= CSB_UPPER && equality > CSB_EQUALITY,
        format!("max ratio {worst:.15}, min extremal ratio {equality:.15}"),
    )
}

fn optimality() -> Verdict {
    let runs = [(10, 1, 1, (1, 1)), (10, 2, 2, (2, 3)), (8, 1, 3, (2, 3))];
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b7a);
    let mut details = Vec::new();
    let mut pass = true;
    for (n, p1, p2, k) in runs {
        let cfg = CaseConfig { n, p1, k1: k.0, k2: k.1, ..CaseConfig::default() };
        let primal = PrimalSolution::compute(&cfg).unwrap();
        let flux = Arc::new(FluxSpace::from_label(primal.space.mesh().clone(), p2).unwrap());
        let system = assemble_majorant(flux, &primal.space, &primal.v, &primal.problem, None).unwrap();
        let opts = MinimizerOptions { eps: OPTIMALITY_EPS, ..cfg.minimizer };
        let res = minimize_majorant(&system, &opts).unwrap();
        let residual = res.beta_fixed_point_residual();
        let base = eval_majorant(&system, &res.flux_coeffs, res.beta_solve).unwrap().maj_sq;
        let cn = res.flux_coeffs.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut reductions = 0;
        for trial in 0..PERTURBATIONS {
            let size = cn * 10f64.powi(-2 - (trial % 4) as i32);
            let mut c = res.flux_coeffs.clone();
            let delta: Vec<f64> = (0..c.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dn = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (ci, di) in c.iter_mut().zip(&delta) {
                *ci += size * di / dn;
            }
            if eval_majorant(&system, &c, res.beta_solve).unwrap().maj_sq < base {
                reductions += 1;
            }
        }
        pass &= res.converged && residual <= BETA_RESIDUAL_TOL && reductions == 0;
        details.push(format!(
            "n={n} p1={p1} p2={p2}: {} its, beta residual {residual:.1e}, reductions {reductions}",
            res.iterations
        ));
    }
    Verdict::new(pass, details.join("; "))
}

fn reconstruction() -> Verdict {
    let problem = sine_problem(2, 3, A_EXAMPLE).unwrap();
    let a = Matrix2::new(A_EXAMPLE[0][0], A_EXAMPLE[0][1], A_EXAMPLE[1][0], A_EXAMPLE[1][1]);
    let a_inv = a.try_inverse().unwrap();
    let b = (Matrix2::identity() + a.transpose() * a_inv).try_inverse().unwrap();
    let mesh = Arc::new(build_rect_mesh(Rect::unit_square(), 5, 4, Diagonal::Right).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ec0);
    let mut worst: f64 = 0.0;
    for (p1, r) in [(1, 0), (2, 1), (1, 2)] {
        let scalar = ScalarSpace::new(mesh.clone(), p1).unwrap();
        let v = assemble_primal(&scalar, &problem, None)
            .unwrap()
            .solve(&SolverOptions::default())
            .unwrap();
        let flux = Arc::new(FluxSpace::new(mesh.clone(), r).unwrap());
        let system = assemble_majorant(flux.clone(), &scalar, &v, &problem, None).unwrap();
        let rule = rule_for_degree(default_majorant_degree(p1, r)).unwrap();
        for _ in 0..RECONSTRUCTION_SAMPLES {
            let c: Vec<f64> = (0..flux.dof_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (mut equi_sq, mut dual_sq) = (0.0, 0.0);
            for t in 0..mesh.num_triangles() {
                let map = ElementMap::new(&mesh, t);
                for (&xhat, &w) in rule.points.iter().zip(&rule.weights) {
                    let w = w * map.det.abs();
                    let x = map.to_physical(xhat);
                    let (y, div) = flux.evaluate(&c, t, xhat);
                    let (_, gv) = scalar.evaluate(&v, t, xhat);
                    let d = div + (problem.rhs)(x);
                    equi_sq += w * d * d;
                    let q = b * (Vector2::from(y) - a * Vector2::from(gv));
                    dual_sq += w * (a_inv * q).dot(&q);
                }
            }
            let qf_equi = system.equi_sq(&c);
            let qf_dual = system.dual_sq(&c);
            worst = worst.max((qf_equi - equi_sq).abs() / equi_sq);
            worst = worst.max((qf_dual - dual_sq).abs() / dual_sq);
        }
    }
    Verdict::new(worst <= RECONSTRUCTION_TOL, format!("max relative difference {worst:.2e}"))
}

fn antisymmetry() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (n, p1) in [(20, 1), (20, 2)] {
        let problem = sine_problem(1, 1, A_EXAMPLE).unwrap();
        let sym = problem.symmetrized();
        let mesh = Arc::new(build_rect_mesh(Rect::unit_square(), n, n, Diagonal::Right).unwrap());
        let space = ScalarSpace::new(mesh, p1).unwrap();
        let opts = SolverOptions::with_tol(1e-12);
        let v = assemble_primal(&space, &problem, None).unwrap().solve(&opts).unwrap();
        let sys_sym = assemble_primal(&space, &sym, None).unwrap();
        let v_sym = sys_sym.solve(&opts).unwrap();
        let d: Vec<f64> = sys_sym.interior.iter().map(|&g| v[g] - v_sym[g]).collect();
        let diff = sys_sym.k.quad_form(&d).max(0.0).sqrt();
        worst = worst.max(diff);
        details.push(format!("n={n} p1={p1}: {diff:.2e}"));
    }
    Verdict::new(worst <= ANTISYMMETRY_TOL, format!("energy-norm difference {}", details.join(", ")))
}

fn main() -> ExitCode {
    let mut matrix = Matrix::new();
    let results = [
        run(1, "DOF counts on the 20x20 mesh", dof_counts),
        run(2, "guaranteed upper bound over the test matrix", || guarantee(&mut matrix)),
        run(3, "sine problem k=(1,1), p1=1 efficiency indices", || table1(&matrix)),
        run(4, "sine problem k=(2,3), p1=2 flux-degree trend", || table2(&matrix)),
        run(5, "symmetric coefficient reduction", symmetric_reduction),
        run(6, "Cauchy-Schwarz-type inequality fuzz", csb_fuzz),
        run(7, "flux and weight optimality", optimality),
        run(8, "quadratic-form reconstruction", reconstruction),
        run(9, "antisymmetric part does not change the primal solution", antisymmetry),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
