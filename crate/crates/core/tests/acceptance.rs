//! Acceptance criteria 1 to 13. Each test prints one `PASS`/`FAIL` line
//! followed by diagnostics; run with `--nocapture` to see them.
//!
//! The tests hold a shared lock so that wall-clock budgets are measured
//! without competing test threads.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI, SQRT_2, TAU};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;

use qnc::characteristic::char_surface;
use qnc::entanglement::{
    decomposition_from_isometry, eigen_ensemble, entanglement_e, productize, random_isometry,
    OptimizerConfig,
};
use qnc::linalg::{apply_local_unitary, mix_local_unitaries, swap_subsystems, trace_norm};
use qnc::measurement::omega_volume;
use qnc::states::{
    bell_mixture, classical_correlated, pure_two_qubit, random_density, random_pure,
    random_simplex, random_unitary, rng,
};
use qnc::steering::{
    main_normal_constancy, polytope_diagnostics, random_real_separable, real_separable_example,
    steering_surface, Verdict, DEFAULT_NORMAL_TOL,
};
use qnc::strength::{strength, strength_directed};
use qnc::tomography::{oracle_from_state, reconstruct_bipartite, reconstruct_state};
use qnc::{CMatrix, DensityMatrix, Direction, IntegratorConfig, Subsystem};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    println!("{} criterion {id:>2} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn quad128() -> IntegratorConfig {
    IntegratorConfig::quadrature(128)
}

fn two_qubit_mixed<R: Rng>(r: &mut R) -> DensityMatrix {
    random_density(4, r).with_split(2, 2).unwrap()
}

fn eq10(alpha: f64, theta: f64) -> f64 {
    2.0 * (2.0 * alpha).sin().abs()
        / (2.0 + (2.0 * (theta - alpha)).cos() + (2.0 * (theta + alpha)).cos())
}

#[test]
fn criterion_01_closed_form_pure_qubits() {
    let _g = serial();
    let start = Instant::now();
    let mut max_err = 0.0f64;
    let mut compared = 0usize;
    let mut poles = 0usize;
    for alpha in [FRAC_PI_8, FRAC_PI_4, FRAC_PI_3] {
        for gamma in [0.0, 1.0] {
            let rho = pure_two_qubit(alpha, gamma);
            for s in char_surface(&rho, &[32, 32]).unwrap() {
                let want = eq10(alpha, s.params.thetas()[0]);
                for (c, pole) in s.components.iter().zip(&s.poles) {
                    if *pole {
                        poles += 1;
                        continue;
                    }
                    compared += 1;
                    max_err = max_err.max((c - want).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "closed form on 32x32",
        max_err <= 1e-9 && elapsed < Duration::from_secs(2),
        &format!(
            "max |F - closed form| = {max_err:.3e} over {compared} components \
             ({poles} pole components excluded), {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_02_pure_state_strength() {
    let _g = serial();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut zero_ok = true;
    let mut lines = Vec::new();
    for alpha in [0.0, FRAC_PI_8, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        let g = strength(&pure_two_qubit(alpha, 0.0), &quad128()).unwrap();
        let want = (2.0 * alpha).sin().abs();
        let err = (g.value - want).abs();
        if alpha == 0.0 {
            zero_ok = err <= 1e-12;
        }
        worst = worst.max(err);
        lines.push(format!("alpha={alpha:.4}: G={:.10} target={want:.10}", g.value));
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        "pure-state strength",
        worst <= 5e-4 && zero_ok && elapsed < Duration::from_secs(10),
        &format!("max error {worst:.3e}, {elapsed:.2?}; {}", lines.join("; ")),
    );
}

#[test]
fn criterion_03_directed_symmetry() {
    let _g = serial();
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let rho = random_pure(4, &mut r).with_split(2, 2).unwrap();
        let ab = strength_directed(&rho, Direction::AtoB, &quad128()).unwrap();
        let ba = strength_directed(&rho, Direction::BtoA, &quad128()).unwrap();
        worst = worst.max((ab.value - ba.value).abs());
    }
    verdict(
        3,
        "directed symmetry",
        worst <= 2e-3,
        &format!("max |G_AB - G_BA| = {worst:.3e} over 10 pure states"),
    );
}

#[test]
fn criterion_04_b_side_unitary_invariance() {
    let _g = serial();
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let n_b = if i % 2 == 0 { 2 } else { 3 };
        let rho = random_density(2 * n_b, &mut r).with_split(2, n_b).unwrap();
        let u = random_unitary(n_b, &mut r);
        let turned = apply_local_unitary(&rho, None, Some(&u)).unwrap();
        let a = char_surface(&rho, &[32, 32]).unwrap();
        let b = char_surface(&turned, &[32, 32]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.defined, y.defined);
            worst = worst.max((x.magnitude - y.magnitude).abs());
        }
    }
    verdict(
        4,
        "B-side unitary leaves |F| unchanged",
        worst <= 1e-10,
        &format!("max pointwise | |F| - |F'| | = {worst:.3e} over 10 states"),
    );
}

#[test]
fn criterion_05_local_unitary_invariance() {
    let _g = serial();
    let mut r = rng(5);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_delta = 0.0f64;
    let mut violations = 0usize;
    for _ in 0..20 {
        let rho = two_qubit_mixed(&mut r);
        let (ua, ub) = (random_unitary(2, &mut r), random_unitary(2, &mut r));
        let turned = apply_local_unitary(&rho, Some(&ua), Some(&ub)).unwrap();
        let g0 = strength(&rho, &quad128()).unwrap();
        let g1 = strength(&turned, &quad128()).unwrap();
        let delta = (g0.value - g1.value).abs();
        let bound = 2.0 * (g0.error_estimate + g1.error_estimate) + 1e-3;
        worst_delta = worst_delta.max(delta);
        worst_excess = worst_excess.max(delta - bound);
        if delta > bound {
            violations += 1;
        }
    }
    // Pure states, for contrast: p |F| is constant there, so G cannot move.
    let mut pure_delta = 0.0f64;
    for _ in 0..5 {
        let rho = random_pure(4, &mut r).with_split(2, 2).unwrap();
        let ua = random_unitary(2, &mut r);
        let turned = apply_local_unitary(&rho, Some(&ua), None).unwrap();
        let d = strength(&rho, &quad128()).unwrap().value - strength(&turned, &quad128()).unwrap().value;
        pure_delta = pure_delta.max(d.abs());
    }

    // Rotated surface: sorted |F| of psi(pi/3) and of U_A psi(pi/3).
    let s3 = 3f64.sqrt() / 2.0;
    let ua = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s3, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-s3, 0.0),
        ],
    );
    let psi = pure_two_qubit(FRAC_PI_3, 0.0);
    let turned = apply_local_unitary(&psi, Some(&ua), None).unwrap();
    let sorted = |rho: &DensityMatrix| {
        let mut v: Vec<f64> = char_surface(rho, &[64, 64])
            .unwrap()
            .into_iter()
            .filter(|s| s.defined && !s.poles.iter().any(|&p| p))
            .map(|s| s.magnitude)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sorted(&psi), sorted(&turned));
    let quantile_gap = if a.len() == b.len() {
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    verdict(
        5,
        "local unitary invariance and rotated surface",
        violations == 0 && quantile_gap <= 1e-2,
        &format!(
            "mixed states: {violations}/20 pairs exceed 2*err + 1e-3 (max |dG| = {worst_delta:.3e}, \
             worst excess {worst_excess:.3e}); pure states max |dG| = {pure_delta:.3e}; \
             sorted |F| quantile distance on 64x64 = {quantile_gap:.3e} ({} samples)",
            a.len()
        ),
    );
}

#[test]
fn criterion_06_local_operation_monotone() {
    let _g = serial();
    let mut r = rng(6);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for i in 0..50 {
        let rho = two_qubit_mixed(&mut r);
        let k = 2 + i % 3;
        let weights = random_simplex(k, &mut r);
        let us: Vec<CMatrix> = (0..k).map(|_| random_unitary(2, &mut r)).collect();
        let side = if i % 2 == 0 { Subsystem::A } else { Subsystem::B };
        let out = mix_local_unitaries(&rho, &weights, &us, side).unwrap();
        let g0 = strength(&rho, &quad128()).unwrap();
        let g1 = strength(&out, &quad128()).unwrap();
        let excess = g1.value - g0.value - 2.0 * (g0.error_estimate + g1.error_estimate);
        worst_excess = worst_excess.max(excess);
        if excess > 0.0 {
            violations += 1;
        }
    }
    verdict(
        6,
        "monotone under mixtures of local unitaries",
        violations == 0,
        &format!("{violations}/50 increases beyond 2*err; worst G(out) - G(in) - 2*err = {worst_excess:.3e}"),
    );
}

#[test]
fn criterion_07_productization_lowers_strength() {
    let _g = serial();
    let mut r = rng(7);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for _ in 0..10 {
        let rho = two_qubit_mixed(&mut r);
        let g = strength(&rho, &quad128()).unwrap();
        let rank = eigen_ensemble(&rho).0.len();
        for j in 0..10 {
            let m = rank + j % 3;
            let v = random_isometry(m, rank, false, &mut r);
            let prod = productize(&decomposition_from_isometry(&rho, &v).unwrap());
            let gp = strength(&prod, &quad128()).unwrap();
            let excess = gp.value - g.value - 2.0 * (g.error_estimate + gp.error_estimate);
            worst_excess = worst_excess.max(excess);
            if excess > 0.0 {
                violations += 1;
            }
        }
    }
    verdict(
        7,
        "productized states are weaker",
        violations == 0,
        &format!("{violations}/100 violations; worst G(prod) - G - 2*err = {worst_excess:.3e}"),
    );
}

#[test]
fn criterion_08_entanglement_anchors() {
    let _g = serial();
    let cfg = OptimizerConfig::default();
    let budget = Duration::from_secs(300);
    let mut pass = true;
    let mut lines = Vec::new();
    for alpha in [FRAC_PI_8, FRAC_PI_4] {
        let start = Instant::now();
        let res = entanglement_e(&pure_two_qubit(alpha, 0.0), &cfg).unwrap();
        let took = start.elapsed();
        let want = (2.0 * alpha).sin();
        pass &= (res.e - want).abs() <= 2e-3 && took < budget;
        lines.push(format!("psi({alpha:.4}): E={:.6} target={want:.6} in {took:.2?}", res.e));
    }
    for (name, rho) in [("classical", classical_correlated()), ("Bell mixture", bell_mixture())] {
        let start = Instant::now();
        let res = entanglement_e(&rho, &cfg).unwrap();
        let took = start.elapsed();
        pass &= res.e <= 5e-3 && took < budget;
        lines.push(format!(
            "{name}: E={:.3e} (G={:.6}, best product G={:.6}, m={}) in {took:.2?}",
            res.e, res.g_rho, res.g_best_product, res.trace.m
        ));
    }
    verdict(8, "entanglement anchors", pass, &lines.join("; "));
}

#[test]
fn criterion_09_tomography() {
    let _g = serial();
    let start = Instant::now();
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = 2 + i % 3;
        let rho = random_density(n, &mut r);
        let rebuilt = reconstruct_state(&oracle_from_state(&rho), n).unwrap();
        worst = worst.max(trace_norm(&(rebuilt.matrix() - rho.matrix())).unwrap());
    }
    let mut worst_bi = 0.0f64;
    for n_b in [2, 3] {
        for _ in 0..20 {
            let rho = random_density(2 * n_b, &mut r).with_split(2, n_b).unwrap();
            let rebuilt = reconstruct_bipartite(&oracle_from_state(&rho), 2, n_b).unwrap();
            worst_bi = worst_bi.max(trace_norm(&(rebuilt.matrix() - rho.matrix())).unwrap());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        9,
        "tomography",
        worst <= 1e-8 && worst_bi <= 1e-8 && elapsed < Duration::from_secs(5),
        &format!("single-system max error {worst:.3e}, bipartite max error {worst_bi:.3e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_10_main_normal_separability() {
    let _g = serial();
    let tol = DEFAULT_NORMAL_TOL;
    let example = main_normal_constancy(&steering_surface(&real_separable_example(), 64).unwrap(), tol);
    let bell = main_normal_constancy(&steering_surface(&pure_two_qubit(FRAC_PI_4, 0.0), 64).unwrap(), tol);
    let mut r = rng(10);
    let mut random_ok = 0usize;
    let mut worst_random = 0.0f64;
    for i in 0..20 {
        let rho = random_real_separable(2 + i % 3, &mut r);
        let v = main_normal_constancy(&steering_surface(&rho, 64).unwrap(), tol);
        worst_random = worst_random.max(v.max_normal_deviation);
        if v.verdict == Verdict::SeparableReal {
            random_ok += 1;
        }
    }
    let pass = example.verdict == Verdict::SeparableReal
        && example.max_normal_deviation <= 1e-6
        && bell.verdict == Verdict::NotSeparableReal
        && bell.max_normal_deviation > 0.05
        && random_ok == 20;
    verdict(
        10,
        "main-normal separability",
        pass,
        &format!(
            "example: {:?} dev {:.3e}; maximally entangled: {:?} dev {:.3e}; random: {random_ok}/20 \
             separable-real, max dev {worst_random:.3e}",
            example.verdict, example.max_normal_deviation, bell.verdict, bell.max_normal_deviation
        ),
    );
}

#[test]
fn criterion_11_steering_polytope() {
    let _g = serial();
    let mut pass = true;
    let mut lines = Vec::new();
    for m in [4, 8] {
        let rep = polytope_diagnostics(m, 10_000, 11).unwrap();
        pass &= rep.all_inside && rep.max_vertex_gap <= 1e-6 && rep.hull_vertices == m;
        lines.push(format!(
            "m={m}: max outside {:.3e}, vertex gap {:.3e}, hull vertices {}",
            rep.max_outside, rep.max_vertex_gap, rep.hull_vertices
        ));
    }
    verdict(11, "steering polytope", pass, &lines.join("; "));
}

#[test]
fn criterion_12_measure_plumbing() {
    let _g = serial();
    let v2 = omega_volume(2).unwrap();
    let v3 = omega_volume(3).unwrap();
    let volumes_ok = (v2 - 2.0 * PI * PI).abs() <= 1e-10 && (v3 - 8.0 * PI.powi(3)).abs() <= 1e-10;
    let mut r = rng(12);
    let mut worst_z = 0.0f64;
    for i in 0..10 {
        let rho = two_qubit_mixed(&mut r);
        let q = strength(&rho, &quad128()).unwrap();
        let mc = strength(&rho, &IntegratorConfig::monte_carlo(100_000, 1200 + i)).unwrap();
        worst_z = worst_z.max((q.value - mc.value).abs() / mc.error_estimate);
    }
    verdict(
        12,
        "measure plumbing",
        volumes_ok && worst_z <= 3.0,
        &format!(
            "omega(2) = {v2:.12}, omega(3) = {v3:.12}; max |quadrature - MC| / SE = {worst_z:.3} over 10 states"
        ),
    );
}

/// Brute-force `p |F|` for a measured qubit, built from full operators and
/// explicit ket derivatives.
fn oracle_weighted(rho: &CMatrix, theta: f64, phi: f64) -> Option<f64> {
    let e = Complex64::from_polar(1.0, phi);
    let ket = [Complex64::new(theta.cos(), 0.0), e * theta.sin()];
    let d_theta = [Complex64::new(-theta.sin(), 0.0), e * theta.cos()];
    let d_phi = [Complex64::new(0.0, 0.0), Complex64::i() * e * theta.sin()];
    let proj = |a: &[Complex64; 2], b: &[Complex64; 2]| {
        Matrix2::from_fn(|i, j| a[i] * b[j].conj())
    };
    let m = proj(&ket, &ket);
    // Tr_A((X (x) I) rho) for a 2x2 operator X on A.
    let steer = |x: &Matrix2<Complex64>| {
        Matrix2::from_fn(|b1, b2| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a1 in 0..2 {
                for a2 in 0..2 {
                    acc += x[(a2, a1)] * rho[(a1 * 2 + b1, a2 * 2 + b2)];
                }
            }
            acc
        })
    };
    let n = steer(&m);
    let p = n.trace().re;
    if p < 1e-12 {
        return None;
    }
    let norm1 = |h: &Matrix2<Complex64>| -> f64 {
        // Eigenvalues of a 2x2 Hermitian matrix in closed form.
        let tr = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
        let d = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
        let rad = (d * d + h[(0, 1)].norm_sqr()).sqrt();
        (tr + rad).abs() + (tr - rad).abs()
    };
    let mut sq = 0.0;
    for dk in [&d_theta, &d_phi] {
        let dm = proj(dk, &ket) + proj(&ket, dk);
        let denom = norm1(&dm);
        if denom < 1e-12 {
            continue;
        }
        let dn = steer(&dm);
        let dp = dn.trace().re;
        let f = norm1(&(dn - n * Complex64::new(dp / p, 0.0))) / (p * denom);
        sq += f * f;
    }
    Some(p * sq.sqrt())
}

fn oracle_direction(rho: &CMatrix, samples: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let theta = r.random::<f64>() * PI;
        let phi = r.random::<f64>() * TAU;
        let v = SQRT_2 * oracle_weighted(rho, theta, phi).unwrap_or(0.0);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn criterion_13_classical_state_oracle() {
    let _g = serial();
    let rho = classical_correlated();
    let g = strength(&rho, &quad128()).unwrap();
    let (ab, se_ab) = oracle_direction(rho.matrix(), 1_000_000, 1301);
    let swapped = swap_subsystems(&rho).unwrap();
    let (ba, se_ba) = oracle_direction(swapped.matrix(), 1_000_000, 1302);
    let oracle = 0.5 * (ab + ba);
    let sigma = 0.5 * se_ab.hypot(se_ba);
    let z = (g.value - oracle).abs() / sigma.hypot(g.error_estimate);
    println!(
        "criterion 13 log: G = {:.8}, oracle = {oracle:.8} +- {sigma:.2e}, sqrt(2)/pi = {:.8}, \
         stated value 1/2 differs from G by {:.3e}",
        g.value,
        SQRT_2 / PI,
        (g.value - 0.5).abs()
    );
    verdict(
        13,
        "classical state against brute-force oracle",
        z <= 3.0,
        &format!("|G - oracle| = {:.3e} = {z:.2} sigma", (g.value - oracle).abs()),
    );
}
