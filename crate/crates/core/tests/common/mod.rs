//! Shared generators for the integration suites. Everything is seeded,
//! so the "random" problems are reproducible run to run.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eigloc::analysis::ProblemConfig;
use eigloc::assembly::{Bc, QuadratureRule};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The built-in reference problem at a given resolution.
pub fn reference_config(nx: usize) -> ProblemConfig {
    let mut cfg = ProblemConfig::reference();
    cfg.nx = nx;
    cfg.ny = nx;
    cfg
}

/// Uniformly positive trigonometric/exponential coefficient expression:
/// a sine ripple plus a Gaussian bump over a safe constant floor.
pub fn random_positive_expr(rng: &mut ChaCha8Rng) -> String {
    let b: f64 = rng.gen_range(0.0..1.5);
    let a: f64 = b + rng.gen_range(0.5..2.5);
    let c: f64 = rng.gen_range(-3.0..3.0);
    let d: f64 = rng.gen_range(-3.0..3.0);
    let phase: f64 = rng.gen_range(0.0..6.28);
    let e: f64 = rng.gen_range(0.0..30.0);
    let f: f64 = rng.gen_range(0.2..5.0);
    let gx: f64 = rng.gen_range(-0.8..0.8);
    let gy: f64 = rng.gen_range(-0.8..0.8);
    format!("{a}+{b}*sin({c}*x+{d}*y+{phase})+{e}*exp(-{f}*((x-{gx})^2+(y-{gy})^2))")
}

/// Random problem on `(-1,1)^2` cycling through boundary conditions and
/// quadrature rules.
pub fn random_problem(rng: &mut ChaCha8Rng, case: usize) -> ProblemConfig {
    let mut cfg = ProblemConfig::reference();
    cfg.nx = rng.gen_range(4..=16);
    cfg.ny = rng.gen_range(4..=16);
    cfg.k = random_positive_expr(rng);
    cfg.g = random_positive_expr(rng);
    cfg.bc = if case % 2 == 0 { Bc::Neumann } else { Bc::Dirichlet0 };
    cfg.quadrature = if (case / 2) % 2 == 0 {
        QuadratureRule::EdgeMidpoints
    } else {
        QuadratureRule::Centroid
    };
    cfg
}

/// Smooth random expression over the parsed grammar, with damped
/// products and guarded denominators so values and derivatives stay
/// moderate on `(-1,1)^2`.
pub fn random_smooth_expr(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => "x".to_string(),
            1 => "y".to_string(),
            _ => format!("{}", rng.gen_range(0.3..1.5)),
        };
    }
    let a = random_smooth_expr(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => format!("({a}+{})", random_smooth_expr(rng, depth - 1)),
        1 => format!("({a}-{})", random_smooth_expr(rng, depth - 1)),
        2 => format!("(0.6*{a}*{})", random_smooth_expr(rng, depth - 1)),
        3 => format!("({a}/(1.5+({})^2))", random_smooth_expr(rng, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(0.4*sin({a}))"),
        _ => format!("sqrt(1.2+({a})^2)"),
    }
}

/// Dense random symmetric matrix with entries in [-1, 1].
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.gen_range(-1.0..1.0);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}

/// Dense random SPD matrix `R^T R / n + c I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut r = vec![0.0; n * n];
    for v in r.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let shift: f64 = rng.gen_range(0.5..2.0);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += r[k * n + i] * r[k * n + j];
            }
            m[i * n + j] = s / n as f64;
        }
        m[i * n + i] += shift;
    }
    m
}
