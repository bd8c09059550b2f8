//! Quadrature on the unit interval and on triangles.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss–Legendre
//! rules. They have positive weights and are exact for any requested degree,
//! which is all the assembly code needs since every integrand is polynomial.

use std::sync::OnceLock;

const MAX_DEGREE: usize = 24;

/// Gauss–Legendre rule on `[0, 1]`; weights sum to 1.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Rule on the reference triangle in barycentric coordinates.
/// Weights sum to 1 and get multiplied by the physical area at use.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `n`-point Gauss–Legendre rule mapped to `[0, 1]`, exact to degree `2n-1`.
pub fn gauss_legendre(n: usize) -> LineRule {
    assert!(n >= 1);
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    LineRule { points, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shifted Legendre polynomial of degree `k` on `[0, 1]`.
pub fn shifted_legendre(k: usize, t: f64) -> f64 {
    legendre_with_derivative(k, 2.0 * t - 1.0).0
}

/// Line rule exact for polynomials of degree `degree`.
pub fn line_rule(degree: usize) -> &'static LineRule {
    static CACHE: OnceLock<Vec<LineRule>> = OnceLock::new();
    let rules = CACHE.get_or_init(|| {
        (0..=MAX_DEGREE)
            .map(|d| gauss_legendre(d / 2 + 1))
            .collect()
    });
    &rules[degree.min(MAX_DEGREE)]
}

fn collapsed_rule(degree: usize) -> QuadratureRule {
    // the collapsed map adds a factor (1 - u) in the first direction
    let nu = (degree + 2).div_ceil(2);
    let nv = degree / 2 + 1;
    let gu = gauss_legendre(nu);
    let gv = gauss_legendre(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&u, &wu) in gu.points.iter().zip(&gu.weights) {
        for (&v, &wv) in gv.points.iter().zip(&gv.weights) {
            let xi = u;
            let eta = v * (1.0 - u);
            points.push([1.0 - xi - eta, xi, eta]);
            // reference area 1/2, normalised to total weight 1
            weights.push(2.0 * wu * wv * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

/// Triangle rule exact for polynomials of total degree `degree`.
pub fn triangle_rule(degree: usize) -> &'static QuadratureRule {
    static CACHE: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
    let rules = CACHE.get_or_init(|| {
        (0..=MAX_DEGREE)
            .map(|d| {
                if d <= 1 {
                    QuadratureRule {
                        points: vec![[1.0 / 3.0; 3]],
                        weights: vec![1.0],
                        degree: 1,
                    }
                } else {
                    collapsed_rule(d)
                }
            })
            .collect()
    });
    assert!(
        degree <= MAX_DEGREE,
        "quadrature degree {degree} not supported"
    );
    &rules[degree]
}
