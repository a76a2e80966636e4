//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for the Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15 Kronrod nodes on `[lo, hi]` with Kronrod and embedded Gauss weights.
fn gk_rule(lo: f64, hi: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let mut out = [(0.0, 0.0, 0.0); 15];
    let mut k = 0;
    for i in 0..8 {
        let g = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        if i == 7 {
            out[k] = (c, WGK[i] * r, g * r);
            k += 1;
        } else {
            for s in [-1.0, 1.0] {
                out[k] = (c + s * r * XGK[i], WGK[i] * r, g * r);
                k += 1;
            }
        }
    }
    out
}

struct Cell {
    x: (f64, f64),
    y: (f64, f64),
    value: f64,
    err_x: f64,
    err_y: f64,
}

impl Cell {
    fn new<F: Fn(f64, f64) -> f64>(f: &F, x: (f64, f64), y: (f64, f64)) -> Cell {
        let rx = gk_rule(x.0, x.1);
        let ry = gk_rule(y.0, y.1);
        let (mut kk, mut gk, mut kg) = (0.0, 0.0, 0.0);
        for &(xi, kwx, gwx) in &rx {
            for &(yj, kwy, gwy) in &ry {
                let v = f(xi, yj);
                kk += kwx * kwy * v;
                gk += gwx * kwy * v;
                kg += kwx * gwy * v;
            }
        }
        Cell {
            x,
            y,
            value: kk,
            err_x: (kk - gk).abs(),
            err_y: (kk - kg).abs(),
        }
    }

    fn err(&self) -> f64 {
        self.err_x + self.err_y
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err() == other.err()
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err().total_cmp(&other.err())
    }
}

/// Globally adaptive tensor Gauss–Kronrod cubature over a rectangle.
///
/// The rectangle with the largest error estimate is bisected along the axis
/// that contributes most of it, until the summed estimate drops below
/// `rel_tol · |integral|`.
pub fn adaptive_2d<F: Fn(f64, f64) -> f64>(f: F, x: (f64, f64), y: (f64, f64), rel_tol: f64) -> f64 {
    let mut heap = BinaryHeap::new();
    let first = Cell::new(&f, x, y);
    let (mut total, mut err) = (first.value, first.err());
    heap.push(first);
    let mut iterations = 0;
    while err > rel_tol * total.abs() {
        iterations += 1;
        assert!(iterations < 2_000_000, "cubature failed to converge");
        let c = heap.pop().expect("non-empty");
        total -= c.value;
        err -= c.err();
        let children = if c.err_x >= c.err_y {
            let m = 0.5 * (c.x.0 + c.x.1);
            [Cell::new(&f, (c.x.0, m), c.y), Cell::new(&f, (m, c.x.1), c.y)]
        } else {
            let m = 0.5 * (c.y.0 + c.y.1);
            [Cell::new(&f, c.x, (c.y.0, m)), Cell::new(&f, c.x, (m, c.y.1))]
        };
        for ch in children {
            total += ch.value;
            err += ch.err();
            heap.push(ch);
        }
        if heap.len() % 4096 == 0 {
            total = heap.iter().map(|c| c.value).sum();
            err = heap.iter().map(|c| c.err()).sum();
        }
    }
    heap.iter().map(|c| c.value).sum()
}

/// `∫_a^b ∫_a^b |x-y|^{2H-2} dx dy` by cubature of the two triangles on either
/// side of the diagonal, each mapped to the unit square with the diagonal at `r = 0`.
pub fn riesz_square_oracle(a: f64, b: f64, h: f64) -> f64 {
    let l = b - a;
    let p = 2.0 * h - 2.0;
    // On `y < x`: x = a + l s, y = x - l s r, so x - y = l s r and dx dy = l² s ds dr.
    let half = adaptive_2d(|s, r| (l * s * r).powf(p) * l * l * s, (0.0, 1.0), (0.0, 1.0), 1e-11);
    2.0 * half
}

/// `∫_a^m ∫_m^b |x-y|^{2H-2} dy dx`, `m = (a+b)/2`, by cubature in the offsets
/// `u = m - x` and `w = y - m`.
pub fn riesz_split_oracle(a: f64, b: f64, h: f64) -> f64 {
    let half = 0.5 * (b - a);
    let p = 2.0 * h - 2.0;
    adaptive_2d(|u, w| (u + w).powf(p), (0.0, half), (0.0, half), 1e-11)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫ f` over `[breaks[0], breaks[last]]` by `n`-point Gauss–Legendre on each
/// piece between consecutive breaks.
///
/// Each piece is mapped from `[0, 1]` by `φ(u) = 35u⁴ - 84u⁵ + 70u⁶ - 20u⁷`,
/// whose derivative vanishes to third order at both ends, so that algebraic
/// endpoint behaviour of `f` costs little accuracy.
pub fn piecewise_gl<F: Fn(f64) -> f64>(f: F, mut breaks: Vec<f64>, n: usize) -> f64 {
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let rule = gauss_legendre(n);
    let phi = |u: f64| u.powi(4) * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u.powi(3));
    let dphi = |u: f64| 140.0 * (u * (1.0 - u)).powi(3);
    breaks
        .windows(2)
        .map(|w| {
            let len = w[1] - w[0];
            rule.iter()
                .map(|&(x, wt)| {
                    let u = 0.5 * (x + 1.0);
                    0.5 * wt * len * dphi(u) * f(w[0] + len * phi(u))
                })
                .sum::<f64>()
        })
        .sum()
}

/// A region given by its cross-section `[left(t), right(t)]` for `t ∈ [t0, t1]`,
/// both edges piecewise linear with the listed kink times.
pub struct Shape {
    pub t0: f64,
    pub t1: f64,
    pub kinks: Vec<f64>,
    pub left: Box<dyn Fn(f64) -> f64>,
    pub right: Box<dyn Fn(f64) -> f64>,
}

/// Diamond with rotated lower corner `(tau, lambda)` and rotated side `eps`.
pub fn diamond_shape(tau: f64, lambda: f64, eps: f64) -> Shape {
    let tb = (tau + lambda) / 2f64.sqrt();
    let xb = (lambda - tau) / 2f64.sqrt();
    let half = eps / 2f64.sqrt();
    Shape {
        t0: tb,
        t1: tb + 2.0 * half,
        kinks: vec![tb + half],
        left: Box::new(move |t| xb - half + (t - tb - half).abs()),
        right: Box::new(move |t| xb + half - (t - tb - half).abs()),
    }
}

/// Covariance of the masses of two regions: the time integral of the interval
/// covariance of their cross-sections, with the time axis split at every kink
/// and at every time two edges cross.
pub fn region_covariance_oracle(a: &Shape, b: &Shape, h: f64) -> f64 {
    let lo = a.t0.max(b.t0);
    let hi = a.t1.min(b.t1);
    if hi <= lo {
        return 0.0;
    }
    let p = 2.0 * h;
    let icc = |t: f64| {
        let (l1, r1, l2, r2) = ((a.left)(t), (a.right)(t), (b.left)(t), (b.right)(t));
        0.5 * ((r2 - l1).abs().powf(p) + (l2 - r1).abs().powf(p) - (l2 - l1).abs().powf(p) - (r2 - r1).abs().powf(p))
    };
    let mut coarse = vec![lo, hi];
    coarse.extend(a.kinks.iter().chain(&b.kinks).filter(|&&k| k > lo && k < hi));
    coarse.sort_by(f64::total_cmp);
    let mut breaks = coarse.clone();
    let edges = [&a.left, &a.right, &b.left, &b.right];
    for w in coarse.windows(2) {
        for i in 0..4 {
            for j in i + 1..4 {
                let d0 = (edges[i])(w[0]) - (edges[j])(w[0]);
                let d1 = (edges[i])(w[1]) - (edges[j])(w[1]);
                if d0 * d1 < 0.0 {
                    breaks.push(w[0] + (w[1] - w[0]) * d0 / (d0 - d1));
                }
            }
        }
    }
    piecewise_gl(icc, breaks, 40)
}
