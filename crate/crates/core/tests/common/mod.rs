#![allow(dead_code)]

use bisr::bivariate::BivariatePenalty;
use bisr::convexity;
use bisr::experiment::{add_awgn, gen_sparse_signal, lambda_rule};
use bisr::{ConvolutionFilter, Objective, PenaltyFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random filter with 2 to 5 taps and a dominant central tap.
pub fn random_filter(rng: &mut ChaCha8Rng) -> ConvolutionFilter {
    let len = rng.random_range(2..=5);
    let mut taps: Vec<f64> = (0..len).map(|_| rng.random_range(-0.6..0.6)).collect();
    taps[len / 2] = rng.random_range(0.8..1.2);
    ConvolutionFilter::new(taps).unwrap()
}

pub struct Instance {
    pub h: ConvolutionFilter,
    pub x_true: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, k: usize, sigma: f64) -> Instance {
    let h = random_filter(rng);
    let x_true = gen_sparse_signal(n, k, (-100.0, 100.0), rng).unwrap();
    let y = add_awgn(&h.apply(&x_true).unwrap(), sigma, rng).unwrap();
    let lambda = lambda_rule(&h, sigma, 2.5).unwrap();
    Instance { h, x_true, y, lambda }
}

/// Objective with the maximal certified parameters scaled by `frac`.
pub fn certified_objective(inst: &Instance, family: PenaltyFamily, frac: f64) -> Objective {
    let (p, _) = convexity::auto_params(&inst.h, inst.lambda, convexity::DEFAULT_GRID).unwrap();
    let pen = BivariatePenalty::from_params(family, frac * p.a1, frac * p.a2).unwrap();
    Objective::new(inst.h.clone(), inst.y.clone(), inst.lambda, pen).unwrap()
}

/// Direct evaluation of `1/2 ||y - Hx||^2 + lambda/2 sum psi((x_{n-1}, x_n))`
/// with an explicit convolution loop.
pub fn objective_direct(obj: &Objective, x: &[f64]) -> f64 {
    let h = obj.filter().taps();
    let y = obj.y();
    let mut fid = 0.0;
    for (m, ym) in y.iter().enumerate() {
        let mut hx = 0.0;
        for (k, xk) in x.iter().enumerate() {
            if m >= k && m - k < h.len() {
                hx += h[m - k] * xk;
            }
        }
        fid += 0.5 * (ym - hx) * (ym - hx);
    }
    let mut padded = vec![0.0];
    padded.extend_from_slice(x);
    padded.push(0.0);
    let pen: f64 = padded.windows(2).map(|w| obj.penalty().psi([w[0], w[1]])).sum();
    fid + 0.5 * obj.lambda() * pen
}

/// Dense matrix of the full convolution, `(N + L - 1) x N`, row-major.
pub fn conv_matrix(h: &ConvolutionFilter, n: usize) -> nalgebra::DMatrix<f64> {
    let taps = h.taps();
    let mut m = nalgebra::DMatrix::zeros(n + taps.len() - 1, n);
    for k in 0..n {
        for (j, t) in taps.iter().enumerate() {
            m[(k + j, k)] = *t;
        }
    }
    m
}

/// Proximal gradient for the lasso with a dense operator, fixed step `1/||H||_2^2`.
pub fn lasso_oracle(h: &ConvolutionFilter, y: &[f64], lambda: f64, n: usize, iters: usize) -> Vec<f64> {
    let a = conv_matrix(h, n);
    let ata = a.transpose() * &a;
    let aty = a.transpose() * nalgebra::DVector::from_column_slice(y);
    let l = ata.clone().symmetric_eigen().eigenvalues.max();
    let step = 1.0 / l;
    let mut x = nalgebra::DVector::zeros(n);
    for _ in 0..iters {
        let g = &ata * &x - &aty;
        let z = &x - step * g;
        x = z.map(|v| {
            let t = step * lambda;
            if v > t {
                v - t
            } else if v < -t {
                v + t
            } else {
                0.0
            }
        });
    }
    x.iter().copied().collect()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    // the kink at zero is a common minimizer of l1-type objectives
    if f(0.0) <= f(m) && a <= 0.0 && 0.0 <= b {
        0.0
    } else {
        m
    }
}

/// Cyclic coordinate descent with golden-section line minimization of the
/// directly evaluated objective.
pub fn coordinate_descent(obj: &Objective, radius: f64, sweeps: usize) -> Vec<f64> {
    let n = obj.n();
    let mut x = vec![0.0; n];
    for _ in 0..sweeps {
        let mut change = 0.0_f64;
        for i in 0..n {
            let base = x.clone();
            let f = |t: f64| {
                let mut trial = base.clone();
                trial[i] = t;
                objective_direct(obj, &trial)
            };
            let t = golden_min(f, -radius, radius, 160);
            change = change.max((t - x[i]).abs());
            x[i] = t;
        }
        if change < 1e-11 {
            break;
        }
    }
    x
}

/// Global minimizer of a two-sample objective by grid search on
/// `[-radius, radius]^2` followed by successively finer local grids.
pub fn brute_force_n2(obj: &Objective, radius: f64) -> [f64; 2] {
    assert_eq!(obj.n(), 2);
    let f = |x1: f64, x2: f64| objective_direct(obj, &[x1, x2]);
    let mut best = [0.0, 0.0];
    let mut fbest = f(0.0, 0.0);
    let scan = |c: [f64; 2], half: f64, step: f64, best: &mut [f64; 2], fbest: &mut f64| {
        let m = (half / step).round() as i64;
        for i in -m..=m {
            for j in -m..=m {
                let x = [c[0] + i as f64 * step, c[1] + j as f64 * step];
                let v = f(x[0], x[1]);
                if v < *fbest {
                    *fbest = v;
                    *best = x;
                }
            }
        }
    };
    scan([0.0, 0.0], radius, 1e-2, &mut best, &mut fbest);
    let mut half = 2e-2;
    let mut step = 1e-3;
    for _ in 0..4 {
        let c = best;
        scan(c, half, step, &mut best, &mut fbest);
        half *= 0.1;
        step *= 0.1;
    }
    // the minimizer often sits on an axis; compare against exact zeros
    for cand in [[0.0, best[1]], [best[0], 0.0], [0.0, 0.0]] {
        if f(cand[0], cand[1]) <= fbest {
            fbest = f(cand[0], cand[1]);
            best = cand;
        }
    }
    best
}

pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()))
}

pub fn is_non_increasing(trace: &[f64], slack: f64) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + slack)
}
