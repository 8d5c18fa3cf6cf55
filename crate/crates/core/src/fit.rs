//! Derivative-free minimization for small least-squares problems.

#[allow(unused_imports)]
use num_traits::Float;

/// Result of a two-parameter minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub point: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex search in two dimensions.
///
/// `scale` sets the initial simplex edge along each axis. Converges when the
/// spread of objective values and the simplex diameter both drop below `tol`
/// (relative to the value scale for the former).
pub fn nelder_mead_2d<F>(f: F, start: [f64; 2], scale: [f64; 2], tol: f64, max_iter: usize) -> Minimum
where
    F: Fn([f64; 2]) -> f64,
{
    let eval = |p: [f64; 2]| {
        let v = f(p);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut simplex = [
        start,
        [start[0] + scale[0], start[1]],
        [start[0], start[1] + scale[1]],
    ];
    let mut values = simplex.map(eval);

    let add = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // Order best..worst.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.map(|i| simplex[i]);
        values = idx.map(|i| values[i]);

        let spread = (values[2] - values[0]).abs();
        let diameter = (1..3)
            .map(|i| {
                let d0 = simplex[i][0] - simplex[0][0];
                let d1 = simplex[i][1] - simplex[0][1];
                (d0 * d0 + d1 * d1).sqrt()
            })
            .fold(0.0, f64::max);
        if spread <= tol * (values[0].abs() + tol) && diameter <= tol.sqrt() {
            converged = true;
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let reflected = add(centroid, simplex[2], -1.0);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = add(centroid, simplex[2], -2.0);
            let fe = eval(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (target, ft) = if fr < values[2] { (reflected, fr) } else { (simplex[2], values[2]) };
            let contracted = add(centroid, target, 0.5);
            let fc = eval(contracted);
            if fc < ft {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = add(simplex[0], simplex[i], 0.5);
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum {
        point: simplex[best],
        value: values[best],
        iterations,
        converged,
    }
}

/// Evaluate `f` on a rectangular grid and return the best point.
pub fn grid_scan<F>(f: F, axis0: &[f64], axis1: &[f64]) -> ([f64; 2], f64)
where
    F: Fn([f64; 2]) -> f64,
{
    let mut best = ([f64::NAN, f64::NAN], f64::INFINITY);
    for &x in axis0 {
        for &y in axis1 {
            let v = f([x, y]);
            if v < best.1 {
                best = ([x, y], v);
            }
        }
    }
    best
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> alloc::vec::Vec<f64> {
    match n {
        0 => alloc::vec::Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
