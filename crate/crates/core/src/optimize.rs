//! Derivative-free maximizers: golden-section line search and Nelder–Mead.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than
/// `tol`. Returns `(argmax, max, evaluations)`.
///
/// The returned point is the best of the interior probes and both
/// endpoints, so a maximum sitting on the boundary is not lost.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, f64, usize) {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut best = (a, f(a));
    let fb = f(b);
    if fb > best.1 {
        best = (b, fb);
    }
    let mut evals = 2;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    evals += 2;
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    (best.0, best.1, evals)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSettings {
    pub initial_step: f64,
    /// Stop when both the simplex diameter and the value spread fall below.
    pub x_tolerance: f64,
    pub f_tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            x_tolerance: 1e-9,
            f_tolerance: 1e-13,
            max_evaluations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead maximization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
pub fn nelder_mead_max(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    settings: &SimplexSettings,
) -> SimplexResult {
    let dim = start.len();
    assert!(dim >= 1, "empty parameter vector");
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += settings.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&p, &q)| p + t * (q - p)).collect()
    };

    loop {
        // best first; stable so equal values keep insertion order
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = &simplex[0];
        let worst = &simplex[dim];
        let diameter = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| {
                x.iter()
                    .zip(&best.0)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (diameter <= settings.x_tolerance && (best.1 - worst.1).abs() <= settings.f_tolerance)
            || evals >= settings.max_evaluations
        {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst_x = simplex[dim].0.clone();
        let worst_v = simplex[dim].1;

        let reflected = combine(&centroid, &worst_x, -1.0);
        let fr = eval(&reflected, &mut evals);
        if fr > simplex[0].1 {
            let expanded = combine(&centroid, &worst_x, -2.0);
            let fe = eval(&expanded, &mut evals);
            simplex[dim] = if fe > fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr > simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let outside = fr > worst_v;
        let toward = if outside { &reflected } else { &worst_x };
        let contracted = combine(&centroid, toward, 0.5);
        let fc = eval(&contracted, &mut evals);
        if (outside && fc >= fr) || (!outside && fc > worst_v) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = combine(&anchor, &vertex.0, 0.5);
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evals,
    }
}
