//! Box-constrained Nelder-Mead minimizer used as the fallback when
//! line search stalls.

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOutcome<const D: usize> {
    pub point: [f64; D],
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn project<const D: usize>(mut x: [f64; D], bound: f64) -> [f64; D] {
    for v in &mut x {
        *v = v.clamp(-bound, bound);
    }
    x
}

fn lerp<const D: usize>(from: &[f64; D], to: &[f64; D], t: f64) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = from[i] + t * (to[i] - from[i]);
    }
    out
}

fn diameter<const D: usize>(vertices: &[([f64; D], f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, (p, _)) in vertices.iter().enumerate() {
        for (q, _) in &vertices[i + 1..] {
            let dist = p
                .iter()
                .zip(q)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            d = d.max(dist);
        }
    }
    d
}

/// Minimize `f` over the box `[-bound, bound]^D`, starting from an axis-aligned
/// simplex of edge `step` at `start`. Stops when the simplex diameter drops
/// below `tol` or after `max_iters` iterations.
pub(crate) fn minimize<const D: usize, F>(
    mut f: F,
    start: [f64; D],
    step: f64,
    bound: f64,
    tol: f64,
    max_iters: usize,
) -> SimplexOutcome<D>
where
    F: FnMut(&[f64; D]) -> f64,
{
    let mut eval = |x: [f64; D]| {
        let x = project(x, bound);
        let v = f(&x);
        (x, if v.is_nan() { f64::INFINITY } else { v })
    };

    let start = project(start, bound);
    let mut vertices: Vec<([f64; D], f64)> = Vec::with_capacity(D + 1);
    vertices.push(eval(start));
    for i in 0..D {
        let mut x = start;
        // step inward when the start sits on the box edge
        x[i] += if x[i] + step > bound { -step } else { step };
        vertices.push(eval(x));
    }

    let mut iterations = 0;
    loop {
        vertices.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diam = diameter(&vertices);
        if diam < tol || iterations >= max_iters {
            return SimplexOutcome {
                point: vertices[0].0,
                iterations,
                converged: diam < tol,
            };
        }
        iterations += 1;

        let mut centroid = [0.0; D];
        for (x, _) in &vertices[..D] {
            for i in 0..D {
                centroid[i] += x[i] / D as f64;
            }
        }
        let worst = vertices[D];
        let best_val = vertices[0].1;
        let second_worst_val = vertices[D - 1].1;

        let reflected = eval(lerp(&centroid, &worst.0, -REFLECT));
        if reflected.1 < best_val {
            let expanded = eval(lerp(&centroid, &worst.0, -EXPAND));
            vertices[D] = if expanded.1 < reflected.1 {
                expanded
            } else {
                reflected
            };
            continue;
        }
        if reflected.1 < second_worst_val {
            vertices[D] = reflected;
            continue;
        }
        let contracted = if reflected.1 < worst.1 {
            eval(lerp(&centroid, &reflected.0, CONTRACT))
        } else {
            eval(lerp(&centroid, &worst.0, CONTRACT))
        };
        if contracted.1 < worst.1.min(reflected.1) {
            vertices[D] = contracted;
            continue;
        }
        let best = vertices[0].0;
        for v in vertices.iter_mut().skip(1) {
            *v = eval(lerp(&best, &v.0, SHRINK));
        }
    }
}
