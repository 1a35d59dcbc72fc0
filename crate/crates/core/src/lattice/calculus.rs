use super::{ScalarField, SkewField, TorusGrid, VectorField};

/// `out[x] = u[x + e_axis] - u[x]`.
pub(crate) fn forward_diff_into(grid: &TorusGrid, axis: usize, u: &[f64], out: &mut [f64]) {
    let (outer, n, inner) = grid.axis_layout(axis);
    for o in 0..outer {
        let base = o * n * inner;
        for c in 0..n {
            let row = base + c * inner;
            let next = base + ((c + 1) % n) * inner;
            let (dst, cur, nxt) = (
                &mut out[row..row + inner],
                &u[row..row + inner],
                &u[next..next + inner],
            );
            for t in 0..inner {
                dst[t] = nxt[t] - cur[t];
            }
        }
    }
}

/// `out[x] = f[x] - f[x - e_axis]`.
pub(crate) fn backward_diff_into(grid: &TorusGrid, axis: usize, f: &[f64], out: &mut [f64]) {
    let (outer, n, inner) = grid.axis_layout(axis);
    for o in 0..outer {
        let base = o * n * inner;
        for c in 0..n {
            let row = base + c * inner;
            let prev = base + ((c + n - 1) % n) * inner;
            let (dst, cur, prv) = (
                &mut out[row..row + inner],
                &f[row..row + inner],
                &f[prev..prev + inner],
            );
            for t in 0..inner {
                dst[t] = cur[t] - prv[t];
            }
        }
    }
}

/// Adds `f[x - e_axis] - f[x]` into `out`, i.e. `out -= D^-_axis f`.
fn sub_backward_diff(grid: &TorusGrid, axis: usize, f: &[f64], out: &mut [f64]) {
    let (outer, n, inner) = grid.axis_layout(axis);
    for o in 0..outer {
        let base = o * n * inner;
        for c in 0..n {
            let row = base + c * inner;
            let prev = base + ((c + n - 1) % n) * inner;
            for t in 0..inner {
                out[row + t] += f[prev + t] - f[row + t];
            }
        }
    }
}

pub fn discrete_gradient(u: &ScalarField) -> VectorField {
    let grid = *u.grid();
    let comps = (0..grid.dim())
        .map(|i| {
            let mut out = vec![0.0; grid.sites()];
            forward_diff_into(&grid, i, u.values(), &mut out);
            out
        })
        .collect();
    VectorField::from_raw(grid, comps)
}

pub fn discrete_divergence(f: &VectorField) -> ScalarField {
    let grid = *f.grid();
    let mut out = vec![0.0; grid.sites()];
    let mut tmp = vec![0.0; grid.sites()];
    for i in 0..grid.dim() {
        backward_diff_into(&grid, i, f.component(i), &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t;
        }
    }
    ScalarField::from_raw(grid, out)
}

/// Discrete Laplacian `div grad u`.
pub fn discrete_laplacian(u: &ScalarField) -> ScalarField {
    discrete_divergence(&discrete_gradient(u))
}

/// `D_j q_k - D_k q_j` with forward differences, edge values attributed to
/// their tail site.
pub fn curl_rhs(q: &VectorField, j: usize, k: usize) -> ScalarField {
    let grid = *q.grid();
    assert!(j != k && j < grid.dim() && k < grid.dim(), "curl_rhs needs j != k");
    let mut a = vec![0.0; grid.sites()];
    let mut b = vec![0.0; grid.sites()];
    forward_diff_into(&grid, j, q.component(k), &mut a);
    forward_diff_into(&grid, k, q.component(j), &mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x -= y;
    }
    ScalarField::from_raw(grid, a)
}

/// `(div sigma)_j = sum_k D^-_k sigma_{jk}`.
pub fn skew_divergence(sigma: &SkewField) -> VectorField {
    let grid = *sigma.grid();
    let d = grid.dim();
    let mut comps = vec![vec![0.0; grid.sites()]; d];
    let mut tmp = vec![0.0; grid.sites()];
    for (pos, &(j, k)) in SkewField::pairs(d).iter().enumerate() {
        let s = &sigma.components()[pos];
        // sigma_{jk} enters (div sigma)_j with +D_k and (div sigma)_k with -D_j.
        backward_diff_into(&grid, k, s, &mut tmp);
        for (o, t) in comps[j].iter_mut().zip(&tmp) {
            *o += t;
        }
        backward_diff_into(&grid, j, s, &mut tmp);
        for (o, t) in comps[k].iter_mut().zip(&tmp) {
            *o -= t;
        }
    }
    VectorField::from_raw(grid, comps)
}

/// `out = mass * u - div(a grad u)` for edge conductances `a` (one plane per
/// axis). `scratch` must hold one site-sized buffer.
pub fn apply_elliptic(
    grid: &TorusGrid,
    conductances: &[Vec<f64>],
    mass: f64,
    u: &[f64],
    out: &mut [f64],
    scratch: &mut [f64],
) {
    for (o, v) in out.iter_mut().zip(u) {
        *o = mass * v;
    }
    for (axis, a) in conductances.iter().enumerate() {
        forward_diff_into(grid, axis, u, scratch);
        for (s, c) in scratch.iter_mut().zip(a) {
            *s *= c;
        }
        sub_backward_diff(grid, axis, scratch, out);
    }
}
