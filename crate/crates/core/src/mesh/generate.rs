use crate::error::{Error, Result};
use crate::scalar::Real;

use super::SimplicialMesh;

/// `n` uniformly spaced vertices on `[a, b]`.
pub fn generate_segment<T: Real>(a: T, b: T, n: usize) -> Result<SimplicialMesh<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("segment needs at least 2 vertices, got {n}")));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument("segment requires a < b".into()));
    }
    let last = T::of(n - 1);
    let vertices = (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * T::of(i) / last
            }
        })
        .collect();
    let simplices = (0..n - 1).flat_map(|i| [i, i + 1]).collect();
    SimplicialMesh::new(1, vertices, simplices)
}

/// Structured polar grid on the annulus `r_in <= r <= r_out` with
/// `n_r + 1` rings of `n_t` vertices. Vertex `(i, j)` (ring `i`, angle `j`)
/// has index `i * n_t + j` and sits at angle `theta_offset + 2 pi j / n_t`;
/// each quad is split along its `(i, j) -> (i + 1, j + 1)` diagonal.
pub fn generate_annulus<T: Real>(
    r_in: T,
    r_out: T,
    n_r: usize,
    n_t: usize,
    theta_offset: T,
) -> Result<SimplicialMesh<T>> {
    if !(T::zero() < r_in && r_in < r_out) {
        return Err(Error::InvalidArgument("annulus requires 0 < r_in < r_out".into()));
    }
    if n_r < 1 || n_t < 3 {
        return Err(Error::InvalidArgument(format!(
            "annulus needs n_r >= 1 and n_t >= 3, got {n_r} and {n_t}"
        )));
    }
    let mut vertices = Vec::with_capacity(2 * (n_r + 1) * n_t);
    for i in 0..=n_r {
        let r = r_in + (r_out - r_in) * T::of(i) / T::of(n_r);
        for j in 0..n_t {
            let theta = theta_offset + T::two_pi() * T::of(j) / T::of(n_t);
            vertices.push(r * theta.cos());
            vertices.push(r * theta.sin());
        }
    }
    let idx = |i: usize, j: usize| i * n_t + (j % n_t);
    let mut simplices = Vec::with_capacity(6 * n_r * n_t);
    for i in 0..n_r {
        for j in 0..n_t {
            simplices.extend([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            simplices.extend([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SimplicialMesh::new(2, vertices, simplices)
}

/// Disk of the given radius: a center vertex and `n_rings` concentric rings,
/// ring `i` carrying `6 i` equally spaced vertices starting at
/// `theta_offset`. Consecutive rings are stitched by merging their angles.
pub fn generate_disk<T: Real>(radius: T, n_rings: usize, theta_offset: T) -> Result<SimplicialMesh<T>> {
    if radius <= T::zero() || n_rings < 1 {
        return Err(Error::InvalidArgument("disk needs radius > 0 and at least one ring".into()));
    }
    let mut vertices = vec![T::zero(), T::zero()];
    let mut ring_start = vec![0usize];
    let mut ring_len = vec![1usize];
    for i in 1..=n_rings {
        ring_start.push(vertices.len() / 2);
        ring_len.push(6 * i);
        let r = radius * T::of(i) / T::of(n_rings);
        for k in 0..6 * i {
            let theta = theta_offset + T::two_pi() * T::of(k) / T::of(6 * i);
            vertices.push(r * theta.cos());
            vertices.push(r * theta.sin());
        }
    }
    let mut simplices = Vec::new();
    for k in 0..6 {
        simplices.extend([0, ring_start[1] + k, ring_start[1] + (k + 1) % 6]);
    }
    for i in 2..=n_rings {
        let (si, ni) = (ring_start[i - 1], ring_len[i - 1]);
        let (so, no) = (ring_start[i], ring_len[i]);
        // position of vertex k of a ring with m vertices, in units of a full turn
        let frac = |k: usize, m: usize| k as f64 / m as f64;
        let (mut a, mut b) = (0usize, 0usize);
        while a < ni || b < no {
            let next_inner = if a < ni { frac(a + 1, ni) } else { f64::INFINITY };
            let next_outer = if b < no { frac(b + 1, no) } else { f64::INFINITY };
            if next_outer <= next_inner {
                simplices.extend([si + a % ni, so + b % no, so + (b + 1) % no]);
                b += 1;
            } else {
                simplices.extend([si + a % ni, so + b % no, si + (a + 1) % ni]);
                a += 1;
            }
        }
    }
    SimplicialMesh::new(2, vertices, simplices)
}

/// Structured grid on `[x0, x1] x [y0, y1]` with `nx * ny` quads, each
/// split along its lower-left to upper-right diagonal.
pub fn generate_rectangle<T: Real>(
    min: [T; 2],
    max: [T; 2],
    nx: usize,
    ny: usize,
) -> Result<SimplicialMesh<T>> {
    if nx < 1 || ny < 1 || !(min[0] < max[0] && min[1] < max[1]) {
        return Err(Error::InvalidArgument("invalid rectangle".into()));
    }
    let mut vertices = Vec::with_capacity(2 * (nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(min[0] + (max[0] - min[0]) * T::of(i) / T::of(nx));
            vertices.push(min[1] + (max[1] - min[1]) * T::of(j) / T::of(ny));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut simplices = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            simplices.extend([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            simplices.extend([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SimplicialMesh::new(2, vertices, simplices)
}
