//! Slow reference implementations that share no code path with the library
//! algorithms they check.

use cortopo_core::matching::Point;
use cortopo_core::{BinaryMask, LikelihoodMap, Spacing};

/// Cells of the cubical complex of an `h x w` grid of unit squares.
struct CubicalComplex {
    dims: Vec<u8>,
    values: Vec<f64>,
    boundaries: Vec<Vec<usize>>,
}

fn build_complex(map: &LikelihoodMap) -> CubicalComplex {
    let (h, w) = map.shape();
    let vertex = |r: usize, c: usize| r * (w + 1) + c;
    let n_vertices = (h + 1) * (w + 1);
    let h_edge = |r: usize, c: usize| n_vertices + r * w + c; // (r, c) -> (r, c + 1)
    let n_h_edges = (h + 1) * w;
    let v_edge = |r: usize, c: usize| n_vertices + n_h_edges + r * (w + 1) + c; // (r, c) -> (r + 1, c)
    let n_v_edges = h * (w + 1);
    let square = |r: usize, c: usize| n_vertices + n_h_edges + n_v_edges + r * w + c;
    let total = n_vertices + n_h_edges + n_v_edges + h * w;

    let mut dims = vec![0u8; total];
    let mut values = vec![f64::NEG_INFINITY; total];
    let mut boundaries = vec![Vec::new(); total];
    for r in 0..h {
        for c in 0..w {
            let s = square(r, c);
            let value = map.get(r, c);
            dims[s] = 2;
            values[s] = value;
            let edges = [
                h_edge(r, c),
                h_edge(r + 1, c),
                v_edge(r, c),
                v_edge(r, c + 1),
            ];
            boundaries[s] = edges.to_vec();
            let corners = [
                vertex(r, c),
                vertex(r, c + 1),
                vertex(r + 1, c),
                vertex(r + 1, c + 1),
            ];
            for cell in edges.into_iter().chain(corners) {
                values[cell] = values[cell].max(value);
            }
        }
    }
    for r in 0..=h {
        for c in 0..w {
            let e = h_edge(r, c);
            dims[e] = 1;
            boundaries[e] = vec![vertex(r, c), vertex(r, c + 1)];
        }
    }
    for r in 0..h {
        for c in 0..=w {
            let e = v_edge(r, c);
            dims[e] = 1;
            boundaries[e] = vec![vertex(r, c), vertex(r + 1, c)];
        }
    }
    CubicalComplex {
        dims,
        values,
        boundaries,
    }
}

/// Superlevel persistence by Z/2 boundary-matrix column reduction. Returns
/// the sorted multiset of positive-persistence `(dim, birth, death)` with
/// essential classes at death 0.
pub fn boundary_matrix_persistence(map: &LikelihoodMap) -> Vec<(u8, f64, f64)> {
    let complex = build_complex(map);
    let n = complex.dims.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        complex.values[b]
            .total_cmp(&complex.values[a])
            .then(complex.dims[a].cmp(&complex.dims[b]))
            .then(a.cmp(&b))
    });
    let mut position = vec![0usize; n];
    for (pos, &cell) in order.iter().enumerate() {
        position[cell] = pos;
    }
    let mut columns: Vec<Vec<usize>> = order
        .iter()
        .map(|&cell| {
            let mut col: Vec<usize> = complex.boundaries[cell]
                .iter()
                .map(|&f| position[f])
                .collect();
            col.sort_unstable();
            col
        })
        .collect();

    let mut owner_of_pivot: Vec<Option<usize>> = vec![None; n];
    let mut paired = vec![false; n];
    let mut out = Vec::new();
    for j in 0..n {
        while let Some(&pivot) = columns[j].last() {
            let Some(k) = owner_of_pivot[pivot] else {
                break;
            };
            let other = columns[k].clone();
            let mut merged = Vec::with_capacity(columns[j].len() + other.len());
            let (mut a, mut b) = (0, 0);
            let col = &columns[j];
            while a < col.len() || b < other.len() {
                match (col.get(a), other.get(b)) {
                    (Some(&x), Some(&y)) if x == y => {
                        a += 1;
                        b += 1;
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        merged.push(x);
                        a += 1;
                    }
                    (Some(_), Some(&y)) => {
                        merged.push(y);
                        b += 1;
                    }
                    (Some(&x), None) => {
                        merged.push(x);
                        a += 1;
                    }
                    (None, Some(&y)) => {
                        merged.push(y);
                        b += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            columns[j] = merged;
        }
        if let Some(&pivot) = columns[j].last() {
            owner_of_pivot[pivot] = Some(j);
            paired[pivot] = true;
            paired[j] = true;
            let birth = complex.values[order[pivot]];
            let death = complex.values[order[j]];
            if birth > death {
                out.push((complex.dims[order[pivot]], birth, death));
            }
        }
    }
    for j in 0..n {
        if !paired[j] && columns[j].is_empty() {
            let birth = complex.values[order[j]];
            if birth > 0.0 {
                out.push((complex.dims[order[j]], birth, 0.0));
            }
        }
    }
    out.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    out
}

/// Exhaustive minimum over every partial matching, unmatched points paying
/// their distance to the diagonal.
pub fn exhaustive_matching_cost(pred: &[Point], gt: &[Point]) -> f64 {
    fn diagonal(p: Point) -> f64 {
        (p.0 - p.1) * (p.0 - p.1) / 2.0
    }
    fn go(pred: &[Point], gt: &[Point], i: usize, used: &mut [bool]) -> f64 {
        if i == pred.len() {
            return gt
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(&g, _)| diagonal(g))
                .sum();
        }
        let mut best = diagonal(pred[i]) + go(pred, gt, i + 1, used);
        for j in 0..gt.len() {
            if !used[j] {
                used[j] = true;
                let d = (pred[i].0 - gt[j].0).powi(2) + (pred[i].1 - gt[j].1).powi(2);
                best = best.min(d + go(pred, gt, i + 1, used));
                used[j] = false;
            }
        }
        best
    }
    go(pred, gt, 0, &mut vec![false; gt.len()])
}

/// Stack-based flood fill: `(8-connected foreground components, bounded
/// 4-connected background components)`.
pub fn flood_fill_betti(mask: &BinaryMask) -> (usize, usize) {
    let (h, w) = mask.shape();
    let mut label = vec![false; h * w];
    let mut components = 0;
    let mut holes = 0;
    for start in 0..h * w {
        if label[start] {
            continue;
        }
        let foreground = mask.values()[start];
        let offsets: &[(isize, isize)] = if foreground {
            &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ]
        } else {
            &[(-1, 0), (1, 0), (0, -1), (0, 1)]
        };
        let mut touches_border = false;
        let mut stack = vec![start];
        label[start] = true;
        while let Some(p) = stack.pop() {
            let (r, c) = ((p / w) as isize, (p % w) as isize);
            for &(dr, dc) in offsets {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    touches_border = true;
                    continue;
                }
                let q = nr as usize * w + nc as usize;
                if !label[q] && mask.values()[q] == foreground {
                    label[q] = true;
                    stack.push(q);
                }
            }
        }
        if foreground {
            components += 1;
        } else if !touches_border {
            holes += 1;
        }
    }
    (components, holes)
}

/// `V - E + F` of the union of the closed foreground squares.
pub fn euler_characteristic(mask: &BinaryMask) -> i64 {
    use std::collections::HashSet;
    let mut vertices = HashSet::new();
    let mut edges = HashSet::new();
    let mut faces = 0i64;
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if !mask.get(r, c) {
                continue;
            }
            faces += 1;
            for v in [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)] {
                vertices.insert(v);
            }
            for e in [(r, c, 'h'), (r + 1, c, 'h'), (r, c, 'v'), (r, c + 1, 'v')] {
                edges.insert(e);
            }
        }
    }
    vertices.len() as i64 - edges.len() as i64 + faces
}

/// All-pairs boundary distances: `(ASD, HD95)` with the same pooled
/// definition, computed without a distance transform.
pub fn brute_force_surface_distances(
    a: &BinaryMask,
    b: &BinaryMask,
    spacing: Spacing,
) -> (f64, f64) {
    let edge = |m: &BinaryMask| -> Vec<(usize, usize)> {
        let (h, w) = m.shape();
        let fg = |r: isize, c: isize| {
            r >= 0 && c >= 0 && r < h as isize && c < w as isize && m.get(r as usize, c as usize)
        };
        let mut out = Vec::new();
        for r in 0..h as isize {
            for c in 0..w as isize {
                if fg(r, c)
                    && [(-1, 0), (1, 0), (0, -1), (0, 1)]
                        .iter()
                        .any(|&(dr, dc)| !fg(r + dr, c + dc))
                {
                    out.push((r as usize, c as usize));
                }
            }
        }
        out
    };
    let (ea, eb) = (edge(a), edge(b));
    let nearest = |p: (usize, usize), set: &[(usize, usize)]| {
        set.iter()
            .map(|&q| {
                let dy = (p.0 as f64 - q.0 as f64) * spacing.dy;
                let dx = (p.1 as f64 - q.1 as f64) * spacing.dx;
                (dy * dy + dx * dx).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut pooled: Vec<f64> = ea.iter().map(|&p| nearest(p, &eb)).collect();
    pooled.extend(eb.iter().map(|&q| nearest(q, &ea)));
    pooled.sort_by(f64::total_cmp);
    let asd = pooled.iter().sum::<f64>() / pooled.len() as f64;
    let pos = 0.95 * (pooled.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    let hd95 = pooled[lo] + (pooled[hi] - pooled[lo]) * (pos - lo as f64);
    (asd, hd95)
}

/// Central finite difference of `f` with respect to each pixel of `map`.
pub fn finite_difference_gradient(
    map: &LikelihoodMap,
    step: f64,
    mut f: impl FnMut(&LikelihoodMap) -> f64,
) -> Vec<f64> {
    let (h, w) = map.shape();
    let base = map.values().to_vec();
    (0..base.len())
        .map(|i| {
            let mut plus = base.clone();
            plus[i] += step;
            let mut minus = base.clone();
            minus[i] -= step;
            let fp = f(&LikelihoodMap::new(h, w, plus).expect("step stays in range"));
            let fm = f(&LikelihoodMap::new(h, w, minus).expect("step stays in range"));
            (fp - fm) / (2.0 * step)
        })
        .collect()
}
