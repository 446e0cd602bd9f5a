//! Persistent homology of 2D likelihood maps.
//!
//! Pixels are closed unit squares of a cubical complex and the filtration is
//! by superlevel sets `{p : f(p) >= t}` with `t` falling from 1 to 0. Closed
//! squares that share a corner touch, so foreground is 8-connected while the
//! complement, being open, is 4-connected.
//!
//! Dimension 0 is a union-find sweep over pixels in decreasing value order
//! with the elder rule. Dimension 1 uses Alexander duality: holes of the
//! superlevel set are the bounded components of its complement, which are
//! tracked by a second union-find sweep in increasing value order with a
//! virtual node standing for everything outside the image.
//!
//! Equal values are broken by row-major index so the whole filtration is a
//! total order `(value descending, index ascending)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LikelihoodMap, PixelCoord};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BettiPair {
    pub b0: usize,
    pub b1: usize,
}

impl BettiPair {
    pub const fn new(b0: usize, b1: usize) -> Self {
        Self { b0, b1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
    pub birth_pixel: PixelCoord,
    /// `None` for essential classes, which are recorded with death 0.
    pub death_pixel: Option<PixelCoord>,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.birth - self.death
    }

    pub fn is_essential(&self) -> bool {
        self.death_pixel.is_none()
    }

    /// Whether the class is alive in the superlevel set at threshold `t`.
    pub fn alive_at(&self, t: f64) -> bool {
        if self.is_essential() {
            self.birth >= t
        } else {
            self.death < t && t <= self.birth
        }
    }
}

fn canonical_order(a: &PersistencePair, b: &PersistencePair) -> Ordering {
    a.dim
        .cmp(&b.dim)
        .then_with(|| b.persistence().total_cmp(&a.persistence()))
        .then_with(|| a.birth.total_cmp(&b.birth))
        .then_with(|| a.birth_pixel.cmp(&b.birth_pixel))
        .then_with(|| match (a.death_pixel, b.death_pixel) {
            (Some(x), Some(y)) => x.cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        })
}

/// Positive-persistence pairs in dimensions 0 and 1, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pairs: Vec<PersistencePair>,
    source_height: usize,
    source_width: usize,
}

impl PersistenceDiagram {
    /// Builds a diagram, dropping zero-persistence pairs and sorting the rest.
    pub fn new(mut pairs: Vec<PersistencePair>, source_height: usize, source_width: usize) -> Self {
        pairs.retain(|p| p.birth > p.death);
        pairs.sort_by(canonical_order);
        Self {
            pairs,
            source_height,
            source_width,
        }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn source_shape(&self) -> (usize, usize) {
        (self.source_height, self.source_width)
    }

    pub fn dim(&self, dim: u8) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// `(birth, death)` points of one dimension, in canonical order.
    pub fn points(&self, dim: u8) -> Vec<(f64, f64)> {
        self.dim(dim).map(|p| (p.birth, p.death)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Keeps only the requested dimensions.
    pub fn restrict(&self, dims: &[u8]) -> Self {
        Self {
            pairs: self
                .pairs
                .iter()
                .filter(|p| dims.contains(&p.dim))
                .copied()
                .collect(),
            source_height: self.source_height,
            source_width: self.source_width,
        }
    }

    /// Betti numbers of the superlevel set at `t` read off the barcode.
    pub fn betti_at(&self, t: f64) -> BettiPair {
        let mut out = BettiPair::default();
        for pair in self.pairs.iter().filter(|p| p.alive_at(t)) {
            match pair.dim {
                0 => out.b0 += 1,
                _ => out.b1 += 1,
            }
        }
        out
    }
}

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];
const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

fn neighbors<'a>(
    index: usize,
    height: usize,
    width: usize,
    offsets: &'a [(isize, isize)],
) -> impl Iterator<Item = usize> + 'a {
    let row = (index / width) as isize;
    let col = (index % width) as isize;
    offsets.iter().filter_map(move |&(dr, dc)| {
        let (r, c) = (row + dr, col + dc);
        (r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width)
            .then(|| r as usize * width + c as usize)
    })
}

fn on_border(index: usize, height: usize, width: usize) -> bool {
    let (row, col) = (index / width, index % width);
    row == 0 || col == 0 || row + 1 == height || col + 1 == width
}

/// Betti numbers of a mask: 8-connected foreground components and bounded
/// 4-connected background components.
pub fn betti_numbers(mask: &BinaryMask) -> BettiPair {
    let (height, width) = mask.shape();
    let n = height * width;
    let values = mask.values();
    let outside = n;
    let mut uf = UnionFind::new(n + 1);
    for index in 0..n {
        if values[index] {
            for q in neighbors(index, height, width, &NEIGHBORS_8) {
                if q < index && values[q] {
                    uf.union(index, q);
                }
            }
        } else {
            for q in neighbors(index, height, width, &NEIGHBORS_4) {
                if q < index && !values[q] {
                    uf.union(index, q);
                }
            }
            if on_border(index, height, width) {
                uf.union(index, outside);
            }
        }
    }
    let outside_root = uf.find(outside);
    let mut out = BettiPair::default();
    for (index, &foreground) in values.iter().enumerate() {
        if uf.find(index) == index {
            if foreground {
                out.b0 += 1;
            } else if index != outside_root {
                out.b1 += 1;
            }
        }
    }
    // `outside` may have become the root of its set, in which case the loop
    // above never visits it; either way it is not a hole.
    out
}

/// Element `i` is the Betti pair of `map` binarized at `thresholds[i]`.
pub fn betti_curve(map: &LikelihoodMap, thresholds: &[f64]) -> Result<Vec<BettiPair>> {
    if let Some(&t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidParameter(format!(
            "threshold {t} is outside [0, 1]"
        )));
    }
    Ok(thresholds
        .iter()
        .map(|&t| betti_numbers(&map.binarize(t)))
        .collect())
}

/// Pixel indices in filtration order: value descending, then row-major.
pub(crate) fn filtration_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Superlevel-set persistence in dimensions 0 and 1 with critical pixels.
pub fn compute_persistence(map: &LikelihoodMap) -> PersistenceDiagram {
    let (height, width) = map.shape();
    let values = map.values();
    let n = values.len();
    let order = filtration_order(values);
    let mut rank = vec![0usize; n];
    for (pos, &p) in order.iter().enumerate() {
        rank[p] = pos;
    }
    let coord = |index: usize| PixelCoord::from_index(index, width);

    let mut pairs = Vec::new();

    // Dimension 0: components are born at their highest pixel; when two meet,
    // the one born later in the filtration dies at the meeting pixel.
    let mut uf = UnionFind::new(n);
    let mut present = vec![false; n];
    let mut oldest: Vec<usize> = (0..n).collect();
    for &p in &order {
        present[p] = true;
        for q in neighbors(p, height, width, &NEIGHBORS_8) {
            if !present[q] {
                continue;
            }
            let (rp, rq) = (uf.find(p), uf.find(q));
            if rp == rq {
                continue;
            }
            let (elder, younger) = if rank[oldest[rp]] < rank[oldest[rq]] {
                (oldest[rp], oldest[rq])
            } else {
                (oldest[rq], oldest[rp])
            };
            if values[younger] > values[p] {
                pairs.push(PersistencePair {
                    dim: 0,
                    birth: values[younger],
                    death: values[p],
                    birth_pixel: coord(younger),
                    death_pixel: Some(coord(p)),
                });
            }
            let root = uf.union(rp, rq).expect("roots differ");
            oldest[root] = elder;
        }
    }
    if let Some(&top) = order.first() {
        pairs.push(PersistencePair {
            dim: 0,
            birth: values[top],
            death: 0.0,
            birth_pixel: coord(top),
            death_pixel: None,
        });
    }

    // Dimension 1: sweep the complement from the lowest value upwards. A
    // bounded complement component is a hole that closes (dies) at its
    // lowest pixel; when two complement components meet at pixel `p`, the
    // one born later in this sweep corresponds to a hole that opened at `p`.
    let outside = n;
    let mut uf = UnionFind::new(n + 1);
    let mut present = vec![false; n];
    let mut oldest: Vec<usize> = (0..=n).collect();
    // Sweep position at which a component was born; the outside is older
    // than every pixel.
    let sweep_key = |pixel: usize| -> isize {
        if pixel == outside {
            -1
        } else {
            (n - 1 - rank[pixel]) as isize
        }
    };
    for &p in order.iter().rev() {
        present[p] = true;
        let border = on_border(p, height, width).then_some(outside);
        let adjacent = neighbors(p, height, width, &NEIGHBORS_4)
            .filter(|&q| present[q])
            .chain(border);
        for q in adjacent {
            let (rp, rq) = (uf.find(p), uf.find(q));
            if rp == rq {
                continue;
            }
            let (elder, younger) = if sweep_key(oldest[rp]) < sweep_key(oldest[rq]) {
                (oldest[rp], oldest[rq])
            } else {
                (oldest[rq], oldest[rp])
            };
            if values[p] > values[younger] {
                pairs.push(PersistencePair {
                    dim: 1,
                    birth: values[p],
                    death: values[younger],
                    birth_pixel: coord(p),
                    death_pixel: Some(coord(younger)),
                });
            }
            let root = uf.union(rp, rq).expect("roots differ");
            oldest[root] = elder;
        }
    }

    PersistenceDiagram::new(pairs, height, width)
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros removed.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    const PRECISION: i32 = 9;
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, v);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-4..PRECISION).contains(&exponent) {
        let mantissa = strip_trailing_zeros(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (PRECISION - 1 - exponent).max(0) as usize;
        strip_trailing_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_trailing_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const DIAGRAM_CSV_HEADER: [&str; 7] = [
    "dim",
    "birth",
    "death",
    "birth_row",
    "birth_col",
    "death_row",
    "death_col",
];

/// Serializes the pairs of the selected dimensions as diagram CSV.
pub fn write_diagram_csv(diagram: &PersistenceDiagram, dims: &[u8]) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(DIAGRAM_CSV_HEADER)
        .expect("in-memory csv write");
    for pair in diagram.pairs().iter().filter(|p| dims.contains(&p.dim)) {
        let (death_row, death_col) = pair
            .death_pixel
            .map(|d| (d.row.to_string(), d.col.to_string()))
            .unwrap_or_default();
        writer
            .write_record([
                pair.dim.to_string(),
                format_sig9(pair.birth),
                format_sig9(pair.death),
                pair.birth_pixel.row.to_string(),
                pair.birth_pixel.col.to_string(),
                death_row,
                death_col,
            ])
            .expect("in-memory csv write");
    }
    writer.into_inner().expect("in-memory csv flush")
}

#[derive(Debug, Deserialize)]
struct DiagramRow {
    dim: u8,
    birth: f64,
    death: f64,
    birth_row: usize,
    birth_col: usize,
    death_row: Option<usize>,
    death_col: Option<usize>,
}

/// Parses diagram CSV back into pairs, in file order.
pub fn read_diagram_csv(bytes: &[u8]) -> Result<Vec<PersistencePair>> {
    let mut reader = csv::Reader::from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedDiagram(e.to_string()))?;
    if headers.iter().ne(DIAGRAM_CSV_HEADER) {
        return Err(Error::MalformedDiagram(format!(
            "unexpected header {headers:?}"
        )));
    }
    reader
        .deserialize::<DiagramRow>()
        .map(|row| {
            let row = row.map_err(|e| Error::MalformedDiagram(e.to_string()))?;
            if row.dim > 1 {
                return Err(Error::MalformedDiagram(format!("dimension {}", row.dim)));
            }
            let death_pixel = match (row.death_row, row.death_col) {
                (Some(r), Some(c)) => Some(PixelCoord::new(r, c)),
                (None, None) => None,
                _ => {
                    return Err(Error::MalformedDiagram(
                        "death pixel needs both row and col".into(),
                    ))
                }
            };
            Ok(PersistencePair {
                dim: row.dim,
                birth: row.birth,
                death: row.death,
                birth_pixel: PixelCoord::new(row.birth_row, row.birth_col),
                death_pixel,
            })
        })
        .collect()
}
