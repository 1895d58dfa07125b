//! Exact nearest-neighbour queries on bucketed sample points.
//!
//! Points are embedded in at most three flat coordinates: Euclidean charts
//! as-is, the flat torus with periodic cells, and the sphere as unit vectors
//! in R^3 (chord length is monotone in geodesic distance). Queries return
//! the index of a nearest point; callers evaluate the model distance on that
//! pair so results agree with a brute-force scan.

use crate::geometry::{AmbientPoint, ModelManifold};

type Coord = [f64; 3];

/// Non-empty bucket with a bounding ball around its points.
#[derive(Debug, Clone)]
struct Bucket {
    center: Coord,
    radius: f64,
    start: usize,
    end: usize,
}

/// Points grouped into about `sqrt(n)` buckets. A query scans the bucket
/// with the smallest lower bound, then every bucket whose bound still beats
/// the best distance, so far queries cost one pass over the buckets rather
/// than over the points.
#[derive(Debug, Clone)]
pub(crate) struct BucketIndex {
    dims: usize,
    periodic: bool,
    buckets: Vec<Bucket>,
    coords: Vec<Coord>,
    ids: Vec<usize>,
    origin: Coord,
    cell: f64,
    per_axis: i64,
    // dense cell -> bucket table for the neighbourhood fast path
    lookup: Vec<u32>,
}

const EMPTY: u32 = u32::MAX;

pub(crate) fn supports(m: &ModelManifold) -> bool {
    match m {
        ModelManifold::Euclidean(n) => (1..=3).contains(n),
        ModelManifold::FlatTorus2 | ModelManifold::Sphere2 { .. } => true,
        ModelManifold::HyperbolicHalfPlane => false,
    }
}

pub(crate) fn embed(m: &ModelManifold, p: &AmbientPoint) -> Coord {
    match m {
        ModelManifold::Sphere2 { .. } => {
            let n = m.sphere_direction(p);
            [n.x, n.y, n.z]
        }
        _ => {
            let mut c = [0.0; 3];
            c[..p.coords.len()].copy_from_slice(&p.coords);
            c
        }
    }
}

/// Embedded radius containing every point within model distance `d`.
pub(crate) fn embedded_radius(m: &ModelManifold, d: f64) -> f64 {
    match m {
        ModelManifold::Sphere2 { radius } => {
            let angle = d / radius;
            if angle >= std::f64::consts::PI {
                f64::INFINITY
            } else {
                2.0 * (angle / 2.0).sin()
            }
        }
        _ => d,
    }
}

impl BucketIndex {
    pub(crate) fn build(m: &ModelManifold, points: &[AmbientPoint]) -> Self {
        assert!(supports(m) && !points.is_empty());
        let (dims, periodic, intrinsic) = match m {
            ModelManifold::Euclidean(n) => (*n, false, *n),
            ModelManifold::FlatTorus2 => (2, true, 2),
            _ => (3, false, 2),
        };
        let embedded: Vec<Coord> = points.iter().map(|p| embed(m, p)).collect();
        // about sqrt(n) occupied cells on a set of the given intrinsic dimension
        let target = (points.len() as f64).sqrt() * 4.0;
        let per_axis = (target.powf(1.0 / intrinsic as f64).ceil() as i64).max(1);

        let (origin, cell) = if periodic {
            ([0.0; 3], 1.0 / per_axis as f64)
        } else {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for c in &embedded {
                for i in 0..dims {
                    lo[i] = lo[i].min(c[i]);
                    hi[i] = hi[i].max(c[i]);
                }
            }
            let extent = (0..dims).map(|i| hi[i] - lo[i]).fold(0.0, f64::max);
            let cell = if extent > 0.0 { extent / per_axis as f64 } else { 1.0 };
            let mut origin = [0.0; 3];
            origin[..dims].copy_from_slice(&lo[..dims]);
            (origin, cell)
        };

        let key = |c: &Coord| -> [i64; 3] {
            let mut k = [0i64; 3];
            for i in 0..dims {
                k[i] = ((c[i] - origin[i]) / cell).floor() as i64;
                if periodic {
                    k[i] = k[i].rem_euclid(per_axis);
                }
            }
            k
        };
        let mut order: Vec<usize> = (0..embedded.len()).collect();
        let keys: Vec<[i64; 3]> = embedded.iter().map(key).collect();
        order.sort_by_key(|&i| (keys[i], i));

        let mut index = Self {
            dims,
            periodic,
            buckets: Vec::new(),
            coords: order.iter().map(|&i| embedded[i]).collect(),
            ids: order.clone(),
            origin,
            cell,
            per_axis,
            lookup: vec![EMPTY; (per_axis as usize + 1).pow(dims as u32)],
        };
        let mut start = 0;
        while start < order.len() {
            let k = keys[order[start]];
            let mut end = start;
            while end < order.len() && keys[order[end]] == k {
                end += 1;
            }
            let mut center = [0.0; 3];
            for i in 0..dims {
                center[i] = origin[i] + (k[i] as f64 + 0.5) * cell;
            }
            let radius = index.coords[start..end]
                .iter()
                .map(|c| index.dist_sq(&center, c).sqrt())
                .fold(0.0, f64::max);
            let slot = index.slot(k).expect("bucket key inside grid");
            index.lookup[slot] = index.buckets.len() as u32;
            index.buckets.push(Bucket {
                center,
                radius,
                start,
                end,
            });
            start = end;
        }
        index
    }

    // Keys run over 0..=per_axis so the maximum corner of the box has a cell.
    fn slot(&self, k: [i64; 3]) -> Option<usize> {
        let side = self.per_axis + 1;
        let mut slot = 0i64;
        for i in (0..self.dims).rev() {
            let mut c = k[i];
            if self.periodic {
                c = c.rem_euclid(self.per_axis);
            } else if !(0..side).contains(&c) {
                return None;
            }
            slot = slot * side + c;
        }
        Some(slot as usize)
    }

    /// Scans the 3^d block of cells around the query. Every point outside
    /// the block is at least one cell width away, so a closer hit is final.
    fn nearest_local(&self, q: &Coord) -> Option<usize> {
        if self.periodic && self.per_axis < 3 {
            return None;
        }
        let mut k = [0i64; 3];
        for i in 0..self.dims {
            k[i] = ((q[i] - self.origin[i]) / self.cell).floor() as i64;
        }
        self.slot(k)?;
        let mut best = (usize::MAX, f64::INFINITY);
        let span = |i: usize| if i < self.dims { -1..=1 } else { 0..=0 };
        for dz in span(2) {
            for dy in span(1) {
                for dx in span(0) {
                    if let Some(slot) = self.slot([k[0] + dx, k[1] + dy, k[2] + dz]) {
                        let b = self.lookup[slot];
                        if b != EMPTY {
                            self.scan(&self.buckets[b as usize], q, &mut best);
                        }
                    }
                }
            }
        }
        (best.1 < self.cell * self.cell).then_some(best.0)
    }

    /// Whether some stored point lies within embedded distance `r` of the
    /// query. Rings of cells are visited outwards so close hits end early.
    pub(crate) fn any_within(&self, q: &Coord, r: f64) -> bool {
        if !(r > 0.0) {
            return false;
        }
        let r2 = r * r;
        let mut k = [0i64; 3];
        for i in 0..self.dims {
            k[i] = ((q[i] - self.origin[i]) / self.cell).floor() as i64;
        }
        let mut reach = (r / self.cell).ceil().min(2.0 * self.per_axis as f64) as i64;
        if self.periodic {
            reach = reach.min(self.per_axis / 2 + 1);
        }
        let within = |b: &Bucket| self.coords[b.start..b.end].iter().any(|p| self.dist_sq(q, p) <= r2);
        let block = (2 * reach + 1).pow(self.dims as u32) as usize;
        if block > self.buckets.len() {
            return self.buckets.iter().any(|b| self.lower_bound(b, q) <= r && within(b));
        }
        let hit = |c: [i64; 3]| -> bool {
            let Some(slot) = self.slot(c) else { return false };
            let b = self.lookup[slot];
            if b == EMPTY {
                return false;
            }
            within(&self.buckets[b as usize])
        };
        for ring in 0..=reach {
            let span = |i: usize| if i < self.dims { (k[i] - ring)..=(k[i] + ring) } else { 0..=0 };
            for z in span(2) {
                for y in span(1) {
                    let shell = (self.dims > 2 && (z - k[2]).abs() == ring)
                        || (self.dims > 1 && (y - k[1]).abs() == ring);
                    if shell || ring == 0 {
                        if span(0).any(|x| hit([x, y, z])) {
                            return true;
                        }
                    } else if hit([k[0] - ring, y, z]) || hit([k[0] + ring, y, z]) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn dist_sq(&self, a: &Coord, b: &Coord) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dims {
            let mut d = (a[i] - b[i]).abs();
            if self.periodic {
                d = d.min(1.0 - d);
            }
            s += d * d;
        }
        s
    }

    fn lower_bound(&self, b: &Bucket, q: &Coord) -> f64 {
        (self.dist_sq(q, &b.center).sqrt() - b.radius).max(0.0)
    }

    fn scan(&self, b: &Bucket, q: &Coord, best: &mut (usize, f64)) {
        for k in b.start..b.end {
            let d = self.dist_sq(q, &self.coords[k]);
            if d < best.1 || (d == best.1 && self.ids[k] < best.0) {
                *best = (self.ids[k], d);
            }
        }
    }

    /// Index of a nearest stored point to the embedded query; the lowest
    /// index among exact ties.
    pub(crate) fn nearest(&self, q: &Coord) -> usize {
        if let Some(i) = self.nearest_local(q) {
            return i;
        }
        let first = self
            .buckets
            .iter()
            .enumerate()
            .map(|(i, b)| (self.lower_bound(b, q), i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
            .1;
        let mut best = (usize::MAX, f64::INFINITY);
        self.scan(&self.buckets[first], q, &mut best);
        for (i, b) in self.buckets.iter().enumerate() {
            if i == first {
                continue;
            }
            let lb = self.lower_bound(b, q);
            // `<=` keeps buckets that may hold an exact tie with a lower id
            if lb * lb <= best.1 * (1.0 + 1e-12) {
                self.scan(b, q, &mut best);
            }
        }
        best.0
    }
}
