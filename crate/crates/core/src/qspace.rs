//! Unordered Q-points in R^n: the matching metric and the coordinate-sorting
//! embedding into R^{nQ}.

use std::cmp::Ordering;

use itertools::Itertools;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest multiplicity the factorial matching oracle will accept.
pub const BRUTE_FORCE_MAX_Q: usize = 8;

/// An unordered Q-tuple of points of R^n.
///
/// Points are kept in a canonical (lexicographic) order so that every
/// operation, including floating-point summation order, is independent of
/// the order in which the caller supplied them.
#[derive(Debug, Clone, PartialEq)]
pub struct QPoint<T> {
    q: usize,
    n: usize,
    coords: Vec<T>,
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    Ordering::Equal
}

impl<T: Scalar> QPoint<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let q = points.len();
        if q == 0 {
            return Err(Error::Parameter("a Q-point needs at least one point".into()));
        }
        let n = points[0].len();
        if n == 0 {
            return Err(Error::Parameter("ambient dimension must be >= 1".into()));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        let mut points = points;
        points.sort_by(|a, b| lex_cmp(a, b));
        let coords = points.into_iter().flatten().collect();
        Ok(Self { q, n, coords })
    }

    /// `Q[[p]]`: the point `p` taken with multiplicity `q`.
    pub fn multiple(q: usize, p: &[T]) -> Result<Self> {
        Self::new(vec![p.to_vec(); q])
    }

    /// Build from `q` points stored back to back.
    pub fn from_flat(q: usize, n: usize, coords: Vec<T>) -> Result<Self> {
        if q == 0 || n == 0 {
            return Err(Error::Parameter("Q and n must both be >= 1".into()));
        }
        if coords.len() != q * n {
            return Err(Error::DimensionMismatch { expected: q * n, found: coords.len() });
        }
        Self::new(coords.chunks(n).map(<[T]>::to_vec).collect())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Canonically ordered coordinates, point-major.
    pub fn as_flat(&self) -> &[T] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks(self.n)
    }

    /// `sqrt(sum_i |p_i|^2)`, the distance to `Q[[0]]`.
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> T {
        self.coords.iter().fold(T::zero(), |acc, &c| acc + c * c)
    }

    /// Largest distance between two of the Q points (zero iff fully collapsed).
    pub fn spread(&self) -> T {
        let mut best = T::zero();
        for (i, j) in (0..self.q).tuple_combinations() {
            best = best.max(dist_sq(self.point(i), self.point(j)).sqrt());
        }
        best
    }

    /// Smallest distance between two distinct slots, `+inf` when Q = 1.
    pub fn separation(&self) -> T {
        let mut best = T::infinity();
        for (i, j) in (0..self.q).tuple_combinations() {
            best = best.min(dist_sq(self.point(i), self.point(j)).sqrt());
        }
        best
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.q != other.q {
            return Err(Error::MultiplicityMismatch { expected: self.q, found: other.q });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    fn cost_matrix(&self, other: &Self) -> Vec<Vec<T>> {
        (0..self.q)
            .map(|i| (0..other.q).map(|j| dist_sq(self.point(i), other.point(j))).collect())
            .collect()
    }
}

fn dist_sq<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Sum of the matched costs, added in ascending order so the result depends
/// only on the multiset of matched pairs (this makes the metric exactly
/// symmetric).
fn matched_cost<T: Scalar>(cost: &[Vec<T>], perm: &[usize]) -> T {
    let mut terms: Vec<T> = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    terms.into_iter().fold(T::zero(), |acc, c| acc + c)
}

/// The matching distance `min_sigma sqrt(sum_i |p_i - q_sigma(i)|^2)`.
pub fn g_metric<T: Scalar>(s: &QPoint<T>, t: &QPoint<T>) -> Result<T> {
    s.check_compatible(t)?;
    let cost = s.cost_matrix(t);
    let perm = solve_assignment(&cost);
    Ok(matched_cost(&cost, &perm).sqrt())
}

/// Factorial-time reference for [`g_metric`]; same summation order, so the two
/// agree bit for bit whenever they select the same matching.
pub fn g_metric_bruteforce<T: Scalar>(s: &QPoint<T>, t: &QPoint<T>) -> Result<T> {
    s.check_compatible(t)?;
    if s.q > BRUTE_FORCE_MAX_Q {
        return Err(Error::BruteForceLimit { q: s.q, limit: BRUTE_FORCE_MAX_Q });
    }
    let cost = s.cost_matrix(t);
    let best = (0..s.q)
        .permutations(s.q)
        .map(|perm| matched_cost(&cost, &perm))
        .fold(T::infinity(), T::min);
    Ok(best.sqrt())
}

/// Minimum-cost perfect matching on a square cost matrix by shortest
/// augmenting paths with dual potentials, O(Q^3). Returns `perm` with row
/// `i` assigned to column `perm[i]`.
pub fn solve_assignment<T: Scalar>(cost: &[Vec<T>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    let inf = T::infinity();
    // 1-based rows/columns; index 0 is the virtual source column.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}

/// Coordinate-sorting embedding into R^{nQ}.
///
/// Layout is coordinate-major: the Q values of coordinate 1 ascending, then
/// the Q values of coordinate 2 ascending, and so on.
pub fn xi0<T: Scalar>(s: &QPoint<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(s.q * s.n);
    let mut block = Vec::with_capacity(s.q);
    for j in 0..s.n {
        block.clear();
        block.extend(s.points().map(|p| p[j]));
        block.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        out.extend_from_slice(&block);
    }
    out
}

impl<T: Scalar + Serialize> Serialize for QPoint<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pts: Vec<&[T]> = self.points().collect();
        pts.serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for QPoint<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pts = Vec::<Vec<T>>::deserialize(deserializer)?;
        QPoint::new(pts).map_err(D::Error::custom)
    }
}
