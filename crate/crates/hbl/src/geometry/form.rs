//! End(E)-valued (p,q)-forms as collections of grid fields over ordered
//! multi-indices.
//!
//! A (p,q)-form is stored as components f_{I,J} <-> dz^I wedge dzbar^J with I
//! and J strictly ascending index sets (bitmasks over n). Unordered access is
//! resolved through permutation signs at the call sites that need it.

use super::grid::GridField;
use crate::linalg::C64;

/// Ascending index subsets of {0..n-1} of size p, in lexicographic tuple order.
pub fn index_sets(n: usize, p: usize) -> Vec<u32> {
    if p > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(n: usize, p: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<u32>) {
        if current.len() == p {
            let mask = current.iter().fold(0u32, |m, &i| m | (1 << i));
            out.push(mask);
            return;
        }
        for i in start..n {
            current.push(i);
            rec(n, p, i + 1, current, out);
            current.pop();
        }
    }
    rec(n, p, 0, &mut current, &mut out);
    out
}

pub fn binomial(n: usize, p: usize) -> usize {
    if p > n {
        return 0;
    }
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..p {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// Sign of merging two disjoint ascending index sets (A then B) into one
/// ascending set: (-1)^{# pairs (a in A, b in B) with a > b}.
pub fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let bit = bb.trailing_zeros();
        // elements of A strictly greater than `bit`
        inv += (a >> (bit + 1)).count_ones();
        bb &= bb - 1;
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of inserting a single index `idx` in front of the ascending set `s`.
pub fn insert_sign(s: u32, idx: usize) -> f64 {
    let below = (s & ((1u32 << idx) - 1)).count_ones();
    if below % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug)]
pub struct EndForm {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub rank: usize,
    pub points: usize,
    /// components indexed by rank(I) * C(n,q) + rank(J)
    pub comps: Vec<GridField>,
}

impl EndForm {
    pub fn zero(n: usize, p: usize, q: usize, rank: usize, points: usize) -> Self {
        let count = binomial(n, p) * binomial(n, q);
        EndForm {
            n,
            p,
            q,
            rank,
            points,
            comps: (0..count).map(|_| GridField::zeros(points, rank)).collect(),
        }
    }

    /// Wraps a single field as a (0,0)-form.
    pub fn from_field(n: usize, f: GridField) -> Self {
        EndForm {
            n,
            p: 0,
            q: 0,
            rank: f.r,
            points: f.points,
            comps: vec![f],
        }
    }

    pub fn as_field(&self) -> &GridField {
        assert!(self.p == 0 && self.q == 0);
        &self.comps[0]
    }

    pub fn component_count(&self) -> usize {
        binomial(self.n, self.p) * binomial(self.n, self.q)
    }

    pub fn comp(&self, i_rank: usize, j_rank: usize) -> &GridField {
        &self.comps[i_rank * binomial(self.n, self.q) + j_rank]
    }

    pub fn comp_mut(&mut self, i_rank: usize, j_rank: usize) -> &mut GridField {
        let nq = binomial(self.n, self.q);
        &mut self.comps[i_rank * nq + j_rank]
    }

    pub fn scale(&self, c: C64) -> EndForm {
        EndForm {
            comps: self.comps.iter().map(|f| f.scale(c)).collect(),
            ..self.clone_shape()
        }
    }

    pub fn add(&self, other: &EndForm) -> EndForm {
        assert_eq!((self.p, self.q), (other.p, other.q));
        EndForm {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
            ..self.clone_shape()
        }
    }

    pub fn sub(&self, other: &EndForm) -> EndForm {
        assert_eq!((self.p, self.q), (other.p, other.q));
        EndForm {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
            ..self.clone_shape()
        }
    }

    /// Pointwise matrix trace of every component (rank collapses to 1).
    pub fn trace(&self) -> EndForm {
        EndForm {
            rank: 1,
            comps: self.comps.iter().map(|f| f.trace()).collect(),
            ..self.clone_shape()
        }
    }

    /// Max Frobenius norm over all components and points.
    pub fn sup_norm(&self) -> f64 {
        self.comps
            .iter()
            .map(|f| f.sup_frobenius())
            .fold(0.0, f64::max)
    }

    fn clone_shape(&self) -> EndForm {
        EndForm {
            n: self.n,
            p: self.p,
            q: self.q,
            rank: self.rank,
            points: self.points,
            comps: Vec::new(),
        }
    }
}
