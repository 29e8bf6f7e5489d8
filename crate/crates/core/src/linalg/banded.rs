//! Complex banded LU with partial pivoting, in the LAPACK band layout.
//!
//! The factorization widens the upper band from `ku` to `kl + ku` (pivot
//! fill), so storage is allocated at `2kl + ku + 1` rows per column up front
//! and the factor runs in place.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// Col-major `(2kl+ku+1) x n`; entry (i, j) lives at band row `kl+ku+i-j`.
    ab: Vec<C64>,
}

pub struct BandLU {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0 && kl < n && ku < n, "band shape");
        let rows = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ab: vec![C64::new(0.0, 0.0); rows * n] }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j <= i + self.ku && i <= j + self.kl, "entry ({i}, {j}) out of band");
        j * (2 * self.kl + self.ku + 1) + (self.kl + self.ku + i - j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let o = self.offset(i, j);
        self.ab[o] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let o = self.offset(i, j);
        self.ab[o] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j > i + self.ku || i > j + self.kl {
            return C64::new(0.0, 0.0);
        }
        self.ab[self.offset(i, j)]
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.offset(i, j)] * xj;
            }
        }
        y
    }
}

/// LU-factor in place with partial pivoting. Fails only on an exactly zero
/// pivot column; near-singularity is the caller's problem (checked there via
/// residuals, which is the meaningful test for a solve).
pub fn factor(mut m: BandMatrix) -> Result<BandLU> {
    let (n, kl, ku) = (m.n, m.kl, m.ku);
    let rows = 2 * kl + ku + 1;
    let kv = kl + ku;
    let ab = &mut m.ab;
    let mut ipiv = vec![0usize; n];
    for j in 0..n {
        let col = j * rows;
        let km = kl.min(n - 1 - j);
        let mut p = 0usize;
        let mut pmax = ab[col + kv].norm_sqr();
        for i in 1..=km {
            let v = ab[col + kv + i].norm_sqr();
            if v > pmax {
                pmax = v;
                p = i;
            }
        }
        ipiv[j] = j + p;
        if pmax == 0.0 {
            return Err(Error::SingularFactor { col: j });
        }
        let jmax = (j + kv).min(n - 1);
        if p != 0 {
            for jj in j..=jmax {
                let base = jj * rows + kv + j - jj;
                ab.swap(base, base + p);
            }
        }
        // Multipliers below the pivot, then the rank-1 band update, column by
        // column so both sides stream contiguously.
        let piv = ab[col + kv];
        for i in 1..=km {
            ab[col + kv + i] /= piv;
        }
        for jj in (j + 1)..=jmax {
            let cj = jj * rows + kv + j - jj;
            let upper = ab[cj];
            if upper != C64::new(0.0, 0.0) {
                for i in 1..=km {
                    let mult = ab[col + kv + i];
                    ab[cj + i] -= mult * upper;
                }
            }
        }
    }
    Ok(BandLU { n, kl, ku, ab: m.ab, ipiv })
}

impl BandLU {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let rows = 2 * kl + ku + 1;
        let kv = kl + ku;
        let zero = C64::new(0.0, 0.0);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != zero {
                let km = kl.min(n - 1 - j);
                let col = j * rows;
                for i in 1..=km {
                    b[j + i] -= self.ab[col + kv + i] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = j * rows;
            let x = b[j] / self.ab[col + kv];
            b[j] = x;
            if x != zero {
                let imin = j.saturating_sub(kv);
                for i in imin..j {
                    b[i] -= self.ab[col + kv + i - j] * x;
                }
            }
        }
    }
}
