//! Short-vector enumeration over a positive definite Gram matrix.
//!
//! The search tree is pruned with a floating-point LDLᵀ factor of a
//! pairwise-reduced Gram matrix, widened by a small slack. Every leaf is
//! re-checked with exact integer arithmetic, so the float factor only
//! decides how much of the tree is visited, never which vectors are kept.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{LatticeError, Result};
use crate::linalg::{int_rat, to_f64, Rational, RationalMatrix};

/// Upper bound on visited leaves before giving up.
const LEAF_BUDGET: u64 = 20_000_000;

/// A coordinate vector together with its exact norm.
pub type Hit = (Vec<i64>, Rational);

struct Prepared {
    n: usize,
    /// Pairwise-reduced integer Gram (scaled by `den`).
    gram: Vec<Vec<i128>>,
    den: BigInt,
    /// Rows express the reduced basis in original coordinates.
    transform: Vec<Vec<i64>>,
    /// Fincke-Pohst coefficients: q[i][i] diagonal, q[i][j] (j > i) multipliers.
    q: Vec<Vec<f64>>,
}

fn checked_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| LatticeError::Resource("Gram entries too large for enumeration".into()))
}

/// Pairwise size reduction: repeatedly replaces `bᵢ` by `bᵢ − q·bⱼ` while
/// `|2(bᵢ,bⱼ)| > (bⱼ,bⱼ)`. Returns the reduced Gram and the transform whose
/// rows are the reduced basis in original coordinates.
pub fn reduce(gram: &RationalMatrix) -> (RationalMatrix, Vec<Vec<i64>>) {
    let n = gram.rows();
    let mut g = gram.clone();
    let mut t: Vec<Vec<i64>> =
        (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let two = int_rat(&BigInt::from(2));
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let gij = g[(i, j)].clone();
                let gjj = g[(j, j)].clone();
                if (&gij * &two).abs() <= gjj {
                    continue;
                }
                let q = (&gij / &gjj).round();
                let Some(qi) = q.to_integer().to_i64() else { continue };
                // b_i <- b_i - q b_j
                let mut e = RationalMatrix::identity(n);
                e.set(i, j, -q.clone());
                g = &(&e * &g) * &e.transpose();
                for k in 0..n {
                    t[i][k] -= qi * t[j][k];
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (g, t)
}

fn prepare(gram: &RationalMatrix) -> Result<Prepared> {
    let n = gram.rows();
    let (g, transform) = reduce(gram);
    let den = g.common_denominator();
    let mut gi = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            gi[i][j] = checked_i128(&(&g[(i, j)] * int_rat(&den)).to_integer())?;
        }
    }
    let mut q: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| to_f64(&g[(i, j)])).collect()).collect();
    for i in 0..n {
        if q[i][i] <= 0.0 {
            return Err(LatticeError::NotPositiveDefinite("enumeration pivot is not positive".into()));
        }
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    Ok(Prepared { n, gram: gi, den, transform, q })
}

impl Prepared {
    fn exact_norm(&self, y: &[i64]) -> i128 {
        let mut s = 0i128;
        for i in 0..self.n {
            if y[i] == 0 {
                continue;
            }
            let mut row = 0i128;
            for j in 0..self.n {
                row += self.gram[i][j] * y[j] as i128;
            }
            s += row * y[i] as i128;
        }
        s
    }

    fn original(&self, y: &[i64]) -> Vec<i64> {
        let mut x = vec![0i64; self.n];
        for (k, &c) in y.iter().enumerate() {
            if c != 0 {
                for (xj, tj) in x.iter_mut().zip(&self.transform[k]) {
                    *xj += c * tj;
                }
            }
        }
        x
    }

    fn to_rational(&self, scaled: i128) -> Rational {
        Rational::new(BigInt::from(scaled), self.den.clone())
    }

    fn slack(bound: f64) -> f64 {
        1e-7 * (1.0 + bound.abs())
    }

    /// Depth-first search over coordinates `i, i-1, ..., 0`.
    fn search(
        &self,
        i: usize,
        y: &mut [i64],
        partial: f64,
        bound: &mut f64,
        leaves: &mut u64,
        leaf: &mut dyn FnMut(&[i64], &mut f64),
    ) -> Result<()> {
        let eps = Self::slack(*bound);
        let mut c = 0.0;
        for j in i + 1..self.n {
            c -= self.q[i][j] * y[j] as f64;
        }
        let rem = *bound - partial + eps;
        if rem < 0.0 {
            return Ok(());
        }
        let r = (rem / self.q[i][i]).sqrt();
        let lo = (c - r).ceil() as i64;
        let hi = (c + r).floor() as i64;
        for v in lo..=hi {
            let d = v as f64 - c;
            let t = partial + self.q[i][i] * d * d;
            if t > *bound + Self::slack(*bound) {
                continue;
            }
            y[i] = v;
            if i == 0 {
                *leaves += 1;
                if *leaves > LEAF_BUDGET {
                    return Err(LatticeError::Resource("enumeration leaf budget exceeded".into()));
                }
                leaf(y, bound);
            } else {
                self.search(i - 1, y, t, bound, leaves, leaf)?;
            }
        }
        y[i] = 0;
        Ok(())
    }
}

fn scaled_floor(bound: &Rational, den: &BigInt) -> Result<i128> {
    checked_i128(&(bound * int_rat(den)).floor().to_integer())
}

/// All nonzero integer vectors `x` with `x·G·xᵀ ≤ bound`, in basis
/// coordinates of `G`, sorted by norm then lexicographically.
pub fn short_vectors(gram: &RationalMatrix, bound: &Rational) -> Result<Vec<Hit>> {
    let n = gram.rows();
    if n == 0 || !bound.is_positive() {
        return Ok(Vec::new());
    }
    let p = prepare(gram)?;
    let limit = scaled_floor(bound, &p.den)?;
    let fb = to_f64(bound);
    let top = n - 1;
    let r = ((fb + Prepared::slack(fb)) / p.q[top][top]).sqrt();
    let outer: Vec<i64> = ((-r).ceil() as i64..=r.floor() as i64).collect();
    let chunks: Vec<Result<Vec<Hit>>> = outer
        .par_iter()
        .map(|&v| {
            let mut y = vec![0i64; n];
            y[top] = v;
            let partial = p.q[top][top] * (v as f64) * (v as f64);
            let mut out = Vec::new();
            let mut leaves = 0u64;
            let mut fbound = fb;
            let mut record = |y: &[i64], _: &mut f64| {
                if y.iter().all(|&c| c == 0) {
                    return;
                }
                let s = p.exact_norm(y);
                if s <= limit {
                    out.push((p.original(y), p.to_rational(s)));
                }
            };
            if top == 0 {
                record(&y, &mut fbound);
            } else {
                p.search(top - 1, &mut y, partial, &mut fbound, &mut leaves, &mut record)?;
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for c in chunks {
        all.extend(c?);
    }
    all.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(all)
}

/// Minimum norm and every vector achieving it. The radius starts at the
/// smallest diagonal entry of the reduced Gram and shrinks on improvement.
pub fn minimal_vectors(gram: &RationalMatrix) -> Result<(Rational, Vec<Vec<i64>>)> {
    let n = gram.rows();
    if n == 0 {
        return Ok((Rational::zero(), Vec::new()));
    }
    let p = prepare(gram)?;
    let start = (0..n).map(|i| p.gram[i][i]).min().expect("rank is positive");
    let mut best = start;
    let mut found: Vec<Vec<i64>> = Vec::new();
    let mut fbound = to_f64(&p.to_rational(start));
    let mut y = vec![0i64; n];
    let mut leaves = 0u64;
    let mut record = |y: &[i64], fb: &mut f64| {
        if y.iter().all(|&c| c == 0) {
            return;
        }
        let s = p.exact_norm(y);
        if s < best {
            best = s;
            found.clear();
            *fb = to_f64(&p.to_rational(s));
        }
        if s == best {
            found.push(p.original(y));
        }
    };
    p.search(n - 1, &mut y, 0.0, &mut fbound, &mut leaves, &mut record)?;
    found.sort();
    Ok((p.to_rational(best), found))
}

/// Exact norm of integer coordinates under a rational Gram matrix.
pub fn norm_of(gram: &RationalMatrix, x: &[i64]) -> Rational {
    let v: Vec<Rational> = x.iter().map(|&c| int_rat(&BigInt::from(c))).collect();
    gram.bilinear(&v, &v)
}

/// Greatest common divisor of the coordinates, used to test primitivity.
pub fn content(x: &[i64]) -> i64 {
    x.iter().fold(0i64, |g, &c| g.gcd(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn an_gram(n: usize) -> RationalMatrix {
        let mut rows = vec![vec![0i64; n]; n];
        for i in 0..n {
            rows[i][i] = 2;
            if i + 1 < n {
                rows[i][i + 1] = -1;
                rows[i + 1][i] = -1;
            }
        }
        RationalMatrix::from_i64(&rows)
    }

    #[test]
    fn cubic_lattice_minimum() {
        let (mu, v) = minimal_vectors(&RationalMatrix::identity(4)).unwrap();
        assert_eq!(mu, rat(1));
        assert_eq!(v.len(), 8);
    }

    #[test]
    fn root_counts_match_brute_force() {
        for n in 1..=5usize {
            let g = an_gram(n);
            let (mu, v) = minimal_vectors(&g).unwrap();
            // brute force over the box [-2,2]^n
            let mut count = 0;
            let total = 5usize.pow(n as u32);
            for code in 0..total {
                let mut x = vec![0i64; n];
                let mut c = code;
                for xi in x.iter_mut() {
                    *xi = (c % 5) as i64 - 2;
                    c /= 5;
                }
                if norm_of(&g, &x) == rat(2) {
                    count += 1;
                }
            }
            assert_eq!(mu, rat(2));
            assert_eq!(v.len(), count);
            assert_eq!(count, n * (n + 1));
        }
    }

    #[test]
    fn short_vectors_include_both_signs() {
        let g = an_gram(2);
        let s = short_vectors(&g, &rat(2)).unwrap();
        assert_eq!(s.len(), 6);
        for (x, nrm) in &s {
            assert_eq!(norm_of(&g, x), *nrm);
            let neg: Vec<i64> = x.iter().map(|c| -c).collect();
            assert!(s.iter().any(|(y, _)| *y == neg));
        }
    }

    #[test]
    fn skewed_basis_is_reduced_first() {
        // Z^2 with basis (1,0),(7,1)
        let g = RationalMatrix::from_i64(&[vec![1, 7], vec![7, 50]]);
        let (mu, v) = minimal_vectors(&g).unwrap();
        assert_eq!(mu, rat(1));
        assert_eq!(v.len(), 4);
    }
}
