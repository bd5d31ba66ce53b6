//! The pair-sum construction: `M = {(x,x)}`, `N = {(x,hx)}` inside `L ⊥ L`,
//! and `K = M + N`.

use num_bigint::BigInt;

use crate::catalog;
use crate::error::{LatticeError, Result};
use crate::isometry::{Isometry, IsometrySpec};
use crate::lattice::Lattice;
use crate::linalg::{rat, solve_left, RationalMatrix};

#[derive(Clone, Debug)]
pub struct PairSumResult {
    pub k: Lattice,
    pub m: Lattice,
    pub n: Lattice,
    pub ambient: Lattice,
    /// Index of `K` in its saturation inside `L ⊥ L`; the ordinary index
    /// `|L⊥L : K|` whenever `K` has full rank.
    pub index_in_ambient: BigInt,
}

impl PairSumResult {
    pub fn is_full_rank(&self) -> bool {
        self.k.rank() == self.ambient.rank()
    }
}

fn concat_rows(left: &RationalMatrix, right: &RationalMatrix) -> RationalMatrix {
    left.hstack(right).expect("row counts agree")
}

pub fn pair_sum(l: &Lattice, h: &Isometry) -> Result<PairSumResult> {
    if h.rank() != l.rank() {
        return Err(LatticeError::Dimension(format!(
            "isometry of rank {} for a rank-{} lattice",
            h.rank(),
            l.rank()
        )));
    }
    let ambient = l.orthogonal_sum(l);
    let b = l.basis();
    let hb = h.matrix() * b;
    let m_rows = concat_rows(b, b);
    let n_rows = concat_rows(b, &hb);
    let form = ambient.form().clone();
    let m = Lattice::with_form(m_rows.clone(), form.clone())?;
    let n = Lattice::with_form(n_rows.clone(), form.clone())?;
    let k = Lattice::span_in_form(&form, &m_rows.vstack(&n_rows)?)?;
    let index_in_ambient = if k.rank() == ambient.rank() {
        ambient.index_of(&k)?
    } else {
        ambient.saturation_of(&k)?.index_of(&k)?
    };
    Ok(PairSumResult { k, m, n, ambient, index_in_ambient })
}

/// Restriction of `h` to a sublattice it stabilizes, in the sublattice's basis.
pub fn restrict(l: &Lattice, h: &Isometry, sub: &Lattice) -> Result<Isometry> {
    let coords = l.embed(sub)?;
    let image = &(&coords * h.matrix()) * l.basis();
    let hs = solve_left(sub.basis(), &image)
        .map_err(|_| LatticeError::NotAnAutomorphism("image leaves the sublattice span".into()))?;
    if !hs.is_integral() {
        return Err(LatticeError::NotAnAutomorphism("isometry does not stabilize the sublattice".into()));
    }
    Isometry::validate(sub, hs)
}

pub fn pair_sum_of_restriction(l: &Lattice, h: &Isometry, sub: &Lattice) -> Result<PairSumResult> {
    pair_sum(sub, &restrict(l, h, sub)?)
}

/// `(Zⁿ, n-cycle)` together with `A_{2n−1}`.
pub fn theorem_ncycle_witness(n: usize) -> Result<(PairSumResult, Lattice)> {
    if !(2..=6).contains(&n) {
        return Err(LatticeError::Precondition(format!("n = {n} outside 2..=6")));
    }
    let z = catalog::cubic(n);
    let cycle: Vec<usize> = (1..=n).collect();
    let h = Isometry::from_spec(&z, &IsometrySpec::Perm { cycles: vec![cycle] })?;
    Ok((pair_sum(&z, &h)?, catalog::root_a(2 * n - 1)))
}

/// Pair-sums of `(Zⁿ, n-cycle)` and of its restriction to `Dₙ`; the second
/// sits inside the first with index 2 for odd `n` and 4 for even `n`.
pub fn theorem_dn_index_witness(n: usize) -> Result<(PairSumResult, PairSumResult)> {
    if !(2..=6).contains(&n) {
        return Err(LatticeError::Precondition(format!("n = {n} outside 2..=6")));
    }
    let z = catalog::cubic(n);
    let cycle: Vec<usize> = (1..=n).collect();
    let h = Isometry::from_spec(&z, &IsometrySpec::Perm { cycles: vec![cycle] })?;
    let d = z.even_sublattice()?;
    Ok((pair_sum(&z, &h)?, pair_sum_of_restriction(&z, &h, &d)?))
}

/// `(Dₙ, negate e₁..e_k)` together with `√2·D_{n+k}`.
pub fn theorem_dn_negation_witness(n: usize, k: usize) -> Result<(PairSumResult, Lattice)> {
    if k == 0 || k >= n || n > 6 {
        return Err(LatticeError::Precondition(format!("need 1 ≤ k < n ≤ 6, got n={n} k={k}")));
    }
    let d = catalog::root_d(n);
    let images: Vec<i64> = (1..=n as i64).map(|i| if i as usize <= k { -i } else { i }).collect();
    let h = Isometry::from_spec(&d, &IsometrySpec::signed(&images))?;
    Ok((pair_sum(&d, &h)?, catalog::root_d(n + k).rescale(&rat(2))?))
}

/// Gram of `K` in the basis `{(vᵢ,vᵢ)} ∪ {(hvᵢ,h²vᵢ)}`.
pub fn cyclotomic_basis_gram(l: &Lattice, h: &Isometry) -> Result<RationalMatrix> {
    if !h.satisfies_cyclotomic3() {
        return Err(LatticeError::Precondition("h² + h + 1 ≠ 0".into()));
    }
    let ambient = l.orthogonal_sum(l);
    let b = l.basis();
    let hb = h.matrix() * b;
    let h2b = h.matrix() * &hb;
    let rows = concat_rows(b, b).vstack(&concat_rows(&hb, &h2b))?;
    Ok(&(&rows * ambient.form()) * &rows.transpose())
}

/// `(L, h)` with `h² + h + 1 = 0`, together with `A₂ ⊗ L`.
pub fn theorem_a2_tensor_witness(l: &Lattice, h: &Isometry) -> Result<(PairSumResult, Lattice)> {
    if !h.satisfies_cyclotomic3() {
        return Err(LatticeError::Precondition("h² + h + 1 ≠ 0".into()));
    }
    Ok((pair_sum(l, h)?, catalog::root_a(2).tensor(l)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::det_exact;

    #[test]
    fn identity_gives_scaled_copy() {
        let l = catalog::root_a(3);
        let r = pair_sum(&l, &Isometry::identity(3)).unwrap();
        assert_eq!(r.k.rank(), 3);
        assert_eq!(r.k.determinant(), l.determinant() * rat(8));
        assert_eq!(r.m.gram(), &l.gram().scale(&rat(2)));
        assert_eq!(r.index_in_ambient, BigInt::from(1));
    }

    #[test]
    fn negation_gives_two_scaled_copies() {
        let l = catalog::root_a(2);
        let r = pair_sum(&l, &Isometry::identity(2).negate()).unwrap();
        assert_eq!(r.k.rank(), 4);
        assert_eq!(r.k.determinant(), rat(9 * 16));
        assert!(r.k.is_even());
    }

    #[test]
    fn rotation_of_z2() {
        let z = catalog::cubic(2);
        let h = Isometry::from_spec(&z, &IsometrySpec::signed(&[2, -1])).unwrap();
        let r = pair_sum(&z, &h).unwrap();
        assert_eq!(r.k.rank(), 4);
        assert_eq!(r.k.determinant(), rat(4));
        assert!(r.k.is_even());
        assert_eq!(r.index_in_ambient, BigInt::from(2));
    }

    #[test]
    fn cyclotomic_gram_is_kronecker() {
        let a2 = catalog::root_a(2);
        let h = Isometry::from_spec(&a2, &IsometrySpec::perm(&[&[1, 2, 3]])).unwrap();
        let g = cyclotomic_basis_gram(&a2, &h).unwrap();
        assert_eq!(g, catalog::root_a(2).gram().kron(a2.gram()));
        assert_eq!(det_exact(&g).unwrap(), rat(81));
        let z1 = catalog::cubic(1);
        assert!(matches!(
            theorem_a2_tensor_witness(&z1, &Isometry::identity(1)),
            Err(LatticeError::Precondition(_))
        ));
    }

    #[test]
    fn restriction_must_stabilize() {
        let z = catalog::cubic(2);
        let h = Isometry::from_spec(&z, &IsometrySpec::signed(&[2, 1])).unwrap();
        let sub = z.sublattice(&RationalMatrix::from_i64(&[vec![1, 0], vec![0, 2]])).unwrap();
        assert!(matches!(
            pair_sum_of_restriction(&z, &h, &sub),
            Err(LatticeError::NotAnAutomorphism(_))
        ));
    }

    #[test]
    fn dn_index() {
        for (n, idx) in [(2usize, 4u32), (3, 2), (4, 4), (5, 2)] {
            let (big, small) = theorem_dn_index_witness(n).unwrap();
            assert_eq!(big.k.index_of(&small.k).unwrap(), BigInt::from(idx), "n = {n}");
        }
    }

    #[test]
    fn negation_witness_rejects_k_ge_n() {
        assert!(matches!(theorem_dn_negation_witness(4, 4), Err(LatticeError::Precondition(_))));
    }
}
