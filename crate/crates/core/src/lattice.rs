//! Embedded lattices and their classical invariants.
//!
//! A lattice is the integer span of the rows of `basis` inside a rational
//! ambient space carrying a symmetric form `form`. Coordinate lattices use
//! the identity form; lattices built from a Gram matrix alone use the
//! diagonal of an LDLᵀ factorization, and rescaling multiplies the form.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enumerate;
use crate::error::{LatticeError, Result};
use crate::linalg::{
    det_exact, hermite_normal_form, int_rat, integer_hnf, integer_left_kernel, invert, rank,
    rat, smith_normal_form, solve_left, Rational, RationalMatrix,
};

/// Largest rank accepted by [`Lattice::minimal_vectors`].
pub const MINIMAL_VECTOR_RANK_LIMIT: usize = 12;

/// Indices up to this size are double-checked by explicit coset counting.
pub const COSET_COUNT_LIMIT: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    basis: RationalMatrix,
    form: RationalMatrix,
    gram: RationalMatrix,
    name: Option<String>,
}

/// The finite abelian group `L*/L` as cyclic factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscriminantGroup {
    /// Cyclic orders, each dividing the next.
    pub orders: Vec<BigInt>,
    /// Generators as ambient vectors, one per factor.
    pub representatives: Vec<Vec<Rational>>,
    /// The same generators in basis coordinates of the lattice.
    pub coordinates: Vec<Vec<Rational>>,
}

impl DiscriminantGroup {
    pub fn order(&self) -> BigInt {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }
}

/// All lattice vectors of one norm, as basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorSet {
    pub norm: Rational,
    pub vectors: Vec<Vec<i64>>,
}

impl VectorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn check_pd(gram: &RationalMatrix) -> Result<Vec<Rational>> {
    let (_, d) = ldl(gram)?;
    Ok(d)
}

/// `G = L·D·Lᵀ` with `L` unit lower triangular. Fails unless every pivot is positive.
fn ldl(g: &RationalMatrix) -> Result<(RationalMatrix, Vec<Rational>)> {
    let n = g.rows();
    let mut l = RationalMatrix::identity(n);
    let mut d: Vec<Rational> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = g[(j, j)].clone();
        for k in 0..j {
            dj -= &l[(j, k)] * &l[(j, k)] * &d[k];
        }
        if !dj.is_positive() {
            return Err(LatticeError::NotPositiveDefinite(format!(
                "leading minor {} is not positive",
                j + 1
            )));
        }
        for i in j + 1..n {
            let mut s = g[(i, j)].clone();
            for k in 0..j {
                s -= &l[(i, k)] * &l[(j, k)] * &d[k];
            }
            l.set(i, j, s / &dj);
        }
        d.push(dj);
    }
    Ok((l, d))
}

impl Lattice {
    /// Lattice spanned by `basis` rows under the standard inner product.
    pub fn new(basis: RationalMatrix) -> Result<Self> {
        let form = RationalMatrix::identity(basis.cols());
        Self::with_form(basis, form)
    }

    /// Lattice spanned by `basis` rows under an explicit ambient form.
    pub fn with_form(basis: RationalMatrix, form: RationalMatrix) -> Result<Self> {
        if form.rows() != basis.cols() || !form.is_square() {
            return Err(LatticeError::Dimension(format!(
                "basis width {} vs form {}x{}",
                basis.cols(),
                form.rows(),
                form.cols()
            )));
        }
        if !form.is_symmetric() {
            return Err(LatticeError::NotPositiveDefinite("ambient form is not symmetric".into()));
        }
        let gram = &(&basis * &form) * &basis.transpose();
        check_pd(&gram)?;
        Ok(Self { basis, form, gram, name: None })
    }

    /// Abstract lattice with Gram `g`, embedded via its LDLᵀ factor.
    pub fn from_gram(g: &RationalMatrix) -> Result<Self> {
        if !g.is_symmetric() {
            return Err(LatticeError::NotPositiveDefinite("Gram matrix is not symmetric".into()));
        }
        let (l, d) = ldl(g)?;
        let form = RationalMatrix::diagonal(&d);
        Ok(Self { basis: l, form, gram: g.clone(), name: None })
    }

    /// Rank-0 lattice in a `dim`-dimensional standard space.
    pub fn zero(dim: usize) -> Self {
        Self::zero_in(RationalMatrix::identity(dim))
    }

    fn zero_in(form: RationalMatrix) -> Self {
        Self {
            basis: RationalMatrix::zeros(0, form.rows()),
            form,
            gram: RationalMatrix::zeros(0, 0),
            name: None,
        }
    }

    /// Lattice generated by arbitrary ambient vectors sharing this lattice's form.
    pub fn span_in_form(form: &RationalMatrix, generators: &RationalMatrix) -> Result<Self> {
        if generators.rows() == 0 {
            return Ok(Self::zero_in(form.clone()));
        }
        let h = hermite_normal_form(generators);
        if h.rows() == 0 {
            return Ok(Self::zero_in(form.clone()));
        }
        Self::with_form(h, form.clone())
    }

    /// Lattice generated by ambient vectors in the same ambient space as `self`.
    pub fn span(&self, generators: &RationalMatrix) -> Result<Self> {
        Self::span_in_form(&self.form, generators)
    }

    /// Sublattice generated by integer combinations of the basis.
    pub fn sublattice(&self, coords: &RationalMatrix) -> Result<Self> {
        self.span(&(coords * &self.basis))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn form(&self) -> &RationalMatrix {
        &self.form
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.gram
    }

    pub fn has_standard_form(&self) -> bool {
        self.form == RationalMatrix::identity(self.form.rows())
    }

    pub fn determinant(&self) -> Rational {
        det_exact(&self.gram).expect("Gram matrices are square")
    }

    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    pub fn is_even(&self) -> bool {
        self.is_integral() && (0..self.rank()).all(|i| self.gram[(i, i)].to_integer().is_even())
    }

    pub fn inner(&self, x: &[Rational], y: &[Rational]) -> Rational {
        self.form.bilinear(x, y)
    }

    pub fn norm(&self, x: &[Rational]) -> Rational {
        self.inner(x, x)
    }

    /// Ambient vector with the given basis coordinates.
    pub fn vector(&self, coords: &[Rational]) -> Vec<Rational> {
        self.basis.left_apply(coords)
    }

    pub fn vector_i64(&self, coords: &[i64]) -> Vec<Rational> {
        let c: Vec<Rational> = coords.iter().map(|&x| rat(x)).collect();
        self.vector(&c)
    }

    /// Rational basis coordinates of an ambient vector in the span.
    pub fn coordinates(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        let b = RationalMatrix::from_rows(vec![v.to_vec()], self.ambient_dim())?;
        let x = solve_left(&self.basis, &b)?;
        Ok(x.row(0).to_vec())
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.coordinates(v).is_ok_and(|c| c.iter().all(|x| x.is_integer()))
    }

    fn require_integral(&self, what: &str) -> Result<()> {
        if self.is_integral() {
            Ok(())
        } else {
            Err(LatticeError::Precondition(format!("{what} needs an integral lattice")))
        }
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.form != other.form {
            return Err(LatticeError::Dimension("lattices live in different ambient spaces".into()));
        }
        Ok(())
    }

    /// Dual lattice, with basis `G⁻¹·B` dual to the basis of `self`.
    pub fn dual(&self) -> Result<Self> {
        if self.rank() == 0 {
            return Ok(self.clone());
        }
        let basis = &invert(&self.gram)? * &self.basis;
        Self::with_form(basis, self.form.clone())
    }

    /// `L*/L` read off the Smith form `P·G·Q = D`: the rows of `D⁻¹·P·B`
    /// with `dᵢ > 1` generate the cyclic factors.
    pub fn discriminant_group(&self) -> Result<DiscriminantGroup> {
        self.require_integral("discriminant group")?;
        let snf = smith_normal_form(&self.gram)?;
        let mut orders = Vec::new();
        let mut coordinates = Vec::new();
        let mut representatives = Vec::new();
        for (i, d) in snf.invariants.iter().enumerate() {
            if d.is_one() {
                continue;
            }
            let inv = Rational::new(BigInt::one(), d.clone());
            let c: Vec<Rational> = snf.left.row(i).iter().map(|x| x * &inv).collect();
            representatives.push(self.vector(&c));
            coordinates.push(c);
            orders.push(d.clone());
        }
        Ok(DiscriminantGroup { orders, representatives, coordinates })
    }

    /// Sublattice of even-norm vectors, of index 1 or 2.
    pub fn even_sublattice(&self) -> Result<Self> {
        self.require_integral("even sublattice")?;
        let n = self.rank();
        let odd: Vec<bool> = (0..n).map(|i| self.gram[(i, i)].to_integer().is_odd()).collect();
        let Some(j) = odd.iter().position(|&o| o) else {
            return Ok(self.clone());
        };
        let mut coords = RationalMatrix::zeros(n, n);
        for i in 0..n {
            if i == j {
                coords.set(i, j, rat(2));
            } else {
                coords.set(i, i, rat(1));
                if odd[i] {
                    coords.set(i, j, rat(1));
                }
            }
        }
        let basis = &coords * &self.basis;
        Self::with_form(basis, self.form.clone())
    }

    pub fn orthogonal_sum(&self, other: &Self) -> Self {
        Self {
            basis: self.basis.block_diag(&other.basis),
            form: self.form.block_diag(&other.form),
            gram: self.gram.block_diag(&other.gram),
            name: None,
        }
    }

    /// Multiplies the form by `factor`, so norms scale by `factor`.
    pub fn rescale(&self, factor: &Rational) -> Result<Self> {
        if !factor.is_positive() {
            return Err(LatticeError::Precondition("rescale factor must be positive".into()));
        }
        Ok(Self {
            basis: self.basis.clone(),
            form: self.form.scale(factor),
            gram: self.gram.scale(factor),
            name: None,
        })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            basis: self.basis.kron(&other.basis),
            form: self.form.kron(&other.form),
            gram: self.gram.kron(&other.gram),
            name: None,
        }
    }

    /// Coordinates of `sub`'s basis in this lattice's basis, which must be integral.
    pub fn embed(&self, sub: &Self) -> Result<RationalMatrix> {
        self.same_space(sub)?;
        if sub.rank() == 0 {
            return Ok(RationalMatrix::zeros(0, self.rank()));
        }
        let x = solve_left(&self.basis, &sub.basis)?;
        if !x.is_integral() {
            return Err(LatticeError::Containment("basis vector has fractional coordinates".into()));
        }
        Ok(x)
    }

    pub fn contains_lattice(&self, sub: &Self) -> bool {
        self.embed(sub).is_ok()
    }

    /// Equality as sets of vectors, ignoring the chosen basis.
    pub fn same_as(&self, other: &Self) -> bool {
        self.rank() == other.rank() && self.contains_lattice(other) && other.contains_lattice(self)
    }

    /// Index `|self : sub|`, from the determinant formula and, for small
    /// indices, by counting cosets.
    pub fn index_of(&self, sub: &Self) -> Result<BigInt> {
        let x = self.embed(sub)?;
        if sub.rank() != self.rank() {
            return Err(LatticeError::Precondition(format!(
                "sublattice of rank {} has infinite index in rank {}",
                sub.rank(),
                self.rank()
            )));
        }
        let ratio = sub.determinant() / self.determinant();
        let from_det = exact_sqrt(&ratio).ok_or_else(|| {
            LatticeError::Consistency(format!("det ratio {ratio} is not a perfect square"))
        })?;
        let from_coords = det_exact(&x)?.abs();
        if from_coords != int_rat(&from_det) {
            return Err(LatticeError::Consistency(format!(
                "index {from_det} from determinants vs {from_coords} from coordinates"
            )));
        }
        if from_det <= BigInt::from(COSET_COUNT_LIMIT) {
            let counted = count_cosets(&x.to_int()?, self.rank())?;
            if BigInt::from(counted) != from_det {
                return Err(LatticeError::Consistency(format!(
                    "index {from_det} from determinants vs {counted} cosets"
                )));
            }
        }
        Ok(from_det)
    }

    /// Index of `self` in the superlattice `sup`.
    pub fn index_in(&self, sup: &Self) -> Result<BigInt> {
        sup.index_of(self)
    }

    /// Minimum norm and all vectors achieving it.
    pub fn minimal_vectors(&self) -> Result<VectorSet> {
        if self.rank() > MINIMAL_VECTOR_RANK_LIMIT {
            return Err(LatticeError::Resource(format!(
                "rank {} exceeds the enumeration limit {MINIMAL_VECTOR_RANK_LIMIT}",
                self.rank()
            )));
        }
        let (norm, vectors) = enumerate::minimal_vectors(&self.gram)?;
        Ok(VectorSet { norm, vectors })
    }

    /// All nonzero vectors of norm at most `bound`, sorted by norm.
    pub fn short_vectors(&self, bound: &Rational) -> Result<Vec<enumerate::Hit>> {
        enumerate::short_vectors(&self.gram, bound)
    }

    /// `μ(L) ≤ H(n, det L)` in the exact form `μⁿ·3^k ≤ 4^k·det`, `k = n(n−1)/2`.
    pub fn hermite_check(&self) -> Result<bool> {
        let n = self.rank();
        if n == 0 {
            return Ok(true);
        }
        let mu = self.minimal_vectors()?.norm;
        Ok(hermite_inequality(&mu, &self.determinant(), n))
    }

    /// Vectors of `self` orthogonal to every ambient vector in `s`.
    pub fn annihilator(&self, s: &[Vec<Rational>]) -> Result<Self> {
        if s.is_empty() || self.rank() == 0 {
            return Ok(self.clone());
        }
        let sm = RationalMatrix::from_rows(s.to_vec(), self.ambient_dim())?;
        let pairing = &(&self.basis * &self.form) * &sm.transpose();
        let den = pairing.common_denominator();
        let ints = pairing.scale(&int_rat(&den)).to_int()?;
        let kernel = integer_left_kernel(&ints, sm.rows());
        if kernel.is_empty() {
            return Ok(Self::zero_in(self.form.clone()));
        }
        let coords = RationalMatrix::from_int(&kernel, self.rank());
        self.sublattice(&coords)
    }

    /// Smallest primitive sublattice of `self` containing `sub`.
    pub fn saturation_of(&self, sub: &Self) -> Result<Self> {
        let x = self.embed(sub)?;
        if sub.rank() == 0 {
            return Ok(sub.clone());
        }
        // Integer vectors orthogonal (in coordinates) to the rows of x, then
        // everything orthogonal to those.
        let xt = x.transpose().to_int()?;
        let perp = integer_left_kernel(&xt, sub.rank());
        if perp.is_empty() {
            return Ok(self.clone());
        }
        let perp_t = RationalMatrix::from_int(&perp, self.rank()).transpose().to_int()?;
        let sat = integer_left_kernel(&perp_t, perp.len());
        self.sublattice(&RationalMatrix::from_int(&sat, self.rank()))
    }

    pub fn rank_of_vectors(vectors: &RationalMatrix) -> usize {
        rank(vectors)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            writeln!(f, "{name}")?;
        }
        write!(f, "rank {} det {}\n{}", self.rank(), self.determinant(), self.gram)
    }
}

pub fn hermite_inequality(mu: &Rational, det: &Rational, n: usize) -> bool {
    let k = (n * (n - 1) / 2) as u32;
    let n32 = n as u32;
    let lhs = num_traits::pow(mu.numer().clone(), n)
        * BigInt::from(3).pow(k)
        * det.denom();
    let rhs = BigInt::from(4).pow(k) * det.numer() * num_traits::pow(mu.denom().clone(), n32 as usize);
    lhs <= rhs
}

/// Integer square root of a nonnegative rational that is a perfect square of an integer.
pub fn exact_sqrt(x: &Rational) -> Option<BigInt> {
    if !x.is_integer() || x.is_negative() {
        return None;
    }
    let v = x.to_integer();
    let r = v.sqrt();
    (&r * &r == v).then_some(r)
}

/// Counts the elements of `Zⁿ / rowspan(x)` by breadth-first search over
/// canonical representatives modulo the Hermite basis of `x`.
pub fn count_cosets(x: &[Vec<BigInt>], n: usize) -> Result<u64> {
    let (h, _, r) = integer_hnf(&x.to_vec(), n);
    if r != n {
        return Err(LatticeError::Precondition("coset count needs full rank".into()));
    }
    let h = &h[..r];
    let pivot_cols: Vec<usize> = h
        .iter()
        .map(|row| row.iter().position(|v| !v.is_zero()).expect("nonzero HNF row"))
        .collect();
    let reduce = |mut v: Vec<BigInt>| -> Vec<i64> {
        for (row, &c) in h.iter().zip(&pivot_cols) {
            let q = v[c].div_floor(&row[c]);
            if !q.is_zero() {
                for (vj, hj) in v.iter_mut().zip(row) {
                    *vj -= &q * hj;
                }
            }
        }
        v.iter().map(|c| c.to_i64().expect("reduced coordinates are small")).collect()
    };
    let start = vec![0i64; n];
    let mut seen: HashSet<Vec<i64>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for j in 0..n {
            let mut w: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
            w[j] += 1;
            let w = reduce(w);
            if seen.insert(w.clone()) {
                if seen.len() as u64 > COSET_COUNT_LIMIT * 64 {
                    return Err(LatticeError::Resource("too many cosets to count".into()));
                }
                queue.push_back(w);
            }
        }
    }
    Ok(seen.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    fn a2() -> Lattice {
        Lattice::from_gram(&RationalMatrix::from_i64(&[vec![2, -1], vec![-1, 2]])).unwrap()
    }

    fn zn(n: usize) -> Lattice {
        Lattice::new(RationalMatrix::identity(n)).unwrap()
    }

    #[test]
    fn from_gram_round_trip() {
        let l = a2();
        assert_eq!(l.determinant(), rat(3));
        assert_eq!(l.gram(), &RationalMatrix::from_i64(&[vec![2, -1], vec![-1, 2]]));
        assert!(Lattice::from_gram(&RationalMatrix::from_i64(&[vec![1, 2], vec![2, 1]])).is_err());
    }

    #[test]
    fn dual_of_a2() {
        let d = a2().dual().unwrap();
        assert_eq!(d.determinant(), ratio(1, 3));
        assert!(d.contains_lattice(&a2()));
    }

    #[test]
    fn discriminant_of_cubic_is_trivial() {
        assert!(zn(3).discriminant_group().unwrap().is_trivial());
    }

    #[test]
    fn discriminant_representatives_have_exact_order() {
        let g = RationalMatrix::from_i64(&[vec![2, 0, -1], vec![0, 2, -1], vec![-1, -1, 4]]);
        let l = Lattice::from_gram(&g).unwrap();
        let dg = l.discriminant_group().unwrap();
        assert_eq!(dg.orders, vec![BigInt::from(12)]);
        let c = &dg.coordinates[0];
        for k in 1..12 {
            assert!(!c.iter().all(|x| (x * rat(k)).is_integer()));
        }
        assert!(c.iter().all(|x| (x * rat(12)).is_integer()));
    }

    #[test]
    fn even_sublattice_of_z4() {
        let e = zn(4).even_sublattice().unwrap();
        assert_eq!(e.determinant(), rat(4));
        assert!(e.is_even());
        assert_eq!(zn(4).index_of(&e).unwrap(), BigInt::from(2));
        let rect = Lattice::from_gram(&RationalMatrix::diagonal(&[rat(1), rat(1), rat(3)])).unwrap();
        let e = rect.even_sublattice().unwrap();
        assert_eq!(e.determinant(), rat(12));
        assert!(e.is_even());
        assert_eq!(rect.index_of(&e).unwrap(), BigInt::from(2));
    }

    #[test]
    fn index_and_cosets() {
        let l = zn(2);
        let sub = l.sublattice(&RationalMatrix::from_i64(&[vec![2, 0], vec![1, 3]])).unwrap();
        assert_eq!(l.index_of(&sub).unwrap(), BigInt::from(6));
        assert_eq!(l.index_of(&l).unwrap(), BigInt::one());
        assert!(matches!(sub.index_of(&l), Err(LatticeError::Containment(_))));
    }

    #[test]
    fn annihilator_in_z2() {
        let ann = zn(2).annihilator(&[vec![rat(1), rat(0)]]).unwrap();
        assert_eq!(ann.rank(), 1);
        assert_eq!(ann.gram()[(0, 0)], rat(1));
        let all = zn(2).annihilator(&zn(2).basis().row_vecs()).unwrap();
        assert_eq!(all.rank(), 0);
        assert_eq!(all.determinant(), rat(1));
    }

    #[test]
    fn hermite_examples() {
        assert!(zn(1).hermite_check().unwrap());
        assert!(hermite_inequality(&rat(1), &rat(2), 4));
        // μ=2 at rank 4 with det 2 breaks the bound since H(4,2) < 2
        assert!(!hermite_inequality(&rat(2), &rat(2), 4));
    }

    #[test]
    fn tensor_and_sum() {
        assert_eq!(a2().tensor(&a2()).determinant(), rat(81));
        let a1 = Lattice::from_gram(&RationalMatrix::from_i64(&[vec![2]])).unwrap();
        assert_eq!(a1.orthogonal_sum(&a1).orthogonal_sum(&a1).determinant(), rat(8));
        assert_eq!(a2().orthogonal_sum(&Lattice::zero(0)).gram(), a2().gram());
    }

    #[test]
    fn saturation_recovers_primitive_hull() {
        let l = zn(3);
        let sub = l.sublattice(&RationalMatrix::from_i64(&[vec![2, 2, 0]])).unwrap();
        let sat = l.saturation_of(&sub).unwrap();
        assert_eq!(sat.rank(), 1);
        assert_eq!(sat.determinant(), rat(2));
    }
}
