//! Isometries of a lattice, acting on basis coordinates by `v ↦ v·H`.
//!
//! Specs describe maps on the ambient coordinates `e₁, e₂, ...` (1-indexed
//! cycles, signed images, explicit matrices acting on column vectors) and
//! are translated once into an integral basis-coordinate matrix.

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::json::{matrix_from_json, JsonRational};
use crate::lattice::Lattice;
use crate::linalg::{det_exact, invert, rat, solve_left, Rational, RationalMatrix};

/// Largest order [`Isometry::order`] searches before giving up.
pub const ORDER_LIMIT: u32 = 120;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Isometry {
    matrix: RationalMatrix,
}

/// Image of one ambient coordinate under a signed map: `±index`, 1-indexed.
/// Accepts either a bare integer or a one-element list.
#[derive(Clone, Debug, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignedImage {
    Bare(i64),
    Wrapped([i64; 1]),
}

impl PartialEq for SignedImage {
    fn eq(&self, other: &Self) -> bool {
        self.value() == other.value()
    }
}

impl SignedImage {
    pub fn value(&self) -> i64 {
        match self {
            Self::Bare(v) | Self::Wrapped([v]) => *v,
        }
    }
}

/// Which coordinates an explicit matrix acts on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixAction {
    /// Column-vector action `x ↦ A·x` on ambient coordinates.
    #[default]
    Ambient,
    /// Row action `v ↦ v·A` on basis coordinates.
    Basis,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IsometrySpec {
    Identity,
    #[serde(alias = "negation_of_all")]
    Negation,
    /// Permutation of ambient coordinates in 1-indexed cycle notation.
    #[serde(alias = "coordinate_permutation")]
    Perm { cycles: Vec<Vec<usize>> },
    /// `eᵢ ↦ sign·e_j` given as `images[i] = ±j`.
    #[serde(alias = "signed_coordinate_map")]
    Signed { images: Vec<SignedImage> },
    /// Reflection at a norm-2 vector given in basis coordinates.
    #[serde(alias = "reflection_at_root")]
    RootReflection { root: Vec<i64> },
    #[serde(alias = "explicit_matrix")]
    Matrix {
        rows: Vec<Vec<JsonRational>>,
        #[serde(default)]
        action: MatrixAction,
    },
    Negated { inner: Box<IsometrySpec> },
    /// Composition of maps; the last factor is applied first.
    Product { factors: Vec<IsometrySpec> },
}

impl IsometrySpec {
    pub fn perm(cycles: &[&[usize]]) -> Self {
        Self::Perm { cycles: cycles.iter().map(|c| c.to_vec()).collect() }
    }

    pub fn signed(images: &[i64]) -> Self {
        Self::Signed { images: images.iter().map(|&v| SignedImage::Bare(v)).collect() }
    }

    pub fn negated(inner: Self) -> Self {
        Self::Negated { inner: Box::new(inner) }
    }
}

/// Row-action matrix of an ambient permutation given in cycle notation.
fn permutation_rows(dim: usize, cycles: &[Vec<usize>]) -> Result<RationalMatrix> {
    let mut image: Vec<usize> = (0..dim).collect();
    let mut touched = vec![false; dim];
    for cycle in cycles {
        for (k, &from) in cycle.iter().enumerate() {
            let to = cycle[(k + 1) % cycle.len()];
            if from == 0 || from > dim || to == 0 || to > dim {
                return Err(LatticeError::Dimension(format!(
                    "cycle entry out of range 1..={dim}"
                )));
            }
            if touched[from - 1] {
                return Err(LatticeError::Parse(format!("coordinate {from} repeated in cycles")));
            }
            touched[from - 1] = true;
            image[from - 1] = to - 1;
        }
    }
    let mut m = RationalMatrix::zeros(dim, dim);
    for (i, &j) in image.iter().enumerate() {
        m.set(i, j, rat(1));
    }
    Ok(m)
}

fn signed_rows(dim: usize, images: &[SignedImage]) -> Result<RationalMatrix> {
    if images.len() != dim {
        return Err(LatticeError::Dimension(format!(
            "{} signed images for ambient dimension {dim}",
            images.len()
        )));
    }
    let mut m = RationalMatrix::zeros(dim, dim);
    let mut seen = vec![false; dim];
    for (i, img) in images.iter().enumerate() {
        let v = img.value();
        let j = v.unsigned_abs() as usize;
        if j == 0 || j > dim || seen[j - 1] {
            return Err(LatticeError::Parse(format!("bad signed image {v}")));
        }
        seen[j - 1] = true;
        m.set(i, j - 1, rat(v.signum()));
    }
    Ok(m)
}

impl Isometry {
    /// Checks `H·G·Hᵀ = G` and that `H` is an integral unimodular matrix.
    pub fn validate(lattice: &Lattice, matrix: RationalMatrix) -> Result<Self> {
        let n = lattice.rank();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(LatticeError::Dimension(format!(
                "{}x{} matrix for a rank-{n} lattice",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let g = lattice.gram();
        if &(&matrix * g) * &matrix.transpose() != *g {
            return Err(LatticeError::NotAnIsometry("H·G·Hᵀ differs from G".into()));
        }
        if !matrix.is_integral() {
            return Err(LatticeError::NotAnAutomorphism(
                "fractional basis coordinates in the image".into(),
            ));
        }
        if det_exact(&matrix)?.abs() != rat(1) {
            return Err(LatticeError::NotAnAutomorphism("determinant is not ±1".into()));
        }
        Ok(Self { matrix })
    }

    pub fn identity(rank: usize) -> Self {
        Self { matrix: RationalMatrix::identity(rank) }
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    /// Basis-coordinate matrix of an ambient row-action map `R` (`eᵢ ↦ eᵢ·R`).
    pub fn from_ambient_rows(lattice: &Lattice, rows: &RationalMatrix) -> Result<Self> {
        let d = lattice.ambient_dim();
        if rows.rows() != d || rows.cols() != d {
            return Err(LatticeError::Dimension(format!(
                "ambient map of size {}x{} for dimension {d}",
                rows.rows(),
                rows.cols()
            )));
        }
        if lattice.rank() == 0 {
            return Ok(Self::identity(0));
        }
        let image = lattice.basis() * rows;
        let h = solve_left(lattice.basis(), &image).map_err(|_| {
            LatticeError::NotAnAutomorphism("ambient map moves the lattice out of its span".into())
        })?;
        if &(&(&image * lattice.form()) * &image.transpose()) != lattice.gram() {
            return Err(LatticeError::NotAnIsometry("ambient map does not preserve the form".into()));
        }
        Self::validate(lattice, h)
    }

    /// Reflection `x ↦ x − 2(x,v)/(v,v)·v` at a vector in basis coordinates.
    pub fn reflection(lattice: &Lattice, v: &[Rational]) -> Result<Self> {
        let n = lattice.rank();
        if v.len() != n {
            return Err(LatticeError::Dimension(format!("vector of length {} in rank {n}", v.len())));
        }
        let g = lattice.gram();
        let nv = g.bilinear(v, v);
        if nv.is_zero() {
            return Err(LatticeError::Precondition("reflection at the zero vector".into()));
        }
        let gv = g.left_apply(v);
        let scale = rat(2) / nv;
        let mut h = RationalMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let e = &h[(i, j)] - &gv[i] * &v[j] * &scale;
                h.set(i, j, e);
            }
        }
        Self::validate(lattice, h)
    }

    /// `r_v(x) = x − (x,v)v` for a root `v` given in basis coordinates.
    pub fn reflection_at_root(lattice: &Lattice, v: &[Rational]) -> Result<Self> {
        if v.len() != lattice.rank() {
            return Err(LatticeError::Dimension("root length differs from rank".into()));
        }
        let nv = lattice.gram().bilinear(v, v);
        if nv != rat(2) || !v.iter().all(|x| x.is_integer()) {
            return Err(LatticeError::RootNorm(nv.to_string()));
        }
        Self::reflection(lattice, v)
    }

    pub fn from_spec(lattice: &Lattice, spec: &IsometrySpec) -> Result<Self> {
        let n = lattice.rank();
        let d = lattice.ambient_dim();
        match spec {
            IsometrySpec::Identity => Ok(Self::identity(n)),
            IsometrySpec::Negation => Ok(Self::identity(n).negate()),
            IsometrySpec::Perm { cycles } => {
                Self::from_ambient_rows(lattice, &permutation_rows(d, cycles)?)
            }
            IsometrySpec::Signed { images } => {
                Self::from_ambient_rows(lattice, &signed_rows(d, images)?)
            }
            IsometrySpec::RootReflection { root } => {
                let v: Vec<Rational> = root.iter().map(|&x| rat(x)).collect();
                Self::reflection_at_root(lattice, &v)
            }
            IsometrySpec::Matrix { rows, action } => {
                let m = matrix_from_json(rows)?;
                match action {
                    MatrixAction::Ambient => Self::from_ambient_rows(lattice, &m.transpose()),
                    MatrixAction::Basis => Self::validate(lattice, m),
                }
            }
            IsometrySpec::Negated { inner } => Ok(Self::from_spec(lattice, inner)?.negate()),
            IsometrySpec::Product { factors } => {
                let mut acc = Self::identity(n);
                for f in factors {
                    acc = acc.compose(&Self::from_spec(lattice, f)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.rank() != other.rank() {
            return Err(LatticeError::Dimension("composing isometries of different rank".into()));
        }
        Ok(Self { matrix: &other.matrix * &self.matrix })
    }

    pub fn negate(&self) -> Self {
        Self { matrix: self.matrix.neg() }
    }

    pub fn inverse(&self) -> Self {
        Self { matrix: invert(&self.matrix).expect("isometries are invertible") }
    }

    /// `k⁻¹·self·k` as maps: apply `k`, then `self`, then `k⁻¹`.
    pub fn conjugate_by(&self, k: &Self) -> Result<Self> {
        k.inverse().compose(&self.compose(k)?)
    }

    pub fn apply(&self, coords: &[Rational]) -> Vec<Rational> {
        self.matrix.left_apply(coords)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == RationalMatrix::identity(self.rank())
    }

    /// Least `k ≥ 1` with `selfᵏ = 1`.
    pub fn order(&self) -> Result<u32> {
        let id = RationalMatrix::identity(self.rank());
        let mut p = self.matrix.clone();
        for k in 1..=ORDER_LIMIT {
            if p == id {
                return Ok(k);
            }
            p = &p * &self.matrix;
        }
        Err(LatticeError::Resource(format!("order exceeds {ORDER_LIMIT}")))
    }

    /// Whether `h² + h + 1 = 0` holds exactly.
    pub fn satisfies_cyclotomic3(&self) -> bool {
        let h = &self.matrix;
        let sum = (h * h).add(h).and_then(|s| s.add(&RationalMatrix::identity(self.rank())));
        sum.is_ok_and(|s| s.is_zero())
    }
}

/// A random isometry of `lattice` built as a product of `steps` reflections
/// at vectors of norm 1 or 2 whose reflections preserve the lattice.
pub fn random_isometry<R: Rng>(lattice: &Lattice, steps: usize, rng: &mut R) -> Result<Isometry> {
    let n = lattice.rank();
    let mut pool = Vec::new();
    for (x, _) in lattice.short_vectors(&rat(2))? {
        let v: Vec<Rational> = x.iter().map(|&c| rat(c)).collect();
        if let Ok(r) = Isometry::reflection(lattice, &v) {
            pool.push(r);
        }
    }
    let mut acc = Isometry::identity(n);
    if pool.is_empty() {
        return Ok(if rng.gen_bool(0.5) { acc.negate() } else { acc });
    }
    for _ in 0..steps {
        let r = pool.choose(rng).expect("pool is nonempty");
        acc = acc.compose(r)?;
    }
    Ok(acc)
}

/// Integer matrix helper used by tests and fixtures.
pub fn int_matrix(rows: &[Vec<i64>]) -> RationalMatrix {
    RationalMatrix::from_i64(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    fn a_n(n: usize) -> Lattice {
        let mut rows = vec![vec![0i64; n + 1]; n];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = 1;
            r[i + 1] = -1;
        }
        Lattice::new(RationalMatrix::from_i64(&rows)).unwrap()
    }

    fn d4() -> Lattice {
        Lattice::new(RationalMatrix::from_i64(&[
            vec![1, -1, 0, 0],
            vec![0, 1, -1, 0],
            vec![0, 0, 1, -1],
            vec![0, 0, 1, 1],
        ]))
        .unwrap()
    }

    fn half_matrix(signs: [[i64; 4]; 4]) -> IsometrySpec {
        let rows = signs
            .iter()
            .map(|r| r.iter().map(|&s| JsonRational(ratio(s, 2))).collect())
            .collect();
        IsometrySpec::Matrix { rows, action: MatrixAction::Ambient }
    }

    #[test]
    fn identity_is_valid() {
        let l = a_n(3);
        assert!(Isometry::validate(&l, RationalMatrix::identity(3)).is_ok());
    }

    #[test]
    fn shear_is_rejected() {
        let z2 = Lattice::new(RationalMatrix::identity(2)).unwrap();
        let shear = RationalMatrix::from_i64(&[vec![1, 1], vec![0, 1]]);
        assert!(matches!(Isometry::validate(&z2, shear), Err(LatticeError::NotAnIsometry(_))));
    }

    #[test]
    fn transposition_on_a3() {
        let l = a_n(3);
        let h = Isometry::from_spec(&l, &IsometrySpec::perm(&[&[1, 2]])).unwrap();
        let expected = RationalMatrix::from_i64(&[vec![-1, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]);
        assert_eq!(h.matrix(), &expected);
    }

    #[test]
    fn root_reflection_on_a2() {
        let l = a_n(2);
        let r = Isometry::reflection_at_root(&l, &[rat(1), rat(0)]).unwrap();
        assert_eq!(r.apply(&[rat(1), rat(0)]), vec![rat(-1), rat(0)]);
        assert_eq!(r.apply(&[rat(0), rat(1)]), vec![rat(1), rat(1)]);
        assert_eq!(r.order().unwrap(), 2);
        assert_eq!(det_exact(r.matrix()).unwrap(), rat(-1));
        assert!(matches!(
            Isometry::reflection_at_root(&l, &[rat(2), rat(0)]),
            Err(LatticeError::RootNorm(_))
        ));
    }

    #[test]
    fn d4_matrices() {
        let l = d4();
        let h = half_matrix([[-1, -1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1], [1, 1, -1, -1]]);
        let h = Isometry::from_spec(&l, &h).unwrap();
        assert!(h.satisfies_cyclotomic3());
        assert_eq!(h.order().unwrap(), 3);
        let h12 = half_matrix([[1, 1, -1, 1], [1, -1, 1, 1], [1, 1, 1, -1], [1, -1, -1, -1]]);
        assert_eq!(Isometry::from_spec(&l, &h12).unwrap().order().unwrap(), 12);
        let neg = IsometrySpec::signed(&[-1, 2, 3, 4]);
        assert!(Isometry::from_spec(&l, &neg).is_ok());
    }

    #[test]
    fn half_integral_map_off_d4_fails() {
        let z4 = Lattice::new(RationalMatrix::identity(4)).unwrap();
        let h = half_matrix([[-1, -1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1], [1, 1, -1, -1]]);
        assert!(matches!(
            Isometry::from_spec(&z4, &h),
            Err(LatticeError::NotAnAutomorphism(_))
        ));
    }

    #[test]
    fn negated_spec_matches_negate() {
        let l = a_n(3);
        let s = IsometrySpec::perm(&[&[1, 2, 3]]);
        let a = Isometry::from_spec(&l, &IsometrySpec::negated(s.clone())).unwrap();
        let b = Isometry::from_spec(&l, &s).unwrap().negate();
        assert_eq!(a, b);
    }

    #[test]
    fn compose_with_inverse() {
        let l = a_n(4);
        let h = Isometry::from_spec(&l, &IsometrySpec::perm(&[&[1, 2, 3, 4, 5]])).unwrap();
        assert!(h.compose(&h.inverse()).unwrap().is_identity());
        assert_eq!(h.order().unwrap(), 5);
    }

    #[test]
    fn product_of_reflections_is_cycle() {
        // (e1,e2,e3) = r_{v1} r_{v2}
        let l = a_n(3);
        let prod = IsometrySpec::Product {
            factors: vec![
                IsometrySpec::RootReflection { root: vec![1, 0, 0] },
                IsometrySpec::RootReflection { root: vec![0, 1, 0] },
            ],
        };
        let a = Isometry::from_spec(&l, &prod).unwrap();
        let b = Isometry::from_spec(&l, &IsometrySpec::perm(&[&[1, 2, 3]])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_json_forms() {
        let s: IsometrySpec =
            serde_json::from_str(r#"{"kind":"signed","images":[[-2],[1],[3],[4]]}"#).unwrap();
        assert_eq!(s, IsometrySpec::signed(&[-2, 1, 3, 4]));
        let p: IsometrySpec = serde_json::from_str(r#"{"kind":"perm","cycles":[[1,2],[3,4]]}"#).unwrap();
        assert_eq!(p, IsometrySpec::perm(&[&[1, 2], &[3, 4]]));
        let n: IsometrySpec =
            serde_json::from_str(r#"{"kind":"negated","inner":{"kind":"identity"}}"#).unwrap();
        assert_eq!(n, IsometrySpec::negated(IsometrySpec::Identity));
    }
}
