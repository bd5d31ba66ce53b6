//! Glue vectors and integral overlattices.
//!
//! Cosets of `L` in `L*` are handled through the Smith generators of the
//! discriminant group: an element is a vector of residues `aᵢ mod dᵢ`, and
//! its canonical representative is the dual vector whose basis coordinates
//! lie in `[0, 1)`.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{LatticeError, Result};
use crate::lattice::Lattice;
use crate::linalg::{invert, rat, smith_normal_form, Rational, RationalMatrix};

/// Largest discriminant group the overlattice search enumerates.
pub const DISCRIMINANT_LIMIT: u64 = 4096;

#[derive(Clone, Debug)]
pub struct GluePlan {
    pub base: Lattice,
    pub glue_vectors: Vec<Vec<Rational>>,
    pub result: Lattice,
    pub index: BigInt,
}

#[derive(Clone, Debug)]
pub struct OverlatticeStep {
    pub base: Lattice,
    pub adjoined: Vec<Rational>,
    pub order_mod_base: BigInt,
    pub result: Lattice,
    pub integral: bool,
}

/// A coset of `L` in `L*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCoset {
    /// Basis coordinates, reduced into `[0, 1)`.
    pub coords: Vec<Rational>,
    pub vector: Vec<Rational>,
    pub order: BigInt,
    pub norm: Rational,
}

fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

fn in_dual(j: &Lattice, g: &[Rational]) -> bool {
    j.basis().row_vecs().iter().all(|b| j.inner(b, g).is_integer())
}

/// Lattice generated by `J` and dual vectors `gs`.
pub fn glue(j: &Lattice, gs: &[Vec<Rational>]) -> Result<GluePlan> {
    for g in gs {
        if g.len() != j.ambient_dim() {
            return Err(LatticeError::Dimension("glue vector length".into()));
        }
        if !in_dual(j, g) {
            return Err(LatticeError::Pairing("non-integral pairing with the base".into()));
        }
        j.coordinates(g)
            .map_err(|_| LatticeError::Pairing("glue vector outside the span of the base".into()))?;
    }
    let mut rows = j.basis().row_vecs();
    rows.extend(gs.iter().cloned());
    let generators = RationalMatrix::from_rows(rows, j.ambient_dim())?;
    let result = j.span(&generators)?;
    let index = result.index_of(j)?;
    Ok(GluePlan { base: j.clone(), glue_vectors: gs.to_vec(), result, index })
}

/// A minimal set of glue vectors taking `j` to the superlattice `k`, read off
/// the Smith form of `j`'s coordinates in `k`.
pub fn glue_vectors_between(j: &Lattice, k: &Lattice) -> Result<Vec<Vec<Rational>>> {
    let x = k.embed(j)?;
    if x.rows() != x.cols() {
        return Err(LatticeError::Precondition("base has smaller rank than the overlattice".into()));
    }
    let snf = smith_normal_form(&x)?;
    let q_inv = invert(&snf.right)?;
    let gens = &q_inv * k.basis();
    Ok(snf
        .invariants
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_one())
        .map(|(i, _)| gens.row(i).to_vec())
        .collect())
}

/// Residue-vector model of `L*/L`.
struct Discriminant<'a> {
    lattice: &'a Lattice,
    orders: Vec<u64>,
    /// Generator coordinates in the lattice basis.
    gens: Vec<Vec<Rational>>,
    /// Pairings between generators.
    pairing: Vec<Vec<Rational>>,
}

impl<'a> Discriminant<'a> {
    fn new(l: &'a Lattice) -> Result<Self> {
        let dg = l.discriminant_group()?;
        let orders: Vec<u64> = dg
            .orders
            .iter()
            .map(|d| d.to_u64().ok_or_else(|| LatticeError::Resource("huge discriminant".into())))
            .collect::<Result<_>>()?;
        let gens = dg.coordinates.clone();
        let pairing = gens
            .iter()
            .map(|a| gens.iter().map(|b| l.gram().bilinear(a, b)).collect())
            .collect();
        Ok(Self { lattice: l, orders, gens, pairing })
    }

    fn coords(&self, a: &[u64]) -> Vec<Rational> {
        let n = self.lattice.rank();
        let mut c = vec![Rational::zero(); n];
        for (ai, g) in a.iter().zip(&self.gens) {
            if *ai == 0 {
                continue;
            }
            for (cj, gj) in c.iter_mut().zip(g) {
                *cj += gj * rat(*ai as i64);
            }
        }
        c.iter().map(frac).collect()
    }

    fn inner(&self, a: &[u64], b: &[u64]) -> Rational {
        let mut s = Rational::zero();
        for (i, ai) in a.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if *bj != 0 {
                    s += &self.pairing[i][j] * rat((*ai * *bj) as i64);
                }
            }
        }
        s
    }

    fn order_of(&self, a: &[u64]) -> u64 {
        a.iter().zip(&self.orders).fold(1u64, |acc, (ai, d)| acc.lcm(&(d / ai.gcd(d))))
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.orders).map(|((x, y), d)| (x + y) % d).collect()
    }

    /// All elements killed by `m`.
    fn torsion(&self, m: u64) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for &d in &self.orders {
            let g = m.gcd(&d);
            let step = d / g;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..g).map(move |k| {
                        let mut p = prefix.clone();
                        p.push(k * step);
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn coset(&self, a: &[u64]) -> DualCoset {
        let coords = self.coords(a);
        let vector = self.lattice.vector(&coords);
        let norm = self.lattice.norm(&vector);
        DualCoset { coords, vector, order: BigInt::from(self.order_of(a)), norm }
    }
}

/// Canonical representatives of every element of `L*/L` of exact order `m`.
pub fn dual_vectors_of_order(l: &Lattice, m: u64) -> Result<Vec<DualCoset>> {
    let d = Discriminant::new(l)?;
    let mut out: Vec<DualCoset> = d
        .torsion(m)
        .into_iter()
        .filter(|a| d.order_of(a) == m)
        .map(|a| d.coset(&a))
        .collect();
    out.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(out)
}

/// Order of the coset `u + L` in `L*/L`, or an error if `u ∉ L*`.
pub fn order_mod(l: &Lattice, u: &[Rational]) -> Result<BigInt> {
    if !in_dual(l, u) {
        return Err(LatticeError::Pairing("vector is not in the dual".into()));
    }
    let c = l.coordinates(u)?;
    Ok(c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom())))
}

/// `count` dual vectors of order 4 modulo `K` whose doubles stay independent
/// modulo `K`, taken greedily in canonical order.
pub fn doubling_vectors(k: &Lattice, count: usize) -> Result<Vec<Vec<Rational>>> {
    let mut chosen = Vec::new();
    let mut current = k.clone();
    for c in dual_vectors_of_order(k, 4)? {
        if chosen.len() == count {
            break;
        }
        let doubled: Vec<Rational> = c.vector.iter().map(|x| x * rat(2)).collect();
        if current.contains(&doubled) {
            continue;
        }
        current = glue(&current, std::slice::from_ref(&doubled))?.result;
        chosen.push(c.vector);
    }
    if chosen.len() < count {
        return Err(LatticeError::Precondition(format!(
            "only {} independent order-4 cosets, {count} requested",
            chosen.len()
        )));
    }
    Ok(chosen)
}

/// `K + 2Zu₁ + 2Zu₂ + ...` for dual vectors `uᵢ` of order 4 modulo `K`.
pub fn integral_overlattice_by_doubling(k: &Lattice, us: &[Vec<Rational>]) -> Result<Vec<OverlatticeStep>> {
    for u in us {
        let o = order_mod(k, u)?;
        if o != BigInt::from(4) {
            return Err(LatticeError::Precondition(format!("vector has order {o}, not 4")));
        }
    }
    for (a, u) in us.iter().enumerate() {
        for w in &us[a + 1..] {
            if !(k.inner(u, w) * rat(4)).is_integer() {
                return Err(LatticeError::Consistency("(4u, w) is not integral".into()));
            }
        }
    }
    let mut steps = Vec::new();
    let mut base = k.clone();
    for u in us {
        let adjoined: Vec<Rational> = u.iter().map(|x| x * rat(2)).collect();
        let order_mod_base = order_mod(&base, &adjoined)?;
        let plan = glue(&base, std::slice::from_ref(&adjoined))?;
        let integral = plan.result.is_integral();
        if !integral {
            return Err(LatticeError::Consistency("doubling produced a non-integral lattice".into()));
        }
        steps.push(OverlatticeStep {
            base: base.clone(),
            adjoined,
            order_mod_base,
            result: plan.result.clone(),
            integral,
        });
        base = plan.result;
    }
    Ok(steps)
}

/// `K + 2K*`.
pub fn plus_twice_dual(k: &Lattice) -> Result<OverlatticeStep> {
    let dual = k.dual()?;
    let twice: Vec<Vec<Rational>> =
        dual.basis().row_vecs().into_iter().map(|r| r.iter().map(|x| x * rat(2)).collect()).collect();
    let mut rows = k.basis().row_vecs();
    rows.extend(twice.iter().cloned());
    let result = k.span(&RationalMatrix::from_rows(rows, k.ambient_dim())?)?;
    let order = result.index_of(k)?;
    Ok(OverlatticeStep {
        base: k.clone(),
        adjoined: Vec::new(),
        order_mod_base: order,
        integral: result.is_integral(),
        result,
    })
}

/// Every integral overlattice of `J` with index `target_index`, found by
/// enumerating subgroups of `J*/J` on which the form is integral.
pub fn integral_overlattice_search(j: &Lattice, target_index: u64) -> Result<Vec<GluePlan>> {
    if target_index == 0 {
        return Err(LatticeError::Precondition("index must be positive".into()));
    }
    let d = Discriminant::new(j)?;
    let size: u64 = d.orders.iter().product();
    if size > DISCRIMINANT_LIMIT {
        return Err(LatticeError::Resource(format!("discriminant group of order {size}")));
    }
    if target_index == 1 {
        return Ok(vec![glue(j, &[])?]);
    }
    if !size.is_multiple_of(target_index * target_index) {
        return Ok(Vec::new());
    }
    let candidates: Vec<Vec<u64>> = d
        .torsion(target_index)
        .into_iter()
        .filter(|a| a.iter().any(|&x| x != 0) && d.inner(a, a).is_integer())
        .collect();

    // Subgroups as sorted element sets with their generators.
    type Group = (BTreeSet<Vec<u64>>, Vec<Vec<u64>>);
    let zero = vec![0u64; d.orders.len()];
    let mut frontier: Vec<Group> = vec![(BTreeSet::from([zero]), Vec::new())];
    let mut seen: HashSet<BTreeSet<Vec<u64>>> = HashSet::new();
    let mut found: Vec<Group> = Vec::new();
    while let Some((elems, gens)) = frontier.pop() {
        for x in &candidates {
            if elems.contains(x) || gens.iter().any(|g| !d.inner(x, g).is_integer()) {
                continue;
            }
            let mut grown = elems.clone();
            let mut layer: Vec<Vec<u64>> = elems.iter().cloned().collect();
            loop {
                let next: Vec<Vec<u64>> = layer.iter().map(|e| d.add(e, x)).collect();
                let mut added = false;
                for e in &next {
                    if grown.insert(e.clone()) {
                        added = true;
                    }
                }
                if !added {
                    break;
                }
                layer = next;
            }
            let order = grown.len() as u64;
            if !target_index.is_multiple_of(order) || !seen.insert(grown.clone()) {
                continue;
            }
            let mut g2 = gens.clone();
            g2.push(x.clone());
            if order == target_index {
                found.push((grown, g2));
            } else {
                frontier.push((grown, g2));
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    let mut plans = Vec::new();
    for (_, gens) in found {
        let vectors: Vec<Vec<Rational>> = gens.iter().map(|a| d.coset(a).vector).collect();
        let plan = glue(j, &vectors)?;
        if !plan.result.is_integral() {
            return Err(LatticeError::Consistency("isotropic glue gave a non-integral lattice".into()));
        }
        plans.push(plan);
    }
    Ok(plans)
}

/// Whether `L*/L` is an elementary abelian 2-group.
pub fn is_elementary_two_group(l: &Lattice) -> Result<bool> {
    Ok(l.discriminant_group()?.orders.iter().all(|d| *d == BigInt::from(2)))
}

/// Nonzero cosets of `L` in `L*` whose representatives have integer norm.
pub fn integer_norm_cosets(l: &Lattice) -> Result<Vec<DualCoset>> {
    let d = Discriminant::new(l)?;
    let size: u64 = d.orders.iter().product();
    if size > DISCRIMINANT_LIMIT {
        return Err(LatticeError::Resource(format!("discriminant group of order {size}")));
    }
    let all = d.torsion(d.orders.iter().fold(1u64, |a, b| a.lcm(b)));
    Ok(all
        .into_iter()
        .filter(|a| a.iter().any(|&x| x != 0))
        .map(|a| d.coset(&a))
        .filter(|c| c.norm.is_integer())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn empty_glue_is_identity() {
        let j = catalog::root_a(3);
        let plan = glue(&j, &[]).unwrap();
        assert!(plan.result.same_as(&j));
        assert_eq!(plan.index, BigInt::one());
    }

    #[test]
    fn glue_rejects_non_dual_vectors() {
        let j = catalog::root_a(2);
        let g = vec![Rational::new(1.into(), 3.into()), rat(0), rat(0)];
        assert!(matches!(glue(&j, &[g]), Err(LatticeError::Pairing(_))));
    }

    #[test]
    fn cubic_has_no_dual_cosets() {
        assert!(dual_vectors_of_order(&catalog::cubic(3), 2).unwrap().is_empty());
    }

    #[test]
    fn d4_dual_cosets() {
        let c = dual_vectors_of_order(&catalog::root_d(4), 2).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|x| x.norm == rat(1)));
    }

    #[test]
    fn d_n_glues_to_cubic() {
        let d = catalog::root_d(5);
        let plans = integral_overlattice_search(&d, 2).unwrap();
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].result.determinant(), rat(1));
    }

    #[test]
    fn a1_squared_to_z2_by_search() {
        let j = catalog::parse("A1^2").unwrap();
        let plans = integral_overlattice_search(&j, 2).unwrap();
        assert_eq!(plans.len(), 1);
        assert!(catalog::isometric(&catalog::cubic(2), &plans[0].result).unwrap().is_some());
    }

    #[test]
    fn glue_vectors_recover_superlattice() {
        let k = catalog::cubic(4);
        let j = k.even_sublattice().unwrap();
        let gs = glue_vectors_between(&j, &k).unwrap();
        assert_eq!(gs.len(), 1);
        let plan = glue(&j, &gs).unwrap();
        assert!(plan.result.same_as(&k));
        assert_eq!(plan.index, BigInt::from(2));
    }

    #[test]
    fn unimodular_search_returns_itself() {
        let e = catalog::e8();
        let plans = integral_overlattice_search(&e, 1).unwrap();
        assert_eq!(plans.len(), 1);
        assert!(integral_overlattice_search(&e, 2).unwrap().is_empty());
    }
}
