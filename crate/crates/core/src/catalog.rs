//! Named lattices, the isometry oracle and identification.
//!
//! Names follow a small grammar: terms joined by `+` form an orthogonal
//! sum; a term is an optional `sqrt2*` (or `√2`) prefix, factors joined by
//! `(x)` (or `⊗`) forming a tensor product, and an optional `^k` power.
//! Base factors are `Zn`, `An`, `Dn`, `E6`, `E7`, `E8` and `Z(k)`, the
//! rank-1 lattice with norm `k`.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::enumerate;
use crate::error::{LatticeError, Result};
use crate::json::JsonRational;
use crate::lattice::Lattice;
use crate::linalg::{det_exact, int_rat, invert, rat, smith_normal_form, Rational, RationalMatrix};

/// Largest rank the oracle accepts.
pub const ORACLE_RANK_LIMIT: usize = 10;

const NODE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expected {
    pub det: Rational,
    pub min_norm: Rational,
    pub min_count: usize,
    pub even: bool,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub lattice: Lattice,
    pub expected: Expected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Named(String),
    /// Sorted diagonal of an orthogonal basis.
    Rectangular(Vec<Rational>),
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identification {
    pub verdict: Verdict,
    /// Rows are images of the reference lattice's basis in coordinates of
    /// the identified lattice: `X·G·Xᵀ = G_ref`.
    pub certificate: Option<RationalMatrix>,
    /// Gram of the reference lattice the certificate maps from.
    pub reference_gram: Option<RationalMatrix>,
}

impl Identification {
    fn unknown() -> Self {
        Self { verdict: Verdict::Unknown, certificate: None, reference_gram: None }
    }

    /// Re-checks `X·G·Xᵀ = G_ref` against the identified lattice.
    pub fn revalidate(&self, l: &Lattice) -> bool {
        match (&self.certificate, &self.reference_gram) {
            (Some(x), Some(g)) => &(x * l.gram()) * &x.transpose() == *g,
            _ => self.verdict == Verdict::Unknown,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match &self.verdict {
            Verdict::Named(n) => Some(n),
            _ => None,
        }
    }
}

pub fn cubic(n: usize) -> Lattice {
    Lattice::new(RationalMatrix::identity(n)).expect("identity basis").named(format!("Z{n}"))
}

/// `Aₙ` with basis `vᵢ = eᵢ − eᵢ₊₁` in `Zⁿ⁺¹`.
pub fn root_a(n: usize) -> Lattice {
    let mut rows = vec![vec![0i64; n + 1]; n];
    for (i, r) in rows.iter_mut().enumerate() {
        r[i] = 1;
        r[i + 1] = -1;
    }
    Lattice::new(RationalMatrix::from_i64(&rows)).expect("independent rows").named(format!("A{n}"))
}

/// `Dₙ` with basis `vᵢ = eᵢ − eᵢ₊₁` (`i < n`) and `vₙ = eₙ₋₁ + eₙ`.
pub fn root_d(n: usize) -> Lattice {
    assert!(n >= 2, "D_n needs n ≥ 2");
    let mut rows = vec![vec![0i64; n]; n];
    for (i, r) in rows.iter_mut().enumerate().take(n - 1) {
        r[i] = 1;
        r[i + 1] = -1;
    }
    rows[n - 1][n - 2] = 1;
    rows[n - 1][n - 1] = 1;
    Lattice::new(RationalMatrix::from_i64(&rows)).expect("independent rows").named(format!("D{n}"))
}

/// `E₈` from its Cartan matrix (chain 1-3-4-5-6-7-8, node 2 on node 4).
pub fn e8() -> Lattice {
    let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    for (a, b) in edges {
        g[a][b] = -1;
        g[b][a] = -1;
    }
    Lattice::from_gram(&RationalMatrix::from_i64(&g)).expect("Cartan matrix is positive").named("E8")
}

/// `E₇` as the vectors of `E₈` orthogonal to a root.
pub fn e7() -> Lattice {
    let e = e8();
    let root = e.vector_i64(&[0, 0, 0, 0, 0, 0, 0, 1]);
    e.annihilator(&[root]).expect("annihilator of a root").named("E7")
}

/// `E₆` as the vectors of `E₈` orthogonal to an `A₂`.
pub fn e6() -> Lattice {
    let e = e8();
    let a = e.vector_i64(&[0, 0, 0, 0, 0, 0, 1, 0]);
    let b = e.vector_i64(&[0, 0, 0, 0, 0, 0, 0, 1]);
    e.annihilator(&[a, b]).expect("annihilator of A2").named("E6")
}

/// Rank-1 lattice whose generator has norm `k`.
pub fn rank_one(k: &Rational) -> Result<Lattice> {
    Lattice::from_gram(&RationalMatrix::diagonal(std::slice::from_ref(k)))
}

fn parse_count(s: &str, whole: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| LatticeError::Lookup(whole.to_string()))
}

fn parse_base(token: &str, whole: &str) -> Result<Lattice> {
    let t = token.trim();
    let lookup = || LatticeError::Lookup(whole.to_string());
    if let Some(inner) = t.strip_prefix("Z(").and_then(|r| r.strip_suffix(')')) {
        let k: JsonRational = inner.parse()?;
        if !k.0.is_positive() {
            return Err(lookup());
        }
        return rank_one(&k.0);
    }
    let (head, tail) = t.split_at(t.char_indices().nth(1).map_or(t.len(), |(i, _)| i));
    match head {
        "Z" if tail.is_empty() => Ok(cubic(1)),
        "Z" => Ok(cubic(parse_count(tail, whole)?)),
        "A" => match parse_count(tail, whole)? {
            0 => Err(lookup()),
            n => Ok(root_a(n)),
        },
        "D" => match parse_count(tail, whole)? {
            n if n >= 2 => Ok(root_d(n)),
            _ => Err(lookup()),
        },
        "E" => match tail {
            "6" => Ok(e6()),
            "7" => Ok(e7()),
            "8" => Ok(e8()),
            _ => Err(lookup()),
        },
        _ => Err(lookup()),
    }
}

fn parse_term(term: &str, whole: &str) -> Result<Lattice> {
    let mut t = term.trim();
    let mut scaled = false;
    for prefix in ["sqrt2*", "√2*", "√2"] {
        if let Some(rest) = t.strip_prefix(prefix) {
            t = rest.trim();
            scaled = true;
            break;
        }
    }
    let (body, power) = match t.rsplit_once('^') {
        Some((b, p)) => (b.trim(), parse_count(p.trim(), whole)?),
        None => (t, 1),
    };
    if power == 0 {
        return Err(LatticeError::Lookup(whole.to_string()));
    }
    let mut factors = body.split("(x)").flat_map(|f| f.split('⊗'));
    let first = factors.next().ok_or_else(|| LatticeError::Lookup(whole.to_string()))?;
    let mut l = parse_base(first, whole)?;
    for f in factors {
        l = l.tensor(&parse_base(f, whole)?);
    }
    let base = l.clone();
    for _ in 1..power {
        l = l.orthogonal_sum(&base);
    }
    if scaled {
        l = l.rescale(&rat(2))?;
    }
    Ok(l)
}

/// Lattice for a catalog name such as `A3+A1^3`, `sqrt2*D5` or `A2(x)D4`.
pub fn parse(name: &str) -> Result<Lattice> {
    let name = name.trim();
    if name.is_empty() {
        return Err(LatticeError::Lookup(String::new()));
    }
    let mut acc: Option<Lattice> = None;
    for term in name.split('+') {
        let l = parse_term(term, name)?;
        acc = Some(match acc {
            None => l,
            Some(a) => a.orthogonal_sum(&l),
        });
    }
    Ok(acc.expect("at least one term").named(name))
}

fn formula(name: &str) -> Option<Expected> {
    let even = |det: i64, count: usize| Expected {
        det: rat(det),
        min_norm: rat(2),
        min_count: count,
        even: true,
    };
    let (head, tail) = name.split_at(1);
    let n: usize = tail.parse().ok()?;
    match head {
        "Z" => Some(Expected { det: rat(1), min_norm: rat(1), min_count: 2 * n, even: false }),
        "A" => Some(even(n as i64 + 1, n * (n + 1))),
        "D" if n >= 2 => Some(even(4, 2 * n * (n - 1))),
        "E" => match n {
            6 => Some(even(3, 72)),
            7 => Some(even(2, 126)),
            8 => Some(even(1, 240)),
            _ => None,
        },
        _ => None,
    }
}

/// Catalog entry with its invariants. Base names are checked against the
/// closed-form determinant, minimum and root count.
pub fn make(name: &str) -> Result<CatalogEntry> {
    let lattice = parse(name)?;
    let mins = lattice.minimal_vectors()?;
    let computed = Expected {
        det: lattice.determinant(),
        min_norm: mins.norm,
        min_count: mins.vectors.len(),
        even: lattice.is_even(),
    };
    if let Some(expected) = formula(name.trim()) {
        if expected != computed {
            return Err(LatticeError::Consistency(format!(
                "{name}: expected {expected:?}, constructed {computed:?}"
            )));
        }
    }
    Ok(CatalogEntry { name: name.trim().to_string(), lattice, expected: computed })
}

fn scaled_ints(g: &RationalMatrix, den: &BigInt) -> Result<Vec<Vec<i128>>> {
    let s = g.scale(&int_rat(den));
    let mut out = Vec::with_capacity(g.rows());
    for i in 0..g.rows() {
        let mut row = Vec::with_capacity(g.cols());
        for j in 0..g.cols() {
            row.push(
                s[(i, j)]
                    .to_integer()
                    .to_i128()
                    .ok_or_else(|| LatticeError::Resource("Gram entries too large".into()))?,
            );
        }
        out.push(row);
    }
    Ok(out)
}

fn dot(a: &[i128], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(x, &y)| x * y as i128).sum()
}

fn row_times(g: &[Vec<i128>], x: &[i64]) -> Vec<i128> {
    let n = g.len();
    (0..n).map(|j| (0..n).map(|i| x[i] as i128 * g[i][j]).sum()).collect()
}

/// Histogram of the pairings of `x·G` with every vector of a shell; an
/// isometry preserves it.
fn pairing_profile(row: &[i128], shell: &[Vec<i64>]) -> Vec<(i128, usize)> {
    let mut values: Vec<i128> = shell.iter().map(|y| dot(row, y)).collect();
    values.sort_unstable();
    let mut out: Vec<(i128, usize)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((w, c)) if *w == v => *c += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Whether integer rows extend to a basis of `Zⁿ`.
fn is_primitive(rows: &[Vec<i64>]) -> bool {
    smith_normal_form(&RationalMatrix::from_i64(rows))
        .is_ok_and(|s| s.invariants.len() == rows.len() && s.invariants.iter().all(One::is_one))
}

/// A basis of `l` made of short vectors, chosen greedily by norm while the
/// chosen set stays primitive. Falls back to the pairwise-reduced basis
/// when the short vectors run out.
fn short_frame(l: &Lattice) -> Result<Vec<Vec<i64>>> {
    let n = l.rank();
    let (reduced, transform) = enumerate::reduce(l.gram());
    let r0 = (0..n).map(|i| reduced[(i, i)].clone()).max().expect("positive rank");
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    for (x, _) in l.short_vectors(&r0)? {
        if x.iter().find(|&&c| c != 0).is_none_or(|&c| c < 0) {
            continue;
        }
        chosen.push(x);
        if is_primitive(&chosen) {
            if chosen.len() == n {
                return Ok(chosen);
            }
        } else {
            chosen.pop();
        }
    }
    Ok(transform)
}

struct Search<'a> {
    order: Vec<usize>,
    /// Scaled source Gram among frame vectors.
    source: Vec<Vec<i128>>,
    /// Target candidates grouped per source index (same norm).
    shells: Vec<Vec<usize>>,
    targets: &'a [Vec<i64>],
    /// `t·G₂` for every target.
    target_rows: &'a [Vec<i128>],
    frame_inv: RationalMatrix,
    nodes: &'a AtomicU64,
}

impl Search<'_> {
    fn run(&self, depth: usize, assigned: &mut Vec<Option<usize>>) -> Result<Option<RationalMatrix>> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) > NODE_BUDGET {
            return Err(LatticeError::Resource("isometry search budget exceeded".into()));
        }
        if depth == self.order.len() {
            return Ok(self.leaf(assigned));
        }
        let i = self.order[depth];
        for &t in &self.shells[i] {
            let ok = self.order[..depth].iter().all(|&j| {
                let u = assigned[j].expect("assigned earlier");
                u != t && dot(&self.target_rows[t], &self.targets[u]) == self.source[i][j]
            });
            if !ok {
                continue;
            }
            assigned[i] = Some(t);
            if let Some(x) = self.run(depth + 1, assigned)? {
                return Ok(Some(x));
            }
        }
        assigned[i] = None;
        Ok(None)
    }

    fn leaf(&self, assigned: &[Option<usize>]) -> Option<RationalMatrix> {
        let rows: Vec<Vec<i64>> =
            assigned.iter().map(|a| self.targets[a.expect("complete")].clone()).collect();
        let images = RationalMatrix::from_i64(&rows);
        let x = &self.frame_inv * &images;
        x.is_integral().then_some(x)
    }
}

/// Searches for an isometry `L₁ → L₂`. Returns `X` with `X·G₂·Xᵀ = G₁`
/// (rows are images of `L₁`'s basis in `L₂` coordinates), or `None` when
/// the exhaustive search proves the lattices are not isometric.
pub fn isometric(l1: &Lattice, l2: &Lattice) -> Result<Option<RationalMatrix>> {
    let n = l1.rank();
    if n != l2.rank() {
        return Ok(None);
    }
    if n > ORACLE_RANK_LIMIT {
        return Err(LatticeError::Resource(format!("rank {n} exceeds {ORACLE_RANK_LIMIT}")));
    }
    if n == 0 {
        return Ok(Some(RationalMatrix::zeros(0, 0)));
    }
    if l1.determinant() != l2.determinant() {
        return Ok(None);
    }
    let (m1, m2) = (l1.minimal_vectors()?, l2.minimal_vectors()?);
    if m1.norm != m2.norm || m1.vectors.len() != m2.vectors.len() {
        return Ok(None);
    }

    let frame = short_frame(l1)?;
    let frame_m = RationalMatrix::from_i64(&frame);
    let frame_inv = invert(&frame_m)?;
    let den = l1.gram().common_denominator() * l2.gram().common_denominator();
    let g1 = scaled_ints(l1.gram(), &den)?;
    let g2 = scaled_ints(l2.gram(), &den)?;
    let frame_rows: Vec<Vec<i128>> = frame.iter().map(|x| row_times(&g1, x)).collect();
    let source: Vec<Vec<i128>> =
        frame_rows.iter().map(|r| frame.iter().map(|y| dot(r, y)).collect()).collect();

    let max_norm = (0..n).map(|i| source[i][i]).max().expect("positive rank");
    let bound = Rational::new(BigInt::from(max_norm), den.clone());
    let targets: Vec<Vec<i64>> = l2.short_vectors(&bound)?.into_iter().map(|(x, _)| x).collect();
    let target_rows: Vec<Vec<i128>> = targets.iter().map(|t| row_times(&g2, t)).collect();
    let target_norms: Vec<i128> =
        targets.iter().zip(&target_rows).map(|(t, r)| dot(r, t)).collect();
    let sources: Vec<Vec<i64>> = l1.short_vectors(&bound)?.into_iter().map(|(x, _)| x).collect();
    if sources.len() != targets.len() {
        return Ok(None);
    }
    let source_rows: Vec<Vec<i128>> = sources.iter().map(|x| row_times(&g1, x)).collect();
    let frame_prints: Vec<Vec<(i128, usize)>> = frame_rows.iter().map(|r| pairing_profile(r, &sources)).collect();
    let target_prints: Vec<Vec<(i128, usize)>> = target_rows.iter().map(|r| pairing_profile(r, &targets)).collect();
    let mut source_prints: Vec<Vec<(i128, usize)>> =
        source_rows.iter().map(|r| pairing_profile(r, &sources)).collect();
    let mut sorted_targets = target_prints.clone();
    source_prints.sort();
    sorted_targets.sort();
    if source_prints != sorted_targets {
        return Ok(None);
    }
    let shells: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..targets.len())
                .filter(|&t| target_norms[t] == source[i][i] && target_prints[t] == frame_prints[i])
                .collect()
        })
        .collect();
    if shells.iter().any(Vec::is_empty) {
        return Ok(None);
    }

    // Most constrained first: small shells, then many nonzero pairings with
    // vectors already placed.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut left: Vec<usize> = (0..n).collect();
    while !left.is_empty() {
        let score = |i: usize| {
            let links = order.iter().filter(|&&j| source[i][j] != 0).count();
            (std::cmp::Reverse(links), shells[i].len(), i)
        };
        let pos = (0..left.len()).min_by_key(|&p| score(left[p])).expect("nonempty");
        order.push(left.remove(pos));
    }

    let nodes = AtomicU64::new(0);
    let search = Search {
        order: order.clone(),
        source,
        shells,
        targets: &targets,
        target_rows: &target_rows,
        frame_inv,
        nodes: &nodes,
    };
    // −1 is always an isometry, so the first image can be taken up to sign.
    let first = order[0];
    let starts: Vec<usize> = search.shells[first]
        .iter()
        .copied()
        .filter(|&t| targets[t].iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
        .collect();
    let found = starts.par_iter().find_map_first(|&t| {
        let mut assigned = vec![None; n];
        assigned[first] = Some(t);
        search.run(1, &mut assigned).transpose()
    });
    match found {
        Some(Ok(x)) => {
            debug_assert!(&(&x * l2.gram()) * &x.transpose() == *l1.gram());
            Ok(Some(x))
        }
        Some(Err(e)) => Err(e),
        None => Ok(None),
    }
}

/// Orthogonal basis search: pairwise-orthogonal vectors of norm at most
/// `det/μ^(n−1)` whose norms multiply to `det` form a basis.
pub fn is_rectangular(l: &Lattice) -> Result<Option<(Vec<Rational>, RationalMatrix)>> {
    let n = l.rank();
    if n == 0 {
        return Ok(Some((Vec::new(), RationalMatrix::zeros(0, 0))));
    }
    let det = l.determinant();
    let mu = l.minimal_vectors()?.norm;
    let bound = &det / num_traits::pow(mu.clone(), n - 1);
    let hits: Vec<enumerate::Hit> = l
        .short_vectors(&bound)?
        .into_iter()
        .filter(|(x, _)| x.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
        .collect();
    let vs: Vec<Vec<Rational>> =
        hits.iter().map(|(x, _)| x.iter().map(|&c| rat(c)).collect()).collect();
    let rows: Vec<Vec<Rational>> = vs.iter().map(|v| l.gram().left_apply(v)).collect();
    let inner = |a: usize, b: usize| -> Rational {
        rows[a].iter().zip(&vs[b]).map(|(x, y)| x * y).sum()
    };

    struct Dfs<'a> {
        n: usize,
        det: &'a Rational,
        hits: &'a [enumerate::Hit],
        inner: &'a dyn Fn(usize, usize) -> Rational,
        nodes: u64,
    }
    impl Dfs<'_> {
        fn go(&mut self, start: usize, picked: &mut Vec<usize>, prod: &Rational) -> Result<bool> {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return Err(LatticeError::Resource("rectangularity search budget exceeded".into()));
            }
            if picked.len() == self.n {
                return Ok(prod == self.det);
            }
            let remaining = self.n - picked.len();
            for c in start..self.hits.len() {
                let nc = &self.hits[c].1;
                let p = prod * nc;
                let floor = &p * num_traits::pow(nc.clone(), remaining - 1);
                if floor > *self.det {
                    break;
                }
                if picked.iter().any(|&q| !(self.inner)(q, c).is_zero()) {
                    continue;
                }
                picked.push(c);
                if self.go(c + 1, picked, &p)? {
                    return Ok(true);
                }
                picked.pop();
            }
            Ok(false)
        }
    }
    let mut dfs = Dfs { n, det: &det, hits: &hits, inner: &inner, nodes: 0 };
    let mut picked = Vec::new();
    if !dfs.go(0, &mut picked, &Rational::one())? {
        return Ok(None);
    }
    let diag: Vec<Rational> = picked.iter().map(|&c| hits[c].1.clone()).collect();
    let x = RationalMatrix::from_i64(&picked.iter().map(|&c| hits[c].0.clone()).collect::<Vec<_>>());
    if &(&x * l.gram()) * &x.transpose() != RationalMatrix::diagonal(&diag) {
        return Err(LatticeError::Consistency("orthogonal frame does not re-validate".into()));
    }
    Ok(Some((diag, x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    E,
    D,
    A,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Component {
    kind: Kind,
    n: usize,
}

impl Component {
    fn det(self) -> i64 {
        match self.kind {
            Kind::Z => 1,
            Kind::A => self.n as i64 + 1,
            Kind::D => 4,
            Kind::E => 9 - self.n as i64,
        }
    }

    /// Minimum norm and number of minimal vectors.
    fn minimum(self) -> (i64, usize) {
        let n = self.n;
        match self.kind {
            Kind::Z => (1, 2),
            Kind::A => (2, n * (n + 1)),
            Kind::D => (2, 2 * n * (n - 1)),
            Kind::E => (2, [72, 126, 240][n - 6]),
        }
    }

    fn label(self) -> String {
        match self.kind {
            Kind::Z => "Z".into(),
            Kind::A => format!("A{}", self.n),
            Kind::D => format!("D{}", self.n),
            Kind::E => format!("E{}", self.n),
        }
    }
}

fn components_of_rank(r: usize) -> Vec<Component> {
    let mut out = Vec::new();
    if (6..=8).contains(&r) {
        out.push(Component { kind: Kind::E, n: r });
    }
    if r >= 4 {
        out.push(Component { kind: Kind::D, n: r });
    }
    out.push(Component { kind: Kind::A, n: r });
    if r == 1 {
        out.push(Component { kind: Kind::Z, n: 1 });
    }
    out
}

/// Orthogonal sums of root lattices and copies of `Z` with total rank `r`,
/// listed with nonincreasing components.
fn root_sums(r: usize) -> Vec<Vec<Component>> {
    fn go(r: usize, max: Option<Component>, acc: &mut Vec<Component>, out: &mut Vec<Vec<Component>>) {
        if r == 0 {
            out.push(acc.clone());
            return;
        }
        for size in (1..=r).rev() {
            for c in components_of_rank(size) {
                let key = (std::cmp::Reverse(c.n), c.kind);
                if let Some(m) = max {
                    if key < (std::cmp::Reverse(m.n), m.kind) {
                        continue;
                    }
                }
                acc.push(c);
                go(r - size, Some(c), acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(r, None, &mut Vec::new(), &mut out);
    out
}

fn sum_name(parts: &[Component]) -> String {
    let mut terms: Vec<String> = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        let mut j = i;
        while j < parts.len() && parts[j] == parts[i] {
            j += 1;
        }
        let label = parts[i].label();
        terms.push(if j - i > 1 { format!("{label}^{}", j - i) } else { label });
        i = j;
    }
    terms.join("+")
}

/// Catalog names of rank `r` whose determinant, minimum and minimal count
/// match, including `√2`-rescaled versions.
pub fn candidates(r: usize, det: &Rational, mu: &Rational, count: usize) -> Vec<String> {
    let mut out = Vec::new();
    for scale in [1i64, 2] {
        let factor = num_traits::pow(rat(scale), r);
        for parts in root_sums(r) {
            let d: i64 = parts.iter().map(|c| c.det()).product();
            if rat(d) * &factor != *det {
                continue;
            }
            let m = parts.iter().map(|c| c.minimum().0).min().expect("nonempty");
            let cnt: usize = parts.iter().filter(|c| c.minimum().0 == m).map(|c| c.minimum().1).sum();
            if rat(m * scale) != *mu || cnt != count {
                continue;
            }
            let name = sum_name(&parts);
            out.push(if scale == 1 {
                name
            } else {
                name.split('+').map(|t| format!("sqrt2*{t}")).collect::<Vec<_>>().join("+")
            });
        }
    }
    // Tensor products that arise from order-3 isometries.
    for extra in ["A2(x)A2", "A2(x)D4"] {
        if let Ok(e) = parse(extra) {
            if e.rank() == r && e.determinant() == *det {
                out.push(extra.to_string());
            }
        }
    }
    out
}

/// Checks `l` against one catalog name with the oracle.
pub fn confirm(l: &Lattice, name: &str) -> Result<Option<Identification>> {
    let reference = parse(name)?;
    if reference.rank() != l.rank() {
        return Ok(None);
    }
    Ok(isometric(&reference, l)?.map(|x| Identification {
        verdict: Verdict::Named(name.to_string()),
        certificate: Some(x),
        reference_gram: Some(reference.gram().clone()),
    }))
}

fn rectangular(l: &Lattice) -> Result<Option<Identification>> {
    Ok(is_rectangular(l)?.map(|(diag, x)| {
        let mut order: Vec<usize> = (0..diag.len()).collect();
        order.sort_by(|&a, &b| diag[a].cmp(&diag[b]));
        let sorted: Vec<Rational> = order.iter().map(|&i| diag[i].clone()).collect();
        Identification {
            certificate: Some(x.select_rows(&order)),
            reference_gram: Some(RationalMatrix::diagonal(&sorted)),
            verdict: Verdict::Rectangular(sorted),
        }
    }))
}

/// Identifies an integral lattice: the small-rank classification table
/// first, then catalog root sums (plain and `√2`-rescaled), then
/// rectangularity, else unknown.
pub fn identify(l: &Lattice) -> Result<Identification> {
    if !l.is_integral() {
        return Err(LatticeError::Precondition("identify needs an integral lattice".into()));
    }
    let r = l.rank();
    if r == 0 || r > ORACLE_RANK_LIMIT {
        return Ok(Identification::unknown());
    }
    let det = l.determinant();
    let even = l.is_even();
    let one = |k: i64| det == rat(k);

    let mut table: Vec<String> = Vec::new();
    let mut rect_first = false;
    if one(1) && r <= 8 {
        table.push(if even && r == 8 { "E8".into() } else { format!("Z{r}") });
    }
    if one(2) && r <= 7 {
        rect_first = true;
        if r == 7 {
            table.push("E7".into());
        }
    }
    if one(3) && r <= 6 {
        rect_first = true;
        table.push(if r == 6 && even { "E6".into() } else if r >= 2 { format!("A2+Z{}", r - 2) } else { "Z(3)".into() });
    }
    if r == 3 && one(4) {
        rect_first = true;
        table.push("A3".into());
    }
    if r == 4 && even && one(4) {
        table.push("D4".into());
    }
    let table: Vec<String> = table.into_iter().map(|s| s.replace("+Z0", "")).collect();

    if rect_first {
        if let Some(id) = rectangular(l)? {
            return Ok(id);
        }
    }
    for name in &table {
        if let Some(id) = confirm(l, name)? {
            return Ok(id);
        }
    }
    let mins = l.minimal_vectors()?;
    for name in candidates(r, &det, &mins.norm, mins.vectors.len()) {
        if table.contains(&name) {
            continue;
        }
        if let Some(id) = confirm(l, &name)? {
            return Ok(id);
        }
    }
    if let Some(id) = rectangular(l)? {
        return Ok(id);
    }
    Ok(Identification::unknown())
}

/// `|det|` of a certificate, used to check it is unimodular.
pub fn certificate_is_unimodular(x: &RationalMatrix) -> bool {
    x.is_integral() && det_exact(x).is_ok_and(|d| d.abs().is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_determinants() {
        for (name, det) in [("A3", 4), ("D4", 4), ("D5", 4), ("E6", 3), ("E7", 2), ("E8", 1), ("Z3", 1)] {
            let e = make(name).unwrap();
            assert_eq!(e.expected.det, rat(det), "{name}");
        }
        assert_eq!(make("D4").unwrap().expected.min_count, 24);
    }

    #[test]
    fn a3_gram() {
        assert_eq!(
            root_a(3).gram(),
            &RationalMatrix::from_i64(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]])
        );
        assert_eq!(cubic(3).gram(), &RationalMatrix::identity(3));
    }

    #[test]
    fn grammar() {
        assert_eq!(parse("A1^3").unwrap().determinant(), rat(8));
        assert_eq!(parse("sqrt2*D5").unwrap().determinant(), rat(128));
        assert_eq!(parse("√2D4").unwrap().determinant(), rat(64));
        assert_eq!(parse("A2(x)D4").unwrap().determinant(), rat(1296));
        assert_eq!(parse("Z3+Z(2)").unwrap().determinant(), rat(2));
        assert_eq!(parse("A3+A1^3").unwrap().rank(), 6);
        assert!(matches!(parse("F4"), Err(LatticeError::Lookup(_))));
        assert!(matches!(parse("A0"), Err(LatticeError::Lookup(_))));
    }

    #[test]
    fn oracle_basics() {
        let a3 = root_a(3);
        let x = isometric(&a3, &a3).unwrap().unwrap();
        assert_eq!(&(&x * a3.gram()) * &x.transpose(), *a3.gram());
        assert!(isometric(&a3, &root_d(3)).unwrap().is_some());
        assert!(isometric(&root_a(4), &root_d(4)).unwrap().is_none());
    }

    #[test]
    fn rectangular_examples() {
        let (d, _) = is_rectangular(&cubic(3)).unwrap().unwrap();
        assert_eq!(d, vec![rat(1); 3]);
        assert!(is_rectangular(&root_a(2)).unwrap().is_none());
        let l = parse("Z3+Z(2)").unwrap();
        assert_eq!(is_rectangular(&l).unwrap().unwrap().0, vec![rat(1), rat(1), rat(1), rat(2)]);
    }

    #[test]
    fn identify_small() {
        let id = identify(&root_d(4)).unwrap();
        assert_eq!(id.name(), Some("D4"));
        assert!(id.revalidate(&root_d(4)));
        assert_eq!(identify(&cubic(5)).unwrap().name(), Some("Z5"));
        assert_eq!(identify(&e8()).unwrap().name(), Some("E8"));
        let id = identify(&root_a(2)).unwrap();
        assert_eq!(id.name(), Some("A2"));
    }
}
