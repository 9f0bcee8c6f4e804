//! The atom chain, its decomposition into atomistic/continuum/overlap
//! regions, and displacement-field containers.
//!
//! Atoms are indexed `0..=N` with unit lattice spacing. The global
//! boundary is the two-atom pairs `{0, 1}` and `{N-1, N}`; the interior is
//! `[2, N-2]`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AtcError, Result};

/// Inclusive, nonempty range of atom indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexRange {
    lo: usize,
    hi: usize,
}

impl IndexRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(AtcError::DomainTooSmall(format!("empty index range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn contains_range(&self, other: &IndexRange) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Which region a field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Global,
    Atomistic,
    Continuum,
    Overlap,
}

/// Displacements over a contiguous range of atoms, addressed by global index.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    lo: usize,
    values: Vec<f64>,
    tag: DomainTag,
}

impl DisplacementField {
    pub fn new(lo: usize, values: Vec<f64>, tag: DomainTag) -> Result<Self> {
        if values.is_empty() {
            return Err(AtcError::DomainTooSmall("field with no values".into()));
        }
        Ok(Self { lo, values, tag })
    }

    pub fn zeros(range: IndexRange, tag: DomainTag) -> Self {
        Self { lo: range.lo, values: vec![0.0; range.len()], tag }
    }

    pub fn from_fn(range: IndexRange, tag: DomainTag, f: impl Fn(usize) -> f64) -> Self {
        Self { lo: range.lo, values: range.iter().map(f).collect(), tag }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.lo + self.values.len() - 1
    }

    pub fn range(&self) -> IndexRange {
        IndexRange { lo: self.lo, hi: self.hi() }
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        i.checked_sub(self.lo).and_then(|k| self.values.get(k).copied())
    }

    /// Value at a signed index, with a range error instead of `None`.
    pub fn at(&self, i: i64) -> Result<f64> {
        if i < 0 {
            return Err(self.out_of_range(i));
        }
        self.get(i as usize).ok_or_else(|| self.out_of_range(i))
    }

    fn out_of_range(&self, index: i64) -> AtcError {
        AtcError::IndexOutOfRange { index, lo: self.lo, hi: self.hi() }
    }

    /// `(index, value)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.lo + k, v))
    }

    pub fn restrict(&self, range: IndexRange) -> Result<Self> {
        self.require(range)?;
        let start = range.lo - self.lo;
        Ok(Self { lo: range.lo, values: self.values[start..start + range.len()].to_vec(), tag: self.tag })
    }

    pub fn with_tag(mut self, tag: DomainTag) -> Self {
        self.tag = tag;
        self
    }

    /// Fails unless the field covers `range`.
    pub fn require(&self, range: IndexRange) -> Result<()> {
        if self.range().contains_range(&range) {
            Ok(())
        } else {
            Err(AtcError::DomainMismatch(format!("field on {} does not cover {}", self.range(), range)))
        }
    }

    /// Sum of squares over `range`.
    pub fn norm_sq_over(&self, range: IndexRange) -> Result<f64> {
        self.require(range)?;
        Ok(range.iter().map(|i| self[i] * self[i]).sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + scale * other` on this field's range; `other` must cover it.
    pub fn add_scaled(&self, scale: f64, other: &DisplacementField) -> Result<Self> {
        other.require(self.range())?;
        Ok(Self { lo: self.lo, values: self.iter().map(|(i, v)| v + scale * other[i]).collect(), tag: self.tag })
    }
}

impl Index<usize> for DisplacementField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i.checked_sub(self.lo).and_then(|k| self.values.get(k)) {
            Some(v) => v,
            None => panic!("index {i} outside field range {}", self.range()),
        }
    }
}

/// ℓ² distance between two fields over `range`.
pub fn distance_over(a: &DisplacementField, b: &DisplacementField, range: IndexRange) -> Result<f64> {
    a.require(range)?;
    b.require(range)?;
    Ok(range.iter().map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt())
}

/// Prescribed displacements on the global two-atom boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterBoundary {
    /// `(u_0, u_1)`
    pub left: [f64; 2],
    /// `(u_{N-1}, u_N)`
    pub right: [f64; 2],
}

impl OuterBoundary {
    pub const HOMOGENEOUS: OuterBoundary = OuterBoundary { left: [0.0; 2], right: [0.0; 2] };

    /// Boundary values of the uniform strain `u_i = i F`.
    pub fn uniform_strain(n: usize, strain: f64) -> Self {
        Self { left: [0.0, strain], right: [(n - 1) as f64 * strain, n as f64 * strain] }
    }

    pub fn is_homogeneous(&self) -> bool {
        *self == Self::HOMOGENEOUS
    }
}

impl Default for OuterBoundary {
    fn default() -> Self {
        Self::HOMOGENEOUS
    }
}

/// Dead-load description, materialized per atom by [`build_chain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ForceSpec {
    Zero,
    /// Single load at `site`.
    Point {
        site: usize,
        magnitude: f64,
    },
    /// `f_i = sin(m π i / N + phase)`.
    Sine {
        mode: f64,
        phase: f64,
    },
    /// `f_i = Σ c_j x^j` with `x = i / N`.
    Poly {
        coeffs: Vec<f64>,
    },
    /// One value per atom, `N + 1` entries.
    Table {
        values: Vec<f64>,
    },
}

impl ForceSpec {
    pub fn sine(mode: f64) -> Self {
        ForceSpec::Sine { mode, phase: 0.0 }
    }

    fn value(&self, n: usize, i: usize) -> f64 {
        let x = i as f64 / n as f64;
        match self {
            ForceSpec::Zero => 0.0,
            ForceSpec::Point { site, magnitude } => {
                if *site == i {
                    *magnitude
                } else {
                    0.0
                }
            }
            ForceSpec::Sine { mode, phase } => (mode * PI * x + phase).sin(),
            ForceSpec::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            ForceSpec::Table { values } => values[i],
        }
    }
}

impl FromStr for ForceSpec {
    type Err = AtcError;

    /// Parses `zero`, `point:SITE:MAG`, `sine:M[:PHASE]`, `poly:C0,C1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| AtcError::InvalidForce(format!("{msg} in '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("bad number"));
        let mut parts = s.trim().splitn(2, ':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest = parts.next();
        match (kind.as_str(), rest) {
            ("zero", None) => Ok(ForceSpec::Zero),
            ("point", Some(rest)) => {
                let (site, mag) = rest.split_once(':').ok_or_else(|| bad("expected point:SITE:MAG"))?;
                let site = site.trim().parse::<usize>().map_err(|_| bad("bad site"))?;
                Ok(ForceSpec::Point { site, magnitude: num(mag)? })
            }
            ("sine", Some(rest)) => match rest.split_once(':') {
                Some((m, phase)) => Ok(ForceSpec::Sine { mode: num(m)?, phase: num(phase)? }),
                None => Ok(ForceSpec::sine(num(rest)?)),
            },
            ("poly", Some(rest)) => {
                let coeffs = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Ok(ForceSpec::Poly { coeffs })
            }
            _ => Err(bad("unknown force kind")),
        }
    }
}

/// The global problem: chain size, spring constants, dead load and outer
/// boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    n: usize,
    k1: f64,
    k2: f64,
    force: Vec<f64>,
    boundary: OuterBoundary,
}

/// Validates the model parameters and materializes the load on every atom,
/// zeroing the four boundary atoms.
pub fn build_chain(n: usize, k1: f64, k2: f64, force: &ForceSpec) -> Result<ChainModel> {
    if n < 5 {
        return Err(AtcError::InvalidModel(format!("N = {n} < 5 leaves no interior")));
    }
    if !(k1.is_finite() && k2.is_finite()) {
        return Err(AtcError::InvalidModel("spring constants must be finite".into()));
    }
    if k1 <= 0.0 {
        return Err(AtcError::InvalidModel(format!("k1 = {k1} must be positive")));
    }
    if k2 >= 0.0 {
        return Err(AtcError::InvalidModel(format!("k2 = {k2} must be negative")));
    }
    if k1 + 4.0 * k2 <= 0.0 {
        return Err(AtcError::InvalidModel(format!("k1 + 4 k2 = {} must be positive for stability", k1 + 4.0 * k2)));
    }
    match force {
        ForceSpec::Table { values } if values.len() != n + 1 => {
            return Err(AtcError::InvalidForce(format!(
                "force table has {} entries, expected N + 1 = {}",
                values.len(),
                n + 1
            )))
        }
        ForceSpec::Point { site, .. } if *site > n => {
            return Err(AtcError::InvalidForce(format!("point load site {site} > N = {n}")))
        }
        _ => {}
    }
    let mut values: Vec<f64> = (0..=n).map(|i| force.value(n, i)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AtcError::InvalidForce("non-finite load value".into()));
    }
    for i in [0, 1, n - 1, n] {
        values[i] = 0.0;
    }
    Ok(ChainModel { n, k1, k2, force: values, boundary: OuterBoundary::HOMOGENEOUS })
}

impl ChainModel {
    /// `N`; atoms are `0..=N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// Cauchy-Born continuum stiffness `k1 + 4 k2`.
    pub fn kc(&self) -> f64 {
        self.k1 + 4.0 * self.k2
    }

    pub fn force(&self) -> &[f64] {
        &self.force
    }

    pub fn boundary(&self) -> OuterBoundary {
        self.boundary
    }

    pub fn domain(&self) -> IndexRange {
        IndexRange { lo: 0, hi: self.n }
    }

    pub fn interior(&self) -> IndexRange {
        IndexRange { lo: 2, hi: self.n - 2 }
    }

    pub fn is_unloaded(&self) -> bool {
        self.force.iter().all(|&f| f == 0.0)
    }

    pub fn with_outer_boundary(mut self, boundary: OuterBoundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Same chain with the load multiplied by `factor`.
    pub fn with_scaled_force(mut self, factor: f64) -> Self {
        self.force.iter_mut().for_each(|f| *f *= factor);
        self
    }

    /// Same springs, no load, homogeneous outer boundary.
    pub fn unloaded(&self) -> Self {
        Self { n: self.n, k1: self.k1, k2: self.k2, force: vec![0.0; self.n + 1], boundary: OuterBoundary::HOMOGENEOUS }
    }
}

/// Atomistic region `[0, L]`, continuum region `[K, N-1]` (single-atom
/// boundaries at `K` and `N-1`), overlap `[K, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    n: usize,
    k: usize,
    l: usize,
}

pub fn decompose(chain: &ChainModel, k: usize, l: usize) -> Result<Decomposition> {
    Decomposition::new(chain.n(), k, l)
}

impl Decomposition {
    pub fn new(n: usize, k: usize, l: usize) -> Result<Self> {
        let fail = |msg: String| Err(AtcError::InvalidDecomposition(msg));
        if !(0 < k && k < l && l < n) {
            return fail(format!("need 0 < K < L < N, got K = {k}, L = {l}, N = {n}"));
        }
        if l - k < 4 {
            return fail(format!("L - K = {} < 4: overlap interior [{}, {}] is empty", l - k, k + 2, l - 2));
        }
        if k < 2 {
            return fail(format!("K = {k} < 2: atomistic interior would not reach the overlap"));
        }
        if l + 2 > n {
            return fail(format!("L = {l} > N - 2 = {}: continuum interior is empty", n - 2));
        }
        Ok(Self { n, k, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// `N̄ = N - 1`, the continuum's true boundary atom.
    pub fn n_bar(&self) -> usize {
        self.n - 1
    }

    /// Overlap ratio `(L - K) / L`.
    pub fn gamma(&self) -> f64 {
        (self.l - self.k) as f64 / self.l as f64
    }

    pub fn overlap_width(&self) -> usize {
        self.l - self.k
    }

    pub fn global(&self) -> IndexRange {
        IndexRange { lo: 0, hi: self.n }
    }

    pub fn atomistic(&self) -> IndexRange {
        IndexRange { lo: 0, hi: self.l }
    }

    pub fn atomistic_interior(&self) -> IndexRange {
        IndexRange { lo: 2, hi: self.l - 2 }
    }

    pub fn atomistic_left(&self) -> IndexRange {
        IndexRange { lo: 0, hi: 1 }
    }

    pub fn atomistic_right(&self) -> IndexRange {
        IndexRange { lo: self.l - 1, hi: self.l }
    }

    pub fn continuum(&self) -> IndexRange {
        IndexRange { lo: self.k, hi: self.n - 1 }
    }

    pub fn continuum_interior(&self) -> IndexRange {
        IndexRange { lo: self.k + 1, hi: self.n - 2 }
    }

    pub fn continuum_left(&self) -> IndexRange {
        IndexRange { lo: self.k, hi: self.k }
    }

    pub fn continuum_right(&self) -> IndexRange {
        IndexRange { lo: self.n - 1, hi: self.n - 1 }
    }

    /// `Ω_c \ Ω_o = [L+1, N-1]`.
    pub fn continuum_only(&self) -> IndexRange {
        IndexRange { lo: self.l + 1, hi: self.n - 1 }
    }

    pub fn overlap(&self) -> IndexRange {
        IndexRange { lo: self.k, hi: self.l }
    }

    /// Overlap atoms strictly between the continuum control at `K` and the
    /// atomistic control pair `{L-1, L}`.
    pub fn overlap_interior(&self) -> IndexRange {
        IndexRange { lo: self.k + 1, hi: self.l - 2 }
    }

    /// Continuum region with the original two-atom boundaries, `[K, N]`.
    pub fn two_node_continuum(&self) -> IndexRange {
        IndexRange { lo: self.k, hi: self.n }
    }

    /// Interior `[K+2, N-2]` of the two-atom-boundary continuum region.
    pub fn two_node_continuum_interior(&self) -> IndexRange {
        IndexRange { lo: self.k + 2, hi: self.n - 2 }
    }
}

/// Advisory check of the size assumptions on `L` and `γ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub p: f64,
    pub c: f64,
    pub l: usize,
    pub l_limit: f64,
    pub size_ok: bool,
    pub gamma: f64,
    pub gamma_lower: f64,
    pub gamma_ok: bool,
    pub warnings: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.size_ok && self.gamma_ok
    }
}

pub const DEFAULT_ASSUMPTION_CONSTANT: f64 = 2.0;

/// Reports whether `L ≤ c N^{1/p}` and `3/L < γ < 1`. Never fails.
pub fn validate_assumptions(decomp: &Decomposition, p: f64, c: f64) -> AssumptionReport {
    let mut warnings = Vec::new();
    if !(p > 1.0) {
        warnings.push(format!("p = {p} should exceed 1"));
    }
    let l_limit = c * (decomp.n as f64).powf(1.0 / p);
    let size_ok = decomp.l as f64 <= l_limit;
    if !size_ok {
        warnings.push(format!("L = {} exceeds c N^(1/p) = {l_limit:.4}", decomp.l));
    }
    let gamma = decomp.gamma();
    let gamma_lower = 3.0 / decomp.l as f64;
    let gamma_ok = gamma_lower < gamma && gamma < 1.0;
    if !gamma_ok {
        warnings.push(format!("gamma = {gamma:.4} outside ({gamma_lower:.4}, 1)"));
    }
    AssumptionReport { p, c, l: decomp.l, l_limit, size_ok, gamma, gamma_lower, gamma_ok, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K2: f64 = -1.0 / 6.0;

    #[test]
    fn zero_load_chain() {
        let chain = build_chain(10, 1.0, K2, &ForceSpec::Zero).unwrap();
        assert_eq!(chain.force().len(), 11);
        assert!(chain.is_unloaded());
        assert!((chain.kc() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_marginal_stability() {
        let err = build_chain(10, 1.0, -0.25, &ForceSpec::Zero).unwrap_err();
        assert!(matches!(err, AtcError::InvalidModel(ref m) if m.contains("k1 + 4 k2")));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_chain(10, 0.0, K2, &ForceSpec::Zero).is_err());
        assert!(build_chain(10, 1.0, 0.0, &ForceSpec::Zero).is_err());
        assert!(build_chain(4, 1.0, K2, &ForceSpec::Zero).is_err());
        let table = ForceSpec::Table { values: vec![0.0; 10] };
        assert!(matches!(build_chain(10, 1.0, K2, &table), Err(AtcError::InvalidForce(_))));
    }

    #[test]
    fn sine_load_zeroed_on_boundary_atoms() {
        let chain = build_chain(100, 1.0, K2, &ForceSpec::sine(1.0)).unwrap();
        let f = chain.force();
        assert_eq!([f[0], f[1], f[99], f[100]], [0.0; 4]);
        assert!((f[50] - 1.0).abs() < 1e-15);
        assert!((f[2] - (2.0 * PI / 100.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn parses_force_specs() {
        assert_eq!("zero".parse::<ForceSpec>().unwrap(), ForceSpec::Zero);
        assert_eq!("point:25:1.0".parse::<ForceSpec>().unwrap(), ForceSpec::Point { site: 25, magnitude: 1.0 });
        assert_eq!("sine:2".parse::<ForceSpec>().unwrap(), ForceSpec::sine(2.0));
        assert_eq!("sine:2:0.5".parse::<ForceSpec>().unwrap(), ForceSpec::Sine { mode: 2.0, phase: 0.5 });
        assert_eq!("poly:1,0,-1".parse::<ForceSpec>().unwrap(), ForceSpec::Poly { coeffs: vec![1.0, 0.0, -1.0] });
        assert!("sine".parse::<ForceSpec>().is_err());
        assert!("cosine:1".parse::<ForceSpec>().is_err());
        assert!("point:x:1".parse::<ForceSpec>().is_err());
    }

    #[test]
    fn poly_load_uses_scaled_coordinate() {
        let spec = ForceSpec::Poly { coeffs: vec![1.0, 2.0, 3.0] };
        let chain = build_chain(10, 1.0, K2, &spec).unwrap();
        let x: f64 = 0.5;
        assert!((chain.force()[5] - (1.0 + 2.0 * x + 3.0 * x * x)).abs() < 1e-15);
    }

    #[test]
    fn decomposition_sets() {
        let chain = build_chain(100, 1.0, K2, &ForceSpec::Zero).unwrap();
        let d = decompose(&chain, 10, 20).unwrap();
        assert_eq!(d.gamma(), 0.5);
        assert_eq!(d.overlap(), IndexRange::new(10, 20).unwrap());
        assert_eq!(d.atomistic_right(), IndexRange::new(19, 20).unwrap());
        assert_eq!(d.continuum_left(), IndexRange::new(10, 10).unwrap());
        assert_eq!(d.continuum_right(), IndexRange::new(99, 99).unwrap());
        assert_eq!(d.overlap().len(), 11);
    }

    #[test]
    fn decomposition_rejects_thin_overlap() {
        let err = Decomposition::new(100, 18, 20).unwrap_err();
        assert!(matches!(err, AtcError::InvalidDecomposition(ref m) if m.contains("L - K = 2")));
        assert!(Decomposition::new(100, 1, 20).is_err());
        assert!(Decomposition::new(100, 10, 99).is_err());
        assert!(Decomposition::new(100, 20, 10).is_err());
    }

    #[test]
    fn boundary_and_interior_partition_subdomains() {
        for (n, k, l) in [(40, 10, 20), (100, 2, 6), (8, 2, 6), (1000, 30, 60)] {
            let d = Decomposition::new(n, k, l).unwrap();
            let mut atoms: Vec<usize> = d.atomistic_left().iter().collect();
            atoms.extend(d.atomistic_interior().iter());
            atoms.extend(d.atomistic_right().iter());
            assert_eq!(atoms, d.atomistic().iter().collect::<Vec<_>>());

            let mut cont: Vec<usize> = d.continuum_left().iter().collect();
            cont.extend(d.continuum_interior().iter());
            cont.extend(d.continuum_right().iter());
            assert_eq!(cont, d.continuum().iter().collect::<Vec<_>>());

            let mut over: Vec<usize> = d.continuum_left().iter().collect();
            over.extend(d.overlap_interior().iter());
            over.extend(d.atomistic_right().iter());
            assert_eq!(over, d.overlap().iter().collect::<Vec<_>>());
            assert_eq!((d.gamma() * l as f64).round() as usize, l - k);
        }
    }

    #[test]
    fn assumption_checks() {
        let d = Decomposition::new(40, 10, 20).unwrap();
        assert!(validate_assumptions(&d, 2.0, 2.0).gamma_ok);

        let d = Decomposition::new(100, 10, 20).unwrap();
        assert!(validate_assumptions(&d, 2.0, 2.0).passed());

        let d = Decomposition::new(100, 25, 50).unwrap();
        let r = validate_assumptions(&d, 2.0, 2.0);
        assert!(!r.size_ok);
        assert_eq!(r.warnings.len(), 1);

        let d = Decomposition::new(10000, 50, 100).unwrap();
        assert!(validate_assumptions(&d, 2.0, 2.0).size_ok);
    }

    #[test]
    fn field_indexing() {
        let r = IndexRange::new(3, 6).unwrap();
        let u = DisplacementField::from_fn(r, DomainTag::Overlap, |i| i as f64);
        assert_eq!(u[5], 5.0);
        assert_eq!(u.get(2), None);
        assert!(u.at(7).is_err());
        assert!(u.at(-1).is_err());
        assert_eq!(u.restrict(IndexRange::new(4, 5).unwrap()).unwrap().values(), &[4.0, 5.0]);
        assert!(u.restrict(IndexRange::new(2, 5).unwrap()).is_err());
    }
}
