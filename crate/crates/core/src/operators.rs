//! Finite-difference stencils and assembly of the atomistic and continuum
//! operators on an interior window, with Dirichlet data folded into the
//! right-hand side.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, DisplacementField, IndexRange};

/// `(Δ₁u)_i = u_{i-1} - 2u_i + u_{i+1}`.
pub fn delta1(u: &DisplacementField, i: usize) -> Result<f64> {
    let i = i as i64;
    Ok(u.at(i - 1)? - 2.0 * u.at(i)? + u.at(i + 1)?)
}

/// `(Δ₂u)_i = u_{i-2} - 2u_i + u_{i+2}`.
pub fn delta2(u: &DisplacementField, i: usize) -> Result<f64> {
    let i = i as i64;
    Ok(u.at(i - 2)? - 2.0 * u.at(i)? + u.at(i + 2)?)
}

/// `Δ₁(Δ₁u)_i`, by applying the first-neighbor stencil twice.
pub fn delta1_squared(u: &DisplacementField, i: usize) -> Result<f64> {
    if i == 0 {
        return Err(AtcError::IndexOutOfRange { index: -1, lo: u.lo(), hi: u.hi() });
    }
    Ok(delta1(u, i - 1)? - 2.0 * delta1(u, i)? + delta1(u, i + 1)?)
}

/// `(Au)_i = -(k1 Δ₁u + k2 Δ₂u)_i`.
pub fn apply_atomistic(chain: &ChainModel, u: &DisplacementField, i: usize) -> Result<f64> {
    Ok(-(chain.k1() * delta1(u, i)? + chain.k2() * delta2(u, i)?))
}

/// `(Cu)_i = -k_c (Δ₁u)_i`.
pub fn apply_continuum(chain: &ChainModel, u: &DisplacementField, i: usize) -> Result<f64> {
    Ok(-chain.kc() * delta1(u, i)?)
}

/// Dirichlet data for the five-point stencil: the two atoms left of the
/// window and the two atoms right of it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomisticBoundary {
    pub left: [f64; 2],
    pub right: [f64; 2],
}

/// Dirichlet data for the three-point stencil: one atom on each side.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContinuumBoundary {
    pub left: f64,
    pub right: f64,
}

/// Symmetric banded system over the unknowns of an interior window.
///
/// Only the lower triangle is stored: `bands[d][r]` holds `M[r][r - d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSystem {
    offset: usize,
    bands: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    bonds: Option<BondForm>,
}

/// The same operator as a sum of spring forces `c_d [(u_i - u_{i-d}) + (u_i - u_{i+d})]`,
/// kept so residuals annihilate translations exactly. Assembling the
/// diagonal rounds `Σ 2c_d`, which breaks that for the stored bands.
#[derive(Debug, Clone, PartialEq)]
struct BondForm {
    /// `c_d` for `d = 1..=p`.
    springs: Vec<f64>,
    /// `p` Dirichlet values on each side, in index order.
    left: Vec<f64>,
    right: Vec<f64>,
    load: Vec<f64>,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    (s, (a - (s - bv)) + (b - bv))
}

/// Compensated accumulator: `hi + lo` carries about twice the working precision.
#[derive(Default)]
struct Dot2 {
    hi: f64,
    lo: f64,
}

impl Dot2 {
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    /// Adds `a * x` with the product's rounding error.
    fn add_product(&mut self, a: f64, x: f64) {
        let p = a * x;
        self.add(p);
        self.lo += a.mul_add(x, -p);
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

impl BandedSystem {
    /// Builds a system with constant diagonals `stencil[d]` on band `d`.
    fn constant(offset: usize, size: usize, stencil: &[f64], rhs: Vec<f64>) -> Self {
        let bands = stencil
            .iter()
            .enumerate()
            .map(|(d, &c)| (0..size).map(|r| if r >= d { c } else { 0.0 }).collect())
            .collect();
        Self { offset, bands, rhs, bonds: None }
    }

    /// Builds a system from lower bands, `bands[d][r] = M[r][r - d]`.
    pub fn from_bands(offset: usize, bands: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        if rhs.is_empty() || bands.is_empty() || bands.iter().any(|b| b.len() != rhs.len()) {
            return Err(AtcError::DomainMismatch("band lengths must match the right-hand side".into()));
        }
        Ok(Self { offset, bands, rhs, bonds: None })
    }

    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// Global atom index of row 0.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn window(&self) -> IndexRange {
        IndexRange::new(self.offset, self.offset + self.size() - 1).expect("nonempty system")
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    /// Entry `(row, col)` of the full symmetric matrix.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        self.bands.get(r - c).map_or(0.0, |band| band[r])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        let p = self.half_bandwidth();
        (0..n)
            .map(|r| {
                let lo = r.saturating_sub(p);
                let hi = (r + p).min(n - 1);
                (lo..=hi).map(|c| self.entry(r, c) * x[c]).sum()
            })
            .collect()
    }

    /// `b - M x` accumulated in twice the working precision (error-free
    /// products via FMA and TwoSum), then rounded once. Systems from the
    /// assemblers evaluate `M x` in bond form.
    pub fn residual_compensated(&self, x: &[f64]) -> Vec<f64> {
        if let Some(bonds) = &self.bonds {
            return bonds.residual(x);
        }
        let n = self.size();
        let p = self.half_bandwidth();
        (0..n)
            .map(|r| {
                let mut acc = Dot2 { hi: self.rhs[r], lo: 0.0 };
                let lo = r.saturating_sub(p);
                for (c, &xc) in x.iter().enumerate().take((r + p).min(n - 1) + 1).skip(lo) {
                    acc.add_product(-self.entry(r, c), xc);
                }
                acc.value()
            })
            .collect()
    }

    /// `max_r Σ_c |M[r][c]|`.
    pub fn norm_inf(&self) -> f64 {
        let n = self.size();
        let p = self.half_bandwidth();
        (0..n)
            .map(|r| (r.saturating_sub(p)..=(r + p).min(n - 1)).map(|c| self.entry(r, c).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |r, c| self.entry(r, c))
    }

    /// Nonzero `(row, col, value)` triplets in global atom indices.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let n = self.size();
        let p = self.half_bandwidth();
        let mut out = Vec::new();
        for r in 0..n {
            for c in r.saturating_sub(p)..=(r + p).min(n - 1) {
                let v = self.entry(r, c);
                if v != 0.0 {
                    out.push((r + self.offset, c + self.offset, v));
                }
            }
        }
        out
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(AtcError::MissingBoundary(what.into()))
    }
}

impl BondForm {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let p = self.springs.len();
        let u: Vec<f64> = self.left.iter().chain(x).chain(&self.right).copied().collect();
        (0..x.len())
            .map(|r| {
                let i = r + p;
                let mut acc = Dot2 { hi: self.load[r], lo: 0.0 };
                for (d, &c) in self.springs.iter().enumerate().map(|(d, c)| (d + 1, c)) {
                    for j in [i - d, i + d] {
                        let (diff, err) = two_sum(u[i], -u[j]);
                        acc.add_product(-c, diff);
                        acc.add_product(-c, err);
                    }
                }
                acc.value()
            })
            .collect()
    }
}

/// Pentadiagonal system for `A u = f` on `window`, with two boundary atoms
/// on each side taken from `bc`.
pub fn assemble_atomistic(chain: &ChainModel, window: IndexRange, bc: &AtomisticBoundary) -> Result<BandedSystem> {
    if window.lo() < 2 || window.hi() + 2 > chain.n() {
        return Err(AtcError::DomainTooSmall(format!(
            "atomistic window {window} needs two boundary atoms on each side within [0, {}]",
            chain.n()
        )));
    }
    check_finite(&bc.left, "atomistic left pair")?;
    check_finite(&bc.right, "atomistic right pair")?;
    let (k1, k2) = (chain.k1(), chain.k2());
    let n = window.len();
    let lo = window.lo();
    let mut rhs: Vec<f64> = window.iter().map(|i| chain.force()[i]).collect();
    // Coupling to atoms outside the window: offsets -2, -1 on the left and
    // +1, +2 on the right, with coefficients -k2 and -k1.
    rhs[0] += k2 * bc.left[0] + k1 * bc.left[1];
    if n > 1 {
        rhs[1] += k2 * bc.left[1];
        rhs[n - 2] += k2 * bc.right[0];
    }
    rhs[n - 1] += k1 * bc.right[0] + k2 * bc.right[1];
    let load = window.iter().map(|i| chain.force()[i]).collect();
    let mut system = BandedSystem::constant(lo, n, &[2.0 * k1 + 2.0 * k2, -k1, -k2], rhs);
    system.bonds = Some(BondForm { springs: vec![k1, k2], left: bc.left.to_vec(), right: bc.right.to_vec(), load });
    Ok(system)
}

/// Tridiagonal system for `C u = f` on `window`, one boundary atom on each
/// side.
pub fn assemble_continuum(chain: &ChainModel, window: IndexRange, bc: &ContinuumBoundary) -> Result<BandedSystem> {
    if window.lo() < 1 || window.hi() + 1 > chain.n() {
        return Err(AtcError::DomainTooSmall(format!(
            "continuum window {window} needs a boundary atom on each side within [0, {}]",
            chain.n()
        )));
    }
    check_finite(&[bc.left, bc.right], "continuum boundary")?;
    let kc = chain.kc();
    let n = window.len();
    let mut rhs: Vec<f64> = window.iter().map(|i| chain.force()[i]).collect();
    rhs[0] += kc * bc.left;
    rhs[n - 1] += kc * bc.right;
    let load = window.iter().map(|i| chain.force()[i]).collect();
    let mut system = BandedSystem::constant(window.lo(), n, &[2.0 * kc, -kc], rhs);
    system.bonds = Some(BondForm { springs: vec![kc], left: vec![bc.left], right: vec![bc.right], load });
    Ok(system)
}

/// Dense system assembled bond by bond from the interaction energy. Used to
/// cross-check the banded path.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    pub offset: usize,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl DenseSystem {
    pub fn solve(&self) -> Result<DVector<f64>> {
        let chol = self.matrix.clone().cholesky().ok_or_else(|| AtcError::Singular("dense Cholesky failed".into()))?;
        Ok(chol.solve(&self.rhs))
    }
}

/// Accumulates the Hessian of `Σ k/2 (u_b - u_a)²` over `bonds`, keeping rows
/// inside `window` and moving known boundary values to the right side.
fn dense_from_bonds(
    chain: &ChainModel,
    window: IndexRange,
    bonds: &[(usize, usize, f64)],
    known: impl Fn(usize) -> f64,
) -> DenseSystem {
    let n = window.len();
    let lo = window.lo();
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::from_iterator(n, window.iter().map(|i| chain.force()[i]));
    for &(a, b, k) in bonds {
        for (p, q) in [(a, b), (b, a)] {
            if !window.contains(p) {
                continue;
            }
            matrix[(p - lo, p - lo)] += k;
            if window.contains(q) {
                matrix[(p - lo, q - lo)] -= k;
            } else {
                rhs[p - lo] += k * known(q);
            }
        }
    }
    DenseSystem { offset: lo, matrix, rhs }
}

pub fn assemble_atomistic_dense(chain: &ChainModel, window: IndexRange, bc: &AtomisticBoundary) -> Result<DenseSystem> {
    if window.lo() < 2 || window.hi() + 2 > chain.n() {
        return Err(AtcError::DomainTooSmall(format!("atomistic window {window}")));
    }
    let (lo, hi) = (window.lo(), window.hi());
    let mut bonds = Vec::new();
    for a in lo - 2..=hi + 2 {
        if a < hi + 2 {
            bonds.push((a, a + 1, chain.k1()));
        }
        if a + 2 <= hi + 2 {
            bonds.push((a, a + 2, chain.k2()));
        }
    }
    let known = |i: usize| match i {
        i if i == lo - 2 => bc.left[0],
        i if i == lo - 1 => bc.left[1],
        i if i == hi + 1 => bc.right[0],
        _ => bc.right[1],
    };
    Ok(dense_from_bonds(chain, window, &bonds, known))
}

pub fn assemble_continuum_dense(chain: &ChainModel, window: IndexRange, bc: &ContinuumBoundary) -> Result<DenseSystem> {
    if window.lo() < 1 || window.hi() + 1 > chain.n() {
        return Err(AtcError::DomainTooSmall(format!("continuum window {window}")));
    }
    let (lo, hi) = (window.lo(), window.hi());
    let bonds: Vec<_> = (lo - 1..=hi).map(|a| (a, a + 1, chain.kc())).collect();
    let known = |i: usize| if i < lo { bc.left } else { bc.right };
    Ok(dense_from_bonds(chain, window, &bonds, known))
}

/// Site-by-site comparison of `(A - C)u` with `-k2 Δ₁²u`.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorDifference {
    pub sites: usize,
    pub max_abs_diff: f64,
    /// Largest discrepancy in units of `eps * stencil scale`.
    pub max_scaled_diff: f64,
    pub tolerance_eps: f64,
    pub passed: bool,
}

/// Tolerance of the identity check, in machine epsilons of the stencil scale.
pub const OPERATOR_IDENTITY_EPS: f64 = 8.0;

/// Checks `A - C = -k2 Δ₁²` on every site of `u` with full five-point
/// support. The stencil scale at site `i` is `Σ |coef · u_j|` over the
/// terms that enter `(Au)_i`, `(Cu)_i` and `k2 (Δ₁²u)_i`.
pub fn operator_difference(chain: &ChainModel, u: &DisplacementField) -> Result<OperatorDifference> {
    if u.range().len() < 5 {
        return Err(AtcError::DomainTooSmall("operator identity needs five atoms".into()));
    }
    let sites = IndexRange::new(u.lo() + 2, u.hi() - 2)?;
    let (k1, k2, kc) = (chain.k1(), chain.k2(), chain.kc());
    let mut max_abs: f64 = 0.0;
    let mut max_scaled: f64 = 0.0;
    for i in sites.iter() {
        let lhs = apply_atomistic(chain, u, i)? - apply_continuum(chain, u, i)?;
        let rhs = -k2 * delta1_squared(u, i)?;
        let a = |j: usize| u[j].abs();
        let scale = k1.abs() * (a(i - 1) + 2.0 * a(i) + a(i + 1))
            + k2.abs() * (a(i - 2) + 2.0 * a(i) + a(i + 2))
            + kc.abs() * (a(i - 1) + 2.0 * a(i) + a(i + 1))
            + k2.abs() * (a(i - 2) + 4.0 * a(i - 1) + 6.0 * a(i) + 4.0 * a(i + 1) + a(i + 2));
        let diff = (lhs - rhs).abs();
        max_abs = max_abs.max(diff);
        if scale > 0.0 {
            max_scaled = max_scaled.max(diff / (f64::EPSILON * scale));
        } else if diff > 0.0 {
            max_scaled = f64::INFINITY;
        }
    }
    Ok(OperatorDifference {
        sites: sites.len(),
        max_abs_diff: max_abs,
        max_scaled_diff: max_scaled,
        tolerance_eps: OPERATOR_IDENTITY_EPS,
        passed: max_scaled <= OPERATOR_IDENTITY_EPS,
    })
}
