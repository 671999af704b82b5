//! Revised simplex on `min cᵀy, Ny = b, y ≥ 0` with an explicit dense basis
//! inverse, two phases over artificial columns and Bland's rule.
//!
//! The numeric type is pluggable: `f64` (with a tolerance) serves as the fast
//! path, [`Rational`] gives exact pivots.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtOrd};

use crate::rational::Rational;

pub trait Scalar: Clone + Debug {
    /// Whether arithmetic is exact (no tolerance, no periodic refactoring).
    const EXACT: bool;
    fn zero() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn mul_int(&self, k: i64) -> Self;
    /// Sign, with values inside the tolerance reported as zero.
    fn sign(&self) -> Ordering;
    fn cmp_tol(&self, o: &Self) -> Ordering {
        self.sub(o).sign()
    }
    fn magnitude(&self) -> f64;
    fn is_exact_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
}

pub const F64_EPS: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn mul_int(&self, k: i64) -> Self {
        self * k as f64
    }
    fn sign(&self) -> Ordering {
        if *self > F64_EPS {
            Ordering::Greater
        } else if *self < -F64_EPS {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    fn zero() -> Self {
        Rational::zero()
    }
    fn from_int(n: i64) -> Self {
        Rational::from_int(n)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Rational::zero();
        }
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn mul_int(&self, k: i64) -> Self {
        if k == 1 {
            return self.clone();
        }
        self * &Rational::from_int(k)
    }
    fn sign(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn cmp_tol(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
    fn magnitude(&self) -> f64 {
        Rational::to_f64(self).abs()
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
}

/// A column of `N` with small integer entries, sorted by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub entries: Vec<(usize, i64)>,
    pub cost: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basic {
    Art(usize),
    Col(usize),
}

impl Basic {
    /// Position in Bland's fixed variable order: artificials first.
    fn order(self, m: usize) -> usize {
        match self {
            Basic::Art(i) => i,
            Basic::Col(j) => m + j,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplexError {
    Infeasible,
    Unbounded,
    Singular,
    Cancelled,
}

#[derive(Default)]
pub struct Control<'a> {
    pub cancel: Option<&'a AtomicBool>,
    pub pivots: Option<&'a AtomicU64>,
}

/// Solver state for `N y = b`, rows with negative `b` are negated on entry.
#[derive(Debug, Clone)]
pub struct Tableau<S: Scalar> {
    m: usize,
    flip: Vec<bool>,
    b: Vec<i64>,
    pub cols: Vec<Column>,
    pub basis: Vec<Basic>,
    binv: Vec<S>,
    xb: Vec<S>,
    pub pivots: u64,
    since_refactor: u32,
}

const REFACTOR_EVERY: u32 = 64;

impl<S: Scalar> Tableau<S> {
    /// Starts from the all-artificial basis.
    pub fn new(b: &[i64], cols: Vec<Column>) -> Self {
        let m = b.len();
        let flip: Vec<bool> = b.iter().map(|&x| x < 0).collect();
        let bb: Vec<i64> = b.iter().map(|x| x.abs()).collect();
        let mut binv = vec![S::zero(); m * m];
        for i in 0..m {
            binv[i * m + i] = S::from_int(1);
        }
        let xb = bb.iter().map(|&x| S::from_int(x)).collect();
        Tableau {
            m,
            flip,
            b: bb,
            cols,
            basis: (0..m).map(Basic::Art).collect(),
            binv,
            xb,
            pivots: 0,
            since_refactor: 0,
        }
    }

    /// Starts from a given basis; fails if it is singular.
    pub fn with_basis(b: &[i64], cols: Vec<Column>, basis: Vec<Basic>) -> Result<Self, SimplexError> {
        let mut t = Tableau::new(b, cols);
        t.basis = basis;
        t.refactor()?;
        Ok(t)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    fn entry(&self, i: usize, k: i64) -> i64 {
        if self.flip[i] {
            -k
        } else {
            k
        }
    }

    fn dense(&self, v: Basic) -> Vec<S> {
        let mut d = vec![S::zero(); self.m];
        match v {
            Basic::Art(i) => d[i] = S::from_int(1),
            Basic::Col(j) => {
                for &(i, k) in &self.cols[j].entries {
                    d[i] = S::from_int(self.entry(i, k));
                }
            }
        }
        d
    }

    /// B⁻¹ a_j.
    fn ftran(&self, j: usize) -> Vec<S> {
        let m = self.m;
        let mut out = vec![S::zero(); m];
        for &(i, k) in &self.cols[j].entries {
            let k = self.entry(i, k);
            for (r, o) in out.iter_mut().enumerate() {
                let v = &self.binv[r * m + i];
                if !v.is_exact_zero() {
                    *o = o.add(&v.mul_int(k));
                }
            }
        }
        out
    }

    /// Simplex multipliers πᵀ = c_Bᵀ B⁻¹ for the flipped system.
    fn multipliers(&self, cb: &[S]) -> Vec<S> {
        let m = self.m;
        let mut pi = vec![S::zero(); m];
        for (r, c) in cb.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            for (i, p) in pi.iter_mut().enumerate() {
                let v = &self.binv[r * m + i];
                if !v.is_exact_zero() {
                    *p = p.add(&c.mul(v));
                }
            }
        }
        pi
    }

    /// Multipliers in the caller's (unflipped) row orientation.
    pub fn duals(&self, phase2: bool) -> Vec<S> {
        let cb = self.basic_costs(phase2);
        let mut pi = self.multipliers(&cb);
        for (i, p) in pi.iter_mut().enumerate() {
            if self.flip[i] {
                *p = S::zero().sub(p);
            }
        }
        pi
    }

    fn basic_costs(&self, phase2: bool) -> Vec<S> {
        self.basis
            .iter()
            .map(|&v| match (v, phase2) {
                (Basic::Art(_), false) => S::from_int(1),
                (Basic::Art(_), true) => S::zero(),
                (Basic::Col(_), false) => S::zero(),
                (Basic::Col(j), true) => S::from_rational(&self.cols[j].cost),
            })
            .collect()
    }

    fn reduced_cost(&self, pi: &[S], j: usize, phase2: bool) -> S {
        let mut rc = if phase2 {
            S::from_rational(&self.cols[j].cost)
        } else {
            S::zero()
        };
        for &(i, k) in &self.cols[j].entries {
            rc = rc.sub(&pi[i].mul_int(self.entry(i, k)));
        }
        rc
    }

    /// Values of the basic variables.
    pub fn values(&self) -> Vec<(Basic, S)> {
        self.basis.iter().copied().zip(self.xb.iter().cloned()).collect()
    }

    pub fn artificial_sum(&self) -> S {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(v, _)| matches!(v, Basic::Art(_)))
            .fold(S::zero(), |acc, (_, x)| acc.add(x))
    }

    pub fn is_primal_feasible(&self) -> bool {
        self.xb.iter().all(|x| x.sign() != Ordering::Less)
    }

    pub fn objective(&self, phase2: bool) -> S {
        let cb = self.basic_costs(phase2);
        cb.iter()
            .zip(&self.xb)
            .fold(S::zero(), |acc, (c, x)| acc.add(&c.mul(x)))
    }

    /// Recomputes B⁻¹ and the basic values from scratch by Gauss-Jordan.
    pub fn refactor(&mut self) -> Result<(), SimplexError> {
        let m = self.m;
        let mut a: Vec<S> = vec![S::zero(); m * m];
        for (c, &v) in self.basis.iter().enumerate() {
            for (r, x) in self.dense(v).into_iter().enumerate() {
                a[r * m + c] = x;
            }
        }
        let mut inv = vec![S::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = S::from_int(1);
        }
        for col in 0..m {
            let mut best = None;
            let mut best_mag = 0.0;
            for r in col..m {
                let v = &a[r * m + col];
                if v.sign() != Ordering::Equal && v.magnitude() > best_mag {
                    best_mag = v.magnitude();
                    best = Some(r);
                    if S::EXACT {
                        break;
                    }
                }
            }
            let p = best.ok_or(SimplexError::Singular)?;
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let piv = a[col * m + col].clone();
            for k in 0..m {
                a[col * m + k] = a[col * m + k].div(&piv);
                inv[col * m + k] = inv[col * m + k].div(&piv);
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col].clone();
                if f.is_exact_zero() {
                    continue;
                }
                for k in 0..m {
                    if !a[col * m + k].is_exact_zero() {
                        a[r * m + k] = a[r * m + k].sub(&f.mul(&a[col * m + k]));
                    }
                    if !inv[col * m + k].is_exact_zero() {
                        inv[r * m + k] = inv[r * m + k].sub(&f.mul(&inv[col * m + k]));
                    }
                }
            }
        }
        self.binv = inv;
        self.xb = (0..m)
            .map(|r| {
                (0..m).fold(S::zero(), |acc, i| {
                    if self.b[i] == 0 {
                        acc
                    } else {
                        acc.add(&self.binv[r * m + i].mul_int(self.b[i]))
                    }
                })
            })
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, entering: usize, d: &[S]) {
        let m = self.m;
        let piv = d[r].clone();
        for k in 0..m {
            let v = &self.binv[r * m + k];
            if !v.is_exact_zero() {
                self.binv[r * m + k] = v.div(&piv);
            }
        }
        self.xb[r] = self.xb[r].div(&piv);
        let row: Vec<S> = self.binv[r * m..(r + 1) * m].to_vec();
        let xr = self.xb[r].clone();
        for i in 0..m {
            if i == r || d[i].is_exact_zero() {
                continue;
            }
            let f = &d[i];
            for (k, rv) in row.iter().enumerate() {
                if !rv.is_exact_zero() {
                    self.binv[i * m + k] = self.binv[i * m + k].sub(&f.mul(rv));
                }
            }
            self.xb[i] = self.xb[i].sub(&f.mul(&xr));
        }
        self.basis[r] = Basic::Col(entering);
        self.pivots += 1;
        self.since_refactor += 1;
    }

    /// Runs one phase to optimality with Bland's rule.
    pub fn optimize(&mut self, phase2: bool, ctl: &Control) -> Result<(), SimplexError> {
        let m = self.m;
        loop {
            if ctl.cancel.is_some_and(|c| c.load(AtOrd::Relaxed)) {
                return Err(SimplexError::Cancelled);
            }
            if !S::EXACT && self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let cb = self.basic_costs(phase2);
            let pi = self.multipliers(&cb);
            let mut in_basis = vec![false; self.cols.len()];
            for v in &self.basis {
                if let Basic::Col(j) = v {
                    in_basis[*j] = true;
                }
            }
            let entering = (0..self.cols.len())
                .find(|&j| !in_basis[j] && self.reduced_cost(&pi, j, phase2).sign() == Ordering::Less);
            let Some(j) = entering else {
                return Ok(());
            };
            let d = self.ftran(j);
            let mut leave: Option<usize> = None;
            if phase2 {
                leave = (0..m)
                    .filter(|&r| matches!(self.basis[r], Basic::Art(_)) && d[r].sign() != Ordering::Equal)
                    .min_by_key(|&r| self.basis[r].order(m));
            }
            if leave.is_none() {
                let mut best: Option<(usize, S)> = None;
                for r in 0..m {
                    if d[r].sign() != Ordering::Greater {
                        continue;
                    }
                    let ratio = self.xb[r].div(&d[r]);
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => match ratio.cmp_tol(&bv) {
                            Ordering::Less => Some((r, ratio)),
                            Ordering::Equal
                                if self.basis[r].order(m) < self.basis[br].order(m) =>
                            {
                                Some((r, ratio))
                            }
                            _ => Some((br, bv)),
                        },
                    };
                }
                leave = best.map(|(r, _)| r);
            }
            let Some(r) = leave else {
                return Err(SimplexError::Unbounded);
            };
            self.pivot(r, j, &d);
            if let Some(p) = ctl.pivots {
                p.fetch_add(1, AtOrd::Relaxed);
            }
            for x in self.xb.iter_mut() {
                if x.sign() == Ordering::Equal {
                    *x = S::zero();
                }
            }
        }
    }

    /// Phase 1 then phase 2. Infeasible when artificials cannot be driven to zero.
    pub fn solve(&mut self, ctl: &Control) -> Result<(), SimplexError> {
        if self.artificial_sum().sign() != Ordering::Equal {
            self.optimize(false, ctl)?;
            if self.artificial_sum().sign() != Ordering::Equal {
                return Err(SimplexError::Infeasible);
            }
        }
        self.optimize(true, ctl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(entries: &[(usize, i64)], cost: i64) -> Column {
        Column {
            entries: entries.to_vec(),
            cost: Rational::from_int(cost),
        }
    }

    /// min y0 + 2 y1 + 3 y2 s.t. y0 + y2 = 1, y1 + y2 = 1: optimum 3 at
    /// either (1,1,0) or (0,0,1).
    fn small() -> (Vec<i64>, Vec<Column>) {
        (
            vec![1, 1],
            vec![col(&[(0, 1)], 1), col(&[(1, 1)], 2), col(&[(0, 1), (1, 1)], 3)],
        )
    }

    #[test]
    fn exact_small_lp() {
        let (b, cols) = small();
        let mut t: Tableau<Rational> = Tableau::new(&b, cols);
        t.solve(&Control::default()).unwrap();
        assert_eq!(t.objective(true), Rational::from_int(3));
        let pi = t.duals(true);
        // Dual: max π0 + π1 s.t. π0 ≤ 1, π1 ≤ 2, π0 + π1 ≤ 3.
        assert_eq!(&pi[0] + &pi[1], Rational::from_int(3));
    }

    #[test]
    fn float_agrees() {
        let (b, cols) = small();
        let mut t: Tableau<f64> = Tableau::new(&b, cols);
        t.solve(&Control::default()).unwrap();
        assert!((t.objective(true) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_and_infeasible() {
        // y0 = -1 has no nonnegative solution.
        let mut t: Tableau<Rational> = Tableau::new(&[-1], vec![col(&[(0, 1)], 0)]);
        assert_eq!(t.solve(&Control::default()), Err(SimplexError::Infeasible));
        // -y0 = -2: y0 = 2.
        let mut t: Tableau<Rational> = Tableau::new(&[-2], vec![col(&[(0, -1)], 5)]);
        t.solve(&Control::default()).unwrap();
        assert_eq!(t.objective(true), Rational::from_int(10));
        assert_eq!(t.duals(true)[0], Rational::from_int(-5));
    }

    #[test]
    fn warm_basis_round_trip() {
        let (b, cols) = small();
        let mut t: Tableau<Rational> = Tableau::new(&b, cols.clone());
        t.solve(&Control::default()).unwrap();
        let again: Tableau<Rational> = Tableau::with_basis(&b, cols, t.basis.clone()).unwrap();
        assert_eq!(again.objective(true), t.objective(true));
        assert!(again.is_primal_feasible());
    }

    #[test]
    fn cancellation() {
        let (b, cols) = small();
        let flag = AtomicBool::new(true);
        let mut t: Tableau<Rational> = Tableau::new(&b, cols);
        let ctl = Control {
            cancel: Some(&flag),
            pivots: None,
        };
        assert_eq!(t.solve(&ctl), Err(SimplexError::Cancelled));
    }
}
