//! Finite-dimensional commutative algebras with a unit and a strictly
//! triangular multiplication table.
//!
//! A basis `{I_0 = 1, I_1, …, I_{n-1}}` multiplies as
//! `I_r I_s = Σ_{k > max(r,s)} Υ(r,s,k) I_k`, so every `I_r` with `r ≥ 1`
//! is nilpotent. The ρ-chain `I_r = ρ^r`, `ρ^n = 0` is the built-in special
//! case; it is also the only table that gets the fast convolution product.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Scalar parts smaller than this are treated as exact zeros by [`TruncatedElement::invert`].
pub const INVERT_THRESHOLD: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    RhoChain,
    General,
}

/// One structure constant `Υ(r,s,k)`: the coefficient of `I_k` in `I_r I_s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureConstant {
    pub r: usize,
    pub s: usize,
    pub k: usize,
    pub value: C64,
}

impl StructureConstant {
    pub fn new(r: usize, s: usize, k: usize, value: C64) -> Self {
        StructureConstant { r, s, k, value }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraTable {
    n: usize,
    kind: TableKind,
    /// Dense products of nilpotent basis elements, indexed `(r-1)*(n-1) + (s-1)`,
    /// each a coefficient vector of length `n`.
    products: Vec<Vec<C64>>,
}

impl AlgebraTable {
    /// The ρ-chain algebra of dimension `n`: basis `{1, ρ, …, ρ^{n-1}}`, `ρ^n = 0`.
    pub fn rho_chain(n: usize) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let mut products = vec![vec![ZERO; n]; (n - 1) * (n - 1)];
        for r in 1..n {
            for s in 1..n {
                if r + s < n {
                    products[(r - 1) * (n - 1) + (s - 1)][r + s] = ONE;
                }
            }
        }
        Ok(Arc::new(AlgebraTable {
            n,
            kind: TableKind::RhoChain,
            products,
        }))
    }

    /// Builds a general table from structure constants.
    ///
    /// Entries given only for `(r,s)` are mirrored to `(s,r)`; conflicting
    /// mirrored entries, entries violating strict triangularity, and tables
    /// that fail the associativity check on basis triples are rejected.
    pub fn general(n: usize, constants: &[StructureConstant]) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let mut products = vec![vec![ZERO; n]; (n - 1) * (n - 1)];
        let mut set = vec![false; (n - 1) * (n - 1) * n];
        for c in constants {
            if c.r == 0 || c.s == 0 || c.r >= n || c.s >= n {
                return Err(Error::InvalidTable(format!(
                    "indices r={} s={} outside 1..{}",
                    c.r,
                    c.s,
                    n - 1
                )));
            }
            if c.k >= n || c.k <= c.r.max(c.s) {
                return Err(Error::InvalidTable(format!(
                    "Υ({},{},{}) violates strict triangularity",
                    c.r, c.s, c.k
                )));
            }
            for (a, b) in [(c.r, c.s), (c.s, c.r)] {
                let slot = ((a - 1) * (n - 1) + (b - 1)) * n + c.k;
                let cell = &mut products[(a - 1) * (n - 1) + (b - 1)][c.k];
                if set[slot] && (*cell - c.value).norm() > 1e-12 * (1.0 + c.value.norm()) {
                    return Err(Error::InvalidTable(format!(
                        "Υ({},{},{}) given inconsistently (commutativity)",
                        a, b, c.k
                    )));
                }
                set[slot] = true;
                *cell = c.value;
            }
        }
        let table = AlgebraTable {
            n,
            kind: TableKind::General,
            products,
        };
        table.check_associative()?;
        Ok(Arc::new(table))
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.n;
        let scale = self
            .products
            .iter()
            .flatten()
            .fold(1.0_f64, |m, c| m.max(c.norm()));
        let tol = 1e-12 * scale * scale;
        for a in 1..n {
            for b in 1..n {
                let ab = self.product(a, b);
                for c in 1..n {
                    let bc = self.product(b, c);
                    // (I_a I_b) I_c and I_a (I_b I_c), both expanded over nilpotent basis.
                    let mut left = vec![ZERO; n];
                    let mut right = vec![ZERO; n];
                    for m in 1..n {
                        if ab[m] != ZERO {
                            for (k, v) in self.product(m, c).iter().enumerate() {
                                left[k] += ab[m] * v;
                            }
                        }
                        if bc[m] != ZERO {
                            for (k, v) in self.product(a, m).iter().enumerate() {
                                right[k] += bc[m] * v;
                            }
                        }
                    }
                    for k in 0..n {
                        if (left[k] - right[k]).norm() > tol {
                            return Err(Error::InvalidTable(format!(
                                "(I_{a} I_{b}) I_{c} != I_{a} (I_{b} I_{c}) at I_{k}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    /// Coefficients of `I_r I_s` for `1 ≤ r, s ≤ n-1`.
    pub fn product(&self, r: usize, s: usize) -> &[C64] {
        &self.products[(r - 1) * (self.n - 1) + (s - 1)]
    }

    /// `Υ(r,s,k)`; zero outside the stored range.
    pub fn constant(&self, r: usize, s: usize, k: usize) -> C64 {
        if r == 0 || s == 0 || r >= self.n || s >= self.n || k >= self.n {
            return ZERO;
        }
        self.product(r, s)[k]
    }

    /// Nonzero structure constants with `r ≤ s`, in `(r, s, k)` order.
    pub fn constants(&self) -> Vec<StructureConstant> {
        let mut out = Vec::new();
        for r in 1..self.n {
            for s in r..self.n {
                for (k, v) in self.product(r, s).iter().enumerate() {
                    if *v != ZERO {
                        out.push(StructureConstant::new(r, s, k, *v));
                    }
                }
            }
        }
        out
    }

    /// Quotient by `span{I_m, …, I_{n-1}}`: the table of dimension `m`
    /// obtained by dropping the last basis elements.
    pub fn restrict(&self, m: usize) -> Result<Arc<Self>> {
        if m < 2 || m > self.n {
            return Err(Error::InvalidDimension(m));
        }
        let mut products = Vec::with_capacity((m - 1) * (m - 1));
        for r in 1..m {
            for s in 1..m {
                products.push(self.product(r, s)[..m].to_vec());
            }
        }
        Ok(Arc::new(AlgebraTable {
            n: m,
            kind: self.kind,
            products,
        }))
    }

    /// Extension relation: `self` has dimension `smaller.n + 1` and restricts to `smaller`.
    pub fn is_extension_of(&self, smaller: &AlgebraTable) -> bool {
        self.n == smaller.n + 1
            && self
                .restrict(smaller.n)
                .map(|t| t.products == smaller.products)
                .unwrap_or(false)
    }

    pub fn to_record(&self) -> TableRecord {
        TableRecord {
            n: self.n,
            kind: self.kind,
            constants: self
                .constants()
                .into_iter()
                .map(|c| ConstantRecord {
                    r: c.r,
                    s: c.s,
                    k: c.k,
                    re: c.value.re,
                    im: c.value.im,
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &TableRecord) -> Result<Arc<Self>> {
        let constants: Vec<_> = rec
            .constants
            .iter()
            .map(|c| StructureConstant::new(c.r, c.s, c.k, C64::new(c.re, c.im)))
            .collect();
        match rec.kind {
            TableKind::RhoChain => {
                let table = Self::rho_chain(rec.n)?;
                let given = Self::general(rec.n, &constants)?;
                if given.products != table.products {
                    return Err(Error::InvalidTable(
                        "constants do not match the rho_chain table".into(),
                    ));
                }
                Ok(table)
            }
            TableKind::General => Self::general(rec.n, &constants),
        }
    }
}

/// JSON form of an [`AlgebraTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub n: usize,
    pub kind: TableKind,
    pub constants: Vec<ConstantRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantRecord {
    pub r: usize,
    pub s: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

/// JSON form of a [`TruncatedElement`]; the table travels separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub n: usize,
    pub coeffs: Vec<[f64; 2]>,
}

/// An element `Σ c_k I_k` of an algebra described by an [`AlgebraTable`].
#[derive(Clone, Debug)]
pub struct TruncatedElement {
    table: Arc<AlgebraTable>,
    coeffs: Vec<C64>,
}

impl PartialEq for TruncatedElement {
    fn eq(&self, other: &Self) -> bool {
        same_table(&self.table, &other.table) && self.coeffs == other.coeffs
    }
}

fn same_table(a: &Arc<AlgebraTable>, b: &Arc<AlgebraTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl TruncatedElement {
    pub fn new(table: Arc<AlgebraTable>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != table.n {
            return Err(Error::Format(format!(
                "element has {} coefficients, algebra dimension is {}",
                coeffs.len(),
                table.n
            )));
        }
        Ok(TruncatedElement { table, coeffs })
    }

    /// Builds an element from a prefix of coefficients, padding with zeros.
    pub fn from_prefix(table: Arc<AlgebraTable>, prefix: &[C64]) -> Self {
        let mut coeffs = vec![ZERO; table.n];
        for (c, p) in coeffs.iter_mut().zip(prefix) {
            *c = *p;
        }
        TruncatedElement { table, coeffs }
    }

    pub fn zero(table: Arc<AlgebraTable>) -> Self {
        Self::scalar(table, ZERO)
    }

    pub fn one(table: Arc<AlgebraTable>) -> Self {
        Self::scalar(table, ONE)
    }

    pub fn scalar(table: Arc<AlgebraTable>, c: C64) -> Self {
        let mut coeffs = vec![ZERO; table.n];
        coeffs[0] = c;
        TruncatedElement { table, coeffs }
    }

    /// The basis element `I_k`.
    pub fn basis(table: Arc<AlgebraTable>, k: usize) -> Self {
        let mut coeffs = vec![ZERO; table.n];
        coeffs[k] = ONE;
        TruncatedElement { table, coeffs }
    }

    pub fn table(&self) -> &Arc<AlgebraTable> {
        &self.table
    }

    pub fn n(&self) -> usize {
        self.table.n
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn scalar_part(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn nilpotent_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = ZERO;
        out
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_table(&self.table, &other.table) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(TruncatedElement {
            table: self.table.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(TruncatedElement {
            table: self.table.clone(),
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn scale(&self, c: C64) -> Self {
        TruncatedElement {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.table.n;
        let a = &self.coeffs;
        let b = &other.coeffs;
        let mut c = vec![ZERO; n];
        match self.table.kind {
            TableKind::RhoChain => {
                for (k, ck) in c.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for i in 0..=k {
                        acc += a[i] * b[k - i];
                    }
                    *ck = acc;
                }
            }
            TableKind::General => {
                c[0] = a[0] * b[0];
                for k in 1..n {
                    c[k] = a[0] * b[k] + a[k] * b[0];
                }
                for r in 1..n {
                    if a[r] == ZERO {
                        continue;
                    }
                    for s in 1..n {
                        if b[s] == ZERO {
                            continue;
                        }
                        let ab = a[r] * b[s];
                        let prod = self.table.product(r, s);
                        for k in r.max(s) + 1..n {
                            c[k] += ab * prod[k];
                        }
                    }
                }
            }
        }
        TruncatedElement {
            table: self.table.clone(),
            coeffs: c,
        }
    }

    /// Binary exponentiation; negative exponents go through [`Self::invert`].
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.invert()?.pow(-e);
        }
        let mut e = e as u64;
        let mut result = Self::one(self.table.clone());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        Ok(result)
    }

    /// Inverse via the terminating geometric series of the nilpotent part.
    pub fn invert(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() < INVERT_THRESHOLD {
            return Err(Error::NonInvertible);
        }
        let inv0 = c0.inv();
        let u = self.nilpotent_part().scale(inv0);
        let one = Self::one(self.table.clone());
        // 1 - u + u^2 - … in Horner form; u^n = 0.
        let mut s = one.clone();
        for _ in 1..self.table.n {
            let us = u.mul_unchecked(&s);
            s = TruncatedElement {
                table: self.table.clone(),
                coeffs: one.coeffs.iter().zip(&us.coeffs).map(|(a, b)| a - b).collect(),
            };
        }
        Ok(s.scale(inv0))
    }

    /// `exp z = e^{c_0} Σ_{r<n} N^r / r!` with `N` the nilpotent part.
    pub fn exp(&self) -> Self {
        let n = self.table.n;
        let nil = self.nilpotent_part();
        let mut s = Self::one(self.table.clone());
        for r in (1..n).rev() {
            let mut t = nil.mul_unchecked(&s).scale(C64::new(1.0 / r as f64, 0.0));
            t.coeffs[0] += ONE;
            s = t;
        }
        s.scale(self.coeffs[0].exp())
    }

    /// Projection onto the restricted algebra of dimension `m`.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        let table = self.table.restrict(m)?;
        Ok(TruncatedElement {
            table,
            coeffs: self.coeffs[..m].to_vec(),
        })
    }

    /// Largest componentwise modulus.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn to_record(&self) -> ElementRecord {
        ElementRecord {
            n: self.table.n,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_record(table: Arc<AlgebraTable>, rec: &ElementRecord) -> Result<Self> {
        if rec.n != table.n {
            return Err(Error::Format(format!(
                "element dimension {} does not match table dimension {}",
                rec.n, table.n
            )));
        }
        Self::new(table, rec.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect())
    }
}

impl fmt::Display for TruncatedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                _ => write!(f, "({c})·I{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Exponential of an algebra element (free-function form of [`TruncatedElement::exp`]).
pub fn exp_elem(z: &TruncatedElement) -> TruncatedElement {
    z.exp()
}
