//! Sparse multivariate polynomials in `ξ_1, ξ_2, …` with complex coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::latex;
use crate::nilalg::C64;

/// Coefficients below this magnitude are dropped by [`Poly::cleanup`].
pub const COEFF_EPS: f64 = 1e-14;

/// Exponent vector; entry `i` is the power of `ξ_{i+1}`. Trailing zeros are
/// trimmed so monomials compare equal regardless of how many variables exist.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// `ξ_i` (1-based).
    pub fn var(i: usize) -> Self {
        assert!(i >= 1, "variables are 1-based");
        let mut e = vec![0; i];
        e[i - 1] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Degree with `ξ_j` carrying weight `j`.
    pub fn weighted_degree(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, e)| (i as u32 + 1) * e)
            .sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let len = self.0.len().max(other.0.len());
        let e = (0..len)
            .map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0))
            .collect();
        Monomial(e)
    }

    /// Value at `xs`, where `xs[0] = ξ_1`. Variables beyond `xs` must not occur.
    pub fn eval(&self, xs: &[C64]) -> C64 {
        let mut v = C64::new(1.0, 0.0);
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                v *= xs[i].powu(e);
            }
        }
        v
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: C64) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(i), C64::new(1.0, 0.0));
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C64)>>(terms: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry(m).or_insert(C64::new(0.0, 0.0));
        *e += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> C64 {
        self.terms
            .get(&Monomial::new(exps.to_vec()))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), *c);
        }
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Drops coefficients with magnitude below [`COEFF_EPS`].
    pub fn cleanup(&mut self) {
        self.terms.retain(|_, c| c.norm() >= COEFF_EPS);
    }

    /// Highest variable index that occurs (0 for constants).
    pub fn max_var(&self) -> usize {
        self.terms.keys().map(|m| m.exps().len()).max().unwrap_or(0)
    }

    pub fn eval(&self, xs: &[C64]) -> C64 {
        self.terms
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, (m, c)| acc + c * m.eval(xs))
    }

    /// Set of distinct weighted degrees that occur.
    pub fn weighted_degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|m| m.weighted_degree()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn max_abs_diff(&self, other: &Poly) -> f64 {
        let mut m = 0.0_f64;
        for (k, v) in &self.terms {
            let o = other.terms.get(k).copied().unwrap_or_default();
            m = m.max((v - o).norm());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                m = m.max(v.norm());
            }
        }
        m
    }

    pub fn to_record(&self) -> Vec<MonomialRecord> {
        self.terms
            .iter()
            .map(|(m, c)| MonomialRecord {
                exps: m.exps().to_vec(),
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn from_record(rec: &[MonomialRecord]) -> Poly {
        Poly::from_terms(
            rec.iter()
                .map(|m| (Monomial::new(m.exps.clone()), C64::new(m.re, m.im))),
        )
    }

    /// LaTeX with `\xi_j` symbols; `1` renders as `1`.
    pub fn to_latex(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        // highest total degree first, mirroring hand-written layouts
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0.cmp(a.0)));
        let mut out = String::new();
        for (i, (m, c)) in items.into_iter().enumerate() {
            let mono = monomial_latex(m);
            out.push_str(&latex::signed_term(*c, &mono, i == 0));
        }
        out
    }
}

fn monomial_latex(m: &Monomial) -> String {
    let mut s = String::new();
    for (i, &e) in m.exps().iter().enumerate() {
        match e {
            0 => {}
            1 => s.push_str(&format!("\\xi_{}", i + 1)),
            _ => s.push_str(&format!("\\xi_{}^{{{}}}", i + 1, e)),
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialRecord {
    pub exps: Vec<u32>,
    pub re: f64,
    pub im: f64,
}
