//! Resolvent coefficients `A_k` of `(t·1 − ζ)^{-1} = Σ A_k I_k` as finite pole
//! expansions in `(t − ξ)`, the operator `P` that sends `(t−ξ)^{-s}` to
//! `1/(s−1)!`, and the resulting polynomials `Ψ_r` with
//! `exp ζ = e^ξ Σ Ψ_r ρ^r` on the ρ-chain.
//!
//! The variable `t` never materializes: an expansion is a map from pole order
//! to a polynomial in `ξ_1, …, ξ_k`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilalg::{AlgebraTable, TableKind, TruncatedElement, C64};
use crate::poly::{Monomial, MonomialRecord, Poly};

#[derive(Clone, Debug, PartialEq)]
pub struct PoleExpansion {
    k: usize,
    terms: BTreeMap<usize, Poly>,
}

impl PoleExpansion {
    pub fn index(&self) -> usize {
        self.k
    }

    /// `(pole order, coefficient)` pairs, ascending in pole order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Poly)> {
        self.terms.iter().map(|(s, p)| (*s, p))
    }

    pub fn term(&self, pole: usize) -> Option<&Poly> {
        self.terms.get(&pole)
    }

    pub fn max_pole(&self) -> usize {
        self.terms.keys().next_back().copied().unwrap_or(1)
    }

    fn add_shifted(&mut self, other: &PoleExpansion, factor: &Poly) {
        for (s, p) in &other.terms {
            let e = self.terms.entry(s + 1).or_default();
            e.add_assign(&p.mul(factor));
        }
    }

    fn cleanup(&mut self) {
        for p in self.terms.values_mut() {
            p.cleanup();
        }
        self.terms.retain(|_, p| !p.is_empty());
    }

    /// Numeric value at `t`, spectrum `xi` and `xis[j-1] = ξ_j`.
    pub fn eval(&self, t: C64, xi: C64, xis: &[C64]) -> C64 {
        let w = (t - xi).inv();
        self.terms
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, (s, p)| acc + p.eval(xis) * w.powu(*s as u32))
    }

    pub fn to_record(&self) -> Vec<PoleTermRecord> {
        self.terms
            .iter()
            .map(|(s, p)| PoleTermRecord {
                pole: *s,
                monomials: p.to_record(),
            })
            .collect()
    }

    pub fn from_record(k: usize, rec: &[PoleTermRecord]) -> Self {
        PoleExpansion {
            k,
            terms: rec
                .iter()
                .map(|t| (t.pole, Poly::from_record(&t.monomials)))
                .collect(),
        }
    }

    pub fn to_latex(&self) -> String {
        let mut out = format!("A_{{{}}}=", self.k);
        for (i, (s, p)) in self.terms.iter().enumerate() {
            let den = if *s == 1 {
                "t-\\xi".to_string()
            } else {
                format!("(t-\\xi)^{{{s}}}")
            };
            if i > 0 {
                out.push('+');
            }
            out.push_str(&format!("\\frac{{{}}}{{{den}}}", p.to_latex()));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiPolynomial {
    r: usize,
    poly: Poly,
}

impl PsiPolynomial {
    pub fn new(r: usize, poly: Poly) -> Self {
        PsiPolynomial { r, poly }
    }

    pub fn index(&self) -> usize {
        self.r
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    /// `Ψ_r` is serialized as a single term with pole order 0.
    pub fn to_record(&self) -> Vec<PoleTermRecord> {
        vec![PoleTermRecord {
            pole: 0,
            monomials: self.poly.to_record(),
        }]
    }

    pub fn from_record(r: usize, rec: &[PoleTermRecord]) -> Result<Self> {
        match rec {
            [t] if t.pole == 0 => Ok(PsiPolynomial::new(r, Poly::from_record(&t.monomials))),
            _ => Err(Error::Format("Ψ record must hold one term with pole 0".into())),
        }
    }

    pub fn to_latex(&self) -> String {
        format!("\\Psi_{{{}}}={}", self.r, self.poly.to_latex())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleTermRecord {
    pub pole: usize,
    pub monomials: Vec<MonomialRecord>,
}

/// Spectrum `ξ` and the higher forms `ξ_1 … ξ_{n−1}` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct XiValues {
    pub xi: C64,
    pub xis: Vec<C64>,
}

impl XiValues {
    pub fn new(xi: C64, xis: Vec<C64>) -> Self {
        XiValues { xi, xis }
    }

    /// `ζ = ξ·1 + Σ ξ_r ρ^r` in the ρ-chain of dimension `xis.len() + 1`.
    pub fn to_element(&self) -> Result<TruncatedElement> {
        let table = AlgebraTable::rho_chain(self.xis.len() + 1)?;
        let mut c = Vec::with_capacity(self.xis.len() + 1);
        c.push(self.xi);
        c.extend_from_slice(&self.xis);
        TruncatedElement::new(table, c)
    }
}

/// `A_0 … A_{n−1}` for an arbitrary triangular table, from
/// `A_s = ξ_s/(t−ξ)² + (1/(t−ξ)) Σ_{r<s} A_r B_{r,s}`, `B_{r,s} = Σ_k ξ_k Υ(r,s,k)`.
pub fn resolvent_general(table: &AlgebraTable) -> Vec<PoleExpansion> {
    let n = table.n();
    let mut out: Vec<PoleExpansion> = Vec::with_capacity(n);
    out.push(PoleExpansion {
        k: 0,
        terms: BTreeMap::from([(1, Poly::constant(C64::new(1.0, 0.0)))]),
    });
    for s in 1..n {
        let mut a = PoleExpansion {
            k: s,
            terms: BTreeMap::from([(2, Poly::var(s))]),
        };
        for r in 1..s {
            // B_{r,s}: coefficient of I_s in I_r·N, N = Σ ξ_k I_k.
            let mut b = Poly::zero();
            for k in 1..s {
                let u = table.constant(r, k, s);
                if u != C64::new(0.0, 0.0) {
                    b.add_term(Monomial::var(k), u);
                }
            }
            if !b.is_empty() {
                let prev = out[r].clone();
                a.add_shifted(&prev, &b);
            }
        }
        a.cleanup();
        out.push(a);
    }
    out
}

/// ρ-chain recurrence `A_s = (1/(t−ξ)) (ξ_s A_0 + ξ_{s−1} A_1 + ⋯ + ξ_1 A_{s−1})`.
pub fn resolvent_rho(n: usize) -> Result<Vec<PoleExpansion>> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let mut out: Vec<PoleExpansion> = Vec::with_capacity(n);
    out.push(PoleExpansion {
        k: 0,
        terms: BTreeMap::from([(1, Poly::constant(C64::new(1.0, 0.0)))]),
    });
    for s in 1..n {
        let mut a = PoleExpansion {
            k: s,
            terms: BTreeMap::new(),
        };
        for j in 0..s {
            let xi = Poly::var(s - j);
            let prev = &out[j];
            a.add_shifted(prev, &xi);
        }
        a.cleanup();
        out.push(a);
    }
    Ok(out)
}

/// `P`: replaces every `(t−ξ)^{-s}` by `1/(s−1)!`.
pub fn p_operator(a: &PoleExpansion) -> PsiPolynomial {
    let mut poly = Poly::zero();
    for (s, p) in &a.terms {
        poly.add_assign(&p.scale(C64::new(1.0 / factorial(s - 1), 0.0)));
    }
    poly.cleanup();
    PsiPolynomial { r: a.k, poly }
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, i| acc * i as f64)
}

type TableKey = (usize, TableKind, Vec<(usize, usize, usize, u64, u64)>);

fn table_key(table: &AlgebraTable) -> TableKey {
    (
        table.n(),
        table.kind(),
        table
            .constants()
            .iter()
            .map(|c| (c.r, c.s, c.k, c.value.re.to_bits(), c.value.im.to_bits()))
            .collect(),
    )
}

static RHO_CACHE: OnceLock<Mutex<HashMap<usize, Arc<[PoleExpansion]>>>> = OnceLock::new();
static GENERAL_CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<[PoleExpansion]>>>> = OnceLock::new();
static PSI_CACHE: OnceLock<Mutex<HashMap<usize, Arc<[PsiPolynomial]>>>> = OnceLock::new();

/// Memoized [`resolvent_rho`]. Concurrent first calls may both compute; the
/// results are identical.
pub fn rho_expansions(n: usize) -> Result<Arc<[PoleExpansion]>> {
    let cache = RHO_CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let v: Arc<[PoleExpansion]> = resolvent_rho(n)?.into();
    cache.lock().unwrap().entry(n).or_insert(v.clone());
    Ok(v)
}

/// Memoized [`resolvent_general`].
pub fn general_expansions(table: &AlgebraTable) -> Arc<[PoleExpansion]> {
    let cache = GENERAL_CACHE.get_or_init(Default::default);
    let key = table_key(table);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let v: Arc<[PoleExpansion]> = resolvent_general(table).into();
    cache.lock().unwrap().entry(key).or_insert(v.clone());
    v
}

/// Memoized `Ψ_0 … Ψ_{n−1}` on the ρ-chain.
pub fn psi_polynomials(n: usize) -> Result<Arc<[PsiPolynomial]>> {
    let cache = PSI_CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let v: Arc<[PsiPolynomial]> = rho_expansions(n)?.iter().map(p_operator).collect();
    cache.lock().unwrap().entry(n).or_insert(v.clone());
    Ok(v)
}

/// Components `V_r = Ψ_r(ξ_1,…,ξ_r) e^ξ` of `exp ζ` in the ρ-chain of dimension `n`.
pub fn exp_decomposition(xiv: &XiValues, n: usize) -> Result<Vec<C64>> {
    if xiv.xis.len() + 1 != n {
        return Err(Error::Format(format!(
            "expected {} higher forms for dimension {n}, got {}",
            n - 1,
            xiv.xis.len()
        )));
    }
    let psi = psi_polynomials(n)?;
    let e = xiv.xi.exp();
    Ok(psi.iter().map(|p| p.poly.eval(&xiv.xis) * e).collect())
}
