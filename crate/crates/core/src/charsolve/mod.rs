//! Solving the characteristic equation `Σ C_α e_1^{α_1} ⋯ e_d^{α_d} = 0` in the
//! ρ-chain algebras.
//!
//! `d − 1` vectors are free data. The remaining ("lifted") vector has its
//! scalar part chosen among the roots of a univariate polynomial; every
//! higher ρ-coefficient then solves a linear equation whose coefficient is
//! the derivative of that polynomial at the chosen root.

mod oracles;
mod presets;
pub mod roots;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilalg::{AlgebraTable, ElementRecord, TableRecord, TruncatedElement, C64};

pub use oracles::{
    oracle_beam, oracle_beam_hyp, oracle_biharmonic, oracle_helmholtz, oracle_hydro,
    oracle_laplace3d, oracle_wave3d, square_coeff, Sign,
};
pub use presets::{Branch, Preset, MIN_LEADING};
pub use roots::{find_roots, Root, RootChoice};

/// Residual bound for [`CharBasis`]: characteristic coefficients relative to the
/// magnitude of the summed terms.
pub const CHAR_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PdeTerm {
    pub alpha: Vec<u32>,
    pub coeff: C64,
}

impl PdeTerm {
    pub fn new(alpha: Vec<u32>, coeff: C64) -> Self {
        PdeTerm { alpha, coeff }
    }

    pub fn order(&self) -> u32 {
        self.alpha.iter().sum()
    }
}

/// A linear constant-coefficient PDE `Σ C_α ∂^α u = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSpec {
    d: usize,
    terms: Vec<PdeTerm>,
}

impl PdeSpec {
    pub fn new(d: usize, terms: Vec<PdeTerm>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidPde("need at least one variable".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.alpha.len() != d {
                return Err(Error::InvalidPde(format!(
                    "term {i}: multi-index has length {}, expected {d}",
                    t.alpha.len()
                )));
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidPde(format!("term {i}: non-finite coefficient")));
            }
            if terms[..i].iter().any(|u| u.alpha == t.alpha) {
                return Err(Error::InvalidPde(format!(
                    "term {i}: duplicate multi-index {:?}",
                    t.alpha
                )));
            }
        }
        let pde = PdeSpec { d, terms };
        if pde.order() == 0 {
            return Err(Error::InvalidPde(
                "no derivative term with nonzero coefficient".into(),
            ));
        }
        Ok(pde)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[PdeTerm] {
        &self.terms
    }

    /// Highest `|α|` among terms with nonzero coefficient.
    pub fn order(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.coeff != C64::new(0.0, 0.0))
            .map(PdeTerm::order)
            .max()
            .unwrap_or(0)
    }

    /// True when every term has the full order, so any analytic `F(ζ)` solves the equation.
    pub fn is_homogeneous(&self) -> bool {
        let p = self.order();
        self.terms.iter().all(|t| t.order() == p)
    }

    pub fn to_record(&self) -> PdeRecord {
        PdeRecord {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|t| PdeTermRecord {
                    alpha: t.alpha.clone(),
                    re: t.coeff.re,
                    im: t.coeff.im,
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &PdeRecord) -> Result<Self> {
        PdeSpec::new(
            rec.d,
            rec.terms
                .iter()
                .map(|t| PdeTerm::new(t.alpha.clone(), C64::new(t.re, t.im)))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeRecord {
    pub d: usize,
    pub terms: Vec<PdeTermRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeTermRecord {
    pub alpha: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Which order-0 root was taken, among which candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub selector: String,
    pub roots: Vec<C64>,
    pub multiplicities: Vec<usize>,
    pub chosen: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
}

impl Provenance {
    pub fn generic() -> Self {
        Provenance {
            method: "generic".into(),
        }
    }

    pub fn oracle(name: &str) -> Self {
        Provenance {
            method: format!("oracle:{name}"),
        }
    }
}

/// Solved vectors `e_1 … e_d` of the characteristic equation.
#[derive(Clone, Debug, PartialEq)]
pub struct CharBasis {
    pub table: Arc<AlgebraTable>,
    pub vectors: Vec<TruncatedElement>,
    pub lift_index: usize,
    pub branch: BranchRecord,
    /// Set when every scalar part `a_{j0}` is real, so the spectrum is real for real `x`.
    pub real_spectrum_warning: bool,
    pub provenance: Provenance,
}

impl CharBasis {
    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn d(&self) -> usize {
        self.vectors.len()
    }

    /// Coefficient `a_{jr}` of `e_j` (0-based `j`) at `ρ^r`.
    pub fn coeff(&self, j: usize, r: usize) -> C64 {
        self.vectors[j].coeffs()[r]
    }

    /// Same vectors in the dimension-`m` algebra.
    pub fn truncate(&self, m: usize) -> Result<CharBasis> {
        let table = self.table.restrict(m)?;
        let vectors = self
            .vectors
            .iter()
            .map(|v| TruncatedElement::new(table.clone(), v.coeffs()[..m].to_vec()))
            .collect::<Result<_>>()?;
        Ok(CharBasis {
            table,
            vectors,
            ..self.clone()
        })
    }

    /// Replaces vector `j` by `factor · e_j`.
    pub fn scale_vector(&self, j: usize, factor: C64) -> CharBasis {
        let mut out = self.clone();
        out.vectors[j] = self.vectors[j].scale(factor);
        out.real_spectrum_warning = real_spectrum(&out.vectors);
        out
    }

    pub fn to_record(&self) -> CharBasisRecord {
        CharBasisRecord {
            table: self.table.to_record(),
            vectors: self.vectors.iter().map(|v| v.to_record()).collect(),
            lift_index: self.lift_index,
            branch: self.branch.clone(),
            real_spectrum_warning: self.real_spectrum_warning,
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_record(rec: &CharBasisRecord) -> Result<Self> {
        let table = AlgebraTable::from_record(&rec.table)?;
        let vectors = rec
            .vectors
            .iter()
            .map(|v| TruncatedElement::from_record(table.clone(), v))
            .collect::<Result<Vec<_>>>()?;
        if rec.lift_index >= vectors.len() {
            return Err(Error::Format("lift_index out of range".into()));
        }
        Ok(CharBasis {
            table,
            vectors,
            lift_index: rec.lift_index,
            branch: rec.branch.clone(),
            real_spectrum_warning: rec.real_spectrum_warning,
            provenance: rec.provenance.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharBasisRecord {
    pub table: TableRecord,
    pub vectors: Vec<ElementRecord>,
    pub lift_index: usize,
    pub branch: BranchRecord,
    pub real_spectrum_warning: bool,
    pub provenance: Provenance,
}

pub(crate) fn real_spectrum(vectors: &[TruncatedElement]) -> bool {
    vectors.iter().all(|v| {
        let c = v.scalar_part();
        c.im.abs() <= 1e-12 * c.norm()
    })
}

fn check_vectors(d: usize, vectors: &[TruncatedElement]) -> Result<()> {
    if vectors.len() != d {
        return Err(Error::Format(format!(
            "expected {d} vectors, got {}",
            vectors.len()
        )));
    }
    for v in &vectors[1..] {
        if v.table() != vectors[0].table() && **v.table() != **vectors[0].table() {
            return Err(Error::AlgebraMismatch);
        }
    }
    Ok(())
}

fn eval_terms(terms: &[PdeTerm], vectors: &[TruncatedElement]) -> Result<TruncatedElement> {
    let table = vectors[0].table().clone();
    let max_pow: Vec<u32> = (0..vectors.len())
        .map(|j| terms.iter().map(|t| t.alpha[j]).max().unwrap_or(0))
        .collect();
    let mut powers: Vec<Vec<TruncatedElement>> = Vec::with_capacity(vectors.len());
    for (v, &m) in vectors.iter().zip(&max_pow) {
        let mut p = vec![TruncatedElement::one(table.clone())];
        for a in 1..=m as usize {
            let next = p[a - 1].mul(v)?;
            p.push(next);
        }
        powers.push(p);
    }
    let mut acc = TruncatedElement::zero(table.clone());
    for t in terms {
        let mut prod = TruncatedElement::scalar(table.clone(), t.coeff);
        for (j, &a) in t.alpha.iter().enumerate() {
            if a > 0 {
                prod = prod.mul(&powers[j][a as usize])?;
            }
        }
        acc = acc.add(&prod)?;
    }
    Ok(acc)
}

/// `E_0^* + ⋯ + E_p^*` evaluated at the given vectors.
pub fn eval_characteristic(pde: &PdeSpec, vectors: &[TruncatedElement]) -> Result<TruncatedElement> {
    check_vectors(pde.d, vectors)?;
    eval_terms(&pde.terms, vectors)
}

/// Magnitude scale of the characteristic sum, `Σ |C_α| M^{|α|}` with
/// `M = max_j ‖e_j‖₁`, the largest input magnitude.
pub fn characteristic_scale(pde: &PdeSpec, vectors: &[TruncatedElement]) -> f64 {
    let m = vectors
        .iter()
        .map(|v| v.coeffs().iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    pde.terms
        .iter()
        .map(|t| t.coeff.norm() * m.powi(t.order() as i32))
        .sum()
}

/// Largest characteristic coefficient divided by [`characteristic_scale`].
pub fn characteristic_residual(pde: &PdeSpec, vectors: &[TruncatedElement]) -> Result<f64> {
    let e = eval_characteristic(pde, vectors)?;
    let scale = characteristic_scale(pde, vectors);
    Ok(if scale > 0.0 { e.max_norm() / scale } else { e.max_norm() })
}

/// Coefficients (ascending) of `q(c)`: the characteristic sum with every free
/// vector replaced by its scalar part and the lifted one by `c`.
fn order0_poly(terms: &[PdeTerm], free0: &[C64], lift: usize) -> Vec<C64> {
    let deg = terms.iter().map(|t| t.alpha[lift]).max().unwrap_or(0) as usize;
    let mut q = vec![C64::new(0.0, 0.0); deg + 1];
    for t in terms {
        let mut c = t.coeff;
        let mut fi = 0;
        for (j, &a) in t.alpha.iter().enumerate() {
            if j == lift {
                continue;
            }
            c *= free0[fi].powu(a);
            fi += 1;
        }
        q[t.alpha[lift] as usize] += c;
    }
    q
}

fn check_lift(pde: &PdeSpec, lift_index: usize) -> Result<()> {
    if lift_index >= pde.d {
        return Err(Error::Format(format!(
            "lift index {lift_index} out of range for d = {}",
            pde.d
        )));
    }
    Ok(())
}

/// Roots of the order-0 polynomial in the lifted scalar. `free0` lists the
/// scalar parts of the free vectors in order, skipping `lift_index`.
pub fn solve_order0(pde: &PdeSpec, free0: &[C64], lift_index: usize) -> Result<Vec<Root>> {
    check_lift(pde, lift_index)?;
    if free0.len() + 1 != pde.d {
        return Err(Error::Format(format!(
            "expected {} free scalars, got {}",
            pde.d - 1,
            free0.len()
        )));
    }
    find_roots(&order0_poly(&pde.terms, free0, lift_index))
}

/// `∂^m/∂e_l^m` of the characteristic symbol, as a term list.
fn symbol_derivative(terms: &[PdeTerm], lift: usize, m: u32) -> Vec<PdeTerm> {
    terms
        .iter()
        .filter(|t| t.alpha[lift] >= m)
        .map(|t| {
            let a = t.alpha[lift];
            let falling: f64 = (a - m + 1..=a).map(|j| j as f64).product();
            let mut alpha = t.alpha.clone();
            alpha[lift] -= m;
            PdeTerm::new(alpha, t.coeff * falling)
        })
        .collect()
}

fn derivative_at(terms: &[PdeTerm], free0: &[C64], lift: usize, c0: C64) -> (C64, f64) {
    let q = order0_poly(terms, free0, lift);
    let dq = roots::poly_derivative(&q, 1);
    let scale: f64 = dq
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm() * c0.norm().powi(i as i32))
        .sum();
    (roots::poly_eval(&dq, c0), scale)
}

fn lift_with(
    terms: &[PdeTerm],
    vectors: &[TruncatedElement],
    lift: usize,
    order: usize,
    dq: C64,
) -> Result<C64> {
    let mut trial = vectors.to_vec();
    let mut c = trial[lift].coeffs().to_vec();
    for x in c.iter_mut().skip(order) {
        *x = C64::new(0.0, 0.0);
    }
    trial[lift] = TruncatedElement::new(trial[lift].table().clone(), c)?;
    let e = eval_terms(terms, &trial)?;
    Ok(-e.coeffs()[order] / dq)
}

fn free_scalars(vectors: &[TruncatedElement], lift: usize) -> Vec<C64> {
    vectors
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != lift)
        .map(|(_, v)| v.scalar_part())
        .collect()
}

/// Coefficient of the lifted vector at `ρ^order` that cancels the `ρ^order`
/// coefficient of the characteristic sum. Coefficients of the lifted vector at
/// `order` and above are ignored; free vectors must be known through `order`.
pub fn lift_order(
    pde: &PdeSpec,
    vectors: &[TruncatedElement],
    lift_index: usize,
    order: usize,
) -> Result<C64> {
    check_lift(pde, lift_index)?;
    check_vectors(pde.d, vectors)?;
    let free0 = free_scalars(vectors, lift_index);
    let c0 = vectors[lift_index].scalar_part();
    let (dq, scale) = derivative_at(&pde.terms, &free0, lift_index, c0);
    if dq.norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateLift {
            order,
            reason: "derivative of the order-0 polynomial vanishes (multiple root)".into(),
        });
    }
    lift_with(&pde.terms, vectors, lift_index, order, dq)
}

/// Solves the characteristic equation in the ρ-chain of dimension `n`.
///
/// `free` holds the `d − 1` free vectors (skipping `lift_index`), each with at
/// least `n` coefficients. For a root of multiplicity `μ > 1` the lifting runs
/// on the `(μ−1)`-th derivative of the symbol, whose root there is simple; the
/// result is accepted only if it also solves the full equation.
pub fn solve_characteristic(
    pde: &PdeSpec,
    n: usize,
    free: &[Vec<C64>],
    lift_index: usize,
    choice: RootChoice,
) -> Result<CharBasis> {
    check_lift(pde, lift_index)?;
    let table = AlgebraTable::rho_chain(n)?;
    if free.len() + 1 != pde.d {
        return Err(Error::Format(format!(
            "expected {} free vectors, got {}",
            pde.d - 1,
            free.len()
        )));
    }
    if let Some(short) = free.iter().find(|f| f.len() < n) {
        return Err(Error::Format(format!(
            "free vector has {} coefficients, need {n}",
            short.len()
        )));
    }
    let free0: Vec<C64> = free.iter().map(|f| f[0]).collect();
    let roots = solve_order0(pde, &free0, lift_index)?;
    let chosen = choice.select(&roots)?;
    let root = roots[chosen];

    let mu = root.multiplicity as u32;
    let symbol = if mu > 1 {
        symbol_derivative(&pde.terms, lift_index, mu - 1)
    } else {
        pde.terms.clone()
    };
    let c0 = root.value;
    let (dq, scale) = derivative_at(&symbol, &free0, lift_index, c0);
    if dq.norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateLift {
            order: 1,
            reason: format!("order-0 root {c0} is degenerate"),
        });
    }

    let mut vectors = Vec::with_capacity(pde.d);
    let mut fi = 0;
    for j in 0..pde.d {
        if j == lift_index {
            vectors.push(TruncatedElement::scalar(table.clone(), c0));
        } else {
            vectors.push(TruncatedElement::new(table.clone(), free[fi][..n].to_vec())?);
            fi += 1;
        }
    }
    for r in 1..n {
        let m = lift_with(&symbol, &vectors, lift_index, r, dq)?;
        let mut c = vectors[lift_index].coeffs().to_vec();
        c[r] = m;
        vectors[lift_index] = TruncatedElement::new(table.clone(), c)?;
    }

    if mu > 1 {
        let res = characteristic_residual(pde, &vectors)?;
        if res > CHAR_RESIDUAL_TOL {
            return Err(Error::DegenerateLift {
                order: 1,
                reason: format!(
                    "root {c0} has multiplicity {mu} and the reduced lifting leaves residual {res:e}"
                ),
            });
        }
    }

    Ok(CharBasis {
        real_spectrum_warning: real_spectrum(&vectors),
        table,
        vectors,
        lift_index,
        branch: BranchRecord {
            selector: choice.to_string(),
            roots: roots.iter().map(|r| r.value).collect(),
            multiplicities: roots.iter().map(|r| r.multiplicity).collect(),
            chosen,
        },
        provenance: Provenance::generic(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn laplace() -> PdeSpec {
        Preset::Laplace3d.pde()
    }

    fn vec_el(t: &Arc<AlgebraTable>, v: &[C64]) -> TruncatedElement {
        TruncatedElement::from_prefix(t.clone(), v)
    }

    #[test]
    fn pde_validation() {
        assert!(PdeSpec::new(2, vec![PdeTerm::new(vec![0, 0], r(1.0))]).is_err());
        assert!(PdeSpec::new(2, vec![PdeTerm::new(vec![1], r(1.0))]).is_err());
        assert!(PdeSpec::new(
            2,
            vec![
                PdeTerm::new(vec![1, 0], r(1.0)),
                PdeTerm::new(vec![1, 0], r(2.0))
            ]
        )
        .is_err());
        let p = PdeSpec::new(
            2,
            vec![
                PdeTerm::new(vec![2, 0], r(1.0)),
                PdeTerm::new(vec![0, 0], r(3.0)),
            ],
        )
        .unwrap();
        assert_eq!(p.order(), 2);
        let back = PdeSpec::from_record(&p.to_record()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn eval_examples() {
        let t = AlgebraTable::rho_chain(2).unwrap();
        let v = [vec_el(&t, &[r(1.0)]), vec_el(&t, &[]), vec_el(&t, &[c(0.0, 1.0)])];
        let e = eval_characteristic(&laplace(), &v).unwrap();
        assert_eq!(e.max_norm(), 0.0);

        let h = Preset::Helmholtz { lambda: r(1.0) }.pde();
        let v = [vec_el(&t, &[]), vec_el(&t, &[c(0.0, 1.0)])];
        assert_eq!(eval_characteristic(&h, &v).unwrap().max_norm(), 0.0);

        let b = Preset::Beam { a: 1.0 }.pde();
        for s in [1.0, -1.0] {
            let v = [vec_el(&t, &[c(0.0, s)]), vec_el(&t, &[r(1.0)])];
            assert_eq!(eval_characteristic(&b, &v).unwrap().max_norm(), 0.0);
        }
        let other = AlgebraTable::rho_chain(3).unwrap();
        let v = [vec_el(&t, &[]), vec_el(&other, &[])];
        assert_eq!(eval_characteristic(&h, &v), Err(Error::AlgebraMismatch));
    }

    #[test]
    fn order0_examples() {
        let roots = solve_order0(&laplace(), &[r(1.0), r(0.0)], 2).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].value - c(0.0, -1.0)).norm() < 1e-15);
        assert!((roots[1].value - c(0.0, 1.0)).norm() < 1e-15);

        let h = Preset::Helmholtz { lambda: r(1.0) }.pde();
        let roots = solve_order0(&h, &[r(0.0)], 1).unwrap();
        assert!((roots[0].value - c(0.0, -1.0)).norm() < 1e-15);
        assert!((roots[1].value - c(0.0, 1.0)).norm() < 1e-15);

        let hy = Preset::Hydro { alpha: 1.0, beta: 1.0 }.pde();
        let roots = solve_order0(&hy, &[r(1.0)], 1).unwrap();
        assert!((roots[0].value - r(-(2f64.sqrt()))).norm() < 1e-15);
        assert!((roots[1].value - r(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn zero_root_has_small_residual() {
        // a·x²z + b·yz² + c·z²: the lifted vector is zero up to rounding
        let pde = PdeSpec::new(
            3,
            vec![
                PdeTerm::new(vec![2, 0, 1], c(0.3492756263018917, -0.477815751977131)),
                PdeTerm::new(vec![0, 1, 2], c(0.3662776841413036, -0.9983642223831684)),
                PdeTerm::new(vec![0, 0, 2], c(2.7061094478818907, -0.788802340549445)),
            ],
        )
        .unwrap();
        let free = vec![
            vec![c(-0.8427584089484976, 0.9615835878108199), r(0.0), r(0.0)],
            vec![c(0.9103453213998028, 0.11265338417582556), r(0.0), r(0.0)],
        ];
        let roots = solve_order0(&pde, &[free[0][0], free[1][0]], 2).unwrap();
        let zero = roots.iter().position(|z| z.value.norm() < 1e-12).unwrap();
        assert!(roots[zero].value != r(0.0));
        let basis = solve_characteristic(&pde, 3, &free, 2, RootChoice::Index(zero)).unwrap();
        assert!(characteristic_residual(&pde, &basis.vectors).unwrap() < 1e-15);
    }

    #[test]
    fn order0_errors() {
        // u_x = 0 with lift on x and nothing else: q(c) = c, fine; with lift on y: q = k0 constant
        let p = PdeSpec::new(2, vec![PdeTerm::new(vec![1, 0], r(1.0))]).unwrap();
        assert_eq!(solve_order0(&p, &[r(1.0)], 1), Err(Error::NoRoot));
        assert_eq!(solve_order0(&p, &[r(0.0)], 1), Err(Error::DegenerateCharacteristic));
    }

    #[test]
    fn lift_examples() {
        let t = AlgebraTable::rho_chain(3).unwrap();
        // Laplace, k = (1,1), m = (0,0), g_0 = i  ->  g_1 = i
        let v = [
            vec_el(&t, &[r(1.0), r(1.0)]),
            vec_el(&t, &[r(0.0), r(0.0)]),
            vec_el(&t, &[c(0.0, 1.0)]),
        ];
        let g1 = lift_order(&laplace(), &v, 2, 1).unwrap();
        assert!((g1 - c(0.0, 1.0)).norm() < 1e-15);

        // beam a = 1, m = (1,0,0), k_0 = i: k_2 = i C_2 = 0
        let b = Preset::Beam { a: 1.0 }.pde();
        let v = [vec_el(&t, &[c(0.0, 1.0)]), vec_el(&t, &[r(1.0)])];
        assert_eq!(lift_order(&b, &v, 0, 1).unwrap().norm(), 0.0);
        assert_eq!(lift_order(&b, &v, 0, 2).unwrap().norm(), 0.0);

        // Helmholtz λ = 1, k = (0,1,0), m_0 = i -> m_1 = 0, m_2 = i/2
        let h = Preset::Helmholtz { lambda: r(1.0) }.pde();
        let mut v = [vec_el(&t, &[r(0.0), r(1.0), r(0.0)]), vec_el(&t, &[c(0.0, 1.0)])];
        let m1 = lift_order(&h, &v, 1, 1).unwrap();
        assert!(m1.norm() < 1e-15);
        v[1] = vec_el(&t, &[c(0.0, 1.0), m1]);
        let m2 = lift_order(&h, &v, 1, 2).unwrap();
        // closed form k_1²λ/(2m_0³) − k_0k_2/m_0
        let closed = r(1.0) / (r(2.0) * c(0.0, 1.0).powu(3));
        assert!((m2 - closed).norm() < 1e-15);
        assert!((m2 - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn lift_rejects_multiple_roots() {
        let t = AlgebraTable::rho_chain(3).unwrap();
        let bih = Preset::Biharmonic { p: 1.0 }.pde();
        let v = [vec_el(&t, &[r(1.0), r(0.5)]), vec_el(&t, &[c(0.0, 1.0)])];
        assert!(matches!(
            lift_order(&bih, &v, 1, 1),
            Err(Error::DegenerateLift { .. })
        ));
    }

    #[test]
    fn solve_examples() {
        // Laplace n = 2, k = (1,0), m = (0,1), + branch -> g = (i, 0)
        let b = solve_characteristic(
            &laplace(),
            2,
            &[vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]],
            2,
            RootChoice::PositiveImag,
        )
        .unwrap();
        assert!((b.coeff(2, 0) - c(0.0, 1.0)).norm() < 1e-15);
        assert!(b.coeff(2, 1).norm() < 1e-15);
        assert!(characteristic_residual(&laplace(), &b.vectors).unwrap() < 1e-15);
        assert!(!b.real_spectrum_warning);
        assert_eq!(b.branch.roots.len(), 2);

        // Δ² with k_0 = 1: double roots ±i, reduced lifting gives e_2 = ±i e_1
        let bih = Preset::Biharmonic { p: 1.0 }.pde();
        for choice in [RootChoice::PositiveImag, RootChoice::NegativeImag] {
            let b = solve_characteristic(
                &bih,
                6,
                &[vec![r(1.0), r(0.3), c(0.2, -0.1), r(0.0), r(1.0), c(0.0, 0.5)]],
                1,
                choice,
            )
            .unwrap();
            let s = if choice == RootChoice::PositiveImag { 1.0 } else { -1.0 };
            assert!((b.coeff(1, 0) - c(0.0, s)).norm() < 1e-14);
            assert_eq!(b.branch.multiplicities, vec![2, 2]);
            for k in 0..6 {
                assert!((b.coeff(1, k) - c(0.0, s) * b.coeff(0, k)).norm() < 1e-12);
            }
            assert!(characteristic_residual(&bih, &b.vectors).unwrap() < 1e-12);
        }
    }

    #[test]
    fn accidental_multiple_root_is_rejected() {
        // u_xx + u_yy + u_zz with k_0 = m_0 = 0: q(c) = c² has a double root at 0
        // that does not persist at higher orders.
        let e = solve_characteristic(
            &laplace(),
            3,
            &[vec![r(0.0), r(1.0), r(0.0)], vec![r(0.0), r(0.5), r(0.0)]],
            2,
            RootChoice::Index(0),
        );
        assert!(matches!(e, Err(Error::DegenerateLift { .. })));
    }

    #[test]
    fn extension_is_bitwise_stable() {
        let free = [
            vec![c(0.3, 0.1), c(-0.2, 0.5), r(0.7), c(0.0, -0.4), r(0.1), r(0.2)],
            vec![c(0.9, -0.3), r(0.25), c(0.1, 0.1), r(-0.6), r(0.3), r(0.0)],
        ];
        let b6 = solve_characteristic(&laplace(), 6, &free, 2, RootChoice::PositiveImag).unwrap();
        let b5 = solve_characteristic(&laplace(), 5, &free, 2, RootChoice::PositiveImag).unwrap();
        assert_eq!(b6.truncate(5).unwrap().vectors, b5.vectors);
    }

    #[test]
    fn record_round_trip() {
        let b = solve_characteristic(
            &laplace(),
            4,
            &[vec![r(1.0); 4], vec![r(0.5); 4]],
            2,
            RootChoice::PositiveImag,
        )
        .unwrap();
        let json = serde_json::to_string(&b.to_record()).unwrap();
        let back = CharBasis::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, b);
    }
}
