//! Closed-form recurrences for the worked equations. These are written
//! independently of the generic lifting so the two can be compared.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nilalg::{AlgebraTable, TruncatedElement, C64};

use super::{real_spectrum, BranchRecord, CharBasis, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            _ => Err(Error::RootSelection(format!("unknown sign '{s}'"))),
        }
    }
}

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// `ρ^r` coefficient of `(Σ v_j ρ^j)²`, by the even/odd pairing formula.
pub fn square_coeff(v: &[C64], r: usize) -> C64 {
    let mut s = ZERO;
    for j in 0..r.div_ceil(2) {
        s += v[j] * v[r - j];
    }
    s *= 2.0;
    if r.is_multiple_of(2) {
        s += v[r / 2] * v[r / 2];
    }
    s
}

fn squares(v: &[C64]) -> Vec<C64> {
    (0..v.len()).map(|r| square_coeff(v, r)).collect()
}

fn nonzero(x: C64, what: &str) -> Result<C64> {
    if x.norm() <= 1e-300 || !x.re.is_finite() || !x.im.is_finite() {
        Err(Error::DegenerateSeed(format!("{what} vanishes")))
    } else {
        Ok(x)
    }
}

fn take(v: &[C64], n: usize, name: &str) -> Result<Vec<C64>> {
    if v.len() < n {
        return Err(Error::Format(format!(
            "{name} has {} coefficients, need {n}",
            v.len()
        )));
    }
    Ok(v[..n].to_vec())
}

fn basis(
    name: &str,
    selector: String,
    cols: Vec<Vec<C64>>,
    lift_index: usize,
) -> Result<CharBasis> {
    let n = cols[0].len();
    let table = AlgebraTable::rho_chain(n)?;
    let vectors = cols
        .into_iter()
        .map(|c| TruncatedElement::new(table.clone(), c))
        .collect::<Result<Vec<_>>>()?;
    let seed = vectors[lift_index].scalar_part();
    Ok(CharBasis {
        real_spectrum_warning: real_spectrum(&vectors),
        table,
        vectors,
        lift_index,
        branch: BranchRecord {
            selector,
            roots: vec![seed],
            multiplicities: vec![1],
            chosen: 0,
        },
        provenance: Provenance::oracle(name),
    })
}

fn laplace_g(k: &[C64], m: &[C64], sign: Sign) -> Result<Vec<C64>> {
    let n = k.len();
    let s0 = nonzero((k[0] * k[0] + m[0] * m[0]).sqrt(), "k_0^2 + m_0^2")?;
    let mut g = vec![ZERO; n];
    g[0] = I * sign.factor() * s0;
    if n > 1 {
        g[1] = I * sign.factor() * (k[0] * k[1] + m[0] * m[1]) / s0;
    }
    for r in 2..n {
        let mut pair = ZERO;
        for j in 0..r.div_ceil(2) {
            pair += k[j] * k[r - j] + m[j] * m[r - j];
            if j >= 1 {
                pair += g[j] * g[r - j];
            }
        }
        g[r] = if r % 2 == 0 {
            let h = r / 2;
            -(k[h] * k[h] + m[h] * m[h] + g[h] * g[h] + 2.0 * pair) / (2.0 * g[0])
        } else {
            -pair / g[0]
        };
    }
    Ok(g)
}

/// `u_xx + u_yy + u_zz = 0` with `e_1 = k`, `e_2 = m` free and `e_3 = g` solved.
pub fn oracle_laplace3d(k: &[C64], m: &[C64], n: usize, sign: Sign) -> Result<CharBasis> {
    let (k, m) = (take(k, n, "k")?, take(m, n, "m")?);
    let g = laplace_g(&k, &m, sign)?;
    basis("laplace3d", sign.to_string(), vec![k, m, g], 2)
}

/// `u_xx + u_yy − u_zz = 0`: the Laplace solution with the third vector times `i`.
pub fn oracle_wave3d(k: &[C64], m: &[C64], n: usize, sign: Sign) -> Result<CharBasis> {
    let (k, m) = (take(k, n, "k")?, take(m, n, "m")?);
    let g = laplace_g(&k, &m, sign)?.into_iter().map(|x| I * x).collect();
    basis("wave3d", sign.to_string(), vec![k, m, g], 2)
}

/// `u_xx + a² u_yyyy = 0` with `e_2 = m` free: `k_r = ±i a C_r`.
pub fn oracle_beam(a: f64, m: &[C64], n: usize, sign: Sign) -> Result<CharBasis> {
    nonzero(C64::new(a, 0.0), "a")?;
    let m = take(m, n, "m")?;
    let k = squares(&m)
        .into_iter()
        .map(|c| I * sign.factor() * a * c)
        .collect();
    basis("beam", sign.to_string(), vec![k, m], 0)
}

/// `u_xx − a² u_yyyy = 0` with `ê_2 = m̂` free, through `ê_2 = (1+i)/√2 · e_2`.
pub fn oracle_beam_hyp(a: f64, m_hat: &[C64], n: usize, sign: Sign) -> Result<CharBasis> {
    nonzero(C64::new(a, 0.0), "a")?;
    let m_hat = take(m_hat, n, "m")?;
    let omega = C64::new(1.0, 1.0) / 2f64.sqrt();
    let m: Vec<C64> = m_hat.iter().map(|x| x / omega).collect();
    let k = squares(&m)
        .into_iter()
        .map(|c| I * sign.factor() * a * c)
        .collect();
    basis("beam_hyp", sign.to_string(), vec![k, m_hat], 0)
}

/// `u_xxxx + 2p u_xxyy + u_yyyy = 0` with `e_1 = k` free. `outer` and `inner`
/// are the two independent signs of `m_0 = ±k_0 √(±√(p²−1) − p)`.
pub fn oracle_biharmonic(
    p: f64,
    k: &[C64],
    n: usize,
    outer: Sign,
    inner: Sign,
) -> Result<CharBasis> {
    let k = take(k, n, "k")?;
    let pc = C64::new(p, 0.0);
    let disc = (pc * pc - 1.0).sqrt();
    let m0 = outer.factor() * k[0] * (inner.factor() * disc - pc).sqrt();
    let mut m = vec![ZERO; n];
    m[0] = m0;
    if n > 1 {
        let den = nonzero(m0 * m0 * m0 + pc * k[0] * k[0] * m0, "m_0^3 + p k_0^2 m_0")?;
        m[1] = -(k[0].powu(3) * k[1] + pc * k[0] * k[1] * m0 * m0) / den;
    }
    let b = squares(&k);
    let c = squares(&b);
    if n > 2 {
        nonzero(m0, "m_0")?;
        nonzero(2.0 * m0 * m0 + 2.0 * pc * b[0], "2m_0^2 + 2p k_0^2")?;
    }
    for r in 2..n {
        // m_r enters only through H_r = 2 m_0 m_r + H'_r
        let h_known = squares(&m[..=r]);
        let h_prime = h_known[r];
        let mut h = h_known;
        h[r] = ZERO;
        let d_prime = square_coeff(&h, r);
        let r_prime: C64 = (1..=r).map(|i| b[i] * h[r - i]).sum();
        let h_r = -(d_prime + 2.0 * pc * r_prime + c[r]) / (2.0 * h[0] + 2.0 * pc * b[0]);
        m[r] = (h_r - h_prime) / (2.0 * m0);
    }
    basis("biharmonic", format!("{outer},{inner}"), vec![k, m], 1)
}

/// `u_xx + u_yy + λu = 0` with `e_1 = k` free.
pub fn oracle_helmholtz(lambda: C64, k: &[C64], n: usize, sign: Sign) -> Result<CharBasis> {
    let k = take(k, n, "k")?;
    let s0 = nonzero((k[0] * k[0] + lambda).sqrt(), "k_0^2 + λ")?;
    let mut m = vec![ZERO; n];
    m[0] = I * sign.factor() * s0;
    if n > 1 {
        m[1] = I * sign.factor() * k[0] * k[1] / s0;
    }
    if n > 2 {
        m[2] = k[1] * k[1] * lambda / (2.0 * m[0].powu(3)) - k[0] * k[2] / m[0];
    }
    for r in 3..n {
        let mut pair = ZERO;
        for j in 0..r.div_ceil(2) {
            pair += k[j] * k[r - j];
            if j >= 1 {
                pair += m[j] * m[r - j];
            }
        }
        m[r] = if r % 2 == 0 {
            let h = r / 2;
            -(k[h] * k[h] + m[h] * m[h] + 2.0 * pair) / (2.0 * m[0])
        } else {
            -pair / m[0]
        };
    }
    basis("helmholtz", sign.to_string(), vec![k, m], 1)
}

/// `V_ttt + α V_tt − β V_xx = 0` with `e_1 = k` (for `t`) free.
pub fn oracle_hydro(alpha: f64, beta: f64, k: &[C64], n: usize, sign: Sign) -> Result<CharBasis> {
    let k = take(k, n, "k")?;
    nonzero(C64::new(beta, 0.0), "β")?;
    let m0 = sign.factor() * ((k[0].powu(3) + alpha * k[0] * k[0]) / beta).sqrt();
    nonzero(m0, "m_0")?;
    let mut m = vec![ZERO; n];
    m[0] = m0;
    if n > 1 {
        m[1] = (3.0 * k[0] * k[0] * k[1] + 2.0 * alpha * k[0] * k[1]) / (2.0 * beta * m0);
    }
    let b = squares(&k);
    for r in 2..n {
        let d: C64 = (0..=r).map(|i| k[i] * b[r - i]).sum();
        let mut pair = ZERO;
        for j in 1..r.div_ceil(2) {
            pair += 2.0 * m[j] * m[r - j];
        }
        if r % 2 == 0 {
            pair += m[r / 2] * m[r / 2];
        }
        m[r] = (d + alpha * b[r] - beta * pair) / (2.0 * beta * m0);
    }
    basis("hydro", sign.to_string(), vec![k, m], 1)
}
