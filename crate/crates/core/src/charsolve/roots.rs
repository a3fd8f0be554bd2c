//! Roots of univariate complex polynomials via companion-matrix eigenvalues,
//! Newton polishing, and multiplicity clustering.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::nilalg::C64;

/// Roots closer than this (relative to `max(1, |c|)`) are merged into one
/// multiple root. Companion eigenvalues split a μ-fold root by roughly
/// `eps^{1/μ}`, so the cut has to sit well above `1e-8`.
pub const CLUSTER_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

impl Root {
    pub fn is_simple(&self) -> bool {
        self.multiplicity == 1
    }
}

/// Horner evaluation; `coeffs[i]` multiplies `c^i`.
pub fn poly_eval(coeffs: &[C64], c: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, a| acc * c + a)
}

/// Coefficients of the `m`-th derivative.
pub fn poly_derivative(coeffs: &[C64], m: usize) -> Vec<C64> {
    if coeffs.len() <= m {
        return Vec::new();
    }
    (m..coeffs.len())
        .map(|i| {
            let falling: f64 = (i - m + 1..=i).map(|j| j as f64).product();
            coeffs[i] * falling
        })
        .collect()
}

/// Drops leading coefficients that are negligible next to the largest one.
pub fn trim(coeffs: &[C64]) -> Vec<C64> {
    let big = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    let mut v = coeffs.to_vec();
    while let Some(last) = v.last() {
        if last.norm() <= 1e-14 * big || last.norm() == 0.0 {
            v.pop();
        } else {
            break;
        }
    }
    v
}

fn newton_polish(coeffs: &[C64], mut c: C64) -> C64 {
    let d = poly_derivative(coeffs, 1);
    let mut best = poly_eval(coeffs, c).norm();
    for _ in 0..8 {
        let dv = poly_eval(&d, c);
        if dv.norm() == 0.0 {
            break;
        }
        let next = c - poly_eval(coeffs, c) / dv;
        let r = poly_eval(coeffs, next).norm();
        if r < best {
            best = r;
            c = next;
        } else {
            break;
        }
    }
    c
}

fn eigen_roots(monic: &[C64]) -> Option<Vec<C64>> {
    // monic[i] for i < deg are the lower coefficients of a monic polynomial.
    let deg = monic.len();
    let mut m = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -monic[i];
    }
    let schur = m.try_schur(f64::EPSILON, 10_000)?;
    Some(match schur.eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => {
            let (_, t) = schur.unpack();
            (0..deg).map(|i| t[(i, i)]).collect()
        }
    })
}

/// Lower coefficients of `p(c + s)` for monic `p` given by its lower coefficients.
fn taylor_shift(monic: &[C64], s: C64) -> Vec<C64> {
    let mut a = monic.to_vec();
    a.push(C64::new(1.0, 0.0));
    let deg = a.len() - 1;
    for i in 0..deg {
        for j in (i..deg).rev() {
            let t = a[j + 1] * s;
            a[j] += t;
        }
    }
    a.truncate(deg);
    a
}

/// Deterministic ordering key: real part quantized so that roots on a common
/// vertical line sort by imaginary part.
fn sort_key(c: C64, scale: f64) -> (i64, f64) {
    let q = (c.re / (1e-9 * scale)).round();
    (q as i64, c.im)
}

/// All roots of `Σ coeffs[i] c^i` with multiplicities, sorted by `(re, im)`.
pub fn find_roots(coeffs: &[C64]) -> Result<Vec<Root>> {
    let q = trim(coeffs);
    if q.is_empty() {
        return Err(Error::DegenerateCharacteristic);
    }
    if q.len() == 1 {
        return Err(Error::NoRoot);
    }
    let deg = q.len() - 1;
    let lead = q[deg];
    let raw: Vec<C64> = if deg == 1 {
        vec![-q[0] / q[1]]
    } else {
        let monic: Vec<C64> = q[..deg].iter().map(|c| c / lead).collect();
        let ev = eigen_roots(&monic)
            .or_else(|| {
                // QR can stall on symmetric root configurations; a shift breaks the symmetry
                let shift = C64::new(std::f64::consts::FRAC_1_PI, 0.4 * std::f64::consts::FRAC_1_PI);
                let shifted = taylor_shift(&monic, shift);
                eigen_roots(&shifted).map(|v| v.into_iter().map(|c| c + shift).collect())
            })
            .ok_or_else(|| Error::RootSelection("eigenvalue iteration did not converge".into()))?;
        ev.into_iter().map(|c| newton_polish(&q, c)).collect()
    };

    // cluster
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for c in raw {
        let tol = |a: C64| CLUSTER_TOL * 1f64.max(a.norm()).max(c.norm());
        match clusters
            .iter_mut()
            .find(|cl| cl.iter().any(|&a| (a - c).norm() <= tol(a)))
        {
            Some(cl) => cl.push(c),
            None => clusters.push(vec![c]),
        }
    }
    let mut roots: Vec<Root> = clusters
        .into_iter()
        .map(|cl| {
            let mu = cl.len();
            let mean = cl.iter().sum::<C64>() / mu as f64;
            // the (μ-1)-th derivative has a simple root here
            let value = if mu > 1 {
                newton_polish(&poly_derivative(&q, mu - 1), mean)
            } else {
                mean
            };
            Root {
                value,
                multiplicity: mu,
            }
        })
        .collect();
    let scale = roots.iter().fold(1.0_f64, |m, r| m.max(r.value.norm()));
    roots.sort_by(|a, b| {
        let (ka, kb) = (sort_key(a.value, scale), sort_key(b.value, scale));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    Ok(roots)
}

/// How to pick one root from the sorted root list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootChoice {
    Index(usize),
    PositiveImag,
    NegativeImag,
    PositiveReal,
    NegativeReal,
    Nearest(C64),
}

impl RootChoice {
    pub fn select(&self, roots: &[Root]) -> Result<usize> {
        let pick = |f: &dyn Fn(C64) -> bool, what: &str| {
            roots
                .iter()
                .position(|r| f(r.value))
                .ok_or_else(|| Error::RootSelection(format!("no root with {what}")))
        };
        let eps = |c: C64| 1e-12 * 1f64.max(c.norm());
        match *self {
            RootChoice::Index(i) if i < roots.len() => Ok(i),
            RootChoice::Index(i) => Err(Error::RootSelection(format!(
                "index {i} out of range ({} roots)",
                roots.len()
            ))),
            RootChoice::PositiveImag => pick(&|c| c.im > eps(c), "positive imaginary part"),
            RootChoice::NegativeImag => pick(&|c| c.im < -eps(c), "negative imaginary part"),
            RootChoice::PositiveReal => pick(&|c| c.re > eps(c), "positive real part"),
            RootChoice::NegativeReal => pick(&|c| c.re < -eps(c), "negative real part"),
            RootChoice::Nearest(t) => roots
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.value - t).norm().total_cmp(&(b.1.value - t).norm()))
                .map(|(i, _)| i)
                .ok_or_else(|| Error::RootSelection("no roots".into())),
        }
    }
}

impl fmt::Display for RootChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootChoice::Index(i) => write!(f, "index:{i}"),
            RootChoice::PositiveImag => write!(f, "pos-imag"),
            RootChoice::NegativeImag => write!(f, "neg-imag"),
            RootChoice::PositiveReal => write!(f, "pos-real"),
            RootChoice::NegativeReal => write!(f, "neg-real"),
            RootChoice::Nearest(c) => write!(f, "nearest:{},{}", c.re, c.im),
        }
    }
}

impl FromStr for RootChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("unrecognized root choice `{s}`"));
        match s {
            "pos-imag" => Ok(RootChoice::PositiveImag),
            "neg-imag" => Ok(RootChoice::NegativeImag),
            "pos-real" => Ok(RootChoice::PositiveReal),
            "neg-real" => Ok(RootChoice::NegativeReal),
            _ => {
                if let Some(i) = s.strip_prefix("index:") {
                    i.parse().map(RootChoice::Index).map_err(|_| bad())
                } else if let Some(c) = s.strip_prefix("nearest:") {
                    let (re, im) = c.split_once(',').ok_or_else(bad)?;
                    Ok(RootChoice::Nearest(C64::new(
                        re.trim().parse().map_err(|_| bad())?,
                        im.trim().parse().map_err(|_| bad())?,
                    )))
                } else {
                    Err(bad())
                }
            }
        }
    }
}
