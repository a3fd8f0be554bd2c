//! Analytic functions given by their derivative jets.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nilalg::C64;

/// Something that can report `F(z), F'(z), …, F^{(depth)}(z)`.
pub trait AnalyticFn: fmt::Debug + Send + Sync {
    fn jet(&self, z: C64, depth: usize) -> Result<Vec<C64>>;
}

/// The built-in analytic functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    /// `Σ c_i z^i`.
    Polynomial(Vec<C64>),
    Exp,
    /// `1/(z − c)`.
    Reciprocal(C64),
    Sin,
    Cos,
}

/// Distance below which `1/(z − c)` is treated as evaluated at its pole.
pub const POLE_TOL: f64 = 1e-12;

impl AnalyticFn for Builtin {
    fn jet(&self, z: C64, depth: usize) -> Result<Vec<C64>> {
        let zero = C64::new(0.0, 0.0);
        Ok(match self {
            Builtin::Exp => vec![z.exp(); depth + 1],
            Builtin::Sin | Builtin::Cos => {
                let (s, c) = (z.sin(), z.cos());
                let cycle = if *self == Builtin::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                (0..=depth).map(|j| cycle[j % 4]).collect()
            }
            Builtin::Reciprocal(c) => {
                let w = z - c;
                if w.norm() <= POLE_TOL {
                    return Err(Error::PoleOnDomain(format!("z = {z}")));
                }
                let inv = w.inv();
                let mut out = Vec::with_capacity(depth + 1);
                let mut v = inv;
                for j in 0..=depth {
                    out.push(v);
                    v = v * inv * (-(j as f64 + 1.0));
                }
                out
            }
            Builtin::Polynomial(coeffs) => {
                let mut cur = coeffs.clone();
                let mut out = Vec::with_capacity(depth + 1);
                for _ in 0..=depth {
                    out.push(cur.iter().rev().fold(zero, |acc, a| acc * z + a));
                    cur = cur
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, a)| a * i as f64)
                        .collect();
                }
                out
            }
        })
    }
}

/// Looks up a built-in by name with numeric parameters.
pub fn builtin_analytic(name: &str, params: &[C64]) -> Result<Builtin> {
    match (name, params) {
        ("exp", []) => Ok(Builtin::Exp),
        ("sin", []) => Ok(Builtin::Sin),
        ("cos", []) => Ok(Builtin::Cos),
        ("reciprocal", []) => Ok(Builtin::Reciprocal(C64::new(0.0, 0.0))),
        ("reciprocal", [c]) => Ok(Builtin::Reciprocal(*c)),
        ("polynomial" | "poly", cs) if !cs.is_empty() => Ok(Builtin::Polynomial(cs.to_vec())),
        _ => Err(Error::UnknownFunction(name.to_string())),
    }
}

fn fmt_c(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}:{}", c.re, c.im)
    }
}

fn parse_c(s: &str) -> Option<C64> {
    match s.split_once(':') {
        Some((re, im)) => Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?)),
        None => Some(C64::new(s.trim().parse().ok()?, 0.0)),
    }
}

/// `exp`, `sin`, `cos`, `reciprocal:c`, `poly:c0,c1,…`; complex numbers as `re:im`.
impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Exp => f.write_str("exp"),
            Builtin::Sin => f.write_str("sin"),
            Builtin::Cos => f.write_str("cos"),
            Builtin::Reciprocal(c) => write!(f, "reciprocal:{}", fmt_c(*c)),
            Builtin::Polynomial(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| fmt_c(*c)).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let params = match args {
            Some(a) => a
                .split(',')
                .map(|p| parse_c(p).ok_or_else(|| Error::UnknownFunction(s.to_string())))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        builtin_analytic(name, &params)
    }
}
