//! The worked equations with their parameters, free data layout and branches.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nilalg::C64;

use super::oracles::{
    oracle_beam, oracle_beam_hyp, oracle_biharmonic, oracle_helmholtz, oracle_hydro,
    oracle_laplace3d, oracle_wave3d, Sign,
};
use super::{solve_characteristic, CharBasis, PdeSpec, PdeTerm, RootChoice};

/// Sign choice for the order-0 seed. `inner` is used only by the biharmonic
/// equation, whose seed carries two independent signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub outer: Sign,
    pub inner: Sign,
}

impl Branch {
    pub const PLUS: Branch = Branch {
        outer: Sign::Plus,
        inner: Sign::Plus,
    };
    pub const MINUS: Branch = Branch {
        outer: Sign::Minus,
        inner: Sign::Plus,
    };

    pub fn new(outer: Sign, inner: Sign) -> Self {
        Branch { outer, inner }
    }

    pub fn all() -> [Branch; 4] {
        [
            Branch::new(Sign::Plus, Sign::Plus),
            Branch::new(Sign::Minus, Sign::Plus),
            Branch::new(Sign::Plus, Sign::Minus),
            Branch::new(Sign::Minus, Sign::Minus),
        ]
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner {
            Sign::Plus => write!(f, "{}", self.outer),
            Sign::Minus => write!(f, "{},{}", self.outer, self.inner),
        }
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(',') {
            Some((o, i)) => Ok(Branch::new(o.trim().parse()?, i.trim().parse()?)),
            None => Ok(Branch::new(s.trim().parse()?, Sign::Plus)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    Laplace3d,
    Wave3d,
    Beam { a: f64 },
    BeamHyp { a: f64 },
    Biharmonic { p: f64 },
    Helmholtz { lambda: C64 },
    Hydro { alpha: f64, beta: f64 },
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn term(alpha: &[u32], c: C64) -> PdeTerm {
    PdeTerm::new(alpha.to_vec(), c)
}

impl Preset {
    pub const NAMES: [&'static str; 7] = [
        "laplace3d",
        "wave3d",
        "beam",
        "beam_hyp",
        "biharmonic",
        "helmholtz",
        "hydro",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Laplace3d => "laplace3d",
            Preset::Wave3d => "wave3d",
            Preset::Beam { .. } => "beam",
            Preset::BeamHyp { .. } => "beam_hyp",
            Preset::Biharmonic { .. } => "biharmonic",
            Preset::Helmholtz { .. } => "helmholtz",
            Preset::Hydro { .. } => "hydro",
        }
    }

    pub fn pde(&self) -> PdeSpec {
        let terms = match *self {
            Preset::Laplace3d => vec![
                term(&[2, 0, 0], one()),
                term(&[0, 2, 0], one()),
                term(&[0, 0, 2], one()),
            ],
            Preset::Wave3d => vec![
                term(&[2, 0, 0], one()),
                term(&[0, 2, 0], one()),
                term(&[0, 0, 2], -one()),
            ],
            Preset::Beam { a } => vec![term(&[2, 0], one()), term(&[0, 4], one() * (a * a))],
            Preset::BeamHyp { a } => {
                vec![term(&[2, 0], one()), term(&[0, 4], -one() * (a * a))]
            }
            Preset::Biharmonic { p } => vec![
                term(&[4, 0], one()),
                term(&[2, 2], one() * (2.0 * p)),
                term(&[0, 4], one()),
            ],
            Preset::Helmholtz { lambda } => vec![
                term(&[2, 0], one()),
                term(&[0, 2], one()),
                term(&[0, 0], lambda),
            ],
            Preset::Hydro { alpha, beta } => vec![
                term(&[3, 0], one()),
                term(&[2, 0], one() * alpha),
                term(&[0, 2], -one() * beta),
            ],
        };
        let d = terms[0].alpha.len();
        PdeSpec::new(d, terms).expect("preset equations are well formed")
    }

    pub fn d(&self) -> usize {
        match self {
            Preset::Laplace3d | Preset::Wave3d => 3,
            _ => 2,
        }
    }

    pub fn lift_index(&self) -> usize {
        match self {
            Preset::Laplace3d | Preset::Wave3d => 2,
            Preset::Beam { .. } | Preset::BeamHyp { .. } => 0,
            _ => 1,
        }
    }

    /// Names of the free vectors' coefficient sequences, in solver order.
    pub fn free_names(&self) -> &'static [&'static str] {
        match self {
            Preset::Laplace3d | Preset::Wave3d => &["k", "m"],
            Preset::Beam { .. } | Preset::BeamHyp { .. } => &["m"],
            _ => &["k"],
        }
    }

    pub fn variables(&self) -> &'static [&'static str] {
        match self {
            Preset::Laplace3d | Preset::Wave3d => &["x", "y", "z"],
            Preset::Hydro { .. } => &["t", "x"],
            _ => &["x", "y"],
        }
    }

    /// Order-0 value of the lifted vector on the given branch.
    pub fn seed(&self, free0: &[C64], branch: Branch) -> Result<C64> {
        let i = C64::new(0.0, 1.0);
        let s = branch.outer.factor();
        Ok(match *self {
            Preset::Laplace3d => i * s * (free0[0] * free0[0] + free0[1] * free0[1]).sqrt(),
            Preset::Wave3d => -s * (free0[0] * free0[0] + free0[1] * free0[1]).sqrt(),
            Preset::Beam { a } => i * s * a * free0[0] * free0[0],
            Preset::BeamHyp { a } => s * a * free0[0] * free0[0],
            Preset::Biharmonic { p } => {
                let pc = C64::new(p, 0.0);
                s * free0[0] * (branch.inner.factor() * (pc * pc - 1.0).sqrt() - pc).sqrt()
            }
            Preset::Helmholtz { lambda } => i * s * (free0[0] * free0[0] + lambda).sqrt(),
            Preset::Hydro { alpha, beta } => {
                let k0 = free0[0];
                s * ((k0 * k0 * k0 + alpha * k0 * k0) / beta).sqrt()
            }
        })
    }

    /// Generic lifting on the given branch.
    pub fn solve(&self, n: usize, free: &[Vec<C64>], branch: Branch) -> Result<CharBasis> {
        self.check_free(free)?;
        let free0: Vec<C64> = free.iter().map(|f| f[0]).collect();
        let seed = self.seed(&free0, branch)?;
        let mut basis = solve_characteristic(
            &self.pde(),
            n,
            free,
            self.lift_index(),
            RootChoice::Nearest(seed),
        )?;
        let chosen = basis.branch.chosen;
        if basis.branch.multiplicities[chosen] > 1 && !self.multiple_root_expected(&free0) {
            return Err(Error::DegenerateSeed(format!(
                "order-0 root {} is multiple for this free data",
                basis.branch.roots[chosen]
            )));
        }
        basis.branch.selector = format!("{branch} ({})", basis.branch.selector);
        Ok(basis)
    }

    /// The closed-form recurrences on the given branch.
    pub fn oracle(&self, n: usize, free: &[Vec<C64>], branch: Branch) -> Result<CharBasis> {
        self.check_free(free)?;
        let s = branch.outer;
        match *self {
            Preset::Laplace3d => oracle_laplace3d(&free[0], &free[1], n, s),
            Preset::Wave3d => oracle_wave3d(&free[0], &free[1], n, s),
            Preset::Beam { a } => oracle_beam(a, &free[0], n, s),
            Preset::BeamHyp { a } => oracle_beam_hyp(a, &free[0], n, s),
            Preset::Biharmonic { p } => oracle_biharmonic(p, &free[0], n, s, branch.inner),
            Preset::Helmholtz { lambda } => oracle_helmholtz(lambda, &free[0], n, s),
            Preset::Hydro { alpha, beta } => oracle_hydro(alpha, beta, &free[0], n, s),
        }
    }

    // The biharmonic operator with |p| = 1 is a perfect square, so its roots are double.
    fn multiple_root_expected(&self, free0: &[C64]) -> bool {
        matches!(*self, Preset::Biharmonic { p } if p.abs() == 1.0) && free0[0].norm() > 0.0
    }

    fn check_free(&self, free: &[Vec<C64>]) -> Result<()> {
        if free.len() != self.free_names().len() || free.iter().any(|f| f.is_empty()) {
            return Err(Error::Format(format!(
                "{} expects free sequences {:?}",
                self.name(),
                self.free_names()
            )));
        }
        Ok(())
    }

    /// Free sequences with coefficients uniform in the square `[−1,1] + i[−1,1]`,
    /// except that the order-0 coefficient is redrawn until `|z| ≥ MIN_LEADING`.
    pub fn random_free<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<C64>> {
        self.free_names()
            .iter()
            .map(|_| {
                let mut v: Vec<C64> = (0..n).map(|_| square(rng)).collect();
                if let Some(z0) = v.first_mut() {
                    while z0.norm() < MIN_LEADING {
                        *z0 = square(rng);
                    }
                }
                v
            })
            .collect()
    }
}

/// Smallest order-0 free coefficient produced by [`Preset::random_free`]. Near zero
/// the higher-order coefficients grow like `|z_1/z_0|^r` and lose digits accordingly.
pub const MIN_LEADING: f64 = 0.25;

fn square<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}
