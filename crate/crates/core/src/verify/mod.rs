//! Independent checks of generated solutions: PDE residuals from exact Taylor
//! jets, a finite-difference cross-check, the Cauchy–Riemann analogs and the
//! closed-contour integral identity.

mod jet;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charsolve::{CharBasis, PdeSpec};
use crate::error::{Error, Result};
use crate::nilalg::{TruncatedElement, C64};
use crate::poly::Poly;
use crate::solutions::{AnalyticFn, Builtin, FamilyKind, FamilyMember, XiForms};

pub use jet::{JetLayout, MultiJet};

/// Base tolerance for relative PDE residuals.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 0x6e69_6c73;

fn poly_jet(p: &Poly, forms: &[MultiJet], powers: &mut [Vec<MultiJet>]) -> MultiJet {
    let (d, deg) = (forms[0].d(), forms[0].deg());
    let mut acc = MultiJet::constant(d, deg, C64::new(0.0, 0.0));
    for (mono, c) in p.terms() {
        let mut term = MultiJet::constant(d, deg, *c);
        for (i, &e) in mono.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let list = &mut powers[i];
            while list.len() <= e as usize {
                let next = list.last().expect("power list").mul(&forms[i]).expect("layout");
                list.push(next);
            }
            term = term.mul(&list[e as usize]).expect("layout");
        }
        acc.add_assign(&term).expect("layout");
    }
    acc
}

/// Exact Taylor jet of a member at `x` up to total degree `deg`.
pub fn jet_of_member(
    member: &FamilyMember,
    xf: &XiForms,
    x: &[f64],
    deg: usize,
) -> Result<MultiJet> {
    if x.len() != xf.d {
        return Err(Error::Format(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            xf.d
        )));
    }
    let xiv = xf.eval(x);
    let xi_jet = MultiJet::affine(deg, xiv.xi, &xf.xi_form);
    let forms: Vec<MultiJet> = xf
        .higher
        .iter()
        .zip(&xiv.xis)
        .map(|(h, v)| MultiJet::affine(deg, *v, h))
        .collect();
    let one = MultiJet::constant(xf.d, deg, C64::new(1.0, 0.0));
    let mut powers: Vec<Vec<MultiJet>> = forms.iter().map(|_| vec![one.clone()]).collect();

    let parts = member.parts();
    let top = member.max_derivative() + deg;
    let fjet = member.function.jet(xiv.xi, top)?;
    let mut acc = MultiJet::constant(xf.d, deg, C64::new(0.0, 0.0));
    for (p, m, w) in parts {
        if p.max_var() > forms.len() {
            return Err(Error::InsufficientMembers {
                requested: p.max_var(),
                available: forms.len(),
            });
        }
        let mut fact = 1.0;
        let taylor: Vec<C64> = (0..=deg)
            .map(|j| {
                if j > 0 {
                    fact *= j as f64;
                }
                fjet[m + j] / fact
            })
            .collect();
        let g = xi_jet.compose(&taylor);
        let q = if forms.is_empty() {
            MultiJet::constant(xf.d, deg, p.eval(&[]))
        } else {
            poly_jet(p, &forms, &mut powers)
        };
        acc.add_assign(&q.mul(&g)?.scale(C64::new(w, 0.0)))?;
    }
    Ok(acc)
}

/// `Σ C_α ∂^α u` from a jet.
pub fn pde_residual(pde: &PdeSpec, jet: &MultiJet) -> Result<C64> {
    let need = pde.order() as usize;
    if jet.deg() < need {
        return Err(Error::InsufficientDepth {
            have: jet.deg(),
            need,
        });
    }
    if jet.d() != pde.d() {
        return Err(Error::Format("jet and PDE have different dimension".into()));
    }
    Ok(pde
        .terms()
        .iter()
        .map(|t| t.coeff * jet.derivative(&t.alpha))
        .sum())
}

/// `Σ |C_α| |∂^α u|`, the size of the terms that cancel in the residual.
pub fn residual_scale(pde: &PdeSpec, jet: &MultiJet) -> f64 {
    pde.terms()
        .iter()
        .map(|t| t.coeff.norm() * jet.derivative(&t.alpha).norm())
        .sum()
}

fn central_weights(m: u32) -> Vec<(f64, f64)> {
    // (offset in steps, weight) for the m-th central difference
    let mut binom = 1.0;
    (0..=m)
        .map(|i| {
            let w = if i % 2 == 0 { binom } else { -binom };
            let off = m as f64 / 2.0 - i as f64;
            binom = binom * (m - i) as f64 / (i + 1) as f64;
            (off, w)
        })
        .collect()
}

fn fd_derivative<F: Fn(&[f64]) -> Result<C64>>(
    f: &F,
    x: &[f64],
    alpha: &[u32],
    h: f64,
) -> Result<C64> {
    let stencils: Vec<Vec<(f64, f64)>> = alpha.iter().map(|&a| central_weights(a)).collect();
    let order: i32 = alpha.iter().map(|&a| a as i32).sum();
    let mut idx = vec![0usize; alpha.len()];
    let mut total = C64::new(0.0, 0.0);
    let mut pt = x.to_vec();
    loop {
        let mut w = 1.0;
        for (j, s) in stencils.iter().enumerate() {
            let (off, wj) = s[idx[j]];
            pt[j] = x[j] + off * h;
            w *= wj;
        }
        total += f(&pt)? * w;
        let mut j = 0;
        loop {
            if j == idx.len() {
                return Ok(total / h.powi(order));
            }
            idx[j] += 1;
            if idx[j] < stencils[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

const FD_FACTOR: f64 = 8.0;

/// Two Richardson levels over steps `h, h/2, h/4`; error `O(h⁶)`.
fn richardson<F: Fn(&[f64]) -> Result<C64>>(
    f: &F,
    x: &[f64],
    alpha: &[u32],
    h: f64,
) -> Result<C64> {
    let d0 = fd_derivative(f, x, alpha, h)?;
    let d1 = fd_derivative(f, x, alpha, h / 2.0)?;
    let d2 = fd_derivative(f, x, alpha, h / 4.0)?;
    let r0 = (d1 * 4.0 - d0) / 3.0;
    let r1 = (d2 * 4.0 - d1) / 3.0;
    Ok((r1 * 16.0 - r0) / 15.0)
}

/// Result of comparing jet and finite-difference residuals at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    pub jet_residual: C64,
    pub fd_residual: C64,
    /// `|fd − jet| / (1 + Σ|C_α||∂^α u|)`.
    pub deviation: f64,
}

/// Central differences with two Richardson levels. The step for `|α| = m` is
/// `8 ε^{1/(m+6)} / L` with `L` the size of the member's ξ-forms, which balances
/// the `h⁶` truncation against roundoff amplified by `h^{−m}`.
pub fn fd_cross_check(
    pde: &PdeSpec,
    member: &FamilyMember,
    xf: &XiForms,
    x: &[f64],
) -> Result<FdCheck> {
    let jet = jet_of_member(member, xf, x, pde.order() as usize)?;
    let jet_residual = pde_residual(pde, &jet)?;
    let scale = residual_scale(pde, &jet);
    let f = |p: &[f64]| member.eval(xf, p);
    let mut size = xf.norm_upto(member.index).max(1.0);
    if let Builtin::Reciprocal(c) = member.function {
        // keep the stencil well inside the disc of convergence around ξ(x)
        let dist = (xf.eval(x).xi - c).norm();
        size = size.max(5.0 * xf.norm_upto(0) / dist);
    }
    let mut fd_residual = C64::new(0.0, 0.0);
    for t in pde.terms() {
        let m: u32 = t.alpha.iter().sum();
        let v = if m == 0 {
            f(x)?
        } else {
            let h = FD_FACTOR * f64::EPSILON.powf(1.0 / (m as f64 + 6.0)) / size;
            richardson(&f, x, &t.alpha, h)?
        };
        fd_residual += t.coeff * v;
    }
    Ok(FdCheck {
        jet_residual,
        fd_residual,
        deviation: (fd_residual - jet_residual).norm() / (1.0 + scale),
    })
}

/// Where and how densely to sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub points: usize,
    pub seed: u64,
    /// Half-width of the cube `[−radius, radius]^d`.
    pub radius: f64,
    /// Points per member also checked by finite differences.
    pub fd_points: usize,
    /// Worker threads; `None` runs on the calling thread.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            points: 100,
            seed: DEFAULT_SEED,
            radius: 1.0,
            fd_points: 0,
            jobs: None,
        }
    }
}

impl SampleSpec {
    pub fn sample(&self, d: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.points)
            .map(|_| {
                (0..d)
                    .map(|_| rng.gen_range(-self.radius..=self.radius))
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub kind: FamilyKind,
    pub index: usize,
    pub function: String,
    pub max_abs: f64,
    pub max_value: f64,
    /// `max_abs / (1 + max_value)`.
    pub max_rel: f64,
    pub threshold: f64,
    pub worst_point: Vec<f64>,
    pub fd_max_deviation: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub seed: u64,
    pub points: usize,
    /// Largest over members.
    pub max_abs: f64,
    /// Largest per-member `max_rel`.
    pub max_rel: f64,
    pub worst_point: Vec<f64>,
    pub passed: bool,
    pub members: Vec<MemberReport>,
}

/// Threshold `1e−8 (1 + ‖ξ-forms‖)^k` for member index `k`.
pub fn residual_threshold(xf: &XiForms, k: usize) -> f64 {
    RESIDUAL_TOL * (1.0 + xf.norm_upto(k)).powi(k as i32)
}

fn member_report(
    pde: &PdeSpec,
    member: &FamilyMember,
    xf: &XiForms,
    pts: &[Vec<f64>],
    spec: &SampleSpec,
) -> Result<MemberReport> {
    let deg = pde.order() as usize;
    let eval = |x: &Vec<f64>| -> Result<(f64, f64)> {
        let jet = jet_of_member(member, xf, x, deg)?;
        Ok((pde_residual(pde, &jet)?.norm(), jet.value().norm()))
    };
    let values: Vec<(f64, f64)> = match spec.jobs {
        Some(_) => pts.par_iter().map(eval).collect::<Result<_>>()?,
        None => pts.iter().map(eval).collect::<Result<_>>()?,
    };
    let mut max_abs = 0.0;
    let mut max_value = 0.0_f64;
    let mut worst = 0;
    for (i, (r, v)) in values.iter().enumerate() {
        if *r > max_abs {
            max_abs = *r;
            worst = i;
        }
        max_value = max_value.max(*v);
    }
    let fd_max_deviation = if spec.fd_points > 0 {
        let mut dev = 0.0_f64;
        for x in pts.iter().take(spec.fd_points) {
            dev = dev.max(fd_cross_check(pde, member, xf, x)?.deviation);
        }
        Some(dev)
    } else {
        None
    };
    let max_rel = max_abs / (1.0 + max_value);
    let threshold = residual_threshold(xf, member.index);
    Ok(MemberReport {
        kind: member.kind,
        index: member.index,
        function: member.function.to_string(),
        max_abs,
        max_value,
        max_rel,
        threshold,
        worst_point: pts.get(worst).cloned().unwrap_or_default(),
        fd_max_deviation,
        passed: max_rel <= threshold && max_rel.is_finite(),
    })
}

/// Residuals of every member at `spec.points` sampled points.
pub fn verify_family(
    pde: &PdeSpec,
    members: &[FamilyMember],
    xf: &XiForms,
    spec: &SampleSpec,
) -> Result<ResidualReport> {
    if xf.d != pde.d() {
        return Err(Error::Format(format!(
            "ξ-forms have {} variables, PDE has {}",
            xf.d,
            pde.d()
        )));
    }
    let pts = spec.sample(pde.d());
    let run = || -> Result<Vec<MemberReport>> {
        members
            .iter()
            .map(|m| member_report(pde, m, xf, &pts, spec))
            .collect()
    };
    let reports = match spec.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Format(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let mut max_abs = 0.0_f64;
    let mut max_rel = 0.0;
    let mut worst_point = Vec::new();
    for r in &reports {
        max_abs = max_abs.max(r.max_abs);
        if r.max_rel > max_rel || worst_point.is_empty() {
            max_rel = r.max_rel;
            worst_point = r.worst_point.clone();
        }
    }
    Ok(ResidualReport {
        seed: spec.seed,
        points: pts.len(),
        max_abs,
        max_rel,
        worst_point,
        passed: reports.iter().all(|r| r.passed),
        members: reports,
    })
}

/// Jets of the components of `Φ = exp ζ`, i.e. `V_0 … V_{n−1}`.
pub fn exp_zeta_jets(xf: &XiForms, x: &[f64], deg: usize) -> Result<Vec<MultiJet>> {
    crate::solutions::exp_family(xf, xf.n() - 1)?
        .iter()
        .map(|m| jet_of_member(m, xf, x, deg))
        .collect()
}

/// `max_j ‖(∂Φ/∂x_j) e_1 − (∂Φ/∂x_1) e_j‖` for `Φ` given by its component jets.
pub fn cauchy_riemann_check(basis: &CharBasis, components: &[MultiJet]) -> Result<f64> {
    let (n, d) = (basis.n(), basis.d());
    if components.len() != n {
        return Err(Error::Format(format!(
            "need {n} component jets, got {}",
            components.len()
        )));
    }
    if components.iter().any(|c| c.d() != d || c.deg() < 1) {
        return Err(Error::Format("component jets must have degree ≥ 1 in d variables".into()));
    }
    let partial = |j: usize| -> Result<TruncatedElement> {
        let mut e = vec![0u32; d];
        e[j] = 1;
        TruncatedElement::new(
            basis.table.clone(),
            components.iter().map(|c| c.coeff(&e)).collect(),
        )
    };
    let d1 = partial(0)?;
    let mut worst = 0.0_f64;
    for j in 1..d {
        let dj = partial(j)?;
        let diff = dj.mul(&basis.vectors[0])?.sub(&d1.mul(&basis.vectors[j])?)?;
        worst = worst.max(diff.max_norm());
    }
    Ok(worst)
}

/// A circle in the plane of two coordinate axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub axes: [usize; 2],
    pub points: usize,
}

impl CircleSpec {
    pub fn unit(d: usize, points: usize) -> Self {
        CircleSpec {
            center: vec![0.0; d],
            radius: 1.0,
            axes: [0, 1],
            points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub n_index: usize,
    pub points: usize,
    pub value: C64,
    pub abs: f64,
    /// Largest integrand magnitude on the loop, for judging `abs`.
    pub max_integrand: f64,
}

/// Trapezoidal value of `Σ_{r+s=n} ∮ V_r dξ_s` around the circle (`dξ_0 = dξ`).
pub fn cauchy_integral_check(
    members: &[FamilyMember],
    xf: &XiForms,
    circle: &CircleSpec,
    n_index: usize,
) -> Result<CauchyReport> {
    if n_index >= members.len() || n_index >= xf.n() {
        return Err(Error::InsufficientMembers {
            requested: n_index,
            available: members.len().min(xf.n()).saturating_sub(1),
        });
    }
    let d = xf.d;
    let [a, b] = circle.axes;
    if circle.center.len() != d || a >= d || b >= d || a == b || circle.points == 0 {
        return Err(Error::Format("bad circle specification".into()));
    }
    let h = 2.0 * PI / circle.points as f64;
    let mut total = C64::new(0.0, 0.0);
    let mut max_integrand = 0.0_f64;
    for i in 0..circle.points {
        let th = i as f64 * h;
        let mut x = circle.center.clone();
        x[a] += circle.radius * th.cos();
        x[b] += circle.radius * th.sin();
        let (dxa, dxb) = (-circle.radius * th.sin(), circle.radius * th.cos());
        let mut integrand = C64::new(0.0, 0.0);
        for r in 0..=n_index {
            let s = n_index - r;
            let form = xf.form(s);
            let dxi = form[a] * dxa + form[b] * dxb;
            integrand += members[r].eval(xf, &x)? * dxi;
        }
        max_integrand = max_integrand.max(integrand.norm());
        total += integrand * h;
    }
    Ok(CauchyReport {
        n_index,
        points: circle.points,
        value: total,
        abs: total.norm(),
        max_integrand,
    })
}
