//! Solution families built from a solved characteristic basis.
//!
//! With `ξ = Σ_j a_{j0} x_j` and `ξ_r = Σ_j a_{jr} x_j`, the exponential family
//! is `V_r = Ψ_r(ξ_1, …, ξ_r) e^ξ` and, for an analytic `F`, the analytic
//! family is `U_k = Σ_s q_{k,s}(ξ_1, …, ξ_k) F^{(s−1)}(ξ)/(s−1)!` where
//! `A_k = Σ_s q_{k,s} (t−ξ)^{−s}`.

mod analytic;

use serde::{Deserialize, Serialize};

use crate::charsolve::{CharBasis, PdeSpec};
use crate::error::{Error, Result};
use crate::latex::{prime, signed_term};
use crate::nilalg::C64;
use crate::poly::{MonomialRecord, Poly};
use crate::resolvent::{factorial, psi_polynomials, rho_expansions, XiValues};

pub use analytic::{builtin_analytic, AnalyticFn, Builtin, POLE_TOL};

/// Linear forms `ξ` and `ξ_1 … ξ_{n−1}` in the real variables `x_1 … x_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct XiForms {
    pub d: usize,
    pub xi_form: Vec<C64>,
    pub higher: Vec<Vec<C64>>,
}

impl XiForms {
    pub fn new(xi_form: Vec<C64>, higher: Vec<Vec<C64>>) -> Result<Self> {
        let d = xi_form.len();
        if d == 0 || higher.iter().any(|h| h.len() != d) {
            return Err(Error::Format("ξ-forms must all have d coefficients".into()));
        }
        if higher.is_empty() {
            return Err(Error::InvalidDimension(1));
        }
        Ok(XiForms {
            d,
            xi_form,
            higher,
        })
    }

    /// Algebra dimension the forms came from.
    pub fn n(&self) -> usize {
        self.higher.len() + 1
    }

    /// Form `r` (0 is `ξ`).
    pub fn form(&self, r: usize) -> &[C64] {
        if r == 0 {
            &self.xi_form
        } else {
            &self.higher[r - 1]
        }
    }

    pub fn eval(&self, x: &[f64]) -> XiValues {
        let apply = |f: &[C64]| f.iter().zip(x).map(|(a, xj)| a * xj).sum::<C64>();
        XiValues::new(
            apply(&self.xi_form),
            self.higher.iter().map(|h| apply(h)).collect(),
        )
    }

    /// Largest `ℓ¹` norm among forms `0 … k`.
    pub fn norm_upto(&self, k: usize) -> f64 {
        (0..=k.min(self.n() - 1))
            .map(|r| self.form(r).iter().map(|c| c.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> XiFormsRecord {
        let pairs = |v: &[C64]| v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
        XiFormsRecord {
            d: self.d,
            xi: pairs(&self.xi_form),
            higher: self.higher.iter().map(|h| pairs(h)).collect(),
        }
    }

    pub fn from_record(rec: &XiFormsRecord) -> Result<Self> {
        let unpair = |v: &[[f64; 2]]| v.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>();
        let f = XiForms::new(
            unpair(&rec.xi),
            rec.higher.iter().map(|h| unpair(h)).collect(),
        )?;
        if f.d != rec.d {
            return Err(Error::Format("ξ-form length does not match d".into()));
        }
        Ok(f)
    }

    /// `\xi=…` and `\xi_r=…` lines in the given variable names.
    pub fn to_latex(&self, vars: &[&str]) -> Vec<String> {
        let line = |name: String, f: &[C64]| {
            let mut s = format!("{name}=");
            let mut first = true;
            for (c, v) in f.iter().zip(vars) {
                if *c != C64::new(0.0, 0.0) {
                    s.push_str(&signed_term(*c, v, first));
                    first = false;
                }
            }
            if first {
                s.push('0');
            }
            s
        };
        let mut out = vec![line("\\xi".into(), &self.xi_form)];
        for (r, h) in self.higher.iter().enumerate() {
            out.push(line(format!("\\xi_{{{}}}", r + 1), h));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiFormsRecord {
    pub d: usize,
    pub xi: Vec<[f64; 2]>,
    pub higher: Vec<Vec<[f64; 2]>>,
}

/// Column-wise transposition of the basis vectors into linear forms.
pub fn build_xi_forms(basis: &CharBasis) -> XiForms {
    let d = basis.d();
    let xi_form = (0..d).map(|j| basis.coeff(j, 0)).collect();
    let higher = (1..basis.n())
        .map(|r| (0..d).map(|j| basis.coeff(j, r)).collect())
        .collect();
    XiForms {
        d,
        xi_form,
        higher,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Exp,
    Analytic,
}

/// One polynomial coefficient of a member. For the analytic family `pole = s`
/// means the coefficient multiplies `F^{(s−1)}(ξ)/(s−1)!`; the exponential
/// family has the single term `pole = 0` holding `Ψ_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberTerm {
    pub pole: usize,
    pub poly: Poly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember {
    pub kind: FamilyKind,
    pub index: usize,
    pub terms: Vec<MemberTerm>,
    pub function: Builtin,
}

impl FamilyMember {
    /// `(coefficient, derivative order m, weight)` with the member equal to
    /// `Σ weight · coefficient(ξ_1, …) · F^{(m)}(ξ)`.
    pub fn parts(&self) -> Vec<(&Poly, usize, f64)> {
        self.terms
            .iter()
            .map(|t| match self.kind {
                FamilyKind::Exp => (&t.poly, 0, 1.0),
                FamilyKind::Analytic => {
                    let m = t.pole.saturating_sub(1);
                    (&t.poly, m, 1.0 / factorial(m))
                }
            })
            .collect()
    }

    pub fn max_derivative(&self) -> usize {
        self.parts().iter().map(|p| p.1).max().unwrap_or(0)
    }

    pub fn eval_xi(&self, xiv: &XiValues) -> Result<C64> {
        let jet = self.function.jet(xiv.xi, self.max_derivative())?;
        Ok(self
            .parts()
            .iter()
            .map(|(p, m, w)| p.eval(&xiv.xis) * jet[*m] * *w)
            .sum())
    }

    pub fn eval(&self, xf: &XiForms, x: &[f64]) -> Result<C64> {
        self.eval_xi(&xf.eval(x))
    }

    pub fn to_record(&self, xf: &XiForms) -> MemberRecord {
        MemberRecord {
            kind: self.kind,
            index: self.index,
            function: self.function.to_string(),
            terms: self
                .terms
                .iter()
                .map(|t| MemberTermRecord {
                    pole: t.pole,
                    poly: t.poly.to_record(),
                })
                .collect(),
            xi: xf.to_record(),
        }
    }

    pub fn from_record(rec: &MemberRecord) -> Result<(Self, XiForms)> {
        let function: Builtin = rec.function.parse()?;
        if rec.kind == FamilyKind::Exp && function != Builtin::Exp {
            return Err(Error::Format("exponential members must use exp".into()));
        }
        let member = FamilyMember {
            kind: rec.kind,
            index: rec.index,
            function,
            terms: rec
                .terms
                .iter()
                .map(|t| MemberTerm {
                    pole: t.pole,
                    poly: Poly::from_record(&t.poly),
                })
                .collect(),
        };
        Ok((member, XiForms::from_record(&rec.xi)?))
    }

    /// `V_r=…` or `U_k=…` in the layout `ξ_3F_3'(ξ)+ξ_1ξ_2F_3''(ξ)+…`.
    pub fn to_latex(&self) -> String {
        let k = self.index;
        match self.kind {
            FamilyKind::Exp => {
                let poly = &self.terms[0].poly;
                let body = if *poly == Poly::constant(C64::new(1.0, 0.0)) {
                    String::new()
                } else if poly.len() == 1 {
                    poly.to_latex()
                } else {
                    format!("\\left({}\\right)", poly.to_latex())
                };
                format!("V_{{{k}}}={body}e^{{\\xi}}")
            }
            FamilyKind::Analytic => {
                let mut out = format!("U_{{{k}}}=");
                for (i, (p, m, w)) in self.parts().into_iter().enumerate() {
                    let f = format!("F_{{{k}}}{}(\\xi)", prime(m));
                    let scaled = p.scale(C64::new(w, 0.0));
                    let term = if scaled.len() == 1 {
                        let (mono, c) = scaled.terms().next().expect("one term");
                        let mono_tex = Poly::from_terms([(mono.clone(), C64::new(1.0, 0.0))]);
                        let body = if mono.degree() == 0 {
                            f
                        } else {
                            format!("{}{f}", mono_tex.to_latex())
                        };
                        signed_term(*c, &body, i == 0)
                    } else {
                        let sep = if i == 0 { "" } else { "+" };
                        format!("{sep}\\left({}\\right){f}", scaled.to_latex())
                    };
                    out.push_str(&term);
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberTermRecord {
    pub pole: usize,
    pub poly: Vec<MonomialRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub kind: FamilyKind,
    pub index: usize,
    pub function: String,
    pub terms: Vec<MemberTermRecord>,
    pub xi: XiFormsRecord,
}

fn check_index(xf: &XiForms, max: usize) -> Result<()> {
    if max > xf.n() - 1 {
        return Err(Error::InsufficientMembers {
            requested: max,
            available: xf.n() - 1,
        });
    }
    Ok(())
}

/// `V_0 … V_{r_max}`.
pub fn exp_family(xf: &XiForms, r_max: usize) -> Result<Vec<FamilyMember>> {
    check_index(xf, r_max)?;
    let psi = psi_polynomials(xf.n())?;
    Ok(psi[..=r_max]
        .iter()
        .map(|p| FamilyMember {
            kind: FamilyKind::Exp,
            index: p.index(),
            terms: vec![MemberTerm {
                pole: 0,
                poly: p.poly().clone(),
            }],
            function: Builtin::Exp,
        })
        .collect())
}

/// `U_0 … U_{k_max}`; `fs` holds one function shared by all members or one per member.
pub fn analytic_family(xf: &XiForms, k_max: usize, fs: &[Builtin]) -> Result<Vec<FamilyMember>> {
    check_index(xf, k_max)?;
    if fs.len() != 1 && fs.len() != k_max + 1 {
        return Err(Error::Format(format!(
            "need 1 or {} analytic functions, got {}",
            k_max + 1,
            fs.len()
        )));
    }
    let a = rho_expansions(xf.n())?;
    Ok(a[..=k_max]
        .iter()
        .map(|ak| FamilyMember {
            kind: FamilyKind::Analytic,
            index: ak.index(),
            terms: ak
                .terms()
                .map(|(pole, poly)| MemberTerm {
                    pole,
                    poly: poly.clone(),
                })
                .collect(),
            function: fs[if fs.len() == 1 { 0 } else { ak.index() }].clone(),
        })
        .collect())
}

/// `analytic_family` restricted to what solves `pde`: arbitrary `F` needs a homogeneous
/// equation, otherwise only `exp` is accepted.
pub fn analytic_family_for(
    pde: &PdeSpec,
    xf: &XiForms,
    k_max: usize,
    fs: &[Builtin],
) -> Result<Vec<FamilyMember>> {
    if !pde.is_homogeneous() {
        if let Some(f) = fs.iter().find(|f| **f != Builtin::Exp) {
            return Err(Error::InvalidPde(format!(
                "`{f}` does not give solutions of an equation with mixed derivative orders; use exp"
            )));
        }
    }
    analytic_family(xf, k_max, fs)
}

/// Real shift `c` with `|ξ(x) − c| ≥ 1` for every `x` in the box `[−radius, radius]^d`.
pub fn safe_reciprocal_shift(xf: &XiForms, radius: f64) -> C64 {
    let reach: f64 = xf.xi_form.iter().map(|c| c.norm()).sum::<f64>() * radius;
    C64::new(reach + 1.0, 0.0)
}

/// Real and imaginary parts of a complex solution value.
pub fn real_imag_split(value: C64) -> (f64, f64) {
    (value.re, value.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charsolve::{Branch, Preset};
    use crate::nilalg::exp_elem;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn forms(n: usize) -> XiForms {
        XiForms::new(
            vec![c(0.4, 0.3), c(-0.2, 0.9)],
            (1..n)
                .map(|k| vec![c(0.1 * k as f64, -0.3), c(0.5, 0.2 / k as f64)])
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn xi_forms_from_basis() {
        let free = vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(0.0)]];
        let b = Preset::Laplace3d.oracle(2, &free, Branch::PLUS).unwrap();
        let xf = build_xi_forms(&b);
        assert_eq!(xf.xi_form, vec![r(1.0), r(0.0), c(0.0, 1.0)]);
        assert_eq!(xf.to_latex(&["x", "y", "z"])[0], "\\xi=x+iz");

        let b = Preset::Beam { a: 1.0 }
            .oracle(2, &[vec![r(1.0), r(0.0)]], Branch::PLUS)
            .unwrap();
        let xf = build_xi_forms(&b);
        assert_eq!(xf.xi_form, vec![c(0.0, 1.0), r(1.0)]);
        assert_eq!(xf.to_latex(&["x", "y"])[0], "\\xi=ix+y");

        let xf = XiForms::new(vec![r(2.0)], vec![vec![r(3.0)]]).unwrap();
        assert_eq!(xf.eval(&[0.5]), XiValues::new(r(1.0), vec![r(1.5)]));
    }

    #[test]
    fn exp_family_matches_exp_elem() {
        let xf = forms(6);
        let fam = exp_family(&xf, 5).unwrap();
        let x = [0.3, -0.8];
        let xiv = xf.eval(&x);
        let e = exp_elem(&xiv.to_element().unwrap());
        for m in &fam {
            let v = m.eval(&xf, &x).unwrap();
            assert!((v - e.coeffs()[m.index]).norm() < 1e-13);
        }
        assert_eq!(fam[0].to_latex(), "V_{0}=e^{\\xi}");
        assert_eq!(fam[1].to_latex(), "V_{1}=\\xi_1e^{\\xi}");
        assert_eq!(
            fam[2].to_latex(),
            "V_{2}=\\left(\\xi_2+\\frac{1}{2}\\xi_1^{2}\\right)e^{\\xi}"
        );
    }

    #[test]
    fn analytic_with_exp_is_exp_family() {
        let xf = forms(7);
        let v = exp_family(&xf, 6).unwrap();
        let u = analytic_family(&xf, 6, &[Builtin::Exp]).unwrap();
        for x in [[0.0, 0.0], [0.7, -0.2], [-1.0, 1.0]] {
            for (a, b) in v.iter().zip(&u) {
                let (va, vb) = (a.eval(&xf, &x).unwrap(), b.eval(&xf, &x).unwrap());
                assert!((va - vb).norm() < 1e-10 * (1.0 + va.norm()));
            }
        }
    }

    #[test]
    fn analytic_layout() {
        let xf = forms(4);
        let u = analytic_family(&xf, 3, &[Builtin::Exp]).unwrap();
        assert_eq!(u[0].to_latex(), "U_{0}=F_{0}(\\xi)");
        assert_eq!(u[1].to_latex(), "U_{1}=\\xi_1F_{1}'(\\xi)");
        assert_eq!(
            u[3].to_latex(),
            "U_{3}=\\xi_3F_{3}'(\\xi)+\\xi_1\\xi_2F_{3}''(\\xi)+\\frac{1}{6}\\xi_1^{3}F_{3}'''(\\xi)"
        );
        // F = identity: U_1 is the linear form ξ_1
        let id = Builtin::Polynomial(vec![r(0.0), r(1.0)]);
        let u = analytic_family(&xf, 2, &[id]).unwrap();
        let x = [0.25, -0.5];
        let xiv = xf.eval(&x);
        assert!((u[1].eval(&xf, &x).unwrap() - xiv.xis[0]).norm() < 1e-15);
    }

    #[test]
    fn member_count_is_bounded() {
        let xf = forms(4);
        assert_eq!(
            exp_family(&xf, 9),
            Err(Error::InsufficientMembers {
                requested: 9,
                available: 3
            })
        );
        assert!(analytic_family(&xf, 2, &[Builtin::Exp, Builtin::Sin]).is_err());
    }

    #[test]
    fn splits() {
        let xf = XiForms::new(vec![r(1.0), r(0.0), c(0.0, 1.0)], vec![vec![r(0.0); 3]]).unwrap();
        let v0 = &exp_family(&xf, 0).unwrap()[0];
        let (re, im) = real_imag_split(v0.eval(&xf, &[1.0, 0.0, 0.0]).unwrap());
        assert!((re - 1f64.exp()).abs() < 1e-15 && im == 0.0);
        let (re, im) = real_imag_split(v0.eval(&xf, &[0.0, 0.0, std::f64::consts::PI]).unwrap());
        assert!((re + 1.0).abs() < 1e-15 && im.abs() < 1e-15);
    }

    #[test]
    fn records_round_trip() {
        let xf = forms(5);
        let mut fam = analytic_family(&xf, 4, &[Builtin::Reciprocal(c(3.0, 1.0))]).unwrap();
        fam.extend(exp_family(&xf, 4).unwrap());
        for m in fam {
            let json = serde_json::to_string(&m.to_record(&xf)).unwrap();
            let (back, bxf) = FamilyMember::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back, m);
            assert_eq!(bxf, xf);
        }
    }

    #[test]
    fn linear_combinations() {
        let xf = forms(4);
        let u = analytic_family(&xf, 3, &[Builtin::Sin]).unwrap();
        let coeffs = [c(1.0, 2.0), r(-0.5), c(0.0, 3.0), r(2.0)];
        let x = [0.1, 0.9];
        let combo: C64 = u
            .iter()
            .zip(coeffs)
            .map(|(m, a)| a * m.eval(&xf, &x).unwrap())
            .sum();
        // the same combination built term by term from the pole expansion
        let xiv = xf.eval(&x);
        let jet = Builtin::Sin.jet(xiv.xi, 4).unwrap();
        let mut direct = r(0.0);
        for (m, a) in u.iter().zip(coeffs) {
            for t in &m.terms {
                let s = t.pole;
                direct += a * t.poly.eval(&xiv.xis) * jet[s - 1] / factorial(s - 1);
            }
        }
        assert!((combo - direct).norm() < 1e-14);
    }
}
