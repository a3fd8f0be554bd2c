//! Small helpers for LaTeX output.

use crate::nilalg::C64;

/// Best rational approximation `p/q` with `q ≤ max_den`, accepted only if it
/// reproduces `x` to about machine precision.
pub fn as_rational(x: f64, max_den: u64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let tol = 4.0 * f64::EPSILON * x.abs().max(1e-300);
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let approx = p1 as f64 / q1 as f64;
        if (approx - x.abs()).abs() <= tol {
            let p = p1 as i64;
            return Some((if neg { -p } else { p }, q1));
        }
        let frac = v - a as f64;
        if frac == 0.0 {
            break;
        }
        v = 1.0 / frac;
    }
    if x == 0.0 {
        return Some((0, 1));
    }
    None
}

fn real_latex(x: f64) -> String {
    match as_rational(x, 1_000_000) {
        Some((p, 1)) => format!("{p}"),
        Some((p, q)) if p < 0 => format!("-\\frac{{{}}}{{{q}}}", -p),
        Some((p, q)) => format!("\\frac{{{p}}}{{{q}}}"),
        None => decimal_latex(x),
    }
}

// Ten significant digits; scientific notation outside [1e-4, 1e6).
fn decimal_latex(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e6).contains(&a) {
        let s = format!("{x:.9e}");
        let (m, e) = s.split_once('e').unwrap_or((&s, "0"));
        let m = m.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}\\times10^{{{e}}}");
    }
    let digits = if a == 0.0 { 0 } else { (9 - a.log10().floor() as i32).max(0) as usize };
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A coefficient as LaTeX, without sign normalization.
pub fn complex_latex(c: C64) -> String {
    if c.im == 0.0 {
        real_latex(c.re)
    } else if c.re == 0.0 {
        match real_latex(c.im).as_str() {
            "1" => "i".into(),
            "-1" => "-i".into(),
            s => format!("{s}i"),
        }
    } else {
        let im = real_latex(c.im);
        let sep = if im.starts_with('-') { "" } else { "+" };
        format!("({}{sep}{im}i)", real_latex(c.re))
    }
}

/// Renders `c·body` as a term of a sum; `first` suppresses a leading `+`.
pub fn signed_term(c: C64, body: &str, first: bool) -> String {
    let (neg, mag) = if c.im == 0.0 && c.re < 0.0 {
        (true, C64::new(-c.re, 0.0))
    } else {
        (false, c)
    };
    let coeff = if !body.is_empty() && mag == C64::new(1.0, 0.0) {
        String::new()
    } else {
        complex_latex(mag)
    };
    let sign = match (neg, first) {
        (true, _) => "-",
        (false, true) => "",
        (false, false) => "+",
    };
    if body.is_empty() {
        format!("{sign}{coeff}")
    } else {
        format!("{sign}{coeff}{body}")
    }
}

/// `'`, `''`, `'''` then `^{(m)}` for derivative orders.
pub fn prime(order: usize) -> String {
    match order {
        0 => String::new(),
        1..=3 => "'".repeat(order),
        m => format!("^{{({m})}}"),
    }
}
