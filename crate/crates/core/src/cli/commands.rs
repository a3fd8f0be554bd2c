use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    effective_seed, CheckArg, CliError, Command, FamilyArgs, KindArg, Method, ProblemArgs,
    VerifyArgs,
};
use crate::charsolve::{
    characteristic_residual, solve_characteristic, Branch, CharBasis, CharBasisRecord, PdeRecord,
    PdeSpec, Preset, RootChoice, CHAR_RESIDUAL_TOL,
};
use crate::nilalg::C64;
use crate::solutions::{
    analytic_family_for, build_xi_forms, exp_family, safe_reciprocal_shift, Builtin,
    FamilyKind, FamilyMember, MemberRecord, XiForms,
};
use crate::verify::{
    cauchy_integral_check, cauchy_riemann_check, exp_zeta_jets, verify_family, CauchyReport,
    CircleSpec, ResidualReport, SampleSpec,
};

pub const TOOL: &str = concat!("nilsolve ", env!("CARGO_PKG_VERSION"));

/// Loop integrals count as zero below `CAUCHY_TOL · max(1, max integrand)`.
pub const CAUCHY_TOL: f64 = 1e-7;

/// Bound on the normalized Cauchy–Riemann defect of `exp ζ`.
pub const CR_TOL: f64 = 1e-9;

/// Which equation, with which parameters, in which variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub preset: Option<String>,
    pub params: BTreeMap<String, C64>,
    pub variables: Vec<String>,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisArtifact {
    pub tool: String,
    pub seed: u64,
    pub problem: ProblemRecord,
    pub pde: PdeRecord,
    pub free: BTreeMap<String, Vec<C64>>,
    pub characteristic_residual: f64,
    pub basis: CharBasisRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamiliesArtifact {
    pub tool: String,
    pub seed: u64,
    pub problem: ProblemRecord,
    pub pde: PdeRecord,
    pub basis: CharBasisRecord,
    pub kind: FamilyKind,
    pub members: Vec<MemberRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyArtifact {
    pub tool: String,
    pub seed: u64,
    pub check: String,
    pub passed: bool,
    pub characteristic_residual: f64,
    pub residual: Option<ResidualReport>,
    pub cauchy_riemann: Option<f64>,
    pub cauchy: Option<CauchyReport>,
    pub cauchy_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMember {
    pub kind: FamilyKind,
    pub index: usize,
    pub function: String,
    pub values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalArtifact {
    pub points: Vec<Vec<f64>>,
    pub members: Vec<EvalMember>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `re`, `re:im`, `a+bi`, `bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(':') {
        return Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Some(C64::new(s.parse().ok()?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().ok()?,
    };
    Some(C64::new(re, im))
}

fn preset_from(name: &str, args: &ProblemArgs) -> Result<Preset, CliError> {
    Ok(match name {
        "laplace3d" => Preset::Laplace3d,
        "wave3d" => Preset::Wave3d,
        "beam" => Preset::Beam { a: args.a },
        "beam_hyp" => Preset::BeamHyp { a: args.a },
        "biharmonic" => Preset::Biharmonic { p: args.p },
        "helmholtz" => Preset::Helmholtz {
            lambda: parse_complex(&args.lambda)
                .ok_or_else(|| usage(format!("--lambda: cannot parse `{}`", args.lambda)))?,
        },
        "hydro" => Preset::Hydro {
            alpha: args.alpha,
            beta: args.beta,
        },
        _ => {
            return Err(usage(format!(
                "unknown preset `{name}`; expected one of {}",
                Preset::NAMES.join(", ")
            )))
        }
    })
}

fn preset_params(p: &Preset) -> BTreeMap<String, C64> {
    let r = |x: f64| C64::new(x, 0.0);
    let pairs: Vec<(&str, C64)> = match *p {
        Preset::Laplace3d | Preset::Wave3d => vec![],
        Preset::Beam { a } | Preset::BeamHyp { a } => vec![("a", r(a))],
        Preset::Biharmonic { p } => vec![("p", r(p))],
        Preset::Helmholtz { lambda } => vec![("lambda", lambda)],
        Preset::Hydro { alpha, beta } => vec![("alpha", r(alpha)), ("beta", r(beta))],
    };
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn draw_free(rng: &mut ChaCha8Rng, count: usize, n: usize) -> Vec<Vec<C64>> {
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                .collect()
        })
        .collect()
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn apply_free(
    names: &[String],
    free: &mut [Vec<C64>],
    tokens: &[String],
    file: Option<&Path>,
) -> Result<(), CliError> {
    let lookup = |name: &str| {
        names.iter().position(|n| n == name).ok_or_else(|| {
            usage(format!("unknown free sequence `{name}`; expected one of {}", names.join(", ")))
        })
    };
    let mut set = |j: usize, start: usize, values: &[C64], what: &str| {
        if start + values.len() > free[j].len() {
            return Err(usage(format!(
                "{what}: index {} is beyond the algebra dimension {}",
                start + values.len() - 1,
                free[j].len()
            )));
        }
        free[j][start..start + values.len()].copy_from_slice(values);
        Ok(())
    };
    if let Some(path) = file {
        let map: BTreeMap<String, Vec<C64>> = read_json(path)?;
        for (name, values) in &map {
            set(lookup(name)?, 0, values, &path.display().to_string())?;
        }
    }
    for tok in tokens {
        let (lhs, rhs) = tok
            .split_once('=')
            .ok_or_else(|| usage(format!("--free {tok}: expected NAME=VALUES")))?;
        let lhs = lhs.trim();
        let (name, start) = if let Some((n, i)) = lhs.split_once('.') {
            (n, Some(i))
        } else if names.iter().any(|n| n == lhs) {
            (lhs, None)
        } else {
            let cut = lhs.trim_end_matches(|c: char| c.is_ascii_digit()).len();
            (&lhs[..cut], Some(&lhs[cut..]))
        };
        let start = match start {
            Some(i) => i
                .parse()
                .map_err(|_| usage(format!("--free {tok}: bad coefficient index `{i}`")))?,
            None => 0,
        };
        let values = rhs
            .split(',')
            .map(|v| {
                parse_complex(v).ok_or_else(|| usage(format!("--free {tok}: cannot parse `{v}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        set(lookup(name)?, start, &values, &format!("--free {tok}"))?;
    }
    Ok(())
}

/// Draws the free data from `seed`, applies overrides and solves.
pub fn cmd_solve(args: &ProblemArgs, seed: u64) -> Result<BasisArtifact, CliError> {
    let n = args.n;
    if n < 2 {
        return Err(usage(format!("--n must be at least 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pde, names, free, basis, problem) = match (&args.preset, &args.pde) {
        (Some(name), None) => {
            if args.lift.is_some() {
                return Err(usage("--lift applies to --pde only; presets fix the solved variable"));
            }
            let preset = preset_from(name, args)?;
            let names: Vec<String> = preset.free_names().iter().map(|s| s.to_string()).collect();
            let mut free = preset.random_free(&mut rng, n);
            apply_free(&names, &mut free, &args.free, args.free_file.as_deref())?;
            let branch: Branch = args.branch.as_deref().unwrap_or("plus").parse()?;
            let basis = match args.method {
                Method::Generic => preset.solve(n, &free, branch)?,
                Method::Oracle => preset.oracle(n, &free, branch)?,
            };
            let problem = ProblemRecord {
                preset: Some(preset.name().to_string()),
                params: preset_params(&preset),
                variables: preset.variables().iter().map(|s| s.to_string()).collect(),
                method: basis.provenance.method.clone(),
            };
            (preset.pde(), names, free, basis, problem)
        }
        (None, Some(path)) => {
            if args.method == Method::Oracle {
                return Err(usage("--method oracle needs a --preset"));
            }
            let rec: PdeRecord = read_json(path)?;
            let pde = PdeSpec::from_record(&rec)?;
            let d = pde.d();
            let lift = args.lift.unwrap_or(d);
            if lift == 0 || lift > d {
                return Err(usage(format!("--lift must be in 1..={d}, got {lift}")));
            }
            let names: Vec<String> = (1..=d).filter(|&j| j != lift).map(|j| format!("e{j}")).collect();
            let mut free = draw_free(&mut rng, d - 1, n);
            apply_free(&names, &mut free, &args.free, args.free_file.as_deref())?;
            let choice: RootChoice = args.branch.as_deref().unwrap_or("index:0").parse()?;
            let basis = solve_characteristic(&pde, n, &free, lift - 1, choice)?;
            let problem = ProblemRecord {
                preset: None,
                params: BTreeMap::new(),
                variables: (1..=d).map(|j| format!("x_{{{j}}}")).collect(),
                method: basis.provenance.method.clone(),
            };
            (pde, names, free, basis, problem)
        }
        _ => return Err(usage("give exactly one of --preset and --pde")),
    };
    Ok(BasisArtifact {
        tool: TOOL.to_string(),
        seed,
        problem,
        pde: pde.to_record(),
        free: names.into_iter().zip(free).collect(),
        characteristic_residual: characteristic_residual(&pde, &basis.vectors)?,
        basis: basis.to_record(),
    })
}

fn parse_function(spec: &str, xf: &XiForms) -> Result<Builtin, CliError> {
    if spec.trim() == "reciprocal:safe" {
        return Ok(Builtin::Reciprocal(safe_reciprocal_shift(xf, 1.0)));
    }
    Ok(spec.parse()?)
}

/// Members and their LaTeX, the first line of which is a version banner.
pub fn cmd_families(
    art: &BasisArtifact,
    args: &FamilyArgs,
) -> Result<(FamiliesArtifact, String), CliError> {
    let pde = PdeSpec::from_record(&art.pde)?;
    let basis = CharBasis::from_record(&art.basis)?;
    let xf = build_xi_forms(&basis);
    let max = args.max.unwrap_or(basis.n() - 1);
    let members = match args.kind {
        KindArg::Exp => {
            if !args.functions.is_empty() {
                return Err(usage("--F applies to --kind analytic only"));
            }
            exp_family(&xf, max)?
        }
        KindArg::Analytic => {
            let fs = if args.functions.is_empty() {
                vec![Builtin::Exp]
            } else {
                args.functions
                    .iter()
                    .map(|f| parse_function(f, &xf))
                    .collect::<Result<Vec<_>, _>>()?
            };
            analytic_family_for(&pde, &xf, max, &fs)?
        }
    };
    let vars: Vec<&str> = art.problem.variables.iter().map(String::as_str).collect();
    let mut latex = format!("% {TOOL}\n");
    latex.push_str(&format!(
        "% {}, n = {}, seed = {}\n",
        art.problem.preset.as_deref().unwrap_or("pde"),
        basis.n(),
        art.seed
    ));
    for line in xf.to_latex(&vars) {
        latex.push_str(&format!("\\[ {line} \\]\n"));
    }
    for m in &members {
        latex.push_str(&format!("\\[ {} \\]\n", m.to_latex()));
    }
    let fam = FamiliesArtifact {
        tool: TOOL.to_string(),
        seed: art.seed,
        problem: art.problem.clone(),
        pde: art.pde.clone(),
        basis: art.basis.clone(),
        kind: members.first().map_or(FamilyKind::Exp, |m| m.kind),
        members: members.iter().map(|m| m.to_record(&xf)).collect(),
    };
    Ok((fam, latex))
}

fn load_members(fam: &FamiliesArtifact) -> Result<(Vec<FamilyMember>, XiForms), CliError> {
    let mut members = Vec::with_capacity(fam.members.len());
    let mut forms: Option<XiForms> = None;
    for rec in &fam.members {
        let (m, xf) = FamilyMember::from_record(rec)?;
        match &forms {
            Some(f) if *f != xf => {
                return Err(usage(format!("member {} carries different ξ-forms", m.index)))
            }
            Some(_) => {}
            None => forms = Some(xf),
        }
        members.push(m);
    }
    let xf = forms.ok_or_else(|| usage("families file has no members"))?;
    Ok((members, xf))
}

/// Runs the requested check; the artifact records failures rather than erroring.
pub fn cmd_verify(fam: &FamiliesArtifact, args: &VerifyArgs) -> Result<VerifyArtifact, CliError> {
    let pde = PdeSpec::from_record(&fam.pde)?;
    let basis = CharBasis::from_record(&fam.basis)?;
    let (members, xf) = load_members(fam)?;
    let seed = args.sample_seed.unwrap_or(fam.seed);
    let char_res = characteristic_residual(&pde, &basis.vectors)?;
    let mut out = VerifyArtifact {
        tool: TOOL.to_string(),
        seed,
        check: String::new(),
        passed: char_res <= CHAR_RESIDUAL_TOL,
        characteristic_residual: char_res,
        residual: None,
        cauchy_riemann: None,
        cauchy: None,
        cauchy_threshold: None,
    };
    match args.check {
        CheckArg::Residual => {
            out.check = "residual".into();
            let spec = SampleSpec {
                points: args.points,
                seed,
                radius: args.radius,
                fd_points: args.fd_points.min(args.points),
                jobs: args.jobs,
            };
            let report = verify_family(&pde, &members, &xf, &spec)?;
            let vmax = basis.vectors.iter().map(|v| v.max_norm()).fold(0.0, f64::max);
            let mut cr = 0.0_f64;
            for x in spec.sample(pde.d()).iter().take(10) {
                let jets = exp_zeta_jets(&xf, x, 1)?;
                let jmax = jets
                    .iter()
                    .flat_map(|j| j.coeffs().iter().map(|c| c.norm()))
                    .fold(0.0, f64::max);
                cr = cr.max(cauchy_riemann_check(&basis, &jets)? / ((1.0 + jmax) * (1.0 + vmax)));
            }
            out.passed &= report.passed && cr <= CR_TOL;
            out.residual = Some(report);
            out.cauchy_riemann = Some(cr);
        }
        CheckArg::Cauchy => {
            out.check = "cauchy".into();
            if let Some((i, m)) = members
                .iter()
                .enumerate()
                .take(args.n_index + 1)
                .find(|(i, m)| m.index != *i)
            {
                return Err(usage(format!("member at position {i} has index {}", m.index)));
            }
            let circle = CircleSpec::unit(pde.d(), args.quad_points);
            let report = cauchy_integral_check(&members, &xf, &circle, args.n_index)?;
            let threshold = CAUCHY_TOL * report.max_integrand.max(1.0);
            out.passed &= report.abs <= threshold;
            out.cauchy = Some(report);
            out.cauchy_threshold = Some(threshold);
        }
    }
    Ok(out)
}

pub fn cmd_eval(fam: &FamiliesArtifact, points: &[Vec<f64>]) -> Result<EvalArtifact, CliError> {
    let (members, xf) = load_members(fam)?;
    if let Some(p) = points.iter().find(|p| p.len() != xf.d) {
        return Err(usage(format!("point {p:?} does not have {} coordinates", xf.d)));
    }
    let members = members
        .iter()
        .map(|m| {
            Ok(EvalMember {
                kind: m.kind,
                index: m.index,
                function: m.function.to_string(),
                values: points
                    .iter()
                    .map(|x| m.eval(&xf, x))
                    .collect::<crate::Result<Vec<_>>>()?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(EvalArtifact {
        points: points.to_vec(),
        members,
    })
}

fn verdict(report: &VerifyArtifact) -> Result<(), CliError> {
    if report.passed {
        return Ok(());
    }
    let detail = match (&report.residual, &report.cauchy) {
        (Some(r), _) => format!(
            "residual max_rel {:e} at {:?}, Cauchy–Riemann defect {:e}",
            r.max_rel,
            r.worst_point,
            report.cauchy_riemann.unwrap_or(0.0)
        ),
        (_, Some(c)) => format!("loop integral magnitude {:e}", c.abs),
        _ => String::new(),
    };
    Err(CliError::Verification(format!(
        "verification failed (characteristic residual {:e}; {detail})",
        report.characteristic_residual
    )))
}

pub(super) fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Solve { problem, out } => {
            let art = cmd_solve(&problem, effective_seed(problem.seed)?)?;
            write_text(out.as_deref(), &to_json(&art)?)
        }
        Command::Families { basis, family, out } => {
            let art: BasisArtifact = read_json(&basis)?;
            let (fam, latex) = cmd_families(&art, &family)?;
            write_text(out.as_deref(), &to_json(&fam)?)?;
            if let Some(p) = &family.latex {
                write_text(Some(p), &latex)?;
            }
            Ok(())
        }
        Command::Verify {
            families,
            check,
            out,
        } => {
            let fam: FamiliesArtifact = read_json(&families)?;
            let report = cmd_verify(&fam, &check)?;
            write_text(out.as_deref(), &to_json(&report)?)?;
            verdict(&report)
        }
        Command::Eval {
            families,
            points,
            out,
        } => {
            let fam: FamiliesArtifact = read_json(&families)?;
            let pts: Vec<Vec<f64>> = read_json(&points)?;
            write_text(out.as_deref(), &to_json(&cmd_eval(&fam, &pts)?)?)
        }
        Command::Pipeline {
            problem,
            family,
            check,
            out_dir,
        } => {
            fs::create_dir_all(&out_dir)
                .map_err(|e| usage(format!("cannot create {}: {e}", out_dir.display())))?;
            let art = cmd_solve(&problem, effective_seed(problem.seed)?)?;
            write_text(Some(&out_dir.join("basis.json")), &to_json(&art)?)?;
            let (fam, latex) = cmd_families(&art, &family)?;
            write_text(Some(&out_dir.join("families.json")), &to_json(&fam)?)?;
            if let Some(p) = &family.latex {
                write_text(Some(p), &latex)?;
            }
            let report = cmd_verify(&fam, &check)?;
            write_text(Some(&out_dir.join("report.json")), &to_json(&report)?)?;
            verdict(&report)
        }
    }
}
