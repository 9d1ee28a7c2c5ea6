//! Subcommand implementations. Each returns a report and the exit code.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fuzzy_holonomy::calculus::{
    apply_derivation, differential, maurer_cartan_defect, theta_eval, DerivationVector,
    DifferentialForm,
};
use fuzzy_holonomy::connection::{
    compatibility_defect, curvature, gauge_transform, hermiticity_check,
};
use fuzzy_holonomy::fuzzy::{
    block_representation, build_scenario, gauge_copy_report, parse_spin_list, GaugeCopyOptions,
    SpinLabel,
};
use fuzzy_holonomy::linalg::{
    haar_unitary_from, mat_exp, random_matrix, seeded_rng, CMatrix, C64, DEFAULT_TOL,
};
use fuzzy_holonomy::transport::{
    automorphism_flow, decide_gauge_equivalence, default_max_degree, module_transport, observable,
    ode_defect, transport_endomorphism, EquivalenceVerdict, Word,
};
use fuzzy_holonomy::{Error, LoadedScenario, Scenario};
use rand::Rng;

use crate::report::{file_digest, Report};
use crate::words::{letter_label, parse_letter, parse_words, word_label};
use crate::{Cli, Command, DeciderArgs, Demo};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_INEQUIVALENT: u8 = 2;

const CLOSURE_TOL: f64 = 1e-9;
const DEFECT_TOL: f64 = 1e-10;
const LEIBNIZ_TOL: f64 = 1e-11;
const GROUP_TOL: f64 = 1e-11;
const ODE_TOL: f64 = 1e-8;
const DEMO_FLAT_TOL: f64 = 1e-12;

pub fn run(cli: &Cli) -> Result<(Report, u8)> {
    let seed = cli.seed;
    let (mut report, code) = match &cli.command {
        Command::Check { scenario } => check(scenario, seed)?,
        Command::Curvature { scenario, tol } => curvature_cmd(scenario, *tol)?,
        Command::Transport {
            scenario,
            x,
            tau,
            verify_ode,
            h,
        } => transport(scenario, x, *tau, verify_ode.then_some(*h), seed)?,
        Command::Observables {
            scenario,
            tau,
            words,
        } => observables(scenario, *tau, words.as_deref())?,
        Command::GaugeEquiv { a, b, decider } => gauge_equiv(a, b, decider, seed)?,
        Command::FuzzySphere { j, spins, out } => fuzzy_sphere(j, spins, out)?,
        Command::Demo(Demo::GaugeCopy {
            j,
            sets,
            tau,
            decider,
        }) => demo_gauge_copy(j, sets, *tau, decider, seed)?,
    };
    report.seal();
    Ok((report, code))
}

/// Turns library errors into messages with a remediation hint where one helps.
fn explain(e: Error) -> anyhow::Error {
    match e {
        Error::GuardExceeded { .. } => {
            anyhow!("{e}; reduce |tau| or the size of X, or compose several shorter transports")
        }
        Error::NotHermitianConnection { .. } => {
            anyhow!("{e}; the equivalence decision needs antihermitian potentials on the real basis elements")
        }
        other => anyhow!(other),
    }
}

fn load(path: &Path, report: &mut Report, name: &str) -> Result<LoadedScenario> {
    let bytes =
        fs::read(path).with_context(|| format!("cannot read scenario {}", path.display()))?;
    report.input(name, file_digest(&bytes));
    let text =
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let loaded = Scenario::from_json(&text)
        .and_then(|s| s.validate())
        .with_context(|| format!("invalid scenario {}", path.display()))?;
    report
        .warnings
        .extend(loaded.warnings.iter().map(|w| format!("{name}: {w}")));
    Ok(loaded)
}

fn real_vector<R: Rng>(d: usize, rng: &mut R) -> DerivationVector {
    DerivationVector::real(
        &(0..d)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect::<Vec<_>>(),
    )
}

fn check(path: &Path, seed: u64) -> Result<(Report, u8)> {
    let mut r = Report::new("check");
    r.seed = Some(seed);
    let s = load(path, &mut r, "scenario")?;
    let basis = &s.basis;
    let conn = &s.connection;
    let (n, d, m) = (basis.n(), basis.dim(), conn.m());
    let mut rng = seeded_rng(seed);
    r.count("algebra size n", n);
    r.count("basis dimension d", d);
    r.count("module size m", m);
    r.count("real basis elements", basis.real_indices().len());

    let bscale = basis
        .theta_mats()
        .iter()
        .map(CMatrix::frobenius_norm)
        .fold(1.0, f64::max);
    r.bound(
        "bracket closure residual (relative)",
        basis.closure_residual() / bscale.powi(2),
        CLOSURE_TOL,
    );
    r.bound(
        "Jacobi defect (relative)",
        basis.jacobi_defect() / bscale.powi(3),
        DEFECT_TOL,
    );
    r.bound("involution defect", basis.involution_defect(), DEFECT_TOL);
    r.bound(
        "Maurer-Cartan defect",
        maurer_cartan_defect(basis),
        DEFECT_TOL,
    );

    let x = real_vector(d, &mut rng);
    let (a, b) = (random_matrix(n, n, &mut rng), random_matrix(n, n, &mut rng));
    let leib = &(&apply_derivation(basis, &x, &(&a * &b))?
        - &(&apply_derivation(basis, &x, &a)? * &b))
        - &(&a * &apply_derivation(basis, &x, &b)?);
    r.bound(
        "Leibniz defect (relative)",
        leib.frobenius_norm() / (a.frobenius_norm() * b.frobenius_norm()),
        LEIBNIZ_TOL,
    );

    let f0 = DifferentialForm::function(basis, a.clone())?;
    let f1 = DifferentialForm::one_form(
        basis,
        (0..d).map(|_| random_matrix(n, n, &mut rng)).collect(),
    )?;
    let mut dd: f64 = 0.0;
    for f in [&f0, &f1] {
        dd = dd.max(differential(basis, &differential(basis, f)?)?.norm() / f.norm().max(1.0));
    }
    r.bound(
        "d(d w) for random 0- and 1-forms (relative)",
        dd,
        DEFECT_TOL,
    );

    let hermitian = hermiticity_check(conn, DEFAULT_TOL);
    r.flag("connection hermitian", hermitian, Some(DEFAULT_TOL), None);
    if hermitian {
        let (u, v) = (random_matrix(m, n, &mut rng), random_matrix(m, n, &mut rng));
        let defect =
            compatibility_defect(conn, &x, &u, &v)? / (u.frobenius_norm() * v.frobenius_norm());
        r.bound("metric compatibility defect (relative)", defect, DEFECT_TOL);
    }
    r.scalar("max curvature norm", conn.max_curvature_norm());

    // transport laws at a step inside the exponential guard
    let size = conn
        .potential(&x)?
        .frobenius_norm()
        .max(theta_eval(basis, &x)?.frobenius_norm());
    let reach = if size > 10.0 { 10.0 / size } else { 1.0 };
    let (tau, sigma) = (
        reach * rng.random_range(-1.0..=1.0),
        reach * rng.random_range(-1.0..=1.0),
    );
    let sec = random_matrix(m, n, &mut rng);
    let composed = module_transport(
        conn,
        &x,
        tau,
        &module_transport(conn, &x, sigma, &sec).map_err(explain)?,
    )
    .map_err(explain)?;
    let group = module_transport(conn, &x, tau + sigma, &sec)
        .map_err(explain)?
        .distance(&composed)
        / sec.frobenius_norm();
    r.bound("transport group law (relative)", group, GROUP_TOL);
    let alg = random_matrix(n, n, &mut rng);
    let lhs = module_transport(conn, &x, tau, &(&sec * &alg)).map_err(explain)?;
    let rhs = &module_transport(conn, &x, tau, &sec).map_err(explain)?
        * &automorphism_flow(basis, &x, tau, &alg).map_err(explain)?;
    r.bound(
        "transport module property (relative)",
        lhs.distance(&rhs) / (sec.frobenius_norm() * alg.frobenius_norm()),
        GROUP_TOL,
    );

    if hermitian && !basis.real_indices().is_empty() {
        let u = haar_unitary_from(m, &mut rng)?;
        let moved = gauge_transform(conn, &u)?;
        let len = rng.random_range(1..=4);
        let real = basis.real_indices();
        let idx: Vec<usize> = (0..len)
            .map(|_| real[rng.random_range(0..real.len())])
            .collect();
        let w = Word::from_indices(&idx, basis)?;
        let gap = (observable(conn, &w, 1.0).map_err(explain)?
            - observable(&moved, &w, 1.0).map_err(explain)?)
        .norm();
        r.bound(
            format!("gauge invariance of W{}", index_label(&idx)),
            gap,
            DEFECT_TOL * m as f64,
        );
    }

    r.tolerance("closure", CLOSURE_TOL);
    r.tolerance("defect", DEFECT_TOL);
    r.tolerance("leibniz", LEIBNIZ_TOL);
    r.tolerance("group", GROUP_TOL);
    let ok = r.all_pass();
    r.verdict = Some(
        if ok {
            "all invariants pass"
        } else {
            "invariant violated"
        }
        .into(),
    );
    Ok((r, if ok { EXIT_OK } else { EXIT_INVALID }))
}

fn curvature_cmd(path: &Path, tol: f64) -> Result<(Report, u8)> {
    let mut r = Report::new("curvature");
    r.input("tol", format!("{tol:e}"));
    let s = load(path, &mut r, "scenario")?;
    let d = s.basis.dim();
    let mut flat = true;
    for i in 0..d {
        for j in (i + 1)..d {
            let f = curvature(&s.connection, i, j)?.frobenius_norm();
            flat &= r.bound(format!("|F(e{}, e{})|", i + 1, j + 1), f, tol);
        }
    }
    r.tolerance("flatness", tol);
    r.verdict = Some(if flat { "flat" } else { "curved" }.into());
    Ok((r, EXIT_OK))
}

fn transport(
    path: &Path,
    x: &str,
    tau: f64,
    ode_step: Option<f64>,
    seed: u64,
) -> Result<(Report, u8)> {
    let mut r = Report::new("transport");
    r.input("x", x);
    r.input("tau", tau.to_string());
    let s = load(path, &mut r, "scenario")?;
    let (basis, conn) = (&s.basis, &s.connection);
    let coeffs = parse_letter(x, basis.dim())?;
    let xv = DerivationVector::real(&coeffs);
    r.text("derivation", letter_label(&coeffs));
    let theta = theta_eval(basis, &xv)?;
    r.scalar("|theta(X)|", theta.frobenius_norm());
    r.scalar("|B(X)|", conn.potential(&xv)?.frobenius_norm());
    let endo = transport_endomorphism(conn, &xv, tau).map_err(explain)?;
    let flow = mat_exp(&theta, tau)?;
    r.complex("trace of exp(tau B(X))", endo.trace());
    r.matrix("exp(tau B(X))", &endo);
    r.matrix("exp(tau theta(X))", &flow);

    let mut code = EXIT_OK;
    if let Some(h) = ode_step {
        r.seed = Some(seed);
        r.input("h", format!("{h:e}"));
        let mut rng = seeded_rng(seed);
        let sec = random_matrix(conn.m(), basis.n(), &mut rng);
        let norm = sec.frobenius_norm();
        let d1 = ode_defect(conn, &xv, tau, h, &sec).map_err(explain)?;
        let d2 = ode_defect(conn, &xv, tau, h / 2.0, &sec).map_err(explain)?;
        let ok = r.bound(
            format!("ODE defect at h = {h:e} (relative)"),
            d1 / norm,
            ODE_TOL,
        );
        r.scalar(
            format!("ODE defect at h = {:e} (relative)", h / 2.0),
            d2 / norm,
        );
        r.scalar("defect ratio under halving", d1 / d2);
        r.tolerance("ode", ODE_TOL);
        r.verdict = Some(if ok { "ODE satisfied" } else { "ODE violated" }.into());
        if !ok {
            code = EXIT_INVALID;
        }
    }
    Ok((r, code))
}

fn observables(path: &Path, tau: f64, words: Option<&str>) -> Result<(Report, u8)> {
    let mut r = Report::new("observables");
    r.input("tau", tau.to_string());
    let s = load(path, &mut r, "scenario")?;
    let (basis, conn) = (&s.basis, &s.connection);
    let list: Vec<(String, Word)> = match words {
        Some(text) => {
            r.input("words", text);
            parse_words(text, basis.dim())?
                .into_iter()
                .map(|w| {
                    let label = word_label(&w);
                    let letters = w.iter().map(|l| DerivationVector::real(l)).collect();
                    Ok((label, Word::new(letters, basis)?))
                })
                .collect::<Result<_>>()?
        }
        None => {
            if s.words.is_empty() {
                bail!("the scenario has no words; pass them with --words, e.g. --words 'e3;e1,e2'");
            }
            s.scenario
                .words
                .iter()
                .zip(s.words)
                .map(|(raw, w)| (word_label_complex(raw), w))
                .collect()
        }
    };
    for (label, w) in &list {
        r.complex(
            format!("W{label}"),
            observable(conn, w, tau).map_err(explain)?,
        );
    }
    Ok((r, EXIT_OK))
}

fn word_label_complex(raw: &[Vec<fuzzy_holonomy::scenario::Coefficient>]) -> String {
    let letters: Vec<String> = raw
        .iter()
        .map(|l| {
            let vals: Vec<C64> = l.iter().map(|c| c.value()).collect();
            if vals.iter().all(|z| z.im == 0.0) {
                letter_label(&vals.iter().map(|z| z.re).collect::<Vec<_>>())
            } else {
                let parts: Vec<String> = vals
                    .iter()
                    .map(|z| format!("{}{:+}i", z.re, z.im))
                    .collect();
                format!("[{}]", parts.join(" "))
            }
        })
        .collect();
    format!("({})", letters.join(","))
}

fn index_label(idx: &[usize]) -> String {
    format!(
        "({})",
        idx.iter()
            .map(|i| format!("e{}", i + 1))
            .collect::<Vec<_>>()
            .join(",")
    )
}

fn report_verdict(r: &mut Report, prefix: &str, v: &EquivalenceVerdict, tol: f64) {
    let word = v
        .separating_word
        .as_ref()
        .map_or_else(|| "none".into(), |w| index_label(w));
    r.scalar(format!("{prefix}max trace gap"), v.max_trace_gap);
    r.count(format!("{prefix}words compared"), v.words_compared);
    r.text(format!("{prefix}separating word"), word);
    r.count(format!("{prefix}witness trials used"), v.trials_used);
    if let Some(res) = v.witness_residual {
        r.bound(format!("{prefix}witness residual"), res, tol);
    }
    r.flag(
        format!("{prefix}trace agreement only"),
        v.trace_agreement_only,
        None,
        None,
    );
    r.text(format!("{prefix}verdict"), verdict_text(v));
}

fn verdict_text(v: &EquivalenceVerdict) -> &'static str {
    match (v.equivalent, v.trace_agreement_only) {
        (false, _) => "inequivalent",
        (true, false) => "equivalent",
        (true, true) => "equivalent (trace agreement only)",
    }
}

fn gauge_equiv(a: &Path, b: &Path, args: &DeciderArgs, seed: u64) -> Result<(Report, u8)> {
    let mut r = Report::new("gauge-equiv");
    r.seed = Some(seed);
    r.input("trials", args.trials.to_string());
    r.input("tol", format!("{:e}", args.tol));
    let sa = load(a, &mut r, "a")?;
    let sb = load(b, &mut r, "b")?;
    let degree = args
        .degree
        .unwrap_or_else(|| default_max_degree(sa.connection.m()));
    r.input("degree", degree.to_string());
    let v = decide_gauge_equivalence(
        &sa.connection,
        &sb.connection,
        degree,
        args.trials,
        args.tol,
        seed,
    )
    .map_err(explain)?;
    let scale = sa
        .connection
        .potentials()
        .iter()
        .map(CMatrix::frobenius_norm)
        .fold(1.0, f64::max);
    report_verdict(&mut r, "", &v, args.tol * scale);
    if let Some(u) = &v.witness {
        r.matrix("witness u", u);
    }
    r.tolerance("trace comparison", args.tol);
    r.verdict = Some(verdict_text(&v).into());
    Ok((
        r,
        if v.equivalent {
            EXIT_OK
        } else {
            EXIT_INEQUIVALENT
        },
    ))
}

fn fuzzy_sphere(j: &str, spins: &str, out: &Path) -> Result<(Report, u8)> {
    let mut r = Report::new("fuzzy-sphere");
    let jl: SpinLabel = j.parse()?;
    let list = parse_spin_list(spins)?;
    r.input("j", jl.to_string());
    r.input(
        "spins",
        list.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    let scenario = build_scenario(jl, &list)?;
    let json = scenario.to_json();
    fs::write(out, &json).with_context(|| format!("cannot write {}", out.display()))?;
    let loaded = scenario.validate()?;
    r.text("written", out.display().to_string());
    r.text("scenario digest", file_digest(json.as_bytes()));
    r.count("algebra size n", loaded.basis.n());
    r.count("basis dimension d", loaded.basis.dim());
    r.count("module size m", loaded.connection.m());
    r.bound(
        "max curvature norm",
        loaded.connection.max_curvature_norm(),
        DEFECT_TOL,
    );
    r.flag(
        "connection hermitian",
        hermiticity_check(&loaded.connection, DEFAULT_TOL),
        Some(DEFAULT_TOL),
        Some(true),
    );
    Ok((r, EXIT_OK))
}

fn spin_set_label(set: &[SpinLabel]) -> String {
    format!(
        "{{{}}}",
        set.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    )
}

fn demo_gauge_copy(
    j: &str,
    sets: &str,
    tau: f64,
    args: &DeciderArgs,
    seed: u64,
) -> Result<(Report, u8)> {
    let mut r = Report::new("demo gauge-copy");
    r.seed = Some(seed);
    let jl: SpinLabel = j.parse()?;
    let spin_sets = sets
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_spin_list)
        .collect::<fuzzy_holonomy::Result<Vec<_>>>()?;
    if spin_sets.len() < 2 {
        bail!("--sets needs at least two spin multisets separated by `;`");
    }
    r.input("j", jl.to_string());
    r.input(
        "sets",
        spin_sets
            .iter()
            .map(|s| spin_set_label(s))
            .collect::<Vec<_>>()
            .join(";"),
    );
    r.input("tau", tau.to_string());
    r.input("trials", args.trials.to_string());
    r.input("tol", format!("{:e}", args.tol));
    let options = GaugeCopyOptions {
        tau,
        max_degree: args.degree,
        trials: args.trials,
        tol: args.tol,
        seed,
        ..GaugeCopyOptions::default()
    };
    let rep = gauge_copy_report(jl, &spin_sets, &options).map_err(explain)?;
    let labels: Vec<String> = rep.words.iter().map(|w| index_label(w)).collect();
    for (k, set) in rep.sets.iter().enumerate() {
        let p = format!("set {} {}: ", k + 1, spin_set_label(&set.spins));
        r.count(format!("{p}m"), set.m);
        r.bound(format!("{p}max |F|"), set.max_curvature, DEMO_FLAT_TOL);
        r.flag(
            format!("{p}hermitian"),
            set.hermitian,
            Some(DEFAULT_TOL),
            Some(true),
        );
        for (label, w) in labels.iter().zip(&set.observables) {
            r.complex(format!("{p}W{label}"), *w);
        }
    }
    for pair in &rep.verdicts {
        let p = format!("sets {} vs {}: ", pair.first + 1, pair.second + 1);
        let (wa, wb) = (
            rep.sets[pair.first].observables[0],
            rep.sets[pair.second].observables[0],
        );
        r.scalar(format!("{p}|dW{}|", labels[0]), (wa - wb).norm());
        let scale = block_representation(&rep.sets[pair.first].spins)?
            .iter()
            .map(CMatrix::frobenius_norm)
            .fold(1.0, f64::max);
        report_verdict(&mut r, &p, &pair.verdict, args.tol * scale);
    }
    r.tolerance("flatness", DEMO_FLAT_TOL);
    r.tolerance("trace comparison", args.tol);
    let inequivalent = rep.any_inequivalent();
    r.verdict = Some(
        if inequivalent {
            "gauge copies found: inequivalent flat connections"
        } else {
            "all sets gauge equivalent"
        }
        .into(),
    );
    Ok((
        r,
        if inequivalent {
            EXIT_INEQUIVALENT
        } else {
            EXIT_OK
        },
    ))
}
