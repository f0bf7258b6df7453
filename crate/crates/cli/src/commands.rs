//! One function per subcommand; each returns the rendered artifact.

use std::path::Path;

use anyhow::Context;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use polydyn::automorphism::{DegreeMethod, DegreeSequence, Direction, PolyAutomorphism};
use polydyn::classify::sample::affine_change;
use polydyn::classify::{classify as classify_map, conjugate, verify_report, AffineChange, Class4Form};
use polydyn::green::{green_plus, potential_convergence_experiment, trimmed_max, FloatMap, GreenParams};
use polydyn::io::{load_automorphism, load_divisor, rational_string};
use polydyn::pullback::{c_limit_from, siu_direct, siu_sequence, Divisor};
use polydyn::regions::{invariant_line_check, verify_inclusions, RegionParams, Transcription};
use polydyn::GaussianRational;

use crate::output::{col, float, json, named, Artifact, Csv, Format};
use crate::{
    ClassifyArgs, ConjugacyArgs, ConvergeArgs, DegreeMethodArg, DegreesArgs, DirectionArg, GreenGridArgs, GreenOpts,
    RegionArgs, RouteArg, SiuArgs,
};

fn map(path: &Path) -> anyhow::Result<PolyAutomorphism> {
    load_automorphism(path).map_err(|e| named("IoError", e)).with_context(|| format!("loading map {}", path.display()))
}

fn divisor(path: &Path) -> anyhow::Result<Divisor> {
    load_divisor(path).map_err(|e| named("IoError", e)).with_context(|| format!("loading divisor {}", path.display()))
}

fn direction(d: DirectionArg) -> Direction {
    match d {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Inverse => Direction::Inverse,
    }
}

fn method(m: DegreeMethodArg, seed: u64) -> DegreeMethod {
    match m {
        DegreeMethodArg::Symbolic => DegreeMethod::Symbolic,
        DegreeMethodArg::Line => DegreeMethod::GenericLine { seed },
    }
}

fn green_params(o: &GreenOpts) -> GreenParams<f64> {
    GreenParams { escape_radius: o.escape_radius, max_iter: o.max_iter, refine_steps: o.refine_steps }
}

fn gaussian(name: &str, s: &str) -> anyhow::Result<GaussianRational> {
    s.parse().map_err(|e| anyhow::anyhow!("--{name} '{s}': {e}"))
}

pub fn classify(a: &ClassifyArgs) -> anyhow::Result<Artifact> {
    let f = map(&a.map)?;
    let report = classify_map(&f).map_err(|e| named("ClassifyError", e))?;
    let checks = verify_report(&report, a.depth);
    let all_passed = checks.iter().all(|c| c.passed);
    let summary = report.summary();
    eprintln!("{summary}");
    #[derive(Serialize)]
    struct Body<'a, R, C> {
        summary: &'a str,
        class_number: Option<u8>,
        report: R,
        checks: C,
        all_passed: bool,
    }
    let body = Body { summary: &summary, class_number: report.outcome.class_number(), report: &report, checks: &checks, all_passed };
    Ok(Artifact { text: json("classify", a, &body), failed: !all_passed })
}

pub fn degrees(a: &DegreesArgs) -> anyhow::Result<Artifact> {
    let f = map(&a.map)?;
    let seq = f
        .degree_sequence_with(a.n, direction(a.direction), method(a.method, a.seed))
        .map_err(|e| named("AutomorphismError", e))?;
    let estimate = seq.estimate();
    let text = match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a, E> {
                degrees: &'a [u64],
                estimate: Option<E>,
                estimate_error: Option<String>,
            }
            let (est, err) = match &estimate {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e.to_string())),
            };
            json("degrees", a, &Body { degrees: &seq.degrees, estimate: est, estimate_error: err })
        }
        Format::Csv => {
            let mut csv = Csv::new("degrees", a, &["n".into(), col("degree", "exact")]);
            for (i, d) in seq.degrees.iter().enumerate() {
                csv.row(&[(i + 1).to_string(), d.to_string()]);
            }
            match &estimate {
                Ok(e) => {
                    csv.note(format!("dynamical degree: {}", e.value));
                    if let Some(r) = e.recurrence() {
                        let terms: Vec<String> = r.iter().map(i64::to_string).collect();
                        csv.note(format!("recurrence coefficients: {}", terms.join(" ")));
                    }
                }
                Err(e) => csv.note(format!("no estimate: {e}")),
            }
            csv.finish()
        }
    };
    Ok(Artifact { text, failed: false })
}

#[derive(Serialize)]
struct SiuRow {
    n: u32,
    m: u64,
    residual_degree: u32,
    c: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_direct: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    routes_agree: Option<bool>,
}

pub fn siu(a: &SiuArgs) -> anyhow::Result<Artifact> {
    let f = map(&a.map)?;
    let s = divisor(&a.divisor)?;
    let err = |e| named("PullbackError", e);
    let mut rows = Vec::new();
    let mut limit = None;
    if a.route == RouteArg::Direct {
        for n in 1..=a.n {
            let d = siu_direct(&f, &s, n).map_err(err)?;
            rows.push(SiuRow { n, m: d.m, residual_degree: d.residual_degree(), c: rational_string(&d.c), c_direct: None, routes_agree: None });
        }
    } else {
        let seq = siu_sequence(&f, &s, a.n).map_err(err)?;
        for step in &seq.steps {
            let mut row = SiuRow {
                n: step.n,
                m: step.m,
                residual_degree: step.residual_degree(),
                c: rational_string(&step.c),
                c_direct: None,
                routes_agree: None,
            };
            if a.route == RouteArg::Both {
                let d = siu_direct(&f, &s, step.n).map_err(err)?;
                row.routes_agree = Some(d.m == step.m && d.c == step.c);
                row.c_direct = Some(rational_string(&d.c));
            }
            rows.push(row);
        }
        limit = Some(c_limit_from(&f, &seq).map_err(err)?);
    }
    let failed = rows.iter().any(|r| r.routes_agree == Some(false));
    let text = match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a, L> {
                rows: &'a [SiuRow],
                c_limit: Option<L>,
            }
            json("siu", a, &Body { rows: &rows, c_limit: limit.as_ref() })
        }
        Format::Csv => {
            let mut header = vec!["n".into(), col("m_n", "exact"), col("residual_degree", "exact"), col("c_n", "exact")];
            if a.route == RouteArg::Both {
                header.push(col("c_n_direct", "exact"));
                header.push("routes_agree".into());
            }
            let mut csv = Csv::new("siu", a, &header);
            for r in &rows {
                let mut cells = vec![r.n.to_string(), r.m.to_string(), r.residual_degree.to_string(), r.c.clone()];
                if let (Some(c), Some(ok)) = (&r.c_direct, r.routes_agree) {
                    cells.push(c.clone());
                    cells.push(ok.to_string());
                }
                csv.row(&cells);
            }
            if let Some(l) = &limit {
                csv.note(format!("c_S: {}", serde_json::to_string(l).expect("json")));
            }
            csv.finish()
        }
    };
    Ok(Artifact { text, failed })
}

pub fn converge(a: &ConvergeArgs) -> anyhow::Result<Artifact> {
    let f = map(&a.map)?;
    let s = divisor(&a.divisor)?;
    let c_s: BigRational = match &a.c_s {
        Some(text) => text.parse().map_err(|e| anyhow::anyhow!("--c-s '{text}': {e}"))?,
        None => {
            let seq = siu_sequence(&f, &s, a.c_horizon).map_err(|e| named("PullbackError", e))?;
            let limit = c_limit_from(&f, &seq).map_err(|e| named("PullbackError", e))?;
            if !limit.stabilized {
                anyhow::bail!("c_S is not determined at horizon {}; pass --c-s or raise --c-horizon", a.c_horizon);
            }
            limit.value.lower().clone()
        }
    };
    let fm = FloatMap::<f64>::new(&f).map_err(|e| named("GreenError", e))?;
    let grid = a.grid.points(f.dim(), a.imag);
    let table = potential_convergence_experiment(&fm, &s, &c_s, &grid, a.n, &green_params(&a.green))
        .map_err(|e| named("GreenError", e))?;
    let trimmed = trimmed_max(&table.deviations_at(a.n), a.trim);
    let failed = match (a.tol, trimmed) {
        (Some(tol), Some(t)) => t >= tol,
        (Some(_), None) => true,
        _ => false,
    };
    let text = match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a, T> {
                c_s: String,
                table: &'a T,
                trimmed_max_deviation: Option<f64>,
            }
            json("converge", a, &Body { c_s: rational_string(&c_s), table: &table, trimmed_max_deviation: trimmed })
        }
        Format::Csv => {
            let header = ["point".into(), "n".into(), col("w", "approx"), col("target", "approx"), col("deviation", "approx")];
            let mut csv = Csv::new("converge", a, &header);
            for r in &table.rows {
                csv.row(&[r.point.to_string(), r.n.to_string(), float(r.w), float(r.target), float(r.deviation)]);
            }
            csv.note(format!("c_S: {}", rational_string(&c_s)));
            for (i, why) in &table.excluded {
                csv.note(format!("excluded point {i}: {}", serde_json::to_string(why).expect("json")));
            }
            match trimmed {
                Some(t) => csv.note(format!("trimmed max deviation at n = {}: {}", a.n, float(t))),
                None => csv.note("no point survived"),
            }
            csv.finish()
        }
    };
    Ok(Artifact { text, failed })
}

pub fn green_grid(a: &GreenGridArgs) -> anyhow::Result<Artifact> {
    let f = map(&a.map)?;
    let fm = FloatMap::<f64>::new(&f).map_err(|e| named("GreenError", e))?;
    let params = green_params(&a.green);
    let evals = a
        .grid
        .points(f.dim(), a.imag)
        .iter()
        .map(|z| green_plus(&fm, z, &params))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| named("GreenError", e))?;
    let text = match a.format {
        Format::Json => json("green-grid", a, &evals),
        Format::Csv => {
            let mut header = Vec::new();
            for i in 1..=f.dim() {
                header.push(col(&format!("z{i}_re"), "approx"));
                header.push(col(&format!("z{i}_im"), "approx"));
            }
            header.extend([col("G", "approx"), "n_star".into(), col("increment", "approx"), "escaped".into()]);
            let mut csv = Csv::new("green-grid", a, &header);
            for e in &evals {
                let mut cells: Vec<String> = e.point.iter().flat_map(|c| [float(c.re), float(c.im)]).collect();
                cells.extend([float(e.g), e.iterations.to_string(), float(e.cauchy_increment), e.escaped.to_string()]);
                csv.row(&cells);
            }
            csv.finish()
        }
    };
    Ok(Artifact { text, failed: false })
}

pub fn verify_regions(a: &RegionArgs) -> anyhow::Result<Artifact> {
    let form = Class4Form {
        a: gaussian("a", &a.a)?,
        b: gaussian("b", &a.b)?,
        c: gaussian("c", &a.c)?,
        c_prime: gaussian("cprime", &a.cprime)?,
    };
    let params = RegionParams::<f64>::new(&form, a.eps).map_err(|e| named("RegionError", e))?;
    let transcription = match a.widen {
        Some(factor) => Transcription::Widened { factor },
        None => Transcription::Faithful,
    };
    let report =
        verify_inclusions(&params, a.r, a.samples, a.seed, transcription).map_err(|e| named("RegionError", e))?;
    let line = invariant_line_check(&form).map_err(|e| named("RegionError", e))?;
    #[derive(Serialize)]
    struct Body<'a, R, L> {
        eps_max: Option<f64>,
        c_second: String,
        report: &'a R,
        invariant_line: &'a L,
    }
    let body = Body { eps_max: params.eps_max(), c_second: params.c_second().to_string(), report: &report, invariant_line: &line };
    Ok(Artifact { text: json("verify-regions", a, &body), failed: report.violation_count > 0 })
}

pub fn conjugacy_check(a: &ConjugacyArgs) -> anyhow::Result<Artifact> {
    let f = map(&a.map)?;
    let change = match &a.change {
        Some(path) => AffineChange { label: path.display().to_string(), map: map(path)? },
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            affine_change(f.dim(), &mut rng).map_err(|e| named("ClassifyError", e))?
        }
    };
    let g = conjugate(&change, &f).map_err(|e| named("ClassifyError", e))?;
    let m = method(a.method, a.seed);
    let seqs = |h: &PolyAutomorphism| -> anyhow::Result<Vec<DegreeSequence>> {
        [Direction::Forward, Direction::Inverse]
            .into_iter()
            .map(|d| h.degree_sequence_with(a.n, d, m).map_err(|e| named("AutomorphismError", e)))
            .collect()
    };
    let (original, conjugated) = (seqs(&f)?, seqs(&g)?);
    let agree = original == conjugated;
    #[derive(Serialize)]
    struct Body<'a> {
        change: &'a str,
        change_forward: Vec<String>,
        original: &'a [DegreeSequence],
        conjugated: &'a [DegreeSequence],
        agree: bool,
    }
    let body = Body {
        change: &change.label,
        change_forward: change.map.forward().iter().map(|p| format!("{p:?}")).collect(),
        original: &original,
        conjugated: &conjugated,
        agree,
    };
    Ok(Artifact { text: json("conjugacy-check", a, &body), failed: !agree })
}
