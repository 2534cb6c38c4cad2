//! Command-line front end: argument definitions, dispatch and exit codes.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;

use super::expr::{parse_multivector, parse_poly};
use super::report::{trajectory_csv, Report};
use super::{IoError, Manifest};
use crate::foliation::{
    flat_metric, gotay_form, null_distribution, polarization_complement, special_connection, CutoffSpec, TubeSystem,
};
use crate::linf::{
    build_vdata, linf_verify, mc_series, tangent_complex, ChiConvention, LinfStructure, Orders, VData, VerifyConfig,
};
use crate::moser::{
    directed_extension_check, gauge_flow, glue_morphism, interpolate_forms, moser_solve, off_stratum_samples,
    ClosureFamily, GaugeFamily, GlueCaps, MoserConfig, MoserError, StratumPackage,
};
use crate::skewcore::{
    nullity_admissible, stratum_codim, RatMatrix, stratum_dim, stratum_dim_oracle, to_f64, Rational, SkewForm,
};
use crate::stratify::{
    cusp_oracle, niceness_report, realize_form_at_point, whitney_check, Approach, Region, StratumChart, Verdict,
    WhitneyConfig,
};
use crate::symfield::{exterior_d, format_form, format_multivector, format_poly, schouten, Chart, MultiVector, Poly};

#[derive(Parser, Debug)]
#[command(name = "presymp", version, about = "Nullity strata, null foliations and derived brackets of closed 2-forms")]
pub struct Cli {
    /// Extra definitions layered over the built-in corpus.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Defaults to $PRESYMP_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChiArg {
    PositiveDegrees,
    IncludeDegreeZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// `(1 + t/2) dx1^dx2` on the plane.
    Area,
    /// Retraction interpolation of `--form` along `--tube`.
    Interp,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Dimensions of the nullity strata of skew forms on R^N.
    Dims {
        #[arg(long = "N")]
        n: usize,
        /// Also compare with the independent Jacobian-rank count.
        #[arg(long)]
        oracle: bool,
    },
    /// Census of the nullity strata of a form field in a box.
    Stratify {
        #[arg(long)]
        form: String,
        #[arg(long = "box", default_value = "[-1,1]")]
        region: String,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Whitney conditions A and B between two strata.
    Whitney {
        #[arg(long, required_unless_present = "cusp")]
        form: Option<String>,
        #[arg(long, default_value_t = 2)]
        lower: usize,
        #[arg(long, default_value_t = 0)]
        higher: usize,
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 4)]
        sequences: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// The cusp pair, which satisfies A but not B.
        #[arg(long)]
        cusp: bool,
    },
    /// A closed form with prescribed value at a point.
    Realize {
        /// Upper-triangular entries of Q, row by row.
        #[arg(long)]
        q: String,
        #[arg(long)]
        x0: Option<String>,
    },
    /// Gotay normal form and Poisson bivector.
    Gotay {
        #[arg(long)]
        form: String,
        #[arg(long)]
        base: Option<String>,
    },
    /// Generalized Jacobi identities of the derived brackets.
    LinfVerify {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 4)]
        arity: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Scale the first fiber pairing by `1 + x1`, breaking [P,P] = 0.
        #[arg(long)]
        sabotage: bool,
    },
    /// Maurer-Cartan series and the tangent complex.
    Mc {
        #[arg(long)]
        model: String,
        /// Coefficients of dy^1, ..., dy^m.
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, value_enum, default_value = "positive-degrees")]
        chi: ChiArg,
    },
    /// Connection adapted to the form at a point.
    Connection {
        #[arg(long)]
        form: String,
        #[arg(long)]
        point: Option<String>,
        /// Rows separated by `;`, entries by `,`; default Euclidean.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Moser isotopy with RK4 and step-halving evidence.
    Moser {
        #[arg(long, value_enum, default_value = "area")]
        family: FamilyArg,
        #[arg(long, default_value = "model4")]
        form: String,
        #[arg(long, default_value = "T4")]
        tube: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        t1: Option<f64>,
        /// Write trajectories here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Gauge Cauchy problem for a constant vector field.
    Gauge {
        #[arg(long)]
        model: String,
        /// Vector field on the Gotay chart.
        #[arg(long)]
        xi: String,
        #[arg(long, default_value_t = 5)]
        order: usize,
    },
    /// Linear part of the gluing morphisms along a chain of strata.
    Glue {
        /// Comma-separated forms, lowest stratum first.
        #[arg(long)]
        chain: String,
        /// Comma-separated tube names; default collapses trailing coordinates.
        #[arg(long)]
        tubes: Option<String>,
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
    /// One-sided smoothness of the time-reparametrization generator.
    DirectedCheck {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        big_c: f64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub report: Report,
    pub status: Status,
}

fn input(e: impl std::fmt::Display) -> IoError {
    IoError::Input(e.to_string())
}

fn rationals(text: &str) -> Result<Vec<Rational>, IoError> {
    let c = Chart::standard(0);
    text.split(',')
        .map(|s| {
            let p = parse_poly(s, &c)?;
            Ok(p.constant_term())
        })
        .collect()
}

fn point_or_zero(text: &Option<String>, n: usize) -> Result<Vec<Rational>, IoError> {
    let x = match text {
        Some(t) => rationals(t)?,
        None => vec![Rational::zero(); n],
    };
    if x.len() != n {
        return Err(input(format!("expected {n} coordinates, got {}", x.len())));
    }
    Ok(x)
}

/// `[a,b]^n`, or `[a,b]x[c,d]x…` with one factor per coordinate.
fn parse_box(text: &str, n: usize) -> Result<Region, IoError> {
    let bad = || input(format!("cannot read box `{text}`"));
    let interval = |s: &str| -> Result<(f64, f64), IoError> {
        let inner = s.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        Ok((a, b))
    };
    let factors: Vec<(f64, f64)> = match text.rsplit_once('^') {
        Some((iv, k)) => {
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            vec![interval(iv)?; k]
        }
        None if text.contains(']') && text.matches('[').count() > 1 => {
            text.split('x').map(interval).collect::<Result<_, _>>()?
        }
        None => vec![interval(text)?; n],
    };
    if factors.len() != n {
        return Err(input(format!("box has {} factors, form lives on R^{n}", factors.len())));
    }
    Ok(Region { lower: factors.iter().map(|f| f.0).collect(), upper: factors.iter().map(|f| f.1).collect() })
}

fn vdata_for(m: &Manifest, name: &str, orders: Orders, seed: u64) -> Result<VData, IoError> {
    let w = m.field(name)?;
    let n = w.dim();
    let f = null_distribution(&w, &Region::cube(n, -1.0, 1.0), seed).map_err(input)?;
    let p = polarization_complement(&w, &f, None, &vec![Rational::zero(); n]).map_err(input)?;
    let g = gotay_form(&p).map_err(input)?;
    build_vdata(&g, orders).map_err(input)
}

fn verdict_ok(v: Verdict) -> bool {
    v == Verdict::Pass
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Failed
    }
}

fn list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

/// `[[a, b], [c, d]]`, or `0xK` when there are no rows.
fn matrix_text(m: &RatMatrix) -> String {
    if m.rows() == 0 {
        return format!("0x{}", m.cols());
    }
    let rows: Vec<String> = (0..m.rows()).map(|i| format!("[{}]", list(m.row(i)))).collect();
    format!("[{}]", rows.join(", "))
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

/// `P` with its first coupling to a fiber coordinate scaled by `1 + x1`.
fn sabotaged(v: &VData) -> MultiVector {
    let n = v.base_dim();
    let p = v.poisson();
    let Some((idx, c)) = p.terms().iter().find(|(i, _)| i.len() == 2 && i[0] < n && i[1] >= n) else {
        return p.add(&MultiVector::basis(p.chart().clone(), &[0, 1], Poly::var(0)));
    };
    p.add(&MultiVector::basis(p.chart().clone(), idx, c * &Poly::var(0)))
}

/// Runs one command against a manifest with the given seed.
pub fn run(cmd: &Command, m: &Manifest, seed: u64) -> Result<Outcome, IoError> {
    let mut r;
    let ok: bool;
    match cmd {
        Command::Dims { n, oracle } => {
            r = Report::new("dims", seed);
            r.setting("N", n);
            r.setting("oracle", oracle);
            let total = n * n.saturating_sub(1) / 2;
            let mut good = true;
            for mm in 0..=*n {
                let d = stratum_dim(*n, mm).map_err(input)?;
                let codim = stratum_codim(*n, mm).map_err(input)?;
                let sum_ok = d.empty || d.dim + codim == total;
                good &= sum_ok;
                let mut row = if d.empty {
                    "empty".to_string()
                } else {
                    format!("dim={} codim={} admissible={}", d.dim, codim, nullity_admissible(*n, mm))
                };
                if *oracle && !d.empty {
                    let o = stratum_dim_oracle(*n, mm, 8, seed).map_err(input)?;
                    good &= o == d.dim;
                    row.push_str(&format!(" oracle={o}"));
                }
                r.result(&format!("m.{mm}"), row);
            }
            r.result("dim_plus_codim", total);
            ok = good;
        }
        Command::Stratify { form, region, samples } => {
            r = Report::new("stratify", seed);
            let w = m.field(form)?;
            let reg = parse_box(region, w.dim())?;
            r.setting("form", format!("{form} = {}", format_form(w.form())));
            r.setting("box", region);
            r.setting("samples", samples);
            let rep = niceness_report(&w, &reg, *samples, seed).map_err(input)?;
            for e in &rep.census {
                let measured = e.measured_dim.map_or("none".into(), |d| d.to_string());
                r.result(
                    &format!("stratum.{}", e.nullity),
                    format!("count={} expected_dim={} measured_dim={} admissible={}", e.count, e.expected_dim, measured, e.admissible),
                );
            }
            let tr_ok = rep.transversality.iter().filter(|t| t.transversal).count();
            r.result("transversality", format!("{tr_ok}/{}", rep.transversality.len()));
            for f in &rep.frontier {
                r.result(&format!("frontier.{}", f.nullity), format!("{}/{}", f.confirmed, f.tested));
            }
            r.result("nice", rep.nice);
            for w in &rep.warnings {
                r.warn(w);
            }
            ok = rep.nice;
        }
        Command::Whitney { form, lower, higher, base, sequences, tol, cusp } => {
            r = Report::new("whitney", seed);
            let config = WhitneyConfig { tol: *tol, ..WhitneyConfig::default() };
            r.setting("tol", tol);
            let rep = if *cusp {
                r.setting("pair", "cusp");
                let (lo, hi, approach, b) = cusp_oracle();
                whitney_check(Some(&lo), &hi, &b, &approach, &config)
            } else {
                let name = form.as_deref().unwrap_or_default();
                let w = m.field(name)?;
                let b = point_or_zero(base, w.dim())?;
                r.setting("form", name);
                r.setting("lower", lower);
                r.setting("higher", higher);
                r.setting("base", list(&b));
                r.setting("sequences", sequences);
                let lo = StratumChart::from_form(&w, *lower);
                let hi = StratumChart::from_form(&w, *higher);
                let bf: Vec<f64> = b.iter().map(to_f64).collect();
                whitney_check(Some(&lo), &hi, &bf, &Approach::Projected { sequences: *sequences, seed }, &config)
            };
            r.result("sequences", rep.sequences.len());
            for s in &rep.sequences {
                r.result(
                    &format!("gap.{}", s.label),
                    format!("a={} b={}", sci(s.gap_a.last().copied().unwrap_or(0.0)), sci(s.gap_b.last().copied().unwrap_or(0.0))),
                );
            }
            r.result("condition_a", rep.condition_a);
            r.result("condition_b", rep.condition_b);
            ok = verdict_ok(rep.condition_a) && verdict_ok(rep.condition_b);
        }
        Command::Realize { q, x0 } => {
            r = Report::new("realize", seed);
            let upper = rationals(q)?;
            let n = (1..=64).find(|n| n * (n - 1) / 2 == upper.len()).ok_or_else(|| input("entry count is not N(N-1)/2"))?;
            let q = SkewForm::from_upper(n, &upper);
            let x = point_or_zero(x0, n)?;
            r.setting("N", n);
            r.setting("q", list(&upper));
            r.setting("x0", list(&x));
            let w = realize_form_at_point(&q, &x).map_err(input)?;
            let closed = exterior_d(w.form()).map_err(input)?.is_zero();
            let matches = w.value_at(&x) == q;
            r.result("form", format_form(w.form()));
            r.result("closed", closed);
            r.result("value_matches", matches);
            ok = closed && matches;
        }
        Command::Gotay { form, base } => {
            r = Report::new("gotay", seed);
            let w = m.field(form)?;
            let b = point_or_zero(base, w.dim())?;
            r.setting("form", form);
            r.setting("base", list(&b));
            let f = null_distribution(&w, &Region::cube(w.dim(), -1.0, 1.0), seed).map_err(input)?;
            let p = polarization_complement(&w, &f, None, &b).map_err(input)?;
            let g = gotay_form(&p).map_err(input)?;
            r.result("nullity", p.nullity());
            r.result("chart", g.chart.names().join(", "));
            r.result("gotay_form", format_form(g.form.form()));
            let v = build_vdata(&g, Orders::default()).map_err(input)?;
            r.result("poisson", format_multivector(v.poisson()));
            ok = true;
        }
        Command::LinfVerify { model, arity, trials, sabotage } => {
            r = Report::new("linf-verify", seed);
            let orders = Orders::for_arity(*arity);
            r.setting("model", model);
            r.setting("arity", arity);
            r.setting("trials", trials);
            r.setting("sabotage", sabotage);
            r.setting("orders", format!("base={} fiber={}", orders.base, orders.fiber));
            let mut v = vdata_for(m, model, orders, seed)?;
            if *sabotage {
                v = v.with_poisson(sabotaged(&v));
            }
            r.result("poisson", format_multivector(v.poisson()));
            let l = LinfStructure::new(v);
            let rep = linf_verify(&l, &VerifyConfig { max_arity: *arity, trials: *trials, seed }).map_err(input)?;
            for c in &rep.checks {
                let acc = c.accuracy.map_or("exact".into(), |a| format!("order {a}"));
                r.result(&format!("check.{}", c.name), format!("{} cases={} accuracy={acc}", if c.passed { "PASS" } else { "FAIL" }, c.cases));
            }
            if let Some(i) = rep.first_failure {
                let c = &rep.checks[i];
                r.result("first_failure", &c.name);
                if let Some(w) = &c.witness {
                    r.result("witness", w.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ; "));
                }
            }
            r.result("verdict", if rep.passed { "PASS" } else { "FAIL" });
            ok = rep.passed;
        }
        Command::Mc { model, sigma, kmax, chi } => {
            r = Report::new("mc", seed);
            let v = vdata_for(m, model, Orders::for_arity(*kmax), seed)?;
            let conv = match chi {
                ChiArg::PositiveDegrees => ChiConvention::PositiveDegrees,
                ChiArg::IncludeDegreeZero => ChiConvention::IncludeDegreeZero,
            };
            r.setting("model", model);
            r.setting("kmax", kmax);
            r.setting("chi", conv);
            let coeffs: Vec<Poly> = match sigma {
                Some(s) => s.split(',').map(|c| parse_poly(c, v.chart())).collect::<Result<_, _>>()?,
                None => vec![Poly::zero(); v.fiber_dim()],
            };
            if coeffs.len() != v.fiber_dim() {
                return Err(input(format!("sigma needs {} coefficients", v.fiber_dim())));
            }
            r.setting("sigma", coeffs.iter().map(|c| format_poly(c, v.chart())).collect::<Vec<_>>().join(", "));
            let s = v.element(coeffs.into_iter().enumerate().map(|(a, c)| (vec![a], c)));
            let l = LinfStructure::new(v.clone());
            let mc = mc_series(&l, &s, *kmax).map_err(input)?;
            for (k, t) in mc.terms.iter().enumerate() {
                r.result(&format!("term.{k}"), t);
            }
            r.result("sum", &mc.sum);
            r.result("coisotropic", mc.coisotropic);
            let tc = tangent_complex(&l, v.base_point(), conv).map_err(input)?;
            r.result("tangent.dims", list(&tc.dims));
            r.result("tangent.cohomology", list(&tc.cohomology));
            r.result("chi", tc.chi);
            r.result("virtual_dim", tc.virtual_dim);
            ok = true;
        }
        Command::Connection { form, point, metric } => {
            r = Report::new("connection", seed);
            let w = m.field(form)?;
            let n = w.dim();
            let x = point_or_zero(point, n)?;
            let g = match metric {
                None => flat_metric(n),
                Some(t) => t
                    .split(';')
                    .map(|row| row.split(',').map(|e| parse_poly(e, w.form().chart())).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?,
            };
            r.setting("form", form);
            r.setting("point", list(&x));
            r.setting("metric", metric.as_deref().unwrap_or("flat"));
            let rec = special_connection(&w, &x, &g, CutoffSpec::default()).map_err(input)?;
            r.result("kernel_dim", rec.kernel_dim);
            r.result("residual_zero", rec.residual_zero);
            r.result("confined_to_kernel", rec.confined_to_kernel);
            r.result("form_slots_in_kernel", rec.form_slots_in_kernel);
            let mut nonzero = Vec::new();
            for (i, a) in rec.achieved.iter().enumerate() {
                for (j, b) in a.iter().enumerate() {
                    for (k, c) in b.iter().enumerate() {
                        if !c.is_zero() {
                            nonzero.push(format!("({},{},{})={c}", i + 1, j + 1, k + 1));
                        }
                    }
                }
            }
            r.result("achieved_nonzero", if nonzero.is_empty() { "none".into() } else { nonzero.join(" ") });
            r.result("cutoff", format!("inner={} outer={}", rec.cutoff.inner, rec.cutoff.outer));
            ok = rec.residual_zero || rec.confined_to_kernel;
        }
        Command::Moser { family, form, tube, samples, steps, t1, csv } => {
            r = Report::new("moser", seed);
            let (res, label) = match family {
                FamilyArg::Area => {
                    let cfg = MoserConfig::new(0.0, t1.unwrap_or(1.0), steps.unwrap_or(20), vec![0, 1]);
                    let pts = Region::cube(2, -1.0, 1.0);
                    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
                    let pts: Vec<Vec<f64>> = (0..*samples).map(|_| pts.draw(&mut rng)).collect();
                    r.setting("family", "area");
                    (moser_solve(&ClosureFamily::area(), &pts, &cfg), cfg)
                }
                FamilyArg::Interp => {
                    let w = m.field(form)?;
                    let t = m.tube(tube)?;
                    if t.ambient() != w.dim() {
                        return Err(input("tube and form live on different charts"));
                    }
                    let it = interpolate_forms(&w, &t, seed).map_err(input)?;
                    let cfg = MoserConfig::new(0.0, t1.unwrap_or(0.5), steps.unwrap_or(16), (0..w.dim()).collect());
                    r.setting("family", "interp");
                    r.setting("form", form);
                    r.setting("tube", format!("{tube} fiber={:?}", t.fiber()));
                    let pts = off_stratum_samples(&t, *samples, seed);
                    (moser_solve(&it, &pts, &cfg), cfg)
                }
            };
            r.setting("samples", samples);
            r.setting("t", format!("{} -> {}", label.t0, label.t1));
            r.setting("steps", label.steps);
            match res {
                Ok(f) => {
                    r.result("max_residual", sci(f.max_residual));
                    r.result("halved_residual", sci(f.halved_residual));
                    r.result("ratio", sci(f.ratio));
                    r.result("constraint_residual", sci(f.constraint_residual));
                    r.result("order", f.order);
                    r.result("converged", f.converged);
                    if let Some(path) = csv {
                        std::fs::write(path, trajectory_csv(&f)).map_err(input)?;
                        r.result("csv", path.display());
                    }
                    ok = f.converged && f.max_residual <= 1e-6;
                }
                Err(e @ (MoserError::Singular { .. } | MoserError::NonFinite { .. } | MoserError::Quadrature { .. })) => {
                    r.result("error", e);
                    ok = false;
                }
                Err(e) => return Err(input(e)),
            }
        }
        Command::Gauge { model, xi, order } => {
            r = Report::new("gauge", seed);
            let v = vdata_for(m, model, Orders::default(), seed)?;
            let x = parse_multivector(xi, v.chart())?;
            r.setting("model", model);
            r.setting("xi", format_multivector(&x));
            r.setting("order", order);
            let res = gauge_flow(&v, &GaugeFamily::constant(x.clone(), *order), v.poisson()).map_err(input)?;
            let mut oracle = true;
            let mut term = v.poisson().clone();
            let mut fact = Rational::from_integer(1.into());
            for (k, d) in res.delta.0.iter().enumerate() {
                if k > 0 {
                    term = schouten(&x, &term).map_err(input)?;
                    fact *= Rational::from_integer((k as i64).into());
                }
                oracle &= *d == term.scale(&(Rational::from_integer(1.into()) / &fact));
                r.result(&format!("delta.{k}"), format_multivector(d));
            }
            r.result("exponential_oracle", oracle);
            r.result("phi_equation", res.phi_equation_holds);
            r.result("a_profile", list(&res.a_profile));
            r.result("ker_preserved", res.ker_preserved);
            if let Some((e, j)) = &res.ker_witness {
                r.result("ker_witness", format!("{} at t^{j}", format_multivector(e)));
            }
            ok = oracle && res.phi_equation_holds;
        }
        Command::Glue { chain, tubes, trials } => {
            r = Report::new("glue", seed);
            let names: Vec<&str> = chain.split(',').map(str::trim).collect();
            if names.len() < 2 {
                return Err(input("a chain needs at least two strata"));
            }
            r.setting("chain", names.join(", "));
            r.setting("trials", trials);
            let packages = names
                .iter()
                .map(|n| {
                    let w = m.field(n)?;
                    StratumPackage::build(&w, &vec![Rational::zero(); w.dim()], Orders::default(), seed).map_err(input)
                })
                .collect::<Result<Vec<_>, IoError>>()?;
            let trailing = |lo: usize, hi: usize| TubeSystem::new(hi, (lo..hi).collect());
            let tube_list: Vec<TubeSystem> = match tubes {
                Some(t) => t.split(',').map(|n| m.tube(n.trim())).collect::<Result<_, _>>()?,
                None => packages.windows(2).map(|p| trailing(p[0].dim(), p[1].dim())).collect(),
            };
            if tube_list.len() != packages.len() - 1 {
                return Err(input("need one tube per consecutive pair"));
            }
            r.setting("tubes", tube_list.iter().map(|t| format!("{:?}", t.fiber())).collect::<Vec<_>>().join(" "));
            let caps = GlueCaps { trials: *trials, seed };
            let mut good = true;
            let mut maps = Vec::new();
            for (k, (p, t)) in packages.windows(2).zip(&tube_list).enumerate() {
                match glue_morphism(&p[0], &p[1], t, caps) {
                    Ok(g) => {
                        r.result(&format!("f.{k}.matrix"), matrix_text(&g.matrix));
                        r.result(&format!("f.{k}.chain_map"), format!("{} cases={}", g.chain_map_holds, g.chain_map_cases));
                        r.result(&format!("f.{k}.z"), format_multivector(&g.z));
                        maps.push(g);
                    }
                    Err(MoserError::ChainMap(w)) => {
                        r.result(&format!("f.{k}.chain_map"), format!("false witness={w}"));
                        good = false;
                    }
                    Err(e) => return Err(input(e)),
                }
            }
            if good && maps.len() >= 2 {
                let composite = maps.iter().skip(1).fold(maps[0].clone(), |acc, g| acc.then(g));
                let direct_tube = trailing(packages[0].dim(), packages.last().unwrap().dim());
                let direct = glue_morphism(&packages[0], packages.last().unwrap(), &direct_tube, caps);
                let same = direct.as_ref().map(|d| d.same_linear_part(&composite)).unwrap_or(false);
                if tubes.is_none() {
                    r.result("composition", same);
                    good &= same;
                } else {
                    r.warn("composition check uses trailing-coordinate tubes only");
                }
            }
            r.result("arity", 1);
            ok = good;
        }
        Command::DirectedCheck { c, big_c, samples } => {
            r = Report::new("directed-check", seed);
            r.setting("c", c);
            r.setting("C", big_c);
            r.setting("samples", samples);
            let d = directed_extension_check(*c, *big_c, *samples);
            r.result("g(0.01)", sci(crate::moser::generator(*c, *big_c, 0.01)));
            r.result("g(-0.1)", sci(crate::moser::generator(*c, *big_c, -0.1)));
            r.result("derivatives", d.derivatives.iter().map(|x| sci(*x)).collect::<Vec<_>>().join(", "));
            r.result("forward_smooth", d.forward_smooth);
            r.result("backward_divergent", d.backward_divergent);
            r.result("directed", d.directed);
            ok = d.directed;
        }
    }
    Ok(Outcome { report: r, status: status(ok) })
}

fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, IoError> {
    match (flag, env) {
        (Some(s), _) => Ok(s),
        (None, Some(e)) => e.trim().parse().map_err(|_| input(format!("PRESYMP_SEED must be an unsigned integer, got `{e}`"))),
        (None, None) => Ok(0),
    }
}

/// Parses `args`, runs the command and writes the report; returns the exit
/// status: 0 success, 1 verification failure, 2 input error.
pub fn main_with<I, T>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = (|| {
        let seed = resolve_seed(cli.seed, env_seed)?;
        let mut manifest = Manifest::corpus();
        if let Some(path) = &cli.manifest {
            let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            manifest = manifest.merged(Manifest::parse(&text)?);
        }
        if cli.seed.is_none() && env_seed.is_none() {
            if let Some(s) = manifest.param("seed") {
                return run(&cli.command, &manifest, resolve_seed(None, Some(s))?);
            }
        }
        run(&cli.command, &manifest, seed)
    })();
    match result {
        Ok(o) => {
            let _ = write!(out, "{}", o.report.render());
            match o.status {
                Status::Ok => 0,
                Status::Failed => 1,
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["presymp"];
        full.extend(args);
        let code = main_with(full, None, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
    }

    #[test]
    fn boxes() {
        assert_eq!(parse_box("[-1,1]^3", 3).unwrap(), Region::cube(3, -1.0, 1.0));
        let r = parse_box("[0,1]x[-2,2]", 2).unwrap();
        assert_eq!(r.lower, vec![0.0, -2.0]);
        assert!(parse_box("[-1,1]^3", 4).is_err());
        assert!(parse_box("[1,0]", 1).is_err());
    }

    #[test]
    fn seed_resolution() {
        assert_eq!(resolve_seed(Some(4), Some("9")).unwrap(), 4);
        assert_eq!(resolve_seed(None, Some("9")).unwrap(), 9);
        assert_eq!(resolve_seed(None, None).unwrap(), 0);
        assert!(resolve_seed(None, Some("x")).is_err());
    }

    #[test]
    fn dims_table() {
        let (code, text) = go(&["dims", "--N", "4"]);
        assert_eq!(code, 0, "{text}");
        assert!(text.contains("m.2 = dim=5 codim=1 admissible=true\n"), "{text}");
        assert!(text.contains("m.1 = empty\n"), "{text}");
        assert!(text.contains("m.4 = dim=0 codim=6 admissible=false\n"), "{text}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(go(&["dims"]).0, 2);
        assert_eq!(go(&["gotay", "--form", "nosuch"]).0, 2);
        assert_eq!(go(&["linf-verify", "--model", "r3flat", "--arity", "2", "--sabotage"]).0, 1);
        assert_eq!(go(&["directed-check"]).0, 0);
        assert_eq!(go(&["--help"]).0, 0);
    }
}
