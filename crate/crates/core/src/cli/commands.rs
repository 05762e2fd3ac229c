//! Subcommand bodies. Each returns its exit code; text goes to the given writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::analysis::{
    check_extinction_limits, classify, extinction_tail_bound, poincare_fixed_point, tail_stats, BandCheck,
    PoincareError, TailStats, Verdict, VerdictLabel,
};
use crate::hypothesis::{Condition, HypothesisReport};
use crate::pde::{simulate, Sample, TrajectorySummary};

use super::config::{RawConfig, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

pub const SIMULATE_HEADER: &str = "t,min_u,max_u,min_v,max_v,min_w,max_w,mass_u,mass_v";
pub const SWEEP_HEADER: &str = "value,verdict,L1_hat,l1_hat,L2_hat,l2_hat,error";
pub const THREADS_ENV: &str = "CHEMOLAB_THREADS";

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Human-facing numbers: rounded to 12 significant digits, shortest form.
pub fn report_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

fn holds(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn condition_lines(out: &mut dyn Write, name: &str, c: &Condition) -> io::Result<()> {
    match c.min_margin() {
        Some(m) => writeln!(out, "{name} = {} ({})", holds(c.holds), report_num(m))?,
        None => writeln!(out, "{name} = {} (prerequisite fails)", holds(c.holds))?,
    }
    for m in &c.margins {
        writeln!(out, "{name}.{} = {} ({})", m.name, holds(m.holds), report_num(m.value))?;
    }
    Ok(())
}

pub fn write_report(out: &mut dyn Write, r: &HypothesisReport, no_chemotaxis: bool) -> io::Result<()> {
    writeln!(out, "dimension = {}", r.dimension)?;
    condition_lines(out, "h1", &r.h1)?;
    condition_lines(out, "h2", &r.h2)?;
    condition_lines(out, "h3", &r.h3)?;
    condition_lines(out, "h4", &r.h4)?;
    condition_lines(out, "h5", &r.h5)?;
    condition_lines(out, "semitrivial_instability", &r.semitrivial_instability)?;
    condition_lines(out, "extinction.sensitivity", &r.extinction.sensitivity)?;
    condition_lines(out, "extinction.competition", &r.extinction.competition)?;
    condition_lines(out, "extinction.self_limitation", &r.extinction.self_limitation)?;
    if let Some((a1, a2)) = r.a_bar {
        writeln!(out, "A_bar = {}, {}", report_num(a1), report_num(a2))?;
    }
    if let Some((b1, b2)) = r.b_bar {
        writeln!(out, "B_bar = {}, {}", report_num(b1), report_num(b2))?;
    }
    if let Some((alpha, beta)) = r.alpha_beta {
        writeln!(out, "alpha = {}, beta = {}", report_num(alpha), report_num(beta))?;
    }
    if let Some([s1, r1, r2, s2]) = r.lv_rect {
        writeln!(
            out,
            "lv_rect = {}, {}, {}, {}",
            report_num(s1),
            report_num(r1),
            report_num(r2),
            report_num(s2)
        )?;
    }
    if no_chemotaxis {
        writeln!(out, "note = chi1 = chi2 = 0, so h4 and h5 coincide")?;
    }
    Ok(())
}

pub fn cmd_check(cfg: &ScenarioConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let model = match cfg.model() {
        Ok(m) => m,
        Err(e) => return fail(err, &e),
    };
    match write_report(out, &model.report(), !cfg.params.has_chemotaxis()) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(err, &e),
    }
}

fn fail(err: &mut dyn Write, e: &dyn std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {e}");
    EXIT_FAILURE
}

fn write_samples(path: &Path, samples: &[Sample]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SIMULATE_HEADER}")?;
    for s in samples {
        let row = [
            s.t, s.min_u, s.max_u, s.min_v, s.max_v, s.min_w, s.max_w, s.mass_u, s.mass_v,
        ];
        writeln!(w, "{}", row.map(csv_num).join(","))?;
    }
    w.flush()
}

pub fn cmd_simulate(cfg: &ScenarioConfig, path: &Path, err: &mut dyn Write) -> i32 {
    let model = match cfg.model() {
        Ok(m) => m,
        Err(e) => return fail(err, &e),
    };
    let init = match cfg.initial_state(&model) {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    match simulate(&model, &init, cfg.time.t_final, &cfg.stepper(), cfg.time.sample_every) {
        Ok(summary) => match write_samples(path, &summary.samples) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(err, &e),
        },
        Err(failure) => {
            if let Some(partial) = &failure.partial {
                if let Err(e) = write_samples(path, &partial.samples) {
                    let _ = writeln!(err, "error: could not write partial output: {e}");
                }
            }
            let t = failure
                .error
                .time()
                .map_or_else(|| "start".to_string(), |t| format!("t = {}", csv_num(t)));
            let _ = writeln!(err, "simulation failed at {t}: {}", failure.error);
            EXIT_FAILURE
        }
    }
}

/// Result of the simulate, tail and classify pipeline for one scenario.
#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    pub alpha_beta: Option<(f64, f64)>,
    pub band: Option<BandCheck>,
    pub tail_bound_u: Option<f64>,
    pub summary: TrajectorySummary,
}

pub fn run_classification(cfg: &ScenarioConfig) -> Result<Classification, String> {
    let model = cfg.model().map_err(|e| e.to_string())?;
    let init = cfg.initial_state(&model).map_err(|e| e.to_string())?;
    let summary =
        simulate(&model, &init, cfg.time.t_final, &cfg.stepper(), cfg.time.sample_every).map_err(|f| {
            match f.error.time() {
                Some(t) => format!("simulation failed at t = {t}: {}", f.error),
                None => format!("simulation failed: {}", f.error),
            }
        })?;
    let a = &cfg.analysis;
    let stats = tail_stats(&summary, a.tail_fraction).map_err(|e| e.to_string())?;
    let verdict = classify(&stats, a.eps_extinction, a.eta_persistence);
    let report = model.report();
    let extinct = verdict.label == VerdictLabel::ExtinctionOfU;
    let band = report
        .alpha_beta
        .filter(|_| extinct)
        .map(|(alpha, beta)| check_extinction_limits(&stats, alpha, beta, 0.01, &cfg.params));
    let tail_bound_u = if extinct {
        extinction_tail_bound(model.extrema(), &cfg.params, stats.v_lower).ok()
    } else {
        None
    };
    Ok(Classification {
        verdict,
        alpha_beta: report.alpha_beta,
        band,
        tail_bound_u,
        summary,
    })
}

fn write_stats(out: &mut dyn Write, s: &TailStats) -> io::Result<()> {
    writeln!(out, "L1_hat = {}", csv_num(s.u_upper))?;
    writeln!(out, "l1_hat = {}", csv_num(s.u_lower))?;
    writeln!(out, "L2_hat = {}", csv_num(s.v_upper))?;
    writeln!(out, "l2_hat = {}", csv_num(s.v_lower))?;
    writeln!(out, "w_max = {}", csv_num(s.w_upper))?;
    writeln!(out, "w_min = {}", csv_num(s.w_lower))?;
    writeln!(out, "tail_fraction = {}", report_num(s.tail_fraction))?;
    writeln!(out, "tail_samples = {}", s.samples)
}

pub fn cmd_classify(cfg: &ScenarioConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let c = match run_classification(cfg) {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    let v = &c.verdict;
    let written = (|| -> io::Result<()> {
        writeln!(out, "verdict = {}", v.label)?;
        write_stats(out, &v.evidence.stats)?;
        writeln!(out, "eps_extinction = {}", report_num(v.evidence.eps_extinction))?;
        writeln!(out, "eta_persistence = {}", report_num(v.evidence.eta_persistence))?;
        let (fu, fv) = v.empirical_floors();
        writeln!(out, "empirical_floor_u = {}", csv_num(fu))?;
        writeln!(out, "empirical_floor_v = {}", csv_num(fv))?;
        if v.label == VerdictLabel::ExtinctionOfU {
            match (c.alpha_beta, c.band) {
                (Some((alpha, beta)), Some(band)) => {
                    writeln!(out, "alpha = {}, beta = {}", report_num(alpha), report_num(beta))?;
                    writeln!(out, "v_band = {}", if band.v_band { "pass" } else { "fail" })?;
                    writeln!(out, "w_band = {}", if band.w_band { "pass" } else { "fail" })?;
                    writeln!(out, "alpha_beta_band = {}", if band.holds() { "pass" } else { "fail" })?;
                }
                _ => writeln!(out, "alpha_beta_band = unavailable")?,
            }
            if let Some(bound) = c.tail_bound_u {
                let ok = v.evidence.stats.u_upper <= bound + 0.01;
                writeln!(
                    out,
                    "tail_bound_u = {} ({})",
                    csv_num(bound),
                    if ok { "pass" } else { "fail" }
                )?;
            }
        }
        Ok(())
    })();
    if let Err(e) = written {
        return fail(err, &e);
    }
    match v.label {
        VerdictLabel::Indeterminate => EXIT_INDETERMINATE,
        _ => EXIT_OK,
    }
}

fn write_fields(path: &Path, cfg: &ScenarioConfig, state: &crate::model::FieldState) -> io::Result<()> {
    let grid = cfg
        .grid()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", if grid.dim() == 1 { "x,u,v,w" } else { "x,y,u,v,w" })?;
    for i in 0..grid.len() {
        let p = grid.point(i);
        let mut cols: Vec<String> = p[..grid.dim()].iter().map(|&x| csv_num(x)).collect();
        cols.extend([state.u[i], state.v[i], state.w[i]].map(csv_num));
        writeln!(w, "{}", cols.join(","))?;
    }
    w.flush()
}

pub fn cmd_poincare(cfg: &ScenarioConfig, path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Err(e) = cfg.coefficients.common_period() {
        return fail(err, &format!("config: {e}"));
    }
    let model = match cfg.model() {
        Ok(m) => m,
        Err(e) => return fail(err, &e),
    };
    let guess = match cfg.initial_state(&model) {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    let a = &cfg.analysis;
    match poincare_fixed_point(&model, &guess, &cfg.stepper(), a.tol_poincare, a.max_iter) {
        Ok(p) => {
            if let Err(e) = write_fields(path, cfg, &p.state) {
                return fail(err, &e);
            }
            let _ = writeln!(out, "period = {}", report_num(p.period));
            let _ = writeln!(out, "iterations = {}", p.iterations);
            let _ = writeln!(out, "residual = {}", csv_num(p.residual));
            let _ = writeln!(out, "verification_residual = {}", csv_num(p.verification_residual));
            let _ = writeln!(out, "empirical_floor_u = {}", csv_num(p.empirical_floors.0));
            let _ = writeln!(out, "empirical_floor_v = {}", csv_num(p.empirical_floors.1));
            if let Some(inside) = p.within_attracting_rect {
                let _ = writeln!(out, "attracting_rect = {}", if inside { "pass" } else { "fail" });
            }
            EXIT_OK
        }
        Err(PoincareError::NonConvergence {
            iterations,
            best_residual,
            best,
        }) => {
            let _ = write_fields(path, cfg, &best);
            let _ = writeln!(out, "iterations = {iterations}");
            let _ = writeln!(out, "residual = {}", csv_num(best_residual));
            let _ = writeln!(
                err,
                "period map did not converge; best residual {}",
                csv_num(best_residual)
            );
            EXIT_NO_CONVERGENCE
        }
        Err(e) => fail(err, &e),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

fn sweep_row(raw: &RawConfig, key: &str, value: &str) -> String {
    let result = raw_with(raw, key, value)
        .map_err(|e| e.to_string())
        .and_then(|cfg| run_classification(&cfg));
    match result {
        Ok(c) => {
            let s = &c.verdict.evidence.stats;
            format!(
                "{},{},{},{},{},{},",
                csv_field(value),
                c.verdict.label,
                csv_num(s.u_upper),
                csv_num(s.u_lower),
                csv_num(s.v_upper),
                csv_num(s.v_lower)
            )
        }
        Err(e) => format!("{},,,,,,{}", csv_field(value), csv_field(&e)),
    }
}

fn raw_with(raw: &RawConfig, key: &str, value: &str) -> Result<ScenarioConfig, super::config::ConfigError> {
    let mut r = raw.clone();
    r.set(key, value)?;
    r.to_config()
}

/// Worker count from `CHEMOLAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n: &usize| n > 0)
}

pub fn cmd_sweep(raw: &RawConfig, key: &str, values: &[String], path: &Path, err: &mut dyn Write) -> i32 {
    if let Err(e) = RawConfig::resolve_key(key) {
        return fail(err, &e);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return fail(err, &e),
    };
    let rows: Vec<String> = pool.install(|| values.par_iter().map(|v| sweep_row(raw, key, v)).collect());
    let written = (|| -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{SWEEP_HEADER}")?;
        for row in &rows {
            writeln!(w, "{row}")?;
        }
        w.flush()
    })();
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => fail(err, &e),
    }
}
