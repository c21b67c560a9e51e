use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use signeq::arith::gcd;
use signeq::characters::character_group;
use signeq::coeff::Coefficient;
use signeq::density::{
    d_independence_check, delange_partial_sums, identity_1q_diagnostic, main_theorem_experiment,
    multiplicativity_check, scatter_rows,
};
use signeq::satotate::{
    error_checkpoints, error_term_fit, prime_sign_densities, restricted_sample, sign_criterion_disagreements,
    Restriction, DEFAULT_INTERVALS,
};
use signeq::shimura::{normalized_eigenvalues, square_class_sign, NormalizedEigenvalues};

use crate::config::ExperimentConfig;
use crate::data::FormData;
use crate::output::{cell, Writer};
use crate::CliError;

const SCATTER_LIMIT: u64 = 10_000;
const MULTIPLICATIVITY_PAIRS: usize = 1000;
pub const CHECKPOINT_FILE: &str = "satotate_checkpoints.csv";

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Writes `failure.json` and returns the matching error.
fn fail(w: &Writer, command: &str, assertion: &str, detail: String) -> CliError {
    let record = w.wrap(json!({
        "status": "assertion-failure",
        "command": command,
        "assertion": assertion,
        "detail": detail,
    }));
    let text = serde_json::to_string_pretty(&record).expect("json serializes");
    if let Err(e) = w.json("failure.json", record) {
        return e;
    }
    CliError::Assertion(text)
}

fn eigenvalues<C: Coefficient>(cfg: &ExperimentConfig, data: &FormData<C>) -> Result<NormalizedEigenvalues<C>, CliError> {
    normalized_eigenvalues(&data.lifted, &data.params, cfg.xmax, cfg.exec).map_err(runtime)
}

fn a_t_sign<C: Coefficient>(data: &FormData<C>) -> Result<i8, CliError> {
    match data.lifted.a_t().real_sign() {
        Some(s) if s != 0 => Ok(s),
        _ => Err(CliError::Config("a(t) must be real and nonzero".into())),
    }
}

pub fn signs<C: Coefficient>(cfg: &ExperimentConfig, w: &Writer, data: &FormData<C>) -> Result<Value, CliError> {
    let ne = eigenvalues(cfg, data)?;
    let at = a_t_sign(data)?;
    let mut signs = Vec::new();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (p, b) in ne.values() {
        let Some(s) = square_class_sign(&data.params, &data.a_sq, p) else {
            return Err(fail(w, "signs", "reality", format!("a(tp^2)/chi(p) is not real at p = {p}")));
        };
        let chi1 = data.params.chi1(p);
        signs.push((p, s));
        entries.push((p, s * at, b, chi1));
        let threshold = chi1 as f64 / (2.0 * (p as f64).sqrt());
        rows.push(vec![cell(p), cell(p % cfg.q), cell(b), cell(chi1), cell(threshold), cell(s)]);
    }
    w.csv("signs_primes.csv", &["p", "p_mod_q", "b", "chi1", "threshold", "sign"], &rows)?;
    let bad = sign_criterion_disagreements(&entries);
    if !bad.is_empty() {
        return Err(fail(w, "signs", "sign-criterion", format!("sign and B(p) threshold disagree at p in {bad:?}")));
    }
    let mut class_rows = Vec::new();
    let mut classes = Vec::new();
    for &d in &cfg.d {
        let r = prime_sign_densities(&signs, d, cfg.q, cfg.xmax).map_err(config)?;
        let (pos, neg, zero) = r.class_ratios();
        class_rows.push(vec![
            cell(d),
            cell(cfg.q),
            cell(cfg.xmax),
            cell(r.positive),
            cell(r.negative),
            cell(r.zero),
            cell(r.in_class),
            cell(r.total),
            cell(pos),
            cell(neg),
            cell(zero),
            cell(1.0 / (r.in_class as f64).sqrt()),
        ]);
        classes.push(json!({"d": d, "positive_ratio": pos, "negative_ratio": neg, "zero": r.zero, "in_class": r.in_class}));
    }
    w.csv(
        "signs_classes.csv",
        &["d", "q", "x", "positive", "negative", "zero", "in_class", "total", "pos_ratio", "neg_ratio", "zero_ratio", "radius"],
        &class_rows,
    )?;
    Ok(json!({"primes": entries.len(), "criterion_disagreements": 0, "classes": classes}))
}

pub fn satotate<C: Coefficient>(cfg: &ExperimentConfig, w: &Writer, data: &FormData<C>) -> Result<Value, CliError> {
    let values: Vec<(u64, f64)> = eigenvalues(cfg, data)?.values().collect();
    let mut restrictions = vec![Restriction::All];
    restrictions.extend(cfg.d.iter().map(|&d| Restriction::Progression { d, q: cfg.q }));
    let (mut stats_rows, mut interval_rows, mut hist_rows, mut checkpoint_rows) = (vec![], vec![], vec![], vec![]);
    let mut summary = Vec::new();
    for r in &restrictions {
        let s = restricted_sample(&values, r, cfg.xmax, &DEFAULT_INTERVALS).map_err(config)?;
        let label = r.to_string();
        stats_rows.push(vec![
            label.clone(),
            cell(cfg.xmax),
            cell(s.total_primes),
            cell(s.sample.len()),
            cell(s.ks_distance),
            cell(s.chi_square),
        ]);
        for i in &s.intervals {
            interval_rows.push(vec![
                label.clone(),
                cell(i.a),
                cell(i.b),
                cell(i.empirical),
                cell(i.predicted),
                cell(i.density_empirical),
                cell(i.density_predicted),
            ]);
        }
        for b in &s.bins {
            hist_rows.push(vec![label.clone(), cell(b.a), cell(b.b), cell(b.count), cell(b.expected)]);
        }
        for (x, e) in error_checkpoints(&values, r, (0.0, 1.0), &cfg.checkpoints).map_err(config)? {
            checkpoint_rows.push(vec![label.clone(), cell(0.0), cell(1.0), cell(x), cell(e)]);
        }
        summary.push(json!({"restriction": label, "count": s.sample.len(), "ks": s.ks_distance, "chi_square": s.chi_square}));
    }
    w.csv("satotate_stats.csv", &["restriction", "x_max", "total_primes", "count", "ks", "chi_square"], &stats_rows)?;
    w.csv(
        "satotate_intervals.csv",
        &["restriction", "a", "b", "empirical", "predicted", "density_empirical", "density_predicted"],
        &interval_rows,
    )?;
    w.csv("satotate_hist.csv", &["restriction", "a", "b", "count", "expected"], &hist_rows)?;
    w.csv(CHECKPOINT_FILE, &["restriction", "a", "b", "x", "error"], &checkpoint_rows)?;
    Ok(json!({"restrictions": summary}))
}

pub fn fit(w: &Writer, input: &Path) -> Result<Value, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(input)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}; run `signeq satotate` first", input.display())))?;
    let mut order = Vec::new();
    let mut groups: BTreeMap<String, Vec<(u64, f64)>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(config)?;
        let bad = || CliError::Config(format!("malformed checkpoint row in {}", input.display()));
        let label = rec.get(0).ok_or_else(bad)?.to_string();
        let x: u64 = rec.get(3).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let e: f64 = rec.get(4).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if !groups.contains_key(&label) {
            order.push(label.clone());
        }
        groups.entry(label).or_default().push((x, e));
    }
    let fits: Vec<Value> = order
        .iter()
        .map(|label| match error_term_fit(&groups[label]) {
            Ok(f) => json!({"restriction": label, "C": f.c, "alpha": f.alpha, "residual": f.residual, "used": f.used}),
            Err(e) => json!({"restriction": label, "error": e.to_string()}),
        })
        .collect();
    let payload = json!({"fits": fits});
    w.json("fit.json", payload.clone())?;
    Ok(payload)
}

pub fn density<C: Coefficient>(cfg: &ExperimentConfig, w: &Writer, data: &FormData<C>) -> Result<Value, CliError> {
    let f = &data.sign;
    let level = data.params.level();
    let (mut rows, mut dd_rows, mut id_rows) = (vec![], vec![], vec![]);
    let mut classes = Vec::new();
    for &d in &cfg.d {
        let r = main_theorem_experiment(f, cfg.q, d, cfg.xmax, &cfg.delta_grid, cfg.exec).map_err(config)?;
        if !r.count_identity_holds() {
            return Err(fail(w, "density", "count-identity", format!("d = {d}")));
        }
        rows.push(vec![
            cell(r.q),
            cell(r.d),
            cell(r.x),
            cell(r.positive),
            cell(r.negative),
            cell(r.zero),
            cell(r.nonzero),
            cell(r.positive_ratio()),
            cell(r.negative_ratio()),
            cell(r.radius()),
            cell(r.difference_quotient()),
            cell(r.sum_quotient()),
            cell(r.out_of_class),
            cell(r.non_unit),
        ]);
        for e in &r.dirichlet {
            dd_rows.push(vec![cell(d), cell(e.delta), cell(e.estimate), cell(e.tail_bound)]);
        }
        classes.push(json!({
            "d": d,
            "positive_ratio": r.positive_ratio(),
            "zero": r.zero,
            "difference_quotient": r.difference_quotient(),
            "sum_quotient": r.sum_quotient(),
        }));
        if cfg.q == level || gcd(cfg.q, level) == 1 {
            for &delta in &cfg.delta_grid {
                let id = identity_1q_diagnostic(f, cfg.q, d, delta, cfg.xmax, cfg.exec).map_err(config)?;
                id_rows.push(vec![cell(d), cell(delta), cell(id.value), cell(id.target), cell(id.deviation), cell(id.tail_bound)]);
            }
        }
    }
    w.csv(
        "density.csv",
        &[
            "q", "d", "X", "pos", "neg", "zero", "nonzero", "pos_ratio", "neg_ratio", "radius", "diff_quotient", "sum_quotient",
            "out_of_class", "non_unit",
        ],
        &rows,
    )?;
    w.csv("density_dirichlet.csv", &["d", "delta", "estimate", "tail_bound"], &dd_rows)?;
    let identity_note = if id_rows.is_empty() { "skipped: q is neither the level nor coprime to it" } else { "computed" };
    w.csv("density_identity.csv", &["d", "delta", "value", "target", "deviation", "tail_bound"], &id_rows)?;

    let indep = d_independence_check(f, cfg.q, cfg.xmax, cfg.exec).map_err(config)?;
    let indep_rows: Vec<Vec<String>> =
        indep.classes.iter().map(|c| vec![cell(c.d), cell(c.nonzero), cell(c.density)]).collect();
    w.csv("density_classes.csv", &["d", "nonzero", "density"], &indep_rows)?;

    let group = character_group(cfg.q).map_err(config)?;
    let mut delange_rows = Vec::new();
    let mut delange_max = 0.0f64;
    for eps in group.characters() {
        for (x, v) in delange_partial_sums(f.values(), &eps, &cfg.checkpoints, cfg.exec).map_err(config)? {
            if x == cfg.xmax {
                delange_max = delange_max.max(v);
            }
            delange_rows.push(vec![eps.label(), cell(x), cell(v)]);
        }
    }
    w.csv("density_delange.csv", &["character", "x", "value"], &delange_rows)?;

    let multiplicativity = if f.sign_f(1) == Ok(1) {
        let m = multiplicativity_check(f, MULTIPLICATIVITY_PAIRS, cfg.xmax, cfg.seed).map_err(config)?;
        if !m.violations.is_empty() {
            let shown: Vec<_> = m.violations.iter().take(10).collect();
            return Err(fail(w, "density", "multiplicativity", format!("f(mn) != f(m)f(n) for {shown:?}")));
        }
        json!({"checked": m.checked, "violations": 0})
    } else {
        json!("skipped: a(t) < 0")
    };

    let scatter: Vec<Vec<String>> = scatter_rows(&data.params, &data.a_sq, cfg.xmax.min(SCATTER_LIMIT))
        .into_iter()
        .map(|r| vec![cell(r.n), cell(r.index), cell(r.re), cell(r.im), r.chi])
        .collect();
    w.csv("scatter.csv", &["n", "tn2", "re", "im", "chi"], &scatter)?;

    Ok(json!({
        "classes": classes,
        "d_independence_max_deviation": indep.max_deviation,
        "delange_max": delange_max,
        "identity": identity_note,
        "multiplicativity": multiplicativity,
    }))
}
