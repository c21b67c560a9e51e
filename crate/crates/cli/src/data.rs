//! Coefficient tables for an experiment: the lifted form, `a(tn²)` and the
//! sign function, built from the preset or a form file.

use num_bigint::BigInt;

use signeq::characters::principal;
use signeq::coeff::Coefficient;
use signeq::cyclotomic::Cyclotomic;
use signeq::density::SignFunction;
use signeq::halfint::HalfIntegralForm;
use signeq::qseries::{delta_with, CacheStatus, QSeries, SeriesCache, SeriesKey};
use signeq::shimura::{delta_preimage_squares, lift, LiftedForm, ShimuraParams};

use crate::config::{ExperimentConfig, FormSource};
use crate::CliError;

pub struct FormData<C> {
    pub params: ShimuraParams,
    pub lifted: LiftedForm<C>,
    /// `a_sq[n] = a(tn²)` for `n ≤ xmax`.
    pub a_sq: Vec<C>,
    pub sign: SignFunction,
}

pub enum Loaded {
    Int(FormData<BigInt>),
    Cyc(FormData<Cyclotomic>),
}

pub fn delta_key() -> SeriesKey {
    SeriesKey::new("delta", "")
}

fn gen_hint(cfg: &ExperimentConfig, dir: &std::path::Path) -> String {
    format!(
        "run `signeq gen --form delta-preimage --T {} --cache {}` first",
        cfg.truncation,
        dir.display()
    )
}

/// τ(n) for `n ≤ T`, from the cache when one is configured.
fn tau(cfg: &ExperimentConfig) -> Result<QSeries, CliError> {
    let need = cfg.truncation as usize;
    let Some(dir) = &cfg.cache else {
        return Ok(delta_with(need, cfg.exec));
    };
    let cache = SeriesCache::new(dir);
    match cache.load(&delta_key()).map_err(|e| CliError::Runtime(format!("{e}; delete the file and {}", gen_hint(cfg, dir))))? {
        None => Err(CliError::MissingCache(format!("no delta series cached in {}; {}", dir.display(), gen_hint(cfg, dir)))),
        Some(s) if s.truncation() < need => Err(CliError::MissingCache(format!(
            "cached delta series in {} stops at T = {}; {}",
            dir.display(),
            s.truncation(),
            gen_hint(cfg, dir)
        ))),
        Some(s) => Ok(QSeries::new(s.offset24(), s.coeffs()[..=need].to_vec())),
    }
}

/// Writes or verifies the τ cache.
pub fn generate(cfg: &ExperimentConfig, source: &FormSource) -> Result<(CacheStatus, std::path::PathBuf), CliError> {
    if !matches!(source, FormSource::Delta) {
        return Err(CliError::Config("gen caches the delta-preimage preset; form files are read directly".into()));
    }
    let Some(dir) = &cfg.cache else {
        return Err(CliError::Config("gen needs --cache".into()));
    };
    let cache = SeriesCache::new(dir);
    let exec = cfg.exec;
    let (_, status) = cache
        .get_or_build(&delta_key(), cfg.truncation as usize, |t| delta_with(t, exec))
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok((status, cache.path(&delta_key())))
}

fn sign_function<C: Coefficient>(params: &ShimuraParams, a_sq: &[C]) -> Result<SignFunction, CliError> {
    SignFunction::from_square_class(params, a_sq).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(cfg: &ExperimentConfig, source: FormSource) -> Result<Loaded, CliError> {
    let x = cfg.xmax as usize;
    match source {
        FormSource::Delta => {
            let params = ShimuraParams::delta_preimage();
            let tau = tau(cfg)?.into_coeffs();
            let a_sq = delta_preimage_squares(&tau, x, cfg.exec).map_err(|e| CliError::Runtime(e.to_string()))?;
            let lifted = LiftedForm::new(12, 1, principal(1).expect("modulus 1"), tau)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let sign = sign_function(&params, &a_sq)?;
            Ok(Loaded::Int(FormData { params, lifted, a_sq, sign }))
        }
        FormSource::File(form) => load_form(cfg, &form).map(Loaded::Cyc),
    }
}

fn load_form(cfg: &ExperimentConfig, form: &HalfIntegralForm) -> Result<FormData<Cyclotomic>, CliError> {
    let x = cfg.xmax;
    let need = form.t() * x * x;
    if need > form.truncation() {
        return Err(CliError::Config(format!(
            "the form is known up to {}, but xmax = {x} needs a(t·xmax²) = a({need})",
            form.truncation()
        )));
    }
    let params = ShimuraParams::new(form.level(), form.k(), form.t(), form.nebentypus().clone())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let lifted = lift(form, x as usize).map_err(|e| CliError::Config(e.to_string()))?;
    let mut a_sq = vec![Cyclotomic::zero(form.field_order())];
    for n in 1..=x {
        a_sq.push(form.coefficient(form.t() * n * n).map_err(|e| CliError::Config(e.to_string()))?);
    }
    let sign = sign_function(&params, &a_sq)?;
    Ok(FormData { params, lifted, a_sq, sign })
}
