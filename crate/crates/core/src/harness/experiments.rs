//! Ladder evaluation and the per-experiment checks.

use std::f64::consts::{PI, SQRT_2};

use crate::cartoon::{
    decay_constant, estimate_size, sample_cartoon, verify_decay_sampled, CartoonSpec, DomainB,
    SmoothPart,
};
use crate::deform::{
    apply_deformation, apply_deformation_unchecked, lemma1_constant, tube_volume, warp_cartoon,
    warp_fn, warp_smooth, DeformationField, FieldSpec, Hypotheses,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::frames::{
    delta_bank, make_gabor_bank, make_random_bank, make_wavelet_bank, make_wavelet_bank_with_base,
    normalize_bank, FilterBank,
};
use crate::network::{
    extract_features, feature_distance, FeatureCollection, Module, ModuleSequence,
};
use crate::signal::{io::read_pgm, Complex64, Grid, Signal};

use super::config::{BankConfig, ExperimentConfig, ExperimentKind, NetworkConfig, SourceConfig};
use super::fit::{fit_decay_exponent, ExponentFit};
use super::report::{Check, FitGroup, Report, Row, Variable};

const DEFAULT_CONTRACTIVITY_SLACK: f64 = 1e-8;

pub fn build_bank(cfg: &BankConfig, grid: &Grid) -> Result<FilterBank> {
    match cfg {
        BankConfig::Delta => delta_bank(grid),
        BankConfig::Gabor { frequencies, width } => make_gabor_bank(grid, frequencies, *width),
        BankConfig::Wavelet {
            scales,
            mother,
            base_scale: None,
        } => make_wavelet_bank(grid, *scales, *mother),
        BankConfig::Wavelet {
            scales,
            mother,
            base_scale: Some(b),
        } => make_wavelet_bank_with_base(grid, *scales, *mother, *b),
        BankConfig::Random {
            count,
            seed,
            smoothness,
        } => make_random_bank(grid, *count, *seed, *smoothness),
    }
}

/// The module sequence described by `cfg`, or the identity extractor.
/// Admissibility is not checked here.
pub fn build_network(cfg: Option<&NetworkConfig>, grid: &Grid) -> Result<ModuleSequence> {
    let Some(cfg) = cfg else {
        return ModuleSequence::identity(grid);
    };
    if !(cfg.gain > 0.0 && cfg.gain.is_finite()) {
        return Err(Error::Config(format!("gain {} must be positive", cfg.gain)));
    }
    let mut modules = Vec::with_capacity(cfg.depth + 1);
    let mut g = grid.clone();
    for _ in 0..=cfg.depth {
        let mut bank = build_bank(&cfg.bank, &g)?;
        if cfg.gain != 1.0 {
            bank = bank.scaled(cfg.gain);
        }
        if cfg.normalize {
            bank = normalize_bank(&bank, cfg.nonlinearity.lipschitz()).bank;
        }
        let module = Module::new(bank, cfg.nonlinearity, cfg.subsampling)?;
        g = module.output_grid().clone();
        modules.push(module);
    }
    ModuleSequence::new(modules, cfg.depth)
}

const BAND_RELATIVE: [f64; 3] = [0.5, 0.75, 1.0];
const BAND_PHASES: [f64; 3] = [0.3, 1.1, 2.0];

/// Unnormalized band-limited profile.
fn band_profile(x: &[f64], bandwidth: f64, envelope: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let carrier: f64 = BAND_RELATIVE
        .iter()
        .zip(BAND_PHASES)
        .map(|(nu, phi)| (2.0 * PI * bandwidth * nu * x[0] + phi).cos())
        .sum();
    (-r2 / (2.0 * envelope * envelope)).exp() * carrier
}

/// Frequencies beyond `R + 4/(2πσ)` carry negligible energy; they must stay
/// below Nyquist.
fn check_band(grid: &Grid, bandwidth: f64, envelope: f64) -> Result<()> {
    if !(bandwidth > 0.0 && envelope > 0.0) {
        return Err(Error::Config(
            "bandwidth and envelope must be positive".into(),
        ));
    }
    let effective = bandwidth + 4.0 / (2.0 * PI * envelope);
    if effective >= grid.nyquist() {
        return Err(Error::Config(format!(
            "bandwidth {bandwidth} (effective {effective:.4}) reaches the grid Nyquist frequency {}",
            grid.nyquist()
        )));
    }
    Ok(())
}

/// A signal source prepared on a grid.
enum Prepared {
    Cartoon(CartoonSpec),
    Smooth(SmoothPart),
    Band {
        bandwidth: f64,
        envelope: f64,
        norm: f64,
    },
    Concentrated,
    Sampled(Signal),
}

impl Prepared {
    fn new(cfg: &SourceConfig, grid: &Grid) -> Result<Prepared> {
        Ok(match cfg {
            SourceConfig::Cartoon { .. } => {
                let spec = cfg.cartoon().expect("cartoon source");
                spec.check_on(grid)?;
                Prepared::Cartoon(spec)
            }
            SourceConfig::Smooth { part } => {
                part.validate(grid.dim())?;
                Prepared::Smooth(part.clone())
            }
            SourceConfig::Bandlimited {
                bandwidth,
                envelope,
                ..
            } => Prepared::band(grid, *bandwidth, *envelope)?,
            SourceConfig::ConcentratedIndicator => {
                if grid.dim() != 1 {
                    return Err(Error::Config(
                        "concentrated indicators are one-dimensional".into(),
                    ));
                }
                Prepared::Concentrated
            }
            SourceConfig::Pgm { path, .. } => {
                let img = read_pgm(path)?;
                if img.grid() != grid {
                    return Err(Error::Config(format!(
                        "image grid {:?} does not match the configured grid {:?}",
                        img.grid(),
                        grid
                    )));
                }
                Prepared::Sampled(img)
            }
        })
    }

    fn band(grid: &Grid, bandwidth: f64, envelope: f64) -> Result<Prepared> {
        check_band(grid, bandwidth, envelope)?;
        let raw = Signal::from_real_fn(grid, |x| band_profile(x, bandwidth, envelope));
        Ok(Prepared::Band {
            bandwidth,
            envelope,
            norm: 1.0 / raw.l2_norm(),
        })
    }

    /// `(f, F_τ f)` for a rung of amplitude `s`.
    fn pair(
        &self,
        grid: &Grid,
        field: &DeformationField,
        s: f64,
        cfg: &ExperimentConfig,
    ) -> Result<(Signal, Signal)> {
        let interp = cfg.deformation.interpolation;
        Ok(match self {
            Prepared::Cartoon(spec) => (
                sample_cartoon(spec, grid)?,
                warp_cartoon(spec, grid, field)?,
            ),
            Prepared::Smooth(part) => {
                check_small(field, grid)?;
                (part.sample(grid), warp_smooth(part, grid, field))
            }
            Prepared::Band {
                bandwidth,
                envelope,
                norm,
            } => {
                check_small(field, grid)?;
                let g =
                    |x: &[f64]| Complex64::new(norm * band_profile(x, *bandwidth, *envelope), 0.0);
                (Signal::from_fn(grid, g), warp_fn(grid, field, g))
            }
            Prepared::Concentrated => {
                let f = concentrated_indicator(grid, s);
                let w = apply_deformation_unchecked(&f, field, interp);
                (f, w)
            }
            Prepared::Sampled(f) => (f.clone(), apply_deformation(f, field, interp)?),
        })
    }
}

fn check_small(field: &DeformationField, grid: &Grid) -> Result<()> {
    // warp_fn is unchecked; keep the standing assumption
    let sup = field.sup_norm(grid);
    if !(sup < crate::deform::MAX_WARP_SUP) {
        return Err(Error::Hypothesis(format!(
            "|tau|_inf = {sup} is not below 1/2"
        )));
    }
    Ok(())
}

/// `s^{−1/2} 1_{[−s/2, s/2]}`.
pub fn concentrated_indicator(grid: &Grid, s: f64) -> Signal {
    let h = s.powf(-0.5);
    Signal::from_real_fn(grid, |x| if x[0].abs() <= s / 2.0 { h } else { 0.0 })
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    grid: Grid,
    seq: ModuleSequence,
    exec: Execution,
}

struct Measured {
    row: Row,
    /// `vol(S)` for cartoon sources.
    tube: Option<f64>,
}

impl Context<'_> {
    fn features(&self, f: &Signal) -> Result<FeatureCollection> {
        extract_features(&self.seq, f, self.exec)
    }

    /// Evaluates one rung per amplitude with a shared (rung-independent)
    /// source; features of the undeformed signal are computed once unless
    /// the source changes per rung.
    fn tau_ladder(
        &self,
        src: &Prepared,
        amplitudes: &[f64],
        bandwidth: Option<f64>,
        group: usize,
    ) -> Result<Vec<Measured>> {
        let grid = &self.grid;
        let base = DeformationField::from_spec(&self.cfg.deformation.field, grid, 1.0)?;
        let base_sup = base.sup_norm(grid);
        let base_jac = base.jacobian_sup(grid, self.cfg.deformation.matrix_norm);
        let shared = match src {
            Prepared::Concentrated => None,
            _ => {
                let f = src
                    .pair(grid, &DeformationField::zero(grid.dim()), 0.0, self.cfg)?
                    .0;
                let phi = self.features(&f)?;
                Some((f, phi))
            }
        };
        let tube_domain: Option<&DomainB> = match src {
            Prepared::Cartoon(spec) if !spec.f2.is_zero() => Some(&spec.domain),
            _ => None,
        };
        let idx: Vec<usize> = (0..amplitudes.len()).collect();
        self.exec.try_map(&idx, |&k| {
            let s = amplitudes[k];
            let field = base.scaled(s);
            let tau_sup = s * base_sup;
            let jacobian_sup = s * base_jac;
            let (f, w) = src.pair(grid, &field, s, self.cfg)?;
            let input_error = f.distance(&w)?;
            let phi_w = self.features(&w)?;
            let feature_error = match &shared {
                Some((_, phi_f)) => feature_distance(phi_f, &phi_w)?,
                None => feature_distance(&self.features(&f)?, &phi_w)?,
            };
            let tube = match tube_domain {
                Some(d) if tau_sup <= 1.0 => Some(tube_volume(d, &field, grid)?),
                _ => None,
            };
            Ok(Measured {
                row: Row {
                    rung: k,
                    bandwidth,
                    tau_sup,
                    jacobian_sup,
                    input_error,
                    feature_error,
                    hypotheses: Hypotheses::classify(tau_sup, jacobian_sup, grid.dim()),
                    group,
                },
                tube,
            })
        })
    }
}

fn fit_rows(
    rows: &[Row],
    variable: Variable,
    input: bool,
) -> std::result::Result<ExponentFit, Error> {
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            (
                r.abscissa(variable),
                if input {
                    r.input_error
                } else {
                    r.feature_error
                },
            )
        })
        .collect();
    fit_decay_exponent(&pairs)
}

fn window_check(
    checks: &mut Vec<Check>,
    name: &str,
    fit: &std::result::Result<ExponentFit, Error>,
    lo: Option<f64>,
    hi: Option<f64>,
    pick: fn(&ExponentFit) -> f64,
) {
    if lo.is_none() && hi.is_none() {
        return;
    }
    let range = format!(
        "[{}, {}]",
        lo.map_or("-inf".into(), |v| v.to_string()),
        hi.map_or("inf".into(), |v| v.to_string())
    );
    match fit {
        Ok(f) => {
            let v = pick(f);
            let ok = lo.is_none_or(|l| v >= l) && hi.is_none_or(|h| v <= h);
            checks.push(Check::new(name, ok, format!("{v:.6} in {range}")));
        }
        Err(e) => checks.push(Check::new(name, false, format!("no fit: {e}"))),
    }
}

fn contractivity_checks(checks: &mut Vec<Check>, rows: &[Row], slack: f64) {
    let worst = rows
        .iter()
        .filter(|r| r.feature_error > r.input_error * (1.0 + slack))
        .map(|r| {
            format!(
                "rung {}: {:.6e} > {:.6e}",
                r.rung, r.feature_error, r.input_error
            )
        })
        .collect::<Vec<_>>();
    let detail = if worst.is_empty() {
        format!(
            "feature error <= input error * (1 + {slack:e}) on {} rungs",
            rows.len()
        )
    } else {
        worst.join("; ")
    };
    checks.push(Check::new("contractivity", worst.is_empty(), detail));
}

fn rung_checks(
    checks: &mut Vec<Check>,
    name: &str,
    rows: &[Row],
    expected: impl Fn(&Row) -> f64,
    tol: f64,
) {
    for r in rows {
        let e = expected(r);
        let rel = (r.input_error - e).abs() / e;
        checks.push(Check::new(
            format!("{name} rung {}", r.rung),
            rel <= tol,
            format!(
                "error {:.6e} vs {:.6e} (relative {:.3e}, tolerance {tol})",
                r.input_error, e, rel
            ),
        ));
    }
}

/// Closed-form `‖f − F_τ f‖₂` for `c·1_{[a,b]}` under a translation of
/// length s (shorter than b − a).
fn indicator_translation_law(src: &Prepared, field: &FieldSpec) -> Option<f64> {
    let Prepared::Cartoon(spec) = src else {
        return None;
    };
    match (&spec.f1, &spec.f2, &spec.domain, field) {
        (
            f1,
            SmoothPart::Constant { value },
            DomainB::Interval { .. },
            FieldSpec::ConstantTranslation { .. },
        ) if f1.is_zero() => Some(value.abs()),
        _ => None,
    }
}

fn hypothesis_check(checks: &mut Vec<Check>, rows: &[Row], jacobian: bool) {
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| {
            if jacobian {
                !r.hypotheses.small_jacobian
            } else {
                !r.hypotheses.small_displacement
            }
        })
        .map(|r| {
            format!(
                "rung {} (|tau| = {:.4e}, |Dtau| = {:.4e})",
                r.rung, r.tau_sup, r.jacobian_sup
            )
        })
        .collect();
    let what = if jacobian {
        "|tau| < 1/2 and |Dtau| <= 1/(2d)"
    } else {
        "|tau| < 1/2"
    };
    let detail = if bad.is_empty() {
        format!("{what} on every rung")
    } else {
        format!("{what} violated at {}", bad.join(", "))
    };
    checks.push(Check::new("hypotheses", bad.is_empty(), detail));
}

/// Runs the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<Report> {
    let mut cfg = cfg.clone();
    cfg.apply_seed();
    let grid = cfg.grid.build()?;
    let seq = build_network(cfg.network.as_ref(), &grid)?;
    seq.check_admissible()?;
    let ctx = Context {
        cfg: &cfg,
        grid,
        seq,
        exec,
    };
    match cfg.experiment {
        ExperimentKind::Bandlimited => bandlimited(&ctx),
        _ => tau_experiment(&ctx),
    }
}

fn tau_experiment(ctx: &Context<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let a = &cfg.assertions;
    let grid = &ctx.grid;
    let src = Prepared::new(&cfg.signal, grid)?;
    let amplitudes = cfg.deformation.ladder.amplitudes()?;

    if cfg.experiment == ExperimentKind::Smooth {
        smooth_guard(&src, cfg, grid)?;
    }
    if cfg.experiment == ExperimentKind::Counterexample && !matches!(src, Prepared::Concentrated) {
        return Err(Error::Config(
            "counterexample runs need the concentrated-indicator source".into(),
        ));
    }

    let measured = ctx.tau_ladder(&src, &amplitudes, None, 0)?;
    let rows: Vec<Row> = measured.iter().map(|m| m.row.clone()).collect();
    let fit = fit_rows(
        &rows,
        Variable::Tau,
        cfg.experiment == ExperimentKind::Deformation,
    );
    let mut checks = Vec::new();
    contractivity_checks(
        &mut checks,
        &rows,
        a.contractivity_slack.unwrap_or(DEFAULT_CONTRACTIVITY_SLACK),
    );

    match cfg.experiment {
        ExperimentKind::Deformation => {
            window_check(&mut checks, "alpha", &fit, a.alpha_min, a.alpha_max, |f| {
                f.alpha
            });
            window_check(
                &mut checks,
                "prefactor",
                &fit,
                a.prefactor_min,
                a.prefactor_max,
                |f| f.prefactor(),
            );
        }
        ExperimentKind::Sharpness => {
            let tol = a.rung_tolerance.unwrap_or(0.02);
            match indicator_translation_law(&src, &cfg.deformation.field) {
                Some(c) => rung_checks(
                    &mut checks,
                    "sqrt(2s)",
                    &rows,
                    |r| c * (2.0 * r.tau_sup).sqrt(),
                    tol,
                ),
                None => {
                    return Err(Error::Config(
                        "sharpness runs need an interval indicator and a constant translation"
                            .into(),
                    ))
                }
            }
            window_check(
                &mut checks,
                "alpha",
                &fit,
                a.alpha_min.or(Some(0.45)),
                a.alpha_max.or(Some(0.55)),
                |f| f.alpha,
            );
            window_check(
                &mut checks,
                "prefactor",
                &fit,
                a.prefactor_min.or(Some(1.34)),
                a.prefactor_max.or(Some(1.49)),
                |f| f.prefactor(),
            );
        }
        ExperimentKind::Counterexample => {
            let tol = a.rung_tolerance.unwrap_or(0.02);
            rung_checks(&mut checks, "sqrt(2)", &rows, |_| SQRT_2, tol);
            window_check(
                &mut checks,
                "alpha",
                &fit,
                a.alpha_min.or(Some(-0.05)),
                a.alpha_max.or(Some(0.05)),
                |f| f.alpha,
            );
        }
        ExperimentKind::Smooth => {
            hypothesis_check(&mut checks, &rows, false);
            window_check(
                &mut checks,
                "alpha",
                &fit,
                a.alpha_min.or(Some(0.9)),
                a.alpha_max.or(Some(1.1)),
                |f| f.alpha,
            );
            if let Some(c) = smooth_decay_constant(&src, grid) {
                let d = lemma1_constant(grid.dim())?;
                let slack = a.bound_slack.unwrap_or(0.05);
                let bad: Vec<String> = rows
                    .iter()
                    .filter(|r| r.input_error > c * d * r.tau_sup * (1.0 + slack))
                    .map(|r| {
                        format!(
                            "rung {}: {:.6e} > {:.6e}",
                            r.rung,
                            r.input_error,
                            c * d * r.tau_sup
                        )
                    })
                    .collect();
                let detail = if bad.is_empty() {
                    format!("error <= C*D*|tau| with C = {c:.6}, D = {d:.6}")
                } else {
                    bad.join("; ")
                };
                checks.push(Check::new("smooth bound", bad.is_empty(), detail));
            }
        }
        ExperimentKind::Stability => {
            hypothesis_check(&mut checks, &rows, true);
            window_check(&mut checks, "alpha", &fit, a.alpha_min, a.alpha_max, |f| {
                f.alpha
            });
            if let Prepared::Cartoon(spec) = &src {
                let c_k = cartoon_constant(spec, grid, &measured)?;
                let bad: Vec<String> = rows
                    .iter()
                    .filter(|r| r.feature_error > c_k * r.tau_sup.sqrt())
                    .map(|r| {
                        format!(
                            "rung {}: {:.6e} > {:.6e}",
                            r.rung,
                            r.feature_error,
                            c_k * r.tau_sup.sqrt()
                        )
                    })
                    .collect();
                let detail = if bad.is_empty() {
                    format!("feature error <= C_K*|tau|^(1/2) with C_K = {c_k:.6}")
                } else {
                    bad.join("; ")
                };
                checks.push(Check::new("cartoon bound", bad.is_empty(), detail));
            }
        }
        ExperimentKind::Bandlimited => unreachable!(),
    }

    Ok(Report {
        experiment: cfg.experiment,
        rows,
        groups: vec![FitGroup {
            variable: Variable::Tau,
            fit: fit.ok(),
        }],
        checks,
    })
}

/// `Ĉ_K = 2·max(2K·D, K·Ĉ_∂B^{1/2})` with `Ĉ_∂B = max_k vol(S_k)/‖τ_k‖_∞`.
pub fn assemble_cartoon_constant(size: f64, smooth_constant: f64, tube_constant: f64) -> f64 {
    2.0 * (2.0 * size * smooth_constant).max(size * tube_constant.sqrt())
}

fn cartoon_constant(spec: &CartoonSpec, grid: &Grid, measured: &[Measured]) -> Result<f64> {
    let size = match spec.size {
        Some(k) => k,
        None => estimate_size(spec, grid).size(),
    };
    let tube = measured
        .iter()
        .filter_map(|m| {
            m.tube
                .filter(|_| m.row.tau_sup > 0.0)
                .map(|v| v / m.row.tau_sup)
        })
        .fold(0.0, f64::max);
    Ok(assemble_cartoon_constant(
        size,
        lemma1_constant(grid.dim())?,
        tube,
    ))
}

fn smooth_decay_constant(src: &Prepared, grid: &Grid) -> Option<f64> {
    match src {
        Prepared::Smooth(part) => Some(decay_constant(part, grid)),
        Prepared::Cartoon(spec) if spec.f2.is_zero() => Some(decay_constant(&spec.f1, grid)),
        _ => None,
    }
}

/// Rejects inputs outside the smooth class: anything that is not an
/// analytic smooth part must pass the sampled decay check.
fn smooth_guard(src: &Prepared, cfg: &ExperimentConfig, grid: &Grid) -> Result<()> {
    let (signal, size) = match (src, &cfg.signal) {
        (Prepared::Smooth(_), _) => return Ok(()),
        (Prepared::Cartoon(spec), _) if spec.f2.is_zero() => return Ok(()),
        (Prepared::Cartoon(spec), _) => {
            let k = decay_constant(&spec.f1, grid).max(decay_constant(&spec.f2, grid));
            (sample_cartoon(spec, grid)?, spec.size.unwrap_or(k))
        }
        (Prepared::Sampled(f), SourceConfig::Pgm { size: Some(k), .. }) => (f.clone(), *k),
        (Prepared::Sampled(_), _) => {
            return Err(Error::Config(
                "smooth runs on images need a declared size".into(),
            ));
        }
        _ => return Err(Error::Config("source not supported by smooth runs".into())),
    };
    match verify_decay_sampled(&signal, size) {
        crate::cartoon::DecayCheck::Pass => Ok(()),
        crate::cartoon::DecayCheck::Fail { point, gradient, bound } => Err(Error::Hypothesis(format!(
            "input is not in the smooth class: difference quotient {gradient:.6e} exceeds {bound:.6e} at {point:?}"
        ))),
    }
}

fn bandlimited(ctx: &Context<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let a = &cfg.assertions;
    let grid = &ctx.grid;
    let SourceConfig::Bandlimited {
        bandwidth,
        envelope,
        doublings,
    } = &cfg.signal
    else {
        return Err(Error::Config(
            "bandlimited runs need a bandlimited source".into(),
        ));
    };
    let fixed = cfg
        .deformation
        .fixed_amplitude
        .ok_or_else(|| Error::Config("bandlimited runs need deformation.fixed_amplitude".into()))?;
    let bands: Vec<f64> = (0..=*doublings)
        .map(|k| bandwidth * 2f64.powi(k as i32))
        .collect();
    let sources = bands
        .iter()
        .map(|&r| Prepared::band(grid, r, *envelope))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (k, (src, &r)) in sources.iter().zip(&bands).enumerate() {
        let mut m = ctx.tau_ladder(src, &[fixed], Some(r), 0)?;
        let mut row = m.remove(0).row;
        row.rung = k;
        rows.push(row);
    }
    let ladder = cfg.deformation.ladder.amplitudes()?;
    rows.extend(
        ctx.tau_ladder(&sources[0], &ladder, Some(bands[0]), 1)?
            .into_iter()
            .map(|m| m.row),
    );

    let band_rows: Vec<Row> = rows.iter().filter(|r| r.group == 0).cloned().collect();
    let tau_rows: Vec<Row> = rows.iter().filter(|r| r.group == 1).cloned().collect();
    let band_fit = fit_rows(&band_rows, Variable::Bandwidth, false);
    let tau_fit = fit_rows(&tau_rows, Variable::Tau, false);

    let mut checks = Vec::new();
    contractivity_checks(
        &mut checks,
        &rows,
        a.contractivity_slack.unwrap_or(DEFAULT_CONTRACTIVITY_SLACK),
    );
    hypothesis_check(&mut checks, &rows, false);
    let (lo, hi) = (a.growth_min.unwrap_or(1.5), a.growth_max.unwrap_or(2.5));
    for pair in band_rows.windows(2) {
        let g = pair[1].feature_error / pair[0].feature_error;
        checks.push(Check::new(
            format!(
                "growth R={}->{}",
                pair[0].bandwidth.unwrap_or(0.0),
                pair[1].bandwidth.unwrap_or(0.0)
            ),
            (lo..=hi).contains(&g),
            format!("ratio {g:.4} in [{lo}, {hi}]"),
        ));
    }
    window_check(
        &mut checks,
        "alpha",
        &tau_fit,
        a.alpha_min.or(Some(0.9)),
        a.alpha_max.or(Some(1.1)),
        |f| f.alpha,
    );

    Ok(Report {
        experiment: cfg.experiment,
        rows,
        groups: vec![
            FitGroup {
                variable: Variable::Bandwidth,
                fit: band_fit.ok(),
            },
            FitGroup {
                variable: Variable::Tau,
                fit: tau_fit.ok(),
            },
        ],
        checks,
    })
}

/// `(‖τ_k‖_∞, ‖f − F_{τ_k} f‖₂)` along the configured ladder.
pub fn deformation_error_curve(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<(f64, f64)>> {
    Ok(curve_rows(cfg, exec)?
        .iter()
        .map(|r| (r.tau_sup, r.input_error))
        .collect())
}

/// `(‖τ_k‖_∞, |||Φ(F_{τ_k} f) − Φ(f)|||)` along the configured ladder.
pub fn feature_stability_curve(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<(f64, f64)>> {
    Ok(curve_rows(cfg, exec)?
        .iter()
        .map(|r| (r.tau_sup, r.feature_error))
        .collect())
}

fn curve_rows(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<Row>> {
    let mut cfg = cfg.clone();
    cfg.apply_seed();
    let grid = cfg.grid.build()?;
    let seq = build_network(cfg.network.as_ref(), &grid)?;
    seq.check_admissible()?;
    let ctx = Context {
        cfg: &cfg,
        grid,
        seq,
        exec,
    };
    let src = Prepared::new(&cfg.signal, &ctx.grid)?;
    let amplitudes = cfg.deformation.ladder.amplitudes()?;
    Ok(ctx
        .tau_ladder(&src, &amplitudes, None, 0)?
        .into_iter()
        .map(|m| m.row)
        .collect())
}

/// The undeformed input signal described by `cfg` (the first rung's member
/// for per-rung families).
pub fn source_signal(cfg: &ExperimentConfig) -> Result<Signal> {
    let grid = cfg.grid.build()?;
    let s = cfg.deformation.ladder.amplitudes()?[0];
    let src = Prepared::new(&cfg.signal, &grid)?;
    Ok(src
        .pair(&grid, &DeformationField::zero(grid.dim()), s, cfg)?
        .0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{GridConfig, LadderConfig};

    fn small_sharpness() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default_sharpness();
        cfg.grid = GridConfig {
            dim: 1,
            extent: 2048,
            spacing: 1.0 / 256.0,
        };
        cfg.deformation.ladder = LadderConfig {
            start: 0.25,
            ratio: 0.5,
            rungs: 5,
        };
        cfg
    }

    #[test]
    fn sharpness_passes_on_a_coarse_grid() {
        let r = run_experiment(&small_sharpness(), Execution::Sequential).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert_eq!(r.rows.len(), 5);
    }

    #[test]
    fn zero_signal_has_zero_errors() {
        let mut cfg = small_sharpness();
        cfg.experiment = ExperimentKind::Deformation;
        cfg.signal = SourceConfig::Cartoon {
            f1: SmoothPart::zero(),
            f2: SmoothPart::zero(),
            domain: DomainB::interval(-1.0, 1.0),
            size: None,
        };
        let curve = deformation_error_curve(&cfg, Execution::Sequential).unwrap();
        assert!(curve.iter().all(|&(_, e)| e == 0.0));
        let r = run_experiment(&cfg, Execution::Sequential).unwrap();
        assert!(r.fit().is_none());
        assert!(r.passed());
    }

    #[test]
    fn band_guard() {
        let g = Grid::line(256, 1.0 / 16.0).unwrap();
        assert!(check_band(&g, 2.0, 0.5).is_ok());
        assert!(matches!(check_band(&g, 7.0, 0.5), Err(Error::Config(_))));
    }

    #[test]
    fn concentrated_family_has_unit_energy() {
        let g = Grid::line(8192, 1.0 / 1024.0).unwrap();
        for k in 0..4 {
            let s = 0.25 * 0.5f64.powi(k);
            let e = concentrated_indicator(&g, s).l2_norm_sq();
            assert!((e - 1.0).abs() <= g.spacing() / s + 1e-12);
        }
    }

    #[test]
    fn cartoon_constant_assembly() {
        // K = 1, D = 2, C_dB = 16: max(4, 4) doubled
        assert_eq!(assemble_cartoon_constant(1.0, 2.0, 16.0), 8.0);
        assert_eq!(assemble_cartoon_constant(2.0, 1.0, 100.0), 40.0);
    }

    #[test]
    fn unnormalized_bank_is_refused() {
        let mut cfg = small_sharpness();
        cfg.experiment = ExperimentKind::Stability;
        cfg.network = Some(NetworkConfig {
            depth: 1,
            nonlinearity: crate::network::Nonlinearity::Modulus,
            subsampling: 1,
            normalize: false,
            gain: 2.0,
            bank: BankConfig::Delta,
        });
        assert!(matches!(
            run_experiment(&cfg, Execution::Sequential),
            Err(Error::Inadmissible { layer: 0, .. })
        ));
    }
}
