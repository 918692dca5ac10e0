use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{grid, Experiment, FitModel, RunConfig, Spacing};
use super::oracle::run_oracles;
use crate::bath::{apply_depletion, bath_to_string, generate_lattice, sample_bath, Bath};
use crate::cce::{cce_total, nuclear_register_coherence, CoherenceCurve, CURVE_HEADER};
use crate::error::{Error, Result};
use crate::fit::{
    coherence_lower_bound, fit_oscillation, fit_stretched_exp, windowed_frequencies, DataSeries, FitReport,
    StretchedOptions,
};
use crate::noise::{noise_curve, FilterFunction};
use crate::readout::{estimate_t1, histograms, optimal_threshold, simulate_qnd_trace};
use crate::sequences::{quasi_static_ensemble, xy8_spectroscopy_with_error, RegisterModel, StandardSequence};

pub const NOISE_HEADER: &str = "t_seconds,chi_rad2,coherence_abs";
pub const SPECTROSCOPY_HEADER: &str = "tau_seconds,p0_fraction";
pub const DIPS_HEADER: &str = "k,tau_resonance_seconds,tau_dip_seconds,p0_min_fraction";
pub const BIAS_SCAN_HEADER: &str = "bias_v,depleted_fraction,active_paramagnetic_count,ramsey_t2star_s,hahn_t2_s";
pub const WINDOWS_HEADER: &str = "t_start_seconds,t_end_seconds,frequency_hz,sigma_frequency_hz";
pub const ORACLE_HEADER: &str = "check,value,tolerance,pass";

/// Everything one subcommand needs besides its configuration.
pub struct Context {
    pub command: String,
    pub config: RunConfig,
    /// Directory holding the configuration file; relative data paths resolve here.
    pub config_dir: PathBuf,
    pub out: PathBuf,
    pub verbose: bool,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[{}] {}", self.command, msg.as_ref());
        }
    }

    fn write(&self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.log(format!("wrote {}", path.display()));
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the resolved configuration with the output location removed.
pub fn config_hash(config: &RunConfig) -> String {
    let mut c = config.clone();
    c.output_dir.clear();
    sha256_hex(serde_json::to_string(&c).expect("config serializes").as_bytes())
}

fn float(v: f64) -> String {
    format!("{v:.12e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".into(), float)
}

fn json_opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

fn missing(key: &str, why: &str) -> Error {
    Error::Config(vec![format!("{key}: required {why}")])
}

fn build_bath(cfg: &RunConfig) -> Result<(Bath, f64)> {
    let (constants, extent) = cfg.lattice_constants();
    let sites = generate_lattice(extent, &constants)?;
    let bath = sample_bath(&sites, &cfg.bath_config())?;
    let (model, bias) = cfg.depletion_model();
    model.validate()?;
    Ok((apply_depletion(&bath, bias, &model)?, model.probability(bias)))
}

fn bath_summary(bath: &Bath) -> Value {
    json!({
        "sha256": sha256_hex(bath_to_string(bath).as_bytes()),
        "spins": bath.len(),
        "nuclear": bath.nuclear_count(),
        "paramagnetic": bath.paramagnetic_count(),
        "active_paramagnetic": bath.active_paramagnetic_count(),
    })
}

fn curve_summary(curve: &CoherenceCurve) -> Value {
    json!({
        "points": curve.len(),
        "clamp_count": curve.clamp_count,
        "one_over_e_time_s": json_opt(curve.one_over_e_time()),
    })
}

/// Runs `ctx.command` and returns its result block for the metadata file.
pub fn dispatch(ctx: &Context) -> Result<Value> {
    match ctx.command.as_str() {
        "bath-gen" => bath_gen(ctx),
        "cce-run" => cce_run(ctx),
        "noise-run" => noise_run(ctx),
        "seq-run" => seq_run(ctx),
        "qnd-sim" => qnd_sim(ctx),
        "fit" => fit(ctx),
        "bias-scan" => bias_scan(ctx),
        "oracle-check" => oracle_check(ctx),
        other => Err(Error::InvalidArgument(format!("unknown subcommand {other}"))),
    }
}

fn bath_gen(ctx: &Context) -> Result<Value> {
    let (bath, depleted_fraction) = build_bath(&ctx.config)?;
    let text = bath_to_string(&bath);
    ctx.write("bath.txt", |w| w.write_all(text.as_bytes()))?;
    Ok(json!({ "bath": bath_summary(&bath), "depleted_fraction": depleted_fraction }))
}

fn cce_run(ctx: &Context) -> Result<Value> {
    let cfg = &ctx.config;
    let central = cfg.central_model()?;
    let section = cfg.sequence.clone().unwrap_or_default();
    let seq = section.standard().build(1.0)?;
    let times = cfg.time_grid();
    let options = cfg.cce_options();
    let (mut bath, depleted_fraction) = build_bath(cfg)?;
    let curve = if section.is_nuclear() {
        let reg = cfg
            .register
            .as_ref()
            .ok_or_else(|| missing("register", "for nuclear sequences"))?;
        let index = bath.inject_register(
            reg.species.species(),
            reg.a_parallel_hz,
            reg.a_perp_hz,
            central.species.gyromagnetic_ratio,
        )?;
        nuclear_register_coherence(
            index,
            f64::from(section.electron_m_s),
            &bath,
            central.magnetic_field_t,
            &seq,
            &options,
            &times,
        )?
    } else {
        cce_total(&bath, &central, &seq, &options, &times)?
    };
    ctx.write("coherence.csv", |w| curve.write_csv(w).map_err(std::io::Error::other))?;
    let simulated = curve.one_over_e_time();
    let empirical = cfg.cce.as_ref().and_then(|c| c.empirical_decay_time_s);
    Ok(json!({
        "sequence": seq.name,
        "order": options.order,
        "bath": bath_summary(&bath),
        "depleted_fraction": depleted_fraction,
        "curve": curve_summary(&curve),
        "comparison": {
            "simulated_one_over_e_time_s": json_opt(simulated),
            "empirical_decay_time_s": json_opt(empirical),
            "empirical_over_simulated": json_opt(simulated.zip(empirical).map(|(s, e)| e / s)),
        },
    }))
}

fn noise_run(ctx: &Context) -> Result<Value> {
    let (psd, filter_kind, options) = ctx.config.noise_psd();
    psd.validate()?;
    let times = ctx.config.time_grid();
    let filter = FilterFunction::of(filter_kind);
    let nc = noise_curve(&filter, &psd, &times, &options)?;
    ctx.write("noise_coherence.csv", |w| {
        writeln!(w, "{NOISE_HEADER}")?;
        for ((t, chi), l) in times.iter().zip(&nc.chi).zip(nc.curve.abs()) {
            writeln!(w, "{},{},{}", float(*t), float(*chi), float(l))?;
        }
        Ok(())
    })?;
    Ok(json!({
        "psd": psd,
        "filter": filter_kind,
        "cutoff_low_hz": nc.cutoff_low_hz,
        "cutoff_high_hz": nc.cutoff_high_hz,
        "infrared_divergent": nc.infrared_divergent,
        "curve": curve_summary(&nc.curve),
    }))
}

/// Grid minimum of `p0` within the narrower of ±2% and ±20 steps of `tau_k`.
fn dip_near(taus: &[f64], p0: &[f64], tau_k: f64, step: f64) -> Option<(f64, f64)> {
    let half = (0.02 * tau_k).min(20.0 * step).max(step);
    taus.iter()
        .zip(p0)
        .filter(|(t, _)| (**t - tau_k).abs() <= half)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(t, p)| (*t, *p))
}

fn seq_run(ctx: &Context) -> Result<Value> {
    let cfg = &ctx.config;
    let central = cfg.central_model()?;
    let spec = cfg.spectroscopy.clone().unwrap_or_default();
    match spec.experiment {
        Experiment::Xy8Spectroscopy => {
            let reg = cfg
                .register
                .as_ref()
                .ok_or_else(|| missing("register", "for xy8_spectroscopy"))?;
            let model = RegisterModel::from_field(
                &reg.species.species(),
                central.magnetic_field_t,
                reg.a_parallel_hz,
                reg.a_perp_hz,
            );
            let steps = ((spec.tau_max_s - spec.tau_min_s) / spec.tau_step_s).round() as usize;
            let taus: Vec<f64> = (0..=steps)
                .map(|k| spec.tau_min_s + k as f64 * spec.tau_step_s)
                .collect();
            ctx.log(format!("{} tau points", taus.len()));
            let p0 = xy8_spectroscopy_with_error(&central, &model, spec.xy8_blocks, &taus, spec.angle_error_fraction)?;
            ctx.write("xy8_spectroscopy.csv", |w| {
                writeln!(w, "{SPECTROSCOPY_HEADER}")?;
                for (t, p) in taus.iter().zip(&p0) {
                    writeln!(w, "{},{}", float(*t), float(*p))?;
                }
                Ok(())
            })?;
            let mut dips = Vec::new();
            for k in 0..spec.resonance_orders {
                let tau_k = model.resonance_tau(k)?;
                if let Some((tau, p)) = dip_near(&taus, &p0, tau_k, spec.tau_step_s) {
                    dips.push((k, tau_k, tau, p));
                }
            }
            ctx.write("xy8_dips.csv", |w| {
                writeln!(w, "{DIPS_HEADER}")?;
                for (k, tau_k, tau, p) in &dips {
                    writeln!(w, "{k},{},{},{}", float(*tau_k), float(*tau), float(*p))?;
                }
                Ok(())
            })?;
            Ok(json!({
                "experiment": "xy8_spectroscopy",
                "register": { "species": reg.species.name(), "a_parallel_hz": reg.a_parallel_hz, "a_perp_hz": reg.a_perp_hz },
                "xy8_blocks": spec.xy8_blocks,
                "tau_points": taus.len(),
                "dips_in_range": dips.len(),
            }))
        }
        Experiment::QuasiStaticEnsemble => {
            if cfg.times.is_none() {
                return Err(missing("times", "for quasi_static_ensemble"));
            }
            let section = cfg.sequence.clone().unwrap_or_default();
            let seq = section.standard().build(1.0)?;
            let times = cfg.time_grid();
            let curve = quasi_static_ensemble(&central, &seq, spec.ensemble_sigma_hz, spec.ensemble_samples, &times)?;
            ctx.write("ensemble_coherence.csv", |w| {
                curve.write_csv(w).map_err(std::io::Error::other)
            })?;
            Ok(json!({
                "experiment": "quasi_static_ensemble",
                "sequence": seq.name,
                "sigma_hz": spec.ensemble_sigma_hz,
                "samples": spec.ensemble_samples,
                "curve": curve_summary(&curve),
            }))
        }
    }
}

fn qnd_sim(ctx: &Context) -> Result<Value> {
    let (params, n_shots) = ctx.config.readout_params()?;
    let trace = simulate_qnd_trace(&params, n_shots)?;
    ctx.write("trace.csv", |w| trace.write_csv(w))?;
    let hist = histograms(&trace);
    ctx.write("histogram.csv", |w| hist.write_csv(w))?;
    let threshold = optimal_threshold(&hist).ok();
    let t1 = match estimate_t1(&trace) {
        Ok(e) => json!(e),
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(json!({
        "shots": n_shots,
        "window": params.window,
        "statistics": params.statistics,
        "flips": trace.flips(),
        "threshold": threshold,
        "t1": t1,
    }))
}

fn read_series(path: &Path, sigma_default: f64) -> Result<DataSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let (y_col, sigma_col) = if header == CURVE_HEADER {
        (3, None)
    } else {
        (1, names.iter().position(|n| n.starts_with("sigma")))
    };
    if names.len() <= y_col {
        return Err(Error::Parse(format!("{}: need at least two columns", path.display())));
    }
    let (mut t, mut y, mut sigma) = (Vec::new(), Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let cell = |i: usize| -> Result<f64> {
            cells
                .get(i)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::Parse(format!("{}: row {}: bad column {}", path.display(), row + 2, i + 1)))
        };
        t.push(cell(0)?);
        y.push(cell(y_col)?);
        sigma.push(match sigma_col {
            Some(i) => cell(i)?,
            None => sigma_default,
        });
    }
    if sigma_col.is_none() && !(sigma_default > 0.0) {
        return Err(Error::Config(vec![
            "fit.sigma_default: must be > 0 when the data have no sigma column".into(),
        ]));
    }
    DataSeries::new(t, y, sigma)
}

fn fit(ctx: &Context) -> Result<Value> {
    let f = ctx.config.fit.clone().unwrap_or_default();
    let path = ctx.config_dir.join(&f.data_path);
    let data = read_series(&path, f.sigma_default)?;
    let mut extra = json!({ "points": data.len(), "data_sha256": sha256_hex(&fs::read(&path)?) });
    let report: FitReport = match f.model {
        FitModel::Stretched => fit_stretched_exp(
            &data,
            &StretchedOptions {
                fix_n: f.fix_stretch_n,
                baseline: f.baseline,
            },
        )?
        .report(),
        FitModel::Oscillation => {
            let fitted = fit_oscillation(&data)?;
            if f.window_points > 0 {
                let step = if f.window_step_points == 0 {
                    f.window_points
                } else {
                    f.window_step_points
                };
                let windows = windowed_frequencies(&data, f.window_points, step)?;
                ctx.write("windows.csv", |w| {
                    writeln!(w, "{WINDOWS_HEADER}")?;
                    for x in &windows {
                        writeln!(
                            w,
                            "{},{},{},{}",
                            float(x.t_start_s),
                            float(x.t_end_s),
                            float(x.frequency_hz),
                            float(x.sigma_frequency_hz)
                        )?;
                    }
                    Ok(())
                })?;
                extra["windows"] = json!(windows.len());
            }
            fitted.report()
        }
        FitModel::Bound => {
            let b = coherence_lower_bound(&data, f.stretch_n_assumed, f.confidence_fraction)?;
            let mut r = FitReport::default();
            r.push("t_lower", b.t_lower_s, 0.0, "s");
            r.push("stretch_n_assumed", b.stretch_n_assumed, 0.0, "1");
            r.push("confidence", b.confidence, 0.0, "1");
            r.push("critical_chi2", b.critical_chi2, 0.0, "1");
            r.push("dof", b.dof as f64, 0.0, "1");
            r.push("exceeds_ceiling", f64::from(u8::from(b.exceeds_ceiling)), 0.0, "1");
            r
        }
    };
    ctx.write("fit_report.txt", |w| w.write_all(report.to_text().as_bytes()))?;
    ctx.write("fit_report.json", |w| w.write_all(report.to_json().as_bytes()))?;
    extra["model"] = json!(f.model);
    Ok(extra)
}

fn bias_scan(ctx: &Context) -> Result<Value> {
    let cfg = &ctx.config;
    let scan = cfg.bias_scan.clone().unwrap_or_default();
    let central = cfg.central_model()?;
    let options = cfg.cce_options();
    let (constants, extent) = cfg.lattice_constants();
    let sites = generate_lattice(extent, &constants)?;
    let bath = sample_bath(&sites, &cfg.bath_config())?;
    let (model, _) = cfg.depletion_model();
    model.validate()?;
    let ramsey = StandardSequence::Ramsey { detuning_hz: 0.0 }.build(1.0)?;
    let hahn = StandardSequence::Hahn.build(1.0)?;
    let ramsey_times = grid(0.0, scan.ramsey_t_max_s, scan.points, Spacing::Linear);
    let hahn_times = grid(0.0, scan.hahn_t_max_s, scan.points, Spacing::Linear);
    let mut rows = Vec::new();
    let mut clamps = 0;
    for &bias in &scan.bias_v {
        let depleted = apply_depletion(&bath, bias, &model)?;
        let r = cce_total(&depleted, &central, &ramsey, &options, &ramsey_times)?;
        let h = cce_total(&depleted, &central, &hahn, &options, &hahn_times)?;
        clamps += r.clamp_count + h.clamp_count;
        ctx.log(format!(
            "bias {bias} V: {} active paramagnetic",
            depleted.active_paramagnetic_count()
        ));
        rows.push((
            bias,
            model.probability(bias),
            depleted.active_paramagnetic_count(),
            r.one_over_e_time(),
            h.one_over_e_time(),
        ));
    }
    ctx.write("bias_scan.csv", |w| {
        writeln!(w, "{BIAS_SCAN_HEADER}")?;
        for (bias, frac, count, t2s, t2) in &rows {
            writeln!(
                w,
                "{},{},{count},{},{}",
                float(*bias),
                float(*frac),
                opt_float(*t2s),
                opt_float(*t2)
            )?;
        }
        Ok(())
    })?;
    Ok(json!({
        "bath": bath_summary(&bath),
        "biases": scan.bias_v.len(),
        "clamp_count": clamps,
        "order": options.order,
    }))
}

fn oracle_check(ctx: &Context) -> Result<Value> {
    let n = ctx.config.oracle_check.clone().unwrap_or_default().random_baths;
    let rows = run_oracles(ctx.config.seed, n)?;
    ctx.write("oracle_check.csv", |w| {
        writeln!(w, "{ORACLE_HEADER}")?;
        for r in &rows {
            writeln!(w, "{},{},{},{}", r.check, float(r.value), float(r.tolerance), r.pass())?;
        }
        Ok(())
    })?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass()).map(|r| r.check.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::Numerical(format!("oracle checks failed: {}", failed.join(", "))));
    }
    Ok(json!({ "checks": rows.len(), "failed": 0 }))
}
