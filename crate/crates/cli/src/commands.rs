use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qks_core::coalgebra::{coproduct_pm_deformed, coproduct_z};
use qks_core::curie::{
    curie_analytic, curie_equal_maxima, curie_fit_reference, curie_limit, curie_susceptibility, CurieEstimate,
    CurieMethod, Diagnostics,
};
use qks_core::hamiltonian::{build_qks_coalgebra, build_qks_verified, dump_matrix, DumpFormat, DEFAULT_SIZE_CAP};
use qks_core::qcg::couple_all;
use qks_core::spectrum::{
    analytic_levels, block_energy, density_of_states, diagonalize_oracle, expand_multiset, spectrum_deviation,
    HistogramBin, SpectrumLine,
};
use qks_core::thermo::{LevelWeights, ThermoModel, ThermoPoint};
use qks_core::{HalfInt, ModelConfig, Scaling};
use serde::{Deserialize, Serialize};

use crate::args::{CurieMethodArg, DumpFormatArg, Format, ModelArgs, ScalingArg, TemperatureArgs};
use crate::error::CliError;
use crate::table::{emit, real, Row};

/// Tolerance for `--verify` and the `verify` subcommand.
const VERIFY_TOL: f64 = 1e-9;

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Validation(format!("--{name} must be finite, got {x}")))
    }
}

fn half(s: &str) -> Result<HalfInt, CliError> {
    let j: HalfInt = s.parse()?;
    if j.twice() < 0 {
        return Err(CliError::Validation(format!("spin must be non-negative, got {s}")));
    }
    Ok(j)
}

pub fn eta_of(args: &ModelArgs) -> Result<f64, CliError> {
    match (args.eta, args.q) {
        (Some(eta), None) => finite("eta", eta),
        (None, Some(q)) => {
            if !(q > 0.0) || !q.is_finite() {
                return Err(CliError::Validation(format!("--q must be positive and finite, got {q}")));
            }
            Ok(q.ln())
        }
        (None, None) => Ok(0.0),
        (Some(_), Some(_)) => Err(CliError::Validation("give either --eta or --q, not both".into())),
    }
}

pub fn model(args: &ModelArgs, eta: f64, default_scaling: Scaling) -> Result<ModelConfig, CliError> {
    let spins = match &args.spins {
        Some(list) => list.iter().map(|s| half(s)).collect::<Result<Vec<_>, _>>()?,
        None => {
            let n = args.n.ok_or_else(|| CliError::Validation("--N (or --spins) is required".into()))?;
            if n == 0 {
                return Err(CliError::Validation("--N must be at least 1".into()));
            }
            vec![half(&args.j)?; n as usize]
        }
    };
    let mut cfg = ModelConfig::mixed(spins)
        .with_eta(eta)
        .with_coupling(finite("I", args.coupling)?)
        .with_field(finite("h", args.field)?)
        .with_gamma(finite("gamma", args.gamma)?)
        .with_scaling(match args.scaling {
            Some(ScalingArg::Raw) => Scaling::Raw,
            Some(ScalingArg::Thermodynamic) => Scaling::Thermodynamic,
            None => default_scaling,
        });
    cfg.k_b = finite("kB", args.k_b)?;
    if let Some(cap) = args.size_cap {
        if cap > DEFAULT_SIZE_CAP && !args.confirm {
            return Err(CliError::Validation(format!(
                "size cap {cap} exceeds the default {DEFAULT_SIZE_CAP}; pass --confirm to allow it"
            )));
        }
        cfg = cfg.with_size_cap(cap);
    }
    cfg.validate()?;
    Ok(cfg)
}

impl Row for SpectrumLine {
    fn headers() -> &'static [&'static str] {
        &["J", "p", "multiplicity", "ln_multiplicity", "m", "E", "E_corr"]
    }

    fn cells(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.j.to_string(),
            self.p.to_string(),
            self.multiplicity.exact().map(|d| d.to_string()).unwrap_or_default(),
            real(self.multiplicity.ln()),
            self.m.map(|m| m.to_string()).unwrap_or_default(),
            real(self.energy),
            real(self.energy_corr),
        ]]
    }
}

pub fn spectrum(
    args: &ModelArgs,
    verify: bool,
    dump: Option<&Path>,
    dump_format: DumpFormatArg,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = model(args, eta_of(args)?, Scaling::Raw)?;
    let lines = analytic_levels(&cfg)?;
    if verify {
        let (h, route) = build_qks_verified(&cfg)?;
        let oracle = diagonalize_oracle(&h)?;
        let dev = spectrum_deviation(&oracle, &expand_multiset(&lines)?)?;
        eprintln!("route deviation: {route:.3e}");
        eprintln!("max spectrum deviation: {dev:.3e}");
        if dev > VERIFY_TOL {
            return Err(CliError::Failure(format!("spectrum deviation {dev:e} exceeds {VERIFY_TOL:e}")));
        }
    }
    if let Some(path) = dump {
        let h = build_qks_coalgebra(&cfg)?;
        let mut w = BufWriter::new(File::create(path)?);
        let f = match dump_format {
            DumpFormatArg::Text => DumpFormat::Text,
            DumpFormatArg::Binary => DumpFormat::Binary,
        };
        dump_matrix(&h, f, &mut w)?;
        w.flush()?;
    }
    emit(&lines, &lines, format, out)
}

impl Row for HistogramBin {
    fn headers() -> &'static [&'static str] {
        &["lower", "upper", "center", "log_weight", "weight", "fraction"]
    }

    fn cells(&self) -> Vec<Vec<String>> {
        vec![vec![
            real(self.lower),
            real(self.upper),
            real(self.center),
            self.log_weight.map(real).unwrap_or_default(),
            real(self.weight),
            real(self.fraction),
        ]]
    }
}

pub fn dos(args: &ModelArgs, bins: usize, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = model(args, eta_of(args)?, Scaling::Raw)?;
    let hist = density_of_states(&analytic_levels(&cfg)?, bins)?;
    emit(&hist, &hist, format, out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub basis: String,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    #[serde(rename = "J")]
    pub j: HalfInt,
    pub copy: usize,
    pub m: HalfInt,
    pub path: Vec<HalfInt>,
    #[serde(rename = "E")]
    pub energy: f64,
    pub amplitudes: Vec<Amplitude>,
}

impl Row for StateRow {
    fn headers() -> &'static [&'static str] {
        &["J", "copy", "m", "path", "E", "basis", "amplitude"]
    }

    fn cells(&self) -> Vec<Vec<String>> {
        let path: Vec<String> = self.path.iter().map(HalfInt::to_string).collect();
        self.amplitudes
            .iter()
            .map(|a| {
                vec![
                    self.j.to_string(),
                    self.copy.to_string(),
                    self.m.to_string(),
                    path.join(";"),
                    real(self.energy),
                    a.basis.clone(),
                    real(a.amplitude),
                ]
            })
            .collect()
    }
}

pub fn states(
    args: &ModelArgs,
    total_spin: Option<&str>,
    m: Option<&str>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = model(args, eta_of(args)?, Scaling::Raw)?;
    let want_j = total_spin.map(half).transpose()?;
    let want_m = m.map(|s| s.parse::<HalfInt>()).transpose()?;
    let layout = cfg.layout()?;
    let d = cfg.deformation()?;
    let t = couple_all(&layout, d, cfg.size_cap)?;
    let k_q = cfg.casimir_constant()?;
    let gh = cfg.gamma * cfg.field;
    let mut rows = Vec::new();
    for (k, label) in t.block_labels.iter().enumerate() {
        if want_j.is_some_and(|j| j != label.j) || want_m.is_some_and(|m| m != label.m) {
            continue;
        }
        let amplitudes = t
            .column(k)
            .into_iter()
            .enumerate()
            .filter(|(_, a)| *a != 0.0)
            .map(|(r, a)| Amplitude { basis: layout.basis_label(r), amplitude: a })
            .collect();
        rows.push(StateRow {
            j: label.j,
            copy: label.copy,
            m: label.m,
            path: label.path.clone(),
            energy: block_energy(label.j, cfg.effective_coupling(), d, k_q) - gh * label.m.value(),
            amplitudes,
        });
    }
    emit(&rows, &rows, format, out)
}

impl Row for ThermoPoint {
    fn headers() -> &'static [&'static str] {
        &["T", "log_Z", "F", "C_V", "chi", "M"]
    }

    fn cells(&self) -> Vec<Vec<String>> {
        vec![[self.t, self.log_z, self.free_energy, self.specific_heat, self.susceptibility, self.magnetization]
            .into_iter()
            .map(real)
            .collect()]
    }
}

fn temperature_grid(t: &TemperatureArgs) -> Result<Vec<f64>, CliError> {
    let grid = match &t.temperatures {
        Some(list) => list.clone(),
        None => {
            if t.t_steps < 2 {
                return Err(CliError::Validation("--t-steps must be at least 2".into()));
            }
            if !(t.t_min < t.t_max) {
                return Err(CliError::Validation("--t-min must be below --t-max".into()));
            }
            let n = t.t_steps - 1;
            (0..=n).map(|k| t.t_min + (t.t_max - t.t_min) * k as f64 / n as f64).collect()
        }
    };
    if let Some(bad) = grid.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(CliError::Validation(format!("temperatures must be positive, got {bad}")));
    }
    Ok(grid)
}

pub fn thermo(args: &ModelArgs, temps: &TemperatureArgs, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = model(args, eta_of(args)?, Scaling::Raw)?;
    let grid = temperature_grid(temps)?;
    let points = ThermoModel::new(&cfg)?.sweep(&grid)?;
    emit(&points, &points, format, out)
}

struct WeightRows(LevelWeights);

impl Row for WeightRows {
    fn headers() -> &'static [&'static str] {
        &["T", "p", "J", "E_p", "log_z", "weight"]
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.0
            .levels
            .iter()
            .map(|l| {
                vec![real(self.0.t), l.p.to_string(), l.j.to_string(), real(l.energy), real(l.log_z), real(l.weight)]
            })
            .collect()
    }
}

pub fn weights(args: &ModelArgs, t: f64, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = model(args, eta_of(args)?, Scaling::Raw)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(CliError::Validation(format!("--T must be positive, got {t}")));
    }
    let w = ThermoModel::new(&cfg)?.weights(t)?;
    let json = w.clone();
    emit(&[WeightRows(w)], &json, format, out)
}

impl Row for CurieEstimate {
    fn headers() -> &'static [&'static str] {
        &["eta", "N", "method", "T_C", "regime", "bracket_lo", "bracket_hi", "iterations", "residual"]
    }

    fn cells(&self) -> Vec<Vec<String>> {
        let tag = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
        let (lo, hi) = self.diagnostics.bracket.map_or((String::new(), String::new()), |(a, b)| (real(a), real(b)));
        vec![vec![
            real(self.eta),
            self.n_sites.to_string(),
            tag(serde_json::to_value(self.method).unwrap()),
            real(self.t_c),
            self.regime.map(|r| tag(serde_json::to_value(r).unwrap())).unwrap_or_default(),
            lo,
            hi,
            self.diagnostics.iterations.to_string(),
            real(self.diagnostics.residual),
        ]]
    }
}

fn formula(eta: f64, n: usize, method: CurieMethod, t_c: f64) -> CurieEstimate {
    CurieEstimate { eta, n_sites: n, method, t_c, regime: None, diagnostics: Diagnostics::default() }
}

pub fn curie(
    args: &ModelArgs,
    method: CurieMethodArg,
    etas: Option<&[f64]>,
    bracket: (f64, f64),
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let etas = match etas {
        Some(list) => list.iter().map(|&e| finite("etas", e)).collect::<Result<Vec<_>, _>>()?,
        None => vec![eta_of(args)?],
    };
    let n_required = || args.n.ok_or_else(|| CliError::Validation("--N is required for this method".into()));
    let mut rows = Vec::with_capacity(etas.len());
    for eta in etas {
        let est = match method {
            CurieMethodArg::Susceptibility => {
                curie_susceptibility(&model(args, eta, Scaling::Thermodynamic)?, bracket)?
            }
            CurieMethodArg::EqualMaxima => curie_equal_maxima(&model(args, eta, Scaling::Thermodynamic)?, bracket)?,
            CurieMethodArg::Analytic => {
                let n = n_required()?;
                let t = curie_analytic(n, eta, finite("I", args.coupling)?)? / finite("kB", args.k_b)?;
                formula(eta, n as usize, CurieMethod::AnalyticFormula, t)
            }
            // N = 0 marks the infinite-size limit
            CurieMethodArg::Limit => formula(eta, 0, CurieMethod::LimitFormula, curie_limit(eta)?),
            CurieMethodArg::Fit => formula(eta, 0, CurieMethod::FitReference, curie_fit_reference(eta)?),
        };
        rows.push(est);
    }
    emit(&rows, &rows, format, out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Row for Check {
    fn headers() -> &'static [&'static str] {
        &["check", "value", "tolerance", "pass"]
    }

    fn cells(&self) -> Vec<Vec<String>> {
        vec![vec![self.check.clone(), real(self.value), real(self.tolerance), self.pass.to_string()]]
    }
}

pub fn verify(args: &ModelArgs, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = model(args, eta_of(args)?, Scaling::Raw)?;
    let layout = cfg.layout()?;
    layout.check_cap(cfg.size_cap)?;
    let (h, route) = build_qks_verified(&cfg)?;
    let scale = h.max_abs().max(1.0);
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, tolerance: f64| {
        checks.push(Check { check: name.into(), value, tolerance, pass: value <= tolerance });
    };
    push("route_deviation", route, 1e-10);
    push("hermitian_defect", h.hermitian_defect() / scale, 1e-12);
    push("commutator_Lz", h.commutator(&coproduct_z(&layout)).max_abs() / scale, 1e-10);
    if cfg.field == 0.0 {
        let (plus, minus) = coproduct_pm_deformed(&layout, cfg.deformation()?)?;
        let s = scale * plus.max_abs().max(1.0);
        push("commutator_Lplus", h.commutator(&plus).max_abs() / s, 1e-10);
        push("commutator_Lminus", h.commutator(&minus).max_abs() / s, 1e-10);
    }
    let oracle = diagonalize_oracle(&h)?;
    let analytic = expand_multiset(&analytic_levels(&cfg)?)?;
    push("spectrum_deviation", spectrum_deviation(&oracle, &analytic)?, VERIFY_TOL);
    emit(&checks, &checks, format, out)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("failed checks: {}", failed.join(", "))))
    }
}
