//! Row types and deterministic CSV / JSON rendering.

use std::fmt::Write as _;

use serde::Serialize;

use crate::models::{Provenance, SpectralModel};
use crate::specfun::ToleranceConfig;
use crate::spectral::{spectral_boltzmann_rhs, SpectralAnalysis, IDENTITY_TOL, NORMALIZATION_TOL};
use crate::thermo::{BoundReport, ThermalStatistics, BOUND_REL_TOL};

use super::config::RunConfig;

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Row flags. Gating flags make `verify` exit with status 2; the others are
/// informational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Top Boltzmann weight above the truncation warning level.
    Truncated,
    HeisenbergViolated,
    BoltzmannViolated,
    MomentumViolated,
    /// Same bounds evaluated with the kinetic-energy momentum spread.
    BoltzmannKineticViolated,
    MomentumKineticViolated,
    DetailedBalance,
    Moment1,
    Moment2,
    /// First-moment sum rule off in a representation where it is exact.
    SumRule,
    /// First-moment sum rule off because the basis is a truncation of an
    /// infinite one.
    SumRuleTail,
    /// The spectral route to the Boltzmann bound differs from the direct one.
    CrossPath,
    Jensen,
}

impl Flag {
    pub fn gating(self) -> bool {
        !matches!(
            self,
            Flag::Truncated
                | Flag::BoltzmannKineticViolated
                | Flag::MomentumKineticViolated
                | Flag::SumRuleTail
                | Flag::CrossPath
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Flag::Truncated => "truncated",
            Flag::HeisenbergViolated => "heisenberg_violated",
            Flag::BoltzmannViolated => "boltzmann_violated",
            Flag::MomentumViolated => "momentum_violated",
            Flag::BoltzmannKineticViolated => "boltzmann_kinetic_violated",
            Flag::MomentumKineticViolated => "momentum_kinetic_violated",
            Flag::DetailedBalance => "detailed_balance",
            Flag::Moment1 => "moment1",
            Flag::Moment2 => "moment2",
            Flag::SumRule => "sum_rule",
            Flag::SumRuleTail => "sum_rule_tail",
            Flag::CrossPath => "cross_path",
            Flag::Jensen => "jensen",
        }
    }
}

/// One temperature of a `verify` run. Unsuffixed momentum columns use the
/// current (commutator) momentum spread; `_kinetic` columns the kinetic one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub beta: f64,
    pub delta_x: f64,
    pub delta_p_kinetic: f64,
    pub delta_p_current: f64,
    pub lambda_th: f64,
    pub r: f64,
    pub z: f64,
    pub gamma: f64,
    pub product_lhs: f64,
    pub boltzmann_rhs: f64,
    pub momentum_lhs: f64,
    pub momentum_rhs: f64,
    pub sat_product: f64,
    pub sat_momentum: f64,
    pub db_residual: f64,
    pub moment1_residual: f64,
    pub moment2_residual: f64,
    pub jensen_slack: f64,
    pub sat_product_kinetic: f64,
    pub sat_momentum_kinetic: f64,
    pub jensen_relative_slack: f64,
    pub trk_residual: f64,
    pub trk_basis_residual: f64,
    pub sum_rule2_residual: f64,
    pub cross_path_residual: f64,
    pub top_weight: f64,
    pub flags: Vec<Flag>,
}

pub const VERIFY_COLUMNS: [&str; 28] = [
    "T",
    "beta",
    "delta_x",
    "delta_p_kinetic",
    "delta_p_current",
    "lambda_th",
    "r",
    "z",
    "gamma",
    "product_lhs",
    "boltzmann_rhs",
    "momentum_lhs",
    "momentum_rhs",
    "sat_product",
    "sat_momentum",
    "db_residual",
    "moment1_residual",
    "moment2_residual",
    "jensen_slack",
    "sat_product_kinetic",
    "sat_momentum_kinetic",
    "jensen_relative_slack",
    "trk_residual",
    "trk_basis_residual",
    "sum_rule2_residual",
    "cross_path_residual",
    "top_weight",
    "flags",
];

/// Whether the first-moment sum rule is exact in the model's own
/// representation, so that a residual signals a defect rather than a
/// truncation tail.
pub fn sum_rule_is_exact(model: &SpectralModel) -> bool {
    match model.provenance {
        // ladder operators couple neighbours only; the top level's weight is
        // tracked separately by the truncation flag
        Provenance::AnalyticHarmonic { .. } => true,
        Provenance::Grid(_) => true,
        Provenance::AnalyticBox { .. } => false,
    }
}

impl VerifyRow {
    pub fn new(
        model: &SpectralModel,
        stats: &ThermalStatistics,
        bounds: &BoundReport,
        analysis: &SpectralAnalysis,
    ) -> Self {
        let m = &analysis.moments;
        let spectral_route = spectral_boltzmann_rhs(&analysis.jensen, model.mass, stats.delta_x);
        let cross_path_residual = (spectral_route - bounds.boltzmann_rhs).abs() / bounds.boltzmann_rhs;
        let mut flags = Vec::new();
        let mut flag = |cond: bool, f: Flag| {
            if cond {
                flags.push(f);
            }
        };
        flag(stats.truncated, Flag::Truncated);
        flag(!bounds.holds_heisenberg, Flag::HeisenbergViolated);
        flag(!bounds.holds_boltzmann, Flag::BoltzmannViolated);
        flag(!bounds.holds_momentum, Flag::MomentumViolated);
        flag(!bounds.holds_boltzmann_kinetic, Flag::BoltzmannKineticViolated);
        flag(!bounds.holds_momentum_kinetic, Flag::MomentumKineticViolated);
        flag(!(analysis.balance.max_residual <= IDENTITY_TOL), Flag::DetailedBalance);
        flag(!(m.first_moment_residual <= IDENTITY_TOL), Flag::Moment1);
        flag(!(m.second_moment_residual <= IDENTITY_TOL), Flag::Moment2);
        let sum_rule_ok = m.trk_basis_residual <= IDENTITY_TOL && m.second_sum_rule_residual <= IDENTITY_TOL;
        if sum_rule_is_exact(model) {
            flag(!sum_rule_ok, Flag::SumRule);
        } else {
            flag(!sum_rule_ok, Flag::SumRuleTail);
        }
        flag(!(cross_path_residual <= IDENTITY_TOL), Flag::CrossPath);
        flag(!analysis.jensen.holds(), Flag::Jensen);
        VerifyRow {
            temperature: stats.temperature,
            beta: stats.beta,
            delta_x: stats.delta_x,
            delta_p_kinetic: stats.delta_p_kinetic,
            delta_p_current: stats.delta_p_current,
            lambda_th: stats.lambda_th,
            r: stats.ratio_r,
            z: stats.z_arg,
            gamma: bounds.gamma,
            product_lhs: bounds.product_lhs,
            boltzmann_rhs: bounds.boltzmann_rhs,
            momentum_lhs: bounds.momentum_lhs,
            momentum_rhs: bounds.momentum_rhs,
            sat_product: bounds.saturation_product,
            sat_momentum: bounds.saturation_momentum,
            db_residual: analysis.balance.max_residual,
            moment1_residual: m.first_moment_residual,
            moment2_residual: m.second_moment_residual,
            jensen_slack: analysis.jensen.slack,
            sat_product_kinetic: bounds.saturation_product_kinetic,
            sat_momentum_kinetic: bounds.saturation_momentum_kinetic,
            jensen_relative_slack: analysis.jensen.relative_slack,
            trk_residual: m.trk_residual,
            trk_basis_residual: m.trk_basis_residual,
            sum_rule2_residual: m.second_sum_rule_residual,
            cross_path_residual,
            top_weight: stats.top_weight,
            flags,
        }
    }

    pub fn passes(&self) -> bool {
        self.flags.iter().all(|f| !f.gating())
    }

    fn numbers(&self) -> [f64; 27] {
        [
            self.temperature,
            self.beta,
            self.delta_x,
            self.delta_p_kinetic,
            self.delta_p_current,
            self.lambda_th,
            self.r,
            self.z,
            self.gamma,
            self.product_lhs,
            self.boltzmann_rhs,
            self.momentum_lhs,
            self.momentum_rhs,
            self.sat_product,
            self.sat_momentum,
            self.db_residual,
            self.moment1_residual,
            self.moment2_residual,
            self.jensen_slack,
            self.sat_product_kinetic,
            self.sat_momentum_kinetic,
            self.jensen_relative_slack,
            self.trk_residual,
            self.trk_basis_residual,
            self.sum_rule2_residual,
            self.cross_path_residual,
            self.top_weight,
        ]
    }

    pub fn flags_field(&self) -> String {
        if self.flags.is_empty() {
            "ok".to_string()
        } else {
            self.flags.iter().map(|f| f.name()).collect::<Vec<_>>().join(";")
        }
    }
}

/// Run-level metadata placed in front of every report.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub config: RunConfig,
    pub n_levels: usize,
    pub provenance: Provenance,
    pub tolerances: ToleranceEcho,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceEcho {
    pub specfun: ToleranceConfig,
    pub bound_rel_tol: f64,
    pub identity_tol: f64,
    pub normalization_tol: f64,
    pub omega_tolerance: f64,
}

impl Metadata {
    pub fn new(
        command: &'static str,
        config: &RunConfig,
        model: &SpectralModel,
        omega_tolerance: f64,
        timestamp: bool,
    ) -> Self {
        let timestamp_unix = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Metadata {
            tool: "thermobound",
            version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp_unix,
            config: config.clone(),
            n_levels: model.n_levels(),
            provenance: model.provenance,
            tolerances: ToleranceEcho {
                specfun: config.tolerances,
                bound_rel_tol: BOUND_REL_TOL,
                identity_tol: IDENTITY_TOL,
                normalization_tol: NORMALIZATION_TOL,
                omega_tolerance,
            },
        }
    }

    /// `#`-prefixed preamble for CSV output.
    fn csv_preamble(&self) -> String {
        let mut out = format!("# {} {} {}\n", self.tool, self.version, self.command);
        if let Some(ts) = self.timestamp_unix {
            let _ = writeln!(out, "# timestamp_unix={ts}");
        }
        let _ = writeln!(out, "# n_levels={}", self.n_levels);
        out
    }
}

pub fn verify_csv(meta: &Metadata, rows: &[VerifyRow]) -> String {
    let mut out = meta.csv_preamble();
    out.push_str(&VERIFY_COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        for v in row.numbers() {
            out.push_str(&fmt_f64(v));
            out.push(',');
        }
        out.push_str(&row.flags_field());
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    metadata: &'a Metadata,
    rows: &'a [VerifyRow],
}

pub fn verify_json(meta: &Metadata, rows: &[VerifyRow]) -> String {
    let mut text = serde_json::to_string_pretty(&VerifyJson { metadata: meta, rows }).expect("serializable");
    text.push('\n');
    text
}

/// One line of the spectral-measure dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub omega: f64,
    pub mass_p: f64,
    /// Absent for `omega < 0`, where `Q` is not defined.
    pub mass_q: Option<f64>,
    /// Absent for the zero atom and for pairs too light to compare.
    pub db_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub temperature: f64,
    pub total_p: f64,
    pub total_q: f64,
    pub zero_atom_mass: f64,
    pub mean_omega_p: f64,
    pub second_omega_p: f64,
    pub mean_g_q: f64,
    pub second_omega_q: f64,
    pub moment1_residual: f64,
    pub moment2_residual: f64,
    pub trk_residual: f64,
    pub trk_basis_residual: f64,
    pub sum_rule2_residual: f64,
    pub db_max_residual: f64,
    pub jensen_lhs: f64,
    pub jensen_rhs: f64,
    pub jensen_slack: f64,
}

impl SpectrumSummary {
    fn entries(&self) -> [(&'static str, f64); 17] {
        [
            ("temperature", self.temperature),
            ("total_p", self.total_p),
            ("total_q", self.total_q),
            ("zero_atom_mass", self.zero_atom_mass),
            ("mean_omega_p", self.mean_omega_p),
            ("second_omega_p", self.second_omega_p),
            ("mean_g_q", self.mean_g_q),
            ("second_omega_q", self.second_omega_q),
            ("moment1_residual", self.moment1_residual),
            ("moment2_residual", self.moment2_residual),
            ("trk_residual", self.trk_residual),
            ("trk_basis_residual", self.trk_basis_residual),
            ("sum_rule2_residual", self.sum_rule2_residual),
            ("db_max_residual", self.db_max_residual),
            ("jensen_lhs", self.jensen_lhs),
            ("jensen_rhs", self.jensen_rhs),
            ("jensen_slack", self.jensen_slack),
        ]
    }
}

pub fn spectrum_rows(analysis: &SpectralAnalysis) -> Vec<SpectrumRow> {
    let measure = &analysis.measure;
    let mut rows = Vec::with_capacity(measure.atoms.len() + 1);
    let split = measure.atoms.partition_point(|a| a.omega < 0.0);
    let row = |i: usize| {
        let a = measure.atoms[i];
        SpectrumRow {
            omega: a.omega,
            mass_p: a.mass,
            mass_q: (a.omega > 0.0).then(|| (1.0 + (-measure.reduced(a.omega)).exp()) * a.mass),
            db_residual: analysis.balance.atom_residuals[i],
        }
    };
    rows.extend((0..split).map(row));
    if measure.zero_atom_mass > 0.0 {
        rows.push(SpectrumRow {
            omega: 0.0,
            mass_p: measure.zero_atom_mass,
            mass_q: Some(measure.zero_atom_mass),
            db_residual: None,
        });
    }
    rows.extend((split..measure.atoms.len()).map(row));
    rows
}

pub fn spectrum_summary(temperature: f64, analysis: &SpectralAnalysis) -> SpectrumSummary {
    let m = &analysis.moments;
    SpectrumSummary {
        temperature,
        total_p: m.total_p,
        total_q: m.total_q,
        zero_atom_mass: analysis.measure.zero_atom_mass,
        mean_omega_p: m.mean_omega_p,
        second_omega_p: m.second_omega_p,
        mean_g_q: m.mean_g_q,
        second_omega_q: m.second_omega_q,
        moment1_residual: m.first_moment_residual,
        moment2_residual: m.second_moment_residual,
        trk_residual: m.trk_residual,
        trk_basis_residual: m.trk_basis_residual,
        sum_rule2_residual: m.second_sum_rule_residual,
        db_max_residual: analysis.balance.max_residual,
        jensen_lhs: analysis.jensen.lhs,
        jensen_rhs: analysis.jensen.rhs,
        jensen_slack: analysis.jensen.slack,
    }
}

pub fn spectrum_csv(meta: &Metadata, rows: &[SpectrumRow], summary: &SpectrumSummary) -> String {
    let mut out = meta.csv_preamble();
    out.push_str("omega,mass_p,mass_q,db_residual\n");
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.omega),
            fmt_f64(r.mass_p),
            opt(r.mass_q),
            opt(r.db_residual)
        );
    }
    for (name, value) in summary.entries() {
        let _ = writeln!(out, "# {name},{}", fmt_f64(value));
    }
    out
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    metadata: &'a Metadata,
    atoms: &'a [SpectrumRow],
    summary: &'a SpectrumSummary,
}

pub fn spectrum_json(meta: &Metadata, rows: &[SpectrumRow], summary: &SpectrumSummary) -> String {
    let mut text = serde_json::to_string_pretty(&SpectrumJson {
        metadata: meta,
        atoms: rows,
        summary,
    })
    .expect("serializable");
    text.push('\n');
    text
}
