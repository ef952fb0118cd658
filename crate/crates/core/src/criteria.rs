//! Closed-form sufficient conditions at the pole `t = 1`.
//!
//! Dimension 4: `2ρ⁴(1) > 3 (∫₀¹ ρ³)(ρ(1) + ρ'(1))`.
//! Dimension 6, with `r = ρ⁵`, `h(1) = ∫₀¹ (1-t²) r` and `k(1) = ∫₀¹ t² r`:
//! `h²(1)(5r(1) + r'(1)) + 24k³(1) < 12 h(1) k(1) r(1)`, which for flat-top
//! bodies reduces to `2k²(1) < h(1) r(1)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculus::{integrate_n, Tolerances};
use crate::error::{Error, Result};
use crate::profile::json::ProfileDoc;
use crate::profile::{JetFunction, RadialProfile, Side};
use crate::Verdict;

/// Relative band around zero inside which a margin is not trusted.
pub const DEFAULT_STRICT_REL: f64 = 1e-9;
/// Relative tolerance of the flat-top test `|ρ(1) + ρ'(1)| ≤ tol·max(1, ρ(1))`.
pub const DEFAULT_FLAT_TOL: f64 = 1e-9;
/// Breakpoints closer than this to `t = 1` count as sitting at the pole.
pub const POLE_WINDOW: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Prop1,
    Prop4,
    Cor6,
}

impl Criterion {
    pub fn dimension(self) -> usize {
        match self {
            Criterion::Prop1 => 4,
            Criterion::Prop4 | Criterion::Cor6 => 6,
        }
    }

    /// The general criterion for a dimension.
    pub fn for_dimension(n: usize) -> Result<Self> {
        match n {
            4 => Ok(Criterion::Prop1),
            6 => Ok(Criterion::Prop4),
            _ => Err(Error::Dimension(n)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Prop1 => "prop1",
            Criterion::Prop4 => "prop4",
            Criterion::Cor6 => "cor6",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prop1" => Ok(Criterion::Prop1),
            "prop4" => Ok(Criterion::Prop4),
            "cor6" => Ok(Criterion::Cor6),
            other => Err(Error::InvalidParam(format!("unknown criterion `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaConfig {
    pub quadrature: Tolerances,
    pub strict_rel: f64,
    pub flat_tol: f64,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        Self { quadrature: Tolerances::default(), strict_rel: DEFAULT_STRICT_REL, flat_tol: DEFAULT_FLAT_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub dimension: usize,
    pub profile: ProfileDoc,
    pub intermediates: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the inequality holds.
    pub margin: f64,
    pub borderline: bool,
    pub verdict: Verdict,
}

impl CriterionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn satisfied(&self) -> bool {
        self.verdict == Verdict::NotPolarZonoid
    }
}

fn report(
    criterion: Criterion,
    profile: &RadialProfile,
    intermediates: Vec<(&str, f64)>,
    lhs: f64,
    rhs: f64,
    margin: f64,
    config: &CriteriaConfig,
) -> CriterionReport {
    let band = config.strict_rel * lhs.abs().max(rhs.abs());
    let (verdict, borderline) =
        if margin > band { (Verdict::NotPolarZonoid, false) } else { (Verdict::Inconclusive, margin.abs() <= band) };
    CriterionReport {
        criterion,
        dimension: criterion.dimension(),
        profile: ProfileDoc::from(profile),
        intermediates: intermediates.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        lhs,
        rhs,
        margin,
        borderline,
        verdict,
    }
}

/// `[ρ(1), ρ'(1)]` from the left.
fn pole_jet(profile: &RadialProfile) -> Vec<f64> {
    profile.eval_jet(1.0, 1, Side::Left).expect("t = 1 is always in the domain")
}

/// Rejects profiles with a finite-jet failure or a non-C² breakpoint at the
/// pole. Only `ρ(1)` and `ρ'(1)` enter the criteria; `ρ''` in the variable
/// `t` may blow up at `t = 1` even for bodies that are C² there.
pub fn check_pole_smoothness(profile: &RadialProfile) -> Result<()> {
    let d = pole_jet(profile);
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::Smoothness(format!("profile has no finite first-order jet at t = 1 (got {d:?})")));
    }
    for bp in profile.breakpoint_info() {
        if 1.0 - bp.t <= POLE_WINDOW && bp.class.smooth_order() < 2 {
            return Err(Error::Smoothness(format!(
                "breakpoint of class {:?} at t = {} next to the pole",
                bp.class, bp.t
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatTop {
    /// `ρ(1) + ρ'(1)`.
    pub value: f64,
    pub flat: bool,
}

pub fn flat_top_check(profile: &RadialProfile) -> FlatTop {
    flat_top_check_with(profile, DEFAULT_FLAT_TOL)
}

pub fn flat_top_check_with(profile: &RadialProfile, tol: f64) -> FlatTop {
    let d = pole_jet(profile);
    let value = d[0] + d[1];
    FlatTop { value, flat: value.abs() <= tol * d[0].abs().max(1.0) }
}

/// Second derivative at the pole of the boundary written as a graph over the
/// equatorial hyperplane: `-(ρ(1) + ρ'(1)) / ρ(1)²`.
pub fn flatness_curvature(profile: &RadialProfile) -> f64 {
    let d = pole_jet(profile);
    -(d[0] + d[1]) / (d[0] * d[0])
}

fn integrals<const N: usize>(
    profile: &RadialProfile,
    f: impl Fn(f64, f64) -> [f64; N],
    tol: Tolerances,
) -> Result<[f64; N]> {
    Ok(integrate_n(|t| f(t, profile.eval(t)), 0.0, 1.0, &profile.breakpoints(), tol)?.value)
}

pub fn prop1_check(profile: &RadialProfile) -> Result<CriterionReport> {
    prop1_check_with(profile, &CriteriaConfig::default())
}

pub fn prop1_check_with(profile: &RadialProfile, config: &CriteriaConfig) -> Result<CriterionReport> {
    check_pole_smoothness(profile)?;
    let d = pole_jet(profile);
    let [int_rho3] = integrals(profile, |_, r| [r * r * r], config.quadrature)?;
    let flat = d[0] + d[1];
    let lhs = 2.0 * d[0].powi(4);
    let rhs = 3.0 * int_rho3 * flat;
    Ok(report(
        Criterion::Prop1,
        profile,
        vec![("rho_1", d[0]), ("drho_1", d[1]), ("flat_top_value", flat), ("int_rho3", int_rho3)],
        lhs,
        rhs,
        lhs - rhs,
        config,
    ))
}

/// `h(1)`, `k(1)`, `r(1)`, `r'(1)` in dimension 6.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoleQuantities {
    pub h: f64,
    pub k: f64,
    pub r: f64,
    pub dr: f64,
}

impl PoleQuantities {
    pub fn compute(profile: &RadialProfile, tol: Tolerances) -> Result<Self> {
        let d = pole_jet(profile);
        let [h, k] = integrals(
            profile,
            |t, rho| {
                let r = rho.powi(5);
                [(1.0 - t * t) * r, t * t * r]
            },
            tol,
        )?;
        Ok(Self { h, k, r: d[0].powi(5), dr: 5.0 * d[0].powi(4) * d[1] })
    }

    /// `12hkr - h²(5r + r') - 24k³`.
    pub fn nc6_margin(&self) -> f64 {
        let Self { h, k, r, dr } = *self;
        12.0 * h * k * r - h * h * (5.0 * r + dr) - 24.0 * k.powi(3)
    }

    /// `h'(1)`, `h''(1)`, `h'''(1)` of `h(x) = ∫₀^x r(t)(x² - t²) dt`.
    pub fn h_derivatives(&self) -> [f64; 3] {
        let h1 = 2.0 * (self.h + self.k);
        [h1, h1 + 2.0 * self.r, 4.0 * self.r + 2.0 * self.dr]
    }

    pub fn vamos_numerator(&self) -> f64 {
        let h = self.h;
        let [h1, h2, h3] = self.h_derivatives();
        48.0 * h.powi(3) - 6.0 * h1.powi(3) + 2.0 * h * h1 * (15.0 * h1 + 3.0 * h2)
            - h * h * (57.0 * h1 + 15.0 * h2 + h3)
    }

    fn entries(&self) -> Vec<(&'static str, f64)> {
        let [h1, h2, h3] = self.h_derivatives();
        vec![
            ("h_1", self.h),
            ("k_1", self.k),
            ("r_1", self.r),
            ("dr_1", self.dr),
            ("dh_1", h1),
            ("d2h_1", h2),
            ("d3h_1", h3),
            ("vamos_numerator", self.vamos_numerator()),
        ]
    }
}

pub fn prop4_check(profile: &RadialProfile) -> Result<CriterionReport> {
    prop4_check_with(profile, &CriteriaConfig::default())
}

pub fn prop4_check_with(profile: &RadialProfile, config: &CriteriaConfig) -> Result<CriterionReport> {
    check_pole_smoothness(profile)?;
    let q = PoleQuantities::compute(profile, config.quadrature)?;
    let lhs = q.h * q.h * (5.0 * q.r + q.dr) + 24.0 * q.k.powi(3);
    let rhs = 12.0 * q.h * q.k * q.r;
    Ok(report(Criterion::Prop4, profile, q.entries(), lhs, rhs, q.nc6_margin(), config))
}

pub fn cor6_check(profile: &RadialProfile) -> Result<CriterionReport> {
    cor6_check_with(profile, &CriteriaConfig::default())
}

pub fn cor6_check_with(profile: &RadialProfile, config: &CriteriaConfig) -> Result<CriterionReport> {
    check_pole_smoothness(profile)?;
    let flat = flat_top_check_with(profile, config.flat_tol);
    if !flat.flat {
        return Err(Error::FlatTopRequired { value: flat.value });
    }
    let q = PoleQuantities::compute(profile, config.quadrature)?;
    let lhs = 2.0 * q.k * q.k;
    let rhs = q.h * q.r;
    let mut entries = q.entries();
    entries.push(("flat_top_value", flat.value));
    Ok(report(Criterion::Cor6, profile, entries, lhs, rhs, rhs - lhs, config))
}

/// Numerator of `g'(1) - g(1)` in dimension 6.
pub fn vamos_numerator(profile: &RadialProfile) -> Result<f64> {
    check_pole_smoothness(profile)?;
    Ok(PoleQuantities::compute(profile, Tolerances::default())?.vamos_numerator())
}

pub fn check(profile: &RadialProfile, criterion: Criterion, config: &CriteriaConfig) -> Result<CriterionReport> {
    match criterion {
        Criterion::Prop1 => prop1_check_with(profile, config),
        Criterion::Prop4 => prop4_check_with(profile, config),
        Criterion::Cor6 => cor6_check_with(profile, config),
    }
}
