//! Builtin body families and parameter sweeps.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{bisect, Root, RootBracket, Tolerances};
use crate::criteria::{self, CriteriaConfig, Criterion, PoleQuantities};
use crate::error::{Error, Result};
use crate::profile::{cst, var, BodyOfRevolution, Expr, Piece, RadialProfile, Variable};
use crate::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "cylinder")]
    Cylinder,
    #[serde(rename = "cyl_caps")]
    CylCaps,
    #[serde(rename = "cyl_caps_KM")]
    CylCapsKM,
    #[serde(rename = "octagon_Kb")]
    OctagonKb,
    #[serde(rename = "lp_revolution")]
    LpRevolution,
    #[serde(rename = "exp_decay")]
    ExpDecay,
    #[serde(rename = "ball")]
    Ball,
    #[serde(rename = "three_bodies_L")]
    ThreeBodiesL,
}

pub const FAMILIES: [Family; 8] = [
    Family::Cylinder,
    Family::CylCaps,
    Family::CylCapsKM,
    Family::OctagonKb,
    Family::LpRevolution,
    Family::ExpDecay,
    Family::Ball,
    Family::ThreeBodiesL,
];

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Cylinder => "cylinder",
            Family::CylCaps => "cyl_caps",
            Family::CylCapsKM => "cyl_caps_KM",
            Family::OctagonKb => "octagon_Kb",
            Family::LpRevolution => "lp_revolution",
            Family::ExpDecay => "exp_decay",
            Family::Ball => "ball",
            Family::ThreeBodiesL => "three_bodies_L",
        }
    }

    /// The shape parameter, if any. Every family also accepts `scale`.
    pub fn parameter(self) -> Option<&'static str> {
        match self {
            Family::CylCapsKM => Some("M"),
            Family::OctagonKb => Some("b"),
            Family::LpRevolution => Some("p"),
            _ => None,
        }
    }

    fn default_parameter(self) -> Option<f64> {
        match self {
            Family::CylCapsKM => Some(1.0),
            Family::OctagonKb => Some(0.5),
            Family::LpRevolution => Some(4.0),
            _ => None,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FAMILIES
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown builtin family `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    pub dimension: usize,
}

impl FamilySpec {
    pub fn new(family: Family, dimension: usize) -> Self {
        Self { family, params: BTreeMap::new(), dimension }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    pub fn profile(&self) -> Result<RadialProfile> {
        family_profile(self.family, &self.params)
    }
}

pub fn instantiate(spec: &FamilySpec) -> Result<BodyOfRevolution> {
    BodyOfRevolution::new(spec.dimension, spec.profile()?)
}

/// Resolves a builtin reference from a profile document.
pub fn builtin_profile(name: &str, params: &BTreeMap<String, f64>) -> Result<RadialProfile> {
    family_profile(name.parse()?, params)
}

fn one_minus_t2() -> Expr {
    1.0 - var() * var()
}

fn inv_sqrt_one_minus_t2() -> Expr {
    1.0 / one_minus_t2().sqrt()
}

pub fn family_profile(family: Family, params: &BTreeMap<String, f64>) -> Result<RadialProfile> {
    for key in params.keys() {
        if key != "scale" && Some(key.as_str()) != family.parameter() {
            return Err(Error::InvalidParam(format!("family `{}` has no parameter `{key}`", family.name())));
        }
    }
    let scale = params.get("scale").copied().unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParam(format!("scale must be positive, got {scale}")));
    }
    let param = match family.parameter() {
        Some(name) => params.get(name).copied().or(family.default_parameter()),
        None => None,
    };
    let base = match family {
        Family::Cylinder => cylinder(),
        Family::CylCaps => cyl_caps(),
        Family::CylCapsKM => cyl_caps_km(param.unwrap()),
        Family::OctagonKb => octagon_kb(param.unwrap()),
        Family::LpRevolution => lp_revolution(param.unwrap()),
        Family::ExpDecay => RadialProfile::single((-var()).exp()),
        Family::Ball => RadialProfile::single(cst(1.0)),
        Family::ThreeBodiesL => three_bodies_l(),
    }?;
    if scale == 1.0 {
        Ok(base)
    } else {
        base.scaled(scale)
    }
}

/// Height 2, radius 1.
pub fn cylinder() -> Result<RadialProfile> {
    RadialProfile::new(vec![
        Piece::new(0.0, FRAC_1_SQRT_2, inv_sqrt_one_minus_t2()),
        Piece::new(FRAC_1_SQRT_2, 1.0, 1.0 / var()),
    ])
}

/// Cylinder of radius 1/2 with caps of radius 1/2.
pub fn cyl_caps() -> Result<RadialProfile> {
    RadialProfile::new(vec![
        Piece::new(0.0, FRAC_1_SQRT_2, 0.5 * inv_sqrt_one_minus_t2()),
        Piece::new(FRAC_1_SQRT_2, 1.0, var()),
    ])
}

/// Cylinder of height 2 with caps cut from circles of radius `M`.
pub fn cyl_caps_km(m: f64) -> Result<RadialProfile> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::InvalidParam(format!("K_M requires M >= 1, got {m}")));
    }
    let s = (m * m - 1.0).sqrt();
    let cap = var() * (1.0 - s) + (var() * var() * (m * m - 2.0 * s) + 2.0 * s).sqrt();
    RadialProfile::new(vec![
        Piece::new(0.0, FRAC_1_SQRT_2, inv_sqrt_one_minus_t2()),
        Piece::new(FRAC_1_SQRT_2, 1.0, cap),
    ])
}

/// Body of revolution of an octagon; a double cone at `b = 0`, the cylinder at `b = 1`.
pub fn octagon_kb(b: f64) -> Result<RadialProfile> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::InvalidParam(format!("K_b requires b in [0, 1], got {b}")));
    }
    let root = (1.0 + b * b).sqrt();
    let (lo, hi) = (b / root, 1.0 / root);
    let mut pieces = Vec::with_capacity(3);
    if lo > 0.0 {
        pieces.push(Piece::new(0.0, lo, inv_sqrt_one_minus_t2()));
    }
    if hi - lo > 1e-12 {
        pieces.push(Piece::new(lo, hi, (1.0 + b) / (var() + one_minus_t2().sqrt())));
    }
    let hi = if hi - lo > 1e-12 { hi } else { lo };
    if hi < 1.0 {
        pieces.push(Piece::new(hi, 1.0, 1.0 / var()));
    }
    RadialProfile::new(pieces)
}

/// Unit ball of the planar `ℓ^p` norm rotated about the vertical axis:
/// `ρ(t) = (t^p + (1 - t²)^{p/2})^{-1/p}`.
pub fn lp_revolution(p: f64) -> Result<RadialProfile> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParam(format!("l^p requires p > 0, got {p}")));
    }
    if p == 2.0 {
        return RadialProfile::single(cst(1.0));
    }
    RadialProfile::single((var().pow(p) + one_minus_t2().pow(p / 2.0)).pow(-1.0 / p))
}

pub fn three_bodies_l() -> Result<RadialProfile> {
    let u = one_minus_t2();
    let num = 3.0 - 16.0 * u.clone() + 28.0 * u.clone() * u.clone();
    RadialProfile::new(vec![
        Piece::new(0.0, FRAC_1_SQRT_2, num / (8.0 * u.pow(2.5))),
        Piece::new(FRAC_1_SQRT_2, 1.0, 1.0 / var()),
    ])
}

/// Closed-form intersection radial functions, in the sine variable and with
/// the crate's normalisation, where known.
pub fn intersection_closed_form(spec: &FamilySpec) -> Option<RadialProfile> {
    let scale = spec.params.get("scale").copied().unwrap_or(1.0);
    let factor = scale.powi(spec.dimension as i32 - 1);
    let pieces = match (spec.family, spec.dimension) {
        (Family::Ball, _) => vec![Piece::new(0.0, 1.0, cst(factor))],
        (Family::Cylinder, 6) => {
            let x = var;
            vec![
                Piece::new(0.0, FRAC_1_SQRT_2, factor * inv_sqrt_one_minus_t2()),
                Piece::new(
                    FRAC_1_SQRT_2,
                    1.0,
                    factor * (3.0 - 16.0 * x() * x() + 28.0 * x().pow(4.0)) / (8.0 * x().pow(5.0)),
                ),
            ]
        }
        _ => return None,
    };
    RadialProfile::with_variable(pieces, Variable::Sine).ok()
}

/// `w(M)`, the dimension-4 margin `2ρ⁴(1) - 3(∫ρ³)(ρ(1) + ρ'(1))` of `K_M`.
pub fn w_of_m(m: f64) -> Result<f64> {
    Ok(criteria::prop1_check(&cyl_caps_km(m)?)?.margin)
}

/// `h(1) - 2k(1)²` for `K_b` by quadrature (`r(1) = 1`).
pub fn appendix_b_margin(b: f64) -> Result<f64> {
    Ok(criteria::cor6_check(&octagon_kb(b)?)?.margin)
}

/// `h(1)`, `k(1)` of `K_b` by quadrature.
pub fn appendix_b_integrals(b: f64) -> Result<(f64, f64)> {
    let q = PoleQuantities::compute(&octagon_kb(b)?, Tolerances::default())?;
    Ok((q.h, q.k))
}

/// `h(1) = (1 + 5b - b⁵)/4`, `k(1) = (1 + 5b + 10b² - 5b⁴ - b⁵)/12`.
pub fn appendix_b_closed_forms(b: f64) -> (f64, f64) {
    let h = (1.0 + 5.0 * b - b.powi(5)) / 4.0;
    let k = (1.0 + 5.0 * b + 10.0 * b * b - 5.0 * b.powi(4) - b.powi(5)) / 12.0;
    (h, k)
}

pub fn appendix_b_polynomial(b: f64) -> f64 {
    let (h, k) = appendix_b_closed_forms(b);
    h - 2.0 * k * k
}

/// `∫₀¹ ρ_M³ dt` in closed form:
/// `3/2 + M³ - (M² - 1)^{3/2} - (3/2)(M² - 1)^{1/2}`.
pub fn km_cube_integral(m: f64) -> f64 {
    let s = (m * m - 1.0).sqrt();
    1.5 + m.powi(3) - s.powi(3) - 1.5 * s
}

/// The long closed form for `∫₀¹ ρ_M³ dt` as it is usually printed, term for
/// term. It does not agree with the integral; kept to document the mismatch.
pub fn km_cube_integral_printed(m: f64) -> f64 {
    let s = (m * m - 1.0).sqrt();
    let q = s.sqrt();
    let q3 = q.powi(3);
    let a = (m * m + 2.0 * s).sqrt();
    let bb = (-2.0 + m * m * (2.0 + s)).sqrt();
    let c = ((m * m - 1.0) * (-2.0 + m * m * (2.0 + s))).sqrt();
    let bracket = 3.0 * m.powi(8) * q - 16.0 * m.powi(3) * q3 - 8.0 * q * a
        + 4.0 * m.powi(7) * (q3 - 4.0 * q)
        + 16.0 * m.powi(5) * (q + q3)
        + m.powi(4) * (36.0 * q - 6.0 * q * a + 8.0 * q3 * a - 4.0 * bb - 4.0 * c)
        - 4.0 * m * m * (3.0 * q + 3.0 * q3 - 4.0 * q * a + 2.0 * q3 * a - c)
        + m.powi(6) * (-21.0 * q + 15.0 * q3 - 2.0 * q * a + 4.0 * bb - c);
    1.0 - bracket / (4.0 * q3 * (m * m - 2.0 * s).powi(2))
}

/// `w(M)` from [`km_cube_integral`] and the closed-form pole values
/// `ρ(1) = 1 + M - s`, `ρ(1) + ρ'(1) = 2(1 + M)(M - s)/M`, `s = √(M² - 1)`.
pub fn w_of_m_closed(m: f64) -> f64 {
    let s = (m * m - 1.0).sqrt();
    let rho1 = 1.0 + m - s;
    let flat = 2.0 * (1.0 + m) * (m - s) / m;
    2.0 * rho1.powi(4) - 3.0 * km_cube_integral(m) * flat
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub family: Family,
    pub param: String,
    pub criterion: Criterion,
    pub points: Vec<SweepPoint>,
    pub brackets: Vec<RootBracket>,
    pub roots: Vec<Root>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,margin,verdict\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.param, p.margin, p.verdict);
        }
        for r in &self.roots {
            let _ = writeln!(out, "{},{},root", r.root, r.value);
        }
        out
    }

    /// Largest grid parameter with a satisfied criterion.
    pub fn last_satisfied(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.verdict == Verdict::NotPolarZonoid)
            .map(|p| p.param)
            .fold(None, |acc, p| Some(acc.map_or(p, |a: f64| a.max(p))))
    }
}

pub const DEFAULT_SWEEP_POINTS: usize = 512;
const TRISECTION_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub criteria: CriteriaConfig,
    /// Absolute width of refined root brackets.
    pub root_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { criteria: CriteriaConfig::default(), root_tol: 1e-10 }
    }
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Grid `lo, lo + step, ...` up to `hi`, snapped to multiples of `step`.
pub fn stepped_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidParam(format!("grid [{lo}, {hi}] with step {step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + step * i as f64).collect())
}

/// Criterion margin of `template` with `param` set to `value`.
pub fn margin_at(
    template: &FamilySpec,
    param: &str,
    value: f64,
    criterion: Criterion,
    config: &CriteriaConfig,
) -> Result<f64> {
    let spec = template.clone().with(param, value);
    Ok(criteria::check(&spec.profile()?, criterion, config)?.margin)
}

/// Evaluates the criterion across `grid`, brackets every sign change, probes
/// local minima of `|margin|` for hidden pairs of roots, and bisects.
pub fn sweep(
    template: &FamilySpec,
    param: &str,
    grid: &[f64],
    criterion: Criterion,
    config: &SweepConfig,
) -> Result<SweepResult> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParam("sweep grid must be strictly increasing with two or more points".into()));
    }
    if template.family.parameter() != Some(param) && param != "scale" {
        return Err(Error::InvalidParam(format!("family `{}` cannot be swept over `{param}`", template.family.name())));
    }
    let f = |x: f64| margin_at(template, param, x, criterion, &config.criteria);
    let reports: Vec<(f64, Verdict)> = grid
        .par_iter()
        .map(|&x| {
            let spec = template.clone().with(param, x);
            criteria::check(&spec.profile()?, criterion, &config.criteria).map(|r| (r.margin, r.verdict))
        })
        .collect::<Result<_>>()?;
    let points: Vec<SweepPoint> =
        grid.iter().zip(&reports).map(|(&param, &(margin, verdict))| SweepPoint { param, margin, verdict }).collect();

    let mut brackets = Vec::new();
    for i in 0..points.len() - 1 {
        let (a, b) = (&points[i], &points[i + 1]);
        if let Ok(br) = RootBracket::from_values(a.param, b.param, a.margin, b.margin) {
            brackets.push(br);
        }
    }
    for i in 1..points.len() - 1 {
        let (a, m, b) = (&points[i - 1], &points[i], &points[i + 1]);
        let same_sign = (a.margin > 0.0) == (m.margin > 0.0) && (m.margin > 0.0) == (b.margin > 0.0);
        if same_sign && m.margin.abs() <= a.margin.abs() && m.margin.abs() <= b.margin.abs() {
            trisect(&f, a.param, a.margin, b.param, b.margin, TRISECTION_DEPTH, &mut brackets)?;
        }
    }
    brackets.sort_by(|x, y| x.lo.total_cmp(&y.lo));

    let roots = brackets.par_iter().map(|&br| bisect(f, br, config.root_tol)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { family: template.family, param: param.to_owned(), criterion, points, brackets, roots })
}

fn trisect<F: Fn(f64) -> Result<f64>>(
    f: &F,
    lo: f64,
    f_lo: f64,
    hi: f64,
    f_hi: f64,
    depth: usize,
    out: &mut Vec<RootBracket>,
) -> Result<()> {
    if depth == 0 {
        return Ok(());
    }
    let xs = [lo, lo + (hi - lo) / 3.0, lo + 2.0 * (hi - lo) / 3.0, hi];
    let vs = [f_lo, f(xs[1])?, f(xs[2])?, f_hi];
    let mut found = false;
    for i in 0..3 {
        if let Ok(br) = RootBracket::from_values(xs[i], xs[i + 1], vs[i], vs[i + 1]) {
            out.push(br);
            found = true;
        }
    }
    if found {
        return Ok(());
    }
    let k = (0..4).min_by(|&a, &b| vs[a].abs().total_cmp(&vs[b].abs())).unwrap();
    let (a, b) = match k {
        0 => (0, 1),
        3 => (2, 3),
        k => (k - 1, k + 1),
    };
    trisect(f, xs[a], vs[a], xs[b], vs[b], depth - 1, out)
}

/// Flat-top criterion across `ℓ^p` revolutions in dimension 6.
pub fn lp_threshold(p_lo: f64, p_hi: f64, step: f64) -> Result<SweepResult> {
    if !(p_lo > 2.0 && p_hi > p_lo) {
        return Err(Error::InvalidParam(format!("l^p sweep requires 2 < p_lo < p_hi, got [{p_lo}, {p_hi}]")));
    }
    let grid = stepped_grid(p_lo, p_hi, step)?;
    sweep(&FamilySpec::new(Family::LpRevolution, 6), "p", &grid, Criterion::Cor6, &SweepConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{ContinuityClass, JetFunction, Side};
    use approx::assert_relative_eq;

    #[test]
    fn every_builtin_validates() {
        for f in FAMILIES {
            let p = family_profile(f, &BTreeMap::new()).unwrap();
            assert!(p.value(0.3).unwrap() > 0.0, "{}", f.name());
        }
        assert!(family_profile(Family::Ball, &BTreeMap::from([("M".to_owned(), 2.0)])).is_err());
        assert!(cyl_caps_km(0.5).is_err());
        assert!(octagon_kb(1.5).is_err());
        assert!(lp_revolution(0.0).is_err());
        assert!("octagon".parse::<Family>().is_err());
    }

    #[test]
    fn km_at_three() {
        let p = cyl_caps_km(3.0).unwrap();
        assert_relative_eq!(p.value(1.0).unwrap(), 4.0 - 8f64.sqrt(), max_relative = 1e-14);
        let ft = criteria::flat_top_check(&p);
        assert_relative_eq!(ft.value, 2.0 * 4.0 * (3.0 - 8f64.sqrt()) / 3.0, max_relative = 1e-13);
        assert!(!ft.flat);
        let bp = &p.breakpoint_info()[0];
        assert_eq!(bp.class, ContinuityClass::C0);
    }

    #[test]
    fn km_one_is_dilate_of_cylcap() {
        let k1 = cyl_caps_km(1.0).unwrap();
        let c = cyl_caps().unwrap();
        for &t in &[0.1, 0.5, 0.8, 1.0] {
            assert_relative_eq!(k1.value(t).unwrap(), 2.0 * c.value(t).unwrap(), max_relative = 1e-14);
        }
    }

    #[test]
    fn kb_degenerate_ends() {
        let k1 = octagon_kb(1.0).unwrap();
        assert_eq!(k1.pieces().len(), 2);
        let c = cylinder().unwrap();
        for &t in &[0.2, 0.9] {
            assert_relative_eq!(k1.value(t).unwrap(), c.value(t).unwrap(), max_relative = 1e-14);
        }
        let k0 = octagon_kb(0.0).unwrap();
        assert_eq!(k0.pieces().len(), 1);
        assert!(matches!(appendix_b_margin(0.0), Err(Error::Smoothness(_))));
        assert_eq!(octagon_kb(0.5).unwrap().pieces().len(), 3);
    }

    #[test]
    fn lp_two_is_ball() {
        let p = lp_revolution(2.0).unwrap();
        assert_eq!(p.eval_jet(0.4, 2, Side::Both).unwrap(), vec![1.0, 0.0, 0.0]);
        let p3 = lp_revolution(3.0).unwrap();
        assert!(criteria::flat_top_check(&p3).flat);
    }

    #[test]
    fn w_closed_form_matches_quadrature() {
        for &m in &[1.0, 1.5, 2.0, 5.0] {
            assert_relative_eq!(w_of_m(m).unwrap(), w_of_m_closed(m), max_relative = 1e-10);
        }
        assert_relative_eq!(km_cube_integral(1.0), 2.5, epsilon = 1e-15);
    }

    #[test]
    fn appendix_b_closed_forms_match() {
        let (h, k) = appendix_b_integrals(0.5).unwrap();
        let (hc, kc) = appendix_b_closed_forms(0.5);
        assert_relative_eq!(h, hc, epsilon = 1e-10);
        assert_relative_eq!(k, kc, epsilon = 1e-10);
        assert!(appendix_b_margin(1.0).unwrap() < 0.0);
    }

    #[test]
    fn scale_param() {
        let spec = FamilySpec::new(Family::Ball, 4).with("scale", 2.0);
        assert_eq!(spec.profile().unwrap().value(0.5).unwrap(), 2.0);
        assert!(FamilySpec::new(Family::Ball, 4).with("scale", -1.0).profile().is_err());
    }

    #[test]
    fn stepped_grid_includes_end() {
        let g = stepped_grid(9.0, 10.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_relative_eq!(*g.last().unwrap(), 10.0, epsilon = 1e-12);
    }
}
