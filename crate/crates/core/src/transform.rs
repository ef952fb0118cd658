//! Radon-type transforms of rotationally symmetric functions and the
//! obstruction field `□ R⁻¹(1/ρ_IK)`.
//!
//! Positive dimensional constants are dropped except for one: the forward
//! transform is scaled by [`radon_constant`] so that balls map to unit balls.
//! The inverse transform uses the bare differential formulas, so
//! `inverse_radon(forward_radon(q)) = κ_n q` with `κ_4 = 1`, `κ_6 = 6`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{integrate_n, Tolerances};
use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};
use crate::profile::{
    classify_breakpoints, BodyOfRevolution, ContinuityClass, JetFunction, Power, RadialProfile, Side, Variable,
    SINE_EPSILON, SNAP,
};
use crate::Verdict;

/// Largest dimension accepted by the forward transform.
pub const MAX_FORWARD_DIMENSION: usize = 20;
const MAX_M: usize = (MAX_FORWARD_DIMENSION - 4) / 2;
/// Relative tolerance for matching one-sided jets of quadrature-based functions.
pub const ONE_SIDED_MATCH_TOL: f64 = 1e-7;
/// Relative negativity threshold for the field verdict.
pub const NEGATIVITY_TOL: f64 = 1e-7;

fn check_even(n: usize) -> Result<usize> {
    if n < 4 || !n.is_multiple_of(2) || n > MAX_FORWARD_DIMENSION {
        return Err(Error::Dimension(n));
    }
    Ok((n - 4) / 2)
}

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// `1 / ∫₀¹ (1 - u²)^m du` with `m = (n - 4) / 2`.
pub fn radon_constant(n: usize) -> Result<f64> {
    let m = check_even(n)?;
    Ok((1..=m).fold(1.0, |acc, j| acc * (2 * j + 1) as f64 / (2 * j) as f64))
}

/// `h_n(x) = ∫₀^x ρ^{n-1}(t) (x² - t²)^{(n-4)/2} dt`, unnormalised.
pub fn h_fn(profile: &RadialProfile, n: usize, x: f64) -> Result<f64> {
    h_fn_with(profile, n, x, Tolerances::default())
}

pub fn h_fn_with(profile: &RadialProfile, n: usize, x: f64, tol: Tolerances) -> Result<f64> {
    let m = check_even(n)? as i32;
    if !(x > 0.0 && x <= 1.0 + SNAP) {
        return Err(Error::Domain { t: x, lo: 0.0, hi: 1.0 });
    }
    let x = x.min(1.0);
    let p = (n - 1) as i32;
    let r = integrate_n(|t| [profile.eval(t).powi(p) * (x * x - t * t).powi(m)], 0.0, x, &profile.breakpoints(), tol)?;
    Ok(r.value[0])
}

/// `F(x) = C_n x^{-(n-3)} ∫₀^x q(t) (x² - t²)^{(n-4)/2} dt` in the sine variable.
///
/// Below the first breakpoint of `q` the substitution `t = xu` gives
/// `F^{(k)}(x) = C_n ∫₀¹ u^k q^{(k)}(xu) (1-u²)^m du`, which stays accurate as
/// `x → 0`. Above it `h` is expanded in the moments `∫₀^x s^{2j} q(s) ds`,
/// whose derivatives are exact jets of the integrand at `x`.
#[derive(Clone, Debug)]
pub struct ForwardRadon<Q> {
    q: Q,
    n: usize,
    m: usize,
    constant: f64,
    breakpoints: Vec<f64>,
    tol: Tolerances,
}

pub fn forward_radon<Q: JetFunction>(q: Q, n: usize) -> Result<ForwardRadon<Q>> {
    ForwardRadon::new(q, n, Tolerances::default())
}

impl<Q: JetFunction> ForwardRadon<Q> {
    pub fn new(q: Q, n: usize, tol: Tolerances) -> Result<Self> {
        let m = check_even(n)?;
        if q.variable() != Variable::Cosine {
            return Err(Error::Variable("the forward transform takes a function of t".into()));
        }
        let breakpoints = q.breakpoints().into_iter().filter(|&t| t > 0.0 && t < 1.0).collect();
        Ok(Self { q, n, m, constant: radon_constant(n)?, breakpoints, tol })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn inner(&self) -> &Q {
        &self.q
    }

    /// Unnormalised `h_n(x)`.
    pub fn h(&self, x: f64) -> Result<f64> {
        let j = self.jet(x, 0, Side::Both)?;
        Ok(j.value() * x.powi(self.n as i32 - 3) / self.constant)
    }

    fn one_sided(&self, x: f64, order: usize, side: Side) -> Result<Jet> {
        let scaled = match self.breakpoints.first() {
            None => true,
            Some(&t0) => x < t0 - SNAP || ((x - t0).abs() <= SNAP && side == Side::Left),
        };
        if scaled {
            self.scaled_jet(x, order)
        } else {
            self.moment_jet(x, order, side)
        }
    }

    fn scaled_jet(&self, x: f64, order: usize) -> Result<Jet> {
        let m = self.m as i32;
        let q = &self.q;
        let err = std::cell::Cell::new(None);
        let r = integrate_n(
            |u| {
                let mut out = [0.0; MAX_ORDER + 1];
                match q.jet(x * u, order, Side::Left) {
                    Ok(j) => {
                        let w = (1.0 - u * u).powi(m);
                        let mut uk = 1.0;
                        for (k, o) in out.iter_mut().enumerate().take(order + 1) {
                            *o = uk * j.derivative(k) * w;
                            uk *= u;
                        }
                    }
                    Err(e) => {
                        err.set(Some(e));
                        out = [f64::NAN; MAX_ORDER + 1];
                    }
                }
                out
            },
            0.0,
            1.0,
            &[],
            self.tol,
        );
        if let Some(e) = err.take() {
            return Err(e);
        }
        let r = r?;
        let derivs: Vec<f64> = r.value[..=order].iter().map(|v| v * self.constant).collect();
        Ok(Jet::from_derivatives(&derivs))
    }

    fn moment_jet(&self, x: f64, order: usize, side: Side) -> Result<Jet> {
        let m = self.m;
        let q = &self.q;
        let err = std::cell::Cell::new(None);
        let r = integrate_n(
            |s| {
                let mut out = [0.0; MAX_M + 1];
                match q.jet(s, 0, Side::Left) {
                    Ok(j) => {
                        let v = j.value();
                        let s2 = s * s;
                        let mut p = 1.0;
                        for o in out.iter_mut().take(m + 1) {
                            *o = p * v;
                            p *= s2;
                        }
                    }
                    Err(e) => {
                        err.set(Some(e));
                        out = [f64::NAN; MAX_M + 1];
                    }
                }
                out
            },
            0.0,
            x,
            &self.breakpoints,
            self.tol,
        );
        if let Some(e) = err.take() {
            return Err(e);
        }
        let moments = r?.value;
        let qside = if self.breakpoints.iter().any(|&t| (t - x).abs() <= SNAP) { side } else { Side::Both };
        let xs = Jet::variable(x, order);
        let integrand = if order > 0 { Some(q.jet(x, order - 1, qside)?) } else { None };
        let x2 = xs * xs;
        let mut h = Jet::constant(0.0, order);
        for (j, &moment) in moments.iter().enumerate().take(m + 1) {
            let a = match integrand {
                Some(qj) => (qj * Jet::variable(x, order - 1).powi(2 * j as i32)).antiderivative(moment),
                None => Jet::constant(moment, 0),
            };
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            h = h + sign * binomial(m, j) * x2.powi((m - j) as i32) * a;
        }
        Ok(self.constant * h * xs.powi(-(self.n as i32 - 3)))
    }
}

impl<Q: JetFunction> JetFunction for ForwardRadon<Q> {
    fn jet(&self, x: f64, order: usize, side: Side) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(Error::InvalidParam(format!("jet order {order} exceeds {MAX_ORDER}")));
        }
        if !(SINE_EPSILON - SNAP..=1.0 + SNAP).contains(&x) {
            return Err(Error::Domain { t: x, lo: SINE_EPSILON, hi: 1.0 });
        }
        let x = x.clamp(SINE_EPSILON, 1.0);
        let at_breakpoint = self.breakpoints.iter().any(|&t| (t - x).abs() <= SNAP);
        if at_breakpoint && side == Side::Both {
            let left = self.one_sided(x, order, Side::Left)?;
            let right = self.one_sided(x, order, Side::Right)?;
            if !agree(&left, &right, ONE_SIDED_MATCH_TOL) {
                return Err(Error::SideRequired { t: x, order });
            }
            return Ok(right);
        }
        self.one_sided(x, order, side)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }

    fn variable(&self) -> Variable {
        Variable::Sine
    }
}

fn agree(a: &Jet, b: &Jet, tol: f64) -> bool {
    let order = a.order().min(b.order());
    (0..=order).all(|k| {
        let (x, y) = (a.derivative(k), b.derivative(k));
        (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs())
    })
}

/// Radial function of the intersection body, `C_n h_n(x) / x^{n-3}`.
pub type IntersectionRadial = ForwardRadon<Power<RadialProfile>>;

pub fn intersection_radial(body: &BodyOfRevolution) -> Result<IntersectionRadial> {
    intersection_radial_with(body, Tolerances::default())
}

pub fn intersection_radial_with(body: &BodyOfRevolution, tol: Tolerances) -> Result<IntersectionRadial> {
    let n = body.dimension();
    ForwardRadon::new(Power::new(body.profile().clone(), n as i32 - 1), n, tol)
}

/// Pointwise reciprocal.
#[derive(Clone, Debug)]
pub struct Reciprocal<F>(pub F);

impl<F: JetFunction> JetFunction for Reciprocal<F> {
    fn jet(&self, t: f64, order: usize, side: Side) -> Result<Jet> {
        Ok(self.0.jet(t, order, side)?.recip())
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
    fn variable(&self) -> Variable {
        self.0.variable()
    }
}

/// `g = R⁻¹ f` for `n = 4` (`g = (t f)'`) and `n = 6`
/// (`g = 2 (t² f'' + 5t f' + 3f)`), evaluated with exact jets of `f`.
#[derive(Clone, Debug)]
pub struct InverseRadon<F> {
    f: F,
    n: usize,
}

pub fn inverse_radon<F: JetFunction>(f: F, n: usize) -> Result<InverseRadon<F>> {
    if n != 4 && n != 6 {
        return Err(Error::Dimension(n));
    }
    if f.variable() != Variable::Sine {
        return Err(Error::Variable("the inverse transform takes a function of x".into()));
    }
    Ok(InverseRadon { f, n })
}

impl<F: JetFunction> InverseRadon<F> {
    pub fn inner(&self) -> &F {
        &self.f
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    fn extra_order(&self) -> usize {
        (self.n - 2) / 2
    }
}

impl<F: JetFunction> JetFunction for InverseRadon<F> {
    fn jet(&self, t: f64, order: usize, side: Side) -> Result<Jet> {
        let need = order + self.extra_order();
        if need > MAX_ORDER {
            return Err(Error::InvalidParam(format!(
                "order {order} of the inverse transform needs jets of order {need}"
            )));
        }
        let f = self.f.jet(t, need, side)?;
        if !f.is_finite() {
            return Err(Error::Smoothness(format!("no finite one-sided jet of order {need} at t = {t}")));
        }
        let tj = Jet::variable(t, order + 1);
        let g = match self.n {
            4 => {
                let d1 = f.differentiate();
                f.truncate(order) + tj.truncate(order) * d1
            }
            _ => {
                let d1 = f.differentiate();
                let d2 = d1.differentiate();
                let tj = tj.truncate(order);
                2.0 * (tj * tj * d2 + 5.0 * tj * d1.truncate(order) + 3.0 * f.truncate(order))
            }
        };
        if !g.is_finite() {
            return Err(Error::Smoothness(format!("inverse transform is not finite at t = {t}")));
        }
        Ok(g)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.f.breakpoints()
    }

    fn variable(&self) -> Variable {
        Variable::Cosine
    }
}

/// The dimension-6 closed chain for `f = t³/h`, given `[h, h', h'']` at `t`.
pub fn closed_chain_n6(h: [f64; 3], t: f64) -> f64 {
    let [h0, h1, h2] = h;
    2.0 * (24.0 * t.powi(3) / h0 - (t.powi(5) * h2 + 11.0 * t.powi(4) * h1) / (h0 * h0)
        + 2.0 * t.powi(5) * h1 * h1 / h0.powi(3))
}

/// `□g(t) = (1 - t²) g'' - (n - 1) t g' + (n - 1) g`.
pub fn box_operator<G: JetFunction + ?Sized>(g: &G, n: usize, t: f64, side: Side) -> Result<f64> {
    let j = g.jet(t, 2, side)?;
    Ok(box_of_jet(&j, n, t))
}

pub fn box_of_jet(j: &Jet, n: usize, t: f64) -> f64 {
    let k = (n - 1) as f64;
    (1.0 - t * t) * j.derivative(2) - k * t * j.derivative(1) + k * j.value()
}

/// `g` of the obstruction pipeline: `R⁻¹(1/ρ_IK)`.
pub type ObstructionProfile = InverseRadon<Reciprocal<IntersectionRadial>>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub t: f64,
    pub value: f64,
    pub is_left_limit: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub t: f64,
    /// `g'(t0+) - g'(t0-)`.
    pub jump: f64,
    /// `(1 - t0²) * jump`.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionField {
    pub dimension: usize,
    pub samples: Vec<FieldSample>,
    pub atoms: Vec<Atom>,
    pub min_value: f64,
    pub min_location: f64,
    pub max_abs: f64,
    /// Midpoints of consecutive samples with values of opposite sign beyond tolerance.
    pub sign_changes: Vec<f64>,
    pub negativity_threshold: f64,
    pub verdict: Verdict,
    /// Negativity was found only in one-sided values at breakpoints.
    pub one_sided_negativity_only: bool,
}

impl ObstructionField {
    pub fn grid(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,continuous_value,is_left_limit,marker\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},field", s.t, s.value, s.is_left_limit);
        }
        for a in &self.atoms {
            let _ = writeln!(out, "{},{},false,atom", a.t, a.weight);
        }
        out
    }
}

/// The body's full obstruction pipeline.
#[derive(Clone, Debug)]
pub struct Obstruction {
    g: ObstructionProfile,
    n: usize,
}

impl Obstruction {
    pub fn new(body: &BodyOfRevolution) -> Result<Self> {
        Self::with_tolerances(body, Tolerances::default())
    }

    pub fn with_tolerances(body: &BodyOfRevolution, tol: Tolerances) -> Result<Self> {
        let n = body.dimension();
        if n != 4 && n != 6 {
            return Err(Error::Dimension(n));
        }
        let radial = intersection_radial_with(body, tol)?;
        Ok(Self { g: inverse_radon(Reciprocal(radial), n)?, n })
    }

    pub fn g(&self) -> &ObstructionProfile {
        &self.g
    }

    pub fn radial(&self) -> &IntersectionRadial {
        &self.g.inner().0
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.g.breakpoints()
    }

    fn at_breakpoint(&self, t: f64) -> Option<f64> {
        self.breakpoints().into_iter().find(|&b| (b - t).abs() <= SNAP)
    }

    /// Continuous part of the field at `t`.
    pub fn value(&self, t: f64, side: Side) -> Result<f64> {
        box_operator(&self.g, self.n, t, side)
    }

    /// One or two samples at `t` (two at a breakpoint, left one first).
    pub fn samples_at(&self, t: f64) -> Result<Vec<FieldSample>> {
        match self.at_breakpoint(t) {
            Some(b) => Ok(vec![
                FieldSample { t: b, value: self.value(b, Side::Left)?, is_left_limit: true },
                FieldSample { t: b, value: self.value(b, Side::Right)?, is_left_limit: false },
            ]),
            None => Ok(vec![FieldSample { t, value: self.value(t, Side::Both)?, is_left_limit: false }]),
        }
    }

    /// Point masses at breakpoints where `g` is continuous but not C¹.
    pub fn atoms(&self) -> Result<Vec<Atom>> {
        let infos = classify_breakpoints(&self.g, ONE_SIDED_MATCH_TOL)?;
        Ok(infos
            .into_iter()
            .filter(|i| i.class == ContinuityClass::C0)
            .map(|i| Atom {
                t: i.t,
                jump: i.first_derivative_jump,
                weight: (1.0 - i.t * i.t) * i.first_derivative_jump,
            })
            .collect())
    }

    pub fn evaluate(&self, grid: &[f64]) -> Result<ObstructionField> {
        if grid.is_empty() {
            return Err(Error::InvalidParam("empty grid".into()));
        }
        if let Some(&t) = grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::Domain { t, lo: 0.0, hi: 1.0 });
        }
        let per_point: Vec<Vec<FieldSample>> = grid.par_iter().map(|&t| self.samples_at(t)).collect::<Result<_>>()?;
        let samples: Vec<FieldSample> = per_point.into_iter().flatten().collect();
        let atoms = self.atoms()?;
        Ok(summarize(self.n, samples, atoms, &self.breakpoints()))
    }

    pub fn evaluate_default(&self) -> Result<ObstructionField> {
        self.evaluate(&default_grid(&self.breakpoints(), DEFAULT_GRID_POINTS))
    }
}

fn summarize(n: usize, samples: Vec<FieldSample>, atoms: Vec<Atom>, breakpoints: &[f64]) -> ObstructionField {
    let max_abs = samples.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
    let threshold = NEGATIVITY_TOL * max_abs;
    let (min_value, min_location) =
        samples.iter().fold((f64::INFINITY, f64::NAN), |acc, s| if s.value < acc.0 { (s.value, s.t) } else { acc });
    let mut sign_changes = Vec::new();
    let mut last: Option<&FieldSample> = None;
    for s in &samples {
        if s.value.abs() <= threshold {
            continue;
        }
        if let Some(p) = last {
            if (p.value < 0.0) != (s.value < 0.0) {
                sign_changes.push(0.5 * (p.t + s.t));
            }
        }
        last = Some(s);
    }
    let negative = |s: &&FieldSample| s.value < -threshold;
    let negative_samples: Vec<&FieldSample> = samples.iter().filter(negative).collect();
    let negative_atom = atoms.iter().any(|a| a.weight < -NEGATIVITY_TOL * max_abs.max(a.weight.abs()));
    let one_sided_only = !negative_samples.is_empty()
        && !negative_atom
        && negative_samples.iter().all(|s| breakpoints.iter().any(|&b| (b - s.t).abs() <= SNAP));
    let verdict =
        if !negative_samples.is_empty() || negative_atom { Verdict::NotPolarZonoid } else { Verdict::Inconclusive };
    ObstructionField {
        dimension: n,
        samples,
        atoms,
        min_value,
        min_location,
        max_abs,
        sign_changes,
        negativity_threshold: threshold,
        verdict,
        one_sided_negativity_only: one_sided_only,
    }
}

pub const DEFAULT_GRID_POINTS: usize = 2000;
const CLUSTER_POINTS: usize = 20;

/// Uniform points on `[1e-6, 1]` plus geometric clusters on both sides of
/// every breakpoint, and the breakpoints themselves.
pub fn default_grid(breakpoints: &[f64], points: usize) -> Vec<f64> {
    let points = points.max(2);
    let lo = SINE_EPSILON;
    let mut grid: Vec<f64> = (0..points).map(|i| lo + (1.0 - lo) * i as f64 / (points - 1) as f64).collect();
    for &b in breakpoints {
        grid.push(b);
        for k in 0..CLUSTER_POINTS {
            let d = 10f64.powf(-2.0 - 6.0 * k as f64 / (CLUSTER_POINTS - 1) as f64);
            grid.push(b - d);
            grid.push(b + d);
        }
    }
    grid.retain(|&t| (lo..=1.0).contains(&t));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= SNAP);
    grid
}

/// Convenience wrapper: default or explicit grid.
pub fn obstruction_field(body: &BodyOfRevolution, grid: Option<&[f64]>) -> Result<ObstructionField> {
    let o = Obstruction::new(body)?;
    match grid {
        Some(g) => o.evaluate(g),
        None => o.evaluate_default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{cst, var, Piece};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cylinder() -> RadialProfile {
        RadialProfile::new(vec![
            Piece::new(0.0, FRAC_1_SQRT_2, 1.0 / (1.0 - var() * var()).sqrt()),
            Piece::new(FRAC_1_SQRT_2, 1.0, 1.0 / var()),
        ])
        .unwrap()
    }

    #[test]
    fn constants() {
        assert_eq!(radon_constant(4).unwrap(), 1.0);
        assert_eq!(radon_constant(6).unwrap(), 1.5);
        assert_relative_eq!(radon_constant(8).unwrap(), 15.0 / 8.0);
        assert!(radon_constant(5).is_err());
        assert!(radon_constant(2).is_err());
    }

    #[test]
    fn h_values() {
        let ball = RadialProfile::single(cst(1.0)).unwrap();
        assert_relative_eq!(h_fn(&ball, 6, 1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(h_fn(&ball, 4, 0.3).unwrap(), 0.3, epsilon = 1e-14);
        assert_relative_eq!(h_fn(&cylinder(), 6, 1.0).unwrap(), 1.25, epsilon = 1e-12);
        assert!(h_fn(&ball, 6, 0.0).is_err());
    }

    #[test]
    fn ball_maps_to_ball() {
        for n in [4, 6, 8] {
            let body = BodyOfRevolution::new(n, RadialProfile::single(cst(1.0)).unwrap()).unwrap();
            let r = intersection_radial(&body).unwrap();
            for &x in &[1e-6, 0.2, 0.7, 1.0] {
                let d = r.jet(x, 4, Side::Both).unwrap().derivatives();
                assert_relative_eq!(d[0], 1.0, epsilon = 1e-13);
                for v in &d[1..] {
                    assert!(v.abs() < 1e-10, "{n} {x} {d:?}");
                }
            }
        }
    }

    #[test]
    fn cylinder_radial_closed_forms() {
        let body = BodyOfRevolution::new(6, cylinder()).unwrap();
        let r = intersection_radial(&body).unwrap();
        for &x in &[0.05, 0.3, 0.6, 0.7] {
            assert_relative_eq!(r.value(x).unwrap(), 1.0 / (1.0 - x * x).sqrt(), max_relative = 1e-11);
        }
        for &x in &[0.75f64, 0.9, 1.0] {
            let exact = (3.0 - 16.0 * x * x + 28.0 * x.powi(4)) / (8.0 * x.powi(5));
            assert_relative_eq!(r.value(x).unwrap(), exact, max_relative = 1e-11);
        }
        // the two forms meet continuously with matching slope
        let l = r.jet(FRAC_1_SQRT_2, 1, Side::Left).unwrap();
        let rr = r.jet(FRAC_1_SQRT_2, 1, Side::Right).unwrap();
        assert_relative_eq!(l.value(), rr.value(), max_relative = 1e-11);
        assert_relative_eq!(l.derivative(1), rr.derivative(1), max_relative = 1e-9);
    }

    #[test]
    fn inverse_of_constant() {
        let one = RadialProfile::with_variable(vec![Piece::new(0.0, 1.0, cst(1.0))], Variable::Sine).unwrap();
        let g4 = inverse_radon(&one, 4).unwrap();
        assert_eq!(g4.value(0.5).unwrap(), 1.0);
        let g6 = inverse_radon(&one, 6).unwrap();
        assert_eq!(g6.value(0.5).unwrap(), 6.0);
        assert!(inverse_radon(&one, 8).is_err());
        let cos = RadialProfile::single(cst(1.0)).unwrap();
        assert!(matches!(inverse_radon(&cos, 4), Err(Error::Variable(_))));
    }

    #[test]
    fn closed_chain_matches_general_form() {
        // f = t³/h with h = t³ + t⁵
        let f = RadialProfile::with_variable(vec![Piece::new(0.0, 1.0, 1.0 / (1.0 + var() * var()))], Variable::Sine)
            .unwrap();
        let g = inverse_radon(&f, 6).unwrap();
        for &t in &[0.1f64, 0.5, 0.9] {
            let h = [t.powi(3) + t.powi(5), 3.0 * t * t + 5.0 * t.powi(4), 6.0 * t + 20.0 * t.powi(3)];
            assert_relative_eq!(closed_chain_n6(h, t), g.value(t).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn box_kernel() {
        let lin = RadialProfile::single(2.0 + 3.0 * var()).unwrap();
        for n in [4, 6] {
            for &t in &[0.0, 0.3, 1.0] {
                assert_relative_eq!(
                    box_operator(&lin, n, t, Side::Both).unwrap(),
                    2.0 * (n - 1) as f64,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn ball_field_is_constant() {
        let body = BodyOfRevolution::new(4, RadialProfile::single(cst(1.0)).unwrap()).unwrap();
        let field = obstruction_field(&body, Some(&[0.1, 0.5, 1.0])).unwrap();
        for s in &field.samples {
            assert_relative_eq!(s.value, 3.0, epsilon = 1e-9);
        }
        assert_eq!(field.verdict, Verdict::Inconclusive);
        assert!(field.atoms.is_empty());
    }

    #[test]
    fn cylinder_field_atom() {
        let body = BodyOfRevolution::new(6, cylinder()).unwrap();
        let o = Obstruction::new(&body).unwrap();
        let atoms = o.atoms().unwrap();
        assert_eq!(atoms.len(), 1);
        assert_relative_eq!(atoms[0].jump, 240.0, max_relative = 1e-8);
        assert_relative_eq!(atoms[0].weight, 120.0, max_relative = 1e-8);
        let field = o.evaluate(&default_grid(&o.breakpoints(), 200)).unwrap();
        assert_eq!(field.verdict, Verdict::NotPolarZonoid);
        assert!(!field.one_sided_negativity_only);
        let s = field.to_csv();
        assert!(s.starts_with("t,continuous_value,is_left_limit,marker\n"));
        assert!(s.trim_end().ends_with(",atom"));
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid(&[0.5], 2000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], SINE_EPSILON);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.contains(&0.5));
        assert_eq!(g.len(), 2000 + 1 + 40);
    }
}
