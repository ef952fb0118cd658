//! Piecewise closed-form radial profiles of bodies of revolution.
//!
//! A profile is stored as a function of `t`, the cosine of the angle to the
//! axis of revolution, on `[0, 1]`. Functions naturally written in the sine
//! of that angle carry [`Variable::Sine`] and are converted on evaluation.

mod expr;
pub mod json;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};

pub use expr::{cst, var, Expr};

/// Breakpoint snapping distance.
pub const SNAP: f64 = 1e-13;
/// Lower end of the evaluation range for sine-variable functions.
pub const SINE_EPSILON: f64 = 1e-6;
/// Default tolerance for comparing one-sided jets at breakpoints.
pub const DEFAULT_BREAKPOINT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// `t = cos(angle to the axis)`.
    Cosine,
    /// `x = sin(angle to the axis)`.
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContinuityClass {
    C0,
    C1,
    #[serde(rename = "C2+")]
    C2Plus,
}

impl ContinuityClass {
    /// Highest derivative order that is continuous across the breakpoint.
    pub fn smooth_order(self) -> usize {
        match self {
            ContinuityClass::C0 => 0,
            ContinuityClass::C1 => 1,
            ContinuityClass::C2Plus => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakpointInfo {
    pub t: f64,
    pub class: ContinuityClass,
    /// `f'(t0+) - f'(t0-)`.
    pub first_derivative_jump: f64,
}

/// Anything that can be expanded into a jet at a point of `[0, 1]`.
///
/// Implementations are immutable and may be shared across threads.
pub trait JetFunction: Send + Sync {
    fn jet(&self, t: f64, order: usize, side: Side) -> Result<Jet>;

    /// Interior points where the function is not known to be smooth, sorted.
    fn breakpoints(&self) -> Vec<f64>;

    fn variable(&self) -> Variable {
        Variable::Cosine
    }

    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t, 0, Side::Both)?.value())
    }

    /// Evaluates in the requested convention, substituting `t = sqrt(1 - x^2)`
    /// (or the reverse) when it differs from the native one.
    fn jet_as(&self, variable: Variable, at: f64, order: usize, side: Side) -> Result<Jet> {
        if variable == self.variable() {
            return self.jet(at, order, side);
        }
        let inner = (1.0 - Jet::variable(at, order).powi(2)).sqrt();
        let side = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Both => Side::Both,
        };
        let native = inner.value().clamp(0.0, 1.0);
        let outer = self.jet(native, order, side)?;
        Ok(inner.compose(&outer.derivatives()))
    }
}

impl<T: JetFunction + ?Sized> JetFunction for &T {
    fn jet(&self, t: f64, order: usize, side: Side) -> Result<Jet> {
        (**self).jet(t, order, side)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn variable(&self) -> Variable {
        (**self).variable()
    }
}

impl<T: JetFunction + ?Sized> JetFunction for std::sync::Arc<T> {
    fn jet(&self, t: f64, order: usize, side: Side) -> Result<Jet> {
        (**self).jet(t, order, side)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn variable(&self) -> Variable {
        (**self).variable()
    }
}

/// One closed-form piece on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub expr: Expr,
}

impl Piece {
    pub fn new(a: f64, b: f64, expr: Expr) -> Self {
        Self { a, b, expr }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pieces: Vec<Piece>,
    breakpoints: Vec<BreakpointInfo>,
    variable: Variable,
    tolerance: f64,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Compares two one-sided jets coefficient by coefficient up to `order`.
fn jets_agree(left: &Jet, right: &Jet, order: usize, tol: f64) -> bool {
    (0..=order).all(|k| close(left.derivative(k), right.derivative(k), tol))
}

fn classify(left: &Jet, right: &Jet, tol: f64) -> BreakpointInfo {
    let class = if !close(left.derivative(1), right.derivative(1), tol) {
        ContinuityClass::C0
    } else if left.order() < 2 || !close(left.derivative(2), right.derivative(2), tol) {
        ContinuityClass::C1
    } else {
        ContinuityClass::C2Plus
    };
    BreakpointInfo { t: f64::NAN, class, first_derivative_jump: right.derivative(1) - left.derivative(1) }
}

impl RadialProfile {
    /// Builds a profile in the cosine variable.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        Self::build(pieces, Variable::Cosine, DEFAULT_BREAKPOINT_TOL)
    }

    pub fn single(expr: Expr) -> Result<Self> {
        Self::new(vec![Piece::new(0.0, 1.0, expr)])
    }

    pub fn with_variable(pieces: Vec<Piece>, variable: Variable) -> Result<Self> {
        Self::build(pieces, variable, DEFAULT_BREAKPOINT_TOL)
    }

    pub fn build(mut pieces: Vec<Piece>, variable: Variable, tolerance: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidProfile("no pieces".into()));
        }
        if !close(pieces[0].a, 0.0, 1e-12) || !close(pieces[pieces.len() - 1].b, 1.0, 1e-12) {
            return Err(Error::InvalidProfile("pieces must tile [0, 1]".into()));
        }
        pieces[0].a = 0.0;
        let last = pieces.len() - 1;
        pieces[last].b = 1.0;
        for i in 0..pieces.len() {
            if pieces[i].b <= pieces[i].a {
                return Err(Error::InvalidProfile(format!("empty interval [{}, {}]", pieces[i].a, pieces[i].b)));
            }
            if i + 1 < pieces.len() {
                if !close(pieces[i].b, pieces[i + 1].a, 1e-12) {
                    return Err(Error::InvalidProfile(format!(
                        "gap between pieces at {} and {}",
                        pieces[i].b,
                        pieces[i + 1].a
                    )));
                }
                pieces[i + 1].a = pieces[i].b;
            }
        }
        let lo = match variable {
            Variable::Cosine => 0.0,
            Variable::Sine => SINE_EPSILON,
        };
        for piece in &pieces {
            validate_piece(piece, lo)?;
        }
        let mut profile = Self { pieces, breakpoints: Vec::new(), variable, tolerance };
        profile.breakpoints = profile.classify_all()?;
        Ok(profile)
    }

    fn classify_all(&self) -> Result<Vec<BreakpointInfo>> {
        let mut out = Vec::with_capacity(self.pieces.len().saturating_sub(1));
        for i in 0..self.pieces.len() - 1 {
            let t0 = self.pieces[i].b;
            let left = self.pieces[i].expr.jet(t0, 2);
            let right = self.pieces[i + 1].expr.jet(t0, 2);
            if !close(left.value(), right.value(), self.tolerance) {
                return Err(Error::InvalidProfile(format!(
                    "discontinuous at t = {t0}: {} vs {}",
                    left.value(),
                    right.value()
                )));
            }
            let mut info = classify(&left, &right, self.tolerance);
            info.t = t0;
            out.push(info);
        }
        Ok(out)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn breakpoint_info(&self) -> &[BreakpointInfo] {
        &self.breakpoints
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Same pieces, reclassified with a different breakpoint tolerance.
    pub fn with_tolerance(&self, tolerance: f64) -> Result<Self> {
        Self::build(self.pieces.clone(), self.variable, tolerance)
    }

    /// The profile multiplied by a positive constant.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let pieces = self.pieces.iter().map(|p| Piece::new(p.a, p.b, factor * p.expr.clone())).collect();
        Self::build(pieces, self.variable, self.tolerance)
    }

    /// Pointwise power of the profile, evaluated through jets.
    pub fn powi(&self, power: i32) -> Power<&RadialProfile> {
        Power::new(self, power)
    }

    fn domain_lo(&self) -> f64 {
        match self.variable {
            Variable::Cosine => 0.0,
            Variable::Sine => SINE_EPSILON,
        }
    }

    fn check_domain(&self, t: f64) -> Result<f64> {
        let lo = self.domain_lo();
        if t.is_nan() || t < lo - SNAP || t > 1.0 + SNAP {
            return Err(Error::Domain { t, lo, hi: 1.0 });
        }
        Ok(t.clamp(lo, 1.0))
    }

    /// Index of the breakpoint at `t`, if `t` sits on one.
    fn breakpoint_index(&self, t: f64) -> Option<usize> {
        self.breakpoints.iter().position(|bp| (bp.t - t).abs() <= SNAP)
    }

    fn piece_index(&self, t: f64) -> usize {
        self.pieces.iter().position(|p| t <= p.b).unwrap_or(self.pieces.len() - 1)
    }

    /// Plain scalar evaluation on the governing piece; fast path for quadrature.
    pub fn eval(&self, t: f64) -> f64 {
        self.pieces[self.piece_index(t)].expr.eval(t)
    }

    /// Value and derivatives up to `order` at `t`.
    pub fn eval_jet(&self, t: f64, order: usize, side: Side) -> Result<Vec<f64>> {
        Ok(self.jet(t, order, side)?.derivatives())
    }
}

fn validate_piece(piece: &Piece, lo: f64) -> Result<()> {
    const GRID: usize = 64;
    let a = piece.a.max(lo);
    let b = piece.b;
    for i in 0..=GRID {
        let mut t = a + (b - a) * i as f64 / GRID as f64;
        let mut v = piece.expr.eval(t);
        if !v.is_finite() && (i == 0 || i == GRID) {
            // removable singularity at an endpoint
            t += if i == 0 { SINE_EPSILON } else { -SINE_EPSILON };
            v = piece.expr.eval(t);
        }
        if !v.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "non-finite value {v} at t = {t} in [{}, {}]",
                piece.a, piece.b
            )));
        }
        if v <= 0.0 {
            return Err(Error::InvalidProfile(format!(
                "non-positive value {v} at t = {t} in [{}, {}]",
                piece.a, piece.b
            )));
        }
    }
    Ok(())
}

impl JetFunction for RadialProfile {
    fn jet(&self, t: f64, order: usize, side: Side) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(Error::InvalidParam(format!("jet order {order} exceeds {MAX_ORDER}")));
        }
        let t = self.check_domain(t)?;
        match self.breakpoint_index(t) {
            None => Ok(self.pieces[self.piece_index(t)].expr.jet(t, order)),
            Some(i) => {
                let t0 = self.breakpoints[i].t;
                let left = self.pieces[i].expr.jet(t0, order);
                let right = self.pieces[i + 1].expr.jet(t0, order);
                match side {
                    Side::Left => Ok(left),
                    Side::Right => Ok(right),
                    Side::Both if jets_agree(&left, &right, order, self.tolerance) => Ok(right),
                    Side::Both => Err(Error::SideRequired { t: t0, order }),
                }
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|b| b.t).collect()
    }

    fn variable(&self) -> Variable {
        self.variable
    }
}

/// `base^power`, with breakpoints of the base.
#[derive(Clone, Debug)]
pub struct Power<P> {
    base: P,
    power: i32,
}

impl<P: JetFunction> Power<P> {
    pub fn new(base: P, power: i32) -> Self {
        Self { base, power }
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn power(&self) -> i32 {
        self.power
    }
}

impl<P: JetFunction> JetFunction for Power<P> {
    fn jet(&self, t: f64, order: usize, side: Side) -> Result<Jet> {
        Ok(self.base.jet(t, order, side)?.powi(self.power))
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }
    fn variable(&self) -> Variable {
        self.base.variable()
    }
}

/// Classifies every interior breakpoint of `f` from its one-sided jets.
pub fn classify_breakpoints<F: JetFunction + ?Sized>(f: &F, tol: f64) -> Result<Vec<BreakpointInfo>> {
    f.breakpoints()
        .into_iter()
        .filter(|&t| t > 0.0 && t < 1.0)
        .map(|t0| {
            let left = f.jet(t0, 2, Side::Left)?;
            let right = f.jet(t0, 2, Side::Right)?;
            let mut info = classify(&left, &right, tol);
            info.t = t0;
            Ok(info)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyOfRevolution {
    dimension: usize,
    profile: RadialProfile,
}

impl BodyOfRevolution {
    pub fn new(dimension: usize, profile: RadialProfile) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::Dimension(dimension));
        }
        if profile.variable() != Variable::Cosine {
            return Err(Error::Variable("a body's radial profile must be in the cosine variable".into()));
        }
        Ok(Self { dimension, profile })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// Membership test for a point given by its distance from the origin and
    /// the absolute cosine of its angle to the axis.
    pub fn contains_polar(&self, radius: f64, abs_cos: f64) -> bool {
        radius <= self.profile.eval(abs_cos.clamp(0.0, 1.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub dimension: usize,
    pub samples: usize,
    pub convex: bool,
    /// Signed turning extremes of the closed boundary curve, normalised by
    /// squared edge lengths.
    pub min_turn: f64,
    pub max_turn: f64,
    pub violations: usize,
    pub warnings: Vec<String>,
}

/// Samples the planar generating curve `(rho(t) sqrt(1-t^2), rho(t) t)`,
/// closes it under both reflections and checks that the discrete turning is
/// single-signed. Diagnostic only.
pub fn validate_convexity(profile: &RadialProfile, n: usize, samples: usize) -> ConvexityReport {
    const TURN_TOL: f64 = 1e-9;
    let samples = samples.max(3);
    let total = 4 * samples;
    let points: Vec<(f64, f64)> = (0..total)
        .map(|i| {
            let theta = std::f64::consts::TAU * i as f64 / total as f64;
            let (s, c) = theta.sin_cos();
            let r = profile.eval(s.abs().min(1.0));
            (r * c, r * s)
        })
        .collect();
    let mut min_turn = f64::INFINITY;
    let mut max_turn = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut warnings = Vec::new();
    for i in 0..total {
        let p0 = points[i];
        let p1 = points[(i + 1) % total];
        let p2 = points[(i + 2) % total];
        let e1 = (p1.0 - p0.0, p1.1 - p0.1);
        let e2 = (p2.0 - p1.0, p2.1 - p1.1);
        let norm = (e1.0.hypot(e1.1) * e2.0.hypot(e2.1)).max(f64::MIN_POSITIVE);
        let turn = (e1.0 * e2.1 - e1.1 * e2.0) / norm;
        min_turn = min_turn.min(turn);
        max_turn = max_turn.max(turn);
        if turn < -TURN_TOL {
            violations += 1;
            if warnings.len() < 8 {
                let theta = std::f64::consts::TAU * (i + 1) as f64 / total as f64;
                warnings.push(format!("boundary turns inward near t = {:.6}", theta.sin().abs()));
            }
        }
    }
    ConvexityReport { dimension: n, samples, convex: violations == 0, min_turn, max_turn, violations, warnings }
}
