//! Quadrature, one-sided limits, finite-difference checks and bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{JetFunction, Side, Variable, SINE_EPSILON};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Subinterval budget per breakpoint-free segment.
pub const MAX_SUBINTERVALS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: DEFAULT_REL_TOL, abs: DEFAULT_ABS_TOL }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel >= 0.0 && abs >= 0.0) || (rel == 0.0 && abs == 0.0) {
            return Err(Error::InvalidParam(format!("tolerances rel = {rel}, abs = {abs}")));
        }
        Ok(Self { rel, abs })
    }
}

// 21-point Gauss-Kronrod rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980148864,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Integrand, interval, forced split points and tolerances.
pub struct QuadratureRequest<F> {
    pub integrand: F,
    pub a: f64,
    pub b: f64,
    pub breakpoints: Vec<f64>,
    pub tol: Tolerances,
}

impl<F: Fn(f64) -> f64> QuadratureRequest<F> {
    pub fn new(integrand: F, a: f64, b: f64) -> Self {
        Self { integrand, a, b, breakpoints: Vec::new(), tol: Tolerances::default() }
    }

    pub fn breakpoints(mut self, breakpoints: &[f64]) -> Self {
        self.breakpoints = breakpoints.to_vec();
        self
    }

    pub fn tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

pub fn integrate<F: Fn(f64) -> f64>(req: &QuadratureRequest<F>) -> Result<Estimate> {
    let r = integrate_n(|t| [(req.integrand)(t)], req.a, req.b, &req.breakpoints, req.tol)?;
    Ok(Estimate { value: r.value[0], error: r.error[0] })
}

/// Scalar convenience wrapper returning only the value.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: Tolerances) -> Result<f64> {
    Ok(integrate_n(|t| [f(t)], a, b, breakpoints, tol)?.value[0])
}

/// Integrates `N` functions sharing one set of evaluation points. Each
/// breakpoint-free segment is subdivided adaptively on its own and the
/// segment results are summed in order.
pub fn integrate_n<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerances,
) -> Result<Integral<N>> {
    if !(a < b) {
        if a == b {
            return Ok(Integral { value: [0.0; N], error: [0.0; N], evaluations: 0 });
        }
        return Err(Error::InvalidParam(format!("integration interval [{a}, {b}]")));
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);

    let mut total = Integral { value: [0.0; N], error: [0.0; N], evaluations: 0 };
    for w in cuts.windows(2) {
        let share = Tolerances { rel: tol.rel, abs: tol.abs * (w[1] - w[0]) / (b - a) };
        let seg = adapt(&f, w[0], w[1], share)?;
        for i in 0..N {
            total.value[i] += seg.value[i];
            total.error[i] += seg.error[i];
        }
        total.evaluations += seg.evaluations;
    }
    Ok(total)
}

struct Rule<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

impl<const N: usize> Rule<N> {
    fn worst(&self, tol: &[f64; N]) -> f64 {
        (0..N).map(|i| self.error[i] / tol[i]).fold(0.0, f64::max)
    }
}

fn gk21<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Result<Rule<N>> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = [0.0; N];
    let mut resk = [0.0; N];
    let mut resabs = [0.0; N];
    for i in 0..N {
        resk[i] = WGK[10] * fc[i];
        resabs[i] = resk[i].abs();
    }
    let mut samples = [[[0.0; N]; 2]; 10];
    for (j, s) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        s[0] = f(center - dx);
        s[1] = f(center + dx);
        for i in 0..N {
            let sum = s[0][i] + s[1][i];
            resk[i] += WGK[j] * sum;
            resabs[i] += WGK[j] * (s[0][i].abs() + s[1][i].abs());
            if j % 2 == 1 {
                resg[i] += WG[j / 2] * sum;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * resk[i];
        let mut resasc = WGK[10] * (fc[i] - mean).abs();
        for (j, s) in samples.iter().enumerate() {
            resasc += WGK[j] * ((s[0][i] - mean).abs() + (s[1][i] - mean).abs());
        }
        let scale = half.abs();
        value[i] = resk[i] * half;
        let resabs = resabs[i] * scale;
        let resasc = resasc * scale;
        let mut err = ((resk[i] - resg[i]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        if !value[i].is_finite() || !err.is_finite() {
            return Err(Error::NoConvergence { a, b, error: f64::INFINITY });
        }
        error[i] = err;
    }
    Ok(Rule { a, b, value, error })
}

fn adapt<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64, tol: Tolerances) -> Result<Integral<N>> {
    let mut rules = vec![gk21(f, a, b)?];
    let mut evaluations = 21;
    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for r in &rules {
            for i in 0..N {
                value[i] += r.value[i];
                error[i] += r.error[i];
            }
        }
        let mut target = [0.0; N];
        for i in 0..N {
            target[i] = tol.abs.max(tol.rel * value[i].abs()).max(f64::MIN_POSITIVE);
        }
        if (0..N).all(|i| error[i] <= target[i]) {
            return Ok(Integral { value, error, evaluations });
        }
        let worst_error = (0..N).map(|i| error[i] / target[i]).fold(0.0, f64::max);
        let (idx, _) = rules
            .iter()
            .enumerate()
            .map(|(k, r)| (k, r.worst(&target)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let r = &rules[idx];
        let mid = 0.5 * (r.a + r.b);
        if rules.len() >= MAX_SUBINTERVALS || mid <= r.a || mid >= r.b {
            return Err(Error::NoConvergence { a, b, error: worst_error * target.iter().cloned().fold(0.0, f64::max) });
        }
        let (lo, hi) = (r.a, r.b);
        rules[idx] = gk21(f, lo, mid)?;
        rules.push(gk21(f, mid, hi)?);
        evaluations += 42;
    }
}

/// Richardson-extrapolated limit of `f(t0 ± h)` as `h → 0+`.
pub fn one_sided_limit<F: Fn(f64) -> f64>(f: F, t0: f64, side: Side) -> Result<Estimate> {
    limit(&f, t0, side)
}

fn limit(f: &dyn Fn(f64) -> f64, t0: f64, side: Side) -> Result<Estimate> {
    const K_MIN: i32 = 8;
    const K_MAX: i32 = 24;
    const COLUMNS: usize = 6;
    let sign = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
        Side::Both => {
            let l = limit(f, t0, Side::Left)?;
            let r = limit(f, t0, Side::Right)?;
            if (l.value - r.value).abs() > 10.0 * (l.error + r.error).max(1e-9 * l.value.abs().max(1.0)) {
                return Err(Error::Divergent { t: t0 });
            }
            return Ok(Estimate {
                value: 0.5 * (l.value + r.value),
                error: l.error.max(r.error) + 0.5 * (l.value - r.value).abs(),
            });
        }
    };
    let rows: Vec<f64> = (K_MIN..=K_MAX).map(|k| f(t0 + sign * 2f64.powi(-k))).collect();
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergent { t: t0 });
    }
    // Neville tableau in h with h halving at each row.
    let mut prev = rows.clone();
    let mut best = Estimate { value: rows[rows.len() - 1], error: (rows[rows.len() - 1] - rows[rows.len() - 2]).abs() };
    for j in 1..=COLUMNS {
        let factor = 2f64.powi(j as i32);
        let next: Vec<f64> = (1..prev.len()).map(|i| prev[i] + (prev[i] - prev[i - 1]) / (factor - 1.0)).collect();
        for i in 0..next.len() {
            let diff = (next[i] - prev[i + 1]).abs();
            if diff < best.error {
                best = Estimate { value: next[i], error: diff };
            }
        }
        if next.len() < 2 {
            break;
        }
        prev = next;
    }
    if best.error > 1e-6 * best.value.abs().max(1.0) {
        return Err(Error::Divergent { t: t0 });
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    /// Evaluates `f` at both ends and checks the sign certificate.
    pub fn new<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64) -> Result<Self> {
        let f_lo = f(lo)?;
        let f_hi = f(hi)?;
        Self::from_values(lo, hi, f_lo, f_hi)
    }

    pub fn from_values(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || !(f_lo * f_hi < 0.0) {
            return Err(Error::InvalidBracket { lo, hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub root: f64,
    pub value: f64,
    pub bracket: RootBracket,
}

/// Midpoint bisection down to a bracket of width at most `tol`.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, bracket: RootBracket, tol: f64) -> Result<Root> {
    let mut b = RootBracket::from_values(bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi)?;
    let tol = tol.max(f64::EPSILON * b.lo.abs().max(b.hi.abs()));
    while b.width() > tol {
        let mid = 0.5 * (b.lo + b.hi);
        if mid <= b.lo || mid >= b.hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Root { root: mid, value: 0.0, bracket: b });
        }
        if fm.is_nan() {
            return Err(Error::InvalidBracket { lo: b.lo, hi: b.hi });
        }
        if (fm < 0.0) == (b.f_lo < 0.0) {
            b.lo = mid;
            b.f_lo = fm;
        } else {
            b.hi = mid;
            b.f_hi = fm;
        }
    }
    let root = 0.5 * (b.lo + b.hi);
    let value = if b.f_lo.abs() < b.f_hi.abs() { b.f_lo } else { b.f_hi };
    Ok(Root { root, value, bracket: b })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdCheck {
    pub analytic: f64,
    pub numeric: f64,
    /// `|analytic - numeric| / max(|analytic|, 1)`.
    pub relative_error: f64,
}

/// Compares a jet derivative against Richardson-extrapolated central
/// differences taken inside the smooth piece containing `t`.
pub fn fd_check<F: JetFunction + ?Sized>(f: &F, t: f64, order: usize) -> Result<FdCheck> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidParam(format!("fd_check order {order}")));
    }
    let analytic = f.jet(t, order, Side::Both)?.derivative(order);
    let lo = match f.variable() {
        Variable::Cosine => 0.0,
        Variable::Sine => SINE_EPSILON,
    };
    let mut room = (t - lo).min(1.0 - t);
    for bp in f.breakpoints() {
        if (bp - t).abs() > 0.0 {
            room = room.min((bp - t).abs());
        }
    }
    if !(room > 0.0) {
        return Err(Error::InvalidParam(format!("t = {t} is not interior to a smooth piece")));
    }
    let h0 = (0.5 * room).min(0.05);
    let value = |x: f64| f.jet(x, 0, Side::Both).map(|j| j.value());
    let f0 = value(t)?;
    const LEVELS: usize = 10;
    let mut rows = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let h = h0 / 2f64.powi(k as i32);
        let (fp, fm) = (value(t + h)?, value(t - h)?);
        rows.push(match order {
            1 => (fp - fm) / (2.0 * h),
            _ => (fp - 2.0 * f0 + fm) / (h * h),
        });
    }
    // even error expansion in h: ratios 4^j
    let mut prev = rows.clone();
    let mut numeric = rows[LEVELS - 1];
    let mut best = f64::INFINITY;
    for j in 1..LEVELS {
        let factor = 4f64.powi(j as i32);
        let next: Vec<f64> = (1..prev.len()).map(|i| prev[i] + (prev[i] - prev[i - 1]) / (factor - 1.0)).collect();
        for i in 0..next.len() {
            let diff = (next[i] - prev[i + 1]).abs();
            if diff < best {
                best = diff;
                numeric = next[i];
            }
        }
        if next.len() < 2 {
            break;
        }
        prev = next;
    }
    Ok(FdCheck { analytic, numeric, relative_error: (analytic - numeric).abs() / analytic.abs().max(1.0) })
}
