//! Brute-force cross-checks: Monte Carlo central sections, a negativity
//! search over the obstruction field, and finite-difference audits of every
//! jet in the pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{fd_check, FdCheck};
use crate::error::{Error, Result};
use crate::profile::{BodyOfRevolution, JetFunction, Side, SINE_EPSILON};
use crate::transform::{default_grid, intersection_radial, Obstruction, NEGATIVITY_TOL};

pub const MIN_SAMPLES: usize = 10_000;
const BATCH: usize = 1 << 15;
const RADIUS_SCAN: usize = 10_000;
/// Acceptance band in standard errors.
pub const SIGMA_BAND: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectionEstimate {
    /// Angle between the section's normal and the axis.
    pub phi: f64,
    pub samples: usize,
    pub seed: u64,
    pub bounding_radius: f64,
    pub volume: f64,
    pub std_error: f64,
}

/// Largest radius over a uniform scan of `[0, 1]` and the breakpoints, plus 1%.
pub fn bounding_radius(body: &BodyOfRevolution) -> f64 {
    let p = body.profile();
    let scan = (0..=RADIUS_SCAN).map(|i| i as f64 / RADIUS_SCAN as f64);
    scan.chain(p.breakpoints()).map(|t| p.eval(t)).fold(0.0, f64::max) * 1.01
}

fn unit_ball_volume(d: usize) -> f64 {
    // V_d = π^{d/2} / Γ(d/2 + 1), by the two-step recurrence
    let mut v = [1.0, 2.0];
    for k in 2..=d {
        let next = v[(k - 2) % 2] * 2.0 * std::f64::consts::PI / k as f64;
        v[k % 2] = next;
    }
    v[d % 2]
}

/// Monte Carlo `(n-1)`-volume of `K ∩ ξ⊥` with `ξ = (sin φ, 0, …, 0, cos φ)`,
/// sampling uniformly in a ball of the hyperplane. Batches use independent
/// streams of one seeded generator, so the result does not depend on the
/// number of worker threads.
pub fn mc_section_volume(body: &BodyOfRevolution, phi: f64, samples: usize, seed: u64) -> Result<SectionEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { min: MIN_SAMPLES, got: samples });
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&phi) {
        return Err(Error::InvalidParam(format!("phi = {phi} outside [0, pi/2]")));
    }
    let n = body.dimension();
    let d = n - 1;
    let radius = bounding_radius(body);
    let (sin_phi, _) = phi.sin_cos();
    let profile = body.profile();
    let batches = samples.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BATCH.min(samples - b * BATCH);
            let mut coords = vec![0.0f64; d];
            let mut hits = 0u64;
            for _ in 0..count {
                let mut norm2 = 0.0;
                for c in coords.iter_mut() {
                    *c = rng.sample(StandardNormal);
                    norm2 += *c * *c;
                }
                let u: f64 = rng.random();
                let r = radius * u.powf(1.0 / d as f64);
                // coords[0] runs along (cos φ, 0, …, 0, -sin φ); the rest are
                // the axes e_2, …, e_{n-1}, all orthogonal to the axis.
                let scale = r / norm2.sqrt();
                let along_axis = (coords[0] * scale * sin_phi).abs();
                if along_axis <= r && profile.eval((along_axis / r).min(1.0)) >= r {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let total = unit_ball_volume(d) * radius.powi(d as i32);
    Ok(SectionEstimate {
        phi,
        samples,
        seed,
        bounding_radius: radius,
        volume: total * p,
        std_error: total * (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioCheck {
    pub phi: f64,
    pub reference_phi: f64,
    pub monte_carlo: f64,
    pub sigma: f64,
    pub predicted: f64,
    /// `(monte_carlo - predicted) / sigma`.
    pub z: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub dimension: usize,
    pub samples: usize,
    pub seed: u64,
    pub estimates: Vec<SectionEstimate>,
    pub ratios: Vec<RatioCheck>,
    pub all_within: bool,
}

impl OracleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn derived_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Compares section-volume ratios against `ρ_IK(sin φ) / ρ_IK(sin φ₀)` with
/// `φ₀ = phis[0]`.
pub fn compare_ratios(body: &BodyOfRevolution, phis: &[f64], samples: usize, seed: u64) -> Result<OracleReport> {
    if phis.len() < 2 {
        return Err(Error::InvalidParam("need at least two directions".into()));
    }
    let radial = intersection_radial(body)?;
    let estimates = phis
        .iter()
        .enumerate()
        .map(|(i, &phi)| mc_section_volume(body, phi, samples, derived_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let predicted = |phi: f64| radial.value(phi.sin().max(SINE_EPSILON));
    let reference = &estimates[0];
    let p0 = predicted(reference.phi)?;
    let mut ratios = Vec::with_capacity(estimates.len() - 1);
    for e in &estimates[1..] {
        let mc = e.volume / reference.volume;
        let sigma = mc * ((e.std_error / e.volume).powi(2) + (reference.std_error / reference.volume).powi(2)).sqrt();
        let pred = predicted(e.phi)? / p0;
        let z = (mc - pred) / sigma;
        ratios.push(RatioCheck {
            phi: e.phi,
            reference_phi: reference.phi,
            monte_carlo: mc,
            sigma,
            predicted: pred,
            z,
            within: z.abs() <= SIGMA_BAND,
        });
    }
    Ok(OracleReport {
        dimension: body.dimension(),
        samples,
        seed,
        all_within: ratios.iter().all(|r| r.within),
        estimates,
        ratios,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Continuous,
    LeftLimit,
    Atom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub value: f64,
    pub kind: WitnessKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignScan {
    /// A point where the field is negative; `None` is not a proof of positivity.
    pub witness: Option<Witness>,
    pub min_value: f64,
    pub min_location: f64,
    pub threshold: f64,
    pub levels_used: usize,
    pub evaluations: usize,
}

const COARSE_POINTS: usize = 200;
const ZOOM_POINTS: usize = 50;

/// Coarse scan of the field, then repeated zooms around its minimum.
pub fn field_sign_scan(body: &BodyOfRevolution, levels: usize) -> Result<SignScan> {
    let o = Obstruction::new(body)?;
    let atoms = o.atoms()?;
    let coarse = o.evaluate(&default_grid(&o.breakpoints(), COARSE_POINTS))?;
    let threshold = NEGATIVITY_TOL * coarse.max_abs;
    let mut evaluations = coarse.samples.len();
    let breakpoints = o.breakpoints();
    // Prefers a negative value away from breakpoints over a one-sided one.
    let best_of = |samples: &[crate::transform::FieldSample]| {
        let min = |interior: bool| {
            samples
                .iter()
                .copied()
                .filter(|s| !interior || !breakpoints.contains(&s.t))
                .min_by(|a, b| a.value.total_cmp(&b.value))
        };
        match min(true) {
            Some(s) if s.value < -threshold => s,
            _ => min(false).expect("non-empty grid"),
        }
    };
    let mut best = best_of(&coarse.samples);
    let mut levels_used = 0;
    let mut grid = coarse.grid();
    while best.value >= -threshold && levels_used < levels {
        let i = grid.iter().position(|&t| t == best.t).expect("minimum comes from the grid");
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        grid = (0..ZOOM_POINTS).map(|k| lo + (hi - lo) * k as f64 / (ZOOM_POINTS - 1) as f64).collect();
        let samples: Vec<_> =
            grid.par_iter().map(|&t| o.samples_at(t)).collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
        evaluations += samples.len();
        let b = best_of(&samples);
        if b.value < best.value {
            best = b;
        }
        levels_used += 1;
    }
    let mut witness = (best.value < -threshold).then_some(Witness {
        t: best.t,
        value: best.value,
        kind: if best.is_left_limit { WitnessKind::LeftLimit } else { WitnessKind::Continuous },
    });
    if witness.is_none() {
        if let Some(a) = atoms.iter().find(|a| a.weight < -threshold) {
            witness = Some(Witness { t: a.t, value: a.weight, kind: WitnessKind::Atom });
        }
    }
    Ok(SignScan { witness, min_value: best.value, min_location: best.t, threshold, levels_used, evaluations })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeAudit {
    pub stage: &'static str,
    pub checks: Vec<FdCheck>,
    pub max_relative_error: f64,
}

/// Finite-difference checks of first and second derivatives of `ρ`, `ρ_IK`
/// and `g = R⁻¹(1/ρ_IK)` at `points` interior points of every smooth piece.
pub fn derivative_audit(body: &BodyOfRevolution, points: usize) -> Result<Vec<DerivativeAudit>> {
    let o = Obstruction::new(body)?;
    let profile = body.profile();
    let mut cuts = vec![0.0];
    cuts.extend(profile.breakpoints());
    cuts.push(1.0);
    let interior: Vec<f64> = cuts
        .windows(2)
        .flat_map(|w| {
            let (a, b) = (w[0].max(0.02), w[1].min(0.98));
            (1..=points).map(move |i| a + (b - a) * i as f64 / (points + 1) as f64)
        })
        .collect();
    let audit = |stage: &'static str, f: &dyn JetFunction| -> Result<DerivativeAudit> {
        let checks = interior
            .par_iter()
            .flat_map_iter(|&t| [1, 2].into_iter().map(move |k| (t, k)))
            .map(|(t, k)| fd_check(f, t, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(DerivativeAudit {
            stage,
            max_relative_error: checks.iter().map(|c| c.relative_error).fold(0.0, f64::max),
            checks,
        })
    };
    Ok(vec![audit("profile", profile)?, audit("intersection_radial", o.radial())?, audit("inverse_radon", o.g())?])
}

/// Value of the field's continuous part, left-sided at breakpoints.
pub fn field_value(body: &BodyOfRevolution, t: f64) -> Result<f64> {
    Obstruction::new(body)?.value(t, Side::Left)
}
