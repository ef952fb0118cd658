//! One test per acceptance item. Each collects every sub-check and reports
//! all failures together.

use std::f64::consts::{E, FRAC_1_SQRT_2, PI};
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use ibz_core::calculus::{one_sided_limit, Tolerances};
use ibz_core::criteria::{self, cor6_check, prop1_check, prop4_check, CriteriaConfig, Criterion, PoleQuantities};
use ibz_core::families::{self, Family, FamilySpec, FAMILIES};
use ibz_core::oracle::compare_ratios;
use ibz_core::profile::{var, Expr};
use ibz_core::transform::{box_operator, forward_radon, inverse_radon, obstruction_field, Obstruction};
use ibz_core::{BodyOfRevolution, JetFunction, Piece, RadialProfile, Side, Verdict};

#[derive(Default)]
struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, abs: f64) {
        self.check((got - want).abs() <= abs, format!("{what}: got {got:.15e}, want {want:.15e} (abs {abs:e})"));
    }

    fn rel(&mut self, what: &str, got: f64, want: f64, rel: f64) {
        self.check(
            (got - want).abs() <= rel * want.abs(),
            format!("{what}: got {got:.15e}, want {want:.15e} (rel {rel:e})"),
        );
    }

    fn finish(self) {
        assert!(self.failures.is_empty(), "failed checks:\n  {}", self.failures.join("\n  "));
    }
}

fn profile(family: Family) -> RadialProfile {
    FamilySpec::new(family, 4).profile().unwrap()
}

fn with_param(family: Family, name: &str, value: f64) -> RadialProfile {
    FamilySpec::new(family, 4).with(name, value).profile().unwrap()
}

#[test]
fn accept_01_cyl_caps_prop1() {
    let mut c = Checks::default();
    let p = profile(Family::CylCaps);
    let r = prop1_check(&p).unwrap();
    c.close("int rho^3", r.intermediates["int_rho3"], 5.0 / 16.0, 1e-10);
    c.check(
        r.intermediates["flat_top_value"] == 2.0,
        format!("rho(1)+rho'(1) = {}", r.intermediates["flat_top_value"]),
    );
    c.check(r.verdict == Verdict::NotPolarZonoid, format!("verdict {:?}", r.verdict));
    c.finish();
}

#[test]
fn accept_02_three_bodies_cor6() {
    let mut c = Checks::default();

    let cyl = profile(Family::Cylinder);
    let q = PoleQuantities::compute(&cyl, Tolerances::default()).unwrap();
    c.close("cylinder h(1)", q.h, 0.5 + 3.0 * PI / 32.0, 1e-10);
    c.close("cylinder k(1)", q.k, 5.0 / 6.0, 1e-10);
    let r = cor6_check(&cyl).unwrap();
    c.check(r.verdict == Verdict::Inconclusive, format!("cylinder cor6 verdict {:?}", r.verdict));

    let l = profile(Family::ThreeBodiesL);
    let q = PoleQuantities::compute(&l, Tolerances::default()).unwrap();
    c.rel("L h(1)", q.h, 44239925.0 / 3879876.0, 1e-8);
    c.rel("L k(1)", q.k, 30712575.0 / 14872858.0, 1e-8);
    let r = cor6_check(&l).unwrap();
    c.check(r.verdict == Verdict::NotPolarZonoid, format!("L cor6 verdict {:?}", r.verdict));

    let e = profile(Family::ExpDecay);
    let q = PoleQuantities::compute(&e, Tolerances::default()).unwrap();
    let e5 = E.powi(-5);
    c.rel("E h(1)", q.h, (23.0 + 12.0 * e5) / 125.0, 1e-10);
    c.rel("E k(1)", q.k, (2.0 - 37.0 * e5) / 125.0, 1e-10);
    let r = cor6_check(&e).unwrap();
    c.check(r.verdict == Verdict::NotPolarZonoid, format!("E cor6 verdict {:?}", r.verdict));
    c.finish();
}

/// `w(M)` built from the printed closed form of `∫ρ_M³`.
fn w_printed(m: f64) -> f64 {
    let s = (m * m - 1.0).sqrt();
    let rho1 = 1.0 + m - s;
    let flat = 2.0 * (1.0 + m) * (m - s) / m;
    2.0 * rho1.powi(4) - 3.0 * families::km_cube_integral_printed(m) * flat
}

#[test]
fn accept_03_km_family_w() {
    let mut c = Checks::default();
    for m in [1.5, 2.0, 5.0] {
        let w = families::w_of_m(m).unwrap();
        c.rel(&format!("w({m}) vs printed closed form"), w, w_printed(m), 1e-8);
    }
    let grid = families::uniform_grid(1.0, 3.0, 201);
    let spec = FamilySpec::new(Family::CylCapsKM, 4);
    let s = families::sweep(&spec, "M", &grid, Criterion::Prop1, &Default::default()).unwrap();
    let roots: Vec<f64> = s.roots.iter().map(|r| r.root).collect();
    c.check(roots.len() == 2, format!("roots {roots:?}"));
    if roots.len() == 2 {
        c.check(roots[0] > 1.01942 && roots[0] < 1.01943, format!("first root {}", roots[0]));
        c.check(roots[1] > 1.31290 && roots[1] < 1.31291, format!("second root {}", roots[1]));
    }
    c.close("w(1e6)", families::w_of_m(1e6).unwrap(), 2.0, 1e-3);
    c.finish();
}

#[test]
fn accept_04_octagon_family() {
    let mut c = Checks::default();
    for i in 1..=100 {
        let b = i as f64 / 100.0;
        let (h, k) = families::appendix_b_integrals(b).unwrap();
        let (h_closed, k_closed) =
            ((1.0 + 5.0 * b - b.powi(5)) / 4.0, (1.0 + 5.0 * b + 10.0 * b * b - 5.0 * b.powi(4) - b.powi(5)) / 12.0);
        c.close(&format!("h(1) at b={b}"), h, h_closed, 1e-10);
        c.close(&format!("k(1) at b={b}"), k, k_closed, 1e-10);
    }
    let spec = FamilySpec::new(Family::OctagonKb, 6);
    let grid = families::uniform_grid(0.01, 1.0, 100);
    let s = families::sweep(&spec, "b", &grid, Criterion::Cor6, &Default::default()).unwrap();
    c.check(s.roots.len() == 1, format!("roots {:?}", s.roots));
    let b0 = s.roots.first().map_or(f64::NAN, |r| r.root);
    c.close("b0", b0, 0.826279, 1e-5);
    for p in &s.points {
        let want = if p.param < b0 { Verdict::NotPolarZonoid } else { Verdict::Inconclusive };
        c.check(p.verdict == want, format!("b = {}: {:?}", p.param, p.verdict));
    }
    c.finish();
}

fn appendix_c_pieces(t: f64) -> [f64; 4] {
    let t2 = t * t;
    if t < FRAC_1_SQRT_2 {
        let u = 1.0 - t2;
        [
            (6.0 - 24.0 * t2 + 16.0 * t2 * t2) / u.powf(1.5),
            -(2.0 * t * (15.0 - 20.0 * t2 + 8.0 * t2 * t2)) / u.powf(2.5),
            -30.0 / u.powf(3.5),
            0.0,
        ]
    } else {
        let d = 3.0 - 16.0 * t2 + 28.0 * t2 * t2;
        let poly = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &a| acc * t2 + a);
        let g = 256.0 * t.powi(5) * poly(&[27.0, -192.0, 510.0, -672.0, 392.0]) / d.powi(3);
        let f1 = poly(&[405.0, -3600.0, 11550.0, -19776.0, 26208.0, -25088.0, 10976.0]);
        let f2 = poly(&[81.0, -648.0, 432.0, 6912.0, -16848.0, 9856.0]);
        let field = 46080.0 * t.powi(3) * poly(&[27.0, -270.0, 720.0, 240.0, -2800.0, 2208.0]) / d.powi(5);
        [g, 256.0 * t.powi(4) * f1 / d.powi(4), 15360.0 * t.powi(3) * f2 / d.powi(5), field]
    }
}

#[test]
fn accept_05_cylinder_dim6_field() {
    let mut c = Checks::default();
    let body = BodyOfRevolution::new(6, profile(Family::Cylinder)).unwrap();
    let o = Obstruction::new(&body).unwrap();
    let g = o.g();
    let s = FRAC_1_SQRT_2;
    let mut ts: Vec<(f64, Side)> = Vec::new();
    for i in 0..100 {
        let a = 0.01 + (s - 1e-3 - 0.01) * i as f64 / 99.0;
        let b = s + 1e-3 + (1.0 - s - 1e-3) * i as f64 / 99.0;
        ts.push((a, Side::Left));
        ts.push((b, Side::Right));
    }
    let mut worst = [0.0f64; 3];
    for &(t, side) in &ts {
        let j = g.jet(t, 2, side).unwrap().derivatives();
        let want = appendix_c_pieces(t);
        for k in 0..3 {
            let err = (j[k] - want[k]).abs() / want[k].abs().max(f64::MIN_POSITIVE);
            worst[k] = worst[k].max(err);
        }
        let field = o.value(t, side).unwrap();
        if t < s {
            c.check(field.abs() <= 1e-7, format!("field({t}) = {field} on the first piece"));
        } else {
            c.check(
                (field - want[3]).abs() <= 1e-8 * want[3].abs().max(1.0),
                format!("field({t}) = {field}, closed form {}", want[3]),
            );
        }
    }
    for (k, name) in ["g", "g'", "g''"].iter().enumerate() {
        c.check(worst[k] <= 1e-8, format!("{name} worst relative error {:e}", worst[k]));
    }

    let dg = |t: f64| g.jet(t, 1, Side::Both).map(|j| j.derivative(1)).unwrap_or(f64::NAN);
    let left = one_sided_limit(dg, s, Side::Left).unwrap().value;
    let right = one_sided_limit(dg, s, Side::Right).unwrap().value;
    c.close("g'(1/sqrt2-)", left, -56.0, 1e-6);
    c.close("g'(1/sqrt2+)", right, 184.0, 1e-6);
    c.close("jump c", right - left, 240.0, 1e-6);

    let f = o.evaluate_default().unwrap();
    c.check(f.min_value < 0.0, format!("field minimum {}", f.min_value));
    let at_one = o.value(1.0, Side::Left).unwrap();
    c.check(at_one > 0.0, format!("field(1) = {at_one}"));
    c.check(f.atoms.len() == 1, format!("atoms {:?}", f.atoms));
    if let Some(a) = f.atoms.first() {
        c.close("atom location", a.t, s, 1e-12);
        c.close("atom weight", a.weight, 120.0, 1e-6);
    }
    c.check(f.verdict == Verdict::NotPolarZonoid, format!("verdict {:?}", f.verdict));
    c.finish();
}

#[test]
fn accept_06_lp_threshold() {
    let mut c = Checks::default();
    for (p, want) in [(9.5, Verdict::NotPolarZonoid), (9.6, Verdict::Inconclusive)] {
        let r = cor6_check(&with_param(Family::LpRevolution, "p", p)).unwrap();
        c.check(r.verdict == want, format!("p = {p}: {:?} (margin {:e})", r.verdict, r.margin));
    }
    c.finish();
}

#[test]
fn accept_07_ball_negative_control() {
    let mut c = Checks::default();
    let ball = profile(Family::Ball);
    c.check(prop1_check(&ball).unwrap().verdict == Verdict::Inconclusive, "ball prop1");
    c.check(prop4_check(&ball).unwrap().verdict == Verdict::Inconclusive, "ball prop4");
    let f = obstruction_field(&BodyOfRevolution::new(4, ball).unwrap(), None).unwrap();
    c.check(f.verdict == Verdict::Inconclusive, format!("ball field verdict {:?}", f.verdict));
    let worst = f.samples.iter().map(|s| (s.value - 3.0).abs()).fold(0.0, f64::max);
    c.check(worst <= 1e-9, format!("ball field deviates from 3 by {worst:e}"));
    c.check(f.atoms.is_empty(), "ball field has atoms");
    c.finish();
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

fn run(c: &mut Checks, name: &str, result: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) {
    if let Err(e) = result {
        c.failures.push(format!("{name}: {e}"));
    }
}

/// `exp(a t + b t² + c t³)`, smooth and positive on `[0, 1]`.
fn smooth_profile(a: f64, b: f64, cc: f64) -> RadialProfile {
    let t = var();
    RadialProfile::single((a * t.clone() + b * t.clone() * t.clone() + cc * t.clone() * t.clone() * t).exp()).unwrap()
}

fn perturbed_l(a: f64, k: i32, b: f64, e: f64) -> RadialProfile {
    let s = FRAC_1_SQRT_2;
    let base = profile(Family::ThreeBodiesL);
    let first = base.pieces()[0].expr.clone();
    let dip: Expr = 1.0 - a * ((s - var()) / s).pow(k as f64);
    let d = (var() - s) * (var() - s) * (1.0 - var()) * (1.0 - var());
    let bump = b * d.clone() + e * d * (1.0 - var());
    RadialProfile::new(vec![Piece::new(0.0, s, first * dip), Piece::new(s, 1.0, 1.0 / var() + bump)]).unwrap()
}

#[test]
fn accept_08_property_suites() {
    let mut c = Checks::default();

    run(
        &mut c,
        "box kernel",
        runner(200).run(
            &(-5.0f64..5.0, -5.0f64..5.0, 0.0f64..=1.0, prop::sample::select(vec![3usize, 4, 5, 6, 8])),
            |(alpha, beta, t, n)| {
                let g = RadialProfile::single(alpha + 10.0 + beta * var()).unwrap();
                let v = box_operator(&g, n, t, Side::Left).unwrap();
                prop_assert!((v - (n as f64 - 1.0) * (alpha + 10.0)).abs() <= 1e-9);
                Ok(())
            },
        ),
    );

    run(
        &mut c,
        "radon round trip",
        runner(12).run(
            &(-1.0f64..1.0, -1.0f64..1.0, -0.5f64..0.5, prop::sample::select(vec![4usize, 6])),
            |(a, b, cc, n)| {
                let q = smooth_profile(a, b, cc);
                let kappa = if n == 4 { 1.0 } else { 6.0 };
                let f = forward_radon(&q, n).unwrap();
                let g = inverse_radon(&f, n).unwrap();
                for i in 0..50 {
                    let t = 0.05 + 0.9 * i as f64 / 49.0;
                    let got = g.value(t).unwrap() / kappa;
                    let want = q.eval(t);
                    prop_assert!((got - want).abs() <= 1e-6 * want.abs(), "n={n} t={t}: {got} vs {want}");
                }
                Ok(())
            },
        ),
    );

    let config = CriteriaConfig::default();
    for family in FAMILIES {
        for dim in [4, 6] {
            let base = FamilySpec::new(family, dim).profile().unwrap();
            let mut criteria_list = vec![Criterion::for_dimension(dim).unwrap()];
            if dim == 6 && criteria::flat_top_check(&base).flat {
                criteria_list.push(Criterion::Cor6);
            }
            for crit in criteria_list {
                let v0 = criteria::check(&base, crit, &config).map(|r| r.verdict);
                for lambda in [0.5, 2.0, 10.0] {
                    let scaled = FamilySpec::new(family, dim).with("scale", lambda).profile().unwrap();
                    let v = criteria::check(&scaled, crit, &config).map(|r| r.verdict);
                    c.check(
                        v.as_ref().ok() == v0.as_ref().ok() && v.is_ok() == v0.is_ok(),
                        format!(
                            "scale {lambda} changes {} verdict for {}: {v0:?} vs {v:?}",
                            crit.name(),
                            family.name()
                        ),
                    );
                }
            }
        }
    }

    run(
        &mut c,
        "vamos numerator sign",
        runner(50).run(&(-1.5f64..1.5, -1.5f64..1.5, -1.0f64..1.0), |(a, b, cc)| {
            let p = smooth_profile(a, b, cc);
            let q = PoleQuantities::compute(&p, Tolerances::default()).unwrap();
            let num = criteria::vamos_numerator(&p).unwrap();
            let margin = q.nc6_margin();
            prop_assert!(num.signum() == margin.signum(), "numerator {num} vs margin {margin}");
            Ok(())
        }),
    );

    run(
        &mut c,
        "monotone perturbation of L",
        runner(40).run(&(0.0f64..0.9, 1i32..=3, 0.0f64..20.0, 0.0f64..20.0), |(a, k, b, e)| {
            let p = perturbed_l(a, k, b, e);
            let r = cor6_check(&p).unwrap();
            prop_assert_eq!(r.verdict, Verdict::NotPolarZonoid, "margin {}", r.margin);
            Ok(())
        }),
    );
    c.finish();
}

#[test]
fn accept_09_monte_carlo_oracle() {
    let mut c = Checks::default();
    let start = Instant::now();
    let phis = [PI / 2.0, PI / 4.0, PI / 6.0];
    for (family, dim) in [(Family::Ball, 4), (Family::Ball, 6), (Family::Cylinder, 6), (Family::CylCaps, 4)] {
        let body = BodyOfRevolution::new(dim, profile(family)).unwrap();
        let report = compare_ratios(&body, &phis, 1_000_000, 2024).unwrap();
        for r in &report.ratios {
            c.check(r.within, format!("{} dim {dim} phi {}: z = {}", family.name(), r.phi, r.z));
        }
    }
    let cyl = BodyOfRevolution::new(6, profile(Family::Cylinder)).unwrap();
    let radial = ibz_core::transform::intersection_radial(&cyl).unwrap();
    let ratio = radial.value(1.0).unwrap() / radial.value(FRAC_1_SQRT_2).unwrap();
    c.rel("cylinder rho_IC(1)/rho_IC(1/sqrt2)", ratio, (15.0 / 8.0) / 2f64.sqrt(), 1e-10);
    let elapsed = start.elapsed().as_secs_f64();
    c.check(elapsed <= 120.0, format!("runtime {elapsed:.1}s"));
    c.finish();
}
