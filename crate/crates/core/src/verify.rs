//! Named invariant checks run by `sos-ggm verify` and by the test suite.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary_law::{
    build_p, build_q, build_u, psi_k, residual_scale, residuals, solve_generic, solve_k3,
    ModelParams, PairKind,
};
use crate::error::{Error, Result};
use crate::external_field::{
    self, branch_sum, enumerate_measure_candidates, residuals_abd, solve_k2_uniform, Branch,
    FieldParams,
};
use crate::ggm::{
    boundary_law_from_field, boundary_law_from_pair, build_window, check_consistency, kernel_prob,
    marginal_from_outer, mixed_measure, normalisability_probe, pinned_measure, series_sums,
    transition_kernel, truncated_tails, Normalisability, PeriodicBoundaryLaw, Pin,
};
use crate::phase_diagram::scan_tau;
use crate::polyroots::{
    isolate_positive_roots, solve_cubic, solve_quartic_ferrari, RealPolynomial,
};

type Check = fn(&mut ChaCha8Rng) -> std::result::Result<String, String>;

/// Every check with its name, in run order.
pub const CHECKS: &[(&str, Check)] = &[
    ("factorization", factorization),
    ("descartes", descartes),
    ("root_residuals", root_residuals),
    ("cubic", cubic),
    ("quartic", quartic),
    ("solution_residuals", solution_residuals),
    ("dual_solver", dual_solver),
    ("psi_minimum", psi_minimum),
    ("swap_symmetry", swap_symmetry),
    ("q_root_product", q_root_product),
    ("k3_counts", k3_counts),
    ("field_residuals", field_residuals),
    ("field_zero_field", field_zero_field),
    ("field_count_bound", field_count_bound),
    ("table_normalisation", table_normalisation),
    ("measure_consistency", measure_consistency),
    ("kernel", kernel),
    ("law_consistency", law_consistency),
    ("series_truncation", series_truncation),
    ("normalisability", normalisability),
    ("scan_monotone", scan_monotone),
    ("scan_determinism", scan_determinism),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Runs the named checks (all when `only` is empty). Each check gets its own RNG
/// seeded from `seed` so results do not depend on which checks were selected.
pub fn run_checks(only: &[String], seed: u64) -> Result<Vec<CheckOutcome>> {
    if let Some(bad) = only.iter().find(|n| !CHECKS.iter().any(|(c, _)| c == n)) {
        return Err(Error::InvalidParameter(format!("unknown check {bad:?}")));
    }
    Ok(CHECKS
        .iter()
        .enumerate()
        .filter(|(_, (name, _))| only.is_empty() || only.iter().any(|o| o == name))
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let start = Instant::now();
            let outcome = check(&mut rng);
            let seconds = start.elapsed().as_secs_f64();
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome {
                name,
                passed,
                detail,
                seconds,
            }
        })
        .collect())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

fn random_rational_tau(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> BigRational {
    let q: i64 = rng.gen_range(1..=60);
    let p: i64 = rng.gen_range(lo * q + 1..hi * q);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// τ values in (lo, hi) at least `gap` away from every listed transition.
fn sample_taus(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: f64,
    hi: f64,
    avoid: &[f64],
    gap: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t = rng.gen_range(lo..hi);
        if avoid.iter().all(|a| (t - a).abs() > gap) {
            out.push(t);
        }
    }
    out
}

const K3_TRANSITIONS: [f64; 4] = [2.994_28, 3.0, 4.0, 4.242_640_687_119_285];

fn factorization(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut n = 0;
    for k in 2..=4 {
        for _ in 0..20 {
            let tau = random_rational_tau(rng, 2, 12);
            let params = ModelParams::exact(k, tau.clone()).map_err(e2s)?;
            let p = build_p(&params);
            let (quot, rem) = p.divide_exact(&build_q(&params)).map_err(e2s)?;
            ensure(rem.is_zero(), || {
                format!("k={k} tau={tau}: nonzero remainder")
            })?;
            let u = build_u(&params);
            ensure(quot == -&u, || {
                format!("k={k} tau={tau}: quotient differs from -U")
            })?;
            n += 1;
        }
    }
    Ok(format!("{n} exact divisions with zero remainder"))
}

fn descartes(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..200 {
        let deg = rng.gen_range(1..=9);
        let c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-20..=20)).collect();
        let p = RealPolynomial::from_i64s(&c);
        if p.is_zero() {
            continue;
        }
        let count = isolate_positive_roots(&p, 1e-12).map_err(e2s)?.count;
        ensure(count <= p.descartes_bound(), || {
            format!("{c:?}: {count} roots")
        })?;
    }
    for k in 2..=4 {
        for tau in sample_taus(rng, 10, 2.05, 12.0, &[], 0.0) {
            let u = build_u(&ModelParams::new(k, tau).map_err(e2s)?);
            let count = isolate_positive_roots(&u, 1e-12).map_err(e2s)?.count;
            ensure(count <= u.descartes_bound(), || {
                format!("U k={k} tau={tau}")
            })?;
        }
    }
    Ok("200 random integer polynomials and 30 U polynomials".into())
}

fn root_residuals(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let tol = 1e-12;
    let mut worst: f64 = 0.0;
    for k in 2..=4 {
        for tau in sample_taus(rng, 10, 2.05, 12.0, &[], 0.0) {
            let params = ModelParams::new(k, tau).map_err(e2s)?;
            for p in [build_q(&params), build_u(&params)] {
                let bound = tol * (1.0 + p.abs_coeff_sum());
                for r in isolate_positive_roots(&p, tol).map_err(e2s)?.roots {
                    // Scale by |x|^deg so roots far from 1 are judged relative to their size.
                    let scale = r.value.abs().max(1.0).powi(p.degree() as i32);
                    let v = p.evaluate(r.value).abs();
                    worst = worst.max(v / (bound * scale));
                    ensure(v <= bound * scale, || {
                        format!("k={k} tau={tau} x={} p={v}", r.value)
                    })?;
                }
            }
        }
    }
    Ok(format!("worst |p(x)| / bound = {worst:.3e}"))
}

fn cubic(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    use crate::polyroots::DiscriminantCase;
    for _ in 0..500 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        if c[0].abs() < 0.1 {
            continue;
        }
        let sol = solve_cubic(c[0], c[1], c[2], c[3]).map_err(e2s)?;
        let distinct = sol.roots.len();
        let want = match sol.case {
            DiscriminantCase::OneReal => 1,
            DiscriminantCase::Repeated => 2,
            DiscriminantCase::ThreeReal => 3,
        };
        ensure(distinct == want || (want == 2 && distinct == 1), || {
            format!("{c:?}: case mismatch")
        })?;
        for x in sol.values() {
            let v = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
            let scale = c[0].abs() * x.abs().powi(3)
                + c[1].abs() * x * x
                + c[2].abs() * x.abs()
                + c[3].abs();
            ensure(v.abs() < 1e-12 * scale.max(1.0), || {
                format!("{c:?}: residual {v} at {x}")
            })?;
        }
    }
    Ok("500 random cubics".into())
}

fn quartic(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for tau in sample_taus(rng, 100, 2.01, 30.0, &[], 0.0) {
        let q = solve_quartic_ferrari(tau).map_err(e2s)?;
        let poly = RealPolynomial::float(vec![2.0, tau, 0.0, -tau, 1.0]);
        let iso = isolate_positive_roots(&poly, 1e-13).map_err(e2s)?.values();
        let mut ferrari: Vec<f64> = q.roots.iter().copied().filter(|x| *x > 0.0).collect();
        ferrari.sort_by(f64::total_cmp);
        ferrari.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        ensure(ferrari.len() == iso.len(), || {
            format!("tau={tau}: {ferrari:?} vs {iso:?}")
        })?;
        for (x, y) in ferrari.iter().zip(&iso) {
            ensure((x - y).abs() < 1e-10, || format!("tau={tau}: {x} vs {y}"))?;
        }
        ensure(q.first_factor_certified, || {
            format!("tau={tau}: first factor has a positive root")
        })?;
    }
    Ok("100 values of tau".into())
}

fn solution_residuals(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut n = 0;
    for k in 2..=4 {
        for tau in sample_taus(rng, 12, 2.05, 12.0, &[], 0.0) {
            for p in solve_generic(&ModelParams::new(k, tau).map_err(e2s)?, 1e-12).map_err(e2s)? {
                let rel = p.max_residual() / residual_scale(k, tau, p.a, p.b);
                ensure(rel < 1e-12, || {
                    format!("k={k} tau={tau} ({}, {}) rel {rel}", p.a, p.b)
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} solutions with relative residual < 1e-12"))
}

fn unequal_match(tau: f64) -> std::result::Result<f64, String> {
    let generic: Vec<_> = solve_generic(&ModelParams::new(3, tau).map_err(e2s)?, 1e-12)
        .map_err(e2s)?
        .into_iter()
        .filter(|p| p.kind == PairKind::Unequal)
        .collect();
    let closed = solve_k3(tau, 1e-12).map_err(e2s)?;
    ensure(generic.len() == closed.len(), || {
        format!(
            "tau={tau}: {} generic vs {} closed-form pairs",
            generic.len(),
            closed.len()
        )
    })?;
    let mut worst: f64 = 0.0;
    for (g, c) in generic.iter().zip(&closed) {
        worst = worst.max((g.a - c.a).abs()).max((g.b - c.b).abs());
    }
    ensure(worst < 1e-9, || {
        format!("tau={tau}: coordinates differ by {worst}")
    })?;
    Ok(worst)
}

fn dual_solver(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for tau in sample_taus(rng, 50, 2.05, 12.0, &K3_TRANSITIONS, 1e-3) {
        worst = worst.max(unequal_match(tau)?);
    }
    Ok(format!(
        "50 values of tau, worst coordinate gap {worst:.3e}"
    ))
}

fn psi_minimum(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for k in 2..=6 {
        let at_one = psi_k(k, 1.0).map_err(e2s)?;
        for _ in 0..2000 {
            let a = rng.gen_range(1e-3..10.0);
            let v = psi_k(k, a).map_err(e2s)?;
            ensure(at_one <= v * (1.0 + 1e-14), || {
                format!("k={k}: psi({a}) = {v} < psi(1) = {at_one}")
            })?;
        }
    }
    Ok("k = 2..6, 2000 samples each".into())
}

fn swap_symmetry(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for k in 2..=4 {
        for tau in sample_taus(rng, 10, 2.05, 12.0, &[], 0.0) {
            for p in solve_generic(&ModelParams::new(k, tau).map_err(e2s)?, 1e-12).map_err(e2s)? {
                let r = residuals(k, tau, p.b, p.a);
                let rel = r[0].abs().max(r[1].abs()) / residual_scale(k, tau, p.a, p.b);
                ensure(rel < 1e-12, || {
                    format!("k={k} tau={tau}: swapped residual {rel}")
                })?;
            }
        }
    }
    Ok("swapped pairs solve the system".into())
}

fn q_root_product(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for tau in sample_taus(rng, 40, 4.01, 12.0, &[], 0.0) {
        let params = ModelParams::new(3, tau).map_err(e2s)?;
        let roots: Vec<f64> = isolate_positive_roots(&build_q(&params), 1e-13)
            .map_err(e2s)?
            .values()
            .into_iter()
            .filter(|r| (r - 1.0).abs() > 1e-9)
            .collect();
        ensure(roots.len() == 2, || {
            format!("tau={tau}: non-unit roots {roots:?}")
        })?;
        let prod = roots[0] * roots[1];
        ensure((prod - 1.0).abs() < 1e-12, || {
            format!("tau={tau}: product {prod}")
        })?;
    }
    Ok("40 values of tau > 4".into())
}

/// Counts from the polynomial route against counts from radicals (equal roots of the
/// cubic factor plus the closed-form unequal pairs).
fn k3_counts(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let taus = [
        2.2,
        2.5,
        2.8,
        2.997,
        3.0,
        3.05,
        3.1,
        3.5,
        3.8,
        4.0,
        4.005,
        4.1,
        4.2,
        4.242_640_687_119_285,
        4.5,
        5.0,
        6.0,
        8.0,
        10.0,
        12.0,
    ];
    for tau in taus {
        let params = ModelParams::new(3, tau).map_err(e2s)?;
        let n = solve_generic(&params, 1e-12).map_err(e2s)?.len();
        // Q/(a − 1)(a + 1) = 2a² − τa + 2.
        let disc = tau * tau - 16.0;
        let equal = 1 + if disc > 0.0 { 2 } else { 0 };
        let unequal = solve_k3(tau, 1e-12).map_err(e2s)?.len();
        ensure(n == equal + unequal, || {
            format!("tau={tau}: {n} vs {equal} + {unequal}")
        })?;
    }
    Ok("20 pinned values of tau".into())
}

fn field_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (rng.gen_range(2.05..12.0), rng.gen_range(0.1..5.0)))
        .collect()
}

fn field_residuals(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut pts = field_points(rng, 400);
    pts.extend([(8.0, 1.0), (5.0, 0.8), (4.0, 1.0), (3.0, 4.0), (7.0, 2.0)]);
    for (tau, h) in pts {
        let sols = solve_k2_uniform(tau, h, 1e-12).map_err(e2s)?;
        let fp = FieldParams::new(2, tau, h, h).map_err(e2s)?;
        for s in &sols {
            let r = residuals_abd(&fp, s.a, s.b).map_err(e2s)?;
            let rel = r[0].abs().max(r[1].abs()) / external_field::residual_scale(&fp, s.a, s.b);
            worst = worst.max(rel);
            ensure(rel < 1e-10, || {
                format!("({tau}, {h}): residual {rel} at ({}, {})", s.a, s.b)
            })?;
            match s.branch {
                Branch::Equal => ensure(s.a > 0.0, || {
                    format!("({tau}, {h}): nonpositive cubic root")
                })?,
                b => {
                    let want = branch_sum(tau, h, b).ok_or("missing branch sum")?;
                    let got = s.a + s.b;
                    ensure((got - want).abs() < 1e-9 * want, || {
                        format!("({tau}, {h}): sum {got} vs {want}")
                    })?;
                }
            }
        }
        for s in sols.iter().filter(|s| s.index == 4 || s.index == 6) {
            let twin = sols.iter().find(|t| t.index == s.index + 1);
            if let Some(t) = twin {
                ensure(s.b == t.a && s.a == t.b, || {
                    format!("({tau}, {h}): branch pair not swapped")
                })?;
                let (ns, nt) = (s.max_residual(), t.max_residual());
                ensure(
                    (ns - nt).abs() <= 1e-12 * external_field::residual_scale(&fp, s.a, s.b),
                    || format!("({tau}, {h}): swapped residual norms {ns} vs {nt}"),
                )?;
            }
        }
    }
    Ok(format!("405 points, worst relative residual {worst:.3e}"))
}

fn field_zero_field(rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for tau in sample_taus(rng, 40, 2.05, 12.0, &[4.0, 6.0, 6.472_135_955], 1e-3) {
        let mut field: Vec<(f64, f64)> = enumerate_measure_candidates(tau, 1.0)
            .map_err(e2s)?
            .iter()
            .filter(|s| s.a <= s.b)
            .map(|s| (s.a, s.b))
            .collect();
        let mut zero: Vec<(f64, f64)> =
            solve_generic(&ModelParams::new(2, tau).map_err(e2s)?, 1e-12)
                .map_err(e2s)?
                .iter()
                .map(|p| (p.a, p.b))
                .collect();
        field.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        zero.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        ensure(field.len() == zero.len(), || {
            format!("tau={tau}: {field:?} vs {zero:?}")
        })?;
        for (f, z) in field.iter().zip(&zero) {
            ensure((f.0 - z.0).abs() < 1e-9 && (f.1 - z.1).abs() < 1e-9, || {
                format!("tau={tau}: {f:?} vs {z:?}")
            })?;
        }
    }
    Ok("40 values of tau at h = 1".into())
}

fn field_count_bound(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let n = 200;
    let mut max = 0;
    for i in 1..=n {
        let tau = 2.0 + 10.0 * i as f64 / n as f64;
        for j in 1..=n {
            let h = 0.1 + 4.9 * j as f64 / n as f64;
            let c = enumerate_measure_candidates(tau, h).map_err(e2s)?.len();
            max = max.max(c);
            ensure(c <= 7, || format!("({tau}, {h}): {c} candidates"))?;
        }
    }
    Ok(format!("200x200 grid, max {max} candidates"))
}

fn verified_laws() -> Result<Vec<PeriodicBoundaryLaw>> {
    let mut out = Vec::new();
    for (k, tau) in [(2, 5.0), (2, 7.0), (3, 3.5), (3, 5.0), (2, 8.0), (3, 8.0)] {
        for p in solve_generic(&ModelParams::new(k, tau)?, 1e-12)? {
            if p.kind == PairKind::Unequal || (p.a - 1.0).abs() > 1e-9 {
                out.push(boundary_law_from_pair(&p)?);
            }
        }
    }
    for s in enumerate_measure_candidates(8.0, 1.5)? {
        out.push(boundary_law_from_field(&s)?);
    }
    Ok(out)
}

fn table_normalisation(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let laws = verified_laws().map_err(e2s)?;
    for law in laws.iter().take(6) {
        let w = build_window(law.k, 1).map_err(e2s)?;
        let m = if law.k == 2 { 10 } else { 6 };
        let mut tables = vec![mixed_measure(law, &w, m).map_err(e2s)?];
        for s in 0..4 {
            tables.push(pinned_measure(law, &w, s, m).map_err(e2s)?);
        }
        for t in tables {
            let total = t.total();
            ensure((total - 1.0).abs() < 1e-12, || {
                format!("{:?}: total {total}", t.pin)
            })?;
        }
    }
    Ok("pinned and mixed tables for 6 laws".into())
}

/// Truncation large enough that θ^{M+1} times the spread of z is far below 1e-8.
fn consistency_truncation(law: &PeriodicBoundaryLaw) -> u32 {
    let spread = law.z.iter().cloned().fold(0.0, f64::max)
        / law.z.iter().cloned().fold(f64::INFINITY, f64::min);
    let m = ((1e-12 / spread).ln() / law.theta.ln()).ceil();
    (m as u32).clamp(8, 40)
}

fn measure_consistency(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let laws = verified_laws().map_err(e2s)?;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for law in laws.iter().take(10) {
        let w = build_window(law.k, 1).map_err(e2s)?;
        let m = consistency_truncation(law);
        for pin in [Pin::Pinned(0), Pin::Pinned(1), Pin::Mixed] {
            let direct = match pin {
                Pin::Pinned(s) => pinned_measure(law, &w, s, m),
                Pin::Mixed => mixed_measure(law, &w, m),
            }
            .map_err(e2s)?;
            let marginal = marginal_from_outer(law, &w, pin, m).map_err(e2s)?;
            let d = direct.max_abs_diff(&marginal).map_err(e2s)?;
            worst = worst.max(d);
            ensure(d < 1e-8, || {
                format!("k={} tau={} M={m}: {d}", law.k, law.tau)
            })?;
        }
        n += 1;
    }
    Ok(format!("{n} laws, worst entrywise gap {worst:.3e}"))
}

fn kernel(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for law in verified_laws().map_err(e2s)? {
        let kt = transition_kernel(&law, 30).map_err(e2s)?;
        for (mass, tail) in kt.row_mass.iter().zip(&kt.tail_bound) {
            ensure((mass - 1.0).abs() <= tail + 1e-12, || {
                format!("row mass {mass}")
            })?;
        }
        for i in -6..6 {
            let total: f64 = (-300..300).map(|j| kernel_prob(&law, i, j)).sum();
            ensure((total - 1.0).abs() < 1e-12, || {
                format!("row {i} sums to {total}")
            })?;
            for j in -6..6 {
                ensure(
                    kernel_prob(&law, i, j) == kernel_prob(&law, i + 4, j + 4),
                    || format!("shift changes P({i} -> {j})"),
                )?;
            }
        }
    }
    Ok("rows stochastic and 4-shift invariant".into())
}

fn law_consistency(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for law in verified_laws().map_err(e2s)? {
        let rep = check_consistency(&law, 1e-12).map_err(e2s)?;
        worst = worst.max(rep.max());
        ensure(rep.max() < 1e-10, || {
            format!("k={} tau={}: {rep:?}", law.k, law.tau)
        })?;
        let mut bad = law.clone();
        bad.u[3] *= 1.01;
        bad.z[3] = bad.h[3] * bad.u[3].powi(bad.k as i32);
        let rep = check_consistency(&bad, 1e-12).map_err(e2s)?;
        ensure(rep.recursion > 1e-4 && rep.series > 1e-4, || {
            format!("perturbed law passes: {rep:?}")
        })?;
    }
    Ok(format!("worst residual {worst:.3e}"))
}

fn series_truncation(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for law in verified_laws().map_err(e2s)? {
        let s = series_sums(&law).map_err(e2s)?;
        for i in -6..6 {
            let (l, r) = truncated_tails(&law, i, 200);
            let (cl, cr) = (s.l_at(i), s.r_at(i));
            ensure(
                (cl - l).abs() < 1e-12 * l.max(1.0) && (cr - r).abs() < 1e-12 * r.max(1.0),
                || {
                    format!(
                        "k={} tau={} i={i}: ({cl}, {cr}) vs ({l}, {r})",
                        law.k, law.tau
                    )
                },
            )?;
        }
    }
    Ok("closed forms match depth-200 sums".into())
}

fn normalisability(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for law in verified_laws().map_err(e2s)? {
        let p = normalisability_probe(&law, 10_000);
        ensure(
            p.verdict == Normalisability::Divergent && p.slope > 0.0,
            || format!("k={} tau={}: {p:?}", law.k, law.tau),
        )?;
    }
    Ok("every verified law diverges".into())
}

fn scan_monotone(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let r = scan_tau(2, 2.05, 12.0, 200).map_err(e2s)?;
    ensure(
        r.points.windows(2).all(|w| w[0].n_total <= w[1].n_total),
        || "k=2 counts not monotone".into(),
    )?;
    let counts: Vec<_> = r.transitions.iter().map(|t| (t.left, t.right)).collect();
    ensure(counts == [(1, 2), (2, 4), (4, 5)], || {
        format!("transitions {counts:?}")
    })?;
    Ok("k=2 counts 1, 2, 4, 5".into())
}

fn scan_determinism(_: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let a = scan_tau(3, 2.5, 6.0, 60).map_err(e2s)?;
    let b = scan_tau(3, 2.5, 6.0, 60).map_err(e2s)?;
    ensure(a == b, || "repeated scans differ".into())?;
    let f1 =
        external_field::solve_field_generic(&FieldParams::new(3, 6.0, 1.3, 0.7).map_err(e2s)?, 11);
    let f2 =
        external_field::solve_field_generic(&FieldParams::new(3, 6.0, 1.3, 0.7).map_err(e2s)?, 11);
    ensure(f1 == f2, || "seeded multistart differs".into())?;
    Ok("scan and seeded solver repeat exactly".into())
}
