//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.
//!
//! cargo test -p stagcalc-acceptance --test acceptance

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stagcalc::approximation::{averaging_counterexample, general_c1_bound, general_test_field, value_set, Restriction};
use stagcalc::convergence::{c1_study, stokes_study, MeshFamily, StokesExact};
use stagcalc::decomposition::{helmholtz_decompose, poincare_constant, reconstruct_from_curl_div, SpaceKind};
use stagcalc::identities::check_identities;
use stagcalc::linalg::SolveOptions;
use stagcalc::mesh::{build_quad_mesh, build_tri_hex_mesh, build_voronoi_mesh, ConvexDomain, Rect};
use stagcalc::operators::{curl, div, grad, skew_grad};
use stagcalc::{EdgeField, StaggeredMesh};

const IBP_TOL: f64 = 1e-12;
const SEQUENCE_TOL: f64 = 1e-13;
const ROUND_TRIP_TOL: f64 = 1e-8;
const ORTHOGONALITY_TOL: f64 = 1e-10;
const VALUE_TOL: f64 = 1e-10;
/// Decimals printed next to the closed forms; reported, not used as targets.
const DIVERGENCE_DECIMAL: f64 = 0.86602540;
const VORTICITY_DECIMAL: f64 = 0.15061302;
const NORM_SPREAD: f64 = 0.05;
const C1_ORDER: f64 = 0.9;
const ENERGY_SLACK: f64 = 1e-10;
const MOMENTUM_TOL: f64 = 1e-9;
const STOKES_ORDER: f64 = 1.0;
const POINCARE_SPREAD: f64 = 0.25;
const POINCARE_CHAIN: f64 = 0.05;
const RANDOM_FIELDS: usize = 100;

struct Outcome {
    pass: bool,
    summary: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

fn timed(limit: Option<u64>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (pass, summary) = f();
    let elapsed = t.elapsed();
    let limit = limit.map(Duration::from_secs);
    Outcome { pass: pass && limit.is_none_or(|l| elapsed < l), summary, elapsed, limit }
}

fn identity_meshes() -> Vec<(String, StaggeredMesh)> {
    let mut v: Vec<(String, StaggeredMesh)> = Vec::new();
    for n in [2, 16, 64] {
        v.push((format!("quad-{n}"), build_quad_mesh(n, n, Rect::unit()).unwrap()));
    }
    for r in [1, 3, 5] {
        v.push((format!("trihex-{r}"), build_tri_hex_mesh(r).unwrap()));
    }
    for s in [16, 64, 256] {
        v.push((format!("voronoi-{s}"), build_voronoi_mesh(s, &ConvexDomain::unit_square(), 10, 0).unwrap()));
    }
    v
}

fn criterion_1() -> (bool, String) {
    let mut worst = 0i64;
    let mut count = 0;
    let mut record = |r: i64| {
        count += 1;
        worst = worst.max(r.abs());
    };
    for n in 2..=64 {
        record(build_quad_mesh(n, n, Rect::unit()).unwrap().euler_residual());
    }
    for r in 1..=5 {
        record(build_tri_hex_mesh(r).unwrap().euler_residual());
    }
    for s in [16, 64, 256] {
        record(build_voronoi_mesh(s, &ConvexDomain::unit_square(), 10, 0).unwrap().euler_residual());
    }
    (worst == 0, format!("{count} meshes, max |Euler residual| = {worst}"))
}

fn criterion_2_3(meshes: &[(String, StaggeredMesh)]) -> ((bool, String), (bool, String)) {
    let (mut ibp, mut ibp_at) = (0.0f64, String::new());
    let (mut seq, mut seq_at) = (0.0f64, String::new());
    let mut raw = 0.0f64;
    for (name, m) in meshes {
        let r = check_identities(m, RANDOM_FIELDS, 1);
        if r.ibp_max() >= ibp {
            ibp = r.ibp_max();
            ibp_at = name.clone();
        }
        if r.sequence_max() >= seq {
            seq = r.sequence_max();
            seq_at = name.clone();
        }
        raw = raw.max(r.curl_grad_raw).max(r.div_skew_raw);
    }
    (
        (ibp <= IBP_TOL, format!("max relative defect {ibp:.3e} ({ibp_at}) <= {IBP_TOL:e}, {} meshes x {RANDOM_FIELDS} fields", meshes.len())),
        (
            seq <= SEQUENCE_TOL,
            format!("max |curl grad|, |div skew_grad| relative to cancelled terms {seq:.3e} ({seq_at}) <= {SEQUENCE_TOL:e}; per max|input| {raw:.3e}"),
        ),
    )
}

fn criterion_4() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let meshes = [
        build_quad_mesh(32, 32, Rect::unit()).unwrap(),
        build_tri_hex_mesh(3).unwrap(),
        build_voronoi_mesh(256, &ConvexDomain::unit_square(), 10, 0).unwrap(),
    ];
    let (mut err, mut orth) = (0.0f64, 0.0f64);
    for m in &meshes {
        for _ in 0..3 {
            let u = EdgeField::random(m, &mut rng);
            let back = reconstruct_from_curl_div(&curl(&u), &div(&u)).unwrap();
            err = err.max((&back - &u).max_abs());
            let (psi, phi) = helmholtz_decompose(&u).unwrap();
            let (a, b) = (skew_grad(&psi), grad(&phi));
            orth = orth.max(a.inner(&b).unwrap().abs() / (a.norm() * b.norm()));
        }
    }
    (
        err <= ROUND_TRIP_TOL && orth <= ORTHOGONALITY_TOL,
        format!("round trip max error {err:.3e} <= {ROUND_TRIP_TOL:e}, orthogonality {orth:.3e} <= {ORTHOGONALITY_TOL:e} (quad-32, trihex-3, voronoi-256)"),
    )
}

fn matches_set(found: &[f64], target: f64) -> bool {
    found.len() == 3 && found.iter().all(|v| v.abs() <= VALUE_TOL || (v.abs() - target).abs() <= VALUE_TOL)
}

fn criterion_5() -> (bool, String) {
    let (a, b) = (1.0, 2.0);
    let divergence_value = (a + b) / (2.0 * 3f64.sqrt());
    let vorticity_value = 2.0 * 3f64.sqrt() * a / 23.0;
    let levels: Vec<_> = (1..=3).map(|r| averaging_counterexample(&build_tri_hex_mesh(r).unwrap(), a, b)).collect();
    let mut div_ok = true;
    let mut vort_ok = true;
    let mut div_err = 0.0f64;
    let mut vort_sets = Vec::new();
    for c in &levels {
        let d = value_set(c.divergence.iter().copied(), VALUE_TOL);
        let w = value_set(c.vorticity.iter().copied(), VALUE_TOL);
        div_ok &= matches_set(&d, divergence_value);
        if let Some(v) = d.iter().map(|v| v.abs()).reduce(f64::max) {
            div_err = div_err.max((v - divergence_value).abs());
        }
        vort_ok &= matches_set(&w, vorticity_value);
        vort_sets.push(w.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(" "));
    }
    let spread = |v: Vec<f64>| {
        let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
        (hi - lo) / hi
    };
    let div_spread = spread(levels.iter().map(|c| c.divergence_norm).collect());
    let vort_spread = spread(levels.iter().map(|c| c.vorticity_norm).collect());
    let means: Vec<f64> = levels.iter().map(|c| c.divergence_mean.abs()).collect();
    let mean_ok = means.iter().all(|m| *m <= VALUE_TOL);
    let norms_ok = div_spread < NORM_SPREAD && vort_spread.is_finite() && vort_spread < NORM_SPREAD;
    (
        div_ok && vort_ok && norms_ok && mean_ok,
        format!(
            "divergence set {} (off {:.1e}; printed {DIVERGENCE_DECIMAL} is off {:.1e}), vorticity set {} (want +-{:.10}, printed {VORTICITY_DECIMAL} is off {:.1e}; found [{}]), norm spread {:.2e}/{:.2e}, |mean div| <= {:.1e}",
            if div_ok { "ok" } else { "MISMATCH" },
            div_err,
            (DIVERGENCE_DECIMAL - divergence_value).abs(),
            if vort_ok { "ok" } else { "MISMATCH" },
            vorticity_value,
            (VORTICITY_DECIMAL - vorticity_value).abs(),
            vort_sets.join("] ["),
            div_spread,
            vort_spread,
            means.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

fn criterion_6() -> (bool, String) {
    let levels = [8, 16, 32, 64];
    let r = c1_study(&general_test_field(), Restriction::General, MeshFamily::Quad, &levels).unwrap();
    let sup = 2.0 * PI.powi(3);
    let mut bound_ok = true;
    let mut slack = f64::MAX;
    for x in &r {
        let b = general_c1_bound(&build_quad_mesh(x.level, x.level, Rect::unit()).unwrap(), sup, sup);
        bound_ok &= x.error <= b;
        slack = slack.min(b / x.error);
    }
    let decreasing = r.windows(2).all(|w| w[1].error < w[0].error);
    let order = r.last().and_then(|x| x.observed_order).unwrap_or(f64::NAN);
    (
        decreasing && order >= C1_ORDER && bound_ok,
        format!("errors {}, finest order {order:.3} >= {C1_ORDER}, bound holds with factor >= {slack:.1}", r.iter().map(|x| format!("{:.3e}", x.error)).collect::<Vec<_>>().join(" ")),
    )
}

fn criterion_7() -> (bool, String) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let r = pool.install(|| stokes_study(&StokesExact::bubble(), MeshFamily::Quad, &[8, 16, 32, 64], &SolveOptions::default()).unwrap());
    let energy = r.iter().all(|x| x.energy_lhs <= x.energy_rhs * (1.0 + ENERGY_SLACK));
    let residual = r.iter().map(|x| x.momentum_residual).fold(0.0, f64::max);
    let last = r.last().unwrap();
    let (op, oo) = (last.order_psi.unwrap_or(f64::NAN), last.order_omega.unwrap_or(f64::NAN));
    let decreasing = r.windows(2).all(|w| w[1].e_psi < w[0].e_psi && w[1].e_omega < w[0].e_omega);
    (
        energy && residual <= MOMENTUM_TOL && decreasing && op >= STOKES_ORDER && oo >= STOKES_ORDER,
        format!(
            "energy bound {}, max interior momentum residual {residual:.3e} <= {MOMENTUM_TOL:e}, finest orders psi {op:.3} omega {oo:.3} >= {STOKES_ORDER} (single thread)",
            if energy { "ok" } else { "VIOLATED" }
        ),
    )
}

fn criterion_8() -> (bool, String) {
    let mut consts = Vec::new();
    for n in [4, 8, 16, 32] {
        let m = build_quad_mesh(n, n, Rect::unit()).unwrap();
        consts.push([SpaceKind::Cell, SpaceKind::Vertex, SpaceKind::Edge].map(|k| poincare_constant(k, &m).unwrap()));
    }
    let ratio = consts.windows(2).flat_map(|w| (0..3).map(move |k| (w[1][k] / w[0][k] - 1.0).abs())).fold(0.0, f64::max);
    let chain = consts.iter().map(|c| c[2] * c[2] / (c[0] * c[0] + c[1] * c[1])).fold(0.0, f64::max);
    let last = consts.last().unwrap();
    (
        ratio <= POINCARE_SPREAD && chain <= 1.0 + POINCARE_CHAIN,
        format!(
            "max level-to-level change {:.2}% <= 25%, max C_e^2/(C_c^2 + C_v^2) = {chain:.4} <= 1.05; N=32: C_c {:.4} C_v {:.4} C_e {:.4}",
            100.0 * ratio,
            last[0],
            last[1],
            last[2]
        ),
    )
}

fn main() {
    // criteria 2 and 3 share one pass over the random fields
    let meshes = identity_meshes();
    let t23 = Instant::now();
    let ((p2, s2), (p3, s3)) = criterion_2_3(&meshes);
    let elapsed23 = t23.elapsed();
    let results = [
        ("Euler identity", timed(Some(10), criterion_1)),
        ("integration by parts", Outcome { pass: p2 && elapsed23 < Duration::from_secs(30), summary: s2, elapsed: elapsed23, limit: Some(Duration::from_secs(30)) }),
        ("exact sequences", Outcome { pass: p3, summary: s3, elapsed: elapsed23, limit: None }),
        ("Helmholtz round trip", timed(Some(60), criterion_4)),
        ("averaging counterexample", timed(None, criterion_5)),
        ("C1 convergence", timed(Some(120), criterion_6)),
        ("Stokes solve", timed(Some(300), criterion_7)),
        ("discrete Poincare", timed(None, criterion_8)),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        let time = match o.limit {
            Some(l) => format!("{:.2}s < {}s", o.elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", o.elapsed.as_secs_f64()),
        };
        println!("criterion {}: {} {name}: {} [{time}]", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.summary);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
