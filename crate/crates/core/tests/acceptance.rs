//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.
//!
//! Run with `cargo test --test acceptance` (add `--release` for speed).

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use replicalc::posterior::posterior;
use replicalc::{
    binomial_identity_divergence, binomial_pmf, compare_gaussian_model, compare_p_and_posterior,
    ir_index, likelihood_curve, likelihood_sum, make_grid, pool_studies, range_probability,
    realistic_bounds, rescale_grid, significance_boundary, simulate_calibration,
    simulate_threshold_instability, two_hypothesis_posterior, Direction, GaussianModel,
    Observation, RangeSpec, SimulationConfig, StudyRecord,
};

/// Fixed before any run; never tuned.
const SEED: u64 = 1;
const MC_TRIALS: u64 = 1_000_000;

fn obs(r: u64, n: u64) -> Observation {
    Observation::new(r, n).unwrap()
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

struct Suite {
    failed: Vec<&'static str>,
    total: usize,
}

impl Suite {
    fn check(&mut self, id: &'static str, title: &str, pass: bool, detail: String) {
        self.total += 1;
        if !pass {
            self.failed.push(id);
        }
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status}  [{id:>2}] {title}: {detail}");
    }
}

fn worked_likelihoods(s: &mut Suite) {
    let a = binomial_pmf(50, 99, 0.43).unwrap();
    let b = binomial_pmf(50, 99, 0.59).unwrap();
    s.check(
        "1",
        "worked likelihoods",
        within(a, 0.02595, 5e-5) && within(b, 0.01869, 5e-5),
        format!("L(0.43) = {a:.7}, L(0.59) = {b:.7}"),
    );
}

fn two_hypotheses(s: &mut Suite) {
    let v = two_hypothesis_posterior(&obs(50, 99), 0.43, 0.59).unwrap();
    s.check(
        "2",
        "two-hypothesis posterior",
        within(v, 0.58118, 1e-4),
        format!("P(0.43 | 50/99) = {v:.7}"),
    );
}

fn normalization_identity(s: &mut Suite) {
    let grid = make_grid(10001).unwrap();
    let main = likelihood_sum(&likelihood_curve(&obs(50, 99), &grid)).unwrap();
    let mut worst: f64 = 0.0;
    for (r, n) in [(5, 9), (50, 99), (250, 499)] {
        let sum = likelihood_sum(&likelihood_curve(&obs(r, n), &grid)).unwrap();
        let expected = 10000.0 / (n as f64 + 1.0);
        worst = worst.max((sum / expected - 1.0).abs());
    }
    s.check(
        "3",
        "normalization identity",
        within(main, 100.0, 0.01) && worst <= 1e-3,
        format!("sum(50/99) = {main:.6}, worst relative gap to (m-1)/(n+1) = {worst:.2e}"),
    );
}

fn grid_rescaling(s: &mut Suite) {
    let coarse = posterior(&obs(50, 99), &make_grid(101).unwrap()).unwrap();
    let fine = rescale_grid(&coarse, &make_grid(10001).unwrap()).unwrap();
    let c = coarse.value_at(0.43).unwrap();
    let f = fine.value_at(0.43).unwrap();
    let ratio = f * 100.0 / c;
    s.check(
        "4",
        "grid rescaling",
        within(f, 0.0002595, 5e-6) && within(ratio, 1.0, 0.01),
        format!("coarse {c:.7}, fine {f:.4e}, fine*100/coarse = {ratio:.5}"),
    );
}

fn pooling_identity(s: &mut Suite) {
    let grid = make_grid(10001).unwrap();
    let study = |label: &str, r, n| StudyRecord::new(label, obs(r, n)).unwrap();
    let pooled = pool_studies(&[study("a", 22, 46), study("b", 28, 53)], &grid).unwrap();
    let direct = posterior(&obs(50, 99), &grid).unwrap();
    let worked = max_gap(pooled.values(), direct.values());

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut draw = |hi: u64| rng.next_u64() % (hi + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n1 = 1 + draw(199);
        let n2 = 1 + draw(199);
        let (r1, r2) = (draw(n1), draw(n2));
        let pooled = pool_studies(&[study("a", r1, n1), study("b", r2, n2)], &grid).unwrap();
        let direct = posterior(&obs(r1 + r2, n1 + n2), &grid).unwrap();
        worst = worst.max(max_gap(pooled.values(), direct.values()));
    }
    s.check(
        "5",
        "pooling identity",
        worked <= 1e-10 && worst <= 1e-10,
        format!("22/46 + 28/53 vs 50/99: {worked:.2e}; worst of 50 random pairs: {worst:.2e}"),
    );
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn p_value_vs_tail(s: &mut Suite) {
    let grid = make_grid(10001).unwrap();
    let r = compare_p_and_posterior(&obs(50, 99), 0.404, &grid, Direction::AtOrAbove).unwrap();
    s.check(
        "6",
        "P-value vs posterior tail",
        within(r.p_value_gaussian, 0.0225, 0.0015)
            && within(r.posterior_null_tail, 0.0194, 0.002)
            && within(r.posterior_complement, 0.9807, 0.002),
        format!(
            "P = {:.5} (sd at null {:.5}, exact {:.5}), tail = {:.5}, complement = {:.5}",
            r.p_value_gaussian,
            r.p_value_gaussian_at_null,
            r.p_value_exact_binomial,
            r.posterior_null_tail,
            r.posterior_complement
        ),
    );
}

fn symmetric_gaussian(s: &mut Suite) {
    let grid = make_grid(100001).unwrap();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let center = 0.35 + 0.3 * unit();
        let sd = 0.02 + 0.02 * unit();
        let sign = if unit() < 0.5 { -1.0 } else { 1.0 };
        let raw = center + sign * (0.5 + 2.5 * unit()) * sd;
        // a null on a cell edge, so the tail never splits a grid cell
        let null = grid.value(grid.nearest_index(raw)) + 0.5 * h;
        let direction = if center >= null {
            Direction::AtOrAbove
        } else {
            Direction::AtOrBelow
        };
        let model = GaussianModel::new(center, sd).unwrap();
        let c = compare_gaussian_model(&model, null, &grid, direction).unwrap();
        worst = worst.max(c.absolute_gap);
    }
    s.check(
        "7",
        "symmetric Gaussian equality",
        worst <= 1e-6,
        format!("worst |P - tail| over 10 triples = {worst:.2e}"),
    );
}

fn replication_range(s: &mut Suite) {
    let range = RangeSpec::new(0.45, 1.0, false, true).unwrap();
    let value = range_probability(
        &posterior(&obs(50, 99), &make_grid(10001).unwrap()).unwrap(),
        &range,
    )
    .unwrap();
    let oracle = common::beta_posterior_above(50, 99, 0.45);
    let fine = range_probability(
        &posterior(&obs(50, 99), &make_grid(100001).unwrap()).unwrap(),
        &range,
    )
    .unwrap();
    let oracle_ok = within(value, oracle, 1e-4);
    let paper_ok = within(value, 0.88, 0.02);
    s.check(
        "8",
        "replication range (0.45, 1]",
        oracle_ok && paper_ok,
        format!(
            "grid {value:.7} vs incomplete-beta {oracle:.7} (|d| = {:.2e}, tol 1e-4: {}); \
             vs 0.88 +/- 0.02: {}; grid(100001) gives {fine:.7} (|d| = {:.2e})",
            (value - oracle).abs(),
            if oracle_ok { "ok" } else { "exceeded" },
            if paper_ok { "ok" } else { "exceeded" },
            (fine - oracle).abs()
        ),
    );
}

fn ir_arithmetic(s: &mut Suite) {
    let bounds = realistic_bounds(0.95, 0.9).unwrap();
    let index = ir_index(0.47, 0.95).unwrap();
    let shown = format!("{index:.2}");
    s.check(
        "9",
        "I/R arithmetic",
        bounds == (0.855, 0.95) && within(index, 0.4947, 1e-4) && shown == "0.49",
        format!("bounds = {bounds:?}, ir_index = {index:.5} (shown {shown})"),
    );
}

fn superimposition(s: &mut Suite) {
    let central = binomial_identity_divergence(&obs(50, 99)).unwrap();
    let skewed = binomial_identity_divergence(&obs(5, 99)).unwrap();
    s.check(
        "10",
        "binomial superimposition",
        central <= 0.002 && skewed > central,
        format!("divergence 50/99 = {central:.2e}, 5/99 = {skewed:.2e}"),
    );
}

fn calibration(s: &mut Suite) {
    let config = SimulationConfig {
        grid_points: 101,
        trials_n: 99,
        num_trials: MC_TRIALS,
        seed: SEED,
        significance_null: None,
        significance_alpha: None,
    };
    let report = simulate_calibration(&config).unwrap();
    let cell = report.cell(50).unwrap();
    let cell_ok = cell.max_abs_deviation <= 0.015;

    let total = MC_TRIALS as f64;
    let outcomes = report.outcome_counts.len();
    let uniform = 1.0 / outcomes as f64;
    let se = (uniform * (1.0 - uniform) / total).sqrt();
    let z_uniform: Vec<f64> = report
        .outcome_counts
        .iter()
        .map(|c| (*c as f64 / total - uniform) / se)
        .collect();
    let outside: Vec<usize> = (0..outcomes)
        .filter(|r| z_uniform[*r].abs() > 3.0)
        .collect();
    let worst = z_uniform
        .iter()
        .copied()
        .fold(0.0, |a: f64, z| a.max(z.abs()));

    // the exact marginal of r under point draws from the grid
    let grid = make_grid(101).unwrap();
    let z_exact = report
        .outcome_counts
        .iter()
        .enumerate()
        .map(|(r, c)| {
            let pi = grid
                .values()
                .map(|p| common::binomial_pmf(r as u64, 99, p))
                .sum::<f64>()
                / grid.points() as f64;
            ((*c as f64 / total - pi) / (pi * (1.0 - pi) / total).sqrt()).abs()
        })
        .fold(0.0, f64::max);

    s.check(
        "11",
        "Monte Carlo calibration",
        cell_ok && outside.is_empty(),
        format!(
            "r=50 cell ({} samples) max deviation {:.4} (tol 0.015: {}); marginal of r vs uniform \
             1/{outcomes}: {} cells beyond 3 SE {:?}, worst |z| = {worst:.1}; \
             vs exact grid marginal: worst |z| = {z_exact:.2}",
            cell.samples,
            cell.max_abs_deviation,
            if cell_ok { "ok" } else { "exceeded" },
            outside.len(),
            outside,
        ),
    );
}

fn threshold_instability(s: &mut Suite) {
    let boundary = significance_boundary(99, 0.404, 0.05).unwrap();
    let fraction =
        simulate_threshold_instability(boundary.boundary_p, 99, 0.404, 0.05, MC_TRIALS, SEED)
            .unwrap();
    s.check(
        "12",
        "threshold instability",
        within(fraction, 0.5, 0.01),
        format!(
            "critical r = {}, boundary p = {:.5}, non-significant fraction = {fraction:.5}",
            boundary.critical_successes, boundary.boundary_p
        ),
    );
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_replicalc"))
        .args(args)
        .output()
        .expect("CLI binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn determinism(s: &mut Suite) {
    let dir = tempfile::tempdir().unwrap();
    let studies = dir.path().join("studies.csv");
    std::fs::write(&studies, "first,22,46\nsecond,28,53\n").unwrap();
    let studies = path_str(&studies);
    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "posterior",
            "--successes",
            "50",
            "--trials",
            "99",
            "--range",
            "0.45:1",
            "--range-open-lower",
            "--range-closed-upper",
            "--at",
            "0.43",
        ],
        vec![
            "posterior",
            "--successes",
            "50",
            "--trials",
            "99",
            "--grid",
            "101",
            "--format",
            "csv",
        ],
        vec![
            "compare",
            "--successes",
            "50",
            "--trials",
            "99",
            "--null",
            "0.404",
        ],
        vec!["combine", "--studies", &studies, "--range", "0.45:1"],
        vec!["replicate", "--idealistic", "0.95", "--q", "0.9"],
        vec![
            "replicate",
            "--successes",
            "50",
            "--trials",
            "99",
            "--mass",
            "0.95",
            "--q",
            "0.9",
            "--format",
            "csv",
        ],
        vec!["interval", "--successes", "50", "--trials", "99"],
        vec![
            "simulate",
            "--seed",
            "7",
            "--significance-null",
            "0.404",
            "--significance-alpha",
            "0.05",
        ],
        vec!["figure", "--id", "fig2"],
        vec!["figure", "--id", "fig3"],
        vec!["figure", "--id", "fig4", "--format", "json"],
    ];
    let mut mismatched = Vec::new();
    for args in &invocations {
        let first = run_cli(args);
        let second = run_cli(args);
        if first.0 != 0 || first != second || first.1.is_empty() {
            mismatched.push(args.join(" "));
        }
    }
    s.check(
        "13",
        "CLI determinism",
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!(
                "{} invocations byte-identical across two runs",
                invocations.len()
            )
        } else {
            format!("differing or failing: {mismatched:?}")
        },
    );
}

fn path_str(p: &Path) -> String {
    p.to_str().expect("temporary paths are UTF-8").to_string()
}

fn main() {
    let start = Instant::now();
    let mut suite = Suite {
        failed: Vec::new(),
        total: 0,
    };
    worked_likelihoods(&mut suite);
    two_hypotheses(&mut suite);
    normalization_identity(&mut suite);
    grid_rescaling(&mut suite);
    pooling_identity(&mut suite);
    p_value_vs_tail(&mut suite);
    symmetric_gaussian(&mut suite);
    replication_range(&mut suite);
    ir_arithmetic(&mut suite);
    superimposition(&mut suite);
    calibration(&mut suite);
    threshold_instability(&mut suite);
    determinism(&mut suite);
    println!(
        "{} of {} criteria passed in {:.1} s",
        suite.total - suite.failed.len(),
        suite.total,
        start.elapsed().as_secs_f64()
    );
    if !suite.failed.is_empty() {
        println!("failed: {}", suite.failed.join(", "));
        std::process::exit(1);
    }
}
