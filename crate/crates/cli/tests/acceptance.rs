//! Acceptance run: one line per criterion with the measured values, the
//! limits and the runtime budget.
//!
//! `ACCEPTANCE_ONLY=1,2,10` restricts the run to the listed criteria.
//!
//! Criterion 6 is a known failure: `sup|K|` decays like `θ^{-1}` on the
//! sampled window, faster than the `θ^{-1/2}` bound the band is centred on.
//! It is reported as FAIL and does not fail the target; if it ever starts
//! passing, the target fails so the expectation gets revisited.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rotmhd::dispersion::{kernel_decay_fit, kernel_tau_fit, strichartz_scaling_sweep, KernelSpec};
use rotmhd_cli::checks::{run_named, CheckReport};
use rotmhd_cli::config::{load_config, CheckName, ExperimentConfig, LoadedConfig};
use rotmhd_cli::experiments::run_sweep;
use rotmhd_cli::execute;

const EXPECTED_FAILURES: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> LoadedConfig {
    load_config(&configs().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn from_check(r: CheckReport) -> Outcome {
    Outcome {
        pass: r.passed(),
        detail: r.summary(),
    }
}

fn check(name: CheckName) -> Outcome {
    let seed = load("check.toml").config.seed;
    match run_named(name, 1000, seed) {
        Ok(r) => from_check(r),
        Err(e) => Outcome {
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn kernel_decay() -> Outcome {
    let base = load("kernels.toml").config;
    let k = base.kernels.as_ref().unwrap();
    let thetas = k.theta_grid().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for big_r in [4.0, 8.0] {
        let r = 1.0 / big_r;
        for &branch in &k.branches {
            let spec = KernelSpec::new(r, big_r, branch, k.sign).unwrap();
            let fit = kernel_decay_fit(&spec, &thetas, k.tau, &k.search).unwrap();
            let ok = (-0.65..=-0.35).contains(&fit.slope);
            pass &= ok;
            parts.push(format!(
                "R={big_r} {branch:?}: θ-slope {:.3} on [{:.0}, {:.0}] (band [-0.65, -0.35]) {}",
                fit.slope,
                fit.window[0],
                fit.window[1],
                if ok { "ok" } else { "out" }
            ));
            // τ window in units of r^{-2}. The neighbours are printed for
            // context, once per R: at θ = 0 the kernel does not see the branch.
            for (lo, hi, judged) in [(2.0, 8.0, false), (4.0, 16.0, true), (8.0, 32.0, false)] {
                if !judged && (branch != k.branches[0] || k.tau_theta != 0.0) {
                    continue;
                }
                let n = if judged { 7 } else { 5 };
                let taus: Vec<f64> = (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64) / (r * r)).collect();
                let tf = kernel_tau_fit(&spec, k.tau_theta, &taus, &k.search).unwrap();
                let ratio = tf.slope / tf.predicted;
                let ok = tf.relative_error <= 0.2;
                if judged {
                    pass &= ok;
                }
                parts.push(format!(
                    "R={big_r} {branch:?}: τr²∈[{lo},{hi}] slope/(-r²/2) = {ratio:.3}{}",
                    if judged { if ok { " ok" } else { " out" } } else { " (info)" }
                ));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn strichartz_scaling() -> Outcome {
    let base = load("strichartz.toml").config;
    let s = base.strichartz.as_ref().unwrap();
    let spec = KernelSpec::new(s.r, s.big_r, s.branch, s.sign).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for &alpha in &s.alphas {
        let sweep = match strichartz_scaling_sweep(&s.profile, &spec, alpha, &s.ps, &s.eps_list, &s.numerics) {
            Ok(x) => x,
            Err(e) => {
                return Outcome {
                    pass: false,
                    detail: format!("α={alpha}: error {e}"),
                }
            }
        };
        for f in &sweep.fits {
            let ok = f.slope >= f.predicted - 0.05;
            pass &= ok;
            parts.push(format!("α={alpha} p={}: slope {:.3} ≥ {:.4}-0.05 {}", f.p, f.slope, f.predicted, if ok { "ok" } else { "low" }));
        }
        let degraded = sweep.points.iter().filter(|p| p.degraded).count();
        if degraded > 0 {
            parts.push(format!("α={alpha}: {degraded} degraded points"));
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn global_sweep() -> Outcome {
    let loaded = load("sweep.toml");
    let cfg: &ExperimentConfig = &loaded.config;
    let eps = &cfg.sweep.as_ref().unwrap().eps_list;
    let dir = tempfile::tempdir().unwrap();
    let (rep, _) = match run_sweep(cfg, eps, cfg.seed, dir.path()) {
        Ok(x) => x,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("error: {e}"),
            }
        }
    };
    let mut parts = vec![format!(
        "data H^{{0,s}} = {:.3} = {:.1}x threshold",
        rep.data_h0s,
        rep.data_h0s / rep.small_data_threshold
    )];
    for e in &rep.entries {
        parts.push(format!(
            "ε={:.0e}: {}{}",
            e.eps,
            e.status,
            e.ratio.map_or(String::new(), |r| format!(", sup‖Ũ‖/ε^α = {r:.3}"))
        ));
    }
    parts.push(format!(
        "spread of the two smallest ε = {} (≤ 2)",
        rep.smallest_pair_spread.map_or("n/a".into(), |s| format!("{s:.3}"))
    ));
    Outcome {
        pass: rep.bounded,
        detail: parts.join("; "),
    }
}

fn csv_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let cases = [
        "kind = \"simulate\"\nseed = 11\n[grid]\nn_h = 16\nn_v = 12\nbox_h = 16.0\nbox_v = 16.0\n[model]\neps = 0.1\nalpha = 0.3\n[cutoff]\nr = 1.6\nR = 3.0\n[solver]\ndt = 0.01\nt_end = 0.3\noutput_every = 5\n[init]\nh0s = 5.0\n[simulate]\nmode = \"coupled-split\"\n",
        "kind = \"linear\"\nseed = 4\n[model]\neps = 0.05\nalpha = 0.3\n[linear]\nrandom = 20\n",
        "kind = \"kernels\"\n[kernels]\nr = 0.5\nR = 2.0\nthetas = [0.0, 3.0, 30.0]\ntaus = [1.0, 2.0]\n",
    ];
    let mut files = 0;
    for text in cases {
        let config = ExperimentConfig::from_toml(text).unwrap();
        let loaded = LoadedConfig {
            config,
            text: text.to_owned(),
        };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        if let Err(e) = execute(&loaded, Some(a.path()), None).and_then(|_| execute(&loaded, Some(b.path()), None)) {
            return Outcome {
                pass: false,
                detail: format!("{}: {e}", loaded.config.kind.name()),
            };
        }
        let (ca, cb) = (csv_bytes(a.path()), csv_bytes(b.path()));
        if ca.is_empty() || ca != cb {
            return Outcome {
                pass: false,
                detail: format!("{}: CSV outputs differ or are missing", loaded.config.kind.name()),
            };
        }
        files += ca.len();
    }
    Outcome {
        pass: true,
        detail: format!("{files} CSV files bitwise identical across repeated runs (simulate, linear, kernels)"),
    }
}

type Criterion = (u32, &'static str, f64, fn() -> Outcome);

fn main() {
    // libtest flags (e.g. from `cargo test -- --nocapture`) are ignored
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [Criterion; 10] = [
        (1, "eigen-structure", 10.0, || check(CheckName::Eigen)),
        (2, "exact propagator", 30.0, || check(CheckName::Propagator)),
        (3, "energy identity", 300.0, || check(CheckName::Energy)),
        (4, "cancellation identities", 60.0, || check(CheckName::Cancellation)),
        (5, "Littlewood-Paley", 60.0, || check(CheckName::LittlewoodPaley)),
        (6, "kernel decay", 600.0, kernel_decay),
        (7, "Strichartz scaling", 1800.0, strichartz_scaling),
        (8, "global-existence sweep", 7200.0, global_sweep),
        (9, "two-route consistency", 600.0, || check(CheckName::TwoRoute)),
        (10, "determinism", f64::INFINITY, determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let out = f();
        let secs = t0.elapsed().as_secs_f64();
        let in_time = secs <= budget;
        let pass = out.pass && in_time;
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let budget_txt = if budget.is_finite() { format!(" (budget {budget:.0} s)") } else { String::new() };
        println!(
            "[{}] {id:>2} {name}: {} | {secs:.1} s{budget_txt}{}",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            if expected_fail && !pass { " | known failure, see README" } else { "" }
        );
        if pass == expected_fail {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
