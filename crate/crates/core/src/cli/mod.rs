//! Batch workflows behind the `qubit-pair` binary.
//!
//! Each command writes a CSV table plus `manifest.txt` (the resolved
//! configuration) into the output directory. Numbers are written with 12
//! significant digits and LF line endings so that reruns are byte-identical.

mod config;

pub use config::{Command, KeyValues, RunConfig, KEYS};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::analytics::{steady_coherence_p, steady_concurrence, steady_population_product_q, steady_qz, SteadyParams};
use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::model::{bell_initial, build_branches, InitialState};
use crate::quapi::{simulate_branches, BranchDynamics, QuapiConfig, Trajectory};

/// Fraction of the trajectory averaged for plateau values.
pub const PLATEAU_FRACTION: f64 = 0.1;

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

/// Mean concurrence over the last `fraction` of the grid. The sweep table
/// reports the value at the final grid point instead.
pub fn plateau_concurrence(traj: &Trajectory, fraction: f64) -> f64 {
    let n = traj.concurrence.len();
    let tail = ((n as f64 * fraction).ceil() as usize).clamp(1, n.max(1));
    traj.concurrence[n - tail..].iter().map(|c| c.c).sum::<f64>() / tail as f64
}

/// Reads a config file, applies overrides and resolves it for `command`.
pub fn load_config(
    command: Command,
    path: &Path,
    overrides: &[String],
    out: Option<&Path>,
    workers: Option<usize>,
) -> Result<RunConfig> {
    let mut kv = KeyValues::read(path)?;
    for o in overrides {
        kv.set(o)?;
    }
    if let Some(dir) = out {
        kv.set(&format!("output={}", dir.display()))?;
    }
    if let Some(w) = workers {
        kv.set(&format!("workers={w}"))?;
    }
    kv.resolve(command)
}

/// Runs the configured command; returns the files written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output)?;
    let manifest = cfg.output.join("manifest.txt");
    std::fs::write(&manifest, cfg.manifest())?;

    let pool = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(format!("cannot start {n} workers: {e}")))?,
        None => rayon::ThreadPoolBuilder::new()
            .build()
            .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?,
    };
    let mut failures = 0;
    let (name, table) = pool.install(|| match cfg.command {
        Command::Simulate => simulate_table(cfg).map(|t| ("trajectory.csv", t)),
        Command::Sweep => sweep_table(cfg).map(|t| ("sweep.csv", t)),
        Command::Converge => converge_table(cfg).map(|(t, failed)| {
            failures = failed;
            ("converge.csv", t)
        }),
        Command::Steady => steady_table(cfg).map(|t| ("steady.csv", t)),
    })?;
    let path = cfg.output.join(name);
    std::fs::write(&path, table)?;
    info!("wrote {}", path.display());
    if failures > 0 {
        return Err(Error::Numerical(format!(
            "{failures} convergence run(s) failed; see {}",
            path.display()
        )));
    }
    Ok(vec![manifest, path])
}

fn initial(a: f64) -> Result<InitialState> {
    bell_initial(a)
}

pub fn simulate_table(cfg: &RunConfig) -> Result<String> {
    let dynamics = simulate_branches(
        &cfg.params,
        cfg.topology,
        &cfg.bath_left,
        &cfg.bath_right,
        &initial(cfg.a)?,
        &cfg.quapi,
        cfg.n_steps,
    )?;
    Ok(trajectory_csv(&dynamics.trajectory(cfg.a)))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,p00,p01,p10,p11,Re_cP,Im_cP,Re_cQ,Im_cQ,F1,F2,C\n");
    for ((t, x), c) in traj.times.iter().zip(&traj.states).zip(&traj.concurrence) {
        out.push_str(&row(&[
            num(*t),
            num(x.p00),
            num(x.p01),
            num(x.p10),
            num(x.p11),
            num(x.c_p.re),
            num(x.c_p.im),
            num(x.c_q.re),
            num(x.c_q.im),
            num(c.f1),
            num(c.f2),
            num(c.c),
        ]));
    }
    out
}

fn sorted_unique(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Baths for one sweep point: `K` replaces `K_L` and `T` both temperatures.
fn sweep_baths(cfg: &RunConfig, k: f64, t: f64) -> (BathSpec, BathSpec) {
    let left = BathSpec { kondo: k, temperature: t, ..cfg.bath_left };
    let right = BathSpec { temperature: t, ..cfg.bath_right };
    (left, right)
}

/// Branch dynamics for every `(K, T)` of the sweep, evolved in parallel.
/// Each branch starts from the Bell state of its subspace, so the result
/// can be reweighted for every `a`.
pub fn sweep_dynamics(cfg: &RunConfig) -> Result<BTreeMap<(usize, usize), BranchDynamics>> {
    let ks = sorted_unique(&cfg.sweep_k);
    let ts = sorted_unique(&cfg.sweep_t);
    let jobs: Vec<(usize, usize)> =
        (0..ks.len()).flat_map(|i| (0..ts.len()).map(move |j| (i, j))).collect();
    let init = initial(0.5)?;
    let results: Vec<Result<((usize, usize), BranchDynamics)>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (l, r) = sweep_baths(cfg, ks[i], ts[j]);
            info!("sweep point K={} T={}", ks[i], ts[j]);
            simulate_branches(&cfg.params, cfg.topology, &l, &r, &init, &cfg.quapi, cfg.n_steps)
                .map(|d| ((i, j), d))
        })
        .collect();
    results.into_iter().collect()
}

fn analytic_k(cfg: &RunConfig, k: f64) -> Result<f64> {
    let (_, p) = build_branches(&cfg.params, cfg.topology, k, cfg.bath_right.kondo)?;
    Ok(p.k_eff)
}

pub fn sweep_table(cfg: &RunConfig) -> Result<String> {
    let dynamics = sweep_dynamics(cfg)?;
    let ks = sorted_unique(&cfg.sweep_k);
    let as_ = sorted_unique(&cfg.sweep_a);
    let ts = sorted_unique(&cfg.sweep_t);
    let mut out = String::from("K,a,T,C_infinity_numeric,C_infinity_analytic,validity_flag\n");
    for (i, &k) in ks.iter().enumerate() {
        for &a in &as_ {
            for (j, &t) in ts.iter().enumerate() {
                let numeric = dynamics[&(i, j)].trajectory(a).final_concurrence();
                let (analytic, valid) = match steady_concurrence(a, &cfg.params, analytic_k(cfg, k)?, t) {
                    Ok(s) => (s.value, s.valid),
                    Err(Error::Domain(_)) => (f64::NAN, false),
                    Err(e) => return Err(e),
                };
                out.push_str(&row(&[num(k), num(a), num(t), num(numeric), num(analytic), (valid as u8).to_string()]));
            }
        }
    }
    Ok(out)
}

/// Convergence table. A failing cell does not discard the others: its row
/// carries the error kind and NaN values, and the failures are counted.
pub fn converge_table(cfg: &RunConfig) -> Result<(String, usize)> {
    let t_final = cfg.n_steps as f64 * cfg.quapi.dt;
    let init = initial(cfg.a)?;
    let mut jobs = Vec::new();
    for &dt in &cfg.converge_dt {
        for &dk in &cfg.converge_dk {
            jobs.push((dt, dk));
        }
    }
    let results: Vec<(f64, usize, usize, Result<Trajectory>)> = jobs
        .par_iter()
        .map(|&(dt, dk)| {
            let n = ((t_final / dt).round() as usize).max(1);
            let q = QuapiConfig { dt, dk_max: dk, ..cfg.quapi };
            info!("convergence run dt={dt} dk_max={dk} ({n} steps)");
            let traj = simulate_branches(
                &cfg.params,
                cfg.topology,
                &cfg.bath_left,
                &cfg.bath_right,
                &init,
                &q,
                n,
            )
            .map(|d| d.trajectory(cfg.a));
            (dt, dk, n, traj)
        })
        .collect();
    let mut out = String::from("dt,dk_max,memory_time,n_steps,t_final,C_final,C_plateau,status\n");
    let mut failed = 0;
    for (dt, dk, n, traj) in results {
        let (c_final, c_plateau, status) = match traj {
            Ok(t) => (t.final_concurrence(), plateau_concurrence(&t, PLATEAU_FRACTION), "ok"),
            Err(e @ (Error::Numerical(_) | Error::Resource(_))) => {
                warn!("convergence run dt={dt} dk_max={dk} failed: {e}");
                failed += 1;
                let kind = if matches!(e, Error::Numerical(_)) { "numerical" } else { "resource" };
                (f64::NAN, f64::NAN, kind)
            }
            Err(e) => return Err(e),
        };
        out.push_str(&row(&[
            num(dt),
            dk.to_string(),
            num(dk as f64 * dt),
            n.to_string(),
            num(n as f64 * dt),
            num(c_final),
            num(c_plateau),
            status.to_string(),
        ]));
    }
    Ok((out, failed))
}

pub fn steady_table(cfg: &RunConfig) -> Result<String> {
    let mut out = String::from(
        "K,a,T,mu,Omega,coherence_P,Qz,sqrt_p00_p11,C_analytic,C_linearized,validity_flag\n",
    );
    let eps = cfg.params.eps1 + cfg.params.eps2;
    let tun_q = cfg.params.j * cfg.params.gamma;
    for k in sorted_unique(&cfg.sweep_k) {
        let k_eff = analytic_k(cfg, k)?;
        for a in sorted_unique(&cfg.sweep_a) {
            for t in sorted_unique(&cfg.sweep_t) {
                let qz = steady_qz(a, eps, tun_q, t)?;
                let pq = steady_population_product_q(a, eps, tun_q, t)?;
                let mut fields = vec![num(k), num(a), num(t)];
                match (
                    SteadyParams::new(&cfg.params, k_eff, t),
                    steady_coherence_p(a, cfg.params.j, k_eff, t),
                    steady_concurrence(a, &cfg.params, k_eff, t),
                ) {
                    (Ok(sp), Ok(cp), Ok(sc)) => {
                        fields.extend([num(sp.mu), num(sp.omega_r), num(cp), num(qz), num(pq)]);
                        fields.extend([num(sc.value), num(sc.linearized), (sc.valid as u8).to_string()]);
                    }
                    _ => {
                        let mu = crate::analytics::mu_coefficient(cfg.params.j, t)?;
                        let nan = num(f64::NAN);
                        fields.extend([num(mu), nan.clone(), nan.clone(), num(qz), num(pq)]);
                        let lin = 1.0 - 2.0 * a - mu * k_eff * (1.0 - a);
                        fields.extend([nan, num(lin), "0".to_string()]);
                    }
                }
                out.push_str(&row(&fields));
            }
        }
    }
    Ok(out)
}
