//! One function per subcommand: resolve parameters (flag > config file >
//! default), validate before any computation, run the library call, and
//! emit the artifact.

use anyhow::Result;
use serde::Serialize;

use helix_core::criticality::{
    check_aidekon, cumulants, reduce_to_critical, solve_drift_equation, solve_critical_gamma, ProgenySpec,
};
use helix_core::engine::{evolve_with_budget, fixed_point_supercritical};
use helix_core::gumbel::{bernoulli_kappa_beta, classify, solve_gamma_star, verify_bound, LatticePmf};
use helix_core::helix::{cyclic_distance_curve, find_limit_point};
use helix_core::joint::joint_evolve;
use helix_core::sim::{simulate_brw, simulate_gw_restart};
use helix_core::TailFunction;

use crate::config::{check_range, Format, Interval, LevelList};
use crate::output::{fmt_f64, sidecar_path, write_csv, write_json, Meta};
use crate::{CommonArgs, OutArgs};

fn tail_rows(f: &TailFunction) -> Vec<String> {
    (1..=f.hi())
        .map(|x| format!("{},{}", x, fmt_f64(f.value(x))))
        .collect()
}

#[derive(Serialize)]
struct TailRow {
    x: i64,
    f: f64,
}

fn emit_tail(f: &TailFunction, meta: Meta, out: &OutArgs) -> Result<()> {
    match out.format {
        Format::Csv => write_csv(out.out.as_deref(), &meta, "x,F", &tail_rows(f)),
        Format::Json => {
            let rows: Vec<TailRow> = (1..=f.hi())
                .map(|x| TailRow {
                    x,
                    f: f.value(x),
                })
                .collect();
            write_json(out.out.as_deref(), &meta, &rows)
        }
    }
}

pub fn evolve_cmd(common: &CommonArgs, out: &OutArgs, n: Option<u32>, p: Option<f64>) -> Result<()> {
    let cfg = common.config()?;
    let n = cfg.require::<u32>("n", n)?;
    let p = check_range("p", cfg.resolve("p", p)?.unwrap_or(0.5), 0.0, 1.0, true, true)?;
    let mut budget = common.budget()?;
    let f = evolve_with_budget(n, p, &mut budget)?;
    let meta = Meta::new("evolve")
        .param("n", n)
        .param("p", fmt_f64(p))
        .param("prune_floor", fmt_f64(helix_core::tail::PRUNE_FLOOR))
        .param("budget_ops", budget.limit());
    emit_tail(&f, meta, out)
}

pub fn cyclic_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    levels: Option<LevelList>,
    p: Option<f64>,
) -> Result<()> {
    let cfg = common.config()?;
    let levels = cfg.require::<LevelList>("levels", levels)?;
    let p = check_range("p", cfg.resolve("p", p)?.unwrap_or(0.5), 0.0, 1.0, true, true)?;
    let mut budget = common.budget()?;
    let pts = cyclic_distance_curve(&levels.0, p, &mut budget)?;
    let meta = Meta::new("cyclic")
        .param("levels", &levels)
        .param("p", fmt_f64(p))
        .param("budget_ops", budget.limit());
    match out.format {
        Format::Csv => {
            let rows: Vec<String> = pts
                .iter()
                .map(|r| format!("{},{},{}", r.n, r.k_n, fmt_f64(r.d_n)))
                .collect();
            write_csv(out.out.as_deref(), &meta, "n,k_n,d_n", &rows)
        }
        Format::Json => write_json(out.out.as_deref(), &meta, &pts),
    }
}

pub fn limit_point_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    a: Option<f64>,
    count: Option<u32>,
) -> Result<()> {
    let cfg = common.config()?;
    let a = check_range("a", cfg.require::<f64>("a", a)?, 0.0, 1.0, true, true)?;
    let count = cfg.resolve("count", count)?.unwrap_or(3);
    let mut budget = common.budget()?;
    let report = find_limit_point(a, count, &mut budget)?;
    let meta = Meta::new("limit-point")
        .param("a", fmt_f64(a))
        .param("count", count)
        .param("budget_ops", budget.limit());
    write_json(out.out.as_deref(), &meta, &report)
}

pub fn fixed_point_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    p: Option<f64>,
    n: Option<u32>,
) -> Result<()> {
    let cfg = common.config()?;
    let p = cfg.require::<f64>("p", p)?;
    let x_max = cfg.resolve("n", n)?.unwrap_or(50);
    let f = fixed_point_supercritical(p, x_max)?;
    let meta = Meta::new("fixed-point")
        .param("p", fmt_f64(p))
        .param("x_max", x_max);
    emit_tail(&f, meta, out)
}

pub fn drift_cmd(common: &CommonArgs, out: &OutArgs, p: Option<f64>) -> Result<()> {
    let cfg = common.config()?;
    let p = cfg.require::<f64>("p", p)?;
    let d = solve_drift_equation(p)?;
    let meta = Meta::new("drift").param("p", fmt_f64(p));
    write_json(out.out.as_deref(), &meta, &d)
}

#[derive(Serialize)]
struct CriticalReport {
    gamma_star: f64,
    shift_per_level: f64,
    rate_residual: f64,
    tilted_support: Vec<f64>,
    tilted_probs: Vec<f64>,
    mean_reproduction: f64,
    critical_mean_shift: f64,
}

pub fn critical_cmd(common: &CommonArgs, out: &OutArgs, p: Option<f64>) -> Result<()> {
    let cfg = common.config()?;
    let p = check_range("p", cfg.require::<f64>("p", p)?, 0.0, 1.0, true, true)?;
    let spec = ProgenySpec::bernoulli_pm1(p)?;
    let gamma = solve_critical_gamma(&spec)?;
    let tilted = reduce_to_critical(&spec)?;
    let rep = check_aidekon(&tilted);
    let report = CriticalReport {
        gamma_star: gamma,
        shift_per_level: tilted.tilt().unwrap().shift_per_level,
        rate_residual: cumulants(&spec, gamma)?.rate.abs(),
        tilted_support: tilted.support().to_vec(),
        tilted_probs: tilted.probs().to_vec(),
        mean_reproduction: rep.mean_reproduction,
        critical_mean_shift: rep.critical_mean_shift,
    };
    let meta = Meta::new("critical").param("p", fmt_f64(p));
    write_json(out.out.as_deref(), &meta, &report)
}

pub fn aidekon_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    p: Option<f64>,
    tilted: bool,
) -> Result<()> {
    let cfg = common.config()?;
    let p = check_range("p", cfg.require::<f64>("p", p)?, 0.0, 1.0, true, true)?;
    let tilted = cfg.resolve("tilted", Some(tilted))?.unwrap_or(false);
    let mut spec = ProgenySpec::bernoulli_pm1(p)?;
    if tilted {
        spec = reduce_to_critical(&spec)?;
    }
    let report = check_aidekon(&spec);
    let meta = Meta::new("aidekon")
        .param("p", fmt_f64(p))
        .param("tilted", tilted);
    write_json(out.out.as_deref(), &meta, &report)
}

#[derive(Serialize)]
struct GumbelReport {
    gamma_star: f64,
    rho_star: f64,
    sigma: f64,
    residual: f64,
    kappa: f64,
    beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_n: Option<f64>,
}

pub fn gumbel_cmd(common: &CommonArgs, out: &OutArgs, p: Option<f64>, n: Option<u32>) -> Result<()> {
    let cfg = common.config()?;
    let p = cfg.require::<f64>("p", p)?;
    let n = cfg.resolve::<u32>("n", n)?;
    let kb = bernoulli_kappa_beta(p)?;
    let params = solve_gamma_star(&classify(LatticePmf::bernoulli01(p)?))?;
    let report = GumbelReport {
        gamma_star: params.gamma_star,
        rho_star: params.rho_star,
        sigma: params.sigma,
        residual: params.residual,
        kappa: kb.kappa,
        beta: kb.beta,
        a_n: n.map(|n| params.a_n(n)),
    };
    let mut meta = Meta::new("gumbel").param("p", fmt_f64(p));
    if let Some(n) = n {
        meta = meta.param("n", n);
    }
    write_json(out.out.as_deref(), &meta, &report)
}

pub fn verify_bound_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    p: Option<f64>,
    n: Option<u32>,
    interval: Option<Interval>,
) -> Result<()> {
    let cfg = common.config()?;
    let p = check_range("p", cfg.require::<f64>("p", p)?, 0.0, 1.0, true, true)?;
    let n = cfg.require::<u32>("n", n)?;
    let interval = cfg
        .resolve::<Interval>("interval", interval)?
        .unwrap_or(Interval(-3.0, 3.0));
    let scheme = classify(LatticePmf::bernoulli01(p)?);
    let table = verify_bound(&scheme, n, (interval.0, interval.1))?;
    let meta = Meta::new("verify-bound")
        .param("p", fmt_f64(p))
        .param("n", n)
        .param("interval", interval)
        .param("gamma_star", fmt_f64(table.params.gamma_star))
        .param("rho_star", fmt_f64(table.params.rho_star))
        .param("sigma", fmt_f64(table.params.sigma))
        .param("max_abs_ratio_err", fmt_f64(table.max_abs_ratio_err));
    match out.format {
        Format::Csv => {
            let rows: Vec<String> = table
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{},{},{},{}",
                        r.n,
                        fmt_f64(r.z),
                        r.m,
                        fmt_f64(r.exact_neglog),
                        fmt_f64(r.asymptotic_neglog),
                        fmt_f64(r.ratio)
                    )
                })
                .collect();
            write_csv(
                out.out.as_deref(),
                &meta,
                "n,z,m,exact_neglog,asymptotic_neglog,ratio",
                &rows,
            )
        }
        Format::Json => write_json(out.out.as_deref(), &meta, &table),
    }
}

pub fn simulate_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    n: Option<u32>,
    p: Option<f64>,
    replicas: Option<u64>,
    seed: Option<u64>,
) -> Result<()> {
    let cfg = common.config()?;
    let n = cfg.require::<u32>("n", n)?;
    let p = check_range("p", cfg.resolve("p", p)?.unwrap_or(0.5), 0.0, 1.0, true, true)?;
    let replicas = cfg.resolve("replicas", replicas)?.unwrap_or(10_000);
    let seed = cfg.resolve("seed", seed)?.unwrap_or(0);
    let sim = simulate_brw(n, p, seed, replicas)?;
    let meta = Meta::new("simulate")
        .param("n", n)
        .param("p", fmt_f64(p))
        .param("replicas", replicas)
        .param("seed", seed);
    let rows: Vec<String> = sim
        .per_level
        .iter()
        .map(|l| {
            format!(
                "{},{},{},{},{}",
                l.level,
                fmt_f64(l.mean_max),
                fmt_f64(l.mean_argmax_count),
                fmt_f64(l.p_argmax_le_4),
                l.mean_increment.map(fmt_f64).unwrap_or_default()
            )
        })
        .collect();
    match out.format {
        Format::Csv => {
            write_csv(
                out.out.as_deref(),
                &meta,
                "level,mean_M,mean_K,p_K_le_4,mean_increment",
                &rows,
            )?;
            // run metadata (seed, replicas, sampler events) as a sidecar
            if let Some(path) = out.out.as_deref() {
                let side = sidecar_path(path);
                write_json(Some(&side), &meta, &sim.sampler)?;
            }
            Ok(())
        }
        Format::Json => write_json(out.out.as_deref(), &meta, &sim),
    }
}

pub fn gw_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    n: Option<u32>,
    replicas: Option<u64>,
    seed: Option<u64>,
) -> Result<()> {
    let cfg = common.config()?;
    let n = cfg.require::<u32>("n", n)?;
    let replicas = cfg.resolve("replicas", replicas)?.unwrap_or(10_000);
    let seed = cfg.resolve("seed", seed)?.unwrap_or(0);
    let sim = simulate_gw_restart(n, replicas, seed)?;
    let meta = Meta::new("gw")
        .param("n", n)
        .param("replicas", replicas)
        .param("seed", seed);
    match out.format {
        Format::Csv => {
            let rows: Vec<String> = sim
                .pmf
                .iter()
                .map(|(z, p)| format!("{},{}", z, fmt_f64(*p)))
                .collect();
            write_csv(out.out.as_deref(), &meta, "z,prob", &rows)
        }
        Format::Json => write_json(out.out.as_deref(), &meta, &sim),
    }
}

pub fn joint_cmd(
    common: &CommonArgs,
    out: &OutArgs,
    n: Option<u32>,
    p: Option<f64>,
    k_max: Option<u32>,
) -> Result<()> {
    let cfg = common.config()?;
    let n = cfg.require::<u32>("n", n)?;
    let p = check_range("p", cfg.resolve("p", p)?.unwrap_or(0.5), 0.0, 1.0, true, true)?;
    let k_max = cfg.resolve("k_max", k_max)?.unwrap_or(64);
    let mut budget = common.budget()?;
    let report = joint_evolve(n, p, k_max, &mut budget)?;
    let meta = Meta::new("joint")
        .param("n", n)
        .param("p", fmt_f64(p))
        .param("k_max", k_max)
        .param(
            "pooled_top_cell",
            "counts >= k_max evaluated at k_max (upper bound on E 4^-K)",
        )
        .param("budget_ops", budget.limit());
    write_json(out.out.as_deref(), &meta, &report)
}
