//! Subcommand implementations: each resolves its grid from the config,
//! dispatches grid points to the rayon pool, and merges results in grid
//! order so the rendered artifact is independent of the worker count.

use super::config::RunConfig;
use super::output::{Cell, Table};
use super::CliError;
use crate::closed_forms::{self, CriticalExponents};
use crate::coherence;
use crate::fits::fit_power_law;
use crate::fock;
use crate::gaussian::{cycle_outcome, ThermalSpec};
use crate::ising::{tfim_w_irr, TFIMSpec};
use crate::protocol::RampSpec;
use crate::work_statistics::{cumulants_from_distribution, work_distribution};
use rayon::prelude::*;

const Z_NU: f64 = CriticalExponents::MEAN_FIELD.z_nu;

fn thermal(n_beta: f64) -> Result<ThermalSpec, crate::Error> {
    if n_beta == 0.0 {
        Ok(ThermalSpec::vacuum())
    } else {
        ThermalSpec::from_occupation(n_beta)
    }
}

/// Squeezing sweep over (r, N_β, 2ωτ) with the closed-form plateau columns.
pub fn cmd_cycle(cfg: &RunConfig) -> Result<Table, CliError> {
    let rs = cfg.f64_list("r")?;
    let n_betas = cfg.f64_list("n_beta")?;
    let taus2 = cfg.f64_list("two_omega_tau")?;
    let g_f = cfg.f64("g_f")?;
    let tol = cfg.f64("tol")?;

    let mut grid = Vec::new();
    for &r in &rs {
        for &nb in &n_betas {
            for &t2 in &taus2 {
                grid.push((r, nb, t2));
            }
        }
    }
    let rows: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&(r, nb, t2)| -> Result<Vec<Cell>, crate::Error> {
            let spec = RampSpec::new(g_f, r, t2 / 2.0)?;
            let th = thermal(nb)?;
            let out = cycle_outcome(&spec, &th, tol)?;
            let bw = th.beta_omega();
            Ok(vec![
                t2.into(),
                r.into(),
                bw.into(),
                nb.into(),
                out.squeeze_amp.into(),
                closed_forms::squeezing_universal(Z_NU, r).into(),
                out.w_irr.into(),
                closed_forms::w_irr_universal(bw, Z_NU, r, 1.0).into(),
                out.s_irr.into(),
                closed_forms::s_irr_universal(bw, Z_NU, r).into(),
            ])
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::Numerical)?;

    Ok(Table {
        columns: vec![
            "two_omega_tau",
            "r",
            "beta_omega",
            "n_beta",
            "s",
            "s_theory",
            "w_irr",
            "w_irr_theory",
            "s_irr",
            "s_irr_theory",
        ],
        rows,
        ..Default::default()
    })
}

/// Work distributions over a (N_β, r) list, with per-combination diagnostics
/// (cumulants, negative-work mass, Crooks deviation) as summary blocks.
pub fn cmd_workdist(cfg: &RunConfig) -> Result<Table, CliError> {
    let n_betas = cfg.f64_list("n_beta")?;
    let rs = cfg.f64_list("r")?;
    let eps_tail = cfg.f64("eps_tail")?;
    let order = cfg.usize("cumulant_order")?;
    let squeeze_key = cfg.get("squeeze").to_string();

    let mut grid = Vec::new();
    for &nb in &n_betas {
        for &r in &rs {
            grid.push((nb, r));
        }
    }
    type Combo = (Vec<Vec<Cell>>, (String, Vec<(&'static str, Cell)>));
    let combos: Vec<Combo> = grid
        .par_iter()
        .map(|&(nb, r)| -> Result<Combo, crate::Error> {
            let s = if squeeze_key == "auto" {
                closed_forms::squeezing_universal(Z_NU, r)
            } else {
                squeeze_key
                    .parse::<f64>()
                    .map_err(|e| crate::Error::InvalidParameter(format!("squeeze: {e}")))?
            };
            let th = thermal(nb)?;
            let wd = work_distribution(&th, s, eps_tail)?;
            let kappa = cumulants_from_distribution(&wd, order)?;
            let mut rows = Vec::new();
            for (k, p) in wd.support() {
                rows.push(vec![
                    Cell::Float(nb),
                    Cell::Float(r),
                    Cell::Float(s),
                    Cell::Int(k),
                    Cell::Float(wd.work_at(k)),
                    Cell::Float(p),
                ]);
            }
            let mut fields: Vec<(&'static str, Cell)> = vec![
                ("n_beta", nb.into()),
                ("r", r.into()),
                ("s", s.into()),
                ("tail_mass", wd.tail_mass.into()),
                ("p_negative", wd.negative_work_probability().into()),
                ("crooks_deviation", wd.crooks_deviation(1e-10).into()),
            ];
            const NAMES: [&str; 4] = ["kappa1", "kappa2", "kappa3", "kappa4"];
            for (i, &k) in kappa.iter().enumerate() {
                fields.push((NAMES[i], k.into()));
            }
            let name = format!("distribution n_beta={nb} r={r}");
            Ok((rows, (name, fields)))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Numerical)?;

    let mut table = Table {
        columns: vec!["n_beta", "r", "s", "k", "w_over_omega", "probability"],
        ..Default::default()
    };
    for (rows, summary) in combos {
        table.rows.extend(rows);
        table.summaries.push(summary);
    }
    Ok(table)
}

/// Coherence/population split of the entropy production over a (N_β, r) grid.
pub fn cmd_coherence(cfg: &RunConfig) -> Result<Table, CliError> {
    let n_betas = cfg.f64_list("n_beta")?;
    let rs = cfg.f64_list("r")?;
    let eps_tail = cfg.f64("eps_tail")?;

    let mut grid = Vec::new();
    for &nb in &n_betas {
        for &r in &rs {
            grid.push((nb, r));
        }
    }
    let rows: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&(nb, r)| -> Result<Vec<Cell>, crate::Error> {
            let th = thermal(nb)?;
            let s = closed_forms::squeezing_universal(Z_NU, r);
            let c = coherence::coherence_entropy(&th, s, eps_tail)?;
            let d = coherence::population_relative_entropy(&th, s, eps_tail)?;
            let s_irr = closed_forms::s_irr_universal(th.beta_omega(), Z_NU, r);
            let ratio = coherence::coherence_ratio(&th, s, eps_tail)?;
            Ok(vec![
                nb.into(),
                th.beta_omega().into(),
                r.into(),
                s.into(),
                c.into(),
                d.into(),
                s_irr.into(),
                ratio.into(),
            ])
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::Numerical)?;

    Ok(Table {
        columns: vec![
            "n_beta",
            "beta_omega",
            "r",
            "s",
            "coherence",
            "divergence",
            "s_irr",
            "ratio",
        ],
        rows,
        ..Default::default()
    })
}

/// TFIM τ-sweep with the mean-field companion curve and a power-law fit.
pub fn cmd_ising(cfg: &RunConfig) -> Result<Table, CliError> {
    let n_spins = cfg.usize("n_spins")?;
    let r = cfg.f64("r")?;
    let g_f = cfg.f64("g_f")?;
    let taus = cfg.f64_list("tau")?;
    let tol = cfg.f64("tol")?;

    let rows: Vec<(f64, f64, f64)> = taus
        .par_iter()
        .map(|&tau| -> Result<(f64, f64, f64), crate::Error> {
            let ramp = RampSpec::new(g_f, r, tau)?;
            let w_tfim = tfim_w_irr(&TFIMSpec::new(n_spins, ramp)?, tol)?;
            let w_mf = cycle_outcome(
                &RampSpec::new(g_f, r, tau)?,
                &ThermalSpec::vacuum(),
                tol,
            )?
            .w_irr;
            Ok((tau, w_tfim, w_mf))
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::Numerical)?;

    let mut table = Table {
        columns: vec!["tau", "n_spins", "r", "w_irr", "w_mean_field"],
        ..Default::default()
    };
    let points: Vec<(f64, f64)> = rows.iter().map(|&(t, w, _)| (t, w)).collect();
    if let Ok(fit) = fit_power_law(&points, None) {
        table.summaries.push((
            "tfim_fit".to_string(),
            vec![
                ("slope", (-fit.exponent).into()),
                ("prefactor", fit.prefactor.into()),
                ("r_squared", fit.r_squared.into()),
                ("sample_count", (fit.sample_count as i64).into()),
            ],
        ));
    }
    for (tau, w_tfim, w_mf) in rows {
        table.rows.push(vec![
            tau.into(),
            Cell::Int(n_spins as i64),
            r.into(),
            w_tfim.into(),
            w_mf.into(),
        ]);
    }
    Ok(table)
}

/// Finite-time approach to the adiabatic-work plateau: fit the residual
/// w_irr(∞) − w_irr(τ) ∝ τ^{−b} per ramp exponent and compare with the
/// scaling prediction b = 2zνr/(1+zνr).
pub fn cmd_scaling(cfg: &RunConfig) -> Result<Table, CliError> {
    let rs = cfg.f64_list("r")?;
    let taus = cfg.f64_list("tau")?;
    let tol = cfg.f64("tol")?;

    let rows: Vec<Vec<Cell>> = rs
        .iter()
        .map(|&r| -> Result<Vec<Cell>, CliError> {
            let w_inf = closed_forms::w_irr_universal(f64::INFINITY, Z_NU, r, 1.0);
            let residuals: Vec<(f64, f64)> = taus
                .par_iter()
                .map(|&tau| -> Result<(f64, f64), crate::Error> {
                    let out = cycle_outcome(
                        &RampSpec::new(1.0, r, tau)?,
                        &ThermalSpec::vacuum(),
                        tol,
                    )?;
                    Ok((tau, w_inf - out.w_irr))
                })
                .collect::<Result<_, _>>()
                .map_err(CliError::Numerical)?;
            let fit = fit_power_law(&residuals, None).map_err(CliError::Numerical)?;
            Ok(vec![
                r.into(),
                fit.exponent.into(),
                closed_forms::kz_exponent_b(Z_NU, r).into(),
                fit.prefactor.into(),
                fit.r_squared.into(),
            ])
        })
        .collect::<Result<_, _>>()?;

    Ok(Table {
        columns: vec!["r", "b_fit", "b_theory", "prefactor", "r_squared"],
        rows,
        ..Default::default()
    })
}

/// Hidden debugging command: compare Gaussian dynamics against brute-force
/// truncated-basis propagation on the same cycle.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<Table, CliError> {
    let nb = cfg.f64("n_beta")?;
    let r = cfg.f64("r")?;
    let t2 = cfg.f64("two_omega_tau")?;
    let dim = cfg.usize("dim")?;
    let tol = cfg.f64("tol")?;

    let run = || -> Result<Vec<Vec<Cell>>, crate::Error> {
        let spec = RampSpec::new(1.0, r, t2 / 2.0)?;
        let th = thermal(nb)?;
        let gauss = cycle_outcome(&spec, &th, tol)?;
        let state = fock::propagate(&spec, &th, dim, tol)?;
        let (g_lo, g_hi) = {
            let cov = crate::gaussian::evolve_cycle(&spec, &th, tol)?;
            cov.eigenvalues()
        };
        let (f_lo, f_hi) = state.covariance_eigenvalues();
        let pops = coherence::dephased_populations(&th, gauss.squeeze_amp, 1e-10)?;
        let diag = state.diagonal();
        let pop_dev = pops
            .probs
            .iter()
            .zip(diag.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        let row = |name: &str, reference: f64, oracle: f64| -> Vec<Cell> {
            vec![
                name.into(),
                reference.into(),
                oracle.into(),
                (oracle - reference).abs().into(),
            ]
        };
        Ok(vec![
            row("occupation", gauss.mean_excitations, state.occupation()),
            row("cov_eig_lo", g_lo, f_lo),
            row("cov_eig_hi", g_hi, f_hi),
            row("population_sup_dev", 0.0, pop_dev),
            row("basis_leakage", 0.0, state.leakage),
        ])
    };
    let rows = run().map_err(CliError::Numerical)?;
    Ok(Table {
        columns: vec!["metric", "reference", "oracle", "deviation"],
        rows,
        ..Default::default()
    })
}
