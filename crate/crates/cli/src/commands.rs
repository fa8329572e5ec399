use clap::ValueEnum;
use qdot_core::dot::{
    addressing_plan, control_precision, dipole_dipole_energy, photon_energies, varshni_slope,
    DipoleGeometry,
};
use qdot_core::gate::{calibrate_phase, raman_gate_error, simulate_conditional_gate, PhaseCurve};
use qdot_core::phonon::{min_separation, phonon_error, phonon_table, spectral_density};
use qdot_core::photon::{
    bsa_coincidence, dephasing_error, link_attempt_stats, link_time_monte_carlo, photon_efficiency,
    wavepacket_overlap_error, TwoPhotonInput,
};
use qdot_core::readout::simulate_readout;
use qdot_core::repeater::simulate_chain;
use qdot_core::{ChainConfig, DotConfig, ReadoutConfig};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Cell, OutputDir};

fn gamma(dot: &DotConfig) -> f64 {
    1.0 / dot.t_rad_ps
}

pub fn gate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let opts = cfg.gate.options();
    let (e_dd, source) = match cfg.gate.e_dd_mev {
        Some(e) => (e, "configured"),
        None => {
            let [lo, hi] = cfg.gate.e_dd_range_mev;
            let e = calibrate_phase(&cfg.drive, cfg.gate.target_phase_rad, (lo, hi), &opts)?;
            (e, "calibrated")
        }
    };
    let report = simulate_conditional_gate(&cfg.drive, e_dd, gamma(&cfg.dot), &opts)?;
    out.json(
        "gate.json",
        &json!({
            "drive": cfg.drive,
            "e_dd_source": source,
            "t_rad_ps": cfg.dot.t_rad_ps,
            "report": report,
            "raman_gate_error": raman_gate_error(&cfg.raman),
        }),
    )?;
    if let Some(traj) = &report.single_dot_trajectory {
        let rows = traj
            .times
            .iter()
            .zip(&traj.populations)
            .zip(&traj.exposures);
        out.csv(
            "gate_single_dot.csv",
            &["time_ps", "p_ground", "p_trion", "trion_exposure_ps"],
            rows.map(|((t, p), x)| [(*t).into(), p[0].into(), p[1].into(), x[1].into()]),
        )?;
    }
    if let Some(traj) = &report.pair_trajectory {
        let rows = traj.times.iter().zip(&traj.populations);
        out.csv(
            "gate_pair.csv",
            &["time_ps", "p_gg", "p_tg", "p_gt", "p_tt"],
            rows.map(|(t, p)| {
                let tt = p.get(3).copied().unwrap_or(0.0);
                [
                    (*t).into(),
                    p[0].into(),
                    p[1].into(),
                    p[2].into(),
                    tt.into(),
                ]
            }),
        )?;
    }
    let mut msg = format!(
        "E_dd = {e_dd:.4} meV ({source}), phi_cond = {:.6} rad, single-dot exposure = {:.4} ps, \
         spontaneous error = {:.4}%",
        report.conditional_phase,
        report.single_dot_exposure_ps,
        100.0 * report.spontaneous_error
    );
    if !report.adiabatic {
        msg.push_str(&format!(
            "\nwarning: residual trion population {:.2e}; the phase is not a clean gate phase",
            report.residual_trion_population
        ));
    }
    Ok(msg)
}

pub fn phonon(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let model = cfg.phonon_model()?;
    let rows = phonon_table(&model, &cfg.drive, &cfg.phonon.delta_grid_mev)?;
    out.csv(
        "phonon.csv",
        &["delta_mev", "j_per_ps", "phonon_error"],
        rows.iter()
            .map(|r| [r.delta_mev.into(), r.j_per_ps.into(), r.error.into()]),
    )?;
    let e_s = cfg.node.e_s_mev;
    let eps = phonon_error(&model, &cfg.drive, e_s)?;
    let min_e_s = min_separation(&model, &cfg.drive, cfg.phonon.budget)?;
    out.json(
        "phonon.json",
        &json!({
            "material": model.material.name,
            "quadrature_order": model.quadrature_order,
            "e_s_mev": e_s,
            "j_at_e_s_per_ps": spectral_density(&model, e_s)?,
            "phonon_error_at_e_s": eps,
            "budget": cfg.phonon.budget,
            "min_separation_mev": min_e_s,
        }),
    )?;
    Ok(format!(
        "phonon error at E_S = {e_s} meV: {:.4}%; budget {:.3}% needs E_S >= {min_e_s:.3} meV",
        100.0 * eps,
        100.0 * cfg.phonon.budget
    ))
}

pub fn link(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let t_rad = cfg.dot.t_rad_ps;
    let stats = link_attempt_stats(&cfg.link, t_rad)?;
    let mc = link_time_monte_carlo(&stats, cfg.trials.link, cfg.seed);
    let de = cfg.bell.delta_e_uev;
    let bell = |input| bsa_coincidence(input, de, t_rad);
    let dephasing = cfg
        .bell
        .t_deph_ps
        .map(|t| dephasing_error(t_rad, t))
        .transpose()?;
    out.json(
        "link.json",
        &json!({
            "photon_efficiency": photon_efficiency(&cfg.link, t_rad),
            "stats": stats,
            "monte_carlo": mc,
            "delta_e_uev": de,
            "overlap_error": wavepacket_overlap_error(de, t_rad)?,
            "dephasing_error": dephasing,
            "bell": {
                "psi_minus": bell(TwoPhotonInput::PsiMinus)?,
                "psi_plus": bell(TwoPhotonInput::PsiPlus)?,
                "product": bell(TwoPhotonInput::Product)?,
            },
        }),
    )?;
    Ok(format!(
        "P = {:.5}, mean link time {:.4} ms (MC {:.4} +- {:.4} ms over {} trials)",
        stats.p_success, stats.mean_time_ms, mc.mean_time_ms, mc.standard_error_ms, mc.n_trials
    ))
}

pub fn readout(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let r = simulate_readout(&cfg.readout, cfg.seed)?;
    out.json("readout.json", &r)?;
    let n = r.bright_histogram.len().max(r.dark_histogram.len());
    out.csv(
        "readout_histogram.csv",
        &["counts", "p_bright", "p_dark"],
        (0..n).map(|k| {
            let b = r.bright_histogram.get(k).copied().unwrap_or(0.0);
            let d = r.dark_histogram.get(k).copied().unwrap_or(0.0);
            [k.into(), b.into(), d.into()]
        }),
    )?;
    Ok(format!(
        "eps_bright = {:.5} +- {:.5}, eps_dark = {:.5} (Poisson limit {:.5}) over {} shots",
        r.eps_bright, r.eps_bright_se, r.eps_dark, r.eps_bright_poisson_limit, r.n_shots
    ))
}

pub fn repeater(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let run = simulate_chain(
        &cfg.chain,
        &cfg.link,
        cfg.dot.t_rad_ps,
        cfg.trials.repeater,
        cfg.seed,
    )?;
    out.json("repeater.json", &run.summary)?;
    out.csv(
        "repeater_trials.csv",
        &[
            "trial",
            "total_time_ms",
            "max_link_time_ms",
            "werner_w",
            "fidelity",
        ],
        run.trials.iter().map(|t| {
            [
                t.trial.into(),
                t.total_time_ms.into(),
                t.max_link_time_ms.into(),
                t.w.into(),
                t.fidelity.into(),
            ]
        }),
    )?;
    let s = &run.summary;
    Ok(format!(
        "{} links ({} km): median {:.2} ms (p05 {:.2}, p95 {:.2}), mean {:.2} +- {:.2} ms, median F {:.4}",
        s.n_links, s.total_km, s.time_ms.p50, s.time_ms.p05, s.time_ms.p95, s.mean_time_ms,
        s.mean_time_se_ms, s.fidelity.p50
    ))
}

pub fn tune(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let mat = cfg.material()?;
    let energies = photon_energies(&cfg.dot);
    let precision = control_precision(&cfg.dot, &mat, cfg.node.target_uev);
    let node = &cfg.node;
    let dd = |g| dipole_dipole_energy(cfg.dot.d_eh_nm, node.separation_nm, mat.eps_r, g);
    let plan = addressing_plan(node.e_w_mev, node.e_s_mev)?;
    let mut warnings = Vec::new();
    if energies.is_degenerate() {
        warnings.push("photon energies are degenerate (zero Zeeman splitting)".to_string());
    }
    if precision.delta_t_max_mk.is_none() {
        warnings.push("dE/dT vanishes at the operating temperature; delta_T is unbounded".into());
    }
    out.json(
        "tune.json",
        &json!({
            "material": mat.name,
            "photon_energies": energies,
            "photon_splitting_mev": energies.splitting_mev(),
            "degenerate": energies.is_degenerate(),
            "varshni_slope_mev_per_k": varshni_slope(cfg.dot.t_op_k, &mat),
            "control_precision": precision,
            "dipole_dipole_mev": {
                "geometry": node.geometry,
                "separation_nm": node.separation_nm,
                "value": dd(node.geometry)?,
                "four_charge": dd(DipoleGeometry::FourCharge)?,
                "point_dipole": dd(DipoleGeometry::PointDipole)?,
            },
            "node": plan,
            "warnings": warnings,
        }),
    )?;
    let fmt = |x: Option<f64>| x.map_or("unbounded".to_string(), |v| format!("{v:.4}"));
    let mut msg = format!(
        "delta_B_max = {} mT, delta_T_max = {} mK, E_dd = {:.3} meV, {} qubits per node",
        fmt(precision.delta_b_max_mt),
        fmt(precision.delta_t_max_mk),
        dd(node.geometry)?,
        plan.n_qubits
    );
    for w in warnings {
        msg.push_str(&format!("\nwarning: {w}"));
    }
    Ok(msg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    /// Trion spacing E_S (meV): phonon spectral density and error.
    #[value(name = "e-s")]
    ES,
    /// Dipole-dipole energy E_dd (meV): conditional phase.
    EDd,
    /// Radiative lifetime (ps): gate and link figures.
    TRad,
    /// Emitter detuning (μeV): Bell-measurement error.
    DeltaE,
    /// Photon-count threshold: readout errors.
    Threshold,
    /// Chain length in links: repeater time and fidelity.
    NLinks,
}

impl SweepParam {
    fn file(self) -> String {
        let name = self.to_possible_value().expect("no skipped variants");
        format!("sweep_{}.csv", name.get_name().replace('-', "_"))
    }
}

pub fn sweep(
    cfg: &ExperimentConfig,
    out: &mut OutputDir,
    param: SweepParam,
    values: &[f64],
) -> Result<String, CliError> {
    if values.is_empty() {
        return Err(CliError::Validation(
            "sweep needs at least one value".into(),
        ));
    }
    let file = param.file();
    match param {
        SweepParam::ES => {
            let model = cfg.phonon_model()?;
            let rows = values
                .iter()
                .map(|&e| {
                    Ok([
                        e.into(),
                        spectral_density(&model, e)?.into(),
                        phonon_error(&model, &cfg.drive, e)?.into(),
                    ])
                })
                .collect::<Result<Vec<[Cell; 3]>, CliError>>()?;
            out.csv(&file, &["e_s_mev", "j_per_ps", "phonon_error"], rows)?;
        }
        SweepParam::EDd => {
            let opts = cfg.gate.options();
            let curve = PhaseCurve::new(&cfg.drive, &opts)?;
            let rows = values
                .iter()
                .map(|&e| {
                    if !(e >= 0.0) {
                        return Err(CliError::Validation(format!("E_dd {e} must be >= 0")));
                    }
                    let phi = curve.conditional_phase(e)?;
                    Ok([e.into(), phi.into()])
                })
                .collect::<Result<Vec<[Cell; 2]>, CliError>>()?;
            out.csv(&file, &["e_dd_mev", "conditional_phase_rad"], rows)?;
        }
        SweepParam::TRad => {
            let rows = values
                .iter()
                .map(|&t| {
                    let dot = DotConfig {
                        t_rad_ps: t,
                        ..cfg.dot.clone()
                    };
                    dot.validate()?;
                    let g = simulate_conditional_gate(
                        &cfg.drive,
                        cfg.gate.e_dd_mev.unwrap_or(f64::INFINITY),
                        gamma(&dot),
                        &cfg.gate.options(),
                    )?;
                    let herald = wavepacket_overlap_error(cfg.bell.delta_e_uev, t)?.exact;
                    let link = link_attempt_stats(&cfg.link, t)?;
                    Ok([
                        t.into(),
                        g.spontaneous_error.into(),
                        herald.into(),
                        link.mean_time_ms.into(),
                    ])
                })
                .collect::<Result<Vec<[Cell; 4]>, CliError>>()?;
            out.csv(
                &file,
                &[
                    "t_rad_ps",
                    "spontaneous_error",
                    "heralded_error",
                    "link_mean_time_ms",
                ],
                rows,
            )?;
        }
        SweepParam::DeltaE => {
            let t = cfg.dot.t_rad_ps;
            let rows = values
                .iter()
                .map(|&de| {
                    let e = wavepacket_overlap_error(de, t)?;
                    let plus = bsa_coincidence(TwoPhotonInput::PsiPlus, de, t)?;
                    Ok([
                        de.into(),
                        e.exact.into(),
                        e.leading_order.into(),
                        plus.coincidence_probability.into(),
                    ])
                })
                .collect::<Result<Vec<[Cell; 4]>, CliError>>()?;
            out.csv(
                &file,
                &[
                    "delta_e_uev",
                    "heralded_error",
                    "leading_order_error",
                    "p_coincidence_psi_plus",
                ],
                rows,
            )?;
        }
        SweepParam::Threshold => {
            let rows = values
                .iter()
                .map(|&v| {
                    let threshold = integer(v, "threshold")?;
                    let rc = ReadoutConfig {
                        threshold,
                        ..cfg.readout.clone()
                    };
                    let r = simulate_readout(&rc, cfg.seed)?;
                    Ok([
                        threshold.into(),
                        r.eps_bright.into(),
                        r.eps_bright_se.into(),
                        r.eps_dark.into(),
                        r.eps_dark_se.into(),
                    ])
                })
                .collect::<Result<Vec<[Cell; 5]>, CliError>>()?;
            out.csv(
                &file,
                &[
                    "threshold_counts",
                    "eps_bright",
                    "eps_bright_se",
                    "eps_dark",
                    "eps_dark_se",
                ],
                rows,
            )?;
        }
        SweepParam::NLinks => {
            let rows = values
                .iter()
                .map(|&v| {
                    let n = integer(v, "n_links")? as usize;
                    let chain = ChainConfig {
                        n_links: n,
                        ..cfg.chain.clone()
                    };
                    let s = simulate_chain(
                        &chain,
                        &cfg.link,
                        cfg.dot.t_rad_ps,
                        cfg.trials.repeater,
                        cfg.seed,
                    )?
                    .summary;
                    Ok([
                        n.into(),
                        s.total_km.into(),
                        s.time_ms.p50.into(),
                        s.mean_time_ms.into(),
                        s.mean_time_se_ms.into(),
                        s.fidelity.p50.into(),
                    ])
                })
                .collect::<Result<Vec<[Cell; 6]>, CliError>>()?;
            out.csv(
                &file,
                &[
                    "n_links",
                    "total_km",
                    "median_time_ms",
                    "mean_time_ms",
                    "mean_time_se_ms",
                    "median_fidelity",
                ],
                rows,
            )?;
        }
    }
    Ok(format!("{} points written to {file}", values.len()))
}

fn integer(v: f64, name: &str) -> Result<u64, CliError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(CliError::Validation(format!(
            "{name} must be a non-negative integer, got {v}"
        )))
    }
}
