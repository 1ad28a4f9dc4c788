//! One function per subcommand. Each returns its table and any contract violations.

use chain_scattering::analysis::{
    averaged_transmission, band_classify, delays_at, hartman_scan, DelayRecord,
};
use chain_scattering::scattering::{principal_phase, wrap_phase};
use chain_scattering::{
    cell_smatrix, chain_amplitudes, chain_amplitudes_addleft, chebyshev_transmission, displace,
    unitarity_defect, ChainState, ScatteringMatrix, WaveNumber, MODULUS_FLOOR,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::table::{Cell, Table};

pub struct Report {
    pub table: Table,
    pub violations: Vec<String>,
}

fn wave(k: f64) -> Result<WaveNumber, CliError> {
    WaveNumber::new(k).map_err(|e| CliError::field("k", e))
}

fn phase(z: num_complex::Complex64) -> Option<f64> {
    principal_phase(z, MODULUS_FLOOR)
}

fn check_unitarity(cfg: &ExperimentConfig, what: String, s: &ScatteringMatrix, out: &mut Vec<String>) -> f64 {
    let defect = unitarity_defect(s);
    if !(defect <= cfg.tol_unitarity) {
        out.push(format!("unitarity defect {defect:.3e} > {:.1e} at {what}", cfg.tol_unitarity));
    }
    defect
}

/// Largest amplitude difference between the add-right and add-left recurrences at entry `n`.
fn dual_path_gap(right: &ChainState, left: &ChainState, n: usize) -> f64 {
    let (a, b) = (right.entry(n).unwrap().s, left.entry(n).unwrap().s);
    [(a.t - b.t).norm(), (a.l - b.l).norm(), (a.r - b.r).norm()].into_iter().fold(0.0, f64::max)
}

pub fn cell(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.require_grid()?.points();
    let rows = grid
        .par_iter()
        .map(|&k| {
            let s = cell_smatrix(&cfg.potential, wave(k)?)?;
            let mut violations = Vec::new();
            let defect = check_unitarity(cfg, format!("k={k}"), &s, &mut violations);
            let row = vec![
                k.into(),
                s.t.re.into(),
                s.t.im.into(),
                s.l.re.into(),
                s.l.im.into(),
                s.r.re.into(),
                s.r.im.into(),
                s.transmission().into(),
                phase(s.t).into(),
                phase(s.l).into(),
                phase(s.r).into(),
                defect.into(),
            ];
            Ok((row, violations))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(vec![
        "k", "t_re", "t_im", "l_re", "l_im", "r_re", "r_im", "transmission", "alpha_t", "alpha_l", "alpha_r",
        "unitarity_defect",
    ]);
    Ok(collect(&mut table, rows))
}

fn collect(table: &mut Table, rows: Vec<(Vec<Cell>, Vec<String>)>) -> Report {
    let mut violations = Vec::new();
    for (row, v) in rows {
        table.push(row);
        violations.extend(v);
    }
    Report { table: std::mem::take(table), violations }
}

const CHAIN_COLUMNS: [&str; 11] = [
    "N",
    "k",
    "transmission_recurrence",
    "transmission_chebyshev",
    "chebyshev_difference",
    "dual_path_difference",
    "log_abs_t",
    "alpha_t",
    "alpha_l",
    "alpha_r",
    "unitarity_defect",
];

fn chain_row(
    cfg: &ExperimentConfig,
    right: &ChainState,
    left: &ChainState,
    n: usize,
) -> Result<(Vec<Cell>, Vec<String>), CliError> {
    let k = right.k().value();
    let entry = right.entry(n).unwrap();
    let recurrence = entry.transmission();
    let chebyshev = chebyshev_transmission(right.cell(), cfg.period, n)?;
    let difference = (recurrence - chebyshev).abs();
    let dual = dual_path_gap(right, left, n);
    let mut violations = Vec::new();
    let defect = check_unitarity(cfg, format!("k={k}, N={n}"), &entry.s, &mut violations);
    if !(difference <= cfg.tol_unitarity) {
        violations.push(format!("recurrence and Chebyshev |t|^2 differ by {difference:.3e} at k={k}, N={n}"));
    }
    if !(dual <= cfg.tol_unitarity) {
        violations.push(format!("add-right and add-left chains differ by {dual:.3e} at k={k}, N={n}"));
    }
    let row = vec![
        n.into(),
        k.into(),
        recurrence.into(),
        chebyshev.into(),
        difference.into(),
        dual.into(),
        entry.t_polar.ln_modulus.into(),
        wrap_phase(entry.t_polar.phase).into(),
        phase(entry.s.l).into(),
        phase(entry.s.r).into(),
        defect.into(),
    ];
    Ok((row, violations))
}

/// Per-N rows at a fixed `k` when `--k` is set, otherwise per-k rows at fixed `N`.
pub fn chain(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut table = Table::new(CHAIN_COLUMNS.to_vec());
    let rows = if let Some(k) = cfg.k {
        let n_max = cfg.require_n_max()?;
        let lattice = cfg.lattice(n_max)?;
        let k = wave(k)?;
        let right = chain_amplitudes(&lattice, k)?;
        let left = chain_amplitudes_addleft(&lattice, k)?;
        (1..=n_max).map(|n| chain_row(cfg, &right, &left, n)).collect::<Result<Vec<_>, _>>()?
    } else {
        let n = cfg.require_n()?;
        let lattice = cfg.lattice(n)?;
        cfg.require_grid()?
            .points()
            .par_iter()
            .map(|&k| {
                let k = wave(k)?;
                let right = chain_amplitudes(&lattice, k)?;
                let left = chain_amplitudes_addleft(&lattice, k)?;
                chain_row(cfg, &right, &left, n)
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(collect(&mut table, rows))
}

pub fn bands(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let n_max = cfg.require_n_max()?;
    let lattice = cfg.lattice(n_max)?;
    let rows = cfg
        .require_grid()?
        .points()
        .par_iter()
        .map(|&k| {
            let chain = chain_amplitudes(&lattice, wave(k)?)?;
            let verdict = band_classify(chain.cell(), cfg.period, cfg.tol_edge)?;
            let row = vec![
                k.into(),
                verdict.z.into(),
                verdict.z.abs().into(),
                verdict.class.as_str().into(),
                n_max.into(),
                chain.last().transmission().into(),
            ];
            Ok((row, Vec::new()))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(vec!["k", "z", "abs_z", "verdict", "N", "transmission_N"]);
    Ok(collect(&mut table, rows))
}

pub fn hartman(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let k = wave(cfg.require_k()?)?;
    let n_max = cfg.require_n_max()?;
    cfg.lattice(n_max)?;
    let scan = hartman_scan(&cfg.potential, cfg.period, k, n_max, cfg.fd_step)?;
    let mut table = Table::new(vec![
        "N", "k", "verdict", "tau_t", "traversal_time", "free_flight_time", "increment", "warning",
    ]);
    let mut previous: Option<f64> = None;
    for record in &scan.records {
        table.push(vec![
            record.n.into(),
            k.value().into(),
            scan.verdict.class.as_str().into(),
            record.tau_t.into(),
            record.traversal.into(),
            record.free_flight().into(),
            previous.map(|p| record.traversal - p).into(),
            scan.warning.clone().into(),
        ]);
        previous = Some(record.traversal);
    }
    Ok(Report { table, violations: Vec::new() })
}

/// Delays of the configured system: one cell, or `N` cells when `N` is set.
pub fn delay(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let lattice = cfg.n.map(|n| cfg.lattice(n)).transpose()?;
    let system = |k: WaveNumber| match &lattice {
        Some(lattice) => chain_amplitudes(lattice, k).map(|c| c.last().s),
        None => cell_smatrix(&cfg.potential, k),
    };
    let mut columns = vec!["k", "tau_t", "tau_l", "tau_r"];
    if cfg.displace.is_some() {
        columns.extend([
            "tau_t_displaced",
            "tau_l_displaced",
            "tau_r_displaced",
            "delta_tau_t",
            "delta_tau_l",
            "delta_tau_r",
            "expected_delta_tau_l",
        ]);
    }
    let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a - b);
    let rows = cfg
        .require_grid()?
        .points()
        .par_iter()
        .map(|&k| {
            let kw = wave(k)?;
            let base: DelayRecord = delays_at(system, kw, cfg.fd_step)?;
            let mut row: Vec<Cell> = vec![k.into(), base.tau_t.into(), base.tau_l.into(), base.tau_r.into()];
            if let Some(d) = cfg.displace {
                let moved = delays_at(|k| system(k).map(|s| displace(&s, d)), kw, cfg.fd_step)?;
                row.extend([
                    moved.tau_t.into(),
                    moved.tau_l.into(),
                    moved.tau_r.into(),
                    diff(moved.tau_t, base.tau_t).into(),
                    diff(moved.tau_l, base.tau_l).into(),
                    diff(moved.tau_r, base.tau_r).into(),
                    (2.0 * d / kw.velocity()).into(),
                ]);
            }
            Ok((row, Vec::new()))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(columns);
    Ok(collect(&mut table, rows))
}

pub fn packet(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let k0 = cfg.require_k()?;
    let sigma = cfg.sigma.ok_or_else(|| CliError::field("sigma", "packet needs a width --sigma"))?;
    let ns: Vec<usize> = match (&cfg.n_list, cfg.n, cfg.n_max) {
        (Some(list), _, _) => list.clone(),
        (None, _, Some(n_max)) => (1..=n_max).collect(),
        (None, Some(n), None) => vec![n],
        (None, None, None) => return Err(CliError::field("N_list", "missing (set N_list, N_max or N)")),
    };
    let n_top = *ns.iter().max().unwrap();
    let lattice = cfg.lattice(n_top)?;
    let averages = averaged_transmission(&cfg.potential, cfg.period, &ns, k0, sigma, cfg.packet_points)?;
    let centre = chain_amplitudes(&lattice, wave(k0)?)?;
    let mut table = Table::new(vec!["N", "k0", "sigma", "averaged_transmission", "transmission_at_k0"]);
    for (n, average) in averages {
        table.push(vec![
            n.into(),
            k0.into(),
            sigma.into(),
            average.into(),
            centre.entry(n).unwrap().transmission().into(),
        ]);
    }
    Ok(Report { table, violations: Vec::new() })
}
