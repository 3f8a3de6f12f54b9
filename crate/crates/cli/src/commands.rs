//! Subcommand bodies. Each writes one CSV or JSON document to the sink.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use pump_core::acceptance::{run_suite, CriterionReport};
use pump_core::impurity::t_matrix;
use pump_core::lattice_green::green_set;
use pump_core::oracle::{
    brouwer_pumped_charge, extract_t_matrix, resolvent_element, FiniteLattice, ResolventMethod,
    Sector,
};
use pump_core::pump::adiabatic::{adiabaticity_check, AdiabaticityReport};
use pump_core::pump::cycle::Orientation;
use pump_core::pump::{
    energy_sweep, footprint_sweep, pumped_singlets, single_particle_pumped_charge, Diagnostics,
};
use pump_core::{
    ComplexEnergy, DistributionMode, EvanescentBranch, FermiDistribution, ImpurityState,
    LatticeModel, PumpError, SignPairing,
};

use crate::config::RunConfig;
use crate::error::CliError;

/// Open `path`, or stdout when there is none.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn model(m: u32) -> Result<LatticeModel, CliError> {
    LatticeModel::new(m).map_err(|e| CliError::Config(e.to_string()))
}

pub fn green(cfg: &RunConfig, with_oracle: bool, out: Box<dyn Write>) -> Result<(), CliError> {
    let energies = cfg.green_energies()?;
    let m = model(cfg.model.m)?;
    let gcfg = cfg.pump_config().kernel.green;
    let eta = if with_oracle { cfg.oracle.eta } else { cfg.model.eta };
    let lattice = if with_oracle {
        let lat = FiniteLattice::open(cfg.oracle.n_sites)?;
        lat.check_room_for(m.m())?;
        Some(lat)
    } else {
        None
    };

    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "E", "eta", "re_g0_onsite", "im_g0_onsite", "re_g0_offdiag", "im_g0_offdiag", "re_g0_plus",
        "im_g0_plus", "re_g0_minus", "im_g0_minus",
    ];
    if with_oracle {
        header.push("oracle_rel_err");
    }
    header.push("err");
    w.write_record(&header)?;

    for e in energies {
        let row = ComplexEnergy::new(e, eta).and_then(|z| {
            let set = green_set(&m, z, &gcfg)?;
            let oracle = match &lattice {
                Some(lat) => {
                    let free = ImpurityState::new(0.0, 0.0)?;
                    let s = m.m() as i64;
                    let element = |col| {
                        resolvent_element(lat, Sector::Symmetric, &free, m.m(), z, (s, s), col, ResolventMethod::Auto)
                    };
                    let on = element((s, s))?;
                    let off = element((-s, -s))?;
                    Some(((set.onsite - on).norm() / on.norm()).max((set.offdiag - off).norm() / off.norm()))
                }
                None => None,
            };
            Ok((set, oracle))
        });
        let mut rec = vec![num(e), num(eta)];
        match row {
            Ok((set, oracle)) => {
                for g in [set.onsite, set.offdiag, set.plus, set.minus] {
                    rec.push(num(g.re));
                    rec.push(num(g.im));
                }
                if let Some(r) = oracle {
                    rec.push(num(r));
                }
                rec.push(String::new());
            }
            Err(err) => {
                rec.extend(std::iter::repeat_n(num(f64::NAN), header.len() - 3));
                rec.push(err.to_string());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CycleEcho {
    vertices: Vec<(f64, f64)>,
    period: f64,
    orientation: Option<Orientation>,
    signed_area: f64,
}

#[derive(Serialize)]
struct PumpRecord {
    q_singlets: f64,
    error_estimate: f64,
    mode: DistributionMode,
    e_max: f64,
    beta: Option<f64>,
    m: u32,
    eta: f64,
    sign_pairing: SignPairing,
    evanescent_branch: EvanescentBranch,
    cycle: CycleEcho,
    adiabaticity: AdiabaticityReport,
    diagnostics: Diagnostics,
}

pub fn pump(cfg: &RunConfig, mut out: Box<dyn Write>) -> Result<(), CliError> {
    let cycle = cfg.cycle()?;
    let m = model(cfg.model.m)?;
    let dist = cfg.distribution(cfg.distribution.e_max)?;
    let result = pumped_singlets(&cycle, &m, &dist, &cfg.pump_config())?;
    let record = PumpRecord {
        q_singlets: result.q_singlets,
        error_estimate: result.error_estimate,
        mode: result.mode,
        e_max: dist.e_max,
        beta: (dist.mode == DistributionMode::FiniteT).then_some(dist.beta),
        m: m.m(),
        eta: cfg.model.eta,
        sign_pairing: cfg.sensitivity.sign_pairing,
        evanescent_branch: cfg.sensitivity.evanescent_branch,
        cycle: CycleEcho {
            vertices: cycle.vertices().to_vec(),
            period: cycle.period(),
            orientation: cycle.orientation(),
            signed_area: cycle.signed_area(),
        },
        adiabaticity: adiabaticity_check(cycle.period(), &m, &dist)?,
        diagnostics: result.diagnostics,
    };
    serde_json::to_writer_pretty(&mut out, &record)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn err_text(e: &Option<String>) -> String {
    e.clone().unwrap_or_default()
}

pub fn fig2b(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), CliError> {
    let (lo, hi) = cfg.fig2b_grids()?;
    let m = model(cfg.model.m)?;
    let dist = cfg.distribution(cfg.fig2b.e_max)?;
    let cells = footprint_sweep(&lo, &hi, &m, &dist, &cfg.pump_config())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u_min", "u_max", "q_singlets", "error_estimate", "err"])?;
    for c in &cells {
        w.write_record([num(c.u_min), num(c.u_max), num(c.q_singlets), num(c.error_estimate), err_text(&c.error)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn fig3(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), CliError> {
    let grid = cfg.fig3_grid()?;
    let cycle = cfg.cycle()?;
    let base = cfg.distribution(cfg.distribution.e_max)?;
    let cells = energy_sweep(&grid, &cfg.fig3.m, &cycle, &base, &cfg.pump_config())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["e_max", "m", "q_singlets", "error_estimate", "err"])?;
    for c in &cells {
        w.write_record([num(c.e_max), c.m.to_string(), num(c.q_singlets), num(c.error_estimate), err_text(&c.error)])?;
    }
    w.flush()?;
    Ok(())
}

/// `(re, im)`.
type Pair = (f64, f64);

/// One comparison row of the oracle table.
struct Comparison {
    quantity: &'static str,
    m: u32,
    energy: f64,
    eta: f64,
    n_sites: usize,
    u: f64,
    values: Result<(Pair, Pair), PumpError>,
}

/// Relative difference over the larger magnitude; zero when both vanish.
fn rel_err(a: Pair, b: Pair) -> f64 {
    let d = (a.0 - b.0).hypot(a.1 - b.1);
    let scale = a.0.hypot(a.1).max(b.0.hypot(b.1));
    if scale == 0.0 {
        0.0
    } else {
        d / scale
    }
}

pub fn oracle(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), CliError> {
    let m = model(cfg.model.m)?;
    let o = &cfg.oracle;
    let kcfg = cfg.pump_config().kernel;
    let energies = cfg.green_energies()?;
    let lat = FiniteLattice::open(o.n_sites)?;
    lat.check_room_for(m.m())?;
    let free = ImpurityState::new(0.0, 0.0)?;
    let s = m.m() as i64;
    let mut rows = Vec::new();

    for &e in &energies {
        for (quantity, col) in [("g0_onsite", (s, s)), ("g0_offdiag", (-s, -s))] {
            let values = ComplexEnergy::new(e, o.eta).and_then(|z| {
                let set = green_set(&m, z, &kcfg.green)?;
                let q = if col.0 == s { set.onsite } else { set.offdiag };
                let r = resolvent_element(&lat, Sector::Symmetric, &free, m.m(), z, (s, s), col, ResolventMethod::Auto)?;
                Ok(((q.re, q.im), (r.re, r.im)))
            });
            rows.push(Comparison { quantity, m: m.m(), energy: e, eta: o.eta, n_sites: o.n_sites, u: f64::NAN, values });
        }
    }

    let t_lat = FiniteLattice::open(o.t_sites)?;
    for &u in &o.t_u {
        for &e in &o.t_energies {
            let values = ComplexEnergy::new(e, o.t_eta).and_then(|z| {
                let t = t_matrix(u, z, &kcfg)?;
                let x = extract_t_matrix(&t_lat, u, z, ResolventMethod::Spectral)?;
                Ok(((t.re, t.im), (x.re, x.im)))
            });
            rows.push(Comparison { quantity: "t_matrix", m: 0, energy: e, eta: o.t_eta, n_sites: o.t_sites, u, values });
        }
    }

    let cycle = cfg.cycle()?;
    for &e in &o.fermi_levels {
        let values = FermiDistribution::zero_t(e).and_then(|f| {
            let ls = single_particle_pumped_charge(&cycle, &m, &f)?;
            let b = brouwer_pumped_charge(&cycle, &m, e)?;
            Ok(((ls, 0.0), (b, 0.0)))
        });
        rows.push(Comparison { quantity: "one_body_charge", m: m.m(), energy: e, eta: 0.0, n_sites: 0, u: f64::NAN, values });
    }

    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "quantity", "m", "E", "eta", "n_sites", "u", "re_quadrature", "im_quadrature", "re_oracle",
        "im_oracle", "rel_err", "err",
    ])?;
    for r in rows {
        let mut rec = vec![
            r.quantity.to_string(),
            r.m.to_string(),
            num(r.energy),
            num(r.eta),
            r.n_sites.to_string(),
            if r.u.is_nan() { String::new() } else { num(r.u) },
        ];
        match r.values {
            Ok((q, x)) => {
                rec.extend([num(q.0), num(q.1), num(x.0), num(x.1), num(rel_err(q, x)), String::new()]);
            }
            Err(e) => {
                rec.extend(std::iter::repeat_n(num(f64::NAN), 5));
                rec.push(e.to_string());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    passed: bool,
    sign_pairing: SignPairing,
    evanescent_branch: EvanescentBranch,
    criteria: &'a [CriterionReport],
}

/// Run the acceptance suite, print one line per criterion and, when `out`
/// is given, write the JSON report there.
pub fn validate(cfg: &RunConfig, only: &[u8], json: Option<Box<dyn Write>>) -> Result<(), CliError> {
    if let Some(bad) = only.iter().find(|&&id| !(1..=10).contains(&id)) {
        return Err(CliError::Usage(format!("no acceptance criterion {bad}")));
    }
    let reports = run_suite(only, &cfg.suite_config())?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    let mut stdout = io::stdout().lock();
    for r in &reports {
        writeln!(stdout, "{}", r.line())?;
    }
    writeln!(stdout, "{} passed, {failed} failed", reports.len() - failed)?;
    if let Some(mut out) = json {
        let report = ValidationReport {
            passed: failed == 0,
            sign_pairing: cfg.sensitivity.sign_pairing,
            evanescent_branch: cfg.sensitivity.evanescent_branch,
            criteria: &reports,
        };
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
        out.flush()?;
    }
    if failed > 0 {
        Err(CliError::Failed(failed))
    } else {
        Ok(())
    }
}
