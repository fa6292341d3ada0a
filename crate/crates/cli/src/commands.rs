//! Subcommand implementations. Each returns whether its checks passed.

use std::fs;

use anyhow::{bail, Context, Result};
use lrfput::catalog::{check_assumptions, AssumptionReport, LatticeModel};
use lrfput::dispersion::{certify_type1, lambda_curve, CertifyGrid, DispersionProfile};
use lrfput::operators::{OperatorContext, OperatorOptions};
use lrfput::simulator::{run_and_verify, SimulationConfig, VerificationReport};
use lrfput::solver::{correction_scaling_sweep, solve_contraction, solve_petviashvili, Method, SweepSetup, WaveSolution};
use lrfput::spectral::Grid;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::{num, Artifacts};
use crate::svg::{line_plot, Series};

/// Outcome of one subcommand.
pub struct Report {
    pub passed: bool,
    pub summary: String,
}

struct Setup {
    model: LatticeModel,
    profile: DispersionProfile,
    grid: Grid,
}

impl Setup {
    fn new(config: &RunConfig) -> Result<Self> {
        let model = config.model.build()?;
        let profile = certify_type1(&model, CertifyGrid::default())?;
        let grid = Grid::new(config.grid.half_length, config.grid.points)?;
        Ok(Self { model, profile, grid })
    }

    fn sigma(&self, config: &RunConfig) -> f64 {
        config.solver.sigma.unwrap_or_else(|| self.profile.working_sigma())
    }

    fn context(&self, config: &RunConfig, eps: f64) -> Result<OperatorContext> {
        if !self.profile.type1_certified {
            bail!("the model is not certified Type I: {}", self.profile.notes.join("; "));
        }
        Ok(OperatorContext::new(&self.model, &self.profile, &self.grid, eps, self.sigma(config))?)
    }
}

#[derive(Serialize)]
struct Certificate<'a> {
    type1: bool,
    range: usize,
    profile: &'a DispersionProfile,
    assumptions: &'a AssumptionReport,
}

pub fn classify(config: &RunConfig, out: &mut Artifacts) -> Result<Report> {
    let model = config.model.build()?;
    let profile = certify_type1(&model, CertifyGrid::default())?;
    let assumptions = check_assumptions(&model);
    let cert = Certificate { type1: profile.type1_certified, range: model.range(), profile: &profile, assumptions: &assumptions };
    out.json("certificate.json", config, &cert)?;

    let curve = lambda_curve(&model, CertifyGrid::default().k_max, config.output.curve_points);
    out.csv("lambda.csv", &["k", "lambda"], curve.iter().map(|(k, l)| vec![num(*k), num(*l)]))?;
    let c0: Vec<(f64, f64)> = curve.iter().map(|(k, _)| (*k, profile.c0_sq)).collect();
    let svg = line_plot(
        "phase speed squared",
        "k",
        "λ(k)",
        &[
            Series { label: "λ(k)", color: "#1f5fa8", points: &curve },
            Series { label: "c₀²", color: "#c0392b", points: &c0 },
        ],
        out.hash(),
    );
    out.text("lambda.svg", &svg)?;
    Ok(Report {
        passed: profile.type1_certified,
        summary: format!(
            "type1={} c0^2={} lambda''(0)={} sigma={:.4} k*={} mu*={:.4}",
            profile.type1_certified, profile.c0_sq, profile.lambda_dd0, profile.sigma, profile.k_star, profile.mu_star
        ),
    })
}

/// Solution document written by `solve` and read back by `simulate`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub half_length: f64,
    pub points: usize,
    pub solution: WaveSolution,
    pub oracle_diff_h1: Option<f64>,
    pub passed: bool,
}

fn solve_inline(config: &RunConfig, setup: &Setup) -> Result<SolutionDoc> {
    let s = &config.solver;
    let ctx = setup.context(config, s.eps)?;
    let run = |method| match method {
        Method::Contraction => solve_contraction(&ctx, s.tol, s.max_iter),
        Method::Petviashvili => solve_petviashvili(&ctx, s.tol, s.max_iter.max(2000)),
    };
    let solution = run(s.method)?;
    let oracle_diff_h1 = if s.oracle {
        let other = match s.method {
            Method::Contraction => Method::Petviashvili,
            Method::Petviashvili => Method::Contraction,
        };
        let check = run(other)?;
        let diff: Vec<f64> = solution.w.iter().zip(&check.w).map(|(a, b)| a - b).collect();
        Some(setup.grid.sobolev_norm(&diff, 1.0))
    } else {
        None
    };
    let passed = solution.residual_h1 <= s.residual_limit && oracle_diff_h1.is_none_or(|d| d <= s.oracle_limit);
    Ok(SolutionDoc { half_length: setup.grid.half_length(), points: setup.grid.n(), solution, oracle_diff_h1, passed })
}

pub fn solve(config: &RunConfig, out: &mut Artifacts) -> Result<Report> {
    let setup = Setup::new(config)?;
    let doc = solve_inline(config, &setup)?;
    out.json("solution.json", config, &doc)?;
    let ctx_w0 = setup.context(config, doc.solution.eps)?.w0().to_vec();
    let sol = &doc.solution;
    out.csv(
        "profile.csv",
        &["x", "w0", "w", "v"],
        (0..setup.grid.n()).map(|j| vec![num(setup.grid.x(j)), num(ctx_w0[j]), num(sol.w[j]), num(sol.v[j])]),
    )?;
    Ok(Report {
        passed: doc.passed,
        summary: format!(
            "eps={} sigma={} c_eps^2={} residual_H1={:e} iterations={} oracle_diff_H1={}",
            sol.eps,
            sol.sigma,
            sol.c_eps_sq,
            sol.residual_h1,
            sol.iterations,
            doc.oracle_diff_h1.map_or("n/a".into(), |d| format!("{d:e}"))
        ),
    })
}

pub fn sweep(config: &RunConfig, out: &mut Artifacts) -> Result<Report> {
    let setup = Setup::new(config)?;
    if !setup.profile.type1_certified {
        bail!("the model is not certified Type I: {}", setup.profile.notes.join("; "));
    }
    let sweep_setup = SweepSetup {
        model: &setup.model,
        profile: &setup.profile,
        grid: &setup.grid,
        sigma: setup.sigma(config),
        options: OperatorOptions::default(),
        tol: config.solver.tol,
        max_iter: config.solver.max_iter,
    };
    let report = correction_scaling_sweep(&sweep_setup, &config.solver.eps_list);
    out.csv(
        "sweep.csv",
        &["eps", "diff_H1", "residual", "iterations"],
        report.rows.iter().map(|r| vec![num(r.eps), num(r.diff_h1), num(r.residual), r.iterations.to_string()]),
    )?;
    let failures = report.rows.iter().filter(|r| r.error.is_some()).count();
    let slope_ok = match (config.solver.expected_slope, report.slope) {
        (Some(target), Some(slope)) => (slope - target).abs() <= 0.25 * target.abs(),
        (Some(_), None) => false,
        (None, _) => true,
    };
    out.json("sweep.json", config, &report)?;
    Ok(Report {
        passed: failures == 0 && slope_ok,
        summary: format!(
            "slope={} sigma={} failed_solves={failures}",
            report.slope.map_or("n/a".into(), |s| format!("{s:.4}")),
            report.sigma
        ),
    })
}

pub fn simulate(config: &RunConfig, out: &mut Artifacts) -> Result<Report> {
    let setup = Setup::new(config)?;
    let doc = match &config.simulate.solution {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let doc: SolutionDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if doc.points != setup.grid.n() || doc.half_length != setup.grid.half_length() {
                bail!("{} was computed on a different grid", path.display());
            }
            doc
        }
        None => solve_inline(config, &setup)?,
    };
    let sim = &config.simulate;
    let report: VerificationReport = run_and_verify(
        &setup.model,
        &doc.solution,
        &setup.grid,
        SimulationConfig {
            sites: sim.sites,
            t_final: sim.t_final,
            dt: sim.dt,
            force_range: sim.force_range,
            checkpoint_every: sim.checkpoint_every,
        },
    )?;
    out.csv(
        "trajectory.csv",
        &["t", "position", "peak", "energy"],
        report.trajectory.iter().map(|c| vec![num(c.t), num(c.position), num(c.peak), num(c.energy)]),
    )?;
    out.json("report.json", config, &report)?;
    Ok(Report {
        passed: report.passed,
        summary: format!(
            "speed={:.6} expected={:.6} speed_err={:.2e} shape_err={:.2e} energy_drift={:.2e} early_stop={}",
            report.measured_speed,
            report.expected_speed,
            report.speed_error,
            report.shape_error,
            report.energy_drift,
            report.early_stop
        ),
    })
}

pub fn plot(config: &RunConfig, out: &mut Artifacts) -> Result<Report> {
    let setup = Setup::new(config)?;
    let doc = solve_inline(config, &setup)?;
    let grid = &setup.grid;
    let w = &doc.solution.w;
    out.csv("field.csv", &["x", "value"], (0..grid.n()).map(|j| vec![num(grid.x(j)), num(w[j])]))?;
    let spectrum = grid.forward(w);
    out.csv(
        "spectrum.csv",
        &["k", "re", "im"],
        spectrum.iter().enumerate().map(|(j, c)| vec![num(grid.k(j)), num(c.re), num(c.im)]),
    )?;
    let field: Vec<(f64, f64)> = (0..grid.n()).map(|j| (grid.x(j), w[j])).collect();
    let svg = line_plot(
        &format!("solitary wave profile, ε = {}", doc.solution.eps),
        "x",
        "W(x)",
        &[Series { label: "W_ε", color: "#1f5fa8", points: &field }],
        out.hash(),
    );
    out.text("field.svg", &svg)?;
    let magnitude: Vec<(f64, f64)> = spectrum
        .iter()
        .enumerate()
        .map(|(j, c)| (grid.k(j), c.norm().max(1e-300).log10()))
        .collect();
    let svg = line_plot("spectrum", "k", "log₁₀|Ŵ(k)|", &[Series { label: "|Ŵ|", color: "#c0392b", points: &magnitude }], out.hash());
    out.text("spectrum.svg", &svg)?;
    Ok(Report {
        passed: doc.passed,
        summary: format!("wrote field and spectrum of W at eps={} (residual {:e})", doc.solution.eps, doc.solution.residual_h1),
    })
}
