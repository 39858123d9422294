//! One function per CLI command. Each returns the tables it produced; graph
//! dependent defaults are written back into the config before returning.

use acdd_core::chaos::{
    bifurcation_sweep, lyapunov_spectrum, mle_sweep, nu_grid, structural_sweep,
    BifurcationDiagram, SweepConfig, SweepKind,
};
use acdd_core::dynamics::{self, SimConfig};
use acdd_core::equilibrium::{
    self, analyze, classify_boundary, corollary2_classify, find_h0_roots, jacobian_m,
    EquilibriumError, Method,
};
use acdd_core::graph::{perturb_edges, spectrum_extremes, Graph, GraphError, ER_RETRY_LIMIT};
use acdd_core::linalg;
use acdd_core::spectral::{
    delta_lambda1, delta_m_parameter, delta_m_structure, find_hopf_critical, leading_eigentriple,
    HopfOptions, NuFamily,
};
use acdd_core::threshold::{
    check_case1, check_case2, check_corollary3, check_corollary4, classify_outcome,
    initial_membership, spot_check_eq11, ConditionId, ConditionReport, ThresholdSpec,
};
use num_complex::Complex64;

use crate::config::{Command, ExperimentConfig, ThresholdSection};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub struct Graphs {
    pub b: Graph,
    pub r: Graph,
}

impl Graphs {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let b = cfg.graph_b.build()?;
        let r = match &cfg.graph_r {
            Some(src) => src.build()?,
            None => b.clone(),
        };
        if b.node_count() != r.node_count() {
            return Err(CliError::ConfigValidation(format!(
                "G_B has {} nodes but G_R has {}",
                b.node_count(),
                r.node_count()
            )));
        }
        Ok(Self { b, r })
    }
}

pub fn sim_config(cfg: &ExperimentConfig, graphs: &Graphs) -> SimConfig {
    let s = &cfg.simulation;
    let mut sim = SimConfig::new(
        graphs.b.clone(),
        graphs.r.clone(),
        cfg.f.clone(),
        cfg.g.clone(),
        s.initial.clone(),
        s.t_end,
    );
    sim.step = s.step;
    sim.record_every = s.record_every;
    sim.events = s.events.clone();
    sim.seed = cfg.seed;
    sim.record_states = s.record_states;
    sim
}

pub fn execute(cfg: &mut ExperimentConfig) -> Result<Vec<Table>, CliError> {
    let graphs = Graphs::build(cfg)?;
    match cfg.command() {
        Command::Simulate => simulate(cfg, &graphs),
        Command::Equilibria => equilibria(cfg, &graphs),
        Command::Threshold => threshold(cfg, &graphs),
        Command::Hopf => hopf(cfg, &graphs),
        Command::Sweep => sweep(cfg, &graphs),
        Command::StructuralSweep => structural(cfg, &graphs),
        Command::Lyapunov => lyapunov(cfg, &graphs),
        Command::PerturbEstimate => perturb(cfg, &graphs),
    }
}

pub fn trajectory_table(traj: &dynamics::Trajectory) -> Table {
    let mut t = Table::new("trajectory.csv", &["t", "mean_blue"]);
    for (&time, &m) in traj.times.iter().zip(&traj.mean_blue) {
        t.push(vec![time.into(), m.into()]);
    }
    t
}

fn simulate(cfg: &ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let traj = dynamics::integrate(&sim_config(cfg, graphs))?;
    let mut tables = vec![trajectory_table(&traj)];
    if let Some(states) = &traj.states {
        let n = graphs.b.node_count();
        let header: Vec<String> = std::iter::once("t".to_owned())
            .chain((0..n).map(|v| format!("b{v}")))
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut t = Table::new("states.csv", &header);
        for (&time, state) in traj.times.iter().zip(states) {
            t.push(std::iter::once(time.into()).chain(state.iter().map(|&x| x.into())).collect());
        }
        tables.push(t);
    }
    Ok(tables)
}

fn lambda_cells(lambda: Option<Complex64>) -> [Cell; 2] {
    match lambda {
        Some(z) => [z.re.into(), z.im.into()],
        None => [Cell::Empty, Cell::Empty],
    }
}

fn equilibria(cfg: &ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let (f, g) = (&cfg.f, &cfg.g);
    let c_b = graphs.b.row_normalized()?;
    let c_r = graphs.r.row_normalized()?;
    let mut t = Table::new(
        "equilibria.csv",
        &["sigma", "residual", "verdict", "re_lambda1", "im_lambda1", "method"],
    );
    let mut push = |sigma: f64, residual: f64, verdict: &str, lambda, method: Method| {
        let [re, im] = lambda_cells(lambda);
        t.push(vec![
            sigma.into(),
            residual.into(),
            verdict.into(),
            re,
            im,
            method.as_str().into(),
        ]);
    };
    for r in analyze(f, g, &c_b, &c_r)? {
        push(r.sigma, r.residual, r.verdict.as_str(), r.lambda1, r.method);
    }
    let (zero, one) = classify_boundary(f, g);
    for r in [zero, one] {
        push(r.sigma, r.residual, r.verdict.as_str(), None, r.method);
    }
    if cfg.shared_graph() {
        let (_, mu1) = spectrum_extremes(&c_b)?;
        for sigma in find_h0_roots(f, g) {
            match corollary2_classify(sigma, f, g, mu1) {
                Ok(c) => {
                    let offset = c.a * c.ratio;
                    let lambda = if c.a > 0.0 {
                        Complex64::new(c.a - offset, 0.0)
                    } else {
                        c.a * mu1 - offset
                    };
                    let residual = equilibrium::h0_residual(f, g, sigma);
                    push(sigma, residual, c.verdict.as_str(), Some(lambda), Method::Corollary2Ratio);
                }
                Err(EquilibriumError::DegenerateCoefficient(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(vec![t])
}

fn condition_row(t: &mut Table, r: &ConditionReport) {
    let worst = Some(r.worst_point).filter(|x| x.is_finite());
    let margin = Some(r.margin).filter(|x| x.is_finite());
    t.push(vec![
        r.condition_id.as_str().into(),
        r.satisfied.into(),
        worst.into(),
        margin.into(),
        r.check_kind.as_str().into(),
    ]);
}

pub fn threshold_spec(s: &ThresholdSection) -> ThresholdSpec {
    ThresholdSpec {
        tau1: s.tau1,
        tau2: s.tau2,
        alpha: s.alpha,
        beta: s.beta,
        strict: s.strict,
    }
}

fn threshold(cfg: &ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let section = cfg.threshold.as_ref().expect("resolved config");
    let spec = threshold_spec(section);
    let (f, g, grid) = (&cfg.f, &cfg.g, section.grid);
    let mut reports = check_case1(f, g, &spec, grid)?;
    reports.extend(check_case2(f, g, &spec, grid)?);
    reports.extend(check_corollary3(f, g, &spec, grid)?);
    if cfg.shared_graph() {
        reports.extend(check_corollary4(f, g, &spec, grid)?);
    }
    let mut sim = sim_config(cfg, graphs);
    sim.record_states = true;
    let traj = dynamics::integrate(&sim)?;
    reports.push(spot_check_eq11(&sim, &spec, &traj)?);

    let mut t = Table::new(
        "threshold.csv",
        &["condition_id", "satisfied", "worst_point", "margin", "check_kind"],
    );
    let mut seen_hypothesis = false;
    for r in &reports {
        if r.condition_id == ConditionId::Hypothesis {
            if seen_hypothesis {
                continue;
            }
            seen_hypothesis = true;
        }
        condition_row(&mut t, r);
    }
    let (outcome, t_decide) = classify_outcome(&traj);
    let mut o = Table::new("transition.csv", &["membership", "outcome", "t_decide"]);
    o.push(vec![
        initial_membership(&sim, &spec).as_str().into(),
        outcome.as_str().into(),
        t_decide.into(),
    ]);
    Ok(vec![t, o])
}

fn hopf(cfg: &ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let h = cfg.hopf.as_ref().expect("resolved config");
    let c_b = graphs.b.row_normalized()?;
    let c_r = graphs.r.row_normalized()?;
    let family = NuFamily {
        f: &cfg.f,
        g: &cfg.g,
        c_b: &c_b,
        c_r: &c_r,
    };
    let opts = HopfOptions {
        refine: h.refine,
        sigma_guess: h.sigma_guess,
    };
    let res = find_hopf_critical(&family, (h.nu_lo, h.nu_hi), h.step, opts)?;
    let mut grid = Table::new("hopf.csv", &["nu", "sigma", "re_lambda1", "im_lambda1"]);
    for p in &res.grid {
        grid.push(vec![
            p.nu.into(),
            p.sigma.into(),
            p.lambda1.re.into(),
            p.lambda1.im.into(),
        ]);
    }
    let (ratio, re_mu1) = if cfg.shared_graph() {
        let (f, g) = family.at(res.nu_star)?;
        let (_, ratio) = equilibrium::corollary2_quantities(res.sigma_star, &f, &g)?;
        let (_, mu1) = spectrum_extremes(&c_b)?;
        (Some(ratio), Some(mu1.re))
    } else {
        (None, None)
    };
    let mut summary = Table::new(
        "hopf_summary.csv",
        &[
            "nu_star",
            "sigma_star",
            "re_lambda1",
            "im_lambda1",
            "nu_below",
            "nu_above",
            "re_lambda1_below",
            "re_lambda1_above",
            "is_hopf",
            "refined",
            "grid_step",
            "ratio",
            "re_mu1",
        ],
    );
    summary.push(vec![
        res.nu_star.into(),
        res.sigma_star.into(),
        res.lambda1_star.re.into(),
        res.lambda1_star.im.into(),
        res.nu_bracket.0.into(),
        res.nu_bracket.1.into(),
        res.re_lambda1_bracket.0.into(),
        res.re_lambda1_bracket.1.into(),
        res.is_hopf.into(),
        res.refined.into(),
        res.grid_step.into(),
        ratio.into(),
        re_mu1.into(),
    ]);
    Ok(vec![grid, summary])
}

pub fn diagram_tables(d: &BifurcationDiagram) -> Vec<Table> {
    let mut points = Table::new("sweep.csv", &["coordinate", "extremum"]);
    let mut counts = Table::new("clusters.csv", &["coordinate", "cluster_count"]);
    for row in &d.rows {
        for &e in &row.extrema {
            points.push(vec![row.coordinate.into(), e.into()]);
        }
        counts.push(vec![row.coordinate.into(), row.cluster_count.into()]);
    }
    vec![points, counts]
}

fn sweep(cfg: &ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let s = cfg.sweep.as_ref().expect("resolved config");
    let d = bifurcation_sweep(&SweepConfig {
        base: sim_config(cfg, graphs),
        sweep: SweepKind::Parameter {
            lo: s.nu_lo,
            hi: s.nu_hi,
            step: s.step,
        },
        window: s.window.expect("resolved config"),
        cluster_tol: s.cluster_tol,
        chain: s.chain,
    })?;
    Ok(diagram_tables(&d))
}

pub fn one_percent(edges: usize) -> usize {
    edges.div_ceil(100)
}

fn structural(cfg: &mut ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let edges = one_percent(graphs.r.edge_count());
    let s = cfg.structural.as_mut().expect("resolved config");
    let edges_per_iteration = *s.edges_per_iteration.get_or_insert(edges);
    let s = s.clone();
    let d = structural_sweep(&SweepConfig {
        base: sim_config(cfg, graphs),
        sweep: SweepKind::Structural {
            iterations: s.iterations,
            edges_per_iteration,
        },
        window: s.window.expect("resolved config"),
        cluster_tol: s.cluster_tol,
        chain: false,
    })?;
    Ok(diagram_tables(&d))
}

fn lyapunov(cfg: &ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let l = cfg.lyapunov.as_ref().expect("resolved config");
    let sim = sim_config(cfg, graphs);
    if let Some(range) = l.nu_grid {
        let points = mle_sweep(&sim, &nu_grid(range.lo, range.hi, range.step), &l.params())?;
        let mut t = Table::new("mle.csv", &["nu", "mle"]);
        for p in points {
            t.push(vec![p.nu.into(), p.mle.into()]);
        }
        Ok(vec![t])
    } else {
        let res = lyapunov_spectrum(&sim, &l.params())?;
        let mut t = Table::new("exponents.csv", &["index", "exponent"]);
        for (i, &e) in res.exponents.iter().enumerate() {
            t.push(vec![(i + 1).into(), e.into()]);
        }
        Ok(vec![t])
    }
}

fn default_sigma(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let roots = find_h0_roots(&cfg.f, &cfg.g);
    roots
        .iter()
        .copied()
        .find(|&s| s > 1e-9 && s < 1.0 - 1e-9)
        .or_else(|| roots.first().copied())
        .ok_or_else(|| CliError::ConfigValidation("the functions have no H0 root".into()))
}

fn perturbed_r(graph_r: &Graph, delete: usize, add: usize, seed: u64) -> Result<Graph, CliError> {
    for attempt in 0..ER_RETRY_LIMIT as u64 {
        match perturb_edges(graph_r, delete, add, seed.wrapping_add(attempt)) {
            Ok((g, _)) => return Ok(g),
            Err(GraphError::IsolatedNode(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(GraphError::GenerationFailed(ER_RETRY_LIMIT).into())
}

fn perturb(cfg: &mut ExperimentConfig, graphs: &Graphs) -> Result<Vec<Table>, CliError> {
    let sigma = match cfg.perturb.as_ref().and_then(|p| p.sigma) {
        Some(s) => s,
        None => default_sigma(cfg)?,
    };
    let edges = one_percent(graphs.r.edge_count());
    let p = cfg.perturb.as_mut().expect("resolved config");
    p.sigma = Some(sigma);
    let delete = *p.delete.get_or_insert(edges);
    let p = p.clone();
    let (f, g) = (&cfg.f, &cfg.g);
    let c_b = graphs.b.row_normalized()?;
    let c_r = graphs.r.row_normalized()?;
    let m = jacobian_m(sigma, f, g, &c_b, &c_r);
    let triple = leading_eigentriple(&m)?;
    let mut t = Table::new(
        "perturb.csv",
        &[
            "case",
            "delta",
            "estimate_re",
            "estimate_im",
            "exact_re",
            "exact_im",
            "abs_error",
        ],
    );
    let mut push = |case: &str, delta: f64, estimate: Complex64, shifted: Complex64| {
        let exact = shifted - triple.lambda1;
        t.push(vec![
            case.into(),
            delta.into(),
            estimate.re.into(),
            estimate.im.into(),
            exact.re.into(),
            exact.im.into(),
            (estimate - exact).norm().into(),
        ]);
    };
    let parameterized = f.nu().or(g.nu());
    if let Some(nu) = parameterized {
        for &d_nu in &p.d_nu {
            let dm = delta_m_parameter(sigma, f, g, &c_b, &c_r, d_nu);
            let estimate = delta_lambda1(&triple, &dm)?;
            let f2 = f.with_nu(nu + d_nu).unwrap_or_else(|_| f.clone());
            let g2 = g.with_nu(nu + d_nu).unwrap_or_else(|_| g.clone());
            let shifted = leading_near(&jacobian_m(sigma, &f2, &g2, &c_b, &c_r), triple.lambda1)?;
            push("parameter", d_nu, estimate, shifted);
        }
    }
    if delete > 0 || p.add > 0 {
        let r_new = perturbed_r(&graphs.r, delete, p.add, cfg.seed)?;
        let c_r_new = r_new.row_normalized()?;
        let dm = delta_m_structure(sigma, f, g, &c_b, &c_b, &c_r, &c_r_new);
        let estimate = delta_lambda1(&triple, &dm)?;
        let shifted = leading_near(&jacobian_m(sigma, f, g, &c_b, &c_r_new), triple.lambda1)?;
        push("structure", (delete + p.add) as f64, estimate, shifted);
    }
    Ok(vec![t])
}

/// The eigenvalue of `m` closest to `target`; follows the perturbed leading
/// eigenvalue even if another one overtakes it.
pub fn leading_near(m: &linalg::Matrix, target: Complex64) -> Result<Complex64, CliError> {
    let vals = linalg::eigenvalues(m)?;
    vals.into_iter()
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        .ok_or_else(|| linalg::LinalgError::EigenSolverFailure(0).into())
}
