//! Builds experiments from parsed configs, runs and verifies them, and
//! produces one result row per config.

use decenc_core::a2a_structured::{
    dft_profile, draw_and_loose_program, make_omega_grid, permuted_dft_program, structured_profile,
    OmegaGrid,
};
use decenc_core::a2a_universal::{lower_bounds, prepare_and_shoot, universal_profile};
use decenc_core::field::{Elem, FieldCtx};
use decenc_core::framework::{
    encode_program, predicted_cost_framework, scenario_lower_bounds, verify_scenario, AlgoChoice,
    EncodingScenario, GeneratorSpec, Padding,
};
use decenc_core::matrix::Mat;
use decenc_core::netsim::{cost_from_counts, run, run_with_trace, CostProfile, NetParams, Program};
use decenc_core::rng::SplitMix64;

use crate::config::{AlgorithmKey, CodeKind, ConfigError, ScenarioConfig};

/// One output row; the column order is a stable interface.
#[derive(Debug, Clone)]
pub struct Row {
    pub k: usize,
    pub r: Option<usize>,
    pub p: usize,
    pub q: u64,
    pub w: usize,
    pub algorithm: &'static str,
    pub c1_measured: usize,
    pub c2_measured: usize,
    pub cost_measured: f64,
    pub c1_predicted: usize,
    pub c2_predicted: usize,
    pub c1_lowerbound: usize,
    pub c2_lowerbound: usize,
    pub verified: bool,
}

/// A fully validated experiment, ready to run.
pub struct Experiment {
    pub seed: u64,
    pub trials: usize,
    kind: ExperimentKind,
}

enum ExperimentKind {
    /// Pure all-to-all encode over K processors (config without `R`).
    A2a {
        ctx: FieldCtx,
        coeffs: Mat,
        program: Box<dyn Program>,
        profile: CostProfile,
        algorithm: &'static str,
        ports: usize,
        alpha: f64,
        beta: f64,
        width: usize,
    },
    /// Full decentralized-encoding scenario.
    Framework {
        scenario: EncodingScenario,
        algorithm: &'static str,
    },
}

fn cfg_err(cfg: &ScenarioConfig, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: cfg.line,
        message: message.into(),
    }
}

/// Smallest radix P >= 2 with K = P^H; H maximal for that radix.
fn perfect_power(k: usize) -> Option<(u64, u32)> {
    if k == 1 {
        return Some((2, 0));
    }
    for radix in 2..=k as u64 {
        let mut depth = 0;
        let mut acc = 1u64;
        while acc < k as u64 {
            acc = acc.saturating_mul(radix);
            depth += 1;
        }
        if acc == k as u64 {
            return Some((radix, depth));
        }
    }
    None
}

/// Radix for a DFT config: p+1 when K is a power of it, else the smallest
/// perfect-power base.
fn dft_radix(k: usize, ports: usize) -> Option<(u64, u32)> {
    let preferred = (ports + 1) as u64;
    let mut depth = 0;
    let mut acc = 1u64;
    while acc < k as u64 {
        acc = acc.saturating_mul(preferred);
        depth += 1;
    }
    if acc == k as u64 {
        return Some((preferred, depth));
    }
    perfect_power(k)
}

/// Grid radix: p+1 when it yields structure, else the radix maximizing Z.
fn grid_radix(ctx: &FieldCtx, k: usize, ports: usize) -> u64 {
    let depth_of = |radix: u64| -> u32 {
        let mut depth = 0;
        while {
            let next = radix.checked_pow(depth + 1);
            matches!(next, Some(z) if (k as u64).is_multiple_of(z) && (ctx.modulus() - 1).is_multiple_of(z))
        } {
            depth += 1;
        }
        depth
    };
    let preferred = (ports + 1) as u64;
    if preferred >= 2 && depth_of(preferred) >= 1 {
        return preferred;
    }
    let mut best = (2u64, 0u64);
    for radix in 2..=8u64 {
        let z = radix.pow(depth_of(radix));
        if z > best.1 {
            best = (radix, z);
        }
    }
    best.0
}

pub fn build_experiment(
    cfg: &ScenarioConfig,
    default_seed: u64,
    default_trials: usize,
) -> Result<Experiment, ConfigError> {
    let ctx = FieldCtx::new(cfg.q).map_err(|e| cfg_err(cfg, e.to_string()))?;
    let seed = cfg.seed.unwrap_or(default_seed);
    let trials = cfg.trials.unwrap_or(default_trials);
    if cfg.k == 0 {
        return Err(cfg_err(cfg, "K must be at least 1"));
    }
    if cfg.phi_table.is_some() && cfg.code != CodeKind::VandermondeGrid {
        return Err(cfg_err(
            cfg,
            "phi-table only applies to code = vandermonde-grid",
        ));
    }
    match cfg.r {
        None => build_a2a(cfg, ctx, seed, trials),
        Some(r) => build_framework(cfg, ctx, r, seed, trials),
    }
}

fn build_a2a(
    cfg: &ScenarioConfig,
    ctx: FieldCtx,
    seed: u64,
    trials: usize,
) -> Result<Experiment, ConfigError> {
    let (k, ports) = (cfg.k, cfg.p);
    let mk = |e: decenc_core::Error| cfg_err(cfg, e.to_string());
    let (coeffs, program, profile, algorithm): (Mat, Box<dyn Program>, CostProfile, &'static str) =
        match (cfg.code, cfg.algorithm) {
            (CodeKind::Random, AlgorithmKey::Universal | AlgorithmKey::Auto) => {
                let mut rng = SplitMix64::new(seed);
                let mut m = Mat::zeros(&ctx, k, k);
                for i in 0..k {
                    for j in 0..k {
                        m[(i, j)] = ctx.elem(rng.next_u64());
                    }
                }
                let prog = prepare_and_shoot(m.clone(), ports).map_err(mk)?;
                (
                    m,
                    Box::new(prog),
                    universal_profile(k, ports, cfg.w),
                    "universal",
                )
            }
            (CodeKind::Dft, algo) => {
                let (radix, depth) = dft_radix(k, ports)
                    .ok_or_else(|| cfg_err(cfg, format!("K = {k} is not a perfect power P^H")))?;
                let m = Mat::permuted_dft(&ctx, k, radix, depth).map_err(mk)?;
                match algo {
                    AlgorithmKey::Structured | AlgorithmKey::Auto => {
                        let prog = permuted_dft_program(&ctx, k, radix, depth, ports, false)
                            .map_err(mk)?;
                        (
                            m,
                            Box::new(prog),
                            dft_profile(radix, depth, ports, cfg.w),
                            "structured",
                        )
                    }
                    AlgorithmKey::Universal => {
                        let prog = prepare_and_shoot(m.clone(), ports).map_err(mk)?;
                        (
                            m,
                            Box::new(prog),
                            universal_profile(k, ports, cfg.w),
                            "universal",
                        )
                    }
                    AlgorithmKey::Cauchy => {
                        return Err(cfg_err(cfg, "code dft supports universal or structured"));
                    }
                }
            }
            (CodeKind::VandermondeGrid, algo) => {
                let grid = build_grid(cfg, &ctx, k, ports)?;
                let m = grid.vandermonde().map_err(mk)?;
                match algo {
                    AlgorithmKey::Structured | AlgorithmKey::Auto => {
                        let prog = draw_and_loose_program(&grid, ports, false).map_err(mk)?;
                        (
                            m,
                            Box::new(prog),
                            structured_profile(&grid, ports, cfg.w),
                            "structured",
                        )
                    }
                    AlgorithmKey::Universal => {
                        let prog = prepare_and_shoot(m.clone(), ports).map_err(mk)?;
                        (
                            m,
                            Box::new(prog),
                            universal_profile(k, ports, cfg.w),
                            "universal",
                        )
                    }
                    AlgorithmKey::Cauchy => {
                        return Err(cfg_err(
                            cfg,
                            "code vandermonde-grid supports universal or structured",
                        ));
                    }
                }
            }
            (CodeKind::Random, _) => {
                return Err(cfg_err(
                    cfg,
                    "code random supports only algorithm universal",
                ));
            }
            (code, _) => {
                return Err(cfg_err(
                    cfg,
                    format!("code {} requires R (it is a source/sink code)", code.name()),
                ));
            }
        };
    Ok(Experiment {
        seed,
        trials,
        kind: ExperimentKind::A2a {
            ctx,
            coeffs,
            program,
            profile,
            algorithm,
            ports,
            alpha: cfg.alpha,
            beta: cfg.beta,
            width: cfg.w,
        },
    })
}

fn build_grid(
    cfg: &ScenarioConfig,
    ctx: &FieldCtx,
    k: usize,
    ports: usize,
) -> Result<OmegaGrid, ConfigError> {
    let radix = grid_radix(ctx, k, ports);
    make_omega_grid(ctx, k, radix, cfg.phi_table.clone()).map_err(|e| cfg_err(cfg, e.to_string()))
}

fn build_framework(
    cfg: &ScenarioConfig,
    ctx: FieldCtx,
    r: usize,
    seed: u64,
    trials: usize,
) -> Result<Experiment, ConfigError> {
    let k = cfg.k;
    if r == 0 {
        return Err(cfg_err(cfg, "R must be at least 1 when present"));
    }
    let mut rng = SplitMix64::new(seed);
    let (generator, algo, algorithm): (GeneratorSpec, AlgoChoice, &'static str) =
        match (cfg.code, cfg.algorithm) {
            (CodeKind::Random, AlgorithmKey::Universal | AlgorithmKey::Auto) => {
                let mut a = Mat::zeros(&ctx, k, r);
                for i in 0..k {
                    for j in 0..r {
                        a[(i, j)] = ctx.elem(rng.next_u64());
                    }
                }
                (
                    GeneratorSpec::SystematicDense { a },
                    AlgoChoice::Universal,
                    "universal",
                )
            }
            (CodeKind::Random, _) => {
                return Err(cfg_err(
                    cfg,
                    "code random supports only algorithm universal",
                ));
            }
            (CodeKind::GrsSystematic, algo) => {
                let (alphas, betas, u, v) =
                    decenc_core::a2a_cauchy::design_grs_points(&ctx, k, r, cfg.p, &mut rng)
                        .map_err(|e| cfg_err(cfg, e.to_string()))?;
                let gen = GeneratorSpec::SystematicGrs {
                    alphas,
                    betas,
                    u,
                    v,
                };
                match algo {
                    AlgorithmKey::Cauchy | AlgorithmKey::Auto => {
                        (gen, AlgoChoice::Cauchy, "cauchy")
                    }
                    AlgorithmKey::Universal => (gen, AlgoChoice::Universal, "universal"),
                    AlgorithmKey::Structured => {
                        return Err(cfg_err(
                            cfg,
                            "code grs-systematic supports universal or cauchy",
                        ));
                    }
                }
            }
            (CodeKind::Lagrange, algo) => {
                let (alphas, betas, _, _) =
                    decenc_core::a2a_cauchy::design_grs_points(&ctx, k, r, cfg.p, &mut rng)
                        .map_err(|e| cfg_err(cfg, e.to_string()))?;
                let gen = GeneratorSpec::Lagrange { alphas, betas };
                match algo {
                    AlgorithmKey::Cauchy | AlgorithmKey::Auto => {
                        (gen, AlgoChoice::Cauchy, "cauchy")
                    }
                    AlgorithmKey::Universal => (gen, AlgoChoice::Universal, "universal"),
                    AlgorithmKey::Structured => {
                        return Err(cfg_err(cfg, "code lagrange supports universal or cauchy"));
                    }
                }
            }
            (CodeKind::GrsNonSystematic, AlgorithmKey::Universal | AlgorithmKey::Auto) => {
                let (alphas, betas, u, v) =
                    decenc_core::a2a_cauchy::design_grs_points(&ctx, k, r, cfg.p, &mut rng)
                        .map_err(|e| cfg_err(cfg, e.to_string()))?;
                // G = [V_alpha | V_beta] * diag(u, v), K x (K+R).
                let va =
                    Mat::vandermonde(&ctx, &alphas, k).map_err(|e| cfg_err(cfg, e.to_string()))?;
                let vb =
                    Mat::vandermonde(&ctx, &betas, k).map_err(|e| cfg_err(cfg, e.to_string()))?;
                let mut g = Mat::zeros(&ctx, k, k + r);
                for i in 0..k {
                    for j in 0..k {
                        g[(i, j)] = ctx.mul(va[(i, j)], u[j]);
                    }
                    for j in 0..r {
                        g[(i, k + j)] = ctx.mul(vb[(i, j)], v[j]);
                    }
                }
                (
                    GeneratorSpec::NonSystematic { g },
                    AlgoChoice::Universal,
                    "universal",
                )
            }
            (CodeKind::GrsNonSystematic, _) => {
                return Err(cfg_err(
                    cfg,
                    "code grs-nonsystematic supports only algorithm universal",
                ));
            }
            (CodeKind::Dft, algo) => {
                if r != k {
                    return Err(cfg_err(cfg, "code dft requires R = K"));
                }
                let (radix, depth) = dft_radix(k, cfg.p)
                    .ok_or_else(|| cfg_err(cfg, format!("K = {k} is not a perfect power P^H")))?;
                let gen = GeneratorSpec::Dft { radix, depth };
                match algo {
                    AlgorithmKey::Structured | AlgorithmKey::Auto => {
                        (gen, AlgoChoice::Structured, "structured")
                    }
                    AlgorithmKey::Universal => (gen, AlgoChoice::Universal, "universal"),
                    AlgorithmKey::Cauchy => {
                        return Err(cfg_err(cfg, "code dft supports universal or structured"));
                    }
                }
            }
            (CodeKind::VandermondeGrid, algo) => {
                if r != k {
                    return Err(cfg_err(cfg, "code vandermonde-grid requires R = K"));
                }
                let grid = build_grid(cfg, &ctx, k, cfg.p)?;
                let gen = GeneratorSpec::VandermondeGrid { grid };
                match algo {
                    AlgorithmKey::Structured | AlgorithmKey::Auto => {
                        (gen, AlgoChoice::Structured, "structured")
                    }
                    AlgorithmKey::Universal => (gen, AlgoChoice::Universal, "universal"),
                    AlgorithmKey::Cauchy => {
                        return Err(cfg_err(
                            cfg,
                            "code vandermonde-grid supports universal or structured",
                        ));
                    }
                }
            }
        };
    let scenario = EncodingScenario {
        ctx,
        sources: k,
        sinks: r,
        width: cfg.w,
        generator,
        algo,
        ports: cfg.p,
        alpha: cfg.alpha,
        beta: cfg.beta,
        seed,
        padding: Padding::Zero,
    };
    // Validate the scenario shape eagerly so config errors exit with code 2.
    encode_program(&scenario).map_err(|e| cfg_err(cfg, e.to_string()))?;
    Ok(Experiment {
        seed,
        trials,
        kind: ExperimentKind::Framework {
            scenario,
            algorithm,
        },
    })
}

impl Experiment {
    pub fn run(&self) -> Row {
        match &self.kind {
            ExperimentKind::A2a {
                ctx,
                coeffs,
                program,
                profile,
                algorithm,
                ports,
                alpha,
                beta,
                width,
            } => {
                let k = coeffs.rows();
                let params = NetParams::new(k, *ports, *alpha, *beta, ctx.modulus(), *width);
                // Universal rows carry the counting bound; structured rows
                // carry the dissemination bound, which specific algorithms
                // may meet with equality (and the counting bound does not
                // apply to them).
                let (c1_lb, c2_lb) = if k < 2 {
                    (0, 0)
                } else if *algorithm == "universal" {
                    lower_bounds(k, *ports)
                } else {
                    let c = decenc_core::netsim::ceil_log(*ports + 1, k);
                    (c, c)
                };
                let mut verified = true;
                let mut measured: Option<(usize, usize, f64)> = None;
                for trial in 0..self.trials.max(1) {
                    let inputs = a2a_inputs(ctx, k, *width, self.seed, trial);
                    let Ok(report) = run(program.as_ref(), &params, &inputs) else {
                        verified = false;
                        break;
                    };
                    if report.c2 != report.mt.iter().sum::<usize>()
                        || report.cost != cost_from_counts(report.c1, report.c2, &params)
                    {
                        verified = false;
                    }
                    if self.trials > 0 && !a2a_outputs_match(coeffs, &inputs, &report.outputs) {
                        verified = false;
                    }
                    match &measured {
                        None => measured = Some((report.c1, report.c2, report.cost)),
                        Some(m) => {
                            if m.0 != report.c1 || m.1 != report.c2 {
                                verified = false;
                            }
                        }
                    }
                }
                let (c1, c2, cost) = measured.unwrap_or((0, 0, 0.0));
                if (c1, c2) != (profile.c1(), profile.c2()) || c1 < c1_lb || c2 < c2_lb {
                    verified = false;
                }
                Row {
                    k,
                    r: None,
                    p: *ports,
                    q: ctx.modulus(),
                    w: *width,
                    algorithm,
                    c1_measured: c1,
                    c2_measured: c2,
                    cost_measured: cost,
                    c1_predicted: profile.c1(),
                    c2_predicted: profile.c2(),
                    c1_lowerbound: c1_lb,
                    c2_lowerbound: c2_lb,
                    verified,
                }
            }
            ExperimentKind::Framework {
                scenario,
                algorithm,
            } => {
                let verify = verify_scenario(scenario, self.trials);
                let (lb1, lb2) = scenario_lower_bounds(scenario).unwrap_or((0, 0));
                match verify {
                    Ok(report) => Row {
                        k: scenario.sources,
                        r: Some(scenario.sinks),
                        p: scenario.ports,
                        q: scenario.ctx.modulus(),
                        w: scenario.width,
                        algorithm,
                        c1_measured: report.measured_c1,
                        c2_measured: report.measured_c2,
                        cost_measured: report.measured_cost,
                        c1_predicted: report.predicted_c1,
                        c2_predicted: report.predicted_c2,
                        c1_lowerbound: report.c1_lower,
                        c2_lowerbound: report.c2_lower,
                        verified: report.passed(),
                    },
                    Err(_) => Row {
                        k: scenario.sources,
                        r: Some(scenario.sinks),
                        p: scenario.ports,
                        q: scenario.ctx.modulus(),
                        w: scenario.width,
                        algorithm,
                        c1_measured: 0,
                        c2_measured: 0,
                        cost_measured: 0.0,
                        c1_predicted: 0,
                        c2_predicted: 0,
                        c1_lowerbound: lb1,
                        c2_lowerbound: lb2,
                        verified: false,
                    },
                }
            }
        }
    }

    /// Replays one run with the message trace wired to `sink`.
    pub fn trace(&self, sink: &mut dyn std::io::Write) {
        match &self.kind {
            ExperimentKind::A2a {
                ctx,
                coeffs,
                program,
                ports,
                alpha,
                beta,
                width,
                ..
            } => {
                let k = coeffs.rows();
                let params = NetParams::new(k, *ports, *alpha, *beta, ctx.modulus(), *width);
                let inputs = a2a_inputs(ctx, k, *width, self.seed, 0);
                let _ = run_with_trace(program.as_ref(), &params, &inputs, Some(sink));
            }
            ExperimentKind::Framework { scenario, .. } => {
                if let Ok((program, _)) = encode_program(scenario) {
                    let inputs = decenc_core::framework::trial_inputs(scenario, 0);
                    let _ = run_with_trace(
                        program.as_ref(),
                        &scenario.net_params(),
                        &inputs,
                        Some(sink),
                    );
                }
            }
        }
    }

    /// Closed-form framework cost for diagnostics (None for pure all-to-all).
    pub fn formula_cost(&self) -> Option<f64> {
        match &self.kind {
            ExperimentKind::Framework { scenario, .. } => predicted_cost_framework(scenario)
                .ok()
                .map(|p| p.formula_cost),
            ExperimentKind::A2a { .. } => None,
        }
    }
}

fn a2a_inputs(ctx: &FieldCtx, k: usize, width: usize, seed: u64, trial: usize) -> Vec<Vec<Elem>> {
    let mut rng = SplitMix64::new(seed.wrapping_add(trial as u64));
    (0..k)
        .map(|_| (0..width).map(|_| ctx.elem(rng.next_u64())).collect())
        .collect()
}

fn a2a_outputs_match(coeffs: &Mat, inputs: &[Vec<Elem>], outputs: &[Vec<Elem>]) -> bool {
    let width = inputs[0].len();
    for w in 0..width {
        let x: Vec<Elem> = inputs.iter().map(|v| v[w]).collect();
        let Ok(expect) = coeffs.matvec(&x) else {
            return false;
        };
        for (proc, out) in outputs.iter().enumerate() {
            if out[w] != expect[proc] {
                return false;
            }
        }
    }
    true
}
