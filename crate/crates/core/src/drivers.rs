//! Report drivers behind the command-line front end: each takes a config,
//! runs the corresponding analysis and returns a serializable report that
//! is byte-identical for identical (config, seed) pairs.

use crate::channels::{
    cq_norm_estimate, energy_truncate, joint_fidelity_optimum, measure_prepare, mu_star,
    op_norm_estimate, op_norm_estimate_with_starts, random_channel,
    random_energy_respecting_channel, sample_constrained_state, truncation_deviation,
    AlignOptions, Channel, EnergyConstraint,
};
use crate::error::{Error, Result};
use crate::hybrid::HybridState;
use crate::instances::{
    anonymous_state_protocol, bell_protocol, monster_build, shredder_eval, GeneralAttackReport,
    MonsterAttack, PassiveCheatReport, ShredderInstance,
};
use crate::numerics::{fidelity, fourier_mub, haar_state_rng, CMatrix, DensityMatrix, Seed};
use crate::protocol::{
    concealment, evaluate_cheat, synthesize_cheat, validate, CommunicationTree, Strategy,
    StrategyRegister, Verifier,
};
use crate::report::{library_version, CheckRow, F17};
use serde::Serialize;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn align_options(seed: Seed) -> AlignOptions {
    AlignOptions { seed: seed.child(0x616c69676e), ..AlignOptions::default() }
}

// ---------------------------------------------------------------------------
// nogo
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct NogoConfig {
    pub instance: String,
    pub d: usize,
    pub leak: F17,
    pub seed: Seed,
    pub tol_bound: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct NogoReport {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub config: NogoConfig,
    pub eps_lower: F17,
    pub eps_upper: F17,
    pub eps_trace: F17,
    pub delta_hat: F17,
    pub eta: F17,
    pub alignment_value: F17,
    pub alignment_lower: F17,
    pub converged: bool,
    /// δ̂ ≤ 2√(eps_upper) + tolerance.
    pub bound_check: CheckRow,
    pub per_strategy: Vec<NogoRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NogoRow {
    pub bob: Option<usize>,
    pub bit: u8,
    pub trace_gap: F17,
    pub accept_honest: F17,
    pub accept_cheat: F17,
}

/// Runs concealment → cheat synthesis → cheat evaluation on a built
/// protocol and assembles the report.
pub fn run_nogo_parts(
    config: NogoConfig,
    tree: &CommunicationTree,
    a0: &Strategy,
    a1: &Strategy,
    bobs: &[Strategy],
    rho0: &HybridState,
    verifier: &Verifier,
) -> Result<NogoReport> {
    let reg = StrategyRegister::new(tree, bobs.to_vec())?;
    validate(tree, a0, &bobs[0])?;
    validate(tree, a1, &bobs[0])?;
    let opts = align_options(config.seed);
    let conc = concealment(tree, a0, a1, &reg, rho0, &opts)?;
    let plan = synthesize_cheat(tree, a0, a1, &reg, rho0, &opts)?;
    let report = evaluate_cheat(tree, &plan, a0, a1, &reg, rho0, verifier, Some(&conc))?;
    let margin = 2.0 * report.eps_upper.max(0.0).sqrt() + config.tol_bound.0 - report.delta_hat;
    Ok(NogoReport {
        schema_version: REPORT_SCHEMA_VERSION,
        library_version: library_version().into(),
        command: "nogo".into(),
        config,
        eps_lower: F17(report.eps_lower),
        eps_upper: F17(report.eps_upper),
        eps_trace: F17(report.eps_trace),
        delta_hat: F17(report.delta_hat),
        eta: F17(report.eta),
        alignment_value: F17(report.alignment_value),
        alignment_lower: F17(report.alignment_lower),
        converged: report.converged,
        bound_check: CheckRow::new("delta_hat_le_2_sqrt_eps_upper_plus_tol", margin),
        per_strategy: report
            .rows
            .iter()
            .map(|r| NogoRow {
                bob: r.bob,
                bit: r.bit,
                trace_gap: F17(r.trace_gap),
                accept_honest: F17(r.accept_honest),
                accept_cheat: F17(r.accept_cheat),
            })
            .collect(),
    })
}

/// Built-in instances by name: "bell" or "anon".
pub fn run_nogo(config: NogoConfig) -> Result<NogoReport> {
    let inst = match config.instance.as_str() {
        "bell" => bell_protocol(1),
        "anon" => anonymous_state_protocol(config.d, config.leak.0, config.seed)?,
        other => {
            return Err(Error::Config(format!(
                "unknown instance '{}' (expected 'bell' or 'anon')",
                other
            )))
        }
    };
    run_nogo_parts(config, &inst.tree, &inst.a0, &inst.a1, &inst.bobs, &inst.rho0, &inst.verifier)
}

// ---------------------------------------------------------------------------
// shredder
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ShredderConfig {
    pub d: usize,
    pub trials: usize,
    pub seed: Seed,
    pub tol: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShredderCmdReport {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub config: ShredderConfig,
    pub report: crate::instances::ShredderReport,
    /// All success probabilities equal 1/d within the tolerance.
    pub independence_check: CheckRow,
    pub marginal_check: CheckRow,
}

pub fn run_shredder(config: ShredderConfig) -> Result<ShredderCmdReport> {
    if config.d < 2 {
        return Err(Error::Config("shredder needs d >= 2".into()));
    }
    let inst = ShredderInstance::new(config.d)?;
    let cheats: Vec<Channel> = (0..config.trials.max(1))
        .map(|t| random_channel(config.d, 3, config.seed.child(t as u64)))
        .collect();
    let report = shredder_eval(&inst, &cheats)?;
    let target = 1.0 / config.d as f64;
    let mut worst = 0.0f64;
    for (a, b) in &report.success {
        worst = worst.max((a.0 - target).abs()).max((b.0 - target).abs());
    }
    Ok(ShredderCmdReport {
        schema_version: REPORT_SCHEMA_VERSION,
        library_version: library_version().into(),
        command: "shredder".into(),
        config: config.clone(),
        independence_check: CheckRow::new("success_equals_one_over_d", config.tol.0 - worst),
        marginal_check: CheckRow::new(
            "bob_marginal_chaotic",
            1e-12 - report.bob_marginal_deviation.0,
        ),
        report,
    })
}

// ---------------------------------------------------------------------------
// monster
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MonsterConfig {
    pub d: usize,
    pub mu: usize,
    pub seed: Seed,
    /// Random general attacks to evaluate.
    pub attack_trials: usize,
    /// Plain-norm estimation trials (0 skips the estimate).
    pub norm_trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonsterCmdReport {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub config: MonsterConfig,
    pub mu_star_natural_log: u64,
    pub choi_lower: F17,
    /// 2 − 2μ/d².
    pub choi_bound: F17,
    pub choi_check: CheckRow,
    pub passive: PassiveCheatReport,
    pub honest_acceptance: [F17; 2],
    pub soundness_check: CheckRow,
    pub attacks: Vec<GeneralAttackReport>,
    pub attacks_check: CheckRow,
    pub op_norm_estimate: Option<F17>,
    pub separation_gap: Option<F17>,
}

pub fn run_monster(config: MonsterConfig) -> Result<MonsterCmdReport> {
    let inst = monster_build(config.d, config.mu, config.seed)?;
    let choi_lower = inst.choi_lower()?;
    let choi_bound = 2.0 - 2.0 * config.mu as f64 / (config.d * config.d) as f64;
    let passive = inst.passive_cheat()?;
    let (acc0, acc1) = inst.honest_acceptance()?;
    let mut attack_margin = f64::INFINITY;
    let mut attacks = Vec::with_capacity(config.attack_trials);
    for t in 0..config.attack_trials {
        let attack = MonsterAttack::random(&inst, 3, config.seed.child(1000 + t as u64))?;
        let rep = inst.general_attack(&attack)?;
        attack_margin = attack_margin.min(rep.bound.0 + 1e-9 - rep.p.0);
        attacks.push(rep);
    }
    if attacks.is_empty() {
        attack_margin = 0.0;
    }
    let (op_est, gap) = if config.norm_trials > 0 {
        let est = op_norm_estimate(&inst.r, &inst.s, config.norm_trials, config.seed.child(7))?;
        (Some(F17(est.value)), Some(F17(choi_lower - est.value)))
    } else {
        (None, None)
    };
    Ok(MonsterCmdReport {
        schema_version: REPORT_SCHEMA_VERSION,
        library_version: library_version().into(),
        command: "monster".into(),
        config: config.clone(),
        mu_star_natural_log: mu_star(config.d, 1.0, None),
        choi_lower: F17(choi_lower),
        choi_bound: F17(choi_bound),
        choi_check: CheckRow::new("choi_lower_ge_bound", choi_lower - choi_bound + 1e-9),
        passive,
        honest_acceptance: [F17(acc0), F17(acc1)],
        soundness_check: CheckRow::new(
            "honest_acceptance_is_one",
            1e-10 - (1.0 - acc0).abs().max((1.0 - acc1).abs()),
        ),
        attacks,
        attacks_check: CheckRow::new("attacks_below_monster_bound", attack_margin),
        op_norm_estimate: op_est,
        separation_gap: gap,
    })
}

// ---------------------------------------------------------------------------
// lemmas
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LemmasConfig {
    pub trials: usize,
    pub seed: Seed,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryResult {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Smallest margin observed (≥ 0 means the battery passed).
    pub worst_margin: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmasReport {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub config: LemmasConfig,
    pub batteries: Vec<BatteryResult>,
}

fn random_density<R: rand::Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for w in [0.5, 0.3, 0.2] {
        let v = haar_state_rng(dim, rng);
        m += (&v * v.adjoint()).scale(w);
    }
    DensityMatrix::new(m).expect("mixture of pure states")
}

/// Fidelity vs trace-distance inequalities on random pairs.
pub fn battery_norm_fidelity(trials: usize, seed: Seed, tol: f64) -> BatteryResult {
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let mut rng = seed.child(t as u64).rng();
        let d = 2 + (t % 4);
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let f = fidelity(&rho, &sigma).unwrap();
        let half = 0.5 * crate::numerics::trace_norm(&(rho.matrix() - sigma.matrix()));
        let lower = half - (1.0 - f) + tol;
        let upper = (1.0 - f * f).max(0.0).sqrt() - half + tol;
        let margin = lower.min(upper);
        if margin < 0.0 {
            violations += 1;
        }
        worst = worst.min(margin);
    }
    BatteryResult {
        name: "fidelity_trace_norm_equivalence".into(),
        cases: trials,
        violations,
        worst_margin: F17(worst),
    }
}

/// The joint-fidelity optimizer reaches 1 + F and never exceeds it.
pub fn battery_joint_fidelity(trials: usize, seed: Seed) -> BatteryResult {
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let mut rng = seed.child(t as u64).rng();
        let d = 2 + (t % 3);
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let f = fidelity(&rho, &sigma).unwrap();
        let (_, achieved) = joint_fidelity_optimum(&rho, &sigma).unwrap();
        let reach = achieved - (1.0 + f - 1e-3);
        let cap = (1.0 + f + 1e-9) - achieved;
        let margin = reach.min(cap);
        if margin < 0.0 {
            violations += 1;
        }
        worst = worst.min(margin);
    }
    BatteryResult {
        name: "joint_fidelity_optimum".into(),
        cases: trials,
        violations,
        worst_margin: F17(worst),
    }
}

/// Classical factors do not increase the sampled norm.
pub fn battery_classical_factor(trials: usize, seed: Seed) -> BatteryResult {
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let s = seed.child(t as u64);
        let a = random_channel(2, 2, s.child(1));
        let b = random_channel(2, 2, s.child(2));
        let (cq, states) = cq_norm_estimate(&a, &b, 3, 3, s.child(3)).unwrap();
        let plain = op_norm_estimate_with_starts(&a, &b, &states, 6, s.child(4)).unwrap();
        let margin = plain.value + 1e-6 - cq;
        if margin < 0.0 {
            violations += 1;
        }
        worst = worst.min(margin);
    }
    BatteryResult {
        name: "classical_factor_norm".into(),
        cases: trials,
        violations,
        worst_margin: F17(worst),
    }
}

/// Entanglement-breaking bystanders do not increase the sampled norm.
pub fn battery_bystander(trials: usize, seed: Seed) -> BatteryResult {
    let (e, _) = fourier_mub(2);
    let povm: Vec<CMatrix> = e.iter().map(|v| v * v.adjoint()).collect();
    let states: Vec<DensityMatrix> = e.iter().map(|v| DensityMatrix::pure(v).unwrap()).collect();
    let breaker = measure_prepare(&povm, &states).unwrap();
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let s = seed.child(t as u64);
        let a = random_channel(2, 2, s.child(1));
        let b = random_channel(2, 2, s.child(2));
        let with =
            crate::channels::bystander_norm_estimate(&a, &b, &breaker, 4, s.child(3)).unwrap();
        let plain = op_norm_estimate(&a, &b, 16, s.child(4)).unwrap();
        let margin = plain.value + 1e-6 - with.value;
        if margin < 0.0 {
            violations += 1;
        }
        worst = worst.min(margin);
    }
    BatteryResult {
        name: "entanglement_breaking_bystander_norm".into(),
        cases: trials,
        violations,
        worst_margin: F17(worst),
    }
}

/// Energy truncation obeys the 4√γ + 2γ/(1−γ) bound on constrained states.
pub fn battery_energy_truncation(trials: usize, seed: Seed) -> BatteryResult {
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    let gammas = [0.01, 0.1, 0.25];
    for t in 0..trials {
        let s = seed.child(t as u64);
        let dim = 4 + 4 * (t % 4); // 4, 8, 12, 16
        let h = CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                crate::numerics::C64::new(i as f64, 0.0)
            } else {
                crate::numerics::C64::new(0.0, 0.0)
            }
        });
        let ec = EnergyConstraint::new(h, 1.0 + (t % 3) as f64).unwrap();
        let ch = random_energy_respecting_channel(&ec, s.child(1)).unwrap();
        let rho = sample_constrained_state(&ec, s.child(2)).unwrap();
        for (gi, &gamma) in gammas.iter().enumerate() {
            let tc = energy_truncate(&ch, &ec, gamma, None).unwrap();
            let dev = truncation_deviation(&ch, &tc, &rho).unwrap();
            let margin = tc.bound - dev;
            if margin < 0.0 {
                violations += 1;
            }
            worst = worst.min(margin);
            let _ = gi;
        }
    }
    BatteryResult {
        name: "energy_truncation_bound".into(),
        cases: trials * gammas.len(),
        violations,
        worst_margin: F17(worst),
    }
}

pub fn run_lemmas(config: LemmasConfig) -> Result<LemmasReport> {
    if config.trials == 0 {
        return Err(Error::Config("lemmas needs at least one trial".into()));
    }
    // At the default 1000 trials: 1000 norm-fidelity pairs, 100 optimizer
    // pairs, 50 norm-lemma pairs each, 100 truncation pairs.
    let t = config.trials;
    let batteries = vec![
        battery_norm_fidelity(t, config.seed.child(1), 1e-10),
        battery_joint_fidelity((t / 10).max(20), config.seed.child(2)),
        battery_classical_factor((t / 20).max(10), config.seed.child(3)),
        battery_bystander((t / 20).max(10), config.seed.child(4)),
        battery_energy_truncation((t / 10).max(20), config.seed.child(5)),
    ];
    Ok(LemmasReport {
        schema_version: REPORT_SCHEMA_VERSION,
        library_version: library_version().into(),
        command: "lemmas".into(),
        config,
        batteries,
    })
}
