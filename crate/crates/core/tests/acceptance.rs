//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test -p qbc-core --test acceptance -- --nocapture`.

use qbc_core::channels::{
    align_isometries, cb_norm_estimate, op_norm_estimate, random_channel, stinespring,
    AlignOptions, AverageFidelityMode, StinespringDilation,
};
use qbc_core::drivers::{
    battery_bystander, battery_classical_factor, battery_energy_truncation,
    battery_joint_fidelity, battery_norm_fidelity, run_lemmas, run_monster, run_nogo,
    LemmasConfig, MonsterConfig, NogoConfig,
};
use qbc_core::hybrid::Label;
use qbc_core::instances::{
    anonymous_state_protocol, bell_protocol, monster_build, shredder_eval, MonsterAttack,
    ProtocolInstance, ShredderInstance,
};
use qbc_core::numerics::{haar_unitary, CMatrix, Seed};
use qbc_core::protocol::{
    concealment, evaluate_cheat, register_channel, synthesize_cheat,
};
use qbc_core::report::F17;

struct Criterion {
    name: &'static str,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name }
    }

    fn pass(self) {
        println!("criterion {}: PASS", self.name);
    }

    fn check(&self, condition: bool, detail: String) {
        if !condition {
            println!("criterion {}: FAIL ({})", self.name, detail);
            panic!("criterion {} failed: {}", self.name, detail);
        }
    }
}

fn nogo_delta_and_oracle(inst: &ProtocolInstance, seed: Seed) -> (f64, f64, f64) {
    let reg = inst.register().unwrap();
    let opts = AlignOptions { seed: seed.child(42), ..AlignOptions::default() };
    let conc = concealment(&inst.tree, &inst.a0, &inst.a1, &reg, &inst.rho0, &opts).unwrap();
    let plan = synthesize_cheat(&inst.tree, &inst.a0, &inst.a1, &reg, &inst.rho0, &opts).unwrap();
    let report = evaluate_cheat(
        &inst.tree,
        &plan,
        &inst.a0,
        &inst.a1,
        &reg,
        &inst.rho0,
        &inst.verifier,
        Some(&conc),
    )
    .unwrap();
    let g0 = register_channel(&inst.tree, &inst.a0, &reg, &inst.rho0).unwrap();
    let g1 = register_channel(&inst.tree, &inst.a1, &reg, &inst.rho0).unwrap();
    let eps_oracle = cb_norm_estimate(&g0, &g1, reg.len(), 16, seed.child(77)).unwrap().value;
    (report.delta_hat, eps_oracle, plan.alignment_value)
}

#[test]
fn criterion_01_nogo_bound() {
    let c = Criterion::new("1 (no-go bound)");

    let bell = bell_protocol(1);
    let (delta, eps_oracle, _) = nogo_delta_and_oracle(&bell, Seed::new(1, 0));
    c.check(delta <= 1e-8, format!("bell delta_hat {} > 1e-8", delta));
    c.check(
        delta <= 2.0 * eps_oracle.max(0.0).sqrt() + 1e-3,
        format!("bell delta {} vs oracle {}", delta, eps_oracle),
    );

    let cases = [
        (2usize, 0.0), (2, 0.05), (2, 0.1), (2, 0.3),
        (3, 0.0), (3, 0.05), (3, 0.1), (3, 0.3),
        (2, 0.1), (3, 0.05),
    ];
    for (i, &(d, leak)) in cases.iter().enumerate() {
        let seed = Seed::new(9000 + i as u64, 0);
        let inst = anonymous_state_protocol(d, leak, seed).unwrap();
        let (delta, eps_oracle, _) = nogo_delta_and_oracle(&inst, seed);
        c.check(
            delta <= 2.0 * eps_oracle.max(0.0).sqrt() + 1e-3,
            format!(
                "anon d={} leak={} seed={} delta {} vs 2*sqrt(eps) {}",
                d,
                leak,
                i,
                delta,
                2.0 * eps_oracle.max(0.0).sqrt()
            ),
        );
    }
    c.pass();
}

#[test]
fn criterion_02_continuity_sandwich() {
    let c = Criterion::new("2 (continuity sandwich)");
    for t in 0..20u64 {
        let a = random_channel(2, 2, Seed::new(2000, 2 * t));
        let b = random_channel(2, 2, Seed::new(2000, 2 * t + 1));
        let va = stinespring(&a);
        let vb = stinespring(&b);
        let opts = AlignOptions { seed: Seed::new(2001, t), ..AlignOptions::default() };
        let align = align_isometries(&va, &vb, true, &opts).unwrap();
        let cb = cb_norm_estimate(&a, &b, 2, 30, Seed::new(2002, t)).unwrap().value;
        c.check(
            align.value * align.value <= cb + 1e-3,
            format!("pair {}: align² {} > cb {}", t, align.value * align.value, cb),
        );
        c.check(
            cb <= 2.0 * align.value + 1e-3,
            format!("pair {}: cb {} > 2·align {}", t, cb, 2.0 * align.value),
        );
    }
    // Blockwise vs unrestricted on direct-sum pairs.
    for t in 0..10u64 {
        let seed = Seed::new(2100, t);
        let mk = |s: Seed| {
            let u = haar_unitary(8, s);
            let mut b0 = CMatrix::zeros(4, 2);
            let mut b1 = CMatrix::zeros(4, 2);
            for j in 0..2 {
                for i in 0..4 {
                    b0[(i, j)] = u[(i, j)];
                    b1[(i, j)] = u[(4 + i, j)];
                }
            }
            StinespringDilation::new(
                2,
                vec![
                    qbc_core::channels::DilationBlock {
                        label: Label(vec![0]),
                        dim_a: 2,
                        dim_b: 2,
                        v: b0,
                    },
                    qbc_core::channels::DilationBlock {
                        label: Label(vec![1]),
                        dim_a: 2,
                        dim_b: 2,
                        v: b1,
                    },
                ],
            )
            .unwrap()
        };
        let v0 = mk(seed.child(0));
        let v1 = mk(seed.child(1));
        let opts = AlignOptions { seed: Seed::new(2101, t), ..AlignOptions::default() };
        let block = align_isometries(&v0, &v1, true, &opts).unwrap();
        let full = align_isometries(&v0, &v1, false, &opts).unwrap();
        c.check(
            (block.value - full.value).abs() <= 1e-8,
            format!("pair {}: blockwise {} vs unrestricted {}", t, block.value, full.value),
        );
    }
    c.pass();
}

#[test]
fn criterion_03_shredder() {
    let c = Criterion::new("3 (shredder)");
    for d in [2usize, 4, 8] {
        let inst = ShredderInstance::new(d).unwrap();
        let cheats: Vec<_> =
            (0..20).map(|t| random_channel(d, 3, Seed::new(3000 + d as u64, t))).collect();
        let report = shredder_eval(&inst, &cheats).unwrap();
        let target = 1.0 / d as f64;
        for (i, (p01, p10)) in report.success.iter().enumerate() {
            c.check(
                (p01.0 - target).abs() <= 1e-9 && (p10.0 - target).abs() <= 1e-9,
                format!("d={} channel {}: ({}, {})", d, i, p01.0, p10.0),
            );
        }
        c.check(
            report.bob_marginal_deviation.0 <= 1e-12,
            format!("d={} marginal deviation {}", d, report.bob_marginal_deviation.0),
        );
    }
    c.pass();
}

#[test]
fn criterion_04_monster_choi_bound() {
    let c = Criterion::new("4 (monster Choi bound)");
    for (i, &(d, mu)) in [(8usize, 1usize), (8, 2), (16, 8), (32, 64)].iter().enumerate() {
        let inst = monster_build(d, mu, Seed::new(4000 + i as u64, 0)).unwrap();
        let got = inst.choi_lower().unwrap();
        let bound = 2.0 - 2.0 * mu as f64 / (d * d) as f64;
        c.check(
            got >= bound - 1e-9,
            format!("(d,mu)=({},{}): {} < {}", d, mu, got, bound),
        );
        if mu == 1 {
            c.check(
                (got - bound).abs() <= 1e-9,
                format!("(d,mu)=({},{}): equality violated: {} vs {}", d, mu, got, bound),
            );
        }
    }
    c.pass();
}

#[test]
fn criterion_05_separation() {
    let c = Criterion::new("5 (norm separation)");
    let inst = monster_build(32, 64, Seed::new(5000, 0)).unwrap();
    let cb_lower = inst.choi_lower().unwrap();
    c.check(cb_lower >= 1.875 - 1e-9, format!("cb_lower {} < 1.875", cb_lower));
    let est = op_norm_estimate(&inst.r, &inst.s, 1000, Seed::new(5001, 0)).unwrap();
    let gap = cb_lower - est.value;
    println!(
        "criterion 5 detail: cb_lower {:.6}, op_norm estimate {:.6}, gap {:.6}",
        cb_lower, est.value, gap
    );
    c.check(gap >= 0.5, format!("gap {} < 0.5 (op estimate {})", gap, est.value));
    c.pass();
}

#[test]
fn criterion_06_monster_bindingness() {
    let c = Criterion::new("6 (monster bindingness)");
    for (i, &(d, mu)) in [(8usize, 1usize), (8, 2), (16, 8), (32, 64)].iter().enumerate() {
        let inst = monster_build(d, mu, Seed::new(6000 + i as u64, 0)).unwrap();
        let passive = inst.passive_cheat().unwrap();
        for row in &passive.chain {
            c.check(
                row.passed,
                format!("(d,mu)=({},{}): chain step {} margin {}", d, mu, row.name, row.margin),
            );
        }
        c.check(
            passive.p.0 <= 1.0 / d as f64 + passive.delta.0 + 1e-9,
            format!("(d,mu)=({},{}): P {} vs bound", d, mu, passive.p.0),
        );
    }
    // Random general attacks at (8, 2).
    let inst = monster_build(8, 2, Seed::new(6100, 0)).unwrap();
    for t in 0..20u64 {
        let attack = MonsterAttack::random(&inst, 3, Seed::new(6101, t)).unwrap();
        let rep = inst.general_attack(&attack).unwrap();
        c.check(
            rep.p.0 <= rep.bound.0 + 1e-9,
            format!("attack {}: P {} > bound {}", t, rep.p.0, rep.bound.0),
        );
    }
    // Soundness.
    let (acc0, acc1) = inst.honest_acceptance().unwrap();
    c.check(
        (acc0 - 1.0).abs() <= 1e-10 && (acc1 - 1.0).abs() <= 1e-10,
        format!("honest acceptance ({}, {})", acc0, acc1),
    );
    c.pass();
}

#[test]
fn criterion_07_fidelity_relation() {
    let c = Criterion::new("7 (average fidelity relation)");
    for t in 0..5u64 {
        let ch = random_channel(4, 3, Seed::new(7000, t));
        let exact = ch.average_fidelity(AverageFidelityMode::Exact).unwrap().value;
        let mc = ch
            .average_fidelity(AverageFidelityMode::MonteCarlo {
                samples: 20_000,
                seed: Seed::new(7001, t),
            })
            .unwrap();
        let err = mc.stderr.unwrap();
        c.check(
            (mc.value - exact).abs() <= 3.0 * err,
            format!("channel {}: MC {} vs exact {} (3se {})", t, mc.value, exact, 3.0 * err),
        );
    }
    c.pass();
}

#[test]
fn criterion_08_lemma_batteries() {
    let c = Criterion::new("8 (lemma batteries)");
    let b = battery_norm_fidelity(1000, Seed::new(8000, 0), 1e-10);
    c.check(b.violations == 0, format!("norm-fidelity violations: {}", b.violations));
    let b = battery_joint_fidelity(100, Seed::new(8001, 0));
    c.check(b.violations == 0, format!("joint-fidelity violations: {}", b.violations));
    let b = battery_classical_factor(50, Seed::new(8002, 0));
    c.check(b.violations == 0, format!("classical-factor violations: {}", b.violations));
    let b = battery_bystander(50, Seed::new(8003, 0));
    c.check(b.violations == 0, format!("bystander violations: {}", b.violations));
    c.pass();
}

#[test]
fn criterion_09_energy_truncation() {
    let c = Criterion::new("9 (energy truncation)");
    let b = battery_energy_truncation(100, Seed::new(9000, 0));
    c.check(
        b.violations == 0,
        format!("violations: {} (worst margin {})", b.violations, b.worst_margin.0),
    );
    c.pass();
}

#[test]
fn criterion_10_determinism() {
    let c = Criterion::new("10 (determinism)");
    let nogo_cfg = || NogoConfig {
        instance: "anon".into(),
        d: 2,
        leak: F17(0.1),
        seed: Seed::new(7, 0),
        tol_bound: F17(1e-3),
    };
    let a = serde_json::to_string(&run_nogo(nogo_cfg()).unwrap()).unwrap();
    let b = serde_json::to_string(&run_nogo(nogo_cfg()).unwrap()).unwrap();
    c.check(a == b, "nogo reports differ between identical runs".into());

    let monster_cfg = || MonsterConfig {
        d: 8,
        mu: 2,
        seed: Seed::new(1, 0),
        attack_trials: 5,
        norm_trials: 20,
    };
    let a = serde_json::to_string(&run_monster(monster_cfg()).unwrap()).unwrap();
    let b = serde_json::to_string(&run_monster(monster_cfg()).unwrap()).unwrap();
    c.check(a == b, "monster reports differ between identical runs".into());

    let lemmas_cfg = || LemmasConfig { trials: 50, seed: Seed::new(2, 0) };
    let a = serde_json::to_string(&run_lemmas(lemmas_cfg()).unwrap()).unwrap();
    let b = serde_json::to_string(&run_lemmas(lemmas_cfg()).unwrap()).unwrap();
    c.check(a == b, "lemmas reports differ between identical runs".into());
    c.pass();
}
