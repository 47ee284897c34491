//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance` runs all ten; numeric arguments select a
//! subset (`cargo test --test acceptance -- 4 7`). The process exits 0 after
//! printing every verdict; set `POOLDECODE_ACCEPTANCE_STRICT=1` to exit 1
//! when any criterion fails.

mod common;

use std::time::Instant;

use common::{random_lp, vertex_oracle};
use pooldecode_core::bounds::{fm_penalty, moment_oracle, sufficient_tests_nonuniform, SystemParams};
use pooldecode_core::decoders::{decode_coal, decode_roal, pool_counts};
use pooldecode_core::harness::{
    estimate_aper, find_min_tests, robustness_table, MinTests, RobustnessRow, SearchOptions,
};
use pooldecode_core::lp::{
    decode_colpal, decode_rolpal, decode_rolpalpp, kkt_check, lp_rolpal, solve_lp, LpStatus,
};
use pooldecode_core::model::{channel_stats, gen_test_matrix, sample_defective_set, simulate_outcomes};
use pooldecode_core::seed::derive;
use pooldecode_core::stats::linear_fit;
use pooldecode_core::{BitVec, DecoderConfig, DecoderId, ExperimentSpec, Instance, NoiseParams, TieRule};

const SEED: u64 = 20_240_601;

type Criterion = (usize, &'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Standard setting of the simulation figures.
fn fig_spec(decoder: DecoderId, l: usize) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(256, 16, l, 0, NoiseParams::new(0.05, 0.1).unwrap(), decoder);
    s.root_seed = SEED;
    s
}

fn z_score(hits: u64, n: u64, p: f64) -> f64 {
    (hits as f64 / n as f64 - p) / (p * (1.0 - p) / n as f64).sqrt()
}

fn channel() -> Verdict {
    let start = Instant::now();
    let (n, k, u, q, tests) = (50usize, 5usize, 0.2, 0.1, 100_000usize);
    let p = 1.0 / ((1.0 - u) * k as f64);
    let miss: f64 = 1.0 - (1.0 - u) * p;
    let gamma = (1.0 - q) * miss.powi(k as i32);
    let gamma0 = u / miss;

    let sd = sample_defective_set(n, k, derive(SEED, "defectives", 0)).unwrap();
    let design = gen_test_matrix(tests, n, p, derive(SEED, "design", 0)).unwrap();
    let noise = NoiseParams::new(u, q).unwrap();
    let inst = simulate_outcomes(design, &sd, noise, derive(SEED, "dilution", 0), derive(SEED, "additive", 0)).unwrap();
    let x = inst.design.matrix();
    let i = sd[0];
    let (mut zeros, mut with, mut with_neg, mut without, mut without_neg) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for t in 0..tests {
        let neg = !inst.y.get(t);
        zeros += u64::from(neg);
        if x.get(t, i) {
            with += 1;
            with_neg += u64::from(neg);
        } else {
            without += 1;
            without_neg += u64::from(neg);
        }
    }
    let zs = [
        z_score(zeros, tests as u64, gamma),
        z_score(with_neg, with, gamma0 * gamma),
        z_score(without_neg, without, gamma / miss),
    ];
    let secs = start.elapsed().as_secs_f64();
    let pass = zs.iter().all(|z| z.abs() <= 4.0) && secs < 5.0;
    verdict(
        pass,
        format!(
            "z(P(Y=0))={:.2} z(P(Y=0|i in pool))={:.2} z(P(Y=0|i not in pool))={:.2}, {secs:.2} s",
            zs[0], zs[1], zs[2]
        ),
    )
}

fn moments() -> Verdict {
    let (n, k, u, q, m) = (50usize, 5usize, 0.2, 0.1, 10_000usize);
    let p = 1.0 / ((1.0 - u) * k as f64);
    let miss: f64 = 1.0 - (1.0 - u) * p;
    let gamma = (1.0 - q) * miss.powi(k as i32);
    let gi = u / miss * gamma;
    let noise = NoiseParams::new(u, q).unwrap();
    let stats = channel_stats(p, k, noise).unwrap();
    let reps = 4u64;
    let mut pass = true;
    let mut parts = Vec::new();
    // the CoAl weight, and psi = 0 where the defective mean is not pinned to zero
    for psi in [gi / (1.0 - gi), 0.0] {
        // per-test contribution of an item: 1 if pooled and negative, -psi if pooled and positive
        let mean = |a: f64| p * (a - psi * (1.0 - a));
        let var = |a: f64| p * (a + psi * psi * (1.0 - a)) - mean(a).powi(2);
        let lib = moment_oracle(m, p, &stats, psi).unwrap();
        let mut worst = (0.0f64, 0.0f64);
        for r in 0..reps {
            let sd = sample_defective_set(n, k, derive(SEED, "moment-defectives", r)).unwrap();
            let design = gen_test_matrix(m, n, p, derive(SEED, "moment-design", r)).unwrap();
            let inst = simulate_outcomes(design, &sd, noise, derive(SEED, "moment-dil", r), derive(SEED, "moment-add", r))
                .unwrap();
            for (item, (neg, pos)) in pool_counts(&inst).into_iter().enumerate() {
                let t = neg as f64 - psi * pos as f64;
                let def = sd.contains(&item);
                let a = if def { gi } else { gamma };
                let z = (t - m as f64 * mean(a)) / (m as f64 * var(a)).sqrt();
                let slot = if def { &mut worst.0 } else { &mut worst.1 };
                *slot = slot.max(z.abs());
            }
        }
        let agree =
            (lib.mu_i - m as f64 * mean(gi)).abs() < 1e-9 && (lib.mu_j - m as f64 * mean(gamma)).abs() < 1e-9;
        pass &= worst.0 <= 4.0 && worst.1 <= 4.0 && agree;
        parts.push(format!(
            "psi={psi:.4}: max |z| defective {:.2}, non-defective {:.2}, means {:.2}/{:.2}, library agrees: {agree}",
            worst.0, worst.1, lib.mu_i, lib.mu_j
        ));
    }
    verdict(pass, format!("{} items x {reps} instances; {}", n, parts.join("; ")))
}

fn lp_solver() -> Verdict {
    let (mut optimal, mut infeasible, mut mismatch, mut kkt_fail) = (0, 0, 0, 0);
    for seed in 0..1000u64 {
        let p = random_lp(derive(SEED, "lp", seed));
        let sol = solve_lp(&p, 1e-9).unwrap();
        match vertex_oracle(&p) {
            None => {
                infeasible += 1;
                mismatch += usize::from(sol.status != LpStatus::Infeasible);
            }
            Some((best, _)) => {
                optimal += 1;
                if sol.status != LpStatus::Optimal || (sol.objective_value - best).abs() > 1e-8 {
                    mismatch += 1;
                } else if !kkt_check(&p, &sol, None, 1e-8).unwrap().passes(1e-8) {
                    kkt_fail += 1;
                }
            }
        }
    }
    let (mut solves, mut bracket_fail, mut prop_applies, mut prop_fail) = (0, 0, 0, 0);
    for seed in 0..300u64 {
        let m = 10 + (seed as usize % 8) * 10;
        let inst = common::instance(256, 16, m, 0.05, 0.1, derive(SEED, "lp0a", seed));
        let dec = lp_rolpal(&inst, 64, TieRule::SeededRandom, seed).unwrap();
        let report = kkt_check(&dec.problem, &dec.solution, Some(&inst.defective_set), 1e-8).unwrap();
        solves += 1;
        bracket_fail += usize::from(!report.nu_bracket_holds(1e-8) || !report.passes(1e-8));
        if report.prop1_condition == Some(true) {
            prop_applies += 1;
            prop_fail += usize::from(!dec.set.success_against(&inst.defective_set));
        }
    }
    verdict(
        mismatch == 0 && kkt_fail == 0 && bracket_fail == 0 && prop_fail == 0,
        format!(
            "random LPs: {optimal} optimal, {infeasible} infeasible, {mismatch} oracle mismatches, {kkt_fail} KKT failures; \
             LP0a: {solves} solves, {bracket_fail} nu-bracket/KKT violations, proposition applied {prop_applies} times with {prop_fail} violations"
        ),
    )
}

fn noiseless() -> Verdict {
    let noise = NoiseParams::noiseless();
    let m = sufficient_tests_nonuniform(&SystemParams::new(64, 4, 20, noise).unwrap()).unwrap().m as usize;
    let mut parts = Vec::new();
    let mut pass = true;
    for d in DecoderId::PROPOSED {
        let mut s = ExperimentSpec::new(64, 4, 20, m, noise, d);
        s.trials = 1000;
        s.root_seed = SEED;
        let e = estimate_aper(&s).unwrap();
        pass &= e.failures == 0;
        parts.push(format!("{d} {}/{}", e.failures, e.trials));
    }
    verdict(pass, format!("M = {m}: failures {}", parts.join(", ")))
}

fn aper_curve() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for d in DecoderId::PROPOSED {
        let (mut ms, mut logs) = (Vec::new(), Vec::new());
        for m in (10..=120).step_by(5) {
            let mut s = fig_spec(d, 64);
            s.m = m;
            s.trials = 500;
            let e = estimate_aper(&s).unwrap();
            if (0.01..=0.5).contains(&e.error_rate) {
                ms.push(m as f64);
                logs.push(e.error_rate.ln());
            }
        }
        match linear_fit(&ms, &logs) {
            Some(fit) if ms.len() >= 3 => {
                pass &= fit.r_squared >= 0.9 && fit.slope < 0.0;
                parts.push(format!("{d} R2={:.3} ({} pts, slope {:.4})", fit.r_squared, ms.len(), fit.slope));
            }
            _ => {
                pass = false;
                parts.push(format!("{d}: only {} points in range", ms.len()));
            }
        }
    }
    verdict(pass, parts.join("; "))
}

fn min_tests(d: DecoderId, l: usize) -> MinTests {
    let mut opts = SearchOptions::new(0.1, 4, 4096);
    opts.probe_trials = 1000;
    opts.final_trials = 2000;
    find_min_tests(&fig_spec(d, l), &opts).unwrap()
}

fn ordering() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [32usize, 64, 128] {
        let [ro, co, colp, ind, na] =
            [DecoderId::RoAl, DecoderId::CoAl, DecoderId::CoLpAl, DecoderId::InDirAl, DecoderId::Na1by1].map(|d| min_tests(d, l));
        let within = |x: &MinTests| x.m <= ro.m + (ro.m_ci.1 - ro.m) + (x.m - x.m_ci.0);
        let baseline = ind.m.min(na.m) as f64;
        let ok = within(&co) && within(&colp) && (co.m.max(colp.m) as f64) <= 0.8 * baseline;
        pass &= ok;
        parts.push(format!(
            "L={l}: RoAl {} CoAl {} CoLpAl {} InDirAl {} NA1by1 {}{}",
            ro.m,
            co.m,
            colp.m,
            ind.m,
            na.m,
            if ok { "" } else { " (order violated)" }
        ));
    }
    let ls: Vec<usize> = (16..=128).step_by(16).collect();
    for d in [DecoderId::CoAl, DecoderId::CoLpAl] {
        let ms: Vec<f64> = ls.iter().map(|&l| min_tests(d, l).m as f64).collect();
        let x: Vec<f64> = ls.iter().map(|&l| l as f64).collect();
        let fit = linear_fit(&x, &ms).unwrap();
        pass &= fit.r_squared >= 0.95;
        parts.push(format!("{d} affine-in-L R2={:.3} over L=16..128 (M* {:?})", fit.r_squared, ms));
    }
    verdict(pass, parts.join("; "))
}

fn robustness() -> Verdict {
    let table: [(DecoderId, [f64; 3]); 5] = [
        (DecoderId::RoAl, [1.13, 1.06, 1.20]),
        (DecoderId::CoAl, [1.13, 1.04, 1.17]),
        (DecoderId::RoLpAl, [1.09, 1.04, 1.17]),
        (DecoderId::RoLpAlPlusPlus, [1.04, 1.00, 1.17]),
        (DecoderId::CoLpAl, [1.11, 1.03, 1.19]),
    ];
    let mut opts = SearchOptions::new(0.1, 4, 4096);
    opts.probe_trials = 2000;
    opts.final_trials = 2000;
    let deltas = [0.75, 1.5, 2.0];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for (d, paper) in table {
        let rows: Vec<RobustnessRow> = robustness_table(&fig_spec(d, 128), &[d], &deltas, &opts).unwrap();
        let cells: Vec<String> = rows
            .iter()
            .zip(paper)
            .map(|(r, want)| {
                let err = (r.delta_m - want).abs();
                worst = worst.max(err);
                pass &= err <= 0.15;
                format!("{:.2} (paper {want:.2})", r.delta_m)
            })
            .collect();
        parts.push(format!("{d} M_ref={} {}", rows[0].m_ref, cells.join(" ")));
    }
    verdict(pass, format!("max deviation {worst:.3}; {}", parts.join("; ")))
}

fn closed_forms() -> Verdict {
    let f15 = fm_penalty(1.5, 0.0).unwrap();
    let f05 = fm_penalty(0.5, 0.0).unwrap();
    let fm_ok = (f15 - 1.09).abs() <= 0.005 && (f05 - 1.3).abs() <= 0.005;

    let mut entropy_bad = 0;
    for i in 1..=10_000 {
        let z = 0.5 * i as f64 / 10_000.0;
        let h = -z * z.ln() - (1.0 - z) * (1.0 - z).ln();
        entropy_bad += usize::from(h / (1.0 - z) > 17.0 / 6.0 * z + 0.25);
    }

    let mut sandwich_bad = 0;
    let mut cells = 0;
    for k in 2..=200usize {
        for ui in 0..50 {
            for qi in 0..10 {
                let (u, q) = (ui as f64 * 0.01, qi as f64 * 0.05);
                let p = 1.0 / ((1.0 - u) * k as f64);
                let g = channel_stats(p, k, NoiseParams::new(u, q).unwrap()).unwrap().gamma;
                let direct = (1.0 - q) * (1.0 - (1.0 - u) * p).powi(k as i32);
                cells += 1;
                let inside = (1.0 - q) * (-2f64).exp() <= g && g <= (1.0 - q) * (-1f64).exp() + 1e-15;
                sandwich_bad += usize::from(!inside || (g - direct).abs() > 1e-15);
            }
        }
    }
    verdict(
        fm_ok && entropy_bad == 0 && sandwich_bad == 0,
        format!(
            "f_M(1.5)={f15:.4} (want 1.09) f_M(0.5)={f05:.4} (want 1.30){}; entropy bound violations {entropy_bad}/10000; \
             Gamma sandwich violations {sandwich_bad}/{cells} (K = 2..200, u < 0.5, q < 0.5)",
            if fm_ok { "" } else { " MISMATCH" }
        ),
    )
}

fn reductions() -> Verdict {
    let (mut co, mut colp, mut pp) = (0, 0, 0);
    for seed in 0..200u64 {
        let inst = common::instance(256, 16, 30 + (seed as usize % 5) * 10, 0.05, 0.1, derive(SEED, "reduce", seed));
        let cfg = DecoderConfig::new(64).with_ties(TieRule::SeededRandom, seed);
        co += usize::from(decode_coal(&inst, &cfg.with_psi(0.0)).unwrap().items == decode_roal(&inst, &cfg).unwrap().items);
        colp += usize::from(
            decode_colpal(&inst, 64, Some(0.0), TieRule::SeededRandom, seed).unwrap().items
                == decode_rolpal(&inst, 64, TieRule::SeededRandom, seed).unwrap().items,
        );
        let neg = Instance::with_outcomes(inst.design.clone(), inst.defective_set.clone(), inst.noise, BitVec::zeros(inst.m()))
            .unwrap();
        pp += usize::from(
            decode_rolpalpp(&neg, 64, 0.01, TieRule::SeededRandom, seed).unwrap().items
                == decode_rolpal(&neg, 64, TieRule::SeededRandom, seed).unwrap().items,
        );
    }
    verdict(
        co == 200 && colp == 200 && pp == 200,
        format!("CoAl(psi=0)=RoAl {co}/200, CoLpAl(psi=0)=RoLpAl {colp}/200, RoLpAl++(no positives)=RoLpAl {pp}/200"),
    )
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run = |id: usize| wanted.is_empty() || wanted.contains(&id);
    let criteria: [Criterion; 9] = [
        (1, "channel validation", channel),
        (2, "moment oracle", moments),
        (3, "LP solver", lp_solver),
        (4, "noiseless exactness", noiseless),
        (5, "APER vs M shape", aper_curve),
        (6, "M* ordering vs L", ordering),
        (7, "robustness to K", robustness),
        (8, "closed forms", closed_forms),
        (9, "reductions", reductions),
    ];
    let mut failed = Vec::new();
    let mut passed = std::collections::BTreeSet::new();
    for (id, name, check) in criteria {
        if !run(id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {id} {name}: {} [{:.1} s]", v.detail, start.elapsed().as_secs_f64());
        if v.pass {
            passed.insert(id);
        } else {
            failed.push(id);
        }
    }
    if run(10) {
        let covered = [4, 5, 6].iter().all(|i| passed.contains(i));
        let ran = [4, 5, 6].iter().all(|i| run(*i));
        let tag = if !ran { "NOTE" } else if covered { "PASS" } else { "FAIL" };
        println!(
            "{tag} 10 high-probability guarantee: not checkable directly (an upper bound with large constants); \
             covered by criteria 4-6{}",
            if ran { "" } else { ", which were not run" }
        );
        if tag == "FAIL" {
            failed.push(10);
        }
    }
    println!("acceptance: {} passed, {} failed {:?}", passed.len(), failed.len(), failed);
    if !failed.is_empty() && std::env::var("POOLDECODE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
