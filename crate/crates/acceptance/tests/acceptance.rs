//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::{Duration, Instant};

use bilinear_rank::design::{assemble_design, BlockPartition, DesignBundle, DesignConfig, Preset};
use bilinear_rank::experiments::{compare, ModificationProcedure, RefinementProcedure};
use bilinear_rank::matrix::{random_unitary, svd};
use bilinear_rank::rank::{
    detect_plateaus, rank_at_tolerance, realify, sweep_spectrum, Plateau, RankProfile, ToleranceGrid,
};
use bilinear_rank::sectors::{
    build_sector_scheme, nullspace_basis, sector_weights, SectorMode, SectorWeights, BLOCK_OFF_DIAGONAL,
};
use bilinear_rank::{DenseMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const AMBIENT: usize = 256;
const SHAPE_BUDGET: Duration = Duration::from_secs(1);
const SWEEP_BUDGET: Duration = Duration::from_secs(10);
const COMPARE_BUDGET: Duration = Duration::from_secs(30);
const MIN_PLATEAU_DECADES: f64 = 8.0;
const MIN_PLATEAU_POINTS: usize = 3;
const SECTOR_TOL: f64 = 1e-12;
const EXCLUSIVE_WEIGHT_TOL: f64 = 1e-10;
const ORACLE_WEIGHT_TOL: f64 = 1e-8;
const WEIGHT_SUM_TOL: f64 = 1e-12;
const ROTATION_TOL: f64 = 1e-10;
const ORACLE_RANK_TAU: f64 = 1e-10;
const PERTURBATION: f64 = 1e-6;
const MIXED_DIM: usize = 12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(label: &str) -> DesignConfig {
    DesignConfig::from_label(label.parse().unwrap()).unwrap()
}

fn bundle(label: &str, preset: Preset, seed: u64) -> DesignBundle {
    let cfg = config(label);
    preset.sample(cfg, &BlockPartition::default_for(cfg.d), seed).unwrap()
}

fn profile(b: &DesignBundle) -> (RankProfile, Duration) {
    let t = Instant::now();
    let design = assemble_design(b).unwrap();
    let spectrum = svd(&design).unwrap();
    let p = sweep_spectrum(&spectrum, &ToleranceGrid::default(), b.ambient_dim(), &b.preset_label).unwrap();
    (p, t.elapsed())
}

fn plateau_summary(ps: &[Plateau]) -> String {
    ps.iter()
        .map(|p| format!("{}x{}", p.rank_value, p.len()))
        .collect::<Vec<_>>()
        .join(",")
}

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn shape_fidelity() -> Outcome {
    let t = Instant::now();
    let a = assemble_design(&bundle("A", Preset::Generic, 1)).unwrap();
    let b = assemble_design(&bundle("B", Preset::Generic, 1)).unwrap();
    let c = assemble_design(&bundle("C", Preset::Generic, 1)).unwrap();
    let r = realify(&a);
    let elapsed = t.elapsed();
    let shapes = [a.shape(), b.shape(), c.shape(), r.matrix().shape()];
    let ok = shapes == [(256, 256), (400, 256), (400, 256), (512, 512)] && elapsed < SHAPE_BUDGET;
    let msg = format!(
        "A {:?}, B {:?}, C {:?}, realified A {:?} in {elapsed:.2?}",
        shapes[0], shapes[1], shapes[2], shapes[3]
    );
    check(ok, msg.clone(), msg)
}

fn all_presets() -> Vec<(String, DesignBundle)> {
    let mut out = Vec::new();
    for label in ["A", "B", "C"] {
        for preset in [
            Preset::Generic,
            Preset::BlockRestricted,
            Preset::BlockPerturbed { epsilon: PERTURBATION },
            Preset::Mixed {
                state_subspace_dim: MIXED_DIM,
            },
        ] {
            out.push((format!("{label}/{preset}"), bundle(label, preset, 1)));
        }
    }
    out
}

fn nullity_identity() -> Outcome {
    let mut checked = 0;
    for (name, b) in all_presets() {
        let (p, _) = profile(&b);
        for (k, (&r, &n)) in p.ranks.iter().zip(&p.nullities).enumerate() {
            if n != AMBIENT - r || p.ambient_dim != AMBIENT {
                return Err(format!("{name}: grid point {k} rank {r} nullity {n}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} grid points over 12 presets"))
}

fn plateau_reproduction() -> Outcome {
    let restricted = bundle("A", Preset::BlockRestricted, 1);
    let (p, t_restricted) = profile(&restricted);
    let ps = detect_plateaus(&p);
    let oracle = common::product_span_dim(&restricted);
    let restricted_ok = ps.len() == 1
        && ps[0].rank_value == 64
        && oracle == 64
        && ps[0].span_decades >= MIN_PLATEAU_DECADES
        && t_restricted < SWEEP_BUDGET;

    let perturbed = bundle("A", Preset::BlockPerturbed { epsilon: PERTURBATION }, 1);
    let (q, t_perturbed) = profile(&perturbed);
    let qs = detect_plateaus(&q);
    let values: Vec<usize> = qs.iter().map(|p| p.rank_value).collect();
    let perturbed_ok =
        values == [256, 64] && qs.iter().all(|p| p.len() >= MIN_PLATEAU_POINTS) && t_perturbed < SWEEP_BUDGET;

    let msg = format!(
        "block-restricted: plateaus [{}] span {:.1} decades, span oracle {oracle}, {t_restricted:.2?}; \
         block-perturbed eps={PERTURBATION:e}: plateaus [{}] (want exactly 256 then 64), {t_perturbed:.2?}",
        plateau_summary(&ps),
        ps.first().map_or(0.0, |p| p.span_decades),
        plateau_summary(&qs)
    );
    check(restricted_ok && perturbed_ok, msg.clone(), msg)
}

fn longest(ps: &[Plateau]) -> &Plateau {
    ps.iter()
        .fold(&ps[0], |best, p| if p.len() > best.len() { p } else { best })
}

fn configuration_robustness() -> Outcome {
    let mut seen = Vec::new();
    for label in ["A", "B", "C"] {
        for seed in [1, 2, 3] {
            let (p, _) = profile(&bundle(label, Preset::BlockRestricted, seed));
            seen.push((format!("{label}/{seed}"), longest(&detect_plateaus(&p)).rank_value));
        }
    }
    let ok = seen.iter().all(|(_, v)| *v == 64);
    let msg = seen
        .iter()
        .map(|(n, v)| format!("{n}:{v}"))
        .collect::<Vec<_>>()
        .join(" ");
    check(ok, msg.clone(), msg)
}

fn weights_at(b: &DesignBundle, tau: f64, mode: SectorMode) -> SectorWeights {
    let spectrum = svd(&assemble_design(b).unwrap()).unwrap();
    let basis = nullspace_basis(&spectrum, tau).unwrap();
    sector_weights(&basis, &build_sector_scheme(&b.partition, b.config.d, mode).unwrap()).unwrap()
}

fn weight_sum(w: &SectorWeights) -> f64 {
    w.weights
        .as_ref()
        .map_or(f64::NAN, |ws| ws.iter().map(|s| s.weight).sum())
}

fn sector_localization() -> Outcome {
    let restricted = bundle("A", Preset::BlockRestricted, 1);
    let wr = weights_at(&restricted, SECTOR_TOL, SectorMode::TwoSector);
    let off_r = wr.get(BLOCK_OFF_DIAGONAL).unwrap_or(f64::NAN);

    let mixed = bundle(
        "A",
        Preset::Mixed {
            state_subspace_dim: MIXED_DIM,
        },
        1,
    );
    let wm = weights_at(&mixed, SECTOR_TOL, SectorMode::TwoSector);
    let off_m = wm.get(BLOCK_OFF_DIAGONAL).unwrap_or(f64::NAN);
    let oracle = common::projector_trace_weights(&mixed, &common::TWO_SECTORS);
    let oracle_err = oracle
        .iter()
        .map(|(name, w)| (wm.get(name).unwrap_or(f64::NAN) - w).abs())
        .fold(0.0, f64::max);

    let ok = (off_r - 1.0).abs() <= EXCLUSIVE_WEIGHT_TOL
        && off_m > 0.5
        && off_m < 1.0
        && oracle_err <= ORACLE_WEIGHT_TOL
        && (weight_sum(&wr) - 1.0).abs() <= WEIGHT_SUM_TOL
        && (weight_sum(&wm) - 1.0).abs() <= WEIGHT_SUM_TOL;
    let msg = format!(
        "block-restricted off-diagonal {off_r:.12}; mixed off-diagonal {off_m:.12} (oracle gap {oracle_err:.1e}, nullspace dim {})",
        wm.nullspace_dim
    );
    check(ok, msg.clone(), msg)
}

fn basis_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for (b, mode) in [
        (
            bundle(
                "A",
                Preset::Mixed {
                    state_subspace_dim: MIXED_DIM,
                },
                1,
            ),
            SectorMode::FourSector,
        ),
        (bundle("A", Preset::BlockRestricted, 1), SectorMode::TwoSector),
    ] {
        let spectrum = svd(&assemble_design(&b).unwrap()).unwrap();
        let basis = nullspace_basis(&spectrum, SECTOR_TOL).unwrap();
        let scheme = build_sector_scheme(&b.partition, b.config.d, mode).unwrap();
        let base = sector_weights(&basis, &scheme).unwrap();
        for seed in 0..10 {
            let u = random_unitary(basis.dim(), 1000 + seed);
            let rotated = sector_weights(&basis.rotated(&u).unwrap(), &scheme).unwrap();
            for s in base.weights.as_ref().unwrap() {
                worst = worst.max((rotated.get(&s.sector).unwrap() - s.weight).abs());
            }
        }
    }
    check(
        worst <= ROTATION_TOL,
        format!("max change {worst:.1e} over 20 rotations"),
        format!("max change {worst:.1e}"),
    )
}

fn scale_invariance() -> Outcome {
    let grid = ToleranceGrid::default();
    let mut cases = 0;
    for (name, b) in [
        ("A/generic", bundle("A", Preset::Generic, 1)),
        ("A/block-restricted", bundle("A", Preset::BlockRestricted, 1)),
        ("B/generic", bundle("B", Preset::Generic, 2)),
    ] {
        let a = assemble_design(&b).unwrap();
        let base = sweep_spectrum(&svd(&a).unwrap(), &grid, AMBIENT, "").unwrap();
        for c in [1e-6, 3.0, 1e6] {
            let scaled = sweep_spectrum(&svd(&a.scale(C64::new(c, 0.0))).unwrap(), &grid, AMBIENT, "").unwrap();
            if scaled.ranks != base.ranks {
                return Err(format!(
                    "{name}: profile changed under c={c:e}: {:?} vs {:?}",
                    base.ranks, scaled.ranks
                ));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} rescaled profiles identical at all 29 grid points"))
}

fn refinement_vs_modification() -> Outcome {
    let t = Instant::now();
    let b = bundle("A", Preset::BlockRestricted, 1);
    let report = compare(
        &b,
        &RefinementProcedure::standard_set(),
        &ModificationProcedure::standard_set(2),
    )
    .unwrap();
    let elapsed = t.elapsed();
    let recovered: Vec<Option<usize>> = report
        .modification_results
        .iter()
        .map(|m| m.profile.rank_at(ORACLE_RANK_TAU))
        .collect();
    let ok = report.plateaus_preserved && recovered.iter().all(|r| *r == Some(256)) && elapsed < COMPARE_BUDGET;
    let msg = format!(
        "plateaus preserved {} over {} refinements; modification ranks at 1e-10 {:?}; {elapsed:.2?}",
        report.plateaus_preserved,
        report.refinement_results.len(),
        recovered
    );
    check(ok, msg.clone(), msg)
}

fn oracle_equivalence() -> Outcome {
    let mut lines = Vec::new();
    for (label, preset, seed) in [
        ("A", Preset::Generic, 1),
        ("B", Preset::Generic, 2),
        ("A", Preset::BlockRestricted, 1),
        ("B", Preset::BlockRestricted, 2),
        ("C", Preset::BlockRestricted, 3),
        (
            "A",
            Preset::Mixed {
                state_subspace_dim: MIXED_DIM,
            },
            1,
        ),
        ("B", Preset::Mixed { state_subspace_dim: 5 }, 4),
        ("C", Preset::Mixed { state_subspace_dim: 9 }, 5),
    ] {
        let b = bundle(label, preset, seed);
        let spectrum = svd(&assemble_design(&b).unwrap()).unwrap();
        let rank = rank_at_tolerance(&spectrum, ORACLE_RANK_TAU).unwrap();
        let null = nullspace_basis(&spectrum, ORACLE_RANK_TAU).unwrap().dim();
        let oracle = common::product_span_dim(&b);
        if rank != oracle || null != AMBIENT - oracle {
            return Err(format!(
                "{label}/{preset}: rank {rank}, nullspace {null}, oracle {oracle}"
            ));
        }
        lines.push(format!("{label}/{preset}:{rank}"));
    }
    Ok(lines.join(" "))
}

fn doubling_cases() -> Vec<DenseMatrix> {
    let mut out = Vec::new();
    for seed in 0..16u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3 + (seed % 5) as usize;
        let m = 2 * n + (seed % 4) as usize;
        let g = DenseMatrix::gaussian(m, n, &mut rng);
        // Odd seeds get exactly zero columns, so the exact rank drops.
        out.push(if seed % 2 == 1 {
            DenseMatrix::from_fn(m, n, |r, c| if c % 3 == 0 { C64::new(0.0, 0.0) } else { g[(r, c)] })
        } else {
            g
        });
    }
    for seed in 0..4 {
        let cfg = DesignConfig::custom(2, 4 + seed as usize, 5).unwrap();
        let b = Preset::BlockRestricted
            .sample(cfg, &BlockPartition::default_for(2), seed)
            .unwrap();
        out.push(assemble_design(&b).unwrap());
    }
    out
}

fn realified_doubling() -> Outcome {
    let grid = ToleranceGrid::default();
    let cases = doubling_cases();
    for (k, a) in cases.iter().enumerate() {
        let complex = svd(a).unwrap();
        let real = svd(realify(a).matrix()).unwrap();
        for &tau in grid.values() {
            let (rc, rr) = (
                rank_at_tolerance(&complex, tau).unwrap(),
                rank_at_tolerance(&real, tau).unwrap(),
            );
            if rr != 2 * rc {
                return Err(format!(
                    "matrix {k} {:?}: tau {tau:e} complex {rc} realified {rr}",
                    a.shape()
                ));
            }
        }
    }
    Ok(format!("{} matrices x {} grid points", cases.len(), grid.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("shape fidelity", shape_fidelity),
        ("nullity identity", nullity_identity),
        ("plateau reproduction", plateau_reproduction),
        ("robustness across configurations", configuration_robustness),
        ("sector localization", sector_localization),
        ("basis invariance", basis_invariance),
        ("scale invariance of rank", scale_invariance),
        ("refinement vs modification", refinement_vs_modification),
        ("oracle equivalence", oracle_equivalence),
        ("realified rank doubling", realified_doubling),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS  criterion {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
