use bilinear_rank::design::{assemble_design, assemble_design_with, BlockPartition, ConfigLabel, DesignConfig, Preset};
use bilinear_rank::experiments::{
    apply_refinement, compare_with, run_config, CompareOptions, ModificationProcedure, RefinementProcedure,
};
use bilinear_rank::io::{parse_report, report_to_string};
use bilinear_rank::matrix::{svd, svd_with};
use bilinear_rank::rank::{sweep_batch, sweep_spectrum, ToleranceGrid};
use bilinear_rank::sectors::SectorMode;
use bilinear_rank::{Parallelism, C64};

#[test]
fn restricted_config_runs_give_one_rank_64_plateau() {
    for label in [ConfigLabel::A, ConfigLabel::B, ConfigLabel::C] {
        let (bundle, profile, plateaus) = run_config(label, &Preset::BlockRestricted, 7).unwrap();
        assert_eq!(bundle.config.label, label);
        assert_eq!(profile.ranks.len(), 29);
        assert_eq!(plateaus.len(), 1);
        assert_eq!(plateaus[0].rank_value, 64);
    }
}

#[test]
fn generic_run_is_full_rank_at_moderate_tolerance() {
    let (_, profile, _) = run_config(ConfigLabel::B, &Preset::Generic, 2).unwrap();
    assert_eq!(profile.rank_at(1e-10), Some(256));
    assert_eq!(profile.rank_at(1e-16), Some(256));
}

#[test]
fn mixed_profile_ignores_rescale_above_noise_floor() {
    let b = Preset::Mixed { state_subspace_dim: 12 }
        .sample(DesignConfig::config_a(), &BlockPartition::default_for(4), 1)
        .unwrap();
    let a = assemble_design(&b).unwrap();
    let base = apply_refinement(&b, &a, &RefinementProcedure::ToleranceSweep).unwrap();
    for c in [
        C64::new(1e-6, 0.0),
        C64::new(3.0, 0.0),
        C64::new(1e6, 0.0),
        C64::from_polar(1.0, 2.0),
    ] {
        let scaled = apply_refinement(&b, &a, &RefinementProcedure::rescale(c)).unwrap();
        for (k, &tau) in base.grid.values().iter().enumerate() {
            if tau >= 1e-14 {
                assert_eq!(base.ranks[k], scaled.ranks[k], "c={c} tau={tau:e}");
            }
        }
    }
    assert_eq!(base.rank_at(1e-10), Some(192));
}

#[test]
fn report_round_trips_and_modes_agree() {
    let cfg = DesignConfig::custom(3, 9, 9).unwrap();
    let p = BlockPartition::parse("0,1|2", 3).unwrap();
    let b = Preset::BlockRestricted.sample(cfg, &p, 5).unwrap();
    let refinements = RefinementProcedure::standard_set();
    let modifications = ModificationProcedure::standard_set(6);
    let mut options = CompareOptions {
        sector_mode: SectorMode::FourSector,
        ..CompareOptions::default()
    };
    options.parallelism = Parallelism::Sequential;
    let sequential = compare_with(&b, &refinements, &modifications, &options).unwrap();
    options.parallelism = Parallelism::Rayon;
    let parallel = compare_with(&b, &refinements, &modifications, &options).unwrap();
    assert_eq!(report_to_string(&sequential), report_to_string(&parallel));

    let text = report_to_string(&sequential);
    assert_eq!(parse_report(&text).unwrap(), sequential);
    assert!(sequential.plateaus_preserved);
    // Blocks of sizes 2 and 1 give 5 within pairs out of 9.
    assert_eq!(sequential.baseline_profile.max_rank(), 25);
    assert_eq!(sequential.max_rank_after_modification, 81);
}

#[test]
fn parallel_and_sequential_kernels_match_bitwise() {
    let b = Preset::Generic
        .sample(DesignConfig::config_b(), &BlockPartition::default_for(4), 9)
        .unwrap();
    let a_seq = assemble_design_with(&b, Parallelism::Sequential).unwrap();
    let a_par = assemble_design_with(&b, Parallelism::Rayon).unwrap();
    assert_eq!(a_seq, a_par);
    let s_seq = svd_with(&a_seq, Parallelism::Sequential).unwrap();
    let s_par = svd_with(&a_seq, Parallelism::Rayon).unwrap();
    assert_eq!(s_seq.values(), s_par.values());

    let grid = ToleranceGrid::default();
    let mats = vec![a_seq.clone(), a_seq.scale(C64::new(2.0, 0.0))];
    let batch = sweep_batch(&mats, &grid, 256, Parallelism::Rayon).unwrap();
    let single = sweep_spectrum(&svd(&a_seq).unwrap(), &grid, 256, "").unwrap();
    assert_eq!(batch[0].ranks, single.ranks);
    assert_eq!(batch[1].ranks, single.ranks);
}
