use nlslab_core::checkpoint::{decode, encode_field, Checkpoint};
use nlslab_core::nls::{evolve, l2_distance, AdaptiveLens, EvolutionConfig, Gaussian, LensField, Model};
use nlslab_core::ode::{solve_dispersion, OdeKind};
use nlslab_core::Grid;

fn datum(grid: Grid) -> nlslab_core::ComplexField {
    Gaussian { chirp: 0.3, ..Gaussian::unit() }.sample(grid)
}

#[test]
fn lab_and_lens_frames_agree() {
    let grid = Grid::new(1, 1024, 24.0).unwrap();
    let u0 = datum(grid);
    let sigma = 0.2;
    let model = Model::RescaledPower { sigma };
    let probes = vec![0.5, 1.0, 2.0];
    let lab = evolve(&u0, model, &EvolutionConfig::lab(1e-3, 2.0, probes.clone())).unwrap();
    let curve = solve_dispersion(OdeKind::SigmaPower { sigma, d: 1 }, 2.0, 1e-11).unwrap();
    let lens = evolve(&u0, model, &EvolutionConfig::self_similar(1e-3, 2.0, probes, curve)).unwrap();
    let lens_final = lens.lens.expect("lens state");
    let back = lens_final.to_lab(&grid).unwrap();
    let err = l2_distance(&back, &lab.field).unwrap();
    assert!(err <= 1e-4, "frame mismatch {err:e}");
}

#[test]
fn adaptive_lens_tracks_lab_run() {
    let grid = Grid::new(1, 1024, 24.0).unwrap();
    let u0 = datum(grid);
    let model = Model::Power { sigma: 1.0 };
    let lab = evolve(&u0, model, &EvolutionConfig::lab(5e-4, 2.0, vec![2.0])).unwrap();
    let lens = AdaptiveLens::new(grid, model, 1e-300, 0.002, 5e-4);
    let mut v = LensField::at_origin(u0.clone());
    lens.run_to(&mut v, 2.0).unwrap();
    let err = l2_distance(&v.to_lab(&grid).unwrap(), &lab.field).unwrap();
    assert!(err <= 1e-4, "adaptive mismatch {err:e}");
}

#[test]
fn checkpoint_roundtrip_of_evolved_field() {
    let grid = Grid::new(2, 32, 6.0).unwrap();
    let u0 = Gaussian::unit().sample(grid);
    let run = evolve(&u0, Model::Log, &EvolutionConfig::lab(1e-2, 0.2, vec![0.2])).unwrap();
    match decode(&encode_field(&run.field)).unwrap() {
        Checkpoint::Field(f) => assert_eq!(f, run.field),
        other => panic!("expected a field, got {other:?}"),
    }
}
