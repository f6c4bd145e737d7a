use std::path::PathBuf;

use cartoon_scatter::cartoon::{DomainB, SmoothPart};
use cartoon_scatter::deform::FieldSpec;
use cartoon_scatter::harness::config::{
    BankConfig, GridConfig, LadderConfig, NetworkConfig, SourceConfig,
};
use cartoon_scatter::harness::{exit_code, run_experiment, ExperimentConfig, ExperimentKind};
use cartoon_scatter::network::Nonlinearity;
use cartoon_scatter::signal::io::encode_pgm;
use cartoon_scatter::{Error, Execution, Grid, Signal};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_parse() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn sharpness_exponent_is_grid_converged() {
    let coarse =
        run_experiment(&ExperimentConfig::default_sharpness(), Execution::default()).unwrap();
    let fine = run_experiment(
        &ExperimentConfig::default_sharpness().with_grid_refinement(1),
        Execution::default(),
    )
    .unwrap();
    assert!(coarse.passed() && fine.passed());
    assert!((coarse.fit().unwrap().alpha - fine.fit().unwrap().alpha).abs() <= 0.01);
}

#[test]
fn smooth_mode_rejects_indicators() {
    let mut cfg = ExperimentConfig::default_sharpness();
    cfg.experiment = ExperimentKind::Smooth;
    let err = run_experiment(&cfg, Execution::Sequential).unwrap_err();
    assert!(matches!(err, Error::Hypothesis(_)), "{err}");
    assert_eq!(exit_code(&err), 1);
}

#[test]
fn smooth_mode_with_bump_fields() {
    let mut cfg = ExperimentConfig::default_smooth();
    cfg.deformation.field = FieldSpec::GaussianBump {
        direction: vec![1.0],
        width: 1.0,
    };
    let r = run_experiment(&cfg, Execution::default()).unwrap();
    assert!(r.passed(), "{}", r.summary());
    assert!(r.fit().unwrap().alpha >= 0.9);
}

#[test]
fn single_gaussian_translation_is_linear() {
    let mut cfg = ExperimentConfig::default_smooth();
    cfg.signal = SourceConfig::Smooth {
        part: SmoothPart::gaussian(1.0, &[0.0], 0.5),
    };
    let r = run_experiment(&cfg, Execution::default()).unwrap();
    let alpha = r.fit().unwrap().alpha;
    assert!((0.95..=1.05).contains(&alpha), "{alpha}");
}

fn small_disc(bank: BankConfig, nonlinearity: Nonlinearity) -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::Stability,
        grid: GridConfig {
            dim: 2,
            extent: 128,
            spacing: 1.0 / 16.0,
        },
        signal: SourceConfig::Cartoon {
            f1: SmoothPart::zero(),
            f2: SmoothPart::Constant { value: 1.0 },
            domain: DomainB::disc(&[0.0, 0.0], 1.0),
            size: None,
        },
        network: Some(NetworkConfig {
            depth: 2,
            nonlinearity,
            subsampling: 1,
            normalize: true,
            gain: 1.0,
            bank,
        }),
        deformation: cartoon_scatter::harness::config::DeformationConfig {
            field: FieldSpec::SmoothRandom {
                seed: 9,
                modes: 6,
                max_frequency: 0.1,
                envelope: 1.0,
            },
            ladder: LadderConfig {
                start: 0.2,
                ratio: 0.5,
                rungs: 5,
            },
            ..Default::default()
        },
        assertions: Default::default(),
        seed: None,
        output_dir: None,
    }
}

#[test]
fn stability_rungs_stay_below_input_errors() {
    for (bank, nl) in [
        (
            BankConfig::Wavelet {
                scales: 2,
                mother: cartoon_scatter::frames::WaveletMother::DifferenceOfGaussians,
                base_scale: None,
            },
            Nonlinearity::Relu,
        ),
        (
            BankConfig::Gabor {
                frequencies: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
                width: 0.3,
            },
            Nonlinearity::ShiftedSigmoid,
        ),
    ] {
        let r = run_experiment(&small_disc(bank, nl), Execution::default()).unwrap();
        assert!(r.passed(), "{}", r.summary());
        for row in &r.rows {
            assert!(row.feature_error <= row.input_error);
            assert!(row.feature_error > 0.0);
        }
    }
}

#[test]
fn subsampled_networks_run() {
    let mut cfg = small_disc(BankConfig::Delta, Nonlinearity::Modulus);
    cfg.network.as_mut().unwrap().subsampling = 2;
    cfg.assertions.contractivity_slack = Some(f64::INFINITY);
    let r = run_experiment(&cfg, Execution::default()).unwrap();
    assert_eq!(r.rows.len(), 5);
}

#[test]
fn nyquist_guard_is_a_config_error() {
    let mut cfg = ExperimentConfig::default_bandlimited();
    cfg.signal = SourceConfig::Bandlimited {
        bandwidth: 40.0,
        envelope: 0.5,
        doublings: 3,
    };
    let err = run_experiment(&cfg, Execution::Sequential).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    assert_eq!(exit_code(&err), 2);
}

#[test]
fn displacement_hypothesis_is_enforced() {
    let mut cfg = ExperimentConfig::default_smooth();
    cfg.deformation.ladder = LadderConfig {
        start: 0.6,
        ratio: 0.5,
        rungs: 5,
    };
    assert!(matches!(
        run_experiment(&cfg, Execution::Sequential),
        Err(Error::Hypothesis(_))
    ));
}

#[test]
fn seeds_control_the_output() {
    let cfg = small_disc(
        BankConfig::Random {
            count: 2,
            seed: 0,
            smoothness: 0.25,
        },
        Nonlinearity::Modulus,
    );
    let a = run_experiment(&cfg.clone().with_seed(1), Execution::default()).unwrap();
    let b = run_experiment(&cfg.clone().with_seed(1), Execution::Sequential).unwrap();
    let c = run_experiment(&cfg.with_seed(2), Execution::default()).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), c.to_csv());
}

#[test]
fn pgm_sources() {
    let grid = Grid::square(64, 1.0).unwrap();
    let img = Signal::from_real_fn(&grid, |x| if x[0].hypot(x[1]) <= 10.0 { 1.0 } else { 0.2 });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disc.pgm");
    std::fs::write(&path, encode_pgm(&img).unwrap()).unwrap();

    let mut cfg = small_disc(BankConfig::Delta, Nonlinearity::Modulus);
    cfg.experiment = ExperimentKind::Deformation;
    cfg.grid = GridConfig {
        dim: 2,
        extent: 64,
        spacing: 1.0,
    };
    cfg.signal = SourceConfig::Pgm { path, size: None };
    cfg.deformation.field = FieldSpec::ConstantTranslation {
        direction: vec![1.0, 0.0],
    };
    cfg.deformation.ladder = LadderConfig {
        start: 0.4,
        ratio: 0.5,
        rungs: 4,
    };
    let r = run_experiment(&cfg, Execution::default()).unwrap();
    assert!(r.rows.iter().all(|row| row.input_error > 0.0));

    cfg.experiment = ExperimentKind::Smooth;
    assert!(matches!(
        run_experiment(&cfg, Execution::Sequential),
        Err(Error::Config(_))
    ));

    cfg.grid.extent = 32;
    assert!(matches!(
        run_experiment(&cfg, Execution::Sequential),
        Err(Error::Config(_))
    ));
}
