//! Deposit, field solve and push working together on sampled ensembles.

use gyropic::diagnostics::TimeSeriesRow;
use gyropic::pic::{prepare_fields, sample_initial, solve_poisson, vp_step, Grid, InitialDataSpec, PoissonSettings};
use gyropic::{AnalyticModel, SchemeOrder, SchemeParams};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn one_step_keeps_mass_and_residual() {
    let mut ensemble = sample_initial(&InitialDataSpec::default(), 1000, 3).unwrap();
    let mut grid = Grid::new(65).unwrap();
    let settings = PoissonSettings::default();
    let params = SchemeParams::new(1.0, 0.1, SchemeOrder::Third).unwrap();
    let update = vp_step(&mut ensemble, &mut grid, 0.0, &params, &AnalyticModel::DiskConfinement, &settings).unwrap();
    assert!(update.solve.relative_residual <= 1e-10);

    let inside: f64 = ensemble.particles.iter().filter(|p| grid.in_square(p.x)).map(|p| p.weight).sum();
    prepare_fields(&ensemble, &mut grid, &settings).unwrap();
    assert!(((grid.deposited_mass() - inside) / inside).abs() <= 1e-12);
}

#[test]
fn potential_vanishes_off_the_disk_and_is_positive_inside() {
    let ensemble = sample_initial(&InitialDataSpec::default(), 5000, 9).unwrap();
    let mut grid = Grid::new(33).unwrap();
    grid.deposit(&ensemble.particles);
    solve_poisson(&mut grid, &PoissonSettings::default()).unwrap();
    for k in 0..grid.len() {
        if grid.inside[k] {
            assert!(grid.phi[k] >= 0.0);
        } else {
            assert_eq!(grid.phi[k], 0.0);
        }
    }
}

#[test]
fn trajectories_do_not_depend_on_worker_count() {
    let run = |threads: usize| {
        pool(threads).install(|| {
            let mut ensemble = sample_initial(&InitialDataSpec::default(), 3000, 5).unwrap();
            let mut grid = Grid::new(33).unwrap();
            let params = SchemeParams::new(0.05, 0.1, SchemeOrder::Second).unwrap();
            let model = AnalyticModel::DiskConfinement;
            let mut rows = Vec::new();
            for n in 0..5 {
                let t = n as f64 * 0.1;
                vp_step(&mut ensemble, &mut grid, t, &params, &model, &PoissonSettings::default()).unwrap();
                rows.push(TimeSeriesRow::measure(t + 0.1, &ensemble.particles, &grid, &model).unwrap().csv_line());
            }
            (ensemble.particles, rows)
        })
    };
    let (p1, r1) = run(1);
    let (p3, r3) = run(3);
    assert_eq!(r1, r3);
    assert!(p1.iter().zip(&p3).all(|(a, b)| a.x == b.x && a.e == b.e && a.w == b.w));
}

#[test]
fn strong_field_keeps_ensemble_confined() {
    let mut ensemble = sample_initial(&InitialDataSpec::default(), 2000, 2).unwrap();
    let mut grid = Grid::new(33).unwrap();
    let params = SchemeParams::new(0.05, 0.1, SchemeOrder::Third).unwrap();
    let model = AnalyticModel::DiskConfinement;
    for n in 0..20 {
        vp_step(&mut ensemble, &mut grid, n as f64 * 0.1, &params, &model, &PoissonSettings::default()).unwrap();
    }
    let row = TimeSeriesRow::measure(2.0, &ensemble.particles, &grid, &model).unwrap();
    assert!(row.escaped <= 20, "{} escaped", row.escaped);
}
