use num_complex::Complex64;
use optomech_core::analysis::find_extrema;
use optomech_core::emission::weighted_transitions;
use optomech_core::oracle::{evolve_amplitudes, BathDiscretization, PhotonStart, Propagator};
use optomech_core::*;
use proptest::prelude::*;

fn setup(g1: f64, g2: f64, kappa: f64, kind: InitKind, n_max: usize) -> (TransitionMatrix, MechanicalInitState) {
    let p = ModelParams::in_mechanical_units(g1, g2, kappa).unwrap();
    let t = TransitionMatrix::new(&p, n_max).unwrap();
    let init = MechanicalInitState::new(kind, n_max, &t).unwrap();
    (t, init)
}

fn nearest_resonance(p: &ModelParams, x: f64) -> f64 {
    (0..40)
        .flat_map(|n| (0..40).map(move |m| (n, m)))
        .map(|(n, m)| (p.sideband_location(n, m) - x).abs())
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn prominent_peaks_sit_on_resonances(g2 in 0.01f64..0.1, kappa in 0.01f64..0.08, coherent in proptest::bool::ANY) {
        let kind = if coherent {
            InitKind::Coherent { beta: Complex64::new(0.7, 0.3) }
        } else {
            InitKind::Number { m0: 0 }
        };
        let (t, init) = setup(0.8, g2, kappa, kind, 60);
        let grid = DetuningGrid::uniform(-7.0, 5.0, kappa / 10.0).unwrap();
        let s = emission_spectrum(&init, &grid, &t).unwrap();
        let e = find_extrema(&s, kappa, 0.01).unwrap();
        prop_assert!(!e.peaks.is_empty());
        for peak in &e.peaks {
            let d = nearest_resonance(t.params(), peak.location);
            prop_assert!(d <= kappa / 2.0, "peak at {} is {d} from a resonance", peak.location);
        }
    }

    #[test]
    fn resolution_never_returns_with_larger_kappa(g1 in 0.0f64..1.5, g2 in 0.0f64..0.3, k1 in 1e-4f64..2.0, k2 in 1e-4f64..2.0) {
        let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        let a = ModelParams::in_mechanical_units(g1, g2, lo).unwrap().check_resolution();
        let b = ModelParams::in_mechanical_units(g1, g2, hi).unwrap().check_resolution();
        prop_assert!(a.ok || !b.ok);
    }
}

#[test]
fn sd_ground_emission_stays_red() {
    let (t, init) = setup(0.8, 0.05, 0.02, InitKind::SdGround, 60);
    let grid = DetuningGrid::uniform(-8.0, 8.0, 0.002).unwrap();
    let s = emission_spectrum(&init, &grid, &t).unwrap();
    let peak = s.max_value();
    let blue = s.window(0.02 + 1e-12, 8.0).max_value();
    assert!(blue < 1e-3 * peak, "{blue} vs {peak}");
}

#[test]
fn main_sidebands_match_their_ladder_index() {
    let kappa = 0.02;
    let (t, init) = setup(0.8, 0.1, kappa, InitKind::Number { m0: 0 }, 60);
    let grid = DetuningGrid::uniform(-6.0, 3.0, 0.002).unwrap();
    let s = emission_spectrum(&init, &grid, &t).unwrap();
    let r = analyze(&s, &AnalysisOptions::new(1.0, kappa)).unwrap();
    let p = t.params();
    let mut mains = 0;
    for peak in r.peaks.iter().filter(|q| q.class != PeakClass::Unclassified) {
        let (n, m) = (peak.n.unwrap(), peak.m.unwrap());
        assert!(m >= 0);
        let at = p.sideband_location(n, m as usize);
        assert!((peak.location - at).abs() <= kappa / 2.0);
        assert_eq!(peak.ladder_index(), Some(m - n as i64));
        if peak.class == PeakClass::MainSideband {
            mains += 1;
            assert_eq!(n, 0);
        }
    }
    assert!(mains >= 2);
}

#[test]
fn scattering_without_cavity_linewidth_returns_the_input() {
    let (t, init) = setup(0.8, 0.05, 1e-6, InitKind::Number { m0: 0 }, 60);
    let wp = WavepacketParams::on_zero_phonon_line(t.params(), 2.0).unwrap();
    // offset so no sample lands within 1e-3 of a resonance
    let grid = DetuningGrid::uniform(-5.0007, 3.0, 0.013).unwrap();
    let s = scattering_spectrum(&init, wp, &grid, &t).unwrap();
    for (d, v) in s.deltas.iter().zip(&s.values) {
        if nearest_resonance(t.params(), *d) < 1e-3 {
            continue;
        }
        let input = wp.input_density(*d);
        assert!((v / input - 1.0).abs() < 1e-4, "at {d}: {v} vs {input}");
    }
}

#[test]
fn narrow_packet_on_the_zero_phonon_line_suppresses_sub_peaks() {
    let kappa = 0.02;
    let (t, init) = setup(0.8, 0.05, kappa, InitKind::Number { m0: 0 }, 60);
    let grid = DetuningGrid::uniform(-4.0, 2.0, 0.001).unwrap();
    let count_sub = |epsilon: f64| {
        let wp = WavepacketParams::on_zero_phonon_line(t.params(), epsilon).unwrap();
        let s = scattering_spectrum(&init, wp, &grid, &t).unwrap();
        let e = find_extrema(&s, kappa, 0.005).unwrap();
        let p = t.params();
        // peaks off the n = 0 resonances
        e.peaks
            .iter()
            .filter(|q| (0..20).all(|m| (p.sideband_location(0, m) - q.location).abs() > kappa / 2.0))
            .count()
    };
    assert!(count_sub(2.0) >= 3);
    assert_eq!(count_sub(0.005), 0);
}

#[test]
fn finer_bath_moves_less_than_the_remaining_gap() {
    let kappa = 0.02;
    let (t, init) = setup(0.8, 0.01, kappa, InitKind::Number { m0: 0 }, 60);
    let lines = weighted_transitions(&init, &t, 0.0);
    let centre = lines.iter().map(|(e, w)| e * w).sum::<f64>() / lines.iter().map(|l| l.1).sum::<f64>();
    let t_final = 8.0 / kappa;
    let coarse = BathDiscretization::for_observation(centre, 8.0, t_final, kappa).unwrap();
    // twice the modes, shifted by a quarter spacing so each six-mode bin
    // covers exactly one three-mode bin of the coarse bath
    let quarter = coarse.spacing() / 4.0;
    let fine = BathDiscretization::uniform(
        coarse.delta_min - quarter,
        coarse.delta_max + quarter,
        2 * coarse.n_modes,
        kappa,
    )
    .unwrap();
    // numeric minus analytic, both averaged over the modes of each bin
    let residual = |bath: &BathDiscretization, bin: usize| {
        let snap = evolve_amplitudes(&t, bath, &init, PhotonStart::Cavity, t_final, 16, Propagator::default()).unwrap();
        let numeric: Vec<f64> = snap.binned_spectrum(bath, bin).iter().map(|b| b.1).collect();
        let grid = DetuningGrid::from_points(bath.detunings.clone()).unwrap();
        let analytic = emission_spectrum(&init, &grid, &t).unwrap();
        let reference: Vec<f64> = analytic
            .values
            .chunks(bin)
            .take(numeric.len())
            .map(|c| c.iter().sum::<f64>() / bin as f64)
            .collect();
        let norm = reference.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r: Vec<f64> = numeric.iter().zip(&reference).map(|(x, y)| (x - y) / norm).collect();
        r
    };
    let a = residual(&coarse, 3);
    let b = residual(&fine, 6);
    let count = a.len().min(b.len());
    let l2 = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let gap = l2(&mut a[..count].iter().copied());
    let change = l2(&mut a[..count].iter().zip(&b[..count]).map(|(x, y)| x - y));
    assert!(gap < 1e-2, "gap {gap}");
    assert!(change < 0.3 * gap, "refinement moved the residual by {change:e}, gap {gap:e}");
}
