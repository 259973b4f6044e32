use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

use pairgen_core::bulk::{
    coupling_constant, phase_matching_angle, BulkConfig, Channel, FieldPolarizations, NonlinearCoefficients,
};
use pairgen_core::constants::omega_from_wavelength;
use pairgen_core::layered::{Layer, LayerStack, WavePolarization};
use pairgen_core::materials::{load_material_db, Direction, Field, Material, MaterialDb, Polarization};
use pairgen_core::observables::schmidt_from_matrix;
use pairgen_core::pump::PumpSpec;

const LIGHT: f64 = 299_792_458.0;

fn db() -> MaterialDb {
    load_material_db(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/materials.json")).unwrap()
}

fn material(name: &str) -> Material {
    db().get(name).unwrap().clone()
}

fn type_ii() -> FieldPolarizations {
    FieldPolarizations {
        pump: Polarization::Extraordinary,
        signal: Polarization::Extraordinary,
        idler: Polarization::Ordinary,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// reference values from tests/oracles
#[test]
fn shipped_bbo_matches_published_formula() {
    let bbo = material("BBO");
    let w = omega_from_wavelength(800e-9);
    let n_o = bbo.refractive_index(w, Polarization::Ordinary, Some(0.3)).unwrap();
    let n_e = bbo
        .refractive_index(w, Polarization::Extraordinary, Some(PI / 2.0))
        .unwrap();
    assert!(rel(n_o, 1.6605535) < 1e-6, "{n_o}");
    assert!(rel(n_e, 1.5444203) < 1e-6, "{n_e}");
}

#[test]
fn type_ii_bbo_angle() {
    let w = omega_from_wavelength(800e-9);
    let theta = phase_matching_angle(&material("BBO"), type_ii(), w, w, 0.5, 1.0).unwrap();
    assert!((theta.to_degrees() - 42.34702).abs() < 1e-4, "{}", theta.to_degrees());
}

#[test]
fn coupling_constant_magnitude() {
    let w = omega_from_wavelength(800e-9);
    let g = coupling_constant(1e-12, w, w, 1.66, 1.66);
    assert!(rel(g.norm(), 3.775042582276e-6) < 1e-12);
    assert!(g.re.abs() < 1e-12 * g.norm());
}

#[test]
fn shipped_materials_cover_visible_and_near_infrared() {
    let db = db();
    for name in ["BBO", "GaN", "AlN"] {
        let m = db.get(name).unwrap();
        for lambda in [400e-9, 664.5e-9, 1329e-9] {
            for pol in m.polarizations() {
                let n = m
                    .refractive_index(omega_from_wavelength(lambda), pol, Some(0.7))
                    .unwrap();
                assert!(n > 1.4 && n < 2.6, "{name} {pol} {lambda}: {n}");
            }
        }
    }
}

fn bbo_crystal(length: f64, axis_angle: f64) -> BulkConfig {
    BulkConfig {
        length,
        crystal: material("BBO"),
        polarizations: type_ii(),
        axis_angle,
        nonlinear: NonlinearCoefficients::uniform(2e-12),
        pump: PumpSpec::cw(omega_from_wavelength(400e-9)),
        surrounding: Material::vacuum(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bbo_surface_is_ratio_times_volume(
        length in 1e-7f64..1e-3,
        lambda_s in 700e-9f64..900e-9,
        lambda_i in 700e-9f64..900e-9,
        angle in 0.6f64..1.2,
        code in 0usize..8,
    ) {
        let cfg = bbo_crystal(length, angle);
        let ch = Channel::all().nth(code).unwrap();
        let (ws, wi) = (omega_from_wavelength(lambda_s), omega_from_wavelength(lambda_i));
        let a = cfg.amplitudes(ch, ws, wi, Complex64::new(0.3, -0.8)).unwrap();
        let scale = a.volume.norm().max(1e-300);
        prop_assert!((a.surface_signal - a.volume * a.ratio_signal).norm() <= 1e-10 * scale);
        prop_assert!((a.surface_idler - a.volume * a.ratio_idler).norm() <= 1e-10 * scale);
    }
}

fn gan_aln_stack() -> LayerStack {
    let (gan, aln) = (material("GaN"), material("AlN"));
    let mut layers = Vec::new();
    for k in 0..49 {
        let (m, length, d) = if k % 2 == 0 {
            (&gan, 117e-9, 1e-12)
        } else {
            (&aln, 180e-9, 0.0)
        };
        layers.push(Layer {
            length,
            material: m.clone(),
            nonlinear: NonlinearCoefficients::uniform(d),
        });
    }
    LayerStack {
        layers,
        ambient_in: Material::vacuum(),
        ambient_out: Material::vacuum(),
        polarizations: FieldPolarizations {
            pump: Polarization::Ordinary,
            signal: Polarization::Ordinary,
            idler: Polarization::Ordinary,
        },
        wave_polarization: WavePolarization::S,
        pump_angle: 0.0,
        signal_angle: 14f64.to_radians(),
    }
}

#[test]
fn shipped_stack_escape_matches_global_solve() {
    let s = gan_aln_stack();
    let w = omega_from_wavelength(1329e-9);
    let kx = w * s.signal_angle.sin() / LIGHT;
    let esc = s.escape_coefficients(Field::Signal, w, kx).unwrap();
    assert_eq!(esc.len(), s.len());
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    for l in 1..=s.len() {
        for (src, emitted) in [((one, zero), Direction::Forward), ((zero, one), Direction::Backward)] {
            let (a_out, b_in) = s.escape_by_global_solve(Field::Signal, w, kx, l, src).unwrap();
            let (e_f, e_b) = (
                esc[l - 1].get(Direction::Forward, emitted),
                esc[l - 1].get(Direction::Backward, emitted),
            );
            assert!((a_out - e_f).norm() < 1e-9 * e_f.norm().max(1.0), "layer {l}");
            assert!((b_in - e_b).norm() < 1e-9 * e_b.norm().max(1.0), "layer {l}");
        }
    }
}

#[test]
fn schmidt_entropy_of_simple_states() {
    let product = Array2::from_shape_fn((16, 16), |(a, b)| {
        Complex64::new((a as f64 + 1.0) * (b as f64 - 3.5), 0.0)
    });
    assert!(schmidt_from_matrix(&product).unwrap().entropy < 1e-10);

    let maximal = Array2::from_shape_fn((8, 8), |(a, b)| {
        if a == b {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    assert!((schmidt_from_matrix(&maximal).unwrap().entropy - 3.0).abs() < 1e-12);
}
