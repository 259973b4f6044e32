use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bulk::{BulkConfig, FieldPolarizations};
use crate::constants::omega_from_wavelength;
use crate::materials::{load_material_db, MaterialDb, SellmeierSet};

use Direction::{Backward as B, Forward as F};

fn db() -> MaterialDb {
    load_material_db(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/materials.json")).unwrap()
}

/// Dispersionless test medium.
fn constant(name: &str, n: f64) -> Material {
    let mut sellmeier = BTreeMap::new();
    sellmeier.insert(
        Polarization::Ordinary,
        SellmeierSet {
            a: 1.0,
            b: vec![n * n - 1.0],
            c: vec![0.0],
            d: 0.0,
        },
    );
    Material {
        name: name.into(),
        uniaxial: false,
        validity_um: [0.1, 10.0],
        sellmeier,
        provenance: String::new(),
    }
}

fn ordinary() -> FieldPolarizations {
    FieldPolarizations {
        pump: Polarization::Ordinary,
        signal: Polarization::Ordinary,
        idler: Polarization::Ordinary,
    }
}

fn stack(layers: Vec<Layer>, ambient_in: Material, ambient_out: Material) -> LayerStack {
    LayerStack {
        layers,
        ambient_in,
        ambient_out,
        polarizations: ordinary(),
        wave_polarization: WavePolarization::S,
        pump_angle: 0.0,
        signal_angle: 0.0,
    }
}

fn linear(material: Material, length: f64) -> Layer {
    Layer {
        length,
        material,
        nonlinear: NonlinearCoefficients::uniform(0.0),
    }
}

fn random_stack(rng: &mut ChaCha8Rng, angle: f64, pol: WavePolarization) -> LayerStack {
    let n = rng.random_range(1..7);
    let layers = (0..n)
        .map(|k| {
            let idx = rng.random_range(1.3..2.6);
            Layer {
                length: rng.random_range(20e-9..600e-9),
                material: constant(&format!("m{k}"), idx),
                nonlinear: NonlinearCoefficients::uniform(if k % 2 == 0 { 1e-12 } else { 0.0 }),
            }
        })
        .collect();
    let mut s = stack(
        layers,
        constant("in", rng.random_range(1.0..1.6)),
        constant("out", rng.random_range(1.0..1.6)),
    );
    s.wave_polarization = pol;
    s.signal_angle = angle;
    s
}

/// Reflection of an s-wave at normal incidence via characteristic matrices
/// `[[cos d, -i sin d / n], [-i n sin d, cos d]]`.
fn characteristic_reflection(indices: &[f64], lengths: &[f64], n0: f64, ns: f64, omega: f64) -> C {
    let i = C::new(0.0, 1.0);
    let mut m = [[C::new(1.0, 0.0), ZERO], [ZERO, C::new(1.0, 0.0)]];
    for (&n, &l) in indices.iter().zip(lengths) {
        let d = n * omega * l / LIGHT;
        let layer = [
            [C::new(d.cos(), 0.0), -i * d.sin() / n],
            [-i * n * d.sin(), C::new(d.cos(), 0.0)],
        ];
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = m[r][0] * layer[0][c] + m[r][1] * layer[1][c];
            }
        }
        m = out;
    }
    let b = m[0][0] + m[0][1] * ns;
    let c = m[1][0] + m[1][1] * ns;
    (n0 * b - c) / (n0 * b + c)
}

#[test]
fn quarter_wave_stack_reflects_at_bragg_frequency() {
    let lambda = 800e-9;
    let omega = omega_from_wavelength(lambda);
    let (nh, nl) = (2.3, 1.45);
    let mut layers = Vec::new();
    for _ in 0..6 {
        layers.push(linear(constant("H", nh), lambda / (4.0 * nh)));
        layers.push(linear(constant("L", nl), lambda / (4.0 * nl)));
    }
    layers.push(linear(constant("H", nh), lambda / (4.0 * nh)));
    let s = stack(layers.clone(), Material::vacuum(), constant("sub", 1.5));
    let p = s.pump_profile(&PumpSpec::cw(omega), omega, 0.0).unwrap();
    let idx: Vec<f64> = layers
        .iter()
        .map(|l| if l.material.name == "H" { nh } else { nl })
        .collect();
    let len: Vec<f64> = layers.iter().map(|l| l.length).collect();
    let r = characteristic_reflection(&idx, &len, 1.0, 1.5, omega);
    assert!((p.r - r).norm() < 1e-10, "{} vs {}", p.r, r);
    assert!(p.r.norm_sqr() > 0.99);
    assert!(p.left[0].1.norm() > 0.0);
}

#[test]
fn vacuum_layer_pump_is_a_plane_wave() {
    let s = stack(
        vec![linear(Material::vacuum(), 300e-9)],
        Material::vacuum(),
        Material::vacuum(),
    );
    let w = omega_from_wavelength(600e-9);
    let pump = PumpSpec::cw(w);
    let p = s.pump_profile(&pump, w, 0.0).unwrap();
    let phase = C::from_polar(1.0, w / LIGHT * 300e-9);
    assert!((p.left[0].0 - 1.0).norm() < 1e-15);
    assert!((p.right[0].0 - phase).norm() < 1e-14);
    assert!(p.right[0].1.norm() < 1e-15);
}

#[test]
fn vacuum_stack_escape_is_pure_phase() {
    let layers = (0..3).map(|_| linear(Material::vacuum(), 200e-9)).collect();
    let s = stack(layers, Material::vacuum(), Material::vacuum());
    let esc = s
        .escape_coefficients(Field::Signal, omega_from_wavelength(1e-6), 0.0)
        .unwrap();
    for e in esc {
        assert!((e.get(F, F).norm() - 1.0).abs() < 1e-14);
        assert!(e.get(F, B).norm() < 1e-15);
        assert!(e.get(B, F).norm() < 1e-15);
    }
}

#[test]
fn single_layer_escape_is_face_transmissivity() {
    let gan = db().get("GaN").unwrap().clone();
    let s = stack(vec![linear(gan.clone(), 400e-9)], gan.clone(), Material::vacuum());
    let w = omega_from_wavelength(1329e-9);
    let n = gan.refractive_index(w, Polarization::Ordinary, None).unwrap();
    let e = s.escape_coefficients(Field::Signal, w, 0.0).unwrap()[0];
    assert!((e.get(F, F) - 2.0 * n / (n + 1.0)).norm() < 1e-14);
    assert!(e.get(F, B).norm() < 1e-15);
}

#[test]
fn escape_matches_global_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..40 {
        let pol = if trial % 2 == 0 {
            WavePolarization::S
        } else {
            WavePolarization::P
        };
        let angle = rng.random_range(0.0..0.5);
        let s = random_stack(&mut rng, angle, pol);
        let w = omega_from_wavelength(rng.random_range(500e-9..1500e-9));
        let kx = 1.0 * w * s.signal_angle.sin() / LIGHT;
        let esc = s.escape_coefficients(Field::Signal, w, kx).unwrap();
        for l in 1..=s.len() {
            for (src, col) in [((C::new(1.0, 0.0), ZERO), 0), ((ZERO, C::new(1.0, 0.0)), 1)] {
                let (a_out, b_in) = s.escape_by_global_solve(Field::Signal, w, kx, l, src).unwrap();
                assert!((a_out - esc[l - 1].0[0][col]).norm() < 1e-10);
                assert!((b_in - esc[l - 1].0[1][col]).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn concatenation_is_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a = random_stack(&mut rng, 0.0, WavePolarization::S);
        let b = random_stack(&mut rng, 0.0, WavePolarization::S);
        let w = omega_from_wavelength(900e-9);
        let mut left = a.clone();
        left.ambient_out = Material::vacuum();
        let mut right = b.clone();
        right.ambient_in = Material::vacuum();
        let mut joined = a.clone();
        joined.layers.extend(b.layers.iter().cloned());
        joined.ambient_out = b.ambient_out.clone();
        let m = joined.optics(Field::Pump, w, 0.0).unwrap().total();
        let prod =
            right.optics(Field::Pump, w, 0.0).unwrap().total() * left.optics(Field::Pump, w, 0.0).unwrap().total();
        assert!(m.max_diff(&prod) < 1e-10 * m.0[0][0].norm().max(1.0));
    }
}

#[test]
fn linear_stack_emits_nothing() {
    let gan = db().get("GaN").unwrap().clone();
    let s = stack(
        vec![linear(gan.clone(), 100e-9), linear(gan, 100e-9)],
        Material::vacuum(),
        Material::vacuum(),
    );
    let w = omega_from_wavelength(1329e-9);
    let o = s
        .output_amplitudes(&PumpSpec::cw(2.0 * w), w, w, Contribution::Total)
        .unwrap();
    assert!(o
        .signal
        .iter()
        .flatten()
        .chain(o.idler.iter().flatten())
        .all(|v| v.norm() == 0.0));
}

fn gan_layer(length: f64) -> Layer {
    Layer {
        length,
        material: db().get("GaN").unwrap().clone(),
        nonlinear: NonlinearCoefficients::uniform(1e-12),
    }
}

#[test]
fn surface_ratios_follow_index_limits() {
    let s = stack(vec![gan_layer(117e-9)], Material::vacuum(), Material::vacuum());
    let wp = omega_from_wavelength(664.5e-9);
    let w = 0.5 * wp;
    let gan = db().get("GaN").unwrap().clone();
    let np = gan.refractive_index(wp, Polarization::Ordinary, None).unwrap();
    let ns = gan.refractive_index(w, Polarization::Ordinary, None).unwrap();
    let v = |ch| s.surface_ratio(1, ch, Field::Signal, w, w).unwrap();
    let checks = [
        (Channel::new(F, F, F), 2.0 * (np - ns) / ns),
        (Channel::new(F, F, B), 2.0 * np / ns),
        (Channel::new(F, B, B), 2.0 * (np + ns) / ns),
    ];
    for (ch, expect) in checks {
        assert!(
            (v(ch) - expect).abs() < 0.01 * expect.abs(),
            "{ch}: {} vs {expect}",
            v(ch)
        );
    }
    assert_eq!(v(Channel::new(F, F, F)), -v(Channel::new(B, B, B)));
    assert_eq!(v(Channel::new(F, B, B)), -v(Channel::new(B, F, F)));
}

#[test]
fn single_layer_matches_bulk() {
    let gan = db().get("GaN").unwrap().clone();
    let d = NonlinearCoefficients::pump_direction_only(F, 1e-12);
    let layer = Layer {
        length: 700e-9,
        material: gan.clone(),
        nonlinear: d,
    };
    let s = stack(vec![layer], gan.clone(), Material::vacuum());
    let wp = omega_from_wavelength(664.5e-9);
    let pump = PumpSpec::cw(wp);
    let bulk = BulkConfig {
        length: 700e-9,
        crystal: gan,
        polarizations: ordinary(),
        axis_angle: 0.0,
        nonlinear: d,
        pump,
        surrounding: Material::vacuum(),
    };
    for frac in [0.45, 0.5, 0.55] {
        let ws = frac * wp;
        let wi = wp - ws;
        for c in [Contribution::Volume, Contribution::Surface, Contribution::Total] {
            let o = s.output_amplitudes(&pump, ws, wi, c).unwrap();
            let a = bulk
                .amplitudes(Channel::new(F, F, F), ws, wi, C::new(1.0, 0.0))
                .unwrap();
            let (wv, wsur) = c.weights();
            let tt = a.t_signal * a.t_idler;
            let fs = tt * (wv * a.volume + wsur * a.surface_signal);
            let fi = tt * (wv * a.volume + wsur * a.surface_idler);
            assert!(
                (o.signal[0][0] - fs).norm() < 1e-10 * fs.norm(),
                "{c}: {} vs {fs}",
                o.signal[0][0]
            );
            assert!((o.idler[0][0] - fi).norm() < 1e-10 * fi.norm());
        }
    }
}

#[test]
fn negative_length_names_the_layer() {
    let mut s = stack(
        vec![gan_layer(100e-9), gan_layer(100e-9)],
        Material::vacuum(),
        Material::vacuum(),
    );
    s.layers[1].length = -1e-9;
    let msg = s.validate().unwrap_err().to_string();
    assert!(msg.contains("layers[1].length"), "{msg}");
}

#[test]
fn evanescent_signal_is_rejected() {
    let mut s = stack(vec![gan_layer(100e-9)], constant("hi", 2.5), constant("hi2", 2.5));
    s.ambient_out = constant("dense", 3.0);
    s.signal_angle = 1.2;
    let w = omega_from_wavelength(1329e-9);
    let e = s
        .output_amplitudes(&PumpSpec::cw(2.0 * w), w, w, Contribution::Total)
        .unwrap_err();
    assert!(matches!(e, Error::Evanescent { .. }));
}

proptest! {
    #[test]
    fn pump_energy_is_conserved(seed in 0u64..10_000, angle in 0.0f64..1.0, p in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pol = if p { WavePolarization::P } else { WavePolarization::S };
        let mut s = random_stack(&mut rng, 0.0, pol);
        s.pump_angle = angle;
        let w = omega_from_wavelength(rng.random_range(400e-9..1500e-9));
        let n_in = s.ambient_in.refractive_index(w, Polarization::Ordinary, None).unwrap();
        let kx = n_in * w * angle.sin() / LIGHT;
        let o = s.optics(Field::Pump, w, kx);
        prop_assume!(o.is_ok());
        let o = o.unwrap();
        let p = s.pump_profile(&PumpSpec::cw(w), w, kx).unwrap();
        let last = o.k_z.len() - 1;
        let flux = match pol {
            WavePolarization::S => o.k_z[last] / o.k_z[0],
            // for p waves the E-field flux ratio is (n_out cos_out)/(n_in cos_in)
            WavePolarization::P => {
                let cos = |j: usize| o.k_z[j] * LIGHT / (o.n[j] * w);
                o.n[last] * cos(last) / (o.n[0] * cos(0))
            }
        };
        prop_assert!((p.r.norm_sqr() + flux * p.t.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
