mod common;

use common::{region_covariance_oracle, Shape};
use proptest::prelude::*;
use stochwave::noise::{sample_diamonds_exact, BackendTag, DiamondField, DiamondLatticeSpec, SeedInfo};
use stochwave::wave::{
    initialize_first_lines, march, restrict, simulate_pair, to_original, DiffusionKind, DiffusionSpec, FieldKind,
    LatticeField,
};
use stochwave::{Error, HurstParam, RngStream};

fn hp(h: f64) -> HurstParam {
    HurstParam::new(h).unwrap()
}

fn noise(n: usize, h: f64, seed: u64) -> DiamondField {
    sample_diamonds_exact(&DiamondLatticeSpec::cone(n).unwrap(), hp(h), RngStream::new(seed, 0)).unwrap()
}

fn spec(kind: DiffusionKind, theta: f64) -> DiffusionSpec {
    DiffusionSpec::new(kind, theta).unwrap()
}

fn nodes(lattice: &DiamondLatticeSpec) -> Vec<(i64, i64)> {
    let m = lattice.m();
    (-m..=m).flat_map(|i| ((-i).max(-m)..=m).map(move |j| (i, j))).collect()
}

#[test]
fn unit_constant_diffusion_reproduces_the_linear_solution() {
    for h in [0.5, 0.75] {
        let w = noise(24, h, 1);
        let v = march(&w, &spec(DiffusionKind::Constant(1.0), 1.0)).unwrap();
        let big_v = march(&w, &DiffusionSpec::LINEAR).unwrap();
        for (i, j) in nodes(w.lattice()) {
            assert_eq!(v.at(i, j).unwrap(), big_v.at(i, j).unwrap(), "node ({i}, {j})");
        }
        assert_eq!(big_v.kind(), FieldKind::Linear);
    }
}

#[test]
fn cell_increment_is_half_the_cell_mass() {
    let w = noise(32, 0.7, 2);
    let (v, big_v) = simulate_pair(&w, &spec(DiffusionKind::OnePlusSin, 1.5)).unwrap();
    let tol = 1e-13 * big_v.max_abs().max(1.0);
    for (i, j) in w.lattice().cells() {
        let mass = w.mass(i, j).unwrap();
        let d = big_v.rect_increment(i, j, 1, 1).unwrap();
        assert!((d - 0.5 * mass).abs() <= tol, "cell ({i}, {j})");
        let a = v.at(i, j).unwrap();
        let dn = v.rect_increment(i, j, 1, 1).unwrap();
        let expected = 0.5 * 1.5 * (1.0 + a.sin()) * mass;
        assert!((dn - expected).abs() <= 1e-13 * v.max_abs().max(1.0), "cell ({i}, {j})");
    }
}

#[test]
fn block_increment_of_the_linear_solution_sums_masses() {
    let w = noise(16, 0.75, 3);
    let big_v = march(&w, &DiffusionSpec::LINEAR).unwrap();
    let (i0, j0, k) = (2, 5, 4);
    let total: f64 = (i0..i0 + k)
        .flat_map(|i| (j0..j0 + k).map(move |j| (i, j)))
        .map(|(i, j)| w.mass(i, j).unwrap())
        .sum();
    let d = big_v.rect_increment(i0, j0, k, k).unwrap();
    assert!((d - 0.5 * total).abs() < 1e-13);
}

#[test]
fn first_lines_carry_boundary_masses() {
    let w = noise(8, 0.6, 4);
    let d = spec(DiffusionKind::Affine { a: 2.0, b: 5.0 }, 3.0);
    let f = initialize_first_lines(&w, &d).unwrap();
    let m = w.lattice().m();
    for a in -m..=m {
        assert_eq!(f.at(a, -a).unwrap(), 0.0);
    }
    for a in (1 - m)..=m {
        let expected = 0.5 * 3.0 * 5.0 * w.boundary_mass(a - 1).unwrap();
        assert!((f.at(a, 1 - a).unwrap() - expected).abs() < 1e-15);
    }
}

#[test]
fn zero_theta_gives_the_zero_field() {
    let w = noise(16, 0.5, 5);
    let v = march(&w, &spec(DiffusionKind::OnePlusSin, 0.0)).unwrap();
    assert_eq!(v.max_abs(), 0.0);
}

#[test]
fn constant_diffusion_scales_the_linear_solution() {
    let w = noise(16, 0.65, 6);
    let big_v = march(&w, &DiffusionSpec::LINEAR).unwrap();
    let v = march(&w, &spec(DiffusionKind::Constant(3.0), 0.5)).unwrap();
    for (i, j) in nodes(w.lattice()) {
        assert!((v.at(i, j).unwrap() - 1.5 * big_v.at(i, j).unwrap()).abs() < 1e-13);
    }
    let a = march(&w, &spec(DiffusionKind::Constant(3.0), 2.0)).unwrap();
    let b = march(&w, &spec(DiffusionKind::Constant(1.0), 6.0)).unwrap();
    for (i, j) in nodes(w.lattice()) {
        assert!((a.at(i, j).unwrap() - b.at(i, j).unwrap()).abs() < 1e-13);
    }
}

#[test]
fn a_mass_only_influences_its_forward_cone() {
    let lattice = DiamondLatticeSpec::new(8, 6).unwrap();
    let info = SeedInfo::new(RngStream::new(0, 0), BackendTag::Exact);
    let base = DiamondField::zeros(lattice, hp(0.7), info);
    let mut bumped = base.clone();
    let (i0, j0) = (1, 2);
    bumped.set_mass(i0, j0, 1.0).unwrap();
    let d = spec(DiffusionKind::Affine { a: 1.0, b: 0.5 }, 1.0);
    let v0 = march(&base, &d).unwrap();
    let v1 = march(&bumped, &d).unwrap();
    for (i, j) in nodes(&lattice) {
        let changed = v0.at(i, j).unwrap() != v1.at(i, j).unwrap();
        assert_eq!(changed, i > i0 && j > j0, "node ({i}, {j})");
    }
}

#[test]
fn affine_blowup_is_reported() {
    let w = noise(16, 0.5, 7);
    let r = march(&w, &spec(DiffusionKind::Affine { a: 1.0, b: 1.0 }, 1e300));
    assert!(matches!(r, Err(Error::NumericalBlowup { .. })));
}

#[test]
fn restriction_samples_the_unit_square() {
    let w = noise(12, 0.5, 8);
    let v = march(&w, &DiffusionSpec::LINEAR).unwrap();
    let g = restrict(&v, 4).unwrap();
    assert_eq!(g.dim(), (5, 5));
    assert_eq!(g[[2, 3]], v.at(6, 9).unwrap());
    assert_eq!(g[[0, 0]], 0.0);
    assert!(restrict(&v, 5).is_err());
    let narrow =
        sample_diamonds_exact(&DiamondLatticeSpec::new(12, 6).unwrap(), hp(0.5), RngStream::new(0, 0)).unwrap();
    assert!(restrict(&march(&narrow, &DiffusionSpec::LINEAR).unwrap(), 4).is_err());
}

#[test]
fn linear_solution_variance_matches_the_light_cone() {
    let n = 16;
    let reps = 6000;
    let (i, j) = (10, 6);
    let h = 1.0 / n as f64;
    let (t, x) = to_original(i as f64 * h, j as f64 * h);
    for hv in [0.5, 0.8] {
        let lattice = DiamondLatticeSpec::cone(n).unwrap();
        let sampler = stochwave::noise::ExactSampler::new(lattice, hp(hv)).unwrap();
        let values: Vec<f64> = (0..reps)
            .map(|r| {
                march(&sampler.sample(RngStream::new(21, r)), &DiffusionSpec::LINEAR)
                    .unwrap()
                    .at(i, j)
                    .unwrap()
            })
            .collect();
        let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
        let mean = sq.iter().sum::<f64>() / reps as f64;
        let sd = (sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        let cone = || Shape {
            t0: 0.0,
            t1: t,
            kinks: vec![],
            left: Box::new(move |s| x - (t - s)),
            right: Box::new(move |s| x + (t - s)),
        };
        let target = 0.25 * region_covariance_oracle(&cone(), &cone(), hv);
        if hv == 0.5 {
            assert!((target - 0.25 * t * t).abs() < 1e-12);
        }
        let z = (mean - target) / (sd / (reps as f64).sqrt());
        assert!(z.abs() < 4.0, "H={hv}: mean {mean} target {target} z {z}");
    }
}

#[test]
fn csv_lists_nodes_in_both_coordinate_systems() {
    let w = noise(2, 0.5, 9);
    let v = march(&w, &spec(DiffusionKind::OnePlusSin, 1.0)).unwrap();
    let mut buf = Vec::new();
    v.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# N_sim=2 H=0.5 F=one_plus_sin theta=1 seed=9 stream=0 backend=exact"));
    assert_eq!(lines.next().unwrap(), "i,j,tau,lambda,t,x,value");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), nodes(w.lattice()).len());
}

#[test]
fn diffusion_spec_rejects_negative_theta() {
    assert!(DiffusionSpec::new(DiffusionKind::OnePlusSin, -1.0).is_err());
    assert_eq!(
        "affine(1, -2)".parse::<DiffusionKind>().unwrap(),
        DiffusionKind::Affine { a: 1.0, b: -2.0 }
    );
    assert!("sin".parse::<DiffusionKind>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear_solution_is_linear_in_the_noise(seed in 0u64..1000, c in -3.0f64..3.0) {
        let w = noise(8, 0.75, seed);
        let a = march(&w, &DiffusionSpec::LINEAR).unwrap();
        let b = march(&w.scaled(c), &DiffusionSpec::LINEAR).unwrap();
        for (i, j) in nodes(w.lattice()) {
            prop_assert!((b.at(i, j).unwrap() - c * a.at(i, j).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_fields_have_exact_mixed_differences(a in -2.0f64..2.0, b in -2.0f64..2.0, i in 0i64..6, j in 0i64..6, k in 1i64..3) {
        let lattice = DiamondLatticeSpec::new(8, 8).unwrap();
        let info = SeedInfo::new(RngStream::new(0, 0), BackendTag::Exact);
        let f = LatticeField::from_fn(lattice, hp(0.5), info, |tau, lambda| a * tau * lambda + b * tau + lambda * lambda);
        let h = lattice.h();
        let d = f.rect_increment(i, j, k, k).unwrap();
        prop_assert!((d - a * (k as f64 * h).powi(2)).abs() < 1e-12);
    }
}
