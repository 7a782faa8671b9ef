use num_complex::Complex64;
use pencil_core::formats::*;
use pencil_core::spectral::{find_eigenvalues, SpectralOptions};
use pencil_core::weyl::WeylSample;
use pencil_core::{fixtures, MeshHint, Shooter};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
    ]
}

fn sample() -> impl Strategy<Value = WeylSample> {
    (finite(), finite(), finite(), finite(), prop_oneof![0.0f64..10.0, Just(f64::INFINITY)]).prop_map(
        |(a, b, c, d, e)| WeylSample {
            lambda: Complex64::new(a, b),
            m: Complex64::new(c, d),
            pole_distance: e,
        },
    )
}

proptest! {
    #[test]
    fn weyl_csv_is_lossless(samples in proptest::collection::vec(sample(), 0..20)) {
        let mut buf = Vec::new();
        write_weyl_samples(&mut buf, &samples).unwrap();
        let back = read_weyl_samples(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), samples.len());
        for (a, b) in back.iter().zip(&samples) {
            prop_assert_eq!(a.lambda.re.to_bits(), b.lambda.re.to_bits());
            prop_assert_eq!(a.m.im.to_bits(), b.m.im.to_bits());
            prop_assert_eq!(a.pole_distance, b.pole_distance);
        }
    }

    #[test]
    fn printed_numbers_parse_back(v in finite()) {
        prop_assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn grid_parser_never_panics(s in ".{0,24}") {
        let _ = parse_grid(&s);
    }

    #[test]
    fn problem_parser_never_panics(s in ".{0,64}") {
        let _ = parse_problem(&s, false);
    }

    #[test]
    fn valid_grids_round_trip(re0 in -50.0f64..50.0, re1 in -50.0f64..50.0, n in 1usize..500, im in -2.0f64..2.0) {
        let g = parse_grid(&format!("{}:{}:{},{}", num(re0), num(re1), n, num(im))).unwrap();
        prop_assert_eq!(g, GridSpec { re0, re1, n, im });
    }
}

#[test]
fn fixtures_survive_json() {
    for (id, p) in fixtures::all() {
        let back = parse_problem(&problem_to_json(&p), p.allow_identity).unwrap();
        assert_eq!(back, p, "{id}");
    }
}

#[test]
fn eig_table_shape() {
    let p = fixtures::jump_fixture();
    let s = find_eigenvalues(&p, 4.0, &SpectralOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_eigen_records(&mut buf, &s.records).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], EIG_HEADER.join(","));
    assert_eq!(lines.len(), s.records.len() + 1);
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), EIG_HEADER.len());
    }
    let im: f64 = lines[1].split(',').nth(7).unwrap().parse().unwrap();
    assert_eq!(im, s.records[0].lambda_n.im);
}

#[test]
fn trace_table_marks_jump_sides() {
    let p = fixtures::jump_fixture();
    let tr = Shooter::new(&p)
        .unwrap()
        .solve_phi(Complex64::new(2.0, 0.0), &MeshHint::uniform(&p, 2))
        .unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &tr).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with(&TRACE_HEADER.join(",")));
    assert_eq!(text.lines().count(), tr.nodes.len() + 1);
    assert!(text.lines().any(|l| l.ends_with(",pre")));
    assert!(text.lines().any(|l| l.ends_with(",post")));
}
