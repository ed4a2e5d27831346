use oscispec_core::darboux::dirichlet_flow;
use oscispec_core::inverse::{forward_map, jacobian_check, reconstruct, InverseConfig, InverseProblem};
use oscispec_core::{Boundary, Potential};

const N: usize = 8;

fn l2_error(a: &Potential, b: &Potential) -> f64 {
    let h = 1e-3;
    ((0..6000).map(|i| (a.eval(i as f64 * h) - b.eval(i as f64 * h)).powi(2)).sum::<f64>() * h).sqrt()
}

fn gaussian() -> Potential {
    Potential::gaussian(0.3, 1.0)
}

#[test]
fn free_data() {
    let d = forward_map(&Potential::zero(), Boundary::Dirichlet, N).unwrap();
    assert!(d.entries.iter().all(|e| e.mu.abs() < 1e-9 && e.r.abs() < 1e-7));
    assert_eq!(d.q0, Some(0.0));
    let rec = reconstruct(&InverseProblem { target: d, config: InverseConfig::default() }).unwrap();
    assert!(rec.converged && rec.iterations <= 2);
    assert!(rec.coeffs.iter().all(|c| c.abs() < 1e-8));

    let b = 0.3;
    let d = forward_map(&Potential::zero(), Boundary::robin(b), N).unwrap();
    assert!((d.q0_minus_2b2.unwrap() + 2.0 * b * b).abs() < 1e-15);
    let rec = reconstruct(&InverseProblem { target: d, config: InverseConfig::default() }).unwrap();
    assert!(rec.converged);
    assert!((rec.b.unwrap() - b).abs() < 1e-6);
}

#[test]
fn darboux_equivariance() {
    let q = gaussian();
    let base = forward_map(&q, Boundary::Dirichlet, 6).unwrap();
    let flowed = forward_map(&dirichlet_flow(&q, 2, 0.3).unwrap().q_new, Boundary::Dirichlet, 6).unwrap();
    for (m, (a, b)) in base.entries.iter().zip(&flowed.entries).enumerate() {
        let shift = if m == 2 { 0.3 } else { 0.0 };
        assert!((b.mu - a.mu).abs() < 1e-7);
        assert!((b.r - a.r - shift).abs() < 1e-6, "m={m}: {}", b.r - a.r);
    }
}

#[test]
fn jacobian_matches_differences() {
    let target = forward_map(&gaussian(), Boundary::Dirichlet, N).unwrap();
    let mut coeffs = vec![0.0; 12];
    coeffs[0] = 0.25;
    coeffs[1] = 0.05;
    for (analytic, fd) in jacobian_check(&target, &coeffs, None, &[0, 3, 7], 1e-4).unwrap() {
        let scale = fd.norm();
        assert!((&analytic - &fd).norm() < 1e-4 * scale, "{} vs {}", analytic, fd);
    }
    let target = forward_map(&gaussian(), Boundary::robin(0.4), N).unwrap();
    for (analytic, fd) in jacobian_check(&target, &coeffs, Some(0.3), &[0, 12], 1e-4).unwrap() {
        assert!((&analytic - &fd).norm() < 1e-4 * fd.norm());
    }
}

#[test]
fn dirichlet_round_trip() {
    let q = gaussian();
    let target = forward_map(&q, Boundary::Dirichlet, N).unwrap();
    let rec = reconstruct(&InverseProblem { target, config: InverseConfig::default() }).unwrap();
    eprintln!("{:?}", rec.residual_history);
    assert!(rec.converged && rec.iterations <= 25);
    assert!(rec.residual_history.windows(2).all(|w| w[1] <= w[0]));
    let err = l2_error(&rec.q, &q);
    eprintln!("L2 error {err}");
    assert!(err < 1e-3);
}

#[test]
fn robin_round_trip() {
    let q = gaussian();
    let target = forward_map(&q, Boundary::robin(0.4), N).unwrap();
    let rec = reconstruct(&InverseProblem { target, config: InverseConfig::default() }).unwrap();
    eprintln!("{:?} b = {:?}", rec.residual_history, rec.b);
    assert!(rec.converged && rec.iterations <= 25);
    assert!((rec.b.unwrap() - 0.4).abs() < 1e-3);
    assert!(l2_error(&rec.q, &q) < 1e-3);
}

#[test]
fn isospectral_direction() {
    use oscispec_core::Spectrum;
    let q = gaussian();
    let n = 1;
    let ef = Spectrum::new(&q, Boundary::Dirichlet).eigenfunction(n).unwrap();
    let h = ef.psi.h;
    let mut v: Vec<f64> = ef.psi.y.iter().zip(&ef.psi.dy).map(|(p, d)| 4.0 * p * d).collect();
    v.extend(std::iter::repeat_n(0.0, 4));
    let v = Potential::grid(h, v).unwrap();
    let eps = 1e-3;
    let base = forward_map(&q, Boundary::Dirichlet, 4).unwrap();
    let moved = forward_map(&Potential::combination(vec![(1.0, q.clone()), (eps, v)]), Boundary::Dirichlet, 4).unwrap();
    for m in 0..4 {
        let (a, b) = (&base.entries[m], &moved.entries[m]);
        assert!((b.mu - a.mu).abs() < 1e-5, "μ m={m}");
        let expect = if m == n { eps } else { 0.0 };
        assert!((b.r - a.r - expect).abs() < 0.05 * eps, "r m={m}: {}", b.r - a.r);
    }
}
