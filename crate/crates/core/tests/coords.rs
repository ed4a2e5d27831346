use oscispec_core::coords::{q0_from_tau, recover_b, tau, trace_defects_sweep, TailModel};
use oscispec_core::{Boundary, Potential, Spectrum};

fn gaussian() -> Potential {
    Potential::gaussian(0.3, 1.0)
}

#[test]
fn boundary_parameter_is_recovered() {
    let q = Potential::zero();
    for b in [0.5, -0.5] {
        let data = Spectrum::new(&q, Boundary::robin(b)).spectral_data(48).unwrap();
        let got = recover_b(&data).unwrap();
        eprintln!("b = {b}: recovered {got}");
        assert!((got - b).abs() < 5e-2 * b.abs());
    }
}

#[test]
fn free_robin_terms_vanish() {
    let q = Potential::zero();
    let data = Spectrum::new(&q, Boundary::robin(0.0)).spectral_data(10).unwrap();
    for t in oscispec_core::coords::b_terms(&data).unwrap() {
        assert!(t.abs() < 1e-7, "{t}");
    }
    let b = recover_b(&data).unwrap();
    assert!(b.abs() < 1e-6);
}

#[test]
fn robin_tail_coefficient_of_b() {
    let q = Potential::zero();
    let b = 0.1;
    let sp = Spectrum::new(&q, Boundary::robin(b));
    let n = 60;
    let mu = sp.eigenvalue(n).unwrap() - sp.lambda0(n);
    let coefficient = mu * std::f64::consts::PI * sp.lambda0(n).sqrt() / b;
    eprintln!("μ·π√λ⁰/b = {coefficient}");
    assert!((coefficient - 4.0).abs() < 0.05);
    let model = TailModel { v: 0.0, b: Some(b) };
    assert!((model.mu(n) / mu - 1.0).abs() < 1e-2);
}

#[test]
fn trace_defects_flatten() {
    let sweep = trace_defects_sweep(&Potential::zero(), 0.5, 64).unwrap();
    let last = sweep.last().unwrap();
    eprintln!("robin defect at 64: {}", last.robin_defect);
    assert!(last.robin_defect.abs() < 2e-2);

    let sweep = trace_defects_sweep(&gaussian(), 0.0, 64).unwrap();
    let last = sweep.last().unwrap();
    let mid = &sweep[15];
    eprintln!("gaussian defects: {mid:?} {last:?}");
    assert!(last.dirichlet_defect.abs() < 1e-2 && last.neumann_defect.abs() < 1e-2);
    assert!(last.dirichlet_defect.abs() <= mid.dirichlet_defect.abs());
    assert!(last.neumann_defect.abs() <= mid.neumann_defect.abs());
}

#[test]
fn q0_from_matched_spectra() {
    let estimate = |q: &Potential| {
        let d = Spectrum::new(q, Boundary::Dirichlet).eigenvalues(32).unwrap();
        let nn = Spectrum::new(q, Boundary::robin(0.0)).eigenvalues(32).unwrap();
        let mu_d: Vec<f64> = d.iter().enumerate().map(|(n, l)| l - (4 * n + 3) as f64).collect();
        let mu_n: Vec<f64> = nn.iter().enumerate().map(|(n, l)| l - (4 * n + 1) as f64).collect();
        q0_from_tau(&tau(&mu_n, &mu_d).unwrap(), &TailModel::new(q, Boundary::Dirichlet))
    };
    assert!(estimate(&Potential::zero()).abs() < 1e-9);
    let got = estimate(&gaussian());
    eprintln!("q(0) estimate {got}");
    assert!((got - 0.3).abs() < 5e-2);
    // the odd part in the amplitude is second order
    let odd = |eps: f64| estimate(&Potential::gaussian(eps, 1.0)) + estimate(&Potential::gaussian(-eps, 1.0));
    let (a, b) = (odd(0.2), odd(0.1));
    eprintln!("odd parts {a} {b}");
    assert!((a / b).log2() >= 1.9);
}
