use oscispec_core::darboux::{dirichlet_flow, robin_flow};
use oscispec_core::{Boundary, Potential, Spectrum};

const MODES: usize = 6;

fn data(q: &Potential, boundary: Boundary) -> (Vec<f64>, Vec<f64>) {
    let d = Spectrum::new(q, boundary).spectral_data(MODES).unwrap();
    (d.lambdas(), d.norming())
}

fn l2_distance(a: &Potential, b: &Potential) -> f64 {
    let h = 1e-3;
    ((0..8000).map(|i| (a.eval(i as f64 * h) - b.eval(i as f64 * h)).powi(2)).sum::<f64>() * h).sqrt()
}

#[test]
fn dirichlet_flow_shifts_one_norming_constant() {
    let q = Potential::gaussian(0.3, 1.0);
    let (l0, s0) = data(&q, Boundary::Dirichlet);
    let r = dirichlet_flow(&q, 1, 0.4).unwrap();
    assert!((r.q_new.eval(0.0) - q.eval(0.0)).abs() < 1e-8);
    let (l1, s1) = data(&r.q_new, Boundary::Dirichlet);
    for m in 0..MODES {
        assert!((l1[m] - l0[m]).abs() < 1e-7, "λ m={m}: {} vs {}", l1[m], l0[m]);
        let shift = if m == 1 { 0.4 } else { 0.0 };
        assert!((s1[m] - s0[m] - shift).abs() < 1e-6, "s m={m}: {}", s1[m] - s0[m]);
    }
}

#[test]
fn robin_flow_shifts_one_norming_constant() {
    let q = Potential::gaussian(0.3, 1.0);
    let b = 0.4;
    let (l0, s0) = data(&q, Boundary::robin(b));
    let r = robin_flow(&q, b, 2, -0.7).unwrap();
    let b_new = r.b_new.unwrap();
    let invariant = |q0: f64, b: f64| q0 - 2.0 * b * b;
    assert!((invariant(r.q_new.eval(0.0), b_new) - invariant(q.eval(0.0), b)).abs() < 1e-8);
    let (l1, s1) = data(&r.q_new, r.new_boundary());
    for m in 0..MODES {
        assert!((l1[m] - l0[m]).abs() < 1e-7, "λ m={m}");
        let shift = if m == 2 { -0.7 } else { 0.0 };
        assert!((s1[m] - s0[m] - shift).abs() < 1e-6, "s m={m}: {}", s1[m] - s0[m]);
    }
}

#[test]
fn flows_compose() {
    let q = Potential::gaussian(0.3, 1.0);
    let once = dirichlet_flow(&q, 0, 0.5).unwrap();
    let twice = dirichlet_flow(&dirichlet_flow(&q, 0, 0.2).unwrap().q_new, 0, 0.3).unwrap();
    let d = l2_distance(&once.q_new, &twice.q_new);
    assert!(d < 1e-7, "{d}");

    let once = robin_flow(&q, 0.1, 1, 0.6).unwrap();
    let first = robin_flow(&q, 0.1, 1, 0.25).unwrap();
    let twice = robin_flow(&first.q_new, first.b_new.unwrap(), 1, 0.35).unwrap();
    assert!(l2_distance(&once.q_new, &twice.q_new) < 1e-7);
    assert!((once.b_new.unwrap() - twice.b_new.unwrap()).abs() < 1e-8);
}

#[test]
fn transformed_potential_stays_in_the_space() {
    let q = Potential::gaussian(0.3, 1.0);
    let change = |q: &Potential, n: usize, t: f64| {
        let r = dirichlet_flow(q, n, t).unwrap();
        Potential::combination(vec![(1.0, r.q_new), (-1.0, q.clone())]).h_plus_norm()
    };
    for t in [-1.0, 1.0] {
        for n in [0, 4] {
            let (with_q, free) = (change(&q, n, t), change(&Potential::zero(), n, t));
            assert!(with_q.is_finite() && free > 0.0);
            let ratio = with_q / free;
            assert!(ratio > 0.1 && ratio < 10.0, "n={n} t={t}: {ratio}");
        }
    }
}
