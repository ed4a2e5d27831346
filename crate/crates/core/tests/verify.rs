use oscispec_core::verify::{self, Suite};
use oscispec_core::Potential;

fn show(r: &verify::Report) {
    for c in &r.checks {
        eprintln!("{:<34} {:>12.3e} {:>12.3e} {:>9.1e} {}", c.name, c.value, c.expected, c.tol, c.pass);
    }
}

#[test]
fn suites_pass_on_the_gaussian() {
    let q = Potential::gaussian(0.3, 1.0);
    for suite in [Suite::Gradients, Suite::Hardy, Suite::Darboux] {
        let r = verify::run(&q, 0.4, suite, 64).unwrap();
        show(&r);
        assert!(r.all_pass());
    }
}

#[test]
fn free_problem_passes_everything() {
    let r = verify::run(&Potential::zero(), 0.0, Suite::All, 16).unwrap();
    show(&r);
    assert!(r.all_pass());
}

#[test]
fn trace_suite_on_the_gaussian() {
    let r = verify::run(&Potential::gaussian(0.3, 1.0), 0.5, Suite::Traces, 48).unwrap();
    show(&r);
    assert!(r.all_pass());
}
