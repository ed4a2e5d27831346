//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! Besides plain adaptive stepping it can record the accepted mesh and
//! replay it later, so that difference quotients in a parameter see a
//! discretisation error that varies smoothly with that parameter.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// How step sizes are chosen.
pub enum Mesh<'a> {
    /// Error-controlled steps; the accepted abscissae are appended to the vector if given.
    Adaptive(Option<&'a mut Vec<f64>>),
    /// Step exactly through the given abscissae (a previously recorded mesh).
    Replay(&'a [f64]),
}

/// State handed to the observer after each accepted step.
pub struct Step<'a, const D: usize> {
    pub x: f64,
    pub y: &'a mut [f64; D],
    /// Index into the stop list when the step landed on a stop.
    pub stop: Option<usize>,
}

/// Dormand–Prince 5(4) with FSAL and standard step-size control.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-11, atol: 1e-12, h_init: 1e-2, h_max: 0.25, max_steps: 2_000_000 }
    }
}

impl Dopri5 {
    /// Tight tolerances used throughout the toolkit.
    pub fn precise() -> Self {
        Self::default()
    }

    /// Integrate from `x0` through the monotone list `stops`, returning the state at the last stop.
    ///
    /// The observer may rescale the state; it must return `true` when it did.
    pub fn integrate<const D: usize>(
        &self,
        rhs: &dyn Fn(f64, &[f64; D]) -> [f64; D],
        x0: f64,
        y0: [f64; D],
        stops: &[f64],
        mesh: Mesh<'_>,
        observer: &mut dyn FnMut(Step<'_, D>) -> bool,
    ) -> Result<[f64; D]> {
        let Some(&x_end) = stops.last() else {
            return Ok(y0);
        };
        let dir = if x_end >= x0 { 1.0 } else { -1.0 };
        let mut x = x0;
        let mut y = y0;
        let mut k1 = rhs(x, &y);
        match mesh {
            Mesh::Replay(points) => {
                let mut stop_idx = 0;
                for &xn in points {
                    let h = xn - x;
                    let (y5, _, k7) = self.stage(rhs, x, &y, &k1, h);
                    x = xn;
                    y = y5;
                    k1 = k7;
                    let mut stop = None;
                    while stop_idx < stops.len() && stops[stop_idx] == xn {
                        stop = Some(stop_idx);
                        stop_idx += 1;
                    }
                    if observer(Step { x, y: &mut y, stop }) {
                        k1 = rhs(x, &y);
                    }
                    check_finite(x, &y)?;
                }
                Ok(y)
            }
            Mesh::Adaptive(mut record) => {
                let mut h = dir * self.h_init.min(self.h_max).min((x_end - x0).abs().max(1e-300));
                let mut steps = 0usize;
                for (idx, &target) in stops.iter().enumerate() {
                    if (target - x) * dir < 0.0 {
                        return Err(Error::input("stop list is not monotone"));
                    }
                    while (target - x) * dir > 0.0 {
                        steps += 1;
                        if steps > self.max_steps {
                            return Err(Error::Integration {
                                x,
                                reason: "step budget exhausted".into(),
                            });
                        }
                        let proposal = h;
                        let mut hitting = false;
                        if (x + h - target) * dir >= 0.0 {
                            h = target - x;
                            hitting = true;
                        }
                        let (y5, err, k7) = self.stage(rhs, x, &y, &k1, h);
                        let mut scale = 0.0f64;
                        for i in 0..D {
                            let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                            scale = scale.max((err[i] / sc).abs());
                        }
                        if !scale.is_finite() {
                            h *= 0.25;
                            if h.abs() < 1e-14 * (1.0 + x.abs()) {
                                return Err(Error::Integration {
                                    x,
                                    reason: "non-finite derivative".into(),
                                });
                            }
                            continue;
                        }
                        if scale <= 1.0 {
                            x = if hitting { target } else { x + h };
                            y = y5;
                            k1 = k7;
                            if let Some(rec) = record.as_deref_mut() {
                                rec.push(x);
                            }
                            let stop = if hitting { Some(idx) } else { None };
                            if observer(Step { x, y: &mut y, stop }) {
                                k1 = rhs(x, &y);
                            }
                            check_finite(x, &y)?;
                            let fac = if scale == 0.0 { 5.0 } else { (0.9 * scale.powf(-0.2)).clamp(0.2, 5.0) };
                            let grown = (h.abs() * fac).min(self.h_max);
                            h = dir * if hitting { grown.max(proposal.abs()) } else { grown };
                        } else {
                            let fac = (0.9 * scale.powf(-0.2)).clamp(0.1, 0.9);
                            h *= fac;
                            if h.abs() < 1e-14 * (1.0 + x.abs()) {
                                return Err(Error::Integration { x, reason: "step size underflow".into() });
                            }
                        }
                    }
                }
                Ok(y)
            }
        }
    }

    #[inline]
    fn stage<const D: usize>(
        &self,
        rhs: &dyn Fn(f64, &[f64; D]) -> [f64; D],
        x: f64,
        y: &[f64; D],
        k1: &[f64; D],
        h: f64,
    ) -> ([f64; D], [f64; D], [f64; D]) {
        let mut t = [0.0; D];
        for i in 0..D {
            t[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = rhs(x + C2 * h, &t);
        for i in 0..D {
            t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = rhs(x + C3 * h, &t);
        for i in 0..D {
            t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = rhs(x + C4 * h, &t);
        for i in 0..D {
            t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = rhs(x + C5 * h, &t);
        for i in 0..D {
            t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = rhs(x + h, &t);
        let mut y5 = [0.0; D];
        for i in 0..D {
            y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = rhs(x + h, &y5);
        let mut err = [0.0; D];
        for i in 0..D {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        (y5, err, k7)
    }
}

fn check_finite<const D: usize>(x: f64, y: &[f64; D]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration { x, reason: "solution left the f64 range".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        let rhs = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = Dopri5::precise()
            .integrate(&rhs, 0.0, [0.0, 1.0], &[20.0], Mesh::Adaptive(None), &mut |_| false)
            .unwrap();
        assert!((y[0] - 20f64.sin()).abs() < 1e-9);
        assert!((y[1] - 20f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn backward_and_stops() {
        let rhs = |_x: f64, y: &[f64; 1]| [y[0]];
        let mut seen = Vec::new();
        let y = Dopri5::precise()
            .integrate(&rhs, 1.0, [1.0], &[0.5, 0.25, 0.0], Mesh::Adaptive(None), &mut |s| {
                if let Some(i) = s.stop {
                    seen.push((i, s.x, s.y[0]));
                }
                false
            })
            .unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-11);
        assert_eq!(seen.len(), 3);
        assert_eq!(seen[1].1, 0.25);
        assert!((seen[1].2 - (-0.75f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn replay_reproduces_adaptive_result() {
        let rhs = |x: f64, y: &[f64; 2]| [y[1], (x * x - 5.0) * y[0]];
        let mut mesh = Vec::new();
        let solver = Dopri5::precise();
        let a = solver
            .integrate(&rhs, 0.0, [1.0, 0.0], &[3.0], Mesh::Adaptive(Some(&mut mesh)), &mut |_| false)
            .unwrap();
        let b = solver.integrate(&rhs, 0.0, [1.0, 0.0], &[3.0], Mesh::Replay(&mesh), &mut |_| false).unwrap();
        for i in 0..2 {
            assert!((a[i] - b[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn rescaling_observer_is_consistent() {
        let rhs = |_x: f64, y: &[f64; 1]| [3.0 * y[0]];
        let mut ln_scale = 0.0;
        let y = Dopri5::precise()
            .integrate(&rhs, 0.0, [1.0], &[40.0], Mesh::Adaptive(None), &mut |s| {
                if s.y[0].abs() > 1e3 {
                    ln_scale += s.y[0].abs().ln();
                    s.y[0] = s.y[0].signum();
                    true
                } else {
                    false
                }
            })
            .unwrap();
        let total = y[0].ln() + ln_scale;
        assert!((total - 120.0).abs() < 1e-8);
    }
}
