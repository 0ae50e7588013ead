//! Dormand-Prince 5(4) for complex second-order linear equations written as
//! first-order pairs.

use num_complex::Complex64;

use crate::{Error, Result};

pub type State = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub max_steps: usize,
    /// Rescale the state when its norm leaves `[1/limit, limit]`.
    pub rescale_limit: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            max_steps: 1_000_000,
            rescale_limit: 1e100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOutcome {
    /// Final state divided by `exp(log_scale)`.
    pub state: State,
    /// Sum of the logarithms of all rescaling factors.
    pub log_scale: f64,
    pub steps: usize,
    pub rejected: usize,
}

fn norm(y: &State) -> f64 {
    (y[0].norm_sqr() + y[1].norm_sqr()).sqrt()
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

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
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction). The state
/// is renormalised whenever it grows or shrinks past the rescale limit, so
/// only its direction is meaningful for linear problems.
pub fn integrate<F>(f: F, x0: f64, x1: f64, y0: State, options: &OdeOptions) -> Result<OdeOutcome>
where
    F: Fn(f64, &State) -> Result<State>,
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(OdeOutcome {
            state: y0,
            log_scale: 0.0,
            steps: 0,
            rejected: 0,
        });
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = span.abs() / 100.0;
    let mut k1 = f(x, &y)?;
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut log_scale = 0.0;
    let min_step = 1e-14 * span.abs().max(x0.abs()).max(x1.abs());

    while (x1 - x) * dir > 0.0 {
        if steps + rejected >= options.max_steps {
            return Err(Error::Integration {
                x,
                message: format!("step budget {} exhausted", options.max_steps),
            });
        }
        let hs = dir * h.min((x1 - x).abs());
        let k2 = f(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
        let k3 = f(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(
            x + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            x + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let x_new = if (x1 - (x + hs)) * dir <= 0.0 { x1 } else { x + hs };
        let k7 = f(x_new, &y_new)?;
        let err = axpy(
            &[Complex64::new(0.0, 0.0); 2],
            hs,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let scale = options.rtol * norm(&y).max(norm(&y_new));
        let ratio = norm(&err) / scale;
        if !ratio.is_finite() {
            return Err(Error::Integration {
                x,
                message: "non-finite error estimate".into(),
            });
        }
        if ratio <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            steps += 1;
            let size = norm(&y);
            if size > options.rescale_limit || size < 1.0 / options.rescale_limit {
                if size == 0.0 || !size.is_finite() {
                    return Err(Error::Integration {
                        x,
                        message: format!("cannot rescale state of size {size:e}"),
                    });
                }
                y = [y[0] / size, y[1] / size];
                log_scale += size.ln();
                k1 = [k1[0] / size, k1[1] / size];
            }
        } else {
            rejected += 1;
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (hs.abs() * factor).max(min_step);
        if h <= min_step && ratio > 1.0 {
            return Err(Error::Integration {
                x,
                message: "step size underflow".into(),
            });
        }
    }
    Ok(OdeOutcome {
        state: y,
        log_scale,
        steps,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_oscillation() {
        let i = Complex64::new(0.0, 1.0);
        // y'' = -y from (0, 1): y = sin x
        let out = integrate(
            |_, y| Ok([y[1], -y[0]]),
            0.0,
            10.0,
            [0.0.into(), 1.0.into()],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((out.state[0] - Complex64::from(10f64.sin())).norm() < 1e-8);

        // y'' = -(i)^2 y backwards, y = exp(i x)
        let out = integrate(
            |_, y| Ok([y[1], -y[0]]),
            2.0,
            -1.0,
            [(2.0 * i).exp(), i * (2.0 * i).exp()],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((out.state[0] - (-i).exp()).norm() < 1e-8);
    }

    #[test]
    fn growth_is_rescaled() {
        let out = integrate(
            |_, y| Ok([y[1], 400.0 * y[0]]),
            0.0,
            20.0,
            [1.0.into(), 20.0.into()],
            &OdeOptions::default(),
        )
        .unwrap();
        let s = out.state;
        assert!(norm(&s).is_finite() && norm(&s) < 1e101);
        assert!((s[1] / s[0] - Complex64::from(20.0)).norm() < 1e-6);
    }
}
