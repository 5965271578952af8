//! Dormand-Prince 5(4) integrator for linear complex systems `y' = f(t, y)`,
//! with adaptive steps and 4th-order dense output.

use num_complex::Complex64 as C64;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest allowed step; defaults to the interval length.
    pub h_max: Option<f64>,
}

impl Dopri5Options {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 5_000_000,
            h_max: None,
        }
    }
}

/// Result of [`dopri5`].
#[derive(Debug, Clone)]
pub struct Dopri5Output {
    /// States at the requested sample times, in order.
    pub samples: Vec<Vec<C64>>,
    pub final_state: Vec<C64>,
    pub accepted: usize,
    pub rejected: usize,
}

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`, returning the state at
/// every time in `sample_times` (ascending, inside `[t0, t1]`) by dense
/// output. `f` writes the derivative into its third argument.
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[C64],
    sample_times: &[f64],
    opts: &Dopri5Options,
) -> Result<Dopri5Output>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Validation(format!(
            "integration interval [{t0}, {t1}] is empty or not finite"
        )));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.iter().any(|&t| t < t0 || t > t1) {
        return Err(Error::Validation(
            "sample times must be ascending and inside the interval".into(),
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Validation("tolerances must be positive".into()));
    }

    let n = y0.len();
    let zero = C64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut y_new = vec![zero; n];
    let mut stage = vec![zero; n];
    let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![zero; n]);
    let mut cont: [Vec<C64>; 5] = std::array::from_fn(|_| vec![zero; n]);

    let span = t1 - t0;
    let h_max = opts.h_max.unwrap_or(span).min(span);
    let mut t = t0;
    f(t, &y, &mut k[0]);
    let mut h = initial_step(&mut f, t, &y, &k[0], opts, h_max);

    let mut samples = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        samples.push(y.clone());
        next_sample += 1;
    }

    let (mut accepted, mut rejected) = (0, 0);
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let beta = 0.04;
    let expo = 0.2 - beta * 0.75;

    while t < t1 {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure { time: t, step: h });
        }
        let last = t + 1.01 * h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure { time: t, step: h });
        }

        let [k1, k2, k3, k4, k5, k6, k7] = &mut k;
        combine(&mut stage, &y, h, &[(A21, k1)]);
        f(t + C2 * h, &stage, k2);
        combine(&mut stage, &y, h, &[(A31, k1), (A32, k2)]);
        f(t + C3 * h, &stage, k3);
        combine(&mut stage, &y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        f(t + C4 * h, &stage, k4);
        combine(&mut stage, &y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        f(t + C5 * h, &stage, k5);
        combine(
            &mut stage,
            &y,
            h,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
        );
        let t_new = if last { t1 } else { t + h };
        f(t_new, &stage, k6);
        combine(
            &mut y_new,
            &y,
            h,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        );
        f(t_new, &y_new, k7);

        let mut err = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();

        // Lund-stabilised controller.
        let fac11 = err.powf(expo);
        let fac = (fac11 / err_old.powf(beta) / 0.9).clamp(0.1, 5.0);
        let mut h_next = h / fac;

        if err <= 1.0 {
            err_old = err.max(1e-4);
            accepted += 1;
            let [c0, c1, c2, c3, c4] = &mut cont;
            for i in 0..n {
                let ydiff = y_new[i] - y[i];
                let bspl = k1[i] * h - ydiff;
                c0[i] = y[i];
                c1[i] = ydiff;
                c2[i] = bspl;
                c3[i] = ydiff - k7[i] * h - bspl;
                c4[i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
            }
            while next_sample < sample_times.len() && (sample_times[next_sample] <= t_new) {
                let ts = sample_times[next_sample];
                if ts >= t1 {
                    samples.push(y_new.clone());
                } else {
                    let s = (ts - t) / h;
                    let s1 = 1.0 - s;
                    samples.push(
                        (0..n)
                            .map(|i| c0[i] + (c1[i] + (c2[i] + (c3[i] + c4[i] * s1) * s) * s1) * s)
                            .collect(),
                    );
                }
                next_sample += 1;
            }
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(k1, k7);
            t = t_new;
            if last_rejected {
                h_next = h_next.min(h);
            }
            last_rejected = false;
        } else {
            rejected += 1;
            last_rejected = true;
            h_next = h / (fac11 / 0.9).min(5.0);
        }
        h = h_next.min(h_max);
    }

    while samples.len() < sample_times.len() {
        samples.push(y.clone());
    }
    Ok(Dopri5Output {
        samples,
        final_state: y,
        accepted,
        rejected,
    })
}

fn initial_step<F>(f: &mut F, t: f64, y: &[C64], f0: &[C64], opts: &Dopri5Options, h_max: f64) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len().max(1) as f64;
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
    let rms = |v: &[C64]| (v.iter().zip(&sc).map(|(x, s)| (x.norm() / s).powi(2)).sum::<f64>() / n).sqrt();
    let d0 = rms(y);
    let d1 = rms(f0);
    let mut h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(h_max);
    let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * h).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y.len()];
    f(t + h, &y1, &mut f1);
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (1e-6_f64).max(h * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h).min(h1).min(h_max)
}
