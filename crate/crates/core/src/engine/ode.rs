//! Adaptive Dormand-Prince 5(4) integration of the vectorized master
//! equation. The state is kept in matrix form; the right-hand side is a
//! closure so callers can feed the sparse drift + jump kernels directly.
//!
//! Steps are clamped to land exactly on every requested output time, so no
//! dense-output interpolation is involved.

use crate::error::{Result, SqemError};
use ndarray::Array2;
use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 50_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

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
// b5 - b4 coefficients for the embedded error estimate
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lincomb(out: &mut Array2<C64>, y: &Array2<C64>, terms: &[(f64, &Array2<C64>)], h: f64) {
    let ys = y.as_slice().unwrap();
    let os = out.as_slice_mut().unwrap();
    os.copy_from_slice(ys);
    for &(c, k) in terms {
        let ks = k.as_slice().unwrap();
        let ch = C64::new(c * h, 0.0);
        for (o, kv) in os.iter_mut().zip(ks) {
            *o += ch * *kv;
        }
    }
}

/// Weighted RMS error norm per Hairer: `err_i / (atol + rtol * max(|y0_i|, |y1_i|))`.
fn error_norm(err: &Array2<C64>, y0: &Array2<C64>, y1: &Array2<C64>, opts: &OdeOptions) -> f64 {
    let es = err.as_slice().unwrap();
    let y0s = y0.as_slice().unwrap();
    let y1s = y1.as_slice().unwrap();
    let mut acc = 0.0;
    for ((e, a), b) in es.iter().zip(y0s).zip(y1s) {
        let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
        let r = e.norm() / sc;
        acc += r * r;
    }
    (acc / es.len() as f64).sqrt()
}

/// Integrates `y' = rhs(y)` collecting the state at each requested time.
/// `times` must be strictly increasing; the state at `times[0]` is `y0`.
pub fn integrate_dopri5<F>(
    rhs: F,
    y0: &Array2<C64>,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Array2<C64>>, OdeStats)>
where
    F: FnMut(&Array2<C64>, &mut Array2<C64>),
{
    let mut outputs = Vec::with_capacity(times.len());
    let stats = integrate_dopri5_cb(rhs, y0, times, opts, |_, y| {
        outputs.push(y.clone());
        Ok(())
    })?;
    Ok((outputs, stats))
}

/// Streaming variant: invokes `on_output(index, state)` at each requested
/// time instead of collecting states, keeping the adaptive step and the
/// first-same-as-last derivative alive across outputs.
pub fn integrate_dopri5_cb<F, G>(
    mut rhs: F,
    y0: &Array2<C64>,
    times: &[f64],
    opts: &OdeOptions,
    mut on_output: G,
) -> Result<OdeStats>
where
    F: FnMut(&Array2<C64>, &mut Array2<C64>),
    G: FnMut(usize, &Array2<C64>) -> Result<()>,
{
    if times.len() < 2 {
        return Err(SqemError::InvalidParameter("need at least two output times".into()));
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(SqemError::InvalidParameter("times must be strictly increasing".into()));
        }
    }
    let span = times[times.len() - 1] - times[0];
    let shape = (y0.nrows(), y0.ncols());
    let mut stats = OdeStats::default();

    let mut y = y0.clone();
    let mut k: Vec<Array2<C64>> = (0..7).map(|_| Array2::zeros(shape)).collect();
    let mut ytmp = Array2::zeros(shape);
    let mut yerr = Array2::zeros(shape);
    let zero: Array2<C64> = Array2::zeros(shape);

    rhs(&y, &mut k[0]);
    stats.rhs_evals += 1;

    // initial step h0 = 0.01 * |y|_sc / |f|_sc, clamped into the span
    let mut h = {
        let ks = k[0].as_slice().unwrap();
        let ys = y.as_slice().unwrap();
        let (mut d0, mut d1) = (0.0f64, 0.0f64);
        for (f, yv) in ks.iter().zip(ys) {
            let sc = opts.atol + opts.rtol * yv.norm();
            d0 += (yv.norm() / sc).powi(2);
            d1 += (f.norm() / sc).powi(2);
        }
        let est = if d0 > 0.0 && d1 > 0.0 { 0.01 * (d0 / d1).sqrt() } else { 0.1 * span };
        est.clamp(1e-6 * span, 0.1 * span)
    };

    let mut t = times[0];
    on_output(0, &y)?;

    let h_floor = 1e-14 * span.max(1.0);

    for (out_idx, &t_out) in times.iter().enumerate().skip(1) {
        while t < t_out {
            if stats.steps >= opts.max_steps {
                return Err(SqemError::Stiffness { t, h, steps: stats.steps });
            }
            if h < h_floor {
                return Err(SqemError::Stiffness { t, h, steps: stats.steps });
            }
            let h_step = h.min(t_out - t);

            lincomb(&mut ytmp, &y, &[(A21, &k[0])], h_step);
            let (k0_, rest) = k.split_at_mut(1);
            rhs(&ytmp, &mut rest[0]);
            lincomb(&mut ytmp, &y, &[(A31, &k0_[0]), (A32, &rest[0])], h_step);
            rhs(&ytmp, &mut rest[1]);
            lincomb(&mut ytmp, &y, &[(A41, &k0_[0]), (A42, &rest[0]), (A43, &rest[1])], h_step);
            rhs(&ytmp, &mut rest[2]);
            lincomb(
                &mut ytmp,
                &y,
                &[(A51, &k0_[0]), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
                h_step,
            );
            rhs(&ytmp, &mut rest[3]);
            lincomb(
                &mut ytmp,
                &y,
                &[
                    (A61, &k0_[0]),
                    (A62, &rest[0]),
                    (A63, &rest[1]),
                    (A64, &rest[2]),
                    (A65, &rest[3]),
                ],
                h_step,
            );
            rhs(&ytmp, &mut rest[4]);
            // 5th-order solution (also the 7th stage input)
            lincomb(
                &mut ytmp,
                &y,
                &[
                    (B1, &k0_[0]),
                    (B3, &rest[1]),
                    (B4, &rest[2]),
                    (B5, &rest[3]),
                    (B6, &rest[4]),
                ],
                h_step,
            );
            rhs(&ytmp, &mut rest[5]);
            stats.rhs_evals += 6;

            lincomb(
                &mut yerr,
                &zero,
                &[
                    (E1, &k0_[0]),
                    (E3, &rest[1]),
                    (E4, &rest[2]),
                    (E5, &rest[3]),
                    (E6, &rest[4]),
                    (E7, &rest[5]),
                ],
                h_step,
            );

            let err = error_norm(&yerr, &y, &ytmp, opts);
            if err <= 1.0 {
                t += h_step;
                std::mem::swap(&mut y, &mut ytmp);
                k.swap(0, 6); // FSAL
                stats.steps += 1;
            } else {
                stats.rejected += 1;
            }
            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h_step * factor).min(span);
        }
        on_output(out_idx, &y)?;
    }
    Ok(stats)
}
