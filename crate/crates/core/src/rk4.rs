//! Fixed-step classical Runge–Kutta integration.

/// One RK4 step of `y' = f(t, y)`.
pub fn step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates from `t = 0` to `t_end` with step `dt`, shortening the final
/// step so that `t_end` is hit exactly. `observe` sees the initial state and
/// every accepted step.
pub fn integrate<const N: usize, F, O>(f: F, y0: [f64; N], t_end: f64, dt: f64, mut observe: O) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]),
{
    let mut y = y0;
    observe(0.0, &y);
    if t_end <= 0.0 {
        return y;
    }
    let full = (t_end / dt).floor() as usize;
    for i in 0..full {
        let t = i as f64 * dt;
        y = step(&f, t, &y, dt);
        observe((i + 1) as f64 * dt, &y);
    }
    let t_done = full as f64 * dt;
    let rest = t_end - t_done;
    if rest > dt * 1e-9 {
        y = step(&f, t_done, &y, rest);
        observe(t_end, &y);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let err = |dt: f64| (integrate(f, [1.0], 1.0, dt, |_, _| {})[0] - (-1f64).exp()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn partial_final_step_lands_on_t_end() {
        let mut last = 0.0;
        integrate(|_t, _y: &[f64; 1]| [1.0], [0.0], 0.35, 0.1, |t, _| last = t);
        assert_eq!(last, 0.35);
    }
}
