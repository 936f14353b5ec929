//! Dormand–Prince 5(4) with quintic Hermite dense output and event location.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{taylor_solution, Jet3};

/// Right-hand side of an autonomous system, evaluated on jets so that the
/// dense output can recover exact higher derivatives at any point.
pub type Rhs = Arc<dyn Fn(&[Jet3]) -> Result<Vec<Jet3>> + Send + Sync>;

pub type EventFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 500_000;
const MIN_STEP: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// μ′ = 0; `simple` distinguishes a reflecting root of Φ from a double root.
    TurningPoint { simple: bool, mu: f64 },
    /// A terminal event function crossed zero; integration stopped here.
    Singular { quantity: String },
    /// The initial point is a double root of Φ; the solution is constant.
    Equilibrium { mu: f64 },
    StepLimit,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub s: f64,
    pub kind: EventKind,
}

/// An event function watched during integration.
#[derive(Clone)]
pub struct Watch {
    pub name: String,
    pub func: EventFn,
    pub terminal: bool,
}

impl Watch {
    pub fn terminal(name: &str, func: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Watch {
            name: name.to_string(),
            func: Arc::new(func),
            terminal: true,
        }
    }

    pub fn passive(name: &str, func: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Watch {
            name: name.to_string(),
            func: Arc::new(func),
            terminal: false,
        }
    }
}

/// Piecewise quintic interpolant of an ODE solution.
#[derive(Clone)]
pub struct DenseSolution {
    knots: Vec<f64>,
    states: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
    accels: Vec<Vec<f64>>,
    rhs: Rhs,
    events: Vec<Event>,
}

impl fmt::Debug for DenseSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseSolution")
            .field("domain", &self.domain())
            .field("knots", &self.knots.len())
            .field("events", &self.events)
            .finish_non_exhaustive()
    }
}

/// Raw output of a one-directional integration.
struct Trajectory {
    knots: Vec<f64>,
    states: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
    accels: Vec<Vec<f64>>,
    events: Vec<Event>,
}

fn eval_f64(rhs: &Rhs, y: &[f64]) -> Result<Vec<f64>> {
    let jets: Vec<Jet3> = y
        .iter()
        .map(|&v| Jet3::constant_with_order(1, 0, v))
        .collect();
    let out = rhs(&jets)?;
    let vals: Vec<f64> = out.iter().map(Jet3::value).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Ode(format!("non-finite right-hand side at {y:?}")));
    }
    Ok(vals)
}

/// y″ = (∂f/∂y)·f, from the rhs evaluated on the order-1 jet of the trajectory.
fn second_derivative(rhs: &Rhs, y: &[f64]) -> Result<Vec<f64>> {
    let f = eval_f64(rhs, y)?;
    let jets: Vec<Jet3> = y
        .iter()
        .zip(&f)
        .map(|(&v, &d)| Jet3::from_derivatives(1, 0, &[v, d]))
        .collect();
    Ok(rhs(&jets)?.iter().map(|j| j.univariate_derivative(1)).collect())
}

/// Quintic Hermite basis on θ ∈ [0, 1], evaluated on a jet so derivatives come for free.
fn hermite(
    theta: &Jet3,
    h: f64,
    p0: f64,
    d0: f64,
    s0: f64,
    p1: f64,
    d1: f64,
    s1: f64,
) -> Jet3 {
    let t2 = theta * theta;
    let t3 = &t2 * theta;
    let t4 = &t3 * theta;
    let t5 = &t4 * theta;
    let h0 = t3.scale(-10.0) + t4.scale(15.0) - t5.scale(6.0) + 1.0;
    let h1 = theta + &(t3.scale(-6.0) + t4.scale(8.0) - t5.scale(3.0));
    let h2 = (&t2 - &t3.scale(3.0) + t4.scale(3.0) - &t5).scale(0.5);
    let h3 = (&t3 - &t4.scale(2.0) + &t5).scale(0.5);
    let h4 = t3.scale(-4.0) + t4.scale(7.0) - t5.scale(3.0);
    let h5 = t3.scale(10.0) - t4.scale(15.0) + t5.scale(6.0);
    h0.scale(p0)
        + h1.scale(h * d0)
        + h2.scale(h * h * s0)
        + h3.scale(h * h * s1)
        + h4.scale(h * d1)
        + h5.scale(p1)
}

impl DenseSolution {
    /// A solution that stays at `state` over `span`.
    pub fn constant(state: Vec<f64>, span: (f64, f64), rhs: Rhs, events: Vec<Event>) -> Self {
        let zeros = vec![0.0; state.len()];
        DenseSolution {
            knots: vec![span.0, span.1],
            states: vec![state.clone(), state],
            rates: vec![zeros.clone(), zeros.clone()],
            accels: vec![zeros.clone(), zeros],
            rhs,
            events,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub(crate) fn events_mut(&mut self) -> &mut [Event] {
        &mut self.events
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn rhs(&self) -> &Rhs {
        &self.rhs
    }

    fn locate(&self, s: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (1.0 + s.abs());
        if !(s >= lo - slack && s <= hi + slack) {
            return Err(Error::domain(
                "dense output",
                format!("s = {s} outside integrated span [{lo}, {hi}]"),
            ));
        }
        let idx = self.knots.partition_point(|&k| k <= s);
        Ok(idx.clamp(1, self.knots.len() - 1) - 1)
    }

    /// Interpolated state and its first two derivatives, as order-2 univariate jets.
    pub fn interpolant(&self, s: f64) -> Result<Vec<Jet3>> {
        let i = self.locate(s)?;
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let h = b - a;
        let theta = Jet3::from_derivatives(1, 0, &[(s - a) / h, 1.0 / h, 0.0]);
        Ok((0..self.dim())
            .map(|c| {
                hermite(
                    &theta,
                    h,
                    self.states[i][c],
                    self.rates[i][c],
                    self.accels[i][c],
                    self.states[i + 1][c],
                    self.rates[i + 1][c],
                    self.accels[i + 1][c],
                )
            })
            .collect())
    }

    pub fn state(&self, s: f64) -> Result<Vec<f64>> {
        Ok(self.interpolant(s)?.iter().map(Jet3::value).collect())
    }

    /// Order-3 jets of the exact solution through the interpolated state at `s`.
    pub fn jets(&self, s: f64) -> Result<Vec<Jet3>> {
        let y = self.state(s)?;
        taylor_solution(&y, |v| (self.rhs)(v))
    }
}

/// Integrates from `s0` towards `s_end` (either direction).
fn integrate_direction(
    rhs: &Rhs,
    y0: &[f64],
    s0: f64,
    s_end: f64,
    watches: &[Watch],
    tol: f64,
) -> Result<Trajectory> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let dir = if s_end >= s0 { 1.0 } else { -1.0 };
    let dim = y0.len();
    let mut t = s0;
    let mut y = y0.to_vec();
    let mut f = eval_f64(rhs, &y)?;
    let mut acc = second_derivative(rhs, &y)?;
    let mut traj = Trajectory {
        knots: vec![t],
        states: vec![y.clone()],
        rates: vec![f.clone()],
        accels: vec![acc.clone()],
        events: Vec::new(),
    };
    if s_end == s0 {
        return Ok(traj);
    }
    let mut g_prev: Vec<f64> = watches.iter().map(|w| (w.func)(&y)).collect();
    let mut h = 1e-3_f64.min((s_end - s0).abs());

    for _ in 0..MAX_STEPS {
        let remaining = (s_end - t).abs();
        if remaining <= 1e-14 * (1.0 + s_end.abs()) {
            return Ok(traj);
        }
        h = h.min(remaining);
        if h < MIN_STEP {
            traj.events.push(Event {
                s: t,
                kind: EventKind::StepUnderflow,
            });
            return Ok(traj);
        }
        let step = dir * h;
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(f.clone());
        let mut failed = false;
        for stage in 1..7 {
            let yi: Vec<f64> = (0..dim)
                .map(|c| y[c] + step * (0..stage).map(|j| A[stage][j] * k[j][c]).sum::<f64>())
                .collect();
            match eval_f64(rhs, &yi) {
                Ok(v) => k.push(v),
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            h *= 0.25;
            continue;
        }
        let y_new: Vec<f64> = (0..dim)
            .map(|c| y[c] + step * (0..7).map(|j| B[j] * k[j][c]).sum::<f64>())
            .collect();
        let err = ((0..dim)
            .map(|c| {
                let e = step * (0..7).map(|j| E[j] * k[j][c]).sum::<f64>();
                let sc = tol + tol * y[c].abs().max(y_new[c].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / dim as f64)
            .sqrt();
        if !err.is_finite() || err > 1.0 {
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.25
            };
            h *= factor;
            continue;
        }
        let t_new = t + step;
        let f_new = k[6].clone();
        let acc_new = match second_derivative(rhs, &y_new) {
            Ok(a) => a,
            Err(_) => {
                h *= 0.25;
                continue;
            }
        };

        // events on the accepted step, located on the step's Hermite interpolant
        let g_new: Vec<f64> = watches.iter().map(|w| (w.func)(&y_new)).collect();
        let mut terminal: Option<(f64, usize)> = None;
        for (wi, w) in watches.iter().enumerate() {
            if g_prev[wi] == 0.0 || g_prev[wi].signum() == g_new[wi].signum() {
                continue;
            }
            let interp = |tau: f64| -> Vec<f64> {
                let theta = Jet3::constant_with_order(1, 0, (tau - t) / step);
                (0..dim)
                    .map(|c| {
                        hermite(
                            &theta, step, y[c], f[c], acc[c], y_new[c], f_new[c], acc_new[c],
                        )
                        .value()
                    })
                    .collect()
            };
            let (mut lo, mut hi) = (t, t_new);
            let g_lo = g_prev[wi];
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let gm = (w.func)(&interp(mid));
                if gm.signum() == g_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if w.terminal {
                let earlier = terminal.map_or(true, |(r, _)| (root - t).abs() < (r - t).abs());
                if earlier {
                    terminal = Some((root, wi));
                }
            } else {
                traj.events.push(Event {
                    s: root,
                    kind: EventKind::TurningPoint {
                        simple: true,
                        mu: interp(root)[0],
                    },
                });
            }
        }
        if let Some((root, wi)) = terminal {
            // stop slightly before the singular locus, on the interpolant
            let theta = Jet3::constant_with_order(1, 0, (root - t) / step);
            let y_stop: Vec<f64> = (0..dim)
                .map(|c| {
                    hermite(
                        &theta, step, y[c], f[c], acc[c], y_new[c], f_new[c], acc_new[c],
                    )
                    .value()
                })
                .collect();
            traj.events.retain(|e| (e.s - t) * dir <= (root - t) * dir);
            if (root - t).abs() > 1e-14 {
                let f_stop = eval_f64(rhs, &y_stop)?;
                let acc_stop = second_derivative(rhs, &y_stop)?;
                traj.knots.push(root);
                traj.states.push(y_stop);
                traj.rates.push(f_stop);
                traj.accels.push(acc_stop);
            }
            traj.events.push(Event {
                s: root,
                kind: EventKind::Singular {
                    quantity: watches[wi].name.clone(),
                },
            });
            return Ok(traj);
        }

        t = t_new;
        y = y_new;
        f = f_new;
        acc = acc_new;
        g_prev = g_new;
        traj.knots.push(t);
        traj.states.push(y.clone());
        traj.rates.push(f.clone());
        traj.accels.push(acc.clone());

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    traj.events.push(Event {
        s: t,
        kind: EventKind::StepLimit,
    });
    Ok(traj)
}

/// Integrates `y′ = rhs(y)` with `y(0) = y0` over `span ∋ 0`, forward and backward,
/// and merges both halves into one dense solution.
pub fn integrate(rhs: Rhs, y0: &[f64], span: (f64, f64), watches: &[Watch], tol: f64) -> Result<DenseSolution> {
    if !(span.0 <= 0.0 && span.1 >= 0.0) {
        return Err(Error::usage(format!(
            "span [{}, {}] must contain the initial point 0",
            span.0, span.1
        )));
    }
    let fwd = integrate_direction(&rhs, y0, 0.0, span.1, watches, tol)?;
    let bwd = integrate_direction(&rhs, y0, 0.0, span.0, watches, tol)?;
    let mut knots: Vec<f64> = bwd.knots.iter().rev().copied().collect();
    let mut states: Vec<Vec<f64>> = bwd.states.iter().rev().cloned().collect();
    let mut rates: Vec<Vec<f64>> = bwd.rates.iter().rev().cloned().collect();
    let mut accels: Vec<Vec<f64>> = bwd.accels.iter().rev().cloned().collect();
    knots.extend_from_slice(&fwd.knots[1..]);
    states.extend_from_slice(&fwd.states[1..]);
    rates.extend_from_slice(&fwd.rates[1..]);
    accels.extend_from_slice(&fwd.accels[1..]);
    if knots.len() < 2 {
        return Ok(DenseSolution::constant(
            y0.to_vec(),
            (0.0, 0.0),
            rhs,
            Vec::new(),
        ));
    }
    let mut events: Vec<Event> = bwd.events.into_iter().rev().collect();
    events.extend(fwd.events);
    Ok(DenseSolution {
        knots,
        states,
        rates,
        accels,
        rhs,
        events,
    })
}
