//! Streaming recorders for the time march: characteristic-surface traces,
//! time slices, boundary rows, and optional full-field storage.
//!
//! Sampling happens through a four-level time window with cubic
//! interpolation in time and along the normal axis, so a solve's memory is
//! O(grid) plus whatever is recorded.

use crate::error::{LabError, Result};
use crate::geometry::Grid;
use crate::util::interp::{cubic, cubic_deriv};
use crate::util::C64;
use ndarray::Array2;

#[derive(Debug, Clone)]
pub struct IncomingSurface {
    /// Level value of t + y_n.
    pub c: f64,
    /// Lattice in s = t − y_n (ascending).
    pub s: Vec<f64>,
    /// Tangential node range [lo, hi).
    pub tang: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct OutgoingSurface {
    /// Level value of t − y_n.
    pub c: f64,
    /// Lattice in y_n (ascending).
    pub yn: Vec<f64>,
    pub tang: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct BoundarySpec {
    /// Sample times for the first three normal rows.
    pub times: Vec<f64>,
    pub tang: (usize, usize),
}

#[derive(Debug, Clone, Default)]
pub struct RecordSpec {
    pub full_field: bool,
    pub incoming: Vec<IncomingSurface>,
    pub outgoing: Vec<OutgoingSurface>,
    pub time_slices: Vec<f64>,
    pub boundary: Option<BoundarySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Incoming,
    Outgoing,
}

/// Sampled trace on a characteristic surface: values, time derivative, and
/// normal derivative at each (parameter, tangential) lattice point.
#[derive(Debug, Clone)]
pub struct SurfaceTrace {
    pub kind: SurfaceKind,
    pub c: f64,
    pub param: Vec<f64>,
    pub tang0: usize,
    pub h_tang: f64,
    pub u: Array2<C64>,
    pub u_t: Array2<C64>,
    pub u_yn: Array2<C64>,
}

impl SurfaceTrace {
    /// u_s = ½(u_t − u_{y_n}).
    pub fn u_s(&self) -> Array2<C64> {
        let mut out = self.u_t.clone();
        out.zip_mut_with(&self.u_yn, |a, b| *a = 0.5 * (*a - *b));
        out
    }

    /// u_τ = −½(u_t + u_{y_n}).
    pub fn u_tau(&self) -> Array2<C64> {
        let mut out = self.u_t.clone();
        out.zip_mut_with(&self.u_yn, |a, b| *a = -0.5 * (*a + *b));
        out
    }
}

#[derive(Debug, Clone)]
pub struct TimeSlice {
    pub t: f64,
    pub u: Vec<C64>,
    pub u_t: Vec<C64>,
}

/// First three normal rows of the solution on the measured face, sampled at
/// requested times; the D-to-N assembly forms one-sided traces from these.
#[derive(Debug, Clone)]
pub struct BoundaryKit {
    pub times: Vec<f64>,
    pub tang0: usize,
    pub u0: Array2<C64>,
    pub u1: Array2<C64>,
    pub u2: Array2<C64>,
}

/// Full space-time storage (small runs and manufactured-field tests).
#[derive(Debug, Clone)]
pub struct WaveField {
    pub grid: Grid,
    pub t0: f64,
    pub dt: f64,
    pub levels: Vec<Vec<C64>>,
}

impl WaveField {
    pub fn level(&self, m: usize) -> &[C64] {
        &self.levels[m]
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.levels.len() - 1) as f64 * self.dt
    }

    /// Build a field from a closed-form function (manufactured traces).
    pub fn from_fn(
        grid: &Grid,
        t0: f64,
        dt: f64,
        steps: usize,
        f: impl Fn(&[f64], f64) -> C64,
    ) -> WaveField {
        let levels = (0..=steps)
            .map(|m| {
                let t = t0 + m as f64 * dt;
                let mut lv = vec![C64::new(0.0, 0.0); grid.total_nodes()];
                for it in 0..grid.n_tang() {
                    for inorm in 0..grid.n_normal() {
                        let x = grid.coords(it, inorm);
                        lv[grid.idx(it, inorm)] = f(&x[..grid.dim], t);
                    }
                }
                lv
            })
            .collect();
        WaveField {
            grid: grid.clone(),
            t0,
            dt,
            levels,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|lv| lv.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub grid: Grid,
    pub t_start: f64,
    pub dt: f64,
    pub steps: usize,
    pub field: Option<WaveField>,
    pub incoming: Vec<SurfaceTrace>,
    pub outgoing: Vec<SurfaceTrace>,
    pub slices: Vec<TimeSlice>,
    pub boundary: Option<BoundaryKit>,
}

#[derive(Clone, Copy)]
enum Event {
    SurfacePoint {
        kind: SurfaceKind,
        surf: usize,
        ip: usize,
        it: usize,
        yn: f64,
    },
    Slice(usize),
    BoundaryRow {
        irow: usize,
    },
}

pub(crate) struct RecordPlan {
    grid: Grid,
    spec: RecordSpec,
    /// (time, event) sorted ascending; pointer into it
    events: Vec<(f64, Event)>,
    next_event: usize,
    window: Vec<(f64, Vec<C64>)>,
    full_levels: Vec<Vec<C64>>,
    t_start: f64,
    // accumulating outputs
    incoming: Vec<SurfaceTrace>,
    outgoing: Vec<SurfaceTrace>,
    slices: Vec<TimeSlice>,
    boundary: Option<BoundaryKit>,
}

impl RecordPlan {
    pub fn new(
        spec: &RecordSpec,
        grid: &Grid,
        t_start: f64,
        dt: f64,
        steps: usize,
    ) -> Result<RecordPlan> {
        let t_end = t_start + dt * steps as f64;
        let depth = grid.extent[grid.normal_axis()];
        let wants_events = !(spec.incoming.is_empty()
            && spec.outgoing.is_empty()
            && spec.time_slices.is_empty()
            && spec.boundary.is_none());
        if wants_events && steps < 3 {
            return Err(LabError::Config(
                "trace recording needs at least 3 time steps".into(),
            ));
        }
        let mut events: Vec<(f64, Event)> = Vec::new();

        let mut incoming = Vec::new();
        for (si, surf) in spec.incoming.iter().enumerate() {
            let npar = surf.s.len();
            let ntang = surf.tang.1 - surf.tang.0;
            for (ip, &s) in surf.s.iter().enumerate() {
                let yn = 0.5 * (surf.c - s);
                let t = 0.5 * (surf.c + s);
                if yn < -1e-12 || yn > depth + 1e-12 || t < t_start - 1e-9 || t > t_end + 1e-9 {
                    return Err(LabError::Support(format!(
                        "incoming surface point s={s}, c={} leaves the space-time box",
                        surf.c
                    )));
                }
                for it in surf.tang.0..surf.tang.1 {
                    events.push((
                        t,
                        Event::SurfacePoint {
                            kind: SurfaceKind::Incoming,
                            surf: si,
                            ip,
                            it,
                            yn: yn.max(0.0),
                        },
                    ));
                }
            }
            incoming.push(SurfaceTrace {
                kind: SurfaceKind::Incoming,
                c: surf.c,
                param: surf.s.clone(),
                tang0: surf.tang.0,
                h_tang: grid.h_tang(),
                u: Array2::zeros((npar, ntang)),
                u_t: Array2::zeros((npar, ntang)),
                u_yn: Array2::zeros((npar, ntang)),
            });
        }

        let mut outgoing = Vec::new();
        for (si, surf) in spec.outgoing.iter().enumerate() {
            let npar = surf.yn.len();
            let ntang = surf.tang.1 - surf.tang.0;
            for (ip, &yn) in surf.yn.iter().enumerate() {
                let t = surf.c + yn;
                if !(0.0..=depth + 1e-12).contains(&yn) || t < t_start - 1e-9 || t > t_end + 1e-9 {
                    return Err(LabError::Support(format!(
                        "outgoing surface point yn={yn}, c={} leaves the space-time box",
                        surf.c
                    )));
                }
                for it in surf.tang.0..surf.tang.1 {
                    events.push((
                        t,
                        Event::SurfacePoint {
                            kind: SurfaceKind::Outgoing,
                            surf: si,
                            ip,
                            it,
                            yn,
                        },
                    ));
                }
            }
            outgoing.push(SurfaceTrace {
                kind: SurfaceKind::Outgoing,
                c: surf.c,
                param: surf.yn.clone(),
                tang0: surf.tang.0,
                h_tang: grid.h_tang(),
                u: Array2::zeros((npar, ntang)),
                u_t: Array2::zeros((npar, ntang)),
                u_yn: Array2::zeros((npar, ntang)),
            });
        }

        let mut slices = Vec::new();
        for (i, &t) in spec.time_slices.iter().enumerate() {
            if t < t_start - 1e-9 || t > t_end + 1e-9 {
                return Err(LabError::Support(format!(
                    "time slice t={t} outside [{t_start}, {t_end}]"
                )));
            }
            events.push((t, Event::Slice(i)));
            slices.push(TimeSlice {
                t,
                u: vec![C64::new(0.0, 0.0); grid.total_nodes()],
                u_t: vec![C64::new(0.0, 0.0); grid.total_nodes()],
            });
        }

        let boundary = if let Some(b) = &spec.boundary {
            let ntang = b.tang.1 - b.tang.0;
            for (irow, &t) in b.times.iter().enumerate() {
                if t < t_start - 1e-9 || t > t_end + 1e-9 {
                    return Err(LabError::Support(format!(
                        "boundary sample time t={t} outside the run window"
                    )));
                }
                events.push((t, Event::BoundaryRow { irow }));
            }
            Some(BoundaryKit {
                times: b.times.clone(),
                tang0: b.tang.0,
                u0: Array2::zeros((b.times.len(), ntang)),
                u1: Array2::zeros((b.times.len(), ntang)),
                u2: Array2::zeros((b.times.len(), ntang)),
            })
        } else {
            None
        };

        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(RecordPlan {
            grid: grid.clone(),
            spec: spec.clone(),
            events,
            next_event: 0,
            window: Vec::new(),
            full_levels: Vec::new(),
            t_start,
            incoming,
            outgoing,
            slices,
            boundary,
        })
    }

    pub fn push_level(&mut self, t: f64, u: &[C64]) {
        if self.spec.full_field {
            self.full_levels.push(u.to_vec());
        }
        if self.window.len() == 4 {
            self.window.remove(0);
        }
        self.window.push((t, u.to_vec()));
        if self.window.len() == 4 {
            let cutoff = self.window[2].0 + 1e-12;
            self.process_until(cutoff);
        }
    }

    fn process_until(&mut self, cutoff: f64) {
        while self.next_event < self.events.len() && self.events[self.next_event].0 <= cutoff {
            let (t_ev, ev) = self.events[self.next_event];
            self.handle(t_ev, ev);
            self.next_event += 1;
        }
    }

    fn handle(&mut self, t_ev: f64, ev: Event) {
        let w = &self.window;
        let t0 = w[0].0;
        let dtw = w[1].0 - w[0].0;
        let nn = self.grid.n_normal();
        let hn = self.grid.h_normal();
        match ev {
            Event::SurfacePoint {
                kind,
                surf,
                ip,
                it,
                yn,
            } => {
                // per level: cubic along the normal line, then cubic in time
                let mut vals = [C64::new(0.0, 0.0); 4];
                let mut dvals = [C64::new(0.0, 0.0); 4];
                for (l, (_, lv)) in w.iter().enumerate() {
                    let line = &lv[it * nn..(it + 1) * nn];
                    vals[l] = cubic(line, 0.0, hn, yn);
                    dvals[l] = cubic_deriv(line, 0.0, hn, yn);
                }
                let u = cubic(&vals, t0, dtw, t_ev);
                let u_t = cubic_deriv(&vals, t0, dtw, t_ev);
                let u_yn = cubic(&dvals, t0, dtw, t_ev);
                let target = match kind {
                    SurfaceKind::Incoming => &mut self.incoming[surf],
                    SurfaceKind::Outgoing => &mut self.outgoing[surf],
                };
                let col = it - target.tang0;
                target.u[[ip, col]] = u;
                target.u_t[[ip, col]] = u_t;
                target.u_yn[[ip, col]] = u_yn;
            }
            Event::Slice(i) => {
                let slice = &mut self.slices[i];
                for idx in 0..self.grid.total_nodes() {
                    let vals = [w[0].1[idx], w[1].1[idx], w[2].1[idx], w[3].1[idx]];
                    slice.u[idx] = cubic(&vals, t0, dtw, t_ev);
                    slice.u_t[idx] = cubic_deriv(&vals, t0, dtw, t_ev);
                }
            }
            Event::BoundaryRow { irow } => {
                if let Some(kit) = &mut self.boundary {
                    let (lo, hi) = (kit.tang0, kit.tang0 + kit.u0.shape()[1]);
                    for it in lo..hi {
                        for row in 0..3 {
                            let idx = it * nn + row;
                            let vals = [w[0].1[idx], w[1].1[idx], w[2].1[idx], w[3].1[idx]];
                            let v = cubic(&vals, t0, dtw, t_ev);
                            match row {
                                0 => kit.u0[[irow, it - lo]] = v,
                                1 => kit.u1[[irow, it - lo]] = v,
                                _ => kit.u2[[irow, it - lo]] = v,
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn finish(mut self, dt: f64, steps: usize) -> Result<SolveOutput> {
        // flush any events past the last early cutoff with the final window
        self.process_until(f64::INFINITY);
        let field = if self.spec.full_field {
            Some(WaveField {
                grid: self.grid.clone(),
                t0: self.t_start,
                dt,
                levels: std::mem::take(&mut self.full_levels),
            })
        } else {
            None
        };
        Ok(SolveOutput {
            grid: self.grid,
            t_start: self.t_start,
            dt,
            steps,
            field,
            incoming: self.incoming,
            outgoing: self.outgoing,
            slices: self.slices,
            boundary: self.boundary,
        })
    }
}
