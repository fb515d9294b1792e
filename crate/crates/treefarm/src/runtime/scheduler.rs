//! Task-to-worker scheduling policies for the farm emitter.

/// How the emitter assigns tasks to worker queues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    /// Dynamic round-robin: next worker in cyclic order whose queue can
    /// accept, skipping full ones.
    Drr,
    /// On-demand: round-robin with every worker queue forced to capacity 1,
    /// so a worker receives a new task only when nearly idle.
    OnDemand,
    /// Weighted: the worker with the lowest total weight of dispatched,
    /// not-yet-returned tasks. Pending weight is decremented when a task's
    /// result comes back on the feedback channel, which approximates "weight
    /// currently in the worker's input queue" from the emitter's viewpoint.
    Weighted,
}

impl std::fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SchedulerKind::Drr => "drr",
            SchedulerKind::OnDemand => "od",
            SchedulerKind::Weighted => "ws",
        })
    }
}

pub struct Scheduler {
    kind: SchedulerKind,
    cursor: usize,
    pending: Vec<f64>,
}

impl Scheduler {
    pub fn new(kind: SchedulerKind, workers: usize) -> Self {
        Scheduler { kind, cursor: 0, pending: vec![0.0; workers] }
    }

    pub fn kind(&self) -> SchedulerKind {
        self.kind
    }

    /// Per-worker pending weight (meaningful for `Weighted`).
    pub fn pending(&self) -> &[f64] {
        &self.pending
    }

    /// Chooses the worker for the next task, or `None` when every queue is
    /// full (the emitter then drains feedback and retries).
    pub fn pick(&mut self, is_full: impl Fn(usize) -> bool) -> Option<usize> {
        let workers = self.pending.len();
        match self.kind {
            SchedulerKind::Drr | SchedulerKind::OnDemand => {
                for step in 0..workers {
                    let w = (self.cursor + step) % workers;
                    if !is_full(w) {
                        self.cursor = (w + 1) % workers;
                        return Some(w);
                    }
                }
                None
            }
            SchedulerKind::Weighted => {
                let mut best: Option<usize> = None;
                for w in 0..workers {
                    if is_full(w) {
                        continue;
                    }
                    match best {
                        Some(b) if self.pending[w] >= self.pending[b] => {}
                        _ => best = Some(w),
                    }
                }
                best
            }
        }
    }

    /// Records a task of the given weight pushed to a worker.
    pub fn task_dispatched(&mut self, worker: usize, weight: f64) {
        self.pending[worker] += weight;
    }

    /// Records a task's result returning from a worker.
    pub fn result_received(&mut self, worker: usize, weight: f64) {
        self.pending[worker] -= weight;
    }
}
