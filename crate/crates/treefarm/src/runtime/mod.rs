//! Farm-with-feedback streaming runtime.
//!
//! One emitter context streams task envelopes into per-worker bounded SPSC
//! queues; every worker's results flow back to the emitter on its own SPSC
//! feedback queue, so the emitter can keep generating work from results
//! (divide-and-conquer as a stream). The runtime never looks inside task
//! payloads.

pub mod scheduler;
pub mod spsc;

use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::thread;
use std::time::Duration;

use crate::error::{Error, Result};
pub use scheduler::{Scheduler, SchedulerKind};

/// Farm shape: worker count, per-worker input queue capacity and scheduling
/// policy. The on-demand policy overrides the input capacity to 1.
#[derive(Debug, Clone, Copy)]
pub struct FarmConfig {
    pub workers: usize,
    pub qsize: usize,
    pub scheduler: SchedulerKind,
}

impl Default for FarmConfig {
    fn default() -> Self {
        FarmConfig { workers: 3, qsize: 4096, scheduler: SchedulerKind::Weighted }
    }
}

impl FarmConfig {
    fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidConfig("farm needs at least 1 worker".into()));
        }
        if self.qsize == 0 {
            return Err(Error::InvalidConfig("queue capacity must be at least 1".into()));
        }
        Ok(())
    }

    fn input_capacity(&self) -> usize {
        match self.scheduler {
            SchedulerKind::OnDemand => 1,
            _ => self.qsize,
        }
    }
}

/// Envelope carrying one payload through the farm, with the scheduling
/// weight the weighted policy consumes. Weight defaults to 1.
#[derive(Debug)]
pub struct Task<T> {
    payload: T,
    weight: f64,
}

impl<T> Task<T> {
    pub fn new(payload: T) -> Self {
        Task { payload, weight: 1.0 }
    }

    pub fn set_weight(&mut self, weight: f64) {
        debug_assert!(weight >= 0.0);
        self.weight = weight;
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn payload(&self) -> &T {
        &self.payload
    }

    pub fn into_payload(self) -> T {
        self.payload
    }
}

/// Where emitter logic deposits the tasks it wants scheduled.
pub struct Outbox<T> {
    staged: VecDeque<Task<T>>,
}

impl<T> Outbox<T> {
    pub fn emit(&mut self, task: Task<T>) {
        self.staged.push_back(task);
    }
}

/// What the emitter decides after seeing one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitterAction {
    /// Keep the stream open; more results are expected.
    Continue,
    /// End of stream: stop workers once everything staged is delivered.
    End,
}

/// Delivery counters of one farm run.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmStats {
    /// Tasks pushed to worker queues.
    pub emitted: u64,
    /// Results received back on feedback queues.
    pub retired: u64,
    /// Results received per worker.
    pub per_worker: Vec<u64>,
    /// Scheduler pending weights after the run drained.
    pub final_pending: Vec<f64>,
}

enum Input<T> {
    Task(Task<T>),
    Eos,
}

enum Feedback<T> {
    Done(Task<T>),
    Failed(Error),
    Exited,
}

/// Spin helper tuned for oversubscribed machines: a few yields, then short
/// sleeps.
struct Backoff {
    spins: u32,
}

impl Backoff {
    fn new() -> Self {
        Backoff { spins: 0 }
    }

    fn reset(&mut self) {
        self.spins = 0;
    }

    fn snooze(&mut self) {
        if self.spins < 8 {
            self.spins += 1;
            thread::yield_now();
        } else {
            thread::sleep(Duration::from_micros(50));
        }
    }
}

/// Runs the farm to completion on the calling thread (emitter) plus
/// `config.workers` spawned worker threads.
///
/// The emitter callback is first invoked with `None`, then once per result
/// arriving on a feedback queue; tasks it stages in the outbox are scheduled
/// to workers. The worker callback transforms one task into one result.
/// Worker errors and panics abort the run after all threads stop.
pub fn run_farm<T, E, W>(config: FarmConfig, mut emitter: E, worker: W) -> Result<FarmStats>
where
    T: Send,
    E: FnMut(Option<Task<T>>, &mut Outbox<T>) -> Result<EmitterAction>,
    W: Fn(Task<T>) -> Result<Task<T>> + Sync,
{
    config.validate()?;
    let workers = config.workers;

    let mut input_tx = Vec::with_capacity(workers);
    let mut input_rx = Vec::with_capacity(workers);
    for _ in 0..workers {
        let (tx, rx) = spsc::channel::<Input<T>>(config.input_capacity());
        input_tx.push(tx);
        input_rx.push(rx);
    }
    let mut feedback_tx = Vec::with_capacity(workers);
    let mut feedback_rx = Vec::with_capacity(workers);
    for _ in 0..workers {
        let (tx, rx) = spsc::channel::<Feedback<T>>(config.qsize);
        feedback_tx.push(tx);
        feedback_rx.push(rx);
    }

    thread::scope(|scope| {
        for (mut input, mut feedback) in input_rx.drain(..).zip(feedback_tx.drain(..)) {
            let worker = &worker;
            scope.spawn(move || {
                let mut backoff = Backoff::new();
                loop {
                    match input.pop() {
                        Some(Input::Eos) => break,
                        Some(Input::Task(task)) => {
                            backoff.reset();
                            let outcome = catch_unwind(AssertUnwindSafe(|| worker(task)));
                            let message = match outcome {
                                Ok(Ok(result)) => Feedback::Done(result),
                                Ok(Err(e)) => Feedback::Failed(e),
                                Err(_) => Feedback::Failed(Error::WorkerPanicked),
                            };
                            push_blocking(&mut feedback, message, &mut backoff);
                        }
                        None => backoff.snooze(),
                    }
                }
                push_blocking(&mut feedback, Feedback::Exited, &mut Backoff::new());
            });
        }

        let mut loop_state = EmitterLoop {
            scheduler: Scheduler::new(config.scheduler, workers),
            input_tx,
            feedback_rx,
            fb_cursor: 0,
            undelivered: VecDeque::new(),
            stats: FarmStats {
                emitted: 0,
                retired: 0,
                per_worker: vec![0; workers],
                final_pending: vec![],
            },
            failure: None,
        };
        let result = loop_state.drive(&mut emitter);
        loop_state.shut_down();
        match result.and(loop_state.failure.map_or(Ok(()), Err)) {
            Ok(()) => {
                loop_state.stats.final_pending = loop_state.scheduler.pending().to_vec();
                Ok(loop_state.stats)
            }
            Err(e) => Err(e),
        }
    })
}

fn push_blocking<T>(tx: &mut spsc::Producer<T>, mut value: T, backoff: &mut Backoff) {
    while let Err(back) = tx.push(value) {
        value = back;
        backoff.snooze();
    }
}

struct EmitterLoop<T> {
    scheduler: Scheduler,
    input_tx: Vec<spsc::Producer<Input<T>>>,
    feedback_rx: Vec<spsc::Consumer<Feedback<T>>>,
    fb_cursor: usize,
    undelivered: VecDeque<Task<T>>,
    stats: FarmStats,
    failure: Option<Error>,
}

impl<T> EmitterLoop<T> {
    /// Main loop: deliver staged tasks, feed results back into the emitter
    /// callback, stop at end-of-stream or on the first failure.
    fn drive<E>(&mut self, emitter: &mut E) -> Result<()>
    where
        E: FnMut(Option<Task<T>>, &mut Outbox<T>) -> Result<EmitterAction>,
    {
        let mut outbox = Outbox { staged: VecDeque::new() };
        let mut action = emitter(None, &mut outbox)?;
        self.undelivered.append(&mut outbox.staged);
        let mut backoff = Backoff::new();

        loop {
            let delivered = self.deliver_staged();
            if action == EmitterAction::End && self.undelivered.is_empty() {
                return Ok(());
            }
            match self.poll_feedback() {
                Some(Feedback::Done(result)) => {
                    backoff.reset();
                    if action == EmitterAction::Continue {
                        action = emitter(Some(result), &mut outbox)?;
                        self.undelivered.append(&mut outbox.staged);
                    }
                }
                Some(Feedback::Failed(e)) => return Err(e),
                Some(Feedback::Exited) => {
                    return Err(Error::Protocol("worker exited before end-of-stream"))
                }
                None => {
                    if !delivered {
                        backoff.snooze();
                    }
                }
            }
        }
    }

    /// Pushes staged tasks to scheduled workers until the stage empties or
    /// every eligible queue is full. Returns whether anything was delivered.
    fn deliver_staged(&mut self) -> bool {
        let mut delivered = false;
        while !self.undelivered.is_empty() {
            let input_tx = &self.input_tx;
            match self.scheduler.pick(|w| input_tx[w].is_full()) {
                Some(w) => {
                    let task = self.undelivered.pop_front().unwrap();
                    let weight = task.weight();
                    if self.input_tx[w].push(Input::Task(task)).is_err() {
                        unreachable!("scheduler picked a full queue");
                    }
                    self.scheduler.task_dispatched(w, weight);
                    self.stats.emitted += 1;
                    delivered = true;
                }
                None => break,
            }
        }
        delivered
    }

    /// Round-robin poll of the feedback queues; accounts retirement.
    fn poll_feedback(&mut self) -> Option<Feedback<T>> {
        let workers = self.feedback_rx.len();
        for step in 0..workers {
            let w = (self.fb_cursor + step) % workers;
            if let Some(message) = self.feedback_rx[w].pop() {
                self.fb_cursor = (w + 1) % workers;
                if let Feedback::Done(task) = &message {
                    self.scheduler.result_received(w, task.weight());
                    self.stats.retired += 1;
                    self.stats.per_worker[w] += 1;
                }
                return Some(message);
            }
        }
        None
    }

    /// Delivers end-of-stream to every worker and drains feedback until all
    /// workers have exited, so the scoped join below cannot deadlock.
    fn shut_down(&mut self) {
        let mut backoff = Backoff::new();
        let mut exited = 0;
        let workers = self.input_tx.len();
        for w in 0..workers {
            let mut message = Input::Eos;
            loop {
                match self.input_tx[w].push(message) {
                    Ok(()) => break,
                    Err(back) => {
                        message = back;
                        self.absorb_feedback(&mut exited);
                        backoff.snooze();
                    }
                }
            }
        }
        while exited < workers {
            if !self.absorb_feedback(&mut exited) {
                backoff.snooze();
            }
        }
    }

    fn absorb_feedback(&mut self, exited: &mut usize) -> bool {
        match self.poll_feedback() {
            Some(Feedback::Exited) => {
                *exited += 1;
                true
            }
            Some(Feedback::Failed(e)) => {
                if self.failure.is_none() {
                    self.failure = Some(e);
                }
                true
            }
            Some(Feedback::Done(_)) => true,
            None => false,
        }
    }
}
