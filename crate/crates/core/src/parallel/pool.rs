//! Master/worker pools.
//!
//! The master dispatches one job at a time to an idle worker and consumes
//! completions one at a time. Completion order is either modeled (every job
//! gets a seeded virtual duration and completions are released in virtual
//! time order) or, for OS threads without a delay model, the order in which
//! results physically arrive.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};

use crossbeam_channel::{unbounded, Receiver, Sender};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_seed, RandomStream};

pub trait PoolJob: Send {
    /// Phantom jobs carry no work and complete without delay.
    fn is_phantom(&self) -> bool {
        false
    }
}

/// Virtual duration of one job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DelayModel {
    Constant(f64),
    Exponential(f64),
}

impl DelayModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DelayModel::Constant(x) if x >= 0.0 && x.is_finite() => Ok(()),
            DelayModel::Exponential(r) if r > 0.0 && r.is_finite() => Ok(()),
            other => Err(Error::config("pool.delay", format!("invalid delay model {other:?}"))),
        }
    }

    fn draw(&self, stream: &mut RandomStream) -> f64 {
        match *self {
            DelayModel::Constant(x) => x,
            DelayModel::Exponential(rate) => stream.next_exponential(rate),
        }
    }
}

impl std::str::FromStr for DelayModel {
    type Err = Error;

    /// `constant:<x>` or `exponential:<rate>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("pool.delay", format!("expected constant:<x> or exponential:<rate>, got `{s}`"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = value.trim().parse().map_err(|_| bad())?;
        let model = match kind.trim() {
            "constant" => DelayModel::Constant(v),
            "exponential" => DelayModel::Exponential(v),
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

impl std::fmt::Display for DelayModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DelayModel::Constant(x) => write!(f, "constant:{x}"),
            DelayModel::Exponential(r) => write!(f, "exponential:{r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Threads,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub backend: Backend,
    pub workers: usize,
    /// Required for the simulated backend; optional for threads.
    pub delay: Option<DelayModel>,
    /// Job id whose worker is made to fail (fault injection).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail_job: Option<u64>,
}

impl PoolSpec {
    pub fn simulated(workers: usize, delay: DelayModel) -> Self {
        Self {
            backend: Backend::Simulated,
            workers,
            delay: Some(delay),
            fail_job: None,
        }
    }

    pub fn threads(workers: usize, delay: Option<DelayModel>) -> Self {
        Self {
            backend: Backend::Threads,
            workers,
            delay,
            fail_job: None,
        }
    }

    pub fn with_failure(mut self, job: u64) -> Self {
        self.fail_job = Some(job);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers < 1 {
            return Err(Error::config("pool.workers", "need at least one worker"));
        }
        if let Some(d) = &self.delay {
            d.validate()?;
        }
        if self.backend == Backend::Simulated && self.delay.is_none() {
            return Err(Error::config("pool.delay", "required by the simulated backend"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Master,
    Worker(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: Endpoint,
    pub to: Endpoint,
    pub job: u64,
    pub phantom: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion<R> {
    pub worker: usize,
    pub job: u64,
    pub reply: R,
}

pub trait Pool<J: PoolJob, R> {
    fn workers(&self) -> usize;

    /// Hands `job` to `worker`, which must be idle. Returns the job id.
    fn dispatch(&mut self, worker: usize, job: J) -> Result<u64>;

    /// Next completed job. Errors if a worker failed or nothing is in flight.
    fn next_completion(&mut self) -> Result<Completion<R>>;

    fn in_flight(&self) -> usize;

    fn messages(&self) -> &[Message];
}

/// Virtual clock shared by the modeled backends.
struct Clock {
    now: f64,
    seq: u64,
    streams: Vec<RandomStream>,
    delay: DelayModel,
    // (time, seq) -> job
    heap: BinaryHeap<Reverse<(OrdF64, u64, u64, usize)>>,
}

#[derive(Debug, Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Clock {
    fn new(workers: usize, delay: DelayModel, seed: u64) -> Self {
        let base = derive_seed(seed, u64::MAX);
        Self {
            now: 0.0,
            seq: 0,
            streams: (0..workers as u64).map(|w| RandomStream::new(base, w)).collect(),
            delay,
            heap: BinaryHeap::new(),
        }
    }

    fn schedule(&mut self, worker: usize, job: u64, phantom: bool) {
        let d = if phantom {
            0.0
        } else {
            self.delay.draw(&mut self.streams[worker])
        };
        self.heap
            .push(Reverse((OrdF64(self.now + d), self.seq, job, worker)));
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<(u64, usize)> {
        let Reverse((t, _, job, worker)) = self.heap.pop()?;
        self.now = t.0;
        Some((job, worker))
    }
}

struct Log {
    messages: Vec<Message>,
    next_job: u64,
    busy: Vec<bool>,
}

impl Log {
    fn new(workers: usize) -> Self {
        Self {
            messages: Vec::new(),
            next_job: 0,
            busy: vec![false; workers],
        }
    }

    fn dispatch(&mut self, worker: usize, phantom: bool) -> Result<u64> {
        match self.busy.get(worker) {
            None => return Err(Error::Pool(format!("no worker {worker}"))),
            Some(true) => return Err(Error::Pool(format!("worker {worker} is busy"))),
            Some(false) => {}
        }
        self.busy[worker] = true;
        let job = self.next_job;
        self.next_job += 1;
        self.messages.push(Message {
            from: Endpoint::Master,
            to: Endpoint::Worker(worker),
            job,
            phantom,
        });
        Ok(job)
    }

    fn complete(&mut self, worker: usize, job: u64, phantom: bool) {
        self.busy[worker] = false;
        self.messages.push(Message {
            from: Endpoint::Worker(worker),
            to: Endpoint::Master,
            job,
            phantom,
        });
    }
}

/// Event-queue simulation: the master thread runs each job at dispatch and
/// releases its result at the modeled completion time.
pub struct SimulatedPool<'h, J, R> {
    handler: &'h (dyn Fn(J) -> R + Sync),
    clock: Clock,
    log: Log,
    done: HashMap<u64, (R, bool)>,
    fail_job: Option<u64>,
}

impl<'h, J: PoolJob, R> SimulatedPool<'h, J, R> {
    pub fn new(workers: usize, delay: DelayModel, seed: u64, handler: &'h (dyn Fn(J) -> R + Sync)) -> Self {
        Self {
            handler,
            clock: Clock::new(workers, delay, seed),
            log: Log::new(workers),
            done: HashMap::new(),
            fail_job: None,
        }
    }

    pub fn fail_on(mut self, job: Option<u64>) -> Self {
        self.fail_job = job;
        self
    }
}

impl<J: PoolJob, R> Pool<J, R> for SimulatedPool<'_, J, R> {
    fn workers(&self) -> usize {
        self.log.busy.len()
    }

    fn dispatch(&mut self, worker: usize, job: J) -> Result<u64> {
        let phantom = job.is_phantom();
        let id = self.log.dispatch(worker, phantom)?;
        let reply = (self.handler)(job);
        self.done.insert(id, (reply, phantom));
        self.clock.schedule(worker, id, phantom);
        Ok(id)
    }

    fn next_completion(&mut self) -> Result<Completion<R>> {
        let (job, worker) = self
            .clock
            .pop()
            .ok_or_else(|| Error::Pool("no job in flight".into()))?;
        if self.fail_job == Some(job) {
            return Err(Error::Pool(format!("worker {worker} failed on job {job}")));
        }
        let (reply, phantom) = self.done.remove(&job).expect("scheduled job has a result");
        self.log.complete(worker, job, phantom);
        Ok(Completion { worker, job, reply })
    }

    fn in_flight(&self) -> usize {
        self.clock.heap.len()
    }

    fn messages(&self) -> &[Message] {
        &self.log.messages
    }
}

type Envelope<J> = (u64, J);
type Reply<R> = (usize, u64, bool, std::result::Result<R, String>);

/// Body of an OS-thread worker: run jobs until the job channel closes.
/// Phantoms are echoed straight back; a panicking handler is reported as a
/// failed job instead of taking the master down.
pub fn worker_loop<J: PoolJob, R>(
    worker: usize,
    jobs: Receiver<Envelope<J>>,
    replies: Sender<Reply<R>>,
    handler: &(dyn Fn(J) -> R + Sync),
) {
    for (id, job) in jobs.iter() {
        let phantom = job.is_phantom();
        let out = catch_unwind(AssertUnwindSafe(|| handler(job))).map_err(|p| {
            p.downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "worker panicked".into())
        });
        if replies.send((worker, id, phantom, out)).is_err() {
            return;
        }
    }
}

/// OS-thread workers. Results are released in modeled order when a delay
/// model is given, otherwise in arrival order.
pub struct ThreadedPool<J, R> {
    senders: Vec<Sender<Envelope<J>>>,
    replies: Receiver<Reply<R>>,
    clock: Option<Clock>,
    log: Log,
    buffered: HashMap<u64, Reply<R>>,
    in_flight: usize,
    fail_job: Option<u64>,
}

impl<J: PoolJob, R> ThreadedPool<J, R> {
    fn receive(&mut self) -> Result<Reply<R>> {
        self.replies
            .recv()
            .map_err(|_| Error::Pool("all workers disconnected".into()))
    }

    fn accept(&mut self, (worker, job, phantom, out): Reply<R>) -> Result<Completion<R>> {
        self.in_flight -= 1;
        let reply = out.map_err(|e| Error::Pool(format!("worker {worker} failed on job {job}: {e}")))?;
        if self.fail_job == Some(job) {
            return Err(Error::Pool(format!("worker {worker} failed on job {job}")));
        }
        self.log.complete(worker, job, phantom);
        Ok(Completion { worker, job, reply })
    }
}

impl<J: PoolJob, R> Pool<J, R> for ThreadedPool<J, R> {
    fn workers(&self) -> usize {
        self.senders.len()
    }

    fn dispatch(&mut self, worker: usize, job: J) -> Result<u64> {
        let phantom = job.is_phantom();
        let id = self.log.dispatch(worker, phantom)?;
        self.senders[worker]
            .send((id, job))
            .map_err(|_| Error::Pool(format!("worker {worker} disconnected")))?;
        if let Some(c) = self.clock.as_mut() {
            c.schedule(worker, id, phantom);
        }
        self.in_flight += 1;
        Ok(id)
    }

    fn next_completion(&mut self) -> Result<Completion<R>> {
        if self.in_flight == 0 {
            return Err(Error::Pool("no job in flight".into()));
        }
        let Some(clock) = self.clock.as_mut() else {
            let r = self.receive()?;
            return self.accept(r);
        };
        let (want, _) = clock.pop().expect("in-flight job is scheduled");
        while !self.buffered.contains_key(&want) {
            let r = self.receive()?;
            self.buffered.insert(r.1, r);
        }
        let r = self.buffered.remove(&want).expect("just checked");
        self.accept(r)
    }

    fn in_flight(&self) -> usize {
        self.in_flight
    }

    fn messages(&self) -> &[Message] {
        &self.log.messages
    }
}

/// Runs `master` against a pool built from `spec`. Threads are scoped, so the
/// handler may borrow from the caller; they are joined before returning.
pub fn with_pool<J, R, T>(
    spec: &PoolSpec,
    seed: u64,
    handler: &(dyn Fn(J) -> R + Sync),
    master: impl FnOnce(&mut dyn Pool<J, R>) -> T,
) -> Result<T>
where
    J: PoolJob,
    R: Send,
{
    spec.validate()?;
    match spec.backend {
        Backend::Simulated => {
            let delay = spec.delay.expect("validated");
            let mut pool = SimulatedPool::new(spec.workers, delay, seed, handler).fail_on(spec.fail_job);
            Ok(master(&mut pool))
        }
        Backend::Threads => Ok(std::thread::scope(|scope| {
            let (reply_tx, reply_rx) = unbounded();
            let mut senders = Vec::with_capacity(spec.workers);
            for w in 0..spec.workers {
                let (tx, rx) = unbounded();
                senders.push(tx);
                let reply_tx = reply_tx.clone();
                scope.spawn(move || worker_loop(w, rx, reply_tx, handler));
            }
            drop(reply_tx);
            let mut pool = ThreadedPool {
                senders,
                replies: reply_rx,
                clock: spec.delay.map(|d| Clock::new(spec.workers, d, seed)),
                log: Log::new(spec.workers),
                buffered: HashMap::new(),
                in_flight: 0,
                fail_job: spec.fail_job,
            };
            let out = master(&mut pool);
            // Closing the job channels lets every worker drain and exit.
            drop(pool);
            out
        })),
    }
}
