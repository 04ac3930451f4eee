use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};

/// Shared shutdown flag.
#[derive(Debug, Clone, Default)]
pub struct StopSignal(Arc<AtomicBool>);

impl StopSignal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stop(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_stopped(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

/// Time source for receipt dates and backoff waits.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;

    /// Waits for `duration`, returning early once `stop` is raised.
    fn sleep(&self, duration: Duration, stop: &StopSignal);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }

    fn sleep(&self, duration: Duration, stop: &StopSignal) {
        const SLICE: Duration = Duration::from_millis(100);
        let mut left = duration;
        while !left.is_zero() && !stop.is_stopped() {
            let step = left.min(SLICE);
            std::thread::sleep(step);
            left -= step;
        }
    }
}

#[derive(Debug)]
struct VirtualState {
    now: DateTime<Utc>,
    sleeps: Vec<Duration>,
}

/// Clock that advances only when slept on or told to, recording every wait.
#[derive(Debug, Clone)]
pub struct VirtualClock(Arc<Mutex<VirtualState>>);

impl VirtualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        VirtualClock(Arc::new(Mutex::new(VirtualState {
            now: start,
            sleeps: Vec::new(),
        })))
    }

    pub fn advance(&self, duration: Duration) {
        let mut state = self.0.lock().unwrap();
        state.now += chrono::Duration::from_std(duration).expect("duration in range");
    }

    /// Every duration passed to `sleep`, in call order.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.0.lock().unwrap().sleeps.clone()
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> DateTime<Utc> {
        self.0.lock().unwrap().now
    }

    fn sleep(&self, duration: Duration, _stop: &StopSignal) {
        let mut state = self.0.lock().unwrap();
        state.sleeps.push(duration);
        state.now += chrono::Duration::from_std(duration).expect("duration in range");
    }
}
