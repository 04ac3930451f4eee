use std::time::Duration;

/// Exponential reconnect delay: 1 s doubling to a 320 s cap, reset once a
/// connection has stayed up for 60 s.
#[derive(Debug, Clone)]
pub struct Backoff {
    initial: Duration,
    factor: u32,
    cap: Duration,
    healthy_after: Duration,
    next: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff::new(
            Duration::from_secs(1),
            2,
            Duration::from_secs(320),
            Duration::from_secs(60),
        )
    }
}

impl Backoff {
    pub fn new(initial: Duration, factor: u32, cap: Duration, healthy_after: Duration) -> Self {
        assert!(factor >= 1 && initial <= cap);
        Backoff {
            initial,
            factor,
            cap,
            healthy_after,
            next: initial,
        }
    }

    /// Delay before the next attempt; advances the schedule.
    pub fn next_delay(&mut self) -> Duration {
        let delay = self.next;
        self.next = self.next.saturating_mul(self.factor).min(self.cap);
        delay
    }

    pub fn reset(&mut self) {
        self.next = self.initial;
    }

    /// Call when a connection ends after being up for `uptime`.
    pub fn on_disconnect(&mut self, uptime: Duration) {
        if uptime >= self.healthy_after {
            self.reset();
        }
    }

    pub fn cap(&self) -> Duration {
        self.cap
    }
}
