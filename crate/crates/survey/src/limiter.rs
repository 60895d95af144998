use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Token bucket shared by all workers.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    per_second: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    /// `per_second` tokens are added continuously up to `burst`.
    pub fn new(per_second: f64, burst: usize) -> Self {
        assert!(per_second > 0.0, "rate must be positive");
        let capacity = burst.max(1) as f64;
        RateLimiter { capacity, per_second, state: Mutex::new((capacity, Instant::now())) }
    }

    /// Block until a token is available and take it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().unwrap();
                let now = Instant::now();
                let (tokens, last) = *state;
                let tokens = (tokens + now.duration_since(last).as_secs_f64() * self.per_second).min(self.capacity);
                if tokens >= 1.0 {
                    *state = (tokens - 1.0, now);
                    return;
                }
                *state = (tokens, now);
                Duration::from_secs_f64((1.0 - tokens) / self.per_second)
            };
            std::thread::sleep(wait);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_then_throttle() {
        let limiter = RateLimiter::new(200.0, 3);
        let start = Instant::now();
        for _ in 0..3 {
            limiter.acquire();
        }
        let burst = start.elapsed();
        for _ in 0..10 {
            limiter.acquire();
        }
        assert!(burst < Duration::from_millis(40));
        // Ten more tokens at 200/s need at least 50 ms.
        assert!(start.elapsed() >= Duration::from_millis(45));
    }

    #[test]
    fn shared_across_threads() {
        let limiter = RateLimiter::new(500.0, 1);
        let start = Instant::now();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| {
                    for _ in 0..5 {
                        limiter.acquire();
                    }
                });
            }
        });
        assert!(start.elapsed() >= Duration::from_millis(35));
    }
}
